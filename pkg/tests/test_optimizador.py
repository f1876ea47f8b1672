"""Pruebas de Adam y del descenso de gradiente."""

import numpy as np
import pytest

from src.optimizador import DescensoGradiente, aplicar_paso, crear_estado_adam, paso_adam
from src.redes import VectorParametros


def test_gradiente_cero_no_mueve_parametros():
    params = np.array([1.0, -2.0])
    nuevos, estado = paso_adam(params, np.zeros(2), crear_estado_adam(2))
    assert np.array_equal(nuevos, params)
    assert estado.pasos == 1


def test_primer_paso():
    nuevos, _ = paso_adam(np.array([0.0]), np.array([1.0]), crear_estado_adam(1, 1e-3))
    assert nuevos[0] == pytest.approx(-1e-3, rel=1e-6)


def test_dos_pasos_contra_recurrencia_escalar():
    lr, b1, b2, eps = 1e-2, 0.9, 0.999, 1e-8
    g = np.array([0.5, -1.5, 2.0])
    theta = np.array([1.0, 0.0, -1.0])
    estado = crear_estado_adam(3, lr)
    obtenido = theta
    for _ in range(2):
        obtenido, estado = paso_adam(obtenido, g, estado)

    for i in range(3):
        m = v = 0.0
        t_i = theta[i]
        for t in (1, 2):
            m = b1 * m + (1 - b1) * g[i]
            v = b2 * v + (1 - b2) * g[i] ** 2
            t_i -= lr * (m / (1 - b1 ** t)) / ((v / (1 - b2 ** t)) ** 0.5 + eps)
        assert abs(obtenido[i] - t_i) < 1e-12


def test_conserva_tipo_vector_parametros():
    params = VectorParametros(np.array([1.0, 2.0]), [("p", (2,))])
    nuevos, _ = paso_adam(params, np.array([1.0, 1.0]), crear_estado_adam(2))
    assert isinstance(nuevos, VectorParametros)
    assert nuevos.disposicion == params.disposicion
    assert params.valores[0] == 1.0


def test_longitudes_incompatibles():
    with pytest.raises(ValueError):
        paso_adam(np.zeros(3), np.zeros(2), crear_estado_adam(3))
    with pytest.raises(ValueError):
        crear_estado_adam(2, tasa_aprendizaje=0.0)


def test_descenso_gradiente():
    nuevos, opt = aplicar_paso(np.array([1.0]), np.array([2.0]), DescensoGradiente(0.1))
    assert nuevos == pytest.approx([0.8])
    assert opt.tasa_aprendizaje == 0.1
