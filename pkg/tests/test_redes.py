"""Pruebas de vectores de parámetros y MLP."""

import numpy as np
import pytest

from src.redes import (
    EspecificacionMLP,
    VectorParametros,
    evaluar_mlp,
    gradientes_perdida,
    inicializar_mlp,
    mlp_cinta,
    nodos_segmentos,
)
from tests.conftest import diferencias_finitas


def _oraculo_mlp(params, espec, x):
    h = np.atleast_2d(x)
    n_capas = len(espec.tamanos_capas) - 1
    for k in range(n_capas):
        W = params.vista(f"capa{k}.W")
        b = params.vista(f"capa{k}.b")
        z = np.zeros((h.shape[0], W.shape[1]))
        for fila in range(h.shape[0]):
            for j in range(W.shape[1]):
                z[fila, j] = sum(h[fila, i] * W[i, j] for i in range(W.shape[0])) + b[j]
        h = np.maximum(z, 0.0) if k < n_capas - 1 else z
    return h


def test_parametros_cero_dan_salida_cero(rng):
    espec = EspecificacionMLP((3, 5, 2))
    params = VectorParametros(np.zeros(espec.numero_parametros), espec.disposicion())
    assert np.all(evaluar_mlp(params, espec, rng.normal(size=3)) == 0.0)


def test_capa_identidad():
    espec = EspecificacionMLP((2, 2))
    params = VectorParametros(np.zeros(espec.numero_parametros), espec.disposicion())
    params = params.con_segmento("capa0.W", np.eye(2))
    assert evaluar_mlp(params, espec, [1.5, -2.0]) == pytest.approx([1.5, -2.0])


def test_mlp_coincide_con_oraculo(rng):
    espec = EspecificacionMLP((4, 8, 1))
    params = inicializar_mlp(espec, rng)
    params = params.con_valores(params.valores + rng.normal(scale=0.1, size=params.tamano))
    x = rng.normal(size=(5, 4))
    assert np.allclose(evaluar_mlp(params, espec, x), _oraculo_mlp(params, espec, x), atol=1e-12)
    assert evaluar_mlp(params, espec, x[0]).shape == (1,)


def test_inicializacion_acotada_por_fan_in(rng):
    espec = EspecificacionMLP((16, 4, 1))
    params = inicializar_mlp(espec, rng)
    assert np.all(np.abs(params.vista("capa0.W")) <= 1.0 / 4.0)
    assert np.all(params.vista("capa0.b") == 0.0)
    assert params.tamano == 16 * 4 + 4 + 4 + 1


def test_errores_de_dimension(rng):
    espec = EspecificacionMLP((3, 4, 1))
    params = inicializar_mlp(espec, rng)
    with pytest.raises(ValueError):
        evaluar_mlp(params, espec, np.zeros(2))
    otra = inicializar_mlp(EspecificacionMLP((3, 5, 1)), rng)
    with pytest.raises(ValueError):
        evaluar_mlp(otra, espec, np.zeros(3))
    with pytest.raises(ValueError):
        EspecificacionMLP((3,))
    with pytest.raises(ValueError):
        EspecificacionMLP((3, 0, 1))


def test_gradiente_cuadratico():
    params = VectorParametros(np.array([3.0]), [("p", (1,))])
    valor, grad = gradientes_perdida(lambda c, p: c.sumar(c.cuadrado(p)), params)
    assert valor == pytest.approx(9.0)
    assert grad == pytest.approx([6.0])


def test_gradiente_de_perdida_constante_es_cero():
    params = VectorParametros(np.array([1.0, 2.0]), [("p", (2,))])
    _, grad = gradientes_perdida(lambda c, p: c.constante(4.0), params)
    assert np.all(grad == 0.0)


def test_gradiente_red_coincide_con_diferencias_finitas(rng):
    espec = EspecificacionMLP((3, 6, 6, 1))
    params = inicializar_mlp(espec, rng)
    x = rng.normal(size=(7, 3))
    y = rng.normal(size=(7, 1))

    def perdida(cinta, nodo):
        nodos = nodos_segmentos(cinta, nodo, params)
        salida = mlp_cinta(cinta, nodos, espec, x)
        return cinta.media(cinta.cuadrado(cinta.resta(salida, y)))

    _, grad = gradientes_perdida(perdida, params)
    numerico = diferencias_finitas(
        lambda v: float(np.mean((evaluar_mlp(params.con_valores(v), espec, x) - y) ** 2)),
        params.valores, h=1e-5)
    error = np.linalg.norm(grad - numerico) / max(np.linalg.norm(numerico), 1e-12)
    assert error < 1e-5


def test_segmentos_con_prefijo(rng):
    espec = EspecificacionMLP((2, 3, 1))
    params = inicializar_mlp(espec, rng)
    segmentos = params.a_segmentos("reward")
    assert set(segmentos) == {"reward/capa0.W", "reward/capa0.b", "reward/capa1.W", "reward/capa1.b"}
    recuperado = VectorParametros.desde_segmentos(segmentos, "reward")
    assert np.array_equal(recuperado.valores, params.valores)
    assert EspecificacionMLP.desde_parametros(recuperado) == espec
    with pytest.raises(ValueError):
        VectorParametros.desde_segmentos(segmentos, "actor")


def test_disposicion_inconsistente():
    with pytest.raises(ValueError):
        VectorParametros(np.zeros(3), [("p", (2,))])
