"""Pruebas de los entornos PointMass2D y Pendulum."""

import numpy as np
import pytest

from src.entornos import Pendulo, PuntoMasa2D, crear_entorno, normalizar_angulo


def test_reinicio_determinista():
    entorno = PuntoMasa2D()
    a = entorno.reiniciar(0)
    b = entorno.reiniciar(0)
    assert np.array_equal(a, b)
    assert np.array_equal(a[2:], [0.0, 0.0])
    assert np.all(np.abs(a[:2]) <= 1.0)


def test_reinicio_pendulo_en_rangos():
    entorno = Pendulo()
    s = entorno.reiniciar(7)
    theta = np.arctan2(s[1], s[0])
    assert -np.pi <= theta <= np.pi
    assert -1.0 <= s[2] <= 1.0
    assert s[0] ** 2 + s[1] ** 2 == pytest.approx(1.0)


def test_punto_fijo_en_la_meta():
    entorno = PuntoMasa2D()
    entorno.reiniciar(0)
    entorno.estado = np.array([3.0, 3.0, 0.0, 0.0])
    resultado = entorno.paso([0.0, 0.0])
    assert resultado.recompensa == 0.0
    assert np.array_equal(resultado.estado_siguiente, [3.0, 3.0, 0.0, 0.0])


def test_euler_semi_implicito():
    entorno = PuntoMasa2D()
    siguiente, _ = entorno.transicion(np.zeros(4), np.array([1.0, 0.0]))
    assert siguiente[2:] == pytest.approx([0.05, 0.0])
    assert siguiente[:2] == pytest.approx([0.0025, 0.0])


def test_recompensa_usa_posicion_actual():
    entorno = PuntoMasa2D()
    _, r = entorno.transicion(np.array([0.0, 3.0, 0.0, 0.0]), np.array([1.0, 1.0]))
    assert r == pytest.approx(-3.0 - 0.02)


def test_pendulo_colgando_en_reposo():
    entorno = Pendulo()
    _, r = entorno.transicion(Pendulo.observacion(np.pi, 0.0), np.array([0.0]))
    assert r == pytest.approx(-np.pi ** 2)


def test_pendulo_invertido_es_punto_fijo():
    entorno = Pendulo()
    s = Pendulo.observacion(0.0, 0.0)
    siguiente, r = entorno.transicion(s, np.array([0.0]))
    assert r == 0.0
    assert siguiente == pytest.approx(s)


def test_acciones_se_acotan_y_se_validan():
    entorno = PuntoMasa2D()
    assert entorno.acotar_accion([3.0, -4.0]) == pytest.approx([1.0, -1.0])
    with pytest.raises(ValueError):
        entorno.acotar_accion([np.nan, 0.0])
    with pytest.raises(ValueError):
        entorno.acotar_accion([0.0])


def test_fin_por_horizonte():
    entorno = PuntoMasa2D(horizonte=3)
    entorno.reiniciar(1)
    terminados = [entorno.paso([0.0, 0.0]).terminado for _ in range(3)]
    assert terminados == [False, False, True]


def test_accion_aleatoria_dentro_de_cotas(rng):
    entorno = Pendulo()
    acciones = np.array([entorno.accion_aleatoria(rng) for _ in range(200)])
    assert np.all(np.abs(acciones) <= 2.0)


@pytest.mark.parametrize("theta, esperado", [
    (np.pi, np.pi), (-np.pi, np.pi), (3.0 * np.pi / 2.0, -np.pi / 2.0), (0.5, 0.5)])
def test_normalizar_angulo(theta, esperado):
    assert float(normalizar_angulo(theta)) == pytest.approx(esperado)


def test_crear_entorno():
    assert crear_entorno("pendulum").espec.dim_estado == 3
    assert crear_entorno("pointmass2d").espec.dim_accion == 2
    with pytest.raises(ValueError, match="desconocido"):
        crear_entorno("cartpole")
