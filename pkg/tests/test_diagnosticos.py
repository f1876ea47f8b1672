"""Pruebas de los estimadores de distancia LfO y error de transiciones."""

import numpy as np
import pytest

from src.diagnosticos import (
    ConjuntoRecompensas,
    HistogramaTransiciones,
    brechas_recompensa,
    coeficiente_en_celdas,
    coeficiente_recompensa,
    distancia_recompensa_lfo,
    distribucion_recompensa_normalizada,
    error_distribucion_transiciones,
    errores_acumulados,
    estimar_distribucion_transiciones,
    recompensa_cero,
    trayectorias_desde_pares,
)
from src.mallas import generar_malla_histograma, generar_malla_transiciones
from src.entornos import PuntoMasa2D


def constante(c):
    return lambda s, s2: np.full(np.atleast_2d(s).shape[0], float(c))


def primera_coordenada(s, s2):
    return np.atleast_2d(s)[:, 0]


def desplazamiento_l1(s, s2):
    return np.sum(np.abs(np.atleast_2d(s2) - np.atleast_2d(s)), axis=1)


@pytest.fixture
def pares(rng):
    return rng.normal(size=(20, 2)), rng.normal(size=(20, 2))


# ============================================================================
# DISTANCIA DE RECOMPENSA
# ============================================================================

def test_conjunto_con_solo_la_funcion_cero(pares, rng):
    otros = (rng.normal(size=(7, 2)), rng.normal(size=(7, 2)))
    assert len(ConjuntoRecompensas()) == 1
    assert distancia_recompensa_lfo(ConjuntoRecompensas(), pares, otros) == 0.0


def test_constantes_se_cancelan(pares, rng):
    otros = (rng.normal(size=(7, 2)), rng.normal(size=(7, 2)))
    assert distancia_recompensa_lfo(ConjuntoRecompensas([constante(1.0)]), pares, otros) == 0.0


def test_distancia_con_primera_coordenada():
    a = (np.array([[1.0, 0.0], [3.0, 5.0]]), np.zeros((2, 2)))
    b = (np.array([[0.5, 1.0], [0.5, -1.0], [0.5, 2.0]]), np.zeros((3, 2)))
    conjunto = ConjuntoRecompensas([primera_coordenada])
    assert distancia_recompensa_lfo(conjunto, a, b) == pytest.approx(1.5)
    assert brechas_recompensa(conjunto, a, b) == pytest.approx([0.0, 1.5])
    assert distancia_recompensa_lfo(conjunto, b, a) == 0.0


def test_distancia_no_negativa_y_nula_sobre_la_misma_muestra(pares, rng):
    conjunto = ConjuntoRecompensas([primera_coordenada, desplazamiento_l1])
    conjunto.agregar(lambda s, s2: -primera_coordenada(s, s2))
    otros = (rng.normal(size=(9, 2)), rng.normal(size=(9, 2)))
    assert distancia_recompensa_lfo(conjunto, pares, otros) >= 0.0
    assert distancia_recompensa_lfo(conjunto, pares, pares) == 0.0


def test_pares_vacios():
    with pytest.raises(ValueError):
        distancia_recompensa_lfo(ConjuntoRecompensas(), (np.zeros((0, 2)), np.zeros((0, 2))),
                                 (np.zeros((1, 2)), np.zeros((1, 2))))


# ============================================================================
# COEFICIENTE Y DISTRIBUCIÓN NORMALIZADA
# ============================================================================

def test_coeficiente():
    pares = (np.zeros((5, 2)), np.ones((5, 2)))
    assert coeficiente_recompensa(constante(1.0), pares) == 5.0
    assert coeficiente_recompensa(recompensa_cero, pares) == 0.0


def test_coeficiente_desplazamiento_l1():
    s = np.array([[0.0, 0.0], [1.0, -1.0], [2.5, 0.5]])
    s2 = np.array([[1.0, 2.0], [1.0, 1.0], [0.0, 0.0]])
    assert abs(coeficiente_recompensa(desplazamiento_l1, (s, s2)) - (3.0 + 2.0 + 3.0)) < 1e-12


def test_recompensa_negativa():
    with pytest.raises(ValueError, match="no negativa"):
        coeficiente_recompensa(constante(-1.0), (np.zeros((2, 1)), np.zeros((2, 1))))


def test_distribucion_normalizada():
    s = np.array([[3.0], [1.0]])
    assert distribucion_recompensa_normalizada(primera_coordenada, (s, s)) == \
        pytest.approx([0.75, 0.25])
    pesos = distribucion_recompensa_normalizada(constante(1.0), (np.zeros((4, 1)), np.zeros((4, 1))))
    assert pesos == pytest.approx([0.25] * 4)
    with pytest.raises(ValueError, match="nulo"):
        distribucion_recompensa_normalizada(recompensa_cero, (s, s))


def test_distribucion_normalizada_suma_uno(rng):
    s = np.abs(rng.normal(size=(50, 1)))
    assert abs(distribucion_recompensa_normalizada(primera_coordenada, (s, s)).sum() - 1.0) < 1e-12


# ============================================================================
# HISTOGRAMAS Y ERROR DE TRANSICIONES
# ============================================================================

MALLA_1D = generar_malla_histograma([(0.0, 4.0), (0.0, 4.0)], n_celdas=4, coordenadas=(0, 0))


def test_trayectoria_de_un_paso_concentra_la_masa():
    hist = estimar_distribucion_transiciones([np.array([[0.5], [1.5]])], MALLA_1D, 0.9)
    assert hist.pesos.sum() == pytest.approx(1.0)
    assert hist.pesos[0, 1] == pytest.approx(1.0)


def test_pesos_geometricos():
    trayectoria = np.array([[0.5], [1.5], [2.5]])
    hist = estimar_distribucion_transiciones([trayectoria], MALLA_1D, 0.5)
    assert hist.pesos[0, 1] == pytest.approx(2.0 / 3.0)
    assert hist.pesos[1, 2] == pytest.approx(1.0 / 3.0)

    solo_inicio = estimar_distribucion_transiciones([trayectoria], MALLA_1D, 0.0)
    assert solo_inicio.pesos[0, 1] == 1.0
    assert solo_inicio.pesos.sum() == 1.0


def test_puntos_fuera_de_la_malla_se_cuentan():
    hist = estimar_distribucion_transiciones([np.array([[-3.0], [0.5], [9.0]])], MALLA_1D, 0.5)
    assert hist.fuera_malla == 2
    assert hist.pesos[0, 0] == pytest.approx(2.0 / 3.0)
    assert hist.pesos[0, 3] == pytest.approx(1.0 / 3.0)


def test_gamma_invalido_y_sin_transiciones():
    with pytest.raises(ValueError):
        estimar_distribucion_transiciones([np.array([[0.5], [1.5]])], MALLA_1D, 1.0)
    with pytest.raises(ValueError):
        estimar_distribucion_transiciones([np.array([[0.5]])], MALLA_1D, 0.5)


def _dos_celdas(pesos):
    malla = generar_malla_histograma([(0.0, 2.0)], n_celdas=2)
    return HistogramaTransiciones(np.asarray(pesos, dtype=np.float64), malla, 0.9)


def test_error_en_dos_celdas():
    experto, agente = _dos_celdas([1.0, 0.0]), _dos_celdas([0.0, 1.0])
    assert error_distribucion_transiciones(np.array([2.0, 2.0]), experto, [agente]) == \
        pytest.approx(0.0)
    assert error_distribucion_transiciones(np.array([4.0, 0.0]), experto, [agente]) == \
        pytest.approx(4.0)
    assert coeficiente_en_celdas(np.array([4.0, 0.0]), experto.malla) == 4.0


def test_errores_acumulados_no_crecen():
    experto, agente = _dos_celdas([1.0, 0.0]), _dos_celdas([0.0, 1.0])
    r = np.array([4.0, 0.0])
    assert errores_acumulados(r, experto, [agente, experto]) == pytest.approx([4.0, 0.0])
    assert errores_acumulados(r, experto, [experto, agente]) == pytest.approx([0.0, 0.0])
    assert errores_acumulados(r, experto, [agente, agente])[-1] == \
        error_distribucion_transiciones(r, experto, [agente, agente])


def test_error_con_el_experto_entre_los_candidatos(rng):
    pesos_e = rng.dirichlet(np.ones(2))
    experto = _dos_celdas(pesos_e)
    agentes = [_dos_celdas(rng.dirichlet(np.ones(2))) for _ in range(3)] + [experto]
    r = np.abs(rng.normal(size=2)) + 0.1
    assert error_distribucion_transiciones(r, experto, agentes) <= 0.0
    assert error_distribucion_transiciones(r, experto, [experto]) == 0.0


def test_recompensa_constante_da_error_nulo(rng):
    experto = _dos_celdas(rng.dirichlet(np.ones(2)))
    agente = _dos_celdas(rng.dirichlet(np.ones(2)))
    assert error_distribucion_transiciones(np.full(2, 3.0), experto, [agente]) == \
        pytest.approx(0.0, abs=1e-12)


def test_errores_de_validacion():
    experto = _dos_celdas([1.0, 0.0])
    otra_malla = HistogramaTransiciones(np.array([0.5, 0.25, 0.25]),
                                        generar_malla_histograma([(0.0, 3.0)], 3), 0.9)
    with pytest.raises(ValueError, match="malla"):
        error_distribucion_transiciones(np.ones(2), experto, [otra_malla])
    with pytest.raises(ValueError):
        error_distribucion_transiciones(np.ones(2), experto, [])
    with pytest.raises(ValueError):
        error_distribucion_transiciones(np.array([1.0, -1.0]), experto, [experto])
    with pytest.raises(ValueError):
        error_distribucion_transiciones(np.zeros(2), experto, [experto])
    with pytest.raises(ValueError):
        error_distribucion_transiciones(primera_coordenada, experto, [experto])


def test_recompensa_como_funcion_en_los_centros():
    malla = generar_malla_transiciones(PuntoMasa2D().espec, n_celdas=2)
    pesos = np.zeros((2, 2, 2, 2))
    pesos[1, 1, 1, 1] = 1.0
    experto = HistogramaTransiciones(pesos, malla, 0.9)
    uniforme = HistogramaTransiciones(np.full((2, 2, 2, 2), 1.0 / 16.0), malla, 0.9)
    r = lambda s, s2: np.ones(np.atleast_2d(s).shape[0])  # noqa: E731
    assert error_distribucion_transiciones(r, experto, [uniforme], dim_estado=4) == \
        pytest.approx(0.0, abs=1e-12)
    assert coeficiente_en_celdas(r, malla, dim_estado=4) == 16.0


def test_trayectorias_desde_pares():
    s = np.array([[0.0], [1.0], [2.0], [10.0], [11.0]])
    s_sig = np.array([[1.0], [2.0], [3.0], [11.0], [12.0]])
    trayectorias = trayectorias_desde_pares(s, s_sig)
    assert [t[:, 0].tolist() for t in trayectorias] == [[0.0, 1.0, 2.0, 3.0], [10.0, 11.0, 12.0]]
