"""Pruebas de los críticos Q escalares de SAC."""

import numpy as np
import pytest

from src.critico_escalar import (
    ParejaQ,
    actualizar_criticos_q,
    actualizar_polyak_q,
    crear_criticos_q,
    gradiente_politica_q,
    objetivos_q,
    perdida_bellman_suave,
    valor_q,
)
from src.datos import LoteTransiciones
from src.optimizador import DescensoGradiente
from src.politica import RedPolitica, crear_politica, muestrear_acciones
from tests.conftest import diferencias_finitas


def _lote(rng, B=6, terminados=None):
    return LoteTransiciones(rng.normal(size=(B, 3)), rng.uniform(-2.0, 2.0, size=(B, 1)),
                            rng.normal(size=B), rng.normal(size=(B, 3)),
                            np.zeros(B, dtype=bool) if terminados is None else np.asarray(terminados))


@pytest.fixture
def politica(rng):
    return crear_politica(RedPolitica(3, 1, [-2.0], [2.0], (8,)), rng)


def test_objetivos_q_contra_aritmetica(rng, politica):
    criticos = crear_criticos_q(3, 1, rng, ocultas=(8,))
    lote = _lote(rng, terminados=[False, True, False, False, True, False])
    r = lote.recompensas_entorno
    y = objetivos_q(criticos, politica, lote, r, 0.9, 0.2, np.random.default_rng(4))

    a_sig, lp = muestrear_acciones(politica, lote.estados_sig, np.random.default_rng(4))
    q_min = np.minimum(valor_q(criticos.q1, criticos.espec, lote.estados_sig, a_sig),
                       valor_q(criticos.q2, criticos.espec, lote.estados_sig, a_sig))
    esperado = r + 0.9 * (1.0 - lote.terminados) * (q_min - 0.2 * lp)
    assert np.allclose(y, esperado, atol=1e-12)
    assert y[1] == r[1] and y[4] == r[4]


def test_actualizacion_reduce_el_residuo(rng):
    criticos = crear_criticos_q(3, 1, rng, ocultas=(8,))
    lote = _lote(rng)
    y = np.full(6, 2.0)
    nuevos, _, (antes1, antes2) = actualizar_criticos_q(
        criticos, y, lote, (DescensoGradiente(1e-2), DescensoGradiente(1e-2)))
    assert antes1 == pytest.approx(perdida_bellman_suave(criticos.q1, criticos.espec, lote, y))
    assert perdida_bellman_suave(nuevos.q1, nuevos.espec, lote, y) < antes1
    assert perdida_bellman_suave(nuevos.q2, nuevos.espec, lote, y) < antes2


def test_polyak_q(rng):
    criticos = crear_criticos_q(3, 1, rng, ocultas=(4,))
    objetivo = actualizar_polyak_q(criticos, criticos.copia(), 0.5)
    assert np.allclose(objetivo.q1.valores, criticos.q1.valores)
    otro = crear_criticos_q(3, 1, rng, ocultas=(4,))
    mezcla = actualizar_polyak_q(otro, criticos, 1.0)
    assert np.array_equal(mezcla.q2.valores, otro.q2.valores)


def test_gradiente_politica_q(rng, politica):
    criticos = crear_criticos_q(3, 1, rng, ocultas=(8,))
    S = rng.normal(size=(5, 3))
    _, grad, log_prob = gradiente_politica_q(politica, criticos, 0.3, S, np.random.default_rng(2))

    def perdida(v):
        return gradiente_politica_q(politica.con_valores(v), criticos, 0.3, S,
                                    np.random.default_rng(2))[0]

    numerico = diferencias_finitas(perdida, politica.params.valores, h=1e-6)
    error = np.linalg.norm(grad - numerico) / max(np.linalg.norm(numerico), 1e-12)
    assert error < 1e-4
    assert log_prob.shape == (5,)
    assert isinstance(criticos, ParejaQ)
