"""
Recompensa adversarial de transiciones de estado r_φ(s, s').

La recompensa es un MLP sobre concat(s, s') con salida sin acotar. Se entrena
minimizando

    L_r(φ) = E_agente[r_φ] − E_experto[r_φ] + (μ/2)‖φ‖²

es decir, maximiza la brecha de recompensa entre las transiciones del experto
y las del agente con regularización L2 sobre todos los parámetros.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence, Tuple

import numpy as np

from src.autodiff import Cinta, Nodo
from src.optimizador import Optimizador, aplicar_paso
from src.redes import (
    EspecificacionMLP,
    VectorParametros,
    evaluar_mlp,
    gradientes_perdida,
    inicializar_mlp,
    mlp_cinta,
    nodos_segmentos,
)


@dataclass
class ParametrosRecompensa:
    """
    Attributes:
        params: Parámetros φ del MLP (2·dim_estado → ... → 1).
        espec: Arquitectura.
        mu: Coeficiente de regularización L2 (≥ 0).
    """

    params: VectorParametros
    espec: EspecificacionMLP
    mu: float = 1e-4

    def __post_init__(self):
        if self.mu < 0:
            raise ValueError(f"mu debe ser ≥ 0, se recibió {self.mu}")
        assert self.espec.salida == 1, "la recompensa debe tener salida escalar"
        assert self.espec.entrada % 2 == 0, "la entrada de la recompensa es concat(s, s')"

    @property
    def dim_estado(self) -> int:
        return self.espec.entrada // 2


def crear_parametros_recompensa(dim_estado: int, rng: np.random.Generator,
                                ocultas: Sequence[int] = (256, 256),
                                mu: float = 1e-4) -> ParametrosRecompensa:
    espec = EspecificacionMLP((2 * dim_estado, *ocultas, 1))
    return ParametrosRecompensa(inicializar_mlp(espec, rng), espec, mu)


def _entrada(rp: ParametrosRecompensa, estados, estados_sig) -> np.ndarray:
    s = np.atleast_2d(np.asarray(estados, dtype=np.float64))
    s2 = np.atleast_2d(np.asarray(estados_sig, dtype=np.float64))
    if s.shape[1] != rp.dim_estado or s2.shape != s.shape:
        raise ValueError(
            f"dimensiones incompatibles con la recompensa: s {s.shape}, s' {s2.shape}, "
            f"dim_estado {rp.dim_estado}")
    x = np.concatenate([s, s2], axis=1)
    if not np.all(np.isfinite(x)):
        raise ValueError("entrada no finita para la recompensa")
    return x


def valores_recompensa(rp: ParametrosRecompensa, estados, estados_sig) -> np.ndarray:
    """r_φ sobre un lote, forma (B,)."""
    return evaluar_mlp(rp.params, rp.espec, _entrada(rp, estados, estados_sig))[:, 0]


def valor_recompensa(rp: ParametrosRecompensa, s, s_sig) -> float:
    return float(valores_recompensa(rp, s, s_sig)[0])


def _perdida_cinta(cinta: Cinta, nodo: Nodo, rp: ParametrosRecompensa,
                   x_experto: np.ndarray, x_agente: np.ndarray) -> Nodo:
    nodos = nodos_segmentos(cinta, nodo, rp.params)
    r_experto = mlp_cinta(cinta, nodos, rp.espec, x_experto)
    r_agente = mlp_cinta(cinta, nodos, rp.espec, x_agente)
    perdida = cinta.media(r_agente) - cinta.media(r_experto)
    if rp.mu > 0:
        perdida = perdida + 0.5 * rp.mu * cinta.sumar(cinta.cuadrado(nodo))
    return perdida


def _preparar(rp, lote_experto, lote_agente) -> Tuple[np.ndarray, np.ndarray]:
    if len(lote_experto) == 0 or len(lote_agente) == 0:
        raise ValueError("los lotes de experto y agente no pueden estar vacíos")
    return (_entrada(rp, lote_experto.estados, lote_experto.estados_sig),
            _entrada(rp, lote_agente.estados, lote_agente.estados_sig))


def perdida_recompensa(rp: ParametrosRecompensa, lote_experto, lote_agente) -> float:
    """
    L_r(φ) = media_agente − media_experto + (μ/2)‖φ‖².

    Los lotes son objetos con atributos `estados` y `estados_sig`.
    """
    x_e, x_a = _preparar(rp, lote_experto, lote_agente)
    cinta = Cinta(registrar=False)
    return float(_perdida_cinta(cinta, cinta.constante(rp.params.valores), rp, x_e, x_a).valor)


def actualizar_recompensa(rp: ParametrosRecompensa, lote_experto, lote_agente,
                          optimizador: Optimizador):
    """
    Un paso de optimización sobre L_r.

    Returns:
        (ParametrosRecompensa nuevos, optimizador nuevo, pérdida antes del paso)
    """
    x_e, x_a = _preparar(rp, lote_experto, lote_agente)
    perdida, grad = gradientes_perdida(
        lambda cinta, nodo: _perdida_cinta(cinta, nodo, rp, x_e, x_a), rp.params)
    if not np.isfinite(perdida):
        raise FloatingPointError("pérdida no finita en el componente 'reward'")
    params, optimizador = aplicar_paso(rp.params, grad, optimizador)
    return replace(rp, params=params), optimizador, perdida


def etiquetar_transiciones(rp: ParametrosRecompensa, lote) -> np.ndarray:
    """Recompensas r_φ(s, s') por transición; la acción no interviene."""
    return valores_recompensa(rp, lote.estados, lote.estados_sig)
