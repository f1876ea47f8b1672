"""
Críticos Q escalares gemelos para SAC estándar.

Lo usan el entrenamiento del experto (recompensa verdadera) y la línea base
SAC-GAILfO (recompensa aprendida r_φ). Residuo de Bellman suave:

    J_Q(w) = E[ ½·(Q_w(s, a) − y)² ]
    y = r + γ(1 − fin)·(min_k Q_w̄k(s', a') − α log π_θ(a'|s')),  a' ~ π_θ(·|s')
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from src.autodiff import Cinta
from src.critico import actualizar_polyak
from src.optimizador import Optimizador, aplicar_paso
from src.politica import ParametrosPolitica, muestrear_acciones, politica_cinta
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
class ParejaQ:
    """Críticos Q (o sus copias objetivo) con arquitectura compartida."""

    q1: VectorParametros
    q2: VectorParametros
    espec: EspecificacionMLP

    def copia(self) -> "ParejaQ":
        return ParejaQ(self.q1.copia(), self.q2.copia(), self.espec)


def crear_criticos_q(dim_estado: int, dim_accion: int, rng: np.random.Generator,
                     ocultas: Sequence[int] = (256, 256)) -> ParejaQ:
    espec = EspecificacionMLP((dim_estado + dim_accion, *ocultas, 1))
    return ParejaQ(inicializar_mlp(espec, rng), inicializar_mlp(espec, rng), espec)


def valor_q(params: VectorParametros, espec: EspecificacionMLP, estados, acciones) -> np.ndarray:
    x = np.concatenate([np.atleast_2d(estados), np.atleast_2d(acciones)], axis=1)
    return evaluar_mlp(params, espec, x)[:, 0]


def objetivos_q(objetivo: ParejaQ, politica: ParametrosPolitica, lote, recompensas,
                gamma: float, alpha: float, rng: np.random.Generator) -> np.ndarray:
    """Objetivos y por muestra con la política actual."""
    acciones_sig, log_prob_sig = muestrear_acciones(politica, lote.estados_sig, rng)
    q1 = valor_q(objetivo.q1, objetivo.espec, lote.estados_sig, acciones_sig)
    q2 = valor_q(objetivo.q2, objetivo.espec, lote.estados_sig, acciones_sig)
    continua = 1.0 - np.asarray(lote.terminados, dtype=np.float64)
    return (np.asarray(recompensas, dtype=np.float64)
            + gamma * continua * (np.minimum(q1, q2) - alpha * log_prob_sig))


def _funcion_perdida(params: VectorParametros, espec: EspecificacionMLP, x: np.ndarray,
                     y: np.ndarray):
    def funcion(cinta: Cinta, nodo):
        nodos = nodos_segmentos(cinta, nodo, params)
        q = cinta.reformar(mlp_cinta(cinta, nodos, espec, x), (x.shape[0],))
        return 0.5 * cinta.media(cinta.cuadrado(q - y))
    return funcion


def perdida_bellman_suave(params: VectorParametros, espec: EspecificacionMLP, lote,
                          y: np.ndarray) -> float:
    q = valor_q(params, espec, lote.estados, lote.acciones)
    return float(0.5 * np.mean((q - y) ** 2))


def actualizar_criticos_q(criticos: ParejaQ, y: np.ndarray, lote,
                          optimizadores: Tuple[Optimizador, Optimizador]):
    """
    Returns:
        (ParejaQ, (opt1, opt2), (pérdida1, pérdida2))
    """
    x = np.concatenate([lote.estados, lote.acciones], axis=1)
    nuevos, opts, perdidas = [], [], []
    for nombre, q, opt in zip(("critic1", "critic2"), (criticos.q1, criticos.q2), optimizadores):
        perdida, grad = gradientes_perdida(_funcion_perdida(q, criticos.espec, x, y), q)
        if not np.isfinite(perdida):
            raise FloatingPointError(f"pérdida no finita en el componente '{nombre}'")
        q, opt = aplicar_paso(q, grad, opt)
        nuevos.append(q)
        opts.append(opt)
        perdidas.append(perdida)
    return ParejaQ(nuevos[0], nuevos[1], criticos.espec), tuple(opts), tuple(perdidas)


def actualizar_polyak_q(criticos: ParejaQ, objetivo: ParejaQ, iota: float) -> ParejaQ:
    return ParejaQ(actualizar_polyak(criticos.q1, objetivo.q1, iota),
                   actualizar_polyak(criticos.q2, objetivo.q2, iota), objetivo.espec)


def gradiente_politica_q(theta: ParametrosPolitica, criticos: ParejaQ, alpha: float,
                         estados, rng: np.random.Generator):
    """
    Pérdida de la política con Q escalar: mean(α·log π − min(Q1, Q2)).

    Returns:
        (pérdida, gradiente, log_prob del lote)
    """
    s = np.atleast_2d(np.asarray(estados, dtype=np.float64))
    ruido = rng.standard_normal((s.shape[0], theta.red.dim_accion))
    registro = []

    def funcion(cinta, nodo):
        acciones, log_prob = politica_cinta(cinta, nodo, theta, s, ruido)
        registro.append(log_prob.valor)
        x = cinta.concatenar([cinta.constante(s), acciones], eje=1)
        valores = []
        for q in (criticos.q1, criticos.q2):
            nodos = nodos_segmentos(cinta, cinta.constante(q.valores), q)
            valores.append(cinta.reformar(mlp_cinta(cinta, nodos, criticos.espec, x), (s.shape[0],)))
        return cinta.media(alpha * log_prob - cinta.minimo(valores[0], valores[1]))

    perdida, grad = gradientes_perdida(funcion, theta.params)
    return perdida, grad, registro[0]
