"""
Mejora de la política y ajuste automático de la temperatura.

Pérdida de la política (acción reparametrizada, críticos constantes):

    J_π(θ) = E_s[ α·log π_θ(a|s) − Q_soft(s, a) ],  a = f_θ(ε; s)

Pérdida de la temperatura con entropía objetivo H0 = −dim(A):

    J(α) = E[ −α·log π(a|s) − α·H0 ]
    dJ/dα = mean(−log π) − H0 = Ĥ − H0

α se optimiza en espacio logarítmico: ∂J/∂(log α) = α·dJ/dα.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from src.critico import FraccionesCuantil, ParejaCriticos
from src.optimizador import Optimizador, aplicar_paso
from src.politica import ParametrosPolitica, politica_cinta
from src.redes import gradientes_perdida
from src.riesgo import MedidaRiesgo, q_suave_cinta


def _funcion_perdida_politica(theta: ParametrosPolitica, criticos: ParejaCriticos,
                              fracciones: FraccionesCuantil, medida: MedidaRiesgo,
                              alpha: float, estados: np.ndarray, ruido: np.ndarray,
                              registro: list):
    fr = fracciones.para_lote(estados.shape[0])

    def funcion(cinta, nodo):
        acciones, log_prob = politica_cinta(cinta, nodo, theta, estados, ruido)
        registro.append(log_prob.valor)
        x_sa = cinta.concatenar([cinta.constante(estados), acciones], eje=1)
        q = q_suave_cinta(cinta, criticos, x_sa, fr, medida)
        return cinta.media(alpha * log_prob - q)

    return funcion


def gradiente_politica(theta: ParametrosPolitica, criticos: ParejaCriticos,
                       fracciones: FraccionesCuantil, medida: MedidaRiesgo, alpha: float,
                       estados, rng: np.random.Generator) -> Tuple[float, np.ndarray, np.ndarray]:
    """
    J_π y su gradiente respecto a θ.

    El ruido ε se extrae de `rng` una sola vez; dos llamadas con generadores
    en el mismo estado usan los mismos números aleatorios.

    Returns:
        (pérdida, gradiente, log_prob del lote)
    """
    s = np.atleast_2d(np.asarray(estados, dtype=np.float64))
    if s.shape[0] == 0:
        raise ValueError("el lote de estados no puede estar vacío")
    ruido = rng.standard_normal((s.shape[0], theta.red.dim_accion))
    registro: list = []
    perdida, grad = gradientes_perdida(
        _funcion_perdida_politica(theta, criticos, fracciones, medida, alpha, s, ruido, registro),
        theta.params)
    return perdida, grad, registro[0]


def perdida_politica(theta: ParametrosPolitica, criticos: ParejaCriticos,
                     fracciones: FraccionesCuantil, medida: MedidaRiesgo, alpha: float,
                     estados, rng: np.random.Generator) -> float:
    """Media sobre el lote de α·log π − Q_soft."""
    perdida, _, _ = gradiente_politica(theta, criticos, fracciones, medida, alpha, estados, rng)
    return perdida


def actualizar_politica(theta: ParametrosPolitica, criticos: ParejaCriticos,
                        fracciones: FraccionesCuantil, medida: MedidaRiesgo, alpha: float,
                        estados, rng: np.random.Generator, optimizador: Optimizador):
    """
    Returns:
        (ParametrosPolitica, optimizador, pérdida, log_prob del lote)
    """
    perdida, grad, log_prob = gradiente_politica(theta, criticos, fracciones, medida,
                                                 alpha, estados, rng)
    if not np.isfinite(perdida):
        raise FloatingPointError("pérdida no finita en el componente 'policy'")
    params, optimizador = aplicar_paso(theta.params, grad, optimizador)
    return ParametrosPolitica(params, theta.red), optimizador, perdida, log_prob


# ============================================================================
# TEMPERATURA
# ============================================================================

@dataclass(frozen=True)
class Temperatura:
    """α = exp(log_alpha) > 0 y entropía objetivo H0."""

    log_alpha: float
    entropia_objetivo: float

    @property
    def alpha(self) -> float:
        return float(np.exp(self.log_alpha))


def crear_temperatura(dim_accion: int, alpha_inicial: float = 1.0) -> Temperatura:
    if alpha_inicial <= 0:
        raise ValueError(f"alpha inicial debe ser positivo, se recibió {alpha_inicial}")
    return Temperatura(float(np.log(alpha_inicial)), -float(dim_accion))


def perdida_y_gradiente_temperatura(temperatura: Temperatura, log_prob) -> Tuple[float, float]:
    """
    Returns:
        (J(α), dJ/dα) con dJ/dα = Ĥ − H0.
    """
    lp = np.asarray(log_prob, dtype=np.float64)
    if lp.size == 0:
        raise ValueError("el lote de log-probabilidades no puede estar vacío")
    alpha = temperatura.alpha
    perdida = float(np.mean(-alpha * lp - alpha * temperatura.entropia_objetivo))
    gradiente = float(np.mean(-lp)) - temperatura.entropia_objetivo
    return perdida, gradiente


def actualizar_temperatura(temperatura: Temperatura, log_prob,
                           optimizador: Optimizador) -> Tuple[Temperatura, Optimizador]:
    """Un paso sobre log α con gradiente α·dJ/dα."""
    _, gradiente = perdida_y_gradiente_temperatura(temperatura, log_prob)
    if not np.isfinite(gradiente):
        raise FloatingPointError("gradiente no finito en el componente 'alpha'")
    nuevo, optimizador = aplicar_paso(np.array([temperatura.log_alpha]),
                                      np.array([gradiente * temperatura.alpha]), optimizador)
    return Temperatura(float(nuevo[0]), temperatura.entropia_objetivo), optimizador
