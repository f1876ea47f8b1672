"""
Optimizadores de primer orden: Adam con corrección de sesgo y descenso de
gradiente simple.

Las funciones no modifican sus argumentos; devuelven parámetros y estado
nuevos.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Union

import numpy as np

from src.redes import VectorParametros


@dataclass(frozen=True)
class EstadoAdam:
    """
    Estado de Adam.

    Attributes:
        primer_momento (ndarray): m_t.
        segundo_momento (ndarray): v_t.
        pasos (int): t, número de pasos ya aplicados.
        tasa_aprendizaje (float): η.
        beta1, beta2 (float): Decaimientos de los momentos.
        epsilon (float): Estabilizador del denominador.
    """

    primer_momento: np.ndarray
    segundo_momento: np.ndarray
    pasos: int = 0
    tasa_aprendizaje: float = 3e-4
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8


@dataclass(frozen=True)
class DescensoGradiente:
    """Paso θ ← θ − η∇."""

    tasa_aprendizaje: float


Optimizador = Union[EstadoAdam, DescensoGradiente]


def crear_estado_adam(n: int,
                      tasa_aprendizaje: float = 3e-4,
                      beta1: float = 0.9,
                      beta2: float = 0.999,
                      epsilon: float = 1e-8) -> EstadoAdam:
    if tasa_aprendizaje <= 0:
        raise ValueError(f"la tasa de aprendizaje debe ser positiva, se recibió {tasa_aprendizaje}")
    if epsilon <= 0:
        raise ValueError("epsilon debe ser positivo")
    return EstadoAdam(np.zeros(n), np.zeros(n), 0, float(tasa_aprendizaje),
                      float(beta1), float(beta2), float(epsilon))


def _como_array(params) -> np.ndarray:
    if isinstance(params, VectorParametros):
        return params.valores
    return np.asarray(params, dtype=np.float64)


def _como_original(original, valores: np.ndarray):
    if isinstance(original, VectorParametros):
        return original.con_valores(valores)
    return valores


def paso_adam(params, grads, estado: EstadoAdam):
    """
    Un paso de Adam.

        m_t = β1·m + (1−β1)·g
        v_t = β2·v + (1−β2)·g²
        θ  ← θ − η·(m_t/(1−β1^t)) / (√(v_t/(1−β2^t)) + ε)

    Args:
        params: VectorParametros o ndarray.
        grads: Gradientes finitos de la misma longitud.
        estado: Estado actual.

    Returns:
        (params nuevos, estado nuevo) con estado.pasos incrementado en 1.

    Raises:
        ValueError: Si las longitudes no coinciden.
    """
    valores = _como_array(params)
    g = np.asarray(grads, dtype=np.float64).ravel()
    if g.size != valores.size or estado.primer_momento.size != valores.size:
        raise ValueError(
            f"longitudes incompatibles: parámetros {valores.size}, gradientes {g.size}, "
            f"momentos {estado.primer_momento.size}")
    assert np.all(np.isfinite(g)), "gradiente no finito en paso_adam"

    t = estado.pasos + 1
    m = estado.beta1 * estado.primer_momento + (1.0 - estado.beta1) * g
    v = estado.beta2 * estado.segundo_momento + (1.0 - estado.beta2) * g * g
    m_hat = m / (1.0 - estado.beta1 ** t)
    v_hat = v / (1.0 - estado.beta2 ** t)
    nuevos = valores - estado.tasa_aprendizaje * m_hat / (np.sqrt(v_hat) + estado.epsilon)

    assert np.all(np.isfinite(nuevos)), "parámetros no finitos tras paso_adam"
    return _como_original(params, nuevos), replace(
        estado, primer_momento=m, segundo_momento=v, pasos=t)


def aplicar_paso(params, grads, optimizador: Optimizador):
    """Despacha un paso según el tipo de optimizador."""
    if isinstance(optimizador, EstadoAdam):
        return paso_adam(params, grads, optimizador)
    valores = _como_array(params)
    g = np.asarray(grads, dtype=np.float64).ravel()
    if g.size != valores.size:
        raise ValueError(f"longitudes incompatibles: parámetros {valores.size}, gradientes {g.size}")
    return _como_original(params, valores - optimizador.tasa_aprendizaje * g), optimizador
