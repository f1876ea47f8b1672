"""
Medidas de riesgo sobre distribuciones de cuantiles.

Una medida Ψ transforma los cuantiles z_i (en τ̂_i) de la distribución de
retorno en un escalar:

    neutral        Σ (τ_{i+1} − τ_i)·z_i
    mean-variance  E − β·√V  (media y varianza ponderadas)
    var            interpolación lineal de z en β sobre los τ̂ (acotada)
    cpw/wang/cvar  Σ (g(τ_{i+1}) − g(τ_i))·z_i, con g la distorsión

Distorsiones:
    CPW   g(τ) = τ^β / (τ^β + (1 − τ)^β)^(1/β)
    Wang  g(τ) = Φ(Φ⁻¹(τ) + β)
    CVaR  g(τ) = min(τ/β, 1)

El valor de acción suave con riesgo toma Ψ de cada crítico y luego el
mínimo: Q = min_k Ψ[Z_{w_k}(s, a)].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List

import numpy as np
from scipy import special

from src.autodiff import Cinta, Nodo
from src.critico import (
    FraccionesCuantil,
    ParejaCriticos,
    concatenar_estado_accion,
    cuantiles_cinta,
)
from src.redes import nodos_segmentos


TIPOS_RIESGO = ("neutral", "mean-variance", "var", "cpw", "wang", "cvar")
DISTORSIONES = ("cpw", "wang", "cvar")


def _validar_beta(tipo: str, beta: float) -> None:
    if tipo not in TIPOS_RIESGO:
        raise ValueError(f"medida de riesgo desconocida '{tipo}', opciones: {', '.join(TIPOS_RIESGO)}")
    if not np.isfinite(beta):
        raise ValueError(f"beta debe ser finito, se recibió {beta}")
    if tipo == "cvar" and not 0.0 < beta <= 1.0:
        raise ValueError(f"beta de CVaR debe estar en (0,1], se recibió {beta}")
    if tipo == "cpw" and beta <= 0.0:
        raise ValueError(f"beta de CPW debe ser positivo, se recibió {beta}")
    if tipo == "var" and not 0.0 < beta < 1.0:
        raise ValueError(f"beta de VaR debe estar en (0,1), se recibió {beta}")


@dataclass(frozen=True)
class MedidaRiesgo:
    """Medida Ψ con su parámetro β (ignorado en 'neutral')."""

    tipo: str = "neutral"
    beta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "beta", float(self.beta))
        _validar_beta(self.tipo, self.beta)

    def __str__(self) -> str:
        return self.tipo if self.tipo == "neutral" else f"{self.tipo}({self.beta:g})"


PRESETS_RIESGO: Dict[str, List[MedidaRiesgo]] = {
    "risk-averse": [
        MedidaRiesgo("mean-variance", 0.1),
        MedidaRiesgo("var", 0.25),
        MedidaRiesgo("cpw", 0.71),
        MedidaRiesgo("wang", 0.75),
        MedidaRiesgo("cvar", 0.25),
    ],
    "risk-seeking": [
        MedidaRiesgo("mean-variance", -0.1),
        MedidaRiesgo("var", 0.75),
        MedidaRiesgo("wang", -0.75),
    ],
}

# 'risk-averse/wang', 'risk-seeking/var', ...
NOMBRES_PRESET = tuple(f"{preset}/{medida.tipo}"
                       for preset, medidas in PRESETS_RIESGO.items() for medida in medidas)


def medida_desde_preset(nombre: str) -> MedidaRiesgo:
    """
    Medida de un preset por nombre '<preset>/<tipo>', con su β.

    Raises:
        ValueError: Si el preset no existe o no incluye ese tipo.
    """
    preset, _, tipo = nombre.partition("/")
    if preset not in PRESETS_RIESGO:
        raise ValueError(f"preset de riesgo desconocido '{preset}', "
                         f"opciones: {', '.join(PRESETS_RIESGO)}")
    for medida in PRESETS_RIESGO[preset]:
        if medida.tipo == tipo:
            return medida
    raise ValueError(f"el preset '{preset}' no incluye la medida '{tipo}'")


def distorsion_g(tipo: str, beta: float, tau):
    """
    Función de distorsión g en τ ∈ [0, 1] (escalar o array).

    Raises:
        ValueError: Si τ ∉ [0, 1], el tipo no es una distorsión o β es inválido.
    """
    if tipo not in DISTORSIONES:
        raise ValueError(f"'{tipo}' no es una distorsión, opciones: {', '.join(DISTORSIONES)}")
    _validar_beta(tipo, beta)
    t = np.asarray(tau, dtype=np.float64)
    if np.any(t < 0.0) or np.any(t > 1.0):
        raise ValueError("tau debe estar en [0, 1]")

    if tipo == "cpw":
        with np.errstate(divide="ignore"):
            num = t ** beta
            g = num / (num + (1.0 - t) ** beta) ** (1.0 / beta)
    elif tipo == "wang":
        with np.errstate(divide="ignore", invalid="ignore"):
            g = special.ndtr(special.ndtri(t) + beta)
        g = np.where(t == 0.0, 0.0, np.where(t == 1.0, 1.0, g))
    else:
        g = np.minimum(t / beta, 1.0)
    return float(g) if g.ndim == 0 else g


def _coeficientes_var(tau_hat: np.ndarray, beta: float) -> np.ndarray:
    th = np.atleast_2d(tau_hat)
    B, M = th.shape
    coef = np.zeros((B, M))
    if M == 1:
        coef[:, 0] = 1.0
        return coef
    filas = np.arange(B)
    k = np.sum(th <= beta, axis=1) - 1
    k_int = np.clip(k, 0, M - 2)
    t = (beta - th[filas, k_int]) / (th[filas, k_int + 1] - th[filas, k_int])
    coef[filas, k_int] = 1.0 - t
    coef[filas, k_int + 1] = t
    coef[k < 0] = np.eye(M)[0]
    coef[k >= M - 1] = np.eye(M)[M - 1]
    return coef


def coeficientes_riesgo(fracciones: FraccionesCuantil, medida: MedidaRiesgo) -> np.ndarray:
    """
    Coeficientes c_i tales que Ψ = Σ c_i·z_i (todas las medidas salvo
    mean-variance, que no es lineal). Forma igual a tau_hat.
    """
    if medida.tipo == "mean-variance":
        raise ValueError("mean-variance no es una combinación lineal de cuantiles")
    if medida.tipo == "neutral":
        return fracciones.pesos
    if medida.tipo == "var":
        coef = _coeficientes_var(fracciones.tau_hat, medida.beta)
        return coef if fracciones.tau.ndim == 2 else coef[0]
    return np.diff(distorsion_g(medida.tipo, medida.beta, fracciones.tau), axis=-1)


def valor_riesgo_cinta(cinta: Cinta, z: Nodo, fracciones: FraccionesCuantil,
                       medida: MedidaRiesgo) -> Nodo:
    """Ψ por fila de z (B, M) sobre la cinta; devuelve (B,)."""
    B, M = z.forma
    fr = fracciones.para_lote(B)
    if medida.tipo == "mean-variance":
        w = fr.pesos
        esperanza = cinta.sumar(z * w, eje=1)
        desvio = z - cinta.reformar(esperanza, (B, 1))
        varianza = cinta.sumar(cinta.cuadrado(desvio) * w, eje=1)
        return esperanza - medida.beta * cinta.raiz(varianza)
    return cinta.sumar(z * coeficientes_riesgo(fr, medida), eje=1)


def valor_riesgo(cuantiles, fracciones: FraccionesCuantil, medida: MedidaRiesgo):
    """
    Ψ aplicado a cuantiles (M,) o (B, M).

    Raises:
        ValueError: Si los cuantiles no son finitos o no coinciden con M.
    """
    z = np.asarray(cuantiles, dtype=np.float64)
    if not np.all(np.isfinite(z)):
        raise ValueError("cuantiles no finitos")
    if z.shape[-1] != fracciones.M:
        raise ValueError(f"se recibieron {z.shape[-1]} cuantiles para M = {fracciones.M}")
    es_vector = z.ndim == 1
    cinta = Cinta(registrar=False)
    valor = valor_riesgo_cinta(cinta, cinta.constante(np.atleast_2d(z)), fracciones, medida).valor
    return float(valor[0]) if es_vector else valor


def q_suave_cinta(cinta: Cinta, criticos: ParejaCriticos, estados_acciones,
                  fracciones: FraccionesCuantil, medida: MedidaRiesgo) -> Nodo:
    """min(Ψ[Z_w1], Ψ[Z_w2]) por muestra; los críticos son constantes."""
    valores = []
    for w in (criticos.w1, criticos.w2):
        nodos = nodos_segmentos(cinta, cinta.constante(w.valores), w)
        z, _ = cuantiles_cinta(cinta, nodos, criticos.red, estados_acciones, fracciones.tau_hat)
        valores.append(valor_riesgo_cinta(cinta, z, fracciones, medida))
    return cinta.minimo(valores[0], valores[1])


def q_suave_lote(criticos: ParejaCriticos, estados, acciones, fracciones: FraccionesCuantil,
                 medida: MedidaRiesgo) -> np.ndarray:
    x_sa = concatenar_estado_accion(criticos.red, estados, acciones)
    cinta = Cinta(registrar=False)
    return q_suave_cinta(cinta, criticos, x_sa, fracciones.para_lote(x_sa.shape[0]), medida).valor


def q_suave(criticos: ParejaCriticos, s, a, fracciones: FraccionesCuantil,
            medida: MedidaRiesgo) -> float:
    """Valor de acción suave con riesgo para un par (s, a)."""
    return float(q_suave_lote(criticos, np.asarray(s)[None, :], np.asarray(a)[None, :],
                              fracciones, medida)[0])
