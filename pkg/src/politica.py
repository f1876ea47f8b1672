"""
Política gaussiana aplastada con tanh.

    u ~ N(μ_θ(s), σ_θ(s)²),  a = escala·tanh(u) + centro

    log π(a|s) = Σ_k [−ε_k²/2 − log σ_k − ½ log 2π]
                 − Σ_k log(escala_k·(1 − tanh²(u_k)) + 1e−6)

con u = μ + σ·ε. El log σ de la red se recorta a [−20, 2]. La misma función
`politica_cinta` sirve para muestrear (cinta sin registro) y para la pérdida
de la política (cinta con registro y ε fijo).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from src.autodiff import Cinta, Nodo
from src.redes import (
    EspecificacionMLP,
    VectorParametros,
    inicializar_mlp,
    mlp_cinta,
    nodos_segmentos,
)


LOG_STD_MIN = -20.0
LOG_STD_MAX = 2.0
ESTABILIZADOR_LOG = 1e-6
_MEDIO_LOG_2PI = 0.5 * np.log(2.0 * np.pi)


@dataclass(frozen=True)
class RedPolitica:
    """Arquitectura s → (media, log σ) y cotas de acción."""

    dim_estado: int
    dim_accion: int
    accion_min: np.ndarray
    accion_max: np.ndarray
    ocultas: Tuple[int, ...] = (256, 256)

    def __post_init__(self):
        object.__setattr__(self, "accion_min", np.asarray(self.accion_min, dtype=np.float64))
        object.__setattr__(self, "accion_max", np.asarray(self.accion_max, dtype=np.float64))
        object.__setattr__(self, "ocultas", tuple(int(h) for h in self.ocultas))

    @property
    def espec(self) -> EspecificacionMLP:
        return EspecificacionMLP((self.dim_estado, *self.ocultas, 2 * self.dim_accion))

    @property
    def escala(self) -> np.ndarray:
        return 0.5 * (self.accion_max - self.accion_min)

    @property
    def centro(self) -> np.ndarray:
        return 0.5 * (self.accion_max + self.accion_min)

    @property
    def interior_min(self) -> np.ndarray:
        return np.nextafter(self.accion_min, np.inf)

    @property
    def interior_max(self) -> np.ndarray:
        return np.nextafter(self.accion_max, -np.inf)


@dataclass
class ParametrosPolitica:
    """Parámetros θ (o θ̄) junto con su arquitectura."""

    params: VectorParametros
    red: RedPolitica

    def con_valores(self, valores) -> "ParametrosPolitica":
        return ParametrosPolitica(self.params.con_valores(valores), self.red)


def crear_politica(red: RedPolitica, rng: np.random.Generator) -> ParametrosPolitica:
    return ParametrosPolitica(inicializar_mlp(red.espec, rng), red)


def politica_desde_parametros(params: VectorParametros, accion_min, accion_max) -> ParametrosPolitica:
    """Reconstruye la política de un punto de control a partir de las formas."""
    espec = EspecificacionMLP.desde_parametros(params)
    dim_accion = espec.salida // 2
    red = RedPolitica(espec.entrada, dim_accion, accion_min, accion_max, espec.tamanos_capas[1:-1])
    return ParametrosPolitica(params, red)


def _estados(red: RedPolitica, estados) -> np.ndarray:
    s = np.atleast_2d(np.asarray(estados, dtype=np.float64))
    if s.shape[1] != red.dim_estado:
        raise ValueError(f"dimensión de estado {s.shape[1]}, la política espera {red.dim_estado}")
    if not np.all(np.isfinite(s)):
        raise ValueError("estado no finito para la política")
    return s


def media_y_log_std_cinta(cinta: Cinta, nodos, red: RedPolitica, estados) -> Tuple[Nodo, Nodo]:
    salida = mlp_cinta(cinta, nodos, red.espec, estados)
    media = cinta.columnas(salida, 0, red.dim_accion)
    log_std = cinta.recortar(cinta.columnas(salida, red.dim_accion, 2 * red.dim_accion),
                             LOG_STD_MIN, LOG_STD_MAX)
    return media, log_std


def politica_cinta(cinta: Cinta, nodo_params: Nodo, theta: ParametrosPolitica,
                   estados, ruido: np.ndarray) -> Tuple[Nodo, Nodo]:
    """
    Acción reparametrizada y log-probabilidad sobre la cinta.

    Args:
        ruido: ε ~ N(0, I) con forma (B, dim_accion).

    Returns:
        (acciones (B, dim_accion), log_prob (B,))
    """
    red = theta.red
    nodos = nodos_segmentos(cinta, nodo_params, theta.params)
    media, log_std = media_y_log_std_cinta(cinta, nodos, red, estados)
    u = media + cinta.exp(log_std) * ruido
    t = cinta.tanh(u)
    acciones = cinta.recortar(red.escala * t + red.centro, red.interior_min, red.interior_max)

    log_gauss = cinta.sumar(-0.5 * ruido ** 2 - _MEDIO_LOG_2PI - log_std, eje=1)
    jacobiano = cinta.log(red.escala * (1.0 - cinta.cuadrado(t)) + ESTABILIZADOR_LOG)
    log_prob = log_gauss - cinta.sumar(jacobiano, eje=1)
    return acciones, log_prob


def muestrear_acciones(theta: ParametrosPolitica, estados,
                       rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """Muestreo por lote: (acciones (B, dim_accion), log_prob (B,))."""
    s = _estados(theta.red, estados)
    ruido = rng.standard_normal((s.shape[0], theta.red.dim_accion))
    cinta = Cinta(registrar=False)
    acciones, log_prob = politica_cinta(cinta, cinta.constante(theta.params.valores), theta, s, ruido)
    return acciones.valor, log_prob.valor


def muestrear_accion(theta: ParametrosPolitica, s, rng: np.random.Generator) -> Tuple[np.ndarray, float]:
    """
    Muestrea a ~ π_θ(·|s) para un único estado.

    Returns:
        (acción (dim_accion,), log_prob finito)

    Raises:
        ValueError: Si el estado no es finito.
    """
    acciones, log_prob = muestrear_acciones(theta, np.asarray(s, dtype=np.float64)[None, :], rng)
    return acciones[0], float(log_prob[0])


def media_y_log_std(theta: ParametrosPolitica, estados) -> Tuple[np.ndarray, np.ndarray]:
    s = _estados(theta.red, estados)
    cinta = Cinta(registrar=False)
    nodos = nodos_segmentos(cinta, cinta.constante(theta.params.valores), theta.params)
    media, log_std = media_y_log_std_cinta(cinta, nodos, theta.red, s)
    return media.valor, log_std.valor


def acciones_deterministas(theta: ParametrosPolitica, estados) -> np.ndarray:
    media, _ = media_y_log_std(theta, estados)
    return theta.red.escala * np.tanh(media) + theta.red.centro


def accion_determinista(theta: ParametrosPolitica, s) -> np.ndarray:
    """a = escala·tanh(μ_θ(s)) + centro, sin muestreo."""
    return acciones_deterministas(theta, np.asarray(s, dtype=np.float64)[None, :])[0]
