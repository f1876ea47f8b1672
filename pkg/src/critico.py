"""
Críticos distribucionales de cuantiles.

Contiene:
    - Fracciones de cuantil τ_0..τ_M (QR-DQN, IQN y FQF) y sus puntos medios τ̂.
    - La red de cuantiles Z_w(s, a, τ̂): embedding estado-acción ψ combinado
      multiplicativamente con un embedding de cosenos cos(π·i·τ̂), i = 1..C,
      seguido de una capa oculta y salida escalar.
    - El objetivo distribucional suave
          T_i = r + γ(1 − fin)·[min_k Z_{τ̂_i, w̄_k}(s', a') − α log π_θ̄(a'|s')]
      con a' ~ π_θ̄(·|s').
    - La pérdida de regresión de cuantiles con Huber
          J_Z(w) = Σ_i Σ_j (τ_{i+1} − τ_i)·|τ̂_j − 1{δ_ij < 0}|·L_κ(δ_ij)/κ,
          δ_ij = T_i − Z_{τ̂_j, w}(s, a)
      promediada sobre el lote.
    - Promedio de Polyak y entrenamiento de la red de propuesta de FQF.

Referencias:
    contexto/03_ecuaciones_gobernantes.md, sección "Crítico distribucional"
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import List, Optional, Tuple

import numpy as np

from src.autodiff import Cinta, Nodo
from src.optimizador import Optimizador, aplicar_paso
from src.politica import ParametrosPolitica, muestrear_acciones
from src.redes import (
    EspecificacionMLP,
    VectorParametros,
    gradientes_perdida,
    inicializar_mlp,
    inicializar_parametros,
    mlp_cinta,
    nodos_segmentos,
)


MODOS_FRACCIONES = ("qrdqn", "iqn", "fqf")
PROBABILIDAD_MINIMA_FQF = 1e-6


# ============================================================================
# FRACCIONES DE CUANTIL
# ============================================================================

@dataclass
class FraccionesCuantil:
    """
    Fracciones ordenadas τ_0 = 0 < τ_1 < ... < τ_M = 1.

    `tau` tiene forma (M+1,) para un conjunto compartido o (B, M+1) con un
    conjunto por muestra.
    """

    tau: np.ndarray

    def __post_init__(self):
        self.tau = np.asarray(self.tau, dtype=np.float64)
        if self.tau.shape[-1] < 2:
            raise ValueError("se necesitan al menos dos fracciones (M ≥ 1)")
        if np.any(self.tau[..., 0] != 0.0) or np.any(self.tau[..., -1] != 1.0):
            raise ValueError("las fracciones deben empezar en 0 y terminar en 1")
        if np.any(np.diff(self.tau, axis=-1) <= 0.0):
            raise ValueError("las fracciones deben ser estrictamente crecientes")

    @property
    def M(self) -> int:
        return self.tau.shape[-1] - 1

    @property
    def tau_hat(self) -> np.ndarray:
        return 0.5 * (self.tau[..., :-1] + self.tau[..., 1:])

    @property
    def pesos(self) -> np.ndarray:
        return np.diff(self.tau, axis=-1)

    def para_lote(self, n: int) -> "FraccionesCuantil":
        """Versión (n, M+1) de las fracciones."""
        if self.tau.ndim == 2:
            assert self.tau.shape[0] == n, "tamaño de lote incompatible con las fracciones"
            return self
        return FraccionesCuantil(np.broadcast_to(self.tau, (n, self.M + 1)).copy())


@dataclass
class ModoFracciones:
    """
    Generador de fracciones.

    Attributes:
        tipo: 'qrdqn', 'iqn' o 'fqf'.
        M: Número de cuantiles.
        propuesta: Parámetros de la red de propuesta (sólo FQF).
        espec_propuesta: Arquitectura de la red de propuesta (sólo FQF).
    """

    tipo: str
    M: int
    propuesta: Optional[VectorParametros] = None
    espec_propuesta: Optional[EspecificacionMLP] = None

    def __post_init__(self):
        if self.tipo not in MODOS_FRACCIONES:
            raise ValueError(f"modo de fracciones desconocido '{self.tipo}'")
        if self.M < 1:
            raise ValueError(f"M debe ser ≥ 1, se recibió {self.M}")
        if self.tipo == "fqf":
            assert self.propuesta is not None and self.espec_propuesta is not None, \
                "FQF requiere red de propuesta"
            assert self.espec_propuesta.salida == self.M, "la propuesta debe tener M salidas"


def crear_modo_fracciones(tipo: str, M: int, rng: Optional[np.random.Generator] = None,
                          dim_embedding: Optional[int] = None,
                          ocultas: int = 128) -> ModoFracciones:
    """La red de propuesta de FQF es [dim_embedding, ocultas, M]."""
    if tipo != "fqf":
        return ModoFracciones(tipo, M)
    if rng is None or dim_embedding is None:
        raise ValueError("FQF requiere rng y dim_embedding para crear la red de propuesta")
    espec = EspecificacionMLP((dim_embedding, ocultas, M))
    return ModoFracciones(tipo, M, inicializar_mlp(espec, rng), espec)


def _fracciones_fqf_cinta(cinta: Cinta, nodo: Nodo, modo: ModoFracciones,
                          embedding: np.ndarray) -> Nodo:
    """
    cumsum ∘ softmax con cada probabilidad mezclada hacia un piso ε, de modo
    que las fracciones interiores quedan estrictamente crecientes en (0, 1)
    aunque el softmax se sature.
    """
    nodos = nodos_segmentos(cinta, nodo, modo.propuesta)
    logits = mlp_cinta(cinta, nodos, modo.espec_propuesta, embedding)
    eps = min(PROBABILIDAD_MINIMA_FQF, 0.5 / modo.M)
    probabilidades = cinta.softmax(logits, eje=-1) * (1.0 - modo.M * eps) + eps
    return cinta.cumsum(probabilidades, eje=-1)


def generar_fracciones(modo: ModoFracciones, rng: np.random.Generator,
                       embedding: Optional[np.ndarray] = None,
                       n_muestras: Optional[int] = None) -> FraccionesCuantil:
    """
    Genera fracciones de cuantil.

    Args:
        modo: Generador.
        rng: Flujo pseudoaleatorio (IQN).
        embedding: Embedding estado-acción (H,) o (B, H); obligatorio en FQF.
        n_muestras: Si se da, un conjunto por muestra con forma (B, M+1).

    Returns:
        FraccionesCuantil. QR-DQN: τ_i = i/M. IQN: M−1 uniformes ordenadas
        con 0 y 1 en los extremos. FQF: suma acumulada del softmax de la red
        de propuesta.
    """
    M = modo.M
    if modo.tipo == "qrdqn":
        tau = np.arange(M + 1, dtype=np.float64) / M
        fr = FraccionesCuantil(tau)
        return fr.para_lote(n_muestras) if n_muestras is not None else fr

    if modo.tipo == "iqn":
        forma = (M - 1,) if n_muestras is None else (n_muestras, M - 1)
        interiores = np.sort(rng.uniform(0.0, 1.0, size=forma), axis=-1)
        ceros = np.zeros(forma[:-1] + (1,))
        return FraccionesCuantil(np.concatenate([ceros, interiores, ceros + 1.0], axis=-1))

    if embedding is None:
        raise ValueError("FQF requiere el embedding estado-acción")
    emb = np.asarray(embedding, dtype=np.float64)
    es_vector = emb.ndim == 1
    cinta = Cinta(registrar=False)
    acumulada = _fracciones_fqf_cinta(cinta, cinta.constante(modo.propuesta.valores),
                                      modo, np.atleast_2d(emb)).valor
    ceros = np.zeros((acumulada.shape[0], 1))
    tau = np.concatenate([ceros, acumulada[:, :M - 1], ceros + 1.0], axis=1)
    return FraccionesCuantil(tau[0] if es_vector else tau)


# ============================================================================
# RED DE CUANTILES
# ============================================================================

@dataclass(frozen=True)
class RedCuantiles:
    """Arquitectura de Z_w(s, a, τ̂)."""

    dim_estado: int
    dim_accion: int
    ocultas: int = 256
    num_cosenos: int = 64

    @property
    def espec_psi(self) -> EspecificacionMLP:
        return EspecificacionMLP((self.dim_estado + self.dim_accion, self.ocultas))

    @property
    def espec_phi(self) -> EspecificacionMLP:
        return EspecificacionMLP((self.num_cosenos, self.ocultas))

    @property
    def espec_f(self) -> EspecificacionMLP:
        return EspecificacionMLP((self.ocultas, self.ocultas, 1))

    def disposicion(self):
        return (self.espec_psi.disposicion("psi.")
                + self.espec_phi.disposicion("phi.")
                + self.espec_f.disposicion("f."))

    def inicializar(self, rng: np.random.Generator) -> VectorParametros:
        return inicializar_parametros(self.disposicion(), rng)


@dataclass
class ParejaCriticos:
    """Críticos gemelos (w1, w2) o sus copias objetivo (w̄1, w̄2)."""

    w1: VectorParametros
    w2: VectorParametros
    red: RedCuantiles

    def copia(self) -> "ParejaCriticos":
        return ParejaCriticos(self.w1.copia(), self.w2.copia(), self.red)


def crear_criticos(red: RedCuantiles, rng: np.random.Generator) -> ParejaCriticos:
    return ParejaCriticos(red.inicializar(rng), red.inicializar(rng), red)


def embedding_cosenos(tau_hat: np.ndarray, num_cosenos: int) -> np.ndarray:
    """cos(π·i·τ̂) con i = 1..num_cosenos; forma tau_hat.shape + (num_cosenos,)."""
    i = np.arange(1, num_cosenos + 1, dtype=np.float64)
    return np.cos(np.pi * np.asarray(tau_hat, dtype=np.float64)[..., None] * i)


def cuantiles_cinta(cinta: Cinta, nodos, red: RedCuantiles, estados_acciones,
                    tau_hat: np.ndarray) -> Tuple[Nodo, Nodo]:
    """
    Cuantiles Z(s, a, τ̂) sobre la cinta.

    Args:
        estados_acciones: concat(s, a) con forma (B, s+a); ndarray o Nodo.
        tau_hat: (N,) compartido o (B, N).

    Returns:
        (cuantiles (B, N), embedding ψ (B, H))
    """
    B = np.shape(estados_acciones.valor if isinstance(estados_acciones, Nodo) else estados_acciones)[0]
    tau_hat = np.broadcast_to(np.asarray(tau_hat, dtype=np.float64), (B, np.shape(tau_hat)[-1]))
    N, H = tau_hat.shape[1], red.ocultas

    psi = cinta.relu(mlp_cinta(cinta, nodos, red.espec_psi, estados_acciones, "psi."))
    cosenos = embedding_cosenos(tau_hat, red.num_cosenos).reshape(B * N, red.num_cosenos)
    phi = cinta.relu(mlp_cinta(cinta, nodos, red.espec_phi, cosenos, "phi."))
    h = cinta.reformar(psi, (B, 1, H)) * cinta.reformar(phi, (B, N, H))
    z = mlp_cinta(cinta, nodos, red.espec_f, cinta.reformar(h, (B * N, H)), "f.")
    return cinta.reformar(z, (B, N)), psi


def concatenar_estado_accion(red: RedCuantiles, estados, acciones) -> np.ndarray:
    s = np.atleast_2d(np.asarray(estados, dtype=np.float64))
    a = np.atleast_2d(np.asarray(acciones, dtype=np.float64))
    if s.shape[1] != red.dim_estado or a.shape[1] != red.dim_accion or s.shape[0] != a.shape[0]:
        raise ValueError(
            f"dimensiones incompatibles con el crítico: s {s.shape}, a {a.shape}")
    return np.concatenate([s, a], axis=1)


def cuantiles(red: RedCuantiles, w: VectorParametros, estados, acciones,
              tau_hat: np.ndarray) -> np.ndarray:
    """Cuantiles (B, N) con parámetros fijos."""
    cinta = Cinta(registrar=False)
    nodos = nodos_segmentos(cinta, cinta.constante(w.valores), w)
    x_sa = concatenar_estado_accion(red, estados, acciones)
    z, _ = cuantiles_cinta(cinta, nodos, red, x_sa, tau_hat)
    return z.valor


def embedding_estado_accion(red: RedCuantiles, w: VectorParametros, estados, acciones) -> np.ndarray:
    """ψ(s, a) con forma (B, H); entrada de la red de propuesta de FQF."""
    cinta = Cinta(registrar=False)
    nodos = nodos_segmentos(cinta, cinta.constante(w.valores), w)
    x_sa = concatenar_estado_accion(red, estados, acciones)
    psi = cinta.relu(mlp_cinta(cinta, nodos, red.espec_psi, x_sa, "psi."))
    return psi.valor


def valor_cuantil(red: RedCuantiles, w: VectorParametros, s, a, tau_hat_i: float) -> float:
    """
    Z_{τ̂,w}(s, a) para una única fracción.

    Raises:
        ValueError: Si τ̂ no está en (0, 1).
    """
    if not 0.0 < tau_hat_i < 1.0:
        raise ValueError(f"tau_hat debe estar en (0,1), se recibió {tau_hat_i}")
    return float(cuantiles(red, w, np.asarray(s)[None, :], np.asarray(a)[None, :],
                           np.array([tau_hat_i]))[0, 0])


# ============================================================================
# PÉRDIDA DE HUBER POR CUANTILES
# ============================================================================

def huber(delta, kappa: float):
    """L_κ(δ) = δ²/2 si |δ| ≤ κ, κ(|δ| − κ/2) en otro caso."""
    if kappa <= 0:
        raise ValueError(f"kappa debe ser positivo, se recibió {kappa}")
    d = np.asarray(delta, dtype=np.float64)
    absoluto = np.abs(d)
    valor = np.where(absoluto <= kappa, 0.5 * d * d, kappa * (absoluto - 0.5 * kappa))
    return float(valor) if valor.ndim == 0 else valor


def rho_huber_cuantil(tau: float, delta, kappa: float):
    """ρ_τ^κ(δ) = |τ − 1{δ < 0}|·L_κ(δ)/κ."""
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau debe estar en (0,1), se recibió {tau}")
    d = np.asarray(delta, dtype=np.float64)
    valor = np.abs(tau - (d < 0.0).astype(np.float64)) * huber(d, kappa) / kappa
    return float(valor) if np.ndim(valor) == 0 else valor


def perdida_huber_cuantil_cinta(cinta: Cinta, actuales: Nodo, objetivos: np.ndarray,
                                fracciones: FraccionesCuantil, kappa: float) -> Nodo:
    """
    J_Z promediada sobre el lote.

    Args:
        actuales: Z_{τ̂_j, w}(s, a), forma (B, M).
        objetivos: T_i sin gradiente, forma (B, M).
    """
    if kappa <= 0:
        raise ValueError(f"kappa debe ser positivo, se recibió {kappa}")
    B, M = objetivos.shape
    fr = fracciones.para_lote(B)
    delta = cinta.reformar(cinta.constante(objetivos), (B, M, 1)) - cinta.reformar(actuales, (B, 1, M))
    indicador = (delta.valor < 0.0).astype(np.float64)
    peso = fr.pesos[:, :, None] * np.abs(fr.tau_hat[:, None, :] - indicador) / kappa
    return cinta.sumar(cinta.huber(delta, kappa) * peso) * (1.0 / B)


def perdida_huber_cuantil_matriz(objetivos: np.ndarray, actuales: np.ndarray,
                                 fracciones: FraccionesCuantil, kappa: float) -> float:
    """Versión sin gradiente de la pérdida sobre matrices (B, M)."""
    objetivos = np.atleast_2d(np.asarray(objetivos, dtype=np.float64))
    actuales = np.atleast_2d(np.asarray(actuales, dtype=np.float64))
    cinta = Cinta(registrar=False)
    return float(perdida_huber_cuantil_cinta(cinta, cinta.constante(actuales), objetivos,
                                             fracciones, kappa).valor)


def calcular_cuantiles_objetivo(objetivo: ParejaCriticos, theta_bar: ParametrosPolitica,
                                lote, etiquetas: np.ndarray, fracciones: FraccionesCuantil,
                                gamma: float, alpha: float,
                                rng: np.random.Generator) -> np.ndarray:
    """
    Objetivos T_i por muestra, forma (B, M).

    Una sola acción a' ~ π_θ̄(·|s') por transición. Con fin = True se
    descarta el término de arranque.

    Raises:
        FloatingPointError: Si log π_θ̄(a'|s') no es finito.
    """
    B = len(lote)
    fr = fracciones.para_lote(B)
    acciones_sig, log_prob_sig = muestrear_acciones(theta_bar, lote.estados_sig, rng)
    if not np.all(np.isfinite(log_prob_sig)):
        raise FloatingPointError("log-probabilidad no finita al formar los objetivos")
    z1 = cuantiles(objetivo.red, objetivo.w1, lote.estados_sig, acciones_sig, fr.tau_hat)
    z2 = cuantiles(objetivo.red, objetivo.w2, lote.estados_sig, acciones_sig, fr.tau_hat)
    continua = 1.0 - np.asarray(lote.terminados, dtype=np.float64)
    arranque = np.minimum(z1, z2) - alpha * log_prob_sig[:, None]
    return np.asarray(etiquetas, dtype=np.float64)[:, None] + gamma * continua[:, None] * arranque


def _perdida_critico(red: RedCuantiles, w: VectorParametros, x_sa: np.ndarray,
                     objetivos: np.ndarray, fracciones: FraccionesCuantil, kappa: float):
    def funcion(cinta, nodo):
        nodos = nodos_segmentos(cinta, nodo, w)
        z, _ = cuantiles_cinta(cinta, nodos, red, x_sa, fracciones.tau_hat)
        return perdida_huber_cuantil_cinta(cinta, z, objetivos, fracciones, kappa)
    return funcion


def gradientes_criticos(criticos: ParejaCriticos, objetivos: np.ndarray, lote,
                        fracciones: FraccionesCuantil,
                        kappa: float) -> List[Tuple[float, np.ndarray]]:
    """[(J_Z(w1), ∇w1), (J_Z(w2), ∇w2)] con objetivos fijos."""
    fr = fracciones.para_lote(len(lote))
    x_sa = concatenar_estado_accion(criticos.red, lote.estados, lote.acciones)
    return [gradientes_perdida(_perdida_critico(criticos.red, w, x_sa, objetivos, fr, kappa), w)
            for w in (criticos.w1, criticos.w2)]


def perdida_huber_cuantil(criticos: ParejaCriticos, objetivo: ParejaCriticos,
                          theta_bar: ParametrosPolitica, lote, etiquetas: np.ndarray,
                          fracciones: FraccionesCuantil, gamma: float, alpha: float,
                          kappa: float, rng: np.random.Generator) -> Tuple[float, float]:
    """J_Z para cada crítico; el lado objetivo usa w̄ y θ̄ sin gradiente."""
    if len(lote) == 0:
        raise ValueError("el lote no puede estar vacío")
    T = calcular_cuantiles_objetivo(objetivo, theta_bar, lote, etiquetas, fracciones,
                                    gamma, alpha, rng)
    fr = fracciones.para_lote(len(lote))
    perdidas = []
    for w in (criticos.w1, criticos.w2):
        z = cuantiles(criticos.red, w, lote.estados, lote.acciones, fr.tau_hat)
        perdidas.append(perdida_huber_cuantil_matriz(T, z, fr, kappa))
    return perdidas[0], perdidas[1]


def actualizar_criticos(criticos: ParejaCriticos, objetivos: np.ndarray, lote,
                        fracciones: FraccionesCuantil, kappa: float,
                        optimizadores: Tuple[Optimizador, Optimizador]):
    """
    Un paso de optimización para cada crítico.

    Returns:
        (ParejaCriticos, (opt1, opt2), (pérdida1, pérdida2))
    """
    resultados = gradientes_criticos(criticos, objetivos, lote, fracciones, kappa)
    nuevos, opts, perdidas = [], [], []
    for nombre, w, (perdida, grad), opt in zip(("critic1", "critic2"), (criticos.w1, criticos.w2),
                                               resultados, optimizadores):
        if not np.isfinite(perdida):
            raise FloatingPointError(f"pérdida no finita en el componente '{nombre}'")
        w_nuevo, opt = aplicar_paso(w, grad, opt)
        nuevos.append(w_nuevo)
        opts.append(opt)
        perdidas.append(perdida)
    return (ParejaCriticos(nuevos[0], nuevos[1], criticos.red), tuple(opts), tuple(perdidas))


# ============================================================================
# POLYAK Y PROPUESTA FQF
# ============================================================================

def actualizar_polyak(w: VectorParametros, w_bar: VectorParametros, iota: float) -> VectorParametros:
    """
    w̄ ← ι·w + (1 − ι)·w̄.

    Raises:
        ValueError: Si ι ∉ (0, 1] o las formas no coinciden.
    """
    if not 0.0 < iota <= 1.0:
        raise ValueError(f"iota debe estar en (0,1], se recibió {iota}")
    if w.tamano != w_bar.tamano:
        raise ValueError(f"formas incompatibles en Polyak: {w.tamano} vs {w_bar.tamano}")
    return w_bar.con_valores(iota * w.valores + (1.0 - iota) * w_bar.valores)


def actualizar_polyak_criticos(criticos: ParejaCriticos, objetivo: ParejaCriticos,
                               iota: float) -> ParejaCriticos:
    return ParejaCriticos(actualizar_polyak(criticos.w1, objetivo.w1, iota),
                          actualizar_polyak(criticos.w2, objetivo.w2, iota), objetivo.red)


def gradiente_fracciones(red: RedCuantiles, w: VectorParametros, estados, acciones,
                         fracciones: FraccionesCuantil) -> np.ndarray:
    """
    ∂W₁/∂τ_i = 2Z(τ_i) − Z(τ̂_i) − Z(τ̂_{i−1}) para i = 1..M−1, forma (B, M−1).
    """
    B = np.atleast_2d(estados).shape[0]
    fr = fracciones.para_lote(B)
    M = fr.M
    z_tau = cuantiles(red, w, estados, acciones, fr.tau[:, 1:M])
    z_hat = cuantiles(red, w, estados, acciones, fr.tau_hat)
    return 2.0 * z_tau - z_hat[:, 1:] - z_hat[:, :-1]


def actualizar_propuesta_fqf(modo: ModoFracciones, criticos: ParejaCriticos, lote,
                             embedding: np.ndarray, fracciones: FraccionesCuantil,
                             optimizador: Optimizador):
    """
    Un paso sobre la red de propuesta usando el gradiente de fracciones
    evaluado con el crítico 1. El embedding llega sin gradiente.

    Returns:
        (ModoFracciones, optimizador, pérdida sustituta)
    """
    if modo.tipo != "fqf" or modo.M < 2:
        return modo, optimizador, 0.0
    g = gradiente_fracciones(criticos.red, criticos.w1, lote.estados, lote.acciones, fracciones)
    M = modo.M

    def funcion(cinta, nodo):
        acumulada = _fracciones_fqf_cinta(cinta, nodo, modo, embedding)
        interiores = cinta.columnas(acumulada, 0, M - 1)
        return cinta.sumar(interiores * g) * (1.0 / g.shape[0])

    perdida, grad = gradientes_perdida(funcion, modo.propuesta)
    if not np.isfinite(perdida):
        raise FloatingPointError("pérdida no finita en el componente 'fraction'")
    propuesta, optimizador = aplicar_paso(modo.propuesta, grad, optimizador)
    return replace(modo, propuesta=propuesta), optimizador, perdida
