"""
Estimadores empíricos de las cantidades teóricas de la imitación por
observaciones.

Distancia de recompensa LfO sobre un conjunto finito de candidatas 𝓡 (la
función cero siempre pertenece, así que d ≥ 0):

    d(a, b) = max_{r ∈ 𝓡} ( mean_a r(s, s') − mean_b r(s, s') )

Coeficiente de recompensa y distribución normalizada sobre m pares:

    ĉ_r = Σ_i r(s_i, s'_i),     𝓡̂_i = r(s_i, s'_i) / ĉ_r

Error de la distribución de transiciones sobre una malla común:

    e = C_r · min_π Σ_celdas 𝓡(celda)·(μ̂_E(celda) − μ̂_π(celda)),
    C_r = Σ_celdas r,  𝓡 = r / C_r

Referencias:
    contexto/03_ecuaciones_gobernantes.md, sección "Diagnósticos"
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from src.datos import LotePares
from src.entornos import crear_entorno
from src.entrenamiento import cargar_politica
from src.mallas import (
    estados_en_centros,
    generar_malla_transiciones,
    indices_celda,
    mallas_compatibles,
    proyectar_pares,
)
from src.politica import accion_determinista
from src.puntos_control import cargar_punto_control
from src.recompensa import ParametrosRecompensa, valores_recompensa
from src.redes import EspecificacionMLP, VectorParametros


FuncionRecompensa = Callable[[np.ndarray, np.ndarray], np.ndarray]


def recompensa_cero(estados: np.ndarray, estados_sig: np.ndarray) -> np.ndarray:
    return np.zeros(np.atleast_2d(estados).shape[0])


def _como_pares(pares) -> Tuple[np.ndarray, np.ndarray]:
    if isinstance(pares, LotePares):
        s, s_sig = pares.estados, pares.estados_sig
    else:
        s, s_sig = pares
    s = np.atleast_2d(np.asarray(s, dtype=np.float64))
    s_sig = np.atleast_2d(np.asarray(s_sig, dtype=np.float64))
    if s.shape != s_sig.shape:
        raise ValueError(f"s y s' con formas distintas: {s.shape} vs {s_sig.shape}")
    if s.shape[0] == 0 or s.size == 0:
        raise ValueError("el conjunto de pares no puede estar vacío")
    return s, s_sig


def _evaluar(r: FuncionRecompensa, s: np.ndarray, s_sig: np.ndarray) -> np.ndarray:
    valores = np.asarray(r(s, s_sig), dtype=np.float64).reshape(-1)
    if valores.shape[0] != s.shape[0]:
        raise ValueError(f"la recompensa devolvió {valores.shape[0]} valores para {s.shape[0]} pares")
    return valores


class ConjuntoRecompensas:
    """
    Conjunto finito de funciones candidatas (s, s') → r.

    La función cero se agrega siempre como primera candidata.
    """

    def __init__(self, candidatas: Sequence[FuncionRecompensa] = ()):
        self.candidatas: List[FuncionRecompensa] = [recompensa_cero, *candidatas]

    def __len__(self) -> int:
        return len(self.candidatas)

    def agregar(self, candidata: FuncionRecompensa) -> None:
        self.candidatas.append(candidata)


def brechas_recompensa(conjunto: ConjuntoRecompensas, pares_a, pares_b) -> np.ndarray:
    """mean_a r − mean_b r para cada candidata, en orden."""
    sa, sa_sig = _como_pares(pares_a)
    sb, sb_sig = _como_pares(pares_b)
    return np.array([np.mean(_evaluar(r, sa, sa_sig)) - np.mean(_evaluar(r, sb, sb_sig))
                     for r in conjunto.candidatas])


def distancia_recompensa_lfo(conjunto: ConjuntoRecompensas, pares_a, pares_b) -> float:
    """
    Máximo sobre las candidatas de la diferencia de medias empíricas.

    Raises:
        ValueError: Si algún conjunto de pares está vacío.
    """
    return float(np.max(brechas_recompensa(conjunto, pares_a, pares_b)))


def coeficiente_recompensa(r: FuncionRecompensa, pares) -> float:
    """
    Suma exacta de r sobre los pares.

    Raises:
        ValueError: Si r toma algún valor negativo en la muestra.
    """
    s, s_sig = _como_pares(pares)
    valores = _evaluar(r, s, s_sig)
    if np.any(valores < 0.0):
        raise ValueError("la recompensa debe ser no negativa en toda la muestra")
    return float(np.sum(valores))


def distribucion_recompensa_normalizada(r: FuncionRecompensa, pares) -> np.ndarray:
    """
    Pesos r_i / ĉ_r (suman 1).

    Raises:
        ValueError: Si ĉ_r = 0 o r es negativa.
    """
    s, s_sig = _como_pares(pares)
    valores = _evaluar(r, s, s_sig)
    if np.any(valores < 0.0):
        raise ValueError("la recompensa debe ser no negativa en toda la muestra")
    total = np.sum(valores)
    if total <= 0.0:
        raise ValueError("coeficiente de recompensa nulo: normalización degenerada")
    return valores / total


# ============================================================================
# HISTOGRAMAS DE TRANSICIONES
# ============================================================================

@dataclass
class HistogramaTransiciones:
    """
    Distribución descontada μ̂(s, s') sobre una malla.

    Attributes:
        pesos (ndarray): Masa por celda, forma malla['forma'], suma 1.
        malla (dict): Malla de generar_malla_transiciones.
        gamma (float): Descuento usado.
        fuera_malla (int): Pares asignados a celdas de borde por caer fuera.
    """

    pesos: np.ndarray
    malla: Dict
    gamma: float
    fuera_malla: int = 0

    @property
    def pesos_planos(self) -> np.ndarray:
        return self.pesos.reshape(-1)


def estimar_distribucion_transiciones(trayectorias: Sequence[np.ndarray], malla: Dict,
                                      gamma: float) -> HistogramaTransiciones:
    """
    Histograma con peso (1−γ)·γ^t para el par (s_t, s_{t+1}) de cada trayectoria.

    Args:
        trayectorias: Secuencias de estados (T+1, dim_estado), T ≥ 1.
        malla (dict): Malla de 2k ejes.
        gamma (float): Descuento en [0, 1).

    Raises:
        ValueError: γ fuera de [0, 1) o ninguna transición.
    """
    if not 0.0 <= gamma < 1.0:
        raise ValueError(f"gamma debe estar en [0,1), se recibió {gamma}")
    pesos = np.zeros(int(np.prod(malla['forma'])))
    fuera = 0
    for trayectoria in trayectorias:
        estados = np.atleast_2d(np.asarray(trayectoria, dtype=np.float64))
        T = estados.shape[0] - 1
        if T < 1:
            continue
        puntos = proyectar_pares(malla, estados[:-1], estados[1:])
        indices, n_fuera = indices_celda(malla, puntos)
        fuera += n_fuera
        with np.errstate(under="ignore"):
            w = (1.0 - gamma) * gamma ** np.arange(T, dtype=np.float64)
        np.add.at(pesos, indices, w)
    total = np.sum(pesos)
    if total <= 0.0:
        raise ValueError("no hay transiciones para estimar el histograma")
    pesos /= total
    return HistogramaTransiciones(pesos.reshape(malla['forma']), malla, float(gamma), fuera)


def _recompensa_en_celdas(r: Union[np.ndarray, FuncionRecompensa], malla: Dict,
                          dim_estado: Optional[int] = None) -> np.ndarray:
    if callable(r):
        if dim_estado is None:
            raise ValueError("se necesita dim_estado para evaluar r en los centros de celda")
        s, s_sig = estados_en_centros(malla, dim_estado)
        return _evaluar(r, s, s_sig)
    valores = np.asarray(r, dtype=np.float64).reshape(-1)
    if valores.shape[0] != int(np.prod(malla['forma'])):
        raise ValueError(f"r tiene {valores.shape[0]} valores para "
                         f"{int(np.prod(malla['forma']))} celdas")
    return valores


def error_distribucion_transiciones(r: Union[np.ndarray, FuncionRecompensa],
                                    hist_experto: HistogramaTransiciones,
                                    hist_agentes: Sequence[HistogramaTransiciones],
                                    dim_estado: Optional[int] = None) -> float:
    """
    C_r · min sobre agentes de Σ 𝓡·(μ̂_E − μ̂_π).

    Args:
        r: Valores por celda (orden plano) o función evaluada en los centros.
        hist_experto: Histograma del experto.
        hist_agentes: Histogramas candidatos (no vacío).
        dim_estado: Requerido si r es una función.

    Raises:
        ValueError: Mallas distintas, r negativa, C_r = 0 o lista vacía.
    """
    if len(hist_agentes) == 0:
        raise ValueError("la lista de histogramas de agentes no puede estar vacía")
    for h in hist_agentes:
        if not mallas_compatibles(h.malla, hist_experto.malla):
            raise ValueError("todos los histogramas deben compartir la misma malla")
    valores = _recompensa_en_celdas(r, hist_experto.malla, dim_estado)
    if np.any(valores < 0.0):
        raise ValueError("la recompensa debe ser no negativa en todas las celdas")
    c_r = float(np.sum(valores))
    if c_r <= 0.0:
        raise ValueError("coeficiente de recompensa nulo: normalización degenerada")
    r_norm = valores / c_r
    mu_e = hist_experto.pesos_planos
    brechas = [float(np.dot(r_norm, mu_e - h.pesos_planos)) for h in hist_agentes]
    return c_r * min(brechas)


def coeficiente_en_celdas(r: Union[np.ndarray, FuncionRecompensa], malla: Dict,
                          dim_estado: Optional[int] = None) -> float:
    """C_r = Σ_celdas r."""
    return float(np.sum(_recompensa_en_celdas(r, malla, dim_estado)))


def errores_acumulados(r: Union[np.ndarray, FuncionRecompensa],
                       hist_experto: HistogramaTransiciones,
                       hist_agentes: Sequence[HistogramaTransiciones],
                       dim_estado: Optional[int] = None) -> List[float]:
    """
    Error de transiciones con el mínimo tomado sobre los primeros k
    histogramas, para k = 1..n. El último valor es el mínimo sobre todos.
    """
    return [error_distribucion_transiciones(r, hist_experto, hist_agentes[:k + 1], dim_estado)
            for k in range(len(hist_agentes))]


# ============================================================================
# DISTANCIAS DE UNA EJECUCIÓN
# ============================================================================

COLUMNAS_DISTANCIA = ["checkpoint_step", "lfo_reward_distance", "state_transition_error",
                      "coefficient"]


def trayectorias_desde_pares(estados, estados_sig, tolerancia: float = 0.0) -> List[np.ndarray]:
    """
    Reconstruye las trayectorias a partir de pares consecutivos: una cadena
    se corta donde s'_i ≠ s_{i+1}.
    """
    s = np.atleast_2d(np.asarray(estados, dtype=np.float64))
    s_sig = np.atleast_2d(np.asarray(estados_sig, dtype=np.float64))
    trayectorias, inicio = [], 0
    for i in range(s.shape[0]):
        ultimo = i == s.shape[0] - 1
        if ultimo or np.max(np.abs(s_sig[i] - s[i + 1])) > tolerancia:
            trayectorias.append(np.vstack([s[inicio:i + 1], s_sig[i][None, :]]))
            inicio = i + 1
    return trayectorias


def trayectorias_deterministas(theta, entorno, episodios: int, semilla: int = 0) -> List[np.ndarray]:
    """Secuencias de estados (T+1, dim_estado) con acciones deterministas."""
    trayectorias = []
    for k in range(episodios):
        s = entorno.reiniciar(semilla + k)
        estados, terminado = [s], False
        while not terminado:
            resultado = entorno.paso(accion_determinista(theta, s))
            s, terminado = resultado.estado_siguiente, resultado.terminado
            estados.append(s)
        trayectorias.append(np.array(estados))
    return trayectorias


def _pasos_puntos_control(directorio: Path) -> List[Tuple[int, Path]]:
    rutas = []
    for ruta in (directorio / "checkpoints").glob("step_*.mdlp"):
        try:
            rutas.append((int(ruta.stem.split("_", 1)[1]), ruta))
        except ValueError:
            continue
    return sorted(rutas)


def distancias_ejecucion(directorio, conjunto, episodios: int = 5, n_celdas: int = 16,
                         verbose: bool = False) -> pd.DataFrame:
    """
    Distancia LfO y error de transiciones para cada punto de control de una
    ejecución de imitación; escribe <directorio>/distance.csv.

    Las candidatas son la función cero y r_φ de cada punto de control. La
    recompensa del error de transiciones es la r_φ del último punto de control
    en los centros de celda, desplazada por su mínimo. La fila k lleva el
    mínimo del error sobre los puntos de control 1..k.

    Raises:
        ValueError: Si no hay puntos de control o les falta la recompensa.
    """
    directorio = Path(directorio)
    config = json.loads((directorio / "config.json").read_text(encoding="utf-8"))
    entorno = crear_entorno(config["env_id"])
    gamma = float(config.get("gamma", 0.99))
    puntos = _pasos_puntos_control(directorio)
    if not puntos:
        raise ValueError(f"no hay puntos de control en {directorio / 'checkpoints'}")

    malla = generar_malla_transiciones(entorno.espec, n_celdas)
    pares_experto = (conjunto.estados, conjunto.estados_sig)
    hist_experto = estimar_distribucion_transiciones(
        trayectorias_desde_pares(*pares_experto), malla, gamma)

    recompensas, agentes = [], []
    for paso, ruta in tqdm(puntos, desc="puntos de control", disable=not verbose, leave=False):
        segmentos = cargar_punto_control(ruta)
        if not any(k.startswith("reward/") for k in segmentos):
            raise ValueError(f"{ruta} no contiene la recompensa aprendida")
        params = VectorParametros.desde_segmentos(segmentos, "reward")
        rp = ParametrosRecompensa(params, EspecificacionMLP.desde_parametros(params),
                                  float(config.get("mu", 1e-4)))
        recompensas.append(lambda s, s2, rp=rp: valores_recompensa(rp, s, s2))
        theta = cargar_politica(ruta, entorno.espec)
        trayectorias = trayectorias_deterministas(theta, entorno, episodios)
        agentes.append((paso, trayectorias))

    conjunto_r = ConjuntoRecompensas(recompensas)
    valores = _recompensa_en_celdas(recompensas[-1], malla, entorno.espec.dim_estado)
    valores = valores - np.min(valores)
    if np.sum(valores) <= 0.0:
        valores = np.ones_like(valores)

    histogramas, distancias = [], []
    for paso, trayectorias in agentes:
        s = np.vstack([t[:-1] for t in trayectorias])
        s_sig = np.vstack([t[1:] for t in trayectorias])
        histogramas.append(estimar_distribucion_transiciones(trayectorias, malla, gamma))
        distancias.append(distancia_recompensa_lfo(conjunto_r, pares_experto, (s, s_sig)))
    errores = errores_acumulados(valores, hist_experto, histogramas)

    filas = [{
        "checkpoint_step": paso,
        "lfo_reward_distance": distancia,
        "state_transition_error": error,
        "coefficient": float(np.sum(valores)),
    } for (paso, _), distancia, error in zip(agentes, distancias, errores)]
    tabla = pd.DataFrame(filas, columns=COLUMNAS_DISTANCIA)
    tabla.to_csv(directorio / "distance.csv", index=False)
    metadatos = {
        "env_id": config["env_id"],
        "projection": list(malla['coordenadas']),
        "bins_per_axis": malla['n_celdas'],
        "gamma": gamma,
        "expert_out_of_grid": hist_experto.fuera_malla,
        "agent_out_of_grid": {str(paso): h.fuera_malla for (paso, _), h in zip(agentes, histogramas)},
        "state_transition_error_min": errores[-1],
    }
    (directorio / "distance_meta.json").write_text(json.dumps(metadatos, indent=2), encoding="utf-8")
    return tabla
