#!/usr/bin/env python3
"""
Módulo de Visualización - Imitación por observaciones

Contiene funciones para generar gráficos de las ejecuciones de entrenamiento
y de los diagnósticos.

Funciones principales:
    - cargar_metricas: metrics.csv de uno o varios directorios de ejecución
    - graficar_curvas_aprendizaje: retorno vs pasos con banda de desviación
    - graficar_distorsiones: funciones g(τ) de las medidas de riesgo
    - graficar_histograma_transiciones: marginal 2-D de μ̂(s, s')
"""

import json
from pathlib import Path
from typing import Iterable, Optional, Sequence, Tuple, Union

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd
import seaborn as sns

from src.diagnosticos import HistogramaTransiciones
from src.riesgo import DISTORSIONES, MedidaRiesgo, distorsion_g

# Configuración de matplotlib para mejor calidad
plt.rcParams['figure.dpi'] = 100
plt.rcParams['savefig.dpi'] = 300
plt.rcParams['font.size'] = 10
plt.rcParams['axes.labelsize'] = 11
plt.rcParams['axes.titlesize'] = 12
plt.rcParams['legend.fontsize'] = 9

# Directorio para guardar figuras
DIR_FIGURAS = Path(__file__).parent.parent / "resultados" / "figuras"
DIR_FIGURAS.mkdir(parents=True, exist_ok=True)


def _finalizar(fig: plt.Figure, guardar: bool, nombre_archivo: str, mostrar: bool,
               directorio: Optional[Path]) -> plt.Figure:
    plt.tight_layout()
    if guardar:
        destino = Path(directorio) if directorio is not None else DIR_FIGURAS
        destino.mkdir(parents=True, exist_ok=True)
        ruta = destino / nombre_archivo
        fig.savefig(ruta, dpi=300, bbox_inches='tight')
        print(f"✅ Figura guardada: {ruta}")
    if mostrar:
        plt.show()
    else:
        plt.close(fig)
    return fig


# =============================================================================
# MÉTRICAS
# =============================================================================

def cargar_metricas(directorios: Union[str, Path, Iterable[Union[str, Path]]]) -> pd.DataFrame:
    """
    Une los metrics.csv de una o varias ejecuciones.

    Agrega las columnas 'algo' y 'seed' leídas de config.json de cada
    directorio.

    Raises:
        FileNotFoundError: Si falta metrics.csv en algún directorio.
    """
    if isinstance(directorios, (str, Path)):
        directorios = [directorios]
    tablas = []
    for directorio in directorios:
        directorio = Path(directorio)
        df = pd.read_csv(directorio / "metrics.csv")
        ruta_config = directorio / "config.json"
        if ruta_config.exists():
            config = json.loads(ruta_config.read_text(encoding="utf-8"))
            df["algo"] = config.get("algo", directorio.name)
            df["seed"] = config.get("seed", 0)
        else:
            df["algo"] = directorio.name
            df["seed"] = 0
        tablas.append(df)
    return pd.concat(tablas, ignore_index=True)


# =============================================================================
# CURVAS DE APRENDIZAJE
# =============================================================================

def graficar_curvas_aprendizaje(
    metricas: pd.DataFrame,
    retorno_experto: Optional[float] = None,
    titulo: str = "Curvas de aprendizaje",
    guardar: bool = True,
    nombre_archivo: str = "curvas_aprendizaje.png",
    mostrar: bool = False,
    directorio: Optional[Path] = None,
) -> plt.Figure:
    """
    Retorno de evaluación vs pasos: media entre semillas por algoritmo con
    banda de ± una desviación estándar.

    Args:
        metricas (DataFrame): Columnas 'step', 'eval_return_mean' y 'algo'.
        retorno_experto (float): Si se da, línea horizontal discontinua.
        titulo (str): Título del gráfico.
        guardar (bool): Si guardar la figura a archivo.
        nombre_archivo (str): Nombre del archivo.
        mostrar (bool): Si mostrar la figura interactivamente.
        directorio (Path): Destino (por defecto DIR_FIGURAS).

    Returns:
        plt.Figure: Objeto de figura de matplotlib
    """
    faltantes = {"step", "eval_return_mean", "algo"} - set(metricas.columns)
    if faltantes:
        raise ValueError(f"faltan columnas en las métricas: {', '.join(sorted(faltantes))}")

    fig, ax = plt.subplots(figsize=(8, 5))
    sns.lineplot(data=metricas, x="step", y="eval_return_mean", hue="algo",
                 errorbar="sd", ax=ax)
    if retorno_experto is not None:
        ax.axhline(retorno_experto, color="black", linestyle="--", linewidth=1.2,
                   label="Experto")
        ax.legend(loc="best", framealpha=0.9)
    ax.set_xlabel("Pasos de entorno", fontweight="bold")
    ax.set_ylabel("Retorno de evaluación", fontweight="bold")
    ax.set_title(titulo, fontweight="bold")
    ax.grid(True, alpha=0.3, linestyle="--")
    return _finalizar(fig, guardar, nombre_archivo, mostrar, directorio)


# =============================================================================
# DISTORSIONES
# =============================================================================

def graficar_distorsiones(
    medidas: Sequence[MedidaRiesgo],
    n_puntos: int = 501,
    guardar: bool = True,
    nombre_archivo: str = "distorsiones.png",
    mostrar: bool = False,
    directorio: Optional[Path] = None,
) -> plt.Figure:
    """g(τ) en [0, 1] para cada medida de distorsión (las demás se omiten)."""
    tau = np.linspace(0.0, 1.0, n_puntos)
    fig, ax = plt.subplots(figsize=(6, 6))
    ax.plot(tau, tau, color="gray", linestyle=":", linewidth=1, label="neutral")
    for medida in medidas:
        if medida.tipo not in DISTORSIONES:
            continue
        ax.plot(tau, distorsion_g(medida.tipo, medida.beta, tau), linewidth=2, label=str(medida))
    ax.set_xlabel("τ", fontweight="bold")
    ax.set_ylabel("g(τ)", fontweight="bold")
    ax.set_title("Funciones de distorsión", fontweight="bold")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.legend(loc="best", framealpha=0.9)
    ax.grid(True, alpha=0.3, linestyle="--")
    return _finalizar(fig, guardar, nombre_archivo, mostrar, directorio)


# =============================================================================
# HISTOGRAMAS DE TRANSICIONES
# =============================================================================

def marginal_histograma(hist: HistogramaTransiciones, ejes: Tuple[int, int] = (0, 1)) -> np.ndarray:
    """Suma de los pesos sobre todos los ejes salvo `ejes`."""
    otros = tuple(i for i in range(hist.pesos.ndim) if i not in ejes)
    marginal = hist.pesos.sum(axis=otros) if otros else hist.pesos
    return marginal if ejes[0] < ejes[1] else marginal.T


def graficar_histograma_transiciones(
    hist: HistogramaTransiciones,
    ejes: Tuple[int, int] = (0, 1),
    titulo: str = "Distribución de transiciones",
    guardar: bool = True,
    nombre_archivo: str = "histograma_transiciones.png",
    mostrar: bool = False,
    directorio: Optional[Path] = None,
) -> plt.Figure:
    """Mapa de calor de la marginal 2-D en los ejes indicados."""
    marginal = marginal_histograma(hist, ejes)
    centros = hist.malla['centros']
    fig, ax = plt.subplots(figsize=(6, 5))
    sns.heatmap(marginal.T, ax=ax, cmap="viridis", cbar_kws={"label": "masa"},
                xticklabels=np.round(centros[ejes[0]], 2),
                yticklabels=np.round(centros[ejes[1]], 2))
    ax.invert_yaxis()
    ax.set_xlabel(f"eje {ejes[0]}", fontweight="bold")
    ax.set_ylabel(f"eje {ejes[1]}", fontweight="bold")
    ax.set_title(titulo, fontweight="bold")
    return _finalizar(fig, guardar, nombre_archivo, mostrar, directorio)


if __name__ == "__main__":
    from src.riesgo import PRESETS_RIESGO

    graficar_distorsiones(PRESETS_RIESGO["risk-averse"] + PRESETS_RIESGO["risk-seeking"])
    print(f"\n📁 Figuras guardadas en: {DIR_FIGURAS}")
