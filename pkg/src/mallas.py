"""
Módulo de generación de mallas para histogramas de transiciones.

Los histogramas de la distribución de transiciones μ(s, s') se construyen sobre
una malla uniforme en las coordenadas proyectadas del estado: para un entorno
con k coordenadas proyectadas la malla tiene 2k ejes (k para s y k para s').
Con PuntoMasa2D y 16 celdas por eje resulta un histograma 4-D de 16⁴ celdas.

Referencias:
- Estimadores: contexto/03_ecuaciones_gobernantes.md, sección "Diagnósticos"
"""

from __future__ import annotations

from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from src.entornos import EspecificacionEntorno


def generar_malla_histograma(limites: Sequence[Tuple[float, float]], n_celdas: int = 16,
                             coordenadas: Optional[Sequence[int]] = None) -> Dict:
    """
    Genera una malla uniforme de celdas sobre una caja.

    Args:
        limites: (min, max) por eje.
        n_celdas (int): Celdas por eje.
        coordenadas: Coordenadas del estado que representan los ejes
            (metadato; por defecto 0..D-1).

    Returns:
        dict: Diccionario con la malla
            - 'limites' (ndarray): (D, 2)
            - 'n_celdas' (int): Celdas por eje
            - 'bordes' (list): D arrays de n_celdas+1 bordes
            - 'centros' (list): D arrays de n_celdas centros
            - 'forma' (tuple): (n_celdas,)*D
            - 'coordenadas' (tuple): Coordenadas proyectadas

    Raises:
        ValueError: Límites vacíos o invertidos, o n_celdas < 1.
    """
    lim = np.asarray(limites, dtype=np.float64)
    if lim.ndim != 2 or lim.shape[1] != 2 or lim.shape[0] == 0:
        raise ValueError("limites debe ser una secuencia de pares (min, max)")
    if np.any(lim[:, 0] >= lim[:, 1]):
        raise ValueError("cada eje necesita min < max")
    if n_celdas < 1:
        raise ValueError(f"n_celdas debe ser ≥ 1, se recibió {n_celdas}")

    D = lim.shape[0]
    bordes = [np.linspace(lo, hi, n_celdas + 1) for lo, hi in lim]
    centros = [0.5 * (b[:-1] + b[1:]) for b in bordes]
    coords = tuple(range(D)) if coordenadas is None else tuple(int(c) for c in coordenadas)

    assert all(len(c) == n_celdas for c in centros), "centros inconsistentes"

    return {
        'limites': lim,
        'n_celdas': int(n_celdas),
        'bordes': bordes,
        'centros': centros,
        'forma': (int(n_celdas),) * D,
        'coordenadas': coords,
    }


def generar_malla_transiciones(espec: EspecificacionEntorno, n_celdas: int = 16) -> Dict:
    """
    Malla sobre (proyección de s, proyección de s') para el entorno.

    Las coordenadas registradas repiten las de la proyección: las primeras k
    corresponden a s y las últimas k a s'.
    """
    limites = list(espec.limites_proyeccion) * 2
    coords = tuple(espec.coordenadas_proyeccion) * 2
    return generar_malla_histograma(limites, n_celdas, coords)


def proyectar_pares(malla: Dict, estados, estados_sig) -> np.ndarray:
    """Puntos (n, 2k) con las coordenadas proyectadas de s y s'."""
    coords = malla['coordenadas']
    k = len(coords) // 2
    s = np.atleast_2d(np.asarray(estados, dtype=np.float64))
    s_sig = np.atleast_2d(np.asarray(estados_sig, dtype=np.float64))
    return np.concatenate([s[:, list(coords[:k])], s_sig[:, list(coords[k:])]], axis=1)


def indices_celda(malla: Dict, puntos) -> Tuple[np.ndarray, int]:
    """
    Índice plano (orden C) de la celda de cada punto.

    Los puntos fuera de la malla se asignan a la celda de borde más cercana.

    Returns:
        (índices (n,), número de puntos fuera de la malla)
    """
    p = np.atleast_2d(np.asarray(puntos, dtype=np.float64))
    lim = malla['limites']
    if p.shape[1] != lim.shape[0]:
        raise ValueError(f"los puntos tienen {p.shape[1]} ejes, la malla {lim.shape[0]}")
    n = malla['n_celdas']
    fuera = np.any((p < lim[:, 0]) | (p > lim[:, 1]), axis=1)
    ancho = (lim[:, 1] - lim[:, 0]) / n
    idx = np.floor((p - lim[:, 0]) / ancho).astype(np.int64)
    idx = np.clip(idx, 0, n - 1)
    planos = np.ravel_multi_index(tuple(idx.T), malla['forma'])
    return planos, int(np.sum(fuera))


def centros_celdas(malla: Dict) -> np.ndarray:
    """Centros de todas las celdas, (n_celdas^D, D), en el orden plano C."""
    rejilla = np.meshgrid(*malla['centros'], indexing='ij')
    return np.stack([r.ravel() for r in rejilla], axis=1)


def estados_en_centros(malla: Dict, dim_estado: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Estados completos (s, s') en los centros de celda.

    Las coordenadas no proyectadas valen 0.
    """
    centros = centros_celdas(malla)
    coords = malla['coordenadas']
    k = len(coords) // 2
    s = np.zeros((centros.shape[0], dim_estado))
    s_sig = np.zeros((centros.shape[0], dim_estado))
    s[:, list(coords[:k])] = centros[:, :k]
    s_sig[:, list(coords[k:])] = centros[:, k:]
    return s, s_sig


def mallas_compatibles(a: Dict, b: Dict) -> bool:
    return (a['forma'] == b['forma']
            and a['coordenadas'] == b['coordenadas']
            and np.array_equal(a['limites'], b['limites']))


if __name__ == "__main__":
    from src.entornos import crear_entorno

    entorno = crear_entorno("pointmass2d")
    malla = generar_malla_transiciones(entorno.espec)
    print(f"Ejes: {len(malla['forma'])}, celdas totales: {int(np.prod(malla['forma']))}")
    print(f"Bordes eje 0: {malla['bordes'][0][:4]} ...")
