#!/usr/bin/env python3
"""
Script: Funciones de distorsión
===============================

Grafica g(τ) de las medidas de distorsión de los presets de riesgo.

Uso:
    python3 scripts/experimentos/distorsiones.py
"""

import sys
from pathlib import Path

PROJECT_DIR = Path(__file__).resolve().parent.parent.parent
sys.path.insert(0, str(PROJECT_DIR))

from src.riesgo import PRESETS_RIESGO  # noqa: E402
from src.visualizacion import DIR_FIGURAS, graficar_distorsiones  # noqa: E402


if __name__ == "__main__":
    print("=" * 70)
    print("FUNCIONES DE DISTORSIÓN")
    print("=" * 70)
    for nombre, medidas in PRESETS_RIESGO.items():
        graficar_distorsiones(medidas, nombre_archivo=f"distorsiones_{nombre}.png")
    print(f"\n📁 Figuras guardadas en: {DIR_FIGURAS}")
