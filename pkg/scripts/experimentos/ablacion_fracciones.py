#!/usr/bin/env python3
"""
Script: Ablación de fracciones de cuantil
=========================================

MODULE con QR-DQN, IQN y FQF sobre las mismas observaciones del experto.

Uso:
    python3 scripts/experimentos/ablacion_fracciones.py --expert-data runs/escritorio/expert.modl
"""

import sys
import argparse
from pathlib import Path

import pandas as pd

PROJECT_DIR = Path(__file__).resolve().parent.parent.parent
sys.path.insert(0, str(PROJECT_DIR))

from src.datos import cargar_observaciones  # noqa: E402
from src.entrenamiento import entrenar_module  # noqa: E402
from src.parametros import MODOS_FRACCIONES, PRESET_ESCRITORIO, ConfiguracionEntrenamiento  # noqa: E402
from src.visualizacion import cargar_metricas, graficar_curvas_aprendizaje  # noqa: E402


def main():
    parser = argparse.ArgumentParser(description="Ablación de fracciones")
    parser.add_argument("--expert-data", required=True)
    parser.add_argument("--seeds", type=int, default=3)
    parser.add_argument("--steps", type=int, default=150_000)
    parser.add_argument("--out", default="runs/ablacion_fracciones")
    args = parser.parse_args()

    conjunto = cargar_observaciones(args.expert_data)
    base = ConfiguracionEntrenamiento(env_id=conjunto.id_entorno, total_steps=args.steps,
                                      **PRESET_ESCRITORIO).validar()

    print("=" * 70)
    print("ABLACIÓN: QR-DQN vs IQN vs FQF")
    print("=" * 70)

    filas, tablas = [], []
    for modo in MODOS_FRACCIONES:
        directorios = []
        for semilla in range(args.seeds):
            directorio = Path(args.out) / f"{modo}_s{semilla}"
            artefactos = entrenar_module(base.con_cambios(fraction_mode=modo, seed=semilla,
                                                          out_dir=str(directorio)), conjunto)
            directorios.append(directorio)
            filas.append({"fraction_mode": modo, "seed": semilla,
                          "eval_return_mean": artefactos.evaluacion_final[0]})
        metricas = cargar_metricas(directorios)
        metricas["algo"] = modo
        tablas.append(metricas)

    tabla = pd.DataFrame(filas)
    tabla.to_csv(Path(args.out) / "resumen.csv", index=False)
    print(tabla.groupby("fraction_mode")["eval_return_mean"].agg(["mean", "std"]))
    graficar_curvas_aprendizaje(pd.concat(tablas, ignore_index=True),
                                retorno_experto=conjunto.retorno_medio,
                                titulo="Fracciones de cuantil",
                                nombre_archivo="ablacion_fracciones.png")


if __name__ == "__main__":
    main()
