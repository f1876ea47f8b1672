#!/usr/bin/env python3
"""
Script: Barrido de medidas de riesgo
====================================

Entrena MODULE con cada medida de los presets averso y propenso al riesgo y
reporta el retorno evaluado de cada una.

Uso:
    python3 scripts/experimentos/barrido_riesgo.py --expert-data runs/escritorio/expert.modl
"""

import sys
import argparse
from pathlib import Path

import pandas as pd

PROJECT_DIR = Path(__file__).resolve().parent.parent.parent
sys.path.insert(0, str(PROJECT_DIR))

from src.datos import cargar_observaciones  # noqa: E402
from src.entrenamiento import entrenar_module  # noqa: E402
from src.parametros import PRESET_ESCRITORIO, ConfiguracionEntrenamiento  # noqa: E402
from src.riesgo import PRESETS_RIESGO  # noqa: E402


def main():
    parser = argparse.ArgumentParser(description="Barrido de medidas de riesgo")
    parser.add_argument("--expert-data", required=True)
    parser.add_argument("--preset", choices=sorted(PRESETS_RIESGO), nargs="+",
                        default=sorted(PRESETS_RIESGO))
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--steps", type=int, default=150_000)
    parser.add_argument("--out", default="runs/barrido_riesgo")
    args = parser.parse_args()

    conjunto = cargar_observaciones(args.expert_data)
    base = ConfiguracionEntrenamiento(env_id=conjunto.id_entorno, seed=args.seed,
                                      total_steps=args.steps, **PRESET_ESCRITORIO).validar()

    print("=" * 70)
    print("BARRIDO DE MEDIDAS DE RIESGO")
    print("=" * 70)

    filas = []
    for preset in args.preset:
        for medida in PRESETS_RIESGO[preset]:
            directorio = Path(args.out) / f"{preset}_{medida.tipo}_{medida.beta:g}"
            config = base.con_cambios(risk_measure=medida.tipo, beta=medida.beta,
                                      out_dir=str(directorio))
            media, desv = entrenar_module(config, conjunto).evaluacion_final
            filas.append({"preset": preset, "measure": str(medida),
                          "eval_return_mean": media, "eval_return_std": desv})
            print(f"   {preset:>12s} {str(medida):>22s}: {media:9.3f} ± {desv:.3f}")

    pd.DataFrame(filas).to_csv(Path(args.out) / "resumen.csv", index=False)


if __name__ == "__main__":
    main()
