#!/usr/bin/env python3
"""
Script: Pipeline de escritorio completo
=======================================

Experto SAC → recolección de observaciones → MODULE y SAC-GAILfO sobre varias
semillas, en PointMass2D con el preset de escritorio.

Reporta:
    - puntuación normalizada (R − R_rand)/(R_E − R_rand) por semilla
    - estabilidad: desviación de los retornos en el último 20% de puntos de
      evaluación, MODULE vs SAC-GAILfO por semilla
    - curvas de aprendizaje en resultados/figuras/

Uso:
    python3 scripts/experimentos/pipeline_escritorio.py --seeds 5
"""

import sys
import argparse
import json
from pathlib import Path

import numpy as np
import pandas as pd

PROJECT_DIR = Path(__file__).resolve().parent.parent.parent
sys.path.insert(0, str(PROJECT_DIR))

from src.datos import guardar_observaciones  # noqa: E402
from src.entornos import crear_entorno  # noqa: E402
from src.entrenamiento import (  # noqa: E402
    entrenar_experto_sac,
    entrenar_module,
    entrenar_sac_gailfo,
    evaluar_politica_aleatoria,
    puntuacion_normalizada,
    recolectar_observaciones,
)
from src.parametros import PRESET_ESCRITORIO, ConfiguracionEntrenamiento  # noqa: E402
from src.visualizacion import cargar_metricas, graficar_curvas_aprendizaje  # noqa: E402


def desviacion_final(metricas: pd.DataFrame, fraccion: float = 0.2) -> float:
    """Desviación de eval_return_mean en la última fracción de puntos."""
    n = max(1, int(np.ceil(fraccion * len(metricas))))
    return float(np.std(metricas["eval_return_mean"].to_numpy()[-n:]))


def main():
    parser = argparse.ArgumentParser(description="Pipeline de escritorio")
    parser.add_argument("--env", default="pointmass2d")
    parser.add_argument("--seeds", type=int, default=5)
    parser.add_argument("--expert-steps", type=int, default=50_000)
    parser.add_argument("--steps", type=int, default=150_000)
    parser.add_argument("--pairs", type=int, default=5_000)
    parser.add_argument("--out", default="runs/escritorio")
    args = parser.parse_args()

    salida = Path(args.out)
    base = ConfiguracionEntrenamiento(env_id=args.env, **PRESET_ESCRITORIO).validar()

    print("=" * 70)
    print("PIPELINE DE ESCRITORIO")
    print("=" * 70)

    print("\n1. Entrenando experto SAC...")
    experto = entrenar_experto_sac(base.con_cambios(total_steps=args.expert_steps,
                                                   out_dir=str(salida / "experto")))
    print(f"   ✅ Retorno del experto: {experto.evaluacion_final[0]:.3f}")

    print("\n2. Recolectando observaciones...")
    entorno = crear_entorno(args.env)
    conjunto = recolectar_observaciones(experto.puntos_control[-1], entorno, args.pairs, 0.01, 0)
    guardar_observaciones(conjunto, salida / "expert.modl")
    print(f"   ✅ {conjunto}")

    r_rand, _ = evaluar_politica_aleatoria(entorno, base.eval_episodes, 0)
    r_experto = conjunto.retorno_medio
    print(f"   R_rand = {r_rand:.3f}   R_E = {r_experto:.3f}")

    print("\n3. Entrenando MODULE y SAC-GAILfO...")
    filas, directorios = [], []
    for semilla in range(args.seeds):
        resultado = {"seed": semilla}
        for algo, funcion in (("module", entrenar_module), ("sac-gailfo", entrenar_sac_gailfo)):
            directorio = salida / f"{algo}_s{semilla}"
            artefactos = funcion(base.con_cambios(seed=semilla, total_steps=args.steps,
                                                  out_dir=str(directorio)), conjunto)
            directorios.append(directorio)
            retorno = artefactos.evaluacion_final[0]
            resultado[f"{algo}_return"] = retorno
            resultado[f"{algo}_score"] = puntuacion_normalizada(retorno, r_rand, r_experto)
            resultado[f"{algo}_final_std"] = desviacion_final(artefactos.metricas)
        resultado["module_more_stable"] = resultado["module_final_std"] <= resultado["sac-gailfo_final_std"]
        filas.append(resultado)
        print(f"   semilla {semilla}: MODULE {resultado['module_score']:.3f} | "
              f"SAC-GAILfO {resultado['sac-gailfo_score']:.3f}")

    tabla = pd.DataFrame(filas)
    tabla.to_csv(salida / "resumen.csv", index=False)
    resumen = {
        "random_return": r_rand,
        "expert_return": r_experto,
        "module_seeds_above_0.85": int(np.sum(tabla["module_score"] >= 0.85)),
        "module_more_stable_seeds": int(np.sum(tabla["module_more_stable"])),
        "seeds": args.seeds,
    }
    (salida / "resumen.json").write_text(json.dumps(resumen, indent=2), encoding="utf-8")

    print("\n4. Graficando curvas de aprendizaje...")
    graficar_curvas_aprendizaje(cargar_metricas(directorios), retorno_experto=r_experto,
                                titulo=f"Imitación en {args.env}",
                                nombre_archivo=f"curvas_{args.env}.png")

    print()
    print("=" * 70)
    print(f"✅ MODULE ≥ 0.85 en {resumen['module_seeds_above_0.85']}/{args.seeds} semillas")
    print(f"✅ MODULE más estable en {resumen['module_more_stable_seeds']}/{args.seeds} semillas")
    print("=" * 70)


if __name__ == "__main__":
    main()
