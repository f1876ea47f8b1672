#!/usr/bin/env python3
"""
Script Principal: Imitación por observaciones con SAC distribucional
=====================================================================

Punto de entrada de línea de comandos. Subcomandos:

    train-expert   SAC con la recompensa verdadera del entorno
    collect        pares (s, s') del experto con ruido de acción
    train          MODULE, SAC-GAILfO o SAC sobre las observaciones
    eval           retornos de un punto de control
    distance       distancia LfO y error de transiciones de una ejecución

Uso:
    python3 main.py train-expert --env pointmass2d --steps 50000 --out runs/experto
    python3 main.py collect --checkpoint runs/experto/checkpoints/step_50000.mdlp \\
        --env pointmass2d --pairs 5000 --noise-std 0.01 --out expert.modl
    python3 main.py train --algo module --env pointmass2d --expert-data expert.modl \\
        --seed 0 --out runs/m0
    python3 main.py eval --checkpoint runs/m0/checkpoints/step_150000.mdlp --env pointmass2d
    python3 main.py distance --run-dir runs/m0 --expert-data expert.modl

Códigos de salida: 0 éxito, 1 error de uso, 2 fallo en tiempo de ejecución.
"""

import sys
import argparse
import json
import traceback
from pathlib import Path
from typing import List, Optional

PROJECT_DIR = Path(__file__).parent.resolve()

# Agregar la raíz del proyecto al path
sys.path.insert(0, str(PROJECT_DIR))

from src.datos import cargar_observaciones, exportar_observaciones_csv, guardar_observaciones  # noqa: E402
from src.entornos import crear_entorno  # noqa: E402
from src.parametros import ALGORITMOS, MODOS_FRACCIONES, ConfiguracionEntrenamiento, cargar_configuracion  # noqa: E402
from src.riesgo import NOMBRES_PRESET, TIPOS_RIESGO, medida_desde_preset  # noqa: E402

# ============================================================================
# COLORES PARA TERMINAL
# ============================================================================

class Colors:
    """Códigos ANSI para colores en terminal."""
    HEADER = '\033[95m'
    OKBLUE = '\033[94m'
    OKCYAN = '\033[96m'
    OKGREEN = '\033[92m'
    WARNING = '\033[93m'
    FAIL = '\033[91m'
    ENDC = '\033[0m'
    BOLD = '\033[1m'

def print_color(text: str, color: str = Colors.ENDC, bold: bool = False, file=None):
    """Imprime texto con color."""
    prefix = Colors.BOLD if bold else ""
    print(f"{prefix}{color}{text}{Colors.ENDC}", file=file or sys.stdout)

def print_header(text: str):
    """Imprime header decorado."""
    print("\n" + "=" * 70)
    print_color(text.center(70), Colors.HEADER, bold=True)
    print("=" * 70 + "\n")

def print_section(text: str):
    print()
    print_color(f"{'─' * 70}", Colors.OKBLUE)
    print_color(f"  {text}", Colors.OKBLUE, bold=True)
    print_color(f"{'─' * 70}", Colors.OKBLUE)

def print_success(text: str):
    print_color(f"  ✅ {text}", Colors.OKGREEN)

def print_error(text: str):
    print_color(f"  ❌ {text}", Colors.FAIL, file=sys.stderr)

def print_warning(text: str):
    print_color(f"  ⚠️  {text}", Colors.WARNING)

def print_info(text: str):
    print_color(f"  ℹ️  {text}", Colors.OKCYAN)

# ============================================================================
# PARSEO DE ARGUMENTOS CLI
# ============================================================================

class ErrorUso(Exception):
    """Argumentos inválidos: salida con código 1."""


class ParserCLI(argparse.ArgumentParser):
    """ArgumentParser que lanza ErrorUso en lugar de terminar el proceso."""

    def error(self, message):
        raise ErrorUso(f"{message}\n{self.format_usage()}")


# flag → clave de configuración
CLAVES_FLAGS = {
    "seed": "seed",
    "env": "env_id",
    "algo": "algo",
    "expert_data": "expert_data",
    "out": "out_dir",
    "steps": "total_steps",
    "risk_measure": "risk_measure",
    "beta": "beta",
    "fractions": "fraction_mode",
    "num_quantiles": "num_quantiles",
    "eval_episodes": "eval_episodes",
    "pairs": "num_pairs",
    "noise_std": "noise_std",
}


# flags sin clave en el archivo de configuración
FLAGS_SOLO_CLI = ("--checkpoint", "--csv", "--run-dir", "--bins", "--episodes", "--silencioso")

EPILOGO = f"""\
Flags solo de línea de comandos (no se leen ni se guardan en config.json):
  {', '.join(FLAGS_SOLO_CLI)}
El resto de flags reemplaza la clave correspondiente del archivo --config.
"""


def _comunes(sub: argparse.ArgumentParser, con_out: bool = True) -> None:
    sub.add_argument('--config', type=str, metavar='FILE', help='Archivo JSON de configuración')
    sub.add_argument('--seed', type=int, help='Semilla (default: 0)')
    sub.add_argument('--env', type=str, choices=['pointmass2d', 'pendulum'], help='Entorno')
    if con_out:
        sub.add_argument('--out', type=str, metavar='DIR', help='Directorio/archivo de salida')
    sub.add_argument('--silencioso', action='store_true', help='Modo silencioso (menos output)')


def construir_parser() -> ParserCLI:
    parser = ParserCLI(
        prog='main.py',
        description='Imitación por observaciones con recompensa adversarial y SAC distribucional',
        epilog=EPILOGO,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    formato = dict(epilog=EPILOGO, formatter_class=argparse.RawDescriptionHelpFormatter)
    subparsers = parser.add_subparsers(dest='comando', parser_class=ParserCLI, metavar='COMANDO')
    subparsers.required = True

    experto = subparsers.add_parser('train-expert', help='Entrena el experto SAC', **formato)
    _comunes(experto)
    experto.add_argument('--steps', type=int, help='Pasos de entorno')
    experto.add_argument('--eval-episodes', type=int, help='Episodios por evaluación')

    recoleccion = subparsers.add_parser('collect', help='Recolecta observaciones del experto', **formato)
    _comunes(recoleccion)
    recoleccion.add_argument('--checkpoint', type=str, required=True, help='Punto de control del experto')
    recoleccion.add_argument('--pairs', type=int, help='Pares (s, s\') a recolectar (default: 5000)')
    recoleccion.add_argument('--noise-std', type=float, help='Desviación del ruido (default: 0.01)')
    recoleccion.add_argument('--csv', type=str, metavar='FILE', help='Exportar también a CSV')

    entrenamiento = subparsers.add_parser('train', help='Entrena MODULE, SAC-GAILfO o SAC', **formato)
    _comunes(entrenamiento)
    entrenamiento.add_argument('--algo', type=str, choices=list(ALGORITMOS))
    entrenamiento.add_argument('--expert-data', type=str, metavar='FILE')
    entrenamiento.add_argument('--steps', type=int)
    entrenamiento.add_argument('--risk-measure', type=str, metavar='MEDIDA',
                               choices=list(TIPOS_RIESGO) + list(NOMBRES_PRESET),
                               help=f"{', '.join(TIPOS_RIESGO)} o '<preset>/<tipo>' "
                                    "(p. ej. risk-averse/wang), que fija también beta")
    entrenamiento.add_argument('--beta', type=float, help='Parámetro β (tiene prioridad sobre el preset)')
    entrenamiento.add_argument('--fractions', type=str, choices=list(MODOS_FRACCIONES))
    entrenamiento.add_argument('--num-quantiles', type=int)
    entrenamiento.add_argument('--eval-episodes', type=int)

    evaluacion = subparsers.add_parser('eval', help='Evalúa un punto de control', **formato)
    _comunes(evaluacion, con_out=False)
    evaluacion.add_argument('--checkpoint', type=str, required=True)
    evaluacion.add_argument('--eval-episodes', type=int)

    distancia = subparsers.add_parser('distance', help='Diagnósticos de una ejecución', **formato)
    distancia.add_argument('--run-dir', type=str, required=True)
    distancia.add_argument('--expert-data', type=str, required=True)
    distancia.add_argument('--episodes', type=int, default=5, help='Episodios por punto de control')
    distancia.add_argument('--bins', type=int, default=16, help='Celdas por eje')
    distancia.add_argument('--silencioso', action='store_true')

    return parser


def configuracion_efectiva(args: argparse.Namespace) -> ConfiguracionEntrenamiento:
    """Archivo de configuración (o valores por defecto) con los flags encima."""
    config = (cargar_configuracion(args.config) if getattr(args, 'config', None)
              else ConfiguracionEntrenamiento())
    cambios = {clave: getattr(args, flag) for flag, clave in CLAVES_FLAGS.items()
               if hasattr(args, flag)}
    if cambios.get("risk_measure") in NOMBRES_PRESET:
        medida = medida_desde_preset(cambios["risk_measure"])
        cambios["risk_measure"] = medida.tipo
        if cambios.get("beta") is None:
            cambios["beta"] = medida.beta
    return config.con_cambios(**cambios)

# ============================================================================
# COMANDOS
# ============================================================================

def comando_train_expert(args, config: ConfiguracionEntrenamiento, verbose: bool) -> None:
    from src.entrenamiento import entrenar_experto_sac

    artefactos = entrenar_experto_sac(config, verbose=verbose)
    media, desv = artefactos.evaluacion_final
    print_success(f"Experto: retorno {media:.3f} ± {desv:.3f}")
    print_info(f"Punto de control: {artefactos.puntos_control[-1]}")


def comando_collect(args, config: ConfiguracionEntrenamiento, verbose: bool) -> None:
    from src.entrenamiento import recolectar_observaciones

    entorno = crear_entorno(config.env_id)
    if verbose:
        print_section(f"RECOLECCIÓN - {config.env_id}")
        print_info(f"{config.num_pairs} pares, ruido {config.noise_std}, semilla {config.seed}")
    conjunto = recolectar_observaciones(args.checkpoint, entorno, config.num_pairs,
                                        config.noise_std, config.seed, verbose)
    destino = args.out or 'expert.modl'
    guardar_observaciones(conjunto, destino)
    if args.csv:
        exportar_observaciones_csv(conjunto, args.csv)
    print_success(f"{len(conjunto)} pares guardados en {destino}")
    print_info(f"Retorno medio del experto: {conjunto.retorno_medio:.3f}")


def comando_train(args, config: ConfiguracionEntrenamiento, verbose: bool) -> None:
    from src.entrenamiento import entrenar

    conjunto = None
    if config.algo == 'sac' and config.expert_data:
        print_warning("SAC usa la recompensa del entorno: se ignora --expert-data")
    if config.algo != 'sac':
        conjunto = cargar_observaciones(config.expert_data,
                                        crear_entorno(config.env_id).espec.dim_estado)
    artefactos = entrenar(config, conjunto, verbose=verbose)
    media, desv = artefactos.evaluacion_final
    print_success(f"{config.algo}: retorno final {media:.3f} ± {desv:.3f}")
    print_info(f"Métricas: {artefactos.ruta_metricas}")


def comando_eval(args, config: ConfiguracionEntrenamiento, verbose: bool) -> None:
    from src.entrenamiento import evaluar

    media, desv = evaluar(args.checkpoint, crear_entorno(config.env_id), config.eval_episodes,
                          config.seed)
    print(json.dumps({"eval_return_mean": media, "eval_return_std": desv,
                      "episodes": config.eval_episodes}))


def comando_distance(args, verbose: bool) -> None:
    from src.diagnosticos import distancias_ejecucion

    if verbose:
        print_section(f"DIAGNÓSTICOS - {args.run_dir}")
    config_ejecucion = json.loads((Path(args.run_dir) / 'config.json').read_text(encoding='utf-8'))
    conjunto = cargar_observaciones(
        args.expert_data, crear_entorno(config_ejecucion['env_id']).espec.dim_estado)
    tabla = distancias_ejecucion(args.run_dir, conjunto, args.episodes, args.bins, verbose)
    print_success(f"{len(tabla)} puntos de control → {Path(args.run_dir) / 'distance.csv'}")

# ============================================================================
# FUNCIÓN PRINCIPAL
# ============================================================================

def main(argv: Optional[List[str]] = None) -> int:
    """
    Parsea los argumentos y despacha el subcomando.

    Returns:
        int: 0 éxito, 1 error de uso, 2 fallo en tiempo de ejecución.
    """
    parser = construir_parser()
    try:
        args = parser.parse_args(argv)
        config = configuracion_efectiva(args) if args.comando != 'distance' else None
        if args.comando == 'train' and config.algo != 'sac' and not config.expert_data:
            raise ErrorUso("train requiere --expert-data para los algoritmos de imitación")
    except ErrorUso as error:
        print_error(str(error))
        return 1
    except (ValueError, FileNotFoundError) as error:
        print_error(f"Configuración inválida: {error}")
        return 1

    verbose = not args.silencioso
    try:
        if verbose:
            print_header(f"COMANDO: {args.comando.upper()}")
        if args.comando == 'distance':
            comando_distance(args, verbose)
            return 0
        if args.comando == 'train-expert':
            config = config.con_cambios(algo='sac')
        {
            'train-expert': comando_train_expert,
            'collect': comando_collect,
            'train': comando_train,
            'eval': comando_eval,
        }[args.comando](args, config, verbose)
        return 0

    except KeyboardInterrupt:
        print_error("Operación cancelada por el usuario")
        return 130

    except Exception as e:
        print_error(f"Error en tiempo de ejecución: {e}")
        print(traceback.format_exc(), file=sys.stderr)
        return 2

# ============================================================================
# PUNTO DE ENTRADA
# ============================================================================

if __name__ == "__main__":
    sys.exit(main())
