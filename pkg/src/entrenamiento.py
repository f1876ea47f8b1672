"""
Orquestación de los entrenamientos.

    - entrenar_experto_sac: SAC estándar con la recompensa verdadera.
    - recolectar_observaciones: pares (s, s') del experto con ruido de acción.
    - entrenar_module: recompensa adversarial + SAC distribucional.
    - entrenar_sac_gailfo: misma recompensa con críticos Q escalares.
    - evaluar: retornos con acciones deterministas desde un punto de control.

Cada iteración de MODULE sigue este orden:
    1. recolección en el entorno hacia D^I (sin recompensa del entorno)
    2. actualizaciones de r_φ
    3. por cada actualización de política: crítico, Q suave con riesgo,
       política, temperatura y Polyak de w̄₁, w̄₂, θ̄

Los objetivos del crítico se etiquetan con r_φ en el momento de la
actualización, nunca se guardan en el buffer.

Cada rol aleatorio (inicialización, entorno, exploración, lotes, objetivos,
actualización, evaluación) tiene su propio flujo derivado de la semilla con
SeedSequence, así que dos ejecuciones con la misma configuración producen el
mismo archivo de métricas.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from src.actor import actualizar_politica, actualizar_temperatura, crear_temperatura
from src.critico import (
    RedCuantiles,
    actualizar_criticos,
    actualizar_polyak,
    actualizar_polyak_criticos,
    actualizar_propuesta_fqf,
    calcular_cuantiles_objetivo,
    crear_criticos,
    crear_modo_fracciones,
    embedding_estado_accion,
    generar_fracciones,
)
from src.critico_escalar import (
    actualizar_criticos_q,
    actualizar_polyak_q,
    crear_criticos_q,
    gradiente_politica_q,
    objetivos_q,
)
from src.datos import (
    BufferRepeticion,
    ConjuntoObservacionesExperto,
    Transicion,
    muestrear_lote,
    muestrear_pares,
)
from src.entornos import Entorno, EspecificacionEntorno, crear_entorno
from src.optimizador import aplicar_paso, crear_estado_adam
from src.parametros import ConfiguracionEntrenamiento, guardar_configuracion
from src.politica import (
    ParametrosPolitica,
    RedPolitica,
    accion_determinista,
    crear_politica,
    muestrear_accion,
    politica_desde_parametros,
)
from src.puntos_control import cargar_punto_control, guardar_punto_control
from src.recompensa import actualizar_recompensa, crear_parametros_recompensa, etiquetar_transiciones
from src.redes import VectorParametros


COLUMNAS_METRICAS = [
    "step",
    "eval_return_mean",
    "eval_return_std",
    "reward_loss",
    "critic1_loss",
    "critic2_loss",
    "policy_loss",
    "alpha",
    "entropy_estimate",
    "buffer_size",
]

ROLES_ALEATORIOS = (
    "recompensa",
    "lotes_recompensa",
    "agente",
    "entorno",
    "exploracion",
    "lotes",
    "objetivos",
    "actualizacion",
    "evaluacion",
)


def flujos_aleatorios(semilla: int) -> Dict[str, np.random.Generator]:
    """Un generador independiente por rol, derivado de la semilla."""
    hijos = np.random.SeedSequence(int(semilla)).spawn(len(ROLES_ALEATORIOS))
    return {rol: np.random.default_rng(h) for rol, h in zip(ROLES_ALEATORIOS, hijos)}


def puntos_evaluacion(total_steps: int, eval_interval: int) -> List[int]:
    """Múltiplos de eval_interval hasta total_steps, más total_steps si falta."""
    puntos = list(range(eval_interval, total_steps + 1, eval_interval))
    if total_steps > 0 and (not puntos or puntos[-1] != total_steps):
        puntos.append(total_steps)
    return puntos


def _puntos_guardado(config: ConfiguracionEntrenamiento) -> List[int]:
    if config.checkpoint_interval <= 0:
        return puntos_evaluacion(config.total_steps, config.eval_interval)
    return puntos_evaluacion(config.total_steps, config.checkpoint_interval)


@dataclass
class ArtefactosEjecucion:
    """
    Resultado de una ejecución.

    Attributes:
        directorio (Path): Directorio de salida.
        ruta_metricas (Path): metrics.csv (una fila por punto de evaluación).
        puntos_control (list): Rutas step_<k>.mdlp en orden.
        evaluacion_final (tuple): (media, desviación) de retornos.
        retorno_experto (float | None): Retorno registrado del experto.
        metricas (DataFrame): Contenido de metrics.csv.
        historial (dict): Contadores de versiones de la recompensa por
            iteración con actualizaciones.
    """

    directorio: Path
    ruta_metricas: Path
    puntos_control: List[Path]
    evaluacion_final: Tuple[float, float]
    retorno_experto: Optional[float] = None
    metricas: Optional[pd.DataFrame] = None
    historial: Dict[str, List[int]] = field(default_factory=dict)


# ============================================================================
# EVALUACIÓN
# ============================================================================

def evaluar_politica(theta: ParametrosPolitica, entorno: Entorno, episodios: int,
                     semilla: int) -> Tuple[float, float]:
    """
    Retorno verdadero con acciones deterministas; el episodio k se reinicia
    con la semilla `semilla + k`.

    Returns:
        (media, desviación estándar poblacional)
    """
    if episodios < 1:
        raise ValueError(f"episodios debe ser ≥ 1, se recibió {episodios}")
    retornos = []
    for k in range(episodios):
        s = entorno.reiniciar(semilla + k)
        total, terminado = 0.0, False
        while not terminado:
            resultado = entorno.paso(accion_determinista(theta, s))
            total += resultado.recompensa
            s, terminado = resultado.estado_siguiente, resultado.terminado
        retornos.append(total)
    return float(np.mean(retornos)), float(np.std(retornos))


def evaluar_politica_aleatoria(entorno: Entorno, episodios: int,
                               semilla: int) -> Tuple[float, float]:
    """Retorno de acciones uniformes en las cotas; da el piso R_rand."""
    if episodios < 1:
        raise ValueError(f"episodios debe ser ≥ 1, se recibió {episodios}")
    rng = np.random.default_rng(semilla)
    retornos = []
    for k in range(episodios):
        entorno.reiniciar(semilla + k)
        total, terminado = 0.0, False
        while not terminado:
            resultado = entorno.paso(entorno.accion_aleatoria(rng))
            total += resultado.recompensa
            terminado = resultado.terminado
        retornos.append(total)
    return float(np.mean(retornos)), float(np.std(retornos))


def puntuacion_normalizada(retorno: float, retorno_aleatorio: float,
                           retorno_experto: float) -> float:
    """(R − R_rand) / (R_E − R_rand)."""
    if retorno_experto == retorno_aleatorio:
        raise ValueError("el retorno del experto coincide con el aleatorio: escala nula")
    return (retorno - retorno_aleatorio) / (retorno_experto - retorno_aleatorio)


def cargar_politica(ruta, espec: EspecificacionEntorno) -> ParametrosPolitica:
    """Actor de un punto de control MDLP."""
    segmentos = cargar_punto_control(ruta)
    params = VectorParametros.desde_segmentos(segmentos, "actor")
    theta = politica_desde_parametros(params, espec.accion_min, espec.accion_max)
    if theta.red.dim_estado != espec.dim_estado or theta.red.dim_accion != espec.dim_accion:
        raise ValueError(
            f"el punto de control ({theta.red.dim_estado}, {theta.red.dim_accion}) no coincide "
            f"con el entorno '{espec.id_entorno}' ({espec.dim_estado}, {espec.dim_accion})")
    return theta


def evaluar(ruta_punto_control, entorno: Entorno, episodios: int,
            semilla: int = 0) -> Tuple[float, float]:
    """Evalúa el actor guardado en un punto de control."""
    return evaluar_politica(cargar_politica(ruta_punto_control, entorno.espec), entorno,
                            episodios, semilla)


# ============================================================================
# AGENTES
# ============================================================================

class AprendizRecompensa:
    """r_φ con su optimizador y el contador de versiones."""

    def __init__(self, config: ConfiguracionEntrenamiento, dim_estado: int,
                 rng: np.random.Generator):
        H = config.hidden_size
        self.rp = crear_parametros_recompensa(dim_estado, rng, (H, H), config.mu)
        self.optimizador = crear_estado_adam(self.rp.params.tamano, config.lr_reward)
        self.version = 0
        self.ultima_perdida = float("nan")

    def actualizar(self, conjunto: ConjuntoObservacionesExperto, buffer: BufferRepeticion,
                   rng: np.random.Generator, n: int) -> float:
        lote_experto = muestrear_pares(conjunto, rng, n)
        lote_agente = muestrear_lote(buffer, rng, n)
        self.rp, self.optimizador, perdida = actualizar_recompensa(
            self.rp, lote_experto, lote_agente, self.optimizador)
        self.version += 1
        self.ultima_perdida = perdida
        return perdida

    def segmentos(self) -> Dict[str, np.ndarray]:
        return self.rp.params.a_segmentos("reward")


class AgenteBase:
    """Actor θ, θ̄ y temperatura comunes a todos los algoritmos."""

    def __init__(self, config: ConfiguracionEntrenamiento, espec: EspecificacionEntorno,
                 rng: np.random.Generator):
        self.config = config
        H = config.hidden_size
        red = RedPolitica(espec.dim_estado, espec.dim_accion, espec.accion_min,
                          espec.accion_max, (H, H))
        self.theta = crear_politica(red, rng)
        self.theta_bar = ParametrosPolitica(self.theta.params.copia(), red)
        self.temperatura = crear_temperatura(espec.dim_accion, config.initial_alpha)
        self.opt_politica = crear_estado_adam(self.theta.params.tamano, config.lr_actor)
        self.opt_alpha = crear_estado_adam(1, config.lr_alpha)
        self.ultimas = {
            "critic1_loss": float("nan"),
            "critic2_loss": float("nan"),
            "policy_loss": float("nan"),
            "entropy_estimate": float("nan"),
        }

    def _cerrar_paso(self, log_prob: np.ndarray, perdida_politica: float) -> None:
        self.temperatura, self.opt_alpha = actualizar_temperatura(
            self.temperatura, log_prob, self.opt_alpha)
        self.theta_bar = ParametrosPolitica(
            actualizar_polyak(self.theta.params, self.theta_bar.params, self.config.iota),
            self.theta.red)
        self.ultimas["policy_loss"] = perdida_politica
        self.ultimas["entropy_estimate"] = float(np.mean(-log_prob))

    def segmentos(self) -> Dict[str, np.ndarray]:
        segmentos = {}
        segmentos.update(self.theta.params.a_segmentos("actor"))
        segmentos.update(self.theta_bar.params.a_segmentos("actor_target"))
        segmentos["log_alpha"] = np.array([self.temperatura.log_alpha])
        return segmentos


class AgenteSAC(AgenteBase):
    """SAC con Q escalares gemelos; la recompensa llega como etiquetas."""

    def __init__(self, config, espec, rng):
        super().__init__(config, espec, rng)
        H = config.hidden_size
        self.criticos = crear_criticos_q(espec.dim_estado, espec.dim_accion, rng, (H, H))
        self.objetivo = self.criticos.copia()
        n = self.criticos.q1.tamano
        self.opts_q = (crear_estado_adam(n, config.lr_critic), crear_estado_adam(n, config.lr_critic))

    def actualizar(self, lote, recompensas: np.ndarray, rngs: Dict[str, np.random.Generator]):
        c = self.config
        alpha = self.temperatura.alpha
        y = objetivos_q(self.objetivo, self.theta, lote, recompensas, c.gamma, alpha, rngs["objetivos"])
        self.criticos, self.opts_q, (l1, l2) = actualizar_criticos_q(self.criticos, y, lote, self.opts_q)
        perdida, grad, log_prob = gradiente_politica_q(self.theta, self.criticos, alpha,
                                                       lote.estados, rngs["actualizacion"])
        if not np.isfinite(perdida):
            raise FloatingPointError("pérdida no finita en el componente 'policy'")
        params, self.opt_politica = aplicar_paso(self.theta.params, grad, self.opt_politica)
        self.theta = ParametrosPolitica(params, self.theta.red)
        self._cerrar_paso(log_prob, perdida)
        self.objetivo = actualizar_polyak_q(self.criticos, self.objetivo, c.iota)
        self.ultimas["critic1_loss"], self.ultimas["critic2_loss"] = l1, l2

    def segmentos(self):
        segmentos = super().segmentos()
        segmentos.update(self.criticos.q1.a_segmentos("critic1"))
        segmentos.update(self.criticos.q2.a_segmentos("critic2"))
        segmentos.update(self.objetivo.q1.a_segmentos("critic1_target"))
        segmentos.update(self.objetivo.q2.a_segmentos("critic2_target"))
        return segmentos


class AgenteDistribucional(AgenteBase):
    """Críticos de cuantiles gemelos, fracciones y medida de riesgo."""

    def __init__(self, config, espec, rng):
        super().__init__(config, espec, rng)
        red = RedCuantiles(espec.dim_estado, espec.dim_accion, config.hidden_size,
                           config.num_cosines)
        self.criticos = crear_criticos(red, rng)
        self.objetivo = self.criticos.copia()
        n = self.criticos.w1.tamano
        self.opts_z = (crear_estado_adam(n, config.lr_critic), crear_estado_adam(n, config.lr_critic))
        self.modo = crear_modo_fracciones(config.fraction_mode, config.num_quantiles, rng,
                                          config.hidden_size, config.fraction_hidden)
        self.opt_fracciones = (crear_estado_adam(self.modo.propuesta.tamano, config.lr_fraction)
                               if self.modo.propuesta is not None else None)
        self.medida = config.medida_riesgo

    def actualizar(self, lote, recompensas: np.ndarray, rngs: Dict[str, np.random.Generator]):
        c = self.config
        B = len(lote)
        alpha = self.temperatura.alpha
        embedding = None
        if self.modo.tipo == "fqf":
            embedding = embedding_estado_accion(self.criticos.red, self.criticos.w1,
                                                lote.estados, lote.acciones)
        fracciones = generar_fracciones(self.modo, rngs["actualizacion"], embedding, n_muestras=B)

        T = calcular_cuantiles_objetivo(self.objetivo, self.theta_bar, lote, recompensas,
                                        fracciones, c.gamma, alpha, rngs["objetivos"])
        self.criticos, self.opts_z, (l1, l2) = actualizar_criticos(
            self.criticos, T, lote, fracciones, c.kappa, self.opts_z)
        if self.modo.tipo == "fqf":
            self.modo, self.opt_fracciones, _ = actualizar_propuesta_fqf(
                self.modo, self.criticos, lote, embedding, fracciones, self.opt_fracciones)

        self.theta, self.opt_politica, perdida, log_prob = actualizar_politica(
            self.theta, self.criticos, fracciones, self.medida, alpha, lote.estados,
            rngs["actualizacion"], self.opt_politica)
        self._cerrar_paso(log_prob, perdida)
        self.objetivo = actualizar_polyak_criticos(self.criticos, self.objetivo, c.iota)
        self.ultimas["critic1_loss"], self.ultimas["critic2_loss"] = l1, l2

    def segmentos(self):
        segmentos = super().segmentos()
        segmentos.update(self.criticos.w1.a_segmentos("critic1"))
        segmentos.update(self.criticos.w2.a_segmentos("critic2"))
        segmentos.update(self.objetivo.w1.a_segmentos("critic1_target"))
        segmentos.update(self.objetivo.w2.a_segmentos("critic2_target"))
        if self.modo.propuesta is not None:
            segmentos.update(self.modo.propuesta.a_segmentos("fqf_proposal"))
        return segmentos


# ============================================================================
# BUCLE COMÚN
# ============================================================================

def _preparar_directorio(config: ConfiguracionEntrenamiento) -> Path:
    directorio = Path(config.out_dir)
    (directorio / "checkpoints").mkdir(parents=True, exist_ok=True)
    guardar_configuracion(config, directorio / "config.json")
    return directorio


def _validar_conjunto(config: ConfiguracionEntrenamiento, espec: EspecificacionEntorno,
                      conjunto: ConjuntoObservacionesExperto) -> None:
    if len(conjunto) < 1:
        raise ValueError("el conjunto de observaciones del experto está vacío")
    if conjunto.id_entorno != config.env_id:
        raise ValueError(f"las observaciones son de '{conjunto.id_entorno}', "
                         f"la configuración usa '{config.env_id}'")
    if conjunto.dim_estado != espec.dim_estado:
        raise ValueError(f"state_dim de las observaciones ({conjunto.dim_estado}) no coincide "
                         f"con el entorno ({espec.dim_estado})")


def _bucle(config: ConfiguracionEntrenamiento, agente: AgenteBase,
           aprendiz: Optional[AprendizRecompensa], conjunto: Optional[ConjuntoObservacionesExperto],
           rngs: Dict[str, np.random.Generator], verbose: bool) -> ArtefactosEjecucion:
    directorio = _preparar_directorio(config)
    entorno = crear_entorno(config.env_id)
    entorno_eval = crear_entorno(config.env_id)
    espec = entorno.espec
    imitacion = aprendiz is not None

    buffer = BufferRepeticion(config.replay_capacity, espec.dim_estado, espec.dim_accion)
    evaluaciones = puntos_evaluacion(config.total_steps, config.eval_interval)
    guardados = set(_puntos_guardado(config))
    semilla_eval = int(rngs["evaluacion"].integers(0, 2 ** 31 - 1))
    filas: List[Dict[str, float]] = []
    puntos_control: List[Path] = []
    historial = {"iteracion": [], "version_recompensa": [], "version_leida_politica": []}
    ruta_metricas = directorio / "metrics.csv"

    s = entorno.reiniciar(int(rngs["entorno"].integers(0, 2 ** 31 - 1)))
    paso, iteracion, siguiente_eval = 0, 0, 0

    barra = tqdm(total=config.total_steps, desc=f"{config.algo} [{config.env_id}]",
                 disable=not verbose, leave=False)
    while paso < config.total_steps:
        # 1. recolección
        for _ in range(config.steps_per_iteration):
            if paso >= config.total_steps:
                break
            if paso < config.warmup_steps:
                a = entorno.accion_aleatoria(rngs["exploracion"])
            else:
                a, _ = muestrear_accion(agente.theta, s, rngs["exploracion"])
            resultado = entorno.paso(a)
            buffer.agregar(Transicion(s, entorno.acotar_accion(a), resultado.estado_siguiente,
                                      resultado.terminado,
                                      None if imitacion else resultado.recompensa))
            s = resultado.estado_siguiente
            if resultado.terminado:
                s = entorno.reiniciar(int(rngs["entorno"].integers(0, 2 ** 31 - 1)))
            paso += 1
            barra.update(1)
        iteracion += 1

        if paso >= config.warmup_steps:
            # 2. recompensa
            if imitacion:
                for _ in range(config.reward_updates_per_iteration):
                    aprendiz.actualizar(conjunto, buffer, rngs["lotes_recompensa"], config.batch_size)
                version_iteracion = aprendiz.version
            # 3. crítico, política, temperatura, Polyak
            for _ in range(config.policy_updates_per_iteration):
                lote = muestrear_lote(buffer, rngs["lotes"], config.batch_size)
                if imitacion:
                    recompensas = etiquetar_transiciones(aprendiz.rp, lote)
                    historial["iteracion"].append(iteracion)
                    historial["version_recompensa"].append(version_iteracion)
                    historial["version_leida_politica"].append(aprendiz.version)
                else:
                    recompensas = lote.recompensas_entorno
                agente.actualizar(lote, recompensas, rngs)

        while siguiente_eval < len(evaluaciones) and paso >= evaluaciones[siguiente_eval]:
            media, desv = evaluar_politica(agente.theta, entorno_eval, config.eval_episodes,
                                           semilla_eval)
            fila = {
                "step": paso,
                "eval_return_mean": media,
                "eval_return_std": desv,
                "reward_loss": aprendiz.ultima_perdida if imitacion else float("nan"),
                "critic1_loss": agente.ultimas["critic1_loss"],
                "critic2_loss": agente.ultimas["critic2_loss"],
                "policy_loss": agente.ultimas["policy_loss"],
                "alpha": agente.temperatura.alpha,
                "entropy_estimate": agente.ultimas["entropy_estimate"],
                "buffer_size": len(buffer),
            }
            filas.append(fila)
            pd.DataFrame(filas, columns=COLUMNAS_METRICAS).to_csv(ruta_metricas, index=False)
            if verbose:
                barra.write(f"  paso {paso:>7d} | retorno {media:9.3f} ± {desv:7.3f} "
                            f"| α = {fila['alpha']:.4f}")
            siguiente_eval += 1

        if paso in guardados:
            segmentos = agente.segmentos()
            if imitacion:
                segmentos.update(aprendiz.segmentos())
            ruta = guardar_punto_control(directorio / "checkpoints" / f"step_{paso}.mdlp", segmentos)
            puntos_control.append(ruta)
            guardados.discard(paso)
    barra.close()

    metricas = pd.DataFrame(filas, columns=COLUMNAS_METRICAS)
    metricas.to_csv(ruta_metricas, index=False)

    media, desv = evaluar_politica(agente.theta, entorno_eval, config.eval_episodes, semilla_eval)
    if not puntos_control:
        segmentos = agente.segmentos()
        if imitacion:
            segmentos.update(aprendiz.segmentos())
        puntos_control.append(guardar_punto_control(
            directorio / "checkpoints" / f"step_{paso}.mdlp", segmentos))

    retorno_experto = None
    if config.algo == "sac":
        retorno_experto = media
    elif conjunto is not None and np.isfinite(conjunto.retorno_medio):
        retorno_experto = conjunto.retorno_medio
    resumen = {
        "algo": config.algo,
        "env_id": config.env_id,
        "seed": config.seed,
        "step": paso,
        "episodes": config.eval_episodes,
        "eval_return_mean": media,
        "eval_return_std": desv,
        "expert_return": retorno_experto,
        "checkpoint": str(puntos_control[-1]),
    }
    (directorio / "final_eval.json").write_text(json.dumps(resumen, indent=2), encoding="utf-8")

    return ArtefactosEjecucion(
        directorio=directorio,
        ruta_metricas=ruta_metricas,
        puntos_control=puntos_control,
        evaluacion_final=(media, desv),
        retorno_experto=retorno_experto,
        metricas=metricas,
        historial=historial,
    )


# ============================================================================
# ALGORITMOS
# ============================================================================

def entrenar_experto_sac(config: ConfiguracionEntrenamiento,
                         verbose: bool = True) -> ArtefactosEjecucion:
    """
    SAC estándar con la recompensa verdadera del entorno.

    El retorno de la evaluación final queda registrado como retorno del
    experto en final_eval.json.
    """
    config = config.con_cambios(algo="sac")
    rngs = flujos_aleatorios(config.seed)
    espec = crear_entorno(config.env_id).espec
    agente = AgenteSAC(config, espec, rngs["agente"])
    if verbose:
        print(config, flush=True)
    return _bucle(config, agente, None, None, rngs, verbose)


def entrenar_module(config: ConfiguracionEntrenamiento, conjunto: ConjuntoObservacionesExperto,
                    verbose: bool = True) -> ArtefactosEjecucion:
    """Recompensa adversarial de transiciones con el crítico distribucional."""
    config = config.con_cambios(algo="module")
    rngs = flujos_aleatorios(config.seed)
    espec = crear_entorno(config.env_id).espec
    _validar_conjunto(config, espec, conjunto)
    aprendiz = AprendizRecompensa(config, espec.dim_estado, rngs["recompensa"])
    agente = AgenteDistribucional(config, espec, rngs["agente"])
    if verbose:
        print(config, flush=True)
    return _bucle(config, agente, aprendiz, conjunto, rngs, verbose)


def entrenar_sac_gailfo(config: ConfiguracionEntrenamiento, conjunto: ConjuntoObservacionesExperto,
                        verbose: bool = True) -> ArtefactosEjecucion:
    """Misma recompensa adversarial con críticos Q escalares; sin medida de riesgo."""
    config = config.con_cambios(algo="sac-gailfo")
    rngs = flujos_aleatorios(config.seed)
    espec = crear_entorno(config.env_id).espec
    _validar_conjunto(config, espec, conjunto)
    aprendiz = AprendizRecompensa(config, espec.dim_estado, rngs["recompensa"])
    agente = AgenteSAC(config, espec, rngs["agente"])
    if verbose:
        print(config, flush=True)
    return _bucle(config, agente, aprendiz, conjunto, rngs, verbose)


def entrenar(config: ConfiguracionEntrenamiento,
             conjunto: Optional[ConjuntoObservacionesExperto] = None,
             verbose: bool = True) -> ArtefactosEjecucion:
    """Despacha según config.algo."""
    if config.algo == "sac":
        return entrenar_experto_sac(config, verbose)
    if conjunto is None:
        raise ValueError(f"el algoritmo '{config.algo}' requiere observaciones del experto")
    if config.algo == "module":
        return entrenar_module(config, conjunto, verbose)
    return entrenar_sac_gailfo(config, conjunto, verbose)


def recolectar_observaciones(ruta_experto, entorno: Entorno, n_pares: int,
                             ruido: float = 0.01, semilla: int = 0,
                             verbose: bool = False) -> ConjuntoObservacionesExperto:
    """
    Pares (s, s') con a = acción determinista + N(0, ruido²), acotada.

    Los episodios terminados cortan la cadena de pares. El retorno medio se
    calcula sobre los episodios completos (o el parcial si no hay ninguno).

    Raises:
        ValueError: n_pares < 1, ruido negativo o punto de control incompatible.
    """
    if n_pares < 1:
        raise ValueError(f"n_pares debe ser ≥ 1, se recibió {n_pares}")
    if ruido < 0:
        raise ValueError(f"noise_std no puede ser negativo, se recibió {ruido}")
    theta = cargar_politica(ruta_experto, entorno.espec)
    rng = np.random.default_rng(semilla)

    estados, estados_sig, retornos = [], [], []
    episodio = 0
    total = 0.0
    s = entorno.reiniciar(semilla + episodio)
    with tqdm(total=n_pares, desc="recolección", disable=not verbose, leave=False) as barra:
        while len(estados) < n_pares:
            a = accion_determinista(theta, s)
            if ruido > 0:
                a = a + rng.normal(0.0, ruido, size=a.shape)
            resultado = entorno.paso(a)
            estados.append(s)
            estados_sig.append(resultado.estado_siguiente)
            total += resultado.recompensa
            s = resultado.estado_siguiente
            barra.update(1)
            if resultado.terminado:
                retornos.append(total)
                total = 0.0
                episodio += 1
                s = entorno.reiniciar(semilla + episodio)
    retorno_medio = float(np.mean(retornos)) if retornos else total

    return ConjuntoObservacionesExperto(
        estados=np.array(estados),
        estados_sig=np.array(estados_sig),
        id_entorno=entorno.espec.id_entorno,
        ruido=float(ruido),
        retorno_medio=retorno_medio,
        semilla=semilla,
    )
