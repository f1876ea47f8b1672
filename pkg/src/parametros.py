"""
Módulo de parámetros de entrenamiento.

Este módulo contiene la clase ConfiguracionEntrenamiento, que encapsula todos
los hiperparámetros de los entrenamientos (experto SAC, MODULE y SAC-GAILfO),
junto con la carga desde archivos JSON planos.

Referencias:
- Valores por defecto y rangos: contexto/02_parametros_entrenamiento.md
- Formato del archivo de configuración: contexto/04_formatos_archivo.md
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Optional

from src.entornos import ENTORNOS
from src.riesgo import MedidaRiesgo, TIPOS_RIESGO


ALGORITMOS = ("module", "sac", "sac-gailfo")
MODOS_FRACCIONES = ("qrdqn", "iqn", "fqf")


@dataclass
class ConfiguracionEntrenamiento:
    """
    Hiperparámetros de una ejecución de entrenamiento.

    Los nombres de los campos coinciden con las claves del archivo JSON.

    Attributes:
        env_id (str): Entorno ('pointmass2d' o 'pendulum')
        seed (int): Semilla de la ejecución
        seeds (int): Número de semillas en los experimentos multi-semilla
        total_steps (int): Pasos de entorno totales
        steps_per_iteration (int): Pasos de recolección por iteración
        reward_updates_per_iteration (int): Actualizaciones de r_φ por iteración
        policy_updates_per_iteration (int): Actualizaciones de crítico/política por iteración
        batch_size (int): Tamaño de lote B
        gamma (float): Factor de descuento γ ∈ (0, 1)
        iota (float): Coeficiente de Polyak ι ∈ (0, 1]
        lr_reward, lr_critic, lr_actor, lr_alpha (float): Tasas η_φ, η_w, η_θ, η_α
        lr_fraction (float): Tasa de la red de propuesta FQF
        num_quantiles (int): Número de cuantiles M
        kappa (float): Umbral κ de la pérdida de Huber
        mu (float): Regularización L2 de la recompensa
        fraction_mode (str): 'qrdqn', 'iqn' o 'fqf'
        risk_measure (str): Medida Ψ
        beta (float): Parámetro β de la medida
        replay_capacity (int): Capacidad del buffer D^I
        eval_interval (int): Pasos entre evaluaciones
        eval_episodes (int): Episodios por evaluación
        warmup_steps (int): Pasos iniciales con acciones uniformes
        hidden_size (int): Unidades por capa oculta
        num_cosines (int): Cosenos del embedding de fracciones
        fraction_hidden (int): Unidades ocultas de la propuesta FQF
        initial_alpha (float): Temperatura inicial
        algo (str): 'module', 'sac' o 'sac-gailfo'
        expert_data (str | None): Archivo MODL de observaciones del experto
        out_dir (str): Directorio de la ejecución
        num_pairs (int): Pares a recolectar con `collect`
        noise_std (float): Desviación del ruido de recolección
        checkpoint_interval (int): Pasos entre puntos de control (0 = en cada evaluación)

    Examples:
        >>> config = ConfiguracionEntrenamiento(risk_measure="cvar", beta=0.25)
        >>> config.validar()
        >>> print(config.medida_riesgo)
    """

    env_id: str = "pointmass2d"
    seed: int = 0
    seeds: int = 5
    total_steps: int = 150_000
    steps_per_iteration: int = 1
    reward_updates_per_iteration: int = 1
    policy_updates_per_iteration: int = 1
    batch_size: int = 256
    gamma: float = 0.99
    iota: float = 0.005
    lr_reward: float = 3e-4
    lr_critic: float = 3e-4
    lr_actor: float = 3e-4
    lr_alpha: float = 3e-4
    lr_fraction: float = 1e-5
    num_quantiles: int = 32
    kappa: float = 1.0
    mu: float = 1e-4
    fraction_mode: str = "iqn"
    risk_measure: str = "neutral"
    beta: float = 0.0
    replay_capacity: int = 100_000
    eval_interval: int = 5_000
    eval_episodes: int = 5
    warmup_steps: int = 1_000
    hidden_size: int = 256
    num_cosines: int = 64
    fraction_hidden: int = 128
    initial_alpha: float = 1.0
    algo: str = "module"
    expert_data: Optional[str] = None
    out_dir: str = "runs/default"
    num_pairs: int = 5_000
    noise_std: float = 0.01
    checkpoint_interval: int = 0

    def validar(self) -> "ConfiguracionEntrenamiento":
        """
        Verifica rangos y opciones de todos los campos.

        Raises:
            ValueError: Con el nombre de la clave inválida en el mensaje.
        """
        if self.env_id not in ENTORNOS:
            raise ValueError(f"env_id desconocido '{self.env_id}', opciones: {', '.join(ENTORNOS)}")
        if self.algo not in ALGORITMOS:
            raise ValueError(f"algo desconocido '{self.algo}', opciones: {', '.join(ALGORITMOS)}")
        if self.fraction_mode not in MODOS_FRACCIONES:
            raise ValueError(f"fraction_mode desconocido '{self.fraction_mode}', "
                             f"opciones: {', '.join(MODOS_FRACCIONES)}")
        if self.risk_measure not in TIPOS_RIESGO:
            raise ValueError(f"risk_measure desconocida '{self.risk_measure}', "
                             f"opciones: {', '.join(TIPOS_RIESGO)}")

        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma debe estar en (0,1), se recibió {self.gamma}")
        if not 0.0 < self.iota <= 1.0:
            raise ValueError(f"iota debe estar en (0,1], se recibió {self.iota}")
        for clave in ("lr_reward", "lr_critic", "lr_actor", "lr_alpha", "lr_fraction",
                      "kappa", "initial_alpha"):
            if not getattr(self, clave) > 0.0:
                raise ValueError(f"{clave} debe ser positivo, se recibió {getattr(self, clave)}")
        for clave in ("mu", "noise_std"):
            if getattr(self, clave) < 0.0:
                raise ValueError(f"{clave} no puede ser negativo, se recibió {getattr(self, clave)}")

        for clave in ("seeds", "steps_per_iteration", "batch_size", "num_quantiles",
                      "replay_capacity", "eval_interval", "eval_episodes", "hidden_size",
                      "num_cosines", "fraction_hidden", "num_pairs"):
            if int(getattr(self, clave)) < 1:
                raise ValueError(f"{clave} debe ser ≥ 1, se recibió {getattr(self, clave)}")
        for clave in ("total_steps", "reward_updates_per_iteration",
                      "policy_updates_per_iteration", "warmup_steps", "checkpoint_interval"):
            if int(getattr(self, clave)) < 0:
                raise ValueError(f"{clave} no puede ser negativo, se recibió {getattr(self, clave)}")

        if self.batch_size > self.replay_capacity:
            raise ValueError(f"batch_size ({self.batch_size}) no puede superar "
                             f"replay_capacity ({self.replay_capacity})")
        # construir la medida valida beta según el tipo
        try:
            self.medida_riesgo
        except ValueError as error:
            raise ValueError(f"beta inválido para risk_measure '{self.risk_measure}': {error}") from None
        return self

    @property
    def medida_riesgo(self) -> MedidaRiesgo:
        return MedidaRiesgo(self.risk_measure, self.beta)

    def a_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def desde_dict(cls, datos: Dict[str, Any]) -> "ConfiguracionEntrenamiento":
        """
        Construye y valida una configuración; las claves ausentes toman su
        valor por defecto.

        Raises:
            ValueError: Si hay claves desconocidas o valores inválidos.
        """
        validas = {f.name: f for f in fields(cls)}
        desconocidas = sorted(set(datos) - set(validas))
        if desconocidas:
            raise ValueError(f"claves de configuración desconocidas: {', '.join(desconocidas)}")
        convertidos = {}
        for clave, valor in datos.items():
            por_defecto = validas[clave].default
            if valor is None or por_defecto is None or isinstance(por_defecto, str):
                convertidos[clave] = valor
                continue
            try:
                if isinstance(por_defecto, int):
                    if isinstance(valor, float) and not valor.is_integer():
                        raise ValueError
                    convertidos[clave] = int(valor)
                else:
                    convertidos[clave] = float(valor)
            except (TypeError, ValueError):
                raise ValueError(f"valor inválido para {clave}: {valor!r}") from None
        return cls(**convertidos).validar()

    def con_cambios(self, **cambios) -> "ConfiguracionEntrenamiento":
        """Copia con los campos indicados reemplazados (los None se ignoran)."""
        efectivos = {k: v for k, v in cambios.items() if v is not None}
        return replace(self, **efectivos).validar()

    def __str__(self) -> str:
        return f"""
Configuración de entrenamiento
==============================
Algoritmo: {self.algo}   Entorno: {self.env_id}   Semilla: {self.seed}

Bucle:
  total_steps = {self.total_steps}
  warmup_steps = {self.warmup_steps}
  batch_size = {self.batch_size}
  γ = {self.gamma}   ι = {self.iota}

Crítico distribucional:
  M = {self.num_quantiles} ({self.fraction_mode})
  κ = {self.kappa}
  Ψ = {self.medida_riesgo}

Redes:
  hidden_size = {self.hidden_size}
  num_cosines = {self.num_cosines}
"""


PRESET_ESCRITORIO: Dict[str, Any] = {
    "hidden_size": 64,
    "num_quantiles": 8,
    "batch_size": 64,
    "num_cosines": 16,
}


def cargar_configuracion(ruta) -> ConfiguracionEntrenamiento:
    """
    Lee un objeto JSON plano con claves iguales a los campos de
    ConfiguracionEntrenamiento.

    Raises:
        ValueError: JSON mal formado (citando el archivo), objeto no plano,
            claves desconocidas o valores inválidos.
        FileNotFoundError: Si el archivo no existe.
    """
    ruta = Path(ruta)
    texto = ruta.read_text(encoding="utf-8")
    try:
        datos = json.loads(texto)
    except json.JSONDecodeError as error:
        raise ValueError(f"JSON mal formado en {ruta}: {error}") from None
    if not isinstance(datos, dict):
        raise ValueError(f"{ruta} debe contener un objeto JSON")
    return ConfiguracionEntrenamiento.desde_dict(datos)


def guardar_configuracion(config: ConfiguracionEntrenamiento, ruta) -> Path:
    ruta = Path(ruta)
    ruta.parent.mkdir(parents=True, exist_ok=True)
    ruta.write_text(json.dumps(config.a_dict(), indent=2), encoding="utf-8")
    return ruta


if __name__ == "__main__":
    print("=" * 60)
    print("CONFIGURACIÓN POR DEFECTO")
    print("=" * 60)
    print(ConfiguracionEntrenamiento().validar())

    print("=" * 60)
    print("PRESET DE ESCRITORIO")
    print("=" * 60)
    print(ConfiguracionEntrenamiento(**PRESET_ESCRITORIO).validar())
