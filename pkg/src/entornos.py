"""
Entornos de control continuo de escritorio.

Dos sistemas deterministas reemplazan a los simuladores de física completos:

    - PuntoMasa2D: partícula en el plano con aceleración como acción.
    - Pendulo: péndulo simple con torque acotado (swing-up clásico).

Cada entorno tiene un generador pseudoaleatorio propio que sólo se usa en
`reiniciar`; las transiciones son deterministas. La recompensa devuelta es la
recompensa verdadera r_gt, usada para entrenar al experto y para evaluar.

Referencias:
    contexto/03_ecuaciones_gobernantes.md, sección "Entornos"
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np


@dataclass(frozen=True)
class EspecificacionEntorno:
    """
    Espacios y horizonte de un entorno.

    Attributes:
        id_entorno (str): Identificador de CLI.
        dim_estado (int): Dimensión del estado.
        dim_accion (int): Dimensión de la acción.
        accion_min, accion_max (ndarray): Cotas por dimensión.
        horizonte (int): Pasos máximos por episodio.
        coordenadas_proyeccion (tuple): Coordenadas del estado usadas por los
            histogramas de transiciones.
        limites_proyeccion (tuple): (min, max) de cada coordenada proyectada.
    """

    id_entorno: str
    dim_estado: int
    dim_accion: int
    accion_min: np.ndarray
    accion_max: np.ndarray
    horizonte: int
    coordenadas_proyeccion: Tuple[int, ...] = (0, 1)
    limites_proyeccion: Tuple[Tuple[float, float], ...] = ((-1.0, 1.0), (-1.0, 1.0))

    def __post_init__(self):
        object.__setattr__(self, "accion_min", np.asarray(self.accion_min, dtype=np.float64))
        object.__setattr__(self, "accion_max", np.asarray(self.accion_max, dtype=np.float64))
        assert self.accion_min.shape == (self.dim_accion,), "accion_min con forma inválida"
        assert self.accion_max.shape == (self.dim_accion,), "accion_max con forma inválida"
        assert np.all(self.accion_min < self.accion_max), "accion_min debe ser < accion_max"
        assert self.horizonte >= 1, "el horizonte debe ser ≥ 1"
        assert len(self.coordenadas_proyeccion) == len(self.limites_proyeccion), \
            "cada coordenada proyectada necesita sus límites"


@dataclass
class ResultadoPaso:
    """Resultado de `paso`: estado siguiente, recompensa r_gt y fin de episodio."""

    estado_siguiente: np.ndarray
    recompensa: float
    terminado: bool


class Entorno:
    """Base común: contador de pasos, generador de reinicio y acotación de acciones."""

    espec: EspecificacionEntorno

    def __init__(self):
        self.rng = np.random.default_rng()
        self.estado: Optional[np.ndarray] = None
        self.pasos = 0

    def _estado_inicial(self) -> np.ndarray:
        raise NotImplementedError

    def transicion(self, estado: np.ndarray, accion: np.ndarray) -> Tuple[np.ndarray, float]:
        """Dinámica pura (estado, acción acotada) → (estado siguiente, r_gt)."""
        raise NotImplementedError

    def acotar_accion(self, accion) -> np.ndarray:
        """
        Acota la acción a las cotas del entorno.

        Raises:
            ValueError: Si la acción tiene dimensión incorrecta o no es finita.
        """
        a = np.asarray(accion, dtype=np.float64).reshape(-1)
        if a.shape != (self.espec.dim_accion,):
            raise ValueError(
                f"la acción debe tener dimensión {self.espec.dim_accion}, se recibió {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError(f"acción no finita: {a}")
        return np.clip(a, self.espec.accion_min, self.espec.accion_max)

    def reiniciar(self, semilla: Optional[int] = None) -> np.ndarray:
        """
        Reinicia el episodio. Con la misma semilla se obtiene el mismo estado.
        Sin semilla se continúa el flujo pseudoaleatorio del entorno.
        """
        if semilla is not None:
            self.rng = np.random.default_rng(int(semilla))
        self.estado = self._estado_inicial()
        self.pasos = 0
        return self.estado.copy()

    def paso(self, accion) -> ResultadoPaso:
        assert self.estado is not None, "llamar a reiniciar() antes de paso()"
        a = self.acotar_accion(accion)
        siguiente, recompensa = self.transicion(self.estado, a)
        assert np.all(np.isfinite(siguiente)), "estado no finito"
        self.estado = siguiente
        self.pasos += 1
        return ResultadoPaso(siguiente.copy(), float(recompensa), self.pasos >= self.espec.horizonte)

    def accion_aleatoria(self, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(self.espec.accion_min, self.espec.accion_max)


class PuntoMasa2D(Entorno):
    """
    Partícula en [−5,5]² con velocidad en [−2,2]² y aceleración en [−1,1]².

    Euler semi-implícito con dt = 0.05:
        v' = clip(v + a·dt, −2, 2)
        x' = clip(x + v'·dt, −5, 5)

    Recompensa sobre la posición actual:
        r = −‖x − meta‖₂ − 0.01‖a‖₂²,  meta = (3, 3)
    """

    DT = 0.05
    META = np.array([3.0, 3.0])
    LIMITE_POSICION = 5.0
    LIMITE_VELOCIDAD = 2.0

    def __init__(self, horizonte: int = 200):
        super().__init__()
        self.espec = EspecificacionEntorno(
            id_entorno="pointmass2d",
            dim_estado=4,
            dim_accion=2,
            accion_min=np.array([-1.0, -1.0]),
            accion_max=np.array([1.0, 1.0]),
            horizonte=horizonte,
            coordenadas_proyeccion=(0, 1),
            limites_proyeccion=((-5.0, 5.0), (-5.0, 5.0)),
        )

    def _estado_inicial(self) -> np.ndarray:
        posicion = self.rng.uniform(-1.0, 1.0, size=2)
        return np.concatenate([posicion, np.zeros(2)])

    def transicion(self, estado, accion):
        x, v = estado[:2], estado[2:]
        v_sig = np.clip(v + accion * self.DT, -self.LIMITE_VELOCIDAD, self.LIMITE_VELOCIDAD)
        x_sig = np.clip(x + v_sig * self.DT, -self.LIMITE_POSICION, self.LIMITE_POSICION)
        recompensa = -np.linalg.norm(x - self.META) - 0.01 * float(accion @ accion)
        return np.concatenate([x_sig, v_sig]), recompensa


def normalizar_angulo(theta):
    """Lleva θ al intervalo (−π, π]."""
    return -((-np.asarray(theta) + np.pi) % (2.0 * np.pi) - np.pi)


class Pendulo(Entorno):
    """
    Péndulo con estado observado [cos θ, sin θ, θ̇] y torque en [−2, 2].

        θ̇' = clip(θ̇ + (3g/(2l)·sin θ + 3/(m l²)·u)·dt, −8, 8)
        θ'  = θ + θ̇'·dt
        r   = −(θ² + 0.1·θ̇² + 0.001·u²),  θ normalizado a (−π, π]

    θ = 0 es la posición vertical superior.
    """

    DT = 0.05
    G = 10.0
    MASA = 1.0
    LONGITUD = 1.0
    VELOCIDAD_MAXIMA = 8.0

    def __init__(self, horizonte: int = 200):
        super().__init__()
        self.espec = EspecificacionEntorno(
            id_entorno="pendulum",
            dim_estado=3,
            dim_accion=1,
            accion_min=np.array([-2.0]),
            accion_max=np.array([2.0]),
            horizonte=horizonte,
            coordenadas_proyeccion=(0, 1),
            limites_proyeccion=((-1.0, 1.0), (-1.0, 1.0)),
        )

    @staticmethod
    def observacion(theta: float, theta_punto: float) -> np.ndarray:
        return np.array([np.cos(theta), np.sin(theta), theta_punto])

    def _estado_inicial(self) -> np.ndarray:
        theta = self.rng.uniform(-np.pi, np.pi)
        theta_punto = self.rng.uniform(-1.0, 1.0)
        return self.observacion(theta, theta_punto)

    def transicion(self, estado, accion):
        theta = np.arctan2(estado[1], estado[0])
        theta_punto = estado[2]
        u = float(accion[0])
        recompensa = -(normalizar_angulo(theta) ** 2 + 0.1 * theta_punto ** 2 + 0.001 * u ** 2)

        aceleracion = (3.0 * self.G / (2.0 * self.LONGITUD) * np.sin(theta)
                       + 3.0 / (self.MASA * self.LONGITUD ** 2) * u)
        theta_punto_sig = np.clip(theta_punto + aceleracion * self.DT,
                                  -self.VELOCIDAD_MAXIMA, self.VELOCIDAD_MAXIMA)
        theta_sig = theta + theta_punto_sig * self.DT
        return self.observacion(theta_sig, theta_punto_sig), float(recompensa)


ENTORNOS = {
    "pointmass2d": PuntoMasa2D,
    "pendulum": Pendulo,
}


def crear_entorno(id_entorno: str) -> Entorno:
    """
    Crea un entorno por su identificador de CLI.

    Raises:
        ValueError: Si el identificador no existe.
    """
    if id_entorno not in ENTORNOS:
        raise ValueError(
            f"entorno desconocido '{id_entorno}', opciones: {', '.join(sorted(ENTORNOS))}")
    return ENTORNOS[id_entorno]()
