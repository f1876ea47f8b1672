"""
Vectores de parámetros y perceptrones multicapa.

Todas las redes del proyecto (recompensa r_φ, críticos de cuantiles Z_w,
críticos escalares Q y política π_θ) guardan sus pesos en un único
`VectorParametros` plano con una disposición de segmentos nombrados. Las
redes se evalúan con la cinta de `src.autodiff`, de modo que la misma
función sirve para inferencia y para entrenamiento.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Tuple

import numpy as np

from src.autodiff import Cinta, Nodo


Disposicion = List[Tuple[str, Tuple[int, ...]]]


@dataclass
class VectorParametros:
    """
    Colección plana de parámetros float64 con segmentos nombrados.

    Attributes:
        valores (ndarray): Vector plano de parámetros.
        disposicion (list): Pares (nombre, forma) en orden de almacenamiento.
    """

    valores: np.ndarray
    disposicion: Disposicion = field(default_factory=list)

    def __post_init__(self):
        self.valores = np.asarray(self.valores, dtype=np.float64).ravel()
        self.disposicion = [(str(n), tuple(int(d) for d in f)) for n, f in self.disposicion]
        esperado = sum(int(np.prod(f)) for _, f in self.disposicion)
        if esperado != self.valores.size:
            raise ValueError(
                f"la disposición suma {esperado} elementos pero hay {self.valores.size} valores")

    @property
    def tamano(self) -> int:
        return self.valores.size

    def desplazamientos(self) -> Dict[str, Tuple[int, Tuple[int, ...]]]:
        """Mapa nombre → (inicio, forma)."""
        salida = {}
        inicio = 0
        for nombre, forma in self.disposicion:
            salida[nombre] = (inicio, forma)
            inicio += int(np.prod(forma))
        return salida

    def vista(self, nombre: str) -> np.ndarray:
        inicio, forma = self.desplazamientos()[nombre]
        return self.valores[inicio:inicio + int(np.prod(forma))].reshape(forma)

    def copia(self) -> "VectorParametros":
        return VectorParametros(self.valores.copy(), list(self.disposicion))

    def con_valores(self, valores: np.ndarray) -> "VectorParametros":
        return VectorParametros(np.array(valores, dtype=np.float64), list(self.disposicion))

    def con_segmento(self, nombre: str, valor) -> "VectorParametros":
        nuevo = self.copia()
        nuevo.vista(nombre)[...] = valor
        return nuevo

    def es_finito(self) -> bool:
        return bool(np.all(np.isfinite(self.valores)))

    def a_segmentos(self, prefijo: str) -> Dict[str, np.ndarray]:
        """Segmentos {prefijo/nombre: array} para un punto de control."""
        return {f"{prefijo}/{nombre}": self.vista(nombre).copy() for nombre, _ in self.disposicion}

    @classmethod
    def desde_segmentos(cls,
                        segmentos: Mapping[str, np.ndarray],
                        prefijo: str,
                        disposicion: Optional[Disposicion] = None) -> "VectorParametros":
        """
        Reconstruye un vector desde segmentos con prefijo común.

        Raises:
            ValueError: Si falta un segmento o su forma no coincide.
        """
        clave = f"{prefijo}/"
        if disposicion is None:
            disposicion = [(k[len(clave):], tuple(np.shape(v)))
                           for k, v in segmentos.items() if k.startswith(clave)]
            if not disposicion:
                raise ValueError(f"no hay segmentos con prefijo '{prefijo}'")
        partes = []
        for nombre, forma in disposicion:
            completo = clave + nombre
            if completo not in segmentos:
                raise ValueError(f"falta el segmento '{completo}'")
            arr = np.asarray(segmentos[completo], dtype=np.float64)
            if arr.shape != tuple(forma):
                raise ValueError(
                    f"el segmento '{completo}' tiene forma {arr.shape}, se esperaba {tuple(forma)}")
            partes.append(arr.ravel())
        return cls(np.concatenate(partes), list(disposicion))


def concatenar_vectores(*vectores: VectorParametros) -> np.ndarray:
    return np.concatenate([v.valores for v in vectores])


# ============================================================================
# PERCEPTRÓN MULTICAPA
# ============================================================================

@dataclass(frozen=True)
class EspecificacionMLP:
    """
    Arquitectura de un perceptrón multicapa.

    Attributes:
        tamanos_capas: Tamaños (entrada, ocultas..., salida).
        activacion_oculta: Sólo 'relu'.
        activacion_salida: Sólo 'identidad'.
    """

    tamanos_capas: Tuple[int, ...]
    activacion_oculta: str = "relu"
    activacion_salida: str = "identidad"

    def __post_init__(self):
        object.__setattr__(self, "tamanos_capas", tuple(int(n) for n in self.tamanos_capas))
        if len(self.tamanos_capas) < 2:
            raise ValueError("un MLP necesita al menos dos capas (entrada y salida)")
        if any(n < 1 for n in self.tamanos_capas):
            raise ValueError(f"tamaños de capa inválidos: {self.tamanos_capas}")
        if self.activacion_oculta != "relu":
            raise ValueError(f"activación oculta no soportada: {self.activacion_oculta}")
        if self.activacion_salida != "identidad":
            raise ValueError(f"activación de salida no soportada: {self.activacion_salida}")

    @property
    def entrada(self) -> int:
        return self.tamanos_capas[0]

    @property
    def salida(self) -> int:
        return self.tamanos_capas[-1]

    @property
    def numero_parametros(self) -> int:
        return sum(a * b + b for a, b in zip(self.tamanos_capas[:-1], self.tamanos_capas[1:]))

    def disposicion(self, prefijo: str = "") -> Disposicion:
        salida: Disposicion = []
        for k, (a, b) in enumerate(zip(self.tamanos_capas[:-1], self.tamanos_capas[1:])):
            salida.append((f"{prefijo}capa{k}.W", (a, b)))
            salida.append((f"{prefijo}capa{k}.b", (b,)))
        return salida

    @classmethod
    def desde_parametros(cls, params: VectorParametros, prefijo: str = "") -> "EspecificacionMLP":
        """Infiere la arquitectura a partir de las formas de los pesos."""
        formas = [f for n, f in params.disposicion
                  if n.startswith(prefijo) and n.endswith(".W")]
        if not formas:
            raise ValueError(f"no hay pesos con prefijo '{prefijo}'")
        return cls((formas[0][0],) + tuple(f[1] for f in formas))


def inicializar_parametros(disposicion: Disposicion, rng: np.random.Generator) -> VectorParametros:
    """
    Pesos uniformes en ±1/√fan_in y sesgos en cero.
    """
    partes = []
    for nombre, forma in disposicion:
        if nombre.endswith(".W"):
            limite = 1.0 / np.sqrt(forma[0])
            partes.append(rng.uniform(-limite, limite, size=forma).ravel())
        else:
            partes.append(np.zeros(int(np.prod(forma))))
    valores = np.concatenate(partes) if partes else np.zeros(0)
    return VectorParametros(valores, list(disposicion))


def inicializar_mlp(espec: EspecificacionMLP, rng: np.random.Generator,
                    prefijo: str = "") -> VectorParametros:
    return inicializar_parametros(espec.disposicion(prefijo), rng)


def nodos_segmentos(cinta: Cinta, nodo_params: Nodo,
                    params: VectorParametros) -> Dict[str, Nodo]:
    """Crea un nodo por segmento de `params` a partir del nodo plano."""
    return {nombre: cinta.segmento(nodo_params, inicio, forma)
            for nombre, (inicio, forma) in params.desplazamientos().items()}


def mlp_cinta(cinta: Cinta, nodos: Mapping[str, Nodo], espec: EspecificacionMLP,
              x, prefijo: str = "") -> Nodo:
    """Evalúa el MLP sobre un lote 2-D `x` registrando en la cinta."""
    h = x
    ultima = len(espec.tamanos_capas) - 2
    for k in range(ultima + 1):
        h = cinta.suma(cinta.matmul(h, nodos[f"{prefijo}capa{k}.W"]), nodos[f"{prefijo}capa{k}.b"])
        if k < ultima:
            h = cinta.relu(h)
    return h


def evaluar_mlp(params: VectorParametros, espec: EspecificacionMLP, entrada) -> np.ndarray:
    """
    Evaluación determinista de un MLP.

    Args:
        params: Parámetros con la disposición de `espec`.
        espec: Arquitectura.
        entrada: Vector (n_entrada,) o lote (B, n_entrada).

    Returns:
        ndarray: (n_salida,) o (B, n_salida).

    Raises:
        ValueError: Si la dimensión de entrada o el número de parámetros no
            coinciden con la arquitectura.
    """
    x = np.asarray(entrada, dtype=np.float64)
    if x.shape[-1] != espec.entrada:
        raise ValueError(
            f"dimensión de entrada {x.shape[-1]} distinta de la primera capa {espec.entrada}")
    if params.tamano != espec.numero_parametros:
        raise ValueError(
            f"el vector tiene {params.tamano} parámetros, la arquitectura requiere "
            f"{espec.numero_parametros}")
    es_vector = x.ndim == 1
    cinta = Cinta(registrar=False)
    nodos = nodos_segmentos(cinta, cinta.constante(params.valores), params)
    salida = mlp_cinta(cinta, nodos, espec, np.atleast_2d(x)).valor
    return salida[0] if es_vector else salida


def gradientes_perdida(funcion_perdida: Callable[[Cinta, Nodo], Nodo],
                       params: VectorParametros) -> Tuple[float, np.ndarray]:
    """
    Gradiente de una pérdida escalar respecto a un vector de parámetros.

    Args:
        funcion_perdida: Recibe (cinta, nodo_params) y devuelve el nodo escalar
            de la pérdida construido con primitivas de la cinta.
        params: Punto donde se evalúa el gradiente.

    Returns:
        (valor, gradiente) con gradiente de la misma longitud que params.
    """
    cinta = Cinta()
    nodo = cinta.variable(params.valores)
    perdida = funcion_perdida(cinta, nodo)
    cinta.retropropagar(perdida)
    grad = nodo.grad if nodo.grad is not None else np.zeros_like(params.valores)
    return float(np.sum(perdida.valor)), np.asarray(grad, dtype=np.float64).reshape(params.valores.shape)
