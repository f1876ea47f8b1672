"""
Buffer de repetición D^I, conjunto de observaciones del experto D^E y su
formato binario.

Formato MODL (little-endian):
    magic "MODL" | version u32 = 1 | state_dim u32 | pair_count u64 |
    largo env_id u32 | env_id utf-8 | noise_std f64 | mean_return f64 |
    pair_count registros de 2·state_dim float64 (s y luego s')

Ver contexto/04_formatos_archivo.md.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
import pandas as pd

from src.puntos_control import (
    ErrorFormatoArchivo,
    LectorBinario,
    bytes_f8,
    bytes_u32,
    bytes_u64,
)


MAGIC_OBSERVACIONES = b"MODL"
VERSION_OBSERVACIONES = 1


@dataclass
class Transicion:
    """
    Transición (s, a, s', fin) del agente. `r_entorno` sólo está presente en
    el entrenamiento del experto con recompensa verdadera.
    """

    s: np.ndarray
    a: np.ndarray
    s_sig: np.ndarray
    terminado: bool
    r_entorno: Optional[float] = None


@dataclass
class ParObservacion:
    """Transición de estados (s, s'), la única señal del experto."""

    s: np.ndarray
    s_sig: np.ndarray


@dataclass
class LoteTransiciones:
    """Lote de transiciones en forma de arrays."""

    estados: np.ndarray
    acciones: np.ndarray
    recompensas_entorno: np.ndarray
    estados_sig: np.ndarray
    terminados: np.ndarray

    def __len__(self) -> int:
        return self.estados.shape[0]

    def transiciones(self) -> List[Transicion]:
        salida = []
        for i in range(len(self)):
            r = self.recompensas_entorno[i]
            salida.append(Transicion(self.estados[i], self.acciones[i], self.estados_sig[i],
                                     bool(self.terminados[i]), None if np.isnan(r) else float(r)))
        return salida


@dataclass
class LotePares:
    """Lote de pares (s, s') en forma de arrays."""

    estados: np.ndarray
    estados_sig: np.ndarray

    def __len__(self) -> int:
        return self.estados.shape[0]


class BufferRepeticion:
    """
    Buffer circular FIFO de transiciones.

    Args:
        capacidad (int): Número máximo de transiciones.
        dim_estado (int): Dimensión de los estados.
        dim_accion (int): Dimensión de las acciones.
    """

    def __init__(self, capacidad: int, dim_estado: int, dim_accion: int):
        if capacidad < 1:
            raise ValueError(f"capacidad debe ser ≥ 1, se recibió {capacidad}")
        self.capacidad = int(capacidad)
        self.dim_estado = int(dim_estado)
        self.dim_accion = int(dim_accion)
        self.estados = np.zeros((capacidad, dim_estado))
        self.acciones = np.zeros((capacidad, dim_accion))
        self.recompensas = np.full(capacidad, np.nan)
        self.estados_sig = np.zeros((capacidad, dim_estado))
        self.terminados = np.zeros(capacidad, dtype=bool)
        self._inicio = 0
        self.cuenta = 0

    def __len__(self) -> int:
        return self.cuenta

    def agregar(self, transicion: Transicion) -> None:
        """
        Inserta una transición; si el buffer está lleno expulsa la más antigua.

        Raises:
            ValueError: Si las dimensiones no coinciden.
        """
        s = np.asarray(transicion.s, dtype=np.float64)
        a = np.asarray(transicion.a, dtype=np.float64)
        s_sig = np.asarray(transicion.s_sig, dtype=np.float64)
        if s.shape != (self.dim_estado,) or s_sig.shape != (self.dim_estado,):
            raise ValueError(
                f"dimensión de estado incompatible: {s.shape}/{s_sig.shape}, "
                f"se esperaba ({self.dim_estado},)")
        if a.shape != (self.dim_accion,):
            raise ValueError(
                f"dimensión de acción incompatible: {a.shape}, se esperaba ({self.dim_accion},)")

        if self.cuenta < self.capacidad:
            i = (self._inicio + self.cuenta) % self.capacidad
            self.cuenta += 1
        else:
            i = self._inicio
            self._inicio = (self._inicio + 1) % self.capacidad
        self.estados[i] = s
        self.acciones[i] = a
        self.recompensas[i] = np.nan if transicion.r_entorno is None else transicion.r_entorno
        self.estados_sig[i] = s_sig
        self.terminados[i] = bool(transicion.terminado)

    def _indices_fisicos(self, logicos: np.ndarray) -> np.ndarray:
        return (self._inicio + logicos) % self.capacidad

    def lote(self, logicos: np.ndarray) -> LoteTransiciones:
        i = self._indices_fisicos(np.asarray(logicos))
        return LoteTransiciones(self.estados[i], self.acciones[i], self.recompensas[i],
                                self.estados_sig[i], self.terminados[i])

    def contenido(self) -> List[Transicion]:
        """Transiciones de la más antigua a la más reciente."""
        return self.lote(np.arange(self.cuenta)).transiciones()


def muestrear_lote(buffer: BufferRepeticion, rng: np.random.Generator, n: int) -> LoteTransiciones:
    """
    n extracciones uniformes con reemplazo.

    Raises:
        ValueError: Si el buffer está vacío.
    """
    if buffer.cuenta < 1:
        raise ValueError("no se puede muestrear de un buffer vacío")
    return buffer.lote(rng.integers(0, buffer.cuenta, size=n))


# ============================================================================
# OBSERVACIONES DEL EXPERTO
# ============================================================================

@dataclass
class ConjuntoObservacionesExperto:
    """
    Pares (s, s') del experto con metadatos de origen.

    Attributes:
        estados, estados_sig (ndarray): (N, dim_estado).
        id_entorno (str): Entorno de origen.
        ruido (float): Desviación estándar del ruido de acción al recolectar.
        retorno_medio (float): Retorno medio registrado de los episodios.
        semilla (int | None): Semilla de recolección (no se persiste).
    """

    estados: np.ndarray
    estados_sig: np.ndarray
    id_entorno: str
    ruido: float = 0.0
    retorno_medio: float = float("nan")
    semilla: Optional[int] = None

    def __post_init__(self):
        self.estados = np.asarray(self.estados, dtype=np.float64)
        self.estados_sig = np.asarray(self.estados_sig, dtype=np.float64)
        assert self.estados.ndim == 2 and self.estados.shape == self.estados_sig.shape, \
            "estados y estados_sig deben ser matrices de igual forma"

    def __len__(self) -> int:
        return self.estados.shape[0]

    @property
    def dim_estado(self) -> int:
        return self.estados.shape[1]

    def pares(self) -> List[ParObservacion]:
        return [ParObservacion(s, s2) for s, s2 in zip(self.estados, self.estados_sig)]

    def __str__(self) -> str:
        return (f"ConjuntoObservacionesExperto(entorno={self.id_entorno}, pares={len(self)}, "
                f"dim_estado={self.dim_estado}, ruido={self.ruido}, "
                f"retorno_medio={self.retorno_medio:.3f})")


def muestrear_pares(conjunto: ConjuntoObservacionesExperto, rng: np.random.Generator,
                    n: int) -> LotePares:
    if len(conjunto) < 1:
        raise ValueError("el conjunto de observaciones está vacío")
    i = rng.integers(0, len(conjunto), size=n)
    return LotePares(conjunto.estados[i], conjunto.estados_sig[i])


def guardar_observaciones(conjunto: ConjuntoObservacionesExperto, ruta: Union[str, Path]) -> Path:
    """Escribe el conjunto en formato MODL."""
    ruta = Path(ruta)
    ruta.parent.mkdir(parents=True, exist_ok=True)
    id_b = conjunto.id_entorno.encode("utf-8")
    registros = np.concatenate([conjunto.estados, conjunto.estados_sig], axis=1)
    partes = [
        MAGIC_OBSERVACIONES,
        bytes_u32(VERSION_OBSERVACIONES),
        bytes_u32(conjunto.dim_estado),
        bytes_u64(len(conjunto)),
        bytes_u32(len(id_b)),
        id_b,
        bytes_f8([conjunto.ruido]),
        bytes_f8([conjunto.retorno_medio]),
        bytes_f8(registros.ravel()),
    ]
    ruta.write_bytes(b"".join(partes))
    return ruta


def cargar_observaciones(ruta: Union[str, Path],
                         dim_estado_esperada: Optional[int] = None) -> ConjuntoObservacionesExperto:
    """
    Lee un archivo MODL validando la cabecera.

    Args:
        ruta: Archivo.
        dim_estado_esperada: Si se da, la cabecera debe coincidir.

    Raises:
        ErrorFormatoArchivo: magic, version, state_dim o datos truncados.
    """
    lector = LectorBinario(Path(ruta).read_bytes(), ruta)
    lector.verificar_magic(MAGIC_OBSERVACIONES)
    lector.verificar_version(VERSION_OBSERVACIONES)
    dim_estado = lector.leer_u32("state_dim")
    if dim_estado < 1:
        raise ErrorFormatoArchivo(f"{ruta}: state_dim inválido ({dim_estado})")
    if dim_estado_esperada is not None and dim_estado != dim_estado_esperada:
        raise ErrorFormatoArchivo(
            f"{ruta}: state_dim {dim_estado} no coincide con el entorno ({dim_estado_esperada})")
    n_pares = lector.leer_u64("pair_count")
    largo_id = lector.leer_u32("env_id length")
    try:
        id_entorno = lector.leer_bytes(largo_id, "env_id").decode("utf-8")
    except UnicodeDecodeError as e:
        raise ErrorFormatoArchivo(f"{ruta}: env_id no es utf-8") from e
    ruido = float(lector.leer_f8(1, "noise_std")[0])
    retorno = float(lector.leer_f8(1, "mean_return")[0])
    registros = lector.leer_f8(n_pares * 2 * dim_estado, "pairs").reshape(n_pares, 2 * dim_estado)
    lector.verificar_fin()
    return ConjuntoObservacionesExperto(
        estados=registros[:, :dim_estado].copy(),
        estados_sig=registros[:, dim_estado:].copy(),
        id_entorno=id_entorno,
        ruido=ruido,
        retorno_medio=retorno,
    )


def exportar_observaciones_csv(conjunto: ConjuntoObservacionesExperto,
                               ruta: Union[str, Path]) -> Path:
    """Una fila por par: columnas s0..s{d−1} y luego s_next0..s_next{d−1}."""
    d = conjunto.dim_estado
    columnas = [f"s{i}" for i in range(d)] + [f"s_next{i}" for i in range(d)]
    df = pd.DataFrame(np.concatenate([conjunto.estados, conjunto.estados_sig], axis=1),
                      columns=columnas)
    ruta = Path(ruta)
    ruta.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(ruta, index=False)
    return ruta
