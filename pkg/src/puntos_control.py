"""
Formato binario de puntos de control y utilidades de lectura binaria.

Archivo MDLP (little-endian):
    magic "MDLP" | version u32 | n_segmentos u32
    por segmento: largo_nombre u32 | nombre utf-8 | ndim u32 | dims u64 × ndim
    datos: float64 de todos los segmentos, en el orden de la tabla

Ver contexto/04_formatos_archivo.md.
"""

from __future__ import annotations

from pathlib import Path
from typing import Dict, Mapping, Union

import numpy as np


MAGIC_PUNTO_CONTROL = b"MDLP"
VERSION_PUNTO_CONTROL = 1

Ruta = Union[str, Path]


class ErrorFormatoArchivo(ValueError):
    """Archivo binario corrupto o incompatible. El mensaje nombra el campo."""


def bytes_u32(valor: int) -> bytes:
    return np.array([valor], dtype="<u4").tobytes()


def bytes_u64(valor: int) -> bytes:
    return np.array([valor], dtype="<u8").tobytes()


def bytes_f8(valores) -> bytes:
    return np.ascontiguousarray(valores, dtype="<f8").tobytes()


class LectorBinario:
    """Lector secuencial que detecta truncamiento."""

    def __init__(self, datos: bytes, ruta: Ruta = "<memoria>"):
        self.datos = datos
        self.ruta = ruta
        self.posicion = 0

    def leer_bytes(self, n: int, campo: str) -> bytes:
        if self.posicion + n > len(self.datos):
            raise ErrorFormatoArchivo(
                f"{self.ruta}: archivo truncado al leer '{campo}' "
                f"(se necesitan {n} bytes, quedan {len(self.datos) - self.posicion})")
        trozo = self.datos[self.posicion:self.posicion + n]
        self.posicion += n
        return trozo

    def leer_u32(self, campo: str) -> int:
        return int(np.frombuffer(self.leer_bytes(4, campo), dtype="<u4")[0])

    def leer_u64(self, campo: str) -> int:
        return int(np.frombuffer(self.leer_bytes(8, campo), dtype="<u8")[0])

    def leer_f8(self, n: int, campo: str) -> np.ndarray:
        return np.frombuffer(self.leer_bytes(8 * n, campo), dtype="<f8").astype(np.float64)

    def verificar_magic(self, esperado: bytes) -> None:
        magic = self.leer_bytes(len(esperado), "magic")
        if magic != esperado:
            raise ErrorFormatoArchivo(
                f"{self.ruta}: magic inválido {magic!r}, se esperaba {esperado!r}")

    def verificar_version(self, esperada: int) -> None:
        version = self.leer_u32("version")
        if version != esperada:
            raise ErrorFormatoArchivo(
                f"{self.ruta}: version {version} no soportada, se esperaba {esperada}")

    def verificar_fin(self) -> None:
        sobrante = len(self.datos) - self.posicion
        if sobrante:
            raise ErrorFormatoArchivo(f"{self.ruta}: {sobrante} bytes sobrantes al final")


def guardar_punto_control(ruta: Ruta, segmentos: Mapping[str, np.ndarray]) -> Path:
    """
    Escribe un diccionario {nombre: array} en formato MDLP.

    Returns:
        Path: Ruta escrita (crea directorios intermedios).
    """
    ruta = Path(ruta)
    ruta.parent.mkdir(parents=True, exist_ok=True)
    cabecera = [MAGIC_PUNTO_CONTROL, bytes_u32(VERSION_PUNTO_CONTROL), bytes_u32(len(segmentos))]
    datos = []
    for nombre, arr in segmentos.items():
        arr = np.asarray(arr, dtype=np.float64)
        nombre_b = nombre.encode("utf-8")
        cabecera += [bytes_u32(len(nombre_b)), nombre_b, bytes_u32(arr.ndim)]
        cabecera += [bytes_u64(d) for d in arr.shape]
        datos.append(bytes_f8(arr.ravel()))
    ruta.write_bytes(b"".join(cabecera + datos))
    return ruta


def cargar_punto_control(ruta: Ruta) -> Dict[str, np.ndarray]:
    """
    Lee un archivo MDLP.

    Raises:
        ErrorFormatoArchivo: magic, versión o tabla inválidos, o archivo truncado.
    """
    lector = LectorBinario(Path(ruta).read_bytes(), ruta)
    lector.verificar_magic(MAGIC_PUNTO_CONTROL)
    lector.verificar_version(VERSION_PUNTO_CONTROL)
    n_segmentos = lector.leer_u32("segment_count")

    tabla = []
    for k in range(n_segmentos):
        largo = lector.leer_u32(f"segment {k} name length")
        try:
            nombre = lector.leer_bytes(largo, f"segment {k} name").decode("utf-8")
        except UnicodeDecodeError as e:
            raise ErrorFormatoArchivo(f"{ruta}: nombre del segmento {k} no es utf-8") from e
        ndim = lector.leer_u32(f"segment '{nombre}' ndim")
        forma = tuple(lector.leer_u64(f"segment '{nombre}' shape") for _ in range(ndim))
        tabla.append((nombre, forma))

    segmentos = {}
    for nombre, forma in tabla:
        n = int(np.prod(forma)) if forma else 1
        segmentos[nombre] = lector.leer_f8(n, f"segment '{nombre}' data").reshape(forma)
    lector.verificar_fin()
    return segmentos
