"""Pruebas del buffer de repetición y de las observaciones del experto."""

import numpy as np
import pandas as pd
import pytest

from src.datos import (
    BufferRepeticion,
    ConjuntoObservacionesExperto,
    Transicion,
    cargar_observaciones,
    exportar_observaciones_csv,
    guardar_observaciones,
    muestrear_lote,
    muestrear_pares,
)
from src.puntos_control import ErrorFormatoArchivo


def _transicion(k, dim_estado=2, dim_accion=1):
    return Transicion(np.full(dim_estado, float(k)), np.full(dim_accion, -float(k)),
                      np.full(dim_estado, k + 0.5), terminado=(k % 2 == 0))


def test_fifo_capacidad_dos():
    buffer = BufferRepeticion(2, 2, 1)
    for k in (1, 2, 3):
        buffer.agregar(_transicion(k))
    contenido = buffer.contenido()
    assert len(buffer) == 2
    assert [t.s[0] for t in contenido] == [2.0, 3.0]


def test_primer_elemento():
    buffer = BufferRepeticion(5, 2, 1)
    buffer.agregar(_transicion(1))
    assert buffer.cuenta == 1
    assert buffer.contenido()[0].r_entorno is None


def test_conserva_las_ultimas_en_orden():
    buffer = BufferRepeticion(1000, 1, 1)
    todas = list(range(10_000))
    for k in todas:
        buffer.agregar(_transicion(k, 1, 1))
    assert len(buffer) == 1000
    assert [t.s[0] for t in buffer.contenido()] == [float(k) for k in todas[-1000:]]


def test_dimension_incompatible():
    buffer = BufferRepeticion(4, 2, 1)
    with pytest.raises(ValueError):
        buffer.agregar(_transicion(0, dim_estado=3))
    with pytest.raises(ValueError):
        buffer.agregar(_transicion(0, dim_accion=2))
    with pytest.raises(ValueError):
        BufferRepeticion(0, 2, 1)


def test_muestreo_de_un_elemento(rng):
    buffer = BufferRepeticion(3, 2, 1)
    buffer.agregar(_transicion(7))
    lote = muestrear_lote(buffer, rng, 4)
    assert len(lote) == 4
    assert np.all(lote.estados == 7.0)
    assert np.all(lote.terminados == False)  # noqa: E712


def test_muestreo_determinista():
    buffer = BufferRepeticion(10, 2, 1)
    for k in range(10):
        buffer.agregar(_transicion(k))
    a = muestrear_lote(buffer, np.random.default_rng(5), 16)
    b = muestrear_lote(buffer, np.random.default_rng(5), 16)
    assert np.array_equal(a.estados, b.estados)


def test_muestreo_uniforme():
    buffer = BufferRepeticion(10, 1, 1)
    for k in range(10):
        buffer.agregar(_transicion(k, 1, 1))
    lote = muestrear_lote(buffer, np.random.default_rng(0), 100_000)
    frecuencias = np.bincount(lote.estados[:, 0].astype(int), minlength=10) / 100_000
    assert np.all(np.abs(frecuencias - 0.1) < 0.01)


def test_buffer_vacio(rng):
    with pytest.raises(ValueError, match="vacío"):
        muestrear_lote(BufferRepeticion(3, 2, 1), rng, 1)


def test_recompensa_del_entorno_se_conserva(rng):
    buffer = BufferRepeticion(3, 2, 1)
    buffer.agregar(Transicion(np.zeros(2), np.zeros(1), np.ones(2), False, r_entorno=-1.5))
    assert muestrear_lote(buffer, rng, 1).recompensas_entorno[0] == -1.5


@pytest.fixture
def conjunto(rng):
    return ConjuntoObservacionesExperto(rng.normal(size=(100, 4)), rng.normal(size=(100, 4)),
                                        "pointmass2d", ruido=0.01, retorno_medio=-123.5)


def test_guardar_y_cargar_observaciones(tmp_path, conjunto):
    ruta = guardar_observaciones(conjunto, tmp_path / "expert.modl")
    cargado = cargar_observaciones(ruta, dim_estado_esperada=4)
    assert np.array_equal(cargado.estados, conjunto.estados)
    assert np.array_equal(cargado.estados_sig, conjunto.estados_sig)
    assert cargado.id_entorno == "pointmass2d"
    assert cargado.ruido == 0.01
    assert cargado.retorno_medio == -123.5


def test_observaciones_truncadas(tmp_path, conjunto):
    ruta = guardar_observaciones(conjunto, tmp_path / "expert.modl")
    ruta.write_bytes(ruta.read_bytes()[:-8])
    with pytest.raises(ErrorFormatoArchivo, match="truncado"):
        cargar_observaciones(ruta)


def test_dimension_de_estado_incompatible(tmp_path, conjunto):
    ruta = guardar_observaciones(conjunto, tmp_path / "expert.modl")
    with pytest.raises(ErrorFormatoArchivo, match="state_dim"):
        cargar_observaciones(ruta, dim_estado_esperada=3)


def test_magic_de_observaciones(tmp_path, conjunto):
    ruta = guardar_observaciones(conjunto, tmp_path / "expert.modl")
    ruta.write_bytes(b"MDLP" + ruta.read_bytes()[4:])
    with pytest.raises(ErrorFormatoArchivo, match="magic"):
        cargar_observaciones(ruta)


def test_env_id_no_utf8(tmp_path, conjunto):
    ruta = guardar_observaciones(conjunto, tmp_path / "expert.modl")
    contenido = bytearray(ruta.read_bytes())
    # magic, version, state_dim, pair_count y largo del id ocupan 24 bytes
    contenido[24] = 0xFF
    ruta.write_bytes(bytes(contenido))
    with pytest.raises(ErrorFormatoArchivo, match="env_id"):
        cargar_observaciones(ruta)


def test_muestrear_pares(conjunto, rng):
    lote = muestrear_pares(conjunto, rng, 8)
    assert lote.estados.shape == (8, 4)
    filas = {tuple(s) for s in conjunto.estados}
    assert all(tuple(s) in filas for s in lote.estados)


def test_exportar_csv(tmp_path, conjunto):
    ruta = exportar_observaciones_csv(conjunto, tmp_path / "expert.csv")
    df = pd.read_csv(ruta)
    assert list(df.columns) == ["s0", "s1", "s2", "s3", "s_next0", "s_next1", "s_next2", "s_next3"]
    assert len(df) == 100
    assert df["s_next2"].to_numpy() == pytest.approx(conjunto.estados_sig[:, 2])
