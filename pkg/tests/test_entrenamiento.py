"""
Pruebas de integración del bucle de entrenamiento con configuraciones
diminutas (ocultas 8, M = 4, lote 8, 60 pasos).
"""

import json

import numpy as np
import pandas as pd
import pytest

from src.datos import ConjuntoObservacionesExperto, LoteTransiciones
from src.diagnosticos import COLUMNAS_DISTANCIA, distancias_ejecucion
from src.entornos import crear_entorno
from src.entrenamiento import (
    AgenteDistribucional,
    COLUMNAS_METRICAS,
    ROLES_ALEATORIOS,
    cargar_politica,
    entrenar,
    entrenar_experto_sac,
    entrenar_module,
    entrenar_sac_gailfo,
    evaluar,
    evaluar_politica,
    evaluar_politica_aleatoria,
    flujos_aleatorios,
    puntos_evaluacion,
    puntuacion_normalizada,
    recolectar_observaciones,
)
from src.parametros import ConfiguracionEntrenamiento
from src.puntos_control import cargar_punto_control


def _config(directorio, **cambios):
    base = dict(
        env_id="pointmass2d",
        total_steps=60,
        warmup_steps=20,
        batch_size=8,
        replay_capacity=1000,
        eval_interval=30,
        eval_episodes=1,
        hidden_size=8,
        num_quantiles=4,
        num_cosines=4,
        fraction_hidden=8,
        out_dir=str(directorio),
    )
    base.update(cambios)
    return ConfiguracionEntrenamiento(**base)


@pytest.fixture
def conjunto_sintetico():
    rng = np.random.default_rng(7)
    estados = rng.uniform(-1.0, 1.0, size=(50, 4))
    return ConjuntoObservacionesExperto(estados, estados + 0.01, "pointmass2d",
                                        ruido=0.01, retorno_medio=-300.0)


@pytest.fixture(scope="module")
def experto(tmp_path_factory):
    directorio = tmp_path_factory.mktemp("experto")
    return entrenar_experto_sac(_config(directorio), verbose=False)


# =============================================================================
# AUXILIARES
# =============================================================================

def test_puntos_evaluacion():
    assert puntos_evaluacion(60, 30) == [30, 60]
    assert puntos_evaluacion(70, 30) == [30, 60, 70]
    assert puntos_evaluacion(20, 30) == [20]
    assert puntos_evaluacion(0, 30) == []


def test_flujos_aleatorios_reproducibles_e_independientes():
    a, b = flujos_aleatorios(3), flujos_aleatorios(3)
    assert set(a) == set(ROLES_ALEATORIOS)
    for rol in ROLES_ALEATORIOS:
        assert np.array_equal(a[rol].random(5), b[rol].random(5))
    c = flujos_aleatorios(3)
    assert not np.array_equal(c["lotes"].random(5), c["objetivos"].random(5))


def test_puntuacion_normalizada():
    assert puntuacion_normalizada(-50.0, -100.0, 0.0) == pytest.approx(0.5)
    assert puntuacion_normalizada(0.0, -100.0, 0.0) == pytest.approx(1.0)
    with pytest.raises(ValueError, match="escala nula"):
        puntuacion_normalizada(1.0, 2.0, 2.0)


def test_evaluacion_aleatoria_un_episodio():
    media, desv = evaluar_politica_aleatoria(crear_entorno("pointmass2d"), 1, semilla=0)
    assert np.isfinite(media)
    assert desv == 0.0
    with pytest.raises(ValueError):
        evaluar_politica_aleatoria(crear_entorno("pointmass2d"), 0, semilla=0)


# =============================================================================
# EXPERTO SAC
# =============================================================================

def test_experto_artefactos(experto):
    directorio = experto.directorio
    assert (directorio / "config.json").exists()
    assert (directorio / "final_eval.json").exists()
    metricas = pd.read_csv(directorio / "metrics.csv")
    assert list(metricas.columns) == COLUMNAS_METRICAS
    assert metricas["step"].tolist() == [30, 60]
    assert metricas["reward_loss"].isna().all()
    assert np.isfinite(metricas["critic1_loss"]).all()
    assert np.isfinite(metricas["policy_loss"]).all()
    assert (metricas["alpha"] > 0).all()
    assert [p.name for p in experto.puntos_control] == ["step_30.mdlp", "step_60.mdlp"]

    resumen = json.loads((directorio / "final_eval.json").read_text(encoding="utf-8"))
    assert resumen["algo"] == "sac"
    assert resumen["step"] == 60
    assert resumen["expert_return"] == pytest.approx(experto.evaluacion_final[0])


def test_experto_segmentos(experto):
    segmentos = cargar_punto_control(experto.puntos_control[-1])
    prefijos = {nombre.split("/", 1)[0] for nombre in segmentos}
    assert {"actor", "actor_target", "log_alpha", "critic1", "critic2",
            "critic1_target", "critic2_target"} <= prefijos
    assert "reward" not in prefijos
    assert segmentos["log_alpha"].shape == (1,)


def test_evaluar_punto_control_reproducible(experto):
    entorno = crear_entorno("pointmass2d")
    a = evaluar(experto.puntos_control[-1], entorno, 1, semilla=5)
    b = evaluar(experto.puntos_control[-1], entorno, 1, semilla=5)
    assert a == b
    assert a[1] == 0.0


def test_cargar_politica_entorno_incompatible(experto):
    with pytest.raises(ValueError, match="no coincide"):
        cargar_politica(experto.puntos_control[-1], crear_entorno("pendulum").espec)


def test_recolectar_observaciones_dos_episodios(experto):
    entorno = crear_entorno("pointmass2d")
    conjunto = recolectar_observaciones(experto.puntos_control[-1], entorno, 400,
                                        ruido=0.0, semilla=3)
    assert len(conjunto) == 400
    assert conjunto.id_entorno == "pointmass2d"
    assert np.isfinite(conjunto.retorno_medio)
    # cadena continua dentro de cada episodio de 200 pasos
    assert np.allclose(conjunto.estados_sig[:199], conjunto.estados[1:200])
    assert np.allclose(conjunto.estados_sig[200:399], conjunto.estados[201:400])

    theta = cargar_politica(experto.puntos_control[-1], entorno.espec)
    media, _ = evaluar_politica(theta, entorno, 2, semilla=3)
    assert conjunto.retorno_medio == pytest.approx(media)

    otro = recolectar_observaciones(experto.puntos_control[-1], entorno, 400,
                                    ruido=0.0, semilla=3)
    assert np.array_equal(conjunto.estados, otro.estados)


def test_recolectar_observaciones_validacion(experto):
    entorno = crear_entorno("pointmass2d")
    with pytest.raises(ValueError):
        recolectar_observaciones(experto.puntos_control[-1], entorno, 0)
    with pytest.raises(ValueError, match="noise_std"):
        recolectar_observaciones(experto.puntos_control[-1], entorno, 10, ruido=-0.1)


# =============================================================================
# IMITACIÓN
# =============================================================================

def test_module_determinista(tmp_path, conjunto_sintetico):
    a = entrenar_module(_config(tmp_path / "a"), conjunto_sintetico, verbose=False)
    b = entrenar_module(_config(tmp_path / "b"), conjunto_sintetico, verbose=False)
    pd.testing.assert_frame_equal(pd.read_csv(a.ruta_metricas), pd.read_csv(b.ruta_metricas))
    assert a.evaluacion_final == b.evaluacion_final


@pytest.mark.parametrize("modo", ["qrdqn", "iqn", "fqf"])
def test_module_por_modo_de_fracciones(tmp_path, conjunto_sintetico, modo):
    config = _config(tmp_path, fraction_mode=modo, risk_measure="cvar", beta=0.5)
    artefactos = entrenar_module(config, conjunto_sintetico, verbose=False)
    metricas = artefactos.metricas
    assert list(metricas.columns) == COLUMNAS_METRICAS
    assert np.isfinite(metricas["reward_loss"]).all()
    assert np.isfinite(metricas["critic2_loss"]).all()

    segmentos = cargar_punto_control(artefactos.puntos_control[-1])
    prefijos = {nombre.split("/", 1)[0] for nombre in segmentos}
    assert "reward" in prefijos
    assert ("fqf_proposal" in prefijos) == (modo == "fqf")
    assert any(nombre.startswith("critic1/psi.") for nombre in segmentos)

    resumen = json.loads((tmp_path / "final_eval.json").read_text(encoding="utf-8"))
    assert resumen["algo"] == "module"
    assert resumen["expert_return"] == pytest.approx(-300.0)


def test_module_recompensa_antes_que_politica(tmp_path, conjunto_sintetico):
    artefactos = entrenar_module(_config(tmp_path), conjunto_sintetico, verbose=False)
    historial = artefactos.historial
    assert len(historial["iteracion"]) > 0
    assert historial["version_recompensa"] == historial["version_leida_politica"]
    # una actualización de r_φ por iteración tras el calentamiento
    assert historial["version_recompensa"][-1] == 60 - 20 + 1


@pytest.mark.parametrize("capacidad, esperado", [(1000, 60), (40, 40)])
def test_tamano_buffer(tmp_path, conjunto_sintetico, capacidad, esperado):
    config = _config(tmp_path, replay_capacity=capacidad)
    artefactos = entrenar_sac_gailfo(config, conjunto_sintetico, verbose=False)
    assert artefactos.metricas["buffer_size"].tolist() == [30, esperado]


@pytest.mark.parametrize("modo", ["qrdqn", "iqn", "fqf"])
def test_objetivos_siguen_el_promedio_de_polyak(tmp_path, modo):
    config = _config(tmp_path, fraction_mode=modo, iota=0.3)
    espec = crear_entorno("pointmass2d").espec
    agente = AgenteDistribucional(config, espec, np.random.default_rng(0))
    rngs = flujos_aleatorios(5)
    rng = np.random.default_rng(9)
    B = config.batch_size
    lote = LoteTransiciones(
        estados=rng.uniform(-1.0, 1.0, (B, espec.dim_estado)),
        acciones=rng.uniform(espec.accion_min, espec.accion_max, (B, espec.dim_accion)),
        recompensas_entorno=np.zeros(B),
        estados_sig=rng.uniform(-1.0, 1.0, (B, espec.dim_estado)),
        terminados=np.zeros(B, dtype=bool),
    )
    sombra_w1 = agente.objetivo.w1.valores.copy()
    sombra_w2 = agente.objetivo.w2.valores.copy()
    sombra_theta = agente.theta_bar.params.valores.copy()

    for _ in range(4):
        agente.actualizar(lote, rng.normal(size=B), rngs)
        sombra_w1 = 0.3 * agente.criticos.w1.valores + 0.7 * sombra_w1
        sombra_w2 = 0.3 * agente.criticos.w2.valores + 0.7 * sombra_w2
        sombra_theta = 0.3 * agente.theta.params.valores + 0.7 * sombra_theta
        np.testing.assert_allclose(agente.objetivo.w1.valores, sombra_w1, rtol=0, atol=1e-12)
        np.testing.assert_allclose(agente.objetivo.w2.valores, sombra_w2, rtol=0, atol=1e-12)
        np.testing.assert_allclose(agente.theta_bar.params.valores, sombra_theta, rtol=0, atol=1e-12)

    assert not np.allclose(agente.objetivo.w1.valores, agente.criticos.w1.valores)
    assert not np.allclose(agente.theta_bar.params.valores, agente.theta.params.valores)


def test_sac_gailfo_sin_cuantiles(tmp_path, conjunto_sintetico):
    artefactos = entrenar_sac_gailfo(_config(tmp_path), conjunto_sintetico, verbose=False)
    segmentos = cargar_punto_control(artefactos.puntos_control[-1])
    assert "reward" in {nombre.split("/", 1)[0] for nombre in segmentos}
    assert not any(nombre.startswith("critic1/psi.") for nombre in segmentos)
    assert json.loads((tmp_path / "config.json").read_text(encoding="utf-8"))["algo"] == "sac-gailfo"


def test_module_y_sac_gailfo_comparten_la_recompensa(tmp_path, conjunto_sintetico):
    # hasta el fin del calentamiento ambas ejecuciones ven el mismo buffer
    cambios = dict(total_steps=20, warmup_steps=20, eval_interval=20)
    module = entrenar_module(_config(tmp_path / "module", **cambios), conjunto_sintetico,
                             verbose=False)
    gailfo = entrenar_sac_gailfo(_config(tmp_path / "gailfo", **cambios), conjunto_sintetico,
                                 verbose=False)

    perdida_module = module.metricas["reward_loss"].to_numpy()
    perdida_gailfo = gailfo.metricas["reward_loss"].to_numpy()
    assert len(perdida_module) == 1
    assert np.isfinite(perdida_module[0])
    assert perdida_module[0] == perdida_gailfo[0]

    seg_module = cargar_punto_control(module.puntos_control[-1])
    seg_gailfo = cargar_punto_control(gailfo.puntos_control[-1])
    nombres = sorted(k for k in seg_module if k.startswith("reward/"))
    assert nombres == sorted(k for k in seg_gailfo if k.startswith("reward/"))
    for nombre in nombres:
        assert np.array_equal(seg_module[nombre], seg_gailfo[nombre])


def test_intervalo_puntos_control(tmp_path, conjunto_sintetico):
    config = _config(tmp_path, checkpoint_interval=20)
    artefactos = entrenar_module(config, conjunto_sintetico, verbose=False)
    assert [p.name for p in artefactos.puntos_control] == [
        "step_20.mdlp", "step_40.mdlp", "step_60.mdlp"]


def test_entrenar_despacho_y_validacion(tmp_path, conjunto_sintetico):
    with pytest.raises(ValueError, match="requiere observaciones"):
        entrenar(_config(tmp_path), None, verbose=False)

    otro_entorno = ConjuntoObservacionesExperto(np.zeros((5, 3)), np.zeros((5, 3)), "pendulum")
    with pytest.raises(ValueError, match="pendulum"):
        entrenar(_config(tmp_path), otro_entorno, verbose=False)

    vacio = ConjuntoObservacionesExperto(np.zeros((0, 4)), np.zeros((0, 4)), "pointmass2d")
    with pytest.raises(ValueError, match="vacío"):
        entrenar(_config(tmp_path), vacio, verbose=False)


# =============================================================================
# DIAGNÓSTICOS DE UNA EJECUCIÓN
# =============================================================================

def test_distancias_ejecucion(tmp_path, conjunto_sintetico):
    entrenar_module(_config(tmp_path), conjunto_sintetico, verbose=False)
    tabla = distancias_ejecucion(tmp_path, conjunto_sintetico, episodios=1, n_celdas=4)

    assert list(tabla.columns) == COLUMNAS_DISTANCIA
    assert tabla["checkpoint_step"].tolist() == [30, 60]
    assert (tabla["lfo_reward_distance"] >= 0).all()
    assert np.isfinite(tabla["state_transition_error"]).all()
    assert (tabla["coefficient"] > 0).all()

    en_disco = pd.read_csv(tmp_path / "distance.csv")
    assert list(en_disco.columns) == COLUMNAS_DISTANCIA
    meta = json.loads((tmp_path / "distance_meta.json").read_text(encoding="utf-8"))
    assert meta["env_id"] == "pointmass2d"
    assert meta["bins_per_axis"] == 4
    assert meta["projection"] == [0, 1, 0, 1]
    assert tabla["state_transition_error"].is_monotonic_decreasing
    assert meta["state_transition_error_min"] == pytest.approx(tabla["state_transition_error"].iloc[-1])
    assert sorted(meta["agent_out_of_grid"]) == ["30", "60"]
    assert all(isinstance(n, int) and n >= 0 for n in meta["agent_out_of_grid"].values())
    assert meta["expert_out_of_grid"] >= 0


def test_distancias_sin_recompensa(experto, conjunto_sintetico):
    with pytest.raises(ValueError, match="recompensa"):
        distancias_ejecucion(experto.directorio, conjunto_sintetico, episodios=1, n_celdas=4)
