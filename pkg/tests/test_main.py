"""Pruebas de la CLI: códigos de salida y pipeline completo."""

import json

import pandas as pd
import pytest

from main import FLAGS_SOLO_CLI, construir_parser, configuracion_efectiva, main

CONFIG_DIMINUTA = {
    "env_id": "pointmass2d",
    "total_steps": 60,
    "warmup_steps": 20,
    "batch_size": 8,
    "replay_capacity": 1000,
    "eval_interval": 30,
    "eval_episodes": 1,
    "hidden_size": 8,
    "num_quantiles": 4,
    "num_cosines": 4,
    "fraction_hidden": 8,
}


def _escribir_config(ruta, **cambios):
    datos = dict(CONFIG_DIMINUTA)
    datos.update(cambios)
    ruta.write_text(json.dumps(datos), encoding="utf-8")
    return str(ruta)


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """Experto, observaciones y una ejecución MODULE por la CLI."""
    raiz = tmp_path_factory.mktemp("cli")
    config = _escribir_config(raiz / "config.json")
    experto = raiz / "experto"
    codigos = {}
    codigos["train-expert"] = main(["train-expert", "--config", config, "--out", str(experto),
                                    "--silencioso"])
    codigos["collect"] = main(["collect", "--checkpoint", str(experto / "checkpoints" / "step_60.mdlp"),
                               "--pairs", "50", "--out", str(raiz / "expert.modl"),
                               "--csv", str(raiz / "expert.csv"), "--silencioso"])
    codigos["train"] = main(["train", "--config", config, "--algo", "module",
                             "--expert-data", str(raiz / "expert.modl"), "--seed", "2",
                             "--risk-measure", "wang", "--beta", "0.75",
                             "--out", str(raiz / "m0"), "--silencioso"])
    return raiz, codigos


def test_pipeline_codigos_cero(pipeline):
    _, codigos = pipeline
    assert codigos == {"train-expert": 0, "collect": 0, "train": 0}


def test_pipeline_configuracion_efectiva(pipeline):
    raiz, _ = pipeline
    efectiva = json.loads((raiz / "m0" / "config.json").read_text(encoding="utf-8"))
    assert efectiva["seed"] == 2
    assert efectiva["hidden_size"] == 8
    assert efectiva["risk_measure"] == "wang"
    assert efectiva["beta"] == 0.75
    assert efectiva["algo"] == "module"
    assert json.loads((raiz / "experto" / "config.json").read_text(encoding="utf-8"))["algo"] == "sac"


def test_pipeline_csv_observaciones(pipeline):
    raiz, _ = pipeline
    tabla = pd.read_csv(raiz / "expert.csv")
    assert len(tabla) == 50
    assert list(tabla.columns) == ["s0", "s1", "s2", "s3",
                                   "s_next0", "s_next1", "s_next2", "s_next3"]


def test_eval_imprime_json(pipeline, capsys):
    raiz, _ = pipeline
    capsys.readouterr()
    codigo = main(["eval", "--checkpoint", str(raiz / "m0" / "checkpoints" / "step_60.mdlp"),
                   "--env", "pointmass2d", "--eval-episodes", "2", "--silencioso"])
    assert codigo == 0
    salida = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert salida["episodes"] == 2
    assert set(salida) == {"eval_return_mean", "eval_return_std", "episodes"}


def test_distance(pipeline):
    raiz, _ = pipeline
    codigo = main(["distance", "--run-dir", str(raiz / "m0"), "--expert-data",
                   str(raiz / "expert.modl"), "--episodes", "1", "--bins", "4", "--silencioso"])
    assert codigo == 0
    assert (raiz / "m0" / "distance.csv").exists()
    assert (raiz / "m0" / "distance_meta.json").exists()


# =============================================================================
# CÓDIGOS DE ERROR
# =============================================================================

@pytest.mark.parametrize("argv", [
    [],
    ["train", "--flag-desconocida"],
    ["entrenar"],
    ["eval"],
    ["train", "--risk-measure", "optimista"],
])
def test_error_de_uso(argv, capsys):
    assert main(argv) == 1
    assert capsys.readouterr().err


def test_train_sin_observaciones(tmp_path, capsys):
    assert main(["train", "--algo", "module", "--out", str(tmp_path)]) == 1
    assert "--expert-data" in capsys.readouterr().err


def test_configuracion_invalida(tmp_path, capsys):
    config = _escribir_config(tmp_path / "config.json", gamma=1.5)
    assert main(["train-expert", "--config", config, "--out", str(tmp_path / "x")]) == 1
    assert "gamma" in capsys.readouterr().err


def test_beta_invalido_por_flag(tmp_path, capsys):
    argv = ["train", "--risk-measure", "cvar", "--beta", "1.5", "--expert-data", "x.modl",
            "--out", str(tmp_path)]
    assert main(argv) == 1
    assert "beta" in capsys.readouterr().err


def test_json_mal_formado(tmp_path, capsys):
    ruta = tmp_path / "config.json"
    ruta.write_text("{gamma: ", encoding="utf-8")
    assert main(["train-expert", "--config", str(ruta)]) == 1
    assert "JSON mal formado" in capsys.readouterr().err


def test_fallo_en_ejecucion(tmp_path):
    assert main(["eval", "--checkpoint", str(tmp_path / "no_existe.mdlp"), "--silencioso"]) == 2


def test_observaciones_inexistentes(tmp_path):
    config = _escribir_config(tmp_path / "config.json")
    argv = ["train", "--config", config, "--expert-data", str(tmp_path / "no_existe.modl"),
            "--out", str(tmp_path / "run"), "--silencioso"]
    assert main(argv) == 2


def test_flags_sobre_archivo(tmp_path):
    config = _escribir_config(tmp_path / "config.json", seed=4)
    args = construir_parser().parse_args(["train", "--config", config, "--steps", "90"])
    efectiva = configuracion_efectiva(args)
    assert efectiva.total_steps == 90
    assert efectiva.seed == 4
    assert efectiva.hidden_size == 8


@pytest.mark.parametrize("nombre, tipo, beta", [
    ("risk-averse/wang", "wang", 0.75),
    ("risk-averse/cvar", "cvar", 0.25),
    ("risk-seeking/mean-variance", "mean-variance", -0.1),
])
def test_preset_de_riesgo_fija_medida_y_beta(nombre, tipo, beta):
    args = construir_parser().parse_args(["train", "--risk-measure", nombre])
    efectiva = configuracion_efectiva(args)
    assert efectiva.risk_measure == tipo
    assert efectiva.beta == beta


def test_beta_explicito_sobre_el_preset():
    args = construir_parser().parse_args(["train", "--risk-measure", "risk-averse/cvar",
                                          "--beta", "0.5"])
    efectiva = configuracion_efectiva(args)
    assert (efectiva.risk_measure, efectiva.beta) == ("cvar", 0.5)


def test_preset_inexistente(capsys):
    assert main(["train", "--risk-measure", "risk-seeking/cvar"]) == 1
    assert capsys.readouterr().err


def test_ayuda_nombra_los_flags_solo_cli(capsys):
    ayuda = construir_parser().format_help()
    assert "solo de línea de comandos" in ayuda
    for flag in FLAGS_SOLO_CLI:
        assert flag in ayuda

    with pytest.raises(SystemExit):
        main(["distance", "--help"])
    salida = capsys.readouterr().out
    assert "solo de línea de comandos" in salida
    assert "--bins" in salida
