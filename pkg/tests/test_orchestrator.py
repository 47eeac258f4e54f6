import json

import pandas as pd
import pytest

import orchestrator
from conftest import CONFIG_PATH
from scene_mmkg.config import PipelineConfig, apply_overrides, parse_overrides
from scene_mmkg.providers.settings import PROVIDER_ENV_VAR
from scene_mmkg.shared.exceptions import ConfigurationError


def cli(*args, output_dir=None):
    argv = [args[0], "--config", str(CONFIG_PATH), *args[1:]]
    if output_dir is not None:
        argv.append(f"--output_dir={output_dir}")
    return orchestrator.main(argv)


def read_tree(root):
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


@pytest.fixture(autouse=True)
def fixture_providers(monkeypatch):
    monkeypatch.delenv(PROVIDER_ENV_VAR, raising=False)


@pytest.fixture(scope="module")
def built(tmp_path_factory):
    """Output directory of one full kitchen run"""
    output_dir = tmp_path_factory.mktemp("build")
    with pytest.MonkeyPatch.context() as mp:
        mp.delenv(PROVIDER_ENV_VAR, raising=False)
        assert cli("run", output_dir=output_dir) == 0
    return output_dir


def last_json(capsys):
    return json.loads(capsys.readouterr().out)


def test_run_writes_every_artifact(built):
    names = {p.name for p in built.iterdir()}

    assert {"schema.json", "graph", "refined", "qcr_report.json", "rejects.jsonl",
            "attribute_cdf_before.csv", "attribute_cdf_after.csv"} <= names
    assert len((built / "rejects.jsonl").read_text(encoding="utf-8").splitlines()) == 4


def test_run_is_reproducible(built, tmp_path):
    assert cli("run", output_dir=tmp_path) == 0

    assert read_tree(tmp_path) == read_tree(built)


def test_refined_graph_is_no_larger(built, capsys):
    assert cli("stats", "--graph", str(built / "graph"), output_dir=built) == 0
    populated = last_json(capsys)["stats"]
    assert cli("stats", output_dir=built) == 0
    refined = last_json(capsys)

    assert populated["edges"] == 28
    assert refined["stats"]["edges"] <= populated["edges"]
    assert refined["build_log"][-1]["stage"] == "qcr"


def test_stats_on_empty_directory(tmp_path, capsys):
    assert cli("stats", "--graph", str(tmp_path), output_dir=tmp_path) == 2

    error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert error["error"] == "ConfigurationError"
    assert error["exit_code"] == 2


def test_retrieve_single_anchor(built, capsys):
    assert cli("retrieve", "--query", "mug", "--k", "1", output_dir=built) == 0

    result = last_json(capsys)
    assert [a["label"] for a in result["subgraph"]["anchors"]] == ["mug"]
    assert result["query"]["k"] == 1
    assert result["query"]["gamma3"] == 0.3


def test_retrieve_reports_what_images_were_denoised_against(built, capsys):
    assert cli("retrieve", "--query", "kettle", "--k", "1", output_dir=built) == 0
    from_query = last_json(capsys)
    assert cli("retrieve", "--observation", "kettle", "--k", "1", output_dir=built) == 0
    from_observation = last_json(capsys)

    assert from_query["query"]["denoise_with"] == "query"
    assert from_observation["query"]["denoise_with"] == "observation"
    assert from_observation["query"]["text"] is None
    assert from_query["subgraph"] == from_observation["subgraph"]


def test_retrieve_rejects_out_of_range_gamma3(built):
    assert cli("retrieve", "--query", "mug", "--gamma3", "2.5", output_dir=built) == 2


def test_encode_writes_features(built, tmp_path, capsys):
    output = tmp_path / "features.csv"

    assert cli("encode", "--query", "mug", "--k", "1", "--output", str(output), output_dir=built) == 0

    result = last_json(capsys)
    frame = pd.read_csv(output)
    assert result["shape"][1] == 8
    assert len(frame) == result["shape"][0]
    assert list(frame.columns[:2]) == ["node_id", "label"]


def test_encode_pools_anchor_rows(built, capsys):
    assert cli("encode", "--query", "kettle", "--k", "1", "--pool", output_dir=built) == 0

    features = last_json(capsys)["features"]
    assert len(features["pooled"]) == 8


def test_export_scene_triples_as_csv(built, tmp_path, capsys):
    output = tmp_path / "scene.csv"

    assert cli("export", "--format", "csv", "--source", "scene", "--output", str(output), output_dir=built) == 0

    frame = pd.read_csv(output)
    assert last_json(capsys)["counts"]["triples"] == len(frame) > 0
    assert set(frame["source"]) == {"scene"}


def test_export_entity_sample_as_graph(built, tmp_path, capsys):
    output = tmp_path / "sample"

    assert cli("export", "--entities", "mug,chair", "--output", str(output), output_dir=built) == 0

    assert last_json(capsys)["counts"]["triples"] > 0
    assert (output / "manifest.json").is_file()
    assert cli("export", "--entities", "carburetor", "--output", str(tmp_path / "x"), output_dir=built) == 4


def test_threshold_out_of_range_is_a_configuration_error(tmp_path):
    assert cli("schema", "--thresholds.gamma1=1.5", output_dir=tmp_path) == 2
    assert not (tmp_path / "schema.json").exists()


def test_corrupted_graph_exits_with_graph_error(built, tmp_path, capsys):
    assert cli("run", output_dir=tmp_path) == 0
    capsys.readouterr()
    triples = tmp_path / "refined" / "triples.jsonl"
    data = bytearray(triples.read_bytes())
    data[10] = ord("x") if data[10] != ord("x") else ord("y")
    triples.write_bytes(bytes(data))

    assert cli("stats", output_dir=tmp_path) == 4

    error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert error["error"] == "CorruptionError"


def test_unreachable_llm_endpoint_exits_with_provider_error(tmp_path):
    overrides = ["--providers.llm.mode=http", "--providers.llm.endpoint=http://127.0.0.1:9",
                 "--providers.llm.max_retries=0", "--providers.llm.timeout_ms=200"]

    assert cli("schema", *overrides, output_dir=tmp_path) == 3


def test_populate_needs_a_schema(tmp_path):
    assert cli("populate", output_dir=tmp_path) == 2


def test_parse_overrides():
    tokens = ["--thresholds.gamma1=0.8", "--providers.llm.mode", "http", "--retrieval.k", "5",
              "--logging.dir="]

    assert parse_overrides(tokens) == [("thresholds.gamma1", 0.8), ("providers.llm.mode", "http"),
                                       ("retrieval.k", 5), ("logging.dir", "")]
    with pytest.raises(ConfigurationError):
        parse_overrides(["gamma1"])
    with pytest.raises(ConfigurationError):
        parse_overrides(["--retrieval.k"])


def test_apply_overrides_copies_and_creates_sections():
    data = {"thresholds": {"gamma1": 0.7}}

    result = apply_overrides(data, [("thresholds.gamma2", 0.5), ("expansion.max_depth", 1)])

    assert result == {"thresholds": {"gamma1": 0.7, "gamma2": 0.5}, "expansion": {"max_depth": 1}}
    assert data == {"thresholds": {"gamma1": 0.7}}
    with pytest.raises(ConfigurationError):
        apply_overrides(data, [("gamma9", 1)])
    with pytest.raises(ConfigurationError):
        apply_overrides(data, [("thresholds.gamma1.low", 1)])


def test_config_resolves_paths_against_its_directory():
    config = PipelineConfig.from_file(str(CONFIG_PATH))

    assert config.files["general_records"] == (CONFIG_PATH.parent / "../data/kitchen/general.jsonl").resolve()
    assert config.output_dir.name == "build"
    assert config.gamma3 == 0.3
    assert config.k == 3
    assert config.require("template")["template"].is_file()


def test_config_rejects_unknown_fields_and_bad_integers():
    with pytest.raises(ConfigurationError):
        PipelineConfig.from_file(str(CONFIG_PATH), [("retrieval.k", 0)])
    with pytest.raises(ConfigurationError):
        PipelineConfig.from_file(str(CONFIG_PATH), [("expansion.max_depth", "deep")])
    with pytest.raises(ConfigurationError):
        PipelineConfig.from_mapping({"providers": {}}, CONFIG_PATH.parent)


def test_provider_environment_overrides_mode(monkeypatch):
    monkeypatch.setenv(PROVIDER_ENV_VAR, "http")

    with pytest.raises(ConfigurationError):
        PipelineConfig.from_file(str(CONFIG_PATH))
