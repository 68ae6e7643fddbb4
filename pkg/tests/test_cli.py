import json

import pytest
from click.testing import CliRunner

from coverdiam.cli import (
    ExperimentConfig,
    Report,
    emit,
    main,
    run,
    sweep_base_graph,
    sweep_instance,
)


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture(scope="module")
def data_dir():
    import importlib.resources

    return importlib.resources.files("coverdiam").joinpath("data")


# ------------------------------------------------------------ emit/run


def test_emit_empty_report_csv():
    rep = Report(("a", "b"), [], {})
    assert emit(rep, "csv") == b"a,b\n"


def test_emit_single_row():
    rep = Report(("a", "b"), [{"a": 1, "b": 0.123456789012345}], {})
    assert emit(rep, "csv") == b"a,b\n1,0.123456789012\n"


def test_emit_json_roundtrip():
    config = ExperimentConfig(command="sweep-cover", seed=7, count=5)
    rep = run(config)
    parsed = json.loads(emit(rep, "json").decode())
    assert parsed["columns"] == list(rep.columns)
    assert len(parsed["rows"]) == 5
    # reparsing and re-serialising is stable
    again = json.dumps(parsed, indent=2) + "\n"
    assert again.encode() == emit(rep, "json")


def test_run_deterministic_bytes():
    config = ExperimentConfig(command="sweep-cover", seed=42, count=10)
    b1 = emit(run(config), "json")
    b2 = emit(run(config), "json")
    assert b1 == b2
    c1 = emit(run(config), "csv")
    c2 = emit(run(config), "csv")
    assert c1 == c2


def test_sweep_no_silent_skips():
    rep = run(ExperimentConfig(command="sweep-cover", seed=3, count=17))
    assert len(rep.rows) == 17
    assert all(r["status"] in ("PASS", "FAIL", "ERROR") for r in rep.rows)
    assert all(r["repro"] for r in rep.rows)


def test_sweep_rows_all_pass_and_sorted():
    rep = run(ExperimentConfig(command="sweep-cover", seed=11, count=15))
    assert [r["instance"] for r in rep.rows] == list(range(15))
    assert rep.summary["pass"] == 15
    assert rep.summary["fail"] == 0


def test_sweep_instances_reproducible_by_index():
    g1 = sweep_base_graph(5, 9)
    g2 = sweep_base_graph(5, 9)
    assert g1.to_json_dict() == g2.to_json_dict()
    _, v1, _, r1 = sweep_instance(5, 9)
    _, v2, _, r2 = sweep_instance(5, 9)
    assert v1.assignment == v2.assignment
    assert r1 == r2


def test_sweep_respects_size_limits():
    for i in range(30):
        g = sweep_base_graph(123, i)
        assert 1 <= len(g.vertices) <= 8
        assert len(g.edges) <= 12
        assert g.is_connected


def test_zoo_report_flags_hypothesis_failures():
    rep = run(ExperimentConfig(command="cayley-zoo", budget=100_000))
    rows = {r["name"]: r for r in rep.rows}
    z12 = rows["Z12|1"]
    assert z12["verdict"] == "hypothesis_failed"
    assert z12["status"] == "PASS"  # never counted as a bound violation
    assert z12["diam"] == 6
    assert z12["bound"] == pytest.approx(5.0)
    assert rep.summary["fail"] == 0
    assert rep.summary["error"] == 0


def test_unknown_command_rejected():
    with pytest.raises(ValueError):
        run(ExperimentConfig(command="nope"))


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(command="sweep-cover", count=-1)
    with pytest.raises(ValueError):
        ExperimentConfig(command="sweep-cover", budget=0)


# ------------------------------------------------------------- commands


def test_diam_command(runner, data_dir):
    result = runner.invoke(main, ["diam", "--graph", str(data_dir / "unit_triangle.json")])
    assert result.exit_code == 0
    assert json.loads(result.output)["diameter"] == 1.5


def test_cover_verify_command(runner, data_dir):
    result = runner.invoke(
        main,
        [
            "cover",
            "verify-bound",
            "--graph",
            str(data_dir / "unit_triangle.json"),
            "--voltage",
            str(data_dir / "triangle_shift6_voltage.json"),
        ],
    )
    assert result.exit_code == 0
    obj = json.loads(result.output)
    assert obj["d_cover"] == 9.0 and obj["holds"]


def test_cover_derive_command(runner, data_dir):
    result = runner.invoke(
        main,
        [
            "cover",
            "derive",
            "--graph",
            str(data_dir / "figure_eight.json"),
            "--voltage",
            str(data_dir / "figure_eight_voltage.json"),
        ],
    )
    assert result.exit_code == 0
    obj = json.loads(result.output)
    assert obj["vertices"] == 2 and obj["edges"] == 4 and obj["connected"]


def test_cover_shorten_command(runner, data_dir, tmp_path):
    route = {
        "legs": [
            {"edge": "a@0", "start": 0.0, "end": 1.0},
            {"edge": "a@1", "start": 0.0, "end": 1.0},
            {"edge": "b@0", "start": 0.0, "end": 1.0},
            {"edge": "b@0", "start": 0.0, "end": 1.0},
        ]
    }
    route_path = tmp_path / "route.json"
    route_path.write_text(json.dumps(route))
    result = runner.invoke(
        main,
        [
            "cover",
            "shorten",
            "--graph",
            str(data_dir / "figure_eight.json"),
            "--voltage",
            str(data_dir / "figure_eight_voltage.json"),
            "--route",
            str(route_path),
        ],
    )
    assert result.exit_code == 0
    obj = json.loads(result.output)
    assert obj["shortened"]["length"] < obj["input_length"]


def test_shorten_rejects_short_route(runner, data_dir, tmp_path):
    route = {"legs": [{"edge": "a@0", "start": 0.0, "end": 1.0}]}
    route_path = tmp_path / "route.json"
    route_path.write_text(json.dumps(route))
    result = runner.invoke(
        main,
        [
            "cover",
            "shorten",
            "--graph",
            str(data_dir / "figure_eight.json"),
            "--voltage",
            str(data_dir / "figure_eight_voltage.json"),
            "--route",
            str(route_path),
        ],
    )
    assert result.exit_code == 1
    assert "PathNotLongEnough" in result.output


def test_malformed_graph_names_offending_edge(runner, tmp_path):
    bad = {
        "vertices": ["a", "b"],
        "edges": [{"id": "edge7", "u": "a", "v": "b", "length": -2.0}],
    }
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    result = runner.invoke(main, ["diam", "--graph", str(path)])
    assert result.exit_code == 1
    assert "edge7" in result.output


def test_groups_commands(runner, tmp_path):
    pres = tmp_path / "pres.json"
    pres.write_text(json.dumps({"generators": 2, "relators": ["aa", "bb", "ababab"]}))
    result = runner.invoke(main, ["groups", "enumerate", "--presentation", str(pres)])
    assert result.exit_code == 0
    assert json.loads(result.output)["order"] == 6
    result = runner.invoke(
        main, ["groups", "diameter", "--presentation", str(pres), "--gens", "0,1"]
    )
    assert result.exit_code == 0
    assert json.loads(result.output)["diameter"] == 3


def test_cayley_verify_zoo_preset(runner):
    result = runner.invoke(main, ["cayley", "verify", "--zoo", "Z12|1"])
    assert result.exit_code == 0
    obj = json.loads(result.output)
    assert obj["verdict"] == "hypothesis_failed" and obj["diam"] == 6


def test_cayley_zoo_csv_output(runner, tmp_path):
    out = tmp_path / "zoo.csv"
    result = runner.invoke(main, ["cayley", "zoo", "--out", str(out)])
    assert result.exit_code == 0
    text = out.read_text()
    header = text.splitlines()[0]
    assert header.startswith("name,order,gens,sc_status,diam,bound,verdict")
    assert "Z12|1," in text and "hypothesis_failed" in text


def test_ucover_commands(runner, data_dir, tmp_path):
    result = runner.invoke(
        main, ["ucover", "build", "--complex", str(data_dir / "rp2_complex.json")]
    )
    assert result.exit_code == 0
    obj = json.loads(result.output)
    assert obj["f_vector"] == [12, 30, 20] and obj["simply_connected"] == "yes"
    out = tmp_path / "u.json"
    result = runner.invoke(
        main,
        [
            "ucover",
            "verify-bound",
            "--complex",
            str(data_dir / "rp2_complex.json"),
            "--levels",
            "2,3",
            "--out",
            str(out),
        ],
    )
    assert result.exit_code == 0
    obj = json.loads(out.read_text())
    assert all(r["status"] == "PASS" for r in obj["rows"])


def test_ucover_nerve_command(runner, data_dir):
    result = runner.invoke(
        main,
        [
            "ucover",
            "nerve",
            "--complex",
            str(data_dir / "rp2_complex.json"),
            "--basepoint",
            "1",
            "--epsilon",
            "0.1",
            "--level",
            "3",
        ],
    )
    assert result.exit_code == 0
    obj = json.loads(result.output)
    assert obj["nerve_edges"] == [[0, 1]]
    assert obj["matches_deck_cayley"] and obj["nerve_simply_connected"] == "yes"


def test_sweep_command_writes_deterministic_file(runner, tmp_path):
    out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
    for out in (out1, out2):
        result = runner.invoke(
            main,
            ["sweep", "cover", "--seed", "9", "--count", "6", "--out", str(out)],
        )
        assert result.exit_code == 0
    assert out1.read_bytes() == out2.read_bytes()
