import csv
import io
import json
import shutil
import subprocess

import pytest

from prodperc.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main
from prodperc.experiment import (
    CSV_HEADER,
    ConfigError,
    ExperimentConfig,
    audit,
    build_config,
    load_config,
    parse_config_text,
    run_experiment,
    write_report,
)

SMALL = dict(product="edge^10", regime="subcritical", epsilon=0.4, seeds=[0, 1, 2])


# -- configuration ----------------------------------------------------------


def test_parse_key_value_and_json():
    text = "product = edge^8   # hypercube\nregime=subcritical\nepsilon = 0.3\nseeds = 1, 2 3\n"
    cfg = build_config(parse_config_text(text))
    assert (cfg.product, cfg.regime, cfg.epsilon, cfg.seeds) == ("edge^8", "subcritical", 0.3, [1, 2, 3])
    cfg = build_config(parse_config_text('{"product": "edge^8", "seed_count": 3, "seed_base": 5, "timing": "yes"}'))
    assert cfg.seeds == [5, 6, 7] and cfg.timing is True


def test_override_precedence(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("product = edge^8\nseeds = 1 2 3\nepsilon = 0.3\n")
    cfg = load_config(str(path), {"epsilon": 0.2, "seed_count": 2, "census_mode": None})
    assert cfg.epsilon == 0.2 and cfg.seeds == [0, 1] and cfg.census_mode == "exact"
    assert load_config(str(path), {"seeds": "9"}).seeds == [9]


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("regime = supercritical", "product"),
        ("product = edge\nflavour = x", "unknown config keys"),
        ("product = edge\nepsilon = 1.5", "epsilon"),
        ("product = edge\nregime = critical", "regime"),
        ("product = edge\nseeds = ", "empty"),
        ("product = edge\nrounds = triple\nregime = subcritical", "triple"),
        ("product edge", "key=value"),
        ("{bad json", "JSON"),
        ("product = edge\ntiming = maybe", "boolean"),
    ],
)
def test_config_errors(text, fragment):
    with pytest.raises(ConfigError, match=fragment):
        build_config(parse_config_text(text))


def test_single_edge_product_has_no_plan():
    with pytest.raises(ValueError, match="degree must be at least 2"):
        run_experiment(ExperimentConfig(product="edge", epsilon=0.5))


# -- runs ----------------------------------------------------------------------


def test_subcritical_run_annotations():
    rep = run_experiment(ExperimentConfig(**SMALL))
    bound = rep.references["subcritical_bound"]
    assert all(r["pass"] == (r["L1"] <= bound) for r in rep.rows)
    assert [r["seed"] for r in rep.rows] == [0, 1, 2]
    assert rep.passed and audit(rep)
    assert rep.references["k_reference"] == 16 and rep.references["k_configured"] == 2


def test_supercritical_run_annotations():
    rep = run_experiment(ExperimentConfig(product="complete3^7", seeds=[0, 1]))
    for r in rep.rows:
        assert r["L2_over_d"] == r["L2"] / 14
        assert "giant_count" in r and "giant_deviation" in r
    for key in ("y", "C1_proof", "L2_limit", "L2_note", "mean_giant_deviation", "alpha"):
        assert key in rep.references
    assert set(rep.aggregates) == {"L1", "L2", "L1_fraction", "W_fraction"}


def test_degenerate_p_one():
    rep = run_experiment(ExperimentConfig(product="cycle4^3", p=1.0, seeds=[3, 4, 5]))
    assert all(r["L1"] == 64 for r in rep.rows)
    assert rep.references["p_override"] == 1.0


def test_audit_detects_tampering():
    rep = run_experiment(ExperimentConfig(**SMALL))
    rep.aggregates["L1"]["mean"] += 1
    assert not audit(rep)


def test_reproducible_files(tmp_path):
    path = tmp_path / "run.json"
    snapshots = []
    for _ in range(2):
        write_report(run_experiment(ExperimentConfig(**SMALL, output=str(path))))
        snapshots.append(path.read_bytes())
    assert snapshots[0] == snapshots[1]
    data = json.loads(snapshots[0])
    assert data["verdict"] == "pass" and len(data["rows"]) == 3


def test_workers_do_not_change_results():
    one = run_experiment(ExperimentConfig(**SMALL, workers=1)).to_json()
    many = run_experiment(ExperimentConfig(**SMALL, workers=3)).to_json()
    assert json.loads(one)["rows"] == json.loads(many)["rows"]


def test_csv_output():
    rep = run_experiment(ExperimentConfig(**SMALL, format="csv"))
    rows = list(csv.reader(io.StringIO(rep.to_csv())))
    assert rows[0] == CSV_HEADER
    assert len(rows) == 4 and all(r[-1] == "" for r in rows[1:])
    timed = run_experiment(ExperimentConfig(**SMALL, timing=True))
    assert all(r["elapsed_ms"] >= 0 for r in timed.rows)


def test_sampled_mode_rows():
    rep = run_experiment(ExperimentConfig(product="edge^10", census_mode="sampled", budget=50, seeds=[0]))
    assert "W_radius" in rep.rows[0] and "giant_count" not in rep.rows[0]


# -- command line -------------------------------------------------------------


def test_graph_info(capsys):
    assert main(["graph", "info", "edge^16"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "t=16\n" in out and "d=16\n" in out and "n=65536\n" in out and "alpha=1.442695" in out
    assert main(["graph", "info", "complete3^2"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "iso_lower=1\n" in out and "iso_upper=2\n" in out and "iso_exact=2\n" in out


def test_graph_info_parse_error(capsys):
    assert main(["graph", "info", "cycle2^4"]) == EXIT_USAGE
    assert "k >= 3" in capsys.readouterr().err


def test_experiment_cli(tmp_path, capsys):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("product = edge^10\nregime = subcritical\nepsilon = 0.4\nseed_count = 3\n")
    out = tmp_path / "out.csv"
    code = main(["experiment", "--config", str(cfg), "--format", "csv", "--output", str(out), "--audit"])
    assert code == EXIT_OK
    assert out.read_text().splitlines()[0] == ",".join(CSV_HEADER)
    assert "verdict=pass" in capsys.readouterr().err


def test_experiment_cli_failing_annotation(capsys):
    # an impossible giant tolerance fails the run with status 1
    code = main(["experiment", "--product", "complete3^6", "--seeds", "0 1", "--giant-tolerance", "0"])
    assert code == EXIT_FAIL
    assert json.loads(capsys.readouterr().out)["verdict"] == "fail"


def test_experiment_cli_usage_errors(tmp_path, capsys):
    assert main(["experiment", "--product", "edge^4", "--epsilon", "2"]) == EXIT_USAGE
    assert main(["experiment", "--config", str(tmp_path / "missing.cfg")]) == EXIT_USAGE
    capsys.readouterr()


def test_verify_cli(capsys):
    assert main(["verify", "treecount"]) == EXIT_OK
    assert "PASS treecount" in capsys.readouterr().out
    with pytest.raises(SystemExit):
        main(["verify", "nonsense"])


def test_survival_cli(tmp_path, capsys):
    path = tmp_path / "y.csv"
    assert main(["analysis", "survival", "--grid", "0.05:1.0:0.05", "--csv", str(path)]) == EXIT_OK
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["epsilon", "y", "residual"] and len(rows) == 21
    assert all(float(r[2]) <= 1e-12 for r in rows[1:])
    assert main(["analysis", "survival", "--epsilon", "0"]) == EXIT_USAGE
    assert main(["analysis", "survival"]) == EXIT_USAGE
    capsys.readouterr()


def test_bounds_cli(capsys):
    assert main(["analysis", "bounds", "complete3^12", "--epsilon", "0.25", "--r", "4"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "y=0.3713" in out and "C1_proof=279625" in out


@pytest.mark.skipif(shutil.which("prodperc") is None, reason="console script not installed")
def test_console_script():
    res = subprocess.run(["prodperc", "graph", "info", "complete3^12"], capture_output=True, text=True)
    assert res.returncode == 0
    assert "n=531441" in res.stdout and "d=24" in res.stdout
