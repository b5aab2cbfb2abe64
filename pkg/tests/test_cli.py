import json
import subprocess
import sys

import pytest

from fraclab.cli import SUBCOMMANDS, SUMMARY_SCHEMA, main


def _write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def _summary(out):
    return json.loads((out / "summary.json").read_text())


def test_module_entry_point(tmp_path):
    cfg = _write(tmp_path, {"geometry": {"kind": "radial", "N": 3}, "params": {"s": 0.75}})
    out = tmp_path / "out"
    proc = subprocess.run([sys.executable, "-m", "fraclab", "constants", "--config", cfg,
                           "--out", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    doc = _summary(out)
    assert doc["schema"] == SUMMARY_SCHEMA and doc["ok"]
    assert doc["results"]["two_star_s"] == 4.0


def test_bad_order_exits_nonzero(tmp_path, capsys):
    cfg = _write(tmp_path, {"params": {"s": 1.2}})
    assert main(["constants", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    err = json.loads(capsys.readouterr().err)
    assert "s in (0,1)" in err["message"]


def test_unreadable_config(tmp_path, capsys):
    assert main(["torsion", "--config", str(tmp_path / "missing.json"),
                 "--out", str(tmp_path / "o")]) == 2
    assert "cannot read config" in capsys.readouterr().err


def test_unknown_subcommand(tmp_path):
    with pytest.raises(SystemExit):
        main(["nothing", "--config", "x", "--out", str(tmp_path)])


def test_torsion_artifacts(tmp_path):
    cfg = _write(tmp_path, {"params": {"s": 0.5}, "grid": {"n": 128}})
    out = tmp_path / "t"
    assert main(["torsion", "--config", cfg, "--out", str(out)]) == 0
    lines = (out / "torsion.csv").read_text().splitlines()
    assert lines[0] == "node,value" and len(lines) == 129


def test_sublinear_runs(tmp_path):
    cfg = _write(tmp_path, {"params": {"s": 0.5, "q": 0.5}, "grid": {"n": 128},
                            "schedule": [1, 10, 100]})
    out = tmp_path / "s"
    assert main(["sublinear", "--config", cfg, "--out", str(out)]) == 0
    assert (out / "trace.csv").read_text().splitlines()[0].startswith("n,sup_norm")


def test_critical_scaling(tmp_path):
    cfg = _write(tmp_path, {"geometry": {"kind": "radial", "N": 3}, "params": {"s": 0.5},
                            "grid": {"n": 99}, "options": {"radii": [1.0, 2.0]}})
    out = tmp_path / "c"
    main(["critical", "--config", cfg, "--out", str(out)])
    doc = _summary(out)
    assert max(doc["results"]["scaling_errors"]) <= 0.03


def test_deterministic_output(tmp_path):
    cfg = _write(tmp_path, {"params": {"s": 0.75}, "grid": {"n": 96}})
    for k in (1, 2):
        assert main(["eigen", "--config", cfg, "--out", str(tmp_path / f"e{k}")]) == 0
    for name in ("summary.json", "phi1.csv"):
        assert (tmp_path / "e1" / name).read_bytes() == (tmp_path / "e2" / name).read_bytes()


def test_experiment_list(tmp_path):
    exp = [{"params": {"s": s}, "grid": {"n": 128}} for s in (0.25, 0.5, 0.75)]
    cfg = _write(tmp_path, {"experiments": exp, "workers": 2})
    out = tmp_path / "x"
    assert main(["torsion", "--config", cfg, "--out", str(out)]) == 0
    for i in range(3):
        assert _summary(out / f"exp-{i:03d}")["config"]["params"]["s"] == exp[i]["params"]["s"]


def test_subcommand_set():
    assert set(SUBCOMMANDS) == {"constants", "torsion", "auxiliary", "eigen", "hardy",
                                "sublinear", "contrast", "superlinear", "critical",
                                "singular", "acceptance"}
