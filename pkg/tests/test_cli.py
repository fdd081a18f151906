import csv
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from fpsg.cli import main
from fpsg.config import parse_config, validate
from fpsg.errors import ConfigurationError
from fpsg.runner import DIAGNOSTICS_FILE, SNAPSHOT_FILE, SUMMARY_FILE

CONFIGS = sorted((Path(__file__).parents[1] / "configs").glob("*.json"))

SMALL = {
    "model": {"type": "opinion", "gamma": [0.75, 0.25], "sigma2": 0.1},
    "scheme": "mmsg",
    "M": 2,
    "N": 21,
    "dt": 0.1,
    "T": 0.5,
}


def write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return path


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


class TestConfig:
    @pytest.mark.parametrize("path", CONFIGS, ids=[p.stem for p in CONFIGS])
    def test_shipped_configs_parse(self, path):
        cfg = parse_config(path)
        assert cfg.T > 0 and cfg.sweep is not None

    def test_missing_scheme(self):
        raw = {k: v for k, v in SMALL.items() if k != "scheme"}
        with pytest.raises(ConfigurationError, match="scheme"):
            validate(raw)

    def test_all_errors_reported(self):
        with pytest.raises(ConfigurationError) as info:
            validate(dict(SMALL, dt=-0.1, M=-1, colour="red"))
        text = str(info.value)
        assert "dt" in text and "M:" in text and "colour" in text

    @pytest.mark.parametrize(
        "patch",
        [{"T": 0.55}, {"scheme": "upwind"}, {"N": 2}, {"integrator": "rk4"}, {"output_times": [2.0]},
         {"domain": [1, -1]}, {"source": "exact"}, {"reference": {"M": 4}}],
    )
    def test_rejected(self, patch):
        with pytest.raises(ConfigurationError):
            validate(dict(SMALL, **patch))

    def test_syntax_error_location(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{\n  "M": 3,\n  oops\n}')
        with pytest.raises(ConfigurationError, match=r"bad.json:3:"):
            parse_config(path)

    def test_sweep_value_substitution(self):
        cfg = validate(dict(SMALL, sweep={"parameter": "sigma2", "values": [0.2]}))
        sub = cfg.with_value("sigma2", 0.2)
        assert sub.sweep is None and sub.model.sigma2(0.0) == 0.2
        assert cfg.with_value("M", 4).M == 4


class TestRun:
    def test_outputs(self, tmp_path):
        out = tmp_path / "out"
        assert main(["run", str(write(tmp_path, SMALL)), "--output-dir", str(out)]) == 0
        rows = read_csv(out / DIAGNOSTICS_FILE)
        assert len(rows) == 1 and float(rows[0]["t"]) == pytest.approx(0.5)
        snap = read_csv(out / SNAPSHOT_FILE)
        assert len(snap) == 21 and set(snap[0]) == {"v", "mean", "variance"}

    def test_output_times_recorded(self, tmp_path):
        out = tmp_path / "out"
        main(["run", str(write(tmp_path, dict(SMALL, output_times=[0.0, 0.2]))), "--output-dir", str(out)])
        times = [float(r["t"]) for r in read_csv(out / DIAGNOSTICS_FILE)]
        assert times == pytest.approx([0.0, 0.2, 0.5])

    def test_bit_identical_reruns(self, tmp_path):
        cfg = write(tmp_path, dict(SMALL, reference={"M": 4, "N": 41}))
        for d in ("a", "b"):
            assert main(["run", str(cfg), "--output-dir", str(tmp_path / d)]) == 0
        for name in (DIAGNOSTICS_FILE, SNAPSHOT_FILE):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_config_error_exit_code(self, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(["run", str(write(tmp_path, dict(SMALL, dt=-1))), "--output-dir", str(out)]) == 2
        record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert record["error"] == "ConfigurationError"
        assert json.loads((out / "error.json").read_text())["error"] == "ConfigurationError"

    def test_runtime_failure_exit_code(self, tmp_path):
        cfg = dict(SMALL, model={"type": "swarming"}, domain=[-2, 2], integrator="dirk2")
        assert main(["run", str(write(tmp_path, cfg)), "--output-dir", str(tmp_path / "o")]) in (1, 2)

    def test_compare_exact_rejects_other_models(self, tmp_path):
        assert main(["compare-exact", str(write(tmp_path, SMALL)), "--output-dir", str(tmp_path / "o")]) == 2

    def test_compare_exact_columns(self, tmp_path):
        cfg = {
            "model": {"type": "classical", "K": [1.0, 0.5], "sigma": 1.0},
            "scheme": "cdsg", "M": 2, "N": 81, "domain": [-8, 8], "dt": 0.1, "T": 0.5,
        }
        out = tmp_path / "o"
        assert main(["compare-exact", str(write(tmp_path, cfg)), "--output-dir", str(out)]) == 0
        snap = read_csv(out / SNAPSHOT_FILE)
        assert {"exact_mean", "exact_variance"} <= set(snap[0])
        mean = np.array([float(r["mean"]) for r in snap])
        exact = np.array([float(r["exact_mean"]) for r in snap])
        assert np.abs(mean - exact).max() < 1e-2
        assert float(read_csv(out / DIAGNOSTICS_FILE)[-1]["l2_error"]) < 1e-2


class TestSweep:
    def test_summary_and_threads(self, tmp_path):
        cfg = dict(SMALL, reference={"M": 6, "N": 21}, sweep={"parameter": "M", "values": [1, 2, 3]})
        path = write(tmp_path, cfg)
        assert main(["sweep", str(path), "--output-dir", str(tmp_path / "s1")]) == 0
        assert main(["sweep", str(path), "--output-dir", str(tmp_path / "s4"), "--threads", "3"]) == 0
        rows = read_csv(tmp_path / "s1" / SUMMARY_FILE)
        assert [r["value"] for r in rows] == ["1", "2", "3"]
        errs = [float(r["l2_error"]) for r in rows]
        assert errs[0] > errs[1] > errs[2]
        assert (tmp_path / "s1" / SUMMARY_FILE).read_bytes() == (tmp_path / "s4" / SUMMARY_FILE).read_bytes()

    def test_sweep_requires_entry(self, tmp_path):
        assert main(["sweep", str(write(tmp_path, SMALL)), "--output-dir", str(tmp_path / "o")]) == 2


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "fpsg.cli", "run", str(tmp_path / "missing.json")], capture_output=True, text=True
    )
    assert proc.returncode == 2 and "ConfigurationError" in proc.stderr
