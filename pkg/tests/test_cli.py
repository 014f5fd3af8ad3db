import csv
import json
import os

import numpy as np
import pytest

from guided_abc.cli import (
    RunConfig,
    load_config,
    main,
    read_particles_csv,
)


def base_config(out, n=64, deltas=(3.0, 2.0, 1.0), kind="blocked", seed=7):
    return {
        "model": {"name": "two_moons", "params": {}},
        "proposal": {"kind": kind},
        "schedule": {"deltas": list(deltas)},
        "n_particles": n,
        "seed": seed,
        "n_repeats": 1,
        "workers": 1,
        "out": out,
    }


def write_config(tmp_path, cfg, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestRunCommand:
    def test_outputs_and_schema(self, tmp_path):
        out = str(tmp_path / "out")
        cfg_path = write_config(tmp_path, base_config(out))
        assert main(["run", "--config", cfg_path]) == 0

        rows = read_csv(os.path.join(out, "report.csv"))
        assert rows[0] == ["run", "t", "delta", "n_proposals", "acceptance_rate",
                           "ess", "n_sims", "wallclock_s"]
        assert len(rows) == 4  # header + three iterations
        for row in rows[1:]:
            rate = float(row[4])
            assert 0.0 < rate <= 1.0
            assert int(row[6]) >= 64  # n_sims at least N per iteration

        for t in (1, 2, 3):
            path = os.path.join(out, f"particles_run0_t{t}.csv")
            thetas, weights, distances = read_particles_csv(path)
            assert thetas.shape == (64, 2)
            assert abs(weights.sum() - 1.0) < 1e-9
            assert np.all(distances < float(rows[t][2]))

        manifest = json.load(open(os.path.join(out, "manifest.json")))
        assert manifest["seeds"] == [7]
        assert "guided_abc" in manifest["versions"]

    def test_manifest_round_trips_config(self, tmp_path):
        out = str(tmp_path / "out")
        cfg_path = write_config(tmp_path, base_config(out))
        main(["run", "--config", cfg_path])
        manifest = json.load(open(os.path.join(out, "manifest.json")))
        cfg = RunConfig.from_dict(manifest["config"])
        assert cfg.to_dict() == manifest["config"]

    def test_deterministic_reruns(self, tmp_path):
        out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
        cfg_path = write_config(tmp_path, base_config(out1))
        main(["run", "--config", cfg_path])
        main(["run", "--config", cfg_path, "--out", out2])
        for t in (1, 2, 3):
            name = f"particles_run0_t{t}.csv"
            b1 = open(os.path.join(out1, name), "rb").read()
            b2 = open(os.path.join(out2, name), "rb").read()
            assert b1 == b2
        # reports match except the wallclock column (timing is not replayable)
        r1 = read_csv(os.path.join(out1, "report.csv"))
        r2 = read_csv(os.path.join(out2, "report.csv"))
        assert [row[:-1] for row in r1] == [row[:-1] for row in r2]

    def test_unknown_proposal_kind_exit_code(self, tmp_path, capsys):
        out = str(tmp_path / "out")
        cfg_path = write_config(tmp_path, base_config(out, kind="bogus"))
        assert main(["run", "--config", cfg_path]) == 2
        err = capsys.readouterr().err
        record = json.loads(err)
        assert "kind" in record["error"]

    def test_dotted_overrides(self, tmp_path):
        out = str(tmp_path / "out")
        cfg_path = write_config(tmp_path, base_config(out))
        cfg_dict = load_config(cfg_path, ["n_particles=32", "proposal.kind=\"standard\""])
        assert cfg_dict["n_particles"] == 32
        assert cfg_dict["proposal"]["kind"] == "standard"

    def test_workers_env_default(self, tmp_path, monkeypatch):
        out = str(tmp_path / "out")
        cfg = base_config(out, n=16, deltas=(3.0,))
        del cfg["workers"]
        cfg_path = write_config(tmp_path, cfg)
        monkeypatch.setenv("GUIDED_ABC_WORKERS", "2")
        assert main(["run", "--config", cfg_path]) == 0

    def test_multiple_repeats_derive_seeds(self, tmp_path):
        out = str(tmp_path / "out")
        cfg = base_config(out, n=24, deltas=(3.0, 2.0))
        cfg["n_repeats"] = 3
        cfg_path = write_config(tmp_path, cfg)
        main(["run", "--config", cfg_path])
        manifest = json.load(open(os.path.join(out, "manifest.json")))
        assert manifest["seeds"] == [7, 8, 9]
        rows = read_csv(os.path.join(out, "report.csv"))
        assert {row[0] for row in rows[1:]} == {"0", "1", "2"}


class TestCompareCommand:
    def test_compare_outputs_csv(self, tmp_path):
        out = str(tmp_path / "out")
        cfg_path = write_config(tmp_path, base_config(out, n=48, deltas=(3.0, 2.0)))
        main(["run", "--config", cfg_path])
        cmp_path = str(tmp_path / "w1.csv")
        code = main([
            "compare",
            "--a", os.path.join(out, "particles_run0_t*.csv"),
            "--b", os.path.join(out, "particles_run0_t2.csv"),
            "--m", "48",
            "--out", cmp_path,
        ])
        assert code == 0
        rows = read_csv(cmp_path)
        assert rows[0] == ["file", "run", "t", "m", "w1"]
        assert len(rows) == 3
        by_t = {int(r[2]): float(r[4]) for r in rows[1:]}
        assert by_t[2] >= 0.0
        assert by_t[1] > by_t[2]  # iteration 1 sits farther from the reference


class TestCalibrateCommand:
    def test_writes_scale_file(self, tmp_path):
        out_path = str(tmp_path / "scales.json")
        code = main([
            "calibrate", "--model", "boom_bust", "--n", "300",
            "--seed", "1", "--out", out_path,
        ])
        assert code == 0
        record = json.load(open(out_path))
        assert record["model"] == "boom_bust"
        assert len(record["scale"]) == 12
        assert all(v > 0 for v in record["scale"])
