import json
import math
import os

import pytest

from spdcavity.cli import EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_IO, EXIT_OK, EXIT_THRESHOLD, main
from spdcavity.sweep import COLUMNS, read_metadata


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def value(out, key):
    for line in out.splitlines():
        if line.startswith(key):
            return line.split("=", 1)[1].split()[0]
    raise KeyError(key)


class TestPhotons:
    def test_orthogonal_example(self, capsys):
        code, out, _ = run(capsys, "photons", "--G", "1.01", "--R", "0.2", "--t", "1", "--phi", "0", "--theta", "0")
        assert code == EXIT_OK
        assert float(value(out, "n_a")) == pytest.approx(0.146200942235, abs=1e-12)
        assert float(value(out, "n_b")) == pytest.approx(0.146200942235, abs=1e-12)
        assert "orthogonal-mode closed form" in out

    def test_degrees(self, capsys):
        _, rad, _ = run(capsys, "photons", "--G", "1.01", "--R", "0.2", "--t", "0.5", "--phi", str(math.pi / 6))
        _, deg, _ = run(capsys, "photons", "--G", "1.01", "--R", "0.2", "--t", "0.5", "--phi", "30", "--deg")
        assert float(value(rad, "N_total")) == pytest.approx(float(value(deg, "N_total")), rel=1e-12)

    def test_no_gain_gives_zeros(self, capsys):
        code, out, _ = run(capsys, "photons", "--G", "1", "--R", "0.5", "--t", "0.3", "--phi", "0.4")
        assert code == EXIT_OK
        assert [float(value(out, k)) for k in ("n_a", "n_b", "N_total")] == [0.0, 0.0, 0.0]

    @pytest.mark.parametrize("G", ["1.341641", "1.35", "1.5"])
    def test_threshold(self, capsys, G):
        code, _, err = run(capsys, "photons", "--G", G, "--R", "0.2")
        assert code == EXIT_THRESHOLD and "threshold" in err

    @pytest.mark.parametrize(
        "flags", [("--R", "1"), ("--R", "-0.1"), ("--G", "0.9"), ("--t", "1.2"), ("--phi", "nan")]
    )
    def test_invalid_parameters(self, capsys, flags):
        code, _, err = run(capsys, "photons", *flags)
        assert code == EXIT_CONFIG and err.startswith("error:")


class TestKFactor:
    @pytest.mark.parametrize(
        "t, phi, K, regime",
        [
            ("1", "0", 1.0, "Unlocked"),
            ("1", "0.7", 1.0, "Unlocked"),
            ("0.2", "0.3926990817", 2.42016806722689, "Locked"),
        ],
    )
    def test_values(self, capsys, t, phi, K, regime):
        code, out, _ = run(capsys, "kfactor", "--t", t, "--phi", phi)
        assert code == EXIT_OK
        assert float(value(out, "K ")) == pytest.approx(K, rel=1e-10)
        assert value(out, "regime") == regime

    def test_critical(self, capsys):
        code, out, _ = run(capsys, "kfactor", "--t", "0.414214", "--phi", "22.5", "--deg")
        assert code == EXIT_OK
        assert value(out, "regime") == "Critical"
        assert float(value(out, "t_c(phi)")) == pytest.approx(math.sqrt(2) - 1, abs=1e-12)

    def test_exactly_divergent(self, capsys):
        code, out, _ = run(capsys, "kfactor", "--t", repr(math.sqrt(2) - 1), "--phi", repr(math.pi / 8))
        assert code == EXIT_OK
        assert value(out, "K ") == "inf" and value(out, "regime") == "Critical"


class TestSweep:
    def test_fig3_csv(self, capsys, tmp_path):
        path = tmp_path / "f3.csv"
        code, out, _ = run(capsys, "sweep", "--fig", "3", "-o", str(path))
        assert code == EXIT_OK and "1001 records" in out
        lines = path.read_text().splitlines()
        assert lines[0].startswith("# metadata: ")
        assert lines[1] == ",".join(COLUMNS)
        assert len(lines) == 1003

    def test_rerun_from_metadata_is_identical(self, capsys, tmp_path):
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run(capsys, "sweep", "--G", "1.05", "--R", "0.3", "--axis", "t=0:1:7",
                   "--axis", "phi=0,0.2,0.5", "-o", str(first))[0] == EXIT_OK
        assert run(capsys, "sweep", "--config", str(first), "-o", str(second))[0] == EXIT_OK
        assert first.read_bytes() == second.read_bytes()

    def test_rerun_json(self, capsys, tmp_path):
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        assert run(capsys, "sweep", "--fig", "3", "--format", "json", "-o", str(first))[0] == EXIT_OK
        assert run(capsys, "sweep", "--config", str(first), "-o", str(second))[0] == EXIT_OK
        assert first.read_bytes() == second.read_bytes()

    def test_json_fields_match_csv(self, capsys, tmp_path):
        c, j = tmp_path / "s.csv", tmp_path / "s.json"
        run(capsys, "sweep", "--axis", "t=0.1,0.9", "-o", str(c))
        run(capsys, "sweep", "--axis", "t=0.1,0.9", "--format", "json", "-o", str(j))
        doc = json.loads(j.read_text())
        header = c.read_text().splitlines()[1].split(",")
        assert all(list(rec) == header for rec in doc["records"])
        rows = [line.split(",") for line in c.read_text().splitlines()[2:]]
        for rec, row in zip(doc["records"], rows):
            assert rec["regime"] == row[-1]
            assert rec["N_total"] == pytest.approx(float(row[header.index("N_total")]), rel=1e-15)

    def test_output_dir_env(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv("SPDCAVITY_OUTPUT_DIR", str(tmp_path))
        assert run(capsys, "sweep", "--fig", "3")[0] == EXIT_OK
        assert (tmp_path / "fig3.csv").exists()

    def test_metadata_contents(self, capsys, tmp_path):
        path = tmp_path / "s.csv"
        run(capsys, "sweep", "--fig", "2", "--jobs", "2", "-o", str(path))
        meta = read_metadata(path)
        assert meta["fixed"]["G"] == 1.01 and meta["fixed"]["R"] == 0.2
        assert meta["axes"]["t"] == {"start": 0.0, "stop": 1.0, "num": 101}
        assert meta["format"] == "csv" and meta["critical_band"] == 1e-3

    @pytest.mark.parametrize(
        "argv",
        [
            ("--axis", "t=0:1:0"),
            ("--axis", "t=0:2:5"),
            ("--axis", "t=0.5,0.2,0.7"),
            ("--axis", "L=0:1:3"),
            ("--axis", "t"),
            (),
        ],
    )
    def test_config_errors(self, capsys, tmp_path, argv):
        code, _, err = run(capsys, "sweep", *argv, "-o", str(tmp_path / "x.csv"))
        assert code == EXIT_CONFIG and err.startswith("error:")
        assert not (tmp_path / "x.csv").exists()

    def test_bad_config_file(self, capsys, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("not a sweep\n")
        assert run(capsys, "sweep", "--config", str(bad))[0] == EXIT_CONFIG
        assert run(capsys, "sweep", "--config", str(tmp_path / "missing.csv"))[0] == EXIT_CONFIG

    def test_unwritable_output(self, capsys, tmp_path):
        target = tmp_path / "no" / "such" / "dir" / "s.csv"
        code, _, err = run(capsys, "sweep", "--fig", "3", "-o", str(target))
        assert code == EXIT_IO and "cannot write" in err

    def test_threshold_rows_are_written(self, capsys, tmp_path):
        path = tmp_path / "s.csv"
        assert run(capsys, "sweep", "--R", "0.2", "--axis", "G=1.01,1.5", "-o", str(path))[0] == EXIT_OK
        last = path.read_text().splitlines()[-1].split(",")
        assert last[COLUMNS.index("N_total")] == "inf"


class TestCheck:
    def test_passes(self, capsys):
        code, out, _ = run(capsys, "check", "--samples", "20")
        assert code == EXIT_OK
        assert out.count("PASS") == 7 and "FAIL" not in out

    def test_deterministic(self, capsys):
        a = run(capsys, "check", "--samples", "10", "--seed", "3")[1]
        b = run(capsys, "check", "--samples", "10", "--seed", "3")[1]
        assert a == b

    def test_injected_fault_detected(self, capsys):
        code, out, _ = run(capsys, "check", "--samples", "10", "--inject-fault", "left-mirror-sign")
        assert code == EXIT_CHECK_FAILED
        assert "FAIL  round-trip closed form" in out

    def test_bad_samples(self, capsys):
        assert run(capsys, "check", "--samples", "0")[0] == EXIT_CONFIG
