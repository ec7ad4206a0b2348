import json

import numpy as np
import pytest

from paretogof import datasets
from paretogof.cli import EXIT_ACCEPT, EXIT_ERROR, EXIT_REJECT, main
from paretogof.stein_complete import delta_I_fast


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def field(out, name):
    for line in out.splitlines():
        if line.startswith(name + ":"):
            return line.split(":", 1)[1].strip()
    raise KeyError(name)


@pytest.fixture
def censored_file(tmp_path):
    path = tmp_path / "cens.csv"
    path.write_text("time,event\n2.0,1\n4.0,0\n6.0,1\n")
    return path


class TestFit:
    def test_builtin(self, capsys):
        code, out, _ = run(capsys, "fit", "--data", "builtin:wheaton")
        assert code == EXIT_ACCEPT
        assert field(out, "alpha_hat") == "1.08925"

    def test_censored(self, capsys, censored_file):
        code, out, _ = run(capsys, "fit", "--data", f"file:{censored_file}", "--censored")
        assert code == EXIT_ACCEPT
        assert field(out, "alpha_hat_c") == "1.27273"

    def test_support_note(self, capsys, tmp_path):
        path = tmp_path / "x.txt"
        path.write_text("0.5\n2\n3\n")
        code, _, err = run(capsys, "fit", "--data", f"file:{path}")
        assert code == EXIT_ACCEPT and "below the Pareto support" in err


class TestTest:
    def test_wheaton_delta_I(self, capsys):
        code, out, _ = run(capsys, "test", "--data", "builtin:wheaton", "--stat", "delta_I",
                           "--B", "1000", "--seed", "11")
        assert code == EXIT_ACCEPT
        assert abs(float(field(out, "value")) + 0.2075) < 5e-4
        assert float(field(out, "C1")) < float(field(out, "value")) < float(field(out, "C2"))
        assert field(out, "decision").startswith("fail to reject")

    def test_wind_delta_M_one_sided(self, capsys):
        code, out, _ = run(capsys, "test", "--data", "builtin:wind", "--stat", "delta_M",
                           "--B", "1000", "--seed", "11")
        assert code == EXIT_ACCEPT
        assert abs(float(field(out, "value")) - 0.2223) < 5e-4
        assert "C3:" in out and "C1:" not in out

    def test_reject_exit_code(self, capsys, tmp_path):
        path = tmp_path / "unif.txt"
        path.write_text("".join(f"{v}\n" for v in np.linspace(1.0, 2.0, 60)))
        code, out, _ = run(capsys, "test", "--data", f"file:{path}", "--stat", "KS",
                           "--B", "200", "--method", "parametric", "--seed", "1")
        assert code == EXIT_REJECT and field(out, "decision").startswith("reject")

    def test_censored(self, capsys, censored_file):
        code, out, _ = run(capsys, "test", "--data", f"file:{censored_file}", "--censored",
                           "--stat", "delta_I")
        assert code == EXIT_ACCEPT
        assert field(out, "value") == "0.383838"

    def test_censored_unsupported_stat(self, capsys, censored_file):
        code, _, err = run(capsys, "test", "--data", f"file:{censored_file}", "--censored", "--stat", "KS")
        assert code == EXIT_ERROR and "no censored-data version" in err

    def test_generated_seed_is_reported(self, capsys):
        code, _, err = run(capsys, "test", "--data", "builtin:wind", "--B", "100")
        assert code in (EXIT_ACCEPT, EXIT_REJECT) and "(generated)" in err

    @pytest.mark.parametrize("argv", [
        ["test", "--data", "builtin:nothing"],
        ["test", "--data", "nowhere"],
        ["test", "--data", "file:/does/not/exist"],
        ["test", "--data", "builtin:wind", "--stat", "bogus"],
        ["fit"],
        ["frobnicate"],
    ])
    def test_errors(self, capsys, argv):
        assert run(capsys, *argv)[0] == EXIT_ERROR

    def test_malformed_file(self, capsys, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("1.2\nabc\n")
        assert run(capsys, "fit", "--data", f"file:{path}")[0] == EXIT_ERROR
        cens = tmp_path / "bad.csv"
        cens.write_text("time,event\n1.2,2\n")
        assert run(capsys, "fit", "--data", f"file:{cens}", "--censored")[0] == EXIT_ERROR


class TestCritvals:
    def test_cached_repeat_is_identical(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv("PARETO_GOF_CACHE", str(tmp_path))
        argv = ["critvals", "--n", "30", "--stat", "delta_I", "--reps", "1000", "--seed", "4"]
        code, first, _ = run(capsys, *argv)
        assert code == EXIT_ACCEPT
        assert (tmp_path / "critvals-v1.csv").exists()
        rows = (tmp_path / "critvals-v1.csv").read_text().splitlines()
        code, second, _ = run(capsys, *argv)
        assert code == EXIT_ACCEPT and first == second
        assert (tmp_path / "critvals-v1.csv").read_text().splitlines() == rows

    def test_sidedness(self, capsys):
        _, out, _ = run(capsys, "critvals", "--n", "50", "--stat", "delta_I", "--reps", "1000", "--seed", "2")
        assert float(field(out, "C1")) < 0 < float(field(out, "C2"))
        _, out, _ = run(capsys, "critvals", "--n", "50", "--stat", "delta_M", "--reps", "1000", "--seed", "2")
        assert "C1:" not in out and float(field(out, "C3")) > 0

    def test_too_few_reps(self, capsys):
        assert run(capsys, "critvals", "--n", "20", "--reps", "10", "--seed", "1")[0] == EXIT_ERROR


class TestPower:
    def test_one_cell(self, capsys, tmp_path):
        cfg = tmp_path / "tiny.json"
        cfg.write_text(json.dumps(dict(sample_sizes=[25], alternatives=["P(5)"], tests=["delta_I"],
                                       replications=200, critical_reps=1000, alpha_grid=[1, 5, 10], seed=9)))
        code, out, _ = run(capsys, "power", "--config", str(cfg), "--output-dir", str(tmp_path / "out"))
        assert code == EXIT_ACCEPT
        lines = (tmp_path / "out" / "tiny.csv").read_text().splitlines()
        assert len(lines) == 2 and lines[1].startswith("P,5.0,25,delta_I,,")
        assert (tmp_path / "out" / "tiny.txt").read_text() in out

    def test_malformed_config_writes_nothing(self, capsys, tmp_path):
        cfg = tmp_path / "bad.toml"
        cfg.write_text('sample_sizes = [0]\ntests = ["nope"]\n')
        code, _, err = run(capsys, "power", "--config", str(cfg), "--output-dir", str(tmp_path / "out"))
        assert code == EXIT_ERROR
        assert "invalid configuration" in err and err.count("  - ") >= 3
        assert not (tmp_path / "out").exists()


class TestExport:
    @pytest.mark.parametrize("name", ["wheaton", "wind"])
    def test_round_trip(self, capsys, tmp_path, name):
        path = tmp_path / f"{name}.txt"
        code, out, _ = run(capsys, "export-data", "--data", f"builtin:{name}", "--out", str(path))
        assert code == EXIT_ACCEPT and datasets.checksum(datasets.load(name)) in out
        values = np.array([float(v) for v in path.read_text().split()])
        assert values.tobytes() == datasets.load(name).tobytes()
        original = datasets.load(name)
        a = original.mean() / (original.mean() - 1)
        assert delta_I_fast(values, a).value == delta_I_fast(original, a).value

    def test_stdout(self, capsys):
        code, out, _ = run(capsys, "export-data", "--data", "builtin:wind")
        assert code == EXIT_ACCEPT and len(out.split()) == 40

    def test_checksums(self):
        assert datasets.checksum(datasets.load("wheaton")) == \
            "5af16e5987fab865eafd58cee77c1c128f98df29045e2f3c2e1d192e68858595"
        assert datasets.checksum(datasets.load("wind")) == \
            "aacbe78b03a4604cde3717fbd1125e3b5cc315cb4ef1a413e6d37b64e7f0236a"
