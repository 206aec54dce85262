import json

import pytest
from click.testing import CliRunner

from cli import main
from games.kuhn import kuhn_equilibrium_policy
from policy import TabularPolicy, uniform_policy
from reporting.curves import read_curve, read_metadata
from reporting.policy_io import save_policy


@pytest.fixture
def runner():
    return CliRunner()


def _solve(runner, tmp_path, *args, name="curve.csv"):
    out = tmp_path / name
    result = runner.invoke(main, ["solve", *args, "--out", str(out)])
    return result, out


class TestSolve:
    def test_fixed_cadence(self, runner, tmp_path):
        result, out = _solve(runner, tmp_path, "--game", "kuhn", "--algorithm", "cfr",
                             "--iterations", "1000", "--eval-every", "10")
        assert result.exit_code == 0, result.output
        assert "✓ 100 evaluations" in result.output
        metadata, frame = read_curve(out)
        assert len(frame) == 100
        assert metadata["game"] == "kuhn" and metadata["algorithm"] == "cfr"
        assert frame["iteration"].tolist()[-1] == 1000

    def test_unknown_algorithm(self, runner, tmp_path):
        result, _ = _solve(runner, tmp_path, "--game", "kuhn", "--algorithm", "nope")
        assert result.exit_code == 2

    def test_missing_game(self, runner, tmp_path):
        result, _ = _solve(runner, tmp_path, "--algorithm", "cfr")
        assert result.exit_code == 2
        assert "--game" in result.output

    def test_sqrt_rate_rejected_for_neural(self, runner, tmp_path):
        result, _ = _solve(runner, tmp_path, "--game", "kuhn", "--algorithm", "ed_neural", "--lr", "sqrt")
        assert result.exit_code == 2

    def test_bad_rate(self, runner, tmp_path):
        result, _ = _solve(runner, tmp_path, "--game", "kuhn", "--algorithm", "ed_qc_softmax", "--lr", "fast")
        assert result.exit_code == 2

    def test_artifacts(self, runner, tmp_path):
        policy_out = tmp_path / "best.json"
        current_out = tmp_path / "current.json"
        result, out = _solve(
            runner, tmp_path, "--game", "kuhn", "--algorithm", "ed_qc_softmax", "--iterations", "16",
            "--policy-out", str(policy_out), "--current-policy-out", str(current_out), "--summary",
            "--deterministic",
        )
        assert result.exit_code == 0, result.output
        assert json.loads(policy_out.read_text())["player"] == "joint"
        assert current_out.exists()
        assert out.with_suffix(".md").exists()
        _, frame = read_curve(out)
        assert (frame["wall_ms"] == 0).all()
        assert frame["best_iter_nashconv"].notna().all()

    def test_neural_checkpoint(self, runner, tmp_path):
        checkpoint = tmp_path / "net.json"
        result, _ = _solve(
            runner, tmp_path, "--game", "kuhn", "--algorithm", "ed_neural", "--iterations", "4",
            "--hidden-units", "64", "--checkpoint-out", str(checkpoint),
        )
        assert result.exit_code == 0, result.output
        assert json.loads(checkpoint.read_text())["game"] == "kuhn"

    @pytest.mark.parametrize("algorithm", ["xfp", "ed_qc_softmax", "ed_neural"])
    def test_identical_runs_write_identical_files(self, runner, tmp_path, algorithm):
        args = ("--game", "kuhn", "--algorithm", algorithm, "--iterations", "64", "--hidden-units", "64")
        _, first = _solve(runner, tmp_path, *args, name="first.csv")
        _, second = _solve(runner, tmp_path, *args, name="second.csv")
        assert first.read_bytes() == second.read_bytes()

    def test_wall_clock_column_on_request(self, runner, tmp_path):
        result, out = _solve(runner, tmp_path, "--game", "kuhn", "--algorithm", "cfr", "--iterations", "8",
                             "--wall-clock")
        assert result.exit_code == 0, result.output
        _, frame = read_curve(out)
        assert (frame["wall_ms"] >= 0).all()
        assert frame["wall_ms"].tolist() == sorted(frame["wall_ms"].tolist())

    def test_environment_forces_determinism(self, runner, tmp_path, monkeypatch):
        monkeypatch.setenv("ED_DETERMINISTIC", "1")
        result, out = _solve(runner, tmp_path, "--game", "kuhn", "--algorithm", "cfr", "--iterations", "8",
                             "--wall-clock")
        assert result.exit_code == 0, result.output
        _, frame = read_curve(out)
        assert (frame["wall_ms"] == 0).all()

    def test_initial_policy_for_another_game(self, runner, tmp_path, leduc):
        start = tmp_path / "leduc.json"
        save_policy(uniform_policy(leduc), start)
        result, _ = _solve(runner, tmp_path, "--game", "kuhn", "--algorithm", "cfr",
                           "--initial-policy", str(start))
        assert result.exit_code == 2

    def test_pure_initial_policy(self, runner, tmp_path):
        start = tmp_path / "equilibrium.json"
        save_policy(TabularPolicy("kuhn", kuhn_equilibrium_policy()), start)
        result, out = _solve(runner, tmp_path, "--game", "kuhn", "--algorithm", "ed_qc_softmax",
                             "--iterations", "4", "--initial-policy", str(start))
        assert result.exit_code == 0, result.output
        _, frame = read_curve(out)
        assert frame["best_iter_nashconv"].max() < 1e-9

    def test_config_file_with_flag_override(self, runner, tmp_path):
        config = tmp_path / "run.yaml"
        config.write_text("game: kuhn\nalgorithm: cfr\niterations: 32\neval-every: 8\n")
        result, out = _solve(runner, tmp_path, "--config", str(config), "--iterations", "16")
        assert result.exit_code == 0, result.output
        _, frame = read_curve(out)
        assert frame["iteration"].tolist() == [8, 16]
        assert '"iterations": 16' in read_metadata(out)["config"]


class TestEval:
    def test_uniform_policy(self, runner, tmp_path, kuhn):
        path = tmp_path / "uniform.json"
        save_policy(uniform_policy(kuhn), path)
        result = runner.invoke(main, ["eval", "--policy", str(path), "--game", "kuhn"])
        assert result.exit_code == 0, result.output
        lines = dict(line.split(": ") for line in result.output.strip().splitlines())
        assert set(lines) == {"nashconv", "exploitability_p0", "exploitability_p1", "value_p0"}
        assert float(lines["nashconv"]) > 0.5

    def test_equilibrium_policy(self, runner, tmp_path):
        path = tmp_path / "equilibrium.json"
        save_policy(TabularPolicy("kuhn", kuhn_equilibrium_policy()), path)
        result = runner.invoke(main, ["eval", "--policy", str(path), "--game", "kuhn"])
        assert result.exit_code == 0, result.output
        lines = dict(line.split(": ") for line in result.output.strip().splitlines())
        assert abs(float(lines["nashconv"])) < 1e-9
        assert float(lines["value_p0"]) == pytest.approx(-1.0 / 18.0, abs=1e-12)

    def test_truncated_file(self, runner, tmp_path, kuhn):
        path = tmp_path / "broken.json"
        save_policy(uniform_policy(kuhn), path)
        path.write_text(path.read_text()[:50])
        result = runner.invoke(main, ["eval", "--policy", str(path), "--game", "kuhn"])
        assert result.exit_code == 1
        assert "✗ Error" in result.output

    def test_partial_policy(self, runner, tmp_path, kuhn):
        path = tmp_path / "p0.json"
        save_policy(uniform_policy(kuhn, 0), path)
        result = runner.invoke(main, ["eval", "--policy", str(path), "--game", "kuhn"])
        assert result.exit_code == 1


class TestCompare:
    def test_merge_two_runs(self, runner, tmp_path):
        curves = []
        for algorithm in ("cfr", "ed_qc_softmax"):
            result, out = _solve(runner, tmp_path, "--game", "kuhn", "--algorithm", algorithm,
                                 "--iterations", "100", "--eval-every", "1", name=f"{algorithm}.csv")
            assert result.exit_code == 0, result.output
            curves.append(str(out))
        merged = tmp_path / "all.csv"
        result = runner.invoke(main, ["compare", *curves, "--out", str(merged)])
        assert result.exit_code == 0, result.output
        assert len(merged.read_text().strip().splitlines()) == 201

    def test_no_files(self, runner, tmp_path):
        result = runner.invoke(main, ["compare", "--out", str(tmp_path / "all.csv")])
        assert result.exit_code == 2

    def test_not_a_curve(self, runner, tmp_path):
        bogus = tmp_path / "bogus.csv"
        bogus.write_text("a,b\n1,2\n")
        result = runner.invoke(main, ["compare", str(bogus), "--out", str(tmp_path / "all.csv")])
        assert result.exit_code == 2


class TestGames:
    def test_selected(self, runner):
        result = runner.invoke(main, ["games", "kuhn", "goofspiel"])
        assert result.exit_code == 0, result.output
        rows = result.output.strip().splitlines()
        assert rows[0].split()[0] == "game"
        assert [row.split()[0] for row in rows[1:]] == ["goofspiel", "kuhn"]
        assert rows[2].split()[1:] == ["58", "6", "6", "2"]


class TestBatch:
    def test_runs_every_experiment(self, runner, tmp_path):
        batch_file = tmp_path / "batch.yaml"
        batch_file.write_text(
            "defaults:\n"
            "  game: kuhn\n"
            "  iterations: 8\n"
            "  deterministic: true\n"
            "experiments:\n"
            f"  - {{algorithm: cfr, output_path: {tmp_path / 'cfr.csv'}}}\n"
            f"  - {{algorithm: xfp, output_path: {tmp_path / 'xfp.csv'}}}\n"
        )
        result = runner.invoke(main, ["batch", str(batch_file)])
        assert result.exit_code == 0, result.output
        assert result.output.count("✓") == 2
        assert (tmp_path / "cfr.csv").exists() and (tmp_path / "xfp.csv").exists()

    def test_empty_batch(self, runner, tmp_path):
        batch_file = tmp_path / "batch.yaml"
        batch_file.write_text("experiments: []\n")
        result = runner.invoke(main, ["batch", str(batch_file)])
        assert result.exit_code == 2
