import csv
import json

import pytest

from qadvantage.cli import cmd_entanglement, cmd_validate_square, main, tampered_square
from qadvantage.dec_pomdp import make_delta_floor_kernel


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out), out


class TestValidateSquare:
    def test_default(self, capsys):
        code, env, _ = run(capsys, "validate-square")
        assert code == 0 and env["pass"] is True
        assert set(env) == {"command", "config", "results", "paper_claim", "pass"}
        assert len(env["results"]["checks"]) == 6
        assert all(c["max_residual"] < 1e-12 for c in env["results"]["checks"].values())

    def test_tamper_hook(self, capsys):
        code, env, _ = run(capsys, "validate-square", "--tamper")
        assert code == 1 and env["pass"] is False
        assert "column_products" in env["results"]["failing"]

    def test_function_entry_point(self):
        assert cmd_validate_square()["pass"] is True
        assert cmd_validate_square(square=tampered_square())["pass"] is False


class TestGame:
    def test_classical(self, capsys):
        code, env, _ = run(capsys, "game", "--mode", "classical-bruteforce")
        assert code == 0
        assert env["results"]["max_win_prob"] == "8/9"
        assert env["results"]["pair_count"] == 4096

    @pytest.mark.parametrize("seed", ["0", "987654321"])
    def test_quantum_mc(self, capsys, seed):
        code, env, _ = run(capsys, "game", "--mode", "quantum-mc", "--trials", "9000", "--seed", seed)
        assert code == 0
        assert env["results"]["win_frequency"] == 1.0
        assert sum(c["rounds"] for c in env["results"]["per_cell"].values()) == 9000

    def test_quantum_exact(self, capsys):
        code, env, _ = run(capsys, "game", "--mode", "quantum-exact")
        assert code == 0
        assert all(c["all_winning"] for c in env["results"]["cells"].values())

    def test_quantum_mc_needs_seed(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["game", "--mode", "quantum-mc"])
        assert exc.value.code == 2

    def test_bad_mode(self):
        with pytest.raises(SystemExit) as exc:
            main(["game", "--mode", "telepathy"])
        assert exc.value.code == 2


class TestPomdp:
    def test_quantum_uniform(self, capsys):
        code, env, _ = run(capsys, "pomdp", "--seed", "5", "--steps", "10000", "--kernel", "uniform")
        assert code == 0
        assert env["results"]["trajectory"]["average"] == 1.0

    def test_periodic_sync(self, capsys):
        code, env, _ = run(capsys, "pomdp", "--seed", "1", "--steps", "9003", "--kernel", "periodic", "--policies", "periodic-sync")
        assert code == 0
        assert env["results"]["average_from_step_2"] == 1.0
        assert env["results"]["warnings"] == []

    def test_sync_on_wrong_kernel_warns(self, capsys):
        with pytest.warns(UserWarning):
            code, env, _ = run(capsys, "pomdp", "--seed", "1", "--steps", "50", "--policies", "periodic-sync")
        assert code == 0
        assert env["results"]["warnings"]

    def test_best_memoryless(self, capsys):
        code, env, _ = run(capsys, "pomdp", "--seed", "2", "--steps", "100000", "--policies", "best-memoryless")
        assert code == 0
        r = env["results"]
        assert r["classical_bound"] == pytest.approx(7 / 9)
        assert r["trajectory"]["average"] <= r["bound_plus_3sigma"]
        assert r["exact_max_step_reward"] <= 7 / 9 + 1e-12

    def test_greedy_relaxed_floor(self, capsys):
        code, env, _ = run(capsys, "pomdp", "--seed", "4", "--steps", "3000", "--kernel", "floor", "--policies", "greedy-relaxed")
        assert code == 0
        assert env["results"]["trajectory"]["mode"] == "relaxed"
        assert env["results"]["exact_min_conditional_mass"] > 0.05

    def test_mixed_pair(self, capsys):
        code, env, _ = run(capsys, "pomdp", "--seed", "4", "--steps", "200", "--alice", "random-history", "--bob", "best-memoryless", "--kernel", "floor")
        assert code == 0
        assert env["results"]["trajectory"]["alice"].startswith("random-history")

    def test_kernel_file(self, capsys, tmp_path):
        path = tmp_path / "kernel.json"
        make_delta_floor_kernel(77, 0.04).save(path)
        code, env, _ = run(capsys, "pomdp", "--seed", "1", "--steps", "300", "--kernel", str(path), "--policies", "random-history")
        assert code == 0
        assert env["results"]["classical_bound"] < 1 - 2 * 0.04

    def test_csv_output(self, capsys, tmp_path):
        out = tmp_path / "traj.csv"
        code, env, _ = run(capsys, "pomdp", "--seed", "1", "--steps", "25", "--format", "csv", "--out", str(out))
        assert code == 0
        rows = list(csv.DictReader(out.open()))
        assert len(rows) == 25
        assert list(rows[0]) == ["n", "x", "y", "u", "v", "r", "running_avg"]
        assert {r["r"] for r in rows} == {"1"}

    def test_json_out_file(self, capsys, tmp_path):
        out = tmp_path / "report.json"
        _, env, text = run(capsys, "pomdp", "--seed", "1", "--steps", "25", "--out", str(out))
        assert out.read_text() == text

    @pytest.mark.parametrize(
        "argv",
        [
            ["pomdp", "--steps", "10"],
            ["pomdp", "--seed", "1", "--kernel", "nowhere.json"],
            ["pomdp", "--seed", "1", "--steps", "0"],
            ["pomdp", "--seed", "1", "--format", "csv"],
            ["validate-square", "--format", "csv", "--out", "x.csv"],
            ["pomdp", "--seed", "1", "--alice", "greedy-relaxed", "--bob", "quantum-mp"],
            ["pomdp", "--seed", "1", "--policies", "oracle"],
            ["oracles", "--seed", "1", "--delta", "0.2"],
        ],
    )
    def test_usage_errors(self, argv):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 2


class TestOraclesEntanglement:
    def test_oracles(self, capsys):
        code, env, _ = run(capsys, "oracles", "--seed", "0", "--delta", "0.05")
        assert code == 0
        r = env["results"]
        assert r["lemma"]["pairs_checked"] == 16
        assert r["corollaries"]["uniform_min_loss"] == "1/9"
        assert r["corollaries"]["floor_min_loss"] >= 0.05

    def test_entanglement(self, capsys):
        code, env, _ = run(capsys, "entanglement")
        assert code == 0
        assert env["results"]["bell"]["pt_eigenvalues"][-1] == pytest.approx(-0.5, abs=1e-9)
        assert env["results"]["product_00"]["entangled"] is False
        assert cmd_entanglement()["pass"] is True


class TestConfig:
    def test_byte_identical(self, capsys):
        argv = ["pomdp", "--seed", "11", "--steps", "400", "--kernel", "floor", "--policies", "random-history"]
        _, _, first = run(capsys, *argv)
        _, _, second = run(capsys, *argv)
        assert first == second

    def test_byte_identical_game(self, capsys):
        argv = ["game", "--mode", "quantum-mc", "--seed", "3", "--trials", "500"]
        assert run(capsys, *argv)[2] == run(capsys, *argv)[2]

    def test_config_file_and_override(self, capsys, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"seed": 8, "steps": 60, "kernel": "floor", "policies": "random-history"}))
        _, env, _ = run(capsys, "pomdp", "--config", str(cfg))
        assert env["config"]["steps"] == 60 and env["config"]["seed"] == 8
        _, env, _ = run(capsys, "pomdp", "--config", str(cfg), "--steps", "70")
        assert env["config"]["steps"] == 70
        assert env["results"]["trajectory"]["steps"] == 70

    def test_bad_config(self, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"sed": 1}))
        with pytest.raises(SystemExit) as exc:
            main(["pomdp", "--config", str(cfg)])
        assert exc.value.code == 2

    def test_claim_is_plain_text(self, capsys):
        for argv in (["validate-square"], ["entanglement"], ["game"]):
            _, env, _ = run(capsys, *argv)
            assert env["paper_claim"] and "§" not in env["paper_claim"]
