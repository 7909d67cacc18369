"""Command-line driver.

Every command prints a JSON envelope ``{command, config, results,
paper_claim, pass}`` and exits 0 when its claim holds, 1 when it does not
and 2 on usage errors. Defaults can come from a JSON file (``--config``);
flags override it.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from ._accel import BACKEND
from .dec_pomdp import (
    Kernel,
    TablePolicy,
    best_memoryless_policies,
    corollary_checks,
    greedy_relaxed_policies,
    lemma_oneneg_check,
    make_delta_floor_kernel,
    make_periodic_kernel,
    make_uniform_kernel,
    periodic_sync_policies,
    quantum_mp_policies,
    random_history_policies,
    simulate,
)
from .dec_pomdp.model import u_index, v_index
from .dec_pomdp.oracles import exact_reward_profile
from .mermin_peres import (
    LINES,
    MPSquare,
    build_square,
    classical_bruteforce,
    distribution_to_json,
    exact_round_distribution,
    quantum_rounds,
    validate_square,
)
from .quantum import (
    basis_state,
    bell_pair,
    density_from_pure,
    is_entangled_2q,
    maximally_mixed,
    pt_eigenvalues,
)

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEFAULTS = {
    "seed": None,
    "steps": 10000,
    "trials": 9000,
    "delta": 0.05,
    "kernel": "uniform",
    "alice": None,
    "bob": None,
    "policies": "quantum-mp",
    "mode": "classical-bruteforce",
    "out": None,
    "format": "json",
    "contexts": 4,
}

POLICY_CHOICES = ("quantum-mp", "periodic-sync", "best-memoryless", "random-history", "greedy-relaxed")
GAME_MODES = ("classical-bruteforce", "quantum-mc", "quantum-exact")


class UsageError(Exception):
    pass


def _envelope(command: str, config: dict, results: dict, claim: str, passed: bool) -> dict:
    return {"command": command, "config": config, "results": results, "paper_claim": claim, "pass": bool(passed)}


def tampered_square() -> MPSquare:
    """The square with cell (3, 3) negated: column 3 then multiplies to +I."""
    sq = build_square()
    return sq.replace(3, 3, -sq.entry(3, 3))


# ---------------------------------------------------------------------------
# commands


def cmd_validate_square(config: dict | None = None, square: MPSquare | None = None) -> dict:
    config = dict(config or {})
    sq = square if square is not None else (tampered_square() if config.get("tamper") else build_square())
    report = validate_square(sq)
    results = {
        "checks": report.to_dict(),
        "failing": report.failing_checks(),
        "failures": report.failures,
        "max_residual": report.max_residual,
    }
    claim = "square cells are Hermitian +/-1 observables, commute along every line, rows multiply to +I and columns to -I"
    return _envelope("validate-square", config, results, claim, report.passed)


def _game_classical() -> tuple[dict, bool]:
    res = classical_bruteforce()
    results = {
        "max_win_prob": str(res.max_win_prob),
        "max_win_prob_value": float(res.max_win_prob),
        "pair_count": res.pair_count,
        "maximizer_count": len(res.argmax),
        "min_losing_cells": res.min_losing_cells,
        "maximizers": [s.encode() for s in res.argmax],
    }
    ok = res.max_win_prob == Fraction(8, 9) and res.pair_count == 4096 and res.min_losing_cells >= 1
    return results, ok


def _game_quantum_mc(trials: int, seed: int) -> tuple[dict, bool]:
    children = np.random.SeedSequence(seed).spawn(10)
    cells = np.random.default_rng(children[0]).integers(0, 9, size=trials)
    per_cell = {}
    wins = losses = violations = 0
    for c in range(9):
        i, j = c // 3 + 1, c % 3 + 1
        count = int(np.count_nonzero(cells == c))
        a, b = quantum_rounds(i, j, count, np.random.default_rng(children[c + 1]))
        won = a[:, j - 1] * b[:, i - 1] == 1
        bad = np.count_nonzero(a.prod(axis=1) != 1) + np.count_nonzero(b.prod(axis=1) != -1)
        wins += int(won.sum())
        losses += int((~won).sum())
        violations += int(bad)
        per_cell[f"{i},{j}"] = {"rounds": count, "wins": int(won.sum())}
    results = {
        "trials": trials,
        "wins": wins,
        "losses": losses,
        "win_frequency": wins / trials if trials else None,
        "constraint_violations": violations,
        "per_cell": per_cell,
    }
    return results, trials > 0 and losses == 0 and violations == 0


def _game_quantum_exact() -> tuple[dict, bool]:
    cells = {}
    ok = True
    for i in LINES:
        for j in LINES:
            dist = exact_round_distribution(i, j)
            total = sum(dist.values())
            all_win = all(a[j - 1] * b[i - 1] == 1 for a, b in dist)
            parity = all(np.prod(a) == 1 and np.prod(b) == -1 for a, b in dist)
            cells[f"{i},{j}"] = {
                "total_probability": total,
                "support_size": len(dist),
                "all_winning": all_win,
                "parity_ok": parity,
                "distribution": distribution_to_json(dist),
            }
            ok &= abs(total - 1.0) <= 1e-12 and all_win and parity
    return {"cells": cells}, ok


def cmd_game(config: dict) -> dict:
    mode = config["mode"]
    if mode == "classical-bruteforce":
        results, ok = _game_classical()
        claim = "no deterministic (hence no randomised) classical strategy wins the magic-square game with probability above 8/9"
    elif mode == "quantum-mc":
        _require_seed(config, "game --mode quantum-mc")
        results, ok = _game_quantum_mc(int(config["trials"]), int(config["seed"]))
        claim = "with two shared Bell pairs and the square strategy the game is won in every round"
    elif mode == "quantum-exact":
        results, ok = _game_quantum_exact()
        claim = "every outcome the square strategy can produce is a win"
    else:
        raise UsageError(f"unknown game mode {mode!r}; choose from {', '.join(GAME_MODES)}")
    return _envelope("game", config, results, claim, ok)


def load_kernel(selector: str, delta: float, seed: int) -> Kernel:
    if selector == "uniform":
        return make_uniform_kernel()
    if selector == "periodic":
        return make_periodic_kernel()
    if selector == "floor":
        return make_delta_floor_kernel(seed, delta)
    path = Path(selector)
    if path.suffix == ".json" and path.exists():
        return Kernel.load(path)
    raise UsageError(f"unknown kernel {selector!r}: use uniform, floor, periodic or a JSON file")


def make_pair(alice_name: str, bob_name: str, kernel: Kernel, seed: int):
    """Alice's and Bob's policies; a family named for both sides is built once."""
    factories = {
        "quantum-mp": quantum_mp_policies,
        "periodic-sync": periodic_sync_policies,
        "best-memoryless": best_memoryless_policies,
        "random-history": lambda: random_history_policies(seed),
        "greedy-relaxed": lambda: greedy_relaxed_policies(kernel),
    }
    for name in (alice_name, bob_name):
        if name not in factories:
            raise UsageError(f"unknown policy {name!r}; choose from {', '.join(POLICY_CHOICES)}")
    if "greedy-relaxed" in (alice_name, bob_name) and alice_name != bob_name:
        raise UsageError("greedy-relaxed policies only come as a pair")
    alice_pair = factories[alice_name]()
    bob_pair = alice_pair if bob_name == alice_name else factories[bob_name]()
    return alice_pair[0], bob_pair[1]


def cmd_pomdp(config: dict) -> dict:
    _require_seed(config, "pomdp")
    seed = int(config["seed"])
    steps = int(config["steps"])
    if steps < 1:
        raise UsageError("--steps must be >= 1")
    delta = float(config["delta"])
    kernel = load_kernel(str(config["kernel"]), delta, seed)
    a_name = config.get("alice") or config["policies"]
    b_name = config.get("bob") or config["policies"]
    alice, bob = make_pair(a_name, b_name, kernel, seed)
    mode = "relaxed" if "relaxed" in (alice.flavor, bob.flavor) else "decentralized"

    warns = []
    if "periodic-sync" in (a_name, b_name) and kernel.kernel_id != "periodic":
        warns.append("periodic-sync policies assume the periodic kernel")
        warnings.warn(warns[-1], stacklevel=2)

    traj = simulate(alice, bob, kernel, steps, seed, mode=mode)
    results = {"trajectory": traj.summary(), "warnings": warns, "backend": BACKEND}

    floor = min(kernel.min_entry, 1 / 9)  # uniform initial law
    bound = 1 - 2 * floor
    if alice.flavor == bob.flavor == "quantum" and a_name == b_name == "quantum-mp":
        ok = traj.average() == 1.0 and int(traj.rewards.min()) == 1
        claim = "entanglement-assisted square strategy earns reward +1 at every step"
    elif a_name == b_name == "periodic-sync" and kernel.kernel_id == "periodic":
        start = 2
        avg = traj.average(start) if steps > start else None
        results["average_from_step_2"] = avg
        ok = avg == 1.0
        claim = "on the periodic walk each agent knows the other's observation from step 2 on, so reward is +1 from then"
    elif "quantum" not in (alice.flavor, bob.flavor) and floor > 0:
        sigma = traj.stderr()
        avg = traj.average()
        results.update(classical_bound=bound, stderr=sigma, bound_plus_3sigma=bound + 3 * sigma)
        ok = avg <= bound + 3 * sigma
        plan = _shared_plan(alice, bob)
        if plan is not None:
            profile, floors = exact_reward_profile(plan, kernel, min(steps, 200))
            results["exact_max_step_reward"] = float(profile.max())
            results["exact_min_conditional_mass"] = float(floors.min())
            ok &= bool(profile.max() <= bound + 1e-12)
        claim = "with every state reachable with probability >= delta, classical strategies average at most 1 - 2 delta"
    else:
        ok = True
        claim = "no bound asserted for this kernel/policy combination"
    return _envelope("pomdp", config, results, claim, ok), traj


def _shared_plan(alice, bob):
    """Exact-evaluation plan for memoryless or greedy-relaxed pairs, else None."""
    if isinstance(alice, TablePolicy) and isinstance(bob, TablePolicy):
        a = tuple(u_index(t) for t in alice.table)
        b = tuple(v_index(t) for t in bob.table)
        return lambda ctx: (a, b)
    coord = getattr(alice, "coordinator", None)
    if coord is not None and coord is getattr(bob, "coordinator", None):
        return coord.plan
    return None


def cmd_oracles(config: dict) -> dict:
    _require_seed(config, "oracles")
    delta = float(config["delta"])
    if not 0 < delta < 1 / 9:
        raise UsageError("--delta must lie in (0, 1/9)")
    lemma = lemma_oneneg_check()
    cor = corollary_checks(delta, int(config.get("contexts", 4)), seed=int(config["seed"]))
    results = {"lemma": lemma.to_dict(), "corollaries": _jsonable(cor.to_dict())}
    ok = lemma.passed and cor.passed
    claim = "each admissible action pair loses in some cell, so every memoryless pair loses with probability >= delta"
    return _envelope("oracles", config, results, claim, ok)


def cmd_entanglement(config: dict | None = None) -> dict:
    config = dict(config or {})
    bell = density_from_pure(bell_pair())
    prod = density_from_pure(basis_state("00"))
    mixed = maximally_mixed(4)
    results = {}
    for name, rho in [("bell", bell), ("product_00", prod), ("maximally_mixed", mixed)]:
        results[name] = {"pt_eigenvalues": pt_eigenvalues(rho), "entangled": is_entangled_2q(rho)}
    bell_min = results["bell"]["pt_eigenvalues"][-1]
    ok = (
        results["bell"]["entangled"]
        and abs(bell_min + 0.5) <= 1e-9
        and not results["product_00"]["entangled"]
        and not results["maximally_mixed"]["entangled"]
    )
    claim = "the Bell pair shared by the agents is entangled; product and maximally mixed states are not"
    return _envelope("entanglement", config, results, claim, ok)


# ---------------------------------------------------------------------------
# plumbing


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Fraction):
        return str(obj)
    return obj


def _require_seed(config: dict, what: str):
    if config.get("seed") is None:
        raise UsageError(f"{what} is stochastic: --seed is required")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    sup = argparse.SUPPRESS
    common.add_argument("--config", type=Path, default=sup, help="JSON file with default option values")
    common.add_argument("--seed", type=int, default=sup)
    common.add_argument("--steps", type=int, default=sup)
    common.add_argument("--trials", type=int, default=sup)
    common.add_argument("--delta", type=float, default=sup)
    common.add_argument("--kernel", default=sup, help="uniform | floor | periodic | path to kernel JSON")
    common.add_argument("--policies", default=sup, choices=POLICY_CHOICES, help="policy for both agents")
    common.add_argument("--alice", default=sup, choices=POLICY_CHOICES)
    common.add_argument("--bob", default=sup, choices=POLICY_CHOICES)
    common.add_argument("--contexts", type=int, default=sup, help="context values for the conditional check")
    common.add_argument("--out", type=Path, default=sup)
    common.add_argument("--format", default=sup, choices=("json", "csv"))

    parser = argparse.ArgumentParser(prog="qadvantage", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({BACKEND})")
    sub = parser.add_subparsers(dest="command", required=True)
    vs = sub.add_parser("validate-square", parents=[common], help="check the magic-square identities")
    vs.add_argument("--tamper", action="store_true", default=sup, help=sup)
    g = sub.add_parser("game", parents=[common], help="the magic-square game, classical and quantum")
    g.add_argument("--mode", default=sup, choices=GAME_MODES)
    sub.add_parser("pomdp", parents=[common], help="simulate the decentralized POMDP")
    sub.add_parser("oracles", parents=[common], help="exhaustive checks of the classical bound")
    sub.add_parser("entanglement", parents=[common], help="partial-transpose witness on reference states")
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    config = dict(DEFAULTS)
    given = vars(args).copy()
    command = given.pop("command")
    path = given.pop("config", None)
    if path is not None:
        try:
            loaded = json.loads(Path(path).read_text())
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = set(loaded) - set(DEFAULTS) - {"tamper"}
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        config.update(loaded)
    config.update(given)
    config["command"] = command
    return config


def _public_config(config: dict) -> dict:
    return {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(config.items()) if k != "command"}


def run(config: dict):
    command = config["command"]
    traj = None
    if command == "validate-square":
        env = cmd_validate_square(config)
    elif command == "game":
        env = cmd_game(config)
    elif command == "pomdp":
        env, traj = cmd_pomdp(config)
    elif command == "oracles":
        env = cmd_oracles(config)
    elif command == "entanglement":
        env = cmd_entanglement(config)
    else:  # pragma: no cover - argparse restricts the choices
        raise UsageError(f"unknown command {command!r}")
    env["config"] = _public_config(config)
    return _jsonable(env), traj


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = resolve_config(args)
        if config["format"] == "csv" and (config["command"] != "pomdp" or config["out"] is None):
            raise UsageError("--format csv writes a trajectory and needs the pomdp command and --out")
        env, traj = run(config)
    except UsageError as exc:
        parser.error(str(exc))  # exits 2
    text = json.dumps(env, indent=2, sort_keys=True)
    out = config["out"]
    if out is not None and config["format"] == "csv":
        with open(out, "w", newline="") as fh:
            traj.write_csv(fh)
    elif out is not None:
        Path(out).write_text(text + "\n")
    sys.stdout.write(text + "\n")
    return EXIT_PASS if env["pass"] else EXIT_FAIL


if __name__ == "__main__":
    raise SystemExit(main())
