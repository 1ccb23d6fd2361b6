"""Command-line interface: every operation with reproducible seeding and CSV/JSON output.

Exit codes: 0 success, 2 bad input, 3 I/O failure, 4 evaluation budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import metrics, permutation, ris, selectivity
from .errors import BudgetExceededError, PermRisError
from .geometry import Direction
from .metrics import BallConstraint, DEFAULT_DELTA_BY_M
from .permutation import Permutation
from .ris import RisModel, SplitWeights

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_IO = 3
EXIT_BUDGET = 4

SPLIT_REFERENCE = 4.0 / math.pi**2


def _parse_direction(text: str) -> Direction:
    try:
        x, y = text.split(",")
        return Direction(float(x), float(y))
    except (ValueError, TypeError) as exc:
        raise PermRisError(f"bad direction {text!r}, expected KX,KY") from exc


def _parse_int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",")]
    except ValueError as exc:
        raise PermRisError(f"bad integer list {text!r}") from exc


def _parse_float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise PermRisError(f"bad number list {text!r}") from exc


def _load_perm(spec: str, m_side: int, seed) -> Permutation:
    """Permutation from a CLI spec: identity | random | symmetric | separable:FILE | explicit:FILE."""
    if spec == "identity":
        return permutation.identity_perm(m_side)
    if spec == "random":
        return permutation.random_perm(m_side, seed)
    if spec == "symmetric":
        return permutation.random_symmetric_perm(m_side, seed)
    if spec.startswith("separable:"):
        with open(spec.split(":", 1)[1]) as fh:
            doc = json.load(fh)
        return permutation.separable_perm(doc["rows"], doc["cols"])
    if spec.startswith("explicit:"):
        with open(spec.split(":", 1)[1]) as fh:
            doc = json.load(fh)
        targets = doc["targets"] if isinstance(doc, dict) else doc
        return permutation.perm_from_targets(targets)
    raise PermRisError(f"unknown permutation spec {spec!r}")


def _perm_id(spec: str, seed) -> str:
    if spec in ("identity",):
        return "identity"
    if spec in ("random", "symmetric"):
        return f"{spec}-{seed}"
    return os.path.basename(spec.split(":", 1)[1])


def _default_delta(m_side: int) -> float:
    return DEFAULT_DELTA_BY_M.get(m_side, 1.5 / m_side)


def _emit(rows: list[dict], columns: list[str], args) -> None:
    """Write rows as CSV (full float precision, round-trippable) or JSON."""
    if args.out is None:
        return
    if args.format == "json":
        with open(args.out, "w") as fh:
            json.dump(rows, fh, indent=2)
    else:
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(columns)
            for row in rows:
                writer.writerow([repr(v) if isinstance(v, float) else v for v in (row[c] for c in columns)])


def _threads(args) -> int:
    return args.threads if args.threads else (os.cpu_count() or 1)


def cmd_gain(args) -> int:
    model = RisModel(args.m, _load_perm(args.perm, args.m, args.seed))
    incoming = _parse_direction(args.incoming)
    outgoing = _parse_direction(args.outgoing)
    if args.config == "optimal":
        cfg = ris.optimal_config(model, outgoing, incoming)
    elif args.config == "split":
        cfg = ris.beam_split_config(model, incoming, outgoing, SplitWeights(args.alpha))
    elif args.config == "pair":
        model = RisModel(args.m, model.perm, ris.HARDWARE_SHARED_PAIR)
        cfg = ris.symmetric_pair_config(model, incoming, outgoing)
    elif args.config.startswith("file:"):
        with open(args.config.split(":", 1)[1]) as fh:
            cfg = ris.PhaseConfig.from_json(fh.read())
    else:
        raise PermRisError(f"unknown config source {args.config!r}")
    value = ris.gain(model, incoming, outgoing, cfg)
    m4 = float(args.m) ** 4
    normalized = value / m4
    db = 10.0 * math.log10(normalized) if normalized > 0 else float("-inf")
    print(f"gain={value!r}")
    print(f"normalized={normalized!r}")
    print(f"db_rel_max={db!r}")
    _emit(
        [{"gain": value, "normalized": normalized, "db_rel_max": db, "M": args.m}],
        ["gain", "normalized", "db_rel_max", "M"],
        args,
    )
    return EXIT_OK


def cmd_solve_direction(args) -> int:
    t = _parse_direction(args.t)
    r = _parse_direction(args.r)
    solutions = selectivity.solve_full_gain_direction(t, r)
    if not solutions:
        print("none")
    for sol in solutions:
        print(f"z={sol.z.kx!r},{sol.z.ky!r} wrap={sol.wrap[0]},{sol.wrap[1]}")
    rows = [
        {"zx": s.z.kx, "zy": s.z.ky, "wrap1": s.wrap[0], "wrap2": s.wrap[1]}
        for s in solutions
    ]
    _emit(rows, ["zx", "zy", "wrap1", "wrap2"], args)
    return EXIT_OK


def cmd_certify(args) -> int:
    if args.sigma1:
        s1 = _parse_int_list(args.sigma1)
        s2 = _parse_int_list(args.sigma2) if args.sigma2 else s1
        cert = selectivity.certify_separable(s1, s2)
    else:
        perm = _load_perm(args.perm, args.m, args.seed)
        if perm.factors is not None:
            cert = selectivity.certify_separable(*perm.factors)
        else:
            model = RisModel(args.m, perm)
            cert = selectivity.certify_grid(model, exclusion_radius=args.delta or 0.3)
    if cert.selective:
        print("SELECTIVE")
    else:
        d, dt = cert.witness
        print(f"NOT SELECTIVE witness delta={d.kx!r},{d.ky!r} delta_tilde={dt.kx!r},{dt.ky!r}")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(cert.to_json())
    return EXIT_OK


def cmd_beta(args) -> int:
    perm = _load_perm(args.perm, args.m, args.seed)
    model = RisModel(args.m, perm)
    deltas = _parse_float_list(args.delta) if args.delta else [_default_delta(args.m)]
    curve = metrics.beta_curve(model, deltas, n_starts=args.n_starts, seed=args.seed, threads=_threads(args))
    pid = _perm_id(args.perm, args.seed)
    rows = [
        {"delta": d, "beta": b, "perm_id": pid, "M": args.m, "seed": args.seed}
        for d, b in curve
    ]
    for row in rows:
        print(f"delta={row['delta']!r} beta={row['beta']!r}")
    _emit(rows, ["delta", "beta", "perm_id", "M", "seed"], args)
    return EXIT_OK


def cmd_tau(args) -> int:
    perm = _load_perm(args.perm, args.m, args.seed)
    model = RisModel(args.m, perm)
    delta = float(args.delta) if args.delta else _default_delta(args.m)
    rep = metrics.selectivity_tau(
        model, BallConstraint(delta), n_starts=args.n_starts, seed=args.seed, threads=_threads(args)
    )
    print(f"tau={rep.value!r}")
    d, dt = rep.arg
    print(f"arg delta={d.kx!r},{d.ky!r} delta_tilde={dt.kx!r},{dt.ky!r}")
    rows = [
        {
            "tau": rep.value,
            "delta": delta,
            "perm_id": _perm_id(args.perm, args.seed),
            "M": args.m,
            "seed": args.seed,
            "converged_starts": rep.converged_starts,
        }
    ]
    _emit(rows, ["tau", "delta", "perm_id", "M", "seed", "converged_starts"], args)
    return EXIT_OK


def cmd_tau_cdf(args) -> int:
    delta = float(args.delta) if args.delta else _default_delta(args.m)
    points = metrics.tau_cdf(
        args.m,
        BallConstraint(delta),
        n_perms=args.n_perms,
        seed=args.seed,
        n_starts=args.n_starts,
        separable=args.separable,
        threads=_threads(args),
    )
    rows = [
        {"tau": p.tau, "cdf": p.cdf, "perm_id": p.perm_id, "M": args.m, "delta": delta, "seed": args.seed}
        for p in points
    ]
    print(f"tau range [{points[0].tau!r}, {points[-1].tau!r}] over {len(points)} permutations")
    _emit(rows, ["tau", "cdf", "perm_id", "M", "delta", "seed"], args)
    return EXIT_OK


def cmd_pattern(args) -> int:
    perm = _load_perm(args.perm, args.m, args.seed)
    model = RisModel(args.m, perm)
    rho = np.linspace(-1.0, 1.0, args.grid_n)
    sl = metrics.pattern_slice(model, rho)
    pid = _perm_id(args.perm, args.seed)
    rows = [
        {
            "rho_x": float(sl.rho_x_grid[i]),
            "rho_y": float(sl.rho_y_grid[j]),
            "value": float(sl.values[i, j]),
            "M": args.m,
            "perm_id": pid,
        }
        for i in range(sl.rho_x_grid.size)
        for j in range(sl.rho_y_grid.size)
    ]
    print(f"pattern slice {args.grid_n}x{args.grid_n}, peak={float(sl.values.max())!r}")
    _emit(rows, ["rho_x", "rho_y", "value", "M", "perm_id"], args)
    return EXIT_OK


def _direction_pair_sample(rng):
    ang = rng.uniform(0.0, 2.0 * np.pi, size=2)
    rad = np.sqrt(rng.uniform(size=2))
    return (
        Direction(rad[0] * math.cos(ang[0]), rad[0] * math.sin(ang[0])),
        Direction(rad[1] * math.cos(ang[1]), rad[1] * math.sin(ang[1])),
    )


def _print_mc(label: str, samples: np.ndarray) -> None:
    mean = float(samples.mean())
    se = float(samples.std(ddof=1) / math.sqrt(samples.size)) if samples.size > 1 else 0.0
    print(f"{label} mean={mean!r} se={se!r} dist_from_reference={abs(mean - SPLIT_REFERENCE)!r}")


def cmd_split_check(args) -> int:
    perm = _load_perm(args.perm, args.m, args.seed)
    model = RisModel(args.m, perm)
    rng = np.random.default_rng(args.seed)
    m4 = float(args.m) ** 4
    fwd = np.empty(args.n_perms)
    rev = np.empty(args.n_perms)
    for i in range(args.n_perms):
        k, kt = _direction_pair_sample(rng)
        cfg = ris.beam_split_config(model, k, kt, SplitWeights(args.alpha))
        fwd[i] = ris.gain(model, k, kt, cfg) / m4
        rev[i] = ris.gain(model, kt, k, cfg) / m4
    print(f"alpha={args.alpha!r} reference=4/pi^2={SPLIT_REFERENCE!r}")
    _print_mc("forward", fwd)
    _print_mc("reverse", rev)
    _emit(
        [
            {"direction": "forward", "mean": float(fwd.mean()), "M": args.m, "alpha": args.alpha, "seed": args.seed},
            {"direction": "reverse", "mean": float(rev.mean()), "M": args.m, "alpha": args.alpha, "seed": args.seed},
        ],
        ["direction", "mean", "M", "alpha", "seed"],
        args,
    )
    return EXIT_OK


def cmd_sym_check(args) -> int:
    rng = np.random.default_rng(args.seed)
    m4 = float(args.m) ** 4
    vals = np.empty(args.n_perms)
    recip_err = 0.0
    for i in range(args.n_perms):
        perm = permutation.random_symmetric_perm(args.m, seed=[int(args.seed), i])
        model = RisModel(args.m, perm, ris.HARDWARE_SHARED_PAIR)
        k, kt = _direction_pair_sample(rng)
        cfg = ris.symmetric_pair_config(model, k, kt)
        g_fwd = ris.gain(model, k, kt, cfg)
        g_rev = ris.gain(model, kt, k, cfg)
        vals[i] = g_fwd / m4
        recip_err = max(recip_err, abs(g_fwd - g_rev) / max(g_fwd, g_rev, 1.0))
    print(f"reference=4/pi^2={SPLIT_REFERENCE!r}")
    _print_mc("pair-hardware", vals)
    print(f"max_reciprocity_rel_err={recip_err!r}")
    _emit(
        [{"mean": float(vals.mean()), "max_reciprocity_rel_err": recip_err, "M": args.m, "seed": args.seed}],
        ["mean", "max_reciprocity_rel_err", "M", "seed"],
        args,
    )
    return EXIT_OK


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--m", type=int, default=10, help="surface side M (M^2 elements)")
    p.add_argument("--perm", default="identity", help="identity | random | symmetric | separable:FILE | explicit:FILE")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=0, help="0 = all available cores")
    p.add_argument("--out", default=None, help="output file path")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="permris", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gain", help="beamforming gain for one direction pair")
    _add_common(p)
    p.add_argument("--in", dest="incoming", required=True, help="incoming direction KX,KY")
    p.add_argument("--to", dest="outgoing", required=True, help="outgoing direction KX,KY")
    p.add_argument("--config", default="optimal", help="optimal | split | pair | file:PATH")
    p.add_argument("--alpha", type=float, default=0.5)
    p.set_defaults(func=cmd_gain)

    p = sub.add_parser("solve-direction", help="visible directions reaching the full gain")
    _add_common(p)
    p.add_argument("--t", required=True, help="impinging direction KX,KY")
    p.add_argument("--r", required=True, help="configuration direction sum KX,KY")
    p.set_defaults(func=cmd_solve_direction)

    p = sub.add_parser("certify", help="selectivity certificate (exact for separable)")
    _add_common(p)
    p.add_argument("--sigma1", default=None, help="row factor, e.g. 4,3,1,2")
    p.add_argument("--sigma2", default=None, help="column factor (defaults to --sigma1)")
    p.add_argument("--delta", type=float, default=None, help="grid-oracle exclusion radius")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("beta", help="main-lobe floor over a delta grid")
    _add_common(p)
    p.add_argument("--delta", default=None, help="comma list of ball radii")
    p.add_argument("--n-starts", type=int, default=1000)
    p.set_defaults(func=cmd_beta)

    p = sub.add_parser("tau", help="selectivity peak outside the delta ball")
    _add_common(p)
    p.add_argument("--delta", default=None)
    p.add_argument("--n-starts", type=int, default=1000)
    p.set_defaults(func=cmd_tau)

    p = sub.add_parser("tau-cdf", help="empirical CDF of tau over random permutations")
    _add_common(p)
    p.add_argument("--delta", default=None)
    p.add_argument("--n-starts", type=int, default=1000)
    p.add_argument("--n-perms", type=int, default=100)
    p.add_argument("--separable", action="store_true")
    p.set_defaults(func=cmd_tau_cdf)

    p = sub.add_parser("pattern", help="diagonal-slice reflection pattern")
    _add_common(p)
    p.add_argument("--grid-n", type=int, default=81)
    p.set_defaults(func=cmd_pattern)

    p = sub.add_parser("split-check", help="Monte-Carlo beam-split gain estimate")
    _add_common(p)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--n-perms", type=int, default=500, help="number of Monte-Carlo samples")
    p.set_defaults(func=cmd_split_check)

    p = sub.add_parser("sym-check", help="Monte-Carlo symmetric-pair gain estimate")
    _add_common(p)
    p.add_argument("--n-perms", type=int, default=500, help="number of Monte-Carlo samples")
    p.set_defaults(func=cmd_sym_check)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (PermRisError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
