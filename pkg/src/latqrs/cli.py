"""Command-line entry point: ``latqrs {sample, estimate, falcon, attack-demo}``.

Every command is a pure function of its arguments and ``--seed``; output is
JSON (sorted keys) or CSV, written to ``--out`` or stdout.  Exit status is 0
on success, 2 on invalid input and 3 when a size cap is exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import replace

import numpy as np

from latqrs._backend import SupportSizeError
from latqrs._rng import make_rng, spawn
from latqrs.cost_model import BKZ_MODELS, PRESETS, SchemeParams, dual_cost, falcon_bounds, falcon_sweep
from latqrs.dual_attack import (
    TOY_FIXTURE,
    AttackSplit,
    ErrorLaw,
    dual_sampler,
    gen_lwe,
    run_attack,
    sample_dual_list,
    separation_check,
    sum_lattice_lambda1,
)
from latqrs.lattice import Basis
from latqrs.qrs import qubit_count, run_qrs
from latqrs.samplers import build_truncated_support, imhk_sample, klein_batch, klein_context, rejection_batch

EXIT_VALIDATION = 2
EXIT_CAP = 3


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


# --- sample ------------------------------------------------------------------


def _load_basis(args) -> Basis:
    if args.basis:
        with open(args.basis) as fh:
            return Basis.from_json(fh.read())
    if args.basis_json:
        return Basis.from_json(args.basis_json)
    raise ValueError("give --basis FILE or --basis-json TEXT")


def cmd_sample(args) -> dict:
    basis = _load_basis(args)
    c = np.zeros(basis.m) if args.c is None else np.asarray(args.c)
    if c.shape != (basis.m,):
        raise ValueError(f"center has {c.size} entries, basis has m = {basis.m}")
    ctx = klein_context(basis, args.s, c)
    rng = make_rng(args.seed)
    B = np.asarray(basis.matrix)
    summary: dict = {"method": args.method, "count": args.count}
    records = []
    if args.method == "klein":
        X, _, _ = klein_batch(ctx, rng, args.count)
        records = [{"x": x, "v": B @ x} for x in X]
    elif args.method == "imhk":
        chain = imhk_sample(ctx, args.count, rng, burn_in=args.burn_in)
        records = [{"x": x, "v": B @ x} for x in chain.states]
        summary["acceptance_rate"] = chain.acceptance_rate
    else:
        if args.radius is None:
            raise ValueError(f"method {args.method} needs --radius")
        support = build_truncated_support(ctx, args.radius, with_alpha=False, max_points=args.max_points)
        summary.update(support_size=support.size, p_r=support.p_r, delta_r=support.delta_r, qubits=qubit_count(support.size))
        if args.method == "rejection":
            res = rejection_batch(support, ctx, rng, args.count)
            records = [
                {"x": support.points[i], "v": support.vectors[i], "trials": t, "redraws": r}
                for i, t, r in zip(res.indices, res.trials, res.redraws)
            ]
            summary["mean_trials"] = res.mean_trials
        else:
            res = run_qrs(support, rng, args.qrs_mode, args.count)
            records = []
            for j, i in enumerate(res.indices):
                rec = {"x": support.points[i], "v": support.vectors[i]}
                rec.update(res.stats(j).to_dict())
                records.append(rec)
            summary["mean_oracle_calls"] = float(res.oracle_calls.mean())
            summary["iterations"] = res.iterations
    return {"records": records, "summary": summary}


# --- estimate ----------------------------------------------------------------


ESTIMATE_COLUMNS = [
    "scheme", "published_classical", "bits_total_classical", "published_qrs", "bits_total_qrs",
    "m", "n_guess", "n_dual", "beta", "s",
    "log2_N", "bits_search", "bits_bkz", "bits_sampling_classical", "bits_sampling_qrs", "log2_inv_delta",
]


def _scheme_list(args) -> list[SchemeParams]:
    if args.scheme == "custom":
        needed = ["n", "q", "m", "n_guess", "n_dual", "beta", "s_width"]
        missing = [k for k in needed if getattr(args, k) is None]
        if missing:
            raise ValueError("custom scheme needs " + ", ".join("--" + k.replace("_", "-") for k in missing))
        return [
            SchemeParams(
                "custom", args.n, args.q, args.m, args.n_guess, args.n_dual, args.beta, args.s_width,
                N_log2=args.n_log2, eps_tail=args.eps_tail, guess_bits=args.guess_bits,
            )
        ]
    names = ["kyber512", "kyber768", "kyber1024"] if args.scheme == "all" else [args.scheme]
    if args.ms:
        names = [n + "-ms" for n in names]
    out = []
    for name in names:
        p = PRESETS[name]
        if args.n_log2 is not None:
            p = replace(p, N_log2=args.n_log2)
        out.append(p)
    return out


def cmd_estimate(args) -> dict:
    records = []
    for p in _scheme_list(args):
        r = dual_cost(p, args.model, args.poly, args.n_rule, args.c_exp)
        rec = {
            "scheme": p.name, "m": p.m, "n_guess": p.n_guess, "n_dual": p.n_dual, "beta": p.beta, "s": p.s,
            "published_classical": p.published_classical, "published_qrs": p.published_qrs,
        }
        d = r.to_dict()
        for key in ("log2_N", "bits_search", "bits_bkz", "bits_sampling_classical", "bits_sampling_qrs",
                    "bits_total_classical", "bits_total_qrs", "log2_inv_delta", "alpha_r"):
            rec[key] = d[key]
        records.append(rec)
    return {"records": records, "summary": {"model": args.model, "poly": args.poly, "n_rule": args.n_rule}}


# --- falcon ------------------------------------------------------------------


def cmd_falcon(args) -> dict:
    if args.sweep:
        if args.s_max < args.s_min or args.points < 2:
            raise ValueError("need s_max >= s_min and at least 2 points")
        s_values = np.linspace(args.s_min * args.b_max, args.s_max * args.b_max, args.points)
        records = falcon_sweep(args.b_max, s_values, args.n, args.eps)
        return {"records": records, "summary": {"b_max": args.b_max, "n": args.n, "eps": args.eps}}
    rows = falcon_bounds(args.n, args.gammas, args.eps)
    records = [
        {k: v for k, v in r.to_dict().items() if k in ("gamma", "s_over_bmax", "sigma_over_bmax", "mcmc_bound", "qrs_bound")}
        for r in rows
    ]
    return {"records": records, "summary": {"n": args.n, "eps": args.eps}}


FALCON_COLUMNS = ["gamma", "s_over_bmax", "sigma_over_bmax", "mcmc_bound", "qrs_bound"]
SWEEP_COLUMNS = ["s", "gamma", "mcmc_bound", "qrs_bound"]


# --- attack-demo -------------------------------------------------------------


def cmd_attack_demo(args) -> dict:
    if not 0 <= args.n_guess < args.n:
        raise ValueError(f"need 0 <= n_guess < n, got n_guess={args.n_guess}, n={args.n}")
    split = AttackSplit(args.n_guess, args.n - args.n_guess)
    chi = ErrorLaw(args.chi, args.chi_width)
    records = []
    wins = 0
    for t, rng in enumerate(spawn(args.seed, args.trials)):
        inst = gen_lwe(args.m, args.n, args.q, chi, rng)
        _, A_dual, s_guess, _ = split.apply(inst)
        sampler = dual_sampler(A_dual, args.q, args.s_width, args.N, args.eps_tail, enumerate_support=args.method == "qrs")
        W = sample_dual_list(sampler, args.N, rng, args.method)
        if not W.check(A_dual):
            raise RuntimeError("dual sample outside L_q^perp(A_dual)")
        res = run_attack(inst, split, W, jobs=args.jobs)
        ok = res.guess is not None and bool(np.array_equal(res.guess, s_guess))
        wins += ok
        rec = {
            "trial": t,
            "guess": None if res.guess is None else res.guess,
            "secret_guess": s_guess,
            "success": ok,
            "best_score": res.best_score / args.N,
            "e_norm": float(np.linalg.norm(inst.e)),
        }
        if args.check_separation:
            lam = sum_lattice_lambda1(inst.A, args.q)
            rep = separation_check(lam, rec["e_norm"], args.s_width, args.m, args.delta)
            rec["separation_ok"] = rep.ok
            rec["separation_margin"] = rep.margin
        if args.transcript and t == 0:
            rec["transcript"] = {"instance": inst.to_dict(), "W": W.W, "scores": res.scores}
        records.append(rec)
    summary = {"success_rate": wins / args.trials, "trials": args.trials, "method": args.method}
    return {"records": records, "summary": summary}


ATTACK_COLUMNS = ["trial", "success", "best_score", "e_norm"]


# --- plumbing ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="64-bit seed for the Philox generator")
    common.add_argument("--out", default=None, help="output path (stdout when omitted)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--jobs", type=int, default=1, help="threads for the guess loop")

    parser = argparse.ArgumentParser(prog="latqrs", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", parents=[common], help="draw lattice Gaussian samples")
    p.add_argument("--basis", help="basis JSON file ({m, n, columns})")
    p.add_argument("--basis-json", help="basis JSON given inline")
    p.add_argument("--s", type=float, required=True, help="Gaussian width")
    p.add_argument("--c", type=_floats, default=None, help="center, comma-separated")
    p.add_argument("--radius", type=float, default=None, help="truncation radius (rejection, qrs)")
    p.add_argument("--method", choices=("klein", "imhk", "rejection", "qrs"), default="klein")
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--burn-in", type=int, default=1000)
    p.add_argument("--qrs-mode", choices=("optimal", "fixed_point"), default="optimal")
    p.add_argument("--max-points", type=int, default=1 << 20)
    p.set_defaults(func=cmd_sample, columns=None)

    p = sub.add_parser("estimate", parents=[common], help="dual-attack bit costs")
    p.add_argument("--scheme", choices=("all", "kyber512", "kyber768", "kyber1024", "custom"), default="all")
    p.add_argument("--ms", action="store_true", help="modulus-switching parameter rows")
    p.add_argument("--model", choices=BKZ_MODELS, default="core-svp-classical")
    p.add_argument("--poly", choices=("one", "mn"), default="one")
    p.add_argument("--n-rule", choices=("preset", "success-bound"), default="preset")
    p.add_argument("--c-exp", type=float, default=2.0)
    p.add_argument("--n-log2", type=float, default=None)
    p.add_argument("--eps-tail", type=float, default=0.01)
    for name in ("n", "q", "m", "n-guess", "n-dual", "beta"):
        p.add_argument("--" + name, type=int, default=None)
    p.add_argument("--s-width", type=float, default=None, help="width parameter s (custom)")
    p.add_argument("--guess-bits", type=float, default=None)
    p.set_defaults(func=cmd_estimate, columns=ESTIMATE_COLUMNS)

    p = sub.add_parser("falcon", parents=[common], help="trapdoor-sampling theta bounds")
    p.add_argument("--n", type=int, default=1024)
    p.add_argument("--gammas", type=_floats, default=[math.pi / 2, 2.0, 3.0])
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--sweep", action="store_true", help="sweep s over [s_min, s_max] * B_max")
    p.add_argument("--b-max", type=float, default=127.0)
    p.add_argument("--s-min", type=float, default=1.0)
    p.add_argument("--s-max", type=float, default=2.0)
    p.add_argument("--points", type=int, default=21)
    p.set_defaults(func=cmd_falcon, columns=FALCON_COLUMNS)

    p = sub.add_parser("attack-demo", parents=[common], help="toy dual attack")
    p.add_argument("--m", type=int, default=TOY_FIXTURE["m"])
    p.add_argument("--n", type=int, default=TOY_FIXTURE["n"])
    p.add_argument("--n-guess", type=int, default=TOY_FIXTURE["n_guess"])
    p.add_argument("--q", type=int, default=TOY_FIXTURE["q"])
    p.add_argument("--N", type=int, default=TOY_FIXTURE["N"])
    p.add_argument("--s-width", type=float, default=TOY_FIXTURE["s"], help="dual width is q * s")
    p.add_argument("--chi", choices=("gaussian", "uniform", "zero"), default="gaussian")
    p.add_argument("--chi-width", type=float, default=TOY_FIXTURE["chi_width"])
    p.add_argument("--eps-tail", type=float, default=0.01)
    p.add_argument("--delta", type=float, default=TOY_FIXTURE["delta"])
    p.add_argument("--method", choices=("klein", "rejection", "imhk", "qrs"), default="rejection")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--check-separation", action="store_true")
    p.add_argument("--transcript", action="store_true", help="include instance, W and scores of trial 0")
    p.set_defaults(func=cmd_attack_demo, columns=ATTACK_COLUMNS)
    return parser


def render(result: dict, args) -> str:
    payload = {"command": args.command, "seed": args.seed, **result}
    if args.format == "json":
        return json.dumps(payload, sort_keys=True, indent=2, default=_jsonable) + "\n"
    records = json.loads(json.dumps(result["records"], default=_jsonable))
    columns = args.columns
    if args.command == "falcon" and args.sweep:
        columns = SWEEP_COLUMNS
    if columns is None:
        columns = list(records[0]) if records else []
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for rec in records:
        writer.writerow({k: json.dumps(v) if isinstance(v, list) else v for k, v in rec.items()})
    return buf.getvalue()


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.jobs < 1:
        parser.error("--jobs must be at least 1")
    try:
        text = render(args.func(args), args)
    except (SupportSizeError, OverflowError) as exc:
        print(f"latqrs: size cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ValueError, KeyError, OSError) as exc:
        print(f"latqrs: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
