"""Command-line front end: one subcommand per experiment, one document per run.

Exit codes: 0 success, 1 a proven inequality failed (an implementation bug),
2 usage or parameter error. Logs go to standard error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from typing import Any

import numpy as np

from . import fourier, groups, wrappers
from .experiments import checks, constructions, replay, search
from .experiments.report import ExperimentReport, timed
from .groups import GroupSet, InequalityViolation

SCHEMA_VERSION = 1
FLOAT_DIGITS = 12
DEFAULT_SEED = 0
DEFAULT_XI = 0.01

log = logging.getLogger("sumwrap")


# serialization

def _canon(obj: Any) -> Any:
    """Plain JSON types; floats rounded to FLOAT_DIGITS significant digits, non-finite to null."""
    if isinstance(obj, GroupSet):
        return _canon(groups.set_to_json(obj))
    if isinstance(obj, dict):
        return {str(k): _canon(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canon(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return [_canon(v) for v in sorted(obj)]
    if isinstance(obj, np.ndarray):
        return _canon(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return float(f"{x:.{FLOAT_DIGITS}g}") if math.isfinite(x) else None
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": _canon(obj.real), "im": _canon(obj.imag)}
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _cell(v: Any) -> str:
    v = _canon(v)
    if v is None:
        return ""
    if isinstance(v, (dict, list)):
        return json.dumps(v, sort_keys=True, separators=(",", ":"))
    return str(v)


def emit_report(report: ExperimentReport, fmt: str = "json", command: str | None = None) -> bytes:
    """Canonical bytes: sorted keys, 12 significant digits, trailing newline."""
    if fmt == "json":
        doc = {
            "schema_version": SCHEMA_VERSION,
            "command": command or report.kind,
            "params": dict(report.params, p_or_N=report.p_or_N),
            "results": report.results,
            "seed": report.seed,
            "runtime_ms": report.runtime_ms,
        }
        return (json.dumps(_canon(doc), sort_keys=True, indent=1) + "\n").encode()
    if fmt == "csv":
        rows = report.rows or [{k: v for k, v in report.results.items()
                                if not isinstance(v, (dict, list, tuple))}]
        columns: list[str] = []
        for row in rows:
            columns.extend(k for k in row if k not in columns)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row.get(k)) for k in columns])
        return buf.getvalue().encode()
    raise ValueError(f"unknown format {fmt!r}")


def load_set(spec: str, N: int | None = None) -> GroupSet:
    """A set from a JSON file, an inline JSON object, or an inline residue list like '1,2,5'."""
    if os.path.exists(spec):
        with open(spec) as fh:
            text = fh.read()
    else:
        text = spec.strip()
    if text.lstrip().startswith("{"):
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError(f"malformed set JSON: {exc}") from None
        S = groups.set_from_json(obj)
        if N is not None and S.N != N:
            raise ValueError(f"set lives in Z_{S.N}, expected Z_{N}")
        return S
    if N is None:
        raise ValueError("an inline residue list needs --N or --p")
    body = text.strip("[] \n")
    try:
        residues = [int(tok) for tok in body.replace(",", " ").split()] if body else []
    except ValueError:
        raise ValueError(f"cannot parse set {spec!r}") from None
    return groups.make_set(residues, N)


# subcommands

def _modulus(args) -> int:
    if args.N is None:
        raise ValueError("this command needs --N or --p")
    return args.N


def _required_set(args, attr: str = "set") -> GroupSet:
    spec = getattr(args, attr)
    if spec is None:
        raise ValueError(f"this command needs --{attr.replace('_', '-')}")
    return load_set(spec, args.N)


def _set_or_construction(args, default_kind: str) -> GroupSet:
    if args.set is not None:
        return load_set(args.set, args.N)
    p = _modulus(args)
    kind = args.kind if args.kind in constructions.KINDS else default_kind
    lam = args.lam if args.lam is not None else (0.3 if kind == "lambda" else None)
    return constructions.construct_extremal(kind, p, lam)


def _xi(args) -> float:
    return args.xi if args.xi is not None else DEFAULT_XI


def _function(args) -> fourier.SpectralFunction:
    """Indicator of --set, or the convolution A*B when --set2 is present."""
    A = _required_set(args)
    if args.set2 is None:
        return fourier.SpectralFunction.indicator(A)
    B = load_set(args.set2, A.N)
    return fourier.SpectralFunction(A.group, groups.convolution_counts(A, B).counts)


def cmd_dft(args) -> ExperimentReport:
    f = _function(args)
    rep = ExperimentReport("dft", f.N)
    with timed(rep):
        F = f.spectrum
        rep.results = {"spectrum": [complex(z) for z in F], "wiener_norm": fourier.wiener_norm(f)}
        rep.rows = [{"r": r, "re": float(z.real), "im": float(z.imag), "abs": float(abs(z))}
                    for r, z in enumerate(F)]
    return rep


def cmd_convolve(args) -> ExperimentReport:
    A = _required_set(args)
    B = load_set(args.set2, A.N) if args.set2 is not None else A
    rep = ExperimentReport("convolve", A.N, {"size_a": A.cardinality, "size_b": B.cardinality})
    with timed(rep):
        counts = groups.convolution_counts(A, B).counts
        rep.results = {"counts": counts, "support_size": int(np.count_nonzero(counts)),
                       "total": int(counts.sum())}
        rep.rows = [{"x": x, "count": int(c)} for x, c in enumerate(counts)]
    return rep


def cmd_wiener(args) -> ExperimentReport:
    if args.set is not None:
        f = _function(args)
        rep = ExperimentReport("wiener", f.N)
        with timed(rep):
            lhs, rhs = fourier.plancherel_sides(f)
            rep.results = {"wiener_norm": fourier.wiener_norm(f), "plancherel": [lhs, rhs]}
        return rep
    N = _modulus(args)
    d = args.d or 2
    K = math.ceil(1 / args.eps) if args.eps else 8
    rep = ExperimentReport("wiener", N, {"d": d, "K": K}, seed=args.seed)
    with timed(rep):
        W = wrappers.random_wrapper(N, d, K, args.seed)
        wr = wrappers.wrapper_wiener_norm(W)
        rep.results = {"exact": wr.exact, "majorant": wr.majorant, "blocks": wr.n_blocks,
                       "size": wrappers.materialize(W).cardinality}
    return rep


def cmd_kloosterman(args) -> ExperimentReport:
    p = _modulus(args)
    rep = ExperimentReport("kloosterman", p)
    bound = 2 * math.sqrt(p)
    with timed(rep):
        if args.sweep:
            mags = fourier.kloosterman_sweep(p)
            a, b = np.unravel_index(int(np.argmax(mags)), mags.shape)
            rep.results = {"max_magnitude": float(mags.max()), "weil_bound": bound,
                           "argmax": [int(a) + 1, int(b) + 1], "pairs": int(mags.size),
                           "violations": 0, "max_ratio": float(mags.max() / bound)}
        else:
            if args.a is None or args.b is None:
                raise ValueError("kloosterman needs --sweep or both --a and --b")
            v = fourier.kloosterman_sum(args.a, args.b, p)
            rep.params.update({"a": v.a, "b": v.b})
            rep.results = {"value": v.value, "magnitude": v.magnitude, "weil_bound": bound}
    return rep


def cmd_west(args) -> ExperimentReport:
    N = _modulus(args)
    samples = args.budget or 200
    rep = ExperimentReport("west", N, {"samples": samples}, seed=args.seed)
    with timed(rep):
        pr = fourier.probe_w(N, samples, args.seed)
        rep.results = {"w_estimate": pr.value, "best_r": pr.best_r, "best_arc": list(pr.best_arc),
                       "log_N": math.log(N), "dyadic_sweep": list(pr.sweep)}
    return rep


def cmd_decompose(args) -> ExperimentReport:
    f = _function(args)
    omega = fourier.wiener_norm(f)
    delta = args.delta if args.delta is not None else 0.1 * omega
    config = wrappers.DecomposeConfig(d_max=args.d) if args.d else None
    rep = ExperimentReport("decompose", f.N, {"delta": delta, "xi": _xi(args)}, seed=args.seed)
    with timed(rep):
        dec = wrappers.decompose(f, delta, _xi(args), config, args.seed)
        res = dec.report()
        res["oscillation"] = wrappers.block_oscillation(dec)
        res["oscillation_bound"] = 2 * math.pi * dec.eps
        res["support_k"] = int(np.count_nonzero(dec.k.values))
        res["exceptional"] = [int(x) for x in dec.exceptional.residues()]
        rep.results = res
    return rep


def cmd_wrap(args) -> ExperimentReport:
    A = _required_set(args)
    B = load_set(args.set2, A.N) if args.set2 is not None else A
    if args.eta is None or args.delta is None:
        raise ValueError("wrap needs --eta and --delta")
    rep = ExperimentReport("wrap", A.N, {"eta": args.eta, "delta": args.delta, "xi": _xi(args)},
                           seed=args.seed)
    with timed(rep):
        W, Y = wrappers.wrap_sumset_complement(A, B, args.eta, args.delta, _xi(args), args.seed)
        Wset = wrappers.materialize(W)
        inner = groups.complement(groups.partial_sumset(A, B, args.eta)) if args.eta > 0 else None
        rep.results = {
            "wrapper": wrappers.wrapper_to_json(W),
            "size": Wset.cardinality,
            "exceptional": [int(x) for x in Y.residues()],
            "level_set_size": inner.cardinality if inner is not None else None,
            "info": W.info,
        }
    return rep


def cmd_construct(args) -> ExperimentReport:
    p = _modulus(args)
    kind = args.kind or "ninth"
    A = constructions.construct_extremal(kind, p, args.lam)
    rep = ExperimentReport("construct", p, {"kind": kind, "lambda": args.lam})
    with timed(rep):
        inv = groups.invert_set(A)
        res = {"residues": [int(x) for x in A.residues()], "size": A.cardinality,
               "density": A.density}
        if kind == "eighth":
            res["checks"] = {"sumset_avoids_inverse": groups.sumset(A, A).isdisjoint(inv),
                             "one_uncovered": not groups.product_sumset_contains(A, 1)}
        elif kind == "ninth":
            res["checks"] = {"sum_free": groups.is_sum_free(A), "self_inverse": inv == A}
        else:
            res["checks"] = {"self_inverse": inv == A}
            res["sumset_with_inverse"] = groups.sumset(A, inv).cardinality
            res["reference"] = 2 * args.lam * p
        rep.results = res
    return rep


def _pair_or_sweep(args, check: str) -> ExperimentReport:
    if args.set is not None:
        A = _required_set(args)
        B = load_set(args.set2, A.N) if args.set2 is not None else A
        if check == "cd":
            return checks.check_cauchy_davenport(A, B)
        if args.eps is None:
            raise ValueError("check-pollard needs --eps")
        return checks.check_pollard_partial(A, B, args.eps)
    return checks.random_pair_sweep(check, _modulus(args), args.budget or 1000, args.seed, args.eps)


def cmd_check_cd(args) -> ExperimentReport:
    return _pair_or_sweep(args, "cd")


def cmd_check_pollard(args) -> ExperimentReport:
    return _pair_or_sweep(args, "pollard")


def cmd_verify_coverage(args) -> ExperimentReport:
    return checks.verify_coverage(_set_or_construction(args, "eighth"))


def cmd_verify_aainv(args) -> ExperimentReport:
    return checks.verify_a_plus_ainv(_set_or_construction(args, "lambda"), args.eps)


_REPLAY_SETS = {"a_a_a": "eighth", "sumfree_selfinv": "ninth", "a_plus_ainv": "lambda"}
# a_plus_ainv needs T = alpha^(3/4) eps^(-1/4) > 1, i.e. eps < alpha^3
REPLAY_LAMBDA = 0.5
REPLAY_DELTA = {"a_a_a": 0.02, "sumfree_selfinv": 0.02, "a_plus_ainv": 0.005}


def cmd_replay(args) -> ExperimentReport:
    kind = args.kind or "a_a_a"
    if kind not in replay.KINDS:
        raise ValueError(f"unknown replay {kind!r}; expected one of {replay.KINDS}")
    p = _modulus(args)
    if args.set is not None:
        A = load_set(args.set, p)
    else:
        cons = _REPLAY_SETS[kind]
        lam = args.lam if args.lam is not None else REPLAY_LAMBDA
        A = constructions.construct_extremal(cons, p, lam if cons == "lambda" else None)
    delta = args.delta if args.delta is not None else REPLAY_DELTA[kind]
    return replay.replay_proof(kind, p, A, delta, _xi(args), args.T, args.seed)


def cmd_exhaustive(args) -> ExperimentReport:
    return search.exhaustive_extremal(_modulus(args), args.kind or "max_sumfree_selfinv")


def cmd_anneal(args) -> ExperimentReport:
    budget = args.budget if args.budget is not None else 5000
    return search.stochastic_search(_modulus(args), args.kind or "max_sumfree_selfinv", budget, args.seed)


COMMANDS = {
    "dft": (cmd_dft, "DFT of an indicator or of A*B"),
    "convolve": (cmd_convolve, "convolution counts (A*B)(x)"),
    "wiener": (cmd_wiener, "Wiener norm of a set or of a random wrapper"),
    "kloosterman": (cmd_kloosterman, "Kloosterman sums and the Weil bound"),
    "west": (cmd_west, "lower estimate of the arc Wiener constant w(Z_N)"),
    "decompose": (cmd_decompose, "f = g + h + k decomposition"),
    "wrap": (cmd_wrap, "wrap the complement of a partial sumset"),
    "construct": (cmd_construct, "extremal interval constructions"),
    "check-cd": (cmd_check_cd, "Cauchy-Davenport check or sweep"),
    "check-pollard": (cmd_check_pollard, "robust Cauchy-Davenport check or sweep"),
    "verify-coverage": (cmd_verify_coverage, "whether A(A+A) covers F_p^*"),
    "verify-aainv": (cmd_verify_aainv, "|A + A*| against min(2 sqrt(|A| p), p)"),
    "replay": (cmd_replay, "numerical replay of a proof chain"),
    "exhaustive": (cmd_exhaustive, "exact extremal search at small p"),
    "anneal": (cmd_anneal, "simulated annealing for extremal sets"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", "--N", dest="N", type=int, help="modulus (prime where required)")
    common.add_argument("--eps", type=float)
    common.add_argument("--delta", type=float)
    common.add_argument("--xi", type=float, help=f"default {DEFAULT_XI}")
    common.add_argument("--eta", type=float)
    common.add_argument("--lambda", dest="lam", type=float)
    common.add_argument("--T", type=float)
    common.add_argument("--d", type=int)
    common.add_argument("--budget", type=int)
    common.add_argument("--a", type=int)
    common.add_argument("--b", type=int)
    common.add_argument("--sweep", action="store_true")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--set", help="set file or inline residues / JSON")
    common.add_argument("--set2", help="second set, same forms as --set")
    common.add_argument("--kind")
    common.add_argument("--out", help="output path (default: standard output)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--timing", action="store_true", help="record wall-clock runtime_ms")
    parser = argparse.ArgumentParser(prog="sumwrap", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text)
    return parser


_PARAM_FLAGS = ("N", "eps", "delta", "xi", "eta", "lam", "T", "d", "budget", "a", "b", "kind")


def dispatch(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.seed < 0 or args.seed >= 1 << 64:
        log.error("--seed must be an unsigned 64-bit integer")
        return 2
    func = COMMANDS[args.command][0]
    try:
        report = func(args)
    except InequalityViolation as exc:
        log.error("inequality violated: %s", exc)
        return 1
    except (ValueError, wrappers.DecompositionError, replay.HypothesisError) as exc:
        log.error("%s", exc)
        return 2
    flags = {("lambda" if k == "lam" else k): getattr(args, k) for k in _PARAM_FLAGS
             if getattr(args, k) is not None}
    report.params = {**flags, **report.params}
    if not args.timing:
        report.runtime_ms = 0
    data = emit_report(report, args.format, args.command)
    if args.out:
        try:
            with open(args.out, "wb") as fh:
                fh.write(data)
        except OSError as exc:
            log.error("cannot write %s: %s", args.out, exc)
            return 2
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    return 0


def main() -> None:
    logging.basicConfig(level=logging.INFO, stream=sys.stderr, format="%(levelname)s %(message)s")
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
