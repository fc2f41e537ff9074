"""Command line front end.

Node ids on the command line are 1-based; files written by the library
(JSON set lists) are 0-based and say so in an ``index_base`` field.
Exit codes: 0 success; 1 an analysis answered in the negative (not
termatiko, split failed, decoder did not converge) or an input file failed
validation (a JSON report goes to stderr); 2 usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import secrets
import sys
import time
from fractions import Fraction

from . import __version__
from .tanner import (MatrixFormatError, MatrixValidationError, MeasurementMatrix, atomic_write_text,
                     load_matrix, save_matrix)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


# -- helpers -------------------------------------------------------------------

def _parse_ids(text: str) -> list[int]:
    """``"1,2,5"`` (1-based) -> ``[0, 1, 4]``."""
    try:
        ids = [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise UsageError(f"bad node list {text!r}") from None
    if any(i < 1 for i in ids):
        raise UsageError("node ids are 1-based")
    return [i - 1 for i in ids]


def _parse_weights(text: str) -> list[int]:
    """``"1..50"``, ``"3,5,7"`` or a mix like ``"1..4,10"``."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if ".." in part:
                a, b = part.split("..")
                out.extend(range(int(a), int(b) + 1))
            else:
                out.append(int(part))
        except ValueError:
            raise UsageError(f"bad weight list {text!r}") from None
    return out


def _load(path) -> MeasurementMatrix:
    if not os.path.exists(path):
        raise UsageError(f"no such file: {path}")
    return load_matrix(path)


def _load_sets(path) -> list[tuple[int, ...]]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read set list {path}: {exc}") from None
    base = int(obj.get("index_base", 0)) if isinstance(obj, dict) else 0
    sets = obj["sets"] if isinstance(obj, dict) else obj
    return [tuple(sorted(int(x) - base for x in s)) for s in sets]


def _fmt_value(v) -> str:
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    return repr(v) if isinstance(v, float) else str(v)


class Manifest:
    """Run record written next to every output file."""

    def __init__(self, args, command: str):
        self.data = {
            "tool": "termatiko",
            "version": __version__,
            "command": command,
            "argv": sys.argv[1:],
            "started": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
            "params": {k: v for k, v in vars(args).items() if k != "func" and _jsonable(v)},
        }
        self._t0 = time.perf_counter()

    def set(self, **kw):
        self.data.update(kw)

    def write(self, out_path):
        self.data["wall_seconds"] = round(time.perf_counter() - self._t0, 6)
        atomic_write_text(str(out_path) + ".manifest.json", json.dumps(self.data, indent=2, sort_keys=True) + "\n")


def _jsonable(v) -> bool:
    try:
        json.dumps(v)
        return True
    except TypeError:
        return False


def _write_json(path, obj):
    atomic_write_text(path, json.dumps(obj, indent=2) + "\n")


def _seed(args) -> int:
    seed = args.seed if args.seed is not None else secrets.randbits(32)
    print(f"seed: {seed}", file=sys.stderr)
    return seed


# -- commands --------------------------------------------------------------------

def cmd_ipa_run(args) -> int:
    from .ipa import ipa_run

    mat = _load(args.matrix)
    try:
        y = [Fraction(t) for t in args.y.replace(" ", "").split(",") if t]
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"bad measurement list {args.y!r}") from None
    res = ipa_run(mat, y, mode=args.mode, max_iters=args.max_iters, trace=args.trace)
    if args.format == "json":
        print(json.dumps({"estimate": [_fmt_value(v) for v in res.estimate],
                          "upper": [_fmt_value(v) for v in res.M],
                          "iterations": res.iterations, "converged": res.converged}))
    else:
        if args.trace:
            for st in res.trace:
                if st.phase == "variable":
                    lo = " ".join(_fmt_value(v) for v in st.mu)
                    hi = " ".join(_fmt_value(v) for v in st.M)
                    print(f"iter {st.iteration}: lower {lo} | upper {hi}")
        print(" ".join(_fmt_value(v) for v in res.estimate))
    if not res.converged:
        print("warning: iteration cap reached before convergence", file=sys.stderr)
        return EXIT_NEGATIVE
    return EXIT_OK


def cmd_stopping_enum(args) -> int:
    from .stopping import enumerate_stopping_sets

    mat = _load(args.matrix)
    man = Manifest(args, "stopping enum")
    anchor = None if args.anchor is None else args.anchor - 1
    res = enumerate_stopping_sets(mat, args.tau, anchor=anchor, budget=args.budget)
    res.save(args.out)
    man.set(matrix_digest=mat.digest(), exhaustive=res.exhaustive, nodes=res.nodes,
            by_size={str(k): v for k, v in res.by_size().items()})
    man.write(args.out)
    print(f"{len(res.sets)} stopping sets of size <= {args.tau}"
          + ("" if res.exhaustive else " (node budget exhausted: list is partial)"))
    return EXIT_OK


def cmd_termatiko_check(args) -> int:
    from .termatiko_sets import companion_sets, is_termatiko_operational, termatiko_class

    mat = _load(args.matrix)
    T = _parse_ids(args.set)
    if any(v >= mat.n for v in T):
        raise UsageError("node id beyond the number of columns")
    cls = termatiko_class(mat, T)
    verdict = cls > 0
    if args.method in ("operational", "both"):
        op = is_termatiko_operational(mat, T)
        if args.method == "operational":
            verdict = op
        elif op != verdict:
            print("error: structural and operational verdicts disagree", file=sys.stderr)
            return EXIT_NEGATIVE
    if args.format == "json":
        cs = companion_sets(mat, T)
        print(json.dumps({"termatiko": verdict, "class": cls,
                          "N": [c + 1 for c in cs.N], "S": [v + 1 for v in cs.S]}))
    else:
        print("TERMATIKO" if verdict else "NOT TERMATIKO")
    return EXIT_OK if verdict else EXIT_NEGATIVE


def cmd_termatiko_spectrum(args) -> int:
    from .stopping import StoppingSetList
    from .termatiko_sets import stopping_subset_spectrum

    mat = _load(args.matrix)
    man = Manifest(args, "termatiko spectrum")
    try:
        stop = StoppingSetList.load(args.stopping)
    except (OSError, KeyError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read stopping sets: {exc}") from None
    if stop.matrix_digest and stop.matrix_digest != mat.digest():
        raise UsageError("stopping sets were computed for a different matrix")
    spectrum = stopping_subset_spectrum(mat, stop, args.max_size, column_transitive=args.column_transitive)
    _write_json(args.out, spectrum.to_json())
    man.set(matrix_digest=mat.digest(), by_size={str(k): v for k, v in spectrum.by_size.items()})
    man.write(args.out)
    for t, k in spectrum.by_size.items():
        print(f"size {t}: {k} (class 1: {spectrum.class1.get(t, 0)}, class 2: {spectrum.class2.get(t, 0)})")
    print(f"smallest size found: {spectrum.h_min_estimate}")
    return EXIT_OK


def cmd_split(args) -> int:
    from .split import SUCCESS, split_exhaustive, split_repeated

    mat = _load(args.matrix)
    D = _parse_ids(args.set)
    if any(v >= mat.n for v in D):
        raise UsageError("node id beyond the number of columns")
    if args.exhaustive:
        rep = split_exhaustive(mat, D)
        if args.format == "json":
            print(json.dumps({"splits": [[[v + 1 for v in a], [v + 1 for v in b]] for a, b in rep.splits]}))
        else:
            for a, b in rep.splits:
                print(" ".join(str(v + 1) for v in a) + " | " + " ".join(str(v + 1) for v in b))
            print(f"{rep.count} valid splits")
        return EXIT_OK if rep.count else EXIT_NEGATIVE
    seed = _seed(args)
    outs = split_repeated(mat, D, args.attempts, seed=seed)
    last = outs[-1]
    if last.status == SUCCESS:
        print("SUCCESS")
        print("T: " + " ".join(str(v + 1) for v in last.T))
        print("S: " + " ".join(str(v + 1) for v in last.S))
        print(f"attempts: {len(outs)}, random guesses: {last.random_guesses}")
        return EXIT_OK
    print(f"FAIL after {len(outs)} attempts")
    return EXIT_NEGATIVE


def cmd_array_gen(args) -> int:
    from .array_ldpc import build_H

    try:
        H = build_H(args.q, args.a)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    man = Manifest(args, "array gen")
    save_matrix(H, args.out)
    man.set(matrix_digest=H.digest())
    man.write(args.out)
    print(f"wrote H({args.q},{args.a}): {H.m} x {H.n}")
    return EXIT_OK


def cmd_array_size3(args) -> int:
    from .array_ldpc import size3_count, size3_termatiko_sets

    try:
        sets = size3_termatiko_sets(args.q)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    man = Manifest(args, "array size3")
    _write_json(args.out, {"q": args.q, "a": 3, "index_base": 0, "sets": [list(s) for s in sets]})
    man.set(count=len(sets), closed_form=size3_count(args.q))
    man.write(args.out)
    print(f"{len(sets)} termatiko sets of size 3 (closed form {size3_count(args.q)})")
    return EXIT_OK


def cmd_redundant_extend(args) -> int:
    from .redundancy import greedy_extend

    mat = _load(args.matrix)
    sets = _load_sets(args.termatiko)
    man = Manifest(args, "redundant extend")
    res = greedy_extend(mat, sets, max_rows=args.max_rows, bound=args.coeff_bound)
    save_matrix(res.matrix, args.out)
    log = {
        "index_base": 0,
        "pool_size": res.pool_size,
        "steps": [{
            "row": s.row_index, "kind": s.candidate.kind, "T": list(s.candidate.T),
            "pivot": s.candidate.pivot, "coefficients": list(s.candidate.coefficients),
            "entries": {str(k): v for k, v in sorted(s.candidate.row.items())},
            "score": s.score, "removed": [list(T) for T in s.removed],
        } for s in res.steps],
        "remaining": [list(T) for T in res.remaining],
    }
    if args.log:
        _write_json(args.log, log)
    man.set(matrix_digest=mat.digest(), output_digest=res.matrix.digest(), rows_added=len(res.steps),
            remaining=len(res.remaining))
    man.write(args.out)
    print(f"added {len(res.steps)} rows; {len(res.remaining)} of {len(sets)} sets remain")
    return EXIT_OK


def cmd_fer_sim(args) -> int:
    from .analysis import fer_simulate, write_fer_csv

    mat = _load(args.matrix)
    seed = _seed(args)
    man = Manifest(args, "fer sim")
    pts = fer_simulate(mat, _parse_weights(args.weights), args.trials, seed=seed, workers=args.threads)
    write_fer_csv(args.out, pts)
    man.set(matrix_digest=mat.digest(), seed=seed)
    man.write(args.out)
    for p in pts:
        print(f"w={p.weight}: {p.value:.6g} [{p.ci_lo:.6g}, {p.ci_hi:.6g}]")
    return EXIT_OK


def cmd_fer_bound(args) -> int:
    from .analysis import FerPoint, pie_lower_bound, write_fer_csv

    mat = _load(args.matrix)
    sets = _load_sets(args.sets)
    man = Manifest(args, "fer bound")
    try:
        bound = pie_lower_bound(mat.n, sets, _parse_weights(args.weights), depth=args.depth,
                                filter_antichain=args.filter)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    pts = [FerPoint(w, 0, 0, float(v), float("nan"), float("nan"), exact=v) for w, v in bound.items()]
    write_fer_csv(args.out, pts)
    man.set(matrix_digest=mat.digest(), sets=len(sets))
    man.write(args.out)
    for w, v in bound.items():
        print(f"w={w}: {float(v):.6g} ({v})")
    return EXIT_OK


def cmd_matrix_convert(args) -> int:
    mat = _load(args.input)
    save_matrix(mat, args.output, args.to)
    print(f"wrote {args.output}")
    return EXIT_OK


def cmd_matrix_info(args) -> int:
    from .termatiko_sets import column_regular_degree, girth_at_least_6

    mat = _load(args.matrix)
    info = {"m": mat.m, "n": mat.n, "nnz": mat.nnz, "binary": mat.is_binary,
            "column_degree": column_regular_degree(mat), "no_4_cycles": girth_at_least_6(mat),
            "digest": mat.digest()}
    if args.format == "json":
        print(json.dumps(info))
    else:
        for k, v in info.items():
            print(f"{k}: {v}")
    return EXIT_OK


# -- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(add_help=False)
    top.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                     help="worker processes where supported (fer sim)")
    top.add_argument("--format", choices=("json", "csv", "text"), default="text")
    # the same options after the subcommand; SUPPRESS keeps a value given
    # before the subcommand from being reset
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS)
    common.add_argument("--format", choices=("json", "csv", "text"), default=argparse.SUPPRESS)

    p = argparse.ArgumentParser(prog="termatiko", description="Interval-passing failure analysis", parents=[top])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="group", required=True)

    g = sub.add_parser("ipa", help="interval passing").add_subparsers(dest="action", required=True)
    s = g.add_parser("run", parents=[common], help="reconstruct from measurements")
    s.add_argument("--matrix", required=True)
    s.add_argument("--y", required=True, help="comma separated measurements")
    s.add_argument("--trace", action="store_true")
    s.add_argument("--mode", choices=("exact", "approx"), default="exact")
    s.add_argument("--max-iters", type=int, default=None)
    s.set_defaults(func=cmd_ipa_run)

    g = sub.add_parser("stopping", help="stopping sets").add_subparsers(dest="action", required=True)
    s = g.add_parser("enum", parents=[common], help="enumerate stopping sets up to a size")
    s.add_argument("--matrix", required=True)
    s.add_argument("--tau", type=int, required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--budget", type=int, default=10**8, help="search-node budget")
    s.add_argument("--anchor", type=int, default=None, help="only sets containing this column (1-based)")
    s.set_defaults(func=cmd_stopping_enum)

    g = sub.add_parser("termatiko", help="termatiko sets").add_subparsers(dest="action", required=True)
    s = g.add_parser("check", parents=[common], help="test one variable set")
    s.add_argument("--matrix", required=True)
    s.add_argument("--set", required=True, help="1-based column ids, e.g. 1,2")
    s.add_argument("--method", choices=("structural", "operational", "both"), default="both")
    s.set_defaults(func=cmd_termatiko_check)
    s = g.add_parser("spectrum", parents=[common], help="termatiko subsets of listed stopping sets")
    s.add_argument("--matrix", required=True)
    s.add_argument("--stopping", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--max-size", type=int, default=None)
    s.add_argument("--column-transitive", action="store_true",
                   help="scale anchored counts to the whole matrix")
    s.set_defaults(func=cmd_termatiko_spectrum)

    s = sub.add_parser("split", parents=[common], help="split a set into two termatiko sets")
    s.add_argument("--matrix", required=True)
    s.add_argument("--set", required=True)
    s.add_argument("--attempts", type=int, default=1)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--exhaustive", action="store_true")
    s.set_defaults(func=cmd_split)

    g = sub.add_parser("array", help="array LDPC matrices").add_subparsers(dest="action", required=True)
    s = g.add_parser("gen", parents=[common], help="write H(q,a)")
    s.add_argument("--q", type=int, required=True)
    s.add_argument("--a", type=int, required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_array_gen)
    s = g.add_parser("size3", parents=[common], help="all size-3 termatiko sets of H(q,3)")
    s.add_argument("--q", type=int, required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_array_size3)

    g = sub.add_parser("redundant", help="redundant rows").add_subparsers(dest="action", required=True)
    s = g.add_parser("extend", parents=[common], help="greedily adjoin redundant rows")
    s.add_argument("--matrix", required=True)
    s.add_argument("--termatiko", required=True, help="JSON list of sets to break")
    s.add_argument("--max-rows", type=int, default=None)
    s.add_argument("--coeff-bound", type=int, default=8)
    s.add_argument("--out", required=True)
    s.add_argument("--log", default=None)
    s.set_defaults(func=cmd_redundant_extend)

    g = sub.add_parser("fer", help="frame error rates").add_subparsers(dest="action", required=True)
    s = g.add_parser("sim", parents=[common], help="Monte Carlo frame error rate")
    s.add_argument("--matrix", required=True)
    s.add_argument("--weights", required=True, help="e.g. 1..50")
    s.add_argument("--trials", type=int, required=True)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_fer_sim)
    s = g.add_parser("bound", parents=[common], help="inclusion-exclusion lower bound")
    s.add_argument("--matrix", required=True)
    s.add_argument("--sets", required=True)
    s.add_argument("--weights", required=True)
    s.add_argument("--depth", type=int, default=None, help="even truncation depth (default: full)")
    s.add_argument("--filter", action="store_true", help="drop sets that contain another listed set")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_fer_bound)

    g = sub.add_parser("matrix", help="matrix files").add_subparsers(dest="action", required=True)
    s = g.add_parser("convert", parents=[common], help="convert between file formats")
    s.add_argument("input")
    s.add_argument("output")
    s.add_argument("--to", choices=("alist", "dense", "csv"), default=None)
    s.set_defaults(func=cmd_matrix_convert)
    s = g.add_parser("info", parents=[common], help="summary of a matrix")
    s.add_argument("matrix")
    s.set_defaults(func=cmd_matrix_info)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (MatrixFormatError, MatrixValidationError) as exc:
        report = {"error": type(exc).__name__, "message": str(exc),
                  "path": getattr(exc, "path", None), "line": getattr(exc, "line", None)}
        print(json.dumps(report), file=sys.stderr)
        return EXIT_NEGATIVE


if __name__ == "__main__":
    sys.exit(main())
