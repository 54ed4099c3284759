"""Command-line entry point: ``rmflats <subcommand> ...``.

Exit status: 0 when every record holds (or is vacuous / not applicable),
1 when some record is violated, 2 on usage, input or capacity errors.
"""
from __future__ import annotations

import argparse
import csv
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import io
from .corrector import claim_checks, correct, error_set
from .flats import (DEFAULT_CAP, KINDS, EnumerationCapError, expansion, random_flat_set,
                    set_enumeration_cap, sharp_threshold_check, zoom_family)
from .gf import FieldSpec
from .lifted import correct_lifted, lift_membership, reject_lifted
from .poly import TruthTable, random_poly, tabulate
from .spectral import CayleyIndex, eigen_residual, verify_appendix
from .tester import default_t, reject_exact, reject_mc

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2
EIGEN_SAMPLE = 512


class UsageError(Exception):
    pass


# --- configuration -------------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    """A parsed invocation; ``to_argv`` reproduces an equivalent command line."""
    command: str
    positional: tuple = ()
    options: dict = field(default_factory=dict)

    @classmethod
    def from_namespace(cls, ns: argparse.Namespace) -> "ExperimentConfig":
        d = dict(vars(ns))
        command = d.pop("command")
        pos = tuple(d.pop(k) for k in ("kind", "action", "name") if k in d)
        return cls(command, pos, {k: v for k, v in d.items() if v is not None and v is not False})

    def to_argv(self) -> list[str]:
        argv = [self.command, *map(str, self.positional)]
        for k, v in self.options.items():
            flag = "--" + k.replace("_", "-")
            argv += [flag] if v is True else [flag, str(v)]
        return argv

    def echo(self) -> dict:
        return {"command": self.command, "positional": list(self.positional), **self.options}


# --- reports ---------------------------------------------------------------------------------

class Report:
    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.records: list[dict] = []
        self.result: dict = {}
        self.start = time.perf_counter()

    def record(self, name, anchor, lhs, rhs, verdict):
        assert verdict in ("holds", "vacuous", "violated", "n/a")
        self.records.append(dict(name=name, anchor=anchor, lhs=lhs, rhs=rhs, verdict=verdict))

    def compare(self, name, anchor, lhs, rhs, strict=False):
        """Record lhs >= rhs (or > when strict)."""
        ok = lhs > rhs if strict else lhs >= rhs
        self.record(name, anchor, lhs, rhs, "holds" if ok else "violated")

    @property
    def violated(self) -> bool:
        return any(r["verdict"] == "violated" for r in self.records)

    def document(self) -> dict:
        return {"config": self.config.echo(), "records": self.records, "result": self.result,
                "violated": self.violated,
                "elapsed_seconds": round(time.perf_counter() - self.start, 6)}


# --- argument parsing -------------------------------------------------------------------------

def _mode_args(sp):
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--exact", action="store_true", help="exact enumeration (default)")
    g.add_argument("--samples", type=int, help="Monte Carlo sample count (requires --seed)")
    sp.add_argument("--seed", type=int)


def _field_args(sp):
    sp.add_argument("--p", type=int, default=None, help="field characteristic")
    sp.add_argument("--r", type=int, default=None, help="extension degree")
    sp.add_argument("--n", type=int, default=None, help="ambient dimension")


def _set_source_args(sp):
    sp.add_argument("--fn", help="truth table; the set is its error set")
    sp.add_argument("--degree", type=int)
    sp.add_argument("--flat-dim", type=int)
    sp.add_argument("--flats", help="flat-set file")
    sp.add_argument("--zoom", choices=KINDS)
    sp.add_argument("--param", help="zoom parameter: x1,..,xn or h1,..,hn:c")
    sp.add_argument("--random", type=int, help="size of a uniform random flat set")
    sp.add_argument("--seed", type=int)
    _field_args(sp)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rmflats", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--cap", type=int, help="flat enumeration cap")
    common.add_argument("--out", help="report / output path (default stdout)")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("gen", parents=[common], help="generate a truth table")
    sp.add_argument("kind", choices=["random-codeword", "corrupted-codeword", "random-function"])
    _field_args(sp)
    sp.add_argument("--degree", type=int)
    sp.add_argument("--corruptions", type=int, default=None)
    sp.add_argument("--seed", type=int, required=True)

    sp = sub.add_parser("test", parents=[common], help="rejection probability of the flat tester")
    sp.add_argument("--fn", required=True)
    sp.add_argument("--degree", type=int, required=True)
    sp.add_argument("--flat-dim", type=int)
    _mode_args(sp)

    sp = sub.add_parser("correct", parents=[common], help="run the local corrector")
    sp.add_argument("--fn", required=True)
    sp.add_argument("--degree", type=int, required=True)
    sp.add_argument("--flat-dim", type=int)
    sp.add_argument("--max-iters", type=int)
    sp.add_argument("--emit-fn")
    sp.add_argument("--check-distance", action="store_true",
                    help="verify the final distance bound with the brute-force oracle")

    sp = sub.add_parser("shadow", parents=[common], help="sharp-threshold shadow bound")
    _set_source_args(sp)

    sp = sub.add_parser("expansion", parents=[common], help="exact stay probability of the up-down walk")
    _set_source_args(sp)
    sp.add_argument("--no-self-loops", action="store_true")

    sp = sub.add_parser("spectra", parents=[common], help="Cayley-graph spectral checks")
    _set_source_args(sp)

    sp = sub.add_parser("lifted", parents=[common], help="lifted-code tester and corrector")
    sp.add_argument("action", choices=["test", "correct"])
    sp.add_argument("--base", required=True)
    sp.add_argument("--fn", required=True)
    sp.add_argument("--flat-dim", type=int, help="tester dimension k (default: base dimension)")
    sp.add_argument("--max-iters", type=int)
    sp.add_argument("--emit-fn")
    _mode_args(sp)

    sp = sub.add_parser("experiment", parents=[common], help="run a named batch and write CSV")
    sp.add_argument("name", choices=["lemma21-sweep", "correction-sweep", "zoom-expansion", "shadow-sweep"])
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--instances", type=int)
    return ap


# --- helpers --------------------------------------------------------------------------------

def _field(args) -> FieldSpec:
    return FieldSpec(args.p or 2, args.r or 1)


def _parse_param(kind: str, text: str | None, n: int):
    if text is None:
        from .experiments import ZOOM_PARAMS
        return ZOOM_PARAMS[kind](n)
    try:
        if kind == "hyperplane":
            h, c = text.split(":")
            return tuple(int(a) for a in h.split(",")), int(c)
        return tuple(int(a) for a in text.split(","))
    except ValueError:
        raise UsageError(f"cannot parse zoom parameter {text!r}") from None


def _load_set(args, report: Report):
    """The flat set named by the source flags, plus whether it is an error set."""
    if args.fn:
        f = io.read_truth_table(args.fn)
        if args.degree is None:
            raise UsageError("--fn needs --degree")
        t = default_t(f.field, args.degree) if args.flat_dim is None else args.flat_dim
        report.result["source"] = "error-set"
        return error_set(f, args.degree, t), "error-set"
    if args.flats:
        report.result["source"] = "file"
        return io.read_flat_set(args.flats), "file"
    F = _field(args)
    if args.n is None or args.flat_dim is None:
        raise UsageError("zoom and random sources need --n and --flat-dim")
    if args.zoom:
        param = _parse_param(args.zoom, args.param, args.n)
        report.result["source"] = f"zoom:{args.zoom}"
        try:
            return zoom_family(F, args.n, args.flat_dim, args.zoom, param), "zoom"
        except ValueError as err:
            raise UsageError(str(err)) from None
    if args.random is not None:
        if args.seed is None:
            raise UsageError("--random needs --seed")
        report.result["source"] = "random"
        return random_flat_set(F, args.n, args.flat_dim, args.random, np.random.default_rng(args.seed)), "random"
    raise UsageError("give one of --fn, --flats, --zoom, --random")


def _test_report(rep) -> dict:
    out = {"mode": rep.mode, "t": rep.t}
    if rep.mode == "exact":
        out.update(epsilon=rep.epsilon, rejecting=rep.rejecting, total=rep.total)
    else:
        out.update(estimate=rep.estimate, stderr=rep.stderr, samples=rep.samples, seed=rep.seed)
    return out


def _trace_report(tr) -> dict:
    return {
        "converged": tr.converged, "iterations": tr.iterations, "t": tr.t,
        "changed_points": tr.changed_points, "epsilon_initial": tr.epsilon_initial,
        "stall": tr.stall, "distance": tr.distance,
        "decrement_floor": tr.decrement_floor, "decrement_floor_literal": tr.decrement_floor_literal,
        "steps": [{"point": list(s.point), "old_value": s.old_value, "new_value": s.new_value,
                   "mu_S_x_star": s.mu_S_x_star, "epsilon_before": s.epsilon_before,
                   "epsilon_after": s.epsilon_after,
                   "vote_tally": {str(c): v for c, v in s.vote_tally}} for s in tr.steps],
    }


def _check_mode(args):
    if args.samples is not None and args.seed is None:
        raise UsageError("Monte Carlo mode needs --seed")


# --- subcommands ---------------------------------------------------------------------------

def cmd_gen(args, report):
    F = _field(args)
    if args.n is None:
        raise UsageError("gen needs --n")
    rng = np.random.default_rng(args.seed)
    if args.kind == "random-function":
        f = TruthTable(F, args.n, rng.integers(0, F.q, size=F.q ** args.n))
        sidecar = None
    else:
        if args.degree is None:
            raise UsageError(f"{args.kind} needs --degree")
        g = random_poly(F, args.n, args.degree, rng)
        f = tabulate(g)
        sidecar = None
        if args.kind == "corrupted-codeword":
            from .experiments import corrupt
            m = 1 if args.corruptions is None else args.corruptions
            f, pts = corrupt(f, m, rng)
            sidecar = {"original": g, "original_values": [int(v) for v in tabulate(g).values],
                       "corrupted_points": pts, "seed": args.seed}
    text = io.dumps_truth_table(f)
    if args.out:
        Path(args.out).write_text(text)
        if sidecar is not None:
            io.dump_json(args.out + ".truth.json", sidecar)
    else:
        sys.stdout.write(text)
    return None


def cmd_test(args, report):
    _check_mode(args)
    f = io.read_truth_table(args.fn)
    if args.samples is not None:
        rep = reject_mc(f, args.degree, args.flat_dim, args.samples, args.seed)
    else:
        rep = reject_exact(f, args.degree, args.flat_dim)
    report.result.update(_test_report(rep))
    report.record("rejection_probability", "flat tester", rep.epsilon if rep.mode == "exact" else rep.estimate,
                  None, "n/a")
    return report


def cmd_correct(args, report):
    f = io.read_truth_table(args.fn)
    tr = correct(f, args.degree, args.flat_dim, max_iters=args.max_iters, check_distance=args.check_distance)
    report.result.update(_trace_report(tr))
    report.record("converged", "correction loop", tr.converged, True, "holds" if tr.converged else "violated")
    for s in tr.steps:
        report.compare(f"step_decrease@{s.point_index}", "strict decrease per repair",
                       s.epsilon_before, s.epsilon_after, strict=True)
    if tr.distance is not None:
        report.compare("distance_bound", "final distance bound", tr.distance_bound, tr.distance)
    if args.emit_fn:
        io.write_truth_table(args.emit_fn, tr.final)
    return report


def cmd_shadow(args, report):
    S, source = _load_set(args, report)
    if not S.members:
        report.record("sharp_threshold", "sharp-threshold shadow bound", None, None, "n/a")
        return report
    rep = sharp_threshold_check(S)
    report.result.update(mu=rep.mu, mu_shadow=rep.mu_shadow, stay=rep.stay, size=len(S))
    report.compare("sharp_threshold", "sharp-threshold shadow bound", rep.mu_shadow, rep.rhs)
    if source == "error-set":
        report.compare("shadow_growth", "shadow growth of error sets", S.field.q * rep.mu, rep.mu_shadow)
    return report


def cmd_expansion(args, report):
    S, source = _load_set(args, report)
    if not S.members:
        report.record("stay_probability", "up-down walk", None, None, "n/a")
        return report
    stay = expansion(S, include_self_loops=not args.no_self_loops)
    report.result.update(stay=stay, size=len(S), mu=S.measure(), self_loops=not args.no_self_loops)
    q = Fraction(1, S.field.q)
    if source in ("zoom", "error-set"):
        report.compare("stay_at_least_1_over_q", "zoom and error-set expansion", stay, q)
    else:
        report.record("stay_probability", "up-down walk", stay, None, "n/a")
    if source == "error-set":
        c = claim_checks(S)
        report.compare("zoom_out", "zoom-out pseudo-randomness of error sets", 2 * S.field.q * c.mu, c.zoom_out)
        report.compare("zoom_out_linear", "zoom-out pseudo-randomness of error sets",
                       2 * S.field.q * c.mu, c.zoom_out_linear)
    return report


def cmd_spectra(args, report):
    S, _ = _load_set(args, report)
    idx = CayleyIndex(S.field, S.n, S.t)
    idx.check_cap()
    # every character on small graphs, an evenly spaced sample of EIGEN_SAMPLE on larger ones
    alphas = None if idx.size <= EIGEN_SAMPLE else np.linspace(0, idx.size - 1, EIGEN_SAMPLE).astype(int)
    res = eigen_residual(idx, alphas)
    report.record("eigenvalues", "character eigenvalues", res, 1e-9, "holds" if res <= 1e-9 else "violated")
    rep = verify_appendix(S)
    report.result.update(xi=rep.xi, a=rep.a, grouping=rep.grouping, size=len(S))
    for c in rep.checks:
        report.record(c.name, c.anchor, c.lhs, c.rhs, c.verdict)
    return report


def cmd_lifted(args, report):
    B = io.read_base_code(args.base)
    f = io.read_truth_table(args.fn)
    if args.action == "test":
        _check_mode(args)
        k = B.t if args.flat_dim is None else args.flat_dim
        if args.samples is not None:
            rep = reject_lifted(f, B, k, "monte-carlo", args.samples, args.seed)
        else:
            rep = reject_lifted(f, B, k)
        member, witness = lift_membership(f, B)
        report.result.update(_test_report(rep))
        report.result.update(member=member, witness=repr(witness) if witness else None)
        if rep.mode == "exact" and not member and k < f.n:
            report.compare("soundness_floor", "lifted soundness", rep.epsilon, Fraction(1, f.q))
        return report
    tr = correct_lifted(f, B, max_iters=args.max_iters)
    report.result.update(_trace_report(tr))
    report.record("converged", "correction loop", tr.converged, True, "holds" if tr.converged else "violated")
    if args.emit_fn:
        io.write_truth_table(args.emit_fn, tr.final)
    return report


def cmd_experiment(args, report):
    from .experiments import EXPERIMENTS
    fn = EXPERIMENTS[args.name]
    kw = {}
    if args.name != "zoom-expansion":
        kw["seed"] = args.seed
        if args.instances is not None:
            kw["instances"] = args.instances
    rows = fn(**kw)
    write_csv(args.out, rows)
    return None


def write_csv(path, rows: list[dict]) -> None:
    keys: list[str] = []
    for r in rows:
        keys += [k for k in r if k not in keys]
    fh = open(path, "w", newline="") if path and path != "-" else sys.stdout
    try:
        w = csv.DictWriter(fh, fieldnames=keys)
        w.writeheader()
        for r in rows:
            w.writerow({k: (f"{v.numerator}/{v.denominator}" if isinstance(v, Fraction) else v)
                        for k, v in r.items()})
    finally:
        if fh is not sys.stdout:
            fh.close()


COMMANDS = {"gen": cmd_gen, "test": cmd_test, "correct": cmd_correct, "shadow": cmd_shadow,
            "expansion": cmd_expansion, "spectra": cmd_spectra, "lifted": cmd_lifted,
            "experiment": cmd_experiment}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    config = ExperimentConfig.from_namespace(args)
    report = Report(config)
    if args.cap is not None:
        set_enumeration_cap(args.cap)
    try:
        out = COMMANDS[args.command](args, report)
    except (UsageError, io.FormatError, EnumerationCapError, OSError, ValueError) as err:
        print(f"rmflats {args.command}: {err}", file=sys.stderr)
        return EXIT_USAGE
    finally:
        set_enumeration_cap(DEFAULT_CAP)
    if out is None:
        return EXIT_OK
    io.dump_json(args.out, report.document())
    return EXIT_VIOLATION if report.violated else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
