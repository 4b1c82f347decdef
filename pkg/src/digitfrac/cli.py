"""Command-line front end.

Every subcommand writes either one JSON document or a CSV series.  CSV output
starts with a ``#`` metadata line (version, system digest, seed) followed by a
header row.  Exit codes: 0 success, 2 validation/usage errors, 3 budget errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from . import __version__
from .approx import ApproxFunction, gallagher_sum_mu, intrinsic_hits, khinchin_sum_mu, window_fractions
from .counting import CountQuery, count_near, parse_delta, slab_system
from .errors import BudgetError, ParseError, ValidationError
from .fourier import l1_lower_bound, l1_partial_sum, mu_hat
from .systems import DigitSystem, builtin_system, hausdorff_dimension, validate

COMMANDS = ("validate", "dim", "fourier-coeff", "l1sum", "l1bound", "count", "slab",
            "khinchin", "gallagher", "intrinsic")
EXIT_OK, EXIT_VALIDATION, EXIT_BUDGET = 0, 2, 3


def load_system(path_or_name: str) -> DigitSystem:
    """A JSON file path, or one of ``cantor``, ``lebesgue:b:k``, ``slab:b:a:k``."""
    p = Path(path_or_name)
    if p.is_file():
        try:
            text = p.read_text()
        except OSError as exc:
            raise ParseError(f"cannot read {p}: {exc}") from exc
        return DigitSystem.from_json(text)
    return builtin_system(path_or_name)


@dataclass
class ExperimentConfig:
    command: str
    system: object = None
    params: dict = field(default_factory=dict)
    seed: int = 0
    threads: int = None
    output: str = None

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ParseError("config must be a JSON object")
        known = {"command", "system", "params", "seed", "threads", "output"}
        extra = set(data) - known
        if extra:
            raise ParseError(f"unknown config fields: {sorted(extra)}")
        if data.get("command") not in COMMANDS:
            raise ParseError(f"config command must be one of {COMMANDS}")
        params = data.get("params", {})
        if not isinstance(params, dict):
            raise ParseError("params must be an object")
        return cls(data["command"], data.get("system"), dict(params), int(data.get("seed", 0)),
                   data.get("threads"), data.get("output"))

    def to_dict(self) -> dict:
        return asdict(self)

    def argv(self, config_dir: Path = Path(".")) -> list:
        out = [self.command]
        if self.system is not None:
            if isinstance(self.system, dict):
                out += ["--system-json", json.dumps(self.system, sort_keys=True)]
            else:
                cand = config_dir / str(self.system)
                out += ["--system", str(cand) if cand.is_file() else str(self.system)]
        out += ["--seed", str(self.seed)]
        if self.threads is not None:
            out += ["--threads", str(self.threads)]
        if self.output is not None:
            out += ["--output", self.output]
        for key, val in self.params.items():
            out += [f"--{key.replace('_', '-')}", str(val)]
        return out


def _int_list(text: str) -> list:
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise ParseError(f"expected comma-separated integers, got {text!r}") from None


def _vec(text: str) -> list:
    try:
        return [Fraction(v.strip()) for v in str(text).split(",")]
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"expected comma-separated rationals, got {text!r}") from None


def _window_range(text: str) -> list:
    try:
        a, b = str(text).split(":")
        return list(range(int(a), int(b) + 1))
    except ValueError:
        raise ParseError(f"windows must look like J0:J1, got {text!r}") from None


def _fmt(v) -> str:
    return repr(float(v))


class _Out:
    def __init__(self, args, sys_obj):
        self.args = args
        self.sys = sys_obj

    def meta(self) -> str:
        digest = self.sys.digest() if self.sys is not None else "none"
        return (f"# digitfrac version={__version__} command={self.args.command} "
                f"system={digest} seed={self.args.seed}")

    def csv_text(self, header, rows) -> str:
        buf = io.StringIO()
        buf.write(self.meta() + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow(r)
        return buf.getvalue()

    @staticmethod
    def json_text(obj) -> str:
        return json.dumps(obj, sort_keys=True) + "\n"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="digitfrac", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="JSON experiment config; replaces the command line")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command")

    def common(sp, system=True):
        if system:
            sp.add_argument("--system", default="cantor", help="JSON file or built-in name")
            sp.add_argument("--system-json", help=argparse.SUPPRESS)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: $DIGITFRAC_THREADS or 1)")
        sp.add_argument("--output", "-o", default=None, help="output file (default stdout)")

    common(sub.add_parser("validate", help="check a digit system"))
    common(sub.add_parser("dim", help="Hausdorff dimension"))

    sp = sub.add_parser("fourier-coeff", help="certified Fourier coefficient")
    common(sp)
    sp.add_argument("--xi", required=True, help="integer frequency, comma separated")
    sp.add_argument("--tol", type=float, default=1e-12)

    sp = sub.add_parser("l1sum", help="l1 partial sums of Fourier coefficients")
    common(sp)
    sp.add_argument("--Q", required=True, help="comma-separated list of Q")
    sp.add_argument("--tol", type=float, default=1e-10, help="error per term")

    sp = sub.add_parser("l1bound", help="certified Fourier l1 dimension lower bound")
    common(sp)
    sp.add_argument("--L", type=int, required=True)
    sp.add_argument("--grid", type=float, required=True)

    sp = sub.add_parser("count", help="rational points near the fractal")
    common(sp)
    sp.add_argument("--Q", required=True, help="comma-separated list of Q")
    sp.add_argument("--delta", default="0", help="rational or c*Q^{-e}")

    sp = sub.add_parser("slab", help="slab digit system")
    common(sp, system=False)
    sp.add_argument("--b", type=int, required=True)
    sp.add_argument("--a", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)

    for name, mode in (("khinchin", "sim"), ("gallagher", "mult")):
        sp = sub.add_parser(name, help=f"{name} sums or Monte Carlo windows")
        common(sp)
        sp.add_argument("--psi", required=True, help="family:param, e.g. power_t:2")
        sp.add_argument("--y", default="0", help="shift, comma separated")
        sp.add_argument("--N", type=int, default=None, help="exact partial sums up to N")
        sp.add_argument("--windows", default=None, help="J0:J1 dyadic Monte Carlo windows")
        sp.add_argument("--samples", type=int, default=10_000)
        sp.set_defaults(mode=mode)

    sp = sub.add_parser("intrinsic", help="intrinsic rational approximations")
    common(sp)
    sp.add_argument("--x", required=True, help="rational point, comma separated")
    sp.add_argument("--tau", type=float, required=True)
    sp.add_argument("--Q", type=int, required=True)
    return p


def _system(args):
    if getattr(args, "system_json", None):
        return DigitSystem.from_json(args.system_json)
    return load_system(args.system)


def execute(args) -> str:
    """Run a parsed command and return its full text output."""
    cmd = args.command
    if cmd == "slab":
        s = slab_system(args.b, args.a, args.k)
        out = _Out(args, s)
        return out.json_text({"system": s.to_dict(), "dim_H": hausdorff_dimension(s)})
    s = _system(args)
    out = _Out(args, s)
    if cmd == "validate":
        v = validate(s)
        return out.json_text({"ok": v.ok, "proper": v.proper, "base": s.base, "dim": s.dim,
                              "digits": len(s.digits), "split": s.split})
    if cmd == "dim":
        return out.json_text({"dim_H": hausdorff_dimension(s), "proper": validate(s).proper})
    if cmd == "fourier-coeff":
        xi = [int(v) for v in _vec(args.xi)]
        cv = mu_hat(s, xi, args.tol)
        return out.json_text({"xi": xi, "re": cv.value.real, "im": cv.value.imag,
                              "abs": abs(cv.value), "err": float(cv.err)})
    if cmd == "l1sum":
        rows = []
        for Q in _int_list(args.Q):
            cv = l1_partial_sum(s, Q, args.tol, threads=args.threads)
            rows.append((Q, _fmt(cv.value.real if isinstance(cv.value, complex) else cv.value),
                         _fmt(cv.err)))
        return out.csv_text(("Q", "partial_sum", "err"), rows)
    if cmd == "l1bound":
        rep = l1_lower_bound(s, args.L, args.grid, threads=args.threads)
        return rep.to_json() + "\n"
    if cmd == "count":
        rows = []
        for Q in _int_list(args.Q):
            res = count_near(s, CountQuery(Q, parse_delta(args.delta, Q)), threads=args.threads)
            r = res.row()
            rows.append((r["Q"], r["delta"], r["count"], r["heuristic"], r["ratio"], r["exact"]))
        return out.csv_text(("Q", "delta", "count", "heuristic", "ratio", "exact"), rows)
    if cmd in ("khinchin", "gallagher"):
        f = ApproxFunction.parse(args.psi)
        y = _vec(args.y)
        if args.windows:
            res = window_fractions(s, f, y, _window_range(args.windows), args.samples,
                                   args.seed, args.mode, threads=args.threads)
            rows = [(f"{r.N0}-{r.N1}", _fmt(r.fraction), _fmt(r.ci_lo), _fmt(r.ci_hi)) for r in res]
            return out.csv_text(("window", "fraction", "ci_lo", "ci_hi"), rows)
        if args.N is None:
            raise ParseError("give --N for exact sums or --windows for Monte Carlo")
        if cmd == "khinchin":
            ser = khinchin_sum_mu(s, f, y, args.N, threads=args.threads)
            rows = [(n, _fmt(t), _fmt(p)) for n, t, p in ser.rows()]
            return out.csv_text(("n", "term", "partial_sum"), rows)
        ser = gallagher_sum_mu(s, f, y, args.N, threads=args.threads)
        rows = [(n, _fmt(a), _fmt(b), _fmt(c), _fmt(d)) for n, a, b, c, d in
                zip(ser.ns, ser.lower_terms, ser.upper_terms, ser.lower, ser.upper)]
        return out.csv_text(("n", "lower_term", "upper_term", "lower_sum", "upper_sum"), rows)
    if cmd == "intrinsic":
        pairs = intrinsic_hits(s, _vec(args.x), args.tau, args.Q)
        rows = [(" ".join(str(v) for v in a), n) for a, n in pairs]
        return out.csv_text(("a", "n"), rows)
    raise ParseError(f"unknown command {cmd!r}")


def _parse(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        path = Path(args.config)
        try:
            cfg = ExperimentConfig.from_dict(json.loads(path.read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ParseError(f"cannot load config {path}: {exc}") from exc
        args = parser.parse_args(cfg.argv(path.parent))
    if args.command is None:
        parser.print_usage(sys.stderr)
        raise ParseError("a subcommand is required")
    return args


def run(argv=None) -> int:
    try:
        args = _parse(argv)
        text = execute(args)
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code or 0) and EXIT_VALIDATION
    except ValidationError as exc:
        print(f"digitfrac: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except BudgetError as exc:
        print(f"digitfrac: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
