"""Command-line entry point: ``densecert <subcommand> ...``.

Every number crosses the boundary as an exact string.  Exit codes: 0 success,
1 mathematical rejection, 2 budget exhausted or inconclusive, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional, Sequence

from . import certify, density, engel, haarcheck, muldensity
from .errors import BudgetError, BudgetExhausted, DenseCertError, NeedsRefinement, Rejection
from .exactnum import (
    DEFAULT_BUDGET_BITS,
    RationalLit,
    Shifted,
    as_rational,
    certified_floor,
    rational_to_str,
    spec_from_json,
)

EXIT_OK, EXIT_REJECT, EXIT_BUDGET, EXIT_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


@dataclass
class GlobalConfig:
    precision_budget_bits: int = DEFAULT_BUDGET_BITS
    engel_depth_cap: int = density.DEFAULT_DEPTH_CAP
    exponent_cap: int = muldensity.DEFAULT_EXPONENT_CAP
    output: str = "json"

    def validate(self) -> "GlobalConfig":
        for name in ("precision_budget_bits", "engel_depth_cap", "exponent_cap"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v <= 0:
                raise UsageError(f"{name} must be a positive integer")
        if self.output not in ("json", "plain"):
            raise UsageError("output must be json or plain")
        return self

    def to_json(self) -> dict[str, Any]:
        return {k: (str(v) if isinstance(v, int) else v) for k, v in asdict(self).items()}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits 2 by default, which we reserve for budgets
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _reason(exc: BaseException) -> str:
    # DependentDilations -> "dependent dilations"
    return re.sub(r"(?<!^)(?=[A-Z])", " ", type(exc).__name__).lower()


def _rational(text: str) -> Fraction:
    try:
        return as_rational(text)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise UsageError(f"not an exact rational: {text!r}") from exc


def _int(text: str) -> int:
    v = _rational(text)
    if v.denominator != 1:
        raise UsageError(f"not an integer: {text!r}")
    return v.numerator


def _load_json(text: str) -> Any:
    """Inline JSON, or a path to a JSON file."""
    stripped = text.strip()
    if stripped[:1] in "{[\"" or re.fullmatch(r"-?\d+(/\d+)?", stripped):
        try:
            return json.loads(stripped)
        except json.JSONDecodeError:
            return stripped
    path = Path(text)
    if path.is_file():
        try:
            return json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise UsageError(f"{path}: invalid JSON ({exc})") from exc
    raise UsageError(f"neither JSON nor a readable file: {text!r}")


def _spec(text: str):
    try:
        return spec_from_json(_load_json(text))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ZeroDivisionError):
            raise
        raise UsageError(f"bad real-number spec: {exc}") from exc


def _grid(text: str) -> list[float]:
    """``geom:lo:hi:count`` or a comma-separated list of rationals."""
    if text.startswith("geom:"):
        parts = text.split(":")
        if len(parts) != 4:
            raise UsageError("grid must look like geom:lo:hi:count")
        lo, hi, count = float(_rational(parts[1])), float(_rational(parts[2])), _int(parts[3])
        try:
            return haarcheck.geometric_grid(lo, hi, count)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    pts = [float(_rational(s)) for s in text.split(",") if s.strip()]
    if not pts:
        raise UsageError("grid is empty")
    return pts


def _interval(iv) -> dict[str, str]:
    return iv.to_json()


# --------------------------------------------------------------------------
# Subcommands.  Each returns (exit code, payload).
# --------------------------------------------------------------------------


def _expansion_payload(e: engel.EngelExpansion) -> dict[str, Any]:
    n = len(e.digits)
    return {
        "digits": [str(d) for d in e.digits],
        "terminated": e.terminated,
        "partial_sum": rational_to_str(engel.partial_sum(e, n)),
        "bound": rational_to_str(Fraction(0) if e.terminated else engel.truncation_bound(e, n)),
    }


def cmd_engel(args, cfg: GlobalConfig):
    spec = _spec(args.spec)
    try:
        e = engel.engel_digits(spec, args.count, cfg.precision_budget_bits)
    except NeedsRefinement as exc:
        payload = _expansion_payload(exc.partial) if exc.partial is not None else {}
        return EXIT_BUDGET, {**payload, "certified": False, "error": _reason(exc), "message": str(exc)}
    return EXIT_OK, {**_expansion_payload(e), "certified": True}


def _unit_part(spec, cfg: GlobalConfig):
    fl = certified_floor(spec, budget=cfg.precision_budget_bits)
    if fl == 0:
        return spec, 0
    if isinstance(spec, RationalLit):
        return RationalLit(spec.value - fl), fl
    return Shifted(spec, Fraction(-fl)), fl


def cmd_witness(args, cfg: GlobalConfig):
    spec = _spec(args.spec)
    eps = _rational(args.eps)
    q1, fl = _unit_part(spec, cfg)
    w = density.witness_below(q1, eps, cfg.precision_budget_bits, cfg.engel_depth_cap)
    # z = r*q1 + s = r*q + (s - r*fl)
    return EXIT_OK, {
        "r": str(w.r),
        "s": str(w.s - w.r * fl),
        "depth": str(w.depth),
        "digits": [str(d) for d in w.digits],
        "bound": rational_to_str(w.bound),
        "z_enclosure": _interval(w.z_enclosure),
        "certified": True,
    }


def cmd_approx(args, cfg: GlobalConfig):
    q = _spec(args.spec)
    t = _spec(args.target)
    eps = _rational(args.eps)
    sol = density.approx_additive(
        q, t, eps, cfg.precision_budget_bits, cfg.engel_depth_cap, strategy=args.strategy
    )
    return EXIT_OK, {
        "m": str(sol.m),
        "n": str(sol.n),
        "err": _interval(sol.err),
        "witness_depth": str(sol.witness_depth),
        "certified": True,
    }


def _mul_payload(sol: muldensity.MulSolution) -> dict[str, Any]:
    return {
        "m": str(sol.m),
        "n": str(sol.n),
        "value": rational_to_str(sol.value),
        "err": rational_to_str(sol.err),
        "certified": sol.certified,
        "method": sol.method,
    }


def cmd_mulapprox(args, cfg: GlobalConfig):
    p, q = _int(args.p), _int(args.q)
    y, eps = _rational(args.target), _rational(args.eps)
    try:
        sol = muldensity.approx_signed(
            p, q, y, eps,
            exponent_cap=cfg.exponent_cap,
            budget=cfg.precision_budget_bits,
            max_depth=cfg.engel_depth_cap,
        )
    except BudgetExhausted as exc:
        best = exc.best
        payload = {"certified": False, "error": _reason(exc), "message": str(exc)}
        if best is not None:
            payload.update(_mul_payload(muldensity.sign_extend(best, 1 if y > 0 else -1)))
            payload["certified"] = False
        return EXIT_BUDGET, payload
    return EXIT_OK, _mul_payload(sol)


def _emit_certificate(cert, out: Optional[str]):
    obj = cert.to_json()
    if out:
        Path(out).write_text(certify.dumps_canonical(obj) + "\n")
    return EXIT_OK, {"certificate": obj, "certified": True}


def cmd_certify_root(args, cfg: GlobalConfig):
    cert = certify.certify_nth_root(_int(args.q), _int(args.n), _int(args.B), cfg.precision_budget_bits)
    return _emit_certificate(cert, args.out)


def cmd_certify_e(args, cfg: GlobalConfig):
    return _emit_certificate(certify.certify_e(_int(args.B)), args.out)


def cmd_certify_engel(args, cfg: GlobalConfig):
    spec = _spec(args.spec)
    B = _int(args.B)
    e = engel.engel_digits(spec, min(args.count, cfg.engel_depth_cap), cfg.precision_budget_bits)
    return _emit_certificate(certify.certify_engel_number(e, B, cfg.precision_budget_bits), args.out)


def cmd_verify(args, cfg: GlobalConfig):
    obj = _load_json(args.certificate)
    if not isinstance(obj, dict):
        raise UsageError("certificate must be a JSON object")
    try:
        cert = certify.certificate_from_json(obj)
    except (KeyError, TypeError, ValueError) as exc:
        return EXIT_REJECT, {"verified": False, "reason": f"malformed certificate: {exc}"}
    result = certify.verify_certificate(cert, cfg.precision_budget_bits)
    return (EXIT_OK if result.ok else EXIT_REJECT), {"verified": result.ok, "reason": result.reason}


_HAAR_EXIT = {
    "consistent-with-theorem": EXIT_OK,
    "constant": EXIT_OK,
    "violates-hypotheses": EXIT_REJECT,
    "non-constant": EXIT_REJECT,
    "inconclusive": EXIT_BUDGET,
}


def cmd_haar_check(args, cfg: GlobalConfig):
    raw = _load_json(args.f)
    if not isinstance(raw, dict):
        raise UsageError("--f must be a JSON object")
    base_dir = Path(args.f).parent if Path(args.f).is_file() else None
    try:
        f = haarcheck.function_from_json(raw, base_dir)
    except (KeyError, TypeError, ValueError, OSError) as exc:
        raise UsageError(f"bad function description: {exc}") from exc
    grid = _grid(args.grid)
    p = _rational(args.p)
    if args.q is None:
        report = haarcheck.invariance_check(f, p, grid, args.tol)
        payload = {"function": f.to_json(), "report": report.to_json(), "verdict": report.verdict}
        return _HAAR_EXIT[report.verdict], payload
    q = _rational(args.q)
    audit = haarcheck.two_dilation_audit(f, p, q, grid, args.tol, args.residual_tol)
    payload = {"function": f.to_json(), "report": audit.to_json(), "verdict": audit.verdict}
    return _HAAR_EXIT[audit.verdict], payload


# --------------------------------------------------------------------------


def _global_options(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("global options")
    g.add_argument("--config", default=argparse.SUPPRESS, help="JSON file merged into the global configuration")
    g.add_argument("--precision-budget", type=int, dest="precision_budget_bits", default=argparse.SUPPRESS)
    g.add_argument("--engel-depth-cap", type=int, dest="engel_depth_cap", default=argparse.SUPPRESS)
    g.add_argument("--exponent-cap", type=int, dest="exponent_cap", default=argparse.SUPPRESS)
    g.add_argument("--output", choices=("json", "plain"), default=argparse.SUPPRESS)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    _global_options(common)
    parser = _Parser(prog="densecert", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_text):
        sp = sub.add_parser(name, help=help_text, parents=[common])
        sp.set_defaults(func=func)
        return sp

    sp = add("engel", cmd_engel, "Engel digits of a real in (0, 1)")
    sp.add_argument("--spec", required=True, help="real-number spec as JSON")
    sp.add_argument("--count", type=int, required=True)

    sp = add("witness", cmd_witness, "element r*q + s of {m + n q} in (0, eps)")
    sp.add_argument("--spec", required=True)
    sp.add_argument("--eps", required=True)

    sp = add("approx", cmd_approx, "integers m, n with |m + n q - t| < eps")
    sp.add_argument("--spec", required=True)
    sp.add_argument("--target", required=True, help="a/b or a real-number spec")
    sp.add_argument("--eps", required=True)
    sp.add_argument("--strategy", choices=("single", "greedy"), default="single")

    sp = add("mulapprox", cmd_mulapprox, "exponents with |+-p^m q^n - y| < eps")
    sp.add_argument("-p", required=True)
    sp.add_argument("-q", required=True)
    sp.add_argument("--target", required=True)
    sp.add_argument("--eps", required=True)

    sp = add("certify-root", cmd_certify_root, "certificate that q^(1/n) != a/b for b <= B")
    sp.add_argument("-q", required=True)
    sp.add_argument("-n", required=True)
    sp.add_argument("-B", required=True)
    sp.add_argument("--out")

    sp = add("certify-e", cmd_certify_e, "certificate that e != a/b for b <= B")
    sp.add_argument("-B", required=True)
    sp.add_argument("--out")

    sp = add("certify-engel", cmd_certify_engel, "certificate for a strictly increasing Engel number")
    sp.add_argument("--spec", required=True)
    sp.add_argument("-B", required=True)
    sp.add_argument("--count", type=int, default=64, help="Engel prefix length to search")
    sp.add_argument("--out")

    sp = add("verify", cmd_verify, "check a certificate file")
    sp.add_argument("certificate")

    sp = add("haar-check", cmd_haar_check, "audit dilation invariance of a function")
    sp.add_argument("--f", required=True, help="function description as JSON, or a JSON file")
    sp.add_argument("-p", required=True)
    sp.add_argument("-q")
    sp.add_argument("--grid", default="geom:1/4:16:16")
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.add_argument("--residual-tol", type=float, default=1e-6)
    return parser


def load_config(ns: argparse.Namespace) -> GlobalConfig:
    merged: dict[str, Any] = {}
    if getattr(ns, "config", None):
        try:
            data = json.loads(Path(ns.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
        if not isinstance(data, dict):
            raise UsageError("config must be a JSON object")
        unknown = set(data) - set(GlobalConfig.__dataclass_fields__)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        for k, v in data.items():
            merged[k] = int(v) if k != "output" and isinstance(v, str) and v.isdigit() else v
    for k in GlobalConfig.__dataclass_fields__:
        if hasattr(ns, k):
            merged[k] = getattr(ns, k)
    return GlobalConfig(**merged).validate()


def _plain(obj: Any, prefix: str = "") -> list[str]:
    if isinstance(obj, dict):
        return [line for k in sorted(obj) for line in _plain(obj[k], f"{prefix}{k}.")]
    if isinstance(obj, list) and all(not isinstance(v, (dict, list)) for v in obj):
        return [f"{prefix[:-1]}: {' '.join(str(v) for v in obj)}"]
    if isinstance(obj, list):
        return [line for i, v in enumerate(obj) for line in _plain(v, f"{prefix}{i}.")]
    return [f"{prefix[:-1]}: {obj}"]


def _write(payload: dict[str, Any], cfg: GlobalConfig) -> None:
    if cfg.output == "plain":
        text = "\n".join(_plain(payload))
    else:
        text = json.dumps(payload, sort_keys=True, indent=2)
    sys.stdout.write(text + "\n")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = load_config(ns)
        code, payload = ns.func(ns, cfg)
    except UsageError as exc:
        print(f"densecert: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Rejection as exc:
        code, payload = EXIT_REJECT, {"certified": False, "error": _reason(exc), "reason": _reason(exc), "message": str(exc)}
    except BudgetError as exc:
        code, payload = EXIT_BUDGET, {"certified": False, "error": _reason(exc), "message": str(exc)}
    except (ValueError, ZeroDivisionError) as exc:
        print(f"densecert: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DenseCertError as exc:  # pragma: no cover - every subclass is handled above
        code, payload = EXIT_REJECT, {"certified": False, "error": _reason(exc), "message": str(exc)}
    payload["config"] = cfg.to_json()
    payload["command"] = ns.command
    _write(payload, cfg)
    return code


if __name__ == "__main__":
    sys.exit(main())
