"""``edge-eta`` command line interface.

Exit codes: 0 success, 2 invalid input (descriptor or flags), 3 numerical
failure (partial results are still printed, flagged ``"partial": true``).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .cache import ZeroCache, default_cache_dir
from .classification import classify_boundary_case, classify_eta, classify_rho
from .descriptor import load_descriptor
from .errors import (
    ConvergenceError,
    EdgeEtaError,
    IllConditioned,
    InsufficientSamples,
    QuadratureFailure,
    TailUnbounded,
)
from .eta_rho import eta_lattice, eta_numeric, rho_aps, rho_cheeger_gromov_model
from .geometry import operator_parity, suggest_scaling, witt_check
from .heat_trace import fit_expansion, mellin_check, min_time, skeleton_terms, t_grid, trace_samples
from .index_families import geometric_vanishing, heat_trace_family, smooth_skeleton

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3
NUMERICAL_ERRORS = (IllConditioned, TailUnbounded, QuadratureFailure, ConvergenceError, InsufficientSamples)
DEFAULT_S = (0.5, 1.0, 1.5)
COMMANDS = ("classify", "skeleton", "spectrum", "trace", "eta", "rho", "mellin", "witt")


class NumericalFailure(Exception):
    """Carries partial output alongside the numerical error that stopped a run."""

    def __init__(self, partial, cause):
        super().__init__(str(cause))
        self.partial = partial
        self.cause = cause


@dataclass
class RunConfig:
    command: str
    descriptor: Optional[Path] = None
    cutoff: Optional[float] = None
    tmin: Optional[float] = None
    tmax: Optional[float] = None
    points: Optional[int] = None
    tol: float = 1e-10
    fmt: str = "json"
    cache_dir: Optional[Path] = None
    use_cache: bool = True
    kind: Optional[str] = None
    s_values: Optional[tuple] = None
    skeleton: Optional[str] = None
    out: Optional[Path] = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.tol <= 0:
            raise ValueError("--tol must be positive")
        if self.cutoff is not None and self.cutoff < 1:
            raise ValueError("--cutoff must be at least 1")
        if self.points is not None and self.points < 2:
            raise ValueError("--points must be at least 2")
        if self.fmt not in ("json", "csv", "table"):
            raise ValueError(f"unknown format {self.fmt!r}")


# ---------------------------------------------------------------------------
# serialisation


def _plain(obj):
    """Convert results to JSON-ready primitives (Fractions become strings)."""
    if hasattr(obj, "to_json"):
        return _plain(obj.to_json())
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    return obj


def dumps_json(obj, indent=2) -> str:
    """JSON with every float written to 17 significant digits, keys sorted."""

    def enc(v, level):
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if isinstance(v, bool) or v is None:
            return json.dumps(v)
        if isinstance(v, float):
            if not math.isfinite(v):
                return json.dumps(str(v))
            return format(v, ".17g")
        if isinstance(v, (int, str)):
            return json.dumps(v)
        if isinstance(v, dict):
            if not v:
                return "{}"
            items = [f"{pad}{json.dumps(k)}: {enc(v[k], level + 1)}" for k in sorted(v)]
            return "{\n" + ",\n".join(items) + "\n" + end + "}"
        if isinstance(v, list):
            if not v:
                return "[]"
            return "[\n" + ",\n".join(pad + enc(x, level + 1) for x in v) + "\n" + end + "]"
        raise TypeError(f"cannot serialise {type(v).__name__}")

    return enc(_plain(obj), 0) + "\n"


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k in sorted(obj):
            yield from _flatten(obj[k], f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list) and obj and all(not isinstance(x, (dict, list)) for x in obj):
        yield prefix, ", ".join(_fmt6(x) for x in obj)
    elif isinstance(obj, list):
        for i, x in enumerate(obj):
            yield from _flatten(x, f"{prefix}[{i}]")
    else:
        yield prefix, _fmt6(obj)


def _fmt6(x):
    if isinstance(x, float):
        return format(x, ".6g")
    return str(x)


def _records(obj):
    """The list of flat records in a result, if it has one (for csv/table)."""
    for key in ("rows", "samples", "entries"):
        rows = obj.get(key) if isinstance(obj, dict) else None
        if isinstance(rows, list) and rows and isinstance(rows[0], dict):
            return rows
    return None


def render(obj, fmt) -> str:
    data = _plain(obj)
    if fmt == "json":
        return dumps_json(data)
    rows = _records(data)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if rows is not None:
            cols = list(rows[0])
            w.writerow(cols)
            for r in rows:
                w.writerow([repr(r[c]) if isinstance(r[c], float) else r[c] for c in cols])
        else:
            w.writerow(["key", "value"])
            for k, v in _flatten(data):
                w.writerow([k, v])
        return buf.getvalue()
    if rows is not None:
        cols = list(rows[0])
        table = [cols] + [[_fmt6(r[c]) for c in cols] for r in rows]
    else:
        table = [["key", "value"]] + [[k, v] for k, v in _flatten(data)]
    widths = [max(len(str(row[i])) for row in table) for i in range(len(table[0]))]
    return "\n".join("  ".join(str(c).ljust(w) for c, w in zip(row, widths)).rstrip() for row in table) + "\n"


# ---------------------------------------------------------------------------
# commands


def _cache(cfg: RunConfig):
    if not cfg.use_cache:
        return None
    return ZeroCache(cfg.cache_dir if cfg.cache_dir is not None else default_cache_dir())


def _spectrum(cfg, desc, cache):
    spec = desc.spectrum(cfg.cutoff, cache)
    if cache is not None:
        cache.flush()
    return spec


def cmd_classify(cfg, desc, cache):
    M = desc.require_space()
    op = desc.require_operator()
    out = {"eta": classify_eta(M, op)}
    if M.has_boundary:
        out["boundary"] = classify_boundary_case(M, op)
    ranks = desc.raw.get("rho", {}).get("twist_ranks")
    if ranks is not None:
        out["rho"] = classify_rho(M, op, tuple(ranks))
    return out


def _skeleton_kind(cfg):
    return cfg.kind or "odd_trace"


def cmd_skeleton(cfg, desc, cache):
    M = desc.require_space()
    op = desc.require_operator()
    kind = _skeleton_kind(cfg)
    rows = []
    for e in M.edges:
        parity = operator_parity(op, M.m, e.b)
        if parity == "unclassified":
            rows.append({"b": e.b, "f": e.f, "parity": parity, "skeleton": None})
            continue
        sk = heat_trace_family(M.m, e.b, e.f, parity, kind)
        if op.is_geometric and kind == "odd_trace":
            sk = geometric_vanishing(sk, M.m, op.kind)
        rows.append({"b": e.b, "f": e.f, "parity": parity, "skeleton": sk.to_json()})
    if not M.edges:
        rows.append({"b": None, "f": None, "parity": None,
                     "skeleton": {"smooth": smooth_skeleton(M.m, kind).to_json()}})
    return {"m": M.m, "kind": kind, "strata": rows}


def cmd_spectrum(cfg, desc, cache):
    spec = _spectrum(cfg, desc, cache)
    rows = [{"lambda": lam, "multiplicity": m} for lam, m in spec.entries]
    return {
        "label": spec.label,
        "kernel_dim": spec.kernel_dim,
        "cutoff": spec.cutoff,
        "squared": spec.squared,
        "tail": None if spec.tail is None else [spec.tail.weyl_power, spec.tail.weyl_const],
        "count": int(spec.mult.sum()) if len(spec) else 0,
        "entries": rows,
    }


def _default_template(spec, desc):
    m = desc.raw.get("m")
    if spec.squared:
        # Laplace-type spectrum on a surface with boundary
        m = m or 2
        return [(Fraction(-m, 2) + Fraction(j, 2), 0) for j in range(m + 1)]
    return skeleton_terms(smooth_skeleton(m or 1, "odd_trace"), Fraction(3, 2))


def _parse_template(text):
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if ":" in tok:
            a, p = tok.split(":")
            out.append((Fraction(a), int(p)))
        else:
            out.append((Fraction(tok), 0))
    return out


def cmd_trace(cfg, desc, cache):
    spec = _spectrum(cfg, desc, cache)
    kind = cfg.kind or ("trace" if spec.squared else "odd_trace")
    t_lo = cfg.tmin if cfg.tmin is not None else max(min_time(spec), 1e-4)
    t_hi = cfg.tmax if cfg.tmax is not None else 1e-1
    ts = t_grid(t_lo, t_hi, points=cfg.points)
    samples = trace_samples(spec, ts, kind)
    rows = [{"t": s.t, "value": s.value, "bound": s.truncation_bound + s.noise} for s in samples]
    template = _parse_template(cfg.skeleton) if cfg.skeleton else _default_template(spec, desc)
    out = {"kind": kind, "label": spec.label, "samples": rows, "fit": None, "partial": False}
    try:
        out["fit"] = fit_expansion(samples, template)
    except NUMERICAL_ERRORS as exc:
        out["partial"] = True
        out["error"] = {"type": type(exc).__name__, "message": str(exc)}
        raise NumericalFailure(out, exc) from exc
    return out


def cmd_eta(cfg, desc, cache):
    spec = _spectrum(cfg, desc, cache)
    out = {"label": spec.label, "numeric": eta_numeric(spec, quad_target=cfg.tol), "exact": None}
    if spec.lattice is not None and 0.0 < spec.lattice[0] < 1.0:
        out["exact"] = eta_lattice(spec.lattice[0])
    return out


def cmd_rho(cfg, desc, cache):
    rho = desc.raw.get("rho")
    if rho is None:
        raise ValueError("descriptor has no 'rho' section")
    flavor = rho.get("flavor", "APS")
    out = {}
    if flavor == "APS":
        if "a" not in rho or "b" not in rho:
            raise ValueError("APS rho needs twist parameters 'a' and 'b'")
        out["rho"] = rho_aps(rho["a"], rho["b"])
    else:
        if "a" not in rho:
            raise ValueError("Cheeger-Gromov rho needs the twist parameter 'a'")
        out["rho"] = rho_cheeger_gromov_model(rho["a"])
    if desc.space is not None and desc.operator is not None and "twist_ranks" in rho:
        out["classification"] = classify_rho(desc.space, desc.operator, tuple(rho["twist_ranks"]))
    return out


def cmd_mellin(cfg, desc, cache):
    spec = _spectrum(cfg, desc, cache)
    s_values = cfg.s_values or desc.raw.get("mellin", {}).get("s") or DEFAULT_S
    rows = []
    for s in s_values:
        r = mellin_check(spec, s)
        rows.append({"s": r.s, "lhs": r.lhs, "rhs": r.rhs, "difference": r.difference})
    return {"label": spec.label, "rows": rows}


def cmd_witt(cfg, desc, cache):
    M = desc.require_space()
    op = desc.require_operator()
    rows = []
    for i, e in enumerate(M.edges):
        if e.link_spectrum is None:
            rows.append({"stratum": i, "checked": False})
            continue
        rep = witt_check(op, e.link_spectrum, tol=cfg.tol)
        row = {"stratum": i, "checked": True, "passed": rep.passed, "reason": rep.reason,
               "witness": None if rep.witness is None else str(rep.witness)}
        if not rep.passed:
            try:
                row["suggested_scaling"] = str(suggest_scaling(op, e.link_spectrum))
            except EdgeEtaError as exc:
                row["suggested_scaling"] = None
                row["unscalable"] = str(exc)
        rows.append(row)
    return {"strata": rows}


HANDLERS = {
    "classify": cmd_classify,
    "skeleton": cmd_skeleton,
    "spectrum": cmd_spectrum,
    "trace": cmd_trace,
    "eta": cmd_eta,
    "rho": cmd_rho,
    "mellin": cmd_mellin,
    "witt": cmd_witt,
}


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    """Execute one command; returns the process exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr

    def emit(result):
        text = render(result, cfg.fmt)
        stdout.write(text)
        if cfg.out is not None:
            Path(cfg.out).write_text(text)

    def diagnose(exc, code):
        stderr.write(dumps_json({"error": type(exc).__name__, "message": str(exc), "exit_code": code}))
        return code

    try:
        if cfg.descriptor is None:
            raise ValueError("--descriptor is required")
        desc = load_descriptor(cfg.descriptor)
        result = HANDLERS[cfg.command](cfg, desc, _cache(cfg))
    except NumericalFailure as exc:
        emit(exc.partial)
        return diagnose(exc.cause, EXIT_NUMERICAL)
    except NUMERICAL_ERRORS as exc:
        return diagnose(exc, EXIT_NUMERICAL)
    except (ValueError, EdgeEtaError) as exc:
        return diagnose(exc, EXIT_INVALID)
    emit(result)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="edge-eta", description="Eta and rho invariants on edge spaces.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--descriptor", type=Path, required=True, help="JSON descriptor file")
    common.add_argument("--cutoff", type=float, help="spectral cutoff (overrides the descriptor)")
    common.add_argument("--tmin", type=float)
    common.add_argument("--tmax", type=float)
    common.add_argument("--points", type=int, help="number of log-spaced sample times")
    common.add_argument("--tol", type=float, default=1e-10)
    common.add_argument("--format", dest="fmt", choices=["json", "csv", "table"], default="json")
    common.add_argument("--cache-dir", type=Path)
    common.add_argument("--no-cache", action="store_true")
    common.add_argument("--out", type=Path, help="also write the output to this file")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name in ("skeleton", "trace"):
            p.add_argument("--kind", choices=["trace", "odd_trace"])
        if name == "trace":
            p.add_argument("--skeleton", help="fit template, e.g. --skeleton=-1,-1/2,0 (a:p adds a log power p)")
        if name == "mellin":
            p.add_argument("--s", dest="s_values", type=float, action="append")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(
            command=args.command,
            descriptor=args.descriptor,
            cutoff=args.cutoff,
            tmin=args.tmin,
            tmax=args.tmax,
            points=args.points,
            tol=args.tol,
            fmt=args.fmt,
            cache_dir=args.cache_dir,
            use_cache=not args.no_cache,
            kind=getattr(args, "kind", None),
            s_values=tuple(getattr(args, "s_values", None) or ()) or None,
            skeleton=getattr(args, "skeleton", None),
            out=args.out,
        )
    except ValueError as exc:
        sys.stderr.write(dumps_json({"error": "ValueError", "message": str(exc), "exit_code": EXIT_INVALID}))
        return EXIT_INVALID
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
