"""Command-line front end.

Every subcommand writes one self-describing report: tabular commands emit
CSV (with a leading ``#`` line holding the resolved configuration and a
trailing ``#`` summary line) or JSON lines; report commands emit a single
JSON document.  Exit status is 0 when every verdict passes, 1 when any
fails and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import io
import math
import os
import sys
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import charfn, diophantine, limits, martingale, series
from .errors import BudgetError, DomainError, LacunaryError

SCHEMA_VERSION = "1.0.0"

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


def report_schema_version() -> str:
    """Version of the report layout; bumped whenever a column or key changes."""
    return SCHEMA_VERSION


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# Serialisation
# ---------------------------------------------------------------------------


def fmt_number(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def to_json(obj) -> str:
    """Deterministic JSON with 17 significant digits for every float."""
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, float, np.integer, np.floating)):
        s = fmt_number(obj)
        return f'"{s}"' if s in ("NaN", "Infinity", "-Infinity") else s
    if isinstance(obj, str):
        out = ['"']
        for ch in obj:
            if ch in '"\\':
                out.append("\\" + ch)
            elif ord(ch) < 0x20:
                out.append(f"\\u{ord(ch):04x}")
            else:
                out.append(ch)
        out.append('"')
        return "".join(out)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{to_json(str(k))}: {to_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(to_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    return fmt_number(v)


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


@dataclass
class ExperimentConfig:
    """Resolved options of one CLI invocation."""

    subcommand: str
    seq: str | None = None
    coeffs: str | None = None
    n_grid: list = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)
    seed: int = 0
    out: str = "-"
    format: str = "csv"
    threads: int = 1
    budget: int = diophantine.DEFAULT_BUDGET
    params: dict = field(default_factory=dict)

    def validate(self) -> None:
        if any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise UsageError("n grid must be strictly increasing")
        if any(n < 1 for n in self.n_grid):
            raise UsageError("n grid entries must be positive")
        if any(not (t > 0) for t in self.tolerances.values() if t is not None):
            raise UsageError("tolerances must be positive")
        if self.format not in ("csv", "json-lines"):
            raise UsageError(f"unknown format {self.format!r}")
        if self.threads < 0:
            raise UsageError("threads must be nonnegative")

    def as_dict(self) -> dict:
        d = asdict(self)
        d["params"] = {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in d["params"].items()}
        d["schema_version"] = SCHEMA_VERSION
        return d


def parse_n_grid(text: str) -> list[int]:
    """Comma-separated sizes; entries may be written ``2^k``."""
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            if "^" in tok:
                b, e = tok.split("^")
                out.append(int(b) ** int(e))
            else:
                out.append(int(tok))
        except ValueError:
            raise UsageError(f"bad size {tok!r}") from None
    if not out:
        raise UsageError("empty n grid")
    if min(out) < 1:
        raise UsageError("sizes must be positive")
    return out


def parse_range(text: str) -> np.ndarray:
    """``a:b:step`` including both ends."""
    try:
        a, b, step = (float(s) for s in text.split(":"))
    except ValueError:
        raise UsageError(f"bad grid {text!r}; expected a:b:step") from None
    if step <= 0 or b < a:
        raise UsageError("grid needs a <= b and step > 0")
    count = int(round((b - a) / step)) + 1
    return a + step * np.arange(count)


def parse_window(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(s) for s in text.split(":"))
    except ValueError:
        raise UsageError(f"bad window {text!r}; expected lo:hi") from None
    return lo, hi


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


class Report:
    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.buffer = io.StringIO()

    def table(self, rows: list[dict], summary: dict) -> None:
        cfg = self.config.as_dict()
        if self.config.format == "csv":
            self.buffer.write("# " + to_json({"config": cfg}) + "\n")
            if rows:
                cols = list(rows[0].keys())
                self.buffer.write(",".join(cols) + "\n")
                for row in rows:
                    self.buffer.write(",".join(_csv_cell(row.get(c)) for c in cols) + "\n")
            self.buffer.write("# " + to_json({"summary": summary}) + "\n")
        else:
            self.buffer.write(to_json({"config": cfg}) + "\n")
            for row in rows:
                self.buffer.write(to_json(row) + "\n")
            self.buffer.write(to_json({"summary": summary}) + "\n")

    def document(self, body: dict) -> None:
        doc = {"schema_version": SCHEMA_VERSION, "config": self.config.as_dict()}
        doc.update(body)
        self.buffer.write(to_json(doc) + "\n")

    def flush(self, stream) -> None:
        stream.write(self.buffer.getvalue())


def _map(fn: Callable, items: Sequence, threads: int) -> list:
    workers = threads or (os.cpu_count() or 1)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# Families
# ---------------------------------------------------------------------------


@dataclass
class FamilyPoint:
    n: int
    law: object
    A_n: float
    t_n: float
    scale: float  # X_n = S / scale


def _family_point(cfg: ExperimentConfig, family: str, n: int) -> FamilyPoint:
    if family == "walsh":
        seq = series.parse_sequence(cfg.seq or "pow:2", n)
        coeffs = series.parse_coefficients(cfg.coeffs or "flat:0.25", "walsh")
        law = limits.walsh_law(seq, coeffs, n)
        A = coeffs.A(n)
        return FamilyPoint(n, law, A, A * A, 1.0)
    if family == "bernoulli":
        law = limits.BernoulliSumLaw(n)
        if cfg.params.get("normaliser") == "exact":
            A = law.std
        else:
            A = math.sqrt(n) / 2
        return FamilyPoint(n, law, A, math.sqrt(n) / 4, n**0.25)
    if family in ("trig", "holder"):
        seq = series.parse_sequence(cfg.seq or "pow:2", n)
        coeffs = series.parse_coefficients(cfg.coeffs or "flat:0.5", "trig")
        if family == "trig":
            handle = series.trig_sum(seq, coeffs, n)
        else:
            f = _periodic(cfg.params.get("f") or "cos")
            handle = series.HolderSum(f, seq.head(n), coeffs.row(n))
        N = int(cfg.params.get("samples") or 1 << 16)
        law = limits.monte_carlo_law(handle, N=N, seed=cfg.seed)
        A = coeffs.A(n)
        return FamilyPoint(n, law, A, A * A, 1.0)
    raise UsageError(f"unknown family {family!r}")


def _periodic(spec: str) -> series.PeriodicFunction:
    if spec == "cos":
        return series.COS2PI
    if spec == "bernoulli":
        return series.BERNOULLI1
    if spec.startswith("custom-fourier:"):
        path = spec.split(":", 1)[1]
        modes = []
        try:
            for line in Path(path).read_text().splitlines():
                parts = line.split()
                if not parts or parts[0].startswith("#"):
                    continue
                m = int(parts[0])
                a = float(parts[1]) if len(parts) > 1 else 0.0
                b = float(parts[2]) if len(parts) > 2 else 0.0
                modes.append((m, a, b))
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read Fourier file: {exc}") from None
        if not modes:
            raise UsageError("Fourier file has no modes")
        return series.fourier_function(modes, name="custom-fourier")
    raise UsageError(f"unknown function {spec!r}")


def _psi(family: str, kappa4: float = 1.0) -> Callable:
    if family == "walsh":
        return lambda z: charfn.limiting_function("walsh", z, kappa4)
    if family == "bernoulli":
        return lambda z: charfn.limiting_function("bernoulli", z)
    return lambda z: charfn.limiting_function("trivial", z)


def _kappa4(cfg: ExperimentConfig, n: int) -> float:
    coeffs = series.parse_coefficients(cfg.coeffs or "flat:0.25", "walsh")
    return coeffs.kappa4(n)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _target_verdict(rows: list[dict], tol: float | None, relative: bool = True) -> bool | None:
    if tol is None or not rows:
        return None
    last = rows[-1]
    err = last["abs_error"]
    if relative and last["target"]:
        err = err / abs(last["target"])
    return bool(err <= tol)


def cmd_simulate(cfg: ExperimentConfig, report: Report) -> bool | None:
    family = cfg.params["family"]

    def one(n):
        pt = _family_point(cfg, family, n)
        scale = pt.A_n if family != "bernoulli" else pt.law.std
        if isinstance(pt.law, limits.DiscreteLaw):
            mean, var = pt.law.mean(), pt.law.variance()
        else:
            mean, var = 0.0, pt.law.variance
        d = limits.kolmogorov_distance(pt.law, scale=scale)
        return {"n": n, "A_n": scale, "statistic": d, "target": 0.0, "abs_error": d, "mean": mean, "variance": var}

    rows = _map(one, cfg.n_grid, cfg.threads)
    report.table(rows, {"family": family, "verdict": None})
    return None


def cmd_mgf(cfg: ExperimentConfig, report: Report) -> bool | None:
    kind = cfg.params["kind"]
    grid = cfg.params["grid"]
    imag = cfg.params.get("imag", False)

    def one(n):
        z = 1j * grid if imag else grid.astype(complex)
        if kind == "walsh":
            seq = series.parse_sequence(cfg.seq or "pow:2", n)
            coeffs = series.parse_coefficients(cfg.coeffs or "flat:0.25", "walsh")
            vals = charfn.mgf_walsh_exact(coeffs, n, z, seq=seq)
            t = coeffs.A(n) ** 2
            psi = _psi("walsh", coeffs.kappa4(n))
        elif kind == "bernoulli":
            vals = charfn.mgf_bernoulli_exact(n, z * n**-0.25)
            t = math.sqrt(n) / 4
            psi = _psi("bernoulli")
        else:
            raise UsageError(f"unknown kind {kind!r}")
        phi = charfn.ComplexGridFunction(z, vals, {"n": n, "t_n": t})
        return charfn.residual_rows(phi, t, psi)

    parts = _map(one, cfg.n_grid, cfg.threads)
    rows = [r for part in parts for r in part]
    tol = cfg.tolerances.get("abs")
    verdict = None if tol is None else bool(all(r["abs_error"] <= tol for r in rows if r["n"] == cfg.n_grid[-1]))
    sup = {}
    for r in rows:
        sup[r["n"]] = max(sup.get(r["n"], 0.0), r["abs_error"])
    report.table(rows, {"kind": kind, "sup_abs_error": [[n, e] for n, e in sup.items()], "verdict": verdict})
    return verdict


def cmd_count(cfg: ExperimentConfig, report: Report) -> bool | None:
    p = cfg.params
    n, l, r = p["n"], p["l"], p["r"]
    seq = series.parse_sequence(cfg.seq, n)
    if len(seq) < n:
        raise UsageError(f"sequence provides only {len(seq)} terms")
    params = {"seq": cfg.seq, "n": n, "l": l, "r": r, "mode": p["mode"]}
    if p["mode"] == "xor":
        rep = diophantine.count_xor_solutions(seq, n, l, budget=cfg.budget)
        body = {
            "params": params,
            "max_count": rep.max_count,
            "bound": rep.bound,
            "bound_name": rep.bound_name,
            "zero_count": rep.zero_count,
            "verdict": rep.verdict,
            "top_buckets": [list(t) for t in rep.top_buckets()],
        }
        report.document(body)
        return rep.verdict
    reps = diophantine.count_signed_solutions(
        seq, n, l, r, budget=cfg.budget, variant=p.get("variant") or "statement"
    )
    classes = [rep.to_dict() for rep in reps.values()]
    bounded = [rep for rep in reps.values() if rep.bound is not None]
    binding = max(bounded, key=lambda rp: rp.max_count / rp.bound) if bounded else max(
        reps.values(), key=lambda rp: rp.max_count
    )
    verdicts = [rep.verdict for rep in reps.values() if rep.verdict is not None]
    verdict = all(verdicts) if verdicts else None
    body = {
        "params": params,
        "max_count": binding.max_count,
        "bound": binding.bound,
        "bound_name": binding.bound_name,
        "binding_class": list(binding.klass) if isinstance(binding.klass, tuple) else binding.klass,
        "verdict": verdict,
        "top_buckets": [list(t) for t in binding.top_buckets()],
        "classes": classes,
    }
    report.document(body)
    return verdict


def cmd_llt(cfg: ExperimentConfig, report: Report) -> bool | None:
    family = cfg.params["family"]
    B = cfg.params["window"]
    y = cfg.params["y"]
    delta = cfg.params["delta"]
    target = limits.window_length(B) / limits.SQRT2PI

    def one(n):
        pt = _family_point(cfg, family, n)
        stat = limits.llt_statistic(pt.law, pt.A_n, y, B, delta, t_n=pt.t_n)
        return {"n": n, "A_n": pt.A_n, "statistic": stat, "target": target, "abs_error": abs(stat - target)}

    rows = _map(one, cfg.n_grid, cfg.threads)
    verdict = _target_verdict(rows, cfg.tolerances.get("rel"))
    report.table(rows, {"family": family, "verdict": verdict})
    return verdict


def cmd_kolmogorov(cfg: ExperimentConfig, report: Report) -> bool | None:
    family = cfg.params["family"]

    def one(n):
        pt = _family_point(cfg, family, n)
        scale = pt.law.std if family == "bernoulli" else pt.A_n
        d = limits.kolmogorov_distance(pt.law, scale=scale)
        return {"n": n, "A_n": scale, "statistic": d, "target": 0.0, "abs_error": d}

    rows = _map(one, cfg.n_grid, cfg.threads)
    slope = None
    if len(rows) >= 3:
        slope = limits.berry_esseen_rate_fit([(r["A_n"], r["statistic"]) for r in rows])
    max_slope = cfg.params.get("max_slope")
    verdict = None if max_slope is None or slope is None else bool(slope <= max_slope)
    report.table(rows, {"family": family, "slope": slope, "verdict": verdict})
    return verdict


def cmd_tails(cfg: ExperimentConfig, report: Report) -> bool | None:
    family = cfg.params["family"]
    y = cfg.params["y"]

    def one(n):
        pt = _family_point(cfg, family, n)
        A = pt.law.std if family == "bernoulli" else pt.A_n
        ratio = limits.tail_ratio_extended_clt(pt.law, A, y)
        return {"n": n, "A_n": A, "statistic": ratio, "target": 1.0, "abs_error": abs(ratio - 1.0)}

    rows = _map(one, cfg.n_grid, cfg.threads)
    verdict = _target_verdict(rows, cfg.tolerances.get("rel"))
    report.table(rows, {"family": family, "y": y, "verdict": verdict})
    return verdict


def cmd_mdp(cfg: ExperimentConfig, report: Report) -> bool | None:
    family = cfg.params["family"]
    y = cfg.params["y"]

    def one(n):
        pt = _family_point(cfg, family, n)
        k4 = _kappa4(cfg, n) if family == "walsh" else 1.0
        obs, pred = limits.moderate_deviation_check(pt.law, pt.A_n, y, _psi(family, k4), t_n=pt.t_n, scale=pt.scale)
        ratio = obs / pred if pred > 0 else math.inf
        return {
            "n": n, "A_n": pt.A_n, "statistic": ratio, "target": 1.0,
            "abs_error": abs(ratio - 1.0), "observed": obs, "predicted": pred,
        }

    rows = _map(one, cfg.n_grid, cfg.threads)
    errs = [r["abs_error"] for r in rows]
    trend = bool(len(errs) < 2 or errs[-1] <= errs[0])
    report.table(rows, {"family": family, "y": y, "trend_toward_one": trend, "verdict": None})
    return None


def cmd_martingale(cfg: ExperimentConfig, report: Report) -> bool | None:
    p = cfg.params
    f = _periodic(p["f"])
    dec = martingale.build_decomposition(f, depth=p["depth"], keep=min(p["depth"], max(12, p["r"])))
    chk = martingale.martingale_inequality_check(f, p["r"], p["n"], depth=p["depth"], decomposition=dec)
    body = chk.to_dict()
    body["decay_exponent"] = martingale.decay_exponent(dec, r_max=min(dec.depth - 2, 20))
    body["verdict"] = chk.holds
    report.document(body)
    return chk.holds


def cmd_zone(cfg: ExperimentConfig, report: Report) -> bool | None:
    p = cfg.params
    family = p["family"]
    if family == "walsh":
        seq_spec = cfg.seq or "pow:2"
        coeffs = series.parse_coefficients(cfg.coeffs or "flat:0.25", "walsh")

        def builder(n, lam):
            seq = series.parse_sequence(seq_spec, n)
            return charfn.mgf_walsh_exact(coeffs, n, 1j * lam, seq=seq)

        def t_n(n):
            return coeffs.A(n) ** 2
    elif family == "bernoulli":
        def builder(n, lam):
            return charfn.mgf_bernoulli_exact(n, 1j * lam * n**-0.25)

        def t_n(n):
            return math.sqrt(n) / 4
    else:
        raise UsageError(f"unknown family {family!r}")
    rep = charfn.zone_of_control_check(builder, t_n, p["v"], p["w"], p["gamma"], p["D"], cfg.n_grid)
    body = rep.to_dict()
    report.document(body)
    return rep.verdict


COMMANDS = {
    "simulate": cmd_simulate,
    "mgf": cmd_mgf,
    "count-solutions": cmd_count,
    "llt": cmd_llt,
    "kolmogorov": cmd_kolmogorov,
    "tails": cmd_tails,
    "mdp": cmd_mdp,
    "martingale-check": cmd_martingale,
    "zone-check": cmd_zone,
}


def run(config: ExperimentConfig, stdout=None, stderr=None) -> int:
    """Execute one configured experiment and write its report."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        config.validate()
        if config.subcommand not in COMMANDS:
            raise UsageError(f"unknown subcommand {config.subcommand!r}")
        if config.out != "-":
            # fail early on unwritable destinations
            with open(config.out, "a", encoding="utf-8"):
                pass
        report = Report(config)
        verdict = COMMANDS[config.subcommand](config, report)
    except (UsageError, DomainError, OSError) as exc:
        print(f"lacunary: error: {exc}", file=stderr)
        return EXIT_USAGE
    except BudgetError as exc:
        print(f"lacunary: budget exceeded: {exc}", file=stderr)
        return EXIT_FAIL
    except LacunaryError as exc:
        print(f"lacunary: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_FAIL
    try:
        if config.out == "-":
            report.flush(stdout)
        else:
            with open(config.out, "w", encoding="utf-8", newline="\n") as fh:
                report.flush(fh)
    except OSError as exc:
        print(f"lacunary: error: {exc}", file=stderr)
        return EXIT_USAGE
    return EXIT_FAIL if verdict is False else EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--out", default=d("-"), help="output path ('-' for stdout)")
    parser.add_argument("--format", choices=("csv", "json-lines"), default=d("csv"))
    parser.add_argument("--seed", type=int, default=d(0))
    parser.add_argument("--threads", type=int, default=d(1), help="worker threads (0 = auto)")
    parser.add_argument("--budget", type=int, default=d(diophantine.DEFAULT_BUDGET),
                        help="configuration budget for exhaustive counts")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lacunary", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"schema {SCHEMA_VERSION}")
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add(name, help_text):
        return sub.add_parser(name, help=help_text, parents=[common])

    fam = ("walsh", "bernoulli", "trig", "holder")

    s = add("simulate", "law summaries and Kolmogorov distances over an n grid")
    s.add_argument("--family", choices=fam, default="walsh")
    s.add_argument("--seq")
    s.add_argument("--coeffs")
    s.add_argument("--n-grid", default="16,64,256")
    s.add_argument("--samples", type=int, default=1 << 16, help="strata for Monte-Carlo laws")
    s.add_argument("--f", default="cos", help="periodic function for the holder family")

    s = add("mgf", "exact moment generating functions and mod-Gaussian residuals")
    s.add_argument("--kind", choices=("walsh", "bernoulli"), required=True)
    s.add_argument("--n", dest="n_grid", required=True, help="size or comma-separated sizes")
    s.add_argument("--grid", default="-1:1:0.05", help="a:b:step")
    s.add_argument("--imag", action="store_true", help="evaluate at z = i*grid")
    s.add_argument("--seq")
    s.add_argument("--coeffs")
    s.add_argument("--tol", type=float, help="assert max abs_error at the largest n")

    s = add("count-solutions", "exhaustive Diophantine solution counts")
    s.add_argument("--seq", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--l", type=int, required=True)
    s.add_argument("--r", type=int, default=1)
    s.add_argument("--mode", choices=("signed", "xor"), default="signed")
    s.add_argument("--bound-variant", choices=("statement", "proof"), default="statement")

    s = add("llt", "local limit window statistics")
    s.add_argument("--family", choices=fam, default="walsh")
    s.add_argument("--seq")
    s.add_argument("--coeffs")
    s.add_argument("--n-grid", default="2^8,2^12,2^16")
    s.add_argument("--window", default="-0.5:0.5", help="half-open window lo:hi")
    s.add_argument("--y", type=float, default=0.0)
    s.add_argument("--delta", type=float, default=0.5)
    s.add_argument("--tol", type=float, help="relative tolerance at the largest n")
    s.add_argument("--samples", type=int, default=1 << 22)

    s = add("kolmogorov", "Kolmogorov distances and Berry-Esseen slope")
    s.add_argument("--family", choices=fam, default="walsh")
    s.add_argument("--seq")
    s.add_argument("--coeffs")
    s.add_argument("--n-grid", default="2^8,2^10,2^12,2^14,2^16")
    s.add_argument("--max-slope", type=float)
    s.add_argument("--samples", type=int, default=1 << 22)
    s.add_argument("--f", default="cos")

    s = add("tails", "extended central limit theorem tail ratios")
    s.add_argument("--family", choices=fam, default="walsh")
    s.add_argument("--seq")
    s.add_argument("--coeffs")
    s.add_argument("--n-grid", default="2^8,2^12,2^16")
    s.add_argument("--y", type=float, default=1.0)
    s.add_argument("--tol", type=float)
    s.add_argument("--samples", type=int, default=1 << 22)

    s = add("mdp", "moderate deviation probabilities against the prediction")
    s.add_argument("--family", choices=("walsh", "bernoulli"), default="walsh")
    s.add_argument("--seq")
    s.add_argument("--coeffs")
    s.add_argument("--n-grid", default="2^8,2^12,2^16")
    s.add_argument("--y", type=float, default=0.25)

    s = add("martingale-check", "quadratic inequality for dyadic remainders")
    s.add_argument("--f", default="cos", help="cos, bernoulli or custom-fourier:FILE")
    s.add_argument("--r", type=int, default=4)
    s.add_argument("--n", type=int, default=6)
    s.add_argument("--depth", type=int, default=24)

    s = add("zone-check", "zone-of-control fit and verdict")
    s.add_argument("--family", choices=("walsh", "bernoulli"), default="walsh")
    s.add_argument("--seq")
    s.add_argument("--coeffs")
    s.add_argument("--n-grid", default="2^8,2^10,2^12,2^14")
    s.add_argument("--v", type=float, default=4.0)
    s.add_argument("--w", type=float, default=4.0)
    s.add_argument("--gamma", type=float, default=0.1)
    s.add_argument("--D", type=float, default=1.0)
    return parser


def config_from_args(ns: argparse.Namespace) -> ExperimentConfig:
    sc = ns.subcommand
    cfg = ExperimentConfig(
        subcommand=sc,
        seq=getattr(ns, "seq", None),
        coeffs=getattr(ns, "coeffs", None),
        seed=ns.seed,
        out=ns.out,
        format=ns.format,
        threads=ns.threads,
        budget=ns.budget,
    )
    if hasattr(ns, "n_grid") and ns.n_grid is not None:
        cfg.n_grid = parse_n_grid(ns.n_grid)
    p = cfg.params
    if sc == "simulate":
        p.update(family=ns.family, samples=ns.samples, f=ns.f)
    elif sc == "mgf":
        p.update(kind=ns.kind, grid=parse_range(ns.grid), imag=ns.imag)
        cfg.tolerances["abs"] = ns.tol
    elif sc == "count-solutions":
        p.update(n=ns.n, l=ns.l, r=ns.r, mode=ns.mode, variant=ns.bound_variant)
    elif sc == "llt":
        p.update(family=ns.family, window=parse_window(ns.window), y=ns.y, delta=ns.delta, samples=ns.samples)
        cfg.tolerances["rel"] = ns.tol
    elif sc == "kolmogorov":
        p.update(family=ns.family, max_slope=ns.max_slope, samples=ns.samples, f=ns.f, normaliser="exact")
    elif sc == "tails":
        p.update(family=ns.family, y=ns.y, samples=ns.samples)
        cfg.tolerances["rel"] = ns.tol
    elif sc == "mdp":
        p.update(family=ns.family, y=ns.y)
    elif sc == "martingale-check":
        p.update(f=ns.f, r=ns.r, n=ns.n, depth=ns.depth)
    elif sc == "zone-check":
        p.update(family=ns.family, v=ns.v, w=ns.w, gamma=ns.gamma, D=ns.D)
    cfg.tolerances = {k: v for k, v in cfg.tolerances.items() if v is not None}
    return cfg


_RANGE_OPTIONS = ("--grid", "--window")


def _join_negative_values(argv: list[str]) -> list[str]:
    # let "--grid -1:1:0.05" through: argparse would read "-1:1:0.05" as a flag
    out = []
    i = 0
    while i < len(argv):
        a = argv[i]
        if a in _RANGE_OPTIONS and i + 1 < len(argv) and argv[i + 1].startswith("-") and ":" in argv[i + 1]:
            out.append(f"{a}={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = _join_negative_values(list(sys.argv[1:] if argv is None else argv))
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        cfg = config_from_args(ns)
    except UsageError as exc:
        print(f"lacunary: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
