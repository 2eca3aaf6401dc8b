"""Command-line front end.

Every subcommand reads an optional JSON experiment config; flags override
its fields.  Exit status: 0 all checks passed, 1 a check failed,
2 configuration error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field, fields

import numpy as np

from .alphadet import AlphaParam, det_alpha_dp, det_alpha_naive
from .correlation import CorrelationQuery, verify_parseval
from .errors import AlphaDPPError, ArtifactIOError, ConfigurationError, ContractViolation, ResourceLimitError
from .kernels import kernel_from_dict, validate_a1
from .projection import choose_rank, project_kernel, spectrum_check
from .quadrature import QuadratureSpec
from .reports import emit_report, emit_samples, fmt_number, write_text
from .sampler import simulate_lift, verify_lift
from .tree import TreeIndex, Window, cell_of

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3


@dataclass
class ExperimentConfig:
    """Experiment record; every field has a default."""

    kernel: dict = field(default_factory=lambda: {"kind": "rank-one-indicator"})
    alpha: str = "-1"
    level: int = 1
    rank: int | None = 4
    tail_threshold: float | None = None
    window: list = field(default_factory=lambda: [0.0, 1.0])
    queries: list | None = None
    samples: int = 1000
    seed: int = 0
    threads: int = 1
    quad_order: int = 8
    refinement_level: int | None = None
    grid_n: int = 512
    n_leading: int = 5
    spectrum_threshold: float = 1e-2
    parseval_tolerance: float | None = None
    out: str = "-"
    format: str = "json"

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigurationError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigurationError(f"unknown config field(s): {', '.join(unknown)}")
        return cls(**d)

    def alpha_param(self) -> AlphaParam:
        return AlphaParam.parse(str(self.alpha))

    def window_obj(self) -> Window:
        try:
            a, b = (float(v) for v in self.window)
        except (TypeError, ValueError):
            raise ConfigurationError(f"window: expected [a, b], got {self.window!r}") from None
        w = Window(a, b)
        w.require_aligned(self.level)
        return w

    def quad(self) -> QuadratureSpec:
        return QuadratureSpec(int(self.quad_order), self.refinement_level)

    def check(self) -> None:
        for name in ("level", "samples", "threads", "quad_order", "grid_n", "n_leading"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < (0 if name == "samples" else 1):
                raise ConfigurationError(f"{name}: expected a positive integer, got {v!r}")
        if self.rank is not None and (not isinstance(self.rank, int) or self.rank < 1):
            raise ConfigurationError(f"rank: expected a positive integer, got {self.rank!r}")
        if self.rank is None and self.tail_threshold is None:
            raise ConfigurationError("rank: give either rank or tail_threshold")
        if self.format not in ("json", "csv"):
            raise ConfigurationError(f"format: expected json or csv, got {self.format!r}")

    def query_objects(self, window: Window) -> list[CorrelationQuery]:
        alpha = self.alpha_param()
        raw = self.queries
        if not raw:
            h = 2.0 ** (1 - self.level)
            raw = [[[window.a, window.a + h]]]
        out = []
        for qi, cells in enumerate(raw):
            parsed = []
            for c in cells:
                if isinstance(c, str):
                    t = TreeIndex.parse(c)
                    if t.rank != self.level:
                        raise ConfigurationError(f"queries[{qi}]: cell label {c} is not a level-{self.level} cell")
                    parsed.append(cell_of(self.level, t))
                else:
                    parsed.append(tuple(float(v) for v in c))
            try:
                q = CorrelationQuery(self.level, tuple(parsed), alpha)
            except ContractViolation as exc:
                raise ConfigurationError(f"queries[{qi}]: {exc}") from None
            for lo, hi in q.cells:
                if not window.contains(lo, hi):
                    raise ConfigurationError(f"queries[{qi}]: cell [{lo}, {hi}) lies outside the window")
            out.append(q)
        return out


def _parse_window(text: str) -> list:
    try:
        a, b = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a,b but got {text!r}") from None
    return [a, b]


def _parse_cell(text: str) -> list:
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi but got {text!r}") from None
    return [lo, hi]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("experiment")
    g.add_argument("--config", help="JSON experiment config; flags below override its fields")
    g.add_argument("--alpha", help="rational alpha in {2/m} or {-1/m} (default -1)")
    g.add_argument("--level", type=int, help="tree level l (default 1)")
    g.add_argument("--rank", type=int, help="truncation rank R (default 4)")
    g.add_argument("--tail-threshold", type=float, help="pick the smallest R with tail trace <= this fraction of the trace")
    g.add_argument("--window", type=_parse_window, help="window a,b aligned to level-l cells (default 0,1)")
    g.add_argument("--query", type=_parse_cell, nargs="+", action="append", metavar="LO:HI",
                   help="one correlation query as level-l cells; repeat for several (default: first cell)")
    g.add_argument("--samples", type=int, help="number of Monte Carlo samples (default 1000)")
    g.add_argument("--seed", type=int, help="RNG seed (default 0)")
    g.add_argument("--threads", type=int, help="worker cap (default $ALPHADPP_THREADS or 1)")
    g.add_argument("--quad-order", type=int, help="Gauss-Legendre nodes per fine cell (default 8)")
    g.add_argument("--refinement-level", type=int, help="fine quadrature level (default: automatic)")
    g.add_argument("--grid-n", type=int, help="Nystrom grid size for spectrum (default 512)")
    g.add_argument("--n-leading", type=int, help="leading eigenvalues compared by spectrum (default 5)")
    g.add_argument("--out", help="output path, '-' for stdout (default -)")
    g.add_argument("--format", choices=["json", "csv"], help="report format (default json)")

    p = argparse.ArgumentParser(prog="alphadpp", description="Tree representation of alpha-determinantal point processes.")
    sub = p.add_subparsers(dest="command", required=True)
    ad = sub.add_parser("alpha-det", parents=[common], help="evaluate det_alpha of a matrix file")
    ad.add_argument("matrix", help="JSON nested list (entries numbers or [re, im]) or whitespace text")
    ad.add_argument("--method", choices=["dp", "naive"], default="dp", help="evaluation route (default dp)")
    sub.add_parser("project", parents=[common], help="emit the projected kernel matrix")
    sub.add_parser("spectrum", parents=[common], help="compare projected and Nystrom spectra")
    sub.add_parser("parseval", parents=[common], help="continuum vs tree correlation integrals")
    sub.add_parser("sample", parents=[common], help="dump lifted samples as JSON lines")
    sub.add_parser("verify-lift", parents=[common], help="Monte Carlo factorial moments of the lift")
    return p


_FLAG_FIELDS = {
    "alpha": "alpha", "level": "level", "rank": "rank", "tail_threshold": "tail_threshold",
    "window": "window", "query": "queries", "samples": "samples", "seed": "seed",
    "threads": "threads", "quad_order": "quad_order", "refinement_level": "refinement_level",
    "grid_n": "grid_n", "n_leading": "n_leading", "out": "out", "format": "format",
}


def load_config(args) -> ExperimentConfig:
    data = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ArtifactIOError(f"cannot read config {args.config}: {exc.strerror or exc}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config {args.config} is not valid JSON: {exc}") from None
    cfg = ExperimentConfig.from_dict(data)
    if "threads" not in data:
        env = os.environ.get("ALPHADPP_THREADS")
        if env:
            try:
                cfg.threads = int(env)
            except ValueError:
                raise ConfigurationError(f"ALPHADPP_THREADS must be an integer, got {env!r}") from None
    for flag, name in _FLAG_FIELDS.items():
        v = getattr(args, flag, None)
        if v is not None:
            setattr(cfg, name, v)
    if args.tail_threshold is not None and args.rank is None:
        cfg.rank = None
    cfg.check()
    return cfg


def _read_matrix(path: str) -> np.ndarray:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ArtifactIOError(f"cannot read matrix {path}: {exc.strerror or exc}") from exc
    try:
        rows = json.loads(text)
    except json.JSONDecodeError:
        try:
            return np.atleast_2d(np.loadtxt(io_lines(text), dtype=complex))
        except ValueError as exc:
            raise ConfigurationError(f"matrix {path}: {exc}") from None

    def entry(v):
        if isinstance(v, list) and len(v) == 2:
            return complex(v[0], v[1])
        if isinstance(v, str):
            return complex(v.replace(" ", ""))
        return complex(v)

    try:
        return np.array([[entry(v) for v in row] for row in rows], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"matrix {path}: {exc}") from None


def io_lines(text: str):
    return [ln for ln in text.splitlines() if ln.strip()]


def _format_value(z: complex) -> str:
    if z.imag == 0:
        return fmt_number(z.real)
    return f"{fmt_number(z.real)}{'+' if z.imag >= 0 else '-'}{fmt_number(abs(z.imag))}j"


def _resolve_rank(cfg, kernel, window, quad) -> int:
    if cfg.rank is not None:
        return cfg.rank
    return choose_rank(kernel, cfg.level, window, cfg.tail_threshold, quad)


def _setup(cfg):
    alpha = cfg.alpha_param()
    try:
        kernel = kernel_from_dict(cfg.kernel)
    except (ContractViolation, KeyError, TypeError, ValueError) as exc:
        raise ConfigurationError(f"kernel: {exc}") from None
    window = cfg.window_obj()
    quad = cfg.quad()
    rank = _resolve_rank(cfg, kernel, window, quad)
    quad.resolve(cfg.level, rank, kernel)
    return alpha, kernel, window, quad, rank


def cmd_alpha_det(args, cfg) -> int:
    a = _read_matrix(args.matrix)
    alpha = cfg.alpha_param()
    val = det_alpha_dp(a, alpha) if args.method == "dp" else det_alpha_naive(a, alpha)
    if cfg.out and cfg.out != "-":
        emit_report({"alpha": str(alpha), "n": a.shape[0], "method": args.method, "value": val}, cfg.format, cfg.out)
    else:
        write_text(_format_value(complex(val)) + "\n", "-")
    return EXIT_OK


def cmd_project(args, cfg) -> int:
    alpha, kernel, window, quad, rank = _setup(cfg)
    proj = project_kernel(kernel, cfg.level, rank, window, quad)
    emit_report(proj, cfg.format, cfg.out)
    return EXIT_OK


def cmd_spectrum(args, cfg) -> int:
    alpha, kernel, window, quad, rank = _setup(cfg)
    proj = project_kernel(kernel, cfg.level, rank, window, quad)
    rep = spectrum_check(kernel, proj, cfg.grid_n, cfg.n_leading, cfg.spectrum_threshold)
    emit_report(rep, cfg.format, cfg.out)
    return EXIT_OK if rep.passed else EXIT_CHECK


def cmd_parseval(args, cfg) -> int:
    alpha, kernel, window, quad, rank = _setup(cfg)
    queries = cfg.query_objects(window)
    proj = project_kernel(kernel, cfg.level, rank, window, quad)
    reports = [verify_parseval(kernel, q, rank, quad, proj, cfg.parseval_tolerance) for q in queries]
    emit_report(reports[0] if len(reports) == 1 else reports, cfg.format, cfg.out)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_CHECK


def cmd_sample(args, cfg) -> int:
    alpha, kernel, window, quad, rank = _setup(cfg)
    validate_a1(kernel, alpha, window, rank, cfg.level, quad).raise_for_violation()
    proj = project_kernel(kernel, cfg.level, rank, window, quad)
    samples = simulate_lift(proj, alpha, cfg.samples, cfg.seed, cfg.threads)
    emit_samples(samples, cfg.out)
    return EXIT_OK


def cmd_verify_lift(args, cfg) -> int:
    alpha, kernel, window, quad, rank = _setup(cfg)
    validate_a1(kernel, alpha, window, rank, cfg.level, quad).raise_for_violation()
    queries = cfg.query_objects(window)
    rep = verify_lift(kernel, alpha, cfg.level, rank, window, queries, cfg.samples, cfg.seed, quad, cfg.threads)
    emit_report(rep, cfg.format, cfg.out)
    return EXIT_OK if rep.passed else EXIT_CHECK


COMMANDS = {
    "alpha-det": cmd_alpha_det,
    "project": cmd_project,
    "spectrum": cmd_spectrum,
    "parseval": cmd_parseval,
    "sample": cmd_sample,
    "verify-lift": cmd_verify_lift,
}


def _glue_alpha(argv):
    """Let ``--alpha -1/2`` through; argparse would read the value as a flag."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok == "--alpha":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"--alpha={nxt}")
        else:
            out.append(tok)
    return out


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(_glue_alpha(sys.argv[1:] if argv is None else list(argv)))
    try:
        cfg = load_config(args)
        return COMMANDS[args.command](args, cfg)
    except ArtifactIOError as exc:
        print(f"alphadpp: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (AlphaDPPError, ResourceLimitError) as exc:
        print(f"alphadpp: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
