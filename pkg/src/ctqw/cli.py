"""Command-line front end.

    ctqw amplitude   --graph line --site 3 --t-range 1:10:10
    ctqw density     --graph tree --valency 4 --alpha-range 0.1:3:30 --T 100
    ctqw return-prob --graph lattice --dim 2 --t-range 1:20:20
    ctqw compare     --graph line --alpha 1 --t-range 25:200:4
    ctqw figure      --id 2 --valency 4 --valency 20

Every output starts with a metadata header that records the exact argument
list, so ``ctqw $(header argv)`` reproduces the file byte for byte.
"""

from __future__ import annotations

import argparse
import json
import math
import shlex
import sys
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import __version__
from . import figures
from . import lattice_nd, lattice_walk, tree_walk
from .errors import BoundaryPoint, ConfigError, CTQWError, SymmetryViolation
from .lattice_walk import WalkSymbol
from .numerics import GAUSS_LEGENDRE, PERIODIC_TRAPEZOID, QuadratureSpec
from .output import render_csv, render_json

COMMANDS = ("amplitude", "density", "return-prob", "compare", "figure")
GRAPHS = ("line", "lattice", "tree")

EXIT_CONFIG = 2
EXIT_COMPUTE = 3
EXIT_IO = 4


@dataclass
class RunConfig:
    command: str
    graph: str = "line"
    coeffs: tuple = ()
    valencies: tuple = ()
    dim: int = 1
    site: tuple = (0,)
    times: tuple = ()
    alphas: tuple = ()
    alpha: Optional[float] = None
    T: Optional[float] = None
    method: str = "exact"
    figure_id: Optional[int] = None
    slack: Optional[float] = None
    output_path: Optional[str] = None
    format: str = "csv"
    nodes: int = 64
    tol: float = 1e-13
    argv: tuple = field(default=(), repr=False)

    @property
    def symbol(self) -> WalkSymbol:
        if not self.coeffs:
            return WalkSymbol.nearest_neighbor()
        return WalkSymbol.from_pairs(self.coeffs)

    @property
    def valency(self) -> int:
        return self.valencies[0] if self.valencies else 4

    def periodic_spec(self) -> QuadratureSpec:
        return QuadratureSpec(self.nodes, PERIODIC_TRAPEZOID, self.tol)

    def cut_spec(self) -> QuadratureSpec:
        return QuadratureSpec(self.nodes, GAUSS_LEGENDRE, self.tol)


def _parse_range(text: str) -> tuple[float, ...]:
    try:
        a, b, n = text.split(":")
        n = int(n)
        a, b = float(a), float(b)
    except ValueError:
        raise ConfigError(f"range must look like a:b:n, got {text!r}") from None
    if n < 1:
        raise ConfigError(f"range {text!r} has no points")
    return tuple(float(x) for x in np.linspace(a, b, n))


def _parse_coeff(text: str) -> tuple[int, complex]:
    try:
        key, _, val = text.partition("=")
        parts = [float(p) for p in val.split(",")]
        if len(parts) == 1:
            parts.append(0.0)
        if len(parts) != 2:
            raise ValueError
        return int(key), complex(parts[0], parts[1])
    except ValueError:
        raise ConfigError(f"--coeff must look like l=re,im, got {text!r}") from None


def _parse_site(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(p) for p in text.split(","))
    except ValueError:
        raise ConfigError(f"--site must be a comma-separated list of integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--graph", choices=GRAPHS, default="line")
    common.add_argument("--coeff", action="append", default=[], metavar="l=re,im",
                        help="generator coefficient a_l; a_-l = conj(a_l) is filled in")
    common.add_argument("--valency", action="append", type=int, default=[], metavar="m")
    common.add_argument("--dim", type=int, default=1)
    common.add_argument("--site", default=None)
    common.add_argument("--time", type=float, action="append", default=[])
    common.add_argument("--alpha", type=float, default=None)
    common.add_argument("--T", type=float, default=None)
    common.add_argument("--t-range", default=None, metavar="a:b:n")
    common.add_argument("--alpha-range", default=None, metavar="a:b:n")
    common.add_argument("--method", choices=("exact", "series", "asymptotic", "brute"), default="exact")
    common.add_argument("--slack", type=float, default=None,
                        help="allowed relative growth of scaled errors in compare")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", default=None, metavar="PATH")
    common.add_argument("--nodes", type=int, default=64)
    common.add_argument("--tol", type=float, default=1e-13)

    parser = argparse.ArgumentParser(prog="ctqw", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"ctqw {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "figure":
            p.add_argument("--id", type=int, choices=(1, 2, 3), required=True, dest="figure_id")
    return parser


def config_from_args(argv: Sequence[str]) -> RunConfig:
    args = build_parser().parse_args(list(argv))
    cfg = RunConfig(
        command=args.command,
        graph=args.graph,
        coeffs=tuple(_parse_coeff(c) for c in args.coeff),
        valencies=tuple(args.valency),
        dim=args.dim,
        site=_parse_site(args.site) if args.site is not None else (0,),
        alpha=args.alpha,
        T=args.T,
        method=args.method,
        figure_id=getattr(args, "figure_id", None),
        slack=args.slack,
        output_path=args.out,
        format=args.format,
        nodes=args.nodes,
        tol=args.tol,
    )
    if args.t_range is not None:
        cfg.times = _parse_range(args.t_range)
    elif args.time:
        cfg.times = tuple(args.time)
    if args.alpha_range is not None:
        cfg.alphas = _parse_range(args.alpha_range)
    elif args.alpha is not None:
        cfg.alphas = (args.alpha,)

    # drop --out from the recorded argv so the header does not depend on the file name
    kept: list[str] = []
    skip = False
    for tok in argv:
        if skip:
            skip = False
            continue
        if tok == "--out":
            skip = True
            continue
        if tok.startswith("--out="):
            continue
        kept.append(tok)
    cfg.argv = tuple(kept)
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    if any(t < 0 for t in cfg.times):
        raise ConfigError("times must be non-negative")
    if cfg.nodes < 16 or cfg.nodes % 2:
        raise ConfigError("--nodes must be an even integer >= 16")
    if not cfg.tol > 0:
        raise ConfigError("--tol must be positive")
    if cfg.T is not None and cfg.T < 1:
        raise ConfigError("--T must be at least 1")
    if any(m < 3 for m in cfg.valencies):
        raise ConfigError("--valency must be at least 3")
    if cfg.graph == "lattice":
        if not 1 <= cfg.dim <= lattice_nd.MAX_DIM:
            raise ConfigError(f"--dim must be between 1 and {lattice_nd.MAX_DIM}")
    if cfg.graph == "tree" and cfg.site and cfg.site[0] < 0:
        raise ConfigError("tree sites are distances and must be non-negative")
    try:
        cfg.symbol
    except SymmetryViolation as exc:
        raise ConfigError(str(exc)) from None
    if cfg.slack is not None and cfg.slack < 0:
        raise ConfigError("--slack must be non-negative")
    needs_times = cfg.command in ("amplitude", "return-prob", "compare")
    if needs_times and not cfg.times:
        raise ConfigError(f"{cfg.command} needs --time or --t-range")
    if cfg.command == "density" and not cfg.alphas:
        raise ConfigError("density needs --alpha or --alpha-range")
    if cfg.command == "density" and cfg.graph == "lattice":
        raise ConfigError("density is available for --graph line and --graph tree")
    if cfg.command == "compare" and cfg.graph == "lattice":
        raise ConfigError("compare is available for --graph line and --graph tree")
    if cfg.command == "compare" and cfg.graph == "line" and cfg.alpha is None:
        raise ConfigError("compare on the line needs --alpha")


# --- commands -------------------------------------------------------------------


def _amplitude(cfg: RunConfig):
    rows = []
    cols = ["site", "t", "re", "im", "abs2", "method", "error_estimate"]
    if cfg.graph == "line":
        sym, l = cfg.symbol, cfg.site[0]
        for t in cfg.times:
            if cfg.method == "asymptotic":
                amp = lattice_walk.asymptotic_amplitude(sym, l, t)
            elif cfg.method == "series":
                v = lattice_walk.series_amplitude(sym, l, t)
                amp = lattice_walk.AmplitudeValue(l, t, v, lattice_walk.SERIES, math.nan)
            else:
                amp = lattice_walk.exact_amplitude(sym, l, t, cfg.periodic_spec())
            rows.append([l, t, amp.value.real, amp.value.imag, abs(amp.value) ** 2,
                         amp.method, amp.error_estimate])
    elif cfg.graph == "lattice":
        site = cfg.site if len(cfg.site) == cfg.dim else cfg.site + (0,) * (cfg.dim - len(cfg.site))
        if len(site) != cfg.dim:
            raise ConfigError(f"--site has {len(cfg.site)} coordinates for --dim {cfg.dim}")
        label = ",".join(str(c) for c in site)
        for t in cfg.times:
            if cfg.method == "brute":
                v = lattice_nd.brute_force_amplitude(site, t)
                method = "brute_force"
            else:
                v = lattice_nd.factorized_amplitude(site, t)
                method = "factorized"
            rows.append([label, t, v.real, v.imag, abs(v) ** 2, method, math.nan])
    else:
        params = tree_walk.TreeWalkParams(cfg.valency)
        l = cfg.site[0]
        for t in cfg.times:
            if cfg.method == "series":
                amp = tree_walk.exact_amplitude_series(params, l, t)
            elif cfg.method == "asymptotic":
                amp = tree_walk.asymptotic_amplitude_tree(params, l, t)
            else:
                amp = tree_walk.exact_amplitude_quadrature(params, l, t, cfg.cut_spec())
            rows.append([l, t, amp.value.real, amp.value.imag, abs(amp.value) ** 2,
                         amp.method, amp.error_estimate])
    return cols, rows, {}


def _density(cfg: RunConfig):
    cols = ["alpha", "density", "flag"]
    if cfg.T is not None:
        cols.append("averaged")
    rows = []
    if cfg.graph == "line":
        sym = cfg.symbol
        curve = lattice_walk.density_curve(sym, cfg.alphas)
        for a, v, flag in zip(curve.alphas, curve.values, curve.flags):
            row = [float(a), float(v), flag]
            if cfg.T is not None:
                row.append(lattice_walk.averaged_rescaled_probability(sym, float(a), cfg.T,
                                                                      cfg.periodic_spec()))
            rows.append(row)
        return cols, rows, {"caustics": lattice_walk.caustics(sym)}

    params = tree_walk.TreeWalkParams(cfg.valency)
    for a in cfg.alphas:
        if a <= 0:
            raise ConfigError("tree densities need alpha > 0")
        try:
            row = [a, tree_walk.limit_density_tree(params, a), "ok"]
        except BoundaryPoint:
            row = [a, math.nan, "boundary"]
        if cfg.T is not None:
            row.append(tree_walk.averaged_rescaled_probability_tree(params, a, cfg.T, cfg.cut_spec()))
        rows.append(row)
    return cols, rows, {"r": params.r}


def _return_prob(cfg: RunConfig):
    rows = []
    if cfg.graph == "line":
        sym = cfg.symbol
        for t in cfg.times:
            exact = abs(lattice_walk.exact_amplitude(sym, 0, t, cfg.periodic_spec()).value) ** 2
            lead = lattice_walk.return_probability_average(sym, t) if t > 0 else math.nan
            rows.append([t, exact, lead])
        return ["t", "exact", "average_leading"], rows, {}
    if cfg.graph == "lattice":
        for t in cfg.times:
            rows.append([t, lattice_nd.nd_return_probability(cfg.dim, t)])
        return ["t", "exact"], rows, {}
    params = tree_walk.TreeWalkParams(cfg.valency)
    for t in cfg.times:
        exact = abs(tree_walk.exact_amplitude_quadrature(params, 0, t, cfg.cut_spec()).value) ** 2
        lead = tree_walk.return_probability_tree(params, t) if t >= 1 else math.nan
        rows.append([t, exact, lead])
    return ["t", "exact", "leading"], rows, {}


def non_increasing(values: Sequence[float], slack: float) -> bool:
    return all(b <= (1.0 + slack) * a for a, b in zip(values[:-1], values[1:]))


def _compare(cfg: RunConfig):
    times = [t for t in cfg.times if t > 0]
    if not times:
        raise ConfigError("compare needs positive times")
    if cfg.graph == "line":
        sym = cfg.symbol
        alpha = cfg.alpha
        if not lattice_walk.stationary_points(sym, alpha):
            vals = lattice_walk.decay_bound_check(sym, alpha, times)
            rows = [[t, round(alpha * t), v] for t, v in zip(times, vals)]
            slope = lattice_walk.loglog_slope(times, vals)
            status = "pass" if slope <= -3 else "fail"
            return ["t", "site", "abs_exact"], rows, {
                "regime": "decay", "slope": slope, "bound": "slope<=-3", "summary": status}
        slack = 0.2 if cfg.slack is None else cfg.slack
        rows, env = [], []
        for t in times:
            site = math.floor(alpha * t)
            ex = lattice_walk.exact_amplitude(sym, site, t, cfg.periodic_spec()).value
            asym = lattice_walk.asymptotic_amplitude(sym, site, t).value
            err = abs(ex - asym)
            e = lattice_walk.remainder_envelope(sym, alpha, t)
            env.append(e)
            rows.append([t, site, ex.real, ex.imag, asym.real, asym.imag, err, err * t, e])
        slope = lattice_walk.loglog_slope(times, [r[6] for r in rows])
        status = "pass" if non_increasing(env, slack) else "fail"
        cols = ["t", "site", "exact_re", "exact_im", "asym_re", "asym_im",
                "abs_err", "err_times_t", "envelope_err_times_t"]
        return cols, rows, {"regime": "stationary_phase", "slope": slope,
                            "bound": f"envelope non-increasing within {slack:g}", "summary": status}

    params = tree_walk.TreeWalkParams(cfg.valency)
    slack = 0.25 if cfg.slack is None else cfg.slack
    if cfg.alpha is None:
        rows = []
        for t in times:
            ex = tree_walk.exact_amplitude_quadrature(params, 0, t, cfg.cut_spec()).value.real
            lead = tree_walk.return_amplitude_asymptotic(params, t)
            err = abs(ex - lead)
            rows.append([t, ex, lead, err, err * t * t])
        scaled = [r[4] for r in rows]
        bounded = max(scaled) <= (1.0 + slack) * scaled[0]
        return ["t", "exact", "leading", "abs_err", "err_times_t2"], rows, {
            "regime": "return", "slope": lattice_walk.loglog_slope(times, [r[3] for r in rows]),
            "bound": f"err*t^2 <= (1+{slack:g}) * first value", "summary": "pass" if bounded else "fail"}
    alpha = cfg.alpha
    if alpha > params.r:
        vals = tree_walk.decay_check_tree(params, alpha, times)
        rows = [[t, round(alpha * t), v, v * t] for t, v in zip(times, vals)]
        scaled = [r[3] for r in rows]
        bounded = max(scaled) <= (1.0 + slack) * scaled[0]
        return ["t", "site", "rescaled_abs", "rescaled_abs_times_t"], rows, {
            "regime": "decay", "slope": lattice_walk.loglog_slope(times, vals),
            "bound": f"value*t <= (1+{slack:g}) * first value", "summary": "pass" if bounded else "fail"}
    rows, env = [], []
    for t in times:
        site = math.floor(alpha * t)
        ex = tree_walk.rescaled_amplitude(params, site, t, cfg.cut_spec()).value
        asym = tree_walk.asymptotic_amplitude_tree(params, site, t, margin=0.0, rescaled=True).value
        err = abs(ex - asym)
        e = tree_walk.remainder_envelope_tree(params, alpha, t)
        env.append(e)
        rows.append([t, site, ex.real, ex.imag, asym.real, asym.imag, err, err * t, e])
    cols = ["t", "site", "exact_re", "exact_im", "asym_re", "asym_im",
            "abs_err", "err_times_t", "envelope_err_times_t"]
    status = "pass" if non_increasing(env, slack) else "fail"
    return cols, rows, {"regime": "stationary_phase", "rescaled": "true",
                        "slope": lattice_walk.loglog_slope(times, [r[6] for r in rows]),
                        "bound": f"envelope non-increasing within {slack:g}", "summary": status}


def _figure(cfg: RunConfig):
    if cfg.figure_id == 1:
        alphas = cfg.alphas or _parse_range("-6:6:1201")
        return figures.figure1(alphas)
    if cfg.figure_id == 2:
        xs = cfg.alphas or _parse_range("0:1:201")
        return figures.figure2(cfg.valencies or (4, 20), xs)
    times = cfg.times or _parse_range("0:20:401")
    return figures.figure3(times, cfg.valency)


_DISPATCH = {
    "amplitude": _amplitude,
    "density": _density,
    "return-prob": _return_prob,
    "compare": _compare,
    "figure": _figure,
}


def run(cfg: RunConfig) -> str:
    """Execute a validated config and return the rendered document."""
    columns, rows, extra = _DISPATCH[cfg.command](cfg)
    meta = {
        "program": "ctqw",
        "version": __version__,
        "argv": shlex.join(cfg.argv),
        "command": cfg.command,
        "graph": cfg.graph,
        "quadrature_nodes": cfg.nodes,
        "quadrature_tol": cfg.tol,
        "max_nodes": _max_nodes_str(),
    }
    meta.update(extra)
    if cfg.format == "json":
        return render_json(meta, columns, rows)
    return render_csv(meta, columns, rows)


def _max_nodes_str() -> int:
    from .numerics import max_nodes

    return max_nodes()


def _fail(exc: CTQWError, code: int) -> int:
    sys.stderr.write(json.dumps(exc.record()) + "\n")
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        cfg = config_from_args(argv)
    except ConfigError as exc:
        return _fail(exc, EXIT_CONFIG)
    try:
        text = run(cfg)
    except ConfigError as exc:
        return _fail(exc, EXIT_CONFIG)
    except CTQWError as exc:
        return _fail(exc, EXIT_COMPUTE)
    except ValueError as exc:
        return _fail(ConfigError(str(exc)), EXIT_CONFIG)
    try:
        if cfg.output_path:
            with open(cfg.output_path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        sys.stderr.write(json.dumps({"error": "io_error", "message": str(exc)}) + "\n")
        return EXIT_IO
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
