"""
Command-line front end.

    multicoin-walk distribution --coins 20 --time 200 --method factorized
    multicoin-walk moments --coins 1..5 --time 400
    multicoin-walk moments --reset-every 2 --time 2000
    multicoin-walk compare --coins 3 --time 24 --method direct,factorized
    multicoin-walk coefficients --coins 1..5 --source closed,spectral
    multicoin-walk coefficients --reset-every 1..3

Files are UTF-8 with '\\n' line ends.  CSV output starts with '#' metadata
lines; JSON output holds the same fields under "meta" and "data".  Floats
are written with 17 significant digits.  Exit status: 0 success, 2 usage
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import __version__, asymptotics, combinatorics, core, factorized, moments
from .errors import NumericError, ResourceLimitError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3

METHODS = ("direct", "factorized", "combinatorial", "asymptotic")
SOURCES = ("closed", "spectral", "reset-quadrature")


class UsageError(Exception):
    pass


def parse_range(text: str) -> list[int]:
    """'4' -> [4], '1..5' -> [1..5], '1,3,7' -> [1, 3, 7]; pieces may be mixed."""
    out: list[int] = []
    try:
        for piece in text.split(","):
            piece = piece.strip()
            if ".." in piece:
                lo, hi = piece.split("..")
                lo, hi = int(lo), int(hi)
                if hi < lo:
                    raise ValueError
                out.extend(range(lo, hi + 1))
            else:
                out.append(int(piece))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}; use e.g. 3, 1..5 or 1,2,4") from None
    if not out:
        raise argparse.ArgumentTypeError("empty range")
    return out


def parse_start(text: str) -> tuple[complex, complex]:
    """Preset name (R, L, SYMMETRIC) or 'alpha,beta' with Python complex literals."""
    if "," not in text:
        try:
            return core.coin_state(text)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    try:
        alpha, beta = (complex(p.strip().replace(" ", "")) for p in text.split(","))
        return core.coin_state((alpha, beta))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad coin start {text!r}: {exc}") from None


def _fmt(v) -> str:
    return "%.17g" % v


@dataclass
class RunConfig:
    command: str
    coins: list[int] = field(default_factory=lambda: [1])
    time: int = 0
    methods: list[str] = field(default_factory=list)
    schedule: core.Schedule = core.Schedule.CYCLIC
    start: tuple[complex, complex] = core.R
    start_label: str = "R"
    nodes: int = 257
    output: str | None = None
    fmt: str = "csv"
    seed: int | None = None
    all_positions: bool = False
    reset_every: list[int] | None = None
    sources: list[str] = field(default_factory=list)

    def meta(self) -> dict:
        out = {
            "library": "multicoin-walk",
            "version": __version__,
            "command": self.command,
            "coins": self.coins,
            "time": self.time,
            "schedule": self.schedule.value,
            "start": self.start_label,
        }
        if self.methods:
            out["method"] = ",".join(self.methods)
        if self.reset_every:
            out["reset_every"] = self.reset_every
        if self.command == "coefficients":
            out["sources"] = ",".join(self.sources)
            out["nodes"] = self.nodes
        if self.seed is not None:
            out["seed"] = self.seed
        return out


def _check_method(method: str, m: int, t: int, cfg: RunConfig) -> None:
    if method not in METHODS:
        raise UsageError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    if method == "direct":
        if m > core.DIRECT_SIM_CAP:
            raise UsageError(f"direct simulation is capped at {core.DIRECT_SIM_CAP} coins; use factorized")
        if cfg.schedule is core.Schedule.BLOCK and t % m:
            raise UsageError("block schedule needs --time divisible by --coins")
    elif method == "factorized":
        if t % m or (t // m) % 2 or t == 0:
            raise UsageError("factorized needs --time = coins * s with s a positive even integer")
    elif method == "combinatorial":
        if m != 1:
            raise UsageError("combinatorial amplitudes are for a single coin (--coins 1)")
    elif method == "asymptotic":
        if cfg.start_label != "R":
            raise UsageError("asymptotic method is implemented for |R> starts")
        if t % m or t < asymptotics.MIN_TIME * (1 if m == 1 else 2):
            raise UsageError(
                f"asymptotic needs --time divisible by --coins and large enough (t >= {asymptotics.MIN_TIME})"
            )
        if m == 2 and t % 2:
            raise UsageError("two-coin asymptotic needs even --time")


def compute_distribution(method: str, m: int, t: int, cfg: RunConfig) -> core.Distribution:
    alpha, beta = cfg.start
    if method == "direct":
        spec = core.CoinSpec(m, (cfg.start,) * m, cfg.schedule)
        return core.measure_positions(core.evolve(core.initial_state(spec), t, cfg.schedule))
    if method == "factorized":
        return factorized.multicoin_distribution(m, t // m, cfg.start)
    if method == "combinatorial":
        g_l, g_r = combinatorics.amplitude_table(t, alpha, beta)
        probs = np.zeros(2 * t + 1)
        probs[::2] = np.abs(g_l) ** 2 + np.abs(g_r) ** 2
        return core.Distribution(offset=-t, probs=probs, time=t)
    return asymptotics.asymptotic_distribution(m, t)


# -- writers -----------------------------------------------------------------

def _csv_text(meta: dict, header: Sequence[str], rows: list[Sequence], footer: dict | None = None) -> str:
    lines = [f"# {k}: {_meta_value(v)}" for k, v in meta.items()]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_cell(v) for v in row))
    if footer:
        for k, v in footer.items():
            lines.append(f"# {k}: {json.dumps(v, sort_keys=True)}")
    return "\n".join(lines) + "\n"


def _meta_value(v) -> str:
    if isinstance(v, (list, tuple)):
        return ",".join(str(x) for x in v)
    return str(v)


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return _fmt(v)
    return str(v)


def _json_text(payload: dict) -> str:
    return json.dumps(payload, indent=1, sort_keys=False) + "\n"


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _distribution_rows(dist: core.Distribution, all_positions: bool):
    xs = dist.positions
    keep = np.ones(xs.shape, bool) if all_positions else (xs + dist.time) % 2 == 0
    return xs[keep], dist.probs[keep]


# -- commands ----------------------------------------------------------------

def cmd_distribution(cfg: RunConfig) -> str:
    if len(cfg.coins) != 1:
        raise UsageError("distribution takes a single --coins value")
    m, t = cfg.coins[0], cfg.time
    method = cfg.methods[0] if cfg.methods else ("combinatorial" if m == 1 else "factorized")
    _check_method(method, m, t, cfg)
    dist = compute_distribution(method, m, t, cfg)
    meta = cfg.meta() | {"method": method, "positions": "all" if cfg.all_positions else "even-parity"}
    xs, ps = _distribution_rows(dist, cfg.all_positions)
    if cfg.fmt == "json":
        data = {"time": int(t), "x": [int(x) for x in xs], "p": [float(p) for p in ps]}
        return _json_text({"meta": meta, "data": data})
    return _csv_text(meta, ["x", "p"], [(int(x), float(p)) for x, p in zip(xs, ps)])


def _series_for(cfg: RunConfig, m: int, method: str) -> moments.MomentSeries:
    t = cfg.time
    if method == "direct":
        _check_method("direct", m, t, cfg)
        return moments.direct_moment_series(m, t, cfg.start, cfg.schedule)
    if method == "factorized":
        if t % m or (t // m) % 2:
            raise UsageError("factorized moments need --time = coins * s with s even")
        times, mean, second = [0], [0.0], [0.0]
        for s in range(2, t // m + 1, 2):
            m1, m2 = moments.empirical_moments(factorized.multicoin_distribution(m, s, cfg.start))
            times.append(m * s)
            mean.append(m1)
            second.append(m2)
        return moments.MomentSeries.from_moments(times, mean, second)
    raise UsageError(f"moments supports methods direct and factorized, not {method!r}")


def _coeff_dict(c: moments.MomentCoefficients | None):
    if c is None:
        return None
    return {"c1": c.c1, "c2": c.c2, "var_coeff": c.var_coeff}


def _try_fit(series):
    try:
        return moments.fit_coefficients(series)
    except ValueError:
        return None


def cmd_moments(cfg: RunConfig) -> str:
    method = cfg.methods[0] if cfg.methods else "direct"
    blocks = []
    if cfg.reset_every:
        key = "reset_every"
        for d in cfg.reset_every:
            if cfg.time % d:
                raise UsageError(f"--time must be a multiple of --reset-every ({d})")
            series = moments.reset_coin_simulate(d, cfg.time // d, cfg.start)
            fit = _try_fit(series)
            closed = moments.reset_coin_coefficients(d, cfg.start)
            blocks.append((d, series, {"fitted": _coeff_dict(fit), "reset-quadrature": _coeff_dict(closed)}))
    else:
        key = "coins"
        for m in cfg.coins:
            series = _series_for(cfg, m, method)
            fit = _try_fit(series)
            closed = moments.closed_form_multicoin(m) if cfg.start_label == "R" else None
            blocks.append((m, series, {"fitted": _coeff_dict(fit), "closed": _coeff_dict(closed)}))

    meta = cfg.meta()
    if not cfg.reset_every:
        meta["method"] = method
    footer = {str(k): coeffs for k, _, coeffs in blocks}
    if cfg.fmt == "json":
        data = [{key: k} | s.to_dict() for k, s, _ in blocks]
        return _json_text({"meta": meta, "data": data, "footer": footer})
    rows = []
    for k, s, _ in blocks:
        for i in range(len(s.times)):
            rows.append((k, int(s.times[i]), float(s.mean[i]), float(s.second[i]), float(s.variance[i])))
    return _csv_text(meta, [key, "t", "mean", "second", "variance"], rows, {"coefficients": footer})


def cmd_compare(cfg: RunConfig) -> str:
    if len(cfg.coins) != 1:
        raise UsageError("compare takes a single --coins value")
    m, t = cfg.coins[0], cfg.time
    methods = cfg.methods or [
        meth for meth in METHODS if _compatible(meth, m, t, cfg)
    ]
    if len(methods) < 2:
        raise UsageError("compare needs at least two applicable methods")
    for meth in methods:
        _check_method(meth, m, t, cfg)
    dists, timing = {}, {}
    for meth in methods:
        t0 = time.perf_counter()
        dists[meth] = compute_distribution(meth, m, t, cfg)
        timing[meth] = time.perf_counter() - t0
    rows = []
    for i, a in enumerate(methods):
        for b in methods[i + 1 :]:
            rows.append((a, b, dists[a].max_abs_diff(dists[b]), dists[a].l1_diff(dists[b])))
    meta = cfg.meta() | {"method": ",".join(methods)}
    if cfg.fmt == "json":
        data = {
            "pairs": [{"a": a, "b": b, "max_abs": d, "l1": l1} for a, b, d, l1 in rows],
            "seconds": timing,
        }
        return _json_text({"meta": meta, "data": data})
    footer = {"seconds": timing}
    return _csv_text(meta, ["method_a", "method_b", "max_abs", "l1"], rows, footer)


def _compatible(method, m, t, cfg) -> bool:
    try:
        _check_method(method, m, t, cfg)
    except UsageError:
        return False
    return True


def cmd_coefficients(cfg: RunConfig) -> str:
    rows = []
    if cfg.reset_every:
        key = "d"
        if cfg.sources != ["reset-quadrature"]:
            raise UsageError("with --reset-every the only source is reset-quadrature")
        for d in cfg.reset_every:
            c = moments.reset_coin_coefficients(d, cfg.start)
            rows.append((d, c.c1, c.c2, c.var_coeff, "reset-quadrature"))
    else:
        key = "coins"
        sources = cfg.sources
        for src in sources:
            if src not in ("closed", "spectral"):
                raise UsageError(f"source {src!r} needs --reset-every; without it use closed or spectral")
        for m in cfg.coins:
            for src in sources:
                if src == "closed":
                    if cfg.start_label != "R":
                        continue
                    c = moments.closed_form_multicoin(m)
                else:
                    if m > moments.SPECTRAL_CAP:
                        raise UsageError(f"spectral quadrature is capped at {moments.SPECTRAL_CAP} coins")
                    c = moments.spectral_coefficients(m, cfg.start, moments.KQuadrature.gauss_legendre(cfg.nodes))
                rows.append((m, c.c1, c.c2, c.var_coeff, src))
    meta = cfg.meta()
    if cfg.fmt == "json":
        data = [{key: k, "c1": c1, "c2": c2, "var_coeff": v, "source": s} for k, c1, c2, v, s in rows]
        return _json_text({"meta": meta, "data": data})
    return _csv_text(meta, [key, "c1", "c2", "var_coeff", "source"], rows)


COMMANDS = {
    "distribution": cmd_distribution,
    "moments": cmd_moments,
    "compare": cmd_compare,
    "coefficients": cmd_coefficients,
}


# -- readers -----------------------------------------------------------------

def load_distribution_json(path: str) -> core.Distribution:
    """Rebuild a Distribution from a ``distribution --format json`` file."""
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    data = payload["data"]
    t = int(data["time"])
    xs = np.asarray(data["x"], dtype=int)
    lo = min(-t, int(xs.min())) if xs.size else -t
    hi = max(t, int(xs.max())) if xs.size else t
    probs = np.zeros(hi - lo + 1)
    probs[xs - lo] = np.asarray(data["p"], dtype=float)
    return core.Distribution(offset=lo, probs=probs, time=t)


def load_moments_json(path: str) -> dict[int, moments.MomentSeries]:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    out = {}
    for block in payload["data"]:
        key = block.get("coins", block.get("reset_every"))
        out[int(key)] = moments.MomentSeries.from_dict(block)
    return out


# -- entry point -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="multicoin-walk", description="Quantum walks with one or many Hadamard coins.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("distribution", "write p(x) at a fixed time"),
        ("moments", "write moment time series and fitted coefficients"),
        ("compare", "cross-check methods on the same walk"),
        ("coefficients", "tabulate long-time moment coefficients"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--coins", type=parse_range, default=[1], help="M, or a range such as 1..5")
        p.add_argument("--time", type=int, default=0, help="total number of steps T")
        p.add_argument("--method", default=None, help="direct, factorized, combinatorial or asymptotic (comma list for compare)")
        p.add_argument("--schedule", choices=[s.value for s in core.Schedule], default="cyclic")
        p.add_argument("--start", default="R", help="R, L, SYMMETRIC or 'alpha,beta'")
        p.add_argument("--nodes", type=int, default=257, help="Gauss-Legendre nodes for spectral quadrature")
        p.add_argument("--output", "-o", default=None, help="output file (default stdout)")
        p.add_argument("--format", choices=["csv", "json"], default="csv")
        p.add_argument("--seed", type=int, default=None, help="accepted for harness compatibility; all runs are deterministic")
        p.add_argument("--all-positions", action="store_true", help="also emit odd-parity positions (exact zeros)")
        p.add_argument("--reset-every", type=parse_range, default=None, help="reset walk: measure and reset the coin every d steps")
        p.add_argument("--source", default=None, help="coefficients: closed, spectral, reset-quadrature (comma list)")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    try:
        start = parse_start(args.start)
    except argparse.ArgumentTypeError as exc:
        raise UsageError(str(exc)) from None
    if args.time < 0:
        raise UsageError("--time must be non-negative")
    if args.nodes < 1:
        raise UsageError("--nodes must be positive")
    if any(m < 1 for m in args.coins):
        raise UsageError("--coins values must be positive")
    if args.reset_every and any(d < 1 for d in args.reset_every):
        raise UsageError("--reset-every values must be positive")
    methods = [m.strip() for m in args.method.split(",")] if args.method else []
    for meth in methods:
        if meth not in METHODS:
            raise UsageError(f"unknown method {meth!r}; choose from {', '.join(METHODS)}")
    sources = [s.strip() for s in args.source.split(",")] if args.source else []
    if args.command == "coefficients" and not sources:
        sources = ["reset-quadrature"] if args.reset_every else ["closed", "spectral"]
    for s in sources:
        if s not in SOURCES:
            raise UsageError(f"unknown source {s!r}; choose from {', '.join(SOURCES)}")
    return RunConfig(
        command=args.command,
        coins=args.coins,
        time=args.time,
        methods=methods,
        schedule=core.Schedule(args.schedule),
        start=start,
        start_label=args.start.upper() if "," not in args.start else args.start,
        nodes=args.nodes,
        output=args.output,
        fmt=args.format,
        seed=args.seed,
        all_positions=args.all_positions,
        reset_every=args.reset_every,
        sources=sources,
    )


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = config_from_args(args)
        text = COMMANDS[cfg.command](cfg)
        _emit(cfg, text)
    except (UsageError, ResourceLimitError) as exc:
        print(f"multicoin-walk: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"multicoin-walk: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"multicoin-walk: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"multicoin-walk: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
