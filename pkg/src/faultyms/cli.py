"""Command-line front end.

    faultyms {trace,table,bits-sweep,mc,threshold} [--config FILE] [flags]

Settings come from built-in defaults, then the optional TOML config file,
then command-line flags.  Config keys are the long flag names with dashes
replaced by underscores (``max_iters = 200``).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field, fields

from . import __version__
from . import experiments as ex
from .de import DeParams, EnsembleConfig, threshold_search, BracketError
from .quant import MAX_BITS, QuantGrid

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger("faultyms")

COMMANDS = ("trace", "table", "bits-sweep", "mc", "threshold")

COLUMNS = {
    "trace": ["d_v", "d_c", "delta", "sigma2", "iteration", "pe"],
    "table": ["d_v", "d_c", "decoder", "delta", "eta", "sigma2_star", "status"],
    "bits-sweep": ["bits", "mode", "step", "decoder", "delta", "eta", "sigma2_star", "status"],
    "mc": ["iteration", "mc_ber", "mc_stderr", "de_pe", "agree"],
    "threshold": ["d_v", "d_c", "bits", "step", "delta", "eta", "sigma2_star", "status"],
}


@dataclass
class ExperimentConfig:
    command: str
    ensembles: list = field(default_factory=lambda: [(3, 6)])
    bits: int = 5
    step: float = 1.0
    mode: str = "DR"
    deltas: list = field(default_factory=lambda: [0.0, 1e-5])
    alpha: float = 10.0
    eta: float | None = None
    max_iters: int = 200
    sigma2s: list = field(default_factory=lambda: [0.6576])
    sigma2_lo: float = 0.2
    sigma2_hi: float = 1.0
    resolution: float = 5e-4
    bits_range: list = field(default_factory=lambda: list(range(2, 8)))
    n: int = 100_000
    trials: int = 20
    seed: int = 0
    out: str | None = None
    workers: int | None = None
    format: str = "csv"

    def validate(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if not self.alpha > 1:
            raise ValueError(f"alpha must exceed 1, got {self.alpha}")
        for d in self.deltas:
            if not 0.0 <= d <= 0.5:
                raise ValueError(f"delta must lie in [0, 1/2], got {d}")
        for b in [self.bits, *self.bits_range]:
            if not 2 <= b <= MAX_BITS:
                raise ValueError(f"bits must lie in [2, {MAX_BITS}], got {b}")
        for dv, dc in self.ensembles:
            if dv < 2 or dc < 2:
                raise ValueError(f"degrees must be >= 2, got ({dv},{dc})")
        if not self.step > 0:
            raise ValueError("step must be positive")
        if self.mode.upper() not in ("DR", "PR"):
            raise ValueError(f"mode must be DR or PR, got {self.mode!r}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if any(not s > 0 for s in self.sigma2s) or not 0 < self.sigma2_lo < self.sigma2_hi:
            raise ValueError("noise variances must be positive with sigma2_lo < sigma2_hi")
        if self.eta is not None and not 0 < self.eta < 1:
            raise ValueError("eta must lie in (0, 1)")
        if not self.resolution > 0:
            raise ValueError("resolution must be positive")
        if self.n < 1 or self.trials < 1:
            raise ValueError("n and trials must be >= 1")
        if self.command == "mc":
            dv, dc = self.ensembles[0]
            if (self.n * dv) % dc:
                raise ValueError(f"n*d_v = {self.n * dv} is not divisible by d_c = {dc}")
        if self.workers is not None and self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.format not in ("csv", "json"):
            raise ValueError("format must be csv or json")
        if self.command == "threshold" and self.eta is None and self.deltas[0] == 0:
            raise ValueError("a fault-free threshold needs --eta")

    @property
    def effective_step(self) -> float:
        return ex.quant_step(self.mode, self.bits, self.step)

    def params(self) -> dict:
        d = asdict(self)
        d.pop("out")
        d.pop("workers")  # output must not depend on scheduling
        d.pop("format")
        d["ensembles"] = [list(e) for e in self.ensembles]
        return d


# per-command defaults that differ from the dataclass defaults
COMMAND_DEFAULTS = {
    "table": dict(ensembles=list(ex.TABLE_ENSEMBLES), deltas=list(ex.TABLE_DELTAS)),
    "bits-sweep": dict(deltas=[1e-3]),
    "mc": dict(deltas=[1e-4], sigma2s=[0.55], max_iters=10),
    "threshold": dict(deltas=[1e-3]),
}


def _floats(s: str) -> list[float]:
    return [float(v) for v in s.split(",") if v.strip()]


def _ensembles(s: str) -> list[tuple[int, int]]:
    out = []
    for item in s.split(","):
        dv, dc = item.lower().split("x")
        out.append((int(dv), int(dc)))
    return out


def _int_range(s: str) -> list[int]:
    if "-" in s:
        a, b = s.split("-")
        return list(range(int(a), int(b) + 1))
    return [int(v) for v in s.split(",")]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    a = common.add_argument
    a("--config", help="TOML file with settings")
    a("--dv", type=int, help="variable node degree")
    a("--dc", type=int, help="check node degree")
    a("--ensembles", type=_ensembles, help="comma list like 3x6,4x8 (overrides --dv/--dc)")
    a("--bits", type=int, help="message width b")
    a("--step", type=float, help="quantization step (DR mode)")
    a("--mode", choices=["DR", "PR"], help="DR: fixed step, PR: step 2**(3-b)")
    a("--delta", dest="deltas", type=_floats, help="comma list of per-bit read fault rates")
    a("--alpha", type=float, help="target multiplier, eta = alpha*delta")
    a("--eta", type=float, help="absolute target error rate")
    a("--max-iters", type=int)
    a("--sigma2", dest="sigma2s", type=_floats, help="comma list of noise variances")
    a("--sigma2-lo", type=float)
    a("--sigma2-hi", type=float)
    a("--resolution", type=float, help="bisection resolution in sigma2")
    a("--bits-range", type=_int_range, help="e.g. 2-7")
    a("--n", type=int, help="block length for mc")
    a("--trials", type=int)
    a("--seed", type=int)
    a("--out", help="output path (default stdout)")
    a("--workers", type=int, help="process count (default: all cores)")
    a("--format", choices=["csv", "json"])
    a("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="faultyms", description=__doc__.splitlines()[0] if __doc__ else None)
    p.add_argument("--version", action="version", version=f"faultyms {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "trace": "P_e per iteration for each (delta, sigma2)",
        "table": "MS / faulty MS thresholds over ensembles and deltas",
        "bits-sweep": "thresholds versus message width, DR and PR quantization",
        "mc": "Monte Carlo BER per iteration with the DE reference",
        "threshold": "a single threshold search",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return p


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    settings: dict = dict(COMMAND_DEFAULTS.get(args.command, {}))
    if args.config:
        with open(args.config, "rb") as fh:
            doc = tomllib.load(fh)
        for k, v in doc.items():
            k = k.replace("-", "_")
            if k == "delta":
                k, v = "deltas", v if isinstance(v, list) else [v]
            elif k == "sigma2":
                k, v = "sigma2s", v if isinstance(v, list) else [v]
            elif k == "ensembles":
                v = [tuple(e) for e in v]
            settings[k] = v
        if "dv" in doc or "dc" in doc:
            settings["ensembles"] = [(doc.get("dv", 3), doc.get("dc", 6))]
    for f in fields(ExperimentConfig):
        if f.name != "command" and getattr(args, f.name, None) is not None:
            settings[f.name] = getattr(args, f.name)
    if args.ensembles is None and (args.dv is not None or args.dc is not None):
        dv0, dc0 = settings.get("ensembles", [(3, 6)])[0]
        settings["ensembles"] = [(args.dv or dv0, args.dc or dc0)]
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(settings) - known - {"dv", "dc"}
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    settings = {k: v for k, v in settings.items() if k in known}
    cfg = ExperimentConfig(command=args.command, **settings)
    cfg.validate()
    return cfg


def run(cfg: ExperimentConfig) -> list[dict]:
    e0 = cfg.ensembles[0]
    if cfg.command == "trace":
        return ex.trace_rows(e0, cfg.deltas, cfg.sigma2s, cfg.bits, cfg.effective_step, cfg.max_iters, cfg.workers)
    if cfg.command == "table":
        return ex.table_rows(cfg.ensembles, cfg.deltas, cfg.bits, cfg.effective_step, cfg.alpha, cfg.max_iters,
                             cfg.sigma2_lo, cfg.sigma2_hi, cfg.resolution, cfg.workers)
    if cfg.command == "bits-sweep":
        return ex.bits_rows(e0, cfg.bits_range, cfg.deltas[0], cfg.alpha, cfg.step, cfg.max_iters,
                            cfg.sigma2_lo, cfg.sigma2_hi, cfg.resolution, cfg.workers)
    if cfg.command == "mc":
        return ex.mc_rows(e0, cfg.n, cfg.sigma2s[0], cfg.bits, cfg.effective_step, cfg.deltas[0], cfg.max_iters,
                          cfg.trials, cfg.seed, cfg.workers)
    # threshold
    delta = cfg.deltas[0]
    params = DeParams(QuantGrid(cfg.bits, cfg.effective_step), delta=delta, max_iters=cfg.max_iters,
                      alpha=cfg.alpha, eta=cfg.eta)
    try:
        s, status = threshold_search(EnsembleConfig(*e0), params, cfg.sigma2_lo, cfg.sigma2_hi, cfg.resolution), "ok"
    except BracketError as exc:
        s, status = None, f"{type(exc).__name__}: {exc}"
    return [dict(d_v=e0[0], d_c=e0[1], bits=cfg.bits, step=params.grid.step, delta=delta,
                 eta=params.target, sigma2_star=s, status=status)]


def _cell(key: str, v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if key == "sigma2_star":
            return f"{v:.4f}"
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def render(cfg: ExperimentConfig, rows: list[dict]) -> str:
    cols = COLUMNS[cfg.command]
    meta = {"artifact": "faultyms", "version": __version__, "params": cfg.params()}
    if cfg.format == "json":
        body = [{k: (None if isinstance(r[k], float) and math.isnan(r[k]) else r[k]) for k in cols} for r in rows]
        return json.dumps({"meta": meta, "columns": cols, "rows": body}, indent=1) + "\n"
    buf = io.StringIO()
    buf.write("# " + json.dumps(meta, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_cell(k, r[k]) for k in cols])
    return buf.getvalue()


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args)
    except (ValueError, OSError, tomllib.TOMLDecodeError) as exc:
        parser.error(str(exc))
    rows = run(cfg)
    text = render(cfg, rows)
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    bad = [r for r in rows if r.get("status", "ok") != "ok"]
    for r in bad:
        log.warning("cell failed: %s", r["status"])
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
