"""Command-line harness: ``orlicz-greedy <subcommand> [options]``."""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from pathlib import Path

from .besov import besov_identification_check
from .democracy import GENERATORS, brick_expansion, democracy_probe, extremal_tau
from .greedy import RankedExpansion, approx_space_norm, dyadic_range, greedy_error_curve, sigma_N_oracle
from .orlicz_norms import luxemburg_norm
from .seq_lorentz import embedding_check, optimality_witness
from .wavelets import analyze, make_function
from .weights import DyadicGrid, parse_weight, read_grid_file
from .young import parse_young

__all__ = ["ConfigError", "load_config", "main"]


class ConfigError(ValueError):
    """Malformed configuration file or option value."""


def _gens(text):
    gens = tuple(g.strip() for g in str(text).split(",") if g.strip())
    bad = [g for g in gens if g not in GENERATORS]
    if bad or not gens:
        raise ValueError(f"generators must be drawn from {','.join(GENERATORS)}")
    return gens


def _q(text):
    return math.inf if str(text).strip().lower() in ("inf", "infinity") else float(text)


# key -> converter; every key may appear in a config file or as --key
SCHEMA = {
    "d": int,
    "J": int,
    "M": int,
    "function": str,
    "weight": str,
    "young": str,
    "family": str,
    "seed": int,
    "N": int,
    "Nmax": int,
    "alpha": float,
    "q": _q,
    "sigma_mode": str,
    "trials": int,
    "generators": _gens,
    "gamma": float,
    "p": float,
    "mode": str,
    "out": str,
    "plotscript": str,
}

DEFAULTS = {
    "d": 1,
    "J": 8,
    "M": 0,
    "function": "example",
    "weight": "const",
    "young": "power:p=2",
    "family": "haar",
    "seed": 0,
    "N": 8,
    "Nmax": 64,
    "alpha": 0.5,
    "q": 1.0,
    "sigma_mode": "support",
    "trials": 20,
    "generators": GENERATORS,
    "gamma": 0.25,
    "p": 2.0,
    "mode": "witness",
    "out": None,
    "plotscript": None,
}


def _unquote(v):
    if len(v) >= 2 and v[0] == v[-1] and v[0] in "\"'":
        return v[1:-1]
    return v


def _strip_comment(line):
    quote = None
    for i, ch in enumerate(line):
        if quote:
            if ch == quote:
                quote = None
        elif ch in "\"'":
            quote = ch
        elif ch == "#":
            return line[:i]
    return line


def load_config(path) -> dict:
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc}") from exc
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        if key not in SCHEMA:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        value = _unquote(value.strip())
        try:
            out[key] = SCHEMA[key](value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from exc
    return out


def _resolve(args) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        cfg.update(load_config(args.config))
    for key in SCHEMA:
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    return cfg


def _grid_for(cfg):
    """Function files carry their own grid; generators use d, J, M."""
    spec = cfg["function"].strip()
    kind, _, rest = spec.partition(":")
    if kind == "file":
        return read_grid_file(rest)[0]
    if kind == "example":
        from importlib.resources import files

        return read_grid_file(files("orlicz_greedy").joinpath("data/example.grid"))[0]
    return DyadicGrid(cfg["d"], cfg["J"], cfg["M"])


def _setup(cfg):
    grid = _grid_for(cfg)
    W = parse_weight(cfg["weight"], grid)
    F = parse_young(cfg["young"])
    return grid, W, F


def fmt(v):
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def _emit(cfg, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(x) for x in r])
    if cfg["out"]:
        Path(cfg["out"]).write_text(buf.getvalue(), encoding="utf-8", newline="")
    else:
        sys.stdout.write(buf.getvalue())
    if cfg["plotscript"]:
        if not cfg["out"]:
            raise ConfigError("--plotscript needs --out so the script has a CSV to read")
        Path(cfg["plotscript"]).write_text(PLOT_TEMPLATE.format(csv=str(Path(cfg["out"]).resolve()), png=str(Path(cfg["out"]).with_suffix(".png").resolve())), encoding="utf-8")


PLOT_TEMPLATE = '''"""Plot every numeric column of {csv} against the first column."""
import csv

import matplotlib.pyplot as plt

with open({csv!r}, newline="") as fh:
    rows = list(csv.reader(fh))
header, data = rows[0], rows[1:]


def num(s):
    try:
        return float(s)
    except ValueError:
        return None


x = [num(r[0]) for r in data]
fig, ax = plt.subplots()
for j in range(1, len(header)):
    y = [num(r[j]) for r in data]
    if all(v is not None for v in y):
        ax.plot(x, y, "o-", label=header[j])
ax.set_xlabel(header[0])
ax.set_xscale("log")
ax.set_yscale("log")
ax.legend()
fig.savefig({png!r})
'''


# ---- subcommands --------------------------------------------------------------


def cmd_norm(cfg):
    grid, W, F = _setup(cfg)
    f = make_function(cfg["function"], grid)
    value = luxemburg_norm(f, W, F)
    if cfg["out"] or cfg["plotscript"]:
        _emit(cfg, ["norm"], [[value]])
    else:
        print(fmt(value))


def cmd_greedy(cfg):
    grid, W, F = _setup(cfg)
    E = analyze(make_function(cfg["function"], grid), cfg["family"])
    R = RankedExpansion(E, W, F)
    Ns = list(range(0, cfg["N"] + 1))
    errs = greedy_error_curve(R, Ns)
    mode = cfg["sigma_mode"]
    if mode not in ("support", "exhaustive"):
        raise ConfigError(f"sigma_mode must be 'support' or 'exhaustive', got {mode!r}")
    header = ["N", "greedy_error", "sigma_support"]
    if mode == "exhaustive":
        header.append("sigma_exhaustive")
    header.append("ratio")
    rows = []
    for n, e in zip(Ns, errs):
        sup = sigma_N_oracle(E, n, W, F, "support")
        row = [n, float(e), float(sup)]
        best = sup
        if mode == "exhaustive":
            best = sigma_N_oracle(E, n, W, F, "exhaustive")
            row.append(float(best))
        row.append(float(e / best) if best > 0 else (1.0 if e == 0 else math.inf))
        rows.append(row)
    _emit(cfg, header, rows)
    approx = approx_space_norm(E, cfg["alpha"], cfg["q"], W, F, sigma_mode="greedy")
    print(f"approximation norm (alpha={cfg['alpha']:g}, q={cfg['q']:g}, greedy sigma): {approx:.17g}", file=sys.stderr)


def cmd_democracy(cfg):
    grid = DyadicGrid(cfg["d"], cfg["J"], cfg["M"])
    W = parse_weight(cfg["weight"], grid)
    F = parse_young(cfg["young"])
    rows = democracy_probe(W, F, dyadic_range(cfg["Nmax"]), cfg["trials"], cfg["seed"], cfg["generators"])
    _emit(
        cfg,
        ["N", "gen", "norm", "surrogate", "h_minus", "h_plus"],
        [[r.N, r.gen, r.norm, r.surrogate, r.h_minus, r.h_plus] for r in rows],
    )


def cmd_embeddings(cfg):
    alpha, q = cfg["alpha"], cfg["q"]
    if cfg["mode"] == "function":
        grid, W, F = _setup(cfg)
        E = analyze(make_function(cfg["function"], grid), cfg["family"])
        rep = embedding_check(E, alpha, q, W, F, sigma_mode=cfg["sigma_mode"])
        _emit(cfg, ["left", "middle", "right"], [[rep.left, rep.middle, rep.right]])
        return
    if cfg["mode"] != "witness":
        raise ConfigError(f"mode must be 'witness' or 'function', got {cfg['mode']!r}")
    grid = DyadicGrid(cfg["d"], cfg["J"], cfg["M"])
    W = parse_weight(cfg["weight"], grid)
    F = parse_young(cfg["young"])
    rows = []
    for N in dyadic_range(cfg["Nmax"]):
        wit = optimality_witness(W, F, alpha, q, N, seed=cfg["seed"], sigma_mode="greedy")
        _, cubes = extremal_tau(W, F, N, "sup", count=2 * N)
        rep = embedding_check(brick_expansion([(Q, 1) for Q in cubes], W, F), alpha, q, W, F, sigma_mode="greedy")
        rows.append(
            [N, wit.tau, rep.left, rep.middle, rep.right, wit.eta_lower, wit.eta_upper, wit.h_minus, wit.h_plus]
        )
    _emit(cfg, ["N", "tau", "left", "middle", "right", "eta_lower", "eta_upper", "h_minus", "h_plus"], rows)


def cmd_besov(cfg):
    grid, W, _ = _setup(cfg)
    E = analyze(make_function(cfg["function"], grid), cfg["family"])
    rep = besov_identification_check(E, cfg["gamma"], cfg["p"], W)
    r = rep.ratios
    _emit(
        cfg,
        ["tau", "norm_a", "norm_b", "norm_c", "ratio_b_a", "ratio_c_a", "ratio_c_b"],
        [[rep.tau, rep.norm_a, rep.norm_b, rep.norm_c, r["b/a"], r["c/a"], r["c/b"]]],
    )


SELFTEST_HEADER = ["criterion", "passed", "metric", "value"]


def selftest_rows(checks):
    return [[ch.criterion, int(ch.passed), k, float(ch.metrics[k])] for ch in checks for k in sorted(ch.metrics)]


def write_selftest_csv(checks, path):
    _emit({"out": str(path), "plotscript": None}, SELFTEST_HEADER, selftest_rows(checks))


def cmd_selftest(cfg, only=None):
    from .acceptance import run_all

    checks = run_all(only)
    for ch in checks:
        print(ch.line(), file=sys.stderr)
    _emit(cfg, SELFTEST_HEADER, selftest_rows(checks))
    if not all(ch.passed for ch in checks):
        raise RuntimeError("acceptance criteria failed: " + ",".join(str(c.criterion) for c in checks if not c.passed))


# ---- parser -------------------------------------------------------------------


def _add_common(p):
    p.add_argument("--config", help="flat key = value file; flags override it")
    p.add_argument("--d", type=int)
    p.add_argument("--J", type=int)
    p.add_argument("--M", type=int)
    p.add_argument("--function", help="example | bump | sawtooth | random:seed=S | file:PATH")
    p.add_argument("--weight", help="const | power:gamma=G,center=C | file:PATH")
    p.add_argument("--young", help="power:p=P | zygmund:p=P,a=A | table:PATH")
    p.add_argument("--family", help="haar | daubechies:N")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="CSV destination (default: stdout)")
    p.add_argument("--plotscript", help="also write a plotting script for the CSV")


def build_parser():
    parser = argparse.ArgumentParser(prog="orlicz-greedy", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("norm", help="Luxemburg norm of a grid function")
    _add_common(p)

    p = sub.add_parser("greedy", help="greedy error against sigma_N oracles")
    _add_common(p)
    p.add_argument("--N", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--q", type=_q)
    p.add_argument("--sigma-mode", dest="sigma_mode", choices=["exhaustive", "support"])

    p = sub.add_parser("democracy", help="brick norms of generated cube families")
    _add_common(p)
    p.add_argument("--Nmax", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--generators", type=_gens)

    p = sub.add_parser("embeddings", help="Lorentz embedding chain and optimality witnesses")
    _add_common(p)
    p.add_argument("--mode", choices=["witness", "function"])
    p.add_argument("--Nmax", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--q", type=_q)
    p.add_argument("--sigma-mode", dest="sigma_mode", choices=["greedy", "support"])

    p = sub.add_parser("besov", help="three norms of the Besov identification")
    _add_common(p)
    p.add_argument("--gamma", type=float)
    p.add_argument("--p", type=float)

    p = sub.add_parser("selftest", help="run the acceptance suite")
    _add_common(p)
    p.add_argument("--only", type=lambda s: {int(x) for x in s.split(",")}, help="comma-separated criterion numbers")
    return parser


COMMANDS = {
    "norm": cmd_norm,
    "greedy": cmd_greedy,
    "democracy": cmd_democracy,
    "embeddings": cmd_embeddings,
    "besov": cmd_besov,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _resolve(args)
        if args.command == "selftest":
            cmd_selftest(cfg, args.only)
        else:
            COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"orlicz-greedy: config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # surface module errors with context and a nonzero status
        print(f"orlicz-greedy {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
