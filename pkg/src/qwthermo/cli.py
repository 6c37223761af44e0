"""
Entanglement temperature of coined quantum walks, from the command line.

Every command writes CSV: a block of ``#`` lines holding the fully resolved
configuration, one header row, then data rows. Floats are written with
``repr`` so they round-trip exactly; ``inf``, ``-inf`` and ``nan`` are the
only non-numeric tokens. Angles are in radians, entropies in nats.

Exit codes: 0 success, 1 validation failure, 2 invalid configuration,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__
from . import asymptotics as asy
from .coin import CoinMatrix
from .errors import InvalidInputError, NumericalError
from .grover import bloch_isotherm_map, diabolical_lambdas_x, grover_coin, is_grover_half
from .initial import BlochPoint, NonSeparableIC, SeparableGaussianIC, delta_limit_lambdas, gaussian_position_amplitudes, resolve_ordering
from .lattice import reduced_density, trajectory
from .thermo import entropy, temperature, thermo_report

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3

_PI_RE = re.compile(r"^([+-]?(?:\d+(?:\.\d*)?|\.\d+)?)\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d*)?))?$")


def parse_float(text: str) -> float:
    """Float, ``inf``, or a multiple of pi such as ``pi/2``, ``3pi/4``, ``-0.5*pi``."""
    s = str(text).strip().lower()
    try:
        v = float(s)
    except ValueError:
        m = _PI_RE.match(s)
        den = float(m.group(2)) if m and m.group(2) else 1.0
        if not m or den == 0.0:
            raise InvalidInputError(f"cannot parse number {text!r}") from None
        coef = m.group(1)
        v = (-1.0 if coef == "-" else 1.0 if coef in ("", "+") else float(coef)) * math.pi / den
    if math.isnan(v):
        raise InvalidInputError(f"cannot parse number {text!r}")
    return v


def parse_int(text: str) -> int:
    try:
        return int(str(text).strip())
    except ValueError:
        raise InvalidInputError(f"cannot parse integer {text!r}") from None


def parse_vector(text: str) -> tuple[float, ...]:
    parts = [p for p in str(text).replace(" ", "").split(",") if p]
    if not parts:
        raise InvalidInputError("empty vector")
    return tuple(parse_float(p) for p in parts)


def _optional_int(text: str) -> int | None:
    return None if str(text).strip().lower() in ("", "none", "auto") else parse_int(text)


@dataclass
class RunConfig:
    coin: str = "grover"
    p: float = 0.5
    family: str = "gaussian"
    gamma: float = 0.0
    phi: float = 0.0
    theta: float = math.pi
    sigma: float = 6.0
    k0: tuple[float, ...] = (0.0, 0.0)
    grid_m: int = 256
    t_max: int = 400
    t_burn: int | None = None
    samples: int = 201
    n_gamma: int = 90
    n_phi: int = 180
    seed: int = 0
    workers: int = 1
    out: str = "-"


_PARSERS: dict[str, Callable[[str], Any]] = {
    "coin": str,
    "p": parse_float,
    "family": str,
    "gamma": parse_float,
    "phi": parse_float,
    "theta": parse_float,
    "sigma": parse_float,
    "k0": parse_vector,
    "grid_m": parse_int,
    "t_max": parse_int,
    "t_burn": _optional_int,
    "samples": parse_int,
    "n_gamma": parse_int,
    "n_phi": parse_int,
    "seed": parse_int,
    "workers": parse_int,
    "out": str,
}
# excluded from the provenance header so output does not depend on them
_NOT_IN_HEADER = ("workers", "out")


def read_config_file(path: str | Path) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment; dashes in keys become underscores."""
    out: dict[str, str] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidInputError(f"cannot read config file {path}: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidInputError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _PARSERS:
            raise InvalidInputError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def resolve_config(file_values: dict[str, str], flag_values: dict[str, str | None]) -> RunConfig:
    """Defaults, then config-file entries, then flags."""
    cfg = RunConfig()
    merged = dict(file_values)
    merged.update({k: v for k, v in flag_values.items() if v is not None})
    for key, raw in merged.items():
        setattr(cfg, key, _PARSERS[key](raw))
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    if cfg.family not in ("gaussian", "delta", "I", "II"):
        raise InvalidInputError(f"family must be gaussian, delta, I or II, got {cfg.family!r}")
    if not 0.0 <= cfg.p <= 1.0:
        raise InvalidInputError("p must lie in [0, 1]")
    if not 0.0 <= cfg.gamma <= math.pi:
        raise InvalidInputError("gamma must lie in [0, pi]")
    if not 0.0 <= cfg.phi < 2 * math.pi:
        raise InvalidInputError("phi must lie in [0, 2 pi)")
    if not 0.0 <= cfg.theta < 2 * math.pi:
        raise InvalidInputError("theta must lie in [0, 2 pi)")
    if not cfg.sigma > 0:
        raise InvalidInputError("sigma must be positive")
    if cfg.grid_m <= 0 or cfg.grid_m % 4:
        raise InvalidInputError("grid-m must be a positive multiple of 4")
    if cfg.t_max < 1:
        raise InvalidInputError("t-max must be at least 1")
    if cfg.t_burn is not None and not 0 <= cfg.t_burn < cfg.t_max:
        raise InvalidInputError("need 0 <= t-burn < t-max")
    if cfg.samples < 2:
        raise InvalidInputError("samples must be at least 2")
    if cfg.workers < 1:
        raise InvalidInputError("workers must be at least 1")


def build_coin(cfg: RunConfig) -> CoinMatrix:
    if cfg.coin == "grover":
        return grover_coin(cfg.p)
    try:
        entries = np.loadtxt(cfg.coin, dtype=np.complex128, ndmin=2)
    except (OSError, ValueError) as exc:
        raise InvalidInputError(f"cannot load coin matrix {cfg.coin}: {exc}") from None
    return CoinMatrix(entries, label=Path(cfg.coin).name)


def _bloch(cfg: RunConfig) -> BlochPoint:
    return BlochPoint(cfg.gamma, cfg.phi)


def _t_burn(cfg: RunConfig) -> int:
    return cfg.t_max // 4 if cfg.t_burn is None else cfg.t_burn


def _fmt(v: Any) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, tuple):
        return ",".join(_fmt(c) for c in v)
    return str(v)


def _cell(v: Any) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


class CsvOut:
    def __init__(self, command: str, cfg: RunConfig, extra: dict[str, Any] | None = None):
        self.buf = io.StringIO()
        self.buf.write(f"# qwthermo {__version__} {command}\n")
        for f in fields(cfg):
            if f.name not in _NOT_IN_HEADER:
                self.buf.write(f"# {f.name} = {_fmt(getattr(cfg, f.name))}\n")
        for k, v in (extra or {}).items():
            self.buf.write(f"# {k} = {_fmt(v)}\n")
        self.writer = csv.writer(self.buf, lineterminator="\n")

    def header(self, cols: Sequence[str]) -> None:
        self.writer.writerow(cols)

    def row(self, values: Sequence[Any]) -> None:
        self.writer.writerow([_cell(v) for v in values])

    def text(self) -> str:
        return self.buf.getvalue()


def cmd_sweep_x(cfg: RunConfig) -> CsvOut:
    out = CsvOut("sweep-x", cfg)
    out.header(["x", "lambda_1", "lambda_2", "lambda_3", "lambda_4", "T"])
    xs = np.linspace(-1.0, 1.0, cfg.samples)
    lam = diabolical_lambdas_x(xs, cfg.theta)
    for x, row in zip(xs, lam):
        out.row([x, *row, temperature(row)])
    return out


def cmd_bloch_map(cfg: RunConfig) -> CsvOut:
    out = CsvOut("bloch-map", cfg)
    out.header(["gamma", "phi", "x", "T"])
    cols = bloch_isotherm_map(cfg.n_gamma, cfg.n_phi, cfg.theta)
    for row in zip(cols["gamma"], cols["phi"], cols["x"], cols["T"]):
        out.row(row)
    return out


def _ordered_map(fn: Callable[[Any], Any], items: Sequence[Any], workers: int) -> list[Any]:
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def cmd_sweep_gamma(cfg: RunConfig) -> CsvOut:
    coin = build_coin(cfg)
    if not is_grover_half(coin):
        raise InvalidInputError("sweep-gamma needs the p = 1/2 Grover coin")
    grid = asy.QuadratureGrid(cfg.grid_m, 2)
    field = asy.spectral_field(coin, grid, "grover", workers=cfg.workers)
    gammas = np.linspace(0.0, math.pi, cfg.samples)
    res = _ordered_map(lambda g: asy.nonseparable_I_temperature(float(g), coin, grid, field), gammas, cfg.workers)
    out = CsvOut("sweep-gamma", cfg, {"ordering": "grover"})
    out.header(["gamma", "T_printed", "T_oracle", "abs_diff"])
    for r in res:
        diff = 0.0 if r.printed == r.oracle else abs(r.printed - r.oracle)
        out.row([r.gamma, r.printed, r.oracle, diff])
    return out


def _quadrature_lambdas(cfg: RunConfig, coin: CoinMatrix, ic: Any) -> np.ndarray:
    grid = asy.QuadratureGrid(cfg.grid_m, coin.dim_n)
    field = asy.spectral_field(coin, grid, "auto", workers=cfg.workers)
    return asy.lambda_spectrum(asy.asymptotic_density(ic, coin, grid, field=field)).values


def _gaussian_ic(cfg: RunConfig, coin: CoinMatrix) -> SeparableGaussianIC:
    if len(cfg.k0) != coin.dim_n:
        raise InvalidInputError(f"k0 needs {coin.dim_n} components for this coin")
    return SeparableGaussianIC(cfg.sigma, cfg.k0, _bloch(cfg))


def cmd_thermo(cfg: RunConfig) -> CsvOut:
    coin = build_coin(cfg)
    ordering = resolve_ordering(coin)
    if cfg.family in ("I", "II"):
        lam = _quadrature_lambdas(cfg, coin, NonSeparableIC(cfg.family, _bloch(cfg)))
        method = "quadrature"
    else:
        ic = _gaussian_ic(cfg, coin)
        if cfg.family == "delta" or ic.is_delta_limit:
            theta = cfg.theta if ordering == "grover" else None
            lam, _ = delta_limit_lambdas(coin, ic.k0, ic.bloch, theta=theta)
            method = "delta-limit"
        else:
            lam = _quadrature_lambdas(cfg, coin, ic)
            method = "quadrature"
    rep = thermo_report(lam)
    out = CsvOut("thermo", cfg, {"ordering": ordering, "method": method})
    out.header(rep.csv_header())
    out.row(rep.csv_values())
    return out


def cmd_simulate(cfg: RunConfig) -> CsvOut:
    coin = build_coin(cfg)
    if cfg.family != "gaussian":
        raise InvalidInputError("simulate needs a finite-width gaussian initial condition")
    ic = _gaussian_ic(cfg, coin)
    if ic.is_delta_limit:
        raise InvalidInputError("simulate needs a finite sigma")
    t_burn = _t_burn(cfg)
    grid = asy.QuadratureGrid(cfg.grid_m, coin.dim_n)
    field = asy.spectral_field(coin, grid, "auto", workers=cfg.workers)
    rho_hat = asy.asymptotic_density(ic, coin, grid, field=field)
    out = CsvOut("simulate", cfg, {"ordering": field.ordering, "t_burn_resolved": t_burn})
    out.header(["t", "S", "distance"])
    acc = np.zeros_like(rho_hat)
    for t, st in trajectory(gaussian_position_amplitudes(ic), coin, cfg.t_max):
        rho = reduced_density(st)
        lam = np.clip(np.linalg.eigvalsh(rho), 0.0, None)
        dist = math.nan
        if t > t_burn:
            acc += rho
            dist = float(np.abs(acc / (t - t_burn) - rho_hat).max())
        out.row([t, entropy(lam), dist])
    return out


def cmd_validate(cfg: RunConfig) -> tuple[CsvOut, bool]:
    from .validate import run_all

    results = run_all(cfg.seed)
    out = CsvOut("validate", cfg)
    out.header(["check", "status", "measured", "tolerance"])
    for r in results:
        out.row([r.name, "PASS" if r.passed else "FAIL", r.measured, r.tolerance])
    return out, all(r.passed for r in results)


COMMANDS = {
    "sweep-x": ("diabolical-point spectrum and temperature versus x = sin(gamma) cos(phi)", cmd_sweep_x),
    "bloch-map": ("temperature over a (gamma, phi) grid of the Bloch sphere", cmd_bloch_map),
    "sweep-gamma": ("family-I temperature versus gamma: closed formula and quadrature", cmd_sweep_gamma),
    "thermo": ("one thermodynamic report for a coin and initial condition", cmd_thermo),
    "simulate": ("lattice time series of S(t) and distance to the asymptotic density", cmd_simulate),
    "validate": ("run the randomized invariant checks", cmd_validate),
}

_FLAGS: list[tuple[str, str]] = [
    ("--coin", "'grover' or path to a 2N x 2N complex text matrix"),
    ("--p", "Grover family parameter in [0, 1]"),
    ("--family", "initial condition: gaussian, delta, I or II"),
    ("--gamma", "Bloch polar angle in [0, pi] (radians; 'pi/2' style accepted)"),
    ("--phi", "Bloch azimuth in [0, 2 pi) (radians)"),
    ("--theta", "approach angle to k = 0 in [0, 2 pi) (radians)"),
    ("--sigma", "packet width; 'inf' selects the delta limit"),
    ("--k0", "central momentum, comma separated, components in (-pi, pi)"),
    ("--grid-m", "quadrature nodes per axis, positive multiple of 4"),
    ("--t-max", "number of lattice steps"),
    ("--t-burn", "steps discarded before time averaging (default t-max/4)"),
    ("--samples", "number of sweep samples"),
    ("--n-gamma", "Bloch-map intervals in gamma"),
    ("--n-phi", "Bloch-map samples in phi"),
    ("--seed", "seed of the randomized checks"),
    ("--workers", "worker threads; never changes the output"),
    ("--out", "output file, '-' for stdout"),
]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qwthermo", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, (helptext, _) in COMMANDS.items():
        sp = sub.add_parser(name, help=helptext, description=helptext)
        sp.add_argument("--config", help="key=value file; flags override its entries")
        for flag, h in _FLAGS:
            sp.add_argument(flag, dest=flag[2:].replace("-", "_"), default=None, help=h)
    return parser


def _emit(text: str, dest: str) -> None:
    if dest == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        Path(dest).write_text(text)
    except OSError as exc:
        raise InvalidInputError(f"cannot write {dest}: {exc}") from None


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    flags = {k: getattr(args, k) for k in _PARSERS}
    try:
        file_values = read_config_file(args.config) if args.config else {}
        cfg = resolve_config(file_values, flags)
        fn = COMMANDS[args.command][1]
        status = EXIT_OK
        if args.command == "validate":
            out, ok = fn(cfg)
            status = EXIT_OK if ok else EXIT_VALIDATION
        else:
            out = fn(cfg)
        _emit(out.text(), cfg.out)
        return status
    except InvalidInputError as exc:
        print(f"qwthermo: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"qwthermo: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
