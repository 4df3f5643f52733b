"""Config-driven drivers: parse, run, serialize, chart.

Config format: flat ``key = value`` lines with dotted section prefixes
(diff-friendly for regression baselines).  ``#`` starts a comment; blank
lines are ignored; later assignments win.  ``experiment`` is the one
required key; every other key has a documented default.  Validation
reports every problem at once, not just the first.

Artifacts are written into the output directory with the short config
hash in each filename, so reruns of an identical config overwrite their
own outputs byte-for-byte (nothing here embeds timestamps).  JSON
reports use sorted keys; CSV is comma-separated with '.' decimals, one
header row, LF endings; SVG charts are single self-contained files.

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 guard
violation (a state left the region where the dynamics is trusted).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from dataclasses import dataclass, fields

import numpy as np

from .core import (
    GuardError,
    ManifoldState,
    Params,
    Remainder,
    SphereQuadrature,
    VelocityGrid,
    compose,
    integrate_velocity,
    remainder_norm,
    sphere_design_32,
    zero_remainder,
)
from .experiments import (
    study_convergence,
    study_equilibrium,
    study_moment_bounds,
    study_relaxation,
)
from .full_solver import run_full, trajectory_csv
from .limit_solver import limit_csv, run_limit
from .manifold import neighborhood_radius

__all__ = [
    "ConfigError",
    "RunConfig",
    "parse_config",
    "serialize_config",
    "config_hash",
    "run",
    "main",
]

_KINDS = ("relaxation", "convergence", "equilibrium", "moments", "run")
_PRESETS = ("maxwellian", "bimodal")


class ConfigError(ValueError):
    """Carries the full list of validation problems for one config."""

    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = list(errors)


@dataclass(frozen=True)
class RunConfig:
    """One validated experiment configuration (all fields concrete)."""

    experiment: str
    out: str
    seed: int
    threads: int
    eps0: float
    c0_kernel: float
    a0: float
    b0: float
    eps_scale: float
    tol_newton: float
    tol_conservation: float
    grid_n: int
    grid_half_width: float
    initial_preset: str
    initial_amplitude: float
    initial_width: float
    initial_ux: float
    initial_uy: float
    initial_uz: float
    initial_separation: float
    initial_floor_amplitude: float
    initial_floor_width: float
    initial_lam: float
    remainder_amplitude: float
    remainder_width: float
    remainder_radius_fraction: float
    relaxation_a: float
    relaxation_c0: float
    relaxation_tau_end: float
    convergence_eps: tuple
    convergence_t_start: float
    convergence_t_end: float
    convergence_record_delta: float
    equilibrium_cutoff_n: float | None
    equilibrium_t_end: float
    equilibrium_dt: float
    equilibrium_stall_tol: float
    moments_n: tuple
    moments_t_end: float
    moments_dt: float
    run_system: str
    run_t_end: float
    run_dt: float
    run_scaled: bool
    run_cutoff_n: float | None
    run_record_every: int


def _parse_float(text: str):
    return float(text)


def _parse_int(text: str):
    value = int(text, 10)
    return value


def _parse_bool(text: str):
    low = text.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_cutoff(text: str):
    if text.strip().lower() == "uncut":
        return None
    return float(text)


def _parse_float_list(text: str):
    items = [piece.strip() for piece in text.split(",") if piece.strip()]
    return tuple(float(piece) for piece in items)


def _parse_cutoff_list(text: str):
    items = [piece.strip() for piece in text.split(",") if piece.strip()]
    return tuple(_parse_cutoff(piece) for piece in items)


def _fmt(value) -> str:
    if value is None:
        return "uncut"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(_fmt(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


# key -> (config field, parser, default, range check or None, range text)
_KEY_TABLE = {
    "experiment": ("experiment", str, None, lambda v: v in _KINDS, f"one of {_KINDS}"),
    "out": ("out", str, "runs", None, ""),
    "seed": ("seed", _parse_int, 0, lambda v: v >= 0, ">= 0"),
    "threads": ("threads", _parse_int, 1, lambda v: v >= 1, ">= 1"),
    "params.eps0": ("eps0", _parse_float, 0.5, lambda v: v > 0, "> 0"),
    "params.c0_kernel": ("c0_kernel", _parse_float, 1.0, lambda v: v > 0, "> 0"),
    "params.a0": ("a0", _parse_float, 1.0, lambda v: v >= 0, ">= 0"),
    "params.b0": ("b0", _parse_float, 1.0, lambda v: v >= 0, ">= 0"),
    "params.eps_scale": ("eps_scale", _parse_float, 1e-2, lambda v: v > 0, "> 0"),
    "params.tol_newton": ("tol_newton", _parse_float, 1e-12, lambda v: v > 0, "> 0"),
    "params.tol_conservation": (
        "tol_conservation",
        _parse_float,
        1e-9,
        lambda v: v > 0,
        "> 0",
    ),
    "grid.n": ("grid_n", _parse_int, 16, lambda v: v >= 2, ">= 2"),
    "grid.half_width": (
        "grid_half_width",
        _parse_float,
        3.5,
        lambda v: v > 0,
        "> 0",
    ),
    "initial.preset": (
        "initial_preset",
        str,
        "maxwellian",
        lambda v: v in _PRESETS,
        f"one of {_PRESETS}",
    ),
    "initial.amplitude": (
        "initial_amplitude",
        _parse_float,
        1.0,
        lambda v: v > 0,
        "> 0",
    ),
    "initial.width": ("initial_width", _parse_float, 6.0, lambda v: v > 0, "> 0"),
    "initial.ux": ("initial_ux", _parse_float, 0.0, None, ""),
    "initial.uy": ("initial_uy", _parse_float, 0.0, None, ""),
    "initial.uz": ("initial_uz", _parse_float, 0.0, None, ""),
    "initial.separation": (
        "initial_separation",
        _parse_float,
        0.8,
        lambda v: v >= 0,
        ">= 0",
    ),
    "initial.floor_amplitude": (
        "initial_floor_amplitude",
        _parse_float,
        0.0,
        lambda v: v >= 0,
        ">= 0",
    ),
    "initial.floor_width": (
        "initial_floor_width",
        _parse_float,
        0.15,
        lambda v: v > 0,
        "> 0",
    ),
    "initial.lam": (
        "initial_lam",
        _parse_float,
        0.03,
        lambda v: 0.0 <= v < 1.0,
        "in [0, 1)",
    ),
    "remainder.amplitude": (
        "remainder_amplitude",
        _parse_float,
        0.0,
        lambda v: v >= 0,
        ">= 0",
    ),
    "remainder.width": (
        "remainder_width",
        _parse_float,
        2.0,
        lambda v: v > 0,
        "> 0",
    ),
    "remainder.radius_fraction": (
        "remainder_radius_fraction",
        _parse_float,
        0.0,
        lambda v: 0.0 <= v < 1.0,
        "in [0, 1)",
    ),
    "relaxation.a": ("relaxation_a", _parse_float, 1.0, lambda v: v > 0, "> 0"),
    "relaxation.c0": ("relaxation_c0", _parse_float, 1.0, lambda v: v >= 0, ">= 0"),
    "relaxation.tau_end": (
        "relaxation_tau_end",
        _parse_float,
        200.0,
        lambda v: v > 0,
        "> 0",
    ),
    "convergence.eps": (
        "convergence_eps",
        _parse_float_list,
        (1e-1, 3e-2, 1e-2, 3e-3),
        lambda v: len(v) > 0 and all(e > 0 for e in v),
        "nonempty, all > 0",
    ),
    "convergence.t_start": (
        "convergence_t_start",
        _parse_float,
        0.05,
        lambda v: v >= 0,
        ">= 0",
    ),
    "convergence.t_end": (
        "convergence_t_end",
        _parse_float,
        0.5,
        lambda v: v > 0,
        "> 0",
    ),
    "convergence.record_delta": (
        "convergence_record_delta",
        _parse_float,
        0.01,
        lambda v: v > 0,
        "> 0",
    ),
    "equilibrium.cutoff_n": (
        "equilibrium_cutoff_n",
        _parse_cutoff,
        8.0,
        lambda v: v is None or v > 0,
        "> 0 or 'uncut'",
    ),
    "equilibrium.t_end": (
        "equilibrium_t_end",
        _parse_float,
        30.0,
        lambda v: v > 0,
        "> 0",
    ),
    "equilibrium.dt": ("equilibrium_dt", _parse_float, 0.02, lambda v: v > 0, "> 0"),
    "equilibrium.stall_tol": (
        "equilibrium_stall_tol",
        _parse_float,
        0.0,
        lambda v: v >= 0,
        ">= 0",
    ),
    "moments.n": (
        "moments_n",
        _parse_cutoff_list,
        (4.0, 8.0, 16.0, None),
        lambda v: len(v) > 0 and all(n is None or n > 0 for n in v),
        "nonempty, entries > 0 or 'uncut'",
    ),
    "moments.t_end": ("moments_t_end", _parse_float, 0.5, lambda v: v > 0, "> 0"),
    "moments.dt": ("moments_dt", _parse_float, 0.02, lambda v: v > 0, "> 0"),
    "run.system": (
        "run_system",
        str,
        "full",
        lambda v: v in ("full", "limit"),
        "one of ('full', 'limit')",
    ),
    "run.t_end": ("run_t_end", _parse_float, 1.0, lambda v: v >= 0, ">= 0"),
    "run.dt": ("run_dt", _parse_float, 0.01, lambda v: v > 0, "> 0"),
    "run.scaled": ("run_scaled", _parse_bool, False, None, ""),
    "run.cutoff_n": (
        "run_cutoff_n",
        _parse_cutoff,
        None,
        lambda v: v is None or v > 0,
        "> 0 or 'uncut'",
    ),
    "run.record_every": (
        "run_record_every",
        _parse_int,
        1,
        lambda v: v >= 1,
        ">= 1",
    ),
}

_FIELD_TO_KEY = {spec[0]: key for key, spec in _KEY_TABLE.items()}


def parse_config(text: str) -> RunConfig:
    """Parse and validate a flat key-value config.

    Raises ConfigError carrying every problem found: unknown keys,
    unparseable or out-of-range values, bad line syntax, and a missing
    required ``experiment`` key.
    """
    errors: list[str] = []
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value', got {raw!r}")
            continue
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in _KEY_TABLE:
            errors.append(f"line {lineno}: unknown key {key!r}")
            continue
        field_name, parser, _, check, range_text = _KEY_TABLE[key]
        try:
            parsed = parser(val)
        except ValueError:
            errors.append(f"line {lineno}: {key} = {val!r} is not a valid value")
            continue
        if check is not None and not check(parsed):
            errors.append(
                f"line {lineno}: {key} = {val!r} out of range (need {range_text})"
            )
            continue
        values[field_name] = parsed

    if "experiment" not in values:
        errors.append("missing required key 'experiment'")

    for key, (field_name, _, default, _, _) in _KEY_TABLE.items():
        if field_name not in values:
            values[field_name] = default

    if (
        "convergence_t_start" in values
        and "convergence_t_end" in values
        and isinstance(values["convergence_t_start"], float)
        and isinstance(values["convergence_t_end"], float)
        and values["convergence_t_start"] >= values["convergence_t_end"]
    ):
        errors.append(
            "convergence.t_start must be smaller than convergence.t_end "
            f"(got {values['convergence_t_start']} >= {values['convergence_t_end']})"
        )

    if errors:
        raise ConfigError(errors)
    return RunConfig(**values)  # type: ignore[arg-type]


def serialize_config(config: RunConfig) -> str:
    """Canonical text form; parse_config round-trips it exactly."""
    lines = []
    for f in fields(RunConfig):
        key = _FIELD_TO_KEY[f.name]
        lines.append(f"{key} = {_fmt(getattr(config, f.name))}")
    return "\n".join(lines) + "\n"


def config_hash(config: RunConfig) -> str:
    """Short stable digest naming the artifacts of one config."""
    return hashlib.sha256(serialize_config(config).encode()).hexdigest()[:12]


# ---------------------------------------------------------------------------
# state construction


def build_params(config: RunConfig) -> Params:
    return Params(
        eps0=config.eps0,
        c0_kernel=config.c0_kernel,
        a0=config.a0,
        b0=config.b0,
        eps_scale=config.eps_scale,
        tol_newton=config.tol_newton,
        tol_conservation=config.tol_conservation,
    )


def build_grid(config: RunConfig) -> VelocityGrid:
    return VelocityGrid(n_per_axis=config.grid_n, half_width=config.grid_half_width)


def build_gas_field(config: RunConfig, grid: VelocityGrid) -> np.ndarray:
    """Gas density for the configured preset, plus the Gaussian floor."""
    u = np.array([config.initial_ux, config.initial_uy, config.initial_uz])
    k = config.initial_width
    amp = config.initial_amplitude
    if config.initial_preset == "maxwellian":
        field = amp * np.exp(-k * np.sum((grid.nodes - u) ** 2, axis=1))
    else:
        shift = np.array([config.initial_separation, 0.0, 0.0])
        field = amp * (
            np.exp(-k * np.sum((grid.nodes - u - shift) ** 2, axis=1))
            + np.exp(-k * np.sum((grid.nodes - u + shift) ** 2, axis=1))
        )
    if config.initial_floor_amplitude > 0.0:
        field = field + config.initial_floor_amplitude * np.exp(
            -config.initial_floor_width * grid.r2
        )
    return field


def build_manifold_state(config: RunConfig, grid: VelocityGrid) -> ManifoldState:
    return ManifoldState(lam=config.initial_lam, f=build_gas_field(config, grid))


def build_remainder(
    config: RunConfig,
    grid: VelocityGrid,
    quad: SphereQuadrature,
    params: Params,
    base: ManifoldState,
) -> Remainder:
    """Remainder with exact gauge balance: uniform photon part.

    With radius_fraction > 0 the pair is rescaled so its norm is that
    fraction of the trusted-neighborhood radius at the base state.
    """
    if config.remainder_amplitude == 0.0 and config.remainder_radius_fraction == 0.0:
        return zero_remainder(grid, quad)
    amp = config.remainder_amplitude if config.remainder_amplitude > 0.0 else 1.0
    alpha = amp * np.exp(-config.remainder_width * grid.r2)
    theta = np.full(quad.size, integrate_velocity(alpha, grid))
    w = Remainder(alpha=alpha, theta=theta)
    if config.remainder_radius_fraction > 0.0:
        radius = neighborhood_radius(
            compose(base, zero_remainder(grid, quad)), grid, quad, params
        )
        norm = remainder_norm(w, grid, quad)
        scale = config.remainder_radius_fraction * radius / norm
        w = Remainder(alpha=scale * alpha, theta=scale * theta)
    return w


# ---------------------------------------------------------------------------
# chart emission


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        return [lo]
    raw = (hi - lo) / max(1, count - 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        ticks.append(t)
        t += step
    return ticks or [lo]


def svg_line_chart(
    title: str,
    xlabel: str,
    ylabel: str,
    series,
    log_x: bool = False,
    log_y: bool = False,
    desc: str = "",
    width: int = 640,
    height: int = 420,
) -> str:
    """Self-contained SVG line chart (inline styling, no external refs).

    series: iterable of (label, xs, ys).  Non-finite points are dropped;
    on log axes non-positive points are dropped too.
    """
    margin_l, margin_r, margin_t, margin_b = 64, 16, 36, 46
    plot_w = width - margin_l - margin_r
    plot_h = height - margin_t - margin_b

    cleaned = []
    for label, xs, ys in series:
        x = np.asarray(xs, dtype=float)
        y = np.asarray(ys, dtype=float)
        keep = np.isfinite(x) & np.isfinite(y)
        if log_x:
            keep &= x > 0.0
        if log_y:
            keep &= y > 0.0
        cleaned.append((label, x[keep], y[keep]))

    points = [(x, y) for _, x, y in cleaned if x.size > 0]
    head = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f"<desc>{desc}</desc>" if desc else "",
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{title}</text>',
    ]
    if not points:
        head.append(
            f'<text x="{width / 2:.1f}" y="{height / 2:.1f}" text-anchor="middle" '
            'font-family="sans-serif" font-size="12">no data</text></svg>'
        )
        return "\n".join(line for line in head if line)

    def tf(v, is_log):
        return math.log10(v) if is_log else v

    all_x = np.concatenate([x for x, _ in points])
    all_y = np.concatenate([y for _, y in points])
    x_lo, x_hi = float(all_x.min()), float(all_x.max())
    y_lo, y_hi = float(all_y.min()), float(all_y.max())
    tx_lo, tx_hi = tf(x_lo, log_x), tf(x_hi, log_x)
    ty_lo, ty_hi = tf(y_lo, log_y), tf(y_hi, log_y)
    if tx_hi <= tx_lo:
        tx_hi = tx_lo + 1.0
    if ty_hi <= ty_lo:
        ty_hi = ty_lo + 1.0
    pad_x = 0.04 * (tx_hi - tx_lo)
    pad_y = 0.06 * (ty_hi - ty_lo)
    tx_lo, tx_hi = tx_lo - pad_x, tx_hi + pad_x
    ty_lo, ty_hi = ty_lo - pad_y, ty_hi + pad_y

    def px(v):
        return margin_l + (tf(v, log_x) - tx_lo) / (tx_hi - tx_lo) * plot_w

    def py(v):
        return margin_t + plot_h - (tf(v, log_y) - ty_lo) / (ty_hi - ty_lo) * plot_h

    body = [
        f'<rect x="{margin_l}" y="{margin_t}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="#444" stroke-width="1"/>'
    ]

    if log_x:
        x_ticks = [
            10.0**e
            for e in range(math.ceil(tx_lo - 1e-9), math.floor(tx_hi + 1e-9) + 1)
        ]
    else:
        x_ticks = _nice_ticks(tx_lo, tx_hi)
    if log_y:
        y_ticks = [
            10.0**e
            for e in range(math.ceil(ty_lo - 1e-9), math.floor(ty_hi + 1e-9) + 1)
        ]
    else:
        y_ticks = _nice_ticks(ty_lo, ty_hi)

    for t in x_ticks:
        x = margin_l + (tf(t, log_x) - tx_lo) / (tx_hi - tx_lo) * plot_w
        if not margin_l - 1 <= x <= margin_l + plot_w + 1:
            continue
        body.append(
            f'<line x1="{x:.2f}" y1="{margin_t}" x2="{x:.2f}" '
            f'y2="{margin_t + plot_h}" stroke="#ddd" stroke-width="1"/>'
        )
        body.append(
            f'<text x="{x:.2f}" y="{margin_t + plot_h + 16}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="10">{t:.6g}</text>'
        )
    for t in y_ticks:
        y = margin_t + plot_h - (tf(t, log_y) - ty_lo) / (ty_hi - ty_lo) * plot_h
        if not margin_t - 1 <= y <= margin_t + plot_h + 1:
            continue
        body.append(
            f'<line x1="{margin_l}" y1="{y:.2f}" x2="{margin_l + plot_w}" '
            f'y2="{y:.2f}" stroke="#ddd" stroke-width="1"/>'
        )
        body.append(
            f'<text x="{margin_l - 6}" y="{y + 3:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10">{t:.6g}</text>'
        )

    body.append(
        f'<text x="{margin_l + plot_w / 2:.1f}" y="{height - 8}" '
        'text-anchor="middle" font-family="sans-serif" font-size="12">'
        f"{xlabel}</text>"
    )
    body.append(
        f'<text x="16" y="{margin_t + plot_h / 2:.1f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 16 {margin_t + plot_h / 2:.1f})">{ylabel}</text>'
    )

    for i, (label, x, y) in enumerate(cleaned):
        if x.size == 0:
            continue
        color = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
        body.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" '
            'stroke-width="1.5"/>'
        )
        ly = margin_t + 14 + 14 * i
        body.append(
            f'<line x1="{margin_l + plot_w - 110}" y1="{ly - 4}" '
            f'x2="{margin_l + plot_w - 90}" y2="{ly - 4}" stroke="{color}" '
            'stroke-width="2"/>'
        )
        body.append(
            f'<text x="{margin_l + plot_w - 84}" y="{ly}" '
            f'font-family="sans-serif" font-size="10">{label}</text>'
        )

    return "\n".join(line for line in head if line) + "\n" + "\n".join(body) + "\n</svg>"


# ---------------------------------------------------------------------------
# artifacts


def _write_text(path: str, text: str) -> None:
    with open(path, "w", newline="") as handle:
        handle.write(text)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {key: _jsonable(val) for key, val in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(val) for val in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(val) for val in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def _write_json(path: str, payload: dict) -> None:
    _write_text(path, json.dumps(_jsonable(payload), sort_keys=True, indent=2) + "\n")


def _series_csv(header: str, columns) -> str:
    rows = [header]
    for row in zip(*columns):
        rows.append(",".join(f"{v:.17g}" for v in row))
    return "\n".join(rows) + "\n"


def _exit_code_for(message: str) -> int:
    lowered = message.lower()
    if "neighborhood" in lowered or "photon fraction" in lowered:
        return 4
    return 3


def _drift(series: np.ndarray) -> float:
    ref = abs(float(series[0]))
    span = float(np.max(np.abs(series - series[0])))
    return span / ref if ref > 0.0 else span


# ---------------------------------------------------------------------------
# experiment drivers


def _run_relaxation(config: RunConfig, out: str, tag: str) -> int:
    params = build_params(config)
    grid = build_grid(config)
    quad = sphere_design_32()
    report = study_relaxation(
        config.relaxation_a,
        config.relaxation_c0,
        config.relaxation_tau_end,
        grid=grid,
        quad=quad,
        params=params,
    )
    _write_json(
        os.path.join(out, f"relaxation_report_{tag}.json"),
        {
            "config_hash": tag,
            "config": report.config,
            "a": report.a,
            "c0": report.c0,
            "rho2_terminal": report.rho2_terminal,
            "i_terminal": report.i_terminal,
            "rho2_target": report.rho2_target,
            "i_target": report.i_target,
            "rho2_gap": report.rho2_gap,
            "i_gap": report.i_gap,
            "c0_drift": report.c0_drift,
            "balance_residual_rel": report.balance_residual_rel,
        },
    )
    _write_text(
        os.path.join(out, f"relaxation_series_{tag}.csv"),
        _series_csv("tau,rho2,i_photon", (report.tau, report.rho2, report.i_photon)),
    )
    if report.field_trajectory is not None:
        _write_text(
            os.path.join(out, f"relaxation_field_{tag}.csv"),
            trajectory_csv(report.field_trajectory),
        )
    _write_text(
        os.path.join(out, f"relaxation_chart_{tag}.svg"),
        svg_line_chart(
            "fast exchange relaxation",
            "tau",
            "density",
            [
                ("rho2", report.tau, report.rho2),
                ("I", report.tau, report.i_photon),
            ],
            desc=f"config {tag}",
        ),
    )
    return 0


def _run_convergence(config: RunConfig, out: str, tag: str) -> int:
    params = build_params(config)
    grid = build_grid(config)
    quad = sphere_design_32()
    base = build_manifold_state(config, grid)
    w0 = build_remainder(config, grid, quad, params, base)
    report = study_convergence(
        base,
        w0,
        params,
        config.convergence_eps,
        config.convergence_t_start,
        config.convergence_t_end,
        grid=grid,
        quad=quad,
        record_delta=config.convergence_record_delta,
        threads=config.threads,
    )
    payload = {
        "config_hash": tag,
        "config": report.config,
        "eps_values": report.eps_values,
        "sup_errors": report.sup_errors,
        "slope_loglog": report.slope_loglog,
        "scaling_factor": report.scaling_factor,
        "records": [
            {
                "eps": r.eps,
                "dt": r.dt,
                "sup_error": r.sup_error,
                "decay_rate": r.decay_rate,
                "decay_r2": r.decay_r2,
                "n_fit_points": r.n_fit_points,
                "plateau": r.plateau,
                "max_over_plateau": r.max_over_plateau,
                "failure": r.failure,
                "failure_time": r.failure_time,
            }
            for r in report.records
        ],
    }
    _write_json(os.path.join(out, f"convergence_report_{tag}.json"), payload)
    for i, rec in enumerate(report.records):
        _write_text(
            os.path.join(out, f"convergence_error_e{i}_{tag}.csv"),
            _series_csv("t,state_error", (rec.times, rec.errors)),
        )
        _write_text(
            os.path.join(out, f"convergence_remainder_e{i}_{tag}.csv"),
            _series_csv(
                "t,remainder_norm", (rec.remainder_times, rec.remainders)
            ),
        )
    _write_text(
        os.path.join(out, f"convergence_limit_{tag}.csv"),
        limit_csv(report.limit_trajectory),
    )
    _write_text(
        os.path.join(out, f"convergence_sup_{tag}.svg"),
        svg_line_chart(
            "sup state distance vs exchange speed",
            "eps",
            "sup error on [s, T]",
            [("sup error", report.eps_values, report.sup_errors)],
            log_x=True,
            log_y=True,
            desc=f"config {tag}",
        ),
    )
    _write_text(
        os.path.join(out, f"convergence_remainder_{tag}.svg"),
        svg_line_chart(
            "remainder decay",
            "t",
            "remainder norm",
            [
                (f"eps={rec.eps:g}", rec.remainder_times, rec.remainders)
                for rec in report.records
            ],
            log_y=True,
            desc=f"config {tag}",
        ),
    )
    _write_text(
        os.path.join(out, f"convergence_entropy_{tag}.svg"),
        svg_line_chart(
            "reduced-run entropy",
            "t",
            "H",
            [
                (
                    "limit run",
                    report.limit_trajectory.times,
                    report.limit_trajectory.entropy,
                )
            ],
            desc=f"config {tag}",
        ),
    )
    for rec in report.records:
        if rec.failure is not None:
            _write_json(
                os.path.join(out, f"failure_{tag}.json"),
                {
                    "config_hash": tag,
                    "error": rec.failure,
                    "failure_time": rec.failure_time,
                    "eps": rec.eps,
                },
            )
            return _exit_code_for(rec.failure)
    return 0


def _run_equilibrium(config: RunConfig, out: str, tag: str) -> int:
    params = build_params(config)
    grid = build_grid(config)
    quad = sphere_design_32()
    base = build_manifold_state(config, grid)
    report = study_equilibrium(
        base,
        params,
        config.equilibrium_cutoff_n,
        config.equilibrium_t_end,
        grid=grid,
        quad=quad,
        dt=config.equilibrium_dt,
        stall_tol=config.equilibrium_stall_tol or None,
        threads=config.threads,
    )
    traj = report.trajectory
    _write_json(
        os.path.join(out, f"equilibrium_report_{tag}.json"),
        {
            "config_hash": tag,
            "config": report.config,
            "fit_ok": report.fit_ok,
            "amplitude": report.amplitude,
            "width": report.width,
            "drift": report.drift,
            "lam_target": report.lam_target,
            "lam_end": float(traj.lam[-1]),
            "lam_gap": report.lam_gap,
            "l1_distance_rel": report.l1_distance_rel,
            "stalled": report.stalled,
            "moments": report.moments,
            "aborted": traj.aborted,
        },
    )
    _write_text(os.path.join(out, f"equilibrium_series_{tag}.csv"), limit_csv(traj))
    _write_text(
        os.path.join(out, f"equilibrium_entropy_{tag}.svg"),
        svg_line_chart(
            "entropy under the cut-off kernel",
            "t",
            "H",
            [("H", traj.times, traj.entropy)],
            desc=f"config {tag}",
        ),
    )
    _write_text(
        os.path.join(out, f"equilibrium_lambda_{tag}.svg"),
        svg_line_chart(
            "photon fraction",
            "t",
            "lambda",
            [("lambda", traj.times, traj.lam)],
            desc=f"config {tag}",
        ),
    )
    if traj.aborted is not None:
        _write_json(
            os.path.join(out, f"failure_{tag}.json"),
            {"config_hash": tag, "error": traj.aborted},
        )
        return _exit_code_for(traj.aborted)
    return 0


def _run_moments(config: RunConfig, out: str, tag: str) -> int:
    params = build_params(config)
    grid = build_grid(config)
    quad = sphere_design_32()
    base = build_manifold_state(config, grid)
    report = study_moment_bounds(
        base,
        params,
        config.moments_n,
        config.moments_t_end,
        grid=grid,
        quad=quad,
        dt=config.moments_dt,
        threads=config.threads,
    )
    _write_json(
        os.path.join(out, f"moments_report_{tag}.json"),
        {
            "config_hash": tag,
            "config": report.config,
            "cutoffs": ["uncut" if c is None else c for c in report.cutoffs],
            "l13_initial": report.l13_initial,
            "l14_initial": report.l14_initial,
            "l13_sup": report.l13_sup,
            "l14_sup": report.l14_sup,
            "aborted": [t.aborted for t in report.trajectories],
        },
    )
    series = []
    for c, traj, l13, l14 in zip(
        report.cutoffs, report.trajectories, report.l13_series, report.l14_series
    ):
        label = "uncut" if c is None else f"n{c:g}"
        _write_text(
            os.path.join(out, f"moments_{label}_{tag}.csv"),
            _series_csv("t,l13_norm,l14_norm", (traj.times, l13, l14)),
        )
        series.append((label, traj.times, l14))
    _write_text(
        os.path.join(out, f"moments_chart_{tag}.svg"),
        svg_line_chart(
            "order-4 moment across kernel cutoffs",
            "t",
            "L1_4 norm",
            series,
            desc=f"config {tag}",
        ),
    )
    for traj in report.trajectories:
        if traj.aborted is not None:
            _write_json(
                os.path.join(out, f"failure_{tag}.json"),
                {"config_hash": tag, "error": traj.aborted},
            )
            return _exit_code_for(traj.aborted)
    return 0


def _run_single(config: RunConfig, out: str, tag: str) -> int:
    params = build_params(config)
    grid = build_grid(config)
    quad = sphere_design_32()
    base = build_manifold_state(config, grid)
    if config.run_system == "full":
        w0 = build_remainder(config, grid, quad, params, base)
        traj = run_full(
            compose(base, w0),
            grid,
            quad,
            params,
            t_end=config.run_t_end,
            dt=config.run_dt,
            scaled=config.run_scaled,
            cutoff_n=config.run_cutoff_n,
            threads=config.threads,
            record_every=config.run_record_every,
        )
        csv_text = trajectory_csv(traj)
        drifts = {
            "mass": _drift(traj.kappa),
            "energy": _drift(traj.energy),
            "momentum": float(
                np.max(np.abs(traj.momentum - traj.momentum[0]))
            ),
        }
        entropy = traj.entropy
    else:
        traj = run_limit(
            base,
            grid,
            quad,
            params,
            t_end=config.run_t_end,
            dt=config.run_dt,
            cutoff_n=config.run_cutoff_n,
            threads=config.threads,
            record_every=config.run_record_every,
        )
        csv_text = limit_csv(traj)
        drifts = {
            "mass": _drift(traj.mass),
            "energy": _drift(traj.energy),
            "momentum": float(
                np.max(np.abs(traj.momentum - traj.momentum[0]))
            ),
        }
        entropy = traj.entropy
    if traj.times.size > 1:
        rises = np.diff(entropy) / np.diff(traj.times)
        entropy_rise = float(np.max(rises)) if rises.size else 0.0
    else:
        entropy_rise = 0.0
    _write_json(
        os.path.join(out, f"run_report_{tag}.json"),
        {
            "config_hash": tag,
            "system": config.run_system,
            "t_end": config.run_t_end,
            "dt": config.run_dt,
            "drifts": drifts,
            "entropy_max_rise_per_time": entropy_rise,
            "clamp_events": traj.clamp_events,
            "aborted": traj.aborted,
        },
    )
    _write_text(os.path.join(out, f"run_series_{tag}.csv"), csv_text)
    _write_text(
        os.path.join(out, f"run_entropy_{tag}.svg"),
        svg_line_chart(
            "entropy along the run",
            "t",
            "H",
            [("H", traj.times, entropy)],
            desc=f"config {tag}",
        ),
    )
    if traj.aborted is not None:
        _write_json(
            os.path.join(out, f"failure_{tag}.json"),
            {"config_hash": tag, "error": traj.aborted},
        )
        return _exit_code_for(traj.aborted)
    return 0


_DRIVERS = {
    "relaxation": _run_relaxation,
    "convergence": _run_convergence,
    "equilibrium": _run_equilibrium,
    "moments": _run_moments,
    "run": _run_single,
}


def run(config: RunConfig) -> int:
    """Execute the configured experiment; write artifacts; return exit code."""
    out = config.out
    os.makedirs(out, exist_ok=True)
    tag = config_hash(config)
    _write_text(os.path.join(out, f"config_echo_{tag}.txt"), serialize_config(config))
    driver = _DRIVERS[config.experiment]
    try:
        return driver(config, out, tag)
    except GuardError as err:
        _write_json(
            os.path.join(out, f"failure_{tag}.json"),
            {"config_hash": tag, "error": str(err)},
        )
        return 4
    except ValueError as err:
        _write_json(
            os.path.join(out, f"failure_{tag}.json"),
            {"config_hash": tag, "error": str(err)},
        )
        return 3


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="radgas",
        description="Deterministic studies of a two-level gas coupled to photons.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in _KINDS:
        p = sub.add_parser(kind, help=f"run the {kind} experiment")
        p.add_argument("--config", default=None, help="path to a key-value config")
        p.add_argument("--out", default=None, help="output directory override")
        p.add_argument(
            "--threads", type=int, default=None, help="worker threads override"
        )
        p.add_argument(
            "--override",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="config override, repeatable",
        )
    args = parser.parse_args(argv)

    pieces = [f"experiment = {args.command}"]
    if args.config is not None:
        try:
            with open(args.config) as handle:
                pieces.append(handle.read())
        except OSError as err:
            print(f"config error: cannot read {args.config}: {err}", file=sys.stderr)
            return 2
    for item in args.override:
        if "=" not in item:
            print(
                f"config error: override {item!r} is not KEY=VALUE", file=sys.stderr
            )
            return 2
        pieces.append(item.replace("=", " = ", 1))
    if args.out is not None:
        pieces.append(f"out = {args.out}")
    if args.threads is not None:
        pieces.append(f"threads = {args.threads}")

    try:
        config = parse_config("\n".join(pieces))
    except ConfigError as err:
        for problem in err.errors:
            print(f"config error: {problem}", file=sys.stderr)
        return 2
    if config.experiment != args.command:
        print(
            f"config error: config sets experiment = {config.experiment} but the "
            f"command line says {args.command}",
            file=sys.stderr,
        )
        return 2
    return run(config)
