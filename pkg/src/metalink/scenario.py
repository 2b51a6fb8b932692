"""Configuration-driven experiment runner.

A scenario file is plain INI text (named sections, ``key = value``)
describing one link: topology, wavelength, distances, surface frames,
the source signal, and one grid per surface.  ``run`` wires
geometry -> signal synthesis -> shear -> propagation -> analytics,
exports every stage as a CSV grid, and writes a flat key/value summary.

Four scenario files reproducing the reference experiments (fig8, fig9,
fig10, fig11) ship with the package; aperture extents that the source
material leaves unstated are calibration choices and are documented in
each file's header comments.
"""

from __future__ import annotations

import configparser
import time
from dataclasses import dataclass, field as dc_field
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from . import analytics, gridio, oracle
from .errors import (
    AliasingError,
    ConfigError,
    FrameValidationError,
    ResolutionError,
)
from .field import (
    ComplexField,
    GaussianSignal,
    GridSpec,
    RectSignal,
    Superposition,
    resample_affine,
    synthesize,
    synthesize_sheared,
    total_power,
)
from .geometry import (
    DirectionCosines,
    LinkAxis,
    ShearMatrix,
    SurfaceFrame,
    direction_cosines,
    shear_matrix,
)
from .propagate import (
    BACKENDS,
    PropagationSpec,
    check_sampling,
    propagate_signal,
)

TOPOLOGIES = ("two_aligned", "two_unaligned", "three_aligned", "three_unaligned")

#: exit codes used by the CLI
EXIT_OK = 0
EXIT_TOLERANCE = 2
EXIT_CONFIG = 3


@dataclass(frozen=True)
class Diagnostic:
    code: str  # "config" | "geometry" | "sampling" | "resolution"
    message: str

    def __str__(self):
        return f"[{self.code}] {self.message}"


@dataclass(frozen=True)
class ScenarioConfig:
    topology: str
    wavelength: float
    distances: tuple  # (R,) or (R1, R2)
    backend: str
    frames: dict  # surface name -> raw frame vectors (absent = canonical aligned)
    axes: dict  # leg name -> unit direction (np.ndarray) or absent
    signal: object
    grids: dict  # surface name -> GridSpec
    gammas: dict
    expectations: dict  # summary key -> (target, tolerance)


@dataclass
class RunSummary:
    values: dict
    wall_clock: dict
    violations: list


# --- config parsing ---------------------------------------------------------

def _floats(text: str):
    return [float(p) for p in text.replace(";", ",").split(",") if p.strip()]


def _parse_signal(cp, section: str):
    if section not in cp:
        raise ConfigError(f"missing [{section}] section")
    sec = cp[section]
    kind = sec.get("kind")
    if kind == "rect":
        w = _floats(sec.get("widths", ""))
        c = _floats(sec.get("center", "0, 0"))
        if len(w) != 2 or len(c) != 2:
            raise ConfigError(f"[{section}] rect needs widths and center pairs")
        return RectSignal(Lx=w[0], Ly=w[1], x0=c[0], y0=c[1])
    if kind == "gaussian":
        s = _floats(sec.get("sigmas", ""))
        c = _floats(sec.get("center", "0, 0"))
        if len(s) != 2 or len(c) != 2:
            raise ConfigError(f"[{section}] gaussian needs sigmas and center pairs")
        return GaussianSignal(sigma_x=s[0], sigma_y=s[1], x0=c[0], y0=c[1])
    if kind == "superposition":
        names = [n.strip() for n in sec.get("components", "").split(",") if n.strip()]
        if not names:
            raise ConfigError(f"[{section}] superposition lists no components")
        comps = []
        for name in names:
            sub = f"{section}.{name}"
            if sub not in cp:
                raise ConfigError(f"missing [{sub}] section")
            weight = float(cp[sub].get("weight", "1"))
            comps.append((weight, _parse_signal(cp, sub)))
        return Superposition(components=tuple(comps))
    raise ConfigError(f"[{section}] unknown signal kind {kind!r}")


def _parse_frame(cp, section: str):
    """Raw frame vectors; orthonormality is checked later (validate/run)
    so schema errors and geometry errors stay distinguishable."""
    if section not in cp:
        return None
    sec = cp[section]
    try:
        a = np.array(_floats(sec.get("axis_a", "")))
        b = np.array(_floats(sec.get("axis_b", "")))
        if "normal" in sec:
            n = np.array(_floats(sec["normal"]))
        else:
            n = np.cross(a, b)
        origin = np.array(_floats(sec.get("origin", "0, 0, 0")))
    except Exception as exc:
        raise ConfigError(f"[{section}] malformed frame: {exc}") from exc
    if a.shape != (3,) or b.shape != (3,) or n.shape != (3,):
        raise ConfigError(f"[{section}] frame vectors must be 3-vectors")
    return {"axis_a": a, "axis_b": b, "normal": n, "origin": origin}


def _parse_grid(cp, section: str) -> GridSpec:
    if section not in cp:
        raise ConfigError(f"missing [{section}] section")
    sec = cp[section]
    try:
        n = [int(v) for v in sec.get("n", "").replace(",", " ").split()]
        extent = _floats(sec.get("extent", ""))
        center = _floats(sec.get("center", "0, 0"))
    except ValueError as exc:
        raise ConfigError(f"[{section}] malformed grid: {exc}") from exc
    if len(n) == 1:
        n = n * 2
    if len(extent) == 1:
        extent = extent * 2
    if len(n) != 2 or len(extent) != 2 or len(center) != 2:
        raise ConfigError(f"[{section}] grid needs n, extent, center")
    return GridSpec(
        nx=n[0], ny=n[1], dx=extent[0] / n[0], dy=extent[1] / n[1],
        cx=center[0], cy=center[1],
    )


def _grid_names(topology: str):
    return {
        "two_aligned": ("tx", "rx"),
        "two_unaligned": ("source", "tx", "rx"),
        "three_aligned": ("tx", "ris", "rx"),
        "three_unaligned": ("source", "tx", "ris", "received", "rx"),
    }[topology]


def load_config(path) -> ScenarioConfig:
    """Parse a scenario file.  ``path`` may be a filesystem path or the
    name of a bundled scenario (fig8, fig9, fig10, fig11)."""
    text = _read_config_text(path)
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str  # keep key case: expectation keys name summary entries
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc

    if "link" not in cp:
        raise ConfigError("missing [link] section")
    link = cp["link"]
    topology = link.get("topology")
    if topology not in TOPOLOGIES:
        raise ConfigError(f"unknown topology {topology!r}; choose from {TOPOLOGIES}")
    try:
        wavelength = link.getfloat("wavelength")
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad wavelength: {exc}") from exc
    if wavelength is None or wavelength <= 0:
        raise ConfigError("wavelength must be a positive number")
    if topology.startswith("two"):
        if "distance" not in link:
            raise ConfigError("two-surface links need distance")
        distances = (link.getfloat("distance"),)
    else:
        if "distance_1" not in link or "distance_2" not in link:
            raise ConfigError("three-surface links need distance_1 and distance_2")
        distances = (link.getfloat("distance_1"), link.getfloat("distance_2"))
    if any(d is None or d <= 0 for d in distances):
        raise ConfigError("distances must be positive numbers")
    backend = link.get("backend", "separable_sheared_dft")
    if backend not in BACKENDS:
        raise ConfigError(f"unknown backend {backend!r}")

    frames = {}
    for name in ("tx", "ris", "rx"):
        fr = _parse_frame(cp, f"frames.{name}")
        if fr is not None:
            frames[name] = fr

    axes = {}
    for leg, section in (("leg1", "axis.leg1"), ("leg2", "axis.leg2"), ("leg1", "axis")):
        if section in cp and leg not in axes:
            d = np.array(_floats(cp[section].get("direction", "")))
            axes[leg] = d

    signal = _parse_signal(cp, "signal")
    grids = {name: _parse_grid(cp, f"grid.{name}") for name in _grid_names(topology)}

    gammas = {"gamma": 2.0, "gamma1": 2.0, "gamma2": 2.0}
    if "analysis" in cp:
        sec = cp["analysis"]
        for key, name in (("gamma", "gamma"), ("gamma_1", "gamma1"), ("gamma_2", "gamma2")):
            if key in sec:
                gammas[name] = float(sec[key])

    expectations = {}
    if "expect" in cp:
        for key, raw in cp["expect"].items():
            vals = _floats(raw)
            if len(vals) != 2:
                raise ConfigError(f"[expect] {key} needs 'target, tolerance'")
            expectations[key] = (vals[0], vals[1])

    return ScenarioConfig(
        topology=topology, wavelength=wavelength, distances=distances,
        backend=backend, frames=frames, axes=axes, signal=signal,
        grids=grids, gammas=gammas, expectations=expectations,
    )


def _read_config_text(path) -> str:
    p = Path(path)
    if p.exists():
        return p.read_text(encoding="utf-8")
    bundled = resources.files("metalink") / "configs" / f"{path}.ini"
    if bundled.is_file():
        return bundled.read_text(encoding="utf-8")
    raise ConfigError(f"no such config file or bundled scenario: {path}")


# --- geometry assembly ------------------------------------------------------

def _frame(cfg: ScenarioConfig, name: str) -> SurfaceFrame:
    raw = cfg.frames.get(name)
    if raw is None:
        return SurfaceFrame.canonical()
    return SurfaceFrame(**raw)


def _leg(cfg: ScenarioConfig, leg: str, distance: float,
         tx_name: str, rx_name: str):
    """Cosines and shear for one leg; aligned when no axis is configured."""
    if leg in cfg.axes:
        axis = LinkAxis(direction=cfg.axes[leg], distance=distance)
        cos = direction_cosines(_frame(cfg, tx_name), _frame(cfg, rx_name), axis)
    else:
        axis = LinkAxis.canonical(distance)
        cos = DirectionCosines.aligned()
    return axis, cos, shear_matrix(cos)


# --- oracle sampling --------------------------------------------------------

def _oracle_samples(signal, lam, grid, single_R=None, double_R=None):
    """Closed-form stage prediction on a grid, extended to superpositions
    by linearity.  Returns None for signals with no closed form."""
    u, v = grid.meshgrid()

    def one(sig):
        if isinstance(sig, RectSignal):
            if double_R is None:
                return oracle.rect_ft(sig.Lx, sig.Ly, sig.x0, sig.y0, lam, single_R, u, v)
            return oracle.rect_double_ft(
                sig.Lx, sig.Ly, sig.x0, sig.y0, lam, double_R[0], double_R[1], u, v
            )
        if isinstance(sig, GaussianSignal):
            if double_R is None:
                return oracle.gauss_ft(
                    sig.sigma_x, sig.sigma_y, sig.x0, sig.y0, lam, single_R, u, v
                )
            return oracle.gauss_double_ft(
                sig.sigma_x, sig.sigma_y, sig.x0, sig.y0, lam,
                double_R[0], double_R[1], u, v,
            )
        if isinstance(sig, Superposition):
            acc = np.zeros(u.shape, dtype=complex)
            for w, s in sig.components:
                part = one(s)
                if part is None:
                    return None
                acc += w * part
            return acc
        return None

    return one(signal)


def rel_l2(result: ComplexField, predicted: np.ndarray) -> float:
    num = np.linalg.norm(result.samples - predicted)
    den = np.linalg.norm(predicted)
    return float(num / den)


# --- runner -----------------------------------------------------------------

def validate(config: ScenarioConfig) -> list:
    """Static diagnostics; empty list iff run() would accept the config."""
    diags = []
    lam = config.wavelength

    feature = config.signal.min_feature
    for name in ("source", "tx"):
        if name in config.grids:
            g = config.grids[name]
            worst = max(g.dx, g.dy)
            if feature / worst < 8:
                diags.append(Diagnostic(
                    "resolution",
                    f"grid.{name}: feature {feature:g} m spans "
                    f"{feature / worst:.2f} < 8 samples",
                ))
            break

    try:
        legs = _build_legs(config)
    except FrameValidationError as exc:
        diags.append(Diagnostic("geometry", str(exc)))
        return diags

    for leg_name, distance, in_name, out_name in _leg_grid_pairs(config.topology):
        try:
            check_sampling(config.grids[in_name], config.grids[out_name], lam, distance_of(config, distance))
        except AliasingError as exc:
            diags.append(Diagnostic("sampling", f"{leg_name}: {exc}"))
    return diags


def distance_of(config: ScenarioConfig, index: int) -> float:
    return config.distances[index]


def _leg_grid_pairs(topology: str):
    if topology == "two_aligned":
        return (("leg1", 0, "tx", "rx"),)
    if topology == "two_unaligned":
        return (("leg1", 0, "source", "rx"),)
    if topology == "three_aligned":
        return (("leg1", 0, "tx", "ris"), ("leg2", 1, "ris", "rx"))
    return (("leg1", 0, "source", "ris"), ("leg2", 1, "ris", "received"))


def _build_legs(config: ScenarioConfig):
    t = config.topology
    if t in ("two_aligned", "two_unaligned"):
        return [_leg(config, "leg1", config.distances[0], "tx", "rx")]
    return [
        _leg(config, "leg1", config.distances[0], "tx", "ris"),
        _leg(config, "leg2", config.distances[1], "ris", "rx"),
    ]


def run(config: ScenarioConfig, out_dir=None) -> RunSummary:
    """Execute the configured pipeline.

    Exports one CSV grid per stage plus ``summary.txt`` (deterministic)
    and ``timings.txt`` (wall clock, excluded from the determinism
    guarantee) when ``out_dir`` is given.
    """
    values: dict = {}
    clock: dict = {}
    lam = config.wavelength
    legs = _build_legs(config)

    t0 = time.perf_counter()
    fields = _run_pipeline(config, legs, values, clock)
    clock["total"] = time.perf_counter() - t0

    for label, f in fields.items():
        values[f"power.{_key(label)}"] = total_power(f)
        g = f.grid
        values[f"grid.{_key(label)}.nx"] = g.nx
        values[f"grid.{_key(label)}.ny"] = g.ny
        values[f"grid.{_key(label)}.dx"] = g.dx
        values[f"grid.{_key(label)}.dy"] = g.dy

    violations = []
    for key, (target, tol) in config.expectations.items():
        if key not in values:
            violations.append(f"{key}: not produced by this run")
        elif abs(values[key] - target) > tol:
            violations.append(
                f"{key}: measured {values[key]:.6g}, expected {target:g} +/- {tol:g}"
            )

    summary = RunSummary(values=values, wall_clock=clock, violations=violations)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for label, f in fields.items():
            gridio.save_field_csv(f, out / f"{_key(label)}.csv")
        write_summary(summary, out / "summary.txt")
        with open(out / "timings.txt", "w", encoding="utf-8") as fh:
            for stage, sec in clock.items():
                fh.write(f"{stage} = {sec:.6f}\n")
    return summary


def _key(stage_label: str) -> str:
    """File/summary key for a stage label: S'1 -> Sp1."""
    return stage_label.replace("'", "p")


def write_summary(summary: RunSummary, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key in sorted(summary.values):
            v = summary.values[key]
            if isinstance(v, float):
                fh.write(f"{key} = {v:.12g}\n")
            else:
                fh.write(f"{key} = {v}\n")


def read_summary(path) -> dict:
    out = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        key, _, val = line.partition(" = ")
        try:
            out[key] = float(val)
        except ValueError:
            out[key] = val
    return out


def _timed(clock, label, fn):
    t0 = time.perf_counter()
    result = fn()
    clock[label] = time.perf_counter() - t0
    return result


def _run_pipeline(config, legs, values, clock):
    t = config.topology
    lam = config.wavelength
    grids = config.grids

    if t == "two_aligned":
        spec = PropagationSpec.aligned(lam, config.distances[0], config.backend)
        s1 = _timed(clock, "S1", lambda: synthesize(config.signal, grids["tx"], "S1"))
        s2 = _timed(clock, "S2", lambda: propagate_signal(
            s1, spec, grids["rx"], stage_label="S2"))
        values["ratio.predicted.S2"] = analytics.predicted_power_ratio("two_aligned")
        values["modes.N"] = analytics.mode_count(
            _mode_spec(config, None), "two_aligned")
        pred = _oracle_samples(config.signal, lam, grids["rx"], single_R=config.distances[0])
        if pred is not None:
            values["oracle.l2rel.S2"] = rel_l2(s2, pred)
        values["fresnel.ratio.leg1"] = spec.fresnel_aperture_ratio(grids["tx"], grids["rx"])
        return {"S1": s1, "S2": s2}

    if t == "two_unaligned":
        axis, cos, T = legs[0]
        spec = PropagationSpec(wavelength=lam, axis=axis, cosines=cos,
                               backend=config.backend)
        sp1 = _timed(clock, "Sp1", lambda: synthesize(config.signal, grids["source"], "S'1"))
        # S1 occupies the sheared copy of the source support; sampled
        # analytically so its power matches P(S'1) at quadrature level
        s1 = _timed(clock, "S1", lambda: synthesize_sheared(
            config.signal, T.matrix, grids["tx"], "S1"))
        s2 = _timed(clock, "S2", lambda: propagate_signal(
            s1, spec, grids["rx"], shear=T, stage_label="S2"))
        values["det.T"] = T.det
        values["obliquity"] = cos.obliquity
        values["ratio.predicted.S2"] = analytics.predicted_power_ratio(
            "two_unaligned", det_T=T.det)
        values["modes.N"] = analytics.mode_count(_mode_spec(config, (T,)), "two_unaligned")
        pred = _oracle_samples(config.signal, lam, grids["rx"], single_R=config.distances[0])
        if pred is not None:
            values["oracle.l2rel.S2"] = rel_l2(
                s2, pred * cos.obliquity / np.sqrt(T.det))
        values["fresnel.ratio.leg1"] = spec.fresnel_aperture_ratio(
            grids["source"], grids["rx"])
        return {"S'1": sp1, "S1": s1, "S2": s2}

    if t == "three_aligned":
        r1, r2 = config.distances
        spec1 = PropagationSpec.aligned(lam, r1, config.backend)
        spec2 = PropagationSpec.aligned(lam, r2, config.backend)
        s1 = _timed(clock, "S1", lambda: synthesize(config.signal, grids["tx"], "S1"))
        s2 = _timed(clock, "S2", lambda: propagate_signal(
            s1, spec1, grids["ris"], stage_label="S2"))
        s3 = _timed(clock, "S3", lambda: propagate_signal(
            s2, spec2, grids["rx"], stage_label="S3"))
        values["ratio.predicted.S2"] = 1.0
        values["ratio.predicted.S3"] = 1.0
        values["modes.N"] = analytics.mode_count(
            _mode_spec(config, None), _three_topology(config.signal, aligned=True))
        pred2 = _oracle_samples(config.signal, lam, grids["ris"], single_R=r1)
        pred3 = _oracle_samples(config.signal, lam, grids["rx"], double_R=(r1, r2))
        if pred2 is not None:
            values["oracle.l2rel.S2"] = rel_l2(s2, pred2)
        if pred3 is not None:
            values["oracle.l2rel.S3"] = rel_l2(s3, pred3)
        values["fresnel.ratio.leg1"] = spec1.fresnel_aperture_ratio(grids["tx"], grids["ris"])
        values["fresnel.ratio.leg2"] = spec2.fresnel_aperture_ratio(grids["ris"], grids["rx"])
        return {"S1": s1, "S2": s2, "S3": s3}

    # three_unaligned
    r1, r2 = config.distances
    (axis1, cos1, T1), (axis2, cos2, T2) = legs
    spec1 = PropagationSpec(wavelength=lam, axis=axis1, cosines=cos1,
                            backend=config.backend)
    spec2 = PropagationSpec(wavelength=lam, axis=axis2, cosines=cos2,
                            backend=config.backend)
    sp1 = _timed(clock, "Sp1", lambda: synthesize(config.signal, grids["source"], "S'1"))
    s1 = _timed(clock, "S1", lambda: synthesize_sheared(
        config.signal, T1.matrix, grids["tx"], "S1"))
    s2 = _timed(clock, "S2", lambda: propagate_signal(
        s1, spec1, grids["ris"], shear=T1, stage_label="S2"))
    sp3 = _timed(clock, "Sp3", lambda: propagate_signal(
        s2, spec2, grids["received"], shear=T2, shear_side="output",
        stage_label="S'3"))
    s3 = _timed(clock, "S3", lambda: resample_affine(
        sp3, np.linalg.inv(T2.matrix), np.sqrt(T2.det), grids["rx"], "S3"))
    values["det.T1"] = T1.det
    values["det.T2"] = T2.det
    values["obliquity.leg1"] = cos1.obliquity
    values["obliquity.leg2"] = cos2.obliquity
    r_s2, r_s3 = analytics.predicted_power_ratio(
        "three_unaligned", det_T1=T1.det, det_T2=T2.det)
    values["ratio.predicted.S2"] = r_s2
    values["ratio.predicted.S3"] = r_s3
    values["modes.N"] = analytics.mode_count(
        _mode_spec(config, (T1, T2)), _three_topology(config.signal, aligned=False))
    pred2 = _oracle_samples(config.signal, lam, grids["ris"], single_R=r1)
    pred3 = _oracle_samples(config.signal, lam, grids["received"], double_R=(r1, r2))
    amp1 = cos1.obliquity / np.sqrt(T1.det)
    amp2 = cos2.obliquity / np.sqrt(T2.det)
    if pred2 is not None:
        values["oracle.l2rel.S2"] = rel_l2(s2, pred2 * amp1)
    if pred3 is not None:
        values["oracle.l2rel.Sp3"] = rel_l2(sp3, pred3 * amp1 * amp2)
    values["fresnel.ratio.leg1"] = spec1.fresnel_aperture_ratio(grids["source"], grids["ris"])
    values["fresnel.ratio.leg2"] = spec2.fresnel_aperture_ratio(grids["ris"], grids["received"])
    return {"S'1": sp1, "S1": s1, "S2": s2, "S'3": sp3, "S3": s3}


def _signal_kind(signal) -> str:
    if isinstance(signal, RectSignal):
        return "rect"
    if isinstance(signal, GaussianSignal):
        return "gauss"
    if isinstance(signal, Superposition):
        kinds = {_signal_kind(s) for _, s in signal.components}
        return kinds.pop() if len(kinds) == 1 else "mixed"
    return "unknown"


def _three_topology(signal, aligned: bool) -> str:
    base = "three_rect" if _signal_kind(signal) == "rect" else "three_gauss"
    return base if aligned else base + "_unaligned"


def _area(g: GridSpec) -> float:
    return g.extent_x * g.extent_y


def _mode_spec(config: ScenarioConfig, shears) -> analytics.ModeCountSpec:
    g = config.grids
    if config.topology.startswith("two"):
        return analytics.ModeCountSpec(
            wavelength=config.wavelength,
            m_tx=_area(g["tx"]), m_rx=_area(g["rx"]),
            R=config.distances[0],
            det_T=shears[0].det if shears else None,
            gamma=config.gammas["gamma"],
        )
    return analytics.ModeCountSpec(
        wavelength=config.wavelength,
        m_tx=_area(g["tx"]), m_rx=_area(g["rx"]), m_ris=_area(g["ris"]),
        R1=config.distances[0], R2=config.distances[1],
        det_T1=shears[0].det if shears else None,
        det_T2=shears[1].det if shears else None,
        gamma=config.gammas["gamma"],
        gamma1=config.gammas["gamma1"],
        gamma2=config.gammas["gamma2"],
    )
