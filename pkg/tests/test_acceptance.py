"""End-to-end acceptance checks.

Each test covers one headline requirement and prints a single
PASS/FAIL line (run with ``pytest -s`` to see them inline).
"""

import dataclasses
import time

import numpy as np
import pytest

from metalink import analytics, oracle, scenario
from metalink.field import (
    GaussianSignal,
    GridSpec,
    RectSignal,
    power_moments,
    synthesize,
    total_power,
)
from metalink.geometry import (
    LinkAxis,
    direction_cosines,
    random_frame,
    random_unit_vector,
    shear_matrix,
    verify_det_identity,
)
from metalink.gridio import load_field_csv
from metalink.propagate import PropagationSpec, propagate_signal, roundtrip_double_ft

from test_geometry import tilted_three_surface, tilted_two_surface

SQ2 = np.sqrt(2.0)


def verdict(name, ok, detail=""):
    tail = f"  [{detail}]" if detail else ""
    print(f"{'PASS' if ok else 'FAIL'}: {name}{tail}")
    assert ok, f"{name}{tail}"


# --- shared scenario runs ---------------------------------------------------

@pytest.fixture(scope="module")
def fig8_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("fig8")
    t0 = time.perf_counter()
    summary = scenario.run(scenario.load_config("fig8"), out_dir=out)
    return out, summary, time.perf_counter() - t0


@pytest.fixture(scope="module")
def fig9_summary():
    return scenario.run(scenario.load_config("fig9"))


@pytest.fixture(scope="module")
def fig10_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("fig10")
    return out, scenario.run(scenario.load_config("fig10"), out_dir=out)


@pytest.fixture(scope="module")
def fig11_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("fig11")
    return out, scenario.run(scenario.load_config("fig11"), out_dir=out)


def quadrant_centroids(f):
    """Power centroid in each open quadrant of the field's grid."""
    hx = f.grid.extent_x / 2 + abs(f.grid.cx)
    hy = f.grid.extent_y / 2 + abs(f.grid.cy)
    out = {}
    for sx in (-1, 1):
        for sy in (-1, 1):
            win = (min(0, sx * hx), max(0, sx * hx),
                   min(0, sy * hy), max(0, sy * hy))
            out[(sx, sy)] = power_moments(f, window=win)
    return out


# --- criteria ---------------------------------------------------------------

class TestDeterminantIdentity:
    def test_det_equals_obliquity_magnitude(self):
        tx, rx, axis = tilted_two_surface()
        t = shear_matrix(direction_cosines(tx, rx, axis))
        ok = abs(t.det - SQ2 / 4) < 1e-12 and round(t.det, 5) == 0.35355

        tx3, ris, rx3, leg1, leg2 = tilted_three_surface()
        t1 = shear_matrix(direction_cosines(tx3, ris, leg1))
        t2 = shear_matrix(direction_cosines(ris, rx3, leg2))
        ok = ok and abs(t1.det - 0.5) < 1e-12 and abs(t2.det - 0.5) < 1e-12

        rng = np.random.default_rng(20240817)
        cases = [
            (random_frame(rng), random_frame(rng),
             LinkAxis(direction=random_unit_vector(rng), distance=1.0))
            for _ in range(1000)
        ]
        t0 = time.perf_counter()
        worst = max(verify_det_identity(a, b, axis).abs_diff
                    for a, b, axis in cases)
        elapsed = time.perf_counter() - t0
        ok = ok and worst < 1e-10 and elapsed < 1.0
        verdict("determinant identity (1000 random pairs + worked values)", ok,
                f"max diff {worst:.2e}, {elapsed:.2f}s")


class TestAlignedTwoSurface:
    def test_fig8_image_and_power(self, fig8_run):
        out, summary, elapsed = fig8_run
        s2 = load_field_csv(out / "S2.csv")
        mags = np.abs(s2.samples[:, np.argmin(np.abs(s2.grid.y))])
        null_ok = True
        for un in (-0.5, 0.5):
            near = np.abs(s2.grid.x - un) < 0.05
            u_min = s2.grid.x[near][np.argmin(mags[near])]
            null_ok &= abs(u_min - un) <= s2.grid.dx
        p2 = summary.values["power.S2"]
        l2 = summary.values["oracle.l2rel.S2"]

        cfg = scenario.load_config("fig8")
        wide = dataclasses.replace(
            cfg,
            grids={"tx": GridSpec.square(360, 1.2), "rx": GridSpec.square(1000, 25.0)},
            expectations={},
        )
        p_wide = scenario.run(wide).values["power.S2"]

        ok = (null_ok and l2 < 1e-2 and abs(p2 - 0.92) <= 0.02
              and p_wide >= 0.99 and elapsed < 30.0)
        verdict("aligned two-surface image", ok,
                f"P(S2)={p2:.4f}, wide {p_wide:.4f}, L2 {l2:.2e}, {elapsed:.1f}s")


class TestUnalignedTwoSurface:
    def test_fig9_power_transfer(self, fig9_summary):
        v = fig9_summary.values
        p1, pp1, p2 = v["power.S1"], v["power.Sp1"], v["power.S2"]

        cfg = scenario.load_config("fig9")
        wide = dataclasses.replace(
            cfg,
            grids={
                "source": GridSpec.square(240, 1.2),
                "tx": GridSpec.square(384, 1.8),
                "rx": GridSpec.square(1000, 25.0),
            },
            expectations={},
        )
        vw = scenario.run(wide).values
        ratio = vw["power.S2"] / vw["power.S1"]

        ok = (abs(p1 - pp1) < 1e-2
              and abs(ratio - 0.354) <= 0.007
              and abs(p2 - 0.29) <= 0.03)
        verdict("unaligned two-surface power transfer", ok,
                f"P(S1)-P(S'1)={p1 - pp1:.2e}, wide ratio {ratio:.4f}, "
                f"P(S2)={p2:.4f}")


class TestThreeSurfaceAligned:
    def test_fig10_image_restoration(self, fig10_run):
        out, summary = fig10_run
        v = summary.values
        powers = [v["power.S1"], v["power.S2"], v["power.S3"]]
        powers_ok = max(powers) - min(powers) < 1e-2

        s3 = load_field_csv(out / "S3.csv")
        cell = max(s3.grid.dx, s3.grid.dy)
        blob_ok, std_ok = True, True
        for (sx, sy), m in quadrant_centroids(s3).items():
            blob_ok &= (abs(m.centroid[0] - 0.1 * sx) <= cell
                        and abs(m.centroid[1] - 0.1 * sy) <= cell)
            std_ok &= all(abs(s - 0.025) <= 0.05 * 0.025 for s in m.std)

        s2 = load_field_csv(out / "S2.csv")
        relay = power_moments(s2)
        relay_ok = all(abs(s - 0.159) <= 0.05 * 0.159 for s in relay.std)

        ok = powers_ok and blob_ok and std_ok and relay_ok
        verdict("three-surface aligned relay image", ok,
                f"powers {powers[0]:.4f}/{powers[1]:.4f}/{powers[2]:.4f}, "
                f"relay std {relay.std[0]:.4f}")


class TestThreeSurfaceUnaligned:
    def test_fig11_power_and_unsheared_image(self, fig11_run, fig10_run):
        out, summary = fig11_run
        v = summary.values
        p2, pp3, p3 = v["power.S2"], v["power.Sp3"], v["power.S3"]
        power_ok = (abs(p2 - 0.50) <= 0.02 and abs(pp3 - 0.25) <= 0.02
                    and abs(p3 - 0.25) <= 0.02)

        # the sheared-back stage S'3 carries the aligned-equivalent image
        sp3 = load_field_csv(out / "Sp3.csv")
        aligned_s3 = load_field_csv(fig10_run[0] / "S3.csv")
        cell = max(sp3.grid.dx, sp3.grid.dy, aligned_s3.grid.dx, aligned_s3.grid.dy)
        ref = quadrant_centroids(aligned_s3)
        img_ok = all(
            abs(m.centroid[0] - ref[q].centroid[0]) <= cell
            and abs(m.centroid[1] - ref[q].centroid[1]) <= cell
            for q, m in quadrant_centroids(sp3).items()
        )
        ok = power_ok and img_ok
        verdict("three-surface unaligned power and unsheared image", ok,
                f"P(S2)={p2:.4f}, P(S'3)={pp3:.4f}, P(S3)={p3:.4f}")


class TestDoubleFtRestoration:
    def test_rect_restored_against_oracle(self):
        # scaled regime: identical physics, affordable mid aperture
        # (450 sinc nulls) so the spectral-truncation error clears 2e-2
        lam, r1, r2 = 1e-7, 1.0, 1.0
        width, x0 = 0.01, 0.002
        tx = GridSpec(nx=3000, ny=3000, dx=4e-6, dy=4e-6, cx=x0, cy=x0)
        mid = GridSpec.square(2250, 0.009)
        out = GridSpec(nx=160, ny=160, dx=7.5e-5, dy=7.5e-5, cx=-x0, cy=-x0)

        s1 = synthesize(RectSignal(width, width, x0, x0), tx)
        s3 = roundtrip_double_ft(s1, r1, r2, lam, mid, out)
        u, v = out.meshgrid()
        pred = oracle.rect_double_ft(width, width, x0, x0, lam, r1, r2, u, v)
        l2 = np.linalg.norm(s3.samples - pred) / np.linalg.norm(pred)

        m = power_moments(s3)
        cell = max(out.dx, out.dy)
        center_ok = all(abs(c + x0 * r2 / r1) <= cell for c in m.centroid)
        # flat-top width via the uniform-density second moment L/sqrt(12)
        width_ok = all(
            abs(s - width * r2 / r1 / np.sqrt(12)) <= 0.03 * width / np.sqrt(12)
            for s in m.std
        )
        ok = l2 < 2e-2 and center_ok and width_ok
        verdict("double-hop rect restoration vs closed form", ok,
                f"L2 {l2:.4f}, centroid ({m.centroid[0]:.5f}, {m.centroid[1]:.5f})")


class TestModeCounts:
    def test_spot_values(self):
        tx, rx, axis = tilted_two_surface()
        det89 = shear_matrix(direction_cosines(tx, rx, axis)).det
        checks = [
            (analytics.mode_count(analytics.ModeCountSpec(
                wavelength=0.01, m_tx=1.0, m_rx=1.0, R=10.0), "two_aligned"),
             100.0),
            (analytics.mode_count(analytics.ModeCountSpec(
                wavelength=0.01, m_tx=1.0, m_rx=1.0, R=10.0, det_T=det89),
                "two_unaligned"), 100.0 * det89),
            (analytics.mode_count(analytics.ModeCountSpec(
                wavelength=0.01, m_tx=1.0, m_ris=1.0, m_rx=1.0,
                R1=10.0, R2=5.0, gamma=2.0), "three_rect"), 25.0),
            (analytics.mode_count(analytics.ModeCountSpec(
                wavelength=0.01, m_tx=1.0, m_ris=1.0, m_rx=1.0,
                R1=10.0, R2=5.0, gamma1=2.0, gamma2=2.0), "three_gauss"), 6.25),
            (analytics.mode_count(analytics.ModeCountSpec(
                wavelength=0.01, m_tx=1.0, m_ris=1.0, m_rx=1.0,
                R1=10.0, R2=5.0, gamma=2.0, det_T1=0.5, det_T2=0.5),
                "three_rect_unaligned"), 12.5),
        ]
        worst = max(abs(got - want) / want for got, want in checks)
        ok = worst < 1e-12 and round(checks[1][0], 2) == 35.36
        verdict("mode-count spot values", ok, f"worst rel diff {worst:.2e}")


class TestBackendEquivalence:
    def test_backends_agree(self):
        lam, r = 0.01, 10.0
        g_in = GridSpec.square(64, 0.8)
        g_out = GridSpec.square(64, 1.0)
        s = synthesize(GaussianSignal(0.1, 0.1, 0.1, -0.05), g_in)
        a = propagate_signal(
            s, PropagationSpec.aligned(lam, r, "separable_sheared_dft"), g_out)
        b = propagate_signal(
            s, PropagationSpec.aligned(lam, r, "direct_quadrature"), g_out)
        l2_pair = np.linalg.norm(a.samples - b.samples) / np.linalg.norm(b.samples)

        from metalink.metasurface import phase_two_surface
        from metalink.field import apply_phase
        from metalink.propagate import propagate_field
        g = GridSpec.square(96, 0.5)
        f1 = apply_phase(
            synthesize(GaussianSignal(0.05, 0.05), g),
            phase_two_surface("tx", PropagationSpec.aligned(lam, r).cosines,
                              2 * np.pi / lam, r, g),
        )
        out_f = propagate_field(f1, PropagationSpec.aligned(lam, r), g)
        out_e = propagate_field(f1, PropagationSpec.aligned(lam, r, "exact_kernel"), g)
        l2_exact = (np.linalg.norm(out_e.samples - out_f.samples)
                    / np.linalg.norm(out_f.samples))

        ok = l2_pair < 1e-10 and l2_exact < 5e-2
        verdict("backend equivalence", ok,
                f"separable vs direct {l2_pair:.2e}, exact vs fresnel {l2_exact:.2e}")
