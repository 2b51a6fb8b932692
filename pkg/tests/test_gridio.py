import numpy as np
import pytest

from metalink.field import GaussianSignal, GridSpec, synthesize, total_power
from metalink.geometry import DirectionCosines
from metalink.gridio import load_field_csv, save_field_csv, save_phase_csv
from metalink.metasurface import phase_two_surface


class TestFieldRoundTrip:
    def test_grid_and_power_survive(self, tmp_path):
        g = GridSpec(nx=48, ny=40, dx=0.02, dy=0.025, cx=0.1, cy=-0.2)
        s = synthesize(GaussianSignal(0.2, 0.2, 0.1, -0.2), g, "S1")
        path = tmp_path / "S1.csv"
        save_field_csv(s, path)
        back = load_field_csv(path)
        assert back.grid.nx == 48 and back.grid.ny == 40
        assert back.grid.dx == pytest.approx(0.02, rel=1e-12)
        assert back.grid.cy == pytest.approx(-0.2, rel=1e-12)
        assert back.stage_label == "S1"
        assert np.allclose(back.samples, s.samples, atol=1e-13)
        assert total_power(back) == pytest.approx(total_power(s), rel=1e-9)

    def test_header_layout(self, tmp_path):
        g = GridSpec(nx=4, ny=4, dx=0.5, dy=0.5)
        s = synthesize(GaussianSignal(5.0, 5.0), g, "S2")
        path = tmp_path / "S2.csv"
        save_field_csv(s, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "# nx=4, ny=4, dx=0.5, dy=0.5, cx=0, cy=0, stage=S2"
        assert lines[1] == "x,y,re,im"
        assert len(lines) == 2 + 16

    def test_malformed_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x,y,re,im\n0,0,1,0\n")
        with pytest.raises(ValueError):
            load_field_csv(path)


class TestPhaseExport:
    def test_wrap_lands_in_principal_interval(self, tmp_path):
        g = GridSpec.square(16, 1.0)
        prof = phase_two_surface("tx", DirectionCosines.aligned(),
                                 2 * np.pi / 0.001, 10.0, g)
        path = tmp_path / "theta.csv"
        save_phase_csv(prof, path, wrap=True)
        data = np.loadtxt(path, delimiter=",", skiprows=2)
        assert prof.theta.max() > np.pi  # wrapping actually did something
        assert data[:, 2].min() >= -np.pi
        assert data[:, 2].max() < np.pi

    def test_unwrapped_values_verbatim(self, tmp_path):
        g = GridSpec.square(8, 1.0)
        prof = phase_two_surface("rx", DirectionCosines.aligned(),
                                 2 * np.pi / 0.01, 10.0, g)
        path = tmp_path / "theta.csv"
        save_phase_csv(prof, path)
        data = np.loadtxt(path, delimiter=",", skiprows=2)
        assert np.allclose(data[:, 2].reshape(8, 8), prof.theta, atol=1e-12)
