import math

import numpy as np
import pytest

from hardyghost.objects import make_double_slit
from hardyghost.spatial import (GridSpec, LGIndex, ModeDecomposition, ObjectField, SchmidtSpectrum,
                                decompose_object, ghost_intensity, idler_state, lg_mode_field,
                                reconstruct)
from oracles import brute_overlap

SMALL = GridSpec(n=24, half_extent=0.9, waist=0.3)
PIPE = GridSpec(n=256, half_extent=3.2, waist=0.2)


def disk(grid, radius):
    x, y = grid.coords()
    return ObjectField(grid, (np.hypot(x, y) <= radius).astype(float))


def normalized_l2(a, b):
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    return float(np.linalg.norm(a - b))


class TestGrid:
    def test_orientation(self):
        g = GridSpec(n=8, half_extent=1.0)
        x, y = g.coords()
        assert x[0, 0] < 0 and y[0, 0] > 0
        assert x[0, -1] > 0 and y[-1, 0] < 0
        assert g.axis().sum() == pytest.approx(0.0, abs=1e-15)

    def test_validation(self):
        with pytest.raises(ValueError):
            GridSpec(n=4)
        with pytest.raises(ValueError):
            GridSpec(waist=0)


class TestModes:
    def test_fundamental_peak_on_centered_sample(self):
        g = GridSpec(n=255, half_extent=0.9, waist=0.2)
        f = lg_mode_field(LGIndex(0, 0), g)
        assert f.values[127, 127].real == pytest.approx(math.sqrt(2 / math.pi) / 0.2, rel=1e-12)

    def test_orthonormality_default_grid(self):
        g = GridSpec()
        idx = [LGIndex(ell, p) for ell in range(-3, 4) for p in range(4)]
        fields = np.array([lg_mode_field(i, g).values.ravel() for i in idx])
        gram = fields.conj() @ fields.T * g.pixel_area
        assert np.max(np.abs(gram - np.eye(len(idx)))) < 1e-4

    def test_parity_under_rotation(self):
        # a 180 degree rotation multiplies LG_{ell,p} by (-1)^ell
        g = GridSpec(n=255, half_extent=0.9, waist=0.2)
        for ell in (-3, 0, 1, 2):
            v = lg_mode_field(LGIndex(ell, 1), g).values
            np.testing.assert_allclose(v[::-1, ::-1], (-1) ** ell * v, atol=1e-9)

    def test_spill_flag(self):
        assert not lg_mode_field(LGIndex(2, 2), GridSpec()).spills
        assert lg_mode_field(LGIndex(0, 0), GridSpec(n=64, half_extent=0.5, waist=0.6)).spills

    def test_negative_p_rejected(self):
        with pytest.raises(ValueError):
            LGIndex(0, -1)


class TestDecomposition:
    def test_matches_brute_force_quadrature(self):
        rng = np.random.default_rng(7)
        vals = rng.uniform(0, 1, (24, 24)) * np.exp(1j * rng.uniform(0, 2 * np.pi, (24, 24)))
        obj = ObjectField(SMALL, vals)
        dec = decompose_object(obj, (2, 2))
        for idx in dec.indices():
            ref = brute_overlap(lg_mode_field(idx, SMALL).values, vals, SMALL.pixel_area)
            assert abs(dec[idx] - ref) < 1e-12

    def test_pure_mode_recovered(self):
        g = GridSpec()
        f = lg_mode_field(LGIndex(2, 1), g).values
        obj = ObjectField(g, f / np.abs(f).max())
        dec = decompose_object(obj, (3, 3))
        target = 1 / np.abs(f).max()
        amps = np.abs(dec.amplitudes)
        assert amps[2 + 3, 1] == pytest.approx(target, rel=1e-6)
        amps[2 + 3, 1] = 0
        assert amps.max() < 1e-6 * target

    def test_zero_object(self):
        dec = decompose_object(ObjectField(SMALL, np.zeros((24, 24))), (2, 2))
        assert dec.zero_energy and dec.captured_energy == 0.0
        assert math.isnan(dec.parseval_ratio)
        assert np.all(ghost_intensity(idler_state(dec, SchmidtSpectrum.flat(2, 2)), SMALL) == 0)

    def test_disk_has_fourfold_selection_rule(self):
        # the pixelated disk keeps the square lattice's 90 degree symmetry only,
        # so amplitudes survive at ell = 0 mod 4 and vanish elsewhere
        dec = decompose_object(disk(GridSpec(), 0.25), (10, 3))
        for idx in dec.indices():
            if idx.ell % 4:
                assert abs(dec[idx]) < 1e-10
        assert max(abs(dec[4, p]) for p in range(4)) < 1e-3
        assert abs(dec[0, 0]) > 0.05

    def test_c2_double_slit_has_no_odd_ell(self):
        # odd n with an odd slit height puts the pair exactly symmetric under 180 degree rotation
        g = GridSpec(n=255, half_extent=255 * 0.0125, waist=0.2)
        obj, _ = make_double_slit(g)
        np.testing.assert_array_equal(obj.values, obj.values[::-1, ::-1])
        dec = decompose_object(obj, (5, 3))
        for idx in dec.indices():
            if idx.ell % 2:
                assert abs(dec[idx]) < 1e-10
        assert abs(dec[2, 0]) > 1e-3

    def test_parseval_bounded(self):
        obj, _ = make_double_slit(PIPE)
        dec = decompose_object(obj, (4, 3))
        assert 0 < dec.parseval_ratio <= 1 + 1e-9
        assert dec.parseval_deficit >= -1e-12

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            ObjectField(SMALL, np.zeros((10, 10)))
        with pytest.raises(ValueError):
            ObjectField(SMALL, 2 * np.ones((24, 24)))
        with pytest.raises(ValueError):
            ModeDecomposition(np.zeros((3, 3)), 2, 2)


class TestSchmidt:
    def test_normalized(self):
        for spec in (SchmidtSpectrum.flat(3, 2), SchmidtSpectrum.gaussian(3, 2),
                     SchmidtSpectrum.single(LGIndex(1, 0), 3, 2)):
            assert np.sum(spec.lam ** 2) == pytest.approx(1.0, abs=1e-14)

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            SchmidtSpectrum(np.zeros((3, 2)), 1, 1)
        with pytest.raises(ValueError):
            SchmidtSpectrum(-np.ones((3, 2)), 1, 1)
        with pytest.raises(ValueError):
            SchmidtSpectrum.gaussian(2, 2, sigma_ell=0)

    def test_truncation_mismatch(self):
        dec = decompose_object(disk(SMALL, 0.3), (2, 2))
        with pytest.raises(ValueError):
            idler_state(dec, SchmidtSpectrum.flat(3, 2))


class TestGhostImage:
    def test_flat_spectrum_reproduces_truncated_object(self):
        obj, _ = make_double_slit(PIPE)
        dec = decompose_object(obj, (6, 4))
        img = ghost_intensity(idler_state(dec, SchmidtSpectrum.flat(6, 4)), PIPE)
        ref = np.abs(reconstruct(dec, PIPE)) ** 2
        ref *= img.sum() / ref.sum()
        assert np.max(np.abs(img - ref)) < 1e-10 * img.max()

    def test_orientation_preserved(self):
        g = GridSpec(n=128, half_extent=0.9, waist=0.2)
        x, y = g.coords()
        vals = ((np.hypot(x + 0.15, y - 0.1)) < 0.08).astype(float)
        dec = decompose_object(ObjectField(g, vals), (10, 6))
        img = ghost_intensity(idler_state(dec, SchmidtSpectrum.flat(10, 6)), g)
        cx, cy = (img * x).sum() / img.sum(), (img * y).sum() / img.sum()
        assert cx < -0.1 and cy > 0.05

    def test_total_matches_captured_energy(self):
        obj, _ = make_double_slit(PIPE)
        idler = idler_state(decompose_object(obj, (4, 3)), SchmidtSpectrum.gaussian(4, 3))
        img = ghost_intensity(idler, PIPE)
        assert img.sum() * PIPE.pixel_area == pytest.approx(idler.captured_energy, rel=1e-12)

    def test_single_mode_spectrum_gives_mode_profile(self):
        g = GridSpec(n=128)
        dec = decompose_object(disk(g, 0.3), (2, 2))
        img = ghost_intensity(idler_state(dec, SchmidtSpectrum.single(LGIndex(0, 1), 2, 2)), g)
        mode = np.abs(lg_mode_field(LGIndex(0, 1), g).values) ** 2
        assert normalized_l2(img, mode) < 1e-12

    def test_convergence_monotone(self):
        obj, _ = make_double_slit(PIPE)
        truth = np.abs(obj.values) ** 2
        errs = []
        for t in (2, 4, 8):
            dec = decompose_object(obj, (t, t))
            errs.append(normalized_l2(ghost_intensity(idler_state(dec, SchmidtSpectrum.flat(t, t)), PIPE),
                                      truth))
        assert errs[0] > errs[1] > errs[2]
