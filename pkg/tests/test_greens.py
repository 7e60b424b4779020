import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import pole_sum
from skinlab.greens import (
    OffContourError, afunc_grid, dds_metric, extract_efc, scattering_channels, spectral_function,
    spectral_function_from_bands,
)
from skinlab.model import ModelParams, closed_form_bands

K_I = (0.86, -np.pi)


@pytest.fixture(scope="module")
def grid27(defaults):
    return afunc_grid(defaults, 2.7, 301)


class TestSpectralFunction:
    def test_peak_at_incident_point(self, defaults):
        assert spectral_function(defaults, 2.7, K_I) >= 0.9 / (2 * defaults.eta)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(-8, 8), st.floats(-4, 4), st.floats(-4, 4))
    def test_two_routes(self, E, kx, ky):
        p = ModelParams()
        a = spectral_function(p, E, (kx, ky))
        assert a == pytest.approx(pole_sum(1, 2, 2, 0.05, E, kx, ky), rel=1e-9)
        assert a == pytest.approx(spectral_function_from_bands(p, E, (kx, ky)), rel=1e-9)

    def test_two_routes_bulk_random(self, defaults):
        rng = np.random.default_rng(7)
        E = rng.uniform(-6, 6, 10_000)
        kx, ky = rng.uniform(-np.pi, np.pi, (2, 10_000))
        direct = np.array([spectral_function(defaults, e, (x, y)) for e, x, y in zip(E[:200], kx, ky)])
        poles = np.array([pole_sum(1, 2, 2, 0.05, e, x, y) for e, x, y in zip(E[:200], kx, ky)])
        np.testing.assert_allclose(direct, poles, rtol=1e-9)
        for e in np.unique(np.round(E, 0)):
            np.testing.assert_allclose(spectral_function(defaults, e, (kx, ky)),
                                       spectral_function_from_bands(defaults, e, (kx, ky)), rtol=1e-9)

    def test_mirror_symmetry_points(self, defaults):
        for kx, ky in [(0.4, 1.3), (2.2, -0.7), K_I]:
            a = spectral_function(defaults, 2.7, (kx, ky))
            assert spectral_function(defaults, 2.7, (-kx, ky)) == pytest.approx(a, rel=1e-10)
            assert spectral_function(defaults, 2.7, (kx, -ky)) == pytest.approx(a, rel=1e-10)

    def test_eta_must_be_positive(self, defaults):
        with pytest.raises(ValueError):
            spectral_function(defaults, 1.0, (0, 0), eta=0.0)


class TestAfuncGrid:
    def test_argmax(self, grid27):
        iy, ix = np.unravel_index(grid27.values.argmax(), grid27.values.shape)
        step = 2 * np.pi / grid27.grid_n
        assert abs(abs(grid27.kx[ix]) - 0.86) <= step
        assert abs(abs(grid27.ky[iy]) - np.pi) <= step

    def test_outside_area_much_weaker(self, defaults, grid27):
        weak = afunc_grid(defaults, -3.3, 301).values.max()
        assert weak < 0.2 * grid27.values.max()

    def test_off_resonant_bound(self, defaults):
        g = afunc_grid(defaults, 10.0, 301)
        # each pole contributes at most (gamma + eta) / (E - max Re)^2
        top = 2 * np.sqrt(2) + np.sqrt(3)
        assert g.values.max() < 4 * (defaults.gamma + defaults.eta) / (10 - top) ** 2
        assert g.values.max() == pytest.approx(0.0606539, rel=1e-5)

    def test_mirror_symmetry_on_grid(self, grid27):
        v = grid27.values
        # index j <-> n - j maps k -> -k; row/col 0 (-pi) maps to itself
        flip_x = np.concatenate([v[:, :1], v[:, :0:-1]], axis=1)
        flip_y = np.concatenate([v[:1], v[:0:-1]], axis=0)
        np.testing.assert_allclose(flip_x, v, rtol=1e-10)
        np.testing.assert_allclose(flip_y, v, rtol=1e-10)

    @settings(max_examples=10, deadline=None)
    @given(st.floats(0.3, 2), st.floats(-3, 3), st.floats(0, 0.99), st.floats(-6, 6))
    def test_positivity(self, t, m, g, E):
        p = ModelParams(t=t, m=m, gamma=g * 4 * t)
        assert afunc_grid(p, E, 32).values.min() > 0

    def test_deterministic_and_parallel(self, defaults):
        a = afunc_grid(defaults, 1.0, 40, workers=1).values
        b = afunc_grid(defaults, 1.0, 40, workers=3).values
        np.testing.assert_array_equal(a, b)


class TestContours:
    def test_incident_point_on_contour(self, defaults):
        contours = extract_efc(defaults, 2.7, 301)
        assert contours
        kx = np.concatenate([c.kx for c in contours])
        ky = np.concatenate([c.ky for c in contours])
        gap = np.hypot(kx - 0.86, np.abs(np.abs(ky) - np.pi))
        assert gap.min() < 0.02

    def test_empty_far_outside(self, defaults):
        assert extract_efc(defaults, 10.0, 128) == []

    def test_common_lifetime(self, defaults):
        contours = extract_efc(defaults, -1.7, 301)
        assert contours
        life = np.concatenate([c.lifetimes for c in contours])
        np.testing.assert_allclose(life, -1.0, atol=5e-2)

    @pytest.mark.parametrize("E", [2.7, -3.3, -1.7, 4.5, 2.1, -2.5])
    def test_fidelity(self, defaults, E):
        n = 151
        for c in extract_efc(defaults, E, n):
            eps = closed_form_bands(defaults, (c.kx, c.ky))[:, c.band]
            assert np.abs(eps.real - E).max() <= 4 * np.pi / n
            assert np.all((c.kx >= -np.pi) & (c.kx < np.pi))
            assert np.all((c.ky >= -np.pi) & (c.ky < np.pi))

    def test_refinement_is_tight(self, defaults):
        for c in extract_efc(defaults, 2.7, 151):
            eps = closed_form_bands(defaults, (c.kx, c.ky))[:, c.band]
            assert np.abs(eps.real - 2.7).max() < 1e-9

    def test_exceptional_flags(self, defaults):
        # gridN = 300 puts ky = +-2pi/3 on mesh rows, so the contours cross them at vertices
        contours = extract_efc(defaults, 2.7, 300)
        flagged = np.concatenate([c.ky[c.near_exceptional] for c in contours])
        assert flagged.size > 0
        np.testing.assert_allclose(np.abs(flagged), 2 * np.pi / 3, atol=1e-6)

    def test_grid_floor(self, defaults):
        with pytest.raises(ValueError):
            extract_efc(defaults, 2.7, 32)


class TestDds:
    def test_splitting_at_e1(self, defaults):
        r = dds_metric(defaults, 2.7, 301)
        assert r.delta >= 1.8 and r.verdict
        assert r.dos_ratio > 1

    @pytest.mark.parametrize("E", [-3.3, -1.7, 4.5])
    def test_no_splitting(self, defaults, E):
        r = dds_metric(defaults, E, 301)
        assert r.contours and r.delta <= 0.05 and not r.verdict

    def test_empty_contours(self, defaults):
        r = dds_metric(defaults, 10.0, 64)
        assert not r.verdict and r.delta == 0

    def test_hermitian_never_splits(self):
        r = dds_metric(ModelParams(gamma=0.0), 1.0, 128)
        assert r.delta == 0 and not r.verdict


@pytest.fixture(scope="module")
def contours27(defaults):
    return extract_efc(defaults, 2.7, 301)


class TestScattering:
    def test_vertical_mirror_partner(self, defaults, contours27):
        r = scattering_channels(defaults, 2.7, K_I, "vertical", 301, contours=contours27)
        assert r.verdict == "reflective"
        mirror = [p for p in r.open_partners
                  if abs(p.kx + r.k_incident[0]) < 1e-9 and abs(p.ky - r.k_incident[1]) < 1e-9]
        assert mirror
        assert mirror[0].dos == pytest.approx(r.incident_dos, rel=1e-6)

    def test_oblique_closed(self, defaults, contours27):
        r = scattering_channels(defaults, 2.7, K_I, "oblique", 301, contours=contours27)
        assert r.partners
        assert r.verdict == "skin-accumulating"
        assert all(p.dos < 0.1 * r.incident_dos for p in r.partners)
        np.testing.assert_allclose([p.lifetime for p in r.partners], -1.0, atol=1e-9)
        assert abs(r.incident_lifetime) < 1e-9

    def test_partners_obey_conservation(self, defaults, contours27):
        for edge, law in [("vertical", lambda kx, ky: ky), ("horizontal", lambda kx, ky: kx),
                          ("oblique", lambda kx, ky: kx - ky)]:
            r = scattering_channels(defaults, 2.7, K_I, edge, 301, contours=contours27)
            c0 = law(*r.k_incident)
            for p in r.partners:
                gap = (law(p.kx, p.ky) - c0 + np.pi) % (2 * np.pi) - np.pi
                assert abs(gap) <= r.tolerance

    def test_common_lifetime_reflects(self, defaults):
        contours = extract_efc(defaults, -1.7, 301)
        picks = [(c.kx[len(c) // k], c.ky[len(c) // k]) for c in contours for k in (2, 3)]
        for k_i in picks:
            r = scattering_channels(defaults, -1.7, k_i, "oblique", 301, contours=contours)
            assert r.verdict == "reflective"

    def test_off_contour(self, defaults, contours27):
        with pytest.raises(OffContourError, match="nearest contour point"):
            scattering_channels(defaults, 2.7, (0.0, 0.0), "vertical", 301, contours=contours27)

    def test_unknown_edge(self, defaults):
        with pytest.raises(ValueError):
            scattering_channels(defaults, 2.7, K_I, "diagonal", 301)
