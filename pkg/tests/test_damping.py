import os

import numpy as np
import pandas as pd
import pytest

from dampkdv.damping import DampingProfile
from dampkdv.damping import EmbeddingUndefinedError
from dampkdv.damping import OmegaInputs
from dampkdv.damping import apply_damping
from dampkdv.damping import band_profile
from dampkdv.damping import check_smoothing_bound
from dampkdv.damping import constant_profile
from dampkdv.damping import embedding_constant
from dampkdv.damping import explicit_profile
from dampkdv.damping import gaussian_profile
from dampkdv.damping import omega_threshold
from dampkdv.damping import viscous_profile
from dampkdv.spectral import RealField
from dampkdv.spectral import SpectralField
from dampkdv.spectral import make_grid
from dampkdv.spectral import to_spectral


def _even_random(grid, rng, low=0.0, high=1.0):
    gamma = rng.uniform(low, high, grid.n_points)
    return 0.5 * (gamma + gamma[grid.mirror])


def test_constant_profile(soliton_grid):
    profile = constant_profile(soliton_grid, 0.0027)
    assert np.all(profile.gamma == 0.0027)
    assert profile.to_dict() == {"type": "constant", "gamma": 0.0027}
    assert repr(profile) == "<DampingProfile type=constant max=0.0027>"
    assert not np.any(constant_profile(soliton_grid, 0).gamma)


def test_band_profile_single_level_is_constant(soliton_grid):
    profile = band_profile(soliton_grid, [(1024, 0.003)])
    np.testing.assert_array_equal(
        profile.gamma, constant_profile(soliton_grid, 0.003).gamma
    )


def test_band_profile_with_trailing_zero(soliton_grid):
    levels = [(64, 0.004), (256, 0.001)]
    profile = band_profile(soliton_grid, levels, trailing_zero=True)
    absmodes = np.abs(soliton_grid.modes)
    assert np.all(profile.gamma[absmodes <= 64] == 0.004)
    assert np.all(profile.gamma[(absmodes > 64) & (absmodes <= 256)] == 0.001)
    assert np.all(profile.gamma[absmodes > 256] == 0)
    assert profile.to_dict() == {
        "type": "bands",
        "levels": [[64, 0.004], [256, 0.001]],
        "trailing_zero": True,
    }


def test_band_profile_extends_last_level(small_grid):
    profile = band_profile(small_grid, [(4, 0.5), (8, 0.25)])
    assert profile.gamma[small_grid.nyquist] == 0.25
    assert profile.tail_value(4) == 0.25
    assert profile.tail_value(3) == 0.5


@pytest.mark.parametrize(
    "levels",
    [[], [(0, 1.0)], [(8, 1.0), (4, 0.5)], [(4, 1.0), (4, 0.5)], [(4, -1.0)]],
)
def test_band_profile_errors(small_grid, levels):
    with pytest.raises(ValueError):
        band_profile(small_grid, levels)


def test_gaussian_profile(small_grid):
    assert not np.any(gaussian_profile(small_grid, 0.0, 4.0).gamma)
    profile = gaussian_profile(small_grid, 0.004, 4.0)
    assert profile.gamma[0] == 0.004
    assert profile.gamma[4] == pytest.approx(0.004 * np.exp(-0.5))
    with pytest.raises(ValueError, match="width must be positive"):
        gaussian_profile(small_grid, 1.0, 0.0)


def test_viscous_profile(small_grid):
    profile = viscous_profile(small_grid, 0.1)
    np.testing.assert_allclose(profile.gamma, 0.1 * small_grid.wavenumbers**2)


def test_explicit_profile_mode_order(unit_grid):
    values = [4.0, 3.0, 2.0, 1.0, 0.0, 1.0, 2.0, 3.0]
    profile = explicit_profile(unit_grid, values)
    np.testing.assert_array_equal(profile.gamma, [0, 1, 2, 3, 4, 3, 2, 1])
    df = profile.to_frame()
    assert df["mode"].tolist() == list(range(-4, 4))
    assert df["gamma"].tolist() == values
    assert profile.to_dict() == {"type": "explicit", "gamma": values}


def test_profile_must_be_even(unit_grid):
    with pytest.raises(ValueError, match="must be even"):
        explicit_profile(unit_grid, [0, 0, 0, 0, 0, 1, 0, 0])


@pytest.mark.parametrize("value", [-1.0, np.nan, np.inf])
def test_profile_values_rejected(unit_grid, value):
    gamma = np.zeros(unit_grid.n_points)
    gamma[0] = value
    with pytest.raises(ValueError):
        DampingProfile(unit_grid, gamma)


@pytest.mark.parametrize(
    "spec",
    [
        {"type": "constant", "gamma": 0.5},
        {"type": "bands", "levels": [[2, 0.5], [4, 0.25]], "trailing_zero": False},
        {"type": "gaussian", "amplitude": 0.5, "width": 2.0},
        {"type": "viscous", "delta": 0.5},
        {"type": "explicit", "gamma": [4.0, 3.0, 2.0, 1.0, 0.0, 1.0, 2.0, 3.0]},
    ],
)
def test_profile_from_dict(unit_grid, spec):
    profile = DampingProfile.from_dict(unit_grid, spec)
    assert profile.to_dict() == spec
    again = DampingProfile.from_dict(unit_grid, profile.to_dict())
    assert again.key == profile.key


def test_profile_from_dict_errors(unit_grid):
    with pytest.raises(ValueError, match="Unknown damping type 'cubic'"):
        DampingProfile.from_dict(unit_grid, {"type": "cubic"})
    with pytest.raises(ValueError, match="missing key 'gamma'"):
        DampingProfile.from_dict(unit_grid, {"type": "constant"})


def test_profile_to_csv(small_grid, tmp_path):
    profile = band_profile(small_grid, [(4, 0.5), (8, 0.25)], trailing_zero=True)
    path = os.path.join(tmp_path, "profile.csv")
    profile.to_csv(path)
    df = pd.read_csv(path)
    assert df.columns.tolist() == ["mode", "gamma"]
    assert len(df) == small_grid.n_points
    assert df["mode"].iloc[0] == -32
    assert df.loc[df["mode"] == 0, "gamma"].item() == 0.5
    assert df.loc[df["mode"] == 12, "gamma"].item() == 0


def test_scale_uniform_tail(small_grid):
    profile = constant_profile(small_grid, 1.0).scale_tail(4, 0.5)
    assert profile.to_dict() == {
        "type": "bands",
        "levels": [[4, 1.0], [32, 0.5]],
        "trailing_zero": False,
    }
    absmodes = np.abs(small_grid.modes)
    assert np.all(profile.gamma[absmodes <= 4] == 1.0)
    assert np.all(profile.gamma[absmodes > 4] == 0.5)


def test_scale_tail_keeps_band_head(small_grid):
    base = band_profile(small_grid, [(2, 1.0), (4, 0.75)])
    profile = base.scale_tail(4, 0.0)
    assert profile.to_dict()["levels"] == [[2, 1.0], [4, 0.75], [32, 0.0]]


def test_scale_non_uniform_tail(small_grid):
    base = gaussian_profile(small_grid, 1.0, 8.0)
    profile = base.scale_tail(4, 0.5)
    assert profile.to_dict()["type"] == "explicit"
    mask = base.tail_mask(4)
    np.testing.assert_allclose(profile.gamma[mask], 0.5 * base.gamma[mask])
    np.testing.assert_array_equal(profile.gamma[~mask], base.gamma[~mask])


def test_apply_damping(small_grid, rng):
    field = RealField(small_grid, rng.standard_normal(small_grid.n_points))
    spectral = to_spectral(field)
    zero = apply_damping(spectral, constant_profile(small_grid, 0.0))
    assert not np.any(zero.coefficients)
    scaled = apply_damping(spectral, constant_profile(small_grid, 0.3))
    np.testing.assert_allclose(scaled.coefficients, 0.3 * spectral.coefficients)
    profile = DampingProfile(small_grid, _even_random(small_grid, rng))
    assert apply_damping(spectral, profile).is_hermitian()


def test_apply_damping_grid_mismatch(small_grid, unit_grid):
    spectral = SpectralField(small_grid, np.zeros(small_grid.n_points))
    with pytest.raises(ValueError, match="Grid mismatch"):
        apply_damping(spectral, constant_profile(unit_grid, 1.0))


def test_embedding_constant():
    # w = 2L = 1
    grid = make_grid(0.5, 8)
    assert embedding_constant(constant_profile(grid, 4.0)) == pytest.approx(np.sqrt(2))
    assert embedding_constant(constant_profile(grid, 16.0)) == pytest.approx(
        np.sqrt(2) / 2
    )


def test_embedding_inequality_random_fields(small_grid, rng):
    profile = DampingProfile(small_grid, _even_random(small_grid, rng, 0.1, 2.0))
    constant = embedding_constant(profile)
    for __ in range(100):
        coefficients = to_spectral(
            RealField(small_grid, rng.standard_normal(small_grid.n_points))
        ).coefficients
        linf = np.max(np.abs(np.fft.ifft(coefficients) * small_grid.n_points))
        hgamma = np.sqrt(
            small_grid.weight * np.sum(profile.gamma * np.abs(coefficients) ** 2)
        )
        assert linf <= constant * hgamma


def test_embedding_needs_positive_symbol(small_grid):
    gamma = np.ones(small_grid.n_points)
    gamma[0] = 0.0
    with pytest.raises(EmbeddingUndefinedError):
        embedding_constant(DampingProfile(small_grid, gamma))


def test_smoothing_bound_zero_profile(small_grid):
    report = check_smoothing_bound(constant_profile(small_grid, 0.0), 1.0, 1.0)
    assert report.sup_observed == 0
    assert report.holds


def test_smoothing_bound_equality(small_grid):
    report = check_smoothing_bound(constant_profile(small_grid, 0.5), 1.0, 1.0)
    assert report.sup_observed == pytest.approx(0.5 * np.exp(-1))
    assert report.bound == pytest.approx(0.5 * np.exp(-1))
    assert report.holds


SMOOTHING_GRID = [(r, t) for r in (0.25, 0.5, 1.0, 1.5, 1.9) for t in (0.1, 1.0, 10.0)]


def _constructor_outputs(grid):
    return [
        constant_profile(grid, 0.0),
        constant_profile(grid, 0.0027),
        constant_profile(grid, 50.0),
        band_profile(grid, [(4, 2.0), (8, 0.5), (16, 0.01)]),
        band_profile(grid, [(4, 2.0), (8, 0.5)], trailing_zero=True),
        gaussian_profile(grid, 0.004, 4.0),
        gaussian_profile(grid, 30.0, 10.0),
        viscous_profile(grid, 0.1),
        viscous_profile(grid, 5.0),
        explicit_profile(grid, 0.3 * np.abs(np.sort(grid.modes))),
    ]


@pytest.mark.parametrize("r,t", SMOOTHING_GRID)
def test_smoothing_bound_constructor_outputs(small_grid, r, t):
    for profile in _constructor_outputs(small_grid):
        report = check_smoothing_bound(profile, r, t)
        assert report.holds, report


@pytest.mark.parametrize("r,t", SMOOTHING_GRID)
def test_smoothing_bound_random_profiles(small_grid, rng, r, t):
    for __ in range(1000):
        high = 10.0 ** rng.uniform(-3, 3)
        profile = DampingProfile(small_grid, _even_random(small_grid, rng, 0.0, high))
        report = check_smoothing_bound(profile, r, t)
        assert report.holds, report


@pytest.mark.parametrize("r,t", [(0.0, 1.0), (2.0, 1.0), (1.0, 0.0)])
def test_smoothing_bound_errors(small_grid, r, t):
    with pytest.raises(ValueError):
        check_smoothing_bound(constant_profile(small_grid, 1.0), r, t)


def test_omega_threshold():
    assert omega_threshold(OmegaInputs(1.0, 1.0, 4)) == pytest.approx(52.2843, rel=1e-6)
    assert omega_threshold(OmegaInputs(0.0, 0.0, 5)) == 0


def test_omega_threshold_increases_with_norms():
    values = [omega_threshold(OmegaInputs(a, 1.0, 5)) for a in (0.5, 1.0, 2.0)]
    assert values == sorted(values)


def test_omega_threshold_warns_below_four():
    with pytest.warns(UserWarning, match="p=3 < 4"):
        omega_threshold(OmegaInputs(1.0, 1.0, 3))


def test_omega_inputs_from_field(soliton_grid):
    field = RealField(soliton_grid, np.cos(np.pi * soliton_grid.x / 50))
    inputs = OmegaInputs.from_field(field, 5)
    assert inputs.a == pytest.approx(np.sqrt(50))
    assert inputs.b == pytest.approx(np.sqrt(50) * (np.pi / 50) ** 2)
    with pytest.raises(ValueError):
        OmegaInputs(-1.0, 1.0, 5)
