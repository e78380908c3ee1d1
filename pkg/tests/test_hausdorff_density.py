from fractions import Fraction
from unittest.mock import patch

import pytest

import hausdorff_density
from errors import DomainError, QuadratureError
from hausdorff_density import (
    QUAD_ATTEMPTS,
    QUAD_DEGREE,
    closed_form_moment,
    density_moment_quadrature,
    is_negative_near,
    negativity_witness,
    positivity_certificate,
    sample_density,
    weight_build,
    weight_eval,
    weight_spec_of,
)
from moment_core import ModuleParams, RootBranch, tensor_moment_closed
from numeric import real_context, to_real

ctx = real_context()


def close(x, y, rel=1e-8, absolute=1e-8):
    return abs(x - y) <= max(absolute, rel * abs(y))


# ---------- weight_build ----------

@pytest.mark.parametrize("a0, a1, a2, case", [
    (-1, -2, -3, RootBranch.DISTINCT_REAL),
    (-1, -1, -2, RootBranch.DOUBLE_REAL),
    (-2, -1, -1, RootBranch.DOUBLE_REAL),
    (-1, -1, -1, RootBranch.TRIPLE_ROOT),
])
def test_case_selection(a0, a1, a2, case):
    assert weight_build(a0, a1, a2).case_tag is case


def test_double_root_is_reordered():
    spec = weight_build(-2, -1, -1)
    assert spec.a0 == spec.a1 == -1
    assert spec.a2 == -2


def test_complex_case_theta():
    spec = weight_build(-1, ctx.mpc(-2, 1), ctx.mpc(-2, -1))
    assert spec.case_tag is RootBranch.COMPLEX_PAIR
    assert spec.a == -2 and spec.b == 1
    assert ctx.almosteq(spec.theta, 3 * ctx.pi / 4)


@pytest.mark.parametrize("a0, a1, a2, hypothesis", [
    (Fraction(1, 2), -1, -2, "a0"),
    (-1, Fraction(3, 10), -2, "a1, a2"),
    (-1, ctx.mpc(0.5, 1), ctx.mpc(0.5, -1), "a1, a2"),
])
def test_hypothesis_violations_are_named(a0, a1, a2, hypothesis):
    with pytest.raises(DomainError, match=hypothesis):
        weight_build(a0, a1, a2)


def test_non_conjugate_pair_is_rejected():
    with pytest.raises(DomainError, match="conjugate"):
        weight_build(-1, ctx.mpc(-2, 1), ctx.mpc(-2, 2))


# ---------- weight_eval ----------

@pytest.mark.parametrize("t", [Fraction(1, 10), Fraction(1, 2), Fraction(9, 10), 1])
def test_distinct_real_weight(t):
    spec = weight_build(-1, -2, -3)
    assert ctx.almosteq(weight_eval(spec, t), to_real(1 - t, ctx) ** 2 / 2, abs_eps=1e-40)


@pytest.mark.parametrize("t", [Fraction(1, 100), Fraction(1, 3), Fraction(4, 5)])
def test_double_real_weight(t):
    spec = weight_build(-1, -1, -2)
    t_r = to_real(t, ctx)
    assert ctx.almosteq(weight_eval(spec, t), t_r - 1 - ctx.log(t_r), abs_eps=1e-40)


def test_triple_root_weight():
    spec = weight_build(-1, -1, -1)
    assert weight_eval(spec, 1) == 0
    assert ctx.almosteq(weight_eval(spec, ctx.exp(-1)), ctx.mpf(1) / 2)


def test_complex_weight_on_the_boundary(params_2_2):
    spec = weight_spec_of(params_2_2)
    b = 1 / ctx.sqrt(2)
    for t in (ctx.mpf("0.001"), ctx.mpf("0.3"), ctx.mpf("0.75")):
        want = (ctx.mpf(3) / 2) / b ** 2 * (1 - ctx.sin(b * ctx.log(t) + spec.theta))
        assert ctx.almosteq(weight_eval(spec, t), want, rel_eps=1e-40, abs_eps=1e-45)


@pytest.mark.parametrize("t", [0, -1, Fraction(3, 2)])
def test_weight_outside_unit_interval(t):
    with pytest.raises(DomainError):
        weight_eval(weight_build(-1, -2, -3), t)


# ---------- Tensor densities ----------

def test_tensor_spec_cases(params_1_1, params_2_2, params_3_3):
    assert weight_spec_of(params_1_1).case_tag is RootBranch.DISTINCT_REAL
    assert weight_spec_of(ModuleParams(1, 3)).case_tag is RootBranch.DOUBLE_REAL
    assert weight_spec_of(params_2_2).case_tag is RootBranch.COMPLEX_PAIR
    spec = weight_spec_of(params_3_3)
    assert spec.a == -ctx.mpf(1) / 2
    assert ctx.almosteq(spec.b, ctx.sqrt(15) / 6)


def test_junction_spec_is_triple():
    params = ModuleParams.of(3 + ctx.sqrt(3), 3 - ctx.sqrt(3), mode="real")
    assert weight_spec_of(params).case_tag is RootBranch.TRIPLE_ROOT


def test_no_density_outside_the_half_plane(params_15_10, params_6_6):
    with pytest.raises(DomainError, match="no representing density"):
        weight_spec_of(params_15_10)
    with pytest.raises(DomainError, match="no representing density"):
        weight_spec_of(params_6_6)


def test_total_mass_is_the_first_moment(subnormal_params):
    spec = weight_spec_of(subnormal_params)
    assert ctx.almosteq(closed_form_moment(spec, 0), 1, rel_eps=1e-40)
    for n in (1, 4, 17):
        want = tensor_moment_closed(subnormal_params, n).value
        assert ctx.almosteq(closed_form_moment(spec, n), to_real(want, ctx), rel_eps=1e-40)


# ---------- Quadrature ----------

@pytest.mark.parametrize("roots, n, expected", [
    ((-1, -2, -3), 0, ctx.mpf(1) / 6),
    ((-1, -1, -1), 1, ctx.mpf(1) / 8),
    ((-1, -1, -2), 2, ctx.mpf(1) / 36),
])
def test_quadrature_of_unscaled_reciprocal_cubics(roots, n, expected):
    assert close(density_moment_quadrature(weight_build(*roots), n), expected)


def test_quadrature_reproduces_unit_mass(params_2_2):
    assert close(density_moment_quadrature(weight_spec_of(params_2_2), 0), 1)


@pytest.mark.parametrize("n", [0, 1, 5, 20])
def test_quadrature_reproduces_tensor_moments(subnormal_params, n):
    spec = weight_spec_of(subnormal_params)
    want = tensor_moment_closed(subnormal_params, n).value
    assert close(density_moment_quadrature(spec, n), to_real(want, ctx))


@pytest.mark.slow
def test_quadrature_reproduces_all_low_moments(subnormal_params):
    spec = weight_spec_of(subnormal_params)
    for n in range(21):
        assert close(density_moment_quadrature(spec, n), closed_form_moment(spec, n))


def test_slowly_decaying_density_uses_doubling_panels():
    params = ModuleParams(Fraction(1, 100), 1000)
    spec = weight_spec_of(params)
    assert spec.case_tag is RootBranch.DISTINCT_REAL
    horizon = ctx.mpf(2) ** 15
    panels = hausdorff_density._panels(spec, horizon)
    assert len(panels) < 20
    assert panels[-1] == horizon
    assert close(density_moment_quadrature(spec, 0), 1)


def test_oscillating_panels_stop_at_half_periods(params_2_2, params_1_1):
    # on the boundary the sine term never becomes negligible
    spec = weight_spec_of(params_2_2)
    assert hausdorff_density._oscillation_end(spec) == spec.ctx.inf
    panels = hausdorff_density._panels(spec, ctx.mpf(40))
    width = min(4, ctx.pi / spec.b)
    assert all(ctx.almosteq(b - a, width) for a, b in zip(panels[4:-2], panels[5:-1]))
    assert hausdorff_density._oscillation_end(weight_spec_of(params_1_1)) == 0


def test_quadrature_retries_with_higher_degree(caplog):
    spec = weight_build(-1, -2, -3)
    failure = QuadratureError(None, 1e-3, 1e-10)
    with patch.object(hausdorff_density, "_integrate",
                      side_effect=[failure, failure, (ctx.mpf(1) / 6, 1e-20)]) as integrate:
        value = density_moment_quadrature(spec, 0)

    assert value == ctx.mpf(1) / 6
    assert [c.args[3] for c in integrate.call_args_list] == [QUAD_DEGREE, QUAD_DEGREE + 2, QUAD_DEGREE + 4]
    assert len([r for r in caplog.records if "Quadrature retrying" in r.message]) == 2


def test_quadrature_gives_up_after_max_attempts():
    spec = weight_build(-1, -2, -3)
    with patch.object(hausdorff_density, "_integrate",
                      side_effect=QuadratureError(ctx.mpf(1) / 6, 1e-3, 1e-10)) as integrate:
        with pytest.raises(QuadratureError) as exc:
            density_moment_quadrature(spec, 0)
    assert integrate.call_count == QUAD_ATTEMPTS
    assert exc.value.estimate == ctx.mpf(1) / 6


def test_quadrature_validates_arguments():
    with pytest.raises(DomainError):
        density_moment_quadrature(weight_build(-1, -2, -3), 0, tol=0)
    with pytest.raises(DomainError):
        density_moment_quadrature(weight_build(-1, -2, -3), -1)


# ---------- Positivity and sign changes ----------

def test_sampling_grid():
    samples = sample_density(weight_build(-1, -2, -3), grid_density=10, decades=3)
    assert len(samples) == 31
    assert samples[-1][0] == 1
    assert all(a[0] < b[0] for a, b in zip(samples, samples[1:]))


@pytest.mark.parametrize("s1, s2", [(1, 1), (2, 2), (1, 3), (Fraction(3, 2), 25)])
def test_subnormal_densities_are_non_negative(s1, s2):
    report = positivity_certificate(weight_spec_of(ModuleParams(s1, s2)))
    assert report.ok
    assert report.points >= 12 * 50
    assert report.min_value > -1e-14


def test_bergman_square_density_vanishes_at_one(params_1_1):
    report = positivity_certificate(weight_spec_of(params_1_1))
    assert abs(report.min_value) < 1e-12
    assert report.argmin > ctx.mpf("0.9")


def test_positivity_contradiction_is_reported(params_3_3, caplog):
    report = positivity_certificate(weight_spec_of(params_3_3))
    assert report.contradiction
    assert any(r.levelname == "ERROR" for r in caplog.records)


def test_witness_in_the_complex_strip(params_3_3):
    spec = weight_spec_of(params_3_3)
    witness = negativity_witness(spec)
    assert witness is not None
    assert 0 < witness.t < 1
    assert witness.value < 0
    assert weight_eval(spec, witness.t) < 0
    assert is_negative_near(spec, witness.t)


def test_no_witness_on_or_beyond_the_boundary(params_2_2):
    assert negativity_witness(weight_spec_of(params_2_2)) is None
    assert negativity_witness(weight_build(-1, ctx.mpc(-2, 1), ctx.mpc(-2, -1))) is None


@pytest.mark.parametrize("a", [-2, Fraction(-3, 2), -1, Fraction(-4, 5), Fraction(-1, 2), Fraction(-1, 10)])
@pytest.mark.parametrize("b", [Fraction(1, 5), 1, 3])
def test_sign_dichotomy(a, b):
    a_r = to_real(Fraction(a), ctx)
    b_r = to_real(Fraction(b), ctx)
    spec = weight_build(-1, ctx.mpc(a_r, b_r), ctx.mpc(a_r, -b_r))
    witness = negativity_witness(spec)
    assert (witness is not None) is (a > -1)
    if witness is not None:
        assert is_negative_near(spec, witness.t)
        assert witness.certified


def test_density_witness_is_rechecked_at_higher_precision(params_3_3, caplog):
    spec = weight_spec_of(params_3_3)
    witness = negativity_witness(spec)
    assert witness.certified

    # a value far from the high-precision one is not certified
    assert not hausdorff_density._certified_negative(spec, witness.t, 10 * witness.value)
    assert any(r.levelname == "WARNING" and "not certified at 120 digits" in r.message for r in caplog.records)


def test_witness_needs_complex_case():
    with pytest.raises(DomainError):
        negativity_witness(weight_build(-1, -2, -3))
