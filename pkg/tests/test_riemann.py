import math

import pytest
from hypothesis import given, settings, strategies as st

from twoflux.analysis import ProblemSetup, UnsupportedGeometryError, is_overcompressive
from twoflux.fluxlang import parse
from twoflux.riemann import (
    FanOverlapError,
    RarefactionConstructionError,
    max_valid_eps,
    rarefaction_value,
    sample_bounded,
    sample_solution,
    solve_riemann,
)
from twoflux.shadow import ROW_M6, classify_shadow, ShadowWaveNet

DOMAIN = (-5.0, 5.0)

SQRT_L = parse("sqrt(u^2+1)")
SQRT_R = parse("-sqrt(u^2+1)")

EX1_L = parse("(1+2*u^2)/(1+u^2)")
EX1_R = parse("-(1+2*u^2)/(1+u^2)")


def sqrt_setup(u_l: float, u_r: float) -> ProblemSetup:
    return ProblemSetup(SQRT_L, SQRT_R, u_l, u_r, DOMAIN)


def example1_fan():
    return solve_riemann(ProblemSetup(EX1_L, EX1_R, 1.0, 1.0, DOMAIN))


class TestSolveRiemann:
    def test_case_ii_composition(self):
        fan = solve_riemann(sqrt_setup(1.0, -1.0))
        assert fan.case_id == "ii"
        assert fan.back is None
        assert fan.fwd is not None
        # shadow wave between u_l and theta_r = 0
        assert fan.sdw.u0 == 1.0
        assert abs(fan.sdw.u1) <= 1e-9
        assert fan.sdw.profile.kappa == pytest.approx(math.sqrt(2.0) + 1.0, abs=1e-9)
        # forward fan speeds [0, f_r'(-1)] = [0, 1/sqrt(2)]
        assert fan.fwd.speed_lo == 0.0
        assert fan.fwd.speed_hi == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-12)

    def test_case_i_pure_shadow_wave(self):
        fan = example1_fan()
        assert fan.case_id == "i"
        assert fan.back is None and fan.fwd is None
        assert fan.sdw.profile.kappa == pytest.approx(3.0, abs=1e-12)

    def test_data_at_extrema_is_case_i(self):
        fan = solve_riemann(sqrt_setup(0.0, 0.0))
        assert fan.case_id == "i"
        # kappa = f_l(theta_l) - f_r(theta_r) = 1 - (-1)
        assert fan.sdw.profile.kappa == pytest.approx(2.0, abs=1e-9)

    def test_case_iii_composition(self):
        fan = solve_riemann(sqrt_setup(-1.0, 1.0))
        assert fan.case_id == "iii"
        assert fan.back is not None and fan.fwd is None
        assert fan.back.speed_lo == pytest.approx(-1.0 / math.sqrt(2.0), abs=1e-12)
        assert fan.back.speed_hi == 0.0
        assert fan.sdw.profile.kappa == pytest.approx(1.0 + math.sqrt(2.0), abs=1e-9)

    def test_case_iv_composition(self):
        fan = solve_riemann(sqrt_setup(-1.0, -1.0))
        assert fan.case_id == "iv"
        assert fan.back is not None and fan.fwd is not None
        assert fan.sdw.profile.kappa == pytest.approx(2.0, abs=1e-9)
        assert fan.sdw.profile.row_id == ROW_M6

    def test_affine_pair_collapses_to_pure_shadow_wave(self):
        setup = ProblemSetup(parse("u"), parse("-u"), 1.0, 1.0, DOMAIN)
        fan = solve_riemann(setup)
        assert fan.case_id == "i"
        assert fan.back is None and fan.fwd is None
        p = fan.sdw.profile
        assert p.kappa == 2.0
        assert (p.alpha, p.beta) == (1.0, 1.0)
        assert p.xi0 == pytest.approx(1.0, rel=1e-9)
        assert p.xi1 == pytest.approx(1.0, rel=1e-9)

    def test_affine_wrong_slopes_rejected(self):
        setup = ProblemSetup(parse("-u"), parse("u"), 1.0, 1.0, DOMAIN)
        with pytest.raises(UnsupportedGeometryError):
            solve_riemann(setup)

    def test_geometry_b_rejected(self):
        setup = ProblemSetup(parse("u^2+1"), parse("-1/(u^2+1)"), 1.0, 1.0, DOMAIN)
        with pytest.raises(UnsupportedGeometryError):
            solve_riemann(setup)

    def test_nonmonotone_derivative_rejected(self):
        # concave-type but not concave right flux: f_r' has an interior
        # extremum at -1/sqrt(3), so a fan down to u_r=-2 is composite
        setup = ProblemSetup(parse("u^2+1"), parse("1/(2*(u^2+1))"), 1.0, -2.0, DOMAIN)
        with pytest.raises(RarefactionConstructionError):
            solve_riemann(setup)

    def test_narrow_interval_on_type_flux_works(self):
        setup = ProblemSetup(parse("u^2+1"), parse("1/(2*(u^2+1))"), 1.0, -0.5, DOMAIN)
        fan = solve_riemann(setup)
        assert fan.case_id == "ii"
        assert fan.fwd is not None

    @given(
        u_l=st.floats(-3.0, 3.0, allow_nan=False),
        u_r=st.floats(-3.0, 3.0, allow_nan=False),
    )
    @settings(max_examples=60, deadline=None)
    def test_case_partition_total_and_exclusive(self, u_l, u_r):
        fan = solve_riemann(sqrt_setup(u_l, u_r))
        expected = {
            (True, True): "i",
            (True, False): "ii",
            (False, True): "iii",
            (False, False): "iv",
        }[(u_l >= fan_theta_l(), u_r >= fan_theta_r())]
        assert fan.case_id == expected
        assert (fan.back is not None) == (fan.case_id in ("iii", "iv") and abs(u_l) > 1e-12)
        assert (fan.fwd is not None) == (fan.case_id in ("ii", "iv") and abs(u_r) > 1e-12)

    @given(
        u_l=st.floats(-3.0, 3.0, allow_nan=False),
        u_r=st.floats(-3.0, 3.0, allow_nan=False),
    )
    @settings(max_examples=60, deadline=None)
    def test_waves_never_cross_origin_and_sdw_overcompressive(self, u_l, u_r):
        fan = solve_riemann(sqrt_setup(u_l, u_r))
        if fan.back is not None:
            assert fan.back.speed_hi <= 0.0
        if fan.fwd is not None:
            assert fan.fwd.speed_lo >= 0.0
        assert is_overcompressive(SQRT_L, SQRT_R, fan.sdw.u0, fan.sdw.u1)


def fan_theta_l() -> float:
    return 0.0  # sqrt(u^2+1) has its minimum at 0


def fan_theta_r() -> float:
    return 0.0


class TestRarefactionValue:
    def test_case_ii_interior_value(self):
        fan = solve_riemann(sqrt_setup(1.0, -1.0))
        # invert -u/sqrt(1+u^2) = 1/2 analytically: u = -1/2 / sqrt(3/4)
        assert rarefaction_value(fan.fwd, 0.5) == pytest.approx(
            -0.5 / math.sqrt(0.75), abs=1e-11
        )

    def test_edge_value(self):
        fan = solve_riemann(sqrt_setup(1.0, -1.0))
        assert rarefaction_value(fan.fwd, fan.fwd.speed_lo) == pytest.approx(
            fan.fwd.u_edgeslow, abs=1e-11
        )

    def test_burgers_type_identity(self):
        # f' = u inverts to the identity
        setup = ProblemSetup(parse("u^2/2"), parse("-u^2/2-1"), 1.0, 1.0, (-4.0, 4.0))
        fan = solve_riemann(ProblemSetup(parse("u^2/2+1"), SQRT_R, -1.0, 0.0, (-4.0, 4.0)))
        assert fan.back is not None
        assert rarefaction_value(fan.back, -0.3) == pytest.approx(-0.3, abs=1e-11)

    def test_outside_fan_rejected(self):
        fan = solve_riemann(sqrt_setup(1.0, -1.0))
        with pytest.raises(ValueError):
            rarefaction_value(fan.fwd, 0.9)

    def test_edge_continuity(self):
        fan = solve_riemann(sqrt_setup(-1.0, 1.0))
        back = fan.back
        gaps = [
            abs(rarefaction_value(back, back.speed_lo + d) - back.u_edgeslow)
            for d in (1e-3, 1e-5, 1e-7)
        ]
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[-1] <= 1e-5


class TestSampleSolution:
    def test_case_ii_profile(self):
        fan = solve_riemann(sqrt_setup(1.0, -1.0))
        eps = 1e-6
        assert sample_solution(fan, 0.5 * 2.0, 2.0, eps) == pytest.approx(
            -0.5 / math.sqrt(0.75), abs=1e-10
        )
        assert sample_solution(fan, -1.0, 1.0, eps) == 1.0
        assert sample_solution(fan, 0.9, 1.0, eps) == -1.0  # beyond fast edge

    def test_example_one_fan_interior(self):
        fan = example1_fan()
        eps = 1e-4
        t = 0.7
        assert sample_solution(fan, eps * t / 2.0, t, eps) == pytest.approx(
            1.0 + 1.5 / eps, rel=1e-12
        )

    def test_eps_overlap_guard(self):
        fan = solve_riemann(sqrt_setup(1.0, -1.0))
        bound = max_valid_eps(fan)
        assert bound == pytest.approx(0.5 / math.sqrt(2.0), abs=1e-12)
        with pytest.raises(FanOverlapError):
            sample_solution(fan, 0.1, 1.0, bound * 1.01)

    def test_self_similarity(self):
        fan = solve_riemann(sqrt_setup(-1.0, -1.0))
        eps = 1e-8
        for lam in (2.0, 5.0, 11.0):
            for x in (-0.9, -0.3, 0.2, 0.6):
                a = sample_solution(fan, x, 1.0, eps)
                b = sample_solution(fan, lam * x, lam, eps)
                assert a == pytest.approx(b, abs=1e-9)

    def test_bounded_part_drops_spike(self):
        fan = example1_fan()
        assert sample_bounded(fan, 1e-9, 1.0) == 1.0
        assert sample_bounded(fan, -1e-9, 1.0) == 1.0
