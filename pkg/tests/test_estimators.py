import math

import pytest

from rmp.distributions import DistributionSpec, EntryTriple
from rmp.estimators import (
    EULER_GAMMA,
    NoClosedFormError,
    closed_form,
    cross_term,
    estimate_lambda_mc,
    estimate_sigma2_mc,
    exact_discrete,
    moment_diagnostics,
    trajectory_lambda,
)

LOG2 = math.log(2.0)
PI2 = math.pi**2

CANCELLING = DistributionSpec.discrete_atoms(
    [((2.0, 5.0, 1.0), 0.5), ((1.0, -2.0, 3.0), 0.5)]
)


class TestCrossTerm:
    def test_constant_hill(self):
        assert cross_term(EntryTriple(1, 1, 1), EntryTriple(1, 1, 1)) == LOG2

    def test_zero_c(self):
        assert cross_term(EntryTriple(1, 0, 0), EntryTriple(3, 5, 7)) == 0.0

    def test_exact_cancellation(self):
        assert cross_term(EntryTriple(2, 9, 1), EntryTriple(1, -2, 4)) == -math.inf


class TestLambdaMC:
    def test_constant_exact(self):
        spec = DistributionSpec.constant_triple(1.0, 1.0, 1.0)
        r = estimate_lambda_mc(spec, 1024, seed=0)
        assert r.value == LOG2
        assert r.std_error == 0.0
        assert r.minus_inf_events == 0

    def test_cauchy_hits_log2(self):
        r = estimate_lambda_mc(DistributionSpec.cauchy_rank_one(), 10**5, seed=0)
        assert abs(r.value - LOG2) <= 3.0 * r.std_error

    def test_minus_inf_events(self):
        r = estimate_lambda_mc(CANCELLING, 1000, seed=0)
        assert r.value == -math.inf
        assert 0 < r.minus_inf_events <= r.n_samples
        assert math.isnan(r.std_error)

    def test_bitwise_deterministic(self):
        spec = DistributionSpec.exponential_rank_one(1.0)
        a = estimate_lambda_mc(spec, 200_000, seed=5, threads=1)
        b = estimate_lambda_mc(spec, 200_000, seed=5, threads=8)
        assert (a.value, a.std_error) == (b.value, b.std_error)

    def test_needs_two_samples(self):
        with pytest.raises(ValueError):
            estimate_lambda_mc(DistributionSpec.cauchy_rank_one(), 1)


class TestSigma2MC:
    def test_constant_exactly_zero(self):
        spec = DistributionSpec.constant_triple(1.0, 1.0, 1.0)
        r, ladder = estimate_sigma2_mc(spec, 1024, seed=0)
        assert r.value == 0.0
        assert ladder.c0 == 0.0 and ladder.c1 == 0.0
        assert ladder.lam == LOG2

    def test_ladder_reconstruction_is_exact(self):
        r, ladder = estimate_sigma2_mc(DistributionSpec.cauchy_rank_one(), 50_000, seed=1)
        assert r.value == ladder.c0 + 2.0 * ladder.c1
        assert r.value == ladder.sigma2

    def test_exponential_hits_target(self):
        r, _ = estimate_sigma2_mc(
            DistributionSpec.exponential_rank_one(1.0), 200_000, seed=3
        )
        assert abs(r.value - (PI2 / 6.0 - 1.0)) <= 3.0 * r.std_error

    def test_undefined_on_cancellation(self):
        r, ladder = estimate_sigma2_mc(CANCELLING, 1000, seed=0)
        assert math.isnan(r.value)
        assert r.minus_inf_events > 0
        assert ladder.lam == -math.inf

    def test_rank_one_c1_small(self):
        _, ladder = estimate_sigma2_mc(DistributionSpec.cauchy_rank_one(), 10**5, seed=2)
        assert abs(ladder.c1) <= 4.0 * ladder.c1_std_error

    def test_bitwise_deterministic(self):
        spec = DistributionSpec.uniform_rank_one(1.0, 1.0)
        a, la = estimate_sigma2_mc(spec, 150_000, seed=9, threads=1)
        b, lb = estimate_sigma2_mc(spec, 150_000, seed=9, threads=4)
        assert (a.value, a.std_error, la.c0, la.c1) == (b.value, b.std_error, lb.c0, lb.c1)


class TestExactDiscrete:
    def test_constant(self):
        lam, sigma2, ladder = exact_discrete(
            DistributionSpec.constant_triple(1.0, 1.0, 1.0)
        )
        assert lam == LOG2
        assert sigma2 == 0.0
        assert (ladder.c0, ladder.c1) == (0.0, 0.0)

    def test_binary_lambda_formula(self):
        # independent transcription of the two-point exponent formula
        al, be, p = 2.0, 3.0, 0.5
        lam, _, _ = exact_discrete(DistributionSpec.binary_hill(al, be, p))
        expected = (
            p**2 * math.log(abs(al + 1 / al**2))
            + p * (1 - p) * math.log(abs(al + 1 / be**2) * abs(be + 1 / al**2))
            + (1 - p) ** 2 * math.log(abs(be + 1 / be**2))
        )
        assert lam == pytest.approx(expected, abs=1e-14)

    def test_binary_matches_closed_form(self):
        for params in ((2.0, 3.0, 0.5), (2.0, 3.0, 0.9), (0.5, 4.0, 0.3)):
            spec = DistributionSpec.binary_hill(*params)
            lam_e, sig_e, _ = exact_discrete(spec)
            lam_c, sig_c = closed_form(spec)
            assert abs(lam_e - lam_c) <= 1e-12
            assert abs(sig_e - sig_c) <= 1e-12

    def test_cancelling_pair_gives_minus_inf(self):
        lam, sigma2, _ = exact_discrete(CANCELLING)
        assert lam == -math.inf
        assert math.isnan(sigma2)

    def test_continuous_rejected(self):
        from rmp.distributions import NotDiscreteError

        with pytest.raises(NotDiscreteError):
            exact_discrete(DistributionSpec.cauchy_rank_one())

    def test_atom_cap(self):
        atoms = [((float(i + 1), 0.0, 0.0), 1.0 / 65) for i in range(65)]
        with pytest.raises(ValueError, match="too many atoms"):
            exact_discrete(DistributionSpec.discrete_atoms(atoms))

    def test_mc_agrees_with_enumeration(self):
        spec = DistributionSpec.discrete_atoms(
            [((1.0, 0.5, 1.0), 0.25), ((2.0, 1.0, -1.0), 0.5), ((-1.5, 2.0, 0.5), 0.25)]
        )
        lam, sigma2, _ = exact_discrete(spec)
        lam_mc = estimate_lambda_mc(spec, 200_000, seed=0)
        sig_mc, _ = estimate_sigma2_mc(spec, 200_000, seed=0)
        assert abs(lam_mc.value - lam) <= 4.0 * lam_mc.std_error
        assert abs(sig_mc.value - sigma2) <= 4.0 * sig_mc.std_error


class TestClosedForm:
    def test_cauchy(self):
        assert closed_form(DistributionSpec.cauchy_rank_one()) == (LOG2, PI2 / 4.0)

    def test_exponential_theta_e(self):
        lam, sigma2 = closed_form(DistributionSpec.exponential_rank_one(math.e))
        assert lam == pytest.approx(-EULER_GAMMA, abs=1e-15)
        assert sigma2 == PI2 / 6.0 - 1.0

    def test_uniform_table(self):
        lam, sig = closed_form(DistributionSpec.uniform_rank_one(1.0, 1.0))
        assert lam == pytest.approx(LOG2 - 1.5, abs=1e-15)
        assert sig == 1.25
        lam0, sig0 = closed_form(DistributionSpec.uniform_rank_one(0.0, 1.0))
        assert lam0 == pytest.approx(2 * LOG2 - 1.5, abs=1e-15)
        assert sig0 == pytest.approx(1.25 - 2 * LOG2**2, abs=1e-15)
        lam1, sig1 = closed_form(DistributionSpec.uniform_rank_one(3.0, 0.0))
        assert lam1 == pytest.approx(2 * LOG2 - 1.5 + math.log(3.0), abs=1e-15)
        assert sig1 == sig0

    def test_uniform_off_table(self):
        with pytest.raises(NoClosedFormError, match="no closed form"):
            closed_form(DistributionSpec.uniform_rank_one(0.5, 1.0))

    def test_hill_has_none(self):
        with pytest.raises(NoClosedFormError):
            closed_form(DistributionSpec.hill_random(0.5, 2.0))


class TestTrajectoryLambda:
    def test_constant_chain(self):
        spec = DistributionSpec.constant_triple(1.0, 1.0, 1.0)
        r = trajectory_lambda(spec, 1000, 4, seed=0)
        assert r.value == pytest.approx(LOG2, rel=1e-14)
        assert r.minus_inf_events == 0

    def test_cauchy(self):
        r = trajectory_lambda(DistributionSpec.cauchy_rank_one(), 10**4, 30, seed=1)
        assert abs(r.value - LOG2) <= 4.0 * r.std_error

    def test_binary_matches_enumeration(self):
        spec = DistributionSpec.binary_hill(2.0, 3.0, 0.5)
        lam, _, _ = exact_discrete(spec)
        r = trajectory_lambda(spec, 10**4, 30, seed=2)
        assert abs(r.value - lam) <= 4.0 * r.std_error

    def test_minus_inf_counted(self):
        r = trajectory_lambda(CANCELLING, 100, 32, seed=0)
        assert r.value == -math.inf
        assert r.minus_inf_events > 0


class TestMomentDiagnostics:
    def test_constant(self):
        spec = DistributionSpec.constant_triple(1.0, 1.0, 1.0)
        d = moment_diagnostics(spec, 1024, seed=0)
        assert (d.log_plus_ac, d.log_plus_ac_se) == (LOG2, 0.0)
        assert (d.log_one_plus_ba, d.log_one_plus_ba_se) == (LOG2, 0.0)
        assert (d.cross_sq, d.cross_sq_se) == (LOG2**2, 0.0)

    def test_exponential_b_equals_a(self):
        # rank-one families have b = a, so log(1 + |b|/|a|) = log 2 per sample
        d = moment_diagnostics(DistributionSpec.exponential_rank_one(1.0), 4096, seed=1)
        assert d.log_one_plus_ba == LOG2
        assert d.log_one_plus_ba_se == 0.0

    def test_cauchy_second_moment_identity(self):
        # for rank-one laws the lag-1 cross expectation factorizes, so
        # E[(cross)^2] = sigma2 + lambda^2
        d = moment_diagnostics(DistributionSpec.cauchy_rank_one(), 10**6, seed=2)
        target = PI2 / 4.0 + LOG2**2
        assert abs(d.cross_sq - target) <= 4.0 * d.cross_sq_se

    def test_minimum_samples(self):
        with pytest.raises(ValueError):
            moment_diagnostics(DistributionSpec.cauchy_rank_one(), 50)
