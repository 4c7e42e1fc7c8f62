import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from phidiv import framework as fw
from phidiv.framework import BDViolation, DivergenceEstimate, PhiSpec
from phidiv.measures import named_constants, parse_measure, phi_spec_for
from phidiv.pmf import ProbabilityVector

KL = phi_spec_for("kl")
L2 = phi_spec_for("l2")


def _simplex(draw_values):
    v = np.asarray(draw_values, dtype=float)
    return v / v.sum()


positive_vectors = st.integers(2, 7).flatmap(
    lambda r: arrays(np.float64, r, elements=st.floats(0.05, 1.0)).map(_simplex))


def _mc_scaled_variance(estimator, p, n, R, seed):
    """Empirical variance of sqrt(n) * estimator(p_hat) using numpy's multinomial sampler."""
    counts = np.random.default_rng(seed).multinomial(n, p, size=R)
    vals = estimator(counts / n)
    return n * np.var(vals, ddof=1)


class TestJFunctional:
    def test_kl_reference_value(self, p, q):
        assert fw.j_functional(p, q, KL) == pytest.approx(0.04012, abs=5e-5)

    def test_kl_self_is_zero(self, p):
        assert fw.j_functional(p, p, KL) == pytest.approx(0.0, abs=1e-15)

    def test_l2_direct_sum(self, p, q):
        assert fw.j_functional(p, q, L2) == pytest.approx(0.13 ** 2 + 0.07 ** 2 + 0.06 ** 2, abs=1e-15)

    def test_bd_violation_names_label(self, q):
        z = ProbabilityVector(q.support, (0.5, 0.0, 0.5))
        with pytest.raises(BDViolation, match="c2") as info:
            fw.j_functional(z, q, KL)
        assert info.value.index == 1 and info.value.argument == "p"

    def test_l2_tolerates_zero(self, q):
        z = ProbabilityVector(q.support, (1.0, 0.0, 0.0))
        assert fw.j_functional(z, q, L2) == pytest.approx(0.73 ** 2 + 0.32 ** 2 + 0.41 ** 2)

    def test_batched(self, p, q):
        P = np.stack([p.probs, q.probs])
        out = fw.j_functional(P, q.probs, KL)
        assert out.shape == (2,)
        assert out[0] == pytest.approx(fw.j_functional(p, q, KL))
        assert out[1] == pytest.approx(0.0, abs=1e-15)

    @given(positive_vectors)
    def test_kl_self_zero_property(self, v):
        assert abs(fw.j_functional(v, v, KL)) < 1e-14


class TestGradients:
    def test_kl_at_equality(self, p):
        np.testing.assert_allclose(fw.gradient_weights(p, p, KL), 1.0)

    def test_l2_first(self, p, q):
        np.testing.assert_allclose(fw.gradient_weights(p, q, L2, "first"), [0.26, -0.14, -0.12], atol=1e-15)

    def test_renyi_half_at_equality(self, p):
        g = fw.gradient_weights(p, p, phi_spec_for("renyi:0.5"))
        np.testing.assert_allclose(g, -1.0, atol=1e-12)

    def test_bad_argument(self, p, q):
        with pytest.raises(ValueError):
            fw.gradient_weights(p, q, KL, "third")

    @pytest.mark.parametrize("measure", ["kl", "l2", "tsallis:0.99", "renyi:0.99", "tsallis:2.5", "renyi:0.5"])
    @pytest.mark.parametrize("argument", ["first", "second"])
    def test_matches_numerical_derivative(self, p, q, measure, argument):
        spec = phi_spec_for(measure)
        g = fw.gradient_weights(p, q, spec, argument)
        h = 1e-6
        base = np.array(p.probs if argument == "first" else q.probs)
        for j in range(3):
            up, dn = base.copy(), base.copy()
            up[j] += h
            dn[j] -= h
            if argument == "first":
                fd = (fw.j_functional(up, q.probs, spec) - fw.j_functional(dn, q.probs, spec)) / (2 * h)
            else:
                fd = (fw.j_functional(p.probs, up, spec) - fw.j_functional(p.probs, dn, spec)) / (2 * h)
            assert abs(fd - g[j]) <= 1e-5 * max(abs(g[j]), 1e-3)


class TestAsymptoticVariance:
    def test_constant_gradient(self, p):
        assert fw.asymptotic_variance(p, [3.0, 3.0, 3.0]) == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("k", [0, 1, 2])
    def test_indicator_is_bernoulli(self, p, k):
        g = np.zeros(3)
        g[k] = 1.0
        assert fw.asymptotic_variance(p, g) == pytest.approx(p.probs[k] * (1 - p.probs[k]), abs=1e-15)

    def test_length_mismatch(self, p):
        with pytest.raises(ValueError):
            fw.asymptotic_variance(p, [1.0, 2.0])

    @settings(max_examples=200)
    @given(positive_vectors, st.data())
    def test_nonneg_shift_invariant_and_pairwise_identity(self, v, data):
        g = np.array(data.draw(st.lists(st.floats(-50, 50), min_size=v.size, max_size=v.size)))
        c = data.draw(st.floats(-100, 100))
        V = fw.asymptotic_variance(v, g)
        assert V >= 0
        assert fw.asymptotic_variance(v, g + c) == pytest.approx(V, abs=1e-9 * max(1.0, np.max(np.abs(g)) ** 2))
        cross = sum(v[i] * v[j] * g[i] * g[j] for i in range(v.size) for j in range(v.size) if i != j)
        explicit = np.sum(v * (1 - v) * g ** 2) - cross
        assert V == pytest.approx(explicit, abs=1e-12 * max(1.0, np.sum(v * g ** 2)))

    @settings(max_examples=100)
    @given(positive_vectors, st.data())
    def test_equals_covariance_quadratic_form(self, v, data):
        g = np.array(data.draw(st.lists(st.floats(-10, 10), min_size=v.size, max_size=v.size)))
        root = np.sqrt(v)
        w = root * g
        assert fw.asymptotic_variance(v, g) == pytest.approx(w @ fw.multinomial_covariance(v) @ w, abs=1e-12)

    @pytest.mark.slow
    def test_kl_monte_carlo_oracle(self, p, q):
        V = fw.asymptotic_variance(p, fw.gradient_weights(p, q, KL))
        emp = _mc_scaled_variance(lambda P: fw.j_functional(P, q.probs, KL), p.probs, 20000, 5000, 1)
        assert abs(emp - V) / V < 0.10


class TestBoundConstants:
    def test_kl_a2(self, p, q):
        assert fw.as_bound_constants(p, q, KL).A2 == pytest.approx(3.1164, abs=1e-3)
        assert fw.as_bound_constants(p, q, KL).A2 == pytest.approx(sum(np.array([0.4, 0.25, 0.35]) / [0.27, 0.32, 0.41]))

    def test_l2_a1(self, p, q):
        assert fw.as_bound_constants(p, q, L2).A1 == pytest.approx(0.52, abs=1e-15)

    def test_equal_args(self, p):
        A = fw.as_bound_constants(p, p, KL)
        assert A.A1 == A.A3 and A.A2 == A.A4


class TestSymmetrized:
    def test_kl_reference_value(self, p, q):
        assert fw.symmetrized_value(p, q, KL) == pytest.approx(0.03893, abs=5e-5)

    def test_tsallis_reference_value(self, p, q):
        assert fw.symmetrized_value(p, q, phi_spec_for("tsallis:0.99")) == pytest.approx(0.03854, abs=5e-5)

    def test_swap(self, p, q):
        for m in ("kl", "tsallis:0.7", "renyi:2", "l2"):
            spec = phi_spec_for(m)
            assert fw.symmetrized_value(p, q, spec) == fw.symmetrized_value(q, p, spec)

    def test_equal_args(self, p):
        assert fw.symmetrized_value(p, p, L2) == fw.j_functional(p, p, L2)

    @pytest.mark.parametrize("mode", ["exact", "split"])
    def test_degenerate(self, p, mode):
        vp, vq = fw.symmetrized_variance(p, p, KL, mode)
        assert vp == pytest.approx(0, abs=1e-15) and vq == pytest.approx(0, abs=1e-15)

    def test_split_mode_matches_closed_forms(self, p, q):
        nc = named_constants("kl", p, q)
        vp, vq = fw.symmetrized_variance(p, q, KL, "split")
        assert vp == pytest.approx((nc.V[0] + nc.V[3]) / 4, abs=1e-12)
        assert vq == pytest.approx((nc.V[1] + nc.V[2]) / 4, abs=1e-12)

    def test_bad_mode(self, p, q):
        with pytest.raises(ValueError):
            fw.symmetrized_variance(p, q, KL, "approx")

    @pytest.mark.slow
    def test_exact_mode_monte_carlo_oracle(self, p, q):
        vp, _ = fw.symmetrized_variance(p, q, KL, "exact")
        emp = _mc_scaled_variance(lambda P: fw.symmetrized_value(P, q.probs, KL), p.probs, 20000, 5000, 2)
        assert abs(emp - vp) / vp < 0.10


class TestMultinomialCovariance:
    def test_two_point(self):
        np.testing.assert_allclose(fw.multinomial_covariance([0.5, 0.5]), [[0.5, -0.5], [-0.5, 0.5]])

    def test_null_vector_and_psd(self, p):
        S = fw.multinomial_covariance(p)
        np.testing.assert_allclose(S @ np.sqrt(p.probs), 0.0, atol=1e-15)
        np.testing.assert_allclose(S, S.T)
        assert np.linalg.eigvalsh(S).min() >= -1e-12

    def test_zero_rejected(self):
        with pytest.raises(BDViolation):
            fw.multinomial_covariance([1.0, 0.0])


class TestPhiSpec:
    def test_derivative_check_catches_wrong_partial(self):
        bad = PhiSpec(lambda s, t: s * t, lambda s, t: t, lambda s, t: 2 * s)
        assert bad.check_derivatives(np.array([0.3]), np.array([0.6])) > 1
        good = PhiSpec(lambda s, t: s * t, lambda s, t: t, lambda s, t: s)
        assert good.check_derivatives(np.array([0.3]), np.array([0.6])) < 1

    def test_custom_kernel_through_engine(self, p, q):
        # squared Hellinger: phi = (sqrt(s) - sqrt(t))^2
        hel = PhiSpec(
            lambda s, t: (np.sqrt(s) - np.sqrt(t)) ** 2,
            lambda s, t: 1 - np.sqrt(t / s),
            lambda s, t: 1 - np.sqrt(s / t),
        )
        expected = np.sum((np.sqrt(p.probs) - np.sqrt(q.probs)) ** 2)
        assert fw.j_functional(p, q, hel) == pytest.approx(expected)


@pytest.mark.slow
def test_one_sample_clt_kl(p, q):
    n, R = 20000, 2000
    V = fw.asymptotic_variance(p, fw.gradient_weights(p, q, KL))
    counts = np.random.default_rng(3).multinomial(n, p.probs, size=R)
    z = np.sqrt(n / V) * (fw.j_functional(counts / n, q.probs, KL) - fw.j_functional(p, q, KL))
    assert abs(z.mean()) < 0.1
    assert abs(z.std(ddof=1) - 1) < 0.1


class TestDivergenceEstimate:
    def test_stderr(self):
        e = DivergenceEstimate(0.04, 0.08, 0.09, 100, 400, "kl")
        assert e.stderr == pytest.approx(np.sqrt(0.08 / 100 + 0.09 / 400))

    def test_one_sided_stderr(self):
        e = DivergenceEstimate(0.04, 0.08, 0.0, 100, None, "kl", "one-sample-p")
        assert e.stderr == pytest.approx(np.sqrt(0.0008))

    def test_validation(self):
        with pytest.raises(ValueError):
            DivergenceEstimate(0.0, -1.0, 0.0, 10, None, "kl")
        with pytest.raises(ValueError):
            DivergenceEstimate(0.0, 0.0, 0.0, None, None, "kl")

    def test_degenerate_flag(self):
        assert DivergenceEstimate(0.0, 1e-15, 1e-14, 10, 10, "kl").degenerate
        assert not DivergenceEstimate(0.0, 1e-15, 1e-3, 10, 10, "kl").degenerate
