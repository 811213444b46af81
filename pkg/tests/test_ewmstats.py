import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from streampca.ewmstats import (
    SingularCovarianceError,
    default_alpha_grid,
    estimate_alpha,
    ewm_init,
    ewm_loglik,
    ewm_update,
)
from streampca.linalg import frobenius_norm, jacobi_eigh
from streampca.synth import volatility_cluster


def run_recursion(x, alpha):
    """Fold the module's update over rows; returns the list of states."""
    states = [ewm_init(x[0], alpha)]
    for row in x[1:]:
        states.append(ewm_update(states[-1], row))
    return states


def brute_force_moments(x, alpha):
    """Unrolled weighted sums: m_t from the explicit convex weights, then
    S_t = sum_{k=2..t} (1 - alpha) alpha^(t-k) d_k d_k^T with d_k = x_k - m_k."""
    n, p = x.shape
    means = np.empty((n, p))
    for t in range(1, n + 1):
        w = np.empty(t)
        w[0] = alpha ** (t - 1)
        for k in range(2, t + 1):
            w[k - 1] = (1.0 - alpha) * alpha ** (t - k)
        means[t - 1] = w @ x[:t]
    covs = np.zeros((n, p, p))
    for t in range(2, n + 1):
        acc = np.zeros((p, p))
        for k in range(2, t + 1):
            d = x[k - 1] - means[k - 1]
            acc += (1.0 - alpha) * alpha ** (t - k) * np.outer(d, d)
        covs[t - 1] = acc
    return means, covs


# ---------------------------------------------------------------------------
# init / update


def test_init_scalar_example():
    state = ewm_init([5.0], 0.9)
    assert np.array_equal(state.mean, [5.0])
    assert np.array_equal(state.cov, [[0.0]])
    assert state.count == 1


def test_init_covariance_exactly_zero():
    state = ewm_init([1.0, -2.0, 3.0], 0.5)
    assert np.array_equal(state.cov, np.zeros((3, 3)))


def test_typical_practice_alpha_accepted():
    assert ewm_init([0.0], 0.9305).alpha == 0.9305


@pytest.mark.parametrize("alpha", [0.0, 1.0, -0.2, 1.5])
def test_alpha_out_of_range_rejected(alpha):
    with pytest.raises(ValueError, match="alpha"):
        ewm_init([1.0], alpha)


def test_update_scalar_example():
    # p=1, alpha=0.5: x1=1 then x=3 -> m=2, S=(1-a)(3-2)^2=0.5
    state = ewm_update(ewm_init([1.0], 0.5), [3.0])
    assert np.array_equal(state.mean, [2.0])
    assert np.array_equal(state.cov, [[0.5]])
    assert state.count == 2


def test_update_with_mean_keeps_state():
    state = ewm_init([2.5, -1.0], 0.9)
    new = ewm_update(state, state.mean)
    assert new.mean == pytest.approx(state.mean, abs=1e-15)
    assert np.max(np.abs(new.cov)) <= 1e-30


def test_update_dimension_mismatch():
    with pytest.raises(ValueError, match="dimension"):
        ewm_update(ewm_init([1.0], 0.5), [1.0, 2.0])


def test_update_rejects_non_finite():
    with pytest.raises(ValueError, match="non-finite"):
        ewm_update(ewm_init([1.0], 0.5), [np.nan])


def test_recursion_matches_brute_force_200_steps():
    rng = np.random.default_rng(8)
    x = rng.standard_normal((200, 3))
    alpha = 0.9
    states = run_recursion(x, alpha)
    _, covs = brute_force_moments(x, alpha)
    final = states[-1].cov
    assert frobenius_norm(final - covs[-1]) <= 1e-12 * max(1.0, frobenius_norm(covs[-1]))


@given(st.integers(0, 2**31 - 1), st.floats(0.05, 0.99), st.integers(2, 50))
@settings(max_examples=30, deadline=None)
def test_recursion_matches_brute_force_property(seed, alpha, length):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((length, 2))
    states = run_recursion(x, alpha)
    means, covs = brute_force_moments(x, alpha)
    for t in (1, length // 2, length - 1):
        rel = max(1.0, frobenius_norm(covs[t]))
        assert np.max(np.abs(states[t].mean - means[t])) <= 1e-12
        assert frobenius_norm(states[t].cov - covs[t]) <= 1e-12 * rel


def test_covariance_stays_psd_along_stream():
    rng = np.random.default_rng(17)
    x = rng.standard_normal((120, 3))
    for state in run_recursion(x, 0.93)[1:]:
        values = jacobi_eigh(state.cov).values
        assert values.min() >= -1e-12 * max(1.0, frobenius_norm(state.cov))


def test_mean_is_convex_combination():
    alpha, t = 0.8, 12
    # weights: alpha^(t-1) on x1, (1-alpha) alpha^(t-k) on x_k
    w = np.array([alpha ** (t - 1)] + [(1 - alpha) * alpha ** (t - k) for k in range(2, t + 1)])
    assert w.sum() == pytest.approx(1.0, abs=1e-15)
    assert np.all((w >= 0.0) & (w <= 1.0))
    rng = np.random.default_rng(4)
    x = rng.standard_normal((t, 1))
    states = run_recursion(x, alpha)
    assert states[-1].mean[0] == pytest.approx(float(w @ x[:, 0]), abs=1e-13)


# ---------------------------------------------------------------------------
# ewm_loglik


def test_loglik_constant_tail_reduces_to_logdet_sum():
    # A single early deviation, identical observations afterwards: past the
    # burn-in the prediction errors have decayed to ~alpha^t ~ 1e-5-and-falling
    # quadratic terms, so the value reduces to -1/2 sum ln S_(t-1) over the
    # included range (computed by an independent scalar recursion below).
    alpha, n, burn = 0.7, 40, 3
    x = np.full((n, 1), 2.5)
    x[1, 0] = 3.5
    value = ewm_loglik(x, alpha, burn_in=burn)
    m, s = x[0, 0], 0.0
    expected = 0.0
    for t in range(2, n + 1):
        x_t = x[t - 1, 0]
        if t > burn:
            expected += np.log(s) + (x_t - m) ** 2 / s
        m_new = (1 - alpha) * x_t + alpha * m
        d = x_t - m_new
        s = (1 - alpha) * d * d + alpha * s
        m = m_new
    assert value == pytest.approx(-0.5 * expected, rel=1e-12)


def test_loglik_constant_data_is_singular():
    x = np.full((30, 1), 1.0)
    with pytest.raises(SingularCovarianceError, match="t=4"):
        ewm_loglik(x, 0.9, burn_in=3)


def test_loglik_finite_for_two_alphas():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((200, 2))
    for alpha in (0.9, 0.97):
        assert np.isfinite(ewm_loglik(x, alpha))


def test_loglik_burn_in_validation():
    rng = np.random.default_rng(2)
    x = rng.standard_normal((50, 3))
    with pytest.raises(ValueError, match="burn_in"):
        ewm_loglik(x, 0.9, burn_in=3)


def test_loglik_default_burn_in_is_ten_p():
    rng = np.random.default_rng(3)
    x = rng.standard_normal((120, 2))
    assert ewm_loglik(x, 0.9) == ewm_loglik(x, 0.9, burn_in=20)


def test_loglik_order_sensitive():
    rng = np.random.default_rng(5)
    x = volatility_cluster(300, 2, persistence=0.95, seed=5)
    permuted = x[rng.permutation(300)]
    assert ewm_loglik(x, 0.9) != ewm_loglik(permuted, 0.9)


def test_loglik_singular_names_observation():
    # rank-1 data: S_t never reaches full rank, first included term fails
    t_axis = np.arange(60, dtype=float) + 1.0
    x = np.column_stack([t_axis, 2.0 * t_axis])
    with pytest.raises(SingularCovarianceError) as excinfo:
        ewm_loglik(x, 0.9, burn_in=5)
    assert excinfo.value.t == 6


# ---------------------------------------------------------------------------
# estimate_alpha


def test_single_point_grid():
    rng = np.random.default_rng(6)
    x = rng.standard_normal((100, 2))
    alpha, curve = estimate_alpha(x, [0.9])
    assert alpha == 0.9
    assert curve.shape == (1,)


def test_curve_matches_grid_order():
    rng = np.random.default_rng(7)
    x = rng.standard_normal((100, 2))
    grid = [0.85, 0.9, 0.95]
    alpha, curve = estimate_alpha(x, grid)
    assert curve.shape == (3,)
    for g, v in zip(grid, curve):
        assert v == ewm_loglik(x, g)
    assert alpha in grid


def test_heteroskedastic_argmax_interior_and_reproducible():
    x = volatility_cluster(1200, 3, persistence=0.97, seed=7)
    grid = 0.80 + 0.01 * np.arange(20)
    a1, c1 = estimate_alpha(x, grid, burn_in=30)
    a2, c2 = estimate_alpha(x, grid, burn_in=30)
    assert a1 == a2
    assert np.array_equal(c1, c2)
    assert grid[0] < a1 < grid[-1]
    assert np.isfinite(c1).all()


def test_grid_validation():
    rng = np.random.default_rng(9)
    x = rng.standard_normal((60, 1))
    with pytest.raises(ValueError, match="between 0 and 1"):
        estimate_alpha(x, [0.5, 1.5])
    with pytest.raises(ValueError, match="ascending"):
        estimate_alpha(x, [0.9, 0.8])
    with pytest.raises(ValueError, match="non-empty"):
        estimate_alpha(x, [])


def test_default_grid_shape():
    grid = default_alpha_grid()
    assert grid[0] == 0.5
    assert grid[-1] == 0.999
    assert grid.shape == (500,)
    assert np.all(np.diff(grid) > 0.0)


def test_tie_breaks_to_lowest_index():
    # two identical grid points produce identical likelihoods; argmax -> first
    rng = np.random.default_rng(10)
    x = rng.standard_normal((80, 1))
    alpha, curve = estimate_alpha(x, [0.9, 0.9])
    assert alpha == 0.9
    assert curve[0] == curve[1]
