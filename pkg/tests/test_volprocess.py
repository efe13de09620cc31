import numpy as np
import pytest

from hybridfx import (
    CovarianceMatrix,
    IncrementSeries,
    NotPositiveDefiniteError,
    RngState,
    cholesky,
    equicorrelated,
    estimate_covariance,
    load_covariance_json,
    regularize,
    sample_covariance,
    sample_increments,
    save_covariance_json,
)


# ---------------------------------------------------------------------------
# covariance containers and Cholesky
# ---------------------------------------------------------------------------

def test_cholesky_identity():
    L = cholesky(CovarianceMatrix(np.eye(3)))
    np.testing.assert_array_equal(L.entries, np.eye(3))


def test_cholesky_hand_case():
    # [[4,2],[2,5]] factors as [[2,0],[1,2]]; check L @ L.T too
    L = cholesky(CovarianceMatrix([[4.0, 2.0], [2.0, 5.0]]))
    np.testing.assert_allclose(L.entries, [[2.0, 0.0], [1.0, 2.0]], rtol=1e-15)
    np.testing.assert_allclose(L.entries @ L.entries.T, [[4, 2], [2, 5]], rtol=1e-10)


def test_cholesky_reports_failing_pivot():
    # second pivot is 1 - 4 < 0
    with pytest.raises(NotPositiveDefiniteError) as err:
        CovarianceMatrix([[1.0, 2.0], [2.0, 1.0]])
    assert err.value.pivot == 2


def test_covariance_rejects_asymmetry():
    with pytest.raises(ValueError, match="not symmetric"):
        CovarianceMatrix([[1.0, 0.5], [0.4, 1.0]])


def test_covariance_json_roundtrip(tmp_path):
    cov = equicorrelated(4, 0.6, 0.02)
    f = tmp_path / "cov.json"
    save_covariance_json(cov, f)
    again = load_covariance_json(f)
    assert np.array_equal(again.entries, cov.entries)


# ---------------------------------------------------------------------------
# estimation
# ---------------------------------------------------------------------------

def test_estimate_degenerate_column_not_pd():
    incs = IncrementSeries([[1, 0], [-1, 0], [1, 0], [-1, 0]])
    # sample covariance is [[4/3, 0], [0, 0]]
    np.testing.assert_allclose(sample_covariance(incs), [[4.0 / 3.0, 0.0], [0.0, 0.0]])
    with pytest.raises(NotPositiveDefiniteError) as err:
        estimate_covariance(incs)
    assert err.value.min_eigenvalue == pytest.approx(0.0, abs=1e-12)


def test_estimate_identical_rows_not_pd():
    incs = IncrementSeries([[0.1, 0.2], [0.1, 0.2], [0.1, 0.2]])
    with pytest.raises(NotPositiveDefiniteError):
        estimate_covariance(incs)


def test_estimate_needs_enough_rows():
    with pytest.raises(ValueError, match="at least 3"):
        estimate_covariance(IncrementSeries([[1.0, 2.0], [3.0, 4.0]]))


def test_estimate_monte_carlo_identity():
    # 1e5 iid standard-normal rows recover the identity within 0.02 entrywise
    rows = RngState(11).normals((100_000, 4))
    est = estimate_covariance(IncrementSeries(rows))
    assert np.max(np.abs(est.entries - np.eye(4))) < 0.02


def test_estimate_converges_with_sample_size():
    cov = equicorrelated(4, 0.5, 1.0)
    L = cholesky(cov)
    err = {}
    for n in (10_000, 1_000_000):
        got = estimate_covariance(sample_increments(L, n, RngState(5)))
        err[n] = np.linalg.norm(got.entries - cov.entries)
    assert err[1_000_000] * 5 <= err[10_000]


# ---------------------------------------------------------------------------
# regularization
# ---------------------------------------------------------------------------

def test_regularize_adds_ridge():
    got = regularize(np.array([[1.0, 0.0], [0.0, 0.0]]), 1e-6)
    np.testing.assert_allclose(got.entries, [[1 + 1e-6, 0.0], [0.0, 1e-6]])


def test_regularize_zero_ridge_keeps_pd_input():
    cov = equicorrelated(3, 0.2, 1.0)
    got = regularize(cov, 0.0)
    np.testing.assert_array_equal(got.entries, cov.entries)


def test_regularize_indefinite_still_fails():
    # eigenvalues of [[0,1],[1,0]] are -1 and 1; ridge 0.5 leaves -0.5
    with pytest.raises(NotPositiveDefiniteError) as err:
        regularize(np.array([[0.0, 1.0], [1.0, 0.0]]), 0.5)
    assert err.value.min_eigenvalue == pytest.approx(-0.5, abs=1e-12)


# ---------------------------------------------------------------------------
# equicorrelated family
# ---------------------------------------------------------------------------

def test_equicorrelated_zero_rho_is_identity():
    np.testing.assert_array_equal(equicorrelated(4, 0.0, 1.0).entries, np.eye(4))


def test_equicorrelated_entries():
    got = equicorrelated(4, 0.9, 0.01).entries
    assert got[0, 0] == pytest.approx(1e-4)
    assert got[0, 1] == pytest.approx(0.9e-4)


def test_equicorrelated_bounds():
    with pytest.raises(ValueError):
        equicorrelated(2, 1.0, 1.0)  # boundary excluded
    with pytest.raises(ValueError):
        equicorrelated(4, -0.34, 1.0)  # below -1/(m-1)
    equicorrelated(1, 0.99, 1.0)  # rho ignored for m=1


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def test_sample_single_row():
    L = cholesky(equicorrelated(3, 0.5, 1.0))
    got = sample_increments(L, 1, RngState(1))
    assert got.values.shape == (1, 3)


def test_sample_covariance_lln_identity():
    rows = sample_increments(cholesky(CovarianceMatrix(np.eye(4))), 1_000_000,
                             RngState(21)).values
    cov = np.cov(rows, rowvar=False)
    assert np.max(np.abs(cov - np.eye(4))) < 0.005


def test_sample_pairwise_correlation():
    rows = sample_increments(cholesky(equicorrelated(4, 0.9, 1.0)), 1_000_000,
                             RngState(22)).values
    corr = np.corrcoef(rows, rowvar=False)
    off = corr[~np.eye(4, dtype=bool)]
    assert np.all(off > 0.89) and np.all(off < 0.91)


def test_sample_driftless():
    sigma = 0.01
    rows = sample_increments(cholesky(equicorrelated(4, 0.5, sigma)), 1_000_000,
                             RngState(23)).values
    bound = 4.0 * sigma / np.sqrt(1_000_000)
    assert np.all(np.abs(rows.mean(axis=0)) < bound)


def test_sample_no_serial_correlation():
    rows = sample_increments(cholesky(equicorrelated(3, 0.5, 1.0)), 200_000,
                             RngState(24)).values
    n = rows.shape[0]
    for j in range(rows.shape[1]):
        col = rows[:, j]
        r = np.corrcoef(col[:-1], col[1:])[0, 1]
        assert abs(r) < 4.0 / np.sqrt(n)


def test_sample_reproducible_and_seed_sensitive():
    L = cholesky(equicorrelated(4, 0.3, 1.0))
    a = sample_increments(L, 1000, RngState(42)).values
    b = sample_increments(L, 1000, RngState(42)).values
    c = sample_increments(L, 1000, RngState(43)).values
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_normals_shape_and_moments():
    z = RngState(9).normals((50_000,))
    assert abs(z.mean()) < 4.0 / np.sqrt(z.size)
    assert abs(z.std() - 1.0) < 0.01
