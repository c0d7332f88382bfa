import numpy as np
import pytest

from steadygrid.linsys import SingularityError, SparseSystem


def test_duplicate_triplets_are_summed():
    s = SparseSystem(2)
    s.assemble([0, 0, 1], [0, 0, 1], [1.0, 2.0, 1.0], [], [])
    a = np.asarray(s.matrix.todense())
    assert a[0, 0] == 3.0


def test_empty_matrix_is_singular():
    s = SparseSystem(3)
    s.assemble([], [], [], [], [])
    with pytest.raises(SingularityError):
        s.factor_solve()


def test_identity_solve():
    s = SparseSystem(3)
    s.assemble([0, 1, 2], [0, 1, 2], [1.0, 1.0, 1.0], [0], [1.0])
    x = s.factor_solve()
    np.testing.assert_allclose(x, [1.0, 0.0, 0.0])


def test_two_by_two_hand_solve():
    s = SparseSystem(2)
    s.assemble([0, 0, 1, 1], [0, 1, 0, 1], [2.0, 1.0, 1.0, 2.0], [0, 1], [3.0, 3.0])
    np.testing.assert_allclose(s.factor_solve(), [1.0, 1.0], atol=1e-14)


def test_zero_row_reports_row_index():
    s = SparseSystem(3)
    s.assemble([0, 2], [0, 2], [1.0, 1.0], [], [])
    with pytest.raises(SingularityError) as err:
        s.factor_solve()
    assert err.value.row == 1


def test_index_out_of_range_rejected():
    s = SparseSystem(2)
    with pytest.raises(IndexError):
        s.assemble([0, 2], [0, 0], [1.0, 1.0], [], [])
    with pytest.raises(IndexError):
        s.assemble([0], [5], [1.0], [], [])


def test_numerically_singular_matrix():
    s = SparseSystem(2)
    s.assemble([0, 0, 1, 1], [0, 1, 0, 1], [1.0, 2.0, 2.0, 4.0], [0], [1.0])
    with pytest.raises(SingularityError):
        s.factor_solve()


def test_assembly_deterministic_bits():
    rng = np.random.default_rng(5)
    rows = rng.integers(0, 50, size=400)
    cols = rng.integers(0, 50, size=400)
    vals = rng.normal(size=400)
    s1 = SparseSystem(50)
    s1.assemble(rows, cols, vals, [0], [1.0])
    d1 = s1.matrix.data.copy()
    s2 = SparseSystem(50)
    s2.assemble(rows, cols, vals, [0], [1.0])
    assert np.array_equal(d1, s2.matrix.data)


def test_pattern_reuse_counter():
    rng = np.random.default_rng(6)
    rows = rng.integers(0, 20, size=100)
    cols = rng.integers(0, 20, size=100)
    # make sure every row/col has a diagonal entry
    rows = np.concatenate([rows, np.arange(20)])
    cols = np.concatenate([cols, np.arange(20)])
    s = SparseSystem(20)
    for k in range(5):
        vals = rng.normal(size=rows.size) + 10.0
        s.assemble(rows, cols, vals, np.arange(20), np.ones(20))
        s.factor_solve()
    assert s.pattern_builds == 1
    # a different pattern forces one new symbolic step
    s.assemble(rows[:-1], cols[:-1], np.ones(rows.size - 1), [], [])
    assert s.pattern_builds == 2


@pytest.mark.parametrize("n", [10, 100, 1000, 10000])
def test_backward_error_on_diagonally_dominant(n):
    # nodal matrices are local: random entries near the diagonal
    rng = np.random.default_rng(n)
    nnz_per_row = 5
    rows = np.repeat(np.arange(n), nnz_per_row)
    cols = (rows + rng.integers(-20, 21, size=n * nnz_per_row)) % n
    vals = rng.normal(size=n * nnz_per_row)
    # add a dominant diagonal
    rows = np.concatenate([rows, np.arange(n)])
    cols = np.concatenate([cols, np.arange(n)])
    vals = np.concatenate([vals, np.full(n, 10.0 * nnz_per_row)])
    b_rows = np.arange(n)
    b_vals = rng.normal(size=n)
    s = SparseSystem(n)
    s.assemble(rows, cols, vals, b_rows, b_vals)
    x = s.factor_solve()
    assert s.residual_norm(x) < 1e-10


def test_badly_scaled_rows_are_equilibrated():
    # rows spanning 10 orders of magnitude, still solvable
    s = SparseSystem(2)
    s.assemble([0, 0, 1, 1], [0, 1, 0, 1], [1e10, 1e10, 1.0, 2.0], [0, 1], [2e10, 3.0])
    x = s.factor_solve()
    np.testing.assert_allclose(x, [1.0, 1.0], atol=1e-9)
