"""Sparse real linear system: assembly, LU factorization, solve.

Triplets with duplicate coordinates are summed. The compressed pattern is
cached: as long as consecutive assemblies emit the same (rows, cols) arrays,
only the numeric values are scattered into the cached structure, which keeps
repeated Newton iterations free of symbolic work (``pattern_builds`` counts
how often the symbolic step actually ran). Rows are equilibrated before
factorization because source/constraint rows and admittance rows can differ
by many orders of magnitude mid-continuation.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

__all__ = ["SparseSystem", "SingularityError"]


class SingularityError(Exception):
    """Factorization failed; ``row`` is the offending row (-1 if unknown)."""

    def __init__(self, row: int, reason: str):
        super().__init__(f"singular system at row {row}: {reason}")
        self.row = row
        self.reason = reason


class SparseSystem:
    """One n x n real system, rebuilt in place every Newton iteration."""

    def __init__(self, n: int):
        self.n = n
        self.pattern_builds = 0
        self._key_rows = None
        self._key_cols = None
        self._inverse = None
        self._indices = None
        self._indptr = None
        self._nnz = 0
        self._matrix = None
        self._rhs = None

    def assemble(self, rows, cols, vals, rhs_rows, rhs_vals) -> None:
        """Sum duplicate triplets into CSC form; deterministic ordering."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=float)
        if rows.size and (rows.min() < 0 or rows.max() >= self.n):
            raise IndexError(f"row index out of range 0..{self.n - 1}")
        if cols.size and (cols.min() < 0 or cols.max() >= self.n):
            raise IndexError(f"col index out of range 0..{self.n - 1}")

        if (
            self._key_rows is None
            or rows.shape != self._key_rows.shape
            or not (np.array_equal(rows, self._key_rows) and np.array_equal(cols, self._key_cols))
        ):
            # symbolic step: canonical CSC ordering plus triplet -> slot map
            keys = cols * self.n + rows
            uniq, inverse = np.unique(keys, return_inverse=True)
            self._key_rows = rows.copy()
            self._key_cols = cols.copy()
            self._inverse = inverse
            self._nnz = uniq.size
            self._indices = (uniq % self.n).astype(np.int32)
            counts = np.bincount((uniq // self.n).astype(np.int64), minlength=self.n)
            self._indptr = np.concatenate(([0], np.cumsum(counts))).astype(np.int32)
            self.pattern_builds += 1

        data = np.bincount(self._inverse, weights=vals, minlength=self._nnz)
        self._matrix = sparse.csc_matrix(
            (data, self._indices.copy(), self._indptr.copy()), shape=(self.n, self.n)
        )
        rhs = np.zeros(self.n)
        np.add.at(rhs, np.asarray(rhs_rows, dtype=np.int64), np.asarray(rhs_vals, dtype=float))
        self._rhs = rhs

    @property
    def matrix(self) -> sparse.csc_matrix:
        if self._matrix is None:
            raise RuntimeError("assemble() before accessing the matrix")
        return self._matrix

    @property
    def rhs(self) -> np.ndarray:
        if self._rhs is None:
            raise RuntimeError("assemble() before accessing the rhs")
        return self._rhs

    def factor_solve(self) -> np.ndarray:
        """LU solve with row equilibration and one refinement step.

        Raises :class:`SingularityError` on structural or numerical
        singularity, reporting an offending row where one is identifiable.
        """
        a = self.matrix
        b = self.rhs
        absmax = np.asarray(abs(a).max(axis=1).todense()).ravel()
        empty = np.flatnonzero(absmax == 0.0)
        if empty.size:
            raise SingularityError(int(empty[0]), "row has no entries")
        csr = a.tocsr()
        scale = 1.0 / absmax
        d = sparse.diags(scale)
        a_s = (d @ csr).tocsc()
        b_s = scale * b
        try:
            lu = splu(a_s)
            x = lu.solve(b_s)
        except RuntimeError as exc:  # SuperLU signals singularity this way
            raise SingularityError(-1, str(exc)) from exc
        if not np.all(np.isfinite(x)):
            bad = int(np.flatnonzero(~np.isfinite(x))[0])
            raise SingularityError(bad, "non-finite solution entry")
        # one step of iterative refinement when the backward error is loose
        denom = max(1.0, np.max(np.abs(b_s))) if b_s.size else 1.0
        res = b_s - a_s @ x
        if np.max(np.abs(res)) / denom > 1e-12:
            x = x + lu.solve(res)
        return x

    def residual_norm(self, x: np.ndarray) -> float:
        """Relative infinity-norm backward error of a candidate solution."""
        b = self.rhs
        r = self.matrix @ x - b
        return float(np.max(np.abs(r)) / max(1.0, np.max(np.abs(b))))
