"""Dense matrix storage and an incrementally updatable thin QR factorization.

The QR state is the workhorse behind greedy residual updates: appending one
column costs O(n*k) and the residual of a least-squares fit on the selected
columns is obtained by projecting against the orthonormal basis.
"""
from __future__ import annotations

import numpy as np

from .errors import DimensionMismatchError, EmptyBasisError, RankDeficientError

# Relative tolerance below which an orthogonalized column counts as dependent.
RANK_TOL = 1e-12


class DenseMatrix:
    """Real n x p matrix held in column-major (Fortran) order.

    All entries must be finite; greedy algorithms read whole columns, so
    column-major storage keeps those reads contiguous.
    """

    __slots__ = ("values",)

    def __init__(self, values) -> None:
        arr = np.array(values, dtype=np.float64, order="F")
        if arr.ndim != 2:
            raise DimensionMismatchError(f"expected a 2-d array, got ndim={arr.ndim}")
        if arr.size and not np.isfinite(arr).all():
            raise ValueError("matrix entries must be finite")
        self.values = arr

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    def column(self, j: int) -> np.ndarray:
        if not 0 <= j < self.cols:
            raise IndexError(f"column index {j} out of range for {self.cols} columns")
        return self.values[:, j]

    def __repr__(self) -> str:
        return f"DenseMatrix({self.rows}x{self.cols})"


class OrthoBasisState:
    """Thin QR factorization of a growing set of matrix columns.

    Maintains Q (orthonormal columns) and R (upper triangular, positive
    diagonal) such that Q @ R reconstructs the selected columns in selection
    order. Columns are orthogonalized by modified Gram-Schmidt with one
    reorthogonalization pass, adequate for the ambient dimensions used here.
    """

    def __init__(self, ambient_dim: int, capacity: int = 8) -> None:
        if ambient_dim < 1:
            raise ValueError("ambient_dim must be >= 1")
        capacity = max(1, min(capacity, ambient_dim))
        self.ambient_dim = int(ambient_dim)
        self.selected_cols: list[int] = []
        self._q = np.zeros((ambient_dim, capacity), order="F")
        self._r = np.zeros((capacity, capacity))

    @property
    def size(self) -> int:
        return len(self.selected_cols)

    @property
    def orthonormal_basis(self) -> np.ndarray:
        """Q factor, shape (ambient_dim, size)."""
        return self._q[:, : self.size]

    @property
    def triangular_factor(self) -> np.ndarray:
        """R factor, shape (size, size), strictly positive diagonal."""
        return self._r[: self.size, : self.size]

    def _grow(self) -> None:
        cap = self._q.shape[1]
        new_cap = min(2 * cap, self.ambient_dim)
        q = np.zeros((self.ambient_dim, new_cap), order="F")
        q[:, :cap] = self._q
        r = np.zeros((new_cap, new_cap))
        r[:cap, :cap] = self._r
        self._q, self._r = q, r

    def append(self, matrix: DenseMatrix, col_index: int) -> "OrthoBasisState":
        """Add one matrix column to the basis.

        Raises RankDeficientError when the orthogonalized remainder of the
        column falls below RANK_TOL relative to its norm, and IndexError for
        an out-of-range column index.
        """
        if matrix.rows != self.ambient_dim:
            raise DimensionMismatchError(
                f"matrix has {matrix.rows} rows, basis lives in dim {self.ambient_dim}"
            )
        col = matrix.column(col_index)
        k = self.size
        if k >= self._q.shape[1]:
            self._grow()
        if k >= self.ambient_dim:
            raise RankDeficientError("basis already spans the ambient space")

        q = self._q[:, :k]
        v = col.astype(np.float64, copy=True)
        coeffs = np.zeros(k)
        # Two MGS passes: the second pass mops up cancellation in the first.
        for _ in range(2):
            h = q.T @ v
            v -= q @ h
            coeffs += h
        norm = float(np.linalg.norm(v))
        col_norm = float(np.linalg.norm(col))
        if norm <= RANK_TOL * col_norm or norm == 0.0:
            raise RankDeficientError(
                f"column {col_index} is in the span of the current basis "
                f"(remainder {norm:.3e} vs column norm {col_norm:.3e})"
            )
        self._q[:, k] = v / norm
        self._r[:k, k] = coeffs
        self._r[k, k] = norm
        self.selected_cols.append(int(col_index))
        return self

    def project_out(self, y: np.ndarray) -> np.ndarray:
        """Residual of y after removing its component in the basis span."""
        y = np.asarray(y, dtype=np.float64)
        if y.shape != (self.ambient_dim,):
            raise DimensionMismatchError(
                f"vector has shape {y.shape}, expected ({self.ambient_dim},)"
            )
        k = self.size
        if k == 0:
            return y.copy()
        q = self._q[:, :k]
        return y - q @ (q.T @ y)

    def least_squares_coeffs(self, y: np.ndarray) -> np.ndarray:
        """Coefficients c solving R c = Q^T y by back-substitution.

        These are the least-squares coefficients of y on the selected columns,
        ordered by selection.
        """
        k = self.size
        if k == 0:
            raise EmptyBasisError("no columns selected")
        y = np.asarray(y, dtype=np.float64)
        if y.shape != (self.ambient_dim,):
            raise DimensionMismatchError(
                f"vector has shape {y.shape}, expected ({self.ambient_dim},)"
            )
        c = self._q[:, :k].T @ y
        r = self._r
        for i in range(k - 1, -1, -1):
            c[i] = (c[i] - r[i, i + 1 : k] @ c[i + 1 : k]) / r[i, i]
        return c


def load_matrix_csv(path) -> DenseMatrix:
    """Read a matrix from CSV: one line per row, comma separated, no header."""
    arr = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    return DenseMatrix(arr)


def load_vector_csv(path) -> np.ndarray:
    """Read a vector from CSV, accepting either a single column or row."""
    arr = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    if 1 not in arr.shape:
        raise DimensionMismatchError(f"expected a vector, got shape {arr.shape}")
    return arr.reshape(-1)


def save_matrix_csv(path, matrix: DenseMatrix | np.ndarray) -> None:
    """Write a matrix as CSV with full float64 round-trip precision."""
    arr = matrix.values if isinstance(matrix, DenseMatrix) else np.asarray(matrix)
    np.savetxt(path, np.atleast_2d(arr), delimiter=",", fmt="%.17g")
