"""Small banded matrices stored densely, in float or exact-rational mode."""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction

import numpy as np


class BandedMatrix:
    """Square matrix with known lower/upper bandwidths.

    Entries live in a dense array: ``float`` in the default mode, or an
    object array of :class:`~fractions.Fraction` in exact mode.  Sizes in
    this package stay in the hundreds, so dense storage is cheap and keeps
    products and comparisons trivial.
    """

    def __init__(self, data, lower: int, upper: int):
        data = np.asarray(data)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise ValueError("banded matrix must be square")
        self.data = data
        self.lower = int(lower)
        self.upper = int(upper)

    @classmethod
    def from_diagonals(cls, n: int, diagonals: dict, exact: bool = False):
        """Build from ``{offset: values}``; offset > 0 is above the diagonal."""
        if exact:
            data = np.array([[Fraction(0)] * n for _ in range(n)], dtype=object)
        else:
            data = np.zeros((n, n))
        for off, vals in diagonals.items():
            idx = np.arange(n - abs(off))
            rows, cols = (idx, idx + off) if off >= 0 else (idx - off, idx)
            for r, c, v in zip(rows, cols, vals):
                data[r, c] = v
        lower = max([-o for o in diagonals if o < 0], default=0)
        upper = max([o for o in diagonals if o > 0], default=0)
        return cls(data, lower, upper)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def shape(self):
        return self.data.shape

    @property
    def exact(self) -> bool:
        return self.data.dtype == object

    def todense(self) -> np.ndarray:
        return np.array(self.data, dtype=float)

    def __array__(self, dtype=None, copy=None):
        return self.todense() if dtype is None else self.todense().astype(dtype)

    def to_float(self) -> "BandedMatrix":
        return BandedMatrix(self.todense(), self.lower, self.upper)

    def diagonal(self, offset: int = 0) -> np.ndarray:
        return np.diagonal(self.data, offset)

    def __matmul__(self, other):
        if isinstance(other, BandedMatrix):
            lower = min(self.lower + other.lower, self.n - 1)
            upper = min(self.upper + other.upper, self.n - 1)
            return BandedMatrix(self.data @ other.data, lower, upper)
        return self.data @ np.asarray(other)

    def __pow__(self, p: int) -> "BandedMatrix":
        out = self
        for _ in range(p - 1):
            out = out @ self
        return out

    def __sub__(self, other):
        o = other.data if isinstance(other, BandedMatrix) else np.asarray(other)
        ol, ou = (other.lower, other.upper) if isinstance(other, BandedMatrix) else (self.n - 1, self.n - 1)
        return BandedMatrix(self.data - o, max(self.lower, ol), max(self.upper, ou))

    def support(self) -> list[tuple[int, int]]:
        """Index pairs of nonzero entries (exact zero test)."""
        rows, cols = np.nonzero(self.data != 0)
        return sorted(zip(rows.tolist(), cols.tolist()))

    def rows(self):
        """Yield ``(row, col, value)`` for nonzero entries inside the band."""
        for i in range(self.n):
            for j in range(max(0, i - self.lower), min(self.n, i + self.upper + 1)):
                v = self.data[i, j]
                if v != 0:
                    yield i, j, v

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["row", "col", "value"])
        for i, j, v in self.rows():
            w.writerow([i, j, f"{float(v):.17g}"])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "lower": self.lower, "upper": self.upper,
                           "data": self.todense().tolist()})

    def __repr__(self):
        mode = "exact" if self.exact else "float"
        return f"BandedMatrix(n={self.n}, lower={self.lower}, upper={self.upper}, {mode})"


def tridiagonal(sub, diag, sup, exact: bool = False) -> BandedMatrix:
    n = len(diag)
    return BandedMatrix.from_diagonals(n, {-1: sub, 0: diag, 1: sup}, exact=exact)


TriDiagonalMatrix = BandedMatrix
