"""Column maxima of totally monotone matrices (SMAWK) and a quadrangle-inequality check."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class MatrixOracle:
    """An implicit ``rows x cols`` matrix; entries are computed on demand."""

    rows: int
    cols: int
    entry: Callable[[int, int], float]

    @classmethod
    def from_array(cls, a) -> "MatrixOracle":
        a = np.asarray(a, dtype=float)
        return cls(a.shape[0], a.shape[1], lambda i, j: float(a[i, j]))

    def dense(self) -> np.ndarray:
        return np.array([[self.entry(i, j) for j in range(self.cols)] for i in range(self.rows)])


def smawk_column_maxima(m: MatrixOracle) -> list[int]:
    """Row index of the maximum in every column, last row on ties.

    The matrix must be totally monotone in that sense (argmax rows
    non-decreasing left to right, which inverse-Monge matrices satisfy);
    otherwise the answer is unspecified.  Makes O(rows + cols) oracle calls.
    """
    if m.rows < 1 or m.cols < 1:
        raise ValueError("matrix must have at least one row and one column")
    cache: dict[tuple[int, int], float] = {}

    def key(j: int, i: int) -> tuple[float, int]:
        v = cache.get((i, j))
        if v is None:
            v = cache[(i, j)] = m.entry(i, j)
        # larger value wins, then the larger row
        return v, i

    result: dict[int, int] = {}

    def solve(cols: list[int], rows: list[int]) -> None:
        # REDUCE: discard rows that cannot hold any column maximum
        stack: list[int] = []
        for i in rows:
            while stack and key(cols[len(stack) - 1], stack[-1]) < key(cols[len(stack) - 1], i):
                stack.pop()
            if len(stack) < len(cols):
                stack.append(i)
        rows = stack
        if len(cols) > 1:
            solve(cols[1::2], rows)
        # fill even columns between the answers of their odd neighbours
        pos = 0
        for c in range(0, len(cols), 2):
            j = cols[c]
            last = result[cols[c + 1]] if c + 1 < len(cols) else rows[-1]
            best = rows[pos]
            best_key = key(j, best)
            while rows[pos] != last:
                pos += 1
                k = key(j, rows[pos])
                if k > best_key:
                    best, best_key = rows[pos], k
            result[j] = best

    solve(list(range(m.cols)), list(range(m.rows)))
    return [result[j] for j in range(m.cols)]


def naive_column_maxima(m: MatrixOracle) -> list[int]:
    out = []
    for j in range(m.cols):
        best, best_v = 0, m.entry(0, j)
        for i in range(1, m.rows):
            v = m.entry(i, j)
            if v >= best_v:
                best, best_v = i, v
        out.append(best)
    return out


def check_inverse_monge(m, tol: float = 1e-9) -> bool:
    """True iff M[i][k+1] + M[i+1][k] <= M[i][k] + M[i+1][k+1] on every adjacent 2x2 minor.

    Adjacent minors telescope to every quadruple i < j, k < l.
    """
    a = m.dense() if isinstance(m, MatrixOracle) else np.asarray(m, dtype=float)
    if a.shape[0] < 2 or a.shape[1] < 2:
        return True
    lhs = a[:-1, 1:] + a[1:, :-1]
    rhs = a[:-1, :-1] + a[1:, 1:]
    return bool(np.all(lhs <= rhs + tol))
