"""Average happiness for linear utilities in two dimensions.

A utility is ``w_a = (a, 1 - a)`` with ``a`` uniform on [0, 1].  Point
``p = (x, y)`` is dualised to the line through ``(0, y)`` and ``(1, x)``, whose
height at ``a`` is ``p . w_a``.  The upper envelope of the hull points' duals
splits [0, 1] into segments, one per hull point, and on each segment the
happiness of any other point is a linear-over-linear integral with a closed
form.  The gain matrix ``H[i][j]`` (happiness added by ``p_j`` right after
``p_i``) satisfies the quadrangle inequality, so the size-r DP over it runs one
SMAWK pass per extra point.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import Dataset, Point, Selection, upper_hull_indices
from .reduction import map_back, reduce_additive
from .smawk import MatrixOracle, smawk_column_maxima

SERIES_CUTOFF = 0.1
SERIES_TERMS = 22
DENSE_LIMIT = 4096
# on and below the diagonal the DP matrix holds -FILLER * (i - j + 1)**2.
# Concave in i - j and below -2 (real entries live in [0, 2]), which keeps
# every 2x2 minor across the diagonal inverse-Monge.
FILLER = 8.0


class DegenerateDualError(ValueError):
    pass


def _xy(p) -> np.ndarray:
    if isinstance(p, Point):
        return np.asarray(p.coords, dtype=float)
    return np.asarray(p, dtype=float)


def dual_intersection_x(a, b) -> float:
    """The ``alpha`` at which the duals of ``a`` and ``b`` cross."""
    a, b = _xy(a), _xy(b)
    dy = a[1] - b[1]
    denom = dy - (a[0] - b[0])
    if denom == 0:
        raise DegenerateDualError(f"parallel duals for {a.tolist()} and {b.tolist()}")
    return float(dy / denom)


def _intersections(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    dy = a[..., 1] - b[..., 1]
    return dy / (dy - (a[..., 0] - b[..., 0]))


# -- the happiness integral ---------------------------------------------------

def _F_scalar(qx, qy, px, py, a, b) -> float:
    h = b - a
    if h == 0:
        return 0.0
    s = qx - qy
    t = px - py
    u = qy + a * s  # numerator at a
    m = py + a * t  # denominator at a
    if m <= 0 or m + t * h <= 0:
        raise ValueError("denominator vanishes on the integration interval")
    z = t * h / m
    if abs(z) < SERIES_CUTOFF:
        # integrand (u + s x) / (m (1 + z x / h)), expanded in powers of z
        total, zk = 0.0, 1.0
        for k in range(SERIES_TERMS):
            total += zk * (u / (k + 1) + s * h / (k + 2))
            zk *= -z
        return total * h / m
    return s * h / t + (u * t - s * m) * math.log1p(z) / (t * t)


def _F_array(q, p, a, b) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    h = b - a
    s = q[..., 0] - q[..., 1]
    t = p[..., 0] - p[..., 1]
    u = q[..., 1] + a * s
    m = p[..., 1] + a * t
    active = h != 0
    if np.any(active & ((m <= 0) | (m + t * h <= 0))):
        raise ValueError("denominator vanishes on the integration interval")
    m_safe = np.where(active, m, 1.0)
    z = t * h / m_safe
    small = np.abs(z) < SERIES_CUTOFF
    total = np.zeros(np.broadcast(z, u, s).shape)
    zk = np.ones_like(total)
    for k in range(SERIES_TERMS):
        total += zk * (u / (k + 1) + s * h / (k + 2))
        zk *= -z
    series = total * h / m_safe
    with np.errstate(divide="ignore", invalid="ignore"):
        t_safe = np.where(small, 1.0, t)
        closed = s * h / t_safe + (u * t_safe - s * m_safe) * np.log1p(np.where(small, 0.0, z)) / (t_safe * t_safe)
    return np.where(active, np.where(small, series, closed), 0.0)


def happiness_integral_F(q, p, a, b):
    """Integral over alpha in [a, b] of (q . w_alpha) / (p . w_alpha).

    Closed form via the linear-over-linear antiderivative; when the
    denominator is nearly constant over the interval a power series avoids the
    cancellation in that formula.  Accepts scalars or broadcastable arrays.
    """
    qa, pa = _xy(q), _xy(p)
    if qa.ndim == 1 and pa.ndim == 1 and np.ndim(a) == 0 and np.ndim(b) == 0:
        if not a <= b:
            raise ValueError("need a <= b")
        return _F_scalar(qa[0], qa[1], pa[0], pa[1], float(a), float(b))
    return _F_array(qa, pa, a, b)


def density_integral(eta: Callable[[float], float], epsabs: float = 1e-12) -> Callable:
    """Integral of eta(alpha) * (q . w_alpha) / (p . w_alpha) by adaptive quadrature.

    A drop-in replacement for ``happiness_integral_F`` when utilities follow a
    non-uniform density on [0, 1]; the result is numeric, not exact.
    """
    from scipy.integrate import quad

    def one(q, p, a, b):
        if b <= a:
            return 0.0
        f = lambda x: eta(x) * (q[0] * x + q[1] * (1 - x)) / (p[0] * x + p[1] * (1 - x))
        return quad(f, a, b, epsabs=epsabs, epsrel=1e-12, limit=200)[0]

    def integral(q, p, a, b):
        q, p = np.asarray(q, float), np.asarray(p, float)
        a, b = np.asarray(a, float), np.asarray(b, float)
        if q.ndim == 1 and p.ndim == 1 and a.ndim == 0 and b.ndim == 0:
            return one(q, p, float(a), float(b))
        q, p, a, b = np.broadcast_arrays(q, p, a[..., None], b[..., None])
        return np.array([one(qq, pp, aa[0], bb[0]) for qq, pp, aa, bb in zip(q, p, a, b)])

    integral.exact = False
    return integral


# -- envelope -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EnvelopeIndex:
    """Hull points p_1..p_c by increasing x and breakpoints I_0 = 0 <= ... <= I_c = 1.

    Segment l (1-based) is [I_{l-1}, I_l], where p_l has the highest dual.
    """

    points: np.ndarray
    breakpoints: np.ndarray
    ids: np.ndarray

    @property
    def c(self) -> int:
        return len(self.points)

    @property
    def hull(self) -> list[Point]:
        return [Point(tuple(map(float, p)), int(i)) for p, i in zip(self.points, self.ids)]

    def segment_of(self, alpha) -> np.ndarray:
        """1-based segment containing each alpha (left-closed)."""
        seg = np.searchsorted(self.breakpoints, alpha, side="right")
        return np.clip(seg, 1, self.c)

    def height(self, alpha) -> np.ndarray:
        alpha = np.asarray(alpha, dtype=float)
        p = self.points[self.segment_of(alpha) - 1]
        return alpha * p[..., 0] + (1 - alpha) * p[..., 1]


def build_envelope(hull: Sequence[Point] | np.ndarray, ids=None) -> EnvelopeIndex:
    if isinstance(hull, np.ndarray):
        pts = np.asarray(hull, dtype=float).reshape(-1, 2)
        ids = np.arange(len(pts)) if ids is None else np.asarray(ids)
    else:
        pts = np.array([p.coords for p in hull], dtype=float).reshape(-1, 2)
        ids = np.array([p.id for p in hull], dtype=np.int64)
    if len(pts) < 1:
        raise ValueError("envelope needs at least one hull point")
    if np.any(np.diff(pts[:, 0]) <= 0) or np.any(np.diff(pts[:, 1]) >= 0):
        raise ValueError("hull points must be strictly increasing in x and decreasing in y")
    inner = _intersections(pts[:-1], pts[1:])
    if np.any(np.diff(inner) < -1e-12) or (len(inner) and (inner.min() < -1e-12 or inner.max() > 1 + 1e-12)):
        raise ValueError("breakpoints are not monotone in [0, 1]; input is not an upper hull")
    inner = np.maximum.accumulate(np.clip(inner, 0.0, 1.0)) if len(inner) else inner
    breaks = np.concatenate(([0.0], inner, [1.0]))
    pts.setflags(write=False)
    breaks.setflags(write=False)
    return EnvelopeIndex(pts, breaks, np.asarray(ids, dtype=np.int64))


def envelope_of(dataset_or_points) -> EnvelopeIndex:
    pts = dataset_or_points.points if isinstance(dataset_or_points, Dataset) else np.asarray(dataset_or_points, float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("2D points required")
    idx = upper_hull_indices(pts)
    return build_envelope(pts[idx], ids=idx)


def average_happiness_2d(dataset, sel, env: EnvelopeIndex | None = None,
                         integral: Callable = happiness_integral_F) -> float:
    """Exact average happiness of ``sel`` under uniformly distributed w_alpha.

    Integrates piecewise over the union of the dataset's and the selection's
    envelope breakpoints, where both maximisers are fixed.
    """
    pts = dataset.points if isinstance(dataset, Dataset) else np.asarray(dataset, dtype=float)
    idx = list(sel.indices if isinstance(sel, Selection) else sel)
    if not idx:
        raise ValueError("selection must be non-empty")
    if env is None:
        env = envelope_of(pts)
    senv = envelope_of(pts[idx])
    cuts = np.unique(np.concatenate((env.breakpoints, senv.breakpoints)))
    a, b = cuts[:-1], cuts[1:]
    keep = b > a
    a, b = a[keep], b[keep]
    mid = 0.5 * (a + b)
    q = senv.points[senv.segment_of(mid) - 1]
    p = env.points[env.segment_of(mid) - 1]
    return float(math.fsum(np.atleast_1d(integral(q, p, a, b))))


# -- gain matrix --------------------------------------------------------------

@dataclass(eq=False)
class HappinessGainMatrix:
    """Gains H[i][j] over candidates 0..c' where 0 is the synthetic origin.

    Because the integrand is linear in the numerator point, the per-segment
    happiness of any candidate is ``q_x * Gx[l] + q_y * Gy[l]``; prefix and
    suffix sums of Gx, Gy give every S[i][k] in O(1).  Entries are computed
    on demand; ``H`` materialises the full upper triangle.
    """

    env: EnvelopeIndex
    cand: np.ndarray  # (c' + 1) x 2, row 0 is the origin
    integral: Callable = happiness_integral_F
    suffix: np.ndarray = field(init=False, repr=False)
    _dense: np.ndarray | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        env = self.env
        lo, hi = env.breakpoints[:-1], env.breakpoints[1:]
        basis_x = np.broadcast_to([1.0, 0.0], env.points.shape)
        basis_y = np.broadcast_to([0.0, 1.0], env.points.shape)
        G = np.stack([np.atleast_1d(self.integral(basis_x, env.points, lo, hi)),
                      np.atleast_1d(self.integral(basis_y, env.points, lo, hi))], axis=1)
        # suffix[l] = sum over segments l..c (1-based); suffix[c + 1] = 0
        suf = np.zeros((env.c + 2, 2))
        suf[1:env.c + 1] = np.cumsum(G[::-1], axis=0)[::-1]
        self.suffix = suf

    @property
    def size(self) -> int:
        return len(self.cand) - 1

    def S(self, i: int, k: int) -> float:
        """Happiness of candidate i over segments 1..k."""
        return float(self.cand[i] @ (self.suffix[1] - self.suffix[k + 1]))

    def _gains(self, i: int, js: np.ndarray) -> np.ndarray:
        ci = self.cand[i]
        cj = self.cand[js]
        if i == 0:
            I = np.zeros(len(js))
        else:
            I = np.clip(_intersections(np.broadcast_to(ci, cj.shape), cj), 0.0, 1.0)
        seg = self.env.segment_of(I)
        end = self.env.breakpoints[seg]
        pm = self.env.points[seg - 1]
        part_a = np.atleast_1d(self.integral(cj, pm, I, end)) - np.atleast_1d(self.integral(np.broadcast_to(ci, cj.shape), pm, I, end))
        part_b = ((cj - ci) * self.suffix[seg + 1]).sum(axis=1)
        return part_a + part_b

    def entry(self, i: int, j: int) -> float:
        if not 0 <= i < j <= self.size:
            raise IndexError("gain entries need 0 <= i < j <= c'")
        if self._dense is not None:
            return float(self._dense[i, j])
        ci, cj = self.cand[i], self.cand[j]
        if i == 0:
            I = 0.0
        else:
            I = min(max(dual_intersection_x(ci, cj), 0.0), 1.0)
        seg = int(self.env.segment_of(I))
        end = float(self.env.breakpoints[seg])
        pm = self.env.points[seg - 1]
        part_a = self.integral(cj, pm, I, end) - self.integral(ci, pm, I, end)
        part_b = float((cj - ci) @ self.suffix[seg + 1])
        return float(part_a) + part_b

    @property
    def H(self) -> np.ndarray:
        if self._dense is None:
            c = self.size
            out = np.zeros((c + 1, c + 1))
            for i in range(c):
                out[i, i + 1:] = self._gains(i, np.arange(i + 1, c + 1))
            self._dense = out
        return self._dense

    def completed(self, offset: np.ndarray | None = None) -> np.ndarray:
        """H (plus a per-row offset) with the DP's filler on and below the diagonal."""
        c = self.size
        i, j = np.indices((c + 1, c + 1))
        base = self.H + (0.0 if offset is None else np.asarray(offset)[:, None])
        return np.where(i < j, base, -FILLER * (i - j + 1.0) ** 2)


def compute_H(env: EnvelopeIndex, candidates: Sequence[int] | None = None, candidate_points=None,
              integral: Callable = happiness_integral_F, dense: bool | None = None) -> HappinessGainMatrix:
    """Gain matrix over hull candidates (1-based hull indices, 0 allowed) or explicit points.

    With neither given every hull point is a candidate.  ``dense`` forces or
    suppresses materialising H; by default it is built when c' <= DENSE_LIMIT.
    """
    if candidate_points is not None:
        cp = np.asarray(candidate_points, dtype=float).reshape(-1, 2)
    else:
        if candidates is None:
            idx = np.arange(1, env.c + 1)
        else:
            idx = np.asarray([i for i in candidates], dtype=np.int64)
            if np.any(np.diff(idx) <= 0):
                raise ValueError("candidates must be sorted and distinct")
            idx = idx[idx != 0]
            if np.any((idx < 1) | (idx > env.c)):
                raise ValueError("candidate index outside the hull")
        cp = env.points[idx - 1]
    if len(cp) > 1 and (np.any(np.diff(cp[:, 0]) <= 0) or np.any(np.diff(cp[:, 1]) >= 0)):
        raise ValueError("candidate points must be sorted by increasing x with decreasing y")
    G = HappinessGainMatrix(env, np.vstack([[0.0, 0.0], cp]), integral)
    if dense or (dense is None and G.size <= DENSE_LIMIT):
        G.H
    return G


# -- dynamic program ----------------------------------------------------------

def dp_tables(G: HappinessGainMatrix, r: int, use_smawk: bool = True):
    """Rows D[k][0..c'] for k = 1..r and the argmax parents.

    D[k][j] is the best happiness of at most k candidates whose last one is j;
    D[k][0] = 0 stands for the empty selection.
    """
    c = G.size
    D = [None, np.concatenate(([0.0], [G.entry(0, j) for j in range(1, c + 1)]))]
    parent = [None, np.zeros(c + 1, dtype=np.int64)]
    for k in range(2, r + 1):
        prev = D[k - 1]

        def value(i: int, col: int, prev=prev) -> float:
            j = col + 1
            if i < j:
                return prev[i] + G.entry(i, j)
            return -FILLER * (i - j + 1.0) ** 2

        oracle = MatrixOracle(c, c, value)
        if use_smawk:
            rows = smawk_column_maxima(oracle)
        else:
            rows = []
            for col in range(c):
                vals = [value(i, col) for i in range(col + 1)]
                best = max(vals)
                rows.append(max(i for i, v in enumerate(vals) if v == best))
        cur = np.zeros(c + 1)
        par = np.zeros(c + 1, dtype=np.int64)
        for col, i in enumerate(rows):
            cur[col + 1] = value(i, col)
            par[col + 1] = i
        D.append(cur)
        parent.append(par)
    return D, parent


def solve_dp(G: HappinessGainMatrix, r: int, use_smawk: bool = True) -> tuple[float, list[int]]:
    """Best happiness with at most r candidates and the chosen 1-based candidate indices."""
    c = G.size
    r = min(r, c)
    D, parent = dp_tables(G, r, use_smawk)
    j = int(np.argmax(D[r][1:])) + 1
    value = float(D[r][j])
    chosen = []
    k = r
    while j != 0 and k >= 1:
        chosen.append(j)
        j = int(parent[k][j])
        k -= 1
    return value, chosen[::-1]


def _pad(rows: list[int], hull_rows: np.ndarray, size: int) -> list[int]:
    taken = set(rows)
    for h in hull_rows:
        if len(rows) >= size:
            break
        if int(h) not in taken:
            rows.append(int(h))
            taken.add(int(h))
    pos = {int(h): k for k, h in enumerate(hull_rows)}
    return sorted(rows, key=pos.__getitem__)


def _check_2d(dataset: Dataset, r: int) -> None:
    if dataset.dim != 2:
        raise ValueError(f"2D ARMS needs dim == 2, got {dataset.dim}")
    if r < 1:
        raise ValueError("r must be >= 1")


def exact_2d_arms(dataset: Dataset, r: int, dense: bool | None = None,
                  integral: Callable = happiness_integral_F) -> Selection:
    """Size-min(r, c) subset of the hull maximising average happiness.

    The default integral assumes alpha uniform on [0, 1] and is exact; pass
    ``density_integral(eta)`` for another density.
    """
    _check_2d(dataset, r)
    timings = {}
    t = time.perf_counter()
    env = envelope_of(dataset)
    timings["hull_ms"] = 1000 * (time.perf_counter() - t)
    t = time.perf_counter()
    G = compute_H(env, integral=integral, dense=dense)
    timings["H_ms"] = 1000 * (time.perf_counter() - t)
    t = time.perf_counter()
    value, chosen = solve_dp(G, r)
    timings["dp_ms"] = 1000 * (time.perf_counter() - t)
    rows = [int(env.ids[j - 1]) for j in chosen]
    rows = _pad(rows, env.ids, min(r, env.c))
    return Selection(tuple(rows), {
        "ahr": value, "arr": 1.0 - value, "hull_size": env.c, "candidates": env.c, "timings_ms": timings,
        "exact": getattr(integral, "exact", True),
    })


def approx_2d_arms(dataset: Dataset, r: int, epsilon: float, dense: bool | None = None) -> Selection:
    """Additive-epsilon ARMS: DP over the hull of the additively reduced hull points."""
    _check_2d(dataset, r)
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    timings = {}
    t = time.perf_counter()
    env = envelope_of(dataset)
    timings["hull_ms"] = 1000 * (time.perf_counter() - t)
    t = time.perf_counter()
    rd = reduce_additive(Dataset(env.points), epsilon)
    cand_rows = upper_hull_indices(rd.reduced.points)
    timings["reduce_ms"] = 1000 * (time.perf_counter() - t)
    t = time.perf_counter()
    G = compute_H(env, candidate_points=rd.reduced.points[cand_rows], dense=dense)
    timings["H_ms"] = 1000 * (time.perf_counter() - t)
    t = time.perf_counter()
    value, chosen = solve_dp(G, r)
    timings["dp_ms"] = 1000 * (time.perf_counter() - t)
    hull_pos = map_back(Selection(tuple(int(cand_rows[j - 1]) for j in chosen)), rd).indices
    rows = [int(env.ids[h]) for h in hull_pos]
    rows = _pad(rows, env.ids, min(r, env.c))
    ahr = average_happiness_2d(dataset, rows, env=env)
    return Selection(tuple(rows), {
        "ahr": ahr, "arr": 1.0 - ahr, "reduced_ahr": value, "hull_size": env.c, "candidates": G.size,
        "timings_ms": timings,
    })
