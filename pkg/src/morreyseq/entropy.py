"""Certified two-sided estimates of dyadic entropy numbers of identity maps.

Everything works on real ``N``-dimensional sections (``N <= 4``). Norms
are lattice norms: vectorised callables on arrays of shape ``(..., N)``
that depend only on coordinate magnitudes and grow with them. Both
certificates are stored: an explicit center set whose radius bounds
``e_k`` from above, and an explicit separated point set in the source
ball whose half-separation bounds it from below.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .embeddings import EmbeddingCase, embedding_norm_closed_form
from .parallel import chunk_ranges, ordered_map
from .spaces import SpaceParams, morrey_norm_batch

MAX_DIM = 4
_CHUNK = 2048
_LLOYD_ROUNDS = 12


@dataclass(frozen=True)
class LatticeNorm:
    """A vectorised lattice (quasi-)norm with r-triangle inequality, ``0 < r <= 1``."""

    name: str
    fn: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)
    r: float = 1.0

    def __call__(self, x) -> np.ndarray:
        return self.fn(np.abs(np.asarray(x, dtype=float)))

    def scaled(self, c: float) -> "LatticeNorm":
        return LatticeNorm(f"{c!r}*{self.name}", lambda x, f=self.fn: c * f(x), self.r)


def lp(p: float) -> LatticeNorm:
    if math.isinf(p):
        return LatticeNorm("linf", lambda x: x.max(axis=-1))
    if p <= 0:
        raise ValueError("requires p > 0")
    return LatticeNorm(f"l{p:g}", lambda x: np.sum(x ** p, axis=-1) ** (1.0 / p), min(p, 1.0))


def morrey(params: SpaceParams, dim: int = 1) -> LatticeNorm:
    """Norm of ``m_{u,p}^{2^{jd}}`` acting on vectors of length ``2^{jd}``."""
    return LatticeNorm(f"m({params.u:g},{params.p:g})",
                       lambda x: morrey_norm_batch(x, dim, params), min(params.p, 1.0))


@dataclass(frozen=True)
class EntropyEstimate:
    k: int
    lower: float
    upper: float
    resolution: float
    centers: np.ndarray = field(repr=False)
    packing: np.ndarray = field(repr=False)
    flags: tuple[str, ...] = ()


# ---------------------------------------------------------------------------
# nets


@dataclass(frozen=True)
class Net:
    """Grid cells of pitch ``2h`` meeting the source unit ball.

    ``cells`` holds the cell centers and ``lo``/``hi`` the cell boxes
    clipped to ``[-1, 1]^N`` (which contains the ball once every
    ``||e_i|| >= 1``); ``inside`` marks centers lying in the ball
    themselves, the only points allowed in packings.
    """

    cells: np.ndarray
    inside: np.ndarray
    half: float
    lo: np.ndarray = field(repr=False)
    hi: np.ndarray = field(repr=False)


def build_net(source: LatticeNorm, dim: int, delta: float) -> Net:
    if not 1 <= dim <= MAX_DIM:
        raise ValueError(f"net dimension must be in 1..{MAX_DIM}, got {dim}")
    if delta <= 0:
        raise ValueError("delta must be positive")
    eye = np.eye(dim)
    if np.any(source(eye) < 1 - 1e-12):
        raise ValueError("source norm must dominate the sup norm (||e_i|| >= 1)")
    steps = math.ceil(2.0 / delta - 1e-9)
    pitch = 2.0 / steps
    axis = np.linspace(-1.0, 1.0, steps + 1)
    grid = np.stack(np.meshgrid(*([axis] * dim), indexing="ij"), axis=-1).reshape(-1, dim)
    half = pitch / 2
    # a cell meets the ball iff its point of least magnitude does (lattice norm)
    nearest = np.maximum(np.abs(grid) - half, 0.0)
    meets = source(nearest) <= 1.0
    cells = grid[meets]
    inside = source(cells) <= 1.0
    return Net(cells, inside, half, np.maximum(cells - half, -1.0), np.minimum(cells + half, 1.0))


def _far(norm: LatticeNorm, lo: np.ndarray, hi: np.ndarray, z: np.ndarray) -> np.ndarray:
    """``max_{x in box} ||x - z||``: coordinatewise farthest corner, by monotonicity."""
    return norm(np.maximum(np.abs(lo - z), np.abs(hi - z)))


def _nearest(norm, net: Net, centers):
    def block(bounds):
        a, b = bounds
        d = _far(norm, net.lo[a:b, None, :], net.hi[a:b, None, :], centers[None, :, :])
        i = np.argmin(d, axis=1)
        return d[np.arange(len(i)), i], i

    parts = ordered_map(block, chunk_ranges(len(net.cells), _CHUNK))
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def covering_radius(norm: LatticeNorm, net: Net, centers: np.ndarray) -> float:
    """Radius certified by ``centers`` over the whole source ball."""
    if len(centers) == 0:
        return math.inf
    d, _ = _nearest(norm, net, np.asarray(centers, dtype=float).reshape(-1, net.cells.shape[1]))
    return float(d.max())


def min_separation(norm: LatticeNorm, points: np.ndarray) -> float:
    pts = np.asarray(points, dtype=float)
    if len(pts) < 2:
        return math.inf
    d = norm(pts[:, None, :] - pts[None, :, :])
    d[np.diag_indices(len(pts))] = np.inf
    return float(d.min())


# ---------------------------------------------------------------------------
# covering (upper bound)


def _lattice_centers(net: Net, count: int) -> np.ndarray:
    dim = net.cells.shape[1]
    lo = net.lo.min(axis=0)
    hi = net.hi.max(axis=0)
    s = max(1, int(math.floor(count ** (1.0 / dim) + 1e-9)))
    axes = [lo[i] + (hi[i] - lo[i]) * (2 * np.arange(s) + 1) / (2 * s) for i in range(dim)]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dim)


def _farthest_centers(norm, net: Net, start: np.ndarray, count: int) -> np.ndarray:
    centers = [c for c in np.asarray(start, dtype=float).reshape(-1, net.cells.shape[1])]
    if not centers:
        centers = [np.zeros(net.cells.shape[1])]
    d, _ = _nearest(norm, net, np.array(centers))
    while len(centers) < count:
        i = int(np.argmax(d))
        centers.append(net.cells[i].copy())
        d = np.minimum(d, _far(norm, net.lo, net.hi, net.cells[i]))
    return np.array(centers[:count])


def _one_center(norm, lo: np.ndarray, hi: np.ndarray, start: np.ndarray) -> np.ndarray:
    # bounding-box midpoint, then Badoiu-Clarkson steps toward the farthest cell
    pts = (lo + hi) / 2
    cands = [start, (lo.min(axis=0) + hi.max(axis=0)) / 2]
    best, best_r = None, math.inf
    for c in cands:
        c = c.copy()
        for t in range(1, 16):
            d = _far(norm, lo, hi, c)
            r = float(d.max())
            if r < best_r:
                best, best_r = c.copy(), r
            c = c + (pts[int(np.argmax(d))] - c) / (t + 1)
    return best


def _lloyd(norm, net: Net, centers: np.ndarray) -> tuple[np.ndarray, float]:
    centers = centers.copy()
    d, owner = _nearest(norm, net, centers)
    radius = float(d.max())
    for _ in range(_LLOYD_ROUNDS):
        moved = centers.copy()
        for c in range(len(centers)):
            mine = owner == c
            if mine.any():
                moved[c] = _one_center(norm, net.lo[mine], net.hi[mine], centers[c])
        d2, owner2 = _nearest(norm, net, moved)
        r2 = float(d2.max())
        if r2 >= radius * (1 - 1e-12):
            break
        centers, owner, radius = moved, owner2, r2
    return centers, radius


def _cover(norm, net: Net, count: int, seeds: Sequence[np.ndarray]) -> tuple[np.ndarray, float]:
    dim = net.cells.shape[1]
    candidates = [_lattice_centers(net, count),
                  _farthest_centers(norm, net, np.zeros((1, dim)), count)]
    for s in seeds:
        s = np.asarray(s, dtype=float).reshape(-1, dim)[:count]
        if len(s):
            candidates.append(s)
            if len(s) < count:
                candidates.append(_farthest_centers(norm, net, s, count))
    best, best_r = None, math.inf
    for cand in candidates:
        c, r = _lloyd(norm, net, cand)
        if r < best_r:
            best, best_r = c, r
    return best, best_r


# ---------------------------------------------------------------------------
# packing (lower bound)


def _farthest_packing(norm, pts: np.ndarray, count: int, start: Optional[np.ndarray] = None) -> np.ndarray:
    if len(pts) == 0:
        return pts
    if start is None or len(start) == 0:
        chosen = [int(np.argmax(norm(pts)))]
        d = norm(pts - pts[chosen[0]])
        sel = [pts[chosen[0]]]
    else:
        sel = list(start)
        d = np.min(np.stack([norm(pts - s) for s in sel]), axis=0)
    while len(sel) < count:
        i = int(np.argmax(d))
        if d[i] <= 0:
            break
        sel.append(pts[i])
        d = np.minimum(d, norm(pts - pts[i]))
    return np.array(sel)


def _best_subset(norm, pts: np.ndarray, count: int) -> np.ndarray:
    """Greedy trim of a separated set down to ``count`` points."""
    pts = np.asarray(pts, dtype=float)
    while len(pts) > count:
        d = norm(pts[:, None, :] - pts[None, :, :])
        d[np.diag_indices(len(pts))] = np.inf
        i, j = np.unravel_index(np.argmin(d), d.shape)
        # drop whichever of the closest pair is nearer to the rest
        di = np.sort(d[i])[1] if len(pts) > 2 else 0
        dj = np.sort(d[j])[1] if len(pts) > 2 else 0
        pts = np.delete(pts, i if di <= dj else j, axis=0)
    return pts


def _pack(norm, source, net: Net, count: int, seeds: Sequence[np.ndarray]) -> tuple[np.ndarray, float]:
    pool = net.cells[net.inside]
    candidates = [_farthest_packing(norm, pool, count)]
    dim = net.cells.shape[1]
    for s in seeds:
        s = np.asarray(s, dtype=float).reshape(-1, dim)
        s = s[source(s) <= 1.0]
        if len(s) >= count:
            candidates.append(_best_subset(norm, s, count))
        elif len(s):
            candidates.append(_farthest_packing(norm, pool, count, start=s))
    best, best_sep = np.zeros((0, dim)), 0.0
    for cand in candidates:
        if len(cand) < count:
            continue
        sep = min_separation(norm, cand)
        if sep > best_sep:
            best, best_sep = cand, sep
    return best, best_sep


# ---------------------------------------------------------------------------
# public API


def entropy_estimate(source: LatticeNorm, target: LatticeNorm, dim: int, k: int, delta: float,
                     seed_centers: Sequence[np.ndarray] = (), seed_points: Sequence[np.ndarray] = (),
                     net: Optional[Net] = None) -> EntropyEstimate:
    """Bracket ``e_k(id : (R^N, source) -> (R^N, target))``.

    Upper: best of lattice, farthest-point and seeded center sets after
    Lloyd-style refinement, evaluated with exact worst-case distances over
    every net cell. Lower: farthest-point packing of ``2^{k-1}+1`` net
    points inside the ball; any two lying in one ball of radius ``eps``
    would be at most ``2^{1/r} eps`` apart.
    """
    if k < 1:
        raise ValueError("k must be positive")
    if net is None:
        net = build_net(source, dim, delta)
    n_centers = 1 << (k - 1)
    centers, radius = _cover(target, net, n_centers, list(seed_centers))
    packing, sep = _pack(target, source, net, n_centers + 1, list(seed_points))
    flags = []
    lower = sep / 2.0 ** (1.0 / target.r) if len(packing) == n_centers + 1 else 0.0
    if lower == 0.0:
        flags.append("lower-uncertified")
    return EntropyEstimate(k, lower, radius, 2 * net.half, centers, packing, tuple(flags))


def entropy_profile(source: LatticeNorm, target: LatticeNorm, dim: int, ks: Sequence[int],
                    delta: float) -> list[EntropyEstimate]:
    """Estimates for increasing ``k``; each search is seeded with the previous one.

    Upper bounds come out non-increasing because a center set for ``k``
    is admissible for ``k+1``; a lower bound for ``k+1`` also bounds ``e_k``.
    """
    ks = sorted(set(ks))
    net = build_net(source, dim, delta)
    out: list[EntropyEstimate] = []
    prev = None
    for k in ks:
        seeds = [prev.centers] if prev is not None else []
        est = entropy_estimate(source, target, dim, k, delta, seed_centers=seeds, net=net)
        if prev is not None and prev.upper < est.upper:
            est = EntropyEstimate(k, est.lower, prev.upper, est.resolution, prev.centers,
                                  est.packing, est.flags)
        out.append(est)
        prev = est
    for i in range(len(out) - 2, -1, -1):
        nxt = out[i + 1]
        cur = out[i]
        if nxt.lower > cur.lower:
            need = (1 << (cur.k - 1)) + 1
            pts = _best_subset(target, nxt.packing, need)
            sep = min_separation(target, pts)
            low = sep / 2.0 ** (1.0 / target.r)
            if low > cur.lower:
                out[i] = EntropyEstimate(cur.k, low, cur.upper, cur.resolution, cur.centers,
                                         pts, cur.flags)
    return out


def verify_estimate(est: EntropyEstimate, source: LatticeNorm, target: LatticeNorm,
                    dim: int, delta: float, rtol: float = 1e-12) -> bool:
    """Re-check both certificates from scratch on a freshly built net."""
    net = build_net(source, dim, delta)
    if len(est.centers) > 1 << (est.k - 1):
        return False
    if covering_radius(target, net, est.centers) > est.upper * (1 + rtol):
        return False
    if est.lower > 0:
        if len(est.packing) != (1 << (est.k - 1)) + 1:
            return False
        if np.any(source(est.packing) > 1.0):
            return False
        sep = min_separation(target, est.packing)
        if sep / 2.0 ** (1.0 / target.r) < est.lower * (1 - rtol):
            return False
    return est.lower <= est.upper * (1 + rtol)


def entropy_schuett(N: int, p1: float, p2: float, k: int) -> float:
    """Reference shape of ``e_k(id : l_{p1}^N -> l_{p2}^N)``, constants omitted."""
    if N < 1 or k < 1 or p1 <= 0 or p2 <= 0:
        raise ValueError("requires N >= 1, k >= 1 and positive exponents")
    inv1 = 0.0 if math.isinf(p1) else 1.0 / p1
    inv2 = 0.0 if math.isinf(p2) else 1.0 / p2
    tail = 2.0 ** (-k / (2 * N)) * N ** (inv2 - inv1)
    if p2 < p1 or k >= 2 * N:
        return tail
    if k <= math.log2(2 * N):
        return 1.0
    return (math.log2(1 + N / k) / k) ** (inv1 - inv2)


# ---------------------------------------------------------------------------
# Morrey sandwich


@dataclass(frozen=True)
class MorreySandwich:
    k: int
    lower: float
    upper: float
    direct: EntropyEstimate
    upper_factor: float
    lower_factor: float
    upper_route: EntropyEstimate = field(repr=False)
    lower_route: EntropyEstimate = field(repr=False)

    @property
    def certificate_gap(self) -> float:
        """Upper/lower ratio of the upper route's own estimate."""
        r = self.upper_route
        return r.upper / r.lower if r.lower > 0 else math.inf


def _op_norm(src: SpaceParams, tgt: SpaceParams, case: EmbeddingCase) -> float:
    return embedding_norm_closed_form(EmbeddingCase(src, tgt, case.dim, case.level)).upper


def entropy_morrey_sandwich(case: EmbeddingCase, k: int, delta: float) -> MorreySandwich:
    """Factorisation bounds for ``e_k(id_j)`` next to a direct estimate.

    Upper: ``m_{u1,p1} -> l_{p1} -> l_{u2} -> m_{u2,p2}``. Lower: through
    ``l_{u1} -> m_{u1,p1} -> m_{u2,p2} -> l_{p2}``. The direct search is
    seeded with the transported route certificates, so its bracket is at
    least as tight as the sandwich up to net resolution.
    """
    N = case.cells
    if N > MAX_DIM:
        raise ValueError(f"2^(jd) = {N} exceeds the net dimension limit {MAX_DIM}")
    src, tgt = case.source, case.target
    lp1, lu1 = SpaceParams(src.p, src.p), SpaceParams(src.u, src.u)
    lu2, lp2 = SpaceParams(tgt.u, tgt.u), SpaceParams(tgt.p, tgt.p)
    f1, f2 = _op_norm(src, lp1, case), _op_norm(lu2, tgt, case)
    g1, g2 = _op_norm(lu1, src, case), _op_norm(tgt, lp2, case)

    up_route = entropy_estimate(lp(src.p), lp(tgt.u), N, k, delta)
    low_route = entropy_estimate(lp(src.u), lp(tgt.p), N, k, delta,
                                 seed_points=[up_route.packing])
    upper = f1 * f2 * up_route.upper
    lower = low_route.lower / (g1 * g2)

    m_src, m_tgt = morrey(src, case.dim), morrey(tgt, case.dim)
    # shrink transported points by one ulp-scale factor so rounding keeps them in the ball
    moved_pts = low_route.packing / g1 * (1 - 1e-12)
    direct = entropy_estimate(m_src, m_tgt, N, k, delta,
                              seed_centers=[f1 * up_route.centers], seed_points=[moved_pts])
    return MorreySandwich(k, lower, upper, direct, f1 * f2, g1 * g2, up_route, low_route)
