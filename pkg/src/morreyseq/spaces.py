"""Sequence containers and norm engines for Morrey sequence spaces.

All norms act on magnitudes ``|lambda_k|``. For ``p < 1`` the same
power/root pipeline yields quasi-norms (no triangle inequality).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .dyadic import DyadicCube, Point, stable_level

# slack for the ordering checks that are proved, not computed
_ORDER_SLACK = 1e-10


@dataclass(frozen=True)
class SpaceParams:
    """Exponent pair ``(u, p)`` of ``m_{u,p}`` with ``0 < p <= u < inf``."""

    u: float
    p: float

    def __post_init__(self):
        u, p = float(self.u), float(self.p)
        if not (math.isfinite(u) and math.isfinite(p)):
            raise ValueError("u and p must be finite")
        if p <= 0:
            raise ValueError(f"requires p > 0 (got p={p})")
        if p > u:
            raise ValueError(f"requires p <= u (got p={p}, u={u}); m_{{u,p}} = {{0}} for p > u")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "p", p)

    @property
    def exponent(self) -> float:
        """Volume exponent ``1/u - 1/p`` (nonpositive)."""
        return 1.0 / self.u - 1.0 / self.p

    @property
    def p_conj(self) -> float:
        return _conjugate(self.p)

    @property
    def u_conj(self) -> float:
        return _conjugate(self.u)


def _conjugate(r: float) -> float:
    if r < 1:
        raise ValueError(f"conjugate exponent undefined for {r} < 1")
    if r == 1:
        return math.inf
    return r / (r - 1.0)


@dataclass(frozen=True)
class FiniteSequence:
    """Magnitudes on ``K_J = {0, ..., 2^J - 1}^d`` in lexicographic order."""

    dim: int
    level: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.dim < 1 or self.level < 0:
            raise ValueError("dim must be positive and level nonnegative")
        vals = np.abs(np.asarray(self.values, dtype=float)).ravel()
        if vals.size != 1 << (self.dim * self.level):
            raise ValueError(
                f"expected {1 << (self.dim * self.level)} values for dim={self.dim}, "
                f"level={self.level}, got {vals.size}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_grid(cls, grid) -> "FiniteSequence":
        grid = np.asarray(grid, dtype=float)
        n = grid.shape[0]
        level = n.bit_length() - 1
        if n != 1 << level or any(s != n for s in grid.shape):
            raise ValueError("grid must be a cube with side a power of two")
        return cls(grid.ndim, level, grid.ravel())

    @property
    def side(self) -> int:
        return 1 << self.level

    def grid(self) -> np.ndarray:
        return self.values.reshape((self.side,) * self.dim)

    def points(self) -> np.ndarray:
        """Lattice coordinates of all cells, shape ``(2^{Jd}, d)``."""
        idx = np.indices((self.side,) * self.dim).reshape(self.dim, -1).T
        return idx

    def to_supported(self) -> "SupportedSequence":
        pts = self.points()
        nz = self.values > 0
        return SupportedSequence(self.dim, {tuple(int(c) for c in k): float(v)
                                            for k, v in zip(pts[nz], self.values[nz])})


@dataclass(frozen=True)
class SupportedSequence:
    """Finitely supported magnitudes on ``Z^d``; zeros are never stored."""

    dim: int
    entries: Mapping[Point, float]

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be positive")
        clean: dict[Point, float] = {}
        for k, v in self.entries.items():
            k = tuple(int(c) for c in k)
            if len(k) != self.dim:
                raise ValueError(f"point {k} has wrong dimension (expected {self.dim})")
            v = abs(complex(v)) if isinstance(v, complex) else abs(float(v))
            if not math.isfinite(v):
                raise ValueError("values must be finite")
            if v > 0:
                clean[k] = v
        object.__setattr__(self, "entries", dict(sorted(clean.items())))

    @classmethod
    def delta(cls, point: Sequence[int], value: float = 1.0) -> "SupportedSequence":
        return cls(len(point), {tuple(point): value})

    def __len__(self):
        return len(self.entries)

    def points(self) -> np.ndarray:
        if not self.entries:
            return np.zeros((0, self.dim), dtype=np.int64)
        return np.array(list(self.entries), dtype=np.int64).reshape(-1, self.dim)

    def magnitudes(self) -> np.ndarray:
        return np.fromiter(self.entries.values(), dtype=float, count=len(self.entries))

    def scaled(self, c: float) -> "SupportedSequence":
        return SupportedSequence(self.dim, {k: c * v for k, v in self.entries.items()})


AnySequence = Union[FiniteSequence, SupportedSequence]


def as_supported(seq: AnySequence) -> SupportedSequence:
    return seq.to_supported() if isinstance(seq, FiniteSequence) else seq


def _magnitudes(seq) -> np.ndarray:
    if isinstance(seq, FiniteSequence):
        return seq.values
    if isinstance(seq, SupportedSequence):
        return seq.magnitudes()
    return np.abs(np.asarray(seq, dtype=float)).ravel()


# ---------------------------------------------------------------------------
# dyadic Morrey norms


def _level_power_sums(grid_p: np.ndarray, dim: int):
    """Yield ``(nu, sums)`` with ``sums`` the p-th power sums of all level-nu cubes.

    ``grid_p`` has shape ``batch + (2^J,)*dim``; one reshape-and-sum per level.
    """
    batch = grid_p.shape[:grid_p.ndim - dim]
    side = grid_p.shape[-1]
    level, nu = side.bit_length() - 1, 0
    sums = grid_p
    yield 0, sums
    while nu < level:
        half = side >> (nu + 1)
        shape = batch + sum(((half, 2) for _ in range(dim)), ())
        axes = tuple(len(batch) + 2 * i + 1 for i in range(dim))
        sums = sums.reshape(shape).sum(axis=axes)
        nu += 1
        yield nu, sums


def morrey_norm_batch(values: np.ndarray, dim: int, params: SpaceParams) -> np.ndarray:
    """Finite-space norms for a stack of sequences, ``values`` of shape ``(..., 2^{Jd})``."""
    values = np.abs(np.asarray(values, dtype=float))
    n = values.shape[-1]
    level = round(math.log2(n)) // dim if n > 1 else 0
    if 1 << (level * dim) != n:
        raise ValueError(f"length {n} is not 2^(J*{dim})")
    side = 1 << level
    grid_p = values.reshape(values.shape[:-1] + (side,) * dim) ** params.p
    best = None
    for nu, sums in _level_power_sums(grid_p, dim):
        weight = 2.0 ** (nu * dim * params.exponent)
        flat = sums.reshape(sums.shape[:sums.ndim - dim] + (-1,))
        top = weight * flat.max(axis=-1) ** (1.0 / params.p)
        best = top if best is None else np.maximum(best, top)
    return best


def morrey_norm_finite(seq: FiniteSequence, params: SpaceParams) -> float:
    """Norm in ``m_{u,p}^{2^{Jd}}``: supremum over dyadic sub-cubes of ``Q_{-J,0}``."""
    return float(morrey_norm_batch(seq.values, seq.dim, params))


def _finite_cube_values(seq: FiniteSequence, params: SpaceParams):
    grid_p = seq.grid() ** params.p
    for nu, sums in _level_power_sums(grid_p, seq.dim):
        yield nu, 2.0 ** (nu * seq.dim * params.exponent) * sums ** (1.0 / params.p)


def _supported_cube_values(seq: SupportedSequence, params: SpaceParams, top_level: int):
    """Yield ``(level, origins, values)`` for every cube meeting the support."""
    pts = seq.points()
    vals_p = seq.magnitudes() ** params.p
    for j in range(top_level + 1):
        keys = pts >> j
        origins, inverse = np.unique(keys, axis=0, return_inverse=True)
        sums = np.bincount(inverse.ravel(), weights=vals_p, minlength=len(origins))
        yield j, origins, 2.0 ** (j * seq.dim * params.exponent) * sums ** (1.0 / params.p)


def morrey_norm_supported(seq: SupportedSequence, params: SpaceParams) -> float:
    """Exact ``||lambda | m_{u,p}(Z^d)||`` for a finitely supported sequence.

    Levels above :func:`~morreyseq.dyadic.stable_level` see the same point
    groups with a weight that does not increase, so they are skipped.
    """
    if not seq.entries:
        return 0.0
    top = stable_level(seq.entries)
    return max(float(v.max()) for _, _, v in _supported_cube_values(seq, params, top))


def morrey_norm(seq: AnySequence, params: SpaceParams) -> float:
    if isinstance(seq, FiniteSequence):
        return morrey_norm_finite(seq, params)
    return morrey_norm_supported(seq, params)


def attaining_cube(seq: AnySequence, params: SpaceParams) -> DyadicCube:
    """A dyadic cube where the Morrey supremum is attained.

    Smallest level among maximisers, then lexicographically smallest origin.
    """
    if params.p >= params.u:
        raise ValueError("attaining cube requires p < u")
    best_val, best_cube = 0.0, None
    if isinstance(seq, FiniteSequence):
        for nu, vals in _finite_cube_values(seq, params):
            flat = vals.ravel()
            i = int(np.argmax(flat))
            if flat[i] > best_val:
                origin = np.unravel_index(i, vals.shape)
                best_val, best_cube = flat[i], DyadicCube(nu, tuple(int(c) for c in origin))
    else:
        if seq.entries:
            top = stable_level(seq.entries)
            for j, origins, vals in _supported_cube_values(seq, params, top):
                i = int(np.argmax(vals))
                if vals[i] > best_val:
                    best_val, best_cube = vals[i], DyadicCube(j, tuple(int(c) for c in origins[i]))
    if best_cube is None:
        raise ValueError("the zero sequence has no attaining cube")
    return best_cube


def cube_value(seq: AnySequence, params: SpaceParams, cube: DyadicCube) -> float:
    """``|Q|^{1/u-1/p} (sum_{k in Q} lambda_k^p)^{1/p}`` for one cube."""
    sup = as_supported(seq)
    total = sum(v ** params.p for k, v in sup.entries.items() if cube.contains(k))
    return 2.0 ** (cube.level * cube.dim * params.exponent) * total ** (1.0 / params.p)


# ---------------------------------------------------------------------------
# classical sequence norms


def lp_norm(seq, p: float) -> float:
    if p <= 0:
        raise ValueError("requires p > 0")
    v = _magnitudes(seq)
    if math.isinf(p):
        return linf_norm(seq)
    return float(np.sum(v ** p) ** (1.0 / p))


def linf_norm(seq) -> float:
    v = _magnitudes(seq)
    return float(v.max()) if v.size else 0.0


def lorentz_quasinorm(seq, u: float) -> float:
    """``sup_nu nu^{1/u} lambda*_nu`` over the non-increasing rearrangement."""
    if u <= 0:
        raise ValueError("requires u > 0")
    v = np.sort(_magnitudes(seq))[::-1]
    if v.size == 0:
        return 0.0
    nu = np.arange(1, v.size + 1, dtype=float)
    return float(np.max(nu ** (1.0 / u) * v))


def lorentz_embedding_constant(params: SpaceParams, level: int, dim: int) -> float:
    """Bound ``C`` with ``||lambda | m_{u,p}^{2^{Jd}}|| <= C ||lambda | l_{u,inf}||``.

    Each level-nu cube holds at most ``2^{nu d}`` terms, each at most
    ``||lambda||_{u,inf} i^{-1/u}`` after rearrangement.
    """
    best = 0.0
    for nu in range(level + 1):
        i = np.arange(1, (1 << (nu * dim)) + 1, dtype=float)
        partial = float(np.sum(i ** (-params.p / params.u)))
        best = max(best, 2.0 ** (nu * dim * params.exponent) * partial ** (1.0 / params.p))
    return best


# ---------------------------------------------------------------------------
# arbitrary-cube equivalent norms


def _box_sums(grid: np.ndarray, n: int) -> np.ndarray:
    """Sums of ``grid`` over every axis-aligned box with ``n`` cells per side."""
    sat = grid
    for ax in range(grid.ndim):
        sat = np.cumsum(sat, axis=ax)
        pad = [(0, 0)] * grid.ndim
        pad[ax] = (1, 0)
        sat = np.pad(sat, pad)
    out = 0.0
    dim = grid.ndim
    for corner in range(1 << dim):
        sl, sign = [], 1
        for ax in range(dim):
            if corner >> ax & 1:
                sl.append(slice(n, None))
            else:
                sl.append(slice(0, sat.shape[ax] - n))
                sign = -sign
        out = out + sign * sat[tuple(sl)]
    return out


def _arbitrary_sup(seq: SupportedSequence, params: SpaceParams, variant: int) -> float:
    if not seq.entries:
        return 0.0
    pts = seq.points()
    lo = pts.min(axis=0)
    width = int((pts.max(axis=0) - lo).max()) + 1
    dim = seq.dim
    # zero margin so boxes may hang over the support on every side
    grid = np.zeros((3 * width,) * dim)
    idx = tuple((pts - lo + width).T)
    grid[idx] = seq.magnitudes() ** params.p
    best = 0.0
    for n in range(1, width + 1):
        side = n if variant == 1 else max(1, n - 2)
        sums = _box_sums(grid, n)
        top = float(sums.max())
        if top > 0:
            best = max(best, side ** (dim * params.exponent) * top ** (1.0 / params.p))
    return best


def equiv_norm_arbitrary(seq: AnySequence, params: SpaceParams, variant: int) -> float:
    """Supremum over closed cubes ``Q`` with ``|Q| >= 1``.

    ``variant=1`` sums over cells contained in ``Q``, ``variant=2`` over
    cells meeting ``Q``. Both reduce to a scan over integer boxes of ``n``
    cells per side: a closed cube containing such a box has side at least
    ``n``, while cubes meeting exactly the box cells have sides down to
    ``max(1, n - 2)`` in the limit (the supremum is not attained there).
    """
    if variant not in (1, 2):
        raise ValueError("variant must be 1 or 2")
    sup = as_supported(seq)
    one = _arbitrary_sup(sup, params, 1)
    two = _arbitrary_sup(sup, params, 2)
    dyadic = morrey_norm_supported(sup, params)
    scale = max(dyadic, 1e-300)
    if dyadic > one + _ORDER_SLACK * scale or one > two + _ORDER_SLACK * scale:
        raise RuntimeError(
            f"norm ordering violated: dyadic={dyadic!r}, arb1={one!r}, arb2={two!r}")
    return one if variant == 1 else two


def equivalence_constant(params: SpaceParams, dim: int) -> float:
    """``C`` with ``||lambda||_(2) <= C ||lambda | m_{u,p}||``.

    Cells meeting a cube of side ``r`` lie in at most ``2^d`` dyadic cubes of
    volume ``<= 4^d r^d``, each carrying p-th power mass at most
    ``||lambda||^p |Q|^{1-p/u}``.
    """
    return 2.0 ** (dim / params.p) * 2.0 ** (-2 * dim * params.exponent)


# ---------------------------------------------------------------------------
# predual level norm


def _group_norm(vals: np.ndarray, inverse: np.ndarray, count: int, r: float) -> np.ndarray:
    if math.isinf(r):
        out = np.zeros(count)
        np.maximum.at(out, inverse, vals)
        return out
    return np.bincount(inverse, weights=vals ** r, minlength=count) ** (1.0 / r)


def predual_level_norm(seq: AnySequence, params: SpaceParams, j: int) -> float:
    """``2^{jd(1/p-1/u)} sum_m ||lambda restricted to Q_{-j,m}||_{p'}``."""
    if params.p < 1 or params.p >= params.u:
        raise ValueError("predual level norm requires 1 <= p < u")
    if j < 0:
        raise ValueError("level must be nonnegative")
    sup = as_supported(seq)
    if not sup.entries:
        return 0.0
    keys = sup.points() >> j
    origins, inverse = np.unique(keys, axis=0, return_inverse=True)
    groups = _group_norm(sup.magnitudes(), inverse.ravel(), len(origins), params.p_conj)
    return float(2.0 ** (-j * sup.dim * params.exponent) * groups.sum())


# ---------------------------------------------------------------------------
# pointwise algebra


def product(seqs: Sequence[AnySequence]) -> AnySequence:
    """Pointwise product of magnitudes."""
    seqs = list(seqs)
    if not seqs:
        raise ValueError("need at least one sequence")
    first = seqs[0]
    if all(isinstance(s, FiniteSequence) for s in seqs):
        if any((s.dim, s.level) != (first.dim, first.level) for s in seqs):
            raise ValueError("finite sequences must share dim and level")
        out = np.ones_like(first.values)
        for s in seqs:
            out = out * s.values
        return FiniteSequence(first.dim, first.level, out)
    if all(isinstance(s, SupportedSequence) for s in seqs):
        if any(s.dim != first.dim for s in seqs):
            raise ValueError("supported sequences must share dim")
        common = set(first.entries)
        for s in seqs[1:]:
            common &= set(s.entries)
        return SupportedSequence(first.dim, {k: math.prod(s.entries[k] for s in seqs)
                                             for k in common})
    raise TypeError("cannot mix finite and supported sequences")


def power(seq: AnySequence, r: float) -> AnySequence:
    """Pointwise ``|lambda_k|^r``."""
    if r <= 0:
        raise ValueError("requires r > 0")
    if isinstance(seq, FiniteSequence):
        return FiniteSequence(seq.dim, seq.level, seq.values ** r)
    return SupportedSequence(seq.dim, {k: v ** r for k, v in seq.entries.items()})


def supported_from_items(dim: int, items: Iterable[tuple[Sequence[int], float]]) -> SupportedSequence:
    return SupportedSequence(dim, {tuple(k): v for k, v in items})
