"""Norms of identity maps between Morrey spaces and the witnesses behind them."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .dyadic import DyadicCube, cells_in
from .parallel import chunk_ranges, ordered_map
from .spaces import (FiniteSequence, SpaceParams, SupportedSequence, morrey_norm,
                     morrey_norm_batch, morrey_norm_finite)

log = logging.getLogger(__name__)

EXHAUSTIVE_LIMIT = 16
_PATTERN_CHUNK = 4096


@dataclass(frozen=True)
class EmbeddingCase:
    source: SpaceParams
    target: SpaceParams
    dim: int = 1
    level: int = 0

    def __post_init__(self):
        if self.dim < 1 or self.level < 0:
            raise ValueError("dim must be positive and level nonnegative")

    @property
    def cells(self) -> int:
        return 1 << (self.dim * self.level)

    def ratio(self, values) -> np.ndarray:
        """``||x||_target / ||x||_source`` for rows of ``values``."""
        num = morrey_norm_batch(values, self.dim, self.target)
        den = morrey_norm_batch(values, self.dim, self.source)
        return num / den


@dataclass(frozen=True)
class NormResult:
    kind: str
    lower: float
    upper: float

    @classmethod
    def exact(cls, value: float) -> "NormResult":
        return cls("exact", value, value)

    @property
    def value(self) -> Optional[float]:
        return self.lower if self.kind == "exact" else None

    @property
    def constant(self) -> float:
        """Ratio ``lower/upper``; the constant ``c`` of the two-sided bound."""
        return self.lower / self.upper


def embedding_admissible(src: SpaceParams, tgt: SpaceParams) -> bool:
    """Whether ``m_{u1,p1}(Z^d)`` embeds continuously into ``m_{u2,p2}(Z^d)``."""
    return src.u <= tgt.u and tgt.p * src.u <= src.p * tgt.u


def _ratio_regime(src: SpaceParams, tgt: SpaceParams) -> str:
    if src.p >= tgt.p:
        return "one" if tgt.u >= src.u else "volume"
    if tgt.p * src.u <= src.p * tgt.u:
        return "one"
    return "interval"


def embedding_norm_closed_form(case: EmbeddingCase) -> NormResult:
    """``||id_j : m^{2^{jd}}_{u1,p1} -> m^{2^{jd}}_{u2,p2}||``.

    In the last regime (``p1 < p2`` and ``p2/u2 > p1/u1``) only bounds are
    known; the lower end is the best ratio among the delta, constant and
    spread witnesses, each evaluated exactly.
    """
    src, tgt = case.source, case.target
    jd = case.level * case.dim
    regime = _ratio_regime(src, tgt)
    if regime == "one":
        return NormResult.exact(1.0)
    if regime == "volume":
        return NormResult.exact(2.0 ** (jd * (1.0 / tgt.u - 1.0 / src.u)))
    upper = 2.0 ** (jd * (1.0 / tgt.u - src.p / (src.u * tgt.p)))
    witnesses = [np.eye(1, case.cells)[0], np.ones(case.cells),
                 spread_pattern(case.level, case.dim, src.p, src.u).values]
    lower = float(np.max(case.ratio(np.array(witnesses))))
    return NormResult("interval", min(lower, upper), upper)


# ---------------------------------------------------------------------------
# brute-force oracle


@dataclass(frozen=True)
class OracleResult:
    value: float
    maximizer: np.ndarray = field(repr=False)
    pattern_value: float
    pattern: tuple[int, ...]


def _patterns(lo: int, hi: int, n: int) -> np.ndarray:
    idx = np.arange(lo, hi, dtype=np.int64)[:, None]
    # bit i of the pattern index marks cell n-1-i, so index order is lexicographic
    return ((idx >> np.arange(n - 1, -1, -1)) & 1).astype(float)


def _best_pattern(case: EmbeddingCase) -> tuple[float, int]:
    n = case.cells

    def scan(bounds):
        lo, hi = bounds
        r = case.ratio(_patterns(lo, hi, n))
        i = int(np.argmax(r))
        return float(r[i]), lo + i

    # pattern 0 is the zero sequence
    parts = ordered_map(scan, [(lo + 1, hi + 1) for lo, hi in
                               chunk_ranges((1 << n) - 1, _PATTERN_CHUNK)])
    best_val, best_idx = -1.0, -1
    for val, idx in parts:
        if val > best_val:
            best_val, best_idx = val, idx
    return best_val, best_idx


def _coordinate_ascent(case: EmbeddingCase, x: np.ndarray, sweeps: int) -> tuple[float, np.ndarray]:
    n = x.size
    best = float(case.ratio(x))
    step = 0.5
    factors = np.array([0.0, 0.25, 0.5, 0.8, 0.95, 1.05, 1.25, 2.0, 4.0])
    for _ in range(sweeps):
        improved = False
        scale = float(x.max())
        for i in range(n):
            cand = np.repeat(x[None, :], factors.size + 2, axis=0)
            cand[:factors.size, i] = x[i] * factors
            cand[factors.size, i] = x[i] + step * scale
            cand[factors.size + 1, i] = max(x[i] - step * scale, 0.0)
            ok = cand.max(axis=1) > 0
            r = np.full(cand.shape[0], -np.inf)
            if ok.any():
                r[ok] = case.ratio(cand[ok])
            k = int(np.argmax(r))
            if r[k] > best * (1 + 1e-15):
                best, x = float(r[k]), cand[k]
                improved = True
        if not improved:
            step *= 0.5
            if step < 1e-6:
                break
    return best, x


def embedding_norm_bruteforce(case: EmbeddingCase, budget: int = 50, seed: int = 0,
                              restarts: int = 2) -> OracleResult:
    """Certified lower bound on ``||id_j||`` by search.

    All ``{0,1}`` support patterns are scanned exhaustively, then
    coordinate ascent over general nonnegative values refines the best
    pattern (and ``restarts`` seeded perturbations of it) for up to
    ``budget`` sweeps each.
    """
    n = case.cells
    if n > EXHAUSTIVE_LIMIT:
        raise ValueError(f"2^(jd) = {n} cells exceeds the exhaustive limit {EXHAUSTIVE_LIMIT}")
    pattern_value, idx = _best_pattern(case)
    pattern = _patterns(idx, idx + 1, n)[0]
    best, best_x = pattern_value, pattern
    rng = np.random.default_rng(seed)
    starts = [pattern] + [pattern * rng.uniform(0.5, 1.0, n) + 0.05 * rng.uniform(size=n)
                          for _ in range(restarts)]
    for start in starts:
        val, x = _coordinate_ascent(case, start.copy(), budget)
        if val > best:
            best, best_x = val, x
    if best > pattern_value * (1 + 1e-9):
        log.info("ascent beat the best 0/1 pattern: %.17g > %.17g for %s",
                 best, pattern_value, case)
    best_x = best_x / morrey_norm_batch(best_x, case.dim, case.source)
    return OracleResult(best, best_x, pattern_value, tuple(int(b) for b in pattern))


# ---------------------------------------------------------------------------
# witnesses


def witness_u_decrease(u1: float, p1: float, dim: int, level: int) -> SupportedSequence:
    """Constant ``|Q|^{-1/u1}`` on the cube ``Q_{-j,(4^j,0,...,0)}``.

    Unit norm in ``m_{u1,p1}``; norm ``2^{jd(1/u2-1/u1)}`` in ``m_{u2,p2}``
    whenever ``u2 < u1``.
    """
    SpaceParams(u1, p1)
    if level < 0:
        raise ValueError("level must be nonnegative")
    origin = (1 << (2 * level),) + (0,) * (dim - 1)
    value = 2.0 ** (-level * dim / u1)
    return SupportedSequence(dim, {k: value for k in cells_in(DyadicCube(level, origin))})


def spread_caps(level: int, dim: int, p1: float, u1: float) -> list[int]:
    """Largest number of ones a level-nu sub-cube may hold, for nu = 0..level.

    A 0/1 sequence has unit ``m_{u1,p1}`` norm iff every level-nu cube
    holds at most ``floor(2^{nu d (1-p1/u1)})`` ones; feasibility further
    limits a cube to ``2^d`` times what each child may hold.
    """
    a = 1.0 - p1 / u1
    caps = [1]
    for nu in range(1, level + 1):
        floor_cap = max(1, math.floor(2.0 ** (dim * nu * a) * (1 + 1e-15)))
        caps.append(min(floor_cap, caps[-1] << dim))
    return caps


def spread_pattern(level: int, dim: int, p1: float, u1: float) -> FiniteSequence:
    """0/1 sequence on ``K_j`` with ones spread as evenly as the caps allow.

    Ones are split top-down: a cube's count goes to its ``2^d`` children as
    evenly as possible, lexicographically first children taking the
    remainder.
    """
    if not 0 < p1 < u1:
        raise ValueError("spread pattern requires 0 < p1 < u1")
    caps = spread_caps(level, dim, p1, u1)
    counts = np.array(caps[level], dtype=np.int64).reshape((1,) * dim)
    nchild = 1 << dim
    # lexicographic rank of each child inside its parent block
    rank = np.zeros((2,) * dim, dtype=np.int64)
    for ax in range(dim):
        shape = [1] * dim
        shape[ax] = 2
        rank = rank + (np.arange(2).reshape(shape) << (dim - 1 - ax))
    for nu in range(level, 0, -1):
        base, rem = np.divmod(counts, nchild)
        for ax in range(dim):
            base = np.repeat(base, 2, axis=ax)
            rem = np.repeat(rem, 2, axis=ax)
        tiled_rank = np.tile(rank, counts.shape)
        counts = base + (tiled_rank < rem)
        if counts.max() > caps[nu - 1]:
            raise AssertionError(f"spread cap violated at level {nu - 1}")
    return FiniteSequence(dim, level, counts.astype(float).ravel())


@dataclass(frozen=True)
class BlowupWitness:
    sequence: FiniteSequence = field(repr=False)
    ratio: float
    level: int


def witness_ratio_blowup(src: SpaceParams, tgt: SpaceParams, dim: int, target_ratio: float,
                         max_cells: int = 1 << 22) -> BlowupWitness:
    """First spread pattern whose target/source norm ratio reaches ``target_ratio``."""
    if not (src.u <= tgt.u and src.p * tgt.u < tgt.p * src.u):
        raise ValueError("ratio blow-up needs u1 <= u2 and p1/u1 < p2/u2; "
                         "for u2 < u1 use witness_u_decrease")
    level = 1
    while (1 << (level * dim)) <= max_cells:
        seq = spread_pattern(level, dim, src.p, src.u)
        ratio = morrey_norm_finite(seq, tgt) / morrey_norm_finite(seq, src)
        if ratio >= target_ratio:
            return BlowupWitness(seq, ratio, level)
        level += 1
    raise ValueError(f"target ratio {target_ratio} not reached within {max_cells} cells")


# ---------------------------------------------------------------------------
# separation family


@dataclass(frozen=True)
class SignedSequence:
    """Finitely supported real sequence; signs kept for differences only."""

    dim: int
    entries: dict

    def __sub__(self, other: "SignedSequence") -> "SignedSequence":
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out.get(k, 0.0) - v
        return SignedSequence(self.dim, {k: v for k, v in out.items() if v != 0})

    def magnitudes(self) -> SupportedSequence:
        return SupportedSequence(self.dim, self.entries)


def separation_cubes(levels: Sequence[int], dim: int) -> list[DyadicCube]:
    levels = list(levels)
    if not levels or any(b <= a for a, b in zip(levels, levels[1:])) or levels[0] < 0:
        raise ValueError("levels must be nonnegative and strictly increasing")
    top = levels[-1]
    return [DyadicCube(j, ((4 ** ell) << top,) + (0,) * (dim - 1))
            for ell, j in enumerate(levels, start=1)]


def separation_family(levels: Sequence[int], dim: int, u: float,
                      signs: Sequence[Sequence[int]]) -> list[SignedSequence]:
    """Sequences ``+-2^{-j_l d/u}`` on disjoint cubes of levels ``j_1 < ... < j_L``.

    Each sign vector lists one sign per cell, cube by cube.
    """
    cubes = separation_cubes(levels, dim)
    cells = [k for q in cubes for k in cells_in(q)]
    mags = [2.0 ** (-q.level * dim / u) for q in cubes for _ in range(q.volume)]
    family = []
    for s in signs:
        s = list(s)
        if len(s) != len(cells) or any(x not in (1, -1) for x in s):
            raise ValueError(f"sign vector must hold {len(cells)} entries of +-1")
        family.append(SignedSequence(dim, {k: x * m for k, x, m in zip(cells, s, mags)}))
    return family


def separation_norm_bound(levels: Sequence[int], dim: int, params: SpaceParams) -> float:
    """Bound on every family member's ``m_{u,p}`` norm.

    A cube inside one block gives at most 1; a cube swallowing blocks
    ``1..n`` has volume at least ``2^{j_n d}`` and p-th power mass
    ``sum_{i<=n} 2^{j_i d (1-p/u)}``.
    """
    u, p = params.u, params.p
    best = 1.0
    mass = 0.0
    for j in levels:
        mass += 2.0 ** (j * dim * (1 - p / u))
        best = max(best, 2.0 ** (j * dim * params.exponent) * mass ** (1 / p))
    return best


def separation_distance(a: SignedSequence, b: SignedSequence, params: SpaceParams) -> float:
    return morrey_norm((a - b).magnitudes(), params)
