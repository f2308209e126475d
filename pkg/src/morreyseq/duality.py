"""Pairing, level-norm constants and two-sided bounds for the predual norm.

The predual norm is an infimum over decompositions ``lambda = sum_j
lambda^(j)`` of ``sum_j ||lambda^(j)||^(j)_{u,p}``. For nonnegative
``lambda`` it suffices to search nonnegative components supported in
``supp(lambda)``: given any decomposition ``x_j``, the components
``y_j = x_j^+ * lambda / sum_i x_i^+`` (per cell) still sum to ``lambda``
and satisfy ``|y_j| <= |x_j|``, so no level norm increases.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .dyadic import DyadicCube, cells_in, stable_level
from .spaces import (AnySequence, SpaceParams, SupportedSequence, as_supported,
                     morrey_norm_supported, predual_level_norm)


def _require_predual(params: SpaceParams):
    if params.p < 1 or params.p >= params.u:
        raise ValueError("predual quantities require 1 <= p < u")


def pairing(lam: AnySequence, mu: AnySequence) -> float:
    """``sum_k lambda_k mu_k`` over the common support."""
    a, b = as_supported(lam), as_supported(mu)
    if a.dim != b.dim:
        raise ValueError("sequences must share dim")
    small, big = (a, b) if len(a) <= len(b) else (b, a)
    return float(sum(v * big.entries[k] for k, v in small.entries.items() if k in big.entries))


def l1_equivalence_constants(params: SpaceParams, j: int, dim: int = 1) -> tuple[float, float]:
    """``(c, C)`` with ``c ||x||_1 <= ||x||^(j)_{u,p} <= C ||x||_1``."""
    _require_predual(params)
    return 2.0 ** (-j * dim / params.u), 2.0 ** (-j * dim * params.exponent)


def dual_extremal(j: int, m0: Sequence[int], params: SpaceParams) -> SupportedSequence:
    """Constant ``2^{-jd/u'}`` on ``Q_{-j,m0}``: unit norm in both ``l_{u'}`` and level ``j``."""
    _require_predual(params)
    cube = DyadicCube(j, tuple(m0))
    value = 2.0 ** (-j * cube.dim / params.u_conj)
    return SupportedSequence(cube.dim, {k: value for k in cells_in(cube)})


# ---------------------------------------------------------------------------
# upper bound: projected subgradient over decompositions


@dataclass(frozen=True)
class Decomposition:
    levels: list[tuple[int, SupportedSequence]]

    def total(self, dim: int) -> SupportedSequence:
        out: dict = {}
        for _, comp in self.levels:
            for k, v in comp.entries.items():
                out[k] = out.get(k, 0.0) + v
        return SupportedSequence(dim, out)

    def cost(self, params: SpaceParams) -> float:
        return sum(predual_level_norm(c, params, j) for j, c in self.levels if c.entries)


@dataclass(frozen=True)
class PredualUpper:
    value: float
    decomposition: Decomposition = field(repr=False)
    converged: bool
    iterations: int
    dual_hint: Optional[SupportedSequence] = field(default=None, repr=False)


class _LevelObjective:
    """Objective and subgradient of ``Y -> sum_j ||Y[j]||^(j)`` on a fixed support."""

    def __init__(self, pts: np.ndarray, params: SpaceParams, top: int):
        self.params = params
        self.r = params.p_conj
        self.groups = []
        for j in range(top + 1):
            _, inv = np.unique(pts >> j, axis=0, return_inverse=True)
            inv = inv.ravel()
            weight = 2.0 ** (-j * pts.shape[1] * params.exponent)
            self.groups.append((inv, int(inv.max()) + 1, weight))

    def value(self, Y: np.ndarray) -> float:
        total = 0.0
        for row, (inv, count, w) in zip(Y, self.groups):
            total += w * float(self._norms(row, inv, count).sum())
        return total

    def _norms(self, row, inv, count):
        if math.isinf(self.r):
            out = np.zeros(count)
            np.maximum.at(out, inv, row)
            return out
        return np.bincount(inv, weights=row ** self.r, minlength=count) ** (1.0 / self.r)

    def subgradient(self, Y: np.ndarray) -> np.ndarray:
        G = np.zeros_like(Y)
        for i, (row, (inv, count, w)) in enumerate(zip(Y, self.groups)):
            norms = self._norms(row, inv, count)
            gn = norms[inv]
            if math.isinf(self.r):
                # unit mass on the first maximiser of each group
                order = np.lexsort((np.arange(row.size), -row, inv))
                _, first = np.unique(inv[order], return_index=True)
                g = np.zeros_like(row)
                pick = order[first]
                g[pick[row[pick] > 0]] = 1.0
                G[i] = w * g
            else:
                with np.errstate(divide="ignore", invalid="ignore"):
                    g = np.where(gn > 0, (row / np.where(gn > 0, gn, 1.0)) ** (self.r - 1), 0.0)
                G[i] = w * g
        return G


def _project_columns(Y: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """Euclidean projection of each column onto ``{y >= 0, sum y = lam_k}``."""
    L = Y.shape[0]
    srt = -np.sort(-Y, axis=0)
    css = np.cumsum(srt, axis=0) - lam[None, :]
    ind = np.arange(1, L + 1)[:, None]
    cond = srt - css / ind > 0
    rho = L - 1 - np.argmax(cond[::-1], axis=0)
    theta = css[rho, np.arange(Y.shape[1])] / (rho + 1)
    return np.maximum(Y - theta[None, :], 0.0)


def predual_norm_upper(lam: AnySequence, params: SpaceParams, J_max: Optional[int] = None,
                       max_iter: int = 20000, tol: float = 1e-9, window: int = 100,
                       min_iter: int = 500) -> PredualUpper:
    """Upper bound on ``||lambda | X_{u,p}||`` from decompositions on levels ``0..J_max``.

    Projected subgradient descent from the all-at-level-0 decomposition
    with steps ``c/sqrt(t)``; stops once the best value improved by less
    than ``tol`` (relative) over ``window`` iterations.
    """
    _require_predual(params)
    sup = as_supported(lam)
    if not sup.entries:
        return PredualUpper(0.0, Decomposition([]), True, 0)
    pts, vals = sup.points(), sup.magnitudes()
    top = stable_level(sup.entries) if J_max is None else int(J_max)
    if top < 0:
        raise ValueError("J_max must be nonnegative")
    obj = _LevelObjective(pts, params, top)
    L, n = top + 1, len(vals)

    Y = np.zeros((L, n))
    Y[0] = vals
    best_Y, best = Y.copy(), obj.value(Y)
    for j in range(1, L):
        single = np.zeros((L, n))
        single[j] = vals
        v = obj.value(single)
        if v < best:
            best_Y, best = single, v

    step0 = float(vals.max())
    history = [best]
    converged, it = False, 0
    for it in range(1, max_iter + 1):
        G = obj.subgradient(Y)
        # move in the tangent space of the column-sum constraint
        G = G - G.mean(axis=0, keepdims=True)
        gnorm = float(np.linalg.norm(G))
        if gnorm == 0.0:
            converged = True
            break
        Y = _project_columns(Y - step0 / math.sqrt(it) * G / gnorm, vals)
        v = obj.value(Y)
        if v < best:
            best, best_Y = v, Y.copy()
        history.append(best)
        if it >= max(min_iter, window) and history[-window - 1] - best <= tol * best:
            converged = True
            break

    # re-normalise columns exactly so the decomposition sums to lambda
    col = best_Y.sum(axis=0)
    best_Y = best_Y * (vals / col)[None, :]
    keys = [tuple(int(c) for c in k) for k in pts]
    levels = [(j, SupportedSequence(sup.dim, dict(zip(keys, best_Y[j]))))
              for j in range(L) if best_Y[j].any()]
    decomp = Decomposition(levels)
    value = decomp.cost(params)
    hint = _dual_hint(obj, best_Y, keys, sup.dim)
    return PredualUpper(value, decomp, converged, it, hint)


def _dual_hint(obj: _LevelObjective, Y: np.ndarray, keys, dim: int) -> Optional[SupportedSequence]:
    # optimality forces mu_k <= g_{j,k} on every level, with equality where Y[j,k] > 0
    G = obj.subgradient(Y)
    mu = G.min(axis=0)
    if not np.any(mu > 0):
        return None
    return SupportedSequence(dim, dict(zip(keys, np.maximum(mu, 0.0))))


# ---------------------------------------------------------------------------
# lower bound: weak duality against Morrey-normed candidates


@dataclass(frozen=True)
class PredualLower:
    value: float
    witness: Optional[SupportedSequence] = field(repr=False)


def default_candidates(lam: AnySequence, J_max: Optional[int] = None,
                       params: Optional[SpaceParams] = None) -> list[SupportedSequence]:
    """Deltas on the support, constants on ancestor cubes, and ``lambda`` itself.

    With ``params`` given, also ``lambda^{u'-1}``: its ``m_{u,p}`` norm is at
    most its ``l_u`` norm, so it certifies ``||lambda||_{u'}`` from below.
    """
    sup = as_supported(lam)
    if not sup.entries:
        return []
    top = stable_level(sup.entries) if J_max is None else J_max
    out = [SupportedSequence.delta(k) for k in sup.entries]
    for j in range(1, top + 1):
        cubes = sorted({tuple(int(c) >> j for c in k) for k in sup.entries})
        for origin in cubes:
            cube = DyadicCube(j, origin)
            out.append(SupportedSequence(sup.dim, {k: 1.0 for k in cells_in(cube)}))
    out.append(sup)
    if params is not None and not math.isinf(params.u_conj):
        out.append(SupportedSequence(sup.dim, {k: v ** (params.u_conj - 1)
                                               for k, v in sup.entries.items()}))
    return out


def predual_norm_lower(lam: AnySequence, params: SpaceParams,
                       candidates: Optional[Iterable[AnySequence]] = None) -> PredualLower:
    """``max_mu |<lambda, mu>| / ||mu | m_{u,p}||``, a certified lower bound."""
    _require_predual(params)
    cands = default_candidates(lam, params=params) if candidates is None else list(candidates)
    best, arg = 0.0, None
    for mu in cands:
        mu = as_supported(mu)
        norm = morrey_norm_supported(mu, params)
        if norm == 0:
            raise ValueError("candidates must be nonzero")
        val = abs(pairing(lam, mu)) / norm
        if val > best:
            best, arg = val, mu
    return PredualLower(best, arg)


def predual_bounds(lam: AnySequence, params: SpaceParams, J_max: Optional[int] = None,
                   **solver) -> tuple[PredualLower, PredualUpper]:
    """Both bounds; the solver's dual hint joins the default candidates."""
    upper = predual_norm_upper(lam, params, J_max, **solver)
    cands = default_candidates(lam, J_max, params)
    if upper.dual_hint is not None:
        cands.append(upper.dual_hint)
    lower = predual_norm_lower(lam, params, cands)
    return lower, upper
