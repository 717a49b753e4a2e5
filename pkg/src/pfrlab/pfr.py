"""Poisson functional representation: exact selection over an infinite process.

Given a target law P and a proposal law Q with P << Q, the selector returns
K = argmin_i T_i / f(mark_i) over a marked Poisson stream with marks ~ Q,
where f = dP/dQ is the density ratio (a ratio of pmf entries here).  The
selected mark is distributed exactly P, and K given the selected mark y is
geometric with parameter 1 / E[max{f(y), f(Y')}], Y' ~ Q.

The argmin over the infinite process is certified by a finite stopping rule:
with f_max = max_y f(y), no point arriving after time f_max * (best score so
far) can improve the minimum, so generation stops there.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .codebook import CodebookStream
from .errors import AbsoluteContinuityViolated, DegenerateTarget
from .prob import FinitePmf, Kernel, SymbolId, kl_divergence


@dataclass(frozen=True)
class PfrResult:
    """Selected index k, its mark y, the winning score, and points generated.

    examined is the index of the point whose arrival time certified that no
    later point can win; the stream stops there.
    """

    k: int
    y: SymbolId
    score: float
    examined: int


def _density_ratio(target: FinitePmf, proposal: FinitePmf) -> np.ndarray:
    if len(target) != len(proposal):
        raise ValueError("target and proposal need a common alphabet")
    p, q = target.probs, proposal.probs
    if np.any((p > 0) & (q == 0)):
        raise AbsoluteContinuityViolated("target has mass where proposal is zero")
    if not np.any(p > 0):
        raise DegenerateTarget("target has no positive mass")
    return np.divide(p, q, out=np.zeros_like(p), where=q > 0)


@lru_cache(maxsize=512)
def _ratio_cached(target: FinitePmf, proposal: FinitePmf):
    f = _density_ratio(target, proposal)
    f.flags.writeable = False
    return f, float(f.max())


@lru_cache(maxsize=512)
def _mark_law_matches(mark_law: FinitePmf, proposal: FinitePmf) -> bool:
    return bool(np.allclose(mark_law.probs, proposal.probs, rtol=0, atol=1e-9))


def pfr_select(target: FinitePmf, proposal: FinitePmf, stream,
               *, horizon_scale: float = 1.0) -> PfrResult:
    """Exact argmin_i T_i / f(mark_i); marks with f = 0 are skipped but keep their index.

    The stream's mark law must be the proposal.  horizon_scale > 1 extends the
    scan past the provable cutoff (used to regression-test the stopping rule;
    the result never changes).
    """
    f, f_max = _ratio_cached(target, proposal)
    if not _mark_law_matches(stream.mark_law, proposal):
        raise ValueError("stream mark law differs from the proposal")
    stop_scale = horizon_scale * f_max
    if isinstance(stream, CodebookStream):
        return _select_blocked(f, stop_scale, stream)
    best = math.inf
    best_k = 0
    best_y = -1
    advance = stream.next_marked_point
    while True:
        idx, mark, t = advance()
        if t >= best * stop_scale:
            return PfrResult(best_k, best_y, best, idx)
        fy = f[mark]
        if fy > 0.0:
            score = t / fy
            if score < best:
                best, best_k, best_y = score, idx, mark


def _select_blocked(f: np.ndarray, stop_scale: float,
                    stream: CodebookStream) -> PfrResult:
    """Same scan as the generic loop, reading the stream's buffer block-wise.

    Leaves the stream cursor exactly on the stopping point, so interleaving
    with next_marked_point stays consistent.
    """
    best = math.inf
    best_k = 0
    best_y = -1
    while True:
        if stream._pos >= stream._times.size:
            stream._refill()
        i0 = stream._pos
        times = stream._times[i0:]
        marks = stream._marks[i0:]
        base = stream.cursor
        with np.errstate(divide="ignore"):
            scores = times / f[marks]
        tlist = times.tolist()
        slist = scores.tolist()
        for j, t in enumerate(tlist):
            if t >= best * stop_scale:
                stream._pos = i0 + j + 1
                stream.cursor = base + j + 1
                return PfrResult(best_k, best_y, best, base + j + 1)
            s = slist[j]
            if s < best:
                best, best_k, best_y = s, base + j + 1, int(marks[j])
        stream._pos = i0 + len(tlist)
        stream.cursor = base + len(tlist)


def geometric_parameter_exact(target: FinitePmf, proposal: FinitePmf,
                              y: SymbolId) -> float:
    """Exact conditional-geometric parameter of K given the selected mark y."""
    f = _density_ratio(target, proposal)
    if f[y] <= 0.0:
        raise ValueError(f"target({y}) must be positive")
    return 1.0 / float(np.dot(proposal.probs, np.maximum(f[y], f)))


def dominance_parameter(target: FinitePmf, proposal: FinitePmf,
                        y: SymbolId) -> float:
    """Parameter of the dominating geometric law J given mark y: 1/(f(y) + 1).

    First-order dominates the exact conditional law of K, since
    E[max{f(y), f(Y')}] <= f(y) + 1.
    """
    f = _density_ratio(target, proposal)
    if f[y] <= 0.0:
        raise ValueError(f"target({y}) must be positive")
    return 1.0 / (float(f[y]) + 1.0)


def expected_log_k_bound(px: FinitePmf, k: Kernel, q: FinitePmf) -> float:
    """Upper bound on E[log2 K]: the px-average of KL(k[x] || q), plus one bit."""
    total = 0.0
    for x in range(len(px)):
        w = float(px.probs[x])
        if w > 0:
            total += w * kl_divergence(k.row(x), q)
    return total + 1.0
