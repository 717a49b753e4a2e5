"""Monte Carlo harness for pointwise-redundancy experiments.

Each trial draws a source symbol, runs the functional-representation
selector against the RD-optimal kernel with the optimal output marginal as
proposal, and records the index, code lengths, distortion and the three
per-trial redundancies:

* PRR  (rate redundancy):              length - R(D)
* PSR  (source-wise):                  length - jx(x, D)
* PSDR (source-distortion-wise):       length - jx(x, D, d(x, y))

where "length" is log2 k for the plain (non-prefix-free) accounting and the
Elias delta codeword length for the prefix-free one.  Tail fractions of each
redundancy are compared against exact finite-alphabet evaluations of the
corresponding upper bounds.

Trials are embarrassingly parallel: every trial derives its own seed, so
records are identical regardless of scheduling and are merged by trial index.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from .bitcodes import delta_code_length
from .codebook import arrival_stream, derive_subseed
from .errors import UnsupportedEta
from .pfr import pfr_select
from .prob import DistortionMatrix, FinitePmf, Seed, SymbolId, entropy, sample_pmf
from .rd import RdSolution, tilted_information

ETA_KINDS = ("PRR", "PSR", "PSDR")
CODE_KINDS = ("plain", "delta")

CSV_HEADER = ("trial,x,y,k,len_plain,len_delta,dist,iota,j_x,j_xd,"
              "prr_plain,psr_plain,psdr_plain,prr_delta,psr_delta,psdr_delta")


@dataclass(frozen=True, slots=True)
class TrialRecord:
    trial: int
    x: SymbolId
    y: SymbolId
    k: int
    len_plain: int
    len_delta: int
    dist: float
    iota: float
    j_x: float
    j_xd: float
    prr_plain: float
    psr_plain: float
    psdr_plain: float
    prr_delta: float
    psr_delta: float
    psdr_delta: float


@dataclass(frozen=True)
class TailEstimate:
    """Empirical tail fraction with its binomial standard error."""

    gamma: float
    p_hat: float
    std_err: float
    n: int


def _tables(sol: RdSolution):
    """Per-(x, y) lookup tables shared by the trial loop and the bound sums."""
    rows = sol.kernel.rows
    q = sol.output_marginal.probs
    with np.errstate(divide="ignore"):
        iota = np.where(rows > 0.0,
                        np.log2(np.divide(rows, q[None, :],
                                          out=np.ones_like(rows), where=q > 0)),
                        -np.inf)
    nx, ny = rows.shape
    j_x = np.array([tilted_information(sol, x, sol.distortion) for x in range(nx)])
    dmat = sol.distortion_matrix.d
    j_xd = np.array([[tilted_information(sol, x, float(dmat[x, y]))
                      for y in range(ny)] for x in range(nx)])
    return iota, j_x, j_xd


def _run_range(sol, source, d, start, stop, seed, iota, j_x, j_xd):
    rate = sol.rate
    dmat = d.d
    q = sol.output_marginal
    targets = [sol.kernel.row(x) for x in range(len(source))]
    out = []
    for t in range(start, stop):
        x = sample_pmf(source, derive_subseed(seed, t, "source").stream("draw"))
        stream = arrival_stream(derive_subseed(seed, t, "codebook"), "codebook", q)
        res = pfr_select(targets[x], q, stream)
        k, y = res.k, res.y
        log_k = math.log2(k)
        ld = delta_code_length(k)
        jx = float(j_x[x])
        jxd = float(j_xd[x, y])
        out.append(TrialRecord(
            trial=t, x=x, y=y, k=k,
            len_plain=k.bit_length() - 1, len_delta=ld,
            dist=float(dmat[x, y]), iota=float(iota[x, y]), j_x=jx, j_xd=jxd,
            prr_plain=log_k - rate, psr_plain=log_k - jx, psdr_plain=log_k - jxd,
            prr_delta=ld - rate, psr_delta=ld - jx, psdr_delta=ld - jxd))
    return out


def run_trials(sol: RdSolution, source: FinitePmf, d: DistortionMatrix,
               n: int, seed: Seed, threads: int = 1) -> list:
    """n independent trials of the one-shot scheme; deterministic in (seed, n)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    iota, j_x, j_xd = _tables(sol)
    if threads <= 1:
        return _run_range(sol, source, d, 0, n, seed, iota, j_x, j_xd)
    chunk = (n + threads - 1) // threads
    spans = [(i, min(i + chunk, n)) for i in range(0, n, chunk)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = pool.map(lambda span: _run_range(sol, source, d, *span, seed,
                                                 iota, j_x, j_xd), spans)
        return [rec for part in parts for rec in part]


def _redundancies(records, eta_kind: str, code_kind: str) -> np.ndarray:
    if eta_kind not in ETA_KINDS:
        raise UnsupportedEta(f"unknown redundancy kind {eta_kind!r}")
    if code_kind not in CODE_KINDS:
        raise ValueError(f"unknown code kind {code_kind!r}")
    name = f"{eta_kind.lower()}_{code_kind}"
    return np.array([getattr(r, name) for r in records])


def estimate_tail(records, eta_kind: str, code_kind: str,
                  gamma: float) -> TailEstimate:
    """Empirical P(length - eta >= gamma) over the records."""
    vals = _redundancies(records, eta_kind, code_kind)
    n = vals.size
    if n == 0:
        raise ValueError("records must be nonempty")
    p_hat = float((vals >= gamma).mean())
    return TailEstimate(gamma=float(gamma), p_hat=p_hat,
                        std_err=math.sqrt(p_hat * (1.0 - p_hat) / n), n=n)


def bound_rhs(sol: RdSolution, source: FinitePmf, d: DistortionMatrix,
              eta_kind: str, code_kind: str, gamma: float,
              variant: str = "") -> float:
    """Exact right-hand side of the applicable tail bound.

    Default variants are the clipped non-prefix bound for the plain code and
    the prefix-free bound for the delta code.  Explicit variants:

    * "general":      2^{-g+1} E[2^{-eta} (2^iota + 1)]          (plain)
    * "clipped":      E[min{2^{-eta-g+1} (2^iota + 1), 1}]       (plain)
    * "prefix":       E[min{2^{-eta-g+2} ([eta+g]_+ + 1)^2 (2^iota + 1), 1}]
    * "psdr_simple":  2^{-g+2}                                    (PSDR, plain)
    * "psdr_tight":   2^{-g+1} (1 + E[2^-iota])                   (PSDR, plain)
    * "psdr_prefix":  2^{-g+3} E[([iota+g]_+ + 1)^2]              (PSDR, delta)
    """
    if eta_kind not in ETA_KINDS:
        raise UnsupportedEta(f"unknown redundancy kind {eta_kind!r}")
    if code_kind not in CODE_KINDS:
        raise ValueError(f"unknown code kind {code_kind!r}")
    if not variant:
        variant = "prefix" if code_kind == "delta" else "clipped"
    if variant.startswith("psdr") and eta_kind != "PSDR":
        raise UnsupportedEta(f"variant {variant!r} applies to PSDR only")

    iota_tab, j_x, j_xd = _tables(sol)
    rows = sol.kernel.rows
    w = source.probs[:, None] * rows
    mask = w > 0.0
    weights = w[mask]
    iota = iota_tab[mask]
    if eta_kind == "PRR":
        eta = np.full(weights.size, sol.rate)
    elif eta_kind == "PSR":
        eta = np.broadcast_to(j_x[:, None], rows.shape)[mask]
    else:
        eta = j_xd[mask]

    if variant == "general":
        return float(2.0 ** (-gamma + 1.0)
                     * np.dot(weights, np.exp2(-eta) * (np.exp2(iota) + 1.0)))
    if variant == "clipped":
        term = np.exp2(-eta - gamma + 1.0) * (np.exp2(iota) + 1.0)
        return float(np.dot(weights, np.minimum(term, 1.0)))
    if variant == "prefix":
        plus = np.maximum(eta + gamma, 0.0)
        term = (np.exp2(-eta - gamma + 2.0) * (plus + 1.0) ** 2
                * (np.exp2(iota) + 1.0))
        return float(np.dot(weights, np.minimum(term, 1.0)))
    if variant == "psdr_simple":
        return 2.0 ** (-gamma + 2.0)
    if variant == "psdr_tight":
        return float(2.0 ** (-gamma + 1.0)
                     * (1.0 + np.dot(weights, np.exp2(-iota))))
    if variant == "psdr_prefix":
        plus = np.maximum(iota + gamma, 0.0)
        return float(2.0 ** (-gamma + 3.0) * np.dot(weights, (plus + 1.0) ** 2))
    raise ValueError(f"unknown bound variant {variant!r}")


@dataclass(frozen=True)
class TrialSummary:
    n: int
    mean_dist: float
    mean_len_plain: float
    mean_len_delta: float
    mean_log2_k: float
    se_dist: float
    se_len_plain: float
    se_len_delta: float
    se_log2_k: float
    mean_j_x: float
    mean_j_xd: float
    se_j_x: float
    se_j_xd: float
    entropy_k: float
    rate: float
    plain_target: float
    delta_target: float
    entropy_k_bound: float


def _mean_se(vals):
    n = vals.size
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0


def summary_stats(records, sol: RdSolution) -> TrialSummary:
    """Averages, their standard errors, and the expected-length comparison targets."""
    if not records:
        raise ValueError("records must be nonempty")
    dist = np.array([r.dist for r in records])
    lp = np.array([r.len_plain for r in records], dtype=float)
    ld = np.array([r.len_delta for r in records], dtype=float)
    ks = np.array([r.k for r in records])
    lk = np.log2(ks)
    jx = np.array([r.j_x for r in records])
    jxd = np.array([r.j_xd for r in records])
    _, counts = np.unique(ks, return_counts=True)
    h_k = entropy(FinitePmf(counts / counts.sum()))
    m_dist, se_dist = _mean_se(dist)
    m_lp, se_lp = _mean_se(lp)
    m_ld, se_ld = _mean_se(ld)
    m_lk, se_lk = _mean_se(lk)
    m_jx, se_jx = _mean_se(jx)
    m_jxd, se_jxd = _mean_se(jxd)
    r = sol.rate
    return TrialSummary(
        n=len(records), mean_dist=m_dist, mean_len_plain=m_lp,
        mean_len_delta=m_ld, mean_log2_k=m_lk,
        se_dist=se_dist, se_len_plain=se_lp, se_len_delta=se_ld, se_log2_k=se_lk,
        mean_j_x=m_jx, mean_j_xd=m_jxd, se_j_x=se_jx, se_j_xd=se_jxd,
        entropy_k=h_k, rate=r,
        plain_target=r + 2.01,
        delta_target=r + math.log2(r + 3.01) + 4.01,
        entropy_k_bound=m_lk + math.log2(m_lk + 1.0) + 1.0)


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".9g")


def records_to_csv(records, fh) -> None:
    """Write the fixed trial schema; floats carry 9 significant digits."""
    fh.write(CSV_HEADER + "\n")
    names = [f.name for f in fields(TrialRecord)]
    for r in records:
        fh.write(",".join(_fmt(getattr(r, name)) for name in names) + "\n")
