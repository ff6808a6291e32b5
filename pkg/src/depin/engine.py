"""Exact log-domain recursions for quenched partition functions.

All partition functions are computed by decomposing the path into its
excursions away from the defect line.  With Z_0 = 1 and atoms K(k) on
k = s, 2s, ..., the pinned-endpoint recursion is

    Z_n = exp(beta w_n - h) * sum_k K(k) Z_{n-k},

evaluated entirely in the log domain with a running-maximum log-sum-exp,
since Z spans thousands of orders of magnitude at large N.  Variants: a
free-endpoint value (last excursion unfinished), the copolymer form (each
completed excursion is above or below the interface; the sites strictly
below carry weight exp(-(beta w + h)) each), and contact-count-resolved
tables that fix the number of rewarded sites instead of weighting it by h.

Tables are deterministic functions of (model, disorder sample, N); builds
share no mutable state and can run concurrently.
"""

import math
from dataclasses import dataclass

import numpy as np

from .disorder import DisorderSample
from .kernel import ReturnKernel

LOG2 = math.log(2.0)

# (N/s)^2 tables above this row count require an explicit override
MAX_CONSTRAINED_ROWS = 8192


@dataclass(frozen=True)
class ModelSpec:
    """A depinning model: pinning or copolymer, couplings and return law."""

    kind: str
    beta: float
    h: float
    kernel: ReturnKernel

    def __post_init__(self):
        if self.kind not in ("pinning", "copolymer"):
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")
        if self.kind == "copolymer" and self.h < 0:
            raise ValueError("copolymer couplings are restricted to h >= 0")


@dataclass(frozen=True)
class LogPartitionTable:
    """log Z at positions 0, s, 2s, ..., N (log Z_0 = 0 by convention).

    logz_j, when present, resolves position n by the exact count j of
    rewarded sites: contacts for pinning, below-interface sites for the
    copolymer.  Entries are finite or -inf (-inf marks counts no path can
    realize).
    """

    logz: np.ndarray
    period: int
    n: int
    logz_j: np.ndarray | None = None

    @property
    def final_logz(self) -> float:
        return float(self.logz[-1])


def logsumexp_1d(values: np.ndarray) -> float:
    """Stable log of a sum of exponentials; -inf for an empty or -inf input."""
    if len(values) == 0:
        return -math.inf
    m = values.max()
    if not np.isfinite(m):
        return -math.inf if m < 0 else math.inf
    return float(m + np.log(np.exp(values - m).sum()))


def _check_inputs(model: ModelSpec, omega: DisorderSample, n: int) -> int:
    s = model.kernel.period
    if n < s or n % s != 0:
        raise ValueError(f"N={n} is not a positive multiple of the period {s}")
    if len(omega.values) < n:
        raise ValueError(f"disorder sample of length {len(omega.values)} shorter than N={n}")
    return n // s


def log_partition_pinning(model: ModelSpec, omega: DisorderSample, n: int) -> LogPartitionTable:
    """Pinned-endpoint table: log Z_m for m = 0, s, ..., n."""
    if model.kind != "pinning":
        raise ValueError("pinning recursion called with a non-pinning model")
    t_max = _check_inputs(model, omega, n)
    kern = model.kernel
    w_max = min(t_max, kern.n_max)
    rk = kern.log_density[:w_max][::-1].copy()  # rk[w_max-1-j] = log K((j+1)s)
    charges = model.beta * omega.values[kern.period - 1:n:kern.period] - model.h

    logz = np.empty(t_max + 1)
    logz[0] = 0.0
    buf = np.empty(w_max)
    for t in range(1, t_max + 1):
        w = min(t, w_max)
        seg = buf[:w]
        np.add(logz[t - w:t], rk[w_max - w:], out=seg)
        m = seg.max()
        if m == -math.inf:
            logz[t] = -math.inf
            continue
        np.subtract(seg, m, out=seg)
        np.exp(seg, out=seg)
        logz[t] = charges[t - 1] + m + math.log(seg.sum())
    return LogPartitionTable(logz, kern.period, n)


def log_partition_free_endpoint(model: ModelSpec, omega: DisorderSample, n: int) -> float:
    """log of the free-endpoint partition function (last excursion open).

    Sums Z_m * P(first return from m takes more than n - m steps) over the
    pinned table; the survival probability is the kernel tail plus the
    defect mass, so the m = n term contributes Z_n itself.
    """
    table = log_partition_pinning(model, omega, n)
    kern = model.kernel
    t_max = n // kern.period
    surv = np.array([kern.tail_mass((t_max - t) * kern.period) + kern.defect_mass
                     for t in range(t_max + 1)])
    with np.errstate(divide="ignore"):
        terms = table.logz + np.log(surv)
    return logsumexp_1d(terms)


def log_partition_copolymer(model: ModelSpec, omega: DisorderSample, n: int) -> LogPartitionTable:
    """Copolymer table in the below-interface form.

    A completed excursion over sites u+1..u+k contributes K(k)/2 times
    (1 + exp(-sum of (beta w + h) over its k-1 interior sites)); the two
    summands are the above/below choices of the excursion sign.  For k = s
    = 1 the interior is empty and the expression collapses to the undivided
    weight K(1), as there is no sign to choose.  Interior sums come from a
    prefix-sum table, so each transition costs O(1).
    """
    if model.kind != "copolymer":
        raise ValueError("copolymer recursion called with a non-copolymer model")
    t_max = _check_inputs(model, omega, n)
    kern = model.kernel
    s = kern.period
    w_max = min(t_max, kern.n_max)
    rk = kern.log_density[:w_max][::-1].copy()

    site_charge = model.beta * omega.values[:n] + model.h
    prefix = np.concatenate([[0.0], np.cumsum(site_charge)])
    c_grid = prefix[::s]                      # prefix at positions 0, s, 2s, ...
    c_last = prefix[s - 1::s][:t_max]         # prefix at positions t*s - 1

    logz = np.empty(t_max + 1)
    logz[0] = 0.0
    for t in range(1, t_max + 1):
        w = min(t, w_max)
        interior = c_last[t - 1] - c_grid[t - w:t]
        split = np.logaddexp(0.0, -interior) - LOG2
        seg = logz[t - w:t] + rk[w_max - w:] + split
        logz[t] = logsumexp_1d(seg)
    return LogPartitionTable(logz, s, n)


def _columnwise_lse(mat: np.ndarray) -> np.ndarray:
    m = mat.max(axis=0)
    finite = np.isfinite(m)
    safe = np.where(finite, m, 0.0)
    z = np.exp(mat - safe).sum(axis=0)
    with np.errstate(divide="ignore"):
        return np.where(finite, safe + np.log(z), -math.inf)


def log_partition_constrained(model: ModelSpec, omega: DisorderSample, n: int,
                              allow_large: bool = False) -> LogPartitionTable:
    """Count-resolved table: logz_j[t, j] fixes the rewarded-site count j.

    The coupling h is deliberately absent from the recursion (it is
    reinstated by the conjugate weight exp(-h j), see the logz field and
    the Legendre analysis); only the disorder rewards beta * w enter.  For
    pinning j counts contacts; for the copolymer j counts below-interface
    sites, so an excursion of length k assigned below adds k - 1.

    Memory is O((N/s) * J); builds beyond MAX_CONSTRAINED_ROWS rows require
    allow_large=True.
    """
    t_max = _check_inputs(model, omega, n)
    if t_max > MAX_CONSTRAINED_ROWS and not allow_large:
        raise ValueError(
            f"constrained table with {t_max} rows exceeds the default bound; "
            "pass allow_large=True to override")
    kern = model.kernel
    s = kern.period
    w_max = min(t_max, kern.n_max)
    log_k = kern.log_density

    if model.kind == "pinning":
        rk = log_k[:w_max][::-1].copy()
        rewards = model.beta * omega.values[s - 1:n:s]
        table = np.full((t_max + 1, t_max + 1), -math.inf)
        table[0, 0] = 0.0
        for t in range(1, t_max + 1):
            w = min(t, w_max)
            block = table[t - w:t, 0:t] + rk[w_max - w:, None]
            table[t, 1:t + 1] = rewards[t - 1] + _columnwise_lse(block)
        counts = np.arange(t_max + 1, dtype=float)
    else:
        rewards_prefix = np.concatenate([[0.0], np.cumsum(model.beta * omega.values[:n])])
        table = np.full((t_max + 1, n + 1), -math.inf)
        table[0, 0] = 0.0
        for t in range(1, t_max + 1):
            w = min(t, w_max)
            acc = np.full(n + 1, -math.inf)
            end_prefix = rewards_prefix[t * s - 1]
            for j_exc in range(w):
                u = t - 1 - j_exc
                base = table[u]
                k_len = (j_exc + 1) * s
                if s == 1 and j_exc == 0:
                    np.logaddexp(acc, base + log_k[0], out=acc)
                    continue
                np.logaddexp(acc, base + (log_k[j_exc] - LOG2), out=acc)
                shift = k_len - 1
                below = base[:n + 1 - shift] + (
                    log_k[j_exc] - LOG2 - (end_prefix - rewards_prefix[u * s]))
                np.logaddexp(acc[shift:], below, out=acc[shift:])
            table[t] = acc
        counts = np.arange(n + 1, dtype=float)

    table.flags.writeable = False
    logz = np.array([logsumexp_1d(table[t] - model.h * counts)
                     for t in range(t_max + 1)])
    return LogPartitionTable(logz, s, n, logz_j=table)


def constrained_window(table: LogPartitionTable, m: float, epsilon: float) -> float:
    """log of the final-row mass with rewarded-site density within m +- epsilon.

    Returns -inf when no admissible count falls in the window.
    """
    if table.logz_j is None:
        raise ValueError("table carries no count-resolved matrix")
    n = table.n
    lo = max(0, math.ceil((m - epsilon) * n - 1e-12))
    hi = min(table.logz_j.shape[1] - 1, math.floor((m + epsilon) * n + 1e-12))
    if hi < lo:
        return -math.inf
    return logsumexp_1d(table.logz_j[-1, lo:hi + 1])
