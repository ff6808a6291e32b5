"""Critical-point location, exponent fits, and the smoothing-envelope check.

The free energy and the density-constrained curve are conjugate:
F(h) = sup_m (phi(m) - h m).  locate_hc finds the field where the
size-extrapolated free energy stops clearing a noise threshold, fit_exponent
measures the power of (h_c - h) on a log-log scale, and smoothing_check
assembles the full comparison: disordered exponent and envelope versus the
exactly solvable homogeneous model on the same kernel.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .disorder import DisorderLaw, smoothing_constant, spawn_seed
from .engine import ModelSpec
from .estimator import PhiCurve, estimate_free_energy
from .kernel import ReturnKernel
from .pure_solver import hc_pure, pure_asymptotics, solve_free_energy_pure


@dataclass(frozen=True)
class CriticalFit:
    """Critical point and/or critical-exponent fit results.

    points holds the (h, F, stderr) rows behind the fit; for a bare
    critical-point search it holds the bisection probes (h, extrapolated F,
    threshold) instead.
    """

    hc: float
    hc_err: float
    exponent: float | None = None
    exponent_err: float | None = None
    fit_window: tuple | None = None
    envelope_constant: float | None = None
    points: tuple = ()


def legendre_sup(phi: PhiCurve, h: float) -> tuple[float, float]:
    """Grid supremum of phi(m) - h m; ties resolve to the smaller density."""
    mask = phi.feasible & np.isfinite(phi.values)
    if not mask.any():
        raise ValueError("constrained curve has no feasible entry")
    vals = phi.values[mask] - h * phi.m_grid[mask]
    best = int(np.argmax(vals))  # first maximum = smallest m on an ascending grid
    return float(vals[best]), float(phi.m_grid[mask][best])


def _wls_line(x: np.ndarray, y: np.ndarray, sigma: np.ndarray):
    """Weighted least squares for y = a + b x; returns (a, b, var_a, var_b).

    Weights are 1/sigma^2 when any sigma is positive (zero-sigma rows get
    the smallest positive sigma), plain least squares otherwise; parameter
    variances come from (X^T W X)^-1 with the given sigmas taken as true.
    """
    if np.any(sigma > 0):
        floor = sigma[sigma > 0].min()
        w = 1.0 / np.maximum(sigma, floor) ** 2
    else:
        w = np.ones_like(x)
    sw = w.sum()
    sx = (w * x).sum()
    sxx = (w * x * x).sum()
    sy = (w * y).sum()
    sxy = (w * x * y).sum()
    det = sw * sxx - sx * sx
    if det <= 0:
        raise ValueError("degenerate fit design")
    a = (sxx * sy - sx * sxy) / det
    b = (sw * sxy - sx * sy) / det
    if np.any(sigma > 0):
        var_a = sxx / det
        var_b = sw / det
    else:
        var_a = var_b = 0.0
    return a, b, var_a, var_b


def extrapolate_free_energy(n_values, means, stderrs) -> tuple[float, float]:
    """Infinite-size intercept of F_N = F_inf + a log(N)/N; returns (F_inf, a)."""
    n_values = np.asarray(n_values, dtype=float)
    y = np.asarray(means, dtype=float)
    if len(n_values) == 1:
        return float(y[0]), 0.0
    x = np.log(n_values) / n_values
    a, b, _, _ = _wls_line(x, y, np.asarray(stderrs, dtype=float))
    return float(a), float(b)


def locate_hc(kind: str, beta: float, kernel: ReturnKernel, law: DisorderLaw,
              n_list, replicas: int, seed: int, tol: float,
              h_window: tuple[float, float] | None = None,
              threshold_floor: float | None = None) -> CriticalFit:
    """Bisection for the critical field at fixed beta.

    At each probe h the free energy is estimated on every size in n_list
    (disorder shared across probes, so estimates are comparable), the
    infinite-size value is extrapolated with an a log(N)/N correction, and
    the phase indicator is "extrapolated F above threshold" with threshold
    the larger of 3x the biggest-size standard error and a floor of
    4/max(N) that keeps the beta = 0 case (zero standard error) off the
    finite-size extrapolation residue.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    n_list = sorted(n_list)
    n_big = n_list[-1]
    if threshold_floor is None:
        threshold_floor = 4.0 / n_big
    probes = []

    def localized(h: float) -> bool:
        ests = [estimate_free_energy(ModelSpec(kind, beta, h, kernel), law, n,
                                     replicas, spawn_seed(seed, i))
                for i, n in enumerate(n_list)]
        f_inf, _ = extrapolate_free_energy([e.n for e in ests],
                                           [e.mean for e in ests],
                                           [e.stderr for e in ests])
        thr = max(3.0 * ests[-1].stderr, threshold_floor)
        probes.append((h, f_inf, thr))
        return f_inf > thr

    if h_window is None:
        if kind == "pinning":
            base = hc_pure(kernel)
            lo, hi = base - 0.25, base + law.log_mgf(beta) + 0.25
        else:
            lo, hi = 0.0, 0.5 + beta * beta
    else:
        lo, hi = h_window
    width = hi - lo
    for _ in range(8):
        if localized(lo):
            break
        lo -= width
    else:
        raise ValueError("no localized endpoint found in the search range")
    for _ in range(8):
        if not localized(hi):
            break
        hi += width
    else:
        raise ValueError("no delocalized endpoint found in the search range")

    while hi - lo > 2.0 * tol:
        mid = 0.5 * (lo + hi)
        if localized(mid):
            lo = mid
        else:
            hi = mid
    return CriticalFit(hc=0.5 * (lo + hi), hc_err=0.5 * (hi - lo),
                       points=tuple(probes))


def select_fit_points(points, hc: float, hc_err: float = 0.0):
    """Rows usable for a critical fit: significant F, gap clear of the
    critical-point uncertainty (10x its bracket), strictly below h_c."""
    out = []
    for h, f, err in points:
        gap = hc - h
        if gap <= 0 or f <= 3.0 * err or gap < 10.0 * hc_err:
            continue
        out.append((float(h), float(f), float(err)))
    return out


def fit_exponent(points, hc: float, hc_err: float = 0.0) -> CriticalFit:
    """Weighted log-log fit of F against (h_c - h) over the usable window.

    Also reports the quadratic-envelope prefactor F/(h_c - h)^2 evaluated at
    the window edge closest to the critical point.
    """
    used = select_fit_points(points, hc, hc_err)
    if len(used) < 4:
        raise ValueError("fewer than 4 usable points in the fit window")
    used.sort(key=lambda row: hc - row[0])
    gaps = np.array([hc - h for h, _, _ in used])
    f = np.array([row[1] for row in used])
    err = np.array([row[2] for row in used])
    x = np.log(gaps)
    y = np.log(f)
    sigma = err / f
    _, slope, _, var_b = _wls_line(x, y, sigma)
    edge_gap, edge_f = gaps[0], f[0]
    return CriticalFit(hc=hc, hc_err=hc_err, exponent=float(slope),
                       exponent_err=float(math.sqrt(var_b)),
                       fit_window=(float(min(h for h, _, _ in used)),
                                   float(max(h for h, _, _ in used))),
                       envelope_constant=float(edge_f / edge_gap**2),
                       points=tuple(used))


def jackknife_exponent(h_values, replica_matrix, stderrs, hc: float,
                       hc_err: float = 0.0) -> tuple[float, float]:
    """Leave-one-replica-out uncertainty for the fitted exponent.

    The usable window is fixed by the full-sample means so resampling only
    moves the ordinates; returns (mean of leave-one-out slopes, jackknife
    standard error).
    """
    replica_matrix = np.asarray(replica_matrix)
    n_rep = replica_matrix.shape[0]
    full_means = replica_matrix.mean(axis=0)
    rows = list(zip(h_values, full_means, stderrs))
    used = select_fit_points(rows, hc, hc_err)
    if len(used) < 4 or n_rep < 2:
        raise ValueError("jackknife needs >= 4 usable points and >= 2 replicas")
    keep = [i for i, (h, _, _) in enumerate(zip(h_values, full_means, stderrs))
            if any(abs(h - hu) < 1e-15 for hu, _, _ in used)]
    gaps = np.array([hc - h_values[i] for i in keep])
    sigma = np.array([stderrs[i] for i in keep])
    x = np.log(gaps)
    slopes = []
    for r in range(n_rep):
        loo = np.delete(replica_matrix[:, keep], r, axis=0).mean(axis=0)
        if np.any(loo <= 0):
            continue
        _, b, _, _ = _wls_line(x, np.log(loo), sigma / np.maximum(loo, 1e-300))
        slopes.append(b)
    slopes = np.array(slopes)
    m = slopes.mean()
    var = (len(slopes) - 1) / len(slopes) * ((slopes - m) ** 2).sum()
    return float(m), float(math.sqrt(var))


def critical_power_fit(points, hc_lo: float, hc_hi: float,
                       grid_size: int = 400) -> tuple[float, float, float]:
    """Fit F = C (hc' - h)^kappa with the critical point as a parameter.

    For each candidate hc' on a grid the log-log line is solved by weighted
    least squares and the weighted residual recorded; returns
    (hc_best, exponent, chi2) at the grid minimizer.  Used because a
    threshold-based critical-point search is biased low by construction
    (it needs the free energy to clear the noise), which would drag a
    fixed-hc log-log slope below its true value.
    """
    h = np.array([p[0] for p in points])
    f = np.array([p[1] for p in points])
    err = np.array([p[2] for p in points])
    sigma = err / f
    y = np.log(f)
    h_max = float(h.max())
    best = (math.inf, hc_hi, 0.0)
    for hc_try in np.linspace(hc_lo, hc_hi, grid_size):
        if hc_try <= h_max:
            continue
        x = np.log(hc_try - h)
        a, b, _, _ = _wls_line(x, y, sigma)
        resid = y - a - b * x
        if np.any(sigma > 0):
            floor = sigma[sigma > 0].min()
            chi2 = float(((resid / np.maximum(sigma, floor)) ** 2).sum())
        else:
            chi2 = float((resid**2).sum())
        if chi2 < best[0]:
            best = (chi2, float(hc_try), float(b))
    return best[1], best[2], best[0]


@dataclass(frozen=True)
class SmoothingReport:
    """Everything smoothing_check measures, JSON-ready via to_dict().

    hc is the bisection critical point (biased low by up to its noise
    threshold, by construction); hc_fit is the critical point preferred by
    the power-law fit of the scan itself, and exponent is fitted at hc_fit.
    """

    beta: float
    alpha: float
    hc: float
    hc_err: float
    hc_fit: float
    exponent: float
    exponent_err: float
    envelope_ok: bool
    envelope_prefactor: float
    ratio_decreasing: bool
    ratios: tuple
    points: tuple               # (h, extrapolated F, stderr), both sides of h_c
    pure_order: str
    pure_slope: float | None
    pure_ratio_target: float | None
    constants_route: str
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "hc": self.hc,
            "hc_err": self.hc_err,
            "hc_fit": self.hc_fit,
            "exponent": self.exponent,
            "exponent_err": self.exponent_err,
            "envelope_ok": self.envelope_ok,
            "envelope_prefactor": self.envelope_prefactor,
            "ratio_decreasing": self.ratio_decreasing,
            "ratios": [list(r) for r in self.ratios],
            "points": [list(p) for p in self.points],
            "pure_order": self.pure_order,
            "pure_slope": self.pure_slope,
            "pure_ratio_target": self.pure_ratio_target,
            "beta": self.beta,
            "alpha": self.alpha,
            "constants_route": self.constants_route,
            "config": self.config,
        }


DEFAULT_SCAN_GAPS = (0.35, 0.248, 0.175, 0.124, 0.088, 0.062, 0.044,
                     0.031, 0.022, 0.0156, 0.011)


def smoothing_check(beta: float, kernel: ReturnKernel, law: DisorderLaw, *,
                    n_list, replicas: int, seed: int, tol: float = 2e-3,
                    scan_gaps=DEFAULT_SCAN_GAPS, kind: str = "pinning",
                    config: dict | None = None) -> SmoothingReport:
    """Probe the quadratic smoothing envelope at desk scale.

    Locates h_c(beta) by bisection, then scans the free energy on both
    sides of it; every scan point is estimated on all sizes in n_list and
    extrapolated with the same a log(N)/N form the bisection uses, which
    removes most of the finite-size droop near the critical point.  The
    critical exponent comes from a power-law fit that re-fits the critical
    point on the scan (critical_power_fit), with a leave-one-replica-out
    jackknife for its uncertainty; the envelope and ratio diagnostics are
    anchored at the conservative bisection h_c.  The homogeneous model on
    the same kernel is solved for contrast.
    """
    if beta <= 0:
        raise ValueError("the envelope check needs beta > 0")
    if kernel.alpha is None:
        raise ValueError("kernel must declare a tail exponent")
    fit0 = locate_hc(kind, beta, kernel, law, n_list, replicas, seed, tol)
    hc, hc_err = fit0.hc, fit0.hc_err
    n_list = sorted(n_list)

    gaps = sorted(scan_gaps, reverse=True)
    h_values = [hc - g for g in gaps] + [hc + gaps[-1], hc + gaps[len(gaps) // 2]]
    # per scan point: estimates on every size, extrapolated to N = inf
    ests = [[estimate_free_energy(ModelSpec(kind, beta, h, kernel), law, n,
                                  replicas, spawn_seed(seed, 1000 + i))
             for n in n_list] for i, h in enumerate(h_values)]

    def extrapolate_row(means, stderrs):
        if len(n_list) == 1:
            return float(means[0]), float(stderrs[0])
        x = np.log(np.array(n_list, dtype=float)) / np.array(n_list, dtype=float)
        a, _, var_a, _ = _wls_line(x, np.asarray(means, dtype=float),
                                   np.asarray(stderrs, dtype=float))
        return float(a), math.sqrt(var_a)

    points = []
    for h, row in zip(h_values, ests):
        f_inf, sig = extrapolate_row([e.mean for e in row], [e.stderr for e in row])
        points.append((h, f_inf, sig))
    points = tuple(points)

    loc = [p for p in points if p[0] < hc]
    usable = select_fit_points(loc, hc, hc_err)
    if len(usable) < 5:
        fit = fit_exponent(loc, hc, hc_err)
        hc_fit, exponent = hc, fit.exponent
    else:
        h_top = max(p[0] for p in usable)
        hc_fit, exponent, _ = critical_power_fit(
            usable, h_top + 0.02 * (hc - h_top), h_top + 0.3)

    # jackknife over replicas: rebuild each point from leave-one-out means,
    # re-extrapolate and re-fit (including the critical-point search)
    jack = []
    stderr_by_h = {p[0]: p[2] for p in points}
    used_h = [p[0] for p in usable]
    h_top = max(used_h)
    for r in range(replicas):
        pts_r = []
        for h, row in zip(h_values, ests):
            if h not in used_h:
                continue
            means = [float(np.delete(e.replica_values, r).mean()) for e in row]
            f_inf, _ = extrapolate_row(means, [e.stderr for e in row])
            if f_inf > 0:
                pts_r.append((h, f_inf, stderr_by_h[h]))
        if len(pts_r) >= 5:
            _, kappa_r, _ = critical_power_fit(pts_r, h_top + 0.02 * (hc - h_top),
                                               h_top + 0.3, grid_size=200)
            jack.append(kappa_r)
    if len(jack) >= 2:
        jk = np.array(jack)
        jack_err = math.sqrt((len(jk) - 1) / len(jk) * ((jk - jk.mean()) ** 2).sum())
    else:
        jack_err = 0.0

    consts = smoothing_constant(beta, kernel.alpha, law)
    envelope_ok = all(f <= consts.envelope(hc - h) + 3.0 * err
                      for h, f, err in loc)

    ratios = tuple((hc - h, f / (hc - h), err / (hc - h)) for h, f, err in usable)
    ratio_decreasing = all(
        ratios[i + 1][1] <= ratios[i][1] + 2.0 * (ratios[i][2] + ratios[i + 1][2])
        for i in range(len(ratios) - 1))

    pure = pure_asymptotics(kernel)
    hc0 = hc_pure(kernel)
    pure_slope = solve_free_energy_pure(kernel, hc0 - 1e-3).b / 1e-3

    return SmoothingReport(
        beta=beta, alpha=kernel.alpha, hc=hc, hc_err=hc_err, hc_fit=hc_fit,
        exponent=exponent, exponent_err=jack_err,
        envelope_ok=envelope_ok, envelope_prefactor=consts.envelope(1.0),
        ratio_decreasing=ratio_decreasing, ratios=ratios, points=points,
        pure_order=pure.order, pure_slope=pure_slope,
        pure_ratio_target=pure.slope, constants_route=consts.route,
        config=dict(config or {}))
