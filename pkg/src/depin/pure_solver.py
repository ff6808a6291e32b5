"""Exact solution of the homogeneous (no-disorder) pinning model.

With no disorder the free energy b = F(0, h) solves

    sum_n K(n) exp(-b n) = exp(h)

when a positive root exists, and is zero otherwise.  The critical point is
h_c(0) = log(1 - K(inf)), and the behavior of b as h tends to h_c from
below is governed by the mean return time Sigma = sum n K(n): a finite
Sigma gives a first-order transition with slope exp(h_c)/Sigma, an infinite
Sigma gives b ~ (h_c - h)^(1/(alpha-1)) up to slowly varying corrections.
"""

import math
from dataclasses import dataclass

from .kernel import ReturnKernel

ROOT_TOL = 1e-14


@dataclass(frozen=True)
class PureSolution:
    """Root of the homogeneous free-energy equation at a given field h."""

    b: float
    h: float
    residual: float
    localized: bool


@dataclass(frozen=True)
class PureAsymptotics:
    """Classification of the homogeneous transition at h_c(0).

    order is "first" (finite mean return time), "second" or "higher";
    exponent is the predicted power of (h_c - h); slope is the first-order
    coefficient exp(h_c)/Sigma when it applies.  log_corrections marks the
    alpha = 2, Sigma = inf borderline where slowly varying corrections are
    expected but not computed.
    """

    order: str
    exponent: float
    slope: float | None
    mean_return: float
    hc: float
    log_corrections: bool = False


def hc_pure(kernel: ReturnKernel) -> float:
    """Critical field of the homogeneous model: log(1 - K(inf))."""
    return math.log1p(-kernel.defect_mass)


def solve_free_energy_pure(kernel: ReturnKernel, h: float) -> PureSolution:
    """Solve sum K(n) exp(-bn) = exp(h) for b >= 0 on the tabulated law.

    Bracketed bisection (the left side is strictly decreasing in b) down to
    ROOT_TOL on b, followed by a couple of Newton polish steps to push the
    residual to roundoff.  If the total atom mass does not exceed exp(h)
    there is no positive root and the free energy is zero.
    """
    target = math.exp(h)
    g0 = kernel.tilted_mass(0.0)
    if g0 <= target:
        return PureSolution(0.0, h, 0.0, False)

    b_hi = 1.0
    while kernel.tilted_mass(b_hi) >= target:
        b_hi *= 2.0
        if b_hi > 1e8:  # pragma: no cover - unreachable for valid kernels
            raise RuntimeError("failed to bracket the free-energy root")
    b_lo = 0.0
    while b_hi - b_lo > ROOT_TOL * max(1.0, b_hi):
        mid = 0.5 * (b_lo + b_hi)
        if kernel.tilted_mass(mid) > target:
            b_lo = mid
        else:
            b_hi = mid
    b = 0.5 * (b_lo + b_hi)
    # Newton polish: g is smooth, strictly decreasing and convex here
    for _ in range(3):
        g = kernel.tilted_mass(b)
        gp = -kernel.tilted_mass(b, moment=1)
        if gp == 0.0:
            break
        step = (g - target) / gp
        b_new = b - step
        if b_new <= 0.0 or not math.isfinite(b_new):
            break
        b = b_new
        if abs(step) < 1e-18 * max(1.0, b):
            break
    residual = abs(kernel.tilted_mass(b) - target)
    return PureSolution(b, h, residual, True)


def pure_asymptotics(kernel: ReturnKernel) -> PureAsymptotics:
    """Classify the homogeneous transition on the kernel's ideal law.

    Requires either a family closed form or a declared tail exponent so
    that convergence of the mean return time can be decided: a tabulated
    kernel is read as a truncation of a law with the declared exponent, so
    its mean return time counts as infinite when alpha <= 2 even though
    the table itself is finite.
    """
    hc = hc_pure(kernel)
    if kernel.family == "file":
        if kernel.alpha is None:
            raise ValueError("cannot classify: kernel has no declared tail exponent")
        sigma = kernel.mean_return_steps if kernel.alpha > 2.0 else math.inf
    else:
        sigma = kernel.ideal_mean_return()
    if math.isfinite(sigma):
        return PureAsymptotics("first", 1.0, math.exp(hc) / sigma, sigma, hc)
    alpha = kernel.alpha
    if alpha is None:
        raise ValueError("cannot classify: infinite mean return but no tail exponent")
    if alpha == 1.0:
        return PureAsymptotics("higher", math.inf, None, sigma, hc)
    exponent = 1.0 / (alpha - 1.0)
    if alpha == 2.0:
        return PureAsymptotics("second", exponent, None, sigma, hc, log_corrections=True)
    if alpha >= 1.5:
        return PureAsymptotics("second", exponent, None, sigma, hc)
    return PureAsymptotics("higher", exponent, None, sigma, hc)
