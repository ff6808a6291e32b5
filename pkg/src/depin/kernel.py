"""Return-time distributions for depinning models.

A return kernel is the discrete law K(n) of the first return to the defect
line, supported on multiples of a period s, together with a defect mass
K(inf) (probability of never returning, > 0 for wetting-type models) and an
optional declared tail exponent alpha.

Kernels are finite tables: atoms live at n = s, 2s, ..., s*n_max.  For laws
with infinite ideal support (simple random walk, geometric) the ideal mass
beyond the truncation horizon is folded into the last atom, so the table is
an exactly normalized law and the renewal recursion built on it is exact for
the truncated model.
"""

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.special import zeta

NORMALIZATION_TOL = 1e-12
FILE_NORMALIZATION_TOL = 1e-9

# slack allowed in the one-sided tail-exponent check; the declared alpha is a
# liminf statement, so the check records where it starts holding, never rejects
ALPHA_CHECK_SLACK = 0.1


@dataclass(frozen=True, eq=False)
class ReturnKernel:
    """Immutable first-return law on s*{1, ..., n_max} plus defect mass.

    density[i] is K(s*(i+1)); values at steps outside s*N are identically
    zero and not stored.  ``family``/``family_params`` identify the ideal
    (untruncated) law when one exists in closed form, so that asymptotic
    quantities can be computed on the ideal model rather than the table.
    """

    density: np.ndarray
    defect_mass: float
    period: int
    alpha: float | None
    n_max: int
    family: str = "file"
    family_params: dict = field(default_factory=dict)
    folded_tail: bool = False  # last atom carries the ideal mass beyond the horizon

    def __post_init__(self):
        dens = np.asarray(self.density, dtype=float)
        if dens.ndim != 1 or len(dens) != self.n_max:
            raise ValueError("density must be a 1-d array of length n_max")
        if self.n_max < 1 or self.period < 1:
            raise ValueError("n_max and period must be positive integers")
        if np.any(dens < 0):
            raise ValueError("kernel entries must be nonnegative")
        if not 0.0 <= self.defect_mass < 1.0:
            raise ValueError("defect mass must lie in [0, 1)")
        total = float(dens.sum()) + self.defect_mass
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"kernel mass {total!r} differs from 1 beyond tolerance")
        if self.alpha is not None and self.alpha < 1.0:
            raise ValueError("declared tail exponent must be >= 1")
        dens.flags.writeable = False
        object.__setattr__(self, "density", dens)

    # -- derived tables (computed on demand, cached; kernel itself is immutable)

    @cached_property
    def steps(self) -> np.ndarray:
        """Atom positions s, 2s, ..., s*n_max as an array."""
        a = self.period * np.arange(1, self.n_max + 1, dtype=float)
        a.flags.writeable = False
        return a

    @cached_property
    def log_density(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            ld = np.log(self.density)
        ld.flags.writeable = False
        return ld

    @cached_property
    def _suffix_mass(self) -> np.ndarray:
        # _suffix_mass[i] = sum of density[i:] ; length n_max + 1
        suf = np.concatenate([np.cumsum(self.density[::-1])[::-1], [0.0]])
        suf.flags.writeable = False
        return suf

    @cached_property
    def alpha_support_start(self) -> int | None:
        """Smallest atom index n0 >= 2 with log K(sn)/log n >= -alpha - slack
        for every supported n >= n0, or None if the declared-exponent regime
        is not reached within the truncation horizon."""
        dens = self.density[:-1] if self.folded_tail else self.density
        if self.alpha is None or len(dens) < 2:
            return None
        n = np.arange(2, len(dens) + 1, dtype=float)
        with np.errstate(divide="ignore"):
            ratio = np.log(dens[1:]) / np.log(n)
        ok = ratio >= -self.alpha - ALPHA_CHECK_SLACK
        if not ok[-1]:
            return None
        # last False position, regime starts right after it
        bad = np.nonzero(~ok)[0]
        return 2 if len(bad) == 0 else int(bad[-1]) + 3

    def tail_mass(self, n: int) -> float:
        """P(n < first return < inf) for the tabulated law, K(inf) excluded.

        Zero beyond the truncation horizon; tail_mass(0) == 1 - K(inf).
        """
        if n < 0:
            n = 0
        idx = min(n // self.period, self.n_max)
        return float(self._suffix_mass[idx])

    def tilted_mass(self, b: float, moment: int = 0) -> float:
        """sum_n n^moment K(n) exp(-b n) over the tabulated atoms."""
        w = self.density * np.exp(-b * self.steps)
        if moment:
            w = w * self.steps**moment
        return float(w.sum())

    @cached_property
    def mean_return_steps(self) -> float:
        """sum n K(n) of the tabulated law (always finite)."""
        return float(np.dot(self.steps, self.density))

    def ideal_mean_return(self) -> float:
        """sum n K(n) of the ideal law; may be inf.

        For families with a closed form (power, geometric, srw) this is the
        untruncated value; for tabulated kernels the table is the law.
        """
        if self.family == "geometric":
            return 1.0 / (1.0 - self.family_params["p"])
        if self.family == "srw":
            return math.inf
        if self.family == "power":
            a = self.family_params["alpha"]
            if a <= 2.0:
                return math.inf
            c_ideal = (1.0 - self.defect_mass) / zeta(a)
            return float(self.period * c_ideal * zeta(a - 1.0))
        return self.mean_return_steps


def srw_kernel(n_max: int) -> ReturnKernel:
    """First-return law of the +-1 simple random walk, truncated at 2*n_max.

    K(2m) = C(2m, m) / ((2m - 1) 4^m); period 2, tail exponent 3/2, no
    defect mass.  The ideal tail beyond the horizon is folded into the last
    atom.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    dens = np.empty(n_max)
    k = 0.5
    for m in range(1, n_max + 1):
        dens[m - 1] = k
        k *= (2 * m - 1) / (2 * m + 2)
    dens[-1] += 1.0 - dens.sum()
    return ReturnKernel(dens, 0.0, 2, 1.5, n_max, family="srw", folded_tail=True)


def power_kernel(alpha: float, s: int, n_max: int, defect_mass: float = 0.0) -> ReturnKernel:
    """Pure power-law kernel K(sn) = c / n^alpha, n = 1..n_max.

    c is chosen so the atoms carry total mass 1 - defect_mass exactly; no
    folding, so the ratio K(s(n+1))/K(sn) = (n/(n+1))^alpha holds on the
    whole table.
    """
    if alpha < 1.0:
        raise ValueError("tail exponent must be >= 1")
    if not 0.0 <= defect_mass < 1.0:
        raise ValueError("defect mass must lie in [0, 1)")
    if n_max < 1 or s < 1:
        raise ValueError("n_max and s must be positive")
    raw = np.arange(1, n_max + 1, dtype=float) ** (-float(alpha))
    dens = raw * ((1.0 - defect_mass) / raw.sum())
    return ReturnKernel(dens, float(defect_mass), s, float(alpha), n_max,
                        family="power", family_params={"alpha": float(alpha)})


def geometric_kernel(p: float, n_max: int | None = None) -> ReturnKernel:
    """Geometric kernel K(n) = (1-p) p^(n-1), period 1, closed-form tests.

    Default horizon captures the ideal law to well below the normalization
    tolerance (p^n_max < 1e-18); the residual tail is folded into the last
    atom.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    if n_max is None:
        n_max = min(1_000_000, max(8, math.ceil(-18.0 * math.log(10.0) / math.log(p))))
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    n = np.arange(1, n_max + 1, dtype=float)
    dens = (1.0 - p) * p ** (n - 1.0)
    dens[-1] += 1.0 - dens.sum()
    return ReturnKernel(dens, 0.0, 1, None, n_max, folded_tail=True,
                        family="geometric", family_params={"p": float(p)})


def geometric_tilted_mass(p: float, b: float) -> float:
    """Closed form sum_n (1-p) p^(n-1) e^(-bn) = (1-p)e^-b / (1 - p e^-b)."""
    x = math.exp(-b)
    return (1.0 - p) * x / (1.0 - p * x)


def kernel_from_file(path) -> ReturnKernel:
    """Load a kernel from the CSV schema.

    Header line ``s=<int>,k_inf=<float>,alpha=<float>`` then lines
    ``n,K(n)`` with n ascending multiples of s (omitted atoms are zero;
    ``alpha=nan`` means undeclared).  Total mass must match 1 - k_inf to
    within 1e-9 or the file is rejected; the accepted table is rescaled to
    machine-exact normalization.
    """
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise ValueError(f"{path}: empty kernel file")
    header = {}
    for item in lines[0].split(","):
        key, _, val = item.partition("=")
        if not _:
            raise ValueError(f"{path}: malformed header item {item!r}")
        header[key.strip()] = val.strip()
    try:
        s = int(header["s"])
        k_inf = float(header["k_inf"])
        alpha = float(header["alpha"])
    except (KeyError, ValueError) as exc:
        raise ValueError(f"{path}: bad header {lines[0]!r}: {exc}") from None
    if s < 1:
        raise ValueError(f"{path}: period must be positive")
    if not 0.0 <= k_inf < 1.0:
        raise ValueError(f"{path}: k_inf must lie in [0, 1)")

    atoms = []
    last_n = 0
    for ln in lines[1:]:
        n_txt, _, k_txt = ln.partition(",")
        if not _:
            raise ValueError(f"{path}: malformed data line {ln!r}")
        n, k = int(n_txt), float(k_txt)
        if n % s != 0 or n <= 0:
            raise ValueError(f"{path}: atom at n={n} is not a positive multiple of s={s}")
        if n <= last_n:
            raise ValueError(f"{path}: atoms must be strictly ascending (n={n})")
        if k < 0:
            raise ValueError(f"{path}: negative entry K({n})={k}")
        atoms.append((n, k))
        last_n = n
    if not atoms:
        raise ValueError(f"{path}: no atoms")

    n_max = last_n // s
    dens = np.zeros(n_max)
    for n, k in atoms:
        dens[n // s - 1] = k
    total = dens.sum()
    if abs(total + k_inf - 1.0) > FILE_NORMALIZATION_TOL:
        raise ValueError(
            f"{path}: mass {total + k_inf!r} violates normalization beyond 1e-9")
    if total > 0:
        dens *= (1.0 - k_inf) / total
    return ReturnKernel(dens, k_inf, s, None if math.isnan(alpha) else alpha, n_max,
                        family="file")


def write_kernel_file(kernel: ReturnKernel, path) -> None:
    """Emit the CSV schema understood by kernel_from_file (zero atoms omitted)."""
    alpha = math.nan if kernel.alpha is None else kernel.alpha
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"s={kernel.period},k_inf={float(kernel.defect_mass)!r},alpha={float(alpha)!r}\n")
        for i, k in enumerate(kernel.density):
            if k > 0.0:
                fh.write(f"{kernel.period * (i + 1)},{float(k)!r}\n")
