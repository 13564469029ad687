"""Symbols on the torus, their Toeplitz restrictions, and block entropies.

A shift-invariant quasi-free state is fixed by a symbol function
q^(theta) in [0, 1]. Its Fourier coefficients

    q(k) = integral over the torus of q^(theta) * exp(-2 pi i k theta)

fill the Hermitian Toeplitz matrix Q_N with entries Q[l, k] = q(k - l), and
the entropy of a block of N sites is S_N = sum of eta_tilde over the
eigenvalues of Q_N. The quadratic proxy P_N = Tr Q_N(1 - Q_N) bounds S_N
from below and shares its growth exponent; it is computable in O(N) from the
coefficients alone.

Entropies are in nats throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import polygamma

from .torus_sets import TorusIntervalSet, full_torus

# Eigenvalues and entropy arguments may poke this far outside [0, 1] before
# we refuse to clip them; eta_tilde has infinite slope at the endpoints, so
# anything worse than rounding noise must not be silently absorbed.
CLIP_TOL = 1e-9

LOG2 = math.log(2.0)


class EntropyDomainError(ValueError):
    """Argument outside [0, 1] by more than the clip tolerance."""


class EigensolveError(RuntimeError):
    """Eigendecomposition failed or left large residuals."""


# ---------------------------------------------------------------------------
# Entropy functions
# ---------------------------------------------------------------------------

def _clip_unit(x, what: str):
    x = np.asarray(x, dtype=float)
    if np.any(x < -CLIP_TOL) or np.any(x > 1.0 + CLIP_TOL):
        bad = x[(x < -CLIP_TOL) | (x > 1.0 + CLIP_TOL)]
        raise EntropyDomainError(f"{what} outside [0, 1] beyond tolerance: {bad[:4]}")
    return np.clip(x, 0.0, 1.0)


def eta(x):
    """-x log x, continuously extended by eta(0) = 0."""
    x = _clip_unit(x, "eta argument")
    out = np.zeros_like(x)
    pos = x > 0.0
    out[pos] = -x[pos] * np.log(x[pos])
    return out if out.ndim else float(out)


def eta_tilde(x):
    """eta(x) + eta(1 - x): entropy of the (x, 1-x) pair, maximal log 2 at 1/2."""
    x = _clip_unit(x, "eta_tilde argument")
    out = np.zeros_like(x)
    inner = (x > 0.0) & (x < 1.0)
    xi = x[inner]
    out[inner] = -xi * np.log(xi) - (1.0 - xi) * np.log1p(-xi)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# Symbols and Fourier coefficients
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SymbolFunction:
    """Piecewise-constant function torus -> [0, 1].

    ``breakpoints`` runs from 0.0 to 1.0; ``values[i]`` holds on
    [breakpoints[i], breakpoints[i+1]). Pure symbols (values all 0 or 1) are
    indicator functions of interval sets.
    """

    breakpoints: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.breakpoints) < 2 or self.breakpoints[0] != 0.0 \
                or self.breakpoints[-1] != 1.0:
            raise ValueError("breakpoints must run from 0.0 to 1.0")
        if len(self.values) != len(self.breakpoints) - 1:
            raise ValueError("need one value per piece")
        for a, b in zip(self.breakpoints, self.breakpoints[1:]):
            if b <= a:
                raise ValueError("breakpoints must be strictly increasing")
        for v in self.values:
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"symbol value {v} outside [0, 1]")

    @classmethod
    def indicator(cls, K: TorusIntervalSet) -> "SymbolFunction":
        if K.is_empty:
            return cls((0.0, 1.0), (0.0,))
        if K.is_full:
            return cls((0.0, 1.0), (1.0,))
        bps = [0.0]
        vals = []
        cursor = 0.0
        for s, e in K.intervals:
            if s > cursor:
                bps.append(s)
                vals.append(0.0)
            bps.append(e)
            vals.append(1.0)
            cursor = e
        if cursor < 1.0:
            bps.append(1.0)
            vals.append(0.0)
        return cls(tuple(bps), tuple(vals))

    @classmethod
    def constant(cls, v: float) -> "SymbolFunction":
        return cls((0.0, 1.0), (float(v),))

    @property
    def is_pure(self) -> bool:
        return all(v in (0.0, 1.0) for v in self.values)

    def pieces(self):
        return zip(self.breakpoints, self.breakpoints[1:], self.values)

    @property
    def mean(self) -> float:
        """Integral of the symbol; equals the particle density and q(0)."""
        return sum((b - a) * v for a, b, v in self.pieces())


def fourier_coefficient(f: SymbolFunction, k: int) -> complex:
    """Closed-form q(k) for a piecewise-constant symbol."""
    if k == 0:
        return complex(f.mean)
    total = 0j
    for a, b, v in f.pieces():
        if v != 0.0:
            w = 2j * math.pi * k
            total += v * (np.exp(-w * a) - np.exp(-w * b)) / w
    return complex(total)


@dataclass(eq=False)
class SymbolCoefficients:
    """Fourier coefficients q(0)..q(n_max); negative orders follow from
    q(-k) = conj(q(k))."""

    n_max: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.values.shape != (self.n_max + 1,):
            raise ValueError("coefficient array must have n_max + 1 entries")
        if abs(self.values[0].imag) > 1e-13:
            raise ValueError(f"q(0) must be real, got {self.values[0]}")
        q0 = self.values[0].real
        if np.any(np.abs(self.values) > q0 + 1e-9):
            raise ValueError("|q(k)| exceeds q(0); symbol not in [0, 1]")
        self.values = self.values.copy()
        self.values[0] = q0
        self.values.setflags(write=False)

    def coefficient(self, k: int) -> complex:
        if abs(k) > self.n_max:
            raise IndexError(f"coefficient {k} beyond cached order {self.n_max}")
        return complex(self.values[k]) if k >= 0 else complex(np.conj(self.values[-k]))


def fourier_coefficients(f: SymbolFunction, n_max: int) -> SymbolCoefficients:
    """All of q(0)..q(n_max) in one vectorized pass over the pieces."""
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    vals = np.zeros(n_max + 1, dtype=complex)
    vals[0] = f.mean
    if n_max >= 1:
        k = np.arange(1, n_max + 1)
        w = 2j * np.pi * k
        for a, b, v in f.pieces():
            if v != 0.0:
                vals[1:] += v * (np.exp(-w * a) - np.exp(-w * b)) / w
    return SymbolCoefficients(n_max=n_max, values=vals)


# ---------------------------------------------------------------------------
# Toeplitz restrictions and their spectra
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class ToeplitzRestriction:
    """Hermitian N x N block Q_N with entries Q[l, k] = q(k - l)."""

    order: int
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.matrix.shape != (self.order, self.order):
            raise ValueError("matrix shape does not match order")
        herm_dev = np.max(np.abs(self.matrix - self.matrix.conj().T)) if self.order else 0.0
        if herm_dev > 1e-14:
            raise ValueError(f"restriction not Hermitian: deviation {herm_dev:.3g}")
        self.matrix.setflags(write=False)


def restriction_from_coefficients(coeffs: SymbolCoefficients, n: int) -> ToeplitzRestriction:
    if n < 1:
        raise ValueError(f"block size must be >= 1, got {n}")
    if coeffs.n_max < n - 1:
        raise ValueError(f"need coefficients up to {n - 1}, have {coeffs.n_max}")
    idx = np.arange(n)
    diff = idx[None, :] - idx[:, None]          # diff[l, k] = k - l
    mat = np.where(diff >= 0, coeffs.values[np.abs(diff)],
                   np.conj(coeffs.values[np.abs(diff)]))
    return ToeplitzRestriction(order=n, matrix=mat)


def build_restriction(f: SymbolFunction, n: int) -> ToeplitzRestriction:
    if n < 1:
        raise ValueError(f"block size must be >= 1, got {n}")
    return restriction_from_coefficients(fourier_coefficients(f, n - 1), n)


def spectrum(restriction: ToeplitzRestriction) -> np.ndarray:
    """Ascending eigenvalues, verified against the residual bound
    ||Q v - lambda v|| <= 1e-8 ||Q|| and clipped into [0, 1]."""
    mat = restriction.matrix
    try:
        w, v = np.linalg.eigh(mat)
    except np.linalg.LinAlgError as exc:
        raise EigensolveError(
            f"eigendecomposition failed for N={restriction.order}: {exc}; "
            f"matrix max |entry| {np.max(np.abs(mat)):.3g}"
        ) from exc
    norm = float(np.max(np.abs(w))) if len(w) else 0.0
    residual = float(np.max(np.linalg.norm(mat @ v - v * w, axis=0)))
    if residual > 1e-8 * norm:
        raise EigensolveError(
            f"eigenpair residual {residual:.3g} exceeds 1e-8 * ||Q|| = "
            f"{1e-8 * norm:.3g} at N={restriction.order}"
        )
    return _clip_unit(w, f"eigenvalue of Q_{restriction.order}")


@dataclass(frozen=True)
class EntropyResult:
    """Block size, spectrum, entropy S_N (nats) and proxy P_N = sum l(1-l)."""

    n: int
    eigenvalues: tuple[float, ...]
    entropy: float
    proxy: float


def entropy_result(restriction: ToeplitzRestriction) -> EntropyResult:
    lam = spectrum(restriction)
    s = float(np.sum(eta_tilde(lam)))
    p = float(np.sum(lam * (1.0 - lam)))
    return EntropyResult(n=restriction.order, eigenvalues=tuple(lam),
                         entropy=s, proxy=p)


def block_entropy(f: SymbolFunction, n: int) -> float:
    return entropy_result(build_restriction(f, n)).entropy


# ---------------------------------------------------------------------------
# Quadratic proxy: O(N) coefficient route and single-interval series route
# ---------------------------------------------------------------------------

def purity_proxy_direct(coeffs: SymbolCoefficients, n: int) -> float:
    """Tr Q_N(1 - Q_N) = N q(0) - sum_{|m| < N} (N - |m|) |q(m)|^2."""
    if n < 1:
        raise ValueError(f"block size must be >= 1, got {n}")
    if coeffs.n_max < n - 1:
        raise ValueError(f"need coefficients up to {n - 1}, have {coeffs.n_max}")
    q0 = coeffs.values[0].real
    m = np.arange(1, n)
    sq = np.abs(coeffs.values[1:n]) ** 2
    return float(n * q0 - (n * q0 * q0 + 2.0 * np.sum((n - m) * sq)))


def proxy_scan(coeffs: SymbolCoefficients, grid) -> list[float]:
    """purity_proxy_direct over a whole grid via cumulative sums (O(1) per N
    after an O(N_max) pass)."""
    grid = list(grid)
    n_top = max(grid)
    if coeffs.n_max < n_top - 1:
        raise ValueError(f"need coefficients up to {n_top - 1}, have {coeffs.n_max}")
    q0 = coeffs.values[0].real
    sq = np.abs(coeffs.values[1:n_top]) ** 2
    cum = np.concatenate([[0.0], np.cumsum(sq)])             # sum of |q(m)|^2, m<=k
    mcum = np.concatenate([[0.0], np.cumsum(np.arange(1, n_top) * sq)])
    out = []
    for n in grid:
        s1, s2 = cum[n - 1], mcum[n - 1]
        out.append(float(n * q0 * (1.0 - q0) - 2.0 * (n * s1 - s2)))
    return out


# Oscillatory remainders are dropped only once their rigorous bound is below
# this; the bound comes from Abel summation of cos(2 pi n x)/n^2 tails.
_SERIES_TAIL_BOUND = 1e-10


def purity_proxy_single_interval_series(length: float, n: int,
                                        tail_terms: int | None = None) -> float:
    """Independent series route for a single interval of given length:

        Tr Q_N(1-Q_N) = (2N/pi^2) sum_{m>=N} sin^2(pi m L)/m^2
                      + (2/pi^2)  sum_{m<N}  sin^2(pi m L)/m.

    The infinite tail is summed term by term up to a cutoff M; past M the
    smooth half of sin^2 = (1 - cos)/2 is added exactly via the trigamma
    function and the oscillatory half is dropped, with its Abel bound
    1/(M^2 sin(pi L)) pushed below 1e-10. The sin^2 identity that would
    collapse this route back onto the coefficient route is never used.
    """
    if not (0.0 < length <= 0.5):
        raise ValueError(f"interval length must lie in (0, 1/2], got {length}")
    if n < 1:
        raise ValueError(f"block size must be >= 1, got {n}")
    sin_floor = math.sin(math.pi * length)
    need = math.sqrt(n / (math.pi ** 2 * _SERIES_TAIL_BOUND * sin_floor))
    cutoff = max(n + 1, int(math.ceil(need)))
    if tail_terms is not None:
        cutoff = max(cutoff, n + int(tail_terms))

    head = np.arange(1, n)
    term_head = (2.0 / math.pi ** 2) * float(
        np.sum(np.sin(math.pi * head * length) ** 2 / head)) if n > 1 else 0.0

    tail_sum = 0.0
    chunk = 1 << 20
    lo = n
    while lo < cutoff:
        hi = min(cutoff, lo + chunk)
        m = np.arange(lo, hi, dtype=float)
        tail_sum += float(np.sum(np.sin(math.pi * m * length) ** 2 / m ** 2))
        lo = hi
    # Flat part of the remaining tail: sum_{m>=M} 1/(2 m^2) = trigamma(M)/2.
    tail_sum += 0.5 * float(polygamma(1, cutoff))
    return (2.0 * n / math.pi ** 2) * tail_sum + term_head


def entropy_density(f: SymbolFunction) -> float:
    """Entropy per site of the infinite chain: integral of eta_tilde over the
    symbol. Exactly zero for pure symbols."""
    return float(sum((b - a) * eta_tilde(v) for a, b, v in f.pieces()))


def max_block_entropy(n: int) -> float:
    """Upper bound N log 2 attained by the maximally mixed block."""
    return n * LOG2


def pure_symbol(K: TorusIntervalSet) -> SymbolFunction:
    return SymbolFunction.indicator(K)


def full_symbol() -> SymbolFunction:
    return SymbolFunction.indicator(full_torus())
