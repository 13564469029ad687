"""Block-size sweeps, growth-law fits, and checks of the entropy bounds.

For symbols built from finite interval unions the block entropy S_N is
squeezed between c1 log N and c3 (log N)^2; for the fat-Cantor family it
grows like N^alpha with alpha = log 2 / (-log ratio). This module runs the
sweeps (entropy by eigensolve, proxy in O(N) from coefficients), fits the
growth models, and verifies subadditivity, monotonicity, and the two-sided
envelope on computed data.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .toeplitz import (
    EntropyResult,
    SymbolFunction,
    entropy_result,
    fourier_coefficients,
    proxy_scan,
    restriction_from_coefficients,
)
from .torus_sets import CantorSpec, TorusIntervalSet

DEFAULT_EIG_CAP = 2048
DEFAULT_RATIO = math.sqrt(2.0)
# Sizes below this are dropped from fit windows by default; they carry the
# strongest finite-size transients.
DEFAULT_FIT_NMIN = 16

GAP_TOL = 1e-9
ROUTE_TOL = 1e-6

MODELS = ("power", "log", "logsq")


class VerificationError(RuntimeError):
    """An internal cross-check (route agreement) failed beyond tolerance."""


@dataclass(frozen=True)
class ScanRecord:
    """Per-block-size result: entropy is None in proxy-only scans."""

    n: int
    entropy: float | None
    proxy: float
    wall_time: float


@dataclass(frozen=True)
class ExponentFit:
    """Least-squares fit of one growth model in transformed coordinates.

    power: log S = slope * log N + intercept   (slope is the exponent alpha)
    log:   S = slope * log N + intercept
    logsq: S = slope * (log N)^2 + intercept
    """

    model: str
    slope: float
    intercept: float
    residual_rms: float
    r_squared: float
    window: tuple[int, int]
    n_points: int
    local_slopes: tuple[float, ...]


def default_grid(n_min: int, n_max: int, ratio: float = DEFAULT_RATIO) -> list[int]:
    """Geometric grid rounded to integers and deduplicated."""
    if n_min < 1 or n_max < n_min:
        raise ValueError(f"bad grid bounds [{n_min}, {n_max}]")
    if ratio <= 1.0:
        raise ValueError(f"grid ratio must exceed 1, got {ratio}")
    grid = []
    k = 0
    while True:
        v = int(round(n_min * ratio ** k))
        if v > n_max:
            break
        if not grid or v != grid[-1]:
            grid.append(v)
        k += 1
    return grid


def _as_symbol(source) -> SymbolFunction:
    if isinstance(source, SymbolFunction):
        return source
    if isinstance(source, TorusIntervalSet):
        return SymbolFunction.indicator(source)
    raise TypeError(f"cannot scan a {type(source).__name__}")


def scan(source, n_grid, mode: str = "both", eig_cap: int = DEFAULT_EIG_CAP,
         threads: int = 1) -> list[ScanRecord]:
    """Sweep block sizes and collect (S_N, P_N) records.

    ``mode`` is "entropy", "proxy", or "both". Entropy needs the O(N^3)
    eigensolve and is refused above ``eig_cap``; the proxy always comes from
    the O(N) coefficient formula. Coefficients are computed once up to the
    largest N and shared. In entropy modes the eigenvalue route for P_N is
    checked against the coefficient route and a disagreement beyond 1e-6
    relative raises VerificationError. Records come back sorted by N
    regardless of thread count.
    """
    grid = [int(n) for n in n_grid]
    if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("n_grid must be strictly increasing and nonempty")
    if grid[0] < 1:
        raise ValueError("block sizes must be >= 1")
    if mode not in ("entropy", "proxy", "both"):
        raise ValueError(f"unknown scan mode {mode!r}")
    want_entropy = mode in ("entropy", "both")
    if want_entropy and grid[-1] > eig_cap:
        raise ValueError(
            f"entropy mode needs N <= eig_cap = {eig_cap}, grid reaches {grid[-1]}"
        )

    f = _as_symbol(source)
    coeffs = fourier_coefficients(f, grid[-1] - 1)
    proxies = dict(zip(grid, proxy_scan(coeffs, grid)))

    def one(n: int) -> ScanRecord:
        t0 = time.perf_counter()
        p_direct = proxies[n]
        s_val = None
        if want_entropy:
            res: EntropyResult = entropy_result(restriction_from_coefficients(coeffs, n))
            s_val = res.entropy
            if abs(res.proxy - p_direct) > ROUTE_TOL * abs(p_direct) + 1e-9:
                raise VerificationError(
                    f"proxy routes disagree at N={n}: eigenvalue route "
                    f"{res.proxy!r} vs coefficient route {p_direct!r}"
                )
        return ScanRecord(n=n, entropy=s_val, proxy=p_direct,
                          wall_time=time.perf_counter() - t0)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(one, grid))
    else:
        records = [one(n) for n in grid]
    return sorted(records, key=lambda r: r.n)


def _series(records, series: str) -> tuple[np.ndarray, np.ndarray]:
    ns = np.array([r.n for r in records], dtype=float)
    if series == "auto":
        series = "entropy" if all(r.entropy is not None for r in records) else "proxy"
    if series == "entropy":
        if any(r.entropy is None for r in records):
            raise ValueError("entropy series requested but records are proxy-only")
        ys = np.array([r.entropy for r in records], dtype=float)
    elif series == "proxy":
        ys = np.array([r.proxy for r in records], dtype=float)
    else:
        raise ValueError(f"unknown series {series!r}")
    return ns, ys


def fit_exponent(records, model: str, window: tuple[int, int] | None = None,
                 series: str = "auto") -> ExponentFit:
    """Ordinary least squares in the model's transformed coordinates.

    ``window`` bounds N inclusively; by default sizes below DEFAULT_FIT_NMIN
    are discarded. Also reports slopes between consecutive grid points in the
    same coordinates.
    """
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}; pick one of {MODELS}")
    ns, ys = _series(sorted(records, key=lambda r: r.n), series)
    if window is None:
        window = (max(DEFAULT_FIT_NMIN, int(ns[0])), int(ns[-1]))
    lo, hi = window
    if hi <= lo:
        raise ValueError(f"degenerate fit window [{lo}, {hi}]")
    keep = (ns >= lo) & (ns <= hi)
    ns, ys = ns[keep], ys[keep]
    if len(ns) < 4:
        raise ValueError(f"need >= 4 records inside window [{lo}, {hi}], have {len(ns)}")
    if np.any(ys <= 0.0):
        raise ValueError("growth fits need strictly positive values")

    logn = np.log(ns)
    if model == "power":
        x, y = logn, np.log(ys)
    elif model == "log":
        x, y = logn, ys
    else:
        x, y = logn ** 2, ys

    design = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - (slope * x + intercept)
    ss_res = float(np.sum(resid ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 if ss_tot == 0.0 and ss_res < 1e-20 else 1.0 - ss_res / ss_tot
    local = tuple(np.diff(y) / np.diff(x))
    return ExponentFit(model=model, slope=float(slope), intercept=float(intercept),
                       residual_rms=math.sqrt(ss_res / len(ns)),
                       r_squared=float(min(max(r2, 0.0), 1.0)),
                       window=(int(lo), int(hi)), n_points=len(ns),
                       local_slopes=local)


def predicted_alpha(spec: CantorSpec) -> float:
    """Growth exponent log 2 / (-log ratio) of the fat-Cantor family."""
    return math.log(2.0) / (-math.log(spec.ratio))


def check_subadditivity(k1: TorusIntervalSet, k2: TorusIntervalSet, n: int,
                        eig_cap: int = DEFAULT_EIG_CAP) -> float:
    """Gap S_N(K1) + S_N(K2) - S_N(K1 u K2) for disjoint K1, K2; the
    subadditivity bound makes it nonnegative up to eigensolve noise."""
    if n > eig_cap:
        raise ValueError(f"N={n} above eigensolve cap {eig_cap}")
    if k1.intersection(k2).measure > 1e-12:
        raise ValueError("subadditivity check needs disjoint sets")

    def s_of(K: TorusIntervalSet) -> float:
        if K.is_empty:
            return 0.0
        return entropy_result(
            restriction_from_coefficients(
                fourier_coefficients(SymbolFunction.indicator(K), n - 1), n)
        ).entropy

    return s_of(k1) + s_of(k2) - s_of(k1.union(k2))


def check_monotonicity(records, tol: float = GAP_TOL) -> bool:
    """True when S_N never decreases (beyond tolerance) along the records."""
    recs = sorted(records, key=lambda r: r.n)
    if any(r.entropy is None for r in recs):
        raise ValueError("monotonicity check needs entropy-mode records")
    return all(b.entropy >= a.entropy - tol for a, b in zip(recs, recs[1:]))


@dataclass(frozen=True)
class EnvelopeReport:
    """Constants witnessing the log N lower and (log N)^2 upper envelope.

    c1 is the largest constant with S_N >= c1 log N on the window (positive
    iff the lower bound holds); c3 the smallest with S_N <= c3 (log N)^2;
    sandwich_c the smallest c with S_N <= 1 + c log N * P_N for N >= 2.
    """

    c1: float
    c3: float
    sandwich_c: float
    lower_bound_exists: bool
    proxy_below_entropy: bool
    window: tuple[int, int]


def bound_envelope(records, n_min: int = 8) -> EnvelopeReport:
    recs = [r for r in sorted(records, key=lambda r: r.n) if r.n >= 2]
    if any(r.entropy is None for r in recs):
        raise ValueError("envelope check needs entropy-mode records")
    if not recs:
        raise ValueError("no records with N >= 2")
    win = [r for r in recs if r.n >= n_min]
    if not win:
        raise ValueError(f"no records with N >= {n_min}")
    c1 = min(r.entropy / math.log(r.n) for r in win)
    c3 = max(r.entropy / math.log(r.n) ** 2 for r in win)
    sandwich = 0.0
    for r in recs:
        if r.proxy > 0.0:
            sandwich = max(sandwich, (r.entropy - 1.0) / (math.log(r.n) * r.proxy))
    proxy_ok = all(r.proxy <= r.entropy + GAP_TOL for r in recs)
    return EnvelopeReport(c1=c1, c3=c3, sandwich_c=sandwich,
                          lower_bound_exists=c1 > 0.0,
                          proxy_below_entropy=proxy_ok,
                          window=(win[0].n, win[-1].n))


MAX_CANTOR_DEPTH = 60


def cantor_depth_policy(spec: CantorSpec, n_max: int) -> int:
    """Smallest depth whose first omitted holes are finer than the resolution
    scale 1/(2 N_max); equivalently the depth m with
    hole(m) >= 1/(2 N_max) > hole(m+1)."""
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    scale = 1.0 / (2.0 * n_max)
    for depth in range(MAX_CANTOR_DEPTH + 1):
        if spec.hole_length(depth + 1) < scale:
            return depth
    raise ValueError(
        f"depth needed for N_max={n_max} exceeds the cap {MAX_CANTOR_DEPTH} "
        f"(ratio {spec.ratio}, amplitude {spec.amplitude})"
    )
