"""Fejer-kernel integral route to the quadratic proxy Tr Q_N(1 - Q_N).

The proxy admits the representation

    Tr Q_N(1 - Q_N) = N * integral over [-1/2, 1/2] of
                      k_N(phi) * |K \\ (K + phi)| dphi,

with the positive normalized kernel k_N(phi) = sin^2(N pi phi) /
(N sin^2(pi phi)). The same value results with the complement K^c in place
of K. This module evaluates these integrals numerically as an independent
check on the coefficient and eigenvalue routes; it is a verification path,
not the fast path.
"""

from __future__ import annotations

import math

import numpy as np

from .torus_sets import TorusIntervalSet, deficit_breakpoints, overlap_deficit_profile

# Target absolute error per integral and the panel recursion cap.
QUAD_TOL = 1e-9
MAX_DEPTH = 40

# Below this distance from an integer the kernel is evaluated by its Taylor
# expansion; the closed form loses digits to the 0/0 cancellation there.
_SMALL_PHI = 1e-8


class QuadratureError(RuntimeError):
    """Panel subdivision hit the depth cap before reaching the tolerance."""


def fejer_kernel(n: int, phi) -> np.ndarray | float:
    """k_N(phi) = sin^2(N pi phi) / (N sin^2(pi phi)), period 1.

    The removable singularities at integer phi take the limit value N; near
    them a series evaluation N (1 - (N^2 - 1)(pi phi)^2 / 3) is used.
    """
    if n < 1:
        raise ValueError(f"kernel order must be >= 1, got {n}")
    phi_arr = np.asarray(phi, dtype=float)
    r = phi_arr - np.round(phi_arr)
    small = np.abs(r) < _SMALL_PHI
    out = np.empty_like(r)
    out[small] = n * (1.0 - (n * n - 1.0) * (math.pi * r[small]) ** 2 / 3.0)
    rs = r[~small]
    out[~small] = np.sin(n * math.pi * rs) ** 2 / (n * np.sin(math.pi * rs) ** 2)
    return out if out.ndim else float(out)


def kernel_zeros(n: int) -> np.ndarray:
    """Zeros j/N of k_N inside [-1/2, 1/2]."""
    j = np.arange(-(n // 2), n // 2 + 1)
    z = j / n
    return z[(z >= -0.5) & (z <= 0.5)]


def adaptive_integral(f, edges: np.ndarray, abs_tol: float = QUAD_TOL,
                      max_depth: int = MAX_DEPTH) -> float:
    """Adaptive Simpson quadrature over panels with forced breakpoints.

    ``f`` must accept an ndarray of abscissae. Each initial panel spans two
    consecutive edges; panels are split until the Richardson error estimate
    falls under the panel's width-proportional share of ``abs_tol`` or the
    depth cap is reached, in which case the run fails loudly.
    """
    edges = np.asarray(edges, dtype=float)
    if len(edges) < 2:
        raise ValueError("need at least two panel edges")
    total_width = edges[-1] - edges[0]
    a = edges[:-1].copy()
    b = edges[1:].copy()
    keep = b - a > 1e-15
    a, b = a[keep], b[keep]
    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    s = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    tol = abs_tol * (b - a) / total_width
    depth = np.zeros(len(a), dtype=int)

    total = 0.0
    capped = 0
    while len(a):
        m = 0.5 * (a + b)
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        s_left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        s_right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        err = (s_left + s_right - s) / 15.0
        done = (np.abs(err) <= tol) | (depth >= max_depth)
        capped += int(np.sum((depth >= max_depth) & (np.abs(err) > tol)))
        total += float(np.sum((s_left + s_right + err)[done]))

        live = ~done
        a = np.concatenate([a[live], m[live]])
        b = np.concatenate([m[live], b[live]])
        fa = np.concatenate([fa[live], fm[live]])
        fb = np.concatenate([fm[live], fb[live]])
        fm = np.concatenate([flm[live], frm[live]])
        s = np.concatenate([s_left[live], s_right[live]])
        tol = np.concatenate([tol[live] / 2.0, tol[live] / 2.0])
        depth = np.concatenate([depth[live] + 1, depth[live] + 1])

    if capped:
        raise QuadratureError(
            f"{capped} panel(s) hit depth {max_depth} above tolerance "
            f"{abs_tol:.1g}; estimated error not trustworthy"
        )
    return total


def _proxy_integral(K: TorusIntervalSet, n: int) -> float:
    if K.is_empty or K.is_full:
        return 0.0
    pts = set(np.round(kernel_zeros(n), 15).tolist())
    pts.update(np.round(deficit_breakpoints(K), 15).tolist())
    pts.update((-0.5, 0.0, 0.5))
    edges = np.array(sorted(p for p in pts if -0.5 <= p <= 0.5))

    def integrand(phi):
        return n * fejer_kernel(n, phi) * overlap_deficit_profile(K, phi)

    return adaptive_integral(integrand, edges, abs_tol=QUAD_TOL)


def purity_proxy_kernel(K: TorusIntervalSet, n: int) -> float:
    """Kernel-integral evaluation of Tr Q_N(1 - Q_N) for the pure symbol
    chi_K."""
    if n < 1:
        raise ValueError(f"block size must be >= 1, got {n}")
    return _proxy_integral(K, n)


def purity_proxy_kernel_complement(K: TorusIntervalSet, n: int) -> float:
    """Same integral with K^c; equals purity_proxy_kernel(K, n) up to
    quadrature tolerance."""
    if n < 1:
        raise ValueError(f"block size must be >= 1, got {n}")
    return _proxy_integral(K.complement(), n)
