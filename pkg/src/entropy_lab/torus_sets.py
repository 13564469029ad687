"""Interval-union arithmetic on the unit torus [0, 1).

Every set handled here is a finite union of half-open intervals, stored in a
canonical form: pieces sorted by start, pairwise disjoint, split at the seam
0 == 1. A ``wraps`` flag records whether the first and last stored pieces are
actually one interval crossing the seam, so interval counts stay correct on
the torus.

All values are immutable and all operations are pure functions; they can be
shared freely across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Endpoints closer than this are merged during canonicalization. Endpoint
# topology (open vs closed) is measure zero and never affects any computed
# quantity.
MERGE_TOL = 1e-12


class TorusSetError(ValueError):
    """Invalid interval data or set construction parameters."""


class DispersionPlateauError(TorusSetError):
    """Requested filling sits on a flat stretch of the dispersion relation."""


@dataclass(frozen=True)
class TorusIntervalSet:
    """Finite union of disjoint half-open intervals on the torus.

    ``intervals`` holds (start, end) pairs with 0 <= start < end <= 1, sorted
    by start. A piece crossing the seam is stored split; ``wraps`` is True
    when the first piece starts at 0 and the last ends at 1 without the set
    being the full torus.
    """

    intervals: tuple[tuple[float, float], ...]
    wraps: bool = False

    @property
    def measure(self) -> float:
        return sum(e - s for s, e in self.intervals)

    @property
    def interval_count(self) -> int:
        """Number of intervals as subsets of the torus (seam-adjacent pieces
        count once)."""
        n = len(self.intervals)
        return n - 1 if self.wraps else n

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    @property
    def is_full(self) -> bool:
        return len(self.intervals) == 1 and self.intervals[0] == (0.0, 1.0)

    def endpoints(self) -> list[float]:
        out = []
        for s, e in self.intervals:
            out.append(s)
            out.append(e)
        return out

    def complement(self) -> "TorusIntervalSet":
        if self.is_empty:
            return full_torus()
        if self.is_full:
            return empty_set()
        gaps = []
        prev = 0.0
        for s, e in self.intervals:
            if s > prev:
                gaps.append((prev, s))
            prev = e
        if prev < 1.0:
            gaps.append((prev, 1.0))
        return canonicalize(gaps)

    def translate(self, phi: float) -> "TorusIntervalSet":
        if self.is_empty or self.is_full:
            return self
        return canonicalize([(s + phi, e + phi) for s, e in self.intervals])

    def intersection(self, other: "TorusIntervalSet") -> "TorusIntervalSet":
        pieces = []
        for s1, e1 in self.intervals:
            for s2, e2 in other.intervals:
                lo, hi = max(s1, s2), min(e1, e2)
                if hi > lo:
                    pieces.append((lo, hi))
        if not pieces:
            return empty_set()
        return canonicalize(pieces)

    def union(self, other: "TorusIntervalSet") -> "TorusIntervalSet":
        pieces = list(self.intervals) + list(other.intervals)
        if not pieces:
            return empty_set()
        return canonicalize(pieces)

    def overlap_deficit(self, phi: float) -> float:
        """Measure of K \\ (K + phi): how much of the set a rigid shift by
        phi uncovers. Symmetric in phi -> -phi."""
        return float(overlap_deficit_profile(self, np.asarray([phi]))[0])


def empty_set() -> TorusIntervalSet:
    return TorusIntervalSet(intervals=(), wraps=False)


def full_torus() -> TorusIntervalSet:
    return TorusIntervalSet(intervals=((0.0, 1.0),), wraps=False)


def canonicalize(raw) -> TorusIntervalSet:
    """Reduce arbitrary (start, end) pairs to the canonical disjoint form.

    Accepts overlapping pieces, endpoints outside [0, 1), and wrapping pieces
    (given either as end > 1 or end < start). Intervals of length >= 1 cover
    the torus. Idempotent: canonical input comes back unchanged.
    """
    pieces = []
    for s, e in raw:
        s, e = float(s), float(e)
        if not (math.isfinite(s) and math.isfinite(e)):
            raise TorusSetError(f"non-finite interval endpoint: ({s}, {e})")
        if e - s >= 1.0:
            return full_torus()
        length = (e - s) % 1.0
        if length == 0.0:
            raise TorusSetError(f"zero-length interval (mod 1): ({s}, {e})")
        start = s % 1.0
        if start < MERGE_TOL:
            start = 0.0
        end = start + length
        if end > 1.0 - MERGE_TOL:
            if end - 1.0 > MERGE_TOL:
                pieces.append((start, 1.0))
                pieces.append((0.0, end - 1.0))
            else:
                pieces.append((start, 1.0))
        else:
            pieces.append((start, end))

    if not pieces:
        return empty_set()

    pieces.sort()
    merged = [list(pieces[0])]
    for s, e in pieces[1:]:
        if s <= merged[-1][1] + MERGE_TOL:
            merged[-1][1] = max(merged[-1][1], e)
        else:
            merged.append([s, e])

    if len(merged) == 1 and merged[0][0] == 0.0 and merged[0][1] == 1.0:
        return full_torus()
    if merged[0][0] == 0.0 and merged[-1][1] == 1.0 and len(merged) > 1:
        wraps = True
    else:
        wraps = False
    total = sum(e - s for s, e in merged)
    if total > 1.0 - MERGE_TOL and wraps and len(merged) == 2:
        # merged pieces meet at the seam and jointly cover everything
        if merged[0][1] + MERGE_TOL >= merged[1][0]:
            return full_torus()
    return TorusIntervalSet(intervals=tuple((s, e) for s, e in merged), wraps=wraps)


def overlap_deficit_profile(K: TorusIntervalSet, phis: np.ndarray) -> np.ndarray:
    """|K \\ (K + phi)| evaluated for an array of shifts at once.

    The intersection measure is summed over piece pairs; the shifted piece is
    compared both directly and displaced by -1 to cover the seam.
    """
    phis = np.asarray(phis, dtype=float)
    if K.is_empty or K.is_full:
        return np.zeros_like(phis)
    overlap = np.zeros_like(phis)
    for a1, b1 in K.intervals:
        for a2, b2 in K.intervals:
            length = b2 - a2
            s = (a2 + phis) % 1.0
            e = s + length
            overlap += np.maximum(0.0, np.minimum(b1, e) - np.maximum(a1, s))
            overlap += np.maximum(0.0, np.minimum(b1, e - 1.0) - np.maximum(a1, s - 1.0))
    return K.measure - overlap


def deficit_breakpoints(K: TorusIntervalSet) -> np.ndarray:
    """Shifts where phi -> |K \\ (K+phi)| can kink, mapped into [-1/2, 1/2].

    These are differences of interval endpoints mod 1; between consecutive
    breakpoints the profile is affine.
    """
    pts = {0.0, -0.5, 0.5}
    ends = K.endpoints()
    for x in ends:
        for y in ends:
            d = (x - y) % 1.0
            if d > 0.5:
                d -= 1.0
            pts.add(d)
            pts.add(-d)
    return np.array(sorted(pts))


# ---------------------------------------------------------------------------
# Cantor-like sets with geometrically shrinking holes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CantorSpec:
    """Parameters of the recursive fat-Cantor construction.

    Generation m removes, from the middle of each of the 2^(m-1) intervals
    present, an open hole of length ``amplitude * ratio**m``. The limit set
    keeps positive measure 1 - amplitude*ratio/(1 - 2*ratio), which the
    invariant amplitude*ratio/(1-2*ratio) < 1 guarantees.
    """

    ratio: float
    amplitude: float
    depth: int = 0

    def __post_init__(self):
        if not (0.0 < self.ratio < 0.5):
            raise TorusSetError(f"ratio must lie in (0, 1/2), got {self.ratio}")
        if not (self.amplitude > 0.0):
            raise TorusSetError(f"amplitude must be positive, got {self.amplitude}")
        removed = self.amplitude * self.ratio / (1.0 - 2.0 * self.ratio)
        if removed >= 1.0:
            raise TorusSetError(
                f"total removed measure {removed:.6g} >= 1; "
                "need amplitude*ratio/(1-2*ratio) < 1"
            )
        if self.depth < 0 or self.depth != int(self.depth):
            raise TorusSetError(f"depth must be a nonnegative integer, got {self.depth}")

    def hole_length(self, m: int) -> float:
        return self.amplitude * self.ratio ** m

    @property
    def limit_measure(self) -> float:
        return 1.0 - self.amplitude * self.ratio / (1.0 - 2.0 * self.ratio)

    def truncated_measure(self, depth: int | None = None) -> float:
        d = self.depth if depth is None else depth
        return 1.0 - sum(2 ** (m - 1) * self.hole_length(m) for m in range(1, d + 1))


def cantor_generate(spec: CantorSpec) -> TorusIntervalSet:
    """Finite-depth truncation of the Cantor-like set.

    Returns 2**depth equal closed intervals; the holes cut at generation m
    have length exactly amplitude*ratio**m and sit centered in their parents.
    """
    if spec.depth > 0 and spec.hole_length(spec.depth) <= 10 * MERGE_TOL:
        raise TorusSetError(
            f"holes at depth {spec.depth} are below endpoint resolution "
            f"({spec.hole_length(spec.depth):.3g})"
        )
    pieces = [(0.0, 1.0)]
    for m in range(1, spec.depth + 1):
        hole = spec.hole_length(m)
        parent_len = pieces[0][1] - pieces[0][0]
        if hole >= parent_len:
            raise TorusSetError(
                f"hole {hole:.6g} at generation {m} does not fit inside "
                f"parent interval of length {parent_len:.6g}"
            )
        nxt = []
        for s, e in pieces:
            c = 0.5 * (s + e)
            nxt.append((s, c - 0.5 * hole))
            nxt.append((c + 0.5 * hole, e))
        pieces = nxt
    return canonicalize(pieces)


# ---------------------------------------------------------------------------
# Fermi-sea construction from a sampled dispersion relation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DispersionSamples:
    """Periodic dispersion sampled at strictly increasing momenta in [0, 1).

    Between samples the energy is interpolated linearly; the stretch from the
    last sample back to the first closes the circle.
    """

    thetas: tuple[float, ...]
    energies: tuple[float, ...]

    def __post_init__(self):
        if len(self.thetas) < 3:
            raise TorusSetError("need at least 3 dispersion samples")
        if len(self.thetas) != len(self.energies):
            raise TorusSetError("theta and energy sample counts differ")
        for t in self.thetas:
            if not (0.0 <= t < 1.0) or not math.isfinite(t):
                raise TorusSetError(f"sample momentum {t} outside [0, 1)")
        for a, b in zip(self.thetas, self.thetas[1:]):
            if b <= a:
                raise TorusSetError("sample momenta must be strictly increasing")
        if not all(math.isfinite(e) for e in self.energies):
            raise TorusSetError("non-finite energy sample")

    def segments(self):
        """(theta0, theta1, e0, e1) pieces covering one period; the last one
        extends past 1 to close the loop."""
        segs = []
        for i in range(len(self.thetas) - 1):
            segs.append((self.thetas[i], self.thetas[i + 1],
                         self.energies[i], self.energies[i + 1]))
        segs.append((self.thetas[-1], self.thetas[0] + 1.0,
                     self.energies[-1], self.energies[0]))
        return segs


def _sublevel_measure(disp: DispersionSamples, level: float) -> float:
    total = 0.0
    for t0, t1, e0, e1 in disp.segments():
        w = t1 - t0
        if e0 <= level and e1 <= level:
            total += w
        elif e0 <= level < e1:
            total += w * (level - e0) / (e1 - e0)
        elif e1 <= level < e0:
            total += w * (level - e1) / (e0 - e1)
    return total


def _sublevel_set(disp: DispersionSamples, level: float) -> TorusIntervalSet:
    pieces = []
    for t0, t1, e0, e1 in disp.segments():
        w = t1 - t0
        if e0 <= level and e1 <= level:
            pieces.append((t0, t1))
        elif e0 <= level < e1:
            pieces.append((t0, t0 + w * (level - e0) / (e1 - e0)))
        elif e1 <= level < e0:
            pieces.append((t1 - w * (level - e1) / (e0 - e1), t1))
    pieces = [(lo, hi) for lo, hi in pieces if hi - lo > 0.0]
    if not pieces:
        return empty_set()
    return canonicalize(pieces)


FERMI_TOL = 1e-9
_BISECTION_STEPS = 200


def fermi_sea(disp: DispersionSamples, filling: float) -> TorusIntervalSet:
    """Sublevel set {theta : dispersion(theta) <= e_F} with the Fermi level
    chosen so the set has measure ``filling``.

    The level is located by bisection on the piecewise-linear interpolant.
    When the dispersion is flat at the target level, no level attains the
    requested measure; this is reported as a DispersionPlateauError.
    """
    if not (0.0 <= filling <= 1.0):
        raise TorusSetError(f"filling must lie in [0, 1], got {filling}")
    if filling == 0.0:
        return empty_set()
    if filling == 1.0:
        return full_torus()

    lo = min(disp.energies) - 1.0
    hi = max(disp.energies)
    for _ in range(_BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        if _sublevel_measure(disp, mid) >= filling:
            hi = mid
        else:
            lo = mid
    level = hi
    sea = _sublevel_set(disp, level)
    if abs(sea.measure - filling) > FERMI_TOL:
        below = _sublevel_measure(disp, lo)
        above = _sublevel_measure(disp, hi)
        raise DispersionPlateauError(
            f"dispersion has a plateau at level {level:.12g}: sublevel measure "
            f"jumps from {below:.12g} to {above:.12g} across the target "
            f"filling {filling:.12g}"
        )
    return sea


# ---------------------------------------------------------------------------
# Seeded random sets for property sweeps
# ---------------------------------------------------------------------------

def random_interval_set(rng: np.random.Generator, max_intervals: int = 3,
                        min_length: float = 0.02) -> TorusIntervalSet:
    """Random union of 1..max_intervals disjoint intervals, none touching the
    seam, with all interval and gap lengths at least ``min_length``."""
    m = int(rng.integers(1, max_intervals + 1))
    while True:
        pts = np.sort(rng.uniform(0.0, 1.0, size=2 * m))
        gaps = np.diff(pts)
        if len(gaps) == 0 or (np.min(gaps) >= min_length and pts[0] >= min_length
                              and 1.0 - pts[-1] >= min_length):
            break
    return canonicalize([(pts[2 * i], pts[2 * i + 1]) for i in range(m)])


def random_disjoint_pair(rng: np.random.Generator, max_each: int = 2,
                         min_length: float = 0.02):
    """Two disjoint random interval sets (alternating slots of one point
    collection, so disjointness is exact)."""
    m1 = int(rng.integers(1, max_each + 1))
    m2 = int(rng.integers(1, max_each + 1))
    m = m1 + m2
    while True:
        pts = np.sort(rng.uniform(0.0, 1.0, size=2 * m))
        gaps = np.diff(pts)
        if np.min(gaps) >= min_length and pts[0] >= min_length \
                and 1.0 - pts[-1] >= min_length:
            break
    slots = [(pts[2 * i], pts[2 * i + 1]) for i in range(m)]
    order = rng.permutation(m)
    k1 = canonicalize([slots[i] for i in order[:m1]])
    k2 = canonicalize([slots[i] for i in order[m1:]])
    return k1, k2
