"""Brute-force Fock-space oracle for small blocks.

Quasi-free expectations of fermion operator words are evaluated by Wick
contraction against the two-point matrix; the reduced density matrix of an
n-site block is then assembled entry by entry from spin matrix units mapped
through the Jordan-Wigner parity strings. Diagonalizing that 2^n x 2^n
matrix gives the block entropy a second, completely independent way, which
cross-checks Tr eta_tilde(Q_n) from the Toeplitz route.

Conventions fixed here:
  * Basis index bit order: site 0 is the most significant bit.
  * Bit 0 at site k means matrix-unit index 1, i.e. the occupied state
    (the n=1 density matrix is diag(q(0), 1 - q(0))).
  * rho[j, i] carries the expectation of the product of E_{i_k j_k}
    matrix units, which is what Tr(rho E) = phi(E) requires.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .toeplitz import SymbolFunction, build_restriction, eta
from .torus_sets import TorusIntervalSet

MAX_WORD_LEN = 24
MAX_ORACLE_SITES = 8

# (site, dagger) pairs; a word is a tuple of them, leftmost factor first.
FermionOp = tuple[int, bool]


class OracleError(ValueError):
    """Word or block size outside the oracle's brute-force range."""


def wick_expectation(word, q_window: np.ndarray) -> complex:
    """Quasi-free expectation of an operator word by Wick recursion.

    Elementary contractions: <c_i+ c_j> = Q[i, j], <c_i c_j+> =
    delta_ij - Q[j, i], and same-type pairs vanish. Words of odd length or
    with unequal creation and annihilation counts are zero outright. The
    recursion pairs the leftmost operator with each later partner,
    alternating signs, and memoizes on the bitmask of surviving positions.
    """
    word = tuple(word)
    length = len(word)
    if length > MAX_WORD_LEN:
        raise OracleError(f"word length {length} exceeds {MAX_WORD_LEN}")
    q_window = np.asarray(q_window)
    dim = q_window.shape[0]
    if q_window.shape != (dim, dim):
        raise OracleError("two-point matrix must be square")
    if np.max(np.abs(q_window - q_window.conj().T), initial=0.0) > 1e-10:
        raise OracleError("two-point matrix must be Hermitian")
    for site, _ in word:
        if not (0 <= site < dim):
            raise OracleError(f"site {site} outside the {dim}-site window")

    if length % 2 == 1:
        return 0j
    if sum(1 for _, dagger in word if dagger) * 2 != length:
        return 0j
    if length == 0:
        return 1 + 0j

    contraction = [[0j] * length for _ in range(length)]
    for x in range(length):
        sx, dx = word[x]
        for y in range(x + 1, length):
            sy, dy = word[y]
            if dx and not dy:
                contraction[x][y] = complex(q_window[sx, sy])
            elif not dx and dy:
                contraction[x][y] = (1.0 if sx == sy else 0.0) - complex(q_window[sy, sx])

    memo: dict[int, complex] = {}

    def paired(mask: int) -> complex:
        if mask == 0:
            return 1 + 0j
        cached = memo.get(mask)
        if cached is not None:
            return cached
        first = (mask & -mask).bit_length() - 1
        rest = mask ^ (1 << first)
        row = contraction[first]
        total = 0j
        sign = 1.0
        m = rest
        while m:
            j = (m & -m).bit_length() - 1
            m ^= 1 << j
            c = row[j]
            if c != 0:
                total += sign * c * paired(rest ^ (1 << j))
            sign = -sign
        memo[mask] = total
        return total

    return paired((1 << length) - 1)


def determinant_expectation(creators, annihilators, q_window: np.ndarray) -> complex:
    """det [Q_{i_k, j_l}] for the normal-ordered word
    c+_{i_1}..c+_{i_m} c_{j_m}..c_{j_1}; the closed form the Wick recursion
    must reproduce on such words."""
    creators = list(creators)
    annihilators = list(annihilators)
    if len(creators) != len(annihilators):
        return 0j
    if not creators:
        return 1 + 0j
    sub = np.asarray(q_window)[np.ix_(creators, annihilators)]
    return complex(np.linalg.det(sub))


def matrix_unit_word(site: int, a: int, b: int, n: int):
    """Expansion of the matrix unit E_ab at ``site`` into weighted fermion
    words.

    Diagonal units are single words c+c and cc+. Off-diagonal units carry the
    parity string prod_{l<site} (2 c+_l c_l - 1), expanded termwise into at
    most 2^site words with exactly representable +-2^j coefficients.
    """
    if not (0 <= site < n):
        raise OracleError(f"site {site} outside window of {n}")
    if a not in (1, 2) or b not in (1, 2):
        raise OracleError(f"matrix-unit indices must be 1 or 2, got ({a}, {b})")
    if a == 1 and b == 1:
        return [(1, ((site, True), (site, False)))]
    if a == 2 and b == 2:
        return [(1, ((site, False), (site, True)))]
    last: FermionOp = (site, True) if (a, b) == (1, 2) else (site, False)
    expansion = []
    for picks in itertools.product((False, True), repeat=site):
        coeff = 1
        ops: list[FermionOp] = []
        for l, take_number_op in enumerate(picks):
            if take_number_op:
                coeff *= 2
                ops += [(l, True), (l, False)]
            else:
                coeff *= -1
        expansion.append((coeff, tuple(ops) + (last,)))
    return expansion


@dataclass(eq=False)
class FockDensityMatrix:
    """Reduced density matrix on n sites in the occupation basis."""

    n: int
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        dim = 1 << self.n
        if self.matrix.shape != (dim, dim):
            raise ValueError(f"expected {dim} x {dim} matrix for n={self.n}")
        herm = np.max(np.abs(self.matrix - self.matrix.conj().T))
        if herm > 1e-10:
            raise ValueError(f"density matrix not Hermitian: deviation {herm:.3g}")
        tr = complex(np.trace(self.matrix))
        if abs(tr - 1.0) > 1e-10:
            raise ValueError(f"density matrix trace {tr} differs from 1")
        pmin = float(np.min(np.linalg.eigvalsh(self.matrix)))
        if pmin < -1e-10:
            raise ValueError(f"density matrix has eigenvalue {pmin:.3g} < 0")
        self.matrix.setflags(write=False)


def _entry_sign_and_word(row: int, col: int, n: int):
    """Operator content of entry (row, col), or None when it vanishes by
    parity.

    Column bits give the first matrix-unit indices, row bits the second.
    Parity strings of the off-diagonal units cancel pairwise ((sigma_z)^2 = 1)
    leaving sigma_z factors on each left pair member and across the gap
    between pair members; absorbing those into the same-site units costs a
    sign per annihilator pair-head and per gap E_22, plus (-1) per pair from
    commuting the strings into place.
    """
    row_bits = [(row >> (n - 1 - k)) & 1 for k in range(n)]
    col_bits = [(col >> (n - 1 - k)) & 1 for k in range(n)]
    off_sites = [k for k in range(n) if row_bits[k] != col_bits[k]]
    if len(off_sites) % 2 == 1:
        return None

    sign = -1.0 if (len(off_sites) // 2) % 2 else 1.0
    for s in range(0, len(off_sites), 2):
        head, tail = off_sites[s], off_sites[s + 1]
        if col_bits[head] == 1:          # head op is an annihilator
            sign = -sign
        for l in range(head + 1, tail):
            if row_bits[l] == 1 and col_bits[l] == 1:   # E_22 inside the string
                sign = -sign

    ops: list[FermionOp] = []
    for k in range(n):
        i, j = col_bits[k] + 1, row_bits[k] + 1
        if (i, j) == (1, 1):
            ops += [(k, True), (k, False)]
        elif (i, j) == (2, 2):
            ops += [(k, False), (k, True)]
        elif (i, j) == (1, 2):
            ops.append((k, True))
        else:
            ops.append((k, False))
    return sign, tuple(ops)


def _validated_window(f: SymbolFunction, n: int) -> np.ndarray:
    q = build_restriction(f, n).matrix
    lam = np.linalg.eigvalsh(q)
    if lam.min() < -1e-9 or lam.max() > 1.0 + 1e-9:
        raise OracleError(
            f"two-point matrix spectrum [{lam.min():.3g}, {lam.max():.3g}] "
            "outside [0, 1]"
        )
    return q


def density_matrix(source, n: int) -> FockDensityMatrix:
    """Reduced density matrix of an n-site block, assembled by Wick
    contraction.

    Every entry is evaluated independently (no Hermitian mirroring), so the
    Hermiticity of the result is a genuine consistency check. Entries between
    occupation sectors of different particle number vanish by gauge
    invariance and are skipped.
    """
    if not (1 <= n <= MAX_ORACLE_SITES):
        raise OracleError(f"oracle handles 1..{MAX_ORACLE_SITES} sites, got {n}")
    f = source if isinstance(source, SymbolFunction) else SymbolFunction.indicator(source)
    q = _validated_window(f, n)
    dim = 1 << n
    rho = np.zeros((dim, dim), dtype=complex)
    weights = [bin(x).count("1") for x in range(dim)]
    for r in range(dim):
        for c in range(dim):
            if weights[r] != weights[c]:
                continue
            payload = _entry_sign_and_word(r, c, n)
            if payload is None:
                continue
            sign, word = payload
            rho[r, c] = sign * wick_expectation(word, q)
    return FockDensityMatrix(n=n, matrix=rho)


def density_matrix_from_matrix_units(source, n: int) -> FockDensityMatrix:
    """Literal assembly from products of matrix_unit_word expansions.

    Exponentially more words than density_matrix (the parity strings are not
    cancelled), so it is capped at 4 sites; it exists as the definitional
    reference the optimized assembly is tested against.
    """
    if not (1 <= n <= 4):
        raise OracleError(f"reference assembly is capped at 4 sites, got {n}")
    f = source if isinstance(source, SymbolFunction) else SymbolFunction.indicator(source)
    q = _validated_window(f, n)
    dim = 1 << n
    rho = np.zeros((dim, dim), dtype=complex)
    for r in range(dim):
        row_bits = [(r >> (n - 1 - k)) & 1 for k in range(n)]
        for c in range(dim):
            col_bits = [(c >> (n - 1 - k)) & 1 for k in range(n)]
            factors = [matrix_unit_word(k, col_bits[k] + 1, row_bits[k] + 1, n)
                       for k in range(n)]
            value = 0j
            for combo in itertools.product(*factors):
                coeff = 1
                word: tuple[FermionOp, ...] = ()
                for cf, ops in combo:
                    coeff *= cf
                    word += ops
                value += coeff * wick_expectation(word, q)
            rho[r, c] = value
    return FockDensityMatrix(n=n, matrix=rho)


def vn_entropy(rho: FockDensityMatrix) -> float:
    """Von Neumann entropy (nats) of the density matrix."""
    probs = np.linalg.eigvalsh(rho.matrix)
    return float(np.sum(eta(probs)))


def partial_trace_last_site(rho: FockDensityMatrix) -> FockDensityMatrix:
    """Trace out the last site (the least significant bit)."""
    if rho.n < 2:
        raise OracleError("nothing left after tracing a single site")
    dim = 1 << (rho.n - 1)
    small = np.zeros((dim, dim), dtype=complex)
    for s in (0, 1):
        small += rho.matrix[s::2, s::2]
    return FockDensityMatrix(n=rho.n - 1, matrix=small)


def block_entropy_oracle(K: TorusIntervalSet | SymbolFunction, n: int) -> float:
    """Block entropy via the Fock-space route; the quantity that must agree
    with the Toeplitz eigenvalue route to oracle precision."""
    return vn_entropy(density_matrix(K, n))
