"""Brute-force diagonalization on the full 2^L Fock space.

This is the independent oracle the rest of the package is checked against,
so it stays deliberately dumb: explicit sparse matrices in the occupation
basis, dense or Lanczos eigensolves, no symmetry tricks.

Basis convention (fixed, everything downstream depends on it): basis index
n encodes occupations little-endian, bit j of n = occupation of site j.
Annihilation picks up the fermionic sign (-1)^(number of occupied sites
below j).  Pauli strings embed by Kronecker products with site 0 as the
fastest-varying (least significant) factor.
"""

from __future__ import annotations

import dataclasses
import functools

import numpy as np
from scipy import linalg as sla
from scipy import sparse
from scipy.sparse.linalg import eigsh

from .exceptions import ValidationError
from .jordan_wigner import PAULI_MATRICES, PauliString
from .monomials import FermionMonomial, Kind
from .quadratic import QuadraticHamiltonian

__all__ = [
    "MAX_SITES",
    "DEGENERACY_ATOL",
    "EDOperator",
    "EDState",
    "apply_monomial",
    "ed_build",
    "ed_expectation",
    "ed_ground",
    "parity_operator",
]

MAX_SITES = 14
DEGENERACY_ATOL = 1e-10


def _check_sites(L: int) -> None:
    if not isinstance(L, (int, np.integer)) or L < 1:
        raise ValidationError(f"need a positive site count, got {L!r}")
    if L > MAX_SITES:
        raise ValidationError(
            f"L={L} would need a 2^{L}-dimensional Fock space; limit is {MAX_SITES}"
        )


@functools.lru_cache(maxsize=None)
def _annihilators(L):
    """Sparse c_j for j = 0..L-1 in the occupation basis."""
    _check_sites(L)
    dim = 1 << L
    n = np.arange(dim)
    ops = []
    for j in range(L):
        cols = n[(n >> j) & 1 == 1]
        rows = cols ^ (1 << j)
        below = cols & ((1 << j) - 1)
        signs = np.ones(cols.size)
        for k in range(j):
            signs *= 1.0 - 2.0 * ((below >> k) & 1)
        ops.append(
            sparse.csr_matrix(
                (signs.astype(complex), (rows, cols)), shape=(dim, dim)
            )
        )
    return tuple(ops)


@functools.lru_cache(maxsize=None)
def parity_operator(L):
    """Diagonal (-1)^(total occupation)."""
    _check_sites(L)
    n = np.arange(1 << L)
    vals = np.ones(1 << L)
    for k in range(L):
        vals *= 1.0 - 2.0 * ((n >> k) & 1)
    return sparse.diags(vals.astype(complex), format="csr")


def _factor_matrix(L, site, kind):
    c = _annihilators(L)[site]
    cdag = c.conj().T.tocsr()
    if kind is Kind.ANNIHILATE:
        return c
    if kind is Kind.CREATE:
        return cdag
    if kind is Kind.MAJ_EVEN:
        return (c + cdag).tocsr()
    return (1j * (c - cdag)).tocsr()


def _string_matrix(L, p: PauliString):
    if p.letters and not (0 <= p.window[0] and p.window[1] < L):
        raise ValidationError(f"string window {p.window} does not fit L={L}")
    out = sparse.csr_matrix(np.array([[p.coeff]]))
    for j in range(L):
        out = sparse.kron(PAULI_MATRICES[p.letter_at(j)], out, format="csr")
    return out


@dataclasses.dataclass(frozen=True)
class EDOperator:
    """A 2^L x 2^L sparse matrix plus the bookkeeping the oracle needs."""

    matrix: sparse.csr_matrix
    L: int
    parity: str  # "even" | "odd"
    hermitian: bool

    def __post_init__(self):
        dim = 1 << self.L
        if self.matrix.shape != (dim, dim):
            raise ValidationError(
                f"matrix shape {self.matrix.shape} does not match L={self.L}"
            )
        if self.parity not in ("even", "odd"):
            raise ValidationError(f"parity must be 'even' or 'odd', got {self.parity!r}")

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def commutator_with_parity_norm(self) -> float:
        P = parity_operator(self.L)
        return float(abs((self.matrix @ P - P @ self.matrix)).max())


@dataclasses.dataclass(frozen=True)
class EDState:
    """Ground-sector snapshot: amplitudes plus energy, gap and parity label."""

    vector: np.ndarray
    energy: float
    gap: float
    parity_sector: str  # "even" | "odd" | "mixed"
    L: int

    def __post_init__(self):
        vec = np.asarray(self.vector, dtype=complex)
        if vec.shape != (1 << self.L,):
            raise ValidationError(
                f"vector length {vec.shape} does not match L={self.L}"
            )
        if abs(np.linalg.norm(vec) - 1.0) > 1e-12:
            raise ValidationError("state vector is not normalized")
        if self.gap < 0:
            raise ValidationError("gap must be nonnegative")
        if self.parity_sector not in ("even", "odd", "mixed"):
            raise ValidationError(f"bad parity sector {self.parity_sector!r}")
        vec.setflags(write=False)
        object.__setattr__(self, "vector", vec)


def _quadratic_matrix(h: QuadraticHamiltonian):
    L = h.L
    c = _annihilators(L)
    cdag = [m.conj().T.tocsr() for m in c]
    dim = 1 << L
    H = sparse.csr_matrix((dim, dim), dtype=complex)
    A, B = h.A, h.B
    for i in range(L):
        for j in range(L):
            if A[i, j] != 0:
                H = H + A[i, j] * (cdag[i] @ c[j] - c[j] @ cdag[i])
            if B[i, j] != 0:
                H = H + B[i, j] * (cdag[i] @ cdag[j]) + np.conj(B[i, j]) * (c[j] @ c[i])
    return H.tocsr()


def ed_build(obj, L=None) -> EDOperator:
    """Assemble an EDOperator from a quadratic Hamiltonian, a fermion
    monomial, a Pauli string, or an iterable of the latter two.

    For monomial / string input the site count must be supplied.  Every
    term of a sum has to carry the same parity.
    """
    if isinstance(obj, QuadraticHamiltonian):
        if L is not None and L != obj.L:
            raise ValidationError(f"L={L} conflicts with Hamiltonian on {obj.L} sites")
        _check_sites(obj.L)
        return EDOperator(_quadratic_matrix(obj), obj.L, "even", True)

    if isinstance(obj, (FermionMonomial, PauliString)):
        obj = [obj]
    terms = list(obj)
    if L is None:
        raise ValidationError("need an explicit L for monomial or string input")
    _check_sites(L)
    if not terms:
        raise ValidationError("empty term list")

    dim = 1 << L
    H = sparse.csr_matrix((dim, dim), dtype=complex)
    parities = set()
    for t in terms:
        if isinstance(t, PauliString):
            H = H + _string_matrix(L, t)
            parities.add(t.parity)
        elif isinstance(t, FermionMonomial):
            for site, _ in t.factors:
                if not 0 <= site < L:
                    raise ValidationError(f"site {site} does not fit L={L}")
            mat = sparse.identity(dim, dtype=complex, format="csr") * t.coeff
            for site, kind in t.factors:
                mat = mat @ _factor_matrix(L, site, kind)
            H = H + mat
            parities.add(t.parity)
        else:
            raise ValidationError(f"cannot build an operator from {type(t).__name__}")
    if len(parities) > 1:
        raise ValidationError("terms mix even and odd parity")
    parity = "even" if parities.pop() == 0 else "odd"
    herm = abs((H - H.conj().T)).max() <= 1e-12 if H.nnz else True
    return EDOperator(H.tocsr(), L, parity, bool(herm))


def ed_ground(op: EDOperator) -> EDState:
    """Lowest eigenpair, gap to the next level, and the parity label.

    Dense solve through L=12, Lanczos at 13-14.  A gap below 1e-10 means
    the bottom of the spectrum is (numerically) degenerate and the returned
    vector is an arbitrary member of that space, so the sector is 'mixed'.
    """
    if not op.hermitian:
        raise ValidationError("ground state of a non-Hermitian operator")
    if op.L <= 12:
        w, V = sla.eigh(op.matrix.toarray(), subset_by_index=[0, 1])
        e0, e1 = float(w[0]), float(w[1])
        vec = V[:, 0]
    else:
        dim = op.matrix.shape[0]
        v0 = np.full(dim, 1.0 / np.sqrt(dim))
        w, V = eigsh(op.matrix, k=2, which="SA", v0=v0)
        order = np.argsort(w)
        e0, e1 = float(w[order[0]]), float(w[order[1]])
        vec = V[:, order[0]]
    vec = np.asarray(vec, dtype=complex)
    vec = vec / np.linalg.norm(vec)
    gap = max(e1 - e0, 0.0)
    if gap < DEGENERACY_ATOL:
        sector = "mixed"
    else:
        p = np.vdot(vec, parity_operator(op.L) @ vec).real
        sector = "even" if p > 0 else "odd"
    return EDState(vector=vec, energy=e0, gap=gap, parity_sector=sector, L=op.L)


def apply_monomial(state: EDState, M: FermionMonomial) -> np.ndarray:
    """M|v> as a dense vector (rightmost factor acts first)."""
    for site, _ in M.factors:
        if not 0 <= site < state.L:
            raise ValidationError(f"site {site} does not fit L={state.L}")
    w = state.vector.copy()
    for site, kind in reversed(M.factors):
        w = _factor_matrix(state.L, site, kind) @ w
    return M.coeff * w


def ed_expectation(state: EDState, M) -> complex:
    """<v|M|v> for a monomial, string, or prebuilt operator."""
    v = state.vector
    if isinstance(M, EDOperator):
        if M.L != state.L:
            raise ValidationError(f"operator on {M.L} sites, state on {state.L}")
        return complex(np.vdot(v, M.matrix @ v))
    if isinstance(M, PauliString):
        return complex(np.vdot(v, _string_matrix(state.L, M) @ v))
    if isinstance(M, FermionMonomial):
        return complex(np.vdot(v, apply_monomial(state, M)))
    raise ValidationError(f"cannot take an expectation of {type(M).__name__}")
