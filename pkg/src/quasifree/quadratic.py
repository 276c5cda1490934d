"""Quadratic fermion chains and their quasifree ground states.

Hamiltonians are stored in the particle basis as

    H = sum_ij A_ij (c*_i c_j - c_j c*_i)
      + sum_ij ( B_ij c*_i c*_j + conj(B_ij) c_j c_i ),

with ``A`` Hermitian and ``B`` antisymmetric. Equivalently, with Majorana
generators ``a_{2j} = c_j + c*_j`` and ``a_{2j+1} = i(c_j - c*_j)``,

    H = (i/4) sum_pq M_pq a_p a_q,

for a real antisymmetric ``M`` (no additive constant: the on-site term is
``A_jj (2 n_j - 1)``). Ground states are encoded by the real antisymmetric
covariance matrix ``gamma_pq = (i/2) <[a_p, a_q]>``, so that
``<a_p a_q> = delta_pq - i gamma_pq``; a covariance is pure iff
``gamma gamma^T = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    DegenerateGroundStateError,
    ValidationError,
    WindowError,
)
from .pfaffian import ANTISYMMETRY_ATOL

__all__ = [
    "QuadraticHamiltonian",
    "MajoranaCovariance",
    "GroundState",
    "SelfDualCut",
    "MODEL_NAMES",
    "model_params",
    "build_model",
    "majorana_form",
    "one_particle_spectrum",
    "ground_state",
    "covariance_to_projection",
    "transform_covariance",
    "graded_product",
    "energy_expectation",
]

HERMITICITY_ATOL = 1e-12
ORTHOGONALITY_ATOL = 1e-10
PURITY_ATOL = 1e-10
#: relative factor fixing which one-particle eigenvalues count as zero modes
ZERO_MODE_RTOL = 1e-8

MODEL_NAMES = ("kitaev", "xy", "trivial", "custom")


@dataclass(frozen=True)
class QuadraticHamiltonian:
    """Validated (A, B) pair on ``L`` sites with open or ring geometry."""

    A: np.ndarray
    B: np.ndarray
    boundary: str = "open"
    label: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        A = np.asarray(self.A, dtype=complex)
        B = np.asarray(self.B, dtype=complex)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValidationError(f"A must be square, got shape {A.shape}")
        if B.shape != A.shape:
            raise ValidationError(f"B shape {B.shape} does not match A {A.shape}")
        if A.shape[0] == 0:
            raise ValidationError("empty chain")
        if np.max(np.abs(A - A.conj().T)) > HERMITICITY_ATOL:
            raise ValidationError("A is not Hermitian")
        if np.max(np.abs(B + B.T)) > ANTISYMMETRY_ATOL:
            raise ValidationError("B is not antisymmetric")
        if self.boundary not in ("open", "ring"):
            raise ValidationError(f"boundary must be 'open' or 'ring', got {self.boundary!r}")
        object.__setattr__(self, "A", 0.5 * (A + A.conj().T))
        object.__setattr__(self, "B", 0.5 * (B - B.T))
        self.A.setflags(write=False)
        self.B.setflags(write=False)

    @property
    def L(self) -> int:
        return self.A.shape[0]


_PARAM_DEFAULTS = {
    "kitaev": {"J": 1.0, "lam": 0.0},
    "xy": {"gamma": 1.0, "lam": 0.0},
    "trivial": {"mu": 1.0},
    "custom": {},
}


def model_params(name: str, params=None) -> dict:
    """Validate catalog parameters and fill in defaults."""
    if name not in MODEL_NAMES:
        raise ValidationError(f"unknown model {name!r}; expected one of {MODEL_NAMES}")
    params = dict(params or {})
    allowed = set(_PARAM_DEFAULTS[name]) | ({"A", "B"} if name == "custom" else set())
    extra = set(params) - allowed
    if extra:
        raise ValidationError(f"unknown parameter(s) {sorted(extra)} for model {name!r}")
    full = dict(_PARAM_DEFAULTS[name])
    full.update(params)
    return full


def _catalog_couplings(name: str, params: dict):
    """Per-bond (hopping, pairing) and on-site strength for a catalog model."""
    if name == "kitaev":
        return params["J"] / 2.0, params["J"] / 2.0, -params["lam"]
    if name == "xy":
        return 0.5, params["gamma"] / 2.0, -params["lam"]
    return 0.0, 0.0, params["mu"]


def build_model(name, L, params=None, boundary="open"):
    """Build a catalog Hamiltonian.

    kitaev(J, lam):
        sum_k J (c*_k - c_k)(c*_{k+1} + c_{k+1}) - lam sum_k (2 n_k - 1)
    xy(gamma, lam):
        hopping 1/2 and pairing gamma/2 per bond, on-site -lam; at
        gamma = 1 identical to kitaev with J = 1
    trivial(mu):
        mu sum_k (2 n_k - 1); product ground state, gap 2 mu
    custom(A, B):
        explicit matrices, validated

    Ring geometry adds the wrap-around bond and requires L >= 3.
    """
    params = model_params(name, params)
    L = int(L)
    if L < 1:
        raise ValidationError("L must be positive")
    if boundary == "ring" and L < 3:
        raise ValidationError("ring geometry needs L >= 3")

    if name == "custom":
        if "A" not in params or "B" not in params:
            raise ValidationError("custom model needs explicit A and B")
        A = np.asarray(params["A"], dtype=complex)
        B = np.asarray(params["B"], dtype=complex)
        if A.shape != (L, L):
            raise ValidationError(f"custom A has shape {A.shape}, expected {(L, L)}")
        return QuadraticHamiltonian(A, B, boundary=boundary, label="custom", params={})

    hop, pair, onsite = _catalog_couplings(name, params)
    A = np.zeros((L, L), dtype=complex)
    B = np.zeros((L, L), dtype=complex)
    np.fill_diagonal(A, onsite)
    bonds = range(L if boundary == "ring" else L - 1)
    for k in bonds:
        kp = (k + 1) % L
        A[k, kp] += hop
        A[kp, k] += hop
        B[k, kp] += pair
        B[kp, k] -= pair
    return QuadraticHamiltonian(A, B, boundary=boundary, label=name, params=params)


def majorana_form(h: QuadraticHamiltonian) -> np.ndarray:
    """Real antisymmetric M with H = (i/4) sum M_pq a_p a_q.

    Blocks, with Ar/Ai (Br/Bi) the real/imaginary parts of A (B):
    even-even 2(Ai + Bi), even-odd 2(Br - Ar), odd-even 2(Ar + Br),
    odd-odd 2(Ai - Bi); the result is symmetrized exactly.
    """
    ar, ai = h.A.real, h.A.imag
    br, bi = h.B.real, h.B.imag
    L = h.L
    m = np.zeros((2 * L, 2 * L))
    m[0::2, 0::2] = 2.0 * (ai + bi)
    m[0::2, 1::2] = 2.0 * (br - ar)
    m[1::2, 0::2] = 2.0 * (ar + br)
    m[1::2, 1::2] = 2.0 * (ai - bi)
    return 0.5 * (m - m.T)


def one_particle_spectrum(h: QuadraticHamiltonian) -> np.ndarray:
    """Ascending eigenvalues of X = i M / 2; come in +/- pairs."""
    x = 0.5j * majorana_form(h)
    return np.linalg.eigvalsh(x)


@dataclass(frozen=True)
class MajoranaCovariance:
    """Real antisymmetric covariance with a site-coordinate offset.

    ``site_offset`` is the chain coordinate of array site 0, so chain site
    ``s`` occupies Majorana rows ``2 (s - site_offset)`` and
    ``2 (s - site_offset) + 1``. Validation enforces antisymmetry and the
    positivity bound (singular values <= 1); purity is a property, not a
    requirement, since restrictions of pure states are mixed.
    """

    gamma: np.ndarray
    site_offset: int = 0

    def __post_init__(self):
        g = np.asarray(self.gamma)
        if np.iscomplexobj(g):
            if np.max(np.abs(g.imag)) > ANTISYMMETRY_ATOL:
                raise ValidationError("covariance must be real")
            g = g.real
        g = np.array(g, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] % 2:
            raise ValidationError(f"covariance must be square of even dimension, got {g.shape}")
        if np.max(np.abs(g + g.T), initial=0.0) > ANTISYMMETRY_ATOL:
            raise ValidationError("covariance is not antisymmetric")
        g = 0.5 * (g - g.T)
        if g.size:
            top = np.linalg.norm(g, 2)
            if top > 1.0 + PURITY_ATOL:
                raise ValidationError(f"covariance violates |gamma| <= 1 (norm {top:.3e})")
        g.setflags(write=False)
        object.__setattr__(self, "gamma", g)

    @property
    def L(self) -> int:
        return self.gamma.shape[0] // 2

    @property
    def is_pure(self) -> bool:
        gg = self.gamma @ self.gamma.T
        return bool(np.max(np.abs(gg - np.eye(gg.shape[0]))) <= PURITY_ATOL)

    def site_range(self):
        return self.site_offset, self.site_offset + self.L

    def majorana_index(self, site: int, odd: int) -> int:
        lo, hi = self.site_range()
        if not lo <= site < hi:
            raise WindowError(f"site {site} outside covered range [{lo}, {hi})")
        return 2 * (site - self.site_offset) + (1 if odd else 0)

    def window(self, lo: int, hi: int) -> "MajoranaCovariance":
        """Restriction to chain sites lo..hi-1 (a mixed state in general)."""
        if hi <= lo:
            raise WindowError(f"empty window [{lo}, {hi})")
        a = self.majorana_index(lo, 0)
        b = self.majorana_index(hi - 1, 1) + 1
        return MajoranaCovariance(self.gamma[a:b, a:b], site_offset=lo)


@dataclass(frozen=True)
class GroundState:
    covariance: MajoranaCovariance
    energy: float
    gap: float
    epsilons: np.ndarray
    edge_pair_filled: bool = False


def _edge_pair_form(null_vecs: np.ndarray) -> np.ndarray:
    """Deterministic rank-2 antisymmetric form filling a 2d real null plane.

    The plane is recovered from the complex eigenvectors' real and imaginary
    parts; the two dominant left singular vectors give an orthonormal real
    basis (u, w). ``u w^T - w u^T`` is independent of that basis up to
    overall sign, which is fixed by making the first entry of largest
    magnitude (row-major order) positive.
    """
    stack = np.column_stack([null_vecs.real, null_vecs.imag])
    u_mat, svals, _ = np.linalg.svd(stack, full_matrices=False)
    if (svals > 0.5).sum() != 2:
        raise DegenerateGroundStateError(
            "null space is not a two-dimensional real plane",
            eigenvalues=svals,
        )
    u, w = u_mat[:, 0], u_mat[:, 1]
    f = np.outer(u, w) - np.outer(w, u)
    peak = np.max(np.abs(f))
    flat = np.argmax(np.abs(f) >= peak * (1.0 - 1e-9))
    if f.flat[flat] < 0:
        f = -f
    return f


def ground_state(
    h: QuadraticHamiltonian,
    *,
    site_offset: int = 0,
    zero_mode_rtol: float = ZERO_MODE_RTOL,
) -> GroundState:
    """Diagonalize and fill all negative one-particle modes.

    The covariance is ``gamma = 2 Im P`` with ``P`` the spectral projection
    of ``X = i M / 2`` onto negative eigenvalues — exactly real and
    antisymmetric because ``conj(X) = -X``.

    Zero modes (|eps| below ``zero_mode_rtol`` times the spectral radius)
    make the ground state degenerate. The one case with a canonical
    resolution is an open chain carrying exactly one zero pair — the
    topological edge doublet, whose exact splitting underflows long before
    the bulk correlations care. That pair is filled deterministically (see
    ``_edge_pair_form``) and flagged ``edge_pair_filled``. Everything else
    raises DegenerateGroundStateError.
    """
    m = majorana_form(h)
    x = 0.5j * m
    eps, vecs = np.linalg.eigh(x)
    scale = float(np.max(np.abs(eps)))
    if scale == 0.0:
        raise DegenerateGroundStateError(
            "Hamiltonian is identically zero", eigenvalues=eps
        )
    tol = zero_mode_rtol * scale
    zero = np.abs(eps) < tol
    n_zero = int(zero.sum())

    neg = eps < -tol if n_zero else eps < 0.0
    p = vecs[:, neg] @ vecs[:, neg].conj().T
    gamma = 2.0 * p.imag
    edge_filled = False
    if n_zero == 2 and h.boundary == "open":
        gamma = gamma + _edge_pair_form(vecs[:, zero])
        edge_filled = True
    elif n_zero:
        raise DegenerateGroundStateError(
            f"{n_zero} one-particle zero mode(s) on a {h.boundary} chain; "
            "ground state is degenerate",
            eigenvalues=eps[zero],
        )

    cov = MajoranaCovariance(gamma, site_offset=site_offset)
    if not cov.is_pure:
        raise ValidationError("constructed ground covariance failed the purity check")
    energy = float(np.sum(eps[eps < 0.0]))
    gap = 2.0 * float(np.min(np.abs(eps)))
    return GroundState(
        covariance=cov,
        energy=energy,
        gap=gap,
        epsilons=eps,
        edge_pair_filled=edge_filled,
    )


def covariance_to_projection(cov: MajoranaCovariance) -> np.ndarray:
    """Basis projection E = (1 + i gamma)/2 of a pure covariance.

    Hermitian with E^2 = E, and conj(E) = 1 - E holds exactly since gamma
    is real.
    """
    if not cov.is_pure:
        raise ValidationError("projection form requires a pure covariance")
    n = cov.gamma.shape[0]
    return 0.5 * (np.eye(n) + 1j * cov.gamma)


def transform_covariance(cov: MajoranaCovariance, o: np.ndarray) -> MajoranaCovariance:
    """Apply a real orthogonal one-particle (Bogoliubov) rotation O: gamma -> O gamma O^T."""
    o = np.asarray(o, dtype=float)
    n = cov.gamma.shape[0]
    if o.shape != (n, n):
        raise ValidationError(f"rotation shape {o.shape} does not match covariance {n}")
    if np.max(np.abs(o.T @ o - np.eye(n))) > ORTHOGONALITY_ATOL:
        raise ValidationError("rotation is not orthogonal")
    return MajoranaCovariance(o @ cov.gamma @ o.T, site_offset=cov.site_offset)


def graded_product(left: MajoranaCovariance, right: MajoranaCovariance) -> MajoranaCovariance:
    """Graded (block-diagonal) product state of two adjacent covariances.

    The joined covariance has zero cross blocks; on even observables it
    factorizes into the two restrictions.
    """
    if right.site_offset != left.site_offset + left.L:
        raise ValidationError(
            f"blocks are not adjacent: left covers {left.site_range()}, "
            f"right starts at {right.site_offset}"
        )
    nl, nr = left.gamma.shape[0], right.gamma.shape[0]
    g = np.zeros((nl + nr, nl + nr))
    g[:nl, :nl] = left.gamma
    g[nl:, nl:] = right.gamma
    return MajoranaCovariance(g, site_offset=left.site_offset)


@dataclass(frozen=True)
class SelfDualCut:
    """Left/right split of the chain at a coordinate: left is sites < cut."""

    cut: int = 0

    def theta_signs(self, cov: MajoranaCovariance) -> np.ndarray:
        """Diagonal of the reflection theta: +1 on left Majoranas, -1 on right."""
        lo, hi = cov.site_range()
        if not lo < self.cut < hi:
            raise WindowError(
                f"cut {self.cut} does not split covered range [{lo}, {hi})"
            )
        signs = np.ones(2 * cov.L)
        signs[2 * (self.cut - lo):] = -1.0
        return signs


def energy_expectation(h: QuadraticHamiltonian, cov: MajoranaCovariance) -> float:
    """<H> in the quasifree state: (1/4) sum_pq M_pq gamma_pq = -(1/4) tr(M gamma)."""
    m = majorana_form(h)
    if cov.gamma.shape != m.shape:
        raise ValidationError("covariance size does not match Hamiltonian")
    return float(0.25 * np.tensordot(m, cov.gamma, axes=2))
