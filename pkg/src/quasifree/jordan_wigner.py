"""Exact finite-volume dictionary between fermion monomials and Pauli strings.

Conventions (fixed, and load-bearing for every cross-check):

    z_j = 2 c*_j c_j - 1,      x_j = S_j (c*_j + c_j),     y_j = S_j m_odd(j),

with the string S_j = prod_{w0 <= k < j} z_k anchored at the left edge ``w0``
of a declared window. Equivalently, on Majorana generators,

    m_even(j) -> z_{w0} ... z_{j-1} x_j,
    m_odd(j)  -> z_{w0} ... z_{j-1} y_j,

with coefficient exactly 1. Single-site letters satisfy x y = i z and cyclic
(in the occupation basis ordered (|0>, |1>) their matrices are
x = [[0,1],[1,0]], y = [[0,i],[-i,0]], z = diag(-1,+1)). All phases are
integer powers of i, tracked exactly — no floating-point phases anywhere.

Even monomials map to plain Pauli strings; odd monomials drag an
uncancelled z-tail down to the anchor, which is kept explicit through the
``tail`` flag rather than silently discarded. Physical evaluations only ever
use even operators or products of two odd ones, where the tails cancel
pairwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ValidationError
from .monomials import IPOW, FermionMonomial, Kind
from .quadratic import model_params

__all__ = [
    "PAULI_MATRICES",
    "PauliString",
    "JWImage",
    "jw_fermion_to_pauli",
    "jw_pauli_to_fermion",
    "pauli_model",
]

_LETTERS = "IXYZ"

# single-site matrices in the (|empty>, |occupied>) basis; z = 2n - 1
PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, 1j], [-1j, 0]], dtype=complex),
    "Z": np.array([[-1, 0], [0, 1]], dtype=complex),
}

# (a, b) -> (power of i, product letter); identity handled before lookup
_MUL = {
    ("X", "Y"): (1, "Z"), ("Y", "X"): (3, "Z"),
    ("Y", "Z"): (1, "X"), ("Z", "Y"): (3, "X"),
    ("Z", "X"): (1, "Y"), ("X", "Z"): (3, "Y"),
}


@dataclass(frozen=True)
class PauliString:
    """Scalar times a product of single-site letters on an inclusive window.

    ``letters[i]`` is the letter at site ``window[0] + i``; sites outside the
    window carry the identity. Construction trims identity padding, so equal
    operators compare equal field-by-field. The empty string (window (0, -1))
    is the scalar ``coeff``.
    """

    coeff: complex = 1 + 0j
    window: tuple = (0, -1)
    letters: str = ""

    def __post_init__(self):
        lo, hi = self.window
        if len(self.letters) != max(hi - lo + 1, 0):
            raise ValidationError(
                f"letters {self.letters!r} do not fill window {self.window}"
            )
        if any(ch not in _LETTERS for ch in self.letters):
            raise ValidationError(f"bad letters {self.letters!r}")
        # canonical form: strip identity padding
        s = self.letters.strip("I")
        if s != self.letters:
            pad = self.letters.index(s) if s else 0
            object.__setattr__(self, "letters", s)
            object.__setattr__(
                self, "window", (lo + pad, lo + pad + len(s) - 1) if s else (0, -1)
            )
        object.__setattr__(self, "coeff", complex(self.coeff))

    def letter_at(self, site: int) -> str:
        lo, hi = self.window
        return self.letters[site - lo] if lo <= site <= hi else "I"

    @property
    def support(self) -> tuple:
        lo = self.window[0]
        return tuple(lo + i for i, ch in enumerate(self.letters) if ch != "I")

    @property
    def parity(self) -> int:
        """Fermionic parity of the image: X/Y letter count mod 2."""
        return sum(1 for ch in self.letters if ch in "XY") % 2

    def __mul__(self, other):
        if not isinstance(other, PauliString):
            return PauliString(self.coeff * other, self.window, self.letters)
        if not self.letters:
            return PauliString(self.coeff * other.coeff, other.window, other.letters)
        if not other.letters:
            return PauliString(self.coeff * other.coeff, self.window, self.letters)
        lo = min(self.window[0], other.window[0])
        hi = max(self.window[1], other.window[1])
        out = []
        ipow = 0
        for s in range(lo, hi + 1):
            a, b = self.letter_at(s), other.letter_at(s)
            if a == "I":
                out.append(b)
            elif b == "I":
                out.append(a)
            elif a == b:
                out.append("I")
            else:
                k, ch = _MUL[(a, b)]
                ipow = (ipow + k) % 4
                out.append(ch)
        return PauliString(
            self.coeff * other.coeff * IPOW[ipow], (lo, hi), "".join(out)
        )

    __rmul__ = __mul__

    def render(self) -> str:
        if not self.letters:
            return f"({self.coeff}) 1"
        toks = " ".join(
            f"{ch}{self.window[0] + i}"
            for i, ch in enumerate(self.letters)
            if ch != "I"
        )
        return f"({self.coeff}) {toks}"

    def __repr__(self):
        return f"PauliString[{self.render()}]"


@dataclass(frozen=True)
class JWImage:
    """Image of a fermion monomial: a sum of Pauli strings plus a tail flag.

    ``tail`` marks odd-parity sources, whose strings keep the uncancelled
    z-run down to the window anchor; such images compose pairwise before any
    expectation is taken.
    """

    terms: tuple
    tail: bool = False

    @property
    def string(self) -> PauliString:
        if len(self.terms) != 1:
            raise ValidationError(f"image has {len(self.terms)} terms, not 1")
        return self.terms[0]


def _majorana_image(site: int, odd: bool, w0: int) -> PauliString:
    return PauliString(
        1 + 0j, (w0, site), "Z" * (site - w0) + ("Y" if odd else "X")
    )


def jw_fermion_to_pauli(m: FermionMonomial, window: tuple) -> JWImage:
    """Map a fermion monomial into Pauli strings anchored at window[0].

    Majorana factors map to single strings; creation/annihilation operators
    split as (m_even +/- i m_odd)/2, so the image is a combined sum. Like
    strings are merged with exact coefficients and zero terms dropped.
    """
    w0, w1 = window
    for site, _ in m.factors:
        if not w0 <= site <= w1:
            raise ValidationError(f"site {site} outside window {window}")
    terms = [PauliString(complex(m.coeff), (0, -1), "")]
    for site, kind in m.factors:
        if kind is Kind.MAJ_EVEN:
            terms = [t * _majorana_image(site, False, w0) for t in terms]
        elif kind is Kind.MAJ_ODD:
            terms = [t * _majorana_image(site, True, w0) for t in terms]
        else:
            sign = 1j if kind is Kind.CREATE else -1j
            e = _majorana_image(site, False, w0)
            o = _majorana_image(site, True, w0)
            terms = [
                u
                for t in terms
                for u in ((0.5 * t) * e, (0.5 * sign * t) * o)
            ]
    merged = {}
    for t in terms:
        key = (t.window, t.letters)
        merged[key] = merged.get(key, 0j) + t.coeff
    out = tuple(
        PauliString(c, w, s)
        for (w, s), c in sorted(merged.items())
        if c != 0
    )
    return JWImage(terms=out, tail=bool(m.parity))


def jw_pauli_to_fermion(p: PauliString, window: tuple = None) -> FermionMonomial:
    """Inverse dictionary on a single string.

    z_j -> -i m_even(j) m_odd(j);  x_j / y_j pick up the fermionic string
    (-i)^(j-w0) prod_{k<j} m_even(k) m_odd(k) times m_even(j) / m_odd(j).

    The anchor w0 is ``window[0]`` when a window is declared (the string must
    lie inside it), else the string's own left edge. Anchors only matter for
    odd strings; round trips are exact whenever both directions share one.
    """
    if window is not None:
        if p.letters and not (window[0] <= p.window[0] and p.window[1] <= window[1]):
            raise ValidationError(f"string {p.window} outside window {window}")
        w0 = window[0]
    else:
        w0 = p.window[0]
    out = FermionMonomial(complex(p.coeff), ())
    for i, ch in enumerate(p.letters):
        site = p.window[0] + i
        if ch == "I":
            continue
        if ch == "Z":
            facs = ((site, Kind.MAJ_EVEN), (site, Kind.MAJ_ODD))
            out = out * FermionMonomial(IPOW[3], facs)
            continue
        facs = []
        for k in range(w0, site):
            facs.append((k, Kind.MAJ_EVEN))
            facs.append((k, Kind.MAJ_ODD))
        facs.append((site, Kind.MAJ_EVEN if ch == "X" else Kind.MAJ_ODD))
        out = out * FermionMonomial(IPOW[(-(site - w0)) % 4], tuple(facs))
    return out.canonical()


def pauli_model(name, L, params=None, boundary="open"):
    """Spin-side catalog: literal local Hamiltonian terms.

    kitaev(J, lam):  - J sum x_k x_{k+1} - lam sum z_k
    xy(gamma, lam):  - sum [ (1+gamma)/2 x x + (1-gamma)/2 y y ] - lam sum z
    trivial(mu):     mu sum z_k

    On the open chain these are exactly the images of the fermion catalog
    under jw_fermion_to_pauli. Ring geometry adds the literal wrap-around
    bond (the spin model is local; it is *not* the image of the fermion
    ring, which differs by the boundary parity twist).
    """
    params = model_params(name, params)
    if name == "custom":
        raise ValidationError("custom model has no spin-side catalog entry")
    L = int(L)
    if L < 2:
        raise ValidationError("need L >= 2")
    if boundary not in ("open", "ring"):
        raise ValidationError(f"boundary must be 'open' or 'ring', got {boundary!r}")
    if boundary == "ring" and L < 3:
        raise ValidationError("ring geometry needs L >= 3")

    def bond(k, letter, coeff):
        if coeff == 0:
            return None
        kp = (k + 1) % L
        if kp:
            return PauliString(coeff, (k, k + 1), letter * 2)
        return PauliString(coeff, (0, L - 1), letter + "I" * (L - 2) + letter)

    terms = []
    n_bonds = L if boundary == "ring" else L - 1
    if name == "kitaev":
        for k in range(n_bonds):
            terms.append(bond(k, "X", -params["J"]))
        onsite = -params["lam"]
    elif name == "xy":
        for k in range(n_bonds):
            terms.append(bond(k, "X", -(1.0 + params["gamma"]) / 2.0))
            terms.append(bond(k, "Y", -(1.0 - params["gamma"]) / 2.0))
        onsite = -params["lam"]
    else:
        onsite = params["mu"]
    if onsite != 0:
        for k in range(L):
            terms.append(PauliString(onsite, (k, k), "Z"))
    return tuple(t for t in terms if t is not None)
