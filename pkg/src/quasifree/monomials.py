"""Symbolic fermion monomials over a chain of sites.

A monomial is a complex coefficient times an ordered word of single-site
generators: creation/annihilation operators or the two self-adjoint
(Majorana) combinations per site,

    m_even(j) = c_j + c*_j          m_odd(j) = i (c_j - c*_j),

which square to one and anticommute across distinct indices. Sites may be
negative; chain-coordinate conventions live with the covariance objects, not
here. All sign and phase bookkeeping is exact: reordering tracks an integer
parity and the unit phases (+1, +i, -1, -i) are exact complex literals.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

from .exceptions import ValidationError

__all__ = [
    "Kind",
    "FermionMonomial",
    "create",
    "annihilate",
    "maj_even",
    "maj_odd",
    "number_pm",
    "parity_string",
    "canonical_majorana_word",
    "expand_majorana",
]

# exact unit phases i**k
IPOW = ((1 + 0j), (0 + 1j), (-1 + 0j), (0 - 1j))


class Kind(enum.Enum):
    CREATE = "c+"
    ANNIHILATE = "c-"
    MAJ_EVEN = "me"
    MAJ_ODD = "mo"


_MAJ = (Kind.MAJ_EVEN, Kind.MAJ_ODD)


@dataclass(frozen=True)
class FermionMonomial:
    """coefficient times an ordered product of single-site generators."""

    coeff: complex = 1 + 0j
    factors: tuple = ()

    def __post_init__(self):
        for f in self.factors:
            if (
                not isinstance(f, tuple)
                or len(f) != 2
                or not isinstance(f[0], int)
                or not isinstance(f[1], Kind)
            ):
                raise ValidationError(f"bad factor {f!r}; expected (site, Kind)")

    @property
    def parity(self) -> int:
        """0 for even words, 1 for odd; every single generator is odd."""
        return len(self.factors) % 2

    @property
    def sites(self) -> tuple:
        return tuple(sorted({s for s, _ in self.factors}))

    def is_zero(self) -> bool:
        return self.coeff == 0

    def __mul__(self, other):
        if isinstance(other, FermionMonomial):
            return FermionMonomial(self.coeff * other.coeff, self.factors + other.factors)
        return FermionMonomial(self.coeff * other, self.factors)

    __rmul__ = __mul__

    def shifted(self, d: int) -> "FermionMonomial":
        """Translate every factor by ``d`` sites."""
        return FermionMonomial(self.coeff, tuple((s + d, k) for s, k in self.factors))

    def adjoint(self) -> "FermionMonomial":
        swap = {
            Kind.CREATE: Kind.ANNIHILATE,
            Kind.ANNIHILATE: Kind.CREATE,
            Kind.MAJ_EVEN: Kind.MAJ_EVEN,
            Kind.MAJ_ODD: Kind.MAJ_ODD,
        }
        return FermionMonomial(
            complex(self.coeff).conjugate(),
            tuple((s, swap[k]) for s, k in reversed(self.factors)),
        )

    def canonical(self) -> "FermionMonomial":
        """Stable canonical form: factors sorted by site with exact signs.

        Cross-site generators anticommute, so site-sorting multiplies the
        coefficient by the parity of the strict site inversions. Within one
        site, pure Majorana runs are ordered even-before-odd (again a tracked
        sign) and repeated Majorana factors cancel in pairs (a^2 = 1);
        adjacent repeated creation or annihilation operators annihilate the
        whole monomial. Runs mixing c/c* with Majorana factors at one site
        keep their relative input order, since those generators do not simply
        anticommute.
        """
        if self.coeff == 0:
            return FermionMonomial(0j, ())
        factors = list(self.factors)
        sign = 1

        def sortable(a, b):
            # may a and b be compared/swapped when adjacent?
            if a[0] != b[0]:
                return True
            return a[1] in _MAJ and b[1] in _MAJ

        def less(a, b):
            if a[0] != b[0]:
                return a[0] < b[0]
            return a[1] == Kind.MAJ_EVEN and b[1] == Kind.MAJ_ODD

        # insertion sort; each adjacent swap of distinct generators flips sign
        for i in range(1, len(factors)):
            j = i
            while j > 0 and sortable(factors[j - 1], factors[j]) and less(factors[j], factors[j - 1]):
                factors[j - 1], factors[j] = factors[j], factors[j - 1]
                sign = -sign
                j -= 1

        # cancellations on adjacent equal factors
        changed = True
        while changed:
            changed = False
            for i in range(len(factors) - 1):
                if factors[i] == factors[i + 1]:
                    if factors[i][1] in _MAJ:
                        del factors[i: i + 2]
                        changed = True
                        break
                    return FermionMonomial(0j, ())
        return FermionMonomial(complex(self.coeff) * sign, tuple(factors))

    def render(self) -> str:
        """Stable plain-text form, e.g. ``(1+0j) c+0 c-0``."""
        toks = " ".join(f"{k.value}{s}" for s, k in self.factors)
        return f"({complex(self.coeff)}) {toks}".rstrip()

    def __repr__(self):
        return f"FermionMonomial[{self.render()}]"


def create(site: int) -> FermionMonomial:
    return FermionMonomial(1 + 0j, ((site, Kind.CREATE),))


def annihilate(site: int) -> FermionMonomial:
    return FermionMonomial(1 + 0j, ((site, Kind.ANNIHILATE),))


def maj_even(site: int) -> FermionMonomial:
    return FermionMonomial(1 + 0j, ((site, Kind.MAJ_EVEN),))


def maj_odd(site: int) -> FermionMonomial:
    return FermionMonomial(1 + 0j, ((site, Kind.MAJ_ODD),))


def number_pm(site: int) -> FermionMonomial:
    """The on-site parity 2 c*_j c_j - 1 = -i m_even(j) m_odd(j)."""
    return FermionMonomial(
        IPOW[3], ((site, Kind.MAJ_EVEN), (site, Kind.MAJ_ODD))
    )


def parity_string(lo: int, hi: int) -> FermionMonomial:
    """Product of on-site parities over sites lo..hi inclusive.

    Empty when hi < lo. The coefficient is the exact phase (-i)^(hi-lo+1).
    """
    if hi < lo:
        return FermionMonomial(1 + 0j, ())
    n = hi - lo + 1
    facs = []
    for j in range(lo, hi + 1):
        facs.append((j, Kind.MAJ_EVEN))
        facs.append((j, Kind.MAJ_ODD))
    return FermionMonomial(IPOW[(-n) % 4], tuple(facs))


def canonical_majorana_word(word: Sequence[int]):
    """Sort a word of Majorana indices, cancelling repeats.

    Returns ``(sign, tuple)`` with ``sign`` in {+1, -1} such that the input
    product equals ``sign`` times the product over the returned strictly
    increasing tuple. Equal indices cancel in pairs (each generator squares
    to one); the sign is the parity of strict inversions, which is exact.
    """
    w = list(word)
    sign = 1
    # insertion sort counting strict inversions; stable on equals
    for i in range(1, len(w)):
        j = i
        while j > 0 and w[j] < w[j - 1]:
            w[j], w[j - 1] = w[j - 1], w[j]
            sign = -sign
            j -= 1
    out = []
    for p in w:
        if out and out[-1] == p:
            out.pop()
        else:
            out.append(p)
    return sign, tuple(out)


def expand_majorana(m: FermionMonomial):
    """Expand a monomial into the Majorana basis.

    Every creation/annihilation factor splits as
    ``c*_j = (m_even + i m_odd)/2`` and ``c_j = (m_even - i m_odd)/2``,
    so a monomial becomes a sum of Majorana words. Words are canonicalized
    (strictly increasing Majorana indices ``2*site + b``) and like terms are
    combined; exact zero coefficients are dropped.

    Returns a list of ``(coeff, word)`` pairs with ``word`` a tuple of
    strictly increasing integers.
    """
    terms = [(complex(m.coeff), [])]
    for site, kind in m.factors:
        e, o = 2 * site, 2 * site + 1
        if kind is Kind.MAJ_EVEN:
            terms = [(c, w + [e]) for c, w in terms]
        elif kind is Kind.MAJ_ODD:
            terms = [(c, w + [o]) for c, w in terms]
        elif kind is Kind.CREATE:
            terms = [t for c, w in terms for t in ((0.5 * c, w + [e]), (0.5j * c, w + [o]))]
        else:
            terms = [t for c, w in terms for t in ((0.5 * c, w + [e]), (-0.5j * c, w + [o]))]

    combined: dict = {}
    for c, w in terms:
        sign, tup = canonical_majorana_word(w)
        combined[tup] = combined.get(tup, 0j) + sign * c
    return [(c, w) for w, c in combined.items() if c != 0]
