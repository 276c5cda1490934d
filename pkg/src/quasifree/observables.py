"""Wick calculus, string order, the Z2 index, and split diagnostics.

Everything here evaluates against a Majorana covariance gamma in chain
coordinates (see MajoranaCovariance): <a_p a_q> = delta_pq - i gamma_pq.
Expectations of monomials reduce to Pfaffians of submatrices of gamma; the
Z2 index, its cross-estimators, and the Hilbert-Schmidt split defect are
all built out of that single primitive plus the one-particle data.
"""

from __future__ import annotations

import dataclasses
from typing import Optional, Sequence

import numpy as np

from .ed import EDOperator, EDState, apply_monomial, ed_build
from .exceptions import (
    DegenerateGroundStateError,
    SplitNotConvergedError,
    ValidationError,
    WindowError,
)
from .monomials import (
    IPOW,
    FermionMonomial,
    Kind,
    expand_majorana,
    maj_even,
    maj_odd,
    parity_string,
)
from .pfaffian import pfaffian
from .quadratic import (
    MajoranaCovariance,
    QuadraticHamiltonian,
    SelfDualCut,
)

__all__ = [
    "WEDGE_TOL",
    "STRING_ETA",
    "STRING_TAIL_TOL",
    "SPLIT_CONV_TOL",
    "StringCorrelatorSpec",
    "StringOrderVerdict",
    "SplitDefectSeries",
    "Z2IndexResult",
    "wick_expectation",
    "default_string_pair",
    "string_correlator",
    "detect_string_order",
    "split_defect",
    "bloch_invariant",
    "z2_index",
    "gap_inequality_check",
    "random_local_probes",
    "random_one_sided_rotation",
]

#: eigenvalues of E(1 - theta E theta)E above 1 - WEDGE_TOL count as wedge
#: dimensions; gapped spectra cluster exponentially near {0, 1}
WEDGE_TOL = 1e-6
#: detection floor for the string-order tail mean
STRING_ETA = 1e-3
#: maximum relative spread of the tail before it counts as stabilized
STRING_TAIL_TOL = 0.05
#: split-defect increments below this are "converged"
SPLIT_CONV_TOL = 1e-6


# ---------------------------------------------------------------------------
# Wick calculus


def wick_expectation(cov: MajoranaCovariance, m: FermionMonomial) -> complex:
    """Quasi-free expectation of a fermion monomial.

    The monomial is expanded into Majorana words; each even word of 2m
    distinct generators contributes its coefficient times
    (-i)^m Pf(gamma restricted to the word), since <a_p a_q> = -i gamma_pq
    off the diagonal. Odd words vanish identically (Theta-invariance), so
    they are skipped rather than computed.
    """
    lo, hi = cov.site_range()
    base = 2 * cov.site_offset
    total = 0j
    for coeff, word in expand_majorana(m):
        if len(word) % 2:
            continue
        if not word:
            total += coeff
            continue
        idx = [p - base for p in word]
        if idx[0] < 0 or idx[-1] >= 2 * cov.L:
            raise WindowError(
                f"monomial touches majorana index outside sites [{lo}, {hi})"
            )
        half = len(word) // 2
        sub = cov.gamma[np.ix_(idx, idx)]
        total += coeff * IPOW[(-half) % 4] * pfaffian(sub)
    return complex(total)


# ---------------------------------------------------------------------------
# String order


@dataclasses.dataclass(frozen=True)
class StringCorrelatorSpec:
    """End operators and half-lengths for a string correlator.

    ``q1`` lives strictly left of the string (sites < 0); ``q2`` is given
    relative to the string end (sites >= 0) and is translated right by 2k
    for each half-length k. Both must be odd so the full product is even.
    """

    q1: FermionMonomial
    q2: FermionMonomial
    k_values: tuple

    def __post_init__(self):
        for name, q in (("q1", self.q1), ("q2", self.q2)):
            if q.parity != 1:
                raise ValidationError(f"{name} must have odd parity")
        if any(s >= 0 for s in self.q1.sites):
            raise ValidationError("q1 must be supported on sites < 0")
        if any(s < 0 for s in self.q2.sites):
            raise ValidationError("q2 must be supported on sites >= 0 (string-end coordinates)")
        ks = tuple(int(k) for k in self.k_values)
        if not ks:
            raise ValidationError("need at least one half-length k")
        if any(k < 0 for k in ks) or list(ks) != sorted(set(ks)):
            raise ValidationError("k_values must be nonnegative and strictly increasing")
        object.__setattr__(self, "k_values", ks)


def default_string_pair():
    """The x-type end pair: q1 = -i m_odd(-1), q2 = m_even(0).

    Together with the parity string these assemble the two-point x-basis
    correlator across the string; on the pairing chain at zero field its
    value is exactly 1 for every k.
    """
    return FermionMonomial(-1j, ((-1, Kind.MAJ_ODD),)), maj_even(0)


def string_correlator(
    cov: MajoranaCovariance,
    spec: StringCorrelatorSpec,
    *,
    anchor: int = 0,
) -> list:
    """Evaluate <q1 . S[anchor, anchor+2k-1] . q2 shifted to the end> per k.

    One Pfaffian per k. The shifted q2 must stay at least 10 sites clear of
    the right edge. Values are returned as real floats; the assembled
    product is even and the states here are Theta-invariant, so a
    significant imaginary part is an input error and raises.
    """
    lo, hi = cov.site_range()
    q2_reach = max(spec.q2.sites, default=0)
    out = []
    for k in spec.k_values:
        end = anchor + 2 * k
        if hi - 1 - (end + q2_reach) < 10:
            raise WindowError(
                f"k={k}: string end {end + q2_reach} within 10 sites of the right edge {hi - 1}"
            )
        m = (
            spec.q1.shifted(anchor)
            * parity_string(anchor, anchor + 2 * k - 1)
            * spec.q2.shifted(end)
        )
        v = wick_expectation(cov, m)
        if abs(v.imag) > 1e-8 * max(1.0, abs(v.real)):
            raise ValidationError(
                f"string correlator at k={k} is not real ({v}); "
                "end operators are not a self-dual pair"
            )
        out.append((k, float(v.real)))
    return out


@dataclasses.dataclass(frozen=True)
class StringOrderVerdict:
    detected: bool
    estimate: float
    period_hint: int  # 1, or 2 when only the even-k subsequence stabilizes

    def __iter__(self):  # unpack like a tuple
        return iter((self.detected, self.estimate, self.period_hint))


def detect_string_order(
    series: Sequence,
    *,
    eta: float = STRING_ETA,
    tail_tol: float = STRING_TAIL_TOL,
) -> StringOrderVerdict:
    """Tail test on a (k, value) series.

    Detected when the last 10 values have |mean| > eta and relative spread
    (max - min) / |mean| below tail_tol; if the full tail fails, the even-k
    subsequence gets the same test (period_hint 2 when that is what
    stabilizes — the state may only be invariant under the doubled shift).
    """
    pairs = sorted((int(k), float(v)) for k, v in series)
    if len(pairs) < 20:
        raise ValidationError(f"need at least 20 points, got {len(pairs)}")

    def tail_test(vals):
        t = np.asarray(vals[-10:], dtype=float)
        mean = float(t.mean())
        if abs(mean) <= eta:
            return False, mean
        spread = float(t.max() - t.min()) / abs(mean)
        return spread < tail_tol, mean

    values = [v for _, v in pairs]
    ok, mean = tail_test(values)
    if ok:
        return StringOrderVerdict(True, mean, 1)
    evens = [v for k, v in pairs if k % 2 == 0]
    if len(evens) >= 10:
        ok2, mean2 = tail_test(evens)
        if ok2:
            return StringOrderVerdict(True, mean2, 2)
    return StringOrderVerdict(False, mean, 1)


# ---------------------------------------------------------------------------
# Split defect


@dataclasses.dataclass(frozen=True)
class SplitDefectSeries:
    windows: tuple
    hs_norms: tuple
    verdict: str  # "converged" | "diverging" | "inconclusive"

    def __post_init__(self):
        if any(n < 0 for n in self.hs_norms):
            raise ValidationError("Hilbert-Schmidt norms must be nonnegative")
        if any(
            b - a < -1e-12
            for a, b in zip(self.hs_norms, self.hs_norms[1:])
        ):
            raise ValidationError("norms must be non-decreasing in the window")
        if self.verdict not in ("converged", "diverging", "inconclusive"):
            raise ValidationError(f"bad verdict {self.verdict!r}")


def _as_covariance(state) -> MajoranaCovariance:
    if isinstance(state, MajoranaCovariance):
        return state
    # complex basis projection E: gamma = 2 Im E
    e = np.asarray(state)
    return MajoranaCovariance(2.0 * e.imag)


def split_defect(
    state,
    cut: SelfDualCut,
    windows: Sequence[int],
    *,
    conv_tol: float = SPLIT_CONV_TOL,
) -> SplitDefectSeries:
    """Windowed Hilbert-Schmidt norm of (theta E theta - E) across a cut.

    ``state`` is a covariance or a complex basis projection. The defect
    restricted to the 2w sites around the cut has squared Frobenius norm
    2 ||gamma_LR(w)||_F^2 (only the cross blocks survive), computed here
    per window half-width w. Windows must stay 20 sites inside the
    truncation on both sides.

    Verdict: "converged" when the last three increments are below
    ``conv_tol``; "diverging" when the last five increments are monotone
    non-decreasing; otherwise "inconclusive". These classify a limit
    statement on finite data, so near-critical inputs land in
    "inconclusive" by design.
    """
    cov = _as_covariance(state)
    lo, hi = cov.site_range()
    ws = [int(w) for w in windows]
    if not ws or any(w <= 0 for w in ws) or ws != sorted(set(ws)):
        raise ValidationError("windows must be positive and strictly increasing")
    wmax = ws[-1]
    if cut.cut - wmax < lo + 20 or cut.cut + wmax > hi - 20:
        raise WindowError(
            f"window {wmax} leaves less than a 20-site margin around cut {cut.cut} "
            f"in [{lo}, {hi})"
        )
    c = 2 * (cut.cut - lo)
    norms = []
    for w in ws:
        block = cov.gamma[c - 2 * w : c, c : c + 2 * w]
        norms.append(float(np.sqrt(2.0) * np.linalg.norm(block)))

    inc = np.diff(norms)
    verdict = "inconclusive"
    if len(inc) >= 3 and np.all(inc[-3:] < conv_tol):
        verdict = "converged"
    elif len(inc) >= 5 and np.all(np.diff(inc[-5:]) >= 0):
        verdict = "diverging"
    return SplitDefectSeries(tuple(ws), tuple(norms), verdict)


# ---------------------------------------------------------------------------
# The Z2 index and its estimators


@dataclasses.dataclass(frozen=True)
class Z2IndexResult:
    index: int
    dim_wedge: int
    estimator_values: dict
    agreement: bool
    diagnostics: tuple = ()  # wedge eigenvalues caught between 0.1 and 0.9

    def __post_init__(self):
        if self.index not in (1, -1):
            raise ValidationError("index must be +1 or -1")
        if self.dim_wedge < 0:
            raise ValidationError("dim_wedge must be nonnegative")
        if self.agreement and any(
            v != self.index for v in self.estimator_values.values()
        ):
            raise ValidationError("agreement=True with estimators differing from the index")


def _wedge_spectrum(cov: MajoranaCovariance, cut: SelfDualCut, half_width: int):
    lo, hi = cov.site_range()
    c = 2 * (cut.cut - lo)
    a, b = c - 2 * half_width, c + 2 * half_width
    g = cov.gamma[a:b, a:b]
    n = g.shape[0]
    e = 0.5 * (np.eye(n) + 1j * g)
    signs = np.ones(n)
    signs[n // 2 :] = -1.0
    tet = signs[:, None] * e * signs[None, :]
    w = e @ (np.eye(n) - tet) @ e
    return np.linalg.eigvalsh(w)


def bloch_invariant(h: QuadraticHamiltonian, *, atol: float = 1e-12) -> int:
    """Momentum-space Pfaffian sign for a translation-invariant ring.

    Requires an even number of sites (so q = pi is on the grid) and
    circulant couplings. The 2x2 Majorana Bloch block at q = 0 and q = pi
    is real antisymmetric; the index is the sign of the product of the two
    Pfaffians, and a vanishing product (a critical ring) is refused.
    """
    if h.boundary != "ring":
        raise ValidationError("Bloch estimator needs a ring")
    L = h.L
    if L % 2:
        raise ValidationError("Bloch estimator needs even L (q = pi on the grid)")
    a_row, b_row = h.A[0], h.B[0]
    for i in range(L):
        if np.max(np.abs(h.A[i] - np.roll(a_row, i))) > atol or np.max(
            np.abs(h.B[i] - np.roll(b_row, i))
        ) > atol:
            raise ValidationError("couplings are not circulant")

    def block(d):
        ar, ai = a_row[d].real, a_row[d].imag
        br, bi = b_row[d].real, b_row[d].imag
        return np.array(
            [[2 * (ai + bi), 2 * (br - ar)], [2 * (ar + br), 2 * (ai - bi)]]
        )

    pf = []
    for q in (0.0, np.pi):
        m = sum(block(d) * np.exp(-1j * q * d) for d in range(L))
        if np.max(np.abs(m.imag)) > 1e-9 or abs(m[0, 1] + m[1, 0]) > 1e-9:
            raise ValidationError("Bloch block is not real antisymmetric")
        pf.append(m[0, 1].real)
    prod = pf[0] * pf[1]
    if abs(prod) < 1e-12:
        raise ValidationError("Bloch Pfaffian product vanishes (critical ring)")
    return -1 if prod < 0 else 1


def _default_split_windows(side: int):
    wmax = side - 20
    ws = sorted({max(2, round(wmax * f)) for f in np.linspace(0.2, 1.0, 8)})
    return [w for w in ws if w <= wmax]


def z2_index(
    cov: MajoranaCovariance,
    cut: SelfDualCut,
    h_ring: Optional[QuadraticHamiltonian] = None,
    *,
    split_windows: Optional[Sequence[int]] = None,
    wedge_tol: float = WEDGE_TOL,
    conv_tol: float = SPLIT_CONV_TOL,
) -> Z2IndexResult:
    """Z2 classification of a pure quasi-free state across a cut.

    The index is defined through the wedge estimator: the count of unit
    eigenvalues of E(1 - theta E theta)E on a window around the cut, even
    count -> +1, odd -> -1. It is only meaningful when the state actually
    splits, so a windowed split-defect sweep gates the computation and a
    non-converged verdict raises SplitNotConvergedError.

    Cross-checks, reported in ``estimator_values``: the Bloch-Pfaffian sign
    when a translation-invariant ring twin is supplied, and the string-order
    detection flag (order present -> -1) when the geometry leaves room for a
    20-point series. ``agreement`` says whether every available estimator
    matched.
    """
    if not cov.is_pure:
        raise ValidationError("the index needs a pure covariance")
    lo, hi = cov.site_range()
    side = min(cut.cut - lo, hi - cut.cut)
    cut.theta_signs(cov)  # validates that the cut splits the range

    windows = (
        list(split_windows) if split_windows is not None else _default_split_windows(side)
    )
    if len(windows) < 4:
        raise WindowError(
            f"range [{lo}, {hi}) leaves no room for a split sweep around {cut.cut}"
        )
    series = split_defect(cov, cut, windows, conv_tol=conv_tol)
    if series.verdict != "converged":
        raise SplitNotConvergedError(
            f"split defect verdict is {series.verdict!r}; index undefined",
            series=series,
        )

    half_width = min(side - 10, 150)
    evals = _wedge_spectrum(cov, cut, half_width)
    dim_wedge = int(np.sum(evals > 1.0 - wedge_tol))
    diagnostics = tuple(float(v) for v in evals if 0.1 < v < 0.9)
    index = 1 if dim_wedge % 2 == 0 else -1
    estimators = {"wedge": index}

    if h_ring is not None:
        estimators["bloch"] = bloch_invariant(h_ring)

    q1, q2 = default_string_pair()
    k_max = min((hi - 1 - cut.cut - 10) // 2, 40)
    if cut.cut - 1 >= lo and k_max >= 20:
        spec = StringCorrelatorSpec(q1, q2, tuple(range(1, k_max + 1)))
        verdict = detect_string_order(string_correlator(cov, spec, anchor=cut.cut))
        estimators["string"] = -1 if verdict.detected else 1

    agreement = len(set(estimators.values())) == 1
    return Z2IndexResult(
        index=index,
        dim_wedge=dim_wedge,
        estimator_values=estimators,
        agreement=agreement,
        diagnostics=diagnostics,
    )


def random_one_sided_rotation(
    rng: np.random.Generator,
    cov: MajoranaCovariance,
    cut: SelfDualCut,
    side: str = "left",
    *,
    width: int = 3,
    gap_sites: int = 4,
    span_sites: int = 12,
) -> np.ndarray:
    """Orthogonal one-particle rotation supported strictly on one side.

    Rotates the 2*width Majorana directions of ``width`` adjacent sites
    placed between ``gap_sites`` and ``span_sites`` sites from the cut (a
    buffer so string-end operators at the cut are untouched). Acts as the
    identity elsewhere; use with transform_covariance.
    """
    lo, hi = cov.site_range()
    if side not in ("left", "right"):
        raise ValidationError("side must be 'left' or 'right'")
    lo_start = cut.cut - span_sites if side == "left" else cut.cut + gap_sites
    hi_start = cut.cut - gap_sites - width if side == "left" else cut.cut + span_sites - width
    if lo_start < lo or hi_start + width > hi or hi_start < lo_start:
        raise WindowError("no room for a one-sided block between cut and edge")
    start = int(rng.integers(lo_start, hi_start + 1))
    n = 2 * cov.L
    a = 2 * (start - lo)
    m = 2 * width
    g = rng.normal(size=(m, m))
    q, r = np.linalg.qr(g)
    q = q * np.where(np.diag(r) >= 0, 1.0, -1.0)
    if np.linalg.det(q) < 0:
        q[:, [0, 1]] = q[:, [1, 0]]
    o = np.eye(n)
    o[a : a + m, a : a + m] = q
    return o


# ---------------------------------------------------------------------------
# Spectral-gap inequality


def gap_inequality_check(state: EDState, h, probes: Sequence[FermionMonomial]):
    """Empirical check of <Q*[H,Q]> >= m (<Q*Q> - |<Q>|^2) on an ED ground.

    For an exact eigenstate the numerator is <Qv|(H - E0)|Qv>, manifestly
    the energy cost of the perturbed state. Probes whose variance falls
    below 1e-12 carry no information and are skipped (ratio None).

    Returns (m_empirical, ratios) with ratios aligned to ``probes``.
    """
    if state.parity_sector == "mixed":
        raise DegenerateGroundStateError(
            "gap inequality needs a nondegenerate ground state"
        )
    if isinstance(h, QuadraticHamiltonian):
        h = ed_build(h)
    if not isinstance(h, EDOperator):
        raise ValidationError("h must be a QuadraticHamiltonian or EDOperator")
    if h.L != state.L:
        raise ValidationError(f"operator on {h.L} sites, state on {state.L}")
    v = state.vector
    e0 = state.energy
    ratios = []
    finite = []
    for q in probes:
        qv = apply_monomial(state, q)
        norm2 = float(np.vdot(qv, qv).real)
        denom = norm2 - abs(np.vdot(v, qv)) ** 2
        if denom < 1e-12:
            ratios.append(None)
            continue
        numer = float(np.vdot(qv, h.matrix @ qv).real) - e0 * norm2
        ratio = numer / denom
        ratios.append(ratio)
        finite.append(ratio)
    if not finite:
        raise ValidationError("every probe was degenerate (zero variance)")
    return min(finite), ratios


def random_local_probes(
    rng: np.random.Generator,
    L: int,
    count: int,
    *,
    span: int = 3,
    max_factors: int = 3,
) -> list:
    """Random short monomials on random windows of ``span`` adjacent sites."""
    kinds = (Kind.CREATE, Kind.ANNIHILATE, Kind.MAJ_EVEN, Kind.MAJ_ODD)
    probes = []
    while len(probes) < count:
        start = int(rng.integers(0, max(1, L - span + 1)))
        n = int(rng.integers(1, max_factors + 1))
        facs = tuple(
            (start + int(rng.integers(0, min(span, L - start))), kinds[rng.integers(4)])
            for _ in range(n)
        )
        m = FermionMonomial(1 + 0j, facs).canonical()
        if not m.is_zero():
            probes.append(m)
    return probes
