import numpy as np
import pytest

from quasifree.ed import (
    EDOperator,
    EDState,
    ed_build,
    ed_expectation,
    ed_ground,
    parity_operator,
)
from quasifree.exceptions import ValidationError
from quasifree.jordan_wigner import PauliString, jw_fermion_to_pauli, pauli_model
from quasifree.monomials import (
    FermionMonomial,
    Kind,
    maj_even,
    maj_odd,
    number_pm,
)
from quasifree.quadratic import QuadraticHamiltonian, build_model, ground_state

from _dense import quadratic_matrix


def test_annihilators_satisfy_car():
    L = 5
    from quasifree.ed import _annihilators

    c = [m.toarray() for m in _annihilators(L)]
    dim = 2**L
    for i in range(L):
        for j in range(L):
            acc = c[i] @ c[j] + c[j] @ c[i]
            assert np.array_equal(acc, np.zeros((dim, dim)))
            mixed = c[i] @ c[j].conj().T + c[j].conj().T @ c[i]
            want = np.eye(dim) if i == j else np.zeros((dim, dim))
            assert np.array_equal(mixed, want)


def test_trivial_l2_matrix_is_diagonal():
    op = ed_build(build_model("trivial", 2, {"mu": 1.0}))
    assert op.parity == "even"
    assert op.hermitian
    # occupation order |00>, |01>, |10>, |11>; H = sum mu (2 n_j - 1)
    assert np.array_equal(op.dense(), np.diag([-2.0, 0.0, 0.0, 2.0]).astype(complex))


def test_kitaev_l2_hand_expansion():
    op = ed_build(build_model("kitaev", 2, {"J": 1.0, "lam": 0.0}))
    want = np.zeros((4, 4), complex)
    want[1, 2] = want[2, 1] = 1.0  # hopping |01><10| + h.c.
    want[0, 3] = want[3, 0] = 1.0  # pairing |11><00| + h.c.
    assert np.array_equal(op.dense(), want)


@pytest.mark.parametrize(
    "name,L,params,boundary",
    [
        ("kitaev", 6, {"J": 1.0, "lam": 0.7}, "open"),
        ("kitaev", 6, {"J": 1.0, "lam": 0.3}, "ring"),
        ("xy", 5, {"gamma": 0.4, "lam": 1.1}, "open"),
        ("trivial", 4, {"mu": 0.8}, "open"),
    ],
)
def test_quadratic_build_matches_dense_oracle(name, L, params, boundary):
    h = build_model(name, L, params, boundary)
    got = ed_build(h).dense()
    want = quadratic_matrix(h.A, h.B)
    assert np.max(np.abs(got - want)) <= 1e-13


def test_parity_commutes_exactly():
    for name, params in [("kitaev", {"J": 1.0, "lam": 0.6}), ("xy", None)]:
        op = ed_build(build_model(name, 5, params))
        assert op.commutator_with_parity_norm() == 0.0


def test_trivial_ground_state():
    st = ed_ground(ed_build(build_model("trivial", 3, {"mu": 1.0})))
    assert st.energy == pytest.approx(-3.0, abs=1e-12)
    assert st.gap == pytest.approx(2.0, abs=1e-12)
    assert st.parity_sector == "even"
    assert abs(st.vector[0]) == pytest.approx(1.0, abs=1e-12)


def test_kitaev_open_energy_matches_quasifree():
    # lam=0 has an exact edge zero mode: energies agree, sector is mixed
    h = build_model("kitaev", 8, {"J": 1.0, "lam": 0.0})
    st = ed_ground(ed_build(h))
    gs = ground_state(h)
    assert abs(st.energy - gs.energy) <= 1e-10
    assert st.parity_sector == "mixed"

    h = build_model("kitaev", 8, {"J": 1.0, "lam": 0.75})
    st = ed_ground(ed_build(h))
    gs = ground_state(h)
    assert abs(st.energy - gs.energy) <= 1e-10
    assert abs(st.gap - gs.gap) <= 1e-9
    assert st.parity_sector in ("even", "odd")


def test_pauli_ring_ground_is_symmetry_broken_pair():
    terms = pauli_model("kitaev", 8, {"J": 1.0, "lam": 0.0}, boundary="ring")
    st = ed_ground(ed_build(terms, L=8))
    assert st.energy == pytest.approx(-8.0, abs=1e-10)
    assert st.parity_sector == "mixed"


def test_variational_bound_random_quadratic(rng=np.random.default_rng(23)):
    L = 6
    A = rng.normal(size=(L, L)) + 1j * rng.normal(size=(L, L))
    A = (A + A.conj().T) / 2
    B = rng.normal(size=(L, L)) + 1j * rng.normal(size=(L, L))
    B = (B - B.T) / 2
    h = QuadraticHamiltonian(A, B)
    op = ed_build(h)
    st = ed_ground(op)
    gs = ground_state(h)
    assert gs.energy >= st.energy - 1e-9
    assert abs(gs.energy - st.energy) <= 1e-9
    dim = 2**L
    for _ in range(5):
        psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        psi /= np.linalg.norm(psi)
        e = np.vdot(psi, op.matrix @ psi).real
        assert e >= st.energy - 1e-10


def test_vacuum_expectations():
    st = ed_ground(ed_build(build_model("trivial", 3, {"mu": 1.0})))
    for j in range(3):
        assert ed_expectation(st, number_pm(j)) == pytest.approx(-1.0, abs=1e-12)
        # odd monomials vanish in a parity eigenstate
        assert abs(ed_expectation(st, maj_even(j))) <= 1e-10
    assert ed_expectation(st, PauliString(1 + 0j, (2, 2), "Z")) == pytest.approx(
        -1.0, abs=1e-12
    )
    assert abs(ed_expectation(st, PauliString(1 + 0j, (1, 1), "X"))) <= 1e-12


def test_bond_pairing_matches_covariance():
    h = build_model("kitaev", 8, {"J": 1.0, "lam": 0.75})
    st = ed_ground(ed_build(h))
    gs = ground_state(h)
    g = gs.covariance.gamma
    for k in range(7):
        m = (-1j) * (maj_odd(k) * maj_even(k + 1))
        got = ed_expectation(st, m)
        assert abs(got.imag) <= 1e-10
        assert abs(got.real - (-g[2 * k + 1, 2 * k + 2])) <= 1e-10


def _random_even_monomial(rng, L):
    while True:
        n = int(2 * rng.integers(1, 3))
        facs = tuple(
            (int(rng.integers(0, L)),
             (Kind.CREATE, Kind.ANNIHILATE, Kind.MAJ_EVEN, Kind.MAJ_ODD)[
                 rng.integers(4)
             ])
            for _ in range(n)
        )
        m = FermionMonomial(1 + 0j, facs).canonical()
        if not m.is_zero():
            return m


def test_expectations_agree_across_the_spin_dictionary(
    rng=np.random.default_rng(31),
):
    # same model built on both sides of the dictionary; expectations of an
    # even monomial and of its string image must coincide in the respective
    # ground states
    L = 6
    params = {"J": 1.0, "lam": 0.75}
    v = ed_ground(ed_build(build_model("kitaev", L, params)))
    w = ed_ground(ed_build(pauli_model("kitaev", L, params), L=L))
    assert abs(v.energy - w.energy) <= 1e-12
    assert v.gap > 0.1 and w.gap > 0.1
    for _ in range(25):
        m = _random_even_monomial(rng, L)
        img = jw_fermion_to_pauli(m, (0, L - 1))
        assert not img.tail
        lhs = ed_expectation(v, m)
        rhs = sum(ed_expectation(w, t) for t in img.terms)
        assert abs(lhs - rhs) <= 1e-12


def test_lanczos_branch_l13():
    st = ed_ground(ed_build(build_model("trivial", 13, {"mu": 1.0})))
    assert st.energy == pytest.approx(-13.0, abs=1e-8)
    assert st.gap == pytest.approx(2.0, abs=1e-7)
    assert st.parity_sector == "even"


def test_dimension_overflow_and_mismatches():
    with pytest.raises(ValidationError):
        ed_build(build_model("trivial", 15))
    with pytest.raises(ValidationError):
        ed_build(maj_even(3), L=15)
    with pytest.raises(ValidationError):
        ed_build(maj_even(9), L=8)
    with pytest.raises(ValidationError):
        ed_build([], L=4)
    with pytest.raises(ValidationError):
        # even plus odd in one sum
        ed_build([number_pm(0), maj_even(1)], L=3)
    st = ed_ground(ed_build(build_model("trivial", 3)))
    with pytest.raises(ValidationError):
        ed_expectation(st, maj_even(5))
    with pytest.raises(ValidationError):
        ed_expectation(st, PauliString(1 + 0j, (2, 4), "XXX"))


def test_parity_operator_diagonal():
    P = parity_operator(3).toarray()
    want = np.diag([1, -1, -1, 1, -1, 1, 1, -1]).astype(complex)
    assert np.array_equal(P, want)


def test_edstate_validation():
    v = np.zeros(4, complex)
    v[0] = 1.0
    with pytest.raises(ValidationError):
        EDState(vector=2 * v, energy=0.0, gap=1.0, parity_sector="even", L=2)
    with pytest.raises(ValidationError):
        EDState(vector=v, energy=0.0, gap=-1.0, parity_sector="even", L=2)
    with pytest.raises(ValidationError):
        EDState(vector=v, energy=0.0, gap=1.0, parity_sector="both", L=2)


def test_edoperator_validation():
    from scipy import sparse

    with pytest.raises(ValidationError):
        EDOperator(sparse.identity(4, format="csr"), 3, "even", True)
    with pytest.raises(ValidationError):
        EDOperator(sparse.identity(4, format="csr"), 2, "none", True)
    with pytest.raises(ValidationError):
        ed_ground(
            EDOperator(
                sparse.csr_matrix(np.array([[0, 1j], [0, 0]])), 1, "even", False
            )
        )
