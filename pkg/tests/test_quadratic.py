"""Quadratic chains: catalog, Majorana form, ground covariances."""

import numpy as np
import pytest

from _dense import ground_energy, majorana_matrix, quadratic_matrix
from quasifree.exceptions import (
    DegenerateGroundStateError,
    ValidationError,
    WindowError,
)
from quasifree.quadratic import (
    MajoranaCovariance,
    QuadraticHamiltonian,
    SelfDualCut,
    build_model,
    covariance_to_projection,
    energy_expectation,
    graded_product,
    ground_state,
    majorana_form,
    one_particle_spectrum,
    transform_covariance,
)


def _random_pure_covariance(L, rng, site_offset=0):
    vac = np.zeros((2 * L, 2 * L))
    for j in range(L):
        vac[2 * j, 2 * j + 1] = 1.0
        vac[2 * j + 1, 2 * j] = -1.0
    o, _ = np.linalg.qr(rng.normal(size=(2 * L, 2 * L)))
    return MajoranaCovariance(o @ vac @ o.T, site_offset=site_offset)


# --- model catalog --------------------------------------------------------


def test_trivial_model_entries():
    h = build_model("trivial", 3, {"mu": 2.0})
    assert np.array_equal(h.A, 2.0 * np.eye(3))
    assert np.array_equal(h.B, np.zeros((3, 3)))


def test_xy_at_unit_gamma_is_kitaev():
    hx = build_model("xy", 6, {"gamma": 1.0, "lam": 0.3})
    hk = build_model("kitaev", 6, {"J": 1.0, "lam": 0.3})
    assert np.allclose(hx.A, hk.A, atol=0) and np.allclose(hx.B, hk.B, atol=0)


def test_ring_wraps_bond():
    h = build_model("kitaev", 4, {"J": 2.0}, boundary="ring")
    assert h.A[3, 0] == 1.0 and h.A[0, 3] == 1.0
    assert h.B[3, 0] == 1.0 and h.B[0, 3] == -1.0


def test_build_model_rejects_bad_input():
    with pytest.raises(ValidationError):
        build_model("isings", 4)
    with pytest.raises(ValidationError):
        build_model("kitaev", 4, {"j": 1.0})  # wrong key case
    with pytest.raises(ValidationError):
        build_model("kitaev", 2, boundary="ring")
    with pytest.raises(ValidationError):
        build_model("custom", 3, {"A": np.eye(3)})
    with pytest.raises(ValidationError):
        build_model("kitaev", 3, boundary="moebius")


def test_quadratic_hamiltonian_validation():
    with pytest.raises(ValidationError):
        QuadraticHamiltonian(np.array([[0.0, 1.0], [0.0, 0.0]]), np.zeros((2, 2)))
    with pytest.raises(ValidationError):
        QuadraticHamiltonian(np.eye(2), np.eye(2))  # B symmetric


# --- Majorana form against the dense oracle -------------------------------


def _dense_from_majorana(m):
    L = m.shape[0] // 2
    dim = 1 << L
    ops = [majorana_matrix(L, p) for p in range(2 * L)]
    h = np.zeros((dim, dim), complex)
    for p in range(2 * L):
        for q in range(2 * L):
            if m[p, q] != 0:
                h += 0.25j * m[p, q] * (ops[p] @ ops[q])
    return h


@pytest.mark.parametrize(
    "name,params,boundary",
    [
        ("kitaev", {"J": 1.0, "lam": 0.7}, "open"),
        ("kitaev", {"J": 0.8, "lam": 0.2}, "ring"),
        ("xy", {"gamma": 0.4, "lam": 0.3}, "open"),
        ("trivial", {"mu": 1.3}, "open"),
    ],
)
def test_majorana_form_reproduces_hamiltonian(name, params, boundary):
    L = 4
    h = build_model(name, L, params, boundary=boundary)
    want = quadratic_matrix(h.A, h.B)
    m = majorana_form(h)
    assert np.max(np.abs(m + m.T)) == 0.0
    got = _dense_from_majorana(m)
    assert np.max(np.abs(got - want)) < 1e-12


def test_majorana_form_complex_couplings():
    rng = np.random.default_rng(3)
    L = 3
    a = rng.normal(size=(L, L)) + 1j * rng.normal(size=(L, L))
    b = rng.normal(size=(L, L)) + 1j * rng.normal(size=(L, L))
    h = QuadraticHamiltonian(a + a.conj().T, b - b.T)
    want = quadratic_matrix(h.A, h.B)
    got = _dense_from_majorana(majorana_form(h))
    assert np.max(np.abs(got - want)) < 1e-11


# --- spectrum and ground state --------------------------------------------


def test_spectrum_particle_hole_symmetric():
    h = build_model("kitaev", 7, {"J": 1.0, "lam": 0.6})
    eps = one_particle_spectrum(h)
    assert np.all(np.diff(eps) >= -1e-15)
    assert np.allclose(eps, -eps[::-1], atol=1e-12)


def test_trivial_ground_is_vacuum():
    L = 5
    gs = ground_state(build_model("trivial", L, {"mu": 1.5}))
    want = np.zeros((2 * L, 2 * L))
    for j in range(L):
        want[2 * j, 2 * j + 1] = 1.0
        want[2 * j + 1, 2 * j] = -1.0
    assert np.max(np.abs(gs.covariance.gamma - want)) < 1e-12
    assert abs(gs.energy - (-1.5 * L)) < 1e-12
    assert abs(gs.gap - 3.0) < 1e-12
    assert gs.covariance.is_pure and not gs.edge_pair_filled


def test_ground_energy_matches_dense_ed():
    for name, params, boundary in [
        ("kitaev", {"J": 1.0, "lam": 1.4}, "open"),
        ("kitaev", {"J": 1.0, "lam": 0.3}, "ring"),
        ("xy", {"gamma": 0.5, "lam": 0.9}, "open"),
    ]:
        h = build_model(name, 5, params, boundary=boundary)
        gs = ground_state(h)
        e_dense = ground_energy(quadratic_matrix(h.A, h.B))
        assert abs(gs.energy - e_dense) < 1e-10, (name, params)
        assert abs(energy_expectation(h, gs.covariance) - e_dense) < 1e-10


def test_kitaev_open_bond_pairing():
    # lam = 0: each bond carries <-i a_{2k+1} a_{2k+2}> = +1,
    # i.e. gamma[2k+1, 2k+2] = -1, and the edge doublet is filled.
    L = 10
    gs = ground_state(build_model("kitaev", L, {"J": 1.0, "lam": 0.0}))
    assert gs.edge_pair_filled
    g = gs.covariance.gamma
    for k in range(L - 1):
        assert abs(g[2 * k + 1, 2 * k + 2] - (-1.0)) < 1e-10
    # deterministic edge fill couples the two outer Majoranas positively
    assert abs(g[0, 2 * L - 1] - 1.0) < 1e-10
    assert gs.covariance.is_pure
    assert abs(gs.energy - (-(L - 1))) < 1e-10


def test_kitaev_deep_topological_fills_edge_pair():
    # splitting ~ lam^L is far below the zero-mode cut at this size
    gs = ground_state(build_model("kitaev", 60, {"J": 1.0, "lam": 0.5}))
    assert gs.edge_pair_filled
    assert gs.covariance.is_pure


def test_kitaev_trivial_phase_has_no_edge_modes():
    gs = ground_state(build_model("kitaev", 40, {"J": 1.0, "lam": 1.5}))
    assert not gs.edge_pair_filled
    # finite-size gap sits just above the bulk value 2|lam - J| = 1
    assert 1.0 < gs.gap < 1.05


def test_critical_ring_is_degenerate():
    h = build_model("kitaev", 8, {"J": 1.0, "lam": 1.0}, boundary="ring")
    with pytest.raises(DegenerateGroundStateError):
        ground_state(h)


def test_zero_hamiltonian_is_degenerate():
    h = QuadraticHamiltonian(np.zeros((3, 3)), np.zeros((3, 3)))
    with pytest.raises(DegenerateGroundStateError):
        ground_state(h)


def test_ground_energy_is_variational_minimum():
    rng = np.random.default_rng(5)
    h = build_model("kitaev", 6, {"J": 1.0, "lam": 0.8})
    gs = ground_state(h)
    for _ in range(25):
        cov = _random_pure_covariance(6, rng)
        assert energy_expectation(h, cov) >= gs.energy - 1e-11


# --- covariance container -------------------------------------------------


def test_covariance_validation():
    with pytest.raises(ValidationError):
        MajoranaCovariance(np.ones((2, 2)))
    with pytest.raises(ValidationError):
        MajoranaCovariance(np.zeros((3, 3)))
    with pytest.raises(ValidationError):
        MajoranaCovariance(2.0 * np.array([[0.0, 1.0], [-1.0, 0.0]]))
    with pytest.raises(ValidationError):
        MajoranaCovariance(1j * np.array([[0.0, 1.0], [-1.0, 0.0]]))
    # the zero matrix is a valid (maximally mixed) covariance
    assert not MajoranaCovariance(np.zeros((4, 4))).is_pure


def test_covariance_indexing_and_window():
    gs = ground_state(build_model("kitaev", 12, {"J": 1.0, "lam": 1.5}),
                      site_offset=-4)
    cov = gs.covariance
    assert cov.site_range() == (-4, 8)
    assert cov.majorana_index(-4, 0) == 0
    assert cov.majorana_index(7, 1) == 23
    with pytest.raises(WindowError):
        cov.majorana_index(8, 0)
    win = cov.window(-1, 3)
    assert win.L == 4 and win.site_offset == -1
    sub = cov.gamma[6:14, 6:14]
    assert np.array_equal(win.gamma, sub)
    with pytest.raises(WindowError):
        cov.window(2, 2)


def test_projection_properties():
    rng = np.random.default_rng(9)
    cov = _random_pure_covariance(4, rng)
    e = covariance_to_projection(cov)
    assert np.max(np.abs(e - e.conj().T)) < 1e-12
    assert np.max(np.abs(e @ e - e)) < 1e-10
    assert np.max(np.abs(e.conj() - (np.eye(8) - e))) == 0.0
    with pytest.raises(ValidationError):
        covariance_to_projection(MajoranaCovariance(np.zeros((4, 4))))


def test_transform_covariance():
    rng = np.random.default_rng(2)
    cov = _random_pure_covariance(3, rng)
    o, _ = np.linalg.qr(rng.normal(size=(6, 6)))
    out = transform_covariance(cov, o)
    assert out.is_pure
    assert np.allclose(out.gamma, o @ cov.gamma @ o.T, atol=1e-12)
    with pytest.raises(ValidationError):
        transform_covariance(cov, np.eye(6) * 1.001)
    with pytest.raises(ValidationError):
        transform_covariance(cov, np.eye(4))


def test_graded_product_blocks():
    rng = np.random.default_rng(4)
    left = _random_pure_covariance(2, rng, site_offset=0)
    right = _random_pure_covariance(3, rng, site_offset=2)
    joined = graded_product(left, right)
    assert joined.L == 5 and joined.site_offset == 0
    assert np.array_equal(joined.gamma[:4, :4], left.gamma)
    assert np.array_equal(joined.gamma[4:, 4:], right.gamma)
    assert np.max(np.abs(joined.gamma[:4, 4:])) == 0.0
    with pytest.raises(ValidationError):
        graded_product(left, _random_pure_covariance(3, rng, site_offset=3))


def test_self_dual_cut_signs():
    cov = ground_state(build_model("trivial", 6, {"mu": 1.0}),
                       site_offset=-3).covariance
    cut = SelfDualCut(0)
    s = cut.theta_signs(cov)
    assert s.shape == (12,)
    assert np.array_equal(s[:6], np.ones(6))
    assert np.array_equal(s[6:], -np.ones(6))
    with pytest.raises(WindowError):
        SelfDualCut(-3).theta_signs(cov)
    with pytest.raises(WindowError):
        SelfDualCut(5).theta_signs(cov)
