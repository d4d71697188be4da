import math

import numpy as np
import pytest

from conftest import family_params
from lambda_kerr import ModelParams, NonlinearityFn, NormDriftError, coherent_field, evolve_state
from lambda_kerr import oracle

CONST = NonlinearityFn.constant()
INV = NonlinearityFn.inverse_sqrt()


def test_basis_index_bijection():
    seen = {oracle.basis_index(l, n) for l in (1, 2, 3) for n in range(20)}
    assert seen == set(range(60))
    for i in range(60):
        assert oracle.basis_index(*oracle.basis_label(i)) == i
    with pytest.raises(ValueError):
        oracle.basis_index(4, 0)


def test_free_hamiltonian_is_diagonal():
    p = ModelParams(omega1=0.3, omega2=-1.1, omega3=2.0, Omega=0.7, lambda1=1, lambda2=1)
    H = oracle.build_hamiltonian(p, CONST, 10)
    # couplings must be positive, so remove the interaction explicitly
    _, R = oracle.field_operators(10, CONST)
    Hint = np.kron(R, oracle._atom_op(1, 3)) + np.kron(R, oracle._atom_op(1, 2))
    D = H - (Hint + Hint.T)
    assert np.max(np.abs(D - np.diag(np.diag(D)))) == 0
    for i in range(D.shape[0]):
        level, n = oracle.basis_label(i)
        w = (p.omega1, p.omega2, p.omega3)[level - 1]
        assert D[i, i].real == pytest.approx(w + n * p.Omega, abs=1e-15)


@pytest.mark.parametrize("f", [CONST, INV], ids=["constant", "inverse-sqrt"])
def test_hamiltonian_hermitian_and_block_structure(f):
    p = family_params("b")
    H = oracle.build_hamiltonian(p, f, 25)
    assert np.max(np.abs(H - H.conj().T)) < 1e-14
    rows, cols = np.nonzero(np.abs(H - np.diag(np.diag(H))) > 0)
    for i, j in zip(rows, cols):
        (li, ni), (lj, nj) = oracle.basis_label(i), oracle.basis_label(j)
        pair = sorted([(li, ni), (lj, nj)])
        assert pair[0][0] == 1 and pair[1][0] in (2, 3) and pair[1][1] == pair[0][1] + 1


@pytest.mark.parametrize("f", [CONST, INV], ids=["constant", "inverse-sqrt"])
def test_commutator_r_n(f):
    number, R = oracle.field_operators(30, f)
    comm = R @ number - number @ R
    assert np.max(np.abs((comm - R)[:-1, :-1])) < 1e-12


def test_excitation_number_conserved_by_hamiltonian():
    n_max = 20
    H = oracle.build_hamiltonian(family_params("c").with_chi(0.3), INV, n_max)
    N = oracle.excitation_operator(n_max)
    comm = H @ N - N @ H
    interior = 3 * n_max
    assert np.max(np.abs(comm[:interior, :interior])) < 1e-12


def test_stationary_basis_state():
    H = np.diag([0.5, -1.0, 2.0]).astype(complex)
    psi0 = np.array([0, 1, 0], dtype=complex)
    for method in ("rk4", "expm"):
        res = oracle.integrate(H, psi0, 3.0, oracle.IntegratorConfig(method=method))
        np.testing.assert_allclose(res.psi, np.exp(1j * 3.0) * psi0, atol=1e-10)


def test_resonant_populations_from_fock_state():
    n, lam = 3, 1.0
    p = ModelParams.from_detunings(lambda1=lam)
    H = oracle.build_hamiltonian(p, CONST, n + 2)
    psi0 = np.zeros(H.shape[0], dtype=complex)
    psi0[oracle.basis_index(1, n)] = 1
    g = lam * math.sqrt(2 * (n + 1))
    for method, tol in (("expm", 1e-12), ("rk4", 1e-6)):
        for t in (0.2, 0.9, 2.5):
            psi = oracle.integrate(H, psi0, t, oracle.IntegratorConfig(method=method)).psi
            pops = [abs(psi[oracle.basis_index(l, m)]) ** 2 for l, m in ((1, n), (2, n + 1), (3, n + 1))]
            c, s = math.cos(g * t) ** 2, math.sin(g * t) ** 2
            np.testing.assert_allclose(pops, [c, s / 2, s / 2], rtol=0, atol=tol)


def test_rk4_self_convergence():
    field = coherent_field(2.0)
    p = family_params("b")
    H = oracle.build_hamiltonian(p, CONST, field.n_max + 1)
    psi0 = oracle.initial_vector(field)
    psi0 /= np.linalg.norm(psi0)
    dt = 0.05 / np.linalg.norm(H, 2)
    a = oracle.integrate(H, psi0, 5.0, oracle.IntegratorConfig(dt=dt)).psi
    b = oracle.integrate(H, psi0, 5.0, oracle.IntegratorConfig(dt=dt / 2)).psi
    assert np.linalg.norm(a - b) < 1e-9


def test_norm_drift_error():
    H = np.diag([0.0, 50.0]).astype(complex)
    psi0 = np.array([0, 1], dtype=complex)
    with pytest.raises(NormDriftError, match="smaller dt"):
        oracle.integrate(H, psi0, 10.0, oracle.IntegratorConfig(dt=0.05))
    res = oracle.integrate(H, psi0, 10.0, oracle.IntegratorConfig(dt=0.05, renormalize=True))
    assert res.norm_drift < 1e-12


def test_integrate_validation():
    with pytest.raises(ValueError):
        oracle.integrate(np.eye(2), np.array([1.0, 1.0]), 1.0)
    with pytest.raises(ValueError):
        oracle.integrate(np.eye(2), np.array([1.0, 0.0]), -1.0)
    with pytest.raises(ValueError):
        oracle.IntegratorConfig(dt=0)
    with pytest.raises(ValueError):
        oracle.IntegratorConfig(method="euler")
    with pytest.raises(ValueError):
        oracle.build_hamiltonian(family_params("a"), CONST, 0)


def test_fidelity_gap_trivial_cases():
    field = coherent_field(1.0)
    s = evolve_state(field, family_params("a"), CONST, 0.7)
    psi = oracle.embed_state(s, normalize=True)
    assert oracle.fidelity_gap(s, psi) < 1e-15
    other = np.zeros_like(psi)
    other[np.argmin(np.abs(psi))] = 1
    other -= np.vdot(psi, other) * psi
    other /= np.linalg.norm(other)
    assert oracle.fidelity_gap(s, other) == pytest.approx(1, abs=1e-12)
    with pytest.raises(ValueError, match="dimension"):
        oracle.fidelity_gap(s, psi[:-3])


@pytest.mark.parametrize("family", ["a", "b", "c"])
def test_oracle_matches_analytic_rk4(family):
    field = coherent_field(2.0)
    p = family_params(family)
    times = [1.0, 5.0, 10.0]
    nums = oracle.evolve_numeric(field, p, INV, times)
    ana = evolve_state(field, p, INV, np.array(times))
    for i, psi in enumerate(nums):
        assert oracle.fidelity_gap(ana[i], psi) < 1e-8


def test_truncation_edge_leakage():
    # the oracle basis closes every reached sector, so the top sector keeps
    # exactly its initial weight; with a tight budget that weight is < 1e-10
    from lambda_kerr import TruncationPolicy
    p = family_params("b")
    cfg = oracle.IntegratorConfig(method="expm", dt=0.05)
    for policy, edge_tol in ((TruncationPolicy(), None), (TruncationPolicy(epsilon=1e-16), 1e-10)):
        field = coherent_field(math.sqrt(10), policy)
        top = abs(field.amplitudes[-1])
        for psi in oracle.evolve_numeric(field, p, CONST, [2.0, 8.0, 15.0], cfg):
            sector = math.sqrt(abs(psi[-6]) ** 2 + abs(psi[-2]) ** 2 + abs(psi[-1]) ** 2)
            assert sector == pytest.approx(top, rel=1e-8)
            if edge_tol is not None:
                assert np.max(np.abs(psi[-6:])) < edge_tol
            N = oracle.excitation_operator(psi.size // 3 - 1)
            assert oracle.expectation(N, psi).real == pytest.approx(11, abs=1e-9)
