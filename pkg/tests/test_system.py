import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from _oracles import gauss_rank, loop_simulate
from hankelid import running_example as rx
from hankelid.data import IOTrajectory, StateTrajectory, build_H, build_J, build_G
from hankelid.errors import InvalidPerturbation, InvalidShape, NotObservable
from hankelid.system import (
    IsoSystem, PerturbationSpec, explains, is_controllable, is_isomorphic, is_observable,
    lag, lag_structure, load_system, observability_matrix, perturb_explaining,
    perturbation_terms, save_system, simulate, state_residual, structured_matrices,
    system_from_json, system_to_json, toeplitz_matrix,
)

MEMORYLESS = IsoSystem(np.zeros((0, 0)), np.zeros((0, 2)), np.zeros((2, 0)), [[1, 0], [0, 1]])


def _random_system(rng, n, m, p, scale=1.0):
    return IsoSystem(rng.uniform(-scale, scale, (n, n)), rng.uniform(-1, 1, (n, m)),
                     rng.uniform(-1, 1, (p, n)), rng.uniform(-1, 1, (p, m)))


def test_shapes_and_void_system():
    assert (MEMORYLESS.n, MEMORYLESS.m, MEMORYLESS.p) == (0, 2, 2)
    with pytest.raises(InvalidShape):
        IsoSystem(np.eye(2), np.ones((3, 1)), np.ones((1, 2)), np.ones((1, 1)))
    assert lag(MEMORYLESS) == 0
    assert lag_structure(MEMORYLESS).rho == (2,)
    assert is_observable(MEMORYLESS) and is_controllable(MEMORYLESS)


def test_observability_examples():
    s = rx.TRUE_SYSTEM
    assert observability_matrix(s, -1).shape == (0, 3)
    np.testing.assert_array_equal(observability_matrix(s, 0), s.C)
    O1 = observability_matrix(s, 1)
    assert gauss_rank(O1) == 3
    ranks = [gauss_rank(observability_matrix(s, k)) for k in range(3)]
    assert ranks == [2, 3, 3]


def test_lag_and_structure():
    assert lag(rx.TRUE_SYSTEM) == 2
    assert lag(rx.SYSTEM_T5) == 1
    rho = lag_structure(rx.TRUE_SYSTEM)
    assert (rho[-1], rho[0], rho[1], rho[2]) == (2, 2, 1, 0)
    assert sum(rho[i] for i in range(0, 3)) == 3


def test_minimality_examples():
    assert is_observable(rx.TRUE_SYSTEM) and is_controllable(rx.TRUE_SYSTEM)
    s = IsoSystem([[0.0]], [[0.0]], [[1.0]], [[0.0]])
    assert not is_controllable(s)


def test_structured_matrices():
    s = rx.TRUE_SYSTEM
    assert toeplitz_matrix(s, -1).shape == (0, 0)
    np.testing.assert_array_equal(toeplitz_matrix(s, 0), s.D)
    CB = np.array([[1, 0], [0, 1]])  # by hand: rows 1-2 of B_true
    expected = np.block([[s.D, np.zeros((2, 2))], [CB, s.D]])
    np.testing.assert_array_equal(toeplitz_matrix(s, 1), expected)
    # H_k = Phi_k J_k(x) and G_k = Psi_k J_k(x) for the true state
    tr, x = rx.trajectory(), StateTrajectory(rx.X)
    for k in range(4):
        _, Gamma, _, Phi, Psi = structured_matrices(s, k)
        assert Gamma.shape == (3, 2 * (k + 1))
        np.testing.assert_allclose(Phi @ build_J(x, tr, k), build_H(tr, k), atol=1e-12)
        np.testing.assert_allclose(Psi @ build_J(x, tr, k), build_G(tr, k), atol=1e-12)


def test_simulate_running_example():
    y, x = simulate(rx.TRUE_SYSTEM, rx.X0, rx.U)
    np.testing.assert_array_equal(y, rx.Y)
    np.testing.assert_array_equal(x, rx.X)
    y, x = simulate(MEMORYLESS, [], rx.U)
    np.testing.assert_array_equal(y, rx.U)
    assert x.shape == (0, 15)
    s = IsoSystem(rx.TRUE_SYSTEM.A, np.zeros((3, 2)), rx.TRUE_SYSTEM.C, rx.TRUE_SYSTEM.D)
    y, _ = simulate(s, np.zeros(3), rx.U)
    np.testing.assert_array_equal(y, rx.TRUE_SYSTEM.D @ rx.U)
    with pytest.raises(InvalidShape):
        simulate(rx.TRUE_SYSTEM, [1, 1], rx.U)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_simulate_matches_loop_and_is_explained(seed):
    rng = np.random.default_rng(seed)
    n, m, p = (int(v) for v in rng.integers(1, 4, 3))
    T = int(rng.integers(1, 15))
    s = _random_system(rng, n, m, p, scale=0.6)
    u, x0 = rng.standard_normal((m, T)), rng.standard_normal(n)
    y, x = simulate(s, x0, u)
    y2, x2 = loop_simulate(s.A, s.B, s.C, s.D, x0, u)
    np.testing.assert_allclose(y, y2, atol=1e-12)
    np.testing.assert_allclose(x, x2, atol=1e-12)
    if np.any(u):
        ok, w = explains(s, IOTrajectory(u, y))
        assert ok and state_residual(s, w, IOTrajectory(u, y)) <= 1e-8


def test_explains_examples():
    for T in (1, 5, 14):
        ok, w = explains(rx.TRUE_SYSTEM, rx.trajectory(T))
        assert ok
    tr5 = rx.trajectory(5)
    ok, w = explains(rx.SYSTEM_T5, tr5)
    assert ok
    assert state_residual(rx.SYSTEM_T5, rx.STATE_T5, tr5) == 0
    zeroD = IsoSystem(np.zeros((0, 0)), np.zeros((0, 2)), np.zeros((2, 0)), np.zeros((2, 2)))
    assert explains(zeroD, tr5) == (False, None)
    # unobservable candidate goes through the stacked solve
    A = np.zeros((4, 4))
    A[:3, :3] = rx.TRUE_SYSTEM.A
    B = np.vstack([rx.TRUE_SYSTEM.B, [[1, 1]]])
    C = np.hstack([rx.TRUE_SYSTEM.C, np.zeros((2, 1))])
    padded = IsoSystem(A, B, C, rx.TRUE_SYSTEM.D)
    assert not is_observable(padded)
    assert explains(padded, rx.trajectory())[0]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_lag_structure_properties(seed):
    rng = np.random.default_rng(seed)
    n, p = int(rng.integers(1, 6)), int(rng.integers(1, 4))
    s = _random_system(rng, n, 1, p)
    if rng.random() < 0.5:
        # force unobservability by zeroing a column of C and decoupling that state
        s = IsoSystem(np.diag(np.diag(s.A)), s.B, np.hstack([s.C[:, :-1], np.zeros((p, 1))]), s.D)
    rho = lag_structure(s)
    ell = lag(s)
    assert ell <= n
    assert rho[-1] == p
    assert all(0 <= rho[k] <= p for k in range(0, n + 1))
    assert all(rho[k] >= rho[k + 1] for k in range(0, n))
    assert all(rho[k] == 0 for k in range(ell, n + 1))
    total = sum(rho[k] for k in range(0, ell + 1))
    assert total <= n
    assert (total == n) == is_observable(s)


def test_isomorphism_examples():
    chk = is_isomorphic(rx.TRUE_SYSTEM, rx.TRUE_SYSTEM)
    assert chk.isomorphic
    np.testing.assert_allclose(chk.S, np.eye(3), atol=1e-12)
    ok, S = is_isomorphic(rx.TRUE_SYSTEM, rx.SYSTEM_T14)
    assert ok
    assert not is_isomorphic(rx.TRUE_SYSTEM, rx.SYSTEM_T5).isomorphic
    assert not is_isomorphic(rx.SYSTEM_T5, rx.PERTURBED_T5).isomorphic
    unobs = IsoSystem(np.eye(2), np.ones((2, 2)), [[1, 0], [1, 0]], np.zeros((2, 2)))
    with pytest.raises(NotObservable):
        is_isomorphic(unobs, unobs)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_isomorphism_reflexive_symmetric(seed):
    rng = np.random.default_rng(seed)
    n, m, p = int(rng.integers(1, 5)), int(rng.integers(1, 3)), int(rng.integers(1, 3))
    s1 = _random_system(rng, n, m, p)
    if not is_observable(s1):
        return
    T = rng.standard_normal((n, n)) + 3 * np.eye(n)
    Ti = np.linalg.inv(T)
    s2 = IsoSystem(Ti @ s1.A @ T, Ti @ s1.B, s1.C @ T, s1.D)
    assert is_isomorphic(s1, s1).isomorphic
    f, S = is_isomorphic(s1, s2)
    b, S_back = is_isomorphic(s2, s1)
    assert f and b
    np.testing.assert_allclose(S @ S_back, np.eye(n), atol=1e-7)
    s3 = IsoSystem(s2.A, s2.B, s2.C, s2.D + 1e-3)
    assert not is_isomorphic(s1, s3).isomorphic


def test_perturbation_example():
    spec = PerturbationSpec(**rx.PERTURBATION_T5)
    A_hat, E = perturbation_terms(rx.SYSTEM_T5, spec)
    np.testing.assert_array_equal(E[1], [[1, 0], [1, 0]])  # E_0 = zeta eta_1, by hand
    out = perturb_explaining(rx.SYSTEM_T5, StateTrajectory(rx.STATE_T5), spec, rx.trajectory(5))
    for got, want in zip((out.A, out.B, out.C, out.D),
                         (rx.PERTURBED_T5.A, rx.PERTURBED_T5.B, rx.PERTURBED_T5.C, rx.PERTURBED_T5.D)):
        np.testing.assert_allclose(got, want, atol=1e-12)
    assert explains(out, rx.trajectory(5))[0]
    assert state_residual(rx.PERTURBED_T5, rx.PERTURBED_STATE_T5, rx.trajectory(5)) == 0
    assert lag(out) == lag(rx.SYSTEM_T5)


def test_zero_perturbation_is_identity():
    spec = PerturbationSpec([0, 0], ([0, 0], [0, 0]), [1, 0])
    out = perturb_explaining(rx.SYSTEM_T5, StateTrajectory(rx.STATE_T5), spec, rx.trajectory(5))
    np.testing.assert_array_equal(out.matrix(), rx.SYSTEM_T5.matrix())


def test_perturbation_preconditions():
    tr, x = rx.trajectory(5), StateTrajectory(rx.STATE_T5)
    good = rx.PERTURBATION_T5
    bad_specs = [
        dict(good, xi=[1, 0]),              # not in the left kernel of J_1
        dict(good, zeta=[0, 0]),            # zeta must be nonzero
        dict(good, etas=([0, 1],)),         # wrong number of etas
        dict(good, xi=[-1, -1, 0]),         # wrong length
    ]
    for kw in bad_specs:
        with pytest.raises(InvalidPerturbation):
            perturb_explaining(rx.SYSTEM_T5, x, PerturbationSpec(**kw), tr)
    with pytest.raises(InvalidPerturbation):
        perturb_explaining(rx.SYSTEM_T5, StateTrajectory(rx.STATE_T5 + 1), PerturbationSpec(**good), tr)
    with pytest.raises(InvalidPerturbation):
        perturb_explaining(MEMORYLESS, StateTrajectory(np.zeros((0, 6))), PerturbationSpec([], ([0, 0],), []), tr)
    # true system has lag 2: zeta must satisfy C zeta = 0
    spec = PerturbationSpec([0, 0, 0], ([0, 0], [0, 0], [0, 0]), [1, 0, 0])
    with pytest.raises(InvalidPerturbation):
        perturb_explaining(rx.TRUE_SYSTEM, StateTrajectory(rx.X), spec, rx.trajectory())


def test_system_json_round_trip(tmp_path):
    for s in (rx.TRUE_SYSTEM, MEMORYLESS, rx.PERTURBED_T5):
        path = tmp_path / "s.json"
        save_system(s, path)
        back = load_system(path)
        np.testing.assert_array_equal(back.matrix(), s.matrix())
        assert (back.n, back.m, back.p) == (s.n, s.m, s.p)
    obj = system_to_json(rx.TRUE_SYSTEM)
    assert list(obj) == ["n", "m", "p", "A", "B", "C", "D"]
    from hankelid.errors import FormatError, InvalidInput
    with pytest.raises(InvalidInput):
        system_from_json(dict(obj, n=2))
    with pytest.raises(FormatError):
        system_from_json({"n": 1})


def test_observability_survives_a_fast_mode():
    A = np.diag([-2000.0, 2.0, 3.0, -1.0, 0.0])
    C = np.array([[1, 1, 0, 1, 0], [0, 1, 1, -1, 1]], dtype=float)
    stiff = IsoSystem(A, np.ones((5, 1)), C, np.zeros((2, 1)))
    exact = [gauss_rank(observability_matrix(stiff, k)) for k in range(5)]
    assert exact == [2, 4, 5, 5, 5]
    assert is_observable(stiff)
    assert lag(stiff) == 3
    assert lag_structure(stiff).rho == (2, 2, 2, 1)
    assert is_controllable(IsoSystem(A.T, C.T, np.ones((1, 5)), np.zeros((1, 2))))
