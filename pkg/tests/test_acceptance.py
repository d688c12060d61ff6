"""Acceptance suite: one test and one PASS/FAIL line per criterion."""
import time

import numpy as np

from hankelid import running_example as rx
from hankelid.data import StateTrajectory
from hankelid.identification import build_ladder, identify_minimal
from hankelid.informativity import HarnessCaps, check_fundamental_lemma, check_main, harness
from hankelid.invariants import PriorBounds, delta_sequence, invariants
from hankelid.numerics import RowSubspace, complement_in, left_kernel, lstsq_rows, rank
from hankelid.system import (
    PerturbationSpec, explains, is_isomorphic, lag, perturb_explaining, simulate, state_residual,
)


def test_criterion_1_table1(acceptance):
    start = time.perf_counter()
    mismatches = []
    for T, want in rx.TABLE1.items():
        tr = rx.trajectory(T)
        deltas = delta_sequence(tr, up_to=min(2, T - 1))
        deltas = deltas + (None,) * (4 - len(deltas))
        inv = invariants(tr)
        got = (*deltas, inv.l_min, inv.n_min)
        if got != want:
            mismatches.append((T, got, want))
    elapsed = time.perf_counter() - start
    ok = not mismatches and elapsed < 1.0
    acceptance(1, "Table 1 reproduction (T = 1..14)", ok,
               f"{14 - len(mismatches)}/14 columns, {elapsed:.3f}s")
    assert not mismatches, mismatches
    assert elapsed < 1.0


def test_criterion_2_table2(acceptance):
    bad = []
    for (Lp, Np), (Ld, La, pe_cells, main_cells) in rx.TABLE2.items():
        b = PriorBounds(0, Lp, 0, Np)
        for i, T in enumerate(range(11, 15)):
            tr = rx.trajectory(T)
            v = check_main(tr, b)
            pe = check_fundamental_lemma(tr, b)
            if (v.L_d, v.L_a) != (Ld, La):
                bad.append(("bounds", Lp, Np, T, v.L_d, v.L_a))
            if v.informative != main_cells[i]:
                bad.append(("main", Lp, Np, T))
            if pe.concluded_informative != pe_cells[i]:
                bad.append(("pe", Lp, Np, T))
    acceptance(2, "Table 2 reproduction (36 main + 36 PE cells, L_d/L_a)", not bad,
               f"{len(bad)} mismatches")
    assert not bad, bad


def test_criterion_3_identify_T14(acceptance):
    tr = rx.trajectory()
    res = identify_minimal(tr)
    resid = state_residual(res.system, res.state, tr)
    iso = is_isomorphic(res.system, rx.TRUE_SYSTEM)
    ok = (res.system.n == 3 and lag(res.system) == 2 and resid <= 1e-9
          and iso.isomorphic and iso.residual <= 1e-8)
    acceptance(3, "identification at T=14 isomorphic to the true system", ok,
               f"n={res.system.n} lag={lag(res.system)} residual={resid:.1e} iso_residual={iso.residual:.1e}")
    assert ok


def test_criterion_4_identify_T5(acceptance):
    tr = rx.trajectory(5)
    res = identify_minimal(tr)
    resid = state_residual(res.system, res.state, tr)
    canonical_ok = (lag(res.system), res.system.n) == (1, 2) and resid <= 1e-9
    hand = identify_minimal(tr, ladder=build_ladder(tr, bases=rx.BASIS_T5))
    sys_err = float(np.max(np.abs(hand.system.matrix() - rx.SYSTEM_T5.matrix())))
    state_err = float(np.max(np.abs(hand.state.x - rx.STATE_T5)))
    ok = canonical_ok and sys_err <= 1e-9 and state_err <= 1e-9
    acceptance(4, "identification at T=5, injected basis reproduces the hand example", ok,
               f"residual={resid:.1e} system_err={sys_err:.1e} state_err={state_err:.1e}")
    assert ok


def test_criterion_5_perturbation(acceptance):
    tr = rx.trajectory(5)
    out = perturb_explaining(rx.SYSTEM_T5, StateTrajectory(rx.STATE_T5),
                             PerturbationSpec(**rx.PERTURBATION_T5), tr)
    err = max(float(np.max(np.abs(a - b))) for a, b in (
        (out.A, rx.PERTURBED_T5.A), (out.B, rx.PERTURBED_T5.B),
        (out.C, rx.PERTURBED_T5.C), (out.D, rx.PERTURBED_T5.D)))
    fits = explains(out, tr)[0]
    ok = err <= 1e-12 and fits
    acceptance(5, "perturbation golden test", ok, f"max_err={err:.1e} explains={fits}")
    assert ok


def test_criterion_6_simulation(acceptance):
    y, x = simulate(rx.TRUE_SYSTEM, rx.X0, rx.U)
    ok = np.array_equal(y, rx.Y) and np.array_equal(x, rx.X)
    acceptance(6, "simulation reproduces output and state exactly", ok,
               f"y_err={np.max(np.abs(y - rx.Y)):.0f} x_err={np.max(np.abs(x - rx.X)):.0f}")
    assert ok


def test_criterion_7_property_suite(acceptance):
    start = time.perf_counter()
    report = harness(200, HarnessCaps(n_max=5, m_max=3, p_max=3, T_max=40), seed=0)
    elapsed = time.perf_counter() - start
    total = sum(report["violations"].values())
    ok = total == 0 and elapsed < 30.0
    acceptance(7, "200 randomized trials without violations", ok,
               f"violations={total} informative={report['counts']['informative']} {elapsed:.1f}s")
    assert total == 0, report["violations"]
    assert elapsed < 30.0


def _random_matrix(rng):
    rows, cols = int(rng.integers(1, 9)), int(rng.integers(1, 9))
    r = int(rng.integers(0, min(rows, cols) + 1))
    return rng.standard_normal((rows, r)) @ rng.standard_normal((r, cols)), r


def test_criterion_8_linear_algebra(acceptance):
    rng = np.random.default_rng(2024)
    failures = []
    for i in range(100):
        M, r = _random_matrix(rng)
        rows = M.shape[0]
        lk = left_kernel(M)
        if lk.dim + rank(M) != rows or rank(M) != r:
            failures.append((i, "rank-nullity"))
        # complement of a random subspace of lk inside lk reconstructs lk
        if lk.dim:
            k = int(rng.integers(0, lk.dim + 1))
            inner = RowSubspace.span(rng.standard_normal((k, lk.dim)) @ lk.basis) if k else RowSubspace.zero(rows)
            comp = complement_in(inner, lk)
            if rank(np.vstack([inner.basis, comp.basis])) != lk.dim:
                failures.append((i, "complement"))
        # targets in the row space of M give zero residual
        target = rng.standard_normal((3, rows)) @ M
        _, resid = lstsq_rows(target, M)
        if resid > 1e-9:
            failures.append((i, "lstsq", resid))
    acceptance(8, "rank-nullity, complement, lstsq on 100 random matrices", not failures,
               f"{len(failures)} failures")
    assert not failures, failures
