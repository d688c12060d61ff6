"""Informativity tests and the randomized consistency harness."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .data import IOTrajectory, StateTrajectory, build_H, build_J, hankel
from .errors import HankelIdError, InvalidInput
from .identification import identify_minimal
from .invariants import PriorBounds, delta_sequence, invariants, lag_bounds
from .numerics import DEFAULT_TOL, Tolerance, left_kernel, rank
from .system import (
    IsoSystem, PerturbationSpec, explains, is_controllable, is_isomorphic, is_observable,
    lag, lag_structure, observability_matrix, perturb_explaining, simulate,
)


@dataclass(frozen=True)
class InformativityVerdict:
    informative: bool
    lag_lb: bool
    state_lb: bool
    length: bool
    rank: bool
    L_d: int
    L_a: int
    l_min: int
    n_min: int
    predicted_true_lag: int | None = None
    predicted_true_dim: int | None = None

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class PELemmaVerdict:
    applicable: bool
    pe_ok: bool
    length_ok: bool
    concluded_informative: bool
    notes: tuple = ()

    def as_dict(self) -> dict:
        d = asdict(self)
        d["notes"] = list(self.notes)
        return d


def check_main(traj: IOTrajectory, bounds: PriorBounds, tol: Tolerance = DEFAULT_TOL) -> InformativityVerdict:
    """Necessary and sufficient test for informativity within the bounded class of minimal systems."""
    inv = invariants(traj, tol)
    lb = lag_bounds(inv, bounds)
    m, T, L_a = traj.m, traj.T, lb.L_a
    target = (L_a + 1) * m + inv.n_min
    lag_ok = inv.l_min >= bounds.L_minus
    state_ok = inv.n_min >= bounds.N_minus
    length_ok = T >= L_a + target
    rank_ok = 0 <= L_a <= T - 1 and rank(build_H(traj, L_a), tol) == target
    ok = lag_ok and state_ok and length_ok and rank_ok
    return InformativityVerdict(
        ok, lag_ok, state_ok, length_ok, rank_ok, lb.L_d, L_a, inv.l_min, inv.n_min,
        inv.l_min if ok else None, inv.n_min if ok else None)


def check_fundamental_lemma(traj: IOTrajectory, bounds: PriorBounds,
                            tol: Tolerance = DEFAULT_TOL) -> PELemmaVerdict:
    """Sufficient test: input persistently exciting of order ``L+ + N+`` and enough samples.

    The underlying result assumes the true lag is at least one. That is not
    observable from data, so ``l_min >= 1`` (which implies it) stands in.
    """
    m, T = traj.m, traj.T
    order = bounds.L_plus + bounds.N_plus
    applicable = invariants(traj, tol).l_min >= 1
    notes = [] if applicable else ["l_min = 0, so a positive true lag cannot be certified"]
    length_ok = T >= order - 1 + order * m
    depth = order - 1
    if depth > T - 1:
        pe_ok = False
        notes.append(f"input Hankel depth {depth} exceeds T-1 = {T - 1}; excitation not evaluated")
    else:
        pe_ok = depth < 0 or rank(hankel(traj.u, depth), tol) == order * m
    return PELemmaVerdict(applicable, pe_ok, length_ok, applicable and pe_ok and length_ok, tuple(notes))


def check_fixed_order(traj: IOTrajectory, l_true: int, n_true: int, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Informativity when lag and state dimension are known exactly."""
    if l_true < 1 or n_true < 0:
        raise InvalidInput(f"need l_true >= 1 and n_true >= 0, got {l_true}, {n_true}")
    target = (l_true + 1) * traj.m + n_true
    if traj.T < l_true + target:
        return False
    return rank(build_H(traj, l_true), tol) == target


# -- harness ---------------------------------------------------------------

@dataclass(frozen=True)
class HarnessCaps:
    n_max: int = 5
    m_max: int = 3
    p_max: int = 3
    T_max: int = 40
    # rejecting unstable draws keeps long simulations well scaled for the rank cutoff
    max_spectral_radius: float = 1.0

    def __post_init__(self):
        if min(self.n_max, self.m_max, self.p_max, self.T_max) < 1:
            raise InvalidInput("harness caps must be positive")


VIOLATION_KEYS = (
    "rho_ge_delta",
    "lag_lower_bound",
    "state_bounds",
    "identification",
    "informative_implies_truth",
    "informative_perturbation",
    "pe_implies_main",
    "witness_explains",
)
COUNT_KEYS = (
    "informative",
    "pe_concluded",
    "witness_attempted",
    "witness_explains",
    "witness_non_isomorphic",
    "no_witness_attempted",
)


def random_minimal_system(rng: np.random.Generator, n: int, m: int, p: int,
                          max_radius: float = 1.0, tol: Tolerance = DEFAULT_TOL) -> IsoSystem:
    while True:
        A, B = rng.uniform(-1, 1, (n, n)), rng.uniform(-1, 1, (n, m))
        C, D = rng.uniform(-1, 1, (p, n)), rng.uniform(-1, 1, (p, m))
        if np.max(np.abs(np.linalg.eigvals(A))) > max_radius:
            continue
        sys = IsoSystem(A, B, C, D)
        if is_observable(sys, tol) and is_controllable(sys, tol):
            return sys


def random_bounds(rng: np.random.Generator, l_true: int, n_true: int, slack: int = 2) -> PriorBounds:
    """Valid prior bounds that contain ``(l_true, n_true)``."""
    L_minus = int(rng.integers(0, l_true + 1))
    N_minus = int(rng.integers(L_minus, n_true + 1))  # l_true <= n_true, so this range is nonempty
    N_plus = n_true + int(rng.integers(0, slack + 1))
    L_plus = int(rng.integers(l_true, min(l_true + slack, N_plus) + 1))
    return PriorBounds(L_minus, L_plus, N_minus, N_plus)


def _zeta_candidates(sys: IsoSystem, ell: int, tol: Tolerance) -> np.ndarray:
    """Rows spanning ``{z : C A^i z = 0, i < ell-1}``."""
    if ell < 2:
        return np.eye(sys.n)
    Om = observability_matrix(sys, ell - 2)
    return left_kernel(Om.T, tol).basis


def _perturbation_attempts(sys: IsoSystem, x: StateTrajectory, traj: IOTrajectory, tol: Tolerance):
    """Yield perturbed explaining systems built from ``lk J_d(x)`` (one per kernel vector)."""
    ell = lag(sys, tol)
    if ell < 1 or sys.n < ell:
        return
    d = min(ell, traj.T - 1)
    W = left_kernel(build_J(x, traj, d), tol).basis
    Z = _zeta_candidates(sys, ell, tol)
    if W.shape[0] == 0 or Z.shape[0] == 0:
        return
    n, m = sys.n, sys.m
    for w in W:
        spec = PerturbationSpec(w[:n], tuple(w[n + i * m:n + (i + 1) * m] for i in range(d + 1)), Z[0])
        yield perturb_explaining(sys, x, spec, traj, tol)


def nonuniqueness_witness(traj: IOTrajectory, tol: Tolerance = DEFAULT_TOL):
    """A second explaining system with ``l_min`` and ``n_min``, or ``None``.

    Perturbs the identified minimal system along a vector in the left kernel
    of ``J_d(x)``. Returns ``(identified, witness)``.
    """
    ident = identify_minimal(traj, tol)
    for alt in _perturbation_attempts(ident.system, ident.state, traj, tol):
        return ident.system, alt
    return None


def run_trial(child_seed, caps: HarnessCaps = HarnessCaps(), tol: Tolerance = DEFAULT_TOL) -> dict:
    """One randomized trial; returns violation flags, event counts and a short description."""
    rng = np.random.default_rng(child_seed)
    n = int(rng.integers(1, caps.n_max + 1))
    m = int(rng.integers(1, caps.m_max + 1))
    p = int(rng.integers(1, caps.p_max + 1))
    T = int(rng.integers(1, caps.T_max + 1))
    true = random_minimal_system(rng, n, m, p, caps.max_spectral_radius, tol)
    u = rng.standard_normal((m, T))
    x0 = rng.standard_normal(n)
    y, _ = simulate(true, x0, u)
    traj = IOTrajectory(u, y)
    l_true = lag(true, tol)
    bounds = random_bounds(rng, l_true, n)

    bad = dict.fromkeys(VIOLATION_KEYS, False)
    cnt = dict.fromkeys(COUNT_KEYS, 0)

    deltas = delta_sequence(traj, tol)
    rho = lag_structure(true, tol)
    bad["rho_ge_delta"] = any(rho[k] < deltas[k + 1] for k in range(-1, T))
    inv = invariants(traj, tol)
    if T >= l_true + 1 and inv.q > l_true:
        bad["lag_lower_bound"] = True
    if n < inv.n_min or n - inv.n_min < l_true - inv.q:
        bad["state_bounds"] = True

    result = None
    try:
        result = identify_minimal(traj, tol)
        fits, _ = explains(result.system, traj, tol)
        s = result.system
        if not (fits and s.n == inv.n_min and lag(s, tol) == inv.q and is_observable(s, tol)):
            bad["identification"] = True
    except HankelIdError:
        bad["identification"] = True

    verdict = check_main(traj, bounds, tol)
    pe = check_fundamental_lemma(traj, bounds, tol)
    cnt["informative"] = int(verdict.informative)
    cnt["pe_concluded"] = int(pe.concluded_informative)
    if pe.concluded_informative and not verdict.informative:
        bad["pe_implies_main"] = True

    if verdict.informative:
        truth_ok = inv.l_min == l_true and inv.n_min == n
        if result is not None and truth_ok:
            try:
                truth_ok = is_isomorphic(result.system, true, tol).isomorphic
            except HankelIdError:
                truth_ok = False
        bad["informative_implies_truth"] = not truth_ok or result is None
        if result is not None:
            try:
                for alt in _perturbation_attempts(result.system, result.state, traj, tol):
                    if not is_isomorphic(alt, result.system, tol).isomorphic:
                        bad["informative_perturbation"] = True
            except HankelIdError:
                pass  # a rejected perturbation is the expected outcome
    elif result is not None and not verdict.rank and verdict.length and inv.q >= 1:
        cnt["witness_attempted"] = 1
        try:
            for alt in _perturbation_attempts(result.system, result.state, traj, tol):
                if explains(alt, traj, tol)[0]:
                    cnt["witness_explains"] = 1
                    if not is_isomorphic(alt, result.system, tol).isomorphic:
                        cnt["witness_non_isomorphic"] = 1
                else:
                    bad["witness_explains"] = True
                break
        except HankelIdError:
            pass
    else:
        cnt["no_witness_attempted"] = 1

    return {"violations": bad, "counts": cnt,
            "trial": {"n": n, "m": m, "p": p, "T": T, "lag": l_true,
                      "bounds": [bounds.L_minus, bounds.L_plus, bounds.N_minus, bounds.N_plus]}}


def _run_indexed(args):
    return run_trial(*args)


def harness(trial_count: int, caps: HarnessCaps = HarnessCaps(), seed: int = 0,
            tol: Tolerance = DEFAULT_TOL, workers: int | None = None) -> dict:
    """Aggregate ``trial_count`` independent trials; identical output for any ``workers``."""
    if trial_count < 0:
        raise InvalidInput("trial count must be nonnegative")
    children = np.random.SeedSequence(seed).spawn(trial_count)
    jobs = [(c, caps, tol) for c in children]
    if workers and workers > 1 and trial_count > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_indexed, jobs, chunksize=max(1, trial_count // (4 * workers))))
    else:
        results = [_run_indexed(j) for j in jobs]
    violations = {k: sum(r["violations"][k] for r in results) for k in VIOLATION_KEYS}
    counts = {k: sum(r["counts"][k] for r in results) for k in COUNT_KEYS}
    failing = [{"trial": i, "keys": [k for k in VIOLATION_KEYS if r["violations"][k]], **r["trial"]}
               for i, r in enumerate(results) if any(r["violations"].values())]
    return {"trials": trial_count, "seed": seed, "caps": asdict(caps),
            "violations": violations, "counts": counts, "failing_trials": failing}
