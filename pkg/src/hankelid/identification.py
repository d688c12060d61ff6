"""Annihilator ladder, state construction and the minimal explaining system.

The left kernel of ``H_k`` splits as::

    lk H_k = S_k (+) sigma(lk H_{k-1}) + (lk G_k x 0_p)

and the ladder keeps a basis ``R_k`` of each complement ``S_k`` up to the
first ``q`` with ``delta_q = 0``. Each ``R_i`` is partitioned as
``[Q_{i,0} .. Q_{i,i} | P_{i,0} .. P_{i,i}]`` (input weights, then output
weights); the state is assembled from these blocks by a shift recursion.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import IOTrajectory, StateTrajectory, build_G, build_H
from .errors import IdentificationFailed, InternalInvariantViolated
from .invariants import DataInvariants
from .numerics import (
    DEFAULT_TOL, RowSubspace, Tolerance, complement_in, left_kernel, lstsq_rows,
    rank, sigma_shift, subspace_sum,
)
from .system import IsoSystem, is_observable, lag


@dataclass(frozen=True)
class AnnihilatorLadder:
    m: int
    p: int
    delta: tuple  # delta_{-1}, ..., delta_q
    bases: tuple = field(repr=False)  # R_0, ..., R_q

    @property
    def q(self) -> int:
        return len(self.bases) - 1

    @property
    def dims(self) -> tuple:
        return tuple(R.shape[0] for R in self.bases)

    def Q(self, i: int, j: int) -> np.ndarray:
        return self.bases[i][:, j * self.m:(j + 1) * self.m]

    def P(self, i: int, j: int) -> np.ndarray:
        off = (i + 1) * self.m + j * self.p
        return self.bases[i][:, off:off + self.p]

    @property
    def Pi(self) -> np.ndarray:
        """``col(P_{0,0}, P_{1,1}, ..., P_{q,q})``, square of size ``p``."""
        return np.vstack([self.P(i, i) for i in range(self.q + 1)])

    @property
    def invariants(self) -> DataInvariants:
        return DataInvariants(self.delta, self.q)


@dataclass(frozen=True)
class IdentificationResult:
    system: IsoSystem
    state: StateTrajectory
    invariants: DataInvariants
    residual: float
    ladder: AnnihilatorLadder = field(repr=False)


def _ladder_step_spaces(traj: IOTrajectory, k: int, lkH_prev, tol: Tolerance):
    """Return ``(lk H_k, sigma lk H_{k-1} + lk G_k x 0_p, delta_k)``."""
    H, G = build_H(traj, k), build_G(traj, k)
    lkH = left_kernel(H, tol)
    lkG0 = left_kernel(G, tol).pad_zeros(traj.p)
    inner = lkG0 if k == 0 else subspace_sum(sigma_shift(lkH_prev, traj.m, traj.p), lkG0, tol)
    delta = (H.shape[0] - lkH.dim) - (G.shape[0] - lkG0.dim)
    return lkH, inner, delta


def _check_pi(ladder: AnnihilatorLadder, tol: Tolerance) -> AnnihilatorLadder:
    Pi = ladder.Pi
    if Pi.shape != (ladder.p, ladder.p) or rank(Pi, tol) < ladder.p:
        raise InternalInvariantViolated(
            f"stacked output weights have shape {Pi.shape} and are not invertible")
    return ladder


def build_ladder(traj: IOTrajectory, tol: Tolerance = DEFAULT_TOL,
                 bases: dict | None = None) -> AnnihilatorLadder:
    """Compute bases ``R_0..R_q`` of the complements ``S_0..S_q``.

    ``bases`` may override ``R_i`` for chosen ``i`` with hand-picked bases;
    every override is checked to span a valid complement.
    """
    bases = bases or {}
    deltas, Rs = [traj.p], []
    lkH = None
    for k in range(traj.T):
        lkH, inner, delta = _ladder_step_spaces(traj, k, lkH, tol)
        s_k = deltas[-1] - delta
        if k in bases:
            R = np.asarray(bases[k], dtype=float).reshape(-1, (k + 1) * (traj.m + traj.p))
            if R.shape[0] != s_k:
                raise InternalInvariantViolated(f"supplied R_{k} has {R.shape[0]} rows, expected {s_k}")
            if not lkH.contains(R, tol) or rank(np.vstack([inner.basis, R]), tol) != inner.dim + s_k:
                raise InternalInvariantViolated(f"supplied R_{k} does not span a complement")
        else:
            S = complement_in(inner, lkH, tol)
            if S.dim != s_k:
                raise InternalInvariantViolated(
                    f"dim S_{k} = {S.dim} but delta_{k - 1} - delta_{k} = {s_k}")
            R = S.basis
        deltas.append(delta)
        Rs.append(R)
        if delta == 0:
            break
    else:
        raise InternalInvariantViolated("delta_k never reached zero")
    return _check_pi(AnnihilatorLadder(traj.m, traj.p, tuple(deltas), tuple(Rs)), tol)


def construct_state(traj: IOTrajectory, ladder: AnnihilatorLadder,
                    tol: Tolerance = DEFAULT_TOL) -> StateTrajectory:
    """Assemble ``x_[0,T]`` with ``sum_i i*s_i = n_min`` rows from the ladder.

    For ``i`` in ``[1, q]`` and ``k`` in ``[1, i]``::

        x^{i,k}_0     = sum_{j=k..i} Q_{i,j} u_{j-k} + P_{i,j} y_{j-k}
        x^{i,1}_[1,T] = -Q_{i,0} u - P_{i,0} y
        x^{i,k}_[1,T] = x^{i,k-1}_[0,T-1] - Q_{i,k-1} u - P_{i,k-1} y
    """
    u, y, T = traj.u, traj.y, traj.T
    blocks = []
    for i in range(1, ladder.q + 1):
        s = ladder.dims[i]
        prev = None
        for k in range(1, i + 1):
            x = np.zeros((s, T + 1))
            x[:, 0] = sum(ladder.Q(i, j) @ u[:, j - k] + ladder.P(i, j) @ y[:, j - k]
                          for j in range(k, i + 1))
            x[:, 1:] = -ladder.Q(i, k - 1) @ u - ladder.P(i, k - 1) @ y
            if prev is not None:
                x[:, 1:] += prev[:, :T]
            blocks.append(x)
            prev = x
    x = np.vstack(blocks) if blocks else np.zeros((0, T + 1))
    if x.shape[0] != sum(ladder.delta[1:]):
        raise InternalInvariantViolated("state dimension differs from n_min")
    # rs [x_[1,T]; y] must lie in rs [x_[0,T-1]; u]
    _, resid = lstsq_rows(np.vstack([x[:, 1:], y]), np.vstack([x[:, :T], u]), tol)
    if resid > tol.residual_abs:
        raise InternalInvariantViolated(f"constructed sequence is not a state (residual {resid:.3g})")
    return StateTrajectory(x)


def identify_minimal(traj: IOTrajectory, tol: Tolerance = DEFAULT_TOL,
                     ladder: AnnihilatorLadder | None = None) -> IdentificationResult:
    """Explaining system with ``n_min`` states and lag ``l_min``, computed from the data."""
    ladder = build_ladder(traj, tol) if ladder is None else ladder
    inv = ladder.invariants
    T = traj.T
    if ladder.q == 0:
        D = -np.linalg.solve(ladder.P(0, 0), ladder.Q(0, 0))
        system = IsoSystem(np.zeros((0, 0)), np.zeros((0, traj.m)), np.zeros((traj.p, 0)), D)
        state = StateTrajectory(np.zeros((0, T + 1)))
        residual = float(np.max(np.abs(traj.y - D @ traj.u)))
    else:
        state = construct_state(traj, ladder, tol)
        x = state.x
        M, residual = lstsq_rows(np.vstack([x[:, 1:], traj.y]), np.vstack([x[:, :T], traj.u]), tol)
        system = IsoSystem.from_matrix(M, state.n, traj.m)
    if residual > tol.residual_abs:
        raise IdentificationFailed(f"explaining residual {residual:.3g} exceeds {tol.residual_abs:g}")
    if lag(system, tol) != inv.l_min or not is_observable(system, tol):
        raise InternalInvariantViolated("identified system is not observable with lag l_min")
    return IdentificationResult(system, state, inv, residual, ladder)


def ladder_direct_sum_rank(traj: IOTrajectory, ladder: AnnihilatorLadder,
                           tol: Tolerance = DEFAULT_TOL) -> tuple:
    """``(rank of stacked sigma^{q-i} S_i and lk G_q x 0_p, dim lk H_q)``; equal for a valid ladder."""
    q, m, p = ladder.q, traj.m, traj.p
    parts = []
    for i, R in enumerate(ladder.bases):
        V = RowSubspace((i + 1) * (m + p), R) if R.size else RowSubspace.zero((i + 1) * (m + p))
        for _ in range(q - i):
            V = sigma_shift(V, m, p)
        parts.append(V.basis)
    parts.append(left_kernel(build_G(traj, q), tol).pad_zeros(p).basis)
    return rank(np.vstack(parts), tol), left_kernel(build_H(traj, q), tol).dim
