"""Integers computed directly from the data: delta_k, q, l_min, n_min, lag bounds."""
from __future__ import annotations

from dataclasses import dataclass

from .data import IOTrajectory, build_G, build_H
from .errors import InvalidDepth, InvalidInput
from .numerics import DEFAULT_TOL, Tolerance, rank


@dataclass(frozen=True)
class DataInvariants:
    """``delta`` holds ``delta_{-1}, ..., delta_q``."""

    delta: tuple
    q: int

    @property
    def l_min(self) -> int:
        return self.q

    @property
    def n_min(self) -> int:
        return sum(self.delta[1:])

    def as_dict(self) -> dict:
        return {"delta": list(self.delta), "q": self.q, "l_min": self.l_min, "n_min": self.n_min}


@dataclass(frozen=True)
class PriorBounds:
    L_minus: int
    L_plus: int
    N_minus: int
    N_plus: int

    def __post_init__(self):
        L_m, L_p, N_m, N_p = self.L_minus, self.L_plus, self.N_minus, self.N_plus
        if min(L_m, L_p, N_m, N_p) < 0:
            raise InvalidInput("bounds must be nonnegative")
        if not (L_m <= L_p <= N_p and L_m <= N_m <= N_p):
            raise InvalidInput(
                f"need L- <= L+ <= N+ and L- <= N- <= N+, got "
                f"L-={L_m}, L+={L_p}, N-={N_m}, N+={N_p}")


@dataclass(frozen=True)
class LagBounds:
    L_d: int
    L_a: int


def delta_k(traj: IOTrajectory, k: int, tol: Tolerance = DEFAULT_TOL) -> int:
    if k == -1:
        return traj.p
    if not 0 <= k <= traj.T - 1:
        raise InvalidDepth(f"k={k} outside [-1, {traj.T - 1}]")
    return rank(build_H(traj, k), tol) - rank(build_G(traj, k), tol)


def delta_sequence(traj: IOTrajectory, tol: Tolerance = DEFAULT_TOL, up_to: int | None = None) -> tuple:
    """``(delta_{-1}, ..., delta_{up_to})``; ``up_to`` defaults to ``T-1``."""
    up_to = traj.T - 1 if up_to is None else up_to
    if not -1 <= up_to <= traj.T - 1:
        raise InvalidDepth(f"up_to={up_to} outside [-1, {traj.T - 1}]")
    return tuple(delta_k(traj, k, tol) for k in range(-1, up_to + 1))


def invariants(traj: IOTrajectory, tol: Tolerance = DEFAULT_TOL) -> DataInvariants:
    deltas = [traj.p]
    for k in range(traj.T):
        deltas.append(delta_k(traj, k, tol))
        if deltas[-1] == 0:
            return DataInvariants(tuple(deltas), k)
    # delta_{T-1} = 0 whenever u != 0, so this only triggers on tolerance trouble
    raise InvalidInput("no k with delta_k = 0; check the rank tolerance")


def lag_bounds(inv: DataInvariants, bounds: PriorBounds) -> LagBounds:
    L_d = bounds.N_plus - inv.n_min + inv.l_min
    return LagBounds(L_d, min(bounds.L_plus, L_d))
