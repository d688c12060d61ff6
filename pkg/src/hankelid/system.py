"""Input-state-output systems ``x+ = Ax + Bu, y = Cx + Du`` and their analysis."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import IOTrajectory, StateTrajectory, build_J
from .errors import (
    FormatError, InternalInvariantViolated, InvalidInput, InvalidPerturbation,
    InvalidShape, NotObservable,
)
from .numerics import DEFAULT_TOL, Tolerance, as_matrix, left_kernel, pinv, rank, row_basis


def _shaped(M, shape, name) -> np.ndarray:
    # void blocks may arrive as [] or [[], []]; anything else must match exactly
    M = np.asarray(M, dtype=float)
    if M.size == 0 and 0 in shape:
        return np.zeros(shape)
    if M.shape != shape:
        raise InvalidShape(f"{name} must be {shape[0]}x{shape[1]}, got {M.shape}")
    return M


@dataclass(frozen=True, eq=False)
class IsoSystem:
    A: np.ndarray = field(repr=False)
    B: np.ndarray = field(repr=False)
    C: np.ndarray = field(repr=False)
    D: np.ndarray = field(repr=False)

    def __post_init__(self):
        D = as_matrix(self.D, "D")
        p, m = D.shape
        A = np.asarray(self.A, dtype=float)
        n = A.shape[0] if A.size else 0
        A = _shaped(A, (n, n), "A")
        B = _shaped(self.B, (n, m), "B")
        C = _shaped(self.C, (p, n), "C")
        if m < 1 or p < 1:
            raise InvalidShape("systems need m >= 1 and p >= 1")
        for name, M in (("A", A), ("B", B), ("C", C), ("D", D)):
            if not np.all(np.isfinite(M)):
                raise InvalidInput(f"{name} has non-finite entries")
            M = M.copy()
            M.setflags(write=False)
            object.__setattr__(self, name, M)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.D.shape[1]

    @property
    def p(self) -> int:
        return self.D.shape[0]

    def __repr__(self):
        return f"IsoSystem(n={self.n}, m={self.m}, p={self.p})"

    def matrix(self) -> np.ndarray:
        """The block matrix ``[[A, B], [C, D]]``."""
        return np.block([[self.A, self.B], [self.C, self.D]])

    @classmethod
    def from_matrix(cls, M, n: int, m: int) -> "IsoSystem":
        M = np.asarray(M, dtype=float)
        return cls(M[:n, :n], M[:n, n:n + m], M[n:, :n], M[n:, n:n + m])


@dataclass(frozen=True)
class LagStructure:
    """``rho[0]`` is ``rho_{-1} = p``; ``rho[k+1]`` is ``rho_k`` for ``k`` in ``[0, n]``."""

    rho: tuple

    def __getitem__(self, k: int) -> int:
        """``rho_k`` for ``k >= -1`` (zero beyond the stored range)."""
        if k < -1:
            raise IndexError(k)
        return self.rho[k + 1] if k + 1 < len(self.rho) else 0


def observability_matrix(sys: IsoSystem, k: int) -> np.ndarray:
    """``Omega_k = col(C, CA, ..., CA^k)``; ``Omega_{-1}`` is ``0 x n``."""
    if k < -1:
        raise InvalidInput("k must be >= -1")
    blocks = [np.zeros((0, sys.n))]
    CAk = sys.C
    for _ in range(k + 1):
        blocks.append(CAk)
        CAk = CAk @ sys.A
    return np.vstack(blocks)


def controllability_matrix(sys: IsoSystem, k: int) -> np.ndarray:
    """``Gamma_k = [A^k B, ..., AB, B]``; ``Gamma_{-1}`` is ``n x 0``."""
    if k < -1:
        raise InvalidInput("k must be >= -1")
    blocks = [np.zeros((sys.n, 0))]
    AkB = sys.B
    for _ in range(k + 1):
        blocks.insert(0, AkB)
        AkB = sys.A @ AkB
    return np.hstack(blocks)


def toeplitz_matrix(sys: IsoSystem, k: int) -> np.ndarray:
    """``Theta_k``: lower block-triangular Toeplitz of the first ``k+1`` Markov parameters."""
    Theta = np.zeros((0, 0))
    for j in range(k + 1):
        Gamma_prev = controllability_matrix(sys, j - 1)
        top = np.hstack([Theta, np.zeros((j * sys.p, sys.m))])
        bottom = np.hstack([sys.C @ Gamma_prev, sys.D])
        Theta = np.vstack([top, bottom])
    return Theta


def structured_matrices(sys: IsoSystem, k: int):
    """Return ``(Omega_k, Gamma_k, Theta_k, Phi_k, Psi_k)``.

    ``Phi_k`` and ``Psi_k`` satisfy ``H_k = Phi_k J_k(x)`` and ``G_k = Psi_k J_k(x)``
    for any state ``x`` of an explaining system.
    """
    if k < 0:
        raise InvalidInput("k must be >= 0")
    n, m, p = sys.n, sys.m, sys.p
    Omega = observability_matrix(sys, k)
    Gamma = controllability_matrix(sys, k)
    Theta = toeplitz_matrix(sys, k)
    Phi = np.block([
        [np.zeros(((k + 1) * m, n)), np.eye((k + 1) * m)],
        [Omega, Theta],
    ])
    Psi = np.vstack([
        np.hstack([np.zeros(((k + 1) * m, n)), np.eye((k + 1) * m)]),
        np.hstack([observability_matrix(sys, k - 1), toeplitz_matrix(sys, k - 1),
                   np.zeros((k * p, m))]),
    ])
    return Omega, Gamma, Theta, Phi, Psi


def _observable_ranks(sys: IsoSystem, tol: Tolerance = DEFAULT_TOL) -> list[int]:
    """``rank Omega_k`` for ``k = 0, 1, ...`` until the rank stops growing.

    Uses ``rs Omega_k = rs col(C, W A)`` with ``W`` an orthonormal basis of
    ``rs Omega_{k-1}``, so no power of ``A`` is ever formed. Raw powers let a
    single fast mode swamp the rank cutoff.
    """
    ranks = []
    W = np.zeros((0, sys.n))
    while True:
        W = row_basis(np.vstack([sys.C, W @ sys.A]), tol)
        if ranks and W.shape[0] == ranks[-1]:
            return ranks
        ranks.append(W.shape[0])
        if W.shape[0] == sys.n:
            return ranks


def lag_structure(sys: IsoSystem, tol: Tolerance = DEFAULT_TOL) -> LagStructure:
    if sys.n == 0:
        return LagStructure((sys.p,))
    ranks = _observable_ranks(sys, tol)
    return LagStructure((sys.p,) + tuple(b - a for a, b in zip([0] + ranks, ranks)))


def lag(sys: IsoSystem, tol: Tolerance = DEFAULT_TOL) -> int:
    """Smallest ``k >= 0`` with ``rank Omega_k == rank Omega_{k-1}``."""
    if sys.n == 0:
        return 0
    ranks = _observable_ranks(sys, tol)
    return len(ranks) if ranks[0] else 0


def is_observable(sys: IsoSystem, tol: Tolerance = DEFAULT_TOL) -> bool:
    return sys.n == 0 or _observable_ranks(sys, tol)[-1] == sys.n


def is_controllable(sys: IsoSystem, tol: Tolerance = DEFAULT_TOL) -> bool:
    dual = IsoSystem(sys.A.T, sys.C.T, sys.B.T, sys.D.T)
    return sys.n == 0 or _observable_ranks(dual, tol)[-1] == sys.n


def simulate(sys: IsoSystem, x0, u):
    """Run the recursion from ``x0`` under input ``u`` (``m x T``).

    Returns ``(y, x)`` with ``y`` of shape ``p x T`` and ``x`` of shape ``n x (T+1)``.
    """
    u = as_matrix(u, "u")
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if x0.shape[0] != sys.n:
        raise InvalidShape(f"x0 has length {x0.shape[0]}, system has n={sys.n}")
    if u.shape[0] != sys.m:
        raise InvalidShape(f"input has {u.shape[0]} channels, system has m={sys.m}")
    T = u.shape[1]
    x = np.zeros((sys.n, T + 1))
    x[:, 0] = x0
    for t in range(T):
        x[:, t + 1] = sys.A @ x[:, t] + sys.B @ u[:, t]
    y = sys.C @ x[:, :T] + sys.D @ u
    return y, x


def state_residual(sys: IsoSystem, x, traj: IOTrajectory) -> float:
    """Max-abs violation of ``[x_[1,T]; y] = [[A, B], [C, D]] [x_[0,T-1]; u]``."""
    x = x.x if isinstance(x, StateTrajectory) else np.asarray(x, dtype=float)
    T = traj.T
    if x.shape != (sys.n, T + 1):
        raise InvalidShape(f"state must be {sys.n} x {T + 1}, got {x.shape}")
    lhs = np.vstack([x[:, 1:], traj.y])
    rhs = sys.matrix() @ np.vstack([x[:, :T], traj.u])
    return float(np.max(np.abs(lhs - rhs), initial=0.0))


def _stacked_state(sys: IsoSystem, traj: IOTrajectory, tol: Tolerance) -> np.ndarray:
    # all of x_0..x_T as unknowns; one block row per state update and output equation
    n, T = sys.n, traj.T
    N = n * (T + 1)
    rows_x = np.zeros((n * T, N))
    rows_y = np.zeros((sys.p * T, N))
    for t in range(T):
        rows_x[t * n:(t + 1) * n, t * n:(t + 1) * n] = -sys.A
        rows_x[t * n:(t + 1) * n, (t + 1) * n:(t + 2) * n] = np.eye(n)
        rows_y[t * sys.p:(t + 1) * sys.p, t * n:(t + 1) * n] = sys.C
    M = np.vstack([rows_x, rows_y])
    rhs = np.concatenate([(sys.B @ traj.u).T.ravel(), (traj.y - sys.D @ traj.u).T.ravel()])
    sol = pinv(M, tol) @ rhs
    return sol.reshape(T + 1, n).T


def explains(sys: IsoSystem, traj: IOTrajectory, tol: Tolerance = DEFAULT_TOL):
    """Decide whether ``sys`` explains ``traj``.

    Returns ``(True, state)`` with a witness :class:`StateTrajectory`, or
    ``(False, None)``.
    """
    if (sys.m, sys.p) != (traj.m, traj.p):
        raise InvalidShape("system and trajectory dimensions differ")
    T, n = traj.T, sys.n
    if n == 0:
        ok = np.max(np.abs(traj.y - sys.D @ traj.u)) <= tol.residual_abs
        return (True, StateTrajectory(np.zeros((0, T + 1)))) if ok else (False, None)

    candidates = []
    if is_observable(sys, tol):
        # y - (free response to u) = Omega_{T-1} x_0
        _, x_forced = simulate(sys, np.zeros(n), traj.u)
        y_forced = sys.C @ x_forced[:, :T] + sys.D @ traj.u
        Omega = observability_matrix(sys, T - 1)
        x0 = pinv(Omega, tol) @ (traj.y - y_forced).T.ravel()
        _, x = simulate(sys, x0, traj.u)
        candidates.append(x)
    candidates.append(_stacked_state(sys, traj, tol))
    for x in candidates:
        if state_residual(sys, x, traj) <= tol.residual_abs:
            return True, StateTrajectory(x)
    return False, None


DEFAULT_ISO_ATOL = 1e-8


@dataclass(frozen=True)
class IsomorphismCheck:
    isomorphic: bool
    S: np.ndarray | None = field(default=None, repr=False)
    residual: float = float("inf")

    def __iter__(self):
        yield self.isomorphic
        yield self.S


def is_isomorphic(s1: IsoSystem, s2: IsoSystem, tol: Tolerance = DEFAULT_TOL,
                  atol: float = DEFAULT_ISO_ATOL) -> IsomorphismCheck:
    """Test for a nonsingular ``S`` with ``S A2 = A1 S``, ``S B2 = B1``, ``C1 S = C2``.

    ``S`` maps coordinates of ``s2`` into those of ``s1``; ``D1 == D2`` is also
    required. Unpacks as ``(isomorphic, S)``; ``residual`` is the largest
    relation mismatch.
    """
    if (s1.m, s1.p) != (s2.m, s2.p):
        raise InvalidShape("systems have different input/output dimensions")
    for s in (s1, s2):
        if not is_observable(s, tol):
            raise NotObservable("isomorphism test needs observable systems")
    if s1.n != s2.n:
        return IsomorphismCheck(False)
    dD = float(np.max(np.abs(s1.D - s2.D)))
    n = s1.n
    if n == 0:
        return IsomorphismCheck(dD <= atol, np.zeros((0, 0)), dD)
    O1 = observability_matrix(s1, n - 1)
    O2 = observability_matrix(s2, n - 1)
    S = pinv(O1, tol) @ O2
    if rank(S, tol) < n:
        return IsomorphismCheck(False, S, float("inf"))
    resid = max(
        dD,
        float(np.max(np.abs(S @ s2.A - s1.A @ S))),
        float(np.max(np.abs(S @ s2.B - s1.B))),
        float(np.max(np.abs(s1.C @ S - s2.C))),
    )
    return IsomorphismCheck(resid <= atol, S, resid)


@dataclass(frozen=True)
class PerturbationSpec:
    """Row vectors ``xi`` (length n) and ``etas[0..d]`` (length m each), column ``zeta`` (length n)."""

    xi: np.ndarray
    etas: tuple
    zeta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "xi", np.asarray(self.xi, dtype=float).reshape(-1))
        object.__setattr__(self, "etas", tuple(np.asarray(e, dtype=float).reshape(-1) for e in self.etas))
        object.__setattr__(self, "zeta", np.asarray(self.zeta, dtype=float).reshape(-1))


def perturbation_terms(sys: IsoSystem, spec: PerturbationSpec):
    """Return ``(A_hat, E)`` where ``E[i+1]`` is ``E_i`` for ``i`` in ``[-1, d]``."""
    zeta = spec.zeta.reshape(-1, 1)
    A_hat = sys.A + zeta @ spec.xi.reshape(1, -1)
    d = len(spec.etas) - 1
    E = {d: np.zeros((sys.n, sys.m))}
    for i in range(d, -1, -1):
        E[i - 1] = A_hat @ E[i] + zeta @ spec.etas[i].reshape(1, -1)
    return A_hat, [E[i] for i in range(-1, d + 1)]


def perturb_explaining(sys: IsoSystem, x: StateTrajectory, spec: PerturbationSpec,
                       traj: IOTrajectory, tol: Tolerance = DEFAULT_TOL) -> IsoSystem:
    """Build a second explaining system with the same lag and state dimension.

    Given an observable explaining system with lag ``l >= 1`` and a state
    ``x`` for it, ``[xi, eta_0, ..., eta_d]`` in the left kernel of
    ``J_d(x)`` (``d = min(l, T-1)``) and a nonzero ``zeta`` with
    ``C A^i zeta = 0`` for ``i < l-1``, the result is::

        A_hat = A + zeta xi        B_hat = B + E_{-1}
        C_hat = C                  D_hat = D + C E_0

    with ``E_d = 0`` and ``E_{i-1} = A_hat E_i + zeta eta_i``.
    """
    n, m, T = sys.n, sys.m, traj.T
    ell = lag(sys, tol)
    if not is_observable(sys, tol):
        raise InvalidPerturbation("system must be observable")
    if not n >= ell >= 1:
        raise InvalidPerturbation(f"need n >= lag >= 1, got n={n}, lag={ell}")
    if state_residual(sys, x, traj) > tol.residual_abs:
        raise InvalidPerturbation("x is not a state for the system")
    d = min(ell, T - 1)
    if len(spec.etas) != d + 1:
        raise InvalidPerturbation(f"expected {d + 1} eta vectors, got {len(spec.etas)}")
    if spec.xi.shape != (n,) or spec.zeta.shape != (n,) or any(e.shape != (m,) for e in spec.etas):
        raise InvalidPerturbation("xi/zeta must have length n and each eta length m")
    w = np.concatenate([spec.xi, *spec.etas])
    if np.max(np.abs(w @ build_J(x, traj, d)), initial=0.0) > tol.residual_abs:
        raise InvalidPerturbation("[xi, eta_0..eta_d] is not in the left kernel of J_d(x)")
    if not np.any(np.abs(spec.zeta) > tol.residual_abs):
        raise InvalidPerturbation("zeta must be nonzero")
    if ell >= 2 and np.max(np.abs(observability_matrix(sys, ell - 2) @ spec.zeta)) > tol.residual_abs:
        raise InvalidPerturbation("C A^i zeta must vanish for i in [0, lag-2]")

    A_hat, E = perturbation_terms(sys, spec)
    out = IsoSystem(A_hat, sys.B + E[0], sys.C, sys.D + sys.C @ E[1])

    # explicit state for the new system: shift by the E_i terms, then run forward
    x_hat = np.zeros((n, T + 1))
    x_hat[:, :T - d + 1] = x.x[:, :T - d + 1]
    for i in range(d):
        x_hat[:, :T - d + 1] -= E[i + 1] @ traj.u[:, i:T - d + 1 + i]
    for t in range(T - d, T):
        x_hat[:, t + 1] = out.A @ x_hat[:, t] + out.B @ traj.u[:, t]
    if state_residual(out, x_hat, traj) > tol.residual_abs:
        raise InternalInvariantViolated("perturbed system does not explain the data")
    return out


# -- JSON ------------------------------------------------------------------

def _rows(M):
    return [[int(v) if float(v).is_integer() else float(v) for v in row] for row in M]


def system_to_json(sys: IsoSystem) -> dict:
    return {"n": sys.n, "m": sys.m, "p": sys.p,
            "A": _rows(sys.A), "B": _rows(sys.B), "C": _rows(sys.C), "D": _rows(sys.D)}


def system_from_json(obj: dict) -> IsoSystem:
    try:
        n, m, p = int(obj["n"]), int(obj["m"]), int(obj["p"])
        shapes = {"A": (n, n), "B": (n, m), "C": (p, n), "D": (p, m)}
        mats = {}
        for key, shape in shapes.items():
            M = np.array(obj[key], dtype=float)
            if M.size != shape[0] * shape[1]:
                raise InvalidInput(f"{key} should be {shape[0]}x{shape[1]}")
            mats[key] = M.reshape(shape)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InvalidInput):
            raise
        raise FormatError(f"bad system JSON: {exc}") from None
    return IsoSystem(**mats)


def load_system(path) -> IsoSystem:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"bad system JSON: {exc}") from None
    return system_from_json(obj)


def save_system(sys: IsoSystem, path) -> None:
    Path(path).write_text(json.dumps(system_to_json(sys)) + "\n")


def left_kernel_of_J(x: StateTrajectory, traj: IOTrajectory, k: int, tol: Tolerance = DEFAULT_TOL):
    """Convenience: ``lk J_k(x)``."""
    return left_kernel(build_J(x, traj, k), tol)


__all__ = [
    "IsoSystem", "LagStructure", "PerturbationSpec", "IsomorphismCheck",
    "observability_matrix", "controllability_matrix", "toeplitz_matrix",
    "structured_matrices", "lag", "lag_structure", "is_observable", "is_controllable",
    "simulate", "explains", "state_residual", "is_isomorphic", "perturb_explaining",
    "perturbation_terms", "system_to_json", "system_from_json", "load_system",
    "save_system", "left_kernel_of_J",
]
