"""The 14-sample, two-input two-output example used in tests and scripts."""
import numpy as np

from .data import IOTrajectory
from .system import IsoSystem

U = np.array([
    [1, 1, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 1],
    [0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0],
], dtype=float)

Y = np.array([
    [2, 3, 2, 1, 0, 1, 2, 3, 3, 2, 2, 2, 3, 4],
    [1, 0, 0, 0, 1, 2, 2, 2, 2, 2, 2, 2, 2, 1],
], dtype=float)

X = np.array([
    [1, 2, 1, 1, 0, 1, 2, 2, 3, 2, 2, 2, 2, 3, 2],
    [1, 0, 0, 0, 1, 2, 2, 2, 2, 2, 2, 2, 2, 1, 0],
    [0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0],
], dtype=float)

X0 = np.array([1.0, 1.0, 0.0])

TRUE_SYSTEM = IsoSystem(
    A=[[0, 1, 0], [0, 0, 1], [0, 0, 0]],
    B=[[1, 0], [0, 1], [0, 1]],
    C=[[1, 0, 0], [0, 1, 0]],
    D=[[1, 0], [0, 0]],
)

# explaining system for the first five samples, and the basis of S_1 that yields it
SYSTEM_T5 = IsoSystem(
    A=[[-1, 0], [0, 0]],
    B=[[1, 1], [0, 1]],
    C=[[1, 0], [0, 1]],
    D=[[2, 0], [0, 0]],
)
BASIS_T5 = {1: np.array([
    [-3, -1, -2, 0, 1, 0, 1, 0],
    [0, -1, 0, 0, 0, 0, 0, 1],
], dtype=float)}
STATE_T5 = np.array([
    [0, 1, 0, 1, 0, 1],
    [1, 0, 0, 0, 1, 1],
], dtype=float)

BASIS_T14 = {
    1: np.array([[-1, 0, -1, 0, 0, -1, 1, 0]], dtype=float),
    2: np.array([[0, -1, 0, -1, 0, 0, 0, 0, 0, 0, 0, 1]], dtype=float),
}
STATE_T14 = np.array([
    [1, 2, 1, 1, 0, 1, 2, 2, 3, 2, 2, 2, 2, 3, 2],
    [0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0],
    [1, 0, 0, 0, 1, 2, 2, 2, 2, 2, 2, 2, 2, 1, 0],
], dtype=float)
SYSTEM_T14 = IsoSystem(
    A=[[0, 0, 1], [0, 0, 0], [0, 1, 0]],
    B=[[1, 0], [0, 1], [0, 1]],
    C=[[1, 0, 0], [0, 0, 1]],
    D=[[1, 0], [0, 0]],
)

# second explaining system for T=5, obtained by perturbing SYSTEM_T5
PERTURBATION_T5 = dict(xi=[-1, -1], etas=([0, 1], [1, 0]), zeta=[1, 1])
PERTURBED_T5 = IsoSystem(
    A=[[-2, -1], [-1, -1]],
    B=[[-2, 2], [-2, 2]],
    C=[[1, 0], [0, 1]],
    D=[[3, 0], [1, 0]],
)
PERTURBED_STATE_T5 = np.array([
    [-1, 0, -1, 1, 0, 1],
    [0, -1, -1, 0, 1, 1],
], dtype=float)

# (delta_{-1}, delta_0, delta_1, delta_2, l_min, n_min) per data length;
# entries past T-1 are reported as None
TABLE1 = {
    1: (2, 0, None, None, 0, 0),
    2: (2, 1, 0, None, 1, 1),
    **{T: (2, 2, 0, 0, 1, 2) for T in (3, 4, 5)},
    **{T: (2, 2, 1, 0, 2, 3) for T in range(6, 15)},
}

# (L_plus, N_plus) -> (L_d, L_a, prop2 cells for T=11..14, theorem cells for T=11..14)
TABLE2 = {
    (2, 3): (2, 2, (False, False, False, True), (True, True, True, True)),
    (2, 4): (3, 2, (False,) * 4, (True, True, True, True)),
    (2, 5): (4, 2, (False,) * 4, (True, True, True, True)),
    (2, 6): (5, 2, (False,) * 4, (True, True, True, True)),
    (3, 3): (2, 2, (False,) * 4, (True, True, True, True)),
    (3, 4): (3, 3, (False,) * 4, (False, False, False, True)),
    (3, 5): (4, 3, (False,) * 4, (False, False, False, True)),
    (3, 6): (5, 3, (False,) * 4, (False, False, False, True)),
    (4, 4): (3, 3, (False,) * 4, (False, False, False, True)),
}


def trajectory(T: int = 14) -> IOTrajectory:
    return IOTrajectory(U[:, :T], Y[:, :T])
