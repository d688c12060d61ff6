"""Input-output records, data Hankel matrices and trajectory files.

CSV layout is one row per sample with header ``t,u1..um,y1..yp``. JSON
layout is ``{"m":..,"p":..,"T":..,"u":[[..]],"y":[[..]]}`` where ``u`` is
``m x T`` and ``y`` is ``p x T`` (signal-by-time, row-major).
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import FormatError, InvalidDepth, InvalidInput, InvalidShape
from .numerics import as_matrix


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class IOTrajectory:
    """Finite record ``(u_[0,T-1], y_[0,T-1])``; ``u`` is ``m x T``, ``y`` is ``p x T``."""

    u: np.ndarray = field(repr=False)
    y: np.ndarray = field(repr=False)

    def __post_init__(self):
        u = as_matrix(self.u, "u")
        y = as_matrix(self.y, "y")
        if u.shape[1] != y.shape[1]:
            raise InvalidShape(f"u has {u.shape[1]} samples but y has {y.shape[1]}")
        if u.shape[1] < 1:
            raise InvalidInput("trajectory needs at least one sample")
        if u.shape[0] < 1 or y.shape[0] < 1:
            raise InvalidInput("need m >= 1 and p >= 1")
        if not np.any(u):
            raise InvalidInput("input sequence must not be identically zero")
        object.__setattr__(self, "u", _frozen(u))
        object.__setattr__(self, "y", _frozen(y))

    @property
    def m(self) -> int:
        return self.u.shape[0]

    @property
    def p(self) -> int:
        return self.y.shape[0]

    @property
    def T(self) -> int:
        return self.u.shape[1]

    def __repr__(self):
        return f"IOTrajectory(m={self.m}, p={self.p}, T={self.T})"

    def __eq__(self, other):
        if not isinstance(other, IOTrajectory):
            return NotImplemented
        return (self.u.shape == other.u.shape and self.y.shape == other.y.shape
                and np.array_equal(self.u, other.u) and np.array_equal(self.y, other.y))

    __hash__ = object.__hash__


@dataclass(frozen=True, eq=False)
class StateTrajectory:
    """State sequence ``x_[0,T]`` stored as an ``n x (T+1)`` array."""

    x: np.ndarray = field(repr=False)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 2:
            raise InvalidShape("state must be 2-D")
        object.__setattr__(self, "x", _frozen(x))

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def T(self) -> int:
        return self.x.shape[1] - 1

    def __repr__(self):
        return f"StateTrajectory(n={self.n}, T={self.T})"


def prefix(traj: IOTrajectory, T: int) -> IOTrajectory:
    """The first ``T`` samples of ``traj``."""
    if not 1 <= T <= traj.T:
        raise InvalidInput(f"prefix length must lie in [1, {traj.T}], got {T}")
    return IOTrajectory(traj.u[:, :T], traj.y[:, :T])


def hankel(f, k: int) -> np.ndarray:
    """Block-Hankel matrix of depth ``k+1``: block ``(r, c)`` is column ``c+r`` of ``f``."""
    f = np.asarray(f, dtype=float)
    rows, cols = f.shape
    if not 0 <= k <= cols - 1:
        raise InvalidDepth(f"depth index {k} outside [0, {cols - 1}]")
    width = cols - k
    return np.vstack([f[:, r:r + width] for r in range(k + 1)]) if rows else np.zeros((0, width))


def build_H(traj: IOTrajectory, k: int) -> np.ndarray:
    """``H_k``: ``hankel(u, k)`` stacked over ``hankel(y, k)``."""
    return np.vstack([hankel(traj.u, k), hankel(traj.y, k)])


def build_G(traj: IOTrajectory, k: int) -> np.ndarray:
    """``H_k`` with its last ``p`` rows (the newest output sample) removed."""
    return build_H(traj, k)[:-traj.p]


def build_J(x: StateTrajectory, traj: IOTrajectory, k: int) -> np.ndarray:
    """State-input Hankel matrix ``[x_[0,T-k-1]; H_k(u)]``."""
    if x.T != traj.T:
        raise InvalidShape(f"state has {x.x.shape[1]} columns, expected {traj.T + 1}")
    Hu = hankel(traj.u, k)
    return np.vstack([x.x[:, :traj.T - k], Hu])


# -- files -----------------------------------------------------------------

def infer_format(path, fmt: str | None = None) -> str:
    if fmt is not None:
        fmt = fmt.lower()
    else:
        fmt = Path(path).suffix.lower().lstrip(".")
    if fmt not in ("csv", "json"):
        raise FormatError(f"unknown trajectory format {fmt!r} (use csv or json)")
    return fmt


def _parse_csv(text: str, need_y: bool = True):
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise FormatError("empty CSV file") from None
    ucols = [i for i, h in enumerate(header) if h.startswith("u") and h[1:].isdigit()]
    ycols = [i for i, h in enumerate(header) if h.startswith("y") and h[1:].isdigit()]
    if not header or header[0] != "t":
        raise FormatError("CSV header must start with 't'")
    if not ucols:
        raise FormatError("CSV has no input columns u1..um")
    if need_y and not ycols:
        raise FormatError("CSV has no output columns y1..yp")
    expected = ["t"] + [f"u{i + 1}" for i in range(len(ucols))] + [f"y{i + 1}" for i in range(len(ycols))]
    if header != expected:
        raise FormatError(f"CSV header {header} does not match expected {expected}")
    rows = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise FormatError(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            rows.append([float(c) for c in row])
        except ValueError as exc:
            raise FormatError(f"line {lineno}: {exc}") from None
    if not rows:
        raise FormatError("CSV has no data rows")
    data = np.array(rows)
    return data[:, ucols].T, (data[:, ycols].T if ycols else None)


def _parse_json(text: str, need_y: bool = True):
    try:
        obj = json.loads(text)
        u = np.array(obj["u"], dtype=float)
        y = np.array(obj["y"], dtype=float) if need_y or "y" in obj else None
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad trajectory JSON: {exc}") from None
    if u.ndim != 2 or (y is not None and y.ndim != 2):
        raise FormatError("u and y must be nested lists (signal-by-time)")
    for key, val in (("m", u.shape[0]), ("T", u.shape[1])) + ((("p", y.shape[0]),) if y is not None else ()):
        if key in obj and obj[key] != val:
            raise InvalidInput(f"declared {key}={obj[key]} but data has {val}")
    return u, y


def load_trajectory(path, fmt: str | None = None) -> IOTrajectory:
    fmt = infer_format(path, fmt)
    text = Path(path).read_text()
    u, y = _parse_csv(text) if fmt == "csv" else _parse_json(text)
    return IOTrajectory(u, y)


def load_input(path, fmt: str | None = None) -> np.ndarray:
    """Read only the input signal (``m x T``) from a CSV or JSON file."""
    fmt = infer_format(path, fmt)
    text = Path(path).read_text()
    u, _ = _parse_csv(text, need_y=False) if fmt == "csv" else _parse_json(text, need_y=False)
    return u


def _num(v: float):
    return int(v) if float(v).is_integer() else float(v)


def signals_to_json(u, y) -> dict:
    """JSON record for raw ``(u, y)`` arrays; unlike ``IOTrajectory`` this allows ``u = 0``."""
    u, y = np.asarray(u, dtype=float), np.asarray(y, dtype=float)
    return {"m": u.shape[0], "p": y.shape[0], "T": u.shape[1],
            "u": [[_num(v) for v in row] for row in u],
            "y": [[_num(v) for v in row] for row in y]}


def signals_to_csv(u, y) -> str:
    u, y = np.asarray(u, dtype=float), np.asarray(y, dtype=float)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t"] + [f"u{i + 1}" for i in range(u.shape[0])] + [f"y{i + 1}" for i in range(y.shape[0])])
    for t in range(u.shape[1]):
        w.writerow([t] + [repr(_num(v)) for v in u[:, t]] + [repr(_num(v)) for v in y[:, t]])
    return buf.getvalue()


def trajectory_to_json(traj: IOTrajectory) -> dict:
    return signals_to_json(traj.u, traj.y)


def trajectory_to_csv(traj: IOTrajectory) -> str:
    return signals_to_csv(traj.u, traj.y)


def format_signals(u, y, fmt: str) -> str:
    if fmt == "csv":
        return signals_to_csv(u, y)
    return json.dumps(signals_to_json(u, y)) + "\n"


def save_trajectory(traj: IOTrajectory, path, fmt: str | None = None) -> None:
    Path(path).write_text(format_signals(traj.u, traj.y, infer_format(path, fmt)))
