"""``hankelid`` command line.

Exit codes: 0 success (or informative / isomorphic / no violations), 1 checked
and negative, 2 I/O or data error, 64 usage error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, replace

import numpy as np

from . import data as trajdata
from .errors import HankelIdError, InvalidInput
from .identification import identify_minimal
from .informativity import HarnessCaps, check_fixed_order, check_fundamental_lemma, check_main, harness
from .invariants import PriorBounds, invariants
from .numerics import DEFAULT_TOL, Tolerance
from .system import is_isomorphic, lag, load_system, save_system, simulate, system_to_json

EXIT_OK, EXIT_NEGATIVE, EXIT_DATA, EXIT_USAGE = 0, 1, 2, 64
TOL_ENV = "HANKELID_TOL"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class CliConfig:
    command: str
    fmt: str = "json"
    tol: Tolerance = DEFAULT_TOL


def _tolerance(args) -> Tolerance:
    raw = args.rank_tol if args.rank_tol is not None else os.environ.get(TOL_ENV)
    if raw is None:
        return DEFAULT_TOL
    try:
        return replace(DEFAULT_TOL, rank_rel=float(raw))
    except (ValueError, InvalidInput) as exc:
        raise UsageError(f"bad rank tolerance {raw!r}: {exc}") from None


def _clean(v):
    """JSON-safe copy: arrays to lists, non-finite floats to None."""
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, np.ndarray):
        return _clean(v.tolist())
    if isinstance(v, (np.integer, np.bool_)):
        return v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def _emit(cfg: CliConfig, payload: dict, text: str) -> None:
    if cfg.fmt == "json":
        print(json.dumps(_clean(payload), indent=2))
    else:
        print(text)


def _load(args):
    traj = trajdata.load_trajectory(args.data, args.data_format)
    if args.prefix is not None:
        if args.prefix > traj.T:
            raise InvalidInput(f"--prefix {args.prefix} exceeds the {traj.T} samples in {args.data}")
        traj = trajdata.prefix(traj, args.prefix)
    return traj


def _fmt_matrix(M) -> str:
    M = np.asarray(M)
    if M.size == 0:
        return f"  (empty {M.shape[0]}x{M.shape[1]})"
    return "\n".join("  " + " ".join(f"{v:10.4g}" for v in row) for row in M)


# -- subcommands -----------------------------------------------------------

def cmd_invariants(args, cfg: CliConfig) -> int:
    traj = _load(args)
    inv = invariants(traj, cfg.tol)
    payload = {"T": traj.T, **inv.as_dict()}
    header = " T " + "".join(f"{f'd{k - 1}':>5}" for k in range(len(inv.delta))) + "  l_min  n_min"
    row = f"{traj.T:>2} " + "".join(f"{d:>5}" for d in inv.delta) + f"  {inv.l_min:>5}  {inv.n_min:>5}"
    _emit(cfg, payload, header + "\n" + row)
    return EXIT_OK


def cmd_identify(args, cfg: CliConfig) -> int:
    traj = _load(args)
    res = identify_minimal(traj, cfg.tol)
    s = res.system
    if args.save_system:
        save_system(s, args.save_system)
    payload = {"T": traj.T, "n": s.n, "lag": lag(s, cfg.tol), "residual": res.residual,
               "invariants": res.invariants.as_dict(), "system": system_to_json(s)}
    text = "\n".join([f"n = {s.n}  lag = {payload['lag']}  residual = {res.residual:.3g}",
                      "A:", _fmt_matrix(s.A), "B:", _fmt_matrix(s.B),
                      "C:", _fmt_matrix(s.C), "D:", _fmt_matrix(s.D)])
    _emit(cfg, payload, text)
    return EXIT_OK


def cmd_check(args, cfg: CliConfig) -> int:
    traj = _load(args)
    if args.method == "fixed":
        ok = check_fixed_order(traj, args.lplus, args.nplus, cfg.tol)
        payload = {"method": "fixed", "T": traj.T, "l": args.lplus, "n": args.nplus, "informative": ok}
        text = f"fixed order (l={args.lplus}, n={args.nplus}), T={traj.T}: {'informative' if ok else 'not informative'}"
    elif args.method == "pe":
        v = check_fundamental_lemma(traj, args.bounds, cfg.tol)
        ok = v.concluded_informative
        payload = {"method": "pe", "T": traj.T, **v.as_dict()}
        text = (f"L+={args.lplus} N+={args.nplus} T={traj.T}: "
                f"applicable={v.applicable} pe={v.pe_ok} length={v.length_ok} -> "
                f"{'informative' if ok else 'not concluded'}")
    else:
        v = check_main(traj, args.bounds, cfg.tol)
        ok = v.informative
        payload = {"method": "main", "T": traj.T, **v.as_dict()}
        text = (f"L+={args.lplus} N+={args.nplus} T={traj.T} L_d={v.L_d} L_a={v.L_a}: "
                f"lag_lb={v.lag_lb} state_lb={v.state_lb} length={v.length} rank={v.rank} -> "
                f"{'informative' if ok else 'not informative'}")
    _emit(cfg, payload, text)
    return EXIT_OK if ok else EXIT_NEGATIVE


def cmd_simulate(args, cfg: CliConfig) -> int:
    system = load_system(args.system)
    u = trajdata.load_input(args.input)
    if u.shape[0] != system.m:
        raise InvalidInput(f"input has {u.shape[0]} channels but the system has m={system.m}")
    x0 = np.array(args.x0, dtype=float) if args.x0 is not None else np.zeros(system.n)
    if x0.shape != (system.n,):
        raise InvalidInput(f"x0 has {x0.size} entries but the system has n={system.n}")
    y, _ = simulate(system, x0, u)
    out_fmt = args.output_format or "json"
    if args.output:
        out_fmt = args.output_format or trajdata.infer_format(args.output)
        with open(args.output, "w") as fh:
            fh.write(trajdata.format_signals(u, y, out_fmt))
    else:
        sys.stdout.write(trajdata.format_signals(u, y, out_fmt))
    return EXIT_OK


def cmd_isomorphic(args, cfg: CliConfig) -> int:
    s1, s2 = load_system(args.sys1), load_system(args.sys2)
    chk = is_isomorphic(s1, s2, cfg.tol)
    payload = {"isomorphic": chk.isomorphic, "n1": s1.n, "n2": s2.n,
               "residual": chk.residual, "S": chk.S}
    text = f"isomorphic: {chk.isomorphic}" + (f"\nS:\n{_fmt_matrix(chk.S)}" if chk.S is not None else "")
    _emit(cfg, payload, text)
    return EXIT_OK if chk.isomorphic else EXIT_NEGATIVE


def cmd_harness(args, cfg: CliConfig) -> int:
    report = harness(args.trials, args.caps, args.seed, cfg.tol, args.workers)
    bad = sum(report["violations"].values())
    text = "\n".join([f"trials={report['trials']} seed={report['seed']}"]
                     + [f"  {k}: {v}" for k, v in report["violations"].items()]
                     + [f"  [{k}] {v}" for k, v in report["counts"].items()])
    _emit(cfg, report, text)
    return EXIT_OK if bad == 0 else EXIT_NEGATIVE


# -- parsing ---------------------------------------------------------------

def _x0(text: str):
    try:
        return [float(v) for v in text.split(",")] if text.strip() else []
    except ValueError:
        raise argparse.ArgumentTypeError(f"x0 must be comma-separated numbers, got {text!r}") from None


def _caps(text: str) -> HarnessCaps:
    names = {"n": "n_max", "m": "m_max", "p": "p_max", "T": "T_max", "radius": "max_spectral_radius"}
    kw = {}
    try:
        for item in filter(None, text.split(",")):
            key, val = item.split("=")
            key = names[key.strip()]
            kw[key] = float(val) if key == "max_spectral_radius" else int(val)
        return HarnessCaps(**kw)
    except (ValueError, KeyError, InvalidInput) as exc:
        raise argparse.ArgumentTypeError(f"bad caps {text!r} (use n=5,m=3,p=3,T=40): {exc}") from None


def _nonneg(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {v}")
    return v


def _positive(text: str) -> int:
    v = _nonneg(text)
    if v < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", dest="fmt", choices=("json", "text"), default="json")
    common.add_argument("--rank-tol", type=float, default=None,
                        help=f"relative rank cutoff (default {DEFAULT_TOL.rank_rel:g}, or ${TOL_ENV})")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--data", required=True, help="trajectory file (.csv or .json)")
    data.add_argument("--data-format", choices=("csv", "json"), default=None)
    data.add_argument("--prefix", type=_positive, default=None, help="use only the first T samples")

    p = _Parser(prog="hankelid", description="Identification and informativity from input-output data.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("invariants", parents=[common, data], help="delta sequence, l_min, n_min")

    ident = sub.add_parser("identify", parents=[common, data], help="minimal explaining system")
    ident.add_argument("--save-system", default=None, help="also write the system JSON here")

    chk = sub.add_parser("check", parents=[common, data], help="informativity verdict")
    for flag in ("--lminus", "--lplus", "--nminus", "--nplus"):
        chk.add_argument(flag, type=_nonneg, required=True)
    chk.add_argument("--method", choices=("main", "pe", "fixed"), default="main",
                     help="fixed uses --lplus/--nplus as the known lag and state dimension")

    simp = sub.add_parser("simulate", parents=[common], help="simulate a system from a given input")
    simp.add_argument("--system", required=True)
    simp.add_argument("--input", required=True, help="input file (.csv or .json, y columns optional)")
    simp.add_argument("--x0", type=_x0, default=None, help="initial state, e.g. 1,1,0 (default zeros)")
    simp.add_argument("--output", default=None, help="write here instead of stdout")
    simp.add_argument("--output-format", choices=("csv", "json"), default=None)

    iso = sub.add_parser("isomorphic", parents=[common], help="state-coordinate equivalence test")
    iso.add_argument("--sys1", required=True)
    iso.add_argument("--sys2", required=True)

    har = sub.add_parser("harness", parents=[common], help="randomized consistency trials")
    har.add_argument("--trials", type=_nonneg, default=200)
    har.add_argument("--seed", type=_nonneg, default=0)
    har.add_argument("--caps", type=_caps, default=HarnessCaps(), help="e.g. n=5,m=3,p=3,T=40")
    har.add_argument("--workers", type=_positive, default=None)
    return p


COMMANDS = {
    "invariants": cmd_invariants, "identify": cmd_identify, "check": cmd_check,
    "simulate": cmd_simulate, "isomorphic": cmd_isomorphic, "harness": cmd_harness,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = CliConfig(args.command, args.fmt, _tolerance(args))
        if args.command == "check":
            if args.method == "fixed":
                if args.lplus < 1:
                    raise UsageError("--method fixed needs --lplus >= 1")
            try:
                args.bounds = PriorBounds(args.lminus, args.lplus, args.nminus, args.nplus)
            except InvalidInput as exc:
                raise UsageError(str(exc)) from None
    except UsageError as exc:
        print(f"hankelid: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args, cfg)
    except (HankelIdError, OSError) as exc:
        print(f"hankelid: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
