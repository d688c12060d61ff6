"""Run the randomized consistency harness and write its JSON report.

    python3 scripts/run_harness.py --trials 1000 --seeds 0 1 2 --workers 4 --out harness.json
"""
import argparse
import json
import time

from hankelid.informativity import HarnessCaps, harness


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0])
    ap.add_argument("--n-max", type=int, default=5)
    ap.add_argument("--m-max", type=int, default=3)
    ap.add_argument("--p-max", type=int, default=3)
    ap.add_argument("--T-max", type=int, default=40)
    ap.add_argument("--workers", type=int, default=None)
    ap.add_argument("--out", default=None, help="write all reports as a JSON list")
    args = ap.parse_args()

    caps = HarnessCaps(args.n_max, args.m_max, args.p_max, args.T_max)
    reports = []
    for seed in args.seeds:
        start = time.perf_counter()
        rep = harness(args.trials, caps, seed, workers=args.workers)
        bad = {k: v for k, v in rep["violations"].items() if v}
        print(f"seed {seed}: {args.trials} trials in {time.perf_counter() - start:.1f}s, "
              f"informative {rep['counts']['informative']}, violations {bad or 'none'}")
        for f in rep["failing_trials"][:5]:
            print(f"    trial {f['trial']}: {f['keys']} n={f['n']} m={f['m']} p={f['p']} T={f['T']} "
                  f"lag={f['lag']} bounds={f['bounds']}")
        reports.append(rep)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(reports, fh, indent=2)


if __name__ == "__main__":
    main()
