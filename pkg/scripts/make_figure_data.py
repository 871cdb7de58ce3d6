#!/usr/bin/env python3
"""Generate the CSV data behind the standard plots.

Writes, per source, the tilted-family trajectory over the probability
simplex, the three large-deviation rate curves, and the exact-PMF /
approximation overlay.  Everything is plain CSV; plot with whatever you
like, e.g.

    python scripts/make_figure_data.py --outdir fig_data
    python -c "import pandas as pd; ..."
"""
import argparse
from pathlib import Path

from tiltlab import builtin_spec_path
from tiltlab.cli import main as tiltlab_main


def run(*argv):
    code = tiltlab_main([str(a) for a in argv])
    if code != 0:
        raise SystemExit(f"tiltlab {argv[0]} failed with exit code {code}")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--outdir", default="fig_data")
    parser.add_argument(
        "--full",
        action="store_true",
        help="also run the slow cases (binary n=25, 77-ary n=4)",
    )
    args = parser.parse_args()
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    s2 = builtin_spec_path("s2")
    s3 = builtin_spec_path("s3")
    s77 = builtin_spec_path("s77_sample")

    # tilted-family trajectory across the simplex (ternary working example)
    run("tilt", "--source", s3, "--alpha-grid", "lin:-6:6:241",
        "--out", outdir / "tilted_family_s3.csv")

    # rate curves for all three kinds and all three i.i.d. sources
    for name, spec in (("s2", s2), ("s3", s3), ("s77", s77)):
        for kind in ("g", "r", "i"):
            run("rate", "--source", spec, "--kind", kind, "--samples", "201",
                "--out", outdir / f"rate_{kind}_{name}.csv")

    # exact PMF vs stitched approximation overlays
    overlays = [("s2", s2, 8), ("s2", s2, 16), ("s3", s3, 8),
                ("s3_markov", builtin_spec_path("s3_markov"), 8),
                ("s3_hmm", builtin_spec_path("s3_hmm"), 8),
                ("s77", s77, 3)]
    if args.full:
        overlays += [("s2", s2, 25), ("s77", s77, 4)]
    for name, spec, n in overlays:
        run("approx", "--source", spec, "--n", str(n), "--budget", str(2**27),
            "--out", outdir / f"approx_{name}_n{n}.csv")

    print(f"wrote figure data under {outdir}/")


if __name__ == "__main__":
    main()
