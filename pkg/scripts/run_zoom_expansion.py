"""Exact stay probabilities of the four zoom families.

Writes a CSV (default: results/zoom_expansion.csv) and prints a one-line summary.
"""
import argparse
import inspect
from pathlib import Path

from rmflats.cli import write_csv
from rmflats.experiments import EXPERIMENTS


def main():
    fn = EXPERIMENTS["zoom-expansion"]
    params = inspect.signature(fn).parameters
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(Path("results") / "zoom_expansion.csv"))
    for name, prm in params.items():
        if isinstance(prm.default, int):
            ap.add_argument("--" + name.replace("_", "-"), type=int, default=prm.default)
    args = ap.parse_args()
    kwargs = {k: getattr(args, k) for k in params if hasattr(args, k)}
    rows = fn(**kwargs)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    write_csv(args.out, rows)
    flags = [k for k in ("floor_holds", "strict_holds", "recovered", "bound_holds", "holds", "at_least_1_over_q")
             if rows and k in rows[0]]
    summary = ", ".join(f"{k}: {sum(r[k] is True for r in rows)}/{sum(r[k] is not None for r in rows)}"
                        for k in flags)
    print(f"zoom-expansion: {len(rows)} rows -> {args.out}" + (f" ({summary})" if summary else ""))


if __name__ == "__main__":
    main()
