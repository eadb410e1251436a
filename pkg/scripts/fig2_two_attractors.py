"""p2 forced by the same bump: energy builds up on both x1 = -pi/2 and x1 = +pi/2."""

import argparse
import json
from pathlib import Path

import numpy as np

from wavelab.checks import line_max
from wavelab.cli import write_pgm
from wavelab.evolution import EvolutionConfig, evolve_rk4
from wavelab.operator import P2
from wavelab.spectral_core import TorusGrid, make_bump


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=256)
    ap.add_argument("--t-final", type=float, default=50.0)
    ap.add_argument("--out", default="out/fig2")
    a = ap.parse_args()
    out = Path(a.out)
    out.mkdir(parents=True, exist_ok=True)

    times = [t for t in (5.0, 10.0, 20.0, 30.0, 40.0, 50.0) if t <= a.t_final]
    tr = evolve_rk4(P2, make_bump(TorusGrid(a.n)), EvolutionConfig(t_final=a.t_final, snapshot_times=times))
    tr.write_csv(out / "norms.csv")
    rows = []
    for t, u in tr.snapshots:
        rows.append({"t": t, "minus": line_max(u, -np.pi / 2), "plus": line_max(u, np.pi / 2)})
        print(f"t={t:5.1f}  max|u| on x1=-pi/2: {rows[-1]['minus']:.4f}   on x1=+pi/2: {rows[-1]['plus']:.4f}")
    write_pgm(tr.final.phys.real, out / "re_u_final.pgm")
    (out / "line_maxima.json").write_text(json.dumps(rows, indent=2) + "\n")


if __name__ == "__main__":
    main()
