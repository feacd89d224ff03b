"""Residual vortex carrier versus axial mean phonon number and drift."""
import argparse
import pathlib

import numpy as np

from vortex_ion.config import load_config
from vortex_ion.runs import run_residual

ROOT = pathlib.Path(__file__).resolve().parent.parent


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=str(ROOT / "configs" / "residual_map.cfg"))
    ap.add_argument("--out", default="out")
    ap.add_argument("--column", default="ratio_amplitude",
                    choices=["ratio_amplitude", "ratio_intensity", "equal_power_amplitude", "equal_power_intensity"])
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    cfg = load_config(args.config)
    res = run_residual(cfg)
    res.write(out / "residual_map.csv")
    nb, disp = np.asarray(cfg["scan.nbar_grid"]), np.asarray(cfg["scan.displacement_nm"])
    table = res.columns[args.column].reshape(nb.size, disp.size)
    print(f"{args.column}; rows: axial nbar, columns: displacement [nm]")
    print("nbar \\ d " + "".join(f"{d:>9.0f}" for d in disp))
    for n, row in zip(nb, table):
        print(f"{n:8.2f} " + "".join(f"{v:9.4f}" for v in row))


if __name__ == "__main__":
    main()
