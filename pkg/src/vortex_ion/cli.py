"""Command-line entry point: ``vortex-ion [--config PATH] [--out PATH] <command>``."""
from __future__ import annotations

import argparse
import sys

import numpy as np

from .config import DEFAULT_CONFIG_TEXT, ConfigError, load_config, parse_config
from .constants import NM, UM
from .dynamics import ThermalState
from .fields import vortex
from .ingest import fit_report, run_fit
from .runs import RUNNERS, residual_at
from .thermal import QuadratureError, wavepacket_from
from .trap import Mode, TrapModes, lamb_dicke_parallel, lamb_dicke_perp, lamb_dicke_table

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC = 0, 1, 2

REFERENCE_TABLE = {"ax": (0.0, 0.0057), "r1": (0.053, 0.0026), "r2": (0.048, 0.0024)}


def ldp_table(cfg) -> dict:
    """Lamb-Dicke table for the configured trap.

    The vortex column uses ``beam.waist_um`` when the beam is LG01, the
    Gaussian column the reference beam's wavelength (k along z).
    """
    trap = cfg.trap()
    vort = cfg.beam() if cfg["beam.kind"] == "lg01" else vortex(3.34 * UM, 1.0, wavelength=cfg.beam().wavelength)
    return lamb_dicke_table(trap, cfg.reference_beam(), vort)


def format_ldp(table) -> str:
    lines = [f"{'mode':<6}{'gaussian eta_par':>18}{'vortex eta_perp':>18}"]
    for mode, (par, perp) in table.items():
        lines.append(f"{mode:<6}{par:>18.4f}{perp:>18.5f}")
    return "\n".join(lines)


def golden_checks():
    """Reference-value checks as (name, value, low, high, group).

    A group passes when any of its members is in range; ``None`` groups stand
    alone.
    """
    trap = TrapModes()
    checks = []
    table = ldp_table(parse_config(DEFAULT_CONFIG_TEXT))
    for mode, (par, perp) in REFERENCE_TABLE.items():
        got_par, got_perp = table[mode]
        checks.append((f"eta_par[{mode}]", got_par, par - 0.001, par + 0.001, None))
        checks.append((f"eta_perp[{mode}]", got_perp, perp - 0.0001, perp + 0.0001, None))
    v = vortex(3.34 * UM, 1.0)
    checks.append(("eta_perp(3.34 um, 700 kHz)", lamb_dicke_perp(trap, Mode.AX, v), 0.00558, 0.00582, None))
    k45 = v.k * np.array([np.cos(np.pi / 4), 0.0, np.sin(np.pi / 4)])
    checks.append(("eta_par(45 deg)", lamb_dicke_parallel(trap, Mode.AX, k45), 0.0817, 0.0821, None))
    wp = wavepacket_from(trap, ThermalState((15.0, 7.0, 7.0)))
    cov = wp.transverse_covariance()
    checks.append(("sigma_ax(nbar=15) [nm]", wp.sigmas[Mode.AX] / NM, 70.0, 80.0, None))
    checks.append(("sigma_rad(nbar=7) [nm]", np.sqrt(cov[1, 1]) / NM, 27.0, 33.0, None))
    fig2b = parse_config(
        "beam.kind = lg01\nbeam.waist_um = 3.3\nbeam.power_uw = 10\nstate.nbar = 15, 7, 7\n"
        "state.drift_nm = 50, 0, 0\n"
    )
    res = residual_at(fig2b)
    checks.append(("residual carrier (amplitude)", res["amplitude"], 0.020, 0.030, "residual"))
    checks.append(("residual carrier (intensity)", res["intensity"], 0.020, 0.030, "residual"))
    return checks


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vortex-ion", description=__doc__)
    ap.add_argument("--config", help="flat key = value configuration file")
    ap.add_argument("--out", help="output path (default: stdout)")
    ap.add_argument("--seed", type=int, default=0, help="RNG seed recorded with the run")
    ap.add_argument("--threads", type=int, default=1, help="worker threads for scan grids")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("spectrum", "rabi", "map", "residual"):
        sub.add_parser(name, help=f"run the {name} scan and write CSV")
    fit = sub.add_parser("fit", help="fit a model to an input CSV")
    fit.add_argument("data", help="input CSV")
    sub.add_parser("ldp", help="print the Lamb-Dicke parameter table")
    sub.add_parser("selftest", help="check reference golden values")
    return ap


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else parse_config(DEFAULT_CONFIG_TEXT)
        if args.command in RUNNERS:
            cfg = cfg.with_values({"scan.kind": args.command})
            result = RUNNERS[args.command](cfg, workers=max(args.threads, 1))
            _emit(result.to_csv(), args.out)
        elif args.command == "fit":
            cfg = cfg.with_values({"scan.kind": "fit"})
            _emit(fit_report(run_fit(cfg, args.data), cfg), args.out)
        elif args.command == "ldp":
            _emit(format_ldp(ldp_table(cfg)) + "\n", args.out)
        elif args.command == "selftest":
            lines, groups = [], {}
            for name, value, lo, hi, group in golden_checks():
                ok = lo <= value <= hi
                groups[group or name] = groups.get(group or name, False) or ok
                lines.append(f"{'PASS' if ok else 'FAIL'}  {name}: {value:.6g} (expected [{lo:.6g}, {hi:.6g}])")
            failed = [g for g, ok in groups.items() if not ok]
            lines.append(f"{len(groups) - len(failed)}/{len(groups)} checks passed")
            _emit("\n".join(lines) + "\n", args.out)
            return EXIT_OK if not failed else EXIT_NUMERIC
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (QuadratureError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
