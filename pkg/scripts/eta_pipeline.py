"""Synthetic transverse Lamb-Dicke measurement.

Simulates red and blue axial sideband flops in the vortex centre at several
powers, fits each pair with a shared eta, averages over powers, and
recalibrates the Rabi-frequency power law from noisy carrier estimates.
"""
import argparse

import numpy as np

from vortex_ion.constants import MHZ, MW, TWO_PI, US
from vortex_ion.dynamics import BLUE, RED, RabiCalibration, rabi_from_power
from vortex_ion.estimation import Dataset, eta_from_sideband_fits, fit_power_law, fit_thermal_rabi, thermal_rabi_model


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eta", type=float, default=0.0057)
    ap.add_argument("--nbar", type=float, default=0.19)
    ap.add_argument("--noise", type=float, default=0.01, help="absolute population noise")
    ap.add_argument("--powers-mw", type=float, nargs="+", default=[0.6, 0.8, 1.0, 1.2, 1.4])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    cal = RabiCalibration()
    t = np.arange(0, 400 * US, 4 * US)

    results = []
    for p_mw in args.powers_mw:
        rabi = rabi_from_power(cal, p_mw * MW)
        data = {}
        for name, order in (("red", RED), ("blue", BLUE)):
            y = thermal_rabi_model(t, order, args.nbar, rabi, args.eta, 0.0)
            data[name] = Dataset(t, np.clip(y + rng.normal(scale=args.noise, size=t.size), 0, 1))
        res = fit_thermal_rabi(data, {"rabi": rabi, "gamma": 0.0}, ("nbar", "eta"))
        results.append(res)
        print(f"P = {p_mw:.2f} mW: eta = {res.parameters['eta']:.5f}({res.errors.get('eta', np.nan):.1e}), "
              f"nbar = {res.parameters['nbar']:.3f}, converged = {res.converged}")
    mean, spread = eta_from_sideband_fits(results, cal)
    print(f"averaged eta_perp = {mean:.5f} +- {spread:.5f} (generator {args.eta})")

    P = np.linspace(0.05, 3.0, 20) * MW
    omega = cal.slope * np.sqrt(P) * (1 + 0.1 * rng.normal(size=P.size))
    fit = fit_power_law(Dataset(P, omega))
    unit = TWO_PI * MHZ / np.sqrt(MW)
    print(f"power-law slope = 2pi x {fit.parameters['slope'] / unit:.4f}({fit.errors['slope'] / unit:.4f}) MHz/sqrt(mW)")


if __name__ == "__main__":
    main()
