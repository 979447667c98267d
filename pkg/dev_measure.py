"""Development measurements for acceptance-tolerance calibration (not part
of the package)."""

import sys
import time

import numpy as np

import channelsim.config as config
import channelsim.experiments as ex


def comparison():
    cfg = config.default_config("model-compare")
    t0 = time.time()
    comp = ex.run_model_comparison(cfg)
    print(f"model comparison ({time.time() - t0:.0f} s), v0={comp.rows[1]['v0']}")
    for row in comp.rows:
        print(
            f"  {row['model']:7s} w={row['w'] or 0:4.1f}  dphi={row['delta_phi_sim']:.5f}  "
            f"plateau={row['p_plateau']:.5f}  entry_imp={row['entry_impulse']:.5f}  "
            f"exit_imp={row['exit_impulse']:+.5f}  resid={row['ehrenfest_residual']:.4f}  "
            f"peakF={row['peak_force']:.4f}  trans={row['transmitted_final']:.4f}"
        )
    print("  spread dphi (hard/step/smooth#1):", comp.spread("delta_phi_sim"))
    print("  spread entry (hard/step/smooth#1):", comp.spread("entry_impulse"))
    rows = comp.rows
    dphis = [r["delta_phi_sim"] for r in rows]
    entries = [r["entry_impulse"] for r in rows]
    print("  full-set dphi spread:", (max(dphis) - min(dphis)) / max(map(abs, dphis)))
    print("  full-set entry spread:", (max(entries) - min(entries)) / max(map(abs, entries)))


def sweeps():
    cfg = config.default_config("transit")
    for axis, values in (
        ("p", (0.8, 1.0, 1.25, 1.5, 2.0)),
        ("ell", (30.0, 40.0, 50.0, 60.0)),
        ("a", (10.0, 12.5, 16.0, 20.0)),
    ):
        t0 = time.time()
        res = ex.run_sweep(cfg, axis, values)
        print(f"sweep {axis} ({time.time() - t0:.0f} s): exponent = {res.fitted_exponent:.4f}")
        for row in res.rows:
            print(
                f"  {axis}={row['value']:<6} dphi_sim={row['delta_phi_sim']:.5f} "
                f"exact={row['delta_phi_exact_mode']:.5f} "
                f"dev%={100 * (row['delta_phi_sim'] / row['delta_phi_exact_mode'] - 1):+.2f} {row['error']}"
            )


if __name__ == "__main__":
    which = sys.argv[1] if len(sys.argv) > 1 else "all"
    if which in ("compare", "all"):
        comparison()
    if which in ("sweeps", "all"):
        sweeps()
