import json
import math

import numpy as np
import pytest

import channelsim.analytic as an
import channelsim.config as config
import channelsim.experiments as ex
import channelsim.observables as obs
from channelsim.errors import BelowCutoffError, PacketOverlapError

# Compact desk configuration: full physics, seconds-scale runtime. The box is
# tall enough that the diffracting packet never reaches the outer y walls
# within the fixed duration, and n_steps is pinned so the transmitted packet
# stops short of the downstream wall.
SMALL = {
    "grid": {"nx": 512, "ny": 320, "dx": 0.25, "dy": 0.25, "x0": -80.0, "y0": -40.0},
    "packet": {"xc": -21.0, "yc": 0.0, "sx": 3.5, "sy": 8.0, "k0": 1.0},
    "geometry": {"x_in": -5.0, "ell": 10.0, "a": 6.0, "y_center": 0.0},
    "model": {"kind": "hard"},
    "stepper": {"n_steps": 3072, "sample_stride": 8},
    "experiment": {"kind": "transit"},
}

# Finer variant for the momentum-budget identity (stencil and corner errors
# scale with dx^2).
SMALL_FINE = {
    "grid": {"nx": 1024, "ny": 640, "dx": 0.125, "dy": 0.125, "x0": -80.0, "y0": -40.0},
    "packet": {"xc": -21.0, "yc": 0.0, "sx": 3.5, "sy": 8.0, "k0": 1.0},
    "geometry": {"x_in": -5.0, "ell": 10.0, "a": 6.0, "y_center": 0.0},
    "model": {"kind": "hard"},
    "stepper": {"dt": 0.0078125, "n_steps": 6144, "sample_stride": 8},
    "experiment": {"kind": "transit"},
}


def make(cfg_dict, **over):
    d = json.loads(json.dumps(cfg_dict))
    for key, sub in over.items():
        d.setdefault(key, {}).update(sub)
    return config.parse_config(json.dumps(d))


@pytest.fixture(scope="module")
def small_transit():
    with pytest.warns(UserWarning, match="transmitted"):
        return ex.run_transit(make(SMALL), keep_fields=True)


class TestTransit:
    def test_result_fields_filled(self, small_transit):
        r = small_transit
        assert r.delta_phi_sim is not None
        assert r.delta_phi_exact_mode == pytest.approx(
            an.phase_shift_exact_mode(1.0, 10.0, 6.0), rel=1e-12
        )
        assert 0.0 <= r.transmitted_final <= 1.0
        assert r.p_plateau is not None and r.p_exit is not None
        assert r.entry_impulse < 0
        assert r.ehrenfest_residual is not None
        assert len(r.series) == r.config.stepper.n_steps // 8 + 1

    def test_phase_tracks_mode_oracle_loosely(self, small_transit):
        # short channel, strong diffraction: the simulated confinement phase
        # still sits within ~15% of the single-mode closed form
        r = small_transit
        assert r.delta_phi_sim == pytest.approx(r.delta_phi_exact_mode, rel=0.15)

    def test_norm_conserved(self, small_transit):
        norms = [rec.norm2 for rec in small_transit.series]
        assert abs(norms[0] - 1.0) < 1e-12
        assert abs(norms[-1] - 1.0) < 1e-4

    def test_entry_force_negative_exit_positive(self, small_transit):
        r = small_transit
        f = np.array([rec.f_boundary for rec in r.series])
        t = np.array([rec.t for rec in r.series])
        entry_window = (t >= r.t_touch) & (t <= r.t_mid)
        assert np.trapezoid(f[entry_window], t[entry_window]) < 0

    def test_determinism(self):
        with pytest.warns(UserWarning, match="transmitted"):
            r1 = ex.run_transit(make(SMALL))
        with pytest.warns(UserWarning, match="transmitted"):
            r2 = ex.run_transit(make(SMALL))
        assert r1.delta_phi_sim == r2.delta_phi_sim
        assert r1.p_plateau == r2.p_plateau
        assert [a.mean_p for a in r1.series] == [b.mean_p for b in r2.series]

    def test_below_cutoff_rejected(self):
        cfg = make(SMALL, packet={"k0": 0.4})  # cutoff pi/6 = 0.524
        with pytest.raises(BelowCutoffError):
            ex.run_transit(cfg)

    def test_packet_overlap_rejected(self):
        cfg = make(SMALL, packet={"xc": -12.0})
        with pytest.raises(PacketOverlapError):
            ex.run_transit(cfg)

    def test_reference_arm_nullity(self):
        # no barrier material at all: both arms run identical numerics
        cfg = make(SMALL, geometry={"a": 100.0}, stepper={"n_steps": 512})
        r = ex.run_transit(cfg)
        assert r.delta_phi_sim == pytest.approx(0.0, abs=1e-3)

    def test_degenerate_single_cell_slab_full_width(self):
        cfg = make(SMALL, geometry={"ell": 0.25, "a": 100.0}, stepper={"n_steps": 512})
        r = ex.run_transit(cfg)
        assert abs(r.delta_phi_sim) < 0.01

    def test_ground_mode_dominance_at_plateau(self, small_transit):
        # rerun the channel arm until the plateau sample and decompose there
        r = small_transit
        cfg = r.config
        n_plateau = int(round(r.t_plateau / cfg.stepper.dt))
        n_plateau -= n_plateau % cfg.stepper.sample_stride
        final, _, _ = ex._run_arm(config.with_resolved_steps(cfg, n_plateau), n_plateau, barrier=True)
        geom = ex._geometry(cfg)
        c = obs.mode_coefficients(final, geom, x_probe=geom.x_in + geom.ell / 2, n_max=23)
        power = np.abs(c) ** 2
        assert power[0] / power.sum() > 0.9

    def test_budget_closure_fine_grid(self):
        r = ex.run_transit(make(SMALL_FINE))
        dp_endpoints = r.series[-1].mean_p - r.series[0].mean_p
        closure = abs((r.entry_impulse + r.exit_impulse) - dp_endpoints) / abs(dp_endpoints)
        assert closure <= 0.02


class TestReflection:
    @pytest.fixture(scope="class")
    def reflection(self):
        d = config.reflection_defaults()
        d["grid"] = {"nx": 1024, "ny": 64, "dx": 0.125, "dy": 0.125, "x0": -112.0, "y0": -4.0}
        d["packet"] = {"xc": -48.0, "yc": 0.0, "sx": 8.0, "sy": 1.0, "k0": 1.0}
        d["stepper"] = {"dt": 0.01, "sample_stride": 10}
        return ex.run_reflection(config.parse_config(json.dumps(d)))

    def test_net_impulse_minus_2p(self, reflection):
        assert reflection.net_impulse == pytest.approx(-2.0, rel=0.01)

    def test_late_momentum_reversed(self, reflection):
        assert reflection.p_exit == pytest.approx(-1.0, rel=0.01)

    def test_no_transmission(self, reflection):
        assert reflection.transmitted_final < 1e-6

    def test_free_run_zero_impulse(self):
        # opening swallows the whole box: no faces, identically zero force
        cfg = make(SMALL, geometry={"a": 100.0}, stepper={"n_steps": 256})
        cfg = config.parse_config(json.dumps({**json.loads(cfg.to_json()), "experiment": {"kind": "reflect"}}))
        r = ex.run_reflection(cfg)
        assert r.net_impulse == pytest.approx(0.0, abs=1e-8)


class TestSweeps:
    def test_approx_formula_exponents_exact(self):
        # pure power laws of the first-order formula, no simulation involved
        ps = np.array([0.8, 1.0, 1.25, 1.5, 2.0])
        dphi = np.array([an.phase_shift_approx(p, 50.0, 10.0) for p in ps])
        slope = np.polyfit(np.log(ps**2 / 2), np.log(dphi), 1)[0]
        assert slope == pytest.approx(-0.5, abs=1e-12)
        aa = np.array([8.0, 10.0, 12.5, 16.0])
        dphi_a = np.array([an.phase_shift_approx(1.0, 50.0, a) for a in aa])
        slope_a = np.polyfit(np.log(aa), np.log(dphi_a), 1)[0]
        assert slope_a == pytest.approx(-2.0, abs=1e-12)

    def test_length_sweep_monotone_and_linear(self):
        cfg = make(SMALL)
        res = ex.run_sweep(cfg, "ell", (6.0, 10.0, 14.0))
        phis = [r["delta_phi_sim"] for r in res.rows]
        assert phis[0] < phis[1] < phis[2]
        assert res.fitted_exponent == pytest.approx(1.0, abs=0.2)
        assert not res.errors

    def test_member_failure_partial_table(self):
        cfg = make(SMALL)
        res = ex.run_sweep(cfg, "p", (0.4, 0.9))  # 0.4 below cutoff
        assert len(res.rows) == 2
        assert "BelowCutoff" in res.rows[0]["error"]
        assert res.rows[1]["error"] == ""
        assert len(res.errors) == 1


class TestModelComparison:
    def test_models_agree_on_entry_impulse(self):
        cfg = make(SMALL, model={"kind": "hard"})
        comp = ex.run_model_comparison(cfg, widths_in_spacings=(2,))
        assert {row["model"] for row in comp.rows} == {"hard", "step", "smooth"}
        assert comp.spread("entry_impulse") < 0.05
        assert comp.spread("delta_phi_sim") < 0.08
        # larger smoothing width lowers the soft-force peak
        rows = {r["model"]: r for r in comp.rows}
        assert rows["smooth"]["peak_force"] is not None

    def test_determinism_of_comparison(self):
        cfg = make(SMALL)
        c1 = ex.run_model_comparison(cfg, widths_in_spacings=())
        c2 = ex.run_model_comparison(cfg, widths_in_spacings=())
        assert c1.rows == c2.rows


class TestDurationEstimates:
    def test_transit_steps_multiple_of_stride(self):
        cfg = make(SMALL)
        n = ex.estimate_transit_steps(cfg)
        assert n % cfg.stepper.sample_stride == 0
        assert n * cfg.stepper.dt > (5.0 - (-21.0)) / 1.0  # at least reach + cross

    def test_faster_beam_fewer_steps(self):
        slow = ex.estimate_transit_steps(make(SMALL, packet={"k0": 0.8}))
        fast = ex.estimate_transit_steps(make(SMALL, packet={"k0": 1.6}))
        assert fast < slow
