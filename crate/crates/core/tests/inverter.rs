mod common;

use common::{op, topology};
use drivesim_core::inverter::{
    analytic_losses, dc_link_ripple, oracle_losses, oracle_run, LossBreakdown,
};
use drivesim_core::operating_point::OperatingPoint;
use drivesim_core::semiconductor::ConductionModel;
use drivesim_core::topology::{Mode, Role, TopologyKind};

const SAMPLES: usize = 200 * 200;

fn worst_relative(a: &LossBreakdown, o: &LossBreakdown) -> f64 {
    let floor_c = 1e-3 * a.p_cond_inv.max(1e-12);
    let floor_s = 1e-3 * a.p_sw_inv.max(1e-12);
    a.per_device
        .iter()
        .flat_map(|(k, x)| {
            let y = o.per_device[k];
            [
                (x.conduction - y.conduction).abs() / x.conduction.abs().max(floor_c),
                (x.switching - y.switching).abs() / x.switching.abs().max(floor_s),
            ]
        })
        .fold(0.0, f64::max)
}

#[test]
fn b6_zero_modulation_conduction_is_one_eighth() {
    let mut topo = topology(TopologyKind::B6Sic);
    for pos in topo.positions.values_mut() {
        pos.transistor.conduction = ConductionModel::Resistive { r_on: 10e-3 };
        pos.diode.conduction = ConductionModel::Threshold {
            v0: 0.0,
            r_slope: 10e-3,
        };
    }
    let o = op(0.0, 0.8, 100.0);
    let t1 = drivesim_core::topology::Element {
        role: Role(1),
        part: drivesim_core::topology::Part::Transistor,
    };
    let a = analytic_losses(&topo, &o, Mode::TwoLevel).unwrap();
    assert!((a.device(0, t1).conduction - 12.5).abs() < 1e-9);
    let s = oracle_losses(&topo, &o, Mode::TwoLevel, SAMPLES).unwrap();
    for phase in 0..3 {
        let c = s.device(phase, t1).conduction;
        assert!((c - 12.5).abs() / 12.5 < 0.02, "phase {phase}: {c}");
    }
}

#[test]
fn zero_current_gives_zero_losses() {
    for kind in TopologyKind::ALL {
        let topo = topology(kind);
        for &mode in kind.modes() {
            let a = analytic_losses(&topo, &op(0.7, 0.9, 0.0), mode).unwrap();
            let s = oracle_losses(&topo, &op(0.7, 0.9, 0.0), mode, 4000).unwrap();
            assert_eq!(a.total(), 0.0);
            assert_eq!(s.total(), 0.0);
        }
    }
}

#[test]
fn b6_cannot_run_three_level() {
    let topo = topology(TopologyKind::B6Sic);
    assert!(analytic_losses(&topo, &op(0.5, 0.9, 100.0), Mode::ThreeLevel).is_err());
}

#[test]
fn oracle_tracks_analytic_on_a_coarse_grid() {
    // the averaged model assumes many carrier periods per fundamental; at
    // 10 Hz and 10 kHz the carrier ratio is 1000
    let op = |m, pf, i| OperatingPoint::electrical_only(m, pf, i, 10.0, 800.0);
    for kind in TopologyKind::ALL {
        let topo = topology(kind);
        for &mode in kind.modes() {
            for &(m, pf, i) in &[
                (0.1, 0.5, 50.0),
                (0.5, 0.8, 200.0),
                (1.0, 1.0, 400.0),
                (0.9, 0.6, 50.0),
            ] {
                let a = analytic_losses(&topo, &op(m, pf, i), mode).unwrap();
                let s = oracle_losses(&topo, &op(m, pf, i), mode, 1000 * 200).unwrap();
                let w = worst_relative(&a, &s);
                assert!(w < 0.02, "{kind} {mode} m={m} pf={pf} i={i}: {w}");
            }
        }
    }
}

#[test]
fn switching_loss_is_linear_in_frequency() {
    for kind in TopologyKind::ALL {
        let mut topo = topology(kind);
        for &mode in kind.modes() {
            let o = op(0.6, 0.85, 200.0);
            topo.f_sw = 10e3;
            let a1 = analytic_losses(&topo, &o, mode).unwrap();
            let s1 = oracle_losses(&topo, &o, mode, SAMPLES).unwrap();
            topo.f_sw = 20e3;
            let a2 = analytic_losses(&topo, &o, mode).unwrap();
            let s2 = oracle_losses(&topo, &o, mode, 2 * SAMPLES).unwrap();
            assert!((a2.p_sw_inv - 2.0 * a1.p_sw_inv).abs() <= 1e-12 * a2.p_sw_inv);
            assert_eq!(a2.p_cond_inv, a1.p_cond_inv);
            assert!((s2.p_sw_inv / s1.p_sw_inv - 2.0).abs() < 0.04);
            assert!((s2.p_cond_inv / s1.p_cond_inv - 1.0).abs() < 0.02);
        }
    }
}

#[test]
fn three_level_switching_below_two_level() {
    let topo = topology(TopologyKind::TnpcSic);
    for &(m, pf) in &[(0.3, 0.9), (0.8, 0.7), (1.1, 1.0)] {
        let o = op(m, pf, 200.0);
        let two = oracle_losses(&topo, &o, Mode::TwoLevel, SAMPLES).unwrap();
        let three = oracle_losses(&topo, &o, Mode::ThreeLevel, SAMPLES).unwrap();
        assert!(three.p_sw_inv < two.p_sw_inv, "m={m}");
        let a2 = analytic_losses(&topo, &o, Mode::TwoLevel).unwrap();
        let a3 = analytic_losses(&topo, &o, Mode::ThreeLevel).unwrap();
        assert!(a3.p_sw_inv < a2.p_sw_inv);
    }
}

#[test]
fn three_level_events_commutate_half_the_link_voltage() {
    for kind in [TopologyKind::TnpcSic, TopologyKind::AnpcSic] {
        let topo = topology(kind);
        let run = oracle_run(&topo, &op(0.7, 0.8, 150.0), Mode::ThreeLevel, SAMPLES).unwrap();
        assert!(run.event_count > 0);
        assert_eq!(run.commutation_voltages, vec![400.0], "{kind}");
    }
    let b6 = oracle_run(
        &topology(TopologyKind::B6Sic),
        &op(0.7, 0.8, 150.0),
        Mode::TwoLevel,
        SAMPLES,
    )
    .unwrap();
    assert_eq!(b6.commutation_voltages, vec![800.0]);
    // series-connected ANPC switches share the full step in two-level mode
    let anpc = oracle_run(
        &topology(TopologyKind::AnpcSic),
        &op(0.7, 0.8, 150.0),
        Mode::TwoLevel,
        SAMPLES,
    )
    .unwrap();
    assert_eq!(anpc.commutation_voltages, vec![400.0]);
}

#[test]
fn phase_legs_carry_equal_losses() {
    for kind in TopologyKind::ALL {
        let topo = topology(kind);
        for &mode in kind.modes() {
            let s = oracle_losses(&topo, &op(0.75, 0.8, 300.0), mode, SAMPLES).unwrap();
            for &role in kind.roles() {
                let a = s.position(0, role);
                for phase in 1..3 {
                    let b = s.position(phase, role);
                    assert!(
                        (a - b).abs() <= 0.02 * a.max(1e-9),
                        "{kind} {mode} {role}: {a} vs {b}"
                    );
                }
            }
        }
    }
}

#[test]
fn generator_mirror_keeps_totals_for_symmetric_devices() {
    // SiC positions conduct symmetrically, so reversing the power flow only
    // moves loss between elements.
    for kind in [
        TopologyKind::B6Sic,
        TopologyKind::TnpcSic,
        TopologyKind::AnpcSic,
    ] {
        let topo = topology(kind);
        for &mode in kind.modes() {
            for &(m, pf) in &[(0.4, 0.9), (0.9, 0.6)] {
                let fwd = analytic_losses(&topo, &op(m, pf, 250.0), mode).unwrap();
                let rev = analytic_losses(&topo, &op(m, -pf, 250.0), mode).unwrap();
                if kind == TopologyKind::B6Sic {
                    assert!((fwd.total() - rev.total()).abs() < 1e-9 * fwd.total());
                }
                assert!(
                    (fwd.p_cond_inv - rev.p_cond_inv).abs() < 1e-9 * fwd.p_cond_inv
                        || mode == Mode::ThreeLevel
                );
            }
        }
    }
}

#[test]
fn totals_are_sums_of_devices() {
    for kind in TopologyKind::ALL {
        let topo = topology(kind);
        for &mode in kind.modes() {
            let a = analytic_losses(&topo, &op(0.6, 0.7, 120.0), mode).unwrap();
            let sw: f64 = a.per_device.values().map(|d| d.switching).sum();
            let cond: f64 = a.per_device.values().map(|d| d.conduction).sum();
            assert!((sw - a.p_sw_inv).abs() <= 1e-9 * sw);
            assert!((cond - a.p_cond_inv).abs() <= 1e-9 * cond);
            assert!(a
                .per_device
                .values()
                .all(|d| d.conduction >= 0.0 && d.switching >= 0.0));
        }
    }
}

#[test]
fn ripple_rms_matches_time_domain() {
    for kind in [TopologyKind::B6Sic, TopologyKind::TnpcSic] {
        let topo = topology(kind);
        for &mode in kind.modes() {
            for m in [0.4, 0.8] {
                for pf in [0.6, 0.9] {
                    let o = op(m, pf, 300.0);
                    let analytic = dc_link_ripple(&topo, &o, mode).unwrap();
                    let oracle = oracle_run(&topo, &o, mode, SAMPLES).unwrap();
                    let rel = (analytic.i_cap_rms - oracle.i_cap_rms).abs() / oracle.i_cap_rms;
                    assert!(
                        rel < 0.05,
                        "{kind} {mode} m={m} pf={pf}: {} vs {}",
                        analytic.i_cap_rms,
                        oracle.i_cap_rms
                    );
                }
            }
        }
    }
}

#[test]
fn b6_ripple_agrees_with_closed_form_capacitor_current() {
    // I_C² = I_rms² · 2M [√3/(4π) + cos²φ (√3/π − 9M/16)]
    let topo = topology(TopologyKind::B6Sic);
    for m in [0.3, 0.6, 0.9, 1.1] {
        for pf in [0.5, 0.8, 1.0] {
            let i_peak = 200.0;
            let r = dc_link_ripple(&topo, &op(m, pf, i_peak), Mode::TwoLevel).unwrap();
            let i_rms2 = i_peak * i_peak / 2.0;
            let s3 = 3f64.sqrt();
            let pi = std::f64::consts::PI;
            let expected =
                (i_rms2 * 2.0 * m * (s3 / (4.0 * pi) + pf * pf * (s3 / pi - 9.0 * m / 16.0)))
                    .sqrt();
            assert!(
                (r.i_cap_rms - expected).abs() / expected < 0.01,
                "m={m} pf={pf}: {} vs {expected}",
                r.i_cap_rms
            );
        }
    }
}

#[test]
fn ripple_zero_current_and_limit() {
    let topo = topology(TopologyKind::B6Sic);
    let r = dc_link_ripple(&topo, &op(0.5, 0.9, 0.0), Mode::TwoLevel).unwrap();
    assert_eq!((r.delta_u, r.i_cap_rms), (0.0, 0.0));
    assert_eq!(r.limit, 40.0);
    let big = dc_link_ripple(&topo, &op(0.5, 0.9, 400.0), Mode::TwoLevel).unwrap();
    let small_cap = {
        let mut t = topo.clone();
        t.dc_link_capacitance /= 10.0;
        dc_link_ripple(&t, &op(0.5, 0.9, 400.0), Mode::TwoLevel).unwrap()
    };
    assert!((small_cap.delta_u / big.delta_u - 10.0).abs() < 1e-9);
}
