use approx::assert_abs_diff_eq;
use nalgebra::{Isometry3, Point3, Translation3, UnitQuaternion, Vector3};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tdmm_hand::hand_model::{validate_config, GearTrain, HandConfig, HandState, NUM_SHAFTS};
use tdmm_hand::kinematics::{self, FingerWheels};
use tdmm_hand::scheduler::{self, MotionDemand};
use tdmm_hand::sim::{encoder, RunOptions, Runtime};
use tdmm_hand::tdmm;
use tdmm_hand::FingerGeometry;

/// Reachable wheel rotations from rest under the default map, shafts
/// ordered pip, pitch, roll per finger.
fn demand_strategy() -> impl Strategy<Value = MotionDemand> {
    let flex = || prop_oneof![Just(0.0), 0.5..28.0f64];
    let roll = || prop_oneof![Just(0.0), -40.0..40.0f64];
    [flex(), flex(), roll(), flex(), flex(), roll(), flex(), flex(), roll()].prop_map(MotionDemand)
}

proptest! {
    #[test]
    fn pip_angle_is_monotone(a in 0.0..10.0f64, b in 0.0..10.0f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(kinematics::pip_angle(lo, 5.0).unwrap() <= kinematics::pip_angle(hi, 5.0).unwrap());
    }

    #[test]
    fn rolling_joint_is_scale_invariant(frac in 0.0..1.0f64, r in 0.5..20.0f64, s in 0.1..10.0f64) {
        let dx = 2.0 * r * frac;
        let a = kinematics::pip_angle(dx, r).unwrap();
        let b = kinematics::pip_angle((dx * s).min(2.0 * r * s), r * s).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-9);
    }

    #[test]
    fn roll_is_decoupled_from_flexion(pip in 0.0..28.0f64, pitch in 0.0..60.0f64, roll in -45.0..45.0f64) {
        let g = FingerGeometry::default();
        let straight = kinematics::forward_finger(FingerWheels { pip, pitch, roll: 0.0 }, &g).unwrap();
        let rolled = kinematics::forward_finger(FingerWheels { pip, pitch, roll }, &g).unwrap();
        prop_assert_eq!(straight.theta1, rolled.theta1);
        prop_assert_eq!(straight.theta2, rolled.theta2);
        prop_assert_eq!(straight.theta3, rolled.theta3);
        prop_assert_eq!(straight.phi3, 0.0);
    }

    #[test]
    fn roll_map_is_linear(a in -40.0..40.0f64, b in -40.0..40.0f64) {
        let f = |x| kinematics::mcp_roll_angle(x, 8.0, 5.0);
        assert_abs_diff_eq!(f(a + b), f(a) + f(b), epsilon = 1e-9);
    }

    #[test]
    fn inverse_pip_round_trips(theta in 0.0..179.0f64) {
        let wheel = kinematics::inverse_pip(theta, 5.0, 8.0).unwrap();
        let back = kinematics::pip_angle(kinematics::cable_displacement(wheel, 8.0).unwrap(), 5.0).unwrap();
        assert_abs_diff_eq!(back, theta, epsilon = 1e-7);
    }

    #[test]
    fn validation_is_idempotent(r2 in -1.0..10.0f64, z1 in 0u32..20, settle in -0.1..0.2f64, err in 0.0..30.0f64) {
        let mut c = HandConfig::default();
        c.geometry.r2 = r2;
        c.gears.z1 = z1;
        c.timing.settle_time = settle;
        c.alignment_error_max_deg = err;
        match validate_config(c.clone()) {
            Ok(v) => prop_assert_eq!(validate_config(v.clone()), Ok(v)),
            Err(e) => prop_assert_eq!(validate_config(c).unwrap_err(), e),
        }
    }

    #[test]
    fn ratio_is_invariant_under_tooth_scaling(z1 in 1u32..50, z2 in 1u32..200, z3 in 1u32..50, z4 in 1u32..200, s in 1u32..5) {
        let g = GearTrain { z1, z2, z3, z4 };
        let scaled = GearTrain { z1: z1 * s, z2: z2 * s, z3: z3 * s, z4: z4 * s };
        prop_assert_eq!(g.ratio_exact(), scaled.ratio_exact());
    }

    #[test]
    fn encoder_error_is_bounded(angle in -1e4..1e4f64) {
        let e = encoder::Encoder::default();
        let err = encoder::angle_diff_deg(e.dequantize(e.read(angle)), encoder::wrap_deg(angle)).abs();
        prop_assert!(err <= e.lsb_deg() / 2.0 + 1e-9);
    }

    #[test]
    fn interleaving_conserves_demand_and_bounds_lag(d in demand_strategy(), chunk in 0.5..10.0f64) {
        let c = HandConfig::default();
        let s = scheduler::plan_interleaved(&d, &c, chunk).unwrap();
        let k = c.k();
        let active: Vec<usize> = d.active_shafts().collect();
        let rounds = active.iter().map(|&i| (d.0[i].abs() / chunk).ceil() as usize).max().unwrap_or(0);
        let mut done = [0.0; NUM_SHAFTS];
        for phase in &s.phases {
            for r in &phase.runs {
                prop_assert!((r.motor_deg / k).abs() <= chunk * (1.0 + 1e-12));
                done[r.shaft] += r.motor_deg / k;
            }
            if rounds > 0 {
                let fractions: Vec<f64> = active.iter().map(|&i| done[i] / d.0[i]).collect();
                let spread = fractions.iter().cloned().fold(f64::MIN, f64::max)
                    - fractions.iter().cloned().fold(f64::MAX, f64::min);
                prop_assert!(spread <= 1.0 / rounds as f64 + 1e-9, "spread {}", spread);
            }
        }
        for (got, want) in done.iter().zip(d.0) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-9);
        }
    }

    #[test]
    fn growing_a_demand_never_shortens_the_plan(d in demand_strategy(), shaft in 0usize..NUM_SHAFTS, extra in 0.0..5.0f64) {
        let c = HandConfig::default();
        let before = scheduler::plan_sequential(&d, &c).unwrap().makespan_s;
        let mut bigger = d;
        let v = bigger.0[shaft];
        bigger.0[shaft] = if v < 0.0 { v - extra } else { (v + extra).min(28.0) };
        prop_assume!(bigger.0[shaft].abs() >= v.abs());
        let after = scheduler::plan_sequential(&bigger, &c).unwrap().makespan_s;
        prop_assert!(after >= before);
    }

    #[test]
    fn event_log_replays_to_the_same_state(d in demand_strategy(), seed in any::<u64>()) {
        let c = HandConfig::default();
        let s = scheduler::plan_sequential(&d, &c).unwrap();
        let mut rt = Runtime::new(&c, RunOptions { seed, ..Default::default() });
        rt.enqueue_schedule(&s);
        rt.run_until_idle().unwrap();

        let mut replayed = HandState::new();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        tdmm::replay(&mut replayed, rt.events(), &c, &mut rng).unwrap();
        prop_assert_eq!(replayed.wheel_angles, rt.state().wheel_angles);
        prop_assert_eq!(replayed.spindle_position, rt.state().spindle_position);
        prop_assert!(replayed.engaged.is_empty());
    }

    #[test]
    fn step_size_does_not_change_the_trajectory(d in demand_strategy(), dt in 0.003..0.05f64, seed in any::<u64>()) {
        let c = HandConfig::default();
        let s = scheduler::plan_interleaved(&d, &c, 4.0).unwrap();
        let run = |step: f64| {
            let mut rt = Runtime::new(&c, RunOptions { seed, ..Default::default() });
            rt.enqueue_schedule(&s);
            while !rt.is_idle() {
                rt.step(step).unwrap();
            }
            rt.state().wheel_angles
        };
        let (coarse, fine) = (run(dt), run(dt / 10.0));
        for i in 0..NUM_SHAFTS {
            assert_abs_diff_eq!(coarse[i], fine[i], epsilon = 1e-9);
        }
    }

    #[test]
    fn telemetry_joints_follow_the_wheels(pose in prop::array::uniform9(0.0..40.0f64), dip in -10.0..10.0f64) {
        let c = HandConfig::default();
        let targets: Vec<String> = pose.iter().map(|v| format!("{v}")).collect();
        let text = format!("pose {}\ndisturb 0 dip {dip} 0.1\nwait 0.2", targets.join(" "));
        let script = tdmm_hand::sim::parse_script(&text).unwrap();
        let Ok(out) = tdmm_hand::sim::run_script(&script, &c, RunOptions::default()) else {
            // some random poses leave the coupled DIP range; those are errors, not samples
            return Ok(());
        };
        for r in &out.telemetry {
            for f in 0..3 {
                let w = FingerWheels { pip: r.wheel_angles[3 * f].max(0.0), pitch: r.wheel_angles[3 * f + 1].max(0.0), roll: r.wheel_angles[3 * f + 2] };
                let p = kinematics::forward_finger(w, &c.geometry).unwrap();
                prop_assert_eq!(r.joint_angles[f][1], p.theta2);
                prop_assert_eq!(r.joint_angles[f][2], p.theta3);
                prop_assert_eq!(r.joint_angles[f][3], p.phi3);
                if f != 0 {
                    prop_assert_eq!(r.joint_angles[f][0], p.theta1);
                } else {
                    prop_assert!(r.joint_angles[f][0] - p.theta1 == 0.0 || (r.joint_angles[f][0] - p.theta1).abs() <= dip.abs() + 1e-12);
                }
            }
        }
    }

    #[test]
    fn fingertip_matches_a_transform_chain(t1 in 0.0..120.0f64, t2 in 0.0..90.0f64, t3 in 0.0..90.0f64, roll in -45.0..45.0f64) {
        let g = FingerGeometry::default();
        let pose = kinematics::FingerPose { theta1: t1, theta2: t2, theta3: t3, phi3: roll };
        let got = kinematics::fingertip_position(&pose, &g);

        let bend = |deg: f64| Isometry3::from_parts(Translation3::identity(), UnitQuaternion::from_axis_angle(&Vector3::y_axis(), deg.to_radians()));
        let link = |len: f64| Isometry3::translation(0.0, 0.0, len);
        let base = Isometry3::from_parts(Translation3::identity(), UnitQuaternion::from_axis_angle(&Vector3::z_axis(), roll.to_radians()));
        let [l0, l1, l2] = g.link_lengths;
        let chain = base * bend(t3) * link(l0) * bend(t2) * link(l1) * bend(t1) * link(l2);
        let want = chain * Point3::origin();
        for (a, b) in got.iter().zip(want.iter()) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-9);
        }
    }
}
