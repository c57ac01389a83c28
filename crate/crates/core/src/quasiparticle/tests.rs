use super::*;
use crate::physcore::{delta_from_tc, kelvin_to_ev, kelvin_to_ghz, Constants};
use alloc::vec;
use proptest::prelude::*;

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs()
}

fn stack_profile(stack: &(Vec<StackSegment>, f64)) -> GapProfile {
    profile_from_stack(
        &stack.0,
        stack.1,
        &ThicknessTcTable::default(),
        &Constants::DEFAULT,
    )
    .unwrap()
}

/// `[trap][electrode] J [electrode][trap]` with electrodes of 1 um.
fn trap_profile(left_trap_um: Option<f64>, right_trap_um: Option<f64>, depth: f64) -> GapProfile {
    let d = 2.29;
    let mut segs = Vec::new();
    if let Some(l) = left_trap_um {
        segs.push(GapSegment {
            length_um: l,
            delta_k: d - depth,
        });
    }
    segs.push(GapSegment {
        length_um: 1.0,
        delta_k: d,
    });
    let junction = segs.iter().map(|s| s.length_um).sum();
    segs.push(GapSegment {
        length_um: 1.0,
        delta_k: d,
    });
    if let Some(r) = right_trap_um {
        segs.push(GapSegment {
            length_um: r,
            delta_k: d - depth,
        });
    }
    GapProfile::new(segs, junction).unwrap()
}

#[test]
fn thickness_table_defaults() {
    let t = ThicknessTcTable::default();
    assert_eq!(tc_from_thickness(25.0, &t).unwrap(), 1.6);
    assert_eq!(tc_from_thickness(60.0, &t).unwrap(), 1.3);
    assert!((tc_from_thickness(32.5, &t).unwrap() - 1.45).abs() < 1e-12);
    assert_eq!(tc_from_thickness(5.0, &t).unwrap(), 1.6);
    assert!(ThicknessTcTable::new(vec![]).is_err());
    assert!(ThicknessTcTable::new(vec![(20.0, 1.3), (40.0, 1.6)]).is_err());
    assert!(tc_from_thickness(0.0, &t).is_err());
}

#[test]
fn protected_stack_shape() {
    let p = stack_profile(&protected_stack());
    assert_eq!(p.junction_index(), 2);
    let strip = p.adjacent_delta(Side::Left);
    let top = p.adjacent_delta(Side::Right);
    assert!(strip > top);
    let step = 1.764 * (1.6 - 1.3);
    assert!((p.barrier_height(Side::Left) - step).abs() < 1e-12);
    assert!((p.barrier_height(Side::Left) - 0.53).abs() < 0.01);
    assert_eq!(p.barrier_height(Side::Right), 0.0);
    assert!((p.tunnelling_barrier() - step).abs() < 1e-12);
    assert_eq!(p.junction_delta(), top);
}

#[test]
fn uniform_and_unprotected_stacks() {
    let flat = profile_from_stack(
        &[
            StackSegment::thickness(4.0, 30.0),
            StackSegment::thickness(4.0, 30.0),
        ],
        4.0,
        &ThicknessTcTable::default(),
        &Constants::DEFAULT,
    )
    .unwrap();
    assert_eq!(flat.barrier_height(Side::Left), 0.0);
    assert_eq!(flat.barrier_height(Side::Right), 0.0);
    assert_eq!(flat.tunnelling_barrier(), 0.0);

    let np = stack_profile(&unprotected_stack());
    assert_eq!(np.barrier_height(Side::Left), 0.0);
    assert_eq!(np.barrier_height(Side::Right), 0.0);
    assert_eq!(np.tunnelling_barrier(), 0.0);
    let v = barrier_adequate(&np, &QpEnvironment::default(), 5.0).unwrap();
    assert!(!v.protected());
}

#[test]
fn explicit_gap_segments() {
    let p = profile_from_stack(
        &[StackSegment::delta(1.0, 2.0), StackSegment::delta(2.0, 2.5)],
        1.0,
        &ThicknessTcTable::default(),
        &Constants::DEFAULT,
    )
    .unwrap();
    assert_eq!(p.segments()[1].delta_k, 2.5);
}

#[test]
fn junction_must_sit_on_interior_boundary() {
    let segs = vec![
        GapSegment {
            length_um: 1.0,
            delta_k: 2.0,
        },
        GapSegment {
            length_um: 2.0,
            delta_k: 2.5,
        },
    ];
    for bad in [0.5, 0.0, 3.0, 2.0] {
        assert!(matches!(
            GapProfile::new(segs.clone(), bad),
            Err(Error::Geometry(_))
        ));
    }
    assert!(GapProfile::new(segs.clone(), 1.0).is_ok());
    let neg = vec![
        GapSegment {
            length_um: -1.0,
            delta_k: 2.0,
        },
        segs[1],
    ];
    assert!(GapProfile::new(neg, -1.0).is_err());
}

#[test]
fn thermal_fraction_at_crossover() {
    let d = delta_from_tc(1.31).unwrap();
    let th = thermal_qp_fraction(0.169, d, 0.0).unwrap();
    assert!(close(th, 8.0e-7, 0.05), "{th:e}");
    assert_eq!(thermal_qp_fraction(1e-3, d, 3e-7).unwrap(), 3e-7);
}

#[test]
fn crossover_from_x_nqp() {
    let d = delta_from_tc(1.31).unwrap();
    let t = crossover_temperature(8.0e-7, d).unwrap();
    assert!((t - 0.169).abs() < 0.002, "{t}");
    let x = thermal_term(0.2, d).unwrap();
    assert!((crossover_temperature(x, d).unwrap() - 0.2).abs() < 1e-9);
    assert!(crossover_temperature(1e-6, d).unwrap() > t);
    assert!(matches!(
        crossover_temperature(0.9, d),
        Err(Error::Domain(_))
    ));
    assert!(crossover_temperature(0.0, d).is_err());
}

fn one_np() -> (f64, f64, f64, f64) {
    (
        21.67,
        0.150,
        4.95,
        kelvin_to_ghz(delta_from_tc(1.31).unwrap()),
    )
}

#[test]
fn nqp_fraction_of_1np() {
    let (ej, ec, f, d) = one_np();
    let x = x_from_rate(ej, ec, f, d, 1.0 / 12e-6).unwrap();
    assert!(close(x, 1.8e-6, 0.10), "{x:e}");
    // the supplementary 2.6e-6 follows from using half the gap
    let x_half = x_from_rate(ej, ec, f, d / 2.0, 1.0 / 12e-6).unwrap();
    assert!(close(x_half, 2.6e-6, 0.05), "{x_half:e}");
    assert_eq!(nqp_decay_rate(ej, ec, f, d, 0.0).unwrap(), 0.0);
    let g = nqp_decay_rate(ej, ec, f, d, 1e-6).unwrap();
    assert_eq!(nqp_decay_rate(ej, ec, f, d, 2e-6).unwrap(), 2.0 * g);
    assert!(nqp_decay_rate(0.0, ec, f, d, 1e-6).is_err());
}

#[test]
fn nqp_prefactor_by_hand() {
    // 32 E_J sqrt(D / 2f) sqrt(E_C / 8 E_J), written out with E_J = 8, E_C = 4,
    // f = 2, D = 16 GHz: 32 * 8e9 * 2 * 0.25 = 1.28e11
    let g = nqp_decay_rate(8.0, 4.0, 2.0, 16.0, 1.0).unwrap();
    assert!(close(g, 1.28e11, 1e-14));
}

#[test]
fn volume_density_values() {
    let d_ev = kelvin_to_ev(delta_from_tc(1.31).unwrap());
    let n = volume_density(2.6e-6, 1.72e10, d_ev).unwrap();
    assert!(close(n, 19.6, 0.10), "{n}");
    let lo = volume_density(8e-7, 1.6e10, d_ev).unwrap();
    let hi = volume_density(1.8e-6, 1.72e10, d_ev).unwrap();
    assert!(close(lo, 5.0, 0.05) && close(hi, 12.0, 0.05), "{lo} {hi}");
    assert_eq!(volume_density(0.0, 1.72e10, d_ev).unwrap(), 0.0);
    let x = x_from_volume_density(n, 1.72e10, d_ev).unwrap();
    assert!(close(x, 2.6e-6, 1e-14));
}

#[test]
fn tau_power_law() {
    let env = QpEnvironment::default();
    assert!(close(tau_eps(0.5, &env).unwrap(), 1e-5, 1e-12));
    assert!(close(tau_eps(14.0, &env).unwrap(), 1e-11, 1e-12));
    let mid = (0.5f64 * 14.0).sqrt();
    assert!(close(tau_eps(mid, &env).unwrap(), 1e-8, 1e-10));
    assert!(tau_eps(0.0, &env).is_err());
    let short = QpEnvironment {
        tau_anchors: vec![(0.5, 1e-5)],
        ..env.clone()
    };
    assert!(matches!(tau_eps(1.0, &short), Err(Error::Config(_))));
    assert!(short.validate().is_err());
    assert!(env.validate().is_ok());
    let rising = QpEnvironment {
        tau_anchors: vec![(0.5, 1e-5), (1.0, 2e-5)],
        ..env
    };
    assert!(rising.validate().is_err());
}

#[test]
fn tau_three_anchors_piecewise() {
    let env = QpEnvironment {
        tau_anchors: vec![(1.0, 1.0), (10.0, 1e-2), (100.0, 1e-6)],
        ..QpEnvironment::default()
    };
    // slope 2 below 10 K and 4 above
    assert!(close(tau_eps(0.1, &env).unwrap(), 1e2, 1e-10));
    assert!(close(tau_eps(1000.0, &env).unwrap(), 1e-10, 1e-10));
}

#[test]
fn diffusion_lengths() {
    let env = QpEnvironment::default();
    let l = diffusion_length(0.5, &env).unwrap();
    assert!((l - 300.0).abs() <= 30.0, "{l}");
    assert!(close(l, (0.01f64 * 1e-5).sqrt() * 1e6, 1e-12));
    let fast = QpEnvironment {
        diffusion_m2_s: 0.04,
        ..env.clone()
    };
    assert!(close(diffusion_length(0.5, &fast).unwrap(), 2.0 * l, 1e-14));
    let hot = diffusion_length(14.0, &env).unwrap();
    assert!(close(hot, 0.316_227_766, 1e-6), "{hot}");
}

#[test]
fn barrier_on_protected_profile() {
    let env = QpEnvironment::default();
    let v = barrier_adequate(&stack_profile(&protected_stack()), &env, 5.0).unwrap();
    assert!(v.protected());
    assert!(v.left.protected && !v.right.protected);
    assert!((v.left.margin - 6.0).abs() < 1e-12);
    assert_eq!(v.margin(), v.left.margin);
    assert!(barrier_adequate(&stack_profile(&protected_stack()), &env, 2.0).is_err());
}

#[test]
fn narrow_strip_is_not_a_barrier() {
    let p = profile_from_stack(
        &[
            StackSegment::thickness(5.0, 40.0),
            StackSegment::thickness(0.2, 25.0),
            StackSegment::thickness(5.0, 60.0),
        ],
        5.2,
        &ThicknessTcTable::default(),
        &Constants::DEFAULT,
    )
    .unwrap();
    let v = barrier_adequate(&p, &QpEnvironment::default(), 5.0).unwrap();
    assert!(!v.protected());
    assert!((v.left.margin - 0.4).abs() < 1e-12);
}

#[test]
fn traps() {
    let env = QpEnvironment::default();
    assert!(
        !trap_adequate(&trap_profile(Some(100.0), Some(100.0), 0.5), &env)
            .unwrap()
            .adequate()
    );
    let both = trap_adequate(&trap_profile(Some(400.0), Some(400.0), 0.5), &env).unwrap();
    assert!(both.adequate());
    assert!((both.left.required_um - 316.227_766).abs() < 1e-3);
    assert!(!trap_adequate(&trap_profile(Some(1e5), None, 0.5), &env)
        .unwrap()
        .adequate());
}

#[test]
fn protected_profile_barrier_not_trap() {
    let env = QpEnvironment::default();
    let p = stack_profile(&protected_stack());
    assert!(
        barrier_adequate(&p, &env, DEFAULT_BARRIER_SAFETY)
            .unwrap()
            .left
            .protected
    );
    assert!(!trap_adequate(&p, &env).unwrap().adequate());
}

/// Composite Simpson over `s` with `E = Delta + s^2`, where
/// `rho dE = 2 (Delta + s^2) / sqrt(2 Delta + s^2) ds`.
fn simpson_tail(s0: f64, delta: f64, t: f64, nodes: usize) -> f64 {
    let s1 = (s0 * s0 + 60.0 * t).sqrt();
    let n = nodes - 1 + (nodes - 1) % 2;
    let h = (s1 - s0) / n as f64;
    let f = |s: f64| {
        let s2 = s * s;
        2.0 * (delta + s2) / (2.0 * delta + s2).sqrt() * (-s2 / t).exp()
    };
    let mut acc = f(s0) + f(s1);
    for i in 1..n {
        acc += f(s0 + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

#[test]
fn above_barrier_against_fine_grid() {
    for (b, t, d) in [(0.53, 0.05, 2.29), (0.53, 0.169, 2.311), (0.2, 0.1, 2.29)] {
        let got = above_barrier_fraction(b, t, d).unwrap();
        let oracle = simpson_tail(b.sqrt(), d, t, 1_000_001) / simpson_tail(0.0, d, t, 1_000_001);
        assert!(close(got, oracle, 1e-6), "{b} {t}: {got:e} vs {oracle:e}");
    }
    assert!(above_barrier_fraction(0.53, 0.05, 2.29).unwrap() < 1e-4);
    assert_eq!(above_barrier_fraction(0.0, 0.05, 2.29).unwrap(), 1.0);
    assert!(above_barrier_fraction(-0.1, 0.05, 2.29).is_err());
    assert!(above_barrier_fraction(0.5, 0.0, 2.29).is_err());
}

#[test]
fn above_barrier_hot_limit() {
    // For T >> Delta the missing weight is the edge integral
    // int_D^{D+b} rho dE = sqrt(b (2 D + b)), Boltzmann factor e^{-D/T},
    // over a total of about T.
    let (b, d) = (0.53, 2.29);
    let t = 100.0 * b;
    let f = above_barrier_fraction(b, t, d).unwrap();
    let edge = (b * (2.0 * d + b)).sqrt();
    assert!(
        (f - (1.0 - edge * (-d / t).exp() / t)).abs() < 0.02 * (1.0 - f),
        "{f}"
    );
    let far = above_barrier_fraction(b, 1000.0 * b, d).unwrap();
    assert!(far > 0.98 && far <= 1.0, "{far}");
}

#[test]
fn above_barrier_decreasing_in_height() {
    let mut last = 1.0;
    for i in 1..=40 {
        let f = above_barrier_fraction(0.025 * i as f64, 0.05, 2.29).unwrap();
        assert!(f < last);
        last = f;
    }
    // deep barriers underflow to zero without NaN
    assert_eq!(above_barrier_fraction(60.0, 0.05, 2.29).unwrap(), 0.0);
}

proptest! {
    #[test]
    fn crossover_inverts_thermal_term(t in 0.03f64..0.9, tc in 1.0f64..1.8) {
        let d = delta_from_tc(tc).unwrap();
        prop_assume!(t < d / 2.0);
        let x = thermal_term(t, d).unwrap();
        let back = crossover_temperature(x, d).unwrap();
        prop_assert!(close(back, t, 1e-6), "{} vs {}", back, t);
    }

    #[test]
    fn thermal_term_monotone(t in 0.01f64..1.0, dt in 1e-4f64..0.1) {
        prop_assert!(thermal_term(t + dt, 2.3).unwrap() > thermal_term(t, 2.3).unwrap());
    }

    #[test]
    fn rate_inverse_is_exact(x in 0.0f64..1e-4, ej in 1.0f64..50.0, ec in 0.05f64..1.0) {
        let d = 48.0;
        let g = nqp_decay_rate(ej, ec, 5.0, d, x).unwrap();
        let back = x_from_rate(ej, ec, 5.0, d, g).unwrap();
        prop_assert!((back - x).abs() <= 4.0 * f64::EPSILON * x);
    }

    #[test]
    fn barrier_monotone_in_strip_length(len in 0.01f64..2.0, extra in 0.0f64..2.0) {
        let env = QpEnvironment::default();
        let verdict = |l: f64| {
            let p = GapProfile::new(
                vec![
                    GapSegment { length_um: 5.0, delta_k: 2.29 },
                    GapSegment { length_um: l, delta_k: 2.82 },
                    GapSegment { length_um: 5.0, delta_k: 2.29 },
                ],
                5.0 + l,
            )
            .unwrap();
            barrier_adequate(&p, &env, 5.0).unwrap().protected()
        };
        prop_assert!(!verdict(len) || verdict(len + extra));
    }
}
