//! End-to-end use of the public API, crossing module boundaries.

use proptest::prelude::*;

use qpgap_core::dynamics::{
    estimate_parity_lifetime, simulate_offset_charge, simulate_parity, synthesize_scan,
    LifetimeVerdict, NoiseModel, ParityRateModel, ScanConfig,
};
use qpgap_core::fitting::{fit_t1_vs_temperature, synthesize_t1, T1Params};
use qpgap_core::physcore::{Constants, BCS_RATIO};
use qpgap_core::quasiparticle::{
    barrier_adequate, profile_from_stack, QpEnvironment, StackSegment, ThicknessTcTable,
    DEFAULT_BARRIER_SAFETY,
};
use qpgap_core::transmon::{
    eigenspectrum, fit_ej_ec, parity_frequencies, FrequencyTargets, TransmonParams,
};

fn stack(bottom_nm: f64) -> Vec<StackSegment> {
    vec![
        StackSegment::thickness(5.0, bottom_nm),
        StackSegment::thickness(3.0, 25.0),
        StackSegment::thickness(5.0, 60.0),
    ]
}

#[test]
fn measured_frequencies_to_parity_verdict() {
    // frequencies of a charge-sensitive device, inverted back to (EJ, EC)
    let truth = TransmonParams::new(6.92, 0.429, 0.0).unwrap();
    let f0 = eigenspectrum(&truth, 2).unwrap().f_ge();
    let f05 = eigenspectrum(&truth.with_ng(0.5), 2).unwrap().f_ge();
    let fit = fit_ej_ec(&FrequencyTargets {
        f_ge_ng0_ghz: f0,
        f_ge_ng05_ghz: Some(f05),
        f_ef_ghz: None,
    })
    .unwrap();
    assert!((fit.params.ej_ghz - 6.92).abs() < 1e-4, "{:?}", fit.params);
    assert!((fit.params.ec_ghz - 0.429).abs() < 1e-5, "{:?}", fit.params);

    let env = QpEnvironment::default();
    let c = Constants::default();
    let table = ThicknessTcTable::default();
    let p = profile_from_stack(&stack(40.0), 8.0, &table, &c).unwrap();
    let np = profile_from_stack(&stack(25.0), 8.0, &table, &c).unwrap();
    assert!(barrier_adequate(&p, &env, DEFAULT_BARRIER_SAFETY)
        .unwrap()
        .protected());
    assert!(!barrier_adequate(&np, &env, DEFAULT_BARRIER_SAFETY)
        .unwrap()
        .protected());

    let model = ParityRateModel::default();
    let rate_p = model.rate(&p, &env, 0.03).unwrap();
    let rate_np = model.rate(&np, &env, 0.03).unwrap();
    assert!(rate_p <= 1e-3 && rate_np >= 1e2, "{rate_p} {rate_np}");

    // the slow profile rate leaves a 300 s scan in one branch for most seeds
    let duration = 300.0;
    let mut lower = 0;
    for seed in 0..5 {
        let parity = simulate_parity(rate_p, duration, seed).unwrap();
        let offset = simulate_offset_charge(&NoiseModel::default(), 0.05, duration, seed).unwrap();
        let scan = synthesize_scan(
            &fit.params,
            &parity,
            &offset,
            1.0,
            20.0,
            ScanConfig::new(4.365, 4.420, 276),
            seed,
        )
        .unwrap();
        if matches!(
            estimate_parity_lifetime(&scan).unwrap(),
            LifetimeVerdict::LowerBound(_)
        ) {
            lower += 1;
        }
    }
    assert!(lower >= 4, "{lower}/5");
}

#[test]
fn fitted_t1_gap_matches_crossover_input() {
    let plateau = 1e6 / 12.0;
    let truth = T1Params {
        gamma_plateau: plateau,
        tc_k: 1.31,
        amplitude: plateau / 8e-7,
    };
    let temps: Vec<f64> = (0..14).map(|i| 0.04 + 0.018 * i as f64).collect();
    let data = synthesize_t1(&truth, &temps, 0.02, 5).unwrap();
    let fit = fit_t1_vs_temperature(&data).unwrap();
    assert!((fit.params.tc_k - 1.31).abs() < 0.05, "{:?}", fit.params);
    assert!(
        (fit.x_nqp_inferred / 8e-7 - 1.0).abs() < 0.5,
        "{}",
        fit.x_nqp_inferred
    );
    let delta = BCS_RATIO * fit.params.tc_k;
    let tx = fit.crossover_k.unwrap();
    assert!(tx > 0.05 && tx < delta / 5.0, "{tx}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parity_branches_swap_under_half_shift(ej in 1.0f64..40.0, ec in 0.1f64..0.5, ng in 0.0f64..1.0) {
        let p = TransmonParams::new(ej, ec, ng).unwrap();
        let a = parity_frequencies(&p).unwrap();
        let b = parity_frequencies(&p.with_ng(ng + 0.5)).unwrap();
        prop_assert!((a.even_ghz - b.odd_ghz).abs() < 1e-9);
        prop_assert!((a.odd_ghz - b.even_ghz).abs() < 1e-9);
    }

    #[test]
    fn thinner_bottom_film_never_raises_the_parity_rate(t in 0.02f64..0.2) {
        let env = QpEnvironment::default();
        let c = Constants::default();
        let table = ThicknessTcTable::default();
        let p = profile_from_stack(&stack(40.0), 8.0, &table, &c).unwrap();
        let np = profile_from_stack(&stack(25.0), 8.0, &table, &c).unwrap();
        let model = ParityRateModel::default();
        prop_assert!(model.rate(&p, &env, t).unwrap() <= model.rate(&np, &env, t).unwrap());
    }
}
