//! Synthetic datasets with multiplicative Gaussian noise.

use alloc::vec::Vec;

use rand_distr::{Distribution, StandardNormal};

use super::{DataPoint, DataSeries, SeriesKind, ShotNoise, T1Model, T1Params};
use crate::error::{ensure, Result};
use crate::rng::{stream, STREAM_DATA_NOISE};

/// Twelve temperatures from 30 to 250 mK.
pub fn default_temperatures() -> Vec<f64> {
    (0..12).map(|i| 0.03 + 0.02 * i as f64).collect()
}

fn noisy(
    kind: SeriesKind,
    temps: &[f64],
    rel_noise: f64,
    seed: u64,
    truth: impl Fn(f64) -> f64,
) -> Result<DataSeries> {
    ensure!(
        (0.0..0.2).contains(&rel_noise),
        Domain,
        "relative noise must lie in [0, 0.2)"
    );
    let mut rng = stream(seed, STREAM_DATA_NOISE);
    let points = temps
        .iter()
        .map(|&t| {
            let y = truth(t);
            let z: f64 = StandardNormal.sample(&mut rng);
            DataPoint {
                t_k: t,
                rate_per_s: y * (1.0 + rel_noise * z),
                sigma_per_s: (rel_noise > 0.0).then_some(rel_noise * y),
            }
        })
        .collect();
    DataSeries::new(kind, points)
}

/// `T1` rates from `params` with noise `rel_noise` (standard deviation as
/// a fraction of the true rate), which is also recorded as sigma.
pub fn synthesize_t1(
    params: &T1Params,
    temps: &[f64],
    rel_noise: f64,
    seed: u64,
) -> Result<DataSeries> {
    noisy(SeriesKind::T1, temps, rel_noise, seed, |t| params.rate(t))
}

pub fn synthesize_t2(
    shot: &ShotNoise,
    t1: &T1Model,
    n0: f64,
    gamma_offset: f64,
    temps: &[f64],
    rel_noise: f64,
    seed: u64,
) -> Result<DataSeries> {
    noisy(SeriesKind::T2Star, temps, rel_noise, seed, |t| {
        shot.t2_star_rate(t, t1, n0, gamma_offset)
    })
}
