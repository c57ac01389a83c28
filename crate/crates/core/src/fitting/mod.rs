//! Least-squares engine and the coherence-versus-temperature models.
//!
//! Data are carried as rates (s^-1). Points without uncertainties are
//! weighted relatively (`sigma = |y|`) and the covariance is then scaled by
//! the reduced chi-square; with uncertainties the covariance is absolute.

mod dephasing;
mod lm;
mod synth;

use alloc::string::{String, ToString};
use alloc::vec::Vec;

// libm-backed float math when std is absent from the build
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{ensure, Error, Result};
use crate::physcore::{bose_occupation, temperature_from_occupation, BCS_RATIO};
use crate::quasiparticle::{crossover_temperature, thermal_term};

pub use dephasing::{
    pure_dephasing_from_echo, resonator_thermometry, shot_noise_dephasing, Thermometry,
    MAX_THERMOMETRY_OCCUPATION,
};
pub use lm::{Bounds, LevenbergMarquardt, LsqSolution};
pub use synth::{default_temperatures, synthesize_t1, synthesize_t2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SeriesKind {
    T1,
    T2Star,
    T2Echo,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataPoint {
    pub t_k: f64,
    pub rate_per_s: f64,
    pub sigma_per_s: Option<f64>,
}

impl DataPoint {
    /// From a time and optional time uncertainty in microseconds.
    pub fn from_time_us(t_k: f64, value_us: f64, sigma_us: Option<f64>) -> Self {
        let rate = 1e6 / value_us;
        DataPoint {
            t_k,
            rate_per_s: rate,
            sigma_per_s: sigma_us.map(|s| rate * s / value_us),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataSeries {
    pub kind: SeriesKind,
    pub points: Vec<DataPoint>,
}

impl DataSeries {
    /// Temperatures and rates must be positive; uncertainties, if any, on
    /// every point and positive.
    pub fn new(kind: SeriesKind, points: Vec<DataPoint>) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            ensure!(
                p.t_k > 0.0 && p.t_k.is_finite(),
                Domain,
                "point {i}: temperature must be positive"
            );
            ensure!(
                p.rate_per_s > 0.0 && p.rate_per_s.is_finite(),
                Domain,
                "point {i}: value must be positive"
            );
            if let Some(s) = p.sigma_per_s {
                ensure!(
                    s > 0.0 && s.is_finite(),
                    Domain,
                    "point {i}: sigma must be positive"
                );
            }
        }
        let with_sigma = points.iter().filter(|p| p.sigma_per_s.is_some()).count();
        ensure!(
            with_sigma == 0 || with_sigma == points.len(),
            Domain,
            "sigma must be given for all points or none"
        );
        Ok(DataSeries { kind, points })
    }

    pub fn has_sigma(&self) -> bool {
        self.points.first().is_some_and(|p| p.sigma_per_s.is_some())
    }

    /// Points in a canonical order, so fits do not depend on input order.
    pub fn sorted_points(&self) -> Vec<DataPoint> {
        let mut p = self.points.clone();
        p.sort_by(|a, b| {
            a.t_k
                .total_cmp(&b.t_k)
                .then(a.rate_per_s.total_cmp(&b.rate_per_s))
                .then(
                    a.sigma_per_s
                        .unwrap_or(0.0)
                        .total_cmp(&b.sigma_per_s.unwrap_or(0.0)),
                )
        });
        p
    }

    fn temperature_span(&self) -> (f64, f64) {
        self.points
            .iter()
            .fold((f64::INFINITY, 0.0), |(lo, hi), p| {
                (lo.min(p.t_k), hi.max(p.t_k))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub names: Vec<String>,
    pub units: Vec<String>,
    pub values: Vec<f64>,
    /// One standard uncertainty per parameter; `None` when the Jacobian at
    /// the optimum lacks full column rank.
    pub std_errors: Option<Vec<f64>>,
    /// Row-major covariance matching `std_errors`.
    pub covariance: Option<Vec<f64>>,
    /// Weighted sum of squared residuals.
    pub residual_sum: f64,
    pub dof: usize,
    /// Whether the uncertainties come from given sigmas (true) or were
    /// scaled by the reduced chi-square.
    pub absolute_sigma: bool,
    pub iterations: usize,
    pub step_norm: f64,
    /// `(T, data, model)` per point in canonical order.
    pub residuals: Vec<(f64, f64, f64)>,
}

impl FitResult {
    pub fn value(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.values[i])
    }

    pub fn std_error(&self, name: &str) -> Option<f64> {
        let i = self.names.iter().position(|n| n == name)?;
        self.std_errors.as_ref().map(|e| e[i])
    }

    pub fn reduced_chi_square(&self) -> f64 {
        if self.dof == 0 {
            f64::NAN
        } else {
            self.residual_sum / self.dof as f64
        }
    }
}

/// A named parameter with a starting value and bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpec {
    pub name: &'static str,
    pub unit: &'static str,
    pub initial: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Weighted least squares of `model(T, p)` against the series.
pub fn least_squares<M>(
    model: M,
    data: &DataSeries,
    params: &[ParamSpec],
    engine: &LevenbergMarquardt,
) -> Result<FitResult>
where
    M: Fn(f64, &[f64]) -> f64,
{
    let points = data.sorted_points();
    let absolute = data.has_sigma();
    let sigma: Vec<f64> = points
        .iter()
        .map(|p| p.sigma_per_s.unwrap_or(p.rate_per_s.abs()))
        .collect();
    let bounds = Bounds::new(
        params.iter().map(|p| p.lower).collect(),
        params.iter().map(|p| p.upper).collect(),
    )?;
    let x0: Vec<f64> = params.iter().map(|p| p.initial).collect();
    let sol = engine.minimize(
        |x, r| {
            for (i, p) in points.iter().enumerate() {
                r[i] = (model(p.t_k, x) - p.rate_per_s) / sigma[i];
            }
        },
        points.len(),
        &x0,
        &bounds,
    )?;
    let n = params.len();
    let dof = points.len() - n;
    let scale = if absolute || dof == 0 {
        1.0
    } else {
        sol.cost / dof as f64
    };
    let covariance = sol
        .covariance
        .map(|c| c.into_iter().map(|v| v * scale).collect::<Vec<f64>>());
    let std_errors = covariance.as_ref().and_then(|c| {
        let e: Vec<f64> = (0..n).map(|j| c[j * n + j].sqrt()).collect();
        e.iter().all(|v| v.is_finite()).then_some(e)
    });
    Ok(FitResult {
        names: params.iter().map(|p| p.name.to_string()).collect(),
        units: params.iter().map(|p| p.unit.to_string()).collect(),
        residuals: points
            .iter()
            .map(|p| (p.t_k, p.rate_per_s, model(p.t_k, &sol.x)))
            .collect(),
        values: sol.x,
        covariance: std_errors.as_ref().and(covariance),
        std_errors,
        residual_sum: sol.cost,
        dof,
        absolute_sigma: absolute,
        iterations: sol.iterations,
        step_norm: sol.step_norm,
    })
}

/// `Gamma_1(T) = Gamma_plateau + A sqrt(2 pi T / Delta) exp(-Delta / T)`
/// with `Delta = 1.764 T_c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct T1Params {
    pub gamma_plateau: f64,
    pub tc_k: f64,
    pub amplitude: f64,
}

impl T1Params {
    pub fn rate(&self, t_k: f64) -> f64 {
        t1_rate(t_k, self.gamma_plateau, self.tc_k, self.amplitude)
    }

    /// Plateau over amplitude: the reduced QP density that would produce
    /// the plateau if it were entirely QP limited.
    pub fn x_nqp_inferred(&self) -> f64 {
        self.gamma_plateau / self.amplitude
    }
}

fn t1_rate(t_k: f64, plateau: f64, tc_k: f64, amplitude: f64) -> f64 {
    let delta = BCS_RATIO * tc_k;
    plateau + amplitude * thermal_term(t_k, delta).unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, PartialEq)]
pub struct T1Fit {
    pub result: FitResult,
    pub params: T1Params,
    /// Model dependent: valid only if the plateau is QP limited.
    pub x_nqp_inferred: f64,
    /// Temperature where the thermal density equals `x_nqp_inferred`.
    pub crossover_k: Option<f64>,
}

const TC_SEED_GRID: (f64, f64, usize) = (0.5, 2.5, 201);

/// Best non-negative `(plateau, amplitude)` for fixed `T_c`: the model is
/// linear in both.
fn t1_linear_seed(points: &[DataPoint], tc_k: f64) -> (f64, f64, f64) {
    let delta = BCS_RATIO * tc_k;
    let rows: Vec<(f64, f64, f64)> = points
        .iter()
        .map(|p| {
            let w = 1.0 / p.sigma_per_s.unwrap_or(p.rate_per_s);
            (
                w,
                w * thermal_term(p.t_k, delta).unwrap_or(0.0),
                w * p.rate_per_s,
            )
        })
        .collect();
    let cost = |c: f64, a: f64| {
        rows.iter()
            .map(|(u, v, y)| (c * u + a * v - y).powi(2))
            .sum::<f64>()
    };
    let (suu, suv, svv, suy, svy) = rows.iter().fold((0.0, 0.0, 0.0, 0.0, 0.0), |s, (u, v, y)| {
        (
            s.0 + u * u,
            s.1 + u * v,
            s.2 + v * v,
            s.3 + u * y,
            s.4 + v * y,
        )
    });
    let det = suu * svv - suv * suv;
    let mut candidates = alloc::vec![(suy / suu, 0.0)];
    if svv > 0.0 {
        candidates.push((0.0, svy / svv));
    }
    if det > 0.0 {
        candidates.push(((suy * svv - svy * suv) / det, (svy * suu - suy * suv) / det));
    }
    candidates
        .into_iter()
        .filter(|&(c, a)| c >= 0.0 && a >= 0.0)
        .map(|(c, a)| (c, a, cost(c, a)))
        .min_by(|x, y| x.2.total_cmp(&y.2))
        .unwrap_or((0.0, 0.0, f64::INFINITY))
}

/// Fits the plateau-plus-thermal-QP model to a `T1` rate series.
pub fn fit_t1_vs_temperature(data: &DataSeries) -> Result<T1Fit> {
    fit_t1_with(data, &LevenbergMarquardt::default())
}

pub fn fit_t1_with(data: &DataSeries, engine: &LevenbergMarquardt) -> Result<T1Fit> {
    ensure!(
        data.points.len() >= 4,
        Domain,
        "need at least 4 points, got {}",
        data.points.len()
    );
    let (lo, hi) = data.temperature_span();
    ensure!(
        hi > 1.5 * lo,
        Domain,
        "temperatures span {lo}..{hi} K; need max > 1.5 min to reach the thermal region"
    );
    let points = data.sorted_points();
    let (tc_lo, tc_hi, steps) = TC_SEED_GRID;
    let (tc0, (c0, a0, _)) = (0..steps)
        .map(|i| {
            let tc = tc_lo + (tc_hi - tc_lo) * i as f64 / (steps - 1) as f64;
            (tc, t1_linear_seed(&points, tc))
        })
        .min_by(|x, y| x.1 .2.total_cmp(&y.1 .2))
        .expect("non-empty grid");
    let scale = points.iter().map(|p| p.rate_per_s).fold(0.0, f64::max);
    let params = [
        ParamSpec {
            name: "gamma_plateau",
            unit: "1/s",
            initial: c0.max(1e-9 * scale),
            lower: 0.0,
            upper: f64::INFINITY,
        },
        ParamSpec {
            name: "tc",
            unit: "K",
            initial: tc0,
            lower: 0.2,
            upper: 3.0,
        },
        ParamSpec {
            name: "amplitude",
            unit: "1/s",
            initial: a0.max(1e-9 * scale),
            lower: 0.0,
            upper: f64::INFINITY,
        },
    ];
    let result = least_squares(|t, p| t1_rate(t, p[0], p[1], p[2]), data, &params, engine)?;
    let fitted = T1Params {
        gamma_plateau: result.values[0],
        tc_k: result.values[1],
        amplitude: result.values[2],
    };
    check_monotone(&fitted, lo, hi)?;
    let x_nqp_inferred = fitted.x_nqp_inferred();
    let crossover_k = if x_nqp_inferred.is_finite() && x_nqp_inferred > 0.0 {
        crossover_temperature(x_nqp_inferred, BCS_RATIO * fitted.tc_k).ok()
    } else {
        None
    };
    Ok(T1Fit {
        result,
        params: fitted,
        x_nqp_inferred,
        crossover_k,
    })
}

fn check_monotone(p: &T1Params, lo: f64, hi: f64) -> Result<()> {
    let mut last = p.rate(lo);
    for i in 1..=256 {
        let r = p.rate(lo + (hi - lo) * i as f64 / 256.0);
        if !(r >= last) {
            return Err(Error::Numerical(alloc::format!(
                "fitted T1 model is not monotone in T ({p:?})"
            )));
        }
        last = r;
    }
    Ok(())
}

/// Energy relaxation entering the `T2*` model.
#[derive(Debug, Clone, PartialEq)]
pub enum T1Model {
    Fitted(T1Params),
    /// `(T, rate)` pairs, linear interpolation clamped at the ends.
    Interpolated(Vec<(f64, f64)>),
    Constant(f64),
}

impl T1Model {
    pub fn rate(&self, t_k: f64) -> f64 {
        match self {
            T1Model::Fitted(p) => p.rate(t_k),
            T1Model::Constant(r) => *r,
            T1Model::Interpolated(pts) => {
                if pts.is_empty() {
                    return f64::NAN;
                }
                let i = pts.partition_point(|p| p.0 <= t_k);
                if i == 0 {
                    pts[0].1
                } else if i == pts.len() {
                    pts[pts.len() - 1].1
                } else {
                    let (t0, r0) = pts[i - 1];
                    let (t1, r1) = pts[i];
                    r0 + (r1 - r0) * (t_k - t0) / (t1 - t0)
                }
            }
        }
    }

    /// Interpolation table from a measured series.
    pub fn from_series(data: &DataSeries) -> Self {
        T1Model::Interpolated(
            data.sorted_points()
                .iter()
                .map(|p| (p.t_k, p.rate_per_s))
                .collect(),
        )
    }
}

/// Readout resonator parameters for shot-noise dephasing, ordinary MHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShotNoise {
    pub chi_mhz: f64,
    pub kappa_mhz: f64,
    pub nu_r_ghz: f64,
}

impl ShotNoise {
    /// Occupation at temperature `t_k` plus the floor `n0`.
    pub fn occupation(&self, t_k: f64, n0: f64) -> f64 {
        bose_occupation(self.nu_r_ghz, t_k).unwrap_or(f64::NAN) + n0
    }

    /// `1/T2* = Gamma_1 / 2 + Gamma_phi(n_th(T) + n0) + gamma_offset`.
    pub fn t2_star_rate(&self, t_k: f64, t1: &T1Model, n0: f64, gamma_offset: f64) -> f64 {
        let n = self.occupation(t_k, n0);
        let phi =
            shot_noise_dephasing(self.chi_mhz, self.kappa_mhz, n.max(0.0)).unwrap_or(f64::NAN);
        0.5 * t1.rate(t_k) + phi + gamma_offset
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct T2Fit {
    pub result: FitResult,
    pub n0: f64,
    pub gamma_offset: f64,
    /// Resonator temperature whose Bose occupation equals `n0`.
    pub effective_temperature_k: Option<f64>,
}

pub fn fit_t2_vs_temperature(data: &DataSeries, shot: &ShotNoise, t1: &T1Model) -> Result<T2Fit> {
    fit_t2_with(data, shot, t1, &LevenbergMarquardt::default())
}

pub fn fit_t2_with(
    data: &DataSeries,
    shot: &ShotNoise,
    t1: &T1Model,
    engine: &LevenbergMarquardt,
) -> Result<T2Fit> {
    ensure!(
        data.points.len() >= 3,
        Domain,
        "need at least 3 points, got {}",
        data.points.len()
    );
    shot_noise_dephasing(shot.chi_mhz, shot.kappa_mhz, 0.0)?;
    ensure!(
        shot.nu_r_ghz > 0.0,
        Domain,
        "resonator frequency must be positive"
    );
    let points = data.sorted_points();
    for p in &points {
        ensure!(
            t1.rate(p.t_k).is_finite(),
            Domain,
            "T1 model undefined at {} K",
            p.t_k
        );
    }

    // seed n0 on a grid with the offset fixed by weighted averaging
    let seed = (0..=40)
        .map(|i| {
            if i == 0 {
                0.0
            } else {
                1e-4 * 10f64.powf(i as f64 / 10.0)
            }
        })
        .map(|n0| {
            let (mut num, mut den) = (0.0, 0.0);
            let w: Vec<(f64, f64)> = points
                .iter()
                .map(|p| {
                    let s = p.sigma_per_s.unwrap_or(p.rate_per_s);
                    (
                        p.rate_per_s - shot.t2_star_rate(p.t_k, t1, n0, 0.0),
                        1.0 / (s * s),
                    )
                })
                .collect();
            for (d, wi) in &w {
                num += d * wi;
                den += wi;
            }
            let off = (num / den).max(0.0);
            let cost: f64 = w.iter().map(|(d, wi)| (d - off).powi(2) * wi).sum();
            (n0, off, cost)
        })
        .min_by(|a, b| a.2.total_cmp(&b.2))
        .expect("non-empty grid");
    let scale = points.iter().map(|p| p.rate_per_s).fold(0.0, f64::max);
    let params = [
        ParamSpec {
            name: "n0",
            unit: "",
            initial: seed.0.max(1e-4),
            lower: 0.0,
            upper: MAX_THERMOMETRY_OCCUPATION,
        },
        ParamSpec {
            name: "gamma_offset",
            unit: "1/s",
            initial: seed.1.max(1e-6 * scale),
            lower: 0.0,
            upper: f64::INFINITY,
        },
    ];
    let result = least_squares(
        |t, p| shot.t2_star_rate(t, t1, p[0], p[1]),
        data,
        &params,
        engine,
    )?;
    let n0 = result.values[0];
    Ok(T2Fit {
        n0,
        gamma_offset: result.values[1],
        effective_temperature_k: (n0 > 0.0)
            .then(|| temperature_from_occupation(n0, shot.nu_r_ghz).ok())
            .flatten(),
        result,
    })
}
