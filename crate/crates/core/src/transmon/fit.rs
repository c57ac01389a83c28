//! Inversion of measured transition frequencies to (E_J, E_C).

use alloc::vec::Vec;

// libm-backed float math when std is absent from the build
#[allow(unused_imports)]
use num_traits::Float;

use super::{eigenspectrum, TransmonParams};
use crate::error::{ensure, Error, Result};
use crate::numeric::{find_root, NelderMead};

/// Measured frequencies in GHz. `f_ef_ghz` is taken at `n_g = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FrequencyTargets {
    pub f_ge_ng0_ghz: f64,
    pub f_ge_ng05_ghz: Option<f64>,
    pub f_ef_ghz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransmonFit {
    pub params: TransmonParams,
    /// Model minus target, GHz, in the order (f_ge(0), f_ge(1/2), f_ef).
    pub residuals_ghz: Vec<f64>,
    pub iterations: usize,
}

impl FrequencyTargets {
    fn validate(&self) -> Result<()> {
        let f0 = self.f_ge_ng0_ghz;
        ensure!(
            f0 > 0.0 && f0.is_finite(),
            Domain,
            "f_ge must be positive, got {f0}"
        );
        if self.f_ge_ng05_ghz.is_none() && self.f_ef_ghz.is_none() {
            return Err(Error::Underdetermined(
                "a single frequency cannot fix both E_J and E_C; \
                 supply f_ge at n_g = 1/2 or f_ef"
                    .into(),
            ));
        }
        if let Some(f05) = self.f_ge_ng05_ghz {
            let eps = f0 - f05;
            ensure!(
                f05 > 0.0,
                Domain,
                "f_ge(n_g = 1/2) must be positive, got {f05}"
            );
            ensure!(
                eps >= 0.0,
                Domain,
                "f_ge(n_g = 0) = {f0} lies below f_ge(n_g = 1/2) = {f05}"
            );
            ensure!(
                eps < f0,
                Domain,
                "charge dispersion {eps} exceeds f_ge {f0}"
            );
            if eps == 0.0 && self.f_ef_ghz.is_none() {
                return Err(Error::Underdetermined(
                    "zero charge dispersion without f_ef leaves E_J/E_C free".into(),
                ));
            }
        }
        if let Some(fef) = self.f_ef_ghz {
            ensure!(
                fef > 0.0 && fef < f0,
                Domain,
                "f_ef = {fef} must be positive and below f_ge = {f0} (negative anharmonicity)"
            );
        }
        Ok(())
    }

    fn mean_ge(&self) -> f64 {
        match self.f_ge_ng05_ghz {
            Some(f05) => 0.5 * (self.f_ge_ng0_ghz + f05),
            None => self.f_ge_ng0_ghz,
        }
    }

    /// Perturbative starting point: anharmonicity gives E_C directly;
    /// otherwise the asymptotic charge-dispersion law fixes E_J/E_C.
    fn seed(&self) -> Result<(f64, f64)> {
        let f = self.mean_ge();
        if let Some(fef) = self.f_ef_ghz {
            let ec = self.f_ge_ng0_ghz - fef;
            return Ok(((f + ec) * (f + ec) / (8.0 * ec), ec));
        }
        let eps = self.f_ge_ng0_ghz - self.f_ge_ng05_ghz.unwrap_or(self.f_ge_ng0_ghz);
        let ratio_target = (eps / f).ln();
        let log_ratio = |r: f64| {
            let s = (8.0 * r).sqrt();
            let half = 0.5 * r;
            let amp = (2.0 / core::f64::consts::PI).sqrt()
                * (32.0 * half.powf(0.75) + 512.0 * half.powf(1.25));
            amp.ln() - s - (s - 1.0).ln()
        };
        let (lo, hi) = (2.0, 2000.0);
        let r = match find_root(|r| log_ratio(r) - ratio_target, lo, hi) {
            Ok(r) => r,
            Err(Error::Bracket { .. }) => {
                if log_ratio(lo) < ratio_target {
                    lo
                } else {
                    hi
                }
            }
            Err(e) => return Err(e),
        };
        let ec = f / ((8.0 * r).sqrt() - 1.0);
        Ok((r * ec, ec))
    }
}

fn model(ej: f64, ec: f64, targets: &FrequencyTargets) -> Result<Vec<f64>> {
    let p = TransmonParams::new(ej, ec, 0.0)?;
    let s0 = eigenspectrum(&p, 3)?;
    let mut out = Vec::with_capacity(3);
    out.push(s0.f_ge() - targets.f_ge_ng0_ghz);
    if let Some(f05) = targets.f_ge_ng05_ghz {
        out.push(eigenspectrum(&p.with_ng(0.5), 2)?.f_ge() - f05);
    }
    if let Some(fef) = targets.f_ef_ghz {
        out.push(s0.f_ef() - fef);
    }
    Ok(out)
}

/// Least-squares (E_J, E_C) for the targets, by Nelder-Mead over
/// `(ln E_J, ln E_C)` from the perturbative seed.
pub fn fit_ej_ec(targets: &FrequencyTargets) -> Result<TransmonFit> {
    targets.validate()?;
    let (ej0, ec0) = targets.seed()?;
    let objective = |x: &[f64]| -> f64 {
        match model(x[0].exp(), x[1].exp(), targets) {
            Ok(r) => r.iter().map(|v| v * v).sum(),
            Err(_) => f64::INFINITY,
        }
    };
    let nm = NelderMead {
        f_tol: 1e-22,
        x_tol: 1e-10,
        max_iter: 4000,
    };
    let best = nm
        .minimize(objective, &[ej0.ln(), ec0.ln()], &[0.05, 0.05])
        .map_err(|e| match e {
            Error::FitNonConvergence {
                iterations,
                best,
                cost,
            } => Error::FitNonConvergence {
                iterations,
                best: best.iter().map(|v| v.exp()).collect(),
                cost,
            },
            other => other,
        })?;
    let (ej, ec) = (best.x[0].exp(), best.x[1].exp());
    Ok(TransmonFit {
        params: TransmonParams::new(ej, ec, 0.0)?,
        residuals_ghz: model(ej, ec, targets)?,
        iterations: best.iterations,
    })
}
