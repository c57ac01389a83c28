//! Photon shot-noise dephasing and the thermometry built on it.
//!
//! `chi_mhz` and `kappa_mhz` are ordinary frequencies (the value of
//! `chi / 2 pi` in MHz). They are converted to angular rates before entering
//! the dephasing formula, and the result is a rate in s^-1. Feeding angular
//! values in MHz would overstate the rate by 2 pi.

// libm-backed float math when std is absent from the build
#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64;

use crate::error::{ensure, Error, Result};
use crate::numeric::find_root;
use crate::physcore::temperature_from_occupation;

/// Largest thermal occupation searched by [`resonator_thermometry`].
pub const MAX_THERMOMETRY_OCCUPATION: f64 = 10.0;

fn angular(mhz: f64) -> f64 {
    2.0 * core::f64::consts::PI * mhz * 1e6
}

/// `(kappa / 2) Re[sqrt((1 + 2i chi/kappa)^2 + 8i chi n / kappa) - 1]`.
pub fn shot_noise_dephasing(chi_mhz: f64, kappa_mhz: f64, n_th: f64) -> Result<f64> {
    ensure!(
        kappa_mhz > 0.0 && kappa_mhz.is_finite(),
        Domain,
        "kappa must be positive"
    );
    ensure!(
        n_th >= 0.0 && n_th.is_finite(),
        Domain,
        "n_th must be non-negative"
    );
    ensure!(chi_mhz.is_finite(), Domain, "chi must be finite");
    let chi = angular(chi_mhz);
    let kappa = angular(kappa_mhz);
    let a = Complex64::new(1.0, 2.0 * chi / kappa);
    let b = Complex64::new(0.0, 8.0 * chi * n_th / kappa);
    // sqrt(a^2 + b) - a = b / (sqrt(a^2 + b) + a), and Re a = 1
    let root = (a * a + b).sqrt();
    Ok(0.5 * kappa * (b / (root + a)).re)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thermometry {
    pub n_th: f64,
    /// Resonator temperature; zero when `n_th` is zero.
    pub t_k: f64,
    /// Set when the rate is zero: the temperature is only bounded above
    /// by the measurement resolution, reported as zero.
    pub at_floor: bool,
}

/// Inverts [`shot_noise_dephasing`] for `n_th` on `[0, 10]`, then the Bose
/// occupation at `nu_r_ghz` for the temperature.
pub fn resonator_thermometry(
    gamma_phi: f64,
    chi_mhz: f64,
    kappa_mhz: f64,
    nu_r_ghz: f64,
) -> Result<Thermometry> {
    ensure!(
        gamma_phi >= 0.0 && gamma_phi.is_finite(),
        Domain,
        "dephasing rate must be >= 0"
    );
    ensure!(
        nu_r_ghz > 0.0,
        Domain,
        "resonator frequency must be positive"
    );
    ensure!(
        chi_mhz != 0.0,
        Domain,
        "chi must be non-zero for thermometry"
    );
    if gamma_phi == 0.0 {
        shot_noise_dephasing(chi_mhz, kappa_mhz, 0.0)?;
        return Ok(Thermometry {
            n_th: 0.0,
            t_k: 0.0,
            at_floor: true,
        });
    }
    let top = shot_noise_dephasing(chi_mhz, kappa_mhz, MAX_THERMOMETRY_OCCUPATION)?;
    if gamma_phi > top {
        return Err(Error::Domain(alloc::format!(
            "dephasing rate {gamma_phi:e} s^-1 exceeds {top:e} s^-1 reached at n_th = {MAX_THERMOMETRY_OCCUPATION}"
        )));
    }
    let mut shortfall =
        |n: f64| shot_noise_dephasing(chi_mhz, kappa_mhz, n).map_or(f64::NAN, |g| g - gamma_phi);
    let n_th = find_root(&mut shortfall, 0.0, MAX_THERMOMETRY_OCCUPATION)?;
    Ok(Thermometry {
        n_th,
        t_k: temperature_from_occupation(n_th, nu_r_ghz)?,
        at_floor: false,
    })
}

/// `1/T2* - 1/T2echo`, times in seconds.
pub fn pure_dephasing_from_echo(t2_star_s: f64, t2_echo_s: f64) -> Result<f64> {
    ensure!(
        t2_star_s > 0.0 && t2_star_s.is_finite(),
        Domain,
        "T2* must be positive, got {t2_star_s}"
    );
    ensure!(
        t2_star_s <= t2_echo_s && t2_echo_s.is_finite(),
        Domain,
        "T2* ({t2_star_s}) exceeds T2echo ({t2_echo_s})"
    );
    Ok(1.0 / t2_star_s - 1.0 / t2_echo_s)
}
