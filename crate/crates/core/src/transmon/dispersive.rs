//! Second-order dispersive shifts of a transmon coupled to a readout mode.
//!
//! The pull of the cavity when the transmon sits in level `l` is
//!
//! `lambda_l = sum_{j != l} g_lj^2 [1/(E_l - E_j - nu_r) + 1/(E_l - E_j + nu_r)]`
//!
//! with `g_lj = g |<l|n|j>| / |<0|n|1>|`, so `g` is the g-e coupling. The
//! full dispersive shift is `2 chi = lambda_e - lambda_g`. The sum runs over
//! the lowest [`DEFAULT_DISPERSIVE_LEVELS`] levels.

use alloc::vec::Vec;

// libm-backed float math when std is absent from the build
#[allow(unused_imports)]
use num_traits::Float;

use super::{eigenstates, Eigenstates, TransmonParams};
use crate::error::{ensure, Error, Result};

pub const DEFAULT_DISPERSIVE_LEVELS: usize = 10;

/// A detuning must exceed this multiple of the pair coupling for
/// neighbouring levels (the dominant couplings) ...
const RESONANCE_MARGIN: f64 = 10.0;
/// ... and this multiple for the weak couplings to more distant levels.
const DISTANT_RESONANCE_MARGIN: f64 = 2.0;

/// Readout-cavity coupling. `g` is quoted as an ordinary frequency
/// (g / 2 pi) in MHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityCoupling {
    pub g_mhz: f64,
    pub nu_r_ghz: f64,
    pub q_loaded: f64,
}

impl CavityCoupling {
    pub fn new(g_mhz: f64, nu_r_ghz: f64, q_loaded: f64) -> Result<Self> {
        ensure!(
            g_mhz >= 0.0 && g_mhz.is_finite(),
            Domain,
            "g must be non-negative, got {g_mhz}"
        );
        ensure!(
            nu_r_ghz > 0.0,
            Domain,
            "cavity frequency must be positive, got {nu_r_ghz}"
        );
        ensure!(
            q_loaded > 0.0,
            Domain,
            "loaded Q must be positive, got {q_loaded}"
        );
        Ok(CavityCoupling {
            g_mhz,
            nu_r_ghz,
            q_loaded,
        })
    }

    /// Cavity linewidth kappa / 2 pi in MHz.
    pub fn kappa_mhz(&self) -> f64 {
        self.nu_r_ghz * 1e3 / self.q_loaded
    }
}

/// Which cavity-pull difference defines the resonator's charge dispersion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResonatorPull {
    /// Ground-state pull `lambda_g`.
    #[default]
    Ground,
    /// Dispersive shift `chi`.
    Chi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DispersiveModel {
    pub levels: usize,
}

impl Default for DispersiveModel {
    fn default() -> Self {
        DispersiveModel {
            levels: DEFAULT_DISPERSIVE_LEVELS,
        }
    }
}

impl DispersiveModel {
    /// Cavity pulls `lambda_l` in MHz for every level in `wanted`.
    pub fn level_shifts(
        &self,
        params: &TransmonParams,
        coupling: &CavityCoupling,
        wanted: &[usize],
    ) -> Result<Vec<f64>> {
        ensure!(
            self.levels >= 2,
            Domain,
            "need at least two levels, got {}",
            self.levels
        );
        let states = eigenstates(params, self.levels)?;
        for &l in wanted {
            ensure!(
                l < self.levels,
                Domain,
                "level {l} outside the {}-level sum",
                self.levels
            );
        }
        let reference = states.charge_element(0, 1);
        if coupling.g_mhz == 0.0 {
            return Ok(alloc::vec![0.0; wanted.len()]);
        }
        ensure!(
            reference > 0.0,
            Domain,
            "g-e charge matrix element vanishes; coupling normalisation undefined"
        );
        wanted
            .iter()
            .map(|&l| self.pull(&states, coupling, reference, l))
            .collect()
    }

    fn pull(
        &self,
        states: &Eigenstates,
        coupling: &CavityCoupling,
        reference: f64,
        level: usize,
    ) -> Result<f64> {
        let g_ghz = coupling.g_mhz * 1e-3;
        let nu = coupling.nu_r_ghz;
        let mut sum = 0.0;
        for j in (0..self.levels).filter(|&j| j != level) {
            let g_lj = g_ghz * states.charge_element(level, j) / reference;
            let w = states.energies[level] - states.energies[j];
            let margin = if j.abs_diff(level) == 1 {
                RESONANCE_MARGIN
            } else {
                DISTANT_RESONANCE_MARGIN
            };
            for detuning in [w - nu, w + nu] {
                if g_lj > 0.0 && detuning.abs() <= margin * g_lj {
                    return Err(Error::NearResonance {
                        from: level,
                        to: j,
                        detuning_ghz: detuning,
                        coupling_ghz: g_lj,
                    });
                }
            }
            sum += g_lj * g_lj * (1.0 / (w - nu) + 1.0 / (w + nu));
        }
        Ok(sum * 1e3)
    }

    /// `chi = (lambda_e - lambda_g) / 2` in MHz.
    pub fn chi(&self, params: &TransmonParams, coupling: &CavityCoupling) -> Result<f64> {
        let s = self.level_shifts(params, coupling, &[0, 1])?;
        Ok(0.5 * (s[1] - s[0]))
    }

    /// Change of the cavity frequency (kHz) between `n_g = 0` and `1/2`.
    pub fn resonator_dispersion(
        &self,
        params: &TransmonParams,
        coupling: &CavityCoupling,
        pull: ResonatorPull,
    ) -> Result<f64> {
        let at = |ng: f64| -> Result<f64> {
            let p = params.with_ng(ng);
            match pull {
                ResonatorPull::Ground => Ok(self.level_shifts(&p, coupling, &[0])?[0]),
                ResonatorPull::Chi => self.chi(&p, coupling),
            }
        };
        Ok((at(0.5)? - at(0.0)?).abs() * 1e3)
    }
}

/// Cavity pull `lambda_level` in MHz with the default 10-level sum.
pub fn dispersive_shift(
    params: &TransmonParams,
    coupling: &CavityCoupling,
    level: usize,
) -> Result<f64> {
    Ok(DispersiveModel::default().level_shifts(params, coupling, &[level])?[0])
}

pub fn chi(params: &TransmonParams, coupling: &CavityCoupling) -> Result<f64> {
    DispersiveModel::default().chi(params, coupling)
}

/// `|nu_r(n_g = 1/2) - nu_r(n_g = 0)|` in kHz from the ground-state pull.
pub fn resonator_dispersion(params: &TransmonParams, coupling: &CavityCoupling) -> Result<f64> {
    DispersiveModel::default().resonator_dispersion(params, coupling, ResonatorPull::Ground)
}
