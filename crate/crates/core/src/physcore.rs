//! Unit system, BCS relations and thermal occupation functions.
//!
//! Temperatures and gaps are in kelvin (k_B = 1), circuit energies in GHz
//! (h = 1). The conversion factors below are the only place the two systems
//! meet.

use core::fmt;

// libm-backed float math when std is absent from the build
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{ensure, Result};

/// k_B / h in GHz per kelvin.
pub const KB_OVER_H: f64 = 20.836_619_12;
/// h / k_B in kelvin per GHz.
pub const H_OVER_KB: f64 = 1.0 / KB_OVER_H;
/// k_B in eV per kelvin.
pub const KB_EV: f64 = 8.617_333_262e-5;
/// h in eV per GHz, derived so that the three units close on themselves.
pub const H_EV_PER_GHZ: f64 = KB_EV / KB_OVER_H;
/// von Klitzing resistance h/e^2 in ohm.
pub const VON_KLITZING_OHM: f64 = 25_812.807_45;
/// Weak-coupling BCS ratio Delta / (k_B T_c).
pub const BCS_RATIO: f64 = 1.764;

/// The constant set as a value, for callers that want to thread a
/// non-default BCS ratio through a calculation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    pub kb_over_h: f64,
    pub h_over_kb: f64,
    pub kb_ev: f64,
    pub rk_ohm: f64,
    pub bcs_ratio: f64,
}

impl Constants {
    pub const DEFAULT: Constants = Constants {
        kb_over_h: KB_OVER_H,
        h_over_kb: H_OVER_KB,
        kb_ev: KB_EV,
        rk_ohm: VON_KLITZING_OHM,
        bcs_ratio: BCS_RATIO,
    };

    pub fn with_bcs_ratio(ratio: f64) -> Self {
        Constants {
            bcs_ratio: ratio,
            ..Self::DEFAULT
        }
    }

    /// Zero-temperature gap in kelvin for a critical temperature in kelvin.
    pub fn delta_from_tc(&self, tc_k: f64) -> Result<f64> {
        ensure!(
            tc_k > 0.0 && tc_k.is_finite(),
            Domain,
            "tc must be positive, got {tc_k}"
        );
        Ok(self.bcs_ratio * tc_k)
    }
}

impl Default for Constants {
    fn default() -> Self {
        Self::DEFAULT
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnergyUnit {
    GHz,
    Kelvin,
    ElectronVolt,
}

impl EnergyUnit {
    /// Multiplier taking a value in this unit to GHz.
    fn to_ghz(self) -> f64 {
        match self {
            EnergyUnit::GHz => 1.0,
            EnergyUnit::Kelvin => KB_OVER_H,
            EnergyUnit::ElectronVolt => 1.0 / H_EV_PER_GHZ,
        }
    }
}

impl fmt::Display for EnergyUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnergyUnit::GHz => "GHz",
            EnergyUnit::Kelvin => "K",
            EnergyUnit::ElectronVolt => "eV",
        })
    }
}

/// An energy tagged with its unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyValue {
    pub value: f64,
    pub unit: EnergyUnit,
}

impl EnergyValue {
    pub const fn new(value: f64, unit: EnergyUnit) -> Self {
        EnergyValue { value, unit }
    }

    pub const fn ghz(value: f64) -> Self {
        Self::new(value, EnergyUnit::GHz)
    }

    pub const fn kelvin(value: f64) -> Self {
        Self::new(value, EnergyUnit::Kelvin)
    }

    pub const fn ev(value: f64) -> Self {
        Self::new(value, EnergyUnit::ElectronVolt)
    }

    pub fn to(self, unit: EnergyUnit) -> EnergyValue {
        if unit == self.unit {
            return self;
        }
        let ghz = self.value * self.unit.to_ghz();
        EnergyValue::new(ghz / unit.to_ghz(), unit)
    }

    pub fn in_ghz(self) -> f64 {
        self.to(EnergyUnit::GHz).value
    }

    pub fn in_kelvin(self) -> f64 {
        self.to(EnergyUnit::Kelvin).value
    }

    pub fn in_ev(self) -> f64 {
        self.to(EnergyUnit::ElectronVolt).value
    }
}

impl fmt::Display for EnergyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.value, self.unit)
    }
}

pub fn kelvin_to_ghz(k: f64) -> f64 {
    k * KB_OVER_H
}

pub fn ghz_to_kelvin(ghz: f64) -> f64 {
    ghz * H_OVER_KB
}

pub fn kelvin_to_ev(k: f64) -> f64 {
    k * KB_EV
}

/// BCS gap (kelvin) from T_c (kelvin) with the default ratio 1.764.
pub fn delta_from_tc(tc_k: f64) -> Result<f64> {
    Constants::DEFAULT.delta_from_tc(tc_k)
}

/// Normalized BCS density of states `E / sqrt(E^2 - Delta^2)`, zero inside
/// the gap. Any consistent energy unit.
pub fn bcs_dos(energy: f64, delta: f64) -> f64 {
    if energy <= delta {
        return 0.0;
    }
    // (E - D)(E + D) keeps precision just above the gap edge
    energy / ((energy - delta) * (energy + delta)).sqrt()
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    ensure!(
        v > 0.0 && v.is_finite(),
        Domain,
        "{name} must be positive and finite, got {v}"
    );
    Ok(())
}

/// `h f / k_B T` for f in GHz and T in kelvin.
fn reduced_energy(f_ghz: f64, t_k: f64) -> Result<f64> {
    check_positive("frequency", f_ghz)?;
    check_positive("temperature", t_k)?;
    Ok(f_ghz * H_OVER_KB / t_k)
}

/// Natural log of the Bose occupation. Finite for every `T > 0`.
pub fn ln_bose_occupation(f_ghz: f64, t_k: f64) -> Result<f64> {
    let x = reduced_energy(f_ghz, t_k)?;
    // n = e^-x / (1 - e^-x)
    Ok(-x - (-(-x).exp_m1()).ln())
}

/// Bose-Einstein occupation `1 / (exp(h f / k_B T) - 1)`.
pub fn bose_occupation(f_ghz: f64, t_k: f64) -> Result<f64> {
    Ok(ln_bose_occupation(f_ghz, t_k)?.exp())
}

/// Temperature at which a mode at `f_ghz` has occupation `n`.
pub fn temperature_from_occupation(n: f64, f_ghz: f64) -> Result<f64> {
    check_positive("occupation", n)?;
    check_positive("frequency", f_ghz)?;
    Ok(f_ghz * H_OVER_KB / (1.0 / n).ln_1p())
}

/// Thermal excited-state population of a two-level system,
/// `1 / (1 + exp(h f / k_B T))`.
pub fn two_level_population(f_ge_ghz: f64, t_k: f64) -> Result<f64> {
    let x = reduced_energy(f_ge_ghz, t_k)?;
    let e = (-x).exp();
    Ok(e / (1.0 + e))
}

/// Inverse of [`two_level_population`]. Rejects `P_e >= 0.5`, which no
/// positive temperature produces.
pub fn temperature_from_population(p_e: f64, f_ge_ghz: f64) -> Result<f64> {
    ensure!(
        p_e > 0.0 && p_e < 0.5,
        Domain,
        "excited population must lie in (0, 0.5), got {p_e}"
    );
    check_positive("frequency", f_ge_ghz)?;
    Ok(f_ge_ghz * H_OVER_KB / ((1.0 - p_e) / p_e).ln())
}
