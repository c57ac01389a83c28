//! Transmon / Cooper-pair-box spectra in the charge basis.
//!
//! `H = 4 E_C (n - n_g)^2 - (E_J / 2) sum_n (|n><n+1| + h.c.)`, truncated to
//! `2N + 1` charge states centred on the integer nearest `n_g`. A single
//! electron tunnelling across the junction shifts `n_g` by one half, so the
//! two charge-parity branches are the spectra at `n_g` and `n_g + 1/2`.

mod dispersive;
mod fit;

use alloc::vec::Vec;

// libm-backed float math when std is absent from the build
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{ensure, Error, Result};
use crate::numeric::{SymTridiagonal, TridiagEigen};
use crate::physcore::VON_KLITZING_OHM;

pub use dispersive::{
    chi, dispersive_shift, resonator_dispersion, CavityCoupling, DispersiveModel, ResonatorPull,
    DEFAULT_DISPERSIVE_LEVELS,
};
pub use fit::{fit_ej_ec, FrequencyTargets, TransmonFit};

/// Inputs of the charge Hamiltonian. Energies in GHz, `ng` in units of 2e.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmonParams {
    pub ej_ghz: f64,
    pub ec_ghz: f64,
    pub ng: f64,
    /// Requested truncation; the effective value is never below
    /// [`TransmonParams::min_truncation`].
    pub truncation: usize,
}

impl TransmonParams {
    pub fn new(ej_ghz: f64, ec_ghz: f64, ng: f64) -> Result<Self> {
        ensure!(
            ej_ghz >= 0.0 && ej_ghz.is_finite(),
            Domain,
            "E_J must be non-negative, got {ej_ghz}"
        );
        ensure!(
            ec_ghz > 0.0 && ec_ghz.is_finite(),
            Domain,
            "E_C must be positive, got {ec_ghz}"
        );
        ensure!(ng.is_finite(), Domain, "offset charge must be finite");
        Ok(TransmonParams {
            ej_ghz,
            ec_ghz,
            ng,
            truncation: 0,
        })
    }

    pub fn with_ng(self, ng: f64) -> Self {
        TransmonParams { ng, ..self }
    }

    pub fn with_truncation(self, truncation: usize) -> Self {
        TransmonParams { truncation, ..self }
    }

    pub fn ej_over_ec(&self) -> f64 {
        self.ej_ghz / self.ec_ghz
    }

    /// `ceil(5 sqrt(E_J / 8 E_C)) + 10`: five oscillator lengths of charge
    /// support plus margin.
    pub fn min_truncation(&self) -> usize {
        (5.0 * (self.ej_ghz / (8.0 * self.ec_ghz)).sqrt()).ceil() as usize + 10
    }

    pub fn effective_truncation(&self) -> usize {
        self.truncation.max(self.min_truncation())
    }
}

/// The truncated charge Hamiltonian together with its charge labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargeHamiltonian {
    /// Charge of the first basis state.
    pub n_min: i64,
    pub ng: f64,
    pub matrix: SymTridiagonal,
}

impl ChargeHamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn charges(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.dim() as i64).map(move |i| self.n_min + i)
    }
}

pub fn build_hamiltonian(params: &TransmonParams) -> ChargeHamiltonian {
    let n = params.effective_truncation() as i64;
    let n_min = params.ng.round() as i64 - n;
    let dim = (2 * n + 1) as usize;
    let diag = (0..dim)
        .map(|i| {
            let q = (n_min + i as i64) as f64 - params.ng;
            4.0 * params.ec_ghz * q * q
        })
        .collect();
    let off = alloc::vec![-0.5 * params.ej_ghz; dim - 1];
    ChargeHamiltonian {
        n_min,
        ng: params.ng,
        matrix: SymTridiagonal::new(diag, off),
    }
}

/// Lowest eigenvalues (GHz, ascending) of the charge Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub energies: Vec<f64>,
    pub params: TransmonParams,
}

impl Spectrum {
    /// Frequency of the `from -> to` transition.
    pub fn transition(&self, from: usize, to: usize) -> f64 {
        self.energies[to] - self.energies[from]
    }

    pub fn f_ge(&self) -> f64 {
        self.transition(0, 1)
    }

    pub fn f_ef(&self) -> f64 {
        self.transition(1, 2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Transition {
    Ge,
    Ef,
}

impl Transition {
    fn levels(self) -> (usize, usize) {
        match self {
            Transition::Ge => (0, 1),
            Transition::Ef => (1, 2),
        }
    }
}

fn check_levels(k: usize, dim: usize) -> Result<()> {
    ensure!(
        k <= dim,
        Domain,
        "requested {k} levels from a {dim}-state basis"
    );
    Ok(())
}

pub fn eigenspectrum(params: &TransmonParams, k: usize) -> Result<Spectrum> {
    let h = build_hamiltonian(params);
    check_levels(k, h.dim())?;
    let mut energies = h.matrix.eigenvalues()?;
    energies.truncate(k);
    Ok(Spectrum {
        energies,
        params: *params,
    })
}

fn transition_at(params: &TransmonParams, ng: f64, t: Transition) -> Result<f64> {
    let (a, b) = t.levels();
    Ok(eigenspectrum(&params.with_ng(ng), b + 1)?.transition(a, b))
}

/// Peak-to-peak charge dispersion of a transition, `|f(1/2) - f(0)|`.
pub fn charge_dispersion(params: &TransmonParams, transition: Transition) -> Result<f64> {
    Ok((transition_at(params, 0.5, transition)? - transition_at(params, 0.0, transition)?).abs())
}

/// g-e frequencies of the two charge-parity branches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParityFrequencies {
    pub even_ghz: f64,
    pub odd_ghz: f64,
}

impl ParityFrequencies {
    pub fn splitting(&self) -> f64 {
        (self.even_ghz - self.odd_ghz).abs()
    }
}

pub fn parity_frequencies(params: &TransmonParams) -> Result<ParityFrequencies> {
    Ok(ParityFrequencies {
        even_ghz: transition_at(params, params.ng, Transition::Ge)?,
        odd_ghz: transition_at(params, params.ng + 0.5, Transition::Ge)?,
    })
}

/// Lowest `k` eigenpairs with their charge basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenstates {
    pub energies: Vec<f64>,
    pub hamiltonian: ChargeHamiltonian,
    eigen: TridiagEigen,
}

impl Eigenstates {
    pub fn levels(&self) -> usize {
        self.energies.len()
    }

    /// Amplitude of level `level` on basis state `index`.
    pub fn amplitude(&self, index: usize, level: usize) -> f64 {
        self.eigen.component(index, level)
    }

    /// `|<i| n_hat |j>|` with `n_hat` diagonal, entries `n - n_g`.
    pub fn charge_element(&self, i: usize, j: usize) -> f64 {
        let ng = self.hamiltonian.ng;
        self.hamiltonian
            .charges()
            .enumerate()
            .map(|(idx, n)| self.amplitude(idx, i) * (n as f64 - ng) * self.amplitude(idx, j))
            .sum::<f64>()
            .abs()
    }
}

pub fn eigenstates(params: &TransmonParams, k: usize) -> Result<Eigenstates> {
    let hamiltonian = build_hamiltonian(params);
    check_levels(k, hamiltonian.dim())?;
    let eigen = hamiltonian.matrix.eigen()?;
    let mut energies = eigen.values.clone();
    energies.truncate(k);
    Ok(Eigenstates {
        energies,
        hamiltonian,
        eigen,
    })
}

/// Symmetric `k x k` matrix of charge-operator magnitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargeMatrix {
    pub size: usize,
    elements: Vec<f64>,
}

impl ChargeMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.elements[i * self.size + j]
    }
}

impl Eigenstates {
    pub fn charge_matrix(&self) -> ChargeMatrix {
        let k = self.levels();
        let mut elements = alloc::vec![0.0; k * k];
        for i in 0..k {
            for j in i..k {
                let v = self.charge_element(i, j);
                elements[i * k + j] = v;
                elements[j * k + i] = v;
            }
        }
        ChargeMatrix { size: k, elements }
    }
}

pub fn charge_matrix_elements(params: &TransmonParams, k: usize) -> Result<ChargeMatrix> {
    Ok(eigenstates(params, k)?.charge_matrix())
}

/// Ambegaokar-Baratoff Josephson energy (GHz) of a junction with normal
/// resistance `rn_ohm` between electrodes of gap `delta_ghz`.
pub fn ej_from_ab(rn_ohm: f64, delta_ghz: f64) -> Result<f64> {
    ensure!(
        rn_ohm > 0.0,
        Domain,
        "normal resistance must be positive, got {rn_ohm}"
    );
    ensure!(
        delta_ghz > 0.0,
        Domain,
        "gap must be positive, got {delta_ghz}"
    );
    Ok(delta_ghz / 8.0 * VON_KLITZING_OHM / rn_ohm)
}

/// Inverse of [`ej_from_ab`]: the normal resistance giving `ej_ghz`.
pub fn rn_from_ej(ej_ghz: f64, delta_ghz: f64) -> Result<f64> {
    if ej_ghz <= 0.0 {
        return Err(Error::Domain(alloc::format!(
            "E_J must be positive, got {ej_ghz}"
        )));
    }
    ensure!(
        delta_ghz > 0.0,
        Domain,
        "gap must be positive, got {delta_ghz}"
    );
    Ok(delta_ghz / 8.0 * VON_KLITZING_OHM / ej_ghz)
}
