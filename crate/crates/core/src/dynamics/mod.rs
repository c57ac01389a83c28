//! Charge-parity telegraph noise, offset-charge jumps, synthetic two-tone
//! scans and their analysis.

mod analysis;
mod scan;

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::error::{ensure, Result};
use crate::quasiparticle::{
    above_barrier_fraction, barrier_adequate, thermal_term, GapProfile, QpEnvironment,
    DEFAULT_BARRIER_SAFETY,
};
use crate::rng::{stream, STREAM_OFFSET_CHARGE, STREAM_PARITY};

pub use analysis::{
    detect_peaks, estimate_parity_lifetime, LifetimeVerdict, PeakDetector, Peaks,
    DEFAULT_PEAK_THRESHOLD,
};
pub use scan::{synthesize_scan, PixelRow, ScanConfig, ScanPlan, SpectroscopyScan};

/// Switching statistics of the device.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    /// Parity switching rate, s^-1.
    pub gamma_parity: f64,
    /// Offset-charge jump rate, s^-1.
    pub tls_rate: f64,
    /// Jumps are uniform on `(0, jump_max)` in units of 2e, reduced mod 1.
    pub jump_max: f64,
}

impl NoiseModel {
    pub fn new(gamma_parity: f64, tls_rate: f64) -> Result<Self> {
        let m = NoiseModel {
            gamma_parity,
            tls_rate,
            ..Self::default()
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.gamma_parity >= 0.0 && self.gamma_parity.is_finite(),
            Domain,
            "parity rate must be non-negative, got {}",
            self.gamma_parity
        );
        ensure!(
            self.tls_rate >= 0.0 && self.tls_rate.is_finite(),
            Domain,
            "TLS rate must be non-negative, got {}",
            self.tls_rate
        );
        ensure!(
            self.jump_max > 0.0 && self.jump_max <= 1.0,
            Domain,
            "jump_max must lie in (0, 1], got {}",
            self.jump_max
        );
        Ok(())
    }
}

impl Default for NoiseModel {
    /// One offset-charge jump every three minutes.
    fn default() -> Self {
        NoiseModel {
            gamma_parity: 1e3,
            tls_rate: 1.0 / 180.0,
            jump_max: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn flipped(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }
}

/// Poisson event times on `[0, duration)`.
fn poisson_times<R: Rng>(rng: &mut R, rate: f64, duration: f64) -> Vec<f64> {
    let mut times = Vec::new();
    if rate <= 0.0 {
        return times;
    }
    let exp = Exp::new(rate).expect("positive rate");
    let mut t = 0.0;
    loop {
        t += exp.sample(rng);
        if t >= duration {
            return times;
        }
        times.push(t);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParityTrace {
    /// Switch times, strictly increasing.
    pub events: Vec<f64>,
    pub initial: Parity,
    pub duration: f64,
    pub seed: u64,
}

impl ParityTrace {
    pub fn parity_at(&self, t: f64) -> Parity {
        let flips = self.events.partition_point(|&e| e <= t);
        if flips % 2 == 0 {
            self.initial
        } else {
            self.initial.flipped()
        }
    }

    /// Time spent odd within `[t0, t1]`.
    pub fn odd_time(&self, t0: f64, t1: f64) -> f64 {
        let start = self.events.partition_point(|&e| e <= t0);
        let mut state = self.parity_at(t0);
        let mut cursor = t0;
        let mut odd = 0.0;
        for &e in self.events[start..].iter().take_while(|&&e| e < t1) {
            if state == Parity::Odd {
                odd += e - cursor;
            }
            cursor = e;
            state = state.flipped();
        }
        if state == Parity::Odd {
            odd += t1 - cursor;
        }
        odd
    }
}

/// Telegraph process with exponential dwell times of mean `1 / gamma`.
/// The initial parity is drawn from the same stream.
pub fn simulate_parity(gamma_parity: f64, duration: f64, seed: u64) -> Result<ParityTrace> {
    ensure!(
        duration > 0.0 && duration.is_finite(),
        Domain,
        "duration must be positive"
    );
    ensure!(
        gamma_parity >= 0.0 && gamma_parity.is_finite(),
        Domain,
        "parity rate must be non-negative"
    );
    let mut rng = stream(seed, STREAM_PARITY);
    let initial = if rng.random::<bool>() {
        Parity::Odd
    } else {
        Parity::Even
    };
    Ok(ParityTrace {
        events: poisson_times(&mut rng, gamma_parity, duration),
        initial,
        duration,
        seed,
    })
}

/// Piecewise-constant offset charge.
#[derive(Debug, Clone, PartialEq)]
pub struct OffsetChargeTrace {
    pub initial_ng: f64,
    /// `(time, ng after the jump)`, times strictly increasing.
    pub jumps: Vec<(f64, f64)>,
    pub duration: f64,
    pub seed: u64,
}

impl OffsetChargeTrace {
    pub fn ng_at(&self, t: f64) -> f64 {
        match self.jumps.partition_point(|&(tj, _)| tj <= t) {
            0 => self.initial_ng,
            i => self.jumps[i - 1].1,
        }
    }

    /// Constant-`ng` pieces `(start, end, ng)` covering `[t0, t1]`.
    pub fn pieces(&self, t0: f64, t1: f64) -> Vec<(f64, f64, f64)> {
        let start = self.jumps.partition_point(|&(tj, _)| tj <= t0);
        let mut out = Vec::new();
        let mut cursor = t0;
        let mut ng = self.ng_at(t0);
        for &(tj, next) in self.jumps[start..].iter().take_while(|j| j.0 < t1) {
            out.push((cursor, tj, ng));
            cursor = tj;
            ng = next;
        }
        out.push((cursor, t1, ng));
        out
    }

    /// Every distinct value visited.
    pub fn values(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.jumps.len() + 1);
        v.push(self.initial_ng);
        v.extend(self.jumps.iter().map(|j| j.1));
        v
    }
}

fn wrap_unit(x: f64) -> f64 {
    let r = x % 1.0;
    let r = if r < 0.0 { r + 1.0 } else { r };
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Jumps at `model.tls_rate`; each adds a uniform draw on `(0, jump_max)`.
pub fn simulate_offset_charge(
    model: &NoiseModel,
    initial_ng: f64,
    duration: f64,
    seed: u64,
) -> Result<OffsetChargeTrace> {
    model.validate()?;
    ensure!(
        duration > 0.0 && duration.is_finite(),
        Domain,
        "duration must be positive"
    );
    ensure!(
        initial_ng.is_finite(),
        Domain,
        "initial offset charge must be finite"
    );
    let mut rng = stream(seed, STREAM_OFFSET_CHARGE);
    let times = poisson_times(&mut rng, model.tls_rate, duration);
    let mut ng = wrap_unit(initial_ng);
    let jumps = times
        .into_iter()
        .map(|t| {
            ng = wrap_unit(ng + model.jump_max * rng.random::<f64>());
            (t, ng)
        })
        .collect();
    Ok(OffsetChargeTrace {
        initial_ng: wrap_unit(initial_ng),
        jumps,
        duration,
        seed,
    })
}

/// Parity switching rate of a device: tunnelling of nonequilibrium QPs
/// over the barrier plus thermal QPs generated next to the junction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParityRateModel {
    /// Rate without a barrier, s^-1.
    pub base_rate: f64,
    /// Rate per unit thermal density at the high junction gap, s^-1.
    /// A calibration constant: it places the 0.2 s lifetime of the
    /// protected device near 150 mK.
    pub c_th: f64,
    pub safety: f64,
}

impl Default for ParityRateModel {
    fn default() -> Self {
        ParityRateModel {
            base_rate: 1e3,
            c_th: 1.3e9,
            safety: DEFAULT_BARRIER_SAFETY,
        }
    }
}

impl ParityRateModel {
    /// Barrier height that suppresses the nonequilibrium part; zero unless
    /// the profile is barrier protected.
    pub fn effective_barrier(&self, profile: &GapProfile, env: &QpEnvironment) -> Result<f64> {
        let verdict = barrier_adequate(profile, env, self.safety)?;
        Ok(if verdict.protected() {
            profile.tunnelling_barrier()
        } else {
            0.0
        })
    }

    pub fn rate(&self, profile: &GapProfile, env: &QpEnvironment, t_k: f64) -> Result<f64> {
        ensure!(
            self.base_rate >= 0.0 && self.c_th >= 0.0,
            Domain,
            "rates must be >= 0"
        );
        let barrier = self.effective_barrier(profile, env)?;
        let top = profile.high_junction_delta();
        let floor = top - barrier;
        let nonequilibrium = self.base_rate * above_barrier_fraction(barrier, env.t_qp_k, floor)?;
        Ok(nonequilibrium + self.c_th * thermal_term(t_k, top)?)
    }
}

pub fn parity_rate_model(
    profile: &GapProfile,
    env: &QpEnvironment,
    t_k: f64,
    base_rate: f64,
) -> Result<f64> {
    ParityRateModel {
        base_rate,
        ..ParityRateModel::default()
    }
    .rate(profile, env, t_k)
}
