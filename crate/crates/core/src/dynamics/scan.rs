//! Synthetic two-tone spectroscopy.
//!
//! Each pixel averages Lorentzian responses over its window, weighted by the
//! time spent in each parity at each offset charge. Averaging a Lorentzian
//! over a piecewise-constant telegraph signal is exactly that weighted sum,
//! so no sub-sampling is needed.

use alloc::vec::Vec;

use rand_distr::{Distribution, Normal};

use super::{OffsetChargeTrace, ParityTrace};
use crate::error::{ensure, Error, Result};
use crate::rng::{stream, STREAM_PIXEL_NOISE_BASE};
use crate::transmon::{parity_frequencies, ParityFrequencies, TransmonParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConfig {
    pub f_min_ghz: f64,
    pub f_max_ghz: f64,
    pub n_freq: usize,
    /// Wall time of one pixel.
    pub pixel_time_s: f64,
    /// Repetitions averaged per pixel; recorded, the noise level is set by
    /// the per-pixel SNR.
    pub repetitions: u32,
}

impl ScanConfig {
    pub fn new(f_min_ghz: f64, f_max_ghz: f64, n_freq: usize) -> Self {
        ScanConfig {
            f_min_ghz,
            f_max_ghz,
            n_freq,
            pixel_time_s: 0.2,
            repetitions: 100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.f_min_ghz.is_finite() && self.f_max_ghz > self.f_min_ghz,
            Domain,
            "frequency grid must have f_max > f_min"
        );
        ensure!(
            self.n_freq >= 2,
            Domain,
            "frequency grid needs at least two points"
        );
        ensure!(
            self.pixel_time_s > 0.0,
            Domain,
            "pixel time must be positive"
        );
        Ok(())
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let step = (self.f_max_ghz - self.f_min_ghz) / (self.n_freq - 1) as f64;
        (0..self.n_freq)
            .map(|i| self.f_min_ghz + i as f64 * step)
            .collect()
    }
}

/// One time pixel of a scan.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelRow {
    pub amplitudes: Vec<f64>,
    /// Fraction of the window spent in odd parity.
    pub odd_weight: f64,
    /// Offset charge held longest during the window.
    pub offset_charge: f64,
    /// Branch frequencies at that offset charge.
    pub even_ghz: f64,
    pub odd_ghz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectroscopyScan {
    pub freqs_ghz: Vec<f64>,
    /// Pixel start times.
    pub times_s: Vec<f64>,
    pub pixel_time_s: f64,
    pub repetitions: u32,
    pub linewidth_mhz: f64,
    pub seed: u64,
    pub rows: Vec<PixelRow>,
}

impl SpectroscopyScan {
    pub fn n_pixels(&self) -> usize {
        self.rows.len()
    }

    pub fn duration_s(&self) -> f64 {
        self.rows.len() as f64 * self.pixel_time_s
    }
}

/// Everything needed to render any pixel independently of the others.
#[derive(Debug, Clone)]
pub struct ScanPlan<'a> {
    parity: &'a ParityTrace,
    offset: &'a OffsetChargeTrace,
    /// Offset-charge values in visiting order and their branch frequencies.
    ng_values: Vec<f64>,
    branches: Vec<ParityFrequencies>,
    freqs: Vec<f64>,
    half_width_ghz: f64,
    noise: Option<Normal<f64>>,
    config: ScanConfig,
    linewidth_mhz: f64,
    n_pixels: usize,
    seed: u64,
}

impl<'a> ScanPlan<'a> {
    /// `snr` is peak height over the noise standard deviation per point;
    /// `f64::INFINITY` disables noise.
    pub fn new(
        params: &TransmonParams,
        parity: &'a ParityTrace,
        offset: &'a OffsetChargeTrace,
        linewidth_mhz: f64,
        snr: f64,
        config: ScanConfig,
        seed: u64,
    ) -> Result<Self> {
        config.validate()?;
        ensure!(
            linewidth_mhz > 0.0 && linewidth_mhz.is_finite(),
            Domain,
            "linewidth must be positive"
        );
        ensure!(snr > 0.0, Domain, "SNR must be positive");
        let duration = parity.duration.min(offset.duration);
        let n_pixels = (duration / config.pixel_time_s + 1e-9) as usize;
        ensure!(n_pixels >= 1, Domain, "scan is shorter than one pixel");

        let ng_values = offset.values();
        let branches = ng_values
            .iter()
            .map(|&ng| parity_frequencies(&params.with_ng(ng)))
            .collect::<Result<Vec<_>>>()?;
        for b in &branches {
            for f in [b.even_ghz, b.odd_ghz] {
                if f < config.f_min_ghz || f > config.f_max_ghz {
                    return Err(Error::Coverage {
                        grid_min_ghz: config.f_min_ghz,
                        grid_max_ghz: config.f_max_ghz,
                        needed_ghz: f,
                    });
                }
            }
        }
        let noise = if snr.is_finite() {
            Some(Normal::new(0.0, 1.0 / snr).map_err(|_| Error::Domain("bad SNR".into()))?)
        } else {
            None
        };
        Ok(ScanPlan {
            parity,
            offset,
            ng_values,
            branches,
            freqs: config.frequencies(),
            half_width_ghz: 0.5e-3 * linewidth_mhz,
            noise,
            config,
            linewidth_mhz,
            n_pixels,
            seed,
        })
    }

    pub fn n_pixels(&self) -> usize {
        self.n_pixels
    }

    pub fn render_pixel(&self, k: usize) -> PixelRow {
        let dt = self.config.pixel_time_s;
        let t0 = k as f64 * dt;
        let t1 = t0 + dt;
        let span = t1 - t0;
        let mut amplitudes = alloc::vec![0.0; self.freqs.len()];
        let mut odd_total = 0.0;
        let mut longest = (0.0, 0usize);
        for (a, b, _) in self.offset.pieces(t0, t1) {
            let idx = self.offset.jumps.partition_point(|&(tj, _)| tj <= a);
            let branch = self.branches[idx];
            let odd = self.parity.odd_time(a, b);
            let even = (b - a) - odd;
            odd_total += odd;
            if b - a > longest.0 {
                longest = (b - a, idx);
            }
            for (f0, w) in [(branch.even_ghz, even / span), (branch.odd_ghz, odd / span)] {
                if w <= 0.0 {
                    continue;
                }
                for (amp, &f) in amplitudes.iter_mut().zip(&self.freqs) {
                    let x = (f - f0) / self.half_width_ghz;
                    *amp += w / (1.0 + x * x);
                }
            }
        }
        if let Some(noise) = self.noise {
            let mut rng = stream(self.seed, STREAM_PIXEL_NOISE_BASE + k as u64);
            for amp in amplitudes.iter_mut() {
                *amp += noise.sample(&mut rng);
            }
        }
        let idx = longest.1;
        let branch = self.branches[idx];
        PixelRow {
            amplitudes,
            odd_weight: odd_total / span,
            offset_charge: self.ng_values[idx],
            even_ghz: branch.even_ghz,
            odd_ghz: branch.odd_ghz,
        }
    }

    /// Collects rendered pixels, in pixel order, into a scan.
    pub fn assemble(&self, rows: Vec<PixelRow>) -> SpectroscopyScan {
        let dt = self.config.pixel_time_s;
        SpectroscopyScan {
            freqs_ghz: self.freqs.clone(),
            times_s: (0..rows.len()).map(|k| k as f64 * dt).collect(),
            pixel_time_s: dt,
            repetitions: self.config.repetitions,
            linewidth_mhz: self.linewidth_mhz,
            seed: self.seed,
            rows,
        }
    }
}

/// Sequential scan synthesis; see [`ScanPlan`] for rendering pixels in
/// parallel.
pub fn synthesize_scan(
    params: &TransmonParams,
    parity: &ParityTrace,
    offset: &OffsetChargeTrace,
    linewidth_mhz: f64,
    snr: f64,
    config: ScanConfig,
    seed: u64,
) -> Result<SpectroscopyScan> {
    let plan = ScanPlan::new(params, parity, offset, linewidth_mhz, snr, config, seed)?;
    let rows = (0..plan.n_pixels()).map(|k| plan.render_pixel(k)).collect();
    Ok(plan.assemble(rows))
}
