//! Peak detection and parity-lifetime estimation on scans.

use alloc::vec::Vec;

use super::scan::SpectroscopyScan;
use crate::error::{ensure, Result};

/// Detection threshold in robust standard deviations above the median.
pub const DEFAULT_PEAK_THRESHOLD: f64 = 5.0;

/// Scales the median absolute deviation to a Gaussian standard deviation.
const MAD_TO_SIGMA: f64 = 1.482_602_218_505_602;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Peaks {
    /// Ascending, at most two.
    pub positions_ghz: Vec<f64>,
    pub heights: Vec<f64>,
}

impl Peaks {
    pub fn count(&self) -> usize {
        self.positions_ghz.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakDetector {
    pub threshold_k: f64,
}

impl Default for PeakDetector {
    fn default() -> Self {
        PeakDetector {
            threshold_k: DEFAULT_PEAK_THRESHOLD,
        }
    }
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

impl PeakDetector {
    /// Local maxima above `median + k sigma`, where sigma is the MAD-based
    /// noise estimate. Maxima closer than one linewidth merge
    /// into the taller one; the two tallest survivors are returned.
    pub fn detect(&self, row: &[f64], freqs_ghz: &[f64], linewidth_mhz: f64) -> Peaks {
        if row.is_empty() || row.len() != freqs_ghz.len() {
            return Peaks::default();
        }
        let mut scratch = row.to_vec();
        let med = median(&mut scratch);
        for x in scratch.iter_mut() {
            *x = (*x - med).abs();
        }
        let sigma = MAD_TO_SIGMA * median(&mut scratch);
        let threshold = med + self.threshold_k * sigma;

        let n = row.len();
        let mut maxima: Vec<(f64, f64)> = (0..n)
            .filter(|&i| {
                row[i] > threshold
                    && (i == 0 || row[i] >= row[i - 1])
                    && (i + 1 == n || row[i] > row[i + 1])
            })
            .map(|i| (freqs_ghz[i], row[i]))
            .collect();
        maxima.sort_by(|a, b| b.1.total_cmp(&a.1));
        let width = linewidth_mhz * 1e-3;
        let mut kept: Vec<(f64, f64)> = Vec::new();
        for m in maxima {
            if kept.len() == 2 {
                break;
            }
            if kept.iter().all(|k| (k.0 - m.0).abs() > width) {
                kept.push(m);
            }
        }
        kept.sort_by(|a, b| a.0.total_cmp(&b.0));
        Peaks {
            positions_ghz: kept.iter().map(|k| k.0).collect(),
            heights: kept.iter().map(|k| k.1).collect(),
        }
    }
}

pub fn detect_peaks(row: &[f64], freqs_ghz: &[f64], linewidth_mhz: f64) -> Peaks {
    PeakDetector::default().detect(row, freqs_ghz, linewidth_mhz)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LifetimeVerdict {
    /// Both branches in nearly every pixel: switching is faster than a pixel.
    UpperBound(f64),
    /// One branch throughout: no switch within the scan.
    LowerBound(f64),
    /// Resolved switches: duration over the switch count.
    Estimate {
        seconds: f64,
        switches: usize,
    },
    Inconclusive,
}

impl LifetimeVerdict {
    pub fn seconds(&self) -> Option<f64> {
        match *self {
            LifetimeVerdict::UpperBound(s) | LifetimeVerdict::LowerBound(s) => Some(s),
            LifetimeVerdict::Estimate { seconds, .. } => Some(seconds),
            LifetimeVerdict::Inconclusive => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Seen {
    Both,
    Even,
    Odd,
    Neither,
}

/// Classifies every pixel whose predicted branches are at least two
/// linewidths apart by which branches carry a detected peak, then counts
/// branch changes between single-branch pixels along the time axis.
///
/// Two switches inside one pixel are not resolved; they are rare once the
/// lifetime exceeds a few pixels.
pub fn estimate_parity_lifetime(scan: &SpectroscopyScan) -> Result<LifetimeVerdict> {
    ensure!(
        scan.n_pixels() >= 10,
        Domain,
        "need at least 10 pixels, got {}",
        scan.n_pixels()
    );
    let width = scan.linewidth_mhz * 1e-3;
    let step = if scan.freqs_ghz.len() > 1 {
        (scan.freqs_ghz[scan.freqs_ghz.len() - 1] - scan.freqs_ghz[0])
            / (scan.freqs_ghz.len() - 1) as f64
    } else {
        0.0
    };
    let tol = width.max(1.5 * step);
    let detector = PeakDetector::default();

    let mut seen = Vec::new();
    for row in &scan.rows {
        if (row.even_ghz - row.odd_ghz).abs() < (2.0 * width).max(3.0 * step) {
            continue;
        }
        let peaks = detector.detect(&row.amplitudes, &scan.freqs_ghz, scan.linewidth_mhz);
        let hit = |f: f64| peaks.positions_ghz.iter().any(|p| (p - f).abs() <= tol);
        seen.push(match (hit(row.even_ghz), hit(row.odd_ghz)) {
            (true, true) => Seen::Both,
            (true, false) => Seen::Even,
            (false, true) => Seen::Odd,
            (false, false) => Seen::Neither,
        });
    }
    let resolvable = seen.len();
    if resolvable < 10 {
        return Ok(LifetimeVerdict::Inconclusive);
    }
    let both = seen.iter().filter(|&&s| s == Seen::Both).count();
    if both as f64 >= 0.9 * resolvable as f64 {
        return Ok(LifetimeVerdict::UpperBound(scan.pixel_time_s));
    }
    let single = seen
        .iter()
        .filter(|&&s| s == Seen::Even || s == Seen::Odd)
        .count();
    if 2 * single < resolvable {
        return Ok(LifetimeVerdict::Inconclusive);
    }

    let mut switches = 0;
    let mut last: Option<Seen> = None;
    for s in seen {
        if s == Seen::Even || s == Seen::Odd {
            if last.is_some_and(|prev| prev != s) {
                switches += 1;
            }
            last = Some(s);
        }
    }
    if switches == 0 {
        return Ok(LifetimeVerdict::LowerBound(scan.duration_s()));
    }
    let observed = resolvable as f64 * scan.pixel_time_s;
    Ok(LifetimeVerdict::Estimate {
        seconds: observed / switches as f64,
        switches,
    })
}
