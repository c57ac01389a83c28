use alloc::vec::Vec;

use crate::error::{Error, Result};

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1]; index 7 is the centre.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7]
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Globally adaptive Gauss-Kronrod (7/15) integration.
///
/// Infinite limits are mapped onto a finite interval with `x = a + t/(1-t)`
/// (and its mirror); the integrand is never evaluated at a mapped endpoint.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            rel_tol: 1e-9,
            abs_tol: 0.0,
            max_intervals: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> Panel {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, (&x, &w)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let dx = half * x;
        let pair = f(centre - dx) + f(centre + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Panel {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

impl Quadrature {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Quadrature {
            rel_tol,
            ..Self::default()
        }
    }

    /// Integrate `f` over `[a, b]`; either limit may be infinite.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> Result<f64> {
        self.integrate_dyn(&mut f, a, b)
    }

    fn integrate_dyn(&self, f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> Result<f64> {
        if a.is_nan() || b.is_nan() {
            return Err(Error::Domain("integration limits must not be NaN".into()));
        }
        if a == b {
            return Ok(0.0);
        }
        if a > b {
            return self.integrate_dyn(f, b, a).map(|v| -v);
        }
        match (a.is_finite(), b.is_finite()) {
            (true, true) => self.adapt(f, a, b),
            (true, false) => self.adapt(
                &mut |t: f64| {
                    let s = 1.0 - t;
                    f(a + t / s) / (s * s)
                },
                0.0,
                1.0,
            ),
            (false, true) => self.adapt(
                &mut |t: f64| {
                    let s = 1.0 - t;
                    f(b - t / s) / (s * s)
                },
                0.0,
                1.0,
            ),
            (false, false) => {
                let left = self.integrate_dyn(f, f64::NEG_INFINITY, 0.0)?;
                let right = self.integrate_dyn(f, 0.0, f64::INFINITY)?;
                Ok(left + right)
            }
        }
    }

    fn adapt(&self, f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> Result<f64> {
        let mut panels: Vec<Panel> = Vec::with_capacity(64);
        panels.push(gk15(f, a, b));
        loop {
            let (value, error) = panels
                .iter()
                .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
            if !value.is_finite() || !error.is_finite() {
                return Err(Error::Numerical("non-finite integrand".into()));
            }
            if error <= self.abs_tol.max(self.rel_tol * value.abs()) {
                return Ok(value);
            }
            if panels.len() >= self.max_intervals {
                return Err(Error::Convergence {
                    what: "adaptive quadrature",
                    iterations: panels.len(),
                });
            }
            let worst = panels
                .iter()
                .enumerate()
                .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
                .map(|(i, _)| i)
                .unwrap_or(0);
            let p = panels.swap_remove(worst);
            let mid = 0.5 * (p.a + p.b);
            if mid <= p.a || mid >= p.b {
                // panel cannot be split further in floating point
                return Err(Error::Convergence {
                    what: "adaptive quadrature",
                    iterations: panels.len(),
                });
            }
            panels.push(gk15(f, p.a, mid));
            panels.push(gk15(f, mid, p.b));
        }
    }
}

/// Integrate with the default tolerance (relative 1e-9).
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64) -> Result<f64> {
    Quadrature::default().integrate(f, a, b)
}
