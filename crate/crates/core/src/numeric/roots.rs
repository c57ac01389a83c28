use crate::error::{Error, Result};

/// Brent's bracketed root finder.
#[derive(Debug, Clone, Copy)]
pub struct RootFinder {
    pub x_tol: f64,
    pub max_iter: usize,
}

impl Default for RootFinder {
    fn default() -> Self {
        RootFinder {
            x_tol: 1e-10,
            max_iter: 200,
        }
    }
}

impl RootFinder {
    pub fn solve<F: FnMut(f64) -> f64>(&self, mut f: F, lo: f64, hi: f64) -> Result<f64> {
        let (mut a, mut b) = (lo, hi);
        let (mut fa, mut fb) = (f(a), f(b));
        if fa == 0.0 {
            return Ok(a);
        }
        if fb == 0.0 {
            return Ok(b);
        }
        if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
            return Err(Error::Bracket { lo, hi });
        }
        let (mut c, mut fc) = (a, fa);
        let mut d = b - a;
        let mut e = d;
        for _ in 0..self.max_iter {
            if fb.signum() == fc.signum() {
                c = a;
                fc = fa;
                d = b - a;
                e = d;
            }
            if fc.abs() < fb.abs() {
                a = b;
                b = c;
                c = a;
                fa = fb;
                fb = fc;
                fc = fa;
            }
            let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * self.x_tol;
            let m = 0.5 * (c - b);
            if m.abs() <= tol || fb == 0.0 {
                return Ok(b);
            }
            if e.abs() >= tol && fa.abs() > fb.abs() {
                // inverse quadratic interpolation, or secant when a == c
                let s = fb / fa;
                let (mut p, mut q);
                if a == c {
                    p = 2.0 * m * s;
                    q = 1.0 - s;
                } else {
                    let qa = fa / fc;
                    let r = fb / fc;
                    p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                    q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
                }
                if p > 0.0 {
                    q = -q;
                } else {
                    p = -p;
                }
                if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                    e = d;
                    d = p / q;
                } else {
                    d = m;
                    e = m;
                }
            } else {
                d = m;
                e = m;
            }
            a = b;
            fa = fb;
            b += if d.abs() > tol { d } else { tol.copysign(m) };
            fb = f(b);
            if !fb.is_finite() {
                return Err(Error::Numerical(
                    "root function returned a non-finite value".into(),
                ));
            }
        }
        Err(Error::Convergence {
            what: "bracketed root search",
            iterations: self.max_iter,
        })
    }
}

/// Root of `f` on `[lo, hi]` to 1e-10 absolute.
pub fn find_root<F: FnMut(f64) -> f64>(f: F, lo: f64, hi: f64) -> Result<f64> {
    RootFinder::default().solve(f, lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_two() {
        let r = find_root(|x| x * x - 2.0, 1.0, 2.0).unwrap();
        assert!((r - core::f64::consts::SQRT_2).abs() < 1e-10);
    }

    #[test]
    fn steep_exponential() {
        let r = find_root(|x| (x - 3.0).exp() - 1.0, 0.0, 50.0).unwrap();
        assert!((r - 3.0).abs() < 1e-10);
    }

    #[test]
    fn bracket_without_sign_change() {
        assert_eq!(
            find_root(|x| x * x + 1.0, -1.0, 1.0),
            Err(Error::Bracket { lo: -1.0, hi: 1.0 })
        );
    }

    #[test]
    fn iteration_cap() {
        let rf = RootFinder {
            x_tol: 0.0,
            max_iter: 2,
        };
        let err = rf.solve(|x| x.powi(3) - 0.3, 0.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::Convergence { .. }));
    }
}
