//! Levenberg-Marquardt with a forward-difference Jacobian and box bounds.

use alloc::vec::Vec;

// libm-backed float math when std is absent from the build
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{ensure, Error, Result};
use crate::numeric::Cholesky;

#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        ensure!(
            lower.len() == upper.len(),
            Domain,
            "bound vectors differ in length"
        );
        for (l, u) in lower.iter().zip(&upper) {
            ensure!(
                !(l > u) && !l.is_nan() && !u.is_nan(),
                Domain,
                "bound [{l}, {u}] is empty"
            );
        }
        Ok(Bounds { lower, upper })
    }

    pub fn unbounded(n: usize) -> Self {
        Bounds {
            lower: alloc::vec![f64::NEG_INFINITY; n],
            upper: alloc::vec![f64::INFINITY; n],
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.lower.len()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| v >= l && v <= u)
    }

    fn project(&self, x: &mut [f64]) {
        for (v, (l, u)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*l, *u);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevenbergMarquardt {
    /// Converged when every component of an accepted step is below
    /// `x_tol` relative to the parameter ...
    pub x_tol: f64,
    /// ... or the cost falls by less than this fraction.
    pub f_tol: f64,
    pub max_iter: usize,
    /// Relative forward-difference step.
    pub jac_step: f64,
}

impl Default for LevenbergMarquardt {
    fn default() -> Self {
        LevenbergMarquardt {
            x_tol: 1e-10,
            f_tol: 1e-12,
            max_iter: 500,
            jac_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LsqSolution {
    pub x: Vec<f64>,
    /// Sum of squared residuals.
    pub cost: f64,
    pub residuals: Vec<f64>,
    /// `(J^T J)^-1` at the solution, row-major; `None` without full column
    /// rank.
    pub covariance: Option<Vec<f64>>,
    pub iterations: usize,
    /// Largest relative component of the last accepted step.
    pub step_norm: f64,
}

const MAX_DAMPING: f64 = 1e16;

impl LevenbergMarquardt {
    /// Minimises `sum r_i(x)^2` where `residuals(x, r)` fills `r`
    /// (length `m`). The damping uses Marquardt's diagonal scaling.
    pub fn minimize<F>(
        &self,
        mut residuals: F,
        m: usize,
        x0: &[f64],
        bounds: &Bounds,
    ) -> Result<LsqSolution>
    where
        F: FnMut(&[f64], &mut [f64]),
    {
        let n = x0.len();
        ensure!(n > 0, Domain, "no parameters to fit");
        ensure!(m >= n, Underdetermined, "{m} residuals for {n} parameters");
        ensure!(
            bounds.lower.len() == n,
            Domain,
            "bounds have the wrong length"
        );
        ensure!(
            bounds.contains(x0),
            Domain,
            "initial guess lies outside the bounds"
        );

        let mut x = x0.to_vec();
        let mut r = alloc::vec![0.0; m];
        residuals(&x, &mut r);
        ensure!(
            r.iter().all(|v| v.is_finite()),
            Domain,
            "model is not finite at the initial guess"
        );
        let mut cost = sum_sq(&r);
        let mut lambda = 1e-3;
        let mut step_norm = f64::INFINITY;
        let mut trial = alloc::vec![0.0; m];

        for iter in 1..=self.max_iter {
            let jac = self.jacobian(&mut residuals, &x, &r, bounds);
            let (a, g) = normal_equations(&jac, &r, m, n);
            if (0..n).any(|j| !(a[j * n + j] > 0.0)) {
                return Err(Error::RankDeficient);
            }
            // parameters pinned at a bound with the descent pointing outward
            // are held fixed for this iteration
            let pinned: Vec<bool> = (0..n)
                .map(|j| {
                    (x[j] <= bounds.lower[j] && g[j] > 0.0)
                        || (x[j] >= bounds.upper[j] && g[j] < 0.0)
                })
                .collect();
            let mut g = g;
            let converged;
            loop {
                let mut damped = a.clone();
                for j in 0..n {
                    damped[j * n + j] += lambda * a[j * n + j];
                    if pinned[j] {
                        for k in 0..n {
                            damped[j * n + k] = 0.0;
                            damped[k * n + j] = 0.0;
                        }
                        damped[j * n + j] = 1.0;
                        g[j] = 0.0;
                    }
                }
                let Some(ch) = Cholesky::factor(&damped, n, 0.0) else {
                    lambda *= 10.0;
                    if lambda > MAX_DAMPING {
                        return Err(Error::RankDeficient);
                    }
                    continue;
                };
                let delta = ch.solve(&g);
                let mut x_new: Vec<f64> = x.iter().zip(&delta).map(|(a, d)| a - d).collect();
                bounds.project(&mut x_new);
                let rel_step = x_new
                    .iter()
                    .zip(&x)
                    .map(|(a, b)| (a - b).abs() / (b.abs() + self.x_tol))
                    .fold(0.0, f64::max);
                residuals(&x_new, &mut trial);
                let new_cost = sum_sq(&trial);
                if new_cost.is_finite() && new_cost < cost {
                    let drop = (cost - new_cost) / cost;
                    x = x_new;
                    core::mem::swap(&mut r, &mut trial);
                    cost = new_cost;
                    step_norm = rel_step;
                    lambda = (lambda / 10.0).max(1e-12);
                    converged = rel_step < self.x_tol || drop < self.f_tol || cost == 0.0;
                    break;
                }
                lambda *= 10.0;
                // no downhill step left at machine precision
                if rel_step < self.x_tol || lambda > MAX_DAMPING {
                    converged = true;
                    break;
                }
            }
            if converged {
                let jac = self.jacobian(&mut residuals, &x, &r, bounds);
                let (a, _) = normal_equations(&jac, &r, m, n);
                return Ok(LsqSolution {
                    covariance: covariance(&a, n),
                    x,
                    cost,
                    residuals: r,
                    iterations: iter,
                    step_norm,
                });
            }
        }
        Err(Error::FitNonConvergence {
            iterations: self.max_iter,
            best: x,
            cost,
        })
    }

    /// Column-major `m x n` forward differences; steps backward at an
    /// upper bound.
    fn jacobian<F>(&self, residuals: &mut F, x: &[f64], r: &[f64], bounds: &Bounds) -> Vec<f64>
    where
        F: FnMut(&[f64], &mut [f64]),
    {
        let m = r.len();
        let n = x.len();
        let mut jac = alloc::vec![0.0; m * n];
        let mut xp = x.to_vec();
        let mut rp = alloc::vec![0.0; m];
        for j in 0..n {
            let mut h = self.jac_step * if x[j] != 0.0 { x[j].abs() } else { 1.0 };
            if x[j] + h > bounds.upper[j] {
                h = -h;
            }
            xp[j] = x[j] + h;
            let h = xp[j] - x[j];
            residuals(&xp, &mut rp);
            for i in 0..m {
                jac[j * m + i] = (rp[i] - r[i]) / h;
            }
            xp[j] = x[j];
        }
        jac
    }
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// `J^T J` and `J^T r` for a column-major Jacobian.
fn normal_equations(jac: &[f64], r: &[f64], m: usize, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut a = alloc::vec![0.0; n * n];
    let mut g = alloc::vec![0.0; n];
    for j in 0..n {
        let cj = &jac[j * m..(j + 1) * m];
        g[j] = cj.iter().zip(r).map(|(a, b)| a * b).sum();
        for k in 0..=j {
            let ck = &jac[k * m..(k + 1) * m];
            let v: f64 = cj.iter().zip(ck).map(|(a, b)| a * b).sum();
            a[j * n + k] = v;
            a[k * n + j] = v;
        }
    }
    (a, g)
}

/// Inverse of `J^T J`, computed on the unit-diagonal rescaling so the rank
/// test does not depend on parameter units.
fn covariance(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let d: Vec<f64> = (0..n).map(|j| a[j * n + j].sqrt()).collect();
    if d.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return None;
    }
    let mut scaled = a.to_vec();
    for i in 0..n {
        for j in 0..n {
            scaled[i * n + j] /= d[i] * d[j];
        }
    }
    let inv = Cholesky::factor(&scaled, n, 1e-12)?.inverse();
    let mut cov = inv;
    for i in 0..n {
        for j in 0..n {
            cov[i * n + j] /= d[i] * d[j];
        }
    }
    cov.iter().all(|v| v.is_finite()).then_some(cov)
}
