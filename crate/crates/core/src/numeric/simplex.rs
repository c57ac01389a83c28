use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Derivative-free Nelder-Mead minimiser with a fixed initial simplex, so
/// results are a deterministic function of the inputs.
#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    /// Stop when the spread of objective values falls below this.
    pub f_tol: f64,
    /// ... and the simplex diameter (max-norm) falls below this.
    pub x_tol: f64,
    pub max_iter: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        NelderMead {
            f_tol: 1e-18,
            x_tol: 1e-12,
            max_iter: 5000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

impl NelderMead {
    /// Minimise `f` starting from `x0`, with initial simplex vertices
    /// `x0 + step[i] * e_i`.
    pub fn minimize<F>(&self, mut f: F, x0: &[f64], step: &[f64]) -> Result<SimplexResult>
    where
        F: FnMut(&[f64]) -> f64,
    {
        let n = x0.len();
        assert_eq!(step.len(), n, "one step per coordinate");
        let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        pts.push(x0.to_vec());
        for i in 0..n {
            let mut p = x0.to_vec();
            p[i] += step[i];
            pts.push(p);
        }
        let mut vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();

        let mut centroid = vec![0.0; n];
        let mut trial = vec![0.0; n];
        let mut trial2 = vec![0.0; n];
        for iter in 0..self.max_iter {
            // order: best first, worst last (stable for determinism)
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
            pts = order.iter().map(|&i| pts[i].clone()).collect();
            vals = order.iter().map(|&i| vals[i]).collect();

            let spread = (vals[n] - vals[0]).abs();
            let diameter = pts[1..]
                .iter()
                .flat_map(|p| p.iter().zip(&pts[0]).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            if spread <= self.f_tol && diameter <= self.x_tol {
                return Ok(SimplexResult {
                    x: pts[0].clone(),
                    value: vals[0],
                    iterations: iter,
                });
            }

            centroid.iter_mut().for_each(|c| *c = 0.0);
            for p in &pts[..n] {
                for (c, v) in centroid.iter_mut().zip(p) {
                    *c += v / n as f64;
                }
            }
            let along = |coef: f64, out: &mut [f64], worst: &[f64]| {
                for ((o, c), w) in out.iter_mut().zip(&centroid).zip(worst) {
                    *o = c + coef * (w - c);
                }
            };

            along(-1.0, &mut trial, &pts[n]);
            let fr = f(&trial);
            if fr < vals[0] {
                along(-2.0, &mut trial2, &pts[n]);
                let fe = f(&trial2);
                if fe < fr {
                    pts[n].copy_from_slice(&trial2);
                    vals[n] = fe;
                } else {
                    pts[n].copy_from_slice(&trial);
                    vals[n] = fr;
                }
                continue;
            }
            if fr < vals[n - 1] {
                pts[n].copy_from_slice(&trial);
                vals[n] = fr;
                continue;
            }
            // contraction: outside if the reflection improved on the worst
            let coef = if fr < vals[n] { -0.5 } else { 0.5 };
            along(coef, &mut trial2, &pts[n]);
            let fc = f(&trial2);
            if fc < vals[n].min(fr) {
                pts[n].copy_from_slice(&trial2);
                vals[n] = fc;
                continue;
            }
            // shrink towards the best vertex
            let best = pts[0].clone();
            for k in 1..=n {
                for (x, b) in pts[k].iter_mut().zip(&best) {
                    *x = b + 0.5 * (*x - b);
                }
                vals[k] = f(&pts[k]);
            }
        }
        let (i, &v) = vals
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("simplex has vertices");
        Err(Error::FitNonConvergence {
            iterations: self.max_iter,
            best: pts[i].clone(),
            cost: v,
        })
    }
}
