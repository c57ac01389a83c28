use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

// libm-backed float math when std is absent from the build
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Real symmetric tridiagonal matrix stored as its diagonal and the
/// off-diagonal (`off[i]` couples rows `i` and `i + 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

/// Eigenvalues in ascending order; `vectors`, when requested, is row-major
/// `n x n` with eigenvector `k` in column `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagEigen {
    pub values: Vec<f64>,
    pub vectors: Option<Vec<f64>>,
    pub dim: usize,
}

impl TridiagEigen {
    /// Component `i` of eigenvector `k`.
    pub fn component(&self, i: usize, k: usize) -> f64 {
        self.vectors
            .as_ref()
            .expect("eigenvectors were not requested")[i * self.dim + k]
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        (0..self.dim).map(|i| self.component(i, k)).collect()
    }
}

const MAX_SWEEPS: usize = 60;

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert!(
            diag.is_empty() && off.is_empty() || off.len() + 1 == diag.len(),
            "off-diagonal must be one shorter than the diagonal"
        );
        SymTridiagonal { diag, off }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(self.solve(false)?.values)
    }

    pub fn eigen(&self) -> Result<TridiagEigen> {
        self.solve(true)
    }

    /// Implicit-shift QL iteration.
    fn solve(&self, want_vectors: bool) -> Result<TridiagEigen> {
        let n = self.dim();
        let mut d = self.diag.clone();
        let mut e = self.off.clone();
        e.push(0.0);
        let mut z = if want_vectors {
            let mut z = vec![0.0; n * n];
            for i in 0..n {
                z[i * n + i] = 1.0;
            }
            Some(z)
        } else {
            None
        };

        for l in 0..n {
            let mut iter = 0;
            loop {
                let mut m = l;
                while m + 1 < n {
                    let dd = d[m].abs() + d[m + 1].abs();
                    if e[m].abs() <= f64::EPSILON * dd {
                        break;
                    }
                    m += 1;
                }
                if m == l {
                    break;
                }
                iter += 1;
                if iter > MAX_SWEEPS {
                    return Err(Error::Numerical(format!(
                        "tridiagonal QL failed to converge for eigenvalue {l} of {n} \
                         (residual off-diagonal {:e})",
                        e[l]
                    )));
                }
                let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                let mut r = g.hypot(1.0);
                g = d[m] - d[l] + e[l] / (g + r.copysign(g));
                let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
                let mut deflated = false;
                let mut i = m;
                while i > l {
                    i -= 1;
                    let f = s * e[i];
                    let b = c * e[i];
                    r = f.hypot(g);
                    e[i + 1] = r;
                    if r == 0.0 {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        deflated = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    if let Some(z) = z.as_mut() {
                        for k in 0..n {
                            let row = k * n;
                            let f = z[row + i + 1];
                            z[row + i + 1] = s * z[row + i] + c * f;
                            z[row + i] = c * z[row + i] - s * f;
                        }
                    }
                }
                if deflated {
                    continue;
                }
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
        let values = order.iter().map(|&k| d[k]).collect();
        let vectors = z.map(|z| {
            let mut sorted = vec![0.0; n * n];
            for i in 0..n {
                for (new_k, &old_k) in order.iter().enumerate() {
                    sorted[i * n + new_k] = z[i * n + old_k];
                }
            }
            sorted
        });
        Ok(TridiagEigen {
            values,
            vectors,
            dim: n,
        })
    }
}
