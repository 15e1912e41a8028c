//! Chebyshev–Lobatto collocation on the unit interval `ζ ∈ [0, 1]`.
//!
//! Node 0 sits at `ζ = 0` (the interface) and node `m-1` at `ζ = 1` (the
//! lid). Matrices are dense and row-major.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Chebyshev {
    m: usize,
    nodes: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
    from_lid: Vec<f64>,
    weights: Vec<f64>,
    bary: Vec<f64>,
}

impl Chebyshev {
    pub fn new(m: usize) -> Result<Self> {
        if m < 4 {
            return Err(Error::Config(format!("need at least 4 vertical nodes, got {m}")));
        }
        let big_n = m - 1;
        // x_j = cos(π j / N) runs from 1 to -1; ζ = (1 - x) / 2.
        let x: Vec<f64> = (0..m).map(|j| (PI * j as f64 / big_n as f64).cos()).collect();
        let nodes: Vec<f64> = x.iter().map(|&xj| 0.5 * (1.0 - xj)).collect();
        let c = |j: usize| if j == 0 || j == big_n { 2.0 } else { 1.0 };

        let mut dx = vec![0.0; m * m];
        for i in 0..m {
            let mut diag = 0.0;
            for j in 0..m {
                if i != j {
                    let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                    let v = c(i) / c(j) * sign / (x[i] - x[j]);
                    dx[i * m + j] = v;
                    diag += v;
                }
            }
            dx[i * m + i] = -diag;
        }
        // d/dζ = -2 d/dx
        let d1: Vec<f64> = dx.iter().map(|v| -2.0 * v).collect();
        let d2 = matmul(&d1, &d1, m);

        let from_lid = integration_matrix(&x, m);
        let weights: Vec<f64> = (0..m).map(|j| -from_lid[j]).collect();

        let bary = (0..m)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == big_n {
                    0.5 * s
                } else {
                    s
                }
            })
            .collect();

        Ok(Self {
            m,
            nodes,
            d1,
            d2,
            from_lid,
            weights,
            bary,
        })
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// First-derivative matrix in `ζ`.
    pub fn d1(&self) -> &[f64] {
        &self.d1
    }

    pub fn d2(&self) -> &[f64] {
        &self.d2
    }

    /// `(Q v)_j = ∫_1^{ζ_j} p(ζ) dζ` where `p` interpolates `v`.
    pub fn from_lid(&self) -> &[f64] {
        &self.from_lid
    }

    /// Clenshaw–Curtis weights for `∫_0^1`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Barycentric evaluation of the interpolant of `v` at `z`.
    pub fn interpolate(&self, v: &[f64], z: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..self.m {
            let diff = z - self.nodes[j];
            if diff == 0.0 {
                return v[j];
            }
            let w = self.bary[j] / diff;
            num += w * v[j];
            den += w;
        }
        num / den
    }

    /// Row of barycentric coefficients so that `Σ row_j v_j` interpolates at `z`.
    pub fn interpolation_row(&self, z: f64) -> Vec<f64> {
        let mut row = vec![0.0; self.m];
        for j in 0..self.m {
            if z == self.nodes[j] {
                row[j] = 1.0;
                return row;
            }
        }
        let mut den = 0.0;
        for j in 0..self.m {
            let w = self.bary[j] / (z - self.nodes[j]);
            row[j] = w;
            den += w;
        }
        row.iter_mut().for_each(|r| *r /= den);
        row
    }

    /// Applies an `m × m` matrix along the vertical index of stacked levels
    /// (`levels[j * np + p]`).
    pub fn apply(&self, mat: &[f64], levels: &[f64], np: usize) -> Vec<f64> {
        let m = self.m;
        debug_assert_eq!(levels.len(), m * np);
        let mut out = vec![0.0; m * np];
        for j in 0..m {
            let dst = &mut out[j * np..(j + 1) * np];
            for l in 0..m {
                let a = mat[j * m + l];
                if a == 0.0 {
                    continue;
                }
                let src = &levels[l * np..(l + 1) * np];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        out
    }
}

fn matmul(a: &[f64], b: &[f64], m: usize) -> Vec<f64> {
    let mut c = vec![0.0; m * m];
    for i in 0..m {
        for k in 0..m {
            let aik = a[i * m + k];
            for j in 0..m {
                c[i * m + j] += aik * b[k * m + j];
            }
        }
    }
    c
}

/// Builds `∫_{ζ=1}^{ζ_j}` via Chebyshev coefficients.
fn integration_matrix(x: &[f64], m: usize) -> Vec<f64> {
    let big_n = m - 1;
    let c = |j: usize| if j == 0 || j == big_n { 2.0 } else { 1.0 };
    let theta = |j: usize| PI * j as f64 / big_n as f64;
    let mut q = vec![0.0; m * m];
    for col in 0..m {
        // coefficients of the interpolant of the unit vector e_col
        let mut a = vec![0.0; m + 2];
        for (k, ak) in a.iter_mut().enumerate().take(m) {
            *ak = 2.0 / (big_n as f64 * c(k)) / c(col) * (k as f64 * theta(col)).cos();
        }
        // antiderivative coefficients in x
        let mut b = vec![0.0; m + 1];
        for k in 1..=m {
            let prev = if k == 1 { 2.0 * a[0] } else { a[k - 1] };
            b[k] = (prev - a[k + 1]) / (2.0 * k as f64);
        }
        let eval = |xv: f64| -> f64 {
            let t = xv.clamp(-1.0, 1.0).acos();
            b.iter().enumerate().map(|(k, bk)| bk * (k as f64 * t).cos()).sum()
        };
        let at_lid = eval(-1.0);
        for j in 0..m {
            // dζ = -dx / 2
            q[j * m + col] = -0.5 * (eval(x[j]) - at_lid);
        }
    }
    q
}
