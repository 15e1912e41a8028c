//! Krylov solvers on plain `f64` slices.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KrylovOutcome {
    pub iterations: usize,
    /// Final residual relative to the right-hand side.
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Restarted GMRES with right preconditioning. `x` holds the initial guess
/// on entry and the last iterate on exit, also when convergence fails
/// (after `max_iter` or once a restart cycle stops making progress).
pub fn gmres<A, M>(
    apply: A,
    precond: M,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    restart: usize,
    max_iter: usize,
) -> Result<KrylovOutcome>
where
    A: Fn(&[f64]) -> Vec<f64>,
    M: Fn(&[f64]) -> Vec<f64>,
{
    let n = b.len();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(KrylovOutcome {
            iterations: 0,
            residual: 0.0,
        });
    }
    let mut total = 0;
    let mut rel;
    let mut cycle_start = f64::INFINITY;
    loop {
        let ax = apply(x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm(&r);
        rel = beta / bnorm;
        if !rel.is_finite() {
            return Err(Error::NonFinite("GMRES residual"));
        }
        if rel <= tol {
            return Ok(KrylovOutcome {
                iterations: total,
                residual: rel,
            });
        }
        // a full cycle that fails to halve the residual means round-off stagnation
        if total >= max_iter || rel > 0.5 * cycle_start {
            break;
        }
        cycle_start = rel;
        let mut v: Vec<Vec<f64>> = Vec::with_capacity(restart + 1);
        let mut z: Vec<Vec<f64>> = Vec::with_capacity(restart);
        v.push(r.iter().map(|ri| ri / beta).collect());
        let mut hmat = vec![vec![0.0; restart]; restart + 1];
        let mut cs = vec![0.0; restart];
        let mut sn = vec![0.0; restart];
        let mut g = vec![0.0; restart + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..restart {
            let zk = precond(&v[k]);
            let mut w = apply(&zk);
            z.push(zk);
            for i in 0..=k {
                let hik = dot(&w, &v[i]);
                hmat[i][k] = hik;
                for (wj, vj) in w.iter_mut().zip(&v[i]) {
                    *wj -= hik * vj;
                }
            }
            let hn = norm(&w);
            hmat[k + 1][k] = hn;
            for i in 0..k {
                let t = cs[i] * hmat[i][k] + sn[i] * hmat[i + 1][k];
                hmat[i + 1][k] = -sn[i] * hmat[i][k] + cs[i] * hmat[i + 1][k];
                hmat[i][k] = t;
            }
            let denom = hmat[k][k].hypot(hmat[k + 1][k]);
            if denom == 0.0 {
                cs[k] = 1.0;
                sn[k] = 0.0;
            } else {
                cs[k] = hmat[k][k] / denom;
                sn[k] = hmat[k + 1][k] / denom;
            }
            hmat[k][k] = cs[k] * hmat[k][k] + sn[k] * hmat[k + 1][k];
            hmat[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            total += 1;
            k_used = k + 1;
            let est = g[k + 1].abs() / bnorm;
            if est <= 0.5 * tol || total >= max_iter || hn == 0.0 {
                break;
            }
            v.push(w.iter().map(|wi| wi / hn).collect());
        }
        // back substitution
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= hmat[i][j] * y[j];
            }
            y[i] = s / hmat[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            for i in 0..n {
                x[i] += yj * z[j][i];
            }
        }
    }
    Err(Error::NoConvergence {
        solver: "GMRES",
        iterations: total,
        residual: rel,
    })
}

/// Preconditioned conjugate gradients for a symmetric positive operator
/// with respect to the supplied inner product.
pub fn pcg<A, M, I>(
    apply: A,
    precond: M,
    inner: I,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Result<KrylovOutcome>
where
    A: Fn(&[f64]) -> Result<Vec<f64>>,
    M: Fn(&[f64]) -> Vec<f64>,
    I: Fn(&[f64], &[f64]) -> f64,
{
    let bnorm = inner(b, b).sqrt();
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(KrylovOutcome {
            iterations: 0,
            residual: 0.0,
        });
    }
    let ax = apply(x)?;
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = inner(&r, &z);
    let mut rel = inner(&r, &r).sqrt() / bnorm;
    for it in 0..max_iter {
        if rel <= tol {
            return Ok(KrylovOutcome {
                iterations: it,
                residual: rel,
            });
        }
        let ap = apply(&p)?;
        let pap = inner(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            return Err(Error::NoConvergence {
                solver: "conjugate gradients (operator not positive)",
                iterations: it,
                residual: rel,
            });
        }
        let a = rz / pap;
        for i in 0..x.len() {
            x[i] += a * p[i];
            r[i] -= a * ap[i];
        }
        rel = inner(&r, &r).sqrt() / bnorm;
        z = precond(&r);
        let rz_new = inner(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..p.len() {
            p[i] = z[i] + beta * p[i];
        }
    }
    if rel <= tol {
        return Ok(KrylovOutcome {
            iterations: max_iter,
            residual: rel,
        });
    }
    Err(Error::NoConvergence {
        solver: "conjugate gradients",
        iterations: max_iter,
        residual: rel,
    })
}
