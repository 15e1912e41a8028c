//! Poisson problems on one flattened strip: the collocation operator, a
//! flat-strip preconditioner that is exact mode by mode when `f` is
//! constant, and the sub-problems built on them (harmonic extension,
//! pressure problems, divergence-free projection).

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{BulkScalar, BulkVector, StripGeometry};
use crate::linalg::gmres;
use crate::spectral::{HorizontalGrid, InterfaceField};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 500;
/// Stagnation below this scaled residual is accepted as converged: it is
/// the round-off floor of the collocation system at large `m`.
const STALL_ACCEPT: f64 = 1e-10;
const RESTART: usize = 40;

/// Type of condition imposed on the interface rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BcKind {
    /// Prescribed values.
    Dirichlet,
    /// Prescribed `N·∇φ`.
    Flux,
}

#[derive(Clone, Copy, Debug)]
pub enum InterfaceCondition<'a> {
    Dirichlet(&'a [f64]),
    Flux(&'a [f64]),
}

impl InterfaceCondition<'_> {
    fn kind(&self) -> BcKind {
        match self {
            Self::Dirichlet(_) => BcKind::Dirichlet,
            Self::Flux(_) => BcKind::Flux,
        }
    }

    fn data(&self) -> &[f64] {
        match self {
            Self::Dirichlet(d) | Self::Flux(d) => d,
        }
    }
}

/// Homogeneous condition on the fixed lid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LidCondition {
    /// `∂3 φ = 0`
    Neumann,
    /// `φ = 0`
    Dirichlet,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub values: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Inverse of the flat-strip operator for every distinct `|k|^2`.
#[derive(Debug)]
struct FlatInverse {
    m: usize,
    slot: Vec<usize>,
    inverses: Vec<Vec<f64>>,
}

type CacheKey = (usize, usize, usize, u64, BcKind, LidCondition);

fn cache() -> &'static Mutex<HashMap<CacheKey, Arc<FlatInverse>>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Arc<FlatInverse>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl FlatInverse {
    fn get(geom: &StripGeometry, kind: BcKind, lid: LidCondition) -> Result<Arc<Self>> {
        let g = geom.grid();
        let hbar = geom.mean_depth();
        let key = (g.dim(), g.horizontal().n(), g.m(), hbar.to_bits(), kind, lid);
        if let Some(found) = cache().lock().expect("cache lock").get(&key) {
            return Ok(found.clone());
        }
        let built = Arc::new(Self::build(g.horizontal(), g.vertical(), hbar, kind, lid)?);
        let mut map = cache().lock().expect("cache lock");
        if map.len() > 64 {
            map.clear();
        }
        map.insert(key, built.clone());
        Ok(built)
    }

    fn build(
        h: &HorizontalGrid,
        ch: &crate::chebyshev::Chebyshev,
        hbar: f64,
        kind: BcKind,
        lid: LidCondition,
    ) -> Result<Self> {
        let m = ch.len();
        let b = 1.0 / hbar;
        let mut keys: Vec<i64> = Vec::new();
        let mut slot = vec![0; h.ncoef()];
        let mut index: HashMap<i64, usize> = HashMap::new();
        for (q, s) in slot.iter_mut().enumerate() {
            let k = h.wavenumbers(q);
            let k2 = k[0] * k[0] + k[1] * k[1];
            let next = keys.len();
            let e = *index.entry(k2).or_insert(next);
            if e == next {
                keys.push(k2);
            }
            *s = e;
        }
        let d1 = ch.d1();
        let d2 = ch.d2();
        let mut inverses = Vec::with_capacity(keys.len());
        for &k2 in &keys {
            let mut a = DMatrix::<f64>::zeros(m, m);
            for j in 1..m - 1 {
                for l in 0..m {
                    a[(j, l)] = b * b * d2[j * m + l];
                }
                a[(j, j)] -= k2 as f64;
            }
            match kind {
                BcKind::Dirichlet => a[(0, 0)] = 1.0,
                BcKind::Flux => {
                    for l in 0..m {
                        a[(0, l)] = b * d1[l];
                    }
                }
            }
            let last = m - 1;
            let gauge = kind == BcKind::Flux && lid == LidCondition::Neumann && k2 == 0;
            if lid == LidCondition::Dirichlet || gauge {
                a[(last, last)] = 1.0;
            } else {
                for l in 0..m {
                    a[(last, l)] = b * d1[last * m + l];
                }
            }
            let inv = a.try_inverse().ok_or(Error::NoConvergence {
                solver: "flat strip preconditioner",
                iterations: 0,
                residual: f64::NAN,
            })?;
            let mut row_major = vec![0.0; m * m];
            for r in 0..m {
                for c in 0..m {
                    row_major[r * m + c] = inv[(r, c)];
                }
            }
            inverses.push(row_major);
        }
        Ok(Self { m, slot, inverses })
    }

    fn apply(&self, h: &HorizontalGrid, r: &[f64]) -> Vec<f64> {
        let m = self.m;
        let nc = h.ncoef();
        let coeffs = h.transform(r);
        let mut out = vec![Complex64::new(0.0, 0.0); coeffs.len()];
        let mut col = vec![Complex64::new(0.0, 0.0); m];
        for q in 0..nc {
            for j in 0..m {
                col[j] = coeffs[j * nc + q];
            }
            let inv = &self.inverses[self.slot[q]];
            for j in 0..m {
                let row = &inv[j * m..(j + 1) * m];
                let mut s = Complex64::new(0.0, 0.0);
                for (a, c) in row.iter().zip(&col) {
                    s += *a * c;
                }
                out[j * nc + q] = s;
            }
        }
        h.synthesize(&out)
    }
}

/// Collocation solver for `Δφ = rhs` on one strip with a fixed choice of
/// boundary-condition types.
#[derive(Clone, Debug)]
pub struct StripSolver {
    geom: StripGeometry,
    kind: BcKind,
    lid: LidCondition,
    precond: Arc<FlatInverse>,
    /// Per-level row weights that bring every collocation row to unit size.
    row_scale: Vec<f64>,
    pub tol: f64,
    pub max_iter: usize,
}

impl StripSolver {
    pub fn new(geom: &StripGeometry, kind: BcKind, lid: LidCondition) -> Result<Self> {
        let ch = geom.grid().vertical();
        let m = ch.len();
        let b = 1.0 / geom.mean_depth().abs();
        let row_max = |mat: &[f64], j: usize| mat[j * m..(j + 1) * m].iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut row_scale: Vec<f64> = (0..m).map(|j| 1.0 / (1.0 + b * b * row_max(ch.d2(), j))).collect();
        row_scale[0] = match kind {
            BcKind::Dirichlet => 1.0,
            BcKind::Flux => 1.0 / (b * row_max(ch.d1(), 0)),
        };
        row_scale[m - 1] = match lid {
            LidCondition::Dirichlet => 1.0,
            LidCondition::Neumann => 1.0 / (b * row_max(ch.d1(), m - 1)),
        };
        Ok(Self {
            geom: geom.clone(),
            kind,
            lid,
            precond: FlatInverse::get(geom, kind, lid)?,
            row_scale,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        })
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn geometry(&self) -> &StripGeometry {
        &self.geom
    }

    fn pure_neumann(&self) -> bool {
        self.kind == BcKind::Flux && self.lid == LidCondition::Neumann
    }

    /// The full collocation operator including boundary rows.
    pub fn apply(&self, phi: &[f64]) -> Vec<f64> {
        let g = self.geom.grid();
        let np = g.npts();
        let m = g.m();
        let mut out = self.geom.laplacian(phi);
        let last = (m - 1) * np;
        match self.kind {
            BcKind::Dirichlet => out[..np].copy_from_slice(&phi[..np]),
            BcKind::Flux => {
                let dz = self.geom.d_zeta(phi);
                let flux = self.geom.flux_from(phi, &dz);
                out[..np].copy_from_slice(&flux);
                self.lid_rows(phi, &dz, &mut out[last..]);
                return out;
            }
        }
        match self.lid {
            LidCondition::Dirichlet => out[last..].copy_from_slice(&phi[last..]),
            LidCondition::Neumann => {
                let dz = self.geom.d_zeta(phi);
                self.lid_rows(phi, &dz, &mut out[last..]);
            }
        }
        out
    }

    fn lid_rows(&self, phi: &[f64], dz: &[f64], out: &mut [f64]) {
        let np = self.geom.grid().npts();
        let last = (self.geom.grid().m() - 1) * np;
        let depth = self.geom.depth();
        for p in 0..np {
            out[p] = dz[last + p] / depth[p];
        }
        if self.pure_neumann() {
            let mr = out.iter().sum::<f64>() / np as f64;
            let mp = phi[last..].iter().sum::<f64>() / np as f64;
            out.iter_mut().for_each(|v| *v += mp - mr);
        }
    }

    pub fn precondition(&self, r: &[f64]) -> Vec<f64> {
        self.precond.apply(self.geom.grid().horizontal(), r)
    }

    /// Solves with interior right-hand side `rhs` (boundary rows of `rhs`
    /// are ignored). For a flux condition with a Neumann lid the solution is
    /// fixed by the lid mean `lid_mean` (default 0).
    pub fn solve(&self, rhs: &[f64], bc: InterfaceCondition<'_>, lid_mean: Option<f64>) -> Result<Solution> {
        let g = self.geom.grid();
        let np = g.npts();
        let m = g.m();
        if bc.kind() != self.kind {
            return Err(Error::Config(
                "boundary condition type differs from solver setup".into(),
            ));
        }
        if rhs.len() != g.len() || bc.data().len() != np {
            return Err(Error::GridMismatch("elliptic data has the wrong length".into()));
        }
        if rhs.iter().chain(bc.data()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("elliptic data"));
        }
        let mut b = rhs.to_vec();
        b[..np].copy_from_slice(bc.data());
        let last = (m - 1) * np;
        let lm = if self.pure_neumann() {
            lid_mean.unwrap_or(0.0)
        } else {
            0.0
        };
        b[last..].iter_mut().for_each(|v| *v = lm);
        let mut x = vec![0.0; g.len()];
        if b.iter().all(|v| *v == 0.0) {
            return Ok(Solution {
                values: x,
                iterations: 0,
                residual: 0.0,
            });
        }
        // Two-sided scaling: GMRES runs on S A M⁻¹ S⁻¹ with S the row weights.
        let scale = |v: &mut [f64], inverse: bool| {
            for (j, w) in self.row_scale.iter().enumerate() {
                let w = if inverse { 1.0 / w } else { *w };
                v[j * np..(j + 1) * np].iter_mut().for_each(|x| *x *= w);
            }
        };
        scale(&mut b, false);
        let mut y = vec![0.0; g.len()];
        let out = gmres(
            |v| {
                let mut z = v.to_vec();
                scale(&mut z, true);
                let mut r = self.apply(&self.precondition(&z));
                scale(&mut r, false);
                r
            },
            |v| v.to_vec(),
            &b,
            &mut y,
            self.tol,
            RESTART,
            self.max_iter,
        );
        let out = match out {
            Err(Error::NoConvergence {
                iterations, residual, ..
            }) if residual <= STALL_ACCEPT => crate::linalg::KrylovOutcome { iterations, residual },
            other => other?,
        };
        scale(&mut y, true);
        x = self.precondition(&y);
        Ok(Solution {
            values: x,
            iterations: out.iterations,
            residual: out.residual,
        })
    }
}

/// `Δp = rhs` with `p = g` on the interface and the chosen lid condition.
pub fn solve_strip(
    geom: &StripGeometry,
    rhs: &BulkScalar,
    dirichlet: &InterfaceField,
    lid: LidCondition,
) -> Result<BulkScalar> {
    let solver = StripSolver::new(geom, BcKind::Dirichlet, lid)?;
    let sol = solver.solve(&rhs.values, InterfaceCondition::Dirichlet(dirichlet.values()), None)?;
    BulkScalar::new(geom.grid(), sol.values)
}

/// Harmonic extension with Neumann lid.
pub fn harmonic_extension(geom: &StripGeometry, g: &InterfaceField) -> Result<BulkScalar> {
    let solver = StripSolver::new(geom, BcKind::Dirichlet, LidCondition::Neumann)?;
    let rhs = vec![0.0; geom.grid().len()];
    let sol = solver.solve(&rhs, InterfaceCondition::Dirichlet(g.values()), None)?;
    BulkScalar::new(geom.grid(), sol.values)
}

/// Sum over `(a, b)` of `∂_b u_a ∂_a w_b` with both factors and the product
/// truncated to the 2/3 band horizontally.
pub fn velocity_gradient_trace(geom: &StripGeometry, u: &[[Vec<f64>; 3]; 3], w: &[[Vec<f64>; 3]; 3]) -> Vec<f64> {
    let h = geom.grid().horizontal();
    let n = geom.grid().len();
    let fu: Vec<Vec<Vec<f64>>> = u.iter().map(|row| row.iter().map(|c| h.dealias(c)).collect()).collect();
    let same = std::ptr::eq(u, w);
    let fw: Vec<Vec<Vec<f64>>> = if same {
        fu.clone()
    } else {
        w.iter().map(|row| row.iter().map(|c| h.dealias(c)).collect()).collect()
    };
    let mut out = vec![0.0; n];
    for a in 0..3 {
        for b in 0..3 {
            let x = &fu[a][b];
            let y = &fw[b][a];
            for k in 0..n {
                out[k] += x[k] * y[k];
            }
        }
    }
    h.dealias(&out)
}

fn pressure_solver(geom: &StripGeometry) -> Result<StripSolver> {
    StripSolver::new(geom, BcKind::Dirichlet, LidCondition::Neumann)
}

fn solve_pressure(geom: &StripGeometry, rhs: Vec<f64>) -> Result<BulkScalar> {
    let np = geom.grid().npts();
    let zero = vec![0.0; np];
    let sol = pressure_solver(geom)?.solve(&rhs, InterfaceCondition::Dirichlet(&zero), None)?;
    BulkScalar::new(geom.grid(), sol.values)
}

/// `Δp = −tr(∇u1 ∇u2)`, `p = 0` on the interface, `∂3 p = 0` on the lid.
pub fn pressure_bilinear(geom: &StripGeometry, u1: &BulkVector, u2: &BulkVector) -> Result<BulkScalar> {
    let j1 = geom.jacobian(u1);
    let j2 = geom.jacobian(u2);
    let rhs: Vec<f64> = velocity_gradient_trace(geom, &j1, &j2)
        .into_iter()
        .map(|v| -v)
        .collect();
    solve_pressure(geom, rhs)
}

/// Right-hand side of the combined problem for `p_{u,u} − Σ p_{F_j,F_j}`.
pub fn combined_pressure_rhs(geom: &StripGeometry, ju: &[[Vec<f64>; 3]; 3], jf: &[[[Vec<f64>; 3]; 3]; 3]) -> Vec<f64> {
    let mut rhs: Vec<f64> = velocity_gradient_trace(geom, ju, ju).into_iter().map(|v| -v).collect();
    for jj in jf {
        let t = velocity_gradient_trace(geom, jj, jj);
        for (r, v) in rhs.iter_mut().zip(t) {
            *r += v;
        }
    }
    rhs
}

/// `p_{u,u} − Σ_j p_{F_j,F_j}` with a single solve.
pub fn combined_pressure(geom: &StripGeometry, u: &BulkVector, f: &[BulkVector; 3]) -> Result<BulkScalar> {
    let ju = geom.jacobian(u);
    let jf = [geom.jacobian(&f[0]), geom.jacobian(&f[1]), geom.jacobian(&f[2])];
    solve_pressure(geom, combined_pressure_rhs(geom, &ju, &jf))
}

/// `p = H p̄ + ρ (p_{u,u} − Σ_j p_{F_j,F_j})`.
pub fn assemble_pressure(
    geom: &StripGeometry,
    p_bar: &InterfaceField,
    u: &BulkVector,
    f: &[BulkVector; 3],
    rho: f64,
) -> Result<BulkScalar> {
    let mut out = combined_pressure(geom, u, f)?;
    out.values.iter_mut().for_each(|v| *v *= rho);
    if p_bar.max_abs() > 0.0 {
        let ext = harmonic_extension(geom, p_bar)?;
        for (o, e) in out.values.iter_mut().zip(&ext.values) {
            *o += e;
        }
    }
    Ok(out)
}

/// `w − ∇φ` with `Δφ = div w`, `φ = 0` on the interface and `∂3 φ = 0` on
/// the lid.
pub fn divfree_project(geom: &StripGeometry, w: &BulkVector) -> Result<BulkVector> {
    let div = geom.divergence(w);
    let phi = solve_pressure(geom, div)?;
    let grad = geom.gradient(&phi.values);
    let mut out = w.clone();
    for a in 0..3 {
        for (o, g) in out.comps[a].iter_mut().zip(&grad[a]) {
            *o -= g;
        }
    }
    Ok(out)
}
