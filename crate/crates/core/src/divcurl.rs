//! Reconstruction of a vector field on one strip from its curl, divergence,
//! interface flux `u·N`, the lid condition `u3 = 0` and the lid integrals
//! of its horizontal components.
//!
//! The field is assembled as `w + ∇φ + Σ c_i (e_i + ∇ψ_i)`: `w` is an
//! explicit field with the prescribed curl (vertical integration of the
//! horizontal vorticity plus a stream function for the lid value of `ω3`),
//! `φ` corrects divergence and flux through one Neumann solve, and the
//! harmonic fields `e_i + ∇ψ_i` carry the lid integrals.

use num_complex::Complex64;

use crate::elliptic::{divfree_project, BcKind, InterfaceCondition, LidCondition, StripSolver};
use crate::error::{Error, Result};
use crate::geometry::{BulkVector, Side, StripGeometry};
use crate::spectral::{project_mean_zero, InterfaceField};

pub const DEFAULT_COMPAT_TOL: f64 = 1e-8;

/// Residuals of the three solvability conditions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompatibilityReport {
    /// `‖div ω‖_{L²}`
    pub div_omega: f64,
    /// `|∫_lid ω3|`
    pub lid_vorticity: f64,
    /// `|∫θ ± ∫_Ω g|`
    pub flux_balance: f64,
    /// Scale the tolerance is measured against.
    pub scale: f64,
    pub tol: f64,
}

impl CompatibilityReport {
    pub fn passes(&self) -> bool {
        self.failure().is_none()
    }

    fn failure(&self) -> Option<(&'static str, f64)> {
        let lim = self.tol * self.scale;
        if self.div_omega > lim {
            Some(("div omega = 0", self.div_omega))
        } else if self.lid_vorticity > lim {
            Some(("zero lid integral of omega_3", self.lid_vorticity))
        } else if self.flux_balance > lim {
            Some(("interface flux balances the divergence", self.flux_balance))
        } else {
            None
        }
    }

    pub fn check(&self) -> Result<()> {
        match self.failure() {
            Some((condition, residual)) => Err(Error::Compatibility { condition, residual }),
            None => Ok(()),
        }
    }
}

/// Div-curl solver bound to one strip geometry. Building it precomputes
/// the two harmonic fields.
#[derive(Clone, Debug)]
pub struct DivCurl {
    geom: StripGeometry,
    solver: StripSolver,
    harmonic: [[Vec<f64>; 3]; 2],
    pub tol: f64,
}

impl DivCurl {
    pub fn new(geom: &StripGeometry) -> Result<Self> {
        let solver = StripSolver::new(geom, BcKind::Flux, LidCondition::Neumann)?.with_tol(1e-12);
        let n = geom.grid().len();
        let mut harmonic: [[Vec<f64>; 3]; 2] = Default::default();
        for (i, hf) in harmonic.iter_mut().enumerate() {
            let mut field = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
            field[i].iter_mut().for_each(|v| *v = 1.0);
            let slope = geom.slope(i);
            if slope.iter().any(|v| *v != 0.0) {
                let zero = vec![0.0; n];
                let psi = solver.solve(&zero, InterfaceCondition::Flux(slope), None)?;
                let g = geom.gradient(&psi.values);
                for a in 0..3 {
                    for (fv, gv) in field[a].iter_mut().zip(&g[a]) {
                        *fv += gv;
                    }
                }
            }
            *hf = field;
        }
        Ok(Self {
            geom: geom.clone(),
            solver,
            harmonic,
            tol: DEFAULT_COMPAT_TOL,
        })
    }

    pub fn geometry(&self) -> &StripGeometry {
        &self.geom
    }

    pub fn check(&self, omega: &BulkVector, g: &[f64], theta: &InterfaceField) -> CompatibilityReport {
        let geom = &self.geom;
        let np = geom.grid().npts();
        let m = geom.grid().m();
        let div = geom.divergence(omega);
        let lid = &omega.comps[2][(m - 1) * np..];
        let vol = geom.grid().horizontal().volume();
        let lid_int = lid.iter().sum::<f64>() / np as f64 * vol;
        let sign = geom.side().sign();
        let balance = theta.integral() + sign * geom.volume_integral(g);
        let scale = 1.0 + geom.vector_l2_norm(omega) + geom.l2_norm(g) + theta.l2_norm();
        CompatibilityReport {
            div_omega: geom.l2_norm(&div),
            lid_vorticity: lid_int.abs(),
            flux_balance: balance.abs(),
            scale,
            tol: self.tol,
        }
    }

    /// Solves after checking the solvability conditions.
    pub fn solve(&self, omega: &BulkVector, g: &[f64], theta: &InterfaceField, alpha: [f64; 2]) -> Result<BulkVector> {
        self.check(omega, g, theta).check()?;
        self.solve_unchecked(omega, Some(g), theta, alpha)
    }

    /// Solves without the solvability check; incompatible parts of the data
    /// are silently dropped. `g = None` means divergence-free.
    pub fn solve_unchecked(
        &self,
        omega: &BulkVector,
        g: Option<&[f64]>,
        theta: &InterfaceField,
        alpha: [f64; 2],
    ) -> Result<BulkVector> {
        let geom = &self.geom;
        let grid = geom.grid();
        let np = grid.npts();
        let m = grid.m();
        let n = grid.len();
        let h = grid.horizontal();
        let ch = grid.vertical();
        if !omega.is_finite() || theta.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("div-curl data"));
        }

        // stream function for the lid value of ω3
        let lid3 = &omega.comps[2][(m - 1) * np..];
        let chi_hat: Vec<Complex64> = h
            .transform(lid3)
            .into_iter()
            .enumerate()
            .map(|(q, c)| {
                let k = h.wavevector(q);
                let k2 = k[0] * k[0] + k[1] * k[1];
                if k2 == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    -c / k2
                }
            })
            .collect();
        let a1: Vec<f64> = {
            let c: Vec<Complex64> = chi_hat
                .iter()
                .enumerate()
                .map(|(q, z)| -h.derivative_symbol(q, 1) * z)
                .collect();
            h.synthesize(&c)
        };
        let a2: Vec<f64> = {
            let c: Vec<Complex64> = chi_hat
                .iter()
                .enumerate()
                .map(|(q, z)| h.derivative_symbol(q, 0) * z)
                .collect();
            h.synthesize(&c)
        };

        let q1 = ch.apply(ch.from_lid(), &omega.comps[0], np);
        let q2 = ch.apply(ch.from_lid(), &omega.comps[1], np);
        let depth = geom.depth();
        let mut u = BulkVector::zeros(grid);
        for j in 0..m {
            for p in 0..np {
                let k = j * np + p;
                u.comps[0][k] = a1[p] + depth[p] * q2[k];
                u.comps[1][k] = a2[p] - depth[p] * q1[k];
            }
        }

        let div_w = geom.divergence(&u);
        let rhs: Vec<f64> = match g {
            Some(g) => g.iter().zip(&div_w).map(|(a, b)| a - b).collect(),
            None => div_w.iter().map(|v| -v).collect(),
        };
        let nw = geom.normal_component(&u);
        let flux: Vec<f64> = theta.values().iter().zip(nw.values()).map(|(t, w)| t - w).collect();
        let phi = self.solver.solve(&rhs, InterfaceCondition::Flux(&flux), None)?;
        if phi.iterations > 0 {
            let grad = geom.gradient(&phi.values);
            for a in 0..3 {
                for (uv, gv) in u.comps[a].iter_mut().zip(&grad[a]) {
                    *uv += gv;
                }
            }
        }
        let vol = h.volume();
        for i in 0..2 {
            let c = alpha[i] / vol;
            if c != 0.0 {
                for a in 0..3 {
                    for k in 0..n {
                        u.comps[a][k] += c * self.harmonic[i][a][k];
                    }
                }
            }
        }
        u.comps[2][(m - 1) * np..].iter_mut().for_each(|v| *v = 0.0);
        Ok(u)
    }
}

/// Compatibility check for one strip.
pub fn check_compatibility(
    geom: &StripGeometry,
    omega: &BulkVector,
    g: &[f64],
    theta: &InterfaceField,
) -> Result<CompatibilityReport> {
    Ok(DivCurl::new(geom)?.check(omega, g, theta))
}

pub fn solve_div_curl(
    geom: &StripGeometry,
    omega: &BulkVector,
    g: &[f64],
    theta: &InterfaceField,
    alpha: [f64; 2],
) -> Result<BulkVector> {
    DivCurl::new(geom)?.solve(omega, g, theta, alpha)
}

/// Lid integrals `∫_lid v_i dx'` of the horizontal components.
pub fn lid_integrals(v: &BulkVector) -> [f64; 2] {
    let tr = v.lid_trace();
    [tr[0].integral(), tr[1].integral()]
}

/// Bulk fields of one side. `deformation[j]` is the column `F_j` and
/// `deformation_curl[j]` its curl `G_j`.
#[derive(Clone, Debug)]
pub struct SideFields {
    pub velocity: BulkVector,
    pub deformation: [BulkVector; 3],
    pub vorticity: BulkVector,
    pub deformation_curl: [BulkVector; 3],
    /// Lid integrals of the horizontal velocity.
    pub beta: [f64; 2],
    /// `gamma[i][j]`: lid integral of `F_ij`.
    pub gamma: [[f64; 3]; 2],
}

impl SideFields {
    /// Derives curls and lid integrals from velocity and deformation.
    pub fn from_fields(geom: &StripGeometry, velocity: BulkVector, deformation: [BulkVector; 3]) -> Self {
        let vorticity = geom.curl(&velocity);
        let deformation_curl = std::array::from_fn(|j| geom.curl(&deformation[j]));
        let beta = lid_integrals(&velocity);
        let mut gamma = [[0.0; 3]; 2];
        for (j, col) in deformation.iter().enumerate() {
            let l = lid_integrals(col);
            gamma[0][j] = l[0];
            gamma[1][j] = l[1];
        }
        Self {
            velocity,
            deformation,
            vorticity,
            deformation_curl,
            beta,
            gamma,
        }
    }
}

/// Evolved quantities of one side from which the fields are rebuilt.
#[derive(Clone, Debug)]
pub struct SideCurls {
    pub vorticity: BulkVector,
    pub deformation_curl: [BulkVector; 3],
    pub beta: [f64; 2],
    pub gamma: [[f64; 3]; 2],
}

/// Rebuilds velocity and deformation on one side: the curls are projected
/// to divergence-free fields, then one div-curl solve per field with
/// interface flux `Pθ` for the velocity and zero for each column of `F`.
pub fn recover_side(dc: &DivCurl, theta: &InterfaceField, curls: &SideCurls, check: bool) -> Result<SideFields> {
    let geom = dc.geometry();
    let omega = divfree_project(geom, &curls.vorticity)?;
    let gcurl: Vec<BulkVector> = curls
        .deformation_curl
        .iter()
        .map(|g| divfree_project(geom, g))
        .collect::<Result<_>>()?;
    let flux = project_mean_zero(theta);
    let zero_flux = InterfaceField::zeros(theta.grid());
    if check {
        let zeros = vec![0.0; geom.grid().len()];
        dc.check(&omega, &zeros, &flux).check()?;
        for g in &gcurl {
            dc.check(g, &zeros, &zero_flux).check()?;
        }
    }
    let velocity = dc.solve_unchecked(&omega, None, &flux, curls.beta)?;
    let mut deformation: [BulkVector; 3] = std::array::from_fn(|_| BulkVector::zeros(geom.grid()));
    for j in 0..3 {
        deformation[j] = dc.solve_unchecked(&gcurl[j], None, &zero_flux, [curls.gamma[0][j], curls.gamma[1][j]])?;
    }
    let gcurl: [BulkVector; 3] = gcurl.try_into().expect("three columns");
    Ok(SideFields {
        velocity,
        deformation,
        vorticity: omega,
        deformation_curl: gcurl,
        beta: curls.beta,
        gamma: curls.gamma,
    })
}

/// Rebuilds both sides for interface `f` (the `DivCurl` solvers must be
/// built on the plus and minus geometries of `f`).
pub fn recover_state(
    solvers: &[DivCurl],
    theta: &InterfaceField,
    curls: &[SideCurls],
    check: bool,
) -> Result<Vec<SideFields>> {
    solvers
        .iter()
        .zip(curls)
        .map(|(dc, c)| recover_side(dc, theta, c, check))
        .collect()
}

/// Interface mismatch diagnostics of recovered fields: `max |u·N − Pθ|`
/// and `max_j |F_j·N|`.
pub fn interface_constraints(geom: &StripGeometry, fields: &SideFields, theta: &InterfaceField) -> (f64, f64) {
    let pt = project_mean_zero(theta);
    let un = geom.normal_component(&fields.velocity).sub(&pt).max_abs();
    let fnrm = fields
        .deformation
        .iter()
        .map(|c| geom.normal_component(c).max_abs())
        .fold(0.0, f64::max);
    (un, fnrm)
}

/// Side label used in diagnostics.
pub fn side_label(side: Side) -> &'static str {
    side.name()
}
