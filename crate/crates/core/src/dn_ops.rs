//! Dirichlet–Neumann operators of the two fluid regions, the
//! density-weighted sum `Ñ = N⁺/ρ⁺ + N⁻/ρ⁻` and its inverse on mean-zero
//! data.

use num_complex::Complex64;

use crate::elliptic::{BcKind, InterfaceCondition, LidCondition, StripSolver};
use crate::error::{Error, Result};
use crate::geometry::{Side, StripGeometry, StripGrid};
use crate::linalg::pcg;
use crate::spectral::{project_mean_zero, InterfaceField};

/// Relative tolerance of the harmonic extensions behind each application.
const INNER_TOL: f64 = 1e-12;
pub const DEFAULT_INVERT_TOL: f64 = 1e-10;
const MAX_CG_ITER: usize = 200;

/// Both DN operators for one interface position.
#[derive(Clone, Debug)]
pub struct DnOperators {
    solvers: [StripSolver; 2],
    rho: [f64; 2],
}

impl DnOperators {
    /// `grid` may be either side; the mirror grid is derived from it.
    /// Densities enter only through [`tilde`](Self::tilde) and
    /// [`invert`](Self::invert).
    pub fn new(f: &InterfaceField, grid: &StripGrid, rho_plus: f64, rho_minus: f64) -> Result<Self> {
        let build = |side: Side| -> Result<StripSolver> {
            let geom = StripGeometry::new(f, &grid.with_side(side))?;
            Ok(StripSolver::new(&geom, BcKind::Dirichlet, LidCondition::Neumann)?.with_tol(INNER_TOL))
        };
        Ok(Self {
            solvers: [build(Side::Plus)?, build(Side::Minus)?],
            rho: [rho_plus, rho_minus],
        })
    }

    pub fn geometry(&self, side: Side) -> &StripGeometry {
        self.solvers[side.index()].geometry()
    }

    pub fn interface(&self) -> &InterfaceField {
        self.geometry(Side::Plus).interface()
    }

    fn check_rho(&self) -> Result<()> {
        if self.rho.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
            return Err(Error::Config(format!(
                "both densities must be positive for the weighted DN operator, got {:?}",
                self.rho
            )));
        }
        Ok(())
    }

    /// `N^± g = ∓ N·∇(H^± g)` on the interface.
    pub fn apply(&self, side: Side, g: &InterfaceField) -> Result<InterfaceField> {
        let solver = &self.solvers[side.index()];
        let geom = solver.geometry();
        let rhs = vec![0.0; geom.grid().len()];
        let sol = solver.solve(&rhs, InterfaceCondition::Dirichlet(g.values()), None)?;
        let flux = geom.interface_flux(&sol.values);
        Ok(flux.scale(-side.sign()))
    }

    /// `N⁺ g − N⁻ g`.
    pub fn difference(&self, g: &InterfaceField) -> Result<InterfaceField> {
        Ok(self.apply(Side::Plus, g)?.sub(&self.apply(Side::Minus, g)?))
    }

    pub fn tilde(&self, g: &InterfaceField) -> Result<InterfaceField> {
        self.check_rho()?;
        let mut out = self.apply(Side::Plus, g)?.scale(1.0 / self.rho[0]);
        out.axpy(1.0 / self.rho[1], &self.apply(Side::Minus, g)?);
        Ok(out)
    }

    /// Flat-interface symbol of `Ñ` used as preconditioner.
    fn flat_symbol(&self, k: f64) -> f64 {
        let hp = self.geometry(Side::Plus).mean_depth().abs();
        let hm = self.geometry(Side::Minus).mean_depth().abs();
        k * (k * hp).tanh() / self.rho[0] + k * (k * hm).tanh() / self.rho[1]
    }

    /// Solves `Ñ h = g` for mean-zero `g`; the result is mean-zero.
    pub fn invert(&self, g: &InterfaceField, tol: f64) -> Result<InterfaceField> {
        self.check_rho()?;
        let mean = g.mean();
        if mean.abs() > 1e-10 * g.max_abs().max(1.0) {
            return Err(Error::NotMeanZero(mean));
        }
        let grid = g.grid().clone();
        let b = project_mean_zero(g);
        let apply = |v: &[f64]| -> Result<Vec<f64>> {
            let field = InterfaceField::from_vec(grid.clone(), v.to_vec());
            Ok(project_mean_zero(&self.tilde(&field)?).into_values())
        };
        let precond = |v: &[f64]| -> Vec<f64> {
            grid.apply_symbol(v, |q| {
                let k = grid.wavevector(q);
                let kk = (k[0] * k[0] + k[1] * k[1]).sqrt();
                if kk == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(1.0 / self.flat_symbol(kk), 0.0)
                }
            })
        };
        let inner = |a: &[f64], c: &[f64]| grid.inner(a, c);
        let mut x = precond(b.values());
        pcg(apply, precond, inner, b.values(), &mut x, tol, MAX_CG_ITER)?;
        Ok(project_mean_zero(&InterfaceField::from_vec(grid.clone(), x)))
    }
}

/// `N^± g` for one side.
pub fn dn_apply(geom: &StripGeometry, g: &InterfaceField) -> Result<InterfaceField> {
    let side = geom.side();
    let solver = StripSolver::new(geom, BcKind::Dirichlet, LidCondition::Neumann)?.with_tol(INNER_TOL);
    let rhs = vec![0.0; geom.grid().len()];
    let sol = solver.solve(&rhs, InterfaceCondition::Dirichlet(g.values()), None)?;
    Ok(geom.interface_flux(&sol.values).scale(-side.sign()))
}

pub fn dn_tilde(
    f: &InterfaceField,
    grid: &StripGrid,
    rho_plus: f64,
    rho_minus: f64,
    g: &InterfaceField,
) -> Result<InterfaceField> {
    DnOperators::new(f, grid, rho_plus, rho_minus)?.tilde(g)
}

pub fn dn_invert(
    f: &InterfaceField,
    grid: &StripGrid,
    rho_plus: f64,
    rho_minus: f64,
    g: &InterfaceField,
    tol: f64,
) -> Result<InterfaceField> {
    DnOperators::new(f, grid, rho_plus, rho_minus)?.invert(g, tol)
}

/// Interface pressure `p̄ = Ñ⁻¹ P(g⁺ − g⁻)` from the per-side balance terms
/// (see [`crate::interface_dynamics::side_terms`]).
pub fn interface_pressure(
    ops: &DnOperators,
    g_plus: &InterfaceField,
    g_minus: &InterfaceField,
) -> Result<InterfaceField> {
    let diff = project_mean_zero(&g_plus.sub(g_minus));
    ops.invert(&diff, DEFAULT_INVERT_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chebyshev::Chebyshev;
    use crate::spectral::HorizontalGrid;
    use std::sync::Arc;

    fn grid(n: usize, m: usize) -> StripGrid {
        StripGrid::new(
            HorizontalGrid::new(1, n).unwrap(),
            Arc::new(Chebyshev::new(m).unwrap()),
            Side::Plus,
        )
        .unwrap()
    }

    #[test]
    fn flat_examples() {
        let g = grid(32, 24);
        let h = g.horizontal().clone();
        let zero = InterfaceField::zeros(&h);
        let ops = DnOperators::new(&zero, &g, 1.0, 1.0).unwrap();
        let c = ops.apply(Side::Plus, &InterfaceField::constant(&h, 3.0)).unwrap();
        assert!(c.max_abs() < 1e-11);
        for k in [1.0f64, 2.0, 5.0] {
            let cosk = InterfaceField::from_fn(&h, |x| (k * x[0]).cos());
            for side in Side::BOTH {
                let out = ops.apply(side, &cosk).unwrap();
                for p in 0..h.npts() {
                    assert!((out.values()[p] - k * k.tanh() * cosk.values()[p]).abs() < 1e-10);
                }
            }
            assert!(ops.difference(&cosk).unwrap().max_abs() < 1e-10);
        }
        let cos1 = InterfaceField::from_fn(&h, |x| x[0].cos());
        let t = ops.tilde(&cos1).unwrap();
        let inv = ops.invert(&cos1, 1e-12).unwrap();
        for p in 0..h.npts() {
            assert!((t.values()[p] - 2.0 * 1f64.tanh() * cos1.values()[p]).abs() < 1e-10);
            assert!((inv.values()[p] - cos1.values()[p] / (2.0 * 1f64.tanh())).abs() < 1e-10);
        }
        assert!(matches!(
            ops.invert(&InterfaceField::constant(&h, 1.0), 1e-10),
            Err(Error::NotMeanZero(_))
        ));
        let bad = DnOperators::new(&zero, &g, 0.0, 1.0).unwrap();
        assert!(matches!(bad.tilde(&cos1), Err(Error::Config(_))));
    }

    #[test]
    fn curved_round_trip() {
        let g = grid(32, 24);
        let h = g.horizontal().clone();
        let f = InterfaceField::from_fn(&h, |x| 0.15 * x[0].sin() + 0.05 * (3.0 * x[0]).cos());
        let ops = DnOperators::new(&f, &g, 1.0, 2.0).unwrap();
        let g0 = InterfaceField::from_fn(&h, |x| x[0].cos() + 0.3 * (2.0 * x[0]).sin());
        let t = ops.tilde(&g0).unwrap();
        assert!(t.mean().abs() < 1e-10);
        let back = ops.invert(&project_mean_zero(&t), 1e-11).unwrap();
        assert!(back.sub(&g0).max_abs() < 1e-8);
    }
}
