//! Evolution of the interface pair `(f, θ)`: the right-hand side of the
//! `θ` equation with its nonlocal corrections, the stability functional
//! `Λ`, the principal symbol, the energy `E_s`, and the exact linear
//! spectrum about a flat interface.

use num_complex::Complex64;

use crate::divcurl::SideFields;
use crate::dn_ops::DnOperators;
use crate::error::{Error, Result};
use crate::geometry::{BulkScalar, Side, StripGeometry};
use crate::spectral::{fourier_multiplier, project_mean_zero, HorizontalGrid, InterfaceField, MultiplierKind};

/// `m[i][j]` is the entry `F_ij`, i.e. component `i` of column `j`.
pub type Mat3 = [[f64; 3]; 3];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    TwoFluid,
    OneFluid,
}

impl Mode {
    /// Sides that carry fluid.
    pub fn sides(self) -> &'static [Side] {
        match self {
            Mode::TwoFluid => &Side::BOTH,
            Mode::OneFluid => &[Side::Minus],
        }
    }
}

#[derive(Clone, Debug)]
pub struct InterfaceState {
    pub f: InterfaceField,
    pub theta: InterfaceField,
}

/// Interface traces of one side: velocity, deformation and the normal
/// derivative of the combined pressure `q = p_{u,u} − Σ_j p_{F_j,F_j}`.
#[derive(Clone, Debug)]
pub struct SideTraces {
    pub velocity: [InterfaceField; 3],
    /// `deformation[i][j] = F_ij`
    pub deformation: [[InterfaceField; 3]; 3],
    pub pressure_flux: InterfaceField,
}

impl SideTraces {
    pub fn from_fields(geom: &StripGeometry, fields: &SideFields, q: Option<&BulkScalar>) -> Self {
        let velocity = fields.velocity.interface_trace();
        let cols: Vec<[InterfaceField; 3]> = fields.deformation.iter().map(|c| c.interface_trace()).collect();
        let deformation = std::array::from_fn(|i| std::array::from_fn(|j| cols[j][i].clone()));
        let pressure_flux = match q {
            Some(q) => geom.interface_flux(&q.values),
            None => InterfaceField::zeros(geom.grid().horizontal()),
        };
        Self {
            velocity,
            deformation,
            pressure_flux,
        }
    }

    /// Constant traces (flat-state tests and examples).
    pub fn constant(grid: &std::sync::Arc<HorizontalGrid>, u: [f64; 3], f: Mat3) -> Self {
        Self {
            velocity: u.map(|c| InterfaceField::constant(grid, c)),
            deformation: f.map(|row| row.map(|c| InterfaceField::constant(grid, c))),
            pressure_flux: InterfaceField::zeros(grid),
        }
    }

    pub fn at(&self, p: usize) -> ([f64; 3], Mat3) {
        let u = std::array::from_fn(|a| self.velocity[a].values()[p]);
        let f = std::array::from_fn(|i| std::array::from_fn(|j| self.deformation[i][j].values()[p]));
        (u, f)
    }

    pub fn deformation_at(&self, p: usize) -> Mat3 {
        self.at(p).1
    }
}

/// Per-side pieces of the normal-velocity balance.
#[derive(Clone, Debug)]
pub struct SideTerms {
    /// `Σ_i u_i ∂_i θ`
    pub transport: InterfaceField,
    /// `Σ_{s,r} (u_s u_r − Σ_j F_sj F_rj) ∂_s ∂_r f`
    pub curvature: InterfaceField,
    /// `N·∇q`
    pub pressure: InterfaceField,
}

impl SideTerms {
    /// `g = 2·transport + curvature + pressure`
    pub fn balance(&self) -> InterfaceField {
        let mut g = self.transport.scale(2.0);
        g.axpy(1.0, &self.curvature);
        g.axpy(1.0, &self.pressure);
        g
    }
}

pub fn side_terms(f: &InterfaceField, theta: &InterfaceField, tr: &SideTraces) -> SideTerms {
    let grid = f.grid();
    let d = grid.dim();
    let mut transport = InterfaceField::zeros(grid);
    for i in 0..d {
        transport.axpy(1.0, &tr.velocity[i].mul_dealiased(&theta.derivative(i)));
    }
    let mut curvature = InterfaceField::zeros(grid);
    for s in 0..d {
        for r in 0..d {
            let mut x = tr.velocity[s].mul_dealiased(&tr.velocity[r]);
            for j in 0..3 {
                x.axpy(-1.0, &tr.deformation[s][j].mul_dealiased(&tr.deformation[r][j]));
            }
            curvature.axpy(1.0, &x.mul_dealiased(&f.second_derivative(s, r)));
        }
    }
    SideTerms {
        transport,
        curvature,
        pressure: tr.pressure_flux.clone(),
    }
}

/// Result of evaluating the `θ` equation.
#[derive(Clone, Debug)]
pub struct ThetaRate {
    /// `∂_t θ`
    pub rate: InterfaceField,
    /// Local transport and curvature part.
    pub principal: InterfaceField,
    /// Remaining inhomogeneity (pressure and nonlocal corrections).
    pub frak: InterfaceField,
    /// Mean-zero interface pressure (zero in one-fluid mode).
    pub p_bar: InterfaceField,
    pub terms: Vec<SideTerms>,
}

/// Right-hand side of the `θ` equation. `traces` holds the plus and minus
/// sides in two-fluid mode and only the minus side in one-fluid mode.
pub fn theta_rhs(
    ops: Option<&DnOperators>,
    state: &InterfaceState,
    traces: &[SideTraces],
    rho: [f64; 2],
    mode: Mode,
) -> Result<ThetaRate> {
    let f = &state.f;
    let theta = &state.theta;
    let grid = f.grid();
    match mode {
        Mode::OneFluid => {
            let t = side_terms(
                f,
                theta,
                traces.last().ok_or_else(|| Error::Config("missing traces".into()))?,
            );
            let mut principal = t.transport.scale(-2.0);
            principal.axpy(-1.0, &t.curvature);
            let frak = t.pressure.scale(-1.0);
            Ok(ThetaRate {
                rate: principal.add(&frak),
                principal,
                frak,
                p_bar: InterfaceField::zeros(grid),
                terms: vec![t],
            })
        }
        Mode::TwoFluid => {
            let ops = ops.ok_or_else(|| Error::Config("two-fluid mode needs DN operators".into()))?;
            if traces.len() != 2 {
                return Err(Error::Config("two-fluid mode needs traces on both sides".into()));
            }
            let tp = side_terms(f, theta, &traces[0]);
            let tm = side_terms(f, theta, &traces[1]);
            let rsum = rho[0] + rho[1];
            let (wp, wm) = (rho[0] / rsum, rho[1] / rsum);
            let mut principal = tp.transport.scale(-2.0 * wp);
            principal.axpy(-2.0 * wm, &tm.transport);
            principal.axpy(-wp, &tp.curvature);
            principal.axpy(-wm, &tm.curvature);
            let p_bar = crate::dn_ops::interface_pressure(ops, &tp.balance(), &tm.balance())?;
            let mut frak = tp.pressure.scale(-wp);
            frak.axpy(-wm, &tm.pressure);
            if p_bar.max_abs() > 0.0 {
                frak.axpy(1.0 / rsum, &ops.difference(&p_bar)?);
            }
            Ok(ThetaRate {
                rate: principal.add(&frak),
                principal,
                frak,
                p_bar,
                terms: vec![tp, tm],
            })
        }
    }
}

/// The four pieces of the inhomogeneity, each with its own inversion:
/// curvature jump, transport jump, pressure average and pressure jump.
pub fn g_frak(
    ops: &DnOperators,
    state: &InterfaceState,
    traces: &[SideTraces],
    rho: [f64; 2],
) -> Result<[InterfaceField; 4]> {
    let f = &state.f;
    let tp = side_terms(f, &state.theta, &traces[0]);
    let tm = side_terms(f, &state.theta, &traces[1]);
    let rsum = rho[0] + rho[1];
    let nonlocal = |jump: InterfaceField, c: f64| -> Result<InterfaceField> {
        let pj = project_mean_zero(&jump);
        if pj.max_abs() == 0.0 {
            return Ok(InterfaceField::zeros(f.grid()));
        }
        let inv = ops.invert(&pj, crate::dn_ops::DEFAULT_INVERT_TOL)?;
        Ok(ops.difference(&inv)?.scale(c / rsum))
    };
    let g1 = nonlocal(tp.curvature.sub(&tm.curvature), 1.0)?;
    let g2 = nonlocal(tp.transport.sub(&tm.transport), 2.0)?;
    let mut g3 = tp.pressure.scale(-rho[0] / rsum);
    g3.axpy(-rho[1] / rsum, &tm.pressure);
    let g4 = nonlocal(tp.pressure.sub(&tm.pressure), 1.0)?;
    Ok([g1, g2, g3, g4])
}

/// `θ_t` from the plus side alone: `N⁺ p̄ / ρ⁺ − g⁺`.
pub fn theta_rate_plus_side(
    ops: &DnOperators,
    p_bar: &InterfaceField,
    plus: &SideTerms,
    rho_plus: f64,
) -> Result<InterfaceField> {
    let mut out = ops.apply(Side::Plus, p_bar)?.scale(1.0 / rho_plus);
    out.axpy(-1.0, &plus.balance());
    Ok(out)
}

/// Density-weighted mean `w` and scaled jump `v` of the tangential traces.
pub fn weighted_velocities(
    u_plus: &[InterfaceField],
    u_minus: &[InterfaceField],
    rho_plus: f64,
    rho_minus: f64,
) -> (Vec<InterfaceField>, Vec<InterfaceField>) {
    let rsum = rho_plus + rho_minus;
    let vs = (rho_plus * rho_minus).sqrt() / rsum;
    let w = u_plus
        .iter()
        .zip(u_minus)
        .map(|(a, b)| a.zip_map(b, |x, y| (rho_plus * x + rho_minus * y) / rsum))
        .collect();
    let v = u_plus
        .iter()
        .zip(u_minus)
        .map(|(a, b)| a.zip_map(b, |x, y| vs * (x - y)))
        .collect();
    (w, v)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityMode {
    TwoFluid,
    OneFluid,
    /// Single tangential direction (`d = 1`).
    Reduced,
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct StabilityReport {
    pub lambda: f64,
    pub argmin_point: usize,
    pub argmin_x: [f64; 2],
    pub argmin_phi: [f64; 2],
    pub hyperbolic: bool,
}

/// Quadratic-form matrix of the stability condition at one point:
/// `Σ_j (ρ±/ρ) a±_j a±_jᵀ − v vᵀ` with `a_j = (F_1j, F_2j)`. In one-fluid
/// mode only `f_minus` is used, with unit weight and no slip.
pub fn stability_matrix(f_plus: &Mat3, f_minus: &Mat3, v: [f64; 2], rho: [f64; 2], one_fluid: bool) -> [[f64; 2]; 2] {
    let mut q = [[0.0; 2]; 2];
    let (wp, wm, v) = if one_fluid {
        (0.0, 1.0, [0.0, 0.0])
    } else {
        let rsum = rho[0] + rho[1];
        (rho[0] / rsum, rho[1] / rsum, v)
    };
    for a in 0..2 {
        for b in 0..2 {
            let mut s = -v[a] * v[b];
            for j in 0..3 {
                s += wp * f_plus[a][j] * f_plus[b][j] + wm * f_minus[a][j] * f_minus[b][j];
            }
            q[a][b] = s;
        }
    }
    q
}

/// Smallest eigenvalue of a symmetric 2×2 matrix and a unit eigenvector.
pub fn min_eigen_2x2(q: [[f64; 2]; 2]) -> (f64, [f64; 2]) {
    let (p, c, r) = (q[0][0], 0.5 * (q[0][1] + q[1][0]), q[1][1]);
    let mean = 0.5 * (p + r);
    let rad = (0.25 * (p - r) * (p - r) + c * c).sqrt();
    let lam = mean - rad;
    // eigenvector of the smaller eigenvalue
    let v = if c.abs() > 1e-300 {
        [lam - r, c]
    } else if p <= r {
        [1.0, 0.0]
    } else {
        [0.0, 1.0]
    };
    let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
    (lam, [v[0] / n, v[1] / n])
}

/// `Λ` over all grid points and tangential directions.
pub fn stability_lambda(
    grid: &HorizontalGrid,
    f_plus: &[Mat3],
    f_minus: &[Mat3],
    v: &[[f64; 2]],
    rho: [f64; 2],
    c0: f64,
    mode: StabilityMode,
) -> StabilityReport {
    let mut best = StabilityReport {
        lambda: f64::INFINITY,
        argmin_point: 0,
        argmin_x: [0.0; 2],
        argmin_phi: [1.0, 0.0],
        hyperbolic: false,
    };
    let zero: Mat3 = [[0.0; 3]; 3];
    for p in 0..f_minus.len() {
        let fp = f_plus.get(p).unwrap_or(&zero);
        let vp = v.get(p).copied().unwrap_or([0.0; 2]);
        let one = mode == StabilityMode::OneFluid;
        let q = stability_matrix(fp, &f_minus[p], vp, rho, one);
        let (lam, phi) = if mode == StabilityMode::Reduced || grid.dim() == 1 {
            (q[0][0], [1.0, 0.0])
        } else {
            min_eigen_2x2(q)
        };
        if lam < best.lambda {
            best.lambda = lam;
            best.argmin_point = p;
            best.argmin_x = grid.point(p);
            best.argmin_phi = phi;
        }
    }
    best.hyperbolic = best.lambda >= c0;
    best
}

/// Pointwise inputs of `Λ` from traces of both sides.
pub fn stability_inputs(traces: &[SideTraces], rho: [f64; 2], mode: Mode) -> (Vec<Mat3>, Vec<Mat3>, Vec<[f64; 2]>) {
    let minus = traces.last().expect("at least one side");
    let npts = minus.velocity[0].values().len();
    let fm: Vec<Mat3> = (0..npts).map(|p| minus.deformation_at(p)).collect();
    match mode {
        Mode::OneFluid => (vec![[[0.0; 3]; 3]; npts], fm, vec![[0.0; 2]; npts]),
        Mode::TwoFluid => {
            let plus = &traces[0];
            let fp = (0..npts).map(|p| plus.deformation_at(p)).collect();
            let (_, v) = weighted_velocities(&plus.velocity[..2], &minus.velocity[..2], rho[0], rho[1]);
            let vv = (0..npts).map(|p| [v[0].values()[p], v[1].values()[p]]).collect();
            (fp, fm, vv)
        }
    }
}

/// `(v·ξ)² − [(ρ⁺/ρ) Σ_j (F⁺_ij ξ_i)² + (ρ⁻/ρ) Σ_j (F⁻_ij ξ_i)²]`.
pub fn principal_symbol(xi: [f64; 2], f_plus: &Mat3, f_minus: &Mat3, v: [f64; 2], rho: [f64; 2]) -> f64 {
    let rsum = rho[0] + rho[1];
    let vx = v[0] * xi[0] + v[1] * xi[1];
    let mut el = 0.0;
    for j in 0..3 {
        let ap = f_plus[0][j] * xi[0] + f_plus[1][j] * xi[1];
        let am = f_minus[0][j] * xi[0] + f_minus[1][j] * xi[1];
        el += rho[0] / rsum * ap * ap + rho[1] / rsum * am * am;
    }
    vx * vx - el
}

/// Constant traces about a flat interface at height `offset`.
#[derive(Clone, Copy, Debug)]
pub struct FlatEquilibrium {
    pub u_plus: [f64; 2],
    pub u_minus: [f64; 2],
    pub f_plus: Mat3,
    pub f_minus: Mat3,
    pub rho: [f64; 2],
    pub offset: f64,
    pub mode: Mode,
}

fn kxk(f: &Mat3, u: [f64; 2], k: [f64; 2]) -> f64 {
    let uk = u[0] * k[0] + u[1] * k[1];
    let mut s = uk * uk;
    for j in 0..3 {
        let a = f[0][j] * k[0] + f[1][j] * k[1];
        s -= a * a;
    }
    s
}

/// The 2×2 linear system for `(f̂, θ̂)` of mode `k`: returns `(α, β)` with
/// `d/dt (f̂, θ̂) = [[0, 1], [β, α]] (f̂, θ̂)`.
pub fn flat_mode_coefficients(eq: &FlatEquilibrium, k: [f64; 2]) -> (Complex64, Complex64) {
    let i = Complex64::new(0.0, 1.0);
    let kk = (k[0] * k[0] + k[1] * k[1]).sqrt();
    match eq.mode {
        Mode::OneFluid => {
            let uk = eq.u_minus[0] * k[0] + eq.u_minus[1] * k[1];
            (-2.0 * i * uk, Complex64::new(kxk(&eq.f_minus, eq.u_minus, k), 0.0))
        }
        Mode::TwoFluid => {
            let (rp, rm) = (eq.rho[0], eq.rho[1]);
            let rsum = rp + rm;
            let np = kk * (kk * (1.0 - eq.offset)).tanh();
            let nm = kk * (kk * (1.0 + eq.offset)).tanh();
            let diff = np - nm;
            let tilde = np / rp + nm / rm;
            let ratio = if kk == 0.0 { 0.0 } else { diff / tilde };
            let upk = eq.u_plus[0] * k[0] + eq.u_plus[1] * k[1];
            let umk = eq.u_minus[0] * k[0] + eq.u_minus[1] * k[1];
            let alpha = -2.0 * i * (rp * upk + rm * umk) / rsum + 2.0 * i * ratio * (upk - umk) / rsum;
            let xp = kxk(&eq.f_plus, eq.u_plus, k);
            let xm = kxk(&eq.f_minus, eq.u_minus, k);
            let beta = (rp * xp + rm * xm) / rsum - ratio * (xp - xm) / rsum;
            (alpha, Complex64::new(beta, 0.0))
        }
    }
}

/// Eigenvalues of the per-mode linear system for each wavevector.
pub fn flat_state_spectrum(eq: &FlatEquilibrium, ks: &[[f64; 2]]) -> Vec<[Complex64; 2]> {
    ks.iter()
        .map(|&k| {
            let (a, b) = flat_mode_coefficients(eq, k);
            // λ² − α λ − β = 0
            let disc = (a * a + 4.0 * b).sqrt();
            [(a + disc) / 2.0, (a - disc) / 2.0]
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct EnergyReport {
    pub total: f64,
    pub transport: f64,
    pub slip: f64,
    pub elastic_plus: f64,
    pub elastic_minus: f64,
    /// `(E_s + ‖θ‖² + ‖f‖²) / (‖θ‖²_{H^{s−1/2}} + ‖f‖²_{H^{s+1/2}})`
    pub coercivity: f64,
}

/// Energy functional `E_s` with `∂_t f` replaced by `θ`. `w`, `v` are the
/// weighted velocities (`d` fields each); in one-fluid mode pass the fluid
/// velocity as `w`, zero `v`, and weights `rho = [0, 1]`.
pub fn energy_es(
    f: &InterfaceField,
    theta: &InterfaceField,
    w: &[InterfaceField],
    v: &[InterfaceField],
    def_plus: Option<&[[InterfaceField; 3]; 3]>,
    def_minus: &[[InterfaceField; 3]; 3],
    rho: [f64; 2],
    s: f64,
) -> Result<EnergyReport> {
    let grid = f.grid();
    let d = grid.dim();
    let sig = s - 0.5;
    let a = fourier_multiplier(f, sig, MultiplierKind::Bessel)?;
    let b = fourier_multiplier(theta, sig, MultiplierKind::Bessel)?;
    let da: Vec<InterfaceField> = (0..d).map(|i| a.derivative(i)).collect();
    let mut first = b.clone();
    let mut slipf = InterfaceField::zeros(grid);
    for i in 0..d {
        first.axpy(1.0, &w[i].mul(&da[i]));
        slipf.axpy(1.0, &v[i].mul(&da[i]));
    }
    let rsum = rho[0] + rho[1];
    let elastic = |def: &[[InterfaceField; 3]; 3], weight: f64| -> f64 {
        let mut e = 0.0;
        for j in 0..3 {
            let mut t = InterfaceField::zeros(grid);
            for i in 0..d {
                t.axpy(1.0, &def[i][j].mul(&da[i]));
            }
            e += t.inner(&t);
        }
        weight * e
    };
    let transport = first.inner(&first);
    let slip = slipf.inner(&slipf);
    let elastic_plus = def_plus.map(|dp| elastic(dp, rho[0] / rsum)).unwrap_or(0.0);
    let elastic_minus = elastic(def_minus, rho[1] / rsum);
    let total = transport - slip + elastic_plus + elastic_minus;
    let denom = theta.sobolev_norm(sig).powi(2) + f.sobolev_norm(s + 0.5).powi(2);
    let num = total + theta.inner(theta) + f.inner(f);
    Ok(EnergyReport {
        total,
        transport,
        slip,
        elastic_plus,
        elastic_minus,
        coercivity: if denom > 0.0 { num / denom } else { f64::NAN },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chebyshev::Chebyshev;
    use crate::geometry::StripGrid;
    use std::f64::consts::PI;
    use std::sync::Arc;

    const ID: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

    #[test]
    fn weighted_velocity_examples() {
        let g = HorizontalGrid::new(1, 16).unwrap();
        let u = InterfaceField::constant(&g, 0.7);
        let (w, v) = weighted_velocities(std::slice::from_ref(&u), std::slice::from_ref(&u), 1.0, 3.0);
        assert!(v[0].max_abs() == 0.0 && (w[0].values()[0] - 0.7).abs() < 1e-15);
        let up = InterfaceField::constant(&g, 0.4);
        let (w, v) = weighted_velocities(std::slice::from_ref(&up), &[up.scale(-1.0)], 1.0, 1.0);
        assert!(w[0].max_abs() < 1e-16 && (v[0].values()[3] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn lambda_worked_examples() {
        let g = HorizontalGrid::new(2, 8).unwrap();
        let n = g.npts();
        let fs = vec![ID; n];
        let r = stability_lambda(
            &g,
            &fs,
            &fs,
            &vec![[0.0; 2]; n],
            [1.0, 1.0],
            0.1,
            StabilityMode::TwoFluid,
        );
        assert_eq!(r.lambda, 1.0);
        assert!(r.hyperbolic);
        let a = 0.6;
        let r = stability_lambda(
            &g,
            &fs,
            &fs,
            &vec![[a, 0.0]; n],
            [1.0, 1.0],
            0.1,
            StabilityMode::TwoFluid,
        );
        assert!((r.lambda - (1.0 - a * a)).abs() < 1e-15);
        assert!((r.argmin_phi[0].abs() - 1.0).abs() < 1e-15);
        let row: Mat3 = [[1.0, 0.0, 0.0], [0.0; 3], [0.0; 3]];
        let r = stability_lambda(
            &g,
            &vec![row; n],
            &vec![row; n],
            &vec![[0.0; 2]; n],
            [1.0, 1.0],
            0.1,
            StabilityMode::TwoFluid,
        );
        assert_eq!(r.lambda, 0.0);
        assert!((r.argmin_phi[1].abs() - 1.0).abs() < 1e-15);
        assert!(!r.hyperbolic);
        let r = stability_lambda(&g, &[], &vec![row; n], &[], [0.0, 1.0], 0.1, StabilityMode::OneFluid);
        assert_eq!(r.lambda, 0.0);
    }

    #[test]
    fn symbol_examples() {
        assert_eq!(principal_symbol([1.0, 0.0], &ID, &ID, [0.0; 2], [1.0, 1.0]), -1.0);
        let z = [[0.0; 3]; 3];
        assert!((principal_symbol([1.0, 0.0], &z, &z, [0.3, 0.0], [1.0, 1.0]) - 0.09).abs() < 1e-16);
    }

    #[test]
    fn spectrum_examples() {
        let z = [[0.0; 3]; 3];
        let quiet = FlatEquilibrium {
            u_plus: [0.0; 2],
            u_minus: [0.0; 2],
            f_plus: z,
            f_minus: z,
            rho: [1.0, 1.0],
            offset: 0.0,
            mode: Mode::TwoFluid,
        };
        let l = flat_state_spectrum(&quiet, &[[3.0, 0.0]]);
        assert!(l[0][0].norm() == 0.0 && l[0][1].norm() == 0.0);
        let kh = FlatEquilibrium {
            u_plus: [0.5, 0.0],
            u_minus: [-0.5, 0.0],
            ..quiet
        };
        let l = flat_state_spectrum(&kh, &[[4.0, 0.0]]);
        assert!((l[0][0].re - 2.0).abs() < 1e-14);
        let mut st = kh;
        st.f_plus[0][0] = 1.0;
        st.f_minus[0][0] = 1.0;
        let l = flat_state_spectrum(&st, &[[4.0, 0.0]]);
        assert!(l[0][0].re.abs() < 1e-14);
        assert!((l[0][0].im.abs() - 4.0 * (1.0f64 - 0.25).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn energy_single_mode() {
        let g = HorizontalGrid::new(1, 32).unwrap();
        let f = InterfaceField::from_fn(&g, |x| x[0].cos());
        let zero = InterfaceField::zeros(&g);
        let one = InterfaceField::constant(&g, 1.0);
        let def: [[InterfaceField; 3]; 3] =
            std::array::from_fn(|i| std::array::from_fn(|j| if i == j { one.clone() } else { zero.clone() }));
        let e = energy_es(
            &f,
            &zero,
            std::slice::from_ref(&zero),
            std::slice::from_ref(&zero),
            Some(&def),
            &def,
            [1.0, 1.0],
            3.0,
        )
        .unwrap();
        // ‖∂1 ⟨∇⟩^{5/2} cos x1‖² = 2^{5/2} π
        assert!((e.total - 2f64.powf(2.5) * PI).abs() < 1e-11);
        let e0 = energy_es(
            &zero,
            &zero,
            std::slice::from_ref(&zero),
            std::slice::from_ref(&zero),
            Some(&def),
            &def,
            [1.0, 1.0],
            3.0,
        )
        .unwrap();
        assert_eq!(e0.total, 0.0);
    }

    #[test]
    fn quiescent_and_transport_rates() {
        let h = HorizontalGrid::new(1, 32).unwrap();
        let sg = StripGrid::new(h.clone(), Arc::new(Chebyshev::new(16).unwrap()), Side::Plus).unwrap();
        let flat = InterfaceField::zeros(&h);
        let ops = DnOperators::new(&flat, &sg, 1.0, 1.0).unwrap();
        let z = [[0.0; 3]; 3];
        let quiet = [
            SideTraces::constant(&h, [0.0; 3], z),
            SideTraces::constant(&h, [0.0; 3], z),
        ];
        let st = InterfaceState {
            f: flat.clone(),
            theta: flat.clone(),
        };
        let r = theta_rhs(Some(&ops), &st, &quiet, [1.0, 1.0], Mode::TwoFluid).unwrap();
        assert_eq!(r.rate.max_abs(), 0.0);

        let u = 0.3;
        let tr = [
            SideTraces::constant(&h, [u, 0.0, 0.0], z),
            SideTraces::constant(&h, [u, 0.0, 0.0], z),
        ];
        let st = InterfaceState {
            f: flat.clone(),
            theta: InterfaceField::from_fn(&h, |x| x[0].cos()),
        };
        let r = theta_rhs(Some(&ops), &st, &tr, [1.0, 1.0], Mode::TwoFluid).unwrap();
        for p in 0..h.npts() {
            assert!((r.rate.values()[p] - 2.0 * u * h.point(p)[0].sin()).abs() < 1e-12);
        }
        let parts = g_frak(&ops, &st, &tr, [1.0, 1.0]).unwrap();
        assert!(parts[0].max_abs() < 1e-14 && parts[1].max_abs() < 1e-14);
    }
}
