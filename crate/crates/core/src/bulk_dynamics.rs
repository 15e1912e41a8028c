//! Transport of vorticity `ω` and deformation curls `G_j = curl F_j`, the
//! evolution of the lid integrals `β`, `γ`, and the conserved lid
//! integrals of `ω₃`, `G_{3j}`.

use crate::geometry::{BulkVector, StripGeometry};
use crate::spectral::InterfaceField;

type Jac = [[Vec<f64>; 3]; 3];

#[derive(Clone, Debug)]
pub struct BulkRates {
    pub vorticity: BulkVector,
    pub deformation_curl: [BulkVector; 3],
}

/// `out_c += coef Σ_b a_b ∂_b v_c` where `jv[c][b] = ∂_b v_c`.
fn add_directional(out: &mut [Vec<f64>; 3], coef: f64, a: &BulkVector, jv: &Jac) {
    for c in 0..3 {
        for b in 0..3 {
            let (ab, dv) = (&a.comps[b], &jv[c][b]);
            for (o, (x, y)) in out[c].iter_mut().zip(ab.iter().zip(dv)) {
                *o += coef * x * y;
            }
        }
    }
}

fn finish(geom: &StripGeometry, comps: [Vec<f64>; 3]) -> BulkVector {
    let h = geom.grid().horizontal();
    BulkVector {
        grid: geom.grid().clone(),
        comps: comps.map(|c| h.dealias(&c)),
    }
}

/// Eulerian rates
/// `∂_t ω = −u·∇ω + Σ_j F_j·∇G_j + ω·∇u − Σ_j G_j·∇F_j` and
/// `∂_t G_j = −u·∇G_j + F_j·∇ω + G_j·∇u − ω·∇F_j − 2 Σ_i ∇u_i × ∇F_ij`,
/// filtered to the 2/3 band.
pub fn vorticity_rhs(
    geom: &StripGeometry,
    u: &BulkVector,
    f: &[BulkVector; 3],
    omega: &BulkVector,
    g: &[BulkVector; 3],
) -> BulkRates {
    let len = geom.grid().len();
    let zero = || -> [Vec<f64>; 3] { std::array::from_fn(|_| vec![0.0; len]) };
    let ju = geom.jacobian(u);
    let jo = geom.jacobian(omega);
    let jf: Vec<Jac> = f.iter().map(|c| geom.jacobian(c)).collect();
    let jg: Vec<Jac> = g.iter().map(|c| geom.jacobian(c)).collect();

    let mut dw = zero();
    add_directional(&mut dw, -1.0, u, &jo);
    add_directional(&mut dw, 1.0, omega, &ju);
    for j in 0..3 {
        add_directional(&mut dw, 1.0, &f[j], &jg[j]);
        add_directional(&mut dw, -1.0, &g[j], &jf[j]);
    }

    let dg: [BulkVector; 3] = std::array::from_fn(|j| {
        let mut out = zero();
        add_directional(&mut out, -1.0, u, &jg[j]);
        add_directional(&mut out, 1.0, &f[j], &jo);
        add_directional(&mut out, 1.0, &g[j], &ju);
        add_directional(&mut out, -1.0, omega, &jf[j]);
        // −2 Σ_i ∇u_i × ∇F_ij
        for i in 0..3 {
            let (du, df) = (&ju[i], &jf[j][i]);
            for c in 0..3 {
                let (k, l) = ((c + 1) % 3, (c + 2) % 3);
                for p in 0..len {
                    out[c][p] -= 2.0 * (du[k][p] * df[l][p] - du[l][p] * df[k][p]);
                }
            }
        }
        finish(geom, out)
    });
    BulkRates {
        vorticity: finish(geom, dw),
        deformation_curl: dg,
    }
}

/// Extra rate of a field sampled at fixed flattened coordinates when the
/// interface moves with `f_t`: `(1 − ζ) f_t ∂₃ v`.
pub fn grid_motion_term(geom: &StripGeometry, f_t: &InterfaceField, v: &BulkVector) -> BulkVector {
    let grid = geom.grid();
    let np = grid.npts();
    let z = grid.vertical().nodes();
    let h = geom.depth();
    let ft = f_t.values();
    let comps = std::array::from_fn(|a| {
        let mut dz = geom.d_zeta(&v.comps[a]);
        for (j, zj) in z.iter().enumerate() {
            for p in 0..np {
                dz[j * np + p] *= (1.0 - zj) * ft[p] / h[p];
            }
        }
        dz
    });
    BulkVector {
        grid: grid.clone(),
        comps,
    }
}

impl BulkRates {
    /// Adds the grid-motion correction to every field.
    pub fn add_grid_motion(
        &mut self,
        geom: &StripGeometry,
        f_t: &InterfaceField,
        omega: &BulkVector,
        g: &[BulkVector; 3],
    ) {
        self.vorticity.axpy(1.0, &grid_motion_term(geom, f_t, omega));
        for j in 0..3 {
            self.deformation_curl[j].axpy(1.0, &grid_motion_term(geom, f_t, &g[j]));
        }
    }
}

/// Rates of the lid integrals from lid traces (`lid_f[i][j] = F_ij`):
/// `∂_t β_i = −∫(u_s ∂_s u_i − Σ_j F_sj ∂_s F_ij)` and
/// `∂_t γ_ij = −∫(u_s ∂_s F_ij − F_sj ∂_s u_i)`.
pub fn beta_gamma_rhs(lid_u: &[InterfaceField; 3], lid_f: &[[InterfaceField; 3]; 3]) -> ([f64; 2], [[f64; 3]; 2]) {
    let d = lid_u[0].grid().dim();
    let mut db = [0.0; 2];
    let mut dg = [[0.0; 3]; 2];
    for i in 0..2 {
        let du: Vec<InterfaceField> = (0..d).map(|s| lid_u[i].derivative(s)).collect();
        let mut acc = 0.0;
        for s in 0..d {
            acc += lid_u[s].inner(&du[s]);
            for j in 0..3 {
                acc -= lid_f[s][j].inner(&lid_f[i][j].derivative(s));
            }
        }
        db[i] = -acc;
        for j in 0..3 {
            let mut acc = 0.0;
            for s in 0..d {
                acc += lid_u[s].inner(&lid_f[i][j].derivative(s));
                acc -= lid_f[s][j].inner(&du[s]);
            }
            dg[i][j] = -acc;
        }
    }
    (db, dg)
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct LidInvariants {
    pub vorticity: f64,
    pub deformation_curl: [f64; 3],
}

/// `∫_lid ω₃` and `∫_lid G_{3j}`.
pub fn lid_invariants(omega: &BulkVector, g: &[BulkVector; 3]) -> LidInvariants {
    let third = |v: &BulkVector| v.lid_trace()[2].integral();
    LidInvariants {
        vorticity: third(omega),
        deformation_curl: std::array::from_fn(|j| third(&g[j])),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chebyshev::Chebyshev;
    use crate::geometry::{Side, StripGrid};
    use crate::spectral::HorizontalGrid;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn flat(n: usize, m: usize) -> StripGeometry {
        let g = StripGrid::new(
            HorizontalGrid::new(1, n).unwrap(),
            Arc::new(Chebyshev::new(m).unwrap()),
            Side::Plus,
        )
        .unwrap();
        StripGeometry::new(&InterfaceField::zeros(g.horizontal()), &g).unwrap()
    }

    fn directional(geom: &StripGeometry, a: &BulkVector, v: &BulkVector) -> BulkVector {
        let mut out: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; geom.grid().len()]);
        add_directional(&mut out, 1.0, a, &geom.jacobian(v));
        BulkVector {
            grid: geom.grid().clone(),
            comps: out,
        }
    }

    #[test]
    fn constant_fields_have_zero_rates() {
        let geo = flat(16, 10);
        let u = BulkVector::constant(geo.grid(), [0.3, -0.2, 0.0]);
        let f = [0, 1, 2].map(|j| {
            let mut c = [0.0; 3];
            c[j] = 1.0;
            BulkVector::constant(geo.grid(), c)
        });
        let z = BulkVector::zeros(geo.grid());
        let r = vorticity_rhs(&geo, &u, &f, &z, &[z.clone(), z.clone(), z.clone()]);
        assert!(r.vorticity.max_abs() < 1e-13);
        assert!(r.deformation_curl.iter().all(|g| g.max_abs() < 1e-13));
    }

    #[test]
    fn matches_curl_of_primitive_equations() {
        // divergence-free fields from stream functions plus an out-of-plane part
        let geo = flat(32, 16);
        let u = BulkVector::from_fn(&geo, |[x, _, z]| {
            [
                x.sin() * (2.0 * z - 3.0 * z * z),
                0.4 * x.cos() * z,
                -x.cos() * (z * z - z.powi(3)),
            ]
        });
        let f: [BulkVector; 3] = [
            BulkVector::from_fn(&geo, |[x, _, z]| {
                [
                    1.0 + 0.2 * (2.0 * x).cos() * z,
                    0.1 * z * z,
                    0.2 * (2.0 * x).sin() * z * z,
                ]
            }),
            BulkVector::from_fn(&geo, |[x, _, z]| [0.0, 1.0 + 0.1 * x.sin() * z, 0.0]),
            BulkVector::from_fn(&geo, |[x, _, z]| [0.3 * z, 0.05 * x.cos(), 1.0]),
        ];
        for c in f.iter().chain(std::iter::once(&u)) {
            assert!(geo.divergence(c).iter().all(|v| v.abs() < 1e-10));
        }
        let omega = geo.curl(&u);
        let g: [BulkVector; 3] = std::array::from_fn(|j| geo.curl(&f[j]));
        let r = vorticity_rhs(&geo, &u, &f, &omega, &g);

        // ∂_t u = −u·∇u + Σ F_j·∇F_j (pressure drops out under curl)
        let mut ut = directional(&geo, &u, &u).scale(-1.0);
        for c in &f {
            ut.axpy(1.0, &directional(&geo, c, c));
        }
        let want = geo.curl(&ut);
        assert!(
            r.vorticity.sub(&want).max_abs() < 1e-8,
            "{}",
            r.vorticity.sub(&want).max_abs()
        );
        for j in 0..3 {
            // ∂_t F_j = F_j·∇u − u·∇F_j
            let ft = directional(&geo, &f[j], &u).sub(&directional(&geo, &u, &f[j]));
            let want = geo.curl(&ft);
            assert!(r.deformation_curl[j].sub(&want).max_abs() < 1e-8);
        }
    }

    #[test]
    fn cross_term_by_hand() {
        // u = (x3, 0, 0), F_1 = (sin x1, 0, −x3 cos x1): ω = e2,
        // G_1 = −x3 sin x1 e2, and ∂_t G_1 = (x3² − 2) cos x1 e2 where the
        // −2 cos x1 comes from −2 ∇u_1 × ∇F_11 = −2 e3 × (cos x1 e1).
        let geo = flat(16, 10);
        let u = BulkVector::from_fn(&geo, |[_, _, z]| [z, 0.0, 0.0]);
        let f1 = BulkVector::from_fn(&geo, |[x, _, z]| [x.sin(), 0.0, -z * x.cos()]);
        let z = BulkVector::zeros(geo.grid());
        let f = [f1.clone(), z.clone(), z.clone()];
        let g = [geo.curl(&f1), z.clone(), z.clone()];
        let r = vorticity_rhs(&geo, &u, &f, &geo.curl(&u), &g);
        let want = BulkVector::from_fn(&geo, |[x, _, z]| [0.0, (z * z - 2.0) * x.cos(), 0.0]);
        assert!(r.deformation_curl[0].sub(&want).max_abs() < 1e-10);
    }

    #[test]
    fn lid_integral_rates() {
        let h = HorizontalGrid::new(1, 32).unwrap();
        let zero = InterfaceField::zeros(&h);
        let s1 = InterfaceField::from_fn(&h, |x| x[0].sin());
        let c1 = InterfaceField::from_fn(&h, |x| x[0].cos());
        let mut fz: [[InterfaceField; 3]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| zero.clone()));
        let u = [s1.clone(), zero.clone(), zero.clone()];
        let (db, dg) = beta_gamma_rhs(&u, &fz);
        assert!(db[0].abs() < 1e-13 && dg[0][0].abs() < 1e-13);
        fz[0][0] = c1;
        let (_, dg) = beta_gamma_rhs(&u, &fz);
        assert!((dg[0][0] - 2.0 * PI).abs() < 1e-12);
        let k = [
            InterfaceField::constant(&h, 0.3),
            InterfaceField::constant(&h, 0.1),
            zero.clone(),
        ];
        let kf = std::array::from_fn(|_| std::array::from_fn(|_| InterfaceField::constant(&h, 0.7)));
        let (db, dg) = beta_gamma_rhs(&k, &kf);
        assert!(db.iter().all(|v| v.abs() < 1e-13) && dg.iter().flatten().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn lid_invariant_examples() {
        let geo = flat(16, 10);
        let w = BulkVector::from_fn(&geo, |[x, _, _]| [0.0, 0.0, x.sin()]);
        let z = BulkVector::zeros(geo.grid());
        let li = lid_invariants(&w, &[z.clone(), z.clone(), z.clone()]);
        assert!(li.vorticity.abs() < 1e-14 && li.deformation_curl == [0.0; 3]);
    }
}
