//! Quick built-in oracle checks behind the `verify` subcommand.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::chebyshev::Chebyshev;
use crate::divcurl::DivCurl;
use crate::dn_ops::DnOperators;
use crate::error::Result;
use crate::geometry::{BulkVector, Side, StripGeometry, StripGrid};
use crate::interface_dynamics::{flat_state_spectrum, stability_lambda, FlatEquilibrium, Mat3, Mode, StabilityMode};
use crate::simulator::{Config, Simulator};
use crate::spectral::{fourier_multiplier, HorizontalGrid, InterfaceField, MultiplierKind};

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
}

fn check(name: &'static str, value: f64, tolerance: f64) -> Check {
    Check {
        name,
        passed: value <= tolerance,
        value,
        tolerance,
    }
}

fn dn_flat() -> Result<f64> {
    let h = HorizontalGrid::new(1, 32)?;
    let grid = StripGrid::new(h.clone(), Arc::new(Chebyshev::new(24)?), Side::Plus)?;
    let ops = DnOperators::new(&InterfaceField::zeros(&h), &grid, 1.0, 1.0)?;
    let mut err: f64 = 0.0;
    for k in 1..=4 {
        let k = k as f64;
        let g = InterfaceField::from_fn(&h, |x| (k * x[0]).cos());
        let out = ops.apply(Side::Plus, &g)?;
        err = err.max(out.sub(&g.scale(k * k.tanh())).max_abs() / (k * k.tanh()));
    }
    Ok(err)
}

fn lambda_examples() -> f64 {
    let g = HorizontalGrid::new(2, 8).expect("valid grid");
    let n = g.npts();
    let id: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let row: Mat3 = [[1.0, 0.0, 0.0], [0.0; 3], [0.0; 3]];
    let run = |fp: Mat3, v: [f64; 2]| {
        stability_lambda(
            &g,
            &vec![fp; n],
            &vec![fp; n],
            &vec![v; n],
            [1.0, 1.0],
            0.1,
            StabilityMode::TwoFluid,
        )
        .lambda
    };
    let a = 0.6;
    (run(id, [0.0; 2]) - 1.0)
        .abs()
        .max((run(id, [a, 0.0]) - (1.0 - a * a)).abs())
        .max(run(row, [0.0; 2]).abs())
}

fn kh_spectrum() -> f64 {
    let z = [[0.0; 3]; 3];
    let eq = FlatEquilibrium {
        u_plus: [0.5, 0.0],
        u_minus: [-0.5, 0.0],
        f_plus: z,
        f_minus: z,
        rho: [1.0, 1.0],
        offset: 0.0,
        mode: Mode::TwoFluid,
    };
    (1..=8)
        .map(|k| {
            let l = flat_state_spectrum(&eq, &[[k as f64, 0.0]])[0];
            (l[0].re.abs() - 0.5 * k as f64).abs()
        })
        .fold(0.0, f64::max)
}

fn divcurl_constant() -> Result<f64> {
    let h = HorizontalGrid::new(1, 16)?;
    let grid = StripGrid::new(h.clone(), Arc::new(Chebyshev::new(16)?), Side::Minus)?;
    let f = InterfaceField::from_fn(&h, |x| 0.1 * x[0].sin());
    let geom = StripGeometry::new(&f, &grid)?;
    let c = [0.7, 0.0, 0.0];
    let dc = DivCurl::new(&geom)?;
    let v = BulkVector::constant(&grid, c);
    let theta = geom.normal_component(&v);
    let zero = BulkVector::zeros(&grid);
    let out = dc.solve(&zero, &vec![0.0; grid.len()], &theta, [0.7 * 2.0 * PI, 0.0])?;
    let err = (0..geom.grid().len())
        .map(|i| (out.comps[0][i] - c[0]).abs() + out.comps[1][i].abs() + out.comps[2][i].abs())
        .fold(0.0, f64::max);
    Ok(err)
}

fn multiplier_inverse() -> Result<f64> {
    let h = HorizontalGrid::new(2, 16)?;
    let g = InterfaceField::from_fn(&h, |x| (x[0] + 2.0 * x[1]).sin() + 0.3 * (3.0 * x[0]).cos());
    let a = fourier_multiplier(&g, 1.5, MultiplierKind::Bessel)?;
    let back = fourier_multiplier(&a, -1.5, MultiplierKind::Bessel)?;
    Ok(back.sub(&g).max_abs())
}

fn quiescent_step() -> Result<f64> {
    let sim = Simulator::new(Config::from_toml("n = 16\nm = 10")?)?;
    let (st, _) = sim.init()?;
    let next = sim.step(&st, 1e-2)?;
    let (a, b) = (sim.pack(&st), sim.pack(&next));
    Ok(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

/// Runs every check; solver failures count as failed checks.
pub fn run_checks() -> Vec<Check> {
    let or_fail = |r: Result<f64>| r.unwrap_or(f64::INFINITY);
    vec![
        check("flat DN symbol k tanh k", or_fail(dn_flat()), 1e-10),
        check("stability functional worked examples", lambda_examples(), 1e-14),
        check("Kelvin-Helmholtz growth rate U k", kh_spectrum(), 1e-12),
        check("div-curl constant field", or_fail(divcurl_constant()), 1e-10),
        check("Bessel multiplier inverse", or_fail(multiplier_inverse()), 1e-12),
        check("quiescent state is a fixed point", or_fail(quiescent_step()), 1e-12),
    ]
}
