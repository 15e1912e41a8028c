//! wasm-bindgen bindings behind the browser demo in `www/`.

use std::sync::Arc;

use wasm_bindgen::prelude::*;

use elastosheet::chebyshev::Chebyshev;
use elastosheet::dn_ops::DnOperators;
use elastosheet::geometry::{Side, StripGrid};
use elastosheet::interface_dynamics::{
    flat_state_spectrum, stability_lambda, FlatEquilibrium, Mat3, Mode, StabilityMode,
};
use elastosheet::simulator::{Config, SimState, Simulator};
use elastosheet::spectral::{HorizontalGrid, InterfaceField};

fn js(e: elastosheet::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn isotropic(a: f64) -> Mat3 {
    [[a, 0.0, 0.0], [0.0, a, 0.0], [0.0, 0.0, a]]
}

/// Flat-state spectrum for shear `±u/2`, isotropic deformation `a±` and
/// densities `ρ±`, for k = 1..=kmax along x1. Returns rows
/// `[k, Re λ₁, Im λ₁, Re λ₂, Im λ₂]` flattened, followed by `Λ` of the
/// equilibrium as the last entry.
#[wasm_bindgen]
pub fn flat_spectrum(u: f64, a_plus: f64, a_minus: f64, rho_plus: f64, rho_minus: f64, kmax: u32) -> Vec<f64> {
    let eq = FlatEquilibrium {
        u_plus: [0.5 * u, 0.0],
        u_minus: [-0.5 * u, 0.0],
        f_plus: isotropic(a_plus),
        f_minus: isotropic(a_minus),
        rho: [rho_plus, rho_minus],
        offset: 0.0,
        mode: Mode::TwoFluid,
    };
    let ks: Vec<[f64; 2]> = (1..=kmax).map(|k| [k as f64, 0.0]).collect();
    let mut out = Vec::with_capacity(5 * ks.len() + 1);
    for (k, r) in ks.iter().zip(flat_state_spectrum(&eq, &ks)) {
        out.extend([k[0], r[0].re, r[0].im, r[1].re, r[1].im]);
    }
    let h = HorizontalGrid::new(1, 8).expect("valid grid");
    let v = (rho_plus * rho_minus).sqrt() / (rho_plus + rho_minus) * u;
    let np = h.npts();
    let lambda = stability_lambda(
        &h,
        &vec![eq.f_plus; np],
        &vec![eq.f_minus; np],
        &vec![[v, 0.0]; np],
        eq.rho,
        0.0,
        StabilityMode::TwoFluid,
    );
    out.push(lambda.lambda);
    out
}

/// DN operators on the interface `f = amp·sin(x1)` applied to `cos(k x1)`.
/// Returns `[x, f, g, N⁺g, N⁻g]` concatenated, `n` samples each.
#[wasm_bindgen]
pub fn dn_demo(amp: f64, k: u32, n: usize) -> Result<Vec<f64>, JsError> {
    let h = HorizontalGrid::new(1, n).map_err(js)?;
    let grid = StripGrid::new(h.clone(), Arc::new(Chebyshev::new(24).map_err(js)?), Side::Plus).map_err(js)?;
    let f = InterfaceField::from_fn(&h, |x| amp * x[0].sin());
    let g = InterfaceField::from_fn(&h, |x| (k as f64 * x[0]).cos());
    let ops = DnOperators::new(&f, &grid, 1.0, 1.0).map_err(js)?;
    let plus = ops.apply(Side::Plus, &g).map_err(js)?;
    let minus = ops.apply(Side::Minus, &g).map_err(js)?;
    let mut out: Vec<f64> = (0..n).map(|p| h.point(p)[0]).collect();
    for v in [&f, &g, &plus, &minus] {
        out.extend_from_slice(v.values());
    }
    Ok(out)
}

/// A small two-fluid run: a single interface mode under shear `±u/2` and
/// isotropic deformation `a` on both sides.
#[wasm_bindgen]
pub struct Evolution {
    sim: Simulator,
    state: SimState,
    dt: f64,
}

#[wasm_bindgen]
impl Evolution {
    #[wasm_bindgen(constructor)]
    pub fn new(u: f64, a: f64, k: u32, amplitude: f64) -> Result<Evolution, JsError> {
        let text = format!(
            "n = 32\nm = 12\ndt = 2e-3\ninstability_study = true\n[initial]\nfamily = \"mode\"\n\
             amplitude = {amplitude}\nwavevector = [{k}, 0]\nseed = \"eigenmode\"\n\
             u_plus = [{up}, 0.0]\nu_minus = [{um}, 0.0]\n\
             deformation_plus = [[{a}, 0.0, 0.0], [0.0, {a}, 0.0]]\ndeformation_minus = [[{a}, 0.0, 0.0], [0.0, {a}, 0.0]]\n",
            up = 0.5 * u,
            um = -0.5 * u,
        );
        let sim = Simulator::new(Config::from_toml(&text).map_err(js)?).map_err(js)?;
        let (state, _) = sim.init().map_err(js)?;
        Ok(Self { sim, state, dt: 2e-3 })
    }

    /// Advances `steps` RK4 steps.
    pub fn advance(&mut self, steps: u32) -> Result<(), JsError> {
        for _ in 0..steps {
            self.state = self.sim.step(&self.state, self.dt).map_err(js)?;
        }
        Ok(())
    }

    pub fn time(&self) -> f64 {
        self.state.time
    }

    pub fn interface(&self) -> Vec<f64> {
        self.state.interface.f.values().to_vec()
    }

    pub fn lambda(&self) -> Result<f64, JsError> {
        Ok(self.sim.stability(&self.state).map_err(js)?.lambda)
    }
}
