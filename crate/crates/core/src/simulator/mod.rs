//! Coupled time stepping of `(f, θ, ω, G_j, β, γ)` with div-curl recovery
//! of `(u, F)` at every stage, Picard iteration, the momentum residual of
//! the original system, runtime monitors and I/O.

pub mod config;
pub mod output;
pub mod snapshot;

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::bulk_dynamics::{beta_gamma_rhs, lid_invariants, vorticity_rhs, BulkRates, LidInvariants};
use crate::chebyshev::Chebyshev;
use crate::divcurl::{interface_constraints, recover_side, DivCurl, SideCurls, SideFields};
use crate::dn_ops::DnOperators;
use crate::elliptic::assemble_pressure;
use crate::error::{Error, Result};
use crate::geometry::{BulkVector, Side, StripGeometry, StripGrid};
use crate::interface_dynamics::{
    energy_es, flat_state_spectrum, stability_inputs, stability_lambda, theta_rhs, weighted_velocities, EnergyReport,
    FlatEquilibrium, InterfaceState, Mode, SideTraces, StabilityMode, StabilityReport, ThetaRate,
};
use crate::spectral::{project_mean_zero, HorizontalGrid, InterfaceField};

pub use config::{Config, Family, Seed, Stepper};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FluidParams {
    pub rho_plus: f64,
    pub rho_minus: f64,
    pub c0: f64,
    pub s: u32,
    pub mode: Mode,
    pub d: usize,
}

impl FluidParams {
    pub fn from_config(c: &Config) -> Self {
        Self {
            rho_plus: c.rho_plus,
            rho_minus: c.rho_minus,
            c0: c.c0,
            s: c.s,
            mode: c.mode,
            d: c.d,
        }
    }

    pub fn rho(&self) -> [f64; 2] {
        [self.rho_plus, self.rho_minus]
    }

    pub fn density(&self, side: Side) -> f64 {
        self.rho()[side.index()]
    }
}

/// Interface unknowns plus the recovered fields of each fluid side (plus
/// then minus in two-fluid mode, minus only in one-fluid mode).
#[derive(Clone, Debug)]
pub struct SimState {
    pub interface: InterfaceState,
    pub sides: Vec<SideFields>,
    pub params: FluidParams,
    pub time: f64,
}

/// Right-hand sides at one state, with the intermediate quantities.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub geoms: Vec<StripGeometry>,
    pub traces: Vec<SideTraces>,
    pub theta: ThetaRate,
    /// `∂_t f = Pθ`
    pub f_t: InterfaceField,
    /// Eulerian rates of `ω`, `G_j`.
    pub bulk: Vec<BulkRates>,
    pub lid_rates: Vec<([f64; 2], [[f64; 3]; 2])>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Diagnostics {
    pub time: f64,
    pub stability: StabilityReport,
    pub energy: EnergyReport,
    pub div_u: f64,
    pub div_f: f64,
    pub f_dot_n: f64,
    /// `max |u⁺·N − u⁻·N|` (two fluids) or `max |u·N − Pθ|` (one fluid).
    pub normal_jump: f64,
    pub mean_f: f64,
    pub max_abs_f: f64,
    pub sobolev_f: f64,
    pub max_velocity: f64,
    pub max_deformation: f64,
    pub lid: Vec<LidInvariants>,
    /// Fourier coefficient of `f` at the configured wavevector.
    pub mode: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Breach {
    pub name: String,
    pub value: f64,
    pub limit: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct PicardTrace {
    /// Difference norms of consecutive iterates.
    pub differences: Vec<f64>,
    pub ratios: Vec<f64>,
    pub iterations: usize,
}

pub struct Simulator {
    config: Config,
    params: FluidParams,
    grid: StripGrid,
}

impl Simulator {
    pub fn new(config: Config) -> Result<Self> {
        config.validate()?;
        let h = HorizontalGrid::new(config.d, config.n)?;
        let v = Arc::new(Chebyshev::new(config.m)?);
        let grid = StripGrid::new(h, v, Side::Plus)?;
        Ok(Self {
            params: FluidParams::from_config(&config),
            config,
            grid,
        })
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn params(&self) -> &FluidParams {
        &self.params
    }

    pub fn horizontal(&self) -> &Arc<HorizontalGrid> {
        self.grid.horizontal()
    }

    pub fn strip(&self, side: Side) -> StripGrid {
        self.grid.with_side(side)
    }

    pub fn sides(&self) -> &'static [Side] {
        self.params.mode.sides()
    }

    pub fn geometries(&self, f: &InterfaceField) -> Result<Vec<StripGeometry>> {
        self.sides()
            .iter()
            .map(|&s| StripGeometry::new(f, &self.strip(s)))
            .collect()
    }

    fn recover(
        &self,
        interface: &InterfaceState,
        curls: &[SideCurls],
        check: bool,
    ) -> Result<(Vec<StripGeometry>, Vec<SideFields>)> {
        let geoms = self.geometries(&interface.f)?;
        let mut fields = Vec::with_capacity(geoms.len());
        for (geom, c) in geoms.iter().zip(curls) {
            let dc = DivCurl::new(geom)?;
            fields.push(recover_side(&dc, &interface.theta, c, check)?);
        }
        Ok((geoms, fields))
    }

    // ---- initial data ----

    /// Flat-interface equilibrium described by the configured traces.
    pub fn flat_equilibrium(&self) -> FlatEquilibrium {
        let ic = &self.config.initial;
        let full = |rows: [[f64; 3]; 2]| [rows[0], rows[1], [0.0; 3]];
        FlatEquilibrium {
            u_plus: ic.u_plus,
            u_minus: ic.u_minus,
            f_plus: full(ic.deformation_plus),
            f_minus: full(ic.deformation_minus),
            rho: self.params.rho(),
            offset: ic.offset,
            mode: self.params.mode,
        }
    }

    /// Root used for eigenmode seeding: largest real part, then largest
    /// imaginary part.
    fn seed_root(&self, eq: &FlatEquilibrium, k: [f64; 2]) -> Complex64 {
        let r = flat_state_spectrum(eq, &[k])[0];
        let (a, b) = (r[0], r[1]);
        if (a.re - b.re).abs() > 1e-12 * (1.0 + a.norm()) {
            if a.re > b.re {
                a
            } else {
                b
            }
        } else if a.im >= b.im {
            a
        } else {
            b
        }
    }

    fn initial_interface(&self) -> Result<InterfaceState> {
        let ic = &self.config.initial;
        let h = self.horizontal();
        let k = [ic.wavevector[0] as f64, ic.wavevector[1] as f64];
        let f = match ic.family {
            Family::Flat => InterfaceField::constant(h, ic.offset),
            Family::Mode => {
                InterfaceField::from_fn(h, |x| ic.offset + ic.amplitude * (k[0] * x[0] + k[1] * x[1]).cos())
            }
            Family::Broad => {
                let g = InterfaceField::from_fn(h, |x| 1.0 / (ic.breadth + x[0].cos()));
                let g = project_mean_zero(&g);
                let scale = ic.amplitude / g.max_abs();
                g.map(|v| ic.offset + scale * v)
            }
            Family::File => return Err(Error::Config("file family is loaded from a snapshot".into())),
        };
        let theta = match ic.seed {
            Seed::Rest => InterfaceField::zeros(h),
            Seed::Eigenmode => {
                let eq = self.flat_equilibrium();
                let fm = project_mean_zero(&f);
                let vals = h.apply_symbol(fm.values(), |q| self.seed_root(&eq, h.wavevector(q)));
                InterfaceField::new(h.clone(), vals)?
            }
        };
        Ok(InterfaceState { f, theta })
    }

    fn initial_curls(&self, geom: &StripGeometry) -> SideCurls {
        let ic = &self.config.initial;
        let vol = self.horizontal().volume();
        let side = geom.side();
        let (u, rows) = match side {
            Side::Plus => (ic.u_plus, ic.deformation_plus),
            Side::Minus => (ic.u_minus, ic.deformation_minus),
        };
        // curl of (0, c(x1) (1 − x3²)², 0), which vanishes at both lids
        let potential = |amp: f64, phase: f64| {
            let a = BulkVector::from_fn(geom, |x| {
                [0.0, amp * (x[0] + phase).cos() * (1.0 - x[2] * x[2]).powi(2), 0.0]
            });
            geom.curl(&a)
        };
        let zero = BulkVector::zeros(geom.grid());
        SideCurls {
            vorticity: if ic.vortex_amplitude != 0.0 {
                potential(ic.vortex_amplitude, 0.0)
            } else {
                zero.clone()
            },
            deformation_curl: [
                if ic.deformation_vortex_amplitude != 0.0 {
                    potential(ic.deformation_vortex_amplitude, 0.5)
                } else {
                    zero.clone()
                },
                zero.clone(),
                zero,
            ],
            beta: [u[0] * vol, u[1] * vol],
            gamma: [rows[0].map(|v| v * vol), rows[1].map(|v| v * vol)],
        }
    }

    /// Builds the initial state, checks the constraints on the data and
    /// the stability hypothesis `Λ ≥ 2 c0`.
    pub fn init(&self) -> Result<(SimState, StabilityReport)> {
        let (interface, geoms, sides) = if self.config.initial.family == Family::File {
            let path = self.config.initial.path.as_ref().expect("validated");
            let snap = snapshot::Snapshot::read(path)?;
            let loaded = snap.into_state(self)?;
            let geoms = self.geometries(&loaded.interface.f)?;
            (loaded.interface, geoms, loaded.sides)
        } else {
            let interface = self.initial_interface()?;
            check_band(&interface.f, self.params.c0)?;
            let geoms = self.geometries(&interface.f)?;
            let curls: Vec<SideCurls> = geoms.iter().map(|g| self.initial_curls(g)).collect();
            let (geoms, sides) = self.recover(&interface, &curls, true)?;
            (interface, geoms, sides)
        };
        let state = SimState {
            interface,
            sides,
            params: self.params,
            time: 0.0,
        };
        self.check_initial_constraints(&state, &geoms)?;
        let report = self.stability(&state)?;
        let required = 2.0 * self.params.c0;
        if report.lambda < required && !self.config.instability_study {
            return Err(Error::Unstable {
                lambda: report.lambda,
                required,
            });
        }
        Ok((state, report))
    }

    fn check_initial_constraints(&self, state: &SimState, geoms: &[StripGeometry]) -> Result<()> {
        let tol = self.config.tolerances.initial;
        let c = constraint_values(state, geoms);
        let checks = [
            ("div u = 0", c.div_u),
            ("div F_j = 0", c.div_f),
            ("F_j·N = 0 on the interface", c.f_dot_n),
            ("continuity of the normal velocity", c.normal_jump),
        ];
        for (condition, residual) in checks {
            if !(residual <= tol) {
                return Err(Error::InitialData { condition, residual });
            }
        }
        Ok(())
    }

    // ---- right-hand sides ----

    pub fn evaluate(
        &self,
        interface: &InterfaceState,
        geoms: Vec<StripGeometry>,
        fields: &[SideFields],
    ) -> Result<Evaluation> {
        let rho = self.params.rho();
        let mut traces = Vec::with_capacity(fields.len());
        for (geom, fl) in geoms.iter().zip(fields) {
            let q = crate::elliptic::combined_pressure(geom, &fl.velocity, &fl.deformation)?;
            traces.push(SideTraces::from_fields(geom, fl, Some(&q)));
        }
        let ops = match self.params.mode {
            Mode::TwoFluid => Some(DnOperators::new(&interface.f, &self.grid, rho[0], rho[1])?),
            Mode::OneFluid => None,
        };
        let theta = theta_rhs(ops.as_ref(), interface, &traces, rho, self.params.mode)?;
        let f_t = project_mean_zero(&interface.theta);
        let mut bulk = Vec::with_capacity(fields.len());
        let mut lid_rates = Vec::with_capacity(fields.len());
        for (geom, fl) in geoms.iter().zip(fields) {
            bulk.push(vorticity_rhs(
                geom,
                &fl.velocity,
                &fl.deformation,
                &fl.vorticity,
                &fl.deformation_curl,
            ));
            let lid_u = fl.velocity.lid_trace();
            let cols: Vec<[InterfaceField; 3]> = fl.deformation.iter().map(|c| c.lid_trace()).collect();
            let lid_f = std::array::from_fn(|i| std::array::from_fn(|j| cols[j][i].clone()));
            lid_rates.push(beta_gamma_rhs(&lid_u, &lid_f));
        }
        Ok(Evaluation {
            geoms,
            traces,
            theta,
            f_t,
            bulk,
            lid_rates,
        })
    }

    fn packed_rate(&self, ev: &Evaluation, fields: &[SideFields]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.packed_len());
        out.extend_from_slice(ev.f_t.values());
        out.extend_from_slice(ev.theta.rate.values());
        for (i, fl) in fields.iter().enumerate() {
            let mut r = ev.bulk[i].clone();
            r.add_grid_motion(&ev.geoms[i], &ev.f_t, &fl.vorticity, &fl.deformation_curl);
            push_side(
                &mut out,
                &r.vorticity,
                &r.deformation_curl,
                ev.lid_rates[i].0,
                ev.lid_rates[i].1,
            );
        }
        out
    }

    fn rate(&self, interface: &InterfaceState, fields: &[SideFields]) -> Result<Vec<f64>> {
        let geoms = self.geometries(&interface.f)?;
        let ev = self.evaluate(interface, geoms, fields)?;
        Ok(self.packed_rate(&ev, fields))
    }

    // ---- packed state vector ----

    fn side_len(&self) -> usize {
        12 * self.grid.len() + 8
    }

    fn packed_len(&self) -> usize {
        2 * self.grid.npts() + self.sides().len() * self.side_len()
    }

    pub fn pack(&self, state: &SimState) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.packed_len());
        out.extend_from_slice(state.interface.f.values());
        out.extend_from_slice(state.interface.theta.values());
        for fl in &state.sides {
            push_side(&mut out, &fl.vorticity, &fl.deformation_curl, fl.beta, fl.gamma);
        }
        out
    }

    fn unpack(&self, y: &[f64]) -> Result<(InterfaceState, Vec<SideCurls>)> {
        let np = self.grid.npts();
        let len = self.grid.len();
        let h = self.horizontal();
        if y.len() != self.packed_len() {
            return Err(Error::GridMismatch("packed state has the wrong length".into()));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("state"));
        }
        let interface = InterfaceState {
            f: InterfaceField::new(h.clone(), y[..np].to_vec())?,
            theta: InterfaceField::new(h.clone(), y[np..2 * np].to_vec())?,
        };
        let mut curls = Vec::new();
        for (k, &side) in self.sides().iter().enumerate() {
            let grid = self.strip(side);
            let base = 2 * np + k * self.side_len();
            let vec_at = |off: usize| BulkVector {
                grid: grid.clone(),
                comps: std::array::from_fn(|a| y[off + a * len..off + (a + 1) * len].to_vec()),
            };
            let s = base + 12 * len;
            curls.push(SideCurls {
                vorticity: vec_at(base),
                deformation_curl: std::array::from_fn(|j| vec_at(base + 3 * len * (j + 1))),
                beta: [y[s], y[s + 1]],
                gamma: [[y[s + 2], y[s + 3], y[s + 4]], [y[s + 5], y[s + 6], y[s + 7]]],
            });
        }
        Ok((interface, curls))
    }

    fn state_from_packed(&self, y: &[f64], time: f64) -> Result<(SimState, Vec<StripGeometry>)> {
        let (interface, curls) = self.unpack(y)?;
        let (geoms, sides) = self.recover(&interface, &curls, false)?;
        Ok((
            SimState {
                interface,
                sides,
                params: self.params,
                time,
            },
            geoms,
        ))
    }

    fn stage_rate(&self, y: &[f64]) -> Result<Vec<f64>> {
        let (st, geoms) = self.state_from_packed(y, 0.0)?;
        let ev = self.evaluate(&st.interface, geoms, &st.sides)?;
        Ok(self.packed_rate(&ev, &st.sides))
    }

    // ---- steppers ----

    /// Classical RK4; the curls are re-projected and `(u, F)` rebuilt at
    /// every stage and at the end of the step.
    pub fn step(&self, state: &SimState, dt: f64) -> Result<SimState> {
        let y0 = self.pack(state);
        let k1 = self.rate(&state.interface, &state.sides)?;
        let k2 = self.stage_rate(&axpy(&y0, 0.5 * dt, &k1))?;
        let k3 = self.stage_rate(&axpy(&y0, 0.5 * dt, &k2))?;
        let k4 = self.stage_rate(&axpy(&y0, dt, &k3))?;
        let y: Vec<f64> = (0..y0.len())
            .map(|i| y0[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect();
        Ok(self.state_from_packed(&y, state.time + dt)?.0)
    }

    /// Fixed-point iteration for the trapezoidal step
    /// `X = X_n + dt/2 (R(X_n) + R(X))`, started from the explicit Euler
    /// predictor. Differences are measured in `H^{s−1/2} × H^{s−3/2}` on the
    /// interface and `L²` on the bulk unknowns.
    pub fn picard_solve(
        &self,
        state: &SimState,
        dt: f64,
        tol: f64,
        max_iter: usize,
    ) -> Result<(SimState, PicardTrace)> {
        let y0 = self.pack(state);
        let r0 = self.rate(&state.interface, &state.sides)?;
        let mut x = axpy(&y0, dt, &r0);
        let scale = self.difference_norm(&y0).max(1.0);
        let mut trace = PicardTrace::default();
        for it in 1..=max_iter {
            let r = self.stage_rate(&x)?;
            let next: Vec<f64> = (0..y0.len()).map(|i| y0[i] + 0.5 * dt * (r0[i] + r[i])).collect();
            let diff: Vec<f64> = next.iter().zip(&x).map(|(a, b)| a - b).collect();
            let dn = self.difference_norm(&diff);
            if let Some(prev) = trace.differences.last() {
                trace.ratios.push(if *prev > 0.0 { dn / prev } else { 0.0 });
            }
            trace.differences.push(dn);
            trace.iterations = it;
            x = next;
            if dn <= tol * scale {
                let st = self.state_from_packed(&x, state.time + dt)?.0;
                return Ok((st, trace));
            }
            let n = trace.ratios.len();
            if n >= 3 && trace.ratios[n - 3..].iter().all(|r| *r >= 1.0) {
                break;
            }
        }
        Err(Error::NoContraction {
            iterations: trace.iterations,
            ratios: trace.ratios,
        })
    }

    /// Norm on packed vectors used for Picard differences.
    pub fn difference_norm(&self, y: &[f64]) -> f64 {
        let h = self.horizontal();
        let np = self.grid.npts();
        let len = self.grid.len();
        let s = self.params.s as f64;
        let mut acc = h.sobolev_norm_sq(&y[..np], s - 0.5) + h.sobolev_norm_sq(&y[np..2 * np], s - 1.5);
        let w = self.grid.vertical().weights();
        let cell = h.volume() / np as f64;
        for k in 0..self.sides().len() {
            let base = 2 * np + k * self.side_len();
            for c in 0..12 {
                let off = base + c * len;
                for (j, wj) in w.iter().enumerate() {
                    for p in 0..np {
                        let v = y[off + j * np + p];
                        acc += wj * cell * v * v;
                    }
                }
            }
            acc += y[base + 12 * len..base + 12 * len + 8]
                .iter()
                .map(|v| v * v)
                .sum::<f64>();
        }
        acc.sqrt()
    }

    // ---- diagnostics ----

    pub fn stability(&self, state: &SimState) -> Result<StabilityReport> {
        let geoms = self.geometries(&state.interface.f)?;
        let traces: Vec<SideTraces> = geoms
            .iter()
            .zip(&state.sides)
            .map(|(g, fl)| SideTraces::from_fields(g, fl, None))
            .collect();
        Ok(self.stability_from_traces(&traces))
    }

    fn stability_from_traces(&self, traces: &[SideTraces]) -> StabilityReport {
        let rho = self.params.rho();
        let (fp, fm, v) = stability_inputs(traces, rho, self.params.mode);
        let mode = match self.params.mode {
            Mode::TwoFluid => StabilityMode::TwoFluid,
            Mode::OneFluid => StabilityMode::OneFluid,
        };
        stability_lambda(self.horizontal(), &fp, &fm, &v, rho, self.params.c0, mode)
    }

    pub fn energy(&self, state: &SimState, traces: &[SideTraces]) -> Result<EnergyReport> {
        let d = self.params.d;
        let h = self.horizontal();
        let s = self.params.s as f64;
        let it = &state.interface;
        match self.params.mode {
            Mode::TwoFluid => {
                let rho = self.params.rho();
                let (w, v) = weighted_velocities(&traces[0].velocity[..d], &traces[1].velocity[..d], rho[0], rho[1]);
                energy_es(
                    &it.f,
                    &it.theta,
                    &w,
                    &v,
                    Some(&traces[0].deformation),
                    &traces[1].deformation,
                    rho,
                    s,
                )
            }
            Mode::OneFluid => {
                let zero = vec![InterfaceField::zeros(h); d];
                energy_es(
                    &it.f,
                    &it.theta,
                    &traces[0].velocity[..d],
                    &zero,
                    None,
                    &traces[0].deformation,
                    [0.0, 1.0],
                    s,
                )
            }
        }
    }

    pub fn diagnostics(&self, state: &SimState) -> Result<Diagnostics> {
        let geoms = self.geometries(&state.interface.f)?;
        let traces: Vec<SideTraces> = geoms
            .iter()
            .zip(&state.sides)
            .map(|(g, fl)| SideTraces::from_fields(g, fl, None))
            .collect();
        let stability = self.stability_from_traces(&traces);
        let energy = self.energy(state, &traces)?;
        let c = constraint_values(state, &geoms);
        let f = &state.interface.f;
        let k = self.config.initial.wavevector;
        let mode = f.mode(k);
        let max_velocity = state.sides.iter().map(|s| s.velocity.max_abs()).fold(0.0, f64::max);
        let max_deformation = state
            .sides
            .iter()
            .flat_map(|s| s.deformation.iter().map(|c| c.max_abs()))
            .fold(0.0, f64::max);
        Ok(Diagnostics {
            time: state.time,
            stability,
            energy,
            div_u: c.div_u,
            div_f: c.div_f,
            f_dot_n: c.f_dot_n,
            normal_jump: c.normal_jump,
            mean_f: f.mean(),
            max_abs_f: f.max_abs(),
            sobolev_f: f.sobolev_norm(self.params.s as f64 + 0.5),
            max_velocity,
            max_deformation,
            lid: state
                .sides
                .iter()
                .map(|s| lid_invariants(&s.vorticity, &s.deformation_curl))
                .collect(),
            mode: [mode.re, mode.im],
        })
    }

    /// First violated monitor, if any.
    pub fn check_monitors(&self, d: &Diagnostics) -> Option<Breach> {
        let m = &self.config.monitors;
        let breach = |name: &str, value: f64, limit: f64| {
            Some(Breach {
                name: name.to_string(),
                value,
                limit,
            })
        };
        let finite = [
            d.stability.lambda,
            d.energy.total,
            d.max_abs_f,
            d.max_velocity,
            d.max_deformation,
            d.sobolev_f,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return breach("non_finite", f64::NAN, 0.0);
        }
        let over = [
            ("max_abs_f", d.max_abs_f, self.config.interface_limit()),
            ("max_velocity", d.max_velocity, m.max_velocity),
            ("max_deformation", d.max_deformation, m.max_deformation),
            ("sobolev_f", d.sobolev_f, m.max_sobolev),
            ("div_u", d.div_u, m.max_constraint),
            ("div_f", d.div_f, m.max_constraint),
            ("f_dot_n", d.f_dot_n, m.max_constraint),
            ("normal_jump", d.normal_jump, m.max_constraint),
        ];
        for (name, value, limit) in over {
            if value > limit {
                return breach(name, value, limit);
            }
        }
        if m.enforce_lambda && !self.config.instability_study && d.stability.lambda < self.params.c0 {
            return breach("lambda", d.stability.lambda, self.params.c0);
        }
        None
    }

    /// Largest characteristic speed of the interface equation, bounded by
    /// `|w| + |v| + |F|` over the grid.
    pub fn wave_speed(&self, state: &SimState) -> f64 {
        let np = self.grid.npts();
        let mut speed: f64 = 0.0;
        for fl in &state.sides {
            let u = fl.velocity.interface_trace();
            let cols: Vec<[InterfaceField; 3]> = fl.deformation.iter().map(|c| c.interface_trace()).collect();
            for p in 0..np {
                let un = (u[0].values()[p].powi(2) + u[1].values()[p].powi(2)).sqrt();
                let fnorm: f64 = cols
                    .iter()
                    .flat_map(|c| c[..2].iter().map(|x| x.values()[p].powi(2)))
                    .sum::<f64>()
                    .sqrt();
                speed = speed.max(un + fnorm);
            }
        }
        if self.sides().len() == 2 {
            speed *= 2.0;
        }
        speed
    }

    /// `Some(limit)` when `dt` exceeds the CFL bound.
    pub fn cfl_violation(&self, state: &SimState, dt: f64) -> Option<f64> {
        let speed = self.wave_speed(state);
        if speed == 0.0 {
            return None;
        }
        let limit = self.config.cfl * self.horizontal().spacing() / speed;
        (dt > limit).then_some(limit)
    }

    // ---- consistency with the original system ----

    /// `‖∂_t u + u·∇u − Σ_j F_j·∇F_j + ∇p/ρ‖_{L²}` per side, with `∂_t u`
    /// from the div-curl system of the time-differentiated constraints.
    pub fn momentum_residual(&self, state: &SimState) -> Result<Vec<f64>> {
        let geoms = self.geometries(&state.interface.f)?;
        let ev = self.evaluate(&state.interface, geoms, &state.sides)?;
        let h = self.horizontal();
        let np = h.npts();
        let f = &state.interface.f;
        let slopes: Vec<InterfaceField> = (0..2).map(|i| f.derivative(i)).collect();
        let ft = &ev.f_t;
        let dft: Vec<InterfaceField> = (0..2).map(|i| ft.derivative(i)).collect();
        let ftt = project_mean_zero(&ev.theta.rate);
        let mut out = Vec::new();
        for (k, (&side, fl)) in self.sides().iter().zip(&state.sides).enumerate() {
            let geom = &ev.geoms[k];
            let u = &fl.velocity;
            let gu: Vec<[Vec<f64>; 3]> = u.comps.iter().map(|c| geom.gradient(c)).collect();
            let mut flux = vec![0.0; np];
            for p in 0..np {
                let n = [-slopes[0].values()[p], -slopes[1].values()[p], 1.0];
                let d3u_n: f64 = (0..3).map(|a| gu[a][2][p] * n[a]).sum();
                let adv: f64 = (0..2).map(|i| u.comps[i][p] * dft[i].values()[p]).sum();
                flux[p] = ftt.values()[p] - ft.values()[p] * d3u_n + adv;
            }
            let flux = project_mean_zero(&InterfaceField::new(h.clone(), flux)?);
            let dc = DivCurl::new(geom)?;
            let ut = dc.solve_unchecked(&ev.bulk[k].vorticity, None, &flux, ev.lid_rates[k].0)?;
            let rho = self.params.density(side);
            let p = assemble_pressure(geom, &ev.theta.p_bar, u, &fl.deformation, rho)?;
            let gp = geom.gradient(&p.values);
            let mut w = ut;
            let ju = geom.jacobian(u);
            let jf: Vec<_> = fl.deformation.iter().map(|c| geom.jacobian(c)).collect();
            for a in 0..3 {
                for i in 0..geom.grid().len() {
                    let mut s = gp[a][i] / rho;
                    for b in 0..3 {
                        s += u.comps[b][i] * ju[a][b][i];
                        for (j, col) in fl.deformation.iter().enumerate() {
                            s -= col.comps[b][i] * jf[j][a][b][i];
                        }
                    }
                    w.comps[a][i] += s;
                }
            }
            out.push(geom.vector_l2_norm(&w));
        }
        Ok(out)
    }
}

fn push_side(out: &mut Vec<f64>, w: &BulkVector, g: &[BulkVector; 3], beta: [f64; 2], gamma: [[f64; 3]; 2]) {
    for v in std::iter::once(w).chain(g.iter()) {
        for c in &v.comps {
            out.extend_from_slice(c);
        }
    }
    out.extend_from_slice(&beta);
    out.extend_from_slice(&gamma[0]);
    out.extend_from_slice(&gamma[1]);
}

fn axpy(y: &[f64], a: f64, x: &[f64]) -> Vec<f64> {
    y.iter().zip(x).map(|(u, v)| u + a * v).collect()
}

fn check_band(f: &InterfaceField, c0: f64) -> Result<()> {
    crate::geometry::Interface::new(f.clone(), c0).map(|_| ())
}

struct Constraints {
    div_u: f64,
    div_f: f64,
    f_dot_n: f64,
    normal_jump: f64,
}

fn constraint_values(state: &SimState, geoms: &[StripGeometry]) -> Constraints {
    let max = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut c = Constraints {
        div_u: 0.0,
        div_f: 0.0,
        f_dot_n: 0.0,
        normal_jump: 0.0,
    };
    for (geom, fl) in geoms.iter().zip(&state.sides) {
        c.div_u = c.div_u.max(max(&geom.divergence(&fl.velocity)));
        for col in &fl.deformation {
            c.div_f = c.div_f.max(max(&geom.divergence(col)));
        }
        c.f_dot_n = c.f_dot_n.max(interface_constraints(geom, fl, &state.interface.theta).1);
    }
    c.normal_jump = if geoms.len() == 2 {
        geoms[0]
            .normal_component(&state.sides[0].velocity)
            .sub(&geoms[1].normal_component(&state.sides[1].velocity))
            .max_abs()
    } else {
        interface_constraints(&geoms[0], &state.sides[0], &state.interface.theta).0
    };
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> Config {
        Config::from_toml(text).unwrap()
    }

    #[test]
    fn quiescent_state_is_fixed() {
        let sim = Simulator::new(cfg("n = 16\nm = 10")).unwrap();
        let (st, rep) = sim.init().unwrap();
        assert_eq!(rep.lambda, 1.0);
        let next = sim.step(&st, 1e-2).unwrap();
        let (a, b) = (sim.pack(&st), sim.pack(&next));
        let diff = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-12, "{diff}");
        let (_, trace) = sim.picard_solve(&st, 1e-2, 1e-10, 5).unwrap();
        assert_eq!(trace.iterations, 1);
        let r = sim.momentum_residual(&st).unwrap();
        assert!(r.iter().all(|v| *v < 1e-10));
    }

    #[test]
    fn kh_data_rejected_without_study_flag() {
        let text = "n = 16\nm = 10\n[initial]\nu_plus = [0.5, 0.0]\nu_minus = [-0.5, 0.0]\ndeformation_plus = [[0.0,0.0,0.0],[0.0,0.0,0.0]]\ndeformation_minus = [[0.0,0.0,0.0],[0.0,0.0,0.0]]\n";
        let sim = Simulator::new(cfg(text)).unwrap();
        match sim.init() {
            Err(Error::Unstable { lambda, .. }) => assert!((lambda + 0.25).abs() < 1e-12),
            other => panic!("expected rejection, got {other:?}"),
        }
        let sim = Simulator::new(cfg(&format!("instability_study = true\n{text}"))).unwrap();
        assert!(sim.init().is_ok());
    }

    #[test]
    fn stabilized_shear_reports_lambda() {
        let text = "n = 16\nm = 10\n[initial]\nfamily = \"mode\"\namplitude = 1e-3\nu_plus = [0.3, 0.0]\nu_minus = [-0.3, 0.0]\n";
        let sim = Simulator::new(cfg(text)).unwrap();
        let (st, rep) = sim.init().unwrap();
        // Λ = a² − |v|² with v = √(ρ⁺ρ⁻)(u⁺ − u⁻)/ρ = 0.3
        assert!((rep.lambda - (1.0 - 0.09)).abs() < 1e-2, "{}", rep.lambda);
        let d = sim.diagnostics(&st).unwrap();
        assert!(d.div_u < 1e-8 && d.f_dot_n < 1e-8 && d.normal_jump < 1e-8);
    }
}
