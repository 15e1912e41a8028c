//! Periodic horizontal grids on the torus `T^d` (period `2π` per direction)
//! and the pseudo-spectral primitives every other module builds on:
//! transforms, Fourier multipliers, the mean-zero projection, horizontal
//! derivatives and 2/3-rule dealiased products.
//!
//! Physical samples are stored with `x1` varying fastest. Spectral
//! coefficients use the half spectrum in `x1` (`k1 = 0..=n/2`) and the full
//! spectrum in `x2`, normalized so that a field equals `Σ c_k e^{i k·x}`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub struct HorizontalGrid {
    d: usize,
    n: usize,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for HorizontalGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HorizontalGrid")
            .field("d", &self.d)
            .field("n", &self.n)
            .finish()
    }
}

impl PartialEq for HorizontalGrid {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d && self.n == other.n
    }
}

impl HorizontalGrid {
    /// Builds a grid with `n` points per direction on `T^d`.
    pub fn new(d: usize, n: usize) -> Result<Arc<Self>> {
        if d != 1 && d != 2 {
            return Err(Error::Config(format!("horizontal dimension must be 1 or 2, got {d}")));
        }
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "points per direction must be even and >= 8, got {n}"
            )));
        }
        let mut rp = RealFftPlanner::<f64>::new();
        let mut cp = FftPlanner::<f64>::new();
        Ok(Arc::new(Self {
            d,
            n,
            r2c: rp.plan_fft_forward(n),
            c2r: rp.plan_fft_inverse(n),
            col_fwd: cp.plan_fft_forward(n),
            col_inv: cp.plan_fft_inverse(n),
        }))
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of physical samples.
    pub fn npts(&self) -> usize {
        if self.d == 1 {
            self.n
        } else {
            self.n * self.n
        }
    }

    fn nhalf(&self) -> usize {
        self.n / 2 + 1
    }

    /// Number of stored (half-spectrum) coefficients.
    pub fn ncoef(&self) -> usize {
        if self.d == 1 {
            self.nhalf()
        } else {
            self.nhalf() * self.n
        }
    }

    /// Measure of the torus, `(2π)^d`.
    pub fn volume(&self) -> f64 {
        (2.0 * PI).powi(self.d as i32)
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    /// Coordinates of sample `p`; the second entry is 0 when `d = 1`.
    pub fn point(&self, p: usize) -> [f64; 2] {
        let h = self.spacing();
        if self.d == 1 {
            [p as f64 * h, 0.0]
        } else {
            [(p % self.n) as f64 * h, (p / self.n) as f64 * h]
        }
    }

    /// Integer wavevector of stored coefficient `q`.
    pub fn wavenumbers(&self, q: usize) -> [i64; 2] {
        let nh = self.nhalf();
        let k1 = (q % nh) as i64;
        if self.d == 1 {
            return [k1, 0];
        }
        let i2 = (q / nh) as i64;
        let n = self.n as i64;
        let k2 = if i2 <= n / 2 { i2 } else { i2 - n };
        [k1, k2]
    }

    pub fn wavevector(&self, q: usize) -> [f64; 2] {
        let k = self.wavenumbers(q);
        [k[0] as f64, k[1] as f64]
    }

    /// Weight of coefficient `q` in sums over the full spectrum (conjugate
    /// partners are not stored).
    pub fn multiplicity(&self, q: usize) -> f64 {
        let k1 = q % self.nhalf();
        if k1 == 0 || k1 == self.n / 2 {
            1.0
        } else {
            2.0
        }
    }

    fn is_nyquist(&self, k: i64) -> bool {
        k.unsigned_abs() as usize == self.n / 2
    }

    /// Symbol of `∂_dir` for coefficient `q`; Nyquist modes are dropped.
    pub fn derivative_symbol(&self, q: usize, dir: usize) -> Complex64 {
        let k = self.wavenumbers(q);
        if dir >= self.d || self.is_nyquist(k[dir]) {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(0.0, k[dir] as f64)
    }

    /// Symbol of `∂_a ∂_b`.
    pub fn second_derivative_symbol(&self, q: usize, a: usize, b: usize) -> f64 {
        if a >= self.d || b >= self.d {
            return 0.0;
        }
        let k = self.wavenumbers(q);
        if a == b {
            -((k[a] * k[a]) as f64)
        } else {
            let s = self.derivative_symbol(q, a) * self.derivative_symbol(q, b);
            s.re
        }
    }

    /// True when coefficient `q` survives the 2/3 truncation.
    pub fn in_dealias_band(&self, q: usize) -> bool {
        let cut = (self.n / 3) as i64;
        let k = self.wavenumbers(q);
        k[0].abs() <= cut && k[1].abs() <= cut
    }

    /// Forward transform of one or more stacked levels (each `npts` long).
    pub fn forward(&self, values: &[f64], out: &mut [Complex64]) {
        let np = self.npts();
        let nc = self.ncoef();
        assert_eq!(values.len() % np, 0);
        let levels = values.len() / np;
        assert_eq!(out.len(), levels * nc);
        let n = self.n;
        let nh = self.nhalf();
        let mut row = vec![0.0; n];
        let mut scratch = self.r2c.make_scratch_vec();
        let scale = 1.0 / np as f64;
        if self.d == 1 {
            for l in 0..levels {
                row.copy_from_slice(&values[l * np..(l + 1) * np]);
                let dst = &mut out[l * nc..(l + 1) * nc];
                self.r2c
                    .process_with_scratch(&mut row, dst, &mut scratch)
                    .expect("fft length");
                dst.iter_mut().for_each(|c| *c *= scale);
            }
            return;
        }
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        let mut cscratch = vec![Complex64::new(0.0, 0.0); self.col_fwd.get_inplace_scratch_len()];
        for l in 0..levels {
            let src = &values[l * np..(l + 1) * np];
            let dst = &mut out[l * nc..(l + 1) * nc];
            for i2 in 0..n {
                row.copy_from_slice(&src[i2 * n..(i2 + 1) * n]);
                self.r2c
                    .process_with_scratch(&mut row, &mut dst[i2 * nh..(i2 + 1) * nh], &mut scratch)
                    .expect("fft length");
            }
            for k1 in 0..nh {
                for i2 in 0..n {
                    col[i2] = dst[i2 * nh + k1];
                }
                self.col_fwd.process_with_scratch(&mut col, &mut cscratch);
                for i2 in 0..n {
                    dst[i2 * nh + k1] = col[i2] * scale;
                }
            }
        }
    }

    /// Inverse of [`forward`](Self::forward); the imaginary parts of
    /// self-conjugate bins are discarded.
    pub fn inverse(&self, coeffs: &[Complex64], out: &mut [f64]) {
        let np = self.npts();
        let nc = self.ncoef();
        assert_eq!(coeffs.len() % nc, 0);
        let levels = coeffs.len() / nc;
        assert_eq!(out.len(), levels * np);
        let n = self.n;
        let nh = self.nhalf();
        let mut half = vec![Complex64::new(0.0, 0.0); nh];
        let mut scratch = self.c2r.make_scratch_vec();
        if self.d == 1 {
            for l in 0..levels {
                half.copy_from_slice(&coeffs[l * nc..(l + 1) * nc]);
                half[0].im = 0.0;
                half[nh - 1].im = 0.0;
                self.c2r
                    .process_with_scratch(&mut half, &mut out[l * np..(l + 1) * np], &mut scratch)
                    .expect("fft length");
            }
            return;
        }
        let mut tmp = vec![Complex64::new(0.0, 0.0); nc];
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        let mut cscratch = vec![Complex64::new(0.0, 0.0); self.col_inv.get_inplace_scratch_len()];
        for l in 0..levels {
            let src = &coeffs[l * nc..(l + 1) * nc];
            for k1 in 0..nh {
                for i2 in 0..n {
                    col[i2] = src[i2 * nh + k1];
                }
                self.col_inv.process_with_scratch(&mut col, &mut cscratch);
                for i2 in 0..n {
                    tmp[i2 * nh + k1] = col[i2];
                }
            }
            let dst = &mut out[l * np..(l + 1) * np];
            for i2 in 0..n {
                half.copy_from_slice(&tmp[i2 * nh..(i2 + 1) * nh]);
                half[0].im = 0.0;
                half[nh - 1].im = 0.0;
                self.c2r
                    .process_with_scratch(&mut half, &mut dst[i2 * n..(i2 + 1) * n], &mut scratch)
                    .expect("fft length");
            }
        }
    }

    pub fn transform(&self, values: &[f64]) -> Vec<Complex64> {
        let levels = values.len() / self.npts();
        let mut out = vec![Complex64::new(0.0, 0.0); levels * self.ncoef()];
        self.forward(values, &mut out);
        out
    }

    pub fn synthesize(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let levels = coeffs.len() / self.ncoef();
        let mut out = vec![0.0; levels * self.npts()];
        self.inverse(coeffs, &mut out);
        out
    }

    /// Applies a coefficient-wise multiplier to stacked levels.
    pub fn apply_symbol<M>(&self, values: &[f64], symbol: M) -> Vec<f64>
    where
        M: Fn(usize) -> Complex64,
    {
        let nc = self.ncoef();
        let mut c = self.transform(values);
        for (i, z) in c.iter_mut().enumerate() {
            *z *= symbol(i % nc);
        }
        self.synthesize(&c)
    }

    /// `∂_dir` of stacked levels.
    pub fn derivative(&self, values: &[f64], dir: usize) -> Vec<f64> {
        if dir >= self.d {
            return vec![0.0; values.len()];
        }
        self.apply_symbol(values, |q| self.derivative_symbol(q, dir))
    }

    /// All first derivatives of stacked levels from a single forward transform.
    pub fn gradient(&self, values: &[f64]) -> Vec<Vec<f64>> {
        let nc = self.ncoef();
        let c = self.transform(values);
        (0..self.d)
            .map(|dir| {
                let mut cd = c.clone();
                for (i, z) in cd.iter_mut().enumerate() {
                    *z *= self.derivative_symbol(i % nc, dir);
                }
                self.synthesize(&cd)
            })
            .collect()
    }

    /// Zeroes every coefficient outside the 2/3 band.
    pub fn dealias(&self, values: &[f64]) -> Vec<f64> {
        self.apply_symbol(values, |q| {
            if self.in_dealias_band(q) {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// Discrete `∫_{T^d} a b dx'`.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        let s: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        s * self.volume() / a.len() as f64
    }

    pub fn mean(&self, a: &[f64]) -> f64 {
        a.iter().sum::<f64>() / a.len() as f64
    }

    /// `‖·‖_{H^s}^2` computed from coefficients with weight `(1+|k|^2)^s`.
    pub fn sobolev_norm_sq(&self, values: &[f64], s: f64) -> f64 {
        let c = self.transform(values);
        let mut acc = 0.0;
        for (q, z) in c.iter().enumerate() {
            let k = self.wavevector(q);
            let w = (1.0 + k[0] * k[0] + k[1] * k[1]).powf(s);
            acc += self.multiplicity(q) * w * z.norm_sqr();
        }
        acc * self.volume()
    }
}

/// Samples of a real function on `T^d`.
#[derive(Clone)]
pub struct InterfaceField {
    grid: Arc<HorizontalGrid>,
    values: Vec<f64>,
}

impl fmt::Debug for InterfaceField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InterfaceField")
            .field("grid", &self.grid)
            .field("max_abs", &self.max_abs())
            .finish()
    }
}

impl InterfaceField {
    pub fn new(grid: Arc<HorizontalGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.npts() {
            return Err(Error::GridMismatch(format!(
                "expected {} samples, got {}",
                grid.npts(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("interface field"));
        }
        Ok(Self { grid, values })
    }

    /// Wraps values without validation; lengths are checked in debug builds.
    pub(crate) fn from_vec(grid: Arc<HorizontalGrid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.npts());
        Self { grid, values }
    }

    pub fn zeros(grid: &Arc<HorizontalGrid>) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &Arc<HorizontalGrid>, c: f64) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![c; grid.npts()],
        }
    }

    pub fn from_fn<F: Fn([f64; 2]) -> f64>(grid: &Arc<HorizontalGrid>, f: F) -> Self {
        let values = (0..grid.npts()).map(|p| f(grid.point(p))).collect();
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn grid(&self) -> &Arc<HorizontalGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mean(&self) -> f64 {
        self.grid.mean(&self.values)
    }

    /// `∫_{T^d} g dx'`.
    pub fn integral(&self) -> f64 {
        self.mean() * self.grid.volume()
    }

    pub fn inner(&self, other: &Self) -> f64 {
        self.grid.inner(&self.values, &other.values)
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sobolev_norm(&self, s: f64) -> f64 {
        self.grid.sobolev_norm_sq(&self.values, s).sqrt()
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        Self::from_vec(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map<F: Fn(f64, f64) -> f64>(&self, other: &Self, f: F) -> Self {
        debug_assert!(*self.grid == *other.grid);
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self::from_vec(self.grid.clone(), values)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: f64, x: &Self) {
        for (s, v) in self.values.iter_mut().zip(&x.values) {
            *s += a * v;
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    /// Pointwise product (no dealiasing).
    pub fn mul(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    /// Product evaluated with the 2/3 rule: both factors and the result are
    /// truncated to `|k_i| <= n/3`, which removes all aliasing of the
    /// quadratic interaction.
    pub fn mul_dealiased(&self, other: &Self) -> Self {
        let a = self.grid.dealias(&self.values);
        let b = self.grid.dealias(&other.values);
        let prod: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        Self::from_vec(self.grid.clone(), self.grid.dealias(&prod))
    }

    pub fn dealiased(&self) -> Self {
        Self::from_vec(self.grid.clone(), self.grid.dealias(&self.values))
    }

    pub fn derivative(&self, dir: usize) -> Self {
        Self::from_vec(self.grid.clone(), self.grid.derivative(&self.values, dir))
    }

    /// `∂_a ∂_b`.
    pub fn second_derivative(&self, a: usize, b: usize) -> Self {
        let g = &self.grid;
        let v = g.apply_symbol(&self.values, |q| {
            Complex64::new(g.second_derivative_symbol(q, a, b), 0.0)
        });
        Self::from_vec(g.clone(), v)
    }

    /// Fourier amplitude of the wavevector `k` (with `k1 >= 0`).
    pub fn mode(&self, k: [i64; 2]) -> Complex64 {
        let g = &self.grid;
        let c = g.transform(&self.values);
        let n = g.n() as i64;
        let q = if g.dim() == 1 {
            k[0] as usize
        } else {
            let i2 = k[1].rem_euclid(n) as usize;
            k[0] as usize + i2 * (g.n() / 2 + 1)
        };
        c[q]
    }
}

/// Kind of Fourier multiplier.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MultiplierKind {
    /// `⟨∇⟩^σ`, symbol `(1 + |ξ|^2)^{σ/2}`
    Bessel,
    /// `|∇|^σ`, symbol `|ξ|^σ` (the zero mode maps to zero)
    Riesz,
}

pub fn fourier_multiplier(g: &InterfaceField, sigma: f64, kind: MultiplierKind) -> Result<InterfaceField> {
    if !sigma.is_finite() {
        return Err(Error::NonFinite("multiplier exponent"));
    }
    if g.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("multiplier input"));
    }
    let grid = g.grid();
    let v = grid.apply_symbol(&g.values, |q| {
        let k = grid.wavevector(q);
        let k2 = k[0] * k[0] + k[1] * k[1];
        let s = match kind {
            MultiplierKind::Bessel => (1.0 + k2).powf(0.5 * sigma),
            MultiplierKind::Riesz if k2 == 0.0 => 0.0,
            MultiplierKind::Riesz => k2.powf(0.5 * sigma),
        };
        Complex64::new(s, 0.0)
    });
    Ok(InterfaceField::from_vec(grid.clone(), v))
}

/// `P g = g - ⟨g⟩` with `⟨g⟩` the mean over the torus.
pub fn project_mean_zero(g: &InterfaceField) -> InterfaceField {
    let m = g.mean();
    g.map(|v| v - m)
}

/// Spectral gradient; one field per horizontal direction.
pub fn horizontal_gradient(g: &InterfaceField) -> Vec<InterfaceField> {
    g.grid
        .gradient(&g.values)
        .into_iter()
        .map(|v| InterfaceField::from_vec(g.grid.clone(), v))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid1() -> Arc<HorizontalGrid> {
        HorizontalGrid::new(1, 32).unwrap()
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(HorizontalGrid::new(3, 16).is_err());
        assert!(HorizontalGrid::new(1, 6).is_err());
        assert!(HorizontalGrid::new(1, 15).is_err());
    }

    #[test]
    fn wavenumber_set_matches_convention() {
        let g = HorizontalGrid::new(2, 8).unwrap();
        let mut k2s: Vec<i64> = (0..g.ncoef()).map(|q| g.wavenumbers(q)[1]).collect();
        k2s.sort();
        k2s.dedup();
        assert_eq!(k2s, vec![-3, -2, -1, 0, 1, 2, 3, 4]);
        let k1max = (0..g.ncoef()).map(|q| g.wavenumbers(q)[0]).max().unwrap();
        assert_eq!(k1max, 4);
    }

    #[test]
    fn round_trip_2d() {
        let g = HorizontalGrid::new(2, 16).unwrap();
        let f = InterfaceField::from_fn(&g, |x| (x[0] + 2.0 * x[1]).sin() + (3.0 * x[1]).cos() * x[0].cos());
        let back = g.synthesize(&g.transform(f.values()));
        for (a, b) in f.values().iter().zip(&back) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn multiplier_examples() {
        let g = grid1();
        let c = InterfaceField::constant(&g, 2.5);
        let out = fourier_multiplier(&c, 3.0, MultiplierKind::Bessel).unwrap();
        assert!(out.values().iter().all(|v| (v - 2.5).abs() < 1e-13));

        let cosx = InterfaceField::from_fn(&g, |x| x[0].cos());
        let b2 = fourier_multiplier(&cosx, 2.0, MultiplierKind::Bessel).unwrap();
        for (o, i) in b2.values().iter().zip(cosx.values()) {
            assert_relative_eq!(*o, 2.0 * i, epsilon = 1e-13);
        }
        let r1 = fourier_multiplier(&cosx, 1.0, MultiplierKind::Riesz).unwrap();
        for (o, i) in r1.values().iter().zip(cosx.values()) {
            assert_relative_eq!(*o, *i, epsilon = 1e-13);
        }
        let mut bad = cosx.clone();
        bad.values_mut()[3] = f64::NAN;
        assert!(fourier_multiplier(&bad, 1.0, MultiplierKind::Bessel).is_err());
    }

    #[test]
    fn mean_zero_projection() {
        let g = grid1();
        let five = InterfaceField::constant(&g, 5.0);
        assert!(project_mean_zero(&five).max_abs() < 1e-14);
        let f = InterfaceField::from_fn(&g, |x| 1.0 + x[0].cos());
        let p = project_mean_zero(&f);
        for (i, v) in p.values().iter().enumerate() {
            assert!((v - g.point(i)[0].cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn gradient_examples() {
        let g = HorizontalGrid::new(2, 16).unwrap();
        let s = InterfaceField::from_fn(&g, |x| (2.0 * x[0]).sin() * x[1].cos());
        let grad = horizontal_gradient(&s);
        for p in 0..g.npts() {
            let x = g.point(p);
            assert!((grad[0].values()[p] - 2.0 * (2.0 * x[0]).cos() * x[1].cos()).abs() < 1e-12);
            assert!((grad[1].values()[p] + (2.0 * x[0]).sin() * x[1].sin()).abs() < 1e-12);
        }
        let c = InterfaceField::constant(&g, 3.0);
        assert!(horizontal_gradient(&c).iter().all(|d| d.max_abs() < 1e-13));
        let g1 = grid1();
        let sx = InterfaceField::from_fn(&g1, |x| x[0].sin());
        let d = horizontal_gradient(&sx);
        assert_eq!(d.len(), 1);
        for p in 0..g1.npts() {
            assert!((d[0].values()[p] - g1.point(p)[0].cos()).abs() < 1e-13);
        }
    }

    #[test]
    fn dealiased_product_removes_aliases() {
        let g = grid1();
        let a = InterfaceField::from_fn(&g, |x| (3.0 * x[0]).cos());
        let p = a.mul_dealiased(&a);
        for i in 0..g.npts() {
            let x = g.point(i)[0];
            assert!((p.values()[i] - 0.5 * (1.0 + (6.0 * x).cos())).abs() < 1e-13);
        }
        let hi = InterfaceField::from_fn(&g, |x| (12.0 * x[0]).cos());
        assert!(hi.mul_dealiased(&a).max_abs() < 1e-13);
    }

    #[test]
    fn sobolev_norm_of_single_mode() {
        let g = grid1();
        let c = InterfaceField::from_fn(&g, |x| (2.0 * x[0]).cos());
        // ‖cos 2x‖_{H^1}^2 = π (1 + 4)
        assert_relative_eq!(c.sobolev_norm(1.0).powi(2), 5.0 * PI, epsilon = 1e-12);
    }
}
