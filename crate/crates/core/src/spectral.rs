//! Fourier-space operators: the spectral derivative, the inverse Helmholtz
//! operator `(1 - d^2/dx^2)^{-1}`, their fused composition, the 2/3-rule
//! dealiasing filter, and trigonometric interpolation off the grid.
//!
//! All operators act mode-by-mode on the discrete Fourier transform of a
//! field. The derivative symbol is `i k` with the Nyquist mode zeroed (the
//! usual odd-symbol convention that keeps real data real); the inverse
//! Helmholtz symbol is `1 / (1 + k^2)`. On band-limited data both are exact
//! up to rounding. The closed-form convolution kernels stay available via
//! `Grid::kernel_samples` so tests can cross-validate this implementation
//! against direct discrete convolution.

use std::sync::Mutex;

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;

static PLANNER: Mutex<Option<FftPlanner<f64>>> = Mutex::new(None);

fn plan(n: usize, forward: bool) -> std::sync::Arc<dyn rustfft::Fft<f64>> {
    let mut guard = PLANNER.lock().expect("FFT planner poisoned");
    let planner = guard.get_or_insert_with(FftPlanner::new);
    if forward {
        planner.plan_fft_forward(n)
    } else {
        planner.plan_fft_inverse(n)
    }
}

/// Unnormalized forward DFT of the samples.
pub(crate) fn forward(f: &Field) -> Vec<Complex<f64>> {
    let mut buf: Vec<Complex<f64>> = f
        .values()
        .iter()
        .map(|&v| Complex::new(v, 0.0))
        .collect();
    plan(buf.len(), true).process(&mut buf);
    buf
}

/// Inverse DFT back to real samples (imaginary parts are discarded; they
/// are rounding noise whenever the spectrum is conjugate-symmetric).
pub(crate) fn inverse_real(grid: &std::sync::Arc<Grid>, mut spectrum: Vec<Complex<f64>>) -> Field {
    let n = spectrum.len();
    plan(n, false).process(&mut spectrum);
    let scale = 1.0 / n as f64;
    let values = spectrum.iter().map(|c| c.re * scale).collect();
    Field::from_values_unchecked(grid.clone(), values)
}

fn apply_symbol(f: &Field, zero_nyquist: bool, symbol: impl Fn(f64) -> Complex<f64>) -> Field {
    let grid = f.grid().clone();
    let mut spec = forward(f);
    for (c, &k) in spec.iter_mut().zip(grid.wavenumbers()) {
        *c *= symbol(k);
    }
    if zero_nyquist {
        spec[grid.nyquist_index()] = Complex::new(0.0, 0.0);
    }
    inverse_real(&grid, spec)
}

/// Spectral derivative d/dx. Exact on band-limited trigonometric data; the
/// Nyquist mode of the result is zeroed.
pub fn deriv(f: &Field) -> Field {
    apply_symbol(f, true, |k| Complex::new(0.0, k))
}

/// Inverse Helmholtz operator `(1 - d^2/dx^2)^{-1}`, i.e. division of mode
/// `k` by `1 + k^2`. Equals convolution with the domain's exponential-type
/// kernel up to discretization error.
pub fn helmholtz_inverse(f: &Field) -> Field {
    apply_symbol(f, false, |k| Complex::new(1.0 / (1.0 + k * k), 0.0))
}

/// Fused `d/dx (1 - d^2/dx^2)^{-1}`: mode `k` is multiplied by
/// `i k / (1 + k^2)`, Nyquist zeroed.
pub fn dx_helmholtz_inverse(f: &Field) -> Field {
    apply_symbol(f, true, |k| Complex::new(0.0, k / (1.0 + k * k)))
}

/// 2/3-rule low-pass filter: modes with index magnitude above `n/3` are
/// zeroed. Applied to pointwise products to stop quadratic aliasing from
/// feeding back into the resolved modes.
pub fn dealias(f: &Field) -> Field {
    let grid = f.grid().clone();
    let n = grid.n();
    let cutoff = n / 3;
    let mut spec = forward(f);
    for (j, c) in spec.iter_mut().enumerate() {
        let m = if j <= n / 2 { j } else { n - j };
        if m > cutoff {
            *c = Complex::new(0.0, 0.0);
        }
    }
    inverse_real(&grid, spec)
}

/// Pointwise product followed by the 2/3-rule filter.
pub fn dealiased_product(a: &Field, b: &Field) -> Field {
    dealias(&a.product(b))
}

/// Arithmetic mean of the samples; identical to the zeroth Fourier mode
/// divided by `n`, and `mean * length` is the spectrally accurate (i.e.
/// trapezoid-equivalent) quadrature of the field over the domain.
pub fn spectral_mean(f: &Field) -> f64 {
    f.mean()
}

/// The antiderivative with zero mean, defined mode-wise by division by
/// `i k`. The input must have (numerically) zero mean; the Nyquist mode of
/// the result is zeroed like every odd symbol.
pub fn zero_mean_antiderivative(f: &Field, what: &'static str) -> Result<Field> {
    let mean = f.mean();
    if mean.abs() > 1e-10 * f.max_abs().max(1.0) {
        return Err(Error::NonZeroMean { what, mean });
    }
    let grid = f.grid().clone();
    let mut spec = forward(f);
    spec[0] = Complex::new(0.0, 0.0);
    let nyq = grid.nyquist_index();
    for (j, (c, &k)) in spec.iter_mut().zip(grid.wavenumbers()).enumerate() {
        if j != 0 && j != nyq {
            *c /= Complex::new(0.0, k);
        }
    }
    spec[nyq] = Complex::new(0.0, 0.0);
    Ok(inverse_real(&grid, spec))
}

/// Trigonometric interpolant of a field, evaluated at arbitrary points.
/// Exact on band-limited data; periodic in the domain length, so points
/// outside the fundamental domain are evaluated on their wrapped image.
#[derive(Debug, Clone)]
pub struct FourierInterpolant {
    origin: f64,
    length: f64,
    mean: f64,
    // cosine/sine amplitudes for modes 1 .. n/2-1, plus the Nyquist cosine
    cos_amp: Vec<f64>,
    sin_amp: Vec<f64>,
    wavenumbers: Vec<f64>,
    nyquist_amp: f64,
    nyquist_k: f64,
}

impl FourierInterpolant {
    pub fn new(f: &Field) -> Self {
        let grid = f.grid();
        let n = grid.n();
        let spec = forward(f);
        let inv_n = 1.0 / n as f64;
        let half = n / 2;
        let mut cos_amp = Vec::with_capacity(half - 1);
        let mut sin_amp = Vec::with_capacity(half - 1);
        let mut wavenumbers = Vec::with_capacity(half - 1);
        for m in 1..half {
            cos_amp.push(2.0 * spec[m].re * inv_n);
            sin_amp.push(-2.0 * spec[m].im * inv_n);
            wavenumbers.push(grid.wavenumbers()[m]);
        }
        FourierInterpolant {
            origin: grid.origin(),
            length: grid.length(),
            mean: spec[0].re * inv_n,
            cos_amp,
            sin_amp,
            wavenumbers,
            nyquist_amp: spec[half].re * inv_n,
            nyquist_k: grid.wavenumbers()[half],
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_with_deriv(x).0
    }

    /// Value and spatial derivative of the interpolant at `x`.
    pub fn eval_with_deriv(&self, x: f64) -> (f64, f64) {
        let d = (x - self.origin).rem_euclid(self.length);
        let mut value = self.mean;
        let mut slope = 0.0;
        for ((&a, &b), &k) in self
            .cos_amp
            .iter()
            .zip(&self.sin_amp)
            .zip(&self.wavenumbers)
        {
            let (s, c) = (k * d).sin_cos();
            value += a * c + b * s;
            slope += k * (b * c - a * s);
        }
        let (s, c) = (self.nyquist_k * d).sin_cos();
        value += self.nyquist_amp * c;
        slope -= self.nyquist_amp * self.nyquist_k * s;
        (value, slope)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridKind;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn circle(n: usize) -> Arc<Grid> {
        Grid::new(GridKind::PeriodicCircle, n, 1.0).unwrap()
    }

    #[test]
    fn deriv_of_constant_is_zero() {
        let f = Field::constant(circle(64), 3.7).unwrap();
        assert!(deriv(&f).max_abs() < 1e-13);
    }

    #[test]
    fn deriv_of_single_mode_is_exact() {
        let g = circle(64);
        let f = Field::from_fn(g.clone(), |x| (2.0 * PI * x).sin()).unwrap();
        let expected = Field::from_fn(g, |x| 2.0 * PI * (2.0 * PI * x).cos()).unwrap();
        let got = deriv(&f);
        let err: f64 = got
            .values()
            .iter()
            .zip(expected.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-12 * expected.max_abs());
    }

    #[test]
    fn deriv_matches_analytic_differentiation() {
        // Oracle: differentiate sin(2 pi x) + cos(4 pi x) by hand.
        let g = circle(128);
        let f = Field::from_fn(g.clone(), |x| {
            (2.0 * PI * x).sin() + (4.0 * PI * x).cos()
        })
        .unwrap();
        let oracle = Field::from_fn(g, |x| {
            2.0 * PI * (2.0 * PI * x).cos() - 4.0 * PI * (4.0 * PI * x).sin()
        })
        .unwrap();
        let got = deriv(&f);
        for (a, b) in got.values().iter().zip(oracle.values()) {
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn helmholtz_inverse_fixes_constants() {
        let f = Field::constant(circle(32), -2.5).unwrap();
        let g = helmholtz_inverse(&f);
        for v in g.values() {
            assert!((v + 2.5).abs() < 1e-13);
        }
    }

    #[test]
    fn helmholtz_inverse_eigenfunction() {
        for k in [1usize, 3, 7] {
            let g = circle(64);
            let omega = 2.0 * PI * k as f64;
            let f = Field::from_fn(g.clone(), |x| (omega * x).cos()).unwrap();
            let expected =
                Field::from_fn(g, |x| (omega * x).cos() / (1.0 + omega * omega)).unwrap();
            let got = helmholtz_inverse(&f);
            let err: f64 = got
                .values()
                .iter()
                .zip(expected.values())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-12 * expected.max_abs());
        }
    }

    #[test]
    fn helmholtz_inverse_matches_kernel_self_convolution() {
        // The inverse applied to the kernel itself must reproduce the
        // closed-form self-convolution of exp(-|x|)/2, which is
        // (1 + |x|) exp(-|x|) / 4. The kink at 0 limits accuracy to
        // O(h^2), hence the large n.
        let g = Grid::new(GridKind::TruncatedLine, 32768, 30.0).unwrap();
        let kernel = g.kernel_samples();
        let got = helmholtz_inverse(&kernel);
        let mut max_err: f64 = 0.0;
        for (&x, &v) in g.nodes().iter().zip(got.values()) {
            if x.abs() <= 15.0 {
                let expected = (1.0 + x.abs()) * (-x.abs()).exp() / 4.0;
                max_err = max_err.max((v - expected).abs());
            }
        }
        assert!(max_err < 1e-6, "interior error {max_err}");
    }

    #[test]
    fn dx_helmholtz_inverse_of_constant_is_zero() {
        let f = Field::constant(circle(32), 4.0).unwrap();
        assert!(dx_helmholtz_inverse(&f).max_abs() < 1e-13);
    }

    #[test]
    fn dx_helmholtz_inverse_eigenfunction() {
        let g = circle(64);
        let omega = 2.0 * PI;
        let f = Field::from_fn(g.clone(), |x| (omega * x).sin()).unwrap();
        let expected =
            Field::from_fn(g, |x| omega * (omega * x).cos() / (1.0 + omega * omega)).unwrap();
        let got = dx_helmholtz_inverse(&f);
        let err: f64 = got
            .values()
            .iter()
            .zip(expected.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn fused_operator_equals_composition() {
        let g = circle(256);
        let f = Field::from_fn(g, |x| {
            (2.0 * PI * x).sin() + 0.3 * (8.0 * PI * x).cos() + 0.1
        })
        .unwrap();
        let fused = dx_helmholtz_inverse(&f);
        let composed = deriv(&helmholtz_inverse(&f));
        for (a, b) in fused.values().iter().zip(composed.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn dealias_zeroes_high_modes_only() {
        let g = circle(64); // cutoff at |m| = 21
        let f = Field::from_fn(g.clone(), |x| {
            (2.0 * PI * 5.0 * x).cos() + (2.0 * PI * 30.0 * x).cos()
        })
        .unwrap();
        let filtered = dealias(&f);
        let expected = Field::from_fn(g, |x| (2.0 * PI * 5.0 * x).cos()).unwrap();
        for (a, b) in filtered.values().iter().zip(expected.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn dealiased_product_is_exact_when_resolved() {
        let g = circle(64);
        let a = Field::from_fn(g.clone(), |x| (2.0 * PI * 3.0 * x).cos()).unwrap();
        let b = Field::from_fn(g.clone(), |x| (2.0 * PI * 4.0 * x).sin()).unwrap();
        // product has modes 1 and 7, both inside the 2/3 cutoff of 21
        let got = dealiased_product(&a, &b);
        let expected = Field::from_fn(g, |x| {
            (2.0 * PI * 3.0 * x).cos() * (2.0 * PI * 4.0 * x).sin()
        })
        .unwrap();
        for (u, v) in got.values().iter().zip(expected.values()) {
            assert!((u - v).abs() < 1e-13);
        }
    }

    #[test]
    fn antiderivative_inverts_derivative() {
        let g = circle(64);
        let v = Field::from_fn(g, |x| (2.0 * PI * x).sin() + 0.5 * (4.0 * PI * x).cos()).unwrap();
        let z = zero_mean_antiderivative(&v, "test").unwrap();
        assert!(z.mean().abs() < 1e-14);
        let back = deriv(&z);
        for (a, b) in back.values().iter().zip(v.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn antiderivative_rejects_nonzero_mean() {
        let g = circle(32);
        let v = Field::constant(g, 1.0).unwrap();
        assert!(matches!(
            zero_mean_antiderivative(&v, "test"),
            Err(Error::NonZeroMean { .. })
        ));
    }

    #[test]
    fn interpolant_reproduces_nodes_and_off_grid_values() {
        let g = circle(64);
        let f = Field::from_fn(g.clone(), |x| {
            0.2 + (2.0 * PI * x).sin() - 0.4 * (6.0 * PI * x).cos()
        })
        .unwrap();
        let interp = FourierInterpolant::new(&f);
        for (&x, &v) in g.nodes().iter().zip(f.values()) {
            assert!((interp.eval(x) - v).abs() < 1e-13);
        }
        for &x in &[0.013, 0.377, 0.961, 1.25, -0.1] {
            let expected = 0.2 + (2.0 * PI * x).sin() - 0.4 * (6.0 * PI * x).cos();
            let expected_slope =
                2.0 * PI * (2.0 * PI * x).cos() + 0.4 * 6.0 * PI * (6.0 * PI * x).sin();
            let (value, slope) = interp.eval_with_deriv(x);
            assert!((value - expected).abs() < 1e-12);
            assert!((slope - expected_slope).abs() < 1e-10);
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        /// Band-limited field with random coefficients on modes 1..=kmax.
        fn band_limited(
            n: usize,
            kmax: usize,
        ) -> impl Strategy<Value = (Vec<f64>, Vec<f64>, f64)> {
            let _ = n;
            (
                proptest::collection::vec(-1.0..1.0f64, kmax),
                proptest::collection::vec(-1.0..1.0f64, kmax),
                -1.0..1.0f64,
            )
        }

        fn build(g: &Arc<Grid>, coeffs: &(Vec<f64>, Vec<f64>, f64)) -> Field {
            let (a, b, c0) = coeffs;
            Field::from_fn(g.clone(), |x| {
                let mut v = *c0;
                for (m, (am, bm)) in a.iter().zip(b).enumerate() {
                    let w = 2.0 * PI * (m + 1) as f64 * x;
                    v += am * w.cos() + bm * w.sin();
                }
                v
            })
            .unwrap()
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn second_derivative_identity(coeffs in band_limited(64, 12)) {
                // d^2/dx^2 (1-d^2/dx^2)^{-1} = (1-d^2/dx^2)^{-1} - 1
                let g = circle(64);
                let f = build(&g, &coeffs);
                let hf = helmholtz_inverse(&f);
                let lhs = deriv(&deriv(&hf));
                let rhs = hf.axpy(-1.0, &f);
                let resid: f64 = lhs
                    .values()
                    .iter()
                    .zip(rhs.values())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                prop_assert!(resid <= 1e-10 * f.max_abs().max(1e-12));
            }

            #[test]
            fn operators_are_linear(
                ca in band_limited(64, 10),
                cb in band_limited(64, 10),
                alpha in -2.0..2.0f64,
                beta in -2.0..2.0f64,
            ) {
                let g = circle(64);
                let fa = build(&g, &ca);
                let fb = build(&g, &cb);
                let combo = fa.scale(alpha).axpy(beta, &fb);
                for op in [deriv, helmholtz_inverse, dx_helmholtz_inverse] {
                    let lhs = op(&combo);
                    let rhs = op(&fa).scale(alpha).axpy(beta, &op(&fb));
                    let scale = lhs.max_abs().max(1.0);
                    for (x, y) in lhs.values().iter().zip(rhs.values()) {
                        prop_assert!((x - y).abs() <= 1e-12 * scale);
                    }
                }
            }
        }
    }
}
