//! Centered 2-D FFT helpers on ndarray storage.
//!
//! `fft2_centered` computes the spectrum of a field whose origin sits on pixel
//! `(ny/2, nx/2)`, returning it with DC on that same pixel:
//! `fftshift(FFT2(ifftshift(x)))`. Row transforms run in parallel; each row is
//! independent so results do not depend on the thread count.

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::sync::Arc;

fn cyclic_shifted(a: &Array2<Complex64>, by_row: usize, by_col: usize) -> Array2<Complex64> {
    let (ny, nx) = a.dim();
    Array2::from_shape_fn((ny, nx), |(j, i)| a[[(j + by_row) % ny, (i + by_col) % nx]])
}

fn fft_rows_inplace(a: &mut Array2<Complex64>, fft: &Arc<dyn Fft<f64>>) {
    let nx = a.dim().1;
    a.as_slice_mut()
        .expect("row-major layout")
        .par_chunks_exact_mut(nx)
        .for_each_init(
            || vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()],
            |scratch, row| fft.process_with_scratch(row, scratch),
        );
}

fn fft2_raw(mut a: Array2<Complex64>, direction: FftDirection) -> Array2<Complex64> {
    let (ny, nx) = a.dim();
    let mut planner = FftPlanner::new();
    let row_fft = planner.plan_fft(nx, direction);
    let col_fft = planner.plan_fft(ny, direction);

    fft_rows_inplace(&mut a, &row_fft);
    let mut t = a.reversed_axes().as_standard_layout().to_owned();
    fft_rows_inplace(&mut t, &col_fft);
    t.reversed_axes().as_standard_layout().to_owned()
}

/// Forward centered 2-D FFT (unnormalized).
pub fn fft2_centered(a: &Array2<Complex64>) -> Array2<Complex64> {
    let (ny, nx) = a.dim();
    let pre = cyclic_shifted(a, ny / 2, nx / 2);
    let out = fft2_raw(pre, FftDirection::Forward);
    cyclic_shifted(&out, (ny + 1) / 2, (nx + 1) / 2)
}

/// Inverse centered 2-D FFT, normalized by `1/(nx*ny)` so that
/// `ifft2_centered(fft2_centered(x)) == x` up to rounding.
pub fn ifft2_centered(a: &Array2<Complex64>) -> Array2<Complex64> {
    let (ny, nx) = a.dim();
    let pre = cyclic_shifted(a, ny / 2, nx / 2);
    let mut out = fft2_raw(pre, FftDirection::Inverse);
    let scale = 1.0 / (nx as f64 * ny as f64);
    out.par_mapv_inplace(|v| v * scale);
    cyclic_shifted(&out, (ny + 1) / 2, (nx + 1) / 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centered_impulse_has_flat_spectrum() {
        for n in [16usize, 17] {
            let mut a = Array2::zeros((n, n));
            a[[n / 2, n / 2]] = Complex64::new(1.0, 0.0);
            let s = fft2_centered(&a);
            for v in s.iter() {
                assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-12, "n={n}");
            }
        }
    }

    #[test]
    fn plane_wave_maps_to_single_bin() {
        let n = 32usize;
        let p = 5i64;
        let a = Array2::from_shape_fn((n, n), |(_, i)| {
            let x = i as f64 - (n / 2) as f64;
            Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * p as f64 * x / n as f64)
        });
        let s = fft2_centered(&a);
        // exp(+2 pi i p x / L) appears at frequency bin center + p
        let hot = s[[n / 2, (n as i64 / 2 + p) as usize]];
        assert!((hot.norm() - (n * n) as f64).abs() < 1e-6);
        let total: f64 = s.iter().map(|v| v.norm_sqr()).sum();
        assert!((total - hot.norm_sqr()).abs() < 1e-4 * total);
    }

    #[test]
    fn round_trip_and_parseval() {
        let n = 24usize;
        let a = Array2::from_shape_fn((n, n), |(j, i)| {
            Complex64::new((i * 7 % 5) as f64 - 2.0, (j * 3 % 7) as f64 - 3.0)
        });
        let s = fft2_centered(&a);
        let b = ifft2_centered(&s);
        let err: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm_sqr()).sum();
        assert!(err < 1e-20);
        let pa: f64 = a.iter().map(|v| v.norm_sqr()).sum();
        let ps: f64 = s.iter().map(|v| v.norm_sqr()).sum();
        assert!((ps - pa * (n * n) as f64).abs() < 1e-9 * ps);
    }
}
