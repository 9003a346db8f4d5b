//! Complex scalar fields sampled on a [`GridSpec`].

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::mask::BinaryMask;

/// A complex scalar wavefunction sampled on a grid.
///
/// Storage is row-major with shape `(ny, nx)`: `values[[j, i]]` is the sample
/// at `(x_i, y_j)`. Fields are immutable once constructed; operations return
/// fresh fields.
#[derive(Clone, Debug)]
pub struct ComplexField {
    grid: GridSpec,
    values: Array2<Complex64>,
}

impl ComplexField {
    /// Wrap sample values, checking shape and finiteness.
    pub fn new(grid: GridSpec, values: Array2<Complex64>) -> Result<Self> {
        if values.dim() != (grid.ny, grid.nx) {
            return Err(Error::GridMismatch(format!(
                "value array is {:?}, grid is ({}, {})",
                values.dim(),
                grid.ny,
                grid.nx
            )));
        }
        if !values.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::domain("field contains non-finite samples"));
        }
        Ok(ComplexField { grid, values })
    }

    /// All-zero field.
    pub fn zeros(grid: GridSpec) -> Self {
        let values = Array2::zeros((grid.ny, grid.nx));
        ComplexField { grid, values }
    }

    /// Build a field by evaluating `f(x, y)` at every pixel center.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> Complex64 + Sync) -> Result<Self> {
        let mut values = Array2::zeros((grid.ny, grid.nx));
        let g = grid.clone();
        ndarray::Zip::indexed(&mut values).par_for_each(|(j, i), v| {
            *v = f(g.x(i), g.y(j));
        });
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &Array2<Complex64> {
        &self.values
    }

    /// Total power `sum |psi|^2 * pitch^2`.
    pub fn power(&self) -> f64 {
        let area = self.grid.pitch * self.grid.pitch;
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * area
    }

    /// Largest sample magnitude.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.norm()))
    }

    /// Peak intensity `max |psi|^2`.
    pub fn peak_intensity(&self) -> f64 {
        let m = self.max_abs();
        m * m
    }

    /// Rescaled copy with unit power. Fails on an (effectively) zero field.
    pub fn normalized(&self) -> Result<Self> {
        let p = self.power();
        if p <= 0.0 {
            return Err(Error::domain("cannot normalize a zero-power field"));
        }
        Ok(self.scaled(Complex64::new(1.0 / p.sqrt(), 0.0)))
    }

    /// Copy multiplied by a complex constant.
    pub fn scaled(&self, c: Complex64) -> Self {
        let mut values = self.values.clone();
        values.par_mapv_inplace(|v| v * c);
        ComplexField { grid: self.grid.clone(), values }
    }

    /// Thin-screen transmission: pointwise product with a binary mask.
    pub fn apply_mask(&self, mask: &BinaryMask) -> Result<Self> {
        if mask.grid() != &self.grid {
            return Err(Error::GridMismatch(
                "mask and field are sampled on different grids".into(),
            ));
        }
        let mut values = self.values.clone();
        ndarray::Zip::from(&mut values)
            .and(mask.open())
            .par_for_each(|v, &open| {
                if !open {
                    *v = Complex64::new(0.0, 0.0);
                }
            });
        Ok(ComplexField { grid: self.grid.clone(), values })
    }

    /// Bilinear sample at a physical point. The point must be at least one
    /// pixel away from the grid border.
    pub fn sample(&self, x: f64, y: f64) -> Result<Complex64> {
        if !self.grid.contains(x, y, 1.0) {
            return Err(Error::analysis(format!(
                "sample point ({x:.3e}, {y:.3e}) m falls outside the interpolable grid area"
            )));
        }
        let c = self.grid.col_of(x);
        let r = self.grid.row_of(y);
        let i0 = c.floor() as usize;
        let j0 = r.floor() as usize;
        let fx = c - i0 as f64;
        let fy = r - j0 as f64;
        let v00 = self.values[[j0, i0]];
        let v01 = self.values[[j0, i0 + 1]];
        let v10 = self.values[[j0 + 1, i0]];
        let v11 = self.values[[j0 + 1, i0 + 1]];
        Ok(v00 * ((1.0 - fx) * (1.0 - fy))
            + v01 * (fx * (1.0 - fy))
            + v10 * ((1.0 - fx) * fy)
            + v11 * (fx * fy))
    }

    /// Bilinear intensity sample `|psi|^2` at a physical point.
    pub fn intensity_at(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.sample(x, y)?.norm_sqr())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> GridSpec {
        GridSpec::square(32, 1e-6, 500e-9).unwrap()
    }

    #[test]
    fn power_of_uniform_field() {
        let f = ComplexField::from_fn(grid(), |_, _| Complex64::new(1.0, 0.0)).unwrap();
        let expect = 32.0 * 32.0 * 1e-12;
        assert!((f.power() - expect).abs() < 1e-18);
    }

    #[test]
    fn normalize_gives_unit_power() {
        let f = ComplexField::from_fn(grid(), |x, y| Complex64::new(x * 1e6, y * 1e6)).unwrap();
        let n = f.normalized().unwrap();
        assert!((n.power() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normalize_zero_field_fails() {
        let f = ComplexField::zeros(grid());
        assert_eq!(f.power(), 0.0);
        assert!(f.normalized().is_err());
    }

    #[test]
    fn rejects_non_finite_samples() {
        let mut values = Array2::zeros((32, 32));
        values[[3, 3]] = Complex64::new(f64::NAN, 0.0);
        assert!(ComplexField::new(grid(), values).is_err());
    }

    #[test]
    fn bilinear_sampling_reproduces_linear_ramp() {
        let f = ComplexField::from_fn(grid(), |x, y| Complex64::new(2.0 * x + y, 0.0)).unwrap();
        let got = f.sample(3.25e-6, -2.5e-6).unwrap();
        assert!((got.re - (2.0 * 3.25e-6 - 2.5e-6)).abs() < 1e-18);
    }

    #[test]
    fn sampling_outside_grid_fails() {
        let f = ComplexField::zeros(grid());
        assert!(f.sample(20e-6, 0.0).is_err());
    }
}
