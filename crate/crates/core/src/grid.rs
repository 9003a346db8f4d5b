//! Sampled simulation plane: pixel counts, pixel pitch and wavelength.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Description of a sampled 2-D plane.
///
/// The coordinate convention shared by every module: x points right, y points
/// up, and the origin sits on the pixel with indices `(nx/2, ny/2)`, so pixel
/// `i` along x is at `x = (i - nx/2) * pitch` and the azimuth is
/// `phi = atan2(y, x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Pixel count along x.
    pub nx: usize,
    /// Pixel count along y.
    pub ny: usize,
    /// Pixel pitch in meters (square pixels).
    pub pitch: f64,
    /// Wavelength in meters.
    pub wavelength: f64,
}

pub const MIN_GRID: usize = 16;

impl GridSpec {
    pub fn new(nx: usize, ny: usize, pitch: f64, wavelength: f64) -> Result<Self> {
        if nx < MIN_GRID || ny < MIN_GRID {
            return Err(Error::domain(format!(
                "grid must be at least {MIN_GRID}x{MIN_GRID}, got {nx}x{ny}"
            )));
        }
        if !(pitch > 0.0) || !pitch.is_finite() {
            return Err(Error::domain(format!("pitch must be positive, got {pitch}")));
        }
        if !(wavelength > 0.0) || !wavelength.is_finite() {
            return Err(Error::domain(format!(
                "wavelength must be positive, got {wavelength}"
            )));
        }
        Ok(GridSpec { nx, ny, pitch, wavelength })
    }

    /// Square grid shorthand.
    pub fn square(n: usize, pitch: f64, wavelength: f64) -> Result<Self> {
        Self::new(n, n, pitch, wavelength)
    }

    /// Physical extent along x in meters.
    pub fn extent_x(&self) -> f64 {
        self.nx as f64 * self.pitch
    }

    /// Physical extent along y in meters.
    pub fn extent_y(&self) -> f64 {
        self.ny as f64 * self.pitch
    }

    /// x coordinate of pixel column `i`.
    pub fn x(&self, i: usize) -> f64 {
        (i as f64 - (self.nx / 2) as f64) * self.pitch
    }

    /// y coordinate of pixel row `j`.
    pub fn y(&self, j: usize) -> f64 {
        (j as f64 - (self.ny / 2) as f64) * self.pitch
    }

    /// Fractional column index of physical coordinate `x`.
    pub fn col_of(&self, x: f64) -> f64 {
        x / self.pitch + (self.nx / 2) as f64
    }

    /// Fractional row index of physical coordinate `y`.
    pub fn row_of(&self, y: f64) -> f64 {
        y / self.pitch + (self.ny / 2) as f64
    }

    /// Vacuum wavenumber `2*pi / wavelength`.
    pub fn wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavelength
    }

    /// Centered spatial frequency (cycles per meter) of spectrum column `i`.
    pub fn freq_x(&self, i: usize) -> f64 {
        (i as f64 - (self.nx / 2) as f64) / self.extent_x()
    }

    /// Centered spatial frequency (cycles per meter) of spectrum row `j`.
    pub fn freq_y(&self, j: usize) -> f64 {
        (j as f64 - (self.ny / 2) as f64) / self.extent_y()
    }

    /// True when a physical point lies on the sampled plane with `margin_px`
    /// pixels to spare on every side (bilinear interpolation needs one).
    pub fn contains(&self, x: f64, y: f64, margin_px: f64) -> bool {
        let c = self.col_of(x);
        let r = self.row_of(y);
        c >= margin_px
            && c <= self.nx as f64 - 1.0 - margin_px
            && r >= margin_px
            && r <= self.ny as f64 - 1.0 - margin_px
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn center_pixel_is_origin() {
        let g = GridSpec::square(64, 1e-6, 500e-9).unwrap();
        assert_eq!(g.x(32), 0.0);
        assert_eq!(g.y(32), 0.0);
        assert_eq!(g.x(0), -32e-6);
        assert!((g.extent_x() - 64e-6).abs() < 1e-18);
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(GridSpec::square(8, 1e-6, 1e-9).is_err());
        assert!(GridSpec::square(64, 0.0, 1e-9).is_err());
        assert!(GridSpec::square(64, 1e-6, -1.0).is_err());
    }

    #[test]
    fn frequency_axis_is_centered() {
        let g = GridSpec::square(16, 2e-6, 500e-9).unwrap();
        assert_eq!(g.freq_x(8), 0.0);
        let df = 1.0 / g.extent_x();
        assert!((g.freq_x(9) - df).abs() < 1e-9 * df);
        assert!((g.freq_x(0) + 8.0 * df).abs() < 1e-9 * df);
    }
}
