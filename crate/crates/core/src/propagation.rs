//! Field propagation between planes: band-limited angular-spectrum and
//! Fresnel transfer kernels for free space, plus the ideal-lens Fourier
//! transform to the diffraction plane.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fft::{fft2_centered, ifft2_centered};
use crate::field::ComplexField;
use crate::grid::GridSpec;

/// Default frequency-space band limit as a fraction of Nyquist.
pub const DEFAULT_BAND_LIMIT: f64 = 0.95;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PropagationMethod {
    AngularSpectrum,
    FresnelTransfer,
    LensFourier,
}

/// A reusable propagation recipe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagationPlan {
    pub method: PropagationMethod,
    /// Propagation distance z (free-space methods) or focal length f (lens).
    pub distance: f64,
    /// Hard circular frequency window, as a fraction of Nyquist in (0, 1].
    /// A value of exactly 1 disables the window.
    pub band_limit: f64,
    /// Active aperture diameter, if known; used by the sampling guard.
    pub aperture_diameter: Option<f64>,
}

impl PropagationPlan {
    pub fn angular_spectrum(z: f64) -> Self {
        PropagationPlan {
            method: PropagationMethod::AngularSpectrum,
            distance: z,
            band_limit: DEFAULT_BAND_LIMIT,
            aperture_diameter: None,
        }
    }

    pub fn fresnel_transfer(z: f64) -> Self {
        PropagationPlan {
            method: PropagationMethod::FresnelTransfer,
            distance: z,
            band_limit: DEFAULT_BAND_LIMIT,
            aperture_diameter: None,
        }
    }

    pub fn lens_fourier(f: f64) -> Self {
        PropagationPlan {
            method: PropagationMethod::LensFourier,
            distance: f,
            band_limit: 1.0,
            aperture_diameter: None,
        }
    }

    pub fn with_band_limit(mut self, band_limit: f64) -> Result<Self> {
        if !(band_limit > 0.0 && band_limit <= 1.0) {
            return Err(Error::domain(format!(
                "band limit must lie in (0,1], got {band_limit}"
            )));
        }
        self.band_limit = band_limit;
        Ok(self)
    }

    pub fn with_aperture(mut self, diameter: f64) -> Self {
        self.aperture_diameter = Some(diameter);
        self
    }
}

/// Execute a plan.
pub fn propagate(field: &ComplexField, plan: &PropagationPlan) -> Result<ComplexField> {
    match plan.method {
        PropagationMethod::AngularSpectrum => {
            angular_spectrum_propagate(field, plan.distance, plan.band_limit)
        }
        PropagationMethod::FresnelTransfer => {
            fresnel_transfer_propagate(field, plan.distance, plan.band_limit)
        }
        PropagationMethod::LensFourier => lens_fourier_transform(field, plan.distance),
    }
}

/// `(a * b) mod 2*pi`, with the product formed in double-double precision so
/// that the reduced angle stays accurate even when `a * b` is ~1e9 rad (the
/// plane-wave carrier `k z` at picometer wavelengths). Without this the
/// composition identities propagate(z1)+propagate(z2) == propagate(z1+z2)
/// drift at the ~1e-7 level.
pub(crate) fn reduce_angle_product(a: f64, b: f64) -> f64 {
    const TP_HI: f64 = 6.283185307179586; // 2*pi rounded
    const TP_LO: f64 = 2.4492935982947064e-16; // 2*pi - TP_HI
    let hi = a * b;
    let lo = f64::mul_add(a, b, -hi);
    let q = (hi / TP_HI).round();
    let p = q * TP_HI;
    let e = f64::mul_add(q, TP_HI, -p);
    ((hi - p) - e) - q * TP_LO + lo
}

fn kernel_propagate(
    field: &ComplexField,
    z: f64,
    band_limit: f64,
    kernel: impl Fn(f64, f64, f64, Complex64) -> Complex64 + Sync,
) -> Result<ComplexField> {
    if !z.is_finite() {
        return Err(Error::domain(format!("propagation distance must be finite, got {z}")));
    }
    if !(band_limit > 0.0 && band_limit <= 1.0) {
        return Err(Error::domain(format!(
            "band limit must lie in (0,1], got {band_limit}"
        )));
    }
    if z == 0.0 {
        return Ok(field.clone());
    }
    let grid = field.grid().clone();
    let k = grid.wavenumber();
    let k_nyq = PI / grid.pitch;
    let k_cut2 = if band_limit < 1.0 {
        Some((band_limit * k_nyq) * (band_limit * k_nyq))
    } else {
        None
    };
    // carrier exp(i k z), angle-reduced
    let carrier = Complex64::from_polar(1.0, reduce_angle_product(k, z));
    let mut spectrum = fft2_centered(field.values());
    ndarray::Zip::indexed(&mut spectrum).par_for_each(|(j, i), v| {
        let kx = 2.0 * PI * grid.freq_x(i);
        let ky = 2.0 * PI * grid.freq_y(j);
        let kt2 = kx * kx + ky * ky;
        if let Some(cut) = k_cut2 {
            if kt2 > cut {
                *v = Complex64::new(0.0, 0.0);
                return;
            }
        }
        *v *= kernel(kt2, k, z, carrier);
    });
    let values = ifft2_centered(&spectrum);
    ComplexField::new(grid, values)
}

/// Exact scalar free-space propagation over a distance `z`.
///
/// Propagating components acquire `exp(i z sqrt(k^2 - kt^2))`, evaluated as
/// the carrier `exp(i k z)` times `exp(-i z kt^2/(k_z + k))` to avoid
/// catastrophic cancellation. Evanescent components decay per the exact
/// kernel for `z > 0` and are zeroed for `z < 0` so that inverse propagation
/// never amplifies them.
pub fn angular_spectrum_propagate(
    field: &ComplexField,
    z: f64,
    band_limit: f64,
) -> Result<ComplexField> {
    kernel_propagate(field, z, band_limit, |kt2, k, z, carrier| {
        let kz2 = k * k - kt2;
        if kz2 >= 0.0 {
            // z*(k_z - k) = -z*kt2/(k_z + k)
            carrier * Complex64::from_polar(1.0, -z * kt2 / (kz2.sqrt() + k))
        } else if z > 0.0 {
            Complex64::new((-(-kz2).sqrt() * z).exp(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Paraxial (Fresnel) transfer-function propagation over a distance `z`:
/// kernel `exp(i k z) * exp(-i z kt^2 / (2 k))`.
pub fn fresnel_transfer_propagate(
    field: &ComplexField,
    z: f64,
    band_limit: f64,
) -> Result<ComplexField> {
    kernel_propagate(field, z, band_limit, |kt2, k, z, carrier| {
        carrier * Complex64::from_polar(1.0, -z * kt2 / (2.0 * k))
    })
}

/// Ideal-lens Fraunhofer transform: the output samples the far field at
/// plane coordinates `x' = lambda f nu`, on a grid with pitch
/// `lambda f / (nx pitch)`. Total power is conserved.
pub fn lens_fourier_transform(field: &ComplexField, focal_length: f64) -> Result<ComplexField> {
    if !(focal_length > 0.0) || !focal_length.is_finite() {
        return Err(Error::domain(format!(
            "focal length must be positive, got {focal_length}"
        )));
    }
    let grid = field.grid();
    if grid.nx != grid.ny {
        return Err(Error::domain(format!(
            "lens transform requires a square grid (got {}x{}): the output pitch \
             lambda*f/(n*pitch) must be isotropic",
            grid.nx, grid.ny
        )));
    }
    let lambda_f = grid.wavelength * focal_length;
    let out_pitch = lambda_f / (grid.nx as f64 * grid.pitch);
    let out_grid = GridSpec::new(grid.nx, grid.ny, out_pitch, grid.wavelength)?;
    let mut spectrum = fft2_centered(field.values());
    let scale = grid.pitch * grid.pitch / lambda_f;
    spectrum.par_mapv_inplace(|v| v * scale);
    ComplexField::new(out_grid, spectrum)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GuardStatus {
    Pass,
    Warn,
    Fail,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GuardCheck {
    pub name: String,
    pub status: GuardStatus,
    pub detail: String,
}

/// Sampling diagnostics for a (grid, plan) pair.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GuardReport {
    pub status: GuardStatus,
    pub checks: Vec<GuardCheck>,
}

impl GuardReport {
    pub fn ok(&self) -> bool {
        self.status != GuardStatus::Fail
    }
}

fn worst(a: GuardStatus, b: GuardStatus) -> GuardStatus {
    use GuardStatus::*;
    match (a, b) {
        (Fail, _) | (_, Fail) => Fail,
        (Warn, _) | (_, Warn) => Warn,
        _ => Pass,
    }
}

/// Check that the propagation kernel is sampled without aliasing inside the
/// band limit, and that any declared aperture honors the guard-band rule
/// (aperture diameter at most half the grid extent).
pub fn sampling_guard(grid: &GridSpec, plan: &PropagationPlan) -> GuardReport {
    let mut checks = Vec::new();
    let mut status = GuardStatus::Pass;

    match plan.method {
        PropagationMethod::AngularSpectrum | PropagationMethod::FresnelTransfer => {
            let z = plan.distance.abs();
            let k = grid.wavenumber();
            let dk = 2.0 * PI / grid.extent_x().min(grid.extent_y());
            let k_nyq = PI / grid.pitch;
            // Largest transverse wavenumber where the kernel phase still
            // changes by less than pi per frequency bin:
            //   |d(phi)/d(k_t)| * dk < pi  with  d(phi)/d(k_t) = z k_t / k_z.
            let alias_free_fraction = if z == 0.0 {
                1.0
            } else {
                // solve u / sqrt(1 - u^2) = pi/(z k dk) for u = k_t/k
                let b = PI / (z * k * dk);
                let u = b / (1.0 + b * b).sqrt();
                (u * k / k_nyq).min(1.0)
            };
            let st = if alias_free_fraction >= plan.band_limit {
                GuardStatus::Pass
            } else if alias_free_fraction >= 0.5 * plan.band_limit {
                GuardStatus::Warn
            } else {
                GuardStatus::Fail
            };
            status = worst(status, st);
            checks.push(GuardCheck {
                name: "kernel-chirp".into(),
                status: st,
                detail: format!(
                    "kernel alias-free up to {:.3} of Nyquist; band limit {:.3} \
                     (requires alias-free fraction >= band limit)",
                    alias_free_fraction, plan.band_limit
                ),
            });
        }
        PropagationMethod::LensFourier => {
            checks.push(GuardCheck {
                name: "kernel-chirp".into(),
                status: GuardStatus::Pass,
                detail: "single discrete Fourier transform; no kernel chirp".into(),
            });
        }
    }

    if let Some(d) = plan.aperture_diameter {
        let half_extent = 0.5 * grid.extent_x().min(grid.extent_y());
        let st = if d <= half_extent {
            GuardStatus::Pass
        } else if d <= 1.5 * half_extent {
            GuardStatus::Warn
        } else {
            GuardStatus::Fail
        };
        status = worst(status, st);
        checks.push(GuardCheck {
            name: "guard-band".into(),
            status: st,
            detail: format!(
                "aperture diameter {:.3e} m vs guard-band bound {:.3e} m \
                 (half the grid extent)",
                d, half_extent
            ),
        });
    }

    GuardReport { status, checks }
}

/// Helper for tests and scenarios: relative L2 distance between two fields on
/// a common grid.
pub fn relative_l2_distance(a: &ComplexField, b: &ComplexField) -> f64 {
    let num: f64 = a
        .values()
        .iter()
        .zip(b.values().iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum();
    let den: f64 = a.values().iter().map(|v| v.norm_sqr()).sum();
    (num / den).sqrt()
}

/// Build an `Array2` view of the intensity (used by I/O and tests).
pub fn intensity_map(field: &ComplexField) -> Array2<f64> {
    field.values().mapv(|v| v.norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beam::{make_beam, BeamSpec};

    fn grid(n: usize, pitch: f64) -> GridSpec {
        GridSpec::square(n, pitch, 2.5e-12).unwrap()
    }

    #[test]
    fn zero_distance_is_identity() {
        let g = grid(64, 50e-9);
        let f = make_beam(&g, &BeamSpec::gaussian(1, 0.4e-6)).unwrap();
        let out = angular_spectrum_propagate(&f, 0.0, DEFAULT_BAND_LIMIT).unwrap();
        assert_eq!(relative_l2_distance(&f, &out), 0.0);
    }

    #[test]
    fn plane_wave_advances_by_kz() {
        let g = grid(64, 50e-9);
        let f = ComplexField::from_fn(g.clone(), |_, _| Complex64::new(1.0, 0.0)).unwrap();
        let z = 1e-3;
        let out = angular_spectrum_propagate(&f, z, 1.0).unwrap();
        let expected = reduce_angle_product(g.wavenumber(), z).rem_euclid(2.0 * PI);
        for v in out.values().iter() {
            assert!((v.norm() - 1.0).abs() < 1e-12);
            let d = (v.arg().rem_euclid(2.0 * PI) - expected).abs();
            assert!(d < 1e-9 || (2.0 * PI - d) < 1e-9, "{d}");
        }
    }

    #[test]
    fn unitary_on_propagating_band() {
        let g = grid(128, 50e-9);
        let f = make_beam(&g, &BeamSpec::gaussian(2, 0.5e-6)).unwrap();
        let out = angular_spectrum_propagate(&f, 2e-3, 1.0).unwrap();
        assert!((out.power() - f.power()).abs() < 1e-10 * f.power());
    }

    #[test]
    fn group_property_and_invertibility() {
        let g = grid(128, 50e-9);
        let f = make_beam(&g, &BeamSpec::gaussian(1, 0.5e-6)).unwrap();
        // Distances whose sum is exact in binary, so that the composed and
        // single-hop carrier phases k*z agree to rounding level (k ~ 2.5e12
        // rad/m amplifies even the half-ulp of an inexact z1+z2).
        let z1 = 0.00048828125; // 2^-11
        let z2 = 0.0009765625; // 2^-10
        let a = angular_spectrum_propagate(
            &angular_spectrum_propagate(&f, z1, 1.0).unwrap(),
            z2,
            1.0,
        )
        .unwrap();
        let b = angular_spectrum_propagate(&f, z1 + z2, 1.0).unwrap();
        assert!(relative_l2_distance(&a, &b) < 1e-9);

        let back =
            angular_spectrum_propagate(&angular_spectrum_propagate(&f, z1, 1.0).unwrap(), -z1, 1.0)
                .unwrap();
        assert!(relative_l2_distance(&f, &back) < 1e-9);
    }

    #[test]
    fn lens_conserves_power_and_remaps_pitch() {
        let g = grid(128, 50e-9);
        let f = make_beam(&g, &BeamSpec::vortex_disk(0, 1.2e-6)).unwrap();
        let out = lens_fourier_transform(&f, 1.0).unwrap();
        assert!((out.power() - f.power()).abs() < 1e-10 * f.power());
        let expect = g.wavelength * 1.0 / (128.0 * 50e-9);
        assert!((out.grid().pitch - expect).abs() < 1e-20);
    }

    #[test]
    fn guard_passes_at_zero_and_fails_pathological() {
        let g = grid(64, 50e-9);
        let plan = PropagationPlan::angular_spectrum(0.0);
        assert_eq!(sampling_guard(&g, &plan).status, GuardStatus::Pass);
        let plan = PropagationPlan::angular_spectrum(10.0);
        let rep = sampling_guard(&g, &plan);
        assert_eq!(rep.status, GuardStatus::Fail);
        assert!(rep.checks[0].detail.contains("alias-free"));
    }

    #[test]
    fn guard_band_check_flags_oversized_aperture() {
        let g = grid(64, 50e-9);
        let plan = PropagationPlan::angular_spectrum(0.0).with_aperture(3e-6);
        assert_eq!(sampling_guard(&g, &plan).status, GuardStatus::Fail);
        let plan = PropagationPlan::angular_spectrum(0.0).with_aperture(1.5e-6);
        assert_eq!(sampling_guard(&g, &plan).status, GuardStatus::Pass);
    }
}
