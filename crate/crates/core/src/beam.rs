//! Vortex beam synthesis: radial amplitude profile times `exp(i m phi)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::grid::GridSpec;

/// Radial amplitude profile of a synthesized beam.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BeamProfile {
    /// `A = 1` for `r <= radius`, 0 outside.
    UniformDisk { radius: f64 },
    /// `A = exp(-r^2 / waist^2)` (waist is the 1/e amplitude radius).
    Gaussian { waist: f64 },
    /// `A = 1` for `inner <= r <= outer`, 0 elsewhere.
    Annulus { inner: f64, outer: f64 },
}

impl BeamProfile {
    /// Largest radius parameter, used for fit-on-grid validation.
    pub fn nominal_radius(&self) -> f64 {
        match self {
            BeamProfile::UniformDisk { radius } => *radius,
            BeamProfile::Gaussian { waist } => *waist,
            BeamProfile::Annulus { outer, .. } => *outer,
        }
    }

    fn amplitude(&self, r: f64) -> f64 {
        match self {
            BeamProfile::UniformDisk { radius } => {
                if r <= *radius {
                    1.0
                } else {
                    0.0
                }
            }
            BeamProfile::Gaussian { waist } => (-(r * r) / (waist * waist)).exp(),
            BeamProfile::Annulus { inner, outer } => {
                if r >= *inner && r <= *outer {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            BeamProfile::UniformDisk { radius } => *radius > 0.0,
            BeamProfile::Gaussian { waist } => *waist > 0.0,
            BeamProfile::Annulus { inner, outer } => *inner >= 0.0 && *outer > *inner,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("invalid beam profile radii: {self:?}")))
        }
    }
}

/// Specification of a synthesized vortex beam.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeamSpec {
    /// Topological charge (OAM in units of hbar); any integer.
    pub m: i32,
    pub profile: BeamProfile,
    /// Beam axis position, meters.
    pub center: (f64, f64),
}

impl BeamSpec {
    pub fn vortex_disk(m: i32, radius: f64) -> Self {
        BeamSpec {
            m,
            profile: BeamProfile::UniformDisk { radius },
            center: (0.0, 0.0),
        }
    }

    pub fn gaussian(m: i32, waist: f64) -> Self {
        BeamSpec {
            m,
            profile: BeamProfile::Gaussian { waist },
            center: (0.0, 0.0),
        }
    }
}

/// Synthesize `psi(r, phi) = A(r) exp(i m phi)` about the beam center and
/// normalize to unit power.
///
/// The core pixel of a charged beam (`m != 0`) is set to zero: the azimuth is
/// undefined on the phase singularity and the physical amplitude vanishes
/// there.
pub fn make_beam(grid: &GridSpec, spec: &BeamSpec) -> Result<ComplexField> {
    spec.profile.validate()?;
    let half_extent = 0.5 * grid.extent_x().min(grid.extent_y());
    let reach = spec.profile.nominal_radius()
        + spec.center.0.abs().max(spec.center.1.abs());
    if reach >= half_extent {
        return Err(Error::sampling(format!(
            "beam profile reaches {:.3e} m from the grid center but must stay under half \
             the grid extent ({:.3e} m)",
            reach, half_extent
        )));
    }
    let m = spec.m;
    let (cx, cy) = spec.center;
    let profile = spec.profile.clone();
    let field = ComplexField::from_fn(grid.clone(), move |x, y| {
        let dx = x - cx;
        let dy = y - cy;
        let r = (dx * dx + dy * dy).sqrt();
        let a = profile.amplitude(r);
        if m == 0 {
            Complex64::new(a, 0.0)
        } else if r == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            let phi = dy.atan2(dx);
            Complex64::from_polar(a, m as f64 * phi)
        }
    })?;
    field.normalized()
}
