//! The forked-grating-plus-pinhole OAM analyzer.
//!
//! The grating `cos(2 pi x/d + b phi)` transfers `n b` OAM quanta to its
//! n-th diffraction order, so an input of charge `m` emerges with zero OAM
//! (a sharp, pinhole-transmitting peak) in the order `n* = -m/b`. Maximal
//! pinhole transmission at order `n*` therefore identifies `m = -n* b`.

use serde::{Deserialize, Serialize};

use crate::analysis::locate_orders;
use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::mask::{render_forked_grating, ForkedGratingSpec};
use crate::propagation::lens_fourier_transform;

/// Relative transmission gap below which the sorter refuses to decide.
pub const AMBIGUITY_THRESHOLD: f64 = 0.01;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SorterConfig {
    pub grating: ForkedGratingSpec,
    /// Ideal lens focal length to the diffraction plane, meters.
    pub focal_length: f64,
    /// Pinhole radius, meters. Must stay below half the order spacing.
    pub pinhole_radius: f64,
    pub n_min: i32,
    pub n_max: i32,
}

impl SorterConfig {
    /// Order spacing `lambda f / d` on the diffraction plane.
    pub fn order_spacing(&self, wavelength: f64) -> f64 {
        wavelength * self.focal_length / self.grating.period
    }

    pub fn validate(&self, wavelength: f64) -> Result<()> {
        self.grating.validate()?;
        if self.grating.burgers == 0 {
            return Err(Error::domain(
                "sorter grating must carry a nonzero Burgers vector",
            ));
        }
        if !(self.focal_length > 0.0) {
            return Err(Error::domain("sorter focal length must be positive"));
        }
        if self.n_min > self.n_max {
            return Err(Error::domain("empty sorter order range"));
        }
        let spacing = self.order_spacing(wavelength);
        if !(self.pinhole_radius > 0.0 && self.pinhole_radius < 0.5 * spacing) {
            return Err(Error::domain(format!(
                "pinhole radius {:.3e} m must lie in (0, {:.3e}) m, half the order spacing, \
                 so pinholes cannot overlap adjacent orders",
                self.pinhole_radius,
                0.5 * spacing
            )));
        }
        Ok(())
    }
}

/// Outcome of one sorting run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SortResult {
    /// Estimated input OAM, `-n* b` for the maximal-transmission order `n*`.
    pub m_hat: i32,
    /// Top transmission divided by the summed transmissions.
    pub confidence: f64,
    /// Pinhole transmission per order, ascending in n.
    pub per_order_transmission: Vec<(i32, f64)>,
}

/// Fraction of total field power inside a disk, with the rim antialiased by
/// linear pixel coverage.
///
/// The disk must lie inside the grid or cover it entirely (a disk containing
/// every pixel returns 1).
pub fn pinhole_transmission(
    field: &ComplexField,
    center: (f64, f64),
    radius: f64,
) -> Result<f64> {
    let grid = field.grid();
    if !(radius > 0.0) {
        return Err(Error::domain("pinhole radius must be positive"));
    }
    let total = field.power();
    if total <= 0.0 {
        return Err(Error::analysis("zero-power field has no transmission fraction"));
    }
    let (cx, cy) = center;
    // corners of the grid, to allow the disk-covers-grid case
    let corners = [
        (grid.x(0), grid.y(0)),
        (grid.x(grid.nx - 1), grid.y(0)),
        (grid.x(0), grid.y(grid.ny - 1)),
        (grid.x(grid.nx - 1), grid.y(grid.ny - 1)),
    ];
    let covers_grid = corners
        .iter()
        .all(|&(x, y)| ((x - cx).powi(2) + (y - cy).powi(2)).sqrt() + 0.5 * grid.pitch <= radius);
    let inside_grid = cx - radius >= grid.x(0)
        && cx + radius <= grid.x(grid.nx - 1)
        && cy - radius >= grid.y(0)
        && cy + radius <= grid.y(grid.ny - 1);
    if !covers_grid && !inside_grid {
        return Err(Error::analysis(format!(
            "pinhole of radius {radius:.3e} m about ({cx:.3e}, {cy:.3e}) m is clipped by the grid"
        )));
    }
    if covers_grid {
        return Ok(1.0);
    }
    let i_lo = grid.col_of(cx - radius).floor().max(0.0) as usize;
    let i_hi = (grid.col_of(cx + radius).ceil() as usize).min(grid.nx - 1);
    let j_lo = grid.row_of(cy - radius).floor().max(0.0) as usize;
    let j_hi = (grid.row_of(cy + radius).ceil() as usize).min(grid.ny - 1);
    let mut sum = 0.0;
    for j in j_lo..=j_hi {
        let dy = grid.y(j) - cy;
        for i in i_lo..=i_hi {
            let dx = grid.x(i) - cx;
            let rho = (dx * dx + dy * dy).sqrt();
            // linear rim ramp one pixel wide
            let cover = ((radius - rho) / grid.pitch + 0.5).clamp(0.0, 1.0);
            if cover > 0.0 {
                sum += cover * field.values()[[j, i]].norm_sqr();
            }
        }
    }
    Ok(sum * grid.pitch * grid.pitch / total)
}

/// Run the analyzer: apply the forked grating, lens-transform to the
/// diffraction plane, evaluate the pinhole transmission at every order
/// center, and estimate the input OAM from the winner.
pub fn sort_oam(input: &ComplexField, config: &SorterConfig) -> Result<SortResult> {
    let grid = input.grid();
    config.validate(grid.wavelength)?;
    if input.power() <= 0.0 {
        return Err(Error::domain("sorter input carries no power"));
    }
    let mask = render_forked_grating(&config.grating, grid)?;
    let masked = input.apply_mask(&mask)?;
    let out = lens_fourier_transform(&masked, config.focal_length)?;
    let locations = locate_orders(
        config.grating.period,
        grid.wavelength,
        config.focal_length,
        config.n_min..=config.n_max,
        out.grid(),
    )?;
    if let Some(loc) = locations.iter().find(|l| !l.in_grid) {
        return Err(Error::sampling(format!(
            "order {} sits at {:.3e} m, outside the output grid",
            loc.n, loc.x
        )));
    }
    let mut per_order = Vec::with_capacity(locations.len());
    for loc in &locations {
        let t = pinhole_transmission(&out, (loc.x, 0.0), config.pinhole_radius)?;
        per_order.push((loc.n, t));
    }
    let mut ranked = per_order.clone();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    let (n_star, t_star) = ranked[0];
    if ranked.len() > 1 {
        let (n2, t2) = ranked[1];
        if t_star <= 0.0 || (t_star - t2) / t_star < AMBIGUITY_THRESHOLD {
            return Err(Error::AmbiguousSort {
                candidates: vec![(n_star, t_star), (n2, t2)],
            });
        }
    }
    let sum: f64 = per_order.iter().map(|&(_, t)| t).sum();
    Ok(SortResult {
        m_hat: -n_star * config.grating.burgers,
        confidence: t_star / sum,
        per_order_transmission: per_order,
    })
}
