//! Binary amplitude masks: forked gratings and spiral zone plates.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// Minimum number of pixels per grating period at render time.
pub const MIN_SAMPLES_PER_PERIOD: f64 = 8.0;
/// Minimum number of pixels across the outermost zone of a zone plate.
pub const MIN_SAMPLES_PER_ZONE: f64 = 4.0;

/// Parametric binary forked grating: straight grating of period `period`
/// along x carrying an edge dislocation of strength `burgers` at `center`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForkedGratingSpec {
    /// Grating period along x, meters.
    pub period: f64,
    /// Dislocation strength (any integer; 0 gives a straight grating).
    pub burgers: i32,
    /// Radius of the circular aperture, meters.
    pub aperture_radius: f64,
    /// Open fraction of each period, in (0, 1).
    pub duty: f64,
    /// Fork core position, meters.
    pub center: (f64, f64),
}

impl ForkedGratingSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.period > 0.0) {
            return Err(Error::domain(format!("grating period must be positive, got {}", self.period)));
        }
        if !(self.aperture_radius > 0.0) {
            return Err(Error::domain(format!(
                "aperture radius must be positive, got {}",
                self.aperture_radius
            )));
        }
        if !(self.duty > 0.0 && self.duty < 1.0) {
            return Err(Error::domain(format!("duty must lie in (0,1), got {}", self.duty)));
        }
        Ok(())
    }
}

/// Parametric binary spiral zone plate of charge `charge` and first-order
/// focal length `focal_length`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpiralZonePlateSpec {
    /// Topological charge of the spiral (any integer; 0 gives a Fresnel zone plate).
    pub charge: i32,
    /// First-order focal length, meters.
    pub focal_length: f64,
    /// Radius of the circular aperture, meters.
    pub aperture_radius: f64,
    /// Open fraction, in (0, 1).
    pub duty: f64,
    /// Plate center, meters.
    pub center: (f64, f64),
}

impl SpiralZonePlateSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.focal_length > 0.0) {
            return Err(Error::domain(format!(
                "zone plate focal length must be positive, got {}",
                self.focal_length
            )));
        }
        if !(self.aperture_radius > 0.0) {
            return Err(Error::domain(format!(
                "aperture radius must be positive, got {}",
                self.aperture_radius
            )));
        }
        if !(self.duty > 0.0 && self.duty < 1.0) {
            return Err(Error::domain(format!("duty must lie in (0,1), got {}", self.duty)));
        }
        Ok(())
    }

    /// Width of the outermost zone, `lambda f / (2 R)`.
    pub fn outer_zone_width(&self, wavelength: f64) -> f64 {
        wavelength * self.focal_length / (2.0 * self.aperture_radius)
    }
}

/// Rasterized binary transmission: `open[[j, i]]` is true where the screen
/// transmits. Everything outside the circular aperture is opaque.
#[derive(Clone, Debug)]
pub struct BinaryMask {
    grid: GridSpec,
    open: Array2<bool>,
    aperture_center: (f64, f64),
    aperture_radius: f64,
}

impl BinaryMask {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn open(&self) -> &Array2<bool> {
        &self.open
    }

    pub fn aperture_center(&self) -> (f64, f64) {
        self.aperture_center
    }

    pub fn aperture_radius(&self) -> f64 {
        self.aperture_radius
    }

    /// Open pixel count.
    pub fn open_count(&self) -> usize {
        self.open.iter().filter(|&&o| o).count()
    }

    /// Open fraction among pixels inside the aperture disk.
    pub fn open_fraction_in_aperture(&self) -> f64 {
        let (cx, cy) = self.aperture_center;
        let r2 = self.aperture_radius * self.aperture_radius;
        let mut inside = 0usize;
        let mut open = 0usize;
        for j in 0..self.grid.ny {
            let dy = self.grid.y(j) - cy;
            for i in 0..self.grid.nx {
                let dx = self.grid.x(i) - cx;
                if dx * dx + dy * dy <= r2 {
                    inside += 1;
                    if self.open[[j, i]] {
                        open += 1;
                    }
                }
            }
        }
        if inside == 0 {
            0.0
        } else {
            open as f64 / inside as f64
        }
    }
}

fn render(
    grid: &GridSpec,
    center: (f64, f64),
    aperture_radius: f64,
    phase: impl Fn(f64, f64, f64) -> f64 + Sync,
    duty: f64,
) -> BinaryMask {
    let threshold = (std::f64::consts::PI * duty).cos();
    let r2max = aperture_radius * aperture_radius;
    let mut open = Array2::from_elem((grid.ny, grid.nx), false);
    let g = grid.clone();
    ndarray::Zip::indexed(&mut open).par_for_each(|(j, i), o| {
        let dx = g.x(i) - center.0;
        let dy = g.y(j) - center.1;
        let r2 = dx * dx + dy * dy;
        if r2 <= r2max {
            // The boundary set and the core pixel (atan2(0,0) = 0) resolve
            // by the >= comparison.
            *o = phase(dx, dy, r2).cos() >= threshold;
        }
    });
    BinaryMask {
        grid: grid.clone(),
        open,
        aperture_center: center,
        aperture_radius,
    }
}

/// Rasterize a forked grating: pixel open iff
/// `cos(2 pi x / d + b * phi) >= cos(pi * duty)` and `r <= R`.
pub fn render_forked_grating(spec: &ForkedGratingSpec, grid: &GridSpec) -> Result<BinaryMask> {
    spec.validate()?;
    if spec.period < MIN_SAMPLES_PER_PERIOD * grid.pitch {
        return Err(Error::sampling(format!(
            "grating period {:.3e} m is undersampled: requires period >= {} * pitch = {:.3e} m",
            spec.period,
            MIN_SAMPLES_PER_PERIOD,
            MIN_SAMPLES_PER_PERIOD * grid.pitch
        )));
    }
    let b = spec.burgers as f64;
    let kx = 2.0 * std::f64::consts::PI / spec.period;
    Ok(render(
        grid,
        spec.center,
        spec.aperture_radius,
        move |dx, dy, _r2| kx * dx + b * dy.atan2(dx),
        spec.duty,
    ))
}

/// Rasterize a spiral zone plate: pixel open iff
/// `cos(l * phi - pi * r^2 / (lambda f)) >= cos(pi * duty)` and `r <= R`.
pub fn render_spiral_zone_plate(spec: &SpiralZonePlateSpec, grid: &GridSpec) -> Result<BinaryMask> {
    spec.validate()?;
    let zone = spec.outer_zone_width(grid.wavelength);
    if zone < MIN_SAMPLES_PER_ZONE * grid.pitch {
        return Err(Error::sampling(format!(
            "outermost zone width {:.3e} m is unresolvable: requires >= {} * pitch = {:.3e} m",
            zone,
            MIN_SAMPLES_PER_ZONE,
            MIN_SAMPLES_PER_ZONE * grid.pitch
        )));
    }
    let l = spec.charge as f64;
    let chirp = std::f64::consts::PI / (grid.wavelength * spec.focal_length);
    Ok(render(
        grid,
        spec.center,
        spec.aperture_radius,
        move |dx, dy, r2| l * dy.atan2(dx) - chirp * r2,
        spec.duty,
    ))
}

/// Amplitude of the n-th Fourier order of an ideal binary grating with the
/// given open fraction: `a_n = sin(pi n duty) / (pi n)`, `a_0 = duty`.
/// Orders with `n * duty` integer vanish identically and return exactly 0.
pub fn grating_order_amplitude(duty: f64, n: i32) -> Result<f64> {
    if !(duty > 0.0 && duty < 1.0) {
        return Err(Error::domain(format!("duty must lie in (0,1), got {duty}")));
    }
    if n == 0 {
        return Ok(duty);
    }
    let x = n as f64 * duty;
    if x == x.round() {
        return Ok(0.0);
    }
    Ok((std::f64::consts::PI * x).sin() / (std::f64::consts::PI * n as f64))
}

/// Flip open/closed inside the aperture; outside stays opaque.
pub fn complement(mask: &BinaryMask) -> BinaryMask {
    let (cx, cy) = mask.aperture_center;
    let r2max = mask.aperture_radius * mask.aperture_radius;
    let mut open = mask.open.clone();
    let g = mask.grid.clone();
    ndarray::Zip::indexed(&mut open).par_for_each(|(j, i), o| {
        let dx = g.x(i) - cx;
        let dy = g.y(j) - cy;
        if dx * dx + dy * dy <= r2max {
            *o = !*o;
        }
    });
    BinaryMask {
        grid: mask.grid.clone(),
        open,
        aperture_center: mask.aperture_center,
        aperture_radius: mask.aperture_radius,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, pitch: f64) -> GridSpec {
        GridSpec::square(n, pitch, 2.5e-12).unwrap()
    }

    fn straight(period: f64, radius: f64) -> ForkedGratingSpec {
        ForkedGratingSpec {
            period,
            burgers: 0,
            aperture_radius: radius,
            duty: 0.5,
            center: (0.0, 0.0),
        }
    }

    #[test]
    fn straight_grating_is_periodic() {
        // 18 px per period: the discrete period is an exact pixel shift.
        let g = grid(256, 1e-6);
        let spec = straight(18e-6, 100e-6);
        let m = render_forked_grating(&spec, &g).unwrap();
        let r2 = spec.aperture_radius * spec.aperture_radius;
        for j in 0..256 {
            for i in 0..(256 - 18) {
                let x = g.x(i);
                let y = g.y(j);
                let xs = g.x(i + 18);
                // compare only where both pixels are inside the aperture
                if x * x + y * y <= r2 * 0.9 && xs * xs + y * y <= r2 * 0.9 {
                    assert_eq!(m.open()[[j, i]], m.open()[[j, i + 18]], "at ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn fork_adds_one_fringe_across_the_core() {
        // Count open runs along rows above and below the dislocation core:
        // a burgers-1 fork has exactly one extra fringe on one side.
        let g = grid(512, 1e-6);
        let spec = ForkedGratingSpec {
            period: 18e-6,
            burgers: 1,
            aperture_radius: 200e-6,
            duty: 0.5,
            center: (0.0, 0.0),
        };
        let m = render_forked_grating(&spec, &g).unwrap();
        let count_runs = |j: usize| -> usize {
            let mut runs = 0;
            let mut prev = false;
            for i in 0..512 {
                let x = g.x(i);
                let v = x.abs() <= 175e-6 && m.open()[[j, i]];
                if v && !prev {
                    runs += 1;
                }
                prev = v;
            }
            runs
        };
        // rows within ~2 px of the core are distorted by the dislocation
        // itself; any row pair a few pixels out shows the one-fringe offset
        for dj in 5..15usize {
            let above = count_runs(256 + dj);
            let below = count_runs(256 - dj);
            assert_eq!(
                (above as i64 - below as i64).abs(),
                1,
                "dj={dj} above={above} below={below}"
            );
        }
    }

    #[test]
    fn half_duty_open_fraction() {
        // 18 px per period puts no pixel on the binarization boundary, so the
        // rendered open fraction is exact.
        let g = grid(512, 1e-6);
        let spec = straight(18e-6, 200e-6);
        let m = render_forked_grating(&spec, &g).unwrap();
        let f = m.open_fraction_in_aperture();
        assert!((f - 0.5).abs() < 0.01, "open fraction {f}");
    }

    #[test]
    fn undersampled_period_is_rejected() {
        let g = grid(256, 1e-6);
        let err = render_forked_grating(&straight(7e-6, 50e-6), &g).unwrap_err();
        assert!(matches!(err, Error::Sampling(_)), "{err}");
    }

    #[test]
    fn zone_plate_charge_zero_is_rotation_invariant() {
        let g = GridSpec::square(256, 1e-6, 500e-9).unwrap();
        let spec = SpiralZonePlateSpec {
            charge: 0,
            focal_length: 2e-3,
            aperture_radius: 100e-6,
            duty: 0.5,
            center: (0.0, 0.0),
        };
        let m = render_spiral_zone_plate(&spec, &g).unwrap();
        // exact 90-degree pixel rotation about the center pixel
        let n = 256usize;
        let c = n / 2;
        for j in 1..n {
            for i in 1..n {
                let (di, dj) = (i as i64 - c as i64, j as i64 - c as i64);
                // (x, y) -> (-y, x)
                let i2 = (c as i64 - dj) as usize;
                let j2 = (c as i64 + di) as usize;
                if i2 >= 1 && i2 < n && j2 >= 1 && j2 < n {
                    assert_eq!(m.open()[[j, i]], m.open()[[j2, i2]]);
                }
            }
        }
    }

    #[test]
    fn spiral_zone_plate_has_charge_many_arms() {
        // In a radius band where the charge-0 plate is fully closed, the
        // charge-10 plate shows exactly 10 open arcs.
        let g = GridSpec::square(1024, 0.2e-6, 500e-9).unwrap();
        let f = 1e-3;
        let mk = |charge: i32| SpiralZonePlateSpec {
            charge,
            focal_length: f,
            aperture_radius: 100e-6,
            duty: 0.5,
            center: (0.0, 0.0),
        };
        let m0 = render_spiral_zone_plate(&mk(0), &g).unwrap();
        let m10 = render_spiral_zone_plate(&mk(10), &g).unwrap();
        // closed zone of the l=0 plate: pi r^2/(lambda f) = pi (odd), i.e.
        // r = sqrt(lambda f): center of the first closed ring band.
        let r = (g.wavelength * f).sqrt();
        let arcs = |m: &BinaryMask| -> usize {
            let samples = 4096;
            let mut vals = Vec::with_capacity(samples);
            for k in 0..samples {
                let th = 2.0 * std::f64::consts::PI * k as f64 / samples as f64;
                let x = r * th.cos();
                let y = r * th.sin();
                let i = g.col_of(x).round() as usize;
                let j = g.row_of(y).round() as usize;
                vals.push(m.open()[[j, i]]);
            }
            let mut runs = 0;
            for k in 0..samples {
                if vals[k] && !vals[(k + samples - 1) % samples] {
                    runs += 1;
                }
            }
            runs
        };
        assert_eq!(arcs(&m0), 0, "charge-0 plate should be closed at this radius");
        assert_eq!(arcs(&m10), 10);
    }

    #[test]
    fn zone_plate_open_fraction_tracks_duty() {
        let g = GridSpec::square(1024, 0.2e-6, 500e-9).unwrap();
        for duty in [0.3, 0.5, 0.7] {
            let spec = SpiralZonePlateSpec {
                charge: 10,
                focal_length: 1e-3,
                aperture_radius: 90e-6,
                duty,
                center: (0.0, 0.0),
            };
            let m = render_spiral_zone_plate(&spec, &g).unwrap();
            let f = m.open_fraction_in_aperture();
            assert!((f - duty).abs() < 0.02, "duty {duty} rendered {f}");
        }
    }

    #[test]
    fn unresolvable_zone_plate_is_rejected() {
        let g = grid(256, 1e-6);
        let spec = SpiralZonePlateSpec {
            charge: 10,
            focal_length: 0.001,
            aperture_radius: 100e-6,
            duty: 0.5,
            center: (0.0, 0.0),
        };
        let err = render_spiral_zone_plate(&spec, &g).unwrap_err();
        assert!(matches!(err, Error::Sampling(_)));
    }

    #[test]
    fn order_amplitudes() {
        // exact even-order extinction at half duty
        for n in 1..=5 {
            assert_eq!(grating_order_amplitude(0.5, 2 * n).unwrap(), 0.0);
        }
        let a1 = grating_order_amplitude(0.5, 1).unwrap();
        let a3 = grating_order_amplitude(0.5, 3).unwrap();
        assert!((a1 - 1.0 / std::f64::consts::PI).abs() < 1e-15);
        assert!((a3 + 1.0 / (3.0 * std::f64::consts::PI)).abs() < 1e-15);
        assert!((grating_order_amplitude(0.5, 0).unwrap() - 0.5).abs() < 1e-15);
        assert!(grating_order_amplitude(0.0, 1).is_err());
        assert!(grating_order_amplitude(1.0, 1).is_err());
    }

    #[test]
    fn complement_is_involutive_and_partitions() {
        let g = grid(256, 1e-6);
        let spec = ForkedGratingSpec {
            period: 18e-6,
            burgers: 1,
            aperture_radius: 100e-6,
            duty: 0.5,
            center: (0.0, 0.0),
        };
        let m = render_forked_grating(&spec, &g).unwrap();
        let c = complement(&m);
        let cc = complement(&c);
        assert_eq!(m.open(), cc.open());
        let sum = m.open_fraction_in_aperture() + c.open_fraction_in_aperture();
        assert!((sum - 1.0).abs() < 1e-12, "fractions sum to {sum}");
    }

    #[test]
    fn rotating_a_fork_by_180_degrees_negates_its_burgers_vector() {
        // Point reflection about the core maps the rendered fork with burgers
        // b onto the fork with burgers -b (even b), or onto the complement of
        // the (-b, 1-duty) fork (odd b), away from binarization-tie pixels.
        let g = grid(256, 1e-6);
        let mk = |b: i32, duty: f64| ForkedGratingSpec {
            period: 18e-6,
            burgers: b,
            aperture_radius: 100e-6,
            duty,
            center: (0.0, 0.0),
        };
        let check = |a: &BinaryMask, b: &BinaryMask, max_mismatch: usize| {
            let n = 256usize;
            let mut bad = 0;
            for j in 1..n {
                for i in 1..n {
                    let (i2, j2) = (n - i, n - j);
                    if a.open()[[j, i]] != b.open()[[j2, i2]] {
                        bad += 1;
                    }
                }
            }
            assert!(bad <= max_mismatch, "{bad} mismatching pixels");
        };
        // even b: exact away from binarization ties
        let m2 = render_forked_grating(&mk(2, 0.5), &g).unwrap();
        let m2n = render_forked_grating(&mk(-2, 0.5), &g).unwrap();
        check(&m2n, &m2, 2);
        // odd b: complement with mirrored duty
        let m1 = render_forked_grating(&mk(1, 0.4), &g).unwrap();
        let m1c = complement(&render_forked_grating(&mk(-1, 0.6), &g).unwrap());
        check(&m1c, &m1, 8);
    }
}
