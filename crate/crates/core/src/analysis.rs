//! Observables extracted from diffraction-plane fields: order locations and
//! powers, asymmetries, azimuthal OAM spectra, winding numbers, ring radii
//! and azimuthal peak counts.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::grid::GridSpec;

/// Azimuthal samples used when interpolating fields on circles.
fn circle_samples(q_abs_max: i32) -> usize {
    (8 * q_abs_max.max(8) as usize).max(64)
}

/// Default amplitude floor for winding extraction, relative to the field peak.
pub const WINDING_AMPLITUDE_FLOOR: f64 = 1e-6;
/// Residual circulation (in turns) beyond which rounding to an integer
/// winding is refused.
pub const WINDING_MAX_RESIDUAL: f64 = 0.25;

/// Predicted diffraction-order center on the output plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderLocation {
    pub n: i32,
    /// Center x position, meters (orders sit on the y = 0 axis).
    pub x: f64,
    /// False when the center falls outside the output grid; such orders are
    /// flagged rather than silently dropped.
    pub in_grid: bool,
}

/// Grating-equation order centers `x_n = n lambda f / d`.
pub fn locate_orders(
    period: f64,
    wavelength: f64,
    focal_length: f64,
    n_range: std::ops::RangeInclusive<i32>,
    out_grid: &GridSpec,
) -> Result<Vec<OrderLocation>> {
    if !(period > 0.0 && wavelength > 0.0 && focal_length > 0.0) {
        return Err(Error::domain(
            "locate_orders requires positive period, wavelength and focal length",
        ));
    }
    let spacing = wavelength * focal_length / period;
    let half = 0.5 * out_grid.extent_x();
    Ok(n_range
        .map(|n| {
            let x = n as f64 * spacing;
            OrderLocation { n, x, in_grid: x.abs() < half }
        })
        .collect())
}

/// Power fraction per azimuthal mode number q about a chosen center.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OamSpectrum {
    pub center: (f64, f64),
    pub q_min: i32,
    pub q_max: i32,
    /// Power fraction per q, indexed `q - q_min`; sums to at most 1.
    pub power_fraction: Vec<f64>,
    pub dominant_q: i32,
}

impl OamSpectrum {
    pub fn fraction_of(&self, q: i32) -> f64 {
        if q < self.q_min || q > self.q_max {
            return 0.0;
        }
        self.power_fraction[(q - self.q_min) as usize]
    }

    pub fn total_fraction(&self) -> f64 {
        self.power_fraction.iter().sum()
    }
}

/// Decompose the annulus `r_min <= r <= r_max` about `center` into azimuthal
/// modes `exp(i q phi)` by interpolated circular sampling:
/// `c_q(r) = (1/2 pi) * integral psi(r, phi) exp(-i q phi) d phi`, with
/// `power_fraction[q] = integral |c_q|^2 2 pi r dr / annulus power`.
pub fn azimuthal_mode_spectrum(
    field: &ComplexField,
    center: (f64, f64),
    r_min: f64,
    r_max: f64,
    q_range: std::ops::RangeInclusive<i32>,
) -> Result<OamSpectrum> {
    let grid = field.grid();
    if !(r_min >= 0.0 && r_max > r_min) {
        return Err(Error::analysis(format!(
            "annulus radii must satisfy 0 <= r_min < r_max, got [{r_min:.3e}, {r_max:.3e}]"
        )));
    }
    let n_radii = ((r_max - r_min) / grid.pitch).floor() as usize;
    if n_radii < 8 {
        return Err(Error::analysis(format!(
            "annulus [{r_min:.3e}, {r_max:.3e}] m spans {n_radii} sample radii; \
             at least 8 are required"
        )));
    }
    for (x, y) in [
        (center.0 - r_max, center.1),
        (center.0 + r_max, center.1),
        (center.0, center.1 - r_max),
        (center.0, center.1 + r_max),
    ] {
        if !grid.contains(x, y, 1.0) {
            return Err(Error::analysis(format!(
                "annulus of radius {r_max:.3e} m about ({:.3e}, {:.3e}) m leaves the grid",
                center.0, center.1
            )));
        }
    }

    let (q_min, q_max) = (*q_range.start(), *q_range.end());
    if q_min > q_max {
        return Err(Error::analysis("empty q range"));
    }
    let q_abs_max = q_min.abs().max(q_max.abs());
    let n_phi = circle_samples(q_abs_max);
    let n_q = (q_max - q_min + 1) as usize;

    let dr = (r_max - r_min) / n_radii as f64;
    let mut mode_power = vec![0.0f64; n_q];
    let mut annulus_power = 0.0f64;

    let mut samples = vec![num_complex::Complex64::new(0.0, 0.0); n_phi];
    for l in 0..n_radii {
        let r = r_min + (l as f64 + 0.5) * dr;
        let weight = 2.0 * PI * r * dr;
        let mut mean_sq = 0.0;
        for (kphi, s) in samples.iter_mut().enumerate() {
            let phi = 2.0 * PI * kphi as f64 / n_phi as f64;
            let x = center.0 + r * phi.cos();
            let y = center.1 + r * phi.sin();
            *s = field.sample(x, y)?;
            mean_sq += s.norm_sqr();
        }
        mean_sq /= n_phi as f64;
        annulus_power += mean_sq * weight;
        for (iq, mp) in mode_power.iter_mut().enumerate() {
            let q = q_min + iq as i32;
            let mut c = num_complex::Complex64::new(0.0, 0.0);
            for (kphi, s) in samples.iter().enumerate() {
                let phi = 2.0 * PI * kphi as f64 / n_phi as f64;
                c += s * num_complex::Complex64::from_polar(1.0, -(q as f64) * phi);
            }
            c /= n_phi as f64;
            *mp += c.norm_sqr() * weight;
        }
    }

    if annulus_power <= 0.0 {
        return Err(Error::analysis(
            "annulus contains no power; cannot form a mode spectrum",
        ));
    }
    let power_fraction: Vec<f64> = mode_power.iter().map(|p| p / annulus_power).collect();
    // dominant q: maximum fraction, ties broken toward smaller |q|
    let mut dominant_q = q_min;
    let mut best = -1.0f64;
    for (iq, &frac) in power_fraction.iter().enumerate() {
        let q = q_min + iq as i32;
        if frac > best || (frac == best && q.abs() < dominant_q.abs()) {
            best = frac;
            dominant_q = q;
        }
    }
    Ok(OamSpectrum { center, q_min, q_max, power_fraction, dominant_q })
}

/// Integer phase circulation around a circle, with the pre-rounding residual.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Winding {
    pub winding: i32,
    /// Circulation minus its rounding, in turns.
    pub residual: f64,
}

/// Sum of principal-value phase differences around an interpolated circle,
/// divided by 2 pi and rounded to the nearest integer.
pub fn phase_winding(field: &ComplexField, center: (f64, f64), radius: f64) -> Result<Winding> {
    let grid = field.grid();
    if !(radius > 0.0) {
        return Err(Error::domain(format!("winding radius must be positive, got {radius}")));
    }
    for (x, y) in [
        (center.0 - radius, center.1),
        (center.0 + radius, center.1),
        (center.0, center.1 - radius),
        (center.0, center.1 + radius),
    ] {
        if !grid.contains(x, y, 1.0) {
            return Err(Error::analysis(format!(
                "winding circle of radius {radius:.3e} m about ({:.3e}, {:.3e}) m leaves the grid",
                center.0, center.1
            )));
        }
    }
    let n = 1024usize;
    let floor = WINDING_AMPLITUDE_FLOOR * field.max_abs();
    let mut samples = Vec::with_capacity(n);
    for k in 0..n {
        let phi = 2.0 * PI * k as f64 / n as f64;
        let v = field.sample(center.0 + radius * phi.cos(), center.1 + radius * phi.sin())?;
        if v.norm() < floor {
            return Err(Error::IndeterminateWinding {
                reason: format!(
                    "amplitude {:.3e} on the circle falls below the floor {:.3e}",
                    v.norm(),
                    floor
                ),
                residual: f64::NAN,
            });
        }
        samples.push(v);
    }
    let mut total = 0.0;
    for k in 0..n {
        let a = samples[k];
        let b = samples[(k + 1) % n];
        total += (b * a.conj()).arg();
    }
    total /= 2.0 * PI;
    let rounded = total.round();
    let residual = total - rounded;
    if residual.abs() > WINDING_MAX_RESIDUAL {
        return Err(Error::IndeterminateWinding {
            reason: "circulation does not round safely to an integer".into(),
            residual,
        });
    }
    Ok(Winding { winding: rounded as i32, residual })
}

/// Riemann sum of `|psi|^2` times pixel area over the axis-aligned square box
/// `|x - cx| <= hw, |y - cy| <= hw`. The box must lie inside the grid.
pub fn integrate_box(field: &ComplexField, center: (f64, f64), half_width: f64) -> Result<f64> {
    let grid = field.grid();
    if !(half_width > 0.0) {
        return Err(Error::domain(format!("box half-width must be positive, got {half_width}")));
    }
    let (cx, cy) = center;
    let x_lo = cx - half_width;
    let x_hi = cx + half_width;
    let y_lo = cy - half_width;
    let y_hi = cy + half_width;
    if x_lo < grid.x(0) || x_hi > grid.x(grid.nx - 1) || y_lo < grid.y(0) || y_hi > grid.y(grid.ny - 1)
    {
        return Err(Error::analysis(format!(
            "integration box about ({cx:.3e}, {cy:.3e}) m with half-width {half_width:.3e} m \
             is clipped by the grid"
        )));
    }
    let i_lo = grid.col_of(x_lo).ceil() as usize;
    let i_hi = grid.col_of(x_hi).floor() as usize;
    let j_lo = grid.row_of(y_lo).ceil() as usize;
    let j_hi = grid.row_of(y_hi).floor() as usize;
    let mut sum = 0.0;
    for j in j_lo..=j_hi {
        for i in i_lo..=i_hi {
            sum += field.values()[[j, i]].norm_sqr();
        }
    }
    Ok(sum * grid.pitch * grid.pitch)
}

/// Radius of the dominant intensity ring about `center`, by radial centroid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RingMeasure {
    /// Intensity-weighted radial centroid of the dominant ring, meters.
    /// Zero when the pattern is on-axis dominated.
    pub radius: f64,
    /// True when no ring was found (intensity peaks on the axis).
    pub on_axis: bool,
}

/// Measure the dominant ring radius inside `r_max` of `center`. Radial bins
/// are one pixel wide; the ring is the contiguous band above half the peak
/// bin, and its radius the intensity-weighted centroid weighted by annulus
/// area.
pub fn ring_radius(field: &ComplexField, center: (f64, f64), r_max: f64) -> Result<RingMeasure> {
    let grid = field.grid();
    if !(r_max > 2.0 * grid.pitch) {
        return Err(Error::domain(format!(
            "ring search radius must exceed two pixels, got {r_max:.3e} m"
        )));
    }
    if !grid.contains(center.0, center.1, 1.0) {
        return Err(Error::analysis("ring center lies outside the grid"));
    }
    let n_bins = (r_max / grid.pitch).floor() as usize;
    let mut sums = vec![0.0f64; n_bins];
    let mut counts = vec![0usize; n_bins];
    let i_lo = grid.col_of(center.0 - r_max).max(0.0).floor() as usize;
    let i_hi = (grid.col_of(center.0 + r_max).ceil() as usize).min(grid.nx - 1);
    let j_lo = grid.row_of(center.1 - r_max).max(0.0).floor() as usize;
    let j_hi = (grid.row_of(center.1 + r_max).ceil() as usize).min(grid.ny - 1);
    for j in j_lo..=j_hi {
        let dy = grid.y(j) - center.1;
        for i in i_lo..=i_hi {
            let dx = grid.x(i) - center.0;
            let r = (dx * dx + dy * dy).sqrt();
            let bin = (r / grid.pitch) as usize;
            if bin < n_bins {
                sums[bin] += field.values()[[j, i]].norm_sqr();
                counts[bin] += 1;
            }
        }
    }
    let mean = |b: usize| -> f64 {
        if counts[b] == 0 {
            0.0
        } else {
            sums[b] / counts[b] as f64
        }
    };
    let peak_bin = (0..n_bins).max_by(|&a, &b| mean(a).total_cmp(&mean(b))).unwrap_or(0);
    let peak_val = mean(peak_bin);
    if peak_val <= 0.0 {
        return Err(Error::analysis("empty intensity region; no ring"));
    }
    let r_of = |b: usize| (b as f64 + 0.5) * grid.pitch;
    if r_of(peak_bin) < 2.0 * grid.pitch {
        return Ok(RingMeasure { radius: 0.0, on_axis: true });
    }
    // contiguous band above half maximum around the peak bin
    let mut lo = peak_bin;
    while lo > 0 && mean(lo - 1) >= 0.5 * peak_val {
        lo -= 1;
    }
    let mut hi = peak_bin;
    while hi + 1 < n_bins && mean(hi + 1) >= 0.5 * peak_val {
        hi += 1;
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for b in lo..=hi {
        let r = r_of(b);
        let w = mean(b) * r; // annulus area weight ~ r
        num += w * r;
        den += w;
    }
    Ok(RingMeasure { radius: num / den, on_axis: false })
}

/// Count local intensity maxima along the interpolated circle whose
/// topographic prominence exceeds `prominence` times the circle maximum.
pub fn count_azimuthal_peaks(
    field: &ComplexField,
    center: (f64, f64),
    radius: f64,
    prominence: f64,
) -> Result<usize> {
    let grid = field.grid();
    if !(radius > 0.0) {
        return Err(Error::domain("peak-count radius must be positive"));
    }
    for (x, y) in [
        (center.0 - radius, center.1),
        (center.0 + radius, center.1),
        (center.0, center.1 - radius),
        (center.0, center.1 + radius),
    ] {
        if !grid.contains(x, y, 1.0) {
            return Err(Error::analysis("peak-count circle leaves the grid"));
        }
    }
    let n = 720usize;
    let mut vals = Vec::with_capacity(n);
    for k in 0..n {
        let phi = 2.0 * PI * k as f64 / n as f64;
        let v =
            field.intensity_at(center.0 + radius * phi.cos(), center.1 + radius * phi.sin())?;
        vals.push(v);
    }
    let global_max = vals.iter().cloned().fold(0.0f64, f64::max);
    if global_max <= 0.0 {
        return Ok(0);
    }
    let threshold = prominence * global_max;
    let mut count = 0usize;
    for k in 0..n {
        let prev = vals[(k + n - 1) % n];
        let next = vals[(k + 1) % n];
        if !(vals[k] > prev && vals[k] >= next) {
            continue;
        }
        // topographic prominence on the circular signal: walk both ways to
        // the first strictly higher sample, tracking the deepest valley.
        let mut left_min = vals[k];
        let mut idx = (k + n - 1) % n;
        let mut steps = 0;
        while vals[idx] <= vals[k] && steps < n {
            left_min = left_min.min(vals[idx]);
            idx = (idx + n - 1) % n;
            steps += 1;
        }
        let mut right_min = vals[k];
        idx = (k + 1) % n;
        steps = 0;
        while vals[idx] <= vals[k] && steps < n {
            right_min = right_min.min(vals[idx]);
            idx = (idx + 1) % n;
            steps += 1;
        }
        let reference = if steps >= n {
            // k is the global maximum: prominence against the deepest valley
            vals.iter().cloned().fold(f64::INFINITY, f64::min)
        } else {
            left_min.max(right_min)
        };
        if vals[k] - reference >= threshold {
            count += 1;
        }
    }
    Ok(count)
}

/// Per-order measurements for one diffraction-plane field.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrderReport {
    pub n: i32,
    /// Order center (x, y), meters.
    pub center: (f64, f64),
    /// Box-integrated power.
    pub power: f64,
    /// Interpolated intensity at the order center.
    pub on_axis_intensity: f64,
    /// Dominant ring radius, meters (0 when on-axis dominated).
    pub ring_radius: f64,
    pub ring_on_axis: bool,
    /// Topological winding about the order center, when determinate.
    pub winding: Option<i32>,
    pub winding_residual: Option<f64>,
    /// Dominant azimuthal mode and its power fraction.
    pub dominant_q: Option<i32>,
    pub dominant_q_fraction: Option<f64>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct OrderAsymmetry {
    pub n: i32,
    /// `(P_n - P_-n) / (P_n + P_-n)`.
    pub asymmetry: f64,
}

/// Full per-order report plus pairwise asymmetries.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiffractionReport {
    pub orders: Vec<OrderReport>,
    pub asymmetries: Vec<OrderAsymmetry>,
    /// Orders whose predicted centers fall outside the grid.
    pub out_of_grid: Vec<i32>,
}

impl DiffractionReport {
    pub fn order(&self, n: i32) -> Option<&OrderReport> {
        self.orders.iter().find(|o| o.n == n)
    }

    pub fn asymmetry(&self, n: i32) -> Option<f64> {
        self.asymmetries.iter().find(|a| a.n == n).map(|a| a.asymmetry)
    }
}

/// Pairwise asymmetry `A_n = (P_n - P_-n)/(P_n + P_-n)` from a report.
pub fn order_asymmetry(report: &DiffractionReport, n: i32) -> Result<f64> {
    let p_pos = report
        .order(n)
        .ok_or_else(|| Error::analysis(format!("order {n} missing from report")))?
        .power;
    let p_neg = report
        .order(-n)
        .ok_or_else(|| Error::analysis(format!("order {} missing from report", -n)))?
        .power;
    if p_pos + p_neg <= 0.0 {
        return Err(Error::analysis(format!("orders +-{n} both carry zero power")));
    }
    Ok((p_pos - p_neg) / (p_pos + p_neg))
}

/// Knobs for [`analyze_orders`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrderAnalysisParams {
    /// Grating period d, meters.
    pub period: f64,
    /// Lens focal length f, meters.
    pub focal_length: f64,
    pub n_min: i32,
    pub n_max: i32,
    /// Integration box half-width as a fraction of the order spacing.
    pub box_half_width_frac: f64,
    pub q_min: i32,
    pub q_max: i32,
    /// Extract winding numbers and mode spectra (skipped when false).
    pub mode_analysis: bool,
}

impl OrderAnalysisParams {
    pub fn new(period: f64, focal_length: f64, n_min: i32, n_max: i32) -> Self {
        OrderAnalysisParams {
            period,
            focal_length,
            n_min,
            n_max,
            box_half_width_frac: 0.4,
            q_min: -15,
            q_max: 15,
            mode_analysis: true,
        }
    }
}

/// Choose a winding radius with the healthiest amplitude: among candidate
/// radii, pick the one maximizing the minimum |psi| on the circle.
fn best_winding_radius(
    field: &ComplexField,
    center: (f64, f64),
    candidates: &[f64],
) -> Option<f64> {
    let mut best: Option<(f64, f64)> = None;
    for &r in candidates {
        let mut min_amp = f64::INFINITY;
        let n = 256;
        let mut ok = true;
        for k in 0..n {
            let phi = 2.0 * PI * k as f64 / n as f64;
            match field.sample(center.0 + r * phi.cos(), center.1 + r * phi.sin()) {
                Ok(v) => min_amp = min_amp.min(v.norm()),
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if ok && best.map_or(true, |(amp, _)| min_amp > amp) {
            best = Some((min_amp, r));
        }
    }
    best.map(|(_, r)| r)
}

/// Measure every requested order of a diffraction-plane field produced by a
/// grating of period `d` behind an ideal lens `f`.
pub fn analyze_orders(
    field: &ComplexField,
    params: &OrderAnalysisParams,
) -> Result<DiffractionReport> {
    let grid = field.grid();
    let locations = locate_orders(
        params.period,
        grid.wavelength,
        params.focal_length,
        params.n_min..=params.n_max,
        grid,
    )?;
    let spacing = grid.wavelength * params.focal_length / params.period;
    let hw = params.box_half_width_frac * spacing;
    let mut orders = Vec::new();
    let mut out_of_grid = Vec::new();
    for loc in &locations {
        if !loc.in_grid {
            out_of_grid.push(loc.n);
            continue;
        }
        let center = (loc.x, 0.0);
        let power = integrate_box(field, center, hw)?;
        let on_axis_intensity = field.intensity_at(center.0, center.1)?;
        let ring = ring_radius(field, center, hw)?;
        let mut winding = None;
        let mut winding_residual = None;
        let mut dominant_q = None;
        let mut dominant_q_fraction = None;
        if params.mode_analysis {
            let pitch = grid.pitch;
            // candidate circles: around the measured ring when present,
            // otherwise spread over the box
            let mut candidates: Vec<f64> = Vec::new();
            if !ring.on_axis {
                for s in [0.8, 1.0, 1.2] {
                    candidates.push((ring.radius * s).max(2.0 * pitch));
                }
            }
            for s in [0.1, 0.2, 0.3, 0.5, 0.7] {
                candidates.push((s * hw).max(2.0 * pitch));
            }
            if let Some(r) = best_winding_radius(field, center, &candidates) {
                if let Ok(w) = phase_winding(field, center, r) {
                    winding = Some(w.winding);
                    winding_residual = Some(w.residual);
                }
            }
            // annulus for the mode spectrum: hug the ring when present
            let (r_lo, mut r_hi) = if ring.on_axis {
                (pitch, (0.45 * hw).max(10.0 * pitch))
            } else {
                (
                    (0.4 * ring.radius).max(pitch),
                    (1.75 * ring.radius).min(0.9 * hw),
                )
            };
            if r_hi - r_lo < 9.0 * pitch {
                r_hi = r_lo + 9.0 * pitch;
            }
            if let Ok(spec) = azimuthal_mode_spectrum(
                field,
                center,
                r_lo,
                r_hi,
                params.q_min..=params.q_max,
            ) {
                dominant_q = Some(spec.dominant_q);
                dominant_q_fraction = Some(spec.fraction_of(spec.dominant_q));
            }
        }
        orders.push(OrderReport {
            n: loc.n,
            center,
            power,
            on_axis_intensity,
            ring_radius: ring.radius,
            ring_on_axis: ring.on_axis,
            winding,
            winding_residual,
            dominant_q,
            dominant_q_fraction,
        });
    }
    let mut asymmetries = Vec::new();
    let report = DiffractionReport { orders, asymmetries: Vec::new(), out_of_grid };
    for n in 1..=params.n_max {
        if report.order(n).is_some() && report.order(-n).is_some() {
            let a = order_asymmetry(&report, n)?;
            asymmetries.push(OrderAsymmetry { n, asymmetry: a });
        }
    }
    Ok(DiffractionReport { asymmetries, ..report })
}
