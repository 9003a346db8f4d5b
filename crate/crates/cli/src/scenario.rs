//! Execute a parsed scenario: beam -> mask -> propagation -> analysis ->
//! sorter, writing artifacts and assembling the run report.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use oamsim_core::{
    analyze_orders, azimuthal_mode_spectrum, count_azimuthal_peaks, make_beam, phase_winding,
    propagate, render_forked_grating, render_spiral_zone_plate, ring_radius, sampling_guard,
    sort_oam, BinaryMask, ComplexField, GuardStatus, OamSpectrum, OrderAnalysisParams,
    PropagationMethod, SorterConfig,
};

use crate::config::ScenarioConfig;
use crate::error::CliError;
use crate::imageio;
use crate::report::{CenterReport, RunReport, SortSection};

/// Which pipeline stages a subcommand wants.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StagePlan {
    pub analyze: bool,
    pub sort: bool,
}

impl StagePlan {
    pub fn diffract_only() -> Self {
        StagePlan { analyze: false, sort: false }
    }
    pub fn analyze() -> Self {
        StagePlan { analyze: true, sort: false }
    }
    pub fn sort() -> Self {
        StagePlan { analyze: false, sort: true }
    }
    pub fn full() -> Self {
        StagePlan { analyze: true, sort: true }
    }
}

pub struct RunOutput {
    pub report: RunReport,
    pub files: Vec<PathBuf>,
}

fn render_mask(cfg: &ScenarioConfig) -> Result<Option<BinaryMask>, CliError> {
    if let Some(g) = &cfg.grating {
        return Ok(Some(render_forked_grating(g, &cfg.grid)?));
    }
    if let Some(z) = &cfg.zone_plate {
        return Ok(Some(render_spiral_zone_plate(z, &cfg.grid)?));
    }
    Ok(None)
}

/// Run one scenario end to end.
///
/// Artifacts land in `out_dir` under the configured prefix. A failing
/// sampling guard aborts with a sampling error before any propagation.
pub fn run_scenario(
    cfg: &ScenarioConfig,
    out_dir: &Path,
    stages: StagePlan,
    write_files: bool,
) -> Result<RunOutput, CliError> {
    let t_start = Instant::now();
    let mut timings: BTreeMap<String, f64> = BTreeMap::new();
    let mut files = Vec::new();
    let prefix = cfg.output.prefix.clone();
    let path = |suffix: &str| out_dir.join(format!("{prefix}.{suffix}"));

    let t = Instant::now();
    let beam = make_beam(&cfg.grid, &cfg.beam)?;
    timings.insert("beam".into(), ms(t));

    let t = Instant::now();
    let mask = render_mask(cfg)?;
    let masked = match &mask {
        Some(m) => beam.apply_mask(m)?,
        None => beam.clone(),
    };
    timings.insert("mask".into(), ms(t));

    let guard = sampling_guard(&cfg.grid, &cfg.plan);
    if guard.status == GuardStatus::Fail {
        let detail = guard
            .checks
            .iter()
            .filter(|c| c.status == GuardStatus::Fail)
            .map(|c| format!("{}: {}", c.name, c.detail))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(CliError::Core(oamsim_core::Error::Sampling(format!(
            "sampling guard failed: {detail}"
        ))));
    }

    let t = Instant::now();
    let out_field = propagate(&masked, &cfg.plan)?;
    timings.insert("propagate".into(), ms(t));

    let mut report = RunReport {
        label: prefix.clone(),
        config: cfg.echo_ini(),
        wavelength_m: cfg.grid.wavelength,
        input_power: beam.power(),
        output_power: out_field.power(),
        guard,
        diffraction: None,
        spectra: Vec::new(),
        center: None,
        sort: None,
        timings_ms: BTreeMap::new(),
    };

    if stages.analyze {
        if let Some(ana) = &cfg.analysis {
            let t = Instant::now();
            if let Some(grating) = &cfg.grating {
                let focal_length = match cfg.plan.method {
                    PropagationMethod::LensFourier => cfg.plan.distance,
                    _ => {
                        return Err(CliError::Config(
                            "order analysis requires the lens-fourier propagation method".into(),
                        ))
                    }
                };
                let params = OrderAnalysisParams {
                    period: grating.period,
                    focal_length,
                    n_min: ana.orders_min,
                    n_max: ana.orders_max,
                    box_half_width_frac: ana.box_half_width_frac,
                    q_min: ana.q_min,
                    q_max: ana.q_max,
                    mode_analysis: ana.mode_analysis,
                };
                let diff = analyze_orders(&out_field, &params)?;
                if ana.mode_analysis {
                    report.spectra = order_spectra(&out_field, &params, &diff)?;
                }
                if write_files {
                    let p = path("orders.csv");
                    imageio::write_csv(
                        &p,
                        "n,center_x_m,power,on_axis_intensity,ring_radius_m,winding,dominant_q",
                        &diff
                            .orders
                            .iter()
                            .map(|o| {
                                format!(
                                    "{},{:e},{:e},{:e},{:e},{},{}",
                                    o.n,
                                    o.center.0,
                                    o.power,
                                    o.on_axis_intensity,
                                    o.ring_radius,
                                    o.winding.map_or(String::new(), |w| w.to_string()),
                                    o.dominant_q.map_or(String::new(), |q| q.to_string()),
                                )
                            })
                            .collect::<Vec<_>>(),
                    )?;
                    files.push(p);
                    let p = path("asymmetry.csv");
                    imageio::write_csv(
                        &p,
                        "n,asymmetry",
                        &diff
                            .asymmetries
                            .iter()
                            .map(|a| format!("{},{:e}", a.n, a.asymmetry))
                            .collect::<Vec<_>>(),
                    )?;
                    files.push(p);
                }
                report.diffraction = Some(diff);
            } else {
                // no grating: characterize the pattern about the origin
                let grid = out_field.grid();
                let r_max = ana.ring_search_frac * grid.extent_x().min(grid.extent_y());
                let ring = ring_radius(&out_field, (0.0, 0.0), r_max)?;
                let peak_count = if ring.on_axis {
                    None
                } else {
                    Some(count_azimuthal_peaks(
                        &out_field,
                        (0.0, 0.0),
                        ring.radius,
                        ana.peak_prominence,
                    )?)
                };
                let mut winding = None;
                let mut dominant_q = None;
                let mut dominant_q_fraction = None;
                if ana.mode_analysis && !ring.on_axis {
                    if let Ok(w) = phase_winding(&out_field, (0.0, 0.0), ring.radius) {
                        winding = Some(w.winding);
                    }
                    let r_lo = (0.4 * ring.radius).max(grid.pitch);
                    let r_hi = (1.75 * ring.radius).max(r_lo + 9.0 * grid.pitch);
                    if let Ok(spec) = azimuthal_mode_spectrum(
                        &out_field,
                        (0.0, 0.0),
                        r_lo,
                        r_hi,
                        ana.q_min..=ana.q_max,
                    ) {
                        dominant_q = Some(spec.dominant_q);
                        dominant_q_fraction = Some(spec.fraction_of(spec.dominant_q));
                        report.spectra.push(spec);
                    }
                }
                report.center = Some(CenterReport {
                    ring_radius_m: ring.radius,
                    ring_on_axis: ring.on_axis,
                    peak_count,
                    peak_prominence: ana.peak_prominence,
                    winding,
                    dominant_q,
                    dominant_q_fraction,
                });
            }
            timings.insert("analyze".into(), ms(t));
        }
    }

    if stages.sort {
        if let Some(sorter) = &cfg.sorter {
            let grating = cfg
                .grating
                .clone()
                .ok_or_else(|| CliError::Config("[sorter] requires [grating]".into()))?;
            let focal_length = match cfg.plan.method {
                PropagationMethod::LensFourier => cfg.plan.distance,
                _ => {
                    return Err(CliError::Config(
                        "the sorter requires the lens-fourier propagation method".into(),
                    ))
                }
            };
            let t = Instant::now();
            let spacing = cfg.grid.wavelength * focal_length / grating.period;
            let sorter_config = SorterConfig {
                grating,
                focal_length,
                pinhole_radius: sorter.pinhole_frac * spacing,
                n_min: sorter.orders_min,
                n_max: sorter.orders_max,
            };
            let result = sort_oam(&beam, &sorter_config)?;
            report.sort = Some(SortSection {
                pinhole_radius_m: sorter_config.pinhole_radius,
                order_spacing_m: spacing,
                result,
            });
            timings.insert("sort".into(), ms(t));
        }
    }

    if write_files {
        let t = Instant::now();
        if cfg.output.mask {
            if let Some(m) = &mask {
                let p = path("mask.pbm");
                imageio::write_mask_pbm(m, &p)?;
                files.push(p);
            }
        }
        if cfg.output.fields {
            let p = path("intensity.pfm");
            imageio::write_intensity_pfm(&out_field, &p)?;
            files.push(p);
            let p = path("phase.pfm");
            imageio::write_phase_pfm(&out_field, &p)?;
            files.push(p);
        }
        if cfg.output.quicklook {
            let p = path("quicklook.pgm");
            imageio::write_quicklook_pgm(&out_field, &p)?;
            files.push(p);
        }
        let p = path("config.ini");
        let echo = cfg.echo_ini();
        imageio::atomic_write(&p, |w| w.write_all(echo.as_bytes()))?;
        files.push(p);
        timings.insert("write".into(), ms(t));
    }

    timings.insert("total".into(), ms(t_start));
    report.timings_ms = timings;

    if write_files {
        let p = path("report.json");
        report.write_json(&p)?;
        files.push(p);
    }

    Ok(RunOutput { report, files })
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Re-measure each in-grid order's annulus spectrum so the report carries the
/// full mode distributions, not only the dominant q.
fn order_spectra(
    field: &ComplexField,
    params: &OrderAnalysisParams,
    diff: &oamsim_core::DiffractionReport,
) -> Result<Vec<OamSpectrum>, CliError> {
    let grid = field.grid();
    let spacing = grid.wavelength * params.focal_length / params.period;
    let hw = params.box_half_width_frac * spacing;
    let mut spectra = Vec::new();
    for order in &diff.orders {
        let (r_lo, r_hi) = if order.ring_on_axis {
            (grid.pitch, (0.45 * hw).max(10.0 * grid.pitch))
        } else {
            let lo = (0.4 * order.ring_radius).max(grid.pitch);
            let hi = (1.75 * order.ring_radius).min(0.9 * hw).max(lo + 9.0 * grid.pitch);
            (lo, hi)
        };
        if let Ok(spec) = azimuthal_mode_spectrum(
            field,
            order.center,
            r_lo,
            r_hi,
            params.q_min..=params.q_max,
        ) {
            spectra.push(spec);
        }
    }
    Ok(spectra)
}

/// Render only the mask of a scenario (the `mask` subcommand).
pub fn run_mask_only(cfg: &ScenarioConfig, out_dir: &Path) -> Result<(PathBuf, f64), CliError> {
    let mask = render_mask(cfg)?
        .ok_or_else(|| CliError::Config("scenario has no [grating] or [zone-plate]".into()))?;
    let p = out_dir.join(format!("{}.mask.pbm", cfg.output.prefix));
    imageio::write_mask_pbm(&mask, &p)?;
    Ok((p, mask.open_fraction_in_aperture()))
}

/// Synthesize only the input beam (the `beam` subcommand).
pub fn run_beam_only(cfg: &ScenarioConfig, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let beam = make_beam(&cfg.grid, &cfg.beam)?;
    let mut files = Vec::new();
    let prefix = &cfg.output.prefix;
    let p = out_dir.join(format!("{prefix}.beam.intensity.pfm"));
    imageio::write_intensity_pfm(&beam, &p)?;
    files.push(p);
    let p = out_dir.join(format!("{prefix}.beam.phase.pfm"));
    imageio::write_phase_pfm(&beam, &p)?;
    files.push(p);
    if cfg.output.quicklook {
        let p = out_dir.join(format!("{prefix}.beam.quicklook.pgm"));
        imageio::write_quicklook_pgm(&beam, &p)?;
        files.push(p);
    }
    Ok(files)
}
