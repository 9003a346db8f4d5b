//! Bundled, named reproduction scenarios.

use std::path::Path;

use crate::config::ScenarioConfig;
use crate::error::CliError;
use crate::imageio::write_csv;
use crate::scenario::{run_scenario, RunOutput, StagePlan};

pub const SCENARIO_NAMES: &[&str] =
    &["fig1f", "fig2a", "fig2c", "fig2d", "fig3", "sorter-demo"];

fn asset(name: &str) -> Option<&'static str> {
    match name {
        "fig1f" => Some(include_str!("../assets/fig1f.ini")),
        "fig2a" => Some(include_str!("../assets/fig2a.ini")),
        "fig2c" => Some(include_str!("../assets/fig2c.ini")),
        "fig2d" => Some(include_str!("../assets/fig2d.ini")),
        "fig3" => Some(include_str!("../assets/fig3.ini")),
        "sorter-demo" => Some(include_str!("../assets/sorter_demo.ini")),
        _ => None,
    }
}

/// The bundled INI text for a named scenario.
pub fn scenario_ini(name: &str) -> Result<&'static str, CliError> {
    asset(name).ok_or_else(|| {
        CliError::Config(format!(
            "unknown scenario '{name}'; available: {}",
            SCENARIO_NAMES.join(", ")
        ))
    })
}

/// Run a named scenario. Most names execute once; `fig3` runs the three
/// incident charges 0, +1, -1 and `sorter-demo` sweeps the input charge
/// from -5 to +5, each writing a summary table next to the per-run reports.
pub fn reproduce(name: &str, out_dir: &Path, write_files: bool) -> Result<Vec<RunOutput>, CliError> {
    let base = ScenarioConfig::from_ini(scenario_ini(name)?)?;
    match name {
        "fig3" => {
            let mut outputs = Vec::new();
            for m in [0i32, 1, -1] {
                let label = fig3_label(m);
                let cfg = base.with_overrides(&[
                    ("beam", "m", &m.to_string()),
                    ("output", "prefix", &label),
                ])?;
                outputs.push(run_scenario(&cfg, out_dir, StagePlan::analyze(), write_files)?);
            }
            if write_files {
                write_fig3_table(out_dir, &outputs)?;
            }
            Ok(outputs)
        }
        "sorter-demo" => {
            let mut outputs = Vec::new();
            for m in -5i32..=5 {
                let label = format!("sorter_demo_m{m}");
                let cfg = base.with_overrides(&[
                    ("beam", "m", &m.to_string()),
                    ("output", "prefix", &label),
                ])?;
                outputs.push(run_scenario(&cfg, out_dir, StagePlan::sort(), write_files)?);
            }
            if write_files {
                let rows: Vec<String> = outputs
                    .iter()
                    .enumerate()
                    .map(|(idx, out)| {
                        let m_in = idx as i32 - 5;
                        let sort = out.report.sort.as_ref().expect("sorter ran");
                        format!(
                            "{},{},{:.6}",
                            m_in, sort.result.m_hat, sort.result.confidence
                        )
                    })
                    .collect();
                write_csv(&out_dir.join("sorter_demo.summary.csv"), "m_in,m_hat,confidence", &rows)?;
            }
            Ok(outputs)
        }
        _ => Ok(vec![run_scenario(&base, out_dir, StagePlan::full(), write_files)?]),
    }
}

pub fn fig3_label(m: i32) -> String {
    match m {
        0 => "fig3_m0".to_string(),
        m if m > 0 => format!("fig3_mp{m}"),
        m => format!("fig3_mm{}", -m),
    }
}

fn write_fig3_table(out_dir: &Path, outputs: &[RunOutput]) -> Result<(), CliError> {
    // per-order integrated powers and pairwise asymmetries for the three runs
    let mut rows = Vec::new();
    let diff0 = outputs[0].report.diffraction.as_ref().expect("fig3 analysis");
    for order in &diff0.orders {
        let n = order.n;
        let mut row = format!("{n}");
        for out in outputs {
            let d = out.report.diffraction.as_ref().unwrap();
            let p = d.order(n).map(|o| o.power).unwrap_or(f64::NAN);
            row.push_str(&format!(",{p:e}"));
        }
        rows.push(row);
    }
    write_csv(
        &out_dir.join("fig3.orders.csv"),
        "n,power_m0,power_mp1,power_mm1",
        &rows,
    )?;
    let mut rows = Vec::new();
    for a in &diff0.asymmetries {
        let n = a.n;
        let mut row = format!("{n}");
        for out in outputs {
            let d = out.report.diffraction.as_ref().unwrap();
            let v = d.asymmetry(n).unwrap_or(f64::NAN);
            row.push_str(&format!(",{v:e}"));
        }
        rows.push(row);
    }
    write_csv(
        &out_dir.join("fig3.asymmetry.csv"),
        "n,asym_m0,asym_mp1,asym_mm1",
        &rows,
    )
}
