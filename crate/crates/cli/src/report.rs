//! The JSON run report: everything needed to reproduce and audit one
//! scenario execution.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use oamsim_core::{DiffractionReport, GuardReport, OamSpectrum, SortResult};

use crate::error::CliError;
use crate::imageio::atomic_write;

/// Ring/peak observables about the pattern center (zone-plate scenarios).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CenterReport {
    pub ring_radius_m: f64,
    pub ring_on_axis: bool,
    pub peak_count: Option<usize>,
    pub peak_prominence: f64,
    pub winding: Option<i32>,
    pub dominant_q: Option<i32>,
    pub dominant_q_fraction: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SortSection {
    pub pinhole_radius_m: f64,
    pub order_spacing_m: f64,
    pub result: SortResult,
}

/// Full record of one scenario run. Two runs of the same configuration on
/// the same build serialize byte-identically except for `timings_ms`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub label: String,
    /// Fully resolved configuration echo; parsing this INI text reproduces
    /// the run.
    pub config: String,
    pub wavelength_m: f64,
    pub input_power: f64,
    pub output_power: f64,
    pub guard: GuardReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diffraction: Option<DiffractionReport>,
    /// Azimuthal mode spectra measured during analysis (one per order when
    /// order analysis ran, one about the origin otherwise).
    pub spectra: Vec<OamSpectrum>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<CenterReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sort: Option<SortSection>,
    pub timings_ms: BTreeMap<String, f64>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn write_json(&self, path: &Path) -> Result<(), CliError> {
        let json = self.to_json();
        atomic_write(path, |w| {
            w.write_all(json.as_bytes())?;
            w.write_all(b"\n")
        })
    }
}
