//! Scenario configuration: flat INI-style sections with units encoded in the
//! key names (`pitch_nm`, `period_um`, `focal_length_m`, `voltage_kv`).
//!
//! Parsing keeps the raw key/value strings. Defaults are inserted as literal
//! strings before typing, and the echoed configuration is the completed
//! string map, so re-parsing an echo reproduces bit-identical parameters.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use oamsim_core::{
    electron_wavelength, BeamProfile, BeamSpec, ForkedGratingSpec, GridSpec, PropagationMethod,
    PropagationPlan, SpiralZonePlateSpec,
};

use crate::error::CliError;

/// Section -> key -> raw value, both ordered for stable echoes.
pub type RawConfig = BTreeMap<String, BTreeMap<String, String>>;

const SECTIONS: &[&str] = &[
    "grid", "beam", "grating", "zone-plate", "propagation", "analysis", "sorter", "output",
];

const KEYS: &[(&str, &[&str])] = &[
    ("grid", &["nx", "ny", "pitch_nm", "voltage_kv", "wavelength_pm"]),
    (
        "beam",
        &["m", "profile", "radius_um", "inner_radius_um", "center_x_um", "center_y_um"],
    ),
    (
        "grating",
        &["period_um", "burgers", "aperture_radius_um", "duty", "center_x_um", "center_y_um"],
    ),
    ("zone-plate", &["charge", "focal_length_m", "aperture_radius_um", "duty"]),
    ("propagation", &["method", "focal_length_m", "distance_m", "band_limit"]),
    (
        "analysis",
        &[
            "orders_min",
            "orders_max",
            "box_half_width_frac",
            "q_min",
            "q_max",
            "mode_analysis",
            "peak_prominence",
            "ring_search_frac",
        ],
    ),
    ("sorter", &["pinhole_frac", "orders_min", "orders_max"]),
    ("output", &["prefix", "fields", "quicklook", "mask"]),
];

fn err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Parse INI text into the raw map, rejecting unknown sections and keys.
pub fn parse_ini(text: &str) -> Result<RawConfig, CliError> {
    let mut raw = RawConfig::new();
    let mut section: Option<String> = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = match line.find(['#', ';']) {
            Some(idx) => &line[..idx],
            None => line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| err(format!("line {}: unterminated section", lineno + 1)))?
                .trim()
                .to_string();
            if !SECTIONS.contains(&name.as_str()) {
                return Err(err(format!(
                    "line {}: unknown section [{name}]; known sections: {}",
                    lineno + 1,
                    SECTIONS.join(", ")
                )));
            }
            raw.entry(name.clone()).or_default();
            section = Some(name);
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("line {}: expected key = value", lineno + 1)))?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        let section = section
            .clone()
            .ok_or_else(|| err(format!("line {}: key outside any section", lineno + 1)))?;
        let known = KEYS
            .iter()
            .find(|(s, _)| *s == section)
            .map(|(_, ks)| ks.contains(&key.as_str()))
            .unwrap_or(false);
        if !known {
            return Err(err(format!(
                "line {}: unknown key '{key}' in section [{section}]",
                lineno + 1
            )));
        }
        raw.get_mut(&section).unwrap().insert(key, value);
    }
    Ok(raw)
}

/// Render the raw map back to INI text (sections and keys in schema order).
pub fn render_ini(raw: &RawConfig) -> String {
    let mut out = String::new();
    for &section in SECTIONS {
        if let Some(map) = raw.get(section) {
            let _ = writeln!(out, "[{section}]");
            let order = KEYS.iter().find(|(s, _)| *s == section).map(|(_, k)| *k).unwrap_or(&[]);
            for &key in order {
                if let Some(v) = map.get(key) {
                    let _ = writeln!(out, "{key} = {v}");
                }
            }
            let _ = writeln!(out);
        }
    }
    out
}

fn set_default(raw: &mut RawConfig, section: &str, key: &str, value: &str) {
    raw.entry(section.to_string())
        .or_default()
        .entry(key.to_string())
        .or_insert_with(|| value.to_string());
}

/// Insert every defaultable key that is missing, in place.
pub fn apply_defaults(raw: &mut RawConfig) -> Result<(), CliError> {
    if !raw.contains_key("grid") {
        return Err(err("missing required section [grid]"));
    }
    if !raw.contains_key("beam") {
        return Err(err("missing required section [beam]"));
    }
    if !raw.contains_key("propagation") {
        return Err(err("missing required section [propagation]"));
    }
    set_default(raw, "grid", "nx", "2048");
    let nx = raw["grid"]["nx"].clone();
    set_default(raw, "grid", "ny", &nx);
    set_default(raw, "beam", "m", "0");
    set_default(raw, "beam", "profile", "uniform-disk");
    set_default(raw, "beam", "center_x_um", "0");
    set_default(raw, "beam", "center_y_um", "0");
    if raw.contains_key("grating") {
        set_default(raw, "grating", "burgers", "1");
        set_default(raw, "grating", "duty", "0.5");
        set_default(raw, "grating", "center_x_um", "0");
        set_default(raw, "grating", "center_y_um", "0");
    }
    if raw.contains_key("zone-plate") {
        set_default(raw, "zone-plate", "duty", "0.5");
    }
    set_default(raw, "propagation", "band_limit", "0.95");
    if raw.contains_key("analysis") {
        set_default(raw, "analysis", "orders_min", "-3");
        set_default(raw, "analysis", "orders_max", "3");
        set_default(raw, "analysis", "box_half_width_frac", "0.4");
        set_default(raw, "analysis", "q_min", "-15");
        set_default(raw, "analysis", "q_max", "15");
        set_default(raw, "analysis", "mode_analysis", "true");
        set_default(raw, "analysis", "peak_prominence", "0.1");
        set_default(raw, "analysis", "ring_search_frac", "0.2");
    }
    if raw.contains_key("sorter") {
        set_default(raw, "sorter", "pinhole_frac", "0.2");
        set_default(raw, "sorter", "orders_min", "-5");
        set_default(raw, "sorter", "orders_max", "5");
    }
    set_default(raw, "output", "prefix", "run");
    set_default(raw, "output", "fields", "true");
    set_default(raw, "output", "quicklook", "true");
    set_default(raw, "output", "mask", "true");
    Ok(())
}

struct Section<'a> {
    name: &'static str,
    map: &'a BTreeMap<String, String>,
}

impl<'a> Section<'a> {
    fn get(&self, key: &str) -> Result<&'a str, CliError> {
        self.map
            .get(key)
            .map(|s| s.as_str())
            .ok_or_else(|| err(format!("[{}] is missing required key '{key}'", self.name)))
    }

    fn opt(&self, key: &str) -> Option<&'a str> {
        self.map.get(key).map(|s| s.as_str())
    }

    fn f64(&self, key: &str) -> Result<f64, CliError> {
        self.get(key)?
            .parse::<f64>()
            .map_err(|_| err(format!("[{}] {key}: not a number", self.name)))
    }

    fn i32(&self, key: &str) -> Result<i32, CliError> {
        self.get(key)?
            .parse::<i32>()
            .map_err(|_| err(format!("[{}] {key}: not an integer", self.name)))
    }

    fn usize(&self, key: &str) -> Result<usize, CliError> {
        self.get(key)?
            .parse::<usize>()
            .map_err(|_| err(format!("[{}] {key}: not a nonnegative integer", self.name)))
    }

    fn bool(&self, key: &str) -> Result<bool, CliError> {
        match self.get(key)? {
            "true" => Ok(true),
            "false" => Ok(false),
            other => Err(err(format!("[{}] {key}: expected true/false, got '{other}'", self.name))),
        }
    }
}

/// Fully typed scenario description.
#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    pub grid: GridSpec,
    pub beam: BeamSpec,
    pub grating: Option<ForkedGratingSpec>,
    pub zone_plate: Option<SpiralZonePlateSpec>,
    pub plan: PropagationPlan,
    pub analysis: Option<AnalysisConfig>,
    pub sorter: Option<SorterSection>,
    pub output: OutputConfig,
    /// Completed raw map; `render_ini` of this is the canonical echo.
    pub raw: RawConfig,
}

#[derive(Clone, Debug)]
pub struct AnalysisConfig {
    pub orders_min: i32,
    pub orders_max: i32,
    pub box_half_width_frac: f64,
    pub q_min: i32,
    pub q_max: i32,
    pub mode_analysis: bool,
    pub peak_prominence: f64,
    pub ring_search_frac: f64,
}

#[derive(Clone, Debug)]
pub struct SorterSection {
    pub pinhole_frac: f64,
    pub orders_min: i32,
    pub orders_max: i32,
}

#[derive(Clone, Debug)]
pub struct OutputConfig {
    pub prefix: String,
    pub fields: bool,
    pub quicklook: bool,
    pub mask: bool,
}

impl ScenarioConfig {
    pub fn from_ini(text: &str) -> Result<Self, CliError> {
        let mut raw = parse_ini(text)?;
        apply_defaults(&mut raw)?;
        Self::from_raw(raw)
    }

    pub fn echo_ini(&self) -> String {
        render_ini(&self.raw)
    }

    fn from_raw(raw: RawConfig) -> Result<Self, CliError> {
        let section = |name: &'static str| -> Option<Section> {
            raw.get(name).map(|map| Section { name, map })
        };

        let grid_s = section("grid").ok_or_else(|| err("missing [grid]"))?;
        let nx = grid_s.usize("nx")?;
        let ny = grid_s.usize("ny")?;
        let pitch = grid_s.f64("pitch_nm")? * 1e-9;
        let wavelength = match (grid_s.opt("voltage_kv"), grid_s.opt("wavelength_pm")) {
            (Some(_), Some(_)) => {
                return Err(err("[grid] give either voltage_kv or wavelength_pm, not both"))
            }
            (Some(_), None) => electron_wavelength(grid_s.f64("voltage_kv")? * 1e3)?,
            (None, Some(_)) => grid_s.f64("wavelength_pm")? * 1e-12,
            (None, None) => {
                return Err(err("[grid] needs voltage_kv or wavelength_pm"));
            }
        };
        let grid = GridSpec::new(nx, ny, pitch, wavelength)?;

        let beam_s = section("beam").ok_or_else(|| err("missing [beam]"))?;
        let radius = beam_s.f64("radius_um")? * 1e-6;
        let profile = match beam_s.get("profile")? {
            "uniform-disk" => BeamProfile::UniformDisk { radius },
            "gaussian" => BeamProfile::Gaussian { waist: radius },
            "annulus" => BeamProfile::Annulus {
                inner: beam_s.f64("inner_radius_um")? * 1e-6,
                outer: radius,
            },
            other => {
                return Err(err(format!(
                    "[beam] profile '{other}' is not one of uniform-disk, gaussian, annulus"
                )))
            }
        };
        let beam = BeamSpec {
            m: beam_s.i32("m")?,
            profile,
            center: (beam_s.f64("center_x_um")? * 1e-6, beam_s.f64("center_y_um")? * 1e-6),
        };

        let grating = match section("grating") {
            Some(s) => Some(ForkedGratingSpec {
                period: s.f64("period_um")? * 1e-6,
                burgers: s.i32("burgers")?,
                aperture_radius: s.f64("aperture_radius_um")? * 1e-6,
                duty: s.f64("duty")?,
                center: (s.f64("center_x_um")? * 1e-6, s.f64("center_y_um")? * 1e-6),
            }),
            None => None,
        };
        let zone_plate = match section("zone-plate") {
            Some(s) => Some(SpiralZonePlateSpec {
                charge: s.i32("charge")?,
                focal_length: s.f64("focal_length_m")?,
                aperture_radius: s.f64("aperture_radius_um")? * 1e-6,
                duty: s.f64("duty")?,
                center: (0.0, 0.0),
            }),
            None => None,
        };
        if grating.is_some() && zone_plate.is_some() {
            return Err(err("give either [grating] or [zone-plate], not both"));
        }

        let prop_s = section("propagation").ok_or_else(|| err("missing [propagation]"))?;
        let band_limit = prop_s.f64("band_limit")?;
        let plan = match prop_s.get("method")? {
            "lens-fourier" => PropagationPlan::lens_fourier(prop_s.f64("focal_length_m")?),
            "angular-spectrum" => {
                PropagationPlan::angular_spectrum(prop_s.f64("distance_m")?)
                    .with_band_limit(band_limit)?
            }
            "fresnel-transfer" => {
                PropagationPlan::fresnel_transfer(prop_s.f64("distance_m")?)
                    .with_band_limit(band_limit)?
            }
            other => {
                return Err(err(format!(
                    "[propagation] method '{other}' is not one of angular-spectrum, \
                     fresnel-transfer, lens-fourier"
                )))
            }
        };
        let aperture = grating
            .as_ref()
            .map(|g| g.aperture_radius)
            .or(zone_plate.as_ref().map(|z| z.aperture_radius));
        let plan = match aperture {
            Some(r) => plan.with_aperture(2.0 * r),
            None => plan,
        };

        let analysis = match section("analysis") {
            Some(s) => Some(AnalysisConfig {
                orders_min: s.i32("orders_min")?,
                orders_max: s.i32("orders_max")?,
                box_half_width_frac: s.f64("box_half_width_frac")?,
                q_min: s.i32("q_min")?,
                q_max: s.i32("q_max")?,
                mode_analysis: s.bool("mode_analysis")?,
                peak_prominence: s.f64("peak_prominence")?,
                ring_search_frac: s.f64("ring_search_frac")?,
            }),
            None => None,
        };
        let sorter = match section("sorter") {
            Some(s) => Some(SorterSection {
                pinhole_frac: s.f64("pinhole_frac")?,
                orders_min: s.i32("orders_min")?,
                orders_max: s.i32("orders_max")?,
            }),
            None => None,
        };
        if sorter.is_some() && grating.is_none() {
            return Err(err("[sorter] requires a [grating] section"));
        }

        let out_s = section("output").ok_or_else(|| err("missing [output]"))?;
        let output = OutputConfig {
            prefix: out_s.get("prefix")?.to_string(),
            fields: out_s.bool("fields")?,
            quicklook: out_s.bool("quicklook")?,
            mask: out_s.bool("mask")?,
        };

        Ok(ScenarioConfig {
            grid,
            beam,
            grating,
            zone_plate,
            plan,
            analysis,
            sorter,
            output,
            raw,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
[grid]
pitch_nm = 50
voltage_kv = 200

[beam]
m = 1
radius_um = 5

[propagation]
method = lens-fourier
focal_length_m = 1.0
";

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg = ScenarioConfig::from_ini(MINIMAL).unwrap();
        assert_eq!(cfg.grid.nx, 2048);
        assert_eq!(cfg.grid.ny, 2048);
        assert!((cfg.grid.wavelength / 2.50793404505e-12 - 1.0).abs() < 1e-9);
        assert_eq!(cfg.beam.m, 1);
        assert!(cfg.grating.is_none());
        assert_eq!(cfg.output.prefix, "run");
    }

    #[test]
    fn echo_round_trips_exactly() {
        let cfg = ScenarioConfig::from_ini(MINIMAL).unwrap();
        let echo = cfg.echo_ini();
        let cfg2 = ScenarioConfig::from_ini(&echo).unwrap();
        assert_eq!(cfg.grid, cfg2.grid);
        assert_eq!(cfg.beam, cfg2.beam);
        assert_eq!(cfg.plan, cfg2.plan);
        assert_eq!(cfg2.echo_ini(), echo);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = format!("{MINIMAL}\n[grid]\nbogus = 1\n");
        assert!(ScenarioConfig::from_ini(&bad).is_err());
        let bad2 = format!("{MINIMAL}\n[uknown-section]\nx = 1\n");
        assert!(ScenarioConfig::from_ini(&bad2).is_err());
    }

    #[test]
    fn both_wavelength_sources_rejected() {
        let bad = MINIMAL.replace("voltage_kv = 200", "voltage_kv = 200\nwavelength_pm = 2.5");
        assert!(ScenarioConfig::from_ini(&bad).is_err());
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = format!("# leading comment\n{MINIMAL}\n; trailing comment\n");
        assert!(ScenarioConfig::from_ini(&text).is_ok());
    }
}
