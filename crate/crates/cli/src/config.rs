//! Flat `key = value` run configuration.
//!
//! ```text
//! # comment
//! scenario = piston
//! hbar = 1
//! clock.d = 360
//! piston.displacement = 1.0
//! tol.piston.phase = 0.02
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use modclock::scenarios::{PistonConfig, SpinPulseConfig, SpinRegime};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Number, Value};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ScenarioId {
    DoubleSlit,
    Piston,
    Spin,
}

impl ScenarioId {
    /// Ids of the checks a run of this scenario reports.
    pub fn check_ids(self) -> &'static [&'static str] {
        match self {
            ScenarioId::DoubleSlit => &[
                "doubleslit.phase_law",
                "doubleslit.polynomial",
                "doubleslit.collapse",
            ],
            ScenarioId::Piston => &["piston.wall_mass", "piston.phase", "piston.static_phase"],
            ScenarioId::Spin => &["spin.max_flip", "spin.norm"],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScenarioId::DoubleSlit => "doubleslit",
            ScenarioId::Piston => "piston",
            ScenarioId::Spin => "spin",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "doubleslit" => Some(ScenarioId::DoubleSlit),
            "piston" => Some(ScenarioId::Piston),
            "spin" => Some(ScenarioId::Spin),
            _ => None,
        }
    }
}

/// Raw entries; a repeated key keeps its last value.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct KeyValues {
    entries: BTreeMap<String, String>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!(
                    "line {}: expected `key = value`, got `{line}`",
                    i + 1
                ))
            })?;
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(CliError::Config(format!(
                    "line {}: invalid key `{key}`",
                    i + 1
                )));
            }
            if value.is_empty() {
                return Err(CliError::Config(format!(
                    "line {}: `{key}` has no value",
                    i + 1
                )));
            }
            entries.insert(key.to_string(), value.to_string());
        }
        Ok(Self { entries })
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn section(&self, prefix: &str) -> impl Iterator<Item = (&str, &str)> {
        let dotted = format!("{prefix}.");
        self.entries
            .iter()
            .filter_map(move |(k, v)| k.strip_prefix(&dotted).map(|rest| (rest, v.as_str())))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DoubleSlitParams {
    pub n: usize,
    pub length: f64,
    pub mass: f64,
    /// Packet separation in grid sites.
    pub sites: i64,
    /// Single phase; when absent `phis` values evenly spaced over `[0, 2π)`.
    pub phi: Option<f64>,
    pub phis: usize,
    pub max_degree: usize,
    pub n_max: usize,
    pub collapse_phi: f64,
}

impl Default for DoubleSlitParams {
    fn default() -> Self {
        Self {
            n: 256,
            length: 256.0,
            mass: 1.0,
            sites: 32,
            phi: None,
            phis: 12,
            max_degree: 4,
            n_max: 5,
            collapse_phi: 0.4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioParams {
    DoubleSlit(DoubleSlitParams),
    Piston(PistonConfig),
    Spin(SpinPulseConfig, SpinRegime),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub scenario: ScenarioId,
    pub params: ScenarioParams,
    pub hbar: Option<f64>,
    pub out: Option<PathBuf>,
    pub tolerances: BTreeMap<String, f64>,
}

const TOP_LEVEL: &[&str] = &["scenario", "hbar", "out"];

impl RunConfig {
    pub fn from_key_values(kv: &KeyValues) -> Result<Self, CliError> {
        let scenario_name = kv
            .get("scenario")
            .ok_or_else(|| CliError::Config("missing `scenario`".into()))?;
        let scenario = ScenarioId::parse(scenario_name).ok_or_else(|| {
            CliError::Config(format!(
                "unknown scenario `{scenario_name}` (expected doubleslit, piston or spin)"
            ))
        })?;

        for key in kv.entries.keys() {
            let known = TOP_LEVEL.contains(&key.as_str())
                || key.starts_with("tol.")
                || key.starts_with("clock.")
                || key.starts_with(&format!("{}.", scenario.name()));
            if !known {
                return Err(CliError::Config(format!(
                    "key `{key}` does not apply to scenario {}",
                    scenario.name()
                )));
            }
        }

        let hbar = kv.get("hbar").map(|v| parse_f64("hbar", v)).transpose()?;
        if let Some(h) = hbar {
            if !(h > 0.0 && h.is_finite()) {
                return Err(CliError::Config(format!("hbar must be positive, got {h}")));
            }
        }
        let mut tolerances = BTreeMap::new();
        for (id, v) in kv.section("tol") {
            let tol = parse_f64(id, v)?;
            if !(tol >= 0.0 && tol.is_finite()) {
                return Err(CliError::Config(format!(
                    "tolerance for `{id}` must be non-negative"
                )));
            }
            if !scenario.check_ids().contains(&id) {
                return Err(CliError::Config(format!(
                    "tolerance override for unknown check `{id}` (known: {})",
                    scenario.check_ids().join(", ")
                )));
            }
            tolerances.insert(id.to_string(), tol);
        }
        let clock_d = kv
            .get("clock.d")
            .map(|v| v.parse::<usize>().map_err(|_| bad("clock.d", v)))
            .transpose()?;
        let clock_dt = kv
            .get("clock.dt")
            .map(|v| parse_f64("clock.dt", v))
            .transpose()?;
        for (k, _) in kv.section("clock") {
            if k != "d" && k != "dt" {
                return Err(CliError::Config(format!("unknown key `clock.{k}`")));
            }
        }

        let params = match scenario {
            ScenarioId::DoubleSlit => {
                if clock_d.is_some() || clock_dt.is_some() {
                    return Err(CliError::Config(
                        "doubleslit has no clock; set doubleslit.n instead of clock.*".into(),
                    ));
                }
                ScenarioParams::DoubleSlit(double_slit_params(kv)?)
            }
            ScenarioId::Piston => {
                let cfg: PistonConfig = section_struct(kv, "piston", &[])?;
                if clock_dt.is_some() {
                    return Err(CliError::Config(
                        "piston tick follows from the revival period; set clock.d instead of clock.dt"
                            .into(),
                    ));
                }
                ScenarioParams::Piston(match clock_d {
                    Some(d) => refine_piston(cfg, d)?,
                    None => cfg,
                })
            }
            ScenarioId::Spin => {
                let mut cfg: SpinPulseConfig = section_struct(kv, "spin", &["regime"])?;
                let regime = match kv.get("spin.regime") {
                    Some(r) => SpinRegime::parse(r).ok_or_else(|| bad("spin.regime", r))?,
                    None => SpinRegime::Resonant,
                };
                if let Some(d) = clock_d {
                    let base = cfg.ticks_per_period * cfg.n_periods;
                    cfg = cfg.refined(refinement("clock.d", d as f64, base as f64)?);
                }
                if let Some(dt) = clock_dt {
                    let base = modclock::scenarios::spin_schedule(&cfg, regime)?.delta_t;
                    cfg = cfg.refined(refinement("clock.dt", base, dt)?);
                }
                ScenarioParams::Spin(cfg, regime)
            }
        };

        Ok(Self {
            scenario,
            params,
            hbar,
            out: kv.get("out").map(PathBuf::from),
            tolerances,
        })
    }
}

fn refine_piston(cfg: PistonConfig, d: usize) -> Result<PistonConfig, CliError> {
    let base = cfg.ticks_per_period + cfg.margin_ticks;
    let f = refinement("clock.d", d as f64, base as f64)?;
    Ok(PistonConfig {
        ticks_per_period: cfg.ticks_per_period * f,
        margin_ticks: cfg.margin_ticks * f,
        ..cfg
    })
}

/// Integer ratio `fine/coarse`, which keeps pulse and ramp edges on ticks.
fn refinement(key: &str, fine: f64, coarse: f64) -> Result<usize, CliError> {
    let f = fine / coarse;
    let r = f.round();
    if !(r >= 1.0) || (f - r).abs() > 1e-9 * f.max(1.0) {
        return Err(CliError::Config(format!(
            "`{key}` must refine the base clock by a whole factor (ratio {f})"
        )));
    }
    Ok(r as usize)
}

fn double_slit_params(kv: &KeyValues) -> Result<DoubleSlitParams, CliError> {
    let mut p = DoubleSlitParams::default();
    let mut length_set = false;
    for (k, v) in kv.section("doubleslit") {
        let key = format!("doubleslit.{k}");
        match k {
            "n" => p.n = v.parse().map_err(|_| bad(&key, v))?,
            "length" => {
                p.length = parse_f64(&key, v)?;
                length_set = true;
            }
            "mass" => p.mass = parse_f64(&key, v)?,
            "sites" => p.sites = v.parse().map_err(|_| bad(&key, v))?,
            "phi" => p.phi = Some(parse_f64(&key, v)?),
            "phis" => p.phis = v.parse().map_err(|_| bad(&key, v))?,
            "max_degree" => p.max_degree = v.parse().map_err(|_| bad(&key, v))?,
            "n_max" => p.n_max = v.parse().map_err(|_| bad(&key, v))?,
            "collapse_phi" => p.collapse_phi = parse_f64(&key, v)?,
            _ => return Err(CliError::Config(format!("unknown key `{key}`"))),
        }
    }
    if !length_set {
        p.length = p.n as f64;
    }
    if p.phis == 0 && p.phi.is_none() {
        return Err(CliError::Config("doubleslit.phis must be positive".into()));
    }
    if p.n_max == 0 {
        return Err(CliError::Config("doubleslit.n_max must be positive".into()));
    }
    modclock::config::check_dim(p.n)?;
    Ok(p)
}

/// Deserializes `prefix.*` entries into `T`, starting from its defaults.
fn section_struct<T: DeserializeOwned>(
    kv: &KeyValues,
    prefix: &str,
    skip: &[&str],
) -> Result<T, CliError> {
    let mut map = Map::new();
    for (k, v) in kv.section(prefix) {
        if !skip.contains(&k) {
            map.insert(k.to_string(), scalar(v));
        }
    }
    serde_json::from_value(Value::Object(map))
        .map_err(|e| CliError::Config(format!("{prefix}: {e}")))
}

fn scalar(v: &str) -> Value {
    if let Ok(i) = v.parse::<u64>() {
        return Value::Number(i.into());
    }
    if let Ok(i) = v.parse::<i64>() {
        return Value::Number(i.into());
    }
    if let Some(n) = v.parse::<f64>().ok().and_then(Number::from_f64) {
        return Value::Number(n);
    }
    match v {
        "true" => Value::Bool(true),
        "false" => Value::Bool(false),
        _ => Value::String(v.to_string()),
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64, CliError> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| bad(key, v))
}

fn bad(key: &str, v: &str) -> CliError {
    CliError::Config(format!("invalid value `{v}` for `{key}`"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_whitespace() {
        let kv =
            KeyValues::parse("# head\n scenario = spin # trailing\n\nspin.n_periods=4\n").unwrap();
        assert_eq!(kv.get("scenario"), Some("spin"));
        assert_eq!(kv.get("spin.n_periods"), Some("4"));
    }

    #[test]
    fn malformed_lines_rejected() {
        assert!(KeyValues::parse("scenario spin").is_err());
        assert!(KeyValues::parse("scenario =").is_err());
        assert!(KeyValues::parse("bad key = 1").is_err());
    }

    #[test]
    fn scenario_sections() {
        let kv = KeyValues::parse(
            "scenario = piston\npiston.displacement = 1\npiston.ramp_shape = linear",
        )
        .unwrap();
        let cfg = RunConfig::from_key_values(&kv).unwrap();
        match cfg.params {
            ScenarioParams::Piston(p) => {
                assert_eq!(p.displacement, 1.0);
                assert_eq!(p.ramp_shape, modclock::scenarios::RampShape::Linear);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        for text in [
            "scenario = piston\npiston.nope = 1",
            "scenario = piston\nspin.b0 = 1",
            "scenario = spin\nclock.x = 1",
            "scenario = doubleslit\nclock.d = 64",
            "scenario = spin\nspin.regime = sideways",
            "scenario = nowhere",
        ] {
            let kv = KeyValues::parse(text).unwrap();
            assert!(RunConfig::from_key_values(&kv).is_err(), "{text}");
        }
    }

    #[test]
    fn clock_refinement() {
        let kv = KeyValues::parse("scenario = spin\nclock.d = 6000").unwrap();
        match RunConfig::from_key_values(&kv).unwrap().params {
            ScenarioParams::Spin(cfg, SpinRegime::Resonant) => {
                assert_eq!(cfg.ticks_per_period, 300);
                assert_eq!(cfg.pulse_ticks, 6);
            }
            other => panic!("unexpected {other:?}"),
        }
        let kv = KeyValues::parse("scenario = spin\nclock.d = 4000").unwrap();
        assert!(RunConfig::from_key_values(&kv).is_err());
        let kv = KeyValues::parse("scenario = spin\nclock.dt = 0.0033333333333333335").unwrap();
        match RunConfig::from_key_values(&kv).unwrap().params {
            ScenarioParams::Spin(cfg, _) => assert_eq!(cfg.ticks_per_period, 300),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn tolerances_collected() {
        let kv = KeyValues::parse("scenario = spin\ntol.spin.max_flip = 0.5").unwrap();
        let cfg = RunConfig::from_key_values(&kv).unwrap();
        assert_eq!(cfg.tolerances.get("spin.max_flip"), Some(&0.5));
        let kv = KeyValues::parse("scenario = spin\ntol.piston.phase = 0.5").unwrap();
        assert!(RunConfig::from_key_values(&kv).is_err());
    }
}
