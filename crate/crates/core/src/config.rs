//! Run configuration: parameter profiles, TOML overrides and validation.
//!
//! A configuration is resolved in three steps: the selected profile supplies
//! a complete set of values, the TOML document is merged over it key by key,
//! and the result is validated. Unknown keys and type mismatches are rejected
//! with the dotted key path in the error.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::calibration::CalibrationSettings;
use crate::ecology::EcologyParams;
use crate::economics::EconParams;
use crate::error::{Error, Result};
use crate::landscape::{Geometry, ScalingLaw};
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// Scaled-down budgets that finish in minutes.
    #[default]
    Desk,
    /// Full replicate and sample counts.
    Paper,
}

impl Profile {
    pub fn name(self) -> &'static str {
        match self {
            Profile::Desk => "desk",
            Profile::Paper => "paper",
        }
    }
}

impl std::str::FromStr for Profile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Profile::Desk),
            "paper" => Ok(Profile::Paper),
            _ => Err(Error::config("profile", format!("expected `desk` or `paper`, got `{s}`"))),
        }
    }
}

/// Settings of the scenario experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioSettings {
    /// Pesticide expenditures of the sweep, €/ha/yr.
    pub pesticide_grid: Vec<f64>,
    /// Field sizes of the sweep, ha.
    pub sweep_field_sizes: Vec<f64>,
    /// Habitat share of each sweep layout.
    pub sweep_snh_share: f64,
    /// Farm size used to resolve labor and yield in the sweep (ecology only).
    pub policy_farm_sizes: Vec<f64>,
    /// Relative pesticide changes of the policy grid.
    pub policy_pesticide_changes: Vec<f64>,
    /// Habitat increment of the policy grid's share policies.
    pub policy_snh_increment: f64,
    pub phase_farm_sizes: Vec<f64>,
    /// Fractions of the field-margin cells planted with hedgerow.
    pub phase_margin_fractions: Vec<f64>,
    /// Relative pesticide change applied across the phase diagram.
    pub phase_pesticide_change: f64,
}

impl Default for ScenarioSettings {
    fn default() -> Self {
        Self {
            pesticide_grid: (0..=20).map(|i| f64::from(i) * 10.0).collect(),
            sweep_field_sizes: vec![1.0, 5.0, 10.0],
            sweep_snh_share: 0.05,
            policy_farm_sizes: vec![10.0, 1000.0],
            policy_pesticide_changes: vec![0.0, -0.5, -1.0],
            policy_snh_increment: 0.01,
            phase_farm_sizes: (0..6).map(|k| 5.0 * 10f64.powf(f64::from(k) / 2.0)).collect(),
            phase_margin_fractions: (0..8).map(|i| f64::from(i) / 7.0).collect(),
            phase_pesticide_change: -1.0,
        }
    }
}

impl ScenarioSettings {
    pub fn validate(&self) -> Result<()> {
        let positive_list = [
            ("scenarios.sweep_field_sizes", &self.sweep_field_sizes),
            ("scenarios.policy_farm_sizes", &self.policy_farm_sizes),
            ("scenarios.phase_farm_sizes", &self.phase_farm_sizes),
        ];
        for (key, list) in positive_list {
            if list.is_empty() || list.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
                return Err(Error::config(key, "must be a non-empty list of positive numbers"));
            }
        }
        let grid = &self.pesticide_grid;
        if grid.is_empty() || grid.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) || grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config(
                "scenarios.pesticide_grid",
                "must be a strictly increasing list of non-negative numbers",
            ));
        }
        if !(0.0..1.0).contains(&self.sweep_snh_share) {
            return Err(Error::config("scenarios.sweep_snh_share", "must lie in [0,1)"));
        }
        if self.policy_pesticide_changes.iter().any(|&v| !(v >= -1.0) || !v.is_finite()) {
            return Err(Error::config("scenarios.policy_pesticide_changes", "changes must be ≥ -1"));
        }
        if !(self.policy_snh_increment >= 0.0) || self.policy_snh_increment >= 1.0 {
            return Err(Error::config("scenarios.policy_snh_increment", "must lie in [0,1)"));
        }
        let f = &self.phase_margin_fractions;
        if f.is_empty() || f.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::config("scenarios.phase_margin_fractions", "fractions must lie in [0,1]"));
        }
        if !(self.phase_pesticide_change >= -1.0) {
            return Err(Error::config("scenarios.phase_pesticide_change", "must be ≥ -1"));
        }
        Ok(())
    }
}

/// A fully resolved run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub profile: Profile,
    pub seed: u64,
    pub replicates: usize,
    pub out: PathBuf,
    pub landscape: Geometry,
    pub scaling: ScalingLaw,
    pub ecology: EcologyParams,
    pub economics: EconParams,
    pub calibration: CalibrationSettings,
    pub scenarios: ScenarioSettings,
}

/// Keys that may be absent from a resolved configuration.
const OPTIONAL_KEYS: [&str; 2] = ["ecology.kernel_radius_m", "calibration.grid"];

impl RunConfig {
    pub fn profile(profile: Profile) -> Self {
        let mut cfg = Self {
            profile,
            seed: 1,
            replicates: 100,
            out: PathBuf::from("out"),
            landscape: Geometry::default(),
            scaling: ScalingLaw::default(),
            ecology: EcologyParams::default(),
            economics: EconParams::default(),
            calibration: CalibrationSettings::default(),
            scenarios: ScenarioSettings::default(),
        };
        if profile == Profile::Desk {
            cfg.replicates = 10;
            cfg.calibration.samples = 256;
            cfg.calibration.replicates = 10;
            cfg.calibration.grid = Some([100, 100]);
        }
        cfg
    }

    pub fn model_params(&self) -> ModelParams {
        ModelParams {
            geometry: self.landscape,
            scaling: self.scaling,
            ecology: self.ecology,
            economics: self.economics,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.landscape
            .validate()
            .map_err(|e| Error::config("landscape", e.to_string()))?;
        self.scaling.validate()?;
        self.ecology.validate()?;
        self.economics.validate()?;
        self.calibration.validate()?;
        self.scenarios.validate()?;
        if self.replicates == 0 {
            return Err(Error::config("replicates", "must be at least 1"));
        }
        Ok(())
    }

    /// Resolve a TOML document. `profile_override` takes precedence over a
    /// `profile` key in the document.
    pub fn from_toml_str(text: &str, profile_override: Option<Profile>) -> Result<Self> {
        let doc: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config {
            key: "<document>".into(),
            message: e.message().to_string(),
        })?;
        let profile = match (profile_override, doc.get("profile")) {
            (Some(p), _) => p,
            (None, Some(toml::Value::String(s))) => s.parse()?,
            (None, Some(_)) => return Err(Error::config("profile", "must be a string")),
            (None, None) => Profile::default(),
        };
        let base = toml::Table::try_from(Self::profile(profile)).map_err(|e| Error::config("<profile>", e.to_string()))?;
        let mut merged = base;
        merge(&mut merged, doc, "")?;
        merged.insert("profile".into(), toml::Value::String(profile.name().into()));
        let cfg: Self = merged.try_into().map_err(|e: toml::de::Error| Error::Config {
            key: "<document>".into(),
            message: e.message().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, profile_override: Option<Profile>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text, profile_override)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("<document>", e.to_string()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml_string()?)?;
        Ok(())
    }
}

fn kind(v: &toml::Value) -> &'static str {
    match v {
        toml::Value::String(_) => "string",
        toml::Value::Integer(_) => "integer",
        toml::Value::Float(_) => "float",
        toml::Value::Boolean(_) => "boolean",
        toml::Value::Datetime(_) => "datetime",
        toml::Value::Array(_) => "array",
        toml::Value::Table(_) => "table",
    }
}

/// Merge `over` into `base`, rejecting unknown keys and mismatched types.
/// Integers are accepted where floats are expected.
fn merge(base: &mut toml::Table, over: toml::Table, prefix: &str) -> Result<()> {
    for (key, value) in over {
        let path = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
        match base.get_mut(&key) {
            Some(toml::Value::Table(inner)) => match value {
                toml::Value::Table(t) => merge(inner, t, &path)?,
                other => return Err(Error::config(path, format!("expected a table, got {}", kind(&other)))),
            },
            Some(existing) => {
                let value = match (&*existing, value) {
                    (toml::Value::Float(_), toml::Value::Integer(i)) => toml::Value::Float(i as f64),
                    (_, v) => v,
                };
                let compatible = match (&*existing, &value) {
                    (toml::Value::Array(a), toml::Value::Array(_)) if a.is_empty() => true,
                    (toml::Value::Array(a), toml::Value::Array(b)) => {
                        b.iter().all(|x| kind(x) == kind(&a[0]) || (kind(&a[0]) == "float" && kind(x) == "integer"))
                    }
                    (a, b) => kind(a) == kind(b),
                };
                if !compatible {
                    return Err(Error::config(
                        path,
                        format!("expected {}, got {}", kind(existing), kind(&value)),
                    ));
                }
                *existing = coerce_array(value, existing);
            }
            None if OPTIONAL_KEYS.contains(&path.as_str()) || path == "profile" => {
                base.insert(key, value);
            }
            None => return Err(Error::config(path, "unknown key")),
        }
    }
    Ok(())
}

fn coerce_array(value: toml::Value, like: &toml::Value) -> toml::Value {
    match (value, like) {
        (toml::Value::Array(items), toml::Value::Array(model)) if model.first().is_some_and(|m| m.is_float()) => {
            toml::Value::Array(
                items
                    .into_iter()
                    .map(|x| match x {
                        toml::Value::Integer(i) => toml::Value::Float(i as f64),
                        other => other,
                    })
                    .collect(),
            )
        }
        (v, _) => v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_profile_defaults() {
        let cfg = RunConfig::from_toml_str("", None).unwrap();
        assert_eq!(cfg, RunConfig::profile(Profile::Desk));
        assert_eq!(cfg.ecology, EcologyParams::default());
        assert_eq!(cfg.economics.base_yield, 51.0);
        let paper = RunConfig::from_toml_str("profile = \"paper\"", None).unwrap();
        assert_eq!(paper.replicates, 100);
        assert_eq!(paper.calibration.samples, 4096);
        assert_eq!(paper.calibration.grid, None);
    }

    #[test]
    fn overrides_and_integer_coercion() {
        let cfg = RunConfig::from_toml_str(
            "seed = 7\n[ecology]\nselectivity = 0.5\nkernel_radius_m = 30\n[economics]\nsubsidy = 400\n[scenarios]\npesticide_grid = [0, 50, 100]\n",
            None,
        )
        .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.ecology.selectivity, 0.5);
        assert_eq!(cfg.ecology.kernel_radius_m, Some(30.0));
        assert_eq!(cfg.economics.subsidy, 400.0);
        assert_eq!(cfg.scenarios.pesticide_grid, vec![0.0, 50.0, 100.0]);
    }

    #[test]
    fn errors_name_the_key() {
        let key = |text: &str| match RunConfig::from_toml_str(text, None) {
            Err(Error::Config { key, .. }) => key,
            other => panic!("unexpected {other:?}"),
        };
        assert_eq!(key("[ecology]\nselectivity = 1.5"), "ecology.selectivity");
        assert_eq!(key("[ecology]\nwobble = 1"), "ecology.wobble");
        assert_eq!(key("[economics]\nprice = \"cheap\""), "economics.price");
        assert_eq!(key("nonsense = 1"), "nonsense");
        assert_eq!(key("profile = \"huge\""), "profile");
    }

    #[test]
    fn round_trip() {
        for p in [Profile::Desk, Profile::Paper] {
            let mut cfg = RunConfig::profile(p);
            cfg.ecology.kernel_radius_m = Some(12.5);
            cfg.seed = 99;
            let text = cfg.to_toml_string().unwrap();
            assert_eq!(RunConfig::from_toml_str(&text, None).unwrap(), cfg);
        }
    }

    #[test]
    fn profile_flag_wins() {
        let cfg = RunConfig::from_toml_str("profile = \"desk\"", Some(Profile::Paper)).unwrap();
        assert_eq!(cfg.profile, Profile::Paper);
        assert_eq!(cfg.replicates, 100);
    }
}
