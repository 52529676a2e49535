//! Experiment configuration: a TOML document, then `--override KEY=VALUE`
//! edits, then the dedicated flags. Later sources win.

use std::path::{Path, PathBuf};

use radnet::activation::ActivationKind;
use radnet::learning::{Noise, OptimizerConfig};
use radnet::target::{RadialTarget, TargetFn};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TargetSection {
    pub profile: TargetFn,
    pub s: usize,
    pub v: f64,
    pub c0: f64,
}

impl Default for TargetSection {
    fn default() -> Self {
        TargetSection {
            profile: TargetFn::identity(),
            s: 0,
            v: 1.0,
            c0: 1.0,
        }
    }
}

impl TargetSection {
    pub fn radial(&self) -> Result<RadialTarget, CliError> {
        Ok(RadialTarget::new(self.profile.clone(), self.s, self.v, self.c0)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BuildSection {
    pub target: TargetSection,
    pub d: usize,
    pub n: usize,
    /// Radii and directions used for the error estimate; 0 skips it.
    pub n_radial: usize,
    pub n_sphere: usize,
}

impl Default for BuildSection {
    fn default() -> Self {
        BuildSection {
            target: TargetSection::default(),
            d: 2,
            n: 8,
            n_radial: 32,
            n_sphere: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RateApproxSection {
    pub target: TargetSection,
    pub d: usize,
    pub n_list: Vec<usize>,
    pub n_radial: usize,
    pub n_sphere: usize,
}

impl Default for RateApproxSection {
    fn default() -> Self {
        RateApproxSection {
            target: TargetSection::default(),
            d: 2,
            n_list: vec![4, 8, 16, 32],
            n_radial: 64,
            n_sphere: 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RateLearnSection {
    pub target: TargetSection,
    pub d: usize,
    pub m_list: Vec<usize>,
    pub trials: usize,
    pub response_bound: f64,
    pub noise: Noise,
    pub n_constant: f64,
    pub n_test: usize,
    pub optimizer: OptimizerConfig,
}

impl Default for RateLearnSection {
    fn default() -> Self {
        RateLearnSection {
            target: TargetSection {
                profile: TargetFn::Kink {
                    center: 0.5,
                    slope: 1.0,
                },
                ..TargetSection::default()
            },
            d: 2,
            m_list: (8..=13).map(|k| 1usize << k).collect(),
            trials: 5,
            response_bound: 2.0,
            noise: Noise::None,
            n_constant: 1.0,
            n_test: 4000,
            optimizer: OptimizerConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PackSection {
    pub n_star: usize,
    pub s: usize,
    pub v: f64,
    pub c0: f64,
    /// Pairs checked when the family is too large for all pairs.
    pub pairs: usize,
    /// Members put through the Hölder test.
    pub members: usize,
    pub holder_pairs: usize,
    /// Permit `N*` above the enumeration cap by sampling members.
    pub sample: bool,
}

impl Default for PackSection {
    fn default() -> Self {
        PackSection {
            n_star: 4,
            s: 0,
            v: 1.0,
            c0: 1.0,
            pairs: 64,
            members: 8,
            holder_pairs: 10_000,
            sample: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuditSection {
    /// Smoothness order for the activation check.
    pub s0: usize,
    pub theta0_tol: f64,
    pub r: f64,
    pub c0: f64,
    pub d: usize,
    pub beta: f64,
    pub c1: f64,
    pub c2: f64,
    pub depth: usize,
    pub n_list: Vec<usize>,
    /// Net document to check against the weight bound.
    pub net: Option<PathBuf>,
    /// `alpha` for the weight check; the build formula when absent.
    pub alpha: Option<f64>,
    /// `R` for the weight check; the largest recorded parameter when absent.
    pub bound_r: Option<f64>,
}

impl Default for AuditSection {
    fn default() -> Self {
        AuditSection {
            s0: 3,
            theta0_tol: 0.05,
            r: 1.0,
            c0: 1.0,
            d: 2,
            beta: 0.0,
            c1: 1.0,
            c2: 1.0,
            depth: 3,
            n_list: vec![4, 8, 16, 32, 64, 128],
            net: None,
            alpha: None,
            bound_r: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub activation: String,
    pub precision_bits: u32,
    pub precision_ceiling: u32,
    pub out: PathBuf,
    pub build: BuildSection,
    pub rate_approx: RateApproxSection,
    pub rate_learn: RateLearnSection,
    pub pack: PackSection,
    pub audit: AuditSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            activation: "logistic".into(),
            precision_bits: 256,
            precision_ceiling: 8192,
            out: PathBuf::from("out"),
            build: BuildSection::default(),
            rate_approx: RateApproxSection::default(),
            rate_learn: RateLearnSection::default(),
            pack: PackSection::default(),
            audit: AuditSection::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn activation_kind(&self) -> Result<ActivationKind, CliError> {
        Ok(ActivationKind::from_name(&self.activation)?)
    }

    /// Checks that do not depend on the command.
    pub fn validate(&self) -> Result<(), CliError> {
        self.activation_kind()?;
        if self.precision_bits < 53 {
            return Err(CliError::Config(format!(
                "precision_bits = {} is below 53",
                self.precision_bits
            )));
        }
        if self.precision_ceiling < self.precision_bits {
            return Err(CliError::Config("precision_ceiling is below precision_bits".into()));
        }
        Ok(())
    }
}

/// Flag values that override the document.
#[derive(Clone, Debug, Default)]
pub struct FlagOverrides {
    pub seed: Option<u64>,
    pub precision_bits: Option<u32>,
    pub out: Option<PathBuf>,
    pub activation: Option<String>,
    pub overrides: Vec<String>,
}

/// Parses the right-hand side of `KEY=VALUE` as a TOML value, falling back
/// to a bare string.
fn parse_value(raw: &str) -> toml::Value {
    match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.into()),
    }
}

fn set_path(root: &mut toml::Table, key: &str, value: toml::Value) -> Result<(), CliError> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("malformed override key {key:?}")));
    }
    let mut table = root;
    for part in &parts[..parts.len() - 1] {
        let entry = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("override {key:?}: {part:?} is not a table")))?;
    }
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Reads and merges all configuration sources, then validates the result.
pub fn load(path: Option<&Path>, flags: &FlagOverrides) -> Result<ExperimentConfig, CliError> {
    let mut table = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
            text.parse::<toml::Table>()
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
        None => toml::Table::new(),
    };
    for item in &flags.overrides {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("override {item:?} is not KEY=VALUE")))?;
        set_path(&mut table, k.trim(), parse_value(v.trim()))?;
    }
    if let Some(seed) = flags.seed {
        table.insert("seed".into(), toml::Value::Integer(seed as i64));
    }
    if let Some(bits) = flags.precision_bits {
        table.insert("precision_bits".into(), toml::Value::Integer(bits as i64));
    }
    if let Some(out) = &flags.out {
        table.insert("out".into(), toml::Value::String(out.display().to_string()));
    }
    if let Some(a) = &flags.activation {
        table.insert("activation".into(), toml::Value::String(a.clone()));
    }
    let cfg: ExperimentConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Config(e.message().to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_reach_nested_fields() {
        let flags = FlagOverrides {
            overrides: vec!["build.n=5".into(), "rate_approx.n_list=[2, 3]".into()],
            seed: Some(9),
            ..FlagOverrides::default()
        };
        let cfg = load(None, &flags).unwrap();
        assert_eq!(cfg.build.n, 5);
        assert_eq!(cfg.rate_approx.n_list, vec![2, 3]);
        assert_eq!(cfg.seed, 9);
    }

    #[test]
    fn flags_beat_overrides() {
        let flags = FlagOverrides {
            overrides: vec!["seed=1".into(), "activation=gompertz".into()],
            seed: Some(2),
            activation: Some("logistic".into()),
            ..FlagOverrides::default()
        };
        let cfg = load(None, &flags).unwrap();
        assert_eq!(cfg.seed, 2);
        assert_eq!(cfg.activation, "logistic");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let flags = FlagOverrides {
            overrides: vec!["build.width=3".into()],
            ..FlagOverrides::default()
        };
        assert!(matches!(load(None, &flags), Err(CliError::Config(_))));
    }

    #[test]
    fn bare_words_become_strings() {
        assert_eq!(parse_value("tanh-shifted"), toml::Value::String("tanh-shifted".into()));
        assert_eq!(parse_value("3"), toml::Value::Integer(3));
    }
}
