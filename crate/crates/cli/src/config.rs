use std::path::{Path, PathBuf};

use netrace::mc::Scenario;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

fn default_verbosity() -> u8 {
    1
}

/// A batch of scenarios and where their results go.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenarios: Vec<Scenario>,
    /// Results file; standard output when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    /// 0 is silent, 1 reports each scenario, 2 adds timings.
    #[serde(default = "default_verbosity")]
    pub verbosity: u8,
    /// Replaces every scenario's replicate count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicates: Option<u64>,
}

impl RunConfig {
    pub fn new(scenarios: Vec<Scenario>) -> Self {
        Self {
            scenarios,
            output: None,
            format: Format::Csv,
            verbosity: default_verbosity(),
            replicates: None,
        }
    }

    /// Scenarios with the replicate override applied.
    pub fn effective_scenarios(&self) -> Vec<Scenario> {
        self.scenarios
            .iter()
            .cloned()
            .map(|mut sc| {
                if let Some(r) = self.replicates {
                    sc.replicates = r;
                }
                sc
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.scenarios.is_empty() {
            return Err(CliError::invalid("scenarios", "at least one scenario is required"));
        }
        if self.replicates == Some(0) {
            return Err(CliError::invalid("replicates", "at least one replicate is required"));
        }
        if self.verbosity > 2 {
            return Err(CliError::invalid("verbosity", "expected 0, 1 or 2"));
        }
        for (i, sc) in self.effective_scenarios().iter().enumerate() {
            sc.validate().map_err(|e| CliError::from_core(e, &format!("scenarios[{i}]")))?;
        }
        let mut ids: Vec<&str> = self.scenarios.iter().map(|s| s.id.as_str()).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(CliError::invalid("scenarios", format!("duplicate scenario id `{}`", w[0])));
        }
        if let Some(out) = &self.output {
            check_writable(out)?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Fails when the directory that would hold `path` does not exist.
pub fn check_writable(path: &Path) -> Result<(), CliError> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    if !parent.is_dir() {
        return Err(CliError::invalid(
            "output",
            format!("directory `{}` does not exist", parent.display()),
        ));
    }
    if path.is_dir() {
        return Err(CliError::invalid("output", format!("`{}` is a directory", path.display())));
    }
    Ok(())
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Invalid {
            key: if path == "." { String::new() } else { path },
            message: e.into_inner().to_string(),
        }
    })?;
    config.validate()?;
    Ok(config)
}
