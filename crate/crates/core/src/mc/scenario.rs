use serde::{Deserialize, Serialize};

use crate::design::InitialDesign;
use crate::error::{Error, Result};
use crate::popgraph::{
    build_equal_network_population_with, build_household_population_with, evolve_population,
    validate_equal_networks, validate_size_dist, DynamicsSetting, GeneratorOptions, PopulationGraph,
    Topology, TwoWavePopulation,
};

/// How a scenario's population is generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PopulationSpec {
    /// Person population with `theta / k` networks of `k` cases.
    EqualNetworks {
        #[serde(rename = "N")]
        n: usize,
        theta: usize,
        k: usize,
        #[serde(default)]
        topology: Topology,
        #[serde(default)]
        edge_nodes_per_network: usize,
    },
    /// Household population; `theta` counts case households.
    Household {
        #[serde(rename = "N")]
        n: usize,
        theta: usize,
        k: usize,
        size_dist: Vec<f64>,
        #[serde(default)]
        topology: Topology,
        #[serde(default)]
        edge_nodes_per_network: usize,
    },
    /// Person population observed at two time points.
    Dynamics {
        #[serde(rename = "N")]
        n: usize,
        setting: SettingRef,
    },
}

/// A named preset or a fully specified setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SettingRef {
    Label(String),
    Custom(DynamicsSetting),
}

impl SettingRef {
    pub fn resolve(&self) -> Result<DynamicsSetting> {
        match self {
            SettingRef::Label(label) => DynamicsSetting::preset(label).ok_or_else(|| {
                Error::config(
                    "setting",
                    format!("unknown setting `{label}`; expected one of {:?}", DynamicsSetting::LABELS),
                )
            }),
            SettingRef::Custom(setting) => Ok(setting.clone()),
        }
    }
}

impl PopulationSpec {
    pub fn size(&self) -> usize {
        match *self {
            PopulationSpec::EqualNetworks { n, .. }
            | PopulationSpec::Household { n, .. }
            | PopulationSpec::Dynamics { n, .. } => n,
        }
    }

    pub fn is_dynamic(&self) -> bool {
        matches!(self, PopulationSpec::Dynamics { .. })
    }

    /// Network size `k` or setting label, for reporting.
    pub fn k_or_setting(&self) -> String {
        match self {
            PopulationSpec::EqualNetworks { k, .. } | PopulationSpec::Household { k, .. } => k.to_string(),
            PopulationSpec::Dynamics { setting, .. } => match setting {
                SettingRef::Label(label) => label.clone(),
                SettingRef::Custom(s) => s.label.clone(),
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PopulationSpec::EqualNetworks {
                n,
                theta,
                k,
                edge_nodes_per_network,
                ..
            }
            | PopulationSpec::Household {
                n,
                theta,
                k,
                edge_nodes_per_network,
                ..
            } => validate_equal_networks(*n, *theta, *k, *edge_nodes_per_network)?,
            PopulationSpec::Dynamics { n, setting } => {
                let setting = setting.resolve()?;
                setting.validate().map_err(|e| e.within("setting"))?;
                validate_equal_networks(*n, setting.initial_total(), setting.initial.size, 0)
                    .map_err(|_| Error::config("N", format!("{n} units cannot hold the setting's cases")))?;
                if setting.initial_total() + setting.new_case_count() > *n {
                    return Err(Error::config("N", "too few units for the new cases of the setting"));
                }
            }
        }
        if let PopulationSpec::Household { size_dist, .. } = self {
            validate_size_dist(size_dist)?;
        }
        Ok(())
    }

    /// The single-time population for `seed`.
    pub fn build_static(&self, seed: u64) -> Result<PopulationGraph> {
        match self {
            PopulationSpec::EqualNetworks {
                n,
                theta,
                k,
                topology,
                edge_nodes_per_network,
            } => build_equal_network_population_with(
                *n,
                *theta,
                *k,
                &GeneratorOptions {
                    topology: *topology,
                    edge_nodes_per_network: *edge_nodes_per_network,
                },
                seed,
            ),
            PopulationSpec::Household {
                n,
                theta,
                k,
                size_dist,
                topology,
                edge_nodes_per_network,
            } => build_household_population_with(
                *n,
                *theta,
                *k,
                size_dist,
                &GeneratorOptions {
                    topology: *topology,
                    edge_nodes_per_network: *edge_nodes_per_network,
                },
                seed,
            ),
            PopulationSpec::Dynamics { .. } => Err(Error::config("population", "a dynamics population has two time points")),
        }
    }

    /// The two-time population from a base seed and an evolution seed.
    pub fn build_dynamic(&self, base_seed: u64, evolve_seed: u64) -> Result<TwoWavePopulation> {
        match self {
            PopulationSpec::Dynamics { n, setting } => {
                let setting = setting.resolve()?;
                let base = build_equal_network_population_with(
                    *n,
                    setting.initial_total(),
                    setting.initial.size,
                    &GeneratorOptions::default(),
                    base_seed,
                )?;
                evolve_population(&base, &setting, evolve_seed)
            }
            _ => Err(Error::config("population", "change estimation needs a dynamics population")),
        }
    }
}

/// Tracing procedure of a scenario.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TracingSpec {
    #[default]
    Acs,
    /// Contact strengths are drawn `Uniform(0, 1)` per replicate.
    Dacs { psi0: f64 },
    Qasbs { q: usize },
}

impl TracingSpec {
    pub fn name(&self) -> &'static str {
        match self {
            TracingSpec::Acs => "acs",
            TracingSpec::Dacs { .. } => "dacs",
            TracingSpec::Qasbs { .. } => "qasbs",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Temporal {
    #[default]
    CrossSectional,
    Panel,
    #[serde(rename = "pacs")]
    PAcs,
    #[serde(rename = "iacs")]
    IAcs,
}

impl Temporal {
    pub fn is_change(&self) -> bool {
        !matches!(self, Temporal::CrossSectional)
    }
}

/// One simulated design on one population specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: String,
    pub population: PopulationSpec,
    pub initial: InitialDesign,
    #[serde(default)]
    pub tracing: TracingSpec,
    #[serde(default)]
    pub temporal: Temporal,
    pub replicates: u64,
    #[serde(default)]
    pub seed: u64,
    /// Keep one population for every replicate. Defaults to `true` for
    /// single-time populations and `false` for dynamics.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub freeze_population: Option<bool>,
}

impl Scenario {
    pub fn frozen(&self) -> bool {
        self.freeze_population.unwrap_or(!self.population.is_dynamic())
    }

    /// Short label of the evaluated design, e.g. `acs`, `srs`, `pacs`.
    pub fn design_name(&self) -> &'static str {
        match self.temporal {
            Temporal::CrossSectional => self.tracing.name(),
            Temporal::Panel => "panel",
            Temporal::PAcs => "pacs",
            Temporal::IAcs => "iacs",
        }
    }

    /// Label of the baseline the design is compared with.
    pub fn baseline_name(&self) -> &'static str {
        match (self.temporal, self.initial) {
            (Temporal::CrossSectional, InitialDesign::Srs { .. }) => "srs",
            (Temporal::CrossSectional, InitialDesign::PoissonSizeBiased { .. }) => "poisson",
            _ => "panel",
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.trim().is_empty() {
            return Err(Error::config("id", "scenario id must not be empty"));
        }
        if self.replicates == 0 {
            return Err(Error::config("replicates", "at least one replicate is required"));
        }
        self.population.validate().map_err(|e| e.within("population"))?;
        self.initial.validate(self.population.size()).map_err(|e| e.within("initial"))?;
        if let (InitialDesign::PoissonSizeBiased { .. }, Some(units)) = (self.initial, self.case_units()) {
            self.initial
                .poisson_rates(self.population.size(), units)
                .map_err(|e| e.within("initial"))?;
        }
        match self.tracing {
            TracingSpec::Dacs { psi0 } if !psi0.is_finite() => {
                return Err(Error::config("tracing.psi0", "threshold must be finite"))
            }
            _ => {}
        }
        if self.temporal.is_change() != self.population.is_dynamic() {
            return Err(Error::config(
                "temporal",
                if self.temporal.is_change() {
                    "change designs need a dynamics population"
                } else {
                    "a dynamics population needs a change design (panel, pacs or iacs)"
                },
            ));
        }
        if self.temporal.is_change() && self.tracing != TracingSpec::Acs {
            return Err(Error::config("tracing", "change designs use network-exhaustive tracing"));
        }
        Ok(())
    }

    /// Number of favoured (case) units when fixed by the specification.
    fn case_units(&self) -> Option<usize> {
        match &self.population {
            PopulationSpec::EqualNetworks { theta, .. } | PopulationSpec::Household { theta, .. } => Some(*theta),
            PopulationSpec::Dynamics { setting, .. } => setting.resolve().ok().map(|s| s.initial_total()),
        }
    }
}
