use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{reference_world, Scenario, Temporal, TracingSpec, World};
use crate::error::Result;
use crate::estimate::{
    acs_variance_analytic, iacs_variance_analytic, initial_variance_analytic, pacs_variance_analytic,
    panel_variance_analytic,
};
use crate::inclusion::{exclusion_prob, InitialModel};
use crate::popgraph::{PopulationGraph, TwoWavePopulation, UnitId};
use crate::sets;

/// Closed-form values of a scenario on its reference population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticSummary {
    pub target: f64,
    pub sd_design: Option<f64>,
    pub sd_baseline: Option<f64>,
    pub re: Option<f64>,
    pub mean_n_design: Option<f64>,
    pub mean_n_baseline: Option<f64>,
}

pub fn analytic_summary(sc: &Scenario) -> Result<AnalyticSummary> {
    sc.validate()?;
    let world = reference_world(sc)?;
    let (target, var_design, var_baseline, mean_n_design, mean_n_baseline) = match &world {
        World::Static { pop, model, .. } => {
            let (var, n) = match sc.tracing {
                TracingSpec::Acs => (
                    Some(acs_variance_analytic(pop, model)?),
                    Some(expected_sample_size_analytic(pop, model)),
                ),
                _ => (None, None),
            };
            (
                pop.case_total() as f64,
                var,
                Some(initial_variance_analytic(pop, model)?),
                n,
                Some(expected_initial_size(model)),
            )
        }
        World::Dynamic { pop2, model, .. } => {
            let panel = panel_variance_analytic(pop2, model)?;
            let m = expected_initial_size(model);
            let (var, n) = match sc.temporal {
                Temporal::Panel => (panel, Some(m)),
                Temporal::PAcs => (
                    pacs_variance_analytic(pop2, model)?,
                    Some(expected_union_size_analytic(pop2, model)),
                ),
                Temporal::IAcs => (iacs_variance_analytic(pop2, model)?, None),
                Temporal::CrossSectional => unreachable!("validated"),
            };
            (pop2.true_change(), Some(var), Some(panel), n, Some(m))
        }
    };
    let re = match (var_design, var_baseline) {
        (Some(a), Some(b)) if b > 0.0 => Some(a / b),
        _ => None,
    };
    Ok(AnalyticSummary {
        target,
        sd_design: var_design.map(|v| v.max(0.0).sqrt()),
        sd_baseline: var_baseline.map(|v| v.max(0.0).sqrt()),
        re,
        mean_n_design,
        mean_n_baseline,
    })
}

fn expected_initial_size(model: &InitialModel<f64>) -> f64 {
    match model {
        InitialModel::Srs { m, .. } => *m as f64,
        InitialModel::Poisson {
            n,
            p_case,
            p_non,
            favoured,
        } => p_case * favoured.len() as f64 + p_non * (n - favoured.len()) as f64,
    }
}

/// Units whose initial selection brings `unit` into the traced sample: its
/// network for a case, otherwise itself and every adjacent network.
fn pull_set(pop: &PopulationGraph, unit: UnitId) -> Vec<UnitId> {
    if let Some(id) = pop.network_of(unit) {
        return pop.network(id).members.clone();
    }
    let mut ids: Vec<usize> = pop.neighbours(unit).iter().filter_map(|&v| pop.network_of(v)).collect();
    ids.sort_unstable();
    ids.dedup();
    let mut set = vec![unit];
    for id in ids {
        set = sets::union(&set, &pop.network(id).members);
    }
    set
}

/// Case units and noncases adjacent to a case.
fn touched_units(pop: &PopulationGraph) -> BTreeSet<UnitId> {
    let mut out = BTreeSet::new();
    for &c in pop.case_units() {
        out.insert(c);
        out.extend(pop.neighbours(c).iter().copied());
    }
    out
}

/// Exact `E|s|` under network-exhaustive tracing:
/// `E|s0| + Σ_j (π̄_{j} - π̄_{B_j})` over units with a nontrivial pull set `B_j`.
pub fn expected_sample_size_analytic(pop: &PopulationGraph, model: &InitialModel<f64>) -> f64 {
    let mut total = expected_initial_size(model);
    for j in touched_units(pop) {
        let b = pull_set(pop, j);
        total += exclusion_prob(model, &[j]) - exclusion_prob(model, &b);
    }
    total
}

/// Exact `E|s(t) ∪ s(t+1)|` when both time points are traced from one `s0`.
pub fn expected_union_size_analytic(pop2: &TwoWavePopulation, model: &InitialModel<f64>) -> f64 {
    let mut total = expected_initial_size(model);
    let mut units = touched_units(&pop2.base);
    units.extend(touched_units(&pop2.evolved));
    for j in units {
        let b = sets::union(&pull_set(&pop2.base, j), &pull_set(&pop2.evolved, j));
        total += exclusion_prob(model, &[j]) - exclusion_prob(model, &b);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::InitialDesign;
    use crate::popgraph::build_equal_network_population;

    #[test]
    fn table_one_sample_sizes() {
        let srs = |m| InitialModel::<f64>::Srs { n: 100_000, m };
        let k2 = build_equal_network_population(100_000, 1_000, 2, 1).unwrap();
        let e = expected_sample_size_analytic(&k2, &srs(1_000));
        assert!((e - 1009.9).abs() < 0.05, "{e}");
        let k10 = build_equal_network_population(100_000, 1_000, 10, 1).unwrap();
        let e = expected_sample_size_analytic(&k10, &srs(1_000));
        assert!((e / 1085.0 - 1.0).abs() < 0.01, "{e}");
        let k100 = build_equal_network_population(100_000, 1_000, 100, 1).unwrap();
        let design = InitialDesign::PoissonSizeBiased { m: 1_000, eta: 2.0 };
        let model = InitialModel::from_design(&design, &k100).unwrap();
        let e = expected_sample_size_analytic(&k100, &model);
        assert!((e - 1844.9).abs() < 0.1, "{e}");
    }

    #[test]
    fn census_observes_everyone() {
        let pop = build_equal_network_population(500, 50, 5, 2).unwrap();
        let e = expected_sample_size_analytic(&pop, &InitialModel::Srs { n: 500, m: 500 });
        assert!((e - 500.0).abs() < 1e-9);
    }

    #[test]
    fn figure_one_pull_sets() {
        let pop = crate::fixtures::figure_one();
        assert_eq!(pull_set(&pop, 5), vec![1, 2, 5, 6]);
        assert_eq!(pull_set(&pop, 2), vec![1, 2]);
        assert_eq!(pull_set(&pop, 4), vec![4]);
    }
}
