//! Seeded Monte Carlo evaluation of sampling designs.
//!
//! Replicates are split into a fixed number of contiguous batches. Batches
//! run in parallel, each one sequentially, and their accumulators merge in
//! batch order, so results do not depend on the number of threads.

mod analytic;
mod scenario;
mod stats;

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use analytic::{analytic_summary, expected_sample_size_analytic, expected_union_size_analytic, AnalyticSummary};
pub use scenario::{PopulationSpec, Scenario, SettingRef, Temporal, TracingSpec};
pub use stats::Welford;

use crate::design::{draw_initial_with, trace, EdgeStrengths, TracingDesign};
use crate::error::{Error, Result};
use crate::estimate::{ht_acs_total, ht_initial_total, iacs_change, observe_next, pacs_change, panel_change};
use crate::inclusion::{InclusionTable, InitialModel};
use crate::popgraph::{PopulationGraph, TwoWavePopulation};
use crate::seed::{self, Stream};
use crate::sets;

/// Upper bound on the number of batches.
pub const MAX_BATCHES: u64 = 20;

/// Results for one evaluated estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmSummary {
    pub design: String,
    /// Monte Carlo mean of the sample size.
    pub mean_n: f64,
    pub mean_n_se: f64,
    pub mean_n_analytic: Option<f64>,
    /// Monte Carlo mean of the estimate.
    pub estimate_mean: Option<f64>,
    /// Monte Carlo standard deviation of the estimation error.
    pub sd_mc: Option<f64>,
    pub sd_analytic: Option<f64>,
}

/// Outcome of [`run_scenario`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub scenario_id: String,
    pub replicates: u64,
    pub seed: u64,
    pub temporal: Temporal,
    /// Mean of the true total (cross-sectional) or change over replicates.
    pub target: f64,
    /// True value on the reference population used for analytic values.
    pub target_reference: f64,
    pub design: ArmSummary,
    pub baseline: Option<ArmSummary>,
    /// Variance ratio design / baseline.
    pub re_mc: Option<f64>,
    /// Standard error of `re_mc` from the spread of per-batch ratios.
    pub re_mc_se: Option<f64>,
    pub re_analytic: Option<f64>,
    /// Replicates whose sample contained no case network.
    pub zero_network_replicates: u64,
    #[serde(skip)]
    pub(crate) batches: Vec<(f64, f64)>,
}

impl McSummary {
    /// Coefficient of variation of a total estimator, relative to the target.
    pub fn cv(&self, sd: Option<f64>) -> Option<f64> {
        sd.filter(|_| self.target != 0.0).map(|s| s / self.target.abs())
    }
}

#[derive(Debug, Clone, Default)]
struct Batch {
    n_design: Welford,
    n_baseline: Welford,
    est_design: Welford,
    est_baseline: Welford,
    err_design: Welford,
    err_baseline: Welford,
    target: Welford,
    zero_networks: u64,
}

impl Batch {
    fn merge(&mut self, other: &Batch) {
        self.n_design.merge(&other.n_design);
        self.n_baseline.merge(&other.n_baseline);
        self.est_design.merge(&other.est_design);
        self.est_baseline.merge(&other.est_baseline);
        self.err_design.merge(&other.err_design);
        self.err_baseline.merge(&other.err_baseline);
        self.target.merge(&other.target);
        self.zero_networks += other.zero_networks;
    }
}

/// A population together with the probability models drawn on it.
pub(crate) enum World {
    Static {
        pop: PopulationGraph,
        model: InitialModel<f64>,
        table: InclusionTable<f64>,
    },
    Dynamic {
        pop2: TwoWavePopulation,
        model: InitialModel<f64>,
        table_t: InclusionTable<f64>,
        table_t1: InclusionTable<f64>,
    },
}

impl World {
    pub(crate) fn build(sc: &Scenario, replicate: Option<u64>) -> Result<Self> {
        let (pop_seed, dyn_seed) = match replicate {
            Some(i) => (seed::derive(sc.seed, i, Stream::Population), seed::derive(sc.seed, i, Stream::Dynamics)),
            None => (seed::shared(sc.seed, Stream::Population), seed::shared(sc.seed, Stream::Dynamics)),
        };
        if sc.population.is_dynamic() {
            let pop2 = sc.population.build_dynamic(pop_seed, dyn_seed)?;
            let model = InitialModel::from_design(&sc.initial, &pop2.base)?;
            let table_t = InclusionTable::new(model.clone(), &pop2.base);
            let table_t1 = InclusionTable::new(model.clone(), &pop2.evolved);
            Ok(World::Dynamic {
                pop2,
                model,
                table_t,
                table_t1,
            })
        } else {
            let pop = sc.population.build_static(pop_seed)?;
            let model = InitialModel::from_design(&sc.initial, &pop)?;
            let table = InclusionTable::new(model.clone(), &pop);
            Ok(World::Static { pop, model, table })
        }
    }

    pub(crate) fn base(&self) -> &PopulationGraph {
        match self {
            World::Static { pop, .. } => pop,
            World::Dynamic { pop2, .. } => &pop2.base,
        }
    }
}

/// Population of the analytic reference: the frozen population, or that of
/// replicate 0 when populations are regenerated.
pub(crate) fn reference_world(sc: &Scenario) -> Result<World> {
    World::build(sc, if sc.frozen() { None } else { Some(0) })
}

struct Outcome {
    n_design: f64,
    n_baseline: f64,
    est_design: Option<f64>,
    est_baseline: Option<f64>,
    target: f64,
    zero_networks: bool,
}

fn replicate(sc: &Scenario, world: &World, index: u64) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(sc.seed, index, Stream::Initial));
    let s0 = draw_initial_with(&sc.initial, world.base(), &mut rng)?;
    match world {
        World::Static { pop, model, table } => {
            let tracing = match sc.tracing {
                TracingSpec::Acs => TracingDesign::acs(),
                TracingSpec::Dacs { psi0 } => {
                    let strengths = EdgeStrengths::uniform(pop, seed::derive(sc.seed, index, Stream::Strengths));
                    TracingDesign::dacs(psi0, strengths)
                }
                TracingSpec::Qasbs { q } => TracingDesign::qasbs(q),
            };
            let sample = trace(pop, &s0, &tracing);
            let zero_networks = sample.cases().next().is_none();
            let est_design = match sc.tracing {
                TracingSpec::Acs => Some(ht_acs_total(&sample, pop, table)?.value),
                _ => None,
            };
            let est_baseline = Some(ht_initial_total(&s0, pop, model)?.value);
            Ok(Outcome {
                n_design: sample.n() as f64,
                n_baseline: s0.len() as f64,
                est_design,
                est_baseline,
                target: pop.case_total() as f64,
                zero_networks,
            })
        }
        World::Dynamic {
            pop2,
            model,
            table_t,
            table_t1,
        } => {
            let panel = panel_change(&s0, pop2, model)?.value;
            let acs = TracingDesign::acs();
            let (n_design, est, zero_networks) = match sc.temporal {
                Temporal::Panel => (s0.len(), panel, false),
                Temporal::PAcs => {
                    let st = trace(&pop2.base, &s0, &acs);
                    let st1 = trace(&pop2.evolved, &s0, &acs);
                    let est = pacs_change(&st, &st1, pop2, table_t, table_t1)?.value;
                    let zero = st.cases().next().is_none() && st1.cases().next().is_none();
                    (sets::union(&st.final_sample, &st1.final_sample).len(), est, zero)
                }
                Temporal::IAcs => {
                    let st = trace(&pop2.base, &s0, &acs);
                    let st1 = trace(&pop2.evolved, &st.final_sample, &acs);
                    let est = iacs_change(&st, &observe_next(&st, pop2), pop2, table_t)?.value;
                    let zero = st1.cases().next().is_none();
                    (st1.n(), est, zero)
                }
                Temporal::CrossSectional => unreachable!("validated"),
            };
            Ok(Outcome {
                n_design: n_design as f64,
                n_baseline: s0.len() as f64,
                est_design: Some(est),
                est_baseline: Some(panel),
                target: pop2.true_change(),
                zero_networks,
            })
        }
    }
}

fn run_batch(sc: &Scenario, frozen: Option<&World>, range: std::ops::Range<u64>) -> Result<Batch> {
    let mut batch = Batch::default();
    for index in range {
        let owned;
        let world = match frozen {
            Some(w) => w,
            None => {
                owned = World::build(sc, Some(index)).map_err(|e| replicate_error(index, e))?;
                &owned
            }
        };
        let out = replicate(sc, world, index).map_err(|e| replicate_error(index, e))?;
        batch.n_design.push(out.n_design);
        batch.n_baseline.push(out.n_baseline);
        batch.target.push(out.target);
        if let Some(v) = out.est_design {
            batch.est_design.push(v);
            batch.err_design.push(v - out.target);
        }
        if let Some(v) = out.est_baseline {
            batch.est_baseline.push(v);
            batch.err_baseline.push(v - out.target);
        }
        batch.zero_networks += out.zero_networks as u64;
    }
    Ok(batch)
}

fn replicate_error(index: u64, source: Error) -> Error {
    Error::Replicate {
        index,
        source: Box::new(source),
    }
}

/// Runs every replicate of `sc` and summarises them against the analytic
/// values of the reference population.
pub fn run_scenario(sc: &Scenario) -> Result<McSummary> {
    sc.validate()?;
    let analytic = analytic_summary(sc)?;
    let frozen = if sc.frozen() {
        Some(Arc::new(World::build(sc, None)?))
    } else {
        None
    };
    let count = sc.replicates.min(MAX_BATCHES);
    let ranges: Vec<std::ops::Range<u64>> = (0..count)
        .map(|b| b * sc.replicates / count..(b + 1) * sc.replicates / count)
        .collect();
    let batches: Vec<Result<Batch>> = ranges
        .into_par_iter()
        .map(|range| run_batch(sc, frozen.as_deref(), range))
        .collect();
    let mut total = Batch::default();
    let mut per_batch = Vec::with_capacity(batches.len());
    for batch in batches {
        let batch = batch?;
        per_batch.push((batch.err_design.variance(), batch.err_baseline.variance()));
        total.merge(&batch);
    }

    let has_estimate = total.est_design.count() > 0;
    let with_baseline = sc.temporal != Temporal::Panel;
    let design = ArmSummary {
        design: sc.design_name().to_string(),
        mean_n: total.n_design.mean(),
        mean_n_se: total.n_design.se_mean(),
        mean_n_analytic: analytic.mean_n_design,
        estimate_mean: has_estimate.then(|| total.est_design.mean()),
        sd_mc: has_estimate.then(|| total.err_design.sd()),
        sd_analytic: analytic.sd_design,
    };
    let baseline = with_baseline.then(|| ArmSummary {
        design: sc.baseline_name().to_string(),
        mean_n: total.n_baseline.mean(),
        mean_n_se: total.n_baseline.se_mean(),
        mean_n_analytic: analytic.mean_n_baseline,
        estimate_mean: Some(total.est_baseline.mean()),
        sd_mc: Some(total.err_baseline.sd()),
        sd_analytic: analytic.sd_baseline,
    });
    let (re_mc, re_mc_se) = if has_estimate && with_baseline {
        ratio_with_se(
            total.err_design.variance(),
            total.err_baseline.variance(),
            &per_batch,
        )
    } else {
        (None, None)
    };
    Ok(McSummary {
        scenario_id: sc.id.clone(),
        replicates: sc.replicates,
        seed: sc.seed,
        temporal: sc.temporal,
        target: total.target.mean(),
        target_reference: analytic.target,
        design,
        baseline,
        re_mc,
        re_mc_se,
        re_analytic: if with_baseline { analytic.re } else { None },
        zero_network_replicates: total.zero_networks,
        batches: per_batch,
    })
}

fn ratio_with_se(num: f64, den: f64, batches: &[(f64, f64)]) -> (Option<f64>, Option<f64>) {
    if den <= 0.0 {
        return (None, None);
    }
    let ratios: Vec<f64> = batches.iter().filter(|b| b.1 > 0.0).map(|b| b.0 / b.1).collect();
    let se = (ratios.len() >= 2).then(|| {
        let mut w = Welford::default();
        ratios.iter().for_each(|&r| w.push(r));
        w.se_mean()
    });
    (Some(num / den), se)
}

/// Relative efficiency of `sc` against `baseline`: the analytic variance
/// ratio when both designs have closed forms, otherwise the Monte Carlo ratio
/// over common random numbers with its standard error.
pub fn relative_efficiency(sc: &Scenario, baseline: &Scenario) -> Result<(f64, Option<f64>)> {
    if sc.population != baseline.population {
        return Err(Error::config("population", "scenarios must share the population specification"));
    }
    if sc.initial.m() != baseline.initial.m() || sc.temporal.is_change() != baseline.temporal.is_change() {
        return Err(Error::config("initial", "scenarios must be comparable designs"));
    }
    sc.validate()?;
    baseline.validate()?;
    let (a, b) = (analytic_summary(sc)?, analytic_summary(baseline)?);
    if let (Some(x), Some(y)) = (a.sd_design, b.sd_design) {
        if y > 0.0 {
            return Ok(((x * x) / (y * y), None));
        }
    }
    let mut aligned = baseline.clone();
    aligned.seed = sc.seed;
    aligned.replicates = sc.replicates;
    let (ra, rb) = (run_scenario(sc)?, run_scenario(&aligned)?);
    let (va, vb) = match (ra.design.sd_mc, rb.design.sd_mc) {
        (Some(x), Some(y)) if y > 0.0 => (x * x, y * y),
        _ => return Err(Error::Design("variance ratio is undefined for these designs".into())),
    };
    let batches: Vec<(f64, f64)> = ra.batches.iter().zip(&rb.batches).map(|(x, y)| (x.0, y.0)).collect();
    let (re, se) = ratio_with_se(va, vb, &batches);
    Ok((re.expect("positive denominator"), se))
}

/// Threads used by [`run_scenario`] when the caller installs no pool:
/// `NETRACE_THREADS` if set, otherwise rayon's default.
pub fn default_threads() -> Option<usize> {
    std::env::var("NETRACE_THREADS").ok()?.parse().ok().filter(|&n| n > 0)
}
