use rand::seq::{index, IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{map_noncase_indices, Mode, PopulationGraph, Topology, UnitId};
use crate::error::{Error, Result};

/// `count` networks of `size` cases each.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cohort {
    pub count: usize,
    pub size: usize,
}

impl Cohort {
    pub const fn new(count: usize, size: usize) -> Self {
        Self { count, size }
    }

    pub fn total(&self) -> usize {
        self.count * self.size
    }
}

/// How the case networks of a population change between two time points.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsSetting {
    pub label: String,
    pub initial: Cohort,
    pub growing: Cohort,
    pub shrinking: Cohort,
    pub emerging: Cohort,
    /// When set, `shrinking.size` is only an upper bound: the sizes of the
    /// non-growing networks are drawn at random so that the case total stays
    /// equal to the initial total.
    #[serde(default)]
    pub random_sizes: bool,
}

impl DynamicsSetting {
    pub const LABELS: [&'static str; 9] = ["L1", "L2", "L3", "M1", "M2", "M3", "S1", "S2", "S3"];

    /// The nine two-time-point settings over `N = 10^5`, `θ = 10^3`.
    pub fn preset(label: &str) -> Option<Self> {
        let c = Cohort::new;
        let (initial, growing, shrinking, emerging, random_sizes) = match label {
            "L1" => (c(10, 100), c(2, 180), c(8, 80), c(0, 0), false),
            "L2" => (c(10, 100), c(0, 0), c(10, 80), c(2, 100), false),
            "L3" => (c(10, 100), c(0, 0), c(10, 90), c(5, 20), false),
            "M1" => (c(100, 10), c(10, 46), c(90, 6), c(0, 0), false),
            "M2" => (c(100, 10), c(0, 0), c(100, 6), c(10, 40), false),
            "M3" => (c(100, 10), c(0, 0), c(100, 9), c(10, 10), false),
            "S1" => (c(500, 2), c(10, 42), c(490, 2), c(0, 0), true),
            "S2" => (c(500, 2), c(0, 0), c(500, 2), c(10, 40), true),
            "S3" => (c(500, 2), c(0, 0), c(500, 2), c(50, 2), true),
            _ => return None,
        };
        Some(Self {
            label: label.to_string(),
            initial,
            growing,
            shrinking,
            emerging,
            random_sizes,
        })
    }

    pub fn presets() -> Vec<Self> {
        Self::LABELS
            .iter()
            .filter_map(|label| Self::preset(label))
            .collect()
    }

    /// Case total at the first time point.
    pub fn initial_total(&self) -> usize {
        self.initial.total()
    }

    /// Case total at the second time point.
    pub fn final_total(&self) -> usize {
        if self.random_sizes {
            self.initial_total()
        } else {
            self.growing.total() + self.shrinking.total() + self.emerging.total()
        }
    }

    /// Units that turn into cases: growth of existing networks plus emerging ones.
    pub fn new_case_count(&self) -> usize {
        self.growing.count * self.growing.size.saturating_sub(self.initial.size)
            + self.emerging.total()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.initial.size;
        if self.initial.count == 0 || k == 0 {
            return Err(Error::config("initial", "needs at least one network of positive size"));
        }
        if self.growing.count + self.shrinking.count != self.initial.count {
            return Err(Error::config(
                "shrinking.count",
                format!(
                    "growing ({}) and shrinking ({}) networks must account for all {} initial networks",
                    self.growing.count, self.shrinking.count, self.initial.count
                ),
            ));
        }
        if self.growing.count > 0 && self.growing.size < k {
            return Err(Error::config("growing.size", "growing networks cannot be smaller than at t=1"));
        }
        if self.shrinking.size > k {
            return Err(Error::config("shrinking.size", "shrinking networks cannot exceed their t=1 size"));
        }
        if self.emerging.count > 0 && self.emerging.size == 0 {
            return Err(Error::config("emerging.size", "emerging networks need a positive size"));
        }
        if self.random_sizes {
            let residual = self.residual_total();
            let capacity = self.shrinking.count * k;
            if residual < 0 || residual as usize > capacity {
                return Err(Error::config(
                    "random_sizes",
                    format!("residual case total {residual} does not fit {capacity} retained slots"),
                ));
            }
        }
        Ok(())
    }

    fn residual_total(&self) -> i64 {
        self.initial_total() as i64 - self.growing.total() as i64 - self.emerging.total() as i64
    }
}

/// A fixed population observed at two time points.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoWavePopulation {
    pub base: PopulationGraph,
    pub evolved: PopulationGraph,
    /// Units whose case status changed, with `d_i = ±1`, sorted by unit.
    changes: Vec<(UnitId, i8)>,
}

impl TwoWavePopulation {
    /// Pairs two person-mode snapshots over the same unit set.
    pub fn new(base: PopulationGraph, evolved: PopulationGraph) -> Result<Self> {
        if base.len() != evolved.len() {
            return Err(Error::config("evolved", "both time points must share the unit set"));
        }
        if base.mode() != Mode::Person || evolved.mode() != Mode::Person {
            return Err(Error::config("mode", "change estimation is defined for person populations"));
        }
        let mut changes = Vec::new();
        let (a, b) = (base.case_units(), evolved.case_units());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            match (a.get(i), b.get(j)) {
                (Some(&x), Some(&y)) if x == y => {
                    i += 1;
                    j += 1;
                }
                (Some(&x), Some(&y)) if x < y => {
                    changes.push((x, -1));
                    i += 1;
                }
                (Some(&x), None) => {
                    changes.push((x, -1));
                    i += 1;
                }
                (_, Some(&y)) => {
                    changes.push((y, 1));
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        Ok(Self {
            base,
            evolved,
            changes,
        })
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    /// `d_i = y_{i,2} - y_{i,1}`.
    pub fn change(&self, unit: UnitId) -> i8 {
        self.changes
            .binary_search_by_key(&unit, |&(u, _)| u)
            .map(|pos| self.changes[pos].1)
            .unwrap_or(0)
    }

    /// Units with `d_i != 0`.
    pub fn changes(&self) -> &[(UnitId, i8)] {
        &self.changes
    }

    pub fn new_case_count(&self) -> usize {
        self.changes.iter().filter(|&&(_, d)| d > 0).count()
    }

    pub fn closed_case_count(&self) -> usize {
        self.changes.iter().filter(|&&(_, d)| d < 0).count()
    }

    /// Proportion of new cases, `λ+`.
    pub fn lambda_plus(&self) -> f64 {
        self.new_case_count() as f64 / self.len() as f64
    }

    /// Proportion of closed cases, `λ-`.
    pub fn lambda_minus(&self) -> f64 {
        self.closed_case_count() as f64 / self.len() as f64
    }

    /// Change in prevalence `∇ = μ_2 - μ_1`.
    pub fn true_change(&self) -> f64 {
        (self.evolved.case_total() as f64 - self.base.case_total() as f64) / self.len() as f64
    }
}

/// Evolves `base` into a second time point following `setting`.
///
/// Growing networks keep every member and annex fresh units; shrinking
/// networks keep a uniformly random subset; emerging networks are built from
/// units that were noncases at the first time point. Contacts at the second
/// time point are rebuilt as stars over each network.
pub fn evolve_population(
    base: &PopulationGraph,
    setting: &DynamicsSetting,
    rng_seed: u64,
) -> Result<TwoWavePopulation> {
    setting.validate()?;
    let k = setting.initial.size;
    if base.mode() != Mode::Person {
        return Err(Error::config("population.mode", "dynamics require a person population"));
    }
    if base.networks().len() != setting.initial.count
        || base.networks().iter().any(|net| net.len() != k)
    {
        return Err(Error::config(
            "setting",
            format!(
                "base population does not have {} networks of size {k}",
                setting.initial.count
            ),
        ));
    }
    let fresh_needed = setting.new_case_count();
    let noncases = base.len() - base.case_unit_count();
    if fresh_needed > noncases {
        return Err(Error::config(
            "setting",
            format!("{fresh_needed} new cases requested but only {noncases} noncases exist"),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut order: Vec<usize> = (0..base.networks().len()).collect();
    order.shuffle(&mut rng);
    let (growing, steady) = order.split_at(setting.growing.count);

    let mut idx: Vec<usize> = index::sample(&mut rng, noncases, fresh_needed).into_vec();
    idx.sort_unstable();
    let mut fresh = map_noncase_indices(base.case_units(), &idx);
    fresh.shuffle(&mut rng);
    let mut fresh = fresh.into_iter();

    let mut sizes = vec![setting.shrinking.size; steady.len()];
    if setting.random_sizes {
        sizes.iter_mut().for_each(|s| *s = 0);
        let mut open: Vec<usize> = (0..steady.len()).collect();
        for _ in 0..setting.residual_total() {
            let pick = rng.random_range(0..open.len());
            let slot = open[pick];
            sizes[slot] += 1;
            if sizes[slot] == k {
                open.swap_remove(pick);
            }
        }
    }

    let mut groups: Vec<Vec<UnitId>> = Vec::new();
    for &net in growing {
        let mut members = base.network(net).members.clone();
        members.extend(fresh.by_ref().take(setting.growing.size - k));
        groups.push(members);
    }
    for (&net, &size) in steady.iter().zip(&sizes) {
        let kept: Vec<UnitId> = base
            .network(net)
            .members
            .choose_multiple(&mut rng, size)
            .copied()
            .collect();
        groups.push(kept);
    }
    for _ in 0..setting.emerging.count {
        groups.push(fresh.by_ref().take(setting.emerging.size).collect());
    }

    let mut cases = Vec::with_capacity(setting.final_total());
    let mut edges = Vec::new();
    for group in &mut groups {
        group.sort_unstable();
        Topology::Star.edges(group, &mut edges);
        cases.extend_from_slice(group);
    }
    let evolved = PopulationGraph::from_parts(Mode::Person, base.len(), None, &cases, &edges)?;
    TwoWavePopulation::new(base.clone(), evolved)
}
