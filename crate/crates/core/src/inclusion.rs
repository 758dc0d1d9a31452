//! Inclusion and exclusion probabilities of units, networks and unit sets.
//!
//! All functions are generic over the number type so the same code runs in
//! `f64` for simulation and in exact rationals for enumeration checks.

use std::collections::HashMap;
use std::fmt::Debug;

use num_traits::{FromPrimitive, Num};

use crate::design::InitialDesign;
use crate::error::{Error, Result};
use crate::popgraph::{PopulationGraph, UnitId};
use crate::sets;

/// Number types usable as probabilities.
pub trait Prob: Clone + Num + FromPrimitive + PartialOrd + Debug {}

impl<T: Clone + Num + FromPrimitive + PartialOrd + Debug> Prob for T {}

pub(crate) fn from_usize<T: Prob>(x: usize) -> T {
    T::from_usize(x).expect("count representable")
}

/// Probability model of the initial sample `s0`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialModel<T> {
    /// Exactly `m` of `n` units without replacement.
    Srs { n: usize, m: usize },
    /// Independent inclusion with `p_case` for units in `favoured` (sorted)
    /// and `p_non` for all others.
    Poisson {
        n: usize,
        p_case: T,
        p_non: T,
        favoured: Vec<UnitId>,
    },
}

impl InitialModel<f64> {
    /// The model of `design` on `pop`, with case units favoured.
    pub fn from_design(design: &InitialDesign, pop: &PopulationGraph) -> Result<Self> {
        design.validate(pop.len())?;
        Ok(match *design {
            InitialDesign::Srs { m } => InitialModel::Srs { n: pop.len(), m },
            InitialDesign::PoissonSizeBiased { .. } => {
                let favoured = pop.case_units().to_vec();
                let (p_case, p_non) = design.poisson_rates(pop.len(), favoured.len())?;
                InitialModel::Poisson {
                    n: pop.len(),
                    p_case,
                    p_non,
                    favoured,
                }
            }
        })
    }
}

impl<T: Prob> InitialModel<T> {
    pub fn population_size(&self) -> usize {
        match self {
            InitialModel::Srs { n, .. } | InitialModel::Poisson { n, .. } => *n,
        }
    }

    pub fn is_favoured(&self, unit: UnitId) -> bool {
        match self {
            InitialModel::Srs { .. } => false,
            InitialModel::Poisson { favoured, .. } => sets::contains(favoured, &unit),
        }
    }

    /// `π_i`, the initial inclusion probability of one unit.
    pub fn unit_inclusion(&self, unit: UnitId) -> T {
        match self {
            InitialModel::Srs { n, m } => from_usize::<T>(*m) / from_usize::<T>(*n),
            InitialModel::Poisson { p_case, p_non, .. } => {
                if self.is_favoured(unit) {
                    p_case.clone()
                } else {
                    p_non.clone()
                }
            }
        }
    }

    /// `π_ij` for two distinct units.
    pub fn unit_joint_inclusion(&self, i: UnitId, j: UnitId) -> Result<T> {
        if i == j {
            return Err(Error::Contract(format!("joint inclusion needs i != j, got {i} twice")));
        }
        Ok(network_joint_inclusion(self, &[i], &[j]))
    }

    /// Probability that `s0` misses a set holding `favoured` favoured units
    /// and `other` remaining units.
    pub fn exclusion_by_counts(&self, favoured: usize, other: usize) -> T {
        match self {
            InitialModel::Srs { n, m } => srs_exclusion(*n, *m, favoured + other),
            InitialModel::Poisson { p_case, p_non, .. } => {
                let one = T::one();
                num_traits::pow(one.clone() - p_case.clone(), favoured)
                    * num_traits::pow(one - p_non.clone(), other)
            }
        }
    }

    /// Number of favoured units in the sorted set `set`.
    pub fn favoured_count(&self, set: &[UnitId]) -> usize {
        match self {
            InitialModel::Srs { .. } => 0,
            InitialModel::Poisson { favoured, .. } => sets::intersection_len(set, favoured),
        }
    }
}

/// `C(n - b, m) / C(n, m)` as `prod_{j < b} (n - m - j) / (n - j)`.
fn srs_exclusion<T: Prob>(n: usize, m: usize, b: usize) -> T {
    if b == 0 {
        return T::one();
    }
    if b > n - m {
        return T::zero();
    }
    let mut p = T::one();
    for j in 0..b {
        p = p * from_usize::<T>(n - m - j) / from_usize::<T>(n - j);
    }
    p
}

/// `π̄_B`, the probability that `s0` contains no unit of `set`.
///
/// `set` must be sorted and duplicate free.
pub fn exclusion_prob<T: Prob>(model: &InitialModel<T>, set: &[UnitId]) -> T {
    let f = model.favoured_count(set);
    model.exclusion_by_counts(f, set.len() - f)
}

/// `π_(κ) = 1 - π̄_κ`.
pub fn network_inclusion<T: Prob>(model: &InitialModel<T>, members: &[UnitId]) -> T {
    T::one() - exclusion_prob(model, members)
}

/// `π_(κℓ) = 1 - π̄_κ - π̄_ℓ + π̄_{κ∪ℓ}`.
///
/// The sets may overlap, which covers networks of different time points;
/// equal sets give `π_(κ)`.
pub fn network_joint_inclusion<T: Prob>(model: &InitialModel<T>, a: &[UnitId], b: &[UnitId]) -> T {
    let union = sets::union(a, b);
    T::one() - exclusion_prob(model, a) - exclusion_prob(model, b) + exclusion_prob(model, &union)
}

/// Joint inclusion of distinct units `i`, `j` in the ACS sample at one time
/// point. A case stands for its whole network, a noncase for itself.
pub fn iacs_joint_inclusion<T: Prob>(
    model: &InitialModel<T>,
    pop: &PopulationGraph,
    i: UnitId,
    j: UnitId,
) -> Result<T> {
    if i == j {
        return Err(Error::Contract(format!("joint inclusion needs i != j, got {i} twice")));
    }
    let beta = |u: UnitId| -> Vec<UnitId> {
        match pop.network_of(u) {
            Some(id) => pop.network(id).members.clone(),
            None => vec![u],
        }
    };
    match (pop.network_of(i), pop.network_of(j)) {
        (None, None) => model.unit_joint_inclusion(i, j),
        (Some(a), Some(b)) if a == b => Ok(network_inclusion(model, &pop.network(a).members)),
        _ => Ok(network_joint_inclusion(model, &beta(i), &beta(j))),
    }
}

/// Sample inclusion probability of a unit under network-exhaustive tracing:
/// its network's inclusion for a case, `π_i` otherwise.
pub fn unit_sample_inclusion<T: Prob>(model: &InitialModel<T>, pop: &PopulationGraph, unit: UnitId) -> T {
    match pop.network_of(unit) {
        Some(id) => network_inclusion(model, &pop.network(id).members),
        None => model.unit_inclusion(unit),
    }
}

/// First-order network probabilities of one population under one initial
/// model, with pairwise and set queries on demand.
#[derive(Debug, Clone)]
pub struct InclusionTable<T> {
    model: InitialModel<T>,
    network_first: Vec<T>,
}

impl<T: Prob> InclusionTable<T> {
    pub fn new(model: InitialModel<T>, pop: &PopulationGraph) -> Self {
        let network_first = pop
            .networks()
            .iter()
            .map(|net| network_inclusion(&model, &net.members))
            .collect();
        Self { model, network_first }
    }

    pub fn model(&self) -> &InitialModel<T> {
        &self.model
    }

    pub fn unit_initial(&self, unit: UnitId) -> T {
        self.model.unit_inclusion(unit)
    }

    /// `π_(κ)` by network id.
    pub fn network(&self, id: usize) -> &T {
        &self.network_first[id]
    }

    pub fn networks(&self) -> &[T] {
        &self.network_first
    }

    pub fn network_pair(&self, pop: &PopulationGraph, a: usize, b: usize) -> T {
        if a == b {
            return self.network_first[a].clone();
        }
        network_joint_inclusion(&self.model, &pop.network(a).members, &pop.network(b).members)
    }

    pub fn exclusion(&self, set: &[UnitId]) -> T {
        exclusion_prob(&self.model, set)
    }
}

/// Memoised exclusion probabilities keyed by (favoured, other) counts.
pub(crate) struct ExclusionCache<'a, T> {
    model: &'a InitialModel<T>,
    memo: HashMap<(usize, usize), T>,
}

impl<'a, T: Prob> ExclusionCache<'a, T> {
    pub fn new(model: &'a InitialModel<T>) -> Self {
        Self {
            model,
            memo: HashMap::new(),
        }
    }

    pub fn get(&mut self, favoured: usize, other: usize) -> T {
        let key = match self.model {
            InitialModel::Srs { .. } => (0, favoured + other),
            InitialModel::Poisson { .. } => (favoured, other),
        };
        self.memo
            .entry(key)
            .or_insert_with(|| self.model.exclusion_by_counts(key.0, key.1))
            .clone()
    }
}
