use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Mode, PopulationGraph, UnitId};
use crate::error::{Error, Result};

/// Contact structure used inside each generated case network.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    /// One hub joined to every other member.
    #[default]
    Star,
    /// Members joined in a chain.
    Path,
    /// Every pair of members in contact.
    Complete,
}

impl Topology {
    pub(crate) fn edges(self, members: &[UnitId], out: &mut Vec<(UnitId, UnitId)>) {
        match self {
            Topology::Star => {
                if let Some((&hub, rest)) = members.split_first() {
                    out.extend(rest.iter().map(|&leaf| (hub, leaf)));
                }
            }
            Topology::Path => out.extend(members.windows(2).map(|w| (w[0], w[1]))),
            Topology::Complete => {
                for (pos, &a) in members.iter().enumerate() {
                    out.extend(members[pos + 1..].iter().map(|&b| (a, b)));
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GeneratorOptions {
    #[serde(default)]
    pub topology: Topology,
    /// Noncase units attached to the hub of every network.
    #[serde(default)]
    pub edge_nodes_per_network: usize,
}

/// `θ/k` networks of `k` cases each, placed on uniformly random units.
pub fn build_equal_network_population(
    n: usize,
    theta: usize,
    k: usize,
    rng_seed: u64,
) -> Result<PopulationGraph> {
    build_equal_network_population_with(n, theta, k, &GeneratorOptions::default(), rng_seed)
}

pub fn build_equal_network_population_with(
    n: usize,
    theta: usize,
    k: usize,
    options: &GeneratorOptions,
    rng_seed: u64,
) -> Result<PopulationGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let (cases, edges) = place_networks(n, theta, k, options, &mut rng)?;
    PopulationGraph::from_parts(Mode::Person, n, None, &cases, &edges)
}

/// Household population: the network layout of
/// [`build_equal_network_population`] over households, with every household
/// size drawn independently from `size_dist` (probabilities of sizes
/// `1, 2, ...`). All members of a case household are cases.
pub fn build_household_population(
    n: usize,
    theta: usize,
    k: usize,
    size_dist: &[f64],
    rng_seed: u64,
) -> Result<PopulationGraph> {
    build_household_population_with(n, theta, k, size_dist, &GeneratorOptions::default(), rng_seed)
}

pub fn build_household_population_with(
    n: usize,
    theta: usize,
    k: usize,
    size_dist: &[f64],
    options: &GeneratorOptions,
    rng_seed: u64,
) -> Result<PopulationGraph> {
    validate_size_dist(size_dist)?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let (cases, edges) = place_networks(n, theta, k, options, &mut rng)?;
    let sizes_dist = WeightedIndex::new(size_dist)
        .map_err(|e| Error::config("size_dist", e.to_string()))?;
    let sizes = (0..n)
        .map(|_| sizes_dist.sample(&mut rng) as u32 + 1)
        .collect();
    PopulationGraph::from_parts(Mode::Household, n, Some(sizes), &cases, &edges)
}

pub(crate) fn validate_size_dist(size_dist: &[f64]) -> Result<()> {
    if size_dist.is_empty() {
        return Err(Error::config("size_dist", "empty size distribution"));
    }
    if let Some(pos) = size_dist.iter().position(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::config(
            format!("size_dist[{pos}]"),
            "probabilities must be finite and nonnegative",
        ));
    }
    let total: f64 = size_dist.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::config(
            "size_dist",
            format!("probabilities sum to {total}, not 1"),
        ));
    }
    Ok(())
}

pub(crate) fn validate_equal_networks(
    n: usize,
    theta: usize,
    k: usize,
    edge_nodes: usize,
) -> Result<()> {
    if k == 0 {
        return Err(Error::config("k", "network size must be positive"));
    }
    if !theta.is_multiple_of(k) {
        return Err(Error::config(
            "k",
            format!("network size {k} does not divide case total {theta}"),
        ));
    }
    if theta > n {
        return Err(Error::config(
            "theta",
            format!("case total {theta} exceeds population size {n}"),
        ));
    }
    let extra = (theta / k).saturating_mul(edge_nodes);
    if theta.saturating_add(extra) > n {
        return Err(Error::config(
            "edge_nodes_per_network",
            format!("{extra} edge nodes do not fit beside {theta} cases in {n} units"),
        ));
    }
    Ok(())
}

/// Case units and contact edges of a generated population.
type Placement = (Vec<UnitId>, Vec<(UnitId, UnitId)>);

fn place_networks(
    n: usize,
    theta: usize,
    k: usize,
    options: &GeneratorOptions,
    rng: &mut ChaCha8Rng,
) -> Result<Placement> {
    validate_equal_networks(n, theta, k, options.edge_nodes_per_network)?;
    let networks = theta / k;
    let needed = theta + networks * options.edge_nodes_per_network;
    let chosen: Vec<UnitId> = index::sample(rng, n, needed)
        .into_iter()
        .map(|u| u as UnitId)
        .collect();
    let (cases, edge_nodes) = chosen.split_at(theta);

    let mut edges = Vec::new();
    for (net, members) in cases.chunks(k).enumerate() {
        options.topology.edges(members, &mut edges);
        let e = options.edge_nodes_per_network;
        let hub = members[0];
        edges.extend(edge_nodes[net * e..(net + 1) * e].iter().map(|&u| (hub, u)));
    }
    Ok((cases.to_vec(), edges))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_network_holds_every_case() {
        let pop = build_equal_network_population(6, 3, 3, 7).unwrap();
        assert_eq!(pop.networks().len(), 1);
        assert_eq!(pop.network(0).len(), 3);
        assert_eq!(pop.case_total(), 3);
    }

    #[test]
    fn singleton_networks() {
        let pop = build_equal_network_population(6, 3, 1, 7).unwrap();
        assert_eq!(pop.networks().len(), 3);
        assert!(pop.networks().iter().all(|n| n.len() == 1));
        assert_eq!(pop.edge_count(), 0);
    }

    #[test]
    fn table_one_layout() {
        let pop = build_equal_network_population(100_000, 1_000, 100, 1).unwrap();
        assert_eq!(pop.networks().len(), 10);
        assert!(pop.networks().iter().all(|n| n.len() == 100));
        assert_eq!(pop.case_total(), 1_000);
        // star: k - 1 edges per network
        assert_eq!(pop.edge_count(), 990);
    }

    #[test]
    fn rejects_bad_configurations() {
        let err = build_equal_network_population(100, 10, 3, 0).unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "k"));
        let err = build_equal_network_population(5, 10, 5, 0).unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "theta"));
        assert!(build_household_population(10, 2, 2, &[0.5, 0.4], 0).is_err());
        assert!(build_household_population(10, 2, 2, &[], 0).is_err());
        assert!(build_household_population(10, 2, 2, &[1.5, -0.5], 0).is_err());
    }

    #[test]
    fn topologies_are_connected() {
        for topology in [Topology::Star, Topology::Path, Topology::Complete] {
            let options = GeneratorOptions {
                topology,
                edge_nodes_per_network: 2,
            };
            let pop = build_equal_network_population_with(200, 20, 5, &options, 3).unwrap();
            assert_eq!(pop.networks().len(), 4);
            assert!(pop.networks().iter().all(|n| n.len() == 5));
            for id in 0..4 {
                assert_eq!(pop.edge_units_of(id).len(), 2);
            }
        }
    }

    #[test]
    fn forced_household_sizes() {
        let pop = build_household_population(10, 2, 2, &[0.0, 1.0, 0.0, 0.0], 11).unwrap();
        assert_eq!(pop.networks().len(), 1);
        assert_eq!(pop.network(0).y_total, 4);
    }

    #[test]
    fn degenerate_sizes_match_person_mode() {
        let person = build_equal_network_population(500, 40, 4, 5).unwrap();
        let house = build_household_population(500, 40, 4, &[1.0, 0.0, 0.0, 0.0], 5).unwrap();
        assert_eq!(person.case_units(), house.case_units());
        assert_eq!(person.networks(), house.networks());
        assert_eq!(
            person.edges().collect::<Vec<_>>(),
            house.edges().collect::<Vec<_>>()
        );
    }

    #[test]
    fn deterministic_for_seed() {
        let a = build_household_population(1_000, 60, 6, &[0.38, 0.30, 0.12, 0.20], 9).unwrap();
        let b = build_household_population(1_000, 60, 6, &[0.38, 0.30, 0.12, 0.20], 9).unwrap();
        assert_eq!(a, b);
    }
}
