//! Population graphs of persons or households with their case networks.
//!
//! A [`PopulationGraph`] is stored sparsely: the unit set is `0..N`, but only
//! case units and units touching a contact edge are materialised. Everything
//! else is an isolated noncase. Case networks are always derived from the
//! contact edges (connected components of the case-induced subgraph), so the
//! partition invariants hold by construction.

mod document;
mod dynamics;
mod generate;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use document::PopulationDocument;
pub use dynamics::{evolve_population, Cohort, DynamicsSetting, TwoWavePopulation};
pub use generate::{
    build_equal_network_population, build_equal_network_population_with,
    build_household_population, build_household_population_with, GeneratorOptions, Topology,
};
pub(crate) use generate::{validate_equal_networks, validate_size_dist};

/// Index of a unit (person or household) in `0..N`.
pub type UnitId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Person,
    Household,
}

/// A maximal set of cases connected through contact edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseNetwork {
    pub id: usize,
    /// Sorted member ids.
    pub members: Vec<UnitId>,
    /// Sum of `y` over members: the number of person-cases in the network.
    pub y_total: u64,
}

impl CaseNetwork {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, unit: UnitId) -> bool {
        self.members.binary_search(&unit).is_ok()
    }
}

/// Undirected simple contact graph over `N` units with per-unit case values.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationGraph {
    mode: Mode,
    n: usize,
    /// Household sizes, indexed by unit. Empty in person mode.
    sizes: Vec<u32>,
    /// Sorted ids of the case units.
    cases: Vec<UnitId>,
    /// Network index of each entry of `cases`.
    case_network: Vec<u32>,
    networks: Vec<CaseNetwork>,
    /// Compressed adjacency over the units that have at least one edge.
    adj_units: Vec<UnitId>,
    adj_offsets: Vec<u32>,
    adj_targets: Vec<UnitId>,
}

impl PopulationGraph {
    /// Builds a population from its case units and contact edges.
    ///
    /// `sizes` must be given (one entry per unit, all positive) in household
    /// mode and must be `None` in person mode. Case values are implied: a
    /// person case has `y = 1`, a case household has `y` equal to its size.
    /// Edges may be listed in either orientation; duplicates collapse.
    pub fn from_parts(
        mode: Mode,
        n: usize,
        sizes: Option<Vec<u32>>,
        cases: &[UnitId],
        edges: &[(UnitId, UnitId)],
    ) -> Result<Self> {
        if n > u32::MAX as usize {
            return Err(Error::config("N", "population too large for 32-bit unit ids"));
        }
        let sizes = match (mode, sizes) {
            (Mode::Person, None) => Vec::new(),
            (Mode::Person, Some(_)) => {
                return Err(Error::config("sizes", "person mode takes no household sizes"))
            }
            (Mode::Household, None) => {
                return Err(Error::config("sizes", "household mode requires sizes"))
            }
            (Mode::Household, Some(sizes)) => {
                if sizes.len() != n {
                    return Err(Error::config(
                        "sizes",
                        format!("expected {n} household sizes, got {}", sizes.len()),
                    ));
                }
                if let Some(pos) = sizes.iter().position(|&s| s == 0) {
                    return Err(Error::config(
                        format!("sizes[{pos}]"),
                        "household size must be positive",
                    ));
                }
                sizes
            }
        };

        let mut case_ids = cases.to_vec();
        case_ids.sort_unstable();
        case_ids.dedup();
        if let Some(&bad) = case_ids.last().filter(|&&c| c as usize >= n) {
            return Err(Error::config("cases", format!("unit {bad} outside 0..{n}")));
        }

        let mut directed = Vec::with_capacity(edges.len() * 2);
        for &(a, b) in edges {
            if a as usize >= n || b as usize >= n {
                return Err(Error::config("edges", format!("edge ({a}, {b}) outside 0..{n}")));
            }
            if a == b {
                return Err(Error::config("edges", format!("self-loop at unit {a}")));
            }
            directed.push((a, b));
            directed.push((b, a));
        }
        directed.sort_unstable();
        directed.dedup();

        let mut adj_units = Vec::new();
        let mut adj_offsets = vec![0u32];
        let mut adj_targets = Vec::with_capacity(directed.len());
        for &(src, dst) in &directed {
            if adj_units.last() != Some(&src) {
                if !adj_units.is_empty() {
                    adj_offsets.push(adj_targets.len() as u32);
                }
                adj_units.push(src);
            }
            adj_targets.push(dst);
        }
        if !adj_units.is_empty() {
            adj_offsets.push(adj_targets.len() as u32);
        }

        let (case_network, networks) = components(&case_ids, &directed, &sizes, mode);
        Ok(Self {
            mode,
            n,
            sizes,
            cases: case_ids,
            case_network,
            networks,
            adj_units,
            adj_offsets,
            adj_targets,
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Population size `N`.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn size(&self, unit: UnitId) -> u32 {
        match self.mode {
            Mode::Person => 1,
            Mode::Household => self.sizes[unit as usize],
        }
    }

    /// Case value `y_i`.
    pub fn y(&self, unit: UnitId) -> u32 {
        if self.is_case(unit) {
            self.size(unit)
        } else {
            0
        }
    }

    pub fn is_case(&self, unit: UnitId) -> bool {
        self.cases.binary_search(&unit).is_ok()
    }

    /// Index of the network containing `unit`, if it is a case.
    pub fn network_of(&self, unit: UnitId) -> Option<usize> {
        self.cases
            .binary_search(&unit)
            .ok()
            .map(|pos| self.case_network[pos] as usize)
    }

    pub fn networks(&self) -> &[CaseNetwork] {
        &self.networks
    }

    pub fn network(&self, id: usize) -> &CaseNetwork {
        &self.networks[id]
    }

    /// Sorted case unit ids.
    pub fn case_units(&self) -> &[UnitId] {
        &self.cases
    }

    /// Number of case units (persons or households).
    pub fn case_unit_count(&self) -> usize {
        self.cases.len()
    }

    /// Case total `θ = Σ y_i`, counted in persons.
    pub fn case_total(&self) -> u64 {
        self.networks.iter().map(|n| n.y_total).sum()
    }

    /// Prevalence `μ = θ / N`.
    pub fn prevalence(&self) -> f64 {
        self.case_total() as f64 / self.n as f64
    }

    /// Sorted neighbours of `unit` (empty for isolated units).
    pub fn neighbours(&self, unit: UnitId) -> &[UnitId] {
        match self.adj_units.binary_search(&unit) {
            Ok(pos) => {
                let lo = self.adj_offsets[pos] as usize;
                let hi = self.adj_offsets[pos + 1] as usize;
                &self.adj_targets[lo..hi]
            }
            Err(_) => &[],
        }
    }

    pub fn are_adjacent(&self, a: UnitId, b: UnitId) -> bool {
        self.neighbours(a).binary_search(&b).is_ok()
    }

    /// Edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (UnitId, UnitId)> + '_ {
        self.adj_units.iter().enumerate().flat_map(move |(pos, &src)| {
            let lo = self.adj_offsets[pos] as usize;
            let hi = self.adj_offsets[pos + 1] as usize;
            self.adj_targets[lo..hi]
                .iter()
                .filter(move |&&dst| src < dst)
                .map(move |&dst| (src, dst))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.adj_targets.len() / 2
    }

    /// Household sizes in unit order, or `None` in person mode.
    pub fn household_sizes(&self) -> Option<&[u32]> {
        match self.mode {
            Mode::Person => None,
            Mode::Household => Some(&self.sizes),
        }
    }

    /// Noncase units adjacent to at least one member of network `id`.
    pub fn edge_units_of(&self, id: usize) -> Vec<UnitId> {
        let mut out: Vec<UnitId> = self.networks[id]
            .members
            .iter()
            .flat_map(|&m| self.neighbours(m).iter().copied())
            .filter(|&u| !self.is_case(u))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Union-find over the case units; networks are numbered by smallest member.
fn components(
    cases: &[UnitId],
    directed: &[(UnitId, UnitId)],
    sizes: &[u32],
    mode: Mode,
) -> (Vec<u32>, Vec<CaseNetwork>) {
    let mut parent: Vec<u32> = (0..cases.len() as u32).collect();
    fn find(parent: &mut [u32], mut x: u32) -> u32 {
        while parent[x as usize] != x {
            parent[x as usize] = parent[parent[x as usize] as usize];
            x = parent[x as usize];
        }
        x
    }
    for &(a, b) in directed {
        if a >= b {
            continue;
        }
        if let (Ok(ia), Ok(ib)) = (cases.binary_search(&a), cases.binary_search(&b)) {
            let (ra, rb) = (find(&mut parent, ia as u32), find(&mut parent, ib as u32));
            if ra != rb {
                let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
                parent[hi as usize] = lo;
            }
        }
    }

    let mut root_to_net = vec![u32::MAX; cases.len()];
    let mut case_network = Vec::with_capacity(cases.len());
    let mut networks: Vec<CaseNetwork> = Vec::new();
    for (idx, &unit) in cases.iter().enumerate() {
        let root = find(&mut parent, idx as u32) as usize;
        if root_to_net[root] == u32::MAX {
            root_to_net[root] = networks.len() as u32;
            networks.push(CaseNetwork {
                id: networks.len(),
                members: Vec::new(),
                y_total: 0,
            });
        }
        let net = root_to_net[root];
        case_network.push(net);
        let y = match mode {
            Mode::Person => 1,
            Mode::Household => sizes[unit as usize] as u64,
        };
        let network = &mut networks[net as usize];
        network.members.push(unit);
        network.y_total += y;
    }
    (case_network, networks)
}


/// Maps sorted positions within the noncase units (`0..N-θ`) to unit ids.
pub(crate) fn map_noncase_indices(cases: &[UnitId], sorted_idx: &[usize]) -> Vec<UnitId> {
    let mut out = Vec::with_capacity(sorted_idx.len());
    let mut skipped = 0usize;
    for &idx in sorted_idx {
        let mut id = idx + skipped;
        while skipped < cases.len() && cases[skipped] as usize <= id {
            skipped += 1;
            id = idx + skipped;
        }
        out.push(id as UnitId);
    }
    out
}

#[cfg(test)]
mod noncase_tests {
    use super::map_noncase_indices;

    #[test]
    fn skips_case_units() {
        assert_eq!(map_noncase_indices(&[1, 3], &[0, 1, 2, 3]), vec![0, 2, 4, 5]);
        assert_eq!(map_noncase_indices(&[0, 1, 2], &[0]), vec![3]);
        assert_eq!(map_noncase_indices(&[], &[4]), vec![4]);
    }
}
