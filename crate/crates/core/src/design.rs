//! Initial probability samples and adaptive network tracing.

use std::collections::BTreeMap;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::popgraph::{map_noncase_indices, PopulationGraph, UnitId};
use crate::sets;

/// How the initial sample `s0` is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialDesign {
    /// Simple random sampling of exactly `m` units without replacement.
    Srs { m: usize },
    /// Poisson sampling where a case unit is `eta` times as likely to be
    /// selected as a noncase, scaled so that the expected size is `m`.
    #[serde(alias = "poisson")]
    PoissonSizeBiased { m: usize, eta: f64 },
}

impl InitialDesign {
    pub fn m(&self) -> usize {
        match *self {
            InitialDesign::Srs { m } | InitialDesign::PoissonSizeBiased { m, .. } => m,
        }
    }

    /// Odds of case selection (1 for SRS).
    pub fn eta(&self) -> f64 {
        match *self {
            InitialDesign::Srs { .. } => 1.0,
            InitialDesign::PoissonSizeBiased { eta, .. } => eta,
        }
    }

    pub fn validate(&self, population_size: usize) -> Result<()> {
        if self.m() > population_size {
            return Err(Error::config(
                "m",
                format!(
                    "initial sample size {} exceeds population size {population_size}",
                    self.m()
                ),
            ));
        }
        if let InitialDesign::PoissonSizeBiased { eta, .. } = *self {
            if !eta.is_finite() || eta < 1.0 {
                return Err(Error::config("eta", format!("odds of case selection must be >= 1, got {eta}")));
            }
        }
        Ok(())
    }

    /// Selection probabilities `(p_case, p_non)` when `favoured` of the `n`
    /// units are cases: `p_non = m / (N + (η - 1) θ)`, `p_case = η p_non`.
    pub fn poisson_rates(&self, n: usize, favoured: usize) -> Result<(f64, f64)> {
        self.validate(n)?;
        let (m, eta) = (self.m() as f64, self.eta());
        let p_non = m / (n as f64 + (eta - 1.0) * favoured as f64);
        let p_case = eta * p_non;
        if p_case > 1.0 {
            return Err(Error::config(
                "eta",
                format!("case selection probability {p_case} exceeds 1"),
            ));
        }
        Ok((p_case, p_non))
    }
}

/// Draws `s0` from `pop`; the result is sorted.
pub fn draw_initial(design: &InitialDesign, pop: &PopulationGraph, rng_seed: u64) -> Result<Vec<UnitId>> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    draw_initial_with(design, pop, &mut rng)
}

pub fn draw_initial_with<R: Rng + ?Sized>(
    design: &InitialDesign,
    pop: &PopulationGraph,
    rng: &mut R,
) -> Result<Vec<UnitId>> {
    let n = pop.len();
    match *design {
        InitialDesign::Srs { m } => {
            design.validate(n)?;
            Ok(sorted_sample(rng, n, m)
                .into_iter()
                .map(|u| u as UnitId)
                .collect())
        }
        InitialDesign::PoissonSizeBiased { .. } => {
            let cases = pop.case_units();
            let (p_case, p_non) = design.poisson_rates(n, cases.len())?;
            let noncases = n - cases.len();
            let hit_cases = binomial(rng, cases.len(), p_case);
            let hit_non = binomial(rng, noncases, p_non);
            let from_cases: Vec<UnitId> = sorted_sample(rng, cases.len(), hit_cases)
                .into_iter()
                .map(|pos| cases[pos])
                .collect();
            let from_non = map_noncase_indices(cases, &sorted_sample(rng, noncases, hit_non));
            Ok(sets::union(&from_cases, &from_non))
        }
    }
}

fn binomial<R: Rng + ?Sized>(rng: &mut R, n: usize, p: f64) -> usize {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    Binomial::new(n as u64, p.min(1.0))
        .expect("probability in [0, 1]")
        .sample(rng) as usize
}

/// Uniform `amount`-subset of `0..n` in increasing order.
///
/// Rejection into a bitset, switching to the complement when more than half
/// the range is wanted; cost is `O(amount + n / 64)`.
pub(crate) fn sorted_sample<R: Rng + ?Sized>(rng: &mut R, n: usize, amount: usize) -> Vec<usize> {
    debug_assert!(amount <= n);
    if amount == 0 {
        return Vec::new();
    }
    if amount < 16 {
        let mut v = index::sample(rng, n, amount).into_vec();
        v.sort_unstable();
        return v;
    }
    let complement = amount * 2 > n;
    let draws = if complement { n - amount } else { amount };
    let mut bits = vec![0u64; n.div_ceil(64)];
    let mut chosen = 0;
    while chosen < draws {
        let x = rng.random_range(0..n);
        let (word, bit) = (x / 64, 1u64 << (x % 64));
        if bits[word] & bit == 0 {
            bits[word] |= bit;
            chosen += 1;
        }
    }
    let mut out = Vec::with_capacity(amount);
    for (w, &word) in bits.iter().enumerate() {
        let mut word = if complement { !word } else { word };
        while word != 0 {
            let x = w * 64 + word.trailing_zeros() as usize;
            if x >= n {
                break;
            }
            out.push(x);
            word &= word - 1;
        }
    }
    out
}

/// Exogenous contact strengths `ψ_ij` keyed by unordered pair.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EdgeStrengths(BTreeMap<(UnitId, UnitId), f64>);

impl EdgeStrengths {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, a: UnitId, b: UnitId, psi: f64) {
        self.0.insert(key(a, b), psi);
    }

    pub fn get(&self, a: UnitId, b: UnitId) -> Option<f64> {
        self.0.get(&key(a, b)).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Independent `Uniform(0, 1)` strengths on every edge of `pop`.
    pub fn uniform(pop: &PopulationGraph, rng_seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        Self(pop.edges().map(|e| (e, rng.random::<f64>())).collect())
    }

    pub fn min(&self) -> Option<f64> {
        self.0.values().copied().reduce(f64::min)
    }

    pub fn max(&self) -> Option<f64> {
        self.0.values().copied().reduce(f64::max)
    }
}

impl FromIterator<((UnitId, UnitId), f64)> for EdgeStrengths {
    fn from_iter<I: IntoIterator<Item = ((UnitId, UnitId), f64)>>(iter: I) -> Self {
        Self(iter.into_iter().map(|((a, b), psi)| (key(a, b), psi)).collect())
    }
}

fn key(a: UnitId, b: UnitId) -> (UnitId, UnitId) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TracingKind {
    Acs,
    Dacs,
    Qasbs,
}

/// Which contacts of a case are traced and for how many waves.
#[derive(Debug, Clone, PartialEq)]
pub struct TracingDesign {
    /// Only edges with `ψ_ij > ψ_0` are followed when present.
    threshold: Option<(f64, EdgeStrengths)>,
    max_waves: Option<usize>,
}

impl TracingDesign {
    /// Network-exhaustive adaptive cluster sampling.
    pub fn acs() -> Self {
        Self {
            threshold: None,
            max_waves: None,
        }
    }

    /// Doubly adaptive: trace only contacts with strength above `psi0`.
    /// Edges missing from `strengths` are never traced.
    pub fn dacs(psi0: f64, strengths: EdgeStrengths) -> Self {
        Self {
            threshold: Some((psi0, strengths)),
            max_waves: None,
        }
    }

    /// Adaptive snowball sampling stopped after `q` waves.
    pub fn qasbs(q: usize) -> Self {
        Self {
            threshold: None,
            max_waves: Some(q),
        }
    }

    /// Adds a wave limit to any design (qASBS with a strength threshold).
    pub fn with_max_waves(mut self, q: usize) -> Self {
        self.max_waves = Some(q);
        self
    }

    pub fn kind(&self) -> TracingKind {
        match (&self.max_waves, &self.threshold) {
            (Some(_), _) => TracingKind::Qasbs,
            (None, Some(_)) => TracingKind::Dacs,
            (None, None) => TracingKind::Acs,
        }
    }

    pub fn max_waves(&self) -> Option<usize> {
        self.max_waves
    }

    fn follows(&self, a: UnitId, b: UnitId) -> bool {
        match &self.threshold {
            None => true,
            Some((psi0, strengths)) => strengths.get(a, b).is_some_and(|psi| psi > *psi0),
        }
    }
}

/// Role of a sampled unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitTag {
    /// A case; its network was reached.
    NetworkCase,
    /// A noncase adjacent to a sampled case network.
    EdgeUnit,
    /// Any other noncase of the initial sample.
    OtherInitial,
}

/// Result of tracing from an initial sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub s0: Vec<UnitId>,
    /// Non-empty waves `s_1, s_2, ...`; tracing stopped when the next wave
    /// would be empty or the wave limit was reached.
    pub waves: Vec<Vec<UnitId>>,
    #[serde(rename = "final")]
    pub final_sample: Vec<UnitId>,
    /// Tag of each entry of `final_sample`.
    pub tags: Vec<UnitTag>,
}

/// A case network touched by a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ObservedNetwork {
    pub id: usize,
    /// Every member of the network is in the final sample.
    pub complete: bool,
}

impl TraceSample {
    /// Final sample size `n = |s|`.
    pub fn n(&self) -> usize {
        self.final_sample.len()
    }

    pub fn contains(&self, unit: UnitId) -> bool {
        sets::contains(&self.final_sample, &unit)
    }

    pub fn tag_of(&self, unit: UnitId) -> Option<UnitTag> {
        self.final_sample
            .binary_search(&unit)
            .ok()
            .map(|pos| self.tags[pos])
    }

    /// Sampled case units, sorted.
    pub fn cases(&self) -> impl Iterator<Item = UnitId> + '_ {
        self.final_sample
            .iter()
            .zip(&self.tags)
            .filter(|(_, &t)| t == UnitTag::NetworkCase)
            .map(|(&u, _)| u)
    }

    /// Networks with at least one sampled member, by id.
    pub fn observed_networks(&self, pop: &PopulationGraph) -> Vec<ObservedNetwork> {
        let mut ids: Vec<usize> = self.cases().filter_map(|u| pop.network_of(u)).collect();
        ids.sort_unstable();
        ids.dedup();
        ids.into_iter()
            .map(|id| ObservedNetwork {
                id,
                complete: sets::is_subset(&pop.network(id).members, &self.final_sample),
            })
            .collect()
    }

    /// Per final unit: whether the unit's whole network (for cases) was
    /// observed. Noncases are always usable.
    pub fn fully_observed(&self, pop: &PopulationGraph) -> Vec<bool> {
        let complete: Vec<usize> = self
            .observed_networks(pop)
            .into_iter()
            .filter(|o| o.complete)
            .map(|o| o.id)
            .collect();
        self.final_sample
            .iter()
            .map(|&u| match pop.network_of(u) {
                Some(id) => complete.binary_search(&id).is_ok(),
                None => true,
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trace sample serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let sample: Self = serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))?;
        if sample.tags.len() != sample.final_sample.len() {
            return Err(Error::Document("`tags` must have one entry per final unit".into()));
        }
        Ok(sample)
    }
}

/// Traces contacts of cases wave by wave, starting from `s0`.
///
/// A unit enters the earliest wave in which it is adjacent to a traced case
/// and is never traced from unless it is a case itself.
pub fn trace(pop: &PopulationGraph, s0: &[UnitId], tracing: &TracingDesign) -> TraceSample {
    let s0 = sets::normalise(s0.to_vec());
    debug_assert!(s0.last().is_none_or(|&u| (u as usize) < pop.len()));
    let initial_cases = sets::intersection(&s0, pop.case_units());
    let mut frontier = initial_cases.clone();
    // units reached by tracing so far, kept apart from the larger s0
    let mut added: Vec<UnitId> = Vec::new();
    let mut waves: Vec<Vec<UnitId>> = Vec::new();
    let limit = tracing.max_waves.unwrap_or(usize::MAX);
    while !frontier.is_empty() && waves.len() < limit {
        let mut next = Vec::new();
        for &case in &frontier {
            next.extend(
                pop.neighbours(case)
                    .iter()
                    .copied()
                    .filter(|&j| tracing.follows(case, j)),
            );
        }
        let mut next = sets::normalise(next);
        next.retain(|u| !sets::contains(&s0, u) && !sets::contains(&added, u));
        if next.is_empty() {
            break;
        }
        added = sets::union(&added, &next);
        frontier = sets::intersection(&next, pop.case_units());
        waves.push(next);
    }
    let final_sample = sets::union(&s0, &added);
    let cases = sets::union(&initial_cases, &sets::intersection(&added, pop.case_units()));
    let tags = tags_from_cases(pop, &final_sample, &cases);
    TraceSample {
        s0,
        waves,
        final_sample,
        tags,
    }
}

/// Tags every final unit as network case, edge unit or other initial unit.
pub fn classify(sample: &TraceSample, pop: &PopulationGraph) -> Vec<(UnitId, UnitTag)> {
    sample
        .final_sample
        .iter()
        .copied()
        .zip(tag_units(pop, &sample.final_sample))
        .collect()
}

fn tag_units(pop: &PopulationGraph, final_sample: &[UnitId]) -> Vec<UnitTag> {
    tags_from_cases(pop, final_sample, &sets::intersection(final_sample, pop.case_units()))
}

/// `cases` must be the case units of `final_sample`.
fn tags_from_cases(pop: &PopulationGraph, final_sample: &[UnitId], cases: &[UnitId]) -> Vec<UnitTag> {
    let mut touched: Vec<UnitId> = cases.iter().flat_map(|&c| pop.neighbours(c).iter().copied()).collect();
    touched = sets::normalise(touched);
    let (mut ci, mut ti) = (0, 0);
    final_sample
        .iter()
        .map(|&u| {
            while ci < cases.len() && cases[ci] < u {
                ci += 1;
            }
            while ti < touched.len() && touched[ti] < u {
                ti += 1;
            }
            if ci < cases.len() && cases[ci] == u {
                UnitTag::NetworkCase
            } else if ti < touched.len() && touched[ti] == u {
                UnitTag::EdgeUnit
            } else {
                UnitTag::OtherInitial
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::figure_one;
    use crate::popgraph::{build_equal_network_population, Mode};

    fn tag_counts(sample: &TraceSample) -> [usize; 3] {
        let mut c = [0; 3];
        for t in &sample.tags {
            c[*t as usize] += 1;
        }
        c
    }

    #[test]
    fn figure_one_trace() {
        let pop = figure_one();
        let sample = trace(&pop, &[1], &TracingDesign::acs());
        assert_eq!(sample.final_sample, vec![0, 1, 2, 3, 5]);
        assert_eq!(sample.waves, vec![vec![0, 2, 5], vec![3]]);
        assert_eq!(tag_counts(&sample), [2, 3, 0]);
        assert_eq!(classify(&sample, &pop)[0], (0, UnitTag::EdgeUnit));
    }

    #[test]
    fn noncase_start_has_no_waves() {
        let pop = figure_one();
        let sample = trace(&pop, &[0, 4, 8], &TracingDesign::acs());
        assert!(sample.waves.is_empty());
        assert_eq!(sample.final_sample, vec![0, 4, 8]);
        assert!(sample.tags.iter().all(|&t| t == UnitTag::OtherInitial));
    }

    #[test]
    fn edge_unit_in_s0_does_not_trace() {
        let pop = figure_one();
        // 5 touches both networks but is a noncase
        let sample = trace(&pop, &[5], &TracingDesign::acs());
        assert_eq!(sample.final_sample, vec![5]);
        assert_eq!(sample.tags, vec![UnitTag::OtherInitial]);
    }

    #[test]
    fn whole_network_in_s0() {
        let pop = build_equal_network_population(50, 5, 5, 2).unwrap();
        let members = pop.network(0).members.clone();
        let sample = trace(&pop, &members, &TracingDesign::acs());
        assert_eq!(sample.final_sample, members);
        assert!(sample.tags.iter().all(|&t| t == UnitTag::NetworkCase));
    }

    #[test]
    fn empty_s0() {
        let pop = figure_one();
        let sample = trace(&pop, &[], &TracingDesign::acs());
        assert_eq!(sample.n(), 0);
    }

    #[test]
    fn star_leaf_with_one_wave() {
        // hub 0, leaves 1..=5
        let edges: Vec<_> = (1..=5).map(|l| (0, l)).collect();
        let pop = PopulationGraph::from_parts(Mode::Person, 8, None, &[0, 1, 2, 3, 4, 5], &edges)
            .unwrap();
        let one = trace(&pop, &[3], &TracingDesign::qasbs(1));
        assert_eq!(one.final_sample, vec![0, 3]);
        let observed = one.observed_networks(&pop);
        assert_eq!(observed, vec![ObservedNetwork { id: 0, complete: false }]);
        assert_eq!(one.fully_observed(&pop), vec![false, false]);
        let two = trace(&pop, &[3], &TracingDesign::qasbs(2));
        assert_eq!(two.final_sample, vec![0, 1, 2, 3, 4, 5]);
        let zero = trace(&pop, &[3], &TracingDesign::qasbs(0));
        assert_eq!(zero.final_sample, vec![3]);
    }

    #[test]
    fn dacs_thresholds() {
        let pop = figure_one();
        let mut strengths = EdgeStrengths::new();
        for (a, b) in pop.edges() {
            strengths.insert(a, b, 0.5);
        }
        strengths.insert(1, 2, 0.9);
        let strong = trace(&pop, &[1], &TracingDesign::dacs(0.6, strengths.clone()));
        assert_eq!(strong.final_sample, vec![1, 2]);
        let all = trace(&pop, &[1], &TracingDesign::dacs(0.1, strengths.clone()));
        assert_eq!(all, trace(&pop, &[1], &TracingDesign::acs()));
        let none = trace(&pop, &[1], &TracingDesign::dacs(0.95, strengths));
        assert_eq!(none.final_sample, vec![1]);
    }

    #[test]
    fn srs_size_and_range() {
        let pop = build_equal_network_population(1_000, 10, 1, 0).unwrap();
        for (seed, m) in [(1, 0), (2, 7), (3, 300), (4, 999), (5, 1_000)] {
            let s0 = draw_initial(&InitialDesign::Srs { m }, &pop, seed).unwrap();
            assert_eq!(s0.len(), m);
            assert!(s0.windows(2).all(|w| w[0] < w[1]));
            assert!(s0.iter().all(|&u| (u as usize) < 1_000));
        }
        assert!(draw_initial(&InitialDesign::Srs { m: 1_001 }, &pop, 0).is_err());
    }

    #[test]
    fn poisson_rates() {
        let design = InitialDesign::PoissonSizeBiased { m: 1_000, eta: 2.0 };
        let (p_case, p_non) = design.poisson_rates(100_000, 1_000).unwrap();
        assert!((p_non - 1_000.0 / 101_000.0).abs() < 1e-15);
        assert!((p_case - 0.019_801_980_198_019_8).abs() < 1e-15);
        let flat = InitialDesign::PoissonSizeBiased { m: 1_000, eta: 1.0 };
        let (a, b) = flat.poisson_rates(100_000, 1_000).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, 0.01);
        let bad = InitialDesign::PoissonSizeBiased { m: 10, eta: 0.5 };
        assert!(bad.validate(100).is_err());
    }

    #[test]
    fn sorted_sample_is_uniform_enough() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut counts = [0usize; 40];
        for _ in 0..20_000 {
            for x in sorted_sample(&mut rng, 40, 25) {
                counts[x] += 1;
            }
        }
        // expected 12500 per slot, sd ~ 68
        assert!(counts.iter().all(|&c| (c as f64 - 12_500.0).abs() < 400.0), "{counts:?}");
    }

    #[test]
    fn trace_json_round_trip() {
        let pop = figure_one();
        let sample = trace(&pop, &[1, 8], &TracingDesign::acs());
        let text = sample.to_json();
        assert!(text.contains(r#""final":[0,1,2,3,5,8]"#), "{text}");
        assert_eq!(TraceSample::from_json(&text).unwrap(), sample);
    }
}
