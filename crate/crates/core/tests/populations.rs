use std::collections::BTreeMap;

use netrace::design::{draw_initial, InitialDesign};
use netrace::popgraph::{
    build_equal_network_population, build_equal_network_population_with, build_household_population,
    evolve_population, DynamicsSetting, GeneratorOptions, PopulationGraph, Topology, UnitId,
};
use petgraph::unionfind::UnionFind;

const HOUSEHOLD_SIZES: [f64; 4] = [0.38, 0.30, 0.12, 0.20];

/// Networks recovered by union-find over case units and case-case edges.
fn components(pop: &PopulationGraph) -> Vec<Vec<UnitId>> {
    let mut uf = UnionFind::<usize>::new(pop.len());
    for (a, b) in pop.edges() {
        if pop.is_case(a) && pop.is_case(b) {
            uf.union(a as usize, b as usize);
        }
    }
    let mut groups: BTreeMap<usize, Vec<UnitId>> = BTreeMap::new();
    for &c in pop.case_units() {
        groups.entry(uf.find(c as usize)).or_default().push(c);
    }
    let mut out: Vec<Vec<UnitId>> = groups.into_values().collect();
    out.sort();
    out
}

fn networks(pop: &PopulationGraph) -> Vec<Vec<UnitId>> {
    let mut out: Vec<Vec<UnitId>> = pop.networks().iter().map(|n| n.members.clone()).collect();
    out.sort();
    out
}

#[test]
fn networks_are_connected_components() {
    for (seed, topology) in [(1, Topology::Star), (2, Topology::Path), (3, Topology::Complete)] {
        let options = GeneratorOptions {
            topology,
            edge_nodes_per_network: 2,
        };
        let pop = build_equal_network_population_with(5_000, 200, 10, &options, seed).unwrap();
        assert_eq!(pop.case_total(), 200);
        assert_eq!(networks(&pop), components(&pop), "{topology:?}");
    }
    let households = build_household_population(5_000, 100, 5, &HOUSEHOLD_SIZES, 4).unwrap();
    assert_eq!(networks(&households), components(&households));
}

#[test]
fn household_person_case_total_averages_2140() {
    let mut total = 0u64;
    for seed in 0..100 {
        let pop = build_household_population(100_000, 1_000, 10, &HOUSEHOLD_SIZES, seed).unwrap();
        assert_eq!(pop.case_unit_count(), 1_000);
        total += pop.case_total();
    }
    let mean = total as f64 / 100.0;
    assert!((mean / 2_140.0 - 1.0).abs() < 0.01, "{mean}");
}

#[test]
fn initial_sample_moments() {
    let pop = build_equal_network_population(100_000, 1_000, 10, 7).unwrap();
    let reps = 10_000u64;
    let (mut srs_cases, mut poisson_size, mut poisson_cases) = (0usize, 0usize, 0usize);
    for seed in 0..reps {
        let s0 = draw_initial(&InitialDesign::Srs { m: 1_000 }, &pop, seed).unwrap();
        assert_eq!(s0.len(), 1_000);
        srs_cases += s0.iter().filter(|&&u| pop.is_case(u)).count();
        let s0 = draw_initial(&InitialDesign::PoissonSizeBiased { m: 1_000, eta: 2.0 }, &pop, seed).unwrap();
        poisson_size += s0.len();
        poisson_cases += s0.iter().filter(|&&u| pop.is_case(u)).count();
    }
    let r = reps as f64;
    // SRS: 10 expected cases, sd ~3.1 per draw
    assert!((srs_cases as f64 / r - 10.0).abs() < 0.1);
    // Poisson: E|s0| = 1000 with sd ~31 per draw; cases 2·1000·1000/101000
    assert!((poisson_size as f64 / r - 1_000.0).abs() < 1.0);
    assert!((poisson_cases as f64 / r - 2e6 / 101_000.0).abs() < 0.15);
}

#[test]
fn dynamics_keep_size_and_case_total() {
    for setting in DynamicsSetting::presets() {
        let k = setting.initial.size;
        for seed in 0..100u64 {
            let base = build_equal_network_population(100_000, setting.initial_total(), k, seed).unwrap();
            let pop2 = evolve_population(&base, &setting, seed + 1_000).unwrap();
            assert_eq!(pop2.evolved.len(), 100_000);
            assert_eq!(pop2.base.case_total(), 1_000, "{}", setting.label);
            assert_eq!(pop2.evolved.case_total(), 1_000, "{} seed {seed}", setting.label);

            let plus = pop2.changes().iter().filter(|c| c.1 == 1).count();
            let minus = pop2.changes().iter().filter(|c| c.1 == -1).count();
            let grown = setting.growing.count * setting.growing.size.saturating_sub(k);
            assert_eq!(plus, grown + setting.emerging.total(), "{}", setting.label);
            let closed = pop2.base.case_units().iter().filter(|&&u| !pop2.evolved.is_case(u)).count();
            assert_eq!(minus, closed);
            assert_eq!(plus, minus, "{}: constant case total", setting.label);
            assert_eq!(pop2.true_change(), 0.0);
        }
    }
}

#[test]
fn random_sizes_respect_the_bound() {
    let setting = DynamicsSetting::preset("S3").unwrap();
    let base = build_equal_network_population(100_000, 1_000, 2, 5).unwrap();
    let pop2 = evolve_population(&base, &setting, 6).unwrap();
    assert!(pop2.evolved.networks().iter().all(|n| n.len() <= 2));
    // the 50 emerging pairs are complete
    assert!(pop2.evolved.networks().iter().filter(|n| n.len() == 2).count() >= 50);
}
