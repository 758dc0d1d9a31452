//! Exhaustive enumeration checks on small populations.
//!
//! Every possible initial sample is listed with its exact probability, and
//! the resulting moments of every estimator and the frequencies of every
//! inclusion event are compared with the closed forms in exact rational
//! arithmetic.

use itertools::Itertools;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::design::{trace, TracingDesign};
use crate::estimate::{
    acs_variance_analytic, ht_acs_total, ht_initial_total, iacs_change, iacs_variance_analytic,
    initial_variance_analytic, observe_next, pacs_change, pacs_variance_analytic, panel_change,
    panel_variance_analytic,
};
use crate::inclusion::{iacs_joint_inclusion, network_joint_inclusion, InclusionTable, InitialModel};
use crate::popgraph::{Mode, PopulationGraph, TwoWavePopulation, UnitId};
use crate::sets;

type Q = BigRational;

fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

fn qu(n: usize) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Every initial sample of `model` with its probability.
pub fn enumerate_samples(model: &InitialModel<Q>) -> Vec<(Vec<UnitId>, Q)> {
    match model {
        InitialModel::Srs { n, m } => {
            let all: Vec<Vec<UnitId>> = (0..*n as UnitId).combinations(*m).collect();
            let p = Q::one() / qu(all.len());
            all.into_iter().map(|s| (s, p.clone())).collect()
        }
        InitialModel::Poisson { n, .. } => (0u32..1 << n)
            .map(|mask| {
                let s: Vec<UnitId> = (0..*n as UnitId).filter(|i| mask >> i & 1 == 1).collect();
                let mut p = Q::one();
                for i in 0..*n as UnitId {
                    let pi = model.unit_inclusion(i);
                    p *= if mask >> i & 1 == 1 { pi } else { Q::one() - pi };
                }
                (s, p)
            })
            .collect(),
    }
}

/// A random two-time-point population on `n` units: random case sets and
/// random contact graphs at each time.
pub fn random_toy(n: usize, rng: &mut impl Rng) -> TwoWavePopulation {
    let wave = |rng: &mut dyn rand::RngCore| {
        let cases: Vec<UnitId> = (0..n as UnitId).filter(|_| rng.random_bool(0.4)).collect();
        let mut edges = Vec::new();
        for i in 0..n as UnitId {
            for j in i + 1..n as UnitId {
                if rng.random_bool(0.22) {
                    edges.push((i, j));
                }
            }
        }
        PopulationGraph::from_parts(Mode::Person, n, None, &cases, &edges).expect("valid toy")
    };
    let base = wave(rng);
    let evolved = wave(rng);
    TwoWavePopulation::new(base, evolved).expect("same unit set")
}

/// Outcome of checking one population under one initial model.
#[derive(Debug, Clone, Default)]
pub struct OracleReport {
    pub populations: usize,
    pub checks: usize,
    pub failures: Vec<String>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn merge(&mut self, other: OracleReport) {
        self.populations += other.populations;
        self.checks += other.checks;
        self.failures.extend(other.failures);
    }
}

struct Moments {
    mean: Q,
    second: Q,
}

impl Moments {
    fn new() -> Self {
        Self {
            mean: Q::zero(),
            second: Q::zero(),
        }
    }

    fn add(&mut self, p: &Q, x: &Q) {
        self.mean += p * x;
        self.second += p * x * x;
    }

    fn variance(&self) -> Q {
        &self.second - &self.mean * &self.mean
    }
}

/// Checks every estimator and inclusion probability on `pop2` under `model`.
pub fn check_population(pop2: &TwoWavePopulation, model: &InitialModel<Q>) -> OracleReport {
    let mut report = OracleReport {
        populations: 1,
        ..Default::default()
    };
    let (base, evolved) = (&pop2.base, &pop2.evolved);
    let n = base.len();
    let incl_t = InclusionTable::new(model.clone(), base);
    let incl_t1 = InclusionTable::new(model.clone(), evolved);
    let acs = TracingDesign::acs();

    let (mut m_acs, mut m_init, mut m_panel, mut m_pacs, mut m_iacs) =
        (Moments::new(), Moments::new(), Moments::new(), Moments::new(), Moments::new());
    let nets_t = base.networks().len();
    let nets_t1 = evolved.networks().len();
    let mut hit_t = vec![Q::zero(); nets_t];
    let mut hit_pair = vec![vec![Q::zero(); nets_t]; nets_t];
    let mut hit_cross = vec![vec![Q::zero(); nets_t1]; nets_t];
    let mut hit_units = vec![vec![Q::zero(); n]; n];
    let mut total_p = Q::zero();

    for (s0, p) in enumerate_samples(model) {
        total_p += &p;
        let st = trace(base, &s0, &acs);
        let st1 = trace(evolved, &s0, &acs);
        let run = || -> crate::Result<[Q; 5]> {
            Ok([
                ht_acs_total(&st, base, &incl_t)?.value,
                ht_initial_total(&s0, base, model)?.value,
                panel_change(&s0, pop2, model)?.value,
                pacs_change(&st, &st1, pop2, &incl_t, &incl_t1)?.value,
                iacs_change(&st, &observe_next(&st, pop2), pop2, &incl_t)?.value,
            ])
        };
        let values = match run() {
            Ok(v) => v,
            Err(e) => {
                report.check(false, || format!("estimator failed on s0 = {s0:?}: {e}"));
                return report;
            }
        };
        for (mom, v) in [&mut m_acs, &mut m_init, &mut m_panel, &mut m_pacs, &mut m_iacs]
            .into_iter()
            .zip(&values)
        {
            mom.add(&p, v);
        }

        let sampled_t: Vec<usize> = st.observed_networks(base).iter().map(|o| o.id).collect();
        let sampled_t1: Vec<usize> = st1.observed_networks(evolved).iter().map(|o| o.id).collect();
        for &a in &sampled_t {
            hit_t[a] += &p;
            for &b in &sampled_t {
                hit_pair[a][b] += &p;
            }
            for &b in &sampled_t1 {
                hit_cross[a][b] += &p;
            }
        }
        // estimation sample at t: sampled cases plus noncases of s0
        let est: Vec<UnitId> = sets::union(&sets::intersection(&st.final_sample, base.case_units()), &s0);
        for &i in &est {
            for &j in &est {
                hit_units[i as usize][j as usize] += &p;
            }
        }
    }
    report.check(total_p.is_one(), || format!("sample probabilities sum to {total_p}"));

    let theta = qu(base.case_total() as usize);
    let change = (qu(evolved.case_total() as usize) - qu(base.case_total() as usize)) / qu(n);
    let expect = |report: &mut OracleReport, name: &str, got: &Q, want: &Q| {
        report.check(got == want, || format!("{name}: enumeration {got} vs closed form {want}"));
    };
    expect(&mut report, "E[acs total]", &m_acs.mean, &theta);
    expect(&mut report, "E[initial total]", &m_init.mean, &theta);
    expect(&mut report, "E[panel change]", &m_panel.mean, &change);
    expect(&mut report, "E[pacs change]", &m_pacs.mean, &change);
    expect(&mut report, "E[iacs change]", &m_iacs.mean, &change);

    let analytic = [
        ("V[acs total]", &m_acs, acs_variance_analytic(base, model)),
        ("V[initial total]", &m_init, initial_variance_analytic(base, model)),
        ("V[panel change]", &m_panel, panel_variance_analytic(pop2, model)),
        ("V[pacs change]", &m_pacs, pacs_variance_analytic(pop2, model)),
        ("V[iacs change]", &m_iacs, iacs_variance_analytic(pop2, model)),
    ];
    for (name, mom, closed) in analytic {
        match closed {
            Ok(v) => expect(&mut report, name, &mom.variance(), &v),
            Err(e) => report.check(false, || format!("{name}: {e}")),
        }
    }

    for a in 0..nets_t {
        expect(&mut report, "network inclusion", &hit_t[a], incl_t.network(a));
        for b in 0..nets_t {
            expect(&mut report, "network joint inclusion", &hit_pair[a][b], &incl_t.network_pair(base, a, b));
        }
        for b in 0..nets_t1 {
            let closed = network_joint_inclusion(model, &base.network(a).members, &evolved.network(b).members);
            expect(&mut report, "cross-time joint inclusion", &hit_cross[a][b], &closed);
        }
    }
    for i in 0..n as UnitId {
        for j in 0..n as UnitId {
            let got = &hit_units[i as usize][j as usize];
            if i == j {
                let closed = crate::inclusion::unit_sample_inclusion(model, base, i);
                expect(&mut report, "unit inclusion", got, &closed);
            } else {
                match iacs_joint_inclusion(model, base, i, j) {
                    Ok(closed) => expect(&mut report, "piecewise joint inclusion", got, &closed),
                    Err(e) => report.check(false, || format!("piecewise joint inclusion: {e}")),
                }
            }
        }
    }
    report
}

/// Runs `count` random toys: SRS with `m ≤ 4` on even-numbered toys and
/// size-biased Poisson (`η = 2`) on odd ones.
pub fn run_suite(count: usize, seed: u64) -> OracleReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = OracleReport::default();
    for toy in 0..count {
        let n = rng.random_range(6..=12);
        let pop2 = random_toy(n, &mut rng);
        let model = if toy % 2 == 0 {
            InitialModel::Srs {
                n,
                m: rng.random_range(1..=4),
            }
        } else {
            let theta = pop2.base.case_units().len() as i64;
            // keeps p_case = 2 m / (N + θ) at most 1
            let m = (rng.random_range(1..=4) as i64).min((n as i64 + theta) / 2);
            let p_non = q(m, n as i64 + theta);
            InitialModel::Poisson {
                n,
                p_case: &p_non * qu(2),
                p_non,
                favoured: pop2.base.case_units().to_vec(),
            }
        };
        let mut one = check_population(&pop2, &model);
        for f in &mut one.failures {
            *f = format!("toy {toy} (N = {n}, {model:?}): {f}");
        }
        report.merge(one);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn srs_enumeration_counts() {
        let samples = enumerate_samples(&InitialModel::Srs { n: 6, m: 2 });
        assert_eq!(samples.len(), 15);
        assert!(samples.iter().all(|(s, p)| s.len() == 2 && *p == q(1, 15)));
    }

    #[test]
    fn figure_one_population() {
        let base = crate::fixtures::figure_one();
        let evolved =
            PopulationGraph::from_parts(Mode::Person, 9, None, &[1, 2, 3, 8], &[(1, 2), (2, 3), (8, 0)]).unwrap();
        let pop2 = TwoWavePopulation::new(base, evolved).unwrap();
        let report = check_population(&pop2, &InitialModel::Srs { n: 9, m: 3 });
        assert!(report.passed(), "{:#?}", report.failures);
    }

    #[test]
    fn small_suite() {
        let report = run_suite(6, 1);
        assert_eq!(report.populations, 6);
        assert!(report.passed(), "{:#?}", report.failures);
    }
}
