//! Horvitz-Thompson estimators of totals and of change in prevalence, with
//! their design variances.

use serde::{Deserialize, Serialize};

use crate::design::TraceSample;
use crate::error::{Error, Result};
use crate::inclusion::{from_usize, ExclusionCache, InclusionTable, InitialModel, Prob};
use crate::popgraph::{PopulationGraph, TwoWavePopulation, UnitId};
use crate::sets;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateKind {
    CrossSectional,
    Panel,
    #[serde(rename = "pacs")]
    PAcs,
    #[serde(rename = "iacs")]
    IAcs,
}

/// A point estimate with its design variance when that is cheap to attach.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub variance: Option<T>,
    pub kind: EstimateKind,
}

impl Estimate<f64> {
    pub fn se(&self) -> Option<f64> {
        self.variance.map(f64::sqrt)
    }
}

/// A unit set entering an estimator as one term, with its summed value.
#[derive(Debug, Clone, PartialEq)]
pub struct HtItem<T> {
    pub members: Vec<UnitId>,
    pub value: T,
}

impl<T> HtItem<T> {
    pub fn new(members: Vec<UnitId>, value: T) -> Self {
        Self { members, value }
    }
}

/// `Σ_a Σ_b (π_ab / (π_a π_b) - 1) v_a v_b` for an estimator
/// `Σ_{a sampled} v_a / π_a`, where item `a` is sampled when `s0` meets its
/// member set. Member sets may overlap.
pub fn ht_variance<T: Prob>(model: &InitialModel<T>, items: &[HtItem<T>]) -> Result<T> {
    let mut cache = ExclusionCache::new(model);
    let poisson = matches!(model, InitialModel::Poisson { .. });
    let fav: Vec<usize> = items.iter().map(|it| model.favoured_count(&it.members)).collect();
    let excl: Vec<T> = items
        .iter()
        .zip(&fav)
        .map(|(it, &f)| cache.get(f, it.members.len() - f))
        .collect();
    let pi: Vec<T> = excl.iter().map(|e| T::one() - e.clone()).collect();
    if let Some(pos) = pi.iter().position(|p| *p <= T::zero()) {
        return Err(Error::Design(format!(
            "a unit set of size {} can never be sampled",
            items[pos].members.len()
        )));
    }
    let mut total = T::zero();
    for a in 0..items.len() {
        if items[a].value == T::zero() {
            continue;
        }
        let diag = (T::one() / pi[a].clone() - T::one()) * items[a].value.clone() * items[a].value.clone();
        total = total + diag;
        let mut cross = T::zero();
        for b in a + 1..items.len() {
            if items[b].value == T::zero() {
                continue;
            }
            let common = sets::intersection(&items[a].members, &items[b].members);
            if poisson && common.is_empty() {
                continue;
            }
            let fc = model.favoured_count(&common);
            let f = fav[a] + fav[b] - fc;
            let size = items[a].members.len() + items[b].members.len() - common.len();
            let joint = T::one() - excl[a].clone() - excl[b].clone() + cache.get(f, size - f);
            let term = joint / (pi[a].clone() * pi[b].clone()) - T::one();
            cross = cross + term * items[b].value.clone();
        }
        total = total + from_usize::<T>(2) * cross * items[a].value.clone();
    }
    Ok(total)
}

/// `θ̂ = Σ_κ y_κ / π_(κ)` over the case networks observed in `sample`.
pub fn ht_acs_total<T: Prob>(
    sample: &TraceSample,
    pop: &PopulationGraph,
    incl: &InclusionTable<T>,
) -> Result<Estimate<T>> {
    let mut value = T::zero();
    for observed in sample.observed_networks(pop) {
        if !observed.complete {
            return Err(Error::Design(format!(
                "network {} is only partly observed; the estimator needs network-exhaustive tracing",
                observed.id
            )));
        }
        let pi = incl.network(observed.id).clone();
        if pi <= T::zero() {
            return Err(Error::Design(format!("network {} has zero inclusion probability", observed.id)));
        }
        value = value + from_usize::<T>(pop.network(observed.id).y_total as usize) / pi;
    }
    Ok(Estimate {
        value,
        variance: None,
        kind: EstimateKind::CrossSectional,
    })
}

/// `Σ_{i ∈ s0} y_i / π_i`, with its design variance.
pub fn ht_initial_total<T: Prob>(
    s0: &[UnitId],
    pop: &PopulationGraph,
    model: &InitialModel<T>,
) -> Result<Estimate<T>> {
    let mut value = T::zero();
    for &i in sets::intersection(s0, pop.case_units()).iter() {
        value = value + from_usize::<T>(pop.y(i) as usize) / model.unit_inclusion(i);
    }
    Ok(Estimate {
        value,
        variance: Some(initial_variance_analytic(pop, model)?),
        kind: EstimateKind::CrossSectional,
    })
}

/// Design variance of [`ht_initial_total`].
pub fn initial_variance_analytic<T: Prob>(pop: &PopulationGraph, model: &InitialModel<T>) -> Result<T> {
    let ys = pop.case_units().iter().map(|&i| (i, from_usize::<T>(pop.y(i) as usize)));
    unit_variance(model, ys)
}

/// HT variance of a unit-level estimator, in closed form.
fn unit_variance<T: Prob>(model: &InitialModel<T>, values: impl Iterator<Item = (UnitId, T)>) -> Result<T> {
    match model {
        InitialModel::Srs { n, m } => {
            // N² (1 - f) S² / m
            let (mut sum, mut sum_sq) = (T::zero(), T::zero());
            for (_, v) in values {
                sum = sum + v.clone();
                sum_sq = sum_sq + v.clone() * v;
            }
            if *m == 0 {
                return Err(Error::Design("an empty initial sample cannot estimate a total".into()));
            }
            if *n < 2 {
                return Ok(T::zero());
            }
            let (nn, mm) = (from_usize::<T>(*n), from_usize::<T>(*m));
            let s2 = (sum_sq - sum.clone() * sum / nn.clone()) / (nn.clone() - T::one());
            Ok(nn.clone() * nn.clone() * (T::one() - mm.clone() / nn) * s2 / mm)
        }
        InitialModel::Poisson { .. } => {
            let mut total = T::zero();
            for (i, v) in values {
                let p = model.unit_inclusion(i);
                if p <= T::zero() {
                    return Err(Error::Design(format!("unit {i} can never be sampled")));
                }
                total = total + v.clone() * v * (T::one() - p.clone()) / p;
            }
            Ok(total)
        }
    }
}

/// Exact design variance of [`ht_acs_total`] over every population network.
pub fn acs_variance_analytic<T: Prob>(pop: &PopulationGraph, model: &InitialModel<T>) -> Result<T> {
    let items: Vec<HtItem<T>> = pop
        .networks()
        .iter()
        .map(|net| HtItem::new(net.members.clone(), from_usize::<T>(net.y_total as usize)))
        .collect();
    ht_variance(model, &items)
}

/// `∇̂ = (1/N) Σ_{i ∈ s0} d_i / π_i` on a fixed panel, with its variance.
pub fn panel_change<T: Prob>(
    s0: &[UnitId],
    pop2: &TwoWavePopulation,
    model: &InitialModel<T>,
) -> Result<Estimate<T>> {
    let n = from_usize::<T>(pop2.len());
    let mut value = T::zero();
    for &(i, d) in pop2.changes() {
        if sets::contains(s0, &i) {
            value = value + signed::<T>(d) / model.unit_inclusion(i);
        }
    }
    Ok(Estimate {
        value: value / n,
        variance: Some(panel_variance_analytic(pop2, model)?),
        kind: EstimateKind::Panel,
    })
}

pub fn panel_variance_analytic<T: Prob>(pop2: &TwoWavePopulation, model: &InitialModel<T>) -> Result<T> {
    let n = from_usize::<T>(pop2.len());
    let v = unit_variance(model, pop2.changes().iter().map(|&(i, d)| (i, signed::<T>(d))))?;
    Ok(v / (n.clone() * n))
}

/// Large-population approximation `(λ+ + λ-) / m` of the panel variance.
pub fn panel_variance_approx(pop2: &TwoWavePopulation, m: usize) -> f64 {
    (pop2.lambda_plus() + pop2.lambda_minus()) / m as f64
}

fn signed<T: Prob>(d: i8) -> T {
    T::from_i64(d as i64).expect("small integer")
}

/// Difference of the ACS estimates at the two time points, both traced from
/// the same `s0`. `incl_t1` must use the initial model of time `t`.
pub fn pacs_change<T: Prob>(
    s_t: &TraceSample,
    s_t1: &TraceSample,
    pop2: &TwoWavePopulation,
    incl_t: &InclusionTable<T>,
    incl_t1: &InclusionTable<T>,
) -> Result<Estimate<T>> {
    if s_t.s0 != s_t1.s0 {
        return Err(Error::Design("both time points must be traced from the same initial sample".into()));
    }
    let before = ht_acs_total(s_t, &pop2.base, incl_t)?.value;
    let after = ht_acs_total(s_t1, &pop2.evolved, incl_t1)?.value;
    Ok(Estimate {
        value: (after - before) / from_usize::<T>(pop2.len()),
        variance: None,
        kind: EstimateKind::PAcs,
    })
}

/// Exact design variance of [`pacs_change`], including the cross-time
/// covariance of the two network-level estimators.
pub fn pacs_variance_analytic<T: Prob>(pop2: &TwoWavePopulation, model: &InitialModel<T>) -> Result<T> {
    let n = from_usize::<T>(pop2.len());
    let mut items: Vec<HtItem<T>> = Vec::new();
    for net in pop2.base.networks() {
        let v = T::zero() - from_usize::<T>(net.y_total as usize) / n.clone();
        items.push(HtItem::new(net.members.clone(), v));
    }
    for net in pop2.evolved.networks() {
        let v = from_usize::<T>(net.y_total as usize) / n.clone();
        items.push(HtItem::new(net.members.clone(), v));
    }
    ht_variance(model, &items)
}

/// Second-wave case values observed for the units of `s_t`.
pub fn observe_next(s_t: &TraceSample, pop2: &TwoWavePopulation) -> Vec<Option<u32>> {
    s_t.final_sample.iter().map(|&i| Some(pop2.evolved.y(i))).collect()
}

/// Change estimator for iterated tracing, a HT estimator over the sample at
/// time `t` with unit values `(y_{i,t+1} - y_{i,t}) / N`.
///
/// Cases at `t` carry their network inclusion probability. Noncases at `t`
/// enter only through `s0`, where their inclusion probability is the initial
/// one. `y_next[p]` is `y_{t+1}` of `s_t.final_sample[p]`.
pub fn iacs_change<T: Prob>(
    s_t: &TraceSample,
    y_next: &[Option<u32>],
    pop2: &TwoWavePopulation,
    incl: &InclusionTable<T>,
) -> Result<Estimate<T>> {
    if y_next.len() != s_t.final_sample.len() {
        return Err(Error::Input(format!(
            "{} second-wave values for {} sampled units",
            y_next.len(),
            s_t.final_sample.len()
        )));
    }
    let base = &pop2.base;
    let mut value = T::zero();
    for (&i, y1) in s_t.final_sample.iter().zip(y_next) {
        let y1 = y1.ok_or_else(|| Error::Input(format!("no second-wave value for unit {i}")))?;
        match base.network_of(i) {
            Some(id) => {
                let pi = incl.network(id).clone();
                if pi <= T::zero() {
                    return Err(Error::Design(format!("network {id} has zero inclusion probability")));
                }
                let d = T::from_i64(y1 as i64 - base.y(i) as i64).expect("small integer");
                value = value + d / pi;
            }
            None if y1 > 0 && sets::contains(&s_t.s0, &i) => {
                value = value + from_usize::<T>(y1 as usize) / incl.unit_initial(i);
            }
            None => {}
        }
    }
    Ok(Estimate {
        value: value / from_usize::<T>(pop2.len()),
        variance: None,
        kind: EstimateKind::IAcs,
    })
}

/// Exact design variance of [`iacs_change`].
pub fn iacs_variance_analytic<T: Prob>(pop2: &TwoWavePopulation, model: &InitialModel<T>) -> Result<T> {
    let n = from_usize::<T>(pop2.len());
    let (base, evolved) = (&pop2.base, &pop2.evolved);
    let mut items: Vec<HtItem<T>> = Vec::new();
    for net in base.networks() {
        let mut v = T::zero();
        for &i in &net.members {
            v = v + T::from_i64(evolved.y(i) as i64 - base.y(i) as i64).expect("small integer");
        }
        items.push(HtItem::new(net.members.clone(), v / n.clone()));
    }
    for &(i, d) in pop2.changes() {
        if d > 0 && !base.is_case(i) {
            items.push(HtItem::new(vec![i], from_usize::<T>(evolved.y(i) as usize) / n.clone()));
        }
    }
    ht_variance(model, &items)
}
