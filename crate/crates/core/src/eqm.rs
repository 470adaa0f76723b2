//! Equilibrium maintenance.
//!
//! Everything here is generic over a [`FreeRun`] system and a set of
//! [`Scheme`]s so the same code runs on the authored scenario world and on
//! bare integer graphs in tests and benches. Degrees combine with plain
//! numeric min and max.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;

use thiserror::Error;

use crate::model::{GroundActionScheme, WorldState};
use crate::select::{ChooseOrder, RankKeys};

/// The uncontrolled evolution of a system together with the desirability of
/// its states. `successors` must never be empty.
pub trait FreeRun {
    type State: Clone + Ord + Debug;

    fn successors(&self, s: &Self::State) -> Vec<Self::State>;
    fn des(&self, s: &Self::State) -> f64;
}

/// A robot capability: `None` outside its domain, otherwise the nonempty set
/// of possible outcomes.
pub trait Scheme<S> {
    fn name(&self) -> String;
    fn outcomes(&self, s: &S) -> Option<Vec<S>>;
}

impl Scheme<WorldState> for GroundActionScheme {
    fn name(&self) -> String {
        self.action().label()
    }

    fn outcomes(&self, s: &WorldState) -> Option<Vec<WorldState>> {
        GroundActionScheme::outcomes(self, s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EqmError {
    #[error("desirability of an empty state set")]
    EmptySet,
}

pub const MAX_TYPE: u8 = 6;

/// One evaluated ⟨α, s′, i, k, degree⟩ tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct Opportunity<S> {
    /// Index into the scheme list the opportunity was evaluated against.
    pub scheme: usize,
    pub name: String,
    pub type_index: u8,
    pub lookahead: usize,
    pub degree: f64,
    pub benefit: f64,
    pub acting_state: S,
}

impl<S> Opportunity<S> {
    pub fn keys(&self) -> RankKeys<'_> {
        RankKeys {
            degree: self.degree,
            type_index: self.type_index,
            benefit: self.benefit,
            lookahead: self.lookahead,
            name: &self.name,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport<S> {
    pub state: S,
    pub horizon: usize,
    pub equilibrium: f64,
    pub opportunities: Vec<Opportunity<S>>,
}

impl<S: Clone> EquilibriumReport<S> {
    pub fn max_degree(&self) -> f64 {
        self.opportunities.iter().map(|o| o.degree).fold(0.0, f64::max)
    }

    /// Every opportunity attaining the maximal degree; empty when the
    /// system is in equilibrium.
    pub fn argmax(&self) -> Vec<Opportunity<S>> {
        let best = self.max_degree();
        if best <= 0.0 {
            return Vec::new();
        }
        self.opportunities.iter().filter(|o| o.degree == best).cloned().collect()
    }
}

/// F^k(X).
pub fn free_run_set<F: FreeRun>(sys: &F, x: &BTreeSet<F::State>, k: usize) -> BTreeSet<F::State> {
    let mut cur = x.clone();
    for _ in 0..k {
        cur = cur.iter().flat_map(|s| sys.successors(s)).collect();
    }
    cur
}

/// F^k(s).
pub fn free_run<F: FreeRun>(sys: &F, s: &F::State, k: usize) -> BTreeSet<F::State> {
    free_run_set(sys, &BTreeSet::from([s.clone()]), k)
}

/// Des(X) as the minimum over members.
pub fn des_of<'a, F: FreeRun + 'a>(
    sys: &F,
    x: impl IntoIterator<Item = &'a F::State>,
) -> Result<f64, EqmError> {
    x.into_iter().map(|s| sys.des(s)).reduce(f64::min).ok_or(EqmError::EmptySet)
}

/// bnf(α, s, k) = Des(F^k(α({s}))), and 0 where α does not apply.
pub fn benefit<F: FreeRun, A: Scheme<F::State> + ?Sized>(sys: &F, scheme: &A, s: &F::State, k: usize) -> f64 {
    match scheme.outcomes(s) {
        None => 0.0,
        Some(out) => {
            let x: BTreeSet<F::State> = out.into_iter().collect();
            des_of(sys, &free_run_set(sys, &x, k)).unwrap_or(0.0)
        }
    }
}

/// Degree, benefit and acting state of one operator instance.
#[derive(Debug, Clone, PartialEq)]
pub struct OppValue<S> {
    pub degree: f64,
    pub benefit: f64,
    pub acting_state: S,
}

/// Opp_i(α, s, k). Type 0 ignores `k`.
pub fn opportunity<F: FreeRun, A: Scheme<F::State> + ?Sized>(
    sys: &F,
    i: u8,
    scheme: &A,
    s: &F::State,
    k: usize,
) -> OppValue<F::State> {
    let futures = if i == 0 { BTreeSet::new() } else { free_run(sys, s, k) };
    let bnf_k = if matches!(i, 5 | 6) { benefit(sys, scheme, s, k) } else { 0.0 };
    let mut b0 = |x: &F::State| benefit(sys, scheme, x, 0);
    operator(sys, i, s, &futures, &mut b0, bnf_k)
}

fn operator<F: FreeRun>(
    sys: &F,
    i: u8,
    s: &F::State,
    futures: &BTreeSet<F::State>,
    b0: &mut impl FnMut(&F::State) -> f64,
    bnf_k: f64,
) -> OppValue<F::State> {
    let here = |degree: f64, benefit: f64| OppValue {
        degree,
        benefit,
        acting_state: s.clone(),
    };
    let undes = 1.0 - sys.des(s);
    match i {
        0 => {
            let b = b0(s);
            here(undes.min(b), b)
        }
        1 | 2 => {
            let vals = futures.iter().map(&mut *b0);
            let b = if i == 1 {
                vals.fold(f64::NEG_INFINITY, f64::max)
            } else {
                vals.fold(f64::INFINITY, f64::min)
            };
            here(undes.min(b), b)
        }
        3 | 4 => {
            let mut best: Option<(f64, f64, &F::State)> = None;
            for x in futures {
                let b = b0(x);
                let v = (1.0 - sys.des(x)).min(b);
                let better = match best {
                    None => true,
                    Some((bv, _, _)) => {
                        if i == 3 {
                            v > bv
                        } else {
                            v < bv
                        }
                    }
                };
                if better {
                    best = Some((v, b, x));
                }
            }
            let (v, b, x) = best.expect("free-run sets are nonempty");
            OppValue {
                degree: v,
                benefit: b,
                acting_state: x.clone(),
            }
        }
        5 | 6 => {
            let vals = futures.iter().map(|x| 1.0 - sys.des(x));
            let u = if i == 5 {
                vals.fold(f64::NEG_INFINITY, f64::max)
            } else {
                vals.fold(f64::INFINITY, f64::min)
            };
            here(u.min(bnf_k), bnf_k)
        }
        _ => panic!("opportunity type {i} out of range 0..=6"),
    }
}

/// Evaluates the whole (k, i, α) grid at `s`: type 0 at k = 0, types 1 to 6
/// at every k in 1..=K.
pub fn equilibrium<F, A>(sys: &F, s: &F::State, horizon: usize, schemes: &[A]) -> EquilibriumReport<F::State>
where
    F: FreeRun,
    A: Scheme<F::State>,
{
    // F^k(s) for k = 0..=K
    let mut layers = vec![BTreeSet::from([s.clone()])];
    for _ in 0..horizon {
        let next = free_run_set(sys, layers.last().expect("nonempty"), 1);
        layers.push(next);
    }
    let names: Vec<String> = schemes.iter().map(Scheme::name).collect();
    // bnf(α, x, 0) per scheme and state, filled on demand
    let mut b0_cache: Vec<BTreeMap<F::State, f64>> = vec![BTreeMap::new(); schemes.len()];
    // bnf(α, s, k) for k = 0..=K
    let bnf_at_s: Vec<Vec<f64>> = schemes
        .iter()
        .map(|a| match a.outcomes(s) {
            None => vec![0.0; horizon + 1],
            Some(out) => {
                let mut x: BTreeSet<F::State> = out.into_iter().collect();
                let mut v = Vec::with_capacity(horizon + 1);
                for k in 0..=horizon {
                    if k > 0 {
                        x = free_run_set(sys, &x, 1);
                    }
                    v.push(des_of(sys, &x).unwrap_or(0.0));
                }
                v
            }
        })
        .collect();

    let mut opportunities = Vec::with_capacity(schemes.len() * (1 + 6 * horizon));
    let mut push = |a: usize, i: u8, k: usize, v: OppValue<F::State>| {
        opportunities.push(Opportunity {
            scheme: a,
            name: names[a].clone(),
            type_index: i,
            lookahead: k,
            degree: v.degree,
            benefit: v.benefit,
            acting_state: v.acting_state,
        })
    };
    for (a, scheme) in schemes.iter().enumerate() {
        let cache = &mut b0_cache[a];
        let mut b0 = |x: &F::State| {
            if let Some(&v) = cache.get(x) {
                return v;
            }
            let v = benefit(sys, scheme, x, 0);
            cache.insert(x.clone(), v);
            v
        };
        push(a, 0, 0, operator(sys, 0, s, &layers[0], &mut b0, 0.0));
        for (k, futures) in layers.iter().enumerate().skip(1) {
            for i in 1..=MAX_TYPE {
                let v = operator(sys, i, s, futures, &mut b0, bnf_at_s[a][k]);
                push(a, i, k, v);
            }
        }
    }
    // grid order: lookahead, then type, then scheme
    opportunities.sort_by_key(|o| (o.lookahead, o.type_index, o.scheme));

    let mut report = EquilibriumReport {
        state: s.clone(),
        horizon,
        equilibrium: 1.0,
        opportunities,
    };
    report.equilibrium = 1.0 - report.max_degree();
    report
}

/// Best element under `order`, then acting-state order and scheme index.
pub fn choose_eqm<'a, S: Ord>(opps: &'a [Opportunity<S>], order: &ChooseOrder) -> Option<&'a Opportunity<S>> {
    opps.iter().min_by(|a, b| {
        order
            .compare(&a.keys(), &b.keys())
            .then_with(|| a.acting_state.cmp(&b.acting_state))
            .then_with(|| a.scheme.cmp(&b.scheme))
    })
}

/// One pass of the equilibrium-maintenance loop: `None` when Eq(s, K) = 1.
pub fn eqm_step<F, A>(
    sys: &F,
    s: &F::State,
    horizon: usize,
    schemes: &[A],
    order: &ChooseOrder,
) -> Option<Opportunity<F::State>>
where
    F: FreeRun,
    A: Scheme<F::State>,
{
    let report = equilibrium(sys, s, horizon, schemes);
    choose_eqm(&report.argmax(), order).cloned()
}

/// Explicit integer graph. A state without successors loops on itself.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSystem {
    pub succ: Vec<Vec<usize>>,
    pub des: Vec<f64>,
}

impl FreeRun for GraphSystem {
    type State = usize;

    fn successors(&self, s: &usize) -> Vec<usize> {
        if self.succ[*s].is_empty() {
            vec![*s]
        } else {
            self.succ[*s].clone()
        }
    }

    fn des(&self, s: &usize) -> f64 {
        self.des[*s]
    }
}

/// Scheme given by an outcome table over integer states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableScheme {
    pub name: String,
    pub outcomes: Vec<Option<Vec<usize>>>,
}

impl Scheme<usize> for TableScheme {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn outcomes(&self, s: &usize) -> Option<Vec<usize>> {
        self.outcomes[*s].clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // 0 -> 1 -> {2, 3}; 2 and 3 are sinks
    fn chain() -> GraphSystem {
        GraphSystem {
            succ: vec![vec![1], vec![2, 3], vec![], vec![]],
            des: vec![1.0, 0.8, 0.0, 0.4],
        }
    }

    fn fix(name: &str, from: usize, to: usize) -> TableScheme {
        let mut outcomes = vec![None; 4];
        outcomes[from] = Some(vec![to]);
        TableScheme {
            name: name.into(),
            outcomes,
        }
    }

    #[test]
    fn free_run_layers() {
        let g = chain();
        assert_eq!(free_run(&g, &1, 0), BTreeSet::from([1]));
        assert_eq!(free_run(&g, &0, 2), BTreeSet::from([2, 3]));
        assert_eq!(free_run(&g, &2, 1), BTreeSet::from([2]));
    }

    #[test]
    fn des_of_sets() {
        let g = chain();
        assert_eq!(des_of(&g, &[2, 3]).unwrap(), 0.0);
        assert_eq!(des_of(&g, &[0]).unwrap(), 1.0);
        assert_eq!(des_of(&g, &[]), Err(EqmError::EmptySet));
    }

    #[test]
    fn benefit_zero_outside_domain() {
        let g = chain();
        let a = fix("a", 1, 0);
        assert_eq!(benefit(&g, &a, &0, 0), 0.0);
        assert_eq!(benefit(&g, &a, &1, 0), 1.0);
        assert_eq!(benefit(&g, &a, &1, 2), 0.0);
    }

    #[test]
    fn opp0_is_zero_in_desirable_state() {
        let g = chain();
        let a = TableScheme {
            name: "any".into(),
            outcomes: vec![Some(vec![0]); 4],
        };
        assert_eq!(opportunity(&g, 0, &a, &0, 0).degree, 0.0);
    }

    #[test]
    fn opp5_looks_ahead() {
        // acting now at 0 moves to a safe sink
        let mut g = chain();
        g.succ.push(vec![]);
        g.des.push(1.0);
        let mut a = fix("warn", 0, 4);
        a.outcomes.push(None);
        let v = opportunity(&g, 5, &a, &0, 2);
        assert_eq!(v.degree, 1.0);
        assert_eq!(v.acting_state, 0);
        assert_eq!(opportunity(&g, 6, &a, &0, 2).degree, 0.6);
    }

    #[test]
    fn opp3_acts_in_the_future() {
        let g = chain();
        let a = fix("fix3", 3, 0);
        let v = opportunity(&g, 3, &a, &1, 1);
        assert_eq!(v.acting_state, 3);
        assert!((v.degree - 0.6).abs() < 1e-15);
        assert_eq!(opportunity(&g, 4, &a, &1, 1).degree, 0.0);
    }

    #[test]
    fn equilibrium_without_schemes_is_one() {
        let g = chain();
        let r = equilibrium::<_, TableScheme>(&g, &1, 2, &[]);
        assert_eq!(r.equilibrium, 1.0);
        assert!(r.argmax().is_empty());
    }

    #[test]
    fn grid_size_and_step() {
        let g = chain();
        let schemes = [fix("fix3", 3, 0), fix("fix1", 1, 0)];
        let r = equilibrium(&g, &1, 2, &schemes);
        assert_eq!(r.opportunities.len(), 2 * (1 + 6 * 2));
        let best = eqm_step(&g, &1, 2, &schemes, &ChooseOrder::default()).unwrap();
        assert_eq!(best.degree, r.max_degree());
        assert!((r.equilibrium - (1.0 - best.degree)).abs() < 1e-15);
    }
}
