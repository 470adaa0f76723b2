//! Late integration of the two proactivity sources: the recognized
//! intention becomes a type-0 opportunity, the equilibrium argmax set is
//! added, and one opportunity is chosen under a single total order.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::eqm::{equilibrium, FreeRun, Opportunity};
use crate::hir::{next_robot_step, Intention, Recognizer, Substitution};
use crate::model::{apply, AtomSet, GroundAction, GroundActionScheme, WorldState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderKey {
    /// Higher degree first.
    Degree,
    /// Lower type index first.
    Type,
    /// Higher benefit first.
    Benefit,
    /// Shorter look-ahead first.
    Lookahead,
    /// Smaller action label first.
    Name,
}

impl OrderKey {
    pub const DEFAULT: [OrderKey; 5] = [
        OrderKey::Degree,
        OrderKey::Type,
        OrderKey::Benefit,
        OrderKey::Lookahead,
        OrderKey::Name,
    ];
}

/// The values an opportunity is ranked by.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankKeys<'a> {
    pub degree: f64,
    pub type_index: u8,
    pub benefit: f64,
    pub lookahead: usize,
    pub name: &'a str,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChooseOrder {
    keys: Vec<OrderKey>,
}

impl Default for ChooseOrder {
    fn default() -> Self {
        ChooseOrder {
            keys: OrderKey::DEFAULT.to_vec(),
        }
    }
}

impl ChooseOrder {
    /// Keys missing from `keys` are appended in default order so the order
    /// stays total.
    pub fn new(keys: &[OrderKey]) -> Self {
        let mut out: Vec<OrderKey> = Vec::with_capacity(OrderKey::DEFAULT.len());
        for k in keys.iter().chain(OrderKey::DEFAULT.iter()) {
            if !out.contains(k) {
                out.push(*k);
            }
        }
        ChooseOrder { keys: out }
    }

    pub fn keys(&self) -> &[OrderKey] {
        &self.keys
    }

    /// `Less` means `a` is preferred.
    pub fn compare(&self, a: &RankKeys<'_>, b: &RankKeys<'_>) -> Ordering {
        for key in &self.keys {
            let ord = match key {
                OrderKey::Degree => b.degree.total_cmp(&a.degree),
                OrderKey::Type => a.type_index.cmp(&b.type_index),
                OrderKey::Benefit => b.benefit.total_cmp(&a.benefit),
                OrderKey::Lookahead => a.lookahead.cmp(&b.lookahead),
                OrderKey::Name => a.name.cmp(b.name),
            };
            if ord != Ordering::Equal {
                return ord;
            }
        }
        Ordering::Equal
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("scaling factors out of range: decrease must be in [0, 1), increase in (0, 1]")]
pub struct ScalingError;

/// Temporary desirability shift applied when turning an intention into an
/// opportunity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingConfig {
    decrease: f64,
    increase: f64,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        ScalingConfig {
            decrease: 0.5,
            increase: 0.5,
        }
    }
}

impl ScalingConfig {
    pub fn new(decrease: f64, increase: f64) -> Result<Self, ScalingError> {
        if (0.0..1.0).contains(&decrease) && increase > 0.0 && increase <= 1.0 {
            Ok(ScalingConfig { decrease, increase })
        } else {
            Err(ScalingError)
        }
    }

    pub fn decrease_factor(&self) -> f64 {
        self.decrease
    }

    pub fn increase_factor(&self) -> f64 {
        self.increase
    }

    /// des′ of the current state.
    pub fn lowered(&self, des: f64) -> f64 {
        self.decrease * des
    }

    /// des′ of an outcome state.
    pub fn raised(&self, des: f64) -> f64 {
        des + self.increase * (1.0 - des)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Hir,
    Eqm,
}

/// An opportunity tagged with its source and the ground action to dispatch.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub source: Source,
    pub opportunity: Opportunity<WorldState>,
    pub action: GroundAction,
    pub message: Option<String>,
}

impl Candidate {
    /// Whether the robot would act in a state other than `current`.
    pub fn deferred_from(&self, current: &WorldState) -> bool {
        self.opportunity.acting_state != *current
    }
}

/// Total order: the configured keys, then HIR before EqM, then acting state
/// and scheme index.
pub fn compare(order: &ChooseOrder, a: &Candidate, b: &Candidate) -> Ordering {
    order
        .compare(&a.opportunity.keys(), &b.opportunity.keys())
        .then_with(|| a.source.cmp(&b.source))
        .then_with(|| a.opportunity.acting_state.cmp(&b.opportunity.acting_state))
        .then_with(|| a.opportunity.scheme.cmp(&b.opportunity.scheme))
}

/// Sorts best first.
pub fn rank(cands: &mut [Candidate], order: &ChooseOrder) {
    cands.sort_by(|a, b| compare(order, a, b));
}

/// Index of the best candidate.
pub fn choose(cands: &[Candidate], order: &ChooseOrder) -> Option<usize> {
    (0..cands.len()).min_by(|&a, &b| compare(order, &cands[a], &cands[b]))
}

/// What recognition needs besides the observed state.
#[derive(Debug, Clone, Copy)]
pub struct HirContext<'a> {
    pub recognizer: &'a Recognizer,
    pub substitutions: &'a [Substitution],
    pub actions: &'a [GroundAction],
}

#[derive(Debug, Clone, PartialEq)]
pub struct HirOutcome {
    pub intention: Option<Intention>,
    pub candidate: Option<Candidate>,
    pub note: Option<String>,
}

/// The intention's next robot step as a type-0 opportunity, scored against
/// a locally shifted desirability: the current state is made less desirable
/// and the step's outcomes more desirable. `world` is only read.
pub fn hir_opp<W>(s: &WorldState, ctx: &HirContext<'_>, world: &W, scaling: &ScalingConfig) -> HirOutcome
where
    W: FreeRun<State = WorldState>,
{
    let Some(intention) = ctx.recognizer.recognize(s) else {
        return HirOutcome {
            intention: None,
            candidate: None,
            note: None,
        };
    };
    let step = match next_robot_step(&intention, ctx.substitutions, ctx.actions) {
        Ok(step) => step,
        Err(e) => {
            return HirOutcome {
                intention: Some(intention),
                candidate: None,
                note: Some(e.to_string()),
            }
        }
    };
    let outcomes = match apply(s, &step.action) {
        Ok(o) => o,
        Err(e) => {
            return HirOutcome {
                intention: Some(intention),
                candidate: None,
                note: Some(e.to_string()),
            }
        }
    };
    let des_now = scaling.lowered(world.des(s));
    let bnf = outcomes
        .iter()
        .map(|t| scaling.raised(world.des(t)))
        .fold(f64::INFINITY, f64::min);
    let candidate = Candidate {
        source: Source::Hir,
        opportunity: Opportunity {
            scheme: usize::MAX,
            name: step.action.label(),
            type_index: 0,
            lookahead: 0,
            degree: (1.0 - des_now).min(bnf),
            benefit: bnf,
            acting_state: s.clone(),
        },
        action: step.action,
        message: step.message,
    };
    HirOutcome {
        intention: Some(intention),
        candidate: Some(candidate),
        note: None,
    }
}

/// The equilibrium argmax set at `s` as candidates.
pub fn eqm_candidates<W>(s: &WorldState, world: &W, horizon: usize, schemes: &[GroundActionScheme]) -> Vec<Candidate>
where
    W: FreeRun<State = WorldState>,
{
    equilibrium(world, s, horizon, schemes)
        .argmax()
        .into_iter()
        .map(|o| Candidate {
            source: Source::Eqm,
            action: schemes[o.scheme].action().clone(),
            message: None,
            opportunity: o,
        })
        .collect()
}

/// Which sources take part in a decision.
#[derive(Debug, Clone, Copy)]
pub struct Sources<'a> {
    pub hir: Option<HirContext<'a>>,
    pub eqm: Option<&'a [GroundActionScheme]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Collected {
    pub intention: Option<Intention>,
    pub candidates: Vec<Candidate>,
    pub note: Option<String>,
}

pub fn collect<W>(s: &WorldState, world: &W, horizon: usize, sources: &Sources<'_>, scaling: &ScalingConfig) -> Collected
where
    W: FreeRun<State = WorldState>,
{
    let mut out = Collected {
        intention: None,
        candidates: Vec::new(),
        note: None,
    };
    if let Some(ctx) = &sources.hir {
        let h = hir_opp(s, ctx, world, scaling);
        out.intention = h.intention;
        out.note = h.note;
        out.candidates.extend(h.candidate);
    }
    if let Some(schemes) = sources.eqm {
        out.candidates.extend(eqm_candidates(s, world, horizon, schemes));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub intention: Option<Intention>,
    /// Ranked best first.
    pub candidates: Vec<Candidate>,
    /// Set when the best candidate acts in the current state.
    pub dispatch: Option<usize>,
    pub deferred: bool,
    pub note: Option<String>,
}

impl Decision {
    pub fn chosen(&self) -> Option<&Candidate> {
        self.candidates.first()
    }
}

/// collect, choose, and decide whether the choice can be enacted now.
pub fn decide<W>(s: &WorldState, world: &W, horizon: usize, sources: &Sources<'_>, scaling: &ScalingConfig, order: &ChooseOrder) -> Decision
where
    W: FreeRun<State = WorldState>,
{
    let Collected {
        intention,
        mut candidates,
        note,
    } = collect(s, world, horizon, sources, scaling);
    rank(&mut candidates, order);
    let deferred = candidates.first().is_some_and(|c| c.deferred_from(s));
    let dispatch = (!candidates.is_empty() && !deferred).then_some(0);
    Decision {
        intention,
        candidates,
        dispatch,
        deferred,
        note,
    }
}

/// Runs a decision only when the observed state differs from the last one
/// evaluated.
#[derive(Debug, Clone, Default)]
pub struct Selector {
    last: Option<AtomSet>,
}

impl Selector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Forget the last evaluated state.
    pub fn reset(&mut self) {
        self.last = None;
    }

    pub fn changed(&self, s: &WorldState) -> bool {
        self.last.as_ref() != Some(&s.atoms)
    }

    /// Record `s` as evaluated.
    pub fn observe(&mut self, s: &WorldState) {
        self.last = Some(s.atoms.clone());
    }

    pub fn step<W>(
        &mut self,
        s: &WorldState,
        world: &W,
        horizon: usize,
        sources: &Sources<'_>,
        scaling: &ScalingConfig,
        order: &ChooseOrder,
    ) -> Option<Decision>
    where
        W: FreeRun<State = WorldState>,
    {
        if !self.changed(s) {
            return None;
        }
        self.last = Some(s.atoms.clone());
        Some(decide(s, world, horizon, sources, scaling, order))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn keys(degree: f64, type_index: u8, benefit: f64, lookahead: usize, name: &str) -> RankKeys<'_> {
        RankKeys {
            degree,
            type_index,
            benefit,
            lookahead,
            name,
        }
    }

    #[test]
    fn default_order() {
        let o = ChooseOrder::default();
        let less = Ordering::Less;
        assert_eq!(o.compare(&keys(0.7, 0, 0.8, 0, "z"), &keys(0.4, 0, 0.8, 0, "a")), less);
        assert_eq!(o.compare(&keys(0.4, 0, 0.1, 0, "z"), &keys(0.4, 3, 0.8, 0, "a")), less);
        assert_eq!(o.compare(&keys(0.4, 0, 0.8, 0, "z"), &keys(0.4, 0, 0.6, 0, "a")), less);
        assert_eq!(o.compare(&keys(1.0, 5, 1.0, 1, "z"), &keys(1.0, 5, 1.0, 2, "a")), less);
        assert_eq!(o.compare(&keys(1.0, 5, 1.0, 1, "a"), &keys(1.0, 5, 1.0, 1, "b")), less);
    }

    #[test]
    fn partial_orders_are_completed() {
        let o = ChooseOrder::new(&[OrderKey::Name]);
        assert_eq!(o.keys().len(), 5);
        assert_eq!(o.keys()[0], OrderKey::Name);
        assert_eq!(o.keys()[1], OrderKey::Degree);
    }

    #[test]
    fn scaling_moves_in_stated_directions() {
        let s = ScalingConfig::default();
        assert_eq!(s.lowered(0.6), 0.3);
        assert_eq!(s.raised(0.6), 0.8);
        assert!(ScalingConfig::new(1.0, 0.5).is_err());
        assert!(ScalingConfig::new(0.5, 0.0).is_err());
        assert!(ScalingConfig::new(0.0, 1.0).is_ok());
    }
}
