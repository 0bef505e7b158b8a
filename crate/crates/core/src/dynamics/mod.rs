//! Periodic structure, the pointwise-recurrence decision procedure, and
//! orbit-level property checks.

mod checks;
mod decide;


use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{precondition, Result};
use crate::pl_map::{iterate, PlMap};
use crate::scalar::Scalar;
use crate::subtree::Subtree;
use crate::tree::{OrdPoint, TreePoint, VertexId};

pub use checks::{
    check_escape, check_imposs, check_no_preperiodic, check_property_a, forward_component, omega_limit_estimate,
    returns_to_components, EscapeReport, EscapeViolation, ImpossReport, ImpossViolation, NoPreperiodicReport,
    OmegaLimit, PreperiodicWitness, PropertyAReport, PropertyAViolation, ReturnOutcome,
};
pub use decide::{
    classify_recurrence, decide_pointwise_recurrent, escape_certificate, RecurrenceClass, RecurrenceVerdict,
    Witness, WitnessReason, IDENTITY_POWER_CAP,
};

/// `F_n = {x : f^n(x) = x}`.
pub fn fixed_set<S: Scalar>(f: &PlMap<S>, n: u64, piece_cap: usize) -> Result<Subtree<S>> {
    if n == 0 {
        return Err(precondition("fixed_set needs n ≥ 1"));
    }
    Ok(iterate(f, n, piece_cap)?.fixed_points())
}

/// `D_n = F_1 ∪ … ∪ F_n`.
pub fn periodic_union<S: Scalar>(f: &PlMap<S>, n: u64, piece_cap: usize) -> Result<Subtree<S>> {
    if n == 0 {
        return Err(precondition("periodic_union needs n ≥ 1"));
    }
    let tree = f.tree();
    let mut acc = Subtree::empty();
    for i in 1..=n {
        acc = acc.union(tree, &fixed_set(f, i, piece_cap)?);
    }
    Ok(acc)
}

/// Least `p ≤ max_period` with `f^p(x) = x`.
pub fn orbit_period<S: Scalar>(f: &PlMap<S>, x: &TreePoint<S>, max_period: u64) -> Option<u64> {
    let mut y = x.clone();
    for p in 1..=max_period {
        y = f.evaluate(&y);
        if y == *x {
            return Some(p);
        }
    }
    None
}

/// Shape of an orbit segment: eventually cyclic with the given preperiod and
/// period, or no repetition within the inspected steps.
#[derive(Debug, Clone, PartialEq)]
pub enum OrbitShape<S> {
    Cyclic { preperiod: u64, period: u64, cycle: Vec<TreePoint<S>> },
    Open { points: Vec<TreePoint<S>> },
}

/// Follows `x, f(x), …` for at most `max_steps` steps, stopping at the
/// first exact repetition.
pub fn orbit_shape<S: Scalar>(f: &PlMap<S>, x: &TreePoint<S>, max_steps: u64) -> OrbitShape<S> {
    let mut seen: BTreeMap<OrdPoint<S>, u64> = BTreeMap::new();
    let mut points = vec![x.clone()];
    seen.insert(OrdPoint(x.clone()), 0);
    let mut y = x.clone();
    for j in 1..=max_steps {
        y = f.evaluate(&y);
        if let Some(&i) = seen.get(&OrdPoint(y.clone())) {
            return OrbitShape::Cyclic { preperiod: i, period: j - i, cycle: points.split_off(i as usize) };
        }
        seen.insert(OrdPoint(y.clone()), j);
        points.push(y.clone());
    }
    OrbitShape::Open { points }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexPeriod {
    Periodic(u64),
    NotWithin(u64),
}

impl VertexPeriod {
    pub fn period(self) -> Option<u64> {
        match self {
            VertexPeriod::Periodic(p) => Some(p),
            VertexPeriod::NotWithin(_) => None,
        }
    }
}

pub fn vertex_periods<S: Scalar>(f: &PlMap<S>, max_period: u64) -> Vec<VertexPeriod> {
    let tree = f.tree();
    let mut out: Vec<Option<VertexPeriod>> = vec![None; tree.vertex_count()];
    for v in tree.vertices() {
        if out[v.0].is_some() {
            continue;
        }
        let x = TreePoint::Vertex(v);
        let result = match orbit_period(f, &x, max_period) {
            Some(p) => {
                // Every vertex on the cycle shares the period.
                let mut y = x.clone();
                for _ in 0..p {
                    if let TreePoint::Vertex(w) = y {
                        out[w.0] = Some(VertexPeriod::Periodic(p));
                    }
                    y = f.evaluate(&y);
                }
                VertexPeriod::Periodic(p)
            }
            None => VertexPeriod::NotWithin(max_period),
        };
        out[v.0] = Some(result);
    }
    out.into_iter().map(|p| p.expect("every vertex visited")).collect()
}

/// Fixed sets `F_1..F_n`, their running unions `D_1..D_n`, and vertex periods.
#[derive(Debug, Clone)]
pub struct PeriodicStructure<S> {
    pub fixed_sets: Vec<Subtree<S>>,
    pub periodic_unions: Vec<Subtree<S>>,
    pub vertex_periods: Vec<VertexPeriod>,
}

impl<S: Scalar> PeriodicStructure<S> {
    /// `F_n`, for `1 ≤ n ≤ len`.
    pub fn fixed_set(&self, n: u64) -> Option<&Subtree<S>> {
        self.fixed_sets.get((n as usize).checked_sub(1)?)
    }

    /// `D_n`, for `1 ≤ n ≤ len`.
    pub fn periodic_union(&self, n: u64) -> Option<&Subtree<S>> {
        self.periodic_unions.get((n as usize).checked_sub(1)?)
    }

    pub fn period_of(&self, v: VertexId) -> VertexPeriod {
        self.vertex_periods[v.0]
    }
}

pub fn periodic_structure<S: Scalar>(
    f: &PlMap<S>,
    max_n: u64,
    max_period: u64,
    piece_cap: usize,
) -> Result<PeriodicStructure<S>> {
    if max_n == 0 {
        return Err(precondition("periodic structure needs at least n = 1"));
    }
    let tree = f.tree();
    let mut fixed_sets = Vec::with_capacity(max_n as usize);
    let mut periodic_unions: Vec<Subtree<S>> = Vec::with_capacity(max_n as usize);
    let mut power = f.clone();
    for n in 1..=max_n {
        if n > 1 {
            power = crate::pl_map::compose(f, &power, piece_cap)?;
        }
        let fixed = power.fixed_points();
        let union = match periodic_unions.last() {
            Some(prev) => prev.union(tree, &fixed),
            None => fixed.clone(),
        };
        fixed_sets.push(fixed);
        periodic_unions.push(union);
    }
    Ok(PeriodicStructure { fixed_sets, periodic_unions, vertex_periods: vertex_periods(f, max_period) })
}

/// Whether a closed set contains a cutpoint of the tree.
pub(crate) fn contains_cutpoint<S: Scalar>(tree: &crate::tree::MetricTree<S>, set: &Subtree<S>) -> bool {
    !set.parts().is_empty() || set.vertices().iter().any(|v| tree.degree(*v) >= 2)
}
