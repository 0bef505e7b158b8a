use num_integer::Integer;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::pl_map::{iterate, Injectivity, PlMap};
use crate::scalar::Scalar;
use crate::subtree::{components_minus_point, connected_hull, Subtree};
use crate::tree::{MetricTree, TreePoint};

use super::{orbit_period, vertex_periods, VertexPeriod};

/// Largest `N` the procedure will try as an identity power.
pub const IDENTITY_POWER_CAP: u64 = 1_000_000;

/// Orbit points examined when building an escape certificate.
const TRAP_SEEDS: u64 = 16;
const TRAP_GROWTH_ROUNDS: usize = 8;

/// Period bound for the first, cheap pass over vertex orbits.
const QUICK_PERIOD_BOUND: u64 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessReason {
    NonInjective,
    NonPeriodicCutpoint,
    EscapingOrbit,
}

/// Evidence that a map is not pointwise-recurrent.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness<S> {
    /// Two distinct points with the same image.
    NonInjective { a: TreePoint<S>, b: TreePoint<S>, image: TreePoint<S> },
    /// `f` is injective, `f^power` fixes every vertex, and moves `point`.
    /// An injective self-map of an edge fixing both ends has no periodic
    /// points besides its fixed points, so `point` is not periodic.
    NonPeriodicCutpoint { point: TreePoint<S>, power: u64, image: TreePoint<S> },
    /// `trap` is a closed forward-invariant set containing `f(point)` but not
    /// `point`, so the orbit of `point` stays a positive distance away.
    EscapingOrbit { point: TreePoint<S>, trap: Subtree<S> },
}

impl<S: Scalar> Witness<S> {
    pub fn point(&self) -> &TreePoint<S> {
        match self {
            Witness::NonInjective { a, .. } => a,
            Witness::NonPeriodicCutpoint { point, .. } | Witness::EscapingOrbit { point, .. } => point,
        }
    }

    pub fn reason(&self) -> WitnessReason {
        match self {
            Witness::NonInjective { .. } => WitnessReason::NonInjective,
            Witness::NonPeriodicCutpoint { .. } => WitnessReason::NonPeriodicCutpoint,
            Witness::EscapingOrbit { .. } => WitnessReason::EscapingOrbit,
        }
    }

    /// Re-checks the witness against `f` from scratch.
    pub fn verify(&self, f: &PlMap<S>, piece_cap: usize) -> bool {
        let tree = f.tree();
        match self {
            Witness::NonInjective { a, b, image } => a != b && f.evaluate(a) == *image && f.evaluate(b) == *image,
            Witness::NonPeriodicCutpoint { point, power, image } => {
                let Ok(h) = iterate(f, *power, piece_cap) else {
                    return false;
                };
                let cut = tree.order_of(point).map(|(_, c)| c.is_cutpoint()).unwrap_or(false);
                cut && f.is_injective()
                    && tree.vertices().all(|v| *h.vertex_image(v) == TreePoint::Vertex(v))
                    && h.evaluate(point) == *image
                    && image != point
            }
            Witness::EscapingOrbit { point, trap } => {
                !trap.contains(point) && trap.contains(&f.evaluate(point)) && f.image_of_set(trap).is_subset(trap)
            }
        }
    }
}

/// Outcome of the decision procedure.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceVerdict<S> {
    pub pointwise_recurrent: bool,
    pub witness: Option<Witness<S>>,
    /// `N` with `f^N = id`, present exactly when the verdict is true.
    pub identity_power: Option<u64>,
    pub vertex_periods: Vec<VertexPeriod>,
}

impl<S> RecurrenceVerdict<S> {
    fn negative(witness: Witness<S>, vertex_periods: Vec<VertexPeriod>) -> Self {
        RecurrenceVerdict { pointwise_recurrent: false, witness: Some(witness), identity_power: None, vertex_periods }
    }
}

/// Decides whether `f` is pointwise-recurrent, i.e. whether every cutpoint
/// is periodic, equivalently whether some power of `f` is the identity.
pub fn decide_pointwise_recurrent<S: Scalar>(
    f: &PlMap<S>,
    max_period: u64,
    piece_cap: usize,
) -> Result<RecurrenceVerdict<S>> {
    let tree = f.tree();
    let quick = max_period.min(QUICK_PERIOD_BOUND);
    if let Injectivity::Collision { a, b } = f.injectivity() {
        let image = f.evaluate(&a);
        return Ok(RecurrenceVerdict::negative(Witness::NonInjective { a, b, image }, vertex_periods(f, quick)));
    }

    // Escaping vertices are usually certified long before a full period
    // search would give up, so try a short search first.
    let mut periods = vertex_periods(f, quick);
    let mut bound = quick;
    loop {
        let undecided: Vec<usize> = (0..periods.len()).filter(|&i| periods[i].period().is_none()).collect();
        if undecided.is_empty() {
            break;
        }
        let anchors = periodic_anchor_points(f, &periods);
        for &i in &undecided {
            let v = TreePoint::Vertex(crate::tree::VertexId(i));
            if let Some(w) = escaping_witness_along_orbit(f, &v, &anchors) {
                return Ok(RecurrenceVerdict::negative(w, periods));
            }
        }
        if bound == max_period {
            break;
        }
        bound = max_period;
        periods = vertex_periods(f, bound);
    }
    let undecided: Vec<usize> = (0..periods.len()).filter(|&i| periods[i].period().is_none()).collect();
    if !undecided.is_empty() {
        // Endpoints may be undecided while every cutpoint vertex is periodic;
        // the edge check below still settles those.
        let cut_undecided: Vec<String> = undecided
            .iter()
            .filter(|&&i| tree.degree(crate::tree::VertexId(i)) >= 2)
            .map(|&i| tree.vertex_name(crate::tree::VertexId(i)).to_string())
            .collect();
        if !cut_undecided.is_empty() {
            return Err(Error::Inconclusive(format!(
                "vertex orbits of {} neither closed within {max_period} steps nor certified escaping",
                cut_undecided.join(", ")
            )));
        }
    }

    let mut n0: u64 = 1;
    for p in periods.iter().filter_map(|p| p.period()) {
        n0 = n0.lcm(&p);
        if n0 > IDENTITY_POWER_CAP {
            return Err(Error::Inconclusive(format!(
                "lcm of vertex periods exceeds the identity-power cap {IDENTITY_POWER_CAP}"
            )));
        }
    }
    let h = iterate(f, n0, piece_cap)?;
    if undecided.is_empty() && h.is_identity() {
        return Ok(RecurrenceVerdict {
            pointwise_recurrent: true,
            witness: None,
            identity_power: Some(n0),
            vertex_periods: periods,
        });
    }
    if !undecided.is_empty() {
        return Err(Error::Inconclusive(
            "endpoint vertex orbit undecided and no escape certificate found".into(),
        ));
    }
    let point = moved_interior_point(&h).ok_or_else(|| {
        Error::Invariant("iterate fixes every vertex and every knot yet is not the identity".into())
    })?;
    let image = h.evaluate(&point);
    Ok(RecurrenceVerdict::negative(Witness::NonPeriodicCutpoint { point, power: n0, image }, periods))
}

/// An edge-interior point moved by `h`, preferring knots of `h`.
fn moved_interior_point<S: Scalar>(h: &PlMap<S>) -> Option<TreePoint<S>> {
    let tree = h.tree();
    for e in tree.edge_ids() {
        let knots = h.knots(e);
        let mut candidates: Vec<S> = knots[1..knots.len() - 1].iter().map(|k| k.t.clone()).collect();
        for w in knots.windows(2) {
            candidates.push((w[0].t.clone() + w[1].t.clone()) * S::half());
        }
        for t in candidates {
            let x = tree.point_on_edge_unchecked(e, t);
            if h.evaluate(&x) != x {
                return Some(x);
            }
        }
    }
    None
}

/// Periodic vertex orbits and the fixed points of `f`: attractors a trap
/// may need to contain.
fn periodic_anchor_points<S: Scalar>(f: &PlMap<S>, periods: &[VertexPeriod]) -> Vec<TreePoint<S>> {
    let tree = f.tree();
    let mut out: Vec<TreePoint<S>> = Vec::new();
    for v in tree.vertices() {
        if let VertexPeriod::Periodic(p) = periods[v.0] {
            let mut y = TreePoint::Vertex(v);
            for _ in 0..p {
                if !out.contains(&y) {
                    out.push(y.clone());
                }
                y = f.evaluate(&y);
            }
        }
    }
    for p in f.fixed_points().corner_points(tree) {
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

/// Tries the orbit points of `v`, cutpoints first, for an escape certificate.
fn escaping_witness_along_orbit<S: Scalar>(
    f: &PlMap<S>,
    v: &TreePoint<S>,
    anchors: &[TreePoint<S>],
) -> Option<Witness<S>> {
    let tree = f.tree();
    let mut orbit = vec![v.clone()];
    for _ in 0..TRAP_SEEDS {
        let next = f.evaluate(orbit.last().expect("non-empty"));
        orbit.push(next);
    }
    let is_cut = |p: &TreePoint<S>| tree.order_of(p).map(|(_, c)| c.is_cutpoint()).unwrap_or(false);
    let (cuts, others): (Vec<_>, Vec<_>) = orbit.into_iter().partition(is_cut);
    for x in cuts.into_iter().chain(others) {
        if let Some(trap) = escape_certificate(f, &x, anchors) {
            return Some(Witness::EscapingOrbit { point: x, trap });
        }
    }
    None
}

/// A closed set `K` with `f(x) ∈ K`, `f(K) ⊆ K`, and `x ∉ K`, grown from the
/// forward orbit of `x` and those `anchors` lying on the side of `f(x)`.
pub fn escape_certificate<S: Scalar>(f: &PlMap<S>, x: &TreePoint<S>, anchors: &[TreePoint<S>]) -> Option<Subtree<S>> {
    let tree = f.tree();
    let fx = f.evaluate(x);
    if fx == *x {
        return None;
    }
    let side = components_minus_point(tree, x).ok()?.into_iter().find(|c| c.contains(&fx))?;
    let mut seeds = vec![fx.clone()];
    for _ in 1..TRAP_SEEDS {
        let next = f.evaluate(seeds.last().expect("non-empty"));
        if next == *x {
            return None;
        }
        seeds.push(next);
    }
    let with_anchors: Vec<TreePoint<S>> =
        seeds.iter().cloned().chain(anchors.iter().filter(|a| side.contains(a)).cloned()).collect();
    for start in [with_anchors, seeds] {
        if let Some(k) = grow_trap(f, tree, x, connected_hull(tree, &start).ok()?) {
            return Some(k);
        }
    }
    None
}

fn grow_trap<S: Scalar>(f: &PlMap<S>, tree: &MetricTree<S>, x: &TreePoint<S>, mut k: Subtree<S>) -> Option<Subtree<S>> {
    for _ in 0..TRAP_GROWTH_ROUNDS {
        if k.contains(x) {
            return None;
        }
        let image = f.image_of_set(&k);
        if image.is_subset(&k) {
            return Some(k);
        }
        let mut corners = k.corner_points(tree);
        corners.extend(image.corner_points(tree));
        k = connected_hull(tree, &corners).ok()?;
    }
    None
}

/// Horizon-relative recurrence class of a single point.
#[derive(Debug, Clone, PartialEq)]
pub enum RecurrenceClass<S> {
    Periodic(u64),
    /// Certified non-recurrent by a forward-invariant trap avoiding the point.
    Escaping(Subtree<S>),
    Undetermined,
}

impl<S> RecurrenceClass<S> {
    /// `Some(true)` for periodic, `Some(false)` for escaping.
    pub fn recurrent(&self) -> Option<bool> {
        match self {
            RecurrenceClass::Periodic(_) => Some(true),
            RecurrenceClass::Escaping(_) => Some(false),
            RecurrenceClass::Undetermined => None,
        }
    }
}

pub fn classify_recurrence<S: Scalar>(f: &PlMap<S>, x: &TreePoint<S>, horizon: u64) -> RecurrenceClass<S> {
    // A periodic point lies in every forward-invariant set containing its
    // image, so it never has a certificate; trying one first is safe and
    // usually much cheaper than a long orbit walk.
    let periods = vertex_periods(f, horizon.min(QUICK_PERIOD_BOUND));
    let anchors = periodic_anchor_points(f, &periods);
    if let Some(trap) = escape_certificate(f, x, &anchors) {
        return RecurrenceClass::Escaping(trap);
    }
    match orbit_period(f, x, horizon) {
        Some(p) => RecurrenceClass::Periodic(p),
        None => RecurrenceClass::Undetermined,
    }
}
