use serde::Serialize;

use crate::arc::Arc;
use crate::error::{precondition, Result};
use crate::pl_map::PlMap;
use crate::scalar::Scalar;
use crate::subtree::{components_minus_point, OpenComponent};
use crate::tree::{MetricTree, TreePoint};

use super::{contains_cutpoint, fixed_set, orbit_shape, vertex_periods, OrbitShape, VertexPeriod};

/// Whether `y` lies in the component of `X ∖ {sep}` that contains `x`.
fn same_side<S: Scalar>(tree: &MetricTree<S>, sep: &TreePoint<S>, x: &TreePoint<S>, y: &TreePoint<S>) -> bool {
    y != sep && !tree.arc(x, y).map(|a| a.contains(tree, sep)).unwrap_or(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReturnOutcome {
    /// `(f^k)^m(x)` re-entered the component at step `m`.
    Returned(u64),
    /// No return within the horizon; not a proof of non-return.
    NotWithinHorizon(u64),
}

impl ReturnOutcome {
    pub fn returned(self) -> bool {
        matches!(self, ReturnOutcome::Returned(_))
    }
}

/// Whether some `(f^k)^m(x)`, `1 ≤ m ≤ horizon`, lies in the component of
/// `X ∖ {y}` containing `x`.
pub fn returns_to_components<S: Scalar>(
    f: &PlMap<S>,
    x: &TreePoint<S>,
    y: &TreePoint<S>,
    k: u64,
    horizon: u64,
) -> Result<ReturnOutcome> {
    if x == y {
        return Err(precondition("separating point must differ from x"));
    }
    if k == 0 {
        return Err(precondition("power must be at least 1"));
    }
    let tree = f.tree();
    tree.validate_point(x)?;
    tree.validate_point(y)?;
    let mut z = x.clone();
    for m in 1..=horizon {
        z = f.evaluate_iterated(&z, k);
        if same_side(tree, y, x, &z) {
            return Ok(ReturnOutcome::Returned(m));
        }
    }
    Ok(ReturnOutcome::NotWithinHorizon(horizon))
}

/// `A_{f^n}(x)`: the component of `X ∖ {x}` containing `f^n(x)`.
pub fn forward_component<S: Scalar>(f: &PlMap<S>, n: u64, x: &TreePoint<S>) -> Result<OpenComponent<S>> {
    let image = f.evaluate_iterated(x, n);
    if image == *x {
        return Err(precondition("forward component needs f^n(x) ≠ x"));
    }
    let comps = components_minus_point(f.tree(), x)?;
    Ok(comps.into_iter().find(|c| c.contains(&image)).expect("f^n(x) ≠ x lies in some component"))
}

/// Orbit points after a burn-in, exact when the orbit is eventually periodic.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaLimit<S> {
    pub points: Vec<TreePoint<S>>,
    /// Set when the orbit was seen to cycle, so `points` is the ω-limit set.
    pub exact: bool,
}

pub fn omega_limit_estimate<S: Scalar>(f: &PlMap<S>, x: &TreePoint<S>, burn_in: u64, window: u64) -> OmegaLimit<S> {
    match orbit_shape(f, x, burn_in + window) {
        OrbitShape::Cyclic { mut cycle, .. } => {
            cycle.sort_by(|a, b| a.sort_key_cmp(b));
            OmegaLimit { points: cycle, exact: true }
        }
        OrbitShape::Open { points } => {
            let mut tail: Vec<TreePoint<S>> = points.into_iter().skip(burn_in as usize + 1).collect();
            tail.sort_by(|a, b| a.sort_key_cmp(b));
            tail.dedup();
            OmegaLimit { points: tail, exact: false }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PropertyAViolation<S> {
    /// Some point of the tree is missed by `f`.
    NotSurjective { missed: TreePoint<S> },
    /// `point` is off the periodic orbit of `orbit_point` yet maps onto it.
    NotFullyInvariant { point: TreePoint<S>, orbit_point: TreePoint<S> },
    /// The orbit of `point` cycles without returning to `point`, so
    /// `point ∉ ω(point)`.
    OutsideOmegaLimit { point: TreePoint<S>, omega: Vec<TreePoint<S>> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyAReport<S> {
    pub surjective: bool,
    pub violations: Vec<PropertyAViolation<S>>,
}

impl<S> PropertyAReport<S> {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Surjectivity (exact), full invariance of periodic vertex orbits (exact
/// preimages), and `x ∈ ω(x)` on samples whose orbit is seen to cycle.
pub fn check_property_a<S: Scalar>(f: &PlMap<S>, samples: &[TreePoint<S>], max_period: u64) -> PropertyAReport<S> {
    let tree = f.tree();
    let mut violations = Vec::new();
    let image = f.image_of_set(&crate::subtree::Subtree::full(tree));
    let surjective = image.is_full(tree);
    if !surjective {
        if let Some(c) = image.complement_components(tree).first() {
            violations.push(PropertyAViolation::NotSurjective { missed: c.representative().clone() });
        }
    }

    let periods = vertex_periods(f, max_period);
    for v in tree.vertices() {
        let VertexPeriod::Periodic(p) = periods[v.0] else { continue };
        let mut orbit = Vec::with_capacity(p as usize);
        let mut y = TreePoint::Vertex(v);
        for _ in 0..p {
            orbit.push(y.clone());
            y = f.evaluate(&y);
        }
        for target in &orbit {
            let pre = f.preimage_of_point(target);
            if let Some(point) = pre.sample_points(tree).into_iter().find(|q| !orbit.contains(q)) {
                violations.push(PropertyAViolation::NotFullyInvariant { point, orbit_point: target.clone() });
                break;
            }
        }
    }

    for x in samples {
        if let OrbitShape::Cyclic { preperiod, cycle, .. } = orbit_shape(f, x, max_period) {
            if preperiod > 0 {
                violations.push(PropertyAViolation::OutsideOmegaLimit { point: x.clone(), omega: cycle });
            }
        }
    }
    PropertyAReport { surjective, violations }
}

/// A preperiodic point together with a separator it never returns past.
#[derive(Debug, Clone, PartialEq)]
pub struct PreperiodicWitness<S> {
    pub point: TreePoint<S>,
    pub preperiod: u64,
    pub period: u64,
    /// `g = f^power` satisfies `x ≠ g(x) = g²(x)`.
    pub power: u64,
    pub image: TreePoint<S>,
    /// Separates `point` from `image`; `point` never returns to its side
    /// under `g`.
    pub separator: TreePoint<S>,
}

impl<S: Scalar> PreperiodicWitness<S> {
    pub fn verify(&self, f: &PlMap<S>) -> bool {
        let tree = f.tree();
        let g1 = f.evaluate_iterated(&self.point, self.power);
        let g2 = f.evaluate_iterated(&g1, self.power);
        g1 == self.image
            && g2 == g1
            && g1 != self.point
            && tree.separates(&self.separator, &self.point, &g1).unwrap_or(false)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoPreperiodicReport<S> {
    pub checked: usize,
    pub violations: Vec<PreperiodicWitness<S>>,
}

impl<S> NoPreperiodicReport<S> {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn check_no_preperiodic<S: Scalar>(f: &PlMap<S>, max_period: u64, samples: &[TreePoint<S>]) -> NoPreperiodicReport<S> {
    let tree = f.tree();
    let mut violations = Vec::new();
    for x in samples {
        let OrbitShape::Cyclic { preperiod, period, .. } = orbit_shape(f, x, max_period) else { continue };
        if preperiod == 0 {
            continue;
        }
        let power = preperiod.div_ceil(period) * period;
        let image = f.evaluate_iterated(x, power);
        let arc = Arc::between(tree, x, &image);
        let half = arc.length().clone() * S::half();
        let separator = arc.point_at(tree, &half);
        violations.push(PreperiodicWitness { point: x.clone(), preperiod, period, power, image, separator });
    }
    NoPreperiodicReport { checked: samples.len(), violations }
}


/// `t ≠ x′` with `[x′, t] ⊂ [x′, f^n(t))`, where `f^n(x′) = x′`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpossViolation<S> {
    pub fixed: TreePoint<S>,
    pub t: TreePoint<S>,
    pub image: TreePoint<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImpossReport<S> {
    pub fixed_points_checked: usize,
    pub violations: Vec<ImpossViolation<S>>,
}

impl<S> ImpossReport<S> {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn check_imposs<S: Scalar>(
    f: &PlMap<S>,
    n: u64,
    samples: &[TreePoint<S>],
    piece_cap: usize,
) -> Result<ImpossReport<S>> {
    let tree = f.tree();
    let fixed = fixed_set(f, n, piece_cap)?;
    let anchors = fixed.sample_points(tree);
    let mut violations = Vec::new();
    for t in samples {
        let image = f.evaluate_iterated(t, n);
        if image == *t {
            continue;
        }
        for x in &anchors {
            if x != t && tree.arc(x, &image)?.contains(tree, t) {
                violations.push(ImpossViolation { fixed: x.clone(), t: t.clone(), image: image.clone() });
            }
        }
    }
    Ok(ImpossReport { fixed_points_checked: anchors.len(), violations })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EscapeViolation<S> {
    pub point: TreePoint<S>,
    /// Number of `f^n` steps after which the orbit left `A_{f^n}(x) ∪ {x}`.
    pub step: u64,
    pub position: TreePoint<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EscapeReport<S> {
    /// `F_i` contains a cutpoint for some `i ≤ period_bound`.
    HypothesisNotMet { periodic_cutpoint: TreePoint<S>, period: u64 },
    Checked { points_checked: usize, violations: Vec<EscapeViolation<S>> },
}

impl<S> EscapeReport<S> {
    pub fn passed(&self) -> bool {
        matches!(self, EscapeReport::Checked { violations, .. } if violations.is_empty())
    }
}

/// Checks that each sampled `f^n`-orbit stays in `A_{f^n}(x) ∪ {x}` for
/// `horizon` steps, after confirming that no `F_i`, `i ≤ period_bound`,
/// contains a cutpoint.
pub fn check_escape<S: Scalar>(
    f: &PlMap<S>,
    n: u64,
    samples: &[TreePoint<S>],
    horizon: u64,
    period_bound: u64,
    piece_cap: usize,
) -> Result<EscapeReport<S>> {
    let tree = f.tree();
    for i in 1..=period_bound {
        let fixed = fixed_set(f, i, piece_cap)?;
        if contains_cutpoint(tree, &fixed) {
            let periodic_cutpoint = fixed
                .sample_points(tree)
                .into_iter()
                .find(|p| tree.order_of(p).map(|(_, c)| c.is_cutpoint()).unwrap_or(false))
                .expect("set holding a cutpoint samples one");
            return Ok(EscapeReport::HypothesisNotMet { periodic_cutpoint, period: i });
        }
    }
    let mut violations = Vec::new();
    let mut points_checked = 0;
    for x in samples {
        let Ok(side) = forward_component(f, n, x) else { continue };
        points_checked += 1;
        let mut z = x.clone();
        for step in 1..=horizon {
            z = f.evaluate_iterated(&z, n);
            if z != *x && !side.contains(&z) {
                violations.push(EscapeViolation { point: x.clone(), step, position: z });
                break;
            }
        }
    }
    Ok(EscapeReport::Checked { points_checked, violations })
}
