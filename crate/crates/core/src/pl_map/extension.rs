//! Extensions of a map across connected hulls and the periodic-point search
//! built on them.
//!
//! Maps between subtrees are represented as self-maps of the whole tree
//! by precomposing with the retraction onto the domain: a map `Y → Z` becomes
//! `F ∘ p_Y : X → X`, which agrees with `F` on `Y` and has image in `Z`.

use crate::error::{precondition, structural, Error, Result};
use crate::scalar::Scalar;
use crate::subtree::{connected_hull, retract_unchecked, Subtree};
use crate::tree::{EdgeId, MetricTree, TreePoint};

use super::{compose, iterate, Knot, PlMap, Shared};

/// The retraction `p_Y` as a PL self-map of the tree.
pub fn retraction_map<S: Scalar>(tree: Shared<MetricTree<S>>, y: &Subtree<S>) -> Result<PlMap<S>> {
    if !y.is_connected(&tree) {
        return Err(structural("retraction target must be non-empty and connected"));
    }
    let vertex_images: Vec<TreePoint<S>> =
        tree.vertices().map(|v| retract_unchecked(&tree, y, &TreePoint::Vertex(v))).collect();
    let mut pieces = Vec::with_capacity(tree.edge_count());
    for (i, e) in tree.edges().iter().enumerate() {
        let id = EdgeId(i);
        let mut lo_hi: Option<(S, S)> = None;
        let mut extend = |a: S, b: S| {
            lo_hi = Some(match lo_hi.take() {
                None => (a, b),
                Some((lo, hi)) => (if a < lo { a } else { lo }, if b > hi { b } else { hi }),
            });
        };
        if y.vertices().contains(&e.ends[0]) {
            extend(S::zero(), S::zero());
        }
        if y.vertices().contains(&e.ends[1]) {
            extend(S::one(), S::one());
        }
        if let Some(ivs) = y.parts().get(&id) {
            for (lo, hi) in ivs {
                extend(lo.clone(), hi.clone());
            }
        }
        let start = vertex_images[e.ends[0].0].clone();
        let end = vertex_images[e.ends[1].0].clone();
        let knots = match lo_hi {
            None => vec![Knot::new(S::zero(), start), Knot::new(S::one(), end)],
            Some((lo, hi)) => {
                let mut k = vec![Knot::new(S::zero(), start)];
                if lo > S::zero() && lo < S::one() {
                    k.push(Knot::new(lo.clone(), tree.point_on_edge_unchecked(id, lo.clone())));
                }
                if hi > lo && hi < S::one() {
                    k.push(Knot::new(hi.clone(), tree.point_on_edge_unchecked(id, hi.clone())));
                }
                k.push(Knot::new(S::one(), end));
                k
            }
        };
        pieces.push(knots);
    }
    PlMap::new(tree, vertex_images, pieces)
}

/// A map between two connected subsets, stored as a tree self-map whose
/// restriction to `domain` is the map proper and whose image lies in
/// `codomain`.
#[derive(Debug, Clone)]
pub struct HullExtension<S> {
    pub domain: Subtree<S>,
    pub codomain: Subtree<S>,
    pub map: PlMap<S>,
}

fn images<S: Scalar>(f: &PlMap<S>, pts: &[TreePoint<S>]) -> Vec<TreePoint<S>> {
    pts.iter().map(|p| f.evaluate(p)).collect()
}

/// `F = p_Z ∘ f` on `Y = ch(E)`, with `Z = ch(f(E))`.
pub fn extend_through_hull<S: Scalar>(f: &PlMap<S>, points: &[TreePoint<S>], piece_cap: usize) -> Result<HullExtension<S>> {
    iterated_extension(f, points, 1, piece_cap)
}

/// `F_n` on `Y = ch(E)`: agrees with `f^n` wherever every intermediate
/// image stays in the hulls `Z_i = ch(f^i(E))`, and is locally constant
/// elsewhere.
pub fn iterated_extension<S: Scalar>(
    f: &PlMap<S>,
    points: &[TreePoint<S>],
    n: u64,
    piece_cap: usize,
) -> Result<HullExtension<S>> {
    if n == 0 {
        return Err(precondition("iterated extension needs n ≥ 1"));
    }
    let tree = f.shared_tree();
    let domain = connected_hull(&tree, points)?;
    let mut current = retraction_map(tree.clone(), &domain)?;
    let mut orbit = points.to_vec();
    let mut codomain = domain.clone();
    for _ in 0..n {
        orbit = images(f, &orbit);
        codomain = connected_hull(&tree, &orbit)?;
        let step = compose(f, &current, piece_cap)?;
        current = compose(&retraction_map(tree.clone(), &codomain)?, &step, piece_cap)?;
    }
    Ok(HullExtension { domain, codomain, map: current })
}

/// A point of `ch(E)` fixed by `f^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicInHull<S> {
    pub point: TreePoint<S>,
    /// Set when no fixed point of `p_Y ∘ F_n` was itself `f^n`-fixed and the
    /// search fell back to solving `f^n(x) = x` on the hull directly.
    pub fallback_used: bool,
}

/// Finds `x ∈ Y = ch(E)` with `f^n(x) = x`, given `ch(f^n(E)) ⊇ Y`.
///
/// Fixed points of `g = p_Y ∘ F_n` are enumerated exactly; the first one
/// (in a deterministic order) that `f^n` also fixes is returned.
pub fn find_periodic_in_hull<S: Scalar>(
    f: &PlMap<S>,
    points: &[TreePoint<S>],
    n: u64,
    piece_cap: usize,
) -> Result<PeriodicInHull<S>> {
    let tree = f.shared_tree();
    let hull = connected_hull(&tree, points)?;
    let far: Vec<TreePoint<S>> = points.iter().map(|p| f.evaluate_iterated(p, n)).collect();
    if !hull.is_subset(&connected_hull(&tree, &far)?) {
        return Err(precondition("ch(f^n(E)) must contain ch(E)"));
    }
    let ext = iterated_extension(f, points, n, piece_cap)?;
    let g = compose(&retraction_map(tree.clone(), &hull)?, &ext.map, piece_cap)?;
    let candidates = g.fixed_points().sample_points(&tree);
    for x in candidates {
        if hull.contains(&x) && f.evaluate_iterated(&x, n) == x {
            return Ok(PeriodicInHull { point: x, fallback_used: false });
        }
    }
    let direct = iterate(f, n, piece_cap)?.fixed_points().intersection(&tree, &hull);
    match direct.sample_points(&tree).into_iter().next() {
        Some(point) => Ok(PeriodicInHull { point, fallback_used: true }),
        None => Err(Error::Invariant(
            "no f^n-fixed point in the hull although ch(f^n(E)) ⊇ ch(E)".into(),
        )),
    }
}
