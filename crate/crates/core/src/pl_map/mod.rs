//! Piecewise arclength-linear self-maps of metric trees.
//!
//! Each edge is cut at knots `0 = t_0 < … < t_k = 1`; on `[t_i, t_{i+1}]` the
//! map runs along the arc from the image of `t_i` to the image of `t_{i+1}`
//! at constant speed. This class is closed under composition with exact
//! rational data, and every question asked of it below reduces to linear
//! equations in one parameter.

mod compose;
mod extension;
mod fixed;

use crate::arc::Arc;
use crate::error::{structural, Result};
use crate::scalar::Scalar;
use crate::subtree::{Subtree, SubtreeBuilder};
use crate::tree::{EdgeId, MetricTree, TreePoint, VertexId};

pub use compose::{compose, iterate};
pub use extension::{
    extend_through_hull, find_periodic_in_hull, iterated_extension, retraction_map, HullExtension,
    PeriodicInHull,
};

/// Shared ownership of the domain tree.
pub type Shared<T> = std::sync::Arc<T>;

/// Default bound on the total number of pieces produced by composition.
pub const DEFAULT_PIECE_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Knot<S> {
    pub t: S,
    pub image: TreePoint<S>,
}

impl<S> Knot<S> {
    pub fn new(t: S, image: TreePoint<S>) -> Self {
        Knot { t, image }
    }
}

/// A continuous PL self-map of a tree, kept in normal form (no two adjacent
/// pieces that could be merged into one).
#[derive(Debug, Clone)]
pub struct PlMap<S> {
    tree: Shared<MetricTree<S>>,
    vertex_images: Vec<TreePoint<S>>,
    pieces: Vec<Vec<Knot<S>>>,
}

impl<S: Scalar> PartialEq for PlMap<S> {
    fn eq(&self, other: &Self) -> bool {
        (Shared::ptr_eq(&self.tree, &other.tree) || *self.tree == *other.tree)
            && self.vertex_images == other.vertex_images
            && self.pieces == other.pieces
    }
}

/// Outcome of the exact injectivity test.
#[derive(Debug, Clone, PartialEq)]
pub enum Injectivity<S> {
    Injective,
    /// Two distinct points with a common image.
    Collision { a: TreePoint<S>, b: TreePoint<S> },
}

impl<S: Scalar> PlMap<S> {
    pub fn new(
        tree: Shared<MetricTree<S>>,
        vertex_images: Vec<TreePoint<S>>,
        pieces: Vec<Vec<Knot<S>>>,
    ) -> Result<Self> {
        if vertex_images.len() != tree.vertex_count() {
            return Err(structural("one image per vertex is required"));
        }
        if pieces.len() != tree.edge_count() {
            return Err(structural("one knot list per edge is required"));
        }
        for p in &vertex_images {
            tree.validate_point(p)?;
        }
        for (i, knots) in pieces.iter().enumerate() {
            let e = tree.edge(EdgeId(i));
            if knots.len() < 2 {
                return Err(structural(format!("edge {} needs at least two knots", e.name)));
            }
            if !knots[0].t.is_zero() || knots[knots.len() - 1].t != S::one() {
                return Err(structural(format!("knots of edge {} must start at 0 and end at 1", e.name)));
            }
            if knots.windows(2).any(|w| w[0].t >= w[1].t) {
                return Err(structural(format!("knots of edge {} must increase strictly", e.name)));
            }
            for k in knots {
                tree.validate_point(&k.image)?;
            }
            if knots[0].image != vertex_images[e.ends[0].0]
                || knots[knots.len() - 1].image != vertex_images[e.ends[1].0]
            {
                return Err(structural(format!("edge {} is discontinuous at an end vertex", e.name)));
            }
        }
        let mut map = PlMap { tree, vertex_images, pieces };
        map.normalize();
        Ok(map)
    }

    pub(crate) fn from_normalized_parts(
        tree: Shared<MetricTree<S>>,
        vertex_images: Vec<TreePoint<S>>,
        pieces: Vec<Vec<Knot<S>>>,
    ) -> Self {
        let mut map = PlMap { tree, vertex_images, pieces };
        map.normalize();
        map
    }

    pub fn identity(tree: Shared<MetricTree<S>>) -> Self {
        let vertex_images = tree.vertices().map(TreePoint::Vertex).collect();
        let pieces = tree
            .edges()
            .iter()
            .map(|e| {
                vec![
                    Knot::new(S::zero(), TreePoint::Vertex(e.ends[0])),
                    Knot::new(S::one(), TreePoint::Vertex(e.ends[1])),
                ]
            })
            .collect();
        PlMap { tree, vertex_images, pieces }
    }

    /// Each edge runs straight from the image of one end to the other.
    pub fn from_vertex_images(tree: Shared<MetricTree<S>>, vertex_images: Vec<TreePoint<S>>) -> Result<Self> {
        if vertex_images.len() != tree.vertex_count() {
            return Err(structural("one image per vertex is required"));
        }
        let pieces = tree
            .edges()
            .iter()
            .map(|e| {
                vec![
                    Knot::new(S::zero(), vertex_images[e.ends[0].0].clone()),
                    Knot::new(S::one(), vertex_images[e.ends[1].0].clone()),
                ]
            })
            .collect();
        PlMap::new(tree, vertex_images, pieces)
    }

    pub fn tree(&self) -> &MetricTree<S> {
        &self.tree
    }

    pub fn shared_tree(&self) -> Shared<MetricTree<S>> {
        self.tree.clone()
    }

    pub fn vertex_image(&self, v: VertexId) -> &TreePoint<S> {
        &self.vertex_images[v.0]
    }

    pub fn vertex_images(&self) -> &[TreePoint<S>] {
        &self.vertex_images
    }

    pub fn knots(&self, e: EdgeId) -> &[Knot<S>] {
        &self.pieces[e.0]
    }

    pub fn piece_count(&self) -> usize {
        self.pieces.iter().map(|k| k.len() - 1).sum()
    }

    pub fn is_identity(&self) -> bool {
        self.vertex_images.iter().enumerate().all(|(i, p)| *p == TreePoint::Vertex(VertexId(i)))
            && self.pieces.iter().zip(self.tree.edges()).all(|(knots, e)| {
                knots.len() == 2
                    && knots[0].image == TreePoint::Vertex(e.ends[0])
                    && knots[1].image == TreePoint::Vertex(e.ends[1])
            })
    }

    fn normalize(&mut self) {
        let tree = self.tree.clone();
        for knots in &mut self.pieces {
            let mut out: Vec<Knot<S>> = Vec::with_capacity(knots.len());
            for k in knots.drain(..) {
                while out.len() >= 2 && mergeable(&tree, &out[out.len() - 2], &out[out.len() - 1], &k) {
                    out.pop();
                }
                out.push(k);
            }
            *knots = out;
        }
    }

    /// Exact image of a point.
    pub fn evaluate(&self, x: &TreePoint<S>) -> TreePoint<S> {
        match x {
            TreePoint::Vertex(v) => self.vertex_images[v.0].clone(),
            TreePoint::Edge { edge, t } => self.evaluate_on_edge(*edge, t),
        }
    }

    pub(crate) fn evaluate_on_edge(&self, e: EdgeId, t: &S) -> TreePoint<S> {
        let knots = &self.pieces[e.0];
        let idx = knots.partition_point(|k| k.t <= *t).clamp(1, knots.len() - 1) - 1;
        let (a, b) = (&knots[idx], &knots[idx + 1]);
        if *t == a.t {
            return a.image.clone();
        }
        if *t == b.t {
            return b.image.clone();
        }
        let arc = Arc::between(&self.tree, &a.image, &b.image);
        let s = (t.clone() - a.t.clone()) / (b.t.clone() - a.t.clone()) * arc.length().clone();
        arc.point_at(&self.tree, &s)
    }

    /// `f^n(x)` by repeated evaluation.
    pub fn evaluate_iterated(&self, x: &TreePoint<S>, n: u64) -> TreePoint<S> {
        let mut p = x.clone();
        for _ in 0..n {
            p = self.evaluate(&p);
        }
        p
    }

    fn image_of_interval(&self, e: EdgeId, lo: &S, hi: &S, out: &mut SubtreeBuilder<S>) {
        let mut images = vec![self.evaluate_on_edge(e, lo)];
        for k in &self.pieces[e.0] {
            if *lo < k.t && k.t < *hi {
                images.push(k.image.clone());
            }
        }
        images.push(self.evaluate_on_edge(e, hi));
        out.add_point(&images[0]);
        for w in images.windows(2) {
            out.add_arc(&Arc::between(&self.tree, &w[0], &w[1]));
        }
    }

    /// Exact image of an arc as a connected set.
    pub fn image_of_arc(&self, arc: &Arc<S>) -> Subtree<S> {
        let mut b = SubtreeBuilder::new();
        b.add_point(&self.evaluate(arc.start()));
        for seg in arc.segments() {
            self.image_of_interval(seg.edge, seg.lo(), seg.hi(), &mut b);
        }
        b.finish(&self.tree)
    }

    /// Exact image of a closed set.
    pub fn image_of_set(&self, set: &Subtree<S>) -> Subtree<S> {
        let mut b = SubtreeBuilder::new();
        for v in set.vertices() {
            b.add_point(&self.vertex_images[v.0]);
        }
        for (e, ivs) in set.parts() {
            for (lo, hi) in ivs {
                self.image_of_interval(*e, lo, hi, &mut b);
            }
        }
        b.finish(&self.tree)
    }

    /// Whether `f(X) = X`.
    pub fn is_surjective(&self) -> bool {
        self.image_of_set(&Subtree::full(&self.tree)).is_full(&self.tree)
    }

    /// Exact preimage `f⁻¹(p)` as a closed set.
    pub fn preimage_of_point(&self, p: &TreePoint<S>) -> Subtree<S> {
        let tree = &self.tree;
        let mut b = SubtreeBuilder::new();
        for v in tree.vertices() {
            if self.vertex_images[v.0] == *p {
                b.add_vertex(v);
            }
        }
        for (i, knots) in self.pieces.iter().enumerate() {
            let e = EdgeId(i);
            for w in knots.windows(2) {
                let arc = Arc::between(tree, &w[0].image, &w[1].image);
                if arc.is_degenerate() {
                    if w[0].image == *p {
                        b.add_interval(e, w[0].t.clone(), w[1].t.clone());
                    }
                } else if let Some(s) = arc.position_of(tree, p) {
                    let t = w[0].t.clone() + s / arc.length().clone() * (w[1].t.clone() - w[0].t.clone());
                    b.add_interval(e, t.clone(), t);
                }
            }
        }
        b.finish(tree)
    }

    /// Decides injectivity exactly; on failure returns a colliding pair.
    ///
    /// The map is injective iff every edge is carried along a geodesic
    /// without stalls, and the image arcs of two edges meet at most in the
    /// image of a shared end vertex.
    pub fn injectivity(&self) -> Injectivity<S> {
        let tree = &self.tree;
        for (i, knots) in self.pieces.iter().enumerate() {
            let e = EdgeId(i);
            let mut reach = S::zero();
            let mut reached: Vec<S> = vec![S::zero()];
            for j in 0..knots.len() - 1 {
                let (a, b) = (&knots[j], &knots[j + 1]);
                let step = tree.distance(&a.image, &b.image);
                if step.is_zero() {
                    let mid = (a.t.clone() + b.t.clone()) * S::half();
                    return Injectivity::Collision {
                        a: tree.point_on_edge_unchecked(e, a.t.clone()),
                        b: tree.point_on_edge_unchecked(e, mid),
                    };
                }
                let direct = tree.distance(&knots[0].image, &b.image);
                let fold = reach.clone() + step.clone() - direct.clone();
                if fold > S::zero() {
                    // The walk turns back at knot j and retraces a stretch of
                    // length fold/2 of the geodesic prefix.
                    let delta = fold * S::half() * S::half();
                    let later = a.t.clone() + delta.clone() / step * (b.t.clone() - a.t.clone());
                    let earlier = self.param_at_reach(e, &reached, &(reach.clone() - delta));
                    return Injectivity::Collision {
                        a: tree.point_on_edge_unchecked(e, earlier),
                        b: tree.point_on_edge_unchecked(e, later),
                    };
                }
                reach = direct;
                reached.push(reach.clone());
            }
        }

        let images: Vec<Arc<S>> = tree
            .edges()
            .iter()
            .map(|e| Arc::between(tree, &self.vertex_images[e.ends[0].0], &self.vertex_images[e.ends[1].0]))
            .collect();
        for i in 0..tree.edge_count() {
            for j in i + 1..tree.edge_count() {
                let (ei, ej) = (tree.edge(EdgeId(i)), tree.edge(EdgeId(j)));
                let other = Subtree::from_arc(tree, &images[j]);
                let hits = other.arc_positions(tree, &images[i]);
                if hits.is_empty() {
                    continue;
                }
                let shared = ei.ends.iter().find(|v| ej.ends.contains(v)).copied();
                let shared_image = shared.map(|v| &self.vertex_images[v.0]);
                let mut collision = None;
                for (lo, hi) in &hits {
                    let pos = if lo < hi { (lo.clone() + hi.clone()) * S::half() } else { lo.clone() };
                    let y = images[i].point_at(tree, &pos);
                    if Some(&y) != shared_image {
                        collision = Some((pos, y));
                        break;
                    }
                }
                if let Some((pos, y)) = collision {
                    let reached_i = self.reach_table(EdgeId(i));
                    let reached_j = self.reach_table(EdgeId(j));
                    let pos_j = images[j].position_of(tree, &y).expect("collision point lies on both arcs");
                    let ti = self.param_at_reach(EdgeId(i), &reached_i, &pos);
                    let tj = self.param_at_reach(EdgeId(j), &reached_j, &pos_j);
                    return Injectivity::Collision {
                        a: tree.point_on_edge_unchecked(EdgeId(i), ti),
                        b: tree.point_on_edge_unchecked(EdgeId(j), tj),
                    };
                }
            }
        }
        Injectivity::Injective
    }

    pub fn is_injective(&self) -> bool {
        matches!(self.injectivity(), Injectivity::Injective)
    }

    fn reach_table(&self, e: EdgeId) -> Vec<S> {
        let knots = &self.pieces[e.0];
        knots.iter().map(|k| self.tree.distance(&knots[0].image, &k.image)).collect()
    }

    /// Edge parameter at which a geodesic edge walk has travelled `dist`.
    fn param_at_reach(&self, e: EdgeId, reached: &[S], dist: &S) -> S {
        let knots = &self.pieces[e.0];
        for j in 0..reached.len() - 1 {
            if *dist <= reached[j + 1] {
                let span = reached[j + 1].clone() - reached[j].clone();
                let frac = (dist.clone() - reached[j].clone()) / span;
                return knots[j].t.clone() + frac * (knots[j + 1].t.clone() - knots[j].t.clone());
            }
        }
        knots[reached.len() - 1].t.clone()
    }

    /// Closed set of fixed points, solved piece by piece.
    pub fn fixed_points(&self) -> Subtree<S> {
        fixed::fixed_points(self)
    }
}

fn mergeable<S: Scalar>(tree: &MetricTree<S>, a: &Knot<S>, b: &Knot<S>, c: &Knot<S>) -> bool {
    let d_ab = tree.distance(&a.image, &b.image);
    let d_bc = tree.distance(&b.image, &c.image);
    let d_ac = tree.distance(&a.image, &c.image);
    d_ab.clone() + d_bc.clone() == d_ac
        && d_ab * (c.t.clone() - b.t.clone()) == d_bc * (b.t.clone() - a.t.clone())
}
