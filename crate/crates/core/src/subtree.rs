//! Closed subsets of a tree made of vertices and edge sub-intervals.
//!
//! [`Subtree`] is the workhorse set type: hulls, retraction targets, fixed
//! sets, and images of arcs all live here. Most producers yield connected
//! sets; fixed sets of arbitrary maps may not be, which is why connectivity
//! is a query rather than a type-level guarantee.

use std::collections::{BTreeMap, BTreeSet};

use crate::arc::Arc;
use crate::error::{precondition, structural, Result};
use crate::scalar::{self, Scalar};
use crate::tree::{EdgeId, MetricTree, TreePoint, VertexId};

/// A closed subset: a vertex set plus closed parameter intervals per edge.
///
/// Normal form: intervals on each edge are sorted, pairwise disjoint and
/// non-touching; an interval reaching parameter 0 or 1 implies the matching
/// end vertex is in `vertices`; degenerate intervals at 0 or 1 are dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct Subtree<S> {
    vertices: BTreeSet<VertexId>,
    parts: BTreeMap<EdgeId, Vec<(S, S)>>,
}

impl<S: Scalar> Default for Subtree<S> {
    fn default() -> Self {
        Self::empty()
    }
}

#[derive(Debug)]
struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut c = x;
        while self.0[c] != r {
            let next = self.0[c];
            self.0[c] = r;
            c = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Collects raw pieces and normalizes them into a [`Subtree`].
#[derive(Debug, Clone)]
pub struct SubtreeBuilder<S> {
    vertices: BTreeSet<VertexId>,
    parts: BTreeMap<EdgeId, Vec<(S, S)>>,
}

impl<S: Scalar> Default for SubtreeBuilder<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: Scalar> SubtreeBuilder<S> {
    pub fn new() -> Self {
        SubtreeBuilder { vertices: BTreeSet::new(), parts: BTreeMap::new() }
    }

    pub fn add_vertex(&mut self, v: VertexId) -> &mut Self {
        self.vertices.insert(v);
        self
    }

    pub fn add_point(&mut self, p: &TreePoint<S>) -> &mut Self {
        match p {
            TreePoint::Vertex(v) => self.add_vertex(*v),
            TreePoint::Edge { edge, t } => self.add_interval(*edge, t.clone(), t.clone()),
        }
    }

    /// Adds `[lo, hi]` (in either order) on edge `e`.
    pub fn add_interval(&mut self, e: EdgeId, a: S, b: S) -> &mut Self {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        self.parts.entry(e).or_default().push((lo, hi));
        self
    }

    pub fn add_arc(&mut self, arc: &Arc<S>) -> &mut Self {
        self.add_point(arc.start());
        self.add_point(arc.end());
        for seg in arc.segments() {
            self.add_interval(seg.edge, seg.from.clone(), seg.to.clone());
        }
        self
    }

    pub fn add_set(&mut self, set: &Subtree<S>) -> &mut Self {
        self.vertices.extend(set.vertices.iter().copied());
        for (e, ivs) in &set.parts {
            self.parts.entry(*e).or_default().extend(ivs.iter().cloned());
        }
        self
    }

    pub fn finish(self, tree: &MetricTree<S>) -> Subtree<S> {
        let mut vertices = self.vertices;
        let mut parts = BTreeMap::new();
        for (e, mut ivs) in self.parts {
            ivs.sort_by(|a, b| scalar::cmp(&a.0, &b.0));
            let mut merged: Vec<(S, S)> = Vec::new();
            for (lo, hi) in ivs {
                match merged.last_mut() {
                    Some(last) if lo <= last.1 => {
                        if hi > last.1 {
                            last.1 = hi;
                        }
                    }
                    _ => merged.push((lo, hi)),
                }
            }
            let ends = tree.edge(e).ends;
            let mut kept = Vec::new();
            for (lo, hi) in merged {
                if lo.is_zero() {
                    vertices.insert(ends[0]);
                }
                if hi == S::one() {
                    vertices.insert(ends[1]);
                }
                let degenerate_end = lo == hi && (lo.is_zero() || lo == S::one());
                if !degenerate_end {
                    kept.push((lo, hi));
                }
            }
            if !kept.is_empty() {
                parts.insert(e, kept);
            }
        }
        Subtree { vertices, parts }
    }
}

impl<S: Scalar> Subtree<S> {
    pub fn empty() -> Self {
        Subtree { vertices: BTreeSet::new(), parts: BTreeMap::new() }
    }

    pub fn point(tree: &MetricTree<S>, p: &TreePoint<S>) -> Self {
        let mut b = SubtreeBuilder::new();
        b.add_point(p);
        b.finish(tree)
    }

    pub fn full(tree: &MetricTree<S>) -> Self {
        let mut b = SubtreeBuilder::new();
        for e in tree.edge_ids() {
            b.add_interval(e, S::zero(), S::one());
        }
        b.finish(tree)
    }

    pub fn from_arc(tree: &MetricTree<S>, arc: &Arc<S>) -> Self {
        let mut b = SubtreeBuilder::new();
        b.add_arc(arc);
        b.finish(tree)
    }

    pub fn from_points(tree: &MetricTree<S>, pts: &[TreePoint<S>]) -> Self {
        let mut b = SubtreeBuilder::new();
        for p in pts {
            b.add_point(p);
        }
        b.finish(tree)
    }

    /// Closed ball `{x : d(p, x) ≤ r}`.
    pub fn ball(tree: &MetricTree<S>, p: &TreePoint<S>, r: &S) -> Self {
        let mut b = SubtreeBuilder::new();
        b.add_point(p);
        for e in tree.edge_ids() {
            let edge = tree.edge(e);
            let len = &edge.length;
            let (lo, hi) = match p {
                TreePoint::Edge { edge: pe, t } if *pe == e => {
                    let w = r.clone() / len.clone();
                    (t.clone() - w.clone(), t.clone() + w)
                }
                _ => {
                    let da = tree.distance(p, &TreePoint::Vertex(edge.ends[0]));
                    let db = tree.distance(p, &TreePoint::Vertex(edge.ends[1]));
                    if da <= db {
                        if *r < da {
                            continue;
                        }
                        (S::zero(), (r.clone() - da) / len.clone())
                    } else {
                        if *r < db {
                            continue;
                        }
                        (S::one() - (r.clone() - db) / len.clone(), S::one())
                    }
                }
            };
            let lo = scalar::max(&lo, &S::zero());
            let hi = scalar::min(&hi, &S::one());
            b.add_interval(e, lo, hi);
        }
        b.finish(tree)
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty() && self.parts.is_empty()
    }

    pub fn vertices(&self) -> &BTreeSet<VertexId> {
        &self.vertices
    }

    /// Per-edge closed parameter intervals.
    pub fn parts(&self) -> &BTreeMap<EdgeId, Vec<(S, S)>> {
        &self.parts
    }

    pub fn whole_edges(&self) -> Vec<EdgeId> {
        self.parts
            .iter()
            .filter(|(_, ivs)| ivs.len() == 1 && ivs[0].0.is_zero() && ivs[0].1 == S::one())
            .map(|(e, _)| *e)
            .collect()
    }

    pub fn is_full(&self, tree: &MetricTree<S>) -> bool {
        self.whole_edges().len() == tree.edge_count()
    }

    pub fn contains(&self, p: &TreePoint<S>) -> bool {
        match p {
            TreePoint::Vertex(v) => self.vertices.contains(v),
            TreePoint::Edge { edge, t } => self
                .parts
                .get(edge)
                .is_some_and(|ivs| ivs.iter().any(|(lo, hi)| lo <= t && t <= hi)),
        }
    }

    pub fn union(&self, tree: &MetricTree<S>, other: &Subtree<S>) -> Subtree<S> {
        let mut b = SubtreeBuilder::new();
        b.add_set(self).add_set(other);
        b.finish(tree)
    }

    pub fn intersection(&self, tree: &MetricTree<S>, other: &Subtree<S>) -> Subtree<S> {
        let mut b = SubtreeBuilder::new();
        for v in self.vertices.intersection(&other.vertices) {
            b.add_vertex(*v);
        }
        for (e, ivs) in &self.parts {
            if let Some(others) = other.parts.get(e) {
                for (lo, hi) in ivs {
                    for (olo, ohi) in others {
                        let l = scalar::max(lo, olo);
                        let h = scalar::min(hi, ohi);
                        if l <= h {
                            b.add_interval(*e, l, h);
                        }
                    }
                }
            }
        }
        b.finish(tree)
    }

    pub fn is_subset(&self, other: &Subtree<S>) -> bool {
        self.vertices.is_subset(&other.vertices)
            && self.parts.iter().all(|(e, ivs)| {
                let Some(others) = other.parts.get(e) else { return false };
                ivs.iter()
                    .all(|(lo, hi)| others.iter().any(|(olo, ohi)| olo <= lo && hi <= ohi))
            })
    }

    /// One canonical point per vertex, per interval end, and per interval
    /// midpoint, in a deterministic order.
    pub fn sample_points(&self, tree: &MetricTree<S>) -> Vec<TreePoint<S>> {
        let mut out: Vec<TreePoint<S>> = self.vertices.iter().map(|v| TreePoint::Vertex(*v)).collect();
        for (e, ivs) in &self.parts {
            for (lo, hi) in ivs {
                let mid = (lo.clone() + hi.clone()) * S::half();
                for t in [lo.clone(), mid, hi.clone()] {
                    let p = tree.point_on_edge_unchecked(*e, t);
                    if !out.contains(&p) {
                        out.push(p);
                    }
                }
            }
        }
        out
    }

    /// Vertices and interval endpoints; every extreme point of the set is
    /// among them.
    pub fn corner_points(&self, tree: &MetricTree<S>) -> Vec<TreePoint<S>> {
        let mut out: Vec<TreePoint<S>> = self.vertices.iter().map(|v| TreePoint::Vertex(*v)).collect();
        for (e, ivs) in &self.parts {
            for (lo, hi) in ivs {
                for t in [lo, hi] {
                    let p = tree.point_on_edge_unchecked(*e, t.clone());
                    if !out.contains(&p) {
                        out.push(p);
                    }
                }
            }
        }
        out
    }

    /// Largest distance between two points of the set.
    pub fn diameter(&self, tree: &MetricTree<S>) -> S {
        let pts = self.corner_points(tree);
        let mut best = S::zero();
        for (i, a) in pts.iter().enumerate() {
            for b in &pts[i + 1..] {
                let d = tree.distance(a, b);
                if d > best {
                    best = d;
                }
            }
        }
        best
    }

    pub fn total_length(&self, tree: &MetricTree<S>) -> S {
        let mut total = S::zero();
        for (e, ivs) in &self.parts {
            for (lo, hi) in ivs {
                total = total + (hi.clone() - lo.clone()) * tree.edge(*e).length.clone();
            }
        }
        total
    }

    fn piece_index(&self) -> (Vec<VertexId>, Vec<(EdgeId, S, S)>) {
        let verts: Vec<VertexId> = self.vertices.iter().copied().collect();
        let mut ivs = Vec::new();
        for (e, list) in &self.parts {
            for (lo, hi) in list {
                ivs.push((*e, lo.clone(), hi.clone()));
            }
        }
        (verts, ivs)
    }

    /// Connected components, each itself in normal form.
    pub fn components(&self, tree: &MetricTree<S>) -> Vec<Subtree<S>> {
        let (verts, ivs) = self.piece_index();
        let nv = verts.len();
        let mut uf = UnionFind::new(nv + ivs.len());
        let vindex: BTreeMap<VertexId, usize> = verts.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        for (j, (e, lo, hi)) in ivs.iter().enumerate() {
            let ends = tree.edge(*e).ends;
            if lo.is_zero() {
                uf.union(nv + j, vindex[&ends[0]]);
            }
            if *hi == S::one() {
                uf.union(nv + j, vindex[&ends[1]]);
            }
        }
        // A full edge whose ends are both present is covered above; a vertex
        // pair joined by an edge with no interval is not connected.
        let mut groups: BTreeMap<usize, SubtreeBuilder<S>> = BTreeMap::new();
        for (i, v) in verts.iter().enumerate() {
            let r = uf.find(i);
            groups.entry(r).or_default().add_vertex(*v);
        }
        for (j, (e, lo, hi)) in ivs.into_iter().enumerate() {
            let r = uf.find(nv + j);
            groups.entry(r).or_default().add_interval(e, lo, hi);
        }
        groups.into_values().map(|b| b.finish(tree)).collect()
    }

    pub fn is_connected(&self, tree: &MetricTree<S>) -> bool {
        !self.is_empty() && self.components(tree).len() == 1
    }

    /// Arclength position intervals along `arc` where the arc meets the set.
    pub fn arc_positions(&self, tree: &MetricTree<S>, arc: &Arc<S>) -> Vec<(S, S)> {
        let mut hits: Vec<(S, S)> = Vec::new();
        if arc.is_degenerate() {
            if self.contains(arc.start()) {
                hits.push((S::zero(), S::zero()));
            }
            return hits;
        }
        for (i, seg) in arc.segments().iter().enumerate() {
            let off = arc.offset(i);
            let len = &tree.edge(seg.edge).length;
            let pos = |u: &S| off.clone() + (u.clone() - seg.from.clone()).abs() * len.clone();
            let start = tree.point_on_edge_unchecked(seg.edge, seg.from.clone());
            if start.is_vertex() && self.contains(&start) {
                hits.push((off.clone(), off.clone()));
            }
            let end = tree.point_on_edge_unchecked(seg.edge, seg.to.clone());
            if end.is_vertex() && self.contains(&end) {
                let p = off.clone() + arc.segment_length(i).clone();
                hits.push((p.clone(), p));
            }
            if let Some(ivs) = self.parts.get(&seg.edge) {
                for (lo, hi) in ivs {
                    let l = scalar::max(lo, seg.lo());
                    let h = scalar::min(hi, seg.hi());
                    if l <= h {
                        let (a, b) = (pos(&l), pos(&h));
                        hits.push(if a <= b { (a, b) } else { (b, a) });
                    }
                }
            }
        }
        hits.sort_by(|a, b| scalar::cmp(&a.0, &b.0));
        let mut merged: Vec<(S, S)> = Vec::new();
        for (a, b) in hits {
            match merged.last_mut() {
                Some(last) if a <= last.1 => {
                    if b > last.1 {
                        last.1 = b;
                    }
                }
                _ => merged.push((a, b)),
            }
        }
        merged
    }

    /// Components of the open complement `X ∖ self`.
    pub fn complement_components(&self, tree: &MetricTree<S>) -> Vec<OpenComponent<S>> {
        struct Gap<S> {
            edge: EdgeId,
            a: S,
            b: S,
            left_vertex: Option<VertexId>,
            right_vertex: Option<VertexId>,
        }
        let outside: Vec<VertexId> = tree.vertices().filter(|v| !self.vertices.contains(v)).collect();
        let mut gaps: Vec<Gap<S>> = Vec::new();
        for e in tree.edge_ids() {
            let ends = tree.edge(e).ends;
            let mut blocks: Vec<(S, S)> = Vec::new();
            if self.vertices.contains(&ends[0]) {
                blocks.push((S::zero(), S::zero()));
            }
            if let Some(ivs) = self.parts.get(&e) {
                blocks.extend(ivs.iter().cloned());
            }
            if self.vertices.contains(&ends[1]) {
                blocks.push((S::one(), S::one()));
            }
            let mut cursor = S::zero();
            let mut left = (!self.vertices.contains(&ends[0])).then_some(ends[0]);
            for (lo, hi) in blocks {
                if cursor < lo {
                    gaps.push(Gap { edge: e, a: cursor.clone(), b: lo.clone(), left_vertex: left, right_vertex: None });
                }
                left = None;
                if hi > cursor {
                    cursor = hi;
                }
            }
            if cursor < S::one() {
                let right = (!self.vertices.contains(&ends[1])).then_some(ends[1]);
                gaps.push(Gap { edge: e, a: cursor, b: S::one(), left_vertex: left, right_vertex: right });
            }
        }

        let nv = outside.len();
        let vindex: BTreeMap<VertexId, usize> = outside.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let mut uf = UnionFind::new(nv + gaps.len());
        for (j, g) in gaps.iter().enumerate() {
            for v in [g.left_vertex, g.right_vertex].into_iter().flatten() {
                uf.union(nv + j, vindex[&v]);
            }
        }

        // Per component: closure builder, boundary points, representative.
        type Group<S> = (SubtreeBuilder<S>, Vec<TreePoint<S>>, Option<TreePoint<S>>);
        let mut groups: BTreeMap<usize, Group<S>> = BTreeMap::new();
        for (i, v) in outside.iter().enumerate() {
            let r = uf.find(i);
            let entry = groups.entry(r).or_insert_with(|| (SubtreeBuilder::new(), Vec::new(), None));
            entry.0.add_vertex(*v);
            if entry.2.is_none() {
                entry.2 = Some(TreePoint::Vertex(*v));
            }
        }
        for (j, g) in gaps.into_iter().enumerate() {
            let r = uf.find(nv + j);
            let entry = groups.entry(r).or_insert_with(|| (SubtreeBuilder::new(), Vec::new(), None));
            let mid = (g.a.clone() + g.b.clone()) * S::half();
            if entry.2.is_none() {
                entry.2 = Some(tree.point_on_edge_unchecked(g.edge, mid));
            }
            if g.left_vertex.is_none() {
                let p = tree.point_on_edge_unchecked(g.edge, g.a.clone());
                if !entry.1.contains(&p) {
                    entry.1.push(p);
                }
            }
            if g.right_vertex.is_none() {
                let p = tree.point_on_edge_unchecked(g.edge, g.b.clone());
                if !entry.1.contains(&p) {
                    entry.1.push(p);
                }
            }
            entry.0.add_interval(g.edge, g.a, g.b);
        }
        groups
            .into_values()
            .map(|(b, mut boundary, rep)| {
                boundary.sort_by(|x, y| x.sort_key_cmp(y));
                OpenComponent {
                    closure: b.finish(tree),
                    boundary,
                    representative: rep.expect("component is non-empty"),
                }
            })
            .collect()
    }
}

/// A component of the complement of a closed set: `closure ∖ boundary`.
#[derive(Debug, Clone, PartialEq)]
pub struct OpenComponent<S> {
    pub closure: Subtree<S>,
    pub boundary: Vec<TreePoint<S>>,
    representative: TreePoint<S>,
}

impl<S: Scalar> OpenComponent<S> {
    pub fn contains(&self, p: &TreePoint<S>) -> bool {
        self.closure.contains(p) && !self.boundary.contains(p)
    }

    /// The unique boundary point, when the removed set was connected.
    pub fn attachment(&self) -> Option<&TreePoint<S>> {
        match self.boundary.as_slice() {
            [p] => Some(p),
            _ => None,
        }
    }

    /// A point strictly inside the component.
    pub fn representative(&self) -> &TreePoint<S> {
        &self.representative
    }

    /// Deterministic ordering key: the smallest edge met, then the lowest
    /// parameter on it.
    pub(crate) fn order_cmp(&self, other: &Self) -> std::cmp::Ordering {
        let key = |c: &Self| c.closure.parts.iter().next().map(|(e, ivs)| (*e, ivs[0].0.clone()));
        match (key(self), key(other)) {
            (Some((e, a)), Some((f, b))) => e.cmp(&f).then_with(|| scalar::cmp(&a, &b)),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => std::cmp::Ordering::Equal,
        }
    }
}

/// Components of `X ∖ {x}`; each closure is the component plus `x`.
pub fn components_minus_point<S: Scalar>(
    tree: &MetricTree<S>,
    x: &TreePoint<S>,
) -> Result<Vec<OpenComponent<S>>> {
    tree.validate_point(x)?;
    Ok(Subtree::point(tree, x).complement_components(tree))
}

/// The smallest connected set containing `points`.
pub fn connected_hull<S: Scalar>(tree: &MetricTree<S>, points: &[TreePoint<S>]) -> Result<Subtree<S>> {
    let Some(first) = points.first() else {
        return Err(precondition("connected hull of an empty set"));
    };
    let mut b = SubtreeBuilder::new();
    b.add_point(first);
    for p in &points[1..] {
        b.add_arc(&tree.arc(first, p)?);
    }
    Ok(b.finish(tree))
}

/// First-point retraction `p_Y(z)` onto a non-empty connected closed set.
pub fn retract<S: Scalar>(tree: &MetricTree<S>, y: &Subtree<S>, z: &TreePoint<S>) -> Result<TreePoint<S>> {
    tree.validate_point(z)?;
    if !y.is_connected(tree) {
        return Err(structural("retraction target must be non-empty and connected"));
    }
    Ok(retract_unchecked(tree, y, z))
}

pub(crate) fn retract_unchecked<S: Scalar>(tree: &MetricTree<S>, y: &Subtree<S>, z: &TreePoint<S>) -> TreePoint<S> {
    if y.contains(z) {
        return z.clone();
    }
    let anchor = y.corner_points(tree).into_iter().next().expect("non-empty set");
    let arc = Arc::between(tree, z, &anchor);
    let hits = y.arc_positions(tree, &arc);
    arc.point_at(tree, &hits[0].0)
}
