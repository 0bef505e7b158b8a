//! Arcs: the unique embedded path between two points of a tree.

use crate::scalar::Scalar;
use crate::tree::{EdgeId, MetricTree, TreePoint};

/// A maximal straight run of an arc inside one edge, in edge parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment<S> {
    pub edge: EdgeId,
    pub from: S,
    pub to: S,
}

impl<S: Scalar> Segment<S> {
    pub fn lo(&self) -> &S {
        if self.from <= self.to { &self.from } else { &self.to }
    }

    pub fn hi(&self) -> &S {
        if self.from <= self.to { &self.to } else { &self.from }
    }

    pub fn ascending(&self) -> bool {
        self.from <= self.to
    }
}

/// The arc `[start, end]` with its ordered traversal.
///
/// Segments are simple (no edge repeats) and consecutive segments meet at a
/// vertex. A degenerate arc has no segments and length zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Arc<S> {
    start: TreePoint<S>,
    end: TreePoint<S>,
    segments: Vec<Segment<S>>,
    offsets: Vec<S>,
    seg_lengths: Vec<S>,
    length: S,
}

impl<S: Scalar> Arc<S> {
    pub(crate) fn between(tree: &MetricTree<S>, a: &TreePoint<S>, b: &TreePoint<S>) -> Self {
        let mut segments = Vec::new();
        if a != b {
            match (a, b) {
                (TreePoint::Edge { edge: e, t: s }, TreePoint::Edge { edge: f, t }) if e == f => {
                    segments.push(Segment { edge: *e, from: s.clone(), to: t.clone() });
                }
                _ => Self::route(tree, a, b, &mut segments),
            }
        }
        Self::from_segments(tree, a.clone(), b.clone(), segments)
    }

    fn route(tree: &MetricTree<S>, a: &TreePoint<S>, b: &TreePoint<S>, out: &mut Vec<Segment<S>>) {
        let anchor = |p: &TreePoint<S>| match p {
            TreePoint::Vertex(v) => *v,
            TreePoint::Edge { edge, .. } => tree.edge(*edge).ends[0],
        };
        let path = tree.vertex_path(anchor(a), anchor(b));
        let mut steps: &[_] = &path;
        let mut current = anchor(a);

        if let TreePoint::Edge { edge, t } = a {
            let ends = tree.edge(*edge).ends;
            if steps.first().map(|s| s.0) == Some(*edge) {
                steps = &steps[1..];
                out.push(Segment { edge: *edge, from: t.clone(), to: S::one() });
                current = ends[1];
            } else {
                out.push(Segment { edge: *edge, from: t.clone(), to: S::zero() });
                current = ends[0];
            }
        }

        let mut tail = None;
        if let TreePoint::Edge { edge, t } = b {
            if steps.last().map(|s| s.0) == Some(*edge) {
                steps = &steps[..steps.len() - 1];
                tail = Some(Segment { edge: *edge, from: S::one(), to: t.clone() });
            } else {
                tail = Some(Segment { edge: *edge, from: S::zero(), to: t.clone() });
            }
        }

        for &(e, next) in steps {
            let ends = tree.edge(e).ends;
            if ends[0] == current {
                out.push(Segment { edge: e, from: S::zero(), to: S::one() });
            } else {
                out.push(Segment { edge: e, from: S::one(), to: S::zero() });
            }
            current = next;
        }
        out.extend(tail);
    }

    fn from_segments(
        tree: &MetricTree<S>,
        start: TreePoint<S>,
        end: TreePoint<S>,
        segments: Vec<Segment<S>>,
    ) -> Self {
        let mut offsets = Vec::with_capacity(segments.len());
        let mut seg_lengths = Vec::with_capacity(segments.len());
        let mut length = S::zero();
        for s in &segments {
            offsets.push(length.clone());
            let l = (s.to.clone() - s.from.clone()).abs() * tree.edge(s.edge).length.clone();
            length = length + l.clone();
            seg_lengths.push(l);
        }
        Arc { start, end, segments, offsets, seg_lengths, length }
    }

    pub fn start(&self) -> &TreePoint<S> {
        &self.start
    }

    pub fn end(&self) -> &TreePoint<S> {
        &self.end
    }

    pub fn segments(&self) -> &[Segment<S>] {
        &self.segments
    }

    pub fn length(&self) -> &S {
        &self.length
    }

    pub fn is_degenerate(&self) -> bool {
        self.segments.is_empty()
    }

    /// Arclength offset at which segment `i` begins.
    pub fn offset(&self, i: usize) -> &S {
        &self.offsets[i]
    }

    pub fn segment_length(&self, i: usize) -> &S {
        &self.seg_lengths[i]
    }

    /// The point at arclength `s` from `start`, clamped to `[0, length]`.
    pub fn point_at(&self, tree: &MetricTree<S>, s: &S) -> TreePoint<S> {
        if *s <= S::zero() {
            return self.start.clone();
        }
        if *s >= self.length {
            return self.end.clone();
        }
        for (i, seg) in self.segments.iter().enumerate() {
            let off = &self.offsets[i];
            if *s <= off.clone() + self.seg_lengths[i].clone() {
                let len = &tree.edge(seg.edge).length;
                let delta = (s.clone() - off.clone()) / len.clone();
                let u = if seg.ascending() { seg.from.clone() + delta } else { seg.from.clone() - delta };
                return tree.point_on_edge_unchecked(seg.edge, u);
            }
        }
        self.end.clone()
    }

    /// Arclength position of `p` along the arc, if `p` lies on it.
    pub fn position_of(&self, tree: &MetricTree<S>, p: &TreePoint<S>) -> Option<S> {
        if *p == self.start {
            return Some(S::zero());
        }
        if *p == self.end {
            return Some(self.length.clone());
        }
        for (i, seg) in self.segments.iter().enumerate() {
            match p {
                TreePoint::Vertex(_) => {
                    if tree.point_on_edge_unchecked(seg.edge, seg.to.clone()) == *p {
                        return Some(self.offsets[i].clone() + self.seg_lengths[i].clone());
                    }
                }
                TreePoint::Edge { edge, t } => {
                    if *edge == seg.edge && seg.lo() <= t && t <= seg.hi() {
                        let d = (t.clone() - seg.from.clone()).abs() * tree.edge(*edge).length.clone();
                        return Some(self.offsets[i].clone() + d);
                    }
                }
            }
        }
        None
    }

    pub fn contains(&self, tree: &MetricTree<S>, p: &TreePoint<S>) -> bool {
        self.position_of(tree, p).is_some()
    }

    /// Sub-arc between two positions `s ≤ r`.
    pub fn sub_arc(&self, tree: &MetricTree<S>, s: &S, r: &S) -> Arc<S> {
        let a = self.point_at(tree, s);
        let b = self.point_at(tree, r);
        Arc::between(tree, &a, &b)
    }

    /// Vertices met strictly inside the traversal, with their positions.
    pub fn interior_vertices(&self, tree: &MetricTree<S>) -> Vec<(S, TreePoint<S>)> {
        let mut out = Vec::new();
        if self.segments.len() < 2 {
            return out;
        }
        for (i, seg) in self.segments[..self.segments.len() - 1].iter().enumerate() {
            out.push((
                self.offsets[i].clone() + self.seg_lengths[i].clone(),
                tree.point_on_edge_unchecked(seg.edge, seg.to.clone()),
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{TreeBuilder, VertexId};
    use num_rational::BigRational;
    use std::collections::VecDeque;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::from_ratio(n, d)
    }

    fn path3() -> MetricTree<Q> {
        let mut b = TreeBuilder::new();
        let v0 = b.vertex("v0");
        let v1 = b.vertex("v1");
        let v2 = b.vertex("v2");
        b.edge("e01", v0, v1, q(1, 1));
        b.edge("e12", v1, v2, q(1, 1));
        b.build().unwrap()
    }

    fn star3() -> MetricTree<Q> {
        let mut b = TreeBuilder::new();
        let c = b.vertex("c");
        for name in ["a", "b", "d"] {
            let leaf = b.vertex(name);
            b.edge(format!("c{name}"), c, leaf, q(1, 1));
        }
        b.build().unwrap()
    }

    /// Breadth-first search over the vertex graph; independent of the
    /// parent-pointer routing used by `Arc::between`.
    fn bfs_edges(tree: &MetricTree<Q>, from: VertexId, to: VertexId) -> Vec<EdgeId> {
        let mut prev = vec![None; tree.vertex_count()];
        let mut seen = vec![false; tree.vertex_count()];
        seen[from.0] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            for &(e, w) in tree.neighbors(v) {
                if !seen[w.0] {
                    seen[w.0] = true;
                    prev[w.0] = Some((e, v));
                    queue.push_back(w);
                }
            }
        }
        let mut out = Vec::new();
        let mut cur = to;
        while let Some((e, p)) = prev[cur.0] {
            out.push(e);
            cur = p;
        }
        out.reverse();
        out
    }

    #[test]
    fn path_arc_is_whole_path() {
        let t = path3();
        let arc = t.arc(&TreePoint::Vertex(VertexId(0)), &TreePoint::Vertex(VertexId(2))).unwrap();
        assert_eq!(arc.length(), &q(2, 1));
        assert_eq!(
            arc.segments(),
            &[
                Segment { edge: EdgeId(0), from: q(0, 1), to: q(1, 1) },
                Segment { edge: EdgeId(1), from: q(0, 1), to: q(1, 1) },
            ]
        );
    }

    #[test]
    fn degenerate_arc() {
        let t = path3();
        let x = t.midpoint(EdgeId(1));
        let arc = t.arc(&x, &x).unwrap();
        assert!(arc.is_degenerate());
        assert_eq!(arc.length(), &q(0, 1));
        assert!(arc.contains(&t, &x));
    }

    #[test]
    fn star_leaf_to_leaf_matches_bfs() {
        let t = star3();
        let a = VertexId(1);
        let b = VertexId(2);
        let arc = t.arc(&TreePoint::Vertex(a), &TreePoint::Vertex(b)).unwrap();
        let edges: Vec<EdgeId> = arc.segments().iter().map(|s| s.edge).collect();
        assert_eq!(edges, bfs_edges(&t, a, b));
        assert_eq!(arc.length(), &q(2, 1));
        assert!(arc.contains(&t, &TreePoint::Vertex(VertexId(0))));
    }

    #[test]
    fn interior_edge_points() {
        let t = path3();
        let a = t.point_on_edge(EdgeId(0), q(1, 4)).unwrap();
        let b = t.point_on_edge(EdgeId(1), q(1, 2)).unwrap();
        let arc = t.arc(&a, &b).unwrap();
        assert_eq!(arc.length(), &q(5, 4));
        assert_eq!(arc.point_at(&t, &q(3, 4)), TreePoint::Vertex(VertexId(1)));
        assert_eq!(arc.position_of(&t, &TreePoint::Vertex(VertexId(1))), Some(q(3, 4)));
        assert_eq!(arc.position_of(&t, &TreePoint::Vertex(VertexId(0))), None);

        let back = t.arc(&b, &a).unwrap();
        assert_eq!(back.point_at(&t, &q(1, 4)), t.point_on_edge(EdgeId(1), q(1, 4)).unwrap());
    }

    #[test]
    fn same_edge_reversed() {
        let t = path3();
        let a = t.point_on_edge(EdgeId(1), q(3, 4)).unwrap();
        let b = t.point_on_edge(EdgeId(1), q(1, 4)).unwrap();
        let arc = t.arc(&a, &b).unwrap();
        assert_eq!(arc.length(), &q(1, 2));
        assert_eq!(arc.point_at(&t, &q(1, 4)), t.midpoint(EdgeId(1)));
    }
}
