//! Finite metric trees and their points.

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use crate::arc::Arc;
use crate::error::{precondition, structural, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct VertexId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct EdgeId(pub usize);

#[derive(Debug, Clone, PartialEq)]
pub struct Edge<S> {
    pub name: String,
    pub ends: [VertexId; 2],
    pub length: S,
}

/// A point of a metric tree.
///
/// Edge positions are parametrized by `t` in the open interval `(0, 1)`,
/// measured from `ends[0]`. The values 0 and 1 are always stored in vertex
/// form, so structural equality coincides with equality of points.
#[derive(Debug, Clone, PartialEq)]
pub enum TreePoint<S> {
    Vertex(VertexId),
    Edge { edge: EdgeId, t: S },
}

impl<S: Scalar> TreePoint<S> {
    pub fn is_vertex(&self) -> bool {
        matches!(self, TreePoint::Vertex(_))
    }

    /// Deterministic total order used for sorting point lists.
    pub fn sort_key_cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match (self, other) {
            (TreePoint::Vertex(a), TreePoint::Vertex(b)) => a.cmp(b),
            (TreePoint::Vertex(_), TreePoint::Edge { .. }) => Ordering::Less,
            (TreePoint::Edge { .. }, TreePoint::Vertex(_)) => Ordering::Greater,
            (TreePoint::Edge { edge: e, t: s }, TreePoint::Edge { edge: f, t }) => {
                e.cmp(f).then_with(|| crate::scalar::cmp(s, t))
            }
        }
    }
}

/// Total order on points for use as map keys; not the geometric order.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct OrdPoint<S>(pub TreePoint<S>);

impl<S: Scalar> Eq for OrdPoint<S> {}

impl<S: Scalar> PartialOrd for OrdPoint<S> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl<S: Scalar> Ord for OrdPoint<S> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match (&self.0, &other.0) {
            (TreePoint::Vertex(a), TreePoint::Vertex(b)) => a.cmp(b),
            (TreePoint::Vertex(_), TreePoint::Edge { .. }) => Ordering::Less,
            (TreePoint::Edge { .. }, TreePoint::Vertex(_)) => Ordering::Greater,
            (TreePoint::Edge { edge: e, t: s }, TreePoint::Edge { edge: f, t }) => {
                e.cmp(f).then_with(|| s.structural_cmp(t))
            }
        }
    }
}

/// Point class by the number of components of the complement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PointClass {
    Endpoint,
    Cutpoint,
    Branchpoint,
}

impl PointClass {
    pub fn from_order(order: usize) -> Self {
        match order {
            0 | 1 => PointClass::Endpoint,
            2 => PointClass::Cutpoint,
            _ => PointClass::Branchpoint,
        }
    }

    /// Branchpoints are cutpoints too.
    pub fn is_cutpoint(self) -> bool {
        self != PointClass::Endpoint
    }
}

/// A finite tree whose edges carry exact positive lengths.
#[derive(Debug, Clone)]
pub struct MetricTree<S> {
    vertex_names: Vec<String>,
    edges: Vec<Edge<S>>,
    adjacency: Vec<Vec<(EdgeId, VertexId)>>,
    parent: Vec<Option<(EdgeId, VertexId)>>,
    depth: Vec<usize>,
}

impl<S: Scalar> PartialEq for MetricTree<S> {
    fn eq(&self, other: &Self) -> bool {
        self.vertex_names == other.vertex_names && self.edges == other.edges
    }
}

/// Incremental constructor used by fixtures and parsers.
#[derive(Debug, Clone, Default)]
pub struct TreeBuilder<S> {
    vertices: Vec<String>,
    edges: Vec<(String, VertexId, VertexId, S)>,
}

impl<S: Scalar> TreeBuilder<S> {
    pub fn new() -> Self {
        TreeBuilder { vertices: Vec::new(), edges: Vec::new() }
    }

    pub fn vertex(&mut self, name: impl Into<String>) -> VertexId {
        self.vertices.push(name.into());
        VertexId(self.vertices.len() - 1)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge(&mut self, name: impl Into<String>, a: VertexId, b: VertexId, length: S) -> EdgeId {
        self.edges.push((name.into(), a, b, length));
        EdgeId(self.edges.len() - 1)
    }

    pub fn build(self) -> Result<MetricTree<S>> {
        MetricTree::from_parts(
            self.vertices,
            self.edges
                .into_iter()
                .map(|(name, a, b, length)| Edge { name, ends: [a, b], length })
                .collect(),
        )
    }
}

impl<S: Scalar> MetricTree<S> {
    /// Validates and indexes a tree. Requires at least one edge.
    pub fn from_parts(vertex_names: Vec<String>, edges: Vec<Edge<S>>) -> Result<Self> {
        let n = vertex_names.len();
        let unique: BTreeSet<&String> = vertex_names.iter().collect();
        if unique.len() != n {
            return Err(structural("duplicate vertex id"));
        }
        let edge_names: BTreeSet<&String> = edges.iter().map(|e| &e.name).collect();
        if edge_names.len() != edges.len() {
            return Err(structural("duplicate edge id"));
        }
        if edges.is_empty() {
            return Err(structural("a tree needs at least one edge"));
        }
        if edges.len() + 1 != n {
            return Err(structural(format!(
                "{} vertices and {} edges cannot form a tree",
                n,
                edges.len()
            )));
        }
        let mut adjacency = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            let [a, b] = e.ends;
            if a.0 >= n || b.0 >= n {
                return Err(structural(format!("edge {} references a missing vertex", e.name)));
            }
            if a == b {
                return Err(structural(format!("edge {} is a loop", e.name)));
            }
            if e.length <= S::zero() {
                return Err(structural(format!("edge {} has non-positive length", e.name)));
            }
            adjacency[a.0].push((EdgeId(i), b));
            adjacency[b.0].push((EdgeId(i), a));
        }

        let mut parent = vec![None; n];
        let mut depth = vec![usize::MAX; n];
        depth[0] = 0;
        let mut queue = VecDeque::from([VertexId(0)]);
        while let Some(v) = queue.pop_front() {
            for &(e, w) in &adjacency[v.0] {
                if depth[w.0] == usize::MAX {
                    depth[w.0] = depth[v.0] + 1;
                    parent[w.0] = Some((e, v));
                    queue.push_back(w);
                }
            }
        }
        if depth.contains(&usize::MAX) {
            return Err(structural("tree is not connected"));
        }
        Ok(MetricTree { vertex_names, edges, adjacency, parent, depth })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.vertex_names.len()).map(VertexId)
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.edges.len()).map(EdgeId)
    }

    pub fn edge(&self, e: EdgeId) -> &Edge<S> {
        &self.edges[e.0]
    }

    pub fn edges(&self) -> &[Edge<S>] {
        &self.edges
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertex_names[v.0]
    }

    pub fn vertex_by_name(&self, name: &str) -> Option<VertexId> {
        self.vertex_names.iter().position(|n| n == name).map(VertexId)
    }

    pub fn edge_by_name(&self, name: &str) -> Option<EdgeId> {
        self.edges.iter().position(|e| e.name == name).map(EdgeId)
    }

    pub fn neighbors(&self, v: VertexId) -> &[(EdgeId, VertexId)] {
        &self.adjacency[v.0]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adjacency[v.0].len()
    }

    pub fn total_length(&self) -> S {
        self.edges.iter().fold(S::zero(), |acc, e| acc + e.length.clone())
    }

    /// Canonical point at parameter `t ∈ [0, 1]` on edge `e`.
    pub fn point_on_edge(&self, e: EdgeId, t: S) -> Result<TreePoint<S>> {
        if e.0 >= self.edges.len() {
            return Err(structural(format!("edge index {} out of range", e.0)));
        }
        if t < S::zero() || t > S::one() {
            return Err(structural(format!("edge parameter {t} outside [0, 1]")));
        }
        Ok(self.point_on_edge_unchecked(e, t))
    }

    pub(crate) fn point_on_edge_unchecked(&self, e: EdgeId, t: S) -> TreePoint<S> {
        if t.is_zero() {
            TreePoint::Vertex(self.edges[e.0].ends[0])
        } else if t == S::one() {
            TreePoint::Vertex(self.edges[e.0].ends[1])
        } else {
            TreePoint::Edge { edge: e, t }
        }
    }

    pub fn midpoint(&self, e: EdgeId) -> TreePoint<S> {
        self.point_on_edge_unchecked(e, S::half())
    }

    /// Checks that `p` is a well-formed canonical point of this tree.
    pub fn validate_point(&self, p: &TreePoint<S>) -> Result<()> {
        match p {
            TreePoint::Vertex(v) if v.0 < self.vertex_count() => Ok(()),
            TreePoint::Vertex(v) => Err(structural(format!("vertex index {} out of range", v.0))),
            TreePoint::Edge { edge, t } => {
                if edge.0 >= self.edge_count() {
                    Err(structural(format!("edge index {} out of range", edge.0)))
                } else if *t <= S::zero() || *t >= S::one() {
                    Err(structural("edge point parameter must lie strictly inside (0, 1)"))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Vertex path `u → v` as a list of (edge, next vertex) steps.
    pub fn vertex_path(&self, u: VertexId, v: VertexId) -> Vec<(EdgeId, VertexId)> {
        let mut up_from_u = Vec::new();
        let mut up_from_v = Vec::new();
        let (mut a, mut b) = (u, v);
        while self.depth[a.0] > self.depth[b.0] {
            let (e, p) = self.parent[a.0].expect("non-root vertex has a parent");
            up_from_u.push((e, p));
            a = p;
        }
        while self.depth[b.0] > self.depth[a.0] {
            let (e, p) = self.parent[b.0].expect("non-root vertex has a parent");
            up_from_v.push((e, b));
            b = p;
        }
        while a != b {
            let (ea, pa) = self.parent[a.0].expect("non-root vertex has a parent");
            up_from_u.push((ea, pa));
            a = pa;
            let (eb, pb) = self.parent[b.0].expect("non-root vertex has a parent");
            up_from_v.push((eb, b));
            b = pb;
        }
        up_from_u.extend(up_from_v.into_iter().rev());
        up_from_u
    }

    /// The unique arc `[a, b]`.
    pub fn arc(&self, a: &TreePoint<S>, b: &TreePoint<S>) -> Result<Arc<S>> {
        self.validate_point(a)?;
        self.validate_point(b)?;
        Ok(Arc::between(self, a, b))
    }

    pub fn distance(&self, a: &TreePoint<S>, b: &TreePoint<S>) -> S {
        Arc::between(self, a, b).length().clone()
    }

    /// Number of components of `X ∖ {x}` together with the point class.
    pub fn order_of(&self, x: &TreePoint<S>) -> Result<(usize, PointClass)> {
        self.validate_point(x)?;
        let order = match x {
            TreePoint::Vertex(v) => self.degree(*v),
            TreePoint::Edge { .. } => 2,
        };
        Ok((order, PointClass::from_order(order)))
    }

    /// Whether `x ∈ (a, b)`, i.e. `x` separates `a` from `b`.
    pub fn separates(&self, x: &TreePoint<S>, a: &TreePoint<S>, b: &TreePoint<S>) -> Result<bool> {
        if x == a || x == b {
            return Err(precondition("separating point must differ from both points"));
        }
        Ok(self.arc(a, b)?.contains(self, x))
    }

    /// Vertices plus `per_edge` evenly spaced interior points of every edge.
    pub fn grid_points(&self, per_edge: usize) -> Vec<TreePoint<S>> {
        let mut pts: Vec<TreePoint<S>> = self.vertices().map(TreePoint::Vertex).collect();
        for e in self.edge_ids() {
            for i in 1..=per_edge {
                let t = S::from_ratio(i as i64, per_edge as i64 + 1);
                pts.push(self.point_on_edge_unchecked(e, t));
            }
        }
        pts
    }
}
