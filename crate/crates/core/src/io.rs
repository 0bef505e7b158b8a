//! JSON file format for trees and maps, and JSON encodings of analysis
//! results.
//!
//! A file holds the tree and optionally a map on it:
//!
//! ```json
//! {
//!   "vertices": ["c", "a0", "a1"],
//!   "edges": [{"id": "arm0", "ends": ["c", "a0"], "length": "1/1"}, ...],
//!   "vertex_images": {"c": {"vertex": "c"}, ...},
//!   "edge_pieces": {"arm0": [{"t": "0/1", "image": {"vertex": "c"}}, ...], ...}
//! }
//! ```
//!
//! Rationals are `"p/q"` strings in lowest terms; points are
//! `{"vertex": v}` or `{"edge": e, "t": "p/q"}` with `t` the normalized
//! position from the first end. Writing a parsed canonical file reproduces
//! it byte for byte.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dynamics::{PeriodicStructure, RecurrenceVerdict, VertexPeriod, Witness};
use crate::error::{Error, Result};
use crate::odometer::{AddingMachineClass, CycleLevel, SemiconjugacyReport, Tower};
use crate::pl_map::{Knot, PlMap, Shared};
use crate::scalar::Scalar;
use crate::subtree::Subtree;
use crate::tree::{Edge, EdgeId, MetricTree, TreePoint, VertexId};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeRecord {
    id: String,
    ends: [String; 2],
    length: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vertex: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    edge: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KnotRecord {
    t: String,
    image: PointRecord,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    vertices: Vec<String>,
    edges: Vec<EdgeRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vertex_images: Option<IndexMap<String, PointRecord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    edge_pieces: Option<IndexMap<String, Vec<KnotRecord>>>,
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

fn vertex_id<S: Scalar>(tree: &MetricTree<S>, name: &str) -> Result<VertexId> {
    tree.vertex_by_name(name).ok_or_else(|| Error::Parse(format!("unknown vertex {name:?}")))
}

fn edge_id<S: Scalar>(tree: &MetricTree<S>, name: &str) -> Result<EdgeId> {
    tree.edge_by_name(name).ok_or_else(|| Error::Parse(format!("unknown edge {name:?}")))
}

fn point_record<S: Scalar>(tree: &MetricTree<S>, p: &TreePoint<S>) -> PointRecord {
    match p {
        TreePoint::Vertex(v) => PointRecord { vertex: Some(tree.vertex_name(*v).to_string()), edge: None, t: None },
        TreePoint::Edge { edge, t } => {
            PointRecord { vertex: None, edge: Some(tree.edge(*edge).name.clone()), t: Some(t.to_text()) }
        }
    }
}

fn point_from_record<S: Scalar>(tree: &MetricTree<S>, r: &PointRecord) -> Result<TreePoint<S>> {
    match (&r.vertex, &r.edge, &r.t) {
        (Some(v), None, None) => Ok(TreePoint::Vertex(vertex_id(tree, v)?)),
        (None, Some(e), Some(t)) => tree.point_on_edge(edge_id(tree, e)?, S::parse_text(t)?),
        _ => Err(Error::Parse("a point is {\"vertex\": v} or {\"edge\": e, \"t\": \"p/q\"}".into())),
    }
}

fn tree_from_file<S: Scalar>(file: &InstanceFile) -> Result<MetricTree<S>> {
    let index = |name: &str| {
        file.vertices
            .iter()
            .position(|v| v == name)
            .map(VertexId)
            .ok_or_else(|| Error::Parse(format!("edge end {name:?} is not a listed vertex")))
    };
    let mut edges = Vec::with_capacity(file.edges.len());
    for e in &file.edges {
        edges.push(Edge {
            name: e.id.clone(),
            ends: [index(&e.ends[0])?, index(&e.ends[1])?],
            length: S::parse_text(&e.length)?,
        });
    }
    MetricTree::from_parts(file.vertices.clone(), edges)
}

fn tree_records<S: Scalar>(tree: &MetricTree<S>) -> (Vec<String>, Vec<EdgeRecord>) {
    let vertices = tree.vertices().map(|v| tree.vertex_name(v).to_string()).collect();
    let edges = tree
        .edges()
        .iter()
        .map(|e| EdgeRecord {
            id: e.name.clone(),
            ends: [tree.vertex_name(e.ends[0]).to_string(), tree.vertex_name(e.ends[1]).to_string()],
            length: e.length.to_text(),
        })
        .collect();
    (vertices, edges)
}

fn render(file: &InstanceFile) -> String {
    let mut out = serde_json::to_string_pretty(file).expect("file records serialize");
    out.push('\n');
    out
}

/// Reads the tree part of a file; any map part is ignored.
pub fn parse_tree<S: Scalar>(text: &str) -> Result<MetricTree<S>> {
    let file: InstanceFile = serde_json::from_str(text).map_err(parse_error)?;
    tree_from_file(&file)
}

/// Reads a tree together with a map on it.
pub fn parse_map<S: Scalar>(text: &str) -> Result<PlMap<S>> {
    let file: InstanceFile = serde_json::from_str(text).map_err(parse_error)?;
    let tree = tree_from_file::<S>(&file)?;
    let (Some(images), Some(pieces)) = (&file.vertex_images, &file.edge_pieces) else {
        return Err(Error::Parse("file has no map (vertex_images and edge_pieces)".into()));
    };
    let mut vertex_images = vec![None; tree.vertex_count()];
    for (name, p) in images {
        let v = vertex_id(&tree, name)?;
        vertex_images[v.0] = Some(point_from_record(&tree, p)?);
    }
    let vertex_images = vertex_images
        .into_iter()
        .enumerate()
        .map(|(i, p)| p.ok_or_else(|| Error::Parse(format!("no image for vertex {:?}", tree.vertex_name(VertexId(i))))))
        .collect::<Result<Vec<_>>>()?;
    let mut edge_pieces = vec![None; tree.edge_count()];
    for (name, knots) in pieces {
        let e = edge_id(&tree, name)?;
        let knots = knots
            .iter()
            .map(|k| Ok(Knot::new(S::parse_text(&k.t)?, point_from_record(&tree, &k.image)?)))
            .collect::<Result<Vec<_>>>()?;
        edge_pieces[e.0] = Some(knots);
    }
    let edge_pieces = edge_pieces
        .into_iter()
        .enumerate()
        .map(|(i, k)| k.ok_or_else(|| Error::Parse(format!("no pieces for edge {:?}", tree.edge(EdgeId(i)).name))))
        .collect::<Result<Vec<_>>>()?;
    PlMap::new(Shared::new(tree), vertex_images, edge_pieces)
}

pub fn write_tree<S: Scalar>(tree: &MetricTree<S>) -> String {
    let (vertices, edges) = tree_records(tree);
    render(&InstanceFile { vertices, edges, vertex_images: None, edge_pieces: None })
}

pub fn write_map<S: Scalar>(f: &PlMap<S>) -> String {
    let tree = f.tree();
    let (vertices, edges) = tree_records(tree);
    let vertex_images =
        tree.vertices().map(|v| (tree.vertex_name(v).to_string(), point_record(tree, f.vertex_image(v)))).collect();
    let edge_pieces = tree
        .edge_ids()
        .map(|e| {
            let knots = f
                .knots(e)
                .iter()
                .map(|k| KnotRecord { t: k.t.to_text(), image: point_record(tree, &k.image) })
                .collect();
            (tree.edge(e).name.clone(), knots)
        })
        .collect();
    render(&InstanceFile { vertices, edges, vertex_images: Some(vertex_images), edge_pieces: Some(edge_pieces) })
}

pub fn point_json<S: Scalar>(tree: &MetricTree<S>, p: &TreePoint<S>) -> Value {
    serde_json::to_value(point_record(tree, p)).expect("point records serialize")
}

pub fn parse_point<S: Scalar>(tree: &MetricTree<S>, value: &Value) -> Result<TreePoint<S>> {
    let record: PointRecord = serde_json::from_value(value.clone()).map_err(parse_error)?;
    point_from_record(tree, &record)
}

/// Parses a point from `v` (a vertex name) or `e:t` (an edge name and a
/// rational parameter).
pub fn parse_point_text<S: Scalar>(tree: &MetricTree<S>, text: &str) -> Result<TreePoint<S>> {
    if let Some(v) = tree.vertex_by_name(text) {
        return Ok(TreePoint::Vertex(v));
    }
    match text.rsplit_once(':') {
        Some((e, t)) => tree.point_on_edge(edge_id(tree, e)?, S::parse_text(t)?),
        None => Err(Error::Parse(format!("{text:?} is neither a vertex nor edge:t"))),
    }
}

/// Vertices and closed edge intervals of a subtree.
pub fn subtree_json<S: Scalar>(tree: &MetricTree<S>, set: &Subtree<S>) -> Value {
    let vertices: Vec<&str> = set.vertices().iter().map(|v| tree.vertex_name(*v)).collect();
    let intervals: Vec<Value> = set
        .parts()
        .iter()
        .flat_map(|(e, ivs)| {
            ivs.iter().map(move |(a, b)| json!({"edge": tree.edge(*e).name, "from": a.to_text(), "to": b.to_text()}))
        })
        .collect();
    json!({"vertices": vertices, "intervals": intervals})
}

fn period_json(p: VertexPeriod) -> Value {
    match p {
        VertexPeriod::Periodic(n) => json!(n),
        VertexPeriod::NotWithin(n) => json!({"not_within": n}),
    }
}

fn vertex_periods_json<S: Scalar>(tree: &MetricTree<S>, periods: &[VertexPeriod]) -> Value {
    let map: serde_json::Map<String, Value> =
        tree.vertices().zip(periods).map(|(v, p)| (tree.vertex_name(v).to_string(), period_json(*p))).collect();
    Value::Object(map)
}

pub fn witness_json<S: Scalar>(tree: &MetricTree<S>, w: &Witness<S>) -> Value {
    let p = |x: &TreePoint<S>| point_json(tree, x);
    let mut out = match w {
        Witness::NonInjective { a, b, image } => json!({"a": p(a), "b": p(b), "image": p(image)}),
        Witness::NonPeriodicCutpoint { point, power, image } => {
            json!({"point": p(point), "power": power, "image": p(image)})
        }
        Witness::EscapingOrbit { point, trap } => json!({"point": p(point), "trap": subtree_json(tree, trap)}),
    };
    out.as_object_mut()
        .expect("witness encodes as an object")
        .insert("reason".into(), serde_json::to_value(w.reason()).expect("reason serializes"));
    out
}

pub fn verdict_json<S: Scalar>(f: &PlMap<S>, v: &RecurrenceVerdict<S>) -> Value {
    let tree = f.tree();
    json!({
        "pointwise_recurrent": v.pointwise_recurrent,
        "identity_power": v.identity_power,
        "witness": v.witness.as_ref().map(|w| witness_json(tree, w)),
        "vertex_periods": vertex_periods_json(tree, &v.vertex_periods),
    })
}

pub fn structure_json<S: Scalar>(f: &PlMap<S>, s: &PeriodicStructure<S>) -> Value {
    let tree = f.tree();
    let levels: Vec<Value> = s
        .fixed_sets
        .iter()
        .zip(&s.periodic_unions)
        .enumerate()
        .map(|(i, (fixed, union))| {
            json!({"n": i + 1, "fixed_set": subtree_json(tree, fixed), "periodic_union": subtree_json(tree, union)})
        })
        .collect();
    json!({"levels": levels, "vertex_periods": vertex_periods_json(tree, &s.vertex_periods)})
}

pub fn cycle_levels_json<S: Scalar>(f: &PlMap<S>, levels: &[CycleLevel<S>]) -> Value {
    let tree = f.tree();
    let levels: Vec<Value> = levels
        .iter()
        .map(|l| {
            let cycles: Vec<Value> = l
                .cycles
                .iter()
                .map(|c| {
                    json!({
                        "period": c.period(),
                        "attachments": c.attachments.iter().map(|t| point_json(tree, t)).collect::<Vec<_>>(),
                        "representatives": c.sets.iter().map(|s| point_json(tree, s.representative())).collect::<Vec<_>>(),
                    })
                })
                .collect();
            json!({"n": l.n, "periodic_union": subtree_json(tree, &l.periodic_union), "cycles": cycles})
        })
        .collect();
    Value::Array(levels)
}

/// The tower's type, root, and the address of every vertex it covers.
pub fn tower_json<S: Scalar>(f: &PlMap<S>, tower: &Tower<S>) -> Value {
    let tree = f.tree();
    let addresses: serde_json::Map<String, Value> = tree
        .vertices()
        .filter_map(|v| {
            let a = tower.address_of(&TreePoint::Vertex(v)).ok()?;
            Some((tree.vertex_name(v).to_string(), json!(a.digits())))
        })
        .collect();
    json!({
        "periods": tower.odometer_type().periods(),
        "root": point_json(tree, tower.root()),
        "addresses": addresses,
    })
}

pub fn semiconjugacy_json<S: Scalar>(f: &PlMap<S>, r: &SemiconjugacyReport<S>) -> Value {
    let tree = f.tree();
    let failures: Vec<Value> = r
        .failures
        .iter()
        .map(|fl| json!({"point": point_json(tree, &fl.point), "address": fl.address, "image_address": fl.image_address}))
        .collect();
    json!({"checked": r.checked, "passed": r.passed(), "failures": failures})
}

pub fn adding_machine_json(c: &AddingMachineClass) -> Value {
    serde_json::to_value(c).expect("classification serializes")
}
