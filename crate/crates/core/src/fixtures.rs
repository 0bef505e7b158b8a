//! Named example maps at finite truncation and seeded random instances.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{precondition, Result};
use crate::odometer::OdometerType;
use crate::pl_map::{iterate, Knot, PlMap, Shared};
use crate::scalar::Scalar;
use crate::subtree::Subtree;
use crate::tree::{EdgeId, TreeBuilder, TreePoint, VertexId};
use crate::{Map, Point, Tree, Q};

fn q(n: i64, d: i64) -> Q {
    Q::from_ratio(n, d)
}

fn v(i: usize) -> Point {
    TreePoint::Vertex(VertexId(i))
}

fn unit_interval() -> Shared<Tree> {
    let mut b = TreeBuilder::new();
    let x = b.vertex("0");
    let y = b.vertex("1");
    b.edge("I", x, y, q(1, 1));
    Shared::new(b.build().expect("unit interval is a tree"))
}

/// Stem `I = [c, s]` of length 1 and arms `J_2 … J_k` of lengths `1/j`
/// at the centre `c`. Vertex 0 is `c`, vertex 1 is `s`, vertex `j` is the
/// tip of `J_j`; edge 0 is `I` (oriented from `c`), edge `j − 1` is `J_j`.
pub fn star_dendrite(k: usize) -> Result<Tree> {
    if k < 2 {
        return Err(precondition("star dendrite needs k ≥ 2"));
    }
    let mut b = TreeBuilder::new();
    let c = b.vertex("c");
    let s = b.vertex("s");
    b.edge("I", c, s, q(1, 1));
    for j in 2..=k {
        let tip = b.vertex(format!("j{j}"));
        b.edge(format!("J{j}"), c, tip, q(1, j as i64));
    }
    b.build()
}

/// Arm pieces shared by both star-dendrite examples: the inner half `B_j`
/// stretches from `s` through `c` to the arm midpoint, the outer half `A_j`
/// is fixed.
fn arm_knots(tree: &Tree, e: EdgeId) -> Vec<Knot<Q>> {
    vec![
        Knot::new(q(0, 1), v(1)),
        Knot::new(q(1, 2), tree.midpoint(e)),
        Knot::new(q(1, 1), TreePoint::Vertex(tree.edge(e).ends[1])),
    ]
}

/// The stem collapses to `s`; on each arm `A_j` is fixed and `B_j` covers
/// `I ∪ B_j`. Fixed set: `{s} ∪ A_2 ∪ … ∪ A_k`, at distance `1/(2k)` from `c`.
pub fn arconbad_map(k: usize) -> Result<Map> {
    let tree = Shared::new(star_dendrite(k)?);
    let mut images = vec![v(1), v(1)];
    images.extend((2..=k).map(v));
    let mut pieces = vec![vec![Knot::new(q(0, 1), v(1)), Knot::new(q(1, 1), v(1))]];
    for e in 1..tree.edge_count() {
        pieces.push(arm_knots(&tree, EdgeId(e)));
    }
    PlMap::new(tree, images, pieces)
}

/// Stem parameter of `y_j`, the point at distance `2^{-j}` from `s`.
fn stem_knot(j: u32) -> Q {
    q(1, 1) - q(1, 1i64 << j)
}

/// On the tree `star_dendrite(k + 1)`: `I_0 = [y_0, y_1]` maps onto `I`,
/// `I_j = [y_j, y_{j+1}]` runs out along `J_{j+1}` and back for
/// `1 ≤ j ≤ k`, and `[y_{k+1}, s]` collapses to `c`. The arms follow
/// [`arconbad_map`]. Only `J_2 … J_{k+1}` are covered by `f(I)`.
pub fn arconbad1_map(k: usize) -> Result<Map> {
    if k < 2 {
        return Err(precondition("arconbad1 needs k ≥ 2"));
    }
    let tree = Shared::new(star_dendrite(k + 1)?);
    let mut images = vec![v(1), v(0)];
    images.extend((2..=k + 1).map(v));
    let mut stem = vec![Knot::new(q(0, 1), v(1)), Knot::new(stem_knot(1), v(0))];
    for j in 1..=k as u32 {
        let mid = (stem_knot(j) + stem_knot(j + 1)) * Q::half();
        stem.push(Knot::new(mid, v(j as usize + 1)));
        stem.push(Knot::new(stem_knot(j + 1), v(0)));
    }
    stem.push(Knot::new(q(1, 1), v(0)));
    let mut pieces = vec![stem];
    for e in 1..tree.edge_count() {
        pieces.push(arm_knots(&tree, EdgeId(e)));
    }
    PlMap::new(tree, images, pieces)
}

/// Diameter of `f^n(B(centre, r))`.
pub fn iterate_spread(f: &Map, n: u64, centre: &Point, r: &Q, piece_cap: usize) -> Result<Q> {
    let tree = f.tree();
    tree.validate_point(centre)?;
    let ball = Subtree::ball(tree, centre, r);
    Ok(iterate(f, n, piece_cap)?.image_of_set(&ball).diameter(tree))
}

/// Star with `arms` arms of equal length and the cyclic arm rotation.
/// Vertex 0 is the centre, vertex `i + 1` the tip of arm `i`.
pub fn rotation_star(arms: usize, arm_length: Q) -> Result<Map> {
    if arms < 2 {
        return Err(precondition("rotation star needs at least two arms"));
    }
    if arm_length <= q(0, 1) {
        return Err(precondition("arm length must be positive"));
    }
    let mut b = TreeBuilder::new();
    let c = b.vertex("c");
    for i in 0..arms {
        let tip = b.vertex(format!("a{i}"));
        b.edge(format!("arm{i}"), c, tip, arm_length.clone());
    }
    let tree = Shared::new(b.build()?);
    let mut images = vec![v(0)];
    images.extend((0..arms).map(|i| v((i + 1) % arms + 1)));
    PlMap::from_vertex_images(tree, images)
}

/// `x ↦ 1 − x` on `[0, 1]`.
pub fn interval_flip() -> Map {
    PlMap::from_vertex_images(unit_interval(), vec![v(1), v(0)]).expect("flip is continuous")
}

/// `R(x) = (x + 1)/2` on `[0, 1]`.
pub fn shift() -> Map {
    let tree = unit_interval();
    let half = tree.midpoint(EdgeId(0));
    let knots = vec![Knot::new(q(0, 1), half.clone()), Knot::new(q(1, 1), v(1))];
    PlMap::new(tree, vec![half, v(1)], vec![knots]).expect("shift is continuous")
}

/// The tent map `T(0) = T(1) = 0`, `T(1/2) = 1`.
pub fn tent() -> Map {
    let knots = vec![Knot::new(q(0, 1), v(0)), Knot::new(q(1, 2), v(1)), Knot::new(q(1, 1), v(0))];
    PlMap::new(unit_interval(), vec![v(0), v(0)], vec![knots]).expect("tent is continuous")
}

/// A rooted tree whose level-`i` subtrees are permuted like the digits of
/// an adding machine of type `periods`.
///
/// Vertex `r` (fixed) carries a fixed stem leaf `s` and `m_0` children;
/// a level-`i` vertex with label `j ∈ [0, m_{i−1})` has children labelled
/// `j + q·m_{i−1}`, `q < m_i/m_{i−1}`. The map adds one to every label
/// modulo its level's period. Vertices are named `L{level}.{label}` and
/// created level by level in label order. All edges have length 1.
pub fn odometer_tower(depth: usize, periods: &[u64]) -> Result<Map> {
    if periods.len() != depth {
        return Err(precondition(format!("tower of depth {depth} needs {depth} periods")));
    }
    let ty = OdometerType::new(periods.to_vec())?;
    if ty.periods()[0] < 2 {
        return Err(precondition("tower needs m_0 ≥ 2"));
    }
    let mut b = TreeBuilder::new();
    let root = b.vertex("r");
    let stem = b.vertex("s");
    b.edge("stem", root, stem, q(1, 1));
    let mut images: Vec<Option<usize>> = vec![Some(0), Some(1)];
    let mut prev: Vec<VertexId> = vec![root];
    let mut prev_period = 1u64;
    for (level, &m) in ty.periods().iter().enumerate() {
        let mut current = Vec::with_capacity(m as usize);
        for label in 0..m {
            let parent = prev[(label % prev_period) as usize];
            let id = b.vertex(format!("L{}.{label}", level + 1));
            b.edge(format!("e{}.{label}", level + 1), parent, id, q(1, 1));
            current.push(id);
            images.push(None);
        }
        for label in 0..m {
            images[current[label as usize].0] = Some(current[((label + 1) % m) as usize].0);
        }
        prev = current;
        prev_period = m;
    }
    let tree = Shared::new(b.build()?);
    let images = images.into_iter().map(|i| v(i.expect("every vertex assigned"))).collect();
    PlMap::from_vertex_images(tree, images)
}

/// Shape of a random symmetric tree: each node carries groups of identical
/// child subtrees attached by edges of a common length.
struct Shape {
    groups: Vec<Group>,
}

struct Group {
    len: Q,
    copies: usize,
    child: Shape,
}

impl Shape {
    fn size(&self) -> usize {
        1 + self.groups.iter().map(|g| g.copies * g.child.size()).sum::<usize>()
    }

    /// Order of the automorphism group generated by permuting copies and
    /// recursing into them.
    fn group_order(&self) -> u128 {
        self.groups
            .iter()
            .map(|g| (1..=g.copies as u128).product::<u128>() * g.child.group_order().pow(g.copies as u32))
            .product()
    }
}

const RANDOM_LENGTHS: [(i64, i64); 5] = [(1, 1), (1, 2), (1, 3), (2, 3), (3, 2)];

fn random_shape(rng: &mut ChaCha8Rng, budget: usize) -> Shape {
    let mut remaining = budget - 1;
    let mut groups = Vec::new();
    while remaining > 0 && groups.len() < 3 && rng.gen_bool(0.7) {
        let child_budget = rng.gen_range(1..=remaining.min(4));
        let child = random_shape(rng, child_budget);
        let size = child.size();
        let copies = rng.gen_range(1..=(remaining / size).min(4));
        let (n, d) = RANDOM_LENGTHS[rng.gen_range(0..RANDOM_LENGTHS.len())];
        groups.push(Group { len: q(n, d), copies, child });
        remaining -= copies * size;
    }
    Shape { groups }
}

/// Automorphism of a [`Shape`]: per group, a permutation of the copies
/// and an automorphism applied inside each copy.
struct Automorphism {
    groups: Vec<(Vec<usize>, Vec<Automorphism>)>,
}

fn random_automorphism(rng: Option<&mut ChaCha8Rng>, shape: &Shape) -> Automorphism {
    let mut rng = rng;
    let groups = shape
        .groups
        .iter()
        .map(|g| {
            let mut perm: Vec<usize> = (0..g.copies).collect();
            if let Some(r) = rng.as_deref_mut() {
                perm.shuffle(r);
            }
            let inner = (0..g.copies).map(|_| random_automorphism(rng.as_deref_mut(), &g.child)).collect();
            (perm, inner)
        })
        .collect();
    Automorphism { groups }
}

/// Vertex ids of a realized shape: the node, then per group per copy.
struct Layout {
    id: VertexId,
    groups: Vec<Vec<Layout>>,
}

fn realize(shape: &Shape, b: &mut TreeBuilder<Q>, parent: Option<(VertexId, &Q)>) -> Layout {
    let id = b.vertex(format!("v{}", b.vertex_count()));
    if let Some((p, len)) = parent {
        b.edge(format!("e{}", id.0), p, id, len.clone());
    }
    let groups = shape
        .groups
        .iter()
        .map(|g| (0..g.copies).map(|_| realize(&g.child, b, Some((id, &g.len)))).collect())
        .collect();
    Layout { id, groups }
}

fn assign_images(src: &Layout, dst: &Layout, auto: &Automorphism, out: &mut [usize]) {
    out[src.id.0] = dst.id.0;
    for (gi, (perm, inner)) in auto.groups.iter().enumerate() {
        for (i, copy) in src.groups[gi].iter().enumerate() {
            assign_images(copy, &dst.groups[gi][perm[i]], &inner[i], out);
        }
    }
}

/// A seeded random map of finite order.
#[derive(Debug, Clone)]
pub struct FiniteOrderInstance {
    pub map: Map,
    /// Order of the automorphism group the map was drawn from; the order of
    /// the map divides it.
    pub group_order: u128,
}

pub const RANDOM_TREE_MAX_VERTICES: usize = 12;

/// Random tree with at most 12 vertices and a random isometric automorphism.
/// `order_seed == 0` selects the identity.
pub fn random_finite_order_map(tree_seed: u64, order_seed: u64) -> FiniteOrderInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(tree_seed);
    let mut shape = random_shape(&mut rng, RANDOM_TREE_MAX_VERTICES);
    if shape.groups.is_empty() {
        shape.groups.push(Group { len: q(1, 1), copies: 2, child: Shape { groups: Vec::new() } });
    }
    let auto = if order_seed == 0 {
        random_automorphism(None, &shape)
    } else {
        let mut order_rng = ChaCha8Rng::seed_from_u64(order_seed);
        random_automorphism(Some(&mut order_rng), &shape)
    };
    let mut b = TreeBuilder::new();
    let layout = realize(&shape, &mut b, None);
    let tree = Shared::new(b.build().expect("realized shape is a tree"));
    let mut images = vec![0usize; tree.vertex_count()];
    assign_images(&layout, &layout, &auto, &mut images);
    let map = PlMap::from_vertex_images(tree, images.into_iter().map(v).collect())
        .expect("automorphisms extend isometrically");
    FiniteOrderInstance { map, group_order: shape.group_order() }
}

/// A finite-order map with one edge replaced by a folding or stalling piece.
pub fn random_folding(seed: u64) -> Map {
    let base = random_finite_order_map(seed, seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1).map;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xF01D);
    let tree = base.shared_tree();
    let e = EdgeId(rng.gen_range(0..tree.edge_count()));
    let ends = tree.edge(e).ends;
    let fa = base.vertex_image(ends[0]).clone();
    let fb = base.vertex_image(ends[1]).clone();
    let arc = tree.arc(&fa, &fb).expect("images are valid points");
    let off_arc: Vec<Point> =
        tree.edge_ids().map(|d| tree.midpoint(d)).filter(|m| !arc.contains(&tree, m)).collect();
    let knots = if !off_arc.is_empty() && rng.gen_bool(0.6) {
        let q_pt = off_arc[rng.gen_range(0..off_arc.len())].clone();
        let t = q(rng.gen_range(1..=5), 6);
        vec![Knot::new(q(0, 1), fa), Knot::new(t, q_pt), Knot::new(q(1, 1), fb)]
    } else {
        let m = arc.point_at(&tree, &(arc.length().clone() * Q::half()));
        vec![Knot::new(q(0, 1), fa), Knot::new(q(1, 3), m.clone()), Knot::new(q(2, 3), m), Knot::new(q(1, 1), fb)]
    };
    let pieces = tree
        .edge_ids()
        .map(|d| if d == e { knots.clone() } else { base.knots(d).to_vec() })
        .collect();
    PlMap::new(tree.clone(), base.vertex_images().to_vec(), pieces).expect("edits keep continuity")
}

/// `count` seeded points in edge interiors, with denominators at most 64.
pub fn random_points(tree: &Tree, count: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let e = EdgeId(rng.gen_range(0..tree.edge_count()));
            let d = rng.gen_range(2..=64);
            tree.point_on_edge_unchecked(e, q(rng.gen_range(1..d), d))
        })
        .collect()
}

/// Every fixture kind with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Fixture {
    /// The star dendrite with the identity map.
    Star { k: usize },
    Arconbad { k: usize },
    Arconbad1 { k: usize },
    Interval,
    Rotation { arms: usize, arm_length: Q },
    Tower { periods: Vec<u64> },
    Shift,
    Tent,
    RandomFiniteOrder { tree_seed: u64, order_seed: u64 },
    RandomFolding { seed: u64 },
}

impl Fixture {
    pub fn build(&self) -> Result<Map> {
        match self {
            Fixture::Star { k } => Ok(PlMap::identity(Shared::new(star_dendrite(*k)?))),
            Fixture::Arconbad { k } => arconbad_map(*k),
            Fixture::Arconbad1 { k } => arconbad1_map(*k),
            Fixture::Interval => Ok(interval_flip()),
            Fixture::Rotation { arms, arm_length } => rotation_star(*arms, arm_length.clone()),
            Fixture::Tower { periods } => odometer_tower(periods.len(), periods),
            Fixture::Shift => Ok(shift()),
            Fixture::Tent => Ok(tent()),
            Fixture::RandomFiniteOrder { tree_seed, order_seed } => {
                Ok(random_finite_order_map(*tree_seed, *order_seed).map)
            }
            Fixture::RandomFolding { seed } => Ok(random_folding(*seed)),
        }
    }
}
