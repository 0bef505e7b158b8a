//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line for
//! each, and exits non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use dendrodyn::dynamics::{
    check_no_preperiodic, check_property_a, decide_pointwise_recurrent, fixed_set, periodic_structure, Witness,
};
use dendrodyn::fixtures::{
    arconbad1_map, arconbad_map, interval_flip, iterate_spread, odometer_tower, random_finite_order_map,
    random_folding, random_points, shift, tent,
};
use dendrodyn::odometer::{
    classify_adding_machine, detect_cycles_of_sets, select_tower, tau, validate_address, verify_semiconjugacy,
    AddingMachineKind, OdometerAddress, OdometerType,
};
use dendrodyn::pl_map::{find_periodic_in_hull, iterate, PlMap, DEFAULT_PIECE_CAP};
use dendrodyn::subtree::{connected_hull, SubtreeBuilder};
use dendrodyn::tree::{EdgeId, PointClass, TreePoint, VertexId};
use dendrodyn::{Map, Point, Q, Scalar, Tree};
use num_traits::Zero;

const CAP: usize = DEFAULT_PIECE_CAP;
const RANDOM_INSTANCES: u64 = 1000;
const HULL_INSTANCES: usize = 200;

type Outcome = Result<String, String>;

fn q(n: i64, d: i64) -> Q {
    Q::from_ratio(n, d)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn at(f: &Map, t: Q) -> Point {
    f.tree().point_on_edge(EdgeId(0), t).unwrap()
}

// ---------------------------------------------------------------------------
// Independent oracles.

/// Vertex images of a map that permutes the vertices.
fn vertex_permutation(f: &Map) -> Option<Vec<usize>> {
    f.vertex_images()
        .iter()
        .map(|p| match p {
            TreePoint::Vertex(v) => Some(v.0),
            _ => None,
        })
        .collect()
}

/// Length of the cycle through `start`, or `None` when `start` is not on a cycle.
fn cycle_length(perm: &[usize], start: usize) -> Option<u64> {
    let mut i = perm[start];
    for len in 1..=perm.len() as u64 {
        if i == start {
            return Some(len);
        }
        i = perm[i];
    }
    None
}

/// The fixed set of `g`, solved edge by edge and piece by piece from the
/// knot data: on a piece the image runs along an arc at constant speed, so
/// every stretch of that arc inside the same edge gives one linear equation.
struct FixedOracle {
    points: Vec<Point>,
    intervals: Vec<(EdgeId, Q, Q)>,
}

impl FixedOracle {
    fn solve(g: &Map) -> Self {
        let tree = g.tree();
        let mut points = Vec::new();
        let mut intervals = Vec::new();
        for e in tree.edge_ids() {
            let len = tree.edge(e).length.clone();
            let knots = g.knots(e);
            for k in knots {
                let x = tree.point_on_edge(e, k.t.clone()).unwrap();
                if x == k.image {
                    points.push(x);
                }
            }
            for w in knots.windows(2) {
                let (a, b) = (&w[0], &w[1]);
                let dt = b.t.clone() - a.t.clone();
                let arc = tree.arc(&a.image, &b.image).unwrap();
                let total = arc.length().clone();
                if total.is_zero() {
                    if let TreePoint::Edge { edge, t } = &a.image {
                        if *edge == e && a.t <= *t && *t <= b.t {
                            points.push(a.image.clone());
                        }
                    }
                    continue;
                }
                for (i, seg) in arc.segments().iter().enumerate() {
                    if seg.edge != e {
                        continue;
                    }
                    // Arc position of parameter u: off + sign·len·(u − from).
                    // Piece position of parameter t: total·(t − a.t)/dt.
                    let off = arc.offset(i).clone();
                    let slope = if seg.ascending() { len.clone() } else { -len.clone() };
                    let speed = total.clone() / dt.clone();
                    let c1 = slope.clone() - speed.clone();
                    let c0 = off - slope * seg.from.clone() + speed * a.t.clone();
                    let lo = if *seg.lo() > a.t { seg.lo().clone() } else { a.t.clone() };
                    let hi = if *seg.hi() < b.t { seg.hi().clone() } else { b.t.clone() };
                    if lo > hi {
                        continue;
                    }
                    if c1.is_zero() {
                        if c0.is_zero() {
                            intervals.push((e, lo, hi));
                        }
                    } else {
                        let t = -c0 / c1;
                        if lo <= t && t <= hi {
                            points.push(tree.point_on_edge(e, t).unwrap());
                        }
                    }
                }
            }
        }
        FixedOracle { points, intervals }
    }

    fn contains(&self, tree: &Tree, x: &Point) -> bool {
        self.points.contains(x)
            || self.intervals.iter().any(|(e, lo, hi)| match x {
                TreePoint::Edge { edge, t } => edge == e && lo <= t && t <= hi,
                TreePoint::Vertex(v) => {
                    let ends = tree.edge(*e).ends;
                    (*v == ends[0] && lo.is_zero()) || (*v == ends[1] && *hi == Q::from_int(1))
                }
            })
    }

    /// Some fixed point inside `hull`, if any. A fixed interval meeting the
    /// hull contains one of its own ends or one of the hull's corners.
    fn any_in(&self, tree: &Tree, hull: &dendrodyn::Set) -> Option<Point> {
        let ends = self.intervals.iter().flat_map(|(e, lo, hi)| {
            [lo.clone(), hi.clone()].map(|t| tree.point_on_edge(*e, t).unwrap())
        });
        let corners = hull.corner_points(tree).into_iter().filter(|p| self.contains(tree, p));
        self.points.iter().cloned().chain(ends).chain(corners).find(|p| hull.contains(p))
    }
}

/// Re-checks a negative verdict with direct evaluations only.
fn witness_holds(f: &Map, w: &Witness<Q>) -> bool {
    let tree = f.tree();
    match w {
        Witness::NonInjective { a, b, .. } => a != b && f.evaluate(a) == f.evaluate(b),
        Witness::NonPeriodicCutpoint { point, power, .. } => {
            let cut = matches!(tree.order_of(point), Ok((_, c)) if c.is_cutpoint());
            cut && f.is_injective()
                && tree.vertices().all(|v| f.evaluate_iterated(&TreePoint::Vertex(v), *power) == TreePoint::Vertex(v))
                && f.evaluate_iterated(point, *power) != *point
        }
        Witness::EscapingOrbit { point, trap } => {
            !trap.contains(point)
                && trap.contains(&f.evaluate(point))
                && f.image_of_set(trap).is_subset(trap)
        }
    }
}

/// Every digit tuple with `j_i < m_i`.
fn all_tuples(m: &[u64]) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for &mi in m {
        out = out.into_iter().flat_map(|t| (0..mi).map(move |j| [t.clone(), vec![j]].concat())).collect();
    }
    out
}

fn compatible(m: &[u64], t: &[u64]) -> bool {
    (1..m.len()).all(|i| t[i] % m[i - 1] == t[i - 1])
}

// ---------------------------------------------------------------------------
// Shared instances for criteria 2, 3 and 8.

struct TrueInstance {
    map: Map,
    n: u64,
}

fn true_instances() -> Vec<TrueInstance> {
    (0..RANDOM_INSTANCES)
        .map(|seed| {
            let map = random_finite_order_map(seed, seed + 1).map;
            let n = decide_pointwise_recurrent(&map, 10_000, CAP).unwrap().identity_power.unwrap_or(0);
            TrueInstance { map, n }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Criteria.

fn criterion_1() -> Outcome {
    let flip = decide_pointwise_recurrent(&interval_flip(), 100, CAP).map_err(|e| e.to_string())?;
    ensure(flip.pointwise_recurrent && flip.identity_power == Some(2), || format!("flip: {flip:?}"))?;
    let sh = shift();
    let v = decide_pointwise_recurrent(&sh, 100, CAP).map_err(|e| e.to_string())?;
    let escaping = matches!(&v.witness, Some(w @ Witness::EscapingOrbit { .. }) if witness_holds(&sh, w));
    ensure(!v.pointwise_recurrent && escaping, || format!("shift: {v:?}"))?;
    let t = tent();
    let v = decide_pointwise_recurrent(&t, 100, CAP).map_err(|e| e.to_string())?;
    ensure(!v.pointwise_recurrent && v.witness.as_ref().is_some_and(|w| witness_holds(&t, w)), || format!("tent: {v:?}"))?;
    Ok("flip N=2; shift escapes; tent folds".into())
}

fn criterion_2(instances: &[TrueInstance]) -> Outcome {
    for (seed, inst) in instances.iter().enumerate() {
        let f = &inst.map;
        let tree = f.tree();
        ensure(inst.n > 0, || format!("finite-order seed {seed} not recognised"))?;
        ensure(tree.vertex_count() <= 12, || format!("seed {seed}: too many vertices"))?;
        let perm = vertex_permutation(f).ok_or_else(|| format!("seed {seed}: vertex sent off the vertices"))?;
        for v in tree.vertices().filter(|&v| tree.degree(v) >= 2) {
            let len = cycle_length(&perm, v.0).ok_or_else(|| format!("seed {seed}: cutpoint vertex not periodic"))?;
            ensure(inst.n % len == 0, || format!("seed {seed}: period {len} does not divide N={}", inst.n))?;
        }
        let power = iterate(f, inst.n, CAP).map_err(|e| e.to_string())?;
        ensure(power == PlMap::identity(f.shared_tree()), || format!("seed {seed}: f^N is not the identity"))?;
    }
    let mut reasons = BTreeSet::new();
    for seed in 0..RANDOM_INSTANCES {
        let f = random_folding(seed);
        let v = decide_pointwise_recurrent(&f, 10_000, CAP).map_err(|e| e.to_string())?;
        let w = v.witness.as_ref().ok_or_else(|| format!("folding seed {seed} judged recurrent"))?;
        ensure(!v.pointwise_recurrent && witness_holds(&f, w), || format!("folding seed {seed}: bad witness {w:?}"))?;
        reasons.insert(format!("{:?}", w.reason()));
    }
    Ok(format!("{RANDOM_INSTANCES} finite-order true, {RANDOM_INSTANCES} foldings false ({reasons:?})"))
}

fn criterion_3(instances: &[TrueInstance]) -> Outcome {
    let mut checked = 0;
    for (seed, inst) in instances.iter().enumerate() {
        let f = &inst.map;
        let structure = periodic_structure(f, inst.n, inst.n, CAP).map_err(|e| e.to_string())?;
        for n in 1..=inst.n {
            let set = structure.fixed_set(n).unwrap();
            ensure(set.is_empty() || set.is_connected(f.tree()), || format!("seed {seed}: F_{n} disconnected"))?;
            checked += 1;
        }
    }
    let t = tent();
    let tree = t.tree();
    let mut expected = SubtreeBuilder::new();
    expected.add_vertex(VertexId(0));
    expected.add_point(&at(&t, q(2, 3)));
    let expected = expected.finish(tree);
    let fixed = fixed_set(&t, 1, CAP).map_err(|e| e.to_string())?;
    ensure(fixed == expected, || format!("tent fixed set {fixed:?}"))?;
    ensure(!fixed.is_connected(tree), || "tent fixed set reported connected".into())?;
    Ok(format!("{checked} fixed sets connected; tent F_1 = {{0, 2/3}}"))
}

fn hull_candidates(seed: u64) -> (Map, Vec<Point>, u64) {
    let n = 1 + (seed / 3) % 3;
    match seed % 3 {
        0 => {
            let f = tent();
            let pts = random_points(f.tree(), 2, seed);
            (f, pts, n)
        }
        1 => {
            let f = random_folding(seed);
            let k = 2 + (seed % 2) as usize;
            let pts = random_points(f.tree(), k, seed);
            (f, pts, n)
        }
        _ => {
            // Orbit-closed point sets of a finite-order map.
            let inst = random_finite_order_map(seed, seed + 1).map;
            let x = random_points(inst.tree(), 1, seed).remove(0);
            let mut pts = vec![x.clone()];
            let mut y = inst.evaluate(&x);
            while y != x {
                pts.push(y.clone());
                y = inst.evaluate(&y);
            }
            (inst, pts, n)
        }
    }
}

fn criterion_4() -> Outcome {
    let mut accepted = 0;
    let mut per_family = [0usize; 3];
    let mut fallbacks = 0;
    let mut seed = 0u64;
    while accepted < HULL_INSTANCES {
        ensure(seed < 20 * HULL_INSTANCES as u64, || format!("only {accepted} hull instances found"))?;
        let (f, pts, n) = hull_candidates(seed);
        seed += 1;
        let tree = f.tree();
        let hull = connected_hull(tree, &pts).unwrap();
        let far: Vec<Point> = pts.iter().map(|p| f.evaluate_iterated(p, n)).collect();
        if !hull.is_subset(&connected_hull(tree, &far).unwrap()) {
            continue;
        }
        accepted += 1;
        per_family[((seed - 1) % 3) as usize] += 1;
        let found = find_periodic_in_hull(&f, &pts, n, CAP).map_err(|e| format!("seed {}: {e}", seed - 1))?;
        fallbacks += usize::from(found.fallback_used);
        let x = found.point;
        ensure(f.evaluate_iterated(&x, n) == x, || format!("seed {}: f^{n}(x) ≠ x", seed - 1))?;
        ensure(hull.contains(&x), || format!("seed {}: x outside the hull", seed - 1))?;

        let g = iterate(&f, n, CAP).map_err(|e| e.to_string())?;
        let oracle = FixedOracle::solve(&g);
        ensure(oracle.contains(tree, &x), || format!("seed {}: x missing from the root enumeration", seed - 1))?;
        ensure(oracle.any_in(tree, &hull).is_some(), || format!("seed {}: enumeration finds nothing", seed - 1))?;
        let lib = g.fixed_points();
        for p in lib.sample_points(tree) {
            ensure(oracle.contains(tree, &p), || format!("seed {}: solver point {p:?} not a root", seed - 1))?;
        }
        for p in &oracle.points {
            ensure(lib.contains(p), || format!("seed {}: root {p:?} missed by the solver", seed - 1))?;
        }
    }
    Ok(format!(
        "{accepted} instances (tent {}, folding {}, finite-order {}), {fallbacks} via fallback",
        per_family[0], per_family[1], per_family[2]
    ))
}

fn criterion_5() -> Outcome {
    for m in [vec![2u64, 4, 8], vec![3, 6, 12]] {
        let ty = OdometerType::new(m.clone()).map_err(|e| e.to_string())?;
        let top = *m.last().unwrap();
        let valid: BTreeSet<Vec<u64>> = all_tuples(&m).into_iter().filter(|t| compatible(&m, t)).collect();
        ensure(valid.len() as u64 == top, || format!("{m:?}: oracle has {} tuples", valid.len()))?;

        let zero = OdometerAddress::zero(&ty);
        let mut seen = BTreeSet::new();
        let mut a = zero.clone();
        for _ in 0..top {
            ensure(seen.insert(a.digits().to_vec()), || format!("{m:?}: orbit repeats early"))?;
            a = tau(&a).map_err(|e| e.to_string())?;
        }
        ensure(a == zero, || format!("{m:?}: τ^{top} moves the zero address"))?;
        ensure(seen == valid, || format!("{m:?}: orbit misses valid addresses"))?;

        for t in valid.iter() {
            let mut b = OdometerAddress::new(ty.clone(), t.clone()).unwrap();
            for _ in 0..top {
                b = tau(&b).map_err(|e| e.to_string())?;
            }
            ensure(b.digits() == t.as_slice(), || format!("{m:?}: τ^{top} moves {t:?}"))?;
        }
        let full_box: Vec<Vec<u64>> =
            all_tuples(&m.iter().map(|x| x + 1).collect::<Vec<_>>()).into_iter().collect();
        for t in full_box {
            let in_range = t.iter().zip(&m).all(|(j, mi)| j < mi);
            let expected = in_range && compatible(&m, &t);
            let got = validate_address(&OdometerAddress::new(ty.clone(), t.clone()).unwrap());
            ensure(got == expected, || format!("{m:?}: validate_address({t:?}) = {got}"))?;
        }
    }
    Ok("τ orbits of length 8 and 12 cover the valid addresses; validation exact".into())
}

fn criterion_6() -> Outcome {
    let f = odometer_tower(3, &[2, 4, 8]).map_err(|e| e.to_string())?;
    let tree = f.tree();
    let levels = detect_cycles_of_sets(&f, 3, 1000, CAP).map_err(|e| e.to_string())?;
    let periods: Vec<Vec<usize>> = levels.iter().map(|l| l.cycles.iter().map(|c| c.period()).collect()).collect();
    ensure(periods == vec![vec![2], vec![4], vec![8]], || format!("cycle periods {periods:?}"))?;
    for level in &levels {
        for cycle in &level.cycles {
            for t in &cycle.attachments {
                let class = tree.order_of(t).map_err(|e| e.to_string())?.1;
                ensure(class == PointClass::Branchpoint, || format!("attachment {t:?} is {class:?}"))?;
            }
        }
    }
    let tower = select_tower(&levels, None).map_err(|e| e.to_string())?;
    ensure(tower.odometer_type().periods() == [2, 4, 8], || "tower type".into())?;
    let report = verify_semiconjugacy(&f, &tower, &[]);
    ensure(report.passed(), || format!("semiconjugacy failures {:?}", report.failures))?;
    let class = classify_adding_machine(&tower);
    ensure(class.kind == AddingMachineKind::Full, || format!("class {class:?}"))?;
    Ok(format!("periods [2,4,8]; {} deepest samples commute with τ; full", report.checked))
}

fn criterion_7() -> Outcome {
    for k in [3usize, 5, 8] {
        let f = arconbad_map(k).map_err(|e| e.to_string())?;
        let tree = f.tree();
        let centre = TreePoint::Vertex(VertexId(0));
        let fixed = fixed_set(&f, 1, CAP).map_err(|e| e.to_string())?;
        ensure(!fixed.contains(&centre), || format!("k={k}: centre is fixed"))?;
        let gap = fixed
            .corner_points(tree)
            .iter()
            .map(|p| tree.distance(&centre, p))
            .min()
            .ok_or_else(|| format!("k={k}: empty fixed set"))?;
        ensure(gap == q(1, 2 * k as i64), || format!("k={k}: gap {gap}"))?;
        // The near end of the fixed part of an arm: distance 1/(2k) from c.
        let near = tree.point_on_edge(EdgeId(1), q(1, 2)).unwrap();
        ensure(f.evaluate(&near) == near, || format!("k={k}: arm midpoint not fixed"))?;
    }

    let f = arconbad1_map(4).map_err(|e| e.to_string())?;
    let tree = f.tree();
    for e in tree.edge_ids() {
        let knots = f.knots(e);
        // Lipschitz bound on the edge from the steepest piece.
        let lip = knots
            .windows(2)
            .map(|w| tree.distance(&w[0].image, &w[1].image) / ((w[1].t.clone() - w[0].t.clone()) * tree.edge(e).length.clone()))
            .max()
            .unwrap();
        let grid: Vec<Point> = (0..=64).map(|i| tree.point_on_edge(e, q(i, 64)).unwrap()).collect();
        for w in grid.windows(2) {
            let (a, b) = (f.evaluate(&w[0]), f.evaluate(&w[1]));
            ensure(tree.distance(&a, &b) <= lip.clone() * tree.distance(&w[0], &w[1]), || {
                format!("edge {e:?} jumps between {:?} and {:?}", w[0], w[1])
            })?;
        }
    }
    let spread = iterate_spread(&f, 2, &TreePoint::Vertex(VertexId(1)), &q(1, 16), CAP).map_err(|e| e.to_string())?;
    ensure(spread >= q(1, 3), || format!("spread {spread}"))?;
    Ok(format!("gaps 1/6, 1/10, 1/16; arconbad1(4) edges continuous, f² spread {spread} at r=1/16"))
}

fn criterion_8(instances: &[TrueInstance]) -> Outcome {
    for (seed, inst) in instances.iter().enumerate() {
        let f = &inst.map;
        let mut samples = f.tree().grid_points(1);
        samples.extend(random_points(f.tree(), 3, seed as u64));
        let a = check_property_a(f, &samples, inst.n);
        ensure(a.passed(), || format!("seed {seed}: property A fails {:?}", a.violations.first()))?;
        let p = check_no_preperiodic(f, inst.n, &samples);
        ensure(p.passed(), || format!("seed {seed}: preperiodic point {:?}", p.violations.first()))?;
    }
    let negatives: [(&str, Map); 3] =
        [("tent", tent()), ("arconbad(3)", arconbad_map(3).unwrap()), ("arconbad(5)", arconbad_map(5).unwrap())];
    for (name, f) in negatives {
        let samples = f.tree().grid_points(4);
        let a = check_property_a(&f, &samples, 100);
        ensure(!a.passed() && !a.violations.is_empty(), || format!("{name}: property A passes"))?;
        let p = check_no_preperiodic(&f, 100, &samples);
        ensure(!p.violations.is_empty(), || format!("{name}: no preperiodic witness"))?;
        ensure(p.violations.iter().all(|w| w.verify(&f)), || format!("{name}: witness fails to verify"))?;
    }
    Ok(format!("{} recurrent instances pass; tent and arconbad fail with witnesses", instances.len()))
}

// ---------------------------------------------------------------------------

fn report(number: usize, title: &str, budget: Duration, run: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = run();
    let elapsed = start.elapsed();
    let (ok, detail) = match outcome {
        Ok(d) if elapsed <= budget => (true, d),
        Ok(d) => (false, format!("{d}; took {elapsed:.2?}, budget {budget:?}")),
        Err(e) => (false, e),
    };
    let label = if ok { "PASS" } else { "FAIL" };
    println!("{label} criterion {number} ({title}, {elapsed:.2?}): {detail}");
    ok
}

fn main() {
    let secs = Duration::from_secs;
    let mut all = true;
    all &= report(1, "interval maps", secs(1), criterion_1);

    let mut instances = Vec::new();
    all &= report(2, "recurrence equivalence", secs(60), || {
        instances = true_instances();
        criterion_2(&instances)
    });
    all &= report(3, "connected fixed sets", secs(60), || criterion_3(&instances));
    all &= report(4, "periodic point in a hull", secs(30), criterion_4);
    all &= report(5, "odometer arithmetic", secs(1), criterion_5);
    all &= report(6, "cycles of sets and semiconjugacy", secs(5), criterion_6);
    all &= report(7, "counterexamples at truncation", secs(5), criterion_7);
    all &= report(8, "property A and no preperiodic points", secs(30), || criterion_8(&instances));
    if !all {
        std::process::exit(1);
    }
}
