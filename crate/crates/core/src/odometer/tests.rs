use proptest::prelude::*;

use super::*;
use crate::fixtures::{odometer_tower, rotation_star};
use crate::pl_map::DEFAULT_PIECE_CAP;
use crate::tree::{EdgeId, PointClass, VertexId};
use crate::{Map, Point, Q};

fn ty(periods: &[u64]) -> OdometerType {
    OdometerType::new(periods.to_vec()).unwrap()
}

fn addr(periods: &[u64], digits: &[u64]) -> OdometerAddress {
    OdometerAddress::new(ty(periods), digits.to_vec()).unwrap()
}

fn named(f: &Map, name: &str) -> Point {
    TreePoint::Vertex(f.tree().vertex_by_name(name).unwrap())
}

fn tower_of(f: &Map, depth: usize) -> Tower<Q> {
    let levels = detect_cycles_of_sets(f, depth, 1000, DEFAULT_PIECE_CAP).unwrap();
    select_tower(&levels, None).unwrap()
}

/// Compatibility written out digit by digit, straight from the congruences.
fn compatible_oracle(m: &[u64], j: &[u64]) -> bool {
    for i in 0..m.len() {
        if j[i] >= m[i] {
            return false;
        }
        if i > 0 && (j[i] as i64 - j[i - 1] as i64).rem_euclid(m[i - 1] as i64) != 0 {
            return false;
        }
    }
    true
}

#[test]
fn type_rejects_broken_chains() {
    assert!(OdometerType::new(vec![]).is_err());
    assert!(OdometerType::new(vec![0, 4]).is_err());
    assert!(OdometerType::new(vec![2, 2]).is_err());
    assert!(OdometerType::new(vec![2, 5]).is_err());
    assert_eq!(ty(&[2, 4, 8]).top(), 8);
    assert_eq!(ty(&[2, 4, 8]).truncate(2).unwrap().periods(), &[2, 4]);
    assert!(ty(&[2, 4]).truncate(3).is_err());
    assert!(OdometerAddress::new(ty(&[2, 4]), vec![1]).is_err());
}

#[test]
fn tau_examples() {
    assert_eq!(tau(&addr(&[2, 4, 8], &[1, 3, 7])).unwrap().digits(), &[0, 0, 0]);
    assert_eq!(tau(&addr(&[2, 4, 8], &[0, 0, 0])).unwrap().digits(), &[1, 1, 1]);
    assert_eq!(tau(&addr(&[2, 4], &[0, 2])).unwrap().digits(), &[1, 3]);
    assert!(matches!(tau(&addr(&[2, 4], &[1, 2])), Err(Error::Invariant(_))));
}

#[test]
fn validate_examples() {
    assert!(validate_address(&addr(&[2, 4], &[1, 3])));
    assert!(!validate_address(&addr(&[2, 4], &[1, 2])));
    assert!(validate_address(&addr(&[2, 4, 8], &[0, 2, 6])));
    assert!(!validate_address(&addr(&[2, 4], &[2, 0])));
}

#[test]
fn addresses_are_exactly_the_valid_tuples() {
    let m = [3u64, 6, 12];
    let listed: BTreeSet<Vec<u64>> = addresses(&ty(&m)).iter().map(|a| a.digits().to_vec()).collect();
    let mut brute = BTreeSet::new();
    for a in 0..m[0] {
        for b in 0..m[1] {
            for c in 0..m[2] {
                if compatible_oracle(&m, &[a, b, c]) {
                    brute.insert(vec![a, b, c]);
                }
            }
        }
    }
    assert_eq!(listed, brute);
    assert_eq!(listed.len(), 12);
}

#[test]
fn detects_tower_periods() {
    let f = odometer_tower(2, &[2, 4]).unwrap();
    let levels = detect_cycles_of_sets(&f, 4, 1000, DEFAULT_PIECE_CAP).unwrap();
    let periods: Vec<Vec<usize>> = levels.iter().map(|l| l.cycles.iter().map(|c| c.period()).collect()).collect();
    assert_eq!(periods, vec![vec![2], vec![4]]);
    assert_eq!(levels.iter().map(|l| l.n).collect::<Vec<_>>(), vec![1, 2]);
    let tower = select_tower(&levels, None).unwrap();
    assert_eq!(tower.odometer_type().periods(), &[2, 4]);
}

#[test]
fn tower_attachments_are_branchpoints() {
    let f = odometer_tower(3, &[2, 4, 8]).unwrap();
    let tree = f.tree();
    for level in detect_cycles_of_sets(&f, 3, 1000, DEFAULT_PIECE_CAP).unwrap() {
        for cycle in &level.cycles {
            for (set, t) in cycle.sets.iter().zip(&cycle.attachments) {
                assert_eq!(tree.order_of(t).unwrap().1, PointClass::Branchpoint);
                assert!(!set.contains(t));
                assert!(level.periodic_union.contains(t));
            }
        }
    }
}

#[test]
fn cycle_sets_are_disjoint_and_carried_forward() {
    let f = odometer_tower(3, &[2, 4, 8]).unwrap();
    let tree = f.tree();
    for level in detect_cycles_of_sets(&f, 3, 1000, DEFAULT_PIECE_CAP).unwrap() {
        for cycle in &level.cycles {
            let p = cycle.period();
            for i in 0..p {
                let image = f.image_of_set(&cycle.sets[i].closure);
                assert!(image.is_subset(&cycle.sets[(i + 1) % p].closure));
                for x in cycle.sets[i].closure.sample_points(tree).iter().filter(|x| cycle.sets[i].contains(x)) {
                    assert_eq!(cycle.index_of(x), Some(i));
                }
            }
        }
    }
}

#[test]
fn rotation_has_one_cycle_of_arms() {
    let f = rotation_star(3, Q::from_int(1)).unwrap();
    let levels = detect_cycles_of_sets(&f, 4, 1000, DEFAULT_PIECE_CAP).unwrap();
    assert_eq!(levels.len(), 1);
    assert_eq!(levels[0].cycles.len(), 1);
    assert_eq!(levels[0].cycles[0].period(), 3);
    assert_eq!(levels[0].periodic_union, Subtree::point(f.tree(), &TreePoint::Vertex(VertexId(0))));
}

#[test]
fn identity_has_no_cycles() {
    let f = PlMap::identity(rotation_star(3, Q::from_int(1)).unwrap().shared_tree());
    let levels = detect_cycles_of_sets(&f, 4, 1000, DEFAULT_PIECE_CAP).unwrap();
    assert!(levels.is_empty());
    assert!(matches!(select_tower(&levels, None), Err(Error::Domain(_))));
}

#[test]
fn address_examples() {
    let f = odometer_tower(2, &[2, 4]).unwrap();
    let tower = tower_of(&f, 2);
    assert!(tower.levels()[1].sets[0].contains(&named(&f, "L2.0")));
    assert_eq!(tower.address_of(&named(&f, "L2.3")).unwrap().digits(), &[1, 3]);

    let shallow = tower.truncate(1).unwrap();
    let e = f.tree().edge_by_name("e1.0").unwrap();
    assert_eq!(shallow.address_of(&f.tree().midpoint(e)).unwrap().digits(), &[0]);
    assert!(matches!(tower.address_of(&named(&f, "r")), Err(Error::Domain(_))));
}

#[test]
fn leaf_addresses_follow_labels() {
    let f = odometer_tower(3, &[2, 4, 8]).unwrap();
    let tower = tower_of(&f, 3);
    for label in 0..8u64 {
        let a = tower.address_of(&named(&f, &format!("L3.{label}"))).unwrap();
        assert_eq!(a.digits(), &[label % 2, label % 4, label]);
    }
}

#[test]
fn explicit_root_rotates_the_tower() {
    let f = odometer_tower(2, &[2, 4]).unwrap();
    let levels = detect_cycles_of_sets(&f, 2, 1000, DEFAULT_PIECE_CAP).unwrap();
    let tower = select_tower(&levels, Some(&named(&f, "L2.1"))).unwrap();
    assert_eq!(tower.address_of(&named(&f, "L2.1")).unwrap().digits(), &[0, 0]);
    assert_eq!(tower.address_of(&named(&f, "L2.0")).unwrap().digits(), &[1, 3]);
}

#[test]
fn semiconjugacy_holds_on_towers() {
    let f = odometer_tower(2, &[2, 4]).unwrap();
    let tower = tower_of(&f, 2);
    let report = verify_semiconjugacy(&f, &tower, &[]);
    assert!(report.passed());
    let leaves: Vec<Point> = (0..4).map(|j| named(&f, &format!("L2.{j}"))).collect();
    let report = verify_semiconjugacy(&f, &tower, &leaves);
    assert_eq!(report.checked, 4);
    assert!(report.passed());
}

#[test]
fn semiconjugacy_on_rotation() {
    let f = rotation_star(3, Q::from_int(1)).unwrap();
    let tower = tower_of(&f, 1);
    assert_eq!(tower.odometer_type().periods(), &[3]);
    for e in f.tree().edge_ids() {
        let x = f.tree().midpoint(e);
        let a = tower.address_of(&x).unwrap().digits()[0];
        let b = tower.address_of(&f.evaluate(&x)).unwrap().digits()[0];
        assert_eq!(b, (a + 1) % 3);
    }
    assert!(verify_semiconjugacy(&f, &tower, &[]).passed());
}

#[test]
fn misordered_cycle_fails_semiconjugacy() {
    let f = odometer_tower(2, &[2, 4]).unwrap();
    let tower = tower_of(&f, 2).with_swapped_sets(1, 0, 1).unwrap();
    let report = verify_semiconjugacy(&f, &tower, &[]);
    assert!(!report.passed());
    assert!(report.failures.iter().all(|fl| fl.image_address.is_some()));
    assert!(tower_of(&f, 2).with_swapped_sets(1, 0, 9).is_err());
}

#[test]
fn classification_examples() {
    let f = odometer_tower(2, &[2, 4]).unwrap();
    let tower = tower_of(&f, 2);
    let class = classify_adding_machine(&tower);
    assert_eq!(class.kind, AddingMachineKind::Full);
    assert!(class.open_in_parent && class.chains_nonempty && class.psi_injective);

    let emptied = tower.with_emptied_set(1, 2).unwrap();
    let class = classify_adding_machine(&emptied);
    assert!(!class.chains_nonempty);
    assert_ne!(class.kind, AddingMachineKind::Full);
    assert!(matches!(emptied.address_of(&named(&f, "L2.2")), Err(Error::Domain(_))));

    let rho = rotation_star(3, Q::from_int(1)).unwrap();
    assert_eq!(classify_adding_machine(&tower_of(&rho, 1)).kind, AddingMachineKind::Full);
}

#[test]
fn deeper_tower_is_full() {
    let f = odometer_tower(3, &[2, 4, 8]).unwrap();
    let tower = tower_of(&f, 3);
    assert_eq!(tower.depth(), 3);
    assert_eq!(classify_adding_machine(&tower).kind, AddingMachineKind::Full);
    assert!(verify_semiconjugacy(&f, &tower, &[]).passed());
}

#[test]
fn stem_midpoint_is_outside_every_level() {
    let f = odometer_tower(2, &[2, 4]).unwrap();
    let tower = tower_of(&f, 2);
    let stem = f.tree().midpoint(EdgeId(0));
    assert!(tower.address_of(&stem).is_err());
}

fn odometer_type_strategy() -> impl Strategy<Value = OdometerType> {
    (2u64..5, prop::collection::vec(2u64..4, 0..3)).prop_map(|(m0, factors)| {
        let mut periods = vec![m0];
        for k in factors {
            let next = periods.last().unwrap() * k;
            periods.push(next);
        }
        OdometerType::new(periods).unwrap()
    })
}

proptest! {
    #[test]
    fn tau_permutes_valid_addresses(t in odometer_type_strategy()) {
        let all = addresses(&t);
        let images: BTreeSet<Vec<u64>> = all.iter().map(|a| tau(a).unwrap().digits().to_vec()).collect();
        prop_assert_eq!(images.len(), all.len());
        for a in &all {
            let b = tau(a).unwrap();
            prop_assert!(validate_address(&b));
            prop_assert_ne!(b.digits(), a.digits());
        }
    }

    #[test]
    fn zero_orbit_is_minimal(t in odometer_type_strategy()) {
        let zero = OdometerAddress::zero(&t);
        let mut seen = BTreeSet::new();
        let mut a = zero.clone();
        for _ in 0..t.top() {
            prop_assert!(seen.insert(a.digits().to_vec()));
            a = tau(&a).unwrap();
        }
        prop_assert_eq!(a, zero);
        prop_assert_eq!(seen.len() as u64, t.top());
    }

    #[test]
    fn validate_agrees_with_congruences(t in odometer_type_strategy(), raw in prop::collection::vec(0u64..40, 4)) {
        let digits: Vec<u64> = raw[..t.len()].to_vec();
        let a = OdometerAddress::new(t.clone(), digits.clone()).unwrap();
        prop_assert_eq!(validate_address(&a), compatible_oracle(t.periods(), &digits));
    }
}
