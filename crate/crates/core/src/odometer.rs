//! Adding machines: the truncated odometer `H(m_0, …, m_k)` with its add-one
//! map, and towers of nested cycles of sets detected in tree dynamics.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::dynamics::orbit_period;
use crate::error::{precondition, Error, Result};
use crate::pl_map::{compose, PlMap};
use crate::scalar::Scalar;
use crate::subtree::{OpenComponent, Subtree};
use crate::tree::TreePoint;

/// Periods `m_0 < m_1 < … < m_k` with `m_i | m_{i+1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OdometerType {
    periods: Vec<u64>,
}

impl OdometerType {
    pub fn new(periods: Vec<u64>) -> Result<Self> {
        if periods.is_empty() {
            return Err(precondition("odometer type needs at least one period"));
        }
        if periods[0] == 0 {
            return Err(precondition("periods must be positive"));
        }
        for w in periods.windows(2) {
            if w[1] <= w[0] {
                return Err(precondition(format!("periods must increase strictly: {} then {}", w[0], w[1])));
            }
            if w[1] % w[0] != 0 {
                return Err(precondition(format!("{} is not a multiple of {}", w[1], w[0])));
            }
        }
        Ok(OdometerType { periods })
    }

    pub fn periods(&self) -> &[u64] {
        &self.periods
    }

    /// Number of coordinates.
    pub fn len(&self) -> usize {
        self.periods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.periods.is_empty()
    }

    /// The last period `m_k`, which is the number of valid addresses.
    pub fn top(&self) -> u64 {
        *self.periods.last().expect("non-empty by construction")
    }

    /// The first `len` coordinates.
    pub fn truncate(&self, len: usize) -> Result<Self> {
        if len == 0 || len > self.periods.len() {
            return Err(precondition(format!("cannot truncate a type of length {} to {len}", self.len())));
        }
        Ok(OdometerType { periods: self.periods[..len].to_vec() })
    }
}

/// A digit tuple `(j_0, …, j_k)` for a given type; not necessarily valid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OdometerAddress {
    #[serde(skip)]
    ty: OdometerType,
    digits: Vec<u64>,
}

impl OdometerAddress {
    pub fn new(ty: OdometerType, digits: Vec<u64>) -> Result<Self> {
        if digits.len() != ty.len() {
            return Err(precondition(format!("address needs {} digits, got {}", ty.len(), digits.len())));
        }
        Ok(OdometerAddress { ty, digits })
    }

    /// The valid address whose last digit is `j` (reduced mod `m_k`).
    pub fn from_last_digit(ty: &OdometerType, j: u64) -> Self {
        let digits = ty.periods().iter().map(|m| j % m).collect();
        OdometerAddress { ty: ty.clone(), digits }
    }

    pub fn zero(ty: &OdometerType) -> Self {
        Self::from_last_digit(ty, 0)
    }

    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    pub fn odometer_type(&self) -> &OdometerType {
        &self.ty
    }
}

/// Digit ranges `j_i < m_i` and compatibility `j_{i+1} ≡ j_i (mod m_i)`.
pub fn validate_address(a: &OdometerAddress) -> bool {
    let m = a.ty.periods();
    a.digits.iter().zip(m).all(|(j, m)| j < m) && (1..m.len()).all(|i| a.digits[i] % m[i - 1] == a.digits[i - 1])
}

/// Adds one to every coordinate modulo its period.
pub fn tau(a: &OdometerAddress) -> Result<OdometerAddress> {
    if !validate_address(a) {
        return Err(Error::Invariant(format!("invalid odometer address {:?}", a.digits)));
    }
    let digits = a.digits.iter().zip(a.ty.periods()).map(|(j, m)| (j + 1) % m).collect();
    Ok(OdometerAddress { ty: a.ty.clone(), digits })
}

/// All valid addresses, ordered by last digit.
pub fn addresses(ty: &OdometerType) -> Vec<OdometerAddress> {
    (0..ty.top()).map(|j| OdometerAddress::from_last_digit(ty, j)).collect()
}

/// Sets `T^0, …, T^{p−1}` cyclically permuted by `f`, each a component of
/// `X ∖ D_n` hanging off the attachment point `t^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleOfSets<S> {
    pub sets: Vec<OpenComponent<S>>,
    pub attachments: Vec<TreePoint<S>>,
}

impl<S: Scalar> CycleOfSets<S> {
    pub fn period(&self) -> usize {
        self.sets.len()
    }

    /// Index of the set containing `x`.
    pub fn index_of(&self, x: &TreePoint<S>) -> Option<usize> {
        self.sets.iter().position(|s| s.contains(x))
    }

    fn rotated(&self, k: usize) -> Self {
        let p = self.period();
        CycleOfSets {
            sets: (0..p).map(|i| self.sets[(i + k) % p].clone()).collect(),
            attachments: (0..p).map(|i| self.attachments[(i + k) % p].clone()).collect(),
        }
    }
}

/// All cycles of components of `X ∖ D_n` for one `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleLevel<S> {
    pub n: u64,
    pub periodic_union: Subtree<S>,
    pub cycles: Vec<CycleOfSets<S>>,
}

/// Computes `D_n` for `n = 1` and then for `n` equal to the least period
/// of the points not yet in `D_n`, up to `depth` levels, and groups the
/// components of each complement into cycles under `f`.
pub fn detect_cycles_of_sets<S: Scalar>(
    f: &PlMap<S>,
    depth: usize,
    max_period: u64,
    piece_cap: usize,
) -> Result<Vec<CycleLevel<S>>> {
    let tree = f.tree();
    let mut levels = Vec::new();
    let mut power = f.clone();
    let mut computed = 1u64;
    let mut d = power.fixed_points();
    let mut n = 1u64;
    while levels.len() < depth {
        while computed < n {
            power = compose(f, &power, piece_cap)?;
            computed += 1;
            d = d.union(tree, &power.fixed_points());
        }
        let mut comps = d.complement_components(tree);
        if comps.is_empty() {
            break;
        }
        comps.sort_by(|a, b| a.order_cmp(b));
        let cycles = group_into_cycles(f, &comps, n)?;
        levels.push(CycleLevel { n, periodic_union: d.clone(), cycles });

        let mut next: Option<u64> = None;
        for c in &comps {
            for p in c.closure.sample_points(tree).into_iter().filter(|p| c.contains(p)) {
                if let Some(per) = orbit_period(f, &p, max_period) {
                    next = Some(next.map_or(per, |m: u64| m.min(per)));
                }
            }
        }
        match next {
            Some(m) if m > n => n = m,
            Some(m) => {
                return Err(Error::Invariant(format!("point of period {m} lies outside D_{n}")));
            }
            None => break,
        }
    }
    Ok(levels)
}

fn group_into_cycles<S: Scalar>(f: &PlMap<S>, comps: &[OpenComponent<S>], n: u64) -> Result<Vec<CycleOfSets<S>>> {
    let mut target = Vec::with_capacity(comps.len());
    for c in comps {
        let image = f.evaluate(c.representative());
        match comps.iter().position(|d| d.contains(&image)) {
            Some(j) => target.push(j),
            None => {
                return Err(Error::Invariant(format!(
                    "a component of the complement of D_{n} maps into D_{n}"
                )))
            }
        }
    }
    let mut seen = vec![false; comps.len()];
    let mut cycles = Vec::new();
    for start in 0..comps.len() {
        if seen[start] {
            continue;
        }
        let mut order = vec![start];
        seen[start] = true;
        let mut i = target[start];
        while i != start {
            if seen[i] {
                return Err(Error::Invariant(format!("components of the complement of D_{n} are not permuted")));
            }
            seen[i] = true;
            order.push(i);
            i = target[i];
        }
        let mut attachments = Vec::with_capacity(order.len());
        for (k, &i) in order.iter().enumerate() {
            let next = &comps[order[(k + 1) % order.len()]];
            if !f.image_of_set(&comps[i].closure).is_subset(&next.closure) {
                return Err(Error::Invariant(format!("f does not carry one set of a cycle into the next (D_{n})")));
            }
            let t = comps[i]
                .attachment()
                .ok_or_else(|| Error::Invariant(format!("D_{n} is not connected")))?
                .clone();
            attachments.push(t);
        }
        cycles.push(CycleOfSets { sets: order.iter().map(|&i| comps[i].clone()).collect(), attachments });
    }
    Ok(cycles)
}

/// A nested chain `C_0 ⊇ C_1 ⊇ …` of cycles with strictly increasing
/// periods, indexed from the root so that `T^0` of each level contains the
/// root point and `f^j(T^0_i) ⊆ T^j_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tower<S> {
    levels: Vec<CycleOfSets<S>>,
    root: TreePoint<S>,
    ty: OdometerType,
    emptied: BTreeSet<(usize, usize)>,
}

/// Builds the tower through `root`, or through the representative of the
/// first deepest component when no root is given.
pub fn select_tower<S: Scalar>(levels: &[CycleLevel<S>], root: Option<&TreePoint<S>>) -> Result<Tower<S>> {
    let root = match root {
        Some(r) => r.clone(),
        None => {
            let deepest = levels.last().ok_or_else(|| Error::Domain("no cycles of sets detected".into()))?;
            deepest
                .cycles
                .iter()
                .flat_map(|c| c.sets.iter())
                .min_by(|a, b| a.order_cmp(b))
                .expect("levels only hold non-empty cycle lists")
                .representative()
                .clone()
        }
    };
    let mut chain: Vec<CycleOfSets<S>> = Vec::new();
    for level in levels {
        let Some((cycle, j)) = level.cycles.iter().find_map(|c| c.index_of(&root).map(|j| (c, j))) else {
            break;
        };
        if chain.last().is_some_and(|prev| prev.period() >= cycle.period()) {
            continue;
        }
        chain.push(cycle.rotated(j));
    }
    if chain.is_empty() {
        return Err(Error::Domain("root point lies in no cycle of sets".into()));
    }
    let ty = OdometerType::new(chain.iter().map(|c| c.period() as u64).collect())
        .map_err(|e| Error::Invariant(format!("nested cycle periods do not form an odometer type: {e}")))?;
    Ok(Tower { levels: chain, root, ty, emptied: BTreeSet::new() })
}

impl<S: Scalar> Tower<S> {
    pub fn levels(&self) -> &[CycleOfSets<S>] {
        &self.levels
    }

    pub fn root(&self) -> &TreePoint<S> {
        &self.root
    }

    pub fn odometer_type(&self) -> &OdometerType {
        &self.ty
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// The first `depth` levels.
    pub fn truncate(&self, depth: usize) -> Result<Self> {
        Ok(Tower {
            levels: self.levels[..depth.min(self.levels.len())].to_vec(),
            root: self.root.clone(),
            ty: self.ty.truncate(depth)?,
            emptied: self.emptied.iter().copied().filter(|(l, _)| *l < depth).collect(),
        })
    }

    /// The same tower with `T^index` of `level` replaced by the empty set.
    pub fn with_emptied_set(&self, level: usize, index: usize) -> Result<Self> {
        if level >= self.levels.len() || index >= self.levels[level].period() {
            return Err(precondition("no such set in the tower"));
        }
        let mut out = self.clone();
        out.emptied.insert((level, index));
        Ok(out)
    }

    /// The same tower with two sets of one level exchanged.
    pub fn with_swapped_sets(&self, level: usize, i: usize, j: usize) -> Result<Self> {
        let p = self.levels.get(level).map(|c| c.period()).unwrap_or(0);
        if i >= p || j >= p {
            return Err(precondition("no such set in the tower"));
        }
        let mut out = self.clone();
        out.levels[level].sets.swap(i, j);
        out.levels[level].attachments.swap(i, j);
        Ok(out)
    }

    fn set_contains(&self, level: usize, index: usize, x: &TreePoint<S>) -> bool {
        !self.emptied.contains(&(level, index)) && self.levels[level].sets[index].contains(x)
    }

    fn index_at(&self, level: usize, x: &TreePoint<S>) -> Option<usize> {
        (0..self.levels[level].period()).find(|&j| self.set_contains(level, j, x))
    }

    /// `ψ(x)` truncated to the tower's depth.
    pub fn address_of(&self, x: &TreePoint<S>) -> Result<OdometerAddress> {
        let mut digits = Vec::with_capacity(self.levels.len());
        for level in 0..self.levels.len() {
            let j = self
                .index_at(level, x)
                .ok_or_else(|| Error::Domain(format!("point lies in no set of level {level}")))?;
            digits.push(j as u64);
        }
        OdometerAddress::new(self.ty.clone(), digits)
    }

    /// Points inside the deepest sets: vertices, interval ends and midpoints.
    pub fn deepest_samples(&self, tree: &crate::tree::MetricTree<S>) -> Vec<TreePoint<S>> {
        let level = self.levels.len() - 1;
        let mut out = Vec::new();
        for (j, set) in self.levels[level].sets.iter().enumerate() {
            for p in set.closure.sample_points(tree) {
                if self.set_contains(level, j, &p) {
                    out.push(p);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemiconjugacyFailure<S> {
    #[serde(skip)]
    pub point: TreePoint<S>,
    pub address: Vec<u64>,
    /// `None` when `f(x)` left the deepest level.
    pub image_address: Option<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemiconjugacyReport<S> {
    pub checked: usize,
    pub failures: Vec<SemiconjugacyFailure<S>>,
}

impl<S> SemiconjugacyReport<S> {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.checked > 0
    }
}

/// Checks `ψ(f(x)) = τ(ψ(x))` on the samples lying in the deepest level
/// (on [`Tower::deepest_samples`] when `samples` is empty).
pub fn verify_semiconjugacy<S: Scalar>(
    f: &PlMap<S>,
    tower: &Tower<S>,
    samples: &[TreePoint<S>],
) -> SemiconjugacyReport<S> {
    let points = if samples.is_empty() { tower.deepest_samples(f.tree()) } else { samples.to_vec() };
    let mut checked = 0;
    let mut failures = Vec::new();
    for x in points {
        let Ok(a) = tower.address_of(&x) else { continue };
        checked += 1;
        let expected = tau(&a).ok();
        let image = tower.address_of(&f.evaluate(&x)).ok();
        if image.is_none() || image != expected {
            failures.push(SemiconjugacyFailure {
                point: x,
                address: a.digits().to_vec(),
                image_address: image.map(|b| b.digits().to_vec()),
            });
        }
    }
    SemiconjugacyReport { checked, failures }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AddingMachineKind {
    Weak,
    TopologicalWeak,
    /// `ψ` is a continuous bijection onto the truncated odometer.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AddingMachineClass {
    /// Every set is open and lies inside a set of the previous level.
    pub open_in_parent: bool,
    /// Every compatible chain `T^{j_0}_0 ⊇ … ⊇ T^{j_k}_k` is non-empty.
    pub chains_nonempty: bool,
    /// Distinct deepest sets receive distinct addresses.
    pub psi_injective: bool,
    pub kind: AddingMachineKind,
}

pub fn classify_adding_machine<S: Scalar>(tower: &Tower<S>) -> AddingMachineClass {
    let depth = tower.depth();
    let live = |l: usize, j: usize| !tower.emptied.contains(&(l, j));

    let mut open_in_parent = true;
    for l in 1..depth {
        for (j, set) in tower.levels[l].sets.iter().enumerate() {
            if !live(l, j) {
                continue;
            }
            let parent = tower.levels[l - 1].index_of(set.representative());
            let nested = parent.is_some_and(|p| set.closure.is_subset(&tower.levels[l - 1].sets[p].closure));
            let boundary_outside = set.boundary.iter().all(|b| !set.contains(b));
            open_in_parent &= nested && boundary_outside;
        }
    }

    let ty = tower.odometer_type();
    let last = depth - 1;
    let mut chains_nonempty = true;
    for a in addresses(ty) {
        let deepest = a.digits()[last] as usize;
        if !live(last, deepest) || tower.levels[last].sets[deepest].closure.is_empty() {
            chains_nonempty = false;
            continue;
        }
        let rep = tower.levels[last].sets[deepest].representative();
        chains_nonempty &= (0..depth).all(|l| tower.set_contains(l, a.digits()[l] as usize, rep));
    }

    let mut seen: BTreeSet<Vec<u64>> = BTreeSet::new();
    let mut psi_injective = true;
    for (j, set) in tower.levels[last].sets.iter().enumerate() {
        if !live(last, j) {
            continue;
        }
        match tower.address_of(set.representative()) {
            Ok(a) => psi_injective &= seen.insert(a.digits().to_vec()),
            Err(_) => psi_injective = false,
        }
    }

    let kind = match (open_in_parent && psi_injective, chains_nonempty) {
        (true, true) => AddingMachineKind::Full,
        (true, false) => AddingMachineKind::TopologicalWeak,
        (false, _) => AddingMachineKind::Weak,
    };
    AddingMachineClass { open_in_parent, chains_nonempty, psi_injective, kind }
}

#[cfg(test)]
mod tests;
