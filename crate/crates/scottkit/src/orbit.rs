//! Orbit structures for finite group actions.
//!
//! For a finite group acting on a finite set, the structure attached to a
//! subset records, for every tuple over the subset, the canonical
//! representative of its diagonal orbit. Two subsets lie in one setwise
//! orbit exactly when their orbit structures are isomorphic, and a
//! bijection lifts to a group element exactly when it preserves every
//! tuple's orbit; both facts are checked exhaustively by the campaigns.

use crate::error::{Error, Result};
use crate::structure::{FiniteStructure, Signature};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// A finite group of permutations given by an explicit table. Index 0 is
/// the identity; closure under composition and inverses is verified at
/// construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteAction {
    set_size: usize,
    perms: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct ActionWire {
    n: usize,
    perms: Vec<Vec<usize>>,
}

impl FiniteAction {
    pub fn new(set_size: usize, perms: Vec<Vec<usize>>) -> Result<Self> {
        if set_size == 0 {
            return Err(Error::malformed("the acted-on set must be nonempty"));
        }
        if perms.is_empty() {
            return Err(Error::malformed("the group must contain the identity"));
        }
        for p in &perms {
            if p.len() != set_size {
                return Err(Error::malformed("permutation length mismatch"));
            }
            let mut seen = vec![false; set_size];
            for &x in p {
                if x >= set_size || seen[x] {
                    return Err(Error::malformed(format!("{p:?} is not a permutation")));
                }
                seen[x] = true;
            }
        }
        if perms[0] != (0..set_size).collect::<Vec<_>>() {
            return Err(Error::malformed("index 0 must be the identity"));
        }
        let index: BTreeMap<&Vec<usize>, usize> =
            perms.iter().enumerate().map(|(i, p)| (p, i)).collect();
        if index.len() != perms.len() {
            return Err(Error::malformed("duplicate group elements"));
        }
        for a in &perms {
            let mut inverse_found = false;
            for b in &perms {
                let composed: Vec<usize> = (0..set_size).map(|x| a[b[x]]).collect();
                if !index.contains_key(&composed) {
                    return Err(Error::malformed(
                        "table not closed under composition".to_string(),
                    ));
                }
                if composed == perms[0] {
                    inverse_found = true;
                }
            }
            if !inverse_found {
                return Err(Error::malformed("an element has no inverse".to_string()));
            }
        }
        Ok(FiniteAction { set_size, perms })
    }

    pub fn set_size(&self) -> usize {
        self.set_size
    }

    pub fn group_size(&self) -> usize {
        self.perms.len()
    }

    pub fn apply(&self, g: usize, point: usize) -> usize {
        self.perms[g][point]
    }

    pub fn apply_tuple(&self, g: usize, tuple: &[usize]) -> Vec<usize> {
        tuple.iter().map(|&x| self.perms[g][x]).collect()
    }

    pub fn apply_set(&self, g: usize, set: &BTreeSet<usize>) -> BTreeSet<usize> {
        set.iter().map(|&x| self.perms[g][x]).collect()
    }
}

impl Serialize for FiniteAction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ActionWire {
            n: self.set_size,
            perms: self.perms.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FiniteAction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let wire = ActionWire::deserialize(d)?;
        FiniteAction::new(wire.n, wire.perms).map_err(D::Error::custom)
    }
}

/// The lexicographic minimum of the diagonal orbit of a tuple; equal
/// canons mean equal orbits.
pub fn orbit_canon(act: &FiniteAction, tuple: &[usize]) -> Result<Vec<usize>> {
    if tuple.iter().any(|&x| x >= act.set_size()) {
        return Err(Error::malformed("tuple entry out of range"));
    }
    Ok((0..act.group_size())
        .map(|g| act.apply_tuple(g, tuple))
        .min()
        .unwrap())
}

/// The structure recording, for each tuple over a subset (with repeats,
/// lengths 1 up to the subset size), the canonical form of its orbit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitStructure {
    base: Vec<usize>, // sorted
    orbits: BTreeMap<Vec<usize>, Vec<usize>>,
}

impl OrbitStructure {
    pub fn base(&self) -> &[usize] {
        &self.base
    }

    pub fn orbits(&self) -> &BTreeMap<Vec<usize>, Vec<usize>> {
        &self.orbits
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "base": self.base,
            "orbits": self.orbits.iter().map(|(t, c)| serde_json::json!([t, c])).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<OrbitStructure> {
        #[derive(Deserialize)]
        struct Wire {
            base: Vec<usize>,
            orbits: Vec<(Vec<usize>, Vec<usize>)>,
        }
        let wire: Wire = serde_json::from_value(v.clone())
            .map_err(|e| Error::malformed(format!("bad orbit structure JSON: {e}")))?;
        Ok(OrbitStructure {
            base: wire.base,
            orbits: wire.orbits.into_iter().collect(),
        })
    }
}

fn tuples_over(points: &[usize], max_len: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![vec![]];
    let mut all = Vec::new();
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(out.len() * points.len());
        for t in &out {
            for &p in points {
                let mut t = t.clone();
                t.push(p);
                next.push(t);
            }
        }
        all.extend(next.iter().cloned());
        out = next;
    }
    all
}

pub fn build_orbit_structure(act: &FiniteAction, a: &BTreeSet<usize>) -> Result<OrbitStructure> {
    let base: Vec<usize> = a.iter().copied().collect();
    if base.iter().any(|&x| x >= act.set_size()) {
        return Err(Error::malformed("subset point out of range"));
    }
    let mut orbits = BTreeMap::new();
    for tuple in tuples_over(&base, base.len()) {
        let canon = orbit_canon(act, &tuple)?;
        orbits.insert(tuple, canon);
    }
    Ok(OrbitStructure { base, orbits })
}

/// A group element mapping one subset onto the other setwise, if any.
pub fn equiv_sets(
    act: &FiniteAction,
    a: &BTreeSet<usize>,
    b: &BTreeSet<usize>,
) -> Result<Option<usize>> {
    for set in [a, b] {
        if set.iter().any(|&x| x >= act.set_size()) {
            return Err(Error::malformed("subset point out of range"));
        }
    }
    Ok((0..act.group_size()).find(|&g| &act.apply_set(g, a) == b))
}

/// A group element inducing the given bijection pointwise, if any. For a
/// finite group this is exact: such an element exists precisely when the
/// bijection preserves the orbit of every tuple over its domain.
pub fn lift_bijection(act: &FiniteAction, pairs: &[(usize, usize)]) -> Result<Option<usize>> {
    let mut dom = BTreeSet::new();
    let mut rng = BTreeSet::new();
    for &(x, y) in pairs {
        if x >= act.set_size() || y >= act.set_size() {
            return Err(Error::malformed("bijection point out of range"));
        }
        if !dom.insert(x) || !rng.insert(y) {
            return Err(Error::malformed("pairs do not form a bijection"));
        }
    }
    Ok((0..act.group_size()).find(|&g| pairs.iter().all(|&(x, y)| act.apply(g, x) == y)))
}

/// Isomorphism of two orbit structures: a bijection of the base sets
/// carrying every tuple's orbit datum across. Decided by direct search;
/// the subsets involved are tiny.
pub fn orbit_structures_isomorphic(x: &OrbitStructure, y: &OrbitStructure) -> bool {
    let n = x.base.len();
    if n != y.base.len() {
        return false;
    }
    if n == 0 {
        return true;
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut found = false;
    heap_permutations(&mut perm, 0, &mut |p| {
        if found {
            return;
        }
        let ok = x.orbits.iter().all(|(tuple, canon)| {
            let image: Vec<usize> = tuple
                .iter()
                .map(|&e| {
                    let slot = x.base.iter().position(|&b| b == e).unwrap();
                    y.base[p[slot]]
                })
                .collect();
            y.orbits.get(&image) == Some(canon)
        });
        if ok {
            found = true;
        }
    });
    found
}

fn heap_permutations(perm: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == perm.len() {
        visit(perm);
        return;
    }
    for i in k..perm.len() {
        perm.swap(k, i);
        heap_permutations(perm, k + 1, visit);
        perm.swap(k, i);
    }
}

/// Is the candidate isomorphic to the orbit structure of some subset of
/// the ambient action? First a type check (every claimed datum must be a
/// genuine canonical orbit of the ambient action), then a forth-style
/// embedding search assigning ambient points one by one.
pub fn embeds_as_nice(act: &FiniteAction, candidate: &OrbitStructure) -> Result<bool> {
    let m = candidate.base.len();
    if m > act.set_size() {
        return Ok(false);
    }
    let expected = tuples_over(&candidate.base, m).len();
    if candidate.orbits.len() != expected {
        return Err(Error::malformed(format!(
            "candidate must list all {expected} tuples over its base"
        )));
    }
    for (tuple, canon) in &candidate.orbits {
        if tuple.len() > m || tuple.iter().any(|e| !candidate.base.contains(e)) {
            return Err(Error::malformed("candidate tuple outside its base"));
        }
        if canon.len() != tuple.len() {
            return Err(Error::malformed("datum length differs from its tuple"));
        }
        if canon.iter().any(|&x| x >= act.set_size()) {
            return Ok(false);
        }
        // a datum no ambient tuple realizes fails the canon fixpoint test
        if orbit_canon(act, canon)? != *canon {
            return Ok(false);
        }
    }
    let mut assignment: Vec<usize> = Vec::with_capacity(m);
    Ok(embed_search(act, candidate, &mut assignment))
}

fn embed_search(act: &FiniteAction, cand: &OrbitStructure, assignment: &mut Vec<usize>) -> bool {
    let m = cand.base.len();
    if assignment.len() == m {
        return true;
    }
    'points: for p in 0..act.set_size() {
        if assignment.contains(&p) {
            continue;
        }
        assignment.push(p);
        // check every candidate tuple fully inside the assigned prefix
        let k = assignment.len();
        for (tuple, canon) in &cand.orbits {
            if tuple
                .iter()
                .any(|e| cand.base.iter().position(|b| b == e).unwrap() >= k)
            {
                continue;
            }
            if !tuple
                .iter()
                .any(|e| cand.base.iter().position(|b| b == e).unwrap() == k - 1)
            {
                continue;
            }
            let image: Vec<usize> = tuple
                .iter()
                .map(|e| assignment[cand.base.iter().position(|b| b == e).unwrap()])
                .collect();
            if orbit_canon(act, &image).unwrap() != *canon {
                assignment.pop();
                continue 'points;
            }
        }
        if embed_search(act, cand, assignment) {
            return true;
        }
        assignment.pop();
    }
    false
}

/// Materialize an orbit structure as a relational structure over the
/// ambient action's orbit alphabet: one symbol per (length, canonical
/// orbit) pair up to `cap`, so any two subsets of the same action and
/// size land in one signature and the sentence engine can compare them.
pub fn materialize_orbit_structure(
    act: &FiniteAction,
    s: &OrbitStructure,
    cap: usize,
) -> Result<FiniteStructure> {
    let points: Vec<usize> = (0..act.set_size()).collect();
    let mut symbols: Vec<(String, usize)> = Vec::new();
    let mut canon_index: BTreeMap<(usize, Vec<usize>), usize> = BTreeMap::new();
    for len in 1..=cap {
        let mut canons: BTreeSet<Vec<usize>> = BTreeSet::new();
        for tuple in tuples_over(&points, len) {
            if tuple.len() == len {
                canons.insert(orbit_canon(act, &tuple)?);
            }
        }
        for canon in canons {
            let name = format!(
                "O{len}_{}",
                canon
                    .iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join("_")
            );
            canon_index.insert((len, canon), symbols.len());
            symbols.push((name, len));
        }
    }
    let sig = Signature::new(symbols)?;
    let mut interp = vec![BTreeSet::new(); sig.len()];
    if s.base.len() > cap {
        return Err(Error::malformed("cap smaller than the base"));
    }
    for (tuple, canon) in &s.orbits {
        let local: Vec<usize> = tuple
            .iter()
            .map(|e| s.base.iter().position(|b| b == e).unwrap())
            .collect();
        let idx = canon_index
            .get(&(tuple.len(), canon.clone()))
            .copied()
            .ok_or_else(|| Error::malformed("datum not realized by the ambient action"))?;
        interp[idx].insert(local);
    }
    if s.base.is_empty() {
        return Err(Error::malformed(
            "empty orbit structures have no relational form",
        ));
    }
    FiniteStructure::new(sig, s.base.len(), interp)
}

/// A few standard actions on up to four points, used by the campaigns.
pub mod catalog {
    use super::FiniteAction;

    fn close(set_size: usize, generators: &[Vec<usize>]) -> FiniteAction {
        let identity: Vec<usize> = (0..set_size).collect();
        let mut elems = vec![identity];
        loop {
            let mut grew = false;
            let snapshot = elems.clone();
            for a in &snapshot {
                for g in generators {
                    let composed: Vec<usize> = (0..set_size).map(|x| g[a[x]]).collect();
                    if !elems.contains(&composed) {
                        elems.push(composed);
                        grew = true;
                    }
                }
            }
            if !grew {
                break;
            }
        }
        FiniteAction::new(set_size, elems).unwrap()
    }

    pub fn trivial_on_4() -> FiniteAction {
        close(4, &[])
    }

    pub fn z2_on_4() -> FiniteAction {
        close(4, &[vec![1, 0, 2, 3]])
    }

    pub fn z4_rotations() -> FiniteAction {
        close(4, &[vec![1, 2, 3, 0]])
    }

    pub fn klein_on_4() -> FiniteAction {
        close(4, &[vec![1, 0, 3, 2], vec![2, 3, 0, 1]])
    }

    pub fn s3_fixing_last() -> FiniteAction {
        close(4, &[vec![1, 0, 2, 3], vec![0, 2, 1, 3]])
    }

    pub fn s4() -> FiniteAction {
        close(4, &[vec![1, 0, 2, 3], vec![1, 2, 3, 0]])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_group_fixes_tuples() {
        let act = catalog::trivial_on_4();
        assert_eq!(orbit_canon(&act, &[2, 1]).unwrap(), vec![2, 1]);
    }

    #[test]
    fn rotation_orbit_minimum() {
        let act = catalog::z4_rotations();
        assert_eq!(orbit_canon(&act, &[3]).unwrap(), vec![0]);
        assert_eq!(orbit_canon(&act, &[0, 1]).unwrap(), vec![0, 1]);
        assert_eq!(orbit_canon(&act, &[1, 0]).unwrap(), vec![0, 3]);
    }

    #[test]
    fn symmetric_group_merges_distinct_pairs() {
        let act = catalog::s4();
        assert_eq!(
            orbit_canon(&act, &[0, 1]).unwrap(),
            orbit_canon(&act, &[2, 1]).unwrap()
        );
        assert_ne!(
            orbit_canon(&act, &[0, 0]).unwrap(),
            orbit_canon(&act, &[0, 1]).unwrap()
        );
    }

    #[test]
    fn closure_validation_rejects_non_groups() {
        // missing the inverse rotation
        let bad = vec![vec![0, 1, 2, 3], vec![1, 2, 3, 0]];
        assert!(FiniteAction::new(4, bad).is_err());
    }

    #[test]
    fn equiv_sets_on_rotations() {
        let act = catalog::z4_rotations();
        let a: BTreeSet<usize> = [0, 1].into();
        let b: BTreeSet<usize> = [1, 2].into();
        let g = equiv_sets(&act, &a, &b).unwrap().unwrap();
        assert_eq!(act.apply_set(g, &a), b);
        assert_eq!(equiv_sets(&act, &a, &a).unwrap(), Some(0));
        let c: BTreeSet<usize> = [0, 1, 2].into();
        assert_eq!(equiv_sets(&act, &a, &c).unwrap(), None);
    }

    #[test]
    fn lift_bijection_on_rotations() {
        let act = catalog::z4_rotations();
        let g = lift_bijection(&act, &[(0, 1), (1, 2)]).unwrap().unwrap();
        assert_eq!(act.apply(g, 0), 1);
        assert_eq!(lift_bijection(&act, &[(0, 0), (1, 1)]).unwrap(), Some(0));
        assert_eq!(lift_bijection(&act, &[(0, 1), (1, 0)]).unwrap(), None);
    }

    #[test]
    fn empty_subset_builds_empty_structure() {
        let act = catalog::s4();
        let s = build_orbit_structure(&act, &BTreeSet::new()).unwrap();
        assert!(s.orbits().is_empty());
    }

    #[test]
    fn orbit_equiv_matches_structure_isomorphism_on_z4() {
        let act = catalog::z4_rotations();
        let subsets: Vec<BTreeSet<usize>> = (0u32..16)
            .map(|bits| (0..4).filter(|&i| bits >> i & 1 == 1).collect())
            .collect();
        for a in &subsets {
            for b in &subsets {
                let lhs = equiv_sets(&act, a, b).unwrap().is_some();
                let sa = build_orbit_structure(&act, a).unwrap();
                let sb = build_orbit_structure(&act, b).unwrap();
                let rhs = orbit_structures_isomorphic(&sa, &sb);
                assert_eq!(lhs, rhs, "subsets {a:?} vs {b:?}");
            }
        }
    }

    #[test]
    fn nice_accepts_built_structures_and_relabelings() {
        let act = catalog::z4_rotations();
        let a: BTreeSet<usize> = [0, 1].into();
        let s = build_orbit_structure(&act, &a).unwrap();
        assert!(embeds_as_nice(&act, &s).unwrap());

        // relabel the base points 0,1 -> 5,9 (abstract labels)
        let relabeled = OrbitStructure {
            base: vec![5, 9],
            orbits: s
                .orbits()
                .iter()
                .map(|(t, c)| {
                    (
                        t.iter().map(|&e| if e == 0 { 5 } else { 9 }).collect(),
                        c.clone(),
                    )
                })
                .collect(),
        };
        assert!(embeds_as_nice(&act, &relabeled).unwrap());
    }

    #[test]
    fn nice_rejects_unrealized_data() {
        let act = catalog::trivial_on_4();
        // claims 0 and 1 are in one orbit, which the trivial group denies
        let phony = OrbitStructure {
            base: vec![0, 1],
            orbits: tuples_over(&[0, 1], 2)
                .into_iter()
                .map(|t| {
                    let c = t.iter().map(|&e| if e == 1 { 0 } else { e }).collect();
                    (t, c)
                })
                .collect(),
        };
        assert!(!embeds_as_nice(&act, &phony).unwrap());
    }

    #[test]
    fn materialized_structures_compare_by_sentence() {
        use crate::scott::css_equal;
        let act = catalog::z4_rotations();
        let a: BTreeSet<usize> = [0, 1].into();
        let b: BTreeSet<usize> = [1, 2].into();
        let c: BTreeSet<usize> = [0, 2].into();
        let sa = build_orbit_structure(&act, &a).unwrap();
        let sb = build_orbit_structure(&act, &b).unwrap();
        let sc = build_orbit_structure(&act, &c).unwrap();
        let ma = materialize_orbit_structure(&act, &sa, 2).unwrap();
        let mb = materialize_orbit_structure(&act, &sb, 2).unwrap();
        let mc = materialize_orbit_structure(&act, &sc, 2).unwrap();
        assert!(css_equal(&ma, &mb).unwrap());
        assert!(!css_equal(&ma, &mc).unwrap());
    }

    #[test]
    fn action_json_round_trip() {
        let act = catalog::klein_on_4();
        let text = serde_json::to_string(&act).unwrap();
        let back: FiniteAction = serde_json::from_str(&text).unwrap();
        assert_eq!(act, back);
    }
}
