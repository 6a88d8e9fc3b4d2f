//! Finite-support colorings of the binary tree and the groups acting on
//! them.
//!
//! Two regimes matter. The level-wise XOR action is abelian and acts on a
//! finite-support coloring entirely within its depth, so equivalence of
//! families is decided exactly by searching the 2^d level flips. Truncated
//! tree automorphisms are kept as a brute-force utility for depth-total
//! semantics; they form a 2-group, and `find_rigidity_counterexample`
//! exhibits the structural gap between the two regimes: the abelian action
//! admits no stabilizer that moves an equivalent tuple, the tree action
//! does.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A finite, prefix-closed assignment of positive values to tree nodes;
/// nodes outside the support implicitly carry 0.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Coloring {
    values: BTreeMap<String, u32>,
}

fn check_binary(s: &str) -> Result<()> {
    if s.chars().any(|c| c != '0' && c != '1') {
        return Err(Error::malformed(format!("expected a binary string, got {s:?}")));
    }
    Ok(())
}

impl Coloring {
    pub fn new(values: BTreeMap<String, u32>) -> Result<Self> {
        for (node, &v) in &values {
            check_binary(node)?;
            if v == 0 {
                return Err(Error::malformed("support values must be positive"));
            }
            if !node.is_empty() && !values.contains_key(&node[..node.len() - 1]) {
                return Err(Error::malformed(format!(
                    "support not prefix-closed at {node:?}"
                )));
            }
        }
        Ok(Coloring { values })
    }

    pub fn value(&self, node: &str) -> u32 {
        self.values.get(node).copied().unwrap_or(0)
    }

    pub fn support(&self) -> impl Iterator<Item = (&str, u32)> {
        self.values.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn support_depth(&self) -> usize {
        self.values.keys().map(|k| k.len()).max().unwrap_or(0)
    }

    /// The multiset of values on the support, an invariant of every
    /// action considered here.
    pub fn value_multiset(&self) -> Vec<u32> {
        let mut vs: Vec<u32> = self.values.values().copied().collect();
        vs.sort_unstable();
        vs
    }
}

/// A truncated tree automorphism: one swap bit per internal node of the
/// depth-`d` binary tree, indexed by the node's original address.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TotalAut {
    depth: usize,
    swaps: Vec<u8>, // rank(s) = 2^|s| - 1 + value(s), for |s| < depth
}

fn bin_rank(s: &str) -> usize {
    let mut rank = 0usize;
    for ch in s.bytes() {
        rank = rank * 2 + (ch - b'0') as usize;
    }
    (1 << s.len()) - 1 + rank
}

impl TotalAut {
    pub fn identity(depth: usize) -> TotalAut {
        TotalAut {
            depth,
            swaps: vec![0; (1 << depth) - 1],
        }
    }

    pub fn from_bits(depth: usize, bits: u64) -> TotalAut {
        let count = (1usize << depth) - 1;
        TotalAut {
            depth,
            swaps: (0..count).map(|i| (bits >> i & 1) as u8).collect(),
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn swap_at(&self, node: &str) -> u8 {
        self.swaps[bin_rank(node)]
    }

    /// Image of a node of length at most the depth.
    pub fn apply(&self, s: &str) -> Result<String> {
        if s.len() > self.depth {
            return Err(Error::DepthOverflow(format!(
                "node {s:?} deeper than {}",
                self.depth
            )));
        }
        let mut out = String::with_capacity(s.len());
        for i in 0..s.len() {
            let bit = s.as_bytes()[i] - b'0';
            let swap = self.swaps[bin_rank(&s[..i])];
            out.push(char::from(b'0' + (bit ^ swap)));
        }
        Ok(out)
    }

    pub fn compose(&self, other: &TotalAut) -> Result<TotalAut> {
        if self.depth != other.depth {
            return Err(Error::ShapeMismatch("automorphism depths differ".into()));
        }
        // (self ∘ other)(s): other consults s's prefixes, self consults
        // their images under other
        let mut out = TotalAut::identity(self.depth);
        for len in 0..self.depth {
            for rank in 0..1usize << len {
                let node = bits_to_string(rank, len);
                let image = other.apply(&node)?;
                out.swaps[bin_rank(&node)] =
                    other.swaps[bin_rank(&node)] ^ self.swaps[bin_rank(&image)];
            }
        }
        Ok(out)
    }

    pub fn inverse(&self) -> TotalAut {
        let mut out = TotalAut::identity(self.depth);
        for len in 0..self.depth {
            for rank in 0..1usize << len {
                let node = bits_to_string(rank, len);
                // the inverse flips at the image of each node
                let image = self.apply(&node).unwrap();
                out.swaps[bin_rank(&image)] = self.swaps[bin_rank(&node)];
            }
        }
        out
    }

    pub fn enumerate(depth: usize) -> Result<Vec<TotalAut>> {
        if depth > 4 {
            return Err(Error::DepthRefused(depth, 4));
        }
        let count = (1usize << depth) - 1;
        Ok((0u64..1 << count)
            .map(|bits| TotalAut::from_bits(depth, bits))
            .collect())
    }
}

fn bits_to_string(rank: usize, len: usize) -> String {
    (0..len)
        .map(|i| char::from(b'0' + (rank >> (len - 1 - i) & 1) as u8))
        .collect()
}

/// An element of one of the three groups acting on colorings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupElem {
    /// Level-wise flip: position i of every node is xored with bit i.
    Xor { bits: Vec<u8> },
    /// A finite partial automorphism: a level- and prefix-preserving
    /// bijection between two prefix-closed node sets.
    Partial { map: BTreeMap<String, String> },
    /// A truncated tree automorphism.
    Total(TotalAut),
}

impl GroupElem {
    pub fn xor_from_str(bits: &str) -> Result<GroupElem> {
        check_binary(bits)?;
        Ok(GroupElem::Xor {
            bits: bits.bytes().map(|b| b - b'0').collect(),
        })
    }

    pub fn xor_identity(depth: usize) -> GroupElem {
        GroupElem::Xor {
            bits: vec![0; depth],
        }
    }

    pub fn partial(map: BTreeMap<String, String>) -> Result<GroupElem> {
        let mut inverse: BTreeMap<&String, &String> = BTreeMap::new();
        for (from, to) in &map {
            check_binary(from)?;
            check_binary(to)?;
            if from.len() != to.len() {
                return Err(Error::malformed(format!(
                    "partial map entry {from:?} -> {to:?} changes length"
                )));
            }
            if inverse.insert(to, from).is_some() {
                return Err(Error::malformed("partial map is not injective"));
            }
            if !from.is_empty() {
                let parent = &from[..from.len() - 1];
                let to_parent = map
                    .get(parent)
                    .ok_or_else(|| Error::malformed("partial map domain not prefix-closed"))?;
                if to_parent.as_str() != &to[..to.len() - 1] {
                    return Err(Error::malformed(format!(
                        "partial map does not preserve the prefix at {from:?}"
                    )));
                }
            }
        }
        // level preservation plus forward prefix preservation on a
        // bijection forces the inverse to preserve prefixes as well
        Ok(GroupElem::Partial { map })
    }

    /// Image of a node, when defined.
    pub fn apply(&self, node: &str) -> Result<Option<String>> {
        match self {
            GroupElem::Xor { bits } => {
                if node.len() > bits.len() {
                    return Err(Error::DepthOverflow(format!(
                        "node {node:?} deeper than {}",
                        bits.len()
                    )));
                }
                Ok(Some(
                    node.bytes()
                        .enumerate()
                        .map(|(i, b)| char::from(b'0' + ((b - b'0') ^ bits[i])))
                        .collect(),
                ))
            }
            GroupElem::Partial { map } => Ok(map.get(node).cloned()),
            GroupElem::Total(aut) => aut.apply(node).map(Some),
        }
    }
}

/// Transport a coloring along a group element. `None` only when a partial
/// element does not cover the whole support; depth violations for the two
/// global kinds are errors.
pub fn act(g: &GroupElem, c: &Coloring) -> Result<Option<Coloring>> {
    let mut out = BTreeMap::new();
    for (node, v) in c.support() {
        match g.apply(node)? {
            Some(image) => {
                out.insert(image, v);
            }
            None => return Ok(None),
        }
    }
    Ok(Some(Coloring::new(out)?))
}

/// A finite multiset of colorings; duplicates are counted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ColoringFamily {
    items: Vec<Coloring>,
}

impl ColoringFamily {
    pub fn new(items: Vec<Coloring>) -> ColoringFamily {
        ColoringFamily { items }
    }

    pub fn items(&self) -> &[Coloring] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn support_depth(&self) -> usize {
        self.items.iter().map(|c| c.support_depth()).max().unwrap_or(0)
    }

    /// Canonical multiset form: items sorted.
    pub fn canonical(&self) -> Vec<Coloring> {
        let mut v = self.items.clone();
        v.sort();
        v
    }

    pub fn multiset_eq(&self, other: &ColoringFamily) -> bool {
        self.canonical() == other.canonical()
    }

    /// Set-semantics form: each distinct coloring has its values fused
    /// with its multiplicity through the fixed pairing, turning the
    /// multiset into an equivalent set.
    pub fn with_multiplicity_tags(&self) -> Result<ColoringFamily> {
        let mut counts: BTreeMap<&Coloring, u32> = BTreeMap::new();
        for c in &self.items {
            *counts.entry(c).or_insert(0) += 1;
        }
        let mut out = Vec::new();
        for (c, mult) in counts {
            let tagged: BTreeMap<String, u32> = c
                .support()
                .map(|(node, v)| Ok((node.to_string(), pair_code(v, mult)?)))
                .collect::<Result<_>>()?;
            out.push(Coloring::new(tagged)?);
        }
        Ok(ColoringFamily::new(out))
    }
}

/// The fixed injective pairing (a, b) -> 2^a * (2b + 1), used wherever a
/// value and a multiplicity tag must share one code.
pub fn pair_code(a: u32, b: u32) -> Result<u32> {
    1u32.checked_shl(a)
        .and_then(|p| b.checked_mul(2).and_then(|b2| b2.checked_add(1)).and_then(|o| p.checked_mul(o)))
        .ok_or(Error::Overflow)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionKind {
    Xor { depth: usize },
    Total { depth: usize },
}

/// Search for a group element carrying one family onto the other as
/// multisets. The XOR search over 2^d flips is exact for finite-support
/// colorings; the truncated-automorphism search is exact only for
/// depth-total semantics and is refused above depth 4.
pub fn equiv_families(
    a: &ColoringFamily,
    b: &ColoringFamily,
    kind: ActionKind,
) -> Result<Option<GroupElem>> {
    let depth = match kind {
        ActionKind::Xor { depth } | ActionKind::Total { depth } => depth,
    };
    if a.support_depth() > depth || b.support_depth() > depth {
        return Err(Error::DepthOverflow(format!(
            "family support exceeds depth {depth}"
        )));
    }
    if a.len() != b.len() {
        return Ok(None);
    }
    let target = b.canonical();
    let candidates: Vec<GroupElem> = match kind {
        ActionKind::Xor { depth } => (0u64..1 << depth)
            .map(|bits| GroupElem::Xor {
                bits: (0..depth).map(|i| (bits >> i & 1) as u8).collect(),
            })
            .collect(),
        ActionKind::Total { depth } => TotalAut::enumerate(depth)?
            .into_iter()
            .map(GroupElem::Total)
            .collect(),
    };
    for g in candidates {
        let mut image: Vec<Coloring> = Vec::with_capacity(a.len());
        for c in a.items() {
            match act(&g, c)? {
                Some(i) => image.push(i),
                None => unreachable!("global kinds are total"),
            }
        }
        image.sort();
        if image == target {
            return Ok(Some(g));
        }
    }
    Ok(None)
}

/// The coloring marking the prefixes of two equal-length nodes with a
/// single value in 1..=3; symmetric in the pair.
pub fn pair_coloring(k: u32, eta: &str, tau: &str) -> Result<Coloring> {
    if !(1..=3).contains(&k) {
        return Err(Error::malformed("pair value must be 1, 2 or 3"));
    }
    if eta.len() != tau.len() {
        return Err(Error::malformed("pair nodes must have equal length"));
    }
    check_binary(eta)?;
    check_binary(tau)?;
    let mut values = BTreeMap::new();
    for i in 0..=eta.len() {
        values.insert(eta[..i].to_string(), k);
    }
    for i in 0..=tau.len() {
        values.insert(tau[..i].to_string(), k);
    }
    Coloring::new(values)
}

/// Encode a set of length-`depth` binary strings as a family of level
/// colorings plus `fillers` copies of the constant-1 coloring. A string's
/// coloring reads 1 at the root and bit+2 at every node of length k
/// (the string's k-th bit), so the set is recoverable from the value
/// multisets and level flips can never confuse two distinct sets.
pub fn encode_set_k(
    set: &std::collections::BTreeSet<String>,
    fillers: usize,
    depth: usize,
) -> Result<ColoringFamily> {
    if depth == 0 {
        return Err(Error::malformed("depth must be at least 1"));
    }
    for s in set {
        check_binary(s)?;
        if s.len() != depth {
            return Err(Error::malformed(format!(
                "expected strings of length {depth}, got {s:?}"
            )));
        }
    }
    let mut items = Vec::new();
    for s in set {
        let bits = s.as_bytes();
        let mut values = BTreeMap::new();
        values.insert(String::new(), 1);
        push_levels(&mut values, depth, |node| {
            (bits[node.len() - 1] - b'0') as u32 + 2
        });
        items.push(Coloring::new(values)?);
    }
    for _ in 0..fillers {
        let mut values = BTreeMap::new();
        values.insert(String::new(), 1);
        push_levels(&mut values, depth, |_| 1);
        items.push(Coloring::new(values)?);
    }
    Ok(ColoringFamily::new(items))
}

fn push_levels(values: &mut BTreeMap<String, u32>, depth: usize, f: impl Fn(&str) -> u32) {
    let mut frontier = vec![String::new()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for node in frontier {
            for sym in ['0', '1'] {
                let child = format!("{node}{sym}");
                values.insert(child.clone(), f(&child));
                next.push(child);
            }
        }
        frontier = next;
    }
}

/// Exhaustive search for a rigidity counterexample: tuples of tree nodes
/// with a ~ b ~ c, (ab) ~ (ac) and b != c under the given action. The
/// abelian XOR action provably admits none; the truncated tree action
/// already yields one at depth 2.
pub fn find_rigidity_counterexample(
    kind: ActionKind,
    tuple_len: usize,
) -> Result<Option<(Vec<String>, Vec<String>, Vec<String>)>> {
    let (depth, max_depth) = match kind {
        ActionKind::Xor { depth } => (depth, 8),
        ActionKind::Total { depth } => (depth, 4),
    };
    if depth > max_depth {
        return Err(Error::DepthRefused(depth, max_depth));
    }
    if tuple_len == 0 {
        return Err(Error::malformed("tuple length must be at least 1"));
    }

    // all nodes of length <= depth, in (length, lex) order
    let mut nodes: Vec<String> = vec![String::new()];
    let mut frontier = vec![String::new()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for node in &frontier {
            for sym in ['0', '1'] {
                next.push(format!("{node}{sym}"));
            }
        }
        nodes.extend(next.iter().cloned());
        frontier = next;
    }

    let elems: Vec<GroupElem> = match kind {
        ActionKind::Xor { depth } => (0u64..1 << depth)
            .map(|bits| GroupElem::Xor {
                bits: (0..depth).map(|i| (bits >> i & 1) as u8).collect(),
            })
            .collect(),
        ActionKind::Total { depth } => TotalAut::enumerate(depth)?
            .into_iter()
            .map(GroupElem::Total)
            .collect(),
    };
    // node-image table: elem x node -> node index
    let index: BTreeMap<&str, usize> = nodes.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let table: Vec<Vec<usize>> = elems
        .iter()
        .map(|g| {
            nodes
                .iter()
                .map(|n| index[g.apply(n).unwrap().unwrap().as_str()])
                .collect()
        })
        .collect();

    let tuples = cartesian_power(nodes.len(), tuple_len);
    let apply_tuple = |g: &Vec<usize>, t: &Vec<usize>| -> Vec<usize> {
        t.iter().map(|&n| g[n]).collect()
    };

    for a in &tuples {
        let stab: Vec<&Vec<usize>> = table.iter().filter(|g| &apply_tuple(g, a) == a).collect();
        if stab.len() <= 1 {
            continue;
        }
        let orbit: std::collections::BTreeSet<Vec<usize>> =
            table.iter().map(|g| apply_tuple(g, a)).collect();
        for b in &tuples {
            if !orbit.contains(b) {
                continue;
            }
            for h in &stab {
                let c = apply_tuple(h, b);
                if &c != b {
                    let name = |t: &Vec<usize>| t.iter().map(|&i| nodes[i].clone()).collect();
                    return Ok(Some((name(a), name(b), name(&c))));
                }
            }
        }
    }
    Ok(None)
}

fn cartesian_power(n: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..len {
        let mut next = Vec::with_capacity(out.len() * n);
        for t in &out {
            for i in 0..n {
                let mut t = t.clone();
                t.push(i);
                next.push(t);
            }
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coloring(entries: &[(&str, u32)]) -> Coloring {
        Coloring::new(entries.iter().map(|&(k, v)| (k.to_string(), v)).collect()).unwrap()
    }

    #[test]
    fn support_must_be_prefix_closed() {
        assert!(Coloring::new([("01".to_string(), 1)].into()).is_err());
    }

    #[test]
    fn xor_acts_level_wise() {
        let c = coloring(&[("", 5), ("0", 1), ("1", 2)]);
        let g = GroupElem::xor_from_str("1").unwrap();
        let moved = act(&g, &c).unwrap().unwrap();
        assert_eq!(moved.value(""), 5);
        assert_eq!(moved.value("0"), 2);
        assert_eq!(moved.value("1"), 1);
    }

    #[test]
    fn identity_total_fixes_everything() {
        let c = coloring(&[("", 3), ("0", 1), ("00", 4), ("01", 2), ("1", 1)]);
        let g = GroupElem::Total(TotalAut::identity(2));
        assert_eq!(act(&g, &c).unwrap().unwrap(), c);
    }

    #[test]
    fn partial_outside_domain_is_absent() {
        let c = coloring(&[("", 1), ("0", 2)]);
        let map: BTreeMap<String, String> = [("".to_string(), "".to_string())].into();
        let g = GroupElem::partial(map).unwrap();
        assert_eq!(act(&g, &c).unwrap(), None);
    }

    #[test]
    fn depth_overflow_is_an_error() {
        let c = coloring(&[("", 1), ("0", 1), ("00", 1)]);
        let g = GroupElem::xor_from_str("1").unwrap();
        assert!(matches!(act(&g, &c), Err(Error::DepthOverflow(_))));
    }

    #[test]
    fn action_laws_hold_for_total() {
        let c = coloring(&[("", 3), ("0", 1), ("1", 2), ("10", 7), ("11", 1)]);
        for gb in 0..8u64 {
            for hb in 0..8u64 {
                let g = TotalAut::from_bits(2, gb);
                let h = TotalAut::from_bits(2, hb);
                let via_two = act(
                    &GroupElem::Total(g.clone()),
                    &act(&GroupElem::Total(h.clone()), &c).unwrap().unwrap(),
                )
                .unwrap()
                .unwrap();
                let via_one = act(&GroupElem::Total(g.compose(&h).unwrap()), &c)
                    .unwrap()
                    .unwrap();
                assert_eq!(via_two, via_one);
            }
        }
    }

    #[test]
    fn total_inverse_round_trips() {
        for bits in 0..128u64 {
            let g = TotalAut::from_bits(3, bits);
            let gi = g.inverse();
            for node in ["", "0", "1", "00", "010", "111"] {
                assert_eq!(gi.apply(&g.apply(node).unwrap()).unwrap(), node);
            }
        }
    }

    #[test]
    fn value_multiset_preserved() {
        let c = coloring(&[("", 3), ("0", 1), ("1", 2)]);
        let g = GroupElem::xor_from_str("1").unwrap();
        assert_eq!(act(&g, &c).unwrap().unwrap().value_multiset(), c.value_multiset());
    }

    #[test]
    fn family_equivalence_finds_the_flip() {
        let c = coloring(&[("", 5), ("0", 1), ("1", 2)]);
        let g = GroupElem::xor_from_str("1").unwrap();
        let moved = act(&g, &c).unwrap().unwrap();
        let a = ColoringFamily::new(vec![c.clone()]);
        let b = ColoringFamily::new(vec![moved]);
        let witness = equiv_families(&a, &b, ActionKind::Xor { depth: 1 })
            .unwrap()
            .unwrap();
        assert_eq!(witness, g);
        // identity on equal families
        let w = equiv_families(&a, &a, ActionKind::Xor { depth: 1 })
            .unwrap()
            .unwrap();
        assert_eq!(act(&w, &c).unwrap().unwrap(), c);
    }

    #[test]
    fn different_value_multisets_inequivalent() {
        let a = ColoringFamily::new(vec![coloring(&[("", 1)])]);
        let b = ColoringFamily::new(vec![coloring(&[("", 2)])]);
        assert!(equiv_families(&a, &b, ActionKind::Xor { depth: 2 })
            .unwrap()
            .is_none());
    }

    #[test]
    fn pair_coloring_shapes() {
        let c = pair_coloring(2, "01", "01").unwrap();
        assert_eq!(c.value(""), 2);
        assert_eq!(c.value("0"), 2);
        assert_eq!(c.value("01"), 2);
        assert_eq!(c.value("1"), 0);

        let c = pair_coloring(1, "00", "10").unwrap();
        for node in ["", "0", "1", "00", "10"] {
            assert_eq!(c.value(node), 1, "at {node:?}");
        }
        assert_eq!(c.value("01"), 0);
        assert_eq!(c.value("11"), 0);

        assert_eq!(
            pair_coloring(3, "01", "11").unwrap(),
            pair_coloring(3, "11", "01").unwrap()
        );
    }

    #[test]
    fn k_encoding_distinguishes_sets() {
        use std::collections::BTreeSet;
        let x: BTreeSet<String> = std::iter::once("000".to_string()).collect();
        let y: BTreeSet<String> = std::iter::once("100".to_string()).collect();
        let fx = encode_set_k(&x, 2, 3).unwrap();
        let fy = encode_set_k(&y, 2, 3).unwrap();
        assert!(equiv_families(&fx, &fy, ActionKind::Xor { depth: 3 })
            .unwrap()
            .is_none());
        assert!(equiv_families(&fx, &fx, ActionKind::Xor { depth: 3 })
            .unwrap()
            .is_some());
        // the all-zero string is constant 2 off the root
        let c = &fx.items()[0];
        assert_eq!(c.value(""), 1);
        for node in ["0", "1", "00", "111"] {
            assert_eq!(c.value(node), 2);
        }
    }

    #[test]
    fn rigidity_xor_finds_nothing() {
        for depth in 1..=3 {
            for len in 1..=2 {
                assert!(find_rigidity_counterexample(ActionKind::Xor { depth }, len)
                    .unwrap()
                    .is_none());
            }
        }
    }

    #[test]
    fn rigidity_total_depth2_single_nodes() {
        let (a, b, c) = find_rigidity_counterexample(ActionKind::Total { depth: 2 }, 1)
            .unwrap()
            .unwrap();
        assert_eq!(a, vec!["00".to_string()]);
        assert_eq!(b, vec!["10".to_string()]);
        assert_eq!(c, vec!["11".to_string()]);
    }

    #[test]
    fn multiplicity_tags_make_sets() {
        let c = coloring(&[("", 1)]);
        let fam = ColoringFamily::new(vec![c.clone(), c.clone()]);
        let tagged = fam.with_multiplicity_tags().unwrap();
        assert_eq!(tagged.len(), 1);
        assert_eq!(tagged.items()[0].value(""), pair_code(1, 2).unwrap());
    }

    #[test]
    fn pair_code_is_injective_small() {
        let mut seen = std::collections::BTreeSet::new();
        for a in 0..12 {
            for b in 0..12 {
                assert!(seen.insert(pair_code(a, b).unwrap()));
            }
        }
    }
}
