//! Finitary presentations of refining-equivalence models.
//!
//! A presentation is a fully colored leaf level of a depth-`d` address
//! tree, binary or width-`w`; it denotes the model whose classes are the
//! all-zero continuations of the leaf addresses, with class sizes given
//! by the colors. Two presentations denote back-and-forth equivalent
//! models exactly when a color-preserving automorphism of the ambient
//! address tree relates them, and the canonical bottom-up data tree
//! [`RefData`] decides that relation by structural equality.
//!
//! The two reduction encoders live here as well: sets of fixed-length
//! binary strings into binary presentations (injective base colors pin
//! every automorphism, so the set is recoverable), and finite labeled
//! trees into wide presentations (the recovered node set is exactly the
//! canonicalized input).

use crate::error::{Error, Result};
use crate::extnat::ExtNat;
use crate::structure::{FiniteStructure, Signature};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

const MAX_ADDRESSES: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Bin,
    Inf { inf: usize },
}

impl Variant {
    pub fn width(&self) -> usize {
        match self {
            Variant::Bin => 2,
            Variant::Inf { inf } => *inf,
        }
    }
}

/// A depth-`d` presentation: a total coloring of the full address space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefPresentation {
    variant: Variant,
    depth: usize,
    colors: Vec<ExtNat>, // indexed by base-w rank of the address
}

fn check_shape(variant: Variant, depth: usize) -> Result<usize> {
    let w = variant.width();
    if w < 2 {
        return Err(Error::malformed("width must be at least 2"));
    }
    if w > 10 {
        return Err(Error::malformed("width above 10 not supported"));
    }
    if depth == 0 {
        return Err(Error::malformed("depth must be at least 1"));
    }
    let count = w.checked_pow(depth as u32).filter(|&c| c <= MAX_ADDRESSES);
    count.ok_or_else(|| Error::CapacityExceeded(format!("{w}^{depth} addresses")))
}

pub fn address_rank(addr: &str, width: usize) -> Result<usize> {
    let mut rank = 0usize;
    for ch in addr.chars() {
        let digit = ch
            .to_digit(10)
            .filter(|&d| (d as usize) < width)
            .ok_or_else(|| Error::malformed(format!("bad address symbol {ch:?}")))?;
        rank = rank * width + digit as usize;
    }
    Ok(rank)
}

pub fn rank_address(mut rank: usize, width: usize, len: usize) -> String {
    let mut out = vec![b'0'; len];
    for i in (0..len).rev() {
        out[i] = b'0' + (rank % width) as u8;
        rank /= width;
    }
    String::from_utf8(out).unwrap()
}

impl RefPresentation {
    pub fn new(variant: Variant, depth: usize, colors: Vec<ExtNat>) -> Result<Self> {
        let count = check_shape(variant, depth)?;
        if colors.len() != count {
            return Err(Error::malformed(format!(
                "expected {count} leaf colors, got {}",
                colors.len()
            )));
        }
        if colors.iter().any(|c| *c == ExtNat::Fin(0)) {
            return Err(Error::malformed("leaf colors must be at least 1"));
        }
        Ok(RefPresentation {
            variant,
            depth,
            colors,
        })
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn width(&self) -> usize {
        self.variant.width()
    }

    pub fn leaf_count(&self) -> usize {
        self.colors.len()
    }

    pub fn color_by_rank(&self, rank: usize) -> ExtNat {
        self.colors[rank]
    }

    pub fn color(&self, addr: &str) -> Result<ExtNat> {
        if addr.len() != self.depth {
            return Err(Error::malformed(format!(
                "address {addr:?} is not at leaf depth {}",
                self.depth
            )));
        }
        Ok(self.colors[address_rank(addr, self.width())?])
    }

    /// The image presentation under an ambient tree automorphism:
    /// the leaf at `g(addr)` takes the color the leaf at `addr` had.
    pub fn transported(&self, g: &TreeAut) -> Result<RefPresentation> {
        if g.width != self.width() || g.depth != self.depth {
            return Err(Error::ShapeMismatch(
                "automorphism shape differs from presentation".into(),
            ));
        }
        let w = self.width();
        let mut colors = vec![ExtNat::Fin(1); self.colors.len()];
        for rank in 0..self.colors.len() {
            let addr = rank_address(rank, w, self.depth);
            let image = g.apply(&addr);
            colors[address_rank(&image, w).unwrap()] = self.colors[rank];
        }
        RefPresentation::new(self.variant, self.depth, colors)
    }
}

#[derive(Serialize, Deserialize)]
struct PresentationWire {
    variant: Variant,
    depth: usize,
    colors: BTreeMap<String, ExtNat>,
}

impl Serialize for RefPresentation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let w = self.width();
        let colors = (0..self.colors.len())
            .map(|rank| (rank_address(rank, w, self.depth), self.colors[rank]))
            .collect();
        PresentationWire {
            variant: self.variant,
            depth: self.depth,
            colors,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RefPresentation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let wire = PresentationWire::deserialize(d)?;
        let count = check_shape(wire.variant, wire.depth).map_err(D::Error::custom)?;
        let w = wire.variant.width();
        let mut colors = vec![None; count];
        for (addr, color) in wire.colors {
            if addr.len() != wire.depth {
                return Err(D::Error::custom(format!(
                    "address {addr:?} is not at leaf depth {}",
                    wire.depth
                )));
            }
            let rank = address_rank(&addr, w).map_err(D::Error::custom)?;
            colors[rank] = Some(color);
        }
        let colors: Option<Vec<ExtNat>> = colors.into_iter().collect();
        let colors = colors.ok_or_else(|| D::Error::custom("leaf coloring is not total"))?;
        RefPresentation::new(wire.variant, wire.depth, colors).map_err(D::Error::custom)
    }
}

/// One node of the canonical data tree: a leaf holds a color, an internal
/// node the sorted multiset of its child data.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DataNode {
    Leaf(ExtNat),
    Node(Vec<(DataNode, usize)>), // sorted, entries distinct, multiplicities >= 1
}

impl DataNode {
    fn from_children(children: Vec<DataNode>) -> DataNode {
        let mut entries: Vec<(DataNode, usize)> = Vec::new();
        let mut sorted = children;
        sorted.sort();
        for child in sorted {
            match entries.last_mut() {
                Some((prev, mult)) if *prev == child => *mult += 1,
                _ => entries.push((child, 1)),
            }
        }
        DataNode::Node(entries)
    }

    fn child_sum(&self) -> usize {
        match self {
            DataNode::Leaf(_) => 0,
            DataNode::Node(entries) => entries.iter().map(|(_, m)| m).sum(),
        }
    }
}

/// The canonical data invariant of a presentation. Structural equality
/// of two `RefData` values decides equivalence of the presentations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RefData {
    variant: Variant,
    depth: usize,
    root: DataNode,
}

/// Fold the address tree bottom-up into its canonical data tree.
pub fn compute_data(p: &RefPresentation) -> RefData {
    let w = p.width();
    let mut level: Vec<DataNode> = (0..p.leaf_count())
        .map(|rank| DataNode::Leaf(p.color_by_rank(rank)))
        .collect();
    for _ in 0..p.depth() {
        level = level
            .chunks(w)
            .map(|chunk| DataNode::from_children(chunk.to_vec()))
            .collect();
    }
    RefData {
        variant: p.variant(),
        depth: p.depth(),
        root: level.pop().unwrap(),
    }
}

impl RefData {
    pub fn new(variant: Variant, depth: usize, root: DataNode) -> Result<Self> {
        check_shape(variant, depth)?;
        validate_node(&root, variant.width(), depth)?;
        Ok(RefData {
            variant,
            depth,
            root,
        })
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn root(&self) -> &DataNode {
        &self.root
    }

    /// Distinct subtree data occurring at a level (0 = root, depth = leaves).
    pub fn level_types(&self, level: usize) -> Vec<DataNode> {
        let mut frontier = vec![&self.root];
        for _ in 0..level {
            let mut next = Vec::new();
            for node in frontier {
                if let DataNode::Node(entries) = node {
                    for (child, _) in entries {
                        next.push(child);
                    }
                }
            }
            frontier = next;
        }
        let mut out: Vec<DataNode> = frontier.into_iter().cloned().collect();
        out.sort();
        out.dedup();
        out
    }

    /// Greatest number of sibling classes of the given type under one
    /// parent class at `level` (levels 1..=depth). Siblings under one
    /// parent are exactly the same-parent classes that split apart at
    /// this level.
    pub fn multiplicity(&self, level: usize, ty: &DataNode) -> Option<usize> {
        if level == 0 || level > self.depth {
            return None;
        }
        let mut best = None;
        let mut frontier = vec![&self.root];
        for _ in 0..level - 1 {
            let mut next = Vec::new();
            for node in frontier {
                if let DataNode::Node(entries) = node {
                    for (child, _) in entries {
                        next.push(child);
                    }
                }
            }
            frontier = next;
        }
        for parent in frontier {
            if let DataNode::Node(entries) = parent {
                for (child, mult) in entries {
                    if child == ty {
                        best = Some(best.map_or(*mult, |b: usize| b.max(*mult)));
                    }
                }
            }
        }
        best
    }

    /// Distinct root-to-leaf type sequences (the branch data).
    pub fn branch_sequences(&self) -> Vec<Vec<DataNode>> {
        let mut out = BTreeSet::new();
        let mut path = Vec::new();
        walk_branches(&self.root, &mut path, &mut out);
        out.into_iter().collect()
    }

    /// Color spectra: for each internal type sequence (levels 0..depth-1),
    /// the set of leaf colors occurring below it. At the leaf level the
    /// datum already pins the color, so spectra are keyed one level up.
    pub fn spectra(&self) -> BTreeMap<Vec<DataNode>, BTreeSet<ExtNat>> {
        let mut out: BTreeMap<Vec<DataNode>, BTreeSet<ExtNat>> = BTreeMap::new();
        for seq in self.branch_sequences() {
            let (leaf, internal) = seq.split_last().unwrap();
            if let DataNode::Leaf(color) = leaf {
                out.entry(internal.to_vec()).or_default().insert(*color);
            }
        }
        out
    }
}

fn walk_branches(node: &DataNode, path: &mut Vec<DataNode>, out: &mut BTreeSet<Vec<DataNode>>) {
    path.push(node.clone());
    match node {
        DataNode::Leaf(_) => {
            out.insert(path.clone());
        }
        DataNode::Node(entries) => {
            for (child, _) in entries {
                walk_branches(child, path, out);
            }
        }
    }
    path.pop();
}

fn validate_node(node: &DataNode, width: usize, depth_left: usize) -> Result<()> {
    match node {
        DataNode::Leaf(color) => {
            if depth_left != 0 {
                return Err(Error::malformed("leaf datum above the leaf level"));
            }
            if *color == ExtNat::Fin(0) {
                return Err(Error::malformed("leaf color must be at least 1"));
            }
        }
        DataNode::Node(entries) => {
            if depth_left == 0 {
                return Err(Error::malformed("internal datum at the leaf level"));
            }
            if node.child_sum() != width {
                return Err(Error::malformed(format!(
                    "internal datum has {} children, arity is {width}",
                    node.child_sum()
                )));
            }
            for window in entries.windows(2) {
                if window[0].0 >= window[1].0 {
                    return Err(Error::malformed("datum entries not sorted and distinct"));
                }
            }
            for (child, mult) in entries {
                if *mult == 0 {
                    return Err(Error::malformed("zero multiplicity"));
                }
                validate_node(child, width, depth_left - 1)?;
            }
        }
    }
    Ok(())
}

/// Rebuild the canonical presentation of a data tree: children are laid
/// out in sorted order with their multiplicities expanded, so leaf colors
/// land in a deterministic fair order and folding the result back up
/// reproduces the data exactly.
pub fn unpack_data(d: &RefData) -> Result<RefPresentation> {
    let w = d.variant().width();
    let mut colors = Vec::with_capacity(w.pow(d.depth() as u32));
    layout(&d.root, &mut colors);
    RefPresentation::new(d.variant(), d.depth(), colors)
}

fn layout(node: &DataNode, colors: &mut Vec<ExtNat>) {
    match node {
        DataNode::Leaf(color) => colors.push(*color),
        DataNode::Node(entries) => {
            for (child, mult) in entries {
                for _ in 0..*mult {
                    layout(child, colors);
                }
            }
        }
    }
}

/// Equivalence of presentations: equality of canonical data.
pub fn presentations_equiv(p: &RefPresentation, q: &RefPresentation) -> Result<bool> {
    if p.variant() != q.variant() || p.depth() != q.depth() {
        return Err(Error::ShapeMismatch(
            "presentations differ in variant or depth".into(),
        ));
    }
    Ok(compute_data(p) == compute_data(q))
}

// ---------------------------------------------------------------------------
// set encoder (binary variant)
// ---------------------------------------------------------------------------

/// Encode a set of length-`d` binary strings as a depth-`d+1` binary
/// presentation. Each length-`d` address η carries two leaves: the base
/// leaf η0 takes an injective finite color (2, 3, ... in lexicographic
/// address order), which pins every color-preserving automorphism; the
/// flag leaf η1 takes the top color exactly when η is in the set.
pub fn encode_set_refbin(set: &BTreeSet<String>, d: usize) -> Result<RefPresentation> {
    if d == 0 {
        return Err(Error::malformed("string length must be at least 1"));
    }
    for s in set {
        if s.len() != d || s.chars().any(|c| c != '0' && c != '1') {
            return Err(Error::malformed(format!(
                "expected binary strings of length {d}, got {s:?}"
            )));
        }
    }
    let count = check_shape(Variant::Bin, d + 1)?;
    let mut colors = vec![ExtNat::Fin(1); count];
    for rank in 0..count / 2 {
        let addr = rank_address(rank, 2, d);
        colors[rank * 2] = ExtNat::Fin(2 + rank as u32);
        colors[rank * 2 + 1] = if set.contains(&addr) {
            ExtNat::Omega
        } else {
            ExtNat::Fin(1)
        };
    }
    RefPresentation::new(Variant::Bin, d + 1, colors)
}

/// Recover the encoded set. The base colors must be finite and injective
/// (that is what makes the inverse well defined on equivalence classes);
/// anything else is reported as malformed.
pub fn decode_set_refbin(p: &RefPresentation) -> Result<BTreeSet<String>> {
    if p.variant() != Variant::Bin {
        return Err(Error::ShapeMismatch("expected a binary presentation".into()));
    }
    if p.depth() < 2 {
        return Err(Error::malformed("presentation too shallow to decode"));
    }
    let d = p.depth() - 1;
    let mut seen = BTreeSet::new();
    for rank in 0..p.leaf_count() / 2 {
        match p.color_by_rank(rank * 2) {
            ExtNat::Fin(c) => {
                if !seen.insert(c) {
                    return Err(Error::MalformedBaseColors);
                }
            }
            ExtNat::Omega => return Err(Error::MalformedBaseColors),
        }
    }
    let mut out = BTreeSet::new();
    for rank in 0..p.leaf_count() / 2 {
        if p.color_by_rank(rank * 2 + 1) == ExtNat::Omega {
            out.insert(rank_address(rank, 2, d));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// tree encoder (wide variant)
// ---------------------------------------------------------------------------

/// A finite prefix-closed set of addresses over a digit alphabet,
/// containing the empty string. Absent children are implicit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledTree {
    width: usize,
    nodes: BTreeSet<String>,
}

#[derive(Serialize, Deserialize)]
struct TreeWire {
    nodes: Vec<String>,
}

impl LabeledTree {
    pub fn new(width: usize, nodes: BTreeSet<String>) -> Result<Self> {
        if width < 2 || width > 10 {
            return Err(Error::malformed("tree width must be between 2 and 10"));
        }
        if !nodes.contains("") {
            return Err(Error::malformed("tree must contain the empty string"));
        }
        for node in &nodes {
            for ch in node.chars() {
                let d = ch.to_digit(10).filter(|&d| (d as usize) < width);
                if d.is_none() {
                    return Err(Error::malformed(format!("bad tree symbol {ch:?}")));
                }
            }
            if !node.is_empty() && !nodes.contains(&node[..node.len() - 1]) {
                return Err(Error::malformed(format!("node {node:?} has no parent")));
            }
        }
        Ok(LabeledTree { width, nodes })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn nodes(&self) -> &BTreeSet<String> {
        &self.nodes
    }

    pub fn max_len(&self) -> usize {
        self.nodes.iter().map(|n| n.len()).max().unwrap_or(0)
    }

    /// The canonical representative of this tree's isomorphism class:
    /// children of every node are sorted by their canonical shape and
    /// reassigned the symbols 0, 1, ... in that order.
    pub fn canonicalize(&self) -> LabeledTree {
        let mut nodes = BTreeSet::new();
        nodes.insert(String::new());
        let shape = self.shape_of("");
        rebuild(&shape, String::new(), &mut nodes);
        LabeledTree {
            width: self.width,
            nodes,
        }
    }

    fn shape_of(&self, prefix: &str) -> Shape {
        let mut children = Vec::new();
        for d in 0..self.width {
            let child = format!("{prefix}{d}");
            if self.nodes.contains(&child) {
                children.push(self.shape_of(&child));
            }
        }
        children.sort();
        Shape(children)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "nodes": self.nodes.iter().cloned().collect::<Vec<_>>() })
    }

    pub fn from_json(width: usize, v: &serde_json::Value) -> Result<Self> {
        let wire: TreeWire = serde_json::from_value(v.clone())
            .map_err(|e| Error::malformed(format!("bad tree JSON: {e}")))?;
        LabeledTree::new(width, wire.nodes.into_iter().collect())
    }
}

#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct Shape(Vec<Shape>);

fn rebuild(shape: &Shape, prefix: String, nodes: &mut BTreeSet<String>) {
    for (i, child) in shape.0.iter().enumerate() {
        let addr = format!("{prefix}{i}");
        nodes.insert(addr.clone());
        rebuild(child, addr, nodes);
    }
}

/// Encode a labeled tree as a width-`w` presentation of depth `d`. The
/// tree is canonicalized first, so isomorphic trees produce byte-identical
/// presentations. A leaf takes color 2 exactly when its address exits the
/// tree through a nonzero symbol; zero continuations stay color 1, which
/// is what makes the node set recoverable.
pub fn encode_tree_refinf(s: &LabeledTree, d: usize, w: usize) -> Result<RefPresentation> {
    if w < 2 {
        return Err(Error::malformed("width must be at least 2"));
    }
    if s.width() > w {
        return Err(Error::malformed(format!(
            "tree alphabet {} exceeds width {w}",
            s.width()
        )));
    }
    if s.max_len() >= d {
        return Err(Error::malformed(format!(
            "tree nodes must be shorter than the depth {d}"
        )));
    }
    let canon = s.canonicalize();
    let variant = Variant::Inf { inf: w };
    let count = check_shape(variant, d)?;
    let mut colors = vec![ExtNat::Fin(1); count];
    for (rank, color) in colors.iter_mut().enumerate() {
        let addr = rank_address(rank, w, d);
        let bytes = addr.as_bytes();
        for k in 0..d {
            if bytes[k] != b'0' && !canon.nodes().contains(&addr[..k]) {
                *color = ExtNat::Fin(2);
                break;
            }
        }
    }
    RefPresentation::new(variant, d, colors)
}

/// Recover the tree from a wide presentation: an address belongs to the
/// invariant when below each of its one-symbol extensions some leaf still
/// carries color 1. Rejects binary presentations; reports a presentation
/// with no color-1 witness at the root as `NoRoot`, and a recovered set
/// that fails prefix closure (possible for adversarial colorings, never
/// for encoded ones) distinctly.
pub fn tree_invariant(p: &RefPresentation) -> Result<LabeledTree> {
    let w = match p.variant() {
        Variant::Bin => return Err(Error::BinRejected),
        Variant::Inf { inf } => inf,
    };
    let d = p.depth();
    // has_one[level][rank]: some leaf below this node has color 1
    let mut has_one: Vec<bool> = (0..p.leaf_count())
        .map(|rank| p.color_by_rank(rank) == ExtNat::Fin(1))
        .collect();
    let mut per_level: Vec<Vec<bool>> = vec![has_one.clone()];
    for _ in 0..d {
        has_one = has_one.chunks(w).map(|c| c.iter().any(|&b| b)).collect();
        per_level.push(has_one.clone());
    }
    per_level.reverse(); // index by node length 0..=d

    let mut nodes = BTreeSet::new();
    for len in 0..d {
        for rank in 0..w.pow(len as u32) {
            let in_tree = (0..w).all(|sym| per_level[len + 1][rank * w + sym]);
            if in_tree {
                nodes.insert(rank_address(rank, w, len));
            }
        }
    }
    if !nodes.contains("") {
        return Err(Error::NoRoot);
    }
    for node in &nodes {
        if !node.is_empty() && !nodes.contains(&node[..node.len() - 1]) {
            return Err(Error::InvariantNotATree);
        }
    }
    LabeledTree::new(w, nodes)
}

// ---------------------------------------------------------------------------
// ambient tree automorphisms
// ---------------------------------------------------------------------------

/// An automorphism of the depth-`d`, width-`w` address tree, stored as a
/// child permutation per internal node (indexed by the node's rank within
/// its level, in breadth-first layout).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeAut {
    pub width: usize,
    pub depth: usize,
    perms: Vec<Vec<usize>>, // flattened per level: level k holds w^k perms
}

impl TreeAut {
    pub fn identity(width: usize, depth: usize) -> TreeAut {
        let mut perms = Vec::new();
        for k in 0..depth {
            for _ in 0..width.pow(k as u32) {
                perms.push((0..width).collect());
            }
        }
        TreeAut {
            width,
            depth,
            perms,
        }
    }

    fn node_slot(&self, level: usize, rank: usize) -> usize {
        let mut base = 0;
        for k in 0..level {
            base += self.width.pow(k as u32);
        }
        base + rank
    }

    /// The image of an address of length at most the depth. The child
    /// permutation consulted at each step is indexed by the *original*
    /// prefix, which composes and inverts cleanly.
    pub fn apply(&self, addr: &str) -> String {
        let mut out = String::with_capacity(addr.len());
        let mut rank = 0usize;
        for (i, ch) in addr.chars().enumerate() {
            let digit = ch.to_digit(10).unwrap() as usize;
            let slot = self.node_slot(i, rank);
            out.push(char::from(b'0' + self.perms[slot][digit] as u8));
            rank = rank * self.width + digit;
        }
        out
    }

    pub fn random<R: Rng>(rng: &mut R, width: usize, depth: usize) -> TreeAut {
        let mut aut = TreeAut::identity(width, depth);
        for perm in &mut aut.perms {
            // Fisher-Yates
            for i in (1..perm.len()).rev() {
                let j = rng.gen_range(0..=i);
                perm.swap(i, j);
            }
        }
        aut
    }

    /// All automorphisms of the binary tree of the given depth, one per
    /// assignment of swap bits to internal nodes. Exhaustive oracles only;
    /// the count is 2^(2^depth - 1).
    pub fn enumerate_bin(depth: usize) -> Result<Vec<TreeAut>> {
        let internal: usize = (0..depth).map(|k| 1usize << k).sum();
        if internal > 20 {
            return Err(Error::DepthRefused(depth, 4));
        }
        let mut out = Vec::with_capacity(1 << internal);
        for bits in 0u64..1 << internal {
            let mut aut = TreeAut::identity(2, depth);
            for (slot, perm) in aut.perms.iter_mut().enumerate() {
                if bits >> slot & 1 == 1 {
                    perm.swap(0, 1);
                }
            }
            out.push(aut);
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// cross-check materialization
// ---------------------------------------------------------------------------

/// Materialize a finitely colored presentation as a relational structure
/// over the chain of class relations: elements are (address, index below
/// color), and two elements are `E_k`-related when their addresses agree
/// on the first `k` symbols. Presentations with a top color have no
/// finite materialization.
pub fn materialize(p: &RefPresentation) -> Result<FiniteStructure> {
    let mut elements: Vec<(usize, u32)> = Vec::new();
    for rank in 0..p.leaf_count() {
        match p.color_by_rank(rank) {
            ExtNat::Fin(c) => {
                for i in 0..c {
                    elements.push((rank, i));
                }
            }
            ExtNat::Omega => {
                return Err(Error::malformed(
                    "presentation with a top color has no finite materialization",
                ))
            }
        }
    }
    let d = p.depth();
    let w = p.width();
    let sig = Signature::new((0..=d).map(|k| (format!("E{k}"), 2)).collect())?;
    let mut interp = vec![BTreeSet::new(); d + 1];
    for (i, &(ra, _)) in elements.iter().enumerate() {
        for (j, &(rb, _)) in elements.iter().enumerate() {
            for (k, tuples) in interp.iter_mut().enumerate() {
                // agreement on the first k symbols = equal quotients by w^(d-k)
                if ra / w.pow((d - k) as u32) == rb / w.pow((d - k) as u32) {
                    tuples.insert(vec![i, j]);
                }
            }
        }
    }
    FiniteStructure::new(sig, elements.len(), interp)
}

/// Seeded random presentation for the verification campaigns: colors
/// drawn from 1..=max_color, with an omega leaf at the given rate.
pub fn random_presentation<R: Rng>(
    rng: &mut R,
    variant: Variant,
    depth: usize,
    max_color: u32,
    omega_rate: f64,
) -> Result<RefPresentation> {
    let count = check_shape(variant, depth)?;
    let colors = (0..count)
        .map(|_| {
            if rng.gen_bool(omega_rate) {
                ExtNat::Omega
            } else {
                ExtNat::Fin(rng.gen_range(1..=max_color))
            }
        })
        .collect();
    RefPresentation::new(variant, depth, colors)
}

// RefData JSON: {"leaf": color} | {"node": [[data, mult], ...]}
impl DataNode {
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            DataNode::Leaf(c) => serde_json::json!({ "leaf": c }),
            DataNode::Node(entries) => serde_json::json!({
                "node": entries
                    .iter()
                    .map(|(child, mult)| serde_json::json!([child.to_json(), mult]))
                    .collect::<Vec<_>>()
            }),
        }
    }

    pub fn from_json(v: &serde_json::Value) -> Result<DataNode> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::malformed("datum must be an object"))?;
        if let Some(leaf) = obj.get("leaf") {
            let color: ExtNat = serde_json::from_value(leaf.clone())
                .map_err(|e| Error::malformed(format!("bad leaf color: {e}")))?;
            return Ok(DataNode::Leaf(color));
        }
        if let Some(node) = obj.get("node") {
            let raw = node
                .as_array()
                .ok_or_else(|| Error::malformed("node entries must be an array"))?;
            let mut children = Vec::new();
            for entry in raw {
                let pair = entry
                    .as_array()
                    .filter(|a| a.len() == 2)
                    .ok_or_else(|| Error::malformed("node entry must be [datum, mult]"))?;
                let child = DataNode::from_json(&pair[0])?;
                let mult = pair[1]
                    .as_u64()
                    .filter(|&m| m >= 1)
                    .ok_or_else(|| Error::malformed("multiplicity must be at least 1"))?;
                for _ in 0..mult {
                    children.push(child.clone());
                }
            }
            return Ok(DataNode::from_children(children));
        }
        Err(Error::malformed("datum needs a \"leaf\" or \"node\" field"))
    }
}

impl RefData {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "variant": serde_json::to_value(self.variant).unwrap(),
            "depth": self.depth,
            "data": self.root.to_json(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<RefData> {
        let variant: Variant = serde_json::from_value(
            v.get("variant")
                .cloned()
                .ok_or_else(|| Error::malformed("missing variant"))?,
        )
        .map_err(|e| Error::malformed(format!("bad variant: {e}")))?;
        let depth = v
            .get("depth")
            .and_then(|d| d.as_u64())
            .ok_or_else(|| Error::malformed("missing depth"))? as usize;
        let root = DataNode::from_json(
            v.get("data")
                .ok_or_else(|| Error::malformed("missing data"))?,
        )?;
        RefData::new(variant, depth, root)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bin(depth: usize, colors: &[u32]) -> RefPresentation {
        RefPresentation::new(
            Variant::Bin,
            depth,
            colors.iter().map(|&c| ExtNat::Fin(c)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn depth_one_multiplicities() {
        let d = compute_data(&bin(1, &[1, 1]));
        let leaf = DataNode::Leaf(ExtNat::Fin(1));
        assert_eq!(d.multiplicity(1, &leaf), Some(2));
        assert_eq!(d.level_types(1), vec![leaf]);

        let d = compute_data(&bin(1, &[1, 2]));
        assert_eq!(d.multiplicity(1, &DataNode::Leaf(ExtNat::Fin(1))), Some(1));
        assert_eq!(d.multiplicity(1, &DataNode::Leaf(ExtNat::Fin(2))), Some(1));
        assert_eq!(d.level_types(1).len(), 2);
    }

    #[test]
    fn swapped_subtrees_share_data() {
        let p = bin(2, &[1, 2, 2, 1]);
        let q = bin(2, &[2, 1, 1, 2]);
        assert_eq!(compute_data(&p), compute_data(&q));
        assert!(presentations_equiv(&p, &q).unwrap());
    }

    #[test]
    fn data_invariant_under_every_depth3_automorphism() {
        let p = bin(3, &[1, 2, 3, 1, 2, 2, 1, 4]);
        let base = compute_data(&p);
        for aut in TreeAut::enumerate_bin(3).unwrap() {
            assert_eq!(compute_data(&p.transported(&aut).unwrap()), base);
        }
    }

    #[test]
    fn unpack_round_trips() {
        let p = bin(3, &[3, 1, 2, 2, 1, 1, 2, 1]);
        let d = compute_data(&p);
        let q = unpack_data(&d).unwrap();
        assert_eq!(compute_data(&q), d);
        assert!(presentations_equiv(&p, &q).unwrap());
    }

    #[test]
    fn unpack_rejects_wrong_arity() {
        let root = DataNode::Node(vec![(DataNode::Leaf(ExtNat::Fin(1)), 3)]);
        assert!(RefData::new(Variant::Bin, 1, root).is_err());
    }

    #[test]
    fn set_encoder_round_trips() {
        let set: BTreeSet<String> = ["00", "01", "10"].iter().map(|s| s.to_string()).collect();
        let p = encode_set_refbin(&set, 2).unwrap();
        assert_eq!(decode_set_refbin(&p).unwrap(), set);
        assert_eq!(
            decode_set_refbin(&encode_set_refbin(&BTreeSet::new(), 2).unwrap()).unwrap(),
            BTreeSet::new()
        );
    }

    #[test]
    fn single_string_flags_one_leaf() {
        let set: BTreeSet<String> = std::iter::once("11".to_string()).collect();
        let p = encode_set_refbin(&set, 2).unwrap();
        let omega_leaves: Vec<String> = (0..p.leaf_count())
            .filter(|&r| p.color_by_rank(r) == ExtNat::Omega)
            .map(|r| rank_address(r, 2, 3))
            .collect();
        assert_eq!(omega_leaves, vec!["111".to_string()]);
    }

    #[test]
    fn distinct_sets_inequivalent_by_automorphism_oracle() {
        let i: BTreeSet<String> = std::iter::once("00".to_string()).collect();
        let j: BTreeSet<String> = std::iter::once("01".to_string()).collect();
        let p = encode_set_refbin(&i, 2).unwrap();
        let q = encode_set_refbin(&j, 2).unwrap();
        // independent oracle: no color-preserving ambient automorphism matches
        let mut found = false;
        for aut in TreeAut::enumerate_bin(3).unwrap() {
            if p.transported(&aut).unwrap() == q {
                found = true;
            }
        }
        assert!(!found);
        assert!(!presentations_equiv(&p, &q).unwrap());
    }

    #[test]
    fn tree_invariant_inverts_encoder() {
        let root_only = LabeledTree::new(2, std::iter::once(String::new()).collect()).unwrap();
        let p = encode_tree_refinf(&root_only, 2, 2).unwrap();
        // hand evaluation per address: an exit through a nonzero symbol
        // (the second symbol of 01 and 11) marks the leaf with color 2;
        // 10 exits through the root, which is in the tree, and then
        // continues with zeros only
        assert_eq!(p.color("00").unwrap(), ExtNat::Fin(1));
        assert_eq!(p.color("01").unwrap(), ExtNat::Fin(2));
        assert_eq!(p.color("10").unwrap(), ExtNat::Fin(1));
        assert_eq!(p.color("11").unwrap(), ExtNat::Fin(2));
        assert_eq!(tree_invariant(&p).unwrap(), root_only);

        let chain = LabeledTree::new(2, ["", "0"].iter().map(|s| s.to_string()).collect()).unwrap();
        let p = encode_tree_refinf(&chain, 3, 2).unwrap();
        assert_eq!(tree_invariant(&p).unwrap(), chain.canonicalize());
    }

    #[test]
    fn full_tree_encodes_all_ones() {
        let full = LabeledTree::new(
            2,
            ["", "0", "1", "00", "01", "10", "11"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        )
        .unwrap();
        let p = encode_tree_refinf(&full, 3, 2).unwrap();
        for rank in 0..p.leaf_count() {
            assert_eq!(p.color_by_rank(rank), ExtNat::Fin(1));
        }
    }

    #[test]
    fn isomorphic_trees_encode_identically() {
        let left =
            LabeledTree::new(2, ["", "0", "00"].iter().map(|s| s.to_string()).collect()).unwrap();
        let right =
            LabeledTree::new(2, ["", "1", "11"].iter().map(|s| s.to_string()).collect()).unwrap();
        assert_eq!(
            encode_tree_refinf(&left, 4, 2).unwrap(),
            encode_tree_refinf(&right, 4, 2).unwrap()
        );
    }

    #[test]
    fn all_twos_has_no_root() {
        let p =
            RefPresentation::new(Variant::Inf { inf: 2 }, 2, vec![ExtNat::Fin(2); 4]).unwrap();
        assert!(matches!(tree_invariant(&p), Err(Error::NoRoot)));
    }

    #[test]
    fn bin_presentations_rejected_by_tree_invariant() {
        let p = bin(2, &[1, 1, 1, 1]);
        assert!(matches!(tree_invariant(&p), Err(Error::BinRejected)));
    }

    #[test]
    fn presentation_json_round_trip() {
        let p = bin(2, &[1, 2, 3, 1]);
        let text = serde_json::to_string(&p).unwrap();
        let back: RefPresentation = serde_json::from_str(&text).unwrap();
        assert_eq!(p, back);
    }

    #[test]
    fn data_json_round_trip() {
        let d = compute_data(&bin(2, &[1, 2, 2, 1]));
        let back = RefData::from_json(&d.to_json()).unwrap();
        assert_eq!(d, back);
    }
}
