//! Canonical sentences for finite structures.
//!
//! A sentence is materialized from a refinement fixpoint as a rooted DAG
//! over five node kinds: atomic-diagram leaves, AND/OR nodes with
//! set-valued children (deduplicated, canonically ordered), and the two
//! quantifier nodes. The byte serialization is canonical: relabeling the
//! input structure by any permutation of its universe yields byte-identical
//! output, and byte equality of two sentences decides equality of the
//! underlying formulas. On finite structures that equality coincides with
//! isomorphism, which is what the oracle campaigns check.

use crate::error::{Error, Result};
use crate::refine::{joint_refine, RefinementTrace, StageKeys};
use crate::structure::FiniteStructure;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

const TAG_ATOM: u8 = 0;
const TAG_AND: u8 = 1;
const TAG_OR: u8 = 2;
const TAG_EXISTS: u8 = 3;
const TAG_FORALL: u8 = 4;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Node {
    tag: u8,
    payload: Vec<u64>,
    payload_len: u8,
    children: Vec<u32>, // interned ids, sorted + deduplicated for set nodes
}

#[derive(Default)]
struct Builder {
    nodes: Vec<Node>,
    heights: Vec<u32>,
    ids: HashMap<Node, u32>,
}

impl Builder {
    fn intern(&mut self, mut node: Node) -> u32 {
        if node.tag == TAG_AND || node.tag == TAG_OR {
            node.children.sort_unstable();
            node.children.dedup();
        }
        if let Some(&id) = self.ids.get(&node) {
            return id;
        }
        let h = 1 + node
            .children
            .iter()
            .map(|&c| self.heights[c as usize])
            .max()
            .unwrap_or(0);
        let id = self.nodes.len() as u32;
        self.nodes.push(node.clone());
        self.heights.push(h);
        self.ids.insert(node, id);
        id
    }

    fn atom(&mut self, len: u8, bits: &[u64]) -> u32 {
        self.intern(Node {
            tag: TAG_ATOM,
            payload: bits.to_vec(),
            payload_len: len,
            children: vec![],
        })
    }

    fn set_node(&mut self, tag: u8, children: Vec<u32>) -> u32 {
        self.intern(Node {
            tag,
            payload: vec![],
            payload_len: 0,
            children,
        })
    }

    fn quantifier(&mut self, tag: u8, child: u32) -> u32 {
        self.intern(Node {
            tag,
            payload: vec![],
            payload_len: 0,
            children: vec![child],
        })
    }

    /// Canonical bytes of the DAG rooted at `root`.
    ///
    /// Nodes are ranked by height first, then by (tag, payload, ranked
    /// child list); children of lower height always rank before their
    /// parents, so the comparison is well-founded. Distinct interned nodes
    /// never compare equal, hence the rank order, and with it the byte
    /// output, is independent of construction order.
    fn serialize(&self, root: u32) -> Vec<u8> {
        let mut reachable = Vec::new();
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            if seen[id as usize] {
                continue;
            }
            seen[id as usize] = true;
            reachable.push(id);
            stack.extend_from_slice(&self.nodes[id as usize].children);
        }
        reachable.sort_unstable_by_key(|&id| self.heights[id as usize]);

        let mut rank = vec![u32::MAX; self.nodes.len()];
        let mut ordered: Vec<u32> = Vec::with_capacity(reachable.len());
        let mut i = 0usize;
        while i < reachable.len() {
            let h = self.heights[reachable[i] as usize];
            let mut j = i;
            while j < reachable.len() && self.heights[reachable[j] as usize] == h {
                j += 1;
            }
            let mut level: Vec<(u8, u8, &[u64], Vec<u32>, u32)> = reachable[i..j]
                .iter()
                .map(|&id| {
                    let n = &self.nodes[id as usize];
                    let mut child_ranks: Vec<u32> =
                        n.children.iter().map(|&c| rank[c as usize]).collect();
                    child_ranks.sort_unstable();
                    (n.tag, n.payload_len, n.payload.as_slice(), child_ranks, id)
                })
                .collect();
            level.sort_unstable_by(|a, b| (a.0, a.1, a.2, &a.3).cmp(&(b.0, b.1, b.2, &b.3)));
            for entry in level {
                rank[entry.4 as usize] = ordered.len() as u32;
                ordered.push(entry.4);
            }
            i = j;
        }

        let mut out = Vec::new();
        out.extend_from_slice(b"CSS1");
        out.extend_from_slice(&(ordered.len() as u32).to_le_bytes());
        for &id in &ordered {
            let n = &self.nodes[id as usize];
            out.push(n.tag);
            if n.tag == TAG_ATOM {
                out.push(n.payload_len);
                out.extend_from_slice(&(n.payload.len() as u32).to_le_bytes());
                for w in &n.payload {
                    out.extend_from_slice(&w.to_le_bytes());
                }
            } else {
                let mut child_ranks: Vec<u32> =
                    n.children.iter().map(|&c| rank[c as usize]).collect();
                child_ranks.sort_unstable();
                out.extend_from_slice(&(child_ranks.len() as u32).to_le_bytes());
                for r in child_ranks {
                    out.extend_from_slice(&r.to_le_bytes());
                }
            }
        }
        out.extend_from_slice(&rank[root as usize].to_le_bytes());
        out
    }
}

/// Canonical serialized sentence; equality of values is byte equality.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScottSentence {
    #[serde(with = "hex_bytes")]
    bytes: Vec<u8>,
}

mod hex_bytes {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::to_hex(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let text = String::deserialize(d)?;
        super::from_hex(&text).map_err(D::Error::custom)
    }
}

fn to_hex(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

fn from_hex(text: &str) -> Result<Vec<u8>> {
    if text.len() % 2 != 0 {
        return Err(Error::malformed("odd hex length"));
    }
    (0..text.len() / 2)
        .map(|i| {
            u8::from_str_radix(&text[2 * i..2 * i + 2], 16)
                .map_err(|e| Error::malformed(format!("bad hex: {e}")))
        })
        .collect()
}

impl ScottSentence {
    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn hex(&self) -> String {
        to_hex(&self.bytes)
    }

    pub fn from_hex(text: &str) -> Result<Self> {
        Ok(ScottSentence {
            bytes: from_hex(text)?,
        })
    }
}

/// Materialize the canonical sentence of a structure from its refinement
/// fixpoint: the fixpoint formula of the empty tuple, conjoined with one
/// universally quantified conjunct per fixpoint class tying the fixpoint
/// stage to the stage after it. The stage-(α+1) node embeds the stage-α
/// node as its first conjunct, so the conjunct set determines the pairs.
pub fn scott_sentence(m: &FiniteStructure) -> Result<ScottSentence> {
    let trace = joint_refine(&[m], m.size())?;
    Ok(sentence_from_trace(&trace, 0))
}

pub(crate) fn sentence_from_trace(trace: &RefinementTrace, struct_idx: usize) -> ScottSentence {
    let mut b = Builder::default();
    let stages = trace.stage_count();
    let mut nodes_per_stage: Vec<Vec<u32>> = Vec::with_capacity(stages);

    for stage in 0..stages {
        match trace.stage_keys(stage) {
            StageKeys::Atoms(atom_keys) => {
                let nodes = atom_keys
                    .iter()
                    .map(|k| b.atom(k.len, &k.bits))
                    .collect::<Vec<_>>();
                nodes_per_stage.push(nodes);
            }
            StageKeys::Steps(step_keys) => {
                let prev_nodes = nodes_per_stage[stage - 1].clone();
                let nodes = step_keys
                    .iter()
                    .map(|k| {
                        let ext_nodes: Vec<u32> = k
                            .extensions
                            .iter()
                            .map(|&e| prev_nodes[e as usize])
                            .collect();
                        let exists_set: Vec<u32> = ext_nodes
                            .iter()
                            .map(|&n| b.quantifier(TAG_EXISTS, n))
                            .collect();
                        let exists_part = b.set_node(TAG_AND, exists_set);
                        let or_part = b.set_node(TAG_OR, ext_nodes);
                        let forall_part = b.quantifier(TAG_FORALL, or_part);
                        b.set_node(
                            TAG_AND,
                            vec![prev_nodes[k.prev as usize], exists_part, forall_part],
                        )
                    })
                    .collect::<Vec<_>>();
                nodes_per_stage.push(nodes);
            }
        }
    }

    let fix = trace.fixpoint_stage();
    let empty_class = trace.empty_tuple_type(fix, struct_idx) as usize;
    let head = nodes_per_stage[fix][empty_class];
    let tie_set: Vec<u32> = nodes_per_stage[fix + 1]
        .iter()
        .map(|&n| b.quantifier(TAG_FORALL, n))
        .collect();
    let ties = b.set_node(TAG_AND, tie_set);
    let root = b.set_node(TAG_AND, vec![head, ties]);
    ScottSentence {
        bytes: b.serialize(root),
    }
}

/// Decide isomorphism of two finite structures by comparing canonical
/// sentences byte for byte.
pub fn css_equal(m: &FiniteStructure, n: &FiniteStructure) -> Result<bool> {
    if m.sig() != n.sig() {
        return Err(Error::SignatureMismatch(
            "sentence comparison needs one shared signature".into(),
        ));
    }
    Ok(scott_sentence(m)? == scott_sentence(n)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{digraph, FiniteStructure, Signature};

    #[test]
    fn single_points_share_bytes() {
        let a = FiniteStructure::new(Signature::empty(), 1, vec![]).unwrap();
        let b = FiniteStructure::new(Signature::empty(), 1, vec![]).unwrap();
        assert_eq!(scott_sentence(&a).unwrap(), scott_sentence(&b).unwrap());
    }

    #[test]
    fn relabeled_two_cycle_is_byte_identical() {
        let m = digraph(2, &[(0, 1), (1, 0)]).unwrap();
        let swapped = m.relabel(&[1, 0]).unwrap();
        assert_eq!(
            scott_sentence(&m).unwrap(),
            scott_sentence(&swapped).unwrap()
        );
    }

    #[test]
    fn sixty_four_digraphs_sixteen_sentences() {
        let mut sentences = std::collections::BTreeSet::new();
        let pairs = [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)];
        for code in 0u64..64 {
            let mut edges = Vec::new();
            for (bit, &(i, j)) in pairs.iter().enumerate() {
                if code >> bit & 1 == 1 {
                    edges.push((i, j));
                }
            }
            let g = digraph(3, &edges).unwrap();
            sentences.insert(scott_sentence(&g).unwrap());
        }
        assert_eq!(sentences.len(), 16);
    }

    #[test]
    fn css_equal_basics() {
        let cycle = digraph(2, &[(0, 1), (1, 0)]).unwrap();
        let discrete = digraph(2, &[]).unwrap();
        assert!(css_equal(&cycle, &cycle).unwrap());
        assert!(!css_equal(&cycle, &discrete).unwrap());
    }

    #[test]
    fn hex_round_trips() {
        let m = digraph(3, &[(0, 1)]).unwrap();
        let s = scott_sentence(&m).unwrap();
        assert_eq!(ScottSentence::from_hex(&s.hex()).unwrap(), s);
    }
}
