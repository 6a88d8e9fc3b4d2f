//! Finite relational structures over explicit signatures.
//!
//! A [`FiniteStructure`] is the universal input of the Scott engine: a
//! universe `0..n` together with, for each relation symbol, the set of
//! tuples it holds on. Structures are immutable after construction and
//! validated eagerly.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// An ordered list of relation symbols. The order is canonical: it fixes
/// the serialization order of atomic data everywhere downstream.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Signature {
    symbols: Vec<Symbol>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

impl Signature {
    pub fn new(symbols: Vec<(String, usize)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for (name, arity) in &symbols {
            if *arity == 0 {
                return Err(Error::malformed(format!("symbol {name} has arity 0")));
            }
            if !seen.insert(name.clone()) {
                return Err(Error::malformed(format!("duplicate symbol {name}")));
            }
        }
        Ok(Signature {
            symbols: symbols
                .into_iter()
                .map(|(name, arity)| Symbol { name, arity })
                .collect(),
        })
    }

    /// The empty signature (no relation symbols).
    pub fn empty() -> Self {
        Signature { symbols: vec![] }
    }

    /// One binary symbol, the everyday digraph signature.
    pub fn binary(name: &str) -> Self {
        Signature::new(vec![(name.to_string(), 2)]).unwrap()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.name == name)
    }
}

/// A finite structure: universe `0..size`, with one tuple set per symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteStructure {
    sig: Signature,
    size: usize,
    interp: Vec<BTreeSet<Vec<usize>>>,
}

impl FiniteStructure {
    pub fn new(sig: Signature, size: usize, interp: Vec<BTreeSet<Vec<usize>>>) -> Result<Self> {
        if size == 0 {
            return Err(Error::malformed("universe must be nonempty"));
        }
        if interp.len() != sig.len() {
            return Err(Error::malformed(format!(
                "expected {} tuple sets, got {}",
                sig.len(),
                interp.len()
            )));
        }
        for (sym, tuples) in sig.symbols().iter().zip(&interp) {
            for t in tuples {
                if t.len() != sym.arity {
                    return Err(Error::malformed(format!(
                        "tuple {t:?} has wrong arity for {}",
                        sym.name
                    )));
                }
                if t.iter().any(|&x| x >= size) {
                    return Err(Error::malformed(format!(
                        "tuple {t:?} exceeds universe size {size}"
                    )));
                }
            }
        }
        Ok(FiniteStructure { sig, size, interp })
    }

    pub fn sig(&self) -> &Signature {
        &self.sig
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn interp(&self, sym_idx: usize) -> &BTreeSet<Vec<usize>> {
        &self.interp[sym_idx]
    }

    pub fn holds(&self, sym_idx: usize, args: &[usize]) -> bool {
        self.interp[sym_idx].contains(args)
    }

    /// The image of this structure under a permutation of its universe.
    pub fn relabel(&self, perm: &[usize]) -> Result<FiniteStructure> {
        if perm.len() != self.size {
            return Err(Error::malformed("permutation length mismatch"));
        }
        let mut seen = vec![false; self.size];
        for &p in perm {
            if p >= self.size || seen[p] {
                return Err(Error::malformed("not a permutation"));
            }
            seen[p] = true;
        }
        let interp = self
            .interp
            .iter()
            .map(|tuples| {
                tuples
                    .iter()
                    .map(|t| t.iter().map(|&x| perm[x]).collect())
                    .collect()
            })
            .collect();
        FiniteStructure::new(self.sig.clone(), self.size, interp)
    }
}

/// Wire form mirroring the JSON layout.
#[derive(Serialize, Deserialize)]
struct StructureWire {
    sig: Vec<Symbol>,
    size: usize,
    interp: std::collections::BTreeMap<String, Vec<Vec<usize>>>,
}

impl Serialize for FiniteStructure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let interp = self
            .sig
            .symbols()
            .iter()
            .enumerate()
            .map(|(i, sym)| (sym.name.clone(), self.interp[i].iter().cloned().collect()))
            .collect();
        StructureWire {
            sig: self.sig.symbols().to_vec(),
            size: self.size,
            interp,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FiniteStructure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let wire = StructureWire::deserialize(d)?;
        let sig = Signature::new(
            wire.sig
                .iter()
                .map(|s| (s.name.clone(), s.arity))
                .collect(),
        )
        .map_err(D::Error::custom)?;
        let mut interp = vec![BTreeSet::new(); sig.len()];
        for (name, tuples) in wire.interp {
            let idx = sig
                .index_of(&name)
                .ok_or_else(|| D::Error::custom(format!("unknown symbol {name}")))?;
            interp[idx] = tuples.into_iter().collect();
        }
        FiniteStructure::new(sig, wire.size, interp).map_err(D::Error::custom)
    }
}

/// A witness bijection between two equal-size universes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Bijection {
    pub map: Vec<usize>,
}

impl Bijection {
    pub fn identity(n: usize) -> Self {
        Bijection {
            map: (0..n).collect(),
        }
    }

    /// Check that this bijection is a relation-preserving isomorphism.
    pub fn verifies(&self, m: &FiniteStructure, n: &FiniteStructure) -> bool {
        if m.sig() != n.sig() || m.size() != n.size() || self.map.len() != m.size() {
            return false;
        }
        let mut seen = vec![false; n.size()];
        for &p in &self.map {
            if p >= n.size() || seen[p] {
                return false;
            }
            seen[p] = true;
        }
        for (i, _sym) in m.sig().symbols().iter().enumerate() {
            if m.interp(i).len() != n.interp(i).len() {
                return false;
            }
            for t in m.interp(i) {
                let image: Vec<usize> = t.iter().map(|&x| self.map[x]).collect();
                if !n.holds(i, &image) {
                    return false;
                }
            }
        }
        true
    }
}

/// Builder for digraphs over one binary symbol, the workhorse of the
/// oracle campaigns.
pub fn digraph(size: usize, edges: &[(usize, usize)]) -> Result<FiniteStructure> {
    let sig = Signature::binary("E");
    let tuples: BTreeSet<Vec<usize>> = edges.iter().map(|&(a, b)| vec![a, b]).collect();
    FiniteStructure::new(sig, size, vec![tuples])
}

/// Decode a digraph on `size` vertices from the bits of `code`: bit
/// `i * size + j` is the edge `(i, j)`, loops included.
pub fn digraph_from_code(size: usize, code: u64) -> FiniteStructure {
    let mut edges = Vec::new();
    for i in 0..size {
        for j in 0..size {
            if code >> (i * size + j) & 1 == 1 {
                edges.push((i, j));
            }
        }
    }
    digraph(size, &edges).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_universe() {
        assert!(FiniteStructure::new(Signature::empty(), 0, vec![]).is_err());
    }

    #[test]
    fn rejects_bad_tuples() {
        let sig = Signature::binary("E");
        assert!(FiniteStructure::new(sig.clone(), 2, vec![[vec![0, 2]].into()]).is_err());
        assert!(FiniteStructure::new(sig, 2, vec![[vec![0]].into()]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let m = digraph(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let text = serde_json::to_string(&m).unwrap();
        let back: FiniteStructure = serde_json::from_str(&text).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn relabel_is_action() {
        let m = digraph(3, &[(0, 1)]).unwrap();
        let g = m.relabel(&[1, 2, 0]).unwrap();
        assert!(g.holds(0, &[1, 2]));
        assert!(!g.holds(0, &[0, 1]));
    }
}
