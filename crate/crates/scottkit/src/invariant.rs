//! Hereditary-multiset invariants and their combinators.
//!
//! The base invariant is a (capped) chain count; the jump packages a
//! sequence of invariants as a multiset with capped multiplicities, and
//! the product keeps a sequence position-significant. Jump-built
//! invariants materialize as finite structures over one successor symbol
//! plus one equivalence symbol per jump level, faithfully enough that the
//! sentence engine separates any two distinct invariants; that
//! faithfulness is checked exhaustively against the brute-force oracle.

use crate::error::{Error, Result};
use crate::extnat::ExtNat;
use crate::structure::{FiniteStructure, Signature};
use std::collections::{BTreeMap, BTreeSet};

/// Multiplicities at or above the threshold collapse to the top value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cap(u32);

impl Cap {
    pub fn new(threshold: u32) -> Result<Cap> {
        if threshold < 2 {
            return Err(Error::malformed("cap threshold must be at least 2"));
        }
        Ok(Cap(threshold))
    }

    pub fn threshold(&self) -> u32 {
        self.0
    }

    pub fn apply(&self, n: u32) -> ExtNat {
        ExtNat::Fin(n).capped(self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NestedInvariant {
    Base(ExtNat),
    Jump(BTreeMap<NestedInvariant, ExtNat>),
    Prod(Vec<NestedInvariant>),
}

impl NestedInvariant {
    /// Nesting depth of jumps (products are transparent).
    pub fn jump_depth(&self) -> usize {
        match self {
            NestedInvariant::Base(_) => 0,
            NestedInvariant::Jump(entries) => {
                1 + entries.keys().map(|c| c.jump_depth()).max().unwrap_or(0)
            }
            NestedInvariant::Prod(parts) => {
                parts.iter().map(|c| c.jump_depth()).max().unwrap_or(0)
            }
        }
    }

    pub fn contains_omega(&self) -> bool {
        match self {
            NestedInvariant::Base(v) => *v == ExtNat::Omega,
            NestedInvariant::Jump(entries) => entries
                .iter()
                .any(|(c, m)| *m == ExtNat::Omega || c.contains_omega()),
            NestedInvariant::Prod(parts) => parts.iter().any(|c| c.contains_omega()),
        }
    }

    pub fn contains_prod(&self) -> bool {
        match self {
            NestedInvariant::Base(_) => false,
            NestedInvariant::Jump(entries) => entries.keys().any(|c| c.contains_prod()),
            NestedInvariant::Prod(_) => true,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            NestedInvariant::Base(v) => serde_json::json!({ "base": v }),
            NestedInvariant::Jump(entries) => serde_json::json!({
                "jump": entries
                    .iter()
                    .map(|(c, m)| serde_json::json!([c.to_json(), m]))
                    .collect::<Vec<_>>()
            }),
            NestedInvariant::Prod(parts) => serde_json::json!({
                "prod": parts.iter().map(|c| c.to_json()).collect::<Vec<_>>()
            }),
        }
    }

    pub fn from_json(v: &serde_json::Value) -> Result<NestedInvariant> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::malformed("invariant must be an object"))?;
        if let Some(base) = obj.get("base") {
            let value: ExtNat = serde_json::from_value(base.clone())
                .map_err(|e| Error::malformed(format!("bad base value: {e}")))?;
            if value == ExtNat::Fin(0) {
                return Err(Error::malformed("base value must be at least 1"));
            }
            return Ok(NestedInvariant::Base(value));
        }
        if let Some(jump) = obj.get("jump") {
            let raw = jump
                .as_array()
                .ok_or_else(|| Error::malformed("jump entries must be an array"))?;
            if raw.is_empty() {
                return Err(Error::malformed("jump must have at least one entry"));
            }
            let mut entries = BTreeMap::new();
            for entry in raw {
                let pair = entry
                    .as_array()
                    .filter(|a| a.len() == 2)
                    .ok_or_else(|| Error::malformed("jump entry must be [invariant, mult]"))?;
                let child = NestedInvariant::from_json(&pair[0])?;
                let mult: ExtNat = serde_json::from_value(pair[1].clone())
                    .map_err(|e| Error::malformed(format!("bad multiplicity: {e}")))?;
                if mult == ExtNat::Fin(0) {
                    return Err(Error::malformed("multiplicity must be at least 1"));
                }
                if entries.insert(child, mult).is_some() {
                    return Err(Error::malformed("duplicate jump entry"));
                }
            }
            return Ok(NestedInvariant::Jump(entries));
        }
        if let Some(prod) = obj.get("prod") {
            let raw = prod
                .as_array()
                .ok_or_else(|| Error::malformed("prod components must be an array"))?;
            if raw.is_empty() {
                return Err(Error::malformed("prod must have at least one component"));
            }
            let parts = raw
                .iter()
                .map(NestedInvariant::from_json)
                .collect::<Result<_>>()?;
            return Ok(NestedInvariant::Prod(parts));
        }
        Err(Error::malformed(
            "invariant needs a \"base\", \"jump\" or \"prod\" field",
        ))
    }
}

/// The chain-count classification of the base theory, capped.
pub fn t0_invariant(chains: u32, cap: Cap) -> Result<NestedInvariant> {
    if chains == 0 {
        return Err(Error::malformed("models have at least one chain"));
    }
    Ok(NestedInvariant::Base(cap.apply(chains)))
}

/// Package a sequence of invariants as a multiset with capped
/// multiplicities; invariant under permutation of the input.
pub fn jump_invariant(items: &[NestedInvariant], cap: Cap) -> Result<NestedInvariant> {
    if items.is_empty() {
        return Err(Error::malformed("jump needs at least one item"));
    }
    let mut counts: BTreeMap<&NestedInvariant, u32> = BTreeMap::new();
    for item in items {
        *counts.entry(item).or_insert(0) += 1;
    }
    Ok(NestedInvariant::Jump(
        counts
            .into_iter()
            .map(|(inv, n)| (inv.clone(), cap.apply(n)))
            .collect(),
    ))
}

/// Keep a sequence of invariants position-significant.
pub fn product_invariant(components: &[NestedInvariant]) -> Result<NestedInvariant> {
    if components.is_empty() {
        return Err(Error::malformed("product needs at least one component"));
    }
    Ok(NestedInvariant::Prod(components.to_vec()))
}

/// Number of distinct invariants at a given nesting level: level 0 is the
/// base count, and each level up assigns every prior invariant a
/// multiplicity in {absent, 1..threshold-1, top}, not all absent.
pub fn count_level(k: u32, base_count: u64, cap: Cap) -> Result<u64> {
    if base_count == 0 {
        return Err(Error::malformed("need at least one base invariant"));
    }
    let options = cap.threshold() as u64 + 1; // absent, 1..=threshold-1, top
    let mut count = base_count;
    for _ in 0..k {
        let mut power: u64 = 1;
        for _ in 0..count {
            power = power.checked_mul(options).ok_or(Error::Overflow)?;
        }
        count = power - 1;
    }
    Ok(count)
}

/// Exhaustively enumerate the distinct invariants at a nesting level,
/// built through `jump_invariant` itself. This is the independent route
/// for checking `count_level`.
pub fn enumerate_level(k: u32, bases: &[NestedInvariant], cap: Cap) -> Result<Vec<NestedInvariant>> {
    let mut level: Vec<NestedInvariant> = {
        let set: BTreeSet<NestedInvariant> = bases.iter().cloned().collect();
        set.into_iter().collect()
    };
    for _ in 0..k {
        // odometer over multiplicity options per invariant
        let options: Vec<Option<u32>> = std::iter::once(None)
            .chain((1..=cap.threshold()).map(Some))
            .collect();
        let mut next: BTreeSet<NestedInvariant> = BTreeSet::new();
        let mut digits = vec![0usize; level.len()];
        loop {
            let mut items: Vec<NestedInvariant> = Vec::new();
            for (i, &d) in digits.iter().enumerate() {
                if let Some(mult) = options[d] {
                    for _ in 0..mult {
                        items.push(level[i].clone());
                    }
                }
            }
            if !items.is_empty() {
                next.insert(jump_invariant(&items, cap)?);
            }
            // advance
            let mut pos = 0;
            loop {
                if pos == digits.len() {
                    break;
                }
                digits[pos] += 1;
                if digits[pos] < options.len() {
                    break;
                }
                digits[pos] = 0;
                pos += 1;
            }
            if pos == digits.len() {
                break;
            }
        }
        level = next.into_iter().collect();
    }
    Ok(level)
}

/// Materialize a jump-built invariant with the signature sized to its own
/// jump depth.
pub fn assemble(inv: &NestedInvariant, cycle_len: usize) -> Result<FiniteStructure> {
    assemble_with_depth(inv, cycle_len, inv.jump_depth())
}

/// Materialize at an explicit depth (at least the invariant's own), so
/// invariants of different depths can share a signature: each instance of
/// the base invariant becomes that many directed cycles, and each jump
/// level groups its blocks under its own equivalence symbol. Unused
/// deeper symbols stay empty. Top values have no finite materialization,
/// and position-significant products have no faithful encoding in this
/// signature, so both are rejected.
pub fn assemble_with_depth(
    inv: &NestedInvariant,
    cycle_len: usize,
    depth: usize,
) -> Result<FiniteStructure> {
    if cycle_len < 3 {
        return Err(Error::malformed("cycle length must be at least 3"));
    }
    if inv.contains_omega() {
        return Err(Error::malformed(
            "top values have no finite materialization",
        ));
    }
    if inv.contains_prod() {
        return Err(Error::malformed(
            "products have no faithful materialization over this signature",
        ));
    }
    if depth < inv.jump_depth() {
        return Err(Error::malformed("depth below the invariant's jump depth"));
    }
    let mut symbols = vec![("S".to_string(), 2)];
    for k in 1..=depth {
        symbols.push((format!("E{k}"), 2));
    }
    let sig = Signature::new(symbols)?;
    let mut interp: Vec<BTreeSet<Vec<usize>>> = vec![BTreeSet::new(); depth + 1];
    let size = place(inv, cycle_len, 1, 0, &mut interp);
    FiniteStructure::new(sig, size, interp)
}

/// Recursively lay out an invariant starting at element offset `at`,
/// returning the number of elements used. Jump blocks at nesting level
/// `level` populate the symbol E_level.
fn place(
    inv: &NestedInvariant,
    cycle_len: usize,
    level: usize,
    at: usize,
    interp: &mut [BTreeSet<Vec<usize>>],
) -> usize {
    match inv {
        NestedInvariant::Base(ExtNat::Fin(chains)) => {
            let mut used = 0;
            for _ in 0..*chains {
                for i in 0..cycle_len {
                    let a = at + used + i;
                    let b = at + used + (i + 1) % cycle_len;
                    interp[0].insert(vec![a, b]);
                }
                used += cycle_len;
            }
            used
        }
        NestedInvariant::Jump(entries) => {
            let mut used = 0;
            for (child, mult) in entries {
                let copies = match mult {
                    ExtNat::Fin(m) => *m,
                    ExtNat::Omega => unreachable!("checked before assembly"),
                };
                for _ in 0..copies {
                    let block = place(child, cycle_len, level + 1, at + used, interp);
                    for i in 0..block {
                        for j in 0..block {
                            interp[level].insert(vec![at + used + i, at + used + j]);
                        }
                    }
                    used += block;
                }
            }
            used
        }
        _ => unreachable!("checked before assembly"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(n: u32) -> NestedInvariant {
        NestedInvariant::Base(ExtNat::Fin(n))
    }

    #[test]
    fn t0_caps() {
        let cap = Cap::new(5).unwrap();
        assert_eq!(t0_invariant(2, cap).unwrap(), base(2));
        assert_eq!(
            t0_invariant(7, cap).unwrap(),
            NestedInvariant::Base(ExtNat::Omega)
        );
        assert_eq!(t0_invariant(1, Cap::new(2).unwrap()).unwrap(), base(1));
        assert!(t0_invariant(0, cap).is_err());
    }

    #[test]
    fn jump_counts_and_caps() {
        let cap = Cap::new(5).unwrap();
        let j = jump_invariant(&[base(1), base(1), base(2)], cap).unwrap();
        assert_eq!(
            j,
            NestedInvariant::Jump(
                [(base(1), ExtNat::Fin(2)), (base(2), ExtNat::Fin(1))].into()
            )
        );
        let j = jump_invariant(&[base(1), base(1), base(1)], Cap::new(3).unwrap()).unwrap();
        assert_eq!(
            j,
            NestedInvariant::Jump([(base(1), ExtNat::Omega)].into())
        );
    }

    #[test]
    fn jump_is_permutation_invariant() {
        let cap = Cap::new(4).unwrap();
        let a = jump_invariant(&[base(1), base(2), base(1)], cap).unwrap();
        let b = jump_invariant(&[base(2), base(1), base(1)], cap).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn product_is_order_sensitive() {
        let p = product_invariant(&[base(1), base(2)]).unwrap();
        let q = product_invariant(&[base(2), base(1)]).unwrap();
        assert_ne!(p, q);
        assert_eq!(p, product_invariant(&[base(1), base(2)]).unwrap());
        assert_eq!(product_invariant(&[base(1)]).unwrap(), NestedInvariant::Prod(vec![base(1)]));
    }

    #[test]
    fn count_level_examples() {
        assert_eq!(count_level(0, 3, Cap::new(5).unwrap()).unwrap(), 3);
        assert_eq!(count_level(1, 3, Cap::new(2).unwrap()).unwrap(), 26);
        assert_eq!(count_level(2, 2, Cap::new(2).unwrap()).unwrap(), 6560);
        assert_eq!(count_level(1, 2, Cap::new(2).unwrap()).unwrap(), 8);
        assert!(matches!(
            count_level(2, 3, Cap::new(3).unwrap()),
            Err(Error::Overflow)
        ));
    }

    #[test]
    fn enumeration_matches_count() {
        for (k, b, t) in [(1u32, 2u64, 2u32), (1, 3, 2), (1, 2, 3), (1, 3, 3), (2, 2, 2)] {
            let cap = Cap::new(t).unwrap();
            let bases: Vec<NestedInvariant> = (1..=b as u32).map(base).collect();
            let enumerated = enumerate_level(k, &bases, cap).unwrap();
            assert_eq!(
                enumerated.len() as u64,
                count_level(k, b, cap).unwrap(),
                "k={k} b={b} cap={t}"
            );
        }
    }

    #[test]
    fn base_assembly_is_cycles() {
        let m = assemble(&base(2), 4).unwrap();
        assert_eq!(m.size(), 8);
        assert_eq!(m.interp(0).len(), 8);
        assert_eq!(m.sig().len(), 1);
    }

    #[test]
    fn jump_assembly_blocks() {
        let cap = Cap::new(5).unwrap();
        let inv = jump_invariant(&[base(1), base(1)], cap).unwrap();
        let m = assemble(&inv, 3).unwrap();
        assert_eq!(m.size(), 6);
        // two blocks of one 3-cycle each
        assert_eq!(m.interp(1).len(), 18);
        assert!(m.holds(1, &[0, 2]));
        assert!(!m.holds(1, &[0, 3]));
    }

    #[test]
    fn assembly_rejects_omega_and_products() {
        assert!(assemble(&NestedInvariant::Base(ExtNat::Omega), 3).is_err());
        let p = product_invariant(&[base(1)]).unwrap();
        assert!(assemble(&p, 3).is_err());
    }

    #[test]
    fn assemblies_separate_invariants() {
        use crate::scott::css_equal;
        let cap = Cap::new(5).unwrap();
        let a = jump_invariant(&[base(1), base(1)], cap).unwrap();
        let b = jump_invariant(&[base(2)], cap).unwrap();
        let ma = assemble_with_depth(&a, 3, 2).unwrap();
        let mb = assemble_with_depth(&b, 3, 2).unwrap();
        assert_eq!(ma.size(), mb.size());
        assert!(!css_equal(&ma, &mb).unwrap());
        let nested = jump_invariant(&[b.clone()], cap).unwrap();
        let mn = assemble_with_depth(&nested, 3, 2).unwrap();
        assert!(!css_equal(&mb, &mn).unwrap());
        assert!(css_equal(&ma, &assemble_with_depth(&a, 3, 2).unwrap()).unwrap());
    }

    #[test]
    fn invariant_json_round_trip() {
        let cap = Cap::new(3).unwrap();
        let inv = jump_invariant(
            &[
                base(1),
                base(1),
                base(1),
                jump_invariant(&[base(2)], cap).unwrap(),
            ],
            cap,
        )
        .unwrap();
        let back = NestedInvariant::from_json(&inv.to_json()).unwrap();
        assert_eq!(inv, back);
        let p = product_invariant(&[base(1), inv]).unwrap();
        assert_eq!(NestedInvariant::from_json(&p.to_json()).unwrap(), p);
    }
}
