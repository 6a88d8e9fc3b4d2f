//! Brute-force isomorphism search, the independent oracle.
//!
//! This deliberately shares nothing with the refinement path: a plain
//! backtracking search over bijections with incremental pruning. Any
//! returned witness verifies.

use crate::error::{Error, Result};
use crate::structure::{Bijection, FiniteStructure};

pub const DEFAULT_ORACLE_BOUND: usize = 8;

/// Read the oracle bound override from `SCOTT_ORACLE_BOUND`, falling back
/// to the default.
pub fn oracle_bound_from_env() -> usize {
    std::env::var("SCOTT_ORACLE_BOUND")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_ORACLE_BOUND)
}

/// Search for a relation-preserving bijection. `None` means none exists;
/// universes above `bound` are refused outright to keep runtime bounded.
pub fn brute_force_iso(
    m: &FiniteStructure,
    n: &FiniteStructure,
    bound: usize,
) -> Result<Option<Bijection>> {
    if m.sig() != n.sig() {
        return Err(Error::SignatureMismatch(
            "isomorphism search needs one shared signature".into(),
        ));
    }
    let size = m.size().max(n.size());
    if size > bound {
        return Err(Error::OracleBound { size, bound });
    }
    if m.size() != n.size() {
        return Ok(None);
    }
    for i in 0..m.sig().len() {
        if m.interp(i).len() != n.interp(i).len() {
            return Ok(None);
        }
    }
    let size = m.size();
    let mut map = vec![usize::MAX; size];
    let mut used = vec![false; size];
    if extend(m, n, &mut map, &mut used, 0) {
        Ok(Some(Bijection { map }))
    } else {
        Ok(None)
    }
}

fn extend(
    m: &FiniteStructure,
    n: &FiniteStructure,
    map: &mut Vec<usize>,
    used: &mut Vec<bool>,
    next: usize,
) -> bool {
    if next == m.size() {
        return true;
    }
    for candidate in 0..n.size() {
        if used[candidate] {
            continue;
        }
        map[next] = candidate;
        if consistent(m, n, map, next) {
            used[candidate] = true;
            if extend(m, n, map, used, next + 1) {
                return true;
            }
            used[candidate] = false;
        }
    }
    map[next] = usize::MAX;
    false
}

/// Check every atomic fact over the assigned prefix that mentions the
/// newly assigned element, in both directions.
fn consistent(m: &FiniteStructure, n: &FiniteStructure, map: &[usize], new: usize) -> bool {
    let assigned = new + 1;
    let mut args_m: Vec<usize> = Vec::new();
    let mut args_n: Vec<usize> = Vec::new();
    for (sym_idx, sym) in m.sig().symbols().iter().enumerate() {
        let r = sym.arity;
        let combos = (assigned as u64).pow(r as u32);
        'combo: for c in 0..combos {
            args_m.clear();
            args_n.clear();
            let mut rest = c;
            let mut mentions_new = false;
            for _ in 0..r {
                let x = (rest % assigned as u64) as usize;
                rest /= assigned as u64;
                if x == new {
                    mentions_new = true;
                }
                args_m.push(x);
                args_n.push(map[x]);
            }
            if !mentions_new {
                continue 'combo;
            }
            if m.holds(sym_idx, &args_m) != n.holds(sym_idx, &args_n) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::digraph;

    #[test]
    fn identity_on_equal_structures() {
        let m = digraph(3, &[(0, 1), (1, 2)]).unwrap();
        let w = brute_force_iso(&m, &m, 8).unwrap().unwrap();
        assert!(w.verifies(&m, &m));
    }

    #[test]
    fn distinguishes_two_cycle_from_discrete() {
        let cycle = digraph(2, &[(0, 1), (1, 0)]).unwrap();
        let discrete = digraph(2, &[]).unwrap();
        assert!(brute_force_iso(&cycle, &discrete, 8).unwrap().is_none());
    }

    #[test]
    fn size_mismatch_is_absent_not_error() {
        let a = digraph(3, &[]).unwrap();
        let b = digraph(4, &[]).unwrap();
        assert!(brute_force_iso(&a, &b, 8).unwrap().is_none());
    }

    #[test]
    fn refuses_oversized_universes() {
        let a = digraph(9, &[]).unwrap();
        assert!(matches!(
            brute_force_iso(&a, &a, 8),
            Err(Error::OracleBound { size: 9, bound: 8 })
        ));
    }

    #[test]
    fn finds_witness_for_relabeling() {
        let m = digraph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let n = m.relabel(&[2, 0, 3, 1]).unwrap();
        let w = brute_force_iso(&m, &n, 8).unwrap().unwrap();
        assert!(w.verifies(&m, &n));
    }
}
