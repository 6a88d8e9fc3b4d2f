//! Finite-round back-and-forth games.
//!
//! A position is the partial map built so far; picking an already-pebbled
//! element never helps the spoiler, so the search ranges over fresh picks
//! on either side and memoizes on (position, remaining rounds).

use crate::error::{Error, Result};
use crate::structure::FiniteStructure;
use std::collections::HashMap;

/// Does the duplicator survive `rounds` rounds between `m` and `n`?
pub fn ef_equiv(m: &FiniteStructure, n: &FiniteStructure, rounds: usize) -> Result<bool> {
    if m.sig() != n.sig() {
        return Err(Error::SignatureMismatch(
            "the game needs one shared signature".into(),
        ));
    }
    let mut memo: HashMap<(Vec<(u8, u8)>, usize), bool> = HashMap::new();
    Ok(wins(m, n, &mut Vec::new(), rounds, &mut memo))
}

fn wins(
    m: &FiniteStructure,
    n: &FiniteStructure,
    pos: &mut Vec<(u8, u8)>,
    rounds: usize,
    memo: &mut HashMap<(Vec<(u8, u8)>, usize), bool>,
) -> bool {
    if rounds == 0 {
        return true;
    }
    let key = (pos.clone(), rounds);
    if let Some(&v) = memo.get(&key) {
        return v;
    }
    let result = (|| {
        // spoiler plays a fresh element on the left
        for a in 0..m.size() as u8 {
            if pos.iter().any(|&(x, _)| x == a) {
                continue;
            }
            if !has_response(m, n, pos, rounds, a, true, memo) {
                return false;
            }
        }
        // or on the right
        for b in 0..n.size() as u8 {
            if pos.iter().any(|&(_, y)| y == b) {
                continue;
            }
            if !has_response(m, n, pos, rounds, b, false, memo) {
                return false;
            }
        }
        true
    })();
    memo.insert(key, result);
    result
}

fn has_response(
    m: &FiniteStructure,
    n: &FiniteStructure,
    pos: &mut Vec<(u8, u8)>,
    rounds: usize,
    pick: u8,
    left: bool,
    memo: &mut HashMap<(Vec<(u8, u8)>, usize), bool>,
) -> bool {
    let opposite = if left { n.size() } else { m.size() };
    for resp in 0..opposite as u8 {
        let pair = if left { (pick, resp) } else { (resp, pick) };
        if pos.iter().any(|&(x, y)| x == pair.0 || y == pair.1) {
            continue;
        }
        if !compatible(m, n, pos, pair) {
            continue;
        }
        let idx = pos.binary_search(&pair).unwrap_err();
        pos.insert(idx, pair);
        let won = wins(m, n, pos, rounds - 1, memo);
        pos.remove(idx);
        if won {
            return true;
        }
    }
    false
}

/// The extended map stays a partial isomorphism: every atomic fact over
/// the mapped elements that mentions the new pair must match across the
/// two structures.
fn compatible(m: &FiniteStructure, n: &FiniteStructure, pos: &[(u8, u8)], new: (u8, u8)) -> bool {
    let mut left: Vec<usize> = pos.iter().map(|&(a, _)| a as usize).collect();
    let mut right: Vec<usize> = pos.iter().map(|&(_, b)| b as usize).collect();
    left.push(new.0 as usize);
    right.push(new.1 as usize);
    let k = left.len();
    let mut args_m: Vec<usize> = Vec::new();
    let mut args_n: Vec<usize> = Vec::new();
    for (sym_idx, sym) in m.sig().symbols().iter().enumerate() {
        let r = sym.arity;
        let combos = (k as u64).pow(r as u32);
        'combo: for c in 0..combos {
            args_m.clear();
            args_n.clear();
            let mut rest = c;
            let mut mentions_new = false;
            for _ in 0..r {
                let slot = (rest % k as u64) as usize;
                rest /= k as u64;
                if slot == k - 1 {
                    mentions_new = true;
                }
                args_m.push(left[slot]);
                args_n.push(right[slot]);
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
