//! Joint back-and-forth refinement of tuple types.
//!
//! Types live on injective tuples only; a tuple with repeats has the same
//! type data as its injective support, so nothing is lost on finite
//! universes and the state space stays bounded. Stage 0 assigns each
//! tuple its quantifier-free atomic diagram. The step to stage α+1 gives
//! two tuples the same type exactly when they share a stage-α type and
//! the same *set* of stage-α types among their one-point extensions (sets,
//! not multisets: repeated formulas collapse). The hierarchy stabilizes at
//! the least stage whose partition repeats; that stage and the one after
//! it carry everything a canonical sentence needs.

use crate::error::{Error, Result};
use crate::structure::FiniteStructure;
use std::collections::HashMap;

const MAX_TUPLES: usize = 20_000_000;

/// Per-structure tuple tables: contents, lengths, and child links.
struct TupleTable {
    flat: Vec<u8>,
    start: Vec<u32>,
    len_of: Vec<u8>,
    children: Vec<u32>,
    child_start: Vec<u32>,
    by_length: Vec<(u32, u32)>,
}

impl TupleTable {
    fn build(size: usize, max_len: usize) -> Result<TupleTable> {
        if size > 32 {
            return Err(Error::CapacityExceeded(format!(
                "universe size {size} too large for exhaustive refinement"
            )));
        }
        let levels = max_len.min(size);
        let mut count: usize = 1;
        let mut level_size: usize = 1;
        for k in 0..levels {
            level_size *= size - k;
            count += level_size;
            if count > MAX_TUPLES {
                return Err(Error::CapacityExceeded(format!(
                    "more than {MAX_TUPLES} injective tuples"
                )));
            }
        }

        let mut t = TupleTable {
            flat: Vec::new(),
            start: Vec::with_capacity(count + 1),
            len_of: Vec::with_capacity(count),
            children: Vec::new(),
            child_start: Vec::with_capacity(count + 1),
            by_length: Vec::with_capacity(levels + 1),
        };
        let mut masks: Vec<u32> = Vec::with_capacity(count);

        t.start.push(0);
        t.len_of.push(0);
        masks.push(0);
        t.by_length.push((0, 1));

        let mut level_first: usize = 0;
        let mut level_count: usize = 1;
        let mut next_idx: usize = 1;
        for k in 0..levels {
            let first_new = next_idx;
            for i in level_first..level_first + level_count {
                let content_start = t.start[i] as usize;
                let content: Vec<u8> = t.flat[content_start..content_start + k].to_vec();
                for b in 0..size as u8 {
                    if masks[i] >> b & 1 == 1 {
                        continue;
                    }
                    t.flat.extend_from_slice(&content);
                    t.flat.push(b);
                    t.start.push(t.flat.len() as u32 - (k as u32 + 1));
                    t.len_of.push(k as u8 + 1);
                    masks.push(masks[i] | 1 << b);
                    next_idx += 1;
                }
            }
            t.by_length.push((first_new as u32, (next_idx - first_new) as u32));
            level_first = first_new;
            level_count = next_idx - first_new;
        }
        // start holds offsets into flat; make it an end-exclusive fence too
        t.start.push(t.flat.len() as u32);

        // child links, reconstructed in the same order the tuples were made
        t.child_start = vec![0; next_idx + 1];
        let mut child_total = 0usize;
        for i in 0..next_idx {
            t.child_start[i] = child_total as u32;
            if (t.len_of[i] as usize) < levels {
                child_total += size - t.len_of[i] as usize;
            }
        }
        t.child_start[next_idx] = child_total as u32;
        t.children = vec![0; child_total];
        let mut cursor = vec![0u32; next_idx];
        let mut parent_iter: Vec<(usize, usize)> = Vec::new(); // (parent, child) in creation order
        {
            let mut level_first = 0usize;
            let mut level_count = 1usize;
            let mut next = 1usize;
            for _ in 0..levels {
                let first_new = next;
                for i in level_first..level_first + level_count {
                    for b in 0..size as u8 {
                        if masks[i] >> b & 1 == 1 {
                            continue;
                        }
                        parent_iter.push((i, next));
                        next += 1;
                    }
                }
                level_first = first_new;
                level_count = next - first_new;
            }
        }
        for (parent, child) in parent_iter {
            let slot = t.child_start[parent] + cursor[parent];
            t.children[slot as usize] = child as u32;
            cursor[parent] += 1;
        }
        Ok(t)
    }

    fn count(&self) -> usize {
        self.len_of.len()
    }

    fn content(&self, i: usize) -> &[u8] {
        let s = self.start[i] as usize;
        &self.flat[s..s + self.len_of[i] as usize]
    }

    fn child_types<'a>(&self, i: usize, types: &'a [u32], base: usize) -> Vec<u32> {
        let s = self.child_start[i] as usize;
        let e = self.child_start[i + 1] as usize;
        self.children[s..e]
            .iter()
            .map(|&c| types[base + c as usize])
            .collect()
    }

    /// Index of a tuple by content, if tracked.
    fn index_of(&self, tuple: &[u8]) -> Option<usize> {
        let k = tuple.len();
        let (first, count) = *self.by_length.get(k)?;
        let (first, count) = (first as usize, count as usize);
        let mut lo = 0usize;
        let mut hi = count;
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.content(first + mid).cmp(tuple) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(first + mid),
            }
        }
        None
    }
}

/// The key identifying a stage-(α+1) class: the stage-α class plus the
/// deduplicated, sorted set of stage-α extension classes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StepKey {
    pub prev: u32,
    pub extensions: Vec<u32>,
}

/// The key identifying a stage-0 class: tuple length plus the packed
/// truth values of every atomic formula instance.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AtomKey {
    pub len: u8,
    pub bits: Vec<u64>,
}

pub enum StageKeys {
    Atoms(Vec<AtomKey>),
    Steps(Vec<StepKey>),
}

/// The full refinement history of a joint run.
pub struct RefinementTrace {
    max_len: usize,
    tables: Vec<TupleTable>,
    bases: Vec<usize>,
    total: usize,
    stages: Vec<Vec<u32>>,
    keys: Vec<StageKeys>,
    class_counts: Vec<usize>,
    fixpoint_stage: usize,
}

fn atom_key(m: &FiniteStructure, tuple: &[u8]) -> AtomKey {
    let k = tuple.len();
    let mut bits: Vec<u64> = Vec::new();
    let mut acc = 0u64;
    let mut filled = 0u32;
    let mut args: Vec<usize> = Vec::new();
    for (sym_idx, sym) in m.sig().symbols().iter().enumerate() {
        let r = sym.arity;
        // iterate all maps [r] -> [k] in mixed radix; none exist for k = 0
        let combos = (k as u64).pow(r as u32);
        for c in 0..combos {
            args.clear();
            let mut rest = c;
            for _ in 0..r {
                args.push(tuple[(rest % k as u64) as usize] as usize);
                rest /= k as u64;
            }
            if m.holds(sym_idx, &args) {
                acc |= 1 << filled;
            }
            filled += 1;
            if filled == 64 {
                bits.push(acc);
                acc = 0;
                filled = 0;
            }
        }
    }
    if filled > 0 {
        bits.push(acc);
    }
    AtomKey { len: k as u8, bits }
}

/// Refine all given structures jointly so type identifiers are shared
/// across them: cross-structure equality of type ids is meaningful.
pub fn joint_refine(structures: &[&FiniteStructure], max_len: usize) -> Result<RefinementTrace> {
    if structures.is_empty() {
        return Err(Error::malformed("no structures to refine"));
    }
    let sig = structures[0].sig();
    for m in structures {
        if m.sig() != sig {
            return Err(Error::SignatureMismatch(
                "joint refinement needs one shared signature".into(),
            ));
        }
    }
    let max_size = structures.iter().map(|m| m.size()).max().unwrap();
    let max_len = max_len.min(max_size);

    let mut tables = Vec::with_capacity(structures.len());
    let mut bases = Vec::with_capacity(structures.len());
    let mut total = 0usize;
    for m in structures {
        bases.push(total);
        let t = TupleTable::build(m.size(), max_len)?;
        total += t.count();
        tables.push(t);
    }
    if total > MAX_TUPLES {
        return Err(Error::CapacityExceeded(format!(
            "more than {MAX_TUPLES} injective tuples jointly"
        )));
    }

    // stage 0: atomic diagrams
    let mut types0 = vec![0u32; total];
    let mut atom_keys: Vec<AtomKey> = Vec::new();
    {
        let mut ids: HashMap<AtomKey, u32> = HashMap::new();
        for (s, m) in structures.iter().enumerate() {
            for i in 0..tables[s].count() {
                let key = atom_key(m, tables[s].content(i));
                let next = ids.len() as u32;
                let id = *ids.entry(key.clone()).or_insert_with(|| {
                    atom_keys.push(key);
                    next
                });
                types0[bases[s] + i] = id;
            }
        }
    }

    let mut stages = vec![types0];
    let mut keys = vec![StageKeys::Atoms(atom_keys)];
    let mut class_counts = vec![match &keys[0] {
        StageKeys::Atoms(a) => a.len(),
        _ => unreachable!(),
    }];

    loop {
        let prev = stages.last().unwrap();
        let mut next = vec![0u32; total];
        let mut ids: HashMap<StepKey, u32> = HashMap::new();
        let mut step_keys: Vec<StepKey> = Vec::new();
        for s in 0..structures.len() {
            for i in 0..tables[s].count() {
                let mut exts = tables[s].child_types(i, prev, bases[s]);
                exts.sort_unstable();
                exts.dedup();
                let key = StepKey {
                    prev: prev[bases[s] + i],
                    extensions: exts,
                };
                let fresh = ids.len() as u32;
                let id = *ids.entry(key.clone()).or_insert_with(|| {
                    step_keys.push(key);
                    fresh
                });
                next[bases[s] + i] = id;
            }
        }
        let n_classes = step_keys.len();
        stages.push(next);
        keys.push(StageKeys::Steps(step_keys));
        class_counts.push(n_classes);
        // the step always refines, so an equal class count means the
        // partition repeated and the hierarchy is stable
        if n_classes == class_counts[class_counts.len() - 2] {
            break;
        }
    }

    let fixpoint_stage = stages.len() - 2;
    Ok(RefinementTrace {
        max_len,
        tables,
        bases,
        total,
        stages,
        keys,
        class_counts,
        fixpoint_stage,
    })
}

impl RefinementTrace {
    pub fn max_len(&self) -> usize {
        self.max_len
    }

    /// Number of recorded stages (fixpoint stage plus two: 0..=fix+1).
    pub fn stage_count(&self) -> usize {
        self.stages.len()
    }

    /// Least α whose partition equals the one at α+1.
    pub fn fixpoint_stage(&self) -> usize {
        self.fixpoint_stage
    }

    pub fn class_count(&self, stage: usize) -> usize {
        self.class_counts[stage]
    }

    pub fn tuple_count(&self) -> usize {
        self.total
    }

    pub fn structure_count(&self) -> usize {
        self.tables.len()
    }

    /// The shared type id of a tuple at a stage, if the tuple is tracked
    /// (injective, within the refined length bound).
    pub fn type_at(&self, stage: usize, struct_idx: usize, tuple: &[usize]) -> Option<u32> {
        let as_bytes: Vec<u8> = tuple.iter().map(|&x| x as u8).collect();
        if tuple.iter().any(|&x| x > u8::MAX as usize) {
            return None;
        }
        let i = self.tables[struct_idx].index_of(&as_bytes)?;
        Some(self.stages[stage][self.bases[struct_idx] + i])
    }

    pub fn empty_tuple_type(&self, stage: usize, struct_idx: usize) -> u32 {
        self.stages[stage][self.bases[struct_idx]]
    }

    /// Fixpoint type of the empty tuple; equal ids across jointly refined
    /// structures mean the structures are back-and-forth equivalent at
    /// every recorded depth.
    pub fn fixpoint_type(&self, struct_idx: usize) -> u32 {
        self.empty_tuple_type(self.fixpoint_stage, struct_idx)
    }

    pub fn types_at_stage(&self, stage: usize) -> &[u32] {
        &self.stages[stage]
    }

    pub(crate) fn stage_keys(&self, stage: usize) -> &StageKeys {
        &self.keys[stage]
    }

    /// Check the refinement invariant: the partition at α+1 refines the
    /// one at α. Exposed for the verification campaigns.
    pub fn check_monotone(&self) -> bool {
        for stage in 0..self.stages.len() - 1 {
            let coarse = &self.stages[stage];
            let fine = &self.stages[stage + 1];
            let mut image: HashMap<u32, u32> = HashMap::new();
            for i in 0..self.total {
                match image.entry(fine[i]) {
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert(coarse[i]);
                    }
                    std::collections::hash_map::Entry::Occupied(e) => {
                        if *e.get() != coarse[i] {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{digraph, digraph_from_code, FiniteStructure, Signature};

    fn point() -> FiniteStructure {
        FiniteStructure::new(Signature::empty(), 1, vec![]).unwrap()
    }

    #[test]
    fn empty_signature_points_share_types() {
        let a = point();
        let b = point();
        let trace = joint_refine(&[&a, &b], 1).unwrap();
        assert_eq!(trace.fixpoint_stage(), 0);
        for stage in 0..trace.stage_count() {
            assert_eq!(
                trace.type_at(stage, 0, &[0]).unwrap(),
                trace.type_at(stage, 1, &[0]).unwrap()
            );
        }
    }

    #[test]
    fn two_cycle_vs_isolated_points_split_at_fixpoint() {
        let cycle = digraph(2, &[(0, 1), (1, 0)]).unwrap();
        let discrete = digraph(2, &[]).unwrap();
        let trace = joint_refine(&[&cycle, &discrete], 2).unwrap();
        assert_ne!(trace.fixpoint_type(0), trace.fixpoint_type(1));
    }

    #[test]
    fn sixty_four_digraphs_sixteen_orbits() {
        // all loop-free digraphs on 3 labeled vertices
        let graphs: Vec<FiniteStructure> = (0u64..64)
            .map(|code| {
                let mut edges = Vec::new();
                let pairs = [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)];
                for (bit, &(i, j)) in pairs.iter().enumerate() {
                    if code >> bit & 1 == 1 {
                        edges.push((i, j));
                    }
                }
                digraph(3, &edges).unwrap()
            })
            .collect();
        let refs: Vec<&FiniteStructure> = graphs.iter().collect();
        let trace = joint_refine(&refs, 3).unwrap();
        let mut fixpoint_types: Vec<u32> = (0..64).map(|s| trace.fixpoint_type(s)).collect();
        fixpoint_types.sort_unstable();
        fixpoint_types.dedup();
        assert_eq!(fixpoint_types.len(), 16);
    }

    #[test]
    fn monotone_and_bounded() {
        let m = digraph_from_code(3, 0b101_010_001);
        let n = digraph_from_code(3, 0b001_110_100);
        let trace = joint_refine(&[&m, &n], 3).unwrap();
        assert!(trace.check_monotone());
        assert!(trace.fixpoint_stage() <= trace.tuple_count());
    }

    #[test]
    fn signature_mismatch_rejected() {
        let m = digraph(2, &[]).unwrap();
        let n = FiniteStructure::new(Signature::binary("R"), 2, vec![Default::default()]).unwrap();
        assert!(matches!(
            joint_refine(&[&m, &n], 2),
            Err(crate::error::Error::SignatureMismatch(_))
        ));
    }

    #[test]
    fn max_len_clamped() {
        let m = digraph(2, &[(0, 1)]).unwrap();
        let trace = joint_refine(&[&m], 99).unwrap();
        assert_eq!(trace.max_len(), 2);
    }
}
