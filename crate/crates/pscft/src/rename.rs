//! Canonical ordering and naming. After this pass the document layout is
//! fully determined: function position i and block key j directly spell
//! the BB_i_j names used in serialization.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use evm_lift::cfg::BasicBlock;
use evm_lift::ir::{FunctionIR, Visibility};

use crate::filter::CallContract;
use crate::statement::CallStatement;

/// Compares digit runs numerically, everything else byte-wise, so
/// InternalFunction_10 sorts after InternalFunction_2. Plain lexicographic
/// order would swap them on a second pass and break idempotence.
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    let (a, b) = (a.as_bytes(), b.as_bytes());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i].is_ascii_digit() && b[j].is_ascii_digit() {
            let si = i;
            while i < a.len() && a[i].is_ascii_digit() {
                i += 1;
            }
            let sj = j;
            while j < b.len() && b[j].is_ascii_digit() {
                j += 1;
            }
            // compare by magnitude: strip leading zeros, then length, then
            // bytes; equal magnitudes with different zero-padding fall back
            // to raw run length so the order stays total
            let da = trim_zeros(&a[si..i]);
            let db = trim_zeros(&b[sj..j]);
            let ord = da
                .len()
                .cmp(&db.len())
                .then_with(|| da.cmp(db))
                .then_with(|| (i - si).cmp(&(j - sj)));
            if ord != Ordering::Equal {
                return ord;
            }
        } else {
            let ord = a[i].cmp(&b[j]);
            if ord != Ordering::Equal {
                return ord;
            }
            i += 1;
            j += 1;
        }
    }
    (a.len() - i).cmp(&(b.len() - j))
}

fn trim_zeros(d: &[u8]) -> &[u8] {
    let start = d.iter().position(|&c| c != b'0').unwrap_or(d.len() - 1);
    &d[start..]
}

/// Orders functions public-first (fallback included, under its own name),
/// renames privates to InternalFunction_i, and re-keys each function's
/// blocks to 0..n in DFS preorder from the entry with children visited in
/// ascending prior id. Private-call statements are rewritten to the new
/// callee names. Running the pass twice is the identity on its output.
pub fn canonical_rename(contract: CallContract) -> CallContract {
    let mut publics: Vec<FunctionIR<CallStatement>> = Vec::new();
    let mut privates: Vec<FunctionIR<CallStatement>> = Vec::new();
    for f in contract.functions {
        match f.visibility {
            Visibility::Public | Visibility::Fallback => publics.push(f),
            Visibility::Private => privates.push(f),
        }
    }
    publics.sort_by(|a, b| {
        a.canonical_name
            .cmp(&b.canonical_name)
            .then(a.entry_block.cmp(&b.entry_block))
    });
    privates.sort_by(|a, b| {
        natural_cmp(&a.canonical_name, &b.canonical_name).then(a.entry_block.cmp(&b.entry_block))
    });

    let mut renames: BTreeMap<String, String> = BTreeMap::new();
    for (i, f) in privates.iter_mut().enumerate() {
        let new_name = format!("InternalFunction_{i}");
        if f.canonical_name != new_name {
            renames.insert(std::mem::replace(&mut f.canonical_name, new_name.clone()), new_name);
        }
    }

    let mut functions: Vec<FunctionIR<CallStatement>> = publics;
    functions.extend(privates);

    for f in &mut functions {
        rekey_blocks(f);
        for b in f.blocks.values_mut() {
            for s in &mut b.statements {
                if let Some(callee) = &s.callee_name {
                    if let Some(new_name) = renames.get(callee) {
                        s.callee_name = Some(new_name.clone());
                    }
                }
            }
        }
    }

    CallContract {
        functions,
        ..contract
    }
}

fn rekey_blocks(f: &mut FunctionIR<CallStatement>) {
    let mut order: Vec<u32> = Vec::with_capacity(f.blocks.len());
    preorder(f.entry_block, &f.blocks, &mut order);
    // pruning never disconnects a surviving block, but ingested documents
    // are not trusted: append leftovers in ascending id order
    for &id in f.blocks.keys() {
        if !order.contains(&id) {
            order.push(id);
        }
    }
    let new_id: BTreeMap<u32, u32> = order.iter().enumerate().map(|(j, &id)| (id, j as u32)).collect();
    let mut blocks: BTreeMap<u32, BasicBlock<CallStatement>> = BTreeMap::new();
    for (old, block) in std::mem::take(&mut f.blocks) {
        let mut b = block;
        b.id = new_id[&old];
        b.predecessors = b.predecessors.iter().map(|p| new_id[p]).collect();
        b.successors = b.successors.iter().map(|s| new_id[s]).collect();
        blocks.insert(new_id[&old], b);
    }
    f.blocks = blocks;
    f.entry_block = new_id[&f.entry_block];
}

fn preorder(at: u32, blocks: &BTreeMap<u32, BasicBlock<CallStatement>>, order: &mut Vec<u32>) {
    if order.contains(&at) {
        return;
    }
    order.push(at);
    for &s in &blocks[&at].successors {
        preorder(s, blocks, order);
    }
}
