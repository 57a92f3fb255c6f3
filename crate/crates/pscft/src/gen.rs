//! Random call-graph generators for fuzzing the pruning and renaming
//! passes. Shipped in the crate (like the bytecode fixture assembler in
//! the lifter) so downstream verification suites can reuse them.

use std::collections::BTreeMap;

use evm_lift::cfg::BasicBlock;
use evm_lift::ir::{Contract, FunctionIR, Visibility};
use rand::Rng;

use crate::filter::CallContract;
use crate::statement::{CallKind, CallStatement};

/// A random single function: up to `max_blocks` blocks, each empty with
/// probability ~0.4, random symmetric edges, every block reachable from
/// the entry. Statement offsets are unique across the function.
pub fn random_call_function<R: Rng>(rng: &mut R, max_blocks: usize) -> FunctionIR<CallStatement> {
    let n = rng.random_range(1..=max_blocks);
    // non-contiguous ids exercise the re-keying pass
    let mut ids: Vec<u32> = Vec::with_capacity(n);
    let mut next = 0u32;
    for _ in 0..n {
        ids.push(next);
        next += rng.random_range(1..=3u32);
    }
    let entry = ids[0];
    let mut f = FunctionIR::new("f", Visibility::Public, entry);
    let mut offset = 0;
    for &id in &ids {
        let mut b = BasicBlock::new(id);
        if !rng.random_bool(0.4) {
            for _ in 0..rng.random_range(1..=3) {
                let kind = match rng.random_range(0..5u8) {
                    0 => CallKind::Call,
                    1 => CallKind::StaticCall,
                    2 => CallKind::DelegateCall,
                    3 => CallKind::Create,
                    _ => CallKind::Selfdestruct,
                };
                b.statements.push(CallStatement::new(offset, kind));
                offset += 1;
            }
        }
        f.blocks.insert(id, b);
    }
    // spanning edges keep everything reachable; extras add shape, and
    // self-loops are legal
    for w in 1..ids.len() {
        let from = ids[rng.random_range(0..w)];
        let to = ids[w];
        connect(&mut f, from, to);
    }
    let extra = rng.random_range(0..=ids.len());
    for _ in 0..extra {
        let from = ids[rng.random_range(0..ids.len())];
        let to = ids[rng.random_range(0..ids.len())];
        connect(&mut f, from, to);
    }
    f
}

fn connect(f: &mut FunctionIR<CallStatement>, from: u32, to: u32) {
    f.blocks.get_mut(&from).unwrap().successors.insert(to);
    f.blocks.get_mut(&to).unwrap().predecessors.insert(from);
}

/// A random filtered contract: a fallback, a few publics (some with
/// selector-hex placeholder names), and privates that the publics call.
pub fn random_call_contract<R: Rng>(rng: &mut R, max_blocks: usize) -> CallContract {
    let n_public = rng.random_range(1..=4usize);
    let n_private = rng.random_range(0..=3usize);
    let mut functions = Vec::new();

    let mut fallback = random_call_function(rng, max_blocks);
    fallback.canonical_name = "fallback".into();
    fallback.visibility = Visibility::Fallback;
    functions.push(fallback);

    let names = ["transfer", "withdraw", "attack", "execute", "claim", "sweep"];
    for i in 0..n_public {
        let mut f = random_call_function(rng, max_blocks);
        let selector_bytes: [u8; 4] = rng.random();
        f.selector = Some(evm_lift::types::Selector(selector_bytes));
        f.canonical_name = if rng.random_bool(0.7) {
            format!("{}{}", names[rng.random_range(0..names.len())], i)
        } else {
            f.selector.unwrap().to_string()
        };
        f.visibility = Visibility::Public;
        functions.push(f);
    }
    for i in 0..n_private {
        let mut f = random_call_function(rng, max_blocks);
        f.canonical_name = format!("internal_0x{:x}", 0x1000 + i * 0x40);
        f.visibility = Visibility::Private;
        functions.push(f);
    }

    // sprinkle private calls referencing real function names
    let all_names: Vec<String> = functions.iter().map(|f| f.canonical_name.clone()).collect();
    let mut offset = 10_000;
    for f in &mut functions {
        for b in f.blocks.values_mut() {
            if rng.random_bool(0.3) && !b.statements.is_empty() {
                let mut s = CallStatement::new(offset, CallKind::PrivateCall);
                offset += 1;
                s.callee_name = Some(all_names[rng.random_range(0..all_names.len())].clone());
                b.statements.push(s);
            }
        }
    }

    Contract {
        address: None,
        runtime_bytecode: Vec::new(),
        functions,
        opcode_counts: BTreeMap::new(),
        call_info: BTreeMap::new(),
        jump_targets: BTreeMap::new(),
        diagnostics: Vec::new(),
    }
}
