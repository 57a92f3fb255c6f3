use std::collections::{BTreeMap, BTreeSet};

use crate::cfg::{identify_basic_blocks, simulate_block, BasicBlock, BlockFacts, ResolvedCfg};
use crate::disasm::{disassemble, Instruction};
use crate::ir::{Diagnostic, DiagnosticKind, FunctionIR, Visibility};
use crate::opcode::Opcode;
use crate::types::Selector;

pub struct DiscoveryOutcome {
    pub functions: Vec<FunctionIR<Instruction>>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Partitions a resolved CFG into functions.
///
/// Public entries come from the dispatcher pattern (a 4-byte constant
/// compared with EQ, then a resolved conditional jump). The dispatcher's
/// default path stays in a `fallback` function rooted at the entry block.
/// Blocks reachable from two or more functions without passing another
/// entry are split out as private functions; leftover ties go to the
/// owner with the lowest entry offset.
pub fn discover_functions(cfg: ResolvedCfg) -> DiscoveryOutcome {
    let ResolvedCfg { blocks, jump_targets, facts, mut diagnostics } = cfg;
    if blocks.is_empty() {
        return DiscoveryOutcome { functions: Vec::new(), diagnostics };
    }
    let entry0 = *blocks.keys().next().expect("non-empty");

    let selectors = scan_dispatcher(&blocks, &facts, &jump_targets, entry0, &mut diagnostics);

    // entry set: fallback owns the dispatcher chain itself
    let mut entries: BTreeSet<u32> = selectors.values().copied().collect();
    entries.insert(entry0);

    // grow the entry set until no shared block is directly entered from
    // singly-owned territory
    let owners = loop {
        let owners = ownership(&blocks, &entries);
        let mut grew = false;
        for (&id, own) in &owners {
            if own.len() < 2 || entries.contains(&id) {
                continue;
            }
            let enters_from_owned = blocks[&id]
                .predecessors
                .iter()
                .any(|p| owners.get(p).map(|o| o.len() == 1) == Some(true));
            if enters_from_owned {
                entries.insert(id);
                grew = true;
            }
        }
        if !grew {
            break owners;
        }
    };

    let mut assignment: BTreeMap<u32, u32> = BTreeMap::new();
    let mut unreachable = 0usize;
    for (&id, own) in &owners {
        match own.len() {
            0 => unreachable += 1,
            1 => {
                assignment.insert(id, *own.iter().next().expect("len 1"));
            }
            // irreducible leftovers: lowest entry offset wins
            _ => {
                assignment.insert(id, *own.iter().next().expect("non-empty"));
            }
        }
    }
    if unreachable > 0 {
        diagnostics.push(Diagnostic::new(
            DiagnosticKind::UnreachableCode,
            format!("{unreachable} block(s) unreachable from any function entry"),
        ));
    }

    let selector_of: BTreeMap<u32, Selector> = selectors.iter().map(|(s, t)| (*t, *s)).collect();
    let mut functions: Vec<FunctionIR<Instruction>> = entries
        .iter()
        .map(|&entry| {
            let mut f = if entry == entry0 {
                FunctionIR::new("fallback", Visibility::Fallback, entry)
            } else if let Some(sel) = selector_of.get(&entry) {
                let mut f = FunctionIR::new(sel.to_string(), Visibility::Public, entry);
                f.selector = Some(*sel);
                f
            } else {
                // entry offset keeps placeholder names unique, so private
                // call references stay unambiguous
                FunctionIR::new(format!("internal_0x{entry:x}"), Visibility::Private, entry)
            };
            f.blocks = BTreeMap::new();
            f
        })
        .collect();
    let fn_index: BTreeMap<u32, usize> =
        functions.iter().enumerate().map(|(i, f)| (f.entry_block, i)).collect();

    let mut cross_edges = 0usize;
    for (&id, &entry) in &assignment {
        let mut block = blocks[&id].clone();
        let same_fn = |other: &u32| assignment.get(other) == Some(&entry);
        let before = block.successors.len();
        block.successors.retain(|s| same_fn(s));
        // edges into another function's entry are calls or dispatch, not
        // stray control flow; anything else crossing a boundary is noted
        cross_edges += blocks[&id]
            .successors
            .iter()
            .filter(|s| !same_fn(s) && !entries.contains(s))
            .count();
        let _ = before;
        block.predecessors.retain(|p| same_fn(p));
        functions[fn_index[&entry]].blocks.insert(id, block);
    }
    if cross_edges > 0 {
        diagnostics.push(Diagnostic::new(
            DiagnosticKind::CrossFunctionEdge,
            format!("{cross_edges} edge(s) into the middle of another function dropped"),
        ));
    }

    DiscoveryOutcome { functions, diagnostics }
}

/// Follows the dispatcher chain from the entry block collecting
/// (selector, target) pairs. Chain blocks are side-effect free; a block
/// that compares a 4-byte constant with EQ and ends in a resolved JUMPI
/// dispatches to its true branch. GT/LT comparisons on 4-byte constants
/// (binary-search dispatchers) and plain guards keep the walk going on
/// both branches.
fn scan_dispatcher(
    blocks: &BTreeMap<u32, BasicBlock<Instruction>>,
    facts: &BTreeMap<u32, BlockFacts>,
    jump_targets: &BTreeMap<u32, u32>,
    entry0: u32,
    diagnostics: &mut Vec<Diagnostic>,
) -> BTreeMap<Selector, u32> {
    let mut selectors: BTreeMap<Selector, u32> = BTreeMap::new();
    let mut claimed_targets: BTreeSet<u32> = BTreeSet::new();
    let mut visited = BTreeSet::from([entry0]);
    let mut queue = vec![entry0];

    while let Some(id) = queue.pop() {
        let block = &blocks[&id];
        if block.statements.iter().any(|i| i.opcode.has_side_effect()) {
            continue;
        }
        let last = block.statements.last().expect("non-empty block");
        let true_target = (last.opcode == Opcode::JumpI)
            .then(|| jump_targets.get(&last.offset).copied())
            .flatten();

        let mut expand: Vec<u32> = Vec::new();
        match (facts[&id].eq_selector, true_target) {
            (Some(sel_bytes), Some(target)) if target != entry0 => {
                let sel = Selector(sel_bytes);
                if let Some(&existing) = selectors.get(&sel) {
                    if existing != target {
                        diagnostics.push(Diagnostic::new(
                            DiagnosticKind::DuplicateSelector,
                            format!("selector {sel} dispatches to both {existing:#x} and {target:#x}"),
                        ));
                    }
                } else if claimed_targets.contains(&target) {
                    diagnostics.push(Diagnostic::new(
                        DiagnosticKind::DispatchAlias,
                        format!("selector {sel} aliases an already-dispatched target {target:#x}"),
                    ));
                } else {
                    selectors.insert(sel, target);
                    claimed_targets.insert(target);
                }
                // only the no-match branch continues the chain
                expand.extend(block.successors.iter().filter(|&&s| s != target));
            }
            _ => expand.extend(block.successors.iter()),
        }
        for next in expand {
            if !claimed_targets.contains(&next) && visited.insert(next) {
                queue.push(next);
            }
        }
    }
    selectors
}

/// For every entry, the set of blocks reachable without crossing another
/// entry; returns block -> owning entries.
fn ownership(
    blocks: &BTreeMap<u32, BasicBlock<Instruction>>,
    entries: &BTreeSet<u32>,
) -> BTreeMap<u32, BTreeSet<u32>> {
    let mut owners: BTreeMap<u32, BTreeSet<u32>> =
        blocks.keys().map(|&id| (id, BTreeSet::new())).collect();
    for &entry in entries {
        if !blocks.contains_key(&entry) {
            continue;
        }
        let mut stack = vec![entry];
        let mut seen = BTreeSet::from([entry]);
        while let Some(id) = stack.pop() {
            owners.get_mut(&id).expect("known block").insert(entry);
            for &next in &blocks[&id].successors {
                if !entries.contains(&next) && seen.insert(next) {
                    stack.push(next);
                }
            }
        }
    }
    owners
}

/// Extracted runtime code from a deployment blob.
pub struct CreationSplit {
    pub runtime: Vec<u8>,
    /// True when the CODECOPY/RETURN pattern matched; false means the
    /// whole blob was taken as runtime code.
    pub split: bool,
    pub diagnostics: Vec<Diagnostic>,
}

/// Static constructor split: find a CODECOPY with constant (offset, length)
/// followed by a RETURN in the same block, the shape every standard
/// compiler emits to hand back the runtime code.
pub fn split_creation_code(creation: &[u8]) -> CreationSplit {
    let blocks = identify_basic_blocks(&disassemble(creation));
    for block in blocks.values() {
        let facts = simulate_block(&block.statements);
        for (&copy_offset, &(src, len)) in &facts.codecopy_consts {
            let (Some(src), Some(len)) = (src, len) else { continue };
            let returns_after = block
                .statements
                .iter()
                .any(|i| i.offset > copy_offset && i.opcode == Opcode::Return);
            if returns_after && len > 0 && src.checked_add(len).is_some_and(|end| end <= creation.len())
            {
                return CreationSplit {
                    runtime: creation[src..src + len].to_vec(),
                    split: true,
                    diagnostics: Vec::new(),
                };
            }
        }
    }
    CreationSplit {
        runtime: creation.to_vec(),
        split: false,
        diagnostics: vec![Diagnostic::new(
            DiagnosticKind::ConstructorSplitFailed,
            "no constant CODECOPY/RETURN pattern; treating whole blob as runtime code",
        )],
    }
}
