//! Structural well-formedness checks for lifted output.
//!
//! These are verification predicates, not assertions: they return a
//! description of the first violation so fuzz harnesses can report the
//! offending program. Production code never calls them.

use crate::cfg::ResolvedCfg;
use crate::disasm::Instruction;
use crate::ir::ContractIR;
use crate::opcode::Opcode;

/// Checks that the resolved CFG tiles the instruction stream exactly:
/// blocks are non-empty, contiguous, cover every instruction once, start
/// at their id, keep terminators in final position, and carry symmetric
/// edges whose endpoints all exist. Jump targets must be JUMPDEST blocks.
pub fn check_cfg(instructions: &[Instruction], cfg: &ResolvedCfg) -> Result<(), String> {
    let mut covered: Vec<u32> = Vec::with_capacity(instructions.len());
    for (id, block) in &cfg.blocks {
        let first = block
            .statements
            .first()
            .ok_or_else(|| format!("block 0x{id:x} is empty"))?;
        if first.offset != *id {
            return Err(format!(
                "block 0x{id:x} starts at 0x{:x}, not its id",
                first.offset
            ));
        }
        for (i, inst) in block.statements.iter().enumerate() {
            if inst.opcode.is_terminator() && i + 1 != block.statements.len() {
                return Err(format!(
                    "terminator {} mid-block at 0x{:x}",
                    inst.opcode.mnemonic(),
                    inst.offset
                ));
            }
            covered.push(inst.offset);
        }
    }
    let stream: Vec<u32> = instructions.iter().map(|i| i.offset).collect();
    if covered != stream {
        return Err(format!(
            "blocks cover {} offsets, stream has {}",
            covered.len(),
            stream.len()
        ));
    }

    for (id, block) in &cfg.blocks {
        for succ in &block.successors {
            let other = cfg
                .blocks
                .get(succ)
                .ok_or_else(|| format!("edge 0x{id:x} -> 0x{succ:x} dangles"))?;
            if !other.predecessors.contains(id) {
                return Err(format!("edge 0x{id:x} -> 0x{succ:x} not mirrored"));
            }
        }
        for pred in &block.predecessors {
            let other = cfg
                .blocks
                .get(pred)
                .ok_or_else(|| format!("pred 0x{pred:x} of 0x{id:x} dangles"))?;
            if !other.successors.contains(id) {
                return Err(format!("pred edge 0x{pred:x} -> 0x{id:x} not mirrored"));
            }
        }
    }

    for (site, target) in &cfg.jump_targets {
        let block = cfg
            .blocks
            .get(target)
            .ok_or_else(|| format!("jump at 0x{site:x} targets missing block 0x{target:x}"))?;
        if block.statements[0].opcode != Opcode::JumpDest {
            return Err(format!(
                "jump at 0x{site:x} targets non-JUMPDEST block 0x{target:x}"
            ));
        }
    }
    Ok(())
}

/// Checks the function-partition invariants on a lifted contract: block ids
/// and statement offsets are owned by exactly one function, entries exist,
/// intra-function edges are symmetric with endpoints inside the function,
/// and recovered call constants point at real statements.
pub fn check_contract(ir: &ContractIR) -> Result<(), String> {
    let mut seen_blocks = std::collections::BTreeSet::new();
    let mut seen_offsets = std::collections::BTreeSet::new();
    for func in &ir.functions {
        if !func.blocks.contains_key(&func.entry_block) {
            return Err(format!(
                "{}: entry 0x{:x} not among its blocks",
                func.canonical_name, func.entry_block
            ));
        }
        for (id, block) in &func.blocks {
            if !seen_blocks.insert(*id) {
                return Err(format!("block 0x{id:x} owned by two functions"));
            }
            let first = block
                .statements
                .first()
                .ok_or_else(|| format!("{}: block 0x{id:x} empty", func.canonical_name))?;
            if first.offset != *id {
                return Err(format!("block 0x{id:x} id/offset mismatch"));
            }
            let mut prev = None;
            for inst in &block.statements {
                if !seen_offsets.insert(inst.offset) {
                    return Err(format!("offset 0x{:x} owned twice", inst.offset));
                }
                if let Some(p) = prev {
                    if inst.offset <= p {
                        return Err(format!("offsets not ascending in block 0x{id:x}"));
                    }
                }
                prev = Some(inst.offset);
            }
            for succ in &block.successors {
                let other = func.blocks.get(succ).ok_or_else(|| {
                    format!(
                        "{}: edge 0x{id:x} -> 0x{succ:x} leaves the function",
                        func.canonical_name
                    )
                })?;
                if !other.predecessors.contains(id) {
                    return Err(format!("edge 0x{id:x} -> 0x{succ:x} not mirrored"));
                }
            }
            for pred in &block.predecessors {
                let other = func.blocks.get(pred).ok_or_else(|| {
                    format!(
                        "{}: pred 0x{pred:x} of 0x{id:x} outside the function",
                        func.canonical_name
                    )
                })?;
                if !other.successors.contains(id) {
                    return Err(format!("pred edge 0x{pred:x} -> 0x{id:x} not mirrored"));
                }
            }
        }
    }
    for site in ir.call_info.keys() {
        if !seen_offsets.contains(site) {
            return Err(format!("call info at 0x{site:x} has no statement"));
        }
    }
    Ok(())
}
