//! Projection of the instruction IR onto call statements only. Graph
//! topology is untouched: every block survives with the same edges, its
//! statement list reduced to calls.

use std::collections::BTreeMap;

use evm_lift::ir::{Contract, ContractIR, FunctionIR, Visibility};
use evm_lift::opcode::Opcode;

use crate::statement::{CallKind, CallStatement};

/// The filtered view of a contract, pre- or post-rename.
pub type CallContract = Contract<CallStatement>;

pub fn filter_call_statements(ir: &ContractIR) -> CallContract {
    // entry offset -> (name, visibility) of every function, for turning
    // cross-function jumps into private-call statements
    let entries: BTreeMap<u32, (&str, Visibility)> = ir
        .functions
        .iter()
        .map(|f| (f.entry_block, (f.canonical_name.as_str(), f.visibility)))
        .collect();

    let functions = ir
        .functions
        .iter()
        .map(|f| {
            let mut out = FunctionIR::<CallStatement>::new(f.canonical_name.clone(), f.visibility, f.entry_block);
            out.selector = f.selector;
            out.blocks = f
                .blocks
                .iter()
                .map(|(id, block)| {
                    let statements = block
                        .statements
                        .iter()
                        .filter_map(|inst| {
                            let offset = inst.offset;
                            let external = |kind| {
                                let mut s = CallStatement::new(offset, kind);
                                if let Some(info) = ir.call_info.get(&offset) {
                                    s.selector = info.selector;
                                    s.target_address = info.target;
                                }
                                Some(s)
                            };
                            match inst.opcode {
                                Opcode::Call => external(CallKind::Call),
                                Opcode::StaticCall => external(CallKind::StaticCall),
                                Opcode::DelegateCall => external(CallKind::DelegateCall),
                                Opcode::CallCode => external(CallKind::CallCode),
                                Opcode::Create => Some(CallStatement::new(offset, CallKind::Create)),
                                Opcode::Create2 => Some(CallStatement::new(offset, CallKind::Create2)),
                                Opcode::SelfDestruct => {
                                    Some(CallStatement::new(offset, CallKind::Selfdestruct))
                                }
                                Opcode::Jump | Opcode::JumpI => {
                                    let target = *ir.jump_targets.get(&offset)?;
                                    let (callee, vis) = entries.get(&target)?;
                                    // a jump back to this function's own
                                    // entry is a loop, and the dispatcher
                                    // reaching a public body is plumbing
                                    if target == f.entry_block {
                                        return None;
                                    }
                                    if f.visibility == Visibility::Fallback && *vis == Visibility::Public {
                                        return None;
                                    }
                                    let mut s = CallStatement::new(offset, CallKind::PrivateCall);
                                    s.callee_name = Some(callee.to_string());
                                    Some(s)
                                }
                                _ => None,
                            }
                        })
                        .collect();
                    (*id, block.retype(statements))
                })
                .collect();
            out
        })
        .collect();

    Contract {
        address: ir.address,
        runtime_bytecode: ir.runtime_bytecode.clone(),
        functions,
        opcode_counts: ir.opcode_counts.clone(),
        // both maps describe instruction-level artifacts that are now
        // absorbed into the statements themselves
        call_info: BTreeMap::new(),
        jump_targets: BTreeMap::new(),
        diagnostics: ir.diagnostics.clone(),
    }
}
