use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::disasm::Instruction;
use crate::ir::{Diagnostic, DiagnosticKind};
use crate::opcode::Opcode;

/// A basic block. The id is the code offset of its first instruction;
/// edges reference block ids and are kept symmetric by construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasicBlock<S> {
    pub id: u32,
    pub statements: Vec<S>,
    pub predecessors: BTreeSet<u32>,
    pub successors: BTreeSet<u32>,
}

impl<S> BasicBlock<S> {
    pub fn new(id: u32) -> BasicBlock<S> {
        BasicBlock { id, statements: Vec::new(), predecessors: BTreeSet::new(), successors: BTreeSet::new() }
    }

    /// Same node and edges, different statement payload. For projection
    /// passes that rewrite statements without touching topology.
    pub fn retype<T>(&self, statements: Vec<T>) -> BasicBlock<T> {
        BasicBlock {
            id: self.id,
            statements,
            predecessors: self.predecessors.clone(),
            successors: self.successors.clone(),
        }
    }
}

/// Splits a disassembly into basic blocks: a block starts at offset zero,
/// at every JUMPDEST, and after every terminator; it ends at the first
/// terminator or just before the next JUMPDEST.
pub fn identify_basic_blocks(instructions: &[Instruction]) -> BTreeMap<u32, BasicBlock<Instruction>> {
    let mut blocks = BTreeMap::new();
    let mut current: Option<BasicBlock<Instruction>> = None;
    for instr in instructions {
        let starts_new = match &current {
            None => true,
            Some(_) => instr.opcode == Opcode::JumpDest,
        };
        if starts_new {
            if let Some(b) = current.take() {
                blocks.insert(b.id, b);
            }
            current = Some(BasicBlock::new(instr.offset));
        }
        let ends = instr.opcode.is_terminator();
        let block = current.as_mut().expect("block opened above");
        block.statements.push(instr.clone());
        if ends {
            let b = current.take().expect("block opened above");
            blocks.insert(b.id, b);
        }
    }
    if let Some(b) = current.take() {
        blocks.insert(b.id, b);
    }
    blocks
}

/// A constant value on the abstract stack, as pushed (big-endian bytes at
/// the declared push width; empty for PUSH0).
pub type Const = Vec<u8>;

/// Per-block dataflow facts from the constant-stack walk.
#[derive(Clone, Debug, Default)]
pub struct BlockFacts {
    /// Constant target on top of the stack at a terminal JUMP/JUMPI.
    pub jump_const: Option<usize>,
    /// 4-byte constant compared via EQ anywhere in the block.
    pub eq_selector: Option<[u8; 4]>,
    /// Block orders on a 4-byte constant (GT/LT), the shape of a
    /// binary-search dispatcher split node.
    pub selector_order_compare: bool,
    /// Address-slot constant observed at each call-family instruction.
    pub call_address: BTreeMap<u32, Option<[u8; 20]>>,
    /// (code offset, length) constants observed at each CODECOPY.
    pub codecopy_consts: BTreeMap<u32, (Option<usize>, Option<usize>)>,
}

fn const_to_usize(c: &Const) -> Option<usize> {
    let first = c.iter().position(|&b| b != 0).unwrap_or(c.len());
    let t = &c[first..];
    if t.len() > std::mem::size_of::<usize>() {
        return None;
    }
    Some(t.iter().fold(0usize, |v, &b| (v << 8) | b as usize))
}

fn const_to_address(c: &Const) -> Option<[u8; 20]> {
    let first = c.iter().position(|&b| b != 0).unwrap_or(c.len());
    let t = &c[first..];
    if t.len() > 20 {
        return None;
    }
    let mut a = [0u8; 20];
    a[20 - t.len()..].copy_from_slice(t);
    Some(a)
}

fn const_to_selector(c: &Const) -> Option<[u8; 4]> {
    // dispatchers push selectors at exactly four bytes
    (c.len() == 4).then(|| [c[0], c[1], c[2], c[3]])
}

/// Walks a block with a stack of optional constants. Slots below the
/// tracked depth stand for unknown values flowing in from predecessors
/// and materialize as `None` on demand.
pub fn simulate_block(statements: &[Instruction]) -> BlockFacts {
    let mut facts = BlockFacts::default();
    let mut stack: Vec<Option<Const>> = Vec::new();

    fn ensure_depth(stack: &mut Vec<Option<Const>>, n: usize) {
        while stack.len() < n {
            stack.insert(0, None);
        }
    }
    fn peek(stack: &[Option<Const>], from_top: usize) -> Option<&Const> {
        stack[stack.len() - 1 - from_top].as_ref()
    }

    for instr in statements {
        match instr.opcode {
            Opcode::Push(_) => stack.push(Some(instr.push_operand.clone().unwrap_or_default())),
            Opcode::Push0 => stack.push(Some(Vec::new())),
            Opcode::Dup(n) => {
                ensure_depth(&mut stack, n as usize);
                let v = stack[stack.len() - n as usize].clone();
                stack.push(v);
            }
            Opcode::Swap(n) => {
                ensure_depth(&mut stack, n as usize + 1);
                let top = stack.len() - 1;
                stack.swap(top, top - n as usize);
            }
            op => {
                let (pops, pushes) = op.stack_effect();
                ensure_depth(&mut stack, pops);
                match op {
                    Opcode::Eq => {
                        for slot in [0, 1] {
                            if let Some(sel) = peek(&stack, slot).and_then(|c| const_to_selector(c)) {
                                facts.eq_selector = Some(sel);
                            }
                        }
                    }
                    Opcode::Gt | Opcode::Lt => {
                        for slot in [0, 1] {
                            if peek(&stack, slot).map(|c| c.len() == 4) == Some(true) {
                                facts.selector_order_compare = true;
                            }
                        }
                    }
                    Opcode::Jump | Opcode::JumpI => {
                        facts.jump_const = peek(&stack, 0).and_then(|c| const_to_usize(c));
                    }
                    Opcode::Call | Opcode::CallCode | Opcode::DelegateCall | Opcode::StaticCall => {
                        let addr = peek(&stack, 1).and_then(|c| const_to_address(c));
                        facts.call_address.insert(instr.offset, addr);
                    }
                    Opcode::CodeCopy => {
                        let src = peek(&stack, 1).and_then(|c| const_to_usize(c));
                        let len = peek(&stack, 2).and_then(|c| const_to_usize(c));
                        facts.codecopy_consts.insert(instr.offset, (src, len));
                    }
                    _ => {}
                }
                stack.truncate(stack.len() - pops);
                stack.extend(std::iter::repeat_with(|| None).take(pushes));
            }
        }
    }
    facts
}

/// Outcome of jump resolution over a block map.
pub struct ResolvedCfg {
    pub blocks: BTreeMap<u32, BasicBlock<Instruction>>,
    /// Code offset of each resolved JUMP/JUMPI -> target block id.
    pub jump_targets: BTreeMap<u32, u32>,
    pub facts: BTreeMap<u32, BlockFacts>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Adds edges: resolved constant jump targets, JUMPI fallthroughs, and
/// plain fallthroughs into a following JUMPDEST block. Jumps whose target
/// is not a constant, or not a JUMPDEST, contribute no edge and one
/// diagnostic.
pub fn resolve_jumps(mut blocks: BTreeMap<u32, BasicBlock<Instruction>>) -> ResolvedCfg {
    let jumpdest_blocks: BTreeSet<u32> = blocks
        .values()
        .filter(|b| b.statements.first().map(|i| i.opcode) == Some(Opcode::JumpDest))
        .map(|b| b.id)
        .collect();
    let ids: Vec<u32> = blocks.keys().copied().collect();
    let next_block: BTreeMap<u32, u32> = ids.windows(2).map(|w| (w[0], w[1])).collect();

    let mut facts = BTreeMap::new();
    let mut jump_targets = BTreeMap::new();
    let mut diagnostics = Vec::new();
    let mut edges: Vec<(u32, u32)> = Vec::new();

    for block in blocks.values() {
        let f = simulate_block(&block.statements);
        let last = block.statements.last().expect("blocks are non-empty at build time");
        match last.opcode {
            Opcode::Jump | Opcode::JumpI => {
                match f.jump_const {
                    Some(target) => {
                        let tid = target as u32;
                        if jumpdest_blocks.contains(&tid) {
                            edges.push((block.id, tid));
                            jump_targets.insert(last.offset, tid);
                        } else {
                            diagnostics.push(Diagnostic::new(
                                DiagnosticKind::NonJumpdestTarget,
                                format!(
                                    "{} at {:#x} targets {:#x}, which is not a JUMPDEST",
                                    last.opcode, last.offset, target
                                ),
                            ));
                        }
                    }
                    None => diagnostics.push(Diagnostic::new(
                        DiagnosticKind::UnresolvedJump,
                        format!("{} at {:#x} has a non-constant target", last.opcode, last.offset),
                    )),
                }
                if last.opcode == Opcode::JumpI {
                    if let Some(&next) = next_block.get(&block.id) {
                        edges.push((block.id, next));
                    }
                }
            }
            op if op.is_terminator() => {}
            _ => {
                // ended by a following JUMPDEST
                if let Some(&next) = next_block.get(&block.id) {
                    edges.push((block.id, next));
                }
            }
        }
        facts.insert(block.id, f);
    }

    for (from, to) in edges {
        blocks.get_mut(&from).expect("edge source exists").successors.insert(to);
        blocks.get_mut(&to).expect("edge target exists").predecessors.insert(from);
    }

    ResolvedCfg { blocks, jump_targets, facts, diagnostics }
}
