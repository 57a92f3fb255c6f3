//! Line-oriented interchange format for lifted IRs.
//!
//! A decompiler with full dataflow (dynamic jump resolution, precise call
//! arguments) can emit this format and every downstream stage works from
//! it exactly as from natively lifted code.
//!
//! ```text
//! contract 0x<40 hex>                          (optional, once, first)
//! function <name> <public|private|fallback> [selector=0x<8 hex>]
//! block 0x<id> preds=0x<id>,... succs=0x<id>,...
//!   0x<offset>: <MNEMONIC> [operand=0x..] [dest=0x<block>] [selector=0x..] [target=0x<40 hex>]
//!   0x<offset>: CALLPRIVATE <function-name>
//! ```
//!
//! The first block of a function is its entry. Edge lists must be
//! symmetric and reference declared blocks. `CALLPRIVATE` is sugar for a
//! JUMP whose resolved target is the named function's entry block.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::cfg::BasicBlock;
use crate::disasm::Instruction;
use crate::error::LiftError;
use crate::ir::{CallConstants, Contract, ContractIR, FunctionIR, Visibility};
use crate::opcode::Opcode;
use crate::types::Address;

pub fn serialize_ir(ir: &ContractIR) -> String {
    let entry_names: BTreeMap<u32, &str> =
        ir.functions.iter().map(|f| (f.entry_block, f.canonical_name.as_str())).collect();
    let mut out = String::new();
    if let Some(addr) = &ir.address {
        let _ = writeln!(out, "contract {addr}");
    }
    for f in &ir.functions {
        let vis = match f.visibility {
            Visibility::Public => "public",
            Visibility::Private => "private",
            Visibility::Fallback => "fallback",
        };
        let _ = write!(out, "function {} {vis}", f.canonical_name);
        if let Some(sel) = &f.selector {
            let _ = write!(out, " selector={sel}");
        }
        out.push('\n');
        let block_order = std::iter::once(f.entry_block)
            .chain(f.blocks.keys().copied().filter(|&id| id != f.entry_block));
        for id in block_order {
            let Some(block) = f.blocks.get(&id) else { continue };
            let fmt_ids = |ids: &std::collections::BTreeSet<u32>| {
                ids.iter().map(|i| format!("{i:#x}")).collect::<Vec<_>>().join(",")
            };
            let _ = writeln!(
                out,
                "block {id:#x} preds={} succs={}",
                fmt_ids(&block.predecessors),
                fmt_ids(&block.successors)
            );
            for instr in &block.statements {
                serialize_statement(&mut out, instr, ir, &entry_names);
            }
        }
    }
    out
}

fn serialize_statement(
    out: &mut String,
    instr: &Instruction,
    ir: &ContractIR,
    entry_names: &BTreeMap<u32, &str>,
) {
    let _ = write!(out, "  {:#x}: ", instr.offset);
    let jump_target = ir.jump_targets.get(&instr.offset);
    if instr.opcode == Opcode::Jump {
        if let Some(name) = jump_target.and_then(|t| entry_names.get(t)) {
            let _ = writeln!(out, "CALLPRIVATE {name}");
            return;
        }
    }
    let _ = write!(out, "{}", instr.opcode.mnemonic());
    if let Some(operand) = &instr.push_operand {
        let _ = write!(out, " operand=0x{}", hex::encode(operand));
    }
    if matches!(instr.opcode, Opcode::Jump | Opcode::JumpI) {
        if let Some(t) = jump_target {
            let _ = write!(out, " dest={t:#x}");
        }
    }
    if let Some(info) = ir.call_info.get(&instr.offset) {
        if let Some(sel) = &info.selector {
            let _ = write!(out, " selector={sel}");
        }
        if let Some(addr) = &info.target {
            let _ = write!(out, " target={addr}");
        }
    }
    out.push('\n');
}

struct Parser<'a> {
    lines: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
}

/// Parses an external IR document into a `ContractIR`. Downstream stages
/// cannot tell it apart from natively lifted code except for the empty
/// `runtime_bytecode`.
pub fn ingest_external_ir(doc: &str) -> Result<ContractIR, LiftError> {
    let mut p = Parser { lines: doc.lines().enumerate().peekable() };

    let mut address: Option<Address> = None;
    let mut functions: Vec<FunctionIR<Instruction>> = Vec::new();
    // (line, col, block id owning fn index, raw callee) until names resolve
    let mut private_calls: Vec<(usize, usize, u32, String)> = Vec::new();
    let mut jump_targets: BTreeMap<u32, u32> = BTreeMap::new();
    let mut call_info: BTreeMap<u32, CallConstants> = BTreeMap::new();

    while let Some((n, raw)) = p.lines.next() {
        let line = raw.trim_end();
        let trimmed = line.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let indented = line.len() != trimmed.len();
        let mut words = trimmed.split_whitespace();
        let head = words.next().expect("non-empty");
        match head {
            "contract" if !indented => {
                let v = words.next().ok_or_else(|| LiftError::parse(n + 1, 1, "missing address"))?;
                address =
                    Some(v.parse().map_err(|_| LiftError::parse(n + 1, 10, "bad address"))?);
            }
            "function" if !indented => {
                let name = words
                    .next()
                    .ok_or_else(|| LiftError::parse(n + 1, 10, "missing function name"))?;
                let vis = match words.next() {
                    Some("public") => Visibility::Public,
                    Some("private") => Visibility::Private,
                    Some("fallback") => Visibility::Fallback,
                    other => {
                        return Err(LiftError::parse(
                            n + 1,
                            10 + name.len(),
                            format!("expected visibility, got {:?}", other.unwrap_or("")),
                        ))
                    }
                };
                let mut f = FunctionIR::new(name, vis, u32::MAX);
                for attr in words {
                    if let Some(v) = attr.strip_prefix("selector=") {
                        f.selector = Some(
                            v.parse()
                                .map_err(|_| LiftError::parse(n + 1, 1, "bad selector attr"))?,
                        );
                    } else {
                        return Err(LiftError::parse(n + 1, 1, format!("unknown attribute {attr}")));
                    }
                }
                functions.push(f);
            }
            "block" if !indented => {
                let f = functions
                    .last_mut()
                    .ok_or_else(|| LiftError::parse(n + 1, 1, "block before any function"))?;
                let id = parse_u32(words.next(), n)?;
                let mut block: BasicBlock<Instruction> = BasicBlock::new(id);
                for attr in words {
                    if let Some(v) = attr.strip_prefix("preds=") {
                        block.predecessors = parse_id_list(v, n)?;
                    } else if let Some(v) = attr.strip_prefix("succs=") {
                        block.successors = parse_id_list(v, n)?;
                    } else {
                        return Err(LiftError::parse(n + 1, 1, format!("unknown attribute {attr}")));
                    }
                }
                if f.entry_block == u32::MAX {
                    f.entry_block = id;
                }
                if f.blocks.insert(id, block).is_some() {
                    return Err(LiftError::parse(n + 1, 7, format!("duplicate block {id:#x}")));
                }
            }
            _ if indented => {
                let f = functions
                    .last_mut()
                    .ok_or_else(|| LiftError::parse(n + 1, 1, "statement before any function"))?;
                let (&block_id, _) = f
                    .blocks
                    .iter()
                    .next_back()
                    .ok_or_else(|| LiftError::parse(n + 1, 1, "statement before any block"))?;
                let col = line.len() - trimmed.len() + 1;
                let offset_tok = head
                    .strip_suffix(':')
                    .ok_or_else(|| LiftError::parse(n + 1, col, "expected `<offset>:`"))?;
                let offset = parse_u32(Some(offset_tok), n)?;
                let mnemonic = words
                    .next()
                    .ok_or_else(|| LiftError::parse(n + 1, col, "missing mnemonic"))?;

                let instr = if mnemonic == "CALLPRIVATE" {
                    let callee = words
                        .next()
                        .ok_or_else(|| LiftError::parse(n + 1, col, "CALLPRIVATE needs a callee"))?;
                    private_calls.push((n + 1, col, offset, callee.to_string()));
                    Instruction::new(offset, Opcode::Jump)
                } else {
                    let opcode = Opcode::from_mnemonic(mnemonic).ok_or_else(|| {
                        LiftError::parse(n + 1, col, format!("unknown mnemonic {mnemonic}"))
                    })?;
                    let mut instr = Instruction::new(offset, opcode);
                    let mut info = CallConstants::default();
                    for attr in words {
                        let (key, value) = attr
                            .split_once('=')
                            .ok_or_else(|| LiftError::parse(n + 1, col, "attributes are key=value"))?;
                        match key {
                            "operand" => {
                                let h = value.strip_prefix("0x").unwrap_or(value);
                                let bytes = hex::decode(h).map_err(|_| {
                                    LiftError::parse(n + 1, col, "bad operand hex")
                                })?;
                                if bytes.len() != opcode.push_bytes() {
                                    return Err(LiftError::parse(
                                        n + 1,
                                        col,
                                        format!("operand width {} != {}", bytes.len(), opcode.push_bytes()),
                                    ));
                                }
                                instr.push_operand = Some(bytes);
                            }
                            "dest" => {
                                jump_targets.insert(offset, parse_u32(Some(value), n)?);
                            }
                            "selector" => {
                                info.selector = Some(value.parse().map_err(|_| {
                                    LiftError::parse(n + 1, col, "bad selector attr")
                                })?);
                            }
                            "target" => {
                                info.target = Some(value.parse().map_err(|_| {
                                    LiftError::parse(n + 1, col, "bad target attr")
                                })?);
                            }
                            other => {
                                return Err(LiftError::parse(
                                    n + 1,
                                    col,
                                    format!("unknown attribute {other}"),
                                ))
                            }
                        }
                    }
                    if info != CallConstants::default() {
                        call_info.insert(offset, info);
                    }
                    if opcode.push_bytes() > 0 && instr.push_operand.is_none() {
                        instr.push_operand = Some(vec![0; opcode.push_bytes()]);
                    }
                    instr
                };
                f.blocks.get_mut(&block_id).expect("current block").statements.push(instr);
            }
            other => {
                return Err(LiftError::parse(n + 1, 1, format!("unexpected directive {other}")));
            }
        }
    }

    for f in &functions {
        if f.blocks.is_empty() {
            return Err(LiftError::parse(0, 0, format!("function {} has no blocks", f.canonical_name)));
        }
    }

    // resolve CALLPRIVATE callees to entry blocks; names must be unique or
    // the references are ambiguous
    let mut entry_of: BTreeMap<&str, u32> = BTreeMap::new();
    for f in &functions {
        if entry_of.insert(f.canonical_name.as_str(), f.entry_block).is_some() {
            return Err(LiftError::parse(
                0,
                0,
                format!("duplicate function name {}", f.canonical_name),
            ));
        }
    }
    for (line, col, offset, callee) in private_calls {
        let entry = entry_of.get(callee.as_str()).ok_or_else(|| {
            LiftError::parse(line, col, format!("CALLPRIVATE to undefined function {callee}"))
        })?;
        jump_targets.insert(offset, *entry);
    }

    validate_edges(&functions)?;

    let mut opcode_counts: BTreeMap<String, u64> = BTreeMap::new();
    for f in &functions {
        for b in f.blocks.values() {
            for instr in &b.statements {
                *opcode_counts.entry(instr.opcode.mnemonic()).or_insert(0) += 1;
            }
        }
    }

    Ok(Contract {
        address,
        runtime_bytecode: Vec::new(),
        functions,
        opcode_counts,
        call_info,
        jump_targets,
        diagnostics: Vec::new(),
    })
}

fn validate_edges(functions: &[FunctionIR<Instruction>]) -> Result<(), LiftError> {
    for f in functions {
        for (id, block) in &f.blocks {
            for s in &block.successors {
                let peer = f.blocks.get(s).ok_or_else(|| {
                    LiftError::parse(0, 0, format!("block {id:#x} lists undeclared successor {s:#x}"))
                })?;
                if !peer.predecessors.contains(id) {
                    return Err(LiftError::parse(
                        0,
                        0,
                        format!("edge {id:#x}->{s:#x} not mirrored in preds"),
                    ));
                }
            }
            for p in &block.predecessors {
                let peer = f.blocks.get(p).ok_or_else(|| {
                    LiftError::parse(0, 0, format!("block {id:#x} lists undeclared predecessor {p:#x}"))
                })?;
                if !peer.successors.contains(id) {
                    return Err(LiftError::parse(
                        0,
                        0,
                        format!("edge {p:#x}->{id:#x} not mirrored in succs"),
                    ));
                }
            }
        }
    }
    Ok(())
}

fn parse_u32(tok: Option<&str>, line0: usize) -> Result<u32, LiftError> {
    let tok = tok.ok_or_else(|| LiftError::parse(line0 + 1, 1, "missing id"))?;
    let parsed = match tok.strip_prefix("0x") {
        Some(h) => u32::from_str_radix(h, 16),
        None => tok.parse(),
    };
    parsed.map_err(|_| LiftError::parse(line0 + 1, 1, format!("bad number {tok}")))
}

fn parse_id_list(v: &str, line0: usize) -> Result<std::collections::BTreeSet<u32>, LiftError> {
    let mut out = std::collections::BTreeSet::new();
    if v.is_empty() {
        return Ok(out);
    }
    for part in v.split(',') {
        out.insert(parse_u32(Some(part), line0)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::lift;

    #[test]
    fn minimal_document() {
        let doc = "\
function main fallback
block 0x0 preds= succs=
  0x0: CALLPRIVATE helper
function helper private
block 0x10 preds= succs=
  0x10: STOP
";
        let ir = ingest_external_ir(doc).unwrap();
        assert_eq!(ir.functions.len(), 2);
        assert_eq!(ir.jump_targets.get(&0), Some(&0x10));
        assert_eq!(ir.opcode_counts["JUMP"], 1);
        assert_eq!(ir.opcode_counts["STOP"], 1);
    }

    #[test]
    fn malformed_line_reports_position() {
        let doc = "function main fallback\nblock 0x0 preds= succs=\n  0x0 STOP\n";
        let err = ingest_external_ir(doc).unwrap_err();
        match err {
            LiftError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("wrong error {other}"),
        }
    }

    #[test]
    fn asymmetric_edges_rejected() {
        let doc = "\
function main fallback
block 0x0 preds= succs=0x5
block 0x5 preds= succs=
  0x5: STOP
";
        let err = ingest_external_ir(doc).unwrap_err();
        assert!(err.to_string().contains("not mirrored"));
    }

    #[test]
    fn undeclared_successor_rejected() {
        let doc = "function main fallback\nblock 0x0 preds= succs=0x99\n  0x0: STOP\n";
        assert!(ingest_external_ir(doc).is_err());
    }

    #[test]
    fn serialize_ingest_round_trip_on_lifted_contract() {
        let (code, _) = crate::asm::dispatcher_fixture(&[
            ("transfer(address,uint256)", vec![Opcode::Stop]),
            ("approve(address,uint256)", vec![Opcode::Stop]),
        ]);
        let ir = lift(&code, None);
        let doc = serialize_ir(&ir);
        let once = serialize_ir(&ingest_external_ir(&doc).unwrap());
        let twice = serialize_ir(&ingest_external_ir(&once).unwrap());
        assert_eq!(once, twice);
    }
}
