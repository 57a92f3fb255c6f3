use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cfg::{identify_basic_blocks, resolve_jumps, BasicBlock};
use crate::disasm::{disassemble, Instruction};
use crate::functions::discover_functions;
use crate::opcode::Opcode;
use crate::types::{Address, Selector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    UnresolvedJump,
    NonJumpdestTarget,
    ConstructorSplitFailed,
    DuplicateSelector,
    DispatchAlias,
    CrossFunctionEdge,
    UnreachableCode,
    SignatureMismatch,
    ProviderDegraded,
    ParseRecovered,
}

/// A non-fatal analysis finding, carried alongside results instead of
/// being logged, so replayed runs stay deterministic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
}

impl Diagnostic {
    pub fn new(kind: DiagnosticKind, message: impl Into<String>) -> Diagnostic {
        Diagnostic { kind, message: message.into() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Visibility {
    Public,
    Private,
    Fallback,
}

/// One function: an entry block plus the blocks it owns. Block edges are
/// intra-function; control transfers to other functions are recorded in
/// `Contract::jump_targets` and surface later as call statements.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionIR<S> {
    pub canonical_name: String,
    pub visibility: Visibility,
    pub selector: Option<Selector>,
    pub entry_block: u32,
    pub blocks: BTreeMap<u32, BasicBlock<S>>,
}

impl<S> FunctionIR<S> {
    pub fn new(name: impl Into<String>, visibility: Visibility, entry: u32) -> FunctionIR<S> {
        FunctionIR {
            canonical_name: name.into(),
            visibility,
            selector: None,
            entry_block: entry,
            blocks: BTreeMap::new(),
        }
    }
}

/// Constants recovered for an external call site.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CallConstants {
    pub selector: Option<Selector>,
    pub target: Option<Address>,
}

mod hex_vec {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("0x{}", hex::encode(v)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let raw = String::deserialize(d)?;
        hex::decode(raw.strip_prefix("0x").unwrap_or(&raw)).map_err(serde::de::Error::custom)
    }
}

/// The lifted view of one contract, generic over the statement type:
/// `Instruction` after lifting, a call statement after filtering.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contract<S> {
    pub address: Option<Address>,
    #[serde(with = "hex_vec")]
    pub runtime_bytecode: Vec<u8>,
    pub functions: Vec<FunctionIR<S>>,
    /// Static instruction counts keyed by mnemonic, PUSH operands excluded.
    pub opcode_counts: BTreeMap<String, u64>,
    /// Recovered constants per external call site offset.
    pub call_info: BTreeMap<u32, CallConstants>,
    /// Resolved JUMP/JUMPI instruction offset -> target block id.
    pub jump_targets: BTreeMap<u32, u32>,
    pub diagnostics: Vec<Diagnostic>,
}

pub type ContractIR = Contract<Instruction>;

impl<S> Contract<S> {
    pub fn function_by_entry(&self, entry: u32) -> Option<&FunctionIR<S>> {
        self.functions.iter().find(|f| f.entry_block == entry)
    }

    /// Map of function entry block -> index in `functions`.
    pub fn entry_index(&self) -> BTreeMap<u32, usize> {
        self.functions.iter().enumerate().map(|(i, f)| (f.entry_block, i)).collect()
    }
}

/// Static occurrence count of one opcode in the full disassembly,
/// unreachable code included, PUSH operand bytes excluded.
pub fn count_opcode<S>(ir: &Contract<S>, opcode: Opcode) -> u64 {
    ir.opcode_counts.get(&opcode.mnemonic()).copied().unwrap_or(0)
}

/// Lifts runtime bytecode to a `ContractIR`: disassembly, basic blocks,
/// constant-jump resolution, and dispatcher-based function discovery.
pub fn lift(runtime_bytecode: &[u8], address: Option<Address>) -> ContractIR {
    let instructions = disassemble(runtime_bytecode);

    let mut opcode_counts: BTreeMap<String, u64> = BTreeMap::new();
    for instr in &instructions {
        *opcode_counts.entry(instr.opcode.mnemonic()).or_insert(0) += 1;
    }

    let cfg = resolve_jumps(identify_basic_blocks(&instructions));
    let mut diagnostics = cfg.diagnostics.clone();
    let jump_targets = cfg.jump_targets.clone();
    let discovery = discover_functions(cfg);
    diagnostics.extend(discovery.diagnostics);

    let call_info = recover_call_constants(&instructions, &discovery.functions);

    Contract {
        address,
        runtime_bytecode: runtime_bytecode.to_vec(),
        functions: discovery.functions,
        opcode_counts,
        call_info,
        jump_targets,
        diagnostics,
    }
}

/// For every external call site inside a function, recover the selector
/// (nearest preceding PUSH4 in the same function) and the callee address
/// (constant-stack slot at the call, else nearest preceding PUSH20).
fn recover_call_constants(
    instructions: &[Instruction],
    functions: &[FunctionIR<Instruction>],
) -> BTreeMap<u32, CallConstants> {
    let mut owner: BTreeMap<u32, usize> = BTreeMap::new();
    let mut block_addr_facts: BTreeMap<u32, Option<[u8; 20]>> = BTreeMap::new();
    for (fi, f) in functions.iter().enumerate() {
        for block in f.blocks.values() {
            for instr in &block.statements {
                owner.insert(instr.offset, fi);
            }
            let facts = crate::cfg::simulate_block(&block.statements);
            block_addr_facts.extend(facts.call_address);
        }
    }

    let mut out = BTreeMap::new();
    for (idx, instr) in instructions.iter().enumerate() {
        if !matches!(
            instr.opcode,
            Opcode::Call | Opcode::CallCode | Opcode::DelegateCall | Opcode::StaticCall
        ) {
            continue;
        }
        let Some(&fi) = owner.get(&instr.offset) else { continue };

        let scan = |width: u8| -> Option<Vec<u8>> {
            instructions[..idx]
                .iter()
                .rev()
                .filter(|p| owner.get(&p.offset) == Some(&fi))
                .find(|p| p.opcode == Opcode::Push(width))
                .and_then(|p| p.push_operand.clone())
        };

        let selector = scan(4).map(|b| Selector([b[0], b[1], b[2], b[3]]));
        let target = block_addr_facts
            .get(&instr.offset)
            .copied()
            .flatten()
            .or_else(|| scan(20).map(|b| <[u8; 20]>::try_from(b.as_slice()).expect("PUSH20 width")))
            .map(Address);

        out.insert(instr.offset, CallConstants { selector, target });
    }
    out
}
