//! Lifts EVM runtime bytecode into a compact control-flow IR: linear
//! disassembly, basic blocks keyed by entry offset, constant-jump
//! resolution, and dispatcher-pattern function discovery. An equivalent IR
//! can also be ingested from a text document produced by an external
//! decompiler (see [`external_ir`]).

pub mod asm;
pub mod cfg;
pub mod disasm;
pub mod error;
pub mod external_ir;
pub mod functions;
pub mod invariants;
pub mod ir;
pub mod keccak;
pub mod opcode;
pub mod types;

pub use cfg::{identify_basic_blocks, resolve_jumps, BasicBlock};
pub use disasm::{assemble, disassemble, Instruction};
pub use error::LiftError;
pub use external_ir::{ingest_external_ir, serialize_ir};
pub use functions::{discover_functions, split_creation_code, CreationSplit};
pub use ir::{
    count_opcode, lift, CallConstants, Contract, ContractIR, Diagnostic, DiagnosticKind,
    FunctionIR, Visibility,
};
pub use keccak::{keccak256, selector_of};
pub use opcode::Opcode;
pub use types::{parse_bytecode, Address, Selector};
