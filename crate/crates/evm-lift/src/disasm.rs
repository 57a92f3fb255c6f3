use serde::{Deserialize, Serialize};

use crate::error::LiftError;
use crate::opcode::Opcode;

/// One decoded instruction. `push_operand` is populated exactly for
/// PUSH1..PUSH32 and always has the declared width.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Instruction {
    pub offset: u32,
    pub opcode: Opcode,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub push_operand: Option<Vec<u8>>,
}

impl Instruction {
    pub fn new(offset: u32, opcode: Opcode) -> Instruction {
        Instruction { offset, opcode, push_operand: None }
    }

    /// Offset of the next instruction (operand bytes included).
    pub fn end_offset(&self) -> u32 {
        self.offset + 1 + self.opcode.push_bytes() as u32
    }

    /// Push operand interpreted as an unsigned big-endian integer, if it
    /// fits in a usize. Wider constants (addresses, hashes) return None.
    pub fn push_value_usize(&self) -> Option<usize> {
        let bytes = self.push_operand.as_deref()?;
        let trimmed: &[u8] = {
            let first = bytes.iter().position(|&b| b != 0).unwrap_or(bytes.len());
            &bytes[first..]
        };
        if trimmed.len() > std::mem::size_of::<usize>() {
            return None;
        }
        let mut v = 0usize;
        for &b in trimmed {
            v = (v << 8) | b as usize;
        }
        Some(v)
    }
}

/// Linear-scan disassembly of runtime bytecode.
///
/// PUSH operand bytes are consumed as data, never decoded as opcodes. A
/// PUSH whose operand is cut off by the end of code keeps its declared
/// width, zero-padded on the right, matching common disassembler output.
pub fn disassemble(code: &[u8]) -> Vec<Instruction> {
    let mut out = Vec::new();
    let mut pc = 0usize;
    while pc < code.len() {
        let opcode = Opcode::from_byte(code[pc]);
        let width = opcode.push_bytes();
        let mut instr = Instruction::new(pc as u32, opcode);
        if width > 0 {
            let avail = code.len().min(pc + 1 + width);
            let mut operand = code[pc + 1..avail].to_vec();
            operand.resize(width, 0);
            instr.push_operand = Some(operand);
        }
        out.push(instr);
        pc += 1 + width;
    }
    out
}

/// Re-encodes instructions to bytes. Offsets are not trusted; bytes are
/// emitted in sequence order. Errors when a PUSH operand has the wrong
/// width for its opcode.
pub fn assemble(instructions: &[Instruction]) -> Result<Vec<u8>, LiftError> {
    let mut out = Vec::new();
    for instr in instructions {
        out.push(instr.opcode.byte());
        let expected = instr.opcode.push_bytes();
        let operand = instr.push_operand.as_deref().unwrap_or(&[]);
        if operand.len() != expected {
            return Err(LiftError::BadOperand {
                offset: instr.offset,
                expected,
                got: operand.len(),
            });
        }
        out.extend_from_slice(operand);
    }
    Ok(out)
}
