//! A small two-pass assembler for building bytecode fixtures in tests.
//! Labels assemble to PUSH2 constants, so fixtures stay under 64 KiB.

use std::collections::BTreeMap;

use crate::opcode::Opcode;
use crate::types::Selector;

#[derive(Clone, Debug)]
pub enum Item {
    Op(Opcode),
    /// PUSH of `bytes.len()` bytes (1..=32; empty pushes a one-byte zero).
    PushData(Vec<u8>),
    /// PUSH2 of a label's offset, resolved at assembly time.
    PushLabel(String),
    /// Marks the next byte's offset; emits nothing.
    Label(String),
    /// Verbatim bytes (e.g. an embedded runtime blob).
    Raw(Vec<u8>),
}

#[derive(Default)]
pub struct Asm {
    items: Vec<Item>,
}

impl Asm {
    pub fn new() -> Asm {
        Asm::default()
    }

    pub fn op(&mut self, op: Opcode) -> &mut Self {
        self.items.push(Item::Op(op));
        self
    }

    pub fn push(&mut self, bytes: &[u8]) -> &mut Self {
        let data = if bytes.is_empty() { vec![0] } else { bytes.to_vec() };
        assert!(data.len() <= 32, "push operand too wide");
        self.items.push(Item::PushData(data));
        self
    }

    pub fn push_usize(&mut self, v: usize) -> &mut Self {
        let bytes = v.to_be_bytes();
        let first = bytes.iter().position(|&b| b != 0).unwrap_or(bytes.len() - 1);
        self.push(&bytes[first..])
    }

    pub fn push_label(&mut self, name: &str) -> &mut Self {
        self.items.push(Item::PushLabel(name.to_string()));
        self
    }

    pub fn label(&mut self, name: &str) -> &mut Self {
        self.items.push(Item::Label(name.to_string()));
        self
    }

    /// Label followed by the JUMPDEST that makes it a valid jump target.
    pub fn jumpdest(&mut self, name: &str) -> &mut Self {
        self.label(name).op(Opcode::JumpDest)
    }

    pub fn raw(&mut self, bytes: &[u8]) -> &mut Self {
        self.items.push(Item::Raw(bytes.to_vec()));
        self
    }

    pub fn extend(&mut self, items: impl IntoIterator<Item = Item>) -> &mut Self {
        self.items.extend(items);
        self
    }

    pub fn assemble(&self) -> Vec<u8> {
        let mut offsets: BTreeMap<&str, usize> = BTreeMap::new();
        let mut pc = 0usize;
        for item in &self.items {
            match item {
                Item::Op(_) => pc += 1,
                Item::PushData(d) => pc += 1 + d.len(),
                Item::PushLabel(_) => pc += 3,
                Item::Label(name) => {
                    let clash = offsets.insert(name, pc);
                    assert!(clash.is_none(), "duplicate label {name}");
                }
                Item::Raw(bytes) => pc += bytes.len(),
            }
        }
        let mut out = Vec::with_capacity(pc);
        for item in &self.items {
            match item {
                Item::Op(op) => out.push(op.byte()),
                Item::PushData(d) => {
                    out.push(Opcode::Push(d.len() as u8).byte());
                    out.extend_from_slice(d);
                }
                Item::PushLabel(name) => {
                    let target = *offsets
                        .get(name.as_str())
                        .unwrap_or_else(|| panic!("undefined label {name}"));
                    out.push(Opcode::Push(2).byte());
                    out.extend_from_slice(&(target as u16).to_be_bytes());
                }
                Item::Label(_) => {}
                Item::Raw(bytes) => out.extend_from_slice(bytes),
            }
        }
        out
    }
}

/// One public function of a dispatcher fixture.
pub struct DispatchEntry {
    pub signature: String,
    pub body: Vec<Item>,
}

impl DispatchEntry {
    pub fn new(signature: &str, body: Vec<Item>) -> DispatchEntry {
        DispatchEntry { signature: signature.to_string(), body }
    }
}

/// Builds the standard compiled dispatcher shape: load the selector, one
/// EQ/JUMPI comparison per function, a reverting default path, then the
/// function bodies. Bodies must end in a terminator.
pub fn dispatcher_contract(entries: &[DispatchEntry]) -> Vec<u8> {
    let mut a = Asm::new();
    a.push(&[0x00]).op(Opcode::CallDataLoad).push(&[0xe0]).op(Opcode::Shr);
    for (i, e) in entries.iter().enumerate() {
        let sel = Selector::of_signature(&e.signature);
        a.op(Opcode::Dup(1))
            .push(&sel.0)
            .op(Opcode::Eq)
            .push_label(&format!("fn{i}"))
            .op(Opcode::JumpI);
    }
    a.push(&[0x00]).op(Opcode::Dup(1)).op(Opcode::Revert);
    for (i, e) in entries.iter().enumerate() {
        a.jumpdest(&format!("fn{i}"));
        a.extend(e.body.iter().cloned());
    }
    a.assemble()
}

/// Dispatcher fixture with plain opcode bodies; returns the code and the
/// selectors in declaration order.
pub fn dispatcher_fixture(fns: &[(&str, Vec<Opcode>)]) -> (Vec<u8>, Vec<Selector>) {
    let entries: Vec<DispatchEntry> = fns
        .iter()
        .map(|(sig, ops)| DispatchEntry::new(sig, ops.iter().map(|&o| Item::Op(o)).collect()))
        .collect();
    let selectors = fns.iter().map(|(sig, _)| Selector::of_signature(sig)).collect();
    (dispatcher_contract(&entries), selectors)
}

/// Two public functions that tail-jump into one shared subroutine block:
/// the canonical shape for private-function extraction.
pub fn shared_subroutine_fixture() -> Vec<u8> {
    let mut a = Asm::new();
    a.push(&[0x00]).op(Opcode::CallDataLoad).push(&[0xe0]).op(Opcode::Shr);
    for (i, sig) in ["alpha()", "beta()"].iter().enumerate() {
        let sel = Selector::of_signature(sig);
        a.op(Opcode::Dup(1))
            .push(&sel.0)
            .op(Opcode::Eq)
            .push_label(&format!("fn{i}"))
            .op(Opcode::JumpI);
    }
    a.push(&[0x00]).op(Opcode::Dup(1)).op(Opcode::Revert);
    a.jumpdest("fn0").push(&[0x01]).push_label("shared").op(Opcode::Jump);
    a.jumpdest("fn1").push(&[0x02]).push_label("shared").op(Opcode::Jump);
    a.jumpdest("shared").op(Opcode::Pop).op(Opcode::Stop);
    a.assemble()
}

/// Deployment blob: a constructor that CODECOPYs the runtime section and
/// returns it.
pub fn creation_fixture(runtime: &[u8]) -> Vec<u8> {
    let mut a = Asm::new();
    a.push_usize(runtime.len())
        .op(Opcode::Dup(1))
        .push_label("runtime")
        .push(&[0x00])
        .op(Opcode::CodeCopy)
        .push(&[0x00])
        .op(Opcode::Return)
        .label("runtime")
        .raw(runtime);
    a.assemble()
}

const BODY_OPS: &[Opcode] = &[
    Opcode::Add,
    Opcode::Mul,
    Opcode::Sub,
    Opcode::Div,
    Opcode::Lt,
    Opcode::Gt,
    Opcode::Eq,
    Opcode::IsZero,
    Opcode::And,
    Opcode::Or,
    Opcode::Xor,
    Opcode::Not,
    Opcode::Shr,
    Opcode::Shl,
    Opcode::Pop,
    Opcode::MLoad,
    Opcode::MStore,
    Opcode::SLoad,
    Opcode::SStore,
    Opcode::Caller,
    Opcode::CallValue,
    Opcode::CallDataLoad,
    Opcode::CallDataSize,
    Opcode::Address,
    Opcode::Balance,
    Opcode::Timestamp,
    Opcode::Number,
    Opcode::Gas,
    Opcode::Keccak256,
];

/// Generates a well-formed program: labeled regions filled with a random
/// mix of plain ops, full-width PUSHes, DUP/SWAP, and occasional undefined
/// bytes, stitched together by jumps that always land on JUMPDESTs. Every
/// PUSH carries its complete operand, so disassembly is exact.
pub fn random_program<R: rand::Rng>(rng: &mut R) -> Vec<u8> {
    let n_regions = rng.random_range(1..=12usize);
    let mut a = Asm::new();
    // region 0 is the fallthrough entry; a coin toss decides whether it is
    // also a jump target
    let mut targets: Vec<String> = Vec::new();
    for i in 0..n_regions {
        let name = format!("r{i}");
        if i == 0 && !rng.random_bool(0.5) {
            a.label(&name);
        } else {
            a.jumpdest(&name);
            targets.push(name);
        }
        for _ in 0..rng.random_range(0..10usize) {
            match rng.random_range(0..10u8) {
                0..=4 => {
                    a.op(BODY_OPS[rng.random_range(0..BODY_OPS.len())]);
                }
                5..=7 => {
                    let mut data = vec![0u8; rng.random_range(1..=32usize)];
                    rng.fill(&mut data[..]);
                    a.push(&data);
                }
                8 => {
                    a.op(Opcode::Dup(rng.random_range(1..=16u8)));
                }
                _ => {
                    a.op(Opcode::Swap(rng.random_range(1..=16u8)));
                }
            }
        }
        let last = i + 1 == n_regions;
        match rng.random_range(0..8u8) {
            0 | 1 if !targets.is_empty() => {
                let dest = &targets[rng.random_range(0..targets.len())];
                let dest = dest.clone();
                a.push_label(&dest).op(Opcode::Jump);
            }
            2 | 3 if !targets.is_empty() && !last => {
                let dest = targets[rng.random_range(0..targets.len())].clone();
                a.push(&[rng.random_range(0..=1u8)]).push_label(&dest).op(Opcode::JumpI);
            }
            4 => {
                a.op(Opcode::Stop);
            }
            5 => {
                a.push(&[0]).push(&[0]).op(Opcode::Return);
            }
            6 => {
                a.push(&[0]).push(&[0]).op(Opcode::Revert);
            }
            _ => {
                // fall through, or halt if nothing follows
                if last && rng.random_bool(0.5) {
                    a.raw(&[0x0c]); // undefined byte, halts like INVALID
                }
            }
        }
    }
    a.assemble()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disasm::disassemble;

    #[test]
    fn labels_resolve_forward_and_backward() {
        let mut a = Asm::new();
        a.jumpdest("start").push_label("end").op(Opcode::Jump).jumpdest("end").op(Opcode::Stop);
        let code = a.assemble();
        let instrs = disassemble(&code);
        // JUMPDEST PUSH2 end JUMP JUMPDEST STOP -> end offset = 5
        assert_eq!(instrs[1].push_value_usize(), Some(5));
    }

    #[test]
    fn dispatcher_shape_has_expected_selector_bytes() {
        let (code, selectors) = dispatcher_fixture(&[("transfer(address,uint256)", vec![Opcode::Stop])]);
        let hex = hex::encode(&code);
        assert!(hex.contains(&hex::encode(selectors[0].0)));
    }
}
