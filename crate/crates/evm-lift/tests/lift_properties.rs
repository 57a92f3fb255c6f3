//! Fuzzed structural properties of the disassembler and lifter.

use evm_lift::asm::random_program;
use evm_lift::cfg::{identify_basic_blocks, resolve_jumps};
use evm_lift::disasm::{assemble, disassemble};
use evm_lift::invariants::{check_cfg, check_contract};
use evm_lift::ir::lift;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn roundtrip_and_invariants_on_generated_programs() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6c69_6674);
    for case in 0..1_000 {
        let bytecode = random_program(&mut rng);

        let instructions = disassemble(&bytecode);
        let reassembled = assemble(&instructions).expect("generated operands are full width");
        assert_eq!(
            reassembled, bytecode,
            "case {case}: byte round-trip broke on {}",
            hex::encode(&bytecode)
        );

        let cfg = resolve_jumps(identify_basic_blocks(&instructions));
        if let Err(why) = check_cfg(&instructions, &cfg) {
            panic!("case {case}: {why} on {}", hex::encode(&bytecode));
        }

        let ir = lift(&bytecode, None);
        if let Err(why) = check_contract(&ir) {
            panic!("case {case}: {why} on {}", hex::encode(&bytecode));
        }
    }
}

#[test]
fn lift_is_deterministic_on_generated_programs() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let bytecode = random_program(&mut rng);
        let a = serde_json::to_string(&lift(&bytecode, None)).unwrap();
        let b = serde_json::to_string(&lift(&bytecode, None)).unwrap();
        assert_eq!(a, b);
    }
}

proptest! {
    // Arbitrary bytes are a valid program to the disassembler: it must
    // consume every byte, and reassembly reproduces the input except that
    // a PUSH truncated by end-of-code comes back zero-padded to full width.
    #[test]
    fn arbitrary_bytes_disassemble_totally(bytes in proptest::collection::vec(any::<u8>(), 0..512)) {
        let instructions = disassemble(&bytes);
        let consumed: usize = instructions
            .iter()
            .map(|i| 1 + i.push_operand.as_ref().map_or(0, Vec::len))
            .sum();
        prop_assert!(consumed >= bytes.len());
        let reassembled = assemble(&instructions).unwrap();
        prop_assert_eq!(&reassembled[..bytes.len()], &bytes[..]);
        prop_assert!(reassembled[bytes.len()..].iter().all(|&b| b == 0));
    }

    // The full lifter must neither panic nor produce a structurally
    // inconsistent contract on arbitrary input.
    #[test]
    fn arbitrary_bytes_lift_consistently(bytes in proptest::collection::vec(any::<u8>(), 0..512)) {
        let ir = lift(&bytes, None);
        prop_assert!(check_contract(&ir).is_ok());
    }
}
