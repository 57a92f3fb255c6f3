//! Keccak-256 (the pre-NIST padding variant used by the EVM).
//!
//! Hand-rolled because no keccak crate is available in this build
//! environment. `sha2` is unrelated: Ethereum selectors and storage-slot
//! constants use original Keccak padding (0x01), not SHA-3 (0x06).

const RC: [u64; 24] = [
    0x0000000000000001,
    0x0000000000008082,
    0x800000000000808a,
    0x8000000080008000,
    0x000000000000808b,
    0x0000000080000001,
    0x8000000080008081,
    0x8000000000008009,
    0x000000000000008a,
    0x0000000000000088,
    0x0000000080008009,
    0x000000008000000a,
    0x000000008000808b,
    0x800000000000008b,
    0x8000000000008089,
    0x8000000000008003,
    0x8000000000008002,
    0x8000000000000080,
    0x000000000000800a,
    0x800000008000000a,
    0x8000000080008081,
    0x8000000000008080,
    0x0000000080000001,
    0x8000000080008008,
];

const ROTC: [u32; 24] = [
    1, 3, 6, 10, 15, 21, 28, 36, 45, 55, 2, 14, 27, 41, 56, 8, 25, 43, 62, 18, 39, 61, 20, 44,
];

const PILN: [usize; 24] = [
    10, 7, 11, 17, 18, 3, 5, 16, 8, 21, 24, 4, 15, 23, 19, 13, 12, 2, 20, 14, 22, 9, 6, 1,
];

fn keccak_f1600(st: &mut [u64; 25]) {
    let mut bc = [0u64; 5];
    for rc in RC {
        // theta
        for i in 0..5 {
            bc[i] = st[i] ^ st[i + 5] ^ st[i + 10] ^ st[i + 15] ^ st[i + 20];
        }
        for i in 0..5 {
            let t = bc[(i + 4) % 5] ^ bc[(i + 1) % 5].rotate_left(1);
            for j in (0..25).step_by(5) {
                st[j + i] ^= t;
            }
        }
        // rho + pi
        let mut t = st[1];
        for i in 0..24 {
            let j = PILN[i];
            bc[0] = st[j];
            st[j] = t.rotate_left(ROTC[i]);
            t = bc[0];
        }
        // chi
        for j in (0..25).step_by(5) {
            bc.copy_from_slice(&st[j..j + 5]);
            for i in 0..5 {
                st[j + i] = bc[i] ^ (!bc[(i + 1) % 5] & bc[(i + 2) % 5]);
            }
        }
        // iota
        st[0] ^= rc;
    }
}

/// Keccak-256 digest of `data`.
pub fn keccak256(data: &[u8]) -> [u8; 32] {
    const RATE: usize = 136; // 1088-bit rate for a 256-bit digest
    let mut st = [0u64; 25];
    let mut chunks = data.chunks_exact(RATE);
    for block in &mut chunks {
        absorb(&mut st, block);
        keccak_f1600(&mut st);
    }
    // final partial block with 0x01 .. 0x80 padding
    let rem = chunks.remainder();
    let mut last = [0u8; RATE];
    last[..rem.len()].copy_from_slice(rem);
    last[rem.len()] = 0x01;
    last[RATE - 1] |= 0x80;
    absorb(&mut st, &last);
    keccak_f1600(&mut st);

    let mut out = [0u8; 32];
    for (i, chunk) in out.chunks_exact_mut(8).enumerate() {
        chunk.copy_from_slice(&st[i].to_le_bytes());
    }
    out
}

fn absorb(st: &mut [u64; 25], block: &[u8]) {
    for (i, lane) in block.chunks_exact(8).enumerate() {
        st[i] ^= u64::from_le_bytes(lane.try_into().unwrap());
    }
}

/// First four bytes of the Keccak-256 of a canonical signature string,
/// i.e. an ABI function selector.
pub fn selector_of(signature: &str) -> [u8; 4] {
    let d = keccak256(signature.as_bytes());
    [d[0], d[1], d[2], d[3]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input_vector() {
        assert_eq!(
            hex::encode(keccak256(b"")),
            "c5d2460186f7233c927e7db2dcc703c0e500b653ca82273b7bfad8045d85a470"
        );
    }

    #[test]
    fn abc_vector() {
        assert_eq!(
            hex::encode(keccak256(b"abc")),
            "4e03657aea45a94fc7d47ba826c8d667c0d1e6e33a64a036ec44f58fa12d6c45"
        );
    }

    #[test]
    fn multi_block_input() {
        // 200 bytes crosses the 136-byte rate boundary
        let data = vec![0x61u8; 200];
        assert_eq!(
            hex::encode(keccak256(&data)),
            "96ea54061def936c4be90b518992fdc6f12f535068a256229aca54267b4d084d"
        );
        assert_ne!(keccak256(&data), keccak256(&data[..199]));
    }

    #[test]
    fn erc20_transfer_selector() {
        assert_eq!(selector_of("transfer(address,uint256)"), [0xa9, 0x05, 0x9c, 0xbb]);
    }

    #[test]
    fn erc1967_implementation_slot() {
        // bytes32(uint256(keccak256("eip1967.proxy.implementation")) - 1)
        let mut slot = keccak256(b"eip1967.proxy.implementation");
        // subtract one over the 256-bit big-endian integer
        for byte in slot.iter_mut().rev() {
            let (v, borrow) = byte.overflowing_sub(1);
            *byte = v;
            if !borrow {
                break;
            }
        }
        assert_eq!(
            hex::encode(slot),
            "360894a13ba1a3210667c828492db98dca3e2076cc3735a920a3ca505d382bbc"
        );
    }
}
