//! Cheap screening for contracts that follow well-known standards: full
//! token interfaces and upgradeable-proxy shells are overwhelmingly benign
//! plumbing, and the pipeline can skip deep analysis for them.

use std::collections::BTreeSet;

use evm_lift::ir::{ContractIR, Visibility};
use evm_lift::keccak::keccak256;
use evm_lift::opcode::Opcode;
use evm_lift::types::Selector;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StandardKind {
    TokenErc20,
    TokenErc721,
    ProxyErc1967,
    Other,
}

/// The six mandatory ERC-20 functions.
pub fn erc20_selectors() -> BTreeSet<Selector> {
    [
        "totalSupply()",
        "balanceOf(address)",
        "transfer(address,uint256)",
        "transferFrom(address,address,uint256)",
        "approve(address,uint256)",
        "allowance(address,address)",
    ]
    .into_iter()
    .map(Selector::of_signature)
    .collect()
}

/// The mandatory ERC-721 surface, including the required introspection
/// entry point.
pub fn erc721_selectors() -> BTreeSet<Selector> {
    [
        "balanceOf(address)",
        "ownerOf(uint256)",
        "safeTransferFrom(address,address,uint256,bytes)",
        "safeTransferFrom(address,address,uint256)",
        "transferFrom(address,address,uint256)",
        "approve(address,uint256)",
        "setApprovalForAll(address,bool)",
        "getApproved(uint256)",
        "isApprovedForAll(address,address)",
        "supportsInterface(bytes4)",
    ]
    .into_iter()
    .map(Selector::of_signature)
    .collect()
}

/// The storage slot where upgradeable proxies keep their implementation
/// address: hash of a fixed tag, minus one.
pub fn erc1967_implementation_slot() -> [u8; 32] {
    let mut slot = keccak256(b"eip1967.proxy.implementation");
    for byte in slot.iter_mut().rev() {
        let (v, borrow) = byte.overflowing_sub(1);
        *byte = v;
        if !borrow {
            break;
        }
    }
    slot
}

/// Token classification requires the complete mandatory selector set (a
/// superset is fine); proxy classification triggers on the implementation
/// slot constant in code, or on a contract that exposes nothing public and
/// delegates from its fallback.
pub fn detect_standard_contract(ir: &ContractIR) -> StandardKind {
    let public: BTreeSet<Selector> = ir
        .functions
        .iter()
        .filter(|f| f.visibility == Visibility::Public)
        .filter_map(|f| f.selector)
        .collect();

    if erc20_selectors().is_subset(&public) {
        return StandardKind::TokenErc20;
    }
    if erc721_selectors().is_subset(&public) {
        return StandardKind::TokenErc721;
    }

    let slot = erc1967_implementation_slot();
    let in_code = ir
        .runtime_bytecode
        .windows(slot.len())
        .any(|w| w == slot);
    let delegating_shell = public.is_empty()
        && evm_lift::ir::count_opcode(ir, Opcode::DelegateCall) > 0;
    if in_code || delegating_shell {
        return StandardKind::ProxyErc1967;
    }
    StandardKind::Other
}
