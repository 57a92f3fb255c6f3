//! Ten hand-assembled contracts whose implementation features are known by
//! counting on paper. Every field of every fixture is asserted exactly.

use std::collections::BTreeMap;

use contract_features::{extract_implementation_features, ImplementationFeatures, SelectorConfig};
use evm_lift::asm::{dispatcher_contract, dispatcher_fixture, DispatchEntry, Item};
use evm_lift::cfg::BasicBlock;
use evm_lift::ir::{Contract, FunctionIR, Visibility};
use evm_lift::opcode::Opcode;
use evm_lift::types::Selector;
use evm_lift::{count_opcode, lift};
use pscft::{filter_call_statements, CallContract, CallKind, CallStatement};

fn token(offset: u32, signature: &str) -> CallStatement {
    let mut s = CallStatement::new(offset, CallKind::Call);
    s.selector = Some(Selector::of_signature(signature));
    s
}

fn private_call(offset: u32, callee: &str) -> CallStatement {
    let mut s = CallStatement::new(offset, CallKind::PrivateCall);
    s.callee_name = Some(callee.to_string());
    s
}

/// Function from a block list: (id, statements, successor ids). Edges are
/// made symmetric; the first block is the entry.
fn func(
    name: &str,
    vis: Visibility,
    selector: Option<&str>,
    blocks: Vec<(u32, Vec<CallStatement>, Vec<u32>)>,
) -> FunctionIR<CallStatement> {
    let entry = blocks[0].0;
    let mut f = FunctionIR::new(name, vis, entry);
    f.selector = selector.map(Selector::of_signature);
    for (id, statements, _) in &blocks {
        let mut b = BasicBlock::new(*id);
        b.statements = statements.clone();
        f.blocks.insert(*id, b);
    }
    for (id, _, succs) in &blocks {
        for s in succs {
            f.blocks.get_mut(id).unwrap().successors.insert(*s);
            f.blocks.get_mut(s).unwrap().predecessors.insert(*id);
        }
    }
    f
}

fn hand_built(functions: Vec<FunctionIR<CallStatement>>) -> CallContract {
    Contract {
        address: None,
        runtime_bytecode: Vec::new(),
        functions,
        opcode_counts: BTreeMap::new(),
        call_info: BTreeMap::new(),
        jump_targets: BTreeMap::new(),
        diagnostics: Vec::new(),
    }
}

fn lifted(code: &[u8]) -> CallContract {
    filter_call_statements(&lift(code, None))
}

const TRANSFER: &str = "transfer(address,uint256)";
const BALANCE_OF: &str = "balanceOf(address)";

fn expected(
    func_count: u64,
    public_func_count: u64,
    flashloan_callback_count: u64,
    token_call_count: u64,
    token_call_ratio: f64,
    max_token_call_count: u64,
    avg_token_call_count: f64,
    delegate_call_count: u64,
    selfdestruct_count: u64,
) -> ImplementationFeatures {
    ImplementationFeatures {
        func_count,
        public_func_count,
        flashloan_callback_count,
        flashloan_callback_ratio: if public_func_count == 0 {
            0.0
        } else {
            flashloan_callback_count as f64 / public_func_count as f64
        },
        token_call_count,
        token_call_ratio,
        max_token_call_count,
        avg_token_call_count,
        delegate_call_count,
        selfdestruct_count,
    }
}

#[test]
fn fixture_01_fallback_only() {
    let contract = hand_built(vec![func("fallback", Visibility::Fallback, None, vec![(0, vec![], vec![])])]);
    let f = extract_implementation_features(&contract, &SelectorConfig::default());
    assert_eq!(f, expected(1, 0, 0, 0, 0.0, 0, 0.0, 0, 0));
}

#[test]
fn fixture_02_two_publics_token_split() {
    // A reaches 3 token calls (1 in entry, 2 in a looped successor), B
    // reaches 1: max 3, avg 2
    let a = func(
        "alpha",
        Visibility::Public,
        Some("alpha()"),
        vec![
            (0, vec![token(1, TRANSFER)], vec![4]),
            (4, vec![token(2, TRANSFER), token(3, BALANCE_OF)], vec![0]), // cycle back
        ],
    );
    let b = func(
        "beta",
        Visibility::Public,
        Some("beta()"),
        vec![(8, vec![token(9, TRANSFER)], vec![])],
    );
    let f = extract_implementation_features(&hand_built(vec![a, b]), &SelectorConfig::default());
    assert_eq!(f, expected(2, 2, 0, 4, 1.0, 3, 2.0, 0, 0));
}

#[test]
fn fixture_03_flashloan_callback_pair() {
    let cb = func(
        "uniswapV2Call",
        Visibility::Public,
        Some("uniswapV2Call(address,uint256,uint256,bytes)"),
        vec![(0, vec![], vec![])],
    );
    let other = func("sweep", Visibility::Public, Some("sweep()"), vec![(4, vec![], vec![])]);
    let f = extract_implementation_features(&hand_built(vec![cb, other]), &SelectorConfig::default());
    assert_eq!(f, expected(2, 2, 1, 0, 0.0, 0, 0.0, 0, 0));
    assert_eq!(f.flashloan_callback_ratio, 0.5);
}

#[test]
fn fixture_04_shared_private_helper() {
    // A: 1 direct token call + helper's 1 → 2; B: helper only → 1
    let a = func(
        "alpha",
        Visibility::Public,
        Some("alpha()"),
        vec![(0, vec![token(1, TRANSFER), private_call(2, "helper")], vec![])],
    );
    let b = func(
        "beta",
        Visibility::Public,
        Some("beta()"),
        vec![(4, vec![private_call(5, "helper")], vec![])],
    );
    let h = func(
        "helper",
        Visibility::Private,
        None,
        vec![(8, vec![token(9, TRANSFER)], vec![])],
    );
    let f = extract_implementation_features(&hand_built(vec![a, b, h]), &SelectorConfig::default());
    assert_eq!(f, expected(3, 2, 0, 2, 1.0, 2, 1.5, 0, 0));
}

#[test]
fn fixture_05_delegate_and_selfdestruct_opcodes() {
    let (code, _) = dispatcher_fixture(&[(
        "kill()",
        vec![Opcode::DelegateCall, Opcode::DelegateCall, Opcode::SelfDestruct],
    )]);
    let contract = lifted(&code);
    assert_eq!(count_opcode(&contract, Opcode::DelegateCall), 2);
    let f = extract_implementation_features(&contract, &SelectorConfig::default());
    // kill() + fallback; two delegate externals, no token selectors
    assert_eq!(f, expected(2, 1, 0, 0, 0.0, 0, 0.0, 2, 1));
}

#[test]
fn fixture_06_opcode_bytes_hidden_in_push_operands() {
    // 0xf4 and 0xff appear only as PUSH payload; one real DELEGATECALL
    let body = vec![
        Item::PushData(vec![0xf4, 0xf4]),
        Item::PushData(vec![0xff, 0xf4, 0xff, 0xf4]),
        Item::Op(Opcode::Pop),
        Item::Op(Opcode::Pop),
        Item::Op(Opcode::DelegateCall),
        Item::Op(Opcode::Stop),
    ];
    let code = dispatcher_contract(&[DispatchEntry::new("probe()", body)]);
    let contract = lifted(&code);
    assert_eq!(count_opcode(&contract, Opcode::DelegateCall), 1);
    assert_eq!(count_opcode(&contract, Opcode::SelfDestruct), 0);
    let f = extract_implementation_features(&contract, &SelectorConfig::default());
    assert_eq!(f.delegate_call_count, 1);
    assert_eq!(f.selfdestruct_count, 0);
    assert_eq!(f.func_count, 2);
    assert_eq!(f.public_func_count, 1);
}

#[test]
fn fixture_07_externals_without_token_selectors() {
    let mut unknown = CallStatement::new(3, CallKind::StaticCall);
    unknown.selector = None;
    let a = func(
        "poke",
        Visibility::Public,
        Some("poke()"),
        vec![(0, vec![token(1, "ping()"), token(2, "pong(uint256)"), unknown], vec![])],
    );
    let f = extract_implementation_features(&hand_built(vec![a]), &SelectorConfig::default());
    // 3 externals, none in the token list
    assert_eq!(f, expected(1, 1, 0, 0, 0.0, 0, 0.0, 0, 0));
}

#[test]
fn fixture_08_token_call_unreachable_from_entry() {
    // global count sees the orphaned block; per-public reachability does not
    let a = func(
        "alpha",
        Visibility::Public,
        Some("alpha()"),
        vec![(0, vec![], vec![]), (4, vec![token(5, TRANSFER)], vec![])],
    );
    let f = extract_implementation_features(&hand_built(vec![a]), &SelectorConfig::default());
    assert_eq!(f, expected(1, 1, 0, 1, 1.0, 0, 0.0, 0, 0));
}

#[test]
fn fixture_09_mixed_selector_and_unknown_call() {
    let mut unknown = CallStatement::new(2, CallKind::Call);
    unknown.selector = None;
    let a = func(
        "alpha",
        Visibility::Public,
        Some("alpha()"),
        vec![(0, vec![unknown, token(1, TRANSFER)], vec![])],
    );
    let f = extract_implementation_features(&hand_built(vec![a]), &SelectorConfig::default());
    assert_eq!(f, expected(1, 1, 0, 1, 0.5, 1, 1.0, 0, 0));
}

#[test]
fn fixture_10_private_token_call_without_publics() {
    let fb = func("fallback", Visibility::Fallback, None, vec![(0, vec![], vec![])]);
    let h = func(
        "helper",
        Visibility::Private,
        None,
        vec![(4, vec![token(5, TRANSFER)], vec![])],
    );
    let f = extract_implementation_features(&hand_built(vec![fb, h]), &SelectorConfig::default());
    assert_eq!(f, expected(2, 0, 0, 1, 1.0, 0, 0.0, 0, 0));
}
