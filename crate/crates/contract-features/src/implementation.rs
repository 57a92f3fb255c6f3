//! Static implementation features over the call-statement view of a lifted
//! contract.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use evm_lift::ir::Visibility;
use evm_lift::opcode::Opcode;
use evm_lift::{count_opcode, FunctionIR};
use pscft::{CallContract, CallKind, CallStatement};

use crate::selectors::SelectorConfig;

/// Counts and ratios describing what the deployed code can do, independent
/// of how it arrived on chain.
#[derive(Debug, Clone, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ImplementationFeatures {
    pub func_count: u64,
    pub public_func_count: u64,
    pub flashloan_callback_count: u64,
    /// callbacks / public functions, 0 when there are no public functions
    pub flashloan_callback_ratio: f64,
    pub token_call_count: u64,
    /// token calls / external calls, 0 when there are no external calls
    pub token_call_ratio: f64,
    /// most token calls reachable from any single public entry
    pub max_token_call_count: u64,
    /// mean reachable token calls per public function
    pub avg_token_call_count: f64,
    pub delegate_call_count: u64,
    pub selfdestruct_count: u64,
}

fn is_token_call(stmt: &CallStatement, config: &SelectorConfig) -> bool {
    stmt.kind.is_external()
        && stmt.selector.map(|s| config.token_calls.contains(&s)).unwrap_or(false)
}

/// Token calls sitting in blocks reachable from `start`'s entry, following
/// intra-function edges and private-call statements into their callees.
/// Each statement is counted once no matter how many paths reach it.
fn reachable_token_calls(
    start: usize,
    functions: &[FunctionIR<CallStatement>],
    by_name: &BTreeMap<&str, usize>,
    config: &SelectorConfig,
) -> u64 {
    let mut seen: BTreeSet<(usize, u32)> = BTreeSet::new();
    let mut queue: VecDeque<(usize, u32)> = VecDeque::new();
    let entry = functions[start].entry_block;
    if functions[start].blocks.contains_key(&entry) {
        seen.insert((start, entry));
        queue.push_back((start, entry));
    }
    let mut count = 0;
    while let Some((fi, bid)) = queue.pop_front() {
        let block = &functions[fi].blocks[&bid];
        for stmt in &block.statements {
            if is_token_call(stmt, config) {
                count += 1;
            }
            if stmt.kind == CallKind::PrivateCall {
                let callee = stmt
                    .callee_name
                    .as_deref()
                    .and_then(|name| by_name.get(name))
                    .copied();
                if let Some(ci) = callee {
                    let centry = functions[ci].entry_block;
                    if functions[ci].blocks.contains_key(&centry)
                        && seen.insert((ci, centry))
                    {
                        queue.push_back((ci, centry));
                    }
                }
            }
        }
        for succ in &block.successors {
            if functions[fi].blocks.contains_key(succ) && seen.insert((fi, *succ)) {
                queue.push_back((fi, *succ));
            }
        }
    }
    count
}

/// Pure function of the call-statement contract and the selector lists;
/// works identically before or after canonical renaming.
pub fn extract_implementation_features(
    contract: &CallContract,
    config: &SelectorConfig,
) -> ImplementationFeatures {
    let functions = &contract.functions;
    let by_name: BTreeMap<&str, usize> = functions
        .iter()
        .enumerate()
        .map(|(i, f)| (f.canonical_name.as_str(), i))
        .collect();

    let public_indices: Vec<usize> = functions
        .iter()
        .enumerate()
        .filter(|(_, f)| f.visibility == Visibility::Public)
        .map(|(i, _)| i)
        .collect();
    let public_func_count = public_indices.len() as u64;

    let flashloan_callback_count = public_indices
        .iter()
        .filter(|&&i| {
            functions[i]
                .selector
                .map(|s| config.flashloan_callbacks.contains(&s))
                .unwrap_or(false)
        })
        .count() as u64;

    let mut external_calls = 0u64;
    let mut token_call_count = 0u64;
    for f in functions {
        for b in f.blocks.values() {
            for stmt in &b.statements {
                if stmt.kind.is_external() {
                    external_calls += 1;
                    if is_token_call(stmt, config) {
                        token_call_count += 1;
                    }
                }
            }
        }
    }

    let per_public: Vec<u64> = public_indices
        .iter()
        .map(|&i| reachable_token_calls(i, functions, &by_name, config))
        .collect();
    let max_token_call_count = per_public.iter().copied().max().unwrap_or(0);
    let avg_token_call_count = if per_public.is_empty() {
        0.0
    } else {
        per_public.iter().sum::<u64>() as f64 / per_public.len() as f64
    };

    ImplementationFeatures {
        func_count: functions.len() as u64,
        public_func_count,
        flashloan_callback_count,
        flashloan_callback_ratio: ratio(flashloan_callback_count, public_func_count),
        token_call_count,
        token_call_ratio: ratio(token_call_count, external_calls),
        max_token_call_count,
        avg_token_call_count,
        delegate_call_count: count_opcode(contract, Opcode::DelegateCall),
        selfdestruct_count: count_opcode(contract, Opcode::SelfDestruct),
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}
