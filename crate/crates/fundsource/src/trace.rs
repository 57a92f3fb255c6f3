//! The earliest-funder walk: from a deployer, repeatedly step to the sender
//! of the chronologically first value-bearing incoming transaction until a
//! labeled address is hit or the walk exhausts.

use std::collections::{BTreeSet, HashMap};
use std::sync::Mutex;

use evm_lift::types::Address;

use crate::labels::{AddressLabelDB, FundSourceCategory};
use crate::ProviderError;

pub const DEFAULT_MAX_DEPTH: u32 = 10;

/// Answers "who funded this address first". Implementations must tolerate
/// concurrent queries; traces for distinct deployers run in parallel.
pub trait FundingGraphProvider: Sync {
    /// Sender of the chronologically first value-bearing incoming
    /// transaction, ordered by block number then transaction index.
    /// `None` when the address has no value-bearing inflow.
    fn earliest_incoming_funder(&self, address: &Address) -> Result<Option<Address>, ProviderError>;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FundTrace {
    pub category: FundSourceCategory,
    /// Funders examined in walk order; at most `max_depth` entries.
    pub path: Vec<Address>,
    /// The labeled address that ended the walk, with its label text.
    pub matched: Option<(Address, String)>,
    /// Set when the provider failed and the walk degraded to Unknown.
    pub diagnostic: Option<String>,
}

impl FundTrace {
    fn unknown(path: Vec<Address>, diagnostic: Option<String>) -> FundTrace {
        FundTrace {
            category: FundSourceCategory::Unknown,
            path,
            matched: None,
            diagnostic,
        }
    }
}

/// Walks funder links starting at `deployer`. The deployer itself is never
/// looked up in the label DB; its funders are, starting with the first hop.
/// Stops with `Unknown` after `max_depth` provider calls, on a cycle, on a
/// missing funder, or on provider failure (the failure becomes a
/// diagnostic; the pipeline never aborts on a trace).
pub fn trace_fund_source<P: FundingGraphProvider + ?Sized>(
    deployer: Address,
    provider: &P,
    labels: &AddressLabelDB,
    max_depth: u32,
) -> FundTrace {
    let mut visited: BTreeSet<Address> = BTreeSet::new();
    visited.insert(deployer);
    let mut current = deployer;
    let mut path = Vec::new();
    for _ in 0..max_depth {
        let funder = match provider.earliest_incoming_funder(&current) {
            Ok(f) => f,
            Err(e) => return FundTrace::unknown(path, Some(e.to_string())),
        };
        let Some(funder) = funder else {
            return FundTrace::unknown(path, None);
        };
        path.push(funder);
        // an Unknown-category entry is an annotation, not a verdict: the
        // walk passes through it so a larger DB can only resolve earlier,
        // never demote a definite result to Unknown
        if let Some((label, category)) = labels.label_address(&funder) {
            if category != FundSourceCategory::Unknown {
                return FundTrace {
                    category,
                    matched: Some((funder, label.to_string())),
                    path,
                    diagnostic: None,
                };
            }
        }
        if !visited.insert(funder) {
            return FundTrace::unknown(path, None);
        }
        current = funder;
    }
    FundTrace::unknown(path, None)
}

/// Memoizing front end: one walk per deployer, results shared across
/// threads. The lock is never held across a provider call, so concurrent
/// traces of distinct deployers proceed in parallel (a pair of racing
/// traces for the same deployer both run and write the same value).
pub struct CachedTracer<P> {
    provider: P,
    labels: AddressLabelDB,
    max_depth: u32,
    cache: Mutex<HashMap<Address, FundTrace>>,
}

impl<P: FundingGraphProvider> CachedTracer<P> {
    pub fn new(provider: P, labels: AddressLabelDB, max_depth: u32) -> CachedTracer<P> {
        CachedTracer {
            provider,
            labels,
            max_depth,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn trace(&self, deployer: Address) -> FundTrace {
        if let Some(hit) = self.cache.lock().unwrap().get(&deployer) {
            return hit.clone();
        }
        let result = trace_fund_source(deployer, &self.provider, &self.labels, self.max_depth);
        self.cache
            .lock()
            .unwrap()
            .insert(deployer, result.clone());
        result
    }

    pub fn labels(&self) -> &AddressLabelDB {
        &self.labels
    }
}
