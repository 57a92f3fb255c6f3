//! Benign-candidate selection: deployments that attracted organic traffic
//! and are not plain token or proxy standards. Token and proxy contracts
//! dominate deployment volume and carry no signal either way, so they are
//! excluded from training data entirely.

use evm_lift::lift;
use evm_lift::types::Address;
use pscft::{detect_standard_contract, StandardKind};

use crate::client::ExternalClient;
use crate::watch::DeploymentEvent;
use crate::ClientError;

pub const DEFAULT_MIN_UNIQUE_CALLERS: u32 = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct BenignCandidate {
    pub address: Address,
    pub unique_callers: u32,
}

/// Keeps events whose contract saw at least `min_unique_callers` distinct
/// callers within `window_blocks` after deployment and whose code is not a
/// token or proxy standard. Order of `events` is preserved.
pub fn build_benign_candidates(
    client: &ExternalClient,
    events: &[DeploymentEvent],
    min_unique_callers: u32,
    window_blocks: u64,
) -> Result<Vec<BenignCandidate>, ClientError> {
    let mut kept = Vec::new();
    for event in events {
        let callers = client.unique_callers(
            &event.contract_address,
            event.block_number,
            event.block_number + window_blocks,
        )?;
        if callers < min_unique_callers {
            continue;
        }
        let code = client.code_at(&event.contract_address)?;
        let ir = lift(&code, Some(event.contract_address));
        if detect_standard_contract(&ir) != StandardKind::Other {
            continue;
        }
        kept.push(BenignCandidate { address: event.contract_address, unique_callers: callers });
    }
    Ok(kept)
}
