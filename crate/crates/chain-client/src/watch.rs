//! Ordered deployment-event stream over a block range. Creations are
//! normal transactions with an absent recipient; creations made by
//! contracts mid-call (internal transactions) are deliberately out of
//! scope, matching what a node exposes without tracing.

use std::collections::VecDeque;

use evm_lift::types::Address;
use serde::{Deserialize, Serialize};

use crate::client::{ClientMode, ExternalClient};
use crate::rlp::derive_contract_address;
use crate::ClientError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeploymentEvent {
    pub contract_address: Address,
    pub creator_address: Address,
    pub tx_hash: String,
    pub block_number: u64,
    pub tx_index: u32,
    pub block_timestamp: u64,
    #[serde(with = "input_hex")]
    pub creation_input: Vec<u8>,
    pub value: u128,
    pub gas_used: u64,
    pub nonce: u64,
}

mod input_hex {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("0x{}", hex::encode(bytes)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let text = String::deserialize(d)?;
        hex::decode(text.strip_prefix("0x").unwrap_or(&text)).map_err(serde::de::Error::custom)
    }
}

/// A block or receipt that stayed unavailable after retries. The stream
/// reports it and moves on.
#[derive(Debug, Clone, PartialEq, thiserror::Error, Serialize, Deserialize)]
#[error("block {block}: {message}")]
pub struct WatchGap {
    pub block: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub base_delay_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> RetryPolicy {
        RetryPolicy { attempts: 3, base_delay_ms: 250 }
    }
}

/// Iterator of `Result<DeploymentEvent, WatchGap>` over an inclusive block
/// range, strictly ordered by (block_number, tx_index).
pub struct BlockWatcher<'a> {
    client: &'a ExternalClient,
    retry: RetryPolicy,
    next_block: u64,
    to_block: u64,
    pending: VecDeque<Result<DeploymentEvent, WatchGap>>,
}

pub fn watch_blocks(
    client: &ExternalClient,
    from_block: u64,
    to_block: u64,
    retry: RetryPolicy,
) -> BlockWatcher<'_> {
    BlockWatcher { client, retry, next_block: from_block, to_block, pending: VecDeque::new() }
}

impl BlockWatcher<'_> {
    /// Retries transient transport failures with doubling delay. Replay
    /// never sleeps and never retries: a snapshot miss is permanent.
    fn with_retries<T>(
        &self,
        mut op: impl FnMut() -> Result<T, ClientError>,
    ) -> Result<T, ClientError> {
        let attempts = if self.client.mode() == ClientMode::Replay { 1 } else { self.retry.attempts.max(1) };
        let mut last = None;
        for attempt in 0..attempts {
            match op() {
                Ok(v) => return Ok(v),
                Err(e @ ClientError::Transport(_)) if attempt + 1 < attempts => {
                    std::thread::sleep(std::time::Duration::from_millis(
                        self.retry.base_delay_ms << attempt,
                    ));
                    last = Some(e);
                }
                Err(e) => return Err(e),
            }
        }
        Err(last.expect("loop ran at least once"))
    }

    fn load_block(&mut self, number: u64) {
        let block = match self.with_retries(|| self.client.block_by_number(number)) {
            Ok(Some(b)) => b,
            Ok(None) => {
                self.pending.push_back(Err(WatchGap {
                    block: number,
                    message: "block not available".into(),
                }));
                return;
            }
            Err(e) => {
                self.pending.push_back(Err(WatchGap { block: number, message: e.to_string() }));
                return;
            }
        };
        for tx in &block.transactions {
            if tx.to.is_some() {
                continue;
            }
            let receipt = match self.with_retries(|| self.client.transaction_receipt(&tx.hash)) {
                Ok(Some(r)) => r,
                Ok(None) => {
                    self.pending.push_back(Err(WatchGap {
                        block: number,
                        message: format!("no receipt for {}", tx.hash),
                    }));
                    continue;
                }
                Err(e) => {
                    self.pending.push_back(Err(WatchGap {
                        block: number,
                        message: format!("receipt for {}: {e}", tx.hash),
                    }));
                    continue;
                }
            };
            // a reverted creation deployed nothing
            if !receipt.status_ok {
                continue;
            }
            // the receipt is authoritative; derivation covers nodes that
            // omit the field
            let contract_address = receipt
                .contract_address
                .unwrap_or_else(|| derive_contract_address(&tx.from, tx.nonce));
            self.pending.push_back(Ok(DeploymentEvent {
                contract_address,
                creator_address: tx.from,
                tx_hash: tx.hash.clone(),
                block_number: block.number,
                tx_index: tx.tx_index,
                block_timestamp: block.timestamp,
                creation_input: tx.input.clone(),
                value: tx.value,
                gas_used: receipt.gas_used,
                nonce: tx.nonce,
            }));
        }
    }
}

impl Iterator for BlockWatcher<'_> {
    type Item = Result<DeploymentEvent, WatchGap>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if let Some(item) = self.pending.pop_front() {
                return Some(item);
            }
            if self.next_block > self.to_block {
                return None;
            }
            let number = self.next_block;
            self.next_block += 1;
            self.load_block(number);
        }
    }
}
