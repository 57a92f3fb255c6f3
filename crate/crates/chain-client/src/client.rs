//! The one client the rest of the pipeline talks to. Three modes:
//!
//! * live: straight HTTP, nothing persisted
//! * recording: HTTP on miss, every pair appended to the snapshot
//! * replay: snapshot only; the HTTP agent is never even constructed, so
//!   a replay run is networkless by construction, not by discipline
//!
//! All methods take `&self`; the snapshot and memo tables sit behind
//! mutexes that are never held across a network call.

use std::collections::HashMap;
use std::sync::Mutex;
use std::time::Duration;

use evm_lift::selector_of;
use evm_lift::types::{Address, Selector};
use serde_json::{json, Value};

use crate::rpc::{self, BlockView, ReceiptView};
use crate::snapshot::{RequestKey, Service, SnapshotStore};
use crate::ClientError;

/// Endpoint set, config-file driven with environment overrides.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Endpoints {
    pub rpc_url: String,
    pub explorer_url: String,
    pub sigdb_url: String,
    /// sent as `x-api-key` on explorer and resolver requests when present
    #[serde(default)]
    pub api_key: Option<String>,
    /// per-request timeout, milliseconds
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
}

fn default_timeout_ms() -> u64 {
    10_000
}

impl Endpoints {
    /// `DEPLOYWATCH_RPC_URL`, `DEPLOYWATCH_EXPLORER_URL`,
    /// `DEPLOYWATCH_SIGDB_URL`, and `DEPLOYWATCH_API_KEY` override the
    /// config-file values when set.
    pub fn with_env_overrides(mut self) -> Endpoints {
        if let Ok(v) = std::env::var("DEPLOYWATCH_RPC_URL") {
            self.rpc_url = v;
        }
        if let Ok(v) = std::env::var("DEPLOYWATCH_EXPLORER_URL") {
            self.explorer_url = v;
        }
        if let Ok(v) = std::env::var("DEPLOYWATCH_SIGDB_URL") {
            self.sigdb_url = v;
        }
        if let Ok(v) = std::env::var("DEPLOYWATCH_API_KEY") {
            self.api_key = Some(v);
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClientMode {
    Live,
    Recording,
    Replay,
}

struct HttpTransport {
    agent: ureq::Agent,
    endpoints: Endpoints,
}

impl HttpTransport {
    fn new(endpoints: Endpoints) -> HttpTransport {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_millis(endpoints.timeout_ms)))
            .build();
        HttpTransport { agent: ureq::Agent::new_with_config(config), endpoints }
    }

    /// Node requests are JSON-RPC; explorer and resolver speak the
    /// normalized `{method, params} -> {result}` shape documented in
    /// docs/external-services.md. Adapters for specific explorer vendors
    /// translate to that shape behind their own URL.
    fn send(&self, service: Service, method: &str, params: &Value) -> Result<Value, ClientError> {
        let (url, body) = match service {
            Service::Rpc => (
                &self.endpoints.rpc_url,
                json!({"jsonrpc": "2.0", "id": 1, "method": method, "params": params}),
            ),
            Service::Explorer => {
                (&self.endpoints.explorer_url, json!({"method": method, "params": params}))
            }
            Service::Sigdb => {
                (&self.endpoints.sigdb_url, json!({"method": method, "params": params}))
            }
        };
        let mut req = self.agent.post(url);
        if service != Service::Rpc {
            if let Some(key) = &self.endpoints.api_key {
                req = req.header("x-api-key", key);
            }
        }
        let mut resp = req
            .send_json(&body)
            .map_err(|e| ClientError::Transport(format!("{method}: {e}")))?;
        let payload: Value = resp
            .body_mut()
            .read_json()
            .map_err(|e| ClientError::Transport(format!("{method}: {e}")))?;
        if let Some(err) = payload.get("error").filter(|e| !e.is_null()) {
            return Err(ClientError::Service {
                method: method.to_string(),
                message: err.to_string(),
            });
        }
        payload
            .get("result")
            .cloned()
            .ok_or_else(|| ClientError::Malformed {
                context: method.to_string(),
                message: "response carries neither result nor error".into(),
            })
    }
}

pub struct ExternalClient {
    mode: ClientMode,
    http: Option<HttpTransport>,
    snapshot: Option<Mutex<SnapshotStore>>,
    selector_memo: Mutex<HashMap<Selector, Option<String>>>,
    /// verbatim notes about degraded lookups, drained by the caller
    diagnostics: Mutex<Vec<String>>,
    /// total backend consultations (snapshot or network), for cache tests
    consultations: Mutex<u64>,
}

impl ExternalClient {
    pub fn live(endpoints: Endpoints) -> ExternalClient {
        ExternalClient::build(ClientMode::Live, Some(HttpTransport::new(endpoints)), None)
    }

    pub fn recording(endpoints: Endpoints, snapshot: SnapshotStore) -> ExternalClient {
        ExternalClient::build(
            ClientMode::Recording,
            Some(HttpTransport::new(endpoints)),
            Some(snapshot),
        )
    }

    pub fn replay(snapshot: SnapshotStore) -> ExternalClient {
        ExternalClient::build(ClientMode::Replay, None, Some(snapshot))
    }

    fn build(
        mode: ClientMode,
        http: Option<HttpTransport>,
        snapshot: Option<SnapshotStore>,
    ) -> ExternalClient {
        ExternalClient {
            mode,
            http,
            snapshot: snapshot.map(Mutex::new),
            selector_memo: Mutex::new(HashMap::new()),
            diagnostics: Mutex::new(Vec::new()),
            consultations: Mutex::new(0),
        }
    }

    pub fn mode(&self) -> ClientMode {
        self.mode
    }

    /// Degraded-lookup notes accumulated so far, oldest first.
    pub fn drain_diagnostics(&self) -> Vec<String> {
        std::mem::take(&mut self.diagnostics.lock().expect("diagnostics lock"))
    }

    fn note(&self, message: String) {
        self.diagnostics.lock().expect("diagnostics lock").push(message);
    }

    pub fn consultations(&self) -> u64 {
        *self.consultations.lock().expect("consultations lock")
    }

    fn call(&self, service: Service, method: &str, params: Value) -> Result<Value, ClientError> {
        *self.consultations.lock().expect("consultations lock") += 1;
        let key = RequestKey::new(service, method, params);
        if let Some(snapshot) = &self.snapshot {
            if let Some(hit) = snapshot.lock().expect("snapshot lock").get(&key) {
                return Ok(hit.clone());
            }
            if self.mode == ClientMode::Replay {
                return Err(ClientError::ReplayMiss {
                    method: method.to_string(),
                    key: key.digest(),
                });
            }
        }
        let http = self.http.as_ref().expect("non-replay modes carry a transport");
        let response = http.send(service, method, &key.params)?;
        if let Some(snapshot) = &self.snapshot {
            snapshot.lock().expect("snapshot lock").record(key, response.clone())?;
        }
        Ok(response)
    }

    // -- node ------------------------------------------------------------

    pub fn latest_block_number(&self) -> Result<u64, ClientError> {
        let v = self.call(Service::Rpc, "eth_blockNumber", json!([]))?;
        rpc::quantity_u64(&v, "eth_blockNumber")
    }

    /// `None` when the node does not (yet) have the block.
    pub fn block_by_number(&self, number: u64) -> Result<Option<BlockView>, ClientError> {
        let v = self.call(
            Service::Rpc,
            "eth_getBlockByNumber",
            json!([rpc::to_quantity(number), true]),
        )?;
        if v.is_null() {
            return Ok(None);
        }
        rpc::parse_block(&v).map(Some)
    }

    pub fn transaction_receipt(&self, tx_hash: &str) -> Result<Option<ReceiptView>, ClientError> {
        let v = self.call(Service::Rpc, "eth_getTransactionReceipt", json!([tx_hash]))?;
        if v.is_null() {
            return Ok(None);
        }
        rpc::parse_receipt(&v).map(Some)
    }

    pub fn code_at(&self, address: &Address) -> Result<Vec<u8>, ClientError> {
        let v = self.call(Service::Rpc, "eth_getCode", json!([address.to_string(), "latest"]))?;
        rpc::data_bytes(&v, "eth_getCode")
    }

    pub fn transaction_count(&self, address: &Address) -> Result<u64, ClientError> {
        let v = self.call(
            Service::Rpc,
            "eth_getTransactionCount",
            json!([address.to_string(), "latest"]),
        )?;
        rpc::quantity_u64(&v, "eth_getTransactionCount")
    }

    // -- explorer ----------------------------------------------------------

    /// Source-verification flag. Outside replay, a failed lookup degrades
    /// to `false` with a diagnostic: the pipeline keeps running and the
    /// value errs toward the suspicious side.
    pub fn get_verification_status(&self, address: &Address) -> Result<bool, ClientError> {
        match self.contract_meta(address) {
            Ok(meta) => Ok(meta.verified),
            Err(e @ ClientError::ReplayMiss { .. }) => Err(e),
            Err(e) => {
                self.note(format!("verification lookup failed for {address}: {e}"));
                Ok(false)
            }
        }
    }

    pub fn contract_meta(&self, address: &Address) -> Result<ContractMeta, ClientError> {
        let v = self.call(
            Service::Explorer,
            "contract_meta",
            json!({"address": address.to_string()}),
        )?;
        let ctx = "contract_meta";
        let verified = rpc::field(&v, "verified", ctx)?
            .as_bool()
            .ok_or_else(|| ClientError::Malformed {
                context: ctx.into(),
                message: "verified not a bool".into(),
            })?;
        let label = match v.get("label") {
            Some(Value::String(s)) => Some(s.clone()),
            _ => None,
        };
        Ok(ContractMeta { verified, label })
    }

    /// Incoming and outgoing native transfers of an account, explorer
    /// order preserved.
    pub fn account_transfers(&self, address: &Address) -> Result<Vec<TransferView>, ClientError> {
        let v = self.call(
            Service::Explorer,
            "account_transfers",
            json!({"address": address.to_string()}),
        )?;
        let ctx = "account_transfers";
        let rows = v.as_array().ok_or_else(|| ClientError::Malformed {
            context: ctx.into(),
            message: "result not an array".into(),
        })?;
        rows.iter()
            .map(|row| {
                Ok(TransferView {
                    from: rpc::address(rpc::field(row, "from", ctx)?, "transfer.from")?,
                    to: rpc::address(rpc::field(row, "to", ctx)?, "transfer.to")?,
                    block: rpc::quantity_u64(rpc::field(row, "block", ctx)?, "transfer.block")?,
                    index: rpc::quantity_u64(rpc::field(row, "index", ctx)?, "transfer.index")?
                        as u32,
                    value: rpc::quantity_u128(rpc::field(row, "value", ctx)?, "transfer.value")?,
                })
            })
            .collect()
    }

    /// Distinct externally owned senders that called `address` within the
    /// block window, as reported by the explorer.
    pub fn unique_callers(
        &self,
        address: &Address,
        from_block: u64,
        to_block: u64,
    ) -> Result<u32, ClientError> {
        let v = self.call(
            Service::Explorer,
            "account_callers",
            json!({
                "address": address.to_string(),
                "from_block": from_block,
                "to_block": to_block,
            }),
        )?;
        let rows = v.as_array().ok_or_else(|| ClientError::Malformed {
            context: "account_callers".into(),
            message: "result not an array".into(),
        })?;
        let mut unique = std::collections::BTreeSet::new();
        for row in rows {
            unique.insert(rpc::address(row, "account_callers[]")?);
        }
        Ok(unique.len() as u32)
    }

    // -- signature resolver ------------------------------------------------

    /// First consult the in-process memo, then the backend. Whatever comes
    /// back is validated: a signature whose keccak-4 differs from the
    /// queried selector is discarded with a diagnostic. Both hits and
    /// misses are memoized, so one selector costs at most one backend trip
    /// per process.
    pub fn resolve_selector(&self, selector: Selector) -> Result<Option<String>, ClientError> {
        if let Some(hit) = self.selector_memo.lock().expect("memo lock").get(&selector) {
            return Ok(hit.clone());
        }
        let outcome = self.call(
            Service::Sigdb,
            "resolve",
            json!({"selector": selector.to_string()}),
        );
        let resolved = match outcome {
            Ok(Value::Null) => None,
            Ok(Value::String(sig)) => {
                if selector_of(&sig) == selector.0 {
                    Some(sig)
                } else {
                    self.note(format!("resolver returned {sig} which does not hash to {selector}"));
                    None
                }
            }
            Ok(other) => {
                return Err(ClientError::Malformed {
                    context: "resolve".into(),
                    message: format!("expected string or null, got {other}"),
                })
            }
            Err(e @ ClientError::ReplayMiss { .. }) => return Err(e),
            Err(e) => {
                self.note(format!("selector resolution failed for {selector}: {e}"));
                None
            }
        };
        self.selector_memo.lock().expect("memo lock").insert(selector, resolved.clone());
        Ok(resolved)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractMeta {
    pub verified: bool,
    pub label: Option<String>,
}

/// Native-value transfer row from the explorer.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferView {
    pub from: Address,
    pub to: Address,
    pub block: u64,
    pub index: u32,
    pub value: u128,
}

impl fundsource::FundingGraphProvider for ExternalClient {
    /// Earliest value-bearing incoming transfer, by (block, index).
    fn earliest_incoming_funder(
        &self,
        address: &Address,
    ) -> Result<Option<Address>, fundsource::ProviderError> {
        let transfers = self
            .account_transfers(address)
            .map_err(|e| fundsource::ProviderError(e.to_string()))?;
        Ok(transfers
            .iter()
            .filter(|t| t.to == *address && t.value > 0)
            .min_by_key(|t| (t.block, t.index))
            .map(|t| t.from))
    }
}

impl pscft::SignatureResolver for ExternalClient {
    fn resolve_selector(&self, selector: Selector) -> Result<Option<String>, pscft::ResolveError> {
        ExternalClient::resolve_selector(self, selector)
            .map_err(|e| pscft::ResolveError(e.to_string()))
    }
}

impl pscft::TargetLabeler for ExternalClient {
    fn label_target(&self, address: Address) -> Result<Option<String>, pscft::ResolveError> {
        self.contract_meta(&address)
            .map(|m| m.label)
            .map_err(|e| pscft::ResolveError(e.to_string()))
    }
}
