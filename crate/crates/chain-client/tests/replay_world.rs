//! Replay-mode behaviour against a hand-recorded provider snapshot: the
//! deployment watcher, the explorer-backed lookups, and the funding walk
//! all run with zero network access and must do so deterministically.

use chain_client::{
    build_benign_candidates, derive_contract_address, watch_blocks, BenignCandidate, ClientError,
    DeploymentEvent, ExternalClient, RequestKey, RetryPolicy, Service, SnapshotStore,
};
use evm_lift::asm::dispatcher_fixture;
use evm_lift::opcode::Opcode;
use evm_lift::types::{Address, Selector};
use fundsource::{trace_fund_source, AddressLabelDB, FundSourceCategory};
use serde_json::{json, Value};

const CREATOR_A: &str = "0xaaaa00000000000000000000000000000000aa01";
const CREATOR_B: &str = "0xbbbb00000000000000000000000000000000bb02";
const RECIPIENT: &str = "0xdddd00000000000000000000000000000000dd04";
const DEPLOYED_A: &str = "0x000000000000000000000000000000000000cafe";
const DEPLOYED_C: &str = "0x000000000000000000000000000000000000d0d0";

const HASH_C0: &str = "0xc0c0c0c0c0c0c0c0c0c0c0c0c0c0c0c0c0c0c0c0c0c0c0c0c0c0c0c0c0c0c0c0";
const HASH_C2: &str = "0xc2c2c2c2c2c2c2c2c2c2c2c2c2c2c2c2c2c2c2c2c2c2c2c2c2c2c2c2c2c2c2c2";
const HASH_T1: &str = "0x1111111111111111111111111111111111111111111111111111111111111111";
const HASH_R0: &str = "0xe0e0e0e0e0e0e0e0e0e0e0e0e0e0e0e0e0e0e0e0e0e0e0e0e0e0e0e0e0e0e0e0";
const HASH_R1: &str = "0xe1e1e1e1e1e1e1e1e1e1e1e1e1e1e1e1e1e1e1e1e1e1e1e1e1e1e1e1e1e1e1e1";
const HASH_R2: &str = "0xe2e2e2e2e2e2e2e2e2e2e2e2e2e2e2e2e2e2e2e2e2e2e2e2e2e2e2e2e2e2e2e2";

fn addr(s: &str) -> Address {
    s.parse().expect("fixture address")
}

fn record(store: &mut SnapshotStore, service: Service, method: &str, params: Value, resp: Value) {
    let key = RequestKey::new(service, method, params);
    store.record(key, resp).expect("record fixture");
}

fn rpc_block(store: &mut SnapshotStore, number: u64, response: Value) {
    record(
        store,
        Service::Rpc,
        "eth_getBlockByNumber",
        json!([format!("0x{number:x}"), true]),
        response,
    );
}

fn rpc_receipt(store: &mut SnapshotStore, hash: &str, response: Value) {
    record(store, Service::Rpc, "eth_getTransactionReceipt", json!([hash]), response);
}

/// Three blocks: 100 holds two creations sandwiching a plain transfer and
/// listed out of order, 101 is unavailable, 102 holds a reverted creation,
/// a creation without a receipt, and a good one.
fn watch_world() -> SnapshotStore {
    let mut store = SnapshotStore::in_memory();
    rpc_block(
        &mut store,
        100,
        json!({
            "number": "0x64",
            "timestamp": "0x64b8f200",
            "transactions": [
                {
                    "hash": HASH_C2,
                    "from": CREATOR_B,
                    "to": null,
                    "nonce": "0x7",
                    "value": "0xde0b6b3a7640000",
                    "input": "0x6003600455",
                    "transactionIndex": "0x2"
                },
                {
                    "hash": HASH_C0,
                    "from": CREATOR_A,
                    "to": null,
                    "nonce": "0x0",
                    "value": "0x0",
                    "input": "0x60016002",
                    "transactionIndex": "0x0"
                },
                {
                    "hash": HASH_T1,
                    "from": CREATOR_A,
                    "to": RECIPIENT,
                    "nonce": "0x3",
                    "value": "0x5",
                    "input": "0x",
                    "transactionIndex": "0x1"
                }
            ]
        }),
    );
    rpc_receipt(
        &mut store,
        HASH_C0,
        json!({"gasUsed": "0x2a9f8", "contractAddress": DEPLOYED_A, "status": "0x1"}),
    );
    rpc_receipt(
        &mut store,
        HASH_C2,
        json!({"gasUsed": "0x186a0", "contractAddress": null, "status": "0x1"}),
    );
    rpc_block(&mut store, 101, Value::Null);
    rpc_block(
        &mut store,
        102,
        json!({
            "number": "0x66",
            "timestamp": "0x64b8f218",
            "transactions": [
                {
                    "hash": HASH_R0,
                    "from": CREATOR_A,
                    "to": null,
                    "nonce": "0x1",
                    "value": "0x0",
                    "input": "0x00",
                    "transactionIndex": "0x0"
                },
                {
                    "hash": HASH_R1,
                    "from": CREATOR_B,
                    "to": null,
                    "nonce": "0x8",
                    "value": "0x0",
                    "input": "0x00",
                    "transactionIndex": "0x1"
                },
                {
                    "hash": HASH_R2,
                    "from": CREATOR_A,
                    "to": null,
                    "nonce": "0x2",
                    "value": "0x0",
                    "input": "0x6005",
                    "transactionIndex": "0x2"
                }
            ]
        }),
    );
    rpc_receipt(
        &mut store,
        HASH_R0,
        json!({"gasUsed": "0x5208", "contractAddress": "0x000000000000000000000000000000000000feed", "status": "0x0"}),
    );
    rpc_receipt(&mut store, HASH_R1, Value::Null);
    rpc_receipt(
        &mut store,
        HASH_R2,
        json!({"gasUsed": "0xabcd", "contractAddress": DEPLOYED_C, "status": "0x1"}),
    );
    store
}

#[test]
fn watch_replays_the_recorded_world() {
    let client = ExternalClient::replay(watch_world());
    let items: Vec<_> = watch_blocks(&client, 100, 102, RetryPolicy::default()).collect();
    assert_eq!(items.len(), 5, "2 events + block gap + receipt gap + 1 event");

    let first = items[0].as_ref().expect("index-0 creation");
    assert_eq!(first.tx_hash, HASH_C0);
    assert_eq!(first.contract_address, addr(DEPLOYED_A));
    assert_eq!(first.creator_address, addr(CREATOR_A));
    assert_eq!((first.block_number, first.tx_index), (100, 0));
    assert_eq!(first.block_timestamp, 0x64b8f200);
    assert_eq!(first.creation_input, vec![0x60, 0x01, 0x60, 0x02]);
    assert_eq!((first.value, first.gas_used, first.nonce), (0, 0x2a9f8, 0));

    let second = items[1].as_ref().expect("index-2 creation");
    assert_eq!(second.tx_hash, HASH_C2);
    assert_eq!(
        second.contract_address,
        derive_contract_address(&addr(CREATOR_B), 7),
        "null contractAddress falls back to sender/nonce derivation"
    );
    assert_eq!((second.block_number, second.tx_index), (100, 2));
    assert_eq!(second.value, 1_000_000_000_000_000_000);

    let gap = items[2].as_ref().expect_err("unavailable block");
    assert_eq!(gap.block, 101);
    assert!(gap.message.contains("not available"), "got: {}", gap.message);

    let gap = items[3].as_ref().expect_err("missing receipt");
    assert_eq!(gap.block, 102);
    assert!(gap.message.contains(HASH_R1), "got: {}", gap.message);

    // the reverted creation produced neither an event nor a gap
    let third = items[4].as_ref().expect("surviving creation in block 102");
    assert_eq!(third.tx_hash, HASH_R2);
    assert_eq!(third.contract_address, addr(DEPLOYED_C));
}

#[test]
fn replay_streams_are_byte_identical() {
    let client = ExternalClient::replay(watch_world());
    let render = || -> String {
        watch_blocks(&client, 100, 102, RetryPolicy::default())
            .map(|item| match item {
                Ok(event) => serde_json::to_string(&event).expect("event json"),
                Err(gap) => format!("gap {} {}", gap.block, gap.message),
            })
            .collect::<Vec<_>>()
            .join("\n")
    };
    let first = render();
    let second = render();
    assert_eq!(first.as_bytes(), second.as_bytes());
    let reparsed: DeploymentEvent =
        serde_json::from_str(first.lines().next().expect("first line")).expect("round trip");
    assert_eq!(reparsed.tx_hash, HASH_C0);
}

#[test]
fn replay_refuses_unrecorded_requests() {
    let client = ExternalClient::replay(SnapshotStore::in_memory());
    let err = client.latest_block_number().expect_err("nothing recorded");
    assert!(
        matches!(&err, ClientError::ReplayMiss { method, .. } if method == "eth_blockNumber"),
        "got: {err}"
    );
}

#[test]
fn selector_resolution_memoizes_and_validates() {
    let transfer = Selector::of_signature("transfer(address,uint256)");
    let approve = Selector::of_signature("approve(address,uint256)");
    let balance_of = Selector::of_signature("balanceOf(address)");

    let mut store = SnapshotStore::in_memory();
    let resolve = |sel: Selector| json!({"selector": sel.to_string()});
    record(
        &mut store,
        Service::Sigdb,
        "resolve",
        resolve(transfer),
        json!("transfer(address,uint256)"),
    );
    // backend answers with a signature that hashes to a different selector
    record(&mut store, Service::Sigdb, "resolve", resolve(approve), json!("mint(address)"));
    record(&mut store, Service::Sigdb, "resolve", resolve(balance_of), Value::Null);

    let client = ExternalClient::replay(store);
    assert_eq!(client.consultations(), 0);

    assert_eq!(
        client.resolve_selector(transfer).expect("recorded"),
        Some("transfer(address,uint256)".to_string())
    );
    assert_eq!(client.consultations(), 1);
    client.resolve_selector(transfer).expect("memoized");
    assert_eq!(client.consultations(), 1, "second lookup must not consult the backend");

    assert_eq!(client.resolve_selector(approve).expect("recorded"), None, "lying backend");
    let notes = client.drain_diagnostics();
    assert!(
        notes.iter().any(|n| n.contains(&approve.to_string())),
        "rejection must be diagnosed: {notes:?}"
    );
    client.resolve_selector(approve).expect("memoized miss");
    assert_eq!(client.consultations(), 2, "negative results are memoized too");

    assert_eq!(client.resolve_selector(balance_of).expect("recorded"), None);
}

#[test]
fn verification_status_comes_from_explorer_and_misses_stay_hard() {
    let verified = addr("0x1230000000000000000000000000000000000123");
    let unverified = addr("0x4560000000000000000000000000000000000456");
    let unknown = addr("0x7890000000000000000000000000000000000789");

    let mut store = SnapshotStore::in_memory();
    let meta = |a: &Address| json!({"address": a.to_string()});
    record(
        &mut store,
        Service::Explorer,
        "contract_meta",
        meta(&verified),
        json!({"verified": true, "label": "UniswapV3"}),
    );
    record(
        &mut store,
        Service::Explorer,
        "contract_meta",
        meta(&unverified),
        json!({"verified": false, "label": null}),
    );

    let client = ExternalClient::replay(store);
    assert!(client.get_verification_status(&verified).expect("recorded"));
    assert!(!client.get_verification_status(&unverified).expect("recorded"));
    // outside replay a failed lookup degrades to false; in replay it stays
    // an error so a half-recorded snapshot cannot silently skew features
    let err = client.get_verification_status(&unknown).expect_err("not recorded");
    assert!(matches!(err, ClientError::ReplayMiss { .. }), "got: {err}");

    use pscft::TargetLabeler;
    assert_eq!(client.label_target(verified).expect("labeler"), Some("UniswapV3".to_string()));
    assert_eq!(client.label_target(unverified).expect("labeler"), None);
}

#[test]
fn funding_walk_reads_the_transfer_ledger() {
    let deployer = addr("0x9990000000000000000000000000000000000999");
    let late_funder = addr("0x1110000000000000000000000000000000000111");
    let dust_sender = addr("0x2220000000000000000000000000000000000222");
    let exchange = addr("0x3330000000000000000000000000000000000333");

    let mut store = SnapshotStore::in_memory();
    record(
        &mut store,
        Service::Explorer,
        "account_transfers",
        json!({"address": deployer.to_string()}),
        json!([
            {"from": late_funder.to_string(), "to": deployer.to_string(),
             "block": "0x10", "index": "0x2", "value": "0x5"},
            {"from": dust_sender.to_string(), "to": deployer.to_string(),
             "block": "0xf", "index": "0x0", "value": "0x0"},
            {"from": exchange.to_string(), "to": deployer.to_string(),
             "block": "0xf", "index": "0x5", "value": "0x1"},
            {"from": deployer.to_string(), "to": late_funder.to_string(),
             "block": "0x11", "index": "0x0", "value": "0x3"}
        ]),
    );

    let client = ExternalClient::replay(store);

    use fundsource::FundingGraphProvider;
    assert_eq!(
        client.earliest_incoming_funder(&deployer).expect("recorded"),
        Some(exchange),
        "zero-value and outgoing rows must not win"
    );

    let mut labels = AddressLabelDB::new();
    labels.insert(exchange, "Kraken 4", FundSourceCategory::Safe);
    let trace = trace_fund_source(deployer, &client, &labels, 3);
    assert_eq!(trace.category, FundSourceCategory::Safe);
    assert_eq!(trace.path, vec![exchange]);
    assert_eq!(trace.matched, Some((exchange, "Kraken 4".to_string())));
    assert_eq!(trace.diagnostic, None);
}

#[test]
fn benign_candidates_apply_caller_and_standard_filters() {
    let kept = addr("0xaaa000000000000000000000000000000000a001");
    let quiet = addr("0xaaa000000000000000000000000000000000a002");
    let token = addr("0xaaa000000000000000000000000000000000a003");

    let event = |address: Address, hash: &str| DeploymentEvent {
        contract_address: address,
        creator_address: addr(CREATOR_A),
        tx_hash: hash.to_string(),
        block_number: 100,
        tx_index: 0,
        block_timestamp: 0x64b8f200,
        creation_input: vec![],
        value: 0,
        gas_used: 21_000,
        nonce: 0,
    };
    let events = [event(kept, HASH_C0), event(quiet, HASH_C2), event(token, HASH_R2)];

    let callers = |n: usize| -> Value {
        let mut rows: Vec<String> =
            (0..n).map(|i| format!("0x{:040x}", 0xf000 + i as u64)).collect();
        if let Some(first) = rows.first().cloned() {
            rows.push(first); // duplicate caller must not inflate the count
        }
        json!(rows)
    };
    let (custom_code, _) = dispatcher_fixture(&[("ping()", vec![Opcode::Stop])]);
    let (erc20_code, _) = dispatcher_fixture(&[
        ("totalSupply()", vec![Opcode::Stop]),
        ("balanceOf(address)", vec![Opcode::Stop]),
        ("transfer(address,uint256)", vec![Opcode::Stop]),
        ("transferFrom(address,address,uint256)", vec![Opcode::Stop]),
        ("approve(address,uint256)", vec![Opcode::Stop]),
        ("allowance(address,address)", vec![Opcode::Stop]),
    ]);

    let mut store = SnapshotStore::in_memory();
    let window = |a: &Address| {
        json!({"address": a.to_string(), "from_block": 100u64, "to_block": 200u64})
    };
    record(&mut store, Service::Explorer, "account_callers", window(&kept), callers(10));
    record(&mut store, Service::Explorer, "account_callers", window(&quiet), callers(3));
    record(&mut store, Service::Explorer, "account_callers", window(&token), callers(12));
    let code_params = |a: &Address| json!([a.to_string(), "latest"]);
    record(
        &mut store,
        Service::Rpc,
        "eth_getCode",
        code_params(&kept),
        json!(format!("0x{}", hex::encode(&custom_code))),
    );
    // no code recorded for `quiet`: fetching it would be a replay miss, so
    // passing proves the caller threshold short-circuits the code probe
    record(
        &mut store,
        Service::Rpc,
        "eth_getCode",
        code_params(&token),
        json!(format!("0x{}", hex::encode(&erc20_code))),
    );

    let client = ExternalClient::replay(store);
    let picked = build_benign_candidates(&client, &events, 10, 100).expect("replayed");
    assert_eq!(picked, vec![BenignCandidate { address: kept, unique_callers: 10 }]);
}

#[test]
fn snapshots_round_trip_through_disk() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("session.snapshot");

    {
        let mut store = SnapshotStore::open_recording(&path).expect("create");
        rpc_block(&mut store, 7, json!({"number": "0x7", "timestamp": "0x1", "transactions": []}));
    }

    let client = ExternalClient::replay(SnapshotStore::load(&path).expect("reload"));
    let block = client.block_by_number(7).expect("recorded").expect("present");
    assert_eq!((block.number, block.timestamp), (7, 1));
    assert!(block.transactions.is_empty());

    // a tampered response no longer matches its stored digest
    let text = std::fs::read_to_string(&path).expect("read back");
    let tampered = text.replace("\"0x7\"", "\"0x8\"");
    assert_ne!(text, tampered, "fixture must actually change");
    std::fs::write(&path, tampered).expect("rewrite");
    let err = SnapshotStore::load(&path).expect_err("digest check");
    let shown = err.to_string();
    assert!(shown.contains("key") || shown.contains("digest"), "got: {shown}");
}
