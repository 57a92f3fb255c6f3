//! Parsing of node wire responses into plain views. Quantities arrive as
//! 0x-prefixed hex strings; data as 0x-prefixed hex bytes.

use evm_lift::types::Address;
use serde_json::Value;

use crate::ClientError;

pub fn quantity_u64(v: &Value, field: &str) -> Result<u64, ClientError> {
    let s = v.as_str().ok_or_else(|| malformed(field, "quantity not a string"))?;
    let h = s.strip_prefix("0x").ok_or_else(|| malformed(field, "missing 0x"))?;
    u64::from_str_radix(h, 16).map_err(|e| malformed(field, &e.to_string()))
}

pub fn quantity_u128(v: &Value, field: &str) -> Result<u128, ClientError> {
    let s = v.as_str().ok_or_else(|| malformed(field, "quantity not a string"))?;
    let h = s.strip_prefix("0x").ok_or_else(|| malformed(field, "missing 0x"))?;
    u128::from_str_radix(h, 16).map_err(|e| malformed(field, &e.to_string()))
}

pub fn data_bytes(v: &Value, field: &str) -> Result<Vec<u8>, ClientError> {
    let s = v.as_str().ok_or_else(|| malformed(field, "data not a string"))?;
    let h = s.strip_prefix("0x").ok_or_else(|| malformed(field, "missing 0x"))?;
    hex::decode(h).map_err(|e| malformed(field, &e.to_string()))
}

pub fn address(v: &Value, field: &str) -> Result<Address, ClientError> {
    let s = v.as_str().ok_or_else(|| malformed(field, "address not a string"))?;
    s.parse().map_err(|_| malformed(field, "bad address"))
}

pub fn opt_address(v: &Value, field: &str) -> Result<Option<Address>, ClientError> {
    if v.is_null() {
        return Ok(None);
    }
    address(v, field).map(Some)
}

fn malformed(field: &str, message: &str) -> ClientError {
    ClientError::Malformed { context: field.to_string(), message: message.to_string() }
}

pub fn field<'a>(v: &'a Value, name: &str, context: &str) -> Result<&'a Value, ClientError> {
    v.get(name).ok_or_else(|| ClientError::Malformed {
        context: context.to_string(),
        message: format!("missing field {name}"),
    })
}

/// One transaction of a fetched block, creation or not.
#[derive(Debug, Clone, PartialEq)]
pub struct TxView {
    pub hash: String,
    pub from: Address,
    pub to: Option<Address>,
    pub nonce: u64,
    pub value: u128,
    pub input: Vec<u8>,
    pub tx_index: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockView {
    pub number: u64,
    pub timestamp: u64,
    pub transactions: Vec<TxView>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReceiptView {
    pub gas_used: u64,
    pub contract_address: Option<Address>,
    pub status_ok: bool,
}

pub fn parse_block(v: &Value) -> Result<BlockView, ClientError> {
    let ctx = "eth_getBlockByNumber";
    let number = quantity_u64(field(v, "number", ctx)?, "block.number")?;
    let timestamp = quantity_u64(field(v, "timestamp", ctx)?, "block.timestamp")?;
    let raw_txs = field(v, "transactions", ctx)?
        .as_array()
        .ok_or_else(|| malformed("block.transactions", "not an array"))?;
    let mut transactions = Vec::with_capacity(raw_txs.len());
    for (i, tx) in raw_txs.iter().enumerate() {
        transactions.push(parse_tx(tx, i as u32)?);
    }
    transactions.sort_by_key(|t| t.tx_index);
    Ok(BlockView { number, timestamp, transactions })
}

fn parse_tx(v: &Value, position: u32) -> Result<TxView, ClientError> {
    let ctx = "block.transactions[]";
    let tx_index = match v.get("transactionIndex") {
        Some(idx) if !idx.is_null() => quantity_u64(idx, "tx.transactionIndex")? as u32,
        _ => position,
    };
    Ok(TxView {
        hash: field(v, "hash", ctx)?
            .as_str()
            .ok_or_else(|| malformed("tx.hash", "not a string"))?
            .to_string(),
        from: address(field(v, "from", ctx)?, "tx.from")?,
        to: opt_address(v.get("to").unwrap_or(&Value::Null), "tx.to")?,
        nonce: quantity_u64(field(v, "nonce", ctx)?, "tx.nonce")?,
        value: quantity_u128(field(v, "value", ctx)?, "tx.value")?,
        input: data_bytes(field(v, "input", ctx)?, "tx.input")?,
        tx_index,
    })
}

pub fn parse_receipt(v: &Value) -> Result<ReceiptView, ClientError> {
    let ctx = "eth_getTransactionReceipt";
    let status_ok = match v.get("status") {
        Some(s) if !s.is_null() => quantity_u64(s, "receipt.status")? == 1,
        _ => true, // pre-Byzantium receipts carry no status
    };
    Ok(ReceiptView {
        gas_used: quantity_u64(field(v, "gasUsed", ctx)?, "receipt.gasUsed")?,
        contract_address: opt_address(
            v.get("contractAddress").unwrap_or(&Value::Null),
            "receipt.contractAddress",
        )?,
        status_ok,
    })
}

/// Minimal lowercase hex quantity, the canonical wire form.
pub fn to_quantity(n: u64) -> String {
    format!("0x{n:x}")
}
