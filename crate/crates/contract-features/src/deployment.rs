//! Features read off the creation transaction itself, before a single
//! byte of the contract executes.

use evm_lift::types::Address;
use fundsource::FundSourceCategory;

use crate::FeatureError;

/// The slice of a transaction the extractor needs. Chain clients map
/// their wire types into this, so the extraction logic never sees RPC
/// details.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CreationTx {
    pub from: Address,
    /// `None` is what makes it a creation
    pub to: Option<Address>,
    pub nonce: u64,
    pub value: u128,
    #[serde(with = "hex_bytes")]
    pub input: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CreationReceipt {
    pub gas_used: u64,
    pub contract_address: Option<Address>,
}

#[derive(Debug, Clone, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DeploymentFeatures {
    /// transactions the creator sent before this one
    pub nonce: u64,
    pub fund_source: FundSourceCategory,
    /// native value attached to the deployment
    pub value_flag: bool,
    pub input_data_length: u64,
    pub gas_used: u64,
    pub verified: bool,
}

pub fn extract_deployment_features(
    tx: &CreationTx,
    receipt: &CreationReceipt,
    verified: bool,
    fund_source: FundSourceCategory,
) -> Result<DeploymentFeatures, FeatureError> {
    if tx.to.is_some() {
        return Err(FeatureError::NotADeployment);
    }
    if receipt.gas_used == 0 {
        // a mined creation always burns at least the intrinsic gas
        return Err(FeatureError::BadReceipt("gas_used is zero".into()));
    }
    Ok(DeploymentFeatures {
        nonce: tx.nonce,
        fund_source,
        value_flag: tx.value > 0,
        input_data_length: tx.input.len() as u64,
        gas_used: receipt.gas_used,
        verified,
    })
}

/// Hex string (de)serialization for byte payloads, matching how the rest
/// of the toolchain writes bytecode.
pub(crate) mod hex_bytes {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("0x{}", hex::encode(bytes)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let text = String::deserialize(d)?;
        hex::decode(text.strip_prefix("0x").unwrap_or(&text)).map_err(serde::de::Error::custom)
    }
}
