use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::LiftError;

macro_rules! hex_serde {
    ($mod_name:ident, $n:literal) => {
        mod $mod_name {
            use serde::{Deserialize, Deserializer, Serializer};

            pub fn serialize<S: Serializer>(v: &[u8; $n], s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(&format!("0x{}", hex::encode(v)))
            }

            pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[u8; $n], D::Error> {
                let raw = String::deserialize(d)?;
                let h = raw.strip_prefix("0x").unwrap_or(&raw);
                let bytes = hex::decode(h).map_err(serde::de::Error::custom)?;
                bytes
                    .try_into()
                    .map_err(|_| serde::de::Error::custom(concat!("expected ", $n, " bytes")))
            }
        }
    };
}

hex_serde!(hex_bytes20, 20);
hex_serde!(hex_bytes4, 4);

/// A 20-byte account address.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Address(#[serde(with = "hex_bytes20")] pub [u8; 20]);

impl Address {
    pub const ZERO: Address = Address([0u8; 20]);

    pub fn as_bytes(&self) -> &[u8; 20] {
        &self.0
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{}", hex::encode(self.0))
    }
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Address {
    type Err = LiftError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let h = s.strip_prefix("0x").unwrap_or(s);
        let bytes = hex::decode(h).map_err(|_| LiftError::BadAddress(s.to_string()))?;
        let arr: [u8; 20] = bytes
            .try_into()
            .map_err(|_| LiftError::BadAddress(s.to_string()))?;
        Ok(Address(arr))
    }
}

/// A 4-byte ABI function selector.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Selector(#[serde(with = "hex_bytes4")] pub [u8; 4]);

impl Selector {
    /// Selector of a canonical signature such as `transfer(address,uint256)`.
    pub fn of_signature(sig: &str) -> Selector {
        Selector(crate::keccak::selector_of(sig))
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{}", hex::encode(self.0))
    }
}

impl fmt::Debug for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Selector {
    type Err = LiftError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let h = s.strip_prefix("0x").unwrap_or(s);
        let bytes = hex::decode(h).map_err(|_| LiftError::BadSelector(s.to_string()))?;
        let arr: [u8; 4] = bytes
            .try_into()
            .map_err(|_| LiftError::BadSelector(s.to_string()))?;
        Ok(Selector(arr))
    }
}

/// Decodes bytecode given either as hex text (optional 0x prefix, optional
/// whitespace) or as raw bytes. Content that decodes cleanly as hex is
/// treated as hex; anything else is returned untouched.
pub fn parse_bytecode(input: &[u8]) -> Vec<u8> {
    let Ok(text) = std::str::from_utf8(input) else {
        return input.to_vec();
    };
    let compact: String = text.split_whitespace().collect();
    let h = compact.strip_prefix("0x").unwrap_or(&compact);
    if h.is_empty() {
        return if compact.starts_with("0x") { Vec::new() } else { input.to_vec() };
    }
    match hex::decode(h) {
        Ok(bytes) => bytes,
        Err(_) => input.to_vec(),
    }
}
