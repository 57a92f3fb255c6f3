//! Address label database: known on-chain entities and the funding
//! category they imply.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use evm_lift::types::Address;
use serde::{Deserialize, Serialize};

use crate::FundSourceError;

/// Where a deployer's money ultimately came from. `Unknown` is the unique
/// fallback for exhausted, cyclic, or unresolvable walks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FundSourceCategory {
    Safe,
    Anonymous,
    Bridge,
    #[default]
    Unknown,
}

impl FundSourceCategory {
    pub const ALL: [FundSourceCategory; 4] = [
        FundSourceCategory::Safe,
        FundSourceCategory::Anonymous,
        FundSourceCategory::Bridge,
        FundSourceCategory::Unknown,
    ];

    /// Position in the one-hot feature encoding. Stable: feature vectors
    /// and trained models depend on this order.
    pub fn index(self) -> usize {
        match self {
            FundSourceCategory::Safe => 0,
            FundSourceCategory::Anonymous => 1,
            FundSourceCategory::Bridge => 2,
            FundSourceCategory::Unknown => 3,
        }
    }
}

impl fmt::Display for FundSourceCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FundSourceCategory::Safe => "Safe",
            FundSourceCategory::Anonymous => "Anonymous",
            FundSourceCategory::Bridge => "Bridge",
            FundSourceCategory::Unknown => "Unknown",
        })
    }
}

impl FromStr for FundSourceCategory {
    type Err = FundSourceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "safe" => Ok(FundSourceCategory::Safe),
            "anonymous" => Ok(FundSourceCategory::Anonymous),
            "bridge" => Ok(FundSourceCategory::Bridge),
            "unknown" => Ok(FundSourceCategory::Unknown),
            other => Err(FundSourceError::BadCategory(other.to_string())),
        }
    }
}

/// Map from address to (label text, category). File format: one entry per
/// line, `<20-byte hex>,<label>,<category>`, `#` comments and blank lines
/// skipped. Addresses are unique; a duplicate is a parse error.
#[derive(Debug, Default, Clone)]
pub struct AddressLabelDB {
    entries: BTreeMap<Address, (String, FundSourceCategory)>,
}

impl AddressLabelDB {
    pub fn new() -> AddressLabelDB {
        AddressLabelDB::default()
    }

    pub fn insert(&mut self, addr: Address, label: impl Into<String>, category: FundSourceCategory) {
        self.entries.insert(addr, (label.into(), category));
    }

    /// Exact-match lookup. Hex case never matters: `Address` stores raw
    /// bytes, so any textual form normalizes before reaching here.
    pub fn label_address(&self, addr: &Address) -> Option<(&str, FundSourceCategory)> {
        self.entries.get(addr).map(|(l, c)| (l.as_str(), *c))
    }

    /// Lookup from a textual address in any hex casing.
    pub fn label_address_str(&self, addr: &str) -> Option<(&str, FundSourceCategory)> {
        let addr: Address = addr.parse().ok()?;
        self.label_address(&addr)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Address, &str, FundSourceCategory)> {
        self.entries.iter().map(|(a, (l, c))| (a, l.as_str(), *c))
    }

    pub fn parse(text: &str) -> Result<AddressLabelDB, FundSourceError> {
        let mut db = AddressLabelDB::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = i + 1;
            let mut parts = line.splitn(3, ',');
            let addr = parts
                .next()
                .ok_or_else(|| FundSourceError::parse(lineno, "missing address"))?;
            let label = parts
                .next()
                .ok_or_else(|| FundSourceError::parse(lineno, "missing label"))?;
            let category = parts
                .next()
                .ok_or_else(|| FundSourceError::parse(lineno, "missing category"))?;
            let addr: Address = addr
                .trim()
                .parse()
                .map_err(|_| FundSourceError::parse(lineno, format!("bad address `{}`", addr.trim())))?;
            let category: FundSourceCategory = category
                .trim()
                .parse()
                .map_err(|_| FundSourceError::parse(lineno, format!("bad category `{}`", category.trim())))?;
            if db.entries.contains_key(&addr) {
                return Err(FundSourceError::parse(lineno, format!("duplicate address {addr}")));
            }
            db.insert(addr, label.trim(), category);
        }
        Ok(db)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<AddressLabelDB, FundSourceError> {
        let text = std::fs::read_to_string(path)?;
        AddressLabelDB::parse(&text)
    }

    /// Serializes back to the line format, sorted by address.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (addr, label, category) in self.iter() {
            out.push_str(&format!("{addr},{label},{category}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MIXER: &str = "0x722122df12d4e14e13ac3b6895a86e84145b6967";

    #[test]
    fn parse_and_lookup() {
        let db = AddressLabelDB::parse(&format!(
            "# known entities\n{MIXER},TornadoCash,Anonymous\n\n0x28c6c06298d514db089934071355e5743bf21d60,Binance,Safe\n"
        ))
        .unwrap();
        assert_eq!(db.len(), 2);
        let (label, cat) = db.label_address_str(MIXER).unwrap();
        assert_eq!(label, "TornadoCash");
        assert_eq!(cat, FundSourceCategory::Anonymous);
    }

    #[test]
    fn lookup_ignores_hex_case() {
        let db = AddressLabelDB::parse(&format!("{MIXER},TornadoCash,Anonymous\n")).unwrap();
        let upper = MIXER.to_uppercase().replace("0X", "0x");
        assert_eq!(db.label_address_str(&upper).map(|(l, _)| l), Some("TornadoCash"));
        assert!(db.label_address_str("0x0000000000000000000000000000000000000001").is_none());
    }

    #[test]
    fn duplicate_address_rejected() {
        let err = AddressLabelDB::parse(&format!("{MIXER},A,Safe\n{MIXER},B,Bridge\n")).unwrap_err();
        assert!(err.to_string().contains("duplicate"));
    }

    #[test]
    fn category_parsing_is_exhaustive_and_case_insensitive() {
        for cat in FundSourceCategory::ALL {
            let round: FundSourceCategory = cat.to_string().parse().unwrap();
            assert_eq!(round, cat);
            let lower: FundSourceCategory = cat.to_string().to_lowercase().parse().unwrap();
            assert_eq!(lower, cat);
        }
        assert!("mixer".parse::<FundSourceCategory>().is_err());
    }

    #[test]
    fn label_with_embedded_commas_survives() {
        // splitn(3) keeps everything after the second comma out of the label,
        // so commas belong to the category field; labels must not contain them
        let db = AddressLabelDB::parse(&format!("{MIXER},Tornado Cash 100 ETH,Anonymous\n")).unwrap();
        assert_eq!(
            db.label_address_str(MIXER).map(|(l, _)| l),
            Some("Tornado Cash 100 ETH")
        );
    }

    #[test]
    fn text_round_trip() {
        let mut db = AddressLabelDB::new();
        db.insert(Address([1; 20]), "Foo", FundSourceCategory::Bridge);
        db.insert(Address([2; 20]), "Bar", FundSourceCategory::Safe);
        let again = AddressLabelDB::parse(&db.to_text()).unwrap();
        assert_eq!(again.to_text(), db.to_text());
    }
}
