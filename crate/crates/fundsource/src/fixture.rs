//! Offline transaction graphs for tests and replay.
//!
//! Line grammar, one transfer per line:
//!
//! ```text
//! <funder hex> -> <fundee hex> block=<n> index=<n> value=<wei>
//! ```
//!
//! `#` comments and blank lines are skipped. Zero-value transfers are kept
//! in the record but never answer a funder query.

use std::collections::BTreeMap;
use std::path::Path;

use evm_lift::types::Address;

use crate::trace::FundingGraphProvider;
use crate::{FundSourceError, ProviderError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transfer {
    pub funder: Address,
    pub fundee: Address,
    pub block: u64,
    pub index: u32,
    pub value: u128,
}

#[derive(Debug, Default, Clone)]
pub struct FixtureGraph {
    transfers: Vec<Transfer>,
    // earliest value-bearing inflow per fundee; first line wins on a
    // duplicate (block, index) key
    earliest: BTreeMap<Address, (u64, u32, Address)>,
}

impl FixtureGraph {
    pub fn from_transfers(transfers: Vec<Transfer>) -> FixtureGraph {
        let mut earliest: BTreeMap<Address, (u64, u32, Address)> = BTreeMap::new();
        for t in &transfers {
            if t.value == 0 {
                continue;
            }
            match earliest.get(&t.fundee) {
                Some(&(b, i, _)) if (b, i) <= (t.block, t.index) => {}
                _ => {
                    earliest.insert(t.fundee, (t.block, t.index, t.funder));
                }
            }
        }
        FixtureGraph { transfers, earliest }
    }

    pub fn parse(text: &str) -> Result<FixtureGraph, FundSourceError> {
        let mut transfers = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            transfers.push(parse_line(line, i + 1)?);
        }
        Ok(FixtureGraph::from_transfers(transfers))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<FixtureGraph, FundSourceError> {
        let text = std::fs::read_to_string(path)?;
        FixtureGraph::parse(&text)
    }

    pub fn transfers(&self) -> &[Transfer] {
        &self.transfers
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for t in &self.transfers {
            out.push_str(&format!(
                "{} -> {} block={} index={} value={}\n",
                t.funder, t.fundee, t.block, t.index, t.value
            ));
        }
        out
    }
}

fn parse_line(line: &str, lineno: usize) -> Result<Transfer, FundSourceError> {
    let bad = |msg: String| FundSourceError::parse(lineno, msg);
    let mut parts = line.split_whitespace();
    let funder = parts.next().ok_or_else(|| bad("missing funder".into()))?;
    let arrow = parts.next().ok_or_else(|| bad("missing ->".into()))?;
    if arrow != "->" {
        return Err(bad(format!("expected `->`, got `{arrow}`")));
    }
    let fundee = parts.next().ok_or_else(|| bad("missing fundee".into()))?;
    let funder: Address = funder
        .parse()
        .map_err(|_| bad(format!("bad funder address `{funder}`")))?;
    let fundee: Address = fundee
        .parse()
        .map_err(|_| bad(format!("bad fundee address `{fundee}`")))?;

    let mut block = None;
    let mut index = None;
    let mut value = None;
    for attr in parts {
        let (key, val) = attr
            .split_once('=')
            .ok_or_else(|| bad(format!("expected key=value, got `{attr}`")))?;
        match key {
            "block" => block = Some(val.parse::<u64>().map_err(|_| bad(format!("bad block `{val}`")))?),
            "index" => index = Some(val.parse::<u32>().map_err(|_| bad(format!("bad index `{val}`")))?),
            "value" => value = Some(val.parse::<u128>().map_err(|_| bad(format!("bad value `{val}`")))?),
            other => return Err(bad(format!("unknown attribute `{other}`"))),
        }
    }
    Ok(Transfer {
        funder,
        fundee,
        block: block.ok_or_else(|| bad("missing block=".into()))?,
        index: index.ok_or_else(|| bad("missing index=".into()))?,
        value: value.ok_or_else(|| bad("missing value=".into()))?,
    })
}

impl FundingGraphProvider for FixtureGraph {
    fn earliest_incoming_funder(&self, address: &Address) -> Result<Option<Address>, ProviderError> {
        Ok(self.earliest.get(address).map(|&(_, _, funder)| funder))
    }
}
