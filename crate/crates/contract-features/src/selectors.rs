//! Signature lists driving call classification. Both lists are plain text
//! config (one signature per line) so operators can extend them without a
//! rebuild.

use std::collections::BTreeMap;
use std::path::Path;

use evm_lift::types::Selector;

use crate::FeatureError;

/// Named signature set keyed by 4-byte selector.
#[derive(Debug, Clone, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SelectorSet {
    entries: BTreeMap<Selector, String>,
}

impl SelectorSet {
    pub fn from_signatures<I, S>(signatures: I) -> SelectorSet
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut set = SelectorSet::default();
        for sig in signatures {
            set.add(sig);
        }
        set
    }

    pub fn add(&mut self, signature: impl Into<String>) -> Selector {
        let signature = signature.into();
        let sel = Selector::of_signature(&signature);
        self.entries.insert(sel, signature);
        sel
    }

    pub fn contains(&self, selector: &Selector) -> bool {
        self.entries.contains_key(selector)
    }

    pub fn signature_of(&self, selector: &Selector) -> Option<&str> {
        self.entries.get(selector).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// One signature per line; `#` starts a comment; blanks skipped.
    pub fn parse(text: &str) -> Result<SelectorSet, FeatureError> {
        let mut set = SelectorSet::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if !line.contains('(') || !line.ends_with(')') {
                return Err(FeatureError::Parse {
                    line: i + 1,
                    message: format!("not a function signature: {line}"),
                });
            }
            set.add(line);
        }
        Ok(set)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<SelectorSet, FeatureError> {
        SelectorSet::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for sig in self.entries.values() {
            out.push_str(sig);
            out.push('\n');
        }
        out
    }
}

/// The two lists implementation-feature extraction needs: which public
/// selectors count as flash-loan callbacks, and which outbound call
/// selectors count as token interactions.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SelectorConfig {
    pub flashloan_callbacks: SelectorSet,
    pub token_calls: SelectorSet,
}

impl Default for SelectorConfig {
    fn default() -> SelectorConfig {
        SelectorConfig {
            flashloan_callbacks: SelectorSet::from_signatures(FLASHLOAN_CALLBACK_SIGNATURES),
            token_calls: SelectorSet::from_signatures(TOKEN_CALL_SIGNATURES),
        }
    }
}

/// Receiver-side entry points the major lending pools and pair contracts
/// invoke on the borrower during a flash loan.
pub const FLASHLOAN_CALLBACK_SIGNATURES: [&str; 7] = [
    "uniswapV2Call(address,uint256,uint256,bytes)",
    "uniswapV3FlashCallback(uint256,uint256,bytes)",
    "pancakeCall(address,uint256,uint256,bytes)",
    "executeOperation(address[],uint256[],uint256[],address,bytes)",
    "executeOperation(address,uint256,uint256,address,bytes)",
    "onFlashLoan(address,address,uint256,uint256,bytes)",
    "receiveFlashLoan(address[],uint256[],uint256[],bytes)",
];

/// Token-standard methods plus the common router/pair swap family.
pub const TOKEN_CALL_SIGNATURES: [&str; 12] = [
    "transfer(address,uint256)",
    "transferFrom(address,address,uint256)",
    "approve(address,uint256)",
    "balanceOf(address)",
    "mint(address,uint256)",
    "burn(uint256)",
    "swap(uint256,uint256,address,bytes)",
    "swapExactTokensForTokens(uint256,uint256,address[],address,uint256)",
    "swapTokensForExactTokens(uint256,uint256,address[],address,uint256)",
    "swapExactETHForTokens(uint256,address[],address,uint256)",
    "swapExactTokensForETH(uint256,uint256,address[],address,uint256)",
    "deposit()",
];
