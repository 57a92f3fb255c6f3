//! The textual document: one section per function, block statement lines,
//! then flow lines. Byte-identical output for equal inputs, LF endings.
//!
//! ```text
//! function attack:
//! BB_0_0: UniswapV3.flash(...args); InternalFunction_0(...args)
//! BB_0_0 -> BB_0_1
//! BB_0_1: SELFDESTRUCT(...args)
//! ```
//!
//! Block lines come before flow lines within a section; a block with no
//! statements (only the retained entry can be one) emits no block line but
//! still appears in flow lines. A function with no statements anywhere
//! emits only its header.

use std::collections::{BTreeMap, BTreeSet};

use evm_lift::keccak::keccak256;
use serde::{Deserialize, Serialize};

use crate::filter::CallContract;
use crate::PscftError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PscftDocument {
    /// The contract address when known, else a hash of the runtime code.
    pub contract_id: String,
    pub text: String,
    pub tokens: Vec<String>,
}

/// Serializes a filtered, pruned, renamed, annotated contract. Assumes
/// canonical block keys (0..n per function); the keys are printed as the
/// j in BB_i_j verbatim.
pub fn serialize_pscft(contract: &CallContract) -> PscftDocument {
    let mut text = String::new();
    for (i, f) in contract.functions.iter().enumerate() {
        text.push_str(&format!("function {}:\n", f.canonical_name));
        for (j, block) in &f.blocks {
            if block.statements.is_empty() {
                continue;
            }
            let stmts: Vec<String> = block.statements.iter().map(|s| s.render()).collect();
            text.push_str(&format!("BB_{i}_{j}: {}\n", stmts.join("; ")));
        }
        for (j, block) in &f.blocks {
            for k in &block.successors {
                text.push_str(&format!("BB_{i}_{j} -> BB_{i}_{k}\n"));
            }
        }
    }
    let contract_id = match contract.address {
        Some(addr) => addr.to_string(),
        None => format!("code:0x{}", hex_of(&keccak256(&contract.runtime_bytecode))),
    };
    let tokens = tokenize(&text);
    PscftDocument { contract_id, text, tokens }
}

fn hex_of(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Splits document text into the token stream fed to models: identifiers
/// (names, keywords), punctuation `. ( ) : ; ,`, the arrow `->`, and the
/// argument ellipsis `...args` as one token. Whitespace separates.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if text[i..].starts_with("...args") {
            tokens.push("...args".to_string());
            i += "...args".len();
            continue;
        }
        if text[i..].starts_with("->") {
            tokens.push("->".to_string());
            i += 2;
            continue;
        }
        if matches!(c, '.' | '(' | ')' | ':' | ';' | ',') {
            tokens.push(c.to_string());
            i += 1;
            continue;
        }
        let start = i;
        while i < bytes.len() {
            let c = bytes[i] as char;
            if c.is_whitespace() || matches!(c, '.' | '(' | ')' | ':' | ';' | ',') || text[i..].starts_with("->") {
                break;
            }
            i += 1;
        }
        if i == start {
            // unexpected byte; consume it as its own token rather than loop
            i += 1;
        }
        tokens.push(text[start..i].to_string());
    }
    tokens
}

/// A document read back into structure: per function, the statement texts
/// per block and the edge set. Blocks that only appear in flow lines are
/// recorded with no statements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReadFunction {
    pub name: String,
    pub statements: BTreeMap<u32, Vec<String>>,
    pub edges: BTreeSet<(u32, u32)>,
}

/// Parses serializer output. Used by tests to prove the text is a lossless
/// projection of the annotated graph; tolerant of nothing.
pub fn read_pscft(text: &str) -> Result<Vec<ReadFunction>, PscftError> {
    let mut functions: Vec<ReadFunction> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let lineno = n + 1;
        let line = raw.trim_end();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("function ") {
            let name = rest
                .strip_suffix(':')
                .ok_or_else(|| PscftError::parse(lineno, "function header must end with `:`"))?;
            functions.push(ReadFunction {
                name: name.to_string(),
                statements: BTreeMap::new(),
                edges: BTreeSet::new(),
            });
            continue;
        }
        let Some(fidx) = functions.len().checked_sub(1) else {
            return Err(PscftError::parse(lineno, "content before first function header"));
        };
        if let Some((from, to)) = line.split_once(" -> ") {
            let (i1, j1) = parse_block_name(from, lineno)?;
            let (i2, j2) = parse_block_name(to, lineno)?;
            if i1 as usize != fidx || i2 as usize != fidx {
                return Err(PscftError::parse(lineno, "flow line crosses function sections"));
            }
            let f = &mut functions[fidx];
            f.statements.entry(j1).or_default();
            f.statements.entry(j2).or_default();
            if !f.edges.insert((j1, j2)) {
                return Err(PscftError::parse(lineno, "duplicate flow line"));
            }
            continue;
        }
        if let Some((name, stmts)) = line.split_once(": ") {
            let (i, j) = parse_block_name(name, lineno)?;
            if i as usize != fidx {
                return Err(PscftError::parse(lineno, "block line outside its function section"));
            }
            let f = &mut functions[fidx];
            let list: Vec<String> = stmts.split("; ").map(str::to_string).collect();
            if list.iter().any(String::is_empty) {
                return Err(PscftError::parse(lineno, "empty statement"));
            }
            if f.statements.insert(j, list).is_some_and(|old| !old.is_empty()) {
                return Err(PscftError::parse(lineno, "duplicate block line"));
            }
            continue;
        }
        return Err(PscftError::parse(lineno, "unrecognized line"));
    }
    Ok(functions)
}

fn parse_block_name(s: &str, lineno: usize) -> Result<(u32, u32), PscftError> {
    let rest = s
        .strip_prefix("BB_")
        .ok_or_else(|| PscftError::parse(lineno, format!("expected block name, got `{s}`")))?;
    let (i, j) = rest
        .split_once('_')
        .ok_or_else(|| PscftError::parse(lineno, format!("malformed block name `{s}`")))?;
    let i = i
        .parse()
        .map_err(|_| PscftError::parse(lineno, format!("bad function index in `{s}`")))?;
    let j = j
        .parse()
        .map_err(|_| PscftError::parse(lineno, format!("bad block index in `{s}`")))?;
    Ok((i, j))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_split_rendering_precisely() {
        let toks = tokenize("function attack:\nBB_0_0: UniswapV3.flash(...args); CREATE(...args)\nBB_0_0 -> BB_0_1\n");
        let expect = [
            "function", "attack", ":", "BB_0_0", ":", "UniswapV3", ".", "flash", "(", "...args",
            ")", ";", "CREATE", "(", "...args", ")", "BB_0_0", "->", "BB_0_1",
        ];
        assert_eq!(toks, expect);
    }

    #[test]
    fn reader_accepts_blocks_known_only_from_flow() {
        let fns = read_pscft("function f:\nBB_0_1: SELFDESTRUCT(...args)\nBB_0_0 -> BB_0_1\n").unwrap();
        assert_eq!(fns.len(), 1);
        assert_eq!(fns[0].statements[&0], Vec::<String>::new());
        assert_eq!(fns[0].statements[&1], vec!["SELFDESTRUCT(...args)".to_string()]);
        assert_eq!(fns[0].edges.iter().copied().collect::<Vec<_>>(), vec![(0, 1)]);
    }

    #[test]
    fn reader_rejects_cross_section_flow() {
        let err = read_pscft("function f:\nfunction g:\nBB_0_0 -> BB_0_1\n").unwrap_err();
        assert!(err.to_string().contains("crosses function sections") || err.to_string().contains("line 3"));
    }

    #[test]
    fn reader_rejects_orphan_content() {
        assert!(read_pscft("BB_0_0: CREATE(...args)\n").is_err());
    }
}
