//! Token vocabulary over behavioral-text documents.
//!
//! Ids are dense and deterministic: reserved ids first, then corpus tokens
//! ordered by descending frequency with lexicographic tiebreak, so two
//! builds over the same corpus always produce the same map.

use std::collections::HashMap;

use sha2::{Digest, Sha256};

use crate::MlError;

pub const PAD_ID: usize = 0;
pub const UNK_ID: usize = 1;
pub const CLS_ID: usize = 2;

const RESERVED: [&str; 3] = ["<pad>", "<unk>", "<cls>"];

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(from = "VocabWire", into = "VocabWire")]
pub struct TokenVocabulary {
    /// Token text by id; the first entries are the reserved markers.
    tokens: Vec<String>,
    ids: HashMap<String, usize>,
    min_frequency: u32,
}

/// Serialized shape: the derived id map is rebuilt on the way in.
#[derive(serde::Serialize, serde::Deserialize)]
struct VocabWire {
    tokens: Vec<String>,
    min_frequency: u32,
}

impl From<VocabWire> for TokenVocabulary {
    fn from(w: VocabWire) -> TokenVocabulary {
        TokenVocabulary::from_tokens(w.tokens, w.min_frequency)
    }
}

impl From<TokenVocabulary> for VocabWire {
    fn from(v: TokenVocabulary) -> VocabWire {
        VocabWire { tokens: v.tokens, min_frequency: v.min_frequency }
    }
}

/// Counts tokens across the corpus and keeps those at or above
/// `min_frequency`; everything else encodes as UNK.
pub fn build_vocab<S: AsRef<str>>(
    corpus: &[S],
    min_frequency: u32,
) -> Result<TokenVocabulary, MlError> {
    if corpus.is_empty() {
        return Err(MlError::Empty("vocabulary corpus"));
    }
    let mut counts: HashMap<String, u32> = HashMap::new();
    for doc in corpus {
        for tok in pscft::tokenize(doc.as_ref()) {
            // the tokenizer cannot emit the angle-bracketed markers as a
            // single token, but labels are external input; stay safe
            if RESERVED.contains(&tok.as_str()) {
                continue;
            }
            *counts.entry(tok).or_insert(0) += 1;
        }
    }
    let mut kept: Vec<(String, u32)> =
        counts.into_iter().filter(|(_, c)| *c >= min_frequency.max(1)).collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

    let mut tokens: Vec<String> = RESERVED.iter().map(|s| s.to_string()).collect();
    tokens.extend(kept.into_iter().map(|(t, _)| t));
    Ok(TokenVocabulary::from_tokens(tokens, min_frequency))
}

impl TokenVocabulary {
    fn from_tokens(tokens: Vec<String>, min_frequency: u32) -> TokenVocabulary {
        let ids = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        TokenVocabulary { tokens, ids, min_frequency }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false // reserved ids are always present
    }

    pub fn min_frequency(&self) -> u32 {
        self.min_frequency
    }

    pub fn id_of(&self, token: &str) -> usize {
        self.ids.get(token).copied().unwrap_or(UNK_ID)
    }

    pub fn token_of(&self, id: usize) -> Option<&str> {
        self.tokens.get(id).map(String::as_str)
    }

    /// CLS followed by token ids, truncated to `max_len` entries. No
    /// padding is appended; sequences carry their true length.
    pub fn encode(&self, text: &str, max_len: usize) -> Vec<usize> {
        let mut out = vec![CLS_ID];
        for tok in pscft::tokenize(text) {
            if out.len() >= max_len.max(1) {
                break;
            }
            out.push(self.id_of(&tok));
        }
        out
    }

    /// Content address over the id-ordered token list and the build
    /// parameter; models remember the hash of the vocabulary they were
    /// trained against.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.min_frequency.to_le_bytes());
        for t in &self.tokens {
            h.update((t.len() as u64).to_le_bytes());
            h.update(t.as_bytes());
        }
        hex::encode(h.finalize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_document_tokens_all_present() {
        let v = build_vocab(&["A.b()"], 1).unwrap();
        for tok in ["A", ".", "b", "(", ")"] {
            assert!(v.id_of(tok) > CLS_ID, "{tok} must have its own id");
        }
        assert_eq!(v.len(), 3 + 5);
    }

    #[test]
    fn rare_tokens_encode_as_unk() {
        let v = build_vocab(&["call call once"], 2).unwrap();
        assert!(v.id_of("call") > CLS_ID);
        assert_eq!(v.id_of("once"), UNK_ID);
        assert_eq!(v.encode("once call", 16), vec![CLS_ID, UNK_ID, v.id_of("call")]);
    }

    #[test]
    fn ids_are_dense_and_frequency_ordered() {
        let v = build_vocab(&["b b b a a c", "zz a"], 1).unwrap();
        // frequencies: a=3, b=3, c=1, zz=1; ties break lexicographically
        assert_eq!(v.id_of("a"), 3);
        assert_eq!(v.id_of("b"), 4);
        assert_eq!(v.id_of("c"), 5);
        assert_eq!(v.id_of("zz"), 6);
        for id in 0..v.len() {
            assert!(v.token_of(id).is_some(), "id {id} must be dense");
        }
    }

    #[test]
    fn rebuild_is_identical() {
        let corpus = ["function attack:\nBB_0_0: Pool.flash(...args)", "function fallback:\n"];
        let a = build_vocab(&corpus, 1).unwrap();
        let b = build_vocab(&corpus, 1).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.content_hash(), b.content_hash());
    }

    #[test]
    fn empty_corpus_is_rejected() {
        let none: [&str; 0] = [];
        assert!(matches!(build_vocab(&none, 1), Err(MlError::Empty(_))));
    }

    #[test]
    fn encode_prepends_cls_and_truncates() {
        let v = build_vocab(&["a b c d e"], 1).unwrap();
        let ids = v.encode("a b c d e", 3);
        assert_eq!(ids.len(), 3);
        assert_eq!(ids[0], CLS_ID);
    }

    #[test]
    fn hash_tracks_content() {
        let a = build_vocab(&["a b"], 1).unwrap();
        let b = build_vocab(&["a c"], 1).unwrap();
        assert_ne!(a.content_hash(), b.content_hash());
    }

    #[test]
    fn serde_round_trip_keeps_lookup_working() {
        let v = build_vocab(&["swap ( ) -> out"], 1).unwrap();
        let json = serde_json::to_string(&v).unwrap();
        let back: TokenVocabulary = serde_json::from_str(&json).unwrap();
        assert_eq!(back, v);
        assert_eq!(back.id_of("swap"), v.id_of("swap"));
        assert_eq!(back.content_hash(), v.content_hash());
    }
}
