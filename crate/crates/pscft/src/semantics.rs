//! Semantic annotation: selectors become signatures, target addresses
//! become entity labels. Resolution failures degrade to placeholders and
//! diagnostics; annotation never aborts an analysis.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::Mutex;

use evm_lift::ir::{Diagnostic, DiagnosticKind, Visibility};
use evm_lift::types::{Address, Selector};
use fundsource::AddressLabelDB;

use crate::filter::CallContract;
use crate::PscftError;

#[derive(Debug, thiserror::Error)]
#[error("resolver: {0}")]
pub struct ResolveError(pub String);

/// Selector -> canonical signature. Implementations may be offline files
/// or remote services; either way they must tolerate concurrent queries.
pub trait SignatureResolver: Sync {
    fn resolve_selector(&self, selector: Selector) -> Result<Option<String>, ResolveError>;
}

/// Call target address -> semantic label (protocol, token, or verified
/// contract name).
pub trait TargetLabeler: Sync {
    fn label_target(&self, address: Address) -> Result<Option<String>, ResolveError>;
}

/// File-backed signature table. Line format: `<8 hex digits>,<signature>`,
/// `#` comments and blank lines skipped. Every entry is self-consistent:
/// the selector column must be the 4-byte hash of the signature column.
#[derive(Debug, Default, Clone)]
pub struct SignatureDb {
    map: BTreeMap<Selector, String>,
}

impl SignatureDb {
    pub fn new() -> SignatureDb {
        SignatureDb::default()
    }

    /// Registers a signature under its computed selector.
    pub fn add(&mut self, signature: impl Into<String>) -> Selector {
        let signature = signature.into();
        let selector = Selector::of_signature(&signature);
        self.map.insert(selector, signature);
        selector
    }

    pub fn get(&self, selector: &Selector) -> Option<&str> {
        self.map.get(selector).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn parse(text: &str) -> Result<SignatureDb, PscftError> {
        let mut db = SignatureDb::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = i + 1;
            let (sel, sig) = line
                .split_once(',')
                .ok_or_else(|| PscftError::parse(lineno, "expected `<selector>,<signature>`"))?;
            let sel: Selector = sel
                .trim()
                .parse()
                .map_err(|_| PscftError::parse(lineno, format!("bad selector `{}`", sel.trim())))?;
            let sig = sig.trim();
            let computed = Selector::of_signature(sig);
            if computed != sel {
                return Err(PscftError::parse(
                    lineno,
                    format!("selector {sel} does not match signature `{sig}` (hashes to {computed})"),
                ));
            }
            db.map.insert(sel, sig.to_string());
        }
        Ok(db)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<SignatureDb, PscftError> {
        let text = std::fs::read_to_string(path)?;
        SignatureDb::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (sel, sig) in &self.map {
            out.push_str(&format!("{sel},{sig}\n"));
        }
        out
    }
}

impl SignatureResolver for SignatureDb {
    fn resolve_selector(&self, selector: Selector) -> Result<Option<String>, ResolveError> {
        Ok(self.map.get(&selector).cloned())
    }
}

/// Adapts an address label database to target labeling; the category is
/// irrelevant here, only the label text matters.
pub struct LabelDbTargeter<'a>(pub &'a AddressLabelDB);

impl TargetLabeler for LabelDbTargeter<'_> {
    fn label_target(&self, address: Address) -> Result<Option<String>, ResolveError> {
        Ok(self.0.label_address(&address).map(|(l, _)| l.to_string()))
    }
}

/// Tries resolvers left to right; the first definite answer wins. A failed
/// resolver is skipped so a dead remote service degrades to local data.
pub struct ChainedSignatures<'a>(pub Vec<&'a dyn SignatureResolver>);

impl SignatureResolver for ChainedSignatures<'_> {
    fn resolve_selector(&self, selector: Selector) -> Result<Option<String>, ResolveError> {
        let mut last_err = None;
        for r in &self.0 {
            match r.resolve_selector(selector) {
                Ok(Some(sig)) => return Ok(Some(sig)),
                Ok(None) => {}
                Err(e) => last_err = Some(e),
            }
        }
        match last_err {
            Some(e) => Err(e),
            None => Ok(None),
        }
    }
}

/// Memoizes resolved selectors. Values are idempotent, so racing writers
/// are harmless (last writer wins with an identical value).
pub struct MemoResolver<R> {
    inner: R,
    cache: Mutex<HashMap<Selector, Option<String>>>,
}

impl<R: SignatureResolver> MemoResolver<R> {
    pub fn new(inner: R) -> MemoResolver<R> {
        MemoResolver {
            inner,
            cache: Mutex::new(HashMap::new()),
        }
    }
}

impl<R: SignatureResolver> SignatureResolver for MemoResolver<R> {
    fn resolve_selector(&self, selector: Selector) -> Result<Option<String>, ResolveError> {
        if let Some(hit) = self.cache.lock().unwrap().get(&selector) {
            return Ok(hit.clone());
        }
        let answer = self.inner.resolve_selector(selector)?;
        self.cache.lock().unwrap().insert(selector, answer.clone());
        Ok(answer)
    }
}

/// Names public functions from their own dispatch selectors so the rename
/// pass can sort by meaningful names. Method-name collisions (overloads)
/// keep `name_0x<selector>` apiece; unresolved selectors keep their hex
/// placeholder.
pub fn resolve_public_names(contract: &mut CallContract, signatures: &dyn SignatureResolver) {
    let mut proposed: Vec<(usize, String)> = Vec::new();
    for (i, f) in contract.functions.iter().enumerate() {
        if f.visibility != Visibility::Public {
            continue;
        }
        let Some(sel) = f.selector else { continue };
        if let Ok(Some(sig)) = signatures.resolve_selector(sel) {
            if Selector::of_signature(&sig) == sel {
                let method = sig.split('(').next().unwrap_or(&sig).to_string();
                proposed.push((i, method));
            } else {
                contract.diagnostics.push(Diagnostic::new(
                    DiagnosticKind::SignatureMismatch,
                    format!("resolver returned `{sig}` for {sel}, which hashes elsewhere"),
                ));
            }
        }
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for (_, name) in &proposed {
        *counts.entry(name.as_str()).or_default() += 1;
    }
    let collided: Vec<bool> = proposed.iter().map(|(_, n)| counts[n.as_str()] > 1).collect();
    for ((i, name), collided) in proposed.iter().zip(collided) {
        let f = &mut contract.functions[*i];
        f.canonical_name = if collided {
            format!("{name}_{}", f.selector.expect("proposed implies selector"))
        } else {
            name.clone()
        };
    }
}

/// Annotates every external call statement in place: resolved signature
/// when the selector is known and the resolution hashes back to it, and a
/// target label when the address resolves. Failures become diagnostics.
pub fn recover_semantics(
    contract: &mut CallContract,
    signatures: &dyn SignatureResolver,
    labels: &dyn TargetLabeler,
) {
    let mut diagnostics: Vec<Diagnostic> = Vec::new();
    for f in &mut contract.functions {
        for b in f.blocks.values_mut() {
            for s in &mut b.statements {
                if !s.kind.is_external() {
                    continue;
                }
                if let Some(sel) = s.selector {
                    match signatures.resolve_selector(sel) {
                        Ok(Some(sig)) => {
                            if Selector::of_signature(&sig) == sel {
                                s.resolved_signature = Some(sig);
                            } else {
                                diagnostics.push(Diagnostic::new(
                                    DiagnosticKind::SignatureMismatch,
                                    format!("`{sig}` does not hash to {sel}; dropped"),
                                ));
                            }
                        }
                        Ok(None) => {}
                        Err(e) => diagnostics.push(Diagnostic::new(
                            DiagnosticKind::ProviderDegraded,
                            format!("selector {sel}: {e}"),
                        )),
                    }
                }
                if let Some(addr) = s.target_address {
                    match labels.label_target(addr) {
                        Ok(Some(label)) => s.target_label = Some(label),
                        Ok(None) => {}
                        Err(e) => diagnostics.push(Diagnostic::new(
                            DiagnosticKind::ProviderDegraded,
                            format!("target {addr}: {e}"),
                        )),
                    }
                }
            }
        }
    }
    // first occurrence wins; duplicates add nothing
    for d in diagnostics {
        if !contract.diagnostics.contains(&d) {
            contract.diagnostics.push(d);
        }
    }
}
