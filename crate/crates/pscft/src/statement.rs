//! Call statements: the only instructions that survive into the textual
//! summary.

use evm_lift::types::{Address, Selector};
use serde::{Deserialize, Serialize};

pub const UNKNOWN_TARGET: &str = "UnknownTarget";
pub const UNKNOWN_FUNC: &str = "UnknownFunc";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CallKind {
    Call,
    StaticCall,
    DelegateCall,
    CallCode,
    PrivateCall,
    Create,
    Create2,
    Selfdestruct,
}

impl CallKind {
    pub fn is_external(self) -> bool {
        matches!(
            self,
            CallKind::Call | CallKind::StaticCall | CallKind::DelegateCall | CallKind::CallCode
        )
    }
}

/// One call-shaped statement. For external kinds, a missing `selector`
/// means no calldata constant reached the site (a raw call); it renders as
/// `UnknownFunc` just like an unresolvable selector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CallStatement {
    /// Originating instruction offset; stable across every later pass.
    pub offset: u32,
    pub kind: CallKind,
    pub target_address: Option<Address>,
    pub selector: Option<Selector>,
    /// Canonical signature; when set, its 4-byte hash equals `selector`.
    pub resolved_signature: Option<String>,
    /// Semantic name of the call target; `None` renders as UnknownTarget.
    pub target_label: Option<String>,
    /// Private calls: canonical name of the callee function.
    pub callee_name: Option<String>,
}

impl CallStatement {
    pub fn new(offset: u32, kind: CallKind) -> CallStatement {
        CallStatement {
            offset,
            kind,
            target_address: None,
            selector: None,
            resolved_signature: None,
            target_label: None,
            callee_name: None,
        }
    }

    /// Method name shown in the rendering: text before the first `(` of
    /// the resolved signature.
    pub fn method_name(&self) -> Option<&str> {
        self.resolved_signature
            .as_deref()
            .map(|sig| sig.split('(').next().unwrap_or(sig))
    }

    /// The textual form used in documents. Arguments are uniformly elided
    /// as `...args`; values are never reconstructed.
    pub fn render(&self) -> String {
        match self.kind {
            CallKind::Call | CallKind::StaticCall | CallKind::DelegateCall | CallKind::CallCode => {
                let label = self.target_label.as_deref().unwrap_or(UNKNOWN_TARGET);
                let func = self.method_name().unwrap_or(UNKNOWN_FUNC);
                format!("{label}.{func}(...args)")
            }
            CallKind::PrivateCall => {
                let callee = self.callee_name.as_deref().unwrap_or(UNKNOWN_FUNC);
                format!("{callee}(...args)")
            }
            CallKind::Create => "CREATE(...args)".to_string(),
            CallKind::Create2 => "CREATE2(...args)".to_string(),
            CallKind::Selfdestruct => "SELFDESTRUCT(...args)".to_string(),
        }
    }
}
