use thiserror::Error;

#[derive(Debug, Error)]
pub enum LiftError {
    #[error("not a 20-byte hex address: {0}")]
    BadAddress(String),

    #[error("not a 4-byte hex selector: {0}")]
    BadSelector(String),

    #[error("instruction at offset {offset:#x} expects a {expected}-byte operand, got {got}")]
    BadOperand { offset: u32, expected: usize, got: usize },

    #[error("duplicate selector {selector} in dispatcher (second target {target:#x} ignored)")]
    DuplicateSelector { selector: String, target: u32 },

    #[error("external IR parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
}

impl LiftError {
    pub fn parse(line: usize, column: usize, message: impl Into<String>) -> LiftError {
        LiftError::Parse { line, column, message: message.into() }
    }
}
