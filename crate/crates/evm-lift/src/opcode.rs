use std::fmt;

use serde::{Deserialize, Serialize};

/// An EVM opcode. Bytes with no defined instruction decode to
/// `Unknown(byte)` and behave like INVALID (halt, no stack effect).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Opcode {
    Stop,
    Add,
    Mul,
    Sub,
    Div,
    SDiv,
    Mod,
    SMod,
    AddMod,
    MulMod,
    Exp,
    SignExtend,
    Lt,
    Gt,
    SLt,
    SGt,
    Eq,
    IsZero,
    And,
    Or,
    Xor,
    Not,
    Byte,
    Shl,
    Shr,
    Sar,
    Keccak256,
    Address,
    Balance,
    Origin,
    Caller,
    CallValue,
    CallDataLoad,
    CallDataSize,
    CallDataCopy,
    CodeSize,
    CodeCopy,
    GasPrice,
    ExtCodeSize,
    ExtCodeCopy,
    ReturnDataSize,
    ReturnDataCopy,
    ExtCodeHash,
    BlockHash,
    Coinbase,
    Timestamp,
    Number,
    PrevRandao,
    GasLimit,
    ChainId,
    SelfBalance,
    BaseFee,
    BlobHash,
    BlobBaseFee,
    Pop,
    MLoad,
    MStore,
    MStore8,
    SLoad,
    SStore,
    Jump,
    JumpI,
    Pc,
    MSize,
    Gas,
    JumpDest,
    TLoad,
    TStore,
    MCopy,
    Push0,
    /// PUSH1..PUSH32; the payload is the operand width in bytes.
    Push(u8),
    /// DUP1..DUP16.
    Dup(u8),
    /// SWAP1..SWAP16.
    Swap(u8),
    /// LOG0..LOG4.
    Log(u8),
    Create,
    Call,
    CallCode,
    Return,
    DelegateCall,
    Create2,
    StaticCall,
    Revert,
    Invalid,
    SelfDestruct,
    Unknown(u8),
}

use Opcode::*;

impl Opcode {
    pub fn from_byte(b: u8) -> Opcode {
        match b {
            0x00 => Stop,
            0x01 => Add,
            0x02 => Mul,
            0x03 => Sub,
            0x04 => Div,
            0x05 => SDiv,
            0x06 => Mod,
            0x07 => SMod,
            0x08 => AddMod,
            0x09 => MulMod,
            0x0a => Exp,
            0x0b => SignExtend,
            0x10 => Lt,
            0x11 => Gt,
            0x12 => SLt,
            0x13 => SGt,
            0x14 => Eq,
            0x15 => IsZero,
            0x16 => And,
            0x17 => Or,
            0x18 => Xor,
            0x19 => Not,
            0x1a => Byte,
            0x1b => Shl,
            0x1c => Shr,
            0x1d => Sar,
            0x20 => Keccak256,
            0x30 => Address,
            0x31 => Balance,
            0x32 => Origin,
            0x33 => Caller,
            0x34 => CallValue,
            0x35 => CallDataLoad,
            0x36 => CallDataSize,
            0x37 => CallDataCopy,
            0x38 => CodeSize,
            0x39 => CodeCopy,
            0x3a => GasPrice,
            0x3b => ExtCodeSize,
            0x3c => ExtCodeCopy,
            0x3d => ReturnDataSize,
            0x3e => ReturnDataCopy,
            0x3f => ExtCodeHash,
            0x40 => BlockHash,
            0x41 => Coinbase,
            0x42 => Timestamp,
            0x43 => Number,
            0x44 => PrevRandao,
            0x45 => GasLimit,
            0x46 => ChainId,
            0x47 => SelfBalance,
            0x48 => BaseFee,
            0x49 => BlobHash,
            0x4a => BlobBaseFee,
            0x50 => Pop,
            0x51 => MLoad,
            0x52 => MStore,
            0x53 => MStore8,
            0x54 => SLoad,
            0x55 => SStore,
            0x56 => Jump,
            0x57 => JumpI,
            0x58 => Pc,
            0x59 => MSize,
            0x5a => Gas,
            0x5b => JumpDest,
            0x5c => TLoad,
            0x5d => TStore,
            0x5e => MCopy,
            0x5f => Push0,
            0x60..=0x7f => Push(b - 0x5f),
            0x80..=0x8f => Dup(b - 0x7f),
            0x90..=0x9f => Swap(b - 0x8f),
            0xa0..=0xa4 => Log(b - 0xa0),
            0xf0 => Create,
            0xf1 => Call,
            0xf2 => CallCode,
            0xf3 => Return,
            0xf4 => DelegateCall,
            0xf5 => Create2,
            0xfa => StaticCall,
            0xfd => Revert,
            0xfe => Invalid,
            0xff => SelfDestruct,
            other => Unknown(other),
        }
    }

    pub fn byte(&self) -> u8 {
        match *self {
            Stop => 0x00,
            Add => 0x01,
            Mul => 0x02,
            Sub => 0x03,
            Div => 0x04,
            SDiv => 0x05,
            Mod => 0x06,
            SMod => 0x07,
            AddMod => 0x08,
            MulMod => 0x09,
            Exp => 0x0a,
            SignExtend => 0x0b,
            Lt => 0x10,
            Gt => 0x11,
            SLt => 0x12,
            SGt => 0x13,
            Eq => 0x14,
            IsZero => 0x15,
            And => 0x16,
            Or => 0x17,
            Xor => 0x18,
            Not => 0x19,
            Byte => 0x1a,
            Shl => 0x1b,
            Shr => 0x1c,
            Sar => 0x1d,
            Keccak256 => 0x20,
            Address => 0x30,
            Balance => 0x31,
            Origin => 0x32,
            Caller => 0x33,
            CallValue => 0x34,
            CallDataLoad => 0x35,
            CallDataSize => 0x36,
            CallDataCopy => 0x37,
            CodeSize => 0x38,
            CodeCopy => 0x39,
            GasPrice => 0x3a,
            ExtCodeSize => 0x3b,
            ExtCodeCopy => 0x3c,
            ReturnDataSize => 0x3d,
            ReturnDataCopy => 0x3e,
            ExtCodeHash => 0x3f,
            BlockHash => 0x40,
            Coinbase => 0x41,
            Timestamp => 0x42,
            Number => 0x43,
            PrevRandao => 0x44,
            GasLimit => 0x45,
            ChainId => 0x46,
            SelfBalance => 0x47,
            BaseFee => 0x48,
            BlobHash => 0x49,
            BlobBaseFee => 0x4a,
            Pop => 0x50,
            MLoad => 0x51,
            MStore => 0x52,
            MStore8 => 0x53,
            SLoad => 0x54,
            SStore => 0x55,
            Jump => 0x56,
            JumpI => 0x57,
            Pc => 0x58,
            MSize => 0x59,
            Gas => 0x5a,
            JumpDest => 0x5b,
            TLoad => 0x5c,
            TStore => 0x5d,
            MCopy => 0x5e,
            Push0 => 0x5f,
            Push(n) => 0x5f + n,
            Dup(n) => 0x7f + n,
            Swap(n) => 0x8f + n,
            Log(n) => 0xa0 + n,
            Create => 0xf0,
            Call => 0xf1,
            CallCode => 0xf2,
            Return => 0xf3,
            DelegateCall => 0xf4,
            Create2 => 0xf5,
            StaticCall => 0xfa,
            Revert => 0xfd,
            Invalid => 0xfe,
            SelfDestruct => 0xff,
            Unknown(b) => b,
        }
    }

    /// Width of the inline operand in bytes; zero for everything but PUSH1..32.
    pub fn push_bytes(&self) -> usize {
        match *self {
            Push(n) => n as usize,
            _ => 0,
        }
    }

    /// True when the instruction unconditionally ends its basic block.
    pub fn is_terminator(&self) -> bool {
        matches!(
            *self,
            Jump | JumpI | Stop | Return | Revert | SelfDestruct | Invalid | Unknown(_)
        )
    }

    /// (stack items consumed, stack items produced). DUP and SWAP report
    /// their net arity; the constant-stack interpreter treats them specially.
    pub fn stack_effect(&self) -> (usize, usize) {
        match *self {
            Stop | JumpDest | Invalid | Unknown(_) => (0, 0),
            Add | Mul | Sub | Div | SDiv | Mod | SMod | Exp | SignExtend | Lt | Gt | SLt
            | SGt | Eq | And | Or | Xor | Byte | Shl | Shr | Sar | Keccak256 => (2, 1),
            AddMod | MulMod => (3, 1),
            IsZero | Not | Balance | CallDataLoad | ExtCodeSize | ExtCodeHash | BlockHash
            | BlobHash | MLoad | SLoad | TLoad => (1, 1),
            Address | Origin | Caller | CallValue | CallDataSize | CodeSize | GasPrice
            | ReturnDataSize | Coinbase | Timestamp | Number | PrevRandao | GasLimit
            | ChainId | SelfBalance | BaseFee | BlobBaseFee | Pc | MSize | Gas | Push0 => (0, 1),
            CallDataCopy | CodeCopy | ReturnDataCopy | MCopy => (3, 0),
            ExtCodeCopy => (4, 0),
            Pop => (1, 0),
            MStore | MStore8 | SStore | TStore => (2, 0),
            Jump => (1, 0),
            JumpI => (2, 0),
            Push(_) => (0, 1),
            Dup(n) => (n as usize, n as usize + 1),
            Swap(n) => (n as usize + 1, n as usize + 1),
            Log(n) => (n as usize + 2, 0),
            Create => (3, 1),
            Call | CallCode => (7, 1),
            Return | Revert => (2, 0),
            DelegateCall | StaticCall => (6, 1),
            Create2 => (4, 1),
            SelfDestruct => (1, 0),
        }
    }

    /// True for instructions with externally visible effects (state writes,
    /// logs, calls, creation, self-destruction). Dispatcher blocks are pure,
    /// so this bounds the dispatcher-chain scan.
    pub fn has_side_effect(&self) -> bool {
        matches!(
            *self,
            SStore | TStore | Log(_) | Create | Create2 | Call | CallCode | DelegateCall
                | StaticCall | SelfDestruct
        )
    }

    pub fn mnemonic(&self) -> String {
        match *self {
            Push(n) => format!("PUSH{n}"),
            Dup(n) => format!("DUP{n}"),
            Swap(n) => format!("SWAP{n}"),
            Log(n) => format!("LOG{n}"),
            Unknown(b) => format!("UNKNOWN_0x{b:02x}"),
            op => fixed_mnemonic(op).to_string(),
        }
    }

    /// Inverse of `mnemonic`.
    pub fn from_mnemonic(name: &str) -> Option<Opcode> {
        if let Some(rest) = name.strip_prefix("UNKNOWN_0x") {
            return u8::from_str_radix(rest, 16).ok().map(Unknown);
        }
        if let Some(op) = parametric_from_mnemonic(name) {
            return Some(op);
        }
        (0x00..=0xffu16)
            .map(|b| Opcode::from_byte(b as u8))
            .find(|op| !matches!(op, Push(_) | Dup(_) | Swap(_) | Log(_) | Unknown(_)) && fixed_mnemonic(*op) == name)
    }
}

fn parametric_from_mnemonic(name: &str) -> Option<Opcode> {
    for (prefix, lo, hi, make) in [
        ("PUSH", 1u8, 32u8, Push as fn(u8) -> Opcode),
        ("DUP", 1, 16, Dup as fn(u8) -> Opcode),
        ("SWAP", 1, 16, Swap as fn(u8) -> Opcode),
        ("LOG", 0, 4, Log as fn(u8) -> Opcode),
    ] {
        if let Some(digits) = name.strip_prefix(prefix) {
            if let Ok(n) = digits.parse::<u8>() {
                if n >= lo && n <= hi {
                    return Some(make(n));
                }
            }
        }
    }
    None
}

fn fixed_mnemonic(op: Opcode) -> &'static str {
    match op {
        Stop => "STOP",
        Add => "ADD",
        Mul => "MUL",
        Sub => "SUB",
        Div => "DIV",
        SDiv => "SDIV",
        Mod => "MOD",
        SMod => "SMOD",
        AddMod => "ADDMOD",
        MulMod => "MULMOD",
        Exp => "EXP",
        SignExtend => "SIGNEXTEND",
        Lt => "LT",
        Gt => "GT",
        SLt => "SLT",
        SGt => "SGT",
        Eq => "EQ",
        IsZero => "ISZERO",
        And => "AND",
        Or => "OR",
        Xor => "XOR",
        Not => "NOT",
        Byte => "BYTE",
        Shl => "SHL",
        Shr => "SHR",
        Sar => "SAR",
        Keccak256 => "KECCAK256",
        Address => "ADDRESS",
        Balance => "BALANCE",
        Origin => "ORIGIN",
        Caller => "CALLER",
        CallValue => "CALLVALUE",
        CallDataLoad => "CALLDATALOAD",
        CallDataSize => "CALLDATASIZE",
        CallDataCopy => "CALLDATACOPY",
        CodeSize => "CODESIZE",
        CodeCopy => "CODECOPY",
        GasPrice => "GASPRICE",
        ExtCodeSize => "EXTCODESIZE",
        ExtCodeCopy => "EXTCODECOPY",
        ReturnDataSize => "RETURNDATASIZE",
        ReturnDataCopy => "RETURNDATACOPY",
        ExtCodeHash => "EXTCODEHASH",
        BlockHash => "BLOCKHASH",
        Coinbase => "COINBASE",
        Timestamp => "TIMESTAMP",
        Number => "NUMBER",
        PrevRandao => "PREVRANDAO",
        GasLimit => "GASLIMIT",
        ChainId => "CHAINID",
        SelfBalance => "SELFBALANCE",
        BaseFee => "BASEFEE",
        BlobHash => "BLOBHASH",
        BlobBaseFee => "BLOBBASEFEE",
        Pop => "POP",
        MLoad => "MLOAD",
        MStore => "MSTORE",
        MStore8 => "MSTORE8",
        SLoad => "SLOAD",
        SStore => "SSTORE",
        Jump => "JUMP",
        JumpI => "JUMPI",
        Pc => "PC",
        MSize => "MSIZE",
        Gas => "GAS",
        JumpDest => "JUMPDEST",
        TLoad => "TLOAD",
        TStore => "TSTORE",
        MCopy => "MCOPY",
        Push0 => "PUSH0",
        Create => "CREATE",
        Call => "CALL",
        CallCode => "CALLCODE",
        Return => "RETURN",
        DelegateCall => "DELEGATECALL",
        Create2 => "CREATE2",
        StaticCall => "STATICCALL",
        Revert => "REVERT",
        Invalid => "INVALID",
        SelfDestruct => "SELFDESTRUCT",
        Push(_) | Dup(_) | Swap(_) | Log(_) | Unknown(_) => unreachable!("parametric mnemonic"),
    }
}

impl fmt::Display for Opcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.mnemonic())
    }
}

impl fmt::Debug for Opcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
