//! The sectioned GR(1) specification format: lexing, parsing, resolution,
//! validation and canonical printing.
//!
//! ```text
//! [ENV_VARS]
//! o1 : bool
//! [SYS_VARS]
//! rs : 0..3
//! [SYS_TRANS]
//! rs' <= rs + 1
//! ```

mod expr;
mod lexer;
mod parser;
mod printer;

use std::fmt;

use thiserror::Error;

pub use expr::{ArithOp, BoolOp, CmpOp, EvalError, Expr, VarId};
pub use parser::parse_spec;
pub use printer::{print_expr, print_spec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Owner {
    Env,
    Sys,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    Bool,
    Range { lo: i32, hi: i32 },
}

impl Domain {
    pub fn lo(self) -> i32 {
        match self {
            Domain::Bool => 0,
            Domain::Range { lo, .. } => lo,
        }
    }

    pub fn hi(self) -> i32 {
        match self {
            Domain::Bool => 1,
            Domain::Range { hi, .. } => hi,
        }
    }

    /// Number of values in the domain.
    pub fn size(self) -> u64 {
        (i64::from(self.hi()) - i64::from(self.lo()) + 1) as u64
    }

    pub fn contains(self, v: i32) -> bool {
        self.lo() <= v && v <= self.hi()
    }

    pub fn is_bool(self) -> bool {
        matches!(self, Domain::Bool)
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Bool => f.write_str("bool"),
            Domain::Range { lo, hi } => write!(f, "{lo}..{hi}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VarDecl {
    pub name: String,
    pub owner: Owner,
    pub domain: Domain,
}

impl VarDecl {
    pub fn new(name: impl Into<String>, owner: Owner, domain: Domain) -> Self {
        VarDecl {
            name: name.into(),
            owner,
            domain,
        }
    }
}

/// A resolved specification. Variables are ordered environment-first, each
/// group in declaration order; every [`Expr`] refers to them by index.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SpecDocument {
    pub vars: Vec<VarDecl>,
    pub env_init: Vec<Expr>,
    pub sys_init: Vec<Expr>,
    pub env_safety: Vec<Expr>,
    pub sys_safety: Vec<Expr>,
    pub env_liveness: Vec<Expr>,
    pub sys_liveness: Vec<Expr>,
}

impl SpecDocument {
    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn env_vars(&self) -> impl Iterator<Item = (VarId, &VarDecl)> {
        self.vars
            .iter()
            .enumerate()
            .filter(|(_, v)| v.owner == Owner::Env)
    }

    pub fn sys_vars(&self) -> impl Iterator<Item = (VarId, &VarDecl)> {
        self.vars
            .iter()
            .enumerate()
            .filter(|(_, v)| v.owner == Owner::Sys)
    }

    /// Render an expression with this document's variable names.
    pub fn show(&self, e: &Expr) -> String {
        print_expr(e, &self.vars)
    }
}

/// Which section a clause lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Section {
    EnvVars,
    SysVars,
    EnvInit,
    SysInit,
    EnvTrans,
    SysTrans,
    EnvLiveness,
    SysLiveness,
}

impl Section {
    pub const ALL: [Section; 8] = [
        Section::EnvVars,
        Section::SysVars,
        Section::EnvInit,
        Section::SysInit,
        Section::EnvTrans,
        Section::SysTrans,
        Section::EnvLiveness,
        Section::SysLiveness,
    ];

    pub fn header(self) -> &'static str {
        match self {
            Section::EnvVars => "ENV_VARS",
            Section::SysVars => "SYS_VARS",
            Section::EnvInit => "ENV_INIT",
            Section::SysInit => "SYS_INIT",
            Section::EnvTrans => "ENV_TRANS",
            Section::SysTrans => "SYS_TRANS",
            Section::EnvLiveness => "ENV_LIVENESS",
            Section::SysLiveness => "SYS_LIVENESS",
        }
    }

    pub fn from_header(h: &str) -> Option<Section> {
        Section::ALL.into_iter().find(|s| s.header() == h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiagnosticKind {
    SyntaxError,
    UnknownVariable,
    TypeMismatch,
    /// An environment safety clause reads a next-step system variable.
    OwnershipViolation,
    DuplicateDeclaration,
    /// Next-step reference inside a state formula, or a system variable in
    /// the environment's initial condition.
    MisplacedReference,
}

impl fmt::Display for DiagnosticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DiagnosticKind::SyntaxError => "syntax error",
            DiagnosticKind::UnknownVariable => "unknown variable",
            DiagnosticKind::TypeMismatch => "type mismatch",
            DiagnosticKind::OwnershipViolation => "ownership violation",
            DiagnosticKind::DuplicateDeclaration => "duplicate declaration",
            DiagnosticKind::MisplacedReference => "misplaced reference",
        })
    }
}

/// A located parse or validation failure.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {kind}: {message} (at `{token}`)")]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub line: usize,
    pub col: usize,
    pub token: String,
    pub message: String,
}

impl Diagnostic {
    pub(crate) fn new(
        kind: DiagnosticKind,
        pos: Pos,
        token: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Diagnostic {
            kind,
            line: pos.line,
            col: pos.col,
            token: token.into(),
            message: message.into(),
        }
    }
}

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub(crate) struct Pos {
    pub line: usize,
    pub col: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[ENV_VARS] o1:bool [SYS_VARS] rs:0..3 [SYS_TRANS] rs'<=rs+1";

    #[test]
    fn minimal_inline_document() {
        let doc = parse_spec(MINIMAL).unwrap();
        assert_eq!(doc.vars.len(), 2);
        assert_eq!(doc.sys_safety.len(), 1);
        assert_eq!(doc.vars[0].owner, Owner::Env);
        assert_eq!(doc.vars[1].domain, Domain::Range { lo: 0, hi: 3 });
        // no liveness given: a constant-true goal is inserted
        assert_eq!(doc.sys_liveness, vec![Expr::Bool(true)]);
    }

    #[test]
    fn env_trans_reading_next_sys_is_rejected() {
        let err = parse_spec("[SYS_VARS]\nrs : 0..3\n[ENV_TRANS]\nrs' = 0\n").unwrap_err();
        assert_eq!(err.kind, DiagnosticKind::OwnershipViolation);
        assert_eq!(err.line, 4);
        assert_eq!(err.token, "rs");
    }

    #[test]
    fn diagnostics_cover_each_kind() {
        let cases = [
            ("[SYS_VARS]\nx : 0..3\n[SYS_TRANS]\nx' = y\n", DiagnosticKind::UnknownVariable),
            ("[SYS_VARS]\nx : 0..3\nx : bool\n", DiagnosticKind::DuplicateDeclaration),
            ("[SYS_VARS]\nx : 0..3\nb : bool\n[SYS_TRANS]\nx' = b\n", DiagnosticKind::TypeMismatch),
            ("[SYS_VARS]\nb : bool\n[SYS_TRANS]\nb + 1 = 2\n", DiagnosticKind::TypeMismatch),
            ("[SYS_VARS]\nx : 0..3\n[SYS_TRANS]\nx + 1\n", DiagnosticKind::TypeMismatch),
            ("[SYS_VARS]\nx : 0..3\n[SYS_TRANS]\nx' = = 1\n", DiagnosticKind::SyntaxError),
            ("[BOGUS]\n", DiagnosticKind::SyntaxError),
            ("[SYS_VARS]\nx : 3..1\n", DiagnosticKind::SyntaxError),
            ("[SYS_VARS]\nx : 0..3\n[SYS_LIVENESS]\nx' = 1\n", DiagnosticKind::MisplacedReference),
            ("[SYS_VARS]\nx : 0..3\n[ENV_INIT]\nx = 1\n", DiagnosticKind::MisplacedReference),
        ];
        for (text, kind) in cases {
            let err = parse_spec(text).expect_err(text);
            assert_eq!(err.kind, kind, "{text:?} -> {err}");
        }
    }

    #[test]
    fn eval_examples() {
        let doc = parse_spec(
            "[ENV_VARS]\nbl : 0..30\no1 : bool\n[ENV_TRANS]\nbl' = bl - 1\nbl' = bl + 15\no1 -> !o1'\n",
        )
        .unwrap();
        let [dec, refill, obstacle] = &doc.env_safety[..] else { panic!() };
        assert!(dec.eval(&[20, 0], &[Some(19), None]).unwrap());
        assert!(refill.eval(&[10, 0], &[Some(25), None]).unwrap());
        assert!(!obstacle.eval(&[0, 1], &[None, Some(1)]).unwrap());
        assert!(obstacle.eval(&[0, 1], &[None, None]).is_err());
    }
}
