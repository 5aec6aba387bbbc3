//! Recursive-descent parser producing a raw tree, followed by name
//! resolution, type checking and section placement rules.

use std::collections::HashMap;

use super::expr::{ArithOp, BoolOp, CmpOp, Expr, VarId};
use super::lexer::{tokenize, Tok, Token, MAX_LITERAL};
use super::{Diagnostic, DiagnosticKind, Domain, Owner, Pos, Section, SpecDocument, VarDecl};

const MAX_DEPTH: usize = 200;

#[derive(Debug, Clone)]
enum RawKind {
    Bool(bool),
    Int(i64),
    Var { name: String, next: bool },
    Not(Box<Raw>),
    Bin(BoolOp, Box<Raw>, Box<Raw>),
    Cmp(CmpOp, Box<Raw>, Box<Raw>),
    Arith(ArithOp, Box<Raw>, Box<Raw>),
}

#[derive(Debug, Clone)]
struct Raw {
    kind: RawKind,
    pos: Pos,
    token: String,
}

struct RawDecl {
    decl: VarDecl,
    pos: Pos,
}

struct Parser {
    toks: Vec<Token>,
    at: usize,
    depth: usize,
    parens: usize,
}

type PResult<T> = Result<T, Diagnostic>;

/// Parse, resolve and validate a specification.
pub fn parse_spec(text: &str) -> Result<SpecDocument, Diagnostic> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        at: 0,
        depth: 0,
        parens: 0,
    };

    let mut decls: Vec<RawDecl> = Vec::new();
    let mut clauses: Vec<(Section, Raw)> = Vec::new();
    let mut section: Option<Section> = None;

    loop {
        p.skip_newlines();
        let t = p.peek().clone();
        match &t.tok {
            Tok::Eof => break,
            Tok::Section(name) => {
                section = Some(Section::from_header(name).ok_or_else(|| {
                    syntax(t.pos, t.tok.text(), format!("unknown section [{name}]"))
                })?);
                p.bump();
            }
            _ => match section {
                None => {
                    return Err(syntax(t.pos, t.tok.text(), "clause before any section header"))
                }
                Some(s @ (Section::EnvVars | Section::SysVars)) => {
                    let owner = if s == Section::EnvVars { Owner::Env } else { Owner::Sys };
                    decls.push(p.declaration(owner)?);
                    p.end_of_clause()?;
                }
                Some(s) => {
                    let e = p.expr()?;
                    p.end_of_clause()?;
                    clauses.push((s, e));
                }
            },
        }
    }

    // environment variables first, each group in source order
    let mut vars: Vec<&RawDecl> = decls.iter().filter(|d| d.decl.owner == Owner::Env).collect();
    vars.extend(decls.iter().filter(|d| d.decl.owner == Owner::Sys));

    let mut index: HashMap<&str, VarId> = HashMap::new();
    for d in &decls {
        if index.contains_key(d.decl.name.as_str()) {
            return Err(Diagnostic::new(
                DiagnosticKind::DuplicateDeclaration,
                d.pos,
                d.decl.name.clone(),
                format!("variable `{}` declared twice", d.decl.name),
            ));
        }
        index.insert(d.decl.name.as_str(), usize::MAX);
    }
    for (i, d) in vars.iter().enumerate() {
        index.insert(d.decl.name.as_str(), i);
    }

    let mut doc = SpecDocument {
        vars: vars.iter().map(|d| d.decl.clone()).collect(),
        ..SpecDocument::default()
    };
    let resolver = Resolver {
        vars: &doc.vars,
        index: &index,
    };
    let mut resolved = Vec::with_capacity(clauses.len());
    for (section, raw) in &clauses {
        let (e, ty) = resolver.resolve(raw, *section)?;
        if ty != Ty::Bool {
            return Err(Diagnostic::new(
                DiagnosticKind::TypeMismatch,
                raw.pos,
                raw.token.clone(),
                "clause must be boolean",
            ));
        }
        resolved.push((*section, e));
    }
    for (section, e) in resolved {
        match section {
            Section::EnvInit => doc.env_init.push(e),
            Section::SysInit => doc.sys_init.push(e),
            Section::EnvTrans => doc.env_safety.push(e),
            Section::SysTrans => doc.sys_safety.push(e),
            Section::EnvLiveness => doc.env_liveness.push(e),
            Section::SysLiveness => doc.sys_liveness.push(e),
            Section::EnvVars | Section::SysVars => unreachable!(),
        }
    }
    if doc.sys_liveness.is_empty() {
        doc.sys_liveness.push(Expr::Bool(true));
    }
    Ok(doc)
}

fn syntax(pos: Pos, token: impl Into<String>, msg: impl Into<String>) -> Diagnostic {
    Diagnostic::new(DiagnosticKind::SyntaxError, pos, token, msg)
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.at]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn skip_newlines(&mut self) {
        while self.peek().tok == Tok::Newline {
            self.bump();
        }
    }

    /// Inside parentheses line breaks are insignificant.
    fn peek_tok(&mut self) -> Tok {
        if self.parens > 0 {
            self.skip_newlines();
        }
        self.peek().tok.clone()
    }

    fn unexpected<T>(&self, expected: &str) -> PResult<T> {
        let t = self.peek();
        Err(syntax(
            t.pos,
            t.tok.text(),
            format!("expected {expected}, found {}", t.tok.text()),
        ))
    }

    fn end_of_clause(&mut self) -> PResult<()> {
        match self.peek().tok {
            Tok::Newline => {
                self.bump();
                Ok(())
            }
            Tok::Eof | Tok::Section(_) => Ok(()),
            _ => self.unexpected("end of clause"),
        }
    }

    fn declaration(&mut self, owner: Owner) -> PResult<RawDecl> {
        let t = self.bump();
        let Tok::Ident(name) = t.tok else {
            self.at -= 1;
            return self.unexpected("variable name");
        };
        if is_keyword(&name) {
            return Err(syntax(t.pos, name, "reserved word used as variable name"));
        }
        if self.peek().tok != Tok::Colon {
            return self.unexpected("`:`");
        }
        self.bump();
        let dpos = self.peek().pos;
        let domain = match self.peek().tok.clone() {
            Tok::Ident(k) if k == "bool" => {
                self.bump();
                Domain::Bool
            }
            Tok::Int(_) | Tok::Minus => {
                let lo = self.signed_int()?;
                if self.peek().tok != Tok::DotDot {
                    return self.unexpected("`..`");
                }
                self.bump();
                let hi = self.signed_int()?;
                if lo > hi {
                    return Err(syntax(dpos, format!("{lo}..{hi}"), "empty domain (lo > hi)"));
                }
                Domain::Range {
                    lo: lo as i32,
                    hi: hi as i32,
                }
            }
            _ => return self.unexpected("`bool` or `lo..hi`"),
        };
        Ok(RawDecl {
            decl: VarDecl { name, owner, domain },
            pos: t.pos,
        })
    }

    fn signed_int(&mut self) -> PResult<i64> {
        let neg = if self.peek().tok == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        match self.peek().tok {
            Tok::Int(v) => {
                self.bump();
                Ok(if neg { -v } else { v })
            }
            _ => self.unexpected("integer"),
        }
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            let t = self.peek();
            return Err(syntax(t.pos, t.tok.text(), "expression nested too deeply"));
        }
        Ok(())
    }

    fn expr(&mut self) -> PResult<Raw> {
        self.enter()?;
        let mut lhs = self.implication()?;
        while self.peek_tok() == Tok::Iff {
            let t = self.bump();
            let rhs = self.implication()?;
            lhs = node(RawKind::Bin(BoolOp::Iff, Box::new(lhs), Box::new(rhs)), &t);
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn implication(&mut self) -> PResult<Raw> {
        self.enter()?;
        let lhs = self.disjunction()?;
        let out = if self.peek_tok() == Tok::Arrow {
            let t = self.bump();
            let rhs = self.implication()?;
            node(RawKind::Bin(BoolOp::Implies, Box::new(lhs), Box::new(rhs)), &t)
        } else {
            lhs
        };
        self.depth -= 1;
        Ok(out)
    }

    fn disjunction(&mut self) -> PResult<Raw> {
        let mut lhs = self.conjunction()?;
        while self.peek_tok() == Tok::Pipe {
            let t = self.bump();
            let rhs = self.conjunction()?;
            lhs = node(RawKind::Bin(BoolOp::Or, Box::new(lhs), Box::new(rhs)), &t);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> PResult<Raw> {
        let mut lhs = self.unary()?;
        while self.peek_tok() == Tok::Amp {
            let t = self.bump();
            let rhs = self.unary()?;
            lhs = node(RawKind::Bin(BoolOp::And, Box::new(lhs), Box::new(rhs)), &t);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Raw> {
        if self.peek_tok() == Tok::Bang {
            self.enter()?;
            let t = self.bump();
            let inner = self.unary()?;
            self.depth -= 1;
            return Ok(node(RawKind::Not(Box::new(inner)), &t));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> PResult<Raw> {
        let lhs = self.arith()?;
        let op = match self.peek_tok() {
            Tok::Eq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            _ => return Ok(lhs),
        };
        let t = self.bump();
        let rhs = self.arith()?;
        Ok(node(RawKind::Cmp(op, Box::new(lhs), Box::new(rhs)), &t))
    }

    fn arith(&mut self) -> PResult<Raw> {
        let mut lhs = self.atom()?;
        loop {
            let op = match self.peek_tok() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => return Ok(lhs),
            };
            let t = self.bump();
            let rhs = self.atom()?;
            lhs = node(RawKind::Arith(op, Box::new(lhs), Box::new(rhs)), &t);
        }
    }

    fn atom(&mut self) -> PResult<Raw> {
        let t = self.peek().clone();
        match self.peek_tok() {
            Tok::Int(v) => {
                let t = self.bump();
                Ok(node(RawKind::Int(v), &t))
            }
            Tok::Minus => {
                self.bump();
                match self.peek_tok() {
                    Tok::Int(v) if v <= MAX_LITERAL => {
                        self.bump();
                        Ok(Raw {
                            kind: RawKind::Int(-v),
                            pos: t.pos,
                            token: format!("-{v}"),
                        })
                    }
                    _ => self.unexpected("integer after unary `-`"),
                }
            }
            Tok::Ident(name) => {
                let t = self.bump();
                match name.as_str() {
                    "true" => return Ok(node(RawKind::Bool(true), &t)),
                    "false" => return Ok(node(RawKind::Bool(false), &t)),
                    "bool" => return Err(syntax(t.pos, name, "`bool` is not an expression")),
                    _ => {}
                }
                let next = if self.peek().tok == Tok::Prime {
                    self.bump();
                    true
                } else {
                    false
                };
                Ok(node(RawKind::Var { name, next }, &t))
            }
            Tok::LParen => {
                self.bump();
                self.parens += 1;
                let inner = self.expr();
                self.parens -= 1;
                let inner = inner?;
                if self.peek_tok() != Tok::RParen {
                    return self.unexpected("`)`");
                }
                self.bump();
                Ok(inner)
            }
            _ => self.unexpected("expression"),
        }
    }
}

fn node(kind: RawKind, t: &Token) -> Raw {
    Raw {
        kind,
        pos: t.pos,
        token: t.tok.text(),
    }
}

fn is_keyword(name: &str) -> bool {
    matches!(name, "true" | "false" | "bool")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ty {
    Bool,
    Int,
}

struct Resolver<'a> {
    vars: &'a [VarDecl],
    index: &'a HashMap<&'a str, VarId>,
}

impl Resolver<'_> {
    fn resolve(&self, raw: &Raw, section: Section) -> PResult<(Expr, Ty)> {
        let mismatch = |msg: &str| {
            Err(Diagnostic::new(
                DiagnosticKind::TypeMismatch,
                raw.pos,
                raw.token.clone(),
                msg,
            ))
        };
        Ok(match &raw.kind {
            RawKind::Bool(b) => (Expr::Bool(*b), Ty::Bool),
            RawKind::Int(v) => (Expr::Int(*v), Ty::Int),
            RawKind::Var { name, next } => {
                let id = *self.index.get(name.as_str()).ok_or_else(|| {
                    Diagnostic::new(
                        DiagnosticKind::UnknownVariable,
                        raw.pos,
                        name.clone(),
                        format!("`{name}` is not declared"),
                    )
                })?;
                let decl = &self.vars[id];
                self.check_placement(raw, name, decl.owner, *next, section)?;
                let ty = if decl.domain.is_bool() { Ty::Bool } else { Ty::Int };
                (Expr::Var { id, next: *next }, ty)
            }
            RawKind::Not(inner) => {
                let (e, ty) = self.resolve(inner, section)?;
                if ty != Ty::Bool {
                    return mismatch("`!` needs a boolean operand");
                }
                (Expr::not(e), Ty::Bool)
            }
            RawKind::Bin(op, a, b) => {
                let (ea, ta) = self.resolve(a, section)?;
                let (eb, tb) = self.resolve(b, section)?;
                if ta != Ty::Bool || tb != Ty::Bool {
                    return mismatch(&format!("`{}` needs boolean operands", op.symbol()));
                }
                (Expr::bin(*op, ea, eb), Ty::Bool)
            }
            RawKind::Cmp(op, a, b) => {
                let (ea, ta) = self.resolve(a, section)?;
                let (eb, tb) = self.resolve(b, section)?;
                let ordered = !matches!(op, CmpOp::Eq | CmpOp::Ne);
                if ta != tb || (ordered && ta != Ty::Int) {
                    return mismatch(&format!("operands of `{}` have incompatible types", op));
                }
                (Expr::cmp(*op, ea, eb), Ty::Bool)
            }
            RawKind::Arith(op, a, b) => {
                let (ea, ta) = self.resolve(a, section)?;
                let (eb, tb) = self.resolve(b, section)?;
                if ta != Ty::Int || tb != Ty::Int {
                    return mismatch("arithmetic needs integer operands");
                }
                (Expr::arith(*op, ea, eb), Ty::Int)
            }
        })
    }

    fn check_placement(
        &self,
        raw: &Raw,
        name: &str,
        owner: Owner,
        next: bool,
        section: Section,
    ) -> PResult<()> {
        let fail = |kind, msg: String| Err(Diagnostic::new(kind, raw.pos, name, msg));
        match section {
            Section::EnvInit | Section::SysInit | Section::EnvLiveness | Section::SysLiveness
                if next =>
            {
                fail(
                    DiagnosticKind::MisplacedReference,
                    format!("next-step reference `{name}'` in [{}]", section.header()),
                )
            }
            Section::EnvInit if owner == Owner::Sys => fail(
                DiagnosticKind::MisplacedReference,
                format!("system variable `{name}` in [ENV_INIT]"),
            ),
            Section::EnvTrans if next && owner == Owner::Sys => fail(
                DiagnosticKind::OwnershipViolation,
                format!("environment safety reads next-step system variable `{name}'`"),
            ),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys_clause(src: &str) -> Expr {
        let doc = parse_spec(&format!("[SYS_VARS]\na : bool\nb : bool\nx : 0..9\n[SYS_TRANS]\n{src}\n"))
            .unwrap();
        doc.sys_safety[0].clone()
    }

    #[test]
    fn precedence_and_associativity() {
        // & binds tighter than |, which binds tighter than ->
        let e = sys_clause("a | b & a -> b");
        let Expr::Bin(BoolOp::Implies, lhs, _) = e else { panic!() };
        assert!(matches!(*lhs, Expr::Bin(BoolOp::Or, _, _)));
        // -> is right associative
        let e = sys_clause("a -> b -> a");
        let Expr::Bin(BoolOp::Implies, _, rhs) = e else { panic!() };
        assert!(matches!(*rhs, Expr::Bin(BoolOp::Implies, _, _)));
        // ! applies to the whole comparison
        let e = sys_clause("!x = 1");
        assert!(matches!(e, Expr::Not(inner) if matches!(*inner, Expr::Cmp(..))));
    }

    #[test]
    fn parenthesised_clause_may_span_lines() {
        let e = sys_clause("(a &\n b)");
        assert!(matches!(e, Expr::Bin(BoolOp::And, _, _)));
    }

    #[test]
    fn vars_are_reordered_env_first() {
        let doc = parse_spec("[SYS_VARS]\ns : bool\n[ENV_VARS]\ne : 0..2\n").unwrap();
        assert_eq!(doc.vars[0].name, "e");
        assert_eq!(doc.vars[1].name, "s");
    }

    #[test]
    fn deep_nesting_is_a_diagnostic() {
        let src = format!("[SYS_VARS]\na : bool\n[SYS_TRANS]\n{}a{}\n", "(".repeat(5000), ")".repeat(5000));
        assert_eq!(parse_spec(&src).unwrap_err().kind, DiagnosticKind::SyntaxError);
        let src = format!("[SYS_VARS]\na : bool\n[SYS_TRANS]\n{}a\n", "!".repeat(5000));
        assert_eq!(parse_spec(&src).unwrap_err().kind, DiagnosticKind::SyntaxError);
    }

    #[test]
    fn negative_literals_and_domains() {
        let doc = parse_spec("[SYS_VARS]\nx : -3..3\n[SYS_TRANS]\nx' = x - -1\n").unwrap();
        assert_eq!(doc.vars[0].domain, Domain::Range { lo: -3, hi: 3 });
        assert!(doc.sys_safety[0].holds(&[-2], &[-1]));
    }
}
