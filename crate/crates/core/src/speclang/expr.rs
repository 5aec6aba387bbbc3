//! Typed expression trees over declared variables.

use std::fmt;

use thiserror::Error;

/// Index of a variable in the document's declaration order.
pub type VarId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    fn apply(self, lhs: i64, rhs: i64) -> bool {
        match self {
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ne => lhs != rhs,
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Ge => lhs >= rhs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoolOp {
    And,
    Or,
    Implies,
    Iff,
}

impl BoolOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BoolOp::And => "&",
            BoolOp::Or => "|",
            BoolOp::Implies => "->",
            BoolOp::Iff => "<->",
        }
    }
}

/// A resolved, type-checked expression.
///
/// Boolean-typed nodes evaluate to 0/1 so that booleans and integers share
/// one evaluation path.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Bool(bool),
    Int(i64),
    /// Variable reference; `next` marks the primed (next-step) form.
    Var { id: VarId, next: bool },
    Not(Box<Expr>),
    Bin(BoolOp, Box<Expr>, Box<Expr>),
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    Arith(ArithOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("no binding for next-step variable #{0}")]
    MissingBinding(VarId),
    #[error("no binding for current-step variable #{0}")]
    MissingCurrent(VarId),
}

impl Expr {
    pub fn var(id: VarId) -> Expr {
        Expr::Var { id, next: false }
    }

    pub fn next(id: VarId) -> Expr {
        Expr::Var { id, next: true }
    }

    pub fn not(e: Expr) -> Expr {
        Expr::Not(Box::new(e))
    }

    pub fn bin(op: BoolOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn cmp(op: CmpOp, a: Expr, b: Expr) -> Expr {
        Expr::Cmp(op, Box::new(a), Box::new(b))
    }

    pub fn arith(op: ArithOp, a: Expr, b: Expr) -> Expr {
        Expr::Arith(op, Box::new(a), Box::new(b))
    }

    /// Evaluate with an arbitrary variable lookup. Returns 0/1 for boolean
    /// nodes and the exact integer value for arithmetic ones.
    pub fn eval_with<F>(&self, lookup: &F) -> Result<i64, EvalError>
    where
        F: Fn(VarId, bool) -> Option<i64>,
    {
        Ok(match self {
            Expr::Bool(b) => *b as i64,
            Expr::Int(v) => *v,
            Expr::Var { id, next } => match lookup(*id, *next) {
                Some(v) => v,
                None if *next => return Err(EvalError::MissingBinding(*id)),
                None => return Err(EvalError::MissingCurrent(*id)),
            },
            Expr::Not(e) => (e.eval_with(lookup)? == 0) as i64,
            Expr::Bin(op, a, b) => {
                let a = a.eval_with(lookup)? != 0;
                // short-circuit where the result is already fixed
                match (op, a) {
                    (BoolOp::And, false) => return Ok(0),
                    (BoolOp::Or, true) => return Ok(1),
                    (BoolOp::Implies, false) => return Ok(1),
                    _ => {}
                }
                let b = b.eval_with(lookup)? != 0;
                (match op {
                    BoolOp::And => a && b,
                    BoolOp::Or => a || b,
                    BoolOp::Implies => !a || b,
                    BoolOp::Iff => a == b,
                }) as i64
            }
            Expr::Cmp(op, a, b) => op.apply(a.eval_with(lookup)?, b.eval_with(lookup)?) as i64,
            Expr::Arith(op, a, b) => {
                let (a, b) = (a.eval_with(lookup)?, b.eval_with(lookup)?);
                match op {
                    ArithOp::Add => a + b,
                    ArithOp::Sub => a - b,
                }
            }
        })
    }

    /// Evaluate as a boolean over a full current valuation and a partial
    /// next-step valuation.
    pub fn eval(&self, current: &[i32], next: &[Option<i32>]) -> Result<bool, EvalError> {
        self.eval_with(&|id, is_next| {
            if is_next {
                next.get(id).copied().flatten().map(i64::from)
            } else {
                current.get(id).map(|v| i64::from(*v))
            }
        })
        .map(|v| v != 0)
    }

    /// Evaluate over a full pair of valuations. Panics on out-of-range ids,
    /// which the resolver rules out.
    pub fn holds(&self, current: &[i32], next: &[i32]) -> bool {
        self.eval_with(&|id, is_next| {
            Some(i64::from(if is_next { next[id] } else { current[id] }))
        })
        .map(|v| v != 0)
        .unwrap_or(false)
    }

    /// Evaluate a state formula (no next-step references).
    pub fn holds_at(&self, state: &[i32]) -> bool {
        self.holds(state, state)
    }

    /// Substitute the current-step values and fold constants. The result
    /// only mentions next-step variables.
    pub fn specialize(&self, current: &[i32]) -> Expr {
        self.substitute(&|id, next| (!next).then(|| i64::from(current[id])))
    }

    /// Replace every reference the binding resolves by its value and fold
    /// constants.
    pub fn substitute(&self, bind: &impl Fn(VarId, bool) -> Option<i64>) -> Expr {
        match self {
            Expr::Bool(_) | Expr::Int(_) => self.clone(),
            Expr::Var { id, next } => match bind(*id, *next) {
                Some(v) => Expr::Int(v),
                None => self.clone(),
            },
            Expr::Not(e) => match e.substitute(bind) {
                Expr::Bool(b) => Expr::Bool(!b),
                Expr::Int(v) => Expr::Bool(v == 0),
                other => Expr::not(other),
            },
            Expr::Bin(op, a, b) => fold_bin(*op, a.substitute(bind), b.substitute(bind)),
            Expr::Cmp(op, a, b) => {
                let a = a.substitute(bind);
                let b = b.substitute(bind);
                match (const_of(&a), const_of(&b)) {
                    (Some(x), Some(y)) => Expr::Bool(op.apply(x, y)),
                    _ => Expr::cmp(*op, a, b),
                }
            }
            Expr::Arith(op, a, b) => {
                let a = a.substitute(bind);
                let b = b.substitute(bind);
                match (const_of(&a), const_of(&b)) {
                    (Some(x), Some(y)) => Expr::Int(match op {
                        ArithOp::Add => x + y,
                        ArithOp::Sub => x - y,
                    }),
                    _ => Expr::arith(*op, a, b),
                }
            }
        }
    }

    /// Constant truth value, if the expression is a literal.
    pub fn as_const_bool(&self) -> Option<bool> {
        match self {
            Expr::Bool(b) => Some(*b),
            Expr::Int(v) => Some(*v != 0),
            _ => None,
        }
    }

    /// Visit every variable reference.
    pub fn for_each_ref(&self, f: &mut impl FnMut(VarId, bool)) {
        match self {
            Expr::Bool(_) | Expr::Int(_) => {}
            Expr::Var { id, next } => f(*id, *next),
            Expr::Not(e) => e.for_each_ref(f),
            Expr::Bin(_, a, b) | Expr::Cmp(_, a, b) | Expr::Arith(_, a, b) => {
                a.for_each_ref(f);
                b.for_each_ref(f);
            }
        }
    }

    pub fn has_next_refs(&self) -> bool {
        let mut found = false;
        self.for_each_ref(&mut |_, next| found |= next);
        found
    }

    /// Largest variable id referenced in next-step form.
    pub fn max_next_ref(&self) -> Option<VarId> {
        let mut max = None;
        self.for_each_ref(&mut |id, next| {
            if next {
                max = Some(max.map_or(id, |m: VarId| m.max(id)));
            }
        });
        max
    }
}

fn const_of(e: &Expr) -> Option<i64> {
    match e {
        Expr::Bool(b) => Some(*b as i64),
        Expr::Int(v) => Some(*v),
        _ => None,
    }
}

fn fold_bin(op: BoolOp, a: Expr, b: Expr) -> Expr {
    let ca = a.as_const_bool();
    let cb = b.as_const_bool();
    match op {
        BoolOp::And => match (ca, cb) {
            (Some(false), _) | (_, Some(false)) => Expr::Bool(false),
            (Some(true), _) => b,
            (_, Some(true)) => a,
            _ => Expr::bin(op, a, b),
        },
        BoolOp::Or => match (ca, cb) {
            (Some(true), _) | (_, Some(true)) => Expr::Bool(true),
            (Some(false), _) => b,
            (_, Some(false)) => a,
            _ => Expr::bin(op, a, b),
        },
        BoolOp::Implies => match (ca, cb) {
            (Some(false), _) | (_, Some(true)) => Expr::Bool(true),
            (Some(true), _) => b,
            (_, Some(false)) => Expr::not(a),
            _ => Expr::bin(op, a, b),
        },
        BoolOp::Iff => match (ca, cb) {
            (Some(x), Some(y)) => Expr::Bool(x == y),
            (Some(true), _) => b,
            (_, Some(true)) => a,
            (Some(false), _) => Expr::not(b),
            (_, Some(false)) => Expr::not(a),
            _ => Expr::bin(op, a, b),
        },
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn specialize_folds_false_antecedent() {
        // v0 = 1 -> v1' = 0
        let e = Expr::bin(
            BoolOp::Implies,
            Expr::cmp(CmpOp::Eq, Expr::var(0), Expr::Int(1)),
            Expr::cmp(CmpOp::Eq, Expr::next(1), Expr::Int(0)),
        );
        assert_eq!(e.specialize(&[0, 5]), Expr::Bool(true));
        let residual = e.specialize(&[1, 5]);
        assert!(residual.has_next_refs());
        assert!(residual.holds(&[1, 5], &[0, 0]));
        assert!(!residual.holds(&[1, 5], &[0, 3]));
    }

    #[test]
    fn missing_next_binding_is_reported() {
        let e = Expr::cmp(CmpOp::Eq, Expr::next(0), Expr::Int(1));
        assert_eq!(e.eval(&[0], &[None]), Err(EvalError::MissingBinding(0)));
    }
}
