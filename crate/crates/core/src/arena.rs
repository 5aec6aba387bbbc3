//! Explicit two-player game arena compiled from a [`SpecDocument`].
//!
//! A state is a full valuation. States are numbered by mixed-radix encoding
//! with the first declared variable most significant; since environment
//! variables come first, `state = env_assignment * sys_assignments + sys_assignment`.
//! Each step the environment picks its next values, then the system picks
//! its own, seeing the environment's choice.

use std::collections::HashMap;
use std::io::{self, Write};
use std::rc::Rc;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::speclang::{Expr, Owner, SpecDocument, VarDecl, VarId};

pub const DEFAULT_STATE_CAP: u64 = 1 << 24;

pub type StateId = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArenaError {
    #[error("valuation space has {states} states, above the cap of {cap}")]
    CapacityExceeded { states: u128, cap: u64 },
}

/// Immutable game graph. Move relations are stored in compressed rows:
/// per state the legal environment assignments, per environment move the
/// successor states the system may choose.
#[derive(Debug, Clone)]
pub struct GameArena {
    doc: SpecDocument,
    n_env_vars: usize,
    strides: Vec<u64>,
    num_env_assign: u64,
    num_sys_assign: u64,
    env_offsets: Vec<usize>,
    env_moves: Vec<u32>,
    succ_offsets: Vec<usize>,
    succ: Vec<StateId>,
    env_init: Vec<u32>,
    init: FixedBitSet,
    env_live: Vec<FixedBitSet>,
    sys_live: Vec<FixedBitSet>,
}

pub fn build_arena(doc: &SpecDocument) -> Result<GameArena, ArenaError> {
    build_arena_with_cap(doc, DEFAULT_STATE_CAP)
}

pub fn build_arena_with_cap(doc: &SpecDocument, cap: u64) -> Result<GameArena, ArenaError> {
    let total: u128 = doc.vars.iter().map(|v| u128::from(v.domain.size())).product();
    if total > u128::from(cap) || total > u128::from(u32::MAX) {
        return Err(ArenaError::CapacityExceeded { states: total, cap });
    }
    let n = doc.vars.len();
    let mut strides = vec![1u64; n];
    for i in (0..n.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * doc.vars[i + 1].domain.size();
    }
    let n_env_vars = doc.vars.iter().filter(|v| v.owner == Owner::Env).count();
    let size_of = |owner| -> u64 {
        doc.vars
            .iter()
            .filter(|v| v.owner == owner)
            .map(|v| v.domain.size())
            .product()
    };
    let mut arena = GameArena {
        doc: doc.clone(),
        n_env_vars,
        strides,
        num_env_assign: size_of(Owner::Env),
        num_sys_assign: size_of(Owner::Sys),
        env_offsets: Vec::with_capacity(total as usize + 1),
        env_moves: Vec::new(),
        succ_offsets: vec![0],
        succ: Vec::new(),
        env_init: Vec::new(),
        init: FixedBitSet::with_capacity(total as usize),
        env_live: Vec::new(),
        sys_live: Vec::new(),
    };
    arena.build_moves();
    arena.build_init();
    arena.env_live = doc.env_liveness.iter().map(|e| arena.predicate(e)).collect();
    arena.sys_live = doc.sys_liveness.iter().map(|e| arena.predicate(e)).collect();
    Ok(arena)
}

/// Residual clauses bucketed by the enumeration depth at which all their
/// next-step variables are bound. Bucket 0 holds clauses checked before
/// any variable of the group is chosen.
struct Buckets(Vec<Vec<Expr>>);

impl Buckets {
    fn new(residuals: Vec<Expr>, first: usize, count: usize) -> Buckets {
        let mut buckets = vec![Vec::new(); count + 1];
        for r in residuals {
            let depth = match r.max_next_ref() {
                Some(id) if id >= first => id - first + 1,
                _ => 0,
            };
            buckets[depth].push(r);
        }
        Buckets(buckets)
    }

    fn check(&self, depth: usize, cur: &[i32], next: &[i32]) -> bool {
        self.0[depth].iter().all(|c| c.holds(cur, next))
    }
}

const UNSET: u32 = u32::MAX;
const TRUE: u32 = u32::MAX - 1;
const FALSE: u32 = u32::MAX - 2;

/// Residuals of one clause, indexed by the projection of the current
/// state onto the variables the clause reads in current-step form.
struct ClauseTable {
    support: Vec<VarId>,
    entries: Vec<u32>,
}

impl ClauseTable {
    fn new(clause: &Expr, vars: &[VarDecl]) -> ClauseTable {
        let mut support = Vec::new();
        clause.for_each_ref(&mut |id, next| {
            if !next && !support.contains(&id) {
                support.push(id);
            }
        });
        support.sort_unstable();
        let size: u64 = support.iter().map(|id| vars[*id].domain.size()).product();
        ClauseTable {
            support,
            entries: vec![UNSET; size as usize],
        }
    }

    fn slot(&self, cur: &[i32], vars: &[VarDecl]) -> usize {
        self.support.iter().fold(0, |acc, id| {
            let d = vars[*id].domain;
            acc * d.size() as usize + (cur[*id] - d.lo()) as usize
        })
    }
}

/// Hash-consed residual expressions.
#[derive(Default)]
struct Interner {
    exprs: Vec<Expr>,
    ids: HashMap<Expr, u32>,
}

impl Interner {
    fn residual(&mut self, clause: &Expr, cur: &[i32]) -> u32 {
        let r = clause.specialize(cur);
        match r.as_const_bool() {
            Some(true) => TRUE,
            Some(false) => FALSE,
            None => {
                let next_id = self.exprs.len() as u32;
                *self.ids.entry(r).or_insert_with_key(|r| {
                    self.exprs.push(r.clone());
                    next_id
                })
            }
        }
    }
}

/// Environment moves of a state with their system responses, as
/// assignment indices.
type MoveTable = Rc<Vec<(u32, Vec<u32>)>>;

impl GameArena {
    fn build_moves(&mut self) {
        let vars = self.doc.vars.clone();
        let mut cur = self.first_valuation();
        let total = self.num_states();
        self.env_offsets.push(0);

        // residuals repeat across states, so both the specialization of each
        // clause and the enumeration per residual set are memoized
        let mut interner = Interner::default();
        let mut env_tables: Vec<ClauseTable> =
            self.doc.env_safety.iter().map(|c| ClauseTable::new(c, &vars)).collect();
        let mut sys_tables: Vec<ClauseTable> =
            self.doc.sys_safety.iter().map(|c| ClauseTable::new(c, &vars)).collect();
        let mut cache: HashMap<(Vec<u32>, Vec<u32>), MoveTable> = HashMap::new();

        for _ in 0..total {
            let env_key = residual_key(&mut env_tables, &self.doc.env_safety, &mut interner, &cur, &vars);
            let sys_key = residual_key(&mut sys_tables, &self.doc.sys_safety, &mut interner, &cur, &vars);
            let key = (env_key, sys_key);
            let table = match cache.get(&key) {
                Some(t) => t.clone(),
                None => {
                    let t = Rc::new(self.enumerate_moves(&key.0, &key.1, &interner, &cur));
                    cache.insert(key, t.clone());
                    t
                }
            };
            for (env, sys) in table.iter() {
                self.env_moves.push(*env);
                let base = u64::from(*env) * self.num_sys_assign;
                self.succ
                    .extend(sys.iter().map(|y| (base + u64::from(*y)) as StateId));
                self.succ_offsets.push(self.succ.len());
            }
            self.env_offsets.push(self.env_moves.len());
            self.increment(&mut cur);
        }
    }

    /// Moves allowed by interned residual clauses. Residuals only read
    /// next-step variables, so the result does not depend on `cur`.
    fn enumerate_moves(&self, env_key: &[u32], sys_key: &[u32], interner: &Interner, cur: &[i32]) -> Vec<(u32, Vec<u32>)> {
        let vars = &self.doc.vars;
        let n_env = self.n_env_vars;
        let n_sys = vars.len() - n_env;
        let resolve = |key: &[u32]| -> Vec<Expr> { key.iter().map(|id| interner.exprs[*id as usize].clone()).collect() };
        if env_key.contains(&FALSE) {
            return Vec::new();
        }
        let mut next = cur.to_vec();
        let env_b = Buckets::new(resolve(env_key), 0, n_env);
        let mut env_moves = Vec::new();
        enumerate(vars, 0, n_env, &env_b, cur, &mut next, &mut |v| {
            env_moves.push((v[..n_env].to_vec(), self.env_index(v)))
        });
        if sys_key.contains(&FALSE) {
            return env_moves.into_iter().map(|(_, e)| (e, Vec::new())).collect();
        }

        // clauses that ignore the environment's move are enumerated once
        let (mut env_only, mut pure, mut mixed) = (Vec::new(), Vec::new(), Vec::new());
        for r in resolve(sys_key) {
            let (mut env_next, mut sys_next) = (false, false);
            r.for_each_ref(&mut |id, next| {
                if next {
                    if id < n_env {
                        env_next = true;
                    } else {
                        sys_next = true;
                    }
                }
            });
            match (env_next, sys_next) {
                (_, false) => env_only.push(r),
                (false, true) => pure.push(r),
                (true, true) => mixed.push(r),
            }
        }
        let pure = Buckets::new(pure, n_env, n_sys);
        let mut responses = Vec::new();
        enumerate(vars, n_env, n_sys, &pure, cur, &mut next, &mut |v| {
            responses.push((v[n_env..].to_vec(), self.sys_index(v)))
        });

        env_moves
            .into_iter()
            .map(|(e, env)| {
                next[..n_env].copy_from_slice(&e);
                let mut sys = Vec::new();
                if env_only.iter().all(|c| c.holds(cur, &next)) {
                    for (y, idx) in &responses {
                        next[n_env..].copy_from_slice(y);
                        if mixed.iter().all(|c| c.holds(cur, &next)) {
                            sys.push(*idx);
                        }
                    }
                }
                (env, sys)
            })
            .collect()
    }

    fn build_init(&mut self) {
        let n_env = self.n_env_vars;
        let mut v = self.first_valuation();
        for s in 0..self.num_states() {
            let env_ok = self.doc.env_init.iter().all(|c| c.holds_at(&v));
            if env_ok {
                if (s as u64).is_multiple_of(self.num_sys_assign) {
                    self.env_init.push((s as u64 / self.num_sys_assign) as u32);
                }
                if self.doc.sys_init.iter().all(|c| c.holds_at(&v)) {
                    self.init.insert(s);
                }
            }
            self.increment(&mut v);
        }
        debug_assert!(n_env <= self.doc.vars.len());
    }

    fn first_valuation(&self) -> Vec<i32> {
        self.doc.vars.iter().map(|v| v.domain.lo()).collect()
    }

    /// Advance a valuation to the next one in index order.
    fn increment(&self, v: &mut [i32]) {
        for i in (0..v.len()).rev() {
            if v[i] < self.doc.vars[i].domain.hi() {
                v[i] += 1;
                return;
            }
            v[i] = self.doc.vars[i].domain.lo();
        }
    }

    pub fn doc(&self) -> &SpecDocument {
        &self.doc
    }

    pub fn vars(&self) -> &[VarDecl] {
        &self.doc.vars
    }

    pub fn num_env_vars(&self) -> usize {
        self.n_env_vars
    }

    pub fn num_states(&self) -> usize {
        self.doc
            .vars
            .iter()
            .map(|v| v.domain.size() as usize)
            .product()
    }

    pub fn num_env_assignments(&self) -> u64 {
        self.num_env_assign
    }

    pub fn num_sys_assignments(&self) -> u64 {
        self.num_sys_assign
    }

    pub fn encode(&self, v: &[i32]) -> usize {
        v.iter()
            .zip(&self.doc.vars)
            .zip(&self.strides)
            .map(|((x, d), s)| (x - d.domain.lo()) as u64 * s)
            .sum::<u64>() as usize
    }

    pub fn decode(&self, s: usize) -> Vec<i32> {
        let mut rest = s as u64;
        self.doc
            .vars
            .iter()
            .zip(&self.strides)
            .map(|(d, stride)| {
                let digit = rest / stride;
                rest %= stride;
                d.domain.lo() + digit as i32
            })
            .collect()
    }

    /// Mixed-radix index of the environment part of a valuation (or of a
    /// bare environment assignment).
    pub fn env_index(&self, v: &[i32]) -> u32 {
        let full = self.encode_prefix(&v[..self.n_env_vars], 0);
        (full / self.num_sys_assign) as u32
    }

    /// Mixed-radix index of the system part of a full valuation.
    pub fn sys_index(&self, v: &[i32]) -> u32 {
        (self.encode(v) as u64 % self.num_sys_assign) as u32
    }

    fn encode_prefix(&self, part: &[i32], offset: usize) -> u64 {
        part.iter()
            .enumerate()
            .map(|(i, x)| {
                let d = &self.doc.vars[offset + i];
                (x - d.domain.lo()) as u64 * self.strides[offset + i]
            })
            .sum()
    }

    /// Values of the environment variables for an environment assignment index.
    pub fn env_values(&self, env: u32) -> Vec<i32> {
        let s = u64::from(env) * self.num_sys_assign;
        self.decode(s as usize)[..self.n_env_vars].to_vec()
    }

    /// Values of the system variables for a system assignment index.
    pub fn sys_values(&self, sys: u32) -> Vec<i32> {
        self.decode(sys as usize)[self.n_env_vars..].to_vec()
    }

    pub fn compose(&self, env: u32, sys: u32) -> StateId {
        (u64::from(env) * self.num_sys_assign + u64::from(sys)) as StateId
    }

    /// Range of environment-move slots for a state.
    fn env_range(&self, s: usize) -> std::ops::Range<usize> {
        self.env_offsets[s]..self.env_offsets[s + 1]
    }

    /// Legal environment assignments at `s`, ascending by index. Empty means
    /// the environment is deadlocked.
    pub fn env_moves(&self, s: usize) -> &[u32] {
        &self.env_moves[self.env_range(s)]
    }

    /// Legal successor states for the `k`-th environment move of `s`,
    /// ascending. Empty means the system is deadlocked under that move.
    pub fn successors(&self, s: usize, k: usize) -> &[StateId] {
        let slot = self.env_offsets[s] + k;
        &self.succ[self.succ_offsets[slot]..self.succ_offsets[slot + 1]]
    }

    /// Iterate `(env assignment, successors)` pairs for a state.
    pub fn moves(&self, s: usize) -> impl Iterator<Item = (u32, &[StateId])> + '_ {
        self.env_range(s).map(move |slot| {
            (
                self.env_moves[slot],
                &self.succ[self.succ_offsets[slot]..self.succ_offsets[slot + 1]],
            )
        })
    }

    /// Successors for a specific environment assignment, if it is legal at `s`.
    pub fn sys_moves(&self, s: usize, env: u32) -> Option<&[StateId]> {
        let k = self.env_moves(s).binary_search(&env).ok()?;
        Some(self.successors(s, k))
    }

    /// Legal environment assignments at `s` as value vectors.
    pub fn env_move_values(&self, s: usize) -> Vec<Vec<i32>> {
        self.env_moves(s).iter().map(|e| self.env_values(*e)).collect()
    }

    /// Legal system assignments at `s` under `env` as value vectors.
    pub fn sys_move_values(&self, s: usize, env: u32) -> Vec<Vec<i32>> {
        self.sys_moves(s, env)
            .unwrap_or(&[])
            .iter()
            .map(|t| self.decode(*t as usize)[self.n_env_vars..].to_vec())
            .collect()
    }

    pub fn num_edges(&self) -> usize {
        self.succ.len()
    }

    /// Environment assignments satisfying the environment's initial condition.
    pub fn env_init(&self) -> &[u32] {
        &self.env_init
    }

    /// States satisfying both initial conditions.
    pub fn init_states(&self) -> &FixedBitSet {
        &self.init
    }

    pub fn env_liveness(&self) -> &[FixedBitSet] {
        &self.env_live
    }

    pub fn sys_liveness(&self) -> &[FixedBitSet] {
        &self.sys_live
    }

    /// States satisfying a state formula.
    pub fn predicate(&self, e: &Expr) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(self.num_states());
        let mut v = self.first_valuation();
        for s in 0..self.num_states() {
            if e.holds_at(&v) {
                out.insert(s);
            }
            self.increment(&mut v);
        }
        out
    }

    /// Render an assignment restricted to one owner as `name=value` pairs.
    pub fn show_assignment(&self, owner: Owner, values: &[i32]) -> String {
        self.doc
            .vars
            .iter()
            .filter(|v| v.owner == owner)
            .zip(values)
            .map(|(d, x)| format!("{}={}", d.name, x))
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Line-oriented adjacency dump: `state TAB env TAB sys`.
    pub fn dump(&self, out: &mut impl Write) -> io::Result<()> {
        for s in 0..self.num_states() {
            for (e, succ) in self.moves(s) {
                let env = self.show_assignment(Owner::Env, &self.env_values(e));
                for t in succ {
                    let sys = &self.decode(*t as usize)[self.n_env_vars..];
                    writeln!(out, "{s}\t{env}\t{}", self.show_assignment(Owner::Sys, sys))?;
                }
            }
        }
        Ok(())
    }
}

/// Depth-first enumeration of values for `count` variables starting at
/// `first`, pruning with clauses as soon as all their variables are bound.
/// Interned residual ids of a clause list at the current state, skipping
/// clauses that hold outright. A falsified clause yields `FALSE` as key.
fn residual_key(
    tables: &mut [ClauseTable],
    clauses: &[Expr],
    interner: &mut Interner,
    cur: &[i32],
    vars: &[VarDecl],
) -> Vec<u32> {
    let mut key = Vec::with_capacity(clauses.len());
    for (table, clause) in tables.iter_mut().zip(clauses) {
        let slot = table.slot(cur, vars);
        if table.entries[slot] == UNSET {
            table.entries[slot] = interner.residual(clause, cur);
        }
        match table.entries[slot] {
            TRUE => {}
            FALSE => return vec![FALSE],
            id => key.push(id),
        }
    }
    key
}

fn enumerate(
    vars: &[VarDecl],
    first: usize,
    count: usize,
    buckets: &Buckets,
    cur: &[i32],
    next: &mut [i32],
    emit: &mut impl FnMut(&[i32]),
) {
    if !buckets.check(0, cur, next) {
        return;
    }
    fn go(
        vars: &[VarDecl],
        first: usize,
        count: usize,
        depth: usize,
        buckets: &Buckets,
        cur: &[i32],
        next: &mut [i32],
        emit: &mut impl FnMut(&[i32]),
    ) {
        if depth == count {
            emit(next);
            return;
        }
        let id = first + depth;
        let dom = vars[id].domain;
        for x in dom.lo()..=dom.hi() {
            next[id] = x;
            if buckets.check(depth + 1, cur, next) {
                go(vars, first, count, depth + 1, buckets, cur, next, emit);
            }
        }
    }
    go(vars, first, count, 0, buckets, cur, next, emit);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::speclang::parse_spec;

    #[test]
    fn two_free_booleans() {
        let doc = parse_spec("[ENV_VARS]\ne : bool\n[SYS_VARS]\ns : bool\n").unwrap();
        let a = build_arena(&doc).unwrap();
        assert_eq!(a.num_states(), 4);
        for s in 0..4 {
            assert_eq!(a.env_moves(s), &[0, 1]);
            assert_eq!(a.sys_move_values(s, 1), vec![vec![0], vec![1]]);
        }
    }

    #[test]
    fn frame_clause_gives_singleton() {
        let doc = parse_spec("[ENV_VARS]\ne : bool\n[SYS_VARS]\nrs : 0..3\n[SYS_TRANS]\nrs' = rs\n")
            .unwrap();
        let a = build_arena(&doc).unwrap();
        for s in 0..a.num_states() {
            let rs = a.decode(s)[1];
            for e in a.env_moves(s).to_vec() {
                assert_eq!(a.sys_move_values(s, e), vec![vec![rs]]);
            }
        }
    }

    #[test]
    fn obstacle_clearance() {
        let doc = parse_spec("[ENV_VARS]\no1 : bool\nx : 0..2\n[ENV_TRANS]\no1 -> !o1'\n").unwrap();
        let a = build_arena(&doc).unwrap();
        let s = a.encode(&[1, 0]);
        assert!(a.env_move_values(s).iter().all(|e| e[0] == 0));
        assert_eq!(a.env_move_values(s).len(), 3);
        assert_eq!(a.env_move_values(a.encode(&[0, 0])).len(), 6);
    }

    #[test]
    fn encode_decode_bijection() {
        let doc = parse_spec("[ENV_VARS]\na : -2..1\nb : bool\n[SYS_VARS]\nc : 3..5\n").unwrap();
        let a = build_arena(&doc).unwrap();
        for s in 0..a.num_states() {
            let v = a.decode(s);
            assert_eq!(a.encode(&v), s);
            assert_eq!(a.compose(a.env_index(&v), a.sys_index(&v)) as usize, s);
        }
    }

    #[test]
    fn capacity_is_enforced() {
        let doc = parse_spec("[ENV_VARS]\na : 0..999\n[SYS_VARS]\nb : 0..999\n").unwrap();
        assert!(matches!(
            build_arena_with_cap(&doc, 1000),
            Err(ArenaError::CapacityExceeded { states: 1_000_000, .. })
        ));
    }

    #[test]
    fn dump_lists_every_edge() {
        let doc = parse_spec("[ENV_VARS]\ne : bool\n[SYS_VARS]\ns : bool\n[SYS_TRANS]\ns' = e'\n").unwrap();
        let a = build_arena(&doc).unwrap();
        let mut buf = Vec::new();
        a.dump(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 8);
        assert!(text.starts_with("0\te=0\ts=0\n"));
    }
}
