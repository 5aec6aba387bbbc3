//! Seeded generator of small, well-typed specifications.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::speclang::{ArithOp, BoolOp, CmpOp, Domain, Expr, Owner, SpecDocument, VarDecl, VarId};

#[derive(Debug, Clone, Copy)]
pub struct RandomSpecConfig {
    pub max_states: u64,
    pub max_goals: usize,
    pub max_depth: u32,
}

impl Default for RandomSpecConfig {
    fn default() -> Self {
        RandomSpecConfig {
            max_states: 200,
            max_goals: 2,
            max_depth: 3,
        }
    }
}

pub fn random_spec(seed: u64) -> SpecDocument {
    random_spec_seeded(seed, RandomSpecConfig::default())
}

pub fn random_spec_seeded(seed: u64, cfg: RandomSpecConfig) -> SpecDocument {
    random_spec_with(&mut ChaCha8Rng::seed_from_u64(seed), cfg)
}

pub fn random_spec_with<R: Rng>(rng: &mut R, cfg: RandomSpecConfig) -> SpecDocument {
    let vars = loop {
        let vars = random_vars(rng);
        let states: u64 = vars.iter().map(|v| v.domain.size()).product();
        if states <= cfg.max_states {
            break vars;
        }
    };
    let mut g = Gen {
        rng,
        vars: &vars,
        refs: Vec::new(),
        depth: cfg.max_depth,
    };
    let env: Vec<VarId> = (0..vars.len()).filter(|i| vars[*i].owner == Owner::Env).collect();
    let all: Vec<VarId> = (0..vars.len()).collect();
    let current = |ids: &[VarId]| ids.iter().map(|i| (*i, false)).collect::<Vec<_>>();
    let with_next = |ids: &[VarId], nexts: &[VarId]| {
        let mut r = current(ids);
        r.extend(nexts.iter().map(|i| (*i, true)));
        r
    };

    let env_init = g.clauses(current(&env), 0..=1);
    let sys_init = g.clauses(current(&all), 0..=1);
    let env_safety = g.clauses(with_next(&all, &env), 0..=2);
    let sys_safety = g.clauses(with_next(&all, &all), 0..=3);
    let env_liveness = g.clauses(current(&all), 0..=cfg.max_goals);
    let sys_liveness = g.clauses(current(&all), 1..=cfg.max_goals.max(1));
    SpecDocument {
        vars,
        env_init,
        sys_init,
        env_safety,
        sys_safety,
        env_liveness,
        sys_liveness,
    }
}

fn random_vars<R: Rng>(rng: &mut R) -> Vec<VarDecl> {
    let mut vars = Vec::new();
    for (owner, prefix) in [(Owner::Env, "e"), (Owner::Sys, "s")] {
        for i in 0..rng.gen_range(1..=2) {
            let domain = if rng.gen_bool(0.5) {
                Domain::Bool
            } else {
                let lo = rng.gen_range(-1..=1);
                Domain::Range {
                    lo,
                    hi: lo + rng.gen_range(1..=3),
                }
            };
            vars.push(VarDecl::new(format!("{prefix}{i}"), owner, domain));
        }
    }
    vars
}

struct Gen<'a, R> {
    rng: &'a mut R,
    vars: &'a [VarDecl],
    refs: Vec<(VarId, bool)>,
    depth: u32,
}

impl<R: Rng> Gen<'_, R> {
    fn clauses(&mut self, refs: Vec<(VarId, bool)>, count: std::ops::RangeInclusive<usize>) -> Vec<Expr> {
        self.refs = refs;
        let n = self.rng.gen_range(count);
        (0..n).map(|_| self.boolean(self.depth)).collect()
    }

    fn pick(&mut self, want_bool: bool) -> Option<Expr> {
        let vars = self.vars;
        let candidates: Vec<(VarId, bool)> = self
            .refs
            .iter()
            .copied()
            .filter(|(id, _)| vars[*id].domain.is_bool() == want_bool)
            .collect();
        candidates
            .choose(self.rng)
            .map(|&(id, next)| Expr::Var { id, next })
    }

    fn boolean(&mut self, depth: u32) -> Expr {
        let leaf = depth == 0 || self.rng.gen_bool(0.3);
        if leaf {
            return match self.rng.gen_range(0..10) {
                0 => Expr::Bool(self.rng.gen_bool(0.7)),
                1..=4 => match self.pick(true) {
                    Some(v) => v,
                    None => self.comparison(0),
                },
                _ => self.comparison(0),
            };
        }
        match self.rng.gen_range(0..6) {
            0 => Expr::not(self.boolean(depth - 1)),
            1 => self.comparison(depth - 1),
            _ => {
                let op = *[BoolOp::And, BoolOp::Or, BoolOp::Implies, BoolOp::Iff]
                    .choose(self.rng)
                    .unwrap();
                Expr::bin(op, self.boolean(depth - 1), self.boolean(depth - 1))
            }
        }
    }

    fn comparison(&mut self, depth: u32) -> Expr {
        if self.pick(false).is_none() || self.rng.gen_bool(0.15) {
            // boolean equality
            let op = if self.rng.gen_bool(0.5) { CmpOp::Eq } else { CmpOp::Ne };
            let a = self.pick(true).unwrap_or(Expr::Bool(true));
            let b = match self.pick(true) {
                Some(v) if self.rng.gen_bool(0.7) => v,
                _ => Expr::Bool(self.rng.gen_bool(0.5)),
            };
            return Expr::cmp(op, a, b);
        }
        let op = *[CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge]
            .choose(self.rng)
            .unwrap();
        let a = self.integer(depth.min(1), true);
        let b = self.integer(depth.min(1), false);
        Expr::cmp(op, a, b)
    }

    fn integer(&mut self, depth: u32, prefer_var: bool) -> Expr {
        if depth > 0 && self.rng.gen_bool(0.3) {
            let op = if self.rng.gen_bool(0.5) { ArithOp::Add } else { ArithOp::Sub };
            return Expr::arith(op, self.integer(depth - 1, true), self.integer(depth - 1, false));
        }
        if prefer_var || self.rng.gen_bool(0.4) {
            if let Some(v) = self.pick(false) {
                return v;
            }
        }
        Expr::Int(self.rng.gen_range(-1..=3))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::speclang::{parse_spec, print_spec};

    #[test]
    fn generated_specs_parse_back() {
        for seed in 0..300 {
            let doc = random_spec(seed);
            let text = print_spec(&doc);
            let back = parse_spec(&text).unwrap_or_else(|d| panic!("seed {seed}: {d}\n{text}"));
            assert_eq!(back, doc, "seed {seed}\n{text}");
        }
    }

    #[test]
    fn respects_state_budget() {
        for seed in 0..100 {
            let doc = random_spec(seed);
            let states: u64 = doc.vars.iter().map(|v| v.domain.size()).product();
            assert!(states <= 200);
        }
    }
}
