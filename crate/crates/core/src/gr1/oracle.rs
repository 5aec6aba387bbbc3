//! Reference solver for small arenas. The GR(1) objective is turned into a
//! three-colour parity game by tracking a goal counter and an assumption
//! counter, then solved with Zielonka's recursive algorithm.

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::arena::GameArena;

pub const ORACLE_STATE_LIMIT: usize = 10_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("arena has {states} states, the reference solver accepts at most {limit}")]
    TooLarge { states: usize, limit: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub winning: FixedBitSet,
    pub realizable: bool,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Player {
    Sys,
    Env,
}

impl Player {
    fn opponent(self) -> Player {
        match self {
            Player::Sys => Player::Env,
            Player::Env => Player::Sys,
        }
    }
}

struct ParityGame {
    owner: Vec<Player>,
    color: Vec<u8>,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
}

impl ParityGame {
    fn add(&mut self, owner: Player, color: u8) -> usize {
        self.owner.push(owner);
        self.color.push(color);
        self.succ.push(Vec::new());
        self.pred.push(Vec::new());
        self.owner.len() - 1
    }

    fn edge(&mut self, a: usize, b: usize) {
        self.succ[a].push(b);
        self.pred[b].push(a);
    }

    /// Attractor of `target` for `player` inside the subgame `live`.
    fn attractor(&self, live: &[bool], target: &[usize], player: Player) -> Vec<bool> {
        let n = self.owner.len();
        let mut attr = vec![false; n];
        let mut count: Vec<usize> = (0..n)
            .map(|v| {
                if live[v] {
                    self.succ[v].iter().filter(|w| live[**w]).count()
                } else {
                    0
                }
            })
            .collect();
        let mut stack: Vec<usize> = Vec::new();
        for &t in target {
            if live[t] && !attr[t] {
                attr[t] = true;
                stack.push(t);
            }
        }
        while let Some(w) = stack.pop() {
            for &v in &self.pred[w] {
                if !live[v] || attr[v] {
                    continue;
                }
                let take = if self.owner[v] == player {
                    true
                } else {
                    count[v] -= 1;
                    count[v] == 0
                };
                if take {
                    attr[v] = true;
                    stack.push(v);
                }
            }
        }
        attr
    }

    /// Winning region of the system (even player, maximal colour seen
    /// infinitely often decides).
    fn solve(&self, live: &[bool]) -> Vec<bool> {
        let n = self.owner.len();
        let Some(top) = (0..n).filter(|v| live[*v]).map(|v| self.color[v]).max() else {
            return vec![false; n];
        };
        let alpha = if top % 2 == 0 { Player::Sys } else { Player::Env };
        let wins_for = |sys_win: &[bool], p: Player, v: usize| match p {
            Player::Sys => sys_win[v],
            Player::Env => !sys_win[v],
        };
        let top_vertices: Vec<usize> = (0..n).filter(|v| live[*v] && self.color[*v] == top).collect();
        let a = self.attractor(live, &top_vertices, alpha);
        let rest: Vec<bool> = (0..n).map(|v| live[v] && !a[v]).collect();
        let sub = self.solve(&rest);
        let opp = alpha.opponent();
        let opp_region: Vec<usize> = (0..n)
            .filter(|v| rest[*v] && wins_for(&sub, opp, *v))
            .collect();
        if opp_region.is_empty() {
            return (0..n).map(|v| live[v] && alpha == Player::Sys).collect();
        }
        let b = self.attractor(live, &opp_region, opp);
        let rest2: Vec<bool> = (0..n).map(|v| live[v] && !b[v]).collect();
        let sub2 = self.solve(&rest2);
        (0..n)
            .map(|v| {
                if !live[v] {
                    false
                } else if b[v] {
                    opp == Player::Sys
                } else {
                    sub2[v]
                }
            })
            .collect()
    }
}

/// Winning region and realizability computed independently of the fixpoint
/// solver. Intended for arenas of at most [`ORACLE_STATE_LIMIT`] states.
pub fn brute_force_oracle(arena: &GameArena) -> Result<OracleResult, OracleError> {
    let states = arena.num_states();
    if states > ORACLE_STATE_LIMIT {
        return Err(OracleError::TooLarge {
            states,
            limit: ORACLE_STATE_LIMIT,
        });
    }
    let goals = arena.sys_liveness();
    let all = {
        let mut b = FixedBitSet::with_capacity(states);
        b.insert_range(..);
        b
    };
    let assumptions: Vec<FixedBitSet> = if arena.env_liveness().is_empty() {
        vec![all]
    } else {
        arena.env_liveness().to_vec()
    };
    let n = goals.len();
    let m = assumptions.len();

    let mut g = ParityGame {
        owner: Vec::new(),
        color: Vec::new(),
        succ: Vec::new(),
        pred: Vec::new(),
    };
    let env_vertex = |s: usize, c: usize, d: usize| (s * n + c) * m + d;
    for s in 0..states {
        for c in 0..n {
            for d in 0..m {
                let color = if goals[c].contains(s) && c == n - 1 {
                    2
                } else if assumptions[d].contains(s) && d == m - 1 {
                    1
                } else {
                    0
                };
                g.add(Player::Env, color);
            }
        }
    }
    let win_sink = g.add(Player::Sys, 2);
    g.edge(win_sink, win_sink);
    let lose_sink = g.add(Player::Env, 1);
    g.edge(lose_sink, lose_sink);

    for s in 0..states {
        for c in 0..n {
            let c2 = if goals[c].contains(s) { (c + 1) % n } else { c };
            for d in 0..m {
                let d2 = if assumptions[d].contains(s) { (d + 1) % m } else { d };
                let v = env_vertex(s, c, d);
                let mut any = false;
                for (_, succ) in arena.moves(s) {
                    any = true;
                    let w = g.add(Player::Sys, 0);
                    g.edge(v, w);
                    if succ.is_empty() {
                        g.edge(w, lose_sink);
                    }
                    for &t in succ {
                        g.edge(w, env_vertex(t as usize, c2, d2));
                    }
                }
                if !any {
                    g.edge(v, win_sink);
                }
            }
        }
    }

    let live = vec![true; g.owner.len()];
    let sys_win = g.solve(&live);
    let mut winning = FixedBitSet::with_capacity(states);
    for s in 0..states {
        if sys_win[env_vertex(s, 0, 0)] {
            winning.insert(s);
        }
    }
    let n_sys = arena.num_sys_assignments() as u32;
    let realizable = arena.env_init().iter().all(|&e| {
        (0..n_sys).any(|y| {
            let s = arena.compose(e, y) as usize;
            arena.init_states().contains(s) && winning.contains(s)
        })
    });
    Ok(OracleResult { winning, realizable })
}
