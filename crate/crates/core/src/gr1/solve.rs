//! Three-nested fixpoint over the controllable predecessor:
//!
//! ```text
//! Z = νZ. ⋀_j μY. ⋁_i νX. (J_j ∧ cpre Z) ∨ cpre Y ∨ (¬A_i ∧ cpre X)
//! ```

use fixedbitset::FixedBitSet;

use crate::arena::GameArena;

pub const UNRANKED: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthesisResult {
    pub winning: FixedBitSet,
    pub realizable: bool,
    /// `y_rank[j][s]`: μY iteration (0-based) in which `s` entered the
    /// attractor towards goal `j`, computed against the final Z.
    pub y_rank: Vec<Vec<u32>>,
    /// `x_witness[j][s]`: index of the first assumption whose νX set
    /// contained `s` at that iteration.
    pub x_witness: Vec<Vec<u32>>,
    /// Goal predicates the ranks refer to.
    pub goals: Vec<FixedBitSet>,
    pub z_iterations: usize,
}

impl SynthesisResult {
    /// Lexicographic progress measure towards goal `j`.
    pub fn rank_pair(&self, j: usize, s: usize) -> (u32, u32) {
        (self.y_rank[j][s], self.x_witness[j][s])
    }
}

/// Controllable predecessor test for one state: every legal environment
/// move admits a system answer landing in `target`.
#[inline]
pub(crate) fn cpre_holds(arena: &GameArena, s: usize, target: &FixedBitSet) -> bool {
    arena
        .moves(s)
        .all(|(_, succ)| succ.iter().any(|t| target.contains(*t as usize)))
}

fn cpre(arena: &GameArena, target: &FixedBitSet) -> FixedBitSet {
    let n = arena.num_states();
    let mut out = FixedBitSet::with_capacity(n);
    for s in 0..n {
        if cpre_holds(arena, s, target) {
            out.insert(s);
        }
    }
    out
}

/// Solve with the arena's own liveness predicates.
pub fn solve_spec(arena: &GameArena) -> SynthesisResult {
    solve(arena, arena.env_liveness(), arena.sys_liveness())
}

/// Solve the GR(1) game. An empty `env_live` stands for a single
/// trivially-true assumption; `sys_live` must be non-empty.
pub fn solve(arena: &GameArena, env_live: &[FixedBitSet], sys_live: &[FixedBitSet]) -> SynthesisResult {
    assert!(!sys_live.is_empty(), "at least one system goal is required");
    let n = arena.num_states();
    let all = {
        let mut b = FixedBitSet::with_capacity(n);
        b.insert_range(..);
        b
    };
    let assumptions: Vec<FixedBitSet> = if env_live.is_empty() {
        vec![all.clone()]
    } else {
        env_live.to_vec()
    };
    let not_assumptions: Vec<FixedBitSet> = assumptions
        .iter()
        .map(|a| {
            let mut c = all.clone();
            c.difference_with(a);
            c
        })
        .collect();

    let mut z = all.clone();
    let mut y_rank = vec![vec![UNRANKED; n]; sys_live.len()];
    let mut x_witness = vec![vec![UNRANKED; n]; sys_live.len()];
    let mut z_iterations = 0;

    loop {
        z_iterations += 1;
        let z_before = z.clone();
        let cpre_z = cpre(arena, &z);
        let mut z_next = z.clone();
        for (j, goal) in sys_live.iter().enumerate() {
            let mut start = goal.clone();
            start.intersect_with(&cpre_z);

            let ranks = &mut y_rank[j];
            let witness = &mut x_witness[j];
            ranks.fill(UNRANKED);
            witness.fill(UNRANKED);

            let mut y = FixedBitSet::with_capacity(n);
            let mut cpre_y = cpre(arena, &y);
            let mut level = 0u32;
            loop {
                let mut t = start.clone();
                t.union_with(&cpre_y);
                let mut y_next = FixedBitSet::with_capacity(n);
                for (i, not_a) in not_assumptions.iter().enumerate() {
                    let x = nu_x(arena, &t, not_a, &all);
                    for s in x.ones() {
                        if ranks[s] == UNRANKED {
                            ranks[s] = level;
                            witness[s] = i as u32;
                        }
                    }
                    y_next.union_with(&x);
                }
                debug_assert!(y.is_subset(&y_next), "μY iterates must grow");
                if y_next == y {
                    break;
                }
                y = y_next;
                level += 1;
                // cpre is monotone, so only states outside the previous
                // result need to be re-examined
                let fresh: Vec<usize> = (0..n)
                    .filter(|s| !cpre_y.contains(*s) && cpre_holds(arena, *s, &y))
                    .collect();
                for s in fresh {
                    cpre_y.insert(s);
                }
            }
            z_next.intersect_with(&y);
        }
        z = z_next;
        debug_assert!(z.is_subset(&z_before), "νZ iterates must shrink");
        if z == z_before {
            break;
        }
    }

    // ranks outside the final winning region are meaningless
    for j in 0..sys_live.len() {
        for s in 0..n {
            if !z.contains(s) {
                y_rank[j][s] = UNRANKED;
                x_witness[j][s] = UNRANKED;
            }
        }
    }

    let mut result = SynthesisResult {
        winning: z,
        realizable: false,
        y_rank,
        x_witness,
        goals: sys_live.to_vec(),
        z_iterations,
    };
    result.realizable = is_realizable(&result, arena);
    result
}

/// νX. target ∨ (¬A ∧ cpre X), iterated downward from the full set.
fn nu_x(
    arena: &GameArena,
    target: &FixedBitSet,
    not_a: &FixedBitSet,
    all: &FixedBitSet,
) -> FixedBitSet {
    let mut x = all.clone();
    loop {
        let mut next = target.clone();
        for s in not_a.ones() {
            if x.contains(s) && !target.contains(s) && cpre_holds(arena, s, &x) {
                next.insert(s);
            }
        }
        debug_assert!(next.is_subset(&x), "νX iterates must shrink");
        if next == x {
            return x;
        }
        x = next;
    }
}

/// GR(1) initial semantics: every initial environment assignment admits an
/// initial system assignment that lands in the winning region.
pub fn is_realizable(result: &SynthesisResult, arena: &GameArena) -> bool {
    let n_sys = arena.num_sys_assignments() as u32;
    arena.env_init().iter().all(|&e| {
        (0..n_sys).any(|y| {
            let s = arena.compose(e, y) as usize;
            arena.init_states().contains(s) && result.winning.contains(s)
        })
    })
}
