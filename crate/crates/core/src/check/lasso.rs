//! Exact liveness check on the product of a strategy with a memoryless
//! deterministic adversary (or with every environment move at once).

use std::collections::VecDeque;

use super::{CheckError, Location, Verdict, Violation};
use crate::gr1::Strategy;
use crate::sim::{AdversaryKind, Greedy};
use crate::speclang::SpecDocument;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LassoAdversary {
    /// Every legal environment move (one mode, all choices).
    AllMoves,
    MinBl,
    MaxBl,
}

impl TryFrom<AdversaryKind> for LassoAdversary {
    type Error = CheckError;

    fn try_from(kind: AdversaryKind) -> Result<Self, CheckError> {
        match kind {
            AdversaryKind::MinBl => Ok(LassoAdversary::MinBl),
            AdversaryKind::MaxBl => Ok(LassoAdversary::MaxBl),
            other => Err(CheckError::AdversaryNotFinite(format!("{other:?}"))),
        }
    }
}

struct Product<'a> {
    strategy: &'a Strategy,
    policy: Option<Greedy>,
    env_names: Vec<String>,
}

impl Product<'_> {
    fn initial(&self) -> Vec<usize> {
        let init = &self.strategy.init;
        match &self.policy {
            None => init.iter().map(|i| i.node).collect(),
            Some(g) if !init.is_empty() => {
                let moves: Vec<Vec<i32>> = init.iter().map(|i| i.env.clone()).collect();
                vec![init[g.select(&moves, &self.env_names)].node]
            }
            Some(_) => Vec::new(),
        }
    }

    fn successors(&self, node: usize) -> Vec<usize> {
        let edges = &self.strategy.nodes[node].edges;
        match &self.policy {
            None => {
                let mut next: Vec<usize> = edges.iter().map(|e| e.next).collect();
                next.sort_unstable();
                next.dedup();
                next
            }
            Some(g) if !edges.is_empty() => {
                let moves: Vec<Vec<i32>> = edges.iter().map(|e| e.env.clone()).collect();
                vec![edges[g.select(&moves, &self.env_names)].next]
            }
            Some(_) => Vec::new(),
        }
    }
}

pub fn lasso_check(strategy: &Strategy, adversary: LassoAdversary, doc: &SpecDocument) -> Result<Verdict, CheckError> {
    if strategy.vars != doc.vars {
        return Err(CheckError::VarMismatch);
    }
    let n_env = strategy.num_env_vars();
    let product = Product {
        strategy,
        policy: match adversary {
            LassoAdversary::AllMoves => None,
            LassoAdversary::MinBl => Some(Greedy::min("BL")),
            LassoAdversary::MaxBl => Some(Greedy::max("BL")),
        },
        env_names: strategy.vars[..n_env].iter().map(|v| v.name.clone()).collect(),
    };

    let count = strategy.nodes.len();
    let succ: Vec<Vec<usize>> = (0..count).map(|n| product.successors(n)).collect();
    let mut reachable = vec![false; count];
    let mut queue: VecDeque<usize> = product.initial().into();
    for &n in &queue {
        reachable[n] = true;
    }
    while let Some(n) = queue.pop_front() {
        for &m in &succ[n] {
            if !reachable[m] {
                reachable[m] = true;
                queue.push_back(m);
            }
        }
    }

    let holds = |e: &crate::speclang::Expr, n: usize| e.holds_at(&strategy.nodes[n].state);
    let mut violations = Vec::new();
    let mut gap = Some(0usize);
    for goal in &doc.sys_liveness {
        let keep: Vec<bool> = (0..count).map(|n| reachable[n] && !holds(goal, n)).collect();
        for scc in sccs(&succ, &keep) {
            let cyclic = scc.len() > 1 || succ[scc[0]].contains(&scc[0]);
            if !cyclic {
                continue;
            }
            let fair = doc
                .env_liveness
                .iter()
                .all(|a| scc.iter().any(|n| holds(a, *n)));
            if fair {
                let cycle = cycle_through(scc[0], &scc, &succ);
                let text: Vec<String> = cycle.iter().map(|n| n.to_string()).collect();
                violations.push(Violation {
                    at: Location::Node(scc[0]),
                    item: doc.show(goal),
                    description: format!("reachable cycle never visits the goal: {}", text.join(" -> ")),
                });
            }
        }
        gap = match (gap, longest_path(&succ, &keep)) {
            (Some(g), Some(l)) => Some(g.max(l + 1)),
            _ => None,
        };
    }
    let mut verdict = Verdict::from_violations(violations);
    if verdict.passed {
        verdict.max_gap = gap;
    }
    Ok(verdict)
}

/// Strongly connected components of the subgraph induced by `keep`
/// (iterative Tarjan).
fn sccs(succ: &[Vec<usize>], keep: &[bool]) -> Vec<Vec<usize>> {
    let n = succ.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut counter = 0;
    for root in (0..n).filter(|v| keep[*v]) {
        if index[root] != usize::MAX {
            continue;
        }
        let mut work: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut i)) = work.last_mut() {
            if let Some(&w) = succ[v].get(*i) {
                *i += 1;
                if !keep[w] {
                    continue;
                }
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    work.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                work.pop();
                if let Some(&(parent, _)) = work.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    out.push(comp);
                }
            }
        }
    }
    out
}

/// Shortest cycle from `start` back to itself inside `scc`.
fn cycle_through(start: usize, scc: &[usize], succ: &[Vec<usize>]) -> Vec<usize> {
    let mut parent = std::collections::HashMap::new();
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for &w in &succ[v] {
            if w == start {
                let mut path = vec![start];
                let mut cur = v;
                while cur != start {
                    path.push(cur);
                    cur = parent[&cur];
                }
                path.push(start);
                let last = path.len() - 1;
                path[1..last].reverse();
                return path;
            }
            if scc.binary_search(&w).is_ok() && !parent.contains_key(&w) {
                parent.insert(w, v);
                queue.push_back(w);
            }
        }
    }
    vec![start]
}

/// Number of nodes on the longest path inside `keep`; `None` if the
/// induced subgraph has a cycle.
fn longest_path(succ: &[Vec<usize>], keep: &[bool]) -> Option<usize> {
    let n = succ.len();
    let mut indeg = vec![0usize; n];
    for v in (0..n).filter(|v| keep[*v]) {
        for &w in succ[v].iter().filter(|w| keep[**w]) {
            indeg[w] += 1;
        }
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|v| keep[*v] && indeg[*v] == 0).collect();
    let mut depth = vec![1usize; n];
    let mut seen = 0;
    let mut best = 0;
    while let Some(v) = queue.pop_front() {
        seen += 1;
        best = best.max(depth[v]);
        for &w in succ[v].iter().filter(|w| keep[**w]) {
            depth[w] = depth[w].max(depth[v] + 1);
            indeg[w] -= 1;
            if indeg[w] == 0 {
                queue.push_back(w);
            }
        }
    }
    (seen == keep.iter().filter(|k| **k).count()).then_some(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scc_and_paths() {
        // 0 -> 1 -> 2 -> 1, 2 -> 3
        let succ = vec![vec![1], vec![2], vec![1, 3], vec![]];
        let keep = vec![true; 4];
        let mut comps = sccs(&succ, &keep);
        comps.sort();
        assert_eq!(comps, vec![vec![0], vec![1, 2], vec![3]]);
        assert_eq!(cycle_through(1, &[1, 2], &succ), vec![1, 2, 1]);
        assert_eq!(longest_path(&succ, &keep), None);
        let acyclic = vec![true, true, false, true];
        assert_eq!(longest_path(&succ, &acyclic), Some(2));
    }
}
