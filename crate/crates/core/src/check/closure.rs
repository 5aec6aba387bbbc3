use super::{Location, Verdict, Violation};
use crate::arena::GameArena;
use crate::gr1::{solve_spec, Strategy};
use crate::speclang::Owner;

fn violation(at: Location, item: impl Into<String>, description: impl Into<String>) -> Violation {
    Violation {
        at,
        item: item.into(),
        description: description.into(),
    }
}

/// Every node answers every legal environment move with a legal system
/// move, edges lead to the node of the reached state with the right goal
/// index, and every node lies in the winning region.
pub fn verify_strategy_closure(strategy: &Strategy, arena: &GameArena) -> Verdict {
    let mut out = Vec::new();
    if strategy.vars != arena.vars() {
        out.push(violation(
            Location::Strategy,
            "variables",
            "variable order differs from the specification",
        ));
        return Verdict::from_violations(out);
    }
    let goals = arena.sys_liveness();
    if strategy.goals != goals.len() {
        out.push(violation(
            Location::Strategy,
            "goals",
            format!("strategy tracks {} goals, specification has {}", strategy.goals, goals.len()),
        ));
        return Verdict::from_violations(out);
    }
    let winning = solve_spec(arena).winning;
    let n_env = arena.num_env_vars();
    let env_text = |v: &[i32]| arena.show_assignment(Owner::Env, v);

    for (id, node) in strategy.nodes.iter().enumerate() {
        let at = Location::Node(id);
        let s = arena.encode(&node.state);
        if !winning.contains(s) {
            out.push(violation(at, "winning region", "node state is outside the winning region"));
        }
        if node.goal >= goals.len() {
            out.push(violation(at, "goal", format!("goal index {} out of range", node.goal)));
            continue;
        }
        let next_goal = if goals[node.goal].contains(s) {
            (node.goal + 1) % goals.len()
        } else {
            node.goal
        };
        for (e, succ) in arena.moves(s) {
            let env = arena.env_values(e);
            let Some(edge) = node.edges.iter().find(|x| x.env == env) else {
                out.push(violation(at, env_text(&env), "no edge for a legal environment move"));
                continue;
            };
            let target = strategy.target_state(edge);
            let t = arena.encode(&target) as u32;
            if succ.binary_search(&t).is_err() {
                out.push(violation(at, env_text(&env), "system response is not a legal move"));
            }
            let Some(next) = strategy.nodes.get(edge.next) else {
                out.push(violation(at, env_text(&env), format!("edge targets missing node {}", edge.next)));
                continue;
            };
            if next.state != target {
                out.push(violation(at, env_text(&env), format!("successor node {} holds a different state", edge.next)));
            }
            if next.goal != next_goal {
                out.push(violation(
                    at,
                    env_text(&env),
                    format!("successor goal index {} should be {next_goal}", next.goal),
                ));
            }
        }
        for edge in &node.edges {
            let legal = arena.env_moves(s).iter().any(|e| arena.env_values(*e) == edge.env);
            if !legal {
                out.push(violation(at, env_text(&edge.env), "edge for an illegal environment move"));
            }
        }
    }

    for &e in arena.env_init() {
        let env = arena.env_values(e);
        match strategy.initial_node(&env) {
            None => out.push(violation(Location::Init, env_text(&env), "no initial node for this environment assignment")),
            Some(n) => match strategy.nodes.get(n) {
                None => out.push(violation(Location::Init, env_text(&env), format!("missing node {n}"))),
                Some(node) => {
                    let s = arena.encode(&node.state);
                    if node.state[..n_env] != env[..] || !arena.init_states().contains(s) || node.goal != 0 {
                        out.push(violation(
                            Location::Init,
                            env_text(&env),
                            format!("node {n} is not an initial state for this assignment"),
                        ));
                    }
                }
            },
        }
    }
    Verdict::from_violations(out)
}
