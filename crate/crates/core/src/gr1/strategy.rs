//! Finite-memory controllers: nodes are (state, goal index) pairs, edges map
//! each legal environment assignment to a system response.

use std::collections::{HashMap, VecDeque};

use serde_json::{json, Map, Value};
use thiserror::Error;

use super::solve::SynthesisResult;
use crate::arena::GameArena;
use crate::speclang::{Domain, Owner, VarDecl};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategyEdge {
    /// Environment variable values, in environment-variable order.
    pub env: Vec<i32>,
    /// System variable values, in system-variable order.
    pub sys: Vec<i32>,
    pub next: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategyNode {
    /// Full valuation in variable order.
    pub state: Vec<i32>,
    pub goal: usize,
    pub edges: Vec<StrategyEdge>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InitialNode {
    pub env: Vec<i32>,
    pub node: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Strategy {
    pub vars: Vec<VarDecl>,
    pub goals: usize,
    pub nodes: Vec<StrategyNode>,
    pub init: Vec<InitialNode>,
}

#[derive(Debug, Error)]
pub enum StrategyError {
    #[error("specification is not realizable")]
    NotRealizable,
    #[error("malformed strategy document: {0}")]
    Format(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Strategy {
    pub fn num_env_vars(&self) -> usize {
        self.vars.iter().filter(|v| v.owner == Owner::Env).count()
    }

    /// Edge answering a given environment assignment at a node.
    pub fn edge(&self, node: usize, env: &[i32]) -> Option<&StrategyEdge> {
        self.nodes[node].edges.iter().find(|e| e.env == env)
    }

    pub fn initial_node(&self, env: &[i32]) -> Option<usize> {
        self.init.iter().find(|i| i.env == env).map(|i| i.node)
    }

    /// Full valuation reached by taking an edge.
    pub fn target_state(&self, edge: &StrategyEdge) -> Vec<i32> {
        let mut v = edge.env.clone();
        v.extend_from_slice(&edge.sys);
        v
    }

    pub fn var_id(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn to_json(&self) -> Value {
        let n_env = self.num_env_vars();
        let env_names: Vec<&VarDecl> = self.vars[..n_env].iter().collect();
        let sys_names: Vec<&VarDecl> = self.vars[n_env..].iter().collect();
        let assign = |decls: &[&VarDecl], vals: &[i32]| -> Value {
            let mut m = Map::new();
            for (d, v) in decls.iter().zip(vals) {
                m.insert(d.name.clone(), json!(v));
            }
            Value::Object(m)
        };
        let all: Vec<&VarDecl> = self.vars.iter().collect();
        let vars: Vec<Value> = self
            .vars
            .iter()
            .map(|v| {
                let mut m = Map::new();
                m.insert("name".into(), json!(v.name));
                m.insert(
                    "owner".into(),
                    json!(if v.owner == Owner::Env { "env" } else { "sys" }),
                );
                m.insert("domain".into(), json!(v.domain.to_string()));
                Value::Object(m)
            })
            .collect();
        let nodes: Vec<Value> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(id, n)| {
                let edges: Vec<Value> = n
                    .edges
                    .iter()
                    .map(|e| {
                        let mut m = Map::new();
                        m.insert("env".into(), assign(&env_names, &e.env));
                        m.insert("sys".into(), assign(&sys_names, &e.sys));
                        m.insert("next".into(), json!(e.next));
                        Value::Object(m)
                    })
                    .collect();
                let mut m = Map::new();
                m.insert("id".into(), json!(id));
                m.insert("state".into(), assign(&all, &n.state));
                m.insert("goal".into(), json!(n.goal));
                m.insert("edges".into(), Value::Array(edges));
                Value::Object(m)
            })
            .collect();
        let init: Vec<Value> = self
            .init
            .iter()
            .map(|i| {
                let mut m = Map::new();
                m.insert("env".into(), assign(&env_names, &i.env));
                m.insert("node".into(), json!(i.node));
                Value::Object(m)
            })
            .collect();
        let mut root = Map::new();
        root.insert("vars".into(), Value::Array(vars));
        root.insert("goals".into(), json!(self.goals));
        root.insert("nodes".into(), Value::Array(nodes));
        root.insert("init".into(), Value::Array(init));
        Value::Object(root)
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string(&self.to_json()).expect("strategy serializes");
        s.push('\n');
        s
    }

    pub fn from_json_str(text: &str) -> Result<Strategy, StrategyError> {
        let root: Value = serde_json::from_str(text)?;
        Strategy::from_json(&root)
    }

    pub fn from_json(root: &Value) -> Result<Strategy, StrategyError> {
        let fail = |msg: &str| StrategyError::Format(msg.to_string());
        let vars = root
            .get("vars")
            .and_then(Value::as_array)
            .ok_or_else(|| fail("missing `vars`"))?
            .iter()
            .map(parse_var)
            .collect::<Result<Vec<_>, _>>()?;
        let n_env = vars.iter().filter(|v| v.owner == Owner::Env).count();
        if vars[..n_env].iter().any(|v| v.owner != Owner::Env) {
            return Err(fail("environment variables must precede system variables"));
        }
        let goals = root
            .get("goals")
            .and_then(Value::as_u64)
            .ok_or_else(|| fail("missing `goals`"))? as usize;
        let all: Vec<&VarDecl> = vars.iter().collect();
        let nodes_json = root
            .get("nodes")
            .and_then(Value::as_array)
            .ok_or_else(|| fail("missing `nodes`"))?;
        let mut nodes = Vec::with_capacity(nodes_json.len());
        for (i, n) in nodes_json.iter().enumerate() {
            if n.get("id").and_then(Value::as_u64) != Some(i as u64) {
                return Err(fail("node ids must be consecutive from 0"));
            }
            let state = read_assign(n.get("state"), &all)?;
            let goal = n
                .get("goal")
                .and_then(Value::as_u64)
                .ok_or_else(|| fail("node without `goal`"))? as usize;
            let edges = n
                .get("edges")
                .and_then(Value::as_array)
                .ok_or_else(|| fail("node without `edges`"))?
                .iter()
                .map(|e| {
                    Ok(StrategyEdge {
                        env: read_assign(e.get("env"), &all[..n_env])?,
                        sys: read_assign(e.get("sys"), &all[n_env..])?,
                        next: e
                            .get("next")
                            .and_then(Value::as_u64)
                            .ok_or_else(|| fail("edge without `next`"))?
                            as usize,
                    })
                })
                .collect::<Result<Vec<_>, StrategyError>>()?;
            nodes.push(StrategyNode { state, goal, edges });
        }
        let init = root
            .get("init")
            .and_then(Value::as_array)
            .ok_or_else(|| fail("missing `init`"))?
            .iter()
            .map(|i| {
                Ok(InitialNode {
                    env: read_assign(i.get("env"), &all[..n_env])?,
                    node: i
                        .get("node")
                        .and_then(Value::as_u64)
                        .ok_or_else(|| fail("init entry without `node`"))?
                        as usize,
                })
            })
            .collect::<Result<Vec<_>, StrategyError>>()?;
        let count = nodes.len();
        let dangling = nodes.iter().flat_map(|n| n.edges.iter().map(|e| e.next));
        if dangling.chain(init.iter().map(|i| i.node)).any(|id| id >= count) {
            return Err(fail("edge or init entry points at a missing node"));
        }
        Ok(Strategy {
            vars,
            goals,
            nodes,
            init,
        })
    }
}

fn parse_var(v: &Value) -> Result<VarDecl, StrategyError> {
    let fail = |msg: &str| StrategyError::Format(msg.to_string());
    let name = v.get("name").and_then(Value::as_str).ok_or_else(|| fail("var without name"))?;
    let owner = match v.get("owner").and_then(Value::as_str) {
        Some("env") => Owner::Env,
        Some("sys") => Owner::Sys,
        _ => return Err(fail("var owner must be `env` or `sys`")),
    };
    let domain = match v.get("domain").and_then(Value::as_str) {
        Some("bool") => Domain::Bool,
        Some(range) => {
            let (lo, hi) = range
                .split_once("..")
                .ok_or_else(|| fail("domain must be `bool` or `lo..hi`"))?;
            let lo: i32 = lo.trim().parse().map_err(|_| fail("bad domain bound"))?;
            let hi: i32 = hi.trim().parse().map_err(|_| fail("bad domain bound"))?;
            if lo > hi {
                return Err(fail("empty domain"));
            }
            Domain::Range { lo, hi }
        }
        None => return Err(fail("var without domain")),
    };
    Ok(VarDecl::new(name, owner, domain))
}

fn read_assign(v: Option<&Value>, decls: &[&VarDecl]) -> Result<Vec<i32>, StrategyError> {
    let obj = v
        .and_then(Value::as_object)
        .ok_or_else(|| StrategyError::Format("expected an assignment object".into()))?;
    if obj.len() != decls.len() {
        return Err(StrategyError::Format("assignment has the wrong number of variables".into()));
    }
    decls
        .iter()
        .map(|d| {
            obj.get(&d.name)
                .and_then(Value::as_i64)
                .and_then(|x| i32::try_from(x).ok())
                .filter(|x| d.domain.contains(*x))
                .ok_or_else(|| {
                    StrategyError::Format(format!("missing or out-of-domain value for `{}`", d.name))
                })
        })
        .collect()
}

/// Build a controller from a realizable synthesis result. Nodes are
/// numbered in breadth-first discovery order from the initial nodes.
pub fn extract_strategy(result: &SynthesisResult, arena: &GameArena) -> Result<Strategy, StrategyError> {
    if !result.realizable {
        return Err(StrategyError::NotRealizable);
    }
    let goals = result.goals.len();
    let n_env = arena.num_env_vars();
    let mut ids: HashMap<(u32, usize), usize> = HashMap::new();
    let mut keys: Vec<(u32, usize)> = Vec::new();
    let mut queue = VecDeque::new();
    let mut intern = |key: (u32, usize), keys: &mut Vec<(u32, usize)>, queue: &mut VecDeque<usize>| -> usize {
        *ids.entry(key).or_insert_with(|| {
            keys.push(key);
            queue.push_back(keys.len() - 1);
            keys.len() - 1
        })
    };

    let mut init = Vec::new();
    let n_sys = arena.num_sys_assignments() as u32;
    for &e in arena.env_init() {
        let best = (0..n_sys)
            .map(|y| arena.compose(e, y))
            .filter(|s| {
                arena.init_states().contains(*s as usize) && result.winning.contains(*s as usize)
            })
            .min_by_key(|s| (result.rank_pair(0, *s as usize), *s))
            .ok_or(StrategyError::NotRealizable)?;
        let node = intern((best, 0), &mut keys, &mut queue);
        init.push(InitialNode {
            env: arena.env_values(e),
            node,
        });
    }

    let mut nodes: Vec<StrategyNode> = Vec::new();
    while let Some(id) = queue.pop_front() {
        let (s, goal) = keys[id];
        let s = s as usize;
        let reached = result.goals[goal].contains(s);
        let next_goal = if reached { (goal + 1) % goals } else { goal };
        let mut edges = Vec::new();
        for (e, succ) in arena.moves(s) {
            let t = succ
                .iter()
                .copied()
                .filter(|t| result.winning.contains(*t as usize))
                .min_by_key(|t| (result.rank_pair(next_goal, *t as usize), *t))
                .expect("winning states answer every environment move");
            debug_assert!(
                reached || result.rank_pair(goal, t as usize) <= result.rank_pair(goal, s),
                "progress measure must not increase"
            );
            let next = intern((t, next_goal), &mut keys, &mut queue);
            let values = arena.decode(t as usize);
            edges.push(StrategyEdge {
                env: arena.env_values(e),
                sys: values[n_env..].to_vec(),
                next,
            });
        }
        debug_assert_eq!(id, nodes.len());
        nodes.push(StrategyNode {
            state: arena.decode(s),
            goal,
            edges,
        });
    }

    Ok(Strategy {
        vars: arena.vars().to_vec(),
        goals,
        nodes,
        init,
    })
}
