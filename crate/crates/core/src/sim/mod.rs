//! Closed-loop execution of a strategy against an environment policy.

mod adversary;
mod csv;
mod events;

use std::io;
use std::time::Duration;

use thiserror::Error;

pub use self::csv::{read_csv, write_csv, TraceError};
pub use adversary::{Adversary, AdversaryKind, Choice, Greedy, Interactive, Scripted, Uniform};
pub use events::{parse_events, Event, EventError, EventSchedule};

use crate::arena::GameArena;
use crate::gr1::Strategy;
use crate::speclang::{Owner, VarDecl};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("strategy has no answer at step {step} (node {node:?}) for environment move {env}")]
    StrategyHole {
        step: usize,
        node: Option<usize>,
        env: String,
    },
    #[error("adversary picked move {index} at step {step} but only {available} are legal")]
    AdversaryIllegalMove {
        step: usize,
        index: usize,
        available: usize,
    },
    #[error("no legal initial environment assignment")]
    NoInitialMove,
    #[error("strategy and specification declare different variables")]
    VarMismatch,
    #[error("input closed")]
    InputClosed,
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Snapshots of a run. Snapshot `i` is reached after `i` steps; its
/// environment and system parts are the moves taken to reach it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub vars: Vec<VarDecl>,
    pub td_seconds: u32,
    pub states: Vec<Vec<i32>>,
    /// Snapshot produced while the human was away (state frozen).
    pub away: Vec<bool>,
    /// Strategy node per snapshot, when known.
    pub nodes: Vec<Option<usize>>,
}

impl Trace {
    pub fn num_env_vars(&self) -> usize {
        self.vars.iter().filter(|v| v.owner == Owner::Env).count()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn time_s(&self, step: usize) -> u64 {
        step as u64 * u64::from(self.td_seconds)
    }

    pub fn env(&self, step: usize) -> &[i32] {
        &self.states[step][..self.num_env_vars()]
    }

    pub fn sys(&self, step: usize) -> &[i32] {
        &self.states[step][self.num_env_vars()..]
    }

    pub fn var(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    /// Values of one variable across the trace.
    pub fn column(&self, name: &str) -> Option<Vec<i32>> {
        let k = self.var(name)?;
        Some(self.states.iter().map(|s| s[k]).collect())
    }
}

pub struct RunOptions<'a> {
    pub max_steps: usize,
    pub schedule: EventSchedule,
    /// Source of legal environment moves. Without it the strategy's own
    /// edges define the menu, so holes cannot be detected.
    pub arena: Option<&'a GameArena>,
    pub td_seconds: u32,
    pub pace: Option<Duration>,
}

impl Default for RunOptions<'_> {
    fn default() -> Self {
        RunOptions {
            max_steps: 180,
            schedule: EventSchedule::default(),
            arena: None,
            td_seconds: 10,
            pace: None,
        }
    }
}

/// Policy for a non-interactive adversary kind. Greedy policies act on `BL`.
pub fn standard_adversary(kind: AdversaryKind, seed: u64, schedule: &EventSchedule) -> Option<Box<dyn Adversary + Send>> {
    Some(match kind {
        AdversaryKind::Random => Box::new(Uniform::new(seed)),
        AdversaryKind::MinBl => Box::new(Greedy::min("BL")),
        AdversaryKind::MaxBl => Box::new(Greedy::max("BL")),
        AdversaryKind::Scripted => Box::new(Scripted::new(seed, schedule.clone())),
        AdversaryKind::Interactive => return None,
    })
}

fn render(names: &[String], values: &[i32]) -> String {
    names
        .iter()
        .zip(values)
        .map(|(n, v)| format!("{n}={v}"))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn run(strategy: &Strategy, adversary: &mut dyn Adversary, opts: &RunOptions<'_>) -> Result<Trace, SimError> {
    if let Some(a) = opts.arena {
        if a.vars() != strategy.vars.as_slice() {
            return Err(SimError::VarMismatch);
        }
    }
    let n_env = strategy.num_env_vars();
    let names: Vec<String> = strategy.vars.iter().map(|v| v.name.clone()).collect();
    let env_names = &names[..n_env];

    let init_moves: Vec<Vec<i32>> = match opts.arena {
        Some(a) => a.env_init().iter().map(|e| a.env_values(*e)).collect(),
        None => strategy.init.iter().map(|i| i.env.clone()).collect(),
    };
    if init_moves.is_empty() {
        return Err(SimError::NoInitialMove);
    }
    let none = || String::from("(initial)");
    let k = adversary.choose(&Choice {
        step: 0,
        state: None,
        moves: &init_moves,
        env_names,
        describe: &none,
    })?;
    let env = init_moves.get(k).ok_or(SimError::AdversaryIllegalMove {
        step: 0,
        index: k,
        available: init_moves.len(),
    })?;
    let mut node = strategy.initial_node(env).ok_or_else(|| SimError::StrategyHole {
        step: 0,
        node: None,
        env: render(env_names, env),
    })?;

    let mut trace = Trace {
        vars: strategy.vars.clone(),
        td_seconds: opts.td_seconds,
        states: vec![strategy.nodes[node].state.clone()],
        away: vec![false],
        nodes: vec![Some(node)],
    };

    for step in 1..=opts.max_steps {
        let state = trace.states.last().unwrap().clone();
        if opts.schedule.is_away(step) {
            trace.states.push(state);
            trace.away.push(true);
            trace.nodes.push(Some(node));
            continue;
        }
        let moves: Vec<Vec<i32>> = match opts.arena {
            Some(a) => a.env_move_values(a.encode(&state)),
            None => strategy.nodes[node].edges.iter().map(|e| e.env.clone()).collect(),
        };
        if moves.is_empty() {
            break;
        }
        let describe = || render(&names, &state);
        let k = adversary.choose(&Choice {
            step,
            state: Some(&state),
            moves: &moves,
            env_names,
            describe: &describe,
        })?;
        let env = moves.get(k).ok_or(SimError::AdversaryIllegalMove {
            step,
            index: k,
            available: moves.len(),
        })?;
        let edge = strategy.edge(node, env).ok_or_else(|| SimError::StrategyHole {
            step,
            node: Some(node),
            env: render(env_names, env),
        })?;
        node = edge.next;
        trace.states.push(strategy.target_state(edge));
        trace.away.push(false);
        trace.nodes.push(Some(node));
        if let Some(d) = opts.pace {
            std::thread::sleep(d);
        }
    }
    Ok(trace)
}
