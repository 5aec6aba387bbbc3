//! Environment policies resolving the environment's choice each step.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::events::EventSchedule;
use super::SimError;

/// What an adversary sees when asked for a move.
pub struct Choice<'a> {
    pub step: usize,
    /// Full valuation of the current snapshot (`None` before the first).
    pub state: Option<&'a [i32]>,
    /// Legal environment assignments, in arena order.
    pub moves: &'a [Vec<i32>],
    /// Environment variable names, matching the assignment layout.
    pub env_names: &'a [String],
    /// Rendered current snapshot, for interactive use.
    pub describe: &'a dyn Fn() -> String,
}

pub trait Adversary {
    /// Index into `choice.moves`.
    fn choose(&mut self, choice: &Choice<'_>) -> Result<usize, SimError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdversaryKind {
    Random,
    MinBl,
    MaxBl,
    Scripted,
    Interactive,
}

impl AdversaryKind {
    pub fn parse(s: &str) -> Option<AdversaryKind> {
        Some(match s {
            "random" => AdversaryKind::Random,
            "min-bl" => AdversaryKind::MinBl,
            "max-bl" => AdversaryKind::MaxBl,
            "scripted" => AdversaryKind::Scripted,
            "interactive" => AdversaryKind::Interactive,
            _ => return None,
        })
    }

    /// Deterministic, memoryless policies admit an exact product check.
    pub fn is_finite(self) -> bool {
        matches!(self, AdversaryKind::MinBl | AdversaryKind::MaxBl)
    }
}

/// Seeded uniform choice. One draw per step.
pub struct Uniform {
    rng: ChaCha8Rng,
}

impl Uniform {
    pub fn new(seed: u64) -> Uniform {
        Uniform {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn draw(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }
}

fn pick(u: f64, len: usize) -> usize {
    ((u * len as f64) as usize).min(len - 1)
}

impl Adversary for Uniform {
    fn choose(&mut self, choice: &Choice<'_>) -> Result<usize, SimError> {
        Ok(pick(self.draw(), choice.moves.len()))
    }
}

/// Picks the move minimizing (or maximizing) the named variable; ties go
/// to the lowest index.
pub struct Greedy {
    var: String,
    maximize: bool,
}

impl Greedy {
    pub fn min(var: &str) -> Greedy {
        Greedy {
            var: var.into(),
            maximize: false,
        }
    }

    pub fn max(var: &str) -> Greedy {
        Greedy {
            var: var.into(),
            maximize: true,
        }
    }

    /// Pure choice function, also used to enumerate the policy's moves.
    pub fn select(&self, moves: &[Vec<i32>], env_names: &[String]) -> usize {
        let Some(k) = env_names.iter().position(|n| *n == self.var) else {
            return 0;
        };
        let mut best = 0;
        for (i, m) in moves.iter().enumerate() {
            let better = if self.maximize {
                m[k] > moves[best][k]
            } else {
                m[k] < moves[best][k]
            };
            if better {
                best = i;
            }
        }
        best
    }
}

impl Adversary for Greedy {
    fn choose(&mut self, choice: &Choice<'_>) -> Result<usize, SimError> {
        Ok(self.select(choice.moves, choice.env_names))
    }
}

/// Uniform choice, except where the schedule pins variables and some legal
/// move agrees with the pins.
pub struct Scripted {
    base: Uniform,
    schedule: EventSchedule,
}

impl Scripted {
    pub fn new(seed: u64, schedule: EventSchedule) -> Scripted {
        Scripted {
            base: Uniform::new(seed),
            schedule,
        }
    }
}

impl Adversary for Scripted {
    fn choose(&mut self, choice: &Choice<'_>) -> Result<usize, SimError> {
        let u = self.base.draw();
        let pins = self.schedule.overrides_at(choice.step);
        if pins.is_empty() {
            return Ok(pick(u, choice.moves.len()));
        }
        let matching: Vec<usize> = (0..choice.moves.len())
            .filter(|i| {
                pins.iter().all(|(name, val)| {
                    match choice.env_names.iter().position(|n| n == name) {
                        Some(k) => choice.moves[*i][k] == *val,
                        None => true,
                    }
                })
            })
            .collect();
        if matching.is_empty() {
            Ok(pick(u, choice.moves.len()))
        } else {
            Ok(matching[pick(u, matching.len())])
        }
    }
}

/// Line-oriented prompt: prints the snapshot and the numbered legal moves,
/// reads an index.
pub struct Interactive<R, W> {
    input: R,
    output: W,
}

impl<R: BufRead, W: Write> Interactive<R, W> {
    pub fn new(input: R, output: W) -> Self {
        Interactive { input, output }
    }
}

impl<R: BufRead, W: Write> Adversary for Interactive<R, W> {
    fn choose(&mut self, choice: &Choice<'_>) -> Result<usize, SimError> {
        let out = &mut self.output;
        writeln!(out, "step {}: {}", choice.step, (choice.describe)())?;
        for (i, m) in choice.moves.iter().enumerate() {
            let parts: Vec<String> = choice
                .env_names
                .iter()
                .zip(m)
                .map(|(n, v)| format!("{n}={v}"))
                .collect();
            writeln!(out, "  [{i}] {}", parts.join(" "))?;
        }
        loop {
            write!(out, "env move> ")?;
            out.flush()?;
            let mut line = String::new();
            if self.input.read_line(&mut line)? == 0 {
                return Err(SimError::InputClosed);
            }
            match line.trim().parse::<usize>() {
                Ok(i) if i < choice.moves.len() => return Ok(i),
                _ => writeln!(out, "enter a number between 0 and {}", choice.moves.len() - 1)?,
            }
        }
    }
}
