//! Scripted events: variable pins and human-away spans.
//!
//! ```text
//! step=12 set S=0
//! step=40 human_away=1 duration=6
//! ```

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("events line {line}: {message}")]
pub struct EventError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Event {
    /// Pin an environment variable in snapshot `step`.
    Set { step: usize, var: String, value: i32 },
    /// Mark snapshots `step..step + duration` as away (or present).
    HumanAway { step: usize, away: bool, duration: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventSchedule {
    pins: BTreeMap<usize, Vec<(String, i32)>>,
    away: BTreeMap<usize, bool>,
}

impl EventSchedule {
    pub fn new(events: &[Event]) -> EventSchedule {
        let mut s = EventSchedule::default();
        for e in events {
            match e {
                Event::Set { step, var, value } => {
                    let pins = s.pins.entry(*step).or_default();
                    pins.retain(|(v, _)| v != var);
                    pins.push((var.clone(), *value));
                }
                Event::HumanAway { step, away, duration } => {
                    for t in *step..step + duration {
                        s.away.insert(t, *away);
                    }
                }
            }
        }
        s
    }

    pub fn overrides_at(&self, step: usize) -> &[(String, i32)] {
        self.pins.get(&step).map_or(&[], |v| v.as_slice())
    }

    pub fn is_away(&self, step: usize) -> bool {
        self.away.get(&step).copied().unwrap_or(false)
    }

    pub fn has_pins(&self) -> bool {
        !self.pins.is_empty()
    }
}

pub fn parse_events(text: &str) -> Result<Vec<Event>, EventError> {
    let mut events = Vec::new();
    let mut last_step = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fail = |m: String| EventError { line: i + 1, message: m };
        let mut words = line.split_whitespace();
        let step: usize = words
            .next()
            .and_then(|w| w.strip_prefix("step="))
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| fail("expected `step=<n>`".into()))?;
        if step < last_step {
            return Err(fail(format!("step {step} is earlier than step {last_step}")));
        }
        last_step = step;
        let rest: Vec<&str> = words.collect();
        let event = match rest.as_slice() {
            ["set", assign] => {
                let (var, value) = assign
                    .split_once('=')
                    .ok_or_else(|| fail(format!("expected `<var>=<value>`, got `{assign}`")))?;
                let value = match value {
                    "true" => 1,
                    "false" => 0,
                    v => v.parse().map_err(|_| fail(format!("bad value `{v}`")))?,
                };
                Event::Set {
                    step,
                    var: var.to_string(),
                    value,
                }
            }
            [away, duration] => {
                let away = match away.strip_prefix("human_away=") {
                    Some("1") => true,
                    Some("0") => false,
                    _ => return Err(fail("expected `human_away=<0|1>`".into())),
                };
                let duration = duration
                    .strip_prefix("duration=")
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| fail("expected `duration=<steps>`".into()))?;
                Event::HumanAway { step, away, duration }
            }
            _ => return Err(fail(format!("unrecognized event `{line}`"))),
        };
        events.push(event);
    }
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_both_forms() {
        let ev = parse_events("# breaks\nstep=3 set S=0\nstep=5 human_away=1 duration=2\n\nstep=6 human_away=0 duration=1\n").unwrap();
        assert_eq!(ev.len(), 3);
        let s = EventSchedule::new(&ev);
        assert_eq!(s.overrides_at(3), &[("S".to_string(), 0)]);
        assert!(s.overrides_at(4).is_empty());
        assert!(!s.is_away(4));
        assert!(s.is_away(5));
        assert!(!s.is_away(6));
    }

    #[test]
    fn rejects_out_of_order_and_garbage() {
        assert_eq!(parse_events("step=4 set S=1\nstep=2 set S=0").unwrap_err().line, 2);
        assert!(parse_events("step=1 jump").is_err());
        assert!(parse_events("step=x set S=1").is_err());
        assert!(parse_events("step=1 human_away=2 duration=3").is_err());
    }
}
