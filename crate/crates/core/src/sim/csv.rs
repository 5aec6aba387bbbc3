//! Trace CSV files. Work-delivery traces use the fixed column layout
//! `step,time_s,RS,BL,HF,tries,S,O1,O2,mode,ACT,human_away`; other traces
//! list every variable in declaration order.

use std::io::Write;

use thiserror::Error;

use super::Trace;
use crate::speclang::{Domain, SpecDocument, VarDecl};
use crate::workdelivery::mode_of;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace row {row}: {message}")]
    Row { row: usize, message: String },
    #[error("trace has no rows")]
    Empty,
    #[error(transparent)]
    Csv(#[from] ::csv::Error),
}

const SCENARIO_VARS: [&str; 6] = ["RS", "BL", "HF", "tries", "S", "ACT"];

fn is_scenario(vars: &[VarDecl]) -> bool {
    SCENARIO_VARS.iter().all(|n| vars.iter().any(|v| v.name == *n))
}

fn obstacle_columns(vars: &[VarDecl]) -> Vec<String> {
    let mut obs: Vec<(u32, String)> = vars
        .iter()
        .filter_map(|v| {
            let j = v.name.strip_prefix('O')?.parse::<u32>().ok()?;
            Some((j, v.name.clone()))
        })
        .collect();
    obs.sort();
    obs.into_iter().map(|(_, n)| n).collect()
}

fn columns(vars: &[VarDecl]) -> Vec<String> {
    let mut cols = vec!["step".to_string(), "time_s".to_string()];
    if is_scenario(vars) {
        cols.extend(["RS", "BL", "HF", "tries", "S"].map(String::from));
        cols.extend(obstacle_columns(vars));
        cols.extend(["mode", "ACT"].map(String::from));
    } else {
        cols.extend(vars.iter().map(|v| v.name.clone()));
    }
    cols.push("human_away".into());
    cols
}

pub fn write_csv(trace: &Trace, out: impl Write) -> Result<(), TraceError> {
    let mut w = ::csv::Writer::from_writer(out);
    let cols = columns(&trace.vars);
    w.write_record(&cols)?;
    let idx = |name: &str| trace.var(name);
    let n = trace
        .var("RS")
        .map(|k| trace.vars[k].domain.hi())
        .unwrap_or(0);
    for (step, state) in trace.states.iter().enumerate() {
        let row: Vec<String> = cols
            .iter()
            .map(|c| match c.as_str() {
                "step" => step.to_string(),
                "time_s" => trace.time_s(step).to_string(),
                "human_away" => (trace.away[step] as i32).to_string(),
                "mode" => {
                    let bl = state[idx("BL").unwrap()];
                    let rs = state[idx("RS").unwrap()];
                    mode_of(bl, rs, n).to_string()
                }
                "ACT" if is_scenario(&trace.vars) => format!("Go_S{}", state[idx("ACT").unwrap()]),
                name => state[idx(name).unwrap()].to_string(),
            })
            .collect();
        w.write_record(&row)?;
    }
    w.flush().map_err(::csv::Error::from)?;
    Ok(())
}

/// Read a trace against a specification. Variables without a column are
/// reconstructed as the lowest values consistent with the specification.
pub fn read_csv(text: &str, doc: &SpecDocument) -> Result<Trace, TraceError> {
    let mut r = ::csv::ReaderBuilder::new().trim(::csv::Trim::All).from_reader(text.as_bytes());
    let headers: Vec<String> = r.headers()?.iter().map(String::from).collect();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let var_cols: Vec<Option<usize>> = doc.vars.iter().map(|v| col(&v.name)).collect();
    let away_col = col("human_away");
    let time_col = col("time_s");

    let mut states: Vec<Vec<i32>> = Vec::new();
    let mut away = Vec::new();
    let mut td_seconds = 10;
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        let fail = |m: String| TraceError::Row { row, message: m };
        let mut state = Vec::with_capacity(doc.vars.len());
        for (v, c) in doc.vars.iter().zip(&var_cols) {
            let value = match c {
                Some(c) => {
                    let raw = rec.get(*c).ok_or_else(|| fail(format!("missing `{}`", v.name)))?;
                    let value = parse_value(raw, v.domain).ok_or_else(|| fail(format!("bad value `{raw}` for `{}`", v.name)))?;
                    if !v.domain.contains(value) {
                        return Err(fail(format!("`{}` = {value} is outside {}", v.name, v.domain)));
                    }
                    value
                }
                None => v.domain.lo(),
            };
            state.push(value);
        }
        let is_away = match away_col.and_then(|c| rec.get(c)) {
            Some("1") | Some("true") => true,
            Some("0") | Some("false") | None => false,
            Some(other) => return Err(fail(format!("bad human_away `{other}`"))),
        };
        if row == 1 {
            if let Some(t) = time_col.and_then(|c| rec.get(c)).and_then(|t| t.parse::<u32>().ok()) {
                if t > 0 {
                    td_seconds = t;
                }
            }
        }
        if is_away && !states.is_empty() {
            state = states.last().unwrap().clone();
        } else {
            let missing: Vec<usize> = (0..doc.vars.len()).filter(|i| var_cols[*i].is_none()).collect();
            if !missing.is_empty() {
                fill_missing(&mut state, &missing, doc, states.last());
            }
        }
        states.push(state);
        away.push(is_away);
    }
    if states.is_empty() {
        return Err(TraceError::Empty);
    }
    let n = states.len();
    Ok(Trace {
        vars: doc.vars.clone(),
        td_seconds,
        states,
        away,
        nodes: vec![None; n],
    })
}

fn parse_value(raw: &str, domain: Domain) -> Option<i32> {
    match raw {
        "true" if domain.is_bool() => Some(1),
        "false" if domain.is_bool() => Some(0),
        _ => raw
            .strip_prefix("Go_S")
            .unwrap_or(raw)
            .parse()
            .ok(),
    }
}

/// Lowest assignment (lexicographic over `missing`) satisfying the initial
/// conditions, or the safety clauses from `prev`. Domain minima otherwise.
fn fill_missing(state: &mut [i32], missing: &[usize], doc: &SpecDocument, prev: Option<&Vec<i32>>) {
    let ok = |s: &[i32]| match prev {
        None => doc.env_init.iter().chain(&doc.sys_init).all(|c| c.holds_at(s)),
        Some(p) => doc.env_safety.iter().chain(&doc.sys_safety).all(|c| c.holds(p, s)),
    };
    for &i in missing {
        state[i] = doc.vars[i].domain.lo();
    }
    loop {
        if ok(state) {
            return;
        }
        // odometer over the missing variables, last one fastest
        let mut carried = true;
        for &i in missing.iter().rev() {
            let d = doc.vars[i].domain;
            if state[i] < d.hi() {
                state[i] += 1;
                carried = false;
                break;
            }
            state[i] = d.lo();
        }
        if carried {
            break;
        }
    }
    for &i in missing {
        state[i] = doc.vars[i].domain.lo();
    }
}
