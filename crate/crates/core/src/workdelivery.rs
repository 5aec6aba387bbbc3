//! Human-robot work delivery scenario: a robot shuttles between an inventory
//! station (cell 0) and a human workstation (cell N) while keeping the
//! human's backlog inside a band.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::speclang::{parse_spec, SpecDocument};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParamError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlInit {
    Fixed(i32),
    Range(i32, i32),
}

impl BlInit {
    fn bounds(self) -> (i32, i32) {
        match self {
            BlInit::Fixed(v) => (v, v),
            BlInit::Range(lo, hi) => (lo, hi),
        }
    }
}

impl fmt::Display for BlInit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlInit::Fixed(v) => write!(f, "{v}"),
            BlInit::Range(lo, hi) => write!(f, "{lo}..{hi}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WorkDeliveryParams {
    /// Workstation cell; the corridor has cells 0..=n.
    pub n: i32,
    pub bl_max: i32,
    pub gamma_units: i32,
    pub delta_units: i32,
    pub bl_upper: i32,
    pub k_move: i32,
    pub k_drop: i32,
    pub bl_init: BlInit,
    pub td_seconds: u32,
    pub hf_init: bool,
}

impl Default for WorkDeliveryParams {
    fn default() -> Self {
        WorkDeliveryParams {
            n: 3,
            bl_max: 30,
            gamma_units: 1,
            delta_units: 15,
            bl_upper: 26,
            k_move: 2,
            k_drop: 5,
            bl_init: BlInit::Fixed(15),
            td_seconds: 10,
            hf_init: false,
        }
    }
}

impl WorkDeliveryParams {
    pub fn with_bl_init(mut self, bl: i32) -> Self {
        self.bl_init = BlInit::Fixed(bl);
        self
    }

    /// Smallest instance exercised against the reference solver.
    pub fn reduced() -> Self {
        WorkDeliveryParams {
            n: 2,
            bl_max: 10,
            delta_units: 5,
            bl_upper: 9,
            k_move: 1,
            k_drop: 2,
            bl_init: BlInit::Fixed(5),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        let bad = |m: String| Err(ParamError::InvalidParams(m));
        let (lo, hi) = self.bl_init.bounds();
        if self.n < 1 {
            return bad(format!("N must be at least 1, got {}", self.n));
        }
        if self.bl_max < 1 {
            return bad(format!("blMax must be positive, got {}", self.bl_max));
        }
        if self.gamma_units <= 0 {
            return bad(format!("gammaUnits must be positive, got {}", self.gamma_units));
        }
        if self.delta_units < 0 || self.delta_units > self.bl_max {
            return bad(format!("deltaUnits must lie in 0..{}, got {}", self.bl_max, self.delta_units));
        }
        if self.bl_upper < 0 || self.bl_upper > self.bl_max {
            return bad(format!("blUpper must lie in 0..{}, got {}", self.bl_max, self.bl_upper));
        }
        if self.k_move < 0 || self.k_move > self.k_drop {
            return bad(format!("need 0 <= kMove <= kDrop, got {} and {}", self.k_move, self.k_drop));
        }
        if lo < 0 || hi > self.bl_max || lo > hi {
            return bad(format!("blInit must lie in 0..{}, got {}", self.bl_max, self.bl_init));
        }
        if self.td_seconds == 0 {
            return bad("tdSeconds must be positive".into());
        }
        Ok(())
    }

    /// Apply one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ParamError> {
        let value = value.trim();
        let int = || {
            value
                .parse::<i32>()
                .map_err(|_| ParamError::InvalidParams(format!("`{key}` expects an integer, got `{value}`")))
        };
        match key.trim() {
            "N" => self.n = int()?,
            "blMax" => self.bl_max = int()?,
            "gammaUnits" => self.gamma_units = int()?,
            "deltaUnits" => self.delta_units = int()?,
            "blUpper" => self.bl_upper = int()?,
            "kMove" => self.k_move = int()?,
            "kDrop" => self.k_drop = int()?,
            "tdSeconds" => {
                self.td_seconds = value
                    .parse()
                    .map_err(|_| ParamError::InvalidParams(format!("`tdSeconds` expects a positive integer, got `{value}`")))?
            }
            "hfInit" => {
                self.hf_init = match value {
                    "true" | "1" => true,
                    "false" | "0" => false,
                    _ => return Err(ParamError::InvalidParams(format!("`hfInit` expects a boolean, got `{value}`"))),
                }
            }
            "blInit" => {
                self.bl_init = match value.split_once("..") {
                    Some((lo, hi)) => {
                        let parse = |s: &str| {
                            s.trim().parse::<i32>().map_err(|_| {
                                ParamError::InvalidParams(format!("`blInit` expects an integer or lo..hi, got `{value}`"))
                            })
                        };
                        BlInit::Range(parse(lo)?, parse(hi)?)
                    }
                    None => BlInit::Fixed(int()?),
                }
            }
            other => return Err(ParamError::InvalidParams(format!("unknown parameter `{other}`"))),
        }
        Ok(())
    }

    /// Apply a `key=value` assignment as written on a command line.
    pub fn apply_assignment(&mut self, kv: &str) -> Result<(), ParamError> {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| ParamError::InvalidParams(format!("expected key=value, got `{kv}`")))?;
        self.set(k, v)
    }

    /// Apply a flat config file: one `key=value` per line, `#` comments.
    pub fn apply_config(&mut self, text: &str) -> Result<(), ParamError> {
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if !line.is_empty() {
                self.apply_assignment(line)?;
            }
        }
        Ok(())
    }

    /// Names of the obstacle flags, one per interior cell.
    pub fn obstacle_names(&self) -> Vec<String> {
        (1..self.n).map(|j| format!("O{j}")).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Work,
    Wait,
    Refill,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Work => "work",
            Mode::Wait => "wait",
            Mode::Refill => "refill",
        })
    }
}

/// One snapshot of the scenario. `act` holds `j` for the action `Go_Sj`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorldState {
    pub bl: i32,
    pub s: bool,
    pub obstacles: Vec<bool>,
    /// Backlog stayed put on the previous working step.
    pub stall: bool,
    pub rs: i32,
    pub act: i32,
    pub hf: bool,
    pub tries: i32,
}

impl WorldState {
    /// Decode a valuation of the emitted specification's variables.
    pub fn from_values(values: &[i32], p: &WorkDeliveryParams) -> WorldState {
        let obs = (p.n - 1).max(0) as usize;
        let b = |v: i32| v != 0;
        WorldState {
            bl: values[0],
            s: b(values[1]),
            obstacles: values[2..2 + obs].iter().map(|v| b(*v)).collect(),
            stall: b(values[2 + obs]),
            rs: values[3 + obs],
            act: values[4 + obs],
            hf: b(values[5 + obs]),
            tries: values[6 + obs],
        }
    }

    pub fn to_values(&self) -> Vec<i32> {
        let mut v = vec![self.bl, self.s as i32];
        v.extend(self.obstacles.iter().map(|o| *o as i32));
        v.push(self.stall as i32);
        v.extend([self.rs, self.act, self.hf as i32, self.tries]);
        v
    }

    pub fn mode(&self, p: &WorkDeliveryParams) -> Mode {
        human_mode(self, p)
    }

    fn carrying(&self, p: &WorkDeliveryParams) -> bool {
        self.hf || (self.rs == p.n && self.act != p.n)
    }

    /// The robot is attempting to hand over completed work this step.
    pub fn dropoff_attempt(&self, p: &WorkDeliveryParams) -> bool {
        self.carrying(p) && ((self.rs != 0 && self.act == 0) || (self.tries == 1 && !self.s))
    }
}

pub fn human_mode(s: &WorldState, p: &WorkDeliveryParams) -> Mode {
    mode_of(s.bl, s.rs, p.n)
}

/// Human mode from the backlog, the robot cell and the workstation cell.
pub fn mode_of(bl: i32, rs: i32, n: i32) -> Mode {
    if rs == n {
        Mode::Refill
    } else if bl == 0 {
        Mode::Wait
    } else {
        Mode::Work
    }
}

/// Backlog values the environment may choose for the next step.
pub fn backlog_successors(s: &WorldState, p: &WorkDeliveryParams) -> BTreeSet<i32> {
    let n = p.n;
    if s.act == n {
        let bl = if s.rs == n { s.bl } else { (s.bl + p.delta_units).min(p.bl_max) };
        return BTreeSet::from([bl]);
    }
    if s.bl == 0 && s.rs != n {
        return BTreeSet::from([s.bl]);
    }
    let k_max = if s.dropoff_attempt(p) { p.k_drop } else { p.k_move };
    let k_min = if s.stall && s.bl > 0 { 1 } else { 0 };
    (k_min..=k_max).map(|k| (s.bl - k * p.gamma_units).max(0)).collect()
}

/// Emit the scenario as a specification document.
pub fn emit_spec(p: &WorkDeliveryParams) -> Result<SpecDocument, ParamError> {
    let text = emit_spec_text(p)?;
    Ok(parse_spec(&text).expect("emitted specification is well formed"))
}

/// Emit the scenario in the specification text format.
pub fn emit_spec_text(p: &WorkDeliveryParams) -> Result<String, ParamError> {
    p.validate()?;
    let n = p.n;
    let obstacles = p.obstacle_names();
    let mut t = String::new();
    let line = |t: &mut String, s: String| {
        t.push_str(&s);
        t.push('\n');
    };

    line(&mut t, "[ENV_VARS]".into());
    line(&mut t, format!("BL : 0..{}", p.bl_max));
    line(&mut t, "S : bool".into());
    for o in &obstacles {
        line(&mut t, format!("{o} : bool"));
    }
    line(&mut t, "stall : bool".into());

    line(&mut t, "[SYS_VARS]".into());
    line(&mut t, format!("RS : 0..{n}"));
    line(&mut t, format!("ACT : 0..{n}"));
    line(&mut t, "HF : bool".into());
    line(&mut t, "tries : 0..2".into());

    line(&mut t, "[ENV_INIT]".into());
    match p.bl_init {
        BlInit::Fixed(v) => line(&mut t, format!("BL = {v}")),
        BlInit::Range(lo, hi) => line(&mut t, format!("BL >= {lo} & BL <= {hi}")),
    }
    line(&mut t, "!stall".into());

    line(&mut t, "[SYS_INIT]".into());
    line(&mut t, "RS = 0".into());
    line(&mut t, if p.hf_init { "HF".into() } else { "!HF".into() });
    line(&mut t, "tries = 0".into());
    line(&mut t, "ACT <= 1".into());
    if n >= 2 {
        line(&mut t, "O1 -> ACT != 1".into());
    }
    line(&mut t, "BL > 0".into());
    line(&mut t, format!("BL <= {}", p.bl_upper));

    let carrying = format!("(HF | RS = {n} & ACT != {n})");
    let g4 = format!("{carrying} & (RS != 0 & ACT = 0 | tries = 1 & !S)");
    let arrive = format!("ACT = {n} & RS != {n}");
    let stay = format!("ACT = {n} & RS = {n}");
    let wait = format!("BL = 0 & RS != {n}");
    let working = format!("ACT != {n} & !({wait})");

    line(&mut t, "[ENV_TRANS]".into());
    for (j, o) in obstacles.iter().enumerate() {
        line(&mut t, format!("ACT = {} -> !{o}'", j + 1));
        line(&mut t, format!("{o} -> !{o}'"));
    }
    line(&mut t, "RS = 0 & HF & tries = 1 & !S -> S'".into());
    let room = p.bl_max - p.delta_units;
    line(&mut t, format!("{arrive} & BL <= {room} -> BL' = BL + {}", p.delta_units));
    line(&mut t, format!("{arrive} & BL > {room} -> BL' = {}", p.bl_max));
    line(&mut t, format!("{stay} -> BL' = BL"));
    line(&mut t, format!("ACT != {n} & {wait} -> BL' = BL"));
    let reduce = |k: i32| {
        if p.gamma_units == 1 {
            format!("BL' <= BL & BL' >= BL - {k}")
        } else {
            let mut alts = Vec::new();
            for i in 0..=k {
                let d = i * p.gamma_units;
                alts.push(format!("BL >= {d} & BL' = BL - {d}"));
                if d > 0 {
                    alts.push(format!("BL < {d} & BL' = 0"));
                }
            }
            alts.iter().map(|a| format!("({a})")).collect::<Vec<_>>().join(" | ")
        }
    };
    line(&mut t, format!("{working} & {g4} -> ({})", reduce(p.k_drop)));
    line(&mut t, format!("{working} & !({g4}) -> ({})", reduce(p.k_move)));
    line(&mut t, format!("{working} & stall & BL > 0 -> BL' != BL"));
    line(&mut t, format!("stall' <-> BL' = BL & {working}"));

    line(&mut t, "[SYS_TRANS]".into());
    line(&mut t, "RS' = ACT".into());
    line(&mut t, "ACT' <= ACT + 1".into());
    line(&mut t, "ACT' >= ACT - 1".into());
    for (j, o) in obstacles.iter().enumerate() {
        line(&mut t, format!("{o}' -> ACT' != {}", j + 1));
    }
    line(&mut t, "RS' = 0 & tries' = 1 & !S' -> ACT' = 0".into());
    line(&mut t, "RS = 0 & HF & S -> !HF' & tries' = 0".into());
    line(&mut t, "RS = 0 & HF & !S & tries = 1 -> HF' & tries' = 2".into());
    line(&mut t, "RS = 0 & HF & !S & tries != 1 -> HF' & tries' = 0".into());
    let pickup = format!("RS != 0 & ACT = 0 & (HF | RS = {n})");
    line(&mut t, format!("{pickup} -> HF' & tries' = 1"));
    line(
        &mut t,
        format!("!(RS = 0 & HF) & !({pickup}) -> (HF' <-> HF | RS = {n} & ACT != {n}) & tries' = 0"),
    );
    line(&mut t, "BL' > 0".into());
    line(&mut t, format!("BL' <= {}", p.bl_upper));

    line(&mut t, "[ENV_LIVENESS]".into());
    line(&mut t, "[SYS_LIVENESS]".into());
    line(&mut t, "RS = 0 & HF".into());
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(bl: i32, rs: i32, act: i32) -> WorldState {
        WorldState {
            bl,
            s: false,
            obstacles: vec![false, false],
            stall: false,
            rs,
            act,
            hf: false,
            tries: 0,
        }
    }

    #[test]
    fn backlog_examples() {
        let p = WorkDeliveryParams::default();
        assert_eq!(backlog_successors(&state(20, 1, 2), &p), BTreeSet::from([18, 19, 20]));
        let mut drop = state(20, 1, 0);
        drop.hf = true;
        assert_eq!(backlog_successors(&drop, &p), (15..=20).collect());
        assert_eq!(backlog_successors(&state(10, 2, 3), &p), BTreeSet::from([25]));
        assert_eq!(backlog_successors(&state(0, 1, 2), &p), BTreeSet::from([0]));
        let mut stalled = state(20, 1, 2);
        stalled.stall = true;
        assert_eq!(backlog_successors(&stalled, &p), BTreeSet::from([18, 19]));
    }

    #[test]
    fn modes() {
        let p = WorkDeliveryParams::default();
        assert_eq!(human_mode(&state(12, 3, 3), &p), Mode::Refill);
        assert_eq!(human_mode(&state(0, 1, 1), &p), Mode::Wait);
        assert_eq!(human_mode(&state(12, 0, 0), &p), Mode::Work);
    }

    #[test]
    fn values_round_trip() {
        let p = WorkDeliveryParams::default();
        let mut s = state(7, 2, 3);
        s.obstacles = vec![true, false];
        s.hf = true;
        s.tries = 2;
        assert_eq!(WorldState::from_values(&s.to_values(), &p), s);
    }

    #[test]
    fn emitted_variables_follow_state_layout() {
        let p = WorkDeliveryParams::default();
        let doc = emit_spec(&p).unwrap();
        let names: Vec<&str> = doc.vars.iter().map(|v| v.name.as_str()).collect();
        assert_eq!(names, ["BL", "S", "O1", "O2", "stall", "RS", "ACT", "HF", "tries"]);
        let one = emit_spec(&WorkDeliveryParams { n: 1, ..p }).unwrap();
        assert!(one.vars.iter().all(|v| !v.name.starts_with('O')));
    }

    #[test]
    fn params_from_config() {
        let mut p = WorkDeliveryParams::default();
        p.apply_config("# comment\nblInit = 9..12\nN=2\nhfInit=true\n").unwrap();
        assert_eq!(p.bl_init, BlInit::Range(9, 12));
        assert_eq!(p.n, 2);
        assert!(p.hf_init);
        assert!(p.apply_assignment("bogus=1").is_err());
        assert!(WorkDeliveryParams { k_move: 6, ..p }.validate().is_err());
        assert!(WorkDeliveryParams::default().with_bl_init(31).validate().is_err());
    }

    #[test]
    fn non_unit_gamma_parses() {
        let p = WorkDeliveryParams {
            gamma_units: 2,
            ..WorkDeliveryParams::reduced()
        };
        assert!(emit_spec(&p).is_ok());
    }
}
