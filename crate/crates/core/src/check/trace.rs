use super::{Location, Verdict, Violation};
use crate::sim::Trace;
use crate::speclang::{Expr, SpecDocument};

/// Initial conditions on the first snapshot, every safety clause on each
/// consecutive pair, and clauses over next-step values only as state
/// invariants of the first snapshot. Pairs ending in a human-away snapshot
/// are frozen and skipped.
pub fn check_safety(trace: &Trace, doc: &SpecDocument) -> Verdict {
    let mut out = Vec::new();
    if trace.vars != doc.vars {
        out.push(Violation {
            at: Location::Init,
            item: "variables".into(),
            description: "trace and specification declare different variables".into(),
        });
        return Verdict::from_violations(out);
    }
    let Some(first) = trace.states.first() else {
        return Verdict::from_violations(out);
    };
    for (kind, clauses) in [("environment init", &doc.env_init), ("system init", &doc.sys_init)] {
        for c in clauses.iter().filter(|c| !c.holds_at(first)) {
            out.push(Violation {
                at: Location::Step(0),
                item: doc.show(c),
                description: format!("{kind} violated"),
            });
        }
    }
    let invariant = |c: &&Expr| {
        let mut current = false;
        c.for_each_ref(&mut |_, next| current |= !next);
        !current && c.has_next_refs()
    };
    for (kind, clauses) in [("environment", &doc.env_safety), ("system", &doc.sys_safety)] {
        for c in clauses.iter().filter(invariant).filter(|c| !c.holds_at(first)) {
            out.push(Violation {
                at: Location::Step(0),
                item: doc.show(c),
                description: format!("{kind} invariant violated"),
            });
        }
    }
    for k in 1..trace.states.len() {
        if trace.away[k] {
            continue;
        }
        let (prev, cur) = (&trace.states[k - 1], &trace.states[k]);
        for (kind, clauses) in [("environment", &doc.env_safety), ("system", &doc.sys_safety)] {
            for c in clauses.iter().filter(|c| !c.holds(prev, cur)) {
                out.push(Violation {
                    at: Location::Step(k),
                    item: doc.show(c),
                    description: format!("{kind} safety violated"),
                });
            }
        }
    }
    Verdict::from_violations(out)
}

/// Every `window` consecutive active snapshots contain a goal snapshot.
/// Human-away snapshots neither count nor reset the window.
pub fn check_recurrence(trace: &Trace, goal: &Expr, goal_name: &str, window: usize) -> Verdict {
    assert!(window >= 1, "window must be positive");
    let mut out = Vec::new();
    let mut run = 0;
    for (k, state) in trace.states.iter().enumerate() {
        if trace.away[k] {
            continue;
        }
        if goal.holds_at(state) {
            run = 0;
            continue;
        }
        run += 1;
        if run == window {
            out.push(Violation {
                at: Location::Step(k),
                item: goal_name.to_string(),
                description: format!("goal not reached in the {window} steps ending here"),
            });
        }
    }
    Verdict::from_violations(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::speclang::parse_spec;

    fn doc() -> SpecDocument {
        parse_spec("[ENV_VARS]\nBL : 0..5\n[SYS_VARS]\ng : bool\n[SYS_TRANS]\nBL' > 0\n[SYS_LIVENESS]\ng\n").unwrap()
    }

    fn trace(states: &[[i32; 2]], away: &[bool]) -> Trace {
        Trace {
            vars: doc().vars,
            td_seconds: 10,
            states: states.iter().map(|s| s.to_vec()).collect(),
            away: away.to_vec(),
            nodes: vec![None; states.len()],
        }
    }

    #[test]
    fn safety_cites_clause_at_step() {
        let d = doc();
        assert!(check_safety(&trace(&[[3, 0], [2, 1]], &[false, false]), &d).passed);
        let v = check_safety(&trace(&[[3, 0], [2, 1], [0, 0], [1, 0]], &[false; 4]), &d);
        assert!(!v.passed);
        assert_eq!(v.violations.len(), 1);
        assert_eq!(v.violations[0].at, Location::Step(2));
        assert_eq!(v.violations[0].item, "BL' > 0");
        let v = check_safety(&trace(&[[0, 0]], &[false]), &d);
        assert_eq!(v.violations[0].at, Location::Step(0));
    }

    #[test]
    fn recurrence_windows() {
        let g = Expr::var(1);
        let all = trace(&[[1, 1]; 6], &[false; 6]);
        assert!(check_recurrence(&all, &g, "g", 1).passed);
        let w = 3;
        let mut states = vec![[1, 0]; 2 * w];
        states[0] = [1, 1];
        let once = trace(&states, &vec![false; 2 * w]);
        let v = check_recurrence(&once, &g, "g", w);
        assert_eq!(v.violations.len(), 1);
        assert_eq!(v.violations[0].at, Location::Step(w));
        assert!(check_recurrence(&once, &g, "g", 2 * w).passed);
    }

    #[test]
    fn away_snapshots_pause_the_window() {
        let g = Expr::var(1);
        let t = trace(&[[1, 1], [1, 0], [1, 0], [1, 0], [1, 1]], &[false, false, true, true, false]);
        assert!(check_recurrence(&t, &g, "g", 2).passed);
    }
}
