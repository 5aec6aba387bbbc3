use std::collections::BTreeSet;
use std::sync::OnceLock;

use proptest::prelude::*;

use gr1kit::arena::{build_arena, GameArena};
use gr1kit::check::{lasso_check, verify_strategy_closure, LassoAdversary, Location};
use gr1kit::gr1::{brute_force_oracle, extract_strategy, solve_spec, Strategy as Controller};
use gr1kit::randspec::random_spec;
use gr1kit::sim::{read_csv, run, write_csv, Event, EventSchedule, RunOptions, Scripted, Trace, Uniform};
use gr1kit::speclang::{parse_spec, print_spec, CmpOp, Expr, Owner, SpecDocument};
use gr1kit::workdelivery::{backlog_successors, emit_spec, WorkDeliveryParams, WorldState};

struct Scenario {
    params: WorkDeliveryParams,
    doc: SpecDocument,
    arena: GameArena,
    strategy: Controller,
}

fn scenario(bl: i32) -> &'static Scenario {
    static CELLS: [OnceLock<Scenario>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
    let slot = match bl {
        9 => 0,
        12 => 1,
        26 => 2,
        _ => panic!("no cached scenario for BL_init={bl}"),
    };
    CELLS[slot].get_or_init(|| {
        let params = WorkDeliveryParams::default().with_bl_init(bl);
        let doc = emit_spec(&params).unwrap();
        let arena = build_arena(&doc).unwrap();
        let strategy = extract_strategy(&solve_spec(&arena), &arena).unwrap();
        Scenario {
            params,
            doc,
            arena,
            strategy,
        }
    })
}

/// Every valuation of the variables, in index order.
fn valuations(doc: &SpecDocument, owner: Option<Owner>) -> Vec<Vec<i32>> {
    let mut out = vec![Vec::new()];
    for v in doc.vars.iter().filter(|v| owner.is_none_or(|o| v.owner == o)) {
        out = out
            .into_iter()
            .flat_map(|p| {
                (v.domain.lo()..=v.domain.hi()).map(move |x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out
}

fn realizable_strategy(seed: u64) -> Option<(SpecDocument, GameArena, Controller)> {
    let doc = random_spec(seed);
    let arena = build_arena(&doc).unwrap();
    let strategy = extract_strategy(&solve_spec(&arena), &arena).ok()?;
    Some((doc, arena, strategy))
}

fn scripted_run(bl: i32, seed: u64, events: &[Event], steps: usize) -> Trace {
    let sc = scenario(bl);
    let opts = RunOptions {
        max_steps: steps,
        schedule: EventSchedule::new(events),
        arena: Some(&sc.arena),
        ..Default::default()
    };
    run(&sc.strategy, &mut Scripted::new(seed, opts.schedule.clone()), &opts).unwrap()
}

fn away_events() -> impl Strategy<Value = Vec<Event>> {
    prop::collection::vec((1usize..150, 1usize..12), 0..3).prop_map(|mut spans| {
        spans.sort();
        spans
            .into_iter()
            .map(|(step, duration)| Event::HumanAway {
                step,
                away: true,
                duration,
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn printed_specs_parse_back(seed in any::<u64>()) {
        let doc = random_spec(seed);
        let back = parse_spec(&print_spec(&doc)).unwrap();
        prop_assert_eq!(back, doc);
    }

    #[test]
    fn parser_never_panics(text in "\\PC{0,200}") {
        let _ = parse_spec(&text);
    }

    #[test]
    fn parser_never_panics_on_token_soup(
        words in prop::collection::vec(
            prop::sample::select(vec![
                "[ENV_VARS]", "[SYS_VARS]", "[ENV_INIT]", "[SYS_INIT]", "[ENV_TRANS]", "[SYS_TRANS]",
                "[ENV_LIVENESS]", "[SYS_LIVENESS]", "x", "y'", ":", "bool", "0..3", "=", "!=", "<", "<=",
                "->", "<->", "&", "|", "!", "(", ")", "+", "-", "7", "true", "false", "\n", "#",
            ]),
            0..60,
        )
    ) {
        let _ = parse_spec(&words.join(" "));
    }

    #[test]
    fn arena_moves_match_clause_evaluation(seed in any::<u64>()) {
        let doc = random_spec(seed);
        let arena = build_arena(&doc).unwrap();
        let sys_all = valuations(&doc, Some(Owner::Sys));
        for (s, cur) in valuations(&doc, None).into_iter().enumerate() {
            prop_assert_eq!(arena.encode(&cur), s);
            let mut expect_env = Vec::new();
            for env in valuations(&doc, Some(Owner::Env)) {
                let probe: Vec<i32> = env.iter().chain(&sys_all[0]).copied().collect();
                if !doc.env_safety.iter().all(|c| c.holds(&cur, &probe)) {
                    continue;
                }
                let succ: Vec<u32> = sys_all
                    .iter()
                    .map(|sys| env.iter().chain(sys).copied().collect::<Vec<i32>>())
                    .filter(|next| doc.sys_safety.iter().all(|c| c.holds(&cur, next)))
                    .map(|next| arena.encode(&next) as u32)
                    .collect();
                expect_env.push((arena.env_index(&probe), succ));
            }
            let got: Vec<(u32, Vec<u32>)> = arena.moves(s).map(|(e, t)| (e, t.to_vec())).collect();
            prop_assert_eq!(got, expect_env, "state {}", s);
        }
    }

    #[test]
    fn solver_agrees_with_parity_reference(seed in any::<u64>()) {
        let arena = build_arena(&random_spec(seed)).unwrap();
        let fast = solve_spec(&arena);
        let slow = brute_force_oracle(&arena).unwrap();
        prop_assert_eq!(fast.winning, slow.winning);
        prop_assert_eq!(fast.realizable, slow.realizable);
    }

    #[test]
    fn extra_system_constraint_never_grows_winning_region(
        seed in any::<u64>(),
        pick in any::<prop::sample::Index>(),
        value in -1i64..4,
    ) {
        let doc = random_spec(seed);
        let before = solve_spec(&build_arena(&doc).unwrap());
        let sys: Vec<usize> = doc.sys_vars().map(|(id, _)| id).collect();
        let mut tighter = doc.clone();
        tighter.sys_safety.push(Expr::cmp(CmpOp::Ne, Expr::next(*pick.get(&sys)), Expr::Int(value)));
        let after = solve_spec(&build_arena(&tighter).unwrap());
        prop_assert!(after.winning.is_subset(&before.winning));
    }

    #[test]
    fn closure_reports_deleted_edge(start in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let (arena, mut strategy) = (start..start.wrapping_add(500))
            .find_map(|seed| {
                let (_, arena, strategy) = realizable_strategy(seed)?;
                strategy.nodes.iter().any(|n| !n.edges.is_empty()).then_some((arena, strategy))
            })
            .expect("no suitable specification in 500 seeds");
        prop_assert!(verify_strategy_closure(&strategy, &arena).passed);
        let with_edges: Vec<usize> = (0..strategy.nodes.len()).filter(|n| !strategy.nodes[*n].edges.is_empty()).collect();
        let node = *pick.get(&with_edges);
        strategy.nodes[node].edges.pop();
        let verdict = verify_strategy_closure(&strategy, &arena);
        prop_assert!(!verdict.passed);
        prop_assert!(verdict.violations.iter().any(|v| v.at == Location::Node(node)));
    }

    #[test]
    fn lasso_finds_goal_free_cycle(start in any::<u64>()) {
        let (mut doc, mut strategy, bad) = (start..start.wrapping_add(500))
            .find_map(|seed| {
                let (doc, _, strategy) = realizable_strategy(seed)?;
                let goal = &doc.sys_liveness[0];
                let bad = strategy.nodes.iter().position(|n| !goal.holds_at(&n.state) && !n.edges.is_empty())?;
                let entry = strategy.init.first()?.node;
                (!strategy.nodes[entry].edges.is_empty()).then_some((doc, strategy, bad))
            })
            .expect("no suitable specification in 500 seeds");
        doc.env_liveness.clear();
        for node in &mut strategy.nodes {
            for e in &mut node.edges {
                e.next = bad;
            }
        }
        let verdict = lasso_check(&strategy, LassoAdversary::AllMoves, &doc).unwrap();
        prop_assert!(!verdict.passed);
        let cycle = format!("{bad} -> {bad}");
        prop_assert!(verdict.violations.iter().any(|v| v.description.contains(&cycle)), "{}", verdict.report());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn backlog_menu_matches_model_on_small_instances(
        n in 1i32..=3,
        bl_max in 4i32..=12,
        gamma in 1i32..=2,
        delta in 1i32..=6,
        k_move in 1i32..=2,
        k_extra in 0i32..=1,
    ) {
        let mut p = WorkDeliveryParams::reduced();
        p.n = n;
        p.bl_max = bl_max;
        p.bl_upper = bl_max - 1;
        p.gamma_units = gamma;
        p.delta_units = delta;
        p.k_move = k_move;
        p.k_drop = k_move + k_extra;
        p = p.with_bl_init(1);
        prop_assume!(p.validate().is_ok());
        let doc = emit_spec(&p).unwrap();
        let arena = build_arena(&doc).unwrap();
        assert_backlog_menu(&arena, &p);
    }

    #[test]
    fn trace_keeps_tries_and_obstacle_rules(
        bl in prop::sample::select(vec![9, 12, 26]),
        seed in any::<u64>(),
        events in away_events(),
    ) {
        let sc = scenario(bl);
        let trace = scripted_run(bl, seed, &events, 180);
        let p = &sc.params;
        let states: Vec<WorldState> = trace.states.iter().map(|v| WorldState::from_values(v, p)).collect();
        for k in 1..states.len() {
            if trace.away[k] {
                continue;
            }
            let (a, b) = (&states[k - 1], &states[k]);
            match b.tries {
                1 => prop_assert!(b.rs == 0 && a.rs != 0 && a.act == 0, "step {}", k),
                2 => prop_assert!(a.tries == 1 && !a.s && a.rs == 0, "step {}", k),
                _ => {}
            }
            if a.tries == 2 && a.rs == 0 && a.hf {
                prop_assert!(a.s, "second attempt at step {} without S", k - 1);
            }
            for (j, (was, is)) in a.obstacles.iter().zip(&b.obstacles).enumerate() {
                prop_assert!(!(*was && *is), "O{} persists at step {}", j + 1, k);
                if *is {
                    prop_assert_ne!(b.act, j as i32 + 1, "step {}", k);
                }
            }
        }
    }

    #[test]
    fn human_away_freezes_the_scene(
        seed in any::<u64>(),
        start in 1usize..150,
        duration in 1usize..20,
    ) {
        let events = [Event::HumanAway { step: start, away: true, duration }];
        let trace = scripted_run(12, seed, &events, 180);
        for k in start..(start + duration).min(trace.len()) {
            prop_assert!(trace.away[k]);
            prop_assert_eq!(&trace.states[k], &trace.states[k - 1], "step {}", k);
            prop_assert_eq!(trace.nodes[k], trace.nodes[k - 1]);
        }
        prop_assert!(!trace.away[..start].iter().any(|a| *a));
    }

    #[test]
    fn csv_round_trip_restores_hidden_columns(
        bl in prop::sample::select(vec![9, 12, 26]),
        seed in any::<u64>(),
        events in away_events(),
    ) {
        let sc = scenario(bl);
        let trace = scripted_run(bl, seed, &events, 120);
        let mut out = Vec::new();
        write_csv(&trace, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        prop_assert!(!text.lines().next().unwrap().contains("stall"));
        let back = read_csv(&text, &sc.doc).unwrap();
        prop_assert_eq!(&back.states, &trace.states);
        prop_assert_eq!(&back.away, &trace.away);
        prop_assert_eq!(back.td_seconds, trace.td_seconds);
    }
}

fn assert_backlog_menu(arena: &GameArena, p: &WorkDeliveryParams) {
    let bl_var = arena.doc().var_id("BL").unwrap();
    for s in 0..arena.num_states() {
        let values = arena.decode(s);
        let state = WorldState::from_values(&values, p);
        let got: BTreeSet<i32> = arena.env_move_values(s).iter().map(|e| e[bl_var]).collect();
        assert_eq!(got, backlog_successors(&state, p), "state {state:?}");
    }
}

#[test]
fn backlog_menu_matches_model_on_every_scenario_state() {
    let sc = scenario(12);
    assert_eq!(sc.arena.num_states(), 47_616);
    assert_backlog_menu(&sc.arena, &sc.params);
}

#[test]
fn random_runs_stay_in_strategy() {
    let sc = scenario(12);
    let opts = RunOptions {
        arena: Some(&sc.arena),
        ..Default::default()
    };
    for seed in 0..5 {
        let trace = run(&sc.strategy, &mut Uniform::new(seed), &opts).unwrap();
        assert_eq!(trace.len(), 181);
        assert!(trace.nodes.iter().all(|n| n.is_some()));
    }
}

#[test]
fn closure_rejects_strategy_for_other_instance() {
    let (a, b) = (scenario(12), scenario(26));
    assert!(verify_strategy_closure(&a.strategy, &a.arena).passed);
    let verdict = verify_strategy_closure(&a.strategy, &b.arena);
    assert!(!verdict.passed);
    assert!(verdict.violations.iter().any(|v| v.at == Location::Strategy || v.at == Location::Init));
}
