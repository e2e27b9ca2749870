use discop::gen::{fixture_four_agents, generate, GenParams, B, R};
use discop::kernel::{Estimate, MessageKind, Probe, ScheduleMode, TraceEvent};
use discop::{solve, Algorithm, PartialAssignment, RunConfig};

fn traced() -> RunConfig {
    RunConfig {
        trace: true,
        ..RunConfig::default()
    }
}

#[test]
fn fixture_optimum_in_every_mode() {
    let p = fixture_four_agents();
    for alg in Algorithm::ALL {
        for mode in [
            ScheduleMode::Deterministic,
            ScheduleMode::Async {
                seed: 3,
                max_delay: 2,
            },
            ScheduleMode::Threaded,
        ] {
            let r = solve(&p, alg, &RunConfig::with_mode(mode)).unwrap();
            assert_eq!(r.solution.cost, 5, "{alg} {mode:?}");
            assert_eq!(p.full_cost(&r.solution.values), 5);
        }
    }
}

#[test]
fn zero_tightness_terminates_at_zero() {
    for seed in 0..10 {
        let p = generate(&GenParams::new(6, 3, 0.8, 0.0, seed)).unwrap();
        for alg in Algorithm::ALL {
            let r = solve(&p, alg, &traced()).unwrap();
            assert_eq!(r.solution.cost, 0);
            // the first descent already hits the bound
            assert_eq!(r.trace.unwrap().solution_costs(), vec![0], "{alg}");
        }
    }
}

#[test]
fn sbb_keeps_a_single_token() {
    for seed in 0..20 {
        let p = generate(&GenParams::new(6, 3, 0.7, 0.8, seed)).unwrap();
        let r = solve(&p, Algorithm::Sbb, &traced()).unwrap();
        let m = &r.metrics;
        assert_eq!(m.messages(MessageKind::FbCpa), 0);
        assert_eq!(m.messages(MessageKind::FbEstimate), 0);
        let mut in_flight: i64 = 0;
        for e in &r.trace.unwrap().events {
            match e {
                TraceEvent::Send {
                    kind: MessageKind::CpaMsg,
                    ..
                } => in_flight += 1,
                TraceEvent::Recv {
                    kind: MessageKind::CpaMsg,
                    ..
                } => in_flight -= 1,
                _ => {}
            }
            assert!((0..=1).contains(&in_flight));
        }
    }
}

#[test]
fn counters_stay_within_domain_size() {
    for seed in 0..15 {
        let p = generate(&GenParams::new(7, 3, 0.7, 0.85, seed)).unwrap();
        for alg in [Algorithm::Afb, Algorithm::AfbMinC, Algorithm::AfbBj] {
            for mode in [
                ScheduleMode::Deterministic,
                ScheduleMode::Async { seed, max_delay: 3 },
            ] {
                let config = RunConfig {
                    trace: true,
                    ..RunConfig::with_mode(mode)
                };
                let r = solve(&p, alg, &config).unwrap();
                for e in &r.trace.unwrap().events {
                    if let TraceEvent::Send { stamp, .. } = e {
                        for (k, &c) in stamp.counters().iter().enumerate() {
                            assert!(
                                c as usize <= p.domain_size(k),
                                "{alg}: counter {c} of agent {k}"
                            );
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn worked_example_events() {
    let p = fixture_four_agents();
    let config = RunConfig {
        trace: true,
        probes: true,
        ..RunConfig::default()
    };
    let r = solve(&p, Algorithm::Afb, &config).unwrap();
    let rb = PartialAssignment::from_values(&p, &[R, B]).unwrap();

    // After the first backtrack X3 switches to B and forwards a CPA of cost 4.
    let trace = r.trace.unwrap();
    assert!(trace.events.iter().any(|e| matches!(
        e,
        TraceEvent::Send {
            from: 2,
            to: 3,
            kind: MessageKind::CpaMsg,
            cost: Some(4),
            ..
        }
    )));

    // X3 and X4 estimate 3 and 1 for {X1=R, X2=B}; X2 sums to the bound 5.
    let estimate = |who: usize| {
        r.probes.iter().find_map(|pr| match pr {
            Probe::Estimate {
                responder,
                pa,
                estimate: Estimate::Scalar(e),
            } if *responder == who && *pa == rb => Some(*e),
            _ => None,
        })
    };
    assert_eq!(estimate(2), Some(3));
    assert_eq!(estimate(3), Some(1));
    assert!(r.probes.iter().any(|pr| matches!(
        pr,
        Probe::EstimateSum { agent: 1, cpa, bound: 5 } if *cpa == rb
    )));
}

#[test]
fn fixture_f_bounds_at_third_agent() {
    let p = fixture_four_agents();
    let config = RunConfig {
        probes: true,
        ..RunConfig::default()
    };
    let r = solve(&p, Algorithm::Afb, &config).unwrap();
    let rb = PartialAssignment::from_values(&p, &[R, B]).unwrap();
    let bound = |v| {
        r.probes.iter().find_map(|pr| match pr {
            Probe::ValueBound {
                agent: 2,
                pa,
                value,
                bound,
            } if *pa == rb && *value == v => Some(*bound),
            _ => None,
        })
    };
    // CPA cost 1 plus f(R) = 3 and f(B) = 4, when X3 gets to try them
    let mut seen = 0;
    for (v, f) in [(R, 3), (B, 4)] {
        if let Some(b) = bound(v) {
            assert_eq!(b, 1 + f);
            seen += 1;
        }
    }
    assert!(seen > 0);
}

#[test]
fn min_cost_ordering_keeps_the_optimum() {
    for seed in 0..40 {
        let p = generate(&GenParams::new(6, 4, 0.6, 0.75, seed).with_max_cost(5)).unwrap();
        let afb = solve(&p, Algorithm::Afb, &RunConfig::default()).unwrap();
        let minc = solve(&p, Algorithm::AfbMinC, &RunConfig::default()).unwrap();
        let bj = solve(&p, Algorithm::AfbBj, &RunConfig::default()).unwrap();
        assert_eq!(afb.solution.cost, minc.solution.cost);
        assert_eq!(afb.solution.cost, bj.solution.cost);
    }
}

#[test]
fn backjumping_happens() {
    // Some CPA must travel back past more than one agent on tight instances.
    let mut jumps = 0;
    for seed in 0..10 {
        let p = generate(&GenParams::new(8, 4, 0.7, 0.9, seed)).unwrap();
        let r = solve(&p, Algorithm::AfbBj, &traced()).unwrap();
        jumps += r
            .trace
            .unwrap()
            .events
            .iter()
            .filter(|e| matches!(e, TraceEvent::Send { from, to, kind: MessageKind::CpaMsg, .. } if to + 1 < *from))
            .count();
    }
    assert!(jumps > 0);
}

#[test]
fn non_unit_costs_are_solved_exactly() {
    for seed in 0..30 {
        let p = generate(&GenParams::new(5, 3, 0.8, 0.6, seed).with_max_cost(9)).unwrap();
        let opt = discop::oracle::solve_exact(&p).unwrap().optimal_cost;
        for alg in Algorithm::ALL {
            for mode in [
                ScheduleMode::Deterministic,
                ScheduleMode::Async { seed, max_delay: 2 },
            ] {
                assert_eq!(
                    solve(&p, alg, &RunConfig::with_mode(mode))
                        .unwrap()
                        .solution
                        .cost,
                    opt
                );
            }
        }
    }
}
