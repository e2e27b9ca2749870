use discop::gen::{fixture_four_agents, generate, GenParams};
use discop::kernel::{run, Agent, Context, Estimate, Message, MessageKind, Payload, ScheduleMode};
use discop::timestamp::Timestamp;
use discop::{solve, Algorithm, CostTable, Error, PartialAssignment, Problem, RunConfig};

/// Sends `count` numbered messages to agent `to` during init.
struct Burst {
    to: usize,
    count: u64,
    sent: bool,
    best: PartialAssignment,
}

impl Agent for Burst {
    fn init(&mut self, ctx: &mut Context<'_>) {
        for seq in 0..self.count {
            ctx.send(
                self.to,
                Timestamp::default(),
                Payload::FbEstimate(Estimate::Scalar(seq)),
            );
        }
        self.sent = true;
    }

    fn handle(&mut self, _: &Message, _: &mut Context<'_>) {}

    fn is_terminated(&self) -> bool {
        self.sent
    }

    fn best(&self) -> Option<&PartialAssignment> {
        Some(&self.best)
    }
}

/// Checks that each sender's numbered messages arrive in order.
struct Sink {
    next: Vec<u64>,
    expected_total: u64,
    received: u64,
}

impl Agent for Sink {
    fn init(&mut self, _: &mut Context<'_>) {}

    fn handle(&mut self, msg: &Message, _: &mut Context<'_>) {
        let Payload::FbEstimate(Estimate::Scalar(seq)) = msg.payload else {
            panic!("unexpected payload");
        };
        assert_eq!(
            seq, self.next[msg.sender],
            "channel from {} reordered",
            msg.sender
        );
        self.next[msg.sender] += 1;
        self.received += 1;
    }

    fn is_terminated(&self) -> bool {
        self.received == self.expected_total
    }

    fn best(&self) -> Option<&PartialAssignment> {
        None
    }
}

fn free_problem(n: usize) -> Problem {
    Problem::new(vec![1; n]).unwrap()
}

fn burst_agents(n: usize, count: u64) -> Vec<Box<dyn Agent>> {
    let mut agents: Vec<Box<dyn Agent>> = (0..n - 1)
        .map(|_| {
            Box::new(Burst {
                to: n - 1,
                count,
                sent: false,
                best: PartialAssignment::new(),
            }) as Box<dyn Agent>
        })
        .collect();
    agents.push(Box::new(Sink {
        next: vec![0; n],
        expected_total: count * (n as u64 - 1),
        received: 0,
    }));
    agents
}

#[test]
fn channels_stay_fifo_under_async_delays() {
    for seed in 0..40 {
        for max_delay in [0, 1, 7] {
            let config = RunConfig::with_mode(ScheduleMode::Async { seed, max_delay });
            let report = run(&free_problem(4), burst_agents(4, 30), &config).unwrap();
            assert_eq!(report.metrics.messages_total, 90);
        }
    }
}

#[test]
fn channels_stay_fifo_when_threaded() {
    for _ in 0..5 {
        let config = RunConfig::with_mode(ScheduleMode::Threaded);
        let report = run(&free_problem(5), burst_agents(5, 200), &config).unwrap();
        assert_eq!(report.metrics.messages_total, 800);
    }
}

/// Two agents bouncing a message until `limit` deliveries (or forever).
struct PingPong {
    limit: Option<u64>,
    seen: u64,
    reads: usize,
    done: bool,
    best: PartialAssignment,
}

impl PingPong {
    fn pair(limit: Option<u64>, reads: usize) -> Vec<Box<dyn Agent>> {
        (0..2)
            .map(|_| {
                Box::new(PingPong {
                    limit,
                    seen: 0,
                    reads,
                    done: false,
                    best: PartialAssignment::new(),
                }) as Box<dyn Agent>
            })
            .collect()
    }
}

impl Agent for PingPong {
    fn init(&mut self, ctx: &mut Context<'_>) {
        if ctx.id() == 0 {
            ctx.send(
                1,
                Timestamp::default(),
                Payload::FbEstimate(Estimate::Scalar(1)),
            );
        }
    }

    fn handle(&mut self, msg: &Message, ctx: &mut Context<'_>) {
        for _ in 0..self.reads {
            ctx.cost(0, 0, 1, 0);
        }
        let Payload::FbEstimate(Estimate::Scalar(k)) = msg.payload else {
            self.done = true;
            return;
        };
        self.seen += 1;
        if self.limit.is_some_and(|limit| k >= limit) {
            self.done = true;
            ctx.send(1 - ctx.id(), Timestamp::default(), Payload::Terminate);
        } else {
            ctx.send(
                1 - ctx.id(),
                Timestamp::default(),
                Payload::FbEstimate(Estimate::Scalar(k + 1)),
            );
        }
    }

    fn is_terminated(&self) -> bool {
        self.done
    }

    fn best(&self) -> Option<&PartialAssignment> {
        Some(&self.best)
    }
}

fn constrained_pair() -> Problem {
    let mut p = Problem::new(vec![1, 1]).unwrap();
    p.add_constraint(0, 1, CostTable::filled(1, 1, 0)).unwrap();
    p
}

#[test]
fn ping_pong_steps_follow_the_recurrence() {
    // k messages of payload plus the closing TERMINATE; the first agent's
    // init is one more step.
    for k in 1..=12u64 {
        let report = run(
            &constrained_pair(),
            PingPong::pair(Some(k), 0),
            &RunConfig::default(),
        )
        .unwrap();
        let delivered = k + 1;
        assert_eq!(report.metrics.messages_total, delivered);
        assert_eq!(report.metrics.nc_steps, delivered + 1);
        assert_eq!(report.metrics.ncccs, 0);
    }
}

#[test]
fn constraint_checks_accumulate_along_the_causal_chain() {
    let report = run(
        &constrained_pair(),
        PingPong::pair(Some(4), 3),
        &RunConfig::default(),
    )
    .unwrap();
    // five handled messages, three reads each, all causally ordered
    assert_eq!(report.metrics.ncccs, 15);
}

#[test]
fn unconstrained_reads_are_free() {
    let report = run(
        &free_problem(2),
        PingPong::pair(Some(4), 3),
        &RunConfig::default(),
    )
    .unwrap();
    assert_eq!(report.metrics.ncccs, 0);
}

#[test]
fn message_budget_stops_runaway_runs() {
    let config = RunConfig {
        message_budget: 1000,
        ..RunConfig::default()
    };
    let err = run(&free_problem(2), PingPong::pair(None, 0), &config).unwrap_err();
    assert_eq!(
        err,
        Error::Nontermination {
            sent: 1001,
            budget: 1000
        }
    );
    for mode in [
        ScheduleMode::Async {
            seed: 1,
            max_delay: 2,
        },
        ScheduleMode::Threaded,
    ] {
        let config = RunConfig {
            message_budget: 1000,
            ..RunConfig::with_mode(mode)
        };
        let err = run(&free_problem(2), PingPong::pair(None, 0), &config).unwrap_err();
        assert!(
            matches!(err, Error::Nontermination { .. }),
            "{mode:?}: {err}"
        );
    }
}

struct Exploding;

impl Agent for Exploding {
    fn init(&mut self, _: &mut Context<'_>) {}

    fn handle(&mut self, _: &Message, _: &mut Context<'_>) {
        panic!("boom");
    }

    fn is_terminated(&self) -> bool {
        false
    }

    fn best(&self) -> Option<&PartialAssignment> {
        None
    }
}

#[test]
fn agent_panics_abort_the_run() {
    for mode in [ScheduleMode::Deterministic, ScheduleMode::Threaded] {
        let agents: Vec<Box<dyn Agent>> = vec![
            Box::new(Burst {
                to: 1,
                count: 1,
                sent: false,
                best: PartialAssignment::new(),
            }),
            Box::new(Exploding),
        ];
        let err = run(&free_problem(2), agents, &RunConfig::with_mode(mode)).unwrap_err();
        match err {
            Error::AgentPanic(text) => {
                assert!(text.contains("boom") && text.contains("agent 2"), "{text}")
            }
            other => panic!("{mode:?}: unexpected {other}"),
        }
    }
}

#[test]
fn quiescence_without_termination_is_a_deadlock() {
    let agents: Vec<Box<dyn Agent>> = vec![Box::new(Exploding), Box::new(Exploding)];
    let err = run(&free_problem(2), agents, &RunConfig::default()).unwrap_err();
    assert_eq!(err, Error::Deadlock(vec![0, 1]));
}

/// Terminated from the start but still answers every message.
struct Chatty;

impl Agent for Chatty {
    fn init(&mut self, _: &mut Context<'_>) {}

    fn handle(&mut self, msg: &Message, ctx: &mut Context<'_>) {
        ctx.send(msg.sender, Timestamp::default(), Payload::Terminate);
    }

    fn is_terminated(&self) -> bool {
        true
    }

    fn best(&self) -> Option<&PartialAssignment> {
        None
    }
}

#[test]
fn sending_after_termination_is_rejected() {
    let agents: Vec<Box<dyn Agent>> = vec![
        Box::new(Burst {
            to: 1,
            count: 1,
            sent: false,
            best: PartialAssignment::new(),
        }),
        Box::new(Chatty),
    ];
    let err = run(&free_problem(2), agents, &RunConfig::default()).unwrap_err();
    assert!(
        matches!(err, Error::AgentPanic(ref t) if t.contains("after TERMINATE")),
        "{err}"
    );
}

#[test]
fn single_agent_problem() {
    let mut p = Problem::new(vec![3]).unwrap();
    // no constraints possible; every value costs nothing
    assert_eq!(p.constraint_count(), 0);
    for alg in Algorithm::ALL {
        let report = solve(&p, alg, &RunConfig::default()).unwrap();
        assert_eq!(report.solution.cost, 0);
        assert_eq!(report.solution.values, vec![0]);
        assert_eq!(report.terminate_broadcasts, 1, "{alg}");
        assert_eq!(report.metrics.messages_total, 0);
    }
    assert!(p.add_constraint(0, 0, CostTable::filled(3, 3, 1)).is_err());
}

#[test]
fn fifty_async_schedules_agree() {
    let fixture = fixture_four_agents();
    let random = generate(&GenParams::new(6, 3, 0.8, 0.7, 21)).unwrap();
    for (p, expected) in [
        (&fixture, 5),
        (
            &random,
            discop::oracle::solve_exact(&random).unwrap().optimal_cost,
        ),
    ] {
        for alg in Algorithm::ALL {
            for seed in 0..50 {
                let config = RunConfig::with_mode(ScheduleMode::Async {
                    seed,
                    max_delay: (seed % 4) as u32,
                });
                let report = solve(p, alg, &config).unwrap();
                assert_eq!(report.solution.cost, expected, "{alg} seed {seed}");
            }
        }
    }
}

#[test]
fn threaded_driver_matches_oracle() {
    for seed in 0..25 {
        let p = generate(&GenParams::new(6, 3, 0.7, 0.8, seed)).unwrap();
        let opt = discop::oracle::solve_exact(&p).unwrap().optimal_cost;
        for alg in Algorithm::ALL {
            let report = solve(&p, alg, &RunConfig::with_mode(ScheduleMode::Threaded)).unwrap();
            assert_eq!(report.solution.cost, opt, "{alg} seed {seed}");
        }
    }
}

#[test]
fn message_counts_are_consistent() {
    let p = generate(&GenParams::new(7, 3, 0.7, 0.7, 5)).unwrap();
    for alg in Algorithm::ALL {
        let config = RunConfig {
            trace: true,
            ..RunConfig::default()
        };
        let r = solve(&p, alg, &config).unwrap();
        let m = &r.metrics;
        assert_eq!(m.messages_total, m.messages_by_kind.iter().sum::<u64>());
        let trace = r.trace.unwrap();
        let sends = trace
            .events
            .iter()
            .filter(|e| matches!(e, discop::kernel::TraceEvent::Send { .. }))
            .count() as u64;
        assert_eq!(sends, m.messages_total);
        // every message is delivered exactly once
        assert_eq!(trace.events.len() as u64, 2 * m.messages_total);
        let n = p.agent_count() as u64;
        assert_eq!(
            m.messages(MessageKind::Terminate),
            r.terminate_broadcasts * (n - 1)
        );
    }
}

#[test]
fn trace_text_round_trips() {
    let config = RunConfig {
        trace: true,
        ..RunConfig::default()
    };
    let r = solve(&fixture_four_agents(), Algorithm::AfbBj, &config).unwrap();
    let trace = r.trace.unwrap();
    let text = trace.to_string();
    let parsed = discop::kernel::Trace::parse(&text).unwrap();
    assert_eq!(parsed.events.len(), trace.events.len());
    assert_eq!(parsed.to_string(), text);
    assert!(text.lines().any(|l| l.starts_with("recv 2 CPA_MSG ")));
    assert!(text.lines().any(|l| l == "send 1->2 CPA_MSG"));
}
