use std::collections::VecDeque;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{mpsc, Condvar, Mutex};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    Agent, AgentClock, Context, Message, Metrics, Outgoing, Payload, Recorder, RunConfig,
    RunReport, ScheduleMode, Solution, Trace, TraceEvent,
};
use crate::error::{Error, Result};
use crate::model::{AgentId, Problem};

struct Slot {
    agent: Box<dyn Agent>,
    clock: AgentClock,
    recorder: Recorder,
    terminations: u64,
}

/// Runs one init (`msg == None`) or message-handling event and returns the
/// addressed messages it produced, clocks attached.
fn activate(
    slot: &mut Slot,
    id: AgentId,
    problem: &Problem,
    msg: Option<&Message>,
) -> Result<Vec<(AgentId, Message)>> {
    let was_terminated = slot.agent.is_terminated();
    let clock = match msg {
        Some(m) => slot.clock.account_receive(m),
        None => AgentClock {
            steps: slot.clock.steps + 1,
            ncccs: slot.clock.ncccs,
        },
    };
    let mut outbox: Vec<Outgoing> = Vec::new();
    let Slot {
        agent, recorder, ..
    } = slot;
    let mut ctx = Context::new(id, problem, clock.ncccs, &mut outbox, recorder);
    let outcome = catch_unwind(AssertUnwindSafe(|| {
        match msg {
            Some(m) => agent.handle(m, &mut ctx),
            None => agent.init(&mut ctx),
        }
        (ctx.ncccs(), ctx.terminations())
    }));
    let (ncccs, terminations) = outcome.map_err(|panic| {
        let what = panic
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        let during = msg.map_or("init".to_string(), |m| {
            format!("{} from agent {}", m.kind(), m.sender + 1)
        });
        Error::AgentPanic(format!("agent {} handling {during}: {what}", id + 1))
    })?;
    if was_terminated && !outbox.is_empty() {
        return Err(Error::AgentPanic(format!(
            "agent {} sent {} messages after TERMINATE",
            id + 1,
            outbox.len()
        )));
    }
    slot.clock = AgentClock {
        steps: clock.steps,
        ncccs,
    };
    slot.terminations += terminations;
    Ok(outbox
        .into_iter()
        .map(|o| {
            (
                o.to,
                Message {
                    sender: id,
                    stamp: o.stamp,
                    payload: o.payload,
                    nc_steps_at_send: clock.steps,
                    ncccs_at_send: o.ncccs,
                },
            )
        })
        .collect())
}

/// Message accounting shared by all drivers.
struct Ledger {
    counts: Metrics,
    trace: Option<Vec<TraceEvent>>,
    budget: u64,
}

impl Ledger {
    fn new(config: &RunConfig) -> Self {
        Self {
            counts: Metrics::default(),
            trace: config.trace.then(Vec::new),
            budget: config.message_budget,
        }
    }

    fn on_send(&mut self, to: AgentId, msg: &Message) -> Result<()> {
        self.counts.count_send(msg.kind());
        if let Some(trace) = &mut self.trace {
            let cost = match &msg.payload {
                Payload::Cpa(pa) | Payload::NewSolution(pa) | Payload::FbCpa(pa) => Some(pa.cost()),
                _ => None,
            };
            trace.push(TraceEvent::Send {
                from: msg.sender,
                to,
                kind: msg.kind(),
                stamp: msg.stamp.clone(),
                cost,
            });
        }
        if self.counts.messages_total > self.budget {
            return Err(Error::Nontermination {
                sent: self.counts.messages_total,
                budget: self.budget,
            });
        }
        Ok(())
    }

    fn on_recv(&mut self, agent: AgentId, msg: &Message) {
        if let Some(trace) = &mut self.trace {
            trace.push(TraceEvent::Recv {
                agent,
                kind: msg.kind(),
                stamp: msg.stamp.clone(),
            });
        }
    }
}

fn finish(slots: Vec<Slot>, ledger: Ledger) -> Result<RunReport> {
    let open: Vec<AgentId> = slots
        .iter()
        .enumerate()
        .filter(|(_, s)| !s.agent.is_terminated())
        .map(|(id, _)| id)
        .collect();
    if !open.is_empty() {
        return Err(Error::Deadlock(open));
    }
    let mut metrics = ledger.counts;
    let mut generated_cpas = Vec::new();
    let mut probes = Vec::new();
    let mut terminate_broadcasts = 0;
    let mut best = None;
    for slot in &slots {
        metrics.absorb_clock(slot.clock);
        terminate_broadcasts += slot.terminations;
        if let Some(pa) = slot.agent.best() {
            if best.as_ref().is_none_or(|b: &Solution| pa.cost() < b.cost) {
                best = Some(Solution {
                    cost: pa.cost(),
                    values: pa.values(),
                });
            }
        }
    }
    for slot in slots {
        generated_cpas.extend(slot.recorder.cpas);
        probes.extend(slot.recorder.events);
    }
    Ok(RunReport {
        solution: best.ok_or(Error::NoSolution)?,
        metrics,
        trace: ledger.trace.map(|events| Trace { events }),
        generated_cpas,
        probes,
        terminate_broadcasts,
    })
}

/// Runs `agents` (one per variable, in agent order) on `problem` to quiescence.
pub fn run(
    problem: &Problem,
    agents: Vec<Box<dyn Agent>>,
    config: &RunConfig,
) -> Result<RunReport> {
    assert_eq!(
        agents.len(),
        problem.agent_count(),
        "one agent per variable"
    );
    let slots: Vec<Slot> = agents
        .into_iter()
        .map(|agent| Slot {
            agent,
            clock: AgentClock::default(),
            recorder: Recorder::new(config),
            terminations: 0,
        })
        .collect();
    match config.mode {
        ScheduleMode::Deterministic => run_fifo(problem, slots, config),
        ScheduleMode::Async { seed, max_delay } => {
            run_async(problem, slots, config, seed, max_delay)
        }
        ScheduleMode::Threaded => run_threaded(problem, slots, config),
    }
}

fn run_fifo(problem: &Problem, mut slots: Vec<Slot>, config: &RunConfig) -> Result<RunReport> {
    let mut ledger = Ledger::new(config);
    let mut queue = VecDeque::new();
    for (id, slot) in slots.iter_mut().enumerate() {
        for (to, msg) in activate(slot, id, problem, None)? {
            ledger.on_send(to, &msg)?;
            queue.push_back((to, msg));
        }
    }
    while let Some((to, msg)) = queue.pop_front() {
        ledger.on_recv(to, &msg);
        for (next_to, out) in activate(&mut slots[to], to, problem, Some(&msg))? {
            ledger.on_send(next_to, &out)?;
            queue.push_back((next_to, out));
        }
    }
    finish(slots, ledger)
}

/// Per-channel FIFO queues with a seeded choice of which channel delivers next.
struct Channels {
    n: usize,
    queues: Vec<VecDeque<(u64, Message)>>,
    last_ready: Vec<u64>,
    active: Vec<usize>,
    tick: u64,
    max_delay: u32,
    rng: ChaCha8Rng,
}

impl Channels {
    fn push(&mut self, to: AgentId, msg: Message) {
        let ch = msg.sender * self.n + to;
        let delay = if self.max_delay == 0 {
            0
        } else {
            self.rng.random_range(0..=self.max_delay) as u64
        };
        let ready = (self.tick + delay).max(self.last_ready[ch]);
        self.last_ready[ch] = ready;
        if self.queues[ch].is_empty() {
            self.active.push(ch);
        }
        self.queues[ch].push_back((ready, msg));
    }

    fn pop(&mut self) -> Option<(AgentId, Message)> {
        if self.active.is_empty() {
            return None;
        }
        let slot = if self.max_delay == 0 {
            self.rng.random_range(0..self.active.len())
        } else {
            let ready_at = |ch: usize| self.queues[ch].front().expect("active channel").0;
            let mut ready: Vec<usize> = (0..self.active.len())
                .filter(|&k| ready_at(self.active[k]) <= self.tick)
                .collect();
            if ready.is_empty() {
                self.tick = self
                    .active
                    .iter()
                    .map(|&ch| ready_at(ch))
                    .min()
                    .expect("non-empty");
                ready = (0..self.active.len())
                    .filter(|&k| ready_at(self.active[k]) <= self.tick)
                    .collect();
            }
            ready[self.rng.random_range(0..ready.len())]
        };
        let ch = self.active[slot];
        let (_, msg) = self.queues[ch].pop_front().expect("active channel");
        if self.queues[ch].is_empty() {
            self.active.swap_remove(slot);
        }
        self.tick += 1;
        Some((ch % self.n, msg))
    }
}

fn run_async(
    problem: &Problem,
    mut slots: Vec<Slot>,
    config: &RunConfig,
    seed: u64,
    max_delay: u32,
) -> Result<RunReport> {
    let n = slots.len();
    let mut ledger = Ledger::new(config);
    let mut channels = Channels {
        n,
        queues: (0..n * n).map(|_| VecDeque::new()).collect(),
        last_ready: vec![0; n * n],
        active: Vec::new(),
        tick: 0,
        max_delay,
        rng: ChaCha8Rng::seed_from_u64(seed),
    };
    for (id, slot) in slots.iter_mut().enumerate() {
        for (to, msg) in activate(slot, id, problem, None)? {
            ledger.on_send(to, &msg)?;
            channels.push(to, msg);
        }
    }
    while let Some((to, msg)) = channels.pop() {
        ledger.on_recv(to, &msg);
        for (next_to, out) in activate(&mut slots[to], to, problem, Some(&msg))? {
            ledger.on_send(next_to, &out)?;
            channels.push(next_to, out);
        }
    }
    finish(slots, ledger)
}

enum Envelope {
    Msg(Message),
    Stop,
}

struct Coordination {
    ledger: Mutex<(Ledger, Option<Error>)>,
    idle: Condvar,
    pending: AtomicU64,
    abort: AtomicBool,
}

impl Coordination {
    fn fail(&self, err: Error) {
        let mut guard = self.ledger.lock().expect("ledger lock");
        guard.1.get_or_insert(err);
        self.abort.store(true, Ordering::SeqCst);
        self.idle.notify_all();
    }

    fn dispatch(&self, senders: &[mpsc::Sender<Envelope>], out: Vec<(AgentId, Message)>) {
        for (to, msg) in out {
            let sent = {
                let mut guard = self.ledger.lock().expect("ledger lock");
                guard.0.on_send(to, &msg)
            };
            if let Err(e) = sent {
                self.fail(e);
                return;
            }
            self.pending.fetch_add(1, Ordering::SeqCst);
            if senders[to].send(Envelope::Msg(msg)).is_err() {
                self.pending.fetch_sub(1, Ordering::SeqCst);
            }
        }
    }
}

fn run_threaded(problem: &Problem, mut slots: Vec<Slot>, config: &RunConfig) -> Result<RunReport> {
    let n = slots.len();
    let (senders, receivers): (Vec<_>, Vec<_>) =
        (0..n).map(|_| mpsc::channel::<Envelope>()).unzip();
    let coord = Coordination {
        ledger: Mutex::new((Ledger::new(config), None)),
        idle: Condvar::new(),
        pending: AtomicU64::new(0),
        abort: AtomicBool::new(false),
    };
    for (id, slot) in slots.iter_mut().enumerate() {
        let out = activate(slot, id, problem, None)?;
        coord.dispatch(&senders, out);
    }

    let slots = std::thread::scope(|scope| {
        let handles: Vec<_> = slots
            .into_iter()
            .zip(receivers)
            .enumerate()
            .map(|(id, (mut slot, rx))| {
                let senders = senders.clone();
                let coord = &coord;
                scope.spawn(move || {
                    for env in rx.iter() {
                        let Envelope::Msg(msg) = env else { break };
                        if !coord.abort.load(Ordering::SeqCst) {
                            coord
                                .ledger
                                .lock()
                                .expect("ledger lock")
                                .0
                                .on_recv(id, &msg);
                            match activate(&mut slot, id, problem, Some(&msg)) {
                                Ok(out) => coord.dispatch(&senders, out),
                                Err(e) => coord.fail(e),
                            }
                        }
                        if coord.pending.fetch_sub(1, Ordering::SeqCst) == 1 {
                            let _guard = coord.ledger.lock().expect("ledger lock");
                            coord.idle.notify_all();
                        }
                    }
                    slot
                })
            })
            .collect();

        {
            let guard = coord.ledger.lock().expect("ledger lock");
            let _guard = coord
                .idle
                .wait_while(guard, |_| {
                    coord.pending.load(Ordering::SeqCst) != 0 && !coord.abort.load(Ordering::SeqCst)
                })
                .expect("ledger lock");
        }
        for tx in &senders {
            let _ = tx.send(Envelope::Stop);
        }
        handles
            .into_iter()
            .map(|h| h.join().expect("agent threads catch their own panics"))
            .collect::<Vec<Slot>>()
    });

    let (ledger, err) = coord.ledger.into_inner().expect("ledger lock");
    if let Some(e) = err {
        return Err(e);
    }
    finish(slots, ledger)
}
