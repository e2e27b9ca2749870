//! Asynchronous forward bounding agent, with index or min-cost value order.

use crate::assignment::PartialAssignment;
use crate::bounds::{local_cost, precompute_h, scalar_estimate};
use crate::kernel::{Agent, Context, Estimate, Message, Payload, Probe};
use crate::model::{AgentId, Cost, Value};
use crate::timestamp::{Arrival, StampTracker, Timestamp};

/// Order in which an agent tries its values under one higher-priority context.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValueOrdering {
    /// Domain index order.
    Index,
    /// Ascending local cost against the received CPA, ties by index.
    MinCost,
}

pub struct AfbAgent {
    id: AgentId,
    ordering: ValueOrdering,
    h: Vec<Cost>,
    b: Cost,
    best: Option<PartialAssignment>,
    /// Held CPA without the agent's own binding.
    cpa: PartialAssignment,
    own: Option<Value>,
    tracker: StampTracker,
    order: Vec<Value>,
    cursor: usize,
    /// Local cost of each value against `cpa`, filled lazily.
    lc: Vec<Option<Cost>>,
    estimates: Vec<Option<Cost>>,
    terminated: bool,
}

impl AfbAgent {
    pub fn new(id: AgentId, n: usize, domain_size: usize, ordering: ValueOrdering) -> Self {
        Self {
            id,
            ordering,
            h: Vec::new(),
            b: Cost::MAX,
            best: None,
            cpa: PartialAssignment::new(),
            own: None,
            tracker: StampTracker::new(id, n),
            order: (0..domain_size).collect(),
            cursor: 0,
            lc: vec![None; domain_size],
            estimates: vec![None; n],
            terminated: false,
        }
    }

    pub fn upper_bound(&self) -> Cost {
        self.b
    }

    fn lc(&mut self, ctx: &mut Context<'_>, v: Value) -> Cost {
        match self.lc[v] {
            Some(c) => c,
            None => {
                let c = local_cost(ctx, self.id, v, &self.cpa);
                self.lc[v] = Some(c);
                c
            }
        }
    }

    fn adopt_context(&mut self, ctx: &mut Context<'_>) {
        self.cursor = 0;
        self.lc.iter_mut().for_each(|c| *c = None);
        self.estimates.iter_mut().for_each(|e| *e = None);
        if self.ordering == ValueOrdering::MinCost {
            let costs: Vec<Cost> = (0..self.lc.len()).map(|v| self.lc(ctx, v)).collect();
            self.order.sort_by_key(|&v| (costs[v], v));
        }
    }

    fn on_cpa(&mut self, msg: &Message, pa: &PartialAssignment, ctx: &mut Context<'_>) {
        if msg.sender < self.id {
            match self.tracker.arrive_from_above(&msg.stamp) {
                Arrival::Stale => return,
                Arrival::NewContext => {
                    self.cpa = pa.clone();
                    self.own = None;
                    self.adopt_context(ctx);
                }
                Arrival::Duplicate => {
                    self.cpa = pa.clone();
                    self.own = None;
                }
            }
        } else {
            if !self.tracker.accepts_from_below(&msg.stamp) {
                return;
            }
            let mut held = pa.clone();
            held.keep_below(self.id);
            self.cpa = held;
        }
        if self.cpa.cost() >= self.b {
            self.backtrack(ctx);
        } else {
            self.assign_cpa(ctx);
        }
    }

    fn on_estimate(&mut self, msg: &Message, estimate: Cost, ctx: &mut Context<'_>) {
        let Some(v) = self.own else { return };
        if !self.tracker.accepts_estimate(&msg.stamp) {
            return;
        }
        self.estimates[msg.sender] = Some(estimate);
        let with_own = self.cpa.cost() + self.lc(ctx, v);
        let bound = with_own + self.estimates.iter().flatten().sum::<Cost>();
        ctx.probe(|| Probe::EstimateSum {
            agent: self.id,
            cpa: self.held_with_own(v, with_own - self.cpa.cost()),
            bound,
        });
        if bound >= self.b {
            self.assign_cpa(ctx);
        }
    }

    fn held_with_own(&self, v: Value, delta: Cost) -> PartialAssignment {
        let mut pa = self.cpa.clone();
        pa.push(self.id, v, delta);
        pa
    }

    fn assign_cpa(&mut self, ctx: &mut Context<'_>) {
        loop {
            self.estimates.iter_mut().for_each(|e| *e = None);
            self.own = None;
            self.tracker.release();
            let mut chosen = None;
            while self.cursor < self.order.len() {
                let v = self.order[self.cursor];
                self.cursor += 1;
                let lc = self.lc(ctx, v);
                let bound = self.cpa.cost() + lc + self.h[v];
                ctx.probe(|| Probe::ValueBound {
                    agent: self.id,
                    pa: self.cpa.clone(),
                    value: v,
                    bound,
                });
                if bound < self.b {
                    chosen = Some((v, lc));
                    break;
                }
            }
            let Some((v, lc)) = chosen else {
                self.backtrack(ctx);
                return;
            };
            let stamp = self.tracker.assign();
            self.own = Some(v);
            let cpa = self.held_with_own(v, lc);
            ctx.record_cpa(&cpa);
            if self.id + 1 == ctx.agent_count() {
                self.b = cpa.cost();
                ctx.broadcast(stamp, Payload::NewSolution(cpa.clone()));
                self.best = Some(cpa);
                continue;
            }
            ctx.send(self.id + 1, stamp.clone(), Payload::Cpa(cpa.clone()));
            for j in self.id + 1..ctx.agent_count() {
                ctx.send(j, stamp.clone(), Payload::FbCpa(cpa.clone()));
            }
            return;
        }
    }

    fn backtrack(&mut self, ctx: &mut Context<'_>) {
        self.estimates.iter_mut().for_each(|e| *e = None);
        self.own = None;
        self.tracker.release();
        if self.id == 0 {
            ctx.broadcast(Timestamp::default(), Payload::Terminate);
            self.terminated = true;
        } else {
            let stamp = self.tracker.for_target(self.id - 1);
            ctx.send(self.id - 1, stamp, Payload::Cpa(self.cpa.clone()));
        }
    }
}

impl Agent for AfbAgent {
    fn init(&mut self, ctx: &mut Context<'_>) {
        self.h = precompute_h(ctx, self.id);
        if self.id == 0 {
            self.adopt_context(ctx);
            self.assign_cpa(ctx);
        }
    }

    fn handle(&mut self, msg: &Message, ctx: &mut Context<'_>) {
        if self.terminated {
            return;
        }
        match &msg.payload {
            Payload::Cpa(pa) => self.on_cpa(msg, pa, ctx),
            Payload::FbCpa(pa) => {
                if self.tracker.observe_request(msg.sender, &msg.stamp) {
                    let estimate = scalar_estimate(ctx, self.id, pa, &self.h);
                    ctx.probe(|| Probe::Estimate {
                        responder: self.id,
                        pa: pa.clone(),
                        estimate: Estimate::Scalar(estimate),
                    });
                    ctx.send(
                        msg.sender,
                        msg.stamp.clone(),
                        Payload::FbEstimate(Estimate::Scalar(estimate)),
                    );
                }
            }
            Payload::FbEstimate(Estimate::Scalar(e)) => self.on_estimate(msg, *e, ctx),
            Payload::FbEstimate(Estimate::Prefix(_)) => {
                debug_assert!(false, "prefix estimates belong to the backjumping agent");
            }
            Payload::NewSolution(pa) => {
                if pa.cost() < self.b {
                    self.b = pa.cost();
                    self.best = Some(pa.clone());
                }
            }
            Payload::Terminate => self.terminated = true,
        }
    }

    fn is_terminated(&self) -> bool {
        self.terminated
    }

    fn best(&self) -> Option<&PartialAssignment> {
        self.best.as_ref()
    }
}
