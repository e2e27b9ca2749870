//! Forward bounding with backjumping driven by prefix-indexed lower bounds.

use crate::assignment::PartialAssignment;
use crate::bounds::{estimate_vector, local_cost_prefix, precompute_h, BoundVectors};
use crate::kernel::{Agent, Context, Estimate, Message, Payload, Probe};
use crate::model::{AgentId, Cost, Value};
use crate::timestamp::{Arrival, StampTracker, Timestamp};

pub struct AfbBjAgent {
    id: AgentId,
    h: Vec<Cost>,
    b: Cost,
    best: Option<PartialAssignment>,
    /// Held CPA without the agent's own binding; always agents `0..id`.
    cpa: PartialAssignment,
    own: Option<Value>,
    tracker: StampTracker,
    order: Vec<Value>,
    cursor: usize,
    bounds: BoundVectors,
    terminated: bool,
}

impl AfbBjAgent {
    pub fn new(id: AgentId, n: usize, domain_size: usize) -> Self {
        Self {
            id,
            h: Vec::new(),
            b: Cost::MAX,
            best: None,
            cpa: PartialAssignment::new(),
            own: None,
            tracker: StampTracker::new(id, n),
            order: (0..domain_size).collect(),
            cursor: 0,
            bounds: BoundVectors::new(n, domain_size),
            terminated: false,
        }
    }

    fn full_lc(&self, v: Value) -> Cost {
        self.bounds.lc(v, self.id)
    }

    /// New higher-priority context: drop estimates, recompute `PC` and `LC`,
    /// and order values by local cost.
    fn adopt_context(&mut self, ctx: &mut Context<'_>) {
        self.cursor = 0;
        self.bounds.clear_fc();
        self.bounds.set_pc_from(&self.cpa);
        for v in 0..self.order.len() {
            let lc = local_cost_prefix(ctx, self.id, v, &self.cpa);
            self.bounds.set_lc(v, lc);
        }
        let bounds = &self.bounds;
        let id = self.id;
        self.order.sort_by_key(|&v| (bounds.lc(v, id), v));
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

    fn on_estimate(&mut self, msg: &Message, vector: &[Cost], ctx: &mut Context<'_>) {
        let Some(v) = self.own else { return };
        if !self.tracker.accepts_estimate(&msg.stamp) {
            return;
        }
        self.bounds.set_fc(v, msg.sender, vector.to_vec());
        let k = self.id + 1;
        let falb = self.bounds.falb(v, k);
        ctx.probe(|| Probe::Falb {
            agent: self.id,
            cpa: self.cpa.clone(),
            k,
            value: v,
            bound: falb,
        });
        if falb >= self.b {
            self.assign_cpa(ctx);
        }
    }

    fn assign_cpa(&mut self, ctx: &mut Context<'_>) {
        loop {
            self.own = None;
            self.tracker.release();
            let mut chosen = None;
            while self.cursor < self.order.len() {
                let v = self.order[self.cursor];
                self.cursor += 1;
                let bound = self.cpa.cost() + self.full_lc(v) + self.h[v];
                ctx.probe(|| Probe::ValueBound {
                    agent: self.id,
                    pa: self.cpa.clone(),
                    value: v,
                    bound,
                });
                if bound < self.b {
                    chosen = Some(v);
                    break;
                }
            }
            let Some(v) = chosen else {
                self.backtrack(ctx);
                return;
            };
            let stamp = self.tracker.assign();
            self.own = Some(v);
            let mut cpa = self.cpa.clone();
            cpa.push(self.id, v, self.full_lc(v));
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
        self.own = None;
        self.tracker.release();
        let target = if self.id == 0 {
            None
        } else {
            self.backtrack_to(ctx)
        };
        match target {
            None => {
                ctx.broadcast(Timestamp::default(), Payload::Terminate);
                self.terminated = true;
            }
            Some(t) => {
                let mut pa = self.cpa.clone();
                pa.keep_below(t + 1);
                ctx.send(t, self.tracker.for_target(t), Payload::Cpa(pa));
            }
        }
    }

    fn backtrack_to(&self, ctx: &mut Context<'_>) -> Option<AgentId> {
        if ctx.probing() {
            for t in 0..self.id {
                for v in 0..self.order.len() {
                    ctx.probe(|| Probe::Falb {
                        agent: self.id,
                        cpa: self.cpa.clone(),
                        k: t,
                        value: v,
                        bound: self.bounds.falb(v, t),
                    });
                }
            }
        }
        let target = self.bounds.backtrack_target(self.id, self.b);
        let lowest_skipped = target.map_or(0, |t| t + 1);
        for t in lowest_skipped..self.id {
            ctx.probe(|| {
                let mut prefix = self.cpa.clone();
                prefix.keep_below(t);
                Probe::Skip {
                    agent: self.id,
                    target: t,
                    prefix,
                    upper: self.b,
                }
            });
        }
        target
    }
}

impl Agent for AfbBjAgent {
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
                    let vector = estimate_vector(ctx, self.id, pa, &self.h);
                    let estimate = Estimate::Prefix(vector);
                    ctx.probe(|| Probe::Estimate {
                        responder: self.id,
                        pa: pa.clone(),
                        estimate: estimate.clone(),
                    });
                    ctx.send(msg.sender, msg.stamp.clone(), Payload::FbEstimate(estimate));
                }
            }
            Payload::FbEstimate(Estimate::Prefix(vector)) => self.on_estimate(msg, vector, ctx),
            Payload::FbEstimate(Estimate::Scalar(_)) => {
                debug_assert!(false, "scalar estimates belong to the plain agent");
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
