//! Synchronous branch and bound: a single CPA walks the agent order.

use crate::assignment::PartialAssignment;
use crate::bounds::local_cost;
use crate::kernel::{Agent, Context, Message, Payload, Probe};
use crate::model::{AgentId, Cost, Value};
use crate::timestamp::Timestamp;

pub struct SbbAgent {
    id: AgentId,
    n: usize,
    domain_size: usize,
    b: Cost,
    best: Option<PartialAssignment>,
    cpa: PartialAssignment,
    next_value: Value,
    terminated: bool,
}

impl SbbAgent {
    pub fn new(id: AgentId, n: usize, domain_size: usize) -> Self {
        Self {
            id,
            n,
            domain_size,
            b: Cost::MAX,
            best: None,
            cpa: PartialAssignment::new(),
            next_value: 0,
            terminated: false,
        }
    }

    fn stamp(&self) -> Timestamp {
        Timestamp::zeros(self.n)
    }

    fn assign(&mut self, ctx: &mut Context<'_>) {
        while self.next_value < self.domain_size {
            let v = self.next_value;
            self.next_value += 1;
            let lc = local_cost(ctx, self.id, v, &self.cpa);
            let bound = self.cpa.cost() + lc;
            ctx.probe(|| Probe::ValueBound {
                agent: self.id,
                pa: self.cpa.clone(),
                value: v,
                bound,
            });
            if bound >= self.b {
                continue;
            }
            let mut cpa = self.cpa.clone();
            cpa.push(self.id, v, lc);
            ctx.record_cpa(&cpa);
            if self.id + 1 == self.n {
                self.b = cpa.cost();
                ctx.broadcast(self.stamp(), Payload::NewSolution(cpa.clone()));
                self.best = Some(cpa);
                continue;
            }
            ctx.send(self.id + 1, self.stamp(), Payload::Cpa(cpa));
            return;
        }
        if self.id == 0 {
            ctx.broadcast(self.stamp(), Payload::Terminate);
            self.terminated = true;
        } else {
            ctx.send(self.id - 1, self.stamp(), Payload::Cpa(self.cpa.clone()));
        }
    }
}

impl Agent for SbbAgent {
    fn init(&mut self, ctx: &mut Context<'_>) {
        if self.id == 0 {
            self.assign(ctx);
        }
    }

    fn handle(&mut self, msg: &Message, ctx: &mut Context<'_>) {
        if self.terminated {
            return;
        }
        match &msg.payload {
            Payload::Cpa(pa) => {
                let mut held = pa.clone();
                held.keep_below(self.id);
                if msg.sender < self.id {
                    self.next_value = 0;
                }
                self.cpa = held;
                self.assign(ctx);
            }
            Payload::NewSolution(pa) => {
                if pa.cost() < self.b {
                    self.b = pa.cost();
                    self.best = Some(pa.clone());
                }
            }
            Payload::Terminate => self.terminated = true,
            Payload::FbCpa(_) | Payload::FbEstimate(_) => {
                debug_assert!(false, "no forward bounding in the synchronous baseline");
            }
        }
    }

    fn is_terminated(&self) -> bool {
        self.terminated
    }

    fn best(&self) -> Option<&PartialAssignment> {
        self.best.as_ref()
    }
}
