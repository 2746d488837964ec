//! Two-counter machine → wait-only protocol in which Synchro holds iff the machine halts
//! in its final location with both counters at zero.

use super::{NameAllocator, ReductionError, TranslationReport};
use crate::machines::{CounterMachine, CounterOp, LocId};
use crate::model::Protocol;

/// A two-counter machine with a designated final location that has no outgoing
/// transition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinskyMachine {
    machine: CounterMachine,
    halt: LocId,
}

impl MinskyMachine {
    pub fn new(machine: CounterMachine, halt: LocId) -> Result<Self, ReductionError> {
        let bad = |why: String| Err(ReductionError::NotMinsky(why));
        if machine.counters().len() != 2 {
            return bad(format!("{} counters", machine.counters().len()));
        }
        if machine.restore() {
            return bad("restore transitions".into());
        }
        if machine.nonblocking().next().is_some() {
            return bad("non-blocking decrements".into());
        }
        if halt >= machine.locations().len() {
            return bad(format!("final location index {halt} out of range"));
        }
        if machine.transitions().iter().any(|t| t.src == halt) {
            return bad(format!("final location {} has outgoing transitions", machine.location_name(halt)));
        }
        Ok(MinskyMachine { machine, halt })
    }

    pub fn machine(&self) -> &CounterMachine {
        &self.machine
    }

    pub fn halt(&self) -> LocId {
        self.halt
    }
}

/// Builds the protocol. The final state is the machine's final location.
pub fn minsky_to_protocol(mm: &MinskyMachine) -> Result<(Protocol, TranslationReport), ReductionError> {
    let m = &mm.machine;
    let loc = |l: LocId| m.location_name(l).to_string();
    let halt = loc(mm.halt);
    let mut report = TranslationReport::default();
    let mut states = NameAllocator::new(m.locations().iter().cloned());
    let mut messages = NameAllocator::default();

    let mut extra = Vec::new();
    let mut trans: Vec<(String, String, String)> = Vec::new();
    let fresh = |states: &mut NameAllocator, extra: &mut Vec<String>, report: &mut TranslationReport, base: &str, role: String| {
        let n = states.fresh(base);
        report.note(&n, role);
        extra.push(n.clone());
        n
    };

    let q_in = fresh(&mut states, &mut extra, &mut report, "q_in", "unassigned processes".into());
    let ctl = fresh(&mut states, &mut extra, &mut report, "ctl", "controller candidate".into());
    let ctl2 = fresh(&mut states, &mut extra, &mut report, "ctl2", "controller acknowledged".into());
    let wit = fresh(&mut states, &mut extra, &mut report, "wit", "witness candidate".into());
    let wit2 = fresh(&mut states, &mut extra, &mut report, "wit2", "witness of a started run".into());
    let sink = fresh(&mut states, &mut extra, &mut report, "sink", "deadlock".into());
    let init = messages.fresh("init");
    let ackinit = messages.fresh("ackinit");
    let w = messages.fresh("w");

    trans.push((q_in.clone(), "tau".into(), ctl.clone()));
    trans.push((q_in.clone(), format!("!{init}"), wit.clone()));
    trans.push((ctl.clone(), format!("?{init}"), ctl2.clone()));
    trans.push((ctl2.clone(), format!("!{ackinit}"), loc(m.init())));
    trans.push((wit.clone(), format!("?{ackinit}"), wit2.clone()));
    trans.push((wit2.clone(), format!("!{w}"), halt.clone()));
    trans.push((halt.clone(), format!("?{w}"), sink.clone()));

    let mut msgs = vec![init, ackinit, w];
    let mut ops = Vec::new();
    for x in m.counters() {
        let zero = fresh(&mut states, &mut extra, &mut report, &format!("zero_{x}"), format!("spare unit of {x}"));
        let qa = fresh(&mut states, &mut extra, &mut report, &format!("qa_{x}"), format!("unit of {x} being added"));
        let one = fresh(&mut states, &mut extra, &mut report, &format!("one_{x}"), format!("one unit of {x}"));
        let qd = fresh(&mut states, &mut extra, &mut report, &format!("qd_{x}"), format!("unit of {x} being removed"));
        let [inc, ackinc, dec, ackdec, zt] =
            ["inc", "ackinc", "dec", "ackdec", "zero"].map(|b| messages.fresh(&format!("{b}_{x}")));
        trans.push((q_in.clone(), "tau".into(), zero.clone()));
        trans.push((zero, format!("?{inc}"), qa.clone()));
        trans.push((qa, format!("!{ackinc}"), one.clone()));
        trans.push((one.clone(), format!("?{dec}"), qd.clone()));
        trans.push((qd, format!("!{ackdec}"), halt.clone()));
        trans.push((one, format!("?{zt}"), sink.clone()));
        msgs.extend([inc.clone(), ackinc.clone(), dec.clone(), ackdec.clone(), zt.clone()]);
        ops.push((inc, ackinc, dec, ackdec, zt));
    }

    for (i, t) in m.transitions().iter().enumerate() {
        let (src, dst) = (loc(t.src), loc(t.dst));
        match t.op {
            CounterOp::Nop => trans.push((src, "tau".into(), dst)),
            CounterOp::Inc(x) | CounterOp::Dec(x) => {
                let (send, ack) = match t.op {
                    CounterOp::Inc(_) => (&ops[x].0, &ops[x].1),
                    _ => (&ops[x].2, &ops[x].3),
                };
                let role = format!("controller inside {} {} -> {}", m.show_op(t.op), src, dst);
                let mid = fresh(&mut states, &mut extra, &mut report, &format!("at_{i}"), role);
                trans.push((src, format!("!{send}"), mid.clone()));
                trans.push((mid, format!("?{ack}"), dst));
            }
            CounterOp::ZeroTest(x) => trans.push((src, format!("!{}", ops[x].4), dst)),
            CounterOp::NbDec(_) => unreachable!("rejected by MinskyMachine::new"),
        }
    }

    let mut b = Protocol::builder(m.name())
        .states(m.locations().iter().cloned())
        .states(extra)
        .messages(msgs)
        .init(q_in)
        .final_state(halt);
    for (s, a, d) in trans {
        b = b.transition(s, a, d);
    }
    let p = b.build()?;
    report.source_size = m.locations().len() + m.transitions().len();
    report.target_size = p.num_states() + p.transitions().len();
    Ok((p, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explore::{decide_fixed, Problem, DEFAULT_BUDGET};
    use crate::waitonly::partition;

    fn inc_dec() -> MinskyMachine {
        let m = CounterMachine::builder("m")
            .locations(["l0", "l1", "lf"])
            .counters(["x1", "x2"])
            .init("l0")
            .transition("l0", "inc x1", "l1")
            .transition("l1", "dec x1", "lf")
            .build()
            .unwrap();
        MinskyMachine::new(m, 2).unwrap()
    }

    #[test]
    fn output_is_wait_only() {
        let (p, _) = minsky_to_protocol(&inc_dec()).unwrap();
        assert!(partition(&p).is_ok());
    }

    #[test]
    fn halting_run_synchronises_three() {
        let (p, _) = minsky_to_protocol(&inc_dec()).unwrap();
        let v = decide_fixed(&p, &Problem::Synchro, 3, DEFAULT_BUDGET).unwrap();
        let crate::Verdict::Yes(Some(w)) = v else { panic!("expected a witness") };
        assert!(w.replays(&p));
    }

    #[test]
    fn rejects_non_minsky() {
        let m = CounterMachine::builder("m").locations(["l"]).counter("x").init("l").build().unwrap();
        assert!(MinskyMachine::new(m, 0).is_err());
        let m = inc_dec().machine().clone();
        assert!(MinskyMachine::new(m, 1).is_err());
    }
}
