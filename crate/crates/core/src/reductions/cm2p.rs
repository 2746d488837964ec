//! NB-R-CM → protocol. One leader process walks the machine's locations; every other
//! process is either idle in `q_in` or stands for one unit of a counter in `one_<x>`.

use super::{NameAllocator, ReductionError, TranslationReport};
use crate::machines::{CounterMachine, CounterOp, LocId};
use crate::model::Protocol;

/// Builds the protocol whose final state (the machine location `target`) is coverable
/// iff `target` is coverable in `m`.
pub fn nbrcm_to_protocol(m: &CounterMachine, target: LocId) -> Result<(Protocol, TranslationReport), ReductionError> {
    if !m.is_test_free() {
        return Err(ReductionError::NotNbRestore("machine has zero tests".into()));
    }
    if !m.restore() {
        return Err(ReductionError::NotNbRestore("restore is off".into()));
    }
    if target >= m.locations().len() {
        return Err(ReductionError::BadTarget(target));
    }
    let mut report = TranslationReport::default();
    let mut states = NameAllocator::new(m.locations().iter().cloned());
    let mut messages = NameAllocator::default();
    let loc = |l: LocId| m.location_name(l).to_string();

    // The leader's part: machine locations plus one waiting state per blocking transition.
    let mut leader_states: Vec<String> = m.locations().to_vec();
    let mut trans: Vec<(String, String, String)> = Vec::new();
    let counters = m.counters();
    struct Gadget {
        one: String,
        qa: String,
        qd: String,
        inc: String,
        ackinc: String,
        dec: String,
        ackdec: String,
        nbdec: String,
    }
    let mut gadgets = Vec::new();
    let mut waits = Vec::new();
    for (i, t) in m.blocking().enumerate() {
        let w = states.fresh(&format!("at_{i}"));
        report.note(&w, format!("leader waiting inside {} {} -> {}", m.show_op(t.op), loc(t.src), loc(t.dst)));
        waits.push(w);
    }
    for x in counters {
        let g = Gadget {
            one: states.fresh(&format!("one_{x}")),
            qa: states.fresh(&format!("qa_{x}")),
            qd: states.fresh(&format!("qd_{x}")),
            inc: messages.fresh(&format!("inc_{x}")),
            ackinc: messages.fresh(&format!("ackinc_{x}")),
            dec: messages.fresh(&format!("dec_{x}")),
            ackdec: messages.fresh(&format!("ackdec_{x}")),
            nbdec: messages.fresh(&format!("nbdec_{x}")),
        };
        report.note(&g.one, format!("one unit of {x}"));
        report.note(&g.qa, format!("unit of {x} being added"));
        report.note(&g.qd, format!("unit of {x} being removed"));
        gadgets.push(g);
    }
    let q_in = states.fresh("q_in");
    let lead = states.fresh("lead");
    let sink = states.fresh("sink");
    let leave = messages.fresh("L");
    let enter = messages.fresh("R");
    report.note(&q_in, "idle processes");
    report.note(&lead, "leader candidate");
    report.note(&sink, "deposed leaders");

    for (t, w) in m.blocking().zip(&waits) {
        let (src, dst) = (loc(t.src), loc(t.dst));
        match t.op {
            CounterOp::Nop => trans.push((src, "tau".into(), dst)),
            CounterOp::Inc(x) => {
                trans.push((src, format!("!{}", gadgets[x].inc), w.clone()));
                trans.push((w.clone(), format!("?{}", gadgets[x].ackinc), dst));
            }
            CounterOp::Dec(x) => {
                trans.push((src, format!("!{}", gadgets[x].dec), w.clone()));
                trans.push((w.clone(), format!("?{}", gadgets[x].ackdec), dst));
            }
            CounterOp::ZeroTest(_) | CounterOp::NbDec(_) => unreachable!("filtered above"),
        }
    }
    for t in m.nonblocking() {
        let CounterOp::NbDec(x) = t.op else { unreachable!() };
        trans.push((loc(t.src), format!("!{}", gadgets[x].nbdec), loc(t.dst)));
    }
    leader_states.extend(waits.iter().cloned());

    trans.push((q_in.clone(), format!("!{leave}"), lead.clone()));
    trans.push((lead.clone(), format!("!{enter}"), loc(m.init())));
    trans.push((lead.clone(), format!("?{leave}"), sink.clone()));
    for s in &leader_states {
        trans.push((s.clone(), format!("?{leave}"), sink.clone()));
    }
    for g in &gadgets {
        trans.push((q_in.clone(), format!("?{}", g.inc), g.qa.clone()));
        trans.push((g.qa.clone(), format!("!{}", g.ackinc), g.one.clone()));
        trans.push((g.one.clone(), format!("?{}", g.dec), g.qd.clone()));
        trans.push((g.qd.clone(), format!("!{}", g.ackdec), q_in.clone()));
        trans.push((g.one.clone(), format!("?{}", g.nbdec), q_in.clone()));
        trans.push((g.qa.clone(), format!("?{enter}"), q_in.clone()));
        trans.push((g.qd.clone(), format!("?{enter}"), q_in.clone()));
    }

    let mut b = Protocol::builder(m.name()).states(leader_states);
    for g in &gadgets {
        b = b.states([&g.one, &g.qa, &g.qd].map(String::clone));
        b = b.messages([&g.inc, &g.ackinc, &g.dec, &g.ackdec, &g.nbdec].map(String::clone));
    }
    b = b.states([q_in.clone(), lead, sink]).messages([leave, enter]).init(q_in).final_state(loc(target));
    for (s, a, d) in trans {
        b = b.transition(s, a, d);
    }
    let p = b.build()?;
    report.source_size = m.locations().len() + m.transitions().len();
    report.target_size = p.num_states() + p.transitions().len();
    Ok((p, report))
}
