//! NB-CM → NB-VAS: one coordinate per location (holding exactly one token) followed by
//! one coordinate per counter.

use super::{NameAllocator, ReductionError, TranslationReport};
use crate::machines::{CounterMachine, CounterOp, LocId, MachineTransition, Vas, VasTransition};

/// Replaces every self-loop `(l, op, l)` by `(l, op, l') (l', nop, l)` through a fresh `l'`.
/// Restore transitions are made explicit first, and the result has restore off.
pub fn split_self_loops(m: &CounterMachine) -> (CounterMachine, Vec<(String, String)>) {
    let mut names = NameAllocator::new(m.locations().iter().cloned());
    let mut locations = m.locations().to_vec();
    let mut notes = Vec::new();
    let mut ts: Vec<MachineTransition> = m.transitions().to_vec();
    if m.restore() {
        for l in 0..locations.len() {
            let t = MachineTransition { src: l, op: CounterOp::Nop, dst: m.init() };
            if l != m.init() && !ts.contains(&t) {
                ts.push(t);
            }
        }
    }
    let mut out = Vec::with_capacity(ts.len());
    for t in ts {
        if t.src != t.dst {
            out.push(t);
            continue;
        }
        let fresh = names.fresh(&format!("at_{}", notes.len()));
        notes.push((fresh.clone(), format!("loop {} on {}", m.show_op(t.op), m.location_name(t.src))));
        let mid = locations.len();
        locations.push(fresh);
        out.push(MachineTransition { src: t.src, op: t.op, dst: mid });
        out.push(MachineTransition { src: mid, op: CounterOp::Nop, dst: t.src });
    }
    let machine =
        CounterMachine::assemble(m.name().to_string(), locations, m.counters().to_vec(), m.init(), out, false);
    (machine, notes)
}

/// Builds the NB-VAS whose target vector is coverable iff `target` is coverable in `m`.
pub fn nbcm_to_nbvas(m: &CounterMachine, target: LocId) -> Result<(Vas, TranslationReport), ReductionError> {
    if let Some(t) = m.transitions().iter().find(|t| matches!(t.op, CounterOp::ZeroTest(_))) {
        return Err(ReductionError::HasZeroTest(format!(
            "{} {} {}",
            m.location_name(t.src),
            m.show_op(t.op),
            m.location_name(t.dst)
        )));
    }
    if target >= m.locations().len() {
        return Err(ReductionError::BadTarget(target));
    }
    let (flat, notes) = split_self_loops(m);
    let nloc = flat.locations().len();
    let dim = nloc + flat.counters().len();
    let mut transitions = Vec::new();
    for t in flat.transitions() {
        let mut block = vec![0i64; dim];
        let mut nb = vec![0u64; dim];
        block[t.src] -= 1;
        block[t.dst] += 1;
        match t.op {
            CounterOp::Nop => {}
            CounterOp::Inc(x) => block[nloc + x] += 1,
            CounterOp::Dec(x) => block[nloc + x] -= 1,
            CounterOp::NbDec(x) => nb[nloc + x] += 1,
            CounterOp::ZeroTest(_) => unreachable!("rejected above"),
        }
        transitions.push(VasTransition { block, nb });
    }
    let mut init = vec![0; dim];
    init[flat.init()] = 1;
    let mut goal = vec![0; dim];
    goal[target] = 1;
    let vas = Vas::new(m.name(), dim, transitions, init, goal)?;

    let mut report = TranslationReport { names: notes, ..Default::default() };
    for (i, l) in flat.locations().iter().enumerate() {
        report.note(&format!("#{i}"), format!("location {l}"));
    }
    for (i, x) in flat.counters().iter().enumerate() {
        report.note(&format!("#{}", nloc + i), format!("counter {x}"));
    }
    report.source_size = m.locations().len() + m.transitions().len();
    report.target_size = vas.dim + vas.transitions.len();
    Ok((vas, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nbdec_goes_to_nb_part() {
        let m = CounterMachine::builder("m")
            .locations(["l1", "l2"])
            .counter("x")
            .init("l1")
            .transition("l1", "nbdec x", "l2")
            .transition("l1", "nop", "l2")
            .build()
            .unwrap();
        let (v, _) = nbcm_to_nbvas(&m, 1).unwrap();
        assert_eq!(v.dim, 3);
        assert_eq!(v.transitions[0], VasTransition { block: vec![-1, 1, 0], nb: vec![0, 0, 1] });
        assert_eq!(v.transitions[1], VasTransition { block: vec![-1, 1, 0], nb: vec![0, 0, 0] });
        assert_eq!(v.init, vec![1, 0, 0]);
        assert_eq!(v.target, vec![0, 1, 0]);
    }

    #[test]
    fn self_loops_are_split() {
        let m = CounterMachine::builder("m")
            .locations(["l"])
            .counter("x")
            .init("l")
            .transition("l", "inc x", "l")
            .build()
            .unwrap();
        let (v, r) = nbcm_to_nbvas(&m, 0).unwrap();
        assert_eq!(v.dim, 3);
        assert_eq!(v.transitions.len(), 2);
        assert_eq!(v.transitions[0].block, vec![-1, 1, 1]);
        assert_eq!(v.transitions[1].block, vec![1, -1, 0]);
        assert_eq!(r.names[0].0, "at_0");
    }

    #[test]
    fn zero_test_rejected() {
        let m = CounterMachine::builder("m")
            .locations(["l", "k"])
            .counter("x")
            .init("l")
            .transition("l", "zero? x", "k")
            .build()
            .unwrap();
        assert!(matches!(nbcm_to_nbvas(&m, 1), Err(ReductionError::HasZeroTest(_))));
    }
}
