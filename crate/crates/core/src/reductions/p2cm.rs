//! Protocol → NB-CM. Counters are protocol states; a protocol configuration `C` sits in
//! the machine as `(l_in, C)` and every other location is scratch space for one step.

use super::{ReductionError, TranslationReport};
use crate::machines::{CounterMachine, LocId};
use crate::model::{Configuration, Protocol};

/// The machine, its location to cover, and naming provenance.
#[derive(Debug, Clone)]
pub struct NbcmImage {
    pub machine: CounterMachine,
    pub target: LocId,
    pub report: TranslationReport,
}

struct Chains {
    next_aux: usize,
    locations: Vec<String>,
    transitions: Vec<(String, String, String)>,
    report: TranslationReport,
}

impl Chains {
    fn aux(&mut self, role: String) -> String {
        let name = format!("at_{}", self.next_aux);
        self.next_aux += 1;
        self.report.note(&name, role);
        self.locations.push(name.clone());
        name
    }

    /// `l_in --ops[0]--> a1 --ops[1]--> ... --ops[k-1]--> end`, with fresh intermediates.
    fn chain(&mut self, ops: Vec<String>, end: &str, role: &str) {
        let mut cur = "l_in".to_string();
        let last = ops.len() - 1;
        for (i, op) in ops.into_iter().enumerate() {
            let next = if i == last { end.to_string() } else { self.aux(format!("{role}, step {}", i + 1)) };
            self.transitions.push((cur, op, next.clone()));
            cur = next;
        }
    }
}

/// Builds the NB-CM whose location `l_f` is coverable iff `target` is coverable in `p`.
pub fn protocol_to_nbcm(p: &Protocol, target: &Configuration) -> Result<NbcmImage, ReductionError> {
    if target.is_empty() {
        return Err(ReductionError::EmptyTarget);
    }
    p.check_config(target)?;
    let q = |s| p.state_name(s);
    let mut c = Chains { next_aux: 0, locations: vec!["l_in".into()], transitions: Vec::new(), report: TranslationReport::default() };
    c.transitions.push(("l_in".into(), format!("inc {}", q(p.init())), "l_in".into()));

    for t in p.internal_transitions() {
        let role = format!("internal {} -> {}", q(t.src), q(t.dst));
        c.chain(vec![format!("dec {}", q(t.src)), format!("inc {}", q(t.dst))], "l_in", &role);
    }
    for m in 0..p.num_messages() {
        for s in p.senders_of(m) {
            for r in p.receptions_of(m) {
                let role = format!(
                    "rendez-vous on {}: {} -> {} with {} -> {}",
                    p.message_name(m),
                    q(s.src),
                    q(s.dst),
                    q(r.src),
                    q(r.dst)
                );
                let ops = vec![
                    format!("dec {}", q(s.src)),
                    format!("dec {}", q(r.src)),
                    format!("inc {}", q(s.dst)),
                    format!("inc {}", q(r.dst)),
                ];
                c.chain(ops, "l_in", &role);
            }
        }
    }
    for m in 0..p.num_messages() {
        let receivers = p.receivers(m)?;
        for s in p.senders_of(m) {
            let role = format!("unanswered {} from {} to {}", p.message_name(m), q(s.src), q(s.dst));
            let mut ops = vec![format!("dec {}", q(s.src))];
            ops.extend(receivers.iter().map(|&r| format!("nbdec {}", q(r))));
            ops.push(format!("inc {}", q(s.dst)));
            c.chain(ops, "l_in", &role);
        }
    }
    let ops: Vec<String> = target
        .iter()
        .flat_map(|(s, k)| std::iter::repeat_n(format!("dec {}", q(s)), k as usize))
        .collect();
    c.chain(ops, "l_f", "target check");
    c.locations.push("l_f".into());

    let machine = CounterMachine::builder(p.name())
        .locations(c.locations.iter().cloned())
        .counters(p.states().iter().cloned())
        .init("l_in")
        .transitions_from(c.transitions)
        .build()?;
    let target = machine.location_id("l_f")?;
    let mut report = c.report;
    report.source_size = p.num_states() + p.transitions().len();
    report.target_size = machine.locations().len() + machine.transitions().len();
    Ok(NbcmImage { machine, target, report })
}
