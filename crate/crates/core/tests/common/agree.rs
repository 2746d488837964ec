//! Verdict agreement between a source model and its image under each compiler.
//!
//! Each check returns `Err` on a genuine disagreement, `Ok(None)` when the instance was
//! out of reach of the search budget, and `Ok(Some(outcome))` otherwise.
#![allow(dead_code)]

use nbrdv_core::explore::{decide_fixed, decide_sweep, Problem, DEFAULT_BUDGET};
use nbrdv_core::machines::{cover_bounded, vas_cover_bounded, BoundedVerdict, CounterMachine, CounterOp, MachineStep};
use nbrdv_core::reductions::{nbcm_to_nbvas, nbrcm_to_protocol, protocol_to_nbcm};
use nbrdv_core::{Configuration, Protocol, Verdict};

/// Source and image verdicts of one instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Outcome {
    pub source: bool,
    pub image: bool,
}

impl Outcome {
    pub fn agrees(&self) -> bool {
        self.source == self.image
    }
}

fn yes(v: Verdict) -> bool {
    v.is_yes()
}

/// Protocol CCover versus cover of `l_f` in the image machine.
///
/// Literal comparison: explorer up to `max_n` processes against the machine with every
/// counter at most `cap`. Checked directions: a protocol cover with `n` processes gives
/// a machine cover within cap `n`; a machine cover whose run recruits `k` processes
/// (increments of the `q_in` counter) gives a protocol cover with `k` processes.
pub fn p2cm(p: &Protocol, target: &Configuration, max_n: u32, cap: u64) -> Result<Option<Outcome>, String> {
    let image = protocol_to_nbcm(p, target).map_err(|e| e.to_string())?;
    let m = &image.machine;
    let prob = Problem::CCover(target.clone());
    let mut first = None;
    for n in 1..=max_n {
        match decide_fixed(p, &prob, n, DEFAULT_BUDGET) {
            Ok(v) if v.is_yes() => {
                first = Some(n);
                break;
            }
            Ok(_) => {}
            Err(_) => return Ok(None),
        }
    }
    if let Some(n) = first {
        match cover_bounded(m, image.target, n as u64, DEFAULT_BUDGET) {
            Ok(v) if v.is_yes() => {}
            Ok(_) => return Err(format!("protocol covers with {n} processes, machine does not within cap {n}")),
            Err(_) => return Ok(None),
        }
    }
    let machine = match cover_bounded(m, image.target, cap, DEFAULT_BUDGET) {
        Ok(v) => v,
        Err(_) => return Ok(None),
    };
    if let BoundedVerdict::Yes(run) = &machine {
        let q_in = m.counter_id(p.state_name(p.init())).map_err(|e| e.to_string())?;
        let recruited = run
            .steps
            .iter()
            .filter(|(s, _)| matches!(s, MachineStep::Transition(i) if m.transitions()[*i].op == CounterOp::Inc(q_in)))
            .count() as u32;
        match decide_fixed(p, &prob, recruited.max(1), DEFAULT_BUDGET) {
            Ok(v) if v.is_yes() => {}
            Ok(_) => return Err(format!("machine run recruits {recruited} processes, protocol does not cover with them")),
            Err(_) => return Ok(None),
        }
    }
    Ok(Some(Outcome { source: first.is_some(), image: machine.is_yes() }))
}

/// Processes needed by the image protocol to replay a machine run: one leader per
/// restore plus the initial one, and one unit per counter value at the fullest point.
fn processes_for(run: &nbrdv_core::machines::MachineRun) -> u32 {
    let restores = run.steps.iter().filter(|(s, _)| *s == MachineStep::Restore).count() as u64;
    let fullest = std::iter::once(&run.start)
        .chain(run.steps.iter().map(|(_, c)| c))
        .map(|c| c.vals.iter().sum::<u64>())
        .max()
        .unwrap_or(0);
    (1 + restores + fullest) as u32
}

/// Cover of `target` in an NB-R-CM versus SCover of its image protocol.
///
/// Literal comparison: machine within `cap` against explorer sweep up to `max_n`.
/// Checked directions: a machine run yields a protocol cover with the processes the
/// run needs; a protocol cover with `n` processes yields a machine cover within `n`.
pub fn cm2p(m: &CounterMachine, target: usize, cap: u64, max_n: u32) -> Result<Option<Outcome>, String> {
    let (p, _) = nbrcm_to_protocol(m, target).map_err(|e| e.to_string())?;
    let machine = match cover_bounded(m, target, cap, DEFAULT_BUDGET) {
        Ok(v) => v,
        Err(_) => return Ok(None),
    };
    if let BoundedVerdict::Yes(run) = &machine {
        let n = processes_for(run);
        if n <= max_n + 2 {
            match decide_fixed(&p, &Problem::SCover, n, DEFAULT_BUDGET) {
                Ok(v) if v.is_yes() => {}
                Ok(_) => return Err(format!("machine run needs {n} processes, protocol does not cover with them")),
                Err(_) => return Ok(None),
            }
        }
    }
    let sweep = match decide_sweep(&p, &Problem::SCover, max_n, DEFAULT_BUDGET) {
        Ok(v) => v,
        Err(_) => return Ok(None),
    };
    if let Verdict::Yes(Some(w)) = &sweep {
        let n = w.initial.total();
        match cover_bounded(m, target, n, DEFAULT_BUDGET) {
            Ok(v) if v.is_yes() => {}
            Ok(_) => return Err(format!("protocol covers with {n} processes, machine does not within cap {n}")),
            Err(_) => return Ok(None),
        }
    }
    Ok(Some(Outcome { source: machine.is_yes(), image: yes(sweep) }))
}

/// Cover in an NB-CM versus cover in its NB-VAS image, both within `cap`.
pub fn cm2vas(m: &CounterMachine, target: usize, cap: u64) -> Result<Option<Outcome>, String> {
    let (vas, _) = nbcm_to_nbvas(m, target).map_err(|e| e.to_string())?;
    let (Ok(a), Ok(b)) = (cover_bounded(m, target, cap, DEFAULT_BUDGET), vas_cover_bounded(&vas, cap, DEFAULT_BUDGET)) else {
        return Ok(None);
    };
    let out = Outcome { source: a.is_yes(), image: b.is_yes() };
    if out.agrees() {
        Ok(Some(out))
    } else {
        Err(format!("machine says {}, NB-VAS says {}", out.source, out.image))
    }
}
