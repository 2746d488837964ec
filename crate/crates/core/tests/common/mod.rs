//! Random instance generators shared by the property and acceptance suites.
//! Every generator is driven by a seed so failures can be replayed.
#![allow(dead_code)]

pub mod agree;

use nbrdv_core::machines::CounterMachine;
use nbrdv_core::{Configuration, Protocol};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn state_names(n: usize) -> Vec<String> {
    std::iter::once("q_in".to_string()).chain((1..n).map(|i| format!("q{i}"))).collect()
}

fn message_names(k: usize) -> Vec<String> {
    (0..k).map(|i| format!("m{i}")).collect()
}

/// Shape limits for random protocols.
#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub max_states: usize,
    pub max_messages: usize,
    pub max_transitions: usize,
}

pub const SMALL: Shape = Shape { max_states: 6, max_messages: 3, max_transitions: 12 };

/// Any protocol: each transition picks its action uniformly.
pub fn protocol(seed: u64, shape: Shape) -> Protocol {
    let mut r = rng(seed);
    let n = r.gen_range(2..=shape.max_states);
    let k = r.gen_range(1..=shape.max_messages);
    let states = state_names(n);
    let msgs = message_names(k);
    let mut b = Protocol::builder(format!("rnd{seed}"))
        .states(states.clone())
        .messages(msgs.clone())
        .init("q_in")
        .final_state(states[r.gen_range(1..n)].clone());
    for _ in 0..r.gen_range(1..=shape.max_transitions) {
        let act = match r.gen_range(0..3) {
            0 => "tau".to_string(),
            1 => format!("!{}", msgs[r.gen_range(0..k)]),
            _ => format!("?{}", msgs[r.gen_range(0..k)]),
        };
        b = b.transition(states[r.gen_range(0..n)].clone(), act, states[r.gen_range(0..n)].clone());
    }
    b.build().expect("generated protocol is well formed")
}

/// A wait-only protocol: `q_in` and a random subset of states only act, the others
/// only receive.
pub fn wait_only(seed: u64, shape: Shape) -> Protocol {
    let mut r = rng(seed);
    let n = r.gen_range(2..=shape.max_states);
    let k = r.gen_range(1..=shape.max_messages);
    let states = state_names(n);
    let msgs = message_names(k);
    let waiting: Vec<bool> = (0..n).map(|q| q != 0 && r.gen_bool(0.5)).collect();
    let mut b = Protocol::builder(format!("wo{seed}"))
        .states(states.clone())
        .messages(msgs.clone())
        .init("q_in")
        .final_state(states[r.gen_range(1..n)].clone());
    for _ in 0..r.gen_range(1..=shape.max_transitions) {
        let src = r.gen_range(0..n);
        let m = &msgs[r.gen_range(0..k)];
        let act = if waiting[src] {
            format!("?{m}")
        } else if r.gen_bool(0.25) {
            "tau".to_string()
        } else {
            format!("!{m}")
        };
        b = b.transition(states[src].clone(), act, states[r.gen_range(0..n)].clone());
    }
    b.build().expect("generated protocol is well formed")
}

/// A non-empty configuration with `total` processes spread at random.
pub fn config(r: &mut StdRng, p: &Protocol, total: u32) -> Configuration {
    let mut c = Configuration::empty();
    for _ in 0..total {
        c.add(r.gen_range(0..p.num_states()), 1);
    }
    c
}

/// A small CCover target with one to three processes.
pub fn target(r: &mut StdRng, p: &Protocol) -> Configuration {
    let k = r.gen_range(1..=3);
    config(r, p, k)
}

/// A counter machine with the given operations enabled.
pub fn machine(seed: u64, max_locs: usize, max_counters: usize, max_trans: usize, ops: &[&str], restore: bool) -> CounterMachine {
    let mut r = rng(seed);
    let nl = r.gen_range(2..=max_locs);
    let nc = r.gen_range(1..=max_counters);
    let locs: Vec<String> = (0..nl).map(|i| format!("l{i}")).collect();
    let ctrs: Vec<String> = (0..nc).map(|i| format!("x{i}")).collect();
    let mut b = CounterMachine::builder(format!("cm{seed}"))
        .locations(locs.clone())
        .counters(ctrs.clone())
        .init("l0")
        .restore(restore);
    for _ in 0..r.gen_range(1..=max_trans) {
        let op = ops[r.gen_range(0..ops.len())];
        let op = if op == "nop" { op.to_string() } else { format!("{op} {}", ctrs[r.gen_range(0..nc)]) };
        b = b.transition(locs[r.gen_range(0..nl)].clone(), op, locs[r.gen_range(0..nl)].clone());
    }
    b.build().expect("generated machine is well formed")
}
