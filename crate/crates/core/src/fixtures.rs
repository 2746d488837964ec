//! The small reference protocols used throughout the tests and the documentation.
//!
//! The same protocols ship as `.rvp` files under `fixtures/` at the repository root.

use crate::model::Protocol;

/// Seven-state protocol with a non-blocking request on `a` and final state `q1`.
pub fn fig1() -> Protocol {
    Protocol::builder("fig1")
        .states(["q_in", "q1", "q2", "q3", "q4", "q5", "q6"])
        .init("q_in")
        .final_state("q1")
        .messages(["a", "b", "c"])
        .transition("q_in", "!a", "q5")
        .transition("q_in", "?b", "q1")
        .transition("q1", "!c", "q2")
        .transition("q5", "?a", "q3")
        .transition("q5", "?b", "q4")
        .transition("q5", "!b", "q6")
        .transition("q6", "?c", "q2")
        .build()
        .expect("fig1 is well formed")
}

/// Wait-only protocol whose abstract fixpoint keeps tokens on `q1` and `q3`.
pub fn p1() -> Protocol {
    Protocol::builder("p1")
        .states(["q_in", "q1", "q2", "q3", "q4", "q5", "q6", "q7"])
        .init("q_in")
        .final_state("q7")
        .messages(["a", "b", "c", "d"])
        .transition("q_in", "!a", "q1")
        .transition("q_in", "!b", "q1")
        .transition("q_in", "!d", "q4")
        .transition("q_in", "!c", "q5")
        .transition("q1", "?a", "q2")
        .transition("q1", "?b", "q2")
        .transition("q1", "?c", "q3")
        .transition("q3", "?a", "q2")
        .transition("q3", "?b", "q2")
        .transition("q5", "?c", "q6")
        .transition("q5", "?d", "q7")
        .build()
        .expect("p1 is well formed")
}

/// Wait-only protocol exercising the three-token rules.
pub fn p2() -> Protocol {
    Protocol::builder("p2")
        .states(["q_in", "q1", "q2", "q3", "p1", "p2", "p3", "p4"])
        .init("q_in")
        .final_state("p4")
        .messages(["a", "b", "m1", "m2", "m3"])
        .transition("q_in", "!a", "q1")
        .transition("q_in", "!b", "q2")
        .transition("q_in", "!m1", "p1")
        .transition("q_in", "!m2", "p2")
        .transition("q_in", "!m3", "p3")
        .transition("q1", "?a", "q3")
        .transition("q2", "?a", "q3")
        .transition("q2", "?b", "q3")
        .transition("p1", "?m1", "p4")
        .transition("p1", "?m3", "p4")
        .transition("p2", "?m2", "p4")
        .transition("p2", "?m3", "p4")
        .transition("p3", "?m1", "p4")
        .transition("p3", "?m2", "p4")
        .transition("p3", "?m3", "p4")
        .build()
        .expect("p2 is well formed")
}
