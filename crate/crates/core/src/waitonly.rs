//! Polynomial-time coverability for wait-only protocols.
//!
//! Reachable configurations are over-approximated by an abstract set `(S, Toks)`:
//! states of `S` can host arbitrarily many processes, while a token `(q, m)` says that
//! waiting state `q` can host one process whose last request was `m`. The operator
//! [`apply_f`] is iterated from `({q_in}, ∅)` to a fixpoint, and a configuration is
//! coverable iff it belongs to the interpretation of that fixpoint.

use std::collections::{BTreeSet, VecDeque};

use crate::explore::Verdict;
use crate::model::{Action, Configuration, ModelError, MsgId, Protocol, StateId};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WaitOnlyError {
    #[error("protocol is not wait-only at state `{state}`: {}", evidence.join(", "))]
    NotWaitOnly { state: String, evidence: Vec<String> },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("fixpoint not reached within {bound} iterations")]
    BoundExceeded { bound: usize },
}

/// Split of the states into active (no receptions) and waiting (receptions only) states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WaitPartition {
    pub active: BTreeSet<StateId>,
    pub waiting: BTreeSet<StateId>,
}

/// Computes the unique active/waiting partition, or explains why none exists.
pub fn partition(p: &Protocol) -> Result<WaitPartition, WaitOnlyError> {
    let n = p.num_states();
    let mut receives = vec![Vec::new(); n];
    let mut acts = vec![Vec::new(); n];
    for t in p.transitions() {
        match t.action {
            Action::Recv(_) => receives[t.src].push(*t),
            _ => acts[t.src].push(*t),
        }
    }
    let show = |t: &crate::model::Transition| {
        format!("{} {} {}", p.state_name(t.src), p.show_action(t.action), p.state_name(t.dst))
    };
    let mut out = WaitPartition { active: BTreeSet::new(), waiting: BTreeSet::new() };
    for q in 0..n {
        if receives[q].is_empty() {
            out.active.insert(q);
        } else if !acts[q].is_empty() || q == p.init() {
            let evidence = receives[q].iter().chain(acts[q].iter()).map(show).collect();
            return Err(WaitOnlyError::NotWaitOnly { state: p.state_name(q).to_string(), evidence });
        } else {
            out.waiting.insert(q);
        }
    }
    Ok(out)
}

/// A waiting state together with the last message its process requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Token {
    pub state: StateId,
    pub message: MsgId,
}

impl Token {
    pub fn new(state: StateId, message: MsgId) -> Self {
        Token { state, message }
    }
}

/// An abstract set of configurations `(S, Toks)`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct AbstractSet {
    pub s: BTreeSet<StateId>,
    pub toks: BTreeSet<Token>,
}

impl AbstractSet {
    /// `({q_in}, ∅)`.
    pub fn initial(p: &Protocol) -> Self {
        AbstractSet { s: [p.init()].into(), toks: BTreeSet::new() }
    }

    /// Builds an abstract set, rejecting tokens whose state is also in `S`.
    pub fn new(s: BTreeSet<StateId>, toks: BTreeSet<Token>) -> Result<Self, WaitOnlyError> {
        if let Some(t) = toks.iter().find(|t| s.contains(&t.state)) {
            return Err(WaitOnlyError::Precondition(format!(
                "token state #{} also belongs to S",
                t.state
            )));
        }
        Ok(AbstractSet { s, toks })
    }

    /// `st(Toks)`.
    pub fn token_states(&self) -> BTreeSet<StateId> {
        self.toks.iter().map(|t| t.state).collect()
    }

    fn tokens_of(&self, q: StateId) -> impl Iterator<Item = MsgId> + '_ {
        self.toks.iter().filter(move |t| t.state == q).map(|t| t.message)
    }

    /// Renders `S = {…}` and `Toks = {(q,m),…}` with names in lexicographic order.
    pub fn show(&self, p: &Protocol) -> (String, String) {
        let mut s: Vec<&str> = self.s.iter().map(|&q| p.state_name(q)).collect();
        s.sort_unstable();
        let mut toks: Vec<(&str, &str)> =
            self.toks.iter().map(|t| (p.state_name(t.state), p.message_name(t.message))).collect();
        toks.sort_unstable();
        let toks: Vec<String> = toks.into_iter().map(|(q, m)| format!("({q},{m})")).collect();
        (format!("S = {{{}}}", s.join(", ")), format!("Toks = {{{}}}", toks.join(", ")))
    }
}

fn conflict_free_unchecked(g: &AbstractSet, p: &Protocol, q1: StateId, q2: StateId) -> bool {
    g.tokens_of(q1).any(|m1| {
        g.tokens_of(q2)
            .any(|m2| m1 != m2 && !p.can_receive(q2, m1) && !p.can_receive(q1, m2))
    })
}

/// Two distinct token states can be occupied together: some pair of their tokens
/// carries different messages that neither state can receive from the other.
pub fn conflict_free(g: &AbstractSet, p: &Protocol, q1: StateId, q2: StateId) -> Result<bool, WaitOnlyError> {
    if q1 == q2 {
        return Err(WaitOnlyError::Precondition("conflict-freedom needs two distinct states".into()));
    }
    let st = g.token_states();
    if !st.contains(&q1) || !st.contains(&q2) {
        return Err(WaitOnlyError::Precondition("both states must carry tokens".into()));
    }
    Ok(conflict_free_unchecked(g, p, q1, q2))
}

/// Membership of `c` in the interpretation of `g`.
pub fn interp_contains(g: &AbstractSet, p: &Protocol, c: &Configuration) -> bool {
    let st = g.token_states();
    let mut single = Vec::new();
    for (q, k) in c.iter() {
        if g.s.contains(&q) {
            continue;
        }
        if !st.contains(&q) || k != 1 {
            return false;
        }
        single.push(q);
    }
    single.iter().enumerate().all(|(i, &a)| {
        single[i + 1..].iter().all(|&b| conflict_free_unchecked(g, p, a, b))
    })
}

/// Messages requested by some send transition leaving `S`.
fn sendable_from(p: &Protocol, s: &BTreeSet<StateId>) -> Vec<bool> {
    (0..p.num_messages())
        .map(|m| p.senders_of(m).iter().any(|t| s.contains(&t.src)))
        .collect()
}

/// Consistency: every token is justified by a path fed from `S`, and every pair of
/// tokens has symmetric cross-receptions.
pub fn is_consistent(g: &AbstractSet, p: &Protocol) -> bool {
    let sendable = sendable_from(p, &g.s);
    for tok in &g.toks {
        let mut seen = vec![false; p.num_states()];
        let mut queue: VecDeque<StateId> = p
            .senders_of(tok.message)
            .iter()
            .filter(|t| g.s.contains(&t.src))
            .map(|t| t.dst)
            .collect();
        for &q in &queue {
            seen[q] = true;
        }
        while let Some(q) = queue.pop_front() {
            for t in p.transitions() {
                if let Action::Recv(m) = t.action {
                    if t.src == q && sendable[m] && !seen[t.dst] {
                        seen[t.dst] = true;
                        queue.push_back(t.dst);
                    }
                }
            }
        }
        if !seen[tok.state] {
            return false;
        }
    }
    let toks: Vec<Token> = g.toks.iter().copied().collect();
    for (i, a) in toks.iter().enumerate() {
        for b in &toks[i + 1..] {
            let forward = p.can_receive(b.state, a.message);
            let backward = p.can_receive(a.state, b.message);
            if forward != backward {
                return false;
            }
        }
    }
    true
}

/// First stage of the operator: the intermediate sets `(S'', Toks'')`.
///
/// Every premise only mentions the input `(S, Toks)`, so one pass over the rules
/// yields the least sets.
pub fn intermediate(g: &AbstractSet, p: &Protocol) -> (BTreeSet<StateId>, BTreeSet<Token>) {
    let sendable = sendable_from(p, &g.s);
    let received_in_s: Vec<bool> = (0..p.num_messages())
        .map(|m| p.receptions_of(m).iter().any(|t| g.s.contains(&t.src)))
        .collect();
    let mut s2 = g.s.clone();
    let mut t2 = g.toks.clone();
    for t in p.transitions() {
        match t.action {
            Action::Tau => {
                if g.s.contains(&t.src) {
                    s2.insert(t.dst);
                }
            }
            Action::Send(a) => {
                if g.s.contains(&t.src) {
                    if !p.can_receive(t.dst, a) || received_in_s[a] {
                        s2.insert(t.dst);
                    } else {
                        t2.insert(Token::new(t.dst, a));
                    }
                }
            }
            Action::Recv(a) => {
                if !sendable[a] {
                    continue;
                }
                if g.s.contains(&t.src) || g.toks.contains(&Token::new(t.src, a)) {
                    s2.insert(t.dst);
                }
                for m in g.tokens_of(t.src).filter(|&m| m != a) {
                    if p.can_receive(t.dst, m) {
                        t2.insert(Token::new(t.dst, m));
                    } else {
                        s2.insert(t.dst);
                    }
                }
            }
        }
    }
    (s2, t2)
}

/// Second stage: states of token pairs and triples that can in fact be refilled
/// without bound are promoted to `S'`.
fn promote(p: &Protocol, s2: &BTreeSet<StateId>, t2: &BTreeSet<Token>) -> BTreeSet<StateId> {
    let rec = |q: StateId, m: MsgId| p.can_receive(q, m);
    let toks: Vec<Token> = t2.iter().copied().collect();
    let mut s1 = s2.clone();
    for a in &toks {
        for b in &toks {
            if a.message != b.message && !rec(a.state, b.message) && rec(b.state, a.message) {
                s1.insert(a.state);
            }
        }
    }
    for a in &toks {
        for t in p.receptions_of(a.message) {
            // (q2, ?m1, q3) with tokens (q2, m2) and (q3, m2), m2 ≠ m1.
            let refill = toks.iter().any(|b| {
                b.state == t.src && b.message != a.message && t2.contains(&Token::new(t.dst, b.message))
            });
            if refill {
                s1.insert(a.state);
            }
        }
    }
    for a in &toks {
        for b in &toks {
            if a.message == b.message || rec(b.state, a.message) || rec(a.state, b.message) {
                continue;
            }
            for c in &toks {
                if c.message != a.message
                    && c.message != b.message
                    && rec(c.state, a.message)
                    && rec(c.state, b.message)
                    && rec(b.state, c.message)
                    && rec(a.state, c.message)
                {
                    s1.insert(a.state);
                }
            }
        }
    }
    s1
}

/// One application of the abstract post operator.
pub fn apply_f(g: &AbstractSet, p: &Protocol) -> AbstractSet {
    debug_assert!(is_consistent(g, p), "abstract post applied to an inconsistent set");
    let (s2, t2) = intermediate(g, p);
    let s1 = promote(p, &s2, &t2);
    let toks = t2.into_iter().filter(|t| !s1.contains(&t.state)).collect();
    AbstractSet { s: s1, toks }
}

/// Upper bound on the number of productive iterations.
pub fn iteration_bound(p: &Protocol) -> usize {
    let q = p.num_states();
    (q * q * p.num_messages()).max(q)
}

/// Iterates [`apply_f`] from `({q_in}, ∅)` until it stabilises.
///
/// Returns the fixpoint and the whole chain `γ_0, γ_1, …, γ_f` (the last element
/// repeated once is not included).
pub fn fixpoint(p: &Protocol) -> Result<(AbstractSet, Vec<AbstractSet>), WaitOnlyError> {
    partition(p)?;
    let bound = iteration_bound(p);
    let mut trace = vec![AbstractSet::initial(p)];
    loop {
        let cur = trace.last().expect("trace is never empty");
        let next = apply_f(cur, p);
        if &next == cur {
            break;
        }
        if trace.len() > bound {
            return Err(WaitOnlyError::BoundExceeded { bound });
        }
        trace.push(next);
    }
    Ok((trace.last().cloned().expect("trace is never empty"), trace))
}

/// Exact CCover for wait-only protocols. No witness is attached to positive answers.
pub fn decide_ccover(p: &Protocol, target: &Configuration) -> Result<Verdict, WaitOnlyError> {
    p.check_config(target)?;
    let (gf, _) = fixpoint(p)?;
    Ok(if interp_contains(&gf, p, target) { Verdict::Yes(None) } else { Verdict::No })
}

/// Exact SCover for wait-only protocols.
pub fn decide_scover(p: &Protocol) -> Result<Verdict, WaitOnlyError> {
    decide_ccover(p, &Configuration::singleton(p.final_state(), 1))
}
