//! Protocols, configurations and the one-step non-blocking rendez-vous semantics.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::ident::is_identifier;

/// Index of a state inside its protocol.
pub type StateId = usize;
/// Index of a message inside its protocol alphabet.
pub type MsgId = usize;

/// Errors raised while building protocols or interpreting configurations.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("invalid identifier `{0}`")]
    InvalidIdentifier(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown message `{0}`")]
    UnknownMessage(String),
    #[error("state `{0}` declared twice")]
    DuplicateState(String),
    #[error("message `{0}` declared twice")]
    DuplicateMessage(String),
    #[error("protocol has no states")]
    NoStates,
    #[error("initial state not set")]
    MissingInit,
    #[error("final state not set")]
    MissingFinal,
    #[error("malformed action `{0}` (expected tau, !m or ?m)")]
    BadAction(String),
    #[error("configuration is empty")]
    EmptyConfiguration,
    #[error("state index {0} is out of range")]
    StateOutOfRange(StateId),
    #[error("message index {0} is out of range")]
    MessageOutOfRange(MsgId),
}

/// A protocol primitive: internal move, request `!m`, or reception `?m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Tau,
    Send(MsgId),
    Recv(MsgId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transition {
    pub src: StateId,
    pub action: Action,
    pub dst: StateId,
}

/// Label of a configuration step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StepLabel {
    Internal,
    Rendezvous(MsgId),
    NonBlocking(MsgId),
}

/// Which step rules are active. `Classical` drops the non-blocking request rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Semantics {
    #[default]
    NonBlocking,
    Classical,
}

/// A finite rendez-vous protocol `(Q, Σ, q_in, q_f, T)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Protocol {
    name: String,
    states: Vec<String>,
    messages: Vec<String>,
    init: StateId,
    final_state: StateId,
    transitions: Vec<Transition>,
    state_index: HashMap<String, StateId>,
    msg_index: HashMap<String, MsgId>,
    /// Row-major `|Q| x |Σ|` table of `m ∈ Rec(q)`.
    rec: Vec<bool>,
    sends: Vec<Vec<Transition>>,
    recvs: Vec<Vec<Transition>>,
    taus: Vec<Transition>,
}

impl Protocol {
    pub fn builder(name: impl Into<String>) -> ProtocolBuilder {
        ProtocolBuilder::new(name)
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn states(&self) -> &[String] {
        &self.states
    }
    pub fn messages(&self) -> &[String] {
        &self.messages
    }
    pub fn init(&self) -> StateId {
        self.init
    }
    pub fn final_state(&self) -> StateId {
        self.final_state
    }
    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }
    pub fn num_states(&self) -> usize {
        self.states.len()
    }
    pub fn num_messages(&self) -> usize {
        self.messages.len()
    }
    pub fn state_name(&self, q: StateId) -> &str {
        &self.states[q]
    }
    pub fn message_name(&self, m: MsgId) -> &str {
        &self.messages[m]
    }

    pub fn state_id(&self, name: &str) -> Result<StateId, ModelError> {
        self.state_index
            .get(name)
            .copied()
            .ok_or_else(|| ModelError::UnknownState(name.to_string()))
    }

    pub fn message_id(&self, name: &str) -> Result<MsgId, ModelError> {
        self.msg_index
            .get(name)
            .copied()
            .ok_or_else(|| ModelError::UnknownMessage(name.to_string()))
    }

    /// Same protocol with another final state.
    pub fn with_final(&self, q_f: StateId) -> Result<Protocol, ModelError> {
        if q_f >= self.states.len() {
            return Err(ModelError::StateOutOfRange(q_f));
        }
        let mut p = self.clone();
        p.final_state = q_f;
        Ok(p)
    }

    /// Whether `m ∈ Rec(q)`; both indices must be in range.
    #[inline]
    pub fn can_receive(&self, q: StateId, m: MsgId) -> bool {
        self.rec[q * self.messages.len() + m]
    }

    /// States that have a reception of `m`.
    pub fn receivers(&self, m: MsgId) -> Result<BTreeSet<StateId>, ModelError> {
        if m >= self.messages.len() {
            return Err(ModelError::MessageOutOfRange(m));
        }
        Ok(self.recvs[m].iter().map(|t| t.src).collect())
    }

    /// Messages receivable in state `q`.
    pub fn receivable(&self, q: StateId) -> Result<BTreeSet<MsgId>, ModelError> {
        if q >= self.states.len() {
            return Err(ModelError::StateOutOfRange(q));
        }
        Ok((0..self.messages.len()).filter(|&m| self.can_receive(q, m)).collect())
    }

    /// Send transitions on `m`.
    pub fn senders_of(&self, m: MsgId) -> &[Transition] {
        &self.sends[m]
    }

    /// Receive transitions on `m`.
    pub fn receptions_of(&self, m: MsgId) -> &[Transition] {
        &self.recvs[m]
    }

    pub fn internal_transitions(&self) -> &[Transition] {
        &self.taus
    }

    /// Check that a configuration only mentions states of this protocol.
    pub fn check_config(&self, c: &Configuration) -> Result<(), ModelError> {
        if c.is_empty() {
            return Err(ModelError::EmptyConfiguration);
        }
        match c.iter().find(|&(q, _)| q >= self.states.len()) {
            Some((q, _)) => Err(ModelError::StateOutOfRange(q)),
            None => Ok(()),
        }
    }

    /// Configuration with `n` processes on the initial state.
    pub fn initial_config(&self, n: u32) -> Configuration {
        Configuration::singleton(self.init, n)
    }

    /// Renders a configuration literal such as `q1:2,q5`.
    pub fn show_config(&self, c: &Configuration) -> String {
        let mut out = String::new();
        for (i, (q, k)) in c.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&self.states[q]);
            if k > 1 {
                out.push(':');
                out.push_str(&k.to_string());
            }
        }
        out
    }

    pub fn show_label(&self, l: StepLabel) -> String {
        match l {
            StepLabel::Internal => "tau".to_string(),
            StepLabel::Rendezvous(m) => format!("msg:{}", self.messages[m]),
            StepLabel::NonBlocking(m) => format!("nb:{}", self.messages[m]),
        }
    }

    pub fn show_action(&self, a: Action) -> String {
        match a {
            Action::Tau => "tau".to_string(),
            Action::Send(m) => format!("!{}", self.messages[m]),
            Action::Recv(m) => format!("?{}", self.messages[m]),
        }
    }

    /// One-step successors under the non-blocking semantics.
    pub fn successors(&self, c: &Configuration) -> Result<Vec<(StepLabel, Configuration)>, ModelError> {
        self.successors_with(c, Semantics::NonBlocking)
    }

    /// One-step successors, deduplicated on `(label, configuration)` and sorted.
    pub fn successors_with(
        &self,
        c: &Configuration,
        sem: Semantics,
    ) -> Result<Vec<(StepLabel, Configuration)>, ModelError> {
        self.check_config(c)?;
        let mut out = BTreeSet::new();
        for t in &self.taus {
            if c.get(t.src) > 0 {
                out.insert((StepLabel::Internal, c.moved(t.src, t.dst)));
            }
        }
        for m in 0..self.messages.len() {
            for s in &self.sends[m] {
                let here = c.get(s.src);
                if here == 0 {
                    continue;
                }
                let mut blocked = false;
                for r in &self.recvs[m] {
                    let there = c.get(r.src);
                    let available = if r.src == s.src { there - 1 } else { there };
                    if available > 0 {
                        blocked = true;
                        let next = c.moved(s.src, s.dst).moved(r.src, r.dst);
                        out.insert((StepLabel::Rendezvous(m), next));
                    }
                }
                if !blocked && sem == Semantics::NonBlocking {
                    out.insert((StepLabel::NonBlocking(m), c.moved(s.src, s.dst)));
                }
            }
        }
        Ok(out.into_iter().collect())
    }
}

/// Incremental constructor for [`Protocol`], working with names.
#[derive(Debug, Clone)]
pub struct ProtocolBuilder {
    name: String,
    states: Vec<String>,
    messages: Vec<String>,
    init: Option<String>,
    final_state: Option<String>,
    transitions: Vec<(String, String, String)>,
}

impl ProtocolBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        ProtocolBuilder {
            name: name.into(),
            states: Vec::new(),
            messages: Vec::new(),
            init: None,
            final_state: None,
            transitions: Vec::new(),
        }
    }

    pub fn state(mut self, q: impl Into<String>) -> Self {
        self.states.push(q.into());
        self
    }

    pub fn states<I, S>(mut self, qs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.states.extend(qs.into_iter().map(Into::into));
        self
    }

    pub fn message(mut self, m: impl Into<String>) -> Self {
        self.messages.push(m.into());
        self
    }

    pub fn messages<I, S>(mut self, ms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.messages.extend(ms.into_iter().map(Into::into));
        self
    }

    pub fn init(mut self, q: impl Into<String>) -> Self {
        self.init = Some(q.into());
        self
    }

    pub fn final_state(mut self, q: impl Into<String>) -> Self {
        self.final_state = Some(q.into());
        self
    }

    /// Adds a transition; `action` is `tau`, `!m` or `?m`.
    pub fn transition(mut self, src: impl Into<String>, action: impl Into<String>, dst: impl Into<String>) -> Self {
        self.transitions.push((src.into(), action.into(), dst.into()));
        self
    }

    pub fn build(self) -> Result<Protocol, ModelError> {
        if self.states.is_empty() {
            return Err(ModelError::NoStates);
        }
        let mut state_index = HashMap::new();
        for (i, q) in self.states.iter().enumerate() {
            if !is_identifier(q) {
                return Err(ModelError::InvalidIdentifier(q.clone()));
            }
            if state_index.insert(q.clone(), i).is_some() {
                return Err(ModelError::DuplicateState(q.clone()));
            }
        }
        let mut msg_index = HashMap::new();
        for (i, m) in self.messages.iter().enumerate() {
            if !is_identifier(m) {
                return Err(ModelError::InvalidIdentifier(m.clone()));
            }
            if msg_index.insert(m.clone(), i).is_some() {
                return Err(ModelError::DuplicateMessage(m.clone()));
            }
        }
        let lookup = |q: &str| {
            state_index
                .get(q)
                .copied()
                .ok_or_else(|| ModelError::UnknownState(q.to_string()))
        };
        let init = lookup(self.init.as_deref().ok_or(ModelError::MissingInit)?)?;
        let final_state = lookup(self.final_state.as_deref().ok_or(ModelError::MissingFinal)?)?;
        let mut transitions = Vec::new();
        let mut seen = HashSet::new();
        for (src, act, dst) in &self.transitions {
            let action = parse_action(act, &msg_index)?;
            let t = Transition { src: lookup(src)?, action, dst: lookup(dst)? };
            if seen.insert(t) {
                transitions.push(t);
            }
        }
        Ok(Protocol::assemble(self.name, self.states, self.messages, init, final_state, transitions))
    }
}

fn parse_action(text: &str, msg_index: &HashMap<String, MsgId>) -> Result<Action, ModelError> {
    let msg = |name: &str| {
        msg_index
            .get(name)
            .copied()
            .ok_or_else(|| ModelError::UnknownMessage(name.to_string()))
    };
    if text == "tau" {
        Ok(Action::Tau)
    } else if let Some(m) = text.strip_prefix('!') {
        Ok(Action::Send(msg(m)?))
    } else if let Some(m) = text.strip_prefix('?') {
        Ok(Action::Recv(msg(m)?))
    } else {
        Err(ModelError::BadAction(text.to_string()))
    }
}

impl Protocol {
    fn assemble(
        name: String,
        states: Vec<String>,
        messages: Vec<String>,
        init: StateId,
        final_state: StateId,
        transitions: Vec<Transition>,
    ) -> Protocol {
        let nq = states.len();
        let nm = messages.len();
        let mut rec = vec![false; nq * nm];
        let mut sends = vec![Vec::new(); nm];
        let mut recvs = vec![Vec::new(); nm];
        let mut taus = Vec::new();
        for &t in &transitions {
            match t.action {
                Action::Tau => taus.push(t),
                Action::Send(m) => sends[m].push(t),
                Action::Recv(m) => {
                    rec[t.src * nm + m] = true;
                    recvs[m].push(t);
                }
            }
        }
        let state_index = states.iter().enumerate().map(|(i, q)| (q.clone(), i)).collect();
        let msg_index = messages.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        Protocol {
            name,
            states,
            messages,
            init,
            final_state,
            transitions,
            state_index,
            msg_index,
            rec,
            sends,
            recvs,
            taus,
        }
    }
}

/// A non-empty multiset of states, stored sparsely and sorted by state index.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    counts: Vec<(StateId, u32)>,
}

impl Configuration {
    /// The empty multiset. Not a valid configuration on its own, but a useful accumulator.
    pub fn empty() -> Self {
        Configuration { counts: Vec::new() }
    }

    pub fn singleton(q: StateId, k: u32) -> Self {
        let mut c = Configuration::empty();
        c.add(q, k);
        c
    }

    /// Builds a multiset from `(state, count)` pairs; repeated states are summed.
    pub fn from_counts<I: IntoIterator<Item = (StateId, u32)>>(items: I) -> Self {
        let mut c = Configuration::empty();
        for (q, k) in items {
            c.add(q, k);
        }
        c
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn get(&self, q: StateId) -> u32 {
        match self.counts.binary_search_by_key(&q, |&(s, _)| s) {
            Ok(i) => self.counts[i].1,
            Err(_) => 0,
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&(_, k)| k as u64).sum()
    }

    /// Populated states with their counts, in increasing state order.
    pub fn iter(&self) -> impl Iterator<Item = (StateId, u32)> + '_ {
        self.counts.iter().copied()
    }

    pub fn support(&self) -> impl Iterator<Item = StateId> + '_ {
        self.counts.iter().map(|&(q, _)| q)
    }

    pub fn add(&mut self, q: StateId, k: u32) {
        if k == 0 {
            return;
        }
        match self.counts.binary_search_by_key(&q, |&(s, _)| s) {
            Ok(i) => self.counts[i].1 += k,
            Err(i) => self.counts.insert(i, (q, k)),
        }
    }

    /// Removes one process from `q`; returns false if `q` was empty.
    pub fn remove_one(&mut self, q: StateId) -> bool {
        match self.counts.binary_search_by_key(&q, |&(s, _)| s) {
            Ok(i) => {
                if self.counts[i].1 == 1 {
                    self.counts.remove(i);
                } else {
                    self.counts[i].1 -= 1;
                }
                true
            }
            Err(_) => false,
        }
    }

    /// Moves one process from `from` to `to`. Panics if `from` is empty.
    pub fn moved(&self, from: StateId, to: StateId) -> Configuration {
        let mut c = self.clone();
        assert!(c.remove_one(from), "no process to move");
        c.add(to, 1);
        c
    }

    /// `self ≥ target` componentwise.
    pub fn covers(&self, target: &Configuration) -> bool {
        target.iter().all(|(q, k)| self.get(q) >= k)
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟦")?;
        for (i, (q, k)) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            if k > 1 {
                write!(f, "{k}·#{q}")?;
            } else {
                write!(f, "#{q}")?;
            }
        }
        write!(f, "⟧")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn conf(p: &Protocol, items: &[(&str, u32)]) -> Configuration {
        Configuration::from_counts(items.iter().map(|&(q, k)| (p.state_id(q).unwrap(), k)))
    }

    fn names(p: &Protocol, qs: BTreeSet<StateId>) -> Vec<&str> {
        let mut v: Vec<&str> = qs.into_iter().map(|q| p.state_name(q)).collect();
        v.sort();
        v
    }

    #[test]
    fn receivers_on_fig1() {
        let p = fixtures::fig1();
        let b = p.message_id("b").unwrap();
        let a = p.message_id("a").unwrap();
        assert_eq!(names(&p, p.receivers(b).unwrap()), vec!["q5", "q_in"]);
        assert_eq!(names(&p, p.receivers(a).unwrap()), vec!["q5"]);
        assert!(p.receivers(99).is_err());
    }

    #[test]
    fn receivers_empty_without_receptions() {
        let p = Protocol::builder("t")
            .states(["q_in", "p"])
            .messages(["a"])
            .init("q_in")
            .final_state("p")
            .transition("q_in", "!a", "p")
            .build()
            .unwrap();
        assert!(p.receivers(0).unwrap().is_empty());
    }

    #[test]
    fn receivable_on_p1_and_p2() {
        let p1 = fixtures::p1();
        let rec: Vec<&str> = p1
            .receivable(p1.state_id("q1").unwrap())
            .unwrap()
            .into_iter()
            .map(|m| p1.message_name(m))
            .collect();
        assert_eq!(rec, vec!["a", "b", "c"]);
        assert!(p1.receivable(p1.state_id("q4").unwrap()).unwrap().is_empty());
        let p2 = fixtures::p2();
        let rec: Vec<&str> = p2
            .receivable(p2.state_id("p3").unwrap())
            .unwrap()
            .into_iter()
            .map(|m| p2.message_name(m))
            .collect();
        assert_eq!(rec, vec!["m1", "m2", "m3"]);
    }

    #[test]
    fn fig1_initial_step_is_only_nb_a() {
        let p = fixtures::fig1();
        let succ = p.successors(&conf(&p, &[("q_in", 2)])).unwrap();
        let a = p.message_id("a").unwrap();
        assert_eq!(succ, vec![(StepLabel::NonBlocking(a), conf(&p, &[("q_in", 1), ("q5", 1)]))]);
    }

    #[test]
    fn fig1_rendezvous_on_b() {
        let p = fixtures::fig1();
        let b = p.message_id("b").unwrap();
        let succ = p.successors(&conf(&p, &[("q_in", 1), ("q5", 1)])).unwrap();
        assert!(succ.contains(&(StepLabel::Rendezvous(b), conf(&p, &[("q1", 1), ("q6", 1)]))));
    }

    #[test]
    fn no_transitions_no_successors() {
        let p = Protocol::builder("t").state("q_in").init("q_in").final_state("q_in").build().unwrap();
        assert!(p.successors(&Configuration::singleton(0, 3)).unwrap().is_empty());
    }

    #[test]
    fn self_rendezvous_needs_two_processes() {
        let p = Protocol::builder("t")
            .states(["q_in", "s", "r"])
            .messages(["a"])
            .init("q_in")
            .final_state("r")
            .transition("q_in", "!a", "s")
            .transition("q_in", "?a", "r")
            .build()
            .unwrap();
        let one = p.successors(&Configuration::singleton(0, 1)).unwrap();
        assert_eq!(one, vec![(StepLabel::NonBlocking(0), Configuration::singleton(1, 1))]);
        let two = p.successors(&Configuration::singleton(0, 2)).unwrap();
        assert_eq!(
            two,
            vec![(StepLabel::Rendezvous(0), Configuration::from_counts([(1, 1), (2, 1)]))]
        );
    }

    #[test]
    fn classical_semantics_drops_nb_steps() {
        let p = fixtures::fig1();
        let c = conf(&p, &[("q_in", 2)]);
        assert!(p.successors_with(&c, Semantics::Classical).unwrap().is_empty());
    }

    #[test]
    fn malformed_configurations_rejected() {
        let p = fixtures::fig1();
        assert_eq!(p.successors(&Configuration::empty()), Err(ModelError::EmptyConfiguration));
        assert_eq!(
            p.successors(&Configuration::singleton(42, 1)),
            Err(ModelError::StateOutOfRange(42))
        );
    }

    #[test]
    fn covers_is_componentwise() {
        let p = fixtures::fig1();
        assert!(conf(&p, &[("q2", 2)]).covers(&conf(&p, &[("q2", 1)])));
        assert!(conf(&p, &[("q1", 1), ("q6", 1)]).covers(&conf(&p, &[("q1", 1), ("q6", 1)])));
        assert!(!conf(&p, &[("q_in", 1), ("q5", 1)]).covers(&conf(&p, &[("q4", 1)])));
    }

    #[test]
    fn duplicate_transitions_are_idempotent() {
        let p = Protocol::builder("t")
            .states(["q_in"])
            .init("q_in")
            .final_state("q_in")
            .transition("q_in", "tau", "q_in")
            .transition("q_in", "tau", "q_in")
            .build()
            .unwrap();
        assert_eq!(p.transitions().len(), 1);
    }

    #[test]
    fn builder_rejects_bad_input() {
        let base = || Protocol::builder("t").states(["q_in"]).init("q_in").final_state("q_in");
        assert_eq!(
            base().transition("q_in", "!x", "q_in").build(),
            Err(ModelError::UnknownMessage("x".into()))
        );
        assert_eq!(base().state("q_in").build(), Err(ModelError::DuplicateState("q_in".into())));
        assert_eq!(base().state("9q").build(), Err(ModelError::InvalidIdentifier("9q".into())));
        assert_eq!(
            Protocol::builder("t").states(["q_in"]).final_state("q_in").build(),
            Err(ModelError::MissingInit)
        );
    }
}
