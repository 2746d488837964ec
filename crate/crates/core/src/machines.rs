//! Counter machines with zero tests, non-blocking decrements and restore transitions,
//! together with non-blocking vector addition systems.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::hash::Hash;

use crate::ident::is_identifier;

pub type LocId = usize;
pub type CounterId = usize;

/// Default cap on the number of configurations visited by a bounded search.
pub const DEFAULT_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MachineError {
    #[error("invalid identifier `{0}`")]
    InvalidIdentifier(String),
    #[error("unknown location `{0}`")]
    UnknownLocation(String),
    #[error("unknown counter `{0}`")]
    UnknownCounter(String),
    #[error("location `{0}` declared twice")]
    DuplicateLocation(String),
    #[error("counter `{0}` declared twice")]
    DuplicateCounter(String),
    #[error("machine has no locations")]
    NoLocations,
    #[error("initial location not set")]
    MissingInit,
    #[error("malformed operation `{0}`")]
    BadOp(String),
    #[error("malformed configuration: {0}")]
    MalformedConfig(String),
    #[error("vector has length {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("cap {cap} is below the initial vector")]
    CapBelowInit { cap: u64 },
    #[error("node budget of {0} configurations exceeded")]
    ResourceLimit(usize),
}

/// Operation carried by a machine transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CounterOp {
    Nop,
    Inc(CounterId),
    Dec(CounterId),
    ZeroTest(CounterId),
    NbDec(CounterId),
}

impl CounterOp {
    pub fn counter(self) -> Option<CounterId> {
        match self {
            CounterOp::Nop => None,
            CounterOp::Inc(x) | CounterOp::Dec(x) | CounterOp::ZeroTest(x) | CounterOp::NbDec(x) => Some(x),
        }
    }

    pub fn is_nonblocking(self) -> bool {
        matches!(self, CounterOp::NbDec(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MachineTransition {
    pub src: LocId,
    pub op: CounterOp,
    pub dst: LocId,
}

/// A counter machine. With `restore` set, every location additionally has an implicit
/// no-op transition back to the initial location.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CounterMachine {
    name: String,
    locations: Vec<String>,
    counters: Vec<String>,
    init: LocId,
    transitions: Vec<MachineTransition>,
    restore: bool,
    loc_index: HashMap<String, LocId>,
    counter_index: HashMap<String, CounterId>,
    outgoing: Vec<Vec<usize>>,
}

impl CounterMachine {
    pub fn builder(name: impl Into<String>) -> MachineBuilder {
        MachineBuilder::new(name)
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn locations(&self) -> &[String] {
        &self.locations
    }
    pub fn counters(&self) -> &[String] {
        &self.counters
    }
    pub fn init(&self) -> LocId {
        self.init
    }
    pub fn restore(&self) -> bool {
        self.restore
    }
    pub fn transitions(&self) -> &[MachineTransition] {
        &self.transitions
    }
    pub fn location_name(&self, l: LocId) -> &str {
        &self.locations[l]
    }
    pub fn counter_name(&self, x: CounterId) -> &str {
        &self.counters[x]
    }

    pub fn location_id(&self, name: &str) -> Result<LocId, MachineError> {
        self.loc_index
            .get(name)
            .copied()
            .ok_or_else(|| MachineError::UnknownLocation(name.to_string()))
    }

    pub fn counter_id(&self, name: &str) -> Result<CounterId, MachineError> {
        self.counter_index
            .get(name)
            .copied()
            .ok_or_else(|| MachineError::UnknownCounter(name.to_string()))
    }

    /// Transitions whose operation blocks (everything except `nbdec`).
    pub fn blocking(&self) -> impl Iterator<Item = &MachineTransition> {
        self.transitions.iter().filter(|t| !t.op.is_nonblocking())
    }

    /// The `nbdec` transitions.
    pub fn nonblocking(&self) -> impl Iterator<Item = &MachineTransition> {
        self.transitions.iter().filter(|t| t.op.is_nonblocking())
    }

    pub fn is_test_free(&self) -> bool {
        !self.transitions.iter().any(|t| matches!(t.op, CounterOp::ZeroTest(_)))
    }

    /// A test-free machine with non-blocking decrements and restore transitions.
    pub fn is_nb_restore(&self) -> bool {
        self.is_test_free() && self.restore
    }

    /// Same machine with the restore flag changed.
    pub fn with_restore(&self, restore: bool) -> CounterMachine {
        let mut m = self.clone();
        m.restore = restore;
        m
    }

    /// Same machine with another initial location.
    pub fn with_init(&self, init: LocId) -> CounterMachine {
        assert!(init < self.locations.len(), "initial location out of range");
        let mut m = self.clone();
        m.init = init;
        m
    }

    pub fn initial_config(&self) -> MachineConfig {
        MachineConfig { loc: self.init, vals: vec![0; self.counters.len()] }
    }

    pub fn check_config(&self, cfg: &MachineConfig) -> Result<(), MachineError> {
        if cfg.loc >= self.locations.len() {
            return Err(MachineError::MalformedConfig(format!("location index {} out of range", cfg.loc)));
        }
        if cfg.vals.len() != self.counters.len() {
            return Err(MachineError::MalformedConfig(format!(
                "{} counter values for {} counters",
                cfg.vals.len(),
                self.counters.len()
            )));
        }
        Ok(())
    }

    /// Renders `loc x=1,y=0`.
    pub fn show_config(&self, cfg: &MachineConfig) -> String {
        let vals: Vec<String> =
            self.counters.iter().zip(&cfg.vals).map(|(x, v)| format!("{x}={v}")).collect();
        format!("{} {}", self.locations[cfg.loc], vals.join(","))
    }

    pub fn show_op(&self, op: CounterOp) -> String {
        match op {
            CounterOp::Nop => "nop".into(),
            CounterOp::Inc(x) => format!("inc {}", self.counters[x]),
            CounterOp::Dec(x) => format!("dec {}", self.counters[x]),
            CounterOp::ZeroTest(x) => format!("zero? {}", self.counters[x]),
            CounterOp::NbDec(x) => format!("nbdec {}", self.counters[x]),
        }
    }

    pub fn show_step(&self, step: MachineStep) -> String {
        match step {
            MachineStep::Restore => "restore".into(),
            MachineStep::Transition(i) => {
                let t = self.transitions[i];
                format!("{}:{}:{}", self.locations[t.src], self.show_op(t.op).replace(' ', "_"), self.locations[t.dst])
            }
        }
    }

    /// Applies a single transition if enabled.
    pub fn fire(&self, t: &MachineTransition, vals: &[u64]) -> Option<Vec<u64>> {
        let mut v = vals.to_vec();
        match t.op {
            CounterOp::Nop => {}
            CounterOp::Inc(x) => v[x] += 1,
            CounterOp::Dec(x) => {
                if v[x] == 0 {
                    return None;
                }
                v[x] -= 1;
            }
            CounterOp::ZeroTest(x) => {
                if v[x] != 0 {
                    return None;
                }
            }
            CounterOp::NbDec(x) => v[x] = v[x].saturating_sub(1),
        }
        Some(v)
    }

    /// All one-step successors of `cfg`.
    pub fn successors(&self, cfg: &MachineConfig) -> Result<Vec<(MachineStep, MachineConfig)>, MachineError> {
        self.check_config(cfg)?;
        let mut out = Vec::new();
        for &i in &self.outgoing[cfg.loc] {
            let t = &self.transitions[i];
            if let Some(vals) = self.fire(t, &cfg.vals) {
                out.push((MachineStep::Transition(i), MachineConfig { loc: t.dst, vals }));
            }
        }
        if self.restore {
            out.push((MachineStep::Restore, MachineConfig { loc: self.init, vals: cfg.vals.clone() }));
        }
        Ok(out)
    }
}

/// Incremental constructor for [`CounterMachine`], working with names.
#[derive(Debug, Clone)]
pub struct MachineBuilder {
    name: String,
    locations: Vec<String>,
    counters: Vec<String>,
    init: Option<String>,
    restore: bool,
    transitions: Vec<(String, String, String)>,
}

impl MachineBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        MachineBuilder {
            name: name.into(),
            locations: Vec::new(),
            counters: Vec::new(),
            init: None,
            restore: false,
            transitions: Vec::new(),
        }
    }

    pub fn location(mut self, l: impl Into<String>) -> Self {
        self.locations.push(l.into());
        self
    }

    pub fn locations<I, S>(mut self, ls: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.locations.extend(ls.into_iter().map(Into::into));
        self
    }

    pub fn counter(mut self, x: impl Into<String>) -> Self {
        self.counters.push(x.into());
        self
    }

    pub fn counters<I, S>(mut self, xs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.counters.extend(xs.into_iter().map(Into::into));
        self
    }

    pub fn init(mut self, l: impl Into<String>) -> Self {
        self.init = Some(l.into());
        self
    }

    pub fn restore(mut self, on: bool) -> Self {
        self.restore = on;
        self
    }

    /// Adds a transition; `op` is `nop`, `inc x`, `dec x`, `nbdec x` or `zero? x`.
    pub fn transition(mut self, src: impl Into<String>, op: impl Into<String>, dst: impl Into<String>) -> Self {
        self.transitions.push((src.into(), op.into(), dst.into()));
        self
    }

    pub fn transitions_from<I>(mut self, ts: I) -> Self
    where
        I: IntoIterator<Item = (String, String, String)>,
    {
        self.transitions.extend(ts);
        self
    }

    pub fn build(self) -> Result<CounterMachine, MachineError> {
        if self.locations.is_empty() {
            return Err(MachineError::NoLocations);
        }
        let mut loc_index = HashMap::new();
        for (i, l) in self.locations.iter().enumerate() {
            if !is_identifier(l) {
                return Err(MachineError::InvalidIdentifier(l.clone()));
            }
            if loc_index.insert(l.clone(), i).is_some() {
                return Err(MachineError::DuplicateLocation(l.clone()));
            }
        }
        let mut counter_index = HashMap::new();
        for (i, x) in self.counters.iter().enumerate() {
            if !is_identifier(x) {
                return Err(MachineError::InvalidIdentifier(x.clone()));
            }
            if counter_index.insert(x.clone(), i).is_some() {
                return Err(MachineError::DuplicateCounter(x.clone()));
            }
        }
        let loc = |l: &str| {
            loc_index
                .get(l)
                .copied()
                .ok_or_else(|| MachineError::UnknownLocation(l.to_string()))
        };
        let init = loc(self.init.as_deref().ok_or(MachineError::MissingInit)?)?;
        let mut transitions = Vec::new();
        let mut seen = HashSet::new();
        for (src, op, dst) in &self.transitions {
            let op = parse_op(op, &counter_index)?;
            let t = MachineTransition { src: loc(src)?, op, dst: loc(dst)? };
            if seen.insert(t) {
                transitions.push(t);
            }
        }
        Ok(CounterMachine::assemble(
            self.name,
            self.locations,
            self.counters,
            init,
            transitions,
            self.restore,
        ))
    }
}

/// Parses `nop`, `inc x`, `dec x`, `nbdec x` or `zero? x`.
pub fn parse_op(text: &str, counters: &HashMap<String, CounterId>) -> Result<CounterOp, MachineError> {
    let words: Vec<&str> = text.split_whitespace().collect();
    let counter = |x: &str| {
        counters
            .get(x)
            .copied()
            .ok_or_else(|| MachineError::UnknownCounter(x.to_string()))
    };
    match words.as_slice() {
        ["nop"] => Ok(CounterOp::Nop),
        ["inc", x] => Ok(CounterOp::Inc(counter(x)?)),
        ["dec", x] => Ok(CounterOp::Dec(counter(x)?)),
        ["nbdec", x] => Ok(CounterOp::NbDec(counter(x)?)),
        ["zero?", x] => Ok(CounterOp::ZeroTest(counter(x)?)),
        _ => Err(MachineError::BadOp(text.to_string())),
    }
}

impl CounterMachine {
    pub(crate) fn assemble(
        name: String,
        locations: Vec<String>,
        counters: Vec<String>,
        init: LocId,
        transitions: Vec<MachineTransition>,
        restore: bool,
    ) -> CounterMachine {
        let mut outgoing = vec![Vec::new(); locations.len()];
        for (i, t) in transitions.iter().enumerate() {
            outgoing[t.src].push(i);
        }
        let loc_index = locations.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
        let counter_index = counters.iter().enumerate().map(|(i, x)| (x.clone(), i)).collect();
        CounterMachine {
            name,
            locations,
            counters,
            init,
            transitions,
            restore,
            loc_index,
            counter_index,
            outgoing,
        }
    }
}

/// A machine configuration `(ℓ, v)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MachineConfig {
    pub loc: LocId,
    pub vals: Vec<u64>,
}

/// How a machine step was taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MachineStep {
    /// Index into [`CounterMachine::transitions`].
    Transition(usize),
    /// The implicit jump back to the initial location.
    Restore,
}

/// A run: the starting point and every step taken from it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run<C, S> {
    pub start: C,
    pub steps: Vec<(S, C)>,
}

impl<C, S> Run<C, S> {
    pub fn last(&self) -> &C {
        self.steps.last().map(|(_, c)| c).unwrap_or(&self.start)
    }
}

pub type MachineRun = Run<MachineConfig, MachineStep>;
pub type VasRun = Run<Vec<u64>, usize>;

/// Answer of a cap-bounded search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundedVerdict<W> {
    Yes(W),
    /// Exhausted every configuration whose values stay within the cap. `pruned` counts
    /// the successor configurations discarded for exceeding it.
    NoWithinCap { cap: u64, pruned: usize },
}

impl<W> BoundedVerdict<W> {
    pub fn is_yes(&self) -> bool {
        matches!(self, BoundedVerdict::Yes(_))
    }
}

/// Result of a complete bounded exploration.
#[derive(Debug, Clone)]
pub struct Explored<C> {
    pub configs: Vec<C>,
    pub pruned: usize,
}

/// Generic breadth-first search over configurations whose values stay within `cap`.
pub(crate) struct Bfs<C, S> {
    pub nodes: Vec<C>,
    pub parent: Vec<Option<(usize, S)>>,
    pub pruned: usize,
    pub hit: Option<usize>,
}

impl<C: Clone, S: Copy> Bfs<C, S> {
    pub fn run(&self, idx: usize) -> Run<C, S> {
        let mut steps = Vec::new();
        let mut i = idx;
        while let Some((prev, s)) = self.parent[i] {
            steps.push((s, self.nodes[i].clone()));
            i = prev;
        }
        steps.reverse();
        Run { start: self.nodes[i].clone(), steps }
    }
}

pub(crate) fn bfs<C, S, E>(
    start: C,
    budget: usize,
    mut succ: impl FnMut(&C) -> Result<Vec<(S, C)>, E>,
    within: impl Fn(&C) -> bool,
    mut stop: impl FnMut(&C) -> bool,
) -> Result<Bfs<C, S>, E>
where
    C: Clone + Eq + Hash,
    S: Copy,
    E: From<MachineError>,
{
    let mut index: HashMap<C, usize> = HashMap::new();
    let mut out = Bfs { nodes: vec![start.clone()], parent: vec![None], pruned: 0, hit: None };
    index.insert(start, 0);
    if stop(&out.nodes[0]) {
        out.hit = Some(0);
        return Ok(out);
    }
    let mut queue = VecDeque::from([0usize]);
    while let Some(head) = queue.pop_front() {
        let cur = out.nodes[head].clone();
        for (s, next) in succ(&cur)? {
            if index.contains_key(&next) {
                continue;
            }
            if !within(&next) {
                out.pruned += 1;
                continue;
            }
            if out.nodes.len() >= budget {
                return Err(MachineError::ResourceLimit(budget).into());
            }
            let id = out.nodes.len();
            index.insert(next.clone(), id);
            out.nodes.push(next);
            out.parent.push(Some((head, s)));
            if stop(&out.nodes[id]) {
                out.hit = Some(id);
                return Ok(out);
            }
            queue.push_back(id);
        }
    }
    Ok(out)
}

/// Cover search: is `target` reachable from `(ℓ_in, 0)` with every counter kept at most `cap`?
pub fn cover_bounded(
    m: &CounterMachine,
    target: LocId,
    cap: u64,
    budget: usize,
) -> Result<BoundedVerdict<MachineRun>, MachineError> {
    cover_bounded_from(m, m.initial_config(), target, cap, budget)
}

/// Like [`cover_bounded`] from an arbitrary starting configuration.
pub fn cover_bounded_from(
    m: &CounterMachine,
    start: MachineConfig,
    target: LocId,
    cap: u64,
    budget: usize,
) -> Result<BoundedVerdict<MachineRun>, MachineError> {
    m.check_config(&start)?;
    if target >= m.locations.len() {
        return Err(MachineError::MalformedConfig(format!("location index {target} out of range")));
    }
    let search = bfs(
        start,
        budget,
        |c| m.successors(c),
        |c: &MachineConfig| c.vals.iter().all(|&v| v <= cap),
        |c| c.loc == target,
    )?;
    Ok(match search.hit {
        Some(i) => BoundedVerdict::Yes(search.run(i)),
        None => BoundedVerdict::NoWithinCap { cap, pruned: search.pruned },
    })
}

/// Every configuration reachable from `start` without exceeding `cap`.
pub fn reachable_bounded(
    m: &CounterMachine,
    start: MachineConfig,
    cap: u64,
    budget: usize,
) -> Result<Explored<MachineConfig>, MachineError> {
    m.check_config(&start)?;
    let search = bfs(
        start,
        budget,
        |c| m.successors(c),
        |c: &MachineConfig| c.vals.iter().all(|&v| v <= cap),
        |_| false,
    )?;
    Ok(Explored { configs: search.nodes, pruned: search.pruned })
}

/// Replays a run through the machine semantics.
pub fn replays(m: &CounterMachine, run: &MachineRun) -> bool {
    let mut cur = &run.start;
    for step in &run.steps {
        match m.successors(cur) {
            Ok(succ) if succ.contains(step) => cur = &step.1,
            _ => return false,
        }
    }
    true
}

/// A transition of a non-blocking VAS: a blocking update and a clamped subtraction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VasTransition {
    pub block: Vec<i64>,
    pub nb: Vec<u64>,
}

/// A non-blocking vector addition system with an initial and a target vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vas {
    pub name: String,
    pub dim: usize,
    pub transitions: Vec<VasTransition>,
    pub init: Vec<u64>,
    pub target: Vec<u64>,
}

impl Vas {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        transitions: Vec<VasTransition>,
        init: Vec<u64>,
        target: Vec<u64>,
    ) -> Result<Vas, MachineError> {
        if dim == 0 {
            return Err(MachineError::ZeroDimension);
        }
        let check = |len: usize| {
            if len == dim {
                Ok(())
            } else {
                Err(MachineError::DimensionMismatch { expected: dim, found: len })
            }
        };
        check(init.len())?;
        check(target.len())?;
        for t in &transitions {
            check(t.block.len())?;
            check(t.nb.len())?;
        }
        Ok(Vas { name: name.into(), dim, transitions, init, target })
    }
}

/// Strict step: defined iff `v + block ≥ 0`; then each coordinate loses up to `nb`.
pub fn vas_step_strict(v: &[u64], t: &VasTransition) -> Option<Vec<u64>> {
    debug_assert_eq!(v.len(), t.block.len());
    v.iter()
        .zip(&t.block)
        .zip(&t.nb)
        .map(|((&x, &b), &n)| {
            let mid = x as i128 + b as i128;
            if mid < 0 {
                None
            } else {
                Some((mid - n as i128).max(0) as u64)
            }
        })
        .collect()
}

/// Relaxed step: always defined, `max(0, v + block − nb)` per coordinate.
pub fn vas_step_relaxed(v: &[u64], t: &VasTransition) -> Vec<u64> {
    debug_assert_eq!(v.len(), t.block.len());
    v.iter()
        .zip(&t.block)
        .zip(&t.nb)
        .map(|((&x, &b), &n)| (x as i128 + b as i128 - n as i128).max(0) as u64)
        .collect()
}

/// Strict-step cover search with every coordinate kept at most `cap`.
pub fn vas_cover_bounded(vas: &Vas, cap: u64, budget: usize) -> Result<BoundedVerdict<VasRun>, MachineError> {
    if vas.init.iter().any(|&x| x > cap) {
        return Err(MachineError::CapBelowInit { cap });
    }
    let search = bfs(
        vas.init.clone(),
        budget,
        |v: &Vec<u64>| -> Result<Vec<(usize, Vec<u64>)>, MachineError> {
            Ok(vas
                .transitions
                .iter()
                .enumerate()
                .filter_map(|(i, t)| vas_step_strict(v, t).map(|w| (i, w)))
                .collect())
        },
        |v: &Vec<u64>| v.iter().all(|&x| x <= cap),
        |v: &Vec<u64>| v.iter().zip(&vas.target).all(|(a, b)| a >= b),
    )?;
    Ok(match search.hit {
        Some(i) => BoundedVerdict::Yes(search.run(i)),
        None => BoundedVerdict::NoWithinCap { cap, pruned: search.pruned },
    })
}

impl fmt::Display for MachineConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(#{}, {:?})", self.loc, self.vals)
    }
}
