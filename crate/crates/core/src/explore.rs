//! Exhaustive breadth-first exploration at a fixed population size.
//!
//! This is the ground-truth oracle: it answers SCover, CCover and Synchro exactly for one
//! population size, and as a semi-decision when sweeping sizes upwards.

use std::collections::{BTreeSet, HashMap};

use crate::model::{Configuration, ModelError, Protocol, StepLabel};

/// Default cap on the number of distinct configurations visited per population size.
pub const DEFAULT_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExploreError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("population size must be at least 1")]
    EmptyPopulation,
    #[error("node budget of {budget} configurations exceeded at population {procs}")]
    ResourceLimit { procs: u32, budget: usize },
}

/// The question asked about the protocol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Problem {
    /// Some process reaches the final state.
    SCover,
    /// Some reachable configuration is at least the target.
    CCover(Configuration),
    /// All processes are in the final state.
    Synchro,
}

impl Problem {
    pub fn holds(&self, p: &Protocol, c: &Configuration) -> bool {
        match self {
            Problem::SCover => c.get(p.final_state()) > 0,
            Problem::CCover(target) => c.covers(target),
            Problem::Synchro => c.support().all(|q| q == p.final_state()),
        }
    }

    fn validate(&self, p: &Protocol) -> Result<(), ModelError> {
        match self {
            Problem::CCover(target) => p.check_config(target),
            _ => Ok(()),
        }
    }
}

/// An initial execution: the starting configuration and every step taken from it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub initial: Configuration,
    pub steps: Vec<(StepLabel, Configuration)>,
}

impl Witness {
    pub fn last(&self) -> &Configuration {
        self.steps.last().map(|(_, c)| c).unwrap_or(&self.initial)
    }

    /// Replays the witness: the first configuration must be initial and every step
    /// must be a successor of the previous configuration.
    pub fn replays(&self, p: &Protocol) -> bool {
        if self.initial.is_empty() || self.initial.support().any(|q| q != p.init()) {
            return false;
        }
        let mut cur = &self.initial;
        for step in &self.steps {
            match p.successors(cur) {
                Ok(succ) if succ.contains(step) => cur = &step.1,
                _ => return false,
            }
        }
        true
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// Positive answer. The explorer always attaches a witness; the abstract
    /// algorithm answers exactly but builds none.
    Yes(Option<Witness>),
    No,
    /// No positive instance found up to this population size.
    Unknown(u32),
}

impl Verdict {
    pub fn is_yes(&self) -> bool {
        matches!(self, Verdict::Yes(_))
    }
}

/// Explicit reachability graph for one population size, in BFS discovery order.
struct Graph {
    nodes: Vec<Configuration>,
    parent: Vec<Option<(usize, StepLabel)>>,
}

impl Graph {
    fn path_to(&self, mut idx: usize) -> Witness {
        let mut steps = Vec::new();
        while let Some((prev, label)) = self.parent[idx] {
            steps.push((label, self.nodes[idx].clone()));
            idx = prev;
        }
        steps.reverse();
        Witness { initial: self.nodes[idx].clone(), steps }
    }
}

/// BFS from `⟦n·q_in⟧`, stopping at the first configuration accepted by `stop`.
fn bfs(
    p: &Protocol,
    n: u32,
    budget: usize,
    mut stop: impl FnMut(&Configuration) -> bool,
) -> Result<(Graph, Option<usize>), ExploreError> {
    if n == 0 {
        return Err(ExploreError::EmptyPopulation);
    }
    let start = p.initial_config(n);
    let mut index: HashMap<Configuration, usize> = HashMap::new();
    let mut g = Graph { nodes: vec![start.clone()], parent: vec![None] };
    index.insert(start, 0);
    if stop(&g.nodes[0]) {
        return Ok((g, Some(0)));
    }
    let mut head = 0;
    while head < g.nodes.len() {
        let succ = p.successors(&g.nodes[head])?;
        for (label, next) in succ {
            if index.contains_key(&next) {
                continue;
            }
            if g.nodes.len() >= budget {
                return Err(ExploreError::ResourceLimit { procs: n, budget });
            }
            let id = g.nodes.len();
            index.insert(next.clone(), id);
            g.nodes.push(next);
            g.parent.push(Some((head, label)));
            if stop(&g.nodes[id]) {
                return Ok((g, Some(id)));
            }
        }
        head += 1;
    }
    Ok((g, None))
}

/// Every configuration reachable from `⟦n·q_in⟧`.
pub fn reachable(p: &Protocol, n: u32, budget: usize) -> Result<BTreeSet<Configuration>, ExploreError> {
    let (g, _) = bfs(p, n, budget, |_| false)?;
    Ok(g.nodes.into_iter().collect())
}

/// Exact answer for initial configurations of exactly `n` processes.
pub fn decide_fixed(p: &Protocol, prob: &Problem, n: u32, budget: usize) -> Result<Verdict, ExploreError> {
    prob.validate(p)?;
    let (g, hit) = bfs(p, n, budget, |c| prob.holds(p, c))?;
    Ok(match hit {
        Some(idx) => Verdict::Yes(Some(g.path_to(idx))),
        None => Verdict::No,
    })
}

/// Tries `n = 1, 2, …, max_n`; never answers `No`.
pub fn decide_sweep(p: &Protocol, prob: &Problem, max_n: u32, budget: usize) -> Result<Verdict, ExploreError> {
    if max_n == 0 {
        return Err(ExploreError::EmptyPopulation);
    }
    for n in 1..=max_n {
        if let v @ Verdict::Yes(_) = decide_fixed(p, prob, n, budget)? {
            return Ok(v);
        }
    }
    Ok(Verdict::Unknown(max_n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn conf(p: &Protocol, items: &[(&str, u32)]) -> Configuration {
        Configuration::from_counts(items.iter().map(|&(q, k)| (p.state_id(q).unwrap(), k)))
    }

    #[test]
    fn fig1_single_process() {
        // One process alone can only issue requests nobody answers: nb(a), then nb(b).
        let p = fixtures::fig1();
        let r = reachable(&p, 1, DEFAULT_BUDGET).unwrap();
        let expected: BTreeSet<_> =
            [conf(&p, &[("q_in", 1)]), conf(&p, &[("q5", 1)]), conf(&p, &[("q6", 1)])].into();
        assert_eq!(r, expected);
    }

    #[test]
    fn fig1_two_processes_reach_both_in_q2() {
        let p = fixtures::fig1();
        assert!(reachable(&p, 2, DEFAULT_BUDGET).unwrap().contains(&conf(&p, &[("q2", 2)])));
    }

    #[test]
    fn no_transitions_only_initial() {
        let p = Protocol::builder("t").state("q_in").init("q_in").final_state("q_in").build().unwrap();
        let r = reachable(&p, 3, DEFAULT_BUDGET).unwrap();
        assert_eq!(r.into_iter().collect::<Vec<_>>(), vec![Configuration::singleton(0, 3)]);
    }

    #[test]
    fn fig1_scover_two_step_witness() {
        let p = fixtures::fig1();
        let v = decide_fixed(&p, &Problem::SCover, 2, DEFAULT_BUDGET).unwrap();
        let Verdict::Yes(Some(w)) = v else { panic!("expected yes, got {v:?}") };
        let a = p.message_id("a").unwrap();
        let b = p.message_id("b").unwrap();
        assert_eq!(w.initial, conf(&p, &[("q_in", 2)]));
        assert_eq!(
            w.steps,
            vec![
                (StepLabel::NonBlocking(a), conf(&p, &[("q_in", 1), ("q5", 1)])),
                (StepLabel::Rendezvous(b), conf(&p, &[("q1", 1), ("q6", 1)])),
            ]
        );
        assert!(w.replays(&p));
    }

    #[test]
    fn fig1_q4_not_coverable_at_four() {
        let p = fixtures::fig1().with_final(fixtures::fig1().state_id("q4").unwrap()).unwrap();
        assert_eq!(decide_fixed(&p, &Problem::SCover, 4, DEFAULT_BUDGET).unwrap(), Verdict::No);
    }

    #[test]
    fn fig1_synchro_on_q2() {
        let p = fixtures::fig1().with_final(fixtures::fig1().state_id("q2").unwrap()).unwrap();
        let v = decide_fixed(&p, &Problem::Synchro, 2, DEFAULT_BUDGET).unwrap();
        assert!(v.is_yes());
    }

    #[test]
    fn sweeps() {
        let p = fixtures::fig1();
        match decide_sweep(&p, &Problem::SCover, 4, DEFAULT_BUDGET).unwrap() {
            Verdict::Yes(Some(w)) => assert_eq!(w.initial.total(), 2),
            v => panic!("unexpected {v:?}"),
        }
        let q4 = p.with_final(p.state_id("q4").unwrap()).unwrap();
        assert_eq!(decide_sweep(&q4, &Problem::SCover, 6, DEFAULT_BUDGET).unwrap(), Verdict::Unknown(6));
        let target = conf(&p, &[("q3", 3)]);
        assert!(decide_sweep(&p, &Problem::CCover(target), 8, DEFAULT_BUDGET).unwrap().is_yes());
    }

    #[test]
    fn budget_is_a_distinct_error() {
        let p = fixtures::fig1();
        assert_eq!(
            reachable(&p, 6, 3),
            Err(ExploreError::ResourceLimit { procs: 6, budget: 3 })
        );
        assert_eq!(reachable(&p, 0, 10), Err(ExploreError::EmptyPopulation));
    }
}
