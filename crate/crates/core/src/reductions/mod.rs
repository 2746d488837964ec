//! Compilers between rendez-vous protocols, counter machines and NB-VAS.
//!
//! Every compiler is deterministic: fresh names are generated in a fixed order, and a
//! name clashing with one taken from the input gets primes appended until it is unique.

use std::collections::HashSet;
use std::fmt;

use crate::machines::MachineError;
use crate::model::ModelError;

mod cm2p;
mod cm2vas;
mod minsky;
mod p2cm;

pub use cm2p::nbrcm_to_protocol;
pub use cm2vas::{nbcm_to_nbvas, split_self_loops};
pub use minsky::{minsky_to_protocol, MinskyMachine};
pub use p2cm::{protocol_to_nbcm, NbcmImage};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReductionError {
    #[error("target configuration is empty")]
    EmptyTarget,
    #[error("target location index {0} out of range")]
    BadTarget(usize),
    #[error("not a test-free machine with restore: {0}")]
    NotNbRestore(String),
    #[error("machine has a zero test ({0})")]
    HasZeroTest(String),
    #[error("not a two-counter machine: {0}")]
    NotMinsky(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Machine(#[from] MachineError),
}

/// Sizes and provenance of the names a compiler invented.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TranslationReport {
    pub source_size: usize,
    pub target_size: usize,
    /// `(fresh name, what it stands for)`, in creation order.
    pub names: Vec<(String, String)>,
}

impl TranslationReport {
    fn note(&mut self, name: &str, role: impl Into<String>) {
        self.names.push((name.to_string(), role.into()));
    }
}

impl fmt::Display for TranslationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "source size {}, target size {}", self.source_size, self.target_size)?;
        for (name, role) in &self.names {
            writeln!(f, "  {name}: {role}")?;
        }
        Ok(())
    }
}

/// Hands out names that do not clash with anything reserved so far.
#[derive(Debug, Clone, Default)]
pub(crate) struct NameAllocator {
    taken: HashSet<String>,
}

impl NameAllocator {
    pub fn new<I, S>(reserved: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        NameAllocator { taken: reserved.into_iter().map(Into::into).collect() }
    }

    pub fn fresh(&mut self, base: &str) -> String {
        let mut name = base.to_string();
        while self.taken.contains(&name) {
            name.push('\'');
        }
        self.taken.insert(name.clone());
        name
    }
}
