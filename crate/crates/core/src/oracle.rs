//! Brute-force maximum-likelihood baseline.
//!
//! Retrieval by scanning the explicit list of stored messages: under a
//! uniform message prior and an erasure channel, the ML posterior support is
//! exactly the set of stored messages that agree with the probe on all of
//! its nonzero segments. The oracle's error rate lower-bounds every network
//! rule combination on the same probes.

use rand::Rng;

use crate::network::{Error, Message};

/// How the oracle scores an ambiguous candidate set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieBreak {
    /// Any ambiguity (two or more consistent messages) counts as an error.
    Strict,
    /// Pick one consistent message uniformly at random; an error only when
    /// the pick is wrong.
    Random,
}

/// The explicit list of stored messages, retained alongside the network.
#[derive(Debug, Clone, Default)]
pub struct MessageStore {
    messages: Vec<Message>,
}

impl MessageStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_messages(messages: Vec<Message>) -> Self {
        Self { messages }
    }

    pub fn push(&mut self, message: Message) {
        self.messages.push(message);
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    pub fn get(&self, index: usize) -> &Message {
        &self.messages[index]
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    /// Indices of every stored message consistent with the probe, i.e.
    /// agreeing on all of the probe's nonzero segments.
    ///
    /// An all-zero probe is vacuously consistent with everything. An empty
    /// result is a valid (failed) outcome.
    pub fn retrieve(&self, probe: &Message) -> Vec<usize> {
        let required: Vec<(usize, u32)> = probe
            .segments()
            .iter()
            .enumerate()
            .filter(|&(_, &v)| v != 0)
            .map(|(i, &v)| (i, v))
            .collect();
        self.messages
            .iter()
            .enumerate()
            .filter(|(_, m)| {
                let segments = m.segments();
                required.iter().all(|&(i, v)| segments.get(i) == Some(&v))
            })
            .map(|(i, _)| i)
            .collect()
    }

    /// Monte Carlo error rate under the strict ambiguity convention:
    /// a trial succeeds only when the candidate list is exactly the probed
    /// message.
    pub fn error_rate<R: Rng + ?Sized>(
        &self,
        trials: usize,
        erasures: usize,
        rng: &mut R,
    ) -> Result<f64, Error> {
        self.error_rate_with(trials, erasures, rng, TieBreak::Strict)
    }

    /// [`error_rate`](Self::error_rate) with an explicit ambiguity policy.
    pub fn error_rate_with<R: Rng + ?Sized>(
        &self,
        trials: usize,
        erasures: usize,
        rng: &mut R,
        tie_break: TieBreak,
    ) -> Result<f64, Error> {
        assert!(trials >= 1, "at least one trial");
        assert!(!self.is_empty(), "empty store");
        let mut errors = 0usize;
        for _ in 0..trials {
            let target = rng.gen_range(0..self.messages.len());
            let probe = self.messages[target].erase_segments(erasures, rng)?;
            let candidates = self.retrieve(&probe);
            let ok = match tie_break {
                TieBreak::Strict => candidates == [target],
                TieBreak::Random => {
                    !candidates.is_empty()
                        && candidates[rng.gen_range(0..candidates.len())] == target
                }
            };
            if !ok {
                errors += 1;
            }
        }
        Ok(errors as f64 / trials as f64)
    }
}
