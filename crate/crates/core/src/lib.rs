//! Sparse associative memory built on networks of neural cliques.
//!
//! Messages are sparse vectors over `[[0, l]]^χ`: the network is a χ-partite
//! binary graph of χ clusters with l fanals (vertices) each, and every stored
//! message becomes a clique over the fanals selected by its nonzero segments.
//! Retrieval recovers a stored message from a partially erased probe by
//! alternating a *dynamic rule* (scoring every fanal) with an *activation
//! rule* (electing the next active set) until a *stopping criterion* fires.
//!
//! The crate provides:
//!
//! - [`Network`]: topology, binary weight matrix, per-fanal activity and
//!   activation thresholds, message storage and probe insertion;
//! - [`score`]: the SUM-OF-SUM, NORMALIZATION and SUM-OF-MAX dynamic rules;
//! - [`activation`]: the GWsTA rule (GWTA as the `α = 1` case) and the
//!   two-phase GLsKO rule;
//! - [`stopping`]: the ITER, CONV, EQSC and CLQ termination tests;
//! - [`engine`]: the full retrieval loop tying the above together;
//! - [`oracle`]: a brute-force maximum-likelihood baseline over the explicit
//!   list of stored messages.

pub mod activation;
pub mod engine;
pub mod network;
pub mod oracle;
pub mod score;
pub mod snapshot;
pub mod stopping;

pub use activation::{
    apply_glsko_phase1, apply_glsko_phase2, apply_gwsta, gwsta_threshold, ActivationError,
    ActivationRule, GlskoParams, GwstaParams,
};
pub use engine::{
    result_to_message, retrieve, retrieve_from_state, ConfigError, DecodedOutput, RetrievalConfig,
    RetrievalResult, RetrieveError, Status,
};
pub use network::{random_message, Error, FanalId, Message, Network, NetworkShape};
pub use oracle::{MessageStore, TieBreak};
pub use score::{score, score_norm, score_som, score_sos, DynamicRule, ScoreMap, SCORE_EPS};
pub use snapshot::SnapshotError;
pub use stopping::{Criterion, RunState};
