//! The retrieval engine: probe insertion, phase 1, the phase-2 loop and
//! result extraction.
//!
//! A run executes, in order: insert the probe; apply the dynamic rule;
//! phase 1: apply the activation rule (GLsKO uses its phase-1 behavior,
//! i.e. GWTA plus lockout) and re-apply the dynamic rule; phase 2: loop
//! checking the stopping criteria on the current state and, while none
//! fires, applying the activation rule then the dynamic rule again. The
//! criteria run *before* each phase-2 activation so that a clique produced
//! by phase 1 is recognized without a wasted eviction.
//!
//! Iteration counting: phase 1 is iteration 1; every phase-2
//! activation+scoring pair adds one.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::activation::{
    apply_glsko_phase1, apply_glsko_phase2, apply_gwsta, ActivationError, ActivationRule,
};
use crate::network::{Error as NetworkError, FanalId, Message, Network, NetworkShape};
use crate::score::{score_into, DynamicRule, ScoreMap};
use crate::stopping::{evaluate, Criterion, RunState};

pub use crate::stopping::Status;

/// A retrieval run's full parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalConfig {
    pub dynamic: DynamicRule,
    pub activation: ActivationRule,
    /// Non-empty set of stopping criteria, composed by logical OR.
    pub criteria: Vec<Criterion>,
    /// Memory effect γ added to active fanals' scores; constant over the run.
    pub gamma: f64,
    /// Seed of the run-owned rng (μ-capped GLsKO evictions).
    pub seed: u64,
    /// Re-check pairwise connections whenever the clique criterion fires.
    pub strict_clique: bool,
}

impl RetrievalConfig {
    /// Checks the cross-field rules. Returns non-fatal warnings on success.
    ///
    /// - GWsTA can oscillate forever, so it must carry an ITER criterion.
    /// - CLQ compares scores against fanal counts, which is meaningless
    ///   under NORM.
    /// - GLsKO strictly shrinks the active set, so CONV can never fire
    ///   (warning only).
    pub fn validate(&self) -> Result<Vec<String>, ConfigError> {
        if self.criteria.is_empty() {
            return Err(ConfigError::NoCriteria);
        }
        if self.gamma.is_nan() || self.gamma < 0.0 {
            return Err(ConfigError::NegativeGamma { gamma: self.gamma });
        }
        let has_iter = self.criteria.iter().any(|c| matches!(c, Criterion::Iter(_)));
        for c in &self.criteria {
            if let Criterion::Iter(max) = c {
                if *max == 0 {
                    return Err(ConfigError::ZeroIterationCap);
                }
            }
        }
        match &self.activation {
            ActivationRule::Gwsta(p) => {
                if p.alpha == 0 {
                    return Err(ConfigError::ZeroAlpha);
                }
                if !has_iter {
                    return Err(ConfigError::GwstaWithoutIter);
                }
            }
            ActivationRule::Glsko(p) => {
                if p.beta == 0 {
                    return Err(ConfigError::ZeroBeta);
                }
                if p.mu == Some(0) {
                    return Err(ConfigError::ZeroMu);
                }
            }
        }
        if self.criteria.contains(&Criterion::Clq) && !self.dynamic.is_counting() {
            return Err(ConfigError::CliqueCriterionWithNorm);
        }
        let mut warnings = Vec::new();
        if matches!(self.activation, ActivationRule::Glsko(_))
            && self.criteria.contains(&Criterion::Conv)
        {
            warnings.push(
                "CONV never fires under GLsKO: the active set shrinks every iteration"
                    .to_string(),
            );
        }
        Ok(warnings)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("at least one stopping criterion is required")]
    NoCriteria,
    #[error("GWsTA needs an iteration cap among its criteria to guarantee termination")]
    GwstaWithoutIter,
    #[error("the clique criterion needs a counting dynamic rule (SOS or SOM), not NORM")]
    CliqueCriterionWithNorm,
    #[error("memory effect must be non-negative, got {gamma}")]
    NegativeGamma { gamma: f64 },
    #[error("alpha must be at least 1")]
    ZeroAlpha,
    #[error("beta must be at least 1")]
    ZeroBeta,
    #[error("mu, when set, must be at least 1")]
    ZeroMu,
    #[error("iteration cap must be at least 1")]
    ZeroIterationCap,
}

#[derive(Debug, Error, PartialEq)]
pub enum RetrieveError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Activation(#[from] ActivationError),
    #[error(transparent)]
    Message(#[from] NetworkError),
    #[error("the network has no stored message to retrieve")]
    EmptyNetwork,
}

/// Outcome of one retrieval run.
#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalResult {
    /// 1-based active fanal indices per cluster; outer position k is
    /// cluster k+1.
    pub actives_by_cluster: Vec<Vec<usize>>,
    pub iterations: usize,
    pub status: Status,
    /// Some cluster holds more than one active fanal.
    pub ambiguous: bool,
    /// Strict-mode pairwise edge check of a CLQ stop; `None` unless the run
    /// ended with [`Status::CliqueFound`] under `strict_clique`.
    pub clique_verified: Option<bool>,
}

impl RetrievalResult {
    /// All active fanals in cluster-then-index order.
    pub fn active_fanals(&self) -> Vec<FanalId> {
        let mut out = Vec::new();
        for (c, indices) in self.actives_by_cluster.iter().enumerate() {
            for &j in indices {
                out.push(FanalId::new(c + 1, j));
            }
        }
        out
    }

    pub fn active_count(&self) -> usize {
        self.actives_by_cluster.iter().map(Vec::len).sum()
    }
}

/// Decoded form of a retrieval result.
#[derive(Debug, Clone, PartialEq)]
pub enum DecodedOutput {
    /// Every nonempty cluster held exactly one active fanal.
    Message(Message),
    /// Some cluster held several candidates (or none were active at all);
    /// carries the per-cluster active lists.
    Ambiguous(Vec<Vec<usize>>),
}

/// Runs the full retrieval process on a probe.
///
/// Resets activity and thresholds, inserts the probe and iterates until a
/// stopping criterion fires. Degenerate states (all-zero scores about to
/// flood a GWsTA activation, or an empty active set) end the run with
/// [`Status::Failed`] instead of an error.
pub fn retrieve(
    net: &mut Network,
    probe: &Message,
    config: &RetrievalConfig,
) -> Result<RetrievalResult, RetrieveError> {
    config.validate()?;
    check_alpha(net, config)?;
    if net.edge_count() == 0 {
        return Err(RetrieveError::EmptyNetwork);
    }
    net.reset_state();
    net.insert_probe(probe)?;
    run(net, config, true)
}

/// Runs retrieval from the network's current activity state, treating it as
/// the output of phase 1.
///
/// Useful to drive the phase-2 loop over a hand-built active set. Under
/// GLsKO the idle fanals are locked out first, exactly as phase 1 would
/// have left them. Thresholds and activity are otherwise taken as found.
pub fn retrieve_from_state(
    net: &mut Network,
    config: &RetrievalConfig,
) -> Result<RetrievalResult, RetrieveError> {
    config.validate()?;
    check_alpha(net, config)?;
    if net.edge_count() == 0 {
        return Err(RetrieveError::EmptyNetwork);
    }
    run(net, config, false)
}

fn check_alpha(net: &Network, config: &RetrievalConfig) -> Result<(), RetrieveError> {
    if let ActivationRule::Gwsta(p) = &config.activation {
        let n = net.shape().fanal_count();
        if p.alpha > n {
            return Err(ActivationError::AlphaOutOfRange { alpha: p.alpha, available: n }.into());
        }
    }
    Ok(())
}

fn run(
    net: &mut Network,
    config: &RetrievalConfig,
    fresh: bool,
) -> Result<RetrievalResult, RetrieveError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut scores = ScoreMap::zeroed(*net.shape());
    score_into(net, config.dynamic, config.gamma, &mut scores);

    let mut prev: Option<Vec<usize>> = None;
    if fresh {
        prev = Some(net.active_flats());
        if scores.all_zero() {
            // both rules start from a winner-take-all pass; a flat zero
            // score map would activate the whole network
            return Ok(build_result(net, 1, Status::Failed, config));
        }
        match &config.activation {
            ActivationRule::Gwsta(p) => {
                apply_gwsta(net, &scores, p)?;
            }
            ActivationRule::Glsko(_) => apply_glsko_phase1(net, &scores),
        }
        score_into(net, config.dynamic, config.gamma, &mut scores);
    } else if matches!(config.activation, ActivationRule::Glsko(_)) {
        for flat in 0..net.shape().fanal_count() {
            if !net.is_active_flat(flat) {
                net.set_threshold_flat(flat, f64::INFINITY);
            }
        }
    }

    let mut iteration = 1usize;
    loop {
        let actives = net.active_flats();
        if actives.is_empty() {
            return Ok(build_result(net, iteration, Status::Failed, config));
        }
        let active_scores: Vec<f64> = actives.iter().map(|&f| scores.value_flat(f)).collect();
        let state = RunState {
            iteration,
            active_now: &actives,
            active_prev: prev.as_deref(),
            scores: &active_scores,
            gamma: config.gamma,
        };
        if let Some(status) = evaluate(&config.criteria, &state) {
            return Ok(build_result(net, iteration, status, config));
        }
        match &config.activation {
            ActivationRule::Gwsta(p) => {
                if scores.all_zero() {
                    return Ok(build_result(net, iteration, Status::Failed, config));
                }
                apply_gwsta(net, &scores, p)?;
            }
            ActivationRule::Glsko(p) => {
                apply_glsko_phase2(net, &scores, p, &mut rng)?;
            }
        }
        prev = Some(actives);
        iteration += 1;
        score_into(net, config.dynamic, config.gamma, &mut scores);
    }
}

fn build_result(
    net: &Network,
    iterations: usize,
    status: Status,
    config: &RetrievalConfig,
) -> RetrievalResult {
    let shape = net.shape();
    let mut actives_by_cluster = vec![Vec::new(); shape.clusters()];
    for flat in net.active_flats() {
        let fanal = shape.fanal_at(flat);
        actives_by_cluster[fanal.cluster - 1].push(fanal.index);
    }
    let ambiguous = actives_by_cluster.iter().any(|c| c.len() > 1);
    let clique_verified = if config.strict_clique && status == Status::CliqueFound {
        Some(verify_clique(net))
    } else {
        None
    };
    RetrievalResult { actives_by_cluster, iterations, status, ambiguous, clique_verified }
}

/// Checks that the active fanals are pairwise connected (which also requires
/// pairwise distinct clusters).
fn verify_clique(net: &Network) -> bool {
    let actives = net.active_flats();
    let shape = net.shape();
    for (i, &a) in actives.iter().enumerate() {
        for &b in &actives[i + 1..] {
            if shape.cluster_of(a) == shape.cluster_of(b) || !net.edge_flat(a, b) {
                return false;
            }
        }
    }
    true
}

/// Decodes a result into a message when every nonempty cluster holds exactly
/// one active fanal; an empty active set is reported as ambiguous.
pub fn result_to_message(result: &RetrievalResult, shape: &NetworkShape) -> DecodedOutput {
    let mut segments = vec![0u32; shape.clusters()];
    let mut any = false;
    for (c, indices) in result.actives_by_cluster.iter().enumerate() {
        match indices.len() {
            0 => {}
            1 => {
                segments[c] = indices[0] as u32;
                any = true;
            }
            _ => return DecodedOutput::Ambiguous(result.actives_by_cluster.clone()),
        }
    }
    if any {
        DecodedOutput::Message(Message::new(segments))
    } else {
        DecodedOutput::Ambiguous(result.actives_by_cluster.clone())
    }
}
