//! Activation rules: electing the next active set from a score map.
//!
//! GWsTA keeps every fanal scoring at least the network-wide threshold θ,
//! where θ is the smallest of the α highest scores counted with multiplicity
//! (α = 1 is the plain global winner-take-all, GWTA). GLsKO works in two
//! phases: phase 1 applies GWTA and permanently locks out everything left
//! inactive (σ → ∞); phase 2 repeatedly kicks out the active fanals holding
//! the β lowest distinct nonzero scores, optionally capped at μ evictions
//! per iteration with random tie-breaking.
//!
//! Note the deliberate asymmetry: α counts scores *with multiplicity* while
//! β counts *distinct* score values. Both are forced by the rules'
//! worked-out behavior on tied scores.

use rand::Rng;
use thiserror::Error;

use crate::network::Network;
use crate::score::{ScoreMap, SCORE_EPS};

#[derive(Debug, Error, PartialEq)]
pub enum ActivationError {
    #[error("alpha {alpha} exceeds the number of scores ({available})")]
    AlphaOutOfRange { alpha: usize, available: usize },
    #[error("no active fanal to elect losers from")]
    NoActiveFanals,
}

/// GWsTA parameter: the θ threshold is the minimum of the α highest scores,
/// duplicates counted individually. α = 1 is GWTA; α equal to the message
/// order is the usual choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GwstaParams {
    pub alpha: usize,
}

impl GwstaParams {
    pub fn new(alpha: usize) -> Self {
        Self { alpha }
    }

    /// Plain global winner-take-all.
    pub fn gwta() -> Self {
        Self { alpha: 1 }
    }
}

/// GLsKO parameters: β is the number of lowest distinct nonzero score values
/// forming the loser list; μ, when set, caps how many fanals are deactivated
/// per iteration (chosen lowest-score-first, ties broken at random).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GlskoParams {
    pub beta: usize,
    pub mu: Option<usize>,
}

impl GlskoParams {
    pub fn new(beta: usize, mu: Option<usize>) -> Self {
        Self { beta, mu }
    }
}

/// The activation rule of a retrieval run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActivationRule {
    Gwsta(GwstaParams),
    Glsko(GlskoParams),
}

/// Threshold θ for GWsTA: the minimum of the multiset of the α largest
/// scores. Errors when α exceeds the number of scores.
pub fn gwsta_threshold(scores: &ScoreMap, alpha: usize) -> Result<f64, ActivationError> {
    if alpha == 0 || alpha > scores.len() {
        return Err(ActivationError::AlphaOutOfRange { alpha, available: scores.len() });
    }
    let mut sorted = scores.values().to_vec();
    let pivot = alpha - 1;
    sorted.select_nth_unstable_by(pivot, |a, b| b.total_cmp(a));
    Ok(sorted[pivot])
}

/// Applies GWsTA: a fanal stays (or becomes) active iff λ ≥ θ and θ ≥ σ.
///
/// The second guard compares θ, not λ, against the fanal's activation
/// threshold; with σ restricted to {0, ∞}, as every run here leaves it, the
/// two readings coincide. Returns the θ used.
pub fn apply_gwsta(
    net: &mut Network,
    scores: &ScoreMap,
    params: &GwstaParams,
) -> Result<f64, ActivationError> {
    let theta = gwsta_threshold(scores, params.alpha)?;
    for flat in 0..net.shape().fanal_count() {
        let elect =
            scores.value_flat(flat) >= theta - SCORE_EPS && theta >= net.threshold_flat(flat);
        net.set_active_flat(flat, elect);
    }
    Ok(theta)
}

/// GLsKO phase 1: apply GWTA, then set σ = ∞ on every fanal left inactive.
/// The rest of the run never looks outside the activated subset again.
pub fn apply_glsko_phase1(net: &mut Network, scores: &ScoreMap) {
    apply_gwsta(net, scores, &GwstaParams::gwta()).expect("a validated network has fanals");
    for flat in 0..net.shape().fanal_count() {
        if !net.is_active_flat(flat) {
            net.set_threshold_flat(flat, f64::INFINITY);
        }
    }
}

/// GLsKO phase 2: kick the losers out.
///
/// Active fanals with a zero score are deactivated unconditionally. The
/// loser list then gathers the active fanals at the β lowest distinct
/// nonzero score values; θ is the highest score in that list. With μ unset,
/// every active fanal scoring ≤ θ is deactivated; with μ set, exactly
/// `min(μ, losers)` are deactivated, lowest scores first, ties within one
/// score value broken uniformly at random. Every deactivated fanal gets
/// σ = ∞. Returns the number of fanals deactivated.
pub fn apply_glsko_phase2<R: Rng + ?Sized>(
    net: &mut Network,
    scores: &ScoreMap,
    params: &GlskoParams,
    rng: &mut R,
) -> Result<usize, ActivationError> {
    debug_assert!(params.beta >= 1);
    let actives = net.active_flats();
    if actives.is_empty() {
        return Err(ActivationError::NoActiveFanals);
    }

    let mut evicted = 0;
    let mut scored: Vec<(usize, f64)> = Vec::with_capacity(actives.len());
    for flat in actives {
        let lambda = scores.value_flat(flat);
        if lambda.abs() <= SCORE_EPS {
            // a zero-score active fanal is connected to nothing relevant
            net.set_active_flat(flat, false);
            net.set_threshold_flat(flat, f64::INFINITY);
            evicted += 1;
        } else {
            scored.push((flat, lambda));
        }
    }
    if scored.is_empty() {
        return Ok(evicted);
    }

    scored.sort_unstable_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    // group ascending scores into distinct values (SCORE_EPS-wide ties)
    let mut groups: Vec<std::ops::Range<usize>> = Vec::new();
    let mut start = 0;
    for i in 1..scored.len() {
        if scored[i].1 - scored[i - 1].1 > SCORE_EPS {
            groups.push(start..i);
            start = i;
        }
    }
    groups.push(start..scored.len());

    let loser_groups = &groups[..params.beta.min(groups.len())];
    let losers: usize = loser_groups.iter().map(|g| g.len()).sum();

    match params.mu {
        None => {
            // θ is the top of the loser list; survivors need λ > θ
            let theta = scored[loser_groups.last().expect("beta >= 1").end - 1].1;
            for &(flat, lambda) in &scored {
                if !(lambda > theta + SCORE_EPS && theta >= net.threshold_flat(flat)) {
                    net.set_active_flat(flat, false);
                    net.set_threshold_flat(flat, f64::INFINITY);
                    evicted += 1;
                }
            }
        }
        Some(mu) => {
            let mut quota = mu.min(losers);
            for group in loser_groups {
                if quota == 0 {
                    break;
                }
                let members = &scored[group.clone()];
                if quota >= members.len() {
                    for &(flat, _) in members {
                        net.set_active_flat(flat, false);
                        net.set_threshold_flat(flat, f64::INFINITY);
                    }
                    quota -= members.len();
                    evicted += members.len();
                } else {
                    for pick in rand::seq::index::sample(rng, members.len(), quota) {
                        let (flat, _) = members[pick];
                        net.set_active_flat(flat, false);
                        net.set_threshold_flat(flat, f64::INFINITY);
                    }
                    evicted += quota;
                    quota = 0;
                }
            }
        }
    }
    Ok(evicted)
}
