//! Stopping criteria for the iterative retrieval loop.
//!
//! Four termination tests, evaluated against the state of the current
//! iteration before the next activation:
//!
//! - ITER: a fixed iteration budget (the only guard against oscillating
//!   GWsTA runs);
//! - CONV: the active set repeated itself across two iterations;
//! - EQSC: all active fanals hold an equal score, i.e. no losers left;
//! - CLQ: the equal score ρ moreover satisfies `|V_a| = ρ − (γ − 1)`, i.e.
//!   the active set is exactly large enough to be a clique under a counting
//!   dynamic rule.
//!
//! CLQ firing does not prove the actives are the stored message; spurious
//! cliques satisfy it too.

use crate::score::SCORE_EPS;

/// One stopping criterion; a retrieval run composes a set of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    /// Stop after a fixed number of iterations.
    Iter(usize),
    /// Stop when the active set no longer changes.
    Conv,
    /// Stop when all active fanals score equally.
    Eqsc,
    /// Stop when equal scores and the active count certify a clique.
    Clq,
}

/// How a retrieval run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    EqualScores,
    CliqueFound,
    MaxIterations,
    /// Degenerate run: all-zero scores under GWsTA would flood the network,
    /// or the active set became empty.
    Failed,
}

/// Snapshot of a retrieval run at one iteration, as seen by the criteria.
///
/// Fanals appear as flat indices (see [`NetworkShape::flat_index`]
/// (crate::NetworkShape::flat_index)), sorted ascending; `scores[i]` is the
/// score of `active_now[i]`. `active_prev` is the active set of the previous
/// iteration when one exists.
#[derive(Debug, Clone, Copy)]
pub struct RunState<'a> {
    pub iteration: usize,
    pub active_now: &'a [usize],
    pub active_prev: Option<&'a [usize]>,
    pub scores: &'a [f64],
    pub gamma: f64,
}

/// ITER: stop once the iteration count reaches the budget.
pub fn check_iter(state: &RunState<'_>, max_iters: usize) -> bool {
    state.iteration >= max_iters
}

/// CONV: stop when two consecutive active sets are identical.
pub fn check_conv(state: &RunState<'_>) -> bool {
    match state.active_prev {
        Some(prev) => state.active_now == prev,
        None => false,
    }
}

/// EQSC: stop when all active scores are equal (vacuously true for a single
/// active fanal).
pub fn check_eqsc(state: &RunState<'_>) -> bool {
    if state.scores.is_empty() {
        return false;
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &s in state.scores {
        lo = lo.min(s);
        hi = hi.max(s);
    }
    hi - lo <= SCORE_EPS
}

/// CLQ: equal scores ρ with `|V_a| = ρ − (γ − 1)`.
///
/// Only meaningful when the dynamic rule counts fanals (SOS/SOM); the
/// engine's config validation rejects the combination with NORM.
pub fn check_clq(state: &RunState<'_>) -> bool {
    if !check_eqsc(state) {
        return false;
    }
    let rho = state.scores[0];
    let expected = rho - (state.gamma - 1.0);
    (state.active_now.len() as f64 - expected).abs() <= SCORE_EPS
}

/// Runs every enabled criterion, most specific first: CLQ, then EQSC, CONV
/// and ITER. Returns the status of the first that fires.
pub fn evaluate(criteria: &[Criterion], state: &RunState<'_>) -> Option<Status> {
    if criteria.contains(&Criterion::Clq) && check_clq(state) {
        return Some(Status::CliqueFound);
    }
    if criteria.contains(&Criterion::Eqsc) && check_eqsc(state) {
        return Some(Status::EqualScores);
    }
    if criteria.contains(&Criterion::Conv) && check_conv(state) {
        return Some(Status::Converged);
    }
    for c in criteria {
        if let Criterion::Iter(max) = c {
            if check_iter(state, *max) {
                return Some(Status::MaxIterations);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state<'a>(
        iteration: usize,
        active_now: &'a [usize],
        active_prev: Option<&'a [usize]>,
        scores: &'a [f64],
        gamma: f64,
    ) -> RunState<'a> {
        RunState { iteration, active_now, active_prev, scores, gamma }
    }

    #[test]
    fn iter_fires_at_the_budget() {
        let s = state(30, &[0], None, &[1.0], 1.0);
        assert!(check_iter(&s, 30));
        let s = state(1, &[0], None, &[1.0], 1.0);
        assert!(!check_iter(&s, 30));
        assert!(check_iter(&s, 1)); // single-pass retrieval
    }

    #[test]
    fn conv_compares_consecutive_sets() {
        let now = [1, 4, 9];
        let same = [1, 4, 9];
        let differs = [1, 4, 8];
        assert!(check_conv(&state(2, &now, Some(&same), &[1.0; 3], 1.0)));
        assert!(!check_conv(&state(2, &now, Some(&differs), &[1.0; 3], 1.0)));
        assert!(!check_conv(&state(1, &now, None, &[1.0; 3], 1.0)));
    }

    #[test]
    fn eqsc_requires_all_equal() {
        assert!(check_eqsc(&state(1, &[0, 1, 2, 3], None, &[4.0, 4.0, 4.0, 4.0], 1.0)));
        assert!(!check_eqsc(&state(1, &[0, 1, 2], None, &[5.0, 5.0, 4.0], 1.0)));
        assert!(check_eqsc(&state(1, &[7], None, &[3.0], 1.0)));
        assert!(!check_eqsc(&state(1, &[], None, &[], 1.0)));
    }

    #[test]
    fn clq_matches_count_against_score() {
        // four actives all scoring 4 with γ = 1: a 4-clique
        assert!(check_clq(&state(1, &[0, 1, 2, 3], None, &[4.0; 4], 1.0)));
        // 4, 4, 4, 3 is not settled yet
        assert!(!check_clq(&state(1, &[0, 1, 2, 3], None, &[4.0, 4.0, 4.0, 3.0], 1.0)));
        // k-clique under a large memory effect: scores k − 1 + γ
        let k = 5.0;
        let gamma = 1000.0;
        let scores = [k - 1.0 + gamma; 5];
        assert!(check_clq(&state(1, &[0, 1, 2, 3, 4], None, &scores, gamma)));
        // same scores, wrong cardinality
        assert!(!check_clq(&state(1, &[0, 1, 2, 3], None, &scores[..4], gamma)));
    }

    #[test]
    fn clq_implies_eqsc() {
        // quick scan over assorted states
        let cases: Vec<(Vec<usize>, Vec<f64>, f64)> = vec![
            (vec![0, 1, 2], vec![3.0, 3.0, 3.0], 1.0),
            (vec![0, 1], vec![2.0, 3.0], 1.0),
            (vec![0, 1, 2, 3], vec![4.0; 4], 1.0),
            (vec![5], vec![1.0], 1.0),
        ];
        for (active, scores, gamma) in &cases {
            let s = state(1, active, None, scores, *gamma);
            if check_clq(&s) {
                assert!(check_eqsc(&s));
            }
        }
    }

    #[test]
    fn evaluate_prefers_the_strongest_status() {
        let all = [Criterion::Clq, Criterion::Eqsc, Criterion::Conv, Criterion::Iter(1)];
        let now = [0, 1, 2, 3];
        let s = state(1, &now, Some(&now), &[4.0; 4], 1.0);
        assert_eq!(evaluate(&all, &s), Some(Status::CliqueFound));
        // no CLQ in the set: EQSC wins over CONV
        let no_clq = [Criterion::Eqsc, Criterion::Conv, Criterion::Iter(1)];
        assert_eq!(evaluate(&no_clq, &s), Some(Status::EqualScores));
        let conv_iter = [Criterion::Conv, Criterion::Iter(1)];
        assert_eq!(evaluate(&conv_iter, &s), Some(Status::Converged));
        assert_eq!(evaluate(&[Criterion::Iter(1)], &s), Some(Status::MaxIterations));
        assert_eq!(evaluate(&[Criterion::Iter(5)], &s), None);
    }
}
