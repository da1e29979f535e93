//! Dynamic rules: computing the score λ of every fanal from the activity
//! state.
//!
//! A score estimates the chance that a fanal belongs to a large clique within
//! the active set. Three rules are provided:
//!
//! - SUM-OF-SUM (`SOS`): number of active fanals connected to the fanal;
//! - NORMALIZATION (`NORM`): like SOS, but each cluster's contribution is
//!   divided by that cluster's active count `|v_i|`;
//! - SUM-OF-MAX (`SOM`): number of *clusters* holding at least one active
//!   fanal connected to the fanal.
//!
//! Every rule adds the memory effect γ·v to a fanal's own score, and scores
//! are always computed for all fanals of the network. Scores live in `f64`:
//! SOS and SOM values are exact small integers there; NORM values carry the
//! usual floating-point error of summed 1/|v_i| terms, which is why score
//! comparisons elsewhere use the [`SCORE_EPS`] tie tolerance.

use std::fmt;
use std::str::FromStr;

use crate::network::{Network, NetworkShape};
use crate::FanalId;

/// Tie tolerance for score comparisons.
///
/// NORM scores are sums of 1/|v_i| terms and not exactly representable, so
/// activation thresholding and the equal-score termination tests treat two
/// scores within this distance as equal. SOS/SOM scores are exact integers
/// (for integral γ) and are unaffected.
pub const SCORE_EPS: f64 = 1e-9;

/// Which dynamic rule to apply each iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DynamicRule {
    SumOfSum,
    Normalization,
    SumOfMax,
}

impl DynamicRule {
    /// Whether scores produced by the rule are fanal counts. Only counting
    /// rules can feed the clique stopping criterion.
    pub fn is_counting(&self) -> bool {
        !matches!(self, DynamicRule::Normalization)
    }
}

impl fmt::Display for DynamicRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            DynamicRule::SumOfSum => "sos",
            DynamicRule::Normalization => "norm",
            DynamicRule::SumOfMax => "som",
        };
        f.write_str(name)
    }
}

impl FromStr for DynamicRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sos" | "sum-of-sum" => Ok(DynamicRule::SumOfSum),
            "norm" | "normalization" => Ok(DynamicRule::Normalization),
            "som" | "sum-of-max" => Ok(DynamicRule::SumOfMax),
            other => Err(format!("unknown dynamic rule `{other}`")),
        }
    }
}

/// One score per fanal, indexed like the network's flat fanal order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMap {
    shape: NetworkShape,
    values: Vec<f64>,
}

impl ScoreMap {
    pub fn zeroed(shape: NetworkShape) -> Self {
        let n = shape.fanal_count();
        ScoreMap { shape, values: vec![0.0; n] }
    }

    /// Wraps explicit per-fanal values, e.g. to drive an activation rule
    /// with hand-built scores. Panics if the length does not match.
    pub fn from_values(shape: NetworkShape, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), shape.fanal_count(), "one score per fanal");
        ScoreMap { shape, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Score of one fanal. Panics on an address outside the shape.
    pub fn value(&self, fanal: FanalId) -> f64 {
        let flat = self.shape.flat_index(fanal).expect("fanal outside the score map's shape");
        self.values[flat]
    }

    pub(crate) fn value_flat(&self, flat: usize) -> f64 {
        self.values[flat]
    }

    /// True when every score is zero (within [`SCORE_EPS`]).
    pub fn all_zero(&self) -> bool {
        self.values.iter().all(|v| v.abs() <= SCORE_EPS)
    }
}

/// Scores every fanal under the chosen rule with memory effect `gamma`.
pub fn score(net: &Network, rule: DynamicRule, gamma: f64) -> ScoreMap {
    let mut out = ScoreMap::zeroed(*net.shape());
    score_into(net, rule, gamma, &mut out);
    out
}

/// In-place variant of [`score`] reusing an existing map's storage.
pub fn score_into(net: &Network, rule: DynamicRule, gamma: f64, out: &mut ScoreMap) {
    assert_eq!(out.shape, *net.shape(), "score map shape mismatch");
    match rule {
        DynamicRule::SumOfSum => score_sos_into(net, gamma, out),
        DynamicRule::Normalization => score_norm_into(net, gamma, out),
        DynamicRule::SumOfMax => score_som_into(net, gamma, out),
    }
}

/// SUM-OF-SUM: λ = γ·v + count of active fanals connected to the fanal.
pub fn score_sos(net: &Network, gamma: f64) -> ScoreMap {
    let mut out = ScoreMap::zeroed(*net.shape());
    score_sos_into(net, gamma, &mut out);
    out
}

fn score_sos_into(net: &Network, gamma: f64, out: &mut ScoreMap) {
    let activity = net.activity_words();
    for flat in 0..net.shape().fanal_count() {
        let row = net.row(flat);
        let connected: u32 = row
            .iter()
            .zip(activity)
            .map(|(r, a)| (r & a).count_ones())
            .sum();
        let own = if net.is_active_flat(flat) { gamma } else { 0.0 };
        out.values[flat] = own + connected as f64;
    }
}

/// NORMALIZATION: each cluster's contribution is divided by its active count,
/// so a crowded cluster cannot dominate the score. Empty clusters contribute
/// nothing (0/0 is taken as 0).
pub fn score_norm(net: &Network, gamma: f64) -> ScoreMap {
    let mut out = ScoreMap::zeroed(*net.shape());
    score_norm_into(net, gamma, &mut out);
    out
}

fn score_norm_into(net: &Network, gamma: f64, out: &mut ScoreMap) {
    let activity = net.activity_words();
    let per_cluster = net.active_per_cluster();
    let spans = net.spans();
    for flat in 0..net.shape().fanal_count() {
        let row = net.row(flat);
        let mut lambda = if net.is_active_flat(flat) { gamma } else { 0.0 };
        for (cluster, span) in spans.iter().enumerate() {
            let actives = per_cluster[cluster];
            if actives == 0 {
                continue;
            }
            let mut connected = 0u32;
            for word in span.first()..=span.last() {
                connected += (row[word] & activity[word] & span.mask_for(word)).count_ones();
            }
            if connected > 0 {
                lambda += connected as f64 / actives as f64;
            }
        }
        out.values[flat] = lambda;
    }
}

/// SUM-OF-MAX: λ = γ·v + number of clusters holding at least one active
/// fanal connected to the fanal.
pub fn score_som(net: &Network, gamma: f64) -> ScoreMap {
    let mut out = ScoreMap::zeroed(*net.shape());
    score_som_into(net, gamma, &mut out);
    out
}

fn score_som_into(net: &Network, gamma: f64, out: &mut ScoreMap) {
    let activity = net.activity_words();
    let spans = net.spans();
    for flat in 0..net.shape().fanal_count() {
        let row = net.row(flat);
        let mut clusters = 0u32;
        for span in spans {
            for word in span.first()..=span.last() {
                if row[word] & activity[word] & span.mask_for(word) != 0 {
                    clusters += 1;
                    break;
                }
            }
        }
        let own = if net.is_active_flat(flat) { gamma } else { 0.0 };
        out.values[flat] = own + clusters as f64;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Message, Network};

    /// The two-fanal scoring demonstration: a probe fanal connected to one
    /// active fanal in each of three distinct clusters, against a fanal
    /// connected to three actives crowded into a single cluster plus one
    /// more elsewhere.
    ///
    /// Layout (χ=5, l=3): P=(1,1), singles at (2,1) and (3,1), the crowded
    /// cluster is 4 with (4,1..3) all active, Q=(5,1).
    fn crowded_cluster_fixture() -> Network {
        let mut net = Network::with_shape(5, 3).unwrap();
        let chi = 5;
        let pairs: &[&[(usize, u32)]] = &[
            &[(1, 1), (2, 1)],
            &[(1, 1), (3, 1)],
            &[(1, 1), (4, 1)],
            &[(5, 1), (4, 1)],
            &[(5, 1), (4, 2)],
            &[(5, 1), (4, 3)],
            &[(5, 1), (2, 1)],
        ];
        for p in pairs {
            net.store(&Message::from_pairs(chi, p)).unwrap();
        }
        for f in [(2, 1), (3, 1), (4, 1), (4, 2), (4, 3)] {
            net.set_active(FanalId::new(f.0, f.1), true).unwrap();
        }
        net
    }

    #[test]
    fn sos_favors_the_crowded_fanal() {
        let net = crowded_cluster_fixture();
        let scores = score_sos(&net, 0.0);
        assert_eq!(scores.value(FanalId::new(1, 1)), 3.0);
        assert_eq!(scores.value(FanalId::new(5, 1)), 4.0);
    }

    #[test]
    fn norm_discounts_the_crowded_cluster() {
        let net = crowded_cluster_fixture();
        let scores = score_norm(&net, 0.0);
        assert_eq!(scores.value(FanalId::new(1, 1)), 1.0 + 1.0 + 1.0 / 3.0);
        assert_eq!(scores.value(FanalId::new(5, 1)), 2.0);
    }

    #[test]
    fn som_counts_clusters_not_fanals() {
        let net = crowded_cluster_fixture();
        let scores = score_som(&net, 0.0);
        assert_eq!(scores.value(FanalId::new(1, 1)), 3.0);
        assert_eq!(scores.value(FanalId::new(5, 1)), 2.0);
    }

    #[test]
    fn empty_activity_scores_zero_everywhere() {
        let mut net = Network::with_shape(4, 4).unwrap();
        net.store(&Message::new(vec![1, 2, 3, 4])).unwrap();
        for rule in [DynamicRule::SumOfSum, DynamicRule::Normalization, DynamicRule::SumOfMax] {
            let scores = score(&net, rule, 1.0);
            assert!(scores.all_zero());
        }
    }

    #[test]
    fn fully_active_clique_scores() {
        let mut net = Network::with_shape(6, 12).unwrap();
        let m = Message::new(vec![0, 10, 7, 0, 12, 11]);
        net.store(&m).unwrap();
        net.insert_probe(&m).unwrap();
        let sos = score_sos(&net, 1.0);
        let som = score_som(&net, 1.0);
        for fanal in m.fanals(net.shape()).unwrap() {
            assert_eq!(sos.value(fanal), 4.0); // 3 neighbors + γ
            assert_eq!(som.value(fanal), 4.0); // 3 clusters + γ
        }
    }

    #[test]
    fn norm_equals_sos_with_single_active_per_cluster() {
        let mut net = Network::with_shape(6, 12).unwrap();
        let m = Message::new(vec![0, 10, 7, 0, 12, 11]);
        net.store(&m).unwrap();
        net.insert_probe(&m).unwrap();
        assert_eq!(score_norm(&net, 0.0), score_sos(&net, 0.0));
        assert_eq!(score_norm(&net, 0.0), score_som(&net, 0.0));
    }

    #[test]
    fn dynamic_rule_parses_case_insensitively() {
        assert_eq!("SOS".parse::<DynamicRule>().unwrap(), DynamicRule::SumOfSum);
        assert_eq!("norm".parse::<DynamicRule>().unwrap(), DynamicRule::Normalization);
        assert_eq!("Som".parse::<DynamicRule>().unwrap(), DynamicRule::SumOfMax);
        assert!("gwta".parse::<DynamicRule>().is_err());
    }
}
