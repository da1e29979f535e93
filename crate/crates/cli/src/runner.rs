//! The Monte Carlo sweep runner.
//!
//! For every message count M in the sweep: generate M distinct random
//! messages, store them all, then fire `trials` probes (a stored message
//! with `erasures` segments erased) at every configured retrieval rule and,
//! optionally, at the brute-force oracle. All configs see the *identical*
//! probe stream at a given (M, trial), and every random draw comes from a
//! seed derived by counter-based splitting of the master seed, so results
//! are bit-reproducible, independent of thread count, and adding a config
//! never perturbs the others' streams.

use std::collections::HashSet;
use std::time::Instant;

use gbnn::{
    random_message, retrieve, Message, MessageStore, Network, NetworkShape, RetrievalResult,
    RetrieveError,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::experiment::{ExperimentSpec, Metric, NamedConfig};

/// Display name of the oracle's rows in reports.
pub const ORACLE_NAME: &str = "ML";

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("retrieval failed: {0}")]
    Retrieve(#[from] RetrieveError),
    #[error("probe construction failed: {0}")]
    Probe(#[from] gbnn::Error),
}

/// One (config, message count) cell of the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub config: String,
    pub messages: usize,
    pub error_rate: f64,
    pub avg_iterations: f64,
    pub trials: usize,
    pub wall_time_ms: u128,
    /// Trials that stopped with a certified clique (strict mode only).
    pub clique_stops: usize,
    /// How many of those passed the pairwise edge re-check.
    pub clique_verified: usize,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(text: &str) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for byte in text.bytes() {
        hash ^= byte as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
    }
    hash
}

/// Counter-based seed splitting: folds the parts into the master seed with
/// a splitmix chain. Stable across platforms and releases.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    let mut state = splitmix64(master);
    for &part in parts {
        state = splitmix64(state ^ splitmix64(part));
    }
    state
}

mod domain {
    pub const MESSAGES: u64 = 1;
    pub const PROBES: u64 = 2;
    pub const RETRIEVAL: u64 = 3;
}

/// Draws `count` distinct messages of the spec's order. Exact duplicates
/// are rejected and resampled so the stored diversity really is `count`.
fn generate_messages(
    shape: &NetworkShape,
    order: usize,
    count: usize,
    seed: u64,
) -> Vec<Message> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen: HashSet<Vec<u32>> = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let message = random_message(shape, order, &mut rng);
        if seen.insert(message.segments().to_vec()) {
            out.push(message);
        }
    }
    out
}

struct TrialOutcome {
    error: bool,
    iterations: usize,
    clique_stop: bool,
    clique_ok: bool,
}

/// Sorted flat indices of a result's active fanals.
fn active_flats(result: &RetrievalResult, shape: &NetworkShape) -> Vec<usize> {
    let mut out = Vec::with_capacity(result.active_count());
    for (cluster, indices) in result.actives_by_cluster.iter().enumerate() {
        for &index in indices {
            out.push(cluster * shape.cluster_size() + index - 1);
        }
    }
    out
}

fn target_flats(message: &Message, shape: &NetworkShape) -> Vec<usize> {
    message
        .fanals(shape)
        .expect("stored messages are valid")
        .into_iter()
        .map(|f| shape.flat_index(f).expect("stored messages are valid"))
        .collect()
}

fn is_success(actives: &[usize], target: &[usize], metric: Metric) -> bool {
    match metric {
        Metric::Strict => actives == target,
        // both sorted: subset test by merge walk
        Metric::Lenient => {
            let mut it = actives.iter().peekable();
            'outer: for t in target {
                while let Some(&&a) = it.peek() {
                    it.next();
                    if a == *t {
                        continue 'outer;
                    }
                }
                return false;
            }
            true
        }
    }
}

/// Runs the full sweep. Rows come back grouped by config (file order, the
/// oracle last) with message counts ascending.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ResultRow>, RunnerError> {
    let shape = spec.shape;
    let mut rows: Vec<(usize, ResultRow)> = Vec::new();

    for &m_count in &spec.message_counts {
        let store = MessageStore::from_messages(generate_messages(
            &shape,
            spec.order,
            m_count,
            derive_seed(spec.seed, &[domain::MESSAGES, m_count as u64]),
        ));
        let mut network = Network::new(shape);
        for message in store.messages() {
            network.store(message).expect("generated messages are storable");
        }

        // one probe stream per message count, shared by all configs
        let probes: Vec<(usize, Message)> = (0..spec.trials)
            .map(|trial| -> Result<(usize, Message), RunnerError> {
                let seed =
                    derive_seed(spec.seed, &[domain::PROBES, m_count as u64, trial as u64]);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let target = rng.gen_range(0..store.len());
                let probe = store.get(target).erase_segments(spec.erasures, &mut rng)?;
                Ok((target, probe))
            })
            .collect::<Result<_, _>>()?;

        for (position, config) in spec.configs.iter().enumerate() {
            let row =
                run_config_point(spec, config, m_count, &network, store.messages(), &probes)?;
            rows.push((position, row));
        }
        if spec.include_oracle {
            let row = run_oracle_point(spec, m_count, &store, &probes);
            rows.push((spec.configs.len(), row));
        }
    }

    rows.sort_by_key(|(position, row)| (*position, row.messages));
    Ok(rows.into_iter().map(|(_, row)| row).collect())
}

fn run_config_point(
    spec: &ExperimentSpec,
    config: &NamedConfig,
    m_count: usize,
    network: &Network,
    messages: &[Message],
    probes: &[(usize, Message)],
) -> Result<ResultRow, RunnerError> {
    let shape = spec.shape;
    let name_hash = fnv1a(&config.name);
    let started = Instant::now();
    let chunk = (spec.trials / (rayon::current_num_threads() * 4)).max(1);

    let outcomes: Vec<TrialOutcome> = (0..spec.trials)
        .into_par_iter()
        .with_min_len(chunk)
        .map_init(
            || network.clone(),
            |net, trial| -> Result<TrialOutcome, RunnerError> {
                let (target_idx, probe) = &probes[trial];
                let mut retrieval = config.retrieval.clone();
                retrieval.seed = derive_seed(
                    spec.seed,
                    &[domain::RETRIEVAL, m_count as u64, trial as u64, name_hash],
                );
                let result = retrieve(net, probe, &retrieval)?;
                let actives = active_flats(&result, &shape);
                let target = target_flats(&messages[*target_idx], &shape);
                Ok(TrialOutcome {
                    error: !is_success(&actives, &target, spec.metric),
                    iterations: result.iterations,
                    clique_stop: result.clique_verified.is_some(),
                    clique_ok: result.clique_verified == Some(true),
                })
            },
        )
        .collect::<Result<_, _>>()?;

    let errors = outcomes.iter().filter(|o| o.error).count();
    let total_iterations: usize = outcomes.iter().map(|o| o.iterations).sum();
    Ok(ResultRow {
        config: config.name.clone(),
        messages: m_count,
        error_rate: errors as f64 / spec.trials as f64,
        avg_iterations: total_iterations as f64 / spec.trials as f64,
        trials: spec.trials,
        wall_time_ms: started.elapsed().as_millis(),
        clique_stops: outcomes.iter().filter(|o| o.clique_stop).count(),
        clique_verified: outcomes.iter().filter(|o| o.clique_ok).count(),
    })
}

fn run_oracle_point(
    spec: &ExperimentSpec,
    m_count: usize,
    store: &MessageStore,
    probes: &[(usize, Message)],
) -> ResultRow {
    let started = Instant::now();
    let chunk = (spec.trials / (rayon::current_num_threads() * 4)).max(1);
    let errors = (0..spec.trials)
        .into_par_iter()
        .with_min_len(chunk)
        .filter(|&trial| {
            let (target_idx, probe) = &probes[trial];
            let candidates = store.retrieve(probe);
            let ok = match spec.metric {
                Metric::Strict => candidates == [*target_idx],
                Metric::Lenient => candidates.contains(target_idx),
            };
            !ok
        })
        .count();
    ResultRow {
        config: ORACLE_NAME.to_string(),
        messages: m_count,
        error_rate: errors as f64 / spec.trials as f64,
        // the oracle scans the store in a single pass
        avg_iterations: 1.0,
        trials: spec.trials,
        wall_time_ms: started.elapsed().as_millis(),
        clique_stops: 0,
        clique_verified: 0,
    }
}

/// Spearman rank correlation with average ranks for ties; `None` when
/// either side has no variance.
fn spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    fn ranks(values: &[f64]) -> Vec<f64> {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let mut out = vec![0.0; values.len()];
        let mut i = 0;
        while i < order.len() {
            let mut j = i;
            while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
                j += 1;
            }
            let rank = (i + j) as f64 / 2.0;
            for &idx in &order[i..=j] {
                out[idx] = rank;
            }
            i = j + 1;
        }
        out
    }
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = xs.len() as f64;
    let mean = (n - 1.0) / 2.0;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mean) * (b - mean);
        var_x += (a - mean).powi(2);
        var_y += (b - mean).powi(2);
    }
    if var_x == 0.0 || var_y == 0.0 {
        return None;
    }
    Some(cov / (var_x * var_y).sqrt())
}

/// Error rates should not trend *down* as the store fills up. For every
/// config whose peak error rate exceeds 5%, checks that the Spearman
/// correlation of rate against message count is positive; returns one
/// warning per violator.
pub fn monotonicity_warnings(rows: &[ResultRow]) -> Vec<String> {
    let mut by_config: Vec<(&str, Vec<(usize, f64)>)> = Vec::new();
    for row in rows {
        match by_config.iter_mut().find(|(name, _)| *name == row.config) {
            Some((_, points)) => points.push((row.messages, row.error_rate)),
            None => by_config.push((&row.config, vec![(row.messages, row.error_rate)])),
        }
    }
    let mut warnings = Vec::new();
    for (name, points) in by_config {
        if points.len() < 2 {
            continue;
        }
        let peak = points.iter().map(|(_, r)| *r).fold(0.0, f64::max);
        if peak <= 0.05 {
            continue;
        }
        let xs: Vec<f64> = points.iter().map(|(m, _)| *m as f64).collect();
        let ys: Vec<f64> = points.iter().map(|(_, r)| *r).collect();
        if let Some(rho) = spearman(&xs, &ys) {
            if rho <= 0.0 {
                warnings.push(format!(
                    "config `{name}`: error rate does not grow with load (spearman {rho:.2})"
                ));
            }
        }
    }
    warnings
}
