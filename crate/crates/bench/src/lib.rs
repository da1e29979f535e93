//! Shared fixtures for the criterion benchmarks.

use gbnn::{random_message, Message, MessageStore, Network, NetworkShape};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A populated network plus its message list and a batch of erased probes.
pub struct Fixture {
    pub network: Network,
    pub store: MessageStore,
    pub probes: Vec<(usize, Message)>,
}

/// Builds a reproducible workload: `count` random order-`order` messages
/// stored into a (chi, ell) network, plus `probes` erased probes of stored
/// messages.
pub fn fixture(
    chi: usize,
    ell: usize,
    order: usize,
    count: usize,
    erasures: usize,
    probes: usize,
    seed: u64,
) -> Fixture {
    let shape = NetworkShape::new(chi, ell).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut network = Network::new(shape);
    let mut seen = std::collections::HashSet::with_capacity(count);
    let mut messages = Vec::with_capacity(count);
    while messages.len() < count {
        let m = random_message(&shape, order, &mut rng);
        if !seen.insert(m.segments().to_vec()) {
            continue;
        }
        network.store(&m).unwrap();
        messages.push(m);
    }
    let probes = (0..probes)
        .map(|_| {
            let target = rng.gen_range(0..messages.len());
            let probe = messages[target].erase_segments(erasures, &mut rng).unwrap();
            (target, probe)
        })
        .collect();
    Fixture { network, store: MessageStore::from_messages(messages), probes }
}
