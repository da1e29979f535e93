//! Network topology, weight matrix, fanal state, messages and storage.
//!
//! The network is a χ-partite graph: χ clusters of l fanals each, no edges
//! inside a cluster, and a symmetric binary weight matrix over all n = χ·l
//! fanals. Fanals are addressed as `(cluster, index)` pairs, 1-based on the
//! public API; internally everything is a 0-based flat index into dense
//! bitsets so that scoring reduces to word-wise AND + popcount.

use rand::Rng;
use thiserror::Error;

/// Errors raised by network construction, message handling and storage.
#[derive(Debug, Error, PartialEq)]
pub enum Error {
    #[error("invalid shape: need at least 2 clusters and 1 fanal per cluster, got chi={chi}, ell={ell}")]
    InvalidShape { chi: usize, ell: usize },
    #[error("message has {got} segments, network has {expected} clusters")]
    WrongMessageLength { expected: usize, got: usize },
    #[error("segment {value} of cluster {cluster} is out of range (cluster size {ell})")]
    SegmentOutOfRange { cluster: usize, value: u32, ell: usize },
    #[error("fanal ({cluster}, {index}) is out of range for shape ({chi}, {ell})")]
    FanalOutOfRange { cluster: usize, index: usize, chi: usize, ell: usize },
    #[error("message of order {order} cannot be stored: a clique needs at least 2 fanals")]
    OrderTooSmall { order: usize },
    #[error("cannot erase {requested} segments from a message of order {order}")]
    EraseExceedsOrder { requested: usize, order: usize },
}

/// Cluster count χ and per-cluster fanal count l.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NetworkShape {
    chi: usize,
    ell: usize,
}

impl NetworkShape {
    /// Validates χ ≥ 2 (no inter-cluster edge is possible otherwise) and l ≥ 1.
    pub fn new(chi: usize, ell: usize) -> Result<Self, Error> {
        if chi < 2 || ell < 1 {
            return Err(Error::InvalidShape { chi, ell });
        }
        Ok(Self { chi, ell })
    }

    pub fn clusters(&self) -> usize {
        self.chi
    }

    pub fn cluster_size(&self) -> usize {
        self.ell
    }

    /// Total fanal count n = χ·l.
    pub fn fanal_count(&self) -> usize {
        self.chi * self.ell
    }

    /// Maps a 1-based `(cluster, index)` pair to its 0-based flat index.
    pub fn flat_index(&self, fanal: FanalId) -> Result<usize, Error> {
        if fanal.cluster < 1 || fanal.cluster > self.chi || fanal.index < 1 || fanal.index > self.ell
        {
            return Err(Error::FanalOutOfRange {
                cluster: fanal.cluster,
                index: fanal.index,
                chi: self.chi,
                ell: self.ell,
            });
        }
        Ok((fanal.cluster - 1) * self.ell + (fanal.index - 1))
    }

    /// Inverse of [`flat_index`](Self::flat_index).
    pub fn fanal_at(&self, flat: usize) -> FanalId {
        debug_assert!(flat < self.fanal_count());
        FanalId::new(flat / self.ell + 1, flat % self.ell + 1)
    }

    /// 0-based cluster of a flat index.
    pub(crate) fn cluster_of(&self, flat: usize) -> usize {
        flat / self.ell
    }
}

/// A fanal address: cluster in `[1, χ]`, index in `[1, l]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FanalId {
    pub cluster: usize,
    pub index: usize,
}

impl FanalId {
    pub fn new(cluster: usize, index: usize) -> Self {
        Self { cluster, index }
    }
}

/// A sparse message: one segment per cluster, each in `[[0, l]]`.
///
/// Segment value 0 marks a cluster that holds nothing for this message,
/// either never used or erased; the network cannot tell the difference.
/// The *order* of a message is its number of nonzero segments.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Message {
    segments: Vec<u32>,
}

impl Message {
    pub fn new(segments: Vec<u32>) -> Self {
        Self { segments }
    }

    /// Builds a length-`chi` message from `(cluster, value)` pairs, 1-based.
    pub fn from_pairs(chi: usize, pairs: &[(usize, u32)]) -> Self {
        let mut segments = vec![0; chi];
        for &(cluster, value) in pairs {
            assert!(cluster >= 1 && cluster <= chi, "cluster out of range");
            segments[cluster - 1] = value;
        }
        Self { segments }
    }

    pub fn segments(&self) -> &[u32] {
        &self.segments
    }

    /// Number of nonzero segments.
    pub fn order(&self) -> usize {
        self.segments.iter().filter(|&&s| s != 0).count()
    }

    /// The fanals selected by the nonzero segments, one per such cluster.
    pub fn fanals(&self, shape: &NetworkShape) -> Result<Vec<FanalId>, Error> {
        if self.segments.len() != shape.clusters() {
            return Err(Error::WrongMessageLength {
                expected: shape.clusters(),
                got: self.segments.len(),
            });
        }
        let mut out = Vec::with_capacity(self.order());
        for (i, &value) in self.segments.iter().enumerate() {
            if value == 0 {
                continue;
            }
            if value as usize > shape.cluster_size() {
                return Err(Error::SegmentOutOfRange {
                    cluster: i + 1,
                    value,
                    ell: shape.cluster_size(),
                });
            }
            out.push(FanalId::new(i + 1, value as usize));
        }
        Ok(out)
    }

    /// Returns a copy with `count` nonzero segments, chosen uniformly via
    /// `rng`, replaced by zeros. The original message is untouched.
    pub fn erase_segments<R: Rng + ?Sized>(
        &self,
        count: usize,
        rng: &mut R,
    ) -> Result<Message, Error> {
        let nonzero: Vec<usize> = (0..self.segments.len())
            .filter(|&i| self.segments[i] != 0)
            .collect();
        if count > nonzero.len() {
            return Err(Error::EraseExceedsOrder {
                requested: count,
                order: nonzero.len(),
            });
        }
        let mut erased = self.clone();
        for pick in rand::seq::index::sample(rng, nonzero.len(), count) {
            erased.segments[nonzero[pick]] = 0;
        }
        Ok(erased)
    }
}

/// Draws a uniform random message of the given order: `order` distinct
/// clusters chosen without replacement, values uniform in `[1, l]`.
pub fn random_message<R: Rng + ?Sized>(
    shape: &NetworkShape,
    order: usize,
    rng: &mut R,
) -> Message {
    assert!(order <= shape.clusters(), "order exceeds cluster count");
    let mut segments = vec![0u32; shape.clusters()];
    for cluster in rand::seq::index::sample(rng, shape.clusters(), order) {
        segments[cluster] = rng.gen_range(1..=shape.cluster_size() as u32);
    }
    Message::new(segments)
}

const WORD_BITS: usize = 64;

/// Word span of one cluster inside a row bitset: words `[first, last]` with
/// edge masks for the partial head and tail words.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ClusterSpan {
    first: usize,
    last: usize,
    head_mask: u64,
    tail_mask: u64,
}

impl ClusterSpan {
    pub(crate) fn first(&self) -> usize {
        self.first
    }

    pub(crate) fn last(&self) -> usize {
        self.last
    }

    pub(crate) fn mask_for(&self, word: usize) -> u64 {
        let mut mask = !0u64;
        if word == self.first {
            mask &= self.head_mask;
        }
        if word == self.last {
            mask &= self.tail_mask;
        }
        mask
    }
}

fn cluster_spans(shape: &NetworkShape) -> Vec<ClusterSpan> {
    let ell = shape.cluster_size();
    (0..shape.clusters())
        .map(|c| {
            let start = c * ell;
            let end = start + ell - 1; // inclusive
            let first = start / WORD_BITS;
            let last = end / WORD_BITS;
            let head_mask = !0u64 << (start % WORD_BITS);
            let tail_mask = !0u64 >> (WORD_BITS - 1 - end % WORD_BITS);
            ClusterSpan { first, last, head_mask, tail_mask }
        })
        .collect()
}

/// The χ-partite associative memory itself.
///
/// Holds the symmetric binary weight matrix (dense n×n bitset; both triangles
/// kept in sync so every row is directly usable), the binary activity state
/// v of every fanal, and per-fanal activation thresholds σ. σ is a finite
/// non-negative value or `f64::INFINITY`; the infinite sentinel is what lets
/// the GLsKO rule permanently lock a fanal out of a run.
#[derive(Debug, Clone)]
pub struct Network {
    shape: NetworkShape,
    words_per_row: usize,
    weights: Vec<u64>,
    activity: Vec<u64>,
    thresholds: Vec<f64>,
    edges: u64,
    spans: Vec<ClusterSpan>,
}

impl Network {
    /// An empty network: zero weights, all fanals idle, all σ = 0.
    pub fn new(shape: NetworkShape) -> Self {
        let n = shape.fanal_count();
        let words_per_row = n.div_ceil(WORD_BITS);
        Network {
            shape,
            words_per_row,
            weights: vec![0; n * words_per_row],
            activity: vec![0; words_per_row],
            thresholds: vec![0.0; n],
            edges: 0,
            spans: cluster_spans(&shape),
        }
    }

    /// Convenience constructor validating the shape first.
    pub fn with_shape(chi: usize, ell: usize) -> Result<Self, Error> {
        Ok(Self::new(NetworkShape::new(chi, ell)?))
    }

    pub fn shape(&self) -> &NetworkShape {
        &self.shape
    }

    /// Number of distinct connections currently present.
    pub fn edge_count(&self) -> u64 {
        self.edges
    }

    pub(crate) fn row(&self, flat: usize) -> &[u64] {
        let start = flat * self.words_per_row;
        &self.weights[start..start + self.words_per_row]
    }

    pub(crate) fn activity_words(&self) -> &[u64] {
        &self.activity
    }

    pub(crate) fn spans(&self) -> &[ClusterSpan] {
        &self.spans
    }

    fn set_weight_bit(&mut self, a: usize, b: usize) -> bool {
        let idx = a * self.words_per_row + b / WORD_BITS;
        let mask = 1u64 << (b % WORD_BITS);
        let fresh = self.weights[idx] & mask == 0;
        self.weights[idx] |= mask;
        fresh
    }

    /// Whether fanals `a` and `b` are connected.
    pub fn is_edge(&self, a: FanalId, b: FanalId) -> Result<bool, Error> {
        let fa = self.shape.flat_index(a)?;
        let fb = self.shape.flat_index(b)?;
        Ok(self.edge_flat(fa, fb))
    }

    pub(crate) fn edge_flat(&self, a: usize, b: usize) -> bool {
        self.weights[a * self.words_per_row + b / WORD_BITS] >> (b % WORD_BITS) & 1 == 1
    }

    pub(crate) fn set_edge_flat(&mut self, a: usize, b: usize) -> bool {
        debug_assert_ne!(self.shape.cluster_of(a), self.shape.cluster_of(b));
        let fresh = self.set_weight_bit(a, b);
        self.set_weight_bit(b, a);
        if fresh {
            self.edges += 1;
        }
        fresh
    }

    /// Stores a message by connecting every pair of its fanals into a clique.
    ///
    /// Connections already present are reused untouched, so storage is
    /// non-destructive and the weight matrix is the union of all stored
    /// cliques. Returns the number of connections newly created.
    pub fn store(&mut self, message: &Message) -> Result<usize, Error> {
        let fanals = message.fanals(&self.shape)?;
        if fanals.len() < 2 {
            return Err(Error::OrderTooSmall { order: fanals.len() });
        }
        let flats: Vec<usize> = fanals
            .iter()
            .map(|&f| self.shape.flat_index(f).expect("validated above"))
            .collect();
        let mut added = 0;
        for (i, &a) in flats.iter().enumerate() {
            for &b in &flats[i + 1..] {
                if self.set_edge_flat(a, b) {
                    added += 1;
                }
            }
        }
        Ok(added)
    }

    /// Activates exactly the fanals selected by the probe's nonzero segments;
    /// every other fanal goes idle. Activation thresholds are untouched.
    pub fn insert_probe(&mut self, probe: &Message) -> Result<(), Error> {
        let fanals = probe.fanals(&self.shape)?;
        self.activity.iter_mut().for_each(|w| *w = 0);
        for fanal in fanals {
            let flat = self.shape.flat_index(fanal).expect("validated above");
            self.activity[flat / WORD_BITS] |= 1 << (flat % WORD_BITS);
        }
        Ok(())
    }

    /// Clears all activity and resets every σ to 0; weights are untouched.
    ///
    /// Required between retrieval runs: the GLsKO rule leaves σ = ∞ on every
    /// fanal it locked out.
    pub fn reset_state(&mut self) {
        self.activity.iter_mut().for_each(|w| *w = 0);
        self.thresholds.iter_mut().for_each(|t| *t = 0.0);
    }

    pub fn is_active(&self, fanal: FanalId) -> Result<bool, Error> {
        let flat = self.shape.flat_index(fanal)?;
        Ok(self.is_active_flat(flat))
    }

    pub(crate) fn is_active_flat(&self, flat: usize) -> bool {
        self.activity[flat / WORD_BITS] >> (flat % WORD_BITS) & 1 == 1
    }

    /// Sets the activity of a single fanal, leaving the rest alone.
    pub fn set_active(&mut self, fanal: FanalId, active: bool) -> Result<(), Error> {
        let flat = self.shape.flat_index(fanal)?;
        self.set_active_flat(flat, active);
        Ok(())
    }

    pub(crate) fn set_active_flat(&mut self, flat: usize, active: bool) {
        let mask = 1u64 << (flat % WORD_BITS);
        if active {
            self.activity[flat / WORD_BITS] |= mask;
        } else {
            self.activity[flat / WORD_BITS] &= !mask;
        }
    }

    pub fn active_count(&self) -> usize {
        self.activity.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Currently active fanals, in cluster-then-index order.
    pub fn active_fanals(&self) -> Vec<FanalId> {
        self.active_flats().into_iter().map(|f| self.shape.fanal_at(f)).collect()
    }

    pub(crate) fn active_flats(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (w, &word) in self.activity.iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                out.push(w * WORD_BITS + bits.trailing_zeros() as usize);
                bits &= bits - 1;
            }
        }
        out
    }

    /// Per-cluster count of active fanals (`|v_i|`), 0-based cluster order.
    pub(crate) fn active_per_cluster(&self) -> Vec<u32> {
        let mut counts = vec![0u32; self.shape.clusters()];
        for flat in self.active_flats() {
            counts[self.shape.cluster_of(flat)] += 1;
        }
        counts
    }

    pub fn threshold(&self, fanal: FanalId) -> Result<f64, Error> {
        let flat = self.shape.flat_index(fanal)?;
        Ok(self.thresholds[flat])
    }

    pub fn set_threshold(&mut self, fanal: FanalId, sigma: f64) -> Result<(), Error> {
        assert!(sigma >= 0.0, "activation thresholds are non-negative");
        let flat = self.shape.flat_index(fanal)?;
        self.thresholds[flat] = sigma;
        Ok(())
    }

    pub(crate) fn threshold_flat(&self, flat: usize) -> f64 {
        self.thresholds[flat]
    }

    pub(crate) fn set_threshold_flat(&mut self, flat: usize, sigma: f64) {
        self.thresholds[flat] = sigma;
    }

    #[cfg(test)]
    pub(crate) fn weights_words(&self) -> &[u64] {
        &self.weights
    }
}
