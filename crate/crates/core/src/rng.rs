//! Deterministic, counter-based uniform variate source.
//!
//! Every sampler in this crate draws its randomness through [`RngState`], an
//! immutable value type: `next_uniform` consumes a state and returns the
//! variate together with the successor state. Streams are addressed by a
//! 64-bit `stream_id`, so independent substreams are available without
//! sequential skipping, and forking never disturbs the parent.
//!
//! The generator hashes `(seed, stream_id, counter)` through the SplitMix64
//! finalizer, which has no known statistical failures at this output size.
//! Not cryptographic.

/// Golden-ratio increment used by SplitMix64.
const STREAM_MULT: u64 = 0x9e37_79b9_7f4a_7c15;

/// Spectrally good odd multiplier (Steele & Vigna 2021).
const COUNTER_MULT: u64 = 0xd134_2543_de82_ef95;

/// SplitMix64 finalizer.
#[inline]
fn mix(mut x: u64) -> u64 {
    x ^= x >> 30;
    x = x.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Immutable state of one deterministic uniform stream.
///
/// The emitted sequence is a pure function of `(seed, stream_id)`; the
/// counter addresses positions within the stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RngState {
    seed: u64,
    stream_id: u64,
    counter: u64,
}

impl RngState {
    /// Stream 0 of the given seed.
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream_id: u64) -> Self {
        Self {
            seed,
            stream_id,
            counter: 0,
        }
    }

    /// A fresh state on `new_stream_id`, starting at counter 0. The
    /// receiver is unaffected; callers are responsible for not reusing a
    /// stream id that is already being consumed elsewhere.
    pub fn fork_stream(&self, new_stream_id: u64) -> Self {
        Self::with_stream(self.seed, new_stream_id)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    #[inline]
    fn raw(&self) -> u64 {
        let key = mix(self.seed ^ self.stream_id.wrapping_mul(STREAM_MULT));
        mix(key ^ self.counter.wrapping_mul(COUNTER_MULT))
    }

    /// Next uniform variate, strictly inside (0, 1), plus the successor
    /// state.
    ///
    /// The top 52 bits n of the hashed output map to `(n + 0.5) / 2^52`,
    /// which is exact in f64 and can reach neither endpoint, so downstream
    /// `-log(-log u)` and `-log u` transforms never see an infinity.
    #[inline]
    pub fn next_uniform(self) -> (f64, Self) {
        let n = self.raw() >> 12;
        let u = (n as f64 + 0.5) * (1.0 / (1u64 << 52) as f64);
        (
            u,
            Self {
                counter: self.counter.wrapping_add(1),
                ..self
            },
        )
    }
}
