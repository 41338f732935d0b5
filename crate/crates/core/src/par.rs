//! Deterministic data-parallel execution.
//!
//! Monte Carlo work is split into fixed-size chunks. Chunk `i` draws from a ChaCha8
//! stream selected by `(seed, i)` and chunk results are merged in index order, so a
//! result never depends on the worker count or on the schedule. With the `parallel`
//! feature disabled, or inside [`sequential`], every map runs on the calling thread.

use std::cell::Cell;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Samples per chunk. Part of the determinism contract: changing it changes results.
pub const CHUNK_SIZE: usize = 4096;

thread_local! {
    static FORCE_SEQUENTIAL: Cell<bool> = const { Cell::new(false) };
}

/// Runs `f` with all library parallelism disabled on this thread.
pub fn sequential<R>(f: impl FnOnce() -> R) -> R {
    let prev = FORCE_SEQUENTIAL.with(|c| c.replace(true));
    let out = f();
    FORCE_SEQUENTIAL.with(|c| c.set(prev));
    out
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel") && !FORCE_SEQUENTIAL.with(|c| c.get())
}

/// `(0..n).map(f).collect()`, evaluated in parallel when enabled. Output order is
/// always index order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if is_parallel() {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    (0..n).map(f).collect()
}

/// Like [`map_indexed`] over a slice.
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    map_indexed(items.len(), |i| f(&items[i]))
}

pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Mixes a label into a seed so that independent estimates in one run do not share
/// random streams unless they are meant to.
pub fn derive_seed(seed: u64, tag: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    splitmix(seed ^ splitmix(h))
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Runs `count` samples in chunks of [`CHUNK_SIZE`]; `per_chunk(rng, len)` handles one
/// chunk. Results come back in chunk order.
pub fn map_chunks<A, F>(count: usize, seed: u64, per_chunk: F) -> Vec<A>
where
    A: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> A + Sync + Send,
{
    let chunks = count.div_ceil(CHUNK_SIZE);
    map_indexed(chunks, |i| {
        let len = CHUNK_SIZE.min(count - i * CHUNK_SIZE);
        let mut rng = chunk_rng(seed, i as u64);
        per_chunk(&mut rng, len)
    })
}

/// Streaming mean/variance (Welford), mergeable in a fixed order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * (self.n as f64) * (other.n as f64) / n as f64;
        self.n = n;
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }

    pub fn merged<'a>(parts: impl IntoIterator<Item = &'a Moments>) -> Moments {
        let mut acc = Moments::default();
        for p in parts {
            acc.merge(p);
        }
        acc
    }
}

/// Scalar Monte Carlo: mean and standard error of `sample(rng)` over `count` draws.
pub fn monte_carlo<F>(count: usize, seed: u64, sample: F) -> Moments
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync + Send,
{
    let parts = map_chunks(count, seed, |rng, len| {
        let mut m = Moments::default();
        for _ in 0..len {
            m.push(sample(rng));
        }
        m
    });
    Moments::merged(&parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let mut whole = Moments::default();
        xs.iter().for_each(|&x| whole.push(x));
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        assert_eq!(a.n, whole.n);
        assert!((a.mean - whole.mean).abs() < 1e-12);
        assert!((a.variance() - whole.variance()).abs() < 1e-9);
    }

    #[test]
    fn sequential_and_parallel_agree_bitwise() {
        let f = |rng: &mut ChaCha8Rng| rng.random::<f64>().sin();
        let p = monte_carlo(50_000, 11, f);
        let s = sequential(|| monte_carlo(50_000, 11, f));
        assert_eq!(p, s);
    }

    #[test]
    fn derived_seeds_differ_by_tag() {
        assert_ne!(derive_seed(1, "lhs"), derive_seed(1, "rhs"));
        assert_eq!(derive_seed(1, "lhs"), derive_seed(1, "lhs"));
    }
}
