use serde::{Deserialize, Serialize};

/// `m(m+1)/2`, the left end of the `m`-th triangular interval.
pub fn tri_start(m: u64) -> u64 {
    m * (m + 1) / 2
}

/// The `m` with `k ∈ [tri_start(m), tri_start(m+1))`.
pub fn tri_index(k: u64) -> u64 {
    let disc = 8u128 * k as u128 + 1;
    let mut m = ((disc.isqrt() - 1) / 2) as u64;
    while tri_start(m + 1) <= k {
        m += 1;
    }
    while tri_start(m) > k {
        m -= 1;
    }
    m
}

/// A partition of ω into intervals `I_n = [b_n, b_{n+1})` with `b_0 = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum IntervalPartition {
    /// `|I_n| = n + 1`
    Triangular,
    /// `|I_n| = len`
    Constant { len: u64 },
    /// `|I_n| = first + n·step`
    Arithmetic { first: u64, step: u64 },
    /// listed breakpoints `b_0 = 0 < b_1 < … < b_m`, then intervals of length `tail_len`
    Explicit { breakpoints: Vec<u64>, tail_len: u64 },
    /// `I′_k = ⋃ {I_j : tri_start(k) ≤ j < tri_start(k+1)}`, i.e. `k+1` consecutive blocks of `inner`
    Grouped { inner: Box<IntervalPartition> },
}

impl IntervalPartition {
    pub fn unit() -> Self {
        IntervalPartition::Constant { len: 1 }
    }

    /// Builds an explicit partition from interval lengths; the last length repeats.
    pub fn from_lengths(lengths: &[u64]) -> Self {
        assert!(!lengths.is_empty() && lengths.iter().all(|&l| l > 0), "lengths must be positive");
        let mut breakpoints = vec![0];
        for l in lengths {
            breakpoints.push(breakpoints.last().unwrap() + l);
        }
        IntervalPartition::Explicit { breakpoints, tail_len: *lengths.last().unwrap() }
    }

    pub fn is_well_formed(&self) -> bool {
        match self {
            IntervalPartition::Triangular => true,
            IntervalPartition::Constant { len } => *len > 0,
            IntervalPartition::Arithmetic { first, .. } => *first > 0,
            IntervalPartition::Explicit { breakpoints, tail_len } => {
                *tail_len > 0 && breakpoints.first() == Some(&0) && breakpoints.windows(2).all(|w| w[0] < w[1])
            }
            IntervalPartition::Grouped { inner } => inner.is_well_formed(),
        }
    }

    /// `b_n = min I_n`.
    pub fn start(&self, n: u64) -> u64 {
        match self {
            IntervalPartition::Triangular => tri_start(n),
            IntervalPartition::Constant { len } => n * len,
            IntervalPartition::Arithmetic { first, step } => n * first + step * (n * n.saturating_sub(1) / 2),
            IntervalPartition::Explicit { breakpoints, tail_len } => {
                let m = breakpoints.len() as u64 - 1;
                if n <= m {
                    breakpoints[n as usize]
                } else {
                    breakpoints[m as usize] + (n - m) * tail_len
                }
            }
            IntervalPartition::Grouped { inner } => inner.start(tri_start(n)),
        }
    }

    /// `b_{n+1}`, one past `max I_n`.
    pub fn end(&self, n: u64) -> u64 {
        self.start(n + 1)
    }

    pub fn len(&self, n: u64) -> u64 {
        self.end(n) - self.start(n)
    }

    /// The block containing coordinate `k`.
    pub fn block_of(&self, k: u64) -> u64 {
        match self {
            IntervalPartition::Triangular => tri_index(k),
            IntervalPartition::Constant { len } => k / len,
            IntervalPartition::Explicit { breakpoints, tail_len } => {
                let m = breakpoints.len() as u64 - 1;
                let last = breakpoints[m as usize];
                if k >= last {
                    m + (k - last) / tail_len
                } else {
                    breakpoints.partition_point(|&b| b <= k) as u64 - 1
                }
            }
            IntervalPartition::Grouped { inner } => tri_index(inner.block_of(k)),
            IntervalPartition::Arithmetic { .. } => {
                // binary search on the monotone start()
                let (mut lo, mut hi) = (0u64, k + 1);
                while lo + 1 < hi {
                    let mid = lo + (hi - lo) / 2;
                    if self.start(mid) <= k {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo
            }
        }
    }

    /// Number of blocks with `I_n ⊆ [0, depth)`.
    pub fn blocks_within(&self, depth: u64) -> u64 {
        if depth == 0 {
            return 0;
        }
        let n = self.block_of(depth - 1);
        if self.end(n) <= depth {
            n + 1
        } else {
            n
        }
    }
}
