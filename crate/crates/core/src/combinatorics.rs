//! Exact integer combinatorics: binomial coefficients and Stirling numbers of
//! both kinds.
//!
//! Every channel matrix in the crate is assembled from these integers. They
//! are kept exact (arbitrary precision) and only turned into `f64` once, at
//! matrix-assembly time, because the pseudo-inverse mixes large alternating
//! terms of the form `N^m * s(k, m)`.
//!
//! Tables are computed once per bound and shared immutably; lookups beyond the
//! current bound grow the shared table.

use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Default size of the shared tables (indices `0..DEFAULT_TABLE_BOUND`).
pub const DEFAULT_TABLE_BOUND: usize = 64;

/// Dense, immutable tables of Stirling numbers for indices `< bound`.
///
/// `second[n][k]` holds `{n k}` and `first[k][m]` holds the signed `s(k, m)`.
/// Rows are stored up to the diagonal only (both kinds vanish above it).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StirlingTables {
    bound: usize,
    second: Vec<Vec<BigInt>>,
    first: Vec<Vec<BigInt>>,
}

impl StirlingTables {
    /// Builds both tables from the defining recurrences, starting at
    /// `{0 0} = s(0, 0) = 1`.
    pub fn new(bound: usize) -> Self {
        let bound = bound.max(1);
        let mut second: Vec<Vec<BigInt>> = Vec::with_capacity(bound);
        let mut first: Vec<Vec<BigInt>> = Vec::with_capacity(bound);
        second.push(vec![BigInt::one()]);
        first.push(vec![BigInt::one()]);
        for n in 1..bound {
            let prev2 = &second[n - 1];
            let prev1 = &first[n - 1];
            let mut row2 = vec![BigInt::zero(); n + 1];
            let mut row1 = vec![BigInt::zero(); n + 1];
            let lower = BigInt::from(n - 1);
            for k in 1..=n {
                // {n k} = k {n-1 k} + {n-1 k-1}
                let mut v2 = prev2[k - 1].clone();
                if k < n {
                    v2 += &prev2[k] * BigInt::from(k);
                }
                row2[k] = v2;
                // s(n, k) = s(n-1, k-1) - (n-1) s(n-1, k)
                let mut v1 = prev1[k - 1].clone();
                if k < n {
                    v1 -= &prev1[k] * &lower;
                }
                row1[k] = v1;
            }
            second.push(row2);
            first.push(row1);
        }
        Self { bound, second, first }
    }

    /// Largest index + 1 covered by the tables.
    pub fn bound(&self) -> usize {
        self.bound
    }

    /// `{n k}`; zero outside the table's triangle.
    ///
    /// # Panics
    /// If `n >= self.bound()`.
    pub fn second(&self, n: usize, k: usize) -> &BigInt {
        static ZERO: OnceLock<BigInt> = OnceLock::new();
        let row = &self.second[n];
        row.get(k).unwrap_or_else(|| ZERO.get_or_init(BigInt::zero))
    }

    /// Signed `s(k, m)`; zero outside the table's triangle.
    ///
    /// # Panics
    /// If `k >= self.bound()`.
    pub fn first_signed(&self, k: usize, m: usize) -> &BigInt {
        static ZERO: OnceLock<BigInt> = OnceLock::new();
        let row = &self.first[k];
        row.get(m).unwrap_or_else(|| ZERO.get_or_init(BigInt::zero))
    }
}

fn shared_slot() -> &'static Mutex<Arc<StirlingTables>> {
    static SLOT: OnceLock<Mutex<Arc<StirlingTables>>> = OnceLock::new();
    SLOT.get_or_init(|| Mutex::new(Arc::new(StirlingTables::new(DEFAULT_TABLE_BOUND))))
}

/// Shared tables covering at least indices `< bound`.
///
/// The returned tables never change; a request past the current bound builds
/// a larger table and swaps it into the cache.
pub fn tables(bound: usize) -> Arc<StirlingTables> {
    let mut slot = shared_slot().lock().unwrap_or_else(|e| e.into_inner());
    if slot.bound() < bound {
        let grown = bound.max(slot.bound() * 2);
        *slot = Arc::new(StirlingTables::new(grown));
    }
    Arc::clone(&slot)
}

/// Exact binomial coefficient; zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Stirling number of the second kind `{n k}`: the number of ways to
/// partition `n` labelled items into `k` non-empty blocks.
pub fn stirling_second(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    tables(n + 1).second(n, k).clone()
}

/// Signed Stirling number of the first kind `s(k, m)`, the coefficient of
/// `x^m` in the falling factorial `x (x-1) ... (x-k+1)`.
pub fn stirling_first_signed(k: usize, m: usize) -> BigInt {
    if m > k {
        return BigInt::zero();
    }
    tables(k + 1).first_signed(k, m).clone()
}

/// Falling factorial `n (n-1) ... (n-k+1)`, i.e. `binom(n, k) * k!`.
pub fn falling_factorial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    (n - k + 1..=n).fold(BigInt::one(), |acc, f| acc * f)
}
