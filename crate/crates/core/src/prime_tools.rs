//! Prime-power sieving and Mertens-type reciprocal sums.
//!
//! Builds the table of prime powers `p^alpha <= limit` together with running
//! compensated sums of `p^{-alpha}`, evaluates the step functions
//! `sum_{p <= x} 1/p` and `sum_{p^alpha <= x} p^{-alpha}` for real `x`, and
//! certifies the sign and margin of the error term
//!
//! ```text
//! eps(x) = sum_{p^alpha <= x} p^{-alpha} - log log x - B2,    B2 = B1 + C,
//! ```
//!
//! where `B1` is the Mertens constant and `C = sum_p 1/(p^2 - p)`.

use std::io::{Read as IoRead, Write as IoWrite};
use std::path::Path;

use crate::error::{Error, Result};
use crate::report::VerificationReport;

/// Mertens constant `B1` (OEIS A077761), stored to more digits than an `f64`
/// resolves and cross-checked in tests against the sieved prime sum.
pub const MERTENS_B1: f64 = 0.26149721284764278375;

/// Largest `x` of the negativity sweep `eps(p^alpha) < 0`; also the smallest
/// `x` for which the `0.2/(log x)^3` two-sided prime-sum bound is invoked.
pub const NEGATIVITY_LIMIT: u64 = 2_278_383;

/// Smallest prime power above [`NEGATIVITY_LIMIT`]; end of the margin sweep
/// `eps(p^alpha) + 1.75/(log p^alpha)^2 - p^{-alpha} > 0`.
pub const LOWER_MARGIN_LIMIT: u64 = 2_278_421;

/// Default threshold below which a positive slack is reported as marginal.
pub const DEFAULT_MARGINAL_FLOOR: f64 = 1e-7;

/// Compensated (Kahan) accumulator. Keeps the rounding error of a running
/// sum near one ulp of the total instead of growing with the term count.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        KahanSum::default()
    }

    pub fn add(&mut self, x: f64) {
        let y = x - self.compensation;
        let t = self.sum + y;
        self.compensation = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Calls `f` with every prime `<= limit` in increasing order.
///
/// Odds-only segmented sieve; memory stays bounded by the segment size, so
/// limits around `10^9` (needed to pin the tail of `C`) are practical.
pub fn for_each_prime(limit: u64, mut f: impl FnMut(u64)) {
    if limit < 2 {
        return;
    }
    f(2);
    if limit < 3 {
        return;
    }

    let root = limit.isqrt();
    // Plain odds sieve up to sqrt(limit) for the base primes.
    let base_len = if root >= 3 { ((root - 3) / 2 + 1) as usize } else { 0 };
    let mut small = vec![true; base_len];
    let mut base: Vec<u64> = Vec::new();
    for i in 0..base_len {
        if small[i] {
            let p = 3 + 2 * i as u64;
            base.push(p);
            let mut v = p * p;
            while v <= root {
                small[((v - 3) / 2) as usize] = false;
                v += 2 * p;
            }
        }
    }

    // Segmented sweep over odd values in [3, limit]. Marking starts at p^2,
    // so every base prime is rediscovered unmarked and emitted exactly once.
    const SEGMENT_ODDS: usize = 1 << 18;
    let span = (SEGMENT_ODDS as u64) * 2;
    let largest_odd = if limit % 2 == 0 { limit - 1 } else { limit };
    let mut seg = vec![true; SEGMENT_ODDS];
    let mut lo: u64 = 3;
    while lo <= largest_odd {
        let hi = (lo + span - 2).min(largest_odd);
        let n_odds = ((hi - lo) / 2 + 1) as usize;
        seg[..n_odds].fill(true);
        for &p in &base {
            if p * p > hi {
                break;
            }
            let start = if p * p >= lo {
                p * p
            } else {
                let k = lo.div_ceil(p);
                let k = if k % 2 == 0 { k + 1 } else { k };
                k * p
            };
            let mut v = start;
            while v <= hi {
                seg[((v - lo) / 2) as usize] = false;
                v += 2 * p;
            }
        }
        for (i, &is_prime) in seg[..n_odds].iter().enumerate() {
            if is_prime {
                f(lo + 2 * i as u64);
            }
        }
        lo += span;
    }
}

/// Smallest-prime-factor table for `0..=limit` via a linear sieve.
/// `spf[0] = spf[1] = 0`; for `n >= 2`, `spf[n]` is the least prime factor.
pub fn smallest_prime_factor_sieve(limit: usize) -> Vec<u32> {
    let mut spf = vec![0u32; limit + 1];
    let mut primes: Vec<u32> = Vec::new();
    for n in 2..=limit {
        if spf[n] == 0 {
            spf[n] = n as u32;
            primes.push(n as u32);
        }
        for &p in &primes {
            let np = n * p as usize;
            if p > spf[n] || np > limit {
                break;
            }
            spf[np] = p;
        }
    }
    spf
}

/// `sum_p 1/(p^2 - p)` truncated so that the tail is at most `tolerance`.
///
/// Sieving every prime `<= P` with `P = ceil(1/tolerance) + 1` leaves the
/// tail below `sum_{n > P} 1/(n^2 - n) = 1/P <= 1/(P - 1) <= tolerance`
/// (integer comparison, as in the telescoping bound).
pub fn compute_c(tolerance: f64) -> Result<f64> {
    if !(tolerance > 0.0 && tolerance < 1.0) {
        return Err(Error::invalid(format!(
            "tail tolerance must lie in (0, 1), got {tolerance}"
        )));
    }
    let p_max = (1.0 / tolerance).ceil() as u64 + 1;
    let mut sum = KahanSum::default();
    for_each_prime(p_max, |p| {
        let pf = p as f64;
        sum.add(1.0 / (pf * pf - pf));
    });
    Ok(sum.value())
}

/// The constants of the prime and prime-power Mertens asymptotics.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct MertensConstants {
    /// Stored literal `B1`.
    pub b1: f64,
    /// Computed `C = sum_p 1/(p^2 - p)`.
    pub c: f64,
    /// `B2 = B1 + C`, the prime-power analogue of `B1`.
    pub b2: f64,
    /// Tail tolerance `C` was computed with.
    pub tail_tolerance: f64,
}

/// Builds [`MertensConstants`] with the tail of `C` bounded by
/// `tail_tolerance`.
pub fn mertens_constants(tail_tolerance: f64) -> Result<MertensConstants> {
    let c = compute_c(tail_tolerance)?;
    Ok(MertensConstants {
        b1: MERTENS_B1,
        c,
        b2: MERTENS_B1 + c,
        tail_tolerance,
    })
}

/// One table entry: `value = base^exponent` with `base` prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct PrimePower {
    pub value: u64,
    pub base: u64,
    pub exponent: u32,
}

/// Sorted table of all prime powers up to `limit` with running compensated
/// sums of `p^{-alpha}` (all prime powers) and of `1/p` (primes only).
#[derive(Debug, Clone)]
pub struct PrimePowerTable {
    limit: u64,
    entries: Vec<PrimePower>,
    cumulative: Vec<f64>,
    cumulative_primes: Vec<f64>,
}

impl PrimePowerTable {
    /// Sieves primes up to `limit`, attaches the higher powers by direct
    /// exponentiation, and accumulates the reciprocal sums in value order.
    pub fn build(limit: u64) -> Result<Self> {
        if limit < 2 {
            return Err(Error::invalid(format!(
                "table limit must be at least 2, got {limit}"
            )));
        }
        let mut entries: Vec<PrimePower> = Vec::new();
        for_each_prime(limit, |p| {
            entries.push(PrimePower {
                value: p,
                base: p,
                exponent: 1,
            })
        });
        let n_primes = entries.len();
        for i in 0..n_primes {
            let p = entries[i].base;
            if p > limit / p {
                break;
            }
            let mut value = p * p;
            let mut exponent = 2u32;
            loop {
                entries.push(PrimePower {
                    value,
                    base: p,
                    exponent,
                });
                if value > limit / p {
                    break;
                }
                value *= p;
                exponent += 1;
            }
        }
        entries.sort_unstable_by_key(|e| e.value);
        Ok(Self::from_entries(limit, entries))
    }

    fn from_entries(limit: u64, entries: Vec<PrimePower>) -> Self {
        let mut cumulative = Vec::with_capacity(entries.len());
        let mut cumulative_primes = Vec::with_capacity(entries.len());
        let mut all = KahanSum::default();
        let mut primes_only = KahanSum::default();
        for e in &entries {
            let recip = 1.0 / e.value as f64;
            all.add(recip);
            if e.exponent == 1 {
                primes_only.add(recip);
            }
            cumulative.push(all.value());
            cumulative_primes.push(primes_only.value());
        }
        PrimePowerTable {
            limit,
            entries,
            cumulative,
            cumulative_primes,
        }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn entries(&self) -> &[PrimePower] {
        &self.entries
    }

    /// Running sum of `p^{-alpha}` up to and including entry `i`.
    pub fn cumulative_at(&self, i: usize) -> f64 {
        self.cumulative[i]
    }

    fn check_range(&self, x: f64) -> Result<()> {
        if !(x >= 2.0 && x <= self.limit as f64) {
            return Err(Error::invalid(format!(
                "x = {x} outside the sieved range [2, {}]",
                self.limit
            )));
        }
        Ok(())
    }

    /// Number of entries with `value <= x` (the step-function index).
    fn count_le(&self, x: f64) -> usize {
        self.entries.partition_point(|e| (e.value as f64) <= x)
    }

    /// `sum_{p <= x} 1/p` for real `2 <= x <= limit`.
    pub fn prime_reciprocal_sum(&self, x: f64) -> Result<f64> {
        self.check_range(x)?;
        let idx = self.count_le(x);
        Ok(self.cumulative_primes[idx - 1])
    }

    /// `sum_{p^alpha <= x} p^{-alpha}` for real `2 <= x <= limit`.
    pub fn prime_power_reciprocal_sum(&self, x: f64) -> Result<f64> {
        self.check_range(x)?;
        let idx = self.count_le(x);
        Ok(self.cumulative[idx - 1])
    }

    /// Writes the binary cache: magic `PPT1`, little-endian `u64` limit and
    /// count, then `count` pairs of `u64` value and `f64` cumulative sum.
    pub fn write_cache(&self, path: &Path) -> Result<()> {
        let mut buf: Vec<u8> =
            Vec::with_capacity(4 + 16 + 16 * self.entries.len());
        buf.extend_from_slice(b"PPT1");
        buf.extend_from_slice(&self.limit.to_le_bytes());
        buf.extend_from_slice(&(self.entries.len() as u64).to_le_bytes());
        for (e, &c) in self.entries.iter().zip(&self.cumulative) {
            buf.extend_from_slice(&e.value.to_le_bytes());
            buf.extend_from_slice(&c.to_le_bytes());
        }
        let mut file = std::fs::File::create(path)?;
        file.write_all(&buf)?;
        Ok(())
    }

    /// Reads a cache written by [`Self::write_cache`]. The `(base, exponent)`
    /// decomposition is reconstructed from each value, and the primes-only
    /// cumulative sums are rebuilt with the same compensated summation the
    /// builder uses, so a round trip is bit-identical.
    pub fn read_cache(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        if bytes.len() < 20 || &bytes[0..4] != b"PPT1" {
            return Err(Error::CorruptCache(
                "missing PPT1 magic header".into(),
            ));
        }
        let limit = u64::from_le_bytes(bytes[4..12].try_into().unwrap());
        let count = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
        let expected = 20 + 16 * count;
        if bytes.len() != expected {
            return Err(Error::CorruptCache(format!(
                "expected {expected} bytes for {count} entries, found {}",
                bytes.len()
            )));
        }
        let mut entries = Vec::with_capacity(count);
        let mut stored_cumulative = Vec::with_capacity(count);
        for i in 0..count {
            let off = 20 + 16 * i;
            let value = u64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
            let cum = f64::from_le_bytes(bytes[off + 8..off + 16].try_into().unwrap());
            let (base, exponent) = decompose_prime_power(value);
            entries.push(PrimePower {
                value,
                base,
                exponent,
            });
            stored_cumulative.push(cum);
        }
        let table = Self::from_entries(limit, entries);
        // The stored cumulative sums are authoritative; validate them
        // against the rebuilt ones before swapping in.
        for (i, (&stored, &rebuilt)) in stored_cumulative
            .iter()
            .zip(&table.cumulative)
            .enumerate()
        {
            if (stored - rebuilt).abs() > 1e-12 {
                return Err(Error::CorruptCache(format!(
                    "cumulative sum mismatch at entry {i}: stored {stored}, rebuilt {rebuilt}"
                )));
            }
        }
        let mut out = table;
        out.cumulative = stored_cumulative;
        Ok(out)
    }
}

/// Splits a known prime power into `(base, exponent)` by testing exponents
/// from the largest downward; the first exact root found has a prime base.
fn decompose_prime_power(value: u64) -> (u64, u32) {
    for exponent in (2..=63u32).rev() {
        let approx = (value as f64).powf(1.0 / exponent as f64).round() as u64;
        for base in approx.saturating_sub(1)..=approx + 1 {
            if base >= 2 && base.checked_pow(exponent) == Some(value) {
                return (base, exponent);
            }
        }
    }
    (value, 1)
}

/// `eps(x) = sum_{p^alpha <= x} p^{-alpha} - log log x - B2`.
pub fn epsilon(table: &PrimePowerTable, constants: &MertensConstants, x: f64) -> Result<f64> {
    let sum = table.prime_power_reciprocal_sum(x)?;
    Ok(sum - x.ln().ln() - constants.b2)
}

/// Certifies the two computer checks behind the `eps(x)` window:
///
/// (a) `eps(p^alpha) < 0` for every prime power in `[2, 2278383]`;
/// (b) `eps(p^alpha) + 1.75/(log p^alpha)^2 - p^{-alpha} > 0` for every
///     prime power in `[2, 2278421]`.
///
/// Records the minimum slack of each family and flags positive slacks below
/// `marginal_floor` without failing them.
pub fn verify_proposition(
    table: &PrimePowerTable,
    constants: &MertensConstants,
    marginal_floor: f64,
) -> Result<VerificationReport> {
    if table.limit() < LOWER_MARGIN_LIMIT {
        return Err(Error::invalid(format!(
            "table limit {} is below the sweep end {LOWER_MARGIN_LIMIT}",
            table.limit()
        )));
    }
    let mut report = VerificationReport::new((2.0, LOWER_MARGIN_LIMIT as f64));
    for (i, e) in table.entries().iter().enumerate() {
        if e.value > LOWER_MARGIN_LIMIT {
            break;
        }
        let v = e.value as f64;
        let log_v = v.ln();
        let eps = table.cumulative_at(i) - log_v.ln() - constants.b2;
        if e.value <= NEGATIVITY_LIMIT {
            report.record(v, "eps-negative", -eps, marginal_floor);
        }
        let margin = eps + 1.75 / (log_v * log_v) - 1.0 / v;
        report.record(v, "eps-lower-margin", margin, marginal_floor);
    }
    Ok(report)
}

/// Two-sided prime-sum window at `x`:
/// `|sum_{p <= x} 1/p - log log x - B1| <= 0.2/(log x)^3`, claimed for
/// `x >= 2278383` only.
pub fn check_dusart(
    table: &PrimePowerTable,
    constants: &MertensConstants,
    x: f64,
) -> Result<bool> {
    if x < NEGATIVITY_LIMIT as f64 {
        return Err(Error::invalid(format!(
            "the prime-sum window is only claimed for x >= {NEGATIVITY_LIMIT}, got {x}"
        )));
    }
    let sum = table.prime_reciprocal_sum(x)?;
    let deviation = (sum - x.ln().ln() - constants.b1).abs();
    let log_x = x.ln();
    Ok(deviation <= 0.2 / (log_x * log_x * log_x))
}
