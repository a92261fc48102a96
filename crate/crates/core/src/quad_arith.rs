//! Quadratic characters, class numbers, and local solution counts.
//!
//! For a fundamental discriminant `-d < 0` the character `chi(n) = (-d/n)`
//! (Kronecker symbol) controls how rational primes behave in the imaginary
//! quadratic order of discriminant `-d`.  The count
//!
//! ```text
//!   nu(a) = #{ b mod 2a : b^2 = -d (mod 4a) }
//! ```
//!
//! is multiplicative with `nu(p^k)` equal to `1 + chi(p)` at unramified
//! primes (and collapsing to `1, 0, 0, ...` at ramified ones), and it ties
//! the class number `h(-d)` to short character sums: every reduced binary
//! quadratic form `(a, b, c)` with `a < c` contributes a distinct solution
//! counted by `nu(a)` for `a <= sqrt(d)/2`, so those `nu` sums are bounded
//! by `h(-d)`.  This module verifies all of that numerically: character
//! evaluation, brute-force cross-checks, reduced form enumeration, the
//! Dirichlet series coefficients `r(n) = sum_{m | n} chi(m)`, and the class
//! number inequality used downstream.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::prime_tools::{smallest_prime_factor_sieve, KahanSum};
use crate::report::VerificationReport;

/// Smallest `d` the class number inequality is certified for.
pub const LEMMA_D_FLOOR: u64 = 300_000_000;

/// Class number floor guaranteed on `d > LEMMA_D_FLOOR`.
pub const CLASS_NUMBER_FLOOR: u64 = 101;

/// Seed for the reproducible discriminant sample.
pub const DEFAULT_SAMPLE_SEED: u64 = 1729;

/// Kronecker symbol `(a / n)`, defined for all integers.
///
/// Follows the usual completion of the Jacobi symbol: multiplicativity in
/// the bottom, `(a/2) = 0, 1, -1` for `a` even, `a = +-1 (mod 8)`,
/// `a = +-3 (mod 8)` respectively, `(a/-1) = sign(a)` (with `(0/-1) = 1`),
/// and `(a/0) = 1` iff `a = +-1`.
pub fn kronecker(a: i64, n: i64) -> i32 {
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    let mut a = a;
    let mut n = n;
    let mut sign = 1i32;
    if n < 0 {
        n = -n;
        if a < 0 {
            sign = -sign;
        }
    }
    if n % 2 == 0 {
        if a % 2 == 0 {
            return 0;
        }
        while n % 2 == 0 {
            n /= 2;
            let r = a.rem_euclid(8);
            if r == 3 || r == 5 {
                sign = -sign;
            }
        }
    }
    if n == 1 {
        return sign;
    }
    // Jacobi loop on odd n >= 3.
    a = a.rem_euclid(n);
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                sign = -sign;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            sign = -sign;
        }
        a %= n;
    }
    if n == 1 {
        sign
    } else {
        0
    }
}

fn is_squarefree(mut n: u64) -> bool {
    if n % 4 == 0 {
        return false;
    }
    while n % 2 == 0 {
        n /= 2;
    }
    let mut p = 3u64;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return false;
            }
        }
        p += 2;
    }
    true
}

/// Whether `disc` is a fundamental discriminant of an imaginary quadratic
/// field, i.e. `disc = -d < 0` with either `d = 3 (mod 4)` squarefree, or
/// `d = 0 (mod 4)`, `d/4` squarefree and `d/4 = 1` or `2 (mod 4)`.
pub fn is_fundamental(disc: i64) -> Result<bool> {
    if disc >= 0 {
        return Err(Error::invalid(format!(
            "only negative discriminants are supported; got {disc}"
        )));
    }
    let d = disc.unsigned_abs();
    Ok(match d % 4 {
        3 => is_squarefree(d),
        0 => {
            let q = d / 4;
            q % 4 != 3 && q % 4 != 0 && is_squarefree(q)
        }
        _ => false,
    })
}

/// A validated fundamental discriminant `-d < -3`, stored by its absolute
/// value `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
pub struct FundamentalDiscriminant {
    d: u64,
}

impl FundamentalDiscriminant {
    /// Wrap `-d`, checking fundamentality.
    pub fn new(d: u64) -> Result<Self> {
        if d < 3 {
            return Err(Error::invalid(format!(
                "need d >= 3 for an imaginary quadratic discriminant; got {d}"
            )));
        }
        if d > (i64::MAX as u64) {
            return Err(Error::invalid("discriminant magnitude overflows i64"));
        }
        if !is_fundamental(-(d as i64))? {
            return Err(Error::invalid(format!("-{d} is not fundamental")));
        }
        Ok(FundamentalDiscriminant { d })
    }

    /// The absolute value `d`.
    pub fn d(&self) -> u64 {
        self.d
    }

    /// The signed discriminant `-d`.
    pub fn discriminant(&self) -> i64 {
        -(self.d as i64)
    }

    /// The character value `chi(n) = (-d / n)`.
    pub fn chi(&self, n: i64) -> i32 {
        kronecker(self.discriminant(), n)
    }
}

/// `nu(p^alpha)` from the character: `1 + chi(p)` unless the prime ramifies
/// with exponent at least two, in which case no solutions lift.
fn nu_prime_power(disc: &FundamentalDiscriminant, p: u64, alpha: u32) -> u64 {
    debug_assert!(alpha >= 1);
    let chi = disc.chi(p as i64);
    if chi == 0 && alpha >= 2 {
        0
    } else {
        (1 + chi) as u64
    }
}

/// Multiplicative evaluator for `nu`, caching a sieved range and factoring
/// on demand beyond it.
pub struct NuOracle {
    disc: FundamentalDiscriminant,
    cache: Vec<u16>,
}

impl NuOracle {
    /// Build an oracle whose cached range covers `a <= cache_limit`.
    pub fn new(disc: FundamentalDiscriminant, cache_limit: u64) -> Result<Self> {
        let limit = cache_limit.max(1);
        if limit > 200_000_000 {
            return Err(Error::invalid("nu cache limit above 2e8 is unsupported"));
        }
        let spf = smallest_prime_factor_sieve(limit as usize);
        let mut cache = vec![0u16; (limit + 1) as usize];
        cache[1] = 1;
        for n in 2..=(limit as usize) {
            let p = spf[n] as usize;
            let mut m = n;
            let mut alpha = 0u32;
            while m % p == 0 {
                m /= p;
                alpha += 1;
            }
            let head = nu_prime_power(&disc, p as u64, alpha);
            cache[n] = (head * cache[m] as u64) as u16;
        }
        Ok(NuOracle { disc, cache })
    }

    /// The discriminant this oracle evaluates for.
    pub fn discriminant(&self) -> FundamentalDiscriminant {
        self.disc
    }

    /// `nu(a)` for `a >= 1`.
    pub fn nu(&self, a: u64) -> u64 {
        if (a as usize) < self.cache.len() {
            return self.cache[a as usize] as u64;
        }
        // Factor directly; a is outside the cached range.
        let mut m = a;
        let mut value = 1u64;
        let mut p = 2u64;
        while p * p <= m {
            if m % p == 0 {
                let mut alpha = 0u32;
                while m % p == 0 {
                    m /= p;
                    alpha += 1;
                }
                value *= nu_prime_power(&self.disc, p, alpha);
                if value == 0 {
                    return 0;
                }
            }
            p += if p == 2 { 1 } else { 2 };
        }
        if m > 1 {
            value *= nu_prime_power(&self.disc, m, 1);
        }
        value
    }
}

/// `nu(a)` by direct count of residues `b` in `(-a, a]` with
/// `b^2 = -d (mod 4a)`.  Quadratic in `a`; meant as an oracle for tests.
pub fn nu_bruteforce(disc: &FundamentalDiscriminant, a: u64) -> u64 {
    assert!(a >= 1, "nu is defined for a >= 1");
    let d = disc.d() as i128;
    let modulus = 4 * a as i128;
    let a = a as i128;
    let mut count = 0u64;
    let mut b = 1 - a;
    while b <= a {
        if (b * b + d).rem_euclid(modulus) == 0 {
            count += 1;
        }
        b += 1;
    }
    count
}

/// A reduced positive definite form `a x^2 + b x y + c y^2` of discriminant
/// `b^2 - 4ac = -d`, satisfying `-a < b <= a < c` or `0 <= b <= a = c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct ReducedForm {
    pub a: u64,
    pub b: i64,
    pub c: u64,
}

/// The full set of reduced forms of one discriminant; its size is the class
/// number `h(-d)`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ReducedFormSet {
    pub discriminant: FundamentalDiscriminant,
    pub forms: Vec<ReducedForm>,
}

/// Enumerate all reduced forms of discriminant `-d`.
///
/// `b` runs over the residue of `d` mod 2 (so `b^2 = -d (mod 4)`) up to
/// `sqrt(d/3)`; for each `b`, divisor pairs `a * c = (b^2 + d)/4` with
/// `b <= a <= c` give the reduced forms with `b >= 0`, and the mirror
/// `(a, -b, c)` is added exactly when `0 < b < a < c`.
pub fn reduced_forms(disc: &FundamentalDiscriminant) -> ReducedFormSet {
    let d = disc.d();
    let mut forms = Vec::new();
    let mut b = if d % 2 == 1 { 1u64 } else { 0u64 };
    while 3 * b * b <= d {
        let m = (b * b + d) / 4;
        let mut a = b.max(1);
        while a * a <= m {
            if m % a == 0 {
                let c = m / a;
                forms.push(ReducedForm {
                    a,
                    b: b as i64,
                    c,
                });
                if b > 0 && b < a && a < c {
                    forms.push(ReducedForm {
                        a,
                        b: -(b as i64),
                        c,
                    });
                }
            }
            a += 1;
        }
        b += 2;
    }
    forms.sort_by_key(|f| (f.a, f.b));
    ReducedFormSet {
        discriminant: *disc,
        forms,
    }
}

/// The class number `h(-d)` by reduced form count.
pub fn class_number(disc: &FundamentalDiscriminant) -> u64 {
    reduced_forms(disc).forms.len() as u64
}

/// `sum_{a <= x} nu(a) / a`, compensated.
pub fn nu_reciprocal_sum(oracle: &NuOracle, x: f64) -> f64 {
    let mut sum = KahanSum::new();
    if x < 1.0 {
        return 0.0;
    }
    let limit = x.floor() as u64;
    for a in 1..=limit {
        let v = oracle.nu(a);
        if v != 0 {
            sum.add(v as f64 / a as f64);
        }
    }
    sum.value()
}

/// `sum_{n <= x} r(n) / n` where `r(n) = sum_{u^2 a = n} nu(a)` counts ideals
/// of norm `n`: grouping by the square part turns it into
/// `sum_{u <= sqrt(x)} u^{-2} * (nu reciprocal sum up to x/u^2)`.
pub fn ideal_norm_reciprocal_sum(oracle: &NuOracle, x: f64) -> f64 {
    if x < 1.0 {
        return 0.0;
    }
    let mut sum = KahanSum::new();
    let mut u = 1u64;
    while (u * u) as f64 <= x {
        let inner = nu_reciprocal_sum(oracle, x / ((u * u) as f64));
        sum.add(inner / ((u * u) as f64));
        u += 1;
    }
    sum.value()
}

/// `r(n) = sum_{m | n} chi(m)`, the number of ideals of norm `n`.
pub fn ideal_count_coefficient(disc: &FundamentalDiscriminant, n: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::invalid("ideal counts start at n = 1"));
    }
    let mut total = 0i64;
    let mut m = 1u64;
    while m * m <= n {
        if n % m == 0 {
            total += disc.chi(m as i64) as i64;
            let other = n / m;
            if other != m {
                total += disc.chi(other as i64) as i64;
            }
        }
        m += 1;
    }
    debug_assert!(total >= 0, "divisor character sums are nonnegative");
    Ok(total.max(0) as u64)
}

/// Outcome of the short character sum checks against the class number.
#[derive(Debug, Clone, serde::Serialize)]
pub struct LemmaHOutcome {
    pub d: u64,
    pub class_number: u64,
    /// Largest `a` with `2a <= sqrt(d)`.
    pub a_cutoff: u64,
    /// `sum_{a <= cutoff} nu(a)`.
    pub nu_count_sum: u64,
    /// `sum_{a <= cutoff} nu(a) / a`.
    pub nu_reciprocal_sum: f64,
    /// Whether some `a` sits exactly at `sqrt(d)/2` (impossible for
    /// fundamental `d`, but checked rather than assumed).
    pub boundary_hit: bool,
    pub report: VerificationReport,
}

/// Verify, for one discriminant with `d > 3*10^8`, that
/// `sum_{a <= sqrt(d)/2} nu(a) <= h(-d)` and
/// `sum_{a <= sqrt(d)/2} nu(a)/a <= h(-d)/11`, and that `h(-d) >= 101`.
pub fn check_lemma_h(disc: &FundamentalDiscriminant) -> Result<LemmaHOutcome> {
    let d = disc.d();
    if d <= LEMMA_D_FLOOR {
        return Err(Error::invalid(format!(
            "the class number inequality is asserted for d > {LEMMA_D_FLOOR}; got {d}"
        )));
    }
    let h = class_number(disc);

    // Largest a with 4 a^2 <= d, adjusted to be exact.
    let mut cutoff = d.isqrt() / 2;
    while 4 * (cutoff + 1) * (cutoff + 1) <= d {
        cutoff += 1;
    }
    while cutoff > 0 && 4 * cutoff * cutoff > d {
        cutoff -= 1;
    }
    let boundary_hit = cutoff > 0 && 4 * cutoff * cutoff == d;

    let oracle = NuOracle::new(*disc, cutoff)?;
    let mut count_sum = 0u64;
    let mut reciprocal = KahanSum::new();
    for a in 1..=cutoff {
        let v = oracle.nu(a);
        count_sum += v;
        if v != 0 {
            reciprocal.add(v as f64 / a as f64);
        }
    }
    let reciprocal = reciprocal.value();

    let mut report = VerificationReport::new((1.0, cutoff as f64));
    // h >= 101; integer inequality, slack measured to the nearest violation.
    report.record(
        d as f64,
        "class-number-floor",
        (h as i64 - (CLASS_NUMBER_FLOOR as i64 - 1)) as f64,
        1.0,
    );
    // Count sum <= h: slack of 1 means equality, still a pass.
    report.record(
        d as f64,
        "nu-count-vs-class-number",
        (h as i64 + 1 - count_sum as i64) as f64,
        1.0,
    );
    report.record(
        d as f64,
        "nu-reciprocal-vs-class-number",
        h as f64 / 11.0 - reciprocal,
        1e-3,
    );

    Ok(LemmaHOutcome {
        d,
        class_number: h,
        a_cutoff: cutoff,
        nu_count_sum: count_sum,
        nu_reciprocal_sum: reciprocal,
        boundary_hit,
        report,
    })
}

/// A reproducible sample of fundamental discriminants above the lemma floor:
/// the ten smallest, plus ten drawn from `(3*10^8, 10^9)` with a fixed-seed
/// ChaCha stream, deduplicated and sorted.
pub fn sample_discriminants(seed: u64) -> Vec<FundamentalDiscriminant> {
    let mut picked = BTreeSet::new();
    let mut d = LEMMA_D_FLOOR + 1;
    while picked.len() < 10 {
        if matches!(is_fundamental(-(d as i64)), Ok(true)) {
            picked.insert(d);
        }
        d += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while picked.len() < 20 {
        let candidate = rng.gen_range(LEMMA_D_FLOOR + 1..1_000_000_000u64);
        if matches!(is_fundamental(-(candidate as i64)), Ok(true)) {
            picked.insert(candidate);
        }
    }
    picked
        .into_iter()
        .map(|d| FundamentalDiscriminant::new(d).expect("sampled d is fundamental"))
        .collect()
}

/// Partial sum `sum_{n <= n_terms} chi(n)/n` of the series for `L(1, chi)`,
/// together with a heuristic tail estimate `sqrt(d) log d / n_terms`.
///
/// The character values are sieved multiplicatively from the provided
/// smallest-prime-factor table, which must cover `n_terms`.  The tail figure
/// comes from partial summation against the worst-case character sum bound;
/// it is a working accuracy estimate, not a proven error bound.
pub fn l_one_series(
    disc: &FundamentalDiscriminant,
    spf: &[u32],
    n_terms: usize,
) -> Result<(f64, f64)> {
    if n_terms < 1 {
        return Err(Error::invalid("need at least one series term"));
    }
    if spf.len() <= n_terms {
        return Err(Error::invalid(
            "smallest-prime-factor table does not cover the series length",
        ));
    }
    let mut chi = vec![0i8; n_terms + 1];
    chi[1] = 1;
    for n in 2..=n_terms {
        let p = spf[n] as usize;
        chi[n] = if p == n {
            disc.chi(n as i64) as i8
        } else {
            chi[p] * chi[n / p]
        };
    }
    let mut sum = KahanSum::new();
    for (n, &value) in chi.iter().enumerate().skip(1) {
        if value != 0 {
            sum.add(value as f64 / n as f64);
        }
    }
    let d = disc.d() as f64;
    let tail = d.sqrt() * d.ln() / n_terms as f64;
    Ok((sum.value(), tail))
}

/// Compare `pi h / sqrt(d)` against the `L(1, chi)` series for one
/// discriminant with `d > 4` (the unit count differs below that).
/// Returns `(analytic value, series value, heuristic tail)`.
pub fn class_number_formula_gap(
    disc: &FundamentalDiscriminant,
    spf: &[u32],
    n_terms: usize,
) -> Result<(f64, f64, f64)> {
    if disc.d() <= 4 {
        return Err(Error::invalid(
            "the unit-free class number formula needs d > 4",
        ));
    }
    let h = class_number(disc);
    let analytic = std::f64::consts::PI * h as f64 / (disc.d() as f64).sqrt();
    let (series, tail) = l_one_series(disc, spf, n_terms)?;
    Ok((analytic, series, tail))
}

/// All fundamental `-d` with `lo <= d <= hi`.
pub fn fundamental_discriminants_in(lo: u64, hi: u64) -> Vec<FundamentalDiscriminant> {
    (lo.max(3)..=hi)
        .filter(|&d| matches!(is_fundamental(-(d as i64)), Ok(true)))
        .map(|d| FundamentalDiscriminant::new(d).expect("filtered to fundamental"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disc(d: u64) -> FundamentalDiscriminant {
        FundamentalDiscriminant::new(d).unwrap()
    }

    /// Legendre symbol by exhaustive search for squares mod an odd prime.
    fn legendre_bruteforce(a: i64, p: u64) -> i32 {
        let residue = a.rem_euclid(p as i64) as u64;
        if residue == 0 {
            return 0;
        }
        for x in 1..p {
            if (x * x) % p == residue {
                return 1;
            }
        }
        -1
    }

    fn odd_primes_to(limit: u64) -> Vec<u64> {
        let mut primes = Vec::new();
        'outer: for n in (3..=limit).step_by(2) {
            let mut q = 3;
            while q * q <= n {
                if n % q == 0 {
                    continue 'outer;
                }
                q += 2;
            }
            primes.push(n);
        }
        primes
    }

    #[test]
    fn kronecker_matches_legendre_at_odd_primes() {
        let primes = odd_primes_to(300);
        for &disc_value in &[-3i64, -4, -7, -8, -11, -15, -20, -23, -2383747] {
            for &p in &primes {
                assert_eq!(
                    kronecker(disc_value, p as i64),
                    legendre_bruteforce(disc_value, p),
                    "({disc_value} / {p})"
                );
            }
        }
    }

    #[test]
    fn kronecker_two_follows_the_mod_eight_rule() {
        for a in -50i64..=50 {
            let expected = if a % 2 == 0 {
                0
            } else {
                match a.rem_euclid(8) {
                    1 | 7 => 1,
                    _ => -1,
                }
            };
            assert_eq!(kronecker(a, 2), expected, "({a} / 2)");
        }
        assert_eq!(kronecker(-3, 2), -1);
        assert_eq!(kronecker(-7, 2), 1);
    }

    #[test]
    fn kronecker_edge_bottoms() {
        assert_eq!(kronecker(1, 0), 1);
        assert_eq!(kronecker(-1, 0), 1);
        assert_eq!(kronecker(5, 0), 0);
        assert_eq!(kronecker(7, 1), 1);
        assert_eq!(kronecker(-7, 1), 1);
        assert_eq!(kronecker(-7, -1), -1);
        assert_eq!(kronecker(7, -1), 1);
    }

    #[test]
    fn kronecker_is_multiplicative_in_the_bottom() {
        for &a in &[-23i64, -4, -15, 5] {
            for m in 1i64..=60 {
                for n in 1i64..=60 {
                    assert_eq!(
                        kronecker(a, m * n),
                        kronecker(a, m) * kronecker(a, n),
                        "a = {a}, bottom {m} * {n}"
                    );
                }
            }
        }
    }

    #[test]
    fn character_is_odd_periodic_and_vanishes_on_common_factors() {
        for &dv in &[3u64, 4, 7, 8, 15, 23] {
            let f = disc(dv);
            assert_eq!(f.chi(-1), -1, "chi(-1) for d = {dv}");
            let period = dv as i64;
            for n in 1..=(3 * period) {
                assert_eq!(f.chi(n), f.chi(n + period), "period at {n}, d = {dv}");
                let shares_factor = gcd(n.unsigned_abs(), dv) > 1;
                assert_eq!(f.chi(n) == 0, shares_factor, "support at {n}, d = {dv}");
            }
        }
    }

    fn gcd(mut a: u64, mut b: u64) -> u64 {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a
    }

    #[test]
    fn fundamental_classification_examples() {
        for &d in &[3u64, 4, 7, 8, 11, 15, 20, 23, 24, 2383747] {
            assert!(is_fundamental(-(d as i64)).unwrap(), "-{d} is fundamental");
        }
        for &d in &[1u64, 2, 5, 6, 9, 12, 16, 18, 25, 27, 28, 48] {
            assert!(
                !is_fundamental(-(d as i64)).unwrap(),
                "-{d} is not fundamental"
            );
        }
        assert!(is_fundamental(5).is_err());
        assert!(is_fundamental(0).is_err());
        assert!(FundamentalDiscriminant::new(12).is_err());
        assert!(FundamentalDiscriminant::new(2).is_err());
    }

    #[test]
    fn nu_prime_power_cases() {
        // d = 23: 2 splits (-23 = 1 mod 8), 5 is inert, 23 ramifies.
        let f = disc(23);
        let oracle = NuOracle::new(f, 4000).unwrap();
        assert_eq!(oracle.nu(1), 1);
        assert_eq!(oracle.nu(2), 2);
        assert_eq!(oracle.nu(4), 2);
        assert_eq!(oracle.nu(8), 2);
        assert_eq!(oracle.nu(5), 0);
        assert_eq!(oracle.nu(25), 0);
        assert_eq!(oracle.nu(23), 1);
        assert_eq!(oracle.nu(23 * 23), 0);
        assert_eq!(oracle.nu(2 * 23), 2);
        // d = 3: split/inert pattern mod 3.
        let g = disc(3);
        let o3 = NuOracle::new(g, 100).unwrap();
        assert_eq!(o3.nu(1), 1);
        assert_eq!(o3.nu(3), 1);
        assert_eq!(o3.nu(9), 0);
        assert_eq!(o3.nu(7), 2);
    }

    #[test]
    fn nu_matches_bruteforce() {
        for &dv in &[3u64, 4, 7, 8, 23, 2383747] {
            let f = disc(dv);
            let oracle = NuOracle::new(f, 300).unwrap();
            for a in 1..=300u64 {
                assert_eq!(
                    oracle.nu(a),
                    nu_bruteforce(&f, a),
                    "nu({a}) for d = {dv}"
                );
            }
        }
    }

    #[test]
    fn nu_oracle_agrees_beyond_its_cache() {
        let f = disc(23);
        let small = NuOracle::new(f, 50).unwrap();
        let large = NuOracle::new(f, 5000).unwrap();
        for a in 51..=500u64 {
            assert_eq!(small.nu(a), large.nu(a), "cache seam at {a}");
        }
    }

    #[test]
    fn nu_is_multiplicative_and_divisor_bounded() {
        let f = disc(23);
        let oracle = NuOracle::new(f, 90_000).unwrap();
        for m in 1..=300u64 {
            for n in 1..=300u64 {
                if gcd(m, n) == 1 {
                    assert_eq!(oracle.nu(m * n), oracle.nu(m) * oracle.nu(n));
                }
            }
        }
        // nu(a) <= 2^(number of distinct primes of a).
        let spf = smallest_prime_factor_sieve(10_000);
        for a in 1..=10_000u64 {
            let mut m = a as usize;
            let mut omega = 0u32;
            while m > 1 {
                let p = spf[m] as usize;
                while m % p == 0 {
                    m /= p;
                }
                omega += 1;
            }
            assert!(oracle.nu(a) <= 1u64 << omega, "nu({a}) too large");
        }
    }

    #[test]
    fn reduced_form_examples() {
        assert_eq!(
            reduced_forms(&disc(3)).forms,
            vec![ReducedForm { a: 1, b: 1, c: 1 }]
        );
        assert_eq!(
            reduced_forms(&disc(4)).forms,
            vec![ReducedForm { a: 1, b: 0, c: 1 }]
        );
        assert_eq!(
            reduced_forms(&disc(23)).forms,
            vec![
                ReducedForm { a: 1, b: 1, c: 6 },
                ReducedForm { a: 2, b: -1, c: 3 },
                ReducedForm { a: 2, b: 1, c: 3 },
            ]
        );
        assert_eq!(class_number(&disc(15)), 2);
    }

    #[test]
    fn class_number_one_discriminants() {
        for &d in &[3u64, 4, 7, 8, 11, 19, 43, 67, 163] {
            assert_eq!(class_number(&disc(d)), 1, "h(-{d})");
        }
        // The next fundamental d after each of those has h > 1.
        assert_eq!(class_number(&disc(15)), 2);
        assert_eq!(class_number(&disc(23)), 3);
    }

    #[test]
    fn reduced_forms_satisfy_the_reduction_inequalities() {
        for &dv in &[20u64, 23, 47, 71, 2383747] {
            let f = disc(dv);
            let set = reduced_forms(&f);
            for form in &set.forms {
                let a = form.a as i64;
                let c = form.c as i64;
                assert_eq!(
                    form.b * form.b - 4 * a * c,
                    f.discriminant(),
                    "discriminant of {form:?}"
                );
                let strict = -a < form.b && form.b <= a && a < c;
                let border = 0 <= form.b && form.b <= a && a == c;
                assert!(strict || border, "{form:?} is not reduced");
            }
            // No duplicates.
            let mut sorted = set.forms.clone();
            sorted.dedup();
            assert_eq!(sorted.len(), set.forms.len());
        }
    }

    #[test]
    fn large_discriminant_class_number() {
        assert_eq!(class_number(&disc(2383747)), 98);
    }

    #[test]
    fn coefficient_identity_links_nu_and_divisor_sums() {
        // r(n) = sum over u^2 a = n of nu(a).
        for &dv in &[15u64, 23] {
            let f = disc(dv);
            let oracle = NuOracle::new(f, 2000).unwrap();
            for n in 1..=2000u64 {
                let direct = ideal_count_coefficient(&f, n).unwrap();
                let mut via_nu = 0u64;
                let mut u = 1u64;
                while u * u <= n {
                    if n % (u * u) == 0 {
                        via_nu += oracle.nu(n / (u * u));
                    }
                    u += 1;
                }
                assert_eq!(direct, via_nu, "n = {n}, d = {dv}");
            }
        }
    }

    #[test]
    fn ideal_counts_small_values() {
        let f = disc(23);
        // chi(2) = 1 so r(2) = 2; chi(5) = -1 so r(5) = 0; r(1) = 1.
        assert_eq!(ideal_count_coefficient(&f, 1).unwrap(), 1);
        assert_eq!(ideal_count_coefficient(&f, 2).unwrap(), 2);
        assert_eq!(ideal_count_coefficient(&f, 5).unwrap(), 0);
        assert_eq!(ideal_count_coefficient(&f, 23).unwrap(), 1);
        assert!(ideal_count_coefficient(&f, 0).is_err());
    }

    #[test]
    fn ideal_norm_sum_matches_direct_divisor_sum() {
        let f = disc(23);
        let oracle = NuOracle::new(f, 5000).unwrap();
        let via_nu = ideal_norm_reciprocal_sum(&oracle, 5000.0);
        let mut direct = KahanSum::new();
        for n in 1..=5000u64 {
            let r = ideal_count_coefficient(&f, n).unwrap();
            if r != 0 {
                direct.add(r as f64 / n as f64);
            }
        }
        assert!((via_nu - direct.value()).abs() < 1e-10);
        // And the zeta(2) factor dominates the square parts.
        let nu_part = nu_reciprocal_sum(&oracle, 5000.0);
        let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
        assert!(via_nu <= zeta2 * nu_part);
        assert!(via_nu > nu_part);
    }

    #[test]
    fn reciprocal_sums_handle_degenerate_ranges() {
        let oracle = NuOracle::new(disc(23), 100).unwrap();
        assert_eq!(nu_reciprocal_sum(&oracle, 0.5), 0.0);
        assert_eq!(nu_reciprocal_sum(&oracle, 1.0), 1.0);
        assert_eq!(ideal_norm_reciprocal_sum(&oracle, 1.0), 1.0);
    }

    #[test]
    fn lemma_check_rejects_small_discriminants() {
        assert!(check_lemma_h(&disc(23)).is_err());
    }

    #[test]
    fn sample_is_deterministic_sorted_and_in_range() {
        let a = sample_discriminants(DEFAULT_SAMPLE_SEED);
        let b = sample_discriminants(DEFAULT_SAMPLE_SEED);
        assert_eq!(a, b);
        assert_eq!(a.len(), 20);
        for w in a.windows(2) {
            assert!(w[0].d() < w[1].d());
        }
        assert!(a.iter().all(|f| f.d() > LEMMA_D_FLOOR && f.d() < 1_000_000_000));
        // The ten smallest fundamental discriminants above the floor are
        // present, so the first entry is within a few of the floor.
        assert!(a[0].d() - LEMMA_D_FLOOR < 30);
        let c = sample_discriminants(DEFAULT_SAMPLE_SEED + 1);
        assert_ne!(a, c, "different seeds should move the random half");
    }

    #[test]
    fn class_number_formula_small_cases() {
        let spf = smallest_prime_factor_sieve(200_000);
        for &dv in &[7u64, 8, 11, 15, 23, 24] {
            let f = disc(dv);
            let (analytic, series, tail) =
                class_number_formula_gap(&f, &spf, 200_000).unwrap();
            assert!(
                (analytic - series).abs() <= tail,
                "d = {dv}: {analytic} vs {series} (tail {tail})"
            );
        }
        assert!(class_number_formula_gap(&disc(4), &spf, 1000).is_err());
    }

    #[test]
    fn fundamental_listing_matches_direct_filter() {
        let list = fundamental_discriminants_in(3, 100);
        assert_eq!(list.first().map(|f| f.d()), Some(3));
        assert!(list.iter().any(|f| f.d() == 23));
        assert!(!list.iter().any(|f| f.d() == 12));
        // Density sanity: squarefree d = 3 mod 4 contribute 2/pi^2, and
        // d = 4q with q squarefree, q = 1, 2 mod 4 contribute 1/pi^2.
        let count = fundamental_discriminants_in(3, 10_000).len() as f64;
        assert!((count / 10_000.0 - 0.30396).abs() < 0.005);
    }
}
