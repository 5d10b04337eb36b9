//! Exact integer arithmetic behind the spectral recognition layer:
//! square-free decompositions, perfect-power tests, float-to-integer
//! recognition, quadratic-surd classification, and the simultaneous
//! Diophantine approximation search used by the transfer witnesses.

use once_cell::sync::Lazy;
use thiserror::Error;

/// Trial division covers every prime up to this bound.
const TRIAL_BOUND: u64 = 1_000_000;

static SMALL_PRIMES: Lazy<Vec<u32>> = Lazy::new(|| {
    let n = TRIAL_BOUND as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::with_capacity(80_000);
    for p in 2..=n {
        if composite[p] {
            continue;
        }
        primes.push(p as u32);
        let mut q = p * p;
        while q <= n {
            composite[q] = true;
            q += p;
        }
    }
    primes
});

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NumberTheoryError {
    #[error("input {0} out of range (expected 1..=2^63-1)")]
    OutOfRange(u64),
    #[error("factorization limit: residual {residual} is composite beyond the trial bound with no detectable square or cube part")]
    FactorizationLimit { residual: u64 },
}

/// `n == root * root * square_free` with `square_free` square-free.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SquareFreeDecomposition {
    pub n: u64,
    pub square_free: u64,
    pub root: u64,
}

/// Splits `n` into its square-free part and the root of its square part.
///
/// Trial-divides by every prime up to one million, then resolves the
/// residual cofactor: anything at most the bound squared must be prime, a
/// perfect square folds into the root, a prime passes a deterministic
/// Miller-Rabin test, and a perfect cube splits one factor each way. A
/// residual surviving all four tests is a product of two or three distinct
/// huge primes whose squareness cannot be decided cheaply, so it is
/// reported as an error instead of guessed at.
pub fn square_free_part(n: u64) -> Result<SquareFreeDecomposition, NumberTheoryError> {
    if n == 0 || n > i64::MAX as u64 {
        return Err(NumberTheoryError::OutOfRange(n));
    }
    let mut rem = n;
    let mut free = 1u64;
    let mut root = 1u64;
    for &p in SMALL_PRIMES.iter() {
        let p = p as u64;
        if p * p > rem {
            break;
        }
        if !rem.is_multiple_of(p) {
            continue;
        }
        let mut e = 0u32;
        while rem.is_multiple_of(p) {
            rem /= p;
            e += 1;
        }
        root *= p.pow(e / 2);
        if e % 2 == 1 {
            free *= p;
        }
    }
    if rem > 1 {
        if rem <= TRIAL_BOUND * TRIAL_BOUND {
            // no prime factor below its square root survived trial division
            free *= rem;
        } else if is_perfect_square(rem) {
            root *= rem.isqrt();
        } else if is_prime(rem) {
            free *= rem;
        } else if let Some(c) = exact_cbrt(rem) {
            free *= c;
            root *= c;
        } else {
            return Err(NumberTheoryError::FactorizationLimit { residual: rem });
        }
    }
    Ok(SquareFreeDecomposition {
        n,
        square_free: free,
        root,
    })
}

pub fn is_perfect_square(n: u64) -> bool {
    let r = n.isqrt();
    r * r == n
}

/// Exact integer square root when `n` is a perfect square.
pub fn perfect_sqrt(n: u64) -> Option<u64> {
    let r = n.isqrt();
    (r * r == n).then_some(r)
}

fn exact_cbrt(n: u64) -> Option<u64> {
    let guess = (n as f64).cbrt().round() as u64;
    for c in guess.saturating_sub(1)..=guess + 1 {
        if let Some(cube) = c.checked_mul(c).and_then(|s| s.checked_mul(c)) {
            if cube == n {
                return Some(c);
            }
        }
    }
    None
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin; the fixed witness set decides every u64.
fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &WITNESSES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// All square-free divisors of `n` (including 1), ascending.
pub fn square_free_divisors(n: u64) -> Result<Vec<u64>, NumberTheoryError> {
    if n == 0 {
        return Err(NumberTheoryError::OutOfRange(0));
    }
    let mut rem = n;
    let mut primes = Vec::new();
    for &p in SMALL_PRIMES.iter() {
        let p = p as u64;
        if p * p > rem {
            break;
        }
        if rem.is_multiple_of(p) {
            primes.push(p);
            while rem.is_multiple_of(p) {
                rem /= p;
            }
        }
    }
    if rem > 1 {
        if rem <= TRIAL_BOUND * TRIAL_BOUND || is_prime(rem) {
            primes.push(rem);
        } else if let Some(r) = perfect_sqrt(rem) {
            primes.push(r);
        } else if let Some(c) = exact_cbrt(rem) {
            primes.push(c);
        } else {
            return Err(NumberTheoryError::FactorizationLimit { residual: rem });
        }
    }
    let mut divs = vec![1u64];
    for &p in &primes {
        let len = divs.len();
        for i in 0..len {
            divs.push(divs[i] * p);
        }
    }
    divs.sort_unstable();
    Ok(divs)
}

/// Nearest integer to `x` when it lies within `tol`; `tol` must sit in
/// (0, 0.5) so the answer is unambiguous.
pub fn recognize_integer(x: f64, tol: f64) -> Option<i64> {
    assert!(
        tol > 0.0 && tol < 0.5,
        "recognition tolerance must lie in (0, 0.5)"
    );
    if !x.is_finite() || x.abs() > 4.0e15 {
        return None;
    }
    let r = x.round();
    ((x - r).abs() < tol).then_some(r as i64)
}

#[derive(Debug, Clone)]
pub struct ClassifyConfig {
    /// Recognition tolerance for matching floats to exact targets.
    pub tol: f64,
    /// Largest square-free radicand the search will consider.
    pub delta_max: u64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            tol: 1e-6,
            delta_max: 1_000_000,
        }
    }
}

/// Outcome of fitting a value set to a common quadratic form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QuadraticClass {
    /// Every value recognizes as an integer.
    AllInteger {
        values: Vec<i64>,
    },
    /// Every value equals (a + b_i * sqrt(delta)) / 2 for one shared pair
    /// (a, delta) with delta square-free and at least 2.
    Quadratic {
        a: i64,
        delta: u64,
        b: Vec<i64>,
    },
    Unclassifiable(UnclassifiableKind),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UnclassifiableKind {
    /// Every value was fully resolved but no shared (a, delta) exists.
    /// This is a sound proof that the set has no common form within the
    /// searched ranges, not a numerical failure.
    NoCommonForm,
    /// The indexed value matched no integer and no in-range surd.
    UnrecognizedValue { index: usize },
    /// The indexed value only matched surds whose radicand exceeds the
    /// configured bound, so no sound verdict is possible.
    DeltaOutOfRange { index: usize },
}

/// Candidate representation (a + b * sqrt(delta)) / 2 for one value.
#[derive(Debug, Clone, Copy)]
struct SurdCandidate {
    a: i64,
    delta: u64,
    b: i64,
}

pub fn classify_quadratic(values: &[f64], tol: f64) -> QuadraticClass {
    classify_quadratic_with(
        values,
        &ClassifyConfig {
            tol,
            ..ClassifyConfig::default()
        },
    )
}

/// Fits all `values` to integers or to a single shared form
/// (a + b_i * sqrt(delta)) / 2 with integer a, b_i and square-free
/// delta >= 2. The half-trace a is searched over |a| <= 2*max|value| + 2
/// and radicands up to `delta_max`; integer members force a = 2*value, so
/// two distinct integer members in a mixed set rule the form out
/// immediately.
pub fn classify_quadratic_with(values: &[f64], cfg: &ClassifyConfig) -> QuadraticClass {
    let ints: Vec<Option<i64>> = values
        .iter()
        .map(|&x| recognize_integer(x, cfg.tol))
        .collect();
    if ints.iter().all(Option::is_some) {
        return QuadraticClass::AllInteger {
            values: ints.into_iter().flatten().collect(),
        };
    }

    // Integer members admit only b = 0, which pins a to twice their value.
    let mut forced_a: Option<i64> = None;
    for z in ints.iter().flatten() {
        let a = 2 * z;
        match forced_a {
            None => forced_a = Some(a),
            Some(prev) if prev != a => {
                return QuadraticClass::Unclassifiable(UnclassifiableKind::NoCommonForm)
            }
            _ => {}
        }
    }

    let max_abs = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let a_bound = (2.0 * max_abs).floor() as i64 + 2;

    let mut surd_members: Vec<(usize, Vec<SurdCandidate>)> = Vec::new();
    let mut truncated_at: Option<usize> = None;
    for (idx, (&x, z)) in values.iter().zip(&ints).enumerate() {
        if z.is_some() {
            continue;
        }
        let mut cands = Vec::new();
        let mut truncated = false;
        for a in -a_bound..=a_bound {
            let d = 2.0 * x - a as f64;
            let dd = d * d;
            let d0 = dd.round();
            if !(1.0..=4.0e18).contains(&d0) {
                continue;
            }
            // |d| carries the tolerance through the squaring
            if (dd - d0).abs() > cfg.tol * (4.0 * d.abs() + 4.0) {
                continue;
            }
            let sf = match square_free_part(d0 as u64) {
                Ok(sf) => sf,
                Err(_) => {
                    truncated = true;
                    continue;
                }
            };
            if sf.square_free < 2 {
                // a rational candidate; those belong to the integer branch
                continue;
            }
            if sf.square_free > cfg.delta_max {
                truncated = true;
                continue;
            }
            let b = if d < 0.0 {
                -(sf.root as i64)
            } else {
                sf.root as i64
            };
            let rebuilt = (a as f64 + b as f64 * (sf.square_free as f64).sqrt()) / 2.0;
            if (rebuilt - x).abs() > 4.0 * cfg.tol {
                continue;
            }
            cands.push(SurdCandidate {
                a,
                delta: sf.square_free,
                b,
            });
        }
        if cands.is_empty() {
            return QuadraticClass::Unclassifiable(if truncated {
                UnclassifiableKind::DeltaOutOfRange { index: idx }
            } else {
                UnclassifiableKind::UnrecognizedValue { index: idx }
            });
        }
        if truncated && truncated_at.is_none() {
            truncated_at = Some(idx);
        }
        surd_members.push((idx, cands));
    }

    // Intersect the (a, delta) pairs across all irrational members.
    let mut common: Vec<(i64, u64)> = surd_members[0].1.iter().map(|c| (c.a, c.delta)).collect();
    for (_, cands) in &surd_members[1..] {
        common.retain(|&(a, d)| cands.iter().any(|c| c.a == a && c.delta == d));
    }
    if let Some(af) = forced_a {
        common.retain(|&(a, _)| a == af);
    }
    if common.is_empty() {
        return QuadraticClass::Unclassifiable(match truncated_at {
            Some(index) => UnclassifiableKind::DeltaOutOfRange { index },
            None => UnclassifiableKind::NoCommonForm,
        });
    }
    common.sort_by_key(|&(a, d)| (d, a.unsigned_abs(), a < 0));
    let (a, delta) = common[0];

    let mut b = vec![0i64; values.len()];
    for (idx, cands) in &surd_members {
        let c = cands
            .iter()
            .find(|c| c.a == a && c.delta == delta)
            .expect("candidate survived intersection");
        b[*idx] = c.b;
    }
    QuadraticClass::Quadratic { a, delta, b }
}

/// A simultaneous approximation witness: `|l * lambda_i - alpha_i - q_i|`
/// stays below the requested bound for every coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct KroneckerWitness {
    pub l: u64,
    pub q: Vec<i64>,
    pub errors: Vec<f64>,
    pub max_error: f64,
}

/// Scans l = 1..=l_max for the first integer carrying every `l*lambda_i`
/// within `eps` of `alpha_i` modulo 1. Returns None when the bound is
/// exhausted; the smallest witness always wins.
pub fn kronecker_witness(
    lambdas: &[f64],
    alphas: &[f64],
    eps: f64,
    l_max: u64,
) -> Option<KroneckerWitness> {
    assert_eq!(
        lambdas.len(),
        alphas.len(),
        "each target needs exactly one shift"
    );
    assert!(eps > 0.0, "approximation bound must be positive");
    for l in 1..=l_max {
        let lf = l as f64;
        let mut q = Vec::with_capacity(lambdas.len());
        let mut errors = Vec::with_capacity(lambdas.len());
        let mut max_error = 0.0f64;
        for (&lam, &alpha) in lambdas.iter().zip(alphas) {
            let y = lf * lam - alpha;
            let qi = y.round();
            let e = (y - qi).abs();
            q.push(qi as i64);
            errors.push(e);
            max_error = max_error.max(e);
        }
        if max_error < eps {
            return Some(KroneckerWitness {
                l,
                q,
                errors,
                max_error,
            });
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_free_small_values() {
        let cases = [
            (1u64, 1u64, 1u64),
            (2, 2, 1),
            (4, 1, 2),
            (8, 2, 2),
            (12, 3, 2),
            (18, 2, 3),
            (49, 1, 7),
            (50, 2, 5),
            (360, 10, 6),
            (1_000_000, 1, 1000),
        ];
        for (n, c, s) in cases {
            let d = square_free_part(n).unwrap();
            assert_eq!((d.square_free, d.root), (c, s), "n = {n}");
            assert_eq!(d.root * d.root * d.square_free, n);
        }
    }

    #[test]
    fn square_free_rejects_out_of_range() {
        assert_eq!(square_free_part(0), Err(NumberTheoryError::OutOfRange(0)));
        assert!(square_free_part(u64::MAX).is_err());
    }

    #[test]
    fn square_free_resolves_large_residuals() {
        // prime residual above the trial bound but below its square
        let p = 999_999_937u64; // prime
        let d = square_free_part(4 * p).unwrap();
        assert_eq!((d.square_free, d.root), (p, 2));

        // square residual above the trial-bound squared
        let q = 1_000_003u64; // prime
        let d = square_free_part(q * q).unwrap();
        assert_eq!((d.square_free, d.root), (1, q));

        // huge prime residual, caught by Miller-Rabin
        let big = 1_000_000_000_039u64;
        assert!(is_prime(big));
        let d = square_free_part(2 * big).unwrap();
        assert_eq!((d.square_free, d.root), (2 * big, 1));

        // cube of a prime above the trial bound
        let d = square_free_part(q * q * q).unwrap();
        assert_eq!((d.square_free, d.root), (q, q));
    }

    #[test]
    fn square_free_reports_unresolvable_residual() {
        let p = 1_000_003u64;
        let q = 1_000_033u64;
        assert!(is_prime(p) && is_prime(q));
        assert!(p * q > TRIAL_BOUND * TRIAL_BOUND);
        match square_free_part(p * q) {
            Err(NumberTheoryError::FactorizationLimit { residual }) => {
                assert_eq!(residual, p * q)
            }
            other => panic!("expected factorization limit, got {other:?}"),
        }
    }

    #[test]
    fn perfect_square_edges() {
        assert!(is_perfect_square(0));
        assert!(is_perfect_square(1));
        assert!(!is_perfect_square(2));
        assert!(is_perfect_square(1 << 62));
        assert!(!is_perfect_square(u64::MAX));
        assert_eq!(perfect_sqrt(144), Some(12));
        assert_eq!(perfect_sqrt(145), None);
    }

    #[test]
    fn square_free_divisor_sets() {
        assert_eq!(square_free_divisors(1).unwrap(), vec![1]);
        assert_eq!(square_free_divisors(8).unwrap(), vec![1, 2]);
        assert_eq!(square_free_divisors(12).unwrap(), vec![1, 2, 3, 6]);
        assert_eq!(
            square_free_divisors(360).unwrap(),
            vec![1, 2, 3, 5, 6, 10, 15, 30]
        );
    }

    #[test]
    fn integer_recognition_window() {
        assert_eq!(recognize_integer(2.9999999, 1e-6), Some(3));
        assert_eq!(recognize_integer(3.0000001, 1e-6), Some(3));
        assert_eq!(recognize_integer(2.99999, 1e-6), None);
        assert_eq!(recognize_integer(-4.4, 0.41), Some(-4));
        assert_eq!(recognize_integer(f64::NAN, 1e-6), None);
    }

    #[test]
    fn classify_golden_pair() {
        let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
        let psi = (1.0 - 5.0f64.sqrt()) / 2.0;
        match classify_quadratic(&[phi, psi], 1e-6) {
            QuadraticClass::Quadratic { a, delta, b } => {
                assert_eq!((a, delta), (1, 5));
                assert_eq!(b, vec![1, -1]);
            }
            other => panic!("expected quadratic class, got {other:?}"),
        }
    }

    #[test]
    fn classify_all_integer() {
        match classify_quadratic(&[3.0, -1.0000000001, 0.0], 1e-6) {
            QuadraticClass::AllInteger { values } => assert_eq!(values, vec![3, -1, 0]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn classify_mixed_integer_and_surd() {
        // 1 pins a = 2; 1 + sqrt(3) = (2 + 2*sqrt(3)) / 2 fits the same a
        let vals = [1.0, 1.0 + 3.0f64.sqrt()];
        match classify_quadratic(&vals, 1e-6) {
            QuadraticClass::Quadratic { a, delta, b } => {
                assert_eq!((a, delta), (2, 3));
                assert_eq!(b, vec![0, 2]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn classify_detects_conflicts() {
        // 1 forces a = 2 while sqrt(2) needs a = 0
        assert_eq!(
            classify_quadratic(&[1.0, 2.0f64.sqrt()], 1e-6),
            QuadraticClass::Unclassifiable(UnclassifiableKind::NoCommonForm)
        );
        // two integers with different half-traces in a mixed set
        assert_eq!(
            classify_quadratic(&[1.0, -1.0, 2.0f64.sqrt()], 1e-6),
            QuadraticClass::Unclassifiable(UnclassifiableKind::NoCommonForm)
        );
        // surds with incompatible radicands
        assert_eq!(
            classify_quadratic(&[2.0f64.sqrt(), 3.0f64.sqrt()], 1e-6),
            QuadraticClass::Unclassifiable(UnclassifiableKind::NoCommonForm)
        );
    }

    #[test]
    fn classify_unrecognized_and_bounded() {
        // half-integers admit no representation with delta >= 2
        assert_eq!(
            classify_quadratic(&[1.5, 2.0f64.sqrt()], 1e-6),
            QuadraticClass::Unclassifiable(UnclassifiableKind::UnrecognizedValue { index: 0 })
        );
        // sqrt(7) exists but the radicand bound cuts it off
        let cfg = ClassifyConfig {
            tol: 1e-6,
            delta_max: 5,
        };
        assert_eq!(
            classify_quadratic_with(&[7.0f64.sqrt()], &cfg),
            QuadraticClass::Unclassifiable(UnclassifiableKind::DeltaOutOfRange { index: 0 })
        );
    }

    #[test]
    fn classify_shifted_surds() {
        let vals = [2.0 + 2.0f64.sqrt(), 2.0 - 2.0f64.sqrt()];
        match classify_quadratic(&vals, 1e-6) {
            QuadraticClass::Quadratic { a, delta, b } => {
                assert_eq!((a, delta), (4, 2));
                assert_eq!(b, vec![2, -2]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn kronecker_prefers_smallest_witness() {
        let w = kronecker_witness(&[5.0f64.sqrt()], &[0.0], 0.25, 100).unwrap();
        // l = 1 already lands within 0.25 of an integer
        assert_eq!(w.l, 1);
        assert_eq!(w.q, vec![2]);
        assert!((w.max_error - (5.0f64.sqrt() - 2.0)).abs() < 1e-12);
    }

    #[test]
    fn kronecker_exhaustion_returns_none() {
        // sqrt(2)/2 mod 1 never comes within 1e-9 of 0.5 for l <= 10
        assert!(kronecker_witness(&[2.0f64.sqrt()], &[0.5], 1e-9, 10).is_none());
    }

    #[test]
    fn kronecker_simultaneous_targets() {
        let lambdas = [2.0f64.sqrt(), 10.0f64.sqrt()];
        let alphas = [0.25, -0.125];
        if let Some(w) = kronecker_witness(&lambdas, &alphas, 0.05, 100_000) {
            for ((&lam, &alpha), (&q, &err)) in
                lambdas.iter().zip(&alphas).zip(w.q.iter().zip(&w.errors))
            {
                let recomputed = (w.l as f64 * lam - alpha - q as f64).abs();
                assert!((recomputed - err).abs() < 1e-12);
                assert!(err < 0.05);
            }
        } else {
            panic!("expected a witness below 100000");
        }
    }
}
