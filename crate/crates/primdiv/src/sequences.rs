//! Exact Lucas/Lehmer sequence generation and the decision procedure for
//! "the n-th element has a primitive divisor".
//!
//! A pair (p, q) with q >= 1, |p| < 2q, gcd(p + 2q, q) = 1 determines the
//! conjugate roots of X^2 - sqrt(p+2q) X + q. The sequence is generated by
//! an integer recurrence of alternating degree, so no irrational arithmetic
//! appears anywhere.

use crate::arith;
use crate::cyclotomic;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum PairError {
    #[error("p + 2q and q are not coprime")]
    NotCoprime,
    #[error("|p| >= 2q: the roots are real (or q is not positive)")]
    RealCase,
    #[error("alpha/beta is a root of unity")]
    RootOfUnity,
    #[error("q = 0 or p + 2q = 0")]
    ZeroParameter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SequenceKind {
    Lucas,
    Lehmer,
}

/// Validated parameters of a Lucas or Lehmer sequence in the complex case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SequencePair {
    pub p: i64,
    pub q: i64,
    pub kind: SequenceKind,
    /// L = p + 2q = (alpha + beta)^2
    pub l: i64,
    /// M = p - 2q = (alpha - beta)^2
    pub m: i64,
}

fn integer_sqrt(v: i64) -> Option<i64> {
    if v < 0 {
        return None;
    }
    let r = (v as f64).sqrt() as i64;
    (r.saturating_sub(2)..=r + 2).find(|&c| c >= 0 && c * c == v)
}

impl SequencePair {
    /// Validate (p, q) and classify the sequence. Only the complex
    /// conjugate case |p| < 2q is accepted; q <= 0 and the real case are
    /// reported as errors rather than normalized away.
    pub fn new(p: i64, q: i64) -> Result<Self, PairError> {
        if q == 0 || p + 2 * q == 0 {
            return Err(PairError::ZeroParameter);
        }
        if q < 0 || p.abs() >= 2 * q {
            return Err(PairError::RealCase);
        }
        // alpha/beta is a root of unity iff 2cos of its angle is rational,
        // i.e. p in {0, +-q, +-2q}; with |p| < 2q this means p in {0, +-q}.
        if p == 0 || p.abs() == q {
            return Err(PairError::RootOfUnity);
        }
        let l = p + 2 * q;
        if arith::gcd(l.unsigned_abs(), q.unsigned_abs()) != 1 {
            return Err(PairError::NotCoprime);
        }
        let kind = if integer_sqrt(l).is_some() {
            SequenceKind::Lucas
        } else {
            SequenceKind::Lehmer
        };
        Ok(SequencePair {
            p,
            q,
            kind,
            l,
            m: p - 2 * q,
        })
    }

    /// sqrt(L) for Lucas pairs.
    pub fn lucas_root(&self) -> Option<i64> {
        match self.kind {
            SequenceKind::Lucas => integer_sqrt(self.l),
            SequenceKind::Lehmer => None,
        }
    }
}

/// One element of the sequence, in the normalization of its kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceElement {
    pub n: u64,
    pub value: BigInt,
}

/// Lehmer-normalized values u_0..u_n (inclusive) by the alternating
/// recurrence u_{k+2} = L u_{k+1} - q u_k (k odd), u_{k+2} = u_{k+1} - q u_k
/// (k even), u_0 = 0, u_1 = 1.
#[cfg(test)]
fn lehmer_prefix(pair: &SequencePair, n: u64) -> Vec<BigInt> {
    let mut u = Vec::with_capacity(n as usize + 2);
    u.push(BigInt::zero());
    u.push(BigInt::one());
    let (l, q) = (BigInt::from(pair.l), BigInt::from(pair.q));
    for k in 0..n.saturating_sub(1) {
        let next = if k % 2 == 1 {
            &l * &u[k as usize + 1] - &q * &u[k as usize]
        } else {
            &u[k as usize + 1] - &q * &u[k as usize]
        };
        u.push(next);
    }
    u.truncate(n as usize + 1);
    u
}

fn kind_value(pair: &SequencePair, n: u64, lehmer_value: &BigInt) -> BigInt {
    match pair.kind {
        SequenceKind::Lehmer => lehmer_value.clone(),
        SequenceKind::Lucas => {
            if n.is_multiple_of(2) {
                lehmer_value * pair.lucas_root().expect("Lucas pair has square L")
            } else {
                lehmer_value.clone()
            }
        }
    }
}

/// Lehmer-normalized values at the (sorted, distinct) requested indices,
/// by a rolling two-term recurrence; memory stays proportional to the
/// number of captured values, not the largest index.
fn lehmer_values_at(pair: &SequencePair, indices: &[u64]) -> Vec<BigInt> {
    debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
    let mut out = Vec::with_capacity(indices.len());
    let Some(&max) = indices.last() else {
        return out;
    };
    let (l, q) = (BigInt::from(pair.l), BigInt::from(pair.q));
    let mut cur = BigInt::zero(); // u_k
    let mut next = BigInt::one(); // u_{k+1}
    let mut want = indices.iter().peekable();
    for k in 0..=max {
        if want.peek() == Some(&&k) {
            out.push(cur.clone());
            want.next();
        }
        if k < max {
            let after = if k.is_multiple_of(2) {
                &next - &q * &cur
            } else {
                &l * &next - &q * &cur
            };
            cur = std::mem::replace(&mut next, after);
        }
    }
    out
}

/// Exact n-th element in the sequence's own normalization (Lucas values
/// carry the extra sqrt(L) factor at even indices).
pub fn element(pair: &SequencePair, n: u64) -> SequenceElement {
    let v = lehmer_values_at(pair, &[n]);
    SequenceElement {
        n,
        value: kind_value(pair, n, &v[0]),
    }
}

/// Decide whether u_n has a primitive divisor, exactly.
///
/// Strips from |u_n| every prime that can divide the discriminant factor
/// ((alpha-beta)^2 for Lucas, (alpha^2-beta^2)^2 for Lehmer) or an earlier
/// element. Primes of earlier elements are reached through the elements at
/// proper divisors of n: any prime dividing u_n and u_m divides
/// u_gcd(m,n), which is a proper-divisor element. A remaining factor > 1
/// is a primitive divisor. Elements with |u_n| = 1 have none vacuously.
pub fn has_primitive_divisor(pair: &SequencePair, n: u64) -> bool {
    assert!(n >= 2, "primitive divisors are defined from n = 2 on");
    let d_min = match pair.kind {
        SequenceKind::Lucas => 2u64,
        SequenceKind::Lehmer => 3u64,
    };
    let indices: Vec<u64> = arith::factor(n)
        .divisors()
        .into_iter()
        .filter(|&d| d >= d_min && d < n)
        .chain(std::iter::once(n))
        .collect();
    let values = lehmer_values_at(pair, &indices);
    let mut v = kind_value(pair, n, values.last().expect("n is captured")).abs();
    if v.is_zero() {
        // cannot happen when alpha/beta is not a root of unity
        return false;
    }
    let mut c = match pair.kind {
        SequenceKind::Lucas => BigInt::from(pair.m).abs(),
        SequenceKind::Lehmer => (BigInt::from(pair.l) * BigInt::from(pair.m)).abs(),
    };
    for (&d, value) in indices.iter().zip(values.iter()) {
        if d < n {
            c *= kind_value(pair, d, value).abs();
        }
    }
    loop {
        let g = v.gcd(&c);
        if g.is_one() {
            break;
        }
        v /= g;
    }
    v > BigInt::one()
}

/// Outcome of the cyclotomic screening test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScreenVerdict {
    /// |G_n(p,q)| exceeds P(n/(n,3)): u_n must have a primitive divisor.
    CertifiedPrimitive,
    /// The screen is inconclusive; the exact definition must decide.
    Candidate,
}

/// Screen u_n for n > 12 through the exact integer inequality
/// |G_n(p,q)| > P(n/(n,3)); the contrapositive of the screening result
/// certifies a primitive divisor.
pub fn stewart_screen(pair: &SequencePair, n: u64) -> ScreenVerdict {
    assert!(n > 12, "the screening inequality is stated for n > 12");
    let g = cyclotomic::g_eval_homogeneous(n, pair.p, pair.q).expect("n > 12 implies n >= 3");
    let cap = BigInt::from(arith::stewart_prime_cap(n));
    if g.abs() > cap {
        ScreenVerdict::CertifiedPrimitive
    } else {
        ScreenVerdict::Candidate
    }
}

/// All n in [n_lo, n_hi] whose element has no primitive divisor, using the
/// screen as a fast filter for n > 12 and the exact definition otherwise.
pub fn enumerate_exceptions(pair: &SequencePair, n_lo: u64, n_hi: u64) -> Vec<u64> {
    assert!(2 <= n_lo && n_lo <= n_hi);
    let mut out = Vec::new();
    for n in n_lo..=n_hi {
        let exceptional = if n > 12 {
            match stewart_screen(pair, n) {
                ScreenVerdict::CertifiedPrimitive => false,
                ScreenVerdict::Candidate => !has_primitive_divisor(pair, n),
            }
        } else {
            !has_primitive_divisor(pair, n)
        };
        if exceptional {
            out.push(n);
        }
    }
    out
}

/// All valid pairs for a given q, in increasing p order.
pub fn pairs_for_q(q: i64) -> Vec<SequencePair> {
    let mut out = Vec::new();
    for p in -2 * q + 1..2 * q {
        if let Ok(pair) = SequencePair::new(p, q) {
            out.push(pair);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(p: i64, q: i64) -> SequencePair {
        SequencePair::new(p, q).unwrap()
    }

    #[test]
    fn classification() {
        let a = pair(-3, 2);
        assert_eq!(a.kind, SequenceKind::Lucas); // L = 1 = 1^2
        assert_eq!(a.m, -7);
        let b = pair(1, 2);
        assert_eq!(b.kind, SequenceKind::Lehmer); // L = 5 not a square
        assert_eq!(SequencePair::new(0, 2), Err(PairError::RootOfUnity));
        assert_eq!(SequencePair::new(2, 2), Err(PairError::RootOfUnity));
        assert_eq!(SequencePair::new(-5, 2), Err(PairError::RealCase));
        assert_eq!(SequencePair::new(-4, 2), Err(PairError::ZeroParameter)); // p + 2q = 0
        assert_eq!(SequencePair::new(2, 4), Err(PairError::NotCoprime));
        assert_eq!(SequencePair::new(-4, 0), Err(PairError::ZeroParameter));
        assert_eq!(SequencePair::new(1, -2), Err(PairError::RealCase));
    }

    #[test]
    fn q1_has_no_valid_pairs() {
        assert!(pairs_for_q(1).is_empty());
    }

    #[test]
    fn known_prefix_for_minus3_2() {
        let p = pair(-3, 2);
        let expect: Vec<i64> = vec![0, 1, 1, -1, -3, -1, 5, 7, -3, -17, -11, 23, 45, -1];
        for (n, e) in expect.iter().enumerate() {
            assert_eq!(element(&p, n as u64).value, BigInt::from(*e), "u_{n}");
        }
    }

    #[test]
    fn early_elements_are_structural() {
        // u_2 = 1, u_3 = L - q, u_4 = p in the Lehmer normalization
        for q in 2..=8i64 {
            for pp in -2 * q + 1..2 * q {
                if let Ok(pr) = SequencePair::new(pp, q) {
                    let u = lehmer_prefix(&pr, 4);
                    assert_eq!(u[0], BigInt::zero());
                    assert_eq!(u[2], BigInt::one());
                    assert_eq!(u[3], BigInt::from(pr.l - pr.q));
                    assert_eq!(u[4], BigInt::from(pr.p));
                }
            }
        }
    }

    #[test]
    fn primitive_divisor_examples() {
        let p = pair(-3, 2);
        assert!(!has_primitive_divisor(&p, 13)); // u_13 = -1
        assert!(!has_primitive_divisor(&p, 12)); // u_12 = 45 = 3^2*5, 3|u_4, 5|u_6
                                                 // u_7 = 7 divides (alpha-beta)^2 = -7, so it is excluded by the
                                                 // definition: a classical n = 7 exceptional pair.
        assert!(!has_primitive_divisor(&p, 7));
        assert!(has_primitive_divisor(&p, 9)); // u_9 = -17, 17 is new
        assert!(has_primitive_divisor(&p, 10)); // u_10 = -11
    }

    #[test]
    fn screen_examples() {
        let p = pair(-3, 2);
        assert_eq!(stewart_screen(&p, 13), ScreenVerdict::Candidate);
        assert_eq!(stewart_screen(&p, 31), ScreenVerdict::CertifiedPrimitive);
    }

    #[test]
    fn exceptions_ranges() {
        let p = pair(-3, 2);
        assert_eq!(enumerate_exceptions(&p, 12, 13), vec![12, 13]);
        assert_eq!(enumerate_exceptions(&p, 2, 2), vec![2]); // u_2 = 1
        assert!(enumerate_exceptions(&p, 31, 60).is_empty());
    }

    #[test]
    fn divisibility_property() {
        // m | n  =>  u_m | u_n in each kind's own normalization
        for q in 2..=5i64 {
            for pr in pairs_for_q(q) {
                let u = lehmer_prefix(&pr, 60);
                for n in 2..=60u64 {
                    let un = kind_value(&pr, n, &u[n as usize]);
                    for m in 2..n {
                        if n % m == 0 {
                            let um = kind_value(&pr, m, &u[m as usize]);
                            if !um.is_zero() {
                                assert!(
                                    (&un % &um).is_zero(),
                                    "u_{m} does not divide u_{n} for ({}, {q})",
                                    pr.p
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn gcd_compatibility_property() {
        // |gcd(u_m, u_n)| = |u_gcd(m,n)|: the premise of the strip
        // algorithm. A counterexample must fail the build.
        for q in 2..=5i64 {
            for pr in pairs_for_q(q) {
                let u = lehmer_prefix(&pr, 40);
                for m in 1..=40u64 {
                    for n in 1..=40u64 {
                        let a = kind_value(&pr, m, &u[m as usize]).abs();
                        let b = kind_value(&pr, n, &u[n as usize]).abs();
                        let g = a.gcd(&b);
                        let d = arith::gcd(m, n);
                        let expect = kind_value(&pr, d, &u[d as usize]).abs();
                        assert_eq!(g, expect, "gcd law fails at ({}, {q}) m={m} n={n}", pr.p);
                    }
                }
            }
        }
    }

    #[test]
    fn screen_consistent_with_definition() {
        // whenever the definition says "no primitive divisor" and n > 12,
        // the screening inequality must indeed fail
        for q in 2..=8i64 {
            for pr in pairs_for_q(q) {
                for n in 13..=80u64 {
                    if !has_primitive_divisor(&pr, n) {
                        assert_eq!(
                            stewart_screen(&pr, n),
                            ScreenVerdict::Candidate,
                            "screen contradicts definition at ({}, {q}), n={n}",
                            pr.p
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn pairs_enumeration_matches_expected() {
        let q2: Vec<i64> = pairs_for_q(2).iter().map(|p| p.p).collect();
        assert_eq!(q2, vec![-3, -1, 1, 3]);
        let q3: Vec<i64> = pairs_for_q(3).iter().map(|p| p.p).collect();
        assert_eq!(q3, vec![-5, -4, -2, -1, 1, 2, 4, 5]);
    }
}
