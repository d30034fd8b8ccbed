//! Rigorous real computation for the convergent search: the target angle
//! theta = arccos(p/(2q)) / (2 pi), its continued-fraction convergents with
//! certified partial quotients, and the required/actual difference
//! logarithms compared by the verifier.

pub mod ball;

pub use ball::{BallError, ComplexBall, Dyadic, RealBall};

use crate::arith;
use crate::cyclotomic;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::Serialize;

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum RealcfError {
    #[error("precision exhausted at {max} bits: {context}")]
    PrecisionExhausted { max: u32, context: &'static str },
    #[error("argument outside the function domain: {0}")]
    Domain(&'static str),
    #[error(transparent)]
    Ball(#[from] BallError),
}

/// Working-precision policy: start small, double on any undecidable
/// comparison, stop at a hard cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PrecisionPolicy {
    pub start: u32,
    pub max: u32,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy {
            start: 128,
            max: 4096,
        }
    }
}

impl PrecisionPolicy {
    pub fn new(start: u32, max: u32) -> Self {
        assert!(16 <= start && start <= max);
        PrecisionPolicy { start, max }
    }

    /// Run `f` at doubling precisions until it returns Some.
    pub fn escalate<T>(
        &self,
        context: &'static str,
        mut f: impl FnMut(u32) -> Option<T>,
    ) -> Result<T, RealcfError> {
        let mut prec = self.start;
        loop {
            if let Some(v) = f(prec) {
                return Ok(v);
            }
            if prec >= self.max {
                return Err(RealcfError::PrecisionExhausted {
                    max: self.max,
                    context,
                });
            }
            prec = (prec * 2).min(self.max);
        }
    }
}

/// Enclosure of theta = arccos(p/(2q)) / (2 pi); lies in (0, 1/2) for
/// |p| < 2q with q >= 2.
pub fn theta(p: i64, q: i64, prec: u32) -> Result<RealBall, RealcfError> {
    if q < 2 || p.abs() >= 2 * q {
        return Err(RealcfError::Domain("theta requires |p| < 2q and q >= 2"));
    }
    let wp = prec + 32;
    let z = RealBall::from_ratio(BigInt::from(p), BigInt::from(2 * q), wp);
    let ac = z.arccos(wp)?;
    let two_pi = RealBall::pi(wp).shift_pow2(1);
    Ok(ac.div(&two_pi, prec)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConvergentVerdict {
    /// d_act > d_req certified: the no-primitive-divisor hypothesis fails.
    Refuted,
    /// d_act <= d_req certified: must be resolved by exact means.
    Violation,
    /// Not yet evaluated, or undecidable at the precision cap.
    Undecided,
}

/// One continued-fraction convergent k/n of theta with the gap data filled
/// in by the verifier.
#[derive(Debug, Clone)]
pub struct ConvergentRecord {
    pub k: u64,
    pub n: u64,
    pub partial_quotients_prefix: Vec<u64>,
    pub d_act_log: Option<RealBall>,
    pub d_req_log: Option<RealBall>,
    pub verdict: ConvergentVerdict,
}

/// Exact rational with BigInt parts, kept in lowest terms lazily.
#[derive(Clone, Debug)]
struct Rational {
    num: BigInt,
    den: BigInt, // > 0
}

impl Rational {
    fn from_dyadic(d: &Dyadic) -> Self {
        let (num, den) = d.to_ratio();
        Rational { num, den }
    }

    fn floor(&self) -> BigInt {
        self.num.div_floor(&self.den)
    }

    fn sub_int(&self, k: &BigInt) -> Rational {
        Rational {
            num: &self.num - k * &self.den,
            den: self.den.clone(),
        }
    }

    fn recip(&self) -> Option<Rational> {
        if self.num.is_zero() {
            return None;
        }
        if self.num.is_negative() {
            Some(Rational {
                num: -self.den.clone(),
                den: -self.num.clone(),
            })
        } else {
            Some(Rational {
                num: self.den.clone(),
                den: self.num.clone(),
            })
        }
    }

    /// |self - a/b| < bound? exact comparison
    fn abs_diff_lt(&self, a: &BigInt, b: &BigInt, bound: &Rational) -> bool {
        // |num/den - a/b| = |num b - a den| / (den b)
        let diff = (&self.num * b - a * &self.den).abs();
        let den = &self.den * b;
        // diff/den < bnum/bden  <=>  diff * bden < bnum * den
        &diff * &bound.den < &bound.num * den
    }
}

/// Result of expanding a certified interval into partial quotients.
struct CfPrefix {
    quotients: Vec<BigInt>,
    /// Lower bound on the next (unresolved) quotient, when available.
    next_quotient_at_least: Option<BigInt>,
}

/// Common continued-fraction prefix of every number in [lo, hi].
fn cf_interval_prefix(lo: &Rational, hi: &Rational, max_terms: usize) -> CfPrefix {
    let mut lo = lo.clone();
    let mut hi = hi.clone();
    let mut quotients = Vec::new();
    for _ in 0..max_terms {
        let a = lo.floor();
        let b = hi.floor();
        if a != b {
            return CfPrefix {
                quotients,
                next_quotient_at_least: Some(a.min(b)),
            };
        }
        let lo_frac = lo.sub_int(&a);
        let hi_frac = hi.sub_int(&a);
        quotients.push(a);
        // reciprocal reverses the interval; a zero endpoint means the
        // expansion cannot be certified further at this precision
        match (hi_frac.recip(), lo_frac.recip()) {
            (Some(new_lo), Some(new_hi)) => {
                lo = new_lo;
                hi = new_hi;
            }
            _ => {
                return CfPrefix {
                    quotients,
                    next_quotient_at_least: None,
                }
            }
        }
    }
    CfPrefix {
        quotients,
        next_quotient_at_least: None,
    }
}

fn convergents_from_quotients(
    prefix: &CfPrefix,
    n_max: u64,
    theta_lo: &Rational,
    theta_hi: &Rational,
) -> Option<Vec<ConvergentRecord>> {
    let n_max_big = BigInt::from(n_max);
    let mut records: Vec<ConvergentRecord> = Vec::new();
    // p_{-2} = 0, p_{-1} = 1; q_{-2} = 1, q_{-1} = 0
    let (mut h_prev, mut h_cur) = (BigInt::zero(), BigInt::from(1));
    let (mut k_prev, mut k_cur) = (BigInt::from(1), BigInt::zero());
    let mut qs: Vec<u64> = Vec::new();
    let mut complete = false;
    for a in &prefix.quotients {
        let h_next = a * &h_cur + &h_prev;
        let k_next = a * &k_cur + &k_prev;
        h_prev = std::mem::replace(&mut h_cur, h_next);
        k_prev = std::mem::replace(&mut k_cur, k_next);
        if k_cur > n_max_big {
            complete = true;
            break;
        }
        let a_u64 = u64::try_from(a).expect("quotient of an emitted convergent fits u64");
        qs.push(a_u64);
        let k_u64 = u64::try_from(&h_cur).expect("numerator fits u64 below n_max");
        let n_u64 = u64::try_from(&k_cur).expect("denominator fits u64 below n_max");
        // certified convergent law: |theta - k/n| < 1/n^2
        let bound = Rational {
            num: BigInt::from(1),
            den: &k_cur * &k_cur,
        };
        if !theta_lo.abs_diff_lt(&h_cur, &k_cur, &bound)
            || !theta_hi.abs_diff_lt(&h_cur, &k_cur, &bound)
        {
            return None;
        }
        debug_assert!(h_cur.gcd(&k_cur) == BigInt::from(1));
        // a repeated denominator (only 1/1 after 0/1, when a_1 = 1) is
        // superseded by the later convergent
        if records.last().map(|r| r.n) == Some(n_u64) {
            records.pop();
        }
        records.push(ConvergentRecord {
            k: k_u64,
            n: n_u64,
            partial_quotients_prefix: qs.clone(),
            d_act_log: None,
            d_req_log: None,
            verdict: ConvergentVerdict::Undecided,
        });
    }
    if !complete {
        // can we still certify that no further convergent fits below n_max?
        if let Some(a_min) = &prefix.next_quotient_at_least {
            let k_next_min = a_min.max(&BigInt::from(1)) * &k_cur + &k_prev;
            if k_next_min > n_max_big {
                complete = true;
            }
        }
    }
    if complete {
        Some(records)
    } else {
        None
    }
}

/// All continued-fraction convergents k/n of theta with n <= n_max.
///
/// The expansion is computed on a certified enclosure and repeated at
/// doubled precision until (a) the emitted partial-quotient prefixes of two
/// consecutive precisions agree and (b) every emitted convergent satisfies
/// the certified inequality |theta - k/n| < 1/n^2. The precision escalates
/// through `theta_source`.
pub fn convergents(
    theta_source: &dyn Fn(u32) -> Result<RealBall, RealcfError>,
    n_max: u64,
    policy: &PrecisionPolicy,
) -> Result<Vec<ConvergentRecord>, RealcfError> {
    assert!(n_max >= 2);
    let run = |prec: u32| -> Result<Option<Vec<ConvergentRecord>>, RealcfError> {
        let th = theta_source(prec)?;
        let lo = Rational::from_dyadic(&th.lower());
        let hi = Rational::from_dyadic(&th.upper());
        let prefix = cf_interval_prefix(&lo, &hi, 256);
        Ok(convergents_from_quotients(&prefix, n_max, &lo, &hi))
    };
    let mut prec = policy.start;
    let mut previous: Option<Vec<ConvergentRecord>> = None;
    loop {
        let attempt = run(prec)?;
        if let Some(cur) = attempt {
            if let Some(prev) = &previous {
                let same = prev.len() == cur.len()
                    && prev
                        .iter()
                        .zip(cur.iter())
                        .all(|(a, b)| a.k == b.k && a.n == b.n);
                if same {
                    return Ok(cur);
                }
            }
            previous = Some(cur);
        } else {
            previous = None;
        }
        if prec >= policy.max {
            return Err(RealcfError::PrecisionExhausted {
                max: policy.max,
                context: "continued-fraction expansion",
            });
        }
        prec = (prec * 2).min(policy.max);
    }
}

/// Enclosure of ln |p/q - 2 cos(2 pi k/n)| at a fixed precision; errors
/// with Domain when the difference ball straddles zero (caller escalates).
pub fn d_act_log(p: i64, q: i64, k: u64, n: u64, prec: u32) -> Result<RealBall, RealcfError> {
    assert!(
        k >= 1 && 2 * k < n && arith::gcd(k, n) == 1,
        "need gcd(k,n)=1, 1 <= k < n/2"
    );
    let wp = prec + 64;
    let x = RealBall::from_ratio(BigInt::from(p), BigInt::from(q), wp);
    let angle = RealBall::pi(wp).shift_pow2(1).mul(
        &RealBall::from_ratio(BigInt::from(k), BigInt::from(n), wp),
        wp,
    );
    let c2 = angle.cos(wp).shift_pow2(1);
    let diff = x.sub(&c2, wp).abs();
    if diff.contains_zero() {
        return Err(RealcfError::Domain("difference ball straddles zero"));
    }
    Ok(diff.try_ln(prec)?)
}

/// d_act with automatic precision escalation.
pub fn d_act_log_auto(
    p: i64,
    q: i64,
    k: u64,
    n: u64,
    policy: &PrecisionPolicy,
) -> Result<RealBall, RealcfError> {
    policy.escalate("d_act_log", |prec| d_act_log(p, q, k, n, prec).ok())
}

/// Upper bound for ln d_req:
/// (phi(n)/2) ln(5/(3q)) + ln P(n/(n,3)) - ln(gprime_lower).
/// With `gprime_lower` = the factorization-only derivative bound this is
/// valid for every coprime k.
pub fn d_req_log(q: i64, n: u64, gprime_lower: &RealBall, prec: u32) -> RealBall {
    assert!(q >= 2 && n > 30);
    let wp = prec + 32;
    let s = arith::phi(n) / 2;
    let ratio = RealBall::from_ratio(BigInt::from(5), BigInt::from(3 * q), wp).ln(wp);
    let cap = arith::stewart_prime_cap(n);
    let ln_p = RealBall::from_u64(cap).ln(wp);
    let ln_g = gprime_lower.ln(wp);
    ratio
        .mul(&RealBall::from_bigint(&BigInt::from(s)), wp)
        .add(&ln_p, wp)
        .sub(&ln_g, prec)
}

/// d_req with the built-in factorization-only derivative bound.
pub fn d_req_log_default(q: i64, n: u64, prec: u32) -> RealBall {
    let gl = cyclotomic::g_deriv_lower_bound(n, prec + 32);
    d_req_log(q, n, &gl, prec)
}

/// ln(4/n^4)
pub fn rhs_target_log(n: u64, prec: u32) -> RealBall {
    let wp = prec + 32;
    let ln_n = RealBall::from_u64(n).ln(wp);
    RealBall::from_i64(4).ln(wp).sub(&ln_n.mul_i64(4, wp), prec)
}

/// The right-hand inequality of the verification chain: is
/// d_req(q, n) < 4/n^4 with certified separation?
pub fn rhs_check(q: i64, n: u64, policy: &PrecisionPolicy) -> Result<bool, RealcfError> {
    assert!(q >= 2 && n > 30);
    policy.escalate("rhs_check", |prec| {
        let dreq = d_req_log_default(q, n, prec);
        let target = rhs_target_log(n, prec);
        dreq.lt(&target)
    })
}

/// The k in [1, n/2), coprime to n, minimizing |p/q - 2 cos(2 pi k/n)|.
///
/// Found as round(n theta) followed by an outward scan for coprimality in
/// both directions, with a ball-certified comparison of the two nearest
/// candidates. An undecidable tie escalates, then errors.
pub fn nearest_coprime_k(
    p: i64,
    q: i64,
    n: u64,
    policy: &PrecisionPolicy,
) -> Result<u64, RealcfError> {
    assert!(n > 2);
    policy.escalate("nearest_coprime_k", |prec| {
        let th = theta(p, q, prec).ok()?;
        let nt = th.mul(&RealBall::from_u64(n), prec);
        // certified rounding of n*theta
        let half = RealBall::from_ratio(BigInt::from(1), BigInt::from(2), 32);
        let r = nt.add(&half, prec).trunc_int_certain()?; // floor(nt + 1/2) for nt > 0
        let r = u64::try_from(&r).ok()?;
        let below = (1..=r.min(n / 2))
            .rev()
            .find(|&k| arith::gcd(k, n) == 1 && 2 * k < n);
        let above =
            (r.max(1)..n.div_ceil(2)).find(|&k| arith::gcd(k, n) == 1 && 2 * k < n && k >= r);
        match (below, above) {
            (Some(a), Some(b)) if a != b => {
                let da = d_act_log(p, q, a, n, prec).ok()?;
                let db = d_act_log(p, q, b, n, prec).ok()?;
                match da.lt(&db) {
                    Some(true) => Some(a),
                    Some(false) => Some(b),
                    None => None,
                }
            }
            (Some(a), _) => Some(a),
            (_, Some(b)) => Some(b),
            (None, None) => None,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_basics() {
        // p = 0 is excluded from pairs but fine for theta: arccos(0) = pi/2
        let t = theta(0, 2, 128).unwrap();
        assert!(t.contains_ratio(&BigInt::from(1), &BigInt::from(4)));
        // (-3, 2): theta = arccos(-3/4)/(2 pi) ~ 0.3849729..., between the
        // convergents 497/1291 and 1/2
        let t = theta(-3, 2, 160).unwrap();
        assert!((t.mid_f64() - (-0.75f64).acos() / (2.0 * std::f64::consts::PI)).abs() < 1e-12);
        assert!(t.rad_f64() < 1e-40);
        // stays strictly inside (0, 1/2)
        let close = theta(-2 * 5000 + 1, 5000, 160).unwrap();
        assert_eq!(
            close.lt(&RealBall::from_ratio(1.into(), 2.into(), 64)),
            Some(true)
        );
        assert_eq!(close.gt(&RealBall::zero()), Some(true));
    }

    #[test]
    fn golden_ratio_convergents_are_fibonacci() {
        // theta = (sqrt 5 - 1)/2: convergents are ratios of consecutive
        // Fibonacci numbers
        let policy = PrecisionPolicy::default();
        let src = |prec: u32| -> Result<RealBall, RealcfError> {
            let five = RealBall::from_i64(5);
            Ok(five
                .sqrt(prec)?
                .sub(&RealBall::from_i64(1), prec)
                .shift_pow2(-1))
        };
        let recs = convergents(&src, 1000, &policy).unwrap();
        let mut fibs = vec![1u64, 1];
        while *fibs.last().unwrap() <= 1000 {
            let l = fibs.len();
            fibs.push(fibs[l - 1] + fibs[l - 2]);
        }
        for (i, r) in recs.iter().enumerate() {
            assert_eq!(r.n, fibs[i + 1], "denominator at {i}");
            assert_eq!(r.k, fibs[i], "numerator at {i}");
        }
        assert!(recs.len() >= 14);
    }

    #[test]
    fn quarter_theta_is_rational_and_caps_out() {
        // theta(0, 2) = 1/4 exactly: the expansion cannot be certified past
        // the rational boundary, so the search must report exhaustion.
        let policy = PrecisionPolicy::new(64, 512);
        let src = |prec: u32| theta(0, 2, prec);
        let r = convergents(&src, 1_000_000, &policy);
        assert!(matches!(r, Err(RealcfError::PrecisionExhausted { .. })));
    }

    #[test]
    fn first_convergents_for_minus3_2() {
        let policy = PrecisionPolicy::default();
        let src = |prec: u32| theta(-3, 2, prec);
        let recs = convergents(&src, 2000, &policy).unwrap();
        // theta ~ 0.3849729...: 497/1291 is the first convergent with
        // n > 1260 and 579/1504 the next (and last below 2000)
        assert!(recs.iter().any(|r| r.k == 497 && r.n == 1291));
        let last = recs.last().unwrap();
        assert_eq!((last.k, last.n), (579, 1504));
        // denominators strictly increase
        for w in recs.windows(2) {
            assert!(w[0].n < w[1].n);
        }
    }

    #[test]
    fn d_act_examples() {
        // Table row 1: ln|p/q - 2cos(2 pi 497/1291)| truncates to -12.6
        let v = d_act_log_auto(-3, 2, 497, 1291, &PrecisionPolicy::default()).unwrap();
        let tenths = v.trunc_tenths_certain(128).unwrap();
        assert_eq!(tenths, BigInt::from(-126));
    }

    #[test]
    fn d_req_examples() {
        // q = 2, n = 1291: integer part -116
        let v = d_req_log_default(2, 1291, 128);
        assert_eq!(v.trunc_int_certain().unwrap(), BigInt::from(-116));
        // sign: ln(5/(3q)) < 0 for q >= 2
        for q in 2..20i64 {
            let r = RealBall::from_ratio(5.into(), (3 * q).into(), 96).ln(96);
            assert_eq!(r.lt(&RealBall::zero()), Some(true));
        }
    }

    #[test]
    fn rhs_check_examples() {
        let policy = PrecisionPolicy::default();
        // q = 2: false at 1260, true just above
        assert!(!rhs_check(2, 1260, &policy).unwrap());
        for n in 1261..=1300 {
            assert!(rhs_check(2, n, &policy).unwrap(), "rhs should hold at {n}");
        }
        // q = 3: true at 331, false at 330
        assert!(rhs_check(3, 331, &policy).unwrap());
        assert!(!rhs_check(3, 330, &policy).unwrap());
        // q >= 21: true already at 31..43
        for n in 31..=43 {
            assert!(rhs_check(21, n, &policy).unwrap(), "rhs(21, {n})");
        }
    }

    #[test]
    fn d_req_monotone_in_q() {
        let policy = 128;
        for n in [100u64, 500, 1999] {
            let mut prev = d_req_log_default(2, n, policy);
            for q in 3..=50i64 {
                let cur = d_req_log_default(q, n, policy);
                assert_eq!(
                    cur.lt(&prev),
                    Some(true),
                    "d_req not decreasing at q={q}, n={n}"
                );
                prev = cur;
            }
        }
    }

    #[test]
    fn nearest_k_examples() {
        let policy = PrecisionPolicy::default();
        assert_eq!(nearest_coprime_k(-3, 2, 1291, &policy).unwrap(), 497);
        assert_eq!(nearest_coprime_k(-3, 2, 10102, &policy).unwrap(), 3889);
        // theta(0,2) = 1/4, n = 7: round(7/4) = 2, gcd(2,7) = 1
        assert_eq!(nearest_coprime_k(0, 2, 7, &policy).unwrap(), 2);
        // brute-force cross-check on small n
        for n in [9u64, 11, 20, 33] {
            let k = nearest_coprime_k(-3, 2, n, &policy).unwrap();
            let mut best = (f64::INFINITY, 0u64);
            for cand in 1..n.div_ceil(2) {
                if 2 * cand < n && arith::gcd(cand, n) == 1 {
                    let d = (-1.5f64
                        - 2.0 * (2.0 * std::f64::consts::PI * cand as f64 / n as f64).cos())
                    .abs();
                    if d < best.0 {
                        best = (d, cand);
                    }
                }
            }
            assert_eq!(k, best.1, "minimizer mismatch at n={n}");
        }
    }
}
