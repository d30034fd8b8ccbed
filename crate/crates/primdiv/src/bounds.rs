//! Evaluators for the analytic machinery: heights, lower bounds for linear
//! forms in two logarithms, power-difference bounds, the arccos gap
//! inequality, and the explicit index thresholds.
//!
//! These are bound evaluators, not re-derivations: each computes a stated
//! closed form as an outward-rounded ball so the verifier can consume it.

use crate::arith;
use crate::realcf::ball::{dyadic_cmp, Dyadic, RealBall};
use crate::realcf::{PrecisionPolicy, RealcfError};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;

/// Minimal-polynomial data for a height computation: exact integer
/// coefficients, lowest degree first, positive leading coefficient.
/// Primitivity and irreducibility are the caller's contract.
#[derive(Debug, Clone)]
pub struct HeightQuery {
    pub coeffs: Vec<BigInt>,
}

/// Inputs of the linear-form lower bound: degree D >= 1, height h of gamma,
/// and B = max(|b1|, |b2|, 2). The optional |log gamma| feeds the a/H
/// assembly.
#[derive(Debug, Clone)]
pub struct LinearFormQuery {
    pub degree: u32,
    pub height: RealBall,
    pub b: RealBall,
    pub abs_log_gamma: Option<RealBall>,
}

fn ratio(num: i64, den: i64, prec: u32) -> RealBall {
    RealBall::from_ratio(BigInt::from(num), BigInt::from(den), prec)
}

fn ln_3d(d: u32, prec: u32) -> RealBall {
    RealBall::from_u64(3 * d as u64).ln(prec)
}

impl HeightQuery {
    /// Height when every conjugate root lies on the unit circle: only the
    /// leading coefficient contributes, h = ln(a_d) / d.
    pub fn height_with_unit_roots(&self, prec: u32) -> RealBall {
        let d = self.coeffs.len() - 1;
        let lead = self.coeffs.last().expect("nonempty coefficient list");
        RealBall::from_bigint(lead)
            .ln(prec)
            .div(&RealBall::from_u64(d as u64), prec)
            .expect("positive degree")
    }
}

/// Height of beta/alpha for a complex pair, from its minimal polynomial
/// (q/g) X^2 - (p/g) X + (q/g) with g = gcd(p, q); both conjugates lie on
/// the unit circle, so this is ln(q/g) / 2.
pub fn height_quadratic_pair(p: i64, q: i64, prec: u32) -> RealBall {
    assert!(q >= 1 && p.abs() < 2 * q);
    let g = arith::gcd(p.unsigned_abs(), q as u64) as i64;
    let query = HeightQuery {
        coeffs: vec![
            BigInt::from(q / g),
            BigInt::from(-p / g),
            BigInt::from(q / g),
        ],
    };
    query.height_with_unit_roots(prec)
}

/// 2 / (D (ln 3D)^3): height lower bound for a non-root-of-unity algebraic
/// number of degree D >= 2.
pub fn height_lower_bound(d: u32, prec: u32) -> RealBall {
    assert!(d >= 2, "the bound requires degree at least 2");
    let den = ln_3d(d, prec).pow_u64(3, prec).mul_i64(d as i64, prec);
    RealBall::from_i64(2)
        .div(&den, prec)
        .expect("denominator is positive")
}

/// exp(-81.9 (D ln 3D)^3 h (ln B)^2), a lower bound for |Lambda| when the
/// linear form does not vanish.
pub fn linear_form_lower_bound(query: &LinearFormQuery, prec: u32) -> RealBall {
    let wp = prec + 32;
    let d = query.degree;
    let d_ln = ln_3d(d, wp).mul_i64(d as i64, wp).pow_u64(3, wp);
    let ln_b = query.b.ln(wp);
    let exponent = ratio(-819, 10, wp)
        .mul(&d_ln, wp)
        .mul(&query.height, wp)
        .mul(&ln_b.mul(&ln_b, wp), wp);
    exponent.exp(prec)
}

/// a = max(20, 12.85 |log gamma| + D h / 2)
pub fn lmn_a(d: u32, height: &RealBall, abs_log_gamma: &RealBall, prec: u32) -> RealBall {
    let v = ratio(1285, 100, prec)
        .mul(abs_log_gamma, prec)
        .add(&height.mul_i64(d as i64, prec).shift_pow2(-1), prec);
    ball_max(&RealBall::from_i64(20), &v, prec)
}

/// H = max(17, D ln(b1/(2a) + b2/(25.7 pi)) / 2 + 2.3 D + 3.25)
pub fn lmn_h(d: u32, b1: u64, b2: u64, a: &RealBall, prec: u32) -> RealBall {
    let wp = prec + 32;
    let t1 = RealBall::from_u64(b1)
        .div(&a.shift_pow2(1), wp)
        .expect("a >= 20");
    let t2 = RealBall::from_u64(b2)
        .div(&ratio(257, 10, wp).mul(&RealBall::pi(wp), wp), wp)
        .expect("pi > 0");
    let v = t1
        .add(&t2, wp)
        .ln(wp)
        .mul_i64(d as i64, wp)
        .shift_pow2(-1)
        .add(&ratio(23, 10, wp).mul_i64(d as i64, wp), wp)
        .add(&ratio(13, 4, wp), wp);
    ball_max(&RealBall::from_i64(17), &v, prec)
}

/// exp(-9 a H^2) with the preconditions a >= 20, H >= 17.
pub fn lmn_bound(a: &RealBall, h: &RealBall, prec: u32) -> RealBall {
    assert_ne!(
        a.lt(&RealBall::from_i64(20)),
        Some(true),
        "a >= 20 required"
    );
    assert_ne!(
        h.lt(&RealBall::from_i64(17)),
        Some(true),
        "H >= 17 required"
    );
    let wp = prec + 32;
    a.mul(&h.mul(h, wp), wp).mul_i64(-9, wp).exp(prec)
}

/// Assemble a and H from a query carrying |log gamma| and return the
/// bound exp(-9 a H^2) for the form b1 log(-1) - b2 log gamma.
pub fn lmn_bound_from_query(
    query: &LinearFormQuery,
    b1: u64,
    b2: u64,
    prec: u32,
) -> Option<RealBall> {
    let alg = query.abs_log_gamma.as_ref()?;
    let a = lmn_a(query.degree, &query.height, alg, prec);
    let h = lmn_h(query.degree, b1, b2, &a, prec);
    Some(lmn_bound(&a, &h, prec))
}

fn ball_max(a: &RealBall, b: &RealBall, prec: u32) -> RealBall {
    match a.lt(b) {
        Some(true) => b.clone(),
        Some(false) => a.clone(),
        None => {
            let pick = |x: &Dyadic, y: &Dyadic| -> Dyadic {
                if dyadic_cmp(x, y) == std::cmp::Ordering::Greater {
                    x.clone()
                } else {
                    y.clone()
                }
            };
            let lo = pick(&a.lower(), &b.lower());
            let hi = pick(&a.upper(), &b.upper());
            RealBall::from_endpoints(&lo, &hi, prec)
        }
    }
}

/// The bracket for ln |alpha1^n - beta1^n| with d1 >= 2, n >= 2:
/// [n log|alpha1| - 81.97 (d1 ln 3d1)^3 h (ln n)^2,  ln 2 + n log|alpha1|].
pub fn power_diff_bounds(
    n: u64,
    d1: u32,
    height: &RealBall,
    log_abs_alpha1: &RealBall,
    prec: u32,
) -> (RealBall, RealBall) {
    assert!(d1 >= 2 && n >= 2);
    let wp = prec + 32;
    let main = log_abs_alpha1.mul(&RealBall::from_u64(n), wp);
    let ln_n = RealBall::from_u64(n).ln(wp);
    let penalty = ratio(8197, 100, wp)
        .mul(&ln_3d(d1, wp).mul_i64(d1 as i64, wp).pow_u64(3, wp), wp)
        .mul(height, wp)
        .mul(&ln_n.mul(&ln_n, wp), wp);
    let lower = main.sub(&penalty, prec);
    let upper = RealBall::ln2(wp).add(&main, prec);
    (lower, upper)
}

/// The n = 1 variant: [log|alpha1| - d1 (h + ln 2),  ln 2 + log|alpha1|].
pub fn power_diff_bounds_n1(
    d1: u32,
    height: &RealBall,
    log_abs_alpha1: &RealBall,
    prec: u32,
) -> (RealBall, RealBall) {
    let wp = prec + 32;
    let lower = log_abs_alpha1.sub(
        &height.add(&RealBall::ln2(wp), wp).mul_i64(d1 as i64, wp),
        prec,
    );
    let upper = RealBall::ln2(wp).add(log_abs_alpha1, prec);
    (lower, upper)
}

/// pi sqrt(a/2): if |x - y| <= a on [-1, 1] then |arccos x - arccos y| is
/// at most this.
pub fn arccos_diff_bound(a: &RealBall, prec: u32) -> Result<RealBall, RealcfError> {
    if a.lt(&RealBall::zero()) == Some(true) {
        return Err(RealcfError::Domain("arccos_diff_bound requires a >= 0"));
    }
    let wp = prec + 32;
    let root = a.shift_pow2(-1).sqrt(wp)?;
    Ok(RealBall::pi(wp).mul(&root, prec))
}

fn ceil_dyadic(d: &Dyadic) -> BigInt {
    let (num, den) = d.to_ratio();
    let q = num.div_floor(&den);
    if &q * &den == num {
        q
    } else {
        q + 1
    }
}

/// Certified integer ceiling of an escalating ball computation.
fn ceil_certain(
    policy: &PrecisionPolicy,
    context: &'static str,
    f: impl Fn(u32) -> RealBall,
) -> Result<BigInt, RealcfError> {
    policy.escalate(context, |prec| {
        let v = f(prec);
        let lo = ceil_dyadic(&v.lower());
        let hi = ceil_dyadic(&v.upper());
        if lo == hi {
            Some(lo)
        } else {
            None
        }
    })
}

/// ceil(max(2 (2^d1 - 1), 4000 (d1 ln 3d1)^12)): indices above this carry
/// the prime-ideal property of the general theorem.
pub fn thm2_threshold(d1: u32, policy: &PrecisionPolicy) -> Result<BigInt, RealcfError> {
    assert!(d1 >= 2);
    let simple: BigInt = (BigInt::from(1) << d1) * 2 - 2;
    let analytic = ceil_certain(policy, "thm2_threshold", |prec| {
        let wp = prec + 32;
        ln_3d(d1, wp)
            .mul_i64(d1 as i64, wp)
            .pow_u64(12, wp)
            .mul_i64(4000, prec)
    })?;
    Ok(simple.max(analytic))
}

/// ceil(41200 d1^11.45 (ln 3d1)^8.59), the refined variant.
pub fn thm2_refined_threshold(d1: u32, policy: &PrecisionPolicy) -> Result<BigInt, RealcfError> {
    assert!(d1 >= 2);
    ceil_certain(policy, "thm2_refined_threshold", |prec| {
        let wp = prec + 64;
        // x^y = exp(y ln x)
        let p1 = RealBall::from_u64(d1 as u64)
            .ln(wp)
            .mul(&ratio(1145, 100, wp), wp)
            .exp(wp);
        let p2 = ln_3d(d1, wp).ln(wp).mul(&ratio(859, 100, wp), wp).exp(wp);
        p1.mul(&p2, wp).mul_i64(41200, prec)
    })
}

/// The unconditional cap for Lucas/Lehmer sequences (d1 = 2): every index
/// above it has a primitive divisor.
pub const LUCAS_LEHMER_CAP: u64 = 20_000_000_000;

/// phi(n) / (2^omega(n) (ln n)^2) > 41 d1^4 (ln 3d1)^3, with exact
/// phi/omega and ball logs.
pub fn thirdineq_check(n: u64, d1: u32, policy: &PrecisionPolicy) -> Result<bool, RealcfError> {
    assert!(n >= 3 && d1 >= 2);
    let f = arith::factor(n);
    let (ph, om) = (f.phi(), f.omega());
    policy.escalate("thirdineq_check", |prec| {
        let wp = prec + 32;
        let ln_n = RealBall::from_u64(n).ln(wp);
        let denom = RealBall::from_bigint(&(BigInt::one() << om)).mul(&ln_n.mul(&ln_n, wp), wp);
        let lhs = RealBall::from_u64(ph).div(&denom, wp).ok()?;
        let rhs = ln_3d(d1, wp)
            .pow_u64(3, wp)
            .mul_i64(41, wp)
            .mul_i64((d1 as i64).pow(4), wp);
        lhs.gt(&rhs)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close_to(b: &RealBall, v: f64, tol: f64) -> bool {
        (b.mid_f64() - v).abs() <= tol + b.rad_f64()
    }

    #[test]
    fn height_examples() {
        // (-3, 2): ln(2)/2 ~ 0.34657
        let h = height_quadratic_pair(-3, 2, 128);
        assert!(close_to(&h, 0.5 * std::f64::consts::LN_2, 1e-12));
        // the height-4 frontier sits at q = 2980 (e^8 ~ 2980.96)
        assert_eq!(
            height_quadratic_pair(-3, 2980, 128).lt(&RealBall::from_i64(4)),
            Some(true)
        );
        assert_eq!(
            height_quadratic_pair(-3, 2981, 128).gt(&RealBall::from_i64(4)),
            Some(true)
        );
    }

    #[test]
    fn height_lower_bound_examples() {
        let b = height_lower_bound(2, 128);
        assert!(close_to(&b, 2.0 / (2.0 * 6.0f64.ln().powi(3)), 1e-12)); // ~0.1739
        let mut prev = b;
        for d in 3..=100 {
            let cur = height_lower_bound(d, 128);
            assert_eq!(cur.lt(&prev), Some(true), "not decreasing at {d}");
            prev = cur;
        }
        // honored by every valid pair at degree 2
        for q in 2..=40i64 {
            for pr in crate::sequences::pairs_for_q(q) {
                let h = height_quadratic_pair(pr.p, pr.q, 128);
                assert_eq!(
                    h.gt(&height_lower_bound(2, 128)),
                    Some(true),
                    "height bound violated at ({}, {q})",
                    pr.p
                );
            }
        }
    }

    #[test]
    fn linear_form_example() {
        // D=2, h=ln2/2, B=2: exponent -81.9 (2 ln 6)^3 (ln2/2) (ln2)^2,
        // which evaluates near -627.57
        let q = LinearFormQuery {
            degree: 2,
            height: RealBall::ln2(160).shift_pow2(-1),
            b: RealBall::from_i64(2),
            abs_log_gamma: None,
        };
        let v = linear_form_lower_bound(&q, 160);
        let expect = -81.9
            * (2.0 * 6.0f64.ln()).powi(3)
            * (0.5 * std::f64::consts::LN_2)
            * std::f64::consts::LN_2.powi(2);
        let lv = v.ln(160);
        assert!(close_to(&lv, expect, 1e-9), "got {}", lv.mid_f64());
        assert!((expect + 627.57).abs() < 0.01);
    }

    #[test]
    fn lmn_plugin_value() {
        // exp(-9 * 20 * 17^2) = exp(-52020)
        let v = lmn_bound(&RealBall::from_i64(20), &RealBall::from_i64(17), 128);
        let l = v.ln(128);
        assert!(l.contains_i64(-52020));
    }

    #[test]
    fn lmn_assembly() {
        let h = RealBall::ln2(128).shift_pow2(-1);
        let a = lmn_a(2, &h, &RealBall::pi(128), 128);
        // 12.85 pi + ln 2 / 2 ~ 40.72 > 20
        assert!(close_to(&a, 12.85 * std::f64::consts::PI + 0.34657, 1e-5));
        // small b1, b2 clamp H at 17
        let hh = lmn_h(2, 5, 7, &a, 128);
        assert!(hh.contains_i64(17));
        // large b1, b2 exceed the clamp
        let hh = lmn_h(2, 1_000_000_000, 2_000_000_000, &a, 128);
        assert_eq!(hh.gt(&RealBall::from_i64(17)), Some(true));
        let _ = lmn_bound(&a, &hh, 128);
        // the assembled bound from a query
        let q = LinearFormQuery {
            degree: 2,
            height: h,
            b: RealBall::from_i64(2_000_000_000),
            abs_log_gamma: Some(RealBall::pi(128)),
        };
        let v = lmn_bound_from_query(&q, 1_000_000_000, 2_000_000_000, 128).unwrap();
        assert_eq!(v.sign_certain(), Some(1));
        assert_eq!(v.lt(&RealBall::from_i64(1)), Some(true));
    }

    #[test]
    fn b_large_consistency_inequality() {
        // For B > 679000: 0.66994 D ln B > (D/2) ln B + 0.657 D + 3.25
        for d in [2u32, 3, 5, 10] {
            for b in [679_001u64, 1_000_000, 50_000_000] {
                let wp = 128;
                let ln_b = RealBall::from_u64(b).ln(wp);
                let lhs = ratio(66994, 100000, wp)
                    .mul(&ln_b, wp)
                    .mul_i64(d as i64, wp);
                let rhs = ln_b
                    .mul_i64(d as i64, wp)
                    .shift_pow2(-1)
                    .add(&ratio(657, 1000, wp).mul_i64(d as i64, wp), wp)
                    .add(&ratio(13, 4, wp), wp);
                assert_eq!(lhs.gt(&rhs), Some(true), "failed at D={d}, B={b}");
            }
        }
    }

    #[test]
    fn power_diff_brackets_exact_value() {
        // (-3, 2): |alpha|^2 = q = 2, so log|alpha| = ln2/2. For n = 10:
        // |alpha^10 - beta^10| = |u_10| sqrt(L) sqrt(|M|) with the Lehmer
        // value u_10 = -11, L = 1, M = -7: the exact value is 11 sqrt(7).
        let prec = 160;
        let h = height_quadratic_pair(-3, 2, prec);
        let la = RealBall::ln2(prec).shift_pow2(-1);
        let (lo, hi) = power_diff_bounds(10, 2, &h, &la, prec);
        let exact = RealBall::from_i64(7)
            .sqrt(prec)
            .unwrap()
            .mul_i64(11, prec)
            .ln(prec);
        assert_eq!(exact.gt(&lo), Some(true));
        assert_eq!(exact.lt(&hi), Some(true));
        // n = 1: ln 2 + log|alpha| >= ln|alpha - beta| = (ln 7)/2
        let (_, hi1) = power_diff_bounds_n1(2, &h, &la, prec);
        let exact1 = RealBall::from_i64(7).ln(prec).shift_pow2(-1);
        assert_eq!(exact1.lt(&hi1), Some(true));
    }

    #[test]
    fn arccos_gap_bound() {
        let z = arccos_diff_bound(&RealBall::zero(), 128).unwrap();
        assert!(z.contains_zero());
        // a = 2 gives exactly pi (the x = 1, y = -1 extreme)
        let p = arccos_diff_bound(&RealBall::from_i64(2), 128).unwrap();
        assert!(p.overlaps(&RealBall::pi(128)));
        assert!(arccos_diff_bound(&RealBall::from_i64(-1), 128).is_err());
        // sampled property: |arccos x - arccos y| <= pi sqrt(|x-y|/2)
        let mut state = 99u64;
        let mut next = || {
            state = state.wrapping_add(0x9E3779B97F4A7C15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
            (z ^ (z >> 31)) as f64 / u64::MAX as f64
        };
        for _ in 0..10_000 {
            let x = 2.0 * next() - 1.0;
            let y = 2.0 * next() - 1.0;
            let gap = (x.acos() - y.acos()).abs();
            let bound = std::f64::consts::PI * ((x - y).abs() / 2.0).sqrt();
            assert!(gap <= bound + 1e-9, "failed at x={x} y={y}");
        }
    }

    #[test]
    fn thm2_thresholds() {
        let policy = PrecisionPolicy::default();
        let t = thm2_threshold(2, &policy).unwrap();
        // 4000 (2 ln 6)^12 ~ 1.794e10: above the 1.74e10 working bound,
        // below the 2e10 cap
        assert!(t > BigInt::from(17_400_000_000u64));
        assert!(t < BigInt::from(LUCAS_LEHMER_CAP));
        let r = thm2_refined_threshold(2, &policy).unwrap();
        assert!(r > BigInt::from(1_000_000_000u64));
        // 2(2^d - 1) never dominates for d in [2, 20]
        for d in 2..=20u32 {
            let simple = (BigInt::from(1) << d) * 2 - 2;
            assert!(thm2_threshold(d, &policy).unwrap() > simple);
        }
    }

    #[test]
    fn thirdineq_examples() {
        let policy = PrecisionPolicy::default();
        assert!(!thirdineq_check(100, 2, &policy).unwrap());
        for n in [20_000_000_001u64, 20_000_000_011, 17_400_000_007] {
            assert!(thirdineq_check(n, 2, &policy).unwrap(), "failed at {n}");
        }
        // the lhs also exceeds n^0.3495 at sampled large n
        for n in [17_400_000_007u64, 19_999_999_999] {
            let f = arith::factor(n);
            let wp = 160;
            let ln_n = RealBall::from_u64(n).ln(wp);
            let lhs = RealBall::from_u64(f.phi())
                .div(
                    &RealBall::from_bigint(&(BigInt::one() << f.omega()))
                        .mul(&ln_n.mul(&ln_n, wp), wp),
                    wp,
                )
                .unwrap();
            let rhs = ln_n.mul(&ratio(3495, 10000, wp), wp).exp(wp);
            assert_eq!(lhs.gt(&rhs), Some(true), "n^0.3495 comparison at {n}");
        }
    }
}
