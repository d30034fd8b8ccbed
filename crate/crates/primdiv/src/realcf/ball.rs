//! Arbitrary-precision real balls: a dyadic midpoint with a rigorous error
//! radius. Every operation rounds outward, so the returned ball always
//! contains the exact result. Comparisons refuse to answer when the balls
//! overlap instead of guessing.
//!
//! The elementary functions are implemented by argument reduction plus
//! truncated series whose remainders are bounded explicitly; accumulated
//! fixed-point truncation error is counted in ulps and absorbed into the
//! radius.

use num_bigint::{BigInt, Sign};
use num_traits::{Signed, ToPrimitive, Zero};
use std::collections::HashMap;
use std::sync::{LazyLock, Mutex};

/// Bits kept in radius mantissas; radii only ever need a coarse upper bound.
const RAD_PREC: u64 = 32;
/// Hard cap on alignment shifts; exceeding it means the computation left
/// the intended dynamic range.
const MAX_SHIFT: u64 = 1 << 27;

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum BallError {
    #[error("division by a ball containing zero")]
    DivisorContainsZero,
    #[error("domain violation: {0}")]
    Domain(&'static str),
}

/// man · 2^exp, no normalization requirement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dyadic {
    pub(crate) man: BigInt,
    pub(crate) exp: i64,
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic {
            man: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn from_bigint(v: BigInt) -> Self {
        Dyadic { man: v, exp: 0 }
    }

    pub fn is_zero(&self) -> bool {
        self.man.is_zero()
    }

    /// (numerator, positive power-of-two denominator)
    pub fn to_ratio(&self) -> (BigInt, BigInt) {
        if self.exp >= 0 {
            (&self.man << self.exp as usize, BigInt::from(1))
        } else {
            (self.man.clone(), BigInt::from(1) << (-self.exp) as usize)
        }
    }

    pub fn to_f64(&self) -> f64 {
        // Render via a clamped mantissa to avoid building huge floats.
        let nb = self.man.bits();
        if nb == 0 {
            return 0.0;
        }
        let (man, exp) = if nb > 64 {
            let s = nb - 64;
            (&self.man >> s as usize, self.exp + s as i64)
        } else {
            (self.man.clone(), self.exp)
        };
        let m = man.to_f64().unwrap_or(f64::NAN);
        m * exp2_f64(exp)
    }

    fn msb_pos(&self) -> i64 {
        // position of the most significant bit: value in [2^(p-1), 2^p)
        self.exp + self.man.bits() as i64
    }
}

fn exp2_f64(e: i64) -> f64 {
    if e > 2000 {
        f64::INFINITY
    } else if e < -2000 {
        0.0
    } else {
        (e as f64 * std::f64::consts::LN_2).exp()
    }
}

fn shift_checked(x: &BigInt, s: i64) -> BigInt {
    assert!(
        s >= 0 && (s as u64) < MAX_SHIFT,
        "alignment shift out of range: {s}"
    );
    x << s as usize
}

/// Compare a·2^ea with b·2^eb exactly.
pub(crate) fn dyadic_cmp(a: &Dyadic, b: &Dyadic) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    let (sa, sb) = (a.man.sign(), b.man.sign());
    if sa != sb {
        return sa.cmp(&sb);
    }
    if sa == Sign::NoSign {
        return Ordering::Equal;
    }
    // Same nonzero sign; compare magnitude bit positions first.
    let (pa, pb) = (a.msb_pos(), b.msb_pos());
    if pa != pb {
        let mag = pa.cmp(&pb);
        return if sa == Sign::Plus { mag } else { mag.reverse() };
    }
    if a.exp >= b.exp {
        shift_checked(&a.man, a.exp - b.exp).cmp(&b.man)
    } else {
        a.man.cmp(&shift_checked(&b.man, b.exp - a.exp))
    }
}

fn dyadic_add_exact(a: &Dyadic, b: &Dyadic) -> Dyadic {
    if a.is_zero() {
        return b.clone();
    }
    if b.is_zero() {
        return a.clone();
    }
    let e = a.exp.min(b.exp);
    let man = shift_checked(&a.man, a.exp - e) + shift_checked(&b.man, b.exp - e);
    Dyadic { man, exp: e }
}

fn dyadic_sub_exact(a: &Dyadic, b: &Dyadic) -> Dyadic {
    let nb = Dyadic {
        man: -b.man.clone(),
        exp: b.exp,
    };
    dyadic_add_exact(a, &nb)
}

/// Round a dyadic to `prec` mantissa bits toward -inf; the bool reports
/// whether bits were lost (caller adds one ulp of the result).
fn round_floor(d: &Dyadic, prec: u64) -> (Dyadic, bool) {
    let nb = d.man.bits();
    if nb <= prec {
        return (d.clone(), false);
    }
    let s = (nb - prec) as usize;
    let q = &d.man >> s;
    let lost = (&q << s) != d.man;
    (
        Dyadic {
            man: q,
            exp: d.exp + s as i64,
        },
        lost,
    )
}

// ---- radius helpers: nonnegative dyadics, all rounded up ----

fn rad_round_up(d: Dyadic) -> Dyadic {
    debug_assert!(!d.man.is_negative());
    let nb = d.man.bits();
    if nb <= RAD_PREC {
        return d;
    }
    let s = (nb - RAD_PREC) as usize;
    let q = &d.man >> s;
    let lost = (&q << s) != d.man;
    Dyadic {
        man: if lost { q + 1 } else { q },
        exp: d.exp + s as i64,
    }
}

fn rad_add(a: &Dyadic, b: &Dyadic) -> Dyadic {
    rad_round_up(dyadic_add_exact(a, b))
}

fn rad_mul(a: &Dyadic, b: &Dyadic) -> Dyadic {
    rad_round_up(Dyadic {
        man: &a.man * &b.man,
        exp: a.exp + b.exp,
    })
}

/// Upper bound of num/den for nonnegative num and strictly positive den.
fn rad_div_up(num: &Dyadic, den: &Dyadic) -> Dyadic {
    debug_assert!(den.man.is_positive());
    if num.is_zero() {
        return Dyadic::zero();
    }
    let t = (64 + den.man.bits()).saturating_sub(num.man.bits()) as i64 + 64;
    let q = shift_checked(&num.man, t) / &den.man + 1;
    rad_round_up(Dyadic {
        man: q,
        exp: num.exp - t - den.exp,
    })
}

fn ulp(exp: i64, count: u64) -> Dyadic {
    Dyadic {
        man: BigInt::from(count),
        exp,
    }
}

fn abs_dyadic(d: &Dyadic) -> Dyadic {
    Dyadic {
        man: d.man.abs(),
        exp: d.exp,
    }
}

/// Midpoint-radius real ball.
#[derive(Debug, Clone)]
pub struct RealBall {
    mid: Dyadic,
    rad: Dyadic,
}

impl RealBall {
    // ---- constructors ----

    pub fn zero() -> Self {
        RealBall {
            mid: Dyadic::zero(),
            rad: Dyadic::zero(),
        }
    }

    pub fn from_i64(v: i64) -> Self {
        RealBall {
            mid: Dyadic::from_bigint(BigInt::from(v)),
            rad: Dyadic::zero(),
        }
    }

    pub fn from_u64(v: u64) -> Self {
        RealBall {
            mid: Dyadic::from_bigint(BigInt::from(v)),
            rad: Dyadic::zero(),
        }
    }

    pub fn from_bigint(v: &BigInt) -> Self {
        RealBall {
            mid: Dyadic::from_bigint(v.clone()),
            rad: Dyadic::zero(),
        }
    }

    /// Exact dyadic value man·2^exp.
    pub fn from_dyadic(man: BigInt, exp: i64) -> Self {
        RealBall {
            mid: Dyadic { man, exp },
            rad: Dyadic::zero(),
        }
    }

    /// Enclosure of num/den at `prec` bits.
    pub fn from_ratio(num: BigInt, den: BigInt, prec: u32) -> Self {
        assert!(!den.is_zero(), "from_ratio: zero denominator");
        let (num, den) = if den.is_negative() {
            (-num, -den)
        } else {
            (num, den)
        };
        if num.is_zero() {
            return Self::zero();
        }
        // shift so the quotient carries at least prec + 2 significant bits
        let t = (prec as i64 + 2 + den.bits() as i64 - num.bits() as i64).max(1);
        let q = shift_checked(&num, t) / &den;
        let exact = &q * &den == shift_checked(&num, t);
        let mid = Dyadic { man: q, exp: -t };
        let rad = if exact { Dyadic::zero() } else { ulp(-t, 1) };
        RealBall { mid, rad }.round(prec)
    }

    /// Ball spanning [lo, hi].
    pub fn from_endpoints(lo: &Dyadic, hi: &Dyadic, prec: u32) -> Self {
        debug_assert!(dyadic_cmp(lo, hi) != std::cmp::Ordering::Greater);
        let two_mid = dyadic_add_exact(lo, hi);
        let two_rad = dyadic_sub_exact(hi, lo);
        let mid = Dyadic {
            man: two_mid.man,
            exp: two_mid.exp - 1,
        };
        let rad = Dyadic {
            man: two_rad.man,
            exp: two_rad.exp - 1,
        };
        RealBall {
            mid,
            rad: rad_round_up(rad),
        }
        .round(prec)
    }

    // ---- accessors ----

    pub fn lower(&self) -> Dyadic {
        dyadic_sub_exact(&self.mid, &self.rad)
    }

    pub fn upper(&self) -> Dyadic {
        dyadic_add_exact(&self.mid, &self.rad)
    }

    pub fn mid_f64(&self) -> f64 {
        self.mid.to_f64()
    }

    pub fn rad_f64(&self) -> f64 {
        self.rad.to_f64()
    }

    pub fn is_exact(&self) -> bool {
        self.rad.is_zero()
    }

    /// Width as a power-of-two estimate: position of the radius msb.
    pub fn rad_log2(&self) -> Option<i64> {
        if self.rad.is_zero() {
            None
        } else {
            Some(self.rad.msb_pos())
        }
    }

    fn round(self, prec: u32) -> Self {
        let (mid, lost) = round_floor(&self.mid, prec as u64);
        let rad = if lost {
            rad_add(&self.rad, &ulp(mid.exp, 1))
        } else {
            rad_round_up(self.rad)
        };
        RealBall { mid, rad }
    }

    // ---- field operations ----

    pub fn neg(&self) -> Self {
        RealBall {
            mid: Dyadic {
                man: -self.mid.man.clone(),
                exp: self.mid.exp,
            },
            rad: self.rad.clone(),
        }
    }

    pub fn abs(&self) -> Self {
        match self.sign_certain() {
            Some(s) if s < 0 => self.neg(),
            Some(_) => self.clone(),
            None => {
                // Straddles zero: |x| lies in [0, max(|lo|, |hi|)].
                let lo = abs_dyadic(&self.lower());
                let hi = abs_dyadic(&self.upper());
                let m = if dyadic_cmp(&lo, &hi) == std::cmp::Ordering::Greater {
                    lo
                } else {
                    hi
                };
                RealBall::from_endpoints(&Dyadic::zero(), &m, RAD_PREC as u32 * 4)
            }
        }
    }

    pub fn add(&self, other: &Self, prec: u32) -> Self {
        let mid = dyadic_add_exact(&self.mid, &other.mid);
        let rad = rad_add(&self.rad, &other.rad);
        RealBall { mid, rad }.round(prec)
    }

    pub fn sub(&self, other: &Self, prec: u32) -> Self {
        self.add(&other.neg(), prec)
    }

    pub fn mul(&self, other: &Self, prec: u32) -> Self {
        let mid = Dyadic {
            man: &self.mid.man * &other.mid.man,
            exp: self.mid.exp + other.mid.exp,
        };
        // |a|rb + |b|ra + ra rb
        let am = abs_dyadic(&self.mid);
        let bm = abs_dyadic(&other.mid);
        let mut rad = rad_mul(&am, &other.rad);
        rad = rad_add(&rad, &rad_mul(&bm, &self.rad));
        rad = rad_add(&rad, &rad_mul(&self.rad, &other.rad));
        RealBall { mid, rad }.round(prec)
    }

    pub fn mul_i64(&self, k: i64, prec: u32) -> Self {
        self.mul(&RealBall::from_i64(k), prec)
    }

    /// Exact scaling by 2^k.
    pub fn shift_pow2(&self, k: i64) -> Self {
        RealBall {
            mid: Dyadic {
                man: self.mid.man.clone(),
                exp: self.mid.exp + k,
            },
            rad: Dyadic {
                man: self.rad.man.clone(),
                exp: self.rad.exp + k,
            },
        }
    }

    pub fn div(&self, other: &Self, prec: u32) -> Result<Self, BallError> {
        let bm_abs = abs_dyadic(&other.mid);
        // require |bm| > rb so the divisor ball excludes zero
        if dyadic_cmp(&bm_abs, &other.rad) != std::cmp::Ordering::Greater {
            return Err(BallError::DivisorContainsZero);
        }
        let t = (prec as u64 + 2 + other.mid.man.bits()) as i64;
        let q = shift_checked(&self.mid.man, t) / &other.mid.man;
        let exact = &q * &other.mid.man == shift_checked(&self.mid.man, t);
        let mid = Dyadic {
            man: q,
            exp: self.mid.exp - t - other.mid.exp,
        };
        let mut rad = if exact {
            Dyadic::zero()
        } else {
            ulp(mid.exp, 1)
        };
        // |x/y - am/bm| <= (ra|bm| + |am|rb) / (|bm|(|bm| - rb))
        let num = rad_add(
            &rad_mul(&self.rad, &bm_abs),
            &rad_mul(&abs_dyadic(&self.mid), &other.rad),
        );
        if !num.is_zero() {
            let den = {
                let diff = dyadic_sub_exact(&bm_abs, &other.rad);
                Dyadic {
                    man: &bm_abs.man * &diff.man,
                    exp: bm_abs.exp + diff.exp,
                }
            };
            rad = rad_add(&rad, &rad_div_up(&num, &den));
        }
        Ok(RealBall { mid, rad }.round(prec))
    }

    /// Integer power by repeated squaring.
    pub fn pow_u64(&self, mut e: u64, prec: u32) -> Self {
        let mut base = self.clone();
        let mut acc = RealBall::from_i64(1);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base, prec);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base, prec);
            }
        }
        acc
    }

    // ---- comparisons ----

    /// Some(sign) when the ball certifies one; None when it straddles zero.
    pub fn sign_certain(&self) -> Option<i32> {
        let lo = self.lower();
        let hi = self.upper();
        if lo.man.is_positive() {
            Some(1)
        } else if hi.man.is_negative() {
            Some(-1)
        } else if lo.man.is_zero() && hi.man.is_zero() {
            Some(0)
        } else {
            None
        }
    }

    pub fn contains_zero(&self) -> bool {
        !self.lower().man.is_positive() && !self.upper().man.is_negative()
    }

    /// Certified strict less-than. None when undecidable at this radius.
    pub fn lt(&self, other: &Self) -> Option<bool> {
        use std::cmp::Ordering::*;
        if dyadic_cmp(&self.upper(), &other.lower()) == Less {
            return Some(true);
        }
        if dyadic_cmp(&self.lower(), &other.upper()) != Less {
            return Some(false);
        }
        None
    }

    pub fn gt(&self, other: &Self) -> Option<bool> {
        other.lt(self)
    }

    /// Does this ball contain the exact rational num/den?
    pub fn contains_ratio(&self, num: &BigInt, den: &BigInt) -> bool {
        let (num, den) = if den.is_negative() {
            (-num.clone(), -den.clone())
        } else {
            (num.clone(), den.clone())
        };
        let cmp_with = |d: &Dyadic| -> std::cmp::Ordering {
            // d.man*2^d.exp vs num/den  <=>  d.man*den*2^d.exp vs num
            let lhs = &d.man * &den;
            if d.exp >= 0 {
                shift_checked(&lhs, d.exp).cmp(&num)
            } else {
                lhs.cmp(&shift_checked(&num, -d.exp))
            }
        };
        cmp_with(&self.lower()) != std::cmp::Ordering::Greater
            && cmp_with(&self.upper()) != std::cmp::Ordering::Less
    }

    pub fn contains_i64(&self, v: i64) -> bool {
        self.contains_ratio(&BigInt::from(v), &BigInt::from(1))
    }

    /// Do the two balls intersect?
    pub fn overlaps(&self, other: &Self) -> bool {
        use std::cmp::Ordering::*;
        dyadic_cmp(&self.upper(), &other.lower()) != Less
            && dyadic_cmp(&other.upper(), &self.lower()) != Less
    }

    pub fn to_f64(&self) -> f64 {
        self.mid.to_f64()
    }

    /// Truncation toward zero to an integer, if certified unique.
    pub fn trunc_int_certain(&self) -> Option<BigInt> {
        let t = |d: &Dyadic| -> BigInt {
            if d.exp >= 0 {
                shift_checked(&d.man, d.exp)
            } else {
                // BigInt >> floors; adjust to truncate toward zero
                let s = (-d.exp) as usize;
                if s as u64 > MAX_SHIFT {
                    return BigInt::zero();
                }
                let q = &d.man >> s;
                if d.man.is_negative() && (&q << s) != d.man {
                    q + 1
                } else {
                    q
                }
            }
        };
        let a = t(&self.lower());
        let b = t(&self.upper());
        if a == b {
            Some(a)
        } else {
            None
        }
    }

    /// Truncation toward zero to one decimal place (returned in tenths),
    /// if certified unique.
    pub fn trunc_tenths_certain(&self, prec: u32) -> Option<BigInt> {
        self.mul_i64(10, prec).trunc_int_certain()
    }

    // ---- elementary functions ----

    pub fn sqrt(&self, prec: u32) -> Result<Self, BallError> {
        let hi = self.upper();
        if hi.man.is_negative() {
            return Err(BallError::Domain("sqrt of a negative ball"));
        }
        let lo = self.lower();
        let lo = if lo.man.is_negative() {
            Dyadic::zero()
        } else {
            lo
        };
        let s_lo = sqrt_down(&lo, prec as u64 + 4);
        let s_hi = sqrt_up(&hi, prec as u64 + 4);
        Ok(RealBall::from_endpoints(&s_lo, &s_hi, prec))
    }

    pub fn ln(&self, prec: u32) -> Self {
        self.try_ln(prec).expect("ln: ball not strictly positive")
    }

    pub fn try_ln(&self, prec: u32) -> Result<Self, BallError> {
        let lo = self.lower();
        if !lo.man.is_positive() {
            return Err(BallError::Domain("ln of a ball not strictly positive"));
        }
        let w = prec as u64 + 32;
        let base = ln_point(&self.mid, w);
        // |ln x - ln m| <= rad / lo
        let extra = rad_div_up(&self.rad, &lo);
        Ok(RealBall {
            mid: base.mid,
            rad: rad_add(&base.rad, &extra),
        }
        .round(prec))
    }

    pub fn exp(&self, prec: u32) -> Self {
        // monotone: evaluate on both endpoints
        let lo_ball = exp_point(&self.lower(), prec as u64 + 32);
        let hi_ball = exp_point(&self.upper(), prec as u64 + 32);
        RealBall::from_endpoints(&lo_ball.lower(), &hi_ball.upper(), prec)
    }

    pub fn cos(&self, prec: u32) -> Self {
        let c = cos_point(&self.mid, prec as u64 + 32);
        // Lipschitz constant 1
        RealBall {
            mid: c.mid,
            rad: rad_add(&c.rad, &self.rad),
        }
        .round(prec)
    }

    pub fn sin(&self, prec: u32) -> Self {
        let wp = prec + 32;
        let half_pi = RealBall::pi(wp).shift_pow2(-1);
        self.sub(&half_pi, wp).neg().cos(prec)
    }

    pub fn atan(&self, prec: u32) -> Self {
        let a = atan_point(&self.mid, prec as u64 + 32);
        RealBall {
            mid: a.mid,
            rad: rad_add(&a.rad, &self.rad),
        }
        .round(prec)
    }

    /// arccos on (-1, 1) via  pi/2 - atan(x / sqrt(1 - x^2)).
    pub fn arccos(&self, prec: u32) -> Result<Self, BallError> {
        let wp = prec + 64;
        let one = RealBall::from_i64(1);
        let one_minus = one.sub(&self.mul(self, wp), wp);
        if !one_minus.lower().man.is_positive() {
            return Err(BallError::Domain("arccos argument touches the endpoints"));
        }
        let t = self.div(&one_minus.sqrt(wp)?, wp)?;
        let half_pi = RealBall::pi(wp).shift_pow2(-1);
        Ok(half_pi.sub(&t.atan(wp), prec))
    }

    // ---- constants ----

    pub fn pi(prec: u32) -> Self {
        cached_const(&PI_CACHE, prec, pi_impl)
    }

    pub fn ln2(prec: u32) -> Self {
        cached_const(&LN2_CACHE, prec, ln2_impl)
    }

    /// Euler's constant gamma, from a 50-digit decimal enclosure. The
    /// radius never shrinks below 10^-49 regardless of precision.
    pub fn euler_gamma(prec: u32) -> Self {
        let digits: BigInt = "57721566490153286060651209008240243104215933593992"
            .parse()
            .unwrap();
        let den = BigInt::from(10u32).pow(50);
        let mut b = RealBall::from_ratio(digits, den, prec.max(192));
        let err = RealBall::from_ratio(BigInt::from(2), BigInt::from(10u32).pow(49), 64);
        b.rad = rad_add(&b.rad, &err.upper());
        b
    }
}

// ---- point-value series kernels (fixed point at scale 2^w) ----

/// floor sqrt lower bound of a nonnegative dyadic with ~prec result bits.
fn sqrt_down(d: &Dyadic, prec: u64) -> Dyadic {
    if d.is_zero() {
        return Dyadic::zero();
    }
    let mut man = d.man.clone();
    let mut exp = d.exp;
    let target = 2 * prec + 2;
    let nb = man.bits();
    let mut t = target.saturating_sub(nb) as i64;
    if (exp - t) % 2 != 0 {
        t += 1;
    }
    man = shift_checked(&man, t);
    exp -= t;
    let r = man.sqrt();
    Dyadic {
        man: r,
        exp: exp / 2,
    }
}

fn sqrt_up(d: &Dyadic, prec: u64) -> Dyadic {
    if d.is_zero() {
        return Dyadic::zero();
    }
    let mut man = d.man.clone();
    let mut exp = d.exp;
    let target = 2 * prec + 2;
    let nb = man.bits();
    let mut t = target.saturating_sub(nb) as i64;
    if (exp - t) % 2 != 0 {
        t += 1;
    }
    man = shift_checked(&man, t);
    exp -= t;
    let r = man.sqrt();
    let r = if &r * &r == man { r } else { r + 1 };
    Dyadic {
        man: r,
        exp: exp / 2,
    }
}

/// Rigorous enclosure of ln of an exact positive dyadic.
fn ln_point(x: &Dyadic, w: u64) -> RealBall {
    debug_assert!(x.man.is_positive());
    // x = m * 2^e with m in [3/4, 3/2)
    let nb = x.man.bits() as i64;
    let mut e = x.exp + nb; // x = frac * 2^e, frac in [1/2, 1)
                            // m = frac*2 in [1, 2) initially, i.e. mantissa with exponent nudged
    let mut m_exp = -nb + 1; // m = man * 2^(m_exp) in [1,2)
    e -= 1;
    // if m >= 3/2, halve m
    let three_halves = Dyadic {
        man: BigInt::from(3),
        exp: -1,
    };
    let m_dy = Dyadic {
        man: x.man.clone(),
        exp: m_exp,
    };
    let (m_dy, e) = if dyadic_cmp(&m_dy, &three_halves) != std::cmp::Ordering::Less {
        m_exp -= 1;
        (
            Dyadic {
                man: x.man.clone(),
                exp: m_exp,
            },
            e + 1,
        )
    } else {
        (m_dy, e)
    };
    // t = (m-1)/(m+1), |t| <= 1/5 ... 0.2
    let one = Dyadic {
        man: BigInt::from(1),
        exp: 0,
    };
    let num = dyadic_sub_exact(&m_dy, &one);
    let den = dyadic_add_exact(&m_dy, &one);
    // T = trunc(num/den * 2^w), error < 1 ulp
    let t_fp = fp_div(&num, &den, w);
    // atanh series: S = sum T^(2k+1)/(2k+1)
    let (s_fp, s_err) = atanh_series_fp(&t_fp, w);
    // ln m = 2 S; total fixed-point error: series err + input err:
    // d(atanh)/dt <= 1/(1-t^2) <= 1.05 at |t|<=0.2, input err < 1 ulp
    let err_ulps = 2 * (s_err + 2);
    let mut ball = RealBall {
        mid: Dyadic {
            man: s_fp << 1usize,
            exp: -(w as i64),
        },
        rad: ulp(-(w as i64), err_ulps),
    };
    if e != 0 {
        let ln2 = RealBall::ln2(w as u32);
        ball = ball.add(&ln2.mul_i64(e, w as u32), w as u32);
    }
    ball
}

/// S = sum_{k>=0} T^(2k+1)/(2k+1) in fixed point, |T/2^w| <= 0.34.
/// Returns (sum, error in ulps) with the series tail included.
fn atanh_series_fp(t: &BigInt, w: u64) -> (BigInt, u64) {
    let tsq = (t * t) >> w as usize; // |tsq| <= 0.116 * 2^w
    let mut p = t.clone();
    let mut acc = t.clone();
    let mut k = 1u64;
    let mut ops = 0u64;
    while !p.is_zero() {
        p = (&p * &tsq) >> w as usize;
        if p.is_zero() {
            break;
        }
        let term = &p / (2 * k + 1);
        acc += &term;
        k += 1;
        ops += 2;
        if k > 8 * w {
            break; // cannot happen with |t| bounded away from 1
        }
    }
    // Truncation errors: <= 1 ulp per multiply/divide, plus a tail bound.
    // When p underflows, remaining true tail <= (|t|^2/(1-|t|^2)) * (last
    // true term) <= a few ulps since the last true term is < ops ulps.
    (acc, ops + 8)
}

/// trunc(a/b * 2^w) for dyadics with b > 0; |error| < 1 ulp.
fn fp_div(a: &Dyadic, b: &Dyadic, w: u64) -> BigInt {
    debug_assert!(b.man.is_positive());
    // a.man*2^(a.exp) / (b.man*2^(b.exp)) * 2^w
    let shift = w as i64 + a.exp - b.exp;
    if shift >= 0 {
        shift_checked(&a.man, shift) / &b.man
    } else {
        &a.man / shift_checked(&b.man, -shift)
    }
}

/// Rigorous enclosure of exp of an exact dyadic, any magnitude up to 2^40.
fn exp_point(x: &Dyadic, w: u64) -> RealBall {
    if x.is_zero() {
        return RealBall::from_i64(1);
    }
    let mag = x.msb_pos(); // x in [2^(mag-1), 2^mag)
    assert!(mag <= 40, "exp argument out of the supported range");
    let j = (mag + 1).max(0) as u32; // |x/2^j| <= 1/2
    let r = Dyadic {
        man: x.man.clone(),
        exp: x.exp - j as i64,
    };
    let wj = w + 2 * j as u64 + 16;
    let (s_fp, err) = exp_series_fp(&r, wj);
    let mut ball = RealBall {
        mid: Dyadic {
            man: s_fp,
            exp: -(wj as i64),
        },
        rad: ulp(-(wj as i64), err),
    };
    for _ in 0..j {
        ball = ball.mul(&ball, wj as u32);
    }
    ball
}

/// exp series at |r| <= 1/2 in fixed point: returns (exp(r)*2^w approx, err ulps).
fn exp_series_fp(r: &Dyadic, w: u64) -> (BigInt, u64) {
    let rf = fp_of(r, w); // |error| < 1 ulp; d(exp)/dx <= 2 near |x|<=1/2
    let mut term = BigInt::from(1) << w as usize;
    let mut acc = term.clone();
    let mut k = 1u64;
    let mut ops = 2u64;
    loop {
        term = (&term * &rf) >> w as usize;
        term = &term / k;
        if term.is_zero() {
            break;
        }
        acc += &term;
        k += 1;
        ops += 2;
        if k > 4 * w {
            break;
        }
    }
    // input rounding contributes <= 2 ulps (derivative bound), tail a few.
    (acc, ops + 8)
}

fn fp_of(d: &Dyadic, w: u64) -> BigInt {
    let shift = w as i64 + d.exp;
    if shift >= 0 {
        shift_checked(&d.man, shift)
    } else {
        &d.man >> (-shift) as usize
    }
}

/// Rigorous enclosure of cos of an exact dyadic with |x| < 16.
fn cos_point(x: &Dyadic, w: u64) -> RealBall {
    if x.is_zero() {
        return RealBall::from_i64(1);
    }
    let mag = x.msb_pos();
    assert!(mag <= 4, "cos argument out of the supported range");
    // halve until |x/2^j| <= 1/4
    let j = (mag + 2).max(0) as u32;
    let r = Dyadic {
        man: x.man.clone(),
        exp: x.exp - j as i64,
    };
    let wj = w + 2 * j as u64 + 16;
    let (c_fp, err) = cos_series_fp(&r, wj);
    let mut ball = RealBall {
        mid: Dyadic {
            man: c_fp,
            exp: -(wj as i64),
        },
        rad: ulp(-(wj as i64), err),
    };
    let two = RealBall::from_i64(2);
    let one = RealBall::from_i64(1);
    for _ in 0..j {
        // cos(2t) = 2 cos^2 t - 1
        ball = two
            .mul(&ball.mul(&ball, wj as u32), wj as u32)
            .sub(&one, wj as u32);
    }
    ball
}

/// Alternating cos series at |r| <= 1/4: returns (cos(r)*2^w approx, err ulps).
fn cos_series_fp(r: &Dyadic, w: u64) -> (BigInt, u64) {
    let rf = fp_of(r, w);
    let rsq = (&rf * &rf) >> w as usize;
    let mut term = BigInt::from(1) << w as usize;
    let mut acc = term.clone();
    let mut k = 1u64;
    let mut ops = 2u64;
    loop {
        term = (&term * &rsq) >> w as usize;
        term = &term / ((2 * k - 1) * (2 * k));
        if term.is_zero() {
            break;
        }
        if k % 2 == 1 {
            acc -= &term;
        } else {
            acc += &term;
        }
        k += 1;
        ops += 2;
        if k > 4 * w {
            break;
        }
    }
    // |d cos/dx| <= 1 so the 1-ulp input rounding passes through; tail of
    // the alternating series is below the first omitted (underflowed) term.
    (acc, ops + 8)
}

/// Rigorous enclosure of atan of an exact dyadic, any magnitude.
fn atan_point(x: &Dyadic, w: u64) -> RealBall {
    if x.is_zero() {
        return RealBall::zero();
    }
    let wp = (w + 32) as u32;
    let xb = RealBall {
        mid: x.clone(),
        rad: Dyadic::zero(),
    };
    let one_dy = Dyadic {
        man: BigInt::from(1),
        exp: 0,
    };
    match dyadic_cmp(&abs_dyadic(x), &one_dy) {
        std::cmp::Ordering::Greater => {
            // |x| > 1: atan x = sign(x) * pi/2 - atan(1/x)
            let inv = RealBall::from_i64(1)
                .div(&xb, wp)
                .expect("nonzero: |x| > 1");
            let inner = inv.atan(wp);
            let half_pi = RealBall::pi(wp).shift_pow2(-1);
            let signed = if x.man.is_positive() {
                half_pi
            } else {
                half_pi.neg()
            };
            return signed.sub(&inner, wp);
        }
        std::cmp::Ordering::Equal => {
            let quarter_pi = RealBall::pi(wp).shift_pow2(-2);
            return if x.man.is_positive() {
                quarter_pi
            } else {
                quarter_pi.neg()
            };
        }
        std::cmp::Ordering::Less => {}
    }
    // |x| < 1: two halvings with t <- t / (1 + sqrt(1 + t^2))
    let one = RealBall::from_i64(1);
    let mut t = xb;
    for _ in 0..2 {
        let s = one.add(&t.mul(&t, wp), wp).sqrt(wp).expect("1 + t^2 > 0");
        t = t.div(&one.add(&s, wp), wp).expect("denominator >= 2");
    }
    // now |t| <= tan(pi/16) < 0.199
    let (a_fp, err) = atan_series_fp(&fp_of(&t.mid, w), w);
    let series = RealBall {
        mid: Dyadic {
            man: a_fp,
            exp: -(w as i64),
        },
        rad: rad_add(&ulp(-(w as i64), err + 2), &t.rad),
    };
    series.shift_pow2(2).round(wp)
}

/// Alternating atan series, |T/2^w| <= 0.2.
fn atan_series_fp(t: &BigInt, w: u64) -> (BigInt, u64) {
    let tsq = (t * t) >> w as usize;
    let mut p = t.clone();
    let mut acc = t.clone();
    let mut k = 1u64;
    let mut ops = 2u64;
    while !p.is_zero() {
        p = (&p * &tsq) >> w as usize;
        if p.is_zero() {
            break;
        }
        let term = &p / (2 * k + 1);
        if k % 2 == 1 {
            acc -= &term;
        } else {
            acc += &term;
        }
        k += 1;
        ops += 2;
        if k > 8 * w {
            break;
        }
    }
    (acc, ops + 8)
}

/// atan(1/c) * 2^w by the alternating series, for small integer c >= 2.
fn atan_inv_fp(c: u64, w: u64) -> (BigInt, u64) {
    let c2 = BigInt::from(c) * BigInt::from(c);
    let mut p = (BigInt::from(1) << w as usize) / c;
    let mut acc = p.clone();
    let mut k = 1u64;
    let mut ops = 2u64;
    while !p.is_zero() {
        p = &p / &c2;
        if p.is_zero() {
            break;
        }
        let term = &p / (2 * k + 1);
        if k % 2 == 1 {
            acc -= &term;
        } else {
            acc += &term;
        }
        k += 1;
        ops += 2;
    }
    (acc, ops + 8)
}

fn pi_impl(prec: u32) -> RealBall {
    // Machin: pi = 16 atan(1/5) - 4 atan(1/239)
    let w = prec as u64 + 32;
    let (a5, e5) = atan_inv_fp(5, w);
    let (a239, e239) = atan_inv_fp(239, w);
    let man = (a5 << 4usize) - (a239 << 2usize);
    let err = 16 * e5 + 4 * e239 + 4;
    RealBall {
        mid: Dyadic {
            man,
            exp: -(w as i64),
        },
        rad: ulp(-(w as i64), err),
    }
    .round(prec)
}

fn ln2_impl(prec: u32) -> RealBall {
    // ln 2 = 2 atanh(1/3)
    let w = prec as u64 + 32;
    let nine = BigInt::from(9);
    let mut p: BigInt = (BigInt::from(1) << w as usize) / 3;
    let mut acc = p.clone();
    let mut k = 1u64;
    let mut ops = 2u64;
    while !p.is_zero() {
        p = &p / &nine;
        if p.is_zero() {
            break;
        }
        acc += &p / (2 * k + 1);
        k += 1;
        ops += 2;
    }
    RealBall {
        mid: Dyadic {
            man: acc << 1usize,
            exp: -(w as i64),
        },
        rad: ulp(-(w as i64), 2 * ops + 8),
    }
    .round(prec)
}

static PI_CACHE: LazyLock<Mutex<HashMap<u32, RealBall>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));
static LN2_CACHE: LazyLock<Mutex<HashMap<u32, RealBall>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

fn cached_const(
    cache: &Mutex<HashMap<u32, RealBall>>,
    prec: u32,
    compute: fn(u32) -> RealBall,
) -> RealBall {
    // round the precision up to a 64-bit grain to improve reuse
    let grain = prec.div_ceil(64) * 64;
    let mut guard = cache.lock().unwrap();
    let v = guard.entry(grain).or_insert_with(|| compute(grain)).clone();
    drop(guard);
    v.round(prec)
}

/// Rectangular complex ball, just enough for polynomial evaluation on the
/// unit circle.
#[derive(Debug, Clone)]
pub struct ComplexBall {
    pub re: RealBall,
    pub im: RealBall,
}

impl ComplexBall {
    pub fn new(re: RealBall, im: RealBall) -> Self {
        ComplexBall { re, im }
    }

    pub fn from_real(re: RealBall) -> Self {
        ComplexBall {
            re,
            im: RealBall::zero(),
        }
    }

    /// e^(2 pi i t) for rational t = num/den.
    pub fn root_of_unity(num: i64, den: i64, prec: u32) -> Self {
        let wp = prec + 32;
        let angle = RealBall::pi(wp).shift_pow2(1).mul(
            &RealBall::from_ratio(BigInt::from(num), BigInt::from(den), wp),
            wp,
        );
        // reduce to [0, 2pi): num/den expected already in [0, 1)
        ComplexBall {
            re: angle.cos(prec),
            im: angle.sin(prec),
        }
    }

    pub fn add(&self, other: &Self, prec: u32) -> Self {
        ComplexBall {
            re: self.re.add(&other.re, prec),
            im: self.im.add(&other.im, prec),
        }
    }

    pub fn mul(&self, other: &Self, prec: u32) -> Self {
        let re = self
            .re
            .mul(&other.re, prec)
            .sub(&self.im.mul(&other.im, prec), prec);
        let im = self
            .re
            .mul(&other.im, prec)
            .add(&self.im.mul(&other.re, prec), prec);
        ComplexBall { re, im }
    }

    pub fn abs(&self, prec: u32) -> RealBall {
        self.re
            .mul(&self.re, prec)
            .add(&self.im.mul(&self.im, prec), prec)
            .sqrt(prec)
            .expect("|z|^2 >= 0")
    }
}
