//! Exact integer-polynomial algebra: cyclotomic polynomials, the minimal
//! polynomials of 2cos(2*pi/n), their homogeneous evaluations, the cofactor
//! polynomials h_m, and rigorous derivative bounds.
//!
//! Everything feeding the screening inequality is computed exactly over the
//! integers; ball arithmetic appears only in derivative enclosures and in
//! the sampling oracle for sup norms on the unit circle.

use crate::arith;
use crate::realcf::ball::{ComplexBall, RealBall};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use std::collections::HashMap;
use std::sync::{Arc, LazyLock, RwLock};

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum CycloError {
    #[error("g_n is defined only for n >= 3")]
    DegenerateIndex,
    #[error("h_m requires odd squarefree m")]
    NotOddSquarefree,
    #[error("k must satisfy 1 <= k < n/2 and gcd(k, n) = 1")]
    BadCosineIndex,
    #[error("inexact polynomial division")]
    InexactDivision,
}

/// Dense integer polynomial, coefficients lowest degree first, no trailing
/// zero coefficient unless the polynomial is zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerPolynomial {
    coeffs: Vec<BigInt>,
}

impl IntegerPolynomial {
    pub fn zero() -> Self {
        IntegerPolynomial { coeffs: vec![] }
    }

    pub fn one() -> Self {
        IntegerPolynomial {
            coeffs: vec![BigInt::from(1)],
        }
    }

    pub fn from_coeffs(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        IntegerPolynomial { coeffs }
    }

    /// x^n - 1
    pub fn xn_minus_1(n: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); n + 1];
        coeffs[0] = BigInt::from(-1);
        coeffs[n] = BigInt::from(1);
        IntegerPolynomial { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(|c| *c == BigInt::from(1))
    }

    pub fn is_palindromic(&self) -> bool {
        let n = self.coeffs.len();
        (0..n / 2).all(|i| self.coeffs[i] == self.coeffs[n - 1 - i])
    }

    pub fn scale_neg(&self) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![BigInt::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            out[i] += c;
        }
        Self::from_coeffs(out)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        Self::from_coeffs(out)
    }

    /// Multiply by (x^d - 1) in O(degree).
    fn mul_xn_minus_1(&self, d: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let n = self.coeffs.len();
        let mut out = vec![BigInt::zero(); n + d];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i + d] += c;
            out[i] -= c;
        }
        Self::from_coeffs(out)
    }

    /// Exact division by (x^d - 1) in O(degree).
    fn div_xn_minus_1(&self, d: usize) -> Result<Self, CycloError> {
        if self.is_zero() {
            return Ok(Self::zero());
        }
        if self.coeffs.len() <= d {
            return Err(CycloError::InexactDivision);
        }
        // p = q (x^d - 1)  =>  p_i = q_{i-d} - q_i  =>  q_i = q_{i-d} - p_i
        let qlen = self.coeffs.len() - d;
        let mut q = vec![BigInt::zero(); qlen];
        for i in 0..qlen {
            let prev = if i >= d {
                q[i - d].clone()
            } else {
                BigInt::zero()
            };
            q[i] = prev - &self.coeffs[i];
        }
        // verify the top d coefficients
        for i in qlen..self.coeffs.len() {
            let expect = if i >= d {
                q[i - d].clone()
            } else {
                BigInt::zero()
            };
            if expect != self.coeffs[i] {
                return Err(CycloError::InexactDivision);
            }
        }
        Ok(Self::from_coeffs(q))
    }

    /// Exact long division; errors if the remainder is nonzero or a leading
    /// coefficient fails to divide.
    pub fn exact_div(&self, divisor: &Self) -> Result<Self, CycloError> {
        if divisor.is_zero() {
            return Err(CycloError::InexactDivision);
        }
        if self.is_zero() {
            return Ok(Self::zero());
        }
        if self.coeffs.len() < divisor.coeffs.len() {
            return Err(CycloError::InexactDivision);
        }
        let mut rem = self.coeffs.clone();
        let dlead = divisor.coeffs.last().unwrap();
        let dn = divisor.coeffs.len();
        let qlen = rem.len() - dn + 1;
        let mut q = vec![BigInt::zero(); qlen];
        for i in (0..qlen).rev() {
            let lead = rem[i + dn - 1].clone();
            if lead.is_zero() {
                continue;
            }
            if (&lead % dlead) != BigInt::zero() {
                return Err(CycloError::InexactDivision);
            }
            let f = lead / dlead;
            for (j, dc) in divisor.coeffs.iter().enumerate() {
                let t = dc * &f;
                rem[i + j] -= t;
            }
            q[i] = f;
        }
        if rem.iter().any(|c| !c.is_zero()) {
            return Err(CycloError::InexactDivision);
        }
        Ok(Self::from_coeffs(q))
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        let out = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * BigInt::from(i))
            .collect();
        Self::from_coeffs(out)
    }

    /// Substitute x -> sign * x^t (sign = +-1), spreading coefficients.
    pub fn compose_signed_power(&self, sign: i32, t: usize) -> Self {
        assert!(t >= 1 && (sign == 1 || sign == -1));
        if self.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigInt::zero(); (self.coeffs.len() - 1) * t + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = sign == -1 && i % 2 == 1;
            out[i * t] = if neg { -c } else { c.clone() };
        }
        Self::from_coeffs(out)
    }

    pub fn eval_bigint(&self, x: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Homogeneous evaluation y^deg * f(x/y) as an exact integer.
    pub fn eval_homogeneous(&self, x: &BigInt, y: &BigInt) -> BigInt {
        if self.is_zero() {
            return BigInt::zero();
        }
        let d = self.degree();
        let mut acc = self.coeffs[d].clone();
        let mut ypow = BigInt::from(1);
        for i in (0..d).rev() {
            ypow *= y;
            acc = acc * x + &self.coeffs[i] * &ypow;
        }
        acc
    }

    /// Ball evaluation at a real point.
    pub fn eval_ball(&self, x: &RealBall, prec: u32) -> RealBall {
        let mut acc = RealBall::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x, prec).add(&RealBall::from_bigint(c), prec);
        }
        acc
    }

    /// Ball evaluation at a complex point.
    pub fn eval_complex(&self, z: &ComplexBall, prec: u32) -> ComplexBall {
        let mut acc = ComplexBall::from_real(RealBall::zero());
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(z, prec);
            acc.re = acc.re.add(&RealBall::from_bigint(c), prec);
        }
        acc
    }

    /// Sum of absolute coefficient values as f64 (for error budgets).
    fn coeff_abs_sum_f64(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|c| c.abs().to_f64().unwrap_or(f64::INFINITY))
            .sum()
    }
}

struct CacheEntry {
    phi: Arc<IntegerPolynomial>,
    g: Option<Arc<IntegerPolynomial>>,
    g_deriv: Option<Arc<IntegerPolynomial>>,
}

static POLY_CACHE: LazyLock<RwLock<HashMap<u64, Arc<CacheEntry>>>> =
    LazyLock::new(|| RwLock::new(HashMap::new()));

fn cache_entry(n: u64) -> Arc<CacheEntry> {
    if let Some(e) = POLY_CACHE.read().unwrap().get(&n) {
        return e.clone();
    }
    let phi = Arc::new(compute_cyclotomic(n));
    let (g, g_deriv) = if n >= 3 {
        let g = Arc::new(fold_to_g(&phi, n));
        let gd = Arc::new(g.derivative());
        (Some(g), Some(gd))
    } else {
        (None, None)
    };
    let entry = Arc::new(CacheEntry { phi, g, g_deriv });
    let mut w = POLY_CACHE.write().unwrap();
    let e = w.entry(n).or_insert(entry).clone();
    drop(w);
    e
}

/// Install externally supplied polynomials (e.g. from the on-disk cache).
/// The data is fully revalidated before insertion; corrupt input is
/// rejected so it can be recomputed later.
pub fn cache_install(
    n: u64,
    phi: IntegerPolynomial,
    g: Option<IntegerPolynomial>,
) -> Result<(), CycloError> {
    if phi.degree() as u64 != arith::phi(n) || !phi.is_monic() {
        return Err(CycloError::InexactDivision);
    }
    let (g_arc, gd_arc) = if n >= 3 {
        let g = g.ok_or(CycloError::DegenerateIndex)?;
        if g.degree() as u64 != arith::phi(n) / 2 || !g.is_monic() {
            return Err(CycloError::InexactDivision);
        }
        if unfold_g(&g) != phi {
            return Err(CycloError::InexactDivision);
        }
        let gd = g.derivative();
        (Some(Arc::new(g)), Some(Arc::new(gd)))
    } else {
        if phi != compute_cyclotomic(n) {
            return Err(CycloError::InexactDivision);
        }
        (None, None)
    };
    let entry = Arc::new(CacheEntry {
        phi: Arc::new(phi),
        g: g_arc,
        g_deriv: gd_arc,
    });
    POLY_CACHE.write().unwrap().entry(n).or_insert(entry);
    Ok(())
}

fn compute_cyclotomic(n: u64) -> IntegerPolynomial {
    assert!(n >= 1);
    if n == 1 {
        return IntegerPolynomial::from_coeffs(vec![BigInt::from(-1), BigInt::from(1)]);
    }
    // Phi_n = prod_{d | n} (x^d - 1)^{mu(n/d)}
    let f = arith::factor(n);
    let divisors = f.divisors();
    let mut acc = IntegerPolynomial::one();
    let mut denominators = Vec::new();
    for &d in &divisors {
        match arith::mobius(n / d) {
            1 => acc = acc.mul_xn_minus_1(d as usize),
            -1 => denominators.push(d as usize),
            _ => {}
        }
    }
    for d in denominators {
        acc = acc
            .div_xn_minus_1(d)
            .expect("cyclotomic divisor chain is exact");
    }
    debug_assert_eq!(acc.degree() as u64, f.phi());
    acc
}

/// Minimal polynomial of a primitive n-th root of unity, cached.
pub fn cyclotomic_poly(n: u64) -> Arc<IntegerPolynomial> {
    cache_entry(n).phi.clone()
}

/// Fold a palindromic even-degree polynomial into the basis y = x + 1/x
/// using V_0 = 2, V_1 = y, V_{i+1} = y V_i - V_{i-1}, the polynomials with
/// x^i + x^-i = V_i(x + 1/x).
fn fold_to_g(phi: &IntegerPolynomial, n: u64) -> IntegerPolynomial {
    assert!(n >= 3);
    let d = phi.degree();
    assert!(
        d.is_multiple_of(2) && phi.is_palindromic(),
        "Phi_n must be palindromic for n >= 3"
    );
    let s = d / 2;
    let c = phi.coeffs();
    // g(y) = sum_{i=1..s} c_{s+i} V_i(y) + c_s
    let mut g = vec![BigInt::zero(); s + 1];
    g[0] = c[s].clone();
    let mut v_prev: Vec<BigInt> = vec![BigInt::from(2)]; // V_0
    let mut v_cur: Vec<BigInt> = vec![BigInt::zero(), BigInt::from(1)]; // V_1
    for i in 1..=s {
        for (j, vc) in v_cur.iter().enumerate() {
            if !vc.is_zero() {
                g[j] += vc * &c[s + i];
            }
        }
        if i < s {
            let mut next = vec![BigInt::zero(); v_cur.len() + 1];
            for (j, vc) in v_cur.iter().enumerate() {
                next[j + 1] = vc.clone();
            }
            for (j, vp) in v_prev.iter().enumerate() {
                next[j] -= vp;
            }
            v_prev = std::mem::take(&mut v_cur);
            v_cur = next;
        }
    }
    let g = IntegerPolynomial::from_coeffs(g);
    debug_assert!(g.is_monic() && g.degree() == s);
    g
}

/// Expand x^s * g(x + 1/x) back to a polynomial in x (the fold inverse).
pub fn unfold_g(g: &IntegerPolynomial) -> IntegerPolynomial {
    let s = g.degree();
    let x2p1 =
        IntegerPolynomial::from_coeffs(vec![BigInt::from(1), BigInt::zero(), BigInt::from(1)]);
    let mut pow = IntegerPolynomial::one();
    let mut acc = IntegerPolynomial::zero();
    for k in 0..=s {
        let b = g.coeff(k);
        if !b.is_zero() {
            // b * x^{s-k} * (x^2+1)^k
            let mut term = vec![BigInt::zero(); s - k];
            term.extend(pow.coeffs().iter().map(|c| c * &b));
            acc = acc.add(&IntegerPolynomial::from_coeffs(term));
        }
        if k < s {
            pow = pow.mul(&x2p1);
        }
    }
    acc
}

/// Minimal polynomial of 2 cos(2 pi / n), monic of degree phi(n)/2.
pub fn g_poly(n: u64) -> Result<Arc<IntegerPolynomial>, CycloError> {
    if n < 3 {
        return Err(CycloError::DegenerateIndex);
    }
    Ok(cache_entry(n).g.clone().expect("populated for n >= 3"))
}

/// Derivative of g_n, cached alongside it.
pub fn g_deriv_poly(n: u64) -> Result<Arc<IntegerPolynomial>, CycloError> {
    if n < 3 {
        return Err(CycloError::DegenerateIndex);
    }
    Ok(cache_entry(n)
        .g_deriv
        .clone()
        .expect("populated for n >= 3"))
}

/// Exact integer G_n(p, q) = q^(phi(n)/2) g_n(p/q).
pub fn g_eval_homogeneous(n: u64, p: i64, q: i64) -> Result<BigInt, CycloError> {
    let g = g_poly(n)?;
    Ok(g.eval_homogeneous(&BigInt::from(p), &BigInt::from(q)))
}

/// Exact homogeneous cyclotomic value b^phi(n) Phi_n(a/b).
pub fn cyclotomic_eval_homogeneous(n: u64, a: &BigInt, b: &BigInt) -> BigInt {
    cyclotomic_poly(n).eval_homogeneous(a, b)
}

/// h_m = (x^m - 1) / Phi_m for odd squarefree m.
pub fn h_poly(m: u64) -> Result<IntegerPolynomial, CycloError> {
    let f = arith::factor(m);
    if m.is_multiple_of(2) || !f.is_squarefree() {
        return Err(CycloError::NotOddSquarefree);
    }
    if m == 1 {
        return Ok(IntegerPolynomial::one());
    }
    let num = IntegerPolynomial::xn_minus_1(m as usize);
    num.exact_div(&cyclotomic_poly(m))
}

/// Sup-norm bound for h_m on the unit circle: with m = p_1 ... p_k in
/// increasing order, 2 * prod_{i<k} p_i^(2^(k-i-1)) for k <= 2 and the
/// bare product for k >= 3; m = 1 gives 1.
pub fn h_supnorm_bound(m: u64) -> Result<BigInt, CycloError> {
    let f = arith::factor(m);
    if m.is_multiple_of(2) || !f.is_squarefree() {
        return Err(CycloError::NotOddSquarefree);
    }
    let k = f.factors.len();
    if k == 0 {
        return Ok(BigInt::from(1));
    }
    let mut prod = BigInt::from(1);
    for (i, &(p, _)) in f.factors.iter().enumerate().take(k - 1) {
        let e = 1u32 << (k - i - 2);
        prod *= BigInt::from(p).pow(e);
    }
    if k <= 2 {
        prod *= 2;
    }
    Ok(prod)
}

/// Lower estimate of max |f| on the unit circle by sampling equispaced
/// points. Precisions up to 64 bits use f64 Horner with a conservative
/// rounding-error radius; higher precisions evaluate in complex balls.
pub fn supnorm_sample(f: &IntegerPolynomial, samples: u32, prec: u32) -> RealBall {
    assert!(samples >= 8);
    if f.is_zero() {
        return RealBall::zero();
    }
    if prec <= 64 {
        let s = f.coeff_abs_sum_f64();
        let d = f.degree() as f64;
        // Horner in f64: rounding error below ~2(d+1) eps sum|c| on the
        // circle, plus the sample-point error from f64 cos/sin; padded.
        let err = (4.0 * (d + 2.0) * f64::EPSILON) * s + 1e-13 * s;
        let mut best = 0.0f64;
        for j in 0..samples {
            let t = 2.0 * std::f64::consts::PI * j as f64 / samples as f64;
            let (zre, zim) = (t.cos(), t.sin());
            let (mut re, mut im) = (0.0f64, 0.0f64);
            for c in f.coeffs().iter().rev() {
                let nre = re * zre - im * zim + c.to_f64().unwrap_or(f64::NAN);
                im = re * zim + im * zre;
                re = nre;
            }
            best = best.max((re * re + im * im).sqrt());
        }
        let scale = BigInt::from(1u64 << 40);
        let mid = RealBall::from_ratio(
            BigInt::from((best * (1u64 << 40) as f64) as i128),
            scale.clone(),
            64,
        );
        let r = RealBall::from_ratio(
            BigInt::from((err * (1u64 << 40) as f64) as i128 + 2),
            scale,
            64,
        );
        // mid +- r as a single ball
        let lo = mid.sub(&r, 64);
        let hi = mid.add(&r, 64);
        return RealBall::from_endpoints(&lo.lower(), &hi.upper(), 64);
    }
    let mut best = RealBall::zero();
    for j in 0..samples {
        let z = ComplexBall::root_of_unity(j as i64, samples as i64, prec);
        let v = f.eval_complex(&z, prec).abs(prec);
        if v.gt(&best) == Some(true) {
            best = v;
        }
    }
    best
}

/// Rigorous enclosure of |g_n'(2 cos(2 pi k / n))|.
pub fn g_deriv_at(n: u64, k: u64, prec: u32) -> Result<RealBall, CycloError> {
    if n < 3 || k == 0 || 2 * k >= n || arith::gcd(k, n) != 1 {
        return Err(CycloError::BadCosineIndex);
    }
    let gd = g_deriv_poly(n)?;
    let wp = prec + 32;
    let angle = RealBall::pi(wp).shift_pow2(1).mul(
        &RealBall::from_ratio(BigInt::from(k), BigInt::from(n), wp),
        wp,
    );
    let y = angle.cos(wp).shift_pow2(1);
    Ok(gd.eval_ball(&y, prec).abs())
}

/// Factorization-only lower bound n' / (2 |h_m|_1-bound) for
/// |g_n'(2 cos(2 pi k/n))|, valid for every coprime k. Usable far beyond
/// polynomial range since it needs only the factorization of n.
pub fn g_deriv_lower_bound(n: u64, prec: u32) -> RealBall {
    assert!(n >= 3);
    let m = arith::kernel_m(n);
    let h = h_supnorm_bound(m).expect("kernel_m is odd squarefree");
    RealBall::from_ratio(BigInt::from(arith::n_prime(n)), h * 2, prec)
}

/// Check the Mobius product identity
/// Phi_n(a, b) = prod_{m | n} (a^m - b^m)^(mu(n/m)) exactly.
pub fn mobius_product_check(n: u64, a: &BigInt, b: &BigInt) -> bool {
    assert!(n >= 2 && a > b && b > &BigInt::zero());
    let lhs = cyclotomic_eval_homogeneous(n, a, b);
    let mut num = BigInt::from(1);
    let mut den = BigInt::from(1);
    for d in arith::factor(n).divisors() {
        let term = a.pow(d as u32) - b.pow(d as u32);
        match arith::mobius(n / d) {
            1 => num *= term,
            -1 => den *= term,
            _ => {}
        }
    }
    num == lhs * den
}
