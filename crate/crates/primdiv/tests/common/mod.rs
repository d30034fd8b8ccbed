//! Test-only helpers: a complete integer factorization routine for values
//! up to ~2^110 (trial division, Miller-Rabin, Brent's variant of Pollard
//! rho over Montgomery arithmetic) and the verbatim primitive-divisor
//! oracle built on it. Nothing here shares code with the gcd-strip
//! decision procedure it cross-checks.

// each integration-test target uses its own subset of these helpers
#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use primdiv::sequences::{element, SequenceKind, SequencePair};

pub fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

const LOW: u128 = (1u128 << 64) - 1;

fn mul_wide(a: u128, b: u128) -> (u128, u128) {
    let (a_lo, a_hi) = (a & LOW, a >> 64);
    let (b_lo, b_hi) = (b & LOW, b >> 64);
    let ll = a_lo * b_lo;
    let lh = a_lo * b_hi;
    let hl = a_hi * b_lo;
    let hh = a_hi * b_hi;
    let mid = (ll >> 64) + (lh & LOW) + (hl & LOW);
    let lo = (ll & LOW) | (mid << 64);
    let hi = hh + (lh >> 64) + (hl >> 64) + (mid >> 64);
    (hi, lo)
}

/// Montgomery arithmetic modulo an odd m < 2^126.
struct Montgomery {
    m: u128,
    neg_inv: u128, // -m^{-1} mod 2^128
    r1: u128,      // R mod m
    r2: u128,      // R^2 mod m
}

impl Montgomery {
    fn new(m: u128) -> Self {
        assert!(m & 1 == 1 && m > 1 && m < (1u128 << 126));
        // Newton iteration for m^{-1} mod 2^128
        let mut inv: u128 = m;
        for _ in 0..7 {
            inv = inv.wrapping_mul(2u128.wrapping_sub(m.wrapping_mul(inv)));
        }
        debug_assert_eq!(m.wrapping_mul(inv), 1);
        let neg_inv = inv.wrapping_neg();
        let r1 = (u128::MAX % m + 1) % m;
        let mut r2 = r1;
        for _ in 0..128 {
            r2 += r2;
            if r2 >= m {
                r2 -= m;
            }
        }
        Montgomery { m, neg_inv, r1, r2 }
    }

    fn redc(&self, hi: u128, lo: u128) -> u128 {
        let u = lo.wrapping_mul(self.neg_inv);
        let (h, l) = mul_wide(u, self.m);
        let (_, carry) = lo.overflowing_add(l);
        let mut out = hi + h + carry as u128;
        if out >= self.m {
            out -= self.m;
        }
        out
    }

    fn mul(&self, a: u128, b: u128) -> u128 {
        let (hi, lo) = mul_wide(a, b);
        self.redc(hi, lo)
    }

    fn to_mont(&self, a: u128) -> u128 {
        self.mul(a % self.m, self.r2)
    }

    fn retire(&self, a: u128) -> u128 {
        self.redc(0, a)
    }

    fn pow(&self, base_mont: u128, mut e: u128) -> u128 {
        let mut acc = self.r1; // 1 in Montgomery form
        let mut b = base_mont;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        acc
    }
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Miller-Rabin on u128: the deterministic u64 witness set plus extra
/// pseudorandom rounds for the range beyond it.
pub fn is_prime_u128(n: u128) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u128, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mont = Montgomery::new(n);
    let mut d = n - 1;
    let mut s = 0u32;
    while d & 1 == 0 {
        d >>= 1;
        s += 1;
    }
    let witness = |a: u128| -> bool {
        let a = a % n;
        if a == 0 {
            return true;
        }
        let mut x = mont.pow(mont.to_mont(a), d);
        let one = mont.r1;
        let minus_one = n - one;
        if x == one || x == minus_one {
            return true;
        }
        for _ in 1..s {
            x = mont.mul(x, x);
            if x == minus_one {
                return true;
            }
        }
        false
    };
    for &a in &[2u128, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if !witness(a) {
            return false;
        }
    }
    let mut st = n as u64 ^ 0xD6E8FEB86659FD93;
    for _ in 0..24 {
        let a = ((splitmix(&mut st) as u128) << 64 | splitmix(&mut st) as u128) % (n - 3) + 2;
        if !witness(a) {
            return false;
        }
    }
    true
}

/// Brent's cycle-finding variant of Pollard rho with batched gcds.
fn rho_factor(n: u128, seed: u64) -> Option<u128> {
    let mont = Montgomery::new(n);
    let c = mont.to_mont((seed as u128 % (n - 1)) + 1);
    let f = |x: u128| -> u128 {
        let y = mont.mul(x, x);
        let mut z = y + c;
        if z >= n {
            z -= n;
        }
        z
    };
    let mut y = mont.to_mont(2);
    let mut r: u64 = 1;
    let mut q = mont.r1;
    let (mut x, mut ys) = (y, y);
    let m = 128u64;
    let mut g: u128 = 1;
    while g == 1 {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0u64;
        while k < r && g == 1 {
            ys = y;
            for _ in 0..m.min(r - k) {
                y = f(y);
                let diff = x.abs_diff(y);
                q = mont.mul(q, diff.max(1));
            }
            g = gcd_u128(mont.retire(q), n);
            k += m;
        }
        r *= 2;
        if r > 1 << 28 {
            return None;
        }
    }
    if g == n {
        // backtrack one by one
        loop {
            ys = f(ys);
            let diff = x.abs_diff(ys);
            g = gcd_u128(mont.retire(mont.mul(mont.r1, diff.max(1))), n);
            if g > 1 {
                break;
            }
        }
    }
    if g > 1 && g < n {
        Some(g)
    } else {
        None
    }
}

/// Complete factorization of n < 2^110 into primes.
pub fn factor_u128(n: u128) -> Vec<(u128, u32)> {
    assert!(n >= 1);
    let mut out: Vec<(u128, u32)> = Vec::new();
    let mut rem = n;
    for p in 2u128..100_000 {
        if p * p > rem {
            break;
        }
        if rem.is_multiple_of(p) {
            let mut e = 0;
            while rem.is_multiple_of(p) {
                rem /= p;
                e += 1;
            }
            out.push((p, e));
        }
    }
    let mut stack = vec![rem];
    while let Some(v) = stack.pop() {
        if v == 1 {
            continue;
        }
        if is_prime_u128(v) {
            match out.iter_mut().find(|(p, _)| *p == v) {
                Some((_, e)) => *e += 1,
                None => out.push((v, 1)),
            }
            continue;
        }
        let mut seed = 1u64;
        let d = loop {
            if let Some(d) = rho_factor(v, seed) {
                break d;
            }
            seed += 1;
            assert!(seed < 64, "rho failed to split {v}");
        };
        stack.push(d);
        stack.push(v / d);
    }
    out.sort_unstable();
    out
}

fn bigint_to_u128(v: &BigInt) -> u128 {
    v.abs()
        .to_u128()
        .expect("sequence value fits in u128 for the oracle range")
}

/// The primitive-divisor definition applied verbatim: factor u_n
/// completely, then test each of its primes against the discriminant
/// factor and every earlier element of the excluded range by direct
/// divisibility.
pub fn oracle_has_primitive_divisor(pair: &SequencePair, n: u64) -> bool {
    let value = element(pair, n).value;
    if value.abs() <= BigInt::from(1) {
        return false;
    }
    let primes: Vec<u128> = factor_u128(bigint_to_u128(&value))
        .into_iter()
        .map(|(p, _)| p)
        .collect();
    let (disc, m_lo): (i128, u64) = match pair.kind {
        // (alpha - beta)^2 = M and u_2 ... u_{n-1}
        SequenceKind::Lucas => (pair.m as i128, 2),
        // (alpha^2 - beta^2)^2 = L * M and u_3 ... u_{n-1}
        SequenceKind::Lehmer => (pair.l as i128 * pair.m as i128, 3),
    };
    let earlier: Vec<BigInt> = (m_lo..n).map(|m| element(pair, m).value).collect();
    'prime: for &r in &primes {
        if (disc.unsigned_abs() % r) == 0 {
            continue;
        }
        let rb = BigInt::from(r);
        for u in &earlier {
            if (u % &rb).is_zero() {
                continue 'prime;
            }
        }
        return true;
    }
    false
}

#[cfg(test)]
mod selftest {
    use super::*;

    #[test]
    fn factorization_known_values() {
        assert_eq!(factor_u128(1), vec![]);
        assert_eq!(factor_u128(2u128.pow(61) - 1), vec![(2u128.pow(61) - 1, 1)]);
        assert_eq!(
            factor_u128(600_851_475_143),
            vec![(71, 1), (839, 1), (1471, 1), (6857, 1)]
        );
        // product of two 15-digit primes
        let p = 1_000_000_000_000_037u128;
        let q = 1_000_000_000_000_091u128;
        assert!(is_prime_u128(p) && is_prime_u128(q));
        assert_eq!(factor_u128(p * q), vec![(p, 1), (q, 1)]);
        // agreement with the library's u64 factorizer on random inputs
        let mut st = 5u64;
        for _ in 0..200 {
            let n = splitmix(&mut st) % 10_000_000 + 1;
            let ours: Vec<(u128, u32)> = primdiv::arith::factor(n)
                .factors
                .iter()
                .map(|&(p, e)| (p as u128, e))
                .collect();
            assert_eq!(factor_u128(n as u128), ours, "mismatch at {n}");
        }
    }
}
