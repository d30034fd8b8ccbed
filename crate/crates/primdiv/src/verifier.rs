//! The per-pair verification pipeline: direct screening up to the n_q
//! cutoff, the right-hand inequality region up to 1260, then the
//! continued-fraction convergent checks up to the unconditional cap, plus
//! the four-interval product certificates and the table sweeps.

use crate::arith;
use crate::bounds;
use crate::realcf::{
    self, ConvergentRecord, ConvergentVerdict, PrecisionPolicy, RealBall, RealcfError,
};
use crate::sequences::{self, PairError, ScreenVerdict, SequencePair};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;
use std::sync::{LazyLock, Mutex, OnceLock};

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum VerifierError {
    #[error(transparent)]
    Pair(#[from] PairError),
    #[error(transparent)]
    Realcf(#[from] RealcfError),
    #[error("product-bound certificate infeasible: {0}")]
    Infeasible(&'static str),
    #[error("tail certification failed at n = {0}")]
    TailCertification(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RangeMethod {
    DirectDefinition,
    StewartScreen,
    RhsInequality,
    ConvergentCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum RangeOutcome {
    Pass,
    Exceptions(Vec<u64>),
    Inconclusive(String),
}

/// One verified slice (lo, hi] of the index range.
#[derive(Debug, Clone, Serialize)]
pub struct RangeRecord {
    pub lo: u64,
    pub hi: u64,
    pub method: RangeMethod,
    pub outcome: RangeOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Conclusion {
    AllPrimitiveAboveThirty,
    ExceptionFound(u64),
    Inconclusive(String),
}

/// A convergent with its evaluated gap data and display truncations
/// (integer part for the required log, one decimal for the actual log,
/// both toward zero).
#[derive(Debug, Clone)]
pub struct EvaluatedConvergent {
    pub record: ConvergentRecord,
    pub d_req_int: Option<i64>,
    pub d_act_tenths: Option<i64>,
}

/// Full per-pair outcome.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub pair: SequencePair,
    pub height: RealBall,
    pub ranges: Vec<RangeRecord>,
    /// informational: exceptional indices in [2, 30]
    pub exceptions_up_to_30: Vec<u64>,
    pub convergent_rows: Vec<EvaluatedConvergent>,
    pub conclusion: Conclusion,
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub n_cap: u64,
    pub policy: PrecisionPolicy,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            n_cap: bounds::LUCAS_LEHMER_CAP,
            policy: PrecisionPolicy::default(),
        }
    }
}

// ---- Table 2: the rhs-inequality cutoffs ----

static NQ_CACHE: LazyLock<Mutex<HashMap<i64, u64>>> = LazyLock::new(|| Mutex::new(HashMap::new()));

/// The smallest N >= 30 such that the right-hand inequality holds for all
/// N < n <= 1260 at this q. Computed by a downward scan, cached per q.
pub fn compute_nq(q: i64, policy: &PrecisionPolicy) -> Result<u64, VerifierError> {
    assert!(q >= 2);
    if let Some(v) = NQ_CACHE.lock().unwrap().get(&q) {
        return Ok(*v);
    }
    let mut nq = 30u64;
    for n in (31..=1260u64).rev() {
        if !realcf::rhs_check(q, n, policy)? {
            nq = n;
            break;
        }
    }
    NQ_CACHE.lock().unwrap().insert(q, nq);
    Ok(nq)
}

// ---- tail certification: rhs holds for every n > 1260 ----

/// Interval certificate for the weakened rhs condition
/// phi(n) ln(6/5) > (2^omega/omega + 8) ln n on [a, b], via the
/// arithmetic-function bounds: phi(n) >= n/(e^gamma lnln n + 2.50637/lnln n)
/// and omega(n) < 1.3841 ln n / lnln n, with 2^x/x increasing for x >= 2.
fn weak_rhs_interval_certificate(a: u64, b: u64, prec: u32) -> Option<bool> {
    assert!(5000 <= a && a < b);
    let wp = prec + 32;
    let lnln_a = RealBall::from_u64(a).ln(wp).ln(wp);
    let ln_b = RealBall::from_u64(b).ln(wp);
    let lnln_b = ln_b.ln(wp);
    // phi lower bound on the interval, anchored at the worst endpoints
    let e_gamma = RealBall::euler_gamma(wp).exp(wp);
    let denom = e_gamma.mul(&lnln_b, wp).add(
        &RealBall::from_ratio(BigInt::from(250637), BigInt::from(100000), wp)
            .div(&lnln_a, wp)
            .ok()?,
        wp,
    );
    let phi_lb = RealBall::from_u64(a).div(&denom, wp).ok()?;
    // omega upper bound on the interval
    let x = RealBall::from_ratio(BigInt::from(13841), BigInt::from(10000), wp)
        .mul(&ln_b, wp)
        .div(&lnln_a, wp)
        .ok()?;
    if x.gt(&RealBall::from_i64(2)) != Some(true) {
        return None; // the monotone step needs x >= 2
    }
    // 2^x / x at the upper anchor
    let two_pow = x.mul(&RealBall::ln2(wp), wp).exp(wp);
    let growth = two_pow.div(&x, wp).ok()?;
    let lhs = phi_lb.mul(
        &RealBall::from_ratio(BigInt::from(6), BigInt::from(5), wp).ln(wp),
        wp,
    );
    let rhs = growth.add(&RealBall::from_i64(8), wp).mul(&ln_b, wp);
    lhs.gt(&rhs)
}

static TAIL_Q2: OnceLock<Result<(), VerifierError>> = OnceLock::new();

/// Certify the right-hand inequality for q = 2 on all of
/// (1260, LUCAS_LEHMER_CAP]: per-index ball checks up to 5000, then dyadic
/// interval certificates driven by the arithmetic-function bounds.
fn rhs_tail_certified_q2(policy: &PrecisionPolicy) -> Result<(), VerifierError> {
    let policy = *policy;
    TAIL_Q2
        .get_or_init(move || {
            for n in 1261..=5000u64 {
                if !realcf::rhs_check(2, n, &policy)? {
                    return Err(VerifierError::TailCertification(n));
                }
            }
            let mut a = 5000u64;
            while a < bounds::LUCAS_LEHMER_CAP {
                let b = (a * 2).min(bounds::LUCAS_LEHMER_CAP);
                let ok = policy
                    .escalate("tail interval certificate", |prec| {
                        weak_rhs_interval_certificate(a, b, prec)
                    })
                    .unwrap_or(false);
                if !ok {
                    return Err(VerifierError::TailCertification(a));
                }
                a = b;
            }
            Ok(())
        })
        .clone()
}

/// Certify the tail for arbitrary q >= 2: the q = 2 certificate plus the
/// certified monotonicity of the required gap in q (ln(5/3q) <= ln(5/6)).
fn rhs_tail_certified(q: i64, policy: &PrecisionPolicy) -> Result<(), VerifierError> {
    rhs_tail_certified_q2(policy)?;
    if q == 2 {
        return Ok(());
    }
    let mono = policy.escalate("d_req monotonicity in q", |prec| {
        let this_q = RealBall::from_ratio(BigInt::from(5), BigInt::from(3 * q), prec).ln(prec);
        let base = RealBall::from_ratio(BigInt::from(5), BigInt::from(6), prec).ln(prec);
        this_q.lt(&base)
    })?;
    if mono {
        Ok(())
    } else {
        Err(VerifierError::TailCertification(0))
    }
}

// ---- four-interval product certificates ----

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProductBoundRoute {
    /// Per-case products evaluated in full (the small-index treatment).
    Direct,
    /// Exact cardinality expressions plus the max(c) < 1 condition.
    General,
}

/// Certificate of the four-interval product bound at index n.
#[derive(Debug, Clone)]
pub struct ProductBoundCertificate {
    pub n: u64,
    /// |A'|, |B'|, |C'|, |D'|
    pub cardinalities: [u64; 4],
    pub c_bounds: [RealBall; 4],
    pub lhs_max: RealBall,
    /// (5/3)^(phi(n)/2)
    pub rhs: RealBall,
    pub route: ProductBoundRoute,
    pub pass: bool,
}

fn default_route(n: u64) -> ProductBoundRoute {
    if n <= 210 || n == 231 || n == 462 {
        ProductBoundRoute::Direct
    } else {
        ProductBoundRoute::General
    }
}

pub fn certify_product_bound(
    n: u64,
    policy: &PrecisionPolicy,
) -> Result<ProductBoundCertificate, VerifierError> {
    certify_product_bound_with_route(n, default_route(n), policy)
}

pub fn certify_product_bound_with_route(
    n: u64,
    route: ProductBoundRoute,
    policy: &PrecisionPolicy,
) -> Result<ProductBoundCertificate, VerifierError> {
    assert!(n > 30, "the product bound is used for n > 30");
    if n > 1_000_000 {
        return Err(VerifierError::Infeasible("coprime enumeration beyond 10^6"));
    }
    let prec = policy.start.max(96);
    let wp = prec + 32;
    // the four coprime index sets below n/2
    let mut sets: [Vec<u64>; 4] = [vec![], vec![], vec![], vec![]];
    for j in 1..n.div_ceil(2) {
        if 2 * j >= n || arith::gcd(j, n) != 1 {
            continue;
        }
        if 3 * j > n {
            sets[0].push(j); // A': n/3 < j < n/2
        } else if 4 * j > n {
            sets[1].push(j); // B': n/4 < j < n/3
        } else if 6 * j > n {
            sets[2].push(j); // C': n/6 < j < n/4
        } else {
            sets[3].push(j); // D': 0 < j < n/6
        }
    }
    let s = arith::phi(n) / 2;
    let cards = [
        sets[0].len() as u64,
        sets[1].len() as u64,
        sets[2].len() as u64,
        sets[3].len() as u64,
    ];
    assert_eq!(
        cards.iter().sum::<u64>(),
        s,
        "interval sets must partition the totatives"
    );

    // cos(2 pi j / n) for every coprime j < n/2
    let mut cos_map: HashMap<u64, RealBall> = HashMap::new();
    let two_pi = RealBall::pi(wp).shift_pow2(1);
    for set in &sets {
        for &j in set {
            let angle = two_pi.mul(
                &RealBall::from_ratio(BigInt::from(j), BigInt::from(n), wp),
                wp,
            );
            cos_map.insert(j, angle.cos(wp));
        }
    }
    let weight = |case: usize, j: u64, wp: u32| -> RealBall {
        let c4 = cos_map[&j].shift_pow2(2); // 4 cos
        match case {
            0 => RealBall::from_i64(3).add(&c4, wp), // 3 + 4cos on C' u D'
            1 => RealBall::from_i64(1).add(&c4, wp), // 1 + 4cos on D'
            2 => RealBall::from_i64(1).sub(&c4, wp), // 1 - 4cos on A'
            3 => RealBall::from_i64(3).sub(&c4, wp), // 3 - 4cos on A' u B'
            _ => unreachable!(),
        }
    };
    // per-case index sets and the 2-power exponents
    let case_sets: [Vec<u64>; 4] = [
        sets[2].iter().chain(sets[3].iter()).copied().collect(),
        sets[3].clone(),
        sets[0].clone(),
        sets[0].iter().chain(sets[1].iter()).copied().collect(),
    ];
    let e_pows = [
        cards[0] + cards[1],
        cards[1] + cards[2],
        cards[1] + cards[2],
        cards[2] + cards[3],
    ];
    let cap = RealBall::from_u64(arith::stewart_prime_cap(n));

    // c_i = (P / prod w_j)^(1 / (s - |S_i|))
    let mut c_bounds: Vec<RealBall> = Vec::with_capacity(4);
    for (case, set) in case_sets.iter().enumerate() {
        let t = s - set.len() as u64;
        if t == 0 {
            return Err(VerifierError::Infeasible(
                "degenerate exponent in the c bound",
            ));
        }
        let mut ln_prod = RealBall::zero();
        for &j in set {
            ln_prod = ln_prod.add(&weight(case, j, wp).ln(wp), wp);
        }
        let ln_c = cap
            .ln(wp)
            .sub(&ln_prod, wp)
            .div(&RealBall::from_u64(t), wp)
            .map_err(RealcfError::from)?;
        c_bounds.push(ln_c.exp(wp));
    }

    let rhs = RealBall::from_ratio(
        BigInt::from(5).pow(s as u32),
        BigInt::from(3).pow(s as u32),
        wp,
    );

    let (lhs_max, pass) = match route {
        ProductBoundRoute::Direct => {
            let mut lhs_max = RealBall::zero();
            for (case, set) in case_sets.iter().enumerate() {
                let mut prod = RealBall::from_bigint(&(BigInt::from(1) << e_pows[case]));
                for &j in set {
                    let w = weight(case, j, wp);
                    let factor = RealBall::from_i64(1)
                        .add(&c_bounds[case].div(&w, wp).map_err(RealcfError::from)?, wp);
                    prod = prod.mul(&factor, wp);
                }
                if prod.gt(&lhs_max) == Some(true) {
                    lhs_max = prod;
                }
            }
            let pass = lhs_max.lt(&rhs) == Some(true);
            (lhs_max, pass)
        }
        ProductBoundRoute::General => {
            // exact comparison 2^E 4^F 3^(s-F) < 5^s for the four corners
            let f_pows = [cards[2] + cards[3], cards[3], cards[0], cards[0] + cards[1]];
            let five_s = BigInt::from(5).pow(s as u32);
            let mut exact_ok = true;
            let mut lhs_max = RealBall::zero();
            for case in 0..4 {
                let e = e_pows[case] as u32;
                let f = f_pows[case] as u32;
                let lhs = (BigInt::from(1) << e)
                    * BigInt::from(4).pow(f)
                    * BigInt::from(3).pow(s as u32 - f);
                if lhs >= five_s {
                    exact_ok = false;
                }
                let lhs_ball = RealBall::from_ratio(
                    (BigInt::from(1) << e) * BigInt::from(4).pow(f),
                    BigInt::from(3).pow(f),
                    wp,
                );
                if lhs_ball.gt(&lhs_max) == Some(true) {
                    lhs_max = lhs_ball;
                }
            }
            let one = RealBall::from_i64(1);
            let c_ok = c_bounds.iter().all(|c| c.lt(&one) == Some(true));
            (lhs_max, exact_ok && c_ok)
        }
    };

    Ok(ProductBoundCertificate {
        n,
        cardinalities: cards,
        c_bounds: [
            c_bounds[0].clone(),
            c_bounds[1].clone(),
            c_bounds[2].clone(),
            c_bounds[3].clone(),
        ],
        lhs_max,
        rhs,
        route,
        pass,
    })
}

// ---- the per-pair pipeline ----

fn evaluate_convergent(
    pair: &SequencePair,
    rec: &mut ConvergentRecord,
    policy: &PrecisionPolicy,
) -> Result<(), VerifierError> {
    let (k, n) = (rec.k, rec.n);
    let verdict = policy.escalate("convergent gap comparison", |prec| {
        let dreq = realcf::d_req_log_default(pair.q, n, prec);
        let dact = realcf::d_act_log(pair.p, pair.q, k, n, prec).ok()?;
        dact.gt(&dreq)
    });
    match verdict {
        Ok(true) => rec.verdict = ConvergentVerdict::Refuted,
        Ok(false) => rec.verdict = ConvergentVerdict::Violation,
        Err(_) => rec.verdict = ConvergentVerdict::Undecided,
    }
    // store enclosures at a precision that also certifies the truncations
    let dreq = realcf::d_req_log_default(pair.q, n, policy.start);
    rec.d_req_log = Some(dreq);
    rec.d_act_log = realcf::d_act_log_auto(pair.p, pair.q, k, n, policy).ok();
    Ok(())
}

fn truncations(
    pair: &SequencePair,
    rec: &ConvergentRecord,
    policy: &PrecisionPolicy,
) -> (Option<i64>, Option<i64>) {
    let d_req_int = policy
        .escalate("d_req truncation", |prec| {
            realcf::d_req_log_default(pair.q, rec.n, prec)
                .trunc_int_certain()
                .and_then(|v| v.to_i64())
        })
        .ok();
    let d_act_tenths = policy
        .escalate("d_act truncation", |prec| {
            let v = realcf::d_act_log(pair.p, pair.q, rec.k, rec.n, prec).ok()?;
            v.trunc_tenths_certain(prec).and_then(|t| t.to_i64())
        })
        .ok();
    (d_req_int, d_act_tenths)
}

/// Run the full pipeline for one pair up to `options.n_cap`.
pub fn verify_pair(
    p: i64,
    q: i64,
    options: &VerifyOptions,
) -> Result<VerificationReport, VerifierError> {
    let pair = SequencePair::new(p, q)?;
    let policy = options.policy;
    let n_cap = options.n_cap.max(31);
    let height = bounds::height_quadratic_pair(p, q, policy.start);
    let exceptions_up_to_30 = sequences::enumerate_exceptions(&pair, 2, 30);

    let mut ranges: Vec<RangeRecord> = Vec::new();
    let mut first_exception: Option<u64> = None;
    let mut inconclusive: Option<String> = None;

    // (30, n_q]: the screen with exact fallback
    let nq = compute_nq(q, &policy)?;
    let direct_hi = nq.min(n_cap);
    if direct_hi > 30 {
        let found = sequences::enumerate_exceptions(&pair, 31, direct_hi);
        let outcome = if found.is_empty() {
            RangeOutcome::Pass
        } else {
            first_exception = first_exception.or(found.first().copied());
            RangeOutcome::Exceptions(found)
        };
        ranges.push(RangeRecord {
            lo: 30,
            hi: direct_hi,
            method: RangeMethod::StewartScreen,
            outcome,
        });
    }

    // (n_q, 1260]: certified while computing n_q
    if n_cap > nq && nq < 1260 {
        let hi = 1260.min(n_cap);
        ranges.push(RangeRecord {
            lo: nq,
            hi,
            method: RangeMethod::RhsInequality,
            outcome: RangeOutcome::Pass,
        });
    }

    // (1260, n_cap]: convergent checks under the certified tail premise
    let mut convergent_rows: Vec<EvaluatedConvergent> = Vec::new();
    if n_cap > 1260 {
        let outcome = match rhs_tail_certified(q, &policy) {
            Err(e) => {
                inconclusive = Some(format!("tail certification failed: {e}"));
                RangeOutcome::Inconclusive(format!("tail certification failed: {e}"))
            }
            Ok(()) => {
                let src = |prec: u32| realcf::theta(p, q, prec);
                match realcf::convergents(&src, n_cap, &policy) {
                    Err(e) => {
                        inconclusive = Some(format!("convergent expansion: {e}"));
                        RangeOutcome::Inconclusive(format!("convergent expansion: {e}"))
                    }
                    Ok(recs) => {
                        let mut bad: Vec<u64> = Vec::new();
                        for mut rec in recs.into_iter().filter(|r| r.n > 1260) {
                            evaluate_convergent(&pair, &mut rec, &policy)?;
                            match rec.verdict {
                                ConvergentVerdict::Refuted => {}
                                ConvergentVerdict::Violation => {
                                    // the gap comparison alone does not
                                    // certify a primitive divisor here;
                                    // resolve exactly when feasible
                                    if rec.n <= 100_000 {
                                        if !sequences::has_primitive_divisor(&pair, rec.n) {
                                            bad.push(rec.n);
                                        }
                                    } else {
                                        inconclusive = Some(format!(
                                            "convergent n = {} violates the gap bound beyond exact range",
                                            rec.n
                                        ));
                                    }
                                }
                                ConvergentVerdict::Undecided => {
                                    inconclusive = Some(format!(
                                        "comparison undecided at n = {} at the precision cap",
                                        rec.n
                                    ));
                                }
                            }
                            let (d_req_int, d_act_tenths) = truncations(&pair, &rec, &policy);
                            convergent_rows.push(EvaluatedConvergent {
                                record: rec,
                                d_req_int,
                                d_act_tenths,
                            });
                        }
                        if let Some(n) = bad.first() {
                            first_exception = first_exception.or(Some(*n));
                            RangeOutcome::Exceptions(bad)
                        } else if let Some(msg) = &inconclusive {
                            RangeOutcome::Inconclusive(msg.clone())
                        } else {
                            RangeOutcome::Pass
                        }
                    }
                }
            }
        };
        ranges.push(RangeRecord {
            lo: 1260.max(nq).min(n_cap),
            hi: n_cap,
            method: RangeMethod::ConvergentCheck,
            outcome,
        });
    }

    let conclusion = if let Some(n) = first_exception {
        Conclusion::ExceptionFound(n)
    } else if let Some(msg) = inconclusive {
        Conclusion::Inconclusive(msg)
    } else if n_cap >= bounds::LUCAS_LEHMER_CAP
        && ranges.iter().all(|r| r.outcome == RangeOutcome::Pass)
    {
        Conclusion::AllPrimitiveAboveThirty
    } else {
        Conclusion::Inconclusive(format!(
            "no exceptions found, but the range was capped at {n_cap}"
        ))
    };

    Ok(VerificationReport {
        pair,
        height,
        ranges,
        exceptions_up_to_30,
        convergent_rows,
        conclusion,
    })
}

/// Convergent table for (p, q) = (-3, 2): all rows with 1260 < n <= cap.
pub fn table1(policy: &PrecisionPolicy) -> Result<Vec<EvaluatedConvergent>, VerifierError> {
    let options = VerifyOptions {
        n_cap: bounds::LUCAS_LEHMER_CAP,
        policy: *policy,
    };
    let report = verify_pair(-3, 2, &options)?;
    Ok(report.convergent_rows)
}

/// The n_q cutoffs for q in [2, q_max].
pub fn table2(q_max: i64, policy: &PrecisionPolicy) -> Result<Vec<(i64, u64)>, VerifierError> {
    assert!(q_max >= 2);
    (2..=q_max)
        .map(|q| Ok((q, compute_nq(q, policy)?)))
        .collect()
}

/// Verify every valid pair with q in [q_lo, q_hi], in deterministic
/// (q, p) order. Per-pair failures become Inconclusive reports; the sweep
/// never aborts.
pub fn scan(q_lo: i64, q_hi: i64, options: &VerifyOptions) -> Vec<VerificationReport> {
    assert!(2 <= q_lo && q_lo <= q_hi);
    let mut pairs: Vec<SequencePair> = Vec::new();
    for q in q_lo..=q_hi {
        pairs.extend(sequences::pairs_for_q(q));
    }
    let mut reports: Vec<VerificationReport> = pairs
        .par_iter()
        .map(|pr| {
            verify_pair(pr.p, pr.q, options).unwrap_or_else(|e| VerificationReport {
                pair: *pr,
                height: bounds::height_quadratic_pair(pr.p, pr.q, options.policy.start),
                ranges: vec![],
                exceptions_up_to_30: vec![],
                convergent_rows: vec![],
                conclusion: Conclusion::Inconclusive(format!("pipeline error: {e}")),
            })
        })
        .collect();
    reports.sort_by_key(|r| (r.pair.q, r.pair.p));
    reports
}

/// Set the global worker-pool size for sweeps; only the first call has an
/// effect.
pub fn configure_thread_pool(jobs: usize) -> Result<(), rayon::ThreadPoolBuildError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global()
}

/// The agreement invariant between the screen and the exact definition on
/// a sample range: the screen's certificate never contradicts the
/// definition.
pub fn screen_agrees_with_definition(pair: &SequencePair, n_lo: u64, n_hi: u64) -> bool {
    (n_lo.max(13)..=n_hi).all(|n| match sequences::stewart_screen(pair, n) {
        ScreenVerdict::CertifiedPrimitive => sequences::has_primitive_divisor(pair, n),
        ScreenVerdict::Candidate => true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nq_reproduces_known_cutoffs() {
        let policy = PrecisionPolicy::default();
        assert_eq!(compute_nq(2, &policy).unwrap(), 1260);
        assert_eq!(compute_nq(3, &policy).unwrap(), 330);
        assert_eq!(compute_nq(5, &policy).unwrap(), 120);
        assert_eq!(compute_nq(8, &policy).unwrap(), 66);
        assert_eq!(compute_nq(21, &policy).unwrap(), 30);
    }

    #[test]
    fn nq_nonincreasing() {
        let policy = PrecisionPolicy::default();
        let mut prev = u64::MAX;
        for q in 2..=100 {
            let nq = compute_nq(q, &policy).unwrap();
            assert!(nq <= prev, "n_q increased at q={q}");
            prev = nq;
        }
    }

    #[test]
    fn tail_certificates() {
        let policy = PrecisionPolicy::default();
        assert!(weak_rhs_interval_certificate(5000, 10_000, 128).unwrap());
        assert!(weak_rhs_interval_certificate(10_000_000_000, 20_000_000_000, 128).unwrap());
        rhs_tail_certified_q2(&policy).unwrap();
        rhs_tail_certified(50, &policy).unwrap();
    }

    #[test]
    fn product_bound_small_indices() {
        let policy = PrecisionPolicy::default();
        for n in [31u64, 50, 105, 210] {
            let cert = certify_product_bound(n, &policy).unwrap();
            assert_eq!(cert.route, ProductBoundRoute::Direct);
            assert!(cert.pass, "direct certificate failed at {n}");
            assert_eq!(cert.cardinalities.iter().sum::<u64>(), arith::phi(n) / 2);
        }
        for n in [231u64, 462] {
            let cert = certify_product_bound(n, &policy).unwrap();
            assert_eq!(cert.route, ProductBoundRoute::Direct);
            assert!(cert.pass, "direct certificate failed at {n}");
        }
        for n in [211u64, 331, 750, 2310] {
            let cert = certify_product_bound(n, &policy).unwrap();
            assert_eq!(cert.route, ProductBoundRoute::General);
            assert!(cert.pass, "general certificate failed at {n}");
        }
    }

    #[test]
    fn verify_pair_minus3_2_full() {
        let report = verify_pair(-3, 2, &VerifyOptions::default()).unwrap();
        assert_eq!(report.conclusion, Conclusion::AllPrimitiveAboveThirty);
        assert_eq!(report.convergent_rows.len(), 22);
        let first = &report.convergent_rows[0];
        assert_eq!((first.record.k, first.record.n), (497, 1291));
        assert_eq!(first.d_req_int, Some(-116));
        assert_eq!(first.d_act_tenths, Some(-126));
        // the certified margin d_act - d_req is about 103 ln-units
        let margin = first
            .record
            .d_act_log
            .as_ref()
            .unwrap()
            .sub(first.record.d_req_log.as_ref().unwrap(), 128);
        assert!(margin.mid_f64() > 100.0 && margin.mid_f64() < 107.0);
        // ranges partition (30, cap]
        let mut expect_lo = 30u64;
        for r in &report.ranges {
            assert_eq!(r.lo, expect_lo, "gap or overlap in ranges");
            assert!(r.hi > r.lo);
            expect_lo = r.hi;
        }
        assert_eq!(expect_lo, bounds::LUCAS_LEHMER_CAP);
    }

    #[test]
    fn verify_pair_partial_cap() {
        let options = VerifyOptions {
            n_cap: 1_000_000,
            ..Default::default()
        };
        let report = verify_pair(1, 2, &options).unwrap();
        match &report.conclusion {
            Conclusion::Inconclusive(msg) => assert!(msg.contains("capped")),
            other => panic!("expected a capped-range conclusion, got {other:?}"),
        }
        assert!(report
            .ranges
            .iter()
            .all(|r| r.outcome == RangeOutcome::Pass));
    }

    #[test]
    fn screen_definition_agreement_sample() {
        let pair = SequencePair::new(-3, 2).unwrap();
        assert!(screen_agrees_with_definition(&pair, 13, 200));
        let pair = SequencePair::new(5, 7).unwrap();
        assert!(screen_agrees_with_definition(&pair, 13, 120));
    }

    #[test]
    fn table2_self_consistency() {
        let policy = PrecisionPolicy::default();
        for (q, nq) in table2(12, &policy).unwrap() {
            for j in 1..=50u64 {
                assert!(
                    realcf::rhs_check(q, nq + j, &policy).unwrap(),
                    "rhs fails just above n_q at q={q}, n={}",
                    nq + j
                );
            }
        }
    }
}
