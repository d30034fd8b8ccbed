//! Primitive divisors of Lucas and Lehmer sequences at desk scale:
//! exact cyclotomic screening, rigorous analytic bound evaluators, and a
//! certified continued-fraction convergent search.
//!
//! The library is organized around the verification pipeline for a
//! parameter pair (p, q) with q >= 2 and |p| < 2q:
//!
//! * [`arith`] — factorization and the arithmetic functions used everywhere.
//! * [`cyclotomic`] — exact integer-polynomial algebra for the screening.
//! * [`sequences`] — exact sequence values and the primitive-divisor
//!   decision procedure.
//! * [`bounds`] — evaluators for the analytic lower bounds and thresholds.
//! * [`realcf`] — rigorous ball arithmetic, the target angle, its
//!   continued-fraction convergents, and the required/actual gap logs.
//! * [`verifier`] — the orchestrated per-pair pipeline and table sweeps.

pub mod arith;
pub mod bounds;
pub mod cyclotomic;
pub mod realcf;
pub mod sequences;
pub mod verifier;

pub use realcf::ball::{BallError, ComplexBall, RealBall};
pub use sequences::SequencePair;
pub use verifier::VerificationReport;
