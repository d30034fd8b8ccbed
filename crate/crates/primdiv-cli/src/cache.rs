//! On-disk polynomial cache: one versioned text file per index holding the
//! decimal coefficients of Phi_n, g_n, and g_n', guarded by a checksum.
//! Files failing the checksum or any structural validation are ignored so
//! the polynomials get recomputed.

use num_bigint::BigInt;
use primdiv::cyclotomic::{self, IntegerPolynomial};
use sha2::{Digest, Sha256};
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

const MAGIC: &str = "primdiv-gn-cache v1";

fn coeff_line(poly: &IntegerPolynomial) -> String {
    poly.coeffs()
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn parse_coeffs(line: &str) -> Option<Vec<BigInt>> {
    line.split_whitespace()
        .map(|t| BigInt::from_str(t).ok())
        .collect()
}

fn checksum(payload: &str) -> String {
    let mut h = Sha256::new();
    h.update(payload.as_bytes());
    hex(&h.finalize())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn file_for(dir: &Path, n: u64) -> PathBuf {
    dir.join(format!("gn_{n:06}.txt"))
}

/// Write the cache file for one index.
pub fn export(dir: &Path, n: u64) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let phi = cyclotomic::cyclotomic_poly(n);
    let mut payload = format!("{MAGIC}\nn {n}\nphi {}\n", coeff_line(&phi));
    if n >= 3 {
        let g = cyclotomic::g_poly(n).expect("n >= 3");
        let gd = cyclotomic::g_deriv_poly(n).expect("n >= 3");
        payload.push_str(&format!(
            "g {}\ngderiv {}\n",
            coeff_line(&g),
            coeff_line(&gd)
        ));
    }
    let sum = checksum(&payload);
    let mut f = fs::File::create(file_for(dir, n))?;
    f.write_all(payload.as_bytes())?;
    f.write_all(format!("checksum {sum}\n").as_bytes())?;
    Ok(())
}

#[derive(Debug, PartialEq, Eq)]
pub enum LoadOutcome {
    Installed,
    /// checksum mismatch, parse failure, or polynomial validation failure
    Rejected,
}

/// Parse, checksum, validate, and install one cache file.
pub fn load_file(path: &Path) -> io::Result<LoadOutcome> {
    let content = fs::read_to_string(path)?;
    let Some((payload, sumline)) = content.rsplit_once("checksum ") else {
        return Ok(LoadOutcome::Rejected);
    };
    if checksum(payload) != sumline.trim() {
        return Ok(LoadOutcome::Rejected);
    }
    let mut n: Option<u64> = None;
    let mut phi: Option<Vec<BigInt>> = None;
    let mut g: Option<Vec<BigInt>> = None;
    let mut gd: Option<Vec<BigInt>> = None;
    for line in payload.lines() {
        if line == MAGIC {
            continue;
        }
        match line.split_once(' ') {
            Some(("n", rest)) => n = rest.trim().parse().ok(),
            Some(("phi", rest)) => phi = parse_coeffs(rest),
            Some(("g", rest)) => g = parse_coeffs(rest),
            Some(("gderiv", rest)) => gd = parse_coeffs(rest),
            _ => return Ok(LoadOutcome::Rejected),
        }
    }
    let (Some(n), Some(phi)) = (n, phi) else {
        return Ok(LoadOutcome::Rejected);
    };
    let phi = IntegerPolynomial::from_coeffs(phi);
    let g = g.map(IntegerPolynomial::from_coeffs);
    if n >= 3 {
        // the stored derivative must match the stored g
        let (Some(g_ref), Some(gd)) = (&g, gd) else {
            return Ok(LoadOutcome::Rejected);
        };
        if IntegerPolynomial::from_coeffs(gd) != g_ref.derivative() {
            return Ok(LoadOutcome::Rejected);
        }
    }
    match cyclotomic::cache_install(n, phi, g) {
        Ok(()) => Ok(LoadOutcome::Installed),
        Err(_) => Ok(LoadOutcome::Rejected),
    }
}

/// Load every cache file in a directory; returns (installed, rejected).
pub fn load_dir(dir: &Path) -> (u32, u32) {
    let (mut ok, mut bad) = (0, 0);
    let Ok(entries) = fs::read_dir(dir) else {
        return (0, 0);
    };
    for entry in entries.flatten() {
        let path = entry.path();
        if path.extension().is_some_and(|e| e == "txt")
            && path
                .file_name()
                .and_then(|s| s.to_str())
                .is_some_and(|s| s.starts_with("gn_"))
        {
            match load_file(&path) {
                Ok(LoadOutcome::Installed) => ok += 1,
                _ => bad += 1,
            }
        }
    }
    (ok, bad)
}
