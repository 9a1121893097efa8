//! Reference implementation of the discrete Fréchet distance as the literal
//! recursive definition, memoized. Intended for checking [`super::frechet_dp`]
//! on small inputs only.
//!
//! ```text
//! F(τ, τ') = max(d(τ₀, τ'₀), min{ F(τ[1:], τ'[1:]), F(τ, τ'[1:]), F(τ[1:], τ') })
//! ```
//!
//! with `F(∅, ∅) = 0` and `F(∅, ·) = F(·, ∅) = ∞` closing the recursion.

use std::collections::HashMap;

use super::{SimilarityError, WaypointSeq};
use crate::geometry::Vec3;

/// Largest `m·n` the oracle accepts.
pub const ORACLE_MAX_CELLS: usize = 400;

pub fn frechet_oracle(a: &WaypointSeq, b: &WaypointSeq) -> Result<f64, SimilarityError> {
    let (m, n) = (a.len(), b.len());
    if m * n > ORACLE_MAX_CELLS {
        return Err(SimilarityError::TooLarge { m, n, limit: ORACLE_MAX_CELLS });
    }
    let mut memo = HashMap::new();
    Ok(suffix_distance(a.points(), b.points(), &mut memo))
}

fn euclid(p: Vec3, q: Vec3) -> f64 {
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    let dz = p.z - q.z;
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Distance between the suffixes `a` and `b`, memoized on their lengths.
fn suffix_distance(a: &[Vec3], b: &[Vec3], memo: &mut HashMap<(usize, usize), f64>) -> f64 {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => return 0.0,
        (true, false) | (false, true) => return f64::INFINITY,
        _ => {}
    }
    let key = (a.len(), b.len());
    if let Some(&d) = memo.get(&key) {
        return d;
    }
    let rest = suffix_distance(&a[1..], &b[1..], memo)
        .min(suffix_distance(a, &b[1..], memo))
        .min(suffix_distance(&a[1..], b, memo));
    let d = euclid(a[0], b[0]).max(rest);
    memo.insert(key, d);
    d
}
