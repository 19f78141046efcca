//! Closed-form optical-path counts.
//!
//! Mode labels here are one-based, and `count_*(m, i, j)` counts paths from
//! input mode `j` to output mode `i`. Rectangular counts reduce to Catalan's
//! trapezoids `C_s(a, b)`; triangular counts are a difference of two
//! binomials.

use num_bigint::BigUint;
use num_integer::binomial as num_binomial;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TrapezoidIndex {
    pub s: u64,
    pub a: u64,
    pub b: u64,
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    num_binomial(BigUint::from(n), BigUint::from(k.min(n - k)))
}

/// `C_s(a, b)` by the three-branch binomial formula.
pub fn catalan_trapezoid(t: TrapezoidIndex) -> BigUint {
    let TrapezoidIndex { s, a, b } = t;
    if b < s {
        binomial(a + b, b)
    } else if b < s + a {
        binomial(a + b, b) - binomial(a + b, b - s)
    } else {
        BigUint::zero()
    }
}

// Signed variant used by the truncated-mesh counts: negative a or b means
// the trapezoid is empty.
fn trapezoid_signed(s: i64, a: i64, b: i64) -> Result<BigUint> {
    if s < 1 {
        return Err(Error::Inconsistent(format!("trapezoid order s = {s} < 1")));
    }
    if a < 0 || b < 0 {
        return Ok(BigUint::zero());
    }
    Ok(catalan_trapezoid(TrapezoidIndex {
        s: s as u64,
        a: a as u64,
        b: b as u64,
    }))
}

fn neg1(k: i64) -> i64 {
    if k.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

fn exact_div(num: i64, den: i64, what: &str) -> Result<i64> {
    if num % den != 0 {
        return Err(Error::Inconsistent(format!(
            "{what} = {num}/{den} is not an integer"
        )));
    }
    Ok(num / den)
}

/// The derived quantities `sigma, T, S, A, B` of a rectangular query.
///
/// `sigma` and `T` are stored doubled (`two_sigma`, `two_t`) so that every
/// field stays an integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RectangularIndices {
    pub two_sigma: i64,
    pub two_t: i64,
    pub s: i64,
    pub a: i64,
    pub b: i64,
}

// Shared core of the full and layer-truncated formulas. `src` is the input
// label, `dst` the label reached after `layers` layers, and `parity` the
// exponent of the second sign term in T.
fn indices(m: i64, layers: i64, src: i64, dst: i64, parity: i64) -> Result<RectangularIndices> {
    let two_sigma = (1 + 2 * src + 2 * dst - 2 * m).signum();
    let two_t = -2 * src + 2 * dst + neg1(src) + neg1(parity);
    let s = exact_div(m + 2 + two_sigma * (m - 2 * src + neg1(src) + 1), 2, "S")?;
    let a = exact_div(2 * (layers - 1) - two_sigma * two_t, 4, "A")?;
    let b = exact_div(2 * (layers - 1) + two_sigma * two_t, 4, "B")?;
    Ok(RectangularIndices {
        two_sigma,
        two_t,
        s,
        a,
        b,
    })
}

fn check_mode(m: usize, k: usize) -> Result<()> {
    if k == 0 || k > m {
        Err(Error::ModeOutOfRange { mode: k, m })
    } else {
        Ok(())
    }
}

/// Trapezoid indices for the rectangular count from input `j` to output `i`.
pub fn rectangular_indices(m: usize, i: usize, j: usize) -> Result<RectangularIndices> {
    check_mode(m, i)?;
    check_mode(m, j)?;
    let (m, i, j) = (m as i64, i as i64, j as i64);
    indices(m, m, j, i, m + i)
}

/// Number of paths from input `j` to output `i` in the rectangular mesh.
pub fn count_rectangular(m: usize, i: usize, j: usize) -> Result<BigUint> {
    let ix = rectangular_indices(m, i, j)?;
    if ix.a < 0 || ix.b < 0 {
        return Err(Error::Inconsistent(format!(
            "negative trapezoid index for m={m}, i={i}, j={j}"
        )));
    }
    trapezoid_signed(ix.s, ix.a, ix.b)
}

/// Number of paths from input `j` to output `i` in the triangular mesh.
pub fn count_triangular(m: usize, i: usize, j: usize) -> Result<BigUint> {
    check_mode(m, i)?;
    check_mode(m, j)?;
    if m == 1 {
        return Ok(BigUint::from(1u32));
    }
    let n = (2 * m - i - j) as u64;
    Ok(binomial(n, (m - j) as u64) - binomial(n, m as u64))
}

pub fn count(m: usize, arch: crate::Architecture, i: usize, j: usize) -> Result<BigUint> {
    match arch {
        crate::Architecture::Triangular => count_triangular(m, i, j),
        crate::Architecture::Rectangular => count_rectangular(m, i, j),
    }
}

fn check_odd_mz_query(m: usize, l: usize, q: usize) -> Result<()> {
    if m % 2 == 0 {
        return Err(Error::NoClosedForm(format!(
            "MZ-to-MZ counts are only known in closed form for odd m (got m = {m})"
        )));
    }
    if m < 3 {
        return Err(Error::InvalidArgument(format!("m = {m} has no MZ rows")));
    }
    if l == 0 || l > m {
        return Err(Error::InvalidArgument(format!("layer {l} outside 1..={m}")));
    }
    let h = (m - 1) / 2;
    if q == 0 || q > h {
        return Err(Error::InvalidArgument(format!("MZ row {q} outside 1..={h}")));
    }
    Ok(())
}

/// Paths from the `q_prime`-th MZ of the first layer to the `q`-th MZ of
/// layer `l` (all one-based) in an odd rectangular mesh.
pub fn count_mz_rectangular(m: usize, l: usize, q_prime: usize, q: usize) -> Result<BigUint> {
    check_odd_mz_query(m, l, q)?;
    check_odd_mz_query(m, 1, q_prime)?;
    if l == 1 {
        return Ok(BigUint::zero());
    }
    // Entry mode of the source MZ and the exit mode feeding the target,
    // which alternates between the upper and lower port with the layer.
    let src = 2 * q_prime as i64 - 1;
    let dst = 2 * q as i64 - 1 + ((l as i64 - 1) % 2);
    let (m, l) = (m as i64, l as i64);
    let ix = indices(m, l, src, dst, m + dst + l + 1)?;
    trapezoid_signed(ix.s, ix.a, ix.b)
}

/// `(IN, OUT)`: paths reaching MZ `(l, q)` from any first-layer MZ, and
/// paths leaving it towards any last-layer MZ.
pub fn mz_boundary_counts(m: usize, l: usize, q: usize) -> Result<(BigUint, BigUint)> {
    check_odd_mz_query(m, l, q)?;
    let h = (m - 1) / 2;
    let mut inc = BigUint::zero();
    let mut out = BigUint::zero();
    for qp in 1..=h {
        inc += count_mz_rectangular(m, l, qp, q)?;
        // horizontal mirror: layer l seen from the right is layer m + 1 - l
        out += count_mz_rectangular(m, m + 1 - l, qp, q)?;
    }
    Ok((inc, out))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AsymptoticCase {
    /// Input 1 to output 1.
    Corner11,
    /// Input 1 to output `m / 2`.
    Edge1HalfM,
}

impl AsymptoticCase {
    pub const ALL: [AsymptoticCase; 2] = [AsymptoticCase::Corner11, AsymptoticCase::Edge1HalfM];

    /// One-based `(output, input)` labels of the case.
    pub fn modes(self, m: usize) -> (usize, usize) {
        match self {
            AsymptoticCase::Corner11 => (1, 1),
            AsymptoticCase::Edge1HalfM => (m / 2, 1),
        }
    }
}

/// Growth rate of the edge-case ratio, `ln(3/8) + (5/4) ln 3`.
pub fn edge_rate() -> f64 {
    (3.0f64 / 8.0).ln() + 1.25 * 3.0f64.ln()
}

/// Natural log of the approximate triangular/rectangular count ratio.
pub fn asymptotic_log_ratio(m: usize, case: AsymptoticCase) -> Result<f64> {
    check_asymptotic(m, case)?;
    let m = m as f64;
    Ok(match case {
        AsymptoticCase::Corner11 => (m - 1.5) * std::f64::consts::LN_2 - m.ln(),
        AsymptoticCase::Edge1HalfM => edge_rate() * m - 1.0,
    })
}

/// Approximate triangular/rectangular count ratio (may overflow to infinity
/// for very large `m`; prefer [`asymptotic_log_ratio`]).
pub fn asymptotic_ratio(m: usize, case: AsymptoticCase) -> Result<f64> {
    Ok(asymptotic_log_ratio(m, case)?.exp())
}

fn check_asymptotic(m: usize, case: AsymptoticCase) -> Result<()> {
    if m < 4 {
        return Err(Error::InvalidArgument(format!("asymptotics need m >= 4, got {m}")));
    }
    if case == AsymptoticCase::Edge1HalfM && m % 2 != 0 {
        return Err(Error::InvalidArgument(format!("edge case needs even m, got {m}")));
    }
    Ok(())
}

/// Natural log of the exact count ratio for the case.
pub fn exact_log_ratio(m: usize, case: AsymptoticCase) -> Result<f64> {
    check_asymptotic(m, case)?;
    let (i, j) = case.modes(m);
    Ok(big_ln(&count_triangular(m, i, j)?) - big_ln(&count_rectangular(m, i, j)?))
}

/// Natural log of a positive big integer (`-inf` for zero).
pub fn big_ln(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 1000 {
        if let Some(v) = x.to_f64() {
            if v.is_finite() {
                return v.ln();
            }
        }
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap_or(f64::NAN);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn big_log10(x: &BigUint) -> f64 {
    big_ln(x) / std::f64::consts::LN_10
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn trapezoid_branches() {
        for s in 1..5 {
            for a in 0..6 {
                assert_eq!(catalan_trapezoid(TrapezoidIndex { s, a, b: 0 }), big(1));
                assert!(catalan_trapezoid(TrapezoidIndex { s, a, b: s + a }).is_zero());
            }
        }
        assert_eq!(catalan_trapezoid(TrapezoidIndex { s: 1, a: 2, b: 2 }), big(2));
    }

    // Ballot sequences: a up-steps, b down-steps, every prefix keeps
    // (#down - #up) below s.
    fn ballot(s: u64, a: u64, b: u64) -> u64 {
        fn go(s: i64, a: u64, b: u64, lead: i64) -> u64 {
            if lead >= s {
                return 0;
            }
            if a == 0 && b == 0 {
                return 1;
            }
            let mut n = 0;
            if a > 0 {
                n += go(s, a - 1, b, lead - 1);
            }
            if b > 0 {
                n += go(s, a, b - 1, lead + 1);
            }
            n
        }
        go(s as i64, a, b, 0)
    }

    #[test]
    fn trapezoid_matches_ballot_enumeration() {
        for s in 1..4 {
            for a in 0..7 {
                for b in 0..7 {
                    let t = TrapezoidIndex { s, a, b };
                    assert_eq!(catalan_trapezoid(t), big(ballot(s, a, b)), "{t:?}");
                }
            }
        }
    }

    #[test]
    fn small_mesh_counts() {
        assert_eq!(count_rectangular(2, 1, 1).unwrap(), big(1));
        assert_eq!(count_rectangular(3, 1, 1).unwrap(), big(2));
        assert_eq!(count_triangular(2, 1, 1).unwrap(), big(1));
        assert_eq!(count_triangular(3, 1, 1).unwrap(), big(2));
        assert_eq!(count_rectangular(1, 1, 1).unwrap(), big(1));
        assert!(count_rectangular(3, 0, 1).is_err());
    }

    #[test]
    fn triangular_is_symmetric() {
        for m in 1..=16 {
            for i in 1..=m {
                for j in 1..=m {
                    assert_eq!(count_triangular(m, i, j).unwrap(), count_triangular(m, j, i).unwrap());
                }
            }
        }
    }

    #[test]
    fn rectangular_mirror_symmetries() {
        // odd m: left-right mirror swaps inputs and outputs;
        // even m: up-down mirror reverses the mode labels
        for m in 1..=15 {
            for i in 1..=m {
                for j in 1..=m {
                    let c = count_rectangular(m, i, j).unwrap();
                    let mirrored = if m % 2 == 1 {
                        count_rectangular(m, j, i).unwrap()
                    } else {
                        count_rectangular(m, m + 1 - i, m + 1 - j).unwrap()
                    };
                    assert_eq!(c, mirrored, "m={m} i={i} j={j}");
                }
            }
        }
    }

    #[test]
    fn mz_counts_first_layer_and_last_layer() {
        for m in (3..=13).step_by(2) {
            let h = (m - 1) / 2;
            for q in 1..=h {
                for qp in 1..=h {
                    assert!(count_mz_rectangular(m, 1, qp, q).unwrap().is_zero());
                }
                assert!(mz_boundary_counts(m, 1, q).unwrap().0.is_zero());
            }
        }
        assert!(matches!(count_mz_rectangular(6, 3, 1, 1), Err(Error::NoClosedForm(_))));
    }

    #[test]
    fn asymptotic_formulas() {
        let want = 98.5 * std::f64::consts::LN_2 - 100f64.ln();
        let got = asymptotic_log_ratio(100, AsymptoticCase::Corner11).unwrap();
        assert!((got - want).abs() < 1e-12);
        assert!((edge_rate() - 0.3922).abs() < 1e-3);
        assert!(asymptotic_ratio(7, AsymptoticCase::Edge1HalfM).is_err());
    }

    #[test]
    fn big_ln_handles_huge_values() {
        let x = binomial(600, 300);
        let approx = big_ln(&x);
        // Stirling: ln C(2n, n) ~ 2n ln 2 - 0.5 ln(pi n)
        let stirling = 600.0 * std::f64::consts::LN_2 - 0.5 * (std::f64::consts::PI * 300.0).ln();
        assert!((approx - stirling).abs() < 1e-3);
        assert_eq!(big_ln(&big(1)), 0.0);
    }
}
