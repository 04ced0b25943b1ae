//! Square-lattice sums and Eisenstein functions for the lattice generated by
//! `1` and `i`.
//!
//! The functions
//!
//! ```text
//! E_p(z) = Σ (z - m1 - i m2)^-p,        p >= 1
//! σ_p(z) = E_p(z) - z^-p
//! ```
//!
//! are evaluated by reducing `z` into the fundamental cell, summing the nine
//! lattice points of the surrounding 3x3 block explicitly and expanding the
//! remaining lattice in a Taylor series about the origin. The remainder is
//! analytic in `|z| < 2`, so on the cell (`|z| <= 1/√2`) the series converges
//! like `0.354^n`.
//!
//! `E_2` is conditionally convergent; it is fixed by the Eisenstein order of
//! summation (rows `m1` summed completely, then `m2` symmetrically), which is
//! the same as `E_2 = ℘ + S_2` with `S_2 = π`. `E_1` is `ζ(z) - πz`.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

/// Half-width of the direct summation window used for lattice sums.
pub const DEFAULT_CUTOFF: usize = 200;

/// Taylor terms kept for the lattice outside the 3x3 block.
const TAYLOR_TERMS: usize = 96;

/// Lowest order whose tail sum is taken from direct summation; lower orders
/// come from `S_4` and the `℘` relation `S_8 = 3 S_4² / 7`.
const DIRECT_TAIL_FROM: usize = 12;

const POLE_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EllipticError {
    #[error("lattice sum order must be even and at least 2, got {0}")]
    InvalidOrder(i64),
    #[error("Eisenstein order must be at least 1")]
    ZeroOrder,
    #[error("order {order} exceeds the cached maximum {max_order}")]
    OrderTooHigh { order: usize, max_order: usize },
    #[error("pole at lattice point {m1}{m2:+}i")]
    Pole { m1: i64, m2: i64 },
}

/// Σ' (m1 + i m2)^-n over the lattice window `|m1|, |m2| <= cutoff`.
///
/// For `n >= 4` the sum is taken directly over the square window. For `n = 2`
/// square shells cancel to zero by the quarter-turn symmetry of the lattice,
/// so the Eisenstein order is used instead: each row `m2` is summed over all
/// `m1` in closed form and the rows are added for `|m2| <= cutoff`.
pub fn lattice_sum(n: i64, cutoff: usize) -> Result<f64, EllipticError> {
    if n < 2 || n % 2 != 0 {
        return Err(EllipticError::InvalidOrder(n));
    }
    if n == 2 {
        // Σ_{m1 != 0} m1^-2 = π²/3 and Σ_{m1} (m1 + i m2)^-2 = -π² / sinh²(π m2).
        let mut total = PI * PI / 3.0;
        for m2 in 1..=cutoff {
            let s = (PI * m2 as f64).sinh();
            total -= 2.0 * PI * PI / (s * s);
        }
        return Ok(total);
    }
    let k = cutoff as i64;
    let mut total = Complex64::new(0.0, 0.0);
    for m1 in -k..=k {
        for m2 in -k..=k {
            if m1 == 0 && m2 == 0 {
                continue;
            }
            total += Complex64::new(m1 as f64, m2 as f64).powi(-(n as i32));
        }
    }
    debug_assert!(total.im.abs() < 1e-12);
    Ok(total.re)
}

/// Precomputed lattice constants for the unit square lattice.
#[derive(Debug, Clone)]
pub struct LatticeConstants {
    max_order: usize,
    cutoff: usize,
    eta1: f64,
    /// `S_k`, indexed by `k`.
    sums: Vec<f64>,
    /// `S_k` minus the eight non-zero points of the 3x3 block, indexed by `k`.
    tail: Vec<f64>,
}

impl LatticeConstants {
    pub fn new(max_order: usize) -> Self {
        Self::with_cutoff(max_order, DEFAULT_CUTOFF)
    }

    /// Constants sufficient for a Taylor truncation of order `order`.
    pub fn for_truncation(order: usize) -> Self {
        Self::new(2 * order + 8)
    }

    pub fn with_cutoff(max_order: usize, cutoff: usize) -> Self {
        let max_order = max_order.max(2);
        let cutoff = cutoff.max(2);
        let len = max_order + TAYLOR_TERMS + 1;
        let mut sums = vec![0.0; len];
        let mut tail = vec![0.0; len];

        let s4 = eisenstein_s4();
        sums[2] = PI;
        tail[2] = PI;
        if len > 4 {
            sums[4] = s4;
            tail[4] = s4 - block_sum(4);
        }
        if len > 8 {
            sums[8] = 3.0 * s4 * s4 / 7.0;
            tail[8] = sums[8] - block_sum(8);
        }
        let direct = direct_tail_sums(len - 1, cutoff);
        for (k, value) in direct {
            tail[k] = value;
            sums[k] = value + block_sum(k);
        }

        Self {
            max_order,
            cutoff,
            eta1: PI,
            sums,
            tail,
        }
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Quasi-period increment `ζ(z + 1) - ζ(z)`.
    pub fn eta1(&self) -> f64 {
        self.eta1
    }

    /// Rayleigh sum `S_k`; zero for odd `k` and for `k ≡ 2 (mod 4)`, `k > 2`.
    pub fn sum(&self, k: usize) -> f64 {
        self.sums.get(k).copied().unwrap_or(0.0)
    }

    /// Non-zero sums `(k, S_k)` for `k <= max_order`.
    pub fn sums(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.sums
            .iter()
            .copied()
            .enumerate()
            .take(self.max_order + 1)
            .filter(|(_, s)| *s != 0.0)
    }

    fn check_order(&self, p: usize) -> Result<(), EllipticError> {
        if p == 0 {
            return Err(EllipticError::ZeroOrder);
        }
        if p > self.max_order {
            return Err(EllipticError::OrderTooHigh {
                order: p,
                max_order: self.max_order,
            });
        }
        Ok(())
    }

    /// Eisenstein function `E_p(z)`.
    pub fn eisenstein(&self, p: usize, z: Complex64) -> Result<Complex64, EllipticError> {
        self.check_order(p)?;
        let (z0, m1, m2) = reduce(z);
        if z0.norm() < POLE_TOL {
            return Err(EllipticError::Pole { m1, m2 });
        }
        let mut value = z0.powi(-(p as i32)) + self.regular_part(p, z0);
        if p == 1 {
            // E_1(z + i) = E_1(z) - 2πi
            value -= Complex64::new(0.0, 2.0 * PI * m2 as f64);
        }
        Ok(value)
    }

    /// Modified Eisenstein function `σ_p(z) = E_p(z) - z^-p`, regular at `z = 0`.
    pub fn sigma(&self, p: usize, z: Complex64) -> Result<Complex64, EllipticError> {
        self.check_order(p)?;
        if z == Complex64::new(0.0, 0.0) {
            let value = if p.is_multiple_of(2) { self.sum(p) } else { 0.0 };
            return Ok(Complex64::new(value, 0.0));
        }
        let (z0, m1, m2) = reduce(z);
        if m1 == 0 && m2 == 0 {
            return Ok(self.regular_part(p, z0));
        }
        Ok(self.eisenstein(p, z)? - z.powi(-(p as i32)))
    }

    /// Weierstrass `ζ` of the unit square lattice; `ζ(z + 1) = ζ(z) + π`.
    pub fn weierstrass_zeta(&self, z: Complex64) -> Result<Complex64, EllipticError> {
        Ok(self.eisenstein(1, z)? + self.eta1 * z)
    }

    /// Weierstrass `℘` of the unit square lattice.
    pub fn weierstrass_p(&self, z: Complex64) -> Result<Complex64, EllipticError> {
        Ok(self.eisenstein(2, z)? - self.sums[2])
    }

    /// `E_p(z)` for every `p` in `1..=p_max`; entry 0 of the result is unused.
    pub fn eisenstein_upto(
        &self,
        p_max: usize,
        z: Complex64,
    ) -> Result<Vec<Complex64>, EllipticError> {
        self.check_order(p_max)?;
        let (z0, m1, m2) = reduce(z);
        if z0.norm() < POLE_TOL {
            return Err(EllipticError::Pole { m1, m2 });
        }
        let mut values = self.regular_parts(p_max, z0);
        let inv = z0.inv();
        let mut power = inv;
        for value in values.iter_mut().skip(1) {
            *value += power;
            power *= inv;
        }
        values[1] -= Complex64::new(0.0, 2.0 * PI * m2 as f64);
        Ok(values)
    }

    /// `σ_p(z)` for every `p` in `1..=p_max`; entry 0 of the result is unused.
    pub fn sigma_upto(&self, p_max: usize, z: Complex64) -> Result<Vec<Complex64>, EllipticError> {
        self.check_order(p_max)?;
        let (z0, m1, m2) = reduce(z);
        if m1 == 0 && m2 == 0 {
            return Ok(self.regular_parts(p_max, z0));
        }
        let mut values = self.eisenstein_upto(p_max, z)?;
        let inv = z.inv();
        let mut power = inv;
        for value in values.iter_mut().skip(1) {
            *value -= power;
            power *= inv;
        }
        Ok(values)
    }

    fn regular_parts(&self, p_max: usize, z0: Complex64) -> Vec<Complex64> {
        let mut values = vec![Complex64::new(0.0, 0.0); p_max + 1];
        for w in BLOCK {
            let inv = (z0 - Complex64::new(w.0, w.1)).inv();
            let mut power = inv;
            for value in values.iter_mut().skip(1) {
                *value += power;
                power *= inv;
            }
        }
        let mut zpow = vec![Complex64::new(1.0, 0.0); TAYLOR_TERMS];
        for n in 1..TAYLOR_TERMS {
            zpow[n] = zpow[n - 1] * z0;
        }
        for (p, value) in values.iter_mut().enumerate().skip(1) {
            *value += self.tail_series(p, &zpow);
        }
        values
    }

    fn tail_series(&self, p: usize, zpow: &[Complex64]) -> Complex64 {
        // Σ_n (-1)^p C(p+n-1, n) T_{p+n} z0^n
        let sign = if p.is_multiple_of(2) { 1.0 } else { -1.0 };
        let mut binom = 1.0;
        let mut series = Complex64::new(0.0, 0.0);
        for (n, zp) in zpow.iter().enumerate() {
            let t = self.tail[p + n];
            if t != 0.0 {
                series += zp * (binom * t);
            }
            binom *= (p + n) as f64 / (n + 1) as f64;
        }
        series * sign
    }

    /// `E_p(z0) - z0^-p` for `z0` in the fundamental cell.
    fn regular_part(&self, p: usize, z0: Complex64) -> Complex64 {
        let mut block = Complex64::new(0.0, 0.0);
        for w in BLOCK {
            block += (z0 - Complex64::new(w.0, w.1)).powi(-(p as i32));
        }

        let mut zpow = vec![Complex64::new(1.0, 0.0); TAYLOR_TERMS];
        for n in 1..TAYLOR_TERMS {
            zpow[n] = zpow[n - 1] * z0;
        }
        block + self.tail_series(p, &zpow)
    }
}

/// The eight non-zero lattice points of the 3x3 block around the origin.
const BLOCK: [(f64, f64); 8] = [
    (1.0, 0.0),
    (-1.0, 0.0),
    (0.0, 1.0),
    (0.0, -1.0),
    (1.0, 1.0),
    (1.0, -1.0),
    (-1.0, 1.0),
    (-1.0, -1.0),
];

fn block_sum(k: usize) -> f64 {
    BLOCK
        .iter()
        .map(|w| Complex64::new(w.0, w.1).powi(-(k as i32)).re)
        .sum()
}

/// Splits `z` into `z0 + m1 + i m2` with `z0` in the closed fundamental cell.
pub(crate) fn reduce(z: Complex64) -> (Complex64, i64, i64) {
    let m1 = z.re.round();
    let m2 = z.im.round();
    (z - Complex64::new(m1, m2), m1 as i64, m2 as i64)
}

/// `S_4` from its Eisenstein series in `q = exp(-2π)`.
fn eisenstein_s4() -> f64 {
    let q = (-2.0 * PI).exp();
    let mut series = 0.0;
    let mut qm = 1.0;
    for m in 1..=30 {
        qm *= q;
        let m3 = (m * m * m) as f64;
        series += m3 * qm / (1.0 - qm);
    }
    let pi4 = PI.powi(4);
    pi4 / 45.0 + 16.0 * pi4 / 3.0 * series
}

/// Tail sums `Σ w^-k` over lattice points outside the 3x3 block, for
/// `k ≡ 0 (mod 4)`, `DIRECT_TAIL_FROM <= k <= max_k`.
///
/// Only the quadrant `m1 >= 1, m2 >= 0` is visited: its quarter turns cover
/// the lattice once and leave `w^-k` unchanged.
fn direct_tail_sums(max_k: usize, cutoff: usize) -> Vec<(usize, f64)> {
    let orders: Vec<usize> = (DIRECT_TAIL_FROM..=max_k).step_by(4).collect();
    let mut acc = vec![Complex64::new(0.0, 0.0); orders.len()];
    for m1 in 1..=cutoff {
        for m2 in 0..=cutoff {
            if m1 <= 1 && m2 <= 1 {
                continue;
            }
            let w = Complex64::new(m1 as f64, m2 as f64);
            let inv4 = w.powi(-4);
            let mut power = inv4.powi((DIRECT_TAIL_FROM / 4) as i32);
            for slot in acc.iter_mut() {
                *slot += power;
                power *= inv4;
                if power.norm_sqr() < 1e-300 {
                    break;
                }
            }
        }
    }
    orders
        .into_iter()
        .zip(acc)
        .map(|(k, s)| (k, 4.0 * s.re))
        .collect()
}
