//! Scalars mod p^N, their valuations, and Smith normal form over Z/p^N.

use crate::error::{Error, Result};
use crate::linalg::{modinv, mulmod, pow_u64, powmod, val_of};
use serde::Serialize;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Valuation of a residue known mod p^N. A zero residue only certifies
/// "valuation >= N", recorded as `Saturated`; it is absorbing under
/// addition and ordered above every finite valuation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Valuation {
    Finite(u32),
    Saturated,
}

impl Valuation {
    pub fn is_finite(self) -> bool {
        matches!(self, Valuation::Finite(_))
    }

    pub fn finite(self) -> Option<u32> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Saturated => None,
        }
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        use Valuation::*;
        match (self, other) {
            (Finite(a), Finite(b)) => a.cmp(b),
            (Finite(_), Saturated) => Ordering::Less,
            (Saturated, Finite(_)) => Ordering::Greater,
            (Saturated, Saturated) => Ordering::Equal,
        }
    }
}

impl Add for Valuation {
    type Output = Valuation;
    fn add(self, rhs: Valuation) -> Valuation {
        match (self, rhs) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Saturated,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Saturated => write!(f, "sat"),
        }
    }
}

pub(crate) fn is_small_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// An element of Z/p^N. Arithmetic requires equal (prime, precision);
/// mixing precisions must go through `reduce_precision` explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PadicInt {
    p: u64,
    precision: u32,
    residue: u64,
}

impl PadicInt {
    /// Checks that (p, N) describe a workable context: p a (small) prime,
    /// N >= 1 and p^N < 2^63 so products fit in u128 arithmetic.
    pub fn check_context(p: u64, precision: u32) -> Result<()> {
        if !is_small_prime(p) {
            return Err(Error::Range(format!("p = {p} is not prime")));
        }
        if precision == 0 {
            return Err(Error::Range("precision must be >= 1".into()));
        }
        match p.checked_pow(precision) {
            Some(m) if m < (1 << 63) => Ok(()),
            _ => Err(Error::Range(format!(
                "p^N = {p}^{precision} does not fit the scalar type"
            ))),
        }
    }

    pub fn new(p: u64, precision: u32, value: i128) -> PadicInt {
        Self::check_context(p, precision).expect("invalid p-adic context");
        let m = pow_u64(p, precision) as i128;
        PadicInt {
            p,
            precision,
            residue: value.rem_euclid(m) as u64,
        }
    }

    pub fn zero(p: u64, precision: u32) -> PadicInt {
        PadicInt::new(p, precision, 0)
    }

    pub fn one(p: u64, precision: u32) -> PadicInt {
        PadicInt::new(p, precision, 1)
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn residue(&self) -> u64 {
        self.residue
    }

    pub fn modulus(&self) -> u64 {
        pow_u64(self.p, self.precision)
    }

    pub fn is_zero(&self) -> bool {
        self.residue == 0
    }

    pub fn is_unit(&self) -> bool {
        self.residue % self.p != 0
    }

    /// Valuation of the residue; `Saturated` when it vanishes mod p^N.
    pub fn val(&self) -> Valuation {
        match val_of(self.residue, self.p) {
            Some(v) => Valuation::Finite(v),
            None => Valuation::Saturated,
        }
    }

    pub fn inv(&self) -> Result<PadicInt> {
        if !self.is_unit() {
            return Err(Error::NotAUnit(format!(
                "{} has positive valuation at p = {}",
                self.residue, self.p
            )));
        }
        Ok(PadicInt {
            residue: modinv(self.residue, self.modulus()),
            ..*self
        })
    }

    pub fn pow(&self, e: u64) -> PadicInt {
        PadicInt {
            residue: powmod(self.residue, e, self.modulus()),
            ..*self
        }
    }

    /// Explicit coercion down to a smaller precision.
    pub fn reduce_precision(&self, precision: u32) -> PadicInt {
        assert!(precision <= self.precision, "cannot raise precision");
        PadicInt::new(self.p, precision, self.residue as i128)
    }

    /// Coerces a pair to their minimum precision, the only sanctioned way
    /// to mix precisions.
    pub fn align(a: PadicInt, b: PadicInt) -> (PadicInt, PadicInt) {
        assert_eq!(a.p, b.p, "mixed primes");
        let n = a.precision.min(b.precision);
        (a.reduce_precision(n), b.reduce_precision(n))
    }

    fn same_context(&self, other: &PadicInt) {
        assert!(
            self.p == other.p && self.precision == other.precision,
            "p-adic context mismatch: ({}, {}) vs ({}, {})",
            self.p,
            self.precision,
            other.p,
            other.precision
        );
    }
}

impl Add for PadicInt {
    type Output = PadicInt;
    fn add(self, rhs: PadicInt) -> PadicInt {
        self.same_context(&rhs);
        let m = self.modulus();
        PadicInt {
            residue: (self.residue + rhs.residue) % m,
            ..self
        }
    }
}

impl Sub for PadicInt {
    type Output = PadicInt;
    fn sub(self, rhs: PadicInt) -> PadicInt {
        self.same_context(&rhs);
        let m = self.modulus();
        PadicInt {
            residue: (self.residue + m - rhs.residue) % m,
            ..self
        }
    }
}

impl Mul for PadicInt {
    type Output = PadicInt;
    fn mul(self, rhs: PadicInt) -> PadicInt {
        self.same_context(&rhs);
        PadicInt {
            residue: mulmod(self.residue, rhs.residue, self.modulus()),
            ..self
        }
    }
}

impl Neg for PadicInt {
    type Output = PadicInt;
    fn neg(self) -> PadicInt {
        let m = self.modulus();
        PadicInt {
            residue: (m - self.residue) % m,
            ..self
        }
    }
}

impl fmt::Display for PadicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.residue)
    }
}

/// A matrix over Z/p^N with a shared context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZpMatrix {
    p: u64,
    precision: u32,
    rows: usize,
    cols: usize,
    entries: Vec<u64>,
}

impl ZpMatrix {
    pub fn new(p: u64, precision: u32, rows: usize, cols: usize, values: &[i128]) -> Result<ZpMatrix> {
        PadicInt::check_context(p, precision)?;
        if values.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                values.len()
            )));
        }
        let m = pow_u64(p, precision) as i128;
        Ok(ZpMatrix {
            p,
            precision,
            rows,
            cols,
            entries: values.iter().map(|&v| v.rem_euclid(m) as u64).collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn get(&self, i: usize, j: usize) -> PadicInt {
        PadicInt::new(self.p, self.precision, self.entries[i * self.cols + j] as i128)
    }

    /// Valuations of the elementary divisors over Z_p, in nondecreasing
    /// order, length min(rows, cols). Pivots are chosen by minimal
    /// valuation, ties broken by smallest (row, col), and every elimination
    /// step divides only by units, so the result is exact at precision N.
    /// Divisors indistinguishable from 0 mod p^N come out `Saturated`.
    // Elimination reads the pivot row/column while rewriting another, so the
    // loops stay indexed.
    #[allow(clippy::needless_range_loop)]
    pub fn smith_valuations(&self) -> Vec<Valuation> {
        let modulus = pow_u64(self.p, self.precision);
        let (r, c) = (self.rows, self.cols);
        let size = r.min(c);
        let mut m: Vec<Vec<u64>> = (0..r)
            .map(|i| self.entries[i * c..(i + 1) * c].to_vec())
            .collect();
        let mut vals = Vec::with_capacity(size);

        for s in 0..size {
            let mut best: Option<(u32, usize, usize)> = None;
            for i in s..r {
                for j in s..c {
                    if let Some(v) = val_of(m[i][j], self.p) {
                        if best.map_or(true, |(bv, _, _)| v < bv) {
                            best = Some((v, i, j));
                        }
                    }
                }
            }
            let Some((v, pi, pj)) = best else {
                // The remaining block vanishes mod p^N.
                for _ in s..size {
                    vals.push(Valuation::Saturated);
                }
                break;
            };
            m.swap(s, pi);
            for row in m.iter_mut() {
                row.swap(s, pj);
            }

            let pv = pow_u64(self.p, v);
            let piv_inv = modinv(m[s][s] / pv, modulus);
            for i in s + 1..r {
                if m[i][s] == 0 {
                    continue;
                }
                let mult = mulmod(m[i][s] / pv, piv_inv, modulus);
                for j in s..c {
                    let t = mulmod(mult, m[s][j], modulus);
                    m[i][j] = (m[i][j] + modulus - t) % modulus;
                }
            }
            for j in s + 1..c {
                if m[s][j] == 0 {
                    continue;
                }
                let mult = mulmod(m[s][j] / pv, piv_inv, modulus);
                for i in s..r {
                    let t = mulmod(mult, m[i][s], modulus);
                    m[i][j] = (m[i][j] + modulus - t) % modulus;
                }
            }
            vals.push(Valuation::Finite(v));
        }

        vals.sort();
        vals
    }

    /// Determinant valuation for square matrices, as the sum of the Smith
    /// valuations (saturating).
    pub fn det_valuation(&self) -> Valuation {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        self.smith_valuations()
            .into_iter()
            .fold(Valuation::Finite(0), |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valuation_of_18_at_3() {
        let x = PadicInt::new(3, 5, 18);
        assert_eq!(x.val(), Valuation::Finite(2));
    }

    #[test]
    fn valuation_saturates_at_zero_residue() {
        let x = PadicInt::new(3, 5, 0);
        assert_eq!(x.val(), Valuation::Saturated);
        let y = PadicInt::new(3, 5, 243); // 3^5 wraps to 0
        assert_eq!(y.val(), Valuation::Saturated);
        assert_eq!(x.val() + Valuation::Finite(1), Valuation::Saturated);
    }

    #[test]
    fn inverse_of_2_mod_125() {
        let x = PadicInt::new(5, 3, 2);
        assert_eq!(x.inv().unwrap().residue(), 63);
        assert!(PadicInt::new(5, 3, 10).inv().is_err());
    }

    #[test]
    fn inverse_round_trips() {
        for r in 1..81 {
            let x = PadicInt::new(3, 4, r);
            if x.is_unit() {
                assert_eq!((x * x.inv().unwrap()).residue(), 1);
            }
        }
    }

    #[test]
    fn mixed_precision_requires_explicit_alignment() {
        let a = PadicInt::new(3, 5, 10);
        let b = PadicInt::new(3, 3, 10);
        let (a2, b2) = PadicInt::align(a, b);
        assert_eq!(a2.precision(), 3);
        assert_eq!((a2 + b2).residue(), 20);
    }

    #[test]
    fn smith_of_singularish_2x2() {
        // [[p, p], [p, 2p]] at p = 3 has elementary divisors p, p.
        let m = ZpMatrix::new(3, 6, 2, 2, &[3, 3, 3, 6]).unwrap();
        assert_eq!(
            m.smith_valuations(),
            vec![Valuation::Finite(1), Valuation::Finite(1)]
        );
    }

    #[test]
    fn smith_of_identity_and_zero() {
        let id = ZpMatrix::new(3, 4, 2, 2, &[1, 0, 0, 1]).unwrap();
        assert_eq!(
            id.smith_valuations(),
            vec![Valuation::Finite(0), Valuation::Finite(0)]
        );
        let z = ZpMatrix::new(3, 4, 2, 3, &[0; 6]).unwrap();
        assert_eq!(
            z.smith_valuations(),
            vec![Valuation::Saturated, Valuation::Saturated]
        );
    }

    #[test]
    fn smith_handles_rectangular_shapes() {
        // 2x1 column (1, p): one divisor of valuation 0.
        let m = ZpMatrix::new(2, 6, 2, 1, &[1, 2]).unwrap();
        assert_eq!(m.smith_valuations(), vec![Valuation::Finite(0)]);
    }

    #[test]
    fn det_valuation_matches_cofactor_det() {
        let m = ZpMatrix::new(3, 6, 2, 2, &[3, 3, 3, 6]).unwrap();
        // det = 3*6 - 3*3 = 9.
        assert_eq!(m.det_valuation(), Valuation::Finite(2));
    }
}
