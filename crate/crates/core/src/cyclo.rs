//! Cyclotomic integers Z_p[zeta] for zeta of p-power order, in the power
//! basis mod the p^m-th cyclotomic polynomial.
//!
//! `Phi_{p^m}(x) = sum_{i=0}^{p-1} x^{i p^(m-1)}`, so the basis has
//! `phi(p^m) = (p-1) p^(m-1)` elements and reduction only ever rewrites a
//! power of x as a sum of lower ones with coefficient -1.

use crate::error::{Error, Result};
use crate::linalg::{mulmod, pow_u64, solve_mod_pn, SolveOutcome};
use crate::padic::{PadicInt, Valuation, ZpMatrix};
use num_rational::Ratio;
use std::fmt;

/// phi(p^level); 1 when level = 0.
pub fn phi(p: u64, level: u32) -> u64 {
    if level == 0 {
        1
    } else {
        (p - 1) * pow_u64(p, level - 1)
    }
}

/// A root of unity of p-power order in canonical form: either `level = 0,
/// exp = 0` (the element 1) or `exp` a unit mod `p^level`, so equality is
/// structural.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RootOfUnity {
    p: u64,
    level: u32,
    exp: u64,
}

impl RootOfUnity {
    pub fn one(p: u64) -> RootOfUnity {
        RootOfUnity { p, level: 0, exp: 0 }
    }

    /// `zeta_{p^level}^exp`, canonicalized.
    pub fn new(p: u64, mut level: u32, exp: i128) -> RootOfUnity {
        assert!(crate::padic::is_small_prime(p), "p must be prime");
        let order = pow_u64(p, level) as i128;
        let mut e = exp.rem_euclid(order) as u64;
        while level > 0 && e % p == 0 {
            if e == 0 {
                return RootOfUnity::one(p);
            }
            e /= p;
            level -= 1;
        }
        RootOfUnity { p, level, exp: e }
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    /// Exact order is p^level.
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn exp(&self) -> u64 {
        self.exp
    }

    pub fn order(&self) -> u64 {
        pow_u64(self.p, self.level)
    }

    pub fn is_one(&self) -> bool {
        self.level == 0
    }

    /// Residue degree bookkeeping: the degree of Q_p(zeta) over Q_p.
    pub fn degree_delta(&self) -> u64 {
        phi(self.p, self.level)
    }

    pub fn mul(&self, other: &RootOfUnity) -> RootOfUnity {
        assert_eq!(self.p, other.p, "mixed primes");
        let level = self.level.max(other.level);
        let a = self.exp as i128 * pow_u64(self.p, level - self.level) as i128;
        let b = other.exp as i128 * pow_u64(self.p, level - other.level) as i128;
        RootOfUnity::new(self.p, level, a + b)
    }

    pub fn inv(&self) -> RootOfUnity {
        RootOfUnity::new(self.p, self.level, -(self.exp as i128))
    }

    pub fn pow(&self, k: i64) -> RootOfUnity {
        RootOfUnity::new(self.p, self.level, self.exp as i128 * k as i128)
    }

    /// The full Galois orbit over Q_p: for a root of exact order p^m with
    /// m >= 1 this is every primitive p^m-th root, listed by increasing
    /// exponent; for 1 it is just 1.
    pub fn conjugates(&self) -> Vec<RootOfUnity> {
        if self.level == 0 {
            return vec![*self];
        }
        let order = self.order();
        (1..order)
            .filter(|u| u % self.p != 0)
            .map(|u| RootOfUnity { p: self.p, level: self.level, exp: u })
            .collect()
    }
}

impl fmt::Display for RootOfUnity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.level == 0 {
            write!(f, "1")
        } else {
            write!(f, "zeta({})^{}", self.order(), self.exp)
        }
    }
}

/// An element of Z_p[zeta_{p^level}] mod p^N in the power basis
/// `1, x, ..., x^(phi-1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CycloInt {
    p: u64,
    precision: u32,
    level: u32,
    coeffs: Vec<u64>,
}

impl CycloInt {
    pub fn zero(p: u64, precision: u32, level: u32) -> CycloInt {
        PadicInt::check_context(p, precision).expect("invalid context");
        CycloInt {
            p,
            precision,
            level,
            coeffs: vec![0; phi(p, level) as usize],
        }
    }

    pub fn from_residue(p: u64, precision: u32, level: u32, value: i128) -> CycloInt {
        let mut out = CycloInt::zero(p, precision, level);
        let m = out.modulus() as i128;
        out.coeffs[0] = value.rem_euclid(m) as u64;
        out
    }

    pub fn one(p: u64, precision: u32, level: u32) -> CycloInt {
        CycloInt::from_residue(p, precision, level, 1)
    }

    pub fn from_padic(x: PadicInt, level: u32) -> CycloInt {
        CycloInt::from_residue(x.prime(), x.precision(), level, x.residue() as i128)
    }

    /// Builds an element from raw power-basis coefficients (length <= phi).
    pub fn from_coeffs(p: u64, precision: u32, level: u32, coeffs: &[i128]) -> Result<CycloInt> {
        let mut out = CycloInt::zero(p, precision, level);
        if coeffs.len() > out.coeffs.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} coefficients exceed the basis size {}",
                coeffs.len(),
                out.coeffs.len()
            )));
        }
        let m = out.modulus() as i128;
        for (i, &c) in coeffs.iter().enumerate() {
            out.coeffs[i] = c.rem_euclid(m) as u64;
        }
        Ok(out)
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    fn modulus(&self) -> u64 {
        pow_u64(self.p, self.precision)
    }

    fn same_context(&self, other: &CycloInt) {
        assert!(
            self.p == other.p && self.precision == other.precision && self.level == other.level,
            "cyclotomic context mismatch"
        );
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// True when all non-constant coordinates vanish mod p^N.
    pub fn is_rational(&self) -> bool {
        self.coeffs[1..].iter().all(|&c| c == 0)
    }

    pub fn rational_part(&self) -> Option<PadicInt> {
        if self.is_rational() {
            Some(PadicInt::new(self.p, self.precision, self.coeffs[0] as i128))
        } else {
            None
        }
    }

    pub fn add(&self, other: &CycloInt) -> CycloInt {
        self.same_context(other);
        let m = self.modulus();
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| (a + b) % m)
            .collect();
        CycloInt { coeffs, ..self.clone() }
    }

    pub fn sub(&self, other: &CycloInt) -> CycloInt {
        self.same_context(other);
        let m = self.modulus();
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| (a + m - b) % m)
            .collect();
        CycloInt { coeffs, ..self.clone() }
    }

    pub fn neg(&self) -> CycloInt {
        let m = self.modulus();
        let coeffs = self.coeffs.iter().map(|&a| (m - a) % m).collect();
        CycloInt { coeffs, ..self.clone() }
    }

    pub fn mul(&self, other: &CycloInt) -> CycloInt {
        self.same_context(other);
        let m = self.modulus();
        let n = self.coeffs.len();
        let mut prod = vec![0u64; 2 * n - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                if b == 0 {
                    continue;
                }
                prod[i + j] = (prod[i + j] + mulmod(a, b, m)) % m;
            }
        }
        let coeffs = reduce_mod_cyclotomic(prod, self.p, self.level, m);
        CycloInt { coeffs, ..self.clone() }
    }

    pub fn mul_residue(&self, scalar: u64) -> CycloInt {
        let m = self.modulus();
        let coeffs = self.coeffs.iter().map(|&a| mulmod(a, scalar, m)).collect();
        CycloInt { coeffs, ..self.clone() }
    }

    pub fn pow(&self, mut e: u64) -> CycloInt {
        let mut acc = CycloInt::one(self.p, self.precision, self.level);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Normalized valuation v_p(Norm(a)) / phi(p^m), as an exact fraction
    /// with ord(p) = 1, computed from the Sylvester resultant with the
    /// cyclotomic polynomial.
    pub fn norm_val(&self) -> Result<Ratio<u64>> {
        if self.is_zero() {
            return Err(Error::ZeroInput("norm_val of 0".into()));
        }
        let ph = phi(self.p, self.level);
        if self.level == 0 {
            let v = PadicInt::new(self.p, self.precision, self.coeffs[0] as i128)
                .val()
                .finite()
                .expect("nonzero residue");
            return Ok(Ratio::new(v as u64, 1));
        }
        let dg = self.coeffs.iter().rposition(|&c| c != 0).unwrap();
        let size = ph as usize + dg;
        // Descending-coefficient Sylvester matrix of (Phi, a).
        let mut entries = vec![0i128; size * size];
        let step = pow_u64(self.p, self.level - 1) as usize;
        for r in 0..dg {
            for i in 0..self.p as usize {
                // Coefficient 1 at exponent i*step in Phi; descending slot
                // for exponent k in a row starting at column r is r + (ph - k).
                let col = r + ph as usize - i * step;
                entries[r * size + col] = 1;
            }
        }
        for r in 0..ph as usize {
            for (k, &c) in self.coeffs.iter().enumerate().take(dg + 1) {
                entries[(dg + r) * size + (r + dg - k)] = c as i128;
            }
        }
        let m = ZpMatrix::new(self.p, self.precision, size, size, &entries)?;
        let mut total = 0u64;
        for v in m.smith_valuations() {
            match v {
                Valuation::Finite(x) => total += x as u64,
                Valuation::Saturated => {
                    return Err(Error::PrecisionInconclusive(
                        "resultant vanishes mod p^N".into(),
                    ))
                }
            }
        }
        Ok(Ratio::new(total, ph))
    }

    pub fn is_unit(&self) -> bool {
        matches!(self.norm_val(), Ok(r) if r == Ratio::new(0, 1))
    }

    pub fn inv(&self) -> Result<CycloInt> {
        if !self.is_unit() {
            return Err(Error::NotAUnit("cyclotomic element has positive norm".into()));
        }
        let n = self.coeffs.len();
        let m = self.modulus();
        // Columns of the multiplication-by-self matrix in the power basis.
        let mut a = vec![vec![0u64; n]; n];
        for j in 0..n {
            let mut shifted = vec![0u64; n + j];
            shifted[j..].copy_from_slice(&self.coeffs);
            let col = reduce_mod_cyclotomic(shifted, self.p, self.level, m);
            for i in 0..n {
                a[i][j] = col[i];
            }
        }
        let mut b = vec![0u64; n];
        b[0] = 1;
        match solve_mod_pn(a, b, self.p, m) {
            SolveOutcome::Solution(x) => Ok(CycloInt { coeffs: x, ..self.clone() }),
            SolveOutcome::NoSolution { .. } => {
                Err(Error::NotAUnit("multiplication matrix is singular".into()))
            }
        }
    }
}

impl fmt::Display for CycloInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(r) = self.rational_part() {
            write!(f, "{r}")
        } else {
            write!(f, "[")?;
            for (i, c) in self.coeffs.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{c}")?;
            }
            write!(f, "] at level {}", self.level)
        }
    }
}

/// Embeds a root of unity into Z_p[zeta_{p^level}]; the target level must
/// dominate the root's level.
pub fn zeta_embed(z: &RootOfUnity, level: u32, precision: u32) -> Result<CycloInt> {
    if z.level() > level {
        return Err(Error::LevelMismatch(format!(
            "root of order {} does not embed at level {}",
            z.order(),
            level
        )));
    }
    let p = z.prime();
    let m = pow_u64(p, precision);
    let e = z.exp() * pow_u64(p, level - z.level());
    let mut v = vec![0u64; e as usize + 1];
    v[e as usize] = 1;
    let coeffs = reduce_mod_cyclotomic(v, p, level, m);
    Ok(CycloInt { p, precision, level, coeffs })
}

/// Reduces a raw coefficient vector mod Phi_{p^level}; output has exactly
/// phi(p^level) entries.
fn reduce_mod_cyclotomic(mut v: Vec<u64>, p: u64, level: u32, modulus: u64) -> Vec<u64> {
    let ph = phi(p, level) as usize;
    if level == 0 {
        // Phi_1 = x - 1: every power of x collapses to 1.
        let total = v.iter().fold(0u64, |acc, &c| (acc + c) % modulus);
        return vec![total];
    }
    let step = pow_u64(p, level - 1) as usize;
    for k in (ph..v.len()).rev() {
        let c = v[k];
        if c == 0 {
            continue;
        }
        v[k] = 0;
        for i in 0..(p - 1) as usize {
            let idx = k - ph + i * step;
            v[idx] = (v[idx] + modulus - c) % modulus;
        }
    }
    v.truncate(ph);
    v.resize(ph, 0);
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_canonicalize() {
        let z = RootOfUnity::new(3, 2, 3);
        assert_eq!((z.level(), z.exp()), (1, 1));
        assert!(RootOfUnity::new(3, 2, 9).is_one());
        assert_eq!(RootOfUnity::new(3, 1, 5).exp(), 2);
        assert_eq!(RootOfUnity::new(2, 3, -1).exp(), 7);
    }

    #[test]
    fn root_arithmetic() {
        let z = RootOfUnity::new(3, 2, 2);
        assert!(z.mul(&z.inv()).is_one());
        assert_eq!(z.pow(3), RootOfUnity::new(3, 1, 2));
        let orbit = RootOfUnity::new(3, 2, 1).conjugates();
        assert_eq!(orbit.len(), 6);
        assert_eq!(RootOfUnity::new(3, 2, 1).degree_delta(), 6);
        assert_eq!(RootOfUnity::one(3).degree_delta(), 1);
    }

    #[test]
    fn square_of_zeta3_reduces_to_minus_one_minus_zeta() {
        // x^2 = -1 - x mod Phi_3.
        let z = zeta_embed(&RootOfUnity::new(3, 1, 2), 1, 4).unwrap();
        let m = 81;
        assert_eq!(z.coeffs(), &[m - 1, m - 1]);
    }

    #[test]
    fn embedding_raises_levels_consistently() {
        // zeta_3 seen at level 2 over p = 3 is x^3.
        let z = zeta_embed(&RootOfUnity::new(3, 1, 1), 2, 4).unwrap();
        let mut want = [0u64; 6];
        want[3] = 1;
        assert_eq!(z.coeffs(), &want[..]);
        assert!(zeta_embed(&RootOfUnity::new(3, 2, 1), 1, 4).is_err());
    }

    #[test]
    fn multiplication_matches_exponent_arithmetic() {
        let p = 5u64;
        for a in [1i128, 2, 3, 7] {
            for b in [1i128, 4, 11] {
                let x = zeta_embed(&RootOfUnity::new(p, 2, a), 2, 3).unwrap();
                let y = zeta_embed(&RootOfUnity::new(p, 2, b), 2, 3).unwrap();
                let xy = zeta_embed(&RootOfUnity::new(p, 2, a + b), 2, 3).unwrap();
                assert_eq!(x.mul(&y), xy);
            }
        }
    }

    #[test]
    fn norm_val_of_uniformizer() {
        // zeta_3 - 1 has normalized valuation 1/(p-1) = 1/2.
        let z = zeta_embed(&RootOfUnity::new(3, 1, 1), 1, 5).unwrap();
        let a = z.sub(&CycloInt::one(3, 5, 1));
        assert_eq!(a.norm_val().unwrap(), Ratio::new(1, 2));
        // And its square has valuation 1.
        assert_eq!(a.mul(&a).norm_val().unwrap(), Ratio::new(1, 1));
    }

    #[test]
    fn norm_val_of_rational_scalar() {
        let a = CycloInt::from_residue(3, 5, 1, 3);
        assert_eq!(a.norm_val().unwrap(), Ratio::new(1, 1));
        let b = CycloInt::from_residue(3, 5, 2, 2);
        assert_eq!(b.norm_val().unwrap(), Ratio::new(0, 1));
    }

    #[test]
    fn norm_val_is_additive_when_finite() {
        let z = zeta_embed(&RootOfUnity::new(2, 2, 1), 2, 6).unwrap();
        let one = CycloInt::one(2, 6, 2);
        let a = z.sub(&one); // zeta_4 - 1, norm val 1/2
        let b = z.add(&one); // zeta_4 + 1, norm val 1/2
        let ab = a.mul(&b);
        assert_eq!(
            ab.norm_val().unwrap(),
            a.norm_val().unwrap() + b.norm_val().unwrap()
        );
    }

    #[test]
    fn units_invert() {
        let z = zeta_embed(&RootOfUnity::new(3, 2, 4), 2, 4).unwrap();
        assert!(z.is_unit());
        let zi = z.inv().unwrap();
        assert_eq!(z.mul(&zi), CycloInt::one(3, 4, 2));
        let nonunit = z.sub(&CycloInt::one(3, 4, 2));
        assert!(nonunit.inv().is_err());
    }

    #[test]
    fn galois_orbit_sums_to_minus_one_at_level_one() {
        let p = 5u64;
        let mut acc = CycloInt::zero(p, 3, 1);
        for z in RootOfUnity::new(p, 1, 1).conjugates() {
            acc = acc.add(&zeta_embed(&z, 1, 3).unwrap());
        }
        assert_eq!(acc, CycloInt::from_residue(p, 3, 1, -1));
    }
}
