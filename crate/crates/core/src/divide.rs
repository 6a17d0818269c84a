//! Divisibility in the quotient ring.
//!
//! Two routes. When the divisor's minimal term (in the degree-then-lex
//! order) has a unit coefficient, the quotient is forced term by term and
//! the answer is always conclusive. Otherwise a linear system over Z/p^N is
//! solved; a defect that is divisible by p only rules the quotient out at
//! a higher precision than we carry, so it is reported as inconclusive
//! rather than as a verdict.

use crate::error::{Error, Result};
use crate::linalg::{mulmod, SolveOutcome};
use crate::ring::{monomials_upto, Exps, IwasawaElement};
use std::collections::BTreeMap;

impl IwasawaElement {
    /// Returns a quotient q with `self = q * divisor` in the working ring,
    /// `Ok(None)` when divisibility conclusively fails at this precision,
    /// and an inconclusive error when the obstruction vanishes mod p.
    pub fn try_divide(&self, divisor: &IwasawaElement) -> Result<Option<IwasawaElement>> {
        let ctx = self.ctx();
        if divisor.ctx() != ctx {
            return Err(Error::ShapeMismatch(
                "dividend and divisor live in different rings".into(),
            ));
        }
        let flag = self.truncated() || divisor.truncated();
        if self.is_zero() {
            let mut q = ctx.zero();
            if flag {
                q.set_truncated();
            }
            return Ok(Some(q));
        }
        if divisor.is_zero() {
            return Ok(None);
        }

        let (min_exps, min_coeff) = divisor.min_term().expect("nonzero");
        let min_unit = min_coeff % ctx.p != 0;
        let mut q = if min_unit {
            match forced_division(self, divisor, &min_exps.clone(), min_coeff)? {
                Some(q) => q,
                None => return Ok(None),
            }
        } else {
            match linear_division(self, divisor)? {
                Some(q) => q,
                None => return Ok(None),
            }
        };
        debug_assert_eq!(&q.mul(divisor).expect("same ring"), self);
        if flag {
            q.set_truncated();
        }
        Ok(Some(q))
    }

    /// Does `self` divide `other`?
    pub fn divides(&self, other: &IwasawaElement) -> Result<bool> {
        Ok(other.try_divide(self)?.is_some())
    }
}

/// Unit minimal coefficient: each step the minimal surviving term of the
/// remainder pins down one quotient coefficient exactly, so success and
/// failure are both conclusive.
fn forced_division(
    dividend: &IwasawaElement,
    divisor: &IwasawaElement,
    min_exps: &Exps,
    min_coeff: u64,
) -> Result<Option<IwasawaElement>> {
    let ctx = dividend.ctx();
    let m = ctx.modulus();
    let inv0 = crate::linalg::modinv(min_coeff, m);
    let mut rem = IwasawaElement::from_parts(
        ctx,
        dividend.terms().map(|(e, c)| (e.clone(), c)).collect(),
        false,
    );
    let mut qterms: BTreeMap<Exps, u64> = BTreeMap::new();
    while let Some((beta, cb)) = rem.min_term() {
        let gamma = match beta.checked_sub(min_exps) {
            Some(g) => g,
            None => return Ok(None),
        };
        let cq = mulmod(cb, inv0, m);
        let beta = beta.clone();
        let mono = IwasawaElement::from_parts(
            ctx,
            std::iter::once((gamma.clone(), cq)).collect(),
            false,
        );
        qterms.insert(gamma, cq);
        rem = rem.sub(&mono.mul(divisor)?)?;
        debug_assert!(rem.min_term().map(|(e, _)| e > &beta).unwrap_or(true));
    }
    Ok(Some(IwasawaElement::from_parts(ctx, qterms, false)))
}

/// General divisor: solve the full linear system `q * divisor = dividend`
/// over Z/p^N, one column per candidate quotient monomial.
fn linear_division(
    dividend: &IwasawaElement,
    divisor: &IwasawaElement,
) -> Result<Option<IwasawaElement>> {
    let ctx = dividend.ctx();
    let monos = monomials_upto(ctx.nvars, ctx.degree_bound);
    let index: BTreeMap<&Exps, usize> = monos.iter().zip(0..).collect();
    let mut a = vec![vec![0u64; monos.len()]; monos.len()];
    for (gamma, col) in monos.iter().zip(0..) {
        for (alpha, c) in divisor.terms() {
            let delta = gamma.add(alpha);
            if let Some(&row) = index.get(&delta) {
                a[row][col] = c;
            }
        }
    }
    let b: Vec<u64> = monos.iter().map(|e| dividend.coeff_of(e)).collect();
    match crate::linalg::solve_mod_pn(a, b, ctx.p, ctx.modulus()) {
        SolveOutcome::Solution(q) => {
            let coeffs: BTreeMap<Exps, u64> = monos
                .into_iter()
                .zip(q)
                .filter(|(_, c)| *c != 0)
                .collect();
            Ok(Some(IwasawaElement::from_parts(ctx, coeffs, false)))
        }
        SolveOutcome::NoSolution { residual_val } => {
            if residual_val == 0 {
                Ok(None)
            } else {
                Err(Error::PrecisionInconclusive(format!(
                    "division defect is divisible by p^{residual_val}; \
                     the system is solvable mod p^{} but not mod p^{}",
                    ctx.precision - residual_val,
                    ctx.precision
                )))
            }
        }
    }
}

/// Do a and b generate the same ideal? Unit factors preserve the scalar
/// p-power content, so differing contents are a conclusive no; equal
/// contents are stripped and the content-free parts are compared by
/// mutual division with a unit cofactor. For elements that are still
/// exact images of their series, the valuations of their values at all
/// characters of level <= 1 must also agree, and a disagreement there
/// demotes the verdict to inconclusive instead of contradicting exact
/// arithmetic.
pub fn associates(a: &IwasawaElement, b: &IwasawaElement) -> Result<bool> {
    if a.ctx() != b.ctx() {
        return Err(Error::ShapeMismatch(
            "operands live in different rings".into(),
        ));
    }
    if a.is_zero() || b.is_zero() {
        return Ok(a.is_zero() && b.is_zero());
    }
    let (ka, a) = a.strip_content();
    let (kb, b) = b.strip_content();
    if ka != kb {
        return Ok(false);
    }
    let q_ba = match b.try_divide(&a)? {
        Some(q) => q,
        None => return Ok(false),
    };
    let q_ab = match a.try_divide(&b)? {
        Some(q) => q,
        None => return Ok(false),
    };
    if !q_ba.is_unit() || !q_ab.is_unit() {
        return Ok(false);
    }
    if !a.truncated() && !b.truncated() {
        fingerprint_check(&a, &b)?;
    }
    Ok(true)
}

/// Cross-checks `u * a = b` with u a unit against values: at every
/// character the two values must have equal valuation (both measured the
/// same way), whenever both valuations are measurable at this precision.
fn fingerprint_check(a: &IwasawaElement, b: &IwasawaElement) -> Result<()> {
    let ctx = a.ctx();
    for chi in crate::ring::Character::enumerate(ctx.p, ctx.nvars, 1)? {
        let va = a.eval_char(&chi)?;
        let vb = b.eval_char(&chi)?;
        if va.is_zero() != vb.is_zero() {
            return Err(Error::PrecisionInconclusive(format!(
                "division accepts but values at {chi} disagree at precision {}",
                ctx.precision
            )));
        }
        if va.is_zero() {
            continue;
        }
        match (va.norm_val(), vb.norm_val()) {
            (Ok(na), Ok(nb)) if na != nb => {
                return Err(Error::PrecisionInconclusive(format!(
                    "division accepts but value norms at {chi} disagree ({na} vs {nb})"
                )));
            }
            _ => {}
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::RingCtx;

    fn ctx(p: u64, n: u32, d: usize, bound: u32) -> RingCtx {
        RingCtx::new(p, n, d, bound).unwrap()
    }

    #[test]
    fn unit_leading_division_exact() {
        let c = ctx(3, 5, 2, 5);
        let a = c.from_terms(&[(&[1, 0], 1), (&[0, 0], 3)]).unwrap(); // t1 + 3
        let b = c.from_terms(&[(&[0, 1], 1), (&[0, 0], 1)]).unwrap(); // t2 + 1
        let prod = a.mul(&b).unwrap();
        let q = prod.try_divide(&a).unwrap().unwrap();
        assert_eq!(q, b);
        assert!(a.divides(&prod).unwrap());
    }

    #[test]
    fn unit_series_divides_everything() {
        // t1 + 1 is a unit, so it divides t1 + 2; the quotient carries the
        // truncation flag of the inverse tail via the linear path? No: the
        // forced path is exact in the quotient ring and flag-free.
        let c = ctx(2, 4, 1, 3);
        let unit = c.from_terms(&[(&[1], 1), (&[0], 1)]).unwrap();
        let b = c.from_terms(&[(&[1], 1), (&[0], 2)]).unwrap();
        let q = b.try_divide(&unit).unwrap().unwrap();
        assert_eq!(q.mul(&unit).unwrap(), b);
        assert!(!q.truncated());
    }

    #[test]
    fn non_unit_constant_term_blocks_division_conclusively() {
        // Does t1 + 2 divide t1 + 1 at p = 2? Mod 2 the candidate identity
        // reads q * t1 = t1 + 1, impossible: the defect is a unit, so the
        // answer is a conclusive no.
        let c = ctx(2, 4, 1, 3);
        let a = c.from_terms(&[(&[1], 1), (&[0], 2)]).unwrap();
        let b = c.from_terms(&[(&[1], 1), (&[0], 1)]).unwrap();
        assert_eq!(b.try_divide(&a).unwrap(), None);
        assert!(!a.divides(&b).unwrap());
    }

    #[test]
    fn division_by_p_requires_content() {
        let c = ctx(3, 4, 1, 3);
        let p3 = c.constant(3);
        let b = c.from_terms(&[(&[1], 3), (&[0], 6)]).unwrap();
        let q = b.try_divide(&p3).unwrap().unwrap();
        assert_eq!(q, c.from_terms(&[(&[1], 1), (&[0], 2)]).unwrap());
        // 3 does not divide a unit, and the defect is a unit: conclusive.
        let u = c.from_terms(&[(&[1], 1), (&[0], 1)]).unwrap();
        assert_eq!(u.try_divide(&p3).unwrap(), None);
    }

    #[test]
    fn inconclusive_when_defect_vanishes_mod_p() {
        // p^(N-1) * x = p^(N-1): solvable; p^(N-1) * x = p would need
        // val -(N-2) ... take b = 3 and a = 27 at N = 3: 27 = 0 mod 27, so
        // a is zero and b nonzero: conclusive false. Instead a = 9, b = 3
        // at N = 3: 9x = 3 has no solution mod 27 but the defect 3 is
        // divisible by p: inconclusive.
        let c = ctx(3, 3, 1, 2);
        let a = c.constant(9);
        let b = c.constant(3);
        let err = b.try_divide(&a).unwrap_err();
        assert!(matches!(err, Error::PrecisionInconclusive(_)));
    }

    #[test]
    fn zero_cases() {
        let c = ctx(3, 3, 1, 2);
        let z = c.zero();
        let t = c.var(0).unwrap();
        assert!(t.divides(&z).unwrap());
        assert!(!z.divides(&t).unwrap());
        assert!(associates(&z, &z).unwrap());
        assert!(!associates(&z, &t).unwrap());
    }

    #[test]
    fn associates_by_unit_factor() {
        let c = ctx(3, 5, 2, 4);
        let a = c.from_terms(&[(&[1, 0], 1), (&[0, 1], 2), (&[0, 0], 3)]).unwrap();
        let u = c.from_terms(&[(&[1, 0], 1), (&[0, 0], 2)]).unwrap(); // unit
        let b = a.mul(&u).unwrap();
        assert!(associates(&a, &b).unwrap());
        assert!(!associates(&a, &a.mul(&c.var(0).unwrap()).unwrap()).unwrap());
        assert!(!associates(&a, &a.scalar_mul(3)).unwrap());
    }

    #[test]
    fn non_associate_with_equal_image_sizes() {
        // t1 and t1 + 3: not associates (quotient would need (t1+3)/t1).
        let c = ctx(3, 4, 1, 3);
        let a = c.var(0).unwrap();
        let b = c.from_terms(&[(&[1], 1), (&[0], 3)]).unwrap();
        assert!(!associates(&a, &b).unwrap());
    }
}
