//! Truncated polynomials in t_1..t_d with cyclotomic-integer coefficients:
//! the scratch ring for conjugate products that descend back to Z/p^N
//! coefficients. Same degree cap as the source ring; a dropped nonzero
//! monomial is recorded so callers can refuse to certify the result.

use crate::cyclo::CycloInt;
use crate::error::{Error, Result};
use crate::ring::{Exps, IwasawaElement, RingCtx};
use std::collections::BTreeMap;

pub(crate) struct CycloPoly {
    ctx: RingCtx,
    level: u32,
    coeffs: BTreeMap<Exps, CycloInt>,
    dropped: bool,
}

impl CycloPoly {
    pub(crate) fn from_iwasawa(a: &IwasawaElement, level: u32) -> CycloPoly {
        let ctx = a.ctx();
        let coeffs = a
            .terms()
            .map(|(e, c)| {
                (e.clone(), CycloInt::from_residue(ctx.p, ctx.precision, level, c as i128))
            })
            .collect();
        CycloPoly { ctx, level, coeffs, dropped: false }
    }

    pub(crate) fn dropped(&self) -> bool {
        self.dropped
    }

    /// Multiplies every coefficient by a scalar.
    pub(crate) fn scale(&self, z: &CycloInt) -> CycloPoly {
        let mut coeffs = BTreeMap::new();
        for (e, c) in &self.coeffs {
            let s = c.mul(z);
            if !s.is_zero() {
                coeffs.insert(e.clone(), s);
            }
        }
        CycloPoly { ctx: self.ctx, level: self.level, coeffs, dropped: self.dropped }
    }

    /// Subtracts a scalar from the constant coefficient.
    pub(crate) fn sub_constant(&self, z: &CycloInt) -> CycloPoly {
        let key = Exps(vec![0; self.ctx.nvars]);
        let mut coeffs = self.coeffs.clone();
        let cur = coeffs
            .remove(&key)
            .unwrap_or_else(|| CycloInt::zero(self.ctx.p, self.ctx.precision, self.level));
        let new = cur.sub(z);
        if !new.is_zero() {
            coeffs.insert(key, new);
        }
        CycloPoly { ctx: self.ctx, level: self.level, coeffs, dropped: self.dropped }
    }

    pub(crate) fn mul(&self, other: &CycloPoly) -> CycloPoly {
        assert_eq!(self.level, other.level, "mixed levels");
        let mut acc: BTreeMap<Exps, CycloInt> = BTreeMap::new();
        for (ea, ca) in &self.coeffs {
            for (eb, cb) in &other.coeffs {
                let c = ca.mul(cb);
                if c.is_zero() {
                    continue;
                }
                let e = ea.add(eb);
                match acc.remove(&e) {
                    Some(prev) => {
                        let s = prev.add(&c);
                        if !s.is_zero() {
                            acc.insert(e, s);
                        }
                    }
                    None => {
                        acc.insert(e, c);
                    }
                }
            }
        }
        let mut dropped = self.dropped || other.dropped;
        let mut coeffs = BTreeMap::new();
        for (e, c) in acc {
            if e.degree() > self.ctx.degree_bound {
                dropped = true;
            } else {
                coeffs.insert(e, c);
            }
        }
        CycloPoly { ctx: self.ctx, level: self.level, coeffs, dropped }
    }

    /// Descends to the base ring; every coefficient must be rational.
    pub(crate) fn to_iwasawa(&self) -> Result<IwasawaElement> {
        let mut out = BTreeMap::new();
        for (e, c) in &self.coeffs {
            match c.rational_part() {
                Some(r) => {
                    if !r.is_zero() {
                        out.insert(e.clone(), r.residue());
                    }
                }
                None => {
                    return Err(Error::NotRational(format!(
                        "coefficient of a degree-{} monomial has nonzero \
                         cyclotomic part",
                        e.degree()
                    )))
                }
            }
        }
        Ok(IwasawaElement::from_parts(self.ctx, out, false))
    }
}
