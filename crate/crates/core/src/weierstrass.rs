//! Weierstrass preparation for one variable: a nonzero series factors as
//! p^mu * u * g with u a unit and g monic of degree lambda whose lower
//! coefficients are divisible by p. Dividing out p^mu costs precision, so
//! the returned factors live at precision N - mu.

use crate::error::{Error, Result};
use crate::padic::Valuation;
use crate::ring::{Exps, IwasawaElement, RingCtx};
use std::collections::BTreeMap;

#[derive(Debug, Clone)]
pub struct WeierstrassDecomposition {
    /// Power of p carried by the whole series.
    pub mu: u32,
    /// Degree of the distinguished polynomial.
    pub lambda: u32,
    /// Unit cofactor, at precision N - mu. For an exact polynomial input
    /// this is itself an exact polynomial of degree deg(a) - lambda (monic
    /// divisor division leaves no tail), so it comes out unflagged; the
    /// flag is still wired through as an invariant guard.
    pub unit: IwasawaElement,
    /// Monic degree-lambda polynomial with all lower coefficients
    /// divisible by p, at precision N - mu. Always an exact polynomial.
    pub distinguished: IwasawaElement,
}

/// Splits off the terms of degree < lambda.
fn split_at(a: &IwasawaElement, lambda: u32) -> (IwasawaElement, IwasawaElement) {
    let ctx = a.ctx();
    let mut low: BTreeMap<Exps, u64> = BTreeMap::new();
    let mut shifted: BTreeMap<Exps, u64> = BTreeMap::new();
    for (e, c) in a.terms() {
        if e.degree() < lambda {
            low.insert(e.clone(), c);
        } else {
            shifted.insert(Exps(vec![e.degree() - lambda]), c);
        }
    }
    (
        IwasawaElement::from_parts(ctx, low, false),
        IwasawaElement::from_parts(ctx, shifted, false),
    )
}

fn shift_up(a: &IwasawaElement, lambda: u32) -> IwasawaElement {
    let ctx = a.ctx();
    let coeffs = a
        .terms()
        .map(|(e, c)| (Exps(vec![e.degree() + lambda]), c))
        .collect();
    IwasawaElement::from_parts(ctx, coeffs, false)
}

/// Factors a nonzero one-variable series. Fails with a degree overflow on
/// inputs that are no longer exact images (the factorization of the lost
/// series is not certifiable), and as inconclusive on series that vanish
/// at this precision (mu is then only bounded below by N).
pub fn weierstrass(a: &IwasawaElement) -> Result<WeierstrassDecomposition> {
    let ctx = a.ctx();
    if ctx.nvars != 1 {
        return Err(Error::ShapeMismatch(format!(
            "preparation needs one variable, ring has {}",
            ctx.nvars
        )));
    }
    if a.truncated() {
        return Err(Error::DegreeOverflow(
            "input lost monomials beyond the degree bound; its factorization \
             cannot be certified"
                .into(),
        ));
    }
    if a.is_zero() {
        return Err(Error::PrecisionInconclusive(format!(
            "series vanishes mod p^{}; p-power part is >= {}",
            ctx.precision, ctx.precision
        )));
    }

    let mu = match a.content() {
        Valuation::Finite(v) => v,
        Valuation::Saturated => unreachable!("nonzero element"),
    };
    let pmu = crate::linalg::pow_u64(ctx.p, mu);
    let rctx = RingCtx::new(ctx.p, ctx.precision - mu, 1, ctx.degree_bound)?;
    let reduced = IwasawaElement::from_parts(
        rctx,
        a.terms()
            .filter_map(|(e, c)| {
                let r = (c / pmu) % rctx.modulus();
                (r != 0).then(|| (e.clone(), r))
            })
            .collect(),
        false,
    );

    let lambda = reduced
        .terms()
        .filter(|(_, c)| c % rctx.p != 0)
        .map(|(e, _)| e.degree())
        .min()
        .expect("content was divided out");

    // Lift (u, g) from the mod-p seed u = shifted upper part, g = t^lambda:
    // each pass divides the defect's p-power part by another factor of p,
    // and the updates keep g monic distinguished and u a unit.
    //
    // The factorization is only unique modulo the annihilator of g at the
    // working bound, and the lifting drifts into it. Annihilator terms at
    // degree k have p-valuation at least (bound - k) / lambda, so running
    // at an internal bound D + N*lambda keeps all of them above degree D,
    // and truncating back yields the exact image of the true unit.
    let head = rctx.precision * lambda.max(1);
    let wide = reduced.rebound(ctx.degree_bound + head);
    let (_, upper) = split_at(&wide, lambda);
    let mut u = upper;
    let mut g = shift_up(&wide.ctx().one(), lambda);
    let mut rounds = 0;
    loop {
        let defect = wide.sub(&u.mul(&g)?)?;
        if defect.is_zero() {
            break;
        }
        rounds += 1;
        assert!(
            rounds <= rctx.precision,
            "each round gains a factor of p, so N rounds suffice"
        );
        let quot = defect.mul(&strip(&u.unit_inverse()?))?;
        let (dg, h) = split_at(&quot, lambda);
        g = strip(&g.add(&dg)?);
        u = strip(&strip(&u).add(&u.mul(&h)?)?);
    }

    let u = u.rebound(ctx.degree_bound);
    let g = g.rebound(ctx.degree_bound);
    debug_assert!(u.is_unit());
    debug_assert!(g.coeff(&[lambda]).residue() == 1);
    debug_assert!(g.degree() == Some(lambda));
    debug_assert!(g
        .terms()
        .all(|(e, c)| e.degree() == lambda || c % rctx.p == 0));

    // Decide the unit's flag by one untruncated check product, as for
    // series inverses.
    let full = strip(&u).mul(&g)?;
    debug_assert_eq!(full, reduced);
    let mut unit = strip(&u);
    if full.truncated() {
        unit.set_truncated();
    }

    Ok(WeierstrassDecomposition { mu, lambda, unit, distinguished: g })
}

fn strip(a: &IwasawaElement) -> IwasawaElement {
    IwasawaElement::from_parts(a.ctx(), a.terms().map(|(e, c)| (e.clone(), c)).collect(), false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u64, n: u32, bound: u32) -> RingCtx {
        RingCtx::new(p, n, 1, bound).unwrap()
    }

    #[test]
    fn monic_quadratic_with_p_linear_term() {
        // t^2 + p t is already distinguished: mu = 0, lambda = 2, unit 1.
        let c = ctx(3, 5, 6);
        let a = c.from_terms(&[(&[2], 1), (&[1], 3)]).unwrap();
        let w = weierstrass(&a).unwrap();
        assert_eq!((w.mu, w.lambda), (0, 2));
        assert_eq!(w.unit, w.unit.ctx().one());
        assert_eq!(w.distinguished.to_string(), "t1^2 + 3*t1");
    }

    #[test]
    fn pure_p_power_times_unit() {
        let c = ctx(3, 5, 4);
        // 9 * (1 + t): mu = 2, lambda = 0, precision drops to 3.
        let a = c.from_terms(&[(&[0], 9), (&[1], 9)]).unwrap();
        let w = weierstrass(&a).unwrap();
        assert_eq!((w.mu, w.lambda), (2, 0));
        assert_eq!(w.unit.ctx().precision, 3);
        assert_eq!(w.distinguished, w.distinguished.ctx().one());
        assert_eq!(w.unit.to_string(), "t1 + 1");
    }

    #[test]
    fn mixed_series_splits_into_unit_and_distinguished() {
        // (2 + t)(t^2 + 3) = t^3 + 2 t^2 + 3 t + 6 at p = 3: lambda = 2
        // after the unit 2 + t is pulled out... the minimal unit
        // coefficient sits at degree 2 (coeff 2); check the identity.
        let c = ctx(3, 6, 8);
        let u0 = c.from_terms(&[(&[0], 2), (&[1], 1)]).unwrap();
        let g0 = c.from_terms(&[(&[2], 1), (&[0], 3)]).unwrap();
        let a = u0.mul(&g0).unwrap();
        let w = weierstrass(&a).unwrap();
        assert_eq!((w.mu, w.lambda), (0, 2));
        assert_eq!(w.unit.mul(&w.distinguished).unwrap(), a);
        assert_eq!(w.distinguished, g0);
        assert_eq!(w.unit, u0);
        assert!(!w.unit.truncated());
    }

    #[test]
    fn irreducible_looking_input_splits_at_finite_precision() {
        // t^2 + t + 3 at p = 3, N = 4: the small root is rational mod 81
        // (it is 15), so the factorization is (t + 16)(t - 15) with an
        // exact polynomial unit — no tail, no flag.
        let c = ctx(3, 4, 3);
        let a = c.from_terms(&[(&[2], 1), (&[1], 1), (&[0], 3)]).unwrap();
        let w = weierstrass(&a).unwrap();
        assert_eq!((w.mu, w.lambda), (0, 1));
        assert_eq!(w.unit.mul(&w.distinguished).unwrap(), a);
        assert_eq!(w.unit.to_string(), "t1 + 16");
        assert_eq!(w.distinguished.to_string(), "t1 + 66");
        assert!(!w.unit.truncated());
    }

    #[test]
    fn zero_and_flagged_inputs_are_rejected() {
        let c = ctx(3, 2, 3);
        assert!(matches!(
            weierstrass(&c.zero()),
            Err(Error::PrecisionInconclusive(_))
        ));
        let g = c.group_elem(&crate::ring::GroupWord(vec![-1])).unwrap();
        assert!(g.truncated());
        assert!(matches!(weierstrass(&g), Err(Error::DegreeOverflow(_))));
    }

    #[test]
    fn random_roundtrip_small() {
        // Deterministic sweep standing in for the randomized acceptance
        // check: plant p^mu * u * g with deg(u) + lambda <= D and recover
        // everything exactly.
        let c = ctx(3, 8, 7);
        for mu in 0..3u32 {
            for lambda in 0..4u32 {
                let uterms: Vec<(Vec<u32>, i128)> =
                    vec![(vec![0], 1 + 3 * lambda as i128), (vec![1], 3), (vec![2], 7)];
                let mut gterms: Vec<(Vec<u32>, i128)> = vec![(vec![lambda], 1)];
                for i in 0..lambda {
                    gterms.push((vec![i], 3 * (i as i128 + 1)));
                }
                let as_refs = |v: &[(Vec<u32>, i128)]| -> Vec<(Vec<u32>, i128)> { v.to_vec() };
                let build = |ring: RingCtx, terms: &[(Vec<u32>, i128)]| {
                    let t: Vec<(&[u32], i128)> =
                        terms.iter().map(|(e, c)| (e.as_slice(), *c)).collect();
                    ring.from_terms(&t).unwrap()
                };
                let u = build(c, &as_refs(&uterms));
                let g = build(c, &as_refs(&gterms));
                let a = u.mul(&g).unwrap().scalar_mul(3i128.pow(mu));
                let w = weierstrass(&a).unwrap();
                assert_eq!((w.mu, w.lambda), (mu, lambda));
                let rctx = RingCtx::new(3, 8 - mu, 1, 7).unwrap();
                assert_eq!(w.distinguished, build(rctx, &gterms));
                assert_eq!(w.unit, build(rctx, &uterms));
                assert!(!w.unit.truncated());
            }
        }
    }
}
