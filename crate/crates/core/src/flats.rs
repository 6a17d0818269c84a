//! Characters as points: flats cut out by value conditions, the simple
//! elements whose zero sets they describe, and exhaustive zero counting at
//! each layer of the tower.

use crate::cyclo::{phi, zeta_embed, RootOfUnity};
use crate::cyclopoly::CycloPoly;
use crate::error::{Error, Result};
use crate::linalg::{pow_u64, rank_mod_p};
use crate::padic::PadicInt;
use crate::ring::{Character, GroupWord, IwasawaElement, RingCtx};
use num_rational::Ratio;

/// A coset flat in the character group: all characters taking prescribed
/// root-of-unity values on a set of group words that are independent
/// modulo p.
#[derive(Debug, Clone)]
pub struct ZpFlat {
    p: u64,
    nvars: usize,
    constraints: Vec<(GroupWord, RootOfUnity)>,
}

impl ZpFlat {
    pub fn new(
        p: u64,
        nvars: usize,
        constraints: Vec<(GroupWord, RootOfUnity)>,
    ) -> Result<ZpFlat> {
        PadicInt::check_context(p, 1)?;
        for (w, z) in &constraints {
            if w.len() != nvars {
                return Err(Error::ShapeMismatch(format!(
                    "constraint word {w} has {} entries, expected {nvars}",
                    w.len()
                )));
            }
            if z.prime() != p {
                return Err(Error::ShapeMismatch(
                    "constraint value lives at a different prime".into(),
                ));
            }
        }
        let rows: Vec<Vec<u64>> = constraints
            .iter()
            .map(|(w, _)| w.0.iter().map(|&a| a.rem_euclid(p as i64) as u64).collect())
            .collect();
        if rank_mod_p(rows, p) != constraints.len() {
            return Err(Error::Validation(
                "constraint words are dependent mod p".into(),
            ));
        }
        Ok(ZpFlat { p, nvars, constraints })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn codim(&self) -> usize {
        self.constraints.len()
    }

    pub fn contains(&self, chi: &Character) -> Result<bool> {
        for (w, z) in &self.constraints {
            if &chi.eval_word(w)? != z {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Characters of the flat killing p^n-th powers. Exact closed form:
    /// independence mod p makes the evaluation map onto (Z/p^n)^k, so each
    /// satisfiable fiber has p^(n(d-k)) points, and a constraint of level
    /// above n is unsatisfiable outright.
    pub fn count_at_level(&self, n: u32, budget: u128) -> Result<u64> {
        PadicInt::check_context(self.p, n.max(1))?;
        let k = self.constraints.len() as u32;
        let d = self.nvars as u32;
        let closed = if self.constraints.iter().all(|(_, z)| z.level() <= n) {
            pow_u64(self.p, n * (d - k.min(d)))
        } else {
            0
        };
        let space = (self.p as u128).pow(n * d);
        if space <= budget {
            debug_assert_eq!(self.count_by_enumeration(n)?, closed);
        }
        Ok(closed)
    }

    /// Brute-force count over the full dual group; exponential in n*d.
    pub fn count_by_enumeration(&self, n: u32) -> Result<u64> {
        let mut count = 0;
        for chi in Character::enumerate(self.p, self.nvars, n)? {
            if self.contains(&chi)? {
                count += 1;
            }
        }
        Ok(count)
    }
}

/// The norm-style element attached to a primitive word w and a layer n:
/// the product of (group_elem(w) - zeta) over the primitive p^(n+1)-st
/// roots of unity. Its zeros are exactly the characters sending w to a
/// root of exact order p^(n+1).
pub fn simple_element(ctx: RingCtx, w: &GroupWord, n: u32) -> Result<IwasawaElement> {
    if w.len() != ctx.nvars {
        return Err(Error::ShapeMismatch(format!(
            "word {w} has {} entries, ring has {} variables",
            w.len(),
            ctx.nvars
        )));
    }
    if !w.is_primitive(ctx.p) {
        return Err(Error::NotPrimitive(format!(
            "every exponent of {w} is divisible by {}",
            ctx.p
        )));
    }
    let level = n + 1;
    PadicInt::check_context(ctx.p, level)?;
    let g = ctx.group_elem(w)?;
    if g.truncated() {
        return Err(Error::DegreeOverflow(format!(
            "group element of {w} is not exact at degree bound {}",
            ctx.degree_bound
        )));
    }
    let base = CycloPoly::from_iwasawa(&g, level);
    let mut prod: Option<CycloPoly> = None;
    for z in RootOfUnity::new(ctx.p, level, 1).conjugates() {
        let factor = base.sub_constant(&zeta_embed(&z, level, ctx.precision)?);
        prod = Some(match prod {
            Some(acc) => acc.mul(&factor),
            None => factor,
        });
    }
    let prod = prod.expect("at least one conjugate");
    if prod.dropped() {
        return Err(Error::DegreeOverflow(format!(
            "conjugate product of degree {} exceeds the bound {}",
            phi(ctx.p, level) * g.degree().unwrap_or(0) as u64,
            ctx.degree_bound
        )));
    }
    prod.to_iwasawa()
}

/// Zeros of a simple element among characters killing p^m-th powers:
/// phi(p^(n+1)) choices of the value on w times a full fiber.
pub fn simple_zero_count(p: u64, nvars: usize, w: &GroupWord, n: u32, m: u32) -> Result<u64> {
    if !w.is_primitive(p) {
        return Err(Error::NotPrimitive(format!(
            "every exponent of {w} is divisible by {p}"
        )));
    }
    PadicInt::check_context(p, (n + 1).max(m).max(1))?;
    if m < n + 1 {
        return Ok(0);
    }
    Ok(phi(p, n + 1) * pow_u64(p, m * (nvars as u32 - 1)))
}

/// Common zeros of a family among the characters killing p^n-th powers.
#[derive(Debug, Clone)]
pub struct ZeroSetReport {
    pub level: u32,
    /// Size of the dual group that was scanned.
    pub examined: u64,
    pub zeros: u64,
    /// The first few common zeros, for display.
    pub witnesses: Vec<Character>,
}

const WITNESS_CAP: usize = 32;

/// Counts common zeros by full enumeration. Conclusive claims only: an
/// element that lost monomials can still be used while its stored value is
/// provably dominant, but a vanishing or tail-sized value under a lost
/// tail aborts with an inconclusive error instead of guessing.
pub fn zero_count(elements: &[IwasawaElement], n: u32, budget: u128) -> Result<ZeroSetReport> {
    let ctx = match elements.first() {
        Some(e) => e.ctx(),
        None => return Err(Error::Validation("empty family".into())),
    };
    if elements.iter().any(|e| e.ctx() != ctx) {
        return Err(Error::ShapeMismatch("family mixes rings".into()));
    }
    PadicInt::check_context(ctx.p, n.max(1))?;
    let needed = (ctx.p as u128).pow(n * ctx.nvars as u32);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }

    let mut zeros = 0u64;
    let mut witnesses = Vec::new();
    for chi in Character::enumerate(ctx.p, ctx.nvars, n)? {
        let mut all_zero = true;
        for el in elements {
            let v = el.eval_char(&chi)?;
            let is_zero = if !el.truncated() {
                v.is_zero()
            } else {
                decide_flagged_zero(el, &chi, &v)?
            };
            if !is_zero {
                all_zero = false;
                break;
            }
        }
        if all_zero {
            zeros += 1;
            if witnesses.len() < WITNESS_CAP {
                witnesses.push(chi);
            }
        }
    }
    Ok(ZeroSetReport { level: n, examined: needed as u64, zeros, witnesses })
}

/// For an element that lost monomials beyond degree D, the lost tail
/// evaluates with valuation at least (D+1)/phi(p^level). The stored value
/// decides the question only when it beats that bound (conclusively
/// nonzero) or when the bound already exceeds the precision (tail
/// invisible, value exact).
fn decide_flagged_zero(
    el: &IwasawaElement,
    chi: &Character,
    value: &crate::cyclo::CycloInt,
) -> Result<bool> {
    let ctx = el.ctx();
    let tail_bound = Ratio::new(
        (ctx.degree_bound + 1) as u64,
        phi(ctx.p, chi.level()),
    );
    if tail_bound >= Ratio::from_integer(ctx.precision as u64) {
        return Ok(value.is_zero());
    }
    if value.is_zero() {
        return Err(Error::PrecisionInconclusive(format!(
            "element lost monomials beyond degree {} and its stored part \
             vanishes at {chi}; the tail may not",
            ctx.degree_bound
        )));
    }
    match value.norm_val() {
        Ok(v) if v < tail_bound => Ok(false),
        _ => Err(Error::PrecisionInconclusive(format!(
            "element lost monomials beyond degree {} and its stored value \
             at {chi} is tail-sized",
            ctx.degree_bound
        ))),
    }
}
