//! Finitely generated torsion modules over the working ring: elementary
//! direct sums of cyclic blocks, square presentations, the characteristic
//! ideal in both shapes, descent along the last variable, a pseudo-nullity
//! check, and reconstruction of an elementary shape from factorization
//! data.

use crate::divide::associates;
use crate::error::{Error, Result};
use crate::padic::{Valuation, ZpMatrix};
use crate::ring::{IwasawaElement, RingCtx};
use crate::weierstrass::weierstrass;
use std::fmt;

/// Outcome of a verification routine: the checked identity holds, fails,
/// or cannot be decided at the working precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass => write!(f, "pass"),
            Verdict::Fail => write!(f, "fail"),
            Verdict::Inconclusive => write!(f, "inconclusive"),
        }
    }
}

/// A principal ideal of the working ring, or the zero ideal.  Generators
/// are meaningful only up to unit factors, so equality goes through
/// [`CharIdeal::same_ideal`] rather than a derived `PartialEq`.
#[derive(Debug, Clone)]
pub enum CharIdeal {
    Generator(IwasawaElement),
    Zero,
}

impl CharIdeal {
    /// Wrap an element, folding the zero element into the zero ideal.
    pub fn from_element(a: IwasawaElement) -> CharIdeal {
        if a.is_zero() {
            CharIdeal::Zero
        } else {
            CharIdeal::Generator(a)
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, CharIdeal::Zero)
    }

    pub fn generator(&self) -> Option<&IwasawaElement> {
        match self {
            CharIdeal::Generator(g) => Some(g),
            CharIdeal::Zero => None,
        }
    }

    /// Ideal product; the zero ideal absorbs.
    pub fn mul(&self, other: &CharIdeal) -> Result<CharIdeal> {
        match (self, other) {
            (CharIdeal::Generator(a), CharIdeal::Generator(b)) => {
                let prod = a.mul(b)?;
                if prod.truncated() {
                    return Err(Error::DegreeOverflow(
                        "ideal product lost terms past the degree bound".into(),
                    ));
                }
                Ok(CharIdeal::from_element(prod))
            }
            _ => Ok(CharIdeal::Zero),
        }
    }

    /// Whether two ideals agree: zero matches only zero, and nonzero
    /// generators are compared up to unit factors.
    pub fn same_ideal(a: &CharIdeal, b: &CharIdeal) -> Result<bool> {
        match (a, b) {
            (CharIdeal::Zero, CharIdeal::Zero) => Ok(true),
            (CharIdeal::Generator(x), CharIdeal::Generator(y)) => associates(x, y),
            _ => Ok(false),
        }
    }
}

impl fmt::Display for CharIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CharIdeal::Generator(g) => write!(f, "({g})"),
            CharIdeal::Zero => write!(f, "(0)"),
        }
    }
}

/// One block of an elementary module: `copies` copies of the cyclic
/// quotient by the `power`-th power of `xi`.
#[derive(Debug, Clone)]
pub struct CyclicSummand {
    pub xi: IwasawaElement,
    pub power: u32,
    pub copies: u32,
}

impl CyclicSummand {
    pub fn new(xi: IwasawaElement, power: u32, copies: u32) -> CyclicSummand {
        CyclicSummand { xi, power, copies }
    }
}

/// Finite direct sum of cyclic torsion blocks over a common ring.  The
/// empty sum is the zero module.
#[derive(Debug, Clone)]
pub struct ElementaryModule {
    ctx: RingCtx,
    summands: Vec<CyclicSummand>,
}

impl ElementaryModule {
    /// Build a module, rejecting annihilators that are zero or units and
    /// blocks with vanishing power or copy count.
    pub fn new(ctx: RingCtx, summands: Vec<CyclicSummand>) -> Result<ElementaryModule> {
        for s in &summands {
            if s.xi.ctx() != ctx {
                return Err(Error::ShapeMismatch(
                    "summand annihilator lives in a different ring".into(),
                ));
            }
            if s.xi.is_zero() {
                return Err(Error::Validation(
                    "summand annihilator must be nonzero".into(),
                ));
            }
            if s.xi.is_unit() {
                return Err(Error::Validation(
                    "summand annihilator must not be a unit".into(),
                ));
            }
            if s.power == 0 || s.copies == 0 {
                return Err(Error::Validation(
                    "summand power and copy count must be positive".into(),
                ));
            }
        }
        Ok(ElementaryModule { ctx, summands })
    }

    pub fn ctx(&self) -> RingCtx {
        self.ctx
    }

    pub fn summands(&self) -> &[CyclicSummand] {
        &self.summands
    }

    pub fn is_zero_module(&self) -> bool {
        self.summands.is_empty()
    }
}

/// Characteristic ideal generator of an elementary module: the product of
/// the block annihilators with their powers and copy counts.  Errors with
/// `DegreeOverflow` when the product does not fit under the degree bound.
pub fn char_ideal_elementary(m: &ElementaryModule) -> Result<IwasawaElement> {
    let mut acc = m.ctx.one();
    for s in &m.summands {
        acc = acc.mul(&s.xi.pow(u64::from(s.power) * u64::from(s.copies))?)?;
    }
    if acc.truncated() {
        return Err(Error::DegreeOverflow(
            "characteristic ideal generator lost terms past the degree bound".into(),
        ));
    }
    Ok(acc)
}

/// Module presented as the cokernel of a square relation grid: rows index
/// relations, columns index generators.
#[derive(Debug, Clone)]
pub struct PresentedModule {
    ctx: RingCtx,
    size: usize,
    entries: Vec<IwasawaElement>,
}

impl PresentedModule {
    pub fn new(ctx: RingCtx, rows: Vec<Vec<IwasawaElement>>) -> Result<PresentedModule> {
        let size = rows.len();
        if size == 0 {
            return Err(Error::Validation("presentation grid must be nonempty".into()));
        }
        let mut entries = Vec::with_capacity(size * size);
        for row in rows {
            if row.len() != size {
                return Err(Error::ShapeMismatch(
                    "presentation grid must be square".into(),
                ));
            }
            for e in row {
                if e.ctx() != ctx {
                    return Err(Error::ShapeMismatch(
                        "presentation entry lives in a different ring".into(),
                    ));
                }
                entries.push(e);
            }
        }
        Ok(PresentedModule { ctx, size, entries })
    }

    pub fn ctx(&self) -> RingCtx {
        self.ctx
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn entry(&self, i: usize, j: usize) -> &IwasawaElement {
        &self.entries[i * self.size + j]
    }
}

// Exact cofactor expansion along the first row.  The grids that show up
// here are small, so the factorial cost never bites.
fn grid_determinant(ctx: RingCtx, entries: &[IwasawaElement], n: usize) -> Result<IwasawaElement> {
    if n == 1 {
        return Ok(entries[0].clone());
    }
    let mut det = ctx.zero();
    for j in 0..n {
        let pivot = &entries[j];
        if pivot.is_zero() && !pivot.truncated() {
            continue;
        }
        let mut minor = Vec::with_capacity((n - 1) * (n - 1));
        for i in 1..n {
            for k in 0..n {
                if k != j {
                    minor.push(entries[i * n + k].clone());
                }
            }
        }
        let cof = pivot.mul(&grid_determinant(ctx, &minor, n - 1)?)?;
        det = if j % 2 == 0 { det.add(&cof)? } else { det.sub(&cof)? };
    }
    Ok(det)
}

/// Characteristic ideal of a presented module, computed as the grid
/// determinant.  A vanishing determinant yields the zero ideal when the
/// computation was exact and `PrecisionInconclusive` when truncation
/// interfered; a nonzero determinant that lost terms is refused with
/// `DegreeOverflow` rather than silently handed back incomplete.
pub fn char_ideal_presented(m: &PresentedModule) -> Result<CharIdeal> {
    let det = grid_determinant(m.ctx, &m.entries, m.size)?;
    if det.is_zero() {
        if det.truncated() {
            return Err(Error::PrecisionInconclusive(
                "grid determinant vanishes at this precision but terms were lost on the way"
                    .into(),
            ));
        }
        return Ok(CharIdeal::Zero);
    }
    if det.truncated() {
        return Err(Error::DegreeOverflow(
            "grid determinant lost terms past the degree bound".into(),
        ));
    }
    Ok(CharIdeal::Generator(det))
}

/// Descend an elementary module along the last variable: returns the
/// characteristic ideals of the invariant and coinvariant pieces over the
/// ring with one variable fewer, in that order.
///
/// A block whose annihilator specializes to something nonzero contributes
/// trivially to the invariants and its specialized annihilator (with power
/// and copies) to the coinvariants; a block that specializes to zero makes
/// both sides the zero ideal.  A zero specialization that may be an
/// artifact of truncation is refused with `PrecisionInconclusive`.
pub fn descend(m: &ElementaryModule) -> Result<(CharIdeal, CharIdeal)> {
    if m.ctx.nvars == 0 {
        return Err(Error::ShapeMismatch(
            "descent needs at least one variable".into(),
        ));
    }
    let down = RingCtx { nvars: m.ctx.nvars - 1, ..m.ctx };
    let mut invariants = CharIdeal::Generator(down.one());
    let mut coinvariants = CharIdeal::Generator(down.one());
    for s in &m.summands {
        let bar = s.xi.specialize_canonical()?;
        if bar.is_zero() {
            if s.xi.truncated() || bar.truncated() {
                return Err(Error::PrecisionInconclusive(
                    "specialized annihilator vanishes but its series was truncated".into(),
                ));
            }
            invariants = CharIdeal::Zero;
            coinvariants = CharIdeal::Zero;
            break;
        }
        let factor = bar.pow(u64::from(s.power) * u64::from(s.copies))?;
        if factor.truncated() {
            return Err(Error::DegreeOverflow(
                "specialized annihilator power lost terms past the degree bound".into(),
            ));
        }
        coinvariants = coinvariants.mul(&CharIdeal::Generator(factor))?;
    }
    Ok((invariants, coinvariants))
}

/// Check the descent bookkeeping identity on an elementary module: the
/// coinvariant characteristic ideal must match the specialized module
/// characteristic ideal times the invariant one, with zero ideals matching
/// only each other.
pub fn verify_descent_identity(m: &ElementaryModule) -> Result<Verdict> {
    let (invariants, coinvariants) = match descend(m) {
        Ok(pair) => pair,
        Err(Error::PrecisionInconclusive(_)) | Err(Error::DegreeOverflow(_)) => {
            return Ok(Verdict::Inconclusive)
        }
        Err(e) => return Err(e),
    };
    let gen = match char_ideal_elementary(m) {
        Ok(g) => g,
        Err(Error::DegreeOverflow(_)) => return Ok(Verdict::Inconclusive),
        Err(e) => return Err(e),
    };
    let specialized = CharIdeal::from_element(gen.specialize_canonical()?);
    let rhs = specialized.mul(&invariants)?;
    match CharIdeal::same_ideal(&coinvariants, &rhs) {
        Ok(true) => Ok(Verdict::Pass),
        Ok(false) => Ok(Verdict::Fail),
        Err(Error::PrecisionInconclusive(_)) => Ok(Verdict::Inconclusive),
        Err(e) => Err(e),
    }
}

/// Certificate that a module is annihilated by several elements at once.
#[derive(Debug, Clone)]
pub struct PseudoNullWitness {
    ctx: RingCtx,
    annihilators: Vec<IwasawaElement>,
}

impl PseudoNullWitness {
    /// At least two annihilators, each a nonzero nonunit of the stated ring.
    pub fn new(ctx: RingCtx, annihilators: Vec<IwasawaElement>) -> Result<PseudoNullWitness> {
        if annihilators.len() < 2 {
            return Err(Error::Validation(
                "a pseudo-nullity witness needs at least two annihilators".into(),
            ));
        }
        for a in &annihilators {
            if a.ctx() != ctx {
                return Err(Error::ShapeMismatch(
                    "annihilator lives in a different ring".into(),
                ));
            }
            if a.is_zero() {
                return Err(Error::Validation("annihilator must be nonzero".into()));
            }
            if a.is_unit() {
                return Err(Error::Validation(
                    "a unit annihilator makes the module trivial".into(),
                ));
            }
        }
        Ok(PseudoNullWitness { ctx, annihilators })
    }

    pub fn ctx(&self) -> RingCtx {
        self.ctx
    }

    pub fn annihilators(&self) -> &[IwasawaElement] {
        &self.annihilators
    }
}

/// Result of a pseudo-nullity check: the verdict, plus the offending
/// common divisor when one was found.
#[derive(Debug, Clone)]
pub struct PseudoNullOutcome {
    pub verdict: Verdict,
    pub common_factor: Option<IwasawaElement>,
}

/// Decide whether the witness certifies pseudo-nullity: fail when all
/// annihilators share the prime, or when a supplied candidate divisor
/// divides every annihilator; pass when neither happens.  Without a
/// candidate list the one-variable ring is decided exactly through
/// resultants of distinguished parts, and more variables are refused with
/// `IncompleteFactorBasis`.
pub fn check_pseudonull(
    w: &PseudoNullWitness,
    candidates: Option<&[IwasawaElement]>,
) -> Result<PseudoNullOutcome> {
    if w.annihilators.iter().all(|a| a.content() >= Valuation::Finite(1)) {
        return Ok(PseudoNullOutcome {
            verdict: Verdict::Fail,
            common_factor: Some(w.ctx.constant(i128::from(w.ctx.p))),
        });
    }
    match candidates {
        Some(cands) => check_pseudonull_with_candidates(w, cands),
        None => match w.ctx.nvars {
            0 => Ok(PseudoNullOutcome { verdict: Verdict::Pass, common_factor: None }),
            1 => check_pseudonull_univariate(w),
            _ => Err(Error::IncompleteFactorBasis),
        },
    }
}

fn check_pseudonull_with_candidates(
    w: &PseudoNullWitness,
    candidates: &[IwasawaElement],
) -> Result<PseudoNullOutcome> {
    let mut undecided = false;
    for f in candidates {
        if f.is_zero() || f.is_unit() {
            return Err(Error::Validation(
                "candidate divisor must be a nonzero nonunit".into(),
            ));
        }
        let mut divides_all = true;
        for a in &w.annihilators {
            match f.divides(a) {
                Ok(true) => {}
                Ok(false) => {
                    divides_all = false;
                    break;
                }
                Err(Error::PrecisionInconclusive(_)) => {
                    undecided = true;
                    divides_all = false;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if divides_all {
            return Ok(PseudoNullOutcome {
                verdict: Verdict::Fail,
                common_factor: Some(f.clone()),
            });
        }
    }
    if undecided {
        return Ok(PseudoNullOutcome { verdict: Verdict::Inconclusive, common_factor: None });
    }
    Ok(PseudoNullOutcome { verdict: Verdict::Pass, common_factor: None })
}

// One variable: a common prime divisor of all annihilators would show up
// in any single pair, so one provably coprime pair certifies the pass.
// With the shared-prime case already dispatched, coprimality of a pair is
// read off the resultant of their distinguished parts.
fn check_pseudonull_univariate(w: &PseudoNullWitness) -> Result<PseudoNullOutcome> {
    let n = w.annihilators.len();
    for i in 0..n {
        for j in (i + 1)..n {
            if pair_coprime(&w.annihilators[i], &w.annihilators[j])? == Some(true) {
                return Ok(PseudoNullOutcome {
                    verdict: Verdict::Pass,
                    common_factor: None,
                });
            }
        }
    }
    // No pair could be certified coprime.  A vanishing resultant at finite
    // precision never proves a genuine common divisor, so the honest
    // answer is indecision rather than failure.
    Ok(PseudoNullOutcome { verdict: Verdict::Inconclusive, common_factor: None })
}

// Some(true) = certified coprime, Some(false) = certified common prime
// divisor, None = resultant saturated at the working precision.
fn pair_coprime(a: &IwasawaElement, b: &IwasawaElement) -> Result<Option<bool>> {
    let wa = weierstrass(a)?;
    let wb = weierstrass(b)?;
    if wa.mu > 0 && wb.mu > 0 {
        return Ok(Some(false));
    }
    let la = wa.lambda as usize;
    let lb = wb.lambda as usize;
    if la == 0 || lb == 0 {
        // A distinguished part equal to 1 has no prime factors left.
        return Ok(Some(true));
    }
    let prec = wa
        .distinguished
        .ctx()
        .precision
        .min(wb.distinguished.ctx().precision);
    let p = a.ctx().p;
    let size = la + lb;
    let mut values = vec![0i128; size * size];
    // Sylvester grid: lb shifted copies of the first polynomial's
    // coefficients, then la of the second's, highest degree first.
    for r in 0..lb {
        for k in 0..=la {
            let c = wa.distinguished.coeff(&[(la - k) as u32]);
            values[r * size + r + k] = i128::from(c.residue());
        }
    }
    for r in 0..la {
        for k in 0..=lb {
            let c = wb.distinguished.coeff(&[(lb - k) as u32]);
            values[(lb + r) * size + r + k] = i128::from(c.residue());
        }
    }
    let m = ZpMatrix::new(p, prec, size, size, &values)?;
    match m.det_valuation() {
        Valuation::Finite(_) => Ok(Some(true)),
        Valuation::Saturated => Ok(None),
    }
}

/// Rebuild the elementary shape of the fixed-level module from
/// factorization data: each simple factor `(f, power, copies)` contributes
/// `copies` copies of the cyclic quotient by `f` (the power is carried by
/// deeper levels and dropped here), and non-simple factors contribute
/// nothing.  Preconditions — pairwise non-associate simple factors, and no
/// non-simple factor divisible by a simple one — are enforced.
pub fn x0_shape(
    ctx: RingCtx,
    simple: &[(IwasawaElement, u32, u32)],
    non_simple: &[IwasawaElement],
) -> Result<ElementaryModule> {
    for (i, (f, power, copies)) in simple.iter().enumerate() {
        if *power == 0 || *copies == 0 {
            return Err(Error::Validation(
                "simple factor power and copy count must be positive".into(),
            ));
        }
        for (g, _, _) in &simple[i + 1..] {
            if associates(f, g)? {
                return Err(Error::Validation(
                    "simple factors must be pairwise non-associate".into(),
                ));
            }
        }
    }
    for xi in non_simple {
        for (f, _, _) in simple {
            if f.divides(xi)? {
                return Err(Error::Validation(
                    "non-simple factor is divisible by a simple one".into(),
                ));
            }
        }
    }
    let summands = simple
        .iter()
        .map(|(f, _, copies)| CyclicSummand::new(f.clone(), 1, *copies))
        .collect();
    ElementaryModule::new(ctx, summands)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u64, nvars: usize) -> RingCtx {
        RingCtx::new(p, 6, nvars, 8).unwrap()
    }

    fn t(c: RingCtx, i: usize) -> IwasawaElement {
        c.var(i).unwrap()
    }

    #[test]
    fn elementary_char_ideal_multiplies_annihilators() {
        let c = ctx(5, 2);
        let t1 = t(c, 0);
        let t1p = t1.add(&c.constant(5)).unwrap();
        let m = ElementaryModule::new(
            c,
            vec![CyclicSummand::new(t1.clone(), 1, 1), CyclicSummand::new(t1p.clone(), 1, 1)],
        )
        .unwrap();
        assert_eq!(char_ideal_elementary(&m).unwrap(), t1.mul(&t1p).unwrap());
    }

    #[test]
    fn elementary_char_ideal_squares_doubled_block() {
        let c = ctx(3, 2);
        let f = t(c, 0).add(&t(c, 1)).unwrap().add(&c.constant(3)).unwrap();
        let m = ElementaryModule::new(c, vec![CyclicSummand::new(f.clone(), 1, 2)]).unwrap();
        assert_eq!(char_ideal_elementary(&m).unwrap(), f.mul(&f).unwrap());
    }

    #[test]
    fn elementary_char_ideal_prime_square() {
        let c = ctx(3, 1);
        let p = c.constant(3);
        let m = ElementaryModule::new(c, vec![CyclicSummand::new(p.clone(), 2, 1)]).unwrap();
        assert_eq!(char_ideal_elementary(&m).unwrap(), p.mul(&p).unwrap());
    }

    #[test]
    fn elementary_rejects_unit_and_zero_annihilators() {
        let c = ctx(3, 1);
        let unit = t(c, 0).add(&c.one()).unwrap();
        assert!(matches!(
            ElementaryModule::new(c, vec![CyclicSummand::new(unit, 1, 1)]),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            ElementaryModule::new(c, vec![CyclicSummand::new(c.zero(), 1, 1)]),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn presented_diagonal_matches_elementary() {
        let c = ctx(5, 2);
        let t1 = t(c, 0);
        let t2 = t(c, 1);
        let m = PresentedModule::new(
            c,
            vec![vec![t1.clone(), c.zero()], vec![c.zero(), t2.clone()]],
        )
        .unwrap();
        let det = char_ideal_presented(&m).unwrap();
        let elem = ElementaryModule::new(
            c,
            vec![CyclicSummand::new(t1, 1, 1), CyclicSummand::new(t2, 1, 1)],
        )
        .unwrap();
        let gen = char_ideal_elementary(&elem).unwrap();
        assert!(associates(det.generator().unwrap(), &gen).unwrap());
    }

    #[test]
    fn presented_singular_grid_gives_zero_ideal() {
        let c = ctx(5, 2);
        let m = PresentedModule::new(
            c,
            vec![vec![t(c, 0), c.zero()], vec![c.zero(), c.zero()]],
        )
        .unwrap();
        assert!(char_ideal_presented(&m).unwrap().is_zero());
    }

    #[test]
    fn presented_off_diagonal_determinant() {
        let c = ctx(5, 2);
        let t1 = t(c, 0);
        let p = c.constant(5);
        let m = PresentedModule::new(
            c,
            vec![vec![t1.clone(), p.clone()], vec![p.clone(), t1.clone()]],
        )
        .unwrap();
        let det = char_ideal_presented(&m).unwrap();
        let expected = t1.mul(&t1).unwrap().sub(&p.mul(&p).unwrap()).unwrap();
        assert_eq!(det.generator().unwrap(), &expected);
    }

    #[test]
    fn descend_unit_specialization_keeps_prime_part() {
        // Annihilator t2 + p: the last variable goes to zero, leaving p.
        let c = ctx(5, 2);
        let xi = t(c, 1).add(&c.constant(5)).unwrap();
        let m = ElementaryModule::new(c, vec![CyclicSummand::new(xi, 1, 1)]).unwrap();
        let (inv, coinv) = descend(&m).unwrap();
        let down = RingCtx { nvars: 1, ..c };
        assert_eq!(inv.generator().unwrap(), &down.one());
        assert_eq!(coinv.generator().unwrap(), &down.constant(5));
    }

    #[test]
    fn descend_untouched_variable_survives() {
        let c = ctx(5, 2);
        let m = ElementaryModule::new(c, vec![CyclicSummand::new(t(c, 0), 1, 1)]).unwrap();
        let (inv, coinv) = descend(&m).unwrap();
        let down = RingCtx { nvars: 1, ..c };
        assert_eq!(inv.generator().unwrap(), &down.one());
        assert_eq!(coinv.generator().unwrap(), &down.var(0).unwrap());
    }

    #[test]
    fn descend_annihilator_in_kernel_gives_zero_ideals() {
        let c = ctx(5, 2);
        let m = ElementaryModule::new(c, vec![CyclicSummand::new(t(c, 1), 1, 1)]).unwrap();
        let (inv, coinv) = descend(&m).unwrap();
        assert!(inv.is_zero());
        assert!(coinv.is_zero());
    }

    #[test]
    fn descent_identity_passes_on_fixed_shapes() {
        let c = ctx(5, 2);
        let cases = vec![
            vec![CyclicSummand::new(t(c, 1).add(&c.constant(5)).unwrap(), 1, 1)],
            vec![CyclicSummand::new(t(c, 0), 1, 1)],
            vec![CyclicSummand::new(t(c, 1), 1, 1)],
            vec![
                CyclicSummand::new(t(c, 0).add(&c.constant(5)).unwrap(), 2, 3),
                CyclicSummand::new(t(c, 1).add(&c.constant(25)).unwrap(), 1, 1),
            ],
        ];
        for summands in cases {
            let m = ElementaryModule::new(c, summands).unwrap();
            assert_eq!(verify_descent_identity(&m).unwrap(), Verdict::Pass);
        }
    }

    #[test]
    fn pseudonull_passes_on_coprime_pair_with_candidates() {
        let c = ctx(3, 2);
        let w = PseudoNullWitness::new(c, vec![t(c, 0), t(c, 1)]).unwrap();
        let cands = [t(c, 0), t(c, 1)];
        let out = check_pseudonull(&w, Some(&cands)).unwrap();
        assert_eq!(out.verdict, Verdict::Pass);
        assert!(out.common_factor.is_none());
    }

    #[test]
    fn pseudonull_fails_on_shared_candidate_factor() {
        let c = ctx(3, 2);
        let t1 = t(c, 0);
        let w = PseudoNullWitness::new(c, vec![t1.clone(), t1.mul(&t(c, 1)).unwrap()]).unwrap();
        let cands = [t1.clone(), t(c, 1)];
        let out = check_pseudonull(&w, Some(&cands)).unwrap();
        assert_eq!(out.verdict, Verdict::Fail);
        assert_eq!(out.common_factor.unwrap(), t1);
    }

    #[test]
    fn pseudonull_prime_and_variable_pass() {
        let c = ctx(3, 2);
        let w = PseudoNullWitness::new(c, vec![c.constant(3), t(c, 0)]).unwrap();
        let cands = [c.constant(3), t(c, 0)];
        let out = check_pseudonull(&w, Some(&cands)).unwrap();
        assert_eq!(out.verdict, Verdict::Pass);
    }

    #[test]
    fn pseudonull_all_divisible_by_prime_fails() {
        let c = ctx(3, 2);
        let p = c.constant(3);
        let w = PseudoNullWitness::new(
            c,
            vec![p.mul(&t(c, 0)).unwrap(), p.mul(&t(c, 1)).unwrap()],
        )
        .unwrap();
        let out = check_pseudonull(&w, None).unwrap();
        assert_eq!(out.verdict, Verdict::Fail);
        assert_eq!(out.common_factor.unwrap(), p);
    }

    #[test]
    fn pseudonull_univariate_resultant_route() {
        let c = ctx(3, 1);
        let t1 = t(c, 0);
        // t and t + 3 are coprime: the resultant is 3, nonzero.
        let w = PseudoNullWitness::new(
            c,
            vec![t1.clone(), t1.add(&c.constant(3)).unwrap()],
        )
        .unwrap();
        let out = check_pseudonull(&w, None).unwrap();
        assert_eq!(out.verdict, Verdict::Pass);
        // t^2 and t^2 + 3t share the factor t: no pair is provably
        // coprime, and the saturated resultant stays indecisive.
        let sq = t1.mul(&t1).unwrap();
        let w2 = PseudoNullWitness::new(
            c,
            vec![sq.clone(), sq.add(&t1.scalar_mul(3)).unwrap()],
        )
        .unwrap();
        let out2 = check_pseudonull(&w2, None).unwrap();
        assert_eq!(out2.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn pseudonull_multivariate_needs_candidates() {
        let c = ctx(3, 2);
        let w = PseudoNullWitness::new(c, vec![t(c, 0), t(c, 1)]).unwrap();
        assert!(matches!(
            check_pseudonull(&w, None),
            Err(Error::IncompleteFactorBasis)
        ));
    }

    #[test]
    fn shape_drops_powers_and_non_simple_factors() {
        let c = ctx(3, 2);
        let f1 = t(c, 0).add(&c.constant(3)).unwrap();
        let m = x0_shape(c, &[(f1.clone(), 3, 2)], &[]).unwrap();
        assert_eq!(m.summands().len(), 1);
        assert_eq!(m.summands()[0].xi, f1);
        assert_eq!(m.summands()[0].power, 1);
        assert_eq!(m.summands()[0].copies, 2);
    }

    #[test]
    fn shape_with_no_simple_factors_is_zero_module() {
        let c = ctx(3, 2);
        let m = x0_shape(c, &[], &[t(c, 0).mul(&t(c, 0)).unwrap()]).unwrap();
        assert!(m.is_zero_module());
    }

    #[test]
    fn shape_two_simple_factors() {
        let c = ctx(3, 2);
        let f1 = t(c, 0);
        let f2 = t(c, 1).add(&c.constant(3)).unwrap();
        let m = x0_shape(c, &[(f1.clone(), 1, 1), (f2.clone(), 2, 3)], &[]).unwrap();
        assert_eq!(m.summands().len(), 2);
        assert_eq!(m.summands()[0].copies, 1);
        assert_eq!(m.summands()[1].copies, 3);
        assert_eq!(m.summands()[1].xi, f2);
    }

    #[test]
    fn shape_rejects_associate_simple_factors() {
        let c = ctx(3, 2);
        let f = t(c, 0);
        let g = f.scalar_mul(2); // unit multiple
        assert!(matches!(
            x0_shape(c, &[(f, 1, 1), (g, 1, 1)], &[]),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn shape_rejects_divisible_non_simple_factor() {
        let c = ctx(3, 2);
        let f = t(c, 0);
        let bad = f.mul(&t(c, 1)).unwrap();
        assert!(matches!(
            x0_shape(c, &[(f.clone(), 1, 1)], &[bad]),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn ideal_equality_is_up_to_units() {
        let c = ctx(5, 1);
        let a = CharIdeal::Generator(t(c, 0));
        let b = CharIdeal::Generator(t(c, 0).scalar_mul(3));
        assert!(CharIdeal::same_ideal(&a, &b).unwrap());
        assert!(!CharIdeal::same_ideal(&a, &CharIdeal::Zero).unwrap());
        assert!(CharIdeal::same_ideal(&CharIdeal::Zero, &CharIdeal::Zero).unwrap());
    }
}
