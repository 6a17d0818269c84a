//! Local and global correction factors of the tower-descent identity and
//! the checker that ties them together: eigenvalue-product ideals, the
//! global torsion factor, Euler-style place factors, reciprocity cokernel
//! orders, the per-place dispatch, the compatibility verdict, and the
//! non-torsion obstruction screen.

use crate::cyclo::{zeta_embed, CycloInt, RootOfUnity};
use crate::cyclopoly::CycloPoly;
use crate::divide::associates;
use crate::error::{Error, Result};
use crate::modules::{CharIdeal, Verdict};
use crate::padic::{PadicInt, Valuation, ZpMatrix};
use crate::ring::{GroupWord, IwasawaElement, RingCtx};
use serde::Serialize;

/// One unit eigenvalue: either a scalar, or a cyclotomic representative
/// standing for its full packet of Galois conjugates (the packet keeps
/// products rational).
#[derive(Debug, Clone)]
pub enum Eigenvalue {
    Rational(PadicInt),
    Packet(CycloInt),
}

impl Eigenvalue {
    fn check_unit(&self) -> Result<()> {
        let ok = match self {
            Eigenvalue::Rational(x) => x.is_unit(),
            Eigenvalue::Packet(a) => a.is_unit(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::NotAUnit("eigenvalue must have valuation zero".into()))
        }
    }
}

// sigma_k(a) for the conjugation sending the level generator to
// `image_root`: evaluate the power-basis coefficients at the image.
fn galois_image(a: &CycloInt, image_root: &RootOfUnity) -> Result<CycloInt> {
    let (p, prec, level) = (a.prime(), a.precision(), a.level());
    let z = zeta_embed(image_root, level, prec)?;
    let mut acc = CycloInt::zero(p, prec, level);
    for &c in a.coeffs().iter().rev() {
        acc = acc.mul(&z).add(&CycloInt::from_residue(p, prec, level, i128::from(c)));
    }
    Ok(acc)
}

// Product over the full conjugate packet of beta of (1 - sigma_k(beta) w),
// descended back to rational coefficients.
fn packet_product(ctx: RingCtx, beta: &CycloInt, w: &IwasawaElement) -> Result<IwasawaElement> {
    let level = beta.level();
    if level == 0 {
        let r = beta.rational_part().expect("level-zero scalar is rational");
        return one_minus_scaled(ctx, &r, w);
    }
    let wp = CycloPoly::from_iwasawa(w, level);
    let minus_one = CycloInt::one(ctx.p, ctx.precision, level).neg();
    let mut acc: Option<CycloPoly> = None;
    for root in RootOfUnity::new(ctx.p, level, 1).conjugates() {
        let beta_k = galois_image(beta, &root)?;
        let factor = wp.scale(&beta_k.neg()).sub_constant(&minus_one);
        acc = Some(match acc {
            Some(prev) => prev.mul(&factor),
            None => factor,
        });
    }
    let prod = acc.expect("packet has at least one conjugate");
    let mut out = prod.to_iwasawa()?;
    if prod.dropped() || w.truncated() {
        out.set_truncated();
    }
    Ok(out)
}

// 1 - beta w for a scalar beta.
fn one_minus_scaled(ctx: RingCtx, beta: &PadicInt, w: &IwasawaElement) -> Result<IwasawaElement> {
    ctx.one().sub(&w.scalar_mul(i128::from(beta.residue())))
}

// The shared core of the eigenvalue-product ideals: the product over all
// eigenvalues of (1 - e^{-1} w)(1 - e^{-1} w^{-1}).
fn reciprocal_pair_product(
    ctx: RingCtx,
    eigenvalues: &[Eigenvalue],
    word: &GroupWord,
) -> Result<IwasawaElement> {
    let fwd = ctx.group_elem(word)?;
    let bwd = ctx.group_elem(&word.inverse())?;
    let mut acc = ctx.one();
    for e in eigenvalues {
        e.check_unit()?;
        match e {
            Eigenvalue::Rational(x) => {
                let beta = x.inv()?;
                acc = acc.mul(&one_minus_scaled(ctx, &beta, &fwd)?)?;
                acc = acc.mul(&one_minus_scaled(ctx, &beta, &bwd)?)?;
            }
            Eigenvalue::Packet(a) => {
                let beta = a.inv()?;
                acc = acc.mul(&packet_product(ctx, &beta, &fwd)?)?;
                acc = acc.mul(&packet_product(ctx, &beta, &bwd)?)?;
            }
        }
    }
    Ok(acc)
}

/// Eigenvalue-product ideal generator: the product over the given unit
/// eigenvalues of `(1 - e^{-1} s)(1 - e^{-1} s^{-1})` with `s` the group
/// element of `sigma`.  The empty list gives 1.
pub fn w_ideal(
    ctx: RingCtx,
    eigenvalues: &[Eigenvalue],
    sigma: &GroupWord,
) -> Result<IwasawaElement> {
    reciprocal_pair_product(ctx, eigenvalues, sigma)
}

/// Global torsion data feeding the tower-global correction factor.
#[derive(Debug, Clone)]
pub enum GlobalTorsionData {
    /// One-variable towers: orders of the base torsion group and of its
    /// meet with the divisible part upstairs, both as powers of p.
    D1 { order_k_exp: u32, order_meet_exp: u32 },
    /// Higher towers: eigenvalues of sigma on the torsion Tate module.
    Eigen { eps: Vec<Eigenvalue>, sigma: GroupWord },
}

/// Global correction factor over the one-variable-fewer ring: trivial for
/// towers of dimension at least three, an eigenvalue-product ideal in
/// dimension two, and the squared order quotient in dimension one.
pub fn rho_factor(
    ctx_prime: RingCtx,
    d: usize,
    data: &GlobalTorsionData,
) -> Result<IwasawaElement> {
    if d == 0 {
        return Err(Error::Validation("tower dimension must be positive".into()));
    }
    if ctx_prime.nvars + 1 != d {
        return Err(Error::ShapeMismatch(format!(
            "factor ring has {} variables for tower dimension {}",
            ctx_prime.nvars, d
        )));
    }
    if d >= 3 {
        return Ok(ctx_prime.one());
    }
    match (d, data) {
        (2, GlobalTorsionData::Eigen { eps, sigma }) => w_ideal(ctx_prime, eps, sigma),
        (1, GlobalTorsionData::D1 { order_k_exp, order_meet_exp }) => {
            if order_meet_exp > order_k_exp {
                return Err(Error::NonDivisible(
                    "meet order must divide the base torsion order".into(),
                ));
            }
            p_power_constant(ctx_prime, 2 * (order_k_exp - order_meet_exp))
        }
        _ => Err(Error::Validation(
            "global torsion data does not match the tower dimension".into(),
        )),
    }
}

// p^e as a ring constant; an exponent at or past the scalar precision
// would collapse to zero, which is refused rather than misreported.
fn p_power_constant(ctx: RingCtx, e: u32) -> Result<IwasawaElement> {
    if e >= ctx.precision {
        return Err(Error::PrecisionInconclusive(format!(
            "p^{e} is not representable at precision {}",
            ctx.precision
        )));
    }
    let mut r: u64 = 1;
    for _ in 0..e {
        r *= ctx.p;
    }
    Ok(ctx.constant_res(r))
}

/// Reduction data of one place of the base field.
#[derive(Debug, Clone)]
pub enum Reduction {
    /// Good ordinary reduction: twist-matrix unit eigenvalues and the
    /// Frobenius word in the factor group (`None` marks ramified places).
    GoodOrdinary { alphas: Vec<Eigenvalue>, frobenius: Option<GroupWord> },
    /// Split multiplicative reduction: lattice dimension, reciprocity
    /// matrix, ranks of the local factor group and of its kernel part,
    /// and the generator word when the factor-group rank is one.
    SplitMultiplicative {
        g: u32,
        reciprocity: ZpMatrix,
        gamma_v_rank: u32,
        psi_v_rank: u32,
        sigma: Option<GroupWord>,
    },
    /// A place outside the ramification set: order of the component group
    /// as a power of p, and whether the kernel part is nontrivial there.
    UnramifiedBad { pi_exp: u32, psi_nontrivial: bool },
}

/// One labelled place with its reduction data.
#[derive(Debug, Clone)]
pub struct PlaceData {
    pub name: String,
    pub reduction: Reduction,
}

impl PlaceData {
    /// Shape checks against the factor ring: unit eigenvalues, sane ranks,
    /// a generator word exactly when the local rank calls for one.
    pub fn validate(&self, ctx_prime: RingCtx) -> Result<()> {
        match &self.reduction {
            Reduction::GoodOrdinary { alphas, frobenius } => {
                for a in alphas {
                    a.check_unit()?;
                }
                if let Some(w) = frobenius {
                    if w.len() != ctx_prime.nvars {
                        return Err(Error::ShapeMismatch(format!(
                            "frobenius word has {} coordinates for {} variables",
                            w.len(),
                            ctx_prime.nvars
                        )));
                    }
                }
            }
            Reduction::SplitMultiplicative { g, reciprocity, gamma_v_rank, psi_v_rank, sigma } => {
                if *g == 0 {
                    return Err(Error::Validation("lattice dimension must be positive".into()));
                }
                if reciprocity.cols() != *g as usize {
                    return Err(Error::ShapeMismatch(format!(
                        "reciprocity matrix has {} columns for lattice dimension {g}",
                        reciprocity.cols()
                    )));
                }
                if *psi_v_rank > 1 {
                    return Err(Error::Validation(
                        "kernel-part rank must be 0 or 1".into(),
                    ));
                }
                match sigma {
                    Some(w) => {
                        if *gamma_v_rank != 1 {
                            return Err(Error::Validation(
                                "generator word is only meaningful at local rank one".into(),
                            ));
                        }
                        if w.len() != ctx_prime.nvars {
                            return Err(Error::ShapeMismatch(format!(
                                "local generator word has {} coordinates for {} variables",
                                w.len(),
                                ctx_prime.nvars
                            )));
                        }
                        if w.0.iter().all(|&e| e == 0) {
                            return Err(Error::Validation(
                                "local generator word must be nontrivial".into(),
                            ));
                        }
                    }
                    None => {
                        if *gamma_v_rank == 1 {
                            return Err(Error::Validation(
                                "local rank one needs a generator word".into(),
                            ));
                        }
                    }
                }
            }
            Reduction::UnramifiedBad { .. } => {}
        }
        Ok(())
    }
}

/// Euler-style factor of a good ordinary place: the reciprocal-pair
/// product of the twist eigenvalues against the Frobenius word.  Requires
/// an unramified place (a Frobenius word).
pub fn f_ordinary(
    ctx_prime: RingCtx,
    alphas: &[Eigenvalue],
    frobenius: &GroupWord,
) -> Result<IwasawaElement> {
    reciprocal_pair_product(ctx_prime, alphas, frobenius)
}

/// Order of the cokernel of a reciprocity matrix over the p-adic scalars.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CokernelOrder {
    /// Finite cokernel of order p^exponent.
    Finite { exponent: u32 },
    /// The matrix has rank below its row count at the working precision.
    Infinite,
}

/// Cokernel order of a split-multiplicative reciprocity matrix, read off
/// the Smith normal form: infinite as soon as the rank cannot reach the
/// row count (too few columns, or a saturated elementary divisor), else
/// p to the sum of the divisor valuations.
pub fn frak_w_v(v: &PlaceData) -> Result<CokernelOrder> {
    let m = match &v.reduction {
        Reduction::SplitMultiplicative { reciprocity, .. } => reciprocity,
        _ => {
            return Err(Error::ShapeMismatch(
                "cokernel order is defined for split multiplicative places".into(),
            ))
        }
    };
    if m.cols() < m.rows() {
        return Ok(CokernelOrder::Infinite);
    }
    let mut total = 0u32;
    for v in m.smith_valuations() {
        match v {
            Valuation::Finite(k) => total += k,
            Valuation::Saturated => return Ok(CokernelOrder::Infinite),
        }
    }
    Ok(CokernelOrder::Finite { exponent: total })
}

/// Per-place factor of the descent identity, over the factor ring:
/// component-group order for places outside the ramification set (when
/// the kernel part is nontrivial), the Euler-style factor at unramified
/// good ordinary places, and for split multiplicative places either the
/// lifted cokernel order (local factor group trivial), the g-th power of
/// `sigma - 1` (kernel part of rank one with a rank-one local group), or
/// the trivial factor.
pub fn theta_v(ctx_prime: RingCtx, v: &PlaceData) -> Result<CharIdeal> {
    v.validate(ctx_prime)?;
    match &v.reduction {
        Reduction::UnramifiedBad { pi_exp, psi_nontrivial } => {
            if *psi_nontrivial {
                Ok(CharIdeal::Generator(p_power_constant(ctx_prime, *pi_exp)?))
            } else {
                Ok(CharIdeal::Generator(ctx_prime.one()))
            }
        }
        Reduction::GoodOrdinary { alphas, frobenius } => match frobenius {
            Some(w) => Ok(CharIdeal::from_element(f_ordinary(ctx_prime, alphas, w)?)),
            None => Ok(CharIdeal::Generator(ctx_prime.one())),
        },
        Reduction::SplitMultiplicative { g, gamma_v_rank, psi_v_rank, sigma, .. } => {
            if *gamma_v_rank == 0 {
                return match frak_w_v(v)? {
                    CokernelOrder::Finite { exponent } => {
                        Ok(CharIdeal::Generator(p_power_constant(ctx_prime, exponent)?))
                    }
                    CokernelOrder::Infinite => Ok(CharIdeal::Zero),
                };
            }
            if *psi_v_rank == 1 && *gamma_v_rank == 1 {
                let w = sigma.as_ref().expect("validated: rank one has a word");
                let s = ctx_prime.group_elem(w)?;
                let base = s.sub(&ctx_prime.one())?;
                return Ok(CharIdeal::from_element(base.pow(u64::from(*g))?));
            }
            Ok(CharIdeal::Generator(ctx_prime.one()))
        }
    }
}

/// One line of a compatibility report.  `kind` records whether the
/// printed value is the exact factor (`pass`) or a degree-truncated
/// image of it (`inconclusive`); equalities involving a truncated value
/// hold at the working degree.
#[derive(Debug, Clone, Serialize)]
pub struct FactorEntry {
    pub name: String,
    pub value: String,
    pub kind: Verdict,
}

fn entry_kind(truncated: bool) -> Verdict {
    if truncated {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    }
}

fn ideal_truncated(a: &CharIdeal) -> bool {
    a.generator().is_some_and(|g| g.truncated())
}

/// Itemized outcome of the compatibility check.
#[derive(Debug, Clone, Serialize)]
pub struct CompatReport {
    pub verdict: Verdict,
    pub lhs: String,
    pub rhs: String,
    pub entries: Vec<FactorEntry>,
    pub notes: Vec<String>,
    pub p: u64,
    pub d: usize,
    pub precision: u32,
    pub degree_bound: u32,
}

// Ideal product for checker sides: flags are tolerated (every equality is
// an equality at the working precision), zero still absorbs.
fn ideal_mul_lossy(a: &CharIdeal, b: &CharIdeal) -> Result<CharIdeal> {
    match (a, b) {
        (CharIdeal::Generator(x), CharIdeal::Generator(y)) => {
            Ok(CharIdeal::from_element(x.mul(y)?))
        }
        _ => Ok(CharIdeal::Zero),
    }
}

fn is_soft(e: &Error) -> bool {
    matches!(e, Error::PrecisionInconclusive(_) | Error::DegreeOverflow(_))
}

/// Verify the tower-descent identity on supplied data: the one-level-down
/// element times all place factors must generate the same ideal as the
/// global factor times the specialized top element.  Zero ideals match
/// only each other; any undecidable step downgrades the verdict to
/// inconclusive instead of guessing.
pub fn check_compatibility(
    theta_l: &IwasawaElement,
    theta_lp: &IwasawaElement,
    places: &[PlaceData],
    global: &GlobalTorsionData,
) -> Result<CompatReport> {
    let ctx = theta_l.ctx();
    let d = ctx.nvars;
    if d == 0 {
        return Err(Error::ShapeMismatch("top ring needs at least one variable".into()));
    }
    let ctx_prime = theta_lp.ctx();
    if ctx_prime != (RingCtx { nvars: d - 1, ..ctx }) {
        return Err(Error::ShapeMismatch(
            "one-level-down element must drop exactly the last variable".into(),
        ));
    }

    let mut entries = Vec::new();
    let mut notes = Vec::new();
    if d == 1 {
        notes.push(
            "one-variable tower: the global factor carries the squared order quotient \
             as a single constant; stage-by-stage splittings of the two squares are \
             not itemized separately"
                .to_string(),
        );
    }
    let report = |verdict: Verdict, lhs: String, rhs: String, entries: Vec<FactorEntry>, notes: Vec<String>| CompatReport {
        verdict,
        lhs,
        rhs,
        entries,
        notes,
        p: ctx.p,
        d,
        precision: ctx.precision,
        degree_bound: ctx.degree_bound,
    };

    entries.push(FactorEntry {
        name: "theta_Lprime".into(),
        value: theta_lp.to_string(),
        kind: entry_kind(theta_lp.truncated()),
    });
    let mut lhs = CharIdeal::from_element(theta_lp.clone());
    for v in places {
        let th = match theta_v(ctx_prime, v) {
            Ok(t) => t,
            Err(e) if is_soft(&e) => {
                notes.push(format!("factor at place {} undecidable: {e}", v.name));
                return Ok(report(Verdict::Inconclusive, String::new(), String::new(), entries, notes));
            }
            Err(e) => return Err(e),
        };
        entries.push(FactorEntry {
            name: format!("theta_v[{}]", v.name),
            value: th.to_string(),
            kind: entry_kind(ideal_truncated(&th)),
        });
        lhs = ideal_mul_lossy(&lhs, &th)?;
    }

    let rho = match rho_factor(ctx_prime, d, global) {
        Ok(r) => r,
        Err(e) if is_soft(&e) => {
            notes.push(format!("global factor undecidable: {e}"));
            return Ok(report(Verdict::Inconclusive, String::new(), String::new(), entries, notes));
        }
        Err(e) => return Err(e),
    };
    entries.push(FactorEntry {
        name: "rho".into(),
        value: rho.to_string(),
        kind: entry_kind(rho.truncated()),
    });

    let specialized = theta_l.specialize_canonical()?;
    entries.push(FactorEntry {
        name: "specialize(theta_L)".into(),
        value: specialized.to_string(),
        kind: entry_kind(specialized.truncated()),
    });
    let rhs = ideal_mul_lossy(
        &CharIdeal::from_element(rho),
        &CharIdeal::from_element(specialized),
    )?;

    let verdict = match (&lhs, &rhs) {
        (CharIdeal::Zero, CharIdeal::Zero) => Verdict::Pass,
        (CharIdeal::Zero, _) | (_, CharIdeal::Zero) => Verdict::Fail,
        (CharIdeal::Generator(a), CharIdeal::Generator(b)) => match associates(a, b) {
            Ok(true) => Verdict::Pass,
            Ok(false) => Verdict::Fail,
            Err(e) if is_soft(&e) => {
                notes.push(format!("associate comparison undecidable: {e}"));
                Verdict::Inconclusive
            }
            Err(e) => return Err(e),
        },
    };
    Ok(report(verdict, lhs.to_string(), rhs.to_string(), entries, notes))
}

/// Outcome of the non-torsion obstruction screen.
#[derive(Debug, Clone, Serialize)]
pub struct ScreenReport {
    /// Split multiplicative places whose local group fixes the chosen
    /// intermediate field.
    pub obstructions: Vec<String>,
    /// Whether the top element dies under the iterated specialization
    /// cutting out that field.
    pub specialization_vanishes: bool,
}

impl ScreenReport {
    pub fn classification(&self) -> String {
        if !self.obstructions.is_empty() {
            format!("obstructed by {}", self.obstructions.join(", "))
        } else if self.specialization_vanishes {
            "torsion propagation fails".into()
        } else {
            "no obstruction".into()
        }
    }
}

/// Screen an intermediate field, described by the 1-based indices of the
/// generators cut out, against the split-multiplicative obstruction set
/// and against vanishing of the specialized top element.  A local group
/// of rank one obstructs when its generator word is supported inside the
/// cut-out set; a trivial local group fixes everything and always
/// obstructs.
pub fn nontorsion_screen(
    theta_l: &CharIdeal,
    theta_ctx: RingCtx,
    places: &[PlaceData],
    cut: &[usize],
) -> Result<ScreenReport> {
    let d = theta_ctx.nvars;
    let mut seen = vec![false; d];
    for &i in cut {
        if i == 0 || i > d {
            return Err(Error::Index { index: i, nvars: d });
        }
        if seen[i - 1] {
            return Err(Error::Validation("repeated generator index".into()));
        }
        seen[i - 1] = true;
    }

    let mut obstructions = Vec::new();
    for v in places {
        if let Reduction::SplitMultiplicative { gamma_v_rank, sigma, .. } = &v.reduction {
            let fixes = match (gamma_v_rank, sigma) {
                (0, _) => true,
                (1, Some(w)) => w
                    .0
                    .iter()
                    .enumerate()
                    .all(|(idx, &e)| e == 0 || (idx < d && seen[idx])),
                // Higher local rank carries no word data to test against.
                _ => false,
            };
            if fixes {
                obstructions.push(v.name.clone());
            }
        }
    }

    let specialization_vanishes = match theta_l {
        CharIdeal::Zero => true,
        CharIdeal::Generator(g) => {
            if g.ctx() != theta_ctx {
                return Err(Error::ShapeMismatch(
                    "top element lives in a different ring".into(),
                ));
            }
            let tctx = RingCtx { nvars: d - cut.len(), ..theta_ctx };
            let mut next = 0usize;
            let mut images = Vec::with_capacity(d);
            for &hit in &seen {
                if hit {
                    images.push(tctx.zero());
                } else {
                    images.push(tctx.var(next)?);
                    next += 1;
                }
            }
            g.specialize(&images)?.is_zero()
        }
    };

    Ok(ScreenReport { obstructions, specialization_vanishes })
}
