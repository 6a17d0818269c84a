//! The working ring: Z/p^N coefficients, variables t_1..t_d, all monomials
//! of total degree > D discarded.
//!
//! Discarding is a ring homomorphism (the high-degree monomials span an
//! ideal), so arithmetic here is exact arithmetic in the quotient. The
//! `truncated` flag records whether an element still agrees with the
//! untruncated series it came from: it is set whenever a nonzero monomial
//! was dropped, it is sticky under every operation, and consumers use it to
//! downgrade evaluation-based claims to "approximate".

use crate::cyclo::{zeta_embed, CycloInt, RootOfUnity};
use crate::error::{Error, Result};
use crate::linalg::{mulmod, pow_u64};
use crate::padic::{PadicInt, Valuation};
use std::collections::BTreeMap;
use std::fmt;

/// Shared parameters of a working ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RingCtx {
    pub p: u64,
    pub precision: u32,
    pub nvars: usize,
    pub degree_bound: u32,
}

impl RingCtx {
    pub fn new(p: u64, precision: u32, nvars: usize, degree_bound: u32) -> Result<RingCtx> {
        PadicInt::check_context(p, precision)?;
        Ok(RingCtx { p, precision, nvars, degree_bound })
    }

    pub(crate) fn modulus(&self) -> u64 {
        pow_u64(self.p, self.precision)
    }

    pub fn zero(&self) -> IwasawaElement {
        IwasawaElement { ctx: *self, coeffs: BTreeMap::new(), truncated: false }
    }

    pub fn one(&self) -> IwasawaElement {
        self.constant(1)
    }

    pub fn constant(&self, value: i128) -> IwasawaElement {
        let r = value.rem_euclid(self.modulus() as i128) as u64;
        self.constant_res(r)
    }

    pub(crate) fn constant_res(&self, residue: u64) -> IwasawaElement {
        let mut coeffs = BTreeMap::new();
        if residue != 0 {
            coeffs.insert(Exps(vec![0; self.nvars]), residue % self.modulus());
        }
        IwasawaElement { ctx: *self, coeffs, truncated: false }
    }

    /// The variable t_{i+1} (0-based index).
    pub fn var(&self, i: usize) -> Result<IwasawaElement> {
        if i >= self.nvars {
            return Err(Error::Index { index: i + 1, nvars: self.nvars });
        }
        if self.degree_bound < 1 {
            return Err(Error::DegreeOverflow("degree bound is 0".into()));
        }
        let mut e = vec![0u32; self.nvars];
        e[i] = 1;
        let mut coeffs = BTreeMap::new();
        coeffs.insert(Exps(e), 1);
        Ok(IwasawaElement { ctx: *self, coeffs, truncated: false })
    }

    /// Builds an element from (exponent vector, coefficient) pairs.
    pub fn from_terms(&self, terms: &[(&[u32], i128)]) -> Result<IwasawaElement> {
        let m = self.modulus() as i128;
        let mut coeffs: BTreeMap<Exps, u64> = BTreeMap::new();
        for (exps, c) in terms {
            if exps.len() != self.nvars {
                return Err(Error::ShapeMismatch(format!(
                    "exponent tuple has {} entries, ring has {} variables",
                    exps.len(),
                    self.nvars
                )));
            }
            let e = Exps(exps.to_vec());
            if e.degree() > self.degree_bound {
                return Err(Error::DegreeOverflow(format!(
                    "monomial degree {} exceeds bound {}",
                    e.degree(),
                    self.degree_bound
                )));
            }
            let r = c.rem_euclid(m) as u64;
            let slot = coeffs.entry(e).or_insert(0);
            *slot = ((*slot as i128 + r as i128).rem_euclid(m)) as u64;
        }
        coeffs.retain(|_, c| *c != 0);
        Ok(IwasawaElement { ctx: *self, coeffs, truncated: false })
    }

    /// `prod_i (1 + t_i)^(w_i)` for an integer word; negative entries go
    /// through the degree-D inverse series, which marks the result
    /// truncated as soon as a nonzero tail is dropped.
    pub fn group_elem(&self, w: &GroupWord) -> Result<IwasawaElement> {
        if w.0.len() != self.nvars {
            return Err(Error::ShapeMismatch(format!(
                "group word has {} entries, ring has {} variables",
                w.0.len(),
                self.nvars
            )));
        }
        let mut acc = self.one();
        for (i, &a) in w.0.iter().enumerate() {
            if a == 0 {
                continue;
            }
            let base = self.one().add(&self.var(i)?)?;
            let factor = if a > 0 {
                base.pow(a as u64)?
            } else {
                base.unit_inverse()?.pow(a.unsigned_abs())?
            };
            acc = acc.mul(&factor)?;
        }
        Ok(acc)
    }
}

/// Exponent tuple ordered by total degree, then lexicographically. This is
/// the canonical term order for display (descending) and for triangular
/// division (ascending).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct Exps(pub(crate) Vec<u32>);

impl Exps {
    pub(crate) fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub(crate) fn add(&self, other: &Exps) -> Exps {
        Exps(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub(crate) fn checked_sub(&self, other: &Exps) -> Option<Exps> {
        let mut out = Vec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(&other.0) {
            out.push(a.checked_sub(*b)?);
        }
        Some(Exps(out))
    }
}

impl Ord for Exps {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.degree(), &self.0).cmp(&(other.degree(), &other.0))
    }
}

impl PartialOrd for Exps {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// All exponent tuples of total degree <= bound, ascending in the term
/// order.
pub(crate) fn monomials_upto(nvars: usize, bound: u32) -> Vec<Exps> {
    let mut out = vec![Exps(vec![0; nvars])];
    for i in 0..nvars {
        let prev = std::mem::take(&mut out);
        for e in prev {
            let used = e.degree();
            for a in 0..=(bound - used) {
                let mut v = e.0.clone();
                v[i] = a;
                out.push(Exps(v));
            }
        }
    }
    out.sort();
    out
}

/// A formal Z_p-word in the topological generators: the exponent vector of
/// `gamma_1^(a_1) ... gamma_d^(a_d)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupWord(pub Vec<i64>);

impl GroupWord {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> GroupWord {
        GroupWord(self.0.iter().map(|a| -a).collect())
    }

    /// True when some exponent is a unit mod p, i.e. the word is not a
    /// p-th power in the free Z_p-module.
    pub fn is_primitive(&self, p: u64) -> bool {
        self.0.iter().any(|&a| a.rem_euclid(p as i64) != 0)
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "]")
    }
}

/// A truncated power series: sparse monomial map with coefficients in
/// Z/p^N, no stored coefficient zero, all degrees <= D.
#[derive(Debug, Clone)]
pub struct IwasawaElement {
    ctx: RingCtx,
    coeffs: BTreeMap<Exps, u64>,
    truncated: bool,
}

impl PartialEq for IwasawaElement {
    /// Value equality at the working precision; the truncation flag is
    /// provenance, not value.
    fn eq(&self, other: &Self) -> bool {
        self.ctx == other.ctx && self.coeffs == other.coeffs
    }
}

impl Eq for IwasawaElement {}

impl IwasawaElement {
    pub fn ctx(&self) -> RingCtx {
        self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub(crate) fn set_truncated(&mut self) {
        self.truncated = true;
    }

    pub fn term_count(&self) -> usize {
        self.coeffs.len()
    }

    /// Total degree of the stored part; None for the zero element.
    pub fn degree(&self) -> Option<u32> {
        self.coeffs.keys().map(|e| e.degree()).max()
    }

    pub fn constant_coeff(&self) -> PadicInt {
        let key = Exps(vec![0; self.ctx.nvars]);
        let r = self.coeffs.get(&key).copied().unwrap_or(0);
        PadicInt::new(self.ctx.p, self.ctx.precision, r as i128)
    }

    pub fn coeff(&self, exps: &[u32]) -> PadicInt {
        let r = if exps.len() == self.ctx.nvars {
            self.coeffs.get(&Exps(exps.to_vec())).copied().unwrap_or(0)
        } else {
            0
        };
        PadicInt::new(self.ctx.p, self.ctx.precision, r as i128)
    }

    /// Minimum coefficient valuation over all stored monomials; Saturated
    /// for the zero element.
    pub fn content(&self) -> Valuation {
        self.coeffs
            .values()
            .map(|&c| PadicInt::new(self.ctx.p, self.ctx.precision, c as i128).val())
            .min()
            .unwrap_or(Valuation::Saturated)
    }

    /// A series is a unit iff its constant term is one.
    pub fn is_unit(&self) -> bool {
        self.constant_coeff().is_unit()
    }

    /// Factors out the scalar p-power content: returns (k, self / p^k)
    /// with the quotient living at precision N - k, where every remaining
    /// equality is still exact. Zero and content-free elements come back
    /// unchanged with k = 0.
    pub(crate) fn strip_content(&self) -> (u32, IwasawaElement) {
        let k = match self.content() {
            Valuation::Finite(k) if k > 0 => k,
            _ => return (0, self.clone()),
        };
        let ctx = RingCtx { precision: self.ctx.precision - k, ..self.ctx };
        let pk = crate::linalg::pow_u64(ctx.p, k);
        let coeffs = self
            .coeffs
            .iter()
            .map(|(e, &c)| (e.clone(), (c / pk) % ctx.modulus()))
            .filter(|&(_, c)| c != 0)
            .collect();
        (k, IwasawaElement { ctx, coeffs, truncated: self.truncated })
    }

    pub(crate) fn terms(&self) -> impl Iterator<Item = (&Exps, u64)> {
        self.coeffs.iter().map(|(e, &c)| (e, c))
    }

    pub(crate) fn min_term(&self) -> Option<(&Exps, u64)> {
        self.coeffs.iter().next().map(|(e, &c)| (e, c))
    }

    pub(crate) fn coeff_of(&self, e: &Exps) -> u64 {
        self.coeffs.get(e).copied().unwrap_or(0)
    }

    /// Reinterprets the element at a different degree bound, silently
    /// dropping stored terms above the new bound; the caller owns the flag
    /// bookkeeping.
    pub(crate) fn rebound(&self, bound: u32) -> IwasawaElement {
        let ctx = RingCtx { degree_bound: bound, ..self.ctx };
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(e, _)| e.degree() <= bound)
            .map(|(e, &c)| (e.clone(), c))
            .collect();
        IwasawaElement { ctx, coeffs, truncated: false }
    }

    pub(crate) fn from_parts(ctx: RingCtx, coeffs: BTreeMap<Exps, u64>, truncated: bool) -> Self {
        debug_assert!(coeffs.values().all(|&c| c != 0));
        IwasawaElement { ctx, coeffs, truncated }
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.ctx != other.ctx {
            return Err(Error::ShapeMismatch(format!(
                "(p={}, N={}, d={}, D={}) vs (p={}, N={}, d={}, D={})",
                self.ctx.p,
                self.ctx.precision,
                self.ctx.nvars,
                self.ctx.degree_bound,
                other.ctx.p,
                other.ctx.precision,
                other.ctx.nvars,
                other.ctx.degree_bound
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let m = self.ctx.modulus();
        let mut coeffs = self.coeffs.clone();
        for (e, &c) in &other.coeffs {
            let slot = coeffs.entry(e.clone()).or_insert(0);
            *slot = (*slot + c) % m;
            if *slot == 0 {
                coeffs.remove(e);
            }
        }
        Ok(IwasawaElement {
            ctx: self.ctx,
            coeffs,
            truncated: self.truncated || other.truncated,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let m = self.ctx.modulus();
        let coeffs = self.coeffs.iter().map(|(e, &c)| (e.clone(), (m - c) % m)).collect();
        IwasawaElement { ctx: self.ctx, coeffs, truncated: self.truncated }
    }

    pub fn scalar_mul(&self, scalar: i128) -> Self {
        let m = self.ctx.modulus();
        let s = scalar.rem_euclid(m as i128) as u64;
        let mut coeffs = BTreeMap::new();
        for (e, &c) in &self.coeffs {
            let v = mulmod(c, s, m);
            if v != 0 {
                coeffs.insert(e.clone(), v);
            }
        }
        IwasawaElement { ctx: self.ctx, coeffs, truncated: self.truncated }
    }

    /// Product in the quotient ring. The full convolution is accumulated
    /// first so a dropped monomial only sets the truncation flag when its
    /// *summed* coefficient is nonzero.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let m = self.ctx.modulus();
        let mut acc: BTreeMap<Exps, u64> = BTreeMap::new();
        for (ea, &ca) in &self.coeffs {
            for (eb, &cb) in &other.coeffs {
                let c = mulmod(ca, cb, m);
                if c == 0 {
                    continue;
                }
                let e = ea.add(eb);
                let slot = acc.entry(e).or_insert(0);
                *slot = (*slot + c) % m;
            }
        }
        let mut truncated = self.truncated || other.truncated;
        let mut coeffs = BTreeMap::new();
        for (e, c) in acc {
            if c == 0 {
                continue;
            }
            if e.degree() > self.ctx.degree_bound {
                truncated = true;
            } else {
                coeffs.insert(e, c);
            }
        }
        Ok(IwasawaElement { ctx: self.ctx, coeffs, truncated })
    }

    pub fn pow(&self, mut e: u64) -> Result<Self> {
        let mut acc = self.ctx.one();
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// Inverse of a unit series by Newton iteration in the quotient ring.
    /// Exact there; the truncation flag comes out set exactly when the true
    /// inverse has a nonzero tail beyond degree D, decided by one full
    /// verification product (a*x is exactly 1 as polynomials iff there is
    /// no tail), not by where the doubling steps happened to land.
    pub fn unit_inverse(&self) -> Result<Self> {
        let c0 = self.constant_coeff();
        if !c0.is_unit() {
            return Err(Error::NotAUnit(
                "series with non-unit constant term has no inverse".into(),
            ));
        }
        let bare = IwasawaElement { truncated: false, ..self.clone() };
        let mut x = self.ctx.constant_res(c0.inv().expect("unit").residue());
        let two = self.ctx.constant(2);
        let mut correct = 1u64;
        while correct <= self.ctx.degree_bound as u64 {
            x = x.mul(&two.sub(&bare.mul(&x)?)?)?;
            correct *= 2;
        }
        x.truncated = false;
        let check = bare.mul(&x)?;
        debug_assert_eq!(check.coeffs, self.ctx.one().coeffs);
        x.truncated = self.truncated || check.truncated;
        Ok(x)
    }

    /// Substitutes `images[i]` for t_{i+1}. Every image must share
    /// (p, N, D), live in a common ring, and have its constant term in the
    /// maximal ideal.
    pub fn specialize(&self, images: &[IwasawaElement]) -> Result<IwasawaElement> {
        if images.len() != self.ctx.nvars {
            return Err(Error::ShapeMismatch(format!(
                "{} images for {} variables",
                images.len(),
                self.ctx.nvars
            )));
        }
        let tctx = images
            .first()
            .map(|im| im.ctx)
            .unwrap_or(RingCtx { nvars: 0, ..self.ctx });
        if tctx.p != self.ctx.p
            || tctx.precision != self.ctx.precision
            || tctx.degree_bound != self.ctx.degree_bound
        {
            return Err(Error::ShapeMismatch(
                "images must keep the source prime, precision and degree bound".into(),
            ));
        }
        for (index, im) in images.iter().enumerate() {
            if im.ctx != tctx {
                return Err(Error::ShapeMismatch(
                    "all images must live in one ring".into(),
                ));
            }
            if im.constant_coeff().is_unit() {
                return Err(Error::NotContinuous { index });
            }
        }

        let mut pows: Vec<Vec<IwasawaElement>> =
            images.iter().map(|_| vec![tctx.one()]).collect();
        let mut out = tctx.zero();
        for (e, &c) in &self.coeffs {
            let mut term = tctx.constant_res(c);
            for (i, &a) in e.0.iter().enumerate() {
                if a == 0 {
                    continue;
                }
                while pows[i].len() <= a as usize {
                    let next = pows[i].last().unwrap().mul(&images[i])?;
                    pows[i].push(next);
                }
                term = term.mul(&pows[i][a as usize])?;
            }
            out = out.add(&term)?;
        }
        if self.truncated {
            out.truncated = true;
        }
        Ok(out)
    }

    /// The canonical one-step descent: t_d -> 0, keeping t_1..t_(d-1).
    pub fn specialize_canonical(&self) -> Result<IwasawaElement> {
        if self.ctx.nvars == 0 {
            return Err(Error::Validation(
                "no variable left to specialize".into(),
            ));
        }
        let tctx = RingCtx { nvars: self.ctx.nvars - 1, ..self.ctx };
        let mut images = Vec::with_capacity(self.ctx.nvars);
        for i in 0..tctx.nvars {
            images.push(tctx.var(i)?);
        }
        images.push(tctx.zero());
        self.specialize(&images)
    }

    /// The involution induced by inverting every group generator:
    /// t_i -> (1 + t_i)^(-1) - 1.
    pub fn sharp(&self) -> Result<IwasawaElement> {
        let mut images = Vec::with_capacity(self.ctx.nvars);
        for i in 0..self.ctx.nvars {
            let base = self.ctx.one().add(&self.ctx.var(i)?)?;
            images.push(base.unit_inverse()?.sub(&self.ctx.one())?);
        }
        self.specialize(&images)
    }

    /// Reinterprets the element in a ring with extra trailing variables.
    pub fn extend_vars(&self, nvars: usize) -> Result<IwasawaElement> {
        if nvars < self.ctx.nvars {
            return Err(Error::ShapeMismatch(format!(
                "cannot shrink {} variables to {}",
                self.ctx.nvars, nvars
            )));
        }
        let ctx = RingCtx { nvars, ..self.ctx };
        let coeffs = self
            .coeffs
            .iter()
            .map(|(e, &c)| {
                let mut v = e.0.clone();
                v.resize(nvars, 0);
                (Exps(v), c)
            })
            .collect();
        Ok(IwasawaElement { ctx, coeffs, truncated: self.truncated })
    }
}

/// A continuous character of the d-fold product of Z_p into p-power roots
/// of unity, stored at its minimal level M: gamma_i maps to zeta^(e_i) for
/// a fixed primitive p^M-th root zeta. Minimality means some e_i is a unit
/// mod p, or M = 0 and the character is trivial.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Character {
    p: u64,
    level: u32,
    exps: Vec<u64>,
}

impl Character {
    pub fn new(p: u64, level: u32, exps: &[i128]) -> Result<Character> {
        PadicInt::check_context(p, level.max(1))?;
        let m = pow_u64(p, level);
        let mut level = level;
        let mut reduced: Vec<u64> = exps.iter().map(|e| e.rem_euclid(m as i128) as u64).collect();
        while level > 0 && reduced.iter().all(|e| e % p == 0) {
            for e in &mut reduced {
                *e /= p;
            }
            level -= 1;
        }
        if level == 0 {
            reduced.fill(0);
        }
        Ok(Character { p, level, exps: reduced })
    }

    pub fn trivial(p: u64, nvars: usize) -> Character {
        Character { p, level: 0, exps: vec![0; nvars] }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Minimal level: the character factors through (Z/p^level)^d and no
    /// smaller quotient.
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn nvars(&self) -> usize {
        self.exps.len()
    }

    pub fn exps(&self) -> &[u64] {
        &self.exps
    }

    pub fn is_trivial(&self) -> bool {
        self.level == 0
    }

    /// Value on the i-th generator.
    pub fn component(&self, i: usize) -> RootOfUnity {
        RootOfUnity::new(self.p, self.level, self.exps[i] as i128)
    }

    /// Value on a group word: zeta^(sum e_i w_i).
    pub fn eval_word(&self, w: &GroupWord) -> Result<RootOfUnity> {
        if w.0.len() != self.exps.len() {
            return Err(Error::ShapeMismatch(format!(
                "word length {} vs character on {} generators",
                w.0.len(),
                self.exps.len()
            )));
        }
        let m = pow_u64(self.p, self.level) as i128;
        let mut s: i128 = 0;
        for (&e, &a) in self.exps.iter().zip(&w.0) {
            s = (s + (e as i128) * (a as i128)).rem_euclid(m);
        }
        Ok(RootOfUnity::new(self.p, self.level, s))
    }

    /// All characters killing p^n-th powers, i.e. the full dual of
    /// (Z/p^n)^d, in ascending lexicographic order of the exponent tuple.
    pub fn enumerate(p: u64, nvars: usize, n: u32) -> Result<CharacterIter> {
        PadicInt::check_context(p, n.max(1))?;
        Ok(CharacterIter {
            p,
            modulus: pow_u64(p, n),
            level: n,
            state: Some(vec![0; nvars]),
        })
    }
}

impl fmt::Display for Character {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, e) in self.exps.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "]@{}", self.level)
    }
}

/// Odometer over exponent tuples; yields p^(n*d) characters one at a time
/// so callers can stream counts without materialising the dual group.
pub struct CharacterIter {
    p: u64,
    modulus: u64,
    level: u32,
    state: Option<Vec<u64>>,
}

impl Iterator for CharacterIter {
    type Item = Character;

    fn next(&mut self) -> Option<Character> {
        let cur = self.state.as_ref()?.clone();
        let chi = Character::new(
            self.p,
            self.level,
            &cur.iter().map(|&e| e as i128).collect::<Vec<_>>(),
        )
        .expect("context already validated");
        // Advance: last coordinate fastest.
        let state = self.state.as_mut().unwrap();
        let mut i = state.len();
        loop {
            if i == 0 {
                self.state = None;
                break;
            }
            i -= 1;
            state[i] += 1;
            if state[i] < self.modulus {
                break;
            }
            state[i] = 0;
        }
        if self.modulus == 1 && self.state.is_some() {
            // Degenerate n = 0 odometer: only the trivial tuple exists.
            self.state = None;
        }
        Some(chi)
    }
}

impl IwasawaElement {
    /// Evaluates the element at a character: t_i -> zeta^(e_i) - 1 in the
    /// ring of integers at the character's level. Exact for untruncated
    /// elements; for truncated ones the result is only the value of the
    /// stored part.
    pub fn eval_char(&self, chi: &Character) -> Result<CycloInt> {
        if chi.nvars() != self.ctx.nvars || chi.p() != self.ctx.p {
            return Err(Error::ShapeMismatch(format!(
                "character {} does not match ring with p={}, d={}",
                chi, self.ctx.p, self.ctx.nvars
            )));
        }
        let level = chi.level();
        let precision = self.ctx.precision;
        let one = CycloInt::one(self.ctx.p, precision, level);
        let mut bases = Vec::with_capacity(self.ctx.nvars);
        for i in 0..self.ctx.nvars {
            let z = zeta_embed(&chi.component(i), level, precision)?;
            bases.push(z.sub(&one));
        }
        let mut pows: Vec<Vec<CycloInt>> = bases.iter().map(|_| vec![one.clone()]).collect();
        let mut out = CycloInt::zero(self.ctx.p, precision, level);
        for (e, &c) in &self.coeffs {
            let mut term = CycloInt::from_residue(self.ctx.p, precision, level, c as i128);
            for (i, &a) in e.0.iter().enumerate() {
                if a == 0 {
                    continue;
                }
                while pows[i].len() <= a as usize {
                    let next = pows[i].last().unwrap().mul(&bases[i]);
                    pows[i].push(next);
                }
                term = term.mul(&pows[i][a as usize]);
            }
            out = out.add(&term);
        }
        Ok(out)
    }
}

impl fmt::Display for IwasawaElement {
    /// Canonical sparse form: terms in descending degree-then-lex order,
    /// coefficients as integers in [0, p^N), e.g. `t1^2 + 3*t1 + 3`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.coeffs.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let mono: Vec<String> = e
                .0
                .iter()
                .enumerate()
                .filter(|(_, &a)| a > 0)
                .map(|(i, &a)| {
                    if a == 1 {
                        format!("t{}", i + 1)
                    } else {
                        format!("t{}^{}", i + 1, a)
                    }
                })
                .collect();
            if mono.is_empty() {
                write!(f, "{c}")?;
            } else if *c == 1 {
                write!(f, "{}", mono.join(" "))?;
            } else {
                write!(f, "{}*{}", c, mono.join(" "))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u64, n: u32, d: usize, bound: u32) -> RingCtx {
        RingCtx::new(p, n, d, bound).unwrap()
    }

    #[test]
    fn multiplication_truncates_and_flags() {
        // (1 + t1)(1 + t2) at D = 1 drops t1 t2.
        let c = ctx(3, 4, 2, 1);
        let a = c.one().add(&c.var(0).unwrap()).unwrap();
        let b = c.one().add(&c.var(1).unwrap()).unwrap();
        let prod = a.mul(&b).unwrap();
        assert!(prod.truncated());
        assert_eq!(prod.to_string(), "t1 + t2 + 1");
        // At D = 2 nothing is lost.
        let c2 = ctx(3, 4, 2, 2);
        let a = c2.one().add(&c2.var(0).unwrap()).unwrap();
        let b = c2.one().add(&c2.var(1).unwrap()).unwrap();
        assert!(!a.mul(&b).unwrap().truncated());
    }

    #[test]
    fn cancelling_overflow_does_not_flag() {
        // (1 + t1)(1 - t1) at D = 1 drops -t1^2... which is nonzero, so it
        // flags; but (t1 + t1)(0) style zero sums never do. Check a real
        // cancellation: ((1+t1) - (1+t1)) * anything.
        let c = ctx(3, 4, 1, 2);
        let z = c.one().add(&c.var(0).unwrap()).unwrap().sub(&c.one().add(&c.var(0).unwrap()).unwrap()).unwrap();
        let w = z.mul(&c.var(0).unwrap()).unwrap();
        assert!(w.is_zero());
        assert!(!w.truncated());
    }

    #[test]
    fn group_elem_positive_word() {
        let c = ctx(2, 4, 2, 4);
        let g = c.group_elem(&GroupWord(vec![1, 1])).unwrap();
        // (1+t1)(1+t2) = 1 + t1 + t2 + t1 t2
        assert_eq!(g.to_string(), "t1 t2 + t1 + t2 + 1");
        assert!(!g.truncated());
    }

    #[test]
    fn group_elem_negative_word_is_geometric_series() {
        let c = ctx(5, 3, 1, 3);
        let g = c.group_elem(&GroupWord(vec![-1])).unwrap();
        // 1 - t + t^2 - t^3, and the dropped tail is nonzero.
        assert_eq!(g.to_string(), "124*t1^3 + t1^2 + 124*t1 + 1");
        assert!(g.truncated());
        let back = g.mul(&c.group_elem(&GroupWord(vec![1])).unwrap()).unwrap();
        assert_eq!(back, c.one());
        assert!(back.truncated());
    }

    #[test]
    fn unit_inverse_of_constant_stays_exact() {
        let c = ctx(5, 3, 1, 3);
        let x = c.constant(2).unit_inverse().unwrap();
        assert_eq!(x, c.constant(63));
        assert!(!x.truncated());
    }

    #[test]
    fn sharp_of_t1_at_degree_two() {
        let c = ctx(3, 4, 1, 2);
        let s = c.var(0).unwrap().sharp().unwrap();
        // -t1 + t1^2
        assert_eq!(s.to_string(), "t1^2 + 80*t1");
    }

    #[test]
    fn sharp_is_involutive_on_retained_terms() {
        let c = ctx(3, 4, 1, 4);
        let s = c.var(0).unwrap().sharp().unwrap().sharp().unwrap();
        assert_eq!(s.coeff(&[1]).residue(), 1);
        // Degrees 2..4 cancel exactly.
        for d in 2..=4 {
            assert!(s.coeff(&[d]).is_zero(), "degree {d} should cancel");
        }
    }

    #[test]
    fn specialize_canonical_drops_last_variable() {
        let c = ctx(3, 4, 2, 4);
        // t1 + t2 + t1 t2 -> t1
        let a = c
            .from_terms(&[(&[1, 0], 1), (&[0, 1], 1), (&[1, 1], 1)])
            .unwrap();
        let s = a.specialize_canonical().unwrap();
        assert_eq!(s.ctx().nvars, 1);
        assert_eq!(s.to_string(), "t1");
    }

    #[test]
    fn specialize_rejects_unit_images() {
        let c = ctx(3, 4, 1, 4);
        let a = c.var(0).unwrap();
        let err = a.specialize(&[c.one()]).unwrap_err();
        assert!(matches!(err, Error::NotContinuous { index: 0 }));
    }

    #[test]
    fn specialize_is_multiplicative() {
        let c = ctx(3, 5, 2, 6);
        let a = c.from_terms(&[(&[1, 0], 2), (&[0, 1], 1), (&[0, 0], 3)]).unwrap();
        let b = c.from_terms(&[(&[1, 1], 1), (&[0, 0], 1)]).unwrap();
        let lhs = a.mul(&b).unwrap().specialize_canonical().unwrap();
        let rhs = a
            .specialize_canonical()
            .unwrap()
            .mul(&b.specialize_canonical().unwrap())
            .unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn display_canonical_ordering() {
        let c = ctx(3, 2, 2, 3);
        let a = c
            .from_terms(&[(&[0, 0], 3), (&[1, 0], 3), (&[2, 0], 1), (&[0, 2], 5)])
            .unwrap();
        assert_eq!(a.to_string(), "t1^2 + 5*t2^2 + 3*t1 + 3");
    }

    #[test]
    fn character_canonicalizes_to_minimal_level() {
        let chi = Character::new(3, 2, &[3, 6]).unwrap();
        assert_eq!(chi.level(), 1);
        assert_eq!(chi.exps(), &[1, 2]);
        let triv = Character::new(3, 2, &[9, 0]).unwrap();
        assert!(triv.is_trivial());
        assert_eq!(triv.exps(), &[0, 0]);
    }

    #[test]
    fn eval_word_sums_exponents() {
        let chi = Character::new(5, 1, &[2, 3]).unwrap();
        let z = chi.eval_word(&GroupWord(vec![1, 1])).unwrap();
        assert_eq!(z.order(), 1); // 2 + 3 = 5 = 0 mod 5
        let z = chi.eval_word(&GroupWord(vec![-1, 2])).unwrap();
        assert_eq!(z.exp(), 4); // -2 + 6 = 4
    }

    #[test]
    fn enumerate_covers_full_dual() {
        let all: Vec<Character> = Character::enumerate(3, 2, 1).unwrap().collect();
        assert_eq!(all.len(), 9);
        assert!(all[0].is_trivial());
        assert_eq!(all[1].exps(), &[0, 1]);
        let lvl0 = all.iter().filter(|c| c.level() == 0).count();
        assert_eq!(lvl0, 1);
        let n0: Vec<Character> = Character::enumerate(3, 2, 0).unwrap().collect();
        assert_eq!(n0.len(), 1);
    }

    #[test]
    fn eval_at_order_two_character() {
        // t1 + 2 at the character sending the generator to -1 gives
        // (-1 - 1) + 2 = 0.
        let c = ctx(2, 3, 1, 4);
        let a = c.from_terms(&[(&[1], 1), (&[0], 2)]).unwrap();
        let chi = Character::new(2, 1, &[1]).unwrap();
        let v = a.eval_char(&chi).unwrap();
        assert!(v.is_zero());
    }

    #[test]
    fn eval_of_group_elem_is_character_value() {
        let c = ctx(3, 4, 2, 12);
        let chi = Character::new(3, 1, &[1, 2]).unwrap();
        for w in [vec![1, 0], vec![2, 1], vec![4, 2]] {
            let g = c.group_elem(&GroupWord(w.clone())).unwrap();
            let lhs = g.eval_char(&chi).unwrap();
            let z = chi.eval_word(&GroupWord(w)).unwrap();
            let rhs = zeta_embed(&z, chi.level(), c.precision).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn trivial_character_evaluation_matches_constant_term_map() {
        // chi trivial: t_i -> 0, so the value is the constant coefficient.
        let c = ctx(3, 4, 2, 4);
        let a = c.from_terms(&[(&[1, 1], 5), (&[0, 0], 7)]).unwrap();
        let v = a.eval_char(&Character::trivial(3, 2)).unwrap();
        assert_eq!(v.rational_part().unwrap().residue(), 7);
    }

    #[test]
    fn content_and_units() {
        let c = ctx(3, 4, 1, 3);
        let a = c.from_terms(&[(&[0], 3), (&[1], 9)]).unwrap();
        assert_eq!(a.content(), Valuation::Finite(1));
        assert!(!a.is_unit());
        assert!(c.from_terms(&[(&[0], 2), (&[1], 3)]).unwrap().is_unit());
        assert_eq!(c.zero().content(), Valuation::Saturated);
    }
}
