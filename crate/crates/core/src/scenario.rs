//! Self-contained checker scenarios: a versioned JSON schema carrying the
//! ring parameters, both descent elements as expression text, the global
//! torsion data, and one entry per place; plus a seeded generator for
//! satisfiable scenarios and a mutator that breaks exactly one factor.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cyclo::CycloInt;
use crate::error::{Error, Result};
use crate::factors::{
    check_compatibility, frak_w_v, rho_factor, theta_v, CokernelOrder, CompatReport, Eigenvalue,
    GlobalTorsionData, PlaceData, Reduction,
};
use crate::modules::CharIdeal;
use crate::parse::{parse_element, parse_word};
use crate::ring::{GroupWord, IwasawaElement, RingCtx};

/// Schema tag expected in the `version` field.
pub const SCENARIO_VERSION: &str = "scenario_v1";

/// Marker for a ramified place in the `frobenius_word` field.
pub const RAMIFIED: &str = "RAMIFIED";

/// On-disk scenario: ring parameters, the two descent elements as
/// expression text, global torsion data, and one entry per place.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub version: String,
    pub p: u64,
    pub d: usize,
    pub precision: u32,
    pub degree_bound: u32,
    #[serde(rename = "theta_L")]
    pub theta_l: String,
    #[serde(rename = "theta_Lprime")]
    pub theta_lprime: String,
    pub global: GlobalSpec,
    pub places: Vec<PlaceSpec>,
}

/// Global torsion data in file form.  One-variable towers carry the two
/// group orders (as powers of p); higher towers carry the eigenvalue list
/// and the acting word.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum GlobalSpec {
    D1 {
        #[serde(rename = "order_K")]
        order_k: u64,
        order_meet: u64,
    },
    Eigen { eps: Vec<EigenSpec>, sigma_word: String },
}

/// A unit eigenvalue in file form: either expression text for a scalar,
/// or a power-basis representative of a root-of-unity packet.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EigenSpec {
    Expr(String),
    Packet { level: u32, coeffs: Vec<i64> },
}

/// One place in file form; `type` selects the reduction kind.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlaceSpec {
    pub name: String,
    #[serde(flatten)]
    pub data: ReductionSpec,
}

/// Reduction data in file form.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ReductionSpec {
    GoodOrdinary {
        alphas: Vec<EigenSpec>,
        /// Word in the factor group, or the literal `RAMIFIED`.
        frobenius_word: String,
    },
    SplitMultiplicative {
        g: u32,
        reciprocity: Vec<Vec<i64>>,
        gamma_v_rank: u32,
        psi_v_rank: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sigma_word: Option<String>,
    },
    UnramifiedBad {
        pi_exp: u32,
        psi_nontrivial: bool,
    },
}

/// A validated scenario with every field elaborated into working form.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub ctx: RingCtx,
    pub ctx_prime: RingCtx,
    pub theta_l: IwasawaElement,
    pub theta_lprime: IwasawaElement,
    pub global: GlobalTorsionData,
    pub places: Vec<PlaceData>,
}

/// Decode scenario JSON without elaborating it.
pub fn parse_scenario(text: &str) -> Result<ScenarioFile> {
    serde_json::from_str(text).map_err(|e| Error::Config(format!("scenario decode: {e}")))
}

fn exponent_of(p: u64, n: u64, what: &str) -> Result<u32> {
    let mut n = n;
    let mut e = 0u32;
    if n == 0 {
        return Err(Error::Config(format!("{what} must be a positive power of {p}")));
    }
    while n % p == 0 {
        n /= p;
        e += 1;
    }
    if n != 1 {
        return Err(Error::Config(format!("{what} must be a power of {p}")));
    }
    Ok(e)
}

fn eigen_from_spec(spec: &EigenSpec, ctx_scalar: RingCtx) -> Result<Eigenvalue> {
    match spec {
        EigenSpec::Expr(s) => {
            let e = parse_element(s, ctx_scalar)?;
            Ok(Eigenvalue::Rational(e.coeff(&[])))
        }
        EigenSpec::Packet { level, coeffs } => {
            let wide: Vec<i128> = coeffs.iter().map(|&c| i128::from(c)).collect();
            let z = CycloInt::from_coeffs(ctx_scalar.p, ctx_scalar.precision, *level, &wide)?;
            Ok(Eigenvalue::Packet(z))
        }
    }
}

fn global_from_spec(spec: &GlobalSpec, p: u64, ctx_scalar: RingCtx) -> Result<GlobalTorsionData> {
    match spec {
        GlobalSpec::D1 { order_k, order_meet } => Ok(GlobalTorsionData::D1 {
            order_k_exp: exponent_of(p, *order_k, "order_K")?,
            order_meet_exp: exponent_of(p, *order_meet, "order_meet")?,
        }),
        GlobalSpec::Eigen { eps, sigma_word } => {
            let eps = eps
                .iter()
                .map(|s| eigen_from_spec(s, ctx_scalar))
                .collect::<Result<Vec<_>>>()?;
            Ok(GlobalTorsionData::Eigen { eps, sigma: parse_word(sigma_word)? })
        }
    }
}

fn place_from_spec(spec: &PlaceSpec, ctx_scalar: RingCtx) -> Result<PlaceData> {
    let reduction = match &spec.data {
        ReductionSpec::GoodOrdinary { alphas, frobenius_word } => {
            let alphas = alphas
                .iter()
                .map(|s| eigen_from_spec(s, ctx_scalar))
                .collect::<Result<Vec<_>>>()?;
            let frobenius = if frobenius_word.trim() == RAMIFIED {
                None
            } else {
                Some(parse_word(frobenius_word)?)
            };
            Reduction::GoodOrdinary { alphas, frobenius }
        }
        ReductionSpec::SplitMultiplicative { g, reciprocity, gamma_v_rank, psi_v_rank, sigma_word } => {
            let rows = reciprocity.len();
            if rows != *g as usize || reciprocity.iter().any(|r| r.len() != *g as usize) {
                return Err(Error::Config(format!(
                    "place {}: reciprocity matrix must be {g} x {g}",
                    spec.name
                )));
            }
            let flat: Vec<i128> = reciprocity
                .iter()
                .flat_map(|r| r.iter().map(|&x| i128::from(x)))
                .collect();
            let m = crate::padic::ZpMatrix::new(ctx_scalar.p, ctx_scalar.precision, rows, rows, &flat)?;
            let sigma = sigma_word.as_deref().map(parse_word).transpose()?;
            Reduction::SplitMultiplicative {
                g: *g,
                reciprocity: m,
                gamma_v_rank: *gamma_v_rank,
                psi_v_rank: *psi_v_rank,
                sigma,
            }
        }
        ReductionSpec::UnramifiedBad { pi_exp, psi_nontrivial } => {
            Reduction::UnramifiedBad { pi_exp: *pi_exp, psi_nontrivial: *psi_nontrivial }
        }
    };
    Ok(PlaceData { name: spec.name.clone(), reduction })
}

impl Scenario {
    /// Elaborate and validate a decoded file: ring parameters, both
    /// elements, global data, and every place (shape-checked against the
    /// factor ring).
    pub fn from_file(file: &ScenarioFile) -> Result<Scenario> {
        if file.version != SCENARIO_VERSION {
            return Err(Error::Config(format!(
                "unsupported scenario version {:?} (expected {SCENARIO_VERSION:?})",
                file.version
            )));
        }
        if file.d == 0 {
            return Err(Error::Config("tower dimension d must be at least 1".into()));
        }
        if file.degree_bound == 0 {
            return Err(Error::Config("degree_bound must be at least 1".into()));
        }
        let ctx = RingCtx::new(file.p, file.precision, file.d, file.degree_bound)?;
        let ctx_prime = RingCtx { nvars: file.d - 1, ..ctx };
        let ctx_scalar = RingCtx { nvars: 0, ..ctx };
        let theta_l = parse_element(&file.theta_l, ctx)?;
        let theta_lprime = parse_element(&file.theta_lprime, ctx_prime)?;
        let global = global_from_spec(&file.global, file.p, ctx_scalar)?;
        if let GlobalTorsionData::Eigen { sigma, .. } = &global {
            if sigma.len() != ctx_prime.nvars {
                return Err(Error::Config(format!(
                    "global sigma word has {} coordinates for {} variables",
                    sigma.len(),
                    ctx_prime.nvars
                )));
            }
        }
        let mut places = Vec::with_capacity(file.places.len());
        let mut seen = std::collections::BTreeSet::new();
        for spec in &file.places {
            if !seen.insert(spec.name.as_str()) {
                return Err(Error::Config(format!("duplicate place name {:?}", spec.name)));
            }
            let data = place_from_spec(spec, ctx_scalar)?;
            data.validate(ctx_prime)?;
            places.push(data);
        }
        Ok(Scenario { ctx, ctx_prime, theta_l, theta_lprime, global, places })
    }

    /// Run the descent-identity check on this scenario.
    pub fn check(&self) -> Result<CompatReport> {
        check_compatibility(&self.theta_l, &self.theta_lprime, &self.places, &self.global)
    }
}

// --- seeded generation ------------------------------------------------

// The generator keeps every factor in one of two shapes: an exact p-power
// scalar, or an element whose least monomial has unit coefficient.  The
// product of such factors splits as p^k times a unit-led element, which
// keeps associate tests on both the intact and the mutated scenario
// conclusive at the working precision.  It budgets the total p-content
// and the total least-monomial degree so neither the modulus nor the
// degree bound can swallow the decisive term.
struct Budgets {
    content: u32,
    degree: u32,
}

fn sample_eigen(rng: &mut ChaCha8Rng, p: u64, b: &mut Budgets) -> Option<String> {
    // eigenvalue 1 contributes a square of augmentation-ideal type (least
    // monomial of degree two); other residues must stay away from 1 mod p
    // so the constant term of the factor is a unit.
    if p > 2 && rng.gen_bool(0.6) {
        return Some(rng.gen_range(2..p).to_string());
    }
    if b.degree >= 2 {
        b.degree -= 2;
        Some("1".into())
    } else if p > 2 {
        Some(rng.gen_range(2..p).to_string())
    } else {
        None
    }
}

fn sample_word(rng: &mut ChaCha8Rng, nvars: usize) -> GroupWord {
    // exactly one nonzero coordinate, exponent +-1: the degree-one
    // coefficients of the group element stay units
    let mut w = vec![0i64; nvars];
    w[rng.gen_range(0..nvars)] = if rng.gen_bool(0.5) { 1 } else { -1 };
    GroupWord(w)
}

fn sample_place(rng: &mut ChaCha8Rng, p: u64, d: usize, idx: usize, b: &mut Budgets) -> PlaceSpec {
    let name = format!("v{}", idx + 1);
    let kinds = if d >= 2 { 4 } else { 3 };
    let data = match rng.gen_range(0..kinds) {
        0 => {
            let psi = rng.gen_bool(0.5);
            let pi_exp = if psi && b.content >= 1 && rng.gen_bool(0.5) {
                b.content -= 1;
                1
            } else {
                0
            };
            ReductionSpec::UnramifiedBad { pi_exp, psi_nontrivial: psi }
        }
        1 => {
            if d == 1 {
                // ramified at p = 2 (every unit is 1 mod 2, so an inert
                // factor would lose its unit constant term); inert with
                // eigenvalues away from 1 otherwise
                if p == 2 {
                    ReductionSpec::GoodOrdinary {
                        alphas: vec![EigenSpec::Expr("1".into())],
                        frobenius_word: RAMIFIED.into(),
                    }
                } else {
                    let n = rng.gen_range(1..=2);
                    let alphas =
                        (0..n).map(|_| EigenSpec::Expr(rng.gen_range(2..p).to_string())).collect();
                    ReductionSpec::GoodOrdinary { alphas, frobenius_word: "[]".into() }
                }
            } else if rng.gen_bool(0.25) {
                ReductionSpec::GoodOrdinary {
                    alphas: vec![EigenSpec::Expr("1".into())],
                    frobenius_word: RAMIFIED.into(),
                }
            } else {
                let n = rng.gen_range(1..=2);
                let mut alphas = Vec::new();
                for _ in 0..n {
                    if let Some(t) = sample_eigen(rng, p, b) {
                        alphas.push(EigenSpec::Expr(t));
                    }
                }
                if alphas.is_empty() {
                    alphas.push(EigenSpec::Expr(if p == 2 { "3" } else { "2" }.into()));
                    // valuation-zero but 1 mod p is impossible to avoid at
                    // p = 2; fall back to a ramified place instead
                    if p == 2 {
                        return PlaceSpec {
                            name,
                            data: ReductionSpec::GoodOrdinary {
                                alphas: vec![EigenSpec::Expr("1".into())],
                                frobenius_word: RAMIFIED.into(),
                            },
                        };
                    }
                }
                ReductionSpec::GoodOrdinary {
                    alphas,
                    frobenius_word: sample_word(rng, d - 1).to_string(),
                }
            }
        }
        2 => {
            let g = rng.gen_range(1..=2u32);
            let mut m = vec![vec![0i64; g as usize]; g as usize];
            for (i, row) in m.iter_mut().enumerate() {
                let e = if b.content >= 1 && rng.gen_bool(0.3) {
                    b.content -= 1;
                    1
                } else {
                    0
                };
                row[i] = (p as i64).pow(e);
            }
            ReductionSpec::SplitMultiplicative {
                g,
                reciprocity: m,
                gamma_v_rank: 0,
                psi_v_rank: 0,
                sigma_word: None,
            }
        }
        _ => {
            let g = if b.degree >= 2 && rng.gen_bool(0.5) { 2u32 } else { 1 };
            if b.degree < g {
                // no degree headroom left for (sigma - 1)^g: fall back to a
                // trivial-factor variant
                ReductionSpec::SplitMultiplicative {
                    g: 1,
                    reciprocity: vec![vec![1]],
                    gamma_v_rank: 1,
                    psi_v_rank: 0,
                    sigma_word: Some(sample_word(rng, d - 1).to_string()),
                }
            } else {
                b.degree -= g;
                let m = (0..g as usize)
                    .map(|i| (0..g as usize).map(|j| i64::from(i == j)).collect())
                    .collect();
                ReductionSpec::SplitMultiplicative {
                    g,
                    reciprocity: m,
                    gamma_v_rank: 1,
                    psi_v_rank: 1,
                    sigma_word: Some(sample_word(rng, d - 1).to_string()),
                }
            }
        }
    };
    PlaceSpec { name, data }
}

/// Generate a scenario that satisfies the descent identity: the
/// one-level-down element is built as the global factor times a unit, and
/// the top element lifts that unit times all place factors, plus noise in
/// the last variable that specialization kills.
pub fn generate(seed: u64, p: u64, d: usize, precision: u32, degree_bound: u32) -> Result<ScenarioFile> {
    if d == 0 {
        return Err(Error::Config("tower dimension d must be at least 1".into()));
    }
    if precision < 6 || degree_bound < 4 {
        return Err(Error::Config(
            "generation needs precision at least 6 and degree bound at least 4".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ctx = RingCtx::new(p, precision, d, degree_bound)?;
    let ctx_prime = RingCtx { nvars: d - 1, ..ctx };
    let ctx_scalar = RingCtx { nvars: 0, ..ctx };
    let mut budgets = Budgets { content: 2, degree: degree_bound - 2 };

    let global_spec = if d == 1 {
        let meet = rng.gen_range(0..=1u32);
        let delta = if budgets.content >= 2 && rng.gen_bool(0.5) {
            budgets.content -= 2;
            1
        } else {
            0
        };
        GlobalSpec::D1 { order_k: p.pow(meet + delta), order_meet: p.pow(meet) }
    } else {
        let mut eps = Vec::new();
        if d == 2 {
            for _ in 0..rng.gen_range(0..=2) {
                if let Some(t) = sample_eigen(&mut rng, p, &mut budgets) {
                    eps.push(EigenSpec::Expr(t));
                }
            }
        }
        let sigma = if d == 2 { sample_word(&mut rng, 1) } else { GroupWord(vec![0; d - 1]) };
        GlobalSpec::Eigen { eps, sigma_word: sigma.to_string() }
    };

    let places: Vec<PlaceSpec> = (0..rng.gen_range(1..=3))
        .map(|i| sample_place(&mut rng, p, d, i, &mut budgets))
        .collect();

    // elaborate the sampled data and build both elements so the identity
    // holds exactly
    let global = global_from_spec(&global_spec, p, ctx_scalar)?;
    let rho = rho_factor(ctx_prime, d, &global)?;
    let mut prod = ctx_prime.one();
    for spec in &places {
        let data = place_from_spec(spec, ctx_scalar)?;
        data.validate(ctx_prime)?;
        match theta_v(ctx_prime, &data)? {
            CharIdeal::Generator(g) => prod = prod.mul(&g)?,
            CharIdeal::Zero => {
                return Err(Error::Validation("generated place factor collapsed to zero".into()))
            }
        }
    }
    let mut unit = ctx_prime.one();
    for j in 0..d - 1 {
        let c = rng.gen_range(0..p * p);
        if c != 0 {
            unit = unit.add(&ctx_prime.var(j)?.scalar_mul(i128::from(c)))?;
        }
    }
    let theta_lprime = rho.mul(&unit)?;
    let mut theta_l = unit.mul(&prod)?.extend_vars(d)?;
    let mut noise = ctx.zero();
    for _ in 0..rng.gen_range(0..=2u32) {
        let exps: Vec<u32> = (0..d).map(|_| rng.gen_range(0..=1)).collect();
        let c = rng.gen_range(1..p * p);
        noise = noise.add(&ctx.from_terms(&[(&exps, i128::from(c))])?)?;
    }
    theta_l = theta_l.add(&ctx.var(d - 1)?.mul(&noise)?)?;

    Ok(ScenarioFile {
        version: SCENARIO_VERSION.into(),
        p,
        d,
        precision,
        degree_bound,
        theta_l: theta_l.to_string(),
        theta_lprime: theta_lprime.to_string(),
        global: global_spec,
        places,
    })
}

enum Mutation {
    ThetaLprimeTimesP,
    ThetaLTimesP,
    ThetaLprimeTimesVar,
    BumpOrderK,
    BumpPi(usize),
    ScaleReciprocity(usize),
}

/// Break exactly one factor of a satisfiable scenario.  Every available
/// mutation multiplies one side of the identity by a non-unit (a p power
/// or a variable), so the two sides land in distinct ideals and the check
/// fails conclusively rather than drifting below precision.
pub fn mutate(file: &ScenarioFile, seed: u64) -> Result<ScenarioFile> {
    let sc = Scenario::from_file(file)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut options = vec![Mutation::ThetaLprimeTimesP, Mutation::ThetaLTimesP];
    if sc.ctx_prime.nvars >= 1 {
        options.push(Mutation::ThetaLprimeTimesVar);
    }
    if let GlobalSpec::D1 { order_k, order_meet } = &file.global {
        let k = exponent_of(file.p, *order_k, "order_K")?;
        let meet = exponent_of(file.p, *order_meet, "order_meet")?;
        if 2 * (k + 1 - meet) < file.precision {
            options.push(Mutation::BumpOrderK);
        }
    }
    for (i, (spec, data)) in file.places.iter().zip(&sc.places).enumerate() {
        match &spec.data {
            ReductionSpec::UnramifiedBad { pi_exp, psi_nontrivial: true }
                if pi_exp + 1 < file.precision =>
            {
                options.push(Mutation::BumpPi(i));
            }
            ReductionSpec::SplitMultiplicative { g, gamma_v_rank: 0, .. } => {
                if let CokernelOrder::Finite { exponent } = frak_w_v(data)? {
                    if exponent + g < file.precision {
                        options.push(Mutation::ScaleReciprocity(i));
                    }
                }
            }
            _ => {}
        }
    }
    let mut out = file.clone();
    match options[rng.gen_range(0..options.len())] {
        Mutation::ThetaLprimeTimesP => {
            let e = sc.theta_lprime.scalar_mul(i128::from(file.p));
            if e.is_zero() {
                return Err(Error::Config("scaled element vanished at working precision".into()));
            }
            out.theta_lprime = e.to_string();
        }
        Mutation::ThetaLTimesP => {
            let e = sc.theta_l.scalar_mul(i128::from(file.p));
            if e.is_zero() {
                return Err(Error::Config("scaled element vanished at working precision".into()));
            }
            out.theta_l = e.to_string();
        }
        Mutation::ThetaLprimeTimesVar => {
            let e = sc.theta_lprime.mul(&sc.ctx_prime.var(0)?)?;
            if e.is_zero() {
                return Err(Error::Config("shifted element vanished at degree bound".into()));
            }
            out.theta_lprime = e.to_string();
        }
        Mutation::BumpOrderK => {
            if let GlobalSpec::D1 { order_k, .. } = &mut out.global {
                *order_k *= file.p;
            }
        }
        Mutation::BumpPi(i) => {
            if let ReductionSpec::UnramifiedBad { pi_exp, .. } = &mut out.places[i].data {
                *pi_exp += 1;
            }
        }
        Mutation::ScaleReciprocity(i) => {
            if let ReductionSpec::SplitMultiplicative { reciprocity, .. } = &mut out.places[i].data
            {
                for row in reciprocity {
                    for x in row {
                        *x *= file.p as i64;
                    }
                }
            }
        }
    }
    Ok(out)
}
