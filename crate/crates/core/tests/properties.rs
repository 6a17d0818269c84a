//! Randomized structural laws of the truncated ring and its operations.
//! Every equality here is exact at the working precision and degree:
//! truncation commutes with the ring operations, so laws that hold in the
//! full power-series ring hold verbatim in the quotient.

use proptest::prelude::*;

use iwasawa_core::cyclo::zeta_embed;
use iwasawa_core::divide::associates;
use iwasawa_core::factors::{frak_w_v, PlaceData, Reduction};
use iwasawa_core::padic::ZpMatrix;
use iwasawa_core::parse::parse_element;
use iwasawa_core::ring::{Character, GroupWord, IwasawaElement, RingCtx};

const PRECISION: u32 = 6;
const DEGREE: u32 = 6;

fn ctx(p: u64, nvars: usize) -> RingCtx {
    RingCtx::new(p, PRECISION, nvars, DEGREE).unwrap()
}

prop_compose! {
    fn arb_terms(nvars: usize)(
        terms in proptest::collection::vec(
            (proptest::collection::vec(0u32..=2, nvars), -20i128..20),
            0..4,
        )
    ) -> Vec<(Vec<u32>, i128)> {
        terms
    }
}

fn element(p: u64, nvars: usize, terms: &[(Vec<u32>, i128)]) -> IwasawaElement {
    let c = ctx(p, nvars);
    let refs: Vec<(&[u32], i128)> = terms.iter().map(|(e, k)| (e.as_slice(), *k)).collect();
    c.from_terms(&refs).unwrap()
}

prop_compose! {
    fn arb_triple()(
        p in prop_oneof![Just(2u64), Just(3u64)],
        nvars in 1usize..=2,
    )(
        a in arb_terms(nvars),
        b in arb_terms(nvars),
        c in arb_terms(nvars),
        p in Just(p),
        nvars in Just(nvars),
    ) -> (u64, usize, Vec<(Vec<u32>, i128)>, Vec<(Vec<u32>, i128)>, Vec<(Vec<u32>, i128)>) {
        (p, nvars, a, b, c)
    }
}

fn fix(nvars: usize, terms: Vec<(Vec<u32>, i128)>) -> Vec<(Vec<u32>, i128)> {
    terms
        .into_iter()
        .map(|(mut e, c)| {
            e.resize(nvars, 0);
            (e, c)
        })
        .collect()
}

proptest! {
    #[test]
    fn ring_laws_hold_in_the_quotient((p, nvars, ta, tb, tc) in arb_triple()) {
        let a = element(p, nvars, &fix(nvars, ta));
        let b = element(p, nvars, &fix(nvars, tb));
        let c = element(p, nvars, &fix(nvars, tc));
        // commutativity and associativity survive truncation: a dropped
        // monomial can never feed a retained one
        prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
        prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
        prop_assert_eq!(
            a.mul(&b).unwrap().mul(&c).unwrap(),
            a.mul(&b.mul(&c).unwrap()).unwrap()
        );
        prop_assert_eq!(
            a.mul(&b.add(&c).unwrap()).unwrap(),
            a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap()
        );
    }

    #[test]
    fn printer_and_parser_are_mutual_inverses((p, nvars, ta, _tb, _tc) in arb_triple()) {
        let a = element(p, nvars, &fix(nvars, ta));
        let back = parse_element(&a.to_string(), a.ctx()).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn canonical_specialization_is_a_ring_map((p, nvars, ta, tb, _tc) in arb_triple()) {
        let a = element(p, nvars, &fix(nvars, ta));
        let b = element(p, nvars, &fix(nvars, tb));
        prop_assert_eq!(
            a.add(&b).unwrap().specialize_canonical().unwrap(),
            a.specialize_canonical().unwrap().add(&b.specialize_canonical().unwrap()).unwrap()
        );
        prop_assert_eq!(
            a.mul(&b).unwrap().specialize_canonical().unwrap(),
            a.specialize_canonical().unwrap().mul(&b.specialize_canonical().unwrap()).unwrap()
        );
    }

    #[test]
    fn inversion_involution_is_a_ring_map((p, nvars, ta, tb, _tc) in arb_triple()) {
        let a = element(p, nvars, &fix(nvars, ta));
        let b = element(p, nvars, &fix(nvars, tb));
        prop_assert_eq!(
            a.mul(&b).unwrap().sharp().unwrap(),
            a.sharp().unwrap().mul(&b.sharp().unwrap()).unwrap()
        );
    }

    #[test]
    fn group_elements_evaluate_to_character_values(
        p in prop_oneof![Just(2u64), Just(3u64)],
        exps in proptest::collection::vec(0i64..=2, 1..=2),
        chi_exps in proptest::collection::vec(0i128..9, 1..=2),
        level in 0u32..=2,
    ) {
        let nvars = exps.len();
        let mut ce = chi_exps;
        ce.resize(nvars, 0);
        let c = ctx(p, nvars);
        let w = GroupWord(exps);
        let g = c.group_elem(&w).unwrap();
        prop_assert!(!g.truncated());
        let chi = Character::new(p, level, &ce).unwrap();
        let value = g.eval_char(&chi).unwrap();
        let expected = zeta_embed(&chi.eval_word(&w).unwrap(), chi.level(), PRECISION).unwrap();
        prop_assert_eq!(value, expected);
    }

    #[test]
    fn constructed_multiples_are_always_recognized((p, nvars, ta, tb, tc) in arb_triple()) {
        let a = element(p, nvars, &fix(nvars, ta));
        let u = element(p, nvars, &fix(nvars, tb));
        let v = element(p, nvars, &fix(nvars, tc));
        prop_assume!(!a.is_zero());
        let b = a.mul(&u).unwrap();
        let c = b.mul(&v).unwrap();
        prop_assume!(!b.truncated() && !c.truncated());
        // an exact multiple is never refused: the linear solver always
        // reaches a zero residual when one exists
        prop_assert!(a.divides(&b).unwrap());
        prop_assert!(a.divides(&c).unwrap());
    }

    #[test]
    fn associate_testing_never_refutes_a_unit_relation((p, nvars, ta, _tb, _tc) in arb_triple()) {
        let a = element(p, nvars, &fix(nvars, ta));
        let g = ctx(p, nvars).group_elem(&GroupWord(vec![1; nvars])).unwrap();
        let b = a.mul(&g).unwrap();
        prop_assume!(!b.truncated());
        // soft refusals are allowed at finite precision; a hard "no" is not
        prop_assert!(!matches!(associates(&a, &a), Ok(false)));
        prop_assert!(!matches!(associates(&a, &b), Ok(false)));
    }

    #[test]
    fn smith_valuations_are_unimodular_invariant(
        p in prop_oneof![Just(2u64), Just(3u64)],
        size in 2usize..=3,
        entries in proptest::collection::vec(0i128..729, 9),
        swap in 0usize..3,
        addrow in 0usize..3,
    ) {
        let m: Vec<Vec<i128>> = (0..size)
            .map(|i| (0..size).map(|j| entries[i * 3 + j]).collect())
            .collect();
        // left-multiply by a swap and a shear: both unimodular
        let mut um = m.clone();
        um.swap(swap % size, (swap + 1) % size);
        let (src, dst) = (addrow % size, (addrow + 1) % size);
        let shear: Vec<i128> = um[src].iter().map(|&x| 7 * x).collect();
        for (e, x) in um[dst].iter_mut().zip(shear) {
            *e += x;
        }
        let flat: Vec<i128> = m.into_iter().flatten().collect();
        let uflat: Vec<i128> = um.into_iter().flatten().collect();
        let a = ZpMatrix::new(p, PRECISION, size, size, &flat).unwrap();
        let b = ZpMatrix::new(p, PRECISION, size, size, &uflat).unwrap();
        prop_assert_eq!(a.smith_valuations(), b.smith_valuations());

        let place = |m: ZpMatrix| PlaceData {
            name: "v".into(),
            reduction: Reduction::SplitMultiplicative {
                g: size as u32,
                reciprocity: m,
                gamma_v_rank: 0,
                psi_v_rank: 0,
                sigma: None,
            },
        };
        prop_assert_eq!(frak_w_v(&place(a)).unwrap(), frak_w_v(&place(b)).unwrap());
    }

    #[test]
    fn character_enumeration_is_complete_and_duplicate_free(
        p in prop_oneof![Just(2u64), Just(3u64)],
        nvars in 1usize..=2,
    ) {
        let n = 2u32;
        let all: Vec<Character> = Character::enumerate(p, nvars, n).unwrap().collect();
        let expected = (p as usize).pow(n * nvars as u32);
        prop_assert_eq!(all.len(), expected);
        let set: std::collections::HashSet<Character> = all.into_iter().collect();
        prop_assert_eq!(set.len(), expected);
    }

    #[test]
    fn nonzero_products_force_nonzero_specializations((p, nvars, ta, tb, _tc) in arb_triple()) {
        let rho = element(p, nvars, &fix(nvars, ta));
        let theta = element(p, nvars, &fix(nvars, tb));
        let spec = theta.specialize_canonical().unwrap().extend_vars(nvars).unwrap();
        let rhs = rho.mul(&spec).unwrap();
        if !rhs.is_zero() {
            prop_assert!(!spec.is_zero());
        }
    }
}
