//! The shipped example algebras used throughout the test and acceptance
//! suites: the base field, polynomial rings, Koszul complexes on one element,
//! and an amplitude-1 DG-ring with its flat polynomial extension.

use std::sync::Arc;

use crate::cdga::{AlgebraMap, DGAlgebra, Element, GeneratorSpec, Monomial};
use crate::exactla::{FieldSpec, Scalar};

/// The base field as a DG-algebra (no generators).
pub fn trivial(field: FieldSpec) -> Arc<DGAlgebra> {
    DGAlgebra::new(field, vec![], vec![]).expect("trivial algebra is valid")
}

/// `P1 = k[x]` with `x` of bidegree (0, 1).
pub fn p1(field: FieldSpec) -> Arc<DGAlgebra> {
    DGAlgebra::new(
        field,
        vec![GeneratorSpec::new("x", 0, 1)],
        vec![Element::zero()],
    )
    .expect("P1 is valid")
}

/// `k[x, y]`, both generators of bidegree (0, 1).
pub fn poly2(field: FieldSpec) -> Arc<DGAlgebra> {
    DGAlgebra::new(
        field,
        vec![GeneratorSpec::new("x", 0, 1), GeneratorSpec::new("y", 0, 1)],
        vec![Element::zero(), Element::zero()],
    )
    .expect("k[x,y] is valid")
}

/// `K1 = K(k[x]; x)`: exterior generator `e` with `d(e) = x`.
pub fn k1(field: FieldSpec) -> Arc<DGAlgebra> {
    let gens = vec![GeneratorSpec::new("x", 0, 1), GeneratorSpec::new("e", -1, 1)];
    let dx = Element::zero();
    let de = Element::from_terms([(Monomial::generator(2, 0), Scalar::one(field))]);
    DGAlgebra::new(field, gens, vec![dx, de]).expect("K1 is valid")
}

/// `D2 = K(k[x]; x²)`, a model of `k[x]/(x²)`.
pub fn d2(field: FieldSpec) -> Arc<DGAlgebra> {
    let gens = vec![GeneratorSpec::new("x", 0, 1), GeneratorSpec::new("e", -1, 2)];
    let de = Element::from_terms([(monomial(&[2, 0]), Scalar::one(field))]);
    DGAlgebra::new(field, gens, vec![Element::zero(), de]).expect("D2 is valid")
}

/// `AMP`: the amplitude-1 DG-ring with `u:(0,1)`, `e1:(−1,2)`, `e2:(−1,3)`,
/// `d(e1) = u²`, `d(e2) = u³`.
pub fn amp(field: FieldSpec) -> Arc<DGAlgebra> {
    let gens = vec![
        GeneratorSpec::new("u", 0, 1),
        GeneratorSpec::new("e1", -1, 2),
        GeneratorSpec::new("e2", -1, 3),
    ];
    let de1 = Element::from_terms([(monomial(&[2, 0, 0]), Scalar::one(field))]);
    let de2 = Element::from_terms([(monomial(&[3, 0, 0]), Scalar::one(field))]);
    DGAlgebra::new(field, gens, vec![Element::zero(), de1, de2]).expect("AMP is valid")
}

/// `B-AMP = AMP[x]`: the flat-dimension-0 polynomial extension of `AMP`.
pub fn b_amp(field: FieldSpec) -> (Arc<DGAlgebra>, AlgebraMap) {
    amp(field)
        .extend(vec![GeneratorSpec::new("x", 0, 1)], vec![Element::zero()])
        .expect("B-AMP is valid")
}

fn monomial(exps: &[u32]) -> Monomial {
    Monomial::from_exps(exps.to_vec())
}
