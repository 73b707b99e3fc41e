//! Property tests for the algebraic invariants the engine relies on:
//! exact linear algebra, sign laws, the Leibniz rule, Künneth convolution,
//! lift independence, and scenario round-trips.

use std::sync::Arc;

use proptest::prelude::*;

use dgcheck::catalog;
use dgcheck::cdga::{DGAlgebra, Element};
use dgcheck::derived::koszul;
use dgcheck::exactla::{rref_of_rows, FieldSpec, Scalar};
use dgcheck::scenario::{parse_scenario, print_scenario};
use dgcheck::strata::{compile_algebra, tensor_table, Window};

const Q: FieldSpec = FieldSpec::Q;

fn scalar_matrix(ints: &Vec<Vec<i64>>, field: FieldSpec) -> Vec<Vec<Scalar>> {
    ints.iter()
        .map(|r| r.iter().map(|&n| Scalar::from_integer(n, field)).collect())
        .collect()
}

/// A random homogeneous element in a fixed stratum of `a`, from integer
/// coefficients on the monomial basis.
fn stratum_element(a: &Arc<DGAlgebra>, deg: i32, wt: i32, coeffs: &[i64]) -> Element {
    let basis = a.basis(deg, wt);
    Element::from_terms(
        basis
            .iter()
            .zip(coeffs.iter().cycle())
            .map(|(m, &c)| (m.clone(), Scalar::from_integer(c, a.field()))),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// rref is idempotent and rank-stable.
    #[test]
    fn rref_idempotent(ints in prop::collection::vec(prop::collection::vec(-4i64..=4, 5), 1..6)) {
        let rows = scalar_matrix(&ints, Q);
        let first = rref_of_rows(&rows, 5, Q);
        let second = rref_of_rows(&first.rows, 5, Q);
        prop_assert_eq!(first.rank, second.rank);
        prop_assert_eq!(&first.rows, &second.rows);
        prop_assert_eq!(&first.pivots, &second.pivots);
    }

    /// Rank over F_p never exceeds the rank over Q, and rank + nullity
    /// equals the column count over both fields.
    #[test]
    fn rank_cross_field(ints in prop::collection::vec(prop::collection::vec(-4i64..=4, 6), 1..6)) {
        let fp = FieldSpec::fp(1009).unwrap();
        let rq = rref_of_rows(&scalar_matrix(&ints, Q), 6, Q);
        let rp = rref_of_rows(&scalar_matrix(&ints, fp), 6, fp);
        prop_assert!(rp.rank <= rq.rank);
        prop_assert_eq!(rq.rank + rq.kernel_basis.len(), 6);
        prop_assert_eq!(rp.rank + rp.kernel_basis.len(), 6);
    }

    /// Multiplication is associative and obeys the graded sign rule
    /// `x·y = (−1)^{|x||y|} y·x` on random homogeneous elements of AMP.
    #[test]
    fn multiply_assoc_and_sign(
        c1 in prop::collection::vec(-3i64..=3, 3),
        c2 in prop::collection::vec(-3i64..=3, 3),
        c3 in prop::collection::vec(-3i64..=3, 3),
        d1 in -1i32..=0, d2 in -1i32..=0,
        w1 in 0i32..=5, w2 in 0i32..=5,
    ) {
        let a = catalog::amp(Q);
        let x = stratum_element(&a, d1, w1, &c1);
        let y = stratum_element(&a, d2, w2, &c2);
        let z = stratum_element(&a, 0, 2, &c3);
        let xy_z = a.multiply(&a.multiply(&x, &y).unwrap(), &z).unwrap();
        let x_yz = a.multiply(&x, &a.multiply(&y, &z).unwrap()).unwrap();
        prop_assert!(xy_z.sub(&x_yz).is_zero());
        let xy = a.multiply(&x, &y).unwrap();
        let mut yx = a.multiply(&y, &x).unwrap();
        if (d1 * d2) % 2 != 0 {
            yx = yx.scale(&Scalar::from_integer(-1, Q));
        }
        prop_assert!(xy.sub(&yx).is_zero());
    }

    /// d² = 0 and the Leibniz rule `d(xy) = d(x)y + (−1)^{|x|} x d(y)` on
    /// random homogeneous elements.
    #[test]
    fn differential_laws(
        c1 in prop::collection::vec(-3i64..=3, 3),
        c2 in prop::collection::vec(-3i64..=3, 3),
        d1 in -2i32..=0, d2 in -2i32..=0,
        w1 in 0i32..=6, w2 in 0i32..=6,
    ) {
        let a = catalog::amp(Q);
        let x = stratum_element(&a, d1, w1, &c1);
        let y = stratum_element(&a, d2, w2, &c2);
        prop_assert!(a.differential(&a.differential(&x).unwrap()).unwrap().is_zero());
        let lhs = a.differential(&a.multiply(&x, &y).unwrap()).unwrap();
        let mut xdy = a.multiply(&x, &a.differential(&y).unwrap()).unwrap();
        if d1 % 2 != 0 {
            xdy = xdy.scale(&Scalar::from_integer(-1, Q));
        }
        let rhs = a.multiply(&a.differential(&x).unwrap(), &y).unwrap().add(&xdy);
        prop_assert!(lhs.sub(&rhs).is_zero());
    }

    /// Künneth: the cohomology table of a tensor product is the bigraded
    /// convolution of the factor tables, for every pair of shipped algebras.
    #[test]
    fn kunneth_convolution(i in 0usize..4, j in 0usize..4) {
        let algs = [catalog::p1(Q), catalog::k1(Q), catalog::d2(Q), catalog::amp(Q)];
        let (a, b) = (&algs[i], &algs[j]);
        let w = Window::new(-3, 0, 6).unwrap();
        let (t, _, _) = dgcheck::cdga::tensor_over(&catalog::trivial(Q), a, b).unwrap();
        let ha = compile_algebra(a, w.margin(2)).unwrap().cohomology(w.margin(1));
        let hb = compile_algebra(b, w.margin(2)).unwrap().cohomology(w.margin(1));
        let ht = compile_algebra(&t, w.margin(1)).unwrap().cohomology(w);
        prop_assert!(ht.agrees_with(&tensor_table(&ha, &hb, w), &w));
    }

    /// Koszul cohomology is independent of boundary perturbations of the
    /// killed element: `u² + c·d(e1)` for any scalar `c`.
    #[test]
    fn koszul_lift_independence(c in (-5i64..=5).prop_filter("c = -1 makes the lift zero", |&c| c != -1)) {
        let a = catalog::amp(Q);
        let u2 = a.pow(&a.gen_element(0), 2).unwrap();
        let perturbed = u2.add(
            &a.differential(&a.gen_element(1)).unwrap().scale(&Scalar::from_integer(c, Q)),
        );
        let w = Window::new(-3, 0, 8).unwrap();
        let (ka, _) = koszul(&a, &[u2]).unwrap();
        let (kb, _) = koszul(&a, &[perturbed]).unwrap();
        let ta = compile_algebra(&ka, w.margin(1)).unwrap().cohomology(w);
        let tb = compile_algebra(&kb, w.margin(1)).unwrap().cohomology(w);
        prop_assert!(ta.agrees_with(&tb, &w));
    }

    /// Scenario round-trip: printing a parsed scenario and parsing it again
    /// is stable, over a generated family of declarations.
    #[test]
    fn scenario_round_trip(
        wt1 in 1i32..=4, wt2 in 1i32..=4, exp in 2u32..=3,
        coef in 1i64..=4, cap in 2i32..=8, lo in -4i32..=-1,
    ) {
        let text = format!(
            "field Q\nwindow deg {lo}..0 wt {cap}\n\
             algebra A {{\n  gen x deg 0 wt {wt1}\n  gen e deg -1 wt {w} d = {coef}*x^{exp}\n}}\n\
             algebra B = extend A {{\n  gen y deg 0 wt {wt2}\n}}\n\
             map phi : A -> B {{\n  x -> x\n  e -> e\n}}\n\
             task cohomology A\ntask regular_seq B [y]\ntask amplitude B\n",
            w = wt1 * exp as i32,
        );
        let once = print_scenario(&parse_scenario(&text).unwrap());
        let twice = print_scenario(&parse_scenario(&once).unwrap());
        prop_assert_eq!(once, twice);
    }
}
