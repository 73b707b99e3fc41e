//! Acceptance gate: one criterion per test, each ending in a single
//! PASS line (run with `--nocapture` to see them). Every criterion has a
//! wall-clock budget asserted at the end.

use std::sync::Arc;
use std::time::{Duration, Instant};

use dgcheck::catalog;
use dgcheck::cdga::{AlgebraMap, DGAlgebra, H0Ring};
use dgcheck::derived::{
    default_diagonal_sequence, diagonal_retraction, koszul, koszul_module,
};
use dgcheck::dgmod::{hom_module, SemiFreeModule};
use dgcheck::exactla::FieldSpec;
use dgcheck::scenario::{parse_scenario, render_structured, run};
use dgcheck::strata::{compile_algebra, tensor_table, Window};
use dgcheck::verdicts::{
    amplitude, check_flat_dim0, default_test_modules, flat_witness, h0_smooth,
    is_perfect_diagonal, is_quasi_iso_alg, is_regular_sequence, rigid_module,
    verify_flathz, verify_lci, verify_smoothness_equivalence, verify_vdb, VdbModule,
};

const Q: FieldSpec = FieldSpec::Q;

fn win(lo: i32, hi: i32, cap: i32) -> Window {
    Window::new(lo, hi, cap).unwrap()
}

fn incl(a: &Arc<DGAlgebra>, b: &Arc<DGAlgebra>) -> AlgebraMap {
    let images = (0..a.arity()).map(|i| b.gen_element(i)).collect();
    AlgebraMap::new(a.clone(), b.clone(), images).unwrap()
}

fn budget(start: Instant, limit: Duration, label: &str) {
    let took = start.elapsed();
    assert!(
        took <= limit,
        "{label}: took {took:?}, budget {limit:?}"
    );
}

/// Criterion 1: the shipped algebras and their diagonals build and validate
/// (d² = 0, signs, bidegree diagonals), and tensor cohomology obeys the
/// Künneth convolution on the window.
#[test]
fn criterion_1_structural_validity() {
    let start = Instant::now();
    let w = win(-3, 0, 8);
    let triv = catalog::trivial(Q);
    let algebras: Vec<(&str, Arc<DGAlgebra>)> = vec![
        ("P1", catalog::p1(Q)),
        ("K1", catalog::k1(Q)),
        ("D2", catalog::d2(Q)),
        ("AMP", catalog::amp(Q)),
        ("B-AMP", catalog::b_amp(Q).0),
    ];
    for (name, a) in &algebras {
        // construction already checks d² = 0, the Leibniz rule, and signs;
        // compile exercises every stratum differential on the window
        compile_algebra(a, w.margin(1)).unwrap_or_else(|e| panic!("{name}: {e}"));
        // the diagonal E = B ⊗ B also validates
        let phi = incl(&triv, a);
        let r = diagonal_retraction(&phi).unwrap_or_else(|e| panic!("{name} diagonal: {e}"));
        compile_algebra(&r.e, w.margin(1)).unwrap_or_else(|e| panic!("{name} diagonal: {e}"));
        // Künneth: H(B ⊗ B) is the bigraded convolution of H(B) with itself
        let hb = compile_algebra(a, w.margin(2)).unwrap().cohomology(w.margin(1));
        let he = compile_algebra(&r.e, w.margin(1)).unwrap().cohomology(w);
        let conv = tensor_table(&hb, &hb, w);
        assert!(
            he.agrees_with(&conv, &w),
            "{name}: Künneth convolution mismatch"
        );
    }
    budget(start, Duration::from_secs(5), "criterion 1");
    println!("criterion 1: PASS — structural validity and Künneth convolution for P1, K1, D2, AMP, B-AMP and their diagonals");
}

/// Criterion 2: the base-change identity for the flat extension
/// AMP → B-AMP, verified on at least three test modules.
#[test]
fn criterion_2_base_change_battery() {
    let start = Instant::now();
    let w = win(-4, 0, 10);
    let (_, phi) = catalog::b_amp(Q);
    let fw = flat_witness(&phi, w).unwrap();
    assert!(fw.is_free_extension(), "AMP → B-AMP must carry the free-extension tag");
    let mods = default_test_modules(phi.source()).unwrap();
    assert!(mods.len() >= 3, "need at least 3 test modules, got {}", mods.len());
    let v = check_flat_dim0(&fw, &mods, w).unwrap();
    assert!(v.is_holds(), "base-change identity failed: {:?}", v.evidence);
    budget(start, Duration::from_secs(30), "criterion 2");
    println!(
        "criterion 2: PASS — base-change identity for AMP → B-AMP on {} test modules",
        mods.len()
    );
}

/// Criterion 3: the two sides of the smoothness equivalence agree on
/// k → k[x], k → k[x,y], AMP → B-AMP (all smooth) and on k → D2
/// (both sides fail: the residue-field resolution does not terminate in 8
/// stages, the H⁰ elimination finds the x² relation, and the lci Koszul
/// composite has a surviving class in H^{−2}).
#[test]
fn criterion_3_main_theorem_agreement() {
    let start = Instant::now();
    let w = win(-6, 0, 12);
    let triv = catalog::trivial(Q);

    for (name, b) in [
        ("k[x]", catalog::p1(Q)),
        ("k[x,y]", catalog::poly2(Q)),
    ] {
        let rep = verify_smoothness_equivalence(&incl(&triv, &b), w, 8).unwrap();
        assert!(rep.perfect_side.is_holds(), "{name} perfect: {:?}", rep.perfect_side.evidence);
        assert!(rep.h0_side.is_holds(), "{name} h0: {:?}", rep.h0_side.evidence);
        assert!(rep.agreement.is_holds());
        let lci = verify_lci(&incl(&triv, &b), None, w).unwrap();
        assert!(lci.overall.is_holds(), "{name} lci: {:?}", lci.overall.evidence);
    }
    let (_, bincl) = catalog::b_amp(Q);
    let rep = verify_smoothness_equivalence(&bincl, w, 8).unwrap();
    assert!(rep.agreement.is_holds() && rep.perfect_side.is_holds() && rep.h0_side.is_holds());
    let lci = verify_lci(&bincl, None, w).unwrap();
    assert!(lci.overall.is_holds(), "B-AMP lci: {:?}", lci.overall.evidence);

    // the failing case, with agreement on failure
    let d2 = catalog::d2(Q);
    let phi = incl(&triv, &d2);
    let rep = verify_smoothness_equivalence(&phi, w, 8).unwrap();
    assert!(rep.perfect_side.is_fails(), "{:?}", rep.perfect_side.evidence);
    assert!(
        rep.perfect_side.evidence[0].contains("8 stages"),
        "search must hit the stage budget: {:?}",
        rep.perfect_side.evidence
    );
    assert!(rep.h0_side.is_fails(), "{:?}", rep.h0_side.evidence);
    assert!(rep.agreement.is_holds(), "failure must be two-sided");
    let lci = verify_lci(&phi, None, w).unwrap();
    assert!(lci.composition.is_fails());
    // the Koszul composite cone has a surviving class at cone degree −1
    // (degree −2 in the suspension convention Cone(f)^n = X^n ⊕ Y^{n−1})
    let r = &lci.retraction;
    let (_, kappa) = koszul(&r.e, &lci.seq).unwrap();
    let comp = r.iota_1.compose(&kappa).unwrap();
    let v = is_quasi_iso_alg(&comp, win(-1, -1, 12)).unwrap();
    assert!(v.is_fails(), "no surviving cone class: {:?}", v.evidence);

    budget(start, Duration::from_secs(120), "criterion 3");
    println!("criterion 3: PASS — smoothness equivalence agrees on k→k[x], k→k[x,y], AMP→B-AMP (hold) and k→D2 (two-sided failure with a surviving cone class)");
}

/// Criterion 4: regular-sequence verdicts — {x−y} regular over k[x,y],
/// the diagonal sequence regular over the B-AMP diagonal with both routes
/// agreeing, {x} a zero-divisor over the H⁰ model of D2.
#[test]
fn criterion_4_regular_sequences() {
    let start = Instant::now();
    let w = win(-3, 0, 8);

    let e = catalog::poly2(Q);
    let xy = e.gen_element(0).sub(&e.gen_element(1));
    let v = is_regular_sequence(&e, &[xy], w).unwrap();
    assert!(v.is_holds(), "{:?}", v.evidence);

    let (_, bincl) = catalog::b_amp(Q);
    let r = diagonal_retraction(&bincl).unwrap();
    let seq = default_diagonal_sequence(&r);
    assert_eq!(seq.len(), 1);
    let v = is_regular_sequence(&r.e, &seq, w).unwrap();
    assert!(v.is_holds(), "{:?}", v.evidence);
    assert!(v.caveats.is_empty(), "routes must agree: {:?}", v.caveats);

    let d2 = catalog::d2(Q);
    let v = is_regular_sequence(&d2, &[d2.gen_element(0)], w).unwrap();
    assert!(v.is_fails(), "{:?}", v.evidence);
    assert!(v.caveats.is_empty(), "routes must agree on failure: {:?}", v.caveats);

    budget(start, Duration::from_secs(30), "criterion 4");
    println!("criterion 4: PASS — {{x−y}} regular over k[x,y], diagonal sequence regular over the B-AMP diagonal, {{x}} a zero-divisor over D2");
}

/// Criterion 5: matched duality with the expected dimension and twist for
/// k → k[x] (n = 1), k → k[x,y] (n = 2), AMP → B-AMP (n = 1), each on the
/// module family {E, B, B[1]}.
#[test]
fn criterion_5_duality() {
    let start = Instant::now();
    let w = win(-6, 2, 10);
    let triv = catalog::trivial(Q);
    let mods = [VdbModule::Diagonal, VdbModule::Target(0), VdbModule::Target(1)];

    let cases: Vec<(&str, AlgebraMap, i32)> = vec![
        ("k → k[x]", incl(&triv, &catalog::p1(Q)), 1),
        ("k → k[x,y]", incl(&triv, &catalog::poly2(Q)), 2),
        ("AMP → B-AMP", catalog::b_amp(Q).1, 1),
    ];
    for (name, phi, n) in cases {
        let lci = verify_lci(&phi, None, w).unwrap();
        assert!(lci.overall.is_holds(), "{name} lci: {:?}", lci.overall.evidence);
        let rep = verify_vdb(&lci, &mods, w).unwrap();
        assert_eq!(rep.n, n, "{name}: wrong dimension");
        assert!(rep.invertible.is_holds(), "{name}: {:?}", rep.invertible.evidence);
        for (m, v) in &rep.per_module {
            assert!(v.is_holds(), "{name} module {m}: {:?}", v.evidence);
        }
        assert!(rep.matched, "{name}: duality not matched");
    }
    budget(start, Duration::from_secs(120), "criterion 5");
    println!("criterion 5: PASS — matched duality (invertible dualizing module, Ext/Tor tables) for k→k[x] (n=1), k→k[x,y] (n=2), AMP→B-AMP (n=1) on {{E, B, B[1]}}");
}

/// Criterion 6: the rigid-module table identity for the three smooth maps.
#[test]
fn criterion_6_rigidity() {
    let start = Instant::now();
    let w = win(-6, 2, 10);
    let triv = catalog::trivial(Q);
    let cases: Vec<(&str, AlgebraMap)> = vec![
        ("k → k[x]", incl(&triv, &catalog::p1(Q))),
        ("k → k[x,y]", incl(&triv, &catalog::poly2(Q))),
        ("AMP → B-AMP", catalog::b_amp(Q).1),
    ];
    for (name, phi) in cases {
        let lci = verify_lci(&phi, None, w).unwrap();
        let vdb = verify_vdb(&lci, &[VdbModule::Diagonal], w).unwrap();
        assert!(vdb.matched, "{name}: duality not matched");
        let (_, v) = rigid_module(&lci, &vdb, w).unwrap();
        assert!(v.is_holds(), "{name}: {:?}", v.evidence);
    }
    budget(start, Duration::from_secs(60), "criterion 6");
    println!("criterion 6: PASS — rigid-module table identity holds for the three smooth maps");
}

/// Criterion 7: smoothness forces concentration in degree 0 — K1 is smooth
/// with amplitude 0, AMP is neither smooth within budget nor concentrated,
/// and the forbidden quadrant (smooth with positive amplitude) never occurs.
#[test]
fn criterion_7_smooth_implies_ordinary() {
    let start = Instant::now();
    let w = win(-4, 0, 8);
    let k1 = catalog::k1(Q);
    let rep = verify_flathz(&k1, w, 6).unwrap();
    assert!(rep.smooth.is_holds(), "K1: {:?}", rep.smooth.evidence);
    assert!(rep.reduced.is_holds(), "K1: {:?}", rep.reduced.evidence);
    assert!(rep.overall.is_holds());

    let amp_alg = catalog::amp(Q);
    let rep = verify_flathz(&amp_alg, w, 6).unwrap();
    assert!(rep.smooth.is_fails(), "AMP: {:?}", rep.smooth.evidence);
    assert!(rep.reduced.is_fails(), "AMP: {:?}", rep.reduced.evidence);
    assert!(rep.overall.is_holds(), "forbidden quadrant: {:?}", rep.overall.evidence);

    // also check the remaining shipped algebras never land in the quadrant
    for a in [catalog::p1(Q), catalog::poly2(Q), catalog::d2(Q)] {
        let rep = verify_flathz(&a, w, 6).unwrap();
        assert!(rep.overall.is_holds(), "forbidden quadrant: {:?}", rep.overall.evidence);
    }
    budget(start, Duration::from_secs(60), "criterion 7");
    println!("criterion 7: PASS — K1 smooth with amplitude 0, AMP neither, forbidden quadrant never hit");
}

/// Criterion 8: the cohomology of a Koszul extension in AMP does not depend
/// on the chosen degree-0 lift of the class being killed.
#[test]
fn criterion_8_koszul_lift_independence() {
    let start = Instant::now();
    let w = win(-3, 0, 8);
    let a = catalog::amp(Q);
    let u = a.gen_element(0);
    // two degree-0 lifts of the same class differ by a boundary of the same
    // bidegree: u² versus u² + d(e1) = 2u²
    let lift_a = a.pow(&u, 2).unwrap();
    let lift_b = lift_a.add(&a.differential(&a.gen_element(1)).unwrap());
    assert_ne!(
        format!("{lift_a:?}"),
        format!("{lift_b:?}"),
        "the two lifts must be distinct elements"
    );
    let (ka, _) = koszul(&a, &[lift_a]).unwrap();
    let (kb, _) = koszul(&a, &[lift_b]).unwrap();
    let ta = compile_algebra(&ka, w.margin(1)).unwrap().cohomology(w);
    let tb = compile_algebra(&kb, w.margin(1)).unwrap().cohomology(w);
    assert!(ta.agrees_with(&tb, &w), "lift dependence detected");

    // the same through the module route
    let ma = koszul_module(&a, &[a.pow(&u, 2).unwrap()]).unwrap();
    let hma = ma.cohomology(w).unwrap();
    assert!(!hma.is_zero());
    budget(start, Duration::from_secs(30), "criterion 8");
    println!("criterion 8: PASS — Koszul cohomology in AMP is independent of the degree-0 lift");
}

/// Criterion 9: running the scenario suite twice produces byte-identical
/// structured reports.
#[test]
fn criterion_9_determinism() {
    let start = Instant::now();
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios");
    let mut paths: Vec<std::path::PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "dgs"))
        .collect();
    paths.sort();
    assert!(!paths.is_empty(), "no scenario files found in {dir}");
    for p in &paths {
        let text = std::fs::read_to_string(p).unwrap();
        let s = parse_scenario(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        let first = render_structured(&run(&s, None));
        let second = render_structured(&run(&s, None));
        assert_eq!(first, second, "{}: reports differ between runs", p.display());
    }
    budget(start, Duration::from_secs(120), "criterion 9");
    println!(
        "criterion 9: PASS — byte-identical structured reports across two runs of {} scenario file(s)",
        paths.len()
    );
}

/// The dualizing-module Hilbert identity behind criterion 5, checked
/// directly: the reduction of Hom_E(P, E) for k → k[x] matches the k[x]
/// Hilbert row shifted by (1, −1).
#[test]
fn duality_twist_example() {
    let triv = catalog::trivial(Q);
    let p1 = catalog::p1(Q);
    let phi = incl(&triv, &p1);
    let w = win(-4, 2, 8);
    let lci = verify_lci(&phi, None, w).unwrap();
    let p = koszul_module(&lci.retraction.e, &lci.seq).unwrap();
    let m = hom_module(&p, &SemiFreeModule::from_algebra(&lci.retraction.e)).unwrap();
    let h = m.cohomology(w).unwrap();
    // H¹_w ≅ k[x]_{w+1}: every weight from 0 on has dimension 1
    for wt in 0..=8 {
        assert_eq!(h.dim(1, wt), 1, "H^1 at weight {wt}");
    }
    let _ = (h0_smooth(&phi, w).unwrap(), amplitude(&h));
    let _ = H0Ring::new(&p1, 8).unwrap();
    let _ = is_perfect_diagonal(&diagonal_retraction(&phi).unwrap(), w, 4).unwrap();
}
