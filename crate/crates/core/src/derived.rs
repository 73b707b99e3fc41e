//! Derived constructions on top of semi-free extensions: Koszul complexes
//! (as extensions and as modules), the reduction functor `− ⊗ H⁰`, and the
//! diagonal retraction `B → B ⊗_A B → B` attached to an extension `A → B`.

use std::sync::Arc;

use crate::cdga::{tensor_over, AlgebraMap, DGAlgebra, Element, GeneratorSpec, H0Ring};
use crate::dgmod::{ModElement, ModSymbol, Ring, RingMap, SemiFreeModule};
use crate::error::{DgError, Result};
use crate::exactla::Scalar;

/// Checks that a lift is a nonzero homogeneous element of bidegree `(0, w)`
/// and returns its weight. In a non-positively graded algebra every degree-0
/// element is automatically a cycle.
fn lift_weight(a: &DGAlgebra, lift: &Element) -> Result<i32> {
    match a.bidegree(lift)? {
        Some((0, w)) if w >= 1 => Ok(w),
        Some((0, _)) => Err(DgError::Invalid(
            "Koszul lift must have positive weight".into(),
        )),
        Some(_) => Err(DgError::Invalid(
            "Koszul lift must live in degree 0".into(),
        )),
        None => Err(DgError::Invalid("Koszul lift must be nonzero".into())),
    }
}

fn fresh_name(a: &DGAlgebra, base: &str) -> String {
    let mut name = base.to_string();
    while a.gen_index(&name).is_some() {
        name.push('_');
    }
    name
}

/// The Koszul complex `K(A; a_1, …, a_n)` as a semi-free extension of `A`:
/// one odd generator `ξ_i` of bidegree `(−1, wt a_i)` with `d(ξ_i) = a_i`.
/// Returns the extension together with the inclusion of `A`.
pub fn koszul(a: &Arc<DGAlgebra>, lifts: &[Element]) -> Result<(Arc<DGAlgebra>, AlgebraMap)> {
    let arity = a.arity() + lifts.len();
    let mut gens = Vec::with_capacity(lifts.len());
    let mut diffs = Vec::with_capacity(lifts.len());
    for (i, lift) in lifts.iter().enumerate() {
        let w = lift_weight(a, lift)?;
        gens.push(GeneratorSpec::new(
            &fresh_name(a, &format!("xi{}", i + 1)),
            -1,
            w,
        ));
        diffs.push(lift.padded(arity));
    }
    a.extend(gens, diffs)
}

/// The Koszul complex `K(A; a_1, …, a_n)` as a semi-free `A`-module on the
/// exterior symbols `ξ_S`, `S ⊆ {1, …, n}`, ordered by size so the
/// differential `d(ξ_S) = Σ_j (−1)^{j−1} a_{i_j} ξ_{S∖i_j}` is triangular.
pub fn koszul_module(a: &Arc<DGAlgebra>, lifts: &[Element]) -> Result<SemiFreeModule> {
    let n = lifts.len();
    let mut wts = Vec::with_capacity(n);
    for lift in lifts {
        wts.push(lift_weight(a, lift)?);
    }
    // subsets as bitmasks, sorted by (popcount, value): sizewise blocks
    let mut subsets: Vec<u32> = (0..(1u32 << n)).collect();
    subsets.sort_by_key(|s| (s.count_ones(), *s));
    let index_of = |s: u32| subsets.iter().position(|&t| t == s).unwrap();
    let mut symbols = Vec::with_capacity(subsets.len());
    let mut diffs = Vec::with_capacity(subsets.len());
    for &s in &subsets {
        let members: Vec<usize> = (0..n).filter(|i| s & (1 << i) != 0).collect();
        let name = if members.is_empty() {
            "xi()".to_string()
        } else {
            format!(
                "xi({})",
                members
                    .iter()
                    .map(|i| (i + 1).to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            )
        };
        let wt: i32 = members.iter().map(|&i| wts[i]).sum();
        symbols.push(ModSymbol::new(&name, -(members.len() as i32), wt));
        let mut d = ModElement::zero();
        for (j, &i) in members.iter().enumerate() {
            let mut coeff = lifts[i].clone();
            if j % 2 == 1 {
                coeff = coeff.scale(&Scalar::from_integer(-1, a.field()));
            }
            d.add_component(index_of(s & !(1 << i)), coeff);
        }
        diffs.push(d);
    }
    SemiFreeModule::new(Ring::Dg(a.clone()), symbols, diffs)
}

/// The reduction functor `− ⊗ H⁰(A)` as a ring map, with H⁰ stratified up
/// to the given weight cap.
pub fn reduction(a: &Arc<DGAlgebra>, wt_cap: i32) -> Result<(Arc<H0Ring>, RingMap)> {
    let h0 = Arc::new(H0Ring::new(a, wt_cap)?);
    let f = RingMap::DgToH0 {
        source: a.clone(),
        via: None,
        target: h0.clone(),
    };
    Ok((h0, f))
}

/// The diagonal of a semi-free extension `φ : A → B`: the derived tensor
/// `E = B ⊗_A B`, the two inclusions of `B`, and the fold `Δ : E → B` with
/// `Δ ∘ ι_i = id`.
#[derive(Debug, Clone)]
pub struct Retraction {
    pub phi: AlgebraMap,
    pub e: Arc<DGAlgebra>,
    pub iota_1: AlgebraMap,
    pub iota_2: AlgebraMap,
    pub delta: AlgebraMap,
}

/// Checks that `φ` is the canonical inclusion of a semi-free extension.
pub fn check_extension(phi: &AlgebraMap) -> Result<()> {
    let (a, b) = (phi.source(), phi.target());
    let canonical = b.extends(a)
        && phi
            .images()
            .iter()
            .enumerate()
            .all(|(i, x)| *x == b.gen_element(i));
    if canonical {
        Ok(())
    } else {
        Err(DgError::Invalid(
            "map must be the inclusion of a semi-free extension".into(),
        ))
    }
}

pub fn diagonal_retraction(phi: &AlgebraMap) -> Result<Retraction> {
    check_extension(phi)?;
    let (a, b) = (phi.source(), phi.target());
    let (e, iota_1, iota_2) = tensor_over(a, b, b)?;
    let na = a.arity();
    let nb = b.arity() - na;
    let mut images = Vec::with_capacity(e.arity());
    for i in 0..na {
        images.push(b.gen_element(i));
    }
    for copy in 0..2 {
        let _ = copy;
        for j in 0..nb {
            images.push(b.gen_element(na + j));
        }
    }
    let delta = AlgebraMap::new(e.clone(), b.clone(), images)?;
    Ok(Retraction {
        phi: phi.clone(),
        e,
        iota_1,
        iota_2,
        delta,
    })
}

/// The default diagonal sequence `g_1 − g_2` over each degree-0 generator
/// that `B` adds over `A`, as elements of `E = B ⊗_A B`.
pub fn default_diagonal_sequence(r: &Retraction) -> Vec<Element> {
    let na = r.phi.source().arity();
    let nb = r.phi.target().arity() - na;
    let mut out = Vec::new();
    for j in 0..nb {
        let g = &r.phi.target().generators()[na + j];
        if g.deg == 0 {
            let first = r.e.gen_element(na + j);
            let second = r.e.gen_element(na + nb + j);
            out.push(first.sub(&second));
        }
    }
    out
}

/// Structural test for the one class of maps whose flatness is decidable
/// here: extensions by degree-0 generators with zero differential
/// (polynomial extensions).
pub fn is_polynomial_extension(phi: &AlgebraMap) -> bool {
    if check_extension(phi).is_err() {
        return false;
    }
    let (a, b) = (phi.source(), phi.target());
    (a.arity()..b.arity())
        .all(|i| b.generators()[i].deg == 0 && b.diff_of_gen(i).is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::exactla::FieldSpec;
    use crate::strata::{compile_algebra, Window};

    const Q: FieldSpec = FieldSpec::Q;

    fn win(lo: i32, hi: i32, cap: i32) -> Window {
        Window::new(lo, hi, cap).unwrap()
    }

    #[test]
    fn koszul_on_x_reproduces_the_shipped_model() {
        let p1 = catalog::p1(Q);
        let (k, incl) = koszul(&p1, &[p1.gen_element(0)]).unwrap();
        assert!(incl.violations().unwrap().is_empty());
        let w = win(-2, 0, 4);
        let t = compile_algebra(&k, w.margin(1)).unwrap().cohomology(w);
        let t2 = compile_algebra(&catalog::k1(Q), w.margin(1))
            .unwrap()
            .cohomology(w);
        assert_eq!(t, t2);
    }

    #[test]
    fn koszul_module_matches_koszul_extension() {
        let e = catalog::poly2(Q);
        let seq = vec![e.gen_element(0), e.gen_element(1)];
        let m = koszul_module(&e, &seq).unwrap();
        let (kalg, _) = koszul(&e, &seq).unwrap();
        let w = win(-3, 0, 5);
        assert_eq!(
            m.cohomology(w).unwrap(),
            compile_algebra(&kalg, w.margin(1)).unwrap().cohomology(w)
        );
    }

    #[test]
    fn koszul_is_independent_of_the_lift() {
        // in AMP, u² is a boundary (u² = d(e1)); any two degree-0 lifts of
        // the same class give quasi-isomorphic Koszul complexes
        let amp = catalog::amp(Q);
        let u2 = amp.pow(&amp.gen_element(0), 2).unwrap();
        let boundary = amp.differential(&amp.gen_element(1)).unwrap();
        let lift2 = u2.add(&boundary);
        let (k1, _) = koszul(&amp, &[u2]).unwrap();
        let (k2, _) = koszul(&amp, &[lift2]).unwrap();
        let w = win(-3, 0, 8);
        let t1 = compile_algebra(&k1, w.margin(1)).unwrap().cohomology(w);
        let t2 = compile_algebra(&k2, w.margin(1)).unwrap().cohomology(w);
        assert_eq!(t1, t2);
    }

    #[test]
    fn reduction_of_free_module_gives_h0() {
        let amp = catalog::amp(Q);
        let (_, f) = reduction(&amp, 6).unwrap();
        let m = SemiFreeModule::from_algebra(&amp).pushforward(&f).unwrap();
        let t = m.cohomology(win(0, 0, 6)).unwrap();
        assert_eq!(t.row(0), vec![1, 1, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn diagonal_retraction_of_the_affine_line() {
        let triv = catalog::trivial(Q);
        let p1 = catalog::p1(Q);
        let phi = AlgebraMap::new(triv, p1.clone(), vec![]).unwrap();
        let r = diagonal_retraction(&phi).unwrap();
        assert_eq!(r.e.arity(), 2);
        assert!(r.iota_1.compose(&r.delta).unwrap().is_identity());
        assert!(r.iota_2.compose(&r.delta).unwrap().is_identity());
        let seq = default_diagonal_sequence(&r);
        assert_eq!(seq.len(), 1);
        assert_eq!(
            seq[0],
            r.e.gen_element(0).sub(&r.e.gen_element(1))
        );
    }

    #[test]
    fn default_sequence_skips_odd_generators() {
        // K1 adds x (degree 0) and e (degree −1) over k; only x contributes
        let triv = catalog::trivial(Q);
        let k1 = catalog::k1(Q);
        let phi = AlgebraMap::new(triv, k1, vec![]).unwrap();
        let r = diagonal_retraction(&phi).unwrap();
        let seq = default_diagonal_sequence(&r);
        assert_eq!(seq.len(), 1);
    }

    #[test]
    fn polynomial_extension_detection() {
        let triv = catalog::trivial(Q);
        let p1 = catalog::p1(Q);
        let amp = catalog::amp(Q);
        let (bamp, incl) = catalog::b_amp(Q);
        let _ = bamp;
        assert!(is_polynomial_extension(
            &AlgebraMap::new(triv.clone(), p1, vec![]).unwrap()
        ));
        assert!(is_polynomial_extension(&incl));
        // K1 adds an odd generator
        assert!(!is_polynomial_extension(
            &AlgebraMap::new(triv.clone(), catalog::k1(Q), vec![]).unwrap()
        ));
        // AMP has non-polynomial structure over k
        assert!(!is_polynomial_extension(
            &AlgebraMap::new(triv, amp, vec![]).unwrap()
        ));
    }
}
