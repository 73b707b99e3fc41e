//! Finitely presented free graded-commutative non-positive DG-algebras.
//!
//! An algebra is free on an ordered list of bigraded generators (cohomological
//! degree ≤ 0, weight ≥ 1) with a semi-free differential: `d(g)` only involves
//! strictly earlier generators, raises degree by one, preserves weight, and
//! squares to zero. Multiplication carries the Koszul sign
//! `b·a = (−1)^{deg(a)·deg(b)}·a·b`, and odd generators square to zero in
//! every characteristic.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{DgError, Result};
use crate::exactla::{quotient_basis, reduce_mod_rows, rref_of_rows, FieldSpec, Rref, Scalar};

/// A bigraded generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSpec {
    pub name: String,
    pub deg: i32,
    pub wt: i32,
}

impl GeneratorSpec {
    pub fn new(name: &str, deg: i32, wt: i32) -> GeneratorSpec {
        GeneratorSpec {
            name: name.to_string(),
            deg,
            wt,
        }
    }

    pub fn is_odd(&self) -> bool {
        self.deg.rem_euclid(2) == 1
    }
}

/// A monomial in the generators, stored as an exponent vector. The canonical
/// monomial order is lexicographic in the exponent vector, which is fixed so
/// bases and reports are reproducible.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Monomial {
    exps: Vec<u32>,
}

impl Monomial {
    pub fn one(arity: usize) -> Monomial {
        Monomial {
            exps: vec![0; arity],
        }
    }

    pub fn from_exps(exps: Vec<u32>) -> Monomial {
        Monomial { exps }
    }

    pub fn generator(arity: usize, idx: usize) -> Monomial {
        let mut exps = vec![0; arity];
        exps[idx] = 1;
        Monomial { exps }
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn arity(&self) -> usize {
        self.exps.len()
    }

    pub fn is_one(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    fn padded(&self, arity: usize) -> Monomial {
        let mut exps = self.exps.clone();
        assert!(exps.len() <= arity);
        exps.resize(arity, 0);
        Monomial { exps }
    }
}

/// A finite linear combination of monomials. Zero coefficients are never
/// stored. Homogeneity is checked against an algebra where it matters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    terms: BTreeMap<Monomial, Scalar>,
}

impl Element {
    pub fn zero() -> Element {
        Element {
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, Scalar)>) -> Element {
        let mut out = Element::zero();
        for (m, s) in terms {
            out.add_term(&m, &s);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, m: &Monomial, s: &Scalar) {
        if s.is_zero() {
            return;
        }
        match self.terms.get_mut(m) {
            Some(cur) => {
                let next = cur.add(s);
                if next.is_zero() {
                    self.terms.remove(m);
                } else {
                    *cur = next;
                }
            }
            None => {
                self.terms.insert(m.clone(), s.clone());
            }
        }
    }

    pub fn add(&self, other: &Element) -> Element {
        let mut out = self.clone();
        for (m, s) in &other.terms {
            out.add_term(m, s);
        }
        out
    }

    pub fn sub(&self, other: &Element) -> Element {
        self.add(&other.scale_neg())
    }

    fn scale_neg(&self) -> Element {
        Element {
            terms: self
                .terms
                .iter()
                .map(|(m, s)| (m.clone(), s.neg()))
                .collect(),
        }
    }

    pub fn scale(&self, s: &Scalar) -> Element {
        if s.is_zero() {
            return Element::zero();
        }
        Element {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c.mul(s)))
                .collect(),
        }
    }

    /// Re-embeds an element of a base algebra into an extension.
    pub fn padded(&self, arity: usize) -> Element {
        Element {
            terms: self
                .terms
                .iter()
                .map(|(m, s)| (m.padded(arity), s.clone()))
                .collect(),
        }
    }
}

/// A finitely presented free graded-commutative DG-algebra over the base
/// field, possibly a semi-free extension of a recorded base algebra.
#[derive(Debug)]
pub struct DGAlgebra {
    field: FieldSpec,
    gens: Vec<GeneratorSpec>,
    diffs: Vec<Element>,
    base_len: usize,
    base: Option<Arc<DGAlgebra>>,
}

impl DGAlgebra {
    /// Builds and validates an algebra presentation. Rejects positive-degree
    /// or non-positive-weight generators, inhomogeneous differentials,
    /// differentials touching later generators, and any `d² ≠ 0`.
    pub fn new(
        field: FieldSpec,
        gens: Vec<GeneratorSpec>,
        diffs: Vec<Element>,
    ) -> Result<Arc<DGAlgebra>> {
        Self::build(field, gens, diffs, 0, None)
    }

    fn build(
        field: FieldSpec,
        gens: Vec<GeneratorSpec>,
        diffs: Vec<Element>,
        base_len: usize,
        base: Option<Arc<DGAlgebra>>,
    ) -> Result<Arc<DGAlgebra>> {
        if gens.len() != diffs.len() {
            return Err(DgError::Presentation(
                "one differential required per generator".into(),
            ));
        }
        for (i, g) in gens.iter().enumerate() {
            if g.deg > 0 {
                return Err(DgError::Presentation(format!(
                    "generator {} has positive cohomological degree {}",
                    g.name, g.deg
                )));
            }
            if g.wt < 1 {
                return Err(DgError::Presentation(format!(
                    "generator {} has weight {} < 1",
                    g.name, g.wt
                )));
            }
            if gens[..i].iter().any(|h| h.name == g.name) {
                return Err(DgError::Presentation(format!(
                    "duplicate generator name {}",
                    g.name
                )));
            }
        }
        let algebra = DGAlgebra {
            field,
            gens,
            diffs,
            base_len,
            base,
        };
        algebra.validate()?;
        Ok(Arc::new(algebra))
    }

    fn validate(&self) -> Result<()> {
        let arity = self.gens.len();
        for (i, d) in self.diffs.iter().enumerate() {
            for (m, s) in d.terms() {
                if m.arity() != arity {
                    return Err(DgError::Presentation(format!(
                        "differential of {} has wrong arity",
                        self.gens[i].name
                    )));
                }
                if s.field() != self.field {
                    return Err(DgError::FieldMismatch);
                }
                if m.exps()[i..].iter().any(|&e| e > 0) {
                    return Err(DgError::Presentation(format!(
                        "differential of {} involves {} or a later generator",
                        self.gens[i].name, self.gens[i].name
                    )));
                }
            }
            let expect = (self.gens[i].deg + 1, self.gens[i].wt);
            if let Some(bd) = self.bidegree(d)? {
                if bd != expect {
                    return Err(DgError::Presentation(format!(
                        "differential of {} has bidegree ({}, {}), expected ({}, {})",
                        self.gens[i].name, bd.0, bd.1, expect.0, expect.1
                    )));
                }
            }
        }
        for (i, d) in self.diffs.iter().enumerate() {
            let dd = self.differential(d)?;
            if !dd.is_zero() {
                return Err(DgError::Presentation(format!(
                    "d² ≠ 0 on generator {}",
                    self.gens[i].name
                )));
            }
        }
        Ok(())
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn generators(&self) -> &[GeneratorSpec] {
        &self.gens
    }

    pub fn arity(&self) -> usize {
        self.gens.len()
    }

    pub fn diff_of_gen(&self, i: usize) -> &Element {
        &self.diffs[i]
    }

    pub fn base(&self) -> Option<&Arc<DGAlgebra>> {
        self.base.as_ref()
    }

    pub fn base_len(&self) -> usize {
        self.base_len
    }

    pub fn gen_index(&self, name: &str) -> Option<usize> {
        self.gens.iter().position(|g| g.name == name)
    }

    pub fn gen_element(&self, i: usize) -> Element {
        Element::from_terms([(
            Monomial::generator(self.arity(), i),
            Scalar::one(self.field),
        )])
    }

    pub fn one(&self) -> Element {
        Element::from_terms([(Monomial::one(self.arity()), Scalar::one(self.field))])
    }

    pub fn monomial_bidegree(&self, m: &Monomial) -> (i32, i32) {
        let mut deg = 0i32;
        let mut wt = 0i32;
        for (i, &e) in m.exps().iter().enumerate() {
            deg += self.gens[i].deg * e as i32;
            wt += self.gens[i].wt * e as i32;
        }
        (deg, wt)
    }

    /// Common bidegree of all terms; `None` for the zero element; an error for
    /// inhomogeneous elements.
    pub fn bidegree(&self, x: &Element) -> Result<Option<(i32, i32)>> {
        let mut out = None;
        for (m, _) in x.terms() {
            if m.arity() != self.arity() {
                return Err(DgError::Invalid("element has wrong arity".into()));
            }
            let bd = self.monomial_bidegree(m);
            match out {
                None => out = Some(bd),
                Some(prev) if prev != bd => {
                    return Err(DgError::Invalid(format!(
                        "inhomogeneous element: bidegrees ({}, {}) and ({}, {})",
                        prev.0, prev.1, bd.0, bd.1
                    )))
                }
                _ => {}
            }
        }
        Ok(out)
    }

    fn check_arity(&self, x: &Element) -> Result<()> {
        for (m, s) in x.terms() {
            if m.arity() != self.arity() {
                return Err(DgError::Invalid(
                    "element does not belong to this algebra".into(),
                ));
            }
            if s.field() != self.field {
                return Err(DgError::FieldMismatch);
            }
        }
        Ok(())
    }

    /// Product of two monomials: `None` when an odd generator repeats, else
    /// the Koszul sign and the normal-ordered result.
    fn mul_monomials(&self, a: &Monomial, b: &Monomial) -> Option<(bool, Monomial)> {
        let mut exps = Vec::with_capacity(self.arity());
        // odd letters of b move left past odd letters of a with larger index
        let mut odd_passes = 0u32;
        let odd_count_a: Vec<u32> = (0..self.arity())
            .map(|i| {
                if self.gens[i].is_odd() {
                    a.exps()[i]
                } else {
                    0
                }
            })
            .collect();
        let total_odd_a: u32 = odd_count_a.iter().sum();
        let mut seen_odd_a = 0u32;
        for j in 0..self.arity() {
            let ea = a.exps()[j];
            let eb = b.exps()[j];
            if self.gens[j].is_odd() {
                if ea + eb > 1 {
                    return None; // odd square
                }
                if eb == 1 {
                    // passes every odd letter of a strictly above j
                    odd_passes += total_odd_a - seen_odd_a - odd_count_a[j];
                }
                seen_odd_a += odd_count_a[j];
            }
            exps.push(ea + eb);
        }
        Some((odd_passes % 2 == 1, Monomial { exps }))
    }

    /// Graded-commutative product.
    pub fn multiply(&self, x: &Element, y: &Element) -> Result<Element> {
        self.check_arity(x)?;
        self.check_arity(y)?;
        let mut out = Element::zero();
        for (ma, sa) in x.terms() {
            for (mb, sb) in y.terms() {
                if let Some((neg, m)) = self.mul_monomials(ma, mb) {
                    let mut s = sa.mul(sb);
                    if neg {
                        s = s.neg();
                    }
                    out.add_term(&m, &s);
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, x: &Element, n: u32) -> Result<Element> {
        let mut acc = self.one();
        for _ in 0..n {
            acc = self.multiply(&acc, x)?;
        }
        Ok(acc)
    }

    /// The differential, extended from the generators by the Leibniz rule
    /// `d(a·b) = d(a)·b + (−1)^{deg(a)}·a·d(b)`.
    pub fn differential(&self, x: &Element) -> Result<Element> {
        self.check_arity(x)?;
        let mut out = Element::zero();
        for (m, coeff) in x.terms() {
            for i in 0..self.arity() {
                let e = m.exps()[i];
                if e == 0 || self.diffs[i].is_zero() {
                    continue;
                }
                // m = P · g_i^e · S with P the letters before i
                let mut head = vec![0u32; self.arity()];
                head[..i].copy_from_slice(&m.exps()[..i]);
                let mut mid = vec![0u32; self.arity()];
                mid[i] = e - 1;
                let mut tail = vec![0u32; self.arity()];
                tail[i + 1..].copy_from_slice(&m.exps()[i + 1..]);
                let deg_head: i32 = (0..i).map(|j| self.gens[j].deg * m.exps()[j] as i32).sum();

                let head_e = Element::from_terms([(
                    Monomial { exps: head },
                    Scalar::one(self.field),
                )]);
                let mid_e =
                    Element::from_terms([(Monomial { exps: mid }, Scalar::one(self.field))]);
                let tail_e = Element::from_terms([(
                    Monomial { exps: tail },
                    Scalar::one(self.field),
                )]);
                let mut term = self.multiply(&head_e, &mid_e)?;
                term = self.multiply(&term, &self.diffs[i])?;
                term = self.multiply(&term, &tail_e)?;
                let mut s = coeff.mul(&Scalar::from_integer(e as i64, self.field));
                if deg_head.rem_euclid(2) == 1 {
                    s = s.neg();
                }
                out = out.add(&term.scale(&s));
            }
        }
        Ok(out)
    }

    /// Complete, duplicate-free, deterministically ordered monomial basis of
    /// the `(deg, wt)` stratum.
    pub fn basis(&self, deg: i32, wt: i32) -> Vec<Monomial> {
        let mut out = Vec::new();
        if wt < 0 {
            return out;
        }
        let mut exps = vec![0u32; self.arity()];
        self.enumerate_basis(0, deg, wt, &mut exps, &mut out);
        out.sort();
        out
    }

    fn enumerate_basis(
        &self,
        i: usize,
        deg: i32,
        wt: i32,
        exps: &mut Vec<u32>,
        out: &mut Vec<Monomial>,
    ) {
        if i == self.arity() {
            if deg == 0 && wt == 0 {
                out.push(Monomial { exps: exps.clone() });
            }
            return;
        }
        let g = &self.gens[i];
        let max_e = if g.is_odd() {
            1
        } else {
            (wt / g.wt).max(0) as u32
        };
        for e in 0..=max_e {
            let w = wt - g.wt * e as i32;
            if w < 0 {
                break;
            }
            exps[i] = e;
            self.enumerate_basis(i + 1, deg - g.deg * e as i32, w, exps, out);
        }
        exps[i] = 0;
    }

    /// Coordinates of a homogeneous element in the stratum basis.
    pub fn coords(&self, x: &Element, basis: &[Monomial]) -> Result<Vec<Scalar>> {
        let mut v = vec![Scalar::zero(self.field); basis.len()];
        for (m, s) in x.terms() {
            match basis.binary_search(m) {
                Ok(idx) => v[idx] = s.clone(),
                Err(_) => {
                    return Err(DgError::Invalid(format!(
                        "monomial {} not in stratum basis",
                        self.format_monomial(m)
                    )))
                }
            }
        }
        Ok(v)
    }

    pub fn element_from_coords(&self, basis: &[Monomial], v: &[Scalar]) -> Element {
        Element::from_terms(
            basis
                .iter()
                .zip(v.iter())
                .map(|(m, s)| (m.clone(), s.clone())),
        )
    }

    /// Semi-free extension by new generators. The returned map is the
    /// inclusion.
    pub fn extend(
        self: &Arc<Self>,
        newgens: Vec<GeneratorSpec>,
        newdiffs: Vec<Element>,
    ) -> Result<(Arc<DGAlgebra>, AlgebraMap)> {
        let arity = self.arity() + newgens.len();
        let mut gens = self.gens.clone();
        gens.extend(newgens);
        let mut diffs: Vec<Element> = self.diffs.iter().map(|d| d.padded(arity)).collect();
        for d in newdiffs {
            if d.terms().any(|(m, _)| m.arity() != arity) {
                return Err(DgError::Invalid(
                    "extension differential has wrong arity".into(),
                ));
            }
            diffs.push(d);
        }
        let ext = DGAlgebra::build(self.field, gens, diffs, self.arity(), Some(self.clone()))?;
        let images = (0..self.arity()).map(|i| ext.gen_element(i)).collect();
        let inclusion = AlgebraMap::new(self.clone(), ext.clone(), images)?;
        Ok((ext, inclusion))
    }

    /// Structural test: is `self` an iterated semi-free extension of `a`?
    pub fn extends(&self, a: &DGAlgebra) -> bool {
        if a.field != self.field || a.arity() > self.arity() {
            return false;
        }
        if self.gens[..a.arity()] != a.gens[..] {
            return false;
        }
        (0..a.arity()).all(|i| a.diffs[i].padded(self.arity()) == self.diffs[i])
    }

    pub fn format_monomial(&self, m: &Monomial) -> String {
        if m.is_one() {
            return "1".to_string();
        }
        let mut parts = Vec::new();
        for (i, &e) in m.exps().iter().enumerate() {
            if e == 1 {
                parts.push(self.gens[i].name.clone());
            } else if e > 1 {
                parts.push(format!("{}^{}", self.gens[i].name, e));
            }
        }
        parts.join("*")
    }

    pub fn format_element(&self, x: &Element) -> String {
        if x.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (m, s)) in x.terms().enumerate() {
            let coeff = format!("{s}");
            if i > 0 {
                out.push_str(" + ");
            }
            if m.is_one() {
                out.push_str(&coeff);
            } else if coeff == "1" {
                out.push_str(&self.format_monomial(m));
            } else {
                out.push_str(&format!("{}*{}", coeff, self.format_monomial(m)));
            }
        }
        out
    }
}

/// The derived tensor product `B ⊗^L_A C` of two semi-free extensions of `A`,
/// realized as the semi-free extension of `A` by the disjoint union of the new
/// generators of `B` and `C` (renamed with `_1` / `_2` suffixes). Returns the
/// two canonical inclusions.
pub fn tensor_over(
    a: &Arc<DGAlgebra>,
    b: &Arc<DGAlgebra>,
    c: &Arc<DGAlgebra>,
) -> Result<(Arc<DGAlgebra>, AlgebraMap, AlgebraMap)> {
    if !b.extends(a) || !c.extends(a) {
        return Err(DgError::Invalid(
            "tensor factors must be semi-free extensions of the given base".into(),
        ));
    }
    let na = a.arity();
    let nb = b.arity() - na;
    let nc = c.arity() - na;
    let arity = na + nb + nc;
    let mut gens = a.generators().to_vec();
    for g in &b.generators()[na..] {
        gens.push(GeneratorSpec::new(&format!("{}_1", g.name), g.deg, g.wt));
    }
    for g in &c.generators()[na..] {
        gens.push(GeneratorSpec::new(&format!("{}_2", g.name), g.deg, g.wt));
    }
    // transport an exponent vector of B (resp. C) into E
    let reindex = |m: &Monomial, from_b: bool| -> Monomial {
        let mut exps = vec![0u32; arity];
        let src = m.exps();
        exps[..na].copy_from_slice(&src[..na]);
        for (k, &e) in src[na..].iter().enumerate() {
            let dst = if from_b { na + k } else { na + nb + k };
            exps[dst] = e;
        }
        Monomial { exps }
    };
    let transport = |x: &Element, from_b: bool| -> Element {
        Element::from_terms(x.terms().map(|(m, s)| (reindex(m, from_b), s.clone())))
    };
    let mut diffs: Vec<Element> = a.diffs.iter().map(|d| d.padded(arity)).collect();
    for i in na..b.arity() {
        diffs.push(transport(&b.diffs[i], true));
    }
    for i in na..c.arity() {
        diffs.push(transport(&c.diffs[i], false));
    }
    let e = DGAlgebra::build(a.field, gens, diffs, na, Some(a.clone()))?;
    let iota_b = AlgebraMap::new(
        b.clone(),
        e.clone(),
        (0..b.arity()).map(|i| e.gen_element(i)).collect(),
    )?;
    let iota_c = AlgebraMap::new(
        c.clone(),
        e.clone(),
        (0..c.arity())
            .map(|i| {
                if i < na {
                    e.gen_element(i)
                } else {
                    e.gen_element(nb + i)
                }
            })
            .collect(),
    )?;
    Ok((e, iota_b, iota_c))
}

/// A map of DG-algebras, given by generator images.
#[derive(Debug, Clone)]
pub struct AlgebraMap {
    source: Arc<DGAlgebra>,
    target: Arc<DGAlgebra>,
    images: Vec<Element>,
}

impl AlgebraMap {
    /// Validates bidegree preservation and the chain-map law on every
    /// generator.
    pub fn new(
        source: Arc<DGAlgebra>,
        target: Arc<DGAlgebra>,
        images: Vec<Element>,
    ) -> Result<AlgebraMap> {
        let map = AlgebraMap {
            source,
            target,
            images,
        };
        let violations = map.violations()?;
        if let Some(v) = violations.first() {
            return Err(DgError::Invalid(v.clone()));
        }
        Ok(map)
    }

    /// All chain-map / bidegree violations, one message per offending
    /// generator. Empty means the map is valid.
    pub fn violations(&self) -> Result<Vec<String>> {
        if self.images.len() != self.source.arity() {
            return Err(DgError::Invalid(
                "one image required per source generator".into(),
            ));
        }
        let mut out = Vec::new();
        for (i, g) in self.source.generators().iter().enumerate() {
            let img = &self.images[i];
            match self.target.bidegree(img) {
                Ok(Some(bd)) if bd != (g.deg, g.wt) => out.push(format!(
                    "image of {} has bidegree ({}, {}), expected ({}, {})",
                    g.name, bd.0, bd.1, g.deg, g.wt
                )),
                Ok(_) => {}
                Err(e) => out.push(format!("image of {}: {}", g.name, e)),
            }
        }
        if !out.is_empty() {
            return Ok(out);
        }
        for (i, g) in self.source.generators().iter().enumerate() {
            let lhs = self.target.differential(&self.images[i])?;
            let rhs = self.apply(self.source.diff_of_gen(i))?;
            if lhs != rhs {
                out.push(format!(
                    "chain-map law fails on generator {}: d(image) = {}, image(d) = {}",
                    g.name,
                    self.target.format_element(&lhs),
                    self.target.format_element(&rhs)
                ));
            }
        }
        Ok(out)
    }

    pub fn identity(a: &Arc<DGAlgebra>) -> AlgebraMap {
        AlgebraMap {
            source: a.clone(),
            target: a.clone(),
            images: (0..a.arity()).map(|i| a.gen_element(i)).collect(),
        }
    }

    pub fn source(&self) -> &Arc<DGAlgebra> {
        &self.source
    }

    pub fn target(&self) -> &Arc<DGAlgebra> {
        &self.target
    }

    pub fn images(&self) -> &[Element] {
        &self.images
    }

    /// Applies the map to an element, multiplying generator images in order.
    pub fn apply(&self, x: &Element) -> Result<Element> {
        let mut out = Element::zero();
        for (m, s) in x.terms() {
            let mut acc = self.target.one();
            for (i, &e) in m.exps().iter().enumerate() {
                if e > 0 {
                    acc = self.target.multiply(&acc, &self.target.pow(&self.images[i], e)?)?;
                }
            }
            out = out.add(&acc.scale(s));
        }
        Ok(out)
    }

    /// `other ∘ self`.
    pub fn compose(&self, other: &AlgebraMap) -> Result<AlgebraMap> {
        if !std::sync::Arc::ptr_eq(&self.target, &other.source)
            && !(self.target.extends(&other.source) && other.source.extends(&self.target))
        {
            return Err(DgError::Invalid("maps are not composable".into()));
        }
        let images = self
            .images
            .iter()
            .map(|x| other.apply(x))
            .collect::<Result<Vec<_>>>()?;
        AlgebraMap::new(self.source.clone(), other.target.clone(), images)
    }

    /// Is the map the identity on its source, generator by generator?
    /// Source and target must be structurally equal.
    pub fn is_identity(&self) -> bool {
        if self.source.arity() != self.target.arity() {
            return false;
        }
        (0..self.source.arity()).all(|i| self.images[i] == self.source.gen_element(i))
    }
}

/// The degree-0 cohomology of an algebra as a stratified quotient ring. The
/// relation ideal is generated by the differentials of the degree −1
/// generators; each weight stratum carries a row-reduced relation space and
/// coset representative monomials, giving idempotent normal forms.
#[derive(Debug)]
pub struct H0Ring {
    algebra: Arc<DGAlgebra>,
    wt_cap: i32,
    strata: Vec<H0Stratum>,
}

#[derive(Debug)]
struct H0Stratum {
    ambient: Vec<Monomial>,
    relations: Rref,
    reps: Vec<usize>,
}

impl H0Ring {
    pub fn new(algebra: &Arc<DGAlgebra>, wt_cap: i32) -> Result<H0Ring> {
        if wt_cap < 0 {
            return Err(DgError::Invalid("weight cap must be ≥ 0".into()));
        }
        let field = algebra.field();
        let minus_one: Vec<usize> = (0..algebra.arity())
            .filter(|&i| algebra.generators()[i].deg == -1)
            .collect();
        let mut strata = Vec::new();
        for w in 0..=wt_cap {
            let ambient = algebra.basis(0, w);
            let mut rows = Vec::new();
            for &xi in &minus_one {
                let dxi = algebra.diff_of_gen(xi);
                if dxi.is_zero() {
                    continue;
                }
                let w_xi = algebra.generators()[xi].wt;
                for m in algebra.basis(0, w - w_xi) {
                    let me = Element::from_terms([(m, Scalar::one(field))]);
                    let rel = algebra.multiply(&me, dxi)?;
                    if !rel.is_zero() {
                        rows.push(algebra.coords(&rel, &ambient)?);
                    }
                }
            }
            let relations = rref_of_rows(&rows, ambient.len(), field);
            let rep_rows: Vec<Vec<Scalar>> = relations.rows.clone();
            let reps = quotient_basis(&rep_rows, ambient.len(), field);
            strata.push(H0Stratum {
                ambient,
                relations,
                reps,
            });
        }
        Ok(H0Ring {
            algebra: algebra.clone(),
            wt_cap,
            strata,
        })
    }

    pub fn algebra(&self) -> &Arc<DGAlgebra> {
        &self.algebra
    }

    pub fn field(&self) -> FieldSpec {
        self.algebra.field()
    }

    pub fn wt_cap(&self) -> i32 {
        self.wt_cap
    }

    pub fn dim(&self, w: i32) -> usize {
        if w < 0 || w > self.wt_cap {
            return 0;
        }
        self.strata[w as usize].reps.len()
    }

    /// Hilbert coefficients `dim H⁰_w` for `w = 0..=wt_cap`.
    pub fn hilbert(&self) -> Vec<usize> {
        (0..=self.wt_cap).map(|w| self.dim(w)).collect()
    }

    /// Coset representative monomials of the weight-`w` stratum.
    pub fn stratum_basis(&self, w: i32) -> Vec<Monomial> {
        if w < 0 || w > self.wt_cap {
            return Vec::new();
        }
        let st = &self.strata[w as usize];
        st.reps.iter().map(|&i| st.ambient[i].clone()).collect()
    }

    /// Normal form of a homogeneous degree-0 element of weight `w ≤ wt_cap`.
    pub fn nf(&self, x: &Element) -> Result<Element> {
        if x.is_zero() {
            return Ok(Element::zero());
        }
        let bd = self
            .algebra
            .bidegree(x)?
            .expect("nonzero element has a bidegree");
        if bd.0 != 0 {
            return Err(DgError::Invalid(
                "normal forms are defined for degree-0 elements".into(),
            ));
        }
        if bd.1 > self.wt_cap {
            return Err(DgError::Invalid(format!(
                "weight {} exceeds the H⁰ weight cap {}",
                bd.1, self.wt_cap
            )));
        }
        let st = &self.strata[bd.1 as usize];
        let v = self.algebra.coords(x, &st.ambient)?;
        let red = reduce_mod_rows(&st.relations, &v);
        Ok(self.algebra.element_from_coords(&st.ambient, &red))
    }

    /// Multiplication followed by normal form.
    pub fn multiply(&self, x: &Element, y: &Element) -> Result<Element> {
        let p = self.algebra.multiply(x, y)?;
        if p.is_zero() {
            Ok(p)
        } else {
            self.nf(&p)
        }
    }

    /// Coordinates of a normal-form element in the coset representative
    /// basis.
    pub fn coords(&self, x: &Element, w: i32) -> Result<Vec<Scalar>> {
        let basis = self.stratum_basis(w);
        let nf = self.nf(x)?;
        let mut v = vec![Scalar::zero(self.field()); basis.len()];
        for (m, s) in nf.terms() {
            match basis.binary_search(m) {
                Ok(i) => v[i] = s.clone(),
                Err(_) => {
                    return Err(DgError::Invalid(
                        "normal form left the representative basis".into(),
                    ))
                }
            }
        }
        Ok(v)
    }
}

/// A ring map between two stratified H⁰-quotients, given by images of the
/// degree-0 generators of the source ambient algebra.
#[derive(Debug, Clone)]
pub struct H0Map {
    source: Arc<H0Ring>,
    target: Arc<H0Ring>,
    /// Image (normal form in the target) per source generator; `None` for
    /// generators of nonzero degree, which do not occur in `A⁰`.
    images: Vec<Option<Element>>,
}

impl H0Map {
    /// Induced map `H⁰(f)` of an algebra map.
    pub fn induced(f: &AlgebraMap, source: Arc<H0Ring>, target: Arc<H0Ring>) -> Result<H0Map> {
        let mut images = Vec::new();
        for (i, g) in f.source().generators().iter().enumerate() {
            if g.deg == 0 {
                images.push(Some(target.nf(&f.images()[i])?));
            } else {
                images.push(None);
            }
        }
        let map = H0Map {
            source,
            target,
            images,
        };
        map.check_relations()?;
        Ok(map)
    }

    /// The reduction map `A → H⁰(A)`.
    pub fn reduction(h0: &Arc<H0Ring>) -> Result<H0Map> {
        let a = h0.algebra().clone();
        H0Map::induced(&AlgebraMap::identity(&a), h0.clone(), h0.clone())
    }

    fn check_relations(&self) -> Result<()> {
        let a = self.source.algebra();
        for i in 0..a.arity() {
            if a.generators()[i].deg != -1 {
                continue;
            }
            let rel = a.diff_of_gen(i);
            if rel.is_zero() {
                continue;
            }
            if a.generators()[i].wt > self.source.wt_cap().min(self.target.wt_cap()) {
                continue; // outside the certified range
            }
            let img = self.apply(rel)?;
            if !img.is_zero() {
                return Err(DgError::Invalid(format!(
                    "H⁰ map does not kill the relation d({})",
                    a.generators()[i].name
                )));
            }
        }
        Ok(())
    }

    pub fn source(&self) -> &Arc<H0Ring> {
        &self.source
    }

    pub fn target(&self) -> &Arc<H0Ring> {
        &self.target
    }

    /// Applies the map to a degree-0 element of the source ambient and
    /// returns the normal form in the target.
    pub fn apply(&self, x: &Element) -> Result<Element> {
        let ta = self.target.algebra();
        let mut out = Element::zero();
        for (m, s) in x.terms() {
            let mut acc = ta.one();
            for (i, &e) in m.exps().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let img = self.images[i].as_ref().ok_or_else(|| {
                    DgError::Invalid("monomial involves a generator of nonzero degree".into())
                })?;
                acc = ta.multiply(&acc, &ta.pow(img, e)?)?;
            }
            out = out.add(&acc.scale(s));
        }
        if out.is_zero() {
            Ok(out)
        } else {
            self.target.nf(&out)
        }
    }
}

impl fmt::Display for DGAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DGAlgebra[")?;
        for (i, g) in self.gens.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}:({},{})", g.name, g.deg, g.wt)?;
        }
        write!(f, "]")
    }
}
