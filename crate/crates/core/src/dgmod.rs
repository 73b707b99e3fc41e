//! Semi-free DG-modules over a DG-algebra or over a stratified H⁰-quotient
//! ring; chain maps, shifts, cones, pushforwards and Hom complexes.
//!
//! A module is given by a finite ordered list of bigraded symbols and a
//! strictly triangular differential (each `d(s_i)` only involves earlier
//! symbols), which is the computable form of semi-freeness. Everything
//! compiles down to [`StratifiedComplex`] for cohomology.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::cdga::{AlgebraMap, DGAlgebra, Element, H0Map, H0Ring, Monomial};
use crate::error::{DgError, Result};
use crate::exactla::{FieldSpec, Scalar};
use crate::strata::{StratifiedComplex, Window};

/// The coefficient ring of a module: a DG-algebra, or an H⁰-quotient ring
/// concentrated in degree 0 with zero differential.
#[derive(Debug, Clone)]
pub enum Ring {
    Dg(Arc<DGAlgebra>),
    H0(Arc<H0Ring>),
}

impl Ring {
    pub fn field(&self) -> FieldSpec {
        match self {
            Ring::Dg(a) => a.field(),
            Ring::H0(h) => h.field(),
        }
    }

    /// The free algebra whose monomials represent ring elements.
    pub fn ambient(&self) -> &Arc<DGAlgebra> {
        match self {
            Ring::Dg(a) => a,
            Ring::H0(h) => h.algebra(),
        }
    }

    pub fn one(&self) -> Element {
        self.ambient().one()
    }

    pub fn stratum_basis(&self, deg: i32, wt: i32) -> Vec<Monomial> {
        match self {
            Ring::Dg(a) => a.basis(deg, wt),
            Ring::H0(h) => {
                if deg != 0 || wt < 0 {
                    Vec::new()
                } else {
                    assert!(
                        wt <= h.wt_cap(),
                        "weight {wt} exceeds the H⁰ cap {}; rebuild H⁰ with a larger cap",
                        h.wt_cap()
                    );
                    h.stratum_basis(wt)
                }
            }
        }
    }

    /// Canonical representative (normal form over H⁰, identity over a
    /// DG-algebra).
    pub fn normalize(&self, x: &Element) -> Result<Element> {
        match self {
            Ring::Dg(_) => Ok(x.clone()),
            Ring::H0(h) => {
                if x.is_zero() {
                    Ok(Element::zero())
                } else {
                    h.nf(x)
                }
            }
        }
    }

    pub fn multiply(&self, x: &Element, y: &Element) -> Result<Element> {
        match self {
            Ring::Dg(a) => a.multiply(x, y),
            Ring::H0(h) => h.multiply(x, y),
        }
    }

    pub fn differential(&self, x: &Element) -> Result<Element> {
        match self {
            Ring::Dg(a) => a.differential(x),
            Ring::H0(_) => Ok(Element::zero()),
        }
    }

    pub fn bidegree(&self, x: &Element) -> Result<Option<(i32, i32)>> {
        self.ambient().bidegree(x)
    }
}

/// A map of coefficient rings along which modules are pushed forward
/// (`− ⊗ source target`). The `DgToH0` variant is the reduction functor,
/// optionally through an algebra map first.
#[derive(Debug, Clone)]
pub enum RingMap {
    Dg(AlgebraMap),
    DgToH0 {
        source: Arc<DGAlgebra>,
        via: Option<AlgebraMap>,
        target: Arc<H0Ring>,
    },
    H0(H0Map),
}

impl RingMap {
    pub fn source_ring(&self) -> Ring {
        match self {
            RingMap::Dg(f) => Ring::Dg(f.source().clone()),
            RingMap::DgToH0 { source, .. } => Ring::Dg(source.clone()),
            RingMap::H0(f) => Ring::H0(f.source().clone()),
        }
    }

    pub fn target_ring(&self) -> Ring {
        match self {
            RingMap::Dg(f) => Ring::Dg(f.target().clone()),
            RingMap::DgToH0 { target, .. } => Ring::H0(target.clone()),
            RingMap::H0(f) => Ring::H0(f.target().clone()),
        }
    }

    pub fn apply(&self, x: &Element) -> Result<Element> {
        match self {
            RingMap::Dg(f) => f.apply(x),
            RingMap::DgToH0 { source, via, target } => {
                if x.is_zero() {
                    return Ok(Element::zero());
                }
                let bd = source.bidegree(x)?;
                match bd {
                    Some((0, _)) => {
                        let y = match via {
                            Some(f) => f.apply(x)?,
                            None => x.clone(),
                        };
                        if y.is_zero() {
                            Ok(Element::zero())
                        } else {
                            target.nf(&y)
                        }
                    }
                    // H⁰ is concentrated in degree 0
                    _ => Ok(Element::zero()),
                }
            }
            RingMap::H0(f) => f.apply(x),
        }
    }
}

/// One free generator of a semi-free module.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModSymbol {
    pub name: String,
    pub deg: i32,
    pub wt: i32,
}

impl ModSymbol {
    pub fn new(name: &str, deg: i32, wt: i32) -> ModSymbol {
        ModSymbol {
            name: name.to_string(),
            deg,
            wt,
        }
    }
}

/// A finite combination `Σ coeff_j · s_j` with ring-element coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ModElement {
    comps: BTreeMap<usize, Element>,
}

impl ModElement {
    pub fn zero() -> ModElement {
        ModElement::default()
    }

    pub fn single(idx: usize, coeff: Element) -> ModElement {
        let mut m = ModElement::zero();
        m.add_component(idx, coeff);
        m
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn components(&self) -> impl Iterator<Item = (usize, &Element)> {
        self.comps.iter().map(|(&i, e)| (i, e))
    }

    pub fn component(&self, idx: usize) -> Element {
        self.comps.get(&idx).cloned().unwrap_or_else(Element::zero)
    }

    pub fn add_component(&mut self, idx: usize, coeff: Element) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.comps.entry(idx).or_insert_with(Element::zero);
        *entry = entry.add(&coeff);
        if entry.is_zero() {
            self.comps.remove(&idx);
        }
    }

    pub fn add(&self, other: &ModElement) -> ModElement {
        let mut out = self.clone();
        for (i, c) in other.components() {
            out.add_component(i, c.clone());
        }
        out
    }

    pub fn negate(&self) -> ModElement {
        let mut out = ModElement::zero();
        for (i, c) in self.components() {
            out.add_component(i, c.scale(&Scalar::from_integer(-1, first_field(c))));
        }
        out
    }

    /// Reindexes components through `f`.
    pub fn reindex(&self, f: impl Fn(usize) -> usize) -> ModElement {
        let mut out = ModElement::zero();
        for (i, c) in self.components() {
            out.add_component(f(i), c.clone());
        }
        out
    }
}

fn first_field(e: &Element) -> FieldSpec {
    e.terms()
        .next()
        .map(|(_, s)| s.field())
        .expect("nonzero element")
}

/// A semi-free DG-module: finite bigraded basis, strictly triangular
/// differential, `d² = 0`.
#[derive(Debug, Clone)]
pub struct SemiFreeModule {
    ring: Ring,
    symbols: Vec<ModSymbol>,
    diffs: Vec<ModElement>,
}

impl SemiFreeModule {
    pub fn new(ring: Ring, symbols: Vec<ModSymbol>, diffs: Vec<ModElement>) -> Result<SemiFreeModule> {
        if symbols.len() != diffs.len() {
            return Err(DgError::Presentation(
                "one differential required per module symbol".into(),
            ));
        }
        let mut m = SemiFreeModule {
            ring,
            symbols,
            diffs,
        };
        // normalize coefficients before validating
        for d in &mut m.diffs {
            let mut n = ModElement::zero();
            for (j, c) in d.components() {
                n.add_component(j, m.ring.normalize(c)?);
            }
            *d = n;
        }
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        for (i, d) in self.diffs.iter().enumerate() {
            for (j, c) in d.components() {
                if j >= i {
                    return Err(DgError::Presentation(format!(
                        "differential of {} is not strictly triangular (hits {})",
                        self.symbols[i].name, self.symbols[j].name
                    )));
                }
                let expect = (
                    self.symbols[i].deg + 1 - self.symbols[j].deg,
                    self.symbols[i].wt - self.symbols[j].wt,
                );
                match self.ring.bidegree(c)? {
                    Some(bd) if bd != expect => {
                        return Err(DgError::Presentation(format!(
                            "differential of {} has coefficient of bidegree ({}, {}) on {}, expected ({}, {})",
                            self.symbols[i].name, bd.0, bd.1, self.symbols[j].name, expect.0, expect.1
                        )))
                    }
                    _ => {}
                }
            }
        }
        for (i, d) in self.diffs.iter().enumerate() {
            let dd = self.diff_element(d)?;
            if !dd.is_zero() {
                return Err(DgError::Presentation(format!(
                    "d² ≠ 0 on module symbol {}",
                    self.symbols[i].name
                )));
            }
        }
        Ok(())
    }

    /// The rank-1 free module on one symbol.
    pub fn rank_one(ring: Ring, name: &str, deg: i32, wt: i32) -> SemiFreeModule {
        SemiFreeModule {
            ring,
            symbols: vec![ModSymbol::new(name, deg, wt)],
            diffs: vec![ModElement::zero()],
        }
    }

    /// The algebra itself viewed as the rank-1 free module.
    pub fn from_algebra(a: &Arc<DGAlgebra>) -> SemiFreeModule {
        SemiFreeModule::rank_one(Ring::Dg(a.clone()), "1", 0, 0)
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn symbols(&self) -> &[ModSymbol] {
        &self.symbols
    }

    pub fn diff_of_symbol(&self, i: usize) -> &ModElement {
        &self.diffs[i]
    }

    pub fn rank(&self) -> usize {
        self.symbols.len()
    }

    /// Ring action: `coeff · x`.
    pub fn scale(&self, coeff: &Element, x: &ModElement) -> Result<ModElement> {
        let mut out = ModElement::zero();
        for (j, c) in x.components() {
            out.add_component(j, self.ring.multiply(coeff, c)?);
        }
        Ok(out)
    }

    /// Module differential: `d(Σ c_j s_j) = Σ d(c_j) s_j + (−1)^{deg c_j} c_j d(s_j)`.
    pub fn diff_element(&self, x: &ModElement) -> Result<ModElement> {
        let mut out = ModElement::zero();
        for (j, c) in x.components() {
            let dc = self.ring.differential(c)?;
            out.add_component(j, self.ring.normalize(&dc)?);
            let cdeg = match self.ring.bidegree(c)? {
                Some((d, _)) => d,
                None => continue,
            };
            let mut tail = self.scale(c, &self.diffs[j])?;
            if cdeg.rem_euclid(2) == 1 {
                tail = tail.negate();
            }
            out = out.add(&tail);
        }
        Ok(out)
    }

    /// The shifted module `M[n]`: degrees lowered by `n`, differential sign
    /// `(−1)^n`.
    pub fn shift(&self, n: i32) -> SemiFreeModule {
        let symbols = self
            .symbols
            .iter()
            .map(|s| ModSymbol::new(&s.name, s.deg - n, s.wt))
            .collect();
        let diffs = self
            .diffs
            .iter()
            .map(|d| {
                if n.rem_euclid(2) == 1 {
                    d.negate()
                } else {
                    d.clone()
                }
            })
            .collect();
        SemiFreeModule {
            ring: self.ring.clone(),
            symbols,
            diffs,
        }
    }

    /// Pushforward `M ⊗ target` along a ring map: same symbols, coefficients
    /// transported (and normal-formed over an H⁰ target).
    pub fn pushforward(&self, f: &RingMap) -> Result<SemiFreeModule> {
        let mut diffs = Vec::with_capacity(self.diffs.len());
        for d in &self.diffs {
            let mut nd = ModElement::zero();
            for (j, c) in d.components() {
                nd.add_component(j, f.apply(c)?);
            }
            diffs.push(nd);
        }
        SemiFreeModule::new(f.target_ring(), self.symbols.clone(), diffs)
    }

    /// Ordered stratum basis: `(symbol index, ring monomial)` pairs.
    pub fn stratum_basis(&self, deg: i32, wt: i32) -> Vec<(usize, Monomial)> {
        let mut out = Vec::new();
        for (i, s) in self.symbols.iter().enumerate() {
            for m in self.ring.stratum_basis(deg - s.deg, wt - s.wt) {
                out.push((i, m));
            }
        }
        out
    }

    /// Coordinates of a module element in the `(deg, wt)` stratum basis.
    pub fn coords(&self, x: &ModElement, basis: &[(usize, Monomial)]) -> Result<Vec<Scalar>> {
        let field = self.ring.field();
        let mut v = vec![Scalar::zero(field); basis.len()];
        for (j, c) in x.components() {
            let c = self.ring.normalize(c)?;
            for (mono, s) in c.terms() {
                match basis.iter().position(|(bj, bm)| *bj == j && bm == mono) {
                    Some(idx) => v[idx] = s.clone(),
                    None => {
                        return Err(DgError::Invalid(
                            "module element does not lie in the stratum".into(),
                        ))
                    }
                }
            }
        }
        Ok(v)
    }

    /// Reconstructs a module element from stratum coordinates.
    pub fn element_from_coords(&self, basis: &[(usize, Monomial)], v: &[Scalar]) -> ModElement {
        let mut out = ModElement::zero();
        for ((j, mono), s) in basis.iter().zip(v.iter()) {
            if !s.is_zero() {
                out.add_component(*j, Element::from_terms([(mono.clone(), s.clone())]));
            }
        }
        out
    }

    /// Compiles the module to per-stratum matrices over a region.
    pub fn compile(&self, region: Window) -> Result<StratifiedComplex> {
        let field = self.ring.field();
        let mut c = StratifiedComplex::new(field, region);
        let mut bases: BTreeMap<(i32, i32), Vec<(usize, Monomial)>> = BTreeMap::new();
        for (n, w) in region.strata() {
            let b = self.stratum_basis(n, w);
            c.set_dim(n, w, b.len());
            bases.insert((n, w), b);
        }
        for (n, w) in region.strata() {
            if n + 1 > region.deg_hi {
                continue;
            }
            let src = &bases[&(n, w)];
            let tgt = &bases[&(n + 1, w)];
            if src.is_empty() || tgt.is_empty() {
                continue;
            }
            let mut mat = crate::exactla::StratumMatrix::new(tgt.len(), src.len(), field);
            for (col, (i, mono)) in src.iter().enumerate() {
                let x = ModElement::single(
                    *i,
                    Element::from_terms([(mono.clone(), Scalar::one(field))]),
                );
                let dx = self.diff_element(&x)?;
                for (row, s) in self.coords(&dx, tgt)?.into_iter().enumerate() {
                    if !s.is_zero() {
                        mat.set(row, col, s)?;
                    }
                }
            }
            c.set_d(n, w, mat);
        }
        Ok(c)
    }

    /// Cohomology table on a window (compiled with a one-degree margin, so
    /// every reported stratum is exact).
    pub fn cohomology(&self, window: Window) -> Result<crate::strata::CohomologyTable> {
        let c = self.compile(window.margin(1))?;
        Ok(c.cohomology(window))
    }
}

/// A chain map of semi-free modules over one ring.
#[derive(Debug, Clone)]
pub struct ChainMap {
    source: SemiFreeModule,
    target: SemiFreeModule,
    images: Vec<ModElement>,
}

impl ChainMap {
    pub fn new(
        source: SemiFreeModule,
        target: SemiFreeModule,
        images: Vec<ModElement>,
    ) -> Result<ChainMap> {
        if images.len() != source.rank() {
            return Err(DgError::Invalid(
                "one image required per source symbol".into(),
            ));
        }
        let map = ChainMap {
            source,
            target,
            images,
        };
        map.validate()?;
        Ok(map)
    }

    fn validate(&self) -> Result<()> {
        for (i, s) in self.source.symbols().iter().enumerate() {
            for (j, c) in self.images[i].components() {
                let t = &self.target.symbols()[j];
                let expect = (s.deg - t.deg, s.wt - t.wt);
                if let Some(bd) = self.target.ring().bidegree(c)? {
                    if bd != expect {
                        return Err(DgError::Invalid(format!(
                            "image of {} is not bidegree-preserving",
                            s.name
                        )));
                    }
                }
            }
        }
        for (i, s) in self.source.symbols().iter().enumerate() {
            let lhs = self.target.diff_element(&self.images[i])?;
            let rhs = self.apply(self.source.diff_of_symbol(i))?;
            if lhs != rhs {
                return Err(DgError::Invalid(format!(
                    "chain map does not commute with differentials on {}",
                    s.name
                )));
            }
        }
        Ok(())
    }

    pub fn identity(m: &SemiFreeModule) -> ChainMap {
        ChainMap {
            source: m.clone(),
            target: m.clone(),
            images: (0..m.rank()).map(|i| ModElement::single(i, m.ring().one())).collect(),
        }
    }

    pub fn source(&self) -> &SemiFreeModule {
        &self.source
    }

    pub fn target(&self) -> &SemiFreeModule {
        &self.target
    }

    pub fn images(&self) -> &[ModElement] {
        &self.images
    }

    pub fn apply(&self, x: &ModElement) -> Result<ModElement> {
        let mut out = ModElement::zero();
        for (j, c) in x.components() {
            out = out.add(&self.target.scale(c, &self.images[j])?);
        }
        Ok(out)
    }

    /// The mapping cone as a semi-free module: target symbols first, then the
    /// shifted source symbols; `d(s[1]) = −d_M(s) + f(s)`.
    pub fn cone(&self) -> Result<SemiFreeModule> {
        let nt = self.target.rank();
        let mut symbols = self.target.symbols().to_vec();
        for s in self.source.symbols() {
            symbols.push(ModSymbol::new(&format!("{}'", s.name), s.deg - 1, s.wt));
        }
        let mut diffs: Vec<ModElement> = self.target.diffs.clone();
        for i in 0..self.source.rank() {
            let shifted = self
                .source
                .diff_of_symbol(i)
                .negate()
                .reindex(|j| nt + j);
            diffs.push(shifted.add(&self.images[i]));
        }
        SemiFreeModule::new(self.target.ring().clone(), symbols, diffs)
    }
}

/// The Hom complex `Hom(P, X)` of finite semi-free modules over one ring,
/// compiled stratumwise. The dual of a symbol in bidegree `(n, w)`
/// contributes bidegree `(−n, −w)`; the differential is
/// `(df)(s) = d_X(f(s)) − (−1)^{|f|} f(d_P(s))`.
pub fn hom_complex(p: &SemiFreeModule, x: &SemiFreeModule, region: Window) -> Result<StratifiedComplex> {
    let field = p.ring().field();
    let mut c = StratifiedComplex::new(field, region);
    // hom stratum basis: (P symbol j, X stratum basis element of (i + n_j, w + w_j))
    let mut bases: BTreeMap<(i32, i32), Vec<(usize, (usize, Monomial))>> = BTreeMap::new();
    for (i, w) in region.strata() {
        let mut b = Vec::new();
        for (j, s) in p.symbols().iter().enumerate() {
            for e in x.stratum_basis(i + s.deg, w + s.wt) {
                b.push((j, e));
            }
        }
        c.set_dim(i, w, b.len());
        bases.insert((i, w), b);
    }
    for (i, w) in region.strata() {
        if i + 1 > region.deg_hi {
            continue;
        }
        let src = &bases[&(i, w)];
        let tgt = &bases[&(i + 1, w)];
        if src.is_empty() || tgt.is_empty() {
            continue;
        }
        let mut mat = crate::exactla::StratumMatrix::new(tgt.len(), src.len(), field);
        for (col, (j, (tsym, mono))) in src.iter().enumerate() {
            let xe = ModElement::single(
                *tsym,
                Element::from_terms([(mono.clone(), Scalar::one(field))]),
            );
            // slot j: d_X(f(s_j))
            let dxe = x.diff_element(&xe)?;
            add_hom_coords(&mut mat, x, &dxe, *j, p, i + 1, w, tgt, col)?;
            // slot k: −(−1)^{|f| (1 + deg c_kj)} c_kj · f(s_j)
            for k in 0..p.rank() {
                let ckj = p.diff_of_symbol(k).component(*j);
                if ckj.is_zero() {
                    continue;
                }
                let cdeg = p
                    .ring()
                    .bidegree(&ckj)?
                    .map(|(d, _)| d)
                    .unwrap_or(0);
                let mut term = x.scale(&ckj, &xe)?;
                let exponent = i * (1 + cdeg) + 1; // |f| = i, plus global −1
                if exponent.rem_euclid(2) == 1 {
                    term = term.negate();
                }
                add_hom_coords(&mut mat, x, &term, k, p, i + 1, w, tgt, col)?;
            }
        }
        c.set_d(i, w, mat);
    }
    c.validate()?;
    Ok(c)
}

/// The Hom complex `Hom(P, X)` of finite semi-free modules as a semi-free
/// module in its own right, on the symbols `s_j^* ⊗ x_k` of bidegree
/// `(deg x_k − deg s_j, wt x_k − wt s_j)`. Symbols are ordered so the Hom
/// differential is strictly triangular.
pub fn hom_module(p: &SemiFreeModule, x: &SemiFreeModule) -> Result<SemiFreeModule> {
    let mut order: Vec<(usize, usize)> = Vec::new();
    for (k, _) in x.symbols().iter().enumerate() {
        for j in (0..p.rank()).rev() {
            order.push((j, k));
        }
    }
    let index_of = |j: usize, k: usize| order.iter().position(|&(a, b)| (a, b) == (j, k)).unwrap();
    let mut symbols = Vec::with_capacity(order.len());
    let mut diffs = Vec::with_capacity(order.len());
    for &(j, k) in &order {
        let (sp, sx) = (&p.symbols()[j], &x.symbols()[k]);
        symbols.push(ModSymbol::new(
            &format!("{}*({})", sp.name, sx.name),
            sx.deg - sp.deg,
            sx.wt - sp.wt,
        ));
        let fdeg = sx.deg - sp.deg;
        let mut d = ModElement::zero();
        // post-composition with d_X
        for (kp, c) in x.diff_of_symbol(k).components() {
            d.add_component(index_of(j, kp), c.clone());
        }
        // pre-composition with d_P, signed
        for kp in 0..p.rank() {
            let ckj = p.diff_of_symbol(kp).component(j);
            if ckj.is_zero() {
                continue;
            }
            let cdeg = p.ring().bidegree(&ckj)?.map(|(dd, _)| dd).unwrap_or(0);
            let exponent = fdeg * (1 + cdeg) + 1;
            let coeff = if exponent.rem_euclid(2) == 1 {
                ckj.scale(&Scalar::from_integer(-1, p.ring().field()))
            } else {
                ckj
            };
            d.add_component(index_of(kp, k), coeff);
        }
        diffs.push(d);
    }
    SemiFreeModule::new(p.ring().clone(), symbols, diffs)
}

#[allow(clippy::too_many_arguments)]
fn add_hom_coords(
    mat: &mut crate::exactla::StratumMatrix,
    x: &SemiFreeModule,
    value: &ModElement,
    slot: usize,
    p: &SemiFreeModule,
    ideg: i32,
    w: i32,
    tgt: &[(usize, (usize, Monomial))],
    col: usize,
) -> Result<()> {
    if value.is_zero() {
        return Ok(());
    }
    let s = &p.symbols()[slot];
    let xbasis = x.stratum_basis(ideg + s.deg, w + s.wt);
    let coords = x.coords(value, &xbasis)?;
    for (idx, e) in xbasis.iter().enumerate() {
        if coords[idx].is_zero() {
            continue;
        }
        let row = tgt
            .iter()
            .position(|(j, be)| *j == slot && be == e)
            .expect("hom stratum bases are consistent");
        mat.add_to(row, col, &coords[idx])?;
    }
    Ok(())
}
