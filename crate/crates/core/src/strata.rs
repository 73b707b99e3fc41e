//! Stratified complexes: the compiled, per-(degree, weight) matrix form on
//! which every cohomology, cone and quasi-isomorphism computation runs.
//!
//! The differential preserves weight and raises degree by one, so each
//! (degree, weight) stratum is a finite complex of vector spaces and all
//! reported dimensions are exact — truncation only limits which strata are
//! reported, never their values.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::cdga::{AlgebraMap, DGAlgebra, Element};
use crate::error::{DgError, Result};
use crate::exactla::{homology_stratum, FieldSpec, Scalar, StratumMatrix};

/// The finite bigraded region over which a computation is certified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub deg_lo: i32,
    pub deg_hi: i32,
    pub wt_cap: i32,
}

impl Window {
    pub fn new(deg_lo: i32, deg_hi: i32, wt_cap: i32) -> Result<Window> {
        if deg_lo > deg_hi {
            return Err(DgError::Invalid(format!(
                "window degree range {deg_lo}..{deg_hi} is empty"
            )));
        }
        if wt_cap < 0 {
            return Err(DgError::Invalid("window weight cap must be ≥ 0".into()));
        }
        Ok(Window {
            deg_lo,
            deg_hi,
            wt_cap,
        })
    }

    /// The window enlarged by `n` degrees on both sides (compilation margin).
    pub fn margin(&self, n: i32) -> Window {
        Window {
            deg_lo: self.deg_lo - n,
            deg_hi: self.deg_hi + n,
            wt_cap: self.wt_cap,
        }
    }

    pub fn contains(&self, deg: i32, wt: i32) -> bool {
        deg >= self.deg_lo && deg <= self.deg_hi && wt >= 0 && wt <= self.wt_cap
    }

    pub fn strata(&self) -> impl Iterator<Item = (i32, i32)> + '_ {
        (self.deg_lo..=self.deg_hi).flat_map(|d| (0..=self.wt_cap).map(move |w| (d, w)))
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "deg {}..{} wt <= {}", self.deg_lo, self.deg_hi, self.wt_cap)
    }
}

/// Cohomology dimensions per stratum inside a window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CohomologyTable {
    pub window: Window,
    dims: BTreeMap<(i32, i32), usize>,
}

impl CohomologyTable {
    pub fn new(window: Window) -> CohomologyTable {
        CohomologyTable {
            window,
            dims: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, deg: i32, wt: i32, dim: usize) {
        if dim > 0 {
            self.dims.insert((deg, wt), dim);
        }
    }

    pub fn dim(&self, deg: i32, wt: i32) -> usize {
        self.dims.get(&(deg, wt)).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = ((i32, i32), usize)> + '_ {
        self.dims.iter().map(|(&k, &v)| (k, v))
    }

    /// Degrees of nonzero rows, ascending.
    pub fn nonzero_degrees(&self) -> Vec<i32> {
        let mut degs: Vec<i32> = self.dims.keys().map(|&(d, _)| d).collect();
        degs.sort();
        degs.dedup();
        degs
    }

    /// The table reindexed by `(deg + dn, wt + dw)`, clipped to `window`.
    pub fn shifted(&self, dn: i32, dw: i32, window: Window) -> CohomologyTable {
        let mut out = CohomologyTable::new(window);
        for (&(d, w), &v) in &self.dims {
            if window.contains(d + dn, w + dw) {
                out.set(d + dn, w + dw, v);
            }
        }
        out
    }

    /// Equality on the intersection of the two windows with `other`'s window.
    pub fn agrees_with(&self, other: &CohomologyTable, window: &Window) -> bool {
        window
            .strata()
            .all(|(d, w)| self.dim(d, w) == other.dim(d, w))
    }

    /// Weight-dimension row of one degree, `wt = 0..=wt_cap`.
    pub fn row(&self, deg: i32) -> Vec<usize> {
        (0..=self.window.wt_cap).map(|w| self.dim(deg, w)).collect()
    }
}

/// The Künneth convolution of two tables over the base field:
/// `dim(n, w) = Σ_{i+j=n, u+v=w} a(i, u) · b(j, v)`. The factor tables must
/// cover every bidegree that can contribute inside `window`.
pub fn tensor_table(a: &CohomologyTable, b: &CohomologyTable, window: Window) -> CohomologyTable {
    let mut out = CohomologyTable::new(window);
    for (n, w) in window.strata() {
        let mut acc = 0usize;
        for i in a.window.deg_lo..=a.window.deg_hi {
            let j = n - i;
            if j < b.window.deg_lo || j > b.window.deg_hi {
                continue;
            }
            for u in 0..=w {
                acc += a.dim(i, u) * b.dim(j, w - u);
            }
        }
        out.set(n, w, acc);
    }
    out
}

/// A complex compiled to per-stratum matrices over a region. `dmat[(n, w)]`
/// maps the `(n, w)` stratum to `(n+1, w)`.
#[derive(Debug, Clone)]
pub struct StratifiedComplex {
    pub field: FieldSpec,
    pub region: Window,
    dims: BTreeMap<(i32, i32), usize>,
    dmat: BTreeMap<(i32, i32), StratumMatrix>,
}

impl StratifiedComplex {
    pub fn new(field: FieldSpec, region: Window) -> StratifiedComplex {
        StratifiedComplex {
            field,
            region,
            dims: BTreeMap::new(),
            dmat: BTreeMap::new(),
        }
    }

    pub fn set_dim(&mut self, deg: i32, wt: i32, dim: usize) {
        if dim > 0 {
            self.dims.insert((deg, wt), dim);
        }
    }

    pub fn dim(&self, deg: i32, wt: i32) -> usize {
        self.dims.get(&(deg, wt)).copied().unwrap_or(0)
    }

    pub fn set_d(&mut self, deg: i32, wt: i32, m: StratumMatrix) {
        if !m.is_zero() {
            self.dmat.insert((deg, wt), m);
        }
    }

    pub fn d(&self, deg: i32, wt: i32) -> StratumMatrix {
        match self.dmat.get(&(deg, wt)) {
            Some(m) => m.clone(),
            None => StratumMatrix::new(self.dim(deg + 1, wt), self.dim(deg, wt), self.field),
        }
    }

    /// Checks `d² = 0` on all strata whose three terms lie in the region.
    pub fn validate(&self) -> Result<()> {
        for (&(n, w), m) in &self.dmat {
            if n + 1 > self.region.deg_hi {
                continue;
            }
            let next = self.d(n + 1, w);
            for c in 0..m.cols() {
                let mut col = Vec::with_capacity(m.rows());
                for r in 0..m.rows() {
                    col.push(m.get(r, c));
                }
                let out = next.apply(&col);
                if out.iter().any(|s| !s.is_zero()) {
                    return Err(DgError::Presentation(format!(
                        "d² ≠ 0 at stratum ({n}, {w})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Cohomology dimension of one stratum. The incoming differential must be
    /// inside the compiled region (compile with a margin).
    pub fn h_dim(&self, deg: i32, wt: i32) -> usize {
        self.h_with_reps(deg, wt).0
    }

    /// Dimension and representative cocycles (coordinates in the stratum
    /// basis) of `H^{deg}` at weight `wt`.
    pub fn h_with_reps(&self, deg: i32, wt: i32) -> (usize, Vec<Vec<Scalar>>) {
        assert!(
            deg > self.region.deg_lo || self.dim(deg - 1, wt) == 0,
            "incoming differential outside compiled region"
        );
        let d_in = self.d(deg - 1, wt);
        homology_stratum(Some(&d_in), &self.d(deg, wt))
    }

    /// Full cohomology table over a window strictly inside the region.
    pub fn cohomology(&self, window: Window) -> CohomologyTable {
        let mut table = CohomologyTable::new(window);
        for (n, w) in window.strata() {
            table.set(n, w, self.h_dim(n, w));
        }
        table
    }
}

/// Per-stratum matrices of a chain map between two compiled complexes.
#[derive(Debug, Clone)]
pub struct CompiledMap {
    mats: BTreeMap<(i32, i32), StratumMatrix>,
}

impl CompiledMap {
    pub fn new() -> CompiledMap {
        CompiledMap {
            mats: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, deg: i32, wt: i32, m: StratumMatrix) {
        if !m.is_zero() {
            self.mats.insert((deg, wt), m);
        }
    }

    pub fn get(&self, deg: i32, wt: i32, rows: usize, cols: usize, field: FieldSpec) -> StratumMatrix {
        match self.mats.get(&(deg, wt)) {
            Some(m) => m.clone(),
            None => StratumMatrix::new(rows, cols, field),
        }
    }
}

impl Default for CompiledMap {
    fn default() -> Self {
        CompiledMap::new()
    }
}

/// The mapping cone of a compiled chain map `f: X → Y`:
/// `C^n = X^{n+1} ⊕ Y^n`, `d(x, y) = (−d_X x, f(x) + d_Y y)`. The sign on the
/// shifted summand is the fixed convention exercised by the validators.
pub fn compiled_cone(
    x: &StratifiedComplex,
    y: &StratifiedComplex,
    f: &CompiledMap,
) -> StratifiedComplex {
    let field = x.field;
    let region = Window {
        deg_lo: x.region.deg_lo.min(y.region.deg_lo),
        deg_hi: (x.region.deg_hi - 1).min(y.region.deg_hi),
        wt_cap: x.region.wt_cap.min(y.region.wt_cap),
    };
    let mut c = StratifiedComplex::new(field, region);
    for n in region.deg_lo..=region.deg_hi {
        for w in 0..=region.wt_cap {
            c.set_dim(n, w, x.dim(n + 1, w) + y.dim(n, w));
        }
    }
    for n in region.deg_lo..=region.deg_hi {
        for w in 0..=region.wt_cap {
            let (xs, ys) = (x.dim(n + 1, w), y.dim(n, w));
            let (xt, yt) = (x.dim(n + 2, w), y.dim(n + 1, w));
            if (xs + ys) == 0 || (xt + yt) == 0 {
                continue;
            }
            let mut m = StratumMatrix::new(xt + yt, xs + ys, field);
            if n + 2 <= x.region.deg_hi {
                let dx = x.d(n + 1, w);
                for r in 0..xt {
                    for cidx in 0..xs {
                        let s = dx.get(r, cidx);
                        if !s.is_zero() {
                            m.set(r, cidx, s.neg()).unwrap();
                        }
                    }
                }
            }
            let fm = f.get(n + 1, w, yt, xs, field);
            for r in 0..yt {
                for cidx in 0..xs {
                    let s = fm.get(r, cidx);
                    if !s.is_zero() {
                        m.set(xt + r, cidx, s).unwrap();
                    }
                }
            }
            let dy = y.d(n, w);
            for r in 0..yt {
                for cidx in 0..ys {
                    let s = dy.get(r, cidx);
                    if !s.is_zero() {
                        m.set(xt + r, xs + cidx, s).unwrap();
                    }
                }
            }
            c.set_d(n, w, m);
        }
    }
    c
}

/// Compiles the underlying complex of an algebra over a region: strata are
/// the monomial bases, the differential is the algebra differential.
pub fn compile_algebra(a: &Arc<DGAlgebra>, region: Window) -> Result<StratifiedComplex> {
    let mut c = StratifiedComplex::new(a.field(), region);
    let mut bases: BTreeMap<(i32, i32), Vec<crate::cdga::Monomial>> = BTreeMap::new();
    for (n, w) in region.strata() {
        let b = a.basis(n, w);
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
        let mut m = StratumMatrix::new(tgt.len(), src.len(), a.field());
        for (j, mono) in src.iter().enumerate() {
            let x = Element::from_terms([(mono.clone(), Scalar::one(a.field()))]);
            let dx = a.differential(&x)?;
            for (i, s) in a.coords(&dx, tgt)?.into_iter().enumerate() {
                if !s.is_zero() {
                    m.set(i, j, s)?;
                }
            }
        }
        c.set_d(n, w, m);
    }
    Ok(c)
}

/// Compiles an algebra map to per-stratum matrices against the monomial
/// bases of source and target.
pub fn compile_algebra_map(f: &AlgebraMap, region: Window) -> Result<CompiledMap> {
    let mut out = CompiledMap::new();
    for (n, w) in region.strata() {
        let src = f.source().basis(n, w);
        let tgt = f.target().basis(n, w);
        if src.is_empty() || tgt.is_empty() {
            continue;
        }
        let mut m = StratumMatrix::new(tgt.len(), src.len(), f.source().field());
        for (j, mono) in src.iter().enumerate() {
            let x = Element::from_terms([(mono.clone(), Scalar::one(f.source().field()))]);
            let fx = f.apply(&x)?;
            for (i, s) in f.target().coords(&fx, &tgt)?.into_iter().enumerate() {
                if !s.is_zero() {
                    m.set(i, j, s)?;
                }
            }
        }
        out.set(n, w, m);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    const Q: FieldSpec = FieldSpec::Q;

    fn win(lo: i32, hi: i32, cap: i32) -> Window {
        Window::new(lo, hi, cap).unwrap()
    }

    #[test]
    fn k1_resolves_the_base_field() {
        // K(k[x]; x) has H⁰ = k in weight 0 and nothing else
        let k1 = catalog::k1(Q);
        let c = compile_algebra(&k1, win(-3, 1, 4)).unwrap();
        c.validate().unwrap();
        let t = c.cohomology(win(-2, 0, 4));
        assert_eq!(t.dim(0, 0), 1);
        let total: usize = t.entries().map(|(_, v)| v).sum();
        assert_eq!(total, 1);
    }

    #[test]
    fn amp_cohomology_rows() {
        let amp = catalog::amp(Q);
        let c = compile_algebra(&amp, win(-3, 1, 6)).unwrap();
        c.validate().unwrap();
        let t = c.cohomology(win(-2, 0, 6));
        assert_eq!(t.row(0), vec![1, 1, 0, 0, 0, 0, 0]);
        assert_eq!(t.row(-1), vec![0, 0, 0, 1, 1, 0, 0]);
        assert_eq!(t.row(-2), vec![0; 7]);
    }

    #[test]
    fn d2_models_dual_numbers() {
        // x² is a nonzerodivisor, so H^{−1} = 0 and H⁰ = k[x]/(x²)
        let d2 = catalog::d2(Q);
        let c = compile_algebra(&d2, win(-2, 1, 4)).unwrap();
        let t = c.cohomology(win(-1, 0, 4));
        assert_eq!(t.row(0), vec![1, 1, 0, 0, 0]);
        assert_eq!(t.row(-1), vec![0; 5]);
    }

    #[test]
    fn cone_of_identity_is_acyclic() {
        let p1 = catalog::p1(Q);
        let region = win(-3, 2, 5);
        let c = compile_algebra(&p1, region).unwrap();
        let id = compile_algebra_map(&crate::cdga::AlgebraMap::identity(&p1), region).unwrap();
        let cone = compiled_cone(&c, &c, &id);
        cone.validate().unwrap();
        assert!(cone.cohomology(win(-2, 0, 5)).is_zero());
    }

    #[test]
    fn cone_of_zero_map_reproduces_target() {
        let amp = catalog::amp(Q);
        let region = win(-4, 2, 6);
        let zero = StratifiedComplex::new(Q, region);
        let c = compile_algebra(&amp, region).unwrap();
        let cone = compiled_cone(&zero, &c, &CompiledMap::new());
        let t = cone.cohomology(win(-2, 0, 6));
        let direct = c.cohomology(win(-2, 0, 6));
        assert_eq!(t, direct);
    }
}
