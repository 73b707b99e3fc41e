//! Semi-free resolutions by cycle killing.
//!
//! Given a target — either a semi-free module, or a ring viewed as a module
//! over another ring along a ring map — we build a semi-free module `P`
//! together with an augmentation `ε : P → T` whose cone is acyclic on the
//! requested window. Generators are adjoined stratum by stratum, highest
//! cohomological degree first and lowest weight first within a degree, so
//! the result is minimal on the window. Termination is semi-decidable: a
//! run that exhausts its stage budget reports its Betti trace instead.

use crate::dgmod::{ModElement, ModSymbol, Ring, RingMap, SemiFreeModule};
use crate::error::Result;
use crate::exactla::{Scalar, StratumMatrix};
use crate::strata::{StratifiedComplex, Window};

/// What a resolution resolves: a semi-free module over the resolving ring,
/// or (the rank-1 free module over) another ring acted on through a map.
#[derive(Debug, Clone)]
pub struct Target {
    module: SemiFreeModule,
    via: Option<RingMap>,
}

impl Target {
    pub fn module(m: SemiFreeModule) -> Target {
        Target {
            module: m,
            via: None,
        }
    }

    /// The target ring of `f` as a module over the source ring of `f`.
    pub fn along(f: RingMap) -> Target {
        Target {
            module: SemiFreeModule::rank_one(f.target_ring(), "1", 0, 0),
            via: Some(f),
        }
    }

    /// The ring the resolution lives over.
    pub fn source_ring(&self) -> Ring {
        match &self.via {
            Some(f) => f.source_ring(),
            None => self.module.ring().clone(),
        }
    }

    pub fn underlying(&self) -> &SemiFreeModule {
        &self.module
    }

    /// Action of a source-ring element on a target element.
    fn scale(&self, r: &crate::cdga::Element, x: &ModElement) -> Result<ModElement> {
        match &self.via {
            Some(f) => self.module.scale(&f.apply(r)?, x),
            None => self.module.scale(r, x),
        }
    }
}

/// A semi-free module `P` with augmentation `ε : P → T` and the trace of how
/// it was built.
#[derive(Debug, Clone)]
pub struct Resolution {
    pub module: SemiFreeModule,
    pub eps: Vec<ModElement>,
    pub target: Target,
    pub window: Window,
    /// Bidegrees of the symbols adjoined at each stage.
    pub stages: Vec<Vec<(i32, i32)>>,
    /// `true` when the augmentation cone is acyclic on the window.
    pub terminated: bool,
}

impl Resolution {
    /// Number of generators adjoined per stage.
    pub fn betti_trace(&self) -> Vec<usize> {
        self.stages.iter().map(|s| s.len()).collect()
    }

    /// The augmentation cone compiled over a region.
    pub fn cone(&self, region: Window) -> Result<StratifiedComplex> {
        eps_cone(&self.module, &self.eps, &self.target, region)
    }
}

/// Compiles the cone of an augmentation `ε : P → T` over a region:
/// `C^n = P^{n+1} ⊕ T^n`, `d(x, y) = (−d_P x, ε(x) + d_T y)`.
pub fn eps_cone(
    p: &SemiFreeModule,
    eps: &[ModElement],
    target: &Target,
    region: Window,
) -> Result<StratifiedComplex> {
    let field = target.module.ring().field();
    let mut c = StratifiedComplex::new(field, region);
    for (n, w) in region.strata() {
        let dim = p.stratum_basis(n + 1, w).len() + target.module.stratum_basis(n, w).len();
        c.set_dim(n, w, dim);
    }
    for (n, w) in region.strata() {
        if n + 1 > region.deg_hi {
            continue;
        }
        let (basis_p, basis_t) = (p.stratum_basis(n + 1, w), target.module.stratum_basis(n, w));
        let (tp, tt) = (
            p.stratum_basis(n + 2, w),
            target.module.stratum_basis(n + 1, w),
        );
        let (rows, cols) = (tp.len() + tt.len(), basis_p.len() + basis_t.len());
        if rows == 0 || cols == 0 {
            continue;
        }
        let mut mat = StratumMatrix::new(rows, cols, field);
        for (col, (i, mono)) in basis_p.iter().enumerate() {
            let x = ModElement::single(
                *i,
                crate::cdga::Element::from_terms([(mono.clone(), Scalar::one(field))]),
            );
            let dx = p.diff_element(&x)?.negate();
            for (row, s) in p.coords(&dx, &tp)?.into_iter().enumerate() {
                if !s.is_zero() {
                    mat.set(row, col, s)?;
                }
            }
            let ex = apply_eps(p, eps, target, &x)?;
            for (row, s) in target.module.coords(&ex, &tt)?.into_iter().enumerate() {
                if !s.is_zero() {
                    mat.set(tp.len() + row, col, s)?;
                }
            }
        }
        for (col, (i, mono)) in basis_t.iter().enumerate() {
            let y = ModElement::single(
                *i,
                crate::cdga::Element::from_terms([(mono.clone(), Scalar::one(field))]),
            );
            let dy = target.module.diff_element(&y)?;
            for (row, s) in target.module.coords(&dy, &tt)?.into_iter().enumerate() {
                if !s.is_zero() {
                    mat.set(tp.len() + row, basis_p.len() + col, s)?;
                }
            }
        }
        c.set_d(n, w, mat);
    }
    c.validate()?;
    Ok(c)
}

fn apply_eps(
    _p: &SemiFreeModule,
    eps: &[ModElement],
    target: &Target,
    x: &ModElement,
) -> Result<ModElement> {
    let mut out = ModElement::zero();
    for (j, c) in x.components() {
        out = out.add(&target.scale(c, &eps[j])?);
    }
    Ok(out)
}

/// Builds a semi-free resolution of `target` on `window`, adjoining at most
/// `max_stages` rounds of generators.
pub fn semifree_resolution(
    target: &Target,
    window: Window,
    max_stages: usize,
) -> Result<Resolution> {
    let ring = target.source_ring();
    let mut symbols: Vec<ModSymbol> = Vec::new();
    let mut diffs: Vec<ModElement> = Vec::new();
    let mut eps: Vec<ModElement> = Vec::new();
    let mut stages: Vec<Vec<(i32, i32)>> = Vec::new();
    let mut terminated = false;

    for _stage in 0..max_stages {
        let p = SemiFreeModule::new(ring.clone(), symbols.clone(), diffs.clone())?;
        let cone = eps_cone(&p, &eps, target, window.margin(1))?;
        let coh = cone.cohomology(window);
        if coh.is_zero() {
            terminated = true;
            break;
        }
        let n = *coh
            .nonzero_degrees()
            .last()
            .expect("nonzero table has a nonzero degree");
        let mut adjoined = Vec::new();
        for w in 0..=window.wt_cap {
            // recompute after every weight: generators adjoined at lower
            // weights can kill classes here
            let p = SemiFreeModule::new(ring.clone(), symbols.clone(), diffs.clone())?;
            let local = eps_cone(&p, &eps, target, Window::new(n - 1, n + 1, w)?)?;
            let (hdim, reps) = local.h_with_reps(n, w);
            if hdim == 0 {
                continue;
            }
            let bp = p.stratum_basis(n + 1, w);
            let bt = target.module.stratum_basis(n, w);
            for rep in reps {
                let xp = p.element_from_coords(&bp, &rep[..bp.len()]);
                let xt = target.module.element_from_coords(&bt, &rep[bp.len()..]);
                symbols.push(ModSymbol::new(&format!("g{}", symbols.len()), n, w));
                diffs.push(xp);
                eps.push(xt.negate());
                adjoined.push((n, w));
            }
        }
        stages.push(adjoined);
    }

    let module = SemiFreeModule::new(ring, symbols, diffs)?;
    if !terminated {
        let cone = eps_cone(&module, &eps, target, window.margin(1))?;
        terminated = cone.cohomology(window).is_zero();
    }
    Ok(Resolution {
        module,
        eps,
        target: target.clone(),
        window,
        stages,
        terminated,
    })
}
