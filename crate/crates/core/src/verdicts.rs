//! Theorem-level verifiers. Every check returns a `Verdict` whose status is
//! one of holds-on-window, fails-with-witness, or inconclusive — never a bare
//! boolean — and both sides of every equivalence are computed by independent
//! routes.

use std::sync::Arc;

use crate::cdga::{AlgebraMap, DGAlgebra, Element, GeneratorSpec, H0Map, H0Ring};
use crate::derived::{
    check_extension, default_diagonal_sequence, diagonal_retraction, koszul, koszul_module,
    Retraction,
};
use crate::dgmod::{hom_complex, hom_module, Ring, RingMap, SemiFreeModule};
use crate::error::{DgError, Result};
use crate::exactla::rref_of_rows;
use crate::exactla::{quotient_basis, Scalar};
use crate::resolve::{semifree_resolution, Target};
use crate::strata::{
    compile_algebra, compile_algebra_map, compiled_cone, CohomologyTable, Window,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Holds,
    Fails,
    Inconclusive,
}

impl Status {
    pub fn label(&self) -> &'static str {
        match self {
            Status::Holds => "holds-on-window",
            Status::Fails => "fails-with-witness",
            Status::Inconclusive => "inconclusive",
        }
    }
}

/// Outcome of one theorem-level check, with evidence and caveats.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub status: Status,
    pub window: Window,
    pub evidence: Vec<String>,
    pub caveats: Vec<String>,
}

impl Verdict {
    pub fn holds(window: Window, evidence: impl Into<String>) -> Verdict {
        Verdict {
            status: Status::Holds,
            window,
            evidence: vec![evidence.into()],
            caveats: Vec::new(),
        }
    }

    pub fn fails(window: Window, witness: impl Into<String>) -> Verdict {
        Verdict {
            status: Status::Fails,
            window,
            evidence: vec![witness.into()],
            caveats: Vec::new(),
        }
    }

    pub fn inconclusive(window: Window, reason: impl Into<String>) -> Verdict {
        Verdict {
            status: Status::Inconclusive,
            window,
            evidence: vec![reason.into()],
            caveats: Vec::new(),
        }
    }

    pub fn with_caveat(mut self, caveat: impl Into<String>) -> Verdict {
        self.caveats.push(caveat.into());
        self
    }

    pub fn is_holds(&self) -> bool {
        self.status == Status::Holds
    }

    pub fn is_fails(&self) -> bool {
        self.status == Status::Fails
    }
}

/// Cohomological amplitude of a table: the inf/sup of degrees with a nonzero
/// row. `boundary` is set when a nonzero row touches the window edge, i.e.
/// the true amplitude may extend past the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Amplitude {
    pub inf: i32,
    pub sup: i32,
    pub boundary: bool,
}

impl Amplitude {
    pub fn amp(&self) -> i32 {
        self.sup - self.inf
    }
}

pub fn amplitude(t: &CohomologyTable) -> Option<Amplitude> {
    let degs = t.nonzero_degrees();
    let (&inf, &sup) = (degs.first()?, degs.last()?);
    Some(Amplitude {
        inf,
        sup,
        boundary: inf == t.window.deg_lo || sup == t.window.deg_hi,
    })
}

fn first_nonzero(t: &CohomologyTable) -> Option<((i32, i32), usize)> {
    t.entries().find(|(_, d)| *d > 0)
}

/// Quasi-isomorphism check for an algebra map, via acyclicity of the
/// compiled cone on the window.
pub fn is_quasi_iso_alg(f: &AlgebraMap, window: Window) -> Result<Verdict> {
    let region = window.margin(2);
    let x = compile_algebra(f.source(), region)?;
    let y = compile_algebra(f.target(), region)?;
    let cm = compile_algebra_map(f, region)?;
    let cone = compiled_cone(&x, &y, &cm);
    let t = cone.cohomology(window);
    Ok(match first_nonzero(&t) {
        None => Verdict::holds(window, "cone acyclic on window"),
        Some(((d, w), dim)) => Verdict::fails(
            window,
            format!("cone has H^{d} of dim {dim} at weight {w}"),
        ),
    })
}

/// Quasi-isomorphism check for a chain map of semi-free modules.
pub fn is_quasi_iso(f: &crate::dgmod::ChainMap, window: Window) -> Result<Verdict> {
    let cone = f.cone()?;
    let t = cone.cohomology(window)?;
    Ok(match first_nonzero(&t) {
        None => Verdict::holds(window, "cone acyclic on window"),
        Some(((d, w), dim)) => Verdict::fails(
            window,
            format!("cone has H^{d} of dim {dim} at weight {w}"),
        ),
    })
}

/// How the flatness of a map is certified.
#[derive(Debug, Clone)]
pub enum FlatTag {
    /// `B = A ⊗ C` for a fiber `C` with amplitude 0 on the window:
    /// flat dimension 0 by construction.
    FreeExtension { fiber: Arc<DGAlgebra> },
    /// Anything else: only a finite battery of checks is available.
    UserClaimed,
}

#[derive(Debug, Clone)]
pub struct FlatMapWitness {
    pub phi: AlgebraMap,
    pub tag: FlatTag,
}

impl FlatMapWitness {
    pub fn is_free_extension(&self) -> bool {
        matches!(self.tag, FlatTag::FreeExtension { .. })
    }
}

/// Classifies a map: extensions whose new differentials only involve new
/// generators split off a fiber algebra `C` over the base field; if `C` has
/// amplitude 0 on the window the map is flat of dimension 0 by construction.
pub fn flat_witness(phi: &AlgebraMap, window: Window) -> Result<FlatMapWitness> {
    if check_extension(phi).is_ok() {
        let (a, b) = (phi.source(), phi.target());
        let na = a.arity();
        let fiber_only = (na..b.arity()).all(|i| {
            b.diff_of_gen(i)
                .terms()
                .all(|(m, _)| m.exps()[..na].iter().all(|&e| e == 0))
        });
        if fiber_only {
            let gens: Vec<GeneratorSpec> = b.generators()[na..].to_vec();
            let diffs: Vec<Element> = (na..b.arity())
                .map(|i| {
                    Element::from_terms(b.diff_of_gen(i).terms().map(|(m, s)| {
                        (
                            crate::cdga::Monomial::from_exps(m.exps()[na..].to_vec()),
                            s.clone(),
                        )
                    }))
                })
                .collect();
            let fiber = DGAlgebra::new(b.field(), gens, diffs)?;
            let fw = Window::new(window.deg_lo.min(-1), 0, window.wt_cap)?;
            let t = compile_algebra(&fiber, fw.margin(1))?.cohomology(fw);
            if t.nonzero_degrees().iter().all(|&d| d == 0) {
                return Ok(FlatMapWitness {
                    phi: phi.clone(),
                    tag: FlatTag::FreeExtension { fiber },
                });
            }
        }
    }
    Ok(FlatMapWitness {
        phi: phi.clone(),
        tag: FlatTag::UserClaimed,
    })
}

/// Default test modules over `a`: the rank-1 free module and Koszul modules
/// on each degree-0 generator and its square.
pub fn default_test_modules(a: &Arc<DGAlgebra>) -> Result<Vec<(String, SemiFreeModule)>> {
    let mut out = vec![("free".to_string(), SemiFreeModule::from_algebra(a))];
    for (i, g) in a.generators().iter().enumerate() {
        if g.deg == 0 {
            let x = a.gen_element(i);
            out.push((
                format!("koszul({})", g.name),
                koszul_module(a, &[x.clone()])?,
            ));
            out.push((
                format!("koszul({}^2)", g.name),
                koszul_module(a, &[a.pow(&x, 2)?])?,
            ));
        }
    }
    Ok(out)
}

/// Flat-dimension-0 check. Free extensions get the exact base-change
/// identity `dim H^n(M⊗B)_w = Σ_v dim H^n(M)_v · dim H⁰(C)_{w−v}` per test
/// module; user-claimed maps get an amplitude battery and an H⁰-freeness
/// probe, and can at best be inconclusive-positive.
pub fn check_flat_dim0(
    w: &FlatMapWitness,
    test_modules: &[(String, SemiFreeModule)],
    window: Window,
) -> Result<Verdict> {
    match &w.tag {
        FlatTag::FreeExtension { fiber } => {
            let cap = window.wt_cap;
            let fiber_h0 = H0Ring::new(fiber, cap)?.hilbert();
            for (name, m) in test_modules {
                let pushed = m.pushforward(&RingMap::Dg(w.phi.clone()))?;
                let lhs = pushed.cohomology(window)?;
                let rhs = m.cohomology(window)?;
                for (n, wt) in window.strata() {
                    let mut expect = 0usize;
                    for v in 0..=wt {
                        expect += rhs.dim(n, v) * fiber_h0[(wt - v) as usize];
                    }
                    if lhs.dim(n, wt) != expect {
                        return Ok(Verdict::fails(
                            window,
                            format!(
                                "base-change identity fails for {name} at (deg {n}, wt {wt}): {} vs {}",
                                lhs.dim(n, wt),
                                expect
                            ),
                        ));
                    }
                }
            }
            Ok(Verdict::holds(
                window,
                format!(
                    "free extension; base-change identity verified on {} test modules",
                    test_modules.len()
                ),
            ))
        }
        FlatTag::UserClaimed => {
            for (name, m) in test_modules {
                let pushed = m.pushforward(&RingMap::Dg(w.phi.clone()))?;
                let am = amplitude(&m.cohomology(window)?);
                let ap = amplitude(&pushed.cohomology(window)?);
                if let (Some(am), Some(ap)) = (am, ap) {
                    if ap.amp() > am.amp() {
                        return Ok(Verdict::fails(
                            window,
                            format!(
                                "amplitude grows under − ⊗ B for {name}: {} vs {}",
                                ap.amp(),
                                am.amp()
                            ),
                        ));
                    }
                }
            }
            // H⁰-freeness probe: the minimal resolution of H⁰(B) over H⁰(A)
            // must not need relation symbols in the window
            let cap = window.wt_cap;
            let h0a = Arc::new(H0Ring::new(w.phi.source(), cap)?);
            let h0b = Arc::new(H0Ring::new(w.phi.target(), cap)?);
            let f = RingMap::H0(H0Map::induced(&w.phi, h0a, h0b)?);
            let probe = semifree_resolution(&Target::along(f), Window::new(-1, 0, cap)?, 2)?;
            if let Some((d, wt)) = probe
                .stages
                .iter()
                .flatten()
                .find(|(d, _)| *d < 0)
            {
                return Ok(Verdict::fails(
                    window,
                    format!("H⁰(B) has a relation over H⁰(A) at (deg {d}, wt {wt})"),
                ));
            }
            Ok(Verdict::inconclusive(
                window,
                format!(
                    "battery passed on {} test modules; flatness not certified",
                    test_modules.len()
                ),
            )
            .with_caveat("battery-only flatness"))
        }
    }
}

fn seq_weights(a: &DGAlgebra, seq: &[Element]) -> Result<Vec<i32>> {
    seq.iter()
        .map(|s| match a.bidegree(s)? {
            Some((0, w)) => Ok(w),
            _ => Err(DgError::Invalid(
                "sequence entries must be nonzero homogeneous of degree 0".into(),
            )),
        })
        .collect()
}

/// `∏(1 − t^{w_i})` applied to a single dimension row, truncated.
fn hilbert_transform(row: &[usize], wts: &[i32]) -> Vec<i64> {
    let mut out: Vec<i64> = row.iter().map(|&d| d as i64).collect();
    for &w in wts {
        let prev = out.clone();
        for (i, o) in out.iter_mut().enumerate() {
            if i as i32 >= w {
                *o = prev[i] - prev[i - w as usize];
            }
        }
    }
    out
}

/// Regular-sequence certificate by two independent routes: stepwise
/// injectivity of multiplication on the lowest nonzero cohomology row of
/// each iterated Koszul stage, and the Hilbert-series identity
/// `rows(H(K(A;seq))) = ∏(1 − t^{w_i}) · rows(H(A))`.
pub fn is_regular_sequence(
    a: &Arc<DGAlgebra>,
    seq: &[Element],
    window: Window,
) -> Result<Verdict> {
    let wts = seq_weights(a, seq)?;
    if seq.is_empty() {
        return Ok(Verdict::holds(window, "empty sequence is regular"));
    }

    // route (i): injectivity on H^inf of each stage
    let mut route1: std::result::Result<(), String> = Ok(());
    let mut stage = a.clone();
    for (i, s) in seq.iter().enumerate() {
        let t = compile_algebra(&stage, window.margin(1))?.cohomology(window);
        let Some(ampl) = amplitude(&t) else {
            break; // zero cohomology: nothing left to divide
        };
        let inf = ampl.inf;
        let lift = s.padded(stage.arity());
        if let Some((d, wt)) =
            mult_injectivity_witness(&stage, inf, &lift, wts[i], window)?
        {
            route1 = Err(format!(
                "entry {} is a zero-divisor on H^{d} at weight {wt}",
                i + 1
            ));
            break;
        }
        let (next, _) = koszul(&stage, &[lift])?;
        stage = next;
    }

    // route (ii): Hilbert identity
    let (kos, _) = koszul(a, &seq.to_vec())?;
    let ta = compile_algebra(a, window.margin(1))?.cohomology(window);
    let tk = compile_algebra(&kos, window.margin(1))?.cohomology(window);
    let mut route2: std::result::Result<(), String> = Ok(());
    'deg: for n in window.deg_lo..=window.deg_hi {
        let expect = hilbert_transform(&ta.row(n), &wts);
        let actual = tk.row(n);
        for wt in 0..=window.wt_cap {
            if expect[wt as usize] != actual[wt as usize] as i64 {
                route2 = Err(format!(
                    "Hilbert identity fails at (deg {n}, wt {wt}): expected {}, got {}",
                    expect[wt as usize], actual[wt as usize]
                ));
                break 'deg;
            }
        }
    }

    Ok(match (&route1, &route2) {
        (Ok(()), Ok(())) => Verdict::holds(
            window,
            "injectivity route and Hilbert route both certify regularity",
        ),
        (Err(w1), Err(w2)) => Verdict::fails(window, format!("{w1}; {w2}")),
        (Err(w), Ok(())) => {
            Verdict::fails(window, format!("routes disagree: injectivity fails ({w}) but Hilbert identity holds"))
                .with_caveat("route disagreement")
        }
        (Ok(()), Err(w)) => {
            Verdict::fails(window, format!("routes disagree: Hilbert identity fails ({w}) but injectivity holds"))
                .with_caveat("route disagreement")
        }
    })
}

/// Returns a witness stratum where multiplication by `a` on the degree-`deg`
/// cohomology row fails to be injective, if any.
fn mult_injectivity_witness(
    alg: &Arc<DGAlgebra>,
    deg: i32,
    a: &Element,
    awt: i32,
    window: Window,
) -> Result<Option<(i32, i32)>> {
    let field = alg.field();
    let c = compile_algebra(alg, window.margin(1))?;
    for w in 0..=(window.wt_cap - awt) {
        let (hdim, reps) = c.h_with_reps(deg, w);
        if hdim == 0 {
            continue;
        }
        let src = alg.basis(deg, w);
        let tgt = alg.basis(deg, w + awt);
        let mut rows = Vec::new();
        for m in alg.basis(deg - 1, w + awt) {
            let dm = alg.differential(&Element::from_terms([(m, Scalar::one(field))]))?;
            rows.push(alg.coords(&dm, &tgt)?);
        }
        let base = rref_of_rows(&rows, tgt.len(), field).rank;
        for rep in &reps {
            let x = alg.element_from_coords(&src, rep);
            rows.push(alg.coords(&alg.multiply(a, &x)?, &tgt)?);
        }
        let total = rref_of_rows(&rows, tgt.len(), field).rank;
        if total != base + reps.len() {
            return Ok(Some((deg, w)));
        }
    }
    Ok(None)
}

/// Perfectness of a semi-free module over its DG-ring via the search route:
/// reduce, then run the minimal resolution of the reduction over H⁰.
pub fn is_perfect_module(
    m: &SemiFreeModule,
    window: Window,
    max_stages: usize,
) -> Result<Verdict> {
    let a = m.ring().ambient().clone();
    let cap = window.wt_cap;
    let (_, red) = crate::derived::reduction(&a, cap)?;
    let reduced = m.pushforward(&red)?;
    let rwindow = Window::new(window.deg_lo.min(-(max_stages as i32)), window.deg_hi, cap)?;
    let r = semifree_resolution(&Target::module(reduced), rwindow, max_stages)?;
    Ok(perfectness_verdict(&r, window, max_stages))
}

fn perfectness_verdict(
    r: &crate::resolve::Resolution,
    window: Window,
    max_stages: usize,
) -> Verdict {
    if r.terminated {
        Verdict::holds(
            window,
            format!(
                "minimal resolution terminated with {} generators: {}",
                r.module.rank(),
                bidegree_list(&r.module)
            ),
        )
    } else {
        Verdict::fails(
            window,
            format!(
                "not perfect within {max_stages} stages; Betti trace {:?}",
                r.betti_trace()
            ),
        )
    }
}

fn bidegree_list(m: &SemiFreeModule) -> String {
    m.symbols()
        .iter()
        .map(|s| format!("({},{})", s.deg, s.wt))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Perfectness of `B` over its diagonal `E = B ⊗_A B`: first the Koszul
/// witness route (the composite `B → K(E; seq)` is a quasi-isomorphism),
/// then the search route (minimal resolution of `H⁰(B)` over `H⁰(E)`).
pub fn is_perfect_diagonal(
    r: &Retraction,
    window: Window,
    max_stages: usize,
) -> Result<Verdict> {
    let seq = default_diagonal_sequence(r);
    let (_, kappa) = koszul(&r.e, &seq)?;
    let composite = r.iota_1.compose(&kappa)?;
    let qi = is_quasi_iso_alg(&composite, window)?;
    if qi.is_holds() {
        return Ok(Verdict::holds(
            window,
            format!(
                "Koszul witness: B → K(E; diagonal sequence) is a quasi-isomorphism; rank {}",
                1usize << seq.len()
            ),
        ));
    }
    let cap = window.wt_cap;
    let h0e = Arc::new(H0Ring::new(&r.e, cap)?);
    let h0b = Arc::new(H0Ring::new(r.phi.target(), cap)?);
    let f = RingMap::H0(H0Map::induced(&r.delta, h0e, h0b)?);
    let rwindow = Window::new(window.deg_lo.min(-(max_stages as i32)), 0, cap)?;
    let res = semifree_resolution(&Target::along(f), rwindow, max_stages)?;
    Ok(perfectness_verdict(&res, window, max_stages))
}

/// Invertibility of a module over its ring, via the reduction: the table of
/// `M ⊗ H⁰` must be a single Hilbert row of the quotient, shifted by some
/// `(n, t)`. With `expect` given, that exact shift is demanded.
pub fn is_invertible(
    m: &SemiFreeModule,
    quotient_hilbert: &[usize],
    expect: Option<(i32, i32)>,
    window: Window,
) -> Result<(Verdict, Option<(i32, i32)>)> {
    let a = m.ring().ambient().clone();
    let extra = m.symbols().iter().map(|s| (-s.wt).max(0)).max().unwrap_or(0);
    let (_, red) = crate::derived::reduction(&a, window.wt_cap + extra)?;
    let t = m.pushforward(&red)?.cohomology(window)?;
    let degs = t.nonzero_degrees();
    if degs.len() != 1 {
        return Ok((
            Verdict::fails(
                window,
                format!("reduction is not concentrated in one degree: {degs:?}"),
            ),
            None,
        ));
    }
    let n = degs[0];
    let matches_shift = |tw: i32| -> bool {
        (0..=window.wt_cap).all(|w| {
            let idx = w - tw;
            let want = if idx < 0 {
                0
            } else if (idx as usize) < quotient_hilbert.len() {
                quotient_hilbert[idx as usize]
            } else {
                return true; // beyond the known Hilbert range
            };
            t.dim(n, w) == want
        })
    };
    match expect {
        Some((n0, t0)) => {
            if n == n0 && matches_shift(t0) {
                Ok((
                    Verdict::holds(window, format!("free of rank 1 at (deg {n}, twist {t0})")),
                    Some((n, t0)),
                ))
            } else {
                Ok((
                    Verdict::fails(
                        window,
                        format!("reduction does not match a rank-1 row at (deg {n0}, twist {t0})"),
                    ),
                    None,
                ))
            }
        }
        None => {
            let cap = window.wt_cap;
            let mut shifts: Vec<i32> = (-cap..=cap).collect();
            shifts.sort_by_key(|t| (t.abs(), *t));
            match shifts.into_iter().find(|&tw| matches_shift(tw)) {
                Some(tw) => Ok((
                    Verdict::holds(window, format!("free of rank 1 at (deg {n}, twist {tw})")),
                    Some((n, tw)),
                )),
                None => Ok((
                    Verdict::fails(window, "reduction row is not a shifted Hilbert row"),
                    None,
                )),
            }
        }
    }
}

/// Smoothness of `H⁰(φ)` by stratumwise elimination: `H⁰(B)` must be, up to
/// the weight cap, a free polynomial extension of the image of `H⁰(A)` on
/// weighted generators discovered weight by weight.
pub fn h0_smooth(phi: &AlgebraMap, window: Window) -> Result<Verdict> {
    let cap = window.wt_cap;
    let field = phi.source().field();
    let h0a = H0Ring::new(phi.source(), cap)?;
    let h0b = Arc::new(H0Ring::new(phi.target(), cap)?);

    // independent images of H⁰(A) strata inside H⁰(B)
    let mut img: Vec<Vec<Element>> = vec![Vec::new(); (cap + 1) as usize];
    img[0].push(phi.target().one());
    for v in 1..=cap {
        let mut rows: Vec<Vec<Scalar>> = Vec::new();
        for mono in h0a.stratum_basis(v) {
            let e = phi.apply(&Element::from_terms([(mono, Scalar::one(field))]))?;
            let nf = h0b.nf(&e)?;
            if nf.is_zero() {
                continue;
            }
            let coords = h0b.coords(&nf, v)?;
            let before = rref_of_rows(&rows, coords.len(), field).rank;
            rows.push(coords);
            if rref_of_rows(&rows, h0b.dim(v), field).rank > before {
                img[v as usize].push(nf);
            } else {
                rows.pop();
            }
        }
    }

    let mut gens: Vec<(Element, i32)> = Vec::new();
    for w in 1..=cap {
        // monomials in the chosen generators, grouped by weight
        let monos = gen_monomials(&h0b, &gens, w)?;
        let mut predicted = 0usize;
        let mut rows: Vec<Vec<Scalar>> = Vec::new();
        for (mu, v) in &monos {
            let rest = (w - v) as usize;
            predicted += img[rest].len();
            for e in &img[rest] {
                let prod = h0b.multiply(mu, e)?;
                if !prod.is_zero() {
                    rows.push(h0b.coords(&prod, w)?);
                }
            }
        }
        let actual = rref_of_rows(&rows, h0b.dim(w), field).rank;
        if actual < predicted {
            return Ok(Verdict::fails(
                window,
                format!("relation among generators survives elimination at weight {w}"),
            ));
        }
        if actual < h0b.dim(w) {
            let basis = h0b.stratum_basis(w);
            for idx in quotient_basis(&rows, h0b.dim(w), field) {
                gens.push((
                    Element::from_terms([(basis[idx].clone(), Scalar::one(field))]),
                    w,
                ));
            }
        }
    }
    Ok(Verdict::holds(
        window,
        format!(
            "free polynomial extension on {} generators of weights {:?}",
            gens.len(),
            gens.iter().map(|(_, w)| *w).collect::<Vec<_>>()
        ),
    ))
}

/// All monomials of total weight `w` in the chosen generators, paired with
/// their weight (equal to `w`... the pair carries the weight spent on the
/// monomial so callers can convolve with the base image).
fn gen_monomials(
    h0b: &Arc<H0Ring>,
    gens: &[(Element, i32)],
    w: i32,
) -> Result<Vec<(Element, i32)>> {
    // includes the empty monomial (weight 0)
    let mut acc: Vec<(Element, i32)> = vec![(h0b.algebra().one(), 0)];
    for (g, gw) in gens {
        let mut next = Vec::new();
        for (e, v) in &acc {
            let mut cur = e.clone();
            let mut cw = *v;
            loop {
                next.push((cur.clone(), cw));
                cw += gw;
                if cw > w {
                    break;
                }
                cur = h0b.multiply(&cur, g)?;
                if cur.is_zero() {
                    // a nilpotent generator still contributes formal monomials:
                    // keep the zero product so relations are detected
                    while cw <= w {
                        next.push((Element::zero(), cw));
                        cw += gw;
                    }
                    break;
                }
            }
            let _ = cw;
        }
        acc = next;
    }
    Ok(acc.into_iter().filter(|(_, v)| *v <= w).collect())
}

/// Report of the Main Theorem check: both sides of the smoothness
/// equivalence computed independently.
#[derive(Debug, Clone)]
pub struct SmoothnessReport {
    pub perfect_side: Verdict,
    pub h0_side: Verdict,
    pub agreement: Verdict,
}

pub fn verify_smoothness_equivalence(
    phi: &AlgebraMap,
    window: Window,
    max_stages: usize,
) -> Result<SmoothnessReport> {
    let r = diagonal_retraction(phi)?;
    let perfect_side = is_perfect_diagonal(&r, window, max_stages)?;
    let h0_side = h0_smooth(phi, window)?;
    let agreement = match (perfect_side.status, h0_side.status) {
        (Status::Holds, Status::Holds) => {
            Verdict::holds(window, "both sides hold: homologically smooth")
        }
        (Status::Fails, Status::Fails) => {
            Verdict::holds(window, "both sides fail: not smooth, equivalence consistent")
        }
        (Status::Inconclusive, _) | (_, Status::Inconclusive) => {
            Verdict::inconclusive(window, "one side inconclusive")
        }
        _ => Verdict::fails(
            window,
            format!(
                "sides disagree: perfectness {} vs H⁰-smoothness {}",
                perfect_side.status.label(),
                h0_side.status.label()
            ),
        ),
    };
    Ok(SmoothnessReport {
        perfect_side,
        h0_side,
        agreement,
    })
}

/// Report of the local-complete-intersection check.
#[derive(Debug, Clone)]
pub struct LciReport {
    pub retraction: Retraction,
    pub seq: Vec<Element>,
    pub kernel: Verdict,
    pub composition: Verdict,
    pub hilbert: Verdict,
    pub regular: Verdict,
    pub overall: Verdict,
}

pub fn verify_lci(
    phi: &AlgebraMap,
    user_seq: Option<Vec<Element>>,
    window: Window,
) -> Result<LciReport> {
    let r = diagonal_retraction(phi)?;
    let default = default_diagonal_sequence(&r);
    if default.is_empty() {
        if let Some(s) = &user_seq {
            if !s.is_empty() {
                return Err(DgError::Invalid(
                    "nonempty sequence given but the diagonal kernel has no degree-0 generators"
                        .into(),
                ));
            }
        }
    }
    let seq = user_seq.unwrap_or(default);
    let cap = window.wt_cap;

    // (i) sequence lies in ker H⁰(Δ)
    let h0b = H0Ring::new(phi.target(), cap)?;
    let mut kernel = Verdict::holds(window, "sequence lies in ker H⁰(Δ)");
    for (i, s) in seq.iter().enumerate() {
        let image = r.delta.apply(s)?;
        if !image.is_zero() && !h0b.nf(&image)?.is_zero() {
            kernel = Verdict::fails(window, format!("entry {} not in ker H⁰(Δ)", i + 1));
            break;
        }
    }

    // (ii) the composite B → E → K(E; seq) is a quasi-isomorphism
    let (_, kappa) = koszul(&r.e, &seq)?;
    let composition = is_quasi_iso_alg(&r.iota_1.compose(&kappa)?, window)?;

    // (iii) Hilbert: H⁰(E) transformed by ∏(1 − t^{w_i}) equals H⁰(B)
    let wts = seq_weights(&r.e, &seq)?;
    let h0e = H0Ring::new(&r.e, cap)?;
    let expect = hilbert_transform(&h0e.hilbert(), &wts);
    let actual = h0b.hilbert();
    let hilbert = match (0..=cap as usize).find(|&i| expect[i] != actual[i] as i64) {
        None => Verdict::holds(window, "H⁰(E)/(seq) matches H⁰(B) weightwise"),
        Some(i) => Verdict::fails(
            window,
            format!(
                "H⁰ Hilbert mismatch at weight {i}: {} vs {}",
                expect[i], actual[i]
            ),
        ),
    };

    // (iv) regularity of the sequence over E
    let regular = is_regular_sequence(&r.e, &seq, window)?;

    let all = [&kernel, &composition, &hilbert, &regular];
    let overall = if all.iter().all(|v| v.is_holds()) {
        Verdict::holds(window, "all four lci sub-checks hold")
    } else {
        let failed: Vec<&str> = [
            ("kernel", &kernel),
            ("composition", &composition),
            ("hilbert", &hilbert),
            ("regularity", &regular),
        ]
        .iter()
        .filter(|(_, v)| !v.is_holds())
        .map(|(n, _)| *n)
        .collect();
        Verdict::fails(window, format!("sub-checks failed: {}", failed.join(", ")))
    };
    Ok(LciReport {
        retraction: r,
        seq,
        kernel,
        composition,
        hilbert,
        regular,
        overall,
    })
}

/// A test module for the duality check: the diagonal ring itself, or the
/// target algebra shifted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VdbModule {
    Diagonal,
    Target(i32),
}

impl VdbModule {
    pub fn name(&self) -> String {
        match self {
            VdbModule::Diagonal => "E".to_string(),
            VdbModule::Target(0) => "B".to_string(),
            VdbModule::Target(s) => format!("B[{s}]"),
        }
    }
}

/// Van den Bergh duality report: the dualizing module `Hom_E(P, E)` with its
/// invertibility parameters, and the Ext/Tor comparison per test module.
#[derive(Debug, Clone)]
pub struct DualityReport {
    pub n: i32,
    pub twist: i32,
    pub invertible: Verdict,
    pub per_module: Vec<(String, Verdict)>,
    pub matched: bool,
    pub overall: Verdict,
}

pub fn verify_vdb(
    lci: &LciReport,
    modules: &[VdbModule],
    window: Window,
) -> Result<DualityReport> {
    if !lci.overall.is_holds() {
        return Err(DgError::Invalid(
            "duality check requires a successful lci certificate".into(),
        ));
    }
    let r = &lci.retraction;
    let b = r.phi.target().clone();
    let n = lci.seq.len() as i32;
    let w0: i32 = seq_weights(&r.e, &lci.seq)?.iter().sum();
    let twist = -w0;
    let p = koszul_module(&r.e, &lci.seq)?;

    // dualizing module and its invertibility over the diagonal; its
    // reduction sits in degree n, so widen the window to see it
    let m = hom_module(&p, &SemiFreeModule::from_algebra(&r.e))?;
    let hb = H0Ring::new(&b, window.wt_cap + w0)?.hilbert();
    let iw = Window::new(window.deg_lo, window.deg_hi.max(n), window.wt_cap)?;
    let (invertible, _) = is_invertible(&m, &hb, Some((n, twist)), iw)?;

    let tor_window = Window::new(window.deg_lo - n, window.deg_hi - n, window.wt_cap + w0)?;
    let mut per_module = Vec::new();
    for x in modules {
        let (ext, tor) = match x {
            VdbModule::Diagonal => {
                let free = SemiFreeModule::from_algebra(&r.e);
                let ext = hom_complex(&p, &free, window.margin(1))?.cohomology(window);
                (ext, p.cohomology(tor_window)?)
            }
            VdbModule::Target(s) => {
                let pb = p.pushforward(&RingMap::Dg(r.delta.clone()))?;
                let free = SemiFreeModule::from_algebra(&b).shift(*s);
                let ext = hom_complex(&pb, &free, window.margin(1))?.cohomology(window);
                (ext, pb.shift(*s).cohomology(tor_window)?)
            }
        };
        let mut verdict = Verdict::holds(
            window,
            format!("dim Ext^i_w = dim Tor_{{n−i}}_{{w+{w0}}} on the window"),
        );
        'scan: for (i, w) in window.strata() {
            let lhs = ext.dim(i, w);
            let rhs = tor.dim(i - n, w + w0);
            if lhs != rhs {
                verdict = Verdict::fails(
                    window,
                    format!("duality mismatch at (deg {i}, wt {w}): Ext {lhs} vs Tor {rhs}"),
                );
                break 'scan;
            }
        }
        per_module.push((x.name(), verdict));
    }
    let matched = invertible.is_holds() && per_module.iter().all(|(_, v)| v.is_holds());
    let overall = if matched {
        Verdict::holds(window, format!("matched duality with n = {n}, twist {twist}"))
    } else {
        Verdict::fails(window, "duality tables do not match")
    };
    Ok(DualityReport {
        n,
        twist,
        invertible,
        per_module,
        matched,
        overall,
    })
}

/// The rigid module `N = B[n]` twisted by `w₀`, and the table identity
/// `H(Hom_E(P, N ⊗ N)) = H(N)`.
pub fn rigid_module(
    lci: &LciReport,
    vdb: &DualityReport,
    window: Window,
) -> Result<(SemiFreeModule, Verdict)> {
    if !vdb.matched {
        return Err(DgError::Invalid(
            "rigidity requires an invertible dualizing module".into(),
        ));
    }
    let r = &lci.retraction;
    let b = r.phi.target().clone();
    let n = vdb.n;
    let w0 = -vdb.twist;
    let p = koszul_module(&r.e, &lci.seq)?;
    let nn = SemiFreeModule::rank_one(Ring::Dg(r.e.clone()), "n⊗n", -2 * n, 2 * w0);
    let nmod = SemiFreeModule::rank_one(Ring::Dg(b), "n", -n, w0);
    let lhs = hom_complex(&p, &nn, window.margin(1))?.cohomology(window);
    let rhs = nmod.cohomology(window)?;
    let verdict = if lhs == rhs {
        Verdict::holds(window, "H(Hom_E(B, N⊗N)) = H(N) on the window")
    } else {
        let (stratum, dim) = lhs
            .entries()
            .find(|((d, w), v)| *v != rhs.dim(*d, *w))
            .map(|(s, v)| (s, v))
            .unwrap_or(((0, 0), 0));
        Verdict::fails(
            window,
            format!(
                "rigidity tables differ at (deg {}, wt {}): {} vs {}",
                stratum.0,
                stratum.1,
                dim,
                rhs.dim(stratum.0, stratum.1)
            ),
        )
    };
    Ok((nmod, verdict))
}

/// Report for the smooth-implies-ordinary theorem on a single algebra.
#[derive(Debug, Clone)]
pub struct FlatHzReport {
    pub smooth: Verdict,
    pub reduced: Verdict,
    pub overall: Verdict,
}

/// For `A` over the base field: (a) homological smoothness via perfectness
/// of the diagonal, (b) window-acyclicity of `A` in negative degrees. The
/// theorem forbids the quadrant smooth ∧ not-acyclic.
pub fn verify_flathz(
    a: &Arc<DGAlgebra>,
    window: Window,
    max_stages: usize,
) -> Result<FlatHzReport> {
    let triv = DGAlgebra::new(a.field(), Vec::new(), Vec::new())?;
    let phi = AlgebraMap::new(triv, a.clone(), Vec::new())?;
    let r = diagonal_retraction(&phi)?;
    let smooth = is_perfect_diagonal(&r, window, max_stages)?;
    let t = compile_algebra(a, window.margin(1))?.cohomology(window);
    let reduced = match t.entries().find(|((d, _), v)| *d < 0 && *v > 0) {
        None => Verdict::holds(window, "A → H⁰(A) is a window quasi-isomorphism"),
        Some(((d, w), dim)) => Verdict::fails(
            window,
            format!("H^{d} has dim {dim} at weight {w}: A is not its own H⁰"),
        ),
    };
    let overall = if smooth.is_holds() && reduced.is_fails() {
        Verdict::fails(
            window,
            "forbidden quadrant: smooth with positive amplitude",
        )
    } else {
        Verdict::holds(
            window,
            format!(
                "consistent with the theorem: smoothness {}, reduction {}",
                smooth.status.label(),
                reduced.status.label()
            ),
        )
    };
    Ok(FlatHzReport {
        smooth,
        reduced,
        overall,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::exactla::FieldSpec;

    const Q: FieldSpec = FieldSpec::Q;

    fn win(lo: i32, hi: i32, cap: i32) -> Window {
        Window::new(lo, hi, cap).unwrap()
    }

    fn incl(a: &Arc<DGAlgebra>, b: &Arc<DGAlgebra>) -> AlgebraMap {
        let images = (0..a.arity()).map(|i| b.gen_element(i)).collect();
        AlgebraMap::new(a.clone(), b.clone(), images).unwrap()
    }

    #[test]
    fn amplitude_of_shipped_algebras() {
        let w = win(-3, 0, 6);
        let amp = |a: &Arc<DGAlgebra>| {
            amplitude(&compile_algebra(a, w.margin(1)).unwrap().cohomology(w))
        };
        let p1 = amp(&catalog::p1(Q)).unwrap();
        assert_eq!((p1.inf, p1.sup), (0, 0));
        let k1 = amp(&catalog::k1(Q)).unwrap();
        assert_eq!((k1.inf, k1.sup), (0, 0));
        let a = amp(&catalog::amp(Q)).unwrap();
        assert_eq!((a.inf, a.sup, a.amp()), (-1, 0, 1));
    }

    #[test]
    fn quasi_iso_identity_and_koszul_composite() {
        let p1 = catalog::p1(Q);
        let w = win(-3, 0, 8);
        assert!(is_quasi_iso_alg(&AlgebraMap::identity(&p1), w)
            .unwrap()
            .is_holds());
        // κ∘ι: B → K(E; x−y) for φ: k → k[x]
        let triv = catalog::trivial(Q);
        let phi = incl(&triv, &p1);
        let r = diagonal_retraction(&phi).unwrap();
        let seq = default_diagonal_sequence(&r);
        let (_, kappa) = koszul(&r.e, &seq).unwrap();
        let comp = r.iota_1.compose(&kappa).unwrap();
        assert!(is_quasi_iso_alg(&comp, w).unwrap().is_holds());
        // κ alone is not a quasi-isomorphism
        assert!(is_quasi_iso_alg(&kappa, w).unwrap().is_fails());
    }

    #[test]
    fn flat_witness_classification() {
        let w = win(-3, 0, 6);
        let triv = catalog::trivial(Q);
        let (bamp, bincl) = catalog::b_amp(Q);
        let _ = bamp;
        assert!(flat_witness(&bincl, w).unwrap().is_free_extension());
        // k → D2 is flat: the fiber D2 has amplitude 0
        let d2 = catalog::d2(Q);
        assert!(flat_witness(&incl(&triv, &d2), w).unwrap().is_free_extension());
        // k[x] → K1 is an extension but the new differential hits the base
        let p1 = catalog::p1(Q);
        let k1 = catalog::k1(Q);
        assert!(!flat_witness(&incl(&p1, &k1), w).unwrap().is_free_extension());
    }

    #[test]
    fn flat_dim0_battery_catches_the_non_flat_collapse() {
        // ψ: B-AMP → AMP with x ↦ 0, claimed flat
        let amp = catalog::amp(Q);
        let (bamp, _) = catalog::b_amp(Q);
        let mut images: Vec<Element> = (0..amp.arity()).map(|i| amp.gen_element(i)).collect();
        images.push(Element::zero());
        let psi = AlgebraMap::new(bamp.clone(), amp, images).unwrap();
        let w = win(-3, 0, 8);
        let fw = flat_witness(&psi, w).unwrap();
        assert!(!fw.is_free_extension());
        let mods = default_test_modules(&bamp).unwrap();
        let v = check_flat_dim0(&fw, &mods, w).unwrap();
        assert!(v.is_fails(), "evidence: {:?}", v.evidence);
    }

    #[test]
    fn flat_dim0_free_extension_verifies_base_change() {
        let amp = catalog::amp(Q);
        let (_, bincl) = catalog::b_amp(Q);
        let w = win(-4, 0, 10);
        let fw = flat_witness(&bincl, w).unwrap();
        let mods = default_test_modules(&amp).unwrap();
        assert!(mods.len() >= 3);
        let v = check_flat_dim0(&fw, &mods, w).unwrap();
        assert!(v.is_holds(), "evidence: {:?}", v.evidence);
    }

    #[test]
    fn regular_sequence_verdicts() {
        let w = win(-3, 0, 8);
        // x − y over k[x,y]
        let e = catalog::poly2(Q);
        let xy = e.gen_element(0).sub(&e.gen_element(1));
        assert!(is_regular_sequence(&e, &[xy], w).unwrap().is_holds());
        // x over D2 (H⁰ = k[x]/(x²)): zero-divisor
        let d2 = catalog::d2(Q);
        let v = is_regular_sequence(&d2, &[d2.gen_element(0)], w).unwrap();
        assert!(v.is_fails());
        assert!(v.caveats.is_empty(), "routes must agree: {:?}", v.evidence);
        // empty sequence
        assert!(is_regular_sequence(&e, &[], w).unwrap().is_holds());
    }

    #[test]
    fn regular_sequence_on_the_bamp_diagonal() {
        let (_, bincl) = catalog::b_amp(Q);
        let r = diagonal_retraction(&bincl).unwrap();
        let seq = default_diagonal_sequence(&r);
        assert_eq!(seq.len(), 1);
        let v = is_regular_sequence(&r.e, &seq, win(-3, 0, 8)).unwrap();
        assert!(v.is_holds(), "evidence: {:?}", v.evidence);
    }

    #[test]
    fn perfectness_of_diagonals() {
        let w = win(-6, 0, 10);
        let triv = catalog::trivial(Q);
        // k → k[x]: Koszul witness route
        let p1 = catalog::p1(Q);
        let r = diagonal_retraction(&incl(&triv, &p1)).unwrap();
        assert!(is_perfect_diagonal(&r, w, 8).unwrap().is_holds());
        // k → K1: witness route fails, search succeeds
        let k1 = catalog::k1(Q);
        let r = diagonal_retraction(&incl(&triv, &k1)).unwrap();
        let v = is_perfect_diagonal(&r, w, 8).unwrap();
        assert!(v.is_holds(), "evidence: {:?}", v.evidence);
        // k → D2: not perfect within 8 stages, Betti 1,1,1,…
        let d2 = catalog::d2(Q);
        let r = diagonal_retraction(&incl(&triv, &d2)).unwrap();
        let v = is_perfect_diagonal(&r, w, 8).unwrap();
        assert!(v.is_fails());
        assert!(v.evidence[0].contains("8 stages"), "{:?}", v.evidence);
    }

    #[test]
    fn h0_smooth_examples() {
        let w = win(-1, 0, 8);
        let triv = catalog::trivial(Q);
        let p1 = catalog::p1(Q);
        assert!(h0_smooth(&incl(&triv, &p1), w).unwrap().is_holds());
        // relative polynomial extension over k[u]/(u²)
        let (bamp, bincl) = catalog::b_amp(Q);
        assert!(h0_smooth(&bincl, w).unwrap().is_holds());
        // k → H⁰ = k[x]/(x²): relation at weight 2
        let d2 = catalog::d2(Q);
        let v = h0_smooth(&incl(&triv, &d2), w).unwrap();
        assert!(v.is_fails());
        assert!(v.evidence[0].contains("weight 2"), "{:?}", v.evidence);
        // k → B-AMP directly is also not smooth (u² = 0 relation)
        assert!(h0_smooth(&incl(&triv, &bamp), w).unwrap().is_fails());
    }

    #[test]
    fn smoothness_equivalence_agreement() {
        let w = win(-6, 0, 10);
        let triv = catalog::trivial(Q);
        for (name, b) in [
            ("k[x]", catalog::p1(Q)),
            ("k[x,y]", catalog::poly2(Q)),
        ] {
            let rep = verify_smoothness_equivalence(&incl(&triv, &b), w, 8).unwrap();
            assert!(rep.agreement.is_holds(), "{name}: {:?}", rep.agreement.evidence);
            assert!(rep.perfect_side.is_holds());
            assert!(rep.h0_side.is_holds());
        }
        let d2 = catalog::d2(Q);
        let rep = verify_smoothness_equivalence(&incl(&triv, &d2), w, 8).unwrap();
        assert!(rep.agreement.is_holds());
        assert!(rep.perfect_side.is_fails());
        assert!(rep.h0_side.is_fails());
    }

    #[test]
    fn lci_for_the_affine_line_and_d2_failure() {
        let w = win(-6, 0, 10);
        let triv = catalog::trivial(Q);
        let p1 = catalog::p1(Q);
        let rep = verify_lci(&incl(&triv, &p1), None, w).unwrap();
        assert!(rep.overall.is_holds(), "{:?}", rep.overall.evidence);
        let d2 = catalog::d2(Q);
        let rep = verify_lci(&incl(&triv, &d2), None, w).unwrap();
        assert!(rep.composition.is_fails());
        assert!(rep.overall.is_fails());
    }

    #[test]
    fn vdb_duality_for_the_affine_line() {
        let w = win(-4, 2, 8);
        let triv = catalog::trivial(Q);
        let p1 = catalog::p1(Q);
        let lci = verify_lci(&incl(&triv, &p1), None, w).unwrap();
        let rep = verify_vdb(
            &lci,
            &[VdbModule::Diagonal, VdbModule::Target(0), VdbModule::Target(1)],
            w,
        )
        .unwrap();
        assert_eq!((rep.n, rep.twist), (1, -1));
        assert!(rep.invertible.is_holds(), "{:?}", rep.invertible.evidence);
        for (name, v) in &rep.per_module {
            assert!(v.is_holds(), "{name}: {:?}", v.evidence);
        }
        assert!(rep.matched);
    }

    #[test]
    fn rigid_module_of_the_affine_line() {
        let w = win(-4, 2, 8);
        let triv = catalog::trivial(Q);
        let p1 = catalog::p1(Q);
        let lci = verify_lci(&incl(&triv, &p1), None, w).unwrap();
        let vdb = verify_vdb(&lci, &[VdbModule::Diagonal], w).unwrap();
        let (n, v) = rigid_module(&lci, &vdb, w).unwrap();
        assert_eq!((n.symbols()[0].deg, n.symbols()[0].wt), (-1, 1));
        assert!(v.is_holds(), "{:?}", v.evidence);
    }

    #[test]
    fn flathz_quadrants() {
        let w = win(-4, 0, 8);
        let k1 = catalog::k1(Q);
        let rep = verify_flathz(&k1, w, 6).unwrap();
        assert!(rep.smooth.is_holds(), "{:?}", rep.smooth.evidence);
        assert!(rep.reduced.is_holds());
        assert!(rep.overall.is_holds());
        let amp = catalog::amp(Q);
        let rep = verify_flathz(&amp, w, 6).unwrap();
        assert!(rep.smooth.is_fails(), "{:?}", rep.smooth.evidence);
        assert!(rep.reduced.is_fails());
        assert!(rep.overall.is_holds());
    }

    #[test]
    fn invertibility_rejects_rank_two() {
        // B ⊕ B over k[x] has a rank-2 reduction row
        let p1 = catalog::p1(Q);
        let m = SemiFreeModule::new(
            Ring::Dg(p1.clone()),
            vec![
                crate::dgmod::ModSymbol::new("a", 0, 0),
                crate::dgmod::ModSymbol::new("b", 0, 0),
            ],
            vec![crate::dgmod::ModElement::zero(), crate::dgmod::ModElement::zero()],
        )
        .unwrap();
        let w = win(-2, 2, 6);
        let hb = H0Ring::new(&p1, 6).unwrap().hilbert();
        let (v, _) = is_invertible(&m, &hb, None, w).unwrap();
        assert!(v.is_fails());
        let free = SemiFreeModule::from_algebra(&p1);
        let (v, params) = is_invertible(&free, &hb, None, w).unwrap();
        assert!(v.is_holds());
        assert_eq!(params, Some((0, 0)));
    }
}
