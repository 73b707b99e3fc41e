//! Scenario files: a line-oriented language declaring a field, algebras,
//! maps, a window, and a list of verification tasks. Parsing is two-stage:
//! text → syntax tree (position-annotated errors), syntax tree → resolved
//! scenario (semantic errors, all before execution). A canonical printer
//! makes `parse ∘ print` stable for round-trip tests.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::cdga::{AlgebraMap, DGAlgebra, Element, GeneratorSpec, H0Ring};
use crate::derived::diagonal_retraction;
use crate::dgmod::{hom_module, SemiFreeModule};
use crate::error::{DgError, Result};
use crate::exactla::{FieldSpec, Scalar};
use crate::strata::{compile_algebra, CohomologyTable, Window};
use crate::verdicts::{
    amplitude, check_flat_dim0, default_test_modules, flat_witness, is_invertible,
    is_perfect_diagonal, is_quasi_iso_alg, is_regular_sequence, rigid_module,
    verify_flathz, verify_lci, verify_smoothness_equivalence, verify_vdb, Status, VdbModule,
    Verdict,
};

// ---------------------------------------------------------------------------
// syntax tree
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Int(i64),
    Rat(i64, i64),
    Gen(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenDecl {
    pub name: String,
    pub deg: i32,
    pub wt: i32,
    pub diff: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraDecl {
    pub name: String,
    pub base: Option<String>,
    pub gens: Vec<GenDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapDecl {
    pub name: String,
    pub source: String,
    pub target: String,
    pub images: Vec<(String, Expr)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TaskDecl {
    Cohomology { alg: String },
    Amplitude { alg: String },
    QuasiIso { map: String },
    FlatCheck { map: String },
    RegularSeq { alg: String, seq: Vec<Expr> },
    Perfect { map: String, max_stages: Option<usize> },
    Invertible { map: String },
    SmoothEquiv { map: String, max_stages: Option<usize> },
    Lci { map: String },
    Vdb { map: String, modules: Vec<VdbModule> },
    Rigid { map: String },
    Flathz { alg: String, max_stages: Option<usize> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioAst {
    pub field: FieldSpec,
    pub window: Window,
    pub algebras: Vec<AlgebraDecl>,
    pub maps: Vec<MapDecl>,
    pub tasks: Vec<TaskDecl>,
}

/// A fully resolved scenario: every name bound, every expression checked.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub ast: ScenarioAst,
    pub field: FieldSpec,
    pub window: Window,
    pub algebras: Vec<(String, Arc<DGAlgebra>)>,
    pub maps: Vec<(String, AlgebraMap)>,
}

// ---------------------------------------------------------------------------
// tokenizer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    Sym(&'static str),
}

fn perr(line: usize, msg: impl Into<String>) -> DgError {
    DgError::Parse {
        line,
        msg: msg.into(),
    }
}

fn tokenize_line(line: &str, lineno: usize) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '#' {
            break;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let n: i64 = text
                .parse()
                .map_err(|_| perr(lineno, format!("integer out of range: {text}")))?;
            out.push(Tok::Int(n));
            continue;
        }
        if c == '-' && i + 1 < chars.len() && chars[i + 1] == '>' {
            out.push(Tok::Sym("->"));
            i += 2;
            continue;
        }
        if c == '.' && i + 1 < chars.len() && chars[i + 1] == '.' {
            out.push(Tok::Sym(".."));
            i += 2;
            continue;
        }
        let sym = match c {
            '{' => "{",
            '}' => "}",
            '[' => "[",
            ']' => "]",
            '(' => "(",
            ')' => ")",
            ':' => ":",
            ';' => ";",
            '^' => "^",
            '*' => "*",
            '+' => "+",
            '-' => "-",
            '/' => "/",
            '=' => "=",
            _ => return Err(perr(lineno, format!("unexpected character '{c}'"))),
        };
        out.push(Tok::Sym(sym));
        i += 1;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// expression parser
// ---------------------------------------------------------------------------

struct Cursor<'a> {
    toks: &'a [Tok],
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn new(toks: &'a [Tok], line: usize) -> Cursor<'a> {
        Cursor { toks, pos: 0, line }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<&Tok> {
        let t = self.toks.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(t)) if *t == s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &'static str) -> Result<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(perr(self.line, format!("expected '{s}'")))
        }
    }

    fn expect_ident(&mut self) -> Result<String> {
        match self.next() {
            Some(Tok::Ident(s)) => Ok(s.clone()),
            _ => Err(perr(self.line, "expected an identifier")),
        }
    }

    fn expect_int(&mut self) -> Result<i64> {
        let neg = self.eat_sym("-");
        match self.next() {
            Some(Tok::Int(n)) => Ok(if neg { -n } else { *n }),
            _ => Err(perr(self.line, "expected an integer")),
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<()> {
        match self.next() {
            Some(Tok::Ident(s)) if s == kw => Ok(()),
            _ => Err(perr(self.line, format!("expected '{kw}'"))),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn expect_end(&self) -> Result<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(perr(self.line, "unexpected trailing input"))
        }
    }
}

fn parse_expr(cur: &mut Cursor) -> Result<Expr> {
    let mut lhs = parse_term(cur)?;
    loop {
        if cur.eat_sym("+") {
            let rhs = parse_term(cur)?;
            lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
        } else if cur.eat_sym("-") {
            let rhs = parse_term(cur)?;
            lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
        } else {
            return Ok(lhs);
        }
    }
}

fn parse_term(cur: &mut Cursor) -> Result<Expr> {
    let mut lhs = parse_factor(cur)?;
    while cur.eat_sym("*") {
        let rhs = parse_factor(cur)?;
        lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
    }
    // juxtaposition is forbidden: a factor directly following another is an error
    if matches!(cur.peek(), Some(Tok::Ident(_)) | Some(Tok::Int(_))) {
        return Err(perr(
            cur.line,
            "implicit multiplication is not allowed; write an explicit '*'",
        ));
    }
    Ok(lhs)
}

fn parse_factor(cur: &mut Cursor) -> Result<Expr> {
    if cur.eat_sym("-") {
        return Ok(Expr::Neg(Box::new(parse_factor(cur)?)));
    }
    let mut base = if cur.eat_sym("(") {
        let e = parse_expr(cur)?;
        cur.expect_sym(")")?;
        e
    } else {
        match cur.next() {
            Some(Tok::Int(n)) => {
                let n = *n;
                if cur.eat_sym("/") {
                    match cur.next() {
                        Some(Tok::Int(d)) => Expr::Rat(n, *d),
                        _ => return Err(perr(cur.line, "expected a denominator")),
                    }
                } else {
                    Expr::Int(n)
                }
            }
            Some(Tok::Ident(s)) => Expr::Gen(s.clone()),
            _ => return Err(perr(cur.line, "expected a scalar, generator, or '('")),
        }
    };
    while cur.eat_sym("^") {
        match cur.next() {
            Some(Tok::Int(n)) if *n >= 0 => {
                base = Expr::Pow(Box::new(base), *n as u32);
            }
            _ => return Err(perr(cur.line, "expected a nonnegative exponent after '^'")),
        }
    }
    Ok(base)
}

fn parse_expr_list(cur: &mut Cursor) -> Result<Vec<Expr>> {
    cur.expect_sym("[")?;
    let mut out = Vec::new();
    if cur.eat_sym("]") {
        return Ok(out);
    }
    loop {
        out.push(parse_expr(cur)?);
        if cur.eat_sym("]") {
            return Ok(out);
        }
        cur.expect_sym(";")?;
    }
}

// ---------------------------------------------------------------------------
// statement parser
// ---------------------------------------------------------------------------

/// Parse the syntactic form of a scenario: field and window declarations,
/// algebra/map blocks, and tasks, with line-numbered errors.
pub fn parse_text(text: &str) -> Result<ScenarioAst> {
    let lines: Vec<(usize, Vec<Tok>)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| tokenize_line(l, i + 1).map(|t| (i + 1, t)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|(_, t)| !t.is_empty())
        .collect();

    let mut field: Option<FieldSpec> = None;
    let mut window: Option<Window> = None;
    let mut algebras: Vec<AlgebraDecl> = Vec::new();
    let mut maps: Vec<MapDecl> = Vec::new();
    let mut tasks: Vec<TaskDecl> = Vec::new();

    let mut i = 0;
    while i < lines.len() {
        let (ln, toks) = &lines[i];
        let ln = *ln;
        let mut cur = Cursor::new(toks, ln);
        let head = cur.expect_ident()?;
        match head.as_str() {
            "field" => {
                if field.is_some() {
                    return Err(perr(ln, "duplicate field declaration"));
                }
                let kind = cur.expect_ident()?;
                field = Some(match kind.as_str() {
                    "Q" => FieldSpec::Q,
                    "Fp" => {
                        let p = cur.expect_int()?;
                        if p <= 1 {
                            return Err(perr(ln, format!("{p} is not a prime")));
                        }
                        FieldSpec::fp(p as u64)?
                    }
                    other => return Err(perr(ln, format!("unknown field '{other}'"))),
                });
                cur.expect_end()?;
                i += 1;
            }
            "window" => {
                if window.is_some() {
                    return Err(perr(ln, "duplicate window declaration"));
                }
                cur.expect_keyword("deg")?;
                let lo = cur.expect_int()?;
                cur.expect_sym("..")?;
                let hi = cur.expect_int()?;
                cur.expect_keyword("wt")?;
                let cap = cur.expect_int()?;
                cur.expect_end()?;
                window = Some(
                    Window::new(lo as i32, hi as i32, cap as i32)
                        .map_err(|e| perr(ln, e.to_string()))?,
                );
                i += 1;
            }
            "algebra" => {
                let name = cur.expect_ident()?;
                let base = if cur.eat_sym("=") {
                    cur.expect_keyword("extend")?;
                    Some(cur.expect_ident()?)
                } else {
                    None
                };
                cur.expect_sym("{")?;
                if cur.at_end() {
                    let (gens, next) = parse_gen_block(&lines, i + 1)?;
                    algebras.push(AlgebraDecl { name, base, gens });
                    i = next;
                } else {
                    // single-line form: `algebra A { gen x deg 0 wt 1 ... }`
                    let mut gens = Vec::new();
                    while !cur.eat_sym("}") {
                        gens.push(parse_gen_decl(&mut cur, true)?);
                    }
                    cur.expect_end()?;
                    algebras.push(AlgebraDecl { name, base, gens });
                    i += 1;
                }
            }
            "map" => {
                let name = cur.expect_ident()?;
                cur.expect_sym(":")?;
                let source = cur.expect_ident()?;
                cur.expect_sym("->")?;
                let target = cur.expect_ident()?;
                cur.expect_sym("{")?;
                cur.expect_end()?;
                let mut images = Vec::new();
                let mut j = i + 1;
                loop {
                    let Some((gl, gt)) = lines.get(j) else {
                        return Err(perr(ln, "unterminated map block"));
                    };
                    let mut gc = Cursor::new(gt, *gl);
                    if gc.eat_sym("}") {
                        gc.expect_end()?;
                        j += 1;
                        break;
                    }
                    let g = gc.expect_ident()?;
                    gc.expect_sym("->")?;
                    let e = parse_expr(&mut gc)?;
                    gc.expect_end()?;
                    images.push((g, e));
                    j += 1;
                }
                maps.push(MapDecl {
                    name,
                    source,
                    target,
                    images,
                });
                i = j;
            }
            "task" => {
                tasks.push(parse_task(&mut cur)?);
                cur.expect_end()?;
                i += 1;
            }
            other => return Err(perr(ln, format!("unknown statement '{other}'"))),
        }
    }

    let field = field.ok_or_else(|| perr(1, "missing field declaration"))?;
    let window = window.ok_or_else(|| perr(1, "missing window declaration"))?;
    Ok(ScenarioAst {
        field,
        window,
        algebras,
        maps,
        tasks,
    })
}

fn parse_gen_block(
    lines: &[(usize, Vec<Tok>)],
    mut i: usize,
) -> Result<(Vec<GenDecl>, usize)> {
    let mut gens = Vec::new();
    loop {
        let Some((ln, toks)) = lines.get(i) else {
            return Err(perr(
                lines.last().map(|(l, _)| *l).unwrap_or(1),
                "unterminated algebra block",
            ));
        };
        let mut cur = Cursor::new(toks, *ln);
        if cur.eat_sym("}") {
            cur.expect_end()?;
            return Ok((gens, i + 1));
        }
        gens.push(parse_gen_decl(&mut cur, false)?);
        cur.expect_end()?;
        i += 1;
    }
}

fn parse_gen_decl(cur: &mut Cursor, inline: bool) -> Result<GenDecl> {
    cur.expect_keyword("gen")?;
    let name = cur.expect_ident()?;
    cur.expect_keyword("deg")?;
    let deg = cur.expect_int()? as i32;
    cur.expect_keyword("wt")?;
    let wt = cur.expect_int()? as i32;
    let has_diff = matches!(cur.peek(), Some(Tok::Ident(s)) if s == "d");
    let diff = if has_diff {
        cur.expect_keyword("d")?;
        cur.expect_sym("=")?;
        if inline {
            // the expression ends before the next `gen` or the closing brace
            let toks = cur.toks;
            let start = cur.pos;
            let mut depth = 0i32;
            while cur.pos < toks.len() {
                match &toks[cur.pos] {
                    Tok::Sym("(") | Tok::Sym("[") => depth += 1,
                    Tok::Sym(")") | Tok::Sym("]") => depth -= 1,
                    Tok::Sym("}") if depth == 0 => break,
                    Tok::Ident(s) if s == "gen" && depth == 0 => break,
                    _ => {}
                }
                cur.pos += 1;
            }
            let mut sub = Cursor::new(&toks[start..cur.pos], cur.line);
            let e = parse_expr(&mut sub)?;
            sub.expect_end()?;
            Some(e)
        } else {
            Some(parse_expr(cur)?)
        }
    } else {
        None
    };
    Ok(GenDecl {
        name,
        deg,
        wt,
        diff,
    })
}

fn parse_task(cur: &mut Cursor) -> Result<TaskDecl> {
    let verb = cur.expect_ident()?;
    let t = match verb.as_str() {
        "cohomology" => TaskDecl::Cohomology {
            alg: cur.expect_ident()?,
        },
        "amplitude" => TaskDecl::Amplitude {
            alg: cur.expect_ident()?,
        },
        "quasi_iso" => TaskDecl::QuasiIso {
            map: cur.expect_ident()?,
        },
        "flat_check" => TaskDecl::FlatCheck {
            map: cur.expect_ident()?,
        },
        "regular_seq" => {
            let alg = cur.expect_ident()?;
            let seq = parse_expr_list(cur)?;
            TaskDecl::RegularSeq { alg, seq }
        }
        "perfect" => {
            let map = cur.expect_ident()?;
            let max_stages = parse_opt_stages(cur)?;
            TaskDecl::Perfect { map, max_stages }
        }
        "invertible" => TaskDecl::Invertible {
            map: cur.expect_ident()?,
        },
        "smooth_equiv" => {
            let map = cur.expect_ident()?;
            let max_stages = parse_opt_stages(cur)?;
            TaskDecl::SmoothEquiv { map, max_stages }
        }
        "lci" => TaskDecl::Lci {
            map: cur.expect_ident()?,
        },
        "vdb" => {
            let map = cur.expect_ident()?;
            cur.expect_keyword("modules")?;
            cur.expect_sym("[")?;
            let mut modules = Vec::new();
            if !cur.eat_sym("]") {
                loop {
                    let name = cur.expect_ident()?;
                    let m = match name.as_str() {
                        "E" => VdbModule::Diagonal,
                        "B" => {
                            if cur.eat_sym("[") {
                                let s = cur.expect_int()? as i32;
                                cur.expect_sym("]")?;
                                VdbModule::Target(s)
                            } else {
                                VdbModule::Target(0)
                            }
                        }
                        other => {
                            return Err(perr(
                                cur.line,
                                format!("unknown duality test module '{other}'"),
                            ))
                        }
                    };
                    modules.push(m);
                    if cur.eat_sym("]") {
                        break;
                    }
                    cur.expect_sym(";")?;
                }
            }
            TaskDecl::Vdb { map, modules }
        }
        "rigid" => TaskDecl::Rigid {
            map: cur.expect_ident()?,
        },
        "flathz" => {
            let alg = cur.expect_ident()?;
            let max_stages = parse_opt_stages(cur)?;
            TaskDecl::Flathz { alg, max_stages }
        }
        other => return Err(perr(cur.line, format!("unknown task verb '{other}'"))),
    };
    Ok(t)
}

fn parse_opt_stages(cur: &mut Cursor) -> Result<Option<usize>> {
    if cur.at_end() {
        return Ok(None);
    }
    cur.expect_keyword("max_stages")?;
    let n = cur.expect_int()?;
    if n < 1 {
        return Err(perr(cur.line, "max_stages must be at least 1"));
    }
    Ok(Some(n as usize))
}

// ---------------------------------------------------------------------------
// resolution
// ---------------------------------------------------------------------------

fn resolve_expr(e: &Expr, a: &Arc<DGAlgebra>) -> Result<Element> {
    let field = a.field();
    Ok(match e {
        Expr::Int(n) => a.one().scale(&Scalar::from_integer(*n, field)),
        Expr::Rat(n, d) => {
            let s = Scalar::from_integer(*n, field).div(&Scalar::from_integer(*d, field))?;
            a.one().scale(&s)
        }
        Expr::Gen(name) => {
            let i = a
                .gen_index(name)
                .ok_or_else(|| DgError::Invalid(format!("unknown generator '{name}'")))?;
            a.gen_element(i)
        }
        Expr::Neg(x) => resolve_expr(x, a)?.scale(&Scalar::from_integer(-1, field)),
        Expr::Add(x, y) => resolve_expr(x, a)?.add(&resolve_expr(y, a)?),
        Expr::Sub(x, y) => resolve_expr(x, a)?.sub(&resolve_expr(y, a)?),
        Expr::Mul(x, y) => a.multiply(&resolve_expr(x, a)?, &resolve_expr(y, a)?)?,
        Expr::Pow(x, n) => a.pow(&resolve_expr(x, a)?, *n)?,
    })
}

/// Resolve a syntax tree into algebras and maps, with optional field and
/// window overrides applied before any algebra is built.
pub fn resolve(
    ast: &ScenarioAst,
    field_override: Option<FieldSpec>,
    window_override: Option<Window>,
) -> Result<Scenario> {
    let mut ast = ast.clone();
    if let Some(f) = field_override {
        ast.field = f;
    }
    if let Some(w) = window_override {
        ast.window = w;
    }
    let field = ast.field;
    let sem = |msg: String| DgError::Invalid(msg);

    let mut algebras: Vec<(String, Arc<DGAlgebra>)> = Vec::new();
    let lookup_alg = |algebras: &[(String, Arc<DGAlgebra>)], n: &str| -> Result<Arc<DGAlgebra>> {
        algebras
            .iter()
            .find(|(name, _)| name == n)
            .map(|(_, a)| a.clone())
            .ok_or_else(|| sem(format!("unknown algebra '{n}'")))
    };

    for decl in &ast.algebras {
        if algebras.iter().any(|(n, _)| n == &decl.name) {
            return Err(sem(format!("duplicate algebra name '{}'", decl.name)));
        }
        let base = match &decl.base {
            Some(b) => Some(lookup_alg(&algebras, b)?),
            None => None,
        };
        let base_arity = base.as_ref().map(|b| b.arity()).unwrap_or(0);
        let newspecs: Vec<GeneratorSpec> = decl
            .gens
            .iter()
            .map(|g| GeneratorSpec::new(&g.name, g.deg, g.wt))
            .collect();
        // two passes: generators first so differentials may use any of them
        let probe = match &base {
            Some(b) => b.extend(newspecs.clone(), vec![Element::zero(); decl.gens.len()])?,
            None => (
                DGAlgebra::new(field, newspecs.clone(), vec![Element::zero(); decl.gens.len()])?,
                AlgebraMap::identity(&DGAlgebra::new(field, Vec::new(), Vec::new())?),
            ),
        }
        .0;
        let diffs: Vec<Element> = decl
            .gens
            .iter()
            .map(|g| match &g.diff {
                Some(e) => resolve_expr(e, &probe),
                None => Ok(Element::zero()),
            })
            .collect::<Result<_>>()?;
        let built = match &base {
            Some(b) => b.extend(newspecs, diffs)?.0,
            None => DGAlgebra::new(field, newspecs, diffs)?,
        };
        let _ = base_arity;
        algebras.push((decl.name.clone(), built));
    }

    let mut maps: Vec<(String, AlgebraMap)> = Vec::new();
    for decl in &ast.maps {
        if maps.iter().any(|(n, _)| n == &decl.name) {
            return Err(sem(format!("duplicate map name '{}'", decl.name)));
        }
        let src = lookup_alg(&algebras, &decl.source)?;
        let tgt = lookup_alg(&algebras, &decl.target)?;
        let mut images = vec![None; src.arity()];
        for (g, e) in &decl.images {
            let i = src
                .gen_index(g)
                .ok_or_else(|| sem(format!("map '{}': unknown generator '{g}'", decl.name)))?;
            images[i] = Some(resolve_expr(e, &tgt)?);
        }
        let images: Vec<Element> = images
            .into_iter()
            .enumerate()
            .map(|(i, e)| {
                e.ok_or_else(|| {
                    sem(format!(
                        "map '{}': no image for generator '{}'",
                        decl.name,
                        src.generators()[i].name
                    ))
                })
            })
            .collect::<Result<_>>()?;
        maps.push((decl.name.clone(), AlgebraMap::new(src, tgt, images)?));
    }

    // validate task references and expressions before execution
    for t in &ast.tasks {
        match t {
            TaskDecl::Cohomology { alg }
            | TaskDecl::Amplitude { alg }
            | TaskDecl::Flathz { alg, .. } => {
                lookup_alg(&algebras, alg)?;
            }
            TaskDecl::RegularSeq { alg, seq } => {
                let a = lookup_alg(&algebras, alg)?;
                for e in seq {
                    resolve_expr(e, &a)?;
                }
            }
            TaskDecl::QuasiIso { map }
            | TaskDecl::FlatCheck { map }
            | TaskDecl::Perfect { map, .. }
            | TaskDecl::Invertible { map }
            | TaskDecl::SmoothEquiv { map, .. }
            | TaskDecl::Lci { map }
            | TaskDecl::Vdb { map, .. }
            | TaskDecl::Rigid { map } => {
                if !maps.iter().any(|(n, _)| n == map) {
                    return Err(sem(format!("unknown map '{map}'")));
                }
            }
        }
    }

    Ok(Scenario {
        field,
        window: ast.window,
        algebras,
        maps,
        ast,
    })
}

/// Parse and resolve in one step.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    resolve(&parse_text(text)?, None, None)
}

/// Parse one element expression (the scenario grammar: `+`, `-`, explicit
/// `*`, `^`, integer or `a/b` coefficients) in the context of an algebra.
pub fn parse_element(text: &str, a: &Arc<DGAlgebra>) -> Result<Element> {
    let toks = tokenize_line(text, 1)?;
    let mut cur = Cursor::new(&toks, 1);
    let e = parse_expr(&mut cur)?;
    cur.expect_end()?;
    resolve_expr(&e, a)
}

// ---------------------------------------------------------------------------
// canonical printer
// ---------------------------------------------------------------------------

fn print_expr(e: &Expr, out: &mut String) {
    match e {
        Expr::Int(n) => {
            let _ = write!(out, "{n}");
        }
        Expr::Rat(n, d) => {
            let _ = write!(out, "{n}/{d}");
        }
        Expr::Gen(g) => out.push_str(g),
        Expr::Neg(x) => {
            out.push('-');
            print_expr(x, out);
        }
        Expr::Add(x, y) => {
            print_expr(x, out);
            out.push_str(" + ");
            print_expr(y, out);
        }
        Expr::Sub(x, y) => {
            print_expr(x, out);
            out.push_str(" - ");
            print_expr(y, out);
        }
        Expr::Mul(x, y) => {
            print_expr(x, out);
            out.push('*');
            print_expr(y, out);
        }
        Expr::Pow(x, n) => {
            print_expr(x, out);
            let _ = write!(out, "^{n}");
        }
    }
}

fn expr_text(e: &Expr) -> String {
    let mut s = String::new();
    print_expr(e, &mut s);
    s
}

/// Canonical element-to-expression conversion: one product term per
/// monomial, sorted, with explicit '*' throughout.
fn element_expr(x: &Element, a: &DGAlgebra) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    let mut parts = Vec::new();
    for (m, c) in x.terms() {
        let mut factors = Vec::new();
        if *c != Scalar::one(c.field()) || m.is_one() {
            factors.push(c.to_string());
        }
        for (i, &e) in m.exps().iter().enumerate() {
            match e {
                0 => {}
                1 => factors.push(a.generators()[i].name.clone()),
                _ => factors.push(format!("{}^{}", a.generators()[i].name, e)),
            }
        }
        parts.push(factors.join("*"));
    }
    parts.join(" + ")
}

/// Canonical printer: output parses back to an equivalent scenario.
pub fn print_scenario(s: &Scenario) -> String {
    let mut out = String::new();
    match s.field {
        FieldSpec::Q => out.push_str("field Q\n"),
        FieldSpec::Fp(p) => {
            let _ = writeln!(out, "field Fp {p}");
        }
    }
    let _ = writeln!(
        out,
        "window deg {}..{} wt {}",
        s.window.deg_lo, s.window.deg_hi, s.window.wt_cap
    );
    for (decl, (name, a)) in s.ast.algebras.iter().zip(&s.algebras) {
        match &decl.base {
            Some(b) => {
                let _ = writeln!(out, "algebra {name} = extend {b} {{");
            }
            None => {
                let _ = writeln!(out, "algebra {name} {{");
            }
        }
        let lo = a.base_len();
        for i in lo..a.arity() {
            let g = &a.generators()[i];
            let _ = write!(out, "  gen {} deg {} wt {}", g.name, g.deg, g.wt);
            let d = a.diff_of_gen(i);
            if !d.is_zero() {
                let _ = write!(out, " d = {}", element_expr(d, a));
            }
            out.push('\n');
        }
        out.push_str("}\n");
    }
    for (name, f) in &s.maps {
        let src_name = s
            .algebras
            .iter()
            .find(|(_, a)| Arc::ptr_eq(a, f.source()))
            .map(|(n, _)| n.clone())
            .unwrap_or_default();
        let tgt_name = s
            .algebras
            .iter()
            .find(|(_, a)| Arc::ptr_eq(a, f.target()))
            .map(|(n, _)| n.clone())
            .unwrap_or_default();
        let _ = writeln!(out, "map {name} : {src_name} -> {tgt_name} {{");
        for (i, img) in f.images().iter().enumerate() {
            let _ = writeln!(
                out,
                "  {} -> {}",
                f.source().generators()[i].name,
                element_expr(img, f.target())
            );
        }
        out.push_str("}\n");
    }
    for t in &s.ast.tasks {
        out.push_str(&print_task(t));
        out.push('\n');
    }
    out
}

fn print_task(t: &TaskDecl) -> String {
    let stages = |m: &Option<usize>| match m {
        Some(n) => format!(" max_stages {n}"),
        None => String::new(),
    };
    match t {
        TaskDecl::Cohomology { alg } => format!("task cohomology {alg}"),
        TaskDecl::Amplitude { alg } => format!("task amplitude {alg}"),
        TaskDecl::QuasiIso { map } => format!("task quasi_iso {map}"),
        TaskDecl::FlatCheck { map } => format!("task flat_check {map}"),
        TaskDecl::RegularSeq { alg, seq } => {
            let items: Vec<String> = seq.iter().map(expr_text).collect();
            format!("task regular_seq {alg} [{}]", items.join("; "))
        }
        TaskDecl::Perfect { map, max_stages } => {
            format!("task perfect {map}{}", stages(max_stages))
        }
        TaskDecl::Invertible { map } => format!("task invertible {map}"),
        TaskDecl::SmoothEquiv { map, max_stages } => {
            format!("task smooth_equiv {map}{}", stages(max_stages))
        }
        TaskDecl::Lci { map } => format!("task lci {map}"),
        TaskDecl::Vdb { map, modules } => {
            let items: Vec<String> = modules.iter().map(|m| m.name()).collect();
            format!("task vdb {map} modules [{}]", items.join("; "))
        }
        TaskDecl::Rigid { map } => format!("task rigid {map}"),
        TaskDecl::Flathz { alg, max_stages } => {
            format!("task flathz {alg}{}", stages(max_stages))
        }
    }
}

// ---------------------------------------------------------------------------
// execution
// ---------------------------------------------------------------------------

/// Result of one executed task: verdict data plus any dimension grids.
#[derive(Debug, Clone)]
pub struct TaskReport {
    pub title: String,
    pub status: Status,
    pub window: Window,
    pub evidence: Vec<String>,
    pub caveats: Vec<String>,
    pub tables: Vec<(String, CohomologyTable)>,
    pub millis: u128,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub tasks: Vec<TaskReport>,
}

impl Report {
    /// CI exit code: 0 all hold, 1 any failure, 2 any inconclusive.
    pub fn exit_code(&self) -> i32 {
        if self.tasks.iter().any(|t| t.status == Status::Fails) {
            1
        } else if self.tasks.iter().any(|t| t.status == Status::Inconclusive) {
            2
        } else {
            0
        }
    }
}

const DEFAULT_MAX_STAGES: usize = 8;

/// Execute every task in scenario order. A failing task is isolated: it
/// reports inconclusive with the error message and later tasks still run.
pub fn run(s: &Scenario, max_stages_override: Option<usize>) -> Report {
    let tasks = s
        .ast
        .tasks
        .iter()
        .map(|t| {
            let started = std::time::Instant::now();
            let title = print_task(t);
            let title = title.strip_prefix("task ").unwrap_or(&title).to_string();
            let mut rep = match run_task(s, t, max_stages_override) {
                Ok(r) => r,
                Err(e) => TaskReport {
                    title: String::new(),
                    status: Status::Inconclusive,
                    window: s.window,
                    evidence: vec![format!("error: {e}")],
                    caveats: vec!["task aborted".to_string()],
                    tables: Vec::new(),
                    millis: 0,
                },
            };
            rep.title = title;
            rep.millis = started.elapsed().as_millis();
            rep
        })
        .collect();
    Report { tasks }
}

fn from_verdict(v: Verdict, tables: Vec<(String, CohomologyTable)>) -> TaskReport {
    TaskReport {
        title: String::new(),
        status: v.status,
        window: v.window,
        evidence: v.evidence,
        caveats: v.caveats,
        tables,
        millis: 0,
    }
}

fn run_task(s: &Scenario, t: &TaskDecl, stages_override: Option<usize>) -> Result<TaskReport> {
    let w = s.window;
    let alg = |n: &str| -> Result<Arc<DGAlgebra>> {
        s.algebras
            .iter()
            .find(|(name, _)| name == n)
            .map(|(_, a)| a.clone())
            .ok_or_else(|| DgError::Invalid(format!("unknown algebra '{n}'")))
    };
    let map = |n: &str| -> Result<AlgebraMap> {
        s.maps
            .iter()
            .find(|(name, _)| name == n)
            .map(|(_, f)| f.clone())
            .ok_or_else(|| DgError::Invalid(format!("unknown map '{n}'")))
    };
    let stages = |m: &Option<usize>| stages_override.or(*m).unwrap_or(DEFAULT_MAX_STAGES);

    Ok(match t {
        TaskDecl::Cohomology { alg: n } => {
            let a = alg(n)?;
            let table = compile_algebra(&a, w.margin(1))?.cohomology(w);
            from_verdict(
                Verdict::holds(w, "cohomology dimensions computed"),
                vec![(format!("H({n})"), table)],
            )
        }
        TaskDecl::Amplitude { alg: n } => {
            let a = alg(n)?;
            let table = compile_algebra(&a, w.margin(1))?.cohomology(w);
            let v = match amplitude(&table) {
                Some(am) => Verdict::holds(
                    w,
                    format!(
                        "amplitude {} on degrees {}..{}{}",
                        am.amp(),
                        am.inf,
                        am.sup,
                        if am.boundary { " (touches window edge)" } else { "" }
                    ),
                ),
                None => Verdict::holds(w, "cohomology vanishes on the window"),
            };
            from_verdict(v, vec![(format!("H({n})"), table)])
        }
        TaskDecl::QuasiIso { map: n } => {
            from_verdict(is_quasi_iso_alg(&map(n)?, w)?, Vec::new())
        }
        TaskDecl::FlatCheck { map: n } => {
            let f = map(n)?;
            let fw = flat_witness(&f, w)?;
            let mods = default_test_modules(f.source())?;
            from_verdict(check_flat_dim0(&fw, &mods, w)?, Vec::new())
        }
        TaskDecl::RegularSeq { alg: n, seq } => {
            let a = alg(n)?;
            let seq: Vec<Element> = seq
                .iter()
                .map(|e| resolve_expr(e, &a))
                .collect::<Result<_>>()?;
            from_verdict(is_regular_sequence(&a, &seq, w)?, Vec::new())
        }
        TaskDecl::Perfect { map: n, max_stages } => {
            let r = diagonal_retraction(&map(n)?)?;
            from_verdict(is_perfect_diagonal(&r, w, stages(max_stages))?, Vec::new())
        }
        TaskDecl::Invertible { map: n } => {
            let f = map(n)?;
            let lci = verify_lci(&f, None, w)?;
            if !lci.overall.is_holds() {
                return Ok(from_verdict(
                    Verdict::inconclusive(
                        w,
                        "invertibility needs an lci certificate, which failed",
                    ),
                    Vec::new(),
                ));
            }
            let r = &lci.retraction;
            let n_len = lci.seq.len() as i32;
            let w0: i32 = lci
                .seq
                .iter()
                .map(|e| r.e.bidegree(e).unwrap().unwrap().1)
                .sum();
            let p = crate::derived::koszul_module(&r.e, &lci.seq)?;
            let m = hom_module(&p, &SemiFreeModule::from_algebra(&r.e))?;
            let hb = H0Ring::new(f.target(), w.wt_cap + w0)?.hilbert();
            let iw = Window::new(w.deg_lo, w.deg_hi.max(n_len), w.wt_cap)?;
            let (v, _) = is_invertible(&m, &hb, Some((n_len, -w0)), iw)?;
            from_verdict(v, Vec::new())
        }
        TaskDecl::SmoothEquiv { map: n, max_stages } => {
            let rep = verify_smoothness_equivalence(&map(n)?, w, stages(max_stages))?;
            let mut out = from_verdict(rep.agreement, Vec::new());
            out.evidence.push(format!(
                "perfectness side: {} ({})",
                rep.perfect_side.status.label(),
                rep.perfect_side.evidence.join("; ")
            ));
            out.evidence.push(format!(
                "H0 side: {} ({})",
                rep.h0_side.status.label(),
                rep.h0_side.evidence.join("; ")
            ));
            out
        }
        TaskDecl::Lci { map: n } => {
            let rep = verify_lci(&map(n)?, None, w)?;
            let mut out = from_verdict(rep.overall, Vec::new());
            for (name, v) in [
                ("kernel", &rep.kernel),
                ("composition", &rep.composition),
                ("hilbert", &rep.hilbert),
                ("regularity", &rep.regular),
            ] {
                out.evidence.push(format!(
                    "{name}: {} ({})",
                    v.status.label(),
                    v.evidence.join("; ")
                ));
            }
            out
        }
        TaskDecl::Vdb { map: n, modules } => {
            let lci = verify_lci(&map(n)?, None, w)?;
            if !lci.overall.is_holds() {
                return Ok(from_verdict(
                    Verdict::inconclusive(w, "duality needs an lci certificate, which failed"),
                    Vec::new(),
                ));
            }
            let rep = verify_vdb(&lci, modules, w)?;
            let mut out = from_verdict(rep.overall, Vec::new());
            out.evidence.push(format!(
                "invertibility: {} ({})",
                rep.invertible.status.label(),
                rep.invertible.evidence.join("; ")
            ));
            for (name, v) in &rep.per_module {
                out.evidence.push(format!(
                    "module {name}: {} ({})",
                    v.status.label(),
                    v.evidence.join("; ")
                ));
            }
            out
        }
        TaskDecl::Rigid { map: n } => {
            let lci = verify_lci(&map(n)?, None, w)?;
            if !lci.overall.is_holds() {
                return Ok(from_verdict(
                    Verdict::inconclusive(w, "rigidity needs an lci certificate, which failed"),
                    Vec::new(),
                ));
            }
            let vdb = verify_vdb(&lci, &[VdbModule::Diagonal], w)?;
            if !vdb.matched {
                return Ok(from_verdict(
                    Verdict::inconclusive(w, "rigidity needs matched duality, which failed"),
                    Vec::new(),
                ));
            }
            let (_, v) = rigid_module(&lci, &vdb, w)?;
            from_verdict(v, Vec::new())
        }
        TaskDecl::Flathz { alg: n, max_stages } => {
            let rep = verify_flathz(&alg(n)?, w, stages(max_stages))?;
            let mut out = from_verdict(rep.overall, Vec::new());
            out.evidence.push(format!(
                "smoothness: {} ({})",
                rep.smooth.status.label(),
                rep.smooth.evidence.join("; ")
            ));
            out.evidence.push(format!(
                "reduction: {} ({})",
                rep.reduced.status.label(),
                rep.reduced.evidence.join("; ")
            ));
            out
        }
    })
}

// ---------------------------------------------------------------------------
// report rendering
// ---------------------------------------------------------------------------

fn table_rows(t: &CohomologyTable) -> Vec<(i32, Vec<usize>)> {
    (t.window.deg_lo..=t.window.deg_hi)
        .rev()
        .map(|d| (d, t.row(d)))
        .collect()
}

/// Canonical nested key-value form. Deterministic: stable key order, no
/// wall-times.
pub fn render_structured(r: &Report) -> String {
    let mut out = String::new();
    out.push_str("report {\n");
    for (i, t) in r.tasks.iter().enumerate() {
        let _ = writeln!(out, "  task {} {{", i + 1);
        let _ = writeln!(out, "    title = {}", t.title);
        let _ = writeln!(out, "    status = {}", t.status.label());
        let _ = writeln!(
            out,
            "    window = deg {}..{} wt {}",
            t.window.deg_lo, t.window.deg_hi, t.window.wt_cap
        );
        for e in &t.evidence {
            let _ = writeln!(out, "    evidence = {e}");
        }
        for c in &t.caveats {
            let _ = writeln!(out, "    caveat = {c}");
        }
        for (name, table) in &t.tables {
            let _ = writeln!(out, "    table {name} {{");
            for (d, row) in table_rows(table) {
                let cells: Vec<String> = row.iter().map(|n| n.to_string()).collect();
                let _ = writeln!(out, "      deg {d} = {}", cells.join(" "));
            }
            out.push_str("    }\n");
        }
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    out
}

/// Human-readable form, with wall-times.
pub fn render_text(r: &Report) -> String {
    let mut out = String::new();
    for (i, t) in r.tasks.iter().enumerate() {
        let _ = writeln!(
            out,
            "[{}/{}] {} — {} ({} ms)",
            i + 1,
            r.tasks.len(),
            t.title,
            t.status.label(),
            t.millis
        );
        let _ = writeln!(
            out,
            "      window deg {}..{} wt {}",
            t.window.deg_lo, t.window.deg_hi, t.window.wt_cap
        );
        for e in &t.evidence {
            let _ = writeln!(out, "      {e}");
        }
        for c in &t.caveats {
            let _ = writeln!(out, "      caveat: {c}");
        }
        for (name, table) in &t.tables {
            let _ = writeln!(out, "      {name} (columns: weight 0..{}):", table.window.wt_cap);
            for (d, row) in table_rows(table) {
                let cells: Vec<String> = row.iter().map(|n| format!("{n:>3}")).collect();
                let _ = writeln!(out, "        deg {d:>3} |{}", cells.join(""));
            }
        }
    }
    if r.tasks.is_empty() {
        out.push_str("no tasks\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "field Q\nalgebra A { gen x deg 0 wt 1 }\nwindow deg -2..0 wt 4\ntask cohomology A\n";

    #[test]
    fn minimal_scenario_parses_and_runs() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.ast.tasks.len(), 1);
        let rep = run(&s, None);
        assert_eq!(rep.exit_code(), 0);
        let (_, table) = &rep.tasks[0].tables[0];
        assert_eq!(table.row(0), vec![1, 1, 1, 1, 1]);
    }

    #[test]
    fn printer_round_trip_is_stable() {
        let text = "field Q\nwindow deg -3..0 wt 6\n\
            algebra A {\n  gen u deg 0 wt 2\n  gen e deg -1 wt 4 d = u^2\n}\n\
            algebra B = extend A {\n  gen x deg 0 wt 1\n}\n\
            map phi : A -> B {\n  u -> u\n  e -> e\n}\n\
            task cohomology A\ntask regular_seq B [x - u]\ntask smooth_equiv phi max_stages 6\n\
            task vdb phi modules [E; B; B[1]]\n";
        let once = print_scenario(&parse_scenario(text).unwrap());
        let twice = print_scenario(&parse_scenario(&once).unwrap());
        assert_eq!(once, twice);
    }

    #[test]
    fn positive_degree_generator_rejected() {
        let text = "field Q\nwindow deg -2..0 wt 4\nalgebra A {\n  gen e deg 1 wt 1\n}\ntask cohomology A\n";
        assert!(parse_scenario(text).is_err());
    }

    #[test]
    fn unknown_name_reported_before_execution() {
        let text = "field Q\nwindow deg -2..0 wt 4\ntask cohomology nosuch\n";
        let err = parse_scenario(text).unwrap_err();
        assert!(err.to_string().contains("nosuch"));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "field Q\nwindow deg -2..0 wt 4\nalgebra A {\n  gen x deg 0 wt 1 d = 2 x\n}\n";
        match parse_text(text) {
            Err(DgError::Parse { line, msg }) => {
                assert_eq!(line, 4);
                assert!(msg.contains("explicit '*'"), "{msg}");
            }
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn empty_task_list_is_an_empty_report() {
        let s = parse_scenario("field Q\nwindow deg -1..0 wt 2\n").unwrap();
        let rep = run(&s, None);
        assert!(rep.tasks.is_empty());
        assert_eq!(rep.exit_code(), 0);
        assert_eq!(render_structured(&rep), "report {\n}\n");
    }

    #[test]
    fn smooth_equiv_on_dual_numbers_fails_on_both_sides() {
        let text = "field Q\nwindow deg -6..0 wt 10\n\
            algebra k {\n}\n\
            algebra D2 {\n  gen x deg 0 wt 1\n  gen e deg -1 wt 2 d = x^2\n}\n\
            map phi : k -> D2 {\n}\n\
            task smooth_equiv phi\n";
        let s = parse_scenario(text).unwrap();
        let rep = run(&s, None);
        assert_eq!(rep.tasks[0].status, Status::Holds);
        let joined = rep.tasks[0].evidence.join("\n");
        assert!(joined.contains("both sides fail"), "{joined}");
        assert_eq!(rep.exit_code(), 0);
    }

    #[test]
    fn structured_report_is_deterministic() {
        let s = parse_scenario(MINIMAL).unwrap();
        let a = render_structured(&run(&s, None));
        let b = render_structured(&run(&s, None));
        assert_eq!(a, b);
        assert!(!a.contains("ms"));
    }

    #[test]
    fn failed_task_isolates_and_later_tasks_run() {
        // x is a zero-divisor in H0 of the dual-numbers model: the first
        // task fails with a witness, the second still executes
        let text = "field Q\nwindow deg -3..0 wt 6\n\
            algebra D2 {\n  gen x deg 0 wt 1\n  gen e deg -1 wt 2 d = x^2\n}\n\
            task regular_seq D2 [x]\ntask cohomology D2\n";
        let s = parse_scenario(text).unwrap();
        let rep = run(&s, None);
        assert_eq!(rep.tasks.len(), 2);
        assert_eq!(rep.tasks[0].status, Status::Fails);
        assert_eq!(rep.tasks[1].status, Status::Holds);
        assert_eq!(rep.exit_code(), 1);
    }

    #[test]
    fn fp_field_declaration() {
        let text = "field Fp 7\nwindow deg -2..0 wt 4\nalgebra A {\n  gen x deg 0 wt 1\n}\ntask cohomology A\n";
        let s = parse_scenario(text).unwrap();
        assert_eq!(s.field, FieldSpec::Fp(7));
        assert_eq!(run(&s, None).exit_code(), 0);
    }
}
