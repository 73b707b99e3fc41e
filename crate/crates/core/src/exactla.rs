//! Exact linear algebra over `Q` and prime fields `F_p`.
//!
//! Every cohomology, kernel and quotient computation in the engine reduces to
//! row operations on per-stratum matrices over an exact field. Pivoting is
//! deterministic (leftmost nonzero column, smallest row index) so that all
//! downstream bases and reports are reproducible byte for byte.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{DgError, Result};

/// The base field: rationals or a prime field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FieldSpec {
    Q,
    Fp(u64),
}

impl FieldSpec {
    pub fn fp(p: u64) -> Result<FieldSpec> {
        if is_prime(p) {
            Ok(FieldSpec::Fp(p))
        } else {
            Err(DgError::NotPrime(p))
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Q => write!(f, "Q"),
            FieldSpec::Fp(p) => write!(f, "F{p}"),
        }
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// An exact field element. In characteristic `p` the representative is
/// canonical in `[0, p)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Scalar {
    Q(BigRational),
    Fp { p: u64, v: u64 },
}

impl Scalar {
    pub fn zero(field: FieldSpec) -> Scalar {
        match field {
            FieldSpec::Q => Scalar::Q(BigRational::zero()),
            FieldSpec::Fp(p) => Scalar::Fp { p, v: 0 },
        }
    }

    pub fn one(field: FieldSpec) -> Scalar {
        match field {
            FieldSpec::Q => Scalar::Q(BigRational::one()),
            FieldSpec::Fp(p) => Scalar::Fp { p, v: 1 },
        }
    }

    pub fn from_integer(n: i64, field: FieldSpec) -> Scalar {
        match field {
            FieldSpec::Q => Scalar::Q(BigRational::from(BigInt::from(n))),
            FieldSpec::Fp(p) => {
                let m = n.rem_euclid(p as i64) as u64;
                Scalar::Fp { p, v: m }
            }
        }
    }

    pub fn field(&self) -> FieldSpec {
        match self {
            Scalar::Q(_) => FieldSpec::Q,
            Scalar::Fp { p, .. } => FieldSpec::Fp(*p),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Q(r) => r.is_zero(),
            Scalar::Fp { v, .. } => *v == 0,
        }
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Q(a), Scalar::Q(b)) => Scalar::Q(a + b),
            (Scalar::Fp { p, v: a }, Scalar::Fp { p: q, v: b }) if p == q => Scalar::Fp {
                p: *p,
                v: (a + b) % p,
            },
            _ => panic!("scalar field mismatch"),
        }
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Q(a) => Scalar::Q(-a),
            Scalar::Fp { p, v } => Scalar::Fp {
                p: *p,
                v: (p - v) % p,
            },
        }
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Q(a), Scalar::Q(b)) => Scalar::Q(a * b),
            (Scalar::Fp { p, v: a }, Scalar::Fp { p: q, v: b }) if p == q => Scalar::Fp {
                p: *p,
                v: mulmod(*a, *b, *p),
            },
            _ => panic!("scalar field mismatch"),
        }
    }

    pub fn inv(&self) -> Result<Scalar> {
        if self.is_zero() {
            return Err(DgError::DivisionByZero);
        }
        Ok(match self {
            Scalar::Q(a) => Scalar::Q(a.recip()),
            Scalar::Fp { p, v } => Scalar::Fp {
                p: *p,
                v: powmod(*v, *p - 2, *p),
            },
        })
    }

    pub fn div(&self, other: &Scalar) -> Result<Scalar> {
        Ok(self.mul(&other.inv()?))
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Q(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Fp { v, .. } => write!(f, "{v}"),
        }
    }
}

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn powmod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, b, p);
        }
        b = mulmod(b, b, p);
        e >>= 1;
    }
    acc
}

/// A sparse matrix on one (degree, weight) stratum. Rows and columns are
/// indexed against fixed stratum bases chosen by the caller; zero entries are
/// never stored.
#[derive(Debug, Clone)]
pub struct StratumMatrix {
    rows: usize,
    cols: usize,
    field: FieldSpec,
    entries: BTreeMap<(usize, usize), Scalar>,
}

impl StratumMatrix {
    pub fn new(rows: usize, cols: usize, field: FieldSpec) -> StratumMatrix {
        StratumMatrix {
            rows,
            cols,
            field,
            entries: BTreeMap::new(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn set(&mut self, r: usize, c: usize, s: Scalar) -> Result<()> {
        if s.field() != self.field {
            return Err(DgError::FieldMismatch);
        }
        assert!(r < self.rows && c < self.cols, "index out of range");
        if s.is_zero() {
            self.entries.remove(&(r, c));
        } else {
            self.entries.insert((r, c), s);
        }
        Ok(())
    }

    /// Adds `s` to the entry at `(r, c)`.
    pub fn add_to(&mut self, r: usize, c: usize, s: &Scalar) -> Result<()> {
        let cur = self
            .entries
            .get(&(r, c))
            .cloned()
            .unwrap_or_else(|| Scalar::zero(self.field));
        self.set(r, c, cur.add(s))
    }

    pub fn get(&self, r: usize, c: usize) -> Scalar {
        self.entries
            .get(&(r, c))
            .cloned()
            .unwrap_or_else(|| Scalar::zero(self.field))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Applies the matrix to a column vector of length `cols`.
    pub fn apply(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(v.len(), self.cols);
        let mut out = vec![Scalar::zero(self.field); self.rows];
        for ((r, c), s) in &self.entries {
            if !v[*c].is_zero() {
                out[*r] = out[*r].add(&s.mul(&v[*c]));
            }
        }
        out
    }

    fn dense_rows(&self) -> Vec<Vec<Scalar>> {
        let mut m = vec![vec![Scalar::zero(self.field); self.cols]; self.rows];
        for ((r, c), s) in &self.entries {
            m[*r][*c] = s.clone();
        }
        m
    }

    /// Deterministic reduced row echelon form. Returns the rank, a basis of
    /// the kernel (column vectors), and the pivot column indices.
    pub fn rref(&self) -> Rref {
        let rows = rref_rows(self.dense_rows(), self.field);
        rref_result(&rows, self.cols, self.field)
    }

    /// Rank only.
    pub fn rank(&self) -> usize {
        self.rref().rank
    }
}

/// Result of row reduction of one stratum matrix.
#[derive(Debug, Clone)]
pub struct Rref {
    pub rank: usize,
    pub pivots: Vec<usize>,
    /// Basis vectors of the kernel, one per free column, free columns in
    /// ascending order.
    pub kernel_basis: Vec<Vec<Scalar>>,
    /// The nonzero reduced rows, pivot entries normalized to 1.
    pub rows: Vec<Vec<Scalar>>,
}

fn rref_rows(mut m: Vec<Vec<Scalar>>, field: FieldSpec) -> Vec<Vec<Scalar>> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut pivot_row = 0usize;
    for col in 0..cols {
        if pivot_row == rows {
            break;
        }
        // smallest row index with a nonzero entry in this column
        let Some(sel) = (pivot_row..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(pivot_row, sel);
        let inv = m[pivot_row][col].inv().expect("pivot is nonzero");
        for c in col..cols {
            if !m[pivot_row][c].is_zero() {
                m[pivot_row][c] = m[pivot_row][c].mul(&inv);
            }
        }
        for r in 0..rows {
            if r != pivot_row && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for c in col..cols {
                    if !m[pivot_row][c].is_zero() {
                        let t = m[pivot_row][c].mul(&factor);
                        m[r][c] = m[r][c].sub(&t);
                    }
                }
            }
        }
        pivot_row += 1;
    }
    m.truncate(pivot_row);
    let _ = field;
    m
}

fn rref_result(rows: &[Vec<Scalar>], cols: usize, field: FieldSpec) -> Rref {
    let mut pivots = Vec::new();
    for row in rows {
        let p = row.iter().position(|s| !s.is_zero()).expect("nonzero row");
        pivots.push(p);
    }
    let rank = pivots.len();
    let mut kernel_basis = Vec::new();
    let pivot_of_col: BTreeMap<usize, usize> =
        pivots.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    for free in 0..cols {
        if pivot_of_col.contains_key(&free) {
            continue;
        }
        let mut v = vec![Scalar::zero(field); cols];
        v[free] = Scalar::one(field);
        for (i, &pc) in pivots.iter().enumerate() {
            v[pc] = rows[i][free].neg();
        }
        kernel_basis.push(v);
    }
    Rref {
        rank,
        pivots,
        kernel_basis,
        rows: rows.to_vec(),
    }
}

/// Row reduction of a list of row vectors; returns the reduced nonzero rows.
pub fn rref_of_rows(rows: &[Vec<Scalar>], cols: usize, field: FieldSpec) -> Rref {
    for r in rows {
        assert_eq!(r.len(), cols, "row length mismatch");
    }
    let reduced = rref_rows(rows.to_vec(), field);
    rref_result(&reduced, cols, field)
}

/// Reduces `v` against reduced rows (pivot columns eliminated). The result is
/// the canonical representative of `v` modulo the row space.
pub fn reduce_mod_rows(rref: &Rref, v: &[Scalar]) -> Vec<Scalar> {
    let mut out = v.to_vec();
    for (i, &pc) in rref.pivots.iter().enumerate() {
        if out[pc].is_zero() {
            continue;
        }
        let factor = out[pc].clone();
        for (c, entry) in rref.rows[i].iter().enumerate() {
            if !entry.is_zero() {
                out[c] = out[c].sub(&entry.mul(&factor));
            }
        }
    }
    out
}

/// Standard-basis indices completing `sub` to a basis of the ambient space,
/// smallest indices first.
pub fn quotient_basis(sub: &[Vec<Scalar>], ambient_dim: usize, field: FieldSpec) -> Vec<usize> {
    let r = rref_of_rows(sub, ambient_dim, field);
    (0..ambient_dim).filter(|c| !r.pivots.contains(c)).collect()
}

/// Dimension and representative cocycles of `ker(d_out) / im(d_in)` on one
/// stratum. `d_in` maps into the stratum, `d_out` maps out of it; the caller
/// guarantees `d_out ∘ d_in = 0`.
pub fn homology_stratum(d_in: Option<&StratumMatrix>, d_out: &StratumMatrix) -> (usize, Vec<Vec<Scalar>>) {
    let field = d_out.field();
    let dim = d_out.cols();
    let kernel = d_out.rref().kernel_basis;
    // rows spanning the image of d_in
    let mut image_rows: Vec<Vec<Scalar>> = Vec::new();
    if let Some(m) = d_in {
        assert_eq!(m.rows(), dim);
        for c in 0..m.cols() {
            let mut col = vec![Scalar::zero(field); dim];
            for r in 0..dim {
                col[r] = m.get(r, c);
            }
            if col.iter().any(|s| !s.is_zero()) {
                image_rows.push(col);
            }
        }
    }
    let mut span = rref_of_rows(&image_rows, dim, field);
    let mut reps = Vec::new();
    for k in kernel {
        let red = reduce_mod_rows(&span, &k);
        if red.iter().any(|s| !s.is_zero()) {
            let mut rows = span.rows.clone();
            rows.push(red.clone());
            span = rref_of_rows(&rows, dim, field);
            reps.push(red);
        }
    }
    (reps.len(), reps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Scalar {
        Scalar::from_integer(n, FieldSpec::Q)
    }

    #[test]
    fn empty_matrix() {
        let m = StratumMatrix::new(0, 0, FieldSpec::Q);
        let r = m.rref();
        assert_eq!(r.rank, 0);
        assert!(r.kernel_basis.is_empty());
    }

    #[test]
    fn identity_has_no_kernel() {
        let mut m = StratumMatrix::new(3, 3, FieldSpec::Q);
        for i in 0..3 {
            m.set(i, i, q(1)).unwrap();
        }
        let r = m.rref();
        assert_eq!(r.rank, 3);
        assert!(r.kernel_basis.is_empty());
    }

    #[test]
    fn rank_one_kernel() {
        // [[1,2],[2,4]] has rank 1 and kernel spanned by (-2, 1)
        let mut m = StratumMatrix::new(2, 2, FieldSpec::Q);
        m.set(0, 0, q(1)).unwrap();
        m.set(0, 1, q(2)).unwrap();
        m.set(1, 0, q(2)).unwrap();
        m.set(1, 1, q(4)).unwrap();
        let r = m.rref();
        assert_eq!(r.rank, 1);
        assert_eq!(r.kernel_basis, vec![vec![q(-2), q(1)]]);
    }

    #[test]
    fn mixed_fields_rejected() {
        let mut m = StratumMatrix::new(1, 1, FieldSpec::Q);
        let err = m.set(0, 0, Scalar::from_integer(1, FieldSpec::Fp(5)));
        assert!(matches!(err, Err(DgError::FieldMismatch)));
    }

    #[test]
    fn quotient_basis_cases() {
        assert_eq!(quotient_basis(&[], 2, FieldSpec::Q), vec![0, 1]);
        assert_eq!(quotient_basis(&[vec![q(1), q(0)]], 2, FieldSpec::Q), vec![1]);
        let full = vec![vec![q(1), q(1)], vec![q(1), q(-1)]];
        assert!(quotient_basis(&full, 2, FieldSpec::Q).is_empty());
    }

    #[test]
    fn fp_inverse() {
        let s = Scalar::from_integer(3, FieldSpec::Fp(7));
        let i = s.inv().unwrap();
        assert_eq!(s.mul(&i), Scalar::one(FieldSpec::Fp(7)));
        assert!(matches!(
            Scalar::zero(FieldSpec::Q).inv(),
            Err(DgError::DivisionByZero)
        ));
    }

    #[test]
    fn not_prime_rejected() {
        assert!(FieldSpec::fp(6).is_err());
        assert!(FieldSpec::fp(2).is_ok());
    }

    #[test]
    fn homology_of_two_step_complex() {
        // 0 -> Q --0--> Q^2 --[1 0]--> Q -> 0 at the middle stratum:
        // kernel of [1 0] is span{(0,1)}, image of 0 is 0, so H = 1.
        let d_in = StratumMatrix::new(2, 1, FieldSpec::Q);
        let mut d_out = StratumMatrix::new(1, 2, FieldSpec::Q);
        d_out.set(0, 0, q(1)).unwrap();
        let (h, reps) = homology_stratum(Some(&d_in), &d_out);
        assert_eq!(h, 1);
        assert_eq!(reps, vec![vec![q(0), q(1)]]);
    }
}
