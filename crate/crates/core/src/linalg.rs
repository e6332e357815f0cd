//! Exact linear algebra over a field context: spans, reduced echelon forms,
//! affine subspaces with canonical translations, linear/affine maps, kernels
//! and fibres.
//!
//! Vectors are plain coordinate sequences; every operation takes the field
//! context explicitly. Subspace equality is representation equality: rows are
//! fully reduced with ascending pivots, and affine translations are
//! canonicalized to the member with the smallest mixed-radix index encoding.

use crate::field::{Elem, FieldCtx};
use crate::{Error, Result};

pub type Coords = Vec<Elem>;

pub fn vec_zero(d: usize) -> Coords {
    vec![0; d]
}

pub fn vec_is_zero(v: &[Elem]) -> bool {
    v.iter().all(|&c| c == 0)
}

pub fn vec_add(ctx: &FieldCtx, a: &[Elem], b: &[Elem]) -> Coords {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| ctx.add(x, y)).collect()
}

pub fn vec_sub(ctx: &FieldCtx, a: &[Elem], b: &[Elem]) -> Coords {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| ctx.sub(x, y)).collect()
}

pub fn vec_neg(ctx: &FieldCtx, a: &[Elem]) -> Coords {
    a.iter().map(|&x| ctx.neg(x)).collect()
}

pub fn vec_scale(ctx: &FieldCtx, c: Elem, a: &[Elem]) -> Coords {
    a.iter().map(|&x| ctx.mul(c, x)).collect()
}

/// w += c * v, in place.
pub fn vec_axpy(ctx: &FieldCtx, w: &mut [Elem], c: Elem, v: &[Elem]) {
    debug_assert_eq!(w.len(), v.len());
    if c == 0 {
        return;
    }
    for (wi, &vi) in w.iter_mut().zip(v) {
        *wi = ctx.add(*wi, ctx.mul(c, vi));
    }
}

/// Mixed-radix index of a coordinate vector: sum of c_i * q^i. Bijective on
/// K^D and compatible with the downstream bitset indexing.
pub fn encode(ctx: &FieldCtx, v: &[Elem]) -> u128 {
    let q = ctx.size() as u128;
    v.iter().rev().fold(0u128, |acc, &c| acc * q + c as u128)
}

pub fn decode(ctx: &FieldCtx, mut code: u128, d: usize) -> Coords {
    let q = ctx.size() as u128;
    let mut out = vec_zero(d);
    for c in out.iter_mut() {
        *c = (code % q) as u64;
        code /= q;
    }
    out
}

/// Incremental reduced-echelon span builder. Rows are kept fully reduced
/// (pivot 1, zeros above and below) with pivots ascending at all times.
#[derive(Debug, Clone)]
pub struct SpanBuilder {
    ambient: usize,
    rows: Vec<Coords>,
    pivots: Vec<usize>,
}

impl SpanBuilder {
    pub fn new(ambient: usize) -> Self {
        SpanBuilder { ambient, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn is_full(&self) -> bool {
        self.rows.len() == self.ambient
    }

    /// Reduce v against the current rows; the residual has zeros in all
    /// pivot positions.
    pub fn reduce(&self, ctx: &FieldCtx, v: &[Elem]) -> Coords {
        let mut r = v.to_vec();
        for (row, &piv) in self.rows.iter().zip(&self.pivots) {
            let c = r[piv];
            if c != 0 {
                let negc = ctx.neg(c);
                vec_axpy(ctx, &mut r, negc, row);
            }
        }
        r
    }

    pub fn contains(&self, ctx: &FieldCtx, v: &[Elem]) -> bool {
        vec_is_zero(&self.reduce(ctx, v))
    }

    /// Add a vector; returns true when it enlarged the span.
    pub fn add(&mut self, ctx: &FieldCtx, v: &[Elem]) -> bool {
        debug_assert_eq!(v.len(), self.ambient);
        let r = self.reduce(ctx, v);
        let Some(piv) = r.iter().position(|&c| c != 0) else {
            return false;
        };
        let inv = ctx.inv(r[piv]).expect("pivot is nonzero");
        let row = vec_scale(ctx, inv, &r);
        // Eliminate the new pivot from existing rows to keep full reduction.
        for other in self.rows.iter_mut() {
            let c = other[piv];
            if c != 0 {
                let negc = ctx.neg(c);
                vec_axpy(ctx, other, negc, &row);
            }
        }
        let at = self.pivots.partition_point(|&q| q < piv);
        self.rows.insert(at, row);
        self.pivots.insert(at, piv);
        true
    }

    pub fn rows(&self) -> &[Coords] {
        &self.rows
    }

    pub fn into_subspace(self) -> Subspace {
        Subspace {
            ambient: self.ambient,
            rows: self.rows,
            pivots: self.pivots,
            translation: None,
        }
    }
}

/// A linear or affine subspace in reduced row echelon form.
///
/// Equality is derived structural equality; the representation is canonical
/// (RREF rows plus, for affine spaces, the member with the smallest index
/// encoding as translation), so equal spaces compare equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subspace {
    ambient: usize,
    rows: Vec<Coords>,
    pivots: Vec<usize>,
    /// Canonical translation; `None` encodes the zero translation (linear
    /// subspace).
    translation: Option<Coords>,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Subspace {
        Subspace { ambient, rows: Vec::new(), pivots: Vec::new(), translation: None }
    }

    pub fn full(ambient: usize) -> Subspace {
        let rows: Vec<Coords> = (0..ambient)
            .map(|i| {
                let mut r = vec_zero(ambient);
                r[i] = 1;
                r
            })
            .collect();
        Subspace { ambient, rows, pivots: (0..ambient).collect(), translation: None }
    }

    /// Linear span of a family of vectors.
    pub fn span<'a, I: IntoIterator<Item = &'a Coords>>(
        ctx: &FieldCtx,
        ambient: usize,
        vectors: I,
    ) -> Subspace {
        let mut b = SpanBuilder::new(ambient);
        for v in vectors {
            b.add(ctx, v);
            if b.is_full() {
                break;
            }
        }
        b.into_subspace()
    }

    pub fn line(ctx: &FieldCtx, v: &[Elem]) -> Subspace {
        Subspace::span(ctx, v.len(), std::iter::once(&v.to_vec()))
    }

    /// Affine space `translation + rowspace`, with the translation
    /// canonicalized to the minimal-encoding member.
    pub fn affine(ctx: &FieldCtx, translation: &[Elem], linear: Subspace) -> Subspace {
        let mut s = linear;
        let t = canonical_translation(ctx, &s.rows, translation);
        s.translation = if vec_is_zero(&t) { None } else { Some(t) };
        s
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn is_linear(&self) -> bool {
        self.translation.is_none()
    }

    pub fn rows(&self) -> &[Coords] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn translation(&self) -> Coords {
        self.translation.clone().unwrap_or_else(|| vec_zero(self.ambient))
    }

    /// Direction space (forgets the translation).
    pub fn linear_part(&self) -> Subspace {
        Subspace {
            ambient: self.ambient,
            rows: self.rows.clone(),
            pivots: self.pivots.clone(),
            translation: None,
        }
    }

    pub fn contains(&self, ctx: &FieldCtx, v: &[Elem]) -> bool {
        let shifted = match &self.translation {
            Some(t) => vec_sub(ctx, v, t),
            None => v.to_vec(),
        };
        let mut r = shifted;
        for (row, &piv) in self.rows.iter().zip(&self.pivots) {
            let c = r[piv];
            if c != 0 {
                let negc = ctx.neg(c);
                vec_axpy(ctx, &mut r, negc, row);
            }
        }
        vec_is_zero(&r)
    }

    pub fn member_count(&self, ctx: &FieldCtx) -> u128 {
        (ctx.size() as u128).pow(self.dim() as u32)
    }

    /// All members, in the enumeration order of coefficient tuples. Guarded
    /// by an element budget.
    pub fn enumerate_members(&self, ctx: &FieldCtx, budget: usize) -> Result<Vec<Coords>> {
        let total = self.member_count(ctx);
        if total > budget as u128 {
            return Err(Error::BudgetExceeded {
                what: format!("enumerating {total} subspace members"),
                limit: budget,
            });
        }
        let q = ctx.size();
        let d = self.dim();
        let mut out = Vec::with_capacity(total as usize);
        let mut coeffs = vec![0u64; d];
        loop {
            let mut v = self.translation();
            for (c, row) in coeffs.iter().zip(&self.rows) {
                vec_axpy(ctx, &mut v, *c, row);
            }
            out.push(v);
            // Increment the mixed-radix coefficient tuple.
            let mut i = 0;
            while i < d {
                coeffs[i] += 1;
                if coeffs[i] < q {
                    break;
                }
                coeffs[i] = 0;
                i += 1;
            }
            if i == d {
                break;
            }
        }
        Ok(out)
    }

    /// Extend this (linear) subspace's basis to a basis of the ambient space;
    /// returns the completing vectors (unit vectors on non-pivot columns).
    pub fn complete_basis(&self) -> Vec<Coords> {
        let mut out = Vec::new();
        for i in 0..self.ambient {
            if !self.pivots.contains(&i) {
                let mut v = vec_zero(self.ambient);
                v[i] = 1;
                out.push(v);
            }
        }
        out
    }
}

/// The member of `translation + rowspace(rows)` whose index encoding is
/// smallest. Since the encoding weights the last coordinate most, re-reduce
/// with pivots chosen from the highest coordinate downward and zero those
/// coordinates of the translation.
fn canonical_translation(ctx: &FieldCtx, rows: &[Coords], translation: &[Elem]) -> Coords {
    let mut work: Vec<Coords> = rows.to_vec();
    let mut t = translation.to_vec();
    let d = t.len();
    let mut used = vec![false; work.len()];
    for col in (0..d).rev() {
        // Find an unused row with a nonzero entry in this column.
        let Some(r) = (0..work.len()).find(|&r| !used[r] && work[r][col] != 0) else {
            continue;
        };
        used[r] = true;
        let inv = ctx.inv(work[r][col]).expect("nonzero entry");
        work[r] = vec_scale(ctx, inv, &work[r]);
        let lead = work[r].clone();
        for (rr, row) in work.iter_mut().enumerate() {
            if rr != r && row[col] != 0 {
                let c = ctx.neg(row[col]);
                vec_axpy(ctx, row, c, &lead);
            }
        }
        if t[col] != 0 {
            let c = ctx.neg(t[col]);
            vec_axpy(ctx, &mut t, c, &lead);
        }
    }
    t
}

/// A linear (or affine, with constant term) map given by a coefficient
/// matrix in row form: f(x)_r = sum_c matrix[r][c] * x_c (+ constant_r).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearMap {
    pub matrix: Vec<Coords>,
    pub constant: Option<Coords>,
}

impl LinearMap {
    pub fn linear(matrix: Vec<Coords>) -> LinearMap {
        LinearMap { matrix, constant: None }
    }

    pub fn identity(d: usize) -> LinearMap {
        LinearMap::linear(
            (0..d)
                .map(|i| {
                    let mut r = vec_zero(d);
                    r[i] = 1;
                    r
                })
                .collect(),
        )
    }

    pub fn zero(in_dim: usize, out_dim: usize) -> LinearMap {
        LinearMap::linear(vec![vec_zero(in_dim); out_dim])
    }

    pub fn out_dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn in_dim(&self) -> usize {
        self.matrix.first().map_or(0, |r| r.len())
    }

    pub fn is_homogeneous(&self) -> bool {
        match &self.constant {
            None => true,
            Some(c) => vec_is_zero(c),
        }
    }

    pub fn apply(&self, ctx: &FieldCtx, x: &[Elem]) -> Coords {
        debug_assert_eq!(x.len(), self.in_dim());
        let mut out: Coords = self
            .matrix
            .iter()
            .map(|row| {
                let mut acc = 0;
                for (&m, &xi) in row.iter().zip(x) {
                    if m != 0 && xi != 0 {
                        acc = ctx.add(acc, ctx.mul(m, xi));
                    }
                }
                acc
            })
            .collect();
        if let Some(c) = &self.constant {
            out = vec_add(ctx, &out, c);
        }
        out
    }

    /// Matrix of the homogeneous part of self . other.
    pub fn compose(&self, ctx: &FieldCtx, other: &LinearMap) -> LinearMap {
        debug_assert_eq!(self.in_dim(), other.out_dim());
        let cols = other.in_dim();
        let matrix: Vec<Coords> = self
            .matrix
            .iter()
            .map(|row| {
                let mut out = vec_zero(cols);
                for (&coef, orow) in row.iter().zip(&other.matrix) {
                    vec_axpy(ctx, &mut out, coef, orow);
                }
                out
            })
            .collect();
        let constant = match (&self.constant, &other.constant) {
            (None, None) => None,
            _ => {
                let oc = other
                    .constant
                    .clone()
                    .unwrap_or_else(|| vec_zero(other.out_dim()));
                let mut c = LinearMap::linear(self.matrix.clone()).apply(ctx, &oc);
                if let Some(sc) = &self.constant {
                    c = vec_add(ctx, &c, sc);
                }
                Some(c)
            }
        };
        LinearMap { matrix, constant }
    }

    pub fn transpose(&self) -> LinearMap {
        let rows = self.out_dim();
        let cols = self.in_dim();
        LinearMap::linear(
            (0..cols)
                .map(|c| (0..rows).map(|r| self.matrix[r][c]).collect())
                .collect(),
        )
    }

    /// self + c * other (homogeneous parts; constants added likewise).
    pub fn add_scaled(&self, ctx: &FieldCtx, c: Elem, other: &LinearMap) -> LinearMap {
        debug_assert_eq!(self.in_dim(), other.in_dim());
        debug_assert_eq!(self.out_dim(), other.out_dim());
        let matrix = self
            .matrix
            .iter()
            .zip(&other.matrix)
            .map(|(a, b)| {
                let mut r = a.clone();
                vec_axpy(ctx, &mut r, c, b);
                r
            })
            .collect();
        let constant = match (&self.constant, &other.constant) {
            (None, None) => None,
            (a, b) => {
                let mut v = a.clone().unwrap_or_else(|| vec_zero(self.out_dim()));
                if let Some(b) = b {
                    vec_axpy(ctx, &mut v, c, b);
                }
                Some(v)
            }
        };
        LinearMap { matrix, constant }
    }

    /// Null space of the homogeneous part.
    pub fn kernel(&self, ctx: &FieldCtx) -> Subspace {
        let d = self.in_dim();
        // RREF of the matrix, then read free-column basis vectors.
        let mut b = SpanBuilder::new(d);
        for row in &self.matrix {
            b.add(ctx, row);
        }
        let pivots = b.pivots.clone();
        let rows = b.rows.clone();
        let mut basis: Vec<Coords> = Vec::new();
        for free in 0..d {
            if pivots.contains(&free) {
                continue;
            }
            let mut v = vec_zero(d);
            v[free] = 1;
            for (row, &piv) in rows.iter().zip(&pivots) {
                v[piv] = ctx.neg(row[free]);
            }
            basis.push(v);
        }
        Subspace::span(ctx, d, basis.iter())
    }
}

/// Image of a subspace under a map, as a canonical (affine) subspace, plus
/// the common fibre dimension dim X - dim f(X).
pub fn image_and_fibre(ctx: &FieldCtx, f: &LinearMap, x: &Subspace) -> (Subspace, usize) {
    let hom = LinearMap::linear(f.matrix.clone());
    let mapped: Vec<Coords> = x.rows().iter().map(|r| hom.apply(ctx, r)).collect();
    let linear = Subspace::span(ctx, f.out_dim(), mapped.iter());
    let fibre_dim = x.dim() - linear.dim();
    let t = f.apply(ctx, &x.translation());
    (Subspace::affine(ctx, &t, linear), fibre_dim)
}

/// Solve f(v) = w for v constrained to the (affine) subspace X. Returns the
/// solution set as an affine subspace of the ambient space, or None when
/// empty.
pub fn preimage_in(
    ctx: &FieldCtx,
    f: &LinearMap,
    w: &[Elem],
    x: &Subspace,
) -> Option<Subspace> {
    // Parameterize X by u: v = t + sum u_i r_i, then solve (M R) u = w - f(t)
    // where R's columns are the basis rows of X. f.apply(t) accounts for any
    // constant term of f.
    let t = x.translation();
    let rhs = vec_sub(ctx, w, &f.apply(ctx, &t));
    let d = x.dim();
    let hom = LinearMap::linear(f.matrix.clone());
    // Columns of the parameter matrix: f's homogeneous part on each basis row.
    let cols: Vec<Coords> = x.rows().iter().map(|r| hom.apply(ctx, r)).collect();
    // Gaussian elimination on the augmented system (rows = output coords).
    let out_d = f.out_dim();
    let mut aug: Vec<Coords> = (0..out_d)
        .map(|r| {
            let mut row: Coords = cols.iter().map(|c| c[r]).collect();
            row.push(rhs[r]);
            row
        })
        .collect();
    // Reduce.
    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (row, col)
    let mut rank = 0;
    for col in 0..d {
        let Some(pr) = (rank..out_d).find(|&r| aug[r][col] != 0) else {
            continue;
        };
        aug.swap(rank, pr);
        let inv = ctx.inv(aug[rank][col]).unwrap();
        aug[rank] = vec_scale(ctx, inv, &aug[rank]);
        let lead = aug[rank].clone();
        for (r, row) in aug.iter_mut().enumerate() {
            if r != rank && row[col] != 0 {
                let c = ctx.neg(row[col]);
                vec_axpy(ctx, row, c, &lead);
            }
        }
        pivots.push((rank, col));
        rank += 1;
    }
    // Inconsistent when a zero row has nonzero rhs.
    for row in aug.iter().skip(rank) {
        if *row.last().unwrap() != 0 {
            return None;
        }
    }
    // Particular solution in u-space.
    let mut u0 = vec_zero(d);
    for &(r, c) in &pivots {
        u0[c] = aug[r][d];
    }
    // Kernel basis in u-space.
    let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
    let mut kernel_u: Vec<Coords> = Vec::new();
    for free in 0..d {
        if pivot_cols.contains(&free) {
            continue;
        }
        let mut v = vec_zero(d);
        v[free] = 1;
        for &(r, c) in &pivots {
            v[c] = ctx.neg(aug[r][free]);
        }
        kernel_u.push(v);
    }
    // Map back to ambient space.
    let param = |u: &Coords| {
        let mut v = vec_zero(x.ambient());
        for (c, row) in u.iter().zip(x.rows()) {
            vec_axpy(ctx, &mut v, *c, row);
        }
        v
    };
    let mut v0 = t;
    let p = param(&u0);
    v0 = vec_add(ctx, &v0, &p);
    let dirs: Vec<Coords> = kernel_u.iter().map(param).collect();
    let linear = Subspace::span(ctx, x.ambient(), dirs.iter());
    Some(Subspace::affine(ctx, &v0, linear))
}

/// Exact counting inequality behind the fibre argument: with P the product
/// pairs of (A_t1 x A_t2) lying in X,
///   |P| <= |Ak ∩ f(X)| * max_w |P ∩ f^{-1}(w)|.
/// Returns the verdict plus a maximizing fibre. Errors if some f-image of a
/// pair escapes Ak (precondition violation, reported distinctly).
pub fn fibre_counting_bound(
    ctx: &FieldCtx,
    a_t1: &[Coords],
    a_t2: &[Coords],
    f: &LinearMap,
    x: &Subspace,
    ak: &[Coords],
) -> Result<(bool, Subspace)> {
    use std::collections::HashMap;
    let ak_set: std::collections::HashSet<u128> =
        ak.iter().map(|v| encode(ctx, v)).collect();
    let mut by_fibre: HashMap<u128, (Coords, u64)> = HashMap::new();
    let mut in_x_count: u64 = 0;
    for a in a_t1 {
        for b in a_t2 {
            let mut pair = a.clone();
            pair.extend_from_slice(b);
            let w = f.apply(ctx, &pair);
            if !ak_set.contains(&encode(ctx, &w)) {
                return Err(Error::BadInput(
                    "precondition failed: f(A^t1 x A^t2) not contained in A^k".into(),
                ));
            }
            if x.contains(ctx, &pair) {
                in_x_count += 1;
                by_fibre
                    .entry(encode(ctx, &w))
                    .or_insert_with(|| (w.clone(), 0))
                    .1 += 1;
            }
        }
    }
    // |Ak ∩ f(X)|.
    let (fx, _) = image_and_fibre(ctx, f, x);
    let image_count = ak
        .iter()
        .filter(|v| fx.contains(ctx, v))
        .count() as u64;
    let (max_w, max_count) = by_fibre
        .values()
        .max_by_key(|(w, c)| (*c, std::cmp::Reverse(encode(ctx, w))))
        .map(|(w, c)| (w.clone(), *c))
        .unwrap_or((vec_zero(f.out_dim()), 0));
    let holds = in_x_count <= image_count * max_count || in_x_count == 0;
    let fibre = preimage_in(ctx, f, &max_w, x)
        .unwrap_or_else(|| Subspace::zero(x.ambient()));
    Ok((holds, fibre))
}

/// Express vectors as explicit combinations of a fixed generator list.
/// Tracks, for each independent generator image, its combination row.
#[derive(Debug, Clone)]
pub struct SpanSolver {
    ambient: usize,
    n_gens: usize,
    /// (reduced vector, combination over generators), pivots ascending.
    rows: Vec<(Coords, Coords)>,
    pivots: Vec<usize>,
}

impl SpanSolver {
    pub fn new(ambient: usize) -> SpanSolver {
        SpanSolver { ambient, n_gens: 0, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn is_full(&self) -> bool {
        self.rows.len() == self.ambient
    }

    /// Add a generator; returns true when it enlarged the span.
    pub fn add_generator(&mut self, ctx: &FieldCtx, g: &[Elem]) -> bool {
        let idx = self.n_gens;
        self.n_gens += 1;
        let mut v = g.to_vec();
        let mut combo = vec_zero(self.n_gens);
        combo[idx] = 1;
        for ((row, rcombo), &piv) in self.rows.iter().zip(&self.pivots) {
            let c = v[piv];
            if c != 0 {
                let negc = ctx.neg(c);
                vec_axpy(ctx, &mut v, negc, row);
                let mut rc = rcombo.clone();
                rc.resize(self.n_gens, 0);
                vec_axpy(ctx, &mut combo, negc, &rc);
            }
        }
        let Some(piv) = v.iter().position(|&c| c != 0) else {
            return false;
        };
        let inv = ctx.inv(v[piv]).unwrap();
        let v = vec_scale(ctx, inv, &v);
        let combo = vec_scale(ctx, inv, &combo);
        let at = self.pivots.partition_point(|&q| q < piv);
        self.rows.insert(at, (v, combo));
        self.pivots.insert(at, piv);
        true
    }

    /// Coefficients expressing the target over the generators, or None when
    /// the target is outside the span.
    pub fn solve(&self, ctx: &FieldCtx, target: &[Elem]) -> Option<Coords> {
        let mut v = target.to_vec();
        let mut acc = vec_zero(self.n_gens);
        for ((row, rcombo), &piv) in self.rows.iter().zip(&self.pivots) {
            let c = v[piv];
            if c != 0 {
                let negc = ctx.neg(c);
                vec_axpy(ctx, &mut v, negc, row);
                let mut rc = rcombo.clone();
                rc.resize(self.n_gens, 0);
                vec_axpy(ctx, &mut acc, c, &rc);
            }
        }
        if vec_is_zero(&v) {
            Some(acc)
        } else {
            None
        }
    }
}
