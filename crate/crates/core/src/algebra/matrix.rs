//! Matrix realizations of the classical types:
//!   sl_n: trace-zero matrices,
//!   so_m: x^T J + J x = 0 with J the split symmetric form
//!         [[0,I],[I,0]] (plus a 1 in the corner for odd m),
//!   sp_2n: x^T J + J x = 0 with J = [[0,I],[-I,0]].
//!
//! The basis is the reduced-echelon kernel basis of the defining linear
//! condition on Mat_N, vectorized row-major, so the construction is
//! deterministic. Structure constants come from matrix commutators expressed
//! back in the basis.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::field::{Elem, FieldCtx};
use crate::linalg::{vec_zero, Coords, LinearMap, SpanSolver};
use crate::{Error, Result};

use super::{AlgebraSpec, LieType};

/// Basis of an algebra as N x N matrices, vectorized row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixRealization {
    pub n: usize,
    pub basis: Vec<Coords>,
}

impl MatrixRealization {
    /// Matrix (vectorized) of an element given in algebra coordinates.
    pub fn matrix_of(&self, ctx: &FieldCtx, coords: &[Elem]) -> Coords {
        let mut out = vec_zero(self.n * self.n);
        for (c, b) in coords.iter().zip(&self.basis) {
            crate::linalg::vec_axpy(ctx, &mut out, *c, b);
        }
        out
    }

    /// Algebra coordinates of a vectorized matrix, or None when it lies
    /// outside the span of the realization basis.
    pub fn coords_of(&self, ctx: &FieldCtx, mat: &[Elem]) -> Option<Coords> {
        let mut solver = SpanSolver::new(self.n * self.n);
        for b in &self.basis {
            solver.add_generator(ctx, b);
        }
        let mut c = solver.solve(ctx, mat)?;
        c.resize(self.basis.len(), 0);
        Some(c)
    }

    /// Entry accessor on a vectorized matrix with 1-based indices (matching
    /// the e_ij notation).
    pub fn entry(&self, mat: &[Elem], i: usize, j: usize) -> Elem {
        mat[(i - 1) * self.n + (j - 1)]
    }
}

/// Vectorized (row-major) product of two N x N matrices.
pub fn mat_mul(ctx: &FieldCtx, n: usize, a: &[Elem], b: &[Elem]) -> Coords {
    let mut out = vec_zero(n * n);
    for i in 0..n {
        for l in 0..n {
            let ail = a[i * n + l];
            if ail == 0 {
                continue;
            }
            for j in 0..n {
                let blj = b[l * n + j];
                if blj != 0 {
                    out[i * n + j] = ctx.add(out[i * n + j], ctx.mul(ail, blj));
                }
            }
        }
    }
    out
}

pub fn mat_commutator(ctx: &FieldCtx, n: usize, a: &[Elem], b: &[Elem]) -> Coords {
    let ab = mat_mul(ctx, n, a, b);
    let ba = mat_mul(ctx, n, b, a);
    crate::linalg::vec_sub(ctx, &ab, &ba)
}

pub fn mat_transpose(n: usize, a: &[Elem]) -> Coords {
    let mut out = vec_zero(n * n);
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = a[i * n + j];
        }
    }
    out
}

/// Unit matrix e_ij with 1-based indices, vectorized.
pub fn unit_matrix(n: usize, i: usize, j: usize) -> Coords {
    let mut m = vec_zero(n * n);
    m[(i - 1) * n + (j - 1)] = 1;
    m
}

/// The defining bilinear form J for so/sp types.
fn split_form(ctx: &FieldCtx, ty: LieType) -> Option<Coords> {
    match ty {
        LieType::SoEven(n) => {
            let m = 2 * n;
            let mut j = vec_zero(m * m);
            for i in 0..n {
                j[i * m + (i + n)] = 1;
                j[(i + n) * m + i] = 1;
            }
            Some(j)
        }
        LieType::SoOdd(n) => {
            let m = 2 * n + 1;
            let mut j = vec_zero(m * m);
            for i in 0..n {
                j[i * m + (i + n)] = 1;
                j[(i + n) * m + i] = 1;
            }
            j[(m - 1) * m + (m - 1)] = 1;
            Some(j)
        }
        LieType::Sp(n) => {
            let m = 2 * n;
            let mut j = vec_zero(m * m);
            for i in 0..n {
                j[i * m + (i + n)] = 1;
                j[(i + n) * m + i] = ctx.neg(1);
            }
            Some(j)
        }
        _ => None,
    }
}

/// Build sl/so/sp over the field, with the realization attached.
pub fn build_matrix_type(ty: LieType, ctx: Arc<FieldCtx>) -> Result<AlgebraSpec> {
    let n = ty.matrix_size().expect("matrix type");
    let nn = n * n;
    // Matrix of the defining linear condition on vectorized Mat_N.
    let condition_rows: Vec<Coords> = match ty {
        LieType::Sl(_) => {
            // Single row: trace.
            let mut row = vec_zero(nn);
            for i in 0..n {
                row[i * n + i] = 1;
            }
            vec![row]
        }
        _ => {
            let j = split_form(&ctx, ty).unwrap();
            // Rows of x -> x^T J + J x, one output entry per row.
            let mut rows = vec![vec_zero(nn); nn];
            for r in 0..n {
                for c in 0..n {
                    // Output entry (r, c) as a function of x entries:
                    // (x^T J)_{rc} = sum_m x_{mr} J_{mc};
                    // (J x)_{rc} = sum_m J_{rm} x_{mc}.
                    for m in 0..n {
                        let out = &mut rows[r * n + c];
                        let jmc = j[m * n + c];
                        if jmc != 0 {
                            out[m * n + r] = ctx.add(out[m * n + r], jmc);
                        }
                        let jrm = j[r * n + m];
                        if jrm != 0 {
                            out[m * n + c] = ctx.add(out[m * n + c], jrm);
                        }
                    }
                }
            }
            rows
        }
    };
    let kernel = LinearMap::linear(condition_rows).kernel(&ctx);
    let basis: Vec<Coords> = kernel.rows().to_vec();
    let dim = basis.len();
    if dim != ty.dim() {
        return Err(Error::BadInput(format!(
            "kernel of the defining condition for {} has dimension {dim}, expected {}",
            ty.label(),
            ty.dim()
        )));
    }
    // Structure constants from commutators.
    let mut solver = SpanSolver::new(nn);
    for b in &basis {
        solver.add_generator(&ctx, b);
    }
    let mut tensor: Vec<(u32, u32, u32, Elem)> = Vec::new();
    for i in 0..dim {
        for j in 0..dim {
            let comm = mat_commutator(&ctx, n, &basis[i], &basis[j]);
            let coeffs = solver.solve(&ctx, &comm).ok_or_else(|| {
                Error::BadInput(format!("{} is not closed under commutator", ty.label()))
            })?;
            for (k, &c) in coeffs.iter().enumerate() {
                if c != 0 {
                    tensor.push((i as u32, j as u32, k as u32, c));
                }
            }
        }
    }
    let realization = MatrixRealization { n, basis };
    AlgebraSpec::from_parts(Some(ty.label()), ctx, dim, tensor, Some(realization))
}
