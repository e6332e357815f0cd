//! Extremal elements: certification of the containment [[g,x],x] ⊆ Kx with
//! its linear functional lambda_x, sandwich detection, the explicit extremal
//! families of the matrix-realized classical types, extremal bases carrying
//! a distinguished element and verified witnesses, the generic-set membership
//! test, and quadratic vanishing-propagation checks.

use std::io::Write as IoWrite;

use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraSpec, LieType, MatrixRealization};
use crate::exec::{self, Strategy};
use crate::field::{Elem, FieldCtx};
use crate::linalg::{vec_axpy, vec_is_zero, vec_scale, vec_zero, Coords, SpanBuilder};
use crate::{Error, Result};

/// Outcome of certifying [[b_i, x], x] = lambda_x(b_i) x over every basis
/// element. Linearity of y -> [[y,x],x] extends the certified relation to
/// the whole algebra.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertOutcome {
    Extremal {
        /// lambda_x as a row over the standard basis: lambda_x(b_i) = row[i].
        lambda: Coords,
        /// True when the row is identically zero.
        sandwich: bool,
    },
    /// Basis index i with [[b_i, x], x] outside K x.
    Refuted { basis_index: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtremalCertificate {
    pub element: Coords,
    pub outcome: CertOutcome,
}

impl ExtremalCertificate {
    pub fn is_extremal(&self) -> bool {
        matches!(self.outcome, CertOutcome::Extremal { .. })
    }

    pub fn is_sandwich(&self) -> bool {
        matches!(self.outcome, CertOutcome::Extremal { sandwich: true, .. })
    }

    pub fn lambda_row(&self) -> Option<&Coords> {
        match &self.outcome {
            CertOutcome::Extremal { lambda, .. } => Some(lambda),
            CertOutcome::Refuted { .. } => None,
        }
    }

    /// lambda_x(y) by linearity from the certified row; None when refuted.
    pub fn lambda_of(&self, ctx: &FieldCtx, y: &[Elem]) -> Option<Elem> {
        let row = self.lambda_row()?;
        let mut acc = 0;
        for (c, l) in y.iter().zip(row) {
            acc = ctx.add(acc, ctx.mul(*c, *l));
        }
        Some(acc)
    }
}

/// Certify x by direct evaluation of [[b_i, x], x] for every basis b_i.
pub fn certify_extremal(g: &AlgebraSpec, x: Coords) -> Result<ExtremalCertificate> {
    let d = g.dim();
    if x.len() != d {
        return Err(Error::DimMismatch { expected: d, got: x.len() });
    }
    if vec_is_zero(&x) {
        return Err(Error::ZeroElement("extremal certification of 0".into()));
    }
    let ctx = g.ctx();
    let pivot = x.iter().position(|&c| c != 0).unwrap();
    let pivot_inv = ctx.inv(x[pivot])?;
    let mut lambda = vec_zero(d);
    for i in 0..d {
        let w = g.bracket_raw(&g.bracket_raw(&g.basis_vec(i), &x), &x);
        let c = ctx.mul(w[pivot], pivot_inv);
        if w != vec_scale(ctx, c, &x) {
            return Ok(ExtremalCertificate {
                element: x,
                outcome: CertOutcome::Refuted { basis_index: i },
            });
        }
        lambda[i] = c;
    }
    let sandwich = vec_is_zero(&lambda);
    Ok(ExtremalCertificate { element: x, outcome: CertOutcome::Extremal { lambda, sandwich } })
}

/// Combine two extremal elements into x + [x,y] + (1/2) lambda_y(x) y and
/// re-certify the result; a refutation here signals an upstream bug.
pub fn extrbra_combine(
    g: &AlgebraSpec,
    x: &ExtremalCertificate,
    y: &ExtremalCertificate,
) -> Result<ExtremalCertificate> {
    let ctx = g.ctx();
    if ctx.p() == 2 {
        return Err(Error::CharTwo);
    }
    if !x.is_extremal() || !y.is_extremal() {
        return Err(Error::BadInput("extrbra_combine needs two certified extremal elements".into()));
    }
    let ly_x = y.lambda_of(ctx, &x.element).unwrap();
    let half = ctx.inv(ctx.from_int(2))?;
    let mut out = x.element.clone();
    vec_axpy(ctx, &mut out, 1, &g.bracket_raw(&x.element, &y.element));
    vec_axpy(ctx, &mut out, ctx.mul(half, ly_x), &y.element);
    let cert = certify_extremal(g, out)?;
    if !cert.is_extremal() {
        return Err(Error::LemmaViolation(
            "combination of two extremal elements failed certification".into(),
        ));
    }
    Ok(cert)
}

/// Check 2[[x,z],[y,z]] = lambda_z(x)[y,z] - lambda_z(y)[x,z]
/// + lambda_z([x,y]) z for a certified extremal z. True means the identity
/// holds at (x, y, z).
pub fn extremal_identity_check(
    g: &AlgebraSpec,
    x: &[Elem],
    y: &[Elem],
    z: &ExtremalCertificate,
) -> Result<bool> {
    if !z.is_extremal() {
        return Err(Error::BadInput("identity check needs a certified extremal z".into()));
    }
    let ctx = g.ctx();
    let xz = g.bracket_raw(x, &z.element);
    let yz = g.bracket_raw(y, &z.element);
    let lhs = vec_scale(ctx, ctx.from_int(2), &g.bracket_raw(&xz, &yz));
    let lx = z.lambda_of(ctx, x).unwrap();
    let ly = z.lambda_of(ctx, y).unwrap();
    let lxy = z.lambda_of(ctx, &g.bracket_raw(x, y)).unwrap();
    let mut rhs = vec_scale(ctx, lx, &yz);
    vec_axpy(ctx, &mut rhs, ctx.neg(ly), &xz);
    vec_axpy(ctx, &mut rhs, lxy, &z.element);
    Ok(lhs == rhs)
}

/// One family member: matrix entries (1-based) with integer coefficients,
/// and the stated lambda functional as entry picks of the argument matrix.
struct Family {
    entries: Vec<(usize, usize, i64)>,
    lambda: Vec<(usize, usize, i64)>,
}

fn eq_rank1(i: usize, j: usize) -> Family {
    Family { entries: vec![(i, j, 1)], lambda: vec![(j, i, -2)] }
}

fn eq_plus4(i: usize, j: usize, i2: usize, j2: usize) -> Family {
    Family {
        entries: vec![(i, j, 1), (i, j2, 1), (i2, j, 1), (i2, j2, 1)],
        lambda: vec![(j, i, -2), (j2, i, -2), (j, i2, -2), (j2, i2, -2)],
    }
}

fn eq_mixed4(i: usize, j: usize, i2: usize, j2: usize) -> Family {
    Family {
        entries: vec![(i, j, 1), (i, j2, 1), (i2, j, -1), (i2, j2, -1)],
        lambda: vec![(j, i, -2), (j2, i, -2), (j, i2, 2), (j2, i2, 2)],
    }
}

fn so_skew_upper(n: usize, i: usize, j: usize) -> Family {
    Family { entries: vec![(i, j, 1), (j + n, i + n, -1)], lambda: vec![(j, i, -2)] }
}

fn so_top_right(n: usize, i: usize, j: usize) -> Family {
    Family { entries: vec![(i, j + n, 1), (j, i + n, -1)], lambda: vec![(j + n, i, -2)] }
}

fn so_bottom_left(n: usize, i: usize, j: usize) -> Family {
    Family { entries: vec![(i + n, j, 1), (j + n, i, -1)], lambda: vec![(j, i + n, -2)] }
}

fn so_eight_term(n: usize, i: usize, j: usize) -> Family {
    Family {
        entries: vec![
            (i, i, 1),
            (i + n, i + n, -1),
            (j, j, 1),
            (j + n, j + n, -1),
            (i, j + n, 1),
            (j, i + n, -1),
            (i + n, j, 1),
            (j + n, i, -1),
        ],
        lambda: vec![(i, i, -2), (j, j, -2), (i, j + n, 2), (i + n, j, 2)],
    }
}

fn so_odd_first(n: usize, i: usize, j: usize) -> Family {
    let m = 2 * n + 1;
    Family {
        entries: vec![
            (i, j, 2),
            (j + n, i + n, -2),
            (j, i + n, 1),
            (i, j + n, -1),
            (i, m, 2),
            (m, i + n, -2),
        ],
        lambda: vec![(j, i, -4), (j + n, i, 2), (i + n, m, 4)],
    }
}

fn so_odd_second(n: usize, i: usize, j: usize) -> Family {
    let m = 2 * n + 1;
    Family {
        entries: vec![
            (i, j, 2),
            (j + n, i + n, -2),
            (j + n, i, 1),
            (i + n, j, -1),
            (m, j, 2),
            (j + n, m, -2),
        ],
        lambda: vec![(j, i, -4), (i, j + n, -2), (j, m, -4)],
    }
}

fn family_list(ty: LieType) -> Vec<Family> {
    let mut out = Vec::new();
    match ty {
        LieType::Sl(n) => {
            // Distinguished rank-one element first, then the remaining
            // off-diagonal units, then the traceless diagonal completions.
            out.push(eq_rank1(1, 2));
            for i in 1..=n {
                for j in 1..=n {
                    if i != j && (i, j) != (1, 2) {
                        out.push(eq_rank1(i, j));
                    }
                }
            }
            for i in 1..n {
                out.push(eq_mixed4(i, i, i + 1, i + 1));
            }
        }
        LieType::Sp(n) => {
            for i in 1..=n {
                out.push(eq_rank1(i, i + n));
            }
            for i in 1..=n {
                out.push(eq_rank1(i + n, i));
            }
            for i in 1..=n {
                for j in i + 1..=n {
                    out.push(eq_plus4(i, i + n, j, j + n));
                }
            }
            for i in 1..=n {
                for j in i + 1..=n {
                    out.push(eq_plus4(i + n, i, j + n, j));
                }
            }
            for i in 1..=n {
                for j in 1..=n {
                    out.push(eq_mixed4(i, j, j + n, i + n));
                }
            }
        }
        LieType::SoEven(n) => {
            out.push(so_top_right(n, 1, 2));
            for i in 1..=n {
                for j in 1..=n {
                    if i != j {
                        out.push(so_skew_upper(n, i, j));
                    }
                }
            }
            for i in 1..=n {
                for j in i + 1..=n {
                    if (i, j) != (1, 2) {
                        out.push(so_top_right(n, i, j));
                    }
                }
            }
            for i in 1..=n {
                for j in i + 1..=n {
                    out.push(so_bottom_left(n, i, j));
                }
            }
            for i in 2..=n {
                out.push(so_eight_term(n, 1, i));
            }
            if n >= 3 {
                out.push(so_eight_term(n, 2, 3));
            }
        }
        LieType::SoOdd(n) => {
            // The even-rank families embed in the top-left block unchanged.
            out.extend(family_list(LieType::SoEven(n)));
            for i in 2..=n {
                out.push(so_odd_first(n, i, 1));
            }
            for i in 2..=n {
                out.push(so_odd_second(n, 1, i));
            }
            if n >= 2 {
                out.push(so_odd_first(n, 1, 2));
                out.push(so_odd_second(n, 2, 1));
            }
        }
        _ => {}
    }
    out
}

fn family_matrix(ctx: &FieldCtx, n: usize, entries: &[(usize, usize, i64)]) -> Coords {
    let mut m = vec_zero(n * n);
    for &(i, j, c) in entries {
        let idx = (i - 1) * n + (j - 1);
        m[idx] = ctx.add(m[idx], ctx.from_int(c));
    }
    m
}

fn printed_lambda_eval(ctx: &FieldCtx, n: usize, lambda: &[(usize, usize, i64)], z: &[Elem]) -> Elem {
    let mut acc = 0;
    for &(i, j, c) in lambda {
        acc = ctx.add(acc, ctx.mul(ctx.from_int(c), z[(i - 1) * n + (j - 1)]));
    }
    acc
}

/// The explicit extremal families of the matrix-realized classical types,
/// certified one by one, with the stated lambda functionals checked against
/// the computed rows on every basis element.
pub fn appendix_extremal_families(g: &AlgebraSpec) -> Result<Vec<ExtremalCertificate>> {
    let ty = g
        .label()
        .and_then(LieType::parse_label)
        .filter(|t| t.matrix_size().is_some())
        .ok_or_else(|| Error::BadInput("explicit families need a matrix-realized sl/so/sp algebra".into()))?;
    let r: &MatrixRealization = g
        .realization()
        .ok_or_else(|| Error::BadInput("algebra carries no matrix realization".into()))?;
    let ctx = g.ctx();
    let n = r.n;
    let mut out = Vec::new();
    for fam in family_list(ty) {
        let mat = family_matrix(ctx, n, &fam.entries);
        let coords = r.coords_of(ctx, &mat).ok_or_else(|| {
            Error::LemmaViolation(format!("family element lies outside {}", ty.label()))
        })?;
        let cert = certify_extremal(g, coords)?;
        let row = cert.lambda_row().ok_or_else(|| {
            Error::LemmaViolation(format!("family element of {} failed certification", ty.label()))
        })?;
        for t in 0..g.dim() {
            let printed = printed_lambda_eval(ctx, n, &fam.lambda, &r.basis[t]);
            if printed != row[t] {
                return Err(Error::LemmaViolation(format!(
                    "stated lambda disagrees with the computed row at basis index {t} in {}",
                    ty.label()
                )));
            }
        }
        out.push(cert);
    }
    Ok(out)
}

/// exp(ad z) applied to x, summing (ad z)^k x / k! until the chain dies.
/// None when ad z is not nilpotent on x within the dimension bound, or the
/// chain outlives the characteristic (no inverse factorials).
fn exp_ad_apply(g: &AlgebraSpec, z: &[Elem], x: &[Elem]) -> Option<Coords> {
    let ctx = g.ctx();
    let p = ctx.p();
    let mut acc = x.to_vec();
    let mut term = x.to_vec();
    let mut fact: Elem = 1;
    for k in 1..=(g.dim() as u64 + 1) {
        term = g.bracket_raw(z, &term);
        if vec_is_zero(&term) {
            return Some(acc);
        }
        if k >= p {
            return None;
        }
        fact = ctx.mul(fact, ctx.from_int(k as i64));
        let c = ctx.inv(fact).ok()?;
        vec_axpy(ctx, &mut acc, c, &term);
    }
    None
}

/// Initial pool of certified extremal elements: the explicit families for
/// matrix-realized types; certified root vectors (long roots first, short
/// ones kept only when they pass) for root-system constructions.
fn seed_pool(g: &AlgebraSpec) -> Result<Vec<ExtremalCertificate>> {
    if g.realization().is_some() {
        return appendix_extremal_families(g);
    }
    let info = g
        .chevalley()
        .ok_or_else(|| Error::BadInput("no seed pool known for this algebra".into()))?;
    let mut long_flag = vec![false; info.num_positive];
    for &i in &info.long_positive {
        long_flag[i] = true;
    }
    let order: Vec<usize> = (0..info.num_positive)
        .filter(|&i| long_flag[i])
        .chain((0..info.num_positive).filter(|&i| !long_flag[i]))
        .collect();
    let mut out = Vec::new();
    for i in order {
        for idx in [info.pos_e(i), info.neg_e(i)] {
            let cert = certify_extremal(g, g.basis_vec(idx))?;
            if cert.is_extremal() {
                out.push(cert);
            } else if long_flag[i] {
                return Err(Error::LemmaViolation(
                    "a long-root vector failed extremal certification".into(),
                ));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct B1Attempt {
    /// Index of the tried distinguished element in the selected basis.
    pub candidate: usize,
    /// First basis index whose bracket witness was not found, when failed.
    pub failed_at: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtremalBasis {
    /// Spanning set of dim(g) certified extremal elements, none a sandwich.
    pub elements: Vec<ExtremalCertificate>,
    /// Index of the distinguished element within `elements`.
    pub b1: usize,
    /// Per element b: z with lambda_b(z) != 0.
    pub witness_a: Vec<Coords>,
    /// Per element b != b1: z with [[z,b1],[z,b]] != 0; None at b1 itself.
    pub witness_b: Vec<Option<Coords>>,
    /// Outcome of every distinguished-candidate attempt, in order.
    pub b1_attempts: Vec<B1Attempt>,
}

pub fn build_extremal_basis(g: &AlgebraSpec) -> Result<ExtremalBasis> {
    build_extremal_basis_with(g, Strategy::default())
}

pub fn build_extremal_basis_with(g: &AlgebraSpec, strategy: Strategy) -> Result<ExtremalBasis> {
    let ctx = g.ctx();
    if ctx.p() == 2 {
        return Err(Error::CharTwo);
    }
    let d = g.dim();
    let mut pool = seed_pool(g)?;
    let mut span = SpanBuilder::new(d);
    for c in &pool {
        span.add(ctx, &c.element);
    }
    let mut rounds = 0;
    while !span.is_full() {
        rounds += 1;
        let before = span.dim();
        // Pairwise combinations keep the pool extremal and can leave the
        // span of the current pool.
        let snapshot = pool.len();
        for i in 0..snapshot {
            for j in 0..snapshot {
                if i == j {
                    continue;
                }
                let (a, b) = (pool[i].clone(), pool[j].clone());
                if let Ok(c) = extrbra_combine(g, &a, &b) {
                    if span.add(ctx, &c.element) {
                        pool.push(c);
                    }
                }
            }
        }
        // Exponential images along root directions escape proper subalgebras
        // closed under the combination above; every image is re-certified.
        if !span.is_full() {
            if let Some(info) = g.chevalley() {
                let dirs: Vec<usize> = (0..info.num_positive)
                    .flat_map(|i| [info.pos_e(i), info.neg_e(i)])
                    .collect();
                for &dir in &dirs {
                    let z = g.basis_vec(dir);
                    for idx in 0..pool.len() {
                        let img = match exp_ad_apply(g, &z, &pool[idx].element.clone()) {
                            Some(v) => v,
                            None => continue,
                        };
                        if span.contains(ctx, &img) {
                            continue;
                        }
                        if let Ok(c) = certify_extremal(g, img) {
                            if c.is_extremal() && span.add(ctx, &c.element) {
                                pool.push(c);
                            }
                        }
                    }
                }
            }
        }
        if span.dim() == before || rounds > 8 {
            return Err(Error::WitnessSearchExhausted(format!(
                "extremal pool stalled at dimension {} of {d}",
                span.dim()
            )));
        }
    }
    // Echelon selection in pool order, skipping sandwiches.
    let mut chosen: Vec<ExtremalCertificate> = Vec::new();
    let mut sel = SpanBuilder::new(d);
    for c in &pool {
        if !c.is_sandwich() && sel.add(ctx, &c.element) {
            chosen.push(c.clone());
        }
    }
    if chosen.len() != d {
        return Err(Error::WitnessSearchExhausted(format!(
            "non-sandwich pool spans only dimension {} of {d}",
            chosen.len()
        )));
    }
    // Witness (a): lambda_b is linear, so scanning the basis itself (then
    // sums of two, for completeness) decides.
    let mut witness_a = Vec::with_capacity(d);
    for (bi, b) in chosen.iter().enumerate() {
        let mut found = None;
        for s in &chosen {
            if b.lambda_of(ctx, &s.element).unwrap() != 0 {
                found = Some(s.element.clone());
                break;
            }
        }
        if found.is_none() {
            'pairs: for i in 0..d {
                for j in i + 1..d {
                    let mut z = chosen[i].element.clone();
                    vec_axpy(ctx, &mut z, 1, &chosen[j].element);
                    if b.lambda_of(ctx, &z).unwrap() != 0 {
                        found = Some(z);
                        break 'pairs;
                    }
                }
            }
        }
        witness_a.push(found.ok_or_else(|| {
            Error::WitnessSearchExhausted(format!("no nonzero lambda value for basis element {bi}"))
        })?);
    }
    // Witness (b): z ranges over the basis and its pairwise sums; if the
    // quadratic map vanishes on that whole set it vanishes identically, so
    // a clean miss rules the candidate pair out for good.
    let mut zs: Vec<Coords> = chosen.iter().map(|c| c.element.clone()).collect();
    for i in 0..d {
        for j in i + 1..d {
            let mut z = chosen[i].element.clone();
            vec_axpy(ctx, &mut z, 1, &chosen[j].element);
            zs.push(z);
        }
    }
    let mut b1_attempts = Vec::new();
    let mut picked: Option<(usize, Vec<Option<usize>>)> = None;
    for b1 in 0..d {
        let zb1: Vec<Coords> = zs
            .iter()
            .map(|z| g.bracket_raw(z, &chosen[b1].element))
            .collect();
        let per_b: Vec<Option<Option<usize>>> = exec::map_indexed(strategy, d, |bi| {
            if bi == b1 {
                return Some(None);
            }
            for (zi, z) in zs.iter().enumerate() {
                let m = g.bracket_raw(&zb1[zi], &g.bracket_raw(z, &chosen[bi].element));
                if !vec_is_zero(&m) {
                    return Some(Some(zi));
                }
            }
            None
        });
        match per_b.iter().position(|r| r.is_none()) {
            Some(fail) => {
                b1_attempts.push(B1Attempt { candidate: b1, failed_at: Some(fail) });
            }
            None => {
                b1_attempts.push(B1Attempt { candidate: b1, failed_at: None });
                picked = Some((
                    b1,
                    per_b.into_iter().map(|r| r.unwrap()).collect(),
                ));
                break;
            }
        }
    }
    let (b1, z_indices) = picked.ok_or_else(|| {
        Error::WitnessSearchExhausted("no distinguished element admits all bracket witnesses".into())
    })?;
    let witness_b: Vec<Option<Coords>> =
        z_indices.into_iter().map(|zi| zi.map(|zi| zs[zi].clone())).collect();
    Ok(ExtremalBasis { elements: chosen, b1, witness_a, witness_b, b1_attempts })
}

/// Which defining condition of the generic set excluded an element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GenericExclusion {
    /// lambda_{b_i}(x) = 0.
    Lambda(usize),
    /// [[x, b_1], [x, b_i]] = 0.
    Bracket(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenericReport {
    pub in_u: bool,
    pub excluded_by: Option<GenericExclusion>,
}

/// Membership in the generic set: all lambda values nonzero and all double
/// brackets against the distinguished element nonzero. Conditions are
/// evaluated in a fixed order and the first violation is reported.
pub fn is_generic(g: &AlgebraSpec, x: &[Elem], eb: &ExtremalBasis) -> GenericReport {
    let ctx = g.ctx();
    for (i, c) in eb.elements.iter().enumerate() {
        if c.lambda_of(ctx, x).unwrap() == 0 {
            return GenericReport { in_u: false, excluded_by: Some(GenericExclusion::Lambda(i)) };
        }
    }
    let xb1 = g.bracket_raw(x, &eb.elements[eb.b1].element);
    for (i, c) in eb.elements.iter().enumerate() {
        if i == eb.b1 {
            continue;
        }
        let m = g.bracket_raw(&xb1, &g.bracket_raw(x, &c.element));
        if vec_is_zero(&m) {
            return GenericReport { in_u: false, excluded_by: Some(GenericExclusion::Bracket(i)) };
        }
    }
    GenericReport { in_u: true, excluded_by: None }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadrescKind {
    /// f(z) = [[z,x],y] vanishing at two points of a line kills the plane.
    Linear,
    /// g(z) = [[z,x],[z,y]] vanishing at three points of a line kills the
    /// plane.
    Quadratic,
    /// g vanishing on all basis elements and their pairwise sums kills the
    /// whole algebra.
    BasisTotal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuadrescOutcome {
    /// Too few vanishing points to trigger the propagation.
    Vacuous { vanishing_points: usize, required: usize },
    Verified { checked: usize, exhaustive: bool },
}

const QUADRESC_EXHAUSTIVE_LIMIT: u128 = 1 << 20;
const QUADRESC_SAMPLES: usize = 20_000;

/// Vanishing propagation for the two quadratic escape maps. When the
/// hypothesis holds at the sampled scalars, the conclusion is verified by
/// enumeration; a conclusion failure is a hard error.
pub fn quadresc_check(
    g: &AlgebraSpec,
    x: &[Elem],
    y: &[Elem],
    z1: &[Elem],
    z2: &[Elem],
    which: QuadrescKind,
) -> Result<QuadrescOutcome> {
    let ctx = g.ctx();
    let q = ctx.size();
    let f_lin = |z: &[Elem]| g.bracket_raw(&g.bracket_raw(z, x), y);
    let f_quad = |z: &[Elem]| g.bracket_raw(&g.bracket_raw(z, x), &g.bracket_raw(z, y));
    match which {
        QuadrescKind::Linear | QuadrescKind::Quadratic => {
            let required = if which == QuadrescKind::Linear { 2 } else { 3 };
            if (q as usize) < required {
                return Err(Error::BadInput(format!(
                    "field too small for {required} distinct scalars"
                )));
            }
            let eval = |z: &[Elem]| -> Coords {
                if which == QuadrescKind::Linear {
                    f_lin(z)
                } else {
                    f_quad(z)
                }
            };
            let mut vanishing = 0usize;
            for k in 0..q {
                let mut z = z1.to_vec();
                vec_axpy(ctx, &mut z, k, z2);
                if vec_is_zero(&eval(&z)) {
                    vanishing += 1;
                }
            }
            if vanishing < required {
                return Ok(QuadrescOutcome::Vacuous { vanishing_points: vanishing, required });
            }
            let mut checked = 0usize;
            for a in 0..q {
                for b in 0..q {
                    let mut z = vec_scale(ctx, a, z1);
                    vec_axpy(ctx, &mut z, b, z2);
                    if !vec_is_zero(&eval(&z)) {
                        return Err(Error::LemmaViolation(
                            "vanishing failed to propagate to the plane".into(),
                        ));
                    }
                    checked += 1;
                }
            }
            Ok(QuadrescOutcome::Verified { checked, exhaustive: true })
        }
        QuadrescKind::BasisTotal => {
            let d = g.dim();
            let mut points: Vec<Coords> = (0..d).map(|i| g.basis_vec(i)).collect();
            for i in 0..d {
                for j in i + 1..d {
                    let mut z = g.basis_vec(i);
                    z[j] = ctx.add(z[j], 1);
                    points.push(z);
                }
            }
            let required = points.len();
            let vanishing = points.iter().filter(|z| vec_is_zero(&f_quad(z))).count();
            if vanishing < required {
                return Ok(QuadrescOutcome::Vacuous { vanishing_points: vanishing, required });
            }
            let total = (q as u128).saturating_pow(d as u32);
            if total <= QUADRESC_EXHAUSTIVE_LIMIT {
                let mut checked = 0usize;
                for code in 0..total {
                    let z = crate::linalg::decode(ctx, code, d);
                    if !vec_is_zero(&f_quad(&z)) {
                        return Err(Error::LemmaViolation(
                            "vanishing failed to propagate to the whole algebra".into(),
                        ));
                    }
                    checked += 1;
                }
                Ok(QuadrescOutcome::Verified { checked, exhaustive: true })
            } else {
                use rand::{Rng, SeedableRng};
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x9ad4e5c);
                for _ in 0..QUADRESC_SAMPLES {
                    let z: Coords = (0..d).map(|_| rng.gen_range(0..q)).collect();
                    if !vec_is_zero(&f_quad(&z)) {
                        return Err(Error::LemmaViolation(
                            "vanishing failed to propagate to the whole algebra".into(),
                        ));
                    }
                }
                Ok(QuadrescOutcome::Verified { checked: QUADRESC_SAMPLES, exhaustive: false })
            }
        }
    }
}

/// Wire form of one extremal-basis entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub element: Coords,
    pub lambda: Option<Coords>,
    pub sandwich: bool,
    pub witness_a: Coords,
    pub witness_b: Option<WitnessB>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessB {
    pub b1: usize,
    pub z: Coords,
}

impl ExtremalBasis {
    pub fn certificate_records(&self) -> Vec<CertificateRecord> {
        self.elements
            .iter()
            .enumerate()
            .map(|(i, c)| CertificateRecord {
                element: c.element.clone(),
                lambda: c.lambda_row().cloned(),
                sandwich: c.is_sandwich(),
                witness_a: self.witness_a[i].clone(),
                witness_b: self.witness_b[i]
                    .as_ref()
                    .map(|z| WitnessB { b1: self.b1, z: z.clone() }),
            })
            .collect()
    }

    /// JSON-lines dump, one record per basis element.
    pub fn write_jsonl<W: IoWrite>(&self, mut w: W) -> Result<()> {
        for rec in self.certificate_records() {
            serde_json::to_writer(&mut w, &rec)?;
            writeln!(w)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{build_classical, unit_matrix};
    use std::sync::Arc;

    fn classical(ty: LieType, p: u64) -> AlgebraSpec {
        build_classical(ty, Arc::new(FieldCtx::prime(p).unwrap())).unwrap()
    }

    fn coords_of_matrix(g: &AlgebraSpec, mat: &[Elem]) -> Coords {
        g.realization().unwrap().coords_of(g.ctx(), mat).unwrap()
    }

    #[test]
    fn rank_one_unit_is_extremal_with_stated_lambda() {
        let g = classical(LieType::Sl(2), 7);
        let ctx = g.ctx();
        let r = g.realization().unwrap();
        let x = coords_of_matrix(&g, &unit_matrix(2, 1, 2));
        let cert = certify_extremal(&g, x).unwrap();
        let row = cert.lambda_row().unwrap();
        for t in 0..g.dim() {
            // lambda(z) = -2 z_21 on the realization matrices.
            let z21 = r.entry(&r.basis[t], 2, 1);
            assert_eq!(row[t], ctx.mul(ctx.from_int(-2), z21));
        }
        assert!(!cert.is_sandwich());
    }

    #[test]
    fn split_diagonal_is_refuted() {
        let g = classical(LieType::Sl(2), 7);
        let ctx = g.ctx();
        let mut h = vec_zero(4);
        h[0] = 1;
        h[3] = ctx.neg(1);
        let x = coords_of_matrix(&g, &h);
        let cert = certify_extremal(&g, x).unwrap();
        assert!(matches!(cert.outcome, CertOutcome::Refuted { .. }));
    }

    #[test]
    fn heisenberg_center_is_a_sandwich() {
        let ctx = Arc::new(FieldCtx::prime(7).unwrap());
        let g = AlgebraSpec::from_parts(None, ctx, 3, vec![(0, 1, 2, 1), (1, 0, 2, 6)], None)
            .unwrap();
        let cert = certify_extremal(&g, g.basis_vec(2)).unwrap();
        assert!(cert.is_sandwich());
    }

    #[test]
    fn zero_element_rejected() {
        let g = classical(LieType::Sl(2), 7);
        assert!(matches!(
            certify_extremal(&g, vec_zero(3)),
            Err(Error::ZeroElement(_))
        ));
    }

    #[test]
    fn combine_matches_the_worked_example() {
        let g = classical(LieType::Sl(2), 7);
        let ctx = g.ctx();
        let e12 = certify_extremal(&g, coords_of_matrix(&g, &unit_matrix(2, 1, 2))).unwrap();
        let e21 = certify_extremal(&g, coords_of_matrix(&g, &unit_matrix(2, 2, 1))).unwrap();
        assert_eq!(e21.lambda_of(ctx, &e12.element).unwrap(), ctx.from_int(-2));
        let combined = extrbra_combine(&g, &e12, &e21).unwrap();
        // e12 + diag(1,-1) - e21 as a matrix.
        let mut expect = unit_matrix(2, 1, 2);
        expect[0] = 1;
        expect[3] = ctx.neg(1);
        expect[2] = ctx.neg(1);
        assert_eq!(combined.element, coords_of_matrix(&g, &expect));
        // Self-combination collapses to a scalar multiple of the input.
        let self_combined = extrbra_combine(&g, &e12, &e12).unwrap();
        assert_eq!(self_combined.element, e12.element);
    }

    #[test]
    fn identity_trivial_cases_pass() {
        let g = classical(LieType::Sl(2), 7);
        let e12 = certify_extremal(&g, coords_of_matrix(&g, &unit_matrix(2, 1, 2))).unwrap();
        let x = g.basis_vec(0);
        assert!(extremal_identity_check(&g, &x, &x, &e12).unwrap());
        for i in 0..g.dim() {
            for j in 0..g.dim() {
                assert!(extremal_identity_check(
                    &g,
                    &g.basis_vec(i),
                    &g.basis_vec(j),
                    &e12
                )
                .unwrap());
            }
        }
        // A sandwich z reduces both sides to zero brackets.
        let ctx = Arc::new(FieldCtx::prime(7).unwrap());
        let h = AlgebraSpec::from_parts(None, ctx, 3, vec![(0, 1, 2, 1), (1, 0, 2, 6)], None)
            .unwrap();
        let z = certify_extremal(&h, h.basis_vec(2)).unwrap();
        assert!(extremal_identity_check(&h, &h.basis_vec(0), &h.basis_vec(1), &z).unwrap());
    }

    #[test]
    fn explicit_families_span_and_certify() {
        for (ty, p) in [
            (LieType::Sl(3), 7),
            (LieType::Sp(2), 7),
            (LieType::SoOdd(3), 11),
            (LieType::SoEven(4), 11),
        ] {
            let g = classical(ty, p);
            let fams = appendix_extremal_families(&g).unwrap();
            assert_eq!(fams.len(), g.dim(), "{}", ty.label());
            let mut span = SpanBuilder::new(g.dim());
            for c in &fams {
                assert!(c.is_extremal());
                assert!(!c.is_sandwich());
                span.add(g.ctx(), &c.element);
            }
            assert!(span.is_full(), "{} families do not span", ty.label());
        }
    }

    fn check_basis(g: &AlgebraSpec) -> ExtremalBasis {
        let eb = build_extremal_basis(g).unwrap();
        let ctx = g.ctx();
        assert_eq!(eb.elements.len(), g.dim());
        let mut span = SpanBuilder::new(g.dim());
        for (i, c) in eb.elements.iter().enumerate() {
            assert!(c.is_extremal() && !c.is_sandwich());
            span.add(ctx, &c.element);
            assert_ne!(c.lambda_of(ctx, &eb.witness_a[i]).unwrap(), 0);
            match (&eb.witness_b[i], i == eb.b1) {
                (None, true) => {}
                (Some(z), false) => {
                    let m = g.bracket_raw(
                        &g.bracket_raw(z, &eb.elements[eb.b1].element),
                        &g.bracket_raw(z, &c.element),
                    );
                    assert!(!vec_is_zero(&m));
                }
                _ => panic!("witness layout mismatch at {i}"),
            }
        }
        assert!(span.is_full());
        assert_eq!(eb.b1_attempts.last().unwrap().candidate, eb.b1);
        assert!(eb.b1_attempts.last().unwrap().failed_at.is_none());
        eb
    }

    #[test]
    fn bases_for_small_matrix_types() {
        for (ty, p) in [(LieType::Sl(2), 7), (LieType::Sl(3), 7), (LieType::Sp(2), 7)] {
            let g = classical(ty, p);
            check_basis(&g);
        }
    }

    #[test]
    fn basis_for_g2() {
        let g = classical(LieType::G2, 7);
        let eb = check_basis(&g);
        assert_eq!(eb.elements.len(), 14);
    }

    #[test]
    fn generic_set_membership() {
        let g = classical(LieType::Sl(2), 7);
        let eb = check_basis(&g);
        let zero = vec_zero(g.dim());
        let r = is_generic(&g, &zero, &eb);
        assert!(!r.in_u);
        assert_eq!(r.excluded_by, Some(GenericExclusion::Lambda(0)));
        // The distinguished element itself is excluded by its own lambda.
        let r = is_generic(&g, &eb.elements[eb.b1].element.clone(), &eb);
        assert!(!r.in_u);
        // Some element of the small algebra is generic.
        let ctx = g.ctx();
        let total = (ctx.size() as u128).pow(g.dim() as u32);
        let found = (0..total).any(|code| {
            let x = crate::linalg::decode(ctx, code, g.dim());
            is_generic(&g, &x, &eb).in_u
        });
        assert!(found);
    }

    #[test]
    fn quadresc_linear_and_quadratic() {
        let g = classical(LieType::Sl(2), 7);
        let ctx = g.ctx();
        let e12 = coords_of_matrix(&g, &unit_matrix(2, 1, 2));
        let e21 = coords_of_matrix(&g, &unit_matrix(2, 2, 1));
        let mut h = vec_zero(4);
        h[0] = 1;
        h[3] = ctx.neg(1);
        let h = coords_of_matrix(&g, &h);
        // f(z) = [[z, e12], e12] kills both h and e12, hence the plane.
        let out = quadresc_check(&g, &e12, &e12, &h, &e12, QuadrescKind::Linear).unwrap();
        assert_eq!(out, QuadrescOutcome::Verified { checked: 49, exhaustive: true });
        // One vanishing point only: hypothesis vacuous.
        let out = quadresc_check(&g, &e12, &e21, &e21, &h, QuadrescKind::Linear).unwrap();
        assert!(matches!(out, QuadrescOutcome::Vacuous { .. }));
        // g(z) = [[z,x],[z,x]] is identically zero.
        let out = quadresc_check(&g, &e12, &e12, &e21, &h, QuadrescKind::Quadratic).unwrap();
        assert_eq!(out, QuadrescOutcome::Verified { checked: 49, exhaustive: true });
        // x = 0 makes the linear map vanish everywhere.
        let zero = vec_zero(g.dim());
        let out = quadresc_check(&g, &zero, &e21, &e12, &h, QuadrescKind::Linear).unwrap();
        assert!(matches!(out, QuadrescOutcome::Verified { .. }));
    }

    #[test]
    fn quadresc_basis_total() {
        // Abelian toy algebra: the quadratic map is identically zero.
        let ctx = Arc::new(FieldCtx::prime(5).unwrap());
        let g = AlgebraSpec::from_parts(None, ctx, 3, vec![], None).unwrap();
        let x = g.basis_vec(0);
        let y = g.basis_vec(1);
        let out = quadresc_check(&g, &x, &y, &x, &y, QuadrescKind::BasisTotal).unwrap();
        assert!(matches!(out, QuadrescOutcome::Verified { exhaustive: true, .. }));
        // A live quadratic map on sl_2 is reported vacuous.
        let g = classical(LieType::Sl(2), 7);
        let e12 = coords_of_matrix(&g, &unit_matrix(2, 1, 2));
        let e21 = coords_of_matrix(&g, &unit_matrix(2, 2, 1));
        let out = quadresc_check(&g, &e12, &e21, &e12, &e21, QuadrescKind::BasisTotal).unwrap();
        assert!(matches!(out, QuadrescOutcome::Vacuous { .. }));
    }

    #[test]
    fn jsonl_roundtrip() {
        let g = classical(LieType::Sl(2), 7);
        let eb = build_extremal_basis(&g).unwrap();
        let mut buf = Vec::new();
        eb.write_jsonl(&mut buf).unwrap();
        let lines: Vec<CertificateRecord> = String::from_utf8(buf)
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines.iter().filter(|r| r.witness_b.is_none()).count(), 1);
    }
}
