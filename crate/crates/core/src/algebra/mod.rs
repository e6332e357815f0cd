//! Finite-dimensional algebras given by structure constants, with exact
//! bracket evaluation, identity checking, simplicity testing, and the
//! classical constructions (matrix realizations for sl/so/sp, root-system
//! constructions for the exceptional types).

mod chevalley;
mod matrix;
mod simple;

pub use chevalley::{chevalley_integer_algebra, ChevalleyInfo, RootSystem, RootSystemData};
pub use matrix::{mat_commutator, mat_mul, mat_transpose, unit_matrix, MatrixRealization};
pub use simple::{is_simple, verify_ideal, SimplicityVerdict};

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::exec::{self, Strategy};
use crate::field::{Elem, FieldCtx};
use crate::linalg::{vec_is_zero, vec_zero, Coords};
use crate::{Error, Result};

/// Tuple-count threshold at which identity checks switch from exhaustive
/// enumeration to seeded sampling.
pub const IDENTITY_EXHAUSTIVE_LIMIT: u128 = 10_000_000;
/// Number of tuples checked in sampled mode.
pub const IDENTITY_SAMPLES: usize = 200_000;

/// Classical Lie algebra types. The rank parameter n follows the standard
/// naming: sl_n, so_{2n+1}, so_{2n}, sp_{2n}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LieType {
    Sl(usize),
    SoOdd(usize),
    SoEven(usize),
    Sp(usize),
    G2,
    F4,
    E6,
    E7,
    E8,
}

impl LieType {
    /// Expected vector-space dimension.
    pub fn dim(self) -> usize {
        match self {
            LieType::Sl(n) => n * n - 1,
            LieType::SoOdd(n) => (2 * n + 1) * 2 * n / 2,
            LieType::SoEven(n) => 2 * n * (2 * n - 1) / 2,
            LieType::Sp(n) => n * (2 * n + 1),
            LieType::G2 => 14,
            LieType::F4 => 52,
            LieType::E6 => 78,
            LieType::E7 => 133,
            LieType::E8 => 248,
        }
    }

    /// Matrix size of the defining realization (classical types only).
    pub fn matrix_size(self) -> Option<usize> {
        match self {
            LieType::Sl(n) => Some(n),
            LieType::SoOdd(n) => Some(2 * n + 1),
            LieType::SoEven(n) => Some(2 * n),
            LieType::Sp(n) => Some(2 * n),
            _ => None,
        }
    }

    pub fn label(self) -> String {
        match self {
            LieType::Sl(n) => format!("sl{n}"),
            LieType::SoOdd(n) => format!("so{}", 2 * n + 1),
            LieType::SoEven(n) => format!("so{}", 2 * n),
            LieType::Sp(n) => format!("sp{}", 2 * n),
            LieType::G2 => "g2".into(),
            LieType::F4 => "f4".into(),
            LieType::E6 => "e6".into(),
            LieType::E7 => "e7".into(),
            LieType::E8 => "e8".into(),
        }
    }

    pub fn parse_label(s: &str) -> Option<LieType> {
        match s {
            "g2" => return Some(LieType::G2),
            "f4" => return Some(LieType::F4),
            "e6" => return Some(LieType::E6),
            "e7" => return Some(LieType::E7),
            "e8" => return Some(LieType::E8),
            _ => {}
        }
        let (head, num) = s.split_at(2.min(s.len()));
        let n: usize = num.parse().ok()?;
        match head {
            "sl" => Some(LieType::Sl(n)),
            "sp" if n % 2 == 0 => Some(LieType::Sp(n / 2)),
            "so" if n % 2 == 1 => Some(LieType::SoOdd(n / 2)),
            "so" => Some(LieType::SoEven(n / 2)),
            _ => None,
        }
    }

    fn check_rank(self) -> Result<()> {
        let ok = match self {
            LieType::Sl(n) => n >= 2,
            LieType::SoOdd(n) => n >= 1,
            LieType::SoEven(n) => n >= 2,
            LieType::Sp(n) => n >= 2,
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            let (ty, n) = match self {
                LieType::Sl(n) => ("sl", n),
                LieType::SoOdd(n) => ("so_odd", n),
                LieType::SoEven(n) => ("so_even", n),
                LieType::Sp(n) => ("sp", n),
                _ => unreachable!(),
            };
            Err(Error::RankOutOfRange { ty: ty.into(), n })
        }
    }
}

/// An algebra over a finite field, defined by a sparse structure tensor
/// [b_i, b_j] = sum_k c_ijk b_k and compiled per-pair rows for speed.
#[derive(Debug, Clone)]
pub struct AlgebraSpec {
    field: Arc<FieldCtx>,
    dim: usize,
    label: Option<String>,
    /// Canonical sparse entries (i, j, k, c), sorted, c != 0.
    tensor: Vec<(u32, u32, u32, Elem)>,
    /// rows[i * dim + j] = nonzero coordinates of [b_i, b_j].
    rows: Vec<Vec<(u32, Elem)>>,
    realization: Option<MatrixRealization>,
    chevalley: Option<ChevalleyInfo>,
    not_simple_warning: bool,
}

/// Wire form of the algebra file.
#[derive(Serialize, Deserialize)]
struct AlgebraRepr {
    label: Option<String>,
    field: FieldCtx,
    dim: usize,
    tensor: Vec<(u32, u32, u32, Elem)>,
    realization: Option<MatrixRealization>,
}

impl Serialize for AlgebraSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        AlgebraRepr {
            label: self.label.clone(),
            field: (*self.field).clone(),
            dim: self.dim,
            tensor: self.tensor.clone(),
            realization: self.realization.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for AlgebraSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = AlgebraRepr::deserialize(d)?;
        AlgebraSpec::from_parts(
            repr.label,
            Arc::new(repr.field),
            repr.dim,
            repr.tensor,
            repr.realization,
        )
        .map_err(serde::de::Error::custom)
    }
}

impl AlgebraSpec {
    /// Assemble from raw parts, canonicalizing and compiling the tensor.
    pub fn from_parts(
        label: Option<String>,
        field: Arc<FieldCtx>,
        dim: usize,
        tensor: Vec<(u32, u32, u32, Elem)>,
        realization: Option<MatrixRealization>,
    ) -> Result<AlgebraSpec> {
        let d = dim as u32;
        let mut canon: Vec<(u32, u32, u32, Elem)> = Vec::new();
        {
            use std::collections::BTreeMap;
            let mut acc: BTreeMap<(u32, u32, u32), Elem> = BTreeMap::new();
            for &(i, j, k, c) in &tensor {
                if i >= d || j >= d || k >= d {
                    return Err(Error::BadInput(format!(
                        "tensor index out of range in entry ({i},{j},{k})"
                    )));
                }
                if c >= field.size() {
                    return Err(Error::BadInput(format!(
                        "tensor coefficient {c} outside the field"
                    )));
                }
                let e = acc.entry((i, j, k)).or_insert(0);
                *e = field.add(*e, c);
            }
            for ((i, j, k), c) in acc {
                if c != 0 {
                    canon.push((i, j, k, c));
                }
            }
        }
        let mut rows = vec![Vec::new(); dim * dim];
        for &(i, j, k, c) in &canon {
            rows[i as usize * dim + j as usize].push((k, c));
        }
        if let Some(r) = &realization {
            if r.basis.len() != dim {
                return Err(Error::DimMismatch { expected: dim, got: r.basis.len() });
            }
        }
        let not_simple_warning = match label.as_deref().and_then(LieType::parse_label) {
            Some(LieType::Sl(n)) => n as u64 % field.p() == 0,
            _ => false,
        };
        Ok(AlgebraSpec {
            field,
            dim,
            label,
            tensor: canon,
            rows,
            realization,
            chevalley: None,
            not_simple_warning,
        })
    }

    pub fn field(&self) -> &Arc<FieldCtx> {
        &self.field
    }
    pub fn ctx(&self) -> &FieldCtx {
        &self.field
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }
    pub fn tensor(&self) -> &[(u32, u32, u32, Elem)] {
        &self.tensor
    }
    pub fn realization(&self) -> Option<&MatrixRealization> {
        self.realization.as_ref()
    }
    pub fn chevalley(&self) -> Option<&ChevalleyInfo> {
        self.chevalley.as_ref()
    }
    pub fn not_simple_warning(&self) -> bool {
        self.not_simple_warning
    }

    /// Nonzero coordinates of [b_i, b_j].
    pub fn basis_bracket(&self, i: usize, j: usize) -> &[(u32, Elem)] {
        &self.rows[i * self.dim + j]
    }

    /// Bracket of arbitrary coordinate vectors (unchecked dimensions).
    pub fn bracket_raw(&self, x: &[Elem], y: &[Elem]) -> Coords {
        let ctx = &*self.field;
        let mut out = vec_zero(self.dim);
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0 {
                continue;
            }
            let base = i * self.dim;
            for (j, &yj) in y.iter().enumerate() {
                if yj == 0 {
                    continue;
                }
                let coef = ctx.mul(xi, yj);
                for &(k, c) in &self.rows[base + j] {
                    out[k as usize] = ctx.add(out[k as usize], ctx.mul(coef, c));
                }
            }
        }
        out
    }

    /// Bracket with dimension checking (public entry point).
    pub fn bracket(&self, x: &[Elem], y: &[Elem]) -> Result<Coords> {
        if x.len() != self.dim {
            return Err(Error::DimMismatch { expected: self.dim, got: x.len() });
        }
        if y.len() != self.dim {
            return Err(Error::DimMismatch { expected: self.dim, got: y.len() });
        }
        Ok(self.bracket_raw(x, y))
    }

    /// Matrix of x -> [b_i, x] (left multiplication by the i-th basis
    /// element).
    pub fn ad_left(&self, i: usize) -> crate::linalg::LinearMap {
        let mut m = vec![vec_zero(self.dim); self.dim];
        for j in 0..self.dim {
            for &(k, c) in self.basis_bracket(i, j) {
                m[k as usize][j] = c;
            }
        }
        crate::linalg::LinearMap::linear(m)
    }

    /// Matrix of x -> [x, b_i].
    pub fn ad_right(&self, i: usize) -> crate::linalg::LinearMap {
        let mut m = vec![vec_zero(self.dim); self.dim];
        for j in 0..self.dim {
            for &(k, c) in self.basis_bracket(j, i) {
                m[k as usize][j] = c;
            }
        }
        crate::linalg::LinearMap::linear(m)
    }

    /// Standard basis vector as coordinates.
    pub fn basis_vec(&self, i: usize) -> Coords {
        let mut v = vec_zero(self.dim);
        v[i] = 1;
        v
    }

    pub(crate) fn attach_chevalley(&mut self, info: ChevalleyInfo) {
        self.chevalley = Some(info);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityKind {
    Anticommutative,
    Jacobi,
    Malcev,
    Associative,
}

impl IdentityKind {
    pub fn arity(self) -> usize {
        match self {
            IdentityKind::Anticommutative => 2,
            IdentityKind::Jacobi | IdentityKind::Associative => 3,
            IdentityKind::Malcev => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckMode {
    Exhaustive,
    Sampled { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub kind: IdentityKind,
    pub mode: CheckMode,
    /// None = pass; otherwise the smallest violating basis-index tuple in
    /// lexicographic order (among the tuples actually checked).
    pub counterexample: Option<Vec<usize>>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Check a multilinear identity on basis tuples. By multilinearity, passing
/// on all basis tuples implies the identity globally; for anti-commutativity
/// the diagonal [b_i, b_i] = 0 is included, which together with the
/// off-diagonal relation is equivalent to [x, x] = 0 for all x.
pub fn check_identity(g: &AlgebraSpec, kind: IdentityKind, seed: u64) -> IdentityReport {
    check_identity_with(g, kind, seed, Strategy::default())
}

pub fn check_identity_with(
    g: &AlgebraSpec,
    kind: IdentityKind,
    seed: u64,
    strategy: Strategy,
) -> IdentityReport {
    let d = g.dim();
    let arity = kind.arity();
    let total: u128 = (d as u128).pow(arity as u32);
    if total <= IDENTITY_EXHAUSTIVE_LIMIT {
        // Exhaustive, parallel over the leading index; the counterexample is
        // the lexicographically smallest because chunks are scanned in order.
        let per_lead = exec::map_indexed(strategy, d, |lead| {
            let mut tuple = vec![0usize; arity];
            tuple[0] = lead;
            first_violation_rec(g, kind, &mut tuple, 1)
        });
        let counterexample = per_lead.into_iter().flatten().next();
        IdentityReport { kind, mode: CheckMode::Exhaustive, counterexample }
    } else {
        use rand::{Rng, SeedableRng};
        let samples = IDENTITY_SAMPLES;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let tuples: Vec<Vec<usize>> = (0..samples)
            .map(|_| (0..arity).map(|_| rng.gen_range(0..d)).collect())
            .collect();
        let violations = exec::map_indexed(strategy, samples, |s| {
            if identity_holds_on(g, kind, &tuples[s]) {
                None
            } else {
                Some(tuples[s].clone())
            }
        });
        let counterexample = violations.into_iter().flatten().min();
        IdentityReport { kind, mode: CheckMode::Sampled { samples, seed }, counterexample }
    }
}

fn first_violation_rec(
    g: &AlgebraSpec,
    kind: IdentityKind,
    tuple: &mut Vec<usize>,
    pos: usize,
) -> Option<Vec<usize>> {
    if pos == tuple.len() {
        return if identity_holds_on(g, kind, tuple) {
            None
        } else {
            Some(tuple.clone())
        };
    }
    for i in 0..g.dim() {
        tuple[pos] = i;
        if let Some(v) = first_violation_rec(g, kind, tuple, pos + 1) {
            return Some(v);
        }
    }
    None
}

fn identity_holds_on(g: &AlgebraSpec, kind: IdentityKind, t: &[usize]) -> bool {
    let ctx = &**g.field();
    let d = g.dim();
    let bv = |i: usize| g.basis_vec(i);
    match kind {
        IdentityKind::Anticommutative => {
            let (i, j) = (t[0], t[1]);
            let mut acc = vec_zero(d);
            for &(k, c) in g.basis_bracket(i, j) {
                acc[k as usize] = ctx.add(acc[k as usize], c);
            }
            for &(k, c) in g.basis_bracket(j, i) {
                acc[k as usize] = ctx.add(acc[k as usize], c);
            }
            if !vec_is_zero(&acc) {
                return false;
            }
            if i == j && !g.basis_bracket(i, i).is_empty() {
                return false;
            }
            true
        }
        IdentityKind::Jacobi => {
            let (a, b, c) = (bv(t[0]), bv(t[1]), bv(t[2]));
            let mut acc = g.bracket_raw(&g.bracket_raw(&a, &b), &c);
            let t2 = g.bracket_raw(&g.bracket_raw(&b, &c), &a);
            let t3 = g.bracket_raw(&g.bracket_raw(&c, &a), &b);
            for k in 0..d {
                acc[k] = ctx.add(acc[k], ctx.add(t2[k], t3[k]));
            }
            vec_is_zero(&acc)
        }
        IdentityKind::Associative => {
            let (a, b, c) = (bv(t[0]), bv(t[1]), bv(t[2]));
            let lhs = g.bracket_raw(&g.bracket_raw(&a, &b), &c);
            let rhs = g.bracket_raw(&a, &g.bracket_raw(&b, &c));
            lhs == rhs
        }
        IdentityKind::Malcev => {
            // [[[a,b],c],d] + [[[b,c],d],a] + [[[c,d],a],b] + [[[d,a],b],c]
            //   + [[a,c],[d,b]] = 0
            let (a, b, c, dd) = (bv(t[0]), bv(t[1]), bv(t[2]), bv(t[3]));
            let mut acc =
                g.bracket_raw(&g.bracket_raw(&g.bracket_raw(&a, &b), &c), &dd);
            for term in [
                g.bracket_raw(&g.bracket_raw(&g.bracket_raw(&b, &c), &dd), &a),
                g.bracket_raw(&g.bracket_raw(&g.bracket_raw(&c, &dd), &a), &b),
                g.bracket_raw(&g.bracket_raw(&g.bracket_raw(&dd, &a), &b), &c),
                g.bracket_raw(&g.bracket_raw(&a, &c), &g.bracket_raw(&dd, &b)),
            ] {
                for k in 0..d {
                    acc[k] = ctx.add(acc[k], term[k]);
                }
            }
            vec_is_zero(&acc)
        }
    }
}

/// Build a classical or exceptional Lie algebra over the given field.
///
/// Classical types get a matrix realization (trace-zero for sl, the split
/// bilinear forms for so/sp, matching the explicit extremal families
/// downstream); exceptional types are built from their root systems via a
/// Chevalley basis with integer structure constants reduced mod p.
/// Anti-commutativity and Jacobi are verified before returning.
pub fn build_classical(ty: LieType, ctx: Arc<FieldCtx>) -> Result<AlgebraSpec> {
    ty.check_rank()?;
    if ctx.p() == 2 {
        return Err(Error::CharTwo);
    }
    let mut alg = match ty {
        LieType::Sl(_) | LieType::SoOdd(_) | LieType::SoEven(_) | LieType::Sp(_) => {
            matrix::build_matrix_type(ty, ctx)?
        }
        _ => chevalley::build_exceptional(ty, ctx)?,
    };
    if alg.dim() != ty.dim() {
        return Err(Error::BadInput(format!(
            "{} built with dimension {}, expected {}",
            ty.label(),
            alg.dim(),
            ty.dim()
        )));
    }
    alg.label = Some(ty.label());
    alg.not_simple_warning = match ty {
        LieType::Sl(n) => n as u64 % alg.field.p() == 0,
        _ => false,
    };
    for kind in [IdentityKind::Anticommutative, IdentityKind::Jacobi] {
        let report = check_identity(&alg, kind, 0x1d_1e_a1_5e);
        if let Some(t) = report.counterexample {
            return Err(Error::LemmaViolation(format!(
                "{} fails {:?} on basis tuple {:?}",
                ty.label(),
                kind,
                t
            )));
        }
    }
    Ok(alg)
}
