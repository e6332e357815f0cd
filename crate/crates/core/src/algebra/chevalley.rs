//! Root-system construction of the exceptional types g2, f4, e6, e7, e8.
//!
//! Roots are enumerated by height closure from the Cartan matrix. Structure
//! constants are fixed over the integers in a Chevalley basis
//! [e_pos | h_1..h_r | e_neg]: each root of height >= 2 gets its sign pinned
//! on the first decomposition in the root order, and every other constant is
//! forced by the bilinearity identities. The integer tensor is then reduced
//! mod p.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use num::rational::Ratio;
use num::Zero;

use crate::field::{Elem, FieldCtx};
use crate::{Error, Result};

use super::{AlgebraSpec, LieType};

/// Cartan datum: cartan[i][j] = <alpha_i, alpha_j^vee>, and the symmetrizer
/// sym with (alpha_i, alpha_i) = 2 sym[i], making sym[j] * cartan[i][j]
/// symmetric.
#[derive(Debug, Clone)]
pub struct RootSystem {
    pub rank: usize,
    pub cartan: Vec<Vec<i64>>,
    pub sym: Vec<i64>,
}

impl RootSystem {
    pub fn for_type(ty: LieType) -> Option<RootSystem> {
        match ty {
            LieType::G2 => Some(RootSystem {
                rank: 2,
                cartan: vec![vec![2, -1], vec![-3, 2]],
                sym: vec![1, 3],
            }),
            LieType::F4 => Some(RootSystem {
                rank: 4,
                cartan: vec![
                    vec![2, -1, 0, 0],
                    vec![-1, 2, -2, 0],
                    vec![0, -1, 2, -1],
                    vec![0, 0, -1, 2],
                ],
                sym: vec![2, 2, 1, 1],
            }),
            LieType::E6 => Some(Self::simply_laced(6, &[(1, 3), (3, 4), (2, 4), (4, 5), (5, 6)])),
            LieType::E7 => Some(Self::simply_laced(
                7,
                &[(1, 3), (3, 4), (2, 4), (4, 5), (5, 6), (6, 7)],
            )),
            LieType::E8 => Some(Self::simply_laced(
                8,
                &[(1, 3), (3, 4), (2, 4), (4, 5), (5, 6), (6, 7), (7, 8)],
            )),
            _ => None,
        }
    }

    fn simply_laced(rank: usize, edges: &[(usize, usize)]) -> RootSystem {
        let mut cartan = vec![vec![0i64; rank]; rank];
        for i in 0..rank {
            cartan[i][i] = 2;
        }
        for &(a, b) in edges {
            cartan[a - 1][b - 1] = -1;
            cartan[b - 1][a - 1] = -1;
        }
        RootSystem { rank, cartan, sym: vec![1; rank] }
    }
}

/// Enumerated positive roots (as coefficient vectors over the simple roots),
/// sorted by height then lexicographically.
#[derive(Debug, Clone)]
pub struct RootSystemData {
    pub system: RootSystem,
    pub positive: Vec<Vec<i64>>,
    index: HashMap<Vec<i64>, usize>,
}

fn vadd(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn vsub(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn vneg(a: &[i64]) -> Vec<i64> {
    a.iter().map(|x| -x).collect()
}

pub fn height(v: &[i64]) -> i64 {
    v.iter().sum()
}

/// A root vector has all coefficients of one sign; positive means the sign
/// is positive.
fn is_positive_vec(v: &[i64]) -> bool {
    v.iter().any(|&c| c > 0)
}

impl RootSystemData {
    pub fn enumerate(system: RootSystem) -> RootSystemData {
        let r = system.rank;
        let mut known: HashSet<Vec<i64>> = HashSet::new();
        let mut frontier: Vec<Vec<i64>> = Vec::new();
        for i in 0..r {
            let mut v = vec![0i64; r];
            v[i] = 1;
            known.insert(v.clone());
            frontier.push(v);
        }
        // Height-layer closure: beta + alpha_j is a root iff the downward
        // string length through alpha_j exceeds <beta, alpha_j^vee>.
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for beta in &frontier {
                for j in 0..r {
                    let mut alpha = vec![0i64; r];
                    alpha[j] = 1;
                    let mut down = 0i64;
                    loop {
                        let mut cand = beta.clone();
                        cand[j] -= down + 1;
                        if known.contains(&cand) {
                            down += 1;
                        } else {
                            break;
                        }
                    }
                    let pairing: i64 = (0..r).map(|i| beta[i] * system.cartan[i][j]).sum();
                    if down - pairing > 0 {
                        let cand = vadd(beta, &alpha);
                        if known.insert(cand.clone()) {
                            next.push(cand);
                        }
                    }
                }
            }
            frontier = next;
        }
        let mut positive: Vec<Vec<i64>> = known.into_iter().collect();
        positive.sort_by_key(|v| (height(v), v.clone()));
        let index = positive
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i))
            .collect();
        RootSystemData { system, positive, index }
    }

    pub fn num_positive(&self) -> usize {
        self.positive.len()
    }

    pub fn pos_index(&self, v: &[i64]) -> Option<usize> {
        self.index.get(v).copied()
    }

    pub fn is_root(&self, v: &[i64]) -> bool {
        self.index.contains_key(v) || self.index.contains_key(&vneg(v))
    }

    /// <beta, alpha_j^vee>.
    pub fn pairing(&self, beta: &[i64], j: usize) -> i64 {
        (0..self.system.rank)
            .map(|i| beta[i] * self.system.cartan[i][j])
            .sum()
    }

    /// (beta, beta) in the normalization (alpha_i, alpha_i) = 2 sym[i].
    pub fn length_sq(&self, beta: &[i64]) -> i64 {
        let r = self.system.rank;
        let mut acc = 0i64;
        for i in 0..r {
            for j in 0..r {
                acc += beta[i] * beta[j] * self.system.sym[j] * self.system.cartan[i][j];
            }
        }
        acc
    }

    /// Length of the downward alpha-string through beta:
    /// max m >= 0 with beta - m alpha a root.
    pub fn string_down(&self, beta: &[i64], alpha: &[i64]) -> i64 {
        let mut m = 0i64;
        loop {
            let mut cand = beta.to_vec();
            for (c, a) in cand.iter_mut().zip(alpha) {
                *c -= (m + 1) * a;
            }
            if self.is_root(&cand) {
                m += 1;
            } else {
                return m;
            }
        }
    }
}

/// Structure constants N(a, b) on ordered pairs of positive-root indices
/// whose sum is a root. Extended to signed roots by `nval`.
type NTable = HashMap<(usize, usize), i64>;

fn build_ntable(d: &RootSystemData) -> NTable {
    let mut n: NTable = HashMap::new();
    for (gi, gamma) in d.positive.iter().enumerate() {
        if height(gamma) < 2 {
            continue;
        }
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for xi in 0..gi {
            let y = vsub(gamma, &d.positive[xi]);
            if let Some(yi) = d.pos_index(&y) {
                if xi < yi {
                    pairs.push((xi, yi));
                }
            }
        }
        assert!(!pairs.is_empty(), "no decomposition for a non-simple root");
        // Pin the sign on the first decomposition in root order.
        let (ai, bi) = pairs[0];
        let alpha = d.positive[ai].clone();
        let beta = d.positive[bi].clone();
        let p0 = d.string_down(&beta, &alpha);
        n.insert((ai, bi), p0 + 1);
        n.insert((bi, ai), -(p0 + 1));
        // Every other decomposition is forced by the four-term identity on
        // (alpha, beta, -xi, -eta).
        for &(xi, yi) in &pairs[1..] {
            let x = &d.positive[xi];
            let eta = &d.positive[yi];
            let delta = vsub(eta, &alpha);
            let mu = vsub(x, &alpha);
            let mut t: Ratio<i64> = Ratio::zero();
            if let Some(di) = d.pos_index(&delta) {
                t += Ratio::new(
                    -d.length_sq(&delta) * n[&(xi, di)] * n[&(di, ai)],
                    d.length_sq(&beta) * d.length_sq(eta),
                );
            } else {
                debug_assert!(!d.is_root(&delta));
            }
            if let Some(mi) = d.pos_index(&mu) {
                t += Ratio::new(
                    d.length_sq(&mu) * n[&(mi, ai)] * n[&(yi, mi)],
                    d.length_sq(x) * d.length_sq(&beta),
                );
            } else {
                debug_assert!(!d.is_root(&mu));
            }
            let val = Ratio::new(d.length_sq(gamma), n[&(ai, bi)]) * t;
            assert!(val.is_integer(), "non-integral structure constant");
            let v = val.to_integer();
            assert_eq!(
                v.abs(),
                d.string_down(eta, x) + 1,
                "structure constant magnitude off the root string"
            );
            n.insert((xi, yi), v);
            n.insert((yi, xi), -v);
        }
    }
    n
}

/// N(a, b) for signed roots a, b whose sum is a root.
fn nval(d: &RootSystemData, nt: &NTable, a: &[i64], b: &[i64]) -> i64 {
    let v = match (is_positive_vec(a), is_positive_vec(b)) {
        (true, true) => nt[&(d.pos_index(a).unwrap(), d.pos_index(b).unwrap())],
        (false, false) => -nt[&(d.pos_index(&vneg(a)).unwrap(), d.pos_index(&vneg(b)).unwrap())],
        (false, true) => -nval(d, nt, b, a),
        (true, false) => {
            let alpha = a;
            let beta = vneg(b);
            let c = vadd(a, b);
            let val = if let Some(ci) = d.pos_index(&c) {
                Ratio::new(
                    -d.length_sq(&c) * nt[&(d.pos_index(&beta).unwrap(), ci)],
                    d.length_sq(alpha),
                )
            } else {
                let cp = vneg(&c);
                let cpi = d.pos_index(&cp).expect("sum of roots is a root");
                Ratio::new(
                    d.length_sq(&cp) * nt[&(cpi, d.pos_index(alpha).unwrap())],
                    d.length_sq(&beta),
                )
            };
            assert!(val.is_integer(), "non-integral mixed-sign constant");
            val.to_integer()
        }
    };
    debug_assert_eq!(v.abs(), d.string_down(b, a) + 1);
    v
}

/// Integer structure tensor in the basis [e_pos | h_1..h_r | e_neg].
fn integer_tensor(d: &RootSystemData, nt: &NTable) -> Vec<(u32, u32, u32, i64)> {
    let np = d.num_positive();
    let r = d.system.rank;
    let basis_of = |v: &[i64]| -> u32 {
        if is_positive_vec(v) {
            d.pos_index(v).unwrap() as u32
        } else {
            (np + r + d.pos_index(&vneg(v)).unwrap()) as u32
        }
    };
    let mut sroots: Vec<(u32, Vec<i64>)> = Vec::with_capacity(2 * np);
    for (i, v) in d.positive.iter().enumerate() {
        sroots.push((i as u32, v.clone()));
    }
    for (i, v) in d.positive.iter().enumerate() {
        sroots.push(((np + r + i) as u32, vneg(v)));
    }
    let mut out: Vec<(u32, u32, u32, i64)> = Vec::new();
    // [e_a, e_b] for a + b != 0.
    for (ia, va) in &sroots {
        for (ib, vb) in &sroots {
            let sum = vadd(va, vb);
            if sum.iter().all(|&c| c == 0) {
                continue;
            }
            if d.is_root(&sum) {
                out.push((*ia, *ib, basis_of(&sum), nval(d, nt, va, vb)));
            }
        }
    }
    // [e_alpha, e_{-alpha}] = h_alpha = sum_j (a_j sym[j] / d_alpha) h_j.
    for (i, alpha) in d.positive.iter().enumerate() {
        let lsq = d.length_sq(alpha);
        for j in 0..r {
            let c = Ratio::new(2 * alpha[j] * d.system.sym[j], lsq);
            assert!(c.is_integer(), "coroot outside the coroot lattice");
            let c = c.to_integer();
            if c != 0 {
                out.push((i as u32, (np + r + i) as u32, (np + j) as u32, c));
                out.push(((np + r + i) as u32, i as u32, (np + j) as u32, -c));
            }
        }
    }
    // [h_j, e_{+-beta}] = +-<beta, alpha_j^vee> e_{+-beta}.
    for j in 0..r {
        for (i, beta) in d.positive.iter().enumerate() {
            let pr = d.pairing(beta, j);
            if pr == 0 {
                continue;
            }
            let (hj, ep, en) = ((np + j) as u32, i as u32, (np + r + i) as u32);
            out.push((hj, ep, ep, pr));
            out.push((ep, hj, ep, -pr));
            out.push((hj, en, en, -pr));
            out.push((en, hj, en, pr));
        }
    }
    out
}

/// Root-system bookkeeping kept on exceptional algebras: basis index layout
/// and which basis vectors sit on long roots.
#[derive(Debug, Clone)]
pub struct ChevalleyInfo {
    pub rank: usize,
    pub num_positive: usize,
    pub positive: Vec<Vec<i64>>,
    /// Indices into `positive` of the long roots (all of them when the system
    /// is simply laced).
    pub long_positive: Vec<usize>,
    /// Basis indices of e_{+-beta} over all long roots beta.
    pub long_root_basis_indices: Vec<usize>,
}

impl ChevalleyInfo {
    pub fn dim(&self) -> usize {
        2 * self.num_positive + self.rank
    }
    pub fn pos_e(&self, i: usize) -> usize {
        i
    }
    pub fn h_index(&self, j: usize) -> usize {
        self.num_positive + j
    }
    pub fn neg_e(&self, i: usize) -> usize {
        self.num_positive + self.rank + i
    }
    /// Basis index of the root vector on the highest root.
    pub fn highest_root_basis_index(&self) -> usize {
        self.num_positive - 1
    }
}

fn expected_positive(ty: LieType) -> usize {
    match ty {
        LieType::G2 => 6,
        LieType::F4 => 24,
        LieType::E6 => 36,
        LieType::E7 => 63,
        LieType::E8 => 120,
        _ => unreachable!(),
    }
}

/// The integer Chevalley-basis structure tensor together with the root data.
pub fn chevalley_integer_algebra(
    ty: LieType,
) -> Result<(RootSystemData, Vec<(u32, u32, u32, i64)>)> {
    let system = RootSystem::for_type(ty)
        .ok_or_else(|| Error::BadInput(format!("{} has no root-system construction", ty.label())))?;
    let data = RootSystemData::enumerate(system);
    assert_eq!(
        data.num_positive(),
        expected_positive(ty),
        "positive-root count for {}",
        ty.label()
    );
    let nt = build_ntable(&data);
    let tensor = integer_tensor(&data, &nt);
    Ok((data, tensor))
}

/// Build an exceptional algebra over the field by reducing the integer
/// tensor mod p.
pub fn build_exceptional(ty: LieType, ctx: Arc<FieldCtx>) -> Result<AlgebraSpec> {
    let (data, ten) = chevalley_integer_algebra(ty)?;
    let p = ctx.p() as i64;
    let tensor: Vec<(u32, u32, u32, Elem)> = ten
        .iter()
        .map(|&(i, j, k, c)| (i, j, k, c.rem_euclid(p) as Elem))
        .filter(|&(_, _, _, c)| c != 0)
        .collect();
    let np = data.num_positive();
    let r = data.system.rank;
    let mut alg = AlgebraSpec::from_parts(Some(ty.label()), ctx, 2 * np + r, tensor, None)?;
    let max_lsq = (0..np).map(|i| data.length_sq(&data.positive[i])).max().unwrap();
    let long_positive: Vec<usize> = (0..np)
        .filter(|&i| data.length_sq(&data.positive[i]) == max_lsq)
        .collect();
    let long_root_basis_indices: Vec<usize> = long_positive
        .iter()
        .flat_map(|&i| [i, np + r + i])
        .collect();
    alg.attach_chevalley(ChevalleyInfo {
        rank: r,
        num_positive: np,
        positive: data.positive.clone(),
        long_positive,
        long_root_basis_indices,
    });
    Ok(alg)
}
