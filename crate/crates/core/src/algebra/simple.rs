//! Simplicity testing via the adjoint module.
//!
//! Ideals of the algebra are exactly the submodules of the adjoint module
//! over the enveloping algebra of {ad b_i}. The test picks a singular
//! enveloping element theta, enumerates its whole kernel, and spins each
//! kernel vector; if every spin is full, one spin in the transpose module
//! settles irreducibility:
//!   a proper nonzero ideal S either meets ker theta (so some kernel vector
//!   spins inside S), or theta is injective on S, hence S = theta S is
//!   contained in im theta and ker theta^T lies in the annihilator of S,
//!   whose transpose spin stays proper.
//! Either way a proper spin shows up, so a fully clean pass proves
//! simplicity. Every returned witness is re-verified to be a proper nonzero
//! ideal before it leaves this module.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::FieldCtx;
use crate::linalg::{vec_is_zero, Coords, LinearMap, SpanBuilder, Subspace};
use crate::{Error, Result};

use super::AlgebraSpec;

const MAX_ATTEMPTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplicityVerdict {
    pub simple: bool,
    /// A verified proper nonzero ideal when `simple` is false. Absent only
    /// for dimensions 0 and 1, which have no proper nonzero subspaces.
    pub witness: Option<Subspace>,
    /// Number of enveloping elements tried.
    pub attempts: usize,
}

/// Closure of the span of v under the given linear maps.
fn spin(ctx: &FieldCtx, gens: &[LinearMap], v: &[Coords]) -> Subspace {
    let d = gens.first().map_or(0, |g| g.in_dim());
    let mut builder = SpanBuilder::new(d);
    let mut queue: Vec<Coords> = Vec::new();
    for x in v {
        if builder.add(ctx, x) {
            queue.push(x.clone());
        }
    }
    while let Some(x) = queue.pop() {
        if builder.is_full() {
            break;
        }
        for g in gens {
            let y = g.apply(ctx, &x);
            if builder.add(ctx, &y) {
                queue.push(y);
            }
        }
    }
    builder.into_subspace()
}

/// True when s is a proper nonzero ideal of g.
pub fn verify_ideal(g: &AlgebraSpec, s: &Subspace) -> bool {
    if !s.is_linear() || s.dim() == 0 || s.dim() == g.dim() {
        return false;
    }
    let ctx = g.ctx();
    for row in s.rows() {
        for i in 0..g.dim() {
            if !s.contains(ctx, &g.bracket_raw(&g.basis_vec(i), row)) {
                return false;
            }
        }
    }
    true
}

fn certify(g: &AlgebraSpec, s: Subspace, attempts: usize) -> Result<SimplicityVerdict> {
    if !verify_ideal(g, &s) {
        return Err(Error::LemmaViolation(
            "candidate ideal failed re-verification".into(),
        ));
    }
    Ok(SimplicityVerdict { simple: false, witness: Some(s), attempts })
}

/// Decide simplicity. Deterministic for a fixed seed; `budget` bounds the
/// number of kernel vectors enumerated per enveloping element.
pub fn is_simple(g: &AlgebraSpec, seed: u64, budget: usize) -> Result<SimplicityVerdict> {
    let d = g.dim();
    let ctx = g.ctx();
    if d <= 1 {
        // A zero or one-dimensional algebra is abelian, hence not simple.
        return Ok(SimplicityVerdict { simple: false, witness: None, attempts: 0 });
    }
    // The derived subalgebra is an ideal; if proper it is already a witness,
    // and simple algebras must have it full.
    let mut derived = SpanBuilder::new(d);
    'outer: for i in 0..d {
        for j in 0..d {
            let mut v = crate::linalg::vec_zero(d);
            for &(k, c) in g.basis_bracket(i, j) {
                v[k as usize] = c;
            }
            if derived.add(ctx, &v) && derived.is_full() {
                break 'outer;
            }
        }
    }
    if derived.dim() == 0 {
        return certify(g, Subspace::line(ctx, &g.basis_vec(0)), 0);
    }
    if !derived.is_full() {
        return certify(g, derived.into_subspace(), 0);
    }

    let ads: Vec<LinearMap> = (0..d).map(|i| g.ad_left(i)).collect();
    let ads_t: Vec<LinearMap> = ads.iter().map(|m| m.transpose()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = ctx.size();
    let mut budget_hit = false;
    for attempt in 1..=MAX_ATTEMPTS {
        // Random singular-looking enveloping element: a short sum of short
        // products of the generators.
        let mut theta = LinearMap::zero(d, d);
        let terms = 2 + attempt % 3;
        for _ in 0..terms {
            let len = 1 + rng.gen_range(0..2usize);
            let mut word = ads[rng.gen_range(0..d)].clone();
            for _ in 1..len {
                word = ads[rng.gen_range(0..d)].compose(ctx, &word);
            }
            let coeff = rng.gen_range(1..q);
            theta = theta.add_scaled(ctx, coeff, &word);
        }
        let kernel = theta.kernel(ctx);
        if kernel.dim() == 0 {
            continue;
        }
        let members = match kernel.enumerate_members(ctx, budget) {
            Ok(m) => m,
            Err(Error::BudgetExceeded { .. }) => {
                budget_hit = true;
                continue;
            }
            Err(e) => return Err(e),
        };
        for v in &members {
            if vec_is_zero(v) {
                continue;
            }
            // Scalar multiples spin to the same subspace; keep monic reps.
            if v.iter().find(|&&c| c != 0) != Some(&1) {
                continue;
            }
            let s = spin(ctx, &ads, std::slice::from_ref(v));
            if s.dim() < d {
                return certify(g, s, attempt);
            }
        }
        // All kernel spins are full; one transpose spin decides.
        let w = kernel_vector_of_transpose(ctx, &theta);
        let wspin = spin(ctx, &ads_t, std::slice::from_ref(&w));
        if wspin.dim() < d {
            let perp = LinearMap::linear(wspin.rows().to_vec()).kernel(ctx);
            return certify(g, perp, attempt);
        }
        return Ok(SimplicityVerdict { simple: true, witness: None, attempts: attempt });
    }
    if budget_hit {
        Err(Error::BudgetExceeded { what: "kernel enumeration in the simplicity test".into(), limit: budget })
    } else {
        Err(Error::WitnessSearchExhausted(
            "no singular enveloping element found".into(),
        ))
    }
}

fn kernel_vector_of_transpose(ctx: &FieldCtx, theta: &LinearMap) -> Coords {
    let k = theta.transpose().kernel(ctx);
    // dim ker theta^T = dim ker theta > 0 for square theta.
    k.rows()[0].clone()
}
