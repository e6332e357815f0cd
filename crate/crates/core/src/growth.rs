//! Exact growth sets.
//!
//! A^k is the convolution layer sequence
//!   A^k = U_{0<j<k} (A^j + A^{k-j})  u  U_{0<j<k} [A^j, A^{k-j}],
//! computed literally, never as a repeated-closure shortcut. The closure
//! <A> is available separately (`closure_codes`) and is used only where
//! membership in <A> is all that matters.
//!
//! Elements are stored as mixed-radix codes over the field: a bitset over
//! the whole space when |K|^D fits the configured threshold, a sorted code
//! list otherwise. All parallel fan-out merges unions deterministically.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::AlgebraSpec;
use crate::exec::{self, Strategy};
use crate::field::{Elem, FieldCtx};
use crate::linalg::{self, Coords, SpanBuilder};
use crate::{Error, Result};

/// Largest |K|^D stored as a bitset by default.
pub const DEFAULT_BITSET_THRESHOLD: u128 = 1 << 28;
/// Largest |K|^D for which full add/bracket lookup tables are built.
pub const TABLE_THRESHOLD: u128 = 2048;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthConfig {
    pub bitset_threshold: u128,
    /// Per-layer element budget; exceeding it stops growth with a
    /// truncation marker instead of silently degrading.
    pub max_set_elements: usize,
    pub strategy: Strategy,
    /// Forces the sorted-list representation (used to cross-check the two
    /// representations against each other).
    pub force_hash: bool,
}

impl Default for GrowthConfig {
    fn default() -> Self {
        GrowthConfig {
            bitset_threshold: DEFAULT_BITSET_THRESHOLD,
            max_set_elements: 4_000_000,
            strategy: Strategy::default(),
            force_hash: false,
        }
    }
}

struct Tables {
    n: usize,
    add: Vec<u32>,
    bracket: Vec<u32>,
    neg: Vec<u32>,
}

/// Shared per-algebra context for coded set arithmetic.
pub struct Universe {
    algebra: Arc<AlgebraSpec>,
    dim: usize,
    size: Option<u128>,
    tables: Option<Tables>,
}

impl Universe {
    pub fn new(algebra: Arc<AlgebraSpec>) -> Universe {
        let q = algebra.ctx().size() as u128;
        let dim = algebra.dim();
        let size = q.checked_pow(dim as u32);
        let mut u = Universe { algebra, dim, size, tables: None };
        if let Some(n) = u.size {
            if n <= TABLE_THRESHOLD {
                let n = n as usize;
                let vecs: Vec<Coords> = (0..n).map(|c| u.decode(c as u128)).collect();
                let ctx = u.algebra.ctx();
                let mut add = vec![0u32; n * n];
                let mut bracket = vec![0u32; n * n];
                let mut neg = vec![0u32; n];
                for (i, vi) in vecs.iter().enumerate() {
                    neg[i] = linalg::encode(ctx, &linalg::vec_neg(ctx, vi)) as u32;
                    for (j, vj) in vecs.iter().enumerate() {
                        add[i * n + j] = linalg::encode(ctx, &linalg::vec_add(ctx, vi, vj)) as u32;
                        bracket[i * n + j] =
                            linalg::encode(ctx, &u.algebra.bracket_raw(vi, vj)) as u32;
                    }
                }
                u.tables = Some(Tables { n, add, bracket, neg });
            }
        }
        u
    }

    pub fn algebra(&self) -> &Arc<AlgebraSpec> {
        &self.algebra
    }
    pub fn ctx(&self) -> &FieldCtx {
        self.algebra.ctx()
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    /// |K|^D when it fits in u128.
    pub fn size(&self) -> Option<u128> {
        self.size
    }

    pub fn encode(&self, v: &[Elem]) -> u128 {
        linalg::encode(self.ctx(), v)
    }
    pub fn decode(&self, c: u128) -> Coords {
        linalg::decode(self.ctx(), c, self.dim)
    }

    pub fn add(&self, a: u128, b: u128) -> u128 {
        if let Some(t) = &self.tables {
            return t.add[a as usize * t.n + b as usize] as u128;
        }
        self.encode(&linalg::vec_add(self.ctx(), &self.decode(a), &self.decode(b)))
    }

    pub fn bracket(&self, a: u128, b: u128) -> u128 {
        if let Some(t) = &self.tables {
            return t.bracket[a as usize * t.n + b as usize] as u128;
        }
        self.encode(&self.algebra.bracket_raw(&self.decode(a), &self.decode(b)))
    }

    pub fn neg(&self, a: u128) -> u128 {
        if let Some(t) = &self.tables {
            return t.neg[a as usize] as u128;
        }
        self.encode(&linalg::vec_neg(self.ctx(), &self.decode(a)))
    }

    fn empty_set(&self, cfg: &GrowthConfig) -> ElemSet {
        match self.size {
            Some(n) if n <= cfg.bitset_threshold && !cfg.force_hash => {
                ElemSet::bits(n as usize)
            }
            _ => ElemSet::Sorted(Vec::new()),
        }
    }

    /// Encodes, deduplicates and checks symmetry (0 present, closed under
    /// negation).
    pub fn symmetric_set(&self, cfg: &GrowthConfig, elements: &[Coords]) -> Result<ElemSet> {
        let mut s = self.empty_set(cfg);
        for e in elements {
            if e.len() != self.dim {
                return Err(Error::DimMismatch { expected: self.dim, got: e.len() });
            }
            s.insert(self.encode(e));
        }
        if !s.contains(0) {
            return Err(Error::NotSymmetric);
        }
        for c in s.to_vec() {
            if !s.contains(self.neg(c)) {
                return Err(Error::NotSymmetric);
            }
        }
        Ok(s)
    }
}

/// A set of coded elements: dense bitset or sorted code list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ElemSet {
    Bits { words: Vec<u64>, universe: usize, count: usize },
    Sorted(Vec<u128>),
}

impl ElemSet {
    fn bits(universe: usize) -> ElemSet {
        ElemSet::Bits { words: vec![0; universe.div_ceil(64)], universe, count: 0 }
    }

    pub fn len(&self) -> usize {
        match self {
            ElemSet::Bits { count, .. } => *count,
            ElemSet::Sorted(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, c: u128) -> bool {
        match self {
            ElemSet::Bits { words, .. } => {
                let i = c as usize;
                words[i / 64] >> (i % 64) & 1 == 1
            }
            ElemSet::Sorted(v) => v.binary_search(&c).is_ok(),
        }
    }

    pub fn insert(&mut self, c: u128) -> bool {
        match self {
            ElemSet::Bits { words, count, .. } => {
                let i = c as usize;
                let fresh = words[i / 64] >> (i % 64) & 1 == 0;
                if fresh {
                    words[i / 64] |= 1 << (i % 64);
                    *count += 1;
                }
                fresh
            }
            ElemSet::Sorted(v) => match v.binary_search(&c) {
                Ok(_) => false,
                Err(pos) => {
                    v.insert(pos, c);
                    true
                }
            },
        }
    }

    pub fn union_with(&mut self, other: &ElemSet) {
        match (self, other) {
            (ElemSet::Bits { words, count, .. }, ElemSet::Bits { words: ow, .. }) => {
                let mut c = 0usize;
                for (w, o) in words.iter_mut().zip(ow) {
                    *w |= o;
                    c += w.count_ones() as usize;
                }
                *count = c;
            }
            (me, other) => {
                for c in other.to_vec() {
                    me.insert(c);
                }
            }
        }
    }

    /// Ascending code list.
    pub fn to_vec(&self) -> Vec<u128> {
        match self {
            ElemSet::Bits { words, .. } => {
                let mut out = Vec::with_capacity(self.len());
                for (wi, &w) in words.iter().enumerate() {
                    let mut w = w;
                    while w != 0 {
                        let b = w.trailing_zeros() as usize;
                        out.push((wi * 64 + b) as u128);
                        w &= w - 1;
                    }
                }
                out
            }
            ElemSet::Sorted(v) => v.clone(),
        }
    }

    pub fn is_subset_of(&self, other: &ElemSet) -> bool {
        self.to_vec().into_iter().all(|c| other.contains(c))
    }

    pub fn same_elements(&self, other: &ElemSet) -> bool {
        self.len() == other.len() && self.is_subset_of(other)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum OpKind {
    Sum,
    Bracket,
}

/// {op(a, b)} over the product of the two sets, parallel over blocks of the
/// left operand; the union merge is order-independent.
fn pair_op(u: &Universe, cfg: &GrowthConfig, a: &ElemSet, b: &ElemSet, op: OpKind) -> ElemSet {
    let av = a.to_vec();
    let bv = b.to_vec();
    let blocks = exec::map_ranges(cfg.strategy, av.len(), exec::default_tasks(), |range| {
        let mut local = u.empty_set(cfg);
        for &x in &av[range] {
            for &y in &bv {
                let z = match op {
                    OpKind::Sum => u.add(x, y),
                    OpKind::Bracket => u.bracket(x, y),
                };
                local.insert(z);
            }
        }
        local
    });
    let mut out = u.empty_set(cfg);
    for block in blocks {
        out.union_with(&block);
    }
    out
}

/// Layer sequence L_1 c= L_2 c= ... realizing the powers A^k.
pub struct GrowthSet {
    universe: Arc<Universe>,
    config: GrowthConfig,
    layers: Vec<ElemSet>,
    truncated: bool,
}

impl GrowthSet {
    pub fn new(
        universe: Arc<Universe>,
        elements: &[Coords],
        config: GrowthConfig,
    ) -> Result<GrowthSet> {
        let base = universe.symmetric_set(&config, elements)?;
        Ok(GrowthSet { universe, config, layers: vec![base], truncated: false })
    }

    pub fn universe(&self) -> &Arc<Universe> {
        &self.universe
    }
    pub fn config(&self) -> &GrowthConfig {
        &self.config
    }
    /// Highest computed layer index.
    pub fn computed(&self) -> usize {
        self.layers.len()
    }
    /// True when growth stopped at the element budget; the stored layers are
    /// still exact.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn layer(&self, k: usize) -> &ElemSet {
        &self.layers[k - 1]
    }

    pub fn layer_codes(&self, k: usize) -> Vec<u128> {
        self.layer(k).to_vec()
    }

    pub fn layer_elements(&self, k: usize) -> Vec<Coords> {
        self.layer_codes(k).into_iter().map(|c| self.universe.decode(c)).collect()
    }

    /// Computes layers up to k by the literal convolution. Stops early with
    /// the truncation marker when a layer would exceed the element budget.
    pub fn grow_to(&mut self, k: usize) -> Result<()> {
        while self.layers.len() < k {
            if self.truncated {
                return Ok(());
            }
            let m = self.layers.len() + 1;
            if self.layers[m - 2].len() > self.config.max_set_elements {
                self.truncated = true;
                return Ok(());
            }
            let full = self
                .universe
                .size()
                .is_some_and(|n| self.layers[m - 2].len() as u128 == n);
            let next = if full {
                // L_{m-1} is the whole space; L_m c= g and L_m >= L_{m-1}+0.
                self.layers[m - 2].clone()
            } else {
                let mut acc = self.universe.empty_set(&self.config);
                for j in 1..m {
                    if 2 * j <= m {
                        let s = pair_op(
                            &self.universe,
                            &self.config,
                            &self.layers[j - 1],
                            &self.layers[m - j - 1],
                            OpKind::Sum,
                        );
                        acc.union_with(&s);
                    }
                    let b = pair_op(
                        &self.universe,
                        &self.config,
                        &self.layers[j - 1],
                        &self.layers[m - j - 1],
                        OpKind::Bracket,
                    );
                    acc.union_with(&b);
                }
                acc
            };
            debug_assert!(self.layers[m - 2].is_subset_of(&next));
            self.layers.push(next);
        }
        Ok(())
    }
}

pub fn grow_layers(
    universe: Arc<Universe>,
    elements: &[Coords],
    k: usize,
    config: GrowthConfig,
) -> Result<GrowthSet> {
    let mut g = GrowthSet::new(universe, elements, config)?;
    g.grow_to(k)?;
    Ok(g)
}

/// Closure <X> under + and [.,.]. Membership-only shortcut: this is NOT the
/// layer sequence A^k.
pub fn closure_codes(u: &Universe, cfg: &GrowthConfig, start: &ElemSet) -> Result<ElemSet> {
    let mut s = start.clone();
    loop {
        if s.len() > cfg.max_set_elements {
            return Err(Error::BudgetExceeded {
                what: "closure set".into(),
                limit: cfg.max_set_elements,
            });
        }
        let mut next = s.clone();
        next.union_with(&pair_op(u, cfg, &s, &s, OpKind::Sum));
        next.union_with(&pair_op(u, cfg, &s, &s, OpKind::Bracket));
        if next.len() == s.len() {
            return Ok(next);
        }
        s = next;
    }
}

/// F_p digit expansion of a coordinate vector (k digits per coordinate).
fn prime_digits(ctx: &FieldCtx, v: &[Elem]) -> Coords {
    let p = ctx.p();
    let k = ctx.ext_degree() as usize;
    let mut out = Vec::with_capacity(v.len() * k);
    for &c in v {
        let mut c = c;
        for _ in 0..k {
            out.push(c % p);
            c /= p;
        }
    }
    out
}

/// Additive span (span of the set as an abelian group, i.e. the F_p-span).
pub struct PlusSpan {
    prime: FieldCtx,
    ambient: usize,
    builder: SpanBuilder,
}

impl PlusSpan {
    pub fn new(ctx: &FieldCtx, dim: usize) -> Result<PlusSpan> {
        let prime = FieldCtx::prime(ctx.p())?;
        let ambient = dim * ctx.ext_degree() as usize;
        Ok(PlusSpan { prime, ambient, builder: SpanBuilder::new(ambient) })
    }
    pub fn add(&mut self, ctx: &FieldCtx, v: &[Elem]) -> bool {
        self.builder.add(&self.prime, &prime_digits(ctx, v))
    }
    pub fn contains(&self, ctx: &FieldCtx, v: &[Elem]) -> bool {
        self.builder.contains(&self.prime, &prime_digits(ctx, v))
    }
    pub fn dim(&self) -> usize {
        self.builder.dim()
    }
    pub fn is_full(&self) -> bool {
        self.builder.dim() == self.ambient
    }
}

/// <A> = g test without enumerating <A>: close the additive span of A under
/// brackets of its span-extending elements. Bilinearity over Z makes the
/// fixpoint equal span_+(<A>), which is the whole space iff A generates.
pub fn generates(u: &Universe, elements: &[Coords]) -> Result<bool> {
    let ctx = u.ctx();
    let mut span = PlusSpan::new(ctx, u.dim())?;
    let mut kept: Vec<Coords> = Vec::new();
    for e in elements {
        if span.add(ctx, e) {
            kept.push(e.clone());
        }
    }
    let mut frontier = kept.clone();
    while !frontier.is_empty() && !span.is_full() {
        let mut next = Vec::new();
        for f in &frontier {
            for g in &kept {
                for w in [u.algebra.bracket_raw(f, g), u.algebra.bracket_raw(g, f)] {
                    if span.add(ctx, &w) {
                        next.push(w);
                    }
                }
            }
        }
        kept.extend(next.iter().cloned());
        frontier = next;
    }
    Ok(span.is_full())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TowerVariant {
    /// X^{[k]}: brackets only, all split points.
    BracketOnly,
    /// T_k(X) = [T_{k-1}(X), X] u [X, T_{k-1}(X)].
    Towers,
    /// S_k(X,Y) = U_{0<j<k} [S_j, Y^{[k-j]}] u [Y^{[j]}, S_{k-j}].
    AnchoredS,
    /// T_k(X,Y) = [T_{k-1}(X,Y), Y] u [Y, T_{k-1}(X,Y)]
    ///            u [T_{k-1}(Y), X] u [X, T_{k-1}(Y)].
    AnchoredTowers,
}

/// Levels of a bracket-only/tower recursion; level 0 = {0} is implicit in
/// the unions.
pub struct TowerSet {
    universe: Arc<Universe>,
    pub variant: TowerVariant,
    levels: Vec<ElemSet>,
}

impl TowerSet {
    pub fn level(&self, k: usize) -> &ElemSet {
        &self.levels[k - 1]
    }
    pub fn computed(&self) -> usize {
        self.levels.len()
    }
    /// Union of levels 0..=k (level 0 contributes {0}).
    pub fn union_up_to(&self, k: usize, cfg: &GrowthConfig) -> ElemSet {
        let mut out = self.universe.empty_set(cfg);
        out.insert(self.universe.encode(&linalg::vec_zero(self.universe.dim())));
        for l in &self.levels[..k] {
            out.union_with(l);
        }
        out
    }
    pub fn level_elements(&self, k: usize) -> Vec<Coords> {
        self.level(k).to_vec().into_iter().map(|c| self.universe.decode(c)).collect()
    }
}

/// Full enumeration of the tower recursions. The anchored variants take the
/// anchor set as `x` and the ambient set as `y`.
pub fn tower_sets(
    universe: &Arc<Universe>,
    x: &[Coords],
    y: Option<&[Coords]>,
    k: usize,
    variant: TowerVariant,
    cfg: &GrowthConfig,
) -> Result<TowerSet> {
    let enc = |elems: &[Coords]| -> Result<ElemSet> {
        let mut s = universe.empty_set(cfg);
        for e in elems {
            if e.len() != universe.dim() {
                return Err(Error::DimMismatch { expected: universe.dim(), got: e.len() });
            }
            s.insert(universe.encode(e));
        }
        Ok(s)
    };
    let budget_check = |s: &ElemSet| -> Result<()> {
        if s.len() > cfg.max_set_elements {
            Err(Error::BudgetExceeded {
                what: "tower level".into(),
                limit: cfg.max_set_elements,
            })
        } else {
            Ok(())
        }
    };
    let xs = match variant {
        // The defining recursions require a symmetric base for these.
        TowerVariant::BracketOnly | TowerVariant::Towers => {
            universe.symmetric_set(cfg, x)?
        }
        _ => enc(x)?,
    };
    let mut levels: Vec<ElemSet> = vec![xs.clone()];
    match variant {
        TowerVariant::BracketOnly => {
            for m in 2..=k {
                let mut acc = universe.empty_set(cfg);
                for j in 1..m {
                    acc.union_with(&pair_op(
                        universe,
                        cfg,
                        &levels[j - 1],
                        &levels[m - j - 1],
                        OpKind::Bracket,
                    ));
                }
                budget_check(&acc)?;
                levels.push(acc);
            }
        }
        TowerVariant::Towers => {
            for _ in 2..=k {
                let prev = levels.last().unwrap();
                let mut acc = pair_op(universe, cfg, prev, &xs, OpKind::Bracket);
                acc.union_with(&pair_op(universe, cfg, &xs, prev, OpKind::Bracket));
                budget_check(&acc)?;
                levels.push(acc);
            }
        }
        TowerVariant::AnchoredS => {
            let yv = y.ok_or_else(|| Error::BadInput("anchored variant needs Y".into()))?;
            let ybrackets =
                tower_sets(universe, yv, None, k.max(1), TowerVariant::BracketOnly, cfg)?;
            for m in 2..=k {
                let mut acc = universe.empty_set(cfg);
                for j in 1..m {
                    acc.union_with(&pair_op(
                        universe,
                        cfg,
                        &levels[j - 1],
                        ybrackets.level(m - j),
                        OpKind::Bracket,
                    ));
                    acc.union_with(&pair_op(
                        universe,
                        cfg,
                        ybrackets.level(j),
                        &levels[m - j - 1],
                        OpKind::Bracket,
                    ));
                }
                budget_check(&acc)?;
                levels.push(acc);
            }
        }
        TowerVariant::AnchoredTowers => {
            let yv = y.ok_or_else(|| Error::BadInput("anchored variant needs Y".into()))?;
            let ys = universe.symmetric_set(cfg, yv)?;
            let ytowers = tower_sets(universe, yv, None, k.max(1), TowerVariant::Towers, cfg)?;
            for m in 2..=k {
                let prev = levels.last().unwrap();
                let mut acc = pair_op(universe, cfg, prev, &ys, OpKind::Bracket);
                acc.union_with(&pair_op(universe, cfg, &ys, prev, OpKind::Bracket));
                acc.union_with(&pair_op(
                    universe,
                    cfg,
                    ytowers.level(m - 1),
                    &xs,
                    OpKind::Bracket,
                ));
                acc.union_with(&pair_op(
                    universe,
                    cfg,
                    &xs,
                    ytowers.level(m - 1),
                    OpKind::Bracket,
                ));
                budget_check(&acc)?;
                levels.push(acc);
            }
        }
    }
    Ok(TowerSet { universe: universe.clone(), variant, levels })
}

pub struct BracketLayersReport {
    pub tower: TowerSet,
    /// X^k c= span_+(X^{[<=k]}).
    pub eq1_holds: bool,
}

/// Bracket-only levels X^{[<=k]} plus the additive-span containment check
/// against the full layer X^k.
pub fn bracket_layers(a: &mut GrowthSet, k: usize) -> Result<BracketLayersReport> {
    a.grow_to(k)?;
    if a.computed() < k {
        return Err(Error::BudgetExceeded {
            what: "layer growth before the bracket-span check".into(),
            limit: a.config.max_set_elements,
        });
    }
    let base = a.layer_elements(1);
    let tower = tower_sets(
        &a.universe,
        &base,
        None,
        k,
        TowerVariant::BracketOnly,
        &a.config,
    )?;
    let ctx = a.universe.ctx();
    let mut span = PlusSpan::new(ctx, a.universe.dim())?;
    for c in tower.union_up_to(k, &a.config).to_vec() {
        span.add(ctx, &a.universe.decode(c));
    }
    let eq1_holds = a
        .layer_codes(k)
        .into_iter()
        .all(|c| span.contains(ctx, &a.universe.decode(c)));
    Ok(BracketLayersReport { tower, eq1_holds })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OlsonReport {
    pub k: usize,
    /// X^{4k} = <X>.
    pub closed: bool,
    /// 2 |X^{6k}| >= 3 |X^k|.
    pub grew: bool,
    pub size_k: usize,
    pub size_6k: usize,
}

/// The growth dichotomy: at least one horn must hold for every symmetric X.
pub fn olson_dichotomy(a: &mut GrowthSet, k: usize) -> Result<OlsonReport> {
    a.grow_to(6 * k)?;
    if a.computed() < 6 * k {
        return Err(Error::BudgetExceeded {
            what: "layers for the growth dichotomy".into(),
            limit: a.config.max_set_elements,
        });
    }
    let closure = closure_codes(&a.universe, &a.config, a.layer(1))?;
    let closed = a.layer(4 * k).same_elements(&closure);
    let size_k = a.layer(k).len();
    let size_6k = a.layer(6 * k).len();
    let grew = 2 * size_6k >= 3 * size_k;
    if !closed && !grew {
        return Err(Error::LemmaViolation(format!(
            "growth dichotomy failed at k={k}: |X^k|={size_k}, |X^6k|={size_6k}, not closed"
        )));
    }
    Ok(OlsonReport { k, closed, grew, size_k, size_6k })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanStabilization {
    pub k_stable: usize,
    pub dim: usize,
    /// Spans verified constant through this horizon (4 k_stable).
    pub verified_to: usize,
}

/// Least k with span(X^k) = span(X^{k+1}) = ... = span(X^{2k}); the span is
/// then stable forever, which is re-verified out to 4k.
pub fn span_stabilization(a: &mut GrowthSet) -> Result<SpanStabilization> {
    let ctx = a.universe.ctx().clone();
    let dim_of = |a: &GrowthSet, k: usize| -> usize {
        let mut sb = SpanBuilder::new(a.universe.dim());
        for c in a.layer_codes(k) {
            sb.add(&ctx, &a.universe.decode(c));
        }
        sb.dim()
    };
    let mut k = 1;
    loop {
        a.grow_to(4 * k)?;
        if a.computed() < 4 * k {
            return Err(Error::BudgetExceeded {
                what: "layers for span stabilization".into(),
                limit: a.config.max_set_elements,
            });
        }
        // Layer spans are nested, so equal dimensions mean equal spans.
        if dim_of(a, k) == dim_of(a, 2 * k) {
            let d = dim_of(a, k);
            for k2 in k..=4 * k {
                if dim_of(a, k2) != d {
                    return Err(Error::LemmaViolation(format!(
                        "span stabilized at k={k} but moved again at k'={k2}"
                    )));
                }
            }
            return Ok(SpanStabilization { k_stable: k, dim: d, verified_to: 4 * k });
        }
        k += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EscapeMode {
    /// A^{[<=2^{d-1}]}; needs nothing beyond <A> = g.
    General,
    /// T_{<=d}(A); needs turrifiability.
    Turrifiable,
    /// T_{<=d}(v, A^{[<=2^{D-1}]}); needs simplicity.
    AnchoredGeneral,
    /// T_{<=d+D}(v, A); needs simplicity and turrifiability.
    AnchoredTurrifiable,
}

#[derive(Debug, Clone)]
pub struct EscapeReport {
    pub mode: EscapeMode,
    pub d: usize,
    pub span_dim: usize,
    /// min(d, D): the dimension the mode's hypotheses guarantee.
    pub required: usize,
    /// Span-extending elements of the witness set (genuine members of it,
    /// spanning the same space as the whole set).
    pub witness: Vec<Coords>,
}

impl EscapeReport {
    pub fn satisfied(&self) -> bool {
        self.span_dim >= self.required
    }
}

// Span-tracked level engine: keeps only span-extending elements per level.
// By bilinearity, bracketing the kept elements reproduces the exact level
// spans, and every kept element is a genuine member of its level.

fn tracked_bracket(g: &AlgebraSpec, a: &[Coords], b: &[Coords]) -> Vec<Coords> {
    let mut out = Vec::new();
    for x in a {
        for y in b {
            out.push(g.bracket_raw(x, y));
            out.push(g.bracket_raw(y, x));
        }
    }
    out
}

fn keep_spanning(ctx: &FieldCtx, dim: usize, elems: Vec<Coords>) -> Vec<Coords> {
    let mut sb = SpanBuilder::new(dim);
    let mut kept = Vec::new();
    for e in elems {
        if sb.add(ctx, &e) {
            kept.push(e);
        }
    }
    kept
}

fn tracked_bracket_levels(
    g: &AlgebraSpec,
    base: &[Coords],
    k: usize,
    variant: TowerVariant,
    anchor: Option<&[Coords]>,
) -> Vec<Vec<Coords>> {
    let ctx = g.ctx();
    let d = g.dim();
    match variant {
        TowerVariant::BracketOnly => {
            let mut levels: Vec<Vec<Coords>> = vec![keep_spanning(ctx, d, base.to_vec())];
            for m in 2..=k {
                let mut acc = Vec::new();
                for j in 1..m {
                    for x in &levels[j - 1] {
                        for y in &levels[m - j - 1] {
                            acc.push(g.bracket_raw(x, y));
                        }
                    }
                }
                levels.push(keep_spanning(ctx, d, acc));
            }
            levels
        }
        TowerVariant::Towers => {
            let b = keep_spanning(ctx, d, base.to_vec());
            let mut levels = vec![b];
            for _ in 2..=k {
                let prev = levels.last().unwrap().clone();
                let acc = tracked_bracket(g, &prev, levels[0].as_slice());
                levels.push(keep_spanning(ctx, d, acc));
            }
            levels
        }
        TowerVariant::AnchoredTowers => {
            let x = anchor.expect("anchored variant needs an anchor");
            let ylevels = tracked_bracket_levels(g, base, k, TowerVariant::Towers, None);
            let mut levels: Vec<Vec<Coords>> = vec![keep_spanning(ctx, d, x.to_vec())];
            for m in 2..=k {
                let prev = levels.last().unwrap().clone();
                let mut acc = tracked_bracket(g, &prev, &ylevels[0]);
                acc.extend(tracked_bracket(g, &ylevels[m - 2], levels[0].as_slice()));
                levels.push(keep_spanning(ctx, d, acc));
            }
            levels
        }
        TowerVariant::AnchoredS => unreachable!("span escape does not use S_k"),
    }
}

/// Span growth by escape. `elements` must be symmetric with <A> = g;
/// anchored modes take a nonzero v.
pub fn span_escape(
    u: &Universe,
    cfg: &GrowthConfig,
    elements: &[Coords],
    d: usize,
    mode: EscapeMode,
    v: Option<&Coords>,
) -> Result<EscapeReport> {
    let ctx = u.ctx();
    let dim = u.dim();
    u.symmetric_set(cfg, elements)?;
    if !generates(u, elements)? {
        return Err(Error::NotGenerating);
    }
    let g = &**u.algebra();
    let anchor: Option<Vec<Coords>> = match mode {
        EscapeMode::AnchoredGeneral | EscapeMode::AnchoredTurrifiable => {
            let v = v.ok_or_else(|| Error::BadInput("anchored mode needs v".into()))?;
            if linalg::vec_is_zero(v) {
                return Err(Error::ZeroElement("escape anchor".into()));
            }
            Some(vec![v.clone()])
        }
        _ => None,
    };
    let levels = match mode {
        EscapeMode::General => {
            let s = 1usize
                .checked_shl(d.saturating_sub(1) as u32)
                .filter(|&s| s <= 4096)
                .ok_or_else(|| Error::BudgetExceeded {
                    what: "2^{d-1} bracket levels".into(),
                    limit: 4096,
                })?;
            tracked_bracket_levels(g, elements, s, TowerVariant::BracketOnly, None)
        }
        EscapeMode::Turrifiable => {
            tracked_bracket_levels(g, elements, d, TowerVariant::Towers, None)
        }
        EscapeMode::AnchoredGeneral => {
            let s = 1usize
                .checked_shl(dim.saturating_sub(1) as u32)
                .filter(|&s| s <= 4096)
                .ok_or_else(|| Error::BudgetExceeded {
                    what: "2^{D-1} bracket levels".into(),
                    limit: 4096,
                })?;
            let ybase = tracked_bracket_levels(g, elements, s, TowerVariant::BracketOnly, None);
            let mut y: Vec<Coords> = vec![linalg::vec_zero(dim)];
            for l in ybase {
                y.extend(l);
            }
            // The kept union spans span(A^{[<=2^{D-1}]}), and replacing Y by
            // a same-span subset preserves every anchored level span.
            tracked_bracket_levels(
                g,
                &y,
                d,
                TowerVariant::AnchoredTowers,
                Some(anchor.as_ref().unwrap()),
            )
        }
        EscapeMode::AnchoredTurrifiable => tracked_bracket_levels(
            g,
            elements,
            d + dim,
            TowerVariant::AnchoredTowers,
            Some(anchor.as_ref().unwrap()),
        ),
    };
    let mut sb = SpanBuilder::new(dim);
    let mut witness = Vec::new();
    for level in &levels {
        for e in level {
            if sb.add(ctx, e) {
                witness.push(e.clone());
            }
        }
    }
    Ok(EscapeReport {
        mode,
        d,
        span_dim: sb.dim(),
        required: d.min(dim),
        witness,
    })
}

/// S_{<=k}(x, Y) c= span_K(T_{<=k}(x, Y)) check; returns a violating
/// element if any (full enumeration, budget-guarded).
pub fn turrifiability_witness(
    u: &Arc<Universe>,
    x: &Coords,
    y: &[Coords],
    k: usize,
    cfg: &GrowthConfig,
) -> Result<Option<Coords>> {
    let anchor = std::slice::from_ref(x);
    let s = tower_sets(u, anchor, Some(y), k, TowerVariant::AnchoredS, cfg)?;
    let t = tower_sets(u, anchor, Some(y), k, TowerVariant::AnchoredTowers, cfg)?;
    let ctx = u.ctx();
    let mut sb = SpanBuilder::new(u.dim());
    for c in t.union_up_to(k, cfg).to_vec() {
        sb.add(ctx, &u.decode(c));
    }
    for c in s.union_up_to(k, cfg).to_vec() {
        let v = u.decode(c);
        if !sb.contains(ctx, &v) {
            return Ok(Some(v));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum FillTime {
    Filled(usize),
    NotGenerating { stabilized_at: usize, closure_size: usize },
}

/// Least k with A^k = g, or the stabilized proper closure.
pub fn fill_time(a: &mut GrowthSet) -> Result<FillTime> {
    let n = a.universe.size().ok_or_else(|| {
        Error::BadInput("fill time needs an enumerable ambient space".into())
    })?;
    let mut last_change = 1usize;
    let mut m = 1usize;
    loop {
        a.grow_to(m)?;
        if a.computed() < m {
            return Err(Error::BudgetExceeded {
                what: "layers for fill time".into(),
                limit: a.config.max_set_elements,
            });
        }
        let size = a.layer(m).len() as u128;
        if size == n {
            return Ok(FillTime::Filled(m));
        }
        if m > 1 && a.layer(m).len() != a.layer(m - 1).len() {
            last_change = m;
        }
        // L_k = ... = L_{2k} forces L_k = <A>, which is proper here.
        if m >= 2 * last_change {
            return Ok(FillTime::NotGenerating {
                stabilized_at: last_change,
                closure_size: a.layer(m).len(),
            });
        }
        m += 1;
    }
}

#[derive(Debug, Clone)]
pub struct DiameterScan {
    pub max_fill: usize,
    pub argmax: Vec<Coords>,
    pub argmax_index: usize,
    pub generating_members: usize,
    pub family_size: usize,
}

/// Exact maximum of fill_time over the generating members of a finite
/// family. Ties break toward the lexicographically smallest encoded set.
pub fn diameter_lower_bound(
    universe: &Arc<Universe>,
    family: &[Vec<Coords>],
    cfg: &GrowthConfig,
) -> Result<DiameterScan> {
    let per_set: Vec<Result<Option<(usize, Vec<u128>)>>> =
        exec::map_indexed(cfg.strategy, family.len(), |i| {
            let mut g = GrowthSet::new(universe.clone(), &family[i], cfg.clone())?;
            match fill_time(&mut g)? {
                FillTime::Filled(k) => {
                    let mut codes: Vec<u128> =
                        family[i].iter().map(|e| universe.encode(e)).collect();
                    codes.sort_unstable();
                    codes.dedup();
                    Ok(Some((k, codes)))
                }
                FillTime::NotGenerating { .. } => Ok(None),
            }
        });
    let mut best: Option<(usize, Vec<u128>, usize)> = None;
    let mut generating = 0usize;
    for (i, r) in per_set.into_iter().enumerate() {
        if let Some((k, codes)) = r? {
            generating += 1;
            let better = match &best {
                None => true,
                Some((bk, bcodes, _)) => k > *bk || (k == *bk && codes < *bcodes),
            };
            if better {
                best = Some((k, codes, i));
            }
        }
    }
    let (max_fill, _, argmax_index) = best.ok_or(Error::NotGenerating)?;
    Ok(DiameterScan {
        max_fill,
        argmax: family[argmax_index].clone(),
        argmax_index,
        generating_members: generating,
        family_size: family.len(),
    })
}

/// All symmetric sets {0, +-x, +-y} with distinct +- classes, in canonical
/// (code-sorted) order.
pub fn two_pair_family(u: &Universe) -> Vec<Vec<Coords>> {
    let n = u.size().expect("two-pair family needs an enumerable space");
    let mut reps: Vec<u128> = Vec::new();
    for c in 1..n {
        if c <= u.neg(c) {
            reps.push(c);
        }
    }
    let mut out = Vec::new();
    for i in 0..reps.len() {
        for j in i + 1..reps.len() {
            let (x, y) = (reps[i], reps[j]);
            out.push(vec![
                linalg::vec_zero(u.dim()),
                u.decode(x),
                u.decode(u.neg(x)),
                u.decode(y),
                u.decode(u.neg(y)),
            ]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{build_classical, unit_matrix, LieType};

    fn sl2(p: u64) -> Arc<Universe> {
        Arc::new(Universe::new(Arc::new(
            build_classical(LieType::Sl(2), Arc::new(FieldCtx::prime(p).unwrap())).unwrap(),
        )))
    }

    /// {0, +-e12, +-e21} in algebra coordinates.
    fn cross_set(u: &Universe) -> Vec<Coords> {
        let g = u.algebra();
        let ctx = g.ctx();
        let r = g.realization().unwrap();
        let e12 = r.coords_of(ctx, &unit_matrix(2, 1, 2)).unwrap();
        let e21 = r.coords_of(ctx, &unit_matrix(2, 2, 1)).unwrap();
        vec![
            linalg::vec_zero(u.dim()),
            e12.clone(),
            linalg::vec_neg(ctx, &e12),
            e21.clone(),
            linalg::vec_neg(ctx, &e21),
        ]
    }

    fn pair_set(u: &Universe, v: &Coords) -> Vec<Coords> {
        vec![
            linalg::vec_zero(u.dim()),
            v.clone(),
            linalg::vec_neg(u.ctx(), v),
        ]
    }

    fn all_elements(u: &Universe) -> Vec<Coords> {
        (0..u.size().unwrap()).map(|c| u.decode(c)).collect()
    }

    #[test]
    fn zero_set_stays_zero() {
        let u = sl2(5);
        let mut g = GrowthSet::new(
            u.clone(),
            &[linalg::vec_zero(u.dim())],
            GrowthConfig::default(),
        )
        .unwrap();
        g.grow_to(5).unwrap();
        for k in 1..=5 {
            assert_eq!(g.layer_codes(k), vec![0]);
        }
        assert!(matches!(fill_time(&mut g).unwrap(), FillTime::NotGenerating { .. }));
    }

    #[test]
    fn cross_layer_two_has_fifteen_elements() {
        let u = sl2(5);
        let mut g = GrowthSet::new(u.clone(), &cross_set(&u), GrowthConfig::default()).unwrap();
        g.grow_to(2).unwrap();
        assert_eq!(g.layer(1).len(), 5);
        assert_eq!(g.layer(2).len(), 15);
        // +-diag(1,-1) shows up through the bracket.
        let ctx = u.ctx();
        let r = u.algebra().realization().unwrap();
        let mut h = linalg::vec_zero(4);
        h[0] = 1;
        h[3] = ctx.neg(1);
        let h = r.coords_of(ctx, &h).unwrap();
        assert!(g.layer(2).contains(u.encode(&h)));
        assert!(g.layer(2).contains(u.encode(&linalg::vec_neg(ctx, &h))));
    }

    #[test]
    fn full_algebra_is_closed() {
        let u = sl2(5);
        let mut g = GrowthSet::new(u.clone(), &all_elements(&u), GrowthConfig::default()).unwrap();
        g.grow_to(3).unwrap();
        for k in 1..=3 {
            assert_eq!(g.layer(k).len(), 125);
        }
        assert_eq!(fill_time(&mut g).unwrap(), FillTime::Filled(1));
    }

    #[test]
    fn asymmetric_set_rejected() {
        let u = sl2(5);
        let r = u.algebra().realization().unwrap();
        let e12 = r.coords_of(u.ctx(), &unit_matrix(2, 1, 2)).unwrap();
        // Missing 0.
        assert!(matches!(
            GrowthSet::new(u.clone(), &[e12.clone()], GrowthConfig::default()),
            Err(Error::NotSymmetric)
        ));
        // Missing the negation.
        assert!(matches!(
            GrowthSet::new(
                u.clone(),
                &[linalg::vec_zero(u.dim()), e12],
                GrowthConfig::default()
            ),
            Err(Error::NotSymmetric)
        ));
    }

    #[test]
    fn bracket_only_levels_and_eq1() {
        let u = sl2(5);
        let cfg = GrowthConfig::default();
        let r = u.algebra().realization().unwrap();
        let ctx = u.ctx();
        let e12 = r.coords_of(ctx, &unit_matrix(2, 1, 2)).unwrap();
        // X = {0, +-e12}: X^{[2]} = {0}.
        let t = tower_sets(&u, &pair_set(&u, &e12), None, 2, TowerVariant::BracketOnly, &cfg)
            .unwrap();
        assert_eq!(t.level(2).to_vec(), vec![0]);
        // The cross set: X^{[2]} contains +-diag(1,-1), and Eq-style
        // containment of the full layer in the additive bracket span holds.
        let mut g = GrowthSet::new(u.clone(), &cross_set(&u), cfg.clone()).unwrap();
        let report = bracket_layers(&mut g, 4).unwrap();
        assert!(report.eq1_holds);
        let mut h = linalg::vec_zero(4);
        h[0] = 1;
        h[3] = ctx.neg(1);
        let h = r.coords_of(ctx, &h).unwrap();
        assert!(report.tower.level(2).contains(u.encode(&h)));
        // Tower levels sit inside bracket levels sit inside full layers.
        let towers =
            tower_sets(&u, &cross_set(&u), None, 4, TowerVariant::Towers, &cfg).unwrap();
        g.grow_to(4).unwrap();
        for k in 1..=4 {
            assert!(towers.level(k).is_subset_of(report.tower.level(k)));
            assert!(report.tower.level(k).is_subset_of(g.layer(k)));
        }
    }

    #[test]
    fn anchored_s2_expansion() {
        let u = sl2(5);
        let cfg = GrowthConfig::default();
        let ctx = u.ctx();
        let r = u.algebra().realization().unwrap();
        let e12 = r.coords_of(ctx, &unit_matrix(2, 1, 2)).unwrap();
        let e21 = r.coords_of(ctx, &unit_matrix(2, 2, 1)).unwrap();
        let s = tower_sets(
            &u,
            std::slice::from_ref(&e12),
            Some(&pair_set(&u, &e21)),
            2,
            TowerVariant::AnchoredS,
            &cfg,
        )
        .unwrap();
        // S_2(e12, {0, +-e21}) = {0, +-[e12, e21]} = {0, +-diag(1,-1)}.
        let mut h = linalg::vec_zero(4);
        h[0] = 1;
        h[3] = ctx.neg(1);
        let h = r.coords_of(ctx, &h).unwrap();
        let mut expect = vec![0, u.encode(&h), u.encode(&linalg::vec_neg(ctx, &h))];
        expect.sort_unstable();
        assert_eq!(s.level(2).to_vec(), expect);
    }

    #[test]
    fn olson_trivial_and_seeded() {
        let u = sl2(7);
        let cfg = GrowthConfig::default();
        let mut zero =
            GrowthSet::new(u.clone(), &[linalg::vec_zero(u.dim())], cfg.clone()).unwrap();
        let rep = olson_dichotomy(&mut zero, 1).unwrap();
        assert!(rep.closed);
        let mut full = GrowthSet::new(u.clone(), &all_elements(&u), cfg.clone()).unwrap();
        assert!(olson_dichotomy(&mut full, 1).unwrap().closed);
        let mut cross = GrowthSet::new(u.clone(), &cross_set(&u), cfg).unwrap();
        let rep = olson_dichotomy(&mut cross, 1).unwrap();
        assert!(rep.closed || rep.grew);
    }

    #[test]
    fn span_stabilization_examples() {
        let u = sl2(5);
        let cfg = GrowthConfig::default();
        let r = u.algebra().realization().unwrap();
        let e12 = r.coords_of(u.ctx(), &unit_matrix(2, 1, 2)).unwrap();
        // Bracket-degenerate single pair: stable at once with span dim 1.
        let mut thin = GrowthSet::new(u.clone(), &pair_set(&u, &e12), cfg.clone()).unwrap();
        let s = span_stabilization(&mut thin).unwrap();
        assert_eq!((s.k_stable, s.dim), (1, 1));
        let mut cross = GrowthSet::new(u.clone(), &cross_set(&u), cfg).unwrap();
        assert_eq!(span_stabilization(&mut cross).unwrap().dim, 3);
    }

    #[test]
    fn escape_modes_on_sl2() {
        let u = sl2(11);
        let cfg = GrowthConfig::default();
        let a = cross_set(&u);
        let r = u.algebra().realization().unwrap();
        let e12 = r.coords_of(u.ctx(), &unit_matrix(2, 1, 2)).unwrap();
        for (mode, d) in [
            (EscapeMode::General, 3),
            (EscapeMode::Turrifiable, 3),
            (EscapeMode::AnchoredGeneral, 3),
            (EscapeMode::AnchoredTurrifiable, 3),
        ] {
            let v = matches!(mode, EscapeMode::AnchoredGeneral | EscapeMode::AnchoredTurrifiable)
                .then_some(&e12);
            let rep = span_escape(&u, &cfg, &a, d, mode, v).unwrap();
            assert_eq!(rep.span_dim, 3, "{mode:?}");
            assert!(rep.satisfied());
        }
        // Non-generating input is rejected.
        assert!(matches!(
            span_escape(&u, &cfg, &pair_set(&u, &e12), 2, EscapeMode::Turrifiable, None),
            Err(Error::NotGenerating)
        ));
    }

    #[test]
    fn fill_time_cross_matches_closure() {
        let u = sl2(5);
        let cfg = GrowthConfig::default();
        let mut g = GrowthSet::new(u.clone(), &cross_set(&u), cfg.clone()).unwrap();
        let FillTime::Filled(k) = fill_time(&mut g).unwrap() else {
            panic!("cross set generates sl_2");
        };
        assert!(k >= 2);
        // The layer right below k is properly smaller.
        assert!(g.layer(k - 1).len() < 125);
        assert_eq!(g.layer(k).len(), 125);
        assert!(generates(&u, &cross_set(&u)).unwrap());
    }

    #[test]
    fn representations_agree() {
        let u = sl2(5);
        let mut bits = GrowthSet::new(u.clone(), &cross_set(&u), GrowthConfig::default()).unwrap();
        let mut hash = GrowthSet::new(
            u.clone(),
            &cross_set(&u),
            GrowthConfig { force_hash: true, ..GrowthConfig::default() },
        )
        .unwrap();
        bits.grow_to(4).unwrap();
        hash.grow_to(4).unwrap();
        for k in 1..=4 {
            assert!(matches!(bits.layer(k), ElemSet::Bits { .. }));
            assert!(matches!(hash.layer(k), ElemSet::Sorted(_)));
            assert_eq!(bits.layer_codes(k), hash.layer_codes(k));
        }
    }

    #[test]
    fn two_pair_family_size() {
        let u = sl2(5);
        let fam = two_pair_family(&u);
        // 124 nonzero elements, 62 +- classes, 62 * 61 / 2 unordered pairs.
        assert_eq!(fam.len(), 1891);
        for set in fam.iter().take(20) {
            assert_eq!(set.len(), 5);
            u.symmetric_set(&GrowthConfig::default(), set).unwrap();
        }
    }

    #[test]
    fn diameter_on_tiny_families() {
        let u = sl2(5);
        let cfg = GrowthConfig::default();
        let scan = diameter_lower_bound(&u, &[all_elements(&u)], &cfg).unwrap();
        assert_eq!(scan.max_fill, 1);
        // Single-pair sets never generate.
        let r = u.algebra().realization().unwrap();
        let e12 = r.coords_of(u.ctx(), &unit_matrix(2, 1, 2)).unwrap();
        assert!(matches!(
            diameter_lower_bound(&u, &[pair_set(&u, &e12)], &cfg),
            Err(Error::NotGenerating)
        ));
    }

    #[test]
    fn turrifiability_small_case() {
        let u = sl2(5);
        let cfg = GrowthConfig::default();
        let r = u.algebra().realization().unwrap();
        let e12 = r.coords_of(u.ctx(), &unit_matrix(2, 1, 2)).unwrap();
        let v = turrifiability_witness(&u, &e12, &cross_set(&u), 4, &cfg).unwrap();
        assert!(v.is_none(), "Lie algebras are turrifiable, got violation {v:?}");
    }
}
