//! Exact arithmetic in GF(p^k) with integer-index element encoding.
//!
//! Elements are encoded as indices in [0, p^k): the index digits in base p,
//! least significant first, are the coefficients of the residue polynomial.
//! Index 0 is the additive identity and index 1 the multiplicative identity.
//! Extension fields use the lexicographically smallest monic irreducible
//! modulus, comparing coefficient sequences low-degree-first, so a context is
//! reproducible from (p, k) alone.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A field element index. Valid values depend on the owning [`FieldCtx`].
pub type Elem = u64;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "FieldCtxRepr", into = "FieldCtxRepr")]
pub struct FieldCtx {
    p: u64,
    k: u32,
    /// Monic modulus, low-degree-first, length k+1. For k = 1 this is x,
    /// i.e. [0, 1].
    modulus: Vec<u64>,
    size: u64,
}

/// Wire form: {"p": .., "k": .., "modulus": [c0, c1, ..., 1]}.
#[derive(Serialize, Deserialize)]
struct FieldCtxRepr {
    p: u64,
    k: u32,
    modulus: Vec<u64>,
}

impl From<FieldCtx> for FieldCtxRepr {
    fn from(ctx: FieldCtx) -> Self {
        FieldCtxRepr { p: ctx.p, k: ctx.k, modulus: ctx.modulus }
    }
}

impl TryFrom<FieldCtxRepr> for FieldCtx {
    type Error = Error;
    fn try_from(r: FieldCtxRepr) -> Result<FieldCtx> {
        FieldCtx::from_parts(r.p, r.k, r.modulus)
    }
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.k == other.k && self.modulus == other.modulus
    }
}
impl Eq for FieldCtx {}

impl FieldCtx {
    /// GF(p), prime field.
    pub fn prime(p: u64) -> Result<FieldCtx> {
        FieldCtx::new(p, 1)
    }

    /// GF(p^k) with the canonical (lexicographically smallest) modulus.
    pub fn new(p: u64, k: u32) -> Result<FieldCtx> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if k == 0 {
            return Err(Error::BadFieldCtx("extension degree must be >= 1".into()));
        }
        let modulus = if k == 1 {
            vec![0, 1]
        } else {
            smallest_irreducible(p, k)
        };
        let size = p.checked_pow(k).ok_or_else(|| Error::BadFieldCtx("p^k overflows u64".into()))?;
        Ok(FieldCtx { p, k, modulus, size })
    }

    /// Rebuild from serialized parts, re-validating primality and
    /// irreducibility. The modulus need not be the canonical one.
    pub fn from_parts(p: u64, k: u32, modulus: Vec<u64>) -> Result<FieldCtx> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if k == 0 || modulus.len() != k as usize + 1 {
            return Err(Error::BadFieldCtx(format!(
                "modulus must have degree k = {k}"
            )));
        }
        if *modulus.last().unwrap() != 1 {
            return Err(Error::BadFieldCtx("modulus must be monic".into()));
        }
        if modulus.iter().any(|&c| c >= p) {
            return Err(Error::BadFieldCtx("modulus coefficients must lie in [0, p)".into()));
        }
        if k > 1 && !is_irreducible(&modulus, p) {
            return Err(Error::NotIrreducible { p });
        }
        let size = p
            .checked_pow(k)
            .ok_or_else(|| Error::BadFieldCtx("p^k overflows u64".into()))?;
        Ok(FieldCtx { p, k, modulus, size })
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn ext_degree(&self) -> u32 {
        self.k
    }
    pub fn size(&self) -> u64 {
        self.size
    }
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        if self.k == 1 {
            let s = a + b;
            if s >= self.p { s - self.p } else { s }
        } else {
            let mut out = 0u64;
            let mut mult = 1u64;
            let (mut a, mut b) = (a, b);
            for _ in 0..self.k {
                let da = a % self.p;
                let db = b % self.p;
                let mut d = da + db;
                if d >= self.p {
                    d -= self.p;
                }
                out += d * mult;
                mult *= self.p;
                a /= self.p;
                b /= self.p;
            }
            out
        }
    }

    pub fn neg(&self, a: Elem) -> Elem {
        if self.k == 1 {
            if a == 0 { 0 } else { self.p - a }
        } else {
            let mut out = 0u64;
            let mut mult = 1u64;
            let mut a = a;
            for _ in 0..self.k {
                let d = a % self.p;
                out += if d == 0 { 0 } else { self.p - d } * mult;
                mult *= self.p;
                a /= self.p;
            }
            out
        }
    }

    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if self.k == 1 {
            (a as u128 * b as u128 % self.p as u128) as u64
        } else {
            let pa = self.decode_poly(a);
            let pb = self.decode_poly(b);
            let prod = poly_mul_mod(&pa, &pb, &self.modulus, self.p);
            self.encode_poly(&prod)
        }
    }

    pub fn pow(&self, a: Elem, mut e: u64) -> Elem {
        let mut base = a;
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: Elem) -> Result<Elem> {
        if a == 0 {
            return Err(Error::ZeroInverse { p: self.p, k: self.k });
        }
        Ok(self.pow(a, self.size - 2))
    }

    /// Embed an integer through the prime subfield.
    pub fn from_int(&self, n: i64) -> Elem {
        let p = self.p as i64;
        (n.rem_euclid(p)) as u64
    }

    /// Sizes p^d for each divisor d of k, ascending.
    pub fn subfield_lattice(&self) -> Vec<u64> {
        (1..=self.k)
            .filter(|d| self.k % d == 0)
            .map(|d| self.p.pow(d))
            .collect()
    }

    /// Whether a lies in the subfield of the given size (a power of p whose
    /// exponent divides k). Uses the fixed-point test a^s = a.
    pub fn in_subfield(&self, a: Elem, subfield_size: u64) -> bool {
        self.pow(a, subfield_size) == a
    }

    fn decode_poly(&self, mut a: Elem) -> Vec<u64> {
        let mut out = vec![0; self.k as usize];
        for c in out.iter_mut() {
            *c = a % self.p;
            a /= self.p;
        }
        out
    }

    fn encode_poly(&self, coeffs: &[u64]) -> Elem {
        let mut out = 0;
        for &c in coeffs.iter().rev() {
            out = out * self.p + c;
        }
        out
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Schoolbook polynomial product reduced by a monic modulus. Coefficient
/// vectors are low-degree-first.
fn poly_mul_mod(a: &[u64], b: &[u64], modulus: &[u64], p: u64) -> Vec<u64> {
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + ai * bj) % p;
        }
    }
    poly_reduce(&mut prod, modulus, p);
    let k = modulus.len() - 1;
    prod.truncate(k);
    prod.resize(k, 0);
    prod
}

/// In-place reduction by a monic modulus.
fn poly_reduce(poly: &mut Vec<u64>, modulus: &[u64], p: u64) {
    let k = modulus.len() - 1;
    while poly.len() > k {
        let lead = *poly.last().unwrap() % p;
        let deg = poly.len() - 1;
        if lead != 0 {
            for (i, &m) in modulus.iter().enumerate().take(k) {
                let idx = deg - k + i;
                let sub = lead * m % p;
                poly[idx] = (poly[idx] + p - sub) % p;
            }
        }
        poly.pop();
    }
    while poly.len() > 1 && *poly.last().unwrap() == 0 {
        poly.pop();
    }
}

/// Polynomial remainder a mod b (b monic), low-degree-first.
fn poly_rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r: Vec<u64> = a.to_vec();
    poly_reduce(&mut r, b, p);
    r
}

fn poly_is_zero(a: &[u64]) -> bool {
    a.iter().all(|&c| c == 0)
}

/// Trial division by every monic polynomial of degree 1..=deg/2.
fn is_irreducible(poly: &[u64], p: u64) -> bool {
    let deg = poly.len() - 1;
    if deg == 1 {
        return true;
    }
    for d in 1..=deg / 2 {
        // Candidate divisors: monic of degree d, coefficients enumerated as
        // base-p digits.
        let count = p.pow(d as u32);
        for idx in 0..count {
            let mut cand = Vec::with_capacity(d + 1);
            let mut v = idx;
            for _ in 0..d {
                cand.push(v % p);
                v /= p;
            }
            cand.push(1);
            if poly_is_zero(&poly_rem(poly, &cand, p)) {
                return false;
            }
        }
    }
    true
}

/// Lexicographically smallest monic irreducible of degree k over GF(p),
/// comparing coefficient sequences (c0, c1, ..., c_{k-1}) elementwise from
/// the constant term up.
fn smallest_irreducible(p: u64, k: u32) -> Vec<u64> {
    let k = k as usize;
    let count = p.pow(k as u32);
    // Enumerate coefficient tuples in lexicographic order with c0 varying
    // slowest: tuple index digits, most significant digit = c0.
    for idx in 0..count {
        let mut coeffs = vec![0u64; k];
        let mut v = idx;
        for i in (0..k).rev() {
            coeffs[i] = v % p;
            v /= p;
        }
        let mut cand = coeffs;
        cand.push(1);
        if is_irreducible(&cand, p) {
            return cand;
        }
    }
    unreachable!("an irreducible polynomial of every degree exists over GF(p)")
}
