//! Multivariate polynomials over F_p in graded-lex order.
//!
//! Text form: terms `c*x1^a1*...*xd^ad` joined by `+`, highest monomial first,
//! every variable written out. The zero polynomial prints as `0`.

use crate::error::{Error, Result};
use crate::field_linalg::{add_mod, all_vectors, check_modulus, mul_mod, neg_mod, pow_mod, FpScalar, FpVector};
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

pub const DEFAULT_DEGREE_CAP: u32 = 8;
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 100_000_000;

/// Exponent vector; ordered by total degree, then lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Monomial(Vec<u8>);

impl Monomial {
    pub fn new(exps: Vec<u8>) -> Self {
        Self(exps)
    }

    pub fn one(d: usize) -> Self {
        Self(vec![0; d])
    }

    pub fn var(d: usize, i: usize) -> Self {
        let mut e = vec![0; d];
        e[i] = 1;
        Self(e)
    }

    pub fn exps(&self) -> &[u8] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn eval(&self, n: &[u64], p: u64) -> u64 {
        self.0
            .iter()
            .zip(n)
            .fold(1, |acc, (&e, &x)| if e == 0 { acc } else { mul_mod(acc, pow_mod(x, e as u64, p), p) })
    }
}

impl Ord for Monomial {
    fn cmp(&self, o: &Self) -> Ordering {
        self.degree().cmp(&o.degree()).then_with(|| self.0.cmp(&o.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// All monomials of exact degree `t` in `d` variables, ascending.
pub fn monomials_of_degree(d: usize, t: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut cur = vec![0u8; d];
    fn rec(i: usize, left: u32, cur: &mut Vec<u8>, out: &mut Vec<Monomial>) {
        if i + 1 == cur.len() {
            cur[i] = left as u8;
            out.push(Monomial(cur.clone()));
            return;
        }
        for e in 0..=left {
            cur[i] = e as u8;
            rec(i + 1, left - e, cur, out);
        }
        cur[i] = 0;
    }
    if d == 0 {
        return out;
    }
    rec(0, t, &mut cur, &mut out);
    out.sort();
    out
}

/// All monomials of degree at most `s`, ascending.
pub fn monomials_up_to(d: usize, s: u32) -> Vec<Monomial> {
    (0..=s).flat_map(|t| monomials_of_degree(d, t)).collect()
}

/// Polynomial with a sorted coefficient map and no stored zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PrimePoly {
    p: u64,
    d: usize,
    terms: BTreeMap<Monomial, u64>,
}

impl PrimePoly {
    pub fn zero(p: u64, d: usize) -> Self {
        Self {
            p,
            d,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(p: u64, d: usize, c: u64) -> Self {
        Self::from_terms(p, d, [(Monomial::one(d), c)])
    }

    pub fn var(p: u64, d: usize, i: usize) -> Self {
        Self::from_terms(p, d, [(Monomial::var(d, i), 1)])
    }

    /// The linear form `n ↦ Σ c_i n_i`.
    pub fn linear_form(p: u64, coeffs: &[u64]) -> Self {
        let d = coeffs.len();
        Self::from_terms(p, d, coeffs.iter().enumerate().map(|(i, &c)| (Monomial::var(d, i), c)))
    }

    pub fn from_terms(p: u64, d: usize, terms: impl IntoIterator<Item = (Monomial, u64)>) -> Self {
        let mut out = Self::zero(p, d);
        for (m, c) in terms {
            assert_eq!(m.0.len(), d, "monomial arity");
            out.add_term(m, c);
        }
        out
    }

    pub fn add_term(&mut self, m: Monomial, c: u64) {
        let c = c % self.p;
        if c == 0 {
            return;
        }
        let p = self.p;
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let e = add_mod(*o.get(), c, p);
                if e == 0 {
                    o.remove();
                } else {
                    *o.get_mut() = e;
                }
            }
        }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn nvars(&self) -> usize {
        self.d
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, u64> {
        &self.terms
    }

    pub fn coeff(&self, m: &Monomial) -> u64 {
        self.terms.get(m).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Maximum degree of a stored term; `None` for the zero polynomial, which has every degree.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(|m| m.degree())
    }

    /// Whether the polynomial may be regarded as having degree at most `s`.
    pub fn has_degree_at_most(&self, s: i64) -> bool {
        match self.degree() {
            None => true,
            Some(t) => (t as i64) <= s,
        }
    }

    pub fn is_homogeneous_of(&self, s: i64) -> bool {
        self.terms.keys().all(|m| m.degree() as i64 == s)
    }

    fn check(&self, o: &Self) {
        assert_eq!(self.p, o.p, "modulus mismatch");
        assert_eq!(self.d, o.d, "arity mismatch");
    }

    pub fn add(&self, o: &Self) -> Self {
        self.check(o);
        let mut out = self.clone();
        for (m, &c) in &o.terms {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        let p = self.p;
        Self {
            p,
            d: self.d,
            terms: self.terms.iter().map(|(m, &c)| (m.clone(), neg_mod(c, p))).collect(),
        }
    }

    pub fn scale(&self, c: u64) -> Self {
        let p = self.p;
        let c = c % p;
        if c == 0 {
            return Self::zero(p, self.d);
        }
        Self {
            p,
            d: self.d,
            terms: self.terms.iter().map(|(m, &x)| (m.clone(), mul_mod(x, c, p))).collect(),
        }
    }

    /// Product, rejecting results above the default degree cap.
    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.mul_with_cap(o, DEFAULT_DEGREE_CAP)
    }

    pub fn mul_with_cap(&self, o: &Self, cap: u32) -> Result<Self> {
        self.check(o);
        let deg = self.degree().unwrap_or(0) + o.degree().unwrap_or(0);
        if !self.is_zero() && !o.is_zero() && deg > cap {
            return Err(Error::Unsupported(format!("product degree {deg} exceeds cap {cap}")));
        }
        let p = self.p;
        let mut acc: BTreeMap<Monomial, u64> = BTreeMap::new();
        for (m1, &c1) in &self.terms {
            for (m2, &c2) in &o.terms {
                let e = acc.entry(m1.mul(m2)).or_insert(0);
                *e = add_mod(*e, mul_mod(c1, c2, p), p);
            }
        }
        acc.retain(|_, c| *c != 0);
        Ok(Self { p, d: self.d, terms: acc })
    }

    pub fn pow(&self, e: u32) -> Result<Self> {
        let mut out = Self::constant(self.p, self.d, 1);
        for _ in 0..e {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// Multiplies by a single monomial with coefficient `c`.
    pub fn mul_monomial(&self, m: &Monomial, c: u64) -> Self {
        let p = self.p;
        let c = c % p;
        if c == 0 {
            return Self::zero(p, self.d);
        }
        Self {
            p,
            d: self.d,
            terms: self.terms.iter().map(|(k, &x)| (k.mul(m), mul_mod(x, c, p))).collect(),
        }
    }

    pub fn homogeneous_component(&self, s: i64) -> HomPoly {
        let poly = Self {
            p: self.p,
            d: self.d,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() as i64 == s)
                .map(|(m, &c)| (m.clone(), c))
                .collect(),
        };
        HomPoly { s, poly }
    }

    pub fn eval(&self, n: &FpVector) -> Result<FpScalar> {
        if n.dim() != self.d {
            return Err(Error::DimensionMismatch(format!("point of length {} for {} variables", n.dim(), self.d)));
        }
        if n.modulus() != self.p {
            return Err(Error::ModulusMismatch(n.modulus(), self.p));
        }
        Ok(FpScalar::raw(self.eval_raw(n.coords()), self.p))
    }

    /// Evaluation at raw residues using per-coordinate power tables.
    pub fn eval_raw(&self, n: &[u64]) -> u64 {
        let p = self.p;
        let maxdeg = self.degree().unwrap_or(0) as usize;
        let pows: Vec<Vec<u64>> = n
            .iter()
            .map(|&x| {
                let mut v = Vec::with_capacity(maxdeg + 1);
                let mut cur = 1 % p;
                for _ in 0..=maxdeg {
                    v.push(cur);
                    cur = mul_mod(cur, x, p);
                }
                v
            })
            .collect();
        let mut acc = 0;
        for (m, &c) in &self.terms {
            let mut t = c;
            for (i, &e) in m.0.iter().enumerate() {
                if e != 0 {
                    t = mul_mod(t, pows[i][e as usize], p);
                }
            }
            acc = add_mod(acc, t, p);
        }
        acc
    }

    /// Composition `t ↦ f(Σ t_j b_j + c)` for a list of direction vectors `b_j`.
    pub fn substitute_affine(&self, dirs: &[FpVector], c: &FpVector) -> Result<PrimePoly> {
        let k = dirs.len();
        let p = self.p;
        let coord_forms: Vec<PrimePoly> = (0..self.d)
            .map(|i| {
                let mut f = PrimePoly::constant(p, k.max(1), c.coords()[i]);
                if k == 0 {
                    return f;
                }
                for (j, b) in dirs.iter().enumerate() {
                    f.add_term(Monomial::var(k, j), b.coords()[i]);
                }
                f
            })
            .collect();
        let kk = k.max(1);
        let mut out = PrimePoly::zero(p, kk);
        for (m, &coef) in &self.terms {
            let mut t = PrimePoly::constant(p, kk, coef);
            for (i, &e) in m.0.iter().enumerate() {
                for _ in 0..e {
                    t = t.mul(&coord_forms[i])?;
                }
            }
            out = out.add(&t);
        }
        Ok(out)
    }

    /// `n ↦ f(n + h)`.
    pub fn shift(&self, h: &FpVector) -> Result<PrimePoly> {
        let dirs: Vec<FpVector> = (0..self.d).map(|i| FpVector::unit(self.p, self.d, i)).collect();
        self.substitute_affine(&dirs, h)
    }

    pub fn to_text(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut parts = Vec::with_capacity(self.terms.len());
        for (m, c) in self.terms.iter().rev() {
            let mut s = c.to_string();
            for (i, e) in m.0.iter().enumerate() {
                s.push_str(&format!("*x{}^{}", i + 1, e));
            }
            parts.push(s);
        }
        parts.join("+")
    }

    /// Parses the text form; omitted variables have exponent 0 and `xi` means `xi^1`.
    pub fn parse(text: &str, p: u64, d: usize) -> Result<Self> {
        check_modulus(p)?;
        let text = text.trim();
        let mut out = Self::zero(p, d);
        if text.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        for term in text.split('+') {
            let term = term.trim();
            if term.is_empty() {
                return Err(Error::Parse(format!("empty term in {text:?}")));
            }
            let mut coef: u64 = 1;
            let mut exps = vec![0u8; d];
            for (idx, factor) in term.split('*').map(str::trim).enumerate() {
                if let Some(rest) = factor.strip_prefix('x') {
                    let (var, exp) = match rest.split_once('^') {
                        Some((v, e)) => (v, e.parse::<u8>().map_err(|e| Error::Parse(format!("{factor}: {e}")))?),
                        None => (rest, 1),
                    };
                    let var: usize = var.parse().map_err(|e| Error::Parse(format!("{factor}: {e}")))?;
                    if var == 0 || var > d {
                        return Err(Error::Parse(format!("variable x{var} outside 1..={d}")));
                    }
                    exps[var - 1] = exps[var - 1]
                        .checked_add(exp)
                        .ok_or_else(|| Error::Parse(format!("exponent overflow in {term}")))?;
                } else if idx == 0 {
                    let c: u128 = factor.parse().map_err(|e| Error::Parse(format!("{factor}: {e}")))?;
                    coef = (c % p as u128) as u64;
                } else {
                    return Err(Error::Parse(format!("unexpected factor {factor:?}")));
                }
            }
            out.add_term(Monomial(exps), coef);
        }
        Ok(out)
    }
}

impl fmt::Display for PrimePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// A homogeneous polynomial of degree `s`; for `s < 0` only zero exists.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HomPoly {
    s: i64,
    poly: PrimePoly,
}

impl HomPoly {
    pub fn new(poly: PrimePoly, s: i64) -> Result<Self> {
        if !poly.is_homogeneous_of(s) {
            return Err(Error::Invalid(format!("polynomial {poly} is not homogeneous of degree {s}")));
        }
        Ok(Self { s, poly })
    }

    pub fn zero(p: u64, d: usize, s: i64) -> Self {
        Self {
            s,
            poly: PrimePoly::zero(p, d),
        }
    }

    pub fn degree(&self) -> i64 {
        self.s
    }

    pub fn poly(&self) -> &PrimePoly {
        &self.poly
    }

    pub fn into_poly(self) -> PrimePoly {
        self.poly
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.s, o.s, "degree mismatch");
        Self {
            s: self.s,
            poly: self.poly.add(&o.poly),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!(self.s, o.s, "degree mismatch");
        Self {
            s: self.s,
            poly: self.poly.sub(&o.poly),
        }
    }

    pub fn scale(&self, c: u64) -> Self {
        Self {
            s: self.s,
            poly: self.poly.scale(c),
        }
    }
}

/// Exact zero set by enumeration of F_p^d in lexicographic order.
pub fn variety(f: &PrimePoly, budget: u128) -> Result<Vec<FpVector>> {
    let (p, d) = (f.p, f.d);
    let required = (p as u128).pow(d as u32);
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    if f.is_zero() {
        return Ok(all_vectors(p, d).collect());
    }
    // Shard by leading coordinate; shards are concatenated in order.
    let shards: Vec<Vec<FpVector>> = (0..p)
        .into_par_iter()
        .map(|lead| {
            let mut out = Vec::new();
            let rest = if d > 1 { d - 1 } else { 0 };
            let inner: Box<dyn Iterator<Item = Vec<u64>>> = if rest == 0 {
                Box::new(std::iter::once(Vec::new()))
            } else {
                Box::new(all_vectors(p, rest).map(|v| v.coords().to_vec()))
            };
            for tail in inner {
                let mut n = Vec::with_capacity(d);
                n.push(lead);
                n.extend(tail);
                if f.eval_raw(&n) == 0 {
                    out.push(FpVector::from_raw(p, n));
                }
            }
            out
        })
        .collect();
    Ok(shards.into_iter().flatten().collect())
}

/// Outcome of a zero test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ZeroVerdict {
    /// Nonzero, with a point where the polynomial does not vanish.
    NonZero { witness: FpVector },
    /// Empty coefficient map.
    ZeroStructural,
    /// Every sampled point vanished; the chance of this for a nonzero input is at most `failure_bound`.
    ZeroSampled { trials: u32, failure_bound: f64 },
}

/// Random-point zero test with failure probability at most `(deg/p)^trials`.
pub fn is_zero_by_sampling(f: &PrimePoly, trials: u32, seed: u64) -> Result<ZeroVerdict> {
    let Some(deg) = f.degree() else {
        return Ok(ZeroVerdict::ZeroStructural);
    };
    if deg as u64 >= f.p {
        return Err(Error::Unsupported(format!("degree {deg} is not below p = {}", f.p)));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    // The canonical point e1 is tried first so linear monomials get a readable witness.
    let mut candidates: Vec<Vec<u64>> = Vec::new();
    let mut e1 = vec![0u64; f.d];
    e1[0] = 1;
    candidates.push(e1);
    for t in 0..trials {
        let n: Vec<u64> = if (t as usize) < candidates.len() {
            candidates[t as usize].clone()
        } else {
            (0..f.d).map(|_| rng.gen_range(0..f.p)).collect()
        };
        if f.eval_raw(&n) != 0 {
            return Ok(ZeroVerdict::NonZero {
                witness: FpVector::from_raw(f.p, n),
            });
        }
    }
    Ok(ZeroVerdict::ZeroSampled {
        trials,
        failure_bound: (deg as f64 / f.p as f64).powi(trials as i32),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive_eval(f: &PrimePoly, n: &[u64]) -> u64 {
        let p = f.modulus();
        let mut acc: u128 = 0;
        for (m, &c) in f.terms() {
            let mut t: u128 = c as u128;
            for (i, &e) in m.exps().iter().enumerate() {
                for _ in 0..e {
                    t = t * n[i] as u128 % p as u128;
                }
            }
            acc = (acc + t) % p as u128;
        }
        acc as u64
    }

    fn arb_poly(p: u64, d: usize, maxdeg: u32) -> impl Strategy<Value = PrimePoly> {
        let mons = monomials_up_to(d, maxdeg);
        let n = mons.len();
        prop::collection::vec((0..n, 0..p), 0..8)
            .prop_map(move |ts| PrimePoly::from_terms(p, d, ts.into_iter().map(|(i, c)| (mons[i].clone(), c))))
    }

    #[test]
    fn graded_lex_order() {
        let m = monomials_of_degree(3, 2);
        assert_eq!(m.len(), 6);
        assert!(Monomial::one(3) < Monomial::var(3, 2));
        assert!(Monomial::var(3, 2) < Monomial::var(3, 0));
        assert!(Monomial::new(vec![2, 0, 0]) > Monomial::new(vec![1, 1, 0]));
        assert_eq!(monomials_up_to(7, 3).len(), 120);
    }

    #[test]
    fn eval_examples() {
        let p = 7;
        let z = PrimePoly::zero(p, 3);
        let n = FpVector::from_i64(p, &[2, 3, 0]).unwrap();
        assert_eq!(z.eval(&n).unwrap().value(), 0);
        let f = PrimePoly::var(p, 3, 0).mul(&PrimePoly::var(p, 3, 1)).unwrap();
        assert_eq!(f.eval(&n).unwrap().value(), 6);
        assert!(f.eval(&FpVector::from_i64(p, &[1, 1]).unwrap()).is_err());
    }

    #[test]
    fn variety_examples() {
        let p = 5;
        assert_eq!(variety(&PrimePoly::zero(p, 2), DEFAULT_ENUMERATION_BUDGET).unwrap().len(), 25);
        assert_eq!(variety(&PrimePoly::var(p, 2, 0), DEFAULT_ENUMERATION_BUDGET).unwrap().len(), 5);
        let f = PrimePoly::parse("1*x1^2+1*x2^2", p, 2).unwrap();
        let v = variety(&f, DEFAULT_ENUMERATION_BUDGET).unwrap();
        // Oracle: direct double loop.
        let mut count = 0;
        for a in 0..p {
            for b in 0..p {
                if (a * a + b * b) % p == 0 {
                    count += 1;
                }
            }
        }
        assert_eq!(count, 9);
        assert_eq!(v.len(), count);
        assert!(matches!(
            variety(&PrimePoly::var(101, 5, 0), 1000),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn sampling_examples() {
        assert_eq!(is_zero_by_sampling(&PrimePoly::zero(11, 3), 5, 0).unwrap(), ZeroVerdict::ZeroStructural);
        let v = is_zero_by_sampling(&PrimePoly::var(11, 3, 0), 5, 0).unwrap();
        assert_eq!(
            v,
            ZeroVerdict::NonZero {
                witness: FpVector::from_i64(11, &[1, 0, 0]).unwrap()
            }
        );
        let big = PrimePoly::var(5, 1, 0).pow(5).unwrap();
        assert!(is_zero_by_sampling(&big, 3, 0).is_err());
        // x^p - x style vanishing is impossible below the degree restriction; a nonzero
        // cubic over p = 11 in 3 variables is caught and the enumeration agrees.
        let f = PrimePoly::parse("3*x1^2*x2^0*x3^1+5*x2^1+7", 11, 3).unwrap();
        match is_zero_by_sampling(&f, 20, 9).unwrap() {
            ZeroVerdict::NonZero { witness } => assert_ne!(f.eval(&witness).unwrap().value(), 0),
            other => panic!("unexpected {other:?}"),
        }
        assert!(variety(&f, DEFAULT_ENUMERATION_BUDGET).unwrap().len() < 1331);
    }

    #[test]
    fn text_roundtrip_and_parse() {
        let p = 7;
        let f = PrimePoly::parse("3*x1^2 + x2 + 5 + 4*x1*x3", p, 3).unwrap();
        let t = f.to_text();
        assert_eq!(t, "3*x1^2*x2^0*x3^0+4*x1^1*x2^0*x3^1+1*x1^0*x2^1*x3^0+5*x1^0*x2^0*x3^0");
        assert_eq!(PrimePoly::parse(&t, p, 3).unwrap(), f);
        assert_eq!(PrimePoly::parse("0", p, 3).unwrap().to_text(), "0");
        assert!(PrimePoly::parse("x4", p, 3).is_err());
        assert!(PrimePoly::parse("2*y", p, 3).is_err());
        assert!(PrimePoly::parse("3+", p, 3).is_err());
    }

    #[test]
    fn homogeneous_conventions() {
        let z = HomPoly::zero(5, 2, -1);
        assert!(z.is_zero());
        assert!(HomPoly::new(PrimePoly::constant(5, 2, 1), -1).is_err());
        assert!(HomPoly::new(PrimePoly::zero(5, 2), 3).is_ok());
        assert!(PrimePoly::zero(5, 2).has_degree_at_most(-4));
    }

    #[test]
    fn shift_and_substitution() {
        let p = 11;
        let f = PrimePoly::parse("1*x1^2+3*x1*x2+2*x3", p, 3).unwrap();
        let h = FpVector::from_i64(p, &[1, 2, 3]).unwrap();
        let g = f.shift(&h).unwrap();
        for n in all_vectors(p, 3).step_by(37) {
            assert_eq!(g.eval(&n).unwrap(), f.eval(&n.add(&h)).unwrap());
        }
        let dirs = vec![FpVector::from_i64(p, &[1, 1, 0]).unwrap()];
        let c = FpVector::from_i64(p, &[0, 0, 4]).unwrap();
        let r = f.substitute_affine(&dirs, &c).unwrap();
        assert_eq!(r.nvars(), 1);
        for t in 0..p {
            let pt = dirs[0].scale(t).add(&c);
            assert_eq!(r.eval_raw(&[t]), f.eval(&pt).unwrap().value());
        }
    }

    #[test]
    fn degree_cap() {
        let x = PrimePoly::var(7, 2, 0);
        assert!(x.pow(8).is_ok());
        assert!(x.pow(9).is_err());
        assert!(x.mul_with_cap(&x, 20).is_ok());
    }

    proptest! {
        #[test]
        fn eval_matches_naive(f in arb_poly(5, 3, 4), n in prop::collection::vec(0u64..5, 3)) {
            prop_assert_eq!(f.eval_raw(&n), naive_eval(&f, &n));
        }

        #[test]
        fn eval_additive(f in arb_poly(5, 3, 3), g in arb_poly(5, 3, 3), n in prop::collection::vec(0u64..5, 3)) {
            prop_assert_eq!(f.add(&g).eval_raw(&n), (f.eval_raw(&n) + g.eval_raw(&n)) % 5);
        }

        #[test]
        fn ring_axioms(a in arb_poly(3, 2, 2), b in arb_poly(3, 2, 2), c in arb_poly(3, 2, 2)) {
            prop_assert_eq!(a.mul(&b).unwrap().mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
            prop_assert_eq!(a.mul(&b.add(&c)).unwrap(), a.mul(&b).unwrap().add(&a.mul(&c).unwrap()));
            prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
            prop_assert!(a.sub(&a).is_zero());
        }

        #[test]
        fn ring_axioms_p7(a in arb_poly(7, 3, 3), b in arb_poly(7, 3, 3), c in arb_poly(7, 3, 2)) {
            prop_assert_eq!(a.mul(&b).unwrap().mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
            prop_assert_eq!(a.add(&b).mul(&c).unwrap(), a.mul(&c).unwrap().add(&b.mul(&c).unwrap()));
        }

        #[test]
        fn homogeneous_decomposition(f in arb_poly(7, 3, 4)) {
            let mut sum = PrimePoly::zero(7, 3);
            for s in 0..=4 {
                sum = sum.add(f.homogeneous_component(s).poly());
            }
            prop_assert_eq!(sum, f);
        }

        #[test]
        fn text_roundtrip(f in arb_poly(11, 4, 5)) {
            let t = f.to_text();
            let g = PrimePoly::parse(&t, 11, 4).unwrap();
            prop_assert_eq!(&g, &f);
            prop_assert_eq!(g.to_text(), t);
        }

        #[test]
        fn zero_set_size_bound(f in arb_poly(7, 3, 3)) {
            // |V(f)| ≤ deg(f)·p^{d−1} for nonzero f.
            if let Some(deg) = f.degree() {
                if deg > 0 {
                    let v = variety(&f, DEFAULT_ENUMERATION_BUDGET).unwrap();
                    prop_assert!(v.len() as u64 <= deg as u64 * 49);
                }
            }
        }
    }
}
