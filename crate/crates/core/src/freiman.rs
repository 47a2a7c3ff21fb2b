//! Freiman M-homomorphisms and the objects around them: generalized arithmetic
//! progressions, Bohr sets, almost linear functions, super polynomials,
//! locally linear fits and the cocycle equations for shifted M-ideals.

use crate::error::{Error, Result};
use crate::field_linalg::{
    add_mod, from_i64, is_independent_tuple, mul_mod, solve_raw, FpVector, Subspace, TupleItem,
};
use crate::mideal::MIdeal;
use crate::polyring::{monomials_of_degree, HomPoly, Monomial, PrimePoly};
use crate::quadform::{random_nondegenerate, QuadForm};
use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, HashSet};

/// `N(s) = (2s+16)(15s+453)`, the dimension threshold of the linearization theorem.
pub fn dimension_threshold(s: i64) -> i64 {
    (2 * s + 16) * (15 * s + 453)
}

fn check_budget(required: u128, budget: u128) -> Result<()> {
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    Ok(())
}

/// Dense coordinates over the degree-`s` monomials, graded-lex ascending.
#[derive(Clone, Debug)]
pub(crate) struct MonoIndex {
    p: u64,
    d: usize,
    monos: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
}

impl MonoIndex {
    pub(crate) fn new(p: u64, d: usize, s: i64) -> Self {
        let monos = if s < 0 { Vec::new() } else { monomials_of_degree(d, s as u32) };
        let index = monos.iter().cloned().enumerate().map(|(j, m)| (m, j)).collect();
        Self { p, d, monos, index }
    }

    pub(crate) fn len(&self) -> usize {
        self.monos.len()
    }

    pub(crate) fn dense(&self, f: &PrimePoly) -> Vec<u64> {
        let mut v = vec![0u64; self.monos.len()];
        for (m, &c) in f.terms() {
            v[self.index[m]] = c;
        }
        v
    }

    fn sparse(&self, v: &[u64]) -> PrimePoly {
        PrimePoly::from_terms(
            self.p,
            self.d,
            v.iter().enumerate().filter(|(_, &c)| c != 0).map(|(j, &c)| (self.monos[j].clone(), c)),
        )
    }
}

fn apply_rows(rows: &[Vec<u64>], x: &[u64], p: u64) -> Vec<u64> {
    rows.iter()
        .map(|r| r.iter().zip(x).fold(0, |acc, (&a, &b)| add_mod(acc, mul_mod(a, b, p), p)))
        .collect()
}

/// Uniformly random element of `HP_d(s)`.
pub fn random_hom<R: Rng>(p: u64, d: usize, s: i64, rng: &mut R) -> HomPoly {
    if s < 0 {
        return HomPoly::zero(p, d, s);
    }
    let f = PrimePoly::from_terms(p, d, monomials_of_degree(d, s as u32).into_iter().map(|m| (m, rng.gen_range(0..p))));
    HomPoly::new(f, s).expect("homogeneous by construction")
}

/// Uniformly random element of the degree-`s` piece of `ideal`.
pub fn random_member<R: Rng>(ideal: &MIdeal, s: i64, rng: &mut R) -> Result<HomPoly> {
    let (p, d) = (ideal.form().modulus(), ideal.form().dim());
    if s < 0 {
        return Ok(HomPoly::zero(p, d, s));
    }
    let piece = ideal.piece(s as u32)?;
    let mut acc = vec![0u64; piece.monomials().len()];
    for row in piece.rows() {
        let c = rng.gen_range(0..p);
        for (a, &b) in acc.iter_mut().zip(row) {
            *a = add_mod(*a, mul_mod(c, b, p), p);
        }
    }
    HomPoly::new(piece.from_coefficients(&acc), s)
}

/// `L_x(n) = (xA)·n`.
pub fn linear_form(m: &QuadForm, x: &FpVector) -> HomPoly {
    HomPoly::new(m.bilinear_form(x), 1).unwrap_or_else(|_| HomPoly::zero(m.modulus(), m.dim(), 1))
}

fn member_of(m: &QuadForm, hs: &[FpVector], f: &PrimePoly, s: i64) -> Result<bool> {
    if f.is_zero() {
        return Ok(true);
    }
    if s < 0 {
        return Ok(false);
    }
    Ok(MIdeal::of_vectors(m, hs)?.contains(f, s as u32)?.is_member())
}

fn member_of_space(m: &QuadForm, v: &Subspace, f: &PrimePoly, s: i64) -> Result<bool> {
    if f.is_zero() {
        return Ok(true);
    }
    if s < 0 {
        return Ok(false);
    }
    Ok(MIdeal::new(m.clone(), v.clone())?.contains(f, s as u32)?.is_member())
}

// ---------------------------------------------------------------------------
// Generalized arithmetic progressions

/// `P = a + (−L, L)·v`: points `a + Σ ℓ_i v_i` with integer `|ℓ_i| < L_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gap {
    base: FpVector,
    gens: Vec<FpVector>,
    lengths: Vec<Ratio<i64>>,
}

impl Gap {
    pub fn new(base: FpVector, gens: Vec<FpVector>, lengths: Vec<Ratio<i64>>) -> Result<Self> {
        if gens.is_empty() || gens.len() != lengths.len() {
            return Err(Error::DimensionMismatch("need one positive length per generator".into()));
        }
        if gens.iter().any(|v| v.modulus() != base.modulus() || v.dim() != base.dim()) {
            return Err(Error::DimensionMismatch("generators and base disagree on (p, d)".into()));
        }
        if lengths.iter().any(|l| !l.is_positive()) {
            return Err(Error::Invalid("lengths must be positive".into()));
        }
        Ok(Self { base, gens, lengths })
    }

    pub fn homogeneous(gens: Vec<FpVector>, lengths: Vec<Ratio<i64>>) -> Result<Self> {
        let first = gens.first().ok_or_else(|| Error::Invalid("no generators".into()))?;
        let base = FpVector::zero(first.modulus(), first.dim());
        Self::new(base, gens, lengths)
    }

    pub fn base(&self) -> &FpVector {
        &self.base
    }

    pub fn gens(&self) -> &[FpVector] {
        &self.gens
    }

    pub fn lengths(&self) -> &[Ratio<i64>] {
        &self.lengths
    }

    pub fn rank(&self) -> usize {
        self.gens.len()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.base.is_zero()
    }

    /// Largest admissible `|ℓ_i|`, i.e. `⌈L_i⌉ − 1`.
    pub fn radius(&self, i: usize) -> i64 {
        self.lengths[i].ceil().to_integer() - 1
    }

    pub fn tuple_count(&self) -> u128 {
        (0..self.rank()).map(|i| (2 * self.radius(i) + 1) as u128).product()
    }

    pub fn admits(&self, ell: &[i64]) -> bool {
        ell.len() == self.rank() && ell.iter().enumerate().all(|(i, &l)| l.abs() <= self.radius(i))
    }

    /// Coefficient tuples in lexicographic order, each coordinate from `−r_i` to `r_i`.
    pub fn coefficient_tuples(&self) -> Vec<Vec<i64>> {
        let radii: Vec<i64> = (0..self.rank()).map(|i| self.radius(i)).collect();
        let mut out = Vec::with_capacity(self.tuple_count() as usize);
        let mut cur: Vec<i64> = radii.iter().map(|r| -r).collect();
        loop {
            out.push(cur.clone());
            let mut i = cur.len();
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                if cur[i] < radii[i] {
                    cur[i] += 1;
                    break;
                }
                cur[i] = -radii[i];
            }
        }
    }

    pub fn point(&self, ell: &[i64]) -> FpVector {
        let p = self.base.modulus();
        self.gens.iter().zip(ell).fold(self.base.clone(), |acc, (v, &l)| acc.add(&v.scale(from_i64(l, p))))
    }

    /// Points in coefficient-tuple order (with repeats when improper).
    pub fn elements(&self, budget: u128) -> Result<Vec<FpVector>> {
        check_budget(self.tuple_count(), budget)?;
        Ok(self.coefficient_tuples().iter().map(|l| self.point(l)).collect())
    }

    pub fn is_proper(&self, budget: u128) -> Result<bool> {
        let pts = self.elements(budget)?;
        let n = pts.len();
        Ok(pts.into_iter().collect::<HashSet<_>>().len() == n)
    }

    /// Number of distinct points.
    pub fn size(&self, budget: u128) -> Result<u128> {
        Ok(self.elements(budget)?.into_iter().collect::<HashSet<_>>().len() as u128)
    }

    /// `P(c)`: lengths multiplied by `c`.
    pub fn scaled(&self, c: Ratio<i64>) -> Result<Self> {
        if !c.is_positive() {
            return Err(Error::Invalid("scale must be positive".into()));
        }
        Self::new(self.base.clone(), self.gens.clone(), self.lengths.iter().map(|l| l * c).collect())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let g: Self = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::new(g.base, g.gens, g.lengths)
    }
}

/// Random proper homogeneous GAP with linearly independent generators and
/// radii below `p/2`, which makes it proper.
pub fn random_proper_gap<R: Rng>(p: u64, d: usize, rank: usize, max_radius: i64, rng: &mut R) -> Result<Gap> {
    if rank == 0 || rank > d {
        return Err(Error::Invalid(format!("rank {rank} must lie in 1..={d}")));
    }
    let cap = max_radius.min(((p - 1) / 2) as i64).max(0);
    loop {
        let gens: Vec<FpVector> = (0..rank)
            .map(|_| FpVector::from_raw(p, (0..d).map(|_| rng.gen_range(0..p)).collect()))
            .collect();
        if Subspace::span_of(p, d, &gens).dim() != rank {
            continue;
        }
        let lengths = (0..rank)
            .map(|_| {
                let r = rng.gen_range(0..=cap);
                // any L with ⌈L⌉ = r + 1
                Ratio::new(2 * r + 1 + rng.gen_range(0..2i64), 2)
            })
            .collect();
        return Gap::homogeneous(gens, lengths);
    }
}

/// Outcome of rescaling a GAP.
#[derive(Clone, Debug)]
pub struct ScaleReport {
    pub gap: Gap,
    pub size: u128,
    pub base_size: u128,
    /// `|P(c)| ≥ (c/(c+2))^D |P|`, compared exactly.
    pub bound_holds: bool,
    /// `P(c) + P(c') ⊆ P(c+c')` with `c' = min(c, 1 − c)`, at coefficient and point level.
    pub containment_holds: bool,
}

pub fn scale_gap(gap: &Gap, c: Ratio<i64>, budget: u128) -> Result<ScaleReport> {
    if !c.is_positive() || c > Ratio::one() {
        return Err(Error::Invalid(format!("scale {c} outside (0, 1]")));
    }
    let scaled = gap.scaled(c)?;
    let size = scaled.size(budget)?;
    let base_size = gap.size(budget)?;
    let big = |r: Ratio<i64>| BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()));
    let ratio = big(c) / big(c + Ratio::from_integer(2));
    let mut factor = BigRational::one();
    for _ in 0..gap.rank() {
        factor *= &ratio;
    }
    let bound_holds = BigRational::from_integer(BigInt::from(size)) >= factor * BigInt::from(base_size);

    let c2 = if c * 2 <= Ratio::one() { c } else { Ratio::one() - c };
    let containment_holds = if c2.is_zero() {
        true
    } else {
        let other = gap.scaled(c2)?;
        let sum = gap.scaled(c + c2)?;
        let index_ok = (0..gap.rank()).all(|i| scaled.radius(i) + other.radius(i) <= sum.radius(i));
        let pairs = scaled.tuple_count() * other.tuple_count();
        let point_ok = if pairs <= budget {
            let target: HashSet<FpVector> = sum.elements(budget)?.into_iter().collect();
            let a = scaled.elements(budget)?;
            let b = other.elements(budget)?;
            // both are translates by the base point; compare `x + y − a`
            a.iter().all(|x| b.iter().all(|y| target.contains(&x.add(y).sub(gap.base()))))
        } else {
            true
        };
        index_ok && point_ok
    };
    Ok(ScaleReport {
        gap: scaled,
        size,
        base_size,
        bound_holds,
        containment_holds,
    })
}

// ---------------------------------------------------------------------------
// Bohr sets

/// `B(S, ρ) = {h : ‖α·h/p‖ < ρ for all α ∈ S}`, enumerated.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BohrSet {
    p: u64,
    d: usize,
    freqs: Vec<FpVector>,
    rho: Ratio<i64>,
    elements: Vec<FpVector>,
}

fn bohr_member(freqs: &[FpVector], rho: Ratio<i64>, p: u64, h: &FpVector) -> bool {
    freqs.iter().all(|a| {
        let r = a.dot(h);
        let dist = r.min(p - r) as i128;
        dist * (*rho.denom() as i128) < (*rho.numer() as i128) * p as i128
    })
}

pub fn bohr_set(freqs: &[FpVector], rho: Ratio<i64>, p: u64, d: usize, budget: u128) -> Result<BohrSet> {
    if !rho.is_positive() || rho >= Ratio::new(1, 2) {
        return Err(Error::Invalid(format!("radius {rho} outside (0, 1/2)")));
    }
    if freqs.iter().any(|a| a.modulus() != p || a.dim() != d) {
        return Err(Error::DimensionMismatch("frequency outside F_p^d".into()));
    }
    check_budget((p as u128).pow(d as u32), budget)?;
    let elements = crate::field_linalg::all_vectors(p, d).filter(|h| bohr_member(freqs, rho, p, h)).collect();
    Ok(BohrSet {
        p,
        d,
        freqs: freqs.to_vec(),
        rho,
        elements,
    })
}

impl BohrSet {
    pub fn contains(&self, h: &FpVector) -> bool {
        bohr_member(&self.freqs, self.rho, self.p, h)
    }

    pub fn elements(&self) -> &[FpVector] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `|B(S, ρ)| ≥ ρ^{|S|} p^d`, exactly.
    pub fn size_bound_holds(&self) -> bool {
        let rho = BigRational::new(BigInt::from(*self.rho.numer()), BigInt::from(*self.rho.denom()));
        let mut bound = BigRational::from_integer(BigInt::from(self.p).pow(self.d as u32));
        for _ in &self.freqs {
            bound *= &rho;
        }
        BigRational::from_integer(BigInt::from(self.elements.len())) >= bound
    }
}

/// `|{(h1,h2,h3,h4) ∈ H^4 : h1 + h2 − h3 − h4 = h}|` by pair-sum convolution.
pub fn count_r(hs: &[FpVector], h: &FpVector, budget: u128) -> Result<u128> {
    let n = hs.len() as u128;
    check_budget(n * n, budget)?;
    let mut sums: HashMap<FpVector, u128> = HashMap::new();
    for a in hs {
        for b in hs {
            *sums.entry(a.add(b)).or_default() += 1;
        }
    }
    Ok(sums.iter().map(|(x, &c)| c * sums.get(&x.sub(h)).copied().unwrap_or(0)).sum())
}

// ---------------------------------------------------------------------------
// Almost linear functions

/// `ξ'(h) = Σ {α_i·τ(h)} β_i` with `α_i = a_i/p` and `β_i = b_i/p`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlmostLinearFn {
    p: u64,
    d: usize,
    alphas: Vec<Vec<u64>>,
    betas: Vec<i64>,
}

impl AlmostLinearFn {
    /// Terms `(a_i, b_i)` standing for `α_i = a_i/p`, `β_i = b_i/p`.
    pub fn new(p: u64, d: usize, terms: Vec<(Vec<u64>, i64)>) -> Result<Self> {
        if terms.iter().any(|(a, _)| a.len() != d) {
            return Err(Error::DimensionMismatch("frequency of wrong length".into()));
        }
        let (alphas, betas) = terms.into_iter().map(|(a, b)| (a.into_iter().map(|x| x % p).collect(), b)).unzip();
        Ok(Self { p, d, alphas, betas })
    }

    pub fn complexity(&self) -> usize {
        self.alphas.len()
    }

    /// Exact value of `ξ'(h)` before reduction mod 1; rejected unless it lies in `(1/p)Z`.
    pub fn eval_exact(&self, h: &FpVector) -> Result<Ratio<i128>> {
        let p = self.p as i128;
        let num: i128 = self
            .alphas
            .iter()
            .zip(&self.betas)
            .map(|(a, &b)| {
                let r = a.iter().zip(h.coords()).fold(0u64, |acc, (&x, &y)| add_mod(acc, mul_mod(x, y, self.p), self.p));
                r as i128 * b as i128
            })
            .sum();
        let v = Ratio::new(num, p * p);
        if p % v.denom() != 0 {
            return Err(Error::Invalid(format!("value {v} at {h} is not in Z/p")));
        }
        Ok(v)
    }

    /// The field-valued version `ι(p·ξ'(h))`.
    pub fn eval_field(&self, h: &FpVector) -> Result<u64> {
        let v = self.eval_exact(h)?;
        let p = self.p as i128;
        let n = (v * p).to_integer();
        Ok(n.rem_euclid(p) as u64)
    }

    /// First quadruple with `h1 + h2 = h3 + h4` and `ξ'(h1) + ξ'(h2) − ξ'(h3) − ξ'(h4) ∉ Z`.
    pub fn freiman_violation(&self, hs: &[FpVector], budget: u128) -> Result<Option<[usize; 4]>> {
        let n = hs.len() as u128;
        check_budget(n * n * n, budget)?;
        let vals: Vec<Ratio<i128>> = hs.iter().map(|h| self.eval_exact(h)).collect::<Result<_>>()?;
        let pos: HashMap<&FpVector, usize> = hs.iter().enumerate().map(|(i, h)| (h, i)).collect();
        for i in 0..hs.len() {
            for j in 0..hs.len() {
                let s = hs[i].add(&hs[j]);
                for k in 0..hs.len() {
                    if let Some(&l) = pos.get(&s.sub(&hs[k])) {
                        if !(vals[i] + vals[j] - vals[k] - vals[l]).is_integer() {
                            return Ok(Some([i, j, k, l]));
                        }
                    }
                }
            }
        }
        Ok(None)
    }
}

// ---------------------------------------------------------------------------
// Super polynomials

/// Multi-indices `i ∈ N^k` with `|i| ≤ s`, ascending.
pub fn multi_indices(k: usize, s: i64) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    if s < 0 {
        return out;
    }
    fn rec(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur[i] = e;
            rec(i + 1, left - e, cur, out);
        }
        cur[i] = 0;
    }
    rec(0, s as u32, &mut vec![0; k], &mut out);
    out.sort();
    out
}

/// `F(f_1..f_k) = Σ_{|i| ≤ s} C_i f_1^{i_1}···f_k^{i_k}` with `C_i ∈ HP_d(s − |i|)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuperPoly {
    p: u64,
    d: usize,
    k: usize,
    s: i64,
    coeffs: BTreeMap<Vec<u32>, HomPoly>,
}

impl SuperPoly {
    pub fn zero(p: u64, d: usize, k: usize, s: i64) -> Self {
        Self {
            p,
            d,
            k,
            s,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn arity(&self) -> usize {
        self.k
    }

    pub fn budget(&self) -> i64 {
        self.s
    }

    pub fn set(&mut self, i: Vec<u32>, c: HomPoly) -> Result<()> {
        let w: i64 = i.iter().map(|&x| x as i64).sum();
        if i.len() != self.k || w > self.s {
            return Err(Error::Invalid(format!("index {i:?} outside arity {} / budget {}", self.k, self.s)));
        }
        if c.degree() != self.s - w && !c.is_zero() {
            return Err(Error::Invalid(format!("coefficient at {i:?} must have degree {}", self.s - w)));
        }
        if c.is_zero() {
            self.coeffs.remove(&i);
        } else {
            self.coeffs.insert(i, c);
        }
        Ok(())
    }

    pub fn coefficient(&self, i: &[u32]) -> HomPoly {
        let w: i64 = i.iter().map(|&x| x as i64).sum();
        self.coeffs.get(i).cloned().unwrap_or_else(|| HomPoly::zero(self.p, self.d, self.s - w))
    }

    /// Nonzero coefficients.
    pub fn coefficients(&self) -> &BTreeMap<Vec<u32>, HomPoly> {
        &self.coeffs
    }

    /// Largest `|i|` with `C_i ≠ 0`; the zero function has degree `s`.
    pub fn degree(&self) -> i64 {
        self.coeffs.keys().map(|i| i.iter().map(|&x| x as i64).sum()).max().unwrap_or(self.s)
    }

    /// Coefficients invariant under permuting the index.
    pub fn is_symmetric(&self) -> bool {
        self.coeffs.iter().all(|(i, c)| {
            let mut perm = i.clone();
            permutations(&mut perm, 0, &mut |q| self.coefficient(q) == *c)
        })
    }

    /// Every nonzero coefficient sits at `|i| = deg F`.
    pub fn is_homogeneous(&self) -> bool {
        let deg = self.degree();
        self.coeffs.keys().all(|i| i.iter().map(|&x| x as i64).sum::<i64>() == deg)
    }

    pub fn random<R: Rng>(p: u64, d: usize, k: usize, s: i64, rng: &mut R) -> Self {
        let mut f = Self::zero(p, d, k, s);
        for i in multi_indices(k, s) {
            let w: i64 = i.iter().map(|&x| x as i64).sum();
            f.set(i, random_hom(p, d, s - w, rng)).expect("index in range");
        }
        f
    }

    /// Random with `C_i` depending only on the sorted index.
    pub fn random_symmetric<R: Rng>(p: u64, d: usize, k: usize, s: i64, rng: &mut R) -> Self {
        let mut f = Self::zero(p, d, k, s);
        let mut chosen: BTreeMap<Vec<u32>, HomPoly> = BTreeMap::new();
        for i in multi_indices(k, s) {
            let mut key = i.clone();
            key.sort();
            let w: i64 = i.iter().map(|&x| x as i64).sum();
            let c = chosen.entry(key).or_insert_with(|| random_hom(p, d, s - w, rng)).clone();
            f.set(i, c).expect("index in range");
        }
        f
    }
}

/// Calls `test` on every permutation of `v[from..]`; stops at the first `false`.
fn permutations(v: &mut Vec<u32>, from: usize, test: &mut dyn FnMut(&[u32]) -> bool) -> bool {
    if from == v.len() {
        return test(v);
    }
    for i in from..v.len() {
        v.swap(from, i);
        let ok = permutations(v, from + 1, test);
        v.swap(from, i);
        if !ok {
            return false;
        }
    }
    true
}

/// Expands `F(f_1, …, f_k)` for degree-1 arguments.
pub fn super_eval(f: &SuperPoly, args: &[HomPoly]) -> Result<HomPoly> {
    if args.len() != f.k {
        return Err(Error::DimensionMismatch(format!("arity {} but {} arguments", f.k, args.len())));
    }
    if args.iter().any(|a| a.degree() != 1 && !a.is_zero()) {
        return Err(Error::Invalid("super polynomial arguments must be linear forms".into()));
    }
    let mut acc = PrimePoly::zero(f.p, f.d);
    for (i, c) in &f.coeffs {
        let mut term = c.poly().clone();
        for (a, &e) in args.iter().zip(i) {
            if e > 0 {
                term = term.mul(&a.poly().pow(e)?)?;
            }
        }
        acc = acc.add(&term);
    }
    HomPoly::new(acc, f.s)
}

// ---------------------------------------------------------------------------
// Freiman M-homomorphisms

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckMode {
    Exhaustive,
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreimanReport {
    pub mode: CheckMode,
    /// Additive `2^n`-tuples whose congruence was settled.
    pub tuples_checked: u128,
    pub membership_checks: u64,
    /// Indices into `H`: the left half followed by the right half.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Exhaustive enumeration exceeded the budget.
    pub forced: bool,
}

impl FreimanReport {
    pub fn holds(&self) -> bool {
        self.counterexample.is_none()
    }
}

#[derive(Clone, Debug)]
pub struct FreimanParams {
    /// The order is `2^order_exp`.
    pub order_exp: u32,
    /// Cap on enumerated half-tuples in exhaustive mode.
    pub budget: u128,
    pub samples: u64,
    pub seed: u64,
    pub sampled: bool,
}

impl FreimanParams {
    pub fn exhaustive(order_exp: u32, budget: u128) -> Self {
        Self {
            order_exp,
            budget,
            samples: 0,
            seed: 0,
            sampled: false,
        }
    }

    pub fn sampled(order_exp: u32, samples: u64, seed: u64) -> Self {
        Self {
            order_exp,
            budget: 0,
            samples,
            seed,
            sampled: true,
        }
    }
}

struct FreimanData<'a> {
    m: &'a QuadForm,
    hs: &'a [FpVector],
    vals: Vec<Vec<u64>>,
    idx: MonoIndex,
    s: i64,
}

impl FreimanData<'_> {
    fn half_sum(&self, t: &[usize]) -> (FpVector, Vec<u64>) {
        let p = self.idx.p;
        let mut sum = FpVector::zero(p, self.m.dim());
        let mut val = vec![0u64; self.idx.len()];
        for &i in t {
            sum = sum.add(&self.hs[i]);
            for (a, &b) in val.iter_mut().zip(&self.vals[i]) {
                *a = add_mod(*a, b, p);
            }
        }
        (sum, val)
    }

    /// Congruence for one tuple; `Ok(true)` when it holds.
    fn check(&self, a: &[usize], b: &[usize], va: &[u64], vb: &[u64]) -> Result<bool> {
        let p = self.idx.p;
        let diff: Vec<u64> = va.iter().zip(vb).map(|(&x, &y)| crate::field_linalg::sub_mod(x, y, p)).collect();
        if diff.iter().all(|&c| c == 0) {
            return Ok(true);
        }
        let dirs: Vec<FpVector> = a.iter().chain(&b[..b.len() - 1]).map(|&i| self.hs[i].clone()).collect();
        member_of(self.m, &dirs, &self.idx.sparse(&diff), self.s)
    }
}

fn decode(mut t: u64, n: usize, m: usize) -> Vec<usize> {
    let mut out = vec![0; m];
    for slot in out.iter_mut().rev() {
        *slot = (t % n as u64) as usize;
        t /= n as u64;
    }
    out
}

/// Checks `ξ(h_1)+⋯+ξ(h_{2^{n−1}}) ≡ ξ(h_{2^{n−1}+1})+⋯+ξ(h_{2^n}) mod J^M_{h_1,…,h_{2^n−1}}`
/// over additive `2^n`-tuples of `H`.
///
/// Exhaustive mode groups half-tuples by (sum, value); tuples inside one group
/// hold with zero difference, and only cross-group tuples reach the membership
/// oracle. Over budget, the check falls back to seeded sampling.
pub fn is_freiman_hom(m: &QuadForm, hs: &[FpVector], xi: &[HomPoly], params: &FreimanParams) -> Result<FreimanReport> {
    if hs.len() != xi.len() || hs.is_empty() {
        return Err(Error::DimensionMismatch("ξ must be tabulated on a nonempty H".into()));
    }
    if !(1..=4).contains(&params.order_exp) {
        return Err(Error::Invalid(format!("order exponent {} outside 1..=4", params.order_exp)));
    }
    let s = xi[0].degree();
    if xi.iter().any(|f| f.degree() != s) {
        return Err(Error::Invalid("values of ξ must share one degree".into()));
    }
    let idx = MonoIndex::new(m.modulus(), m.dim(), s);
    let data = FreimanData {
        m,
        hs,
        vals: xi.iter().map(|f| idx.dense(f.poly())).collect(),
        idx,
        s,
    };
    let half = 1usize << (params.order_exp - 1);
    let required = (hs.len() as u128).checked_pow(half as u32).unwrap_or(u128::MAX);
    if !params.sampled && required <= params.budget {
        return exhaustive(&data, half);
    }
    let mut p2 = params.clone();
    if !params.sampled {
        p2.samples = params.budget.min(100_000) as u64;
    }
    let mut r = sampled(&data, half, &p2)?;
    r.forced = !params.sampled;
    Ok(r)
}

struct Group {
    rep: u64,
    value: Vec<u64>,
    count: u128,
}

fn exhaustive(data: &FreimanData, half: usize) -> Result<FreimanReport> {
    let n = data.hs.len();
    let total = (n as u64).pow(half as u32);
    let mut by_sum: BTreeMap<FpVector, Vec<Group>> = BTreeMap::new();
    for t in 0..total {
        let tup = decode(t, n, half);
        let (sum, val) = data.half_sum(&tup);
        let groups = by_sum.entry(sum).or_default();
        match groups.iter_mut().find(|g| g.value == val) {
            Some(g) => g.count += 1,
            None => groups.push(Group {
                rep: t,
                value: val,
                count: 1,
            }),
        }
    }
    let tuples_checked: u128 = by_sum.values().map(|gs| gs.iter().map(|g| g.count).sum::<u128>().pow(2)).sum();
    let mixed: Vec<FpVector> = by_sum.iter().filter(|(_, gs)| gs.len() > 1).map(|(s, _)| s.clone()).collect();
    if mixed.is_empty() {
        return Ok(FreimanReport {
            mode: CheckMode::Exhaustive,
            tuples_checked,
            membership_checks: 0,
            counterexample: None,
            seed: None,
            forced: false,
        });
    }
    let mixed_pos: HashMap<&FpVector, usize> = mixed.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let mut members: Vec<Vec<(u64, usize)>> = vec![Vec::new(); mixed.len()];
    for t in 0..total {
        let tup = decode(t, n, half);
        let (sum, val) = data.half_sum(&tup);
        if let Some(&k) = mixed_pos.get(&sum) {
            let g = by_sum[&sum].iter().position(|g| g.value == val).expect("grouped in first pass");
            members[k].push((t, g));
        }
    }
    let per_sum: Vec<(u64, Option<Vec<usize>>)> = mixed
        .par_iter()
        .zip(members.par_iter())
        .map(|(sum, list)| -> Result<(u64, Option<Vec<usize>>)> {
            let groups = &by_sum[sum];
            let mut checks = 0u64;
            for (x, &(ta, ga)) in list.iter().enumerate() {
                for &(tb, gb) in &list[x + 1..] {
                    if ga == gb {
                        continue;
                    }
                    let (a, b) = (decode(ta, n, half), decode(tb, n, half));
                    checks += 1;
                    if !data.check(&a, &b, &groups[ga].value, &groups[gb].value)? {
                        return Ok((checks, Some(a.into_iter().chain(b).collect())));
                    }
                }
            }
            let _ = groups[0].rep;
            Ok((checks, None))
        })
        .collect::<Result<_>>()?;
    let mut membership_checks = 0;
    let mut counterexample = None;
    for (c, cex) in per_sum {
        membership_checks += c;
        if cex.is_some() {
            counterexample = cex;
            break;
        }
    }
    Ok(FreimanReport {
        mode: CheckMode::Exhaustive,
        tuples_checked,
        membership_checks,
        counterexample,
        seed: None,
        forced: false,
    })
}

fn sampled(data: &FreimanData, half: usize, params: &FreimanParams) -> Result<FreimanReport> {
    let n = data.hs.len();
    let pos: HashMap<&FpVector, usize> = data.hs.iter().enumerate().map(|(i, h)| (h, i)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut tuples: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    let max_attempts = params.samples.saturating_mul(50).max(1);
    let mut attempts = 0u64;
    while (tuples.len() as u64) < params.samples && attempts < max_attempts {
        attempts += 1;
        let a: Vec<usize> = (0..half).map(|_| rng.gen_range(0..n)).collect();
        let sa = data.half_sum(&a).0;
        let b = if half >= 2 && attempts % 2 == 0 {
            // swap one pair of summands for another pair with the same sum
            let i = rng.gen_range(0..half);
            let j = (i + rng.gen_range(1..half)) % half;
            let u = rng.gen_range(0..n);
            let w = data.hs[a[i]].add(&data.hs[a[j]]).sub(&data.hs[u]);
            match pos.get(&w) {
                Some(&wi) => {
                    let mut b = a.clone();
                    b[i] = u;
                    b[j] = wi;
                    b.shuffle(&mut rng);
                    Some(b)
                }
                None => None,
            }
        } else {
            let mut b: Vec<usize> = (0..half - 1).map(|_| rng.gen_range(0..n)).collect();
            let last = b.iter().fold(sa.clone(), |acc, &i| acc.sub(&data.hs[i]));
            pos.get(&last).map(|&li| {
                b.push(li);
                b
            })
        };
        if let Some(b) = b {
            tuples.push((a, b));
        }
    }
    let first_bad = tuples
        .par_iter()
        .enumerate()
        .map(|(k, (a, b))| -> Result<Option<usize>> {
            let (va, vb) = (data.half_sum(a).1, data.half_sum(b).1);
            Ok(if data.check(a, b, &va, &vb)? { None } else { Some(k) })
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .next();
    let checked = first_bad.map_or(tuples.len(), |k| k + 1);
    let membership_checks = tuples[..checked]
        .iter()
        .filter(|(a, b)| data.half_sum(a).1 != data.half_sum(b).1)
        .count() as u64;
    Ok(FreimanReport {
        mode: CheckMode::Sampled,
        tuples_checked: checked as u128,
        membership_checks,
        counterexample: first_bad.map(|k| tuples[k].0.iter().chain(&tuples[k].1).copied().collect()),
        seed: Some(params.seed),
        forced: false,
    })
}

// ---------------------------------------------------------------------------
// Locally linear maps

/// `T(ℓ_1 v_1 + ⋯ + ℓ_D v_D) = f_0 + ℓ_1 f_1 + ⋯ + ℓ_D f_D`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocallyLinear {
    pub coeffs: Vec<HomPoly>,
}

impl LocallyLinear {
    pub fn eval(&self, ell: &[i64]) -> HomPoly {
        let p = self.coeffs[0].poly().modulus();
        ell.iter()
            .zip(&self.coeffs[1..])
            .fold(self.coeffs[0].clone(), |acc, (&l, f)| acc.add(&f.scale(from_i64(l, p))))
    }

    pub fn random<R: Rng>(p: u64, d: usize, rank: usize, s: i64, rng: &mut R) -> Self {
        Self {
            coeffs: (0..=rank).map(|_| random_hom(p, d, s, rng)).collect(),
        }
    }

    /// Values on the GAP in coefficient-tuple order.
    pub fn tabulate(&self, gap: &Gap) -> Vec<HomPoly> {
        gap.coefficient_tuples().iter().map(|l| self.eval(l)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LocallyLinearFit {
    /// A fit with `ξ(h) − T(h) ∈ J^M_h` for every `h`, re-verified by membership.
    Feasible(LocallyLinear),
    /// Index (coefficient-tuple order) of an element whose removal restores feasibility
    /// within the shortest infeasible prefix.
    Infeasible { witness: usize },
}

struct FitSystem {
    blocks: Vec<(Vec<Vec<u64>>, Vec<u64>)>,
    ncols: usize,
}

impl FitSystem {
    fn solve(&self, keep: impl Fn(usize) -> bool, upto: usize, p: u64) -> Option<Vec<u64>> {
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for (k, (r, b)) in self.blocks[..upto].iter().enumerate() {
            if keep(k) {
                rows.extend(r.iter().cloned());
                rhs.extend(b.iter().copied());
            }
        }
        if rows.is_empty() {
            return Some(vec![0; self.ncols]);
        }
        solve_raw(&rows, self.ncols, &rhs, p).map(|(x, _)| x)
    }
}

/// Solves for `f_0..f_D` with `ξ(h) ≡ T(h) mod J^M_h` on a proper homogeneous GAP.
pub fn fit_locally_linear(m: &QuadForm, gap: &Gap, xi: &[HomPoly], budget: u128) -> Result<LocallyLinearFit> {
    if !gap.is_homogeneous() || !gap.is_proper(budget)? {
        return Err(Error::Invalid("fit requires a proper homogeneous GAP".into()));
    }
    let tuples = gap.coefficient_tuples();
    if xi.len() != tuples.len() {
        return Err(Error::DimensionMismatch("ξ must be tabulated on the GAP".into()));
    }
    let (p, d) = (m.modulus(), m.dim());
    let s = xi[0].degree();
    if xi.iter().any(|f| f.degree() != s) {
        return Err(Error::Invalid("values of ξ must share one degree".into()));
    }
    let rank = gap.rank();
    if s < 0 {
        return Ok(LocallyLinearFit::Feasible(LocallyLinear {
            coeffs: vec![HomPoly::zero(p, d, s); rank + 1],
        }));
    }
    let idx = MonoIndex::new(p, d, s);
    let nm = idx.len();
    let blocks: Vec<(Vec<Vec<u64>>, Vec<u64>)> = tuples
        .par_iter()
        .zip(xi.par_iter())
        .map(|(ell, f)| -> Result<(Vec<Vec<u64>>, Vec<u64>)> {
            let h = gap.point(ell);
            let q = MIdeal::of_vectors(m, std::slice::from_ref(&h))?.piece(s as u32)?.quotient_rows();
            let rhs = apply_rows(&q, &idx.dense(f.poly()), p);
            let scal: Vec<u64> = std::iter::once(1).chain(ell.iter().map(|&l| from_i64(l, p))).collect();
            let rows = q
                .iter()
                .map(|r| scal.iter().flat_map(|&c| r.iter().map(move |&x| mul_mod(c, x, p))).collect())
                .collect();
            Ok((rows, rhs))
        })
        .collect::<Result<_>>()?;
    let sys = FitSystem {
        blocks,
        ncols: nm * (rank + 1),
    };
    let n = tuples.len();
    match sys.solve(|_| true, n, p) {
        Some(x) => {
            let fit = LocallyLinear {
                coeffs: x.chunks(nm).map(|c| HomPoly::new(idx.sparse(c), s)).collect::<Result<_>>()?,
            };
            for (ell, f) in tuples.iter().zip(xi) {
                let h = gap.point(ell);
                if !member_of(m, &[h], f.sub(&fit.eval(ell)).poly(), s)? {
                    return Err(Error::Invalid("locally linear fit failed re-verification".into()));
                }
            }
            Ok(LocallyLinearFit::Feasible(fit))
        }
        None => {
            let (mut lo, mut hi) = (0usize, n);
            while hi - lo > 1 {
                let mid = (lo + hi) / 2;
                if sys.solve(|_| true, mid, p).is_some() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let witness = (0..hi).find(|&w| sys.solve(|k| k != w, hi, p).is_some()).unwrap_or(hi - 1);
            Ok(LocallyLinearFit::Infeasible { witness })
        }
    }
}

// ---------------------------------------------------------------------------
// Cocycle equations

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CocycleLemma {
    /// `F(x) := G + J^M_x`-member satisfies `F(x) ≡ F(y) mod J^M_{x,y}`.
    Coco01Forward,
    /// Every solution of `F(x) ≡ F(y) mod J^M_{x,y}` on the sample has a constant `G`.
    Coco01Inverse,
    /// `F, F'` sharing `G` satisfy `F(x) ≡ F'(y) mod J^M_{span{x,y}+V}`.
    Coco1cForward,
    /// `F(x) := G(L_x) + J^M`-member satisfies `F(x) ≡ F(y) mod J^M_{x−y}`.
    Cocon1Forward,
    /// Super polynomials with all `C_i ∈ J^M` vanish mod `J^M`; one bad coefficient is witnessed.
    CocozeroInverse,
    /// `G_x(f) := Q(L_x, f) + M·R_x(f)` with `Q` symmetric satisfies `G_x(L_y) ≡ G_y(L_x) mod J^M`.
    CocoprrForward,
    /// `C(x,y) := φ(x) − φ(y) + J^M_{x−y}`-member satisfies the triangle congruence.
    Coco4Forward,
    /// `F(x) := L_x²G(L_x) + T(x) + J^M`-member satisfies `F(x)+F(y) ≡ F(x+y) mod J^M_x ∩ J^M_y`.
    Cocon2Forward,
    /// `ξ := T + J^M_h`-member is a Freiman M-homomorphism of order 4 and refits.
    GsolForward,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CocycleParams {
    pub p: u64,
    pub d: usize,
    pub s: i64,
    /// Arity for super polynomials, `dim V` for the corollary.
    pub k: usize,
    /// Number of sample points.
    pub points: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CocycleReport {
    pub lemma: CocycleLemma,
    pub checks: u64,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

fn sample_points<R: Rng>(p: u64, d: usize, n: usize, rng: &mut R) -> Vec<FpVector> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    while out.len() < n {
        let v = FpVector::from_raw(p, (0..d).map(|_| rng.gen_range(0..p)).collect());
        if !v.is_zero() && seen.insert(v.clone()) {
            out.push(v);
        }
    }
    out
}

fn independent(vs: &[&FpVector], v: Option<&Subspace>) -> Result<bool> {
    let mut items: Vec<TupleItem> = vs.iter().map(|x| TupleItem::Vector((*x).clone())).collect();
    if let Some(v) = v {
        items.push(TupleItem::Space(v.clone()));
    }
    is_independent_tuple(&items, None)
}

pub fn verify_cocycle_lemmas(lemma: CocycleLemma, params: &CocycleParams) -> Result<CocycleReport> {
    let (p, d, s) = (params.p, params.d, params.s);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let m = random_nondegenerate(p, d, &mut rng);
    let xs = sample_points(p, d, params.points, &mut rng);
    let jm = MIdeal::quadric(&m);
    let mut checks = 0u64;
    let report = |holds: bool, checks: u64, witness: Option<String>| CocycleReport {
        lemma,
        checks,
        holds,
        witness,
    };
    match lemma {
        CocycleLemma::Coco01Forward => {
            let g = random_hom(p, d, s, &mut rng);
            let f: Vec<HomPoly> = xs
                .iter()
                .map(|x| Ok(g.add(&random_member(&MIdeal::of_vectors(&m, std::slice::from_ref(x))?, s, &mut rng)?)))
                .collect::<Result<_>>()?;
            for i in 0..xs.len() {
                for j in i + 1..xs.len() {
                    checks += 1;
                    if !member_of(&m, &[xs[i].clone(), xs[j].clone()], f[i].sub(&f[j]).poly(), s)? {
                        return Ok(report(false, checks, Some(format!("x={} y={}", xs[i], xs[j]))));
                    }
                }
            }
            Ok(report(true, checks, None))
        }
        CocycleLemma::Coco01Inverse => coco01_inverse(&m, &xs, s, params).map(|(holds, checks, w)| report(holds, checks, w)),
        CocycleLemma::Coco1cForward => {
            let vdirs = sample_points(p, d, params.k, &mut rng);
            let v = Subspace::span_of(p, d, &vdirs);
            let g = random_hom(p, d, s, &mut rng);
            let mut f = Vec::new();
            let mut f2 = Vec::new();
            for x in &xs {
                let ix = MIdeal::new(m.clone(), v.with_vector(x))?;
                f.push(g.add(&random_member(&ix, s, &mut rng)?));
                f2.push(g.add(&random_member(&ix, s, &mut rng)?));
            }
            for i in 0..xs.len() {
                for j in 0..xs.len() {
                    if i == j || !independent(&[&xs[i], &xs[j]], Some(&v))? {
                        continue;
                    }
                    checks += 1;
                    let w = v.with_vector(&xs[i]).with_vector(&xs[j]);
                    if !member_of_space(&m, &w, f[i].sub(&f2[j]).poly(), s)? {
                        return Ok(report(false, checks, Some(format!("x={} y={}", xs[i], xs[j]))));
                    }
                }
            }
            Ok(report(true, checks, None))
        }
        CocycleLemma::Cocon1Forward => {
            let g = SuperPoly::random(p, d, 1, s, &mut rng);
            let f: Vec<HomPoly> = xs
                .iter()
                .map(|x| Ok(super_eval(&g, &[linear_form(&m, x)])?.add(&random_member(&jm, s, &mut rng)?)))
                .collect::<Result<_>>()?;
            for i in 0..xs.len() {
                for j in i + 1..xs.len() {
                    checks += 1;
                    if !member_of(&m, &[xs[i].sub(&xs[j])], f[i].sub(&f[j]).poly(), s)? {
                        return Ok(report(false, checks, Some(format!("x={} y={}", xs[i], xs[j]))));
                    }
                }
            }
            Ok(report(true, checks, None))
        }
        CocycleLemma::CocozeroInverse => {
            let k = params.k.max(1);
            let mut good = SuperPoly::zero(p, d, k, s);
            for i in multi_indices(k, s) {
                let w: i64 = i.iter().map(|&x| x as i64).sum();
                good.set(i, random_member(&jm, s - w, &mut rng)?)?;
            }
            let idxs = multi_indices(k, s);
            if idxs.is_empty() {
                return Ok(report(true, 0, None));
            }
            let target = idxs[rng.gen_range(0..idxs.len())].clone();
            let w: i64 = target.iter().map(|&x| x as i64).sum();
            let mut bad = good.clone();
            let bump = loop {
                let c = random_hom(p, d, s - w, &mut rng);
                if !member_of(&m, &[], c.poly(), s - w)? {
                    break c;
                }
            };
            bad.set(target.clone(), good.coefficient(&target).add(&bump))?;
            let mut witness = None;
            let mut good_ok = true;
            for t in 0..params.points.max(1) * 4 {
                let tuple = sample_points(p, d, k, &mut rng);
                let refs: Vec<&FpVector> = tuple.iter().collect();
                if !independent(&refs, None)? {
                    continue;
                }
                let args: Vec<HomPoly> = tuple.iter().map(|x| linear_form(&m, x)).collect();
                checks += 1;
                if !member_of(&m, &[], super_eval(&good, &args)?.poly(), s)? {
                    good_ok = false;
                    break;
                }
                if witness.is_none() && !member_of(&m, &[], super_eval(&bad, &args)?.poly(), s)? {
                    witness = Some(format!("trial {t}: x={}", tuple.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")));
                }
            }
            let holds = good_ok && witness.is_some();
            Ok(report(holds, checks, witness.or_else(|| Some(format!("no witness for bad index {target:?}")))))
        }
        CocycleLemma::CocoprrForward => {
            let q = SuperPoly::random_symmetric(p, d, 2, s, &mut rng);
            let rs: Vec<SuperPoly> = xs.iter().map(|_| SuperPoly::random(p, d, 1, s - 2, &mut rng)).collect();
            let mpoly = HomPoly::new(m.to_poly(), 2)?;
            let gx = |i: usize, f: &HomPoly| -> Result<HomPoly> {
                let base = super_eval(&q, &[linear_form(&m, &xs[i]), f.clone()])?;
                let extra = if s >= 2 { mpoly.poly().mul(super_eval(&rs[i], std::slice::from_ref(f))?.poly())? } else { PrimePoly::zero(p, d) };
                HomPoly::new(base.poly().add(&extra), s)
            };
            for i in 0..xs.len() {
                for j in i + 1..xs.len() {
                    if !independent(&[&xs[i], &xs[j]], None)? {
                        continue;
                    }
                    checks += 1;
                    let (li, lj) = (linear_form(&m, &xs[i]), linear_form(&m, &xs[j]));
                    let a = gx(i, &lj)?;
                    let b = gx(j, &li)?;
                    let qv = super_eval(&q, &[li, lj])?;
                    if !member_of(&m, &[], a.sub(&b).poly(), s)? || !member_of(&m, &[], a.sub(&qv).poly(), s)? {
                        return Ok(report(false, checks, Some(format!("x={} y={}", xs[i], xs[j]))));
                    }
                }
            }
            Ok(report(true, checks, None))
        }
        CocycleLemma::Coco4Forward => {
            let phi: Vec<HomPoly> = xs.iter().map(|_| random_hom(p, d, s, &mut rng)).collect();
            let n = xs.len();
            let mut c = vec![vec![HomPoly::zero(p, d, s); n]; n];
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        let r = random_member(&MIdeal::of_vectors(&m, &[xs[i].sub(&xs[j])])?, s, &mut rng)?;
                        c[i][j] = phi[i].sub(&phi[j]).add(&r);
                    }
                }
            }
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        if i == j || j == k || i == k || !independent(&[&xs[i], &xs[j], &xs[k]], None)? {
                            continue;
                        }
                        checks += 1;
                        let lhs = c[i][j].add(&c[j][k]).sub(&c[i][k]);
                        if !member_of(&m, &[xs[i].sub(&xs[j]), xs[j].sub(&xs[k])], lhs.poly(), s)? {
                            return Ok(report(false, checks, Some(format!("x={} y={} z={}", xs[i], xs[j], xs[k]))));
                        }
                    }
                }
            }
            Ok(report(true, checks, None))
        }
        CocycleLemma::Cocon2Forward => {
            let rank = params.k.clamp(1, d);
            let gens = random_proper_gap(p, d, rank, 1, &mut rng)?.gens().to_vec();
            let gap = Gap::homogeneous(gens, vec![Ratio::from_integer(4.min((p as i64 + 1) / 2)); rank])?;
            let g = SuperPoly::random(p, d, 1, s - 2, &mut rng);
            let mut t = LocallyLinear::random(p, d, rank, s, &mut rng);
            // f_0 must lie in J^M for the hypothesis to hold
            t.coeffs[0] = random_member(&jm, s, &mut rng)?;
            let tuples = gap.coefficient_tuples();
            let pos: HashMap<Vec<i64>, usize> = tuples.iter().cloned().enumerate().map(|(i, l)| (l, i)).collect();
            let f: Vec<HomPoly> = tuples
                .iter()
                .map(|ell| -> Result<HomPoly> {
                    let x = gap.point(ell);
                    let lx = linear_form(&m, &x);
                    let head = if s >= 2 { lx.poly().pow(2)?.mul(super_eval(&g, &[lx.clone()])?.poly())? } else { PrimePoly::zero(p, d) };
                    let v = HomPoly::new(head, s.max(0)).unwrap_or_else(|_| HomPoly::zero(p, d, s));
                    let v = if s >= 2 { v } else { HomPoly::zero(p, d, s) };
                    Ok(v.add(&t.eval(ell)).add(&random_member(&jm, s, &mut rng)?))
                })
                .collect::<Result<_>>()?;
            let half = gap.scaled(Ratio::new(1, 2))?;
            let small: Vec<Vec<i64>> = tuples.iter().filter(|l| half.admits(l)).cloned().collect();
            for a in &small {
                for b in &small {
                    let (x, y) = (gap.point(a), gap.point(b));
                    if !independent(&[&x, &y], None)? {
                        continue;
                    }
                    let sum: Vec<i64> = a.iter().zip(b).map(|(u, v)| u + v).collect();
                    let Some(&k) = pos.get(&sum) else { continue };
                    checks += 1;
                    let lhs = f[pos[a]].add(&f[pos[b]]).sub(&f[k]);
                    if !member_of(&m, std::slice::from_ref(&x), lhs.poly(), s)? || !member_of(&m, std::slice::from_ref(&y), lhs.poly(), s)? {
                        return Ok(report(false, checks, Some(format!("x={x} y={y}"))));
                    }
                }
            }
            Ok(report(true, checks, None))
        }
        CocycleLemma::GsolForward => {
            let rank = params.k.clamp(1, d.min(3));
            let gap = random_proper_gap(p, d, rank, 2, &mut rng)?;
            let t = LocallyLinear::random(p, d, rank, s, &mut rng);
            let tuples = gap.coefficient_tuples();
            let pts: Vec<FpVector> = tuples.iter().map(|l| gap.point(l)).collect();
            let xi: Vec<HomPoly> = tuples
                .iter()
                .zip(&pts)
                .map(|(l, h)| Ok(t.eval(l).add(&random_member(&MIdeal::of_vectors(&m, std::slice::from_ref(h))?, s, &mut rng)?)))
                .collect::<Result<_>>()?;
            let fr = is_freiman_hom(&m, &pts, &xi, &FreimanParams::exhaustive(2, 1 << 24))?;
            checks += fr.membership_checks;
            if let Some(c) = fr.counterexample {
                return Ok(report(false, checks, Some(format!("order-4 counterexample {c:?}"))));
            }
            match fit_locally_linear(&m, &gap, &xi, 1 << 24)? {
                LocallyLinearFit::Feasible(_) => Ok(report(true, checks + tuples.len() as u64, None)),
                LocallyLinearFit::Infeasible { witness } => Ok(report(false, checks, Some(format!("fit infeasible at {}", pts[witness])))),
            }
        }
    }
}

/// The solution space of `F(x) ≡ F(y) mod J^M_{x,y}` on the sample, checked basis
/// vector by basis vector for a common `G` with `F(x) ≡ G mod J^M_x`.
fn coco01_inverse(m: &QuadForm, xs: &[FpVector], s: i64, params: &CocycleParams) -> Result<(bool, u64, Option<String>)> {
    if !(0..=1).contains(&s) || params.d > 9 || params.p > 7 {
        return Err(Error::Unsupported("inverse mode needs s ∈ {0,1}, d ≤ 9, p ≤ 7".into()));
    }
    let (p, d) = (m.modulus(), m.dim());
    let idx = MonoIndex::new(p, d, s);
    let nm = idx.len();
    let n = xs.len();
    let mut rows: Vec<Vec<u64>> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let q = MIdeal::of_vectors(m, &[xs[i].clone(), xs[j].clone()])?.piece(s as u32)?.quotient_rows();
            for r in q {
                let mut row = vec![0u64; n * nm];
                for (c, &v) in r.iter().enumerate() {
                    row[i * nm + c] = v;
                    row[j * nm + c] = crate::field_linalg::neg_mod(v, p);
                }
                rows.push(row);
            }
        }
    }
    let basis = if rows.is_empty() {
        (0..n * nm).map(|c| (0..n * nm).map(|r| u64::from(r == c)).collect()).collect()
    } else {
        crate::field_linalg::kernel(&rows, n * nm, p)
    };
    let qs: Vec<Vec<Vec<u64>>> = xs
        .iter()
        .map(|x| Ok(MIdeal::of_vectors(m, std::slice::from_ref(x))?.piece(s as u32)?.quotient_rows()))
        .collect::<Result<_>>()?;
    let mut checks = 0u64;
    for (bi, f) in basis.iter().enumerate() {
        let mut sys = Vec::new();
        let mut rhs = Vec::new();
        for (i, q) in qs.iter().enumerate() {
            rhs.extend(apply_rows(q, &f[i * nm..(i + 1) * nm], p));
            sys.extend(q.iter().cloned());
        }
        checks += 1;
        if !sys.is_empty() && solve_raw(&sys, nm, &rhs, p).is_none() {
            return Ok((false, checks, Some(format!("solution basis vector {bi} has no common G"))));
        }
    }
    Ok((true, checks, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn r(n: i64, d: i64) -> Ratio<i64> {
        Ratio::new(n, d)
    }

    fn v(p: u64, c: &[i64]) -> FpVector {
        FpVector::from_i64(p, c).unwrap()
    }

    #[test]
    fn thresholds() {
        assert_eq!(dimension_threshold(0), 7248);
        assert_eq!(dimension_threshold(1), 8424);
    }

    #[test]
    fn gap_basics_and_scaling() {
        let g = Gap::homogeneous(vec![v(101, &[1, 0])], vec![r(10, 1)]).unwrap();
        assert_eq!(g.tuple_count(), 19);
        assert!(g.is_proper(1 << 20).unwrap());
        let same = scale_gap(&g, r(1, 1), 1 << 20).unwrap();
        assert_eq!(same.gap.tuple_count(), 19);
        let half = scale_gap(&g, r(1, 2), 1 << 20).unwrap();
        assert_eq!(half.size, 9);
        assert!(half.bound_holds);
        assert!(half.containment_holds);
        // 9 ≥ (1/5)·19
        assert!(9 * 5 >= 19);
    }

    #[test]
    fn improper_gap_detected() {
        let g = Gap::homogeneous(vec![v(7, &[1]), v(7, &[2])], vec![r(3, 1), r(3, 1)]).unwrap();
        assert!(!g.is_proper(1 << 20).unwrap());
    }

    #[test]
    fn gap_json_roundtrip() {
        let g = Gap::new(v(11, &[1, 2]), vec![v(11, &[1, 0]), v(11, &[3, 4])], vec![r(5, 2), r(3, 1)]).unwrap();
        assert_eq!(Gap::from_json(&g.to_json().unwrap()).unwrap(), g);
    }

    #[test]
    fn bohr_examples() {
        let b = bohr_set(&[], r(1, 4), 5, 2, 1 << 20).unwrap();
        assert_eq!(b.len(), 25);
        let b = bohr_set(&[v(13, &[1, 0])], r(1, 4), 13, 2, 1 << 20).unwrap();
        assert_eq!(b.len(), 7 * 13);
        assert!(b.elements().iter().all(|h| symmetric_small(h.coords()[0], 13) <= 3));
        assert!(b.contains(&FpVector::zero(13, 2)));
        assert!(b.size_bound_holds());
    }

    fn symmetric_small(x: u64, p: u64) -> u64 {
        x.min(p - x)
    }

    #[test]
    fn count_r_examples() {
        let z = FpVector::zero(5, 2);
        assert_eq!(count_r(&[z.clone()], &z, 100).unwrap(), 1);
        let all: Vec<FpVector> = crate::field_linalg::all_vectors(3, 2).collect();
        assert_eq!(count_r(&all, &v(3, &[1, 2]), 1 << 20).unwrap(), 3u128.pow(6));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let hs = sample_points(11, 2, 50, &mut rng);
        let h = v(11, &[3, 7]);
        let mut naive = 0u128;
        for a in &hs {
            for b in &hs {
                for c in &hs {
                    for e in &hs {
                        if a.add(b).sub(c).sub(e) == h {
                            naive += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(count_r(&hs, &h, 1 << 20).unwrap(), naive);
    }

    #[test]
    fn almost_linear_functions() {
        let p = 7;
        let hs: Vec<FpVector> = crate::field_linalg::all_vectors(p, 2).filter(|h| h.coords()[1] < 2).collect();
        let lin = AlmostLinearFn::new(p, 2, vec![(vec![1, 3], 2 * p as i64)]).unwrap();
        assert_eq!(lin.freiman_violation(&hs, 1 << 20).unwrap(), None);
        // 2{a·h/p}/p − {2a·h/p}/p = [2r ≥ p]/p: in Z/p but not additive
        let step = AlmostLinearFn::new(p, 2, vec![(vec![1, 0], 2), (vec![2, 0], -1)]).unwrap();
        for h in &hs {
            let val = step.eval_exact(h).unwrap();
            assert!(p as i128 % val.denom() == 0);
        }
        assert!(step.freiman_violation(&hs, 1 << 20).unwrap().is_some());
        let bad = AlmostLinearFn::new(p, 2, vec![(vec![1, 0], 1)]).unwrap();
        assert!(bad.eval_exact(&v(p, &[1, 0])).is_err());
        assert_eq!(lin.eval_field(&v(p, &[1, 1])).unwrap(), (2 * 4) % 7);
    }

    #[test]
    fn super_poly_examples() {
        let (p, d) = (7, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c0 = random_hom(p, d, 2, &mut rng);
        let mut f = SuperPoly::zero(p, d, 1, 2);
        f.set(vec![0], c0.clone()).unwrap();
        let lx = HomPoly::new(PrimePoly::linear_form(p, &[1, 2, 3]), 1).unwrap();
        assert_eq!(super_eval(&f, &[lx.clone()]).unwrap(), c0);
        let mut sq = SuperPoly::zero(p, d, 1, 2);
        sq.set(vec![2], HomPoly::new(PrimePoly::constant(p, d, 1), 0).unwrap()).unwrap();
        assert_eq!(super_eval(&sq, &[lx.clone()]).unwrap().poly(), &lx.poly().pow(2).unwrap());
        assert_eq!(sq.degree(), 2);
        assert!(sq.is_homogeneous());
        assert_eq!(SuperPoly::zero(p, d, 2, 3).degree(), 3);
        assert!(super_eval(&sq, &[lx.clone(), lx]).is_err());
    }

    #[test]
    fn symmetric_flag_matches_permuted_evaluation() {
        let (p, d) = (7, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = HomPoly::new(PrimePoly::linear_form(p, &[1, 2, 0]), 1).unwrap();
        let b = HomPoly::new(PrimePoly::linear_form(p, &[0, 5, 1]), 1).unwrap();
        for t in 0..20 {
            let f = if t % 2 == 0 { SuperPoly::random_symmetric(p, d, 2, 2, &mut rng) } else { SuperPoly::random(p, d, 2, 2, &mut rng) };
            let same = super_eval(&f, &[a.clone(), b.clone()]).unwrap() == super_eval(&f, &[b.clone(), a.clone()]).unwrap();
            assert_eq!(same, f.is_symmetric(), "trial {t}");
        }
    }

    #[test]
    fn freiman_examples() {
        let (p, d) = (11, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_nondegenerate(p, d, &mut rng);
        let gap = random_proper_gap(p, d, 2, 2, &mut rng).unwrap();
        let pts = gap.elements(1 << 20).unwrap();
        let t = LocallyLinear::random(p, d, 2, 1, &mut rng);
        let rep = is_freiman_hom(&m, &pts, &t.tabulate(&gap), &FreimanParams::exhaustive(2, 1 << 20)).unwrap();
        assert!(rep.holds());
        assert_eq!(rep.mode, CheckMode::Exhaustive);
        let c = vec![random_hom(p, d, 1, &mut rng); pts.len()];
        for n in 1..=3 {
            assert!(is_freiman_hom(&m, &pts, &c, &FreimanParams::exhaustive(n, 1 << 20)).unwrap().holds());
        }
        assert!(is_freiman_hom(&m, &pts, &c, &FreimanParams::sampled(4, 200, 9)).unwrap().holds());
    }

    #[test]
    fn random_map_has_explicit_quadruple() {
        let (p, d) = (7, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = random_nondegenerate(p, d, &mut rng);
        let mut hs = sample_points(p, d, 3, &mut rng);
        hs.push(hs[0].add(&hs[1]).sub(&hs[2]));
        for x in sample_points(p, d, 10, &mut rng) {
            if hs.len() < 8 && !hs.contains(&x) {
                hs.push(x);
            }
        }
        let xi: Vec<HomPoly> = hs.iter().map(|_| random_hom(p, d, 1, &mut rng)).collect();
        let rep = is_freiman_hom(&m, &hs, &xi, &FreimanParams::exhaustive(2, 1 << 20)).unwrap();
        let c = rep.counterexample.expect("non-homomorphism");
        assert_eq!(hs[c[0]].add(&hs[c[1]]), hs[c[2]].add(&hs[c[3]]));
        let diff = xi[c[0]].add(&xi[c[1]]).sub(&xi[c[2]]).sub(&xi[c[3]]);
        assert!(!member_of(&m, &[hs[c[0]].clone(), hs[c[1]].clone(), hs[c[2]].clone()], diff.poly(), 1).unwrap());
        // brute force over all quadruples agrees
        let mut any = false;
        for a in 0..8 {
            for b in 0..8 {
                for e in 0..8 {
                    for f in 0..8 {
                        if hs[a].add(&hs[b]) == hs[e].add(&hs[f]) {
                            let diff = xi[a].add(&xi[b]).sub(&xi[e]).sub(&xi[f]);
                            any |= !member_of(&m, &[hs[a].clone(), hs[b].clone(), hs[e].clone()], diff.poly(), 1).unwrap();
                        }
                    }
                }
            }
        }
        assert!(any);
    }

    #[test]
    fn budget_forces_sampling() {
        let (p, d) = (11, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let m = random_nondegenerate(p, d, &mut rng);
        let hs = sample_points(p, d, 30, &mut rng);
        let xi = vec![random_hom(p, d, 1, &mut rng); 30];
        let rep = is_freiman_hom(&m, &hs, &xi, &FreimanParams::exhaustive(3, 1000)).unwrap();
        assert!(rep.forced);
        assert_eq!(rep.mode, CheckMode::Sampled);
    }

    #[test]
    fn fit_examples() {
        let (p, d) = (11, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = random_nondegenerate(p, d, &mut rng);
        let gap = random_proper_gap(p, d, 2, 2, &mut rng).unwrap();
        let pts = gap.elements(1 << 20).unwrap();
        let t = LocallyLinear::random(p, d, 2, 2, &mut rng);
        let exact = t.tabulate(&gap);
        assert!(matches!(fit_locally_linear(&m, &gap, &exact, 1 << 20).unwrap(), LocallyLinearFit::Feasible(_)));
        let noisy: Vec<HomPoly> = exact
            .iter()
            .zip(&pts)
            .map(|(f, h)| f.add(&random_member(&MIdeal::of_vectors(&m, std::slice::from_ref(h)).unwrap(), 2, &mut rng).unwrap()))
            .collect();
        assert!(matches!(fit_locally_linear(&m, &gap, &noisy, 1 << 20).unwrap(), LocallyLinearFit::Feasible(_)));
        let at = pts.len() - 3;
        let mut bumped = exact.clone();
        let bump = loop {
            let b = random_hom(p, d, 2, &mut rng);
            if !member_of(&m, std::slice::from_ref(&pts[at]), b.poly(), 2).unwrap() {
                break b;
            }
        };
        bumped[at] = bumped[at].add(&bump);
        assert_eq!(fit_locally_linear(&m, &gap, &bumped, 1 << 20).unwrap(), LocallyLinearFit::Infeasible { witness: at });
    }

    #[test]
    fn fit_rejects_improper() {
        let m = QuadForm::sum_of_squares(7, 1).unwrap();
        let g = Gap::homogeneous(vec![v(7, &[1]), v(7, &[2])], vec![r(3, 1), r(3, 1)]).unwrap();
        let xi = vec![HomPoly::zero(7, 1, 1); g.tuple_count() as usize];
        assert!(fit_locally_linear(&m, &g, &xi, 1 << 20).is_err());
    }

    #[test]
    fn cocycle_forward_modes() {
        use CocycleLemma::*;
        for (lemma, s, k) in [
            (Coco01Forward, 2, 0),
            (Coco1cForward, 1, 1),
            (Cocon1Forward, 2, 1),
            (CocoprrForward, 3, 2),
            (Coco4Forward, 2, 0),
            (Cocon2Forward, 3, 2),
            (GsolForward, 1, 2),
        ] {
            let params = CocycleParams { p: 7, d: 6, s, k, points: 5, seed: 11 };
            let rep = verify_cocycle_lemmas(lemma, &params).unwrap();
            assert!(rep.holds, "{lemma:?}: {:?}", rep.witness);
            assert!(rep.checks > 0, "{lemma:?}");
        }
    }

    #[test]
    fn cocycle_inverse_modes() {
        for s in 0..=1 {
            let params = CocycleParams { p: 5, d: 5, s, k: 0, points: 5, seed: 3 };
            assert!(verify_cocycle_lemmas(CocycleLemma::Coco01Inverse, &params).unwrap().holds);
        }
        let params = CocycleParams { p: 7, d: 7, s: 1, k: 1, points: 10, seed: 5 };
        let rep = verify_cocycle_lemmas(CocycleLemma::CocozeroInverse, &params).unwrap();
        assert!(rep.holds, "{:?}", rep.witness);
        let big = CocycleParams { p: 11, d: 5, s: 1, k: 0, points: 3, seed: 1 };
        assert!(verify_cocycle_lemmas(CocycleLemma::Coco01Inverse, &big).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn crescale_bound(seed in any::<u64>(), num in 1i64..8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let gap = random_proper_gap(13, 3, rng.gen_range(1..=3), 5, &mut rng).unwrap();
            let rep = scale_gap(&gap, r(num, 8), 1 << 20).unwrap();
            prop_assert!(rep.bound_holds);
            prop_assert!(rep.containment_holds);
        }

        #[test]
        fn super_eval_respects_difference_ideal(seed in any::<u64>()) {
            let (p, d) = (7, 5);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_nondegenerate(p, d, &mut rng);
            let f = SuperPoly::random(p, d, 1, 2, &mut rng);
            let xs = sample_points(p, d, 2, &mut rng);
            let a = super_eval(&f, &[linear_form(&m, &xs[0])]).unwrap();
            let b = super_eval(&f, &[linear_form(&m, &xs[1])]).unwrap();
            prop_assert!(member_of(&m, &[xs[0].sub(&xs[1])], a.sub(&b).poly(), 2).unwrap());
        }

        #[test]
        fn fit_roundtrip(seed in any::<u64>()) {
            let (p, d) = (11, 4);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_nondegenerate(p, d, &mut rng);
            let gap = random_proper_gap(p, d, rng.gen_range(1..=2), 2, &mut rng).unwrap();
            let t = LocallyLinear::random(p, d, gap.rank(), 1, &mut rng);
            let xi = t.tabulate(&gap);
            match fit_locally_linear(&m, &gap, &xi, 1 << 20).unwrap() {
                LocallyLinearFit::Feasible(fit) => {
                    for (ell, f) in gap.coefficient_tuples().iter().zip(&xi) {
                        let h = gap.point(ell);
                        prop_assert!(member_of(&m, &[h], f.sub(&fit.eval(ell)).poly(), 1).unwrap());
                    }
                }
                other => prop_assert!(false, "{other:?}"),
            }
        }
    }
}
