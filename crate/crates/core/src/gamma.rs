//! Shifted M-ideals with a marked direction: elements `(h, J^M_V + f)` of `Γ^s(M)`,
//! the non-invertible operations `+̂`/`−̂`, the relation `~`, sumsets and
//! equivalence-class tests.

use crate::error::{Error, Result};
use crate::field_linalg::{solve_raw, FpVector, Subspace};
use crate::mideal::MIdeal;
use crate::polyring::{HomPoly, PrimePoly};
use crate::quadform::QuadForm;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::sync::Arc;

/// `(h, J^M_V + f)` with `h ∈ V` and `f` homogeneous of degree `s`, stored reduced modulo `J^M_V`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GammaElement {
    m: Arc<QuadForm>,
    s: u32,
    h: FpVector,
    v: Subspace,
    f: HomPoly,
}

impl GammaElement {
    pub fn new(m: Arc<QuadForm>, s: u32, h: FpVector, v: Subspace, f: PrimePoly) -> Result<Self> {
        if !v.contains(&h) {
            return Err(Error::Invalid("marked direction lies outside V".into()));
        }
        if h.modulus() != m.modulus() || h.dim() != m.dim() || f.modulus() != m.modulus() || f.nvars() != m.dim() {
            return Err(Error::DimensionMismatch("element does not match the form".into()));
        }
        let f = HomPoly::new(f, s as i64)?;
        let ideal = MIdeal::new((*m).clone(), v.clone())?;
        let reduced = ideal.piece(s)?.reduce(f.poly());
        Ok(Self {
            m,
            s,
            h,
            v,
            f: HomPoly::new(reduced, s as i64)?,
        })
    }

    /// `(h, J^M_h + f)`, the shape of `Γ^s_1(M)`.
    pub fn line(m: Arc<QuadForm>, s: u32, h: FpVector, f: PrimePoly) -> Result<Self> {
        let v = Subspace::span(m.modulus(), m.dim(), std::slice::from_ref(&h))?;
        Self::new(m, s, h, v, f)
    }

    /// `(0, J^M + 0)`.
    pub fn identity(m: Arc<QuadForm>, s: u32) -> Self {
        let (p, d) = (m.modulus(), m.dim());
        Self::new(m, s, FpVector::zero(p, d), Subspace::trivial(p, d), PrimePoly::zero(p, d)).expect("identity is valid")
    }

    pub fn form(&self) -> &Arc<QuadForm> {
        &self.m
    }

    pub fn degree(&self) -> u32 {
        self.s
    }

    /// The projection `π`.
    pub fn pi(&self) -> &FpVector {
        &self.h
    }

    pub fn subspace(&self) -> &Subspace {
        &self.v
    }

    pub fn shift(&self) -> &PrimePoly {
        self.f.poly()
    }

    pub fn ideal(&self) -> MIdeal {
        MIdeal::new((*self.m).clone(), self.v.clone()).expect("validated at construction")
    }

    /// Least `k` with the element in `Γ^s_k(M)`.
    pub fn level(&self) -> usize {
        if self.h.is_zero() {
            self.v.dim() + 1
        } else {
            self.v.dim().max(1)
        }
    }

    pub fn in_level(&self, k: usize) -> bool {
        self.level() <= k
    }

    fn check_compatible(&self, o: &Self) -> Result<()> {
        if self.m != o.m || self.s != o.s {
            return Err(Error::Invalid("elements over different (M, s)".into()));
        }
        Ok(())
    }

    /// `(h+h', J^M_{V+V'} + f+f')`.
    pub fn hat_add(&self, o: &Self) -> Result<Self> {
        self.check_compatible(o)?;
        Self::new(self.m.clone(), self.s, self.h.add(&o.h), self.v.sum(&o.v), self.f.poly().add(o.f.poly()))
    }

    /// `(h−h', J^M_{V+V'} + f−f')`.
    pub fn hat_sub(&self, o: &Self) -> Result<Self> {
        self.check_compatible(o)?;
        Self::new(self.m.clone(), self.s, self.h.sub(&o.h), self.v.sum(&o.v), self.f.poly().sub(o.f.poly()))
    }

    /// `a ~ b`: equal projections and `f − f' ∈ J^M_{V+V'}`.
    pub fn related(&self, o: &Self) -> Result<bool> {
        self.check_compatible(o)?;
        if self.h != o.h {
            return Ok(false);
        }
        let ideal = MIdeal::new((*self.m).clone(), self.v.sum(&o.v))?;
        Ok(ideal.contains(&self.f.poly().sub(o.f.poly()), self.s)?.is_member())
    }

    pub fn to_json(&self) -> GammaElementJson {
        GammaElementJson {
            h: self.h.coords().to_vec(),
            v_basis: self.v.rows().to_vec(),
            f_text: self.f.poly().to_text(),
        }
    }

    pub fn from_json(m: Arc<QuadForm>, s: u32, j: &GammaElementJson) -> Result<Self> {
        let (p, d) = (m.modulus(), m.dim());
        let h = FpVector::new(p, j.h.clone())?;
        let basis = j.v_basis.iter().map(|r| FpVector::new(p, r.clone())).collect::<Result<Vec<_>>>()?;
        let v = Subspace::span(p, d, &basis)?;
        let f = PrimePoly::parse(&j.f_text, p, d)?;
        Self::new(m, s, h, v, f)
    }
}

impl PartialOrd for GammaElement {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Lexicographic by projection, then canonical `V` basis, then reduced shift.
impl Ord for GammaElement {
    fn cmp(&self, o: &Self) -> Ordering {
        (&self.h, &self.v, &self.f).cmp(&(&o.h, &o.v, &o.f))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaElementJson {
    pub h: Vec<u64>,
    #[serde(rename = "V_basis")]
    pub v_basis: Vec<Vec<u64>>,
    pub f_text: String,
}

/// A multiset of elements over a shared `(M, s)`, indexed by projection.
#[derive(Clone, Debug)]
pub struct GammaSet {
    m: Arc<QuadForm>,
    s: u32,
    items: Vec<GammaElement>,
    fibers: BTreeMap<FpVector, Vec<usize>>,
}

impl GammaSet {
    pub fn new(m: Arc<QuadForm>, s: u32) -> Self {
        Self {
            m,
            s,
            items: Vec::new(),
            fibers: BTreeMap::new(),
        }
    }

    pub fn from_elements(m: Arc<QuadForm>, s: u32, items: impl IntoIterator<Item = GammaElement>) -> Result<Self> {
        let mut out = Self::new(m, s);
        for x in items {
            out.push(x)?;
        }
        Ok(out)
    }

    pub fn push(&mut self, x: GammaElement) -> Result<()> {
        if *x.m != *self.m || x.s != self.s {
            return Err(Error::Invalid("element over a different (M, s)".into()));
        }
        self.fibers.entry(x.h.clone()).or_default().push(self.items.len());
        self.items.push(x);
        Ok(())
    }

    pub fn form(&self) -> &Arc<QuadForm> {
        &self.m
    }

    pub fn degree(&self) -> u32 {
        self.s
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn elements(&self) -> &[GammaElement] {
        &self.items
    }

    pub fn projections(&self) -> impl Iterator<Item = &FpVector> {
        self.fibers.keys()
    }

    /// `π^{-1}(h) ∩ X`.
    pub fn fiber(&self, h: &FpVector) -> Vec<GammaElement> {
        self.fibers
            .get(h)
            .map(|ix| ix.iter().map(|&i| self.items[i].clone()).collect())
            .unwrap_or_default()
    }

    /// Removes structural duplicates and sorts.
    pub fn dedup(&mut self) {
        let mut v = std::mem::take(&mut self.items);
        v.sort();
        v.dedup();
        self.fibers.clear();
        for (i, x) in v.iter().enumerate() {
            self.fibers.entry(x.h.clone()).or_default().push(i);
        }
        self.items = v;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

/// `A +̂ B` or `A −̂ B`, structurally deduplicated.
pub fn sumset(a: &GammaSet, b: &GammaSet, sign: Sign, budget: usize) -> Result<GammaSet> {
    if a.m != b.m || a.s != b.s {
        return Err(Error::Invalid("sumset over different (M, s)".into()));
    }
    let required = a.len() * b.len();
    if required > budget {
        return Err(Error::BudgetExceeded {
            required: required as u128,
            budget: budget as u128,
        });
    }
    let mut out: Vec<GammaElement> = a
        .items
        .par_iter()
        .map(|x| {
            b.items
                .iter()
                .map(|y| match sign {
                    Sign::Plus => x.hat_add(y),
                    Sign::Minus => x.hat_sub(y),
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    out.sort();
    out.dedup();
    GammaSet::from_elements(a.m.clone(), a.s, out)
}

/// `kA −̂ ℓA` for `k ≥ 1`.
pub fn iterated_sumset(a: &GammaSet, k: usize, l: usize, budget: usize) -> Result<GammaSet> {
    if k == 0 {
        return Err(Error::Invalid("need at least one positive summand".into()));
    }
    let mut acc = a.clone();
    acc.dedup();
    for _ in 1..k {
        acc = sumset(&acc, a, Sign::Plus, budget)?;
    }
    for _ in 0..l {
        acc = sumset(&acc, a, Sign::Minus, budget)?;
    }
    Ok(acc)
}

/// Classification of a set as a weak or strong equivalence class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClassVerdict {
    /// Two members that are not related.
    NotClass { i: usize, j: usize },
    Weak,
    /// Pairwise related with a common `Γ^s_1` witness.
    Strong { witness: GammaElement },
}

impl ClassVerdict {
    pub fn is_strong(&self) -> bool {
        matches!(self, ClassVerdict::Strong { .. })
    }

    pub fn is_class(&self) -> bool {
        !matches!(self, ClassVerdict::NotClass { .. })
    }
}

/// Searches for `f'` with `f' − f_i ∈ J^M_{span{h}+V_i}` for every member.
pub fn common_line_witness(xs: &[GammaElement]) -> Result<Option<GammaElement>> {
    let Some(first) = xs.first() else {
        return Ok(None);
    };
    let (m, s, h) = (first.m.clone(), first.s, first.h.clone());
    let (p, d) = (m.modulus(), m.dim());
    let hline = Subspace::span(p, d, std::slice::from_ref(&h))?;
    let mut system = Vec::new();
    let mut rhs = Vec::new();
    let mut ncols = 0;
    for x in xs {
        if x.h != h {
            return Ok(None);
        }
        let piece = MIdeal::new((*m).clone(), x.v.sum(&hline))?.piece(s)?;
        let coeffs = piece.coefficients(x.f.poly());
        ncols = coeffs.len();
        for row in piece.quotient_rows() {
            let b = row
                .iter()
                .zip(&coeffs)
                .fold(0, |acc, (&r, &c)| crate::field_linalg::add_mod(acc, crate::field_linalg::mul_mod(r, c, p), p));
            system.push(row);
            rhs.push(b);
        }
    }
    let piece = MIdeal::new((*m).clone(), hline.clone())?.piece(s)?;
    if system.is_empty() {
        return Ok(Some(GammaElement::new(m, s, h, hline, PrimePoly::zero(p, d))?));
    }
    Ok(solve_raw(&system, ncols, &rhs, p).map(|(x, _)| {
        GammaElement::new(m.clone(), s, h.clone(), hline.clone(), piece.from_coefficients(&x)).expect("valid witness")
    }))
}

pub fn classify_equivalence(xs: &[GammaElement]) -> Result<ClassVerdict> {
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            if !xs[i].related(&xs[j])? {
                return Ok(ClassVerdict::NotClass { i, j });
            }
        }
    }
    Ok(match common_line_witness(xs)? {
        Some(w) => {
            for x in xs {
                if !w.related(x)? {
                    return Err(Error::Invalid("strong witness failed to relate".into()));
                }
            }
            ClassVerdict::Strong { witness: w }
        }
        None => ClassVerdict::Weak,
    })
}

/// Outcome of the greedy search for subspaces independent modulo `U`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Dichotomy {
    /// Indices of `m` members independent modulo `U`.
    Independent(Vec<usize>),
    /// A subspace `W ⊇ U` with `W ∩ V ≠ U` for every member.
    Obstruction(Subspace),
}

/// Greedy extension: keep adding a member independent modulo `U` of the
/// current sum, stopping at `m` members or when every member meets the sum beyond `U`.
pub fn weak_dichotomy(spaces: &[Subspace], u: &Subspace, m: usize) -> Dichotomy {
    let mut chosen: Vec<usize> = Vec::new();
    let mut acc = u.clone();
    while chosen.len() < m {
        let next = spaces.iter().position(|v| acc.sum(v).dim() - acc.dim() == u.sum(v).dim() - u.dim());
        match next {
            Some(i) if !chosen.contains(&i) => {
                acc = acc.sum(&spaces[i]);
                chosen.push(i);
            }
            _ => return Dichotomy::Obstruction(acc),
        }
    }
    Dichotomy::Independent(chosen)
}

/// Report for the weak/strong dichotomy on one fiber.
#[derive(Clone, Debug)]
pub struct GwtsReport {
    pub h_zero: bool,
    pub k: usize,
    pub k_prime: usize,
    pub s: u32,
    pub dimension_ok: bool,
    pub weak_class: bool,
    pub branch: GwtsBranch,
    /// Dimension bound on the obstruction subspace.
    pub obstruction_bound: usize,
    /// Whether the reported branch satisfies its own claim.
    pub consistent: bool,
}

#[derive(Clone, Debug)]
pub enum GwtsBranch {
    Strong(ClassVerdict),
    Obstruction(Subspace),
}

/// Runs the dichotomy for a weak class; with `extra`, the strong-class extension variant.
pub fn gwts_check(xs: &[GammaElement], k: usize, k_prime: usize, extra: Option<&GammaElement>) -> Result<GwtsReport> {
    let first = xs.first().ok_or_else(|| Error::Invalid("empty fiber".into()))?;
    let (m, s, h) = (&first.m, first.s, first.h.clone());
    let (p, d) = (m.modulus(), m.dim());
    let h_zero = h.is_zero();
    let kk = if extra.is_some() { k_prime } else { k };
    let slack = if h_zero { 5 } else { 7 };
    let dimension_ok = d >= 2 * kk + 2 * (s as usize + 1) * k.saturating_sub(2) + slack;
    let verdict = classify_equivalence(xs)?;
    let u = if h_zero {
        Subspace::trivial(p, d)
    } else {
        Subspace::span(p, d, std::slice::from_ref(&h))?
    };
    let big_k = s as usize + kk + usize::from(!h_zero);
    let spaces: Vec<Subspace> = xs.iter().map(|x| x.v.clone()).collect();
    let member_dim = if h_zero { k.saturating_sub(1) } else { k };
    let obstruction_bound = u.dim() + big_k.saturating_sub(1) * member_dim.saturating_sub(u.dim());
    let (branch, consistent) = match weak_dichotomy(&spaces, &u, big_k) {
        Dichotomy::Obstruction(w) => {
            let ok = spaces.iter().all(|v| v.intersection(&w) != u) && w.dim() <= obstruction_bound;
            (GwtsBranch::Obstruction(w), ok)
        }
        Dichotomy::Independent(_) => {
            let v = match extra {
                None => verdict.clone(),
                Some(e) => {
                    let mut all = xs.to_vec();
                    all.push(e.clone());
                    classify_equivalence(&all)?
                }
            };
            let ok = v.is_strong();
            (GwtsBranch::Strong(v), ok)
        }
    };
    Ok(GwtsReport {
        h_zero,
        k,
        k_prime,
        s,
        dimension_ok,
        weak_class: verdict.is_class(),
        branch,
        obstruction_bound,
        consistent,
    })
}

/// The M-energy graph of `(ξ1, ξ2, ξ3, ξ4)` on `H`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub energy: u64,
    /// Edges `((h1,h2),(h3,h4))` as index quadruples into `H`.
    pub edges: Vec<[usize; 4]>,
    pub undirected: bool,
}

/// Counts quadruples with `ξ̃1(h1) −̂ ξ̃2(h2) ~ ξ̃3(h3) −̂ ξ̃4(h4)`, where `ξ̃(h) = (h, J^M_h + ξ(h))`.
pub fn m_energy(m: Arc<QuadForm>, s: u32, hs: &[FpVector], xis: [&[PrimePoly]; 4], budget: u128) -> Result<EnergyReport> {
    let n = hs.len();
    if xis.iter().any(|x| x.len() != n) {
        return Err(Error::DimensionMismatch("maps must be tabulated on H".into()));
    }
    let required = (n as u128).pow(4);
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    let lift = |xi: &[PrimePoly]| -> Result<Vec<GammaElement>> {
        hs.iter().zip(xi).map(|(h, f)| GammaElement::line(m.clone(), s, h.clone(), f.clone())).collect()
    };
    let t: Vec<Vec<GammaElement>> = xis.iter().map(|x| lift(x)).collect::<Result<_>>()?;
    let left: Vec<GammaElement> = (0..n * n).map(|ix| t[0][ix / n].hat_sub(&t[1][ix % n])).collect::<Result<_>>()?;
    let right: Vec<GammaElement> = (0..n * n).map(|ix| t[2][ix / n].hat_sub(&t[3][ix % n])).collect::<Result<_>>()?;
    let mut by_pi: BTreeMap<&FpVector, Vec<usize>> = BTreeMap::new();
    for (j, r) in right.iter().enumerate() {
        by_pi.entry(r.pi()).or_default().push(j);
    }
    let edges: Vec<[usize; 4]> = left
        .par_iter()
        .enumerate()
        .map(|(i, l)| {
            let mut out = Vec::new();
            for &j in by_pi.get(l.pi()).map(|v| v.as_slice()).unwrap_or(&[]) {
                if l.related(&right[j])? {
                    out.push([i / n, i % n, j / n, j % n]);
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(EnergyReport {
        energy: edges.len() as u64,
        edges,
        undirected: xis.windows(2).all(|w| w[0] == w[1]),
    })
}
