//! M-ideals `J^M_V = ⟨(nA)·n, (hA)·n : h ∈ V⟩` and graded membership.
//!
//! Both generator families are homogeneous, so `J^M_V ∩ {deg ≤ s}` splits into
//! homogeneous pieces, each spanned by generator-times-monomial products of the
//! matching degree. Membership is linear algebra inside one piece at a time.

use crate::error::{Error, Result};
use crate::field_linalg::{
    add_mod, inv_mod, mul_mod, spaces_independent, sub_mod, FpVector, Subspace,
};
use crate::polyring::{monomials_of_degree, Monomial, PrimePoly};
use crate::quadform::QuadForm;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

/// An M-ideal, keyed by the form and a canonical subspace.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MIdeal {
    m: QuadForm,
    v: Subspace,
}

impl MIdeal {
    pub fn new(m: QuadForm, v: Subspace) -> Result<Self> {
        if v.modulus() != m.modulus() || v.ambient_dim() != m.dim() {
            return Err(Error::DimensionMismatch("subspace and form disagree on (p, d)".into()));
        }
        Ok(Self { m, v })
    }

    pub fn of_vectors(m: &QuadForm, hs: &[FpVector]) -> Result<Self> {
        Self::new(m.clone(), Subspace::span(m.modulus(), m.dim(), hs)?)
    }

    /// `J^M`, the ideal generated by the quadric alone.
    pub fn quadric(m: &QuadForm) -> Self {
        Self {
            m: m.clone(),
            v: Subspace::trivial(m.modulus(), m.dim()),
        }
    }

    pub fn form(&self) -> &QuadForm {
        &self.m
    }

    pub fn subspace(&self) -> &Subspace {
        &self.v
    }

    /// `J^M_V + J^M_{V'} = J^M_{V+V'}`.
    pub fn sum(&self, o: &Self) -> Self {
        assert_eq!(self.m, o.m, "different forms");
        Self {
            m: self.m.clone(),
            v: self.v.sum(&o.v),
        }
    }

    fn check_form(&self) -> Result<()> {
        if !self.m.is_homogeneous() {
            return Err(Error::Unsupported("graded membership needs a homogeneous form".into()));
        }
        Ok(())
    }

    /// Homogeneous piece `J^M_V ∩ HP_d(t)`.
    pub fn piece(&self, t: u32) -> Result<Arc<DegreePiece>> {
        self.check_form()?;
        Ok(cached_piece(self, t))
    }

    pub fn graded_basis(&self, s: u32) -> Result<GradedIdealBasis> {
        let pieces = (0..=s).map(|t| self.piece(t)).collect::<Result<Vec<_>>>()?;
        Ok(GradedIdealBasis {
            ideal: self.clone(),
            s,
            pieces,
        })
    }

    /// Membership with a certificate for positive answers.
    pub fn contains(&self, f: &PrimePoly, s_hint: u32) -> Result<Membership> {
        if !f.has_degree_at_most(s_hint as i64) {
            return Err(Error::Invalid(format!("polynomial degree exceeds hint {s_hint}")));
        }
        self.check_form()?;
        let raw = self.contains_unmutated(f)?;
        let flipped = mutation::observe();
        Ok(match (raw, flipped) {
            (Some(cert), false) => Membership::Member(cert),
            (None, false) => Membership::NonMember,
            (Some(_), true) => Membership::NonMember,
            (None, true) => Membership::Member(Certificate::empty(self)),
        })
    }

    /// Boolean membership.
    pub fn is_member(&self, f: &PrimePoly) -> Result<bool> {
        let s = f.degree().unwrap_or(0);
        Ok(self.contains(f, s)?.is_member())
    }

    fn contains_unmutated(&self, f: &PrimePoly) -> Result<Option<Certificate>> {
        let mut cert = Certificate::empty(self);
        let Some(top) = f.degree() else {
            return Ok(Some(cert));
        };
        for t in 0..=top {
            let comp = f.homogeneous_component(t as i64);
            if comp.is_zero() {
                continue;
            }
            let piece = cached_piece(self, t);
            match piece.express(comp.poly()) {
                Some(part) => cert.absorb(part),
                None => return Ok(None),
            }
        }
        Ok(Some(cert))
    }

    /// Decomposition `f = M·P_0 + Σ ((h_iA)·n)·P_i` over the canonical basis `h_i` of `V`.
    pub fn decompose(&self, f: &PrimePoly) -> Result<Option<Certificate>> {
        self.check_form()?;
        let cert = self.contains_unmutated(f)?;
        if let Some(c) = &cert {
            if !c.verify(self, f) {
                return Err(Error::Invalid("certificate failed re-verification".into()));
            }
        }
        Ok(cert)
    }

    /// Normal form of a homogeneous degree-`t` polynomial modulo the piece of degree `t`.
    pub fn normal_form(&self, f: &PrimePoly, t: u32) -> Result<PrimePoly> {
        self.check_form()?;
        if !f.is_homogeneous_of(t as i64) {
            return Err(Error::Invalid(format!("normal form expects degree {t} homogeneous input")));
        }
        Ok(cached_piece(self, t).reduce(f))
    }

    /// Linear forms `(h_iA)·n` for the canonical basis `h_i` of `V`.
    pub fn linear_generators(&self) -> Vec<PrimePoly> {
        self.v.basis().iter().map(|h| self.m.bilinear_form(h)).collect()
    }

    /// Points of `Z_V = V(M) ∩ V^⊥`, the common zeros of all generators.
    pub fn zero_set(&self, budget: u128) -> Result<Vec<FpVector>> {
        let mut out = Vec::new();
        self.scan_zero_set(budget, |n| {
            out.push(n.clone());
            true
        })?;
        Ok(out)
    }

    /// Vanishing oracle: whether `f` is zero on every point of `Z_V`.
    pub fn vanishes_on_zero_set(&self, f: &PrimePoly, budget: u128) -> Result<bool> {
        let mut all = true;
        self.scan_zero_set(budget, |n| {
            if f.eval_raw(n.coords()) != 0 {
                all = false;
                return false;
            }
            true
        })?;
        Ok(all)
    }

    fn scan_zero_set(&self, budget: u128, mut visit: impl FnMut(&FpVector) -> bool) -> Result<()> {
        let perp = self.m.perp(&self.v);
        let required = (self.m.modulus() as u128).pow(perp.dim() as u32);
        if required > budget {
            return Err(Error::BudgetExceeded { required, budget });
        }
        let basis = perp.basis();
        let p = self.m.modulus();
        let d = self.m.dim();
        let q = self.m.restrict(&basis, &FpVector::zero(p, d));
        let k = basis.len();
        if k == 0 {
            visit(&FpVector::zero(p, d));
            return Ok(());
        }
        for t in crate::field_linalg::all_vectors(p, k) {
            if q.eval_raw(t.coords()) != 0 {
                continue;
            }
            if !visit(&perp.combine(t.coords())) {
                break;
            }
        }
        Ok(())
    }
}

/// Result of a membership query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Membership {
    Member(Certificate),
    NonMember,
}

impl Membership {
    pub fn is_member(&self) -> bool {
        matches!(self, Membership::Member(_))
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        match self {
            Membership::Member(c) => Some(c),
            Membership::NonMember => None,
        }
    }
}

/// `f = M·p0 + Σ g_i·pis[i]` with `g_i = (basis[i]A)·n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub p0: PrimePoly,
    pub pis: Vec<PrimePoly>,
    pub basis: Vec<FpVector>,
}

impl Certificate {
    fn empty(i: &MIdeal) -> Self {
        let (p, d) = (i.m.modulus(), i.m.dim());
        let basis = i.v.basis();
        Self {
            p0: PrimePoly::zero(p, d),
            pis: vec![PrimePoly::zero(p, d); basis.len()],
            basis,
        }
    }

    fn absorb(&mut self, o: Certificate) {
        self.p0 = self.p0.add(&o.p0);
        for (a, b) in self.pis.iter_mut().zip(&o.pis) {
            *a = a.add(b);
        }
    }

    /// Recombines the certificate and compares with `f`.
    pub fn recombine(&self, m: &QuadForm) -> PrimePoly {
        let mut acc = m.to_poly().mul_with_cap(&self.p0, u32::MAX).expect("uncapped");
        for (h, pi) in self.basis.iter().zip(&self.pis) {
            acc = acc.add(&m.bilinear_form(h).mul_with_cap(pi, u32::MAX).expect("uncapped"));
        }
        acc
    }

    pub fn verify(&self, i: &MIdeal, f: &PrimePoly) -> bool {
        self.basis == i.v.basis() && &self.recombine(&i.m) == f
    }
}

/// Which generator a spanning product uses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenLabel {
    /// 0 for the quadric, `i + 1` for the `i`-th linear generator.
    pub which: usize,
    pub mult: Monomial,
}

/// Reduced row echelon basis of `J^M_V ∩ HP_d(t)` with generator bookkeeping.
#[derive(Debug)]
pub struct DegreePiece {
    p: u64,
    d: usize,
    t: u32,
    k: usize,
    monos: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
    gens: Vec<GenLabel>,
    rows: Vec<Vec<u64>>,
    pivots: Vec<usize>,
    combos: Vec<Vec<u64>>,
}

impl DegreePiece {
    fn build(i: &MIdeal, t: u32) -> Self {
        let (p, d) = (i.m.modulus(), i.m.dim());
        let monos = monomials_of_degree(d, t);
        let index: HashMap<Monomial, usize> = monos.iter().cloned().enumerate().map(|(j, m)| (m, j)).collect();
        let quad = i.m.to_poly();
        let lins = i.linear_generators();
        let mut gens = Vec::new();
        let mut mat: Vec<Vec<u64>> = Vec::new();
        let mut push = |which: usize, g: &PrimePoly, mult: Monomial, gens: &mut Vec<GenLabel>| {
            let prod = g.mul_monomial(&mult, 1);
            let mut row = vec![0u64; monos.len()];
            for (m, &c) in prod.terms() {
                row[index[m]] = c;
            }
            mat.push(row);
            gens.push(GenLabel { which, mult });
        };
        if t >= 2 {
            for mult in monomials_of_degree(d, t - 2) {
                push(0, &quad, mult, &mut gens);
            }
        }
        if t >= 1 {
            for (li, g) in lins.iter().enumerate() {
                for mult in monomials_of_degree(d, t - 1) {
                    push(li + 1, g, mult, &mut gens);
                }
            }
        }
        let (rows, pivots, combos) = rref_tracked(mat, monos.len(), p);
        Self {
            p,
            d,
            t,
            k: lins.len(),
            monos,
            index,
            gens,
            rows,
            pivots,
            combos,
        }
    }

    pub fn degree(&self) -> u32 {
        self.t
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monos
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }

    fn dense(&self, f: &PrimePoly) -> Vec<u64> {
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

    /// Eliminates pivots; returns the residual and the generator coefficients used.
    fn eliminate(&self, f: &PrimePoly) -> (Vec<u64>, Vec<u64>) {
        let p = self.p;
        let mut x = self.dense(f);
        let mut used = vec![0u64; self.gens.len()];
        for ((row, &col), combo) in self.rows.iter().zip(&self.pivots).zip(&self.combos) {
            let c = x[col];
            if c == 0 {
                continue;
            }
            for (a, &b) in x.iter_mut().zip(row).skip(col) {
                *a = sub_mod(*a, mul_mod(c, b, p), p);
            }
            for (a, &b) in used.iter_mut().zip(combo) {
                *a = add_mod(*a, mul_mod(c, b, p), p);
            }
        }
        (x, used)
    }

    /// Rows of the linear map sending a coefficient vector to its residual
    /// coordinates at the non-pivot monomials.
    pub fn quotient_rows(&self) -> Vec<Vec<u64>> {
        let n = self.monos.len();
        let mut is_pivot = vec![false; n];
        for &c in &self.pivots {
            is_pivot[c] = true;
        }
        (0..n)
            .filter(|&c| !is_pivot[c])
            .map(|c| {
                let mut row = vec![0u64; n];
                row[c] = 1;
                for (r, &pc) in self.rows.iter().zip(&self.pivots) {
                    row[pc] = crate::field_linalg::neg_mod(r[c], self.p);
                }
                row
            })
            .collect()
    }

    /// Dense coefficient vector of a degree-`t` homogeneous polynomial.
    pub fn coefficients(&self, f: &PrimePoly) -> Vec<u64> {
        self.dense(f)
    }

    /// Polynomial with the given coefficient vector over this degree's monomials.
    pub fn from_coefficients(&self, v: &[u64]) -> PrimePoly {
        self.sparse(v)
    }

    /// Canonical representative of `f` modulo this piece.
    pub fn reduce(&self, f: &PrimePoly) -> PrimePoly {
        self.sparse(&self.eliminate(f).0)
    }

    pub fn contains(&self, f: &PrimePoly) -> bool {
        self.eliminate(f).0.iter().all(|&c| c == 0)
    }

    fn express(&self, f: &PrimePoly) -> Option<Certificate> {
        let (res, used) = self.eliminate(f);
        if res.iter().any(|&c| c != 0) {
            return None;
        }
        let mut p0 = PrimePoly::zero(self.p, self.d);
        let mut pis = vec![PrimePoly::zero(self.p, self.d); self.k];
        for (g, &c) in self.gens.iter().zip(&used) {
            if c == 0 {
                continue;
            }
            let target = if g.which == 0 { &mut p0 } else { &mut pis[g.which - 1] };
            target.add_term(g.mult.clone(), c);
        }
        Some(Certificate {
            p0,
            pis,
            basis: Vec::new(),
        })
    }
}

/// RREF over the first `ncols` columns, tracking each surviving row as a
/// combination of the input rows.
fn rref_tracked(mut mat: Vec<Vec<u64>>, ncols: usize, p: u64) -> (Vec<Vec<u64>>, Vec<usize>, Vec<Vec<u64>>) {
    let n = mat.len();
    let mut combos: Vec<Vec<u64>> = (0..n)
        .map(|i| {
            let mut c = vec![0u64; n];
            c[i] = 1;
            c
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        if r == n {
            break;
        }
        let Some(sel) = (r..n).find(|&i| mat[i][col] != 0) else {
            continue;
        };
        mat.swap(r, sel);
        combos.swap(r, sel);
        let inv = inv_mod(mat[r][col], p);
        for x in mat[r].iter_mut() {
            *x = mul_mod(*x, inv, p);
        }
        for x in combos[r].iter_mut() {
            *x = mul_mod(*x, inv, p);
        }
        let prow = mat[r].clone();
        let pcombo = combos[r].clone();
        for i in 0..n {
            if i == r || mat[i][col] == 0 {
                continue;
            }
            let f = mat[i][col];
            for (a, &b) in mat[i].iter_mut().zip(&prow).skip(col) {
                *a = sub_mod(*a, mul_mod(f, b, p), p);
            }
            for (a, &b) in combos[i].iter_mut().zip(&pcombo) {
                *a = sub_mod(*a, mul_mod(f, b, p), p);
            }
        }
        pivots.push(col);
        r += 1;
    }
    mat.truncate(r);
    combos.truncate(r);
    (mat, pivots, combos)
}

type PieceKey = (QuadForm, Subspace, u32);

fn cache() -> &'static RwLock<HashMap<PieceKey, Arc<DegreePiece>>> {
    static CACHE: OnceLock<RwLock<HashMap<PieceKey, Arc<DegreePiece>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

const CACHE_LIMIT: usize = 50_000;

fn cached_piece(i: &MIdeal, t: u32) -> Arc<DegreePiece> {
    let key = (i.m.clone(), i.v.clone(), t);
    if let Some(hit) = cache().read().expect("cache lock").get(&key) {
        return hit.clone();
    }
    let built = Arc::new(DegreePiece::build(i, t));
    let mut w = cache().write().expect("cache lock");
    if w.len() >= CACHE_LIMIT {
        w.clear();
    }
    w.entry(key).or_insert(built).clone()
}

/// `J^M_V ∩ {deg ≤ s}` as a direct sum of homogeneous pieces.
#[derive(Debug, Clone)]
pub struct GradedIdealBasis {
    ideal: MIdeal,
    s: u32,
    pieces: Vec<Arc<DegreePiece>>,
}

impl GradedIdealBasis {
    pub fn ideal(&self) -> &MIdeal {
        &self.ideal
    }

    pub fn degree_cap(&self) -> u32 {
        self.s
    }

    pub fn pieces(&self) -> &[Arc<DegreePiece>] {
        &self.pieces
    }

    pub fn dim(&self) -> usize {
        self.pieces.iter().map(|p| p.dim()).sum()
    }

    /// Basis polynomials, piece by piece.
    pub fn basis_polys(&self) -> Vec<PrimePoly> {
        self.pieces
            .iter()
            .flat_map(|pc| pc.rows.iter().map(move |r| pc.sparse(r)))
            .collect()
    }

    pub fn contains(&self, f: &PrimePoly) -> bool {
        if !f.has_degree_at_most(self.s as i64) {
            return false;
        }
        self.pieces
            .iter()
            .all(|pc| pc.contains(f.homogeneous_component(pc.t as i64).poly()))
    }

    /// Row-space inclusion of one graded basis in another.
    pub fn is_subspace_of(&self, o: &Self) -> bool {
        self.basis_polys().iter().all(|f| o.contains(f))
    }
}

/// Mutual containment of the two generator conventions, compared on leading forms.
///
/// For each `h` in a basis of `V` and each monomial `q` of degree `s−1`, the
/// top-degree part of `L_h·q` is `2((hA)·n)·q`; it must lie in the graded
/// basis, and each `((hA)·n)·q` must be half the top part of some `L_h·q`.
/// The full products agree only when `M(h) = 0`; that flag is reported.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorComparison {
    pub leading_forms_agree: bool,
    pub difference_forms_inside: bool,
}

pub fn compare_generator_conventions(i: &MIdeal, s: u32) -> Result<GeneratorComparison> {
    let basis = i.graded_basis(s)?;
    let p = i.m.modulus();
    let d = i.m.dim();
    let two_inv = inv_mod(2, p);
    let mut leading = true;
    let mut inside = true;
    if s >= 1 {
        for h in i.v.basis() {
            let l = i.m.difference_form(&h);
            let g = i.m.bilinear_form(&h);
            for q in monomials_of_degree(d, s - 1) {
                let prod = l.mul_monomial(&q, 1);
                let top = prod.homogeneous_component(s as i64).into_poly();
                leading &= basis.contains(&top);
                leading &= top.scale(two_inv) == g.mul_monomial(&q, 1);
                inside &= basis.contains(&prod);
            }
        }
    }
    Ok(GeneratorComparison {
        leading_forms_agree: leading,
        difference_forms_inside: inside,
    })
}

/// Outcome of the subspace intersection check `⋂(V+V_i) = V`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubspaceIntersectionReport {
    pub independent: bool,
    pub hypothesis_met: bool,
    pub intersection_dim: usize,
    pub equals_core: bool,
}

pub fn verify_intersection_subspaces(v: &Subspace, vs: &[Subspace]) -> SubspaceIntersectionReport {
    let independent = spaces_independent(vs);
    let mut acc = Subspace::full(v.modulus(), v.ambient_dim());
    for vi in vs {
        acc = acc.intersection(&v.sum(vi));
    }
    if vs.is_empty() {
        acc = Subspace::full(v.modulus(), v.ambient_dim());
    }
    SubspaceIntersectionReport {
        independent,
        hypothesis_met: independent && vs.len() >= v.dim() + 2,
        intersection_dim: acc.dim(),
        equals_core: acc == *v,
    }
}

/// Which independence pattern the ideal intersection statement assumes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IntersectionVariant {
    /// `V, V_1..V_N` jointly independent, `N ≥ s+1`.
    Strong,
    /// Only `V_1..V_N` independent, `N ≥ s+m+1`.
    Weak,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdealIntersectionReport {
    pub variant: IntersectionVariant,
    pub n: usize,
    pub m: usize,
    pub r: usize,
    pub independence_ok: bool,
    pub count_ok: bool,
    pub rank_on_perp: usize,
    pub rank_ok: bool,
    pub hypothesis_met: bool,
    pub in_all_shifted: bool,
    pub in_core: bool,
    /// `in_all_shifted == in_core`.
    pub biconditional_holds: bool,
}

/// Evaluates both sides of `f ∈ ⋂ J^M_{V+V_i} ⇔ f ∈ J^M_V` and the hypotheses.
pub fn verify_intersection_ideals(
    m: &QuadForm,
    v: &Subspace,
    vs: &[Subspace],
    f: &PrimePoly,
    s: u32,
    variant: IntersectionVariant,
) -> Result<IdealIntersectionReport> {
    let n = vs.len();
    let mdim = v.dim();
    let r = vs.iter().map(|x| x.dim()).max().unwrap_or(0);
    let independence_ok = match variant {
        IntersectionVariant::Strong => {
            let mut all = vec![v.clone()];
            all.extend(vs.iter().cloned());
            spaces_independent(&all)
        }
        IntersectionVariant::Weak => spaces_independent(vs),
    };
    let count_ok = match variant {
        IntersectionVariant::Strong => n >= s as usize + 1,
        IntersectionVariant::Weak => n >= s as usize + mdim + 1,
    };
    let rank_on_perp = m.rank_on_perp(v);
    let need = 2 * n * r.saturating_sub(1) + 7;
    let rank_ok = rank_on_perp >= need || m.dim() >= 2 * mdim + need;
    let core = MIdeal::new(m.clone(), v.clone())?;
    let mut in_all = true;
    for vi in vs {
        let iv = MIdeal::new(m.clone(), v.sum(vi))?;
        if !iv.contains(f, s)?.is_member() {
            in_all = false;
            break;
        }
    }
    let in_core = core.contains(f, s)?.is_member();
    Ok(IdealIntersectionReport {
        variant,
        n,
        m: mdim,
        r,
        independence_ok,
        count_ok,
        rank_on_perp,
        rank_ok,
        hypothesis_met: m.is_non_degenerate() && independence_ok && count_ok && rank_ok,
        in_all_shifted: in_all,
        in_core,
        biconditional_holds: in_all == in_core,
    })
}

/// Report for the density form of the intersection property.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrmReport {
    pub dimension_ok: bool,
    pub tuples_checked: usize,
    /// A tuple where `f ∉ J^M_{span{h}+V}`, if one was found.
    pub hypothesis_witness: Option<Vec<FpVector>>,
    pub hypothesis_holds: bool,
    pub conclusion: bool,
    /// False only if the hypothesis held on every tested tuple but the conclusion failed.
    pub implication_ok: bool,
}

/// Parameters for [`verify_grm`].
#[derive(Clone, Debug)]
pub struct GrmParams {
    pub m: usize,
    pub s: u32,
    pub d_prime: usize,
    pub tuples: usize,
    pub seed: u64,
}

/// Tests the hypothesis over sampled admissible `m`-tuples from `points` and the conclusion `f ∈ J^M_V`.
pub fn verify_grm(
    form: &QuadForm,
    v: &Subspace,
    us: &[Subspace],
    points: &[FpVector],
    f: &PrimePoly,
    params: &GrmParams,
) -> Result<GrmReport> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let udim = us.iter().map(|u| u.dim()).max().unwrap_or(0);
    let vd = v.dim();
    let dimension_ok =
        params.d_prime >= (vd + params.m + params.s as usize).max(udim + vd + params.m).max(2 * vd + 2 * params.m + 5);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(params.seed);
    let mut checked = 0;
    let mut witness = None;
    let mut attempts = 0;
    let (p, d) = (form.modulus(), form.dim());
    let mut with_zero = vec![Subspace::trivial(p, d)];
    with_zero.extend(us.iter().cloned());
    while checked < params.tuples && attempts < params.tuples * 50 && !points.is_empty() {
        attempts += 1;
        let hs: Vec<FpVector> = (0..params.m).map(|_| points.choose(&mut rng).expect("nonempty").clone()).collect();
        let admissible = with_zero.iter().all(|u| {
            let mut items: Vec<crate::field_linalg::TupleItem> =
                hs.iter().cloned().map(crate::field_linalg::TupleItem::Vector).collect();
            items.push(crate::field_linalg::TupleItem::Space(u.clone()));
            items.push(crate::field_linalg::TupleItem::Space(v.clone()));
            crate::field_linalg::is_independent_tuple(&items, None).unwrap_or(false)
        });
        if !admissible {
            continue;
        }
        checked += 1;
        let ideal = MIdeal::new(form.clone(), Subspace::span(p, d, &hs)?.sum(v))?;
        if !ideal.contains(f, params.s)?.is_member() {
            witness = Some(hs);
            break;
        }
    }
    let conclusion = MIdeal::new(form.clone(), v.clone())?.contains(f, params.s)?.is_member();
    let hypothesis_holds = witness.is_none();
    Ok(GrmReport {
        dimension_ok,
        tuples_checked: checked,
        hypothesis_witness: witness,
        hypothesis_holds,
        conclusion,
        implication_ok: !(hypothesis_holds && dimension_ok && !conclusion),
    })
}

/// Process-wide hook that flips one membership answer, for mutation smoke tests.
pub mod mutation {
    use std::sync::atomic::{AtomicU64, Ordering};

    const OFF: u64 = u64::MAX;
    static FLIP_AT: AtomicU64 = AtomicU64::new(OFF);
    static SEEN: AtomicU64 = AtomicU64::new(0);

    /// Flip the answer of the `index`-th membership query from now on.
    pub fn arm(index: u64) {
        SEEN.store(0, Ordering::SeqCst);
        FLIP_AT.store(index, Ordering::SeqCst);
    }

    pub fn disarm() {
        FLIP_AT.store(OFF, Ordering::SeqCst);
        SEEN.store(0, Ordering::SeqCst);
    }

    pub(super) fn observe() -> bool {
        let at = FLIP_AT.load(Ordering::Relaxed);
        if at == OFF {
            return false;
        }
        SEEN.fetch_add(1, Ordering::SeqCst) == at
    }
}
