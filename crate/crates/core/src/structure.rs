//! Structure-obstacle pairs and decompositions, separation maps, and the
//! cube-pigeonhole extraction of Freiman subsets.

use crate::error::{Error, Result};
use crate::field_linalg::{add_mod, from_i64, mul_mod, solve_raw, symmetric, FpVector, Subspace};
use crate::freiman::{is_freiman_hom, FreimanParams, FreimanReport, MonoIndex};
use crate::mideal::MIdeal;
use crate::polyring::{HomPoly, PrimePoly};
use crate::relgraph::ObstaclePair;
use crate::quadform::QuadForm;
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

impl ObstaclePair {
    /// `({0}, ∅)` with all bounds zero.
    pub fn trivial(p: u64, dim: usize) -> Self {
        Self {
            c0: vec![PrimePoly::zero(p, dim)],
            y: Vec::new(),
            k: 0,
            c: 0,
            d: 0,
        }
    }

    /// `span ∩ Y ≠ {0}`.
    pub fn meets_obstacle(&self, span: &Subspace) -> bool {
        self.y.iter().any(|v| !v.intersection(span).is_trivial())
    }

    /// Positions of nonzero members of `C_0` lying in `J^M_V`.
    pub fn absorbed_by(&self, m: &QuadForm, v: &Subspace) -> Result<Vec<usize>> {
        let ideal = MIdeal::new(m.clone(), v.clone())?;
        let mut out = Vec::new();
        for (i, f) in self.c0.iter().enumerate() {
            if !f.is_zero() && ideal.contains(f, f.degree().unwrap_or(0))?.is_member() {
                out.push(i);
            }
        }
        Ok(out)
    }

    /// Shape check against `J^M`, at the largest degree present in `C_0`.
    pub fn validate_for(&self, m: &QuadForm) -> Result<()> {
        let s = self.c0.iter().filter_map(|f| f.degree()).max().unwrap_or(0);
        self.validate(&MIdeal::quadric(m), s)
    }
}

/// The four defining conditions of a decomposition, each evaluated on its own.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SoVerification {
    pub dimensions: bool,
    pub complementary: bool,
    pub avoids_structure: bool,
    pub avoids_obstacle: bool,
    pub nondegenerate: bool,
}

impl SoVerification {
    pub fn holds(&self) -> bool {
        self.dimensions && self.complementary && self.avoids_structure && self.avoids_obstacle && self.nondegenerate
    }
}

/// `F_p^d = T ⊕ U` with `U` avoiding `(C_0, Y)` and `M|_U` non-degenerate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SoDecomposition {
    pub t: Subspace,
    pub u: Subspace,
}

#[derive(Serialize)]
struct SoDecompositionJson<'a> {
    #[serde(rename = "T_basis")]
    t_basis: Vec<FpVector>,
    #[serde(rename = "U_basis")]
    u_basis: Vec<FpVector>,
    verification: &'a SoVerification,
}

impl SoDecomposition {
    /// Recomputes each condition from scratch.
    pub fn verify(&self, m: &QuadForm, pair: &ObstaclePair, d1: usize, d2: usize) -> Result<SoVerification> {
        let d = m.dim();
        Ok(SoVerification {
            dimensions: self.t.dim() == d1 && self.u.dim() == d2 && d1 + d2 == d,
            complementary: self.t.intersection(&self.u).is_trivial() && self.t.sum(&self.u).dim() == d,
            avoids_structure: pair.absorbed_by(m, &self.u)?.is_empty(),
            avoids_obstacle: !pair.meets_obstacle(&self.u),
            nondegenerate: m.restricted_rank_closed(&self.u) == self.u.dim(),
        })
    }

    pub fn to_json(&self, verification: &SoVerification) -> Result<String> {
        serde_json::to_string(&SoDecompositionJson {
            t_basis: self.t.basis(),
            u_basis: self.u.basis(),
            verification,
        })
        .map_err(|e| Error::Parse(e.to_string()))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectionStats {
    pub samples: u64,
    pub degenerate: u64,
    pub obstacle: u64,
    pub structure: u64,
}

impl RejectionStats {
    pub fn rejected(&self) -> u64 {
        self.degenerate + self.obstacle + self.structure
    }
}

#[derive(Clone, Debug)]
pub struct SoSearchParams {
    pub max_samples: u64,
    pub seed: u64,
    /// Candidates verified per parallel round.
    pub batch: usize,
}

impl SoSearchParams {
    pub fn new(max_samples: u64, seed: u64) -> Self {
        Self { max_samples, seed, batch: 64 }
    }
}

#[derive(Clone, Debug)]
pub struct SoSearchReport {
    pub decompositions: Vec<SoDecomposition>,
    pub verifications: Vec<SoVerification>,
    pub stats: RejectionStats,
    /// `d' ≥ max{D,3}` and `d ≥ 4`, recorded but not enforced.
    pub hypotheses_hold: bool,
    pub failure: Option<String>,
}

impl SoSearchReport {
    pub fn succeeded(&self) -> bool {
        self.failure.is_none()
    }
}

#[derive(Clone, Copy)]
enum Verdict {
    Accept,
    Degenerate,
    Obstacle,
    Structure,
}

fn random_vector<R: Rng>(p: u64, d: usize, rng: &mut R) -> FpVector {
    FpVector::from_raw(p, (0..d).map(|_| rng.gen_range(0..p)).collect())
}

/// Finds `count` decompositions with linearly independent `T`'s.
///
/// Each `T` extends the previous ones independently; each `U` is sampled as the
/// graph `{α(x)·b + x·b'}` of a random linear map `α` over a completion `b'` of a
/// basis `b` of `T`, then rejected on degeneracy, obstacle or structure.
pub fn find_so_decomposition(
    m: &QuadForm,
    pair: &ObstaclePair,
    d1: usize,
    d2: usize,
    count: usize,
    params: &SoSearchParams,
) -> Result<SoSearchReport> {
    let (p, d) = (m.modulus(), m.dim());
    if d1 + d2 != d {
        return Err(Error::Invalid(format!("d' + d'' = {} differs from d = {d}", d1 + d2)));
    }
    if count == 0 || count * d1 > d {
        return Err(Error::Invalid(format!("{count} independent subspaces of dimension {d1} do not fit in dimension {d}")));
    }
    pair.validate_for(m)?;
    let hypotheses_hold = d1 >= pair.d.max(3) && d >= 4;
    let mut report = SoSearchReport {
        decompositions: Vec::new(),
        verifications: Vec::new(),
        stats: RejectionStats::default(),
        hypotheses_hold,
        failure: None,
    };
    if let Some(i) = pair.y.iter().position(|v| v.dim() + d2 > d) {
        report.failure = Some(format!("every {d2}-dimensional subspace meets obstacle part {i} of dimension {}", pair.y[i].dim()));
        return Ok(report);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut taken = Subspace::trivial(p, d);
    for round in 0..count {
        let mut t_basis = Vec::new();
        while t_basis.len() < d1 {
            let v = random_vector(p, d, &mut rng);
            if !taken.contains(&v) {
                taken = taken.with_vector(&v);
                t_basis.push(v);
            }
        }
        let t = Subspace::span_of(p, d, &t_basis);
        let b = t.basis();
        let completion = t.extend_to_full(&[]);
        let mut found = None;
        while found.is_none() && report.stats.samples < params.max_samples {
            let n = (params.batch as u64).min(params.max_samples - report.stats.samples) as usize;
            let alphas: Vec<Vec<Vec<u64>>> = (0..n).map(|_| (0..d2).map(|_| (0..d1).map(|_| rng.gen_range(0..p)).collect()).collect()).collect();
            let verdicts: Vec<(Subspace, Verdict)> = alphas
                .par_iter()
                .map(|alpha| -> Result<(Subspace, Verdict)> {
                    let gens: Vec<FpVector> = alpha
                        .iter()
                        .zip(&completion)
                        .map(|(row, bp)| row.iter().zip(&b).fold(bp.clone(), |acc, (&a, bj)| acc.add(&bj.scale(a))))
                        .collect();
                    let u = Subspace::span_of(p, d, &gens);
                    let v = if m.restricted_rank_closed(&u) != d2 {
                        Verdict::Degenerate
                    } else if pair.meets_obstacle(&u) {
                        Verdict::Obstacle
                    } else if !pair.absorbed_by(m, &u)?.is_empty() {
                        Verdict::Structure
                    } else {
                        Verdict::Accept
                    };
                    Ok((u, v))
                })
                .collect::<Result<_>>()?;
            for (u, v) in verdicts {
                report.stats.samples += 1;
                match v {
                    Verdict::Accept => {
                        found = Some(u);
                        break;
                    }
                    Verdict::Degenerate => report.stats.degenerate += 1,
                    Verdict::Obstacle => report.stats.obstacle += 1,
                    Verdict::Structure => report.stats.structure += 1,
                }
            }
        }
        let Some(u) = found else {
            report.failure = Some(format!("no admissible U for decomposition {} within {} samples", round + 1, params.max_samples));
            return Ok(report);
        };
        let dec = SoDecomposition { t, u };
        let ver = dec.verify(m, pair, d1, d2)?;
        if !ver.holds() {
            return Err(Error::Invalid(format!("accepted decomposition failed re-verification: {ver:?}")));
        }
        report.decompositions.push(dec);
        report.verifications.push(ver);
    }
    let ts: Vec<Subspace> = report.decompositions.iter().map(|x| x.t.clone()).collect();
    if !crate::field_linalg::spaces_independent(&ts) {
        return Err(Error::Invalid("chosen T's are dependent".into()));
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Separation maps

/// `x ∈ I_{p/10}`, i.e. `10·|τ̃(x)| < p` for the symmetric residue `τ̃`.
pub fn in_tenth_interval(x: u64, p: u64) -> bool {
    10 * symmetric(x, p).unsigned_abs() < p
}

/// A linear map `Φ: F_p^k → F_p^{r+1}` stored as its coordinate rows.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparationMap {
    pub p: u64,
    pub k: usize,
    pub rows: Vec<Vec<u64>>,
}

impl SeparationMap {
    pub fn apply(&self, n: &[u64]) -> Vec<u64> {
        self.rows
            .iter()
            .map(|r| r.iter().zip(n).fold(0, |acc, (&a, &b)| add_mod(acc, mul_mod(a, b, self.p), self.p)))
            .collect()
    }

    /// `Φ(n) ∈ I_{p/10}^{r+1}`.
    pub fn in_box(&self, n: &[u64]) -> bool {
        self.apply(n).into_iter().all(|x| in_tenth_interval(x, self.p))
    }

    /// Exhaustive check over `V`: each `c ∈ J` lies in `V` or `V ∩ (c + Φ^{-1}(box)) = ∅`.
    /// Returns the first `c` (by position in `J`) that breaks the disjunction.
    pub fn violation(&self, v: &Subspace, j: &[FpVector], budget: u128) -> Result<Option<usize>> {
        let size = (self.p as u128).checked_pow(v.dim() as u32).unwrap_or(u128::MAX);
        if size.saturating_mul(j.len() as u128) > budget {
            return Err(Error::BudgetExceeded { required: size.saturating_mul(j.len() as u128), budget });
        }
        for (i, c) in j.iter().enumerate() {
            if v.contains(c) {
                continue;
            }
            if v.elements().any(|x| self.in_box(x.sub(c).coords())) {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }
}

/// Builds `Φ` one coordinate per `c_i`: zero when `c_i ∈ V`, otherwise the functional
/// vanishing on `V` and on a completing basis, with `φ_i(c_i) = −a_i` for `a_i = ⌈p/10⌉ ∉ I_{p/10}`.
/// The coordinate for `c_0 = 0` is zero.
pub fn build_separation_map(v: &Subspace, j: &[FpVector]) -> Result<SeparationMap> {
    let (p, k) = (v.modulus(), v.ambient_dim());
    let zero = j.iter().position(|c| c.is_zero()).ok_or_else(|| Error::Invalid("J must contain 0".into()))?;
    if j.iter().any(|c| c.modulus() != p || c.dim() != k) {
        return Err(Error::DimensionMismatch("J outside the ambient space of V".into()));
    }
    let a = p.div_ceil(10) % p;
    let mut order = vec![zero];
    order.extend((0..j.len()).filter(|&i| i != zero));
    let mut rows = Vec::with_capacity(j.len());
    for &i in &order {
        let c = &j[i];
        if v.contains(c) {
            rows.push(vec![0; k]);
            continue;
        }
        let vb = v.basis();
        let mut basis: Vec<FpVector> = vb.clone();
        basis.push(c.clone());
        let rest = Subspace::span_of(p, k, &basis).extend_to_full(&[]);
        basis.extend(rest);
        let rhs: Vec<u64> = (0..k).map(|t| if t == vb.len() { from_i64(-(a as i64), p) } else { 0 }).collect();
        let system: Vec<Vec<u64>> = basis.iter().map(|b| b.coords().to_vec()).collect();
        let (phi, _) = solve_raw(&system, k, &rhs, p).ok_or_else(|| Error::Invalid("basis completion failed".into()))?;
        rows.push(phi);
    }
    Ok(SeparationMap { p, k, rows })
}

// ---------------------------------------------------------------------------
// Classification of the zero fiber and subset extraction

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassificationCheck {
    pub tuples: u64,
    pub obstructed: u64,
    pub classified: u64,
    /// Indices of an unclassified 16-tuple.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<usize>>,
}

impl ClassificationCheck {
    pub fn holds(&self) -> bool {
        self.witness.is_none()
    }
}

/// Samples `(h_1..h_16)` with `h_1+⋯+h_8 = h_9+⋯+h_16` and checks that the zero-fiber
/// element `J^M_{span h} + Σξ(h_i) − Σξ(h_{8+i})` meets `Y` or is related to some `g ∈ C_0`.
pub fn classification_check(
    m: &QuadForm,
    hs: &[FpVector],
    xi: &[HomPoly],
    pair: &ObstaclePair,
    samples: u64,
    seed: u64,
) -> Result<ClassificationCheck> {
    if hs.len() != xi.len() || hs.is_empty() {
        return Err(Error::DimensionMismatch("ξ must be tabulated on a nonempty H".into()));
    }
    let (p, d) = (m.modulus(), m.dim());
    let pos: HashMap<&FpVector, usize> = hs.iter().enumerate().map(|(i, h)| (h, i)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = ClassificationCheck {
        tuples: 0,
        obstructed: 0,
        classified: 0,
        witness: None,
    };
    let n = hs.len();
    let mut attempts = 0u64;
    while out.tuples < samples && attempts < samples.saturating_mul(50).max(1) {
        attempts += 1;
        let left: Vec<usize> = (0..8).map(|_| rng.gen_range(0..n)).collect();
        let mut right = left.clone();
        let swaps = rng.gen_range(1..=4);
        let mut ok = true;
        for _ in 0..swaps {
            let i = rng.gen_range(0..8);
            let j = (i + rng.gen_range(1..8)) % 8;
            let u = rng.gen_range(0..n);
            match pos.get(&hs[right[i]].add(&hs[right[j]]).sub(&hs[u])) {
                Some(&w) => {
                    right[i] = u;
                    right[j] = w;
                }
                None => ok = false,
            }
        }
        if !ok {
            continue;
        }
        out.tuples += 1;
        let all: Vec<usize> = left.iter().chain(&right).copied().collect();
        let span = Subspace::span_of(p, d, &all.iter().map(|&i| hs[i].clone()).collect::<Vec<_>>());
        if pair.meets_obstacle(&span) {
            out.obstructed += 1;
            continue;
        }
        let omega = left.iter().fold(HomPoly::zero(p, d, xi[0].degree()), |acc, &i| acc.add(&xi[i]));
        let omega = right.iter().fold(omega, |acc, &i| acc.sub(&xi[i]));
        let ideal = MIdeal::new(m.clone(), span)?;
        let mut hit = false;
        for g in &pair.c0 {
            let diff = omega.poly().sub(g);
            if diff.is_zero() || ideal.contains(&diff, omega.degree().max(0) as u32)?.is_member() {
                hit = true;
                break;
            }
        }
        if hit {
            out.classified += 1;
        } else {
            out.witness = Some(all);
            break;
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct ExtractParams {
    pub samples: u64,
    pub seed: u64,
    pub budget: u128,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtractReport {
    /// Indices into `W`.
    pub subset: Vec<usize>,
    /// Cube coordinates `j_i ∈ 0..80`.
    pub cube: Vec<u32>,
    /// `|W'|·80^{K+1} ≥ |W|`.
    pub bound_holds: bool,
    pub separation: SeparationMap,
    pub freiman: FreimanReport,
}

/// Cube index of each coordinate: `⌊80·y/p⌋` for the standard residue `y`.
fn cube_of(v: &[u64], p: u64) -> Vec<u32> {
    v.iter().map(|&y| ((80 * y as u128) / p as u128) as u32).collect()
}

/// Pigeonholes `W` over cubes of side `p/80` in the image of `Φ∘θ∘ξ`, where `θ`
/// flattens coefficients in graded-lex order and `Φ` separates `θ(C_0)` from the
/// degree-`s` part of `J^M_V`, then spot-checks order 16 on the largest class.
pub fn extract_freiman_subset(
    m: &QuadForm,
    v: &Subspace,
    w: &[FpVector],
    xi: &[HomPoly],
    pair: &ObstaclePair,
    params: &ExtractParams,
) -> Result<ExtractReport> {
    if w.is_empty() || w.len() != xi.len() {
        return Err(Error::DimensionMismatch("ξ must be tabulated on a nonempty W".into()));
    }
    pair.validate_for(m)?;
    if let Some(i) = w.iter().position(|h| !v.contains(h)) {
        return Err(Error::HypothesisNotMet(format!("W element {} lies outside V", w[i])));
    }
    if let Some(&i) = pair.absorbed_by(m, v)?.first() {
        return Err(Error::HypothesisNotMet(format!("C_0 entry {i} lies in J^M_V")));
    }
    if pair.meets_obstacle(v) {
        return Err(Error::HypothesisNotMet("V meets Y".into()));
    }
    let (p, d) = (m.modulus(), m.dim());
    let s = xi[0].degree();
    if xi.iter().any(|f| f.degree() != s) {
        return Err(Error::Invalid("values of ξ must share one degree".into()));
    }
    let idx = MonoIndex::new(p, d, s);
    let width = idx.len();
    let vtilde = if s < 0 {
        Subspace::trivial(p, width.max(1))
    } else {
        let piece = MIdeal::new(m.clone(), v.clone())?.piece(s as u32)?;
        Subspace::from_rows(p, width, piece.rows().to_vec())
    };
    let mut jset: Vec<FpVector> = vec![FpVector::zero(p, width)];
    jset.extend(pair.c0.iter().filter(|f| !f.is_zero()).map(|f| FpVector::from_raw(p, idx.dense(f))));
    let mut separation = build_separation_map(&vtilde, &jset)?;
    while separation.rows.len() < pair.k + 1 {
        separation.rows.push(vec![0; width]);
    }
    let mut classes: BTreeMap<Vec<u32>, Vec<usize>> = BTreeMap::new();
    for (i, f) in xi.iter().enumerate() {
        classes.entry(cube_of(&separation.apply(&idx.dense(f.poly())), p)).or_default().push(i);
    }
    let (cube, subset) = classes
        .into_iter()
        .fold(None::<(Vec<u32>, Vec<usize>)>, |best, (c, members)| match best {
            Some((bc, bm)) if bm.len() >= members.len() => Some((bc, bm)),
            _ => Some((c, members)),
        })
        .expect("W is nonempty");
    let bound_holds = BigInt::from(subset.len()) * BigInt::from(80u32).pow(pair.k as u32 + 1) >= BigInt::from(w.len());
    let hs: Vec<FpVector> = subset.iter().map(|&i| w[i].clone()).collect();
    let vals: Vec<HomPoly> = subset.iter().map(|&i| xi[i].clone()).collect();
    let freiman = is_freiman_hom(
        m,
        &hs,
        &vals,
        &FreimanParams {
            order_exp: 4,
            budget: params.budget,
            samples: params.samples,
            seed: params.seed,
            sampled: true,
        },
    )?;
    Ok(ExtractReport {
        subset,
        cube,
        bound_holds,
        separation,
        freiman,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freiman::{random_hom, random_member, random_proper_gap, LocallyLinear};
    use crate::quadform::random_nondegenerate;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn pair_validation() {
        let m = QuadForm::sum_of_squares(7, 4).unwrap();
        let mut pair = ObstaclePair::trivial(7, 4);
        pair.validate_for(&m).unwrap();
        let x = PrimePoly::var(7, 4, 0);
        pair.c0.push(x.clone());
        assert!(pair.validate_for(&m).is_err());
        pair.k = 1;
        pair.validate_for(&m).unwrap();
        pair.c0.push(x.scale(1).add(&PrimePoly::zero(7, 4)));
        pair.k = 2;
        assert!(pair.validate_for(&m).is_err());
        let mut pair = ObstaclePair::trivial(7, 4);
        pair.y.push(Subspace::span_of(7, 4, &[FpVector::unit(7, 4, 0), FpVector::unit(7, 4, 1)]));
        assert!(pair.validate_for(&m).is_err());
        pair.c = 1;
        pair.d = 2;
        pair.validate_for(&m).unwrap();
    }

    #[test]
    fn trivial_pair_decomposition() {
        for p in [11, 13] {
            let m = QuadForm::sum_of_squares(p, 6).unwrap();
            let pair = ObstaclePair::trivial(p, 6);
            let rep = find_so_decomposition(&m, &pair, 3, 3, 1, &SoSearchParams::new(100_000, 1)).unwrap();
            assert!(rep.succeeded(), "{:?}", rep.failure);
            assert!(rep.hypotheses_hold);
            let dec = &rep.decompositions[0];
            assert!(dec.verify(&m, &pair, 3, 3).unwrap().holds());
            let json: serde_json::Value = serde_json::from_str(&dec.to_json(&rep.verifications[0]).unwrap()).unwrap();
            assert_eq!(json["T_basis"].as_array().unwrap().len(), 3);
            assert_eq!(json["U_basis"].as_array().unwrap().len(), 3);
        }
    }

    #[test]
    fn two_decompositions_at_boundary() {
        let m = QuadForm::sum_of_squares(11, 6).unwrap();
        let pair = ObstaclePair::trivial(11, 6);
        let rep = find_so_decomposition(&m, &pair, 3, 3, 2, &SoSearchParams::new(100_000, 2)).unwrap();
        assert!(rep.succeeded());
        let t = &rep.decompositions;
        assert!(t[0].t.intersection(&t[1].t).is_trivial());
        assert_eq!(t[0].t.sum(&t[1].t).dim(), 6);
    }

    #[test]
    fn hyperplane_obstacle_fails_with_reason() {
        let m = QuadForm::sum_of_squares(11, 6).unwrap();
        let mut pair = ObstaclePair::trivial(11, 6);
        pair.y.push(Subspace::span_of(11, 6, &(0..5).map(|i| FpVector::unit(11, 6, i)).collect::<Vec<_>>()));
        pair.c = 1;
        pair.d = 5;
        let rep = find_so_decomposition(&m, &pair, 3, 3, 1, &SoSearchParams::new(1000, 3)).unwrap();
        assert!(!rep.succeeded());
        assert!(!rep.hypotheses_hold);
        assert!(rep.failure.unwrap().contains("obstacle"));
    }

    #[test]
    fn infeasible_dimensions_error() {
        let m = QuadForm::sum_of_squares(11, 6).unwrap();
        let pair = ObstaclePair::trivial(11, 6);
        assert!(find_so_decomposition(&m, &pair, 3, 2, 1, &SoSearchParams::new(10, 0)).is_err());
        assert!(find_so_decomposition(&m, &pair, 3, 3, 3, &SoSearchParams::new(10, 0)).is_err());
    }

    #[test]
    fn structure_rejections_counted() {
        let (p, d) = (7, 6);
        let m = QuadForm::sum_of_squares(p, d).unwrap();
        let mut pair = ObstaclePair::trivial(p, d);
        pair.c0.push(PrimePoly::var(p, d, 0));
        pair.k = 1;
        let rep = find_so_decomposition(&m, &pair, 3, 3, 1, &SoSearchParams::new(100_000, 4)).unwrap();
        assert!(rep.succeeded());
        assert!(rep.verifications[0].avoids_structure);
    }

    #[test]
    fn separation_examples() {
        let p = 11;
        let v = Subspace::span_of(p, 3, &[FpVector::unit(p, 3, 0)]);
        let zero = FpVector::zero(p, 3);
        let only_zero = build_separation_map(&v, &[zero.clone()]).unwrap();
        assert_eq!(only_zero.violation(&v, &[zero.clone()], 1 << 20).unwrap(), None);
        let e2 = FpVector::unit(p, 3, 1);
        let j = [zero.clone(), e2.clone()];
        let phi = build_separation_map(&v, &j).unwrap();
        assert_eq!(phi.rows.len(), 2);
        for x in v.elements() {
            assert!(!phi.in_box(x.sub(&e2).coords()));
        }
        let e1 = FpVector::unit(p, 3, 0);
        let phi = build_separation_map(&v, &[zero.clone(), e1.clone(), e2.clone()]).unwrap();
        assert_eq!(phi.violation(&v, &[zero, e1, e2], 1 << 20).unwrap(), None);
        assert!(build_separation_map(&v, &[FpVector::unit(p, 3, 2)]).is_err());
    }

    #[test]
    fn tenth_interval() {
        // p = 11: I_{1.1} = {0, ±1}
        assert!(in_tenth_interval(0, 11) && in_tenth_interval(1, 11) && in_tenth_interval(10, 11));
        assert!(!in_tenth_interval(2, 11) && !in_tenth_interval(9, 11));
        assert_eq!((1..101).filter(|&x| in_tenth_interval(x, 101)).count(), 20);
    }

    #[test]
    fn extraction_of_zero_map() {
        let (p, d) = (11, 4);
        let m = QuadForm::sum_of_squares(p, d).unwrap();
        let v = Subspace::full(p, d);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let w: Vec<FpVector> = (0..20).map(|_| random_vector(p, d, &mut rng)).collect();
        let xi = vec![HomPoly::zero(p, d, 1); 20];
        let pair = ObstaclePair::trivial(p, d);
        let rep = extract_freiman_subset(&m, &v, &w, &xi, &pair, &ExtractParams { samples: 100, seed: 1, budget: 1 << 20 }).unwrap();
        assert_eq!(rep.subset.len(), 20);
        assert!(rep.bound_holds && rep.freiman.holds());
    }

    #[test]
    fn extraction_of_locally_linear_map() {
        let (p, d) = (31, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = random_nondegenerate(p, d, &mut rng);
        let gap = random_proper_gap(p, d, 2, 3, &mut rng).unwrap();
        let w = gap.elements(1 << 20).unwrap();
        let xi = LocallyLinear::random(p, d, 2, 1, &mut rng).tabulate(&gap);
        let pair = ObstaclePair::trivial(p, d);
        let cls = classification_check(&m, &w, &xi, &pair, 200, 3).unwrap();
        assert!(cls.holds() && cls.tuples > 0);
        let rep = extract_freiman_subset(&m, &Subspace::full(p, d), &w, &xi, &pair, &ExtractParams { samples: 300, seed: 2, budget: 1 << 20 }).unwrap();
        assert!(rep.bound_holds);
        assert!(rep.freiman.holds());
    }

    #[test]
    fn extraction_preconditions() {
        let (p, d) = (11, 4);
        let m = QuadForm::sum_of_squares(p, d).unwrap();
        let x0 = PrimePoly::var(p, d, 0);
        let mut pair = ObstaclePair::trivial(p, d);
        pair.c0.push(x0);
        pair.k = 1;
        let v = Subspace::span_of(p, d, &[FpVector::unit(p, d, 0)]);
        let w = vec![FpVector::unit(p, d, 0)];
        let xi = vec![HomPoly::zero(p, d, 1)];
        let params = ExtractParams { samples: 10, seed: 0, budget: 1 << 20 };
        assert!(matches!(extract_freiman_subset(&m, &v, &w, &xi, &pair, &params), Err(Error::HypothesisNotMet(_))));
        let outside = vec![FpVector::unit(p, d, 1)];
        let small = Subspace::span_of(p, d, &[FpVector::unit(p, d, 2)]);
        assert!(matches!(extract_freiman_subset(&m, &small, &outside, &xi, &ObstaclePair::trivial(p, d), &params), Err(Error::HypothesisNotMet(_))));
    }

    #[test]
    fn classification_detects_bad_pair() {
        let (p, d) = (13, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random_nondegenerate(p, d, &mut rng);
        let gap = random_proper_gap(p, d, 2, 2, &mut rng).unwrap();
        let w = gap.elements(1 << 20).unwrap();
        let xi: Vec<HomPoly> = w.iter().map(|_| random_hom(p, d, 1, &mut rng)).collect();
        let pair = ObstaclePair::trivial(p, d);
        let cls = classification_check(&m, &w, &xi, &pair, 500, 1).unwrap();
        assert!(!cls.holds());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn separation_disjunction(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = [5u64, 7, 11][rng.gen_range(0..3)];
            let k = rng.gen_range(2..=4);
            let gens: Vec<FpVector> = (0..rng.gen_range(0..k)).map(|_| random_vector(p, k, &mut rng)).collect();
            let v = Subspace::span_of(p, k, &gens);
            let mut j = vec![FpVector::zero(p, k)];
            j.extend((0..rng.gen_range(0..4)).map(|_| random_vector(p, k, &mut rng)));
            if let Some(x) = v.basis().first() {
                j.push(x.clone());
            }
            let phi = build_separation_map(&v, &j).unwrap();
            prop_assert_eq!(phi.violation(&v, &j, 1 << 24).unwrap(), None);
        }

        #[test]
        fn member_noise_keeps_classification(seed in any::<u64>()) {
            let (p, d) = (11, 4);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_nondegenerate(p, d, &mut rng);
            let gap = random_proper_gap(p, d, 2, 2, &mut rng).unwrap();
            let w = gap.elements(1 << 20).unwrap();
            let t = LocallyLinear::random(p, d, 2, 1, &mut rng).tabulate(&gap);
            let xi: Vec<HomPoly> = t.iter().zip(&w).map(|(f, h)| f.add(&random_member(&MIdeal::of_vectors(&m, std::slice::from_ref(h)).unwrap(), 1, &mut rng).unwrap())).collect();
            let cls = classification_check(&m, &w, &xi, &ObstaclePair::trivial(p, d), 30, seed).unwrap();
            prop_assert!(cls.holds());
        }
    }
}
