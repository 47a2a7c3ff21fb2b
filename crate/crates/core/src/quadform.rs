//! Quadratic forms `M(n) = (nA)·n + n·u + v` over F_p and exact point counts.

use crate::error::{Error, Result};
use crate::field_linalg::{
    add_mod, all_vectors, check_modulus, kernel, mul_mod, rank, solve_raw, FpScalar, FpVector, Subspace,
};
use crate::polyring::{Monomial, PrimePoly};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Quadratic form with symmetric matrix `A`, linear part `u` and constant `v`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "QuadFormJson", into = "QuadFormJson")]
pub struct QuadForm {
    p: u64,
    d: usize,
    a: Vec<Vec<u64>>,
    u: Vec<u64>,
    v: u64,
}

#[derive(Serialize, Deserialize)]
struct QuadFormJson {
    p: u64,
    d: usize,
    #[serde(rename = "A")]
    a: Vec<Vec<u64>>,
    u: Vec<u64>,
    v: u64,
}

impl TryFrom<QuadFormJson> for QuadForm {
    type Error = Error;
    fn try_from(j: QuadFormJson) -> Result<Self> {
        if j.a.len() != j.d {
            return Err(Error::DimensionMismatch(format!("A has {} rows, d = {}", j.a.len(), j.d)));
        }
        if j.a.iter().flatten().chain(&j.u).chain([&j.v]).any(|&x| x >= j.p) {
            return Err(Error::Invalid("entries must be residues in [0, p)".into()));
        }
        QuadForm::new(j.p, j.a, j.u, j.v)
    }
}

impl From<QuadForm> for QuadFormJson {
    fn from(q: QuadForm) -> Self {
        Self {
            p: q.p,
            d: q.d,
            a: q.a,
            u: q.u,
            v: q.v,
        }
    }
}

impl QuadForm {
    pub fn new(p: u64, a: Vec<Vec<u64>>, u: Vec<u64>, v: u64) -> Result<Self> {
        check_modulus(p)?;
        let d = a.len();
        if d == 0 {
            return Err(Error::DimensionMismatch("empty matrix".into()));
        }
        if a.iter().any(|r| r.len() != d) || u.len() != d {
            return Err(Error::DimensionMismatch("A must be d×d and u of length d".into()));
        }
        let a: Vec<Vec<u64>> = a.into_iter().map(|r| r.into_iter().map(|x| x % p).collect()).collect();
        for i in 0..d {
            for j in 0..i {
                if a[i][j] != a[j][i] {
                    return Err(Error::Invalid(format!("A is not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(Self {
            p,
            d,
            a,
            u: u.into_iter().map(|x| x % p).collect(),
            v: v % p,
        })
    }

    /// `Σ x_i²`.
    pub fn sum_of_squares(p: u64, d: usize) -> Result<Self> {
        Self::diagonal(p, &vec![1; d])
    }

    pub fn diagonal(p: u64, diag: &[u64]) -> Result<Self> {
        let d = diag.len();
        let mut a = vec![vec![0; d]; d];
        for (i, &x) in diag.iter().enumerate() {
            a[i][i] = x;
        }
        Self::new(p, a, vec![0; d], 0)
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &[Vec<u64>] {
        &self.a
    }

    pub fn linear_part(&self) -> &[u64] {
        &self.u
    }

    pub fn constant(&self) -> u64 {
        self.v
    }

    pub fn is_pure(&self) -> bool {
        self.u.iter().all(|&x| x == 0)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.is_pure() && self.v == 0
    }

    pub fn rank(&self) -> usize {
        rank(&self.a, self.p)
    }

    pub fn is_non_degenerate(&self) -> bool {
        self.rank() == self.d
    }

    /// `hA` as a vector.
    pub fn times(&self, h: &[u64]) -> Vec<u64> {
        let p = self.p;
        (0..self.d)
            .map(|j| (0..self.d).fold(0, |acc, i| add_mod(acc, mul_mod(h[i], self.a[i][j], p), p)))
            .collect()
    }

    /// `(hA)·n`.
    pub fn bilinear(&self, h: &[u64], n: &[u64]) -> u64 {
        let p = self.p;
        self.times(h).iter().zip(n).fold(0, |acc, (&x, &y)| add_mod(acc, mul_mod(x, y, p), p))
    }

    pub fn eval_raw(&self, n: &[u64]) -> u64 {
        let p = self.p;
        let mut acc = self.v;
        for i in 0..self.d {
            if n[i] == 0 {
                continue;
            }
            let mut row = 0;
            for j in 0..self.d {
                row = add_mod(row, mul_mod(self.a[i][j], n[j], p), p);
            }
            acc = add_mod(acc, mul_mod(n[i], add_mod(row, self.u[i], p), p), p);
        }
        acc
    }

    pub fn eval(&self, n: &FpVector) -> FpScalar {
        assert_eq!(n.dim(), self.d, "dimension mismatch");
        FpScalar::raw(self.eval_raw(n.coords()), self.p)
    }

    pub fn to_poly(&self) -> PrimePoly {
        let (p, d) = (self.p, self.d);
        let mut f = PrimePoly::constant(p, d, self.v);
        for i in 0..d {
            for j in 0..d {
                f.add_term(Monomial::var(d, i).mul(&Monomial::var(d, j)), self.a[i][j]);
            }
            f.add_term(Monomial::var(d, i), self.u[i]);
        }
        f
    }

    /// The ideal generator `n ↦ (hA)·n`.
    pub fn bilinear_form(&self, h: &FpVector) -> PrimePoly {
        PrimePoly::linear_form(self.p, &self.times(h.coords()))
    }

    /// The difference form `L_h(n) = M(n+h) − M(n) = 2(hA)·n + (hA)·h + h·u`.
    pub fn difference_form(&self, h: &FpVector) -> PrimePoly {
        let p = self.p;
        let ha = self.times(h.coords());
        let lin: Vec<u64> = ha.iter().map(|&x| mul_mod(2, x, p)).collect();
        let c = add_mod(self.bilinear(h.coords(), h.coords()), h.dot(&FpVector::from_raw(p, self.u.clone())), p);
        PrimePoly::linear_form(p, &lin).add(&PrimePoly::constant(p, self.d, c))
    }

    /// `M(φ(t) + c)` where `φ(t) = Σ t_j b_j` for the given directions.
    pub fn restrict(&self, dirs: &[FpVector], c: &FpVector) -> QuadForm {
        let p = self.p;
        let k = dirs.len();
        if k == 0 {
            // Zero-dimensional affine space: record the value as a 1-variable constant form.
            return QuadForm {
                p,
                d: 1,
                a: vec![vec![0]],
                u: vec![0],
                v: self.eval_raw(c.coords()),
            };
        }
        let ba: Vec<Vec<u64>> = dirs.iter().map(|b| self.times(b.coords())).collect();
        let a: Vec<Vec<u64>> = (0..k)
            .map(|i| (0..k).map(|j| ba[i].iter().zip(dirs[j].coords()).fold(0, |acc, (&x, &y)| add_mod(acc, mul_mod(x, y, p), p))).collect())
            .collect();
        let ca = self.times(c.coords());
        let u: Vec<u64> = dirs
            .iter()
            .map(|b| {
                let two_cab = mul_mod(2, ca.iter().zip(b.coords()).fold(0, |acc, (&x, &y)| add_mod(acc, mul_mod(x, y, p), p)), p);
                add_mod(two_cab, b.coords().iter().zip(&self.u).fold(0, |acc, (&x, &y)| add_mod(acc, mul_mod(x, y, p), p)), p)
            })
            .collect();
        QuadForm {
            p,
            d: k,
            a,
            u,
            v: self.eval_raw(c.coords()),
        }
    }

    /// Rank of `M|_{V+c}` through a parametrization of `V`.
    pub fn restricted_rank(&self, v: &Subspace, c: &FpVector) -> usize {
        if v.is_trivial() {
            return 0;
        }
        self.restrict(&v.basis(), c).rank()
    }

    /// `dim V − dim(V ∩ V^⊥)`.
    pub fn restricted_rank_closed(&self, v: &Subspace) -> usize {
        v.dim() - v.intersection(&self.perp(v)).dim()
    }

    /// `{n : (mA)·n = 0 for all m ∈ V}`.
    pub fn perp(&self, v: &Subspace) -> Subspace {
        if v.is_trivial() {
            return Subspace::full(self.p, self.d);
        }
        let rows: Vec<Vec<u64>> = v.rows().iter().map(|r| self.times(r)).collect();
        Subspace::from_rows(self.p, self.d, kernel(&rows, self.d, self.p))
    }

    pub fn is_isotropic(&self, v: &Subspace) -> bool {
        !v.intersection(&self.perp(v)).is_trivial()
    }

    /// Rank of `M` restricted to `V^⊥`.
    pub fn rank_on_perp(&self, v: &Subspace) -> usize {
        let pv = self.perp(v);
        self.restricted_rank(&pv, &FpVector::zero(self.p, self.d))
    }
}

/// Exact count with its comparison against a main term.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountReport {
    pub exact: u128,
    pub main_term: u128,
    /// `(exact − main) / main`.
    pub normalized_deviation: Ratio<i128>,
    /// `K²` where `|deviation| = K·p^{-1/2}`.
    pub observed_constant_sq: Ratio<i128>,
    /// Set when the input vectors were linearly dependent.
    pub dependent_warning: bool,
}

impl CountReport {
    fn new(exact: u128, main_term: u128, p: u64, dependent_warning: bool) -> Self {
        let dev = Ratio::new(exact as i128 - main_term as i128, main_term as i128);
        Self {
            exact,
            main_term,
            normalized_deviation: dev,
            observed_constant_sq: dev * dev * Ratio::from_integer(p as i128),
            dependent_warning,
        }
    }

    /// Whether `|exact − main| ≤ bound_num/bound_den · main · p^{-1/2}`, checked by squaring.
    pub fn within_sqrt_bound(&self, k: Ratio<i128>) -> bool {
        self.observed_constant_sq <= k * k
    }
}

fn check_budget(required: u128, budget: u128) -> Result<()> {
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    Ok(())
}

/// Number of zeros of `q` on all of F_p^k, sharded over the leading coordinate.
fn count_zeros(q: &QuadForm) -> u128 {
    let (p, k) = (q.p, q.d);
    let tail_len = k - 1;
    (0..p)
        .into_par_iter()
        .map(|lead| {
            let mut n = vec![0u64; k];
            n[0] = lead;
            let mut count = 0u128;
            if tail_len == 0 {
                return (q.eval_raw(&n) == 0) as u128;
            }
            for tail in all_vectors(p, tail_len) {
                n[1..].copy_from_slice(tail.coords());
                if q.eval_raw(&n) == 0 {
                    count += 1;
                }
            }
            count
        })
        .sum()
}

/// Exact `|V(M) ∩ (V + c)|` against the main term `p^{d−r−1}`, `r` the codimension.
pub fn count_variety_affine(m: &QuadForm, v: &Subspace, c: &FpVector, budget: u128) -> Result<CountReport> {
    let p = m.p;
    let k = v.dim();
    check_budget((p as u128).pow(k as u32), budget)?;
    let exact = if k == 0 {
        (m.eval_raw(c.coords()) == 0) as u128
    } else {
        count_zeros(&m.restrict(&v.basis(), c))
    };
    let main = if k == 0 { 1 } else { (p as u128).pow(k as u32 - 1) };
    Ok(CountReport::new(exact, main, p, false))
}

/// Exact `|V(M)^{h_1..h_r}|` with `V(M)^{h..} = V(M) ∩ ⋂ V(M(·+h_i))`.
///
/// Each `M(n+h_i) − M(n)` is affine in `n`, so the count runs over the solution
/// space of those equations.
pub fn count_common_variety(m: &QuadForm, hs: &[FpVector], budget: u128) -> Result<CountReport> {
    let (p, d) = (m.p, m.d);
    let dependent = Subspace::span(p, d, hs)?.dim() < hs.len();
    let r = hs.len();
    let main = if d >= r + 1 { (p as u128).pow((d - r - 1) as u32) } else { 1 };
    let (exact, _) = common_variety_affine(m, hs, budget)?;
    Ok(CountReport::new(exact, main, p, dependent))
}

/// Affine solution space of `M(n+h_i) = M(n)` and the exact number of its points on `V(M)`.
fn common_variety_affine(m: &QuadForm, hs: &[FpVector], budget: u128) -> Result<(u128, Option<(FpVector, Subspace)>)> {
    let (p, d) = (m.p, m.d);
    if hs.is_empty() {
        check_budget((p as u128).pow(d as u32), budget)?;
        let full = Subspace::full(p, d);
        return Ok((count_zeros(m), Some((FpVector::zero(p, d), full))));
    }
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for h in hs {
        let l = m.difference_form(h);
        rows.push((0..d).map(|i| l.coeff(&Monomial::var(d, i))).collect::<Vec<u64>>());
        rhs.push(crate::field_linalg::neg_mod(l.coeff(&Monomial::one(d)), p));
    }
    let Some((x, ker)) = solve_raw(&rows, d, &rhs, p) else {
        return Ok((0, None));
    };
    let ker = Subspace::from_rows(p, d, ker);
    let c = FpVector::from_raw(p, x);
    let rep = count_variety_affine(m, &ker, &c, budget)?;
    Ok((rep.exact, Some((c, ker))))
}

/// Points of `V(M)^{h_1..h_r}` in enumeration order.
pub fn common_variety_points(m: &QuadForm, hs: &[FpVector], budget: u128) -> Result<Vec<FpVector>> {
    let (_, aff) = common_variety_affine(m, hs, budget)?;
    let Some((c, ker)) = aff else {
        return Ok(Vec::new());
    };
    check_budget((m.p as u128).pow(ker.dim() as u32), budget)?;
    Ok(ker
        .elements()
        .map(|x| x.add(&c))
        .filter(|n| m.eval_raw(n.coords()) == 0)
        .collect())
}

/// Fraction of `k`-tuples whose span is `M`-isotropic.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsotropyEstimate {
    pub isotropic: u128,
    pub total: u128,
    pub exact: bool,
    pub seed: Option<u64>,
}

impl IsotropyEstimate {
    pub fn fraction(&self) -> Ratio<u128> {
        Ratio::new(self.isotropic, self.total.max(1))
    }
}

/// Exact when `p^{kd} ≤ budget`, otherwise `sample` seeded draws.
pub fn isotropic_tuple_fraction(m: &QuadForm, k: usize, sample: u64, seed: u64, budget: u128) -> Result<IsotropyEstimate> {
    if !m.is_non_degenerate() {
        return Err(Error::Invalid("isotropy fractions need a non-degenerate form".into()));
    }
    let (p, d) = (m.p, m.d);
    let is_iso = |coords: &[u64]| {
        let vs: Vec<FpVector> = coords.chunks(d).map(|c| FpVector::from_raw(p, c.to_vec())).collect();
        m.is_isotropic(&Subspace::span_of(p, d, &vs))
    };
    let space = (p as u128).checked_pow((k * d) as u32);
    if let Some(total) = space.filter(|&t| t <= budget) {
        let isotropic = (0..p)
            .into_par_iter()
            .map(|lead| {
                let mut n = vec![0u64; k * d];
                n[0] = lead;
                let mut c = 0u128;
                if k * d == 1 {
                    return is_iso(&n) as u128;
                }
                for tail in all_vectors(p, k * d - 1) {
                    n[1..].copy_from_slice(tail.coords());
                    c += is_iso(&n) as u128;
                }
                c
            })
            .sum();
        return Ok(IsotropyEstimate {
            isotropic,
            total,
            exact: true,
            seed: None,
        });
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut isotropic = 0;
    for _ in 0..sample {
        let n: Vec<u64> = (0..k * d).map(|_| rng.gen_range(0..p)).collect();
        isotropic += is_iso(&n) as u128;
    }
    Ok(IsotropyEstimate {
        isotropic,
        total: sample as u128,
        exact: false,
        seed: Some(seed),
    })
}

/// Random symmetric non-degenerate matrix form, homogeneous.
pub fn random_nondegenerate<R: Rng>(p: u64, d: usize, rng: &mut R) -> QuadForm {
    loop {
        let mut a = vec![vec![0u64; d]; d];
        for i in 0..d {
            for j in i..d {
                let x = rng.gen_range(0..p);
                a[i][j] = x;
                a[j][i] = x;
            }
        }
        let q = QuadForm::new(p, a, vec![0; d], 0).expect("valid form");
        if q.is_non_degenerate() {
            return q;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::{variety, DEFAULT_ENUMERATION_BUDGET};
    use proptest::prelude::*;
    use rand::Rng;

    const B: u128 = DEFAULT_ENUMERATION_BUDGET;

    fn brute_count(m: &QuadForm, pred: impl Fn(&[u64]) -> bool) -> u128 {
        all_vectors(m.modulus(), m.dim()).filter(|n| m.eval_raw(n.coords()) == 0 && pred(n.coords())).count() as u128
    }

    fn rand_space(p: u64, d: usize, k: usize, seed: u64) -> Subspace {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let vs: Vec<FpVector> = (0..k).map(|_| FpVector::from_raw(p, (0..d).map(|_| rng.gen_range(0..p)).collect())).collect();
        Subspace::span_of(p, d, &vs)
    }

    #[test]
    fn rank_examples() {
        assert_eq!(QuadForm::sum_of_squares(7, 4).unwrap().rank(), 4);
        assert_eq!(QuadForm::diagonal(7, &[0, 0, 0]).unwrap().rank(), 0);
        assert_eq!(QuadForm::diagonal(5, &[1, 1, 0]).unwrap().rank(), 2);
        assert!(QuadForm::new(5, vec![vec![1, 2], vec![3, 1]], vec![0, 0], 0).is_err());
        assert!(QuadForm::diagonal(2, &[1]).is_err());
    }

    #[test]
    fn perp_examples() {
        let m = QuadForm::sum_of_squares(7, 4).unwrap();
        assert_eq!(m.perp(&Subspace::trivial(7, 4)).dim(), 4);
        let e = |i| FpVector::unit(7, 4, i);
        let v = Subspace::span_of(7, 4, &[e(0)]);
        assert_eq!(m.perp(&v), Subspace::span_of(7, 4, &[e(1), e(2), e(3)]));
    }

    #[test]
    fn restricted_rank_examples() {
        let m = QuadForm::sum_of_squares(7, 5).unwrap();
        let z = FpVector::zero(7, 5);
        assert_eq!(m.restricted_rank(&Subspace::full(7, 5), &z), 5);
        assert_eq!(m.restricted_rank(&Subspace::trivial(7, 5), &z), 0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for seed in 0..40 {
            let m = random_nondegenerate(7, 5, &mut rng);
            let v = rand_space(7, 5, (seed % 5) as usize + 1, seed);
            let c = FpVector::from_raw(7, (0..5).map(|_| rng.gen_range(0..7)).collect());
            assert_eq!(m.restricted_rank(&v, &c), m.restricted_rank_closed(&v));
            // Independent of the chosen parametrization.
            let mut basis = v.basis();
            basis.reverse();
            if basis.len() > 1 {
                basis[0] = basis[0].add(&basis[1].scale(3));
            }
            assert_eq!(m.restrict(&basis, &c).rank(), m.restricted_rank(&v, &c));
        }
    }

    #[test]
    fn isotropy_against_pointwise_oracle() {
        let p = 5;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for seed in 0..30 {
            let m = random_nondegenerate(p, 4, &mut rng);
            let v = rand_space(p, 4, (seed % 3) as usize + 1, seed + 100);
            let count = v
                .elements()
                .filter(|x| v.basis().iter().all(|b| m.bilinear(b.coords(), x.coords()) == 0))
                .count();
            assert_eq!(count, (p as usize).pow(v.intersection(&m.perp(&v)).dim() as u32));
        }
    }

    #[test]
    fn difference_form_identity() {
        let p = 11;
        let m = QuadForm::new(p, vec![vec![1, 2, 0], vec![2, 3, 1], vec![0, 1, 5]], vec![4, 0, 7], 9).unwrap();
        let h = FpVector::from_i64(p, &[3, 1, 8]).unwrap();
        let l = m.difference_form(&h);
        for n in all_vectors(p, 3) {
            let lhs = (m.eval_raw(n.add(&h).coords()) + p - m.eval_raw(n.coords())) % p;
            assert_eq!(l.eval_raw(n.coords()), lhs);
        }
        let poly = m.to_poly();
        for n in all_vectors(p, 3).step_by(13) {
            assert_eq!(poly.eval_raw(n.coords()), m.eval_raw(n.coords()));
        }
    }

    #[test]
    fn count_examples() {
        let p = 5;
        let z = QuadForm::diagonal(p, &[0, 0, 0]).unwrap();
        let v = Subspace::span_of(p, 3, &[FpVector::unit(p, 3, 0)]);
        let c = FpVector::from_i64(p, &[0, 1, 1]).unwrap();
        assert_eq!(count_variety_affine(&z, &v, &c, B).unwrap().exact, 5);

        let m = QuadForm::sum_of_squares(p, 4).unwrap();
        let rep = count_variety_affine(&m, &Subspace::full(p, 4), &FpVector::zero(p, 4), B).unwrap();
        let oracle = variety(&m.to_poly(), B).unwrap().len() as u128;
        assert_eq!(rep.exact, oracle);
        assert_eq!(rep.main_term, 125);
        assert!(rep.exact.abs_diff(125) <= 25);
    }

    #[test]
    fn count_restricted_against_brute_force() {
        let p = 7;
        let m = QuadForm::sum_of_squares(p, 5).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut worst = Ratio::from_integer(0);
        for seed in 0..12 {
            let v = rand_space(p, 5, 4, seed);
            if v.dim() != 4 || m.is_isotropic(&v) {
                continue;
            }
            let c = FpVector::from_raw(p, (0..5).map(|_| rng.gen_range(0..p)).collect());
            let rep = count_variety_affine(&m, &v, &c, B).unwrap();
            let oracle = brute_count(&m, |n| v.contains_raw(&FpVector::from_raw(p, n.to_vec()).sub(&c).coords().to_vec()));
            assert_eq!(rep.exact, oracle);
            if rep.observed_constant_sq > worst {
                worst = rep.observed_constant_sq;
            }
        }
        assert!(worst <= Ratio::from_integer(4));
    }

    #[test]
    fn common_variety_examples() {
        let p = 7;
        let m = QuadForm::sum_of_squares(p, 5).unwrap();
        let r0 = count_common_variety(&m, &[], B).unwrap();
        assert_eq!(r0.exact, variety(&m.to_poly(), B).unwrap().len() as u128);
        let e1 = FpVector::unit(p, 5, 0);
        let r1 = count_common_variety(&m, &[e1.clone()], B).unwrap();
        let oracle = brute_count(&m, |n| m.eval_raw(FpVector::from_raw(p, n.to_vec()).add(&e1).coords()) == 0);
        assert_eq!(r1.exact, oracle);
        assert!((r1.exact as f64 - 343.0).abs() <= 7f64.powf(2.5));
        let r2 = count_common_variety(&m, &[e1.clone(), e1.scale(2)], B).unwrap();
        assert!(r2.dependent_warning);
        assert_eq!(common_variety_points(&m, &[e1.clone()], B).unwrap().len() as u128, r1.exact);
    }

    #[test]
    fn isotropic_fractions() {
        let m = QuadForm::sum_of_squares(5, 4).unwrap();
        let est = isotropic_tuple_fraction(&m, 1, 0, 0, B).unwrap();
        assert!(est.exact);
        let oracle = all_vectors(5, 4).filter(|h| !h.is_zero() && m.eval_raw(h.coords()) == 0).count() as u128;
        assert_eq!(est.isotropic, oracle);
        assert_eq!(est.total, 625);
        for p in [5u64, 7, 11] {
            let m = QuadForm::sum_of_squares(p, 4).unwrap();
            let est = isotropic_tuple_fraction(&m, 2, 4000, p, 1000).unwrap();
            assert!(!est.exact);
            assert!(est.fraction() * Ratio::from_integer(p as u128) <= Ratio::from_integer(4));
        }
    }

    #[test]
    fn json_roundtrip() {
        let m = QuadForm::new(7, vec![vec![1, 2], vec![2, 3]], vec![4, 5], 6).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"p":7,"d":2,"A":[[1,2],[2,3]],"u":[4,5],"v":6}"#);
        let back: QuadForm = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<QuadForm>(r#"{"p":7,"d":2,"A":[[1,2],[3,3]],"u":[4,5],"v":6}"#).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn iissoo_bounds(seed in any::<u64>(), k in 0usize..6, c in prop::collection::vec(0u64..7, 5)) {
            let p = 7;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut a = vec![vec![0u64; 5]; 5];
            for i in 0..5 { for j in i..5 { let x = rng.gen_range(0..p); a[i][j] = x; a[j][i] = x; } }
            let m = QuadForm::new(p, a, vec![0; 5], 0).unwrap();
            let v = rand_space(p, 5, k, seed ^ 1);
            let r = 5 - v.dim();
            let iso = v.intersection(&m.perp(&v)).dim();
            prop_assert!(iso <= (5 - m.rank() + r).min(5 - r));
            let rr = m.restricted_rank(&v, &FpVector::from_raw(p, c));
            prop_assert!(rr <= 5 - r);
            prop_assert!(rr as i64 >= m.rank() as i64 - 2 * r as i64);
            prop_assert_eq!(rr == 5 - r, !m.is_isotropic(&v));
        }

        #[test]
        fn cbn_bound(seed in any::<u64>(), r in 0usize..3, r2 in 0usize..3) {
            let p = 7;
            let d = 6;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let m = random_nondegenerate(p, d, &mut rng);
            let v = rand_space(p, d, r, seed ^ 2);
            let v2 = rand_space(p, d, r2, seed ^ 3);
            if m.rank_on_perp(&v) == d - v.dim() {
                prop_assert!(m.rank_on_perp(&v.sum(&v2)) as i64 >= d as i64 - v.dim() as i64 - 2 * v2.dim() as i64);
            }
        }
    }
}
