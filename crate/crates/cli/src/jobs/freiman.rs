//! GAPs, Bohr sets, Freiman M-homomorphisms and the cocycle congruences.

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};
use rand::Rng;
use serde_json::json;
use silab_core::field_linalg::all_vectors;
use silab_core::freiman::{
    bohr_set, count_r, dimension_threshold, fit_locally_linear, is_freiman_hom, random_member, random_proper_gap, scale_gap,
    verify_cocycle_lemmas, CocycleLemma, CocycleParams, FreimanParams, LocallyLinearFit,
};
use silab_core::quadform::random_nondegenerate;
use silab_core::{AlmostLinearFn, FpVector, Gap, HomPoly, LocallyLinear, MIdeal, Result, Subspace};

use super::{rand_nonzero, rng, vec_json};
use crate::config::Params;
use crate::report::Findings;

/// Declared almost-linear homomorphisms pass the exhaustive additive check, the field
/// value agrees with `p·ξ'`, and a wrapping step function is caught.
pub fn llfh(pr: &Params, f: &mut Findings) -> Result<()> {
    let (p, d) = (pr.p, pr.d.min(3));
    let mut rng = rng(pr.seed);
    let budget = pr.budget as u128;
    for t in 0..pr.trials {
        let size = rng.gen_range(4..=20usize);
        let hs: Vec<FpVector> = {
            let mut v: Vec<FpVector> = (0..size).map(|_| super::rand_vec(p, d, &mut rng)).collect();
            v.sort();
            v.dedup();
            v
        };
        // Integer β: every quadruple sum is an integer combination of integers.
        let terms: Vec<(Vec<u64>, i64)> = (0..rng.gen_range(1..=3))
            .map(|_| ((0..d).map(|_| rng.gen_range(0..p)).collect(), p as i64 * rng.gen_range(-3..=3i64)))
            .collect();
        let xi = AlmostLinearFn::new(p, d, terms.clone())?;
        f.work((hs.len() as u64).pow(3));
        let v = xi.freiman_violation(&hs, budget)?;
        f.check(v.is_none(), || json!({"trial": t, "terms": terms, "quadruple": v}));
        for h in &hs {
            let exact = xi.eval_exact(h)?;
            let field = xi.eval_field(h)?;
            let expected = (exact * Ratio::from_integer(p as i128)).to_integer().rem_euclid(p as i128) as u64;
            f.check(field == expected, || json!({"trial": t, "h": vec_json(h), "field": field, "expected": expected}));
        }
        // `2{a·h/p} − {2a·h/p}` vanishes while `a·h mod p < p/2`, so it is additive there.
        let a = rand_nonzero(p, d, &mut rng);
        let low: Vec<FpVector> = all_vectors(p, d).filter(|h| 2 * a.dot(h) < p).take(20).collect();
        let step = AlmostLinearFn::new(p, d, vec![(a.coords().to_vec(), 2), (a.scale(2).coords().to_vec(), -1)])?;
        let v = step.freiman_violation(&low, budget)?;
        f.check(v.is_none(), || json!({"trial": t, "a": vec_json(&a), "quadruple": v}));
    }
    // Across the wrap point the same step function is not additive.
    let q = 7;
    let hs: Vec<FpVector> = all_vectors(q, 2).filter(|h| h.coords()[1] < 2).collect();
    let step = AlmostLinearFn::new(q, 2, vec![(vec![1, 0], 2), (vec![2, 0], -1)])?;
    let v = step.freiman_violation(&hs, budget)?;
    f.check(v.is_some(), || json!({"control": "wrapping step function", "found": v}));
    Ok(())
}

/// `N(s) = (2s+16)(15s+453)` with the two anchor values.
pub fn thisisns(pr: &Params, f: &mut Findings) -> Result<()> {
    let table: Vec<_> = (0..=pr.s.max(1) as i64).map(|s| json!({"s": s, "N": dimension_threshold(s)})).collect();
    f.check(dimension_threshold(0) == 7248, || json!({"N(0)": dimension_threshold(0)}));
    f.check(dimension_threshold(1) == 8424, || json!({"N(1)": dimension_threshold(1)}));
    for s in 0..=pr.s as i64 {
        let n = dimension_threshold(s);
        f.check(n == (2 * s + 16) * (15 * s + 453), || json!({"s": s, "N": n}));
    }
    f.work(1);
    f.observe("table", table);
    Ok(())
}

/// `|P(c)| ≥ (c/(c+2))^D |P|` and `P(c) + P(c') ⊆ P(c+c')` on random proper GAPs.
pub fn crescale(pr: &Params, f: &mut Findings) -> Result<()> {
    let (p, d) = (pr.p, pr.d);
    let budget = pr.budget as u128;
    let one = Gap::homogeneous(vec![FpVector::unit(23, 1, 0)], vec![Ratio::from_integer(10)])?;
    let half = scale_gap(&one, Ratio::new(1, 2), budget)?;
    f.check(half.base_size == 19 && half.size == 9 && half.bound_holds, || {
        json!({"example": "D=1, L=10, c=1/2", "size": half.size.to_string(), "base": half.base_size.to_string()})
    });
    let mut rng = rng(pr.seed);
    for t in 0..pr.trials {
        let rank = rng.gen_range(1..=pr.k.clamp(1, d.min(3)));
        let gap = random_proper_gap(p, d, rank, 5, &mut rng)?;
        let c = Ratio::new(rng.gen_range(1..=8i64), 8);
        let rep = scale_gap(&gap, c, budget)?;
        f.work(rep.base_size as u64);
        f.check(rep.bound_holds && rep.containment_holds, || {
            json!({"trial": t, "c": c.to_string(), "gap": gap.to_json().unwrap_or_default(), "size": rep.size.to_string(), "base": rep.base_size.to_string()})
        });
    }
    Ok(())
}

/// Locally linear maps plus `J^M_h` noise: exhaustive order-4 Freiman check and a
/// feasible refit; the built-in forward mode runs alongside.
pub fn gsol_forward(pr: &Params, f: &mut Findings) -> Result<()> {
    let (p, d, s) = (pr.p, pr.d, pr.s as i64);
    let budget = pr.budget as u128;
    let mut rng = rng(pr.seed);
    let mut largest = 0usize;
    for t in 0..pr.trials {
        let m = random_nondegenerate(p, d, &mut rng);
        let rank = rng.gen_range(1..=pr.k.clamp(1, d.min(3)));
        let gap = random_proper_gap(p, d, rank, 2, &mut rng)?;
        let pts = gap.elements(budget)?;
        largest = largest.max(pts.len());
        let map = LocallyLinear::random(p, d, rank, s, &mut rng);
        let exact = map.tabulate(&gap);
        let noisy: Vec<HomPoly> = exact
            .iter()
            .zip(&pts)
            .map(|(v, h)| Ok(v.add(&random_member(&MIdeal::of_vectors(&m, std::slice::from_ref(h))?, s, &mut rng)?)))
            .collect::<Result<_>>()?;
        for (label, xi) in [("exact", &exact), ("noisy", &noisy)] {
            let rep = is_freiman_hom(&m, &pts, xi, &FreimanParams::exhaustive(2, budget))?;
            f.work(rep.membership_checks);
            f.check(rep.holds() && rep.tuples_checked > 0, || json!({"trial": t, "values": label, "counterexample": rep.counterexample}));
            let fit = fit_locally_linear(&m, &gap, xi, budget)?;
            f.check(matches!(fit, LocallyLinearFit::Feasible(_)), || json!({"trial": t, "values": label, "fit": format!("{fit:?}")}));
        }
    }
    let rep = verify_cocycle_lemmas(CocycleLemma::GsolForward, &cocycle_params(pr, 0))?;
    f.work(rep.checks);
    f.check(rep.holds, || json!({"mode": "gsol-forward", "witness": rep.witness}));
    f.observe("largest_gap", largest);
    Ok(())
}

fn cocycle_params(pr: &Params, t: u64) -> CocycleParams {
    CocycleParams {
        p: pr.p,
        d: pr.d,
        s: pr.s as i64,
        k: pr.k,
        points: pr.n.max(2),
        seed: pr.seed.wrapping_add(t),
    }
}

fn cocycle(pr: &Params, f: &mut Findings, modes: &[CocycleLemma]) -> Result<()> {
    for t in 0..pr.trials as u64 {
        for &mode in modes {
            let rep = verify_cocycle_lemmas(mode, &cocycle_params(pr, t))?;
            f.work(rep.checks);
            f.check(rep.holds && rep.checks > 0, || json!({"mode": mode, "trial": t, "witness": rep.witness}));
        }
    }
    Ok(())
}

pub fn coco01(pr: &Params, f: &mut Findings) -> Result<()> {
    cocycle(pr, f, &[CocycleLemma::Coco01Forward, CocycleLemma::Coco01Inverse])
}

pub fn coco1c_forward(pr: &Params, f: &mut Findings) -> Result<()> {
    cocycle(pr, f, &[CocycleLemma::Coco1cForward])
}

pub fn cocon1(pr: &Params, f: &mut Findings) -> Result<()> {
    cocycle(pr, f, &[CocycleLemma::Cocon1Forward])
}

pub fn cocozero(pr: &Params, f: &mut Findings) -> Result<()> {
    cocycle(pr, f, &[CocycleLemma::CocozeroInverse])
}

pub fn cocoprr_forward(pr: &Params, f: &mut Findings) -> Result<()> {
    cocycle(pr, f, &[CocycleLemma::CocoprrForward])
}

pub fn coco4(pr: &Params, f: &mut Findings) -> Result<()> {
    cocycle(pr, f, &[CocycleLemma::Coco4Forward])
}

pub fn cocon2_forward(pr: &Params, f: &mut Findings) -> Result<()> {
    cocycle(pr, f, &[CocycleLemma::Cocon2Forward])
}

/// Rank over `Q` of an integer matrix.
fn rational_rank(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect())
        .collect();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(rank, piv);
        let inv = BigRational::one() / &m[rank][c];
        let pivot_row: Vec<BigRational> = m[rank].iter().map(|x| x * &inv).collect();
        for (i, row) in m.iter_mut().enumerate() {
            if i != rank && !row[c].is_zero() {
                let factor = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x -= &factor * y;
                }
            }
        }
        m[rank] = pivot_row;
        rank += 1;
    }
    rank
}

/// `‖r/p‖_T` scaled by `p`.
fn torus_dist(r: u64, p: u64) -> u64 {
    r.min(p - r)
}

/// Large-spectrum structure of `2H − 2H` for slab-plus-noise sets:
/// `|S| ≤ 2δ^{−2}`, `B(S,1/4) ⊆ 2H−2H` with `|R(H,h)| ≥ δ⁴p^{3d}/2`, and a proper
/// homogeneous GAP `P ⊆ B(S,1/4)` whose generator profiles are independent over `R`.
pub fn g324(pr: &Params, f: &mut Findings) -> Result<()> {
    let (p, d) = (pr.p, pr.d.min(2));
    let budget = pr.budget as u128;
    let space: Vec<FpVector> = all_vectors(p, d).collect();
    let total = space.len() as u128;
    let mut rng = rng(pr.seed);
    let mut max_rank = 0usize;
    for t in 0..pr.trials {
        let dir = rand_nonzero(p, d, &mut rng);
        let width = rng.gen_range(p / 4..=p / 2 + 1);
        let noise = rng.gen_range(0.0..0.1);
        let h: Vec<FpVector> = space.iter().filter(|x| dir.dot(x) < width || rng.gen_bool(noise)).cloned().collect();
        let n = h.len() as u128;
        // |Ĥ(ξ)|² ≥ δ³/2 in units of p^{2d}: |Σ e(ξ·x/p)|² ≥ n³ / (2 p^d).
        let threshold = (n * n * n) as f64 / (2.0 * total as f64);
        let spectrum: Vec<FpVector> = space
            .iter()
            .filter(|xi| !xi.is_zero())
            .filter(|xi| {
                let (mut re, mut im) = (0.0f64, 0.0f64);
                for x in &h {
                    let ang = std::f64::consts::TAU * xi.dot(x) as f64 / p as f64;
                    re += ang.cos();
                    im += ang.sin();
                }
                re * re + im * im >= threshold * (1.0 - 1e-9)
            })
            .cloned()
            .collect();
        let s_len = spectrum.len() as u128;
        f.check(s_len * n * n <= 2 * total * total, || json!({"trial": t, "S": s_len.to_string(), "H": n.to_string()}));
        let quarter = bohr_set(&spectrum, Ratio::new(1, 4), p, d, budget)?;
        let eighth = bohr_set(&spectrum, Ratio::new(1, 8), p, d, budget)?;
        f.check(quarter.size_bound_holds() && eighth.size_bound_holds(), || json!({"trial": t, "bohr_sizes": [quarter.len(), eighth.len()]}));
        // |R(H,h)| ≥ δ⁴p^{3d}/2  ⇔  2·p^d·|R| ≥ n⁴.
        let mut min_r = u128::MAX;
        for x in quarter.elements() {
            let r = count_r(&h, x, budget)?;
            min_r = min_r.min(r);
            f.check(2 * total * r >= n.pow(4), || json!({"trial": t, "h": vec_json(x), "R": r.to_string(), "H": n.to_string()}));
        }
        f.work((quarter.len() as u64) * (n * n) as u64);
        // Greedy GAP: generators from B(S,1/8) that raise the rank of their profiles.
        let profile = |v: &FpVector| -> Vec<i64> { spectrum.iter().map(|a| a.dot(v) as i64).collect() };
        let mut gens: Vec<FpVector> = Vec::new();
        let mut profiles: Vec<Vec<i64>> = Vec::new();
        for v in eighth.elements() {
            if v.is_zero() || spectrum.is_empty() {
                continue;
            }
            let mut trial_rows = profiles.clone();
            trial_rows.push(profile(v));
            let mut trial_gens = gens.clone();
            trial_gens.push(v.clone());
            // Independence over F_p as well keeps the progression proper.
            if rational_rank(&trial_rows) == trial_rows.len() && Subspace::span_of(p, d, &trial_gens).dim() == trial_gens.len() {
                profiles = trial_rows;
                gens.push(v.clone());
            }
        }
        // Grow lengths while Σ (L_i − 1)·‖α·v_i‖ < p/4 for every frequency.
        let mut lengths = vec![1i64; gens.len()];
        let fits = |ls: &[i64]| {
            spectrum.iter().all(|a| {
                let s: u64 = gens.iter().zip(ls).map(|(v, &l)| (l as u64 - 1) * torus_dist(a.dot(v), p)).sum();
                4 * s < p
            })
        };
        let mut grew = true;
        while grew {
            grew = false;
            for i in 0..lengths.len() {
                lengths[i] += 1;
                if fits(&lengths) && 2 * lengths[i] - 1 <= p as i64 {
                    grew = true;
                } else {
                    lengths[i] -= 1;
                }
            }
        }
        if gens.is_empty() {
            continue;
        }
        max_rank = max_rank.max(gens.len());
        let gap = Gap::homogeneous(gens.clone(), lengths.iter().map(|&l| Ratio::from_integer(l)).collect())?;
        let proper = gap.is_proper(budget)?;
        let pts = gap.elements(budget)?;
        let inside = pts.iter().all(|x| quarter.contains(x));
        let independent = rational_rank(&profiles) == gens.len() && gens.len() <= spectrum.len() + d;
        f.check(proper && inside && independent, || {
            json!({"trial": t, "gens": gens.iter().map(vec_json).collect::<Vec<_>>(), "lengths": lengths, "proper": proper, "inside": inside, "independent": independent})
        });
        let mut min_on_p = u128::MAX;
        for x in &pts {
            min_on_p = min_on_p.min(count_r(&h, x, budget)?);
        }
        f.check(2 * total * min_on_p >= n.pow(4), || json!({"trial": t, "min_R_on_P": min_on_p.to_string()}));
        f.observe(&format!("trial_{t}"), json!({"H": n.to_string(), "S": s_len.to_string(), "rank": gens.len(), "P": pts.len(), "min_R": min_r.to_string()}));
    }
    f.observe("max_gap_rank", max_rank);
    Ok(())
}
