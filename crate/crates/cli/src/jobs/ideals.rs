//! Intersection properties and membership-based jobs for M-ideals.

use rand::Rng;
use serde_json::json;
use silab_core::field_linalg::{all_vectors, spaces_independent, Subspace};
use silab_core::mideal::{
    verify_grm, verify_intersection_ideals, verify_intersection_subspaces, GrmParams, IntersectionVariant,
};
use silab_core::polyring::monomials_of_degree;
use silab_core::quadform::random_nondegenerate;
use silab_core::{FpVector, MIdeal, PrimePoly, Result};

use super::{rand_hom, rand_member, rand_nonzero, rand_poly, rand_span, rand_subspace, rng, space_json};
use crate::config::Params;
use crate::report::Findings;

/// Sunflower intersection `⋂(V+V_i) = V` for `N = dim V + 2` independent petals,
/// plus a probe with petals sharing a vector outside `V`.
pub fn gr_minus1(pr: &Params, f: &mut Findings) -> Result<()> {
    let (p, d) = (pr.p, pr.d);
    let mut rng = rng(pr.seed);
    let (mut tested, mut skipped, mut probe_hits) = (0u64, 0u64, 0u64);
    for _ in 0..pr.trials {
        let v = rand_span(p, d, rng.gen_range(0..=pr.k), &mut rng);
        let n = v.dim() + 2;
        let petals: Vec<Subspace> = (0..n).map(|_| rand_span(p, d, rng.gen_range(1..=2), &mut rng)).collect();
        let r = verify_intersection_subspaces(&v, &petals);
        f.work(n as u64);
        if r.hypothesis_met {
            tested += 1;
            f.check(r.equals_core, || json!({"V": space_json(&v), "petals": petals.iter().map(space_json).collect::<Vec<_>>(), "intersection_dim": r.intersection_dim}));
        } else {
            skipped += 1;
        }
        let w = loop {
            let w = rand_nonzero(p, d, &mut rng);
            if !v.contains(&w) {
                break w;
            }
        };
        let shared: Vec<Subspace> = (0..n).map(|_| rand_span(p, d, 1, &mut rng).with_vector(&w)).collect();
        let r = verify_intersection_subspaces(&v, &shared);
        probe_hits += (!r.hypothesis_met && !r.equals_core) as u64;
    }
    f.observe("instances_tested", tested);
    f.observe("instances_skipped", skipped);
    f.observe("probe_counterexamples", probe_hits);
    f.check(probe_hits > 0, || json!({"probe": "dependent petals never produced a counterexample"}));
    Ok(())
}

/// Both independence variants of `f ∈ ⋂ J_{V+V_i} ⇔ f ∈ J_V` on random forms and petals,
/// with a probe that repeats one petal.
pub fn gr0(pr: &Params, f: &mut Findings) -> Result<()> {
    let (p, d, s) = (pr.p, pr.d, pr.s);
    let mut rng = rng(pr.seed);
    let (mut strong, mut weak, mut probe_hits) = (0u64, 0u64, 0u64);
    for t in 0..pr.trials {
        let m = random_nondegenerate(p, d, &mut rng);
        let v = rand_span(p, d, pr.k, &mut rng);
        let petals: Vec<Subspace> = (0..pr.n).map(|_| rand_span(p, d, 1, &mut rng)).collect();
        let poly = match t % 4 {
            0 => rand_member(&m, &v, s, &mut rng),
            1 => rand_member(&m, &v.sum(&petals[0]), s, &mut rng),
            2 => rand_poly(p, d, s, 3, &mut rng),
            _ => all_petals_member(&m, &v, &petals, s, &mut rng)?,
        };
        for variant in [IntersectionVariant::Strong, IntersectionVariant::Weak] {
            let r = verify_intersection_ideals(&m, &v, &petals, &poly, s, variant)?;
            f.work(petals.len() as u64 + 1);
            if r.hypothesis_met {
                match variant {
                    IntersectionVariant::Strong => strong += 1,
                    IntersectionVariant::Weak => weak += 1,
                }
                f.check(r.biconditional_holds, || {
                    json!({"variant": format!("{variant:?}"), "V": space_json(&v), "petals": petals.iter().map(space_json).collect::<Vec<_>>(), "f": poly.to_text(), "in_all_shifted": r.in_all_shifted, "in_core": r.in_core})
                });
            }
        }
        if s >= 1 && pr.n >= 1 {
            let line = loop {
                let l = rand_subspace(p, d, 1, &mut rng);
                if !l.is_subspace_of(&v) {
                    break l;
                }
            };
            let repeated = vec![line.clone(); pr.n.max(2)];
            let probe = m.bilinear_form(&line.basis()[0]);
            let r = verify_intersection_ideals(&m, &v, &repeated, &probe, s, IntersectionVariant::Strong)?;
            probe_hits += (!r.hypothesis_met && !r.biconditional_holds) as u64;
        }
    }
    f.observe("strong_instances_tested", strong);
    f.observe("weak_instances_tested", weak);
    f.observe("probe_counterexamples", probe_hits);
    if s >= 1 {
        f.check(probe_hits > 0, || json!({"probe": "repeated petals never produced a counterexample"}));
    }
    Ok(())
}

/// A polynomial in every `J_{V+V_i}`: a product of one linear generator per petal, padded with a member of `J_V`.
fn all_petals_member(
    m: &silab_core::QuadForm,
    v: &Subspace,
    petals: &[Subspace],
    s: u32,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Result<PrimePoly> {
    let (p, d) = (m.modulus(), m.dim());
    let mut g = rand_member(m, v, s, rng);
    if petals.len() as u32 <= s && petals.iter().all(|x| !x.is_trivial()) {
        let mut prod = PrimePoly::constant(p, d, 1);
        for x in petals {
            prod = prod.mul(&m.bilinear_form(&x.basis()[0]))?;
        }
        g = g.add(&prod.mul(&rand_poly(p, d, s - petals.len() as u32, 2, rng))?);
    }
    Ok(g)
}

/// Density form of the intersection property with points drawn from a fixed large subset.
pub fn grm(pr: &Params, f: &mut Findings) -> Result<()> {
    let (p, d, s) = (pr.p, pr.d, pr.s);
    let mut rng = rng(pr.seed);
    let stride = ((p as usize).pow(d as u32) / 8192).max(1);
    let points: Vec<FpVector> = all_vectors(p, d).skip(1).step_by(stride).collect();
    f.observe("point_set_size", points.len());
    let v = Subspace::trivial(p, d);
    let mut dimension_ok = true;
    let (mut members, mut nonmembers) = (0u64, 0u64);
    for t in 0..pr.trials {
        let m = random_nondegenerate(p, d, &mut rng);
        let poly = if t % 2 == 0 {
            rand_member(&m, &v, s, &mut rng)
        } else {
            rand_hom(p, d, s, 4, &mut rng)
        };
        let params = GrmParams {
            m: pr.k,
            s,
            d_prime: d,
            tuples: pr.n,
            seed: pr.seed ^ t as u64,
        };
        let r = verify_grm(&m, &v, &[], &points, &poly, &params)?;
        f.work(r.tuples_checked as u64);
        dimension_ok &= r.dimension_ok;
        if r.conclusion {
            members += 1;
        } else {
            nonmembers += 1;
        }
        f.check(r.implication_ok, || json!({"f": poly.to_text(), "tuples_checked": r.tuples_checked}));
    }
    f.hypothesis("d' ≥ max{dim V + m + s, dim U + dim V + m, 2 dim V + 2m + 5}", dimension_ok);
    f.observe("members", members);
    f.observe("nonmembers", nonmembers);
    Ok(())
}

/// `((nA)·h)·f ∈ J_{h_1..h_k}` forces `f ∈ J_{h_1..h_k}` for `h` independent of the `h_i`.
pub fn kill_l(pr: &Params, f: &mut Findings) -> Result<()> {
    let (p, d, s, k) = (pr.p, pr.d, pr.s, pr.k);
    let mut rng = rng(pr.seed);
    let (mut tested, mut skipped, mut products_in) = (0u64, 0u64, 0u64);
    for t in 0..pr.trials {
        let m = random_nondegenerate(p, d, &mut rng);
        let hs: Vec<FpVector> = (0..k).map(|_| rand_nonzero(p, d, &mut rng)).collect();
        let h = rand_nonzero(p, d, &mut rng);
        let mut all = hs.clone();
        all.push(h.clone());
        let span = Subspace::span_of(p, d, &all);
        if span.dim() != k + 1 || !(m.rank_on_perp(&span) >= 3 || d >= 2 * k + 5) {
            skipped += 1;
            continue;
        }
        tested += 1;
        let ideal = MIdeal::of_vectors(&m, &hs)?;
        let poly = if t % 2 == 0 && s >= 1 && k >= 1 {
            m.bilinear_form(&hs[0]).mul(&rand_hom(p, d, s - 1, 3, &mut rng))?
        } else {
            rand_hom(p, d, s, 4, &mut rng)
        };
        let prod = m.bilinear_form(&h).mul(&poly)?;
        let prod_in = ideal.contains(&prod, s + 1)?.is_member();
        let f_in = ideal.contains(&poly, s)?.is_member();
        f.work(2);
        products_in += prod_in as u64;
        f.check(!prod_in || f_in, || json!({"h": h.coords(), "hs": hs.iter().map(|x| x.coords().to_vec()).collect::<Vec<_>>(), "f": poly.to_text()}));
    }
    f.observe("instances_tested", tested);
    f.observe("instances_skipped", skipped);
    f.observe("products_in_ideal", products_in);
    Ok(())
}

/// Degree-`s` part of `⋂ J_{V+V_i}` equals the span of `M·mon_{s−2}`, `((h_ℓA)·n)·mon_{s−1}`
/// and `Π_i ((h_{i,j_i}A)·n)·mon_{s−N}`; random combinations lie in every `J_{V+V_i}`.
pub fn w3s_roundtrip(pr: &Params, f: &mut Findings) -> Result<()> {
    let (p, d, s, mdim, n) = (pr.p, pr.d, pr.s, pr.k, pr.n.max(1));
    let mut rng = rng(pr.seed);
    let (mut tested, mut skipped) = (0u64, 0u64);
    for _ in 0..pr.trials {
        let m = random_nondegenerate(p, d, &mut rng);
        let v = rand_subspace(p, d, mdim, &mut rng);
        let r = 1 + rng.gen_range(0..2usize);
        let petals: Vec<Subspace> = (0..n).map(|_| rand_span(p, d, r, &mut rng)).collect();
        let rmax = petals.iter().map(|x| x.dim()).max().unwrap_or(0);
        let mut all = vec![v.clone()];
        all.extend(petals.iter().cloned());
        let need = 2 * n * rmax.saturating_sub(1) + 7;
        if !spaces_independent(&all) || !(m.rank_on_perp(&v) >= need || d >= 2 * mdim + need) {
            skipped += 1;
            continue;
        }
        tested += 1;
        let pieces = petals
            .iter()
            .map(|x| MIdeal::new(m.clone(), v.sum(x))?.piece(s))
            .collect::<Result<Vec<_>>>()?;
        let nmon = pieces[0].monomials().len();
        let mut inter = Subspace::full(p, nmon);
        for pc in &pieces {
            inter = inter.intersection(&Subspace::from_rows(p, nmon, pc.rows().to_vec()));
        }
        let gens = claimed_generators(&m, &v, &petals, s)?;
        let claimed = Subspace::from_rows(p, nmon, gens.iter().map(|g| pieces[0].coefficients(g)).collect());
        f.work((pieces.len() * nmon) as u64);
        f.check(claimed == inter, || {
            json!({"V": space_json(&v), "petals": petals.iter().map(space_json).collect::<Vec<_>>(), "claimed_dim": claimed.dim(), "intersection_dim": inter.dim()})
        });
        let mut combo = PrimePoly::zero(p, d);
        for g in &gens {
            combo = combo.add(&g.scale(rng.gen_range(0..p)));
        }
        for x in &petals {
            let inside = MIdeal::new(m.clone(), v.sum(x))?.contains(&combo, s)?.is_member();
            f.check(inside, || json!({"combination": combo.to_text(), "petal": space_json(x)}));
        }
    }
    f.observe("instances_tested", tested);
    f.observe("instances_skipped", skipped);
    Ok(())
}

fn claimed_generators(m: &silab_core::QuadForm, v: &Subspace, petals: &[Subspace], s: u32) -> Result<Vec<PrimePoly>> {
    let (p, d) = (m.modulus(), m.dim());
    let times = |g: &PrimePoly, t: u32| -> Result<Vec<PrimePoly>> {
        Ok(monomials_of_degree(d, t).iter().map(|q| g.mul_monomial(q, 1)).collect())
    };
    let mut out = Vec::new();
    if s >= 2 {
        out.extend(times(&m.to_poly(), s - 2)?);
    }
    if s >= 1 {
        for h in v.basis() {
            out.extend(times(&m.bilinear_form(&h), s - 1)?);
        }
    }
    let n = petals.len() as u32;
    if n <= s && petals.iter().all(|x| !x.is_trivial()) {
        let mut prods = vec![PrimePoly::constant(p, d, 1)];
        for x in petals {
            let mut next = Vec::new();
            for a in &prods {
                for h in x.basis() {
                    next.push(a.mul(&m.bilinear_form(&h))?);
                }
            }
            prods = next;
        }
        for g in prods {
            out.extend(times(&g, s - n)?);
        }
    }
    Ok(out)
}

/// On `Z = {M = 0, (h_iA)·n = 0}`: `P` vanishes on `Z` exactly when `P ∈ J_V`;
/// otherwise `|Z ∩ V(P)| / p^{d−k−2}` is recorded.
pub fn noloop3(pr: &Params, f: &mut Findings) -> Result<()> {
    let (p, d, s, k) = (pr.p, pr.d, pr.s, pr.k);
    let mut rng = rng(pr.seed);
    let (mut tested, mut skipped) = (0u64, 0u64);
    let mut worst_ratio: f64 = 0.0;
    for t in 0..pr.trials {
        let m = random_nondegenerate(p, d, &mut rng);
        let v = rand_subspace(p, d, k, &mut rng);
        if m.rank_on_perp(&v) < 3 {
            skipped += 1;
            continue;
        }
        tested += 1;
        let ideal = MIdeal::new(m.clone(), v.clone())?;
        let poly = match t % 3 {
            0 => rand_member(&m, &v, s, &mut rng),
            1 => rand_poly(p, d, s, 4, &mut rng),
            _ => rand_member(&m, &v, s, &mut rng).add(&rand_hom(p, d, s, 1, &mut rng)),
        };
        let zeros = ideal.zero_set(pr.budget as u128)?;
        f.work((p as u64).pow(d as u32));
        let vanish = zeros.iter().filter(|n| poly.eval_raw(n.coords()) == 0).count();
        let all_vanish = vanish == zeros.len();
        let member = ideal.decompose(&poly)?;
        if let Some(cert) = &member {
            f.check(cert.recombine(&m) == poly, || json!({"f": poly.to_text(), "reason": "certificate does not recombine"}));
        }
        f.check(all_vanish == member.is_some(), || {
            json!({"f": poly.to_text(), "V": space_json(&v), "vanishing_points": vanish, "zero_set_size": zeros.len(), "member": member.is_some()})
        });
        if !all_vanish {
            let scale = (p as f64).powi(d as i32 - k as i32 - 2);
            worst_ratio = worst_ratio.max(vanish as f64 / scale);
        }
    }
    f.observe("instances_tested", tested);
    f.observe("instances_skipped", skipped);
    f.observe("max_partial_vanishing_over_p^(d-k-2)", worst_ratio);
    Ok(())
}
