//! Clique-cover and density-dependence numbers of relation graphs.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use silab_core::relgraph::{
    cc_number, classification_check, classification_from_core, dd_number, mycielski_graph, weak_core_decompose, WeakCore,
};
use silab_core::{FpVector, GammaElement, PrimePoly, QuadForm, RelGraph, Result, Subspace};
use std::sync::Arc;

use super::{rand_hom, rand_nonzero, rng};
use crate::config::Params;
use crate::report::Findings;

fn line_at_zero(m: &Arc<QuadForm>, s: u32, dirs: &[FpVector], f: PrimePoly) -> Result<GammaElement> {
    let (p, d) = (m.modulus(), m.dim());
    GammaElement::new(m.clone(), s, FpVector::zero(p, d), Subspace::span_of(p, d, dirs), f)
}

/// A fiber over `0` of elements `(0, J_{⟨v⟩} + g + noise)` with `g` drawn from a small pool,
/// so the relation graph splits into a few near-cliques.
fn fiber(m: &Arc<QuadForm>, s: u32, n: usize, shifts: usize, rng: &mut ChaCha8Rng) -> Result<Vec<GammaElement>> {
    let (p, d) = (m.modulus(), m.dim());
    let pool: Vec<PrimePoly> = (0..shifts.max(1)).map(|_| rand_hom(p, d, s, 3, rng)).collect();
    (0..n)
        .map(|_| {
            let v = rand_nonzero(p, d, rng);
            let g = &pool[rng.gen_range(0..pool.len())];
            let noise = if s >= 1 { m.bilinear_form(&v).mul(&rand_hom(p, d, s - 1, 2, rng))? } else { PrimePoly::zero(p, d) };
            line_at_zero(m, s, &[v], g.add(&noise))
        })
        .collect()
}

fn random_graph(n: usize, density: f64, rng: &mut ChaCha8Rng) -> RelGraph {
    let mut g = RelGraph::empty(n);
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(density) {
                g.add_edge(a, b);
            }
        }
    }
    g
}

fn full_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// `1 ≤ dd ≤ cc`; returns `(dd, cc)` when both are exact.
pub(crate) fn chain(g: &RelGraph, f: &mut Findings, label: &str) -> Result<Option<(usize, usize)>> {
    let (dd, cc) = (dd_number(g)?.value(), cc_number(g)?.value());
    f.work(g.order() as u64);
    let (Some(dd), Some(cc)) = (dd, cc) else {
        f.hypothesis(&format!("exact numbers for {label}"), false);
        return Ok(None);
    };
    f.check(1 <= dd && dd <= cc, || json!({"graph": label, "edges": g.edges(), "dd": dd, "cc": cc}));
    Ok(Some((dd, cc)))
}

/// The basic chain, monotonicity under induced subgraphs, and the clique guarantee
/// `ω(X') ≥ ⌈|X'|/dd⌉` on every subset.
pub fn basicdn(pr: &Params, f: &mut Findings) -> Result<()> {
    let (p, d, s) = (pr.p, pr.d, pr.s);
    let m = Arc::new(QuadForm::sum_of_squares(p, d)?);
    let mut rng = rng(pr.seed);
    for t in 0..pr.trials {
        let n = rng.gen_range(1..=pr.n.clamp(1, 10));
        let g = if t % 2 == 0 {
            RelGraph::from_elements(&fiber(&m, s, n, rng.gen_range(1..=3), &mut rng)?)?
        } else {
            random_graph(n, rng.gen_range(0.2..0.8), &mut rng)
        };
        let Some((dd, cc)) = chain(&g, f, &format!("trial {t}"))? else { continue };
        f.check((dd == 1) == (cc == 1) && (cc == 1) == g.is_clique(&(0..n).collect::<Vec<_>>()), || {
            json!({"trial": t, "edges": g.edges(), "dd": dd, "cc": cc})
        });
        let sub: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.6)).collect();
        if !sub.is_empty() {
            if let Some(dd_sub) = dd_number(&g.induced(&sub))?.value() {
                f.check(dd_sub <= dd, || json!({"trial": t, "edges": g.edges(), "subset": sub, "dd_sub": dd_sub, "dd": dd}));
            }
        }
        let mut short = None;
        for mask in 1..=full_mask(n) {
            let omega = g.clique_number_within(mask)?;
            if omega * dd < mask.count_ones() as usize {
                short = Some((mask, omega));
                break;
            }
        }
        f.check(short.is_none(), || json!({"trial": t, "edges": g.edges(), "subset_mask_and_omega": short, "dd": dd}));
    }
    Ok(())
}

/// Replicating the right side of a certificate keeps it auxiliary and equally dense.
pub fn duplicate(pr: &Params, f: &mut Findings) -> Result<()> {
    let mut rng = rng(pr.seed);
    for t in 0..pr.trials {
        let n = rng.gen_range(2..=pr.n.clamp(2, 10));
        let g = random_graph(n, rng.gen_range(0.2..0.8), &mut rng);
        let dd = dd_number(&g)?;
        let (Some(value), Some(cert)) = (dd.value(), dd.certificate) else {
            f.hypothesis("certificate available", false);
            continue;
        };
        let eps = BigRational::new(BigInt::from(1), BigInt::from(value));
        for copies in 1..=3 {
            let r = cert.replicate(copies);
            f.work(r.right.len() as u64);
            f.check(
                r.right.len() == copies * cert.right.len() && r.is_auxiliary_for(&g) && r.density() == cert.density() && r.is_dense(&eps),
                || json!({"trial": t, "edges": g.edges(), "copies": copies}),
            );
        }
    }
    Ok(())
}

/// An element related to nothing in `X` raises `dd` by exactly one.
pub fn lonely(pr: &Params, f: &mut Findings) -> Result<()> {
    let (p, d, s) = (pr.p, pr.d, pr.s);
    let m = Arc::new(QuadForm::sum_of_squares(p, d)?);
    let mut rng = rng(pr.seed);
    for t in 0..pr.trials {
        let n = rng.gen_range(1..=pr.n.clamp(1, 9));
        let xs = fiber(&m, s, n, rng.gen_range(1..=3), &mut rng)?;
        let y = 'search: loop {
            let cand = line_at_zero(&m, s, &[rand_nonzero(p, d, &mut rng)], rand_hom(p, d, s, 4, &mut rng))?;
            for x in &xs {
                if x.related(&cand)? {
                    continue 'search;
                }
            }
            break cand;
        };
        let mut all = xs.clone();
        all.push(y);
        let g = RelGraph::from_elements(&xs)?;
        let h = RelGraph::from_elements(&all)?;
        f.work((n * n) as u64);
        let (Some(a), Some(b)) = (dd_number(&g)?.value(), dd_number(&h)?.value()) else {
            f.hypothesis("exact numbers", false);
            continue;
        };
        chain(&g, f, &format!("trial {t} without y"))?;
        chain(&h, f, &format!("trial {t}"))?;
        f.check(b == a + 1, || json!({"trial": t, "edges": g.edges(), "dd_X": a, "dd_X_plus_y": b}));
    }
    Ok(())
}

/// Fibers over `0` of level-two elements: shifted classes with member noise, lines in a
/// few planes, and unrelated singletons.
fn core_instance(m: &Arc<QuadForm>, s: u32, rng: &mut ChaCha8Rng) -> Result<Vec<GammaElement>> {
    let (p, d) = (m.modulus(), m.dim());
    let mut xs = fiber(m, s, rng.gen_range(2..=6), rng.gen_range(1..=2), rng)?;
    for _ in 0..rng.gen_range(0..=2) {
        let w = [rand_nonzero(p, d, rng), rand_nonzero(p, d, rng)];
        let g = rand_hom(p, d, s, 3, rng);
        for c in 1..=rng.gen_range(2..=4u64) {
            xs.push(line_at_zero(m, s, &[w[0].add(&w[1].scale(c))], g.clone())?);
        }
    }
    for _ in 0..rng.gen_range(0..=2) {
        xs.push(line_at_zero(m, s, &[rand_nonzero(p, d, rng)], rand_hom(p, d, s, 3, rng))?);
    }
    xs.sort();
    xs.dedup();
    Ok(xs)
}

fn decompose(xs: &[GammaElement], k: usize, f: &mut Findings) -> Result<Option<WeakCore>> {
    let g = RelGraph::from_elements(xs)?;
    let Some((dd, _)) = chain(&g, f, "fiber")? else { return Ok(None) };
    f.work((xs.len() * xs.len()) as u64);
    Ok(Some(weak_core_decompose(xs, dd, k)?))
}

/// The weak-core split re-validated independently; the constants `C` and `D` are observed.
pub fn gweakcore1(pr: &Params, f: &mut Findings) -> Result<()> {
    let (p, d, s, k) = (pr.p, pr.d, pr.s, pr.k.max(1));
    let m = Arc::new(QuadForm::sum_of_squares(p, d)?);
    let mut rng = rng(pr.seed);
    let (mut max_cliques, mut max_obst, mut max_obst_dim, mut dimension_ok) = (0usize, 0usize, 0usize, true);
    for t in 0..pr.trials {
        let xs = core_instance(&m, s, &mut rng)?;
        let Some(core) = decompose(&xs, k, f)? else { continue };
        dimension_ok &= core.dimension_ok;
        max_cliques = max_cliques.max(core.cliques.len());
        max_obst = max_obst.max(core.obstruction.len());
        max_obst_dim = max_obst_dim.max(core.obstruction.iter().map(|w| w.dim()).max().unwrap_or(0));
        f.check(core.validate(&xs)?, || json!({"trial": t, "cliques": core.cliques.len(), "bad": core.bad.len(), "flags": core.flags}));
    }
    f.hypothesis("d + 1 ≥ 2(k−2)s + 6k", dimension_ok);
    f.observe("max_cliques", max_cliques);
    f.observe("max_obstruction_count", max_obst);
    f.observe("max_obstruction_dim", max_obst_dim);
    f.observe("obstruction_dim_bound", WeakCore::obstruction_dim_bound(k, s));
    Ok(())
}

/// The classification assembled from the weak core covers every element.
pub fn gweakcore2(pr: &Params, f: &mut Findings) -> Result<()> {
    let (p, d, s, k) = (pr.p, pr.d, pr.s, pr.k.max(1));
    let m = Arc::new(QuadForm::sum_of_squares(p, d)?);
    let mut rng = rng(pr.seed);
    let (mut max_k, mut max_c, mut max_d) = (0usize, 0usize, 0usize);
    for t in 0..pr.trials {
        let xs = core_instance(&m, s, &mut rng)?;
        let Some(core) = decompose(&xs, k, f)? else { continue };
        let pair = classification_from_core(&core, k)?;
        max_k = max_k.max(pair.k);
        max_c = max_c.max(pair.c);
        max_d = max_d.max(pair.d);
        let out = classification_check(&xs, &pair)?;
        f.check(out.holds, || json!({"trial": t, "witness": out.witness, "K": pair.k, "C": pair.c, "D": pair.d}));
    }
    f.observe("max_K", max_k);
    f.observe("max_C", max_c);
    f.observe("max_D", max_d);
    Ok(())
}

/// Mycielski graphs: triangle-free, `cc(M_i) ≥ 3·2^{i−3}`, and the claimed `dd(M_i) ≤ i`;
/// the five-cycle has `dd = cc = 3`.
pub fn exex001(pr: &Params, f: &mut Findings) -> Result<()> {
    let c5 = RelGraph::cycle(5);
    let c5_numbers = chain(&c5, f, "C5")?;
    f.check(c5_numbers == Some((3, 3)), || json!({"graph": "C5", "dd_cc": c5_numbers}));
    let mut table = Vec::new();
    for i in 3..=pr.k.max(3) {
        let g = mycielski_graph(i);
        f.check(g.is_triangle_free(), || json!({"i": i, "claim": "triangle-free"}));
        let dd = dd_number(&g)?;
        let fractional = dd.fractional.as_ref().map(|q| q.to_string());
        let Some((dd, cc)) = chain(&g, f, &format!("M{i}"))? else { continue };
        table.push(json!({"i": i, "order": g.order(), "cc": cc, "dd": dd, "dd_fractional": fractional}));
        let cc_floor = 3usize << (i - 3);
        f.check(cc >= cc_floor, || json!({"i": i, "cc": cc, "claim": format!("cc >= {cc_floor}")}));
        f.check(dd <= i, || json!({"i": i, "dd": dd, "claim": format!("dd <= {i}")}));
    }
    f.observe("mycielski", table);
    Ok(())
}
