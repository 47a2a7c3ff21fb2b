//! Separation maps, structure-obstacle decompositions and Freiman subset extraction.

use rand::Rng;
use serde_json::json;
use silab_core::freiman::random_proper_gap;
use silab_core::quadform::random_nondegenerate;
use silab_core::structure::{build_separation_map, classification_check, extract_freiman_subset, find_so_decomposition, ExtractParams, SoSearchParams};
use silab_core::relgraph::ObstaclePair;
use silab_core::{FpVector, LocallyLinear, QuadForm, Result, Subspace};

use super::{rand_span, rand_vec, rng, space_json, vec_json};
use crate::config::Params;
use crate::report::Findings;

/// Every `c ∈ J` lies in `V` or has `V ∩ (c + Φ^{-1}(box)) = ∅`, checked over all of `V`.
pub fn gsp(pr: &Params, f: &mut Findings) -> Result<()> {
    let p = pr.p;
    let mut rng = rng(pr.seed);
    for t in 0..pr.trials {
        let k = rng.gen_range(2..=pr.d.clamp(2, 5));
        let v = rand_span(p, k, rng.gen_range(0..k), &mut rng);
        let mut j = vec![FpVector::zero(p, k)];
        j.extend((0..rng.gen_range(0..=pr.n.max(1))).map(|_| rand_vec(p, k, &mut rng)));
        if let Some(x) = v.basis().first() {
            j.push(x.clone());
        }
        let phi = build_separation_map(&v, &j)?;
        f.work((p as u64).pow(v.dim() as u32) * j.len() as u64);
        let bad = phi.violation(&v, &j, pr.budget as u128)?;
        f.check(bad.is_none() && phi.rows.len() == j.len(), || {
            json!({"trial": t, "V": space_json(&v), "J": j.iter().map(vec_json).collect::<Vec<_>>(), "violating_index": bad})
        });
    }
    Ok(())
}

/// Search for `R` decompositions with independent `T_i` for the trivial pair, each re-verified.
pub fn manyd(pr: &Params, f: &mut Findings) -> Result<()> {
    let (p, d) = (pr.p, pr.d);
    let (d1, d2) = (pr.k, d.saturating_sub(pr.k));
    let count = pr.n.max(1);
    let m = QuadForm::sum_of_squares(p, d)?;
    let pair = ObstaclePair::trivial(p, d);
    let rep = find_so_decomposition(&m, &pair, d1, d2, count, &SoSearchParams::new(pr.budget.min(100_000), pr.seed))?;
    f.work(rep.stats.samples);
    f.hypothesis("d' ≥ max(D, 3)", rep.hypotheses_hold);
    f.check(rep.succeeded(), || json!({"failure": rep.failure, "samples": rep.stats.samples}));
    for (i, dec) in rep.decompositions.iter().enumerate() {
        let v = dec.verify(&m, &pair, d1, d2)?;
        f.check(v.holds(), || json!({"decomposition": i, "verification": format!("{v:?}")}));
    }
    let ts: Vec<&Subspace> = rep.decompositions.iter().map(|x| &x.t).collect();
    let sum = Subspace::sum_all(p, d, ts.iter().copied());
    f.check(sum.dim() == ts.iter().map(|x| x.dim()).sum::<usize>(), || json!({"claim": "T_i independent", "sum_dim": sum.dim()}));
    f.observe("samples", rep.stats.samples);
    f.observe("rejected", rep.stats.rejected());
    Ok(())
}

/// Locally linear values on a proper GAP: the sampled classification holds, and the
/// extracted subset meets `|W'|·80^{K+1} ≥ |W|` and the order-16 spot check.
pub fn g1621(pr: &Params, f: &mut Findings) -> Result<()> {
    let (p, d, s) = (pr.p, pr.d, pr.s as i64);
    let mut rng = rng(pr.seed);
    for t in 0..pr.trials {
        let m = random_nondegenerate(p, d, &mut rng);
        let rank = rng.gen_range(1..=pr.k.clamp(1, d.min(3)));
        let gap = random_proper_gap(p, d, rank, 3, &mut rng)?;
        let w = gap.elements(pr.budget as u128)?;
        let xi = LocallyLinear::random(p, d, rank, s, &mut rng).tabulate(&gap);
        let pair = ObstaclePair::trivial(p, d);
        let seed = pr.seed.wrapping_add(t as u64);
        let cls = classification_check(&m, &w, &xi, &pair, 200, seed)?;
        f.check(cls.holds() && cls.tuples > 0, || json!({"trial": t, "classification_witness": cls.witness}));
        let params = ExtractParams {
            samples: 300,
            seed,
            budget: pr.budget as u128,
        };
        let rep = extract_freiman_subset(&m, &Subspace::full(p, d), &w, &xi, &pair, &params)?;
        f.work(rep.freiman.membership_checks + cls.tuples);
        f.check(rep.bound_holds && rep.freiman.holds(), || {
            json!({"trial": t, "W": w.len(), "subset": rep.subset.len(), "counterexample": rep.freiman.counterexample})
        });
    }
    Ok(())
}
