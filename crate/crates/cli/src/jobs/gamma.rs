//! Jobs on shifted M-ideals, their relation and the weak/strong class dichotomy.

use rand::Rng;
use serde_json::json;
use silab_core::field_linalg::spaces_independent_mod;
use silab_core::gamma::{gwts_check, m_energy, weak_dichotomy, Dichotomy, GwtsBranch};
use silab_core::{FpVector, GammaElement, MIdeal, PrimePoly, QuadForm, Result, Subspace};
use std::sync::Arc;

use super::{rand_hom, rand_nonzero, rand_span, rand_vec, rng, space_json};
use crate::config::Params;
use crate::report::Findings;

fn sos(p: u64, d: usize) -> Result<Arc<QuadForm>> {
    Ok(Arc::new(QuadForm::sum_of_squares(p, d)?))
}

fn at_zero(m: &Arc<QuadForm>, s: u32, gens: &[FpVector], f: PrimePoly) -> Result<GammaElement> {
    let (p, d) = (m.modulus(), m.dim());
    GammaElement::new(m.clone(), s, FpVector::zero(p, d), Subspace::span_of(p, d, gens), f)
}

/// The three verdicts for `J_{e1} + x_2`, `J_{e2}`, `J_{e3}` under `M = n·n`.
pub fn nott(pr: &Params, f: &mut Findings) -> Result<()> {
    let (p, d) = (pr.p, pr.d);
    if d < 3 {
        return Err(silab_core::Error::HypothesisNotMet("three coordinate directions need d ≥ 3".into()));
    }
    let m = sos(p, d)?;
    let e = |i| FpVector::unit(p, d, i);
    let a = at_zero(&m, 1, &[e(0)], PrimePoly::var(p, d, 1))?;
    let b = at_zero(&m, 1, &[e(1)], PrimePoly::zero(p, d))?;
    let c = at_zero(&m, 1, &[e(2)], PrimePoly::zero(p, d))?;
    let got = [a.related(&b)?, b.related(&c)?, a.related(&c)?];
    f.work(3);
    f.observe("verdicts", got);
    f.check(got == [true, true, false], || json!({"expected": [true, true, false], "got": got}));
    Ok(())
}

/// `x_1 ~ y` and `x_2 ~ y` with `y` of level one force `x_1 ~ x_2`.
pub fn spsp1(pr: &Params, f: &mut Findings) -> Result<()> {
    let (p, d, s) = (pr.p, pr.d, pr.s);
    let m = sos(p, d)?;
    let mut rng = rng(pr.seed);
    let mut premises = 0u64;
    for _ in 0..pr.trials {
        let h = rand_vec(p, d, &mut rng);
        let y = GammaElement::line(m.clone(), s, h.clone(), rand_hom(p, d, s, 3, &mut rng))?;
        let near = |rng: &mut rand_chacha::ChaCha8Rng| -> Result<GammaElement> {
            let extra = rand_vec(p, d, rng);
            let v = Subspace::span_of(p, d, &[h.clone(), extra.clone()]);
            let shift = if rng.gen_bool(0.2) {
                rand_hom(p, d, s, 3, rng)
            } else if s >= 1 {
                y.shift().add(&m.bilinear_form(&extra).mul(&rand_hom(p, d, s - 1, 2, rng))?)
            } else {
                y.shift().clone()
            };
            GammaElement::new(m.clone(), s, h.clone(), v, shift)
        };
        let x1 = near(&mut rng)?;
        let x2 = near(&mut rng)?;
        f.work(3);
        if x1.related(&y)? && x2.related(&y)? {
            premises += 1;
            f.check(x1.related(&x2)?, || json!({"h": h.coords(), "x1": x1.shift().to_text(), "x2": x2.shift().to_text(), "y": y.shift().to_text()}));
        }
    }
    f.observe("premises_met", premises);
    Ok(())
}

fn rand_element(m: &Arc<QuadForm>, s: u32, k: usize, rng: &mut rand_chacha::ChaCha8Rng) -> Result<GammaElement> {
    let (p, d) = (m.modulus(), m.dim());
    let h = if rng.gen_bool(0.3) { FpVector::zero(p, d) } else { rand_nonzero(p, d, rng) };
    // At most `k − 1` extra directions keeps the level at most `k` whether or not `h = 0`.
    let mut gens = vec![h.clone()];
    for _ in 0..rng.gen_range(0..=k.saturating_sub(1)) {
        gens.push(rand_vec(p, d, rng));
    }
    GammaElement::new(m.clone(), s, h, Subspace::span_of(p, d, &gens), rand_hom(p, d, s, 3, rng))
}

/// Levels add: `a ∈ Γ_k`, `b ∈ Γ_{k'}` give `a ⊕ b ∈ Γ_{k+k'}`.
pub fn a_plus_b(pr: &Params, f: &mut Findings) -> Result<()> {
    let (p, d, s) = (pr.p, pr.d, pr.s);
    let m = sos(p, d)?;
    let mut rng = rng(pr.seed);
    for _ in 0..pr.trials {
        let k = rng.gen_range(1..=pr.k.max(1));
        let k2 = rng.gen_range(1..=pr.k.max(1));
        let a = rand_element(&m, s, k, &mut rng)?;
        let b = rand_element(&m, s, k2, &mut rng)?;
        if !a.in_level(k) || !b.in_level(k2) {
            continue;
        }
        let c = a.hat_add(&b)?;
        f.work(1);
        f.check(c.in_level(k + k2), || json!({"k": k, "k'": k2, "level": c.level(), "pi_zero": c.pi().is_zero()}));
    }
    Ok(())
}

/// The weak/strong dichotomy on fibers built around a common shift plus member noise,
/// and on lines inside a plane.
pub fn gwts(pr: &Params, f: &mut Findings) -> Result<()> {
    let (p, d, s) = (pr.p, pr.d, pr.s);
    let m = sos(p, d)?;
    let mut rng = rng(pr.seed);
    let (mut strong, mut obstructed, mut dimension_ok) = (0u64, 0u64, true);
    for t in 0..pr.trials {
        let g = rand_hom(p, d, s, 3, &mut rng);
        let xs: Vec<GammaElement> = if t % 2 == 0 {
            (0..4)
                .map(|_| {
                    let v = rand_nonzero(p, d, &mut rng);
                    let noise = if s >= 1 { m.bilinear_form(&v).mul(&rand_hom(p, d, s - 1, 2, &mut rng))? } else { PrimePoly::zero(p, d) };
                    at_zero(&m, s, &[v], g.add(&noise))
                })
                .collect::<Result<_>>()?
        } else {
            let w = [rand_nonzero(p, d, &mut rng), rand_nonzero(p, d, &mut rng)];
            (1..5u64).map(|c| at_zero(&m, s, &[w[0].add(&w[1].scale(c))], g.clone())).collect::<Result<_>>()?
        };
        let r = gwts_check(&xs, 2, 2, None)?;
        f.work(xs.len() as u64);
        dimension_ok &= r.dimension_ok;
        if !r.weak_class {
            continue;
        }
        match &r.branch {
            GwtsBranch::Strong(_) => strong += 1,
            GwtsBranch::Obstruction(_) => obstructed += 1,
        }
        f.check(r.consistent, || json!({"trial": t, "branch": format!("{:?}", r.branch)}));
    }
    f.hypothesis("d ≥ 2k + 2(s+1)(k−2) + 5", dimension_ok);
    f.observe("strong_branch", strong);
    f.observe("obstruction_branch", obstructed);
    Ok(())
}

/// Either `m` members independent modulo `U`, or a subspace `W ⊇ U` of dimension at most
/// `k' + (m−1)(k−k')` meeting every member beyond `U`.
pub fn gweakdic(pr: &Params, f: &mut Findings) -> Result<()> {
    let (p, d) = (pr.p, pr.d);
    let mut rng = rng(pr.seed);
    let (mut indep, mut obst) = (0u64, 0u64);
    for _ in 0..pr.trials {
        let kp = rng.gen_range(0..=1usize);
        let u = rand_span(p, d, kp, &mut rng);
        let kp = u.dim();
        let k = kp + rng.gen_range(1..=2usize);
        let mm = rng.gen_range(1..=pr.n.max(1));
        let confined = rng.gen_bool(0.5).then(|| rand_span(p, d, k + 1, &mut rng).sum(&u));
        let spaces: Vec<Subspace> = (0..rng.gen_range(1..=6))
            .map(|_| {
                let extra = (0..k - kp).map(|_| match &confined {
                    Some(c) => c.combine(&(0..c.dim()).map(|_| rng.gen_range(0..p)).collect::<Vec<_>>()),
                    None => rand_vec(p, d, &mut rng),
                });
                let mut sp = u.clone();
                for x in extra.collect::<Vec<_>>() {
                    sp = sp.with_vector(&x);
                }
                sp
            })
            .collect();
        f.work(spaces.len() as u64);
        match weak_dichotomy(&spaces, &u, mm) {
            Dichotomy::Independent(chosen) => {
                indep += 1;
                let picked: Vec<Subspace> = chosen.iter().map(|&i| spaces[i].clone()).collect();
                f.check(chosen.len() == mm && spaces_independent_mod(&picked, &u), || json!({"chosen": chosen, "U": space_json(&u)}));
            }
            Dichotomy::Obstruction(w) => {
                obst += 1;
                let kmax = spaces.iter().map(|v| v.dim()).max().unwrap_or(kp);
                let ok = u.is_subspace_of(&w)
                    && w.dim() <= kp + (mm - 1) * (kmax - kp)
                    && spaces.iter().all(|v| v.intersection(&w) != u);
                f.check(ok, || json!({"W": space_json(&w), "U": space_json(&u), "m": mm}));
            }
        }
    }
    f.observe("independent_branch", indep);
    f.observe("obstruction_branch", obst);
    Ok(())
}

/// M-energy against a direct quadruple loop with membership per quadruple.
pub fn energy_def(pr: &Params, f: &mut Findings) -> Result<()> {
    let (p, d, s) = (pr.p, pr.d, pr.s);
    let m = sos(p, d)?;
    let mut rng = rng(pr.seed);
    for t in 0..pr.trials {
        let n = pr.n.clamp(2, 8);
        let base = rand_vec(p, d, &mut rng);
        let step = rand_vec(p, d, &mut rng);
        let hs: Vec<FpVector> = (0..n).map(|i| base.add(&step.scale((i % 3) as u64)).add(&FpVector::unit(p, d, (i / 3) % d))).collect();
        let xi: Vec<PrimePoly> = if t % 2 == 0 {
            hs.iter().map(|h| m.bilinear_form(h).scale(rng.gen_range(0..p))).collect()
        } else {
            (0..n).map(|_| rand_hom(p, d, s, 2, &mut rng)).collect()
        };
        let rep = m_energy(m.clone(), s, &hs, [&xi, &xi, &xi, &xi], pr.budget as u128)?;
        let mut naive = 0u64;
        let mut diagonal_related = true;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for e in 0..n {
                        if hs[a].sub(&hs[b]) != hs[c].sub(&hs[e]) {
                            continue;
                        }
                        let span = Subspace::span_of(p, d, &[hs[a].clone(), hs[b].clone(), hs[c].clone(), hs[e].clone()]);
                        let diff = xi[a].sub(&xi[b]).sub(&xi[c]).add(&xi[e]);
                        let inside = MIdeal::new((*m).clone(), span)?.contains(&diff, s)?.is_member();
                        naive += inside as u64;
                        if a == c && b == e {
                            diagonal_related &= inside;
                        }
                    }
                }
            }
        }
        f.work((n as u64).pow(4));
        f.check(rep.energy == naive, || json!({"trial": t, "energy": rep.energy, "naive": naive}));
        f.check(rep.undirected && diagonal_related && rep.energy >= (n * n) as u64, || json!({"trial": t, "reason": "trivial quadruples missing"}));
    }
    Ok(())
}
