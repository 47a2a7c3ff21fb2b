//! Job runners, one per registry entry.

pub mod counting;
pub mod freiman;
pub mod gamma;
pub mod graphs;
pub mod ideals;
pub mod structure;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use silab_core::polyring::{monomials_of_degree, monomials_up_to};
use silab_core::{FpVector, PrimePoly, QuadForm, Subspace};

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn rand_vec(p: u64, d: usize, rng: &mut ChaCha8Rng) -> FpVector {
    FpVector::from_raw(p, (0..d).map(|_| rng.gen_range(0..p)).collect())
}

pub(crate) fn rand_nonzero(p: u64, d: usize, rng: &mut ChaCha8Rng) -> FpVector {
    loop {
        let v = rand_vec(p, d, rng);
        if !v.is_zero() {
            return v;
        }
    }
}

/// Span of `k` random vectors, so dimension at most `k`.
pub(crate) fn rand_span(p: u64, d: usize, k: usize, rng: &mut ChaCha8Rng) -> Subspace {
    let vs: Vec<FpVector> = (0..k).map(|_| rand_vec(p, d, rng)).collect();
    Subspace::span_of(p, d, &vs)
}

/// A subspace of dimension exactly `k`.
pub(crate) fn rand_subspace(p: u64, d: usize, k: usize, rng: &mut ChaCha8Rng) -> Subspace {
    loop {
        let s = rand_span(p, d, k, rng);
        if s.dim() == k {
            return s;
        }
    }
}

/// Random polynomial of degree at most `s` with a few terms.
pub(crate) fn rand_poly(p: u64, d: usize, s: u32, terms: usize, rng: &mut ChaCha8Rng) -> PrimePoly {
    let mons = monomials_up_to(d, s);
    PrimePoly::from_terms(p, d, (0..terms).map(|_| (mons[rng.gen_range(0..mons.len())].clone(), rng.gen_range(1..p))))
}

/// Random homogeneous polynomial of degree `s` with a few terms.
pub(crate) fn rand_hom(p: u64, d: usize, s: u32, terms: usize, rng: &mut ChaCha8Rng) -> PrimePoly {
    let mons = monomials_of_degree(d, s);
    PrimePoly::from_terms(p, d, (0..terms).map(|_| (mons[rng.gen_range(0..mons.len())].clone(), rng.gen_range(1..p))))
}

/// `M·g_0 + Σ ((hA)·n)·g_h` over a basis of `v`, every summand of degree at most `s`.
pub(crate) fn rand_member(m: &QuadForm, v: &Subspace, s: u32, rng: &mut ChaCha8Rng) -> PrimePoly {
    let (p, d) = (m.modulus(), m.dim());
    let mut f = PrimePoly::zero(p, d);
    if s >= 2 {
        f = m.to_poly().mul(&rand_poly(p, d, s - 2, 3, rng)).expect("degree within cap");
    }
    if s >= 1 {
        for h in v.basis() {
            f = f.add(&m.bilinear_form(&h).mul(&rand_poly(p, d, s - 1, 3, rng)).expect("degree within cap"));
        }
    }
    f
}

pub(crate) fn primes_between(lo: u64, hi: u64) -> Vec<u64> {
    (lo..=hi).filter(|&q| q > 2 && silab_core::field_linalg::is_prime(q)).collect()
}

pub(crate) fn vec_json(v: &FpVector) -> Value {
    json!(v.coords())
}

pub(crate) fn space_json(v: &Subspace) -> Value {
    Value::Array(v.basis().iter().map(vec_json).collect())
}
