//! Lemma id → job runner, anchor text and default parameters.

use silab_core::Result;

use crate::config::Params;
use crate::jobs::{counting, freiman, gamma, graphs, ideals, structure};
use crate::report::Findings;
use crate::HarnessError;

pub type Runner = fn(&Params, &mut Findings) -> Result<()>;

pub struct Entry {
    pub id: &'static str,
    /// Short statement of what the job checks.
    pub anchor: &'static str,
    pub defaults: Params,
    /// Parameters for the full suite when they differ from the defaults.
    pub full: Option<Params>,
    pub runner: Runner,
}

impl Entry {
    /// Fast uses the defaults; full uses the explicit full parameters, or the
    /// defaults with four times the trials.
    pub fn params_for(&self, suite: &str) -> Params {
        match (suite, &self.full) {
            ("full", Some(p)) => p.clone(),
            ("full", None) if self.defaults.trials > 1 => Params {
                trials: self.defaults.trials * 4,
                ..self.defaults.clone()
            },
            _ => self.defaults.clone(),
        }
    }
}

const B: u64 = 1 << 24;

const fn e(id: &'static str, anchor: &'static str, defaults: Params, runner: Runner) -> Entry {
    Entry {
        id,
        anchor,
        defaults,
        full: None,
        runner,
    }
}

const fn ef(id: &'static str, anchor: &'static str, defaults: Params, full: Params, runner: Runner) -> Entry {
    Entry {
        id,
        anchor,
        defaults,
        full: Some(full),
        runner,
    }
}

#[rustfmt::skip]
static ENTRIES: [Entry; 39] = [
    e("gr-1", "sunflower intersection of V+V_i equals V for dim V + 2 independent petals", Params::new(5, 8, 0, 2, 0, 200, 1, B), ideals::gr_minus1),
    ef("gr0", "ideal-level intersection: f lies in every J_{V+V_i} exactly when f lies in J_V", Params::new(11, 7, 1, 0, 2, 200, 2, B), Params::new(13, 7, 1, 0, 2, 200, 2, B), ideals::gr0),
    e("grm", "dense point sets: tuples whose ideals all contain f force f into the base ideal", Params::new(3, 7, 1, 1, 20, 20, 3, B), ideals::grm),
    e("killL", "multiplying by a linear form from an independent direction cannot create membership", Params::new(7, 6, 2, 2, 0, 30, 4, B), ideals::kill_l),
    e("w3s-roundtrip", "explicit generators of the degree-s part of an intersection of shifted ideals", Params::new(7, 9, 2, 1, 2, 20, 5, B), ideals::w3s_roundtrip),
    e("noloop3", "vanishing on the common zero set decides membership in J_V", Params::new(5, 5, 2, 1, 0, 12, 6, B), ideals::noloop3),
    e("counting01", "points of a quadric on an affine subspace: p^{d-r-1} main term with square-root error", Params::new(13, 5, 0, 0, 0, 1, 7, 1 << 26), counting::counting01),
    e("counting02", "points of a quadric on the common kernel of r independent forms", Params::new(13, 5, 0, 0, 0, 1, 8, 1 << 26), counting::counting02),
    e("iissoo", "rank relations for a quadratic form restricted to an affine subspace", Params::new(7, 6, 0, 0, 0, 200, 9, B), counting::iissoo),
    e("cbn", "rank on an orthogonal complement drops by at most 2 dim V' when V' is added", Params::new(7, 6, 0, 0, 0, 200, 10, B), counting::cbn),
    e("iiddpp", "linearly dependent k-tuples are rare; isotropic tuples are observed", Params::new(7, 4, 0, 2, 0, 2000, 11, 1 << 22), counting::iiddpp),
    e("ns", "a nonzero polynomial of degree r has at most r p^{d-1} zeros", Params::new(7, 3, 2, 0, 0, 40, 12, B), counting::ns),
    e("nott", "relatedness of shifted ideals is not transitive", Params::new(11, 7, 1, 0, 0, 1, 13, B), gamma::nott),
    e("spsp1", "two elements related to a common level-one element are related to each other", Params::new(7, 6, 2, 0, 0, 60, 14, B), gamma::spsp1),
    e("a+b", "the sum of elements of levels k and k' has level at most k + k'", Params::new(7, 6, 2, 3, 0, 200, 15, B), gamma::a_plus_b),
    e("basicdn", "1 <= dd <= cc, monotone under induced subgraphs, with large cliques in every subset", Params::new(7, 6, 1, 2, 8, 60, 16, B), graphs::basicdn),
    e("duplicate", "replicating an auxiliary graph keeps its density", Params::new(7, 6, 1, 0, 8, 60, 17, B), graphs::duplicate),
    e("lonely", "an element related to nothing raises dd by exactly one", Params::new(7, 6, 1, 2, 7, 50, 18, B), graphs::lonely),
    e("gwts", "a weak class is either strong or confined by a small obstruction subspace", Params::new(7, 9, 1, 2, 0, 40, 19, B), gamma::gwts),
    e("gweakdic", "m independent subspaces modulo U, or a small subspace meeting all of them", Params::new(7, 6, 0, 0, 3, 200, 20, B), gamma::gweakdic),
    e("gweakcore1", "a fiber splits into boundedly many cliques and a part meeting a small union of subspaces", Params::new(7, 11, 1, 2, 0, 50, 21, B), graphs::gweakcore1),
    e("gweakcore2", "a structure-obstacle pair classifies every element of the fiber", Params::new(7, 11, 1, 2, 0, 50, 22, B), graphs::gweakcore2),
    e("exex001", "Mycielski graphs: triangle-free, large clique cover, density dependence bounded by i", Params::new(7, 3, 0, 4, 0, 1, 23, B), graphs::exex001),
    e("gsp", "a linear map separating V from the translates c + V for c outside V", Params::new(11, 4, 0, 0, 3, 50, 24, 1 << 22), structure::gsp),
    ef("manyd", "many structure-obstacle decompositions with independent structure parts", Params::new(11, 6, 0, 3, 2, 1, 25, 100_000), Params::new(13, 6, 0, 3, 2, 1, 25, 100_000), structure::manyd),
    e("g1621", "a large subset on which a classified map is a Freiman homomorphism of order 16", Params::new(31, 5, 1, 2, 0, 3, 26, 1 << 20), structure::g1621),
    e("llfh", "sums of fractional parts of linear phases are Freiman homomorphisms modulo Z", Params::new(7, 2, 0, 0, 0, 40, 27, 1 << 20), freiman::llfh),
    e("thisisns", "dimension threshold N(s) = (2s+16)(15s+453)", Params::new(3, 1, 1, 0, 0, 1, 0, 1), freiman::thisisns),
    e("crescale", "scaled progressions keep a (c/(c+2))^D fraction of their points", Params::new(13, 3, 0, 3, 0, 100, 28, 1 << 20), freiman::crescale),
    e("gsol-forward", "locally linear maps are order-4 Freiman homomorphisms and refit exactly", Params::new(11, 4, 1, 3, 0, 50, 29, B), freiman::gsol_forward),
    e("coco01", "pairwise-consistent ideal values come from one common polynomial", Params::new(5, 5, 1, 0, 5, 3, 30, B), freiman::coco01),
    e("coco1c-forward", "common-shift data is consistent modulo ideals of spans with V", Params::new(7, 6, 1, 1, 5, 3, 31, B), freiman::coco1c_forward),
    e("cocon1", "values G(L_x) plus quadric members are consistent modulo J_{x-y}", Params::new(7, 6, 2, 1, 5, 3, 32, B), freiman::cocon1),
    e("cocozero", "a super polynomial vanishing on all directions has coefficients in J^M", Params::new(7, 7, 1, 1, 10, 2, 33, B), freiman::cocozero),
    e("cocoprr-forward", "symmetric super polynomials give a symmetric cocycle modulo J^M", Params::new(7, 6, 3, 2, 5, 2, 34, B), freiman::cocoprr_forward),
    e("coco4", "coboundaries satisfy the triangle congruence", Params::new(7, 6, 2, 0, 5, 3, 35, B), freiman::coco4),
    e("cocon2-forward", "quadratic-in-L_x data is additive modulo J_x intersect J_y", Params::new(7, 6, 3, 2, 5, 2, 36, B), freiman::cocon2_forward),
    e("g324-i-ii-iv", "large spectrum, Bohr sets and a proper progression inside 2H-2H", Params::new(11, 2, 0, 0, 0, 4, 37, B), freiman::g324),
    e("energy-def", "M-energy counted against a direct quadruple loop", Params::new(7, 4, 1, 0, 6, 10, 38, B), gamma::energy_def),
];

pub fn entries() -> &'static [Entry] {
    &ENTRIES
}

pub fn lookup(id: &str) -> std::result::Result<&'static Entry, HarnessError> {
    let id = if id == "gri" { "gr0" } else { id };
    ENTRIES.iter().find(|e| e.id == id).ok_or_else(|| HarnessError::UnknownLemma(id.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXPECTED: [&str; 39] = [
        "gr-1", "gr0", "grm", "killL", "w3s-roundtrip", "noloop3", "counting01", "counting02", "iissoo", "cbn", "iiddpp", "ns",
        "nott", "spsp1", "a+b", "basicdn", "duplicate", "lonely", "gwts", "gweakdic", "gweakcore1", "gweakcore2", "exex001", "gsp",
        "manyd", "g1621", "llfh", "thisisns", "crescale", "gsol-forward", "coco01", "coco1c-forward", "cocon1", "cocozero",
        "cocoprr-forward", "coco4", "cocon2-forward", "g324-i-ii-iv", "energy-def",
    ];

    #[test]
    fn registry_is_complete_and_unique() {
        let ids: Vec<&str> = entries().iter().map(|e| e.id).collect();
        assert_eq!(ids, EXPECTED);
        let mut sorted = ids.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), ids.len());
        assert_eq!(lookup("gri").unwrap().id, "gr0");
        assert!(matches!(lookup("nope"), Err(HarnessError::UnknownLemma(_))));
    }

    #[test]
    fn defaults_are_valid() {
        for e in entries() {
            e.defaults.validate().unwrap_or_else(|err| panic!("{}: {err}", e.id));
            if let Some(f) = &e.full {
                f.validate().unwrap_or_else(|err| panic!("{}: {err}", e.id));
            }
        }
    }
}
