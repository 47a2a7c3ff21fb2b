//! Relation graphs, auxiliary graphs, density dependence and clique cover numbers.
//!
//! Exact routines work on bitmasks and accept at most 64 vertices.

use crate::error::{Error, Result};
use crate::field_linalg::Subspace;
use crate::gamma::{classify_equivalence, gwts_check, ClassVerdict, GammaElement, GwtsBranch};
use crate::mideal::MIdeal;
use crate::polyring::PrimePoly;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// Default vertex budget for the exact solvers.
pub const EXACT_BUDGET: usize = 40;
const MAX_CLIQUES: usize = 200_000;

/// A simple undirected graph without self-loops.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RelGraph {
    n: usize,
    adj: Vec<Vec<bool>>,
}

impl RelGraph {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            adj: vec![vec![false; n]; n],
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for i in 0..n {
            for j in i + 1..n {
                g.add_edge(i, j);
            }
        }
        g
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = Self::empty(n);
        for i in 0..n {
            g.add_edge(i, (i + 1) % n);
        }
        g
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(n);
        for &(a, b) in edges {
            if a >= n || b >= n || a == b {
                return Err(Error::Invalid(format!("bad edge ({a}, {b}) on {n} vertices")));
            }
            g.add_edge(a, b);
        }
        Ok(g)
    }

    /// Relation graph of a set of elements: `{u, v}` is an edge iff `u ~ v`.
    pub fn from_elements(xs: &[GammaElement]) -> Result<Self> {
        let mut g = Self::empty(xs.len());
        for i in 0..xs.len() {
            for j in i + 1..xs.len() {
                if xs[i].related(&xs[j])? {
                    g.add_edge(i, j);
                }
            }
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        assert!(a != b, "self-loop");
        self.adj[a][b] = true;
        self.adj[b][a] = true;
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a][b]
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.adj[i][j] {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn is_clique(&self, vs: &[usize]) -> bool {
        vs.iter().enumerate().all(|(i, &a)| vs[i + 1..].iter().all(|&b| a != b && self.adj[a][b]))
    }

    pub fn induced(&self, vs: &[usize]) -> Self {
        let mut g = Self::empty(vs.len());
        for (i, &a) in vs.iter().enumerate() {
            for (j, &b) in vs.iter().enumerate().skip(i + 1) {
                if self.adj[a][b] {
                    g.add_edge(i, j);
                }
            }
        }
        g
    }

    /// The graph with one extra vertex adjacent to nothing.
    pub fn with_isolated(&self) -> Self {
        let mut g = Self::empty(self.n + 1);
        for (a, b) in self.edges() {
            g.add_edge(a, b);
        }
        g
    }

    pub fn complement(&self) -> Self {
        let mut g = Self::empty(self.n);
        for i in 0..self.n {
            for j in i + 1..self.n {
                if !self.adj[i][j] {
                    g.add_edge(i, j);
                }
            }
        }
        g
    }

    pub fn is_triangle_free(&self) -> bool {
        let n = self.n;
        (0..n).all(|a| (a + 1..n).all(|b| !self.adj[a][b] || (b + 1..n).all(|c| !(self.adj[a][c] && self.adj[b][c]))))
    }

    fn masks(&self) -> Result<Vec<u64>> {
        if self.n > 64 {
            return Err(Error::Unsupported(format!("{} vertices exceed the bitmask solvers", self.n)));
        }
        Ok((0..self.n)
            .map(|i| (0..self.n).filter(|&j| self.adj[i][j]).fold(0u64, |m, j| m | (1 << j)))
            .collect())
    }

    /// Maximal cliques by Bron–Kerbosch with pivoting, each sorted, in discovery order.
    pub fn maximal_cliques(&self) -> Result<Vec<Vec<usize>>> {
        let adj = self.masks()?;
        let mut out = Vec::new();
        let all = if self.n == 64 { u64::MAX } else { (1u64 << self.n) - 1 };
        bron_kerbosch(&adj, 0, all, 0, &mut out)?;
        Ok(out.into_iter().map(bits).collect())
    }

    /// Size of a largest clique inside `within`.
    pub fn clique_number_within(&self, within: u64) -> Result<usize> {
        let adj = self.masks()?;
        let mut best = 0;
        max_clique(&adj, 0, within, &mut best);
        Ok(best)
    }

    pub fn independence_number(&self) -> Result<usize> {
        let c = self.complement();
        let all = if self.n == 64 { u64::MAX } else { (1u64 << self.n) - 1 };
        c.clique_number_within(all)
    }

    /// Canonical adjacency string; two graphs are isomorphic iff their forms agree.
    pub fn canonical_form(&self) -> Vec<u8> {
        canonical_form(self)
    }

    pub fn is_isomorphic(&self, o: &Self) -> bool {
        self.n == o.n && self.edges().len() == o.edges().len() && self.canonical_form() == o.canonical_form()
    }

    /// DIMACS-style edge list.
    pub fn to_dimacs(&self) -> String {
        let e = self.edges();
        let mut s = format!("p edge {} {}\n", self.n, e.len());
        for (a, b) in e {
            s.push_str(&format!("e {} {}\n", a + 1, b + 1));
        }
        s
    }

    pub fn from_dimacs(text: &str) -> Result<Self> {
        let mut g: Option<Self> = None;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('c')) {
            let parts: Vec<&str> = line.split_whitespace().collect();
            let num = |i: usize| -> Result<usize> {
                parts.get(i).and_then(|x| x.parse().ok()).ok_or_else(|| Error::Parse(format!("bad line `{line}`")))
            };
            match parts.first() {
                Some(&"p") => g = Some(Self::empty(num(2)?)),
                Some(&"e") => {
                    let gg = g.as_mut().ok_or_else(|| Error::Parse("edge before header".into()))?;
                    let (a, b) = (num(1)?, num(2)?);
                    if a == 0 || b == 0 || a > gg.n || b > gg.n || a == b {
                        return Err(Error::Parse(format!("bad edge `{line}`")));
                    }
                    gg.add_edge(a - 1, b - 1);
                }
                _ => return Err(Error::Parse(format!("unknown line `{line}`"))),
            }
        }
        g.ok_or_else(|| Error::Parse("missing header".into()))
    }
}

fn bits(mut m: u64) -> Vec<usize> {
    let mut v = Vec::new();
    while m != 0 {
        let i = m.trailing_zeros() as usize;
        v.push(i);
        m &= m - 1;
    }
    v
}

fn bron_kerbosch(adj: &[u64], r: u64, mut p: u64, mut x: u64, out: &mut Vec<u64>) -> Result<()> {
    if p == 0 && x == 0 {
        if out.len() >= MAX_CLIQUES {
            return Err(Error::BudgetExceeded {
                required: MAX_CLIQUES as u128 + 1,
                budget: MAX_CLIQUES as u128,
            });
        }
        out.push(r);
        return Ok(());
    }
    let pivot = bits(p | x).into_iter().max_by_key(|&u| (adj[u] & p).count_ones()).expect("nonempty");
    for v in bits(p & !adj[pivot]) {
        bron_kerbosch(adj, r | (1 << v), p & adj[v], x & adj[v], out)?;
        p &= !(1 << v);
        x |= 1 << v;
    }
    Ok(())
}

fn max_clique(adj: &[u64], size: usize, cand: u64, best: &mut usize) {
    if cand == 0 {
        *best = (*best).max(size);
        return;
    }
    if size + cand.count_ones() as usize <= *best {
        return;
    }
    let v = cand.trailing_zeros() as usize;
    max_clique(adj, size + 1, cand & adj[v], best);
    max_clique(adj, size, cand & !(1 << v), best);
}

/// Clique cover number, exact when the graph fits the budget.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliqueCover {
    pub lower: usize,
    pub upper: usize,
    pub exact: bool,
    /// A partition into cliques of size `upper`.
    pub partition: Vec<Vec<usize>>,
}

impl CliqueCover {
    pub fn value(&self) -> Option<usize> {
        self.exact.then_some(self.upper)
    }
}

fn greedy_cover(g: &RelGraph) -> Vec<Vec<usize>> {
    let mut parts: Vec<Vec<usize>> = Vec::new();
    for v in 0..g.n {
        match parts.iter_mut().find(|c| c.iter().all(|&u| g.adj[u][v])) {
            Some(c) => c.push(v),
            None => parts.push(vec![v]),
        }
    }
    parts
}

pub fn cc_number(g: &RelGraph) -> Result<CliqueCover> {
    cc_number_with_budget(g, EXACT_BUDGET)
}

pub fn cc_number_with_budget(g: &RelGraph, budget: usize) -> Result<CliqueCover> {
    let greedy = greedy_cover(g);
    if g.n == 0 {
        return Ok(CliqueCover {
            lower: 0,
            upper: 0,
            exact: true,
            partition: Vec::new(),
        });
    }
    let alpha = if g.n <= 64 { g.independence_number()? } else { 1 };
    if g.n > budget {
        return Ok(CliqueCover {
            lower: alpha,
            upper: greedy.len(),
            exact: false,
            partition: greedy,
        });
    }
    let adj = g.masks()?;
    let mut order: Vec<usize> = (0..g.n).collect();
    order.sort_by_key(|&v| (adj[v].count_ones(), v));
    let mut best = greedy.clone();
    let mut classes: Vec<u64> = Vec::new();
    cover_bb(&adj, &order, 0, &mut classes, &mut best, alpha);
    let partition: Vec<Vec<usize>> = best.into_iter().map(|mut c| {
        c.sort();
        c
    }).collect();
    debug_assert!(partition.iter().all(|c| g.is_clique(c)));
    Ok(CliqueCover {
        lower: partition.len(),
        upper: partition.len(),
        exact: true,
        partition,
    })
}

fn cover_bb(adj: &[u64], order: &[usize], at: usize, classes: &mut Vec<u64>, best: &mut Vec<Vec<usize>>, floor: usize) {
    if best.len() <= floor.max(1) {
        return;
    }
    if at == order.len() {
        if classes.len() < best.len() {
            *best = classes.iter().map(|&c| bits(c)).collect();
        }
        return;
    }
    let v = order[at];
    for i in 0..classes.len() {
        if classes[i] & !adj[v] == 0 {
            classes[i] |= 1 << v;
            cover_bb(adj, order, at + 1, classes, best, floor);
            classes[i] &= !(1 << v);
        }
    }
    if classes.len() + 1 < best.len() {
        classes.push(1 << v);
        cover_bb(adj, order, at + 1, classes, best, floor);
        classes.pop();
    }
}

/// A bipartite graph whose right vertices are given by their left neighborhoods.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuxGraph {
    pub left: usize,
    pub right: Vec<Vec<usize>>,
}

impl AuxGraph {
    /// Every right neighborhood is a clique of `g`.
    pub fn is_auxiliary_for(&self, g: &RelGraph) -> bool {
        self.left == g.order() && self.right.iter().all(|nb| nb.iter().all(|&x| x < g.order()) && g.is_clique(nb))
    }

    /// `min_x deg(x) / |Y|`.
    pub fn density(&self) -> BigRational {
        if self.right.is_empty() {
            return BigRational::zero();
        }
        let mut deg = vec![0usize; self.left];
        for nb in &self.right {
            for &x in nb {
                deg[x] += 1;
            }
        }
        let min = deg.into_iter().min().unwrap_or(0);
        BigRational::new(BigInt::from(min), BigInt::from(self.right.len()))
    }

    pub fn is_dense(&self, eps: &BigRational) -> bool {
        self.density() >= *eps
    }

    /// `m` identical copies of the right side.
    pub fn replicate(&self, m: usize) -> Self {
        Self {
            left: self.left,
            right: (0..m).flat_map(|_| self.right.iter().cloned()).collect(),
        }
    }
}

/// Density dependence number with the fractional optimum and an auxiliary-graph certificate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DensityDependence {
    pub lower: usize,
    pub upper: usize,
    pub exact: bool,
    /// Optimal `max_w min_x Σ_{C ∋ x} w_C` is `1 / fractional`.
    pub fractional: Option<BigRational>,
    pub certificate: Option<AuxGraph>,
}

impl DensityDependence {
    pub fn value(&self) -> Option<usize> {
        self.exact.then_some(self.upper)
    }
}

pub fn dd_number(g: &RelGraph) -> Result<DensityDependence> {
    dd_number_with_budget(g, EXACT_BUDGET)
}

pub fn dd_number_with_budget(g: &RelGraph, budget: usize) -> Result<DensityDependence> {
    if g.n == 0 {
        return Err(Error::Invalid("density dependence of an empty graph".into()));
    }
    if g.n > budget {
        let cc = cc_number_with_budget(g, budget)?;
        let lower = if g.n <= 64 {
            let all = if g.n == 64 { u64::MAX } else { (1u64 << g.n) - 1 };
            g.n.div_ceil(g.clique_number_within(all)?.max(1))
        } else {
            1
        };
        return Ok(DensityDependence {
            lower,
            upper: cc.upper,
            exact: false,
            fractional: None,
            certificate: None,
        });
    }
    let cliques = g.maximal_cliques()?;
    let lp = fractional_cover(g.n, &cliques)?;
    let value = ceil_ratio(&lp.value);
    let certificate = aux_from_weights(g.n, &cliques, &lp.weights);
    if !certificate.is_auxiliary_for(g) || certificate.density() * lp.value.clone() < BigRational::one() {
        return Err(Error::Invalid("fractional cover certificate failed".into()));
    }
    Ok(DensityDependence {
        lower: value,
        upper: value,
        exact: true,
        fractional: Some(lp.value),
        certificate: Some(certificate),
    })
}

fn ceil_ratio(r: &BigRational) -> usize {
    r.ceil().to_integer().to_usize().expect("small value")
}

fn aux_from_weights(n: usize, cliques: &[Vec<usize>], w: &[BigRational]) -> AuxGraph {
    let lcm = w.iter().fold(BigInt::one(), |acc, x| num_integer::Integer::lcm(&acc, x.denom()));
    let mut right = Vec::new();
    for (c, x) in cliques.iter().zip(w) {
        let k = (x * BigRational::from_integer(lcm.clone())).to_integer().to_usize().expect("small multiplicity");
        for _ in 0..k {
            right.push(c.clone());
        }
    }
    AuxGraph { left: n, right }
}

struct LpSolution {
    value: BigRational,
    weights: Vec<BigRational>,
}

/// Minimum `Σ y_C` subject to `Σ_{C ∋ v} y_C ≥ 1`, `y ≥ 0`, solved through its
/// dual `max Σ z_v` s.t. `Σ_{v ∈ C} z_v ≤ 1` by an exact simplex with Bland's rule.
fn fractional_cover(n: usize, cliques: &[Vec<usize>]) -> Result<LpSolution> {
    let m = cliques.len();
    let cols = n + m;
    let zero = BigRational::zero;
    let one = BigRational::one;
    let mut t: Vec<Vec<BigRational>> = Vec::with_capacity(m + 1);
    for (i, c) in cliques.iter().enumerate() {
        let mut row = vec![zero(); cols + 1];
        for &v in c {
            row[v] = one();
        }
        row[n + i] = one();
        row[cols] = one();
        t.push(row);
    }
    let mut obj = vec![zero(); cols + 1];
    for x in obj.iter_mut().take(n) {
        *x = -one();
    }
    t.push(obj);
    let mut basis: Vec<usize> = (n..n + m).collect();
    loop {
        let Some(enter) = (0..cols).find(|&j| t[m][j].is_negative()) else {
            break;
        };
        let mut leave: Option<(usize, BigRational)> = None;
        for i in 0..m {
            if t[i][enter].is_positive() {
                let ratio = &t[i][cols] / &t[i][enter];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let (r, _) = leave.ok_or_else(|| Error::Invalid("unbounded covering dual".into()))?;
        let piv = t[r][enter].clone();
        for x in t[r].iter_mut() {
            *x = &*x / &piv;
        }
        let prow = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i == r || row[enter].is_zero() {
                continue;
            }
            let f = row[enter].clone();
            for (a, b) in row.iter_mut().zip(&prow) {
                if !b.is_zero() {
                    *a -= &f * b;
                }
            }
        }
        basis[r] = enter;
    }
    let value = t[m][cols].clone();
    let weights: Vec<BigRational> = (0..m).map(|i| t[m][n + i].clone()).collect();
    let total = weights.iter().fold(zero(), |a, b| a + b);
    let covered = (0..n).all(|v| {
        cliques
            .iter()
            .zip(&weights)
            .filter(|(c, _)| c.contains(&v))
            .fold(zero(), |a, (_, w)| a + w)
            >= one()
    });
    if total != value || !covered || weights.iter().any(|w| w.is_negative()) {
        return Err(Error::Invalid("simplex optimum failed duality check".into()));
    }
    Ok(LpSolution { value, weights })
}

/// Result of the direct search over auxiliary graphs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BruteForceDd {
    /// Least `C` for which a `C^{-1}`-dense auxiliary graph with at most `max_right` right vertices was found.
    pub upper: usize,
    /// `max_{X'} ⌈|X'| / ω(X')⌉`, forced by pigeonhole on any dense auxiliary graph.
    pub lower: usize,
    pub witness: AuxGraph,
}

/// Searches auxiliary graphs directly: multisets of maximal cliques of size up to
/// `max_right` (enlarging a neighborhood to a maximal clique never lowers density).
pub fn dd_brute_force(g: &RelGraph, max_right: usize) -> Result<BruteForceDd> {
    if g.n == 0 || g.n > 12 {
        return Err(Error::Unsupported("brute force handles 1..=12 vertices".into()));
    }
    let full = (1u64 << g.n) - 1;
    let mut lower = 1;
    for sub in 1..=full {
        let w = g.clique_number_within(sub)?;
        lower = lower.max((sub.count_ones() as usize).div_ceil(w));
    }
    let cliques: Vec<u64> = g.maximal_cliques()?.iter().map(|c| c.iter().fold(0u64, |m, &v| m | (1 << v))).collect();
    for c in lower..=g.n {
        for y in 1..=max_right {
            let need = y.div_ceil(c);
            let mut cov = vec![0usize; g.n];
            let mut pick = Vec::new();
            if multiset_search(&cliques, 0, y, need, &mut cov, &mut pick) {
                let right = pick.iter().map(|&i| bits(cliques[i])).collect();
                return Ok(BruteForceDd {
                    upper: c,
                    lower,
                    witness: AuxGraph { left: g.n, right },
                });
            }
        }
    }
    Err(Error::Invalid("no dense auxiliary graph within the search bound".into()))
}

fn multiset_search(cl: &[u64], from: usize, left: usize, need: usize, cov: &mut [usize], pick: &mut Vec<usize>) -> bool {
    if cov.iter().any(|&c| c + left < need) {
        return false;
    }
    if left == 0 {
        return true;
    }
    for i in from..cl.len() {
        for v in bits(cl[i]) {
            cov[v] += 1;
        }
        pick.push(i);
        if multiset_search(cl, i, left - 1, need, cov, pick) {
            return true;
        }
        pick.pop();
        for v in bits(cl[i]) {
            cov[v] -= 1;
        }
    }
    false
}

/// The Mycielskian: vertices `X ⊔ X' ⊔ {a}` with `x' = x + n` and `a = 2n`.
pub fn mycielskian(g: &RelGraph) -> RelGraph {
    let n = g.n;
    let mut m = RelGraph::empty(2 * n + 1);
    for (x, y) in g.edges() {
        m.add_edge(x, y);
        m.add_edge(x, y + n);
        m.add_edge(y, x + n);
    }
    for y in 0..n {
        m.add_edge(y + n, 2 * n);
    }
    m
}

/// `M_2 = K_2`, `M_i = μ(M_{i−1})`.
pub fn mycielski_graph(i: usize) -> RelGraph {
    assert!(i >= 2, "the sequence starts at M_2");
    (2..i).fold(RelGraph::complete(2), |g, _| mycielskian(&g))
}

fn canonical_form(g: &RelGraph) -> Vec<u8> {
    let n = g.n;
    // Colour refinement to an ordered partition, then brute force inside cells.
    let mut colour: Vec<usize> = vec![0; n];
    loop {
        let mut sig: Vec<(usize, Vec<usize>, usize)> = (0..n)
            .map(|v| {
                let mut nb: Vec<usize> = (0..n).filter(|&u| g.adj[v][u]).map(|u| colour[u]).collect();
                nb.sort();
                (colour[v], nb, v)
            })
            .collect();
        sig.sort();
        let mut next = vec![0; n];
        let mut c = 0;
        for i in 0..n {
            if i > 0 && (sig[i].0 != sig[i - 1].0 || sig[i].1 != sig[i - 1].1) {
                c += 1;
            }
            next[sig[i].2] = c;
        }
        let stable = (0..n).all(|a| (0..n).all(|b| (colour[a] == colour[b]) == (next[a] == next[b])));
        colour = next;
        if stable {
            break;
        }
    }
    let ncol = colour.iter().max().map_or(0, |&c| c + 1);
    let cells: Vec<Vec<usize>> = (0..ncol).map(|c| (0..n).filter(|&v| colour[v] == c).collect()).collect();
    let mut best: Option<Vec<u8>> = None;
    let mut order = Vec::with_capacity(n);
    permute_cells(g, &cells, 0, &mut order, &mut best);
    best.unwrap_or_default()
}

fn permute_cells(g: &RelGraph, cells: &[Vec<usize>], ci: usize, order: &mut Vec<usize>, best: &mut Option<Vec<u8>>) {
    if ci == cells.len() {
        let mut code = Vec::with_capacity(g.n * g.n / 2);
        for i in 0..order.len() {
            for j in i + 1..order.len() {
                code.push(g.adj[order[i]][order[j]] as u8);
            }
        }
        if best.as_ref().map_or(true, |b| code > *b) {
            *best = Some(code);
        }
        return;
    }
    let mut perm = cells[ci].clone();
    permute_rec(g, cells, ci, &mut perm, 0, order, best);
}

fn permute_rec(
    g: &RelGraph,
    cells: &[Vec<usize>],
    ci: usize,
    perm: &mut Vec<usize>,
    k: usize,
    order: &mut Vec<usize>,
    best: &mut Option<Vec<u8>>,
) {
    if k == perm.len() {
        let base = order.len();
        order.extend_from_slice(perm);
        permute_cells(g, cells, ci + 1, order, best);
        order.truncate(base);
        return;
    }
    for i in k..perm.len() {
        perm.swap(k, i);
        permute_rec(g, cells, ci, perm, k + 1, order, best);
        perm.swap(k, i);
    }
}

/// All graphs on `n` vertices up to isomorphism, by one-vertex extension and canonical dedup.
pub fn nonisomorphic_graphs(n: usize) -> Vec<RelGraph> {
    let mut level = vec![RelGraph::empty(0)];
    for k in 0..n {
        let mut seen: HashSet<Vec<u8>> = HashSet::new();
        let mut next = Vec::new();
        for g in &level {
            for nb in 0u64..(1 << k) {
                let mut h = g.with_isolated();
                for u in bits(nb) {
                    h.add_edge(u, k);
                }
                if seen.insert(h.canonical_form()) {
                    next.push(h);
                }
            }
        }
        level = next;
    }
    level
}

/// Good part partitioned into validated cliques, bad part, and the obstruction union.
#[derive(Clone, Debug)]
pub struct WeakCore {
    pub cliques: Vec<Vec<GammaElement>>,
    pub bad: Vec<GammaElement>,
    pub obstruction: Vec<Subspace>,
    pub dimension_ok: bool,
    /// Points where the supplied density bound was inconsistent with the data.
    pub flags: Vec<String>,
}

impl WeakCore {
    /// Independent re-check: cliques by pairwise relatedness, bad elements by subspace intersection.
    pub fn validate(&self, input: &[GammaElement]) -> Result<bool> {
        for c in &self.cliques {
            for i in 0..c.len() {
                for j in i + 1..c.len() {
                    if !c[i].related(&c[j])? {
                        return Ok(false);
                    }
                }
            }
        }
        for x in &self.bad {
            if !self.obstruction.iter().any(|y| !x.subspace().intersection(y).is_trivial()) {
                return Ok(false);
            }
        }
        let mut out: Vec<GammaElement> = self.cliques.iter().flatten().chain(&self.bad).cloned().collect();
        let mut inp = input.to_vec();
        out.sort();
        inp.sort();
        Ok(out == inp)
    }

    pub fn obstruction_dim_bound(k: usize, s: u32) -> usize {
        (s as usize + 2 * k - 2) * k.saturating_sub(1)
    }
}

/// Splits a fiber over `0` into cliques and an obstruction part, following the
/// greedy independent-extension induction on the density bound `d_bound`.
pub fn weak_core_decompose(xs: &[GammaElement], d_bound: usize, k: usize) -> Result<WeakCore> {
    if xs.iter().any(|x| !x.pi().is_zero()) {
        return Err(Error::Invalid("fiber must lie over 0".into()));
    }
    let mut sorted = xs.to_vec();
    sorted.sort();
    let (d, s) = match sorted.first() {
        Some(x) => (x.form().dim(), x.degree()),
        None => {
            return Ok(WeakCore {
                cliques: vec![],
                bad: vec![],
                obstruction: vec![],
                dimension_ok: true,
                flags: vec![],
            })
        }
    };
    let dimension_ok = k < 2 || d + 1 >= 2 * (k - 2) * s as usize + 6 * k;
    let mut out = WeakCore {
        cliques: Vec::new(),
        bad: Vec::new(),
        obstruction: Vec::new(),
        dimension_ok,
        flags: Vec::new(),
    };
    decompose_rec(sorted, d_bound, k, s, &mut out)?;
    Ok(out)
}

fn greedy_cliques(xs: Vec<GammaElement>) -> Result<Vec<Vec<GammaElement>>> {
    let mut parts: Vec<Vec<GammaElement>> = Vec::new();
    for x in xs {
        let mut placed = false;
        for c in parts.iter_mut() {
            let mut ok = true;
            for y in c.iter() {
                if !x.related(y)? {
                    ok = false;
                    break;
                }
            }
            if ok {
                c.push(x.clone());
                placed = true;
                break;
            }
        }
        if !placed {
            parts.push(vec![x]);
        }
    }
    Ok(parts)
}

fn decompose_rec(xs: Vec<GammaElement>, d_bound: usize, k: usize, s: u32, out: &mut WeakCore) -> Result<()> {
    if xs.is_empty() {
        return Ok(());
    }
    if k <= 1 {
        out.cliques.extend(greedy_cliques(xs)?);
        return Ok(());
    }
    if d_bound <= 1 {
        let parts = greedy_cliques(xs)?;
        if parts.len() > 1 {
            out.flags.push(format!("density bound exhausted with {} cliques left", parts.len()));
        }
        out.cliques.extend(parts);
        return Ok(());
    }
    let big_k = s as usize + 2 * k - 1;
    let mut chosen: Vec<usize> = vec![0];
    let mut span = xs[0].subspace().clone();
    let related_to_all = |x: &GammaElement, chosen: &[usize]| -> Result<bool> {
        for &c in chosen {
            if !x.related(&xs[c])? {
                return Ok(false);
            }
        }
        Ok(true)
    };
    while chosen.len() < big_k {
        let mut next = None;
        for (i, x) in xs.iter().enumerate() {
            if chosen.contains(&i) || !span.intersection(x.subspace()).is_trivial() {
                continue;
            }
            if related_to_all(x, &chosen)? {
                next = Some(i);
                break;
            }
        }
        match next {
            Some(i) => {
                span = span.sum(xs[i].subspace());
                chosen.push(i);
            }
            None => break,
        }
    }
    let mut b1 = Vec::new();
    let mut b2: Vec<Vec<GammaElement>> = vec![Vec::new(); chosen.len()];
    for x in &xs {
        let mut miss = None;
        for (slot, &c) in chosen.iter().enumerate() {
            if !x.related(&xs[c])? {
                miss = Some(slot);
                break;
            }
        }
        match miss {
            None => b1.push(x.clone()),
            Some(slot) => b2[slot].push(x.clone()),
        }
    }
    if chosen.len() < big_k {
        out.obstruction.push(span);
        // Members with trivial V meet no subspace, so they stay on the clique side.
        let (stuck, bad): (Vec<_>, Vec<_>) = b1.into_iter().partition(|x| x.subspace().is_trivial());
        out.bad.extend(bad);
        if !stuck.is_empty() {
            out.cliques.extend(greedy_cliques(stuck)?);
        }
    } else {
        let parts = greedy_cliques(b1)?;
        if parts.len() > 1 {
            out.flags.push("core part split into several cliques".into());
        }
        out.cliques.extend(parts);
    }
    for part in b2 {
        decompose_rec(part, d_bound - 1, k, s, out)?;
    }
    Ok(())
}

/// A structure-obstacle pair `(C_0, Y)` with bounds `(K, C, D)`.
#[derive(Clone, Debug)]
pub struct ObstaclePair {
    pub c0: Vec<PrimePoly>,
    pub y: Vec<Subspace>,
    pub k: usize,
    pub c: usize,
    pub d: usize,
}

impl ObstaclePair {
    /// Checks the shape: `0 ∈ C_0`, `|C_0| ≤ K+1`, pairwise distinct modulo `J^M`, and the `Y` bounds.
    pub fn validate(&self, ideal: &MIdeal, s: u32) -> Result<()> {
        if !self.c0.iter().any(|f| f.is_zero()) {
            return Err(Error::Invalid("C_0 must contain 0".into()));
        }
        if self.c0.len() > self.k + 1 {
            return Err(Error::Invalid(format!("|C_0| = {} exceeds K+1 = {}", self.c0.len(), self.k + 1)));
        }
        for i in 0..self.c0.len() {
            for j in i + 1..self.c0.len() {
                if ideal.contains(&self.c0[i].sub(&self.c0[j]), s)?.is_member() {
                    return Err(Error::Invalid(format!("C_0 members {i} and {j} agree modulo J^M")));
                }
            }
        }
        if self.y.len() > self.c || self.y.iter().any(|w| w.dim() > self.d) {
            return Err(Error::Invalid("obstruction union exceeds its (C, D) shape".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassificationOutcome {
    pub holds: bool,
    /// First element meeting neither branch.
    pub witness: Option<usize>,
}

/// Each `(0, J^M_V + f)` meets `Y` nontrivially or is related to `(0, J^M + g)` for some `g ∈ C_0`.
pub fn classification_check(xs: &[GammaElement], pair: &ObstaclePair) -> Result<ClassificationOutcome> {
    let Some(first) = xs.first() else {
        return Ok(ClassificationOutcome { holds: true, witness: None });
    };
    let m = first.form().clone();
    let s = first.degree();
    pair.validate(&MIdeal::quadric(&m), s)?;
    let (p, d) = (m.modulus(), m.dim());
    let reps: Vec<GammaElement> = pair
        .c0
        .iter()
        .map(|g| GammaElement::new(m.clone(), s, crate::field_linalg::FpVector::zero(p, d), Subspace::trivial(p, d), g.clone()))
        .collect::<Result<_>>()?;
    for (i, x) in xs.iter().enumerate() {
        if !x.pi().is_zero() {
            return Err(Error::Invalid("classification is defined over the zero fiber".into()));
        }
        if pair.y.iter().any(|w| !x.subspace().intersection(w).is_trivial()) {
            continue;
        }
        let mut ok = false;
        for r in &reps {
            if x.related(r)? {
                ok = true;
                break;
            }
        }
        if !ok {
            return Ok(ClassificationOutcome {
                holds: false,
                witness: Some(i),
            });
        }
    }
    Ok(ClassificationOutcome { holds: true, witness: None })
}

/// Converts a weak-core split into a classification: each strong clique
/// contributes its witness to `C_0`; any other clique contributes the
/// obstruction found by the weak/strong dichotomy, or failing that the sum of its subspaces.
pub fn classification_from_core(core: &WeakCore, k: usize) -> Result<ObstaclePair> {
    let Some(first) = core.cliques.iter().flatten().chain(&core.bad).next() else {
        return Err(Error::Invalid("empty decomposition".into()));
    };
    let m = first.form().clone();
    let s = first.degree();
    let (p, d) = (m.modulus(), m.dim());
    let q = MIdeal::quadric(&m);
    let mut c0: Vec<PrimePoly> = vec![PrimePoly::zero(p, d)];
    let mut y = core.obstruction.clone();
    for clique in &core.cliques {
        match classify_equivalence(clique)? {
            ClassVerdict::Strong { witness } => {
                let g = witness.shift().clone();
                let mut dup = false;
                for h in &c0 {
                    if q.contains(&g.sub(h), s)?.is_member() {
                        dup = true;
                        break;
                    }
                }
                if !dup {
                    c0.push(g);
                }
            }
            _ => match gwts_check(clique, k, k, None)?.branch {
                GwtsBranch::Obstruction(w) => y.push(w),
                GwtsBranch::Strong(_) => {
                    y.push(Subspace::sum_all(p, d, clique.iter().map(|x| x.subspace())));
                }
            },
        }
    }
    let max_dim = y.iter().map(|w| w.dim()).max().unwrap_or(0);
    Ok(ObstaclePair {
        k: c0.len() - 1,
        c: y.len(),
        d: max_dim,
        c0,
        y,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_linalg::FpVector;
    use crate::quadform::QuadForm;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn random_graph(n: usize, rng: &mut ChaCha8Rng, density: f64) -> RelGraph {
        let mut g = RelGraph::empty(n);
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen_bool(density) {
                    g.add_edge(i, j);
                }
            }
        }
        g
    }

    /// Exhaustive minimum clique partition over all set partitions.
    fn cc_oracle(g: &RelGraph) -> usize {
        fn rec(g: &RelGraph, v: usize, parts: &mut Vec<Vec<usize>>, best: &mut usize) {
            if v == g.order() {
                *best = (*best).min(parts.len());
                return;
            }
            for i in 0..parts.len() {
                if parts[i].iter().all(|&u| g.has_edge(u, v)) {
                    parts[i].push(v);
                    rec(g, v + 1, parts, best);
                    parts[i].pop();
                }
            }
            parts.push(vec![v]);
            rec(g, v + 1, parts, best);
            parts.pop();
        }
        let mut best = usize::MAX;
        rec(g, 0, &mut Vec::new(), &mut best);
        best
    }

    #[test]
    fn cc_examples() {
        assert_eq!(cc_number(&RelGraph::complete(6)).unwrap().value(), Some(1));
        assert_eq!(cc_number(&RelGraph::empty(5)).unwrap().value(), Some(5));
        let c5 = cc_number(&RelGraph::cycle(5)).unwrap();
        assert_eq!(c5.value(), Some(3));
        assert_eq!(c5.partition.len(), 3);
        assert!(c5.partition.iter().all(|c| RelGraph::cycle(5).is_clique(c)));
    }

    #[test]
    fn cc_matches_partition_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..60 {
            let n = rng.gen_range(1..9);
            let g = random_graph(n, &mut rng, 0.5);
            assert_eq!(cc_number(&g).unwrap().value(), Some(cc_oracle(&g)));
        }
    }

    #[test]
    fn cc_bounds_mode() {
        let g = RelGraph::cycle(12);
        let r = cc_number_with_budget(&g, 5).unwrap();
        assert!(!r.exact && r.lower <= 6 && r.upper >= 6);
    }

    #[test]
    fn dd_examples() {
        assert_eq!(dd_number(&RelGraph::complete(4)).unwrap().value(), Some(1));
        let c5 = dd_number(&RelGraph::cycle(5)).unwrap();
        assert_eq!(c5.value(), Some(3));
        assert_eq!(c5.fractional, Some(BigRational::new(5.into(), 2.into())));
        let cert = c5.certificate.unwrap();
        assert!(cert.is_auxiliary_for(&RelGraph::cycle(5)));
        assert_eq!(cert.density(), BigRational::new(2.into(), 5.into()));
        let bf = dd_brute_force(&RelGraph::cycle(5), 10).unwrap();
        assert_eq!((bf.lower, bf.upper), (3, 3));
        // Disjoint union of cliques: one class per clique.
        let g = RelGraph::from_edges(5, &[(0, 1), (1, 2), (0, 2), (3, 4)]).unwrap();
        assert_eq!(dd_number(&g).unwrap().value(), Some(2));
    }

    #[test]
    fn lonely_vertex_adds_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = rng.gen_range(1..10);
            let g = random_graph(n, &mut rng, 0.6);
            let a = dd_number(&g).unwrap().value().unwrap();
            let b = dd_number(&g.with_isolated()).unwrap().value().unwrap();
            assert_eq!(b, a + 1);
        }
    }

    #[test]
    fn basic_chain_and_clique_extraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..40 {
            let n = rng.gen_range(1..10);
            let g = random_graph(n, &mut rng, 0.5);
            let dd = dd_number(&g).unwrap().value().unwrap();
            let cc = cc_number(&g).unwrap().value().unwrap();
            assert!(1 <= dd && dd <= cc);
            let alpha = g.independence_number().unwrap();
            assert!(alpha <= dd);
            for sub in 1u64..(1 << n) {
                let w = g.clique_number_within(sub).unwrap();
                assert!(w >= (sub.count_ones() as usize).div_ceil(dd));
            }
            let keep: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.7)).collect();
            if !keep.is_empty() {
                let h = g.induced(&keep);
                assert!(dd_number(&h).unwrap().value().unwrap() <= dd);
                assert!(cc_number(&h).unwrap().value().unwrap() <= cc);
            }
        }
    }

    #[test]
    fn replication_keeps_density() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..30 {
            let g = random_graph(rng.gen_range(2..8), &mut rng, 0.5);
            let cert = dd_number(&g).unwrap().certificate.unwrap();
            let m = rng.gen_range(1..5);
            let r = cert.replicate(m);
            assert_eq!(r.right.len(), cert.right.len() * m);
            assert_eq!(r.density(), cert.density());
            assert!(r.is_auxiliary_for(&g));
        }
    }

    #[test]
    fn mycielski_examples() {
        let m3 = mycielskian(&RelGraph::complete(2));
        assert!(m3.is_isomorphic(&RelGraph::cycle(5)));
        let m4 = mycielski_graph(4);
        assert_eq!(m4.order(), 11);
        assert!(m4.is_triangle_free());
        assert_eq!(cc_number(&m4).unwrap().value(), Some(6));
        // Cliques of a triangle-free graph have at most two vertices, so density is at most 2/11.
        let dd = dd_number(&m4).unwrap();
        assert_eq!(dd.value(), Some(6));
        assert_eq!(dd.fractional, Some(BigRational::new(11.into(), 2.into())));
        assert_eq!(dd_number(&mycielski_graph(3)).unwrap().value(), Some(3));
        let g = RelGraph::cycle(7);
        assert_eq!(mycielskian(&g).order(), 15);
        assert!(mycielskian(&g).is_triangle_free());
    }

    #[test]
    fn graph_census_counts() {
        let counts: Vec<usize> = (1..=6).map(|n| nonisomorphic_graphs(n).len()).collect();
        assert_eq!(counts, vec![1, 2, 4, 11, 34, 156]);
    }

    #[test]
    fn lp_matches_brute_force_small() {
        for n in 1..=6 {
            for g in nonisomorphic_graphs(n) {
                let lp = dd_number(&g).unwrap().value().unwrap();
                let bf = dd_brute_force(&g, 12).unwrap();
                assert_eq!(lp, bf.upper, "{}", g.to_dimacs());
                assert!(bf.lower <= lp);
            }
        }
    }

    #[test]
    fn dimacs_roundtrip() {
        let g = mycielski_graph(4);
        assert_eq!(RelGraph::from_dimacs(&g.to_dimacs()).unwrap(), g);
        assert!(RelGraph::from_dimacs("e 1 2").is_err());
    }

    fn sos(p: u64, d: usize) -> Arc<QuadForm> {
        Arc::new(QuadForm::sum_of_squares(p, d).unwrap())
    }

    fn zero_el(m: &Arc<QuadForm>, s: u32, gens: &[FpVector], f: PrimePoly) -> GammaElement {
        let (p, d) = (m.modulus(), m.dim());
        GammaElement::new(m.clone(), s, FpVector::zero(p, d), Subspace::span_of(p, d, gens), f).unwrap()
    }

    fn rand_vec(p: u64, d: usize, rng: &mut ChaCha8Rng) -> FpVector {
        FpVector::from_raw(p, (0..d).map(|_| rng.gen_range(0..p)).collect())
    }

    #[test]
    fn relation_graph_matches_related() {
        let (p, d, s) = (11, 7, 1);
        let m = sos(p, d);
        let e = |i| FpVector::unit(p, d, i);
        let xs = vec![
            zero_el(&m, s, &[e(0)], PrimePoly::var(p, d, 1)),
            zero_el(&m, s, &[e(1)], PrimePoly::zero(p, d)),
            zero_el(&m, s, &[e(2)], PrimePoly::zero(p, d)),
        ];
        let g = RelGraph::from_elements(&xs).unwrap();
        assert_eq!(g.edges(), vec![(0, 1), (1, 2)]);
        assert_eq!(cc_number(&g).unwrap().value(), Some(2));
    }

    #[test]
    fn weak_core_examples() {
        let (p, d, s, k) = (7, 11, 1, 2);
        let m = sos(p, d);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        // One strong class.
        let g = PrimePoly::var(p, d, 3);
        let class: Vec<GammaElement> = (0..5)
            .map(|_| {
                let v = rand_vec(p, d, &mut rng);
                zero_el(&m, s, &[v.clone()], g.add(&m.bilinear_form(&v).scale(2)))
            })
            .collect();
        let core = weak_core_decompose(&class, 1, k).unwrap();
        assert!(core.bad.is_empty() && core.cliques.len() == 1 && core.obstruction.is_empty());
        assert!(core.validate(&class).unwrap());
        // Two unrelated strong classes.
        let g2 = PrimePoly::var(p, d, 5);
        let mut two = class.clone();
        for _ in 0..5 {
            let v = rand_vec(p, d, &mut rng);
            two.push(zero_el(&m, s, &[v], g2.clone()));
        }
        let core = weak_core_decompose(&two, 2, k).unwrap();
        assert!(core.validate(&two).unwrap());
        assert_eq!(core.cliques.len(), 2);
        assert!(core.bad.is_empty());
        let pair = classification_from_core(&core, k).unwrap();
        assert!(classification_check(&two, &pair).unwrap().holds);
        // Lines inside a plane W with a common shift: the obstruction captures W.
        let w = [FpVector::unit(p, d, 0), FpVector::unit(p, d, 1)];
        let plane: Vec<GammaElement> = (1..5u64)
            .map(|t| zero_el(&m, s, &[w[0].add(&w[1].scale(t))], PrimePoly::zero(p, d)))
            .collect();
        let core = weak_core_decompose(&plane, 2, k).unwrap();
        assert!(core.validate(&plane).unwrap());
        assert!(!core.bad.is_empty());
        let wsp = Subspace::span_of(p, d, &w);
        assert!(core.obstruction.iter().any(|y| y == &wsp));
    }

    #[test]
    fn classification_checks() {
        let (p, d, s) = (7, 6, 1);
        let m = sos(p, d);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let xs: Vec<GammaElement> = (0..6)
            .map(|_| zero_el(&m, s, &[rand_vec(p, d, &mut rng)], PrimePoly::var(p, d, rng.gen_range(0..d))))
            .collect();
        let full = ObstaclePair {
            c0: vec![PrimePoly::zero(p, d)],
            y: vec![Subspace::full(p, d)],
            k: 0,
            c: 1,
            d,
        };
        assert!(classification_check(&xs, &full).unwrap().holds);
        let e1 = FpVector::unit(p, d, 0);
        let lonely = vec![zero_el(&m, s, &[e1], PrimePoly::var(p, d, 1))];
        let none = ObstaclePair {
            c0: vec![PrimePoly::zero(p, d)],
            y: vec![Subspace::span_of(p, d, &[FpVector::unit(p, d, 2)])],
            k: 0,
            c: 1,
            d: 1,
        };
        let out = classification_check(&lonely, &none).unwrap();
        assert!(!out.holds && out.witness == Some(0));
        let bad = ObstaclePair {
            c0: vec![PrimePoly::var(p, d, 0)],
            y: vec![],
            k: 0,
            c: 0,
            d: 0,
        };
        assert!(classification_check(&lonely, &bad).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn mycielskian_shape(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(1..9);
            let g = random_graph(n, &mut rng, 0.4);
            let m = mycielskian(&g);
            prop_assert_eq!(m.order(), 2 * n + 1);
            prop_assert_eq!(m.edges().len(), 3 * g.edges().len() + n);
            if g.is_triangle_free() {
                prop_assert!(m.is_triangle_free());
            }
        }

        #[test]
        fn canonical_form_is_invariant(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(1..8);
            let g = random_graph(n, &mut rng, 0.5);
            let mut perm: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                perm.swap(i, rng.gen_range(0..=i));
            }
            let mut h = RelGraph::empty(n);
            for (a, b) in g.edges() {
                h.add_edge(perm[a], perm[b]);
            }
            prop_assert!(g.is_isomorphic(&h));
        }
    }
}
