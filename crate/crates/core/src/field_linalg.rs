//! Prime-field scalars, vectors and canonical subspaces.
//!
//! Bulk data stores raw residues (`u64`) next to a single modulus per
//! container. A [`Subspace`] is always kept in reduced row echelon form, so
//! two subspaces are equal exactly when their structs compare equal.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Largest admissible modulus (exclusive).
pub const MAX_MODULUS: u64 = 1 << 31;

/// Accepts odd primes below 2^31.
pub fn check_modulus(p: u64) -> Result<()> {
    if p < 3 || p >= MAX_MODULUS || p % 2 == 0 || !is_prime(p) {
        return Err(Error::BadModulus(p));
    }
    Ok(())
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut i = 2u64;
    while i * i <= n {
        if n % i == 0 {
            return false;
        }
        i += 1;
    }
    true
}

#[inline]
pub fn add_mod(a: u64, b: u64, p: u64) -> u64 {
    let s = a + b;
    if s >= p {
        s - p
    } else {
        s
    }
}

#[inline]
pub fn sub_mod(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

#[inline]
pub fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    a * b % p
}

#[inline]
pub fn neg_mod(a: u64, p: u64) -> u64 {
    if a == 0 {
        0
    } else {
        p - a
    }
}

pub fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, p);
        }
        b = mul_mod(b, b, p);
        e >>= 1;
    }
    r
}

/// Inverse of a nonzero residue by Fermat's little theorem.
pub fn inv_mod(a: u64, p: u64) -> u64 {
    debug_assert!(a % p != 0, "inverse of zero");
    pow_mod(a, p - 2, p)
}

/// Reduces a signed integer into `[0, p)`.
pub fn from_i64(x: i64, p: u64) -> u64 {
    x.rem_euclid(p as i64) as u64
}

/// Symmetric representative in `(-p/2, p/2]`.
pub fn symmetric(a: u64, p: u64) -> i64 {
    if a > p / 2 {
        a as i64 - p as i64
    } else {
        a as i64
    }
}

/// A residue together with its modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FpScalar {
    value: u64,
    modulus: u64,
}

impl FpScalar {
    pub fn new(value: i64, modulus: u64) -> Result<Self> {
        check_modulus(modulus)?;
        Ok(Self {
            value: from_i64(value, modulus),
            modulus,
        })
    }

    pub(crate) fn raw(value: u64, modulus: u64) -> Self {
        Self { value, modulus }
    }

    pub fn value(self) -> u64 {
        self.value
    }

    pub fn modulus(self) -> u64 {
        self.modulus
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    /// The natural embedding into `{0, ..., p-1}`.
    pub fn tau(self) -> u64 {
        self.value
    }

    pub fn symmetric(self) -> i64 {
        symmetric(self.value, self.modulus)
    }

    fn same(self, o: Self) -> Result<u64> {
        if self.modulus != o.modulus {
            return Err(Error::ModulusMismatch(self.modulus, o.modulus));
        }
        Ok(self.modulus)
    }

    pub fn add(self, o: Self) -> Result<Self> {
        let p = self.same(o)?;
        Ok(Self::raw(add_mod(self.value, o.value, p), p))
    }

    pub fn sub(self, o: Self) -> Result<Self> {
        let p = self.same(o)?;
        Ok(Self::raw(sub_mod(self.value, o.value, p), p))
    }

    pub fn mul(self, o: Self) -> Result<Self> {
        let p = self.same(o)?;
        Ok(Self::raw(mul_mod(self.value, o.value, p), p))
    }

    pub fn neg(self) -> Self {
        Self::raw(neg_mod(self.value, self.modulus), self.modulus)
    }

    pub fn inv(self) -> Option<Self> {
        if self.value == 0 {
            None
        } else {
            Some(Self::raw(inv_mod(self.value, self.modulus), self.modulus))
        }
    }

    pub fn pow(self, e: u64) -> Self {
        Self::raw(pow_mod(self.value, e, self.modulus), self.modulus)
    }
}

impl fmt::Display for FpScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// A vector in F_p^d.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FpVector {
    p: u64,
    coords: Vec<u64>,
}

impl FpVector {
    pub fn new(p: u64, coords: Vec<u64>) -> Result<Self> {
        check_modulus(p)?;
        if coords.is_empty() {
            return Err(Error::DimensionMismatch("vector of length 0".into()));
        }
        Ok(Self::from_raw(p, coords))
    }

    pub fn from_i64(p: u64, coords: &[i64]) -> Result<Self> {
        Self::new(p, coords.iter().map(|&c| from_i64(c, p)).collect())
    }

    /// Builds a vector without validating the modulus; coordinates are reduced.
    pub fn from_raw(p: u64, mut coords: Vec<u64>) -> Self {
        for c in coords.iter_mut() {
            *c %= p;
        }
        Self { p, coords }
    }

    pub fn zero(p: u64, d: usize) -> Self {
        Self {
            p,
            coords: vec![0; d],
        }
    }

    pub fn unit(p: u64, d: usize, i: usize) -> Self {
        let mut v = Self::zero(p, d);
        v.coords[i] = 1;
        v
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn get(&self, i: usize) -> FpScalar {
        FpScalar::raw(self.coords[i], self.p)
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    fn check(&self, o: &Self) {
        assert_eq!(self.p, o.p, "modulus mismatch");
        assert_eq!(self.coords.len(), o.coords.len(), "dimension mismatch");
    }

    pub fn add(&self, o: &Self) -> Self {
        self.check(o);
        let p = self.p;
        Self {
            p,
            coords: self
                .coords
                .iter()
                .zip(&o.coords)
                .map(|(&a, &b)| add_mod(a, b, p))
                .collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.check(o);
        let p = self.p;
        Self {
            p,
            coords: self
                .coords
                .iter()
                .zip(&o.coords)
                .map(|(&a, &b)| sub_mod(a, b, p))
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        let p = self.p;
        Self {
            p,
            coords: self.coords.iter().map(|&a| neg_mod(a, p)).collect(),
        }
    }

    pub fn scale(&self, c: u64) -> Self {
        let p = self.p;
        let c = c % p;
        Self {
            p,
            coords: self.coords.iter().map(|&a| mul_mod(a, c, p)).collect(),
        }
    }

    pub fn dot(&self, o: &Self) -> u64 {
        self.check(o);
        let p = self.p;
        self.coords
            .iter()
            .zip(&o.coords)
            .fold(0, |acc, (&a, &b)| (acc + a * b) % p)
    }
}

impl fmt::Display for FpVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Enumerates all of F_p^d in lexicographic order of coordinates.
pub fn all_vectors(p: u64, d: usize) -> impl Iterator<Item = FpVector> {
    let total = (p as u128).pow(d as u32);
    (0..total).map(move |mut idx| {
        let mut coords = vec![0u64; d];
        for c in coords.iter_mut().rev() {
            *c = (idx % p as u128) as u64;
            idx /= p as u128;
        }
        FpVector { p, coords }
    })
}

/// Reduces `rows` in place to reduced row echelon form, returning the pivot columns.
pub fn rref(rows: &mut Vec<Vec<u64>>, p: u64) -> Vec<usize> {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(sel) = (r..rows.len()).find(|&i| rows[i][col] != 0) else {
            continue;
        };
        rows.swap(r, sel);
        let inv = inv_mod(rows[r][col], p);
        for x in rows[r].iter_mut() {
            *x = mul_mod(*x, inv, p);
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[col] == 0 {
                continue;
            }
            let f = row[col];
            for (x, &y) in row.iter_mut().zip(&pivot_row).skip(col) {
                *x = sub_mod(*x, mul_mod(f, y, p), p);
            }
        }
        pivots.push(col);
        r += 1;
    }
    rows.truncate(r);
    pivots
}

/// Rank of a matrix given by rows.
pub fn rank(rows: &[Vec<u64>], p: u64) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m, p).len()
}

/// A linear subspace of F_p^d in canonical reduced row echelon form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Subspace {
    p: u64,
    d: usize,
    rows: Vec<Vec<u64>>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn trivial(p: u64, d: usize) -> Self {
        Self {
            p,
            d,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn full(p: u64, d: usize) -> Self {
        Self::from_rows(p, d, (0..d).map(|i| FpVector::unit(p, d, i).coords).collect())
    }

    /// Canonical span of raw rows (each of length `d`).
    pub fn from_rows(p: u64, d: usize, mut rows: Vec<Vec<u64>>) -> Self {
        rows.retain(|r| r.iter().any(|&x| x != 0));
        let pivots = rref(&mut rows, p);
        Self { p, d, rows, pivots }
    }

    /// Span of the given vectors.
    pub fn span(p: u64, d: usize, vectors: &[FpVector]) -> Result<Self> {
        check_modulus(p)?;
        for v in vectors {
            if v.p != p {
                return Err(Error::ModulusMismatch(v.p, p));
            }
            if v.dim() != d {
                return Err(Error::DimensionMismatch(format!(
                    "vector of length {} in ambient dimension {d}",
                    v.dim()
                )));
            }
        }
        Ok(Self::from_rows(
            p,
            d,
            vectors.iter().map(|v| v.coords.clone()).collect(),
        ))
    }

    /// Span of vectors known to share `p` and `d`; panics otherwise.
    pub fn span_of(p: u64, d: usize, vectors: &[FpVector]) -> Self {
        Self::span(p, d, vectors).expect("vectors share modulus and dimension")
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn ambient_dim(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }

    pub fn basis(&self) -> Vec<FpVector> {
        self.rows
            .iter()
            .map(|r| FpVector {
                p: self.p,
                coords: r.clone(),
            })
            .collect()
    }

    /// Residue of `v` after eliminating pivot coordinates; zero iff `v` is a member.
    pub fn reduce(&self, v: &[u64]) -> Vec<u64> {
        let p = self.p;
        let mut out = v.to_vec();
        for (row, &col) in self.rows.iter().zip(&self.pivots) {
            let f = out[col];
            if f != 0 {
                for (x, &y) in out.iter_mut().zip(row).skip(col) {
                    *x = sub_mod(*x, mul_mod(f, y, p), p);
                }
            }
        }
        out
    }

    pub fn contains(&self, v: &FpVector) -> bool {
        assert_eq!(v.dim(), self.d, "dimension mismatch");
        self.contains_raw(&v.coords)
    }

    pub fn contains_raw(&self, v: &[u64]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }

    /// Coordinates of a member with respect to [`Self::basis`].
    pub fn coordinates(&self, v: &FpVector) -> Option<Vec<u64>> {
        if !self.contains(v) {
            return None;
        }
        Some(self.pivots.iter().map(|&c| v.coords[c]).collect())
    }

    /// Linear combination of the basis with the given coefficients.
    pub fn combine(&self, coeffs: &[u64]) -> FpVector {
        let p = self.p;
        let mut out = vec![0u64; self.d];
        for (row, &c) in self.rows.iter().zip(coeffs) {
            if c % p == 0 {
                continue;
            }
            for (x, &y) in out.iter_mut().zip(row) {
                *x = add_mod(*x, mul_mod(c % p, y, p), p);
            }
        }
        FpVector { p, coords: out }
    }

    pub fn sum(&self, o: &Self) -> Self {
        self.check(o);
        let mut rows = self.rows.clone();
        rows.extend(o.rows.iter().cloned());
        Self::from_rows(self.p, self.d, rows)
    }

    pub fn sum_all<'a>(p: u64, d: usize, spaces: impl IntoIterator<Item = &'a Subspace>) -> Self {
        let mut rows = Vec::new();
        for s in spaces {
            rows.extend(s.rows.iter().cloned());
        }
        Self::from_rows(p, d, rows)
    }

    pub fn with_vector(&self, v: &FpVector) -> Self {
        let mut rows = self.rows.clone();
        rows.push(v.coords.clone());
        Self::from_rows(self.p, self.d, rows)
    }

    /// Intersection via the kernel of `[A; -B]`.
    pub fn intersection(&self, o: &Self) -> Self {
        self.check(o);
        if self.is_trivial() || o.is_trivial() {
            return Self::trivial(self.p, self.d);
        }
        let p = self.p;
        let a = self.dim();
        // Columns are the basis vectors of both spaces; kernel vectors (x, y)
        // satisfy sum x_i a_i = sum y_j b_j.
        let ncols = a + o.dim();
        let mut sys = vec![vec![0u64; ncols]; self.d];
        for (i, row) in self.rows.iter().enumerate() {
            for k in 0..self.d {
                sys[k][i] = row[k];
            }
        }
        for (j, row) in o.rows.iter().enumerate() {
            for k in 0..self.d {
                sys[k][a + j] = neg_mod(row[k], p);
            }
        }
        let ker = kernel(&sys, ncols, p);
        let vecs: Vec<Vec<u64>> = ker
            .iter()
            .map(|k| self.combine(&k[..a]).coords)
            .collect();
        Self::from_rows(p, self.d, vecs)
    }

    pub fn is_subspace_of(&self, o: &Self) -> bool {
        self.check(o);
        self.rows.iter().all(|r| o.contains_raw(r))
    }

    /// Standard unit vectors completing a basis of this space to the full space.
    pub fn complement_units(&self) -> Vec<FpVector> {
        (0..self.d)
            .filter(|c| !self.pivots.contains(c))
            .map(|c| FpVector::unit(self.p, self.d, c))
            .collect()
    }

    /// Extends `start` (assumed independent modulo this space) by unit vectors
    /// so that this space plus the result spans everything.
    pub fn extend_to_full(&self, start: &[FpVector]) -> Vec<FpVector> {
        let mut acc = self.clone();
        let mut out = Vec::new();
        for v in start {
            if !acc.contains(v) {
                acc = acc.with_vector(v);
                out.push(v.clone());
            }
        }
        for u in (0..self.d).map(|i| FpVector::unit(self.p, self.d, i)) {
            if !acc.contains(&u) {
                acc = acc.with_vector(&u);
                out.push(u);
            }
        }
        out
    }

    /// Iterates over all `p^dim` elements.
    pub fn elements(&self) -> impl Iterator<Item = FpVector> + '_ {
        all_vectors(self.p, self.dim().max(1))
            .take((self.p as usize).pow(self.dim() as u32))
            .map(move |c| {
                if self.dim() == 0 {
                    FpVector::zero(self.p, self.d)
                } else {
                    self.combine(&c.coords)
                }
            })
    }

    fn check(&self, o: &Self) {
        assert_eq!(self.p, o.p, "modulus mismatch");
        assert_eq!(self.d, o.d, "dimension mismatch");
    }
}

impl fmt::Display for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "span{{")?;
        for (i, b) in self.basis().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, "}}")
    }
}

/// Basis of the null space of a matrix with `ncols` columns.
pub fn kernel(rows: &[Vec<u64>], ncols: usize, p: u64) -> Vec<Vec<u64>> {
    let mut m: Vec<Vec<u64>> = rows.to_vec();
    let pivots = rref(&mut m, p);
    let mut out = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![0u64; ncols];
        v[free] = 1;
        for (row, &pc) in m.iter().zip(&pivots) {
            v[pc] = neg_mod(row[free], p);
        }
        out.push(v);
    }
    out
}

/// Particular solution together with the kernel of the system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearSolution {
    pub particular: FpVector,
    pub kernel: Subspace,
}

/// Solves `system * x = rhs`; `Ok(None)` when infeasible.
pub fn solve_linear(system: &[Vec<u64>], ncols: usize, rhs: &FpVector) -> Result<Option<LinearSolution>> {
    let p = rhs.p;
    if system.len() != rhs.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{} rows but rhs of length {}",
            system.len(),
            rhs.dim()
        )));
    }
    if ncols == 0 {
        return Err(Error::DimensionMismatch("system with no columns".into()));
    }
    if let Some(r) = system.iter().find(|r| r.len() != ncols) {
        return Err(Error::DimensionMismatch(format!(
            "row of length {} in a {ncols}-column system",
            r.len()
        )));
    }
    solve_raw(system, ncols, &rhs.coords, p).map_or(Ok(None), |(x, ker)| {
        Ok(Some(LinearSolution {
            particular: FpVector { p, coords: x },
            kernel: Subspace::from_rows(p, ncols, ker),
        }))
    })
}

/// Raw solver returning a particular solution and kernel rows.
pub fn solve_raw(
    system: &[Vec<u64>],
    ncols: usize,
    rhs: &[u64],
    p: u64,
) -> Option<(Vec<u64>, Vec<Vec<u64>>)> {
    let mut aug: Vec<Vec<u64>> = system
        .iter()
        .zip(rhs)
        .map(|(r, &b)| {
            let mut row: Vec<u64> = r.iter().map(|&x| x % p).collect();
            row.push(b % p);
            row
        })
        .collect();
    let pivots = rref(&mut aug, p);
    if pivots.last() == Some(&ncols) {
        return None;
    }
    let mut x = vec![0u64; ncols];
    for (row, &pc) in aug.iter().zip(&pivots) {
        x[pc] = row[ncols];
    }
    let core: Vec<Vec<u64>> = aug.iter().map(|r| r[..ncols].to_vec()).collect();
    Some((x, kernel(&core, ncols, p)))
}

/// An entry of an independence tuple.
#[derive(Clone, Debug)]
pub enum TupleItem {
    Vector(FpVector),
    Space(Subspace),
}

/// Independence of a mixed tuple of vectors and subspaces, optionally modulo `modulo`.
///
/// A zero vector (or, modulo `U`, a vector inside `U`) makes the tuple
/// dependent; a trivial subspace never does.
pub fn is_independent_tuple(items: &[TupleItem], modulo: Option<&Subspace>) -> Result<bool> {
    let Some((p, d)) = items.iter().map(item_shape).next().or(modulo.map(|u| (u.p, u.d))) else {
        return Ok(true);
    };
    for (ip, id) in items.iter().map(item_shape) {
        if ip != p {
            return Err(Error::ModulusMismatch(ip, p));
        }
        if id != d {
            return Err(Error::DimensionMismatch(format!("{id} vs {d}")));
        }
    }
    let base = match modulo {
        Some(u) => {
            if u.p != p || u.d != d {
                return Err(Error::DimensionMismatch("modulus space ambient".into()));
            }
            u.clone()
        }
        None => Subspace::trivial(p, d),
    };
    let mut acc = base.clone();
    let mut expected = base.dim();
    for item in items {
        match item {
            TupleItem::Vector(v) => {
                if base.contains(v) {
                    return Ok(false);
                }
                expected += 1;
                acc = acc.with_vector(v);
            }
            TupleItem::Space(s) => {
                expected += base.sum(s).dim() - base.dim();
                acc = acc.sum(s);
            }
        }
        if acc.dim() != expected {
            return Ok(false);
        }
    }
    Ok(true)
}

fn item_shape(i: &TupleItem) -> (u64, usize) {
    match i {
        TupleItem::Vector(v) => (v.p, v.dim()),
        TupleItem::Space(s) => (s.p, s.d),
    }
}

/// Independence of a list of subspaces.
pub fn spaces_independent(spaces: &[Subspace]) -> bool {
    let items: Vec<TupleItem> = spaces.iter().cloned().map(TupleItem::Space).collect();
    is_independent_tuple(&items, None).unwrap_or(false)
}

/// Independence of a list of subspaces modulo `u`.
pub fn spaces_independent_mod(spaces: &[Subspace], u: &Subspace) -> bool {
    let items: Vec<TupleItem> = spaces.iter().cloned().map(TupleItem::Space).collect();
    is_independent_tuple(&items, Some(u)).unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(p: u64, c: &[i64]) -> FpVector {
        FpVector::from_i64(p, c).unwrap()
    }

    #[test]
    fn modulus_validation() {
        assert!(check_modulus(2).is_err());
        assert!(check_modulus(9).is_err());
        assert!(check_modulus(2147483647).is_ok());
        assert!(check_modulus(1 << 31).is_err());
        assert!(FpScalar::new(-1, 7).unwrap().value() == 6);
    }

    #[test]
    fn scalar_ops() {
        let a = FpScalar::new(3, 7).unwrap();
        let b = FpScalar::new(5, 7).unwrap();
        assert_eq!(a.add(b).unwrap().value(), 1);
        assert_eq!(a.mul(b).unwrap().value(), 1);
        assert_eq!(a.inv().unwrap().value(), 5);
        assert!(a.add(FpScalar::new(1, 11).unwrap()).is_err());
        assert_eq!(FpScalar::new(6, 7).unwrap().symmetric(), -1);
    }

    #[test]
    fn span_examples() {
        let s = Subspace::span(5, 3, &[]).unwrap();
        assert_eq!(s.dim(), 0);
        let s = Subspace::span(5, 3, &[v(5, &[1, 0, 0]), v(5, &[2, 0, 0])]).unwrap();
        assert_eq!(s.dim(), 1);
        assert_eq!(s.basis(), vec![v(5, &[1, 0, 0])]);
        let s = Subspace::span(5, 3, &[v(5, &[1, 1, 0]), v(5, &[0, 1, 1]), v(5, &[1, 0, -1])]).unwrap();
        assert_eq!(s.dim(), 2);
        assert!(Subspace::span(5, 3, &[v(5, &[1, 0])]).is_err());
        assert!(Subspace::span(5, 3, &[v(7, &[1, 0, 0])]).is_err());
    }

    #[test]
    fn independence_conventions() {
        let p = 7;
        let zero = FpVector::zero(p, 4);
        let e = |i| FpVector::unit(p, 4, i);
        let v1 = Subspace::span_of(p, 4, &[e(0)]);
        assert!(!is_independent_tuple(&[TupleItem::Vector(zero), TupleItem::Space(v1.clone())], None).unwrap());
        let triv = Subspace::trivial(p, 4);
        assert!(is_independent_tuple(&[TupleItem::Space(triv), TupleItem::Space(v1)], None).unwrap());
        let s = Subspace::span_of(p, 4, &[e(0).add(&e(1))]);
        assert!(!is_independent_tuple(
            &[TupleItem::Vector(e(0)), TupleItem::Vector(e(1)), TupleItem::Space(s)],
            None
        )
        .unwrap());
    }

    #[test]
    fn independence_modulo() {
        let p = 5;
        let e = |i| FpVector::unit(p, 4, i);
        let u = Subspace::span_of(p, 4, &[e(0)]);
        let a = Subspace::span_of(p, 4, &[e(0), e(1)]);
        let b = Subspace::span_of(p, 4, &[e(0), e(2)]);
        let c = Subspace::span_of(p, 4, &[e(0), e(1).add(&e(2))]);
        assert!(spaces_independent_mod(&[a.clone(), b.clone()], &u));
        assert!(!spaces_independent(&[a.clone(), b.clone()]));
        assert!(!spaces_independent_mod(&[a, b, c], &u));
    }

    #[test]
    fn solve_examples() {
        let p = 11;
        let id: Vec<Vec<u64>> = (0..3).map(|i| FpVector::unit(p, 3, i).coords().to_vec()).collect();
        let b = v(p, &[3, 4, 5]);
        let s = solve_linear(&id, 3, &b).unwrap().unwrap();
        assert_eq!(s.particular, b);
        assert!(s.kernel.is_trivial());
        let z = vec![vec![0u64; 3]; 3];
        let s = solve_linear(&z, 3, &FpVector::zero(p, 3)).unwrap().unwrap();
        assert_eq!(s.kernel.dim(), 3);
        assert!(solve_linear(&z, 3, &b).unwrap().is_none());
        assert!(solve_linear(&z, 2, &b).is_err());
    }

    #[test]
    fn solve_rank3_system() {
        use rand::{Rng, SeedableRng};
        let p = 11;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            // Rank 3: three random rows plus one combination.
            let mut rows: Vec<Vec<u64>> = (0..3).map(|_| (0..6).map(|_| rng.gen_range(0..p)).collect()).collect();
            if rank(&rows, p) < 3 {
                continue;
            }
            let comb: Vec<u64> = (0..6).map(|j| (rows[0][j] + 2 * rows[1][j]) % p).collect();
            rows.push(comb);
            let x0: Vec<u64> = (0..6).map(|_| rng.gen_range(0..p)).collect();
            let rhs: Vec<u64> = rows.iter().map(|r| r.iter().zip(&x0).map(|(a, b)| a * b).sum::<u64>() % p).collect();
            let sol = solve_linear(&rows, 6, &FpVector::from_raw(p, rhs.clone())).unwrap().unwrap();
            // Substitution oracle.
            for (r, &b) in rows.iter().zip(&rhs) {
                let lhs: u64 = r.iter().zip(sol.particular.coords()).map(|(a, b)| a * b).sum::<u64>() % p;
                assert_eq!(lhs, b);
            }
            assert_eq!(sol.kernel.dim(), 3);
            for k in sol.kernel.basis() {
                for r in &rows {
                    assert_eq!(r.iter().zip(k.coords()).map(|(a, b)| a * b).sum::<u64>() % p, 0);
                }
            }
        }
    }

    #[test]
    fn elements_and_complement() {
        let p = 3;
        let s = Subspace::span_of(p, 3, &[v(p, &[1, 1, 0])]);
        assert_eq!(s.elements().count(), 3);
        assert_eq!(Subspace::trivial(p, 3).elements().count(), 1);
        let ext = s.extend_to_full(&[]);
        assert_eq!(s.dim() + ext.len(), 3);
        assert_eq!(Subspace::sum_all(p, 3, [&s, &Subspace::span_of(p, 3, &ext)]).dim(), 3);
    }

    fn arb_vecs(p: u64, d: usize, max: usize) -> impl Strategy<Value = Vec<FpVector>> {
        prop::collection::vec(prop::collection::vec(0..p, d), 0..=max)
            .prop_map(move |vs| vs.into_iter().map(|c| FpVector::from_raw(p, c)).collect())
    }

    proptest! {
        #[test]
        fn rref_is_canonical(vs in arb_vecs(7, 4, 5), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut shuffled = vs.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(Subspace::span_of(7, 4, &vs), Subspace::span_of(7, 4, &shuffled));
        }

        #[test]
        fn dimension_formula(a in arb_vecs(5, 5, 4), b in arb_vecs(5, 5, 4)) {
            let a = Subspace::span_of(5, 5, &a);
            let b = Subspace::span_of(5, 5, &b);
            let i = a.intersection(&b);
            prop_assert_eq!(a.sum(&b).dim() + i.dim(), a.dim() + b.dim());
            prop_assert!(i.is_subspace_of(&a) && i.is_subspace_of(&b));
        }

        #[test]
        fn membership_matches_exhaustive(s in arb_vecs(5, 3, 3), t in prop::collection::vec(0u64..5, 3)) {
            let p = 5;
            let sp = Subspace::span_of(p, 3, &s);
            let target = FpVector::from_raw(p, t);
            let k = s.len();
            let mut found = k == 0 && target.is_zero();
            for idx in 0..(p as usize).pow(k as u32) {
                let mut acc = FpVector::zero(p, 3);
                let mut j = idx;
                for v in &s {
                    acc = acc.add(&v.scale((j % p as usize) as u64));
                    j /= p as usize;
                }
                if acc == target {
                    found = true;
                }
            }
            prop_assert_eq!(sp.contains(&target), found);
        }
    }
}
