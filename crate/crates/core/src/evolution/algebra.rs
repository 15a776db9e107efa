//! Linear operators on tomograms as sums of words in a few real primitives.
//!
//! A word lists primitives left to right; the rightmost acts first. Parameters
//! are indexed `0..P`: `(mu_1.., nu_1..)` for the symplectic and probability
//! schemes and `(theta_1..)` for the optical one.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::ops::{fd4_line, map_lines};
use crate::numerics::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Prim {
    /// `d/dx_a`
    Dx(usize),
    /// Inverse derivative along `x_a`, anchored at the left end.
    DxInv(usize),
    /// Multiplication by `x_a`.
    MulX(usize),
    /// `d/d param_k`
    DParam(usize),
    /// Multiplication by `param_k`.
    MulParam(usize),
    /// Multiplication by `cos param_k`.
    MulCos(usize),
    /// Multiplication by `sin param_k`.
    MulSin(usize),
}

impl Prim {
    fn x_axis(self) -> Option<usize> {
        match self {
            Prim::Dx(a) | Prim::DxInv(a) | Prim::MulX(a) => Some(a),
            _ => None,
        }
    }

    fn param(self) -> Option<usize> {
        match self {
            Prim::DParam(k) | Prim::MulParam(k) | Prim::MulCos(k) | Prim::MulSin(k) => Some(k),
            _ => None,
        }
    }

    /// Whether the two primitives commute exactly, also after discretization.
    fn commutes(self, other: Prim) -> bool {
        match (self.x_axis(), other.x_axis()) {
            (Some(a), Some(b)) => a != b || self == other,
            (Some(_), None) | (None, Some(_)) => true,
            (None, None) => {
                let (a, b) = (self.param().unwrap(), other.param().unwrap());
                match (self, other) {
                    (Prim::DParam(_), Prim::DParam(_)) => true,
                    (Prim::DParam(_), _) | (_, Prim::DParam(_)) => a != b,
                    _ => true,
                }
            }
        }
    }
}

/// Lexicographically smallest word equivalent under exact commutations.
fn normal_form(word: &[Prim]) -> Word {
    let mut rest = word.to_vec();
    let mut out = Vec::with_capacity(rest.len());
    while !rest.is_empty() {
        let mut best: Option<usize> = None;
        for i in 0..rest.len() {
            if rest[..i].iter().all(|p| p.commutes(rest[i])) && best.is_none_or(|b| rest[i] < rest[b]) {
                best = Some(i);
            }
        }
        out.push(rest.remove(best.expect("the first letter is always movable")));
    }
    out
}

pub type Word = Vec<Prim>;

/// `sum_w c_w w` with complex coefficients over real primitives.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OperatorExpr {
    pub terms: BTreeMap<Word, Complex64>,
}

fn simplify(word: &[Prim]) -> Word {
    let mut out: Word = Vec::with_capacity(word.len());
    for &p in word {
        if let Some(&last) = out.last() {
            // d/dx and the anchored inverse cancel on functions that vanish at the left end
            let cancels = matches!((last, p), (Prim::Dx(a), Prim::DxInv(b)) | (Prim::DxInv(a), Prim::Dx(b)) if a == b);
            if cancels {
                out.pop();
                continue;
            }
        }
        out.push(p);
    }
    out
}

impl OperatorExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn scalar(c: impl Into<Complex64>) -> Self {
        Self::word(c, vec![])
    }

    pub fn word(c: impl Into<Complex64>, w: Word) -> Self {
        let mut e = Self::zero();
        e.push(c.into(), w);
        e
    }

    fn push(&mut self, c: Complex64, w: Word) {
        let mut w = normal_form(&w);
        loop {
            let next = normal_form(&simplify(&w));
            if next == w {
                break;
            }
            w = next;
        }
        *self.terms.entry(w).or_insert(Complex64::new(0.0, 0.0)) += c;
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.push(*c, w.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: impl Into<Complex64>) -> Self {
        let s = s.into();
        Self { terms: self.terms.iter().map(|(w, c)| (w.clone(), c * s)).collect() }
    }

    /// Composition `self . other` (`other` acts first).
    pub fn compose(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                let mut w = w1.clone();
                w.extend_from_slice(w2);
                out.push(c1 * c2, w);
            }
        }
        out
    }

    /// Real part with respect to the real primitives.
    pub fn re(&self) -> Self {
        Self { terms: self.terms.iter().map(|(w, c)| (w.clone(), Complex64::new(c.re, 0.0))).collect() }
    }

    /// Imaginary part with respect to the real primitives.
    pub fn im(&self) -> Self {
        Self { terms: self.terms.iter().map(|(w, c)| (w.clone(), Complex64::new(c.im, 0.0))).collect() }
    }

    /// Drop terms whose coefficient magnitude is at most `tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        Self { terms: self.terms.iter().filter(|(_, c)| c.norm() > tol).map(|(w, c)| (w.clone(), *c)).collect() }
    }

    /// Largest coefficient difference over the union of words.
    pub fn max_coefficient_difference(&self, other: &Self) -> f64 {
        let d = self.sub(other);
        d.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_real(&self) -> bool {
        self.terms.values().all(|c| c.im == 0.0)
    }

    /// Highest number of parameter derivatives in any word.
    pub fn param_order(&self) -> usize {
        self.terms.keys().map(|w| w.iter().filter(|p| matches!(p, Prim::DParam(_))).count()).max().unwrap_or(0)
    }
}

/// Samples of a function of `(x, params)` on a parameter lattice
/// `centre + offset * step`.
pub trait LatticeSource {
    fn x_grid(&self) -> &Grid;
    fn centre(&self) -> &[f64];
    fn step(&self) -> &[f64];
    /// Values on the x grid at a lattice offset.
    fn sample(&self, offset: &[i32]) -> Result<Vec<Complex64>>;
}

/// Evaluates expressions at the lattice centre, caching samples.
pub struct Evaluator<'a, S: LatticeSource + ?Sized> {
    source: &'a S,
    cache: HashMap<Vec<i32>, Vec<Complex64>>,
}

const FD4: [(i32, f64); 4] = [(-2, 1.0 / 12.0), (-1, -8.0 / 12.0), (1, 8.0 / 12.0), (2, -1.0 / 12.0)];

impl<'a, S: LatticeSource + ?Sized> Evaluator<'a, S> {
    pub fn new(source: &'a S) -> Self {
        Self { source, cache: HashMap::new() }
    }

    pub fn samples_taken(&self) -> usize {
        self.cache.len()
    }

    pub fn sample(&mut self, offset: &[i32]) -> Result<Vec<Complex64>> {
        if let Some(v) = self.cache.get(offset) {
            return Ok(v.clone());
        }
        let v = self.source.sample(offset)?;
        if v.len() != self.source.x_grid().len() {
            return Err(Error::GridMismatch("lattice sample does not match the x grid".into()));
        }
        self.cache.insert(offset.to_vec(), v.clone());
        Ok(v)
    }

    pub fn eval(&mut self, expr: &OperatorExpr) -> Result<Vec<Complex64>> {
        let n = self.source.x_grid().len();
        let origin = vec![0; self.source.centre().len()];
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (w, c) in &expr.terms {
            if *c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let v = self.eval_word(w, &origin)?;
            for (o, x) in out.iter_mut().zip(v) {
                *o += c * x;
            }
        }
        Ok(out)
    }

    fn eval_word(&mut self, word: &[Prim], offset: &[i32]) -> Result<Vec<Complex64>> {
        let Some((&first, rest)) = word.split_first() else {
            return self.sample(offset);
        };
        let grid = self.source.x_grid().clone();
        let param = |k: usize| self.source.centre()[k] + offset[k] as f64 * self.source.step()[k];
        match first {
            Prim::DParam(k) => {
                let h = self.source.step()[k];
                let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
                for (j, w) in FD4 {
                    let mut o = offset.to_vec();
                    o[k] += j;
                    let v = self.eval_word(rest, &o)?;
                    for (a, x) in acc.iter_mut().zip(v) {
                        *a += w / h * x;
                    }
                }
                Ok(acc)
            }
            Prim::MulParam(k) | Prim::MulCos(k) | Prim::MulSin(k) => {
                let v = param(k);
                let f = match first {
                    Prim::MulCos(_) => v.cos(),
                    Prim::MulSin(_) => v.sin(),
                    _ => v,
                };
                Ok(self.eval_word(rest, offset)?.into_iter().map(|x| x * f).collect())
            }
            _ => {
                let a = first.x_axis().expect("x primitive");
                let v = self.eval_word(rest, offset)?;
                Ok(apply_x(first, a, &v, &grid))
            }
        }
    }
}

/// Fourth-order cumulative integral: trapezoid plus the Euler–Maclaurin end
/// correction `-(h^2/12)(f'(x) - f'(x_0))`.
fn cumulative4(line: &[Complex64], h: f64, out: &mut [Complex64]) {
    let n = line.len();
    let mut d = vec![Complex64::new(0.0, 0.0); n];
    fd4_line(line, h, 1, &mut d);
    out[0] = Complex64::new(0.0, 0.0);
    let mut trap = Complex64::new(0.0, 0.0);
    for i in 1..n {
        trap += 0.5 * h * (line[i - 1] + line[i]);
        out[i] = trap - h * h / 12.0 * (d[i] - d[0]);
    }
}

fn apply_x(p: Prim, axis: usize, v: &[Complex64], grid: &Grid) -> Vec<Complex64> {
    let shape = grid.shape();
    let ax = grid.axis(axis);
    let h = ax.spacing();
    match p {
        Prim::Dx(_) => map_lines(v, &shape, axis, |l, o| fd4_line(l, h, 1, o)),
        Prim::DxInv(_) => map_lines(v, &shape, axis, |l, o| cumulative4(l, h, o)),
        Prim::MulX(_) => map_lines(v, &shape, axis, |l, o| {
            for (i, (oi, li)) in o.iter_mut().zip(l).enumerate() {
                *oi = li * ax.point(i);
            }
        }),
        _ => unreachable!("not an x primitive"),
    }
}
