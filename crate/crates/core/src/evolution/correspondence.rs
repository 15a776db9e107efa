//! Correspondence rules between phase-space operators and tomogram operators,
//! and the right-hand sides of the tomographic evolution equations.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::algebra::{OperatorExpr, Prim};
use crate::error::{Error, Result};
use crate::fields::{AffineField, Potentials};
use crate::numerics::quad::chord_rule;
use crate::units::UnitsContext;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symbol {
    Q,
    P,
    DDq,
    DDp,
    #[serde(rename = "q_quantum_M")]
    QQuantumM,
    #[serde(rename = "P_quantum_M")]
    PQuantumM,
    #[serde(rename = "q_quantum_w")]
    QQuantumW,
    #[serde(rename = "P_quantum_w")]
    PQuantumW,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    Symplectic,
    Optical,
    Probability,
}

impl Representation {
    pub fn param_count(self, dim: usize) -> usize {
        match self {
            Representation::Optical => dim,
            _ => 2 * dim,
        }
    }

    pub fn x_axes(self, dim: usize) -> usize {
        match self {
            Representation::Probability => 1,
            _ => dim,
        }
    }

    fn x(self, s: usize) -> usize {
        match self {
            Representation::Probability => 0,
            _ => s,
        }
    }
}

/// Index helpers for one representation in dimension `dim`.
#[derive(Debug, Clone, Copy)]
struct Layout {
    rep: Representation,
    dim: usize,
}

impl Layout {
    fn mu(&self, s: usize) -> usize {
        s
    }
    fn nu(&self, s: usize) -> usize {
        self.dim + s
    }
    fn theta(&self, s: usize) -> usize {
        s
    }
    fn x(&self, s: usize) -> usize {
        self.rep.x(s)
    }
    fn w(&self, c: f64, word: Vec<Prim>) -> OperatorExpr {
        OperatorExpr::word(c, word)
    }
}

/// A phase-space operator written on tomograms of one representation.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrespondenceOperator {
    pub symbol: Symbol,
    pub representation: Representation,
    pub axis: usize,
    pub dim: usize,
    pub expr: OperatorExpr,
}

fn layout(rep: Representation, dim: usize) -> Result<Layout> {
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidArgument(format!("dimension must be 1..=3, got {dim}")));
    }
    Ok(Layout { rep, dim })
}

fn rule(l: &Layout, symbol: Symbol, s: usize, units: &UnitsContext) -> Result<OperatorExpr> {
    use Prim::*;
    let x = l.x(s);
    let hb = units.hbar;
    let mw = units.m * units.omega;
    let i = Complex64::new(0.0, 1.0);
    let e = match (l.rep, symbol) {
        (Representation::Optical, Symbol::Q | Symbol::QQuantumW) => {
            let t = l.theta(s);
            let mut e = l.w(1.0, vec![MulSin(t), DxInv(x), DParam(t)]).add(&l.w(1.0, vec![MulX(x), MulCos(t)]));
            if symbol == Symbol::QQuantumW {
                e = e.add(&l.w(1.0, vec![MulSin(t), Dx(x)]).scale(i * hb / (2.0 * mw)));
            }
            e
        }
        (Representation::Optical, Symbol::P | Symbol::PQuantumW) => {
            let t = l.theta(s);
            let mut e = l.w(-mw, vec![MulCos(t), DxInv(x), DParam(t)]).add(&l.w(mw, vec![MulX(x), MulSin(t)]));
            if symbol == Symbol::PQuantumW {
                e = e.add(&l.w(1.0, vec![MulCos(t), Dx(x)]).scale(-i * hb / 2.0));
            }
            e
        }
        (Representation::Optical, Symbol::DDq) => l.w(1.0, vec![MulCos(l.theta(s)), Dx(x)]),
        (Representation::Optical, Symbol::DDp) => l.w(1.0 / mw, vec![MulSin(l.theta(s)), Dx(x)]),
        (Representation::Optical, _) => {
            return Err(Error::Unsupported(format!("{symbol:?} is a symplectic-scheme operator, not optical")))
        }
        (_, Symbol::QQuantumW | Symbol::PQuantumW) => {
            return Err(Error::Unsupported(format!("{symbol:?} is an optical-scheme operator")))
        }
        (_, Symbol::Q | Symbol::QQuantumM) => {
            let mut e = l.w(-1.0, vec![DxInv(x), DParam(l.mu(s))]);
            if symbol == Symbol::QQuantumM {
                e = e.add(&l.w(1.0, vec![MulParam(l.nu(s)), Dx(x)]).scale(i * hb / 2.0));
            }
            e
        }
        (_, Symbol::P | Symbol::PQuantumM) => {
            let mut e = l.w(-1.0, vec![DxInv(x), DParam(l.nu(s))]);
            if symbol == Symbol::PQuantumM {
                e = e.add(&l.w(1.0, vec![MulParam(l.mu(s)), Dx(x)]).scale(-i * hb / 2.0));
            }
            e
        }
        (_, Symbol::DDq) => l.w(1.0, vec![MulParam(l.mu(s)), Dx(x)]),
        (_, Symbol::DDp) => l.w(1.0, vec![MulParam(l.nu(s)), Dx(x)]),
    };
    Ok(e)
}

/// Operator acting on tomograms that corresponds to `symbol` on axis `axis`.
pub fn correspondence_operator(
    symbol: Symbol,
    representation: Representation,
    axis: usize,
    dim: usize,
    units: &UnitsContext,
) -> Result<CorrespondenceOperator> {
    let l = layout(representation, dim)?;
    if axis >= dim {
        return Err(Error::InvalidArgument(format!("axis {axis} out of range for dimension {dim}")));
    }
    Ok(CorrespondenceOperator { symbol, representation, axis, dim, expr: rule(&l, symbol, axis, units)? })
}

/// Evolution equations whose two sides are compared on trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EquationId {
    LivTomOpt,
    LivTomSym,
    EqTomSym,
    EqModSym,
    EqModSymProb,
    LivTomSym1,
}

impl EquationId {
    pub const ALL: [EquationId; 6] = [
        EquationId::LivTomOpt,
        EquationId::LivTomSym,
        EquationId::EqTomSym,
        EquationId::EqModSym,
        EquationId::EqModSymProb,
        EquationId::LivTomSym1,
    ];

    pub fn representation(self) -> Representation {
        match self {
            EquationId::LivTomOpt => Representation::Optical,
            EquationId::EqModSymProb | EquationId::LivTomSym1 => Representation::Probability,
            _ => Representation::Symplectic,
        }
    }

    /// Whether the equation is written for canonical-momentum tomograms.
    pub fn canonical(self) -> bool {
        self == EquationId::EqTomSym
    }

    pub fn classical(self) -> bool {
        matches!(self, EquationId::LivTomOpt | EquationId::LivTomSym | EquationId::LivTomSym1)
    }
}

/// Quadratic polynomial `f(q) = c0 + c1 . q + q^T c2 q / 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticForm {
    pub c0: f64,
    pub c1: Vec<f64>,
    pub c2: Vec<Vec<f64>>,
}

impl QuadraticForm {
    /// Central differences with unit step, exact for polynomials of degree two.
    /// Fails with `UnsupportedField` when the probe does not reproduce `f`.
    pub fn probe(dim: usize, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let z = vec![0.0; dim];
        let c0 = f(&z);
        let at = |pairs: &[(usize, f64)]| {
            let mut q = z.clone();
            for &(k, v) in pairs {
                q[k] += v;
            }
            f(&q)
        };
        let mut c1 = vec![0.0; dim];
        let mut c2 = vec![vec![0.0; dim]; dim];
        for k in 0..dim {
            let (p, m) = (at(&[(k, 1.0)]), at(&[(k, -1.0)]));
            c1[k] = 0.5 * (p - m);
            c2[k][k] = p - 2.0 * c0 + m;
            for j in 0..k {
                let v = 0.25 * (at(&[(k, 1.0), (j, 1.0)]) - at(&[(k, 1.0), (j, -1.0)]) - at(&[(k, -1.0), (j, 1.0)])
                    + at(&[(k, -1.0), (j, -1.0)]));
                c2[k][j] = v;
                c2[j][k] = v;
            }
        }
        let form = Self { c0, c1, c2 };
        let probes = [0.37, -1.21, 2.03];
        let q: Vec<f64> = (0..dim).map(|k| probes[k]).collect();
        let (a, b) = (form.value(&q), f(&q));
        if (a - b).abs() > 1e-8 * (1.0 + b.abs()) {
            return Err(Error::UnsupportedField(
                "potential is not a polynomial of degree <= 2; the residual checks need affine E and constant B".into(),
            ));
        }
        Ok(form)
    }

    pub fn value(&self, q: &[f64]) -> f64 {
        let mut v = self.c0;
        for k in 0..q.len() {
            v += self.c1[k] * q[k];
            for j in 0..q.len() {
                v += 0.5 * self.c2[k][j] * q[k] * q[j];
            }
        }
        v
    }

    pub fn is_affine(&self) -> bool {
        self.c2.iter().flatten().all(|v| v.abs() < 1e-12)
    }

    /// `f(Z)` with operator arguments `Z_k`, symmetrized in the quadratic part.
    pub fn substitute(&self, z: &[OperatorExpr]) -> OperatorExpr {
        let mut out = OperatorExpr::scalar(self.c0);
        for (k, zk) in z.iter().enumerate() {
            out = out.add(&zk.scale(self.c1[k]));
            for (j, zj) in z.iter().enumerate() {
                if self.c2[k][j] != 0.0 {
                    out = out.add(&zk.compose(zj).scale(0.5 * self.c2[k][j]));
                }
            }
        }
        out
    }
}

/// Potentials reduced to the data the operator tables need.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldModel {
    pub dim: usize,
    pub field: AffineField,
    /// `phi` and the components of `A` at the evaluation time (canonical equation only).
    pub phi: Option<QuadraticForm>,
    pub a: Option<Vec<QuadraticForm>>,
}

impl FieldModel {
    /// Requires static affine `E` and constant `B`.
    pub fn from_potentials(p: &Potentials, t: f64) -> Result<Self> {
        let field = p.affine.ok_or_else(|| {
            Error::UnsupportedField(
                "tomographic residuals need an affine electric field and a constant magnetic field; \
                 only then do the operator-valued field arguments reduce to first-order correspondence operators"
                    .into(),
            )
        })?;
        let dim = p.dim();
        let phi = QuadraticForm::probe(dim, |q| p.scalar_potential(q, t))?;
        let a = (0..dim)
            .map(|s| {
                let f = QuadraticForm::probe(dim, |q| p.vector_potential(q, t)[s])?;
                if !f.is_affine() {
                    return Err(Error::UnsupportedField("vector potential must be affine in q".into()));
                }
                Ok(f)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { dim, field, phi: Some(phi), a: Some(a) })
    }

    /// Field model without potentials (enough for every equation except the canonical one).
    pub fn from_field(dim: usize, field: AffineField) -> Self {
        Self { dim, field, phi: None, a: None }
    }

    fn e_form(&self, j: usize) -> QuadraticForm {
        let d = self.dim;
        let c2 = vec![vec![0.0; d]; d];
        QuadraticForm { c0: self.field.e0[j], c1: (0..d).map(|k| self.field.grad_e[j][k]).collect(), c2 }
    }
}

fn levi_civita(a: usize, b: usize, g: usize) -> f64 {
    match (a, b, g) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// Triples `(alpha, beta, gamma)` with nonzero symbol whose `alpha, beta` are real axes.
fn eps_terms(dim: usize) -> Vec<(usize, usize, usize, f64)> {
    let mut out = Vec::new();
    for a in 0..dim {
        for b in 0..dim {
            for g in 0..3 {
                let e = levi_civita(a, b, g);
                if e != 0.0 {
                    out.push((a, b, g, e));
                }
            }
        }
    }
    out
}

/// `int_{-1/2}^{1/2} dtau tau^power f(Z(tau))` by Gauss–Legendre quadrature on the
/// operator coefficients.
fn tau_average(power: i32, f: impl Fn(f64) -> OperatorExpr) -> OperatorExpr {
    let (nodes, weights) = chord_rule(8);
    let mut out = OperatorExpr::zero();
    for (t, w) in nodes.iter().zip(&weights) {
        out = out.add(&f(*t).scale(w * t.powi(power)));
    }
    out
}

/// Right-hand side operator of `d/dt f = R f` for the chosen equation.
pub fn equation_operator(eq: EquationId, model: &FieldModel, units: &UnitsContext) -> Result<OperatorExpr> {
    use Prim::*;
    let d = model.dim;
    let rep = eq.representation();
    let l = layout(rep, d)?;
    let (m, e, c, hb) = (units.m, units.e, units.c, units.hbar);
    let i = Complex64::new(0.0, 1.0);
    let b = model.field.b;
    let eps = eps_terms(d);
    let mut r = OperatorExpr::zero();
    match eq {
        EquationId::LivTomOpt => {
            let w = units.omega;
            let mw = m * w;
            for j in 0..d {
                let (t, x) = (l.theta(j), l.x(j));
                let free = l
                    .w(1.0, vec![MulCos(t), MulCos(t), DParam(t)])
                    .sub(&l.w(1.0, vec![MulSin(t), MulCos(t)]).compose(&OperatorExpr::scalar(1.0).add(&l.w(1.0, vec![MulX(x), Dx(x)]))));
                r = r.add(&free.scale(w));
            }
            let q: Vec<OperatorExpr> = (0..d).map(|s| rule(&l, Symbol::Q, s, units)).collect::<Result<_>>()?;
            for &(a, bb, g, sgn) in &eps {
                let (ta, tb) = (l.theta(a), l.theta(bb));
                let inner = l
                    .w(1.0, vec![MulCos(tb), DxInv(l.x(bb)), DParam(tb)])
                    .sub(&l.w(1.0, vec![MulX(l.x(bb)), MulSin(tb)]));
                let term = inner.compose(&l.w(1.0, vec![MulSin(ta), Dx(l.x(a))]));
                r = r.add(&term.scale(sgn * b[g] * e / (m * c)));
            }
            for j in 0..d {
                let ej = model.e_form(j).substitute(&q);
                let term = ej.compose(&l.w(1.0, vec![MulSin(l.theta(j)), Dx(l.x(j))]));
                r = r.sub(&term.scale(e / mw));
            }
        }
        EquationId::LivTomSym | EquationId::LivTomSym1 => {
            for s in 0..d {
                r = r.add(&l.w(1.0 / m, vec![MulParam(l.mu(s)), DParam(l.nu(s))]));
            }
            for &(a, bb, g, sgn) in &eps {
                let term = if eq == EquationId::LivTomSym {
                    l.w(1.0, vec![DxInv(l.x(bb)), DParam(l.nu(bb)), MulParam(l.nu(a)), Dx(l.x(a))])
                } else {
                    l.w(1.0, vec![MulParam(l.nu(a)), DParam(l.nu(bb))])
                };
                r = r.add(&term.scale(sgn * b[g] * e / (m * c)));
            }
            let q: Vec<OperatorExpr> = (0..d).map(|s| rule(&l, Symbol::Q, s, units)).collect::<Result<_>>()?;
            for j in 0..d {
                let ej = model.e_form(j).substitute(&q);
                r = r.sub(&ej.compose(&l.w(1.0, vec![MulParam(l.nu(j)), Dx(l.x(j))])).scale(e));
            }
        }
        EquationId::EqModSym | EquationId::EqModSymProb => {
            for s in 0..d {
                r = r.add(&l.w(1.0 / m, vec![MulParam(l.mu(s)), DParam(l.nu(s))]));
            }
            // Z_s(tau) = -dx^-1 d_mu_s + i hbar tau nu_s dx
            let z = |tau: f64| -> Vec<OperatorExpr> {
                (0..d)
                    .map(|s| {
                        l.w(-1.0, vec![DxInv(l.x(s)), DParam(l.mu(s))])
                            .add(&l.w(1.0, vec![MulParam(l.nu(s)), Dx(l.x(s))]).scale(i * hb * tau))
                    })
                    .collect()
            };
            let constant = |v: f64| QuadraticForm { c0: v, c1: vec![0.0; d], c2: vec![vec![0.0; d]; d] };
            let b_tilde = |g: usize, power: i32| tau_average(power, |tau| constant(b[g]).substitute(&z(tau)));
            // [dp~_alpha] = -(e/c)(hbar/i) sum eps nu_beta dx_beta int tau B_gamma(Z)
            let dp = |a: usize| -> OperatorExpr {
                let mut acc = OperatorExpr::zero();
                for &(aa, bb, g, sgn) in &eps {
                    if aa == a {
                        let t = l.w(1.0, vec![MulParam(l.nu(bb)), Dx(l.x(bb))]).compose(&b_tilde(g, 1));
                        acc = acc.add(&t.scale(sgn));
                    }
                }
                acc.scale(-(e / c) * (-i * hb))
            };
            for a in 0..d {
                r = r.sub(&dp(a).compose(&l.w(1.0, vec![MulParam(l.mu(a)), Dx(l.x(a))])).scale(1.0 / m));
            }
            for j in 0..d {
                let ej = tau_average(0, |tau| model.e_form(j).substitute(&z(tau)));
                r = r.sub(&ej.compose(&l.w(1.0, vec![MulParam(l.nu(j)), Dx(l.x(j))])).scale(e));
            }
            for &(a, bb, g, sgn) in &eps {
                let inner = if eq == EquationId::EqModSym {
                    l.w(1.0, vec![DxInv(l.x(bb)), DParam(l.nu(bb))])
                        .sub(&dp(bb))
                        .compose(&l.w(1.0, vec![MulParam(l.nu(a)), Dx(l.x(a))]))
                } else {
                    l.w(1.0, vec![DParam(l.nu(bb))])
                        .sub(&dp(bb).compose(&l.w(1.0, vec![Dx(0)])))
                        .compose(&l.w(1.0, vec![MulParam(l.nu(a))]))
                };
                r = r.add(&b_tilde(g, 0).compose(&inner).scale(sgn * e / (m * c)));
            }
        }
        EquationId::EqTomSym => {
            let (Some(phi), Some(a)) = (&model.phi, &model.a) else {
                return Err(Error::InvalidArgument("the canonical equation needs the potentials, not only the fields".into()));
            };
            for s in 0..d {
                r = r.add(&l.w(1.0 / m, vec![MulParam(l.mu(s)), DParam(l.nu(s))]));
            }
            let q: Vec<OperatorExpr> = (0..d).map(|s| rule(&l, Symbol::QQuantumM, s, units)).collect::<Result<_>>()?;
            let p: Vec<OperatorExpr> = (0..d).map(|s| rule(&l, Symbol::PQuantumM, s, units)).collect::<Result<_>>()?;
            r = r.add(&phi.substitute(&q).im().scale(2.0 * e / hb));
            let aq: Vec<OperatorExpr> = a.iter().map(|f| f.substitute(&q)).collect();
            let mut a2 = OperatorExpr::zero();
            let mut ap = OperatorExpr::zero();
            for j in 0..d {
                a2 = a2.add(&aq[j].compose(&aq[j]));
                ap = ap.add(&aq[j].compose(&p[j]));
            }
            r = r.add(&a2.im().scale(e * e / (m * c * c * hb)));
            r = r.sub(&ap.im().scale(2.0 * e / (m * c * hb)));
            let div: f64 = (0..d).map(|s| a[s].c1[s]).sum();
            r = r.add(&OperatorExpr::scalar(div).re().scale(e / (m * c)));
        }
    }
    Ok(r)
}
