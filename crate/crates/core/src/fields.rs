//! Electromagnetic potentials, gauge functions and field strengths.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Grid;
use crate::units::UnitsContext;

pub type VectorFn = Arc<dyn Fn(&[f64], f64) -> [f64; 3] + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;

/// Coarse analytic class of a potential component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldTag {
    Constant,
    Linear,
    Quadratic,
    General,
}

/// Static fields with `E(q) = e0 + grad_e q` and constant `B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineField {
    pub e0: [f64; 3],
    pub grad_e: [[f64; 3]; 3],
    pub b: [f64; 3],
}

impl AffineField {
    pub fn electric(&self, q: &[f64]) -> [f64; 3] {
        let mut e = self.e0;
        for (i, ei) in e.iter_mut().enumerate() {
            for (j, qj) in q.iter().enumerate() {
                *ei += self.grad_e[i][j] * qj;
            }
        }
        e
    }
}

/// Vector potential `A(q,t)` and scalar potential `phi(q,t)`.
#[derive(Clone)]
pub struct Potentials {
    dim: usize,
    a: VectorFn,
    phi: ScalarFn,
    pub a_tags: Vec<FieldTag>,
    pub phi_tag: FieldTag,
    /// Per-axis evaluation domain; `None` means unbounded.
    pub domain: Option<Vec<(f64, f64)>>,
    /// Set when E is affine in q, B is constant and neither depends on time.
    pub affine: Option<AffineField>,
    /// Whether A and phi are time independent.
    pub is_static: bool,
}

impl fmt::Debug for Potentials {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Potentials")
            .field("dim", &self.dim)
            .field("a_tags", &self.a_tags)
            .field("phi_tag", &self.phi_tag)
            .field("affine", &self.affine)
            .finish()
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if (1..=3).contains(&dim) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("dimension must be 1..=3, got {dim}")))
    }
}

fn dot(a: &[f64], q: &[f64]) -> f64 {
    a.iter().zip(q).map(|(x, y)| x * y).sum()
}

fn norm2(q: &[f64]) -> f64 {
    q.iter().map(|x| x * x).sum()
}

impl Potentials {
    /// General closure-defined potentials (time dependent unless marked otherwise).
    pub fn from_fns(
        dim: usize,
        a: impl Fn(&[f64], f64) -> [f64; 3] + Send + Sync + 'static,
        phi: impl Fn(&[f64], f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            dim,
            a: Arc::new(a),
            phi: Arc::new(phi),
            a_tags: vec![FieldTag::General; dim],
            phi_tag: FieldTag::General,
            domain: None,
            affine: None,
            is_static: false,
        })
    }

    pub fn free(dim: usize) -> Result<Self> {
        let mut p = Self::from_fns(dim, |_, _| [0.0; 3], |_, _| 0.0)?;
        p.a_tags = vec![FieldTag::Constant; dim];
        p.phi_tag = FieldTag::Constant;
        p.is_static = true;
        p.affine = Some(AffineField { e0: [0.0; 3], grad_e: [[0.0; 3]; 3], b: [0.0; 3] });
        Ok(p)
    }

    /// `phi = -E0 . q`.
    pub fn uniform_e(e0: &[f64]) -> Result<Self> {
        let dim = e0.len();
        let ev = e0.to_vec();
        let mut p = Self::from_fns(dim, |_, _| [0.0; 3], move |q, _| -dot(&ev, q))?;
        p.a_tags = vec![FieldTag::Constant; dim];
        p.phi_tag = FieldTag::Linear;
        p.is_static = true;
        let mut e = [0.0; 3];
        e[..dim].copy_from_slice(e0);
        p.affine = Some(AffineField { e0: e, grad_e: [[0.0; 3]; 3], b: [0.0; 3] });
        Ok(p)
    }

    /// Isotropic oscillator folded into `phi = m omega0^2 |q|^2 / (2e)`.
    pub fn harmonic(dim: usize, omega0: f64, units: &UnitsContext) -> Result<Self> {
        Self::anharmonic(dim, omega0, 0.0, units)
    }

    /// `e phi = m omega0^2 |q|^2 / 2 + lambda sum_s q_s^4`.
    pub fn anharmonic(dim: usize, omega0: f64, lambda: f64, units: &UnitsContext) -> Result<Self> {
        let k = units.m * omega0 * omega0;
        let e = units.e;
        let mut p = Self::from_fns(
            dim,
            |_, _| [0.0; 3],
            move |q, _| (0.5 * k * norm2(q) + lambda * q.iter().map(|x| x.powi(4)).sum::<f64>()) / e,
        )?;
        p.a_tags = vec![FieldTag::Constant; dim];
        p.phi_tag = if lambda == 0.0 { FieldTag::Quadratic } else { FieldTag::General };
        p.is_static = true;
        if lambda == 0.0 {
            let mut g = [[0.0; 3]; 3];
            for (s, row) in g.iter_mut().enumerate().take(dim) {
                row[s] = -k / e;
            }
            p.affine = Some(AffineField { e0: [0.0; 3], grad_e: g, b: [0.0; 3] });
        }
        Ok(p)
    }

    /// Constant out-of-plane field `B0` (dimension 2 or 3).
    pub fn constant_b(dim: usize, b0: f64, gauge: MagneticGauge) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidArgument("a magnetic field needs dimension >= 2".into()));
        }
        let a = move |q: &[f64], _t: f64| match gauge {
            MagneticGauge::Symmetric => [-0.5 * b0 * q[1], 0.5 * b0 * q[0], 0.0],
            MagneticGauge::Landau => [-b0 * q[1], 0.0, 0.0],
        };
        let mut p = Self::from_fns(dim, a, |_, _| 0.0)?;
        p.a_tags = vec![FieldTag::Linear; dim];
        p.phi_tag = FieldTag::Constant;
        p.is_static = true;
        p.affine = Some(AffineField { e0: [0.0; 3], grad_e: [[0.0; 3]; 3], b: [0.0, 0.0, b0] });
        Ok(p)
    }

    /// Static polynomial potentials from coefficient tables.
    pub fn polynomial(dim: usize, a: &[Vec<PolyTerm>], phi: &[PolyTerm]) -> Result<Self> {
        check_dim(dim)?;
        if a.len() > dim {
            return Err(Error::InvalidArgument("more vector-potential components than axes".into()));
        }
        for t in a.iter().flatten().chain(phi) {
            if t.powers.len() != dim {
                return Err(Error::InvalidArgument(format!(
                    "polynomial term has {} powers for dimension {dim}",
                    t.powers.len()
                )));
            }
        }
        let a_terms: Vec<Vec<PolyTerm>> = a.to_vec();
        let phi_terms = phi.to_vec();
        let a_deg: Vec<u32> = (0..dim).map(|s| a.get(s).map_or(0, |c| degree(c))).collect();
        let phi_deg = degree(phi);
        let mut p = Self::from_fns(
            dim,
            move |q, _| {
                let mut out = [0.0; 3];
                for (s, terms) in a_terms.iter().enumerate() {
                    out[s] = eval_poly(terms, q);
                }
                out
            },
            move |q, _| eval_poly(&phi_terms, q),
        )?;
        p.a_tags = a_deg.iter().map(|&d| tag_of(d)).collect();
        p.phi_tag = tag_of(phi_deg);
        p.is_static = true;
        if phi_deg <= 2 && a_deg.iter().all(|&d| d <= 1) {
            p.affine = Some(probe_affine(&p)?);
        }
        Ok(p)
    }

    pub fn with_domain(mut self, domain: Vec<(f64, f64)>) -> Result<Self> {
        if domain.len() != self.dim || domain.iter().any(|(a, b)| !(b > a)) {
            return Err(Error::InvalidArgument("domain must give one increasing interval per axis".into()));
        }
        self.domain = Some(domain);
        Ok(self)
    }

    pub fn with_grid_domain(self, grid: &Grid) -> Result<Self> {
        let d = grid.axes().iter().map(|a| (a.min, a.max)).collect();
        self.with_domain(d)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vector_potential(&self, q: &[f64], t: f64) -> [f64; 3] {
        (self.a)(q, t)
    }

    pub fn scalar_potential(&self, q: &[f64], t: f64) -> f64 {
        (self.phi)(q, t)
    }

    pub fn has_vector_potential(&self) -> bool {
        !(self.a_tags.iter().all(|t| *t == FieldTag::Constant) && self.is_static && {
            let a0 = self.vector_potential(&vec![0.0; self.dim], 0.0);
            a0.iter().all(|v| *v == 0.0)
        })
    }

    pub fn in_domain(&self, q: &[f64]) -> bool {
        match &self.domain {
            None => true,
            Some(d) => q.iter().zip(d).all(|(x, (a, b))| x >= a && x <= b),
        }
    }
}

/// Gauge for a constant magnetic field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MagneticGauge {
    Symmetric,
    Landau,
}

/// `coeff * prod_s q_s^powers[s]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyTerm {
    pub coeff: f64,
    pub powers: Vec<u32>,
}

fn eval_poly(terms: &[PolyTerm], q: &[f64]) -> f64 {
    terms
        .iter()
        .map(|t| t.coeff * t.powers.iter().zip(q).map(|(p, x)| x.powi(*p as i32)).product::<f64>())
        .sum()
}

fn degree(terms: &[PolyTerm]) -> u32 {
    terms.iter().filter(|t| t.coeff != 0.0).map(|t| t.powers.iter().sum()).max().unwrap_or(0)
}

fn tag_of(d: u32) -> FieldTag {
    match d {
        0 => FieldTag::Constant,
        1 => FieldTag::Linear,
        2 => FieldTag::Quadratic,
        _ => FieldTag::General,
    }
}

fn probe_affine(p: &Potentials) -> Result<AffineField> {
    let units = UnitsContext::default();
    let dim = p.dim;
    let origin = vec![0.0; dim];
    let f0 = field_strengths_with_step(p, &origin, 0.0, &units, 1e-3)?;
    let mut e0 = [0.0; 3];
    e0[..dim].copy_from_slice(&f0.e);
    let mut grad_e = [[0.0; 3]; 3];
    for j in 0..dim {
        let mut q = origin.clone();
        q[j] = 1.0;
        let fj = field_strengths_with_step(p, &q, 0.0, &units, 1e-3)?;
        for i in 0..dim {
            grad_e[i][j] = fj.e[i] - f0.e[i];
        }
    }
    Ok(AffineField { e0, grad_e, b: f0.b3() })
}

/// Time profile `amplitude sin(frequency t) + rate t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeProfile {
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default)]
    pub frequency: f64,
    #[serde(default)]
    pub rate: f64,
}

impl TimeProfile {
    pub fn value(&self, t: f64) -> f64 {
        self.amplitude * (self.frequency * t).sin() + self.rate * t
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.amplitude * self.frequency * (self.frequency * t).cos() + self.rate
    }
}

/// Serializable description of a gauge function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GaugeSpec {
    Zero,
    Constant { value: f64 },
    /// `a . q`
    Linear { a: Vec<f64> },
    /// `b |q|^2`
    Quadratic { b: f64 },
    /// `k sum_s q_s^3`
    Cubic { k: f64 },
    /// `f(t)`
    TimeOnly { profile: TimeProfile },
    /// `(a . q) f(t)`
    Separable { a: Vec<f64>, profile: TimeProfile },
}

/// Gauge function with its gradient and time derivative.
#[derive(Clone)]
pub struct GaugeFunction {
    dim: usize,
    chi: ScalarFn,
    grad: VectorFn,
    dchi_dt: ScalarFn,
    pub spec: Option<GaugeSpec>,
}

impl fmt::Debug for GaugeFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GaugeFunction").field("dim", &self.dim).field("spec", &self.spec).finish()
    }
}

impl GaugeFunction {
    pub fn from_fns(
        dim: usize,
        chi: impl Fn(&[f64], f64) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&[f64], f64) -> [f64; 3] + Send + Sync + 'static,
        dchi_dt: impl Fn(&[f64], f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self { dim, chi: Arc::new(chi), grad: Arc::new(grad), dchi_dt: Arc::new(dchi_dt), spec: None })
    }

    pub fn from_spec(dim: usize, spec: &GaugeSpec) -> Result<Self> {
        check_dim(dim)?;
        let vec3 = |a: &[f64]| -> Result<[f64; 3]> {
            if a.len() != dim {
                return Err(Error::InvalidArgument(format!("gauge vector has {} components for dimension {dim}", a.len())));
            }
            let mut v = [0.0; 3];
            v[..dim].copy_from_slice(a);
            Ok(v)
        };
        let mut g = match spec.clone() {
            GaugeSpec::Zero => Self::from_fns(dim, |_, _| 0.0, |_, _| [0.0; 3], |_, _| 0.0)?,
            GaugeSpec::Constant { value } => Self::from_fns(dim, move |_, _| value, |_, _| [0.0; 3], |_, _| 0.0)?,
            GaugeSpec::Linear { a } => {
                let v = vec3(&a)?;
                Self::from_fns(dim, move |q, _| dot(&v, q), move |_, _| v, |_, _| 0.0)?
            }
            GaugeSpec::Quadratic { b } => Self::from_fns(
                dim,
                move |q, _| b * norm2(q),
                move |q, _| {
                    let mut g = [0.0; 3];
                    for (s, x) in q.iter().enumerate() {
                        g[s] = 2.0 * b * x;
                    }
                    g
                },
                |_, _| 0.0,
            )?,
            GaugeSpec::Cubic { k } => Self::from_fns(
                dim,
                move |q, _| k * q.iter().map(|x| x * x * x).sum::<f64>(),
                move |q, _| {
                    let mut g = [0.0; 3];
                    for (s, x) in q.iter().enumerate() {
                        g[s] = 3.0 * k * x * x;
                    }
                    g
                },
                |_, _| 0.0,
            )?,
            GaugeSpec::TimeOnly { profile } => {
                Self::from_fns(dim, move |_, t| profile.value(t), |_, _| [0.0; 3], move |_, t| profile.derivative(t))?
            }
            GaugeSpec::Separable { a, profile } => {
                let v = vec3(&a)?;
                Self::from_fns(
                    dim,
                    move |q, t| dot(&v, q) * profile.value(t),
                    move |_, t| {
                        let s = profile.value(t);
                        [v[0] * s, v[1] * s, v[2] * s]
                    },
                    move |q, t| dot(&v, q) * profile.derivative(t),
                )?
            }
        };
        g.spec = Some(spec.clone());
        Ok(g)
    }

    pub fn zero(dim: usize) -> Self {
        Self::from_spec(dim, &GaugeSpec::Zero).expect("valid dimension")
    }

    pub fn linear(a: &[f64]) -> Self {
        Self::from_spec(a.len(), &GaugeSpec::Linear { a: a.to_vec() }).expect("valid dimension")
    }

    pub fn quadratic(dim: usize, b: f64) -> Self {
        Self::from_spec(dim, &GaugeSpec::Quadratic { b }).expect("valid dimension")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, q: &[f64], t: f64) -> f64 {
        (self.chi)(q, t)
    }

    pub fn gradient(&self, q: &[f64], t: f64) -> [f64; 3] {
        (self.grad)(q, t)
    }

    pub fn time_derivative(&self, q: &[f64], t: f64) -> f64 {
        (self.dchi_dt)(q, t)
    }

    /// Pointwise sum `self + other`.
    pub fn sum(&self, other: &GaugeFunction) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::InvalidArgument("gauge functions differ in dimension".into()));
        }
        let (c1, c2) = (self.chi.clone(), other.chi.clone());
        let (g1, g2) = (self.grad.clone(), other.grad.clone());
        let (d1, d2) = (self.dchi_dt.clone(), other.dchi_dt.clone());
        let spec = match (&self.spec, &other.spec) {
            (Some(GaugeSpec::Linear { a }), Some(GaugeSpec::Linear { a: b })) => {
                Some(GaugeSpec::Linear { a: a.iter().zip(b).map(|(x, y)| x + y).collect() })
            }
            _ => None,
        };
        let mut g = Self::from_fns(
            self.dim,
            move |q, t| c1(q, t) + c2(q, t),
            move |q, t| {
                let (a, b) = (g1(q, t), g2(q, t));
                [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
            },
            move |q, t| d1(q, t) + d2(q, t),
        )?;
        g.spec = spec;
        Ok(g)
    }

    /// Largest relative mismatch between the analytic gradient / time derivative
    /// and central differences of `chi` over the grid at time `t`.
    pub fn consistency_error(&self, grid: &Grid, t: f64) -> Result<f64> {
        if grid.dim() != self.dim {
            return Err(Error::GridMismatch("grid and gauge function dimensions differ".into()));
        }
        let mut worst: f64 = 0.0;
        let ht = 1e-5 * t.abs().max(1.0);
        for q in grid.points() {
            let g = self.gradient(&q, t);
            let mut scale: f64 = 1.0;
            let mut errs = Vec::with_capacity(self.dim + 1);
            for s in 0..self.dim {
                let h = 1e-5 * grid.axis(s).extent();
                let mut qp = q.clone();
                let mut qm = q.clone();
                qp[s] += h;
                qm[s] -= h;
                let fd = (self.value(&qp, t) - self.value(&qm, t)) / (2.0 * h);
                scale = scale.max(g[s].abs());
                errs.push((fd - g[s]).abs());
            }
            let dt = self.time_derivative(&q, t);
            let fdt = (self.value(&q, t + ht) - self.value(&q, t - ht)) / (2.0 * ht);
            scale = scale.max(dt.abs());
            errs.push((fdt - dt).abs());
            for e in errs {
                worst = worst.max(e / scale);
            }
        }
        Ok(worst)
    }

    /// Fail unless the gauge function is self-consistent to `1e-6`.
    pub fn check_consistency(&self, grid: &Grid, t: f64) -> Result<()> {
        let err = self.consistency_error(grid, t)?;
        if err > 1e-6 {
            return Err(Error::InvalidArgument(format!("gauge gradient inconsistent with chi (relative error {err:e})")));
        }
        Ok(())
    }
}

/// `(A + grad chi, phi - (1/c) d chi / dt)`.
pub fn gauge_transform_potentials(p: &Potentials, chi: &GaugeFunction, units: &UnitsContext) -> Result<Potentials> {
    if p.dim != chi.dim {
        return Err(Error::InvalidArgument("potentials and gauge function differ in dimension".into()));
    }
    let (a, g) = (p.a.clone(), chi.grad.clone());
    let (phi, dt) = (p.phi.clone(), chi.dchi_dt.clone());
    let c = units.c;
    let mut out = Potentials::from_fns(
        p.dim,
        move |q, t| {
            let (x, y) = (a(q, t), g(q, t));
            [x[0] + y[0], x[1] + y[1], x[2] + y[2]]
        },
        move |q, t| phi(q, t) - dt(q, t) / c,
    )?;
    out.domain = p.domain.clone();
    // E and B are invariant, so the affine description carries over.
    out.affine = p.affine;
    let time_free = matches!(
        chi.spec,
        Some(GaugeSpec::Zero | GaugeSpec::Constant { .. } | GaugeSpec::Linear { .. } | GaugeSpec::Quadratic { .. } | GaugeSpec::Cubic { .. })
    );
    out.is_static = p.is_static && time_free;
    Ok(out)
}

/// Electric field and magnetic field at a point. `b` is empty in 1D, the
/// out-of-plane scalar in 2D and the full vector in 3D.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldStrengths {
    pub e: Vec<f64>,
    pub b: Vec<f64>,
}

impl FieldStrengths {
    /// Magnetic field as a 3-vector.
    pub fn b3(&self) -> [f64; 3] {
        match self.b.len() {
            1 => [0.0, 0.0, self.b[0]],
            3 => [self.b[0], self.b[1], self.b[2]],
            _ => [0.0; 3],
        }
    }
}

/// Default finite-difference extent when potentials carry no domain.
pub const DEFAULT_EXTENT: f64 = 24.0;

/// `E = -grad phi - (1/c) dA/dt`, `B = curl A`, central differences with step
/// `1e-4` of the domain extent.
pub fn field_strengths(p: &Potentials, q: &[f64], t: f64, units: &UnitsContext) -> Result<FieldStrengths> {
    let extent = match &p.domain {
        Some(d) => d.iter().map(|(a, b)| b - a).fold(0.0, f64::max),
        None => DEFAULT_EXTENT,
    };
    field_strengths_with_step(p, q, t, units, 1e-4 * extent)
}

pub fn field_strengths_with_step(
    p: &Potentials,
    q: &[f64],
    t: f64,
    units: &UnitsContext,
    h: f64,
) -> Result<FieldStrengths> {
    let d = p.dim;
    if q.len() != d {
        return Err(Error::InvalidArgument(format!("point has {} coordinates for dimension {d}", q.len())));
    }
    if let Some(dom) = &p.domain {
        for (s, (lo, hi)) in dom.iter().enumerate() {
            if q[s] - h < *lo || q[s] + h > *hi {
                return Err(Error::OutsideDomain(format!("stencil around {q:?} leaves the field domain")));
            }
        }
    }
    let ht = 1e-4 * t.abs().max(1.0);
    // dA_i/dq_j
    let mut da = [[0.0; 3]; 3];
    let mut e = vec![0.0; d];
    for j in 0..d {
        let mut qp = q.to_vec();
        let mut qm = q.to_vec();
        qp[j] += h;
        qm[j] -= h;
        let (ap, am) = (p.vector_potential(&qp, t), p.vector_potential(&qm, t));
        for i in 0..3 {
            da[i][j] = (ap[i] - am[i]) / (2.0 * h);
        }
        e[j] = -(p.scalar_potential(&qp, t) - p.scalar_potential(&qm, t)) / (2.0 * h);
    }
    if !p.is_static {
        let (ap, am) = (p.vector_potential(q, t + ht), p.vector_potential(q, t - ht));
        for j in 0..d {
            e[j] -= (ap[j] - am[j]) / (2.0 * ht) / units.c;
        }
    }
    let b = match d {
        1 => vec![],
        2 => vec![da[1][0] - da[0][1]],
        _ => vec![da[2][1] - da[1][2], da[0][2] - da[2][0], da[1][0] - da[0][1]],
    };
    Ok(FieldStrengths { e, b })
}

/// Serializable field description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FieldSpec {
    Free,
    UniformE { e0: Vec<f64> },
    Harmonic { omega0: f64, #[serde(default)] lambda: f64 },
    #[serde(rename = "constant_B")]
    ConstantB { #[serde(rename = "B0")] b0: f64, gauge: MagneticGauge },
    Polynomial { #[serde(default)] a: Vec<Vec<PolyTerm>>, #[serde(default)] phi: Vec<PolyTerm> },
}

impl FieldSpec {
    pub fn build(&self, dim: usize, units: &UnitsContext) -> Result<Potentials> {
        match self {
            FieldSpec::Free => Potentials::free(dim),
            FieldSpec::UniformE { e0 } => {
                if e0.len() != dim {
                    return Err(Error::InvalidArgument("e0 length differs from dimension".into()));
                }
                Potentials::uniform_e(e0)
            }
            FieldSpec::Harmonic { omega0, lambda } => Potentials::anharmonic(dim, *omega0, *lambda, units),
            FieldSpec::ConstantB { b0, gauge } => Potentials::constant_b(dim, *b0, *gauge),
            FieldSpec::Polynomial { a, phi } => Potentials::polynomial(dim, a, phi),
        }
    }
}
