//! Kernels carrying ordinary tomograms of a state to those of its gauge
//! transform.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{gauge_transform_potentials, GaugeFunction, GaugeSpec, Potentials};
use crate::numerics::{lagrange_interp, Grid, DEFAULT_QUAD_ORDER};
use crate::states::{gauge_phase_transform, StateRef};
use crate::tomography::kernels::{x_factor, DequantizerSpec};
use crate::tomography::{
    characteristic_value, compute_tomogram, quantizer_matrix, GaugeKind, ParameterGrid, Tomogram, TomogramFamily,
    TomogramOptions, TomographyParams,
};
use crate::units::UnitsContext;

/// Largest kernel table, in complex entries.
pub const KERNEL_BUDGET: usize = 50_000_000;

/// Largest position grid for trace-built kernels.
pub const MAX_TRACE_GRID: usize = 64;

/// Kernel `G(x, eta; x', eta')` with `M_c(x, eta) = int G M(x', eta') dx' deta'`.
#[derive(Debug, Clone)]
pub enum GaugeKernel {
    /// Linear `chi = a . q`: every `x_s` moves by `nu_s (e / c) a_s`.
    Shift { shift: Vec<f64>, chi: Option<GaugeSpec> },
    Numeric(NumericKernel),
}

/// Trace-built kernel. Quantizers depend on `x'` only through
/// `exp(i s x')`, so the table stores the `x'`-reduced factor and the `x'`
/// quadrature happens in [`apply_kernel`].
#[derive(Debug, Clone)]
pub struct NumericKernel {
    pub outputs: Vec<TomographyParams>,
    pub x_grid: Grid,
    pub param_grid: ParameterGrid,
    /// Row `o * nx + k` (output section `o`, node `k` of `x_grid`), column per parameter node.
    pub table: Vec<Vec<Complex64>>,
    pub chi: Option<GaugeSpec>,
    pub units: UnitsContext,
}

/// Closed-form kernel of `chi = a . q`.
pub fn kernel_linear_chi(a: &[f64], units: &UnitsContext) -> GaugeKernel {
    GaugeKernel::Shift {
        shift: a.iter().map(|v| units.e / units.c * v).collect(),
        chi: Some(GaugeSpec::Linear { a: a.to_vec() }),
    }
}

/// `G = Tr(e^{i e chi / c hbar} D(eta') e^{-i e chi / c hbar} U(x, eta))` on a 1D
/// position grid, for the output sections `outputs` (symplectic or optical)
/// over `x_grid`, and the input symplectic parameter grid `param_grid`.
#[allow(clippy::too_many_arguments)]
pub fn kernel_from_trace(
    grid: &Grid,
    outputs: &[TomographyParams],
    x_grid: &Grid,
    param_grid: ParameterGrid,
    chi: &GaugeFunction,
    t: f64,
    units: &UnitsContext,
) -> Result<NumericKernel> {
    if grid.dim() != 1 || chi.dim() != 1 || x_grid.dim() != 1 {
        return Err(Error::Unsupported("kernel tables are built for one degree of freedom".into()));
    }
    if grid.len() > MAX_TRACE_GRID {
        return Err(Error::MemoryBudget { required: grid.len() * grid.len(), budget: MAX_TRACE_GRID * MAX_TRACE_GRID });
    }
    for o in outputs {
        if !matches!(o, TomographyParams::Symplectic { .. } | TomographyParams::Optical { .. }) {
            return Err(Error::Unsupported("kernel outputs must be symplectic or optical sections".into()));
        }
    }
    let nodes = param_grid.nodes();
    let n_nodes = nodes.len() * nodes.len();
    let rows = outputs.len() * x_grid.len();
    let required = rows.saturating_mul(n_nodes);
    if required > KERNEL_BUDGET {
        return Err(Error::MemoryBudget { required, budget: KERNEL_BUDGET });
    }
    let n = grid.len();
    let pts = grid.points();
    let dv2 = grid.cell_volume().powi(2);
    let phase: Vec<Complex64> =
        pts.iter().map(|q| Complex64::from_polar(1.0, units.gauge_phase() * chi.value(q, t))).collect();
    // e^{i chi} D(0, eta') e^{-i chi}, kept sparse
    let conj_quantizers: Vec<Vec<(usize, usize, Complex64)>> = (0..n_nodes)
        .into_par_iter()
        .map(|k| {
            let (mu, nu) = (nodes[k / nodes.len()], nodes[k % nodes.len()]);
            let mut out = Vec::new();
            if mu == 0.0 && nu == 0.0 {
                let norm = units.m * units.omega / (2.0 * std::f64::consts::PI) / grid.cell_volume();
                for i in 0..n {
                    out.push((i, i, Complex64::new(norm, 0.0)));
                }
                return Ok(out);
            }
            let p = TomographyParams::Symplectic { mu: vec![mu], nu: vec![nu] };
            let d = quantizer_matrix(grid, &p, &[0.0], None, t, units, DEFAULT_QUAD_ORDER)?.matrix;
            for i in 0..n {
                for j in 0..n {
                    let v = d[(i, j)];
                    if v.norm() > 0.0 {
                        out.push((i, j, phase[i] * v * phase[j].conj()));
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let xs = x_grid.points();
    let mut table = Vec::with_capacity(rows);
    for o in outputs {
        let spec = DequantizerSpec::new(o, 1, units)?;
        let mut xcoef = [0.0];
        // dequantizer U(x, eta)[j, i] without its x factor, for every pair
        let mut u0 = vec![None; n * n];
        for j in 0..n {
            for i in 0..n {
                if let Some((amp, ph)) = spec.element(grid, &pts[j], &pts[i], None, t, units, DEFAULT_QUAD_ORDER, &mut xcoef)? {
                    u0[j * n + i] = Some((Complex64::from_polar(amp * dv2, ph), xcoef[0]));
                }
            }
        }
        let block: Vec<Vec<Complex64>> = xs
            .par_iter()
            .map(|x| {
                conj_quantizers
                    .iter()
                    .map(|r| {
                        r.iter()
                            .filter_map(|&(i, j, v)| {
                                u0[j * n + i].map(|(uv, xc)| v * uv * x_factor(&[xc], x, &pts[i], &spec.mu, grid))
                            })
                            .sum()
                    })
                    .collect()
            })
            .collect();
        table.extend(block);
    }
    Ok(NumericKernel {
        outputs: outputs.to_vec(),
        x_grid: x_grid.clone(),
        param_grid,
        table,
        chi: chi.spec.clone(),
        units: *units,
    })
}

/// Kernel output for one section, with the diagnostics of the contraction.
#[derive(Debug, Clone)]
pub struct KernelOutput {
    pub tomogram: Tomogram,
    /// Largest imaginary residue relative to the peak value.
    pub max_imag: f64,
}

/// Shifts every per-axis (or the scalar) x of a tomogram as a linear gauge
/// transformation does.
pub fn apply_shift(shift: &[f64], t: &Tomogram, units: &UnitsContext) -> Result<Tomogram> {
    let (_, nu) = t.params.symplectic_form(units);
    if nu.len() != shift.len() {
        return Err(Error::GridMismatch("shift and tomogram dimensions differ".into()));
    }
    let disp: Vec<f64> = if t.params.scalar_x() {
        vec![nu.iter().zip(shift).map(|(n, a)| n * a).sum()]
    } else {
        nu.iter().zip(shift).map(|(n, a)| n * a).collect()
    };
    let mut values = t.values.clone();
    let shape = t.x_grid.shape();
    for (k, dk) in disp.iter().enumerate() {
        if *dk == 0.0 {
            continue;
        }
        let ax = t.x_grid.axis(k);
        let off = dk / ax.spacing();
        values = crate::numerics::ops::map_lines(&values, &shape, k, |line, out| {
            for (i, o) in out.iter_mut().enumerate() {
                *o = lagrange_interp(line, i as f64 - off);
            }
        });
    }
    Ok(Tomogram { values, ..t.clone() })
}

/// Applies a kernel. Shift kernels map every tomogram of the family (the
/// origin node has none); numeric kernels contract over the family's nodes and
/// return one tomogram per output section. Outputs must integrate to `1 +- 1e-3`.
pub fn apply_kernel(kernel: &GaugeKernel, family: &TomogramFamily) -> Result<Vec<KernelOutput>> {
    match kernel {
        GaugeKernel::Shift { shift, .. } => family
            .tomograms
            .iter()
            .flatten()
            .map(|t| Ok(KernelOutput { tomogram: apply_shift(shift, t, &family.units)?, max_imag: 0.0 }))
            .collect(),
        GaugeKernel::Numeric(k) => {
            if family.dim != 1 || family.scalar || family.gauge_kind != GaugeKind::Ordinary {
                return Err(Error::GridMismatch("numeric kernels act on ordinary 1D symplectic families".into()));
            }
            if family.grid != k.param_grid || family.units != k.units {
                return Err(Error::GridMismatch("family is not sampled on the kernel's parameter grid".into()));
            }
            let s = k.units.quantizer_frequency();
            let coef: Vec<Complex64> = family
                .tomograms
                .iter()
                .zip(&family.weights)
                .map(|(t, w)| t.as_ref().map_or(Complex64::new(1.0, 0.0), |t| characteristic_value(t, s)) * w)
                .collect();
            let nx = k.x_grid.len();
            k.outputs
                .iter()
                .enumerate()
                .map(|(o, params)| {
                    let vals: Vec<Complex64> = (0..nx)
                        .map(|i| k.table[o * nx + i].iter().zip(&coef).map(|(g, c)| g * c).sum())
                        .collect();
                    let peak = vals.iter().map(|v| v.re.abs()).fold(0.0, f64::max);
                    let imag = vals.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
                    let tomogram = Tomogram {
                        params: params.clone(),
                        x_grid: k.x_grid.clone(),
                        values: vals.iter().map(|v| v.re).collect(),
                        gauge_kind: GaugeKind::Ordinary,
                        time: family.time,
                        normalization_factor: 1.0,
                    };
                    let norm = tomogram.integral();
                    if !((norm - 1.0).abs() <= 1e-3) {
                        return Err(Error::Normalization { factor: norm });
                    }
                    Ok(KernelOutput {
                        tomogram: Tomogram { normalization_factor: norm, ..tomogram },
                        max_imag: if peak > 0.0 { imag / peak } else { imag },
                    })
                })
                .collect()
        }
    }
}

/// Largest change of a gauge-independent tomogram between `(rho, A)` and
/// `(rho_c, A + grad chi)`. Zero up to discretization error: such tomograms
/// are fixed points of every gauge kernel.
pub fn fixed_point_error<'a>(
    state: impl Into<StateRef<'a>>,
    a: &Potentials,
    chi: &GaugeFunction,
    params: &TomographyParams,
    units: &UnitsContext,
    opts: &TomogramOptions,
) -> Result<f64> {
    let s = state.into();
    let rho = s.to_density();
    let t = s.time();
    let rc = gauge_phase_transform(&rho, chi, t, units)?;
    let ac = gauge_transform_potentials(a, chi, units)?;
    let m0 = compute_tomogram(&rho, params, GaugeKind::GaugeIndependent, Some(a), None, units, opts)?;
    let m1 = compute_tomogram(&rc, params, GaugeKind::GaugeIndependent, Some(&ac), Some(&m0.x_grid), units, opts)?;
    Ok(m0.values.iter().zip(&m1.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

/// Serializable summary of a kernel for reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelSummary {
    pub kind: String,
    pub chi: Option<GaugeSpec>,
    pub shift: Option<Vec<f64>>,
    pub rows: usize,
    pub columns: usize,
}

impl GaugeKernel {
    pub fn summary(&self) -> KernelSummary {
        match self {
            GaugeKernel::Shift { shift, chi } => {
                KernelSummary { kind: "shift".into(), chi: chi.clone(), shift: Some(shift.clone()), rows: 0, columns: 0 }
            }
            GaugeKernel::Numeric(k) => KernelSummary {
                kind: "numeric".into(),
                chi: k.chi.clone(),
                shift: None,
                rows: k.table.len(),
                columns: k.table.first().map_or(0, |r| r.len()),
            },
        }
    }
}
