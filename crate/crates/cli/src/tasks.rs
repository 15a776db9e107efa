//! Task runners.

use std::path::Path;
use std::time::Instant;

use gauge_tomo::evolution::{classical_limit_study, residual_study, ClassicalLimitScenario, ResidualStudy};
use gauge_tomo::gauge_kernels::{apply_kernel, apply_shift, kernel_from_trace, kernel_linear_chi, GaugeKernel};
use gauge_tomo::numerics::{Axis, Grid};
use gauge_tomo::states::{gauge_phase_transform, StateRef};
use gauge_tomo::tomography::{
    compute_tomogram, reconstruct_density, sample_family, GaugeKind, ParameterGrid, Tomogram, TomogramOptions,
    TomographyParams,
};
use gauge_tomo::fields::GaugeSpec;

use crate::config::{default_centres, KernelKindSpec, Scenario, StateData, TaskSpec};
use crate::report::{write_csv, Status, TaskReport};

type TaskResult = Result<TaskReport, String>;

enum Transformed {
    Pure(gauge_tomo::states::WaveFunction),
    Mixed(gauge_tomo::states::DensityMatrix),
}

impl Transformed {
    fn as_ref(&self) -> StateRef<'_> {
        match self {
            Transformed::Pure(p) => p.into(),
            Transformed::Mixed(r) => r.into(),
        }
    }
}

impl StateData {
    fn as_ref(&self) -> StateRef<'_> {
        match self {
            StateData::Pure(p) => p.into(),
            StateData::Mixed(r) => r.into(),
        }
    }
}

fn transformed(sc: &Scenario) -> Result<Option<Transformed>, String> {
    let Some(chi) = &sc.chi else { return Ok(None) };
    let s = |e: gauge_tomo::Error| e.to_string();
    Ok(Some(match &sc.state {
        StateData::Pure(p) => Transformed::Pure(gauge_phase_transform(p, chi, p.time, &sc.units).map_err(s)?),
        StateData::Mixed(r) => Transformed::Mixed(gauge_phase_transform(r, chi, r.time, &sc.units).map_err(s)?),
    }))
}

fn x_grid_for(p: &TomographyParams, half: f64, points: usize) -> Result<Grid, String> {
    let axis = Axis::symmetric(half, points).map_err(|e| e.to_string())?;
    let n = if p.scalar_x() { 1 } else { p.dim() };
    Grid::new(vec![axis; n]).map_err(|e| e.to_string())
}

fn tomogram_rows(a: &Tomogram, b: Option<&Tomogram>) -> Vec<Vec<f64>> {
    (0..a.x_grid.len())
        .map(|i| {
            let mut r = a.x_grid.point(i);
            r.push(a.values[i]);
            if let Some(b) = b {
                r.push(b.values[i]);
            }
            r
        })
        .collect()
}

fn tomogram_header(t: &Tomogram, gauge: bool) -> Vec<String> {
    let mut h: Vec<String> = if t.x_grid.dim() == 1 {
        vec!["x".into()]
    } else {
        (1..=t.x_grid.dim()).map(|k| format!("x{k}")).collect()
    };
    h.push("value".into());
    if gauge {
        h.push("value_transformed".into());
    }
    h
}

fn csv(dir: &Path, name: &str, hash: &str, header: &[String], rows: &[Vec<f64>]) -> Result<String, String> {
    let h: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    write_csv(dir, name, hash, &h, rows).map_err(|e| format!("cannot write {name}: {e}"))
}

pub fn run_task(i: usize, task: &TaskSpec, sc: &Scenario, dir: &Path, hash: &str) -> TaskReport {
    let start = Instant::now();
    let out = match task {
        TaskSpec::ComputeTomogram { .. } => compute(i, task, sc, dir, hash),
        TaskSpec::KernelCheck { .. } => kernel(i, task, sc, dir, hash),
        TaskSpec::Residual { .. } => residual(i, task, sc, dir, hash),
        TaskSpec::ClassicalLimit { .. } => limit(i, task, sc, dir, hash),
        TaskSpec::Reconstruct { .. } => reconstruct(task, sc),
    };
    let mut r = out.unwrap_or_else(|m| TaskReport::error(task.name(), m));
    r.metric("wall_time_s", start.elapsed().as_secs_f64());
    r
}

fn compute(i: usize, task: &TaskSpec, sc: &Scenario, dir: &Path, hash: &str) -> TaskResult {
    let TaskSpec::ComputeTomogram { params, kind, x_half_width, x_points, max_change, min_change } = task else {
        unreachable!()
    };
    let mut r = TaskReport::new(task.name());
    let opts = TomogramOptions { x_points: *x_points, ..TomogramOptions::default() };
    let e = |e: gauge_tomo::Error| e.to_string();
    let tr = transformed(sc)?;
    let pot_c = match &sc.chi {
        Some(chi) => Some(gauge_tomo::fields::gauge_transform_potentials(&sc.potentials, chi, &sc.units).map_err(e)?),
        None => None,
    };
    let a = (*kind == GaugeKind::GaugeIndependent).then_some(&sc.potentials);
    let mut worst: f64 = 0.0;
    for (k, p) in params.iter().enumerate() {
        let xg = x_half_width.map(|h| x_grid_for(p, h, *x_points)).transpose()?;
        let m0 = compute_tomogram(sc.state.as_ref(), p, *kind, a, xg.as_ref(), &sc.units, &opts).map_err(e)?;
        r.metric(format!("integral_{k}"), m0.integral());
        r.metric(format!("min_value_{k}"), m0.min_value());
        let m1 = match (&tr, &pot_c) {
            (Some(t), Some(pc)) => {
                let ac = (*kind == GaugeKind::GaugeIndependent).then_some(pc);
                let m1 = compute_tomogram(t.as_ref(), p, *kind, ac, Some(&m0.x_grid), &sc.units, &opts).map_err(e)?;
                let d = m0.l1_distance(&m1).map_err(e)?;
                r.metric(format!("two_gauge_l1_{k}"), d);
                worst = worst.max(d);
                Some(m1)
            }
            _ => None,
        };
        let name = format!("task{i}_tomogram_{k}.csv");
        let f = csv(dir, &name, hash, &tomogram_header(&m0, m1.is_some()), &tomogram_rows(&m0, m1.as_ref()))?;
        r.files.push(f);
    }
    if tr.is_some() {
        r.metric("two_gauge_l1_max", worst);
        if let Some(t) = max_change {
            r.at_most("two_gauge_l1_max", worst, *t);
        }
        if let Some(t) = min_change {
            r.above("two_gauge_l1_max", worst, *t);
        }
    }
    Ok(r)
}

fn kernel(i: usize, task: &TaskSpec, sc: &Scenario, dir: &Path, hash: &str) -> TaskResult {
    let TaskSpec::KernelCheck { outputs, kernel, param_grid, x_half_width, x_points, tolerance } = task else {
        unreachable!()
    };
    let mut r = TaskReport::new(task.name());
    let e = |e: gauge_tomo::Error| e.to_string();
    let chi = sc.chi.as_ref().expect("validated");
    let tr = transformed(sc)?.expect("validated");
    let opts = TomogramOptions::default();
    let direct = |s: StateRef<'_>, p: &TomographyParams, xg: &Grid| {
        compute_tomogram(s, p, GaugeKind::Ordinary, None, Some(xg), &sc.units, &opts).map_err(e)
    };
    let kernel_out: Vec<Tomogram> = match kernel {
        KernelKindSpec::Shift => {
            let Some(GaugeSpec::Linear { a }) = &sc.config.gauge else { unreachable!() };
            let GaugeKernel::Shift { shift, .. } = kernel_linear_chi(a, &sc.units) else { unreachable!() };
            outputs
                .iter()
                .map(|p| {
                    let xg = x_grid_for(p, *x_half_width, *x_points)?;
                    apply_shift(&shift, &direct(sc.state.as_ref(), p, &xg)?, &sc.units).map_err(e)
                })
                .collect::<Result<_, String>>()?
        }
        KernelKindSpec::Trace => {
            let pg = param_grid.unwrap_or_default();
            let xg = x_grid_for(&outputs[0], *x_half_width, *x_points)?;
            let fam = sample_family(sc.state.as_ref(), false, None, pg, &sc.units, &opts).map_err(e)?;
            let k = kernel_from_trace(&sc.grid, outputs, &xg, pg, chi, 0.0, &sc.units).map_err(e)?;
            let out = apply_kernel(&GaugeKernel::Numeric(k), &fam).map_err(e)?;
            let imag = out.iter().map(|o| o.max_imag).fold(0.0, f64::max);
            r.metric("max_imag", imag);
            out.into_iter().map(|o| o.tomogram).collect()
        }
    };
    let mut worst: f64 = 0.0;
    for (k, (p, kt)) in outputs.iter().zip(&kernel_out).enumerate() {
        let d_t = direct(tr.as_ref(), p, &kt.x_grid)?;
        let d = kt.l1_distance(&d_t).map_err(e)?;
        r.metric(format!("l1_{k}"), d);
        worst = worst.max(d);
        let name = format!("task{i}_kernel_{k}.csv");
        let header = tomogram_header(kt, true);
        r.files.push(csv(dir, &name, hash, &header, &tomogram_rows(kt, Some(&d_t)))?);
    }
    r.metric("l1_max", worst);
    r.at_most("l1_max", worst, *tolerance);
    Ok(r)
}

fn grid_half_width(sc: &Scenario) -> f64 {
    let ax = sc.grid.axis(0);
    0.5 * (ax.max - ax.min)
}

fn residual(i: usize, task: &TaskSpec, sc: &Scenario, dir: &Path, hash: &str) -> TaskResult {
    let TaskSpec::Residual { equations, trajectory, t_eval, dt0, h0, levels, x_half_width, centres, min_order } = task
    else {
        unreachable!()
    };
    let mut r = TaskReport::new(task.name());
    let (q0, p0, sigma) = sc.packet().expect("validated");
    let dim = sc.grid.dim();
    for eq in equations {
        let study = ResidualStudy {
            dim,
            field: sc.config.potentials.clone(),
            equation: *eq,
            trajectory: *trajectory,
            q0: q0.clone(),
            p0: p0.clone(),
            sigma,
            t_eval: *t_eval,
            dt0: *dt0,
            h0: *h0,
            levels: *levels,
            x_half_width: *x_half_width,
            centres: centres.clone().unwrap_or_else(|| default_centres(*eq, dim)),
            state_points: sc.grid.axis(0).n,
            state_half_width: grid_half_width(sc),
        };
        let rep = residual_study(&study, &sc.units).map_err(|e| format!("{eq:?}: {e}"))?;
        let key = format!("{eq:?}");
        let order = rep.order.unwrap_or(f64::NAN);
        r.metric(format!("order_{key}"), order);
        r.metric(format!("rms_residual_{key}"), rep.rms());
        r.at_least(&format!("order_{key}"), order, *min_order);
        let seq: Vec<f64> = rep.refinement.iter().map(|x| x.residual).collect();
        r.decreasing(&format!("refinement_{key}"), &seq);
        let rows: Vec<Vec<f64>> = rep.refinement.iter().map(|x| vec![x.h, x.dt, x.residual]).collect();
        let hdr = ["h".to_string(), "dt".into(), "residual".into()];
        r.files.push(csv(dir, &format!("task{i}_refinement_{key}.csv"), hash, &hdr, &rows)?);
        let rows: Vec<Vec<f64>> =
            rep.times.iter().zip(&rep.residuals).zip(&rep.relative).map(|((t, a), b)| vec![*t, *a, *b]).collect();
        let hdr = ["t".to_string(), "residual".into(), "relative".into()];
        r.files.push(csv(dir, &format!("task{i}_residual_{key}.csv"), hash, &hdr, &rows)?);
    }
    Ok(r)
}

fn limit(i: usize, task: &TaskSpec, sc: &Scenario, dir: &Path, hash: &str) -> TaskResult {
    let TaskSpec::ClassicalLimit { hbar_list, t_final, sections, gauges, max_distance, distance_monotone, gauge_monotone } =
        task
    else {
        unreachable!()
    };
    let mut r = TaskReport::new(task.name());
    let (q0, p0, sigma) = sc.packet().expect("validated");
    let study = ClassicalLimitScenario {
        field: sc.config.potentials.clone(),
        q0: q0[0],
        p0: p0[0],
        width_factor: sigma / sc.units.hbar.sqrt(),
        t_final: *t_final,
        hbar_list: hbar_list.clone(),
        gauges: gauges.clone(),
        sections: sections.clone(),
        state_points: sc.grid.axis(0).n,
        half_width: grid_half_width(sc),
        p_half_width: 8.0,
        x_points: 401,
        x_half_width: 10.0,
        classical_steps: 500,
    };
    let rep = classical_limit_study(&study, &sc.units).map_err(|e| e.to_string())?;
    let dist: Vec<f64> = rep.rows.iter().map(|x| x.distance).collect();
    r.metric("max_distance", rep.max_distance());
    if let Some(t) = max_distance {
        r.at_most("max_distance", rep.max_distance(), *t);
    }
    if *distance_monotone {
        r.decreasing("distance", &dist);
    }
    for &k in gauge_monotone {
        let seq: Vec<f64> = rep.rows.iter().map(|x| x.gauge_dependence[k]).collect();
        r.decreasing(&format!("gauge_dependence_{k}"), &seq);
    }
    let mut hdr = vec!["hbar".to_string(), "distance".into()];
    hdr.extend((0..gauges.len()).map(|k| format!("gauge_dependence_{k}")));
    let rows: Vec<Vec<f64>> = rep
        .rows
        .iter()
        .map(|x| {
            let mut v = vec![x.hbar, x.distance];
            v.extend(&x.gauge_dependence);
            v
        })
        .collect();
    r.files.push(csv(dir, &format!("task{i}_classical_limit.csv"), hash, &hdr, &rows)?);
    Ok(r)
}

fn reconstruct(task: &TaskSpec, sc: &Scenario) -> TaskResult {
    let TaskSpec::Reconstruct { scalar, gauge_independent, param_grid, min_fidelity } = task else { unreachable!() };
    let mut r = TaskReport::new(task.name());
    let e = |e: gauge_tomo::Error| e.to_string();
    let a = gauge_independent.then_some(&sc.potentials);
    let pg: ParameterGrid = param_grid.unwrap_or_default();
    let fam = sample_family(sc.state.as_ref(), *scalar, a, pg, &sc.units, &TomogramOptions::default()).map_err(e)?;
    let rho = sc.state.density();
    match reconstruct_density(&fam, a, &sc.grid, Some(&rho)) {
        Ok(rec) => {
            let f = rec.fidelity.unwrap_or(f64::NAN);
            r.metric("fidelity", f);
            r.metric("trace_before", rec.trace_before);
            r.at_least("fidelity", f, *min_fidelity);
        }
        Err(gauge_tomo::Error::LowFidelity { .. }) => {
            r.status = Status::Fail;
            r.message = Some("reconstruction fidelity below the library floor".into());
        }
        Err(err) => return Err(err.to_string()),
    }
    Ok(r)
}
