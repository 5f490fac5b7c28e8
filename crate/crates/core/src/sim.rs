//! Method-of-lines integration of a scheme with the truncated-exponential
//! Runge–Kutta update, and convergence studies against the exact solution
//! `v(x, t) = v₀(x − t)`.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::SmoothFn;
use crate::linalg::ComplexMatrix;
use crate::mesh::{norm_av, weighted_error_norm, MeshFunction, MeshSpec, PeriodicMesh};
use crate::scheme::{MappingKind, Scheme};
use crate::{Complex64, Error, Result};

/// Blow-up factor on `‖u‖_av` that aborts an integration.
pub const BLOWUP_RATIO: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub scheme: Scheme,
    pub mesh: MeshSpec,
    pub initial: SmoothFn,
    pub t_end: f64,
    /// `τ = courant · h_min`.
    pub courant: f64,
    pub rk_order: usize,
}

impl SimConfig {
    /// Defaults: `v₀ = sin`, `t = 1`, Courant number 0.1, order 7.
    pub fn new(scheme: Scheme, mesh: &PeriodicMesh) -> Self {
        Self {
            scheme,
            mesh: mesh.to_spec(),
            initial: SmoothFn::sin(),
            t_end: 1.0,
            courant: 0.1,
            rk_order: 7,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.courant > 0.0) || !self.courant.is_finite() {
            return Err(Error::BadArgument(format!(
                "courant number {} must be positive",
                self.courant
            )));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::BadArgument(format!(
                "end time {} must be non-negative",
                self.t_end
            )));
        }
        if !(1..=12).contains(&self.rk_order) {
            return Err(Error::BadArgument(format!("rk order {} outside 1..=12", self.rk_order)));
        }
        Ok(())
    }
}

/// Precomputed stencil coefficients `a_k` for every row of a mesh.
#[derive(Debug, Clone)]
pub struct Operator {
    half_width: usize,
    coeffs: Vec<Vec<f64>>,
}

impl Operator {
    pub fn new(scheme: &Scheme, mesh: &PeriodicMesh) -> Result<Self> {
        let s = scheme.half_width();
        let coeffs = (0..mesh.n_nodes() as isize)
            .map(|j| scheme.coefficients(&mesh.local_steps(j, s)))
            .collect::<Result<_>>()?;
        Ok(Self { half_width: s, coeffs })
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `out = 𝓛 u`.
    pub fn apply(&self, u: &[f64], out: &mut [f64]) {
        let n = u.len() as isize;
        let s = self.half_width as isize;
        for (j, (o, a)) in out.iter_mut().zip(&self.coeffs).enumerate() {
            let j = j as isize;
            *o = a
                .iter()
                .enumerate()
                .map(|(i, ak)| ak * u[(j + i as isize - s).rem_euclid(n) as usize])
                .sum();
        }
    }

    /// Dense `N × N` matrix of `𝓛`.
    pub fn to_matrix(&self) -> ComplexMatrix {
        let n = self.len();
        let s = self.half_width as isize;
        let mut m = ComplexMatrix::zeros(n, n);
        for (j, a) in self.coeffs.iter().enumerate() {
            for (i, ak) in a.iter().enumerate() {
                let col = (j as isize + i as isize - s).rem_euclid(n as isize) as usize;
                m[(j, col)] += Complex64::new(*ak, 0.0);
            }
        }
        m
    }

    /// `u ← Σ_{k≤q} (−τ𝓛)^k/k! u`, evaluated by Horner's rule.
    pub fn step(&self, u: &mut [f64], tau: f64, rk_order: usize, work: &mut Work) {
        let n = u.len();
        work.w.clear();
        work.w.extend_from_slice(u);
        work.lw.resize(n, 0.0);
        for k in (1..=rk_order).rev() {
            self.apply(&work.w, &mut work.lw);
            let c = tau / k as f64;
            for ((w, lw), u0) in work.w.iter_mut().zip(&work.lw).zip(u.iter()) {
                *w = u0 - c * lw;
            }
        }
        u.copy_from_slice(&work.w);
    }
}

/// Scratch buffers for [`Operator::step`].
#[derive(Debug, Default)]
pub struct Work {
    w: Vec<f64>,
    lw: Vec<f64>,
}

fn real_values(f: &MeshFunction) -> Vec<f64> {
    f.values.iter().map(|z| z.re).collect()
}

/// Cell averages or point samples of `v₀(x − t)`, as the scheme expects.
pub fn reference_solution(v0: &SmoothFn, mesh: &PeriodicMesh, scheme: &Scheme, t: f64) -> MeshFunction {
    let n = mesh.n_nodes() as isize;
    let values = (0..n)
        .map(|j| match scheme.mapping_kind() {
            MappingKind::CellAverage => v0.cell_average(mesh.node(j) - t, mesh.node(j + 1) - t),
            MappingKind::PointValue => v0.value(mesh.node(j) - t),
        })
        .collect();
    MeshFunction::new(values)
}

pub fn project_initial(v0: &SmoothFn, mesh: &PeriodicMesh, scheme: &Scheme) -> MeshFunction {
    reference_solution(v0, mesh, scheme, 0.0)
}

/// Outcome of an integration.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub u: MeshFunction,
    pub steps: usize,
    pub tau: f64,
}

/// Integrates from an explicit initial state, calling `observe(t, u)` after
/// every step.
pub fn integrate_from(
    scheme: &Scheme,
    mesh: &PeriodicMesh,
    u0: &[f64],
    t_end: f64,
    courant: f64,
    rk_order: usize,
    mut observe: impl FnMut(f64, &[f64]),
) -> Result<SimResult> {
    if u0.len() != mesh.n_nodes() {
        return Err(Error::MeshMismatch {
            left: u0.len(),
            right: mesh.n_nodes(),
        });
    }
    let op = Operator::new(scheme, mesh)?;
    let tau = courant * mesh.h_min();
    let norm0 = norm_av(&MeshFunction::from_real(u0));
    let mut u = u0.to_vec();
    let mut work = Work::default();
    let mut t = 0.0;
    let mut steps = 0;
    while t < t_end {
        let remaining = t_end - t;
        // Absorb a final sliver into the last step.
        let dt = if remaining <= tau * (1.0 + 1e-12) {
            remaining
        } else {
            tau
        };
        op.step(&mut u, dt, rk_order, &mut work);
        steps += 1;
        t = if dt == remaining { t_end } else { t + dt };
        let norm = (u.iter().map(|v| v * v).sum::<f64>() / u.len() as f64).sqrt();
        if !norm.is_finite() || norm > BLOWUP_RATIO * norm0 {
            return Err(Error::UnstableBlowup {
                time: t,
                ratio: norm / norm0,
            });
        }
        observe(t, &u);
    }
    Ok(SimResult {
        u: MeshFunction::from_real(&u),
        steps,
        tau,
    })
}

/// Runs `cfg` and returns `u(t_end)`.
pub fn integrate(cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let mesh = PeriodicMesh::from_spec(&cfg.mesh)?;
    let u0 = real_values(&project_initial(&cfg.initial, &mesh, &cfg.scheme));
    integrate_from(&cfg.scheme, &mesh, &u0, cfg.t_end, cfg.courant, cfg.rk_order, |_, _| {})
}

/// Weighted error of `u(t_end)` against the exact solution.
pub fn solution_error(cfg: &SimConfig) -> Result<f64> {
    let mesh = PeriodicMesh::from_spec(&cfg.mesh)?;
    let res = integrate(cfg)?;
    let reference = reference_solution(&cfg.initial, &mesh, &cfg.scheme, cfg.t_end);
    weighted_error_norm(
        &res.u,
        &reference,
        &mesh,
        cfg.scheme.mapping_kind().conservation_weights(),
    )
}

/// `ξ = (r − 1)/(r + 1)` for a step ratio `r = h_max/h_min`.
pub fn xi_from_ratio(r: f64) -> Result<f64> {
    if !(r >= 1.0) || !r.is_finite() {
        return Err(Error::BadArgument(format!("step ratio {r} must be at least 1")));
    }
    Ok((r - 1.0) / (r + 1.0))
}

/// Run parameters shared by every cell of a convergence table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    pub initial: SmoothFn,
    pub t_end: f64,
    pub courant: f64,
    pub rk_order: usize,
}

impl Default for RunParams {
    fn default() -> Self {
        Self {
            initial: SmoothFn::sin(),
            t_end: 1.0,
            courant: 0.1,
            rk_order: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub h_av: f64,
    /// One error per ratio.
    pub errors: Vec<f64>,
    /// Observed order against the previous row; `None` on the first row.
    pub orders: Vec<Option<f64>>,
}

/// Errors on alternating meshes, one column per step ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub scheme: String,
    pub ratios: Vec<f64>,
    pub params: RunParams,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn error(&self, row: usize, ratio: usize) -> f64 {
        self.rows[row].errors[ratio]
    }

    pub fn order(&self, row: usize, ratio: usize) -> Option<f64> {
        self.rows[row].orders[ratio]
    }

    /// CSV with columns `N,h_av,error_r,order_r,…`. Lines of `header` are
    /// written first, each prefixed with `# `.
    pub fn to_csv(&self, header: &[String]) -> String {
        let mut out = String::new();
        for line in header {
            let _ = writeln!(out, "# {line}");
        }
        out.push_str("N,h_av");
        for r in &self.ratios {
            let _ = write!(out, ",error_{r},order_{r}");
        }
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "{},{:?}", row.n, row.h_av);
            for (e, o) in row.errors.iter().zip(&row.orders) {
                let _ = write!(out, ",{e:?},");
                if let Some(o) = o {
                    let _ = write!(out, "{o:?}");
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Runs every `(ratio, N)` pair in parallel and tabulates errors and
/// observed orders.
pub fn convergence_study(
    scheme: &Scheme,
    ratios: &[f64],
    n_list: &[usize],
    params: &RunParams,
) -> Result<ConvergenceTable> {
    if ratios.is_empty() || n_list.is_empty() {
        return Err(Error::EmptyInput);
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::BadArgument("mesh sizes must increase".into()));
    }
    if let Some(&n) = n_list.iter().find(|n| **n % 2 != 0) {
        return Err(Error::OddN(n));
    }
    let xis = ratios.iter().map(|&r| xi_from_ratio(r)).collect::<Result<Vec<_>>>()?;
    let cells: Vec<(usize, usize)> = (0..n_list.len())
        .flat_map(|i| (0..xis.len()).map(move |k| (i, k)))
        .collect();
    let errors: Vec<f64> = cells
        .par_iter()
        .map(|&(i, k)| {
            let mesh = PeriodicMesh::alternating(n_list[i], xis[k])?;
            let cfg = SimConfig {
                scheme: *scheme,
                mesh: mesh.to_spec(),
                initial: params.initial.clone(),
                t_end: params.t_end,
                courant: params.courant,
                rk_order: params.rk_order,
            };
            solution_error(&cfg)
        })
        .collect::<Result<_>>()?;
    let h_av = |n: usize| 2.0 * std::f64::consts::PI / n as f64;
    let rows = (0..n_list.len())
        .map(|i| {
            let errs: Vec<f64> = errors[i * xis.len()..(i + 1) * xis.len()].to_vec();
            let orders = (0..xis.len())
                .map(|k| {
                    (i > 0).then(|| {
                        let prev = errors[(i - 1) * xis.len() + k];
                        (prev / errs[k]).ln() / (h_av(n_list[i - 1]) / h_av(n_list[i])).ln()
                    })
                })
                .collect();
            ConvergenceRow {
                n: n_list[i],
                h_av: h_av(n_list[i]),
                errors: errs,
                orders,
            }
        })
        .collect();
    Ok(ConvergenceTable {
        scheme: scheme.name(),
        ratios: ratios.to_vec(),
        params: params.clone(),
        rows,
    })
}
