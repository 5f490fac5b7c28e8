//! Local mappings, truncation errors and exactness.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::functions::{factorial, SmoothFn};
use crate::block::BlockSymbol;
use crate::linalg::{lstsq, ComplexMatrix, DEFAULT_RANK_TOL};
use crate::mesh::{MeshFunction, MeshStructure, PeriodicMesh};
use crate::scheme::{MappingKind, Scheme};
use crate::{Error, Result};

/// Relative size below which a truncation error counts as zero.
const EXACT_TOL: f64 = 1e-11;

/// Nodes and steps indexed by any integer.
pub trait Geometry {
    fn node(&self, j: isize) -> f64;
    fn step(&self, j: isize) -> f64;
    /// Reference step `h_av` used to scale derivative corrections.
    fn h_av(&self) -> f64;
    fn period(&self) -> usize;
}

impl Geometry for PeriodicMesh {
    fn node(&self, j: isize) -> f64 {
        PeriodicMesh::node(self, j)
    }
    fn step(&self, j: isize) -> f64 {
        PeriodicMesh::step(self, j)
    }
    fn h_av(&self) -> f64 {
        PeriodicMesh::h_av(self)
    }
    fn period(&self) -> usize {
        PeriodicMesh::period(self)
    }
}

/// The infinite mesh with structure `γ`, `h_av = 1` and `x_0 = 0`.
#[derive(Debug, Clone)]
pub struct UnitMesh {
    gamma: MeshStructure,
    nodes: Vec<f64>,
}

impl UnitMesh {
    pub fn new(gamma: &MeshStructure) -> Self {
        Self {
            gamma: gamma.clone(),
            nodes: gamma.unit_nodes(),
        }
    }
}

impl Geometry for UnitMesh {
    fn node(&self, j: isize) -> f64 {
        let m = self.gamma.period() as isize;
        let wraps = j.div_euclid(m);
        (wraps * m) as f64 + self.nodes[j.rem_euclid(m) as usize]
    }
    fn step(&self, j: isize) -> f64 {
        self.gamma.step(j)
    }
    fn h_av(&self) -> f64 {
        1.0
    }
    fn period(&self) -> usize {
        self.gamma.period()
    }
}

/// Rule turning a smooth function into a mesh function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LocalMapping {
    /// `(1/h_{j+1/2}) ∫_{x_j}^{x_{j+1}} f`.
    CellAverage,
    /// `f(x_j)`.
    PointValue,
    /// `(Π f)_j + C_{j mod m} h_av^r f^{(r)}(x_j)`.
    Corrected {
        base: MappingKind,
        order: usize,
        coefficients: Vec<f64>,
    },
}

impl LocalMapping {
    pub fn base(kind: MappingKind) -> Self {
        match kind {
            MappingKind::CellAverage => LocalMapping::CellAverage,
            MappingKind::PointValue => LocalMapping::PointValue,
        }
    }

    pub fn apply_at<G: Geometry>(&self, geom: &G, f: &SmoothFn, j: isize) -> Complex64 {
        match self {
            LocalMapping::CellAverage => f.cell_average(geom.node(j), geom.node(j + 1)),
            LocalMapping::PointValue => f.value(geom.node(j)),
            LocalMapping::Corrected {
                base,
                order,
                coefficients,
            } => {
                let c = coefficients[j.rem_euclid(coefficients.len() as isize) as usize];
                let base_value = LocalMapping::base(*base).apply_at(geom, f, j);
                if c == 0.0 {
                    return base_value;
                }
                base_value + c * geom.h_av().powi(*order as i32) * f.derivative(*order).value(geom.node(j))
            }
        }
    }

    /// `Π f′` at row `j`.
    fn apply_derivative_at<G: Geometry>(&self, geom: &G, f: &SmoothFn, j: isize) -> Complex64 {
        let d = f.derivative(1);
        d.factor * self.apply_at(geom, &d.base, j)
    }
}

/// Mesh function `(Π̂ f)_j`.
pub fn cell_average_map(mesh: &PeriodicMesh, f: &SmoothFn) -> MeshFunction {
    map_onto(mesh, f, &LocalMapping::CellAverage)
}

/// Mesh function `(Π f)_j`, `j = 0..N`.
pub fn map_onto(mesh: &PeriodicMesh, f: &SmoothFn, map: &LocalMapping) -> MeshFunction {
    MeshFunction::new((0..mesh.n_nodes() as isize).map(|j| map.apply_at(mesh, f, j)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationError {
    pub values: MeshFunction,
    pub mapping: LocalMapping,
    pub function: SmoothFn,
}

/// `ε_j = −(Π f′)_j + Σ_k a_k (Π f)_{j+k}` at a single row.
pub fn truncation_at<G: Geometry>(
    scheme: &Scheme,
    geom: &G,
    f: &SmoothFn,
    map: &LocalMapping,
    j: isize,
) -> Result<Complex64> {
    let s = scheme.half_width() as isize;
    let steps: Vec<f64> = (j - s..j + s).map(|i| geom.step(i)).collect();
    let a = scheme.coefficients(&steps)?;
    let sum: Complex64 = a
        .iter()
        .enumerate()
        .filter(|(_, ak)| **ak != 0.0)
        .map(|(i, ak)| *ak * map.apply_at(geom, f, j + i as isize - s))
        .sum();
    Ok(sum - map.apply_derivative_at(geom, f, j))
}

/// Truncation error of `scheme` on every row of `mesh`.
pub fn truncation_error(
    scheme: &Scheme,
    mesh: &PeriodicMesh,
    f: &SmoothFn,
    map: &LocalMapping,
) -> Result<TruncationError> {
    let values = (0..mesh.n_nodes() as isize)
        .map(|j| truncation_at(scheme, mesh, f, map, j))
        .collect::<Result<Vec<_>>>()?;
    Ok(TruncationError {
        values: MeshFunction::new(values),
        mapping: map.clone(),
        function: f.clone(),
    })
}

/// `ε(x^d/d!)` over one period of the unit mesh, each row using the
/// monomial centred at its own node. Also returns the zero threshold.
fn monomial_residuals(scheme: &Scheme, unit: &UnitMesh, d: usize, map: &LocalMapping) -> Result<(Vec<Complex64>, f64)> {
    let m = unit.period() as isize;
    let s = scheme.half_width() as isize;
    let mut out = Vec::with_capacity(m as usize);
    let mut scale: f64 = 0.0;
    for j in 0..m {
        let f = SmoothFn::scaled_monomial(d, unit.node(j));
        out.push(truncation_at(scheme, unit, &f, map, j)?);
        let steps: Vec<f64> = (j - s..j + s).map(|i| unit.step(i)).collect();
        let amax = scheme.coefficients(&steps)?.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let fmax = (j - s..=j + s)
            .map(|i| map.apply_at(unit, &f, i).norm())
            .fold(0.0, f64::max);
        scale = scale.max(amax * fmax.max(1.0 / factorial(d)));
    }
    Ok((out, EXACT_TOL * scale))
}

/// True if the scheme's truncation error vanishes on all polynomials of
/// degree `≤ q` under `map`, on the unit mesh with structure `gamma`.
pub fn is_exact(scheme: &Scheme, gamma: &MeshStructure, map: &LocalMapping, q: usize) -> Result<bool> {
    let unit = UnitMesh::new(gamma);
    for d in 0..=q {
        let (eps, tol) = monomial_residuals(scheme, &unit, d, map)?;
        if eps.iter().any(|e| e.norm() > tol) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Largest `q ≤ max_degree` with `is_exact(q)`, or `None` if even constants
/// are not reproduced.
pub fn exactness_degree(
    scheme: &Scheme,
    gamma: &MeshStructure,
    map: &LocalMapping,
    max_degree: usize,
) -> Result<Option<usize>> {
    let unit = UnitMesh::new(gamma);
    let mut best = None;
    for d in 0..=max_degree {
        let (eps, tol) = monomial_residuals(scheme, &unit, d, map)?;
        if eps.iter().any(|e| e.norm() > tol) {
            break;
        }
        best = Some(d);
    }
    Ok(best)
}

/// Corrected mapping `Π̃ f = Π f + C_j h_av^r f^{(r)}(x_j)` that makes the
/// scheme `q`-exact, with the minimal-norm `C`.
///
/// The scheme must already be `(q−1)`-exact under `base`, and `1 ≤ r ≤ q`.
pub fn corrected_map(
    scheme: &Scheme,
    gamma: &MeshStructure,
    base: MappingKind,
    r: usize,
    q: usize,
) -> Result<LocalMapping> {
    if r == 0 || r > q {
        return Err(Error::BadArgument(format!("derivative order {r} must lie in 1..={q}")));
    }
    let base_map = LocalMapping::base(base);
    if q > 0 && !is_exact(scheme, gamma, &base_map, q - 1)? {
        return Err(Error::BadArgument(format!(
            "{} is not {}-exact under the base mapping",
            scheme.name(),
            q - 1
        )));
    }
    let unit = UnitMesh::new(gamma);
    let m = gamma.period();
    let s = scheme.half_width() as isize;
    // Rows: degree d = r..=q, period row j. Unknowns: C_0..C_{m−1}.
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for d in r..=q {
        let (eps, tol) = monomial_residuals(scheme, &unit, d, &base_map)?;
        for j in 0..m as isize {
            let f = SmoothFn::scaled_monomial(d, unit.node(j));
            let fr = f.derivative(r);
            let fr1 = f.derivative(r + 1);
            let steps: Vec<f64> = (j - s..j + s).map(|i| unit.step(i)).collect();
            let a = scheme.coefficients(&steps)?;
            let mut row = vec![Complex64::new(0.0, 0.0); m];
            for (i, ak) in a.iter().enumerate() {
                let k = j + i as isize - s;
                row[k.rem_euclid(m as isize) as usize] += *ak * fr.value(unit.node(k));
            }
            row[j as usize] -= fr1.value(unit.node(j));
            // Round-off in an analytically zero row must not count as rank.
            let amax = a.iter().fold(0.0f64, |x, y| x.max(y.abs()));
            for z in &mut row {
                if z.norm() <= EXACT_TOL * amax {
                    *z = Complex64::new(0.0, 0.0);
                }
            }
            let e = eps[j as usize];
            rows.push(row);
            rhs.push(if e.norm() <= tol { Complex64::new(0.0, 0.0) } else { -e });
        }
    }
    let a = ComplexMatrix::from_rows(&rows)?;
    let (c, residual) = lstsq(&a, &rhs, DEFAULT_RANK_TOL)?;
    let scale = rhs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let amax = a.max_abs().max(1.0);
    if residual > 1e-9 * amax.max(scale) {
        return Err(Error::InconsistentCorrection { residual });
    }
    let coefficients: Vec<f64> = c.iter().map(|z| if z.re.abs() < 1e-14 { 0.0 } else { z.re }).collect();
    Ok(LocalMapping::Corrected {
        base,
        order: r,
        coefficients,
    })
}

/// Exactness of a scheme under its natural mapping, before and after the
/// derivative correction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactnessReport {
    pub scheme: String,
    pub gamma: MeshStructure,
    pub mapping: MappingKind,
    /// Exactness under the base mapping.
    pub q0: Option<usize>,
    /// Exactness under the corrected mapping (equal to `q0` when no
    /// correction exists).
    pub q1: Option<usize>,
    /// Derivative order of the correction.
    pub correction_order: Option<usize>,
    pub coefficients: Vec<f64>,
}

/// Measures `q0`, then tries a correction with `r = q = q0 + 1`.
pub fn exactness_report(scheme: &Scheme, gamma: &MeshStructure, max_degree: usize) -> Result<ExactnessReport> {
    let kind = scheme.mapping_kind();
    let q0 = exactness_degree(scheme, gamma, &LocalMapping::base(kind), max_degree)?;
    let mut report = ExactnessReport {
        scheme: scheme.name(),
        gamma: gamma.clone(),
        mapping: kind,
        q0,
        q1: q0,
        correction_order: None,
        coefficients: vec![0.0; gamma.period()],
    };
    let Some(q0) = q0 else { return Ok(report) };
    if q0 >= max_degree {
        return Ok(report);
    }
    let q = q0 + 1;
    match corrected_map(scheme, gamma, kind, q, q) {
        Ok(map) => {
            if is_exact(scheme, gamma, &map, q)? {
                if let LocalMapping::Corrected { coefficients, .. } = map {
                    report.coefficients = coefficients;
                }
                report.q1 = Some(q);
                report.correction_order = Some(q);
            }
        }
        Err(Error::InconsistentCorrection { .. }) => {}
        Err(e) => return Err(e),
    }
    Ok(report)
}

/// `ε̂(γ, φ, Π) = (iφI − L(γ, φ)) v` with `v_j = (Π e^{iφx})_j` on the unit
/// mesh, `j = 0..m`.
pub fn symbol_truncation(bs: &BlockSymbol, phi: f64, map: &LocalMapping) -> Vec<Complex64> {
    let unit = UnitMesh::new(bs.gamma());
    let f = SmoothFn::Exp { alpha: phi };
    let v: Vec<Complex64> = (0..bs.period() as isize).map(|j| map.apply_at(&unit, &f, j)).collect();
    let lv = bs.symbol(phi).mul_vec(&v);
    v.iter()
        .zip(&lv)
        .map(|(vj, lj)| Complex64::new(0.0, phi) * vj - lj)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::norm_av;

    fn fv2() -> Scheme {
        Scheme::fv_polynomial(2).unwrap()
    }

    #[test]
    fn cell_averages_of_constants() {
        let mesh = PeriodicMesh::alternating(8, 0.4).unwrap();
        let f = SmoothFn::Polynomial {
            coeffs: vec![3.0],
            center: 0.0,
        };
        let v = cell_average_map(&mesh, &f);
        assert!(v.values.iter().all(|z| (z.re - 3.0).abs() < 1e-15));
    }

    #[test]
    fn fv2_reproduces_quadratics_on_a_mesh() {
        let mesh = PeriodicMesh::from_steps(&[1.0, 0.6, 1.4, 0.9, 1.1, 1.0], 0.2).unwrap();
        for d in 0..=2 {
            let f = SmoothFn::monomial(d, 1.0);
            let eps = truncation_error(&fv2(), &mesh, &f, &LocalMapping::CellAverage).unwrap();
            // Rows away from the wrap-around see a single polynomial.
            for j in 3..mesh.n_nodes() - 3 {
                assert!(eps.values.values[j].norm() < 1e-11, "d={d} j={j}");
            }
        }
    }

    #[test]
    fn exactness_of_fv2_on_period_three_mesh() {
        let g = MeshStructure::new(vec![0.3, -0.1, -0.2]).unwrap();
        let rep = exactness_report(&fv2(), &g, 6).unwrap();
        assert_eq!(rep.q0, Some(2));
        assert_eq!(rep.q1, Some(3));
        assert!(rep.coefficients.iter().any(|c| c.abs() > 1e-6));
    }

    #[test]
    fn fv2_is_already_three_exact_on_alternating_meshes() {
        // Both stencil types of a two-periodic mesh are mirror images, and
        // the cubic edge errors cancel in the flux difference.
        let g = MeshStructure::alternating(0.5).unwrap();
        let rep = exactness_report(&fv2(), &g, 6).unwrap();
        assert_eq!(rep.q0, Some(3));
        assert_eq!(rep.q1, Some(3));
        let unit = UnitMesh::new(&g);
        let f = SmoothFn::scaled_monomial(4, 0.0);
        let e0 = truncation_at(&fv2(), &unit, &f, &LocalMapping::CellAverage, 0).unwrap();
        let e1 = truncation_at(&fv2(), &unit, &f, &LocalMapping::CellAverage, 1).unwrap();
        // Exact values from a symbolic computation of the reconstruction.
        assert!((e0.re - 11.0 / 240.0).abs() < 1e-13 && (e1.re - 9.0 / 80.0).abs() < 1e-13);
    }

    #[test]
    fn uniform_structure_needs_no_correction() {
        let g = MeshStructure::alternating(0.0).unwrap();
        let rep = exactness_report(&fv2(), &g, 6).unwrap();
        assert_eq!(rep.q0, Some(3));
        assert!(rep.coefficients.iter().all(|c| *c == 0.0));
    }

    #[test]
    fn divided_difference_schemes_are_one_exact() {
        let g = MeshStructure::alternating(0.3).unwrap();
        for s in [Scheme::r3(), Scheme::r5()] {
            let rep = exactness_report(&s, &g, 6).unwrap();
            assert_eq!(rep.q0, Some(1), "{s}");
            assert_eq!(rep.q1, Some(2), "{s}");
        }
    }

    #[test]
    fn zero_mean_weighted_error() {
        for xi in [0.2, 0.5, 0.7] {
            let g = MeshStructure::alternating(xi).unwrap();
            let unit = UnitMesh::new(&g);
            let f = SmoothFn::monomial(3, 0.0);
            let sum: Complex64 = (0..2)
                .map(|j| unit.step(j) * truncation_at(&fv2(), &unit, &f, &LocalMapping::CellAverage, j).unwrap())
                .sum();
            assert!(sum.norm() < 1e-12, "xi={xi}: {sum}");
        }
    }

    #[test]
    fn corrected_map_rejects_bad_orders() {
        let g = MeshStructure::alternating(0.3).unwrap();
        assert!(corrected_map(&fv2(), &g, MappingKind::CellAverage, 0, 3).is_err());
        assert!(corrected_map(&fv2(), &g, MappingKind::CellAverage, 4, 3).is_err());
        // Not 3-exact, so a correction to 4 is not attempted.
        assert!(corrected_map(&fv2(), &g, MappingKind::CellAverage, 4, 4).is_err());
    }

    #[test]
    fn lower_order_correction_also_works() {
        // r = 2 < q = 3 needs the stacked system.
        let g = MeshStructure::alternating(0.4).unwrap();
        if let Ok(map) = corrected_map(&fv2(), &g, MappingKind::CellAverage, 2, 3) {
            assert!(is_exact(&fv2(), &g, &map, 3).unwrap());
        }
    }

    #[test]
    fn symbol_truncation_vanishes_at_zero_frequency() {
        let g = MeshStructure::alternating(0.4).unwrap();
        let bs = BlockSymbol::new(&Scheme::r5(), &g).unwrap();
        let e = symbol_truncation(&bs, 0.0, &LocalMapping::PointValue);
        assert!(e.iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn symbol_truncation_matches_physical_space() {
        let n = 12;
        let alpha = 3.0;
        let mesh = PeriodicMesh::alternating(n, 0.35).unwrap();
        let bs = BlockSymbol::from_mesh(&fv2(), &mesh).unwrap();
        let f = SmoothFn::Exp { alpha };
        let eps = truncation_error(&fv2(), &mesh, &f, &LocalMapping::CellAverage).unwrap();
        let hat = symbol_truncation(&bs, alpha * mesh.h_av(), &LocalMapping::CellAverage);
        let lhs = norm_av(&eps.values);
        let rhs = hat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() / (2f64.sqrt() * mesh.h_av());
        assert!((lhs - rhs).abs() < 1e-10 * lhs.max(1.0), "{lhs} vs {rhs}");
    }
}
