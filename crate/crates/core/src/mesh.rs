//! 2π-periodic meshes, their period and structure, and mesh-function norms.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const TWO_PI: f64 = 2.0 * PI;
const PERIOD_TOL: f64 = 1e-12;

/// Relative step deviations `γ_j = h_{j+1/2}/h_av − 1` over one period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MeshStructure {
    gamma: Vec<f64>,
}

impl MeshStructure {
    /// Validates `Σ γ_j = 0` and `γ_j > −1`.
    pub fn new(gamma: Vec<f64>) -> Result<Self> {
        if gamma.is_empty() {
            return Err(Error::InvalidStructure("empty".into()));
        }
        if let Some(g) = gamma.iter().find(|g| !g.is_finite() || **g <= -1.0) {
            return Err(Error::InvalidStructure(format!(
                "entry {g} would give a non-positive step"
            )));
        }
        let sum: f64 = gamma.iter().sum();
        if sum.abs() > 1e-12 * gamma.len() as f64 {
            return Err(Error::InvalidStructure(format!("entries sum to {sum:e}, expected 0")));
        }
        Ok(Self { gamma })
    }

    /// Two-periodic structure `(ξ, −ξ)` of the alternating mesh. Kept at
    /// period two even for `ξ = 0`.
    pub fn alternating(xi: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&xi) {
            return Err(Error::XiOutOfRange(xi));
        }
        Self::new(vec![xi, -xi])
    }

    pub fn uniform(m: usize) -> Self {
        Self {
            gamma: vec![0.0; m.max(1)],
        }
    }

    pub fn period(&self) -> usize {
        self.gamma.len()
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    /// Normalised step `h_{j+1/2}/h_av` for any integer `j`.
    #[inline]
    pub fn step(&self, j: isize) -> f64 {
        1.0 + self.gamma[j.rem_euclid(self.gamma.len() as isize) as usize]
    }

    /// `|γ| = max_j |γ_j|`.
    pub fn magnitude(&self) -> f64 {
        self.gamma.iter().map(|g| g.abs()).fold(0.0, f64::max)
    }

    /// Node positions of the unit-`h_av` mesh with `x_0 = 0`, for indices
    /// `0..=m`.
    pub fn unit_nodes(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.gamma.len() + 1);
        x.push(0.0);
        let mut acc = 0.0;
        for g in &self.gamma {
            acc += 1.0 + g;
            x.push(acc);
        }
        x
    }
}

/// JSON form of a mesh: `{"steps": [...], "offset": 0.0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshSpec {
    pub steps: Vec<f64>,
    #[serde(default)]
    pub offset: f64,
}

/// An `N`-node 2π-periodic mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicMesh {
    steps: Vec<f64>,
    offset: f64,
    prefix: Vec<f64>,
    period: usize,
    rescaled: bool,
}

impl PeriodicMesh {
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroSize);
        }
        Ok(Self::build(vec![TWO_PI / n as f64; n], 0.0, false))
    }

    /// Mesh with steps alternating `(1+ξ)h_av`, `(1−ξ)h_av`, starting at
    /// `x_0 = 0`.
    pub fn alternating(n: usize, xi: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroSize);
        }
        if n % 2 != 0 {
            return Err(Error::OddN(n));
        }
        if !(0.0..1.0).contains(&xi) {
            return Err(Error::XiOutOfRange(xi));
        }
        let h = TWO_PI / n as f64;
        let steps = (0..n)
            .map(|j| if j % 2 == 0 { (1.0 + xi) * h } else { (1.0 - xi) * h })
            .collect();
        Ok(Self::build(steps, 0.0, false))
    }

    /// Mesh with `k` periods of the given structure.
    pub fn from_structure(structure: &MeshStructure, periods: usize) -> Result<Self> {
        if periods == 0 {
            return Err(Error::ZeroSize);
        }
        let steps: Vec<f64> = (0..periods)
            .flat_map(|_| structure.gamma().iter().map(|g| 1.0 + g))
            .collect();
        Self::from_steps(&steps, 0.0)
    }

    /// Ingests arbitrary positive steps, rescaling them to sum to 2π.
    pub fn from_steps(steps: &[f64], offset: f64) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some((index, &value)) = steps.iter().enumerate().find(|(_, s)| !(**s > 0.0) || !s.is_finite()) {
            return Err(Error::NonPositiveStep { index, value });
        }
        let total: f64 = steps.iter().sum();
        let factor = TWO_PI / total;
        let rescaled = ((total - TWO_PI) / TWO_PI).abs() > 1e-12;
        let steps = if rescaled {
            steps.iter().map(|s| s * factor).collect()
        } else {
            steps.to_vec()
        };
        Ok(Self::build(steps, offset, rescaled))
    }

    pub fn from_spec(spec: &MeshSpec) -> Result<Self> {
        Self::from_steps(&spec.steps, spec.offset)
    }

    pub fn to_spec(&self) -> MeshSpec {
        MeshSpec {
            steps: self.steps.clone(),
            offset: self.offset,
        }
    }

    fn build(steps: Vec<f64>, offset: f64, rescaled: bool) -> Self {
        let period = detect_period(&steps);
        let mut prefix = Vec::with_capacity(steps.len() + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for s in &steps {
            acc += s;
            prefix.push(acc);
        }
        Self {
            steps,
            offset,
            prefix,
            period,
            rescaled,
        }
    }

    #[inline]
    pub fn n_nodes(&self) -> usize {
        self.steps.len()
    }

    pub fn steps(&self) -> &[f64] {
        &self.steps
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn period(&self) -> usize {
        self.period
    }

    /// True if the input steps had to be rescaled to sum to 2π.
    pub fn was_rescaled(&self) -> bool {
        self.rescaled
    }

    pub fn h_av(&self) -> f64 {
        TWO_PI / self.n_nodes() as f64
    }

    pub fn h_min(&self) -> f64 {
        self.steps.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn h_max(&self) -> f64 {
        self.steps.iter().copied().fold(0.0, f64::max)
    }

    /// Step `h_{j+1/2}` for any integer `j`.
    #[inline]
    pub fn step(&self, j: isize) -> f64 {
        self.steps[j.rem_euclid(self.n_nodes() as isize) as usize]
    }

    /// Node `x_j` for any integer `j`, using `x_{j+N} = x_j + 2π`.
    #[inline]
    pub fn node(&self, j: isize) -> f64 {
        let n = self.n_nodes() as isize;
        let wraps = j.div_euclid(n);
        let r = j.rem_euclid(n) as usize;
        self.offset + wraps as f64 * TWO_PI + self.prefix[r]
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_nodes() as isize).map(|j| self.node(j)).collect()
    }

    /// Mesh structure `γ` over the detected period.
    pub fn structure(&self) -> MeshStructure {
        let h = self.h_av();
        let mut gamma: Vec<f64> = self.steps[..self.period].iter().map(|s| s / h - 1.0).collect();
        // Remove round-off so the zero-sum invariant holds exactly enough.
        let mean = gamma.iter().sum::<f64>() / gamma.len() as f64;
        for g in &mut gamma {
            *g -= mean;
        }
        MeshStructure { gamma }
    }

    /// Local steps `(h_{j−S+1/2}, …, h_{j+S−1/2})` feeding row `j` of a
    /// stencil of half-width `S`.
    pub fn local_steps(&self, j: isize, half_width: usize) -> Vec<f64> {
        let s = half_width as isize;
        (j - s..j + s).map(|i| self.step(i)).collect()
    }
}

/// Minimal divisor `d` of `N` such that the steps are `d`-periodic.
fn detect_period(steps: &[f64]) -> usize {
    let n = steps.len();
    let scale = steps.iter().copied().fold(0.0, f64::max);
    (1..=n)
        .filter(|d| n % d == 0)
        .find(|&d| (d..n).all(|j| (steps[j] - steps[j % d]).abs() <= PERIOD_TOL * scale))
        .unwrap_or(n)
}

/// Values of a mesh function, one complex number per cell or node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MeshFunction {
    pub values: Vec<Complex64>,
}

impl MeshFunction {
    pub fn new(values: Vec<Complex64>) -> Self {
        Self { values }
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self {
            values: values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `‖f‖_av = sqrt((1/N) Σ |f_j|²)`.
pub fn norm_av(f: &MeshFunction) -> f64 {
    if f.is_empty() {
        return 0.0;
    }
    (f.values.iter().map(|z| z.norm_sqr()).sum::<f64>() / f.len() as f64).sqrt()
}

/// Quadrature weights attached to mesh functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weights {
    /// `w_j = h_{j+1/2}`.
    Cell,
    /// `w_j = (h_{j+1/2} + h_{j−1/2})/2`.
    Node,
}

impl Weights {
    pub fn weight(self, mesh: &PeriodicMesh, j: isize) -> f64 {
        match self {
            Weights::Cell => mesh.step(j),
            Weights::Node => 0.5 * (mesh.step(j) + mesh.step(j - 1)),
        }
    }
}

/// `(1/√(2π)) (Σ w_j |u_j − ref_j|²)^{1/2}`.
pub fn weighted_error_norm(
    u: &MeshFunction,
    reference: &MeshFunction,
    mesh: &PeriodicMesh,
    weights: Weights,
) -> Result<f64> {
    let n = mesh.n_nodes();
    for f in [u, reference] {
        if f.len() != n {
            return Err(Error::MeshMismatch {
                left: f.len(),
                right: n,
            });
        }
    }
    let sum: f64 = (0..n)
        .map(|j| weights.weight(mesh, j as isize) * (u.values[j] - reference.values[j]).norm_sqr())
        .sum();
    Ok((sum / TWO_PI).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn uniform_mesh() {
        let m = PeriodicMesh::uniform(20).unwrap();
        assert!((m.h_av() - TWO_PI / 20.0).abs() < 1e-15);
        assert_eq!(m.period(), 1);
        let one = PeriodicMesh::uniform(1).unwrap();
        assert!((one.steps()[0] - TWO_PI).abs() < 1e-15);
        assert_eq!(PeriodicMesh::uniform(8).unwrap().structure().gamma(), &[0.0]);
        assert_eq!(PeriodicMesh::uniform(0).unwrap_err(), Error::ZeroSize);
    }

    #[test]
    fn alternating_mesh_ratios() {
        let m = PeriodicMesh::alternating(20, 0.5).unwrap();
        assert!((m.h_max() / m.h_min() - 3.0).abs() < 1e-12);
        assert_eq!(m.period(), 2);
        let g = m.structure();
        assert!((g.gamma()[0] - 0.5).abs() < 1e-14 && (g.gamma()[1] + 0.5).abs() < 1e-14);
        let m = PeriodicMesh::alternating(20, 1.0 / 3.0).unwrap();
        assert!((m.h_max() / m.h_min() - 2.0).abs() < 1e-12);
        assert_eq!(PeriodicMesh::alternating(6, 0.0).unwrap().period(), 1);
        assert_eq!(PeriodicMesh::alternating(7, 0.1).unwrap_err(), Error::OddN(7));
        assert_eq!(PeriodicMesh::alternating(8, 1.0).unwrap_err(), Error::XiOutOfRange(1.0));
    }

    #[test]
    fn alternating_nodes_follow_parity_rule() {
        let xi = 0.3;
        let m = PeriodicMesh::alternating(10, xi).unwrap();
        let h = m.h_av();
        for k in 0..10isize {
            let expected = if k % 2 == 0 { k as f64 * h } else { (k as f64 + xi) * h };
            assert!((m.node(k) - expected).abs() < 1e-13);
        }
        assert!((m.node(10) - TWO_PI).abs() < 1e-13);
        assert!((m.node(-1) + (1.0 - xi) * h).abs() < 1e-13);
    }

    #[test]
    fn period_detection_from_steps() {
        let q = PI / 2.0;
        let m = PeriodicMesh::from_steps(&[q, q, q, q], 0.0).unwrap();
        assert_eq!(m.period(), 1);
        assert!(!m.was_rescaled());
        let m = PeriodicMesh::from_steps(&[2.0, 1.0, 2.0, 1.0], 0.0).unwrap();
        assert_eq!(m.period(), 2);
        assert!(m.was_rescaled());
        let g = m.structure();
        assert!((g.gamma()[0] - 1.0 / 3.0).abs() < 1e-14);
        assert!((g.gamma()[1] + 1.0 / 3.0).abs() < 1e-14);
        let m = PeriodicMesh::from_steps(&[3.0, 2.0, 1.0, 3.0, 2.0, 1.0], 0.0).unwrap();
        assert_eq!(m.period(), 3);
    }

    #[test]
    fn from_steps_errors() {
        assert_eq!(PeriodicMesh::from_steps(&[], 0.0).unwrap_err(), Error::EmptyInput);
        assert_eq!(
            PeriodicMesh::from_steps(&[1.0, 0.0], 0.0).unwrap_err(),
            Error::NonPositiveStep { index: 1, value: 0.0 }
        );
    }

    #[test]
    fn norms() {
        let ones = MeshFunction::from_real(&[1.0; 7]);
        assert!((norm_av(&ones) - 1.0).abs() < 1e-15);
        assert!((norm_av(&MeshFunction::from_real(&[1.0, 0.0, 0.0, 0.0])) - 0.5).abs() < 1e-15);
        let waves = MeshFunction::new((0..9).map(|j| Complex64::from_polar(1.0, j as f64)).collect());
        assert!((norm_av(&waves) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn weighted_norm_cases() {
        let mesh = PeriodicMesh::alternating(8, 0.4).unwrap();
        let u = MeshFunction::from_real(&[0.3; 8]);
        assert_eq!(weighted_error_norm(&u, &u, &mesh, Weights::Cell).unwrap(), 0.0);

        let uni = PeriodicMesh::uniform(6).unwrap();
        let a = MeshFunction::from_real(&[1.0, -2.0, 0.5, 0.0, 3.0, 1.0]);
        let z = MeshFunction::from_real(&[0.0; 6]);
        for w in [Weights::Cell, Weights::Node] {
            let e = weighted_error_norm(&a, &z, &uni, w).unwrap();
            assert!((e - norm_av(&a)).abs() < 1e-14);
        }

        let two = PeriodicMesh::from_steps(&[PI, PI], 0.0).unwrap();
        let e = weighted_error_norm(
            &MeshFunction::from_real(&[1.0, 0.0]),
            &MeshFunction::from_real(&[0.0, 0.0]),
            &two,
            Weights::Cell,
        )
        .unwrap();
        assert!((e - 0.5f64.sqrt()).abs() < 1e-15);

        let short = MeshFunction::from_real(&[0.0; 3]);
        assert!(matches!(
            weighted_error_norm(&short, &u, &mesh, Weights::Cell),
            Err(Error::MeshMismatch { .. })
        ));
    }

    #[test]
    fn structure_validation() {
        assert!(MeshStructure::new(vec![0.2, -0.1]).is_err());
        assert!(MeshStructure::new(vec![1.5, -1.5]).is_err());
        assert!(MeshStructure::new(vec![0.3, -0.1, -0.2]).is_ok());
    }

    fn periodic_steps() -> impl Strategy<Value = Vec<f64>> {
        (1usize..5, 1usize..5).prop_flat_map(|(m, reps)| {
            prop::collection::vec(0.2f64..2.0, m)
                .prop_map(move |base| base.iter().cycle().take(base.len() * reps).copied().collect())
        })
    }

    proptest! {
        #[test]
        fn period_and_structure_are_scale_invariant(steps in periodic_steps(), alpha in 0.1f64..10.0) {
            let a = PeriodicMesh::from_steps(&steps, 0.0).unwrap();
            let scaled: Vec<f64> = steps.iter().map(|s| s * alpha).collect();
            let b = PeriodicMesh::from_steps(&scaled, 0.0).unwrap();
            prop_assert_eq!(a.period(), b.period());
            for (x, y) in a.structure().gamma().iter().zip(b.structure().gamma()) {
                prop_assert!((x - y).abs() < 1e-12);
            }
            let sum: f64 = a.structure().gamma().iter().sum();
            prop_assert!(sum.abs() < 1e-12);
            let again = PeriodicMesh::from_steps(a.steps(), 0.0).unwrap();
            prop_assert_eq!(again.period(), a.period());
        }

        #[test]
        fn alternating_round_trips_through_steps(half in 1usize..20, xi in 0.0f64..0.95) {
            let a = PeriodicMesh::alternating(2 * half, xi).unwrap();
            let b = PeriodicMesh::from_spec(&a.to_spec()).unwrap();
            prop_assert_eq!(a.period(), b.period());
            prop_assert_eq!(a.structure(), b.structure());
        }
    }
}
