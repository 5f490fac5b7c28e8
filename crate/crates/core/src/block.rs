//! Block form of a scheme on a period-`m` mesh.
//!
//! Grouping unknowns as `U_η = (u_{ηm}, …, u_{ηm+m−1})` turns the scheme into
//! `U_η' + Σ_ζ L_ζ U_{η+ζ} = 0` with real `m × m` blocks
//! `(L_ζ)_{jk} = a_{ζm+k−j}`, evaluated on steps normalised by `h_av`.
//! Its symbol is `L(γ, φ) = Σ_ζ L_ζ e^{iφmζ}`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::ComplexMatrix;
use crate::mesh::{MeshStructure, PeriodicMesh};
use crate::scheme::Scheme;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSymbol {
    scheme: String,
    gamma: MeshStructure,
    zeta_min: isize,
    /// `L_ζ` for `ζ = zeta_min, zeta_min+1, …`.
    matrices: Vec<ComplexMatrix>,
}

impl BlockSymbol {
    pub fn new(scheme: &Scheme, gamma: &MeshStructure) -> Result<Self> {
        let m = gamma.period() as isize;
        let s = scheme.half_width() as isize;
        let zeta_min = (-s).div_euclid(m);
        let zeta_max = (m - 1 + s).div_euclid(m);
        let mut matrices = vec![ComplexMatrix::zeros(m as usize, m as usize); (zeta_max - zeta_min + 1) as usize];
        for j in 0..m {
            let steps: Vec<f64> = (j - s..j + s).map(|i| gamma.step(i)).collect();
            let a = scheme.coefficients(&steps)?;
            for (idx, &ak) in a.iter().enumerate() {
                if ak == 0.0 {
                    continue;
                }
                let c = j + idx as isize - s;
                let zeta = c.div_euclid(m);
                let col = c.rem_euclid(m) as usize;
                matrices[(zeta - zeta_min) as usize][(j as usize, col)] += Complex64::new(ak, 0.0);
            }
        }
        Ok(Self {
            scheme: scheme.name(),
            gamma: gamma.clone(),
            zeta_min,
            matrices,
        })
    }

    /// Block symbol of `scheme` on the detected period of `mesh`.
    pub fn from_mesh(scheme: &Scheme, mesh: &PeriodicMesh) -> Result<Self> {
        Self::new(scheme, &mesh.structure())
    }

    pub fn scheme_name(&self) -> &str {
        &self.scheme
    }

    pub fn gamma(&self) -> &MeshStructure {
        &self.gamma
    }

    pub fn period(&self) -> usize {
        self.gamma.period()
    }

    /// Range `ζ_min..=ζ_max` of stored blocks.
    pub fn zeta_range(&self) -> std::ops::RangeInclusive<isize> {
        self.zeta_min..=self.zeta_min + self.matrices.len() as isize - 1
    }

    /// `L_ζ`; zero outside the stored range.
    pub fn block(&self, zeta: isize) -> ComplexMatrix {
        let m = self.period();
        usize::try_from(zeta - self.zeta_min)
            .ok()
            .and_then(|i| self.matrices.get(i).cloned())
            .unwrap_or_else(|| ComplexMatrix::zeros(m, m))
    }

    /// `(ζ, L_ζ)` pairs over the stored range.
    pub fn blocks(&self) -> impl Iterator<Item = (isize, &ComplexMatrix)> {
        self.matrices
            .iter()
            .enumerate()
            .map(move |(i, b)| (self.zeta_min + i as isize, b))
    }

    /// `L(γ, φ) = Σ_ζ L_ζ e^{iφmζ}`.
    pub fn symbol(&self, phi: f64) -> ComplexMatrix {
        let m = self.period();
        let mut out = ComplexMatrix::zeros(m, m);
        for (zeta, b) in self.blocks() {
            let w = Complex64::from_polar(1.0, phi * (m as isize * zeta) as f64);
            out = &out + &b.scale(w);
        }
        out
    }

    /// CSV dump: one row per `φ` with real and imaginary parts of each entry
    /// of `L(γ, φ)`, row-major.
    pub fn symbol_csv(&self, phis: &[f64]) -> String {
        let m = self.period();
        let mut out = String::from("phi");
        for j in 0..m {
            for k in 0..m {
                let _ = write!(out, ",re_{j}_{k},im_{j}_{k}");
            }
        }
        out.push('\n');
        for &phi in phis {
            let l = self.symbol(phi);
            let _ = write!(out, "{phi:?}");
            for z in l.entries() {
                let _ = write!(out, ",{:?},{:?}", z.re, z.im);
            }
            out.push('\n');
        }
        out
    }
}

/// `(S_m(φ))_{jk} = m^{−1/2} exp(2πijk/m + iφj)`.
pub fn fourier_basis(m: usize, phi: f64) -> ComplexMatrix {
    let norm = 1.0 / (m as f64).sqrt();
    ComplexMatrix::from_fn(m, m, |j, k| {
        Complex64::from_polar(norm, 2.0 * PI * (j * k) as f64 / m as f64 + phi * j as f64)
    })
}

/// A mesh function grouped into blocks of `m` consecutive values.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockFunction {
    m: usize,
    blocks: Vec<Vec<Complex64>>,
}

impl BlockFunction {
    /// Splits `values` into blocks of length `m`.
    pub fn from_values(values: &[Complex64], m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::ZeroSize);
        }
        if values.is_empty() || values.len() % m != 0 {
            return Err(Error::SizeNotDivisible {
                len: values.len(),
                block: m,
            });
        }
        Ok(Self {
            m,
            blocks: values.chunks(m).map(<[Complex64]>::to_vec).collect(),
        })
    }

    pub fn period(&self) -> usize {
        self.m
    }

    pub fn blocks(&self) -> &[Vec<Complex64>] {
        &self.blocks
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn values(&self) -> Vec<Complex64> {
        self.blocks.concat()
    }

    /// Frequencies `φ_k = 2πk/N`, `k = 0..N/m`.
    pub fn frequencies(&self) -> Vec<f64> {
        let n = (self.m * self.blocks.len()) as f64;
        (0..self.blocks.len()).map(|k| 2.0 * PI * k as f64 / n).collect()
    }

    /// `V̂(φ_k) = (m/N) Σ_η e^{−imφ_kη} V_η`.
    pub fn block_dft(&self) -> Vec<Vec<Complex64>> {
        let count = self.blocks.len();
        (0..count)
            .map(|k| {
                let mut acc = vec![Complex64::new(0.0, 0.0); self.m];
                for (eta, v) in self.blocks.iter().enumerate() {
                    let w = Complex64::from_polar(1.0, -2.0 * PI * ((k * eta) % count) as f64 / count as f64);
                    for (a, x) in acc.iter_mut().zip(v) {
                        *a += w * x;
                    }
                }
                acc.iter().map(|a| a / count as f64).collect()
            })
            .collect()
    }

    /// Inverse of [`block_dft`](Self::block_dft).
    pub fn inverse_dft(spectrum: &[Vec<Complex64>]) -> Result<Self> {
        let count = spectrum.len();
        let m = spectrum.first().map_or(0, Vec::len);
        if count == 0 || m == 0 {
            return Err(Error::EmptyInput);
        }
        if spectrum.iter().any(|v| v.len() != m) {
            return Err(Error::DimensionMismatch("ragged spectrum".into()));
        }
        let blocks = (0..count)
            .map(|eta| {
                let mut acc = vec![Complex64::new(0.0, 0.0); m];
                for (k, v) in spectrum.iter().enumerate() {
                    let w = Complex64::from_polar(1.0, 2.0 * PI * ((k * eta) % count) as f64 / count as f64);
                    for (a, x) in acc.iter_mut().zip(v) {
                        *a += w * x;
                    }
                }
                acc
            })
            .collect();
        Ok(Self { m, blocks })
    }
}
