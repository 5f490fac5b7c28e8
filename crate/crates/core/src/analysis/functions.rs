//! Smooth test functions with closed-form derivatives and cell averages.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A smooth function of one real variable with complex values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SmoothFn {
    /// `Σ_n c_n (x − center)^n`.
    Polynomial { coeffs: Vec<f64>, center: f64 },
    /// `sin(kx)`.
    Sin { k: f64 },
    /// `cos(kx)`.
    Cos { k: f64 },
    /// `e^{iαx}`.
    Exp { alpha: f64 },
}

impl SmoothFn {
    /// `(x − center)^n / n!`.
    pub fn scaled_monomial(n: usize, center: f64) -> Self {
        let mut coeffs = vec![0.0; n + 1];
        coeffs[n] = 1.0 / factorial(n);
        SmoothFn::Polynomial { coeffs, center }
    }

    /// `(x − center)^n`.
    pub fn monomial(n: usize, center: f64) -> Self {
        let mut coeffs = vec![0.0; n + 1];
        coeffs[n] = 1.0;
        SmoothFn::Polynomial { coeffs, center }
    }

    pub fn sin() -> Self {
        SmoothFn::Sin { k: 1.0 }
    }

    /// Parses `"sin"`, `"cos"`, `"sin<k>"` or `"cos<k>"`.
    pub fn by_name(name: &str) -> Option<Self> {
        let lower = name.trim().to_ascii_lowercase();
        let (head, tail) = lower.split_at(lower.len().min(3));
        let k = if tail.is_empty() {
            1.0
        } else {
            tail.parse::<f64>().ok()?
        };
        match head {
            "sin" => Some(SmoothFn::Sin { k }),
            "cos" => Some(SmoothFn::Cos { k }),
            _ => None,
        }
    }

    pub fn value(&self, x: f64) -> Complex64 {
        match self {
            SmoothFn::Polynomial { coeffs, center } => {
                let t = x - center;
                Complex64::new(coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c), 0.0)
            }
            SmoothFn::Sin { k } => Complex64::new((k * x).sin(), 0.0),
            SmoothFn::Cos { k } => Complex64::new((k * x).cos(), 0.0),
            SmoothFn::Exp { alpha } => Complex64::from_polar(1.0, alpha * x),
        }
    }

    /// Derivative of order `n`, written as `factor · base`.
    pub fn derivative(&self, n: usize) -> Derivative {
        match self {
            SmoothFn::Polynomial { coeffs, center } => {
                let mut c = coeffs.clone();
                for _ in 0..n {
                    if c.len() <= 1 {
                        c = vec![0.0];
                        break;
                    }
                    c = c.iter().enumerate().skip(1).map(|(i, v)| i as f64 * v).collect();
                }
                Derivative {
                    factor: Complex64::new(1.0, 0.0),
                    base: SmoothFn::Polynomial {
                        coeffs: c,
                        center: *center,
                    },
                }
            }
            SmoothFn::Sin { k } | SmoothFn::Cos { k } => {
                // sin^{(n)}(kx) = k^n sin(kx + nπ/2).
                let shift = match self {
                    SmoothFn::Sin { .. } => n % 4,
                    _ => (n + 1) % 4,
                };
                let kn = k.powi(n as i32);
                let (sign, base) = match shift {
                    0 => (1.0, SmoothFn::Sin { k: *k }),
                    1 => (1.0, SmoothFn::Cos { k: *k }),
                    2 => (-1.0, SmoothFn::Sin { k: *k }),
                    _ => (-1.0, SmoothFn::Cos { k: *k }),
                };
                Derivative {
                    factor: Complex64::new(sign * kn, 0.0),
                    base,
                }
            }
            SmoothFn::Exp { alpha } => Derivative {
                factor: Complex64::new(0.0, *alpha).powu(n as u32),
                base: self.clone(),
            },
        }
    }

    /// `(1/(b−a)) ∫_a^b f`.
    pub fn cell_average(&self, a: f64, b: f64) -> Complex64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        match self {
            SmoothFn::Polynomial { coeffs, .. } => {
                let n = coeffs.len() / 2 + 1;
                gauss_legendre_average(|x| self.value(x), a, b, n)
            }
            SmoothFn::Sin { k } => Complex64::new((k * mid).sin() * sinc(k * half), 0.0),
            SmoothFn::Cos { k } => Complex64::new((k * mid).cos() * sinc(k * half), 0.0),
            SmoothFn::Exp { alpha } => Complex64::from_polar(sinc(alpha * half), alpha * mid),
        }
    }
}

/// `factor · base`, the result of differentiating a [`SmoothFn`].
#[derive(Debug, Clone, PartialEq)]
pub struct Derivative {
    pub factor: Complex64,
    pub base: SmoothFn,
}

impl Derivative {
    pub fn value(&self, x: f64) -> Complex64 {
        self.factor * self.base.value(x)
    }

    pub fn cell_average(&self, a: f64, b: f64) -> Complex64 {
        self.factor * self.base.cell_average(a, b)
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `P_n(x)` and `P_n'(x)`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Average of `f` over `[a, b]` by `n`-point Gauss–Legendre quadrature.
pub fn gauss_legendre_average(f: impl Fn(f64) -> Complex64, a: f64, b: f64, n: usize) -> Complex64 {
    let (x, w) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    x.iter()
        .zip(&w)
        .map(|(&t, &wt)| f(mid + half * t) * wt)
        .sum::<Complex64>()
        * 0.5
}
