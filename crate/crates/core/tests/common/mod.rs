//! Independent reference computations for the integration tests. Nothing
//! here calls the library's quadrature, optimizers or estimators.

#![allow(dead_code)]

use std::f64::consts::PI;

use modal_lab::config::DensitySpec;
use modal_lab::Family;

// 8-point Gauss-Legendre rule on [-1, 1].
const GL_X: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_W: [f64; 4] = [
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Composite 8-point Gauss-Legendre over `panels` equal pieces.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let c = a + (p as f64 + 0.5) * h;
        let half = 0.5 * h;
        let mut s = 0.0;
        for k in 0..4 {
            s += GL_W[k] * (f(c - half * GL_X[k]) + f(c + half * GL_X[k]));
        }
        total += s * half;
    }
    total
}

/// Same rule, split at the given interior points.
pub fn gauss_legendre_split<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cuts: &[f64], panels: usize) -> f64 {
    let mut pts = vec![a, b];
    pts.extend(cuts.iter().copied().filter(|c| *c > a && *c < b));
    pts.sort_by(f64::total_cmp);
    pts.windows(2).map(|w| gauss_legendre(&f, w[0], w[1], panels)).sum()
}

/// `log ∫_{-ε}^{ε} exp(-1/(ε² - x²)) dx`, integrated in the scaled form
/// `exp(1/ε² - 1/(ε² - x²))` to avoid underflow.
pub fn bump_log_norm(eps: f64) -> f64 {
    let e2 = eps * eps;
    let scaled = gauss_legendre(
        |x| {
            let d = e2 - x * x;
            if d <= 0.0 {
                0.0
            } else {
                (1.0 / e2 - 1.0 / d).exp()
            }
        },
        -eps,
        eps,
        2000,
    );
    scaled.ln() - 1.0 / e2
}

/// A density evaluated from its text description alone.
pub struct OracleDensity {
    pub family: Family,
    pub parts: Vec<(f64, f64, f64)>, // (weight, center, width)
    log_norms: Vec<f64>,
}

impl OracleDensity {
    pub fn new(spec: &DensitySpec) -> Self {
        let parts: Vec<(f64, f64, f64)> = spec
            .weights
            .iter()
            .zip(&spec.components)
            .map(|(w, c)| {
                let width = match spec.family {
                    Family::Bump => c.half_width.unwrap(),
                    Family::Gaussian if c.unit_height => 1.0 / (2.0 * PI).sqrt(),
                    Family::Gaussian => c.sigma.unwrap(),
                };
                (*w, c.center, width)
            })
            .collect();
        let log_norms = parts
            .iter()
            .map(|(_, _, s)| match spec.family {
                Family::Bump => bump_log_norm(*s),
                Family::Gaussian => (s * (2.0 * PI).sqrt()).ln(),
            })
            .collect();
        Self {
            family: spec.family,
            parts,
            log_norms,
        }
    }

    pub fn component_pdf(&self, i: usize, x: f64) -> f64 {
        let (_, c, s) = self.parts[i];
        let u = x - c;
        match self.family {
            Family::Bump => {
                let d = s * s - u * u;
                if d <= 0.0 {
                    0.0
                } else {
                    (-1.0 / d - self.log_norms[i]).exp()
                }
            }
            Family::Gaussian => (-0.5 * (u / s).powi(2) - self.log_norms[i]).exp(),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        (0..self.parts.len())
            .map(|i| self.parts[i].0 * self.component_pdf(i, x))
            .sum()
    }

    pub fn component_support(&self, i: usize) -> (f64, f64) {
        let (_, c, s) = self.parts[i];
        match self.family {
            Family::Bump => (c - s, c + s),
            Family::Gaussian => (c - 12.0 * s, c + 12.0 * s),
        }
    }

    pub fn support(&self) -> (f64, f64) {
        (0..self.parts.len())
            .map(|i| self.component_support(i))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |a, b| (a.0.min(b.0), a.1.max(b.1)))
    }

    /// `∫ f·p`, component by component, split at `cuts`.
    pub fn expect<F: Fn(f64) -> f64>(&self, f: F, cuts: &[f64]) -> f64 {
        (0..self.parts.len())
            .filter(|&i| self.parts[i].0 != 0.0)
            .map(|i| {
                let (a, b) = self.component_support(i);
                self.parts[i].0
                    * gauss_legendre_split(|y| f(y) * self.component_pdf(i, y), a, b, cuts, 400)
            })
            .sum()
    }

    /// Grid argmax with `n` points over the support.
    pub fn grid_mode(&self, n: usize) -> f64 {
        let (lo, hi) = self.support();
        let mut best = (lo, f64::NEG_INFINITY);
        for k in 0..n {
            let x = lo + (hi - lo) * k as f64 / (n - 1) as f64;
            let v = self.pdf(x);
            if v > best.1 {
                best = (x, v);
            }
        }
        best.0
    }
}

/// Lowest maximizer of the closed-window count, by checking every window
/// whose right edge sits on a sample point.
pub fn brute_force_modal(values: &[f64], eps: f64) -> (f64, usize) {
    let mut best = (f64::INFINITY, 0usize);
    for &right in values {
        let count = values
            .iter()
            .filter(|&&y| y <= right && right - y <= 2.0 * eps)
            .count();
        let x = right - eps;
        if count > best.1 || (count == best.1 && x < best.0) {
            best = (x, count);
        }
    }
    best
}

/// Variance of a Gaussian mixture from its parameters.
pub fn gaussian_mixture_variance(parts: &[(f64, f64, f64)]) -> f64 {
    let total: f64 = parts.iter().map(|p| p.0).sum();
    let mean: f64 = parts.iter().map(|(w, m, _)| w * m).sum::<f64>() / total;
    let second: f64 = parts.iter().map(|(w, m, s)| w * (s * s + m * m)).sum::<f64>() / total;
    second - mean * mean
}
