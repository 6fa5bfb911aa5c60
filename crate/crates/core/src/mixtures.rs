//! Finite mixtures of bump functions and Gaussians.
//!
//! A [`MixtureDensity`] is homogeneous: all of its components belong to one
//! [`Family`]. Weights need not sum to one; mode-type functionals are
//! invariant under positive scaling and are defined for unnormalized
//! mixtures, while distribution-function based operations require a
//! normalized density.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::f64::consts::{PI, SQRT_2};
use std::sync::{Arc, Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::optimize::{bisect_sign, golden_max, linspace, SignRoot};
use crate::quadrature;
use crate::simulation::SampleBatch;

/// Two local maxima whose density values differ by less than this relative
/// amount are considered tied.
pub const UNIQUENESS_TOL: f64 = 1e-9;
/// Gaussian components are integrated over `center ± GAUSSIAN_TAIL_SIGMAS·σ`.
pub const GAUSSIAN_TAIL_SIGMAS: f64 = 10.0;
/// Number of cells in the cached bump distribution-function table.
pub const BUMP_TABLE_CELLS: usize = 4096;
/// Tolerance on `|Σ w - 1|` for a mixture to count as normalized.
pub const NORMALIZATION_TOL: f64 = 1e-12;

const MODE_XTOL: f64 = 1e-10;
const BALL_GRID: usize = 65;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Bump,
    Gaussian,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::Bump => "bump",
            Family::Gaussian => "gaussian",
        })
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bump" => Ok(Family::Bump),
            "gaussian" => Ok(Family::Gaussian),
            other => Err(domain(format!("unknown family {other:?}"))),
        }
    }
}

/// Standard normal distribution function.
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / SQRT_2)
}

/// The unnormalized bump profile `exp(1/ε² - 1/(ε² - u²))`, peak value 1.
fn scaled_bump(u: f64, eps: f64) -> f64 {
    let e2 = eps * eps;
    let d = e2 - u * u;
    if d <= 0.0 {
        0.0
    } else {
        (-(u * u) / (e2 * d)).exp()
    }
}

/// Shared per-half-width data of the bump family: the normalizing constant
/// and a distribution-function table on `[-ε, ε]`.
#[derive(Debug)]
pub struct BumpProfile {
    half_width: f64,
    /// `∫ exp(1/ε² - 1/(ε² - u²)) du`, i.e. `c_ε · e^{1/ε²}`.
    scaled_norm: f64,
    cdf_table: Vec<f64>,
}

impl BumpProfile {
    fn build(half_width: f64) -> Result<Self> {
        let eps = half_width;
        let half = quadrature::integrate(|u| scaled_bump(u, eps), 0.0, eps)?;
        let scaled_norm = 2.0 * half;
        let nodes = linspace(-eps, eps, BUMP_TABLE_CELLS + 1);
        let mut cdf_table = Vec::with_capacity(nodes.len());
        let mut acc = 0.0;
        cdf_table.push(0.0);
        for w in nodes.windows(2) {
            let cell = quadrature::integrate_with(
                |u| scaled_bump(u, eps),
                w[0],
                w[1],
                1e-15 * scaled_norm,
                1e-14,
            )?;
            acc += cell.value;
            cdf_table.push(acc);
        }
        for v in &mut cdf_table {
            *v /= acc;
        }
        Ok(Self {
            half_width,
            scaled_norm,
            cdf_table,
        })
    }

    /// Shared, cached profile for `half_width`.
    pub fn get(half_width: f64) -> Result<Arc<Self>> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(domain(format!(
                "bump half-width must be positive and finite, got {half_width}"
            )));
        }
        static CACHE: OnceLock<Mutex<HashMap<u64, Arc<BumpProfile>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(p) = cache.lock().unwrap().get(&half_width.to_bits()) {
            return Ok(Arc::clone(p));
        }
        let profile = Arc::new(Self::build(half_width)?);
        cache
            .lock()
            .unwrap()
            .entry(half_width.to_bits())
            .or_insert_with(|| Arc::clone(&profile));
        Ok(profile)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Natural logarithm of `c_ε`; finite even where `c_ε` underflows.
    pub fn log_norm_const(&self) -> f64 {
        self.scaled_norm.ln() - 1.0 / (self.half_width * self.half_width)
    }

    pub fn norm_const(&self) -> f64 {
        self.log_norm_const().exp()
    }

    /// Density of the centered bump at offset `u`.
    pub fn pdf(&self, u: f64) -> f64 {
        scaled_bump(u, self.half_width) / self.scaled_norm
    }

    pub fn log_pdf(&self, u: f64) -> f64 {
        let e2 = self.half_width * self.half_width;
        let d = e2 - u * u;
        if d <= 0.0 {
            f64::NEG_INFINITY
        } else {
            -(u * u) / (e2 * d) - self.scaled_norm.ln()
        }
    }

    pub fn pdf_derivative(&self, u: f64) -> f64 {
        let e2 = self.half_width * self.half_width;
        let d = e2 - u * u;
        if d <= 0.0 {
            0.0
        } else {
            self.pdf(u) * (-2.0 * u / (d * d))
        }
    }

    fn cell_width(&self) -> f64 {
        2.0 * self.half_width / BUMP_TABLE_CELLS as f64
    }

    // Cubic Hermite interpolation of the table using the exact density as slope.
    fn hermite(&self, k: usize, s: f64) -> f64 {
        let h = self.cell_width();
        let u0 = -self.half_width + h * k as f64;
        let (f0, f1) = (self.cdf_table[k], self.cdf_table[k + 1]);
        let (m0, m1) = (self.pdf(u0) * h, self.pdf(u0 + h) * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let v = (2.0 * s3 - 3.0 * s2 + 1.0) * f0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * f1
            + (s3 - s2) * m1;
        v.clamp(f0, f1)
    }

    /// Distribution function of the centered bump at offset `u`.
    pub fn cdf(&self, u: f64) -> f64 {
        let eps = self.half_width;
        if u <= -eps {
            return 0.0;
        }
        if u >= eps {
            return 1.0;
        }
        let pos = (u + eps) / self.cell_width();
        let k = (pos.floor() as usize).min(BUMP_TABLE_CELLS - 1);
        self.hermite(k, pos - k as f64)
    }

    /// Inverse distribution function on the table.
    pub fn quantile(&self, p: f64) -> f64 {
        let eps = self.half_width;
        if p <= 0.0 {
            return -eps;
        }
        if p >= 1.0 {
            return eps;
        }
        let k = self
            .cdf_table
            .partition_point(|&v| v <= p)
            .saturating_sub(1)
            .min(BUMP_TABLE_CELLS - 1);
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.hermite(k, mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        -eps + self.cell_width() * (k as f64 + 0.5 * (lo + hi))
    }
}

/// Normalizing constant `c_ε = ∫_{-ε}^{ε} exp(-1/(ε² - x²)) dx`.
pub fn bump_norm_const(half_width: f64) -> Result<f64> {
    Ok(BumpProfile::get(half_width)?.norm_const())
}

/// Normalized bump density of half-width `ε` centered at `center`.
#[derive(Debug, Clone)]
pub struct BumpComponent {
    center: f64,
    profile: Arc<BumpProfile>,
}

impl BumpComponent {
    pub fn new(center: f64, half_width: f64) -> Result<Self> {
        if !center.is_finite() {
            return Err(domain("bump center must be finite"));
        }
        Ok(Self {
            center,
            profile: BumpProfile::get(half_width)?,
        })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn half_width(&self) -> f64 {
        self.profile.half_width
    }

    pub fn profile(&self) -> &BumpProfile {
        &self.profile
    }
}

/// Normal density; with `unit_height` the variance is `1/(2π)` and the
/// density is evaluated as `exp(-π (x - center)²)`, so its peak is exactly 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianComponent {
    center: f64,
    sigma: f64,
    unit_height: bool,
}

impl GaussianComponent {
    pub fn new(center: f64, sigma: f64) -> Result<Self> {
        if !center.is_finite() {
            return Err(domain("gaussian center must be finite"));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(domain(format!("sigma must be positive, got {sigma}")));
        }
        Ok(Self {
            center,
            sigma,
            unit_height: false,
        })
    }

    pub fn unit_height(center: f64) -> Result<Self> {
        let mut g = Self::new(center, unit_height_sigma())?;
        g.unit_height = true;
        Ok(g)
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn is_unit_height(&self) -> bool {
        self.unit_height
    }
}

/// Standard deviation `1/√(2π)` of a unit-height Gaussian.
pub fn unit_height_sigma() -> f64 {
    1.0 / (2.0 * PI).sqrt()
}

#[derive(Debug, Clone)]
pub enum Component {
    Bump(BumpComponent),
    Gaussian(GaussianComponent),
}

impl Component {
    pub fn family(&self) -> Family {
        match self {
            Component::Bump(_) => Family::Bump,
            Component::Gaussian(_) => Family::Gaussian,
        }
    }

    pub fn center(&self) -> f64 {
        match self {
            Component::Bump(b) => b.center,
            Component::Gaussian(g) => g.center,
        }
    }

    /// Half-width for bumps, standard deviation for Gaussians.
    pub fn scale(&self) -> f64 {
        match self {
            Component::Bump(b) => b.half_width(),
            Component::Gaussian(g) => g.sigma,
        }
    }

    /// Interval outside which the component has (numerically) no mass.
    pub fn support(&self) -> (f64, f64) {
        let (c, s) = (self.center(), self.scale());
        match self {
            Component::Bump(_) => (c - s, c + s),
            Component::Gaussian(_) => (c - GAUSSIAN_TAIL_SIGMAS * s, c + GAUSSIAN_TAIL_SIGMAS * s),
        }
    }

    /// Closed ball of radius `scale()` about the center; every local
    /// maximum of a mixture lies in the ball of some component.
    pub fn ball(&self) -> (f64, f64) {
        (self.center() - self.scale(), self.center() + self.scale())
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            Component::Bump(b) => b.profile.pdf(x - b.center),
            Component::Gaussian(g) => {
                let d = x - g.center;
                if g.unit_height {
                    (-PI * d * d).exp()
                } else {
                    let z = d / g.sigma;
                    (-0.5 * z * z).exp() / (g.sigma * (2.0 * PI).sqrt())
                }
            }
        }
    }

    pub fn log_pdf(&self, x: f64) -> f64 {
        match self {
            Component::Bump(b) => b.profile.log_pdf(x - b.center),
            Component::Gaussian(g) => {
                let d = x - g.center;
                if g.unit_height {
                    -PI * d * d
                } else {
                    let z = d / g.sigma;
                    -0.5 * z * z - (g.sigma * (2.0 * PI).sqrt()).ln()
                }
            }
        }
    }

    pub fn pdf_derivative(&self, x: f64) -> f64 {
        match self {
            Component::Bump(b) => b.profile.pdf_derivative(x - b.center),
            Component::Gaussian(g) => -(x - g.center) / (g.sigma * g.sigma) * self.pdf(x),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Component::Bump(b) => b.profile.cdf(x - b.center),
            Component::Gaussian(g) => std_normal_cdf((x - g.center) / g.sigma),
        }
    }

    /// `E[Y^k]` under this component.
    pub fn raw_moment(&self, k: u32) -> Result<f64> {
        match self {
            Component::Gaussian(g) => {
                // E[(c + σZ)^k] = Σ_j C(k,j) c^{k-j} σ^j E[Z^j].
                let mut total = 0.0;
                let mut binom = 1.0;
                let mut z_moment = 1.0; // E[Z^j] for even j
                for j in 0..=k {
                    if j > 0 {
                        binom = binom * (k - j + 1) as f64 / j as f64;
                    }
                    if j % 2 == 0 {
                        if j > 0 {
                            z_moment *= (j - 1) as f64;
                        }
                        total += binom
                            * g.center.powi((k - j) as i32)
                            * g.sigma.powi(j as i32)
                            * z_moment;
                    }
                }
                Ok(total)
            }
            Component::Bump(_) => self.expect(|y| y.powi(k as i32)),
        }
    }

    /// `∫ f(y) pdf(y) dy` over the component's support.
    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64> {
        self.expect_with_breaks(f, &[])
    }

    /// As [`Component::expect`], splitting the range at `breaks` (points
    /// where `f` jumps) as well as at the center.
    pub fn expect_with_breaks<F: Fn(f64) -> f64>(&self, f: F, breaks: &[f64]) -> Result<f64> {
        let (lo, hi) = self.support();
        let mut cuts = vec![lo, self.center(), hi];
        cuts.extend(breaks.iter().copied().filter(|b| *b > lo && *b < hi));
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let g = |y: f64| {
            let p = self.pdf(y);
            if p == 0.0 {
                0.0
            } else {
                f(y) * p
            }
        };
        let mut total = 0.0;
        for w in cuts.windows(2) {
            total += quadrature::integrate(&g, w[0], w[1])?;
        }
        Ok(total)
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Component::Bump(b) => b.center + b.profile.quantile(rng.random::<f64>()),
            Component::Gaussian(g) => {
                let z: f64 = rng.sample(StandardNormal);
                g.center + g.sigma * z
            }
        }
    }
}

impl From<BumpComponent> for Component {
    fn from(b: BumpComponent) -> Self {
        Component::Bump(b)
    }
}

impl From<GaussianComponent> for Component {
    fn from(g: GaussianComponent) -> Self {
        Component::Gaussian(g)
    }
}

/// Location and value of the global maximum of a density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeResult {
    pub location: f64,
    pub value: f64,
    pub unique: bool,
    /// Density gap to the second-highest local maximum (the full peak value
    /// when there is no other local maximum).
    pub runner_up_gap: f64,
}

#[derive(Debug, Clone, Copy)]
struct ModalCandidate {
    x: f64,
    mass: f64,
    flat: Option<(f64, f64)>,
}

/// A weighted finite mixture of components from a single family.
#[derive(Debug, Clone)]
pub struct MixtureDensity {
    family: Family,
    components: Vec<Component>,
    weights: Vec<f64>,
    normalized: bool,
}

impl MixtureDensity {
    pub fn new(components: Vec<Component>, weights: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(domain("a mixture needs at least one component"));
        }
        if components.len() != weights.len() {
            return Err(domain(format!(
                "{} components but {} weights",
                components.len(),
                weights.len()
            )));
        }
        let family = components[0].family();
        if components.iter().any(|c| c.family() != family) {
            return Err(domain("mixture components must all belong to one family"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(domain(format!("weights must be finite and >= 0: {weights:?}")));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(domain("at least one weight must be positive"));
        }
        Ok(Self {
            family,
            components,
            normalized: (total - 1.0).abs() <= NORMALIZATION_TOL,
            weights,
        })
    }

    /// Gaussian mixture from `(center, sigma)` pairs.
    pub fn gaussian(params: &[(f64, f64)], weights: &[f64]) -> Result<Self> {
        let comps = params
            .iter()
            .map(|&(c, s)| GaussianComponent::new(c, s).map(Component::from))
            .collect::<Result<Vec<_>>>()?;
        Self::new(comps, weights.to_vec())
    }

    /// Mixture of unit-height Gaussians.
    pub fn unit_height_gaussian(centers: &[f64], weights: &[f64]) -> Result<Self> {
        let comps = centers
            .iter()
            .map(|&c| GaussianComponent::unit_height(c).map(Component::from))
            .collect::<Result<Vec<_>>>()?;
        Self::new(comps, weights.to_vec())
    }

    /// Mixture of bumps of a common half-width.
    pub fn bump(centers: &[f64], half_width: f64, weights: &[f64]) -> Result<Self> {
        let comps = centers
            .iter()
            .map(|&c| BumpComponent::new(c, half_width).map(Component::from))
            .collect::<Result<Vec<_>>>()?;
        Self::new(comps, weights.to_vec())
    }

    /// `0.75·N(2, 1.5) + 0.25·N(-2, 0.5)`, the two-peak benchmark mixture
    /// used by the Monte Carlo study. Its global mode is the narrow peak
    /// near -2, the wide peak at 2 is a local maximum of nearly equal height.
    pub fn benchmark() -> Self {
        Self::gaussian(&[(2.0, 1.5), (-2.0, 0.5)], &[0.75, 0.25]).expect("valid constants")
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Same components, weights divided by their sum.
    pub fn normalize(&self) -> Self {
        self.scaled(1.0 / self.total_weight())
            .expect("positive scaling of a valid mixture")
    }

    /// Same components, weights multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(domain(format!("scale factor must be positive, got {c}")));
        }
        Self::new(
            self.components.clone(),
            self.weights.iter().map(|w| w * c).collect(),
        )
    }

    /// Same components with new weights.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        Self::new(self.components.clone(), weights)
    }

    fn active(&self) -> impl Iterator<Item = (&Component, f64)> {
        self.components
            .iter()
            .zip(self.weights.iter().copied())
            .filter(|(_, w)| *w > 0.0)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.active().map(|(c, w)| w * c.pdf(x)).sum()
    }

    /// Log density via log-sum-exp; `-∞` where the density vanishes.
    pub fn log_pdf(&self, x: f64) -> f64 {
        let terms: Vec<f64> = self
            .active()
            .map(|(c, w)| w.ln() + c.log_pdf(x))
            .collect();
        let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return max;
        }
        max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
    }

    pub fn pdf_derivative(&self, x: f64) -> f64 {
        self.active().map(|(c, w)| w * c.pdf_derivative(x)).sum()
    }

    /// Lowest and highest point of the combined support.
    pub fn support(&self) -> (f64, f64) {
        self.active().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (c, _)| {
            let (a, b) = c.support();
            (lo.min(a), hi.max(b))
        })
    }

    fn require_normalized(&self, what: &str) -> Result<()> {
        if self.normalized {
            Ok(())
        } else {
            Err(Error::Contract(format!(
                "{what} requires a normalized density (total weight {})",
                self.total_weight()
            )))
        }
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        self.require_normalized("cdf")?;
        Ok(self.cdf_unchecked(x))
    }

    fn cdf_unchecked(&self, x: f64) -> f64 {
        self.active().map(|(c, w)| w * c.cdf(x)).sum::<f64>().clamp(0.0, 1.0)
    }

    /// Probability mass of `[x - ε, x + ε]`.
    pub fn modal_mass(&self, x: f64, eps: f64) -> Result<f64> {
        self.require_normalized("modal mass")?;
        Ok(self.modal_mass_unchecked(x, eps))
    }

    fn modal_mass_unchecked(&self, x: f64, eps: f64) -> f64 {
        self.active()
            .map(|(c, w)| w * (c.cdf(x + eps) - c.cdf(x - eps)))
            .sum()
    }

    /// `E[f(Y)]` (unnormalized: `Σ w_i E_i f`), computed component by component.
    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64> {
        self.expect_with_breaks(f, &[])
    }

    pub fn expect_with_breaks<F: Fn(f64) -> f64>(&self, f: F, breaks: &[f64]) -> Result<f64> {
        let mut total = 0.0;
        for (c, w) in self.active() {
            total += w * c.expect_with_breaks(&f, breaks)?;
        }
        Ok(total)
    }

    /// `Σ w_i E_i[Y^k]`.
    pub fn raw_moment(&self, k: u32) -> Result<f64> {
        let mut total = 0.0;
        for (c, w) in self.active() {
            total += w * c.raw_moment(k)?;
        }
        Ok(total)
    }

    pub fn mean(&self) -> Result<f64> {
        self.require_normalized("mean")?;
        self.raw_moment(1)
    }

    /// `n` independent draws, sorted, from a fixed seed.
    pub fn sample(&self, n: usize, seed: u64) -> Result<SampleBatch> {
        self.require_normalized("sampling")?;
        if n == 0 {
            return Err(domain("sample size must be at least 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(SampleBatch::new(self.draw(n, &mut rng), seed))
    }

    /// Unsorted draws from a caller-supplied generator.
    pub fn draw<R: Rng>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        let total = self.total_weight();
        let mut cumulative = Vec::with_capacity(self.weights.len());
        let mut acc = 0.0;
        for w in &self.weights {
            acc += w / total;
            cumulative.push(acc);
        }
        let last = cumulative.len() - 1;
        (0..n)
            .map(|_| {
                let u: f64 = rng.random();
                let mut k = cumulative.partition_point(|&c| c <= u).min(last);
                while self.weights[k] == 0.0 && k > 0 {
                    k -= 1;
                }
                self.components[k].sample(rng)
            })
            .collect()
    }

    fn slope_sign(&self, x: f64) -> Ordering {
        let d = self.pdf_derivative(x);
        d.partial_cmp(&0.0).unwrap_or(Ordering::Equal)
    }

    /// Local maxima of the density, highest first.
    ///
    /// Each component ball is scanned on a grid, the best grid point is
    /// refined by golden-section search and then polished by bisection on
    /// the sign of the analytic derivative. Points at a ball boundary with
    /// the derivative pointing outward are not local maxima and are dropped.
    pub fn local_maxima(&self) -> Vec<(f64, f64)> {
        let mut found: Vec<(f64, f64)> = Vec::new();
        for (comp, _) in self.active() {
            let (lo, hi) = comp.ball();
            let scale = comp.scale();
            let grid = linspace(lo, hi, BALL_GRID);
            let best = grid
                .iter()
                .enumerate()
                .max_by(|a, b| self.pdf(*a.1).total_cmp(&self.pdf(*b.1)))
                .map(|(i, _)| i)
                .unwrap_or(0);
            let a = grid[best.saturating_sub(1)];
            let b = grid[(best + 1).min(BALL_GRID - 1)];
            let mut x = golden_max(|x| self.pdf(x), a, b, MODE_XTOL * scale.max(1e-300));
            let delta = 1e-6 * scale;
            if let SignRoot::Crossing(r) =
                bisect_sign(|x| self.slope_sign(x), x - delta, x + delta, MODE_XTOL * scale)
            {
                x = r;
            } else if let SignRoot::Crossing(r) =
                bisect_sign(|x| self.slope_sign(x), a, b, MODE_XTOL * scale)
            {
                x = r;
            }
            let at_left = (x - lo).abs() <= 1e-8 * scale && self.slope_sign(x) == Ordering::Less;
            let at_right =
                (x - hi).abs() <= 1e-8 * scale && self.slope_sign(x) == Ordering::Greater;
            if at_left || at_right {
                continue;
            }
            let v = self.pdf(x);
            if v <= 0.0 {
                continue;
            }
            match found
                .iter_mut()
                .find(|(y, _)| (y - x).abs() <= 1e-7 * scale.max(1e-12))
            {
                Some(existing) => {
                    if v > existing.1 {
                        *existing = (x, v);
                    }
                }
                None => found.push((x, v)),
            }
        }
        found.sort_by(|a, b| b.1.total_cmp(&a.1));
        found
    }

    /// Global maximizer of the density.
    pub fn mode(&self) -> Result<ModeResult> {
        if self.weights.iter().all(|w| *w == 0.0) {
            return Err(domain("mode of a zero mixture"));
        }
        let maxima = self.local_maxima();
        let Some(&(location, value)) = maxima.first() else {
            return Err(Error::Numeric("no local maximum located".into()));
        };
        let runner_up_gap = maxima.get(1).map_or(value, |m| value - m.1);
        Ok(ModeResult {
            location,
            value,
            unique: runner_up_gap > UNIQUENESS_TOL * value,
            runner_up_gap,
        })
    }

    /// True iff the global maximum of the density is unique (several local
    /// maxima are allowed).
    pub fn is_unimodal(&self) -> bool {
        self.mode().map(|m| m.unique).unwrap_or(false)
    }

    // Sign of d/dx [F(x+ε) - F(x-ε)] = p(x+ε) - p(x-ε), compared in log space
    // so that it stays defined where both densities underflow.
    fn modal_slope_sign(&self, x: f64, eps: f64) -> Ordering {
        let a = self.log_pdf(x + eps);
        let b = self.log_pdf(x - eps);
        if a == b {
            return Ordering::Equal;
        }
        a.partial_cmp(&b).unwrap_or(Ordering::Equal)
    }

    fn modal_grid(&self, eps: f64) -> Vec<f64> {
        let (lo, hi) = self.support();
        let mut grid = linspace(lo - eps, hi + eps, 4097);
        for (c, _) in self.active() {
            let s = c.scale();
            let center = c.center();
            grid.extend(linspace(center - s - eps, center + s + eps, 257));
            grid.extend(linspace(center - 2.0 * eps, center + 2.0 * eps, 33));
        }
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        grid
    }

    /// Local maximizers of the modal mass `F(x+ε) - F(x-ε)` with their
    /// masses, highest first. Flat maxima carry their extent.
    fn modal_candidates(&self, eps: f64) -> Vec<ModalCandidate> {
        let grid = self.modal_grid(eps);
        let signs: Vec<Ordering> = grid.iter().map(|&x| self.modal_slope_sign(x, eps)).collect();
        let xtol = 1e-10 * eps.min(self.min_scale());
        let mut out = Vec::new();
        let mut last_pos: Option<usize> = None;
        for (i, s) in signs.iter().enumerate() {
            match s {
                Ordering::Greater => last_pos = Some(i),
                Ordering::Less => {
                    let Some(p) = last_pos.take() else { continue };
                    let slope = |x| self.modal_slope_sign(x, eps);
                    match bisect_sign(slope, grid[p], grid[i], xtol) {
                        SignRoot::Crossing(x) => out.push(ModalCandidate {
                            x,
                            mass: self.modal_mass_unchecked(x, eps),
                            flat: None,
                        }),
                        SignRoot::Plateau { lo, hi } => {
                            let x = 0.5 * (lo + hi);
                            out.push(ModalCandidate {
                                x,
                                mass: self.modal_mass_unchecked(x, eps),
                                flat: (hi - lo > xtol).then_some((lo, hi)),
                            })
                        }
                        SignRoot::NotBracketed => {}
                    }
                }
                Ordering::Equal => {}
            }
        }
        out.sort_by(|a, b| b.mass.total_cmp(&a.mass));
        out
    }

    fn min_scale(&self) -> f64 {
        self.active()
            .map(|(c, _)| c.scale())
            .fold(f64::INFINITY, f64::min)
    }

    /// Midpoint of the modal interval of half-width `eps`: the global
    /// maximizer of `F(x + ε) - F(x - ε)`.
    pub fn modal_midpoint(&self, eps: f64) -> Result<f64> {
        self.require_normalized("modal midpoint")?;
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(domain(format!("eps must be positive, got {eps}")));
        }
        let candidates = self.modal_candidates(eps);
        let Some(best) = candidates.first() else {
            return Err(Error::Numeric(format!(
                "no maximizer of the modal mass located (eps = {eps})"
            )));
        };
        if let Some((lo, hi)) = best.flat {
            return Err(Error::NonUnique {
                what: "modal midpoint",
                detail: format!("modal mass is flat on [{lo}, {hi}] (eps = {eps})"),
            });
        }
        if let Some(second) = candidates.get(1) {
            if best.mass - second.mass <= UNIQUENESS_TOL * best.mass {
                return Err(Error::NonUnique {
                    what: "modal midpoint",
                    detail: format!(
                        "modal masses at {} and {} tie ({} vs {}, eps = {eps})",
                        best.x, second.x, best.mass, second.mass
                    ),
                });
            }
        }
        Ok(best.x)
    }

    /// The local maximizer of the modal mass reached from `near`: the
    /// modal midpoint that tracks a particular local maximum of the
    /// density rather than the global one.
    pub fn local_modal_midpoint(&self, eps: f64, near: f64) -> Result<f64> {
        self.require_normalized("modal midpoint")?;
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(domain(format!("eps must be positive, got {eps}")));
        }
        let step = (0.25 * eps).min(0.125 * self.min_scale());
        let sign = |x| self.modal_slope_sign(x, eps);
        let (mut lo, mut hi) = (near, near);
        match sign(near) {
            Ordering::Greater => {
                while sign(hi) == Ordering::Greater {
                    lo = hi;
                    hi += step;
                    if hi > near + 1e3 * step.max(1.0) {
                        break;
                    }
                }
            }
            _ => {
                while sign(lo) != Ordering::Greater {
                    hi = lo;
                    lo -= step;
                    if lo < near - 1e3 * step.max(1.0) {
                        break;
                    }
                }
            }
        }
        let xtol = 1e-10 * eps.min(self.min_scale());
        match bisect_sign(sign, lo, hi, xtol) {
            SignRoot::Crossing(x) => Ok(x),
            SignRoot::Plateau { lo, hi } => Err(Error::NonUnique {
                what: "modal midpoint",
                detail: format!("modal mass is flat on [{lo}, {hi}] (eps = {eps})"),
            }),
            SignRoot::NotBracketed => Err(Error::Numeric(format!(
                "could not bracket a local modal midpoint near {near} (eps = {eps})"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    // Frozen from a 40-digit mpmath quadrature of exp(-1/(1-x^2)) on [-1, 1].
    const C1: f64 = 0.443_993_816_168_079_4;
    const C_HALF: f64 = 0.007_029_858_406_609_656;

    #[test]
    fn norm_const_matches_high_precision_oracle() {
        let c1 = bump_norm_const(1.0).unwrap();
        assert!(((c1 - C1) / C1).abs() < 1e-12, "{c1}");
        let ch = bump_norm_const(0.5).unwrap();
        assert!(((ch - C_HALF) / C_HALF).abs() < 1e-12, "{ch}");
        assert!(ch < c1);
    }

    #[test]
    fn norm_const_rejects_nonpositive() {
        assert!(matches!(bump_norm_const(0.0), Err(Error::Domain(_))));
        assert!(matches!(bump_norm_const(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn tiny_half_width_stays_finite_in_log_space() {
        let p = BumpProfile::get(0.01).unwrap();
        assert!(p.log_norm_const().is_finite());
        let b = MixtureDensity::bump(&[0.0], 0.01, &[1.0]).unwrap();
        let mass = b.expect(|_| 1.0).unwrap();
        assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn bump_normalizes_and_vanishes_outside_support() {
        let b = MixtureDensity::bump(&[0.0], 1.0, &[1.0]).unwrap();
        assert_abs_diff_eq!(b.expect(|_| 1.0).unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(b.pdf(1.0), 0.0);
        assert_eq!(b.pdf(-1.3), 0.0);
        assert_abs_diff_eq!(b.cdf(0.0).unwrap(), 0.5, epsilon = 1e-13);
    }

    #[test]
    fn bump_table_matches_direct_quadrature() {
        let p = BumpProfile::get(1.0).unwrap();
        for &u in &[-0.9, -0.41, 0.0, 0.123, 0.77] {
            let direct = quadrature::integrate(|v| p.pdf(v), -1.0, u).unwrap();
            assert_abs_diff_eq!(p.cdf(u), direct, epsilon = 1e-12);
            assert_abs_diff_eq!(p.quantile(p.cdf(u)), u, epsilon = 1e-10);
        }
    }

    #[test]
    fn unit_height_peak_is_exactly_one() {
        let g = MixtureDensity::unit_height_gaussian(&[0.0], &[1.0]).unwrap();
        assert_eq!(g.pdf(0.0), 1.0);
        assert!(g.is_normalized() || (g.expect(|_| 1.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pdf_at_sigma_adds_gamma() {
        let sigma = unit_height_sigma();
        let c = 2.5;
        let q = MixtureDensity::unit_height_gaussian(&[0.0, c], &[1.0, 1.0]).unwrap();
        let gamma = (-PI * (sigma - c).powi(2)).exp();
        let first = (-PI * sigma * sigma).exp();
        assert_abs_diff_eq!(q.pdf(sigma), first + gamma, epsilon = 1e-15);
    }

    #[test]
    fn benchmark_cdf_closed_form() {
        let d = MixtureDensity::benchmark();
        // 0.125 + 0.75 Φ(-8/3), evaluated with mpmath.
        assert_abs_diff_eq!(d.cdf(-2.0).unwrap(), 0.127_872_785_425_692_3, epsilon = 1e-14);
        assert_abs_diff_eq!(d.cdf(-60.0).unwrap(), 0.0, epsilon = 1e-300);
        assert_abs_diff_eq!(d.cdf(60.0).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn cdf_of_unnormalized_is_contract_violation() {
        let d = MixtureDensity::benchmark().scaled(2.0).unwrap();
        assert!(matches!(d.cdf(0.0), Err(Error::Contract(_))));
    }

    #[test]
    fn mode_of_single_bump_is_center() {
        let b = MixtureDensity::bump(&[3.25], 0.5, &[1.0]).unwrap();
        let m = b.mode().unwrap();
        assert_abs_diff_eq!(m.location, 3.25, epsilon = 1e-12);
        assert!(m.unique);
    }

    #[test]
    fn mode_of_lemma_density() {
        let p = MixtureDensity::bump(&[0.0, 4.0], 1.0, &[2.0 / 3.0, 1.0 / 3.0]).unwrap();
        let m = p.mode().unwrap();
        assert_abs_diff_eq!(m.location, 0.0, epsilon = 1e-12);
        assert!(m.unique);
    }

    #[test]
    fn benchmark_mode() {
        let m = MixtureDensity::benchmark().mode().unwrap();
        assert_abs_diff_eq!(m.location, -1.987047, epsilon = 1e-5);
        assert!(m.unique);
    }

    #[test]
    fn equal_bumps_are_not_unimodal() {
        let d = MixtureDensity::bump(&[0.0, 4.0], 1.0, &[0.5, 0.5]).unwrap();
        assert!(!d.is_unimodal());
        assert!(MixtureDensity::bump(&[0.0], 1.0, &[1.0]).unwrap().is_unimodal());
    }

    #[test]
    fn zero_weights_rejected() {
        assert!(MixtureDensity::bump(&[0.0, 4.0], 1.0, &[0.0, 0.0]).is_err());
        assert!(MixtureDensity::bump(&[0.0], 1.0, &[-0.1]).is_err());
    }

    #[test]
    fn mixed_families_rejected() {
        let comps = vec![
            Component::from(BumpComponent::new(0.0, 1.0).unwrap()),
            Component::from(GaussianComponent::new(4.0, 1.0).unwrap()),
        ];
        assert!(MixtureDensity::new(comps, vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn modal_midpoint_of_symmetric_gaussian() {
        let d = MixtureDensity::gaussian(&[(1.7, 0.8)], &[1.0]).unwrap();
        for eps in [0.01, 0.3, 2.0] {
            assert_abs_diff_eq!(d.modal_midpoint(eps).unwrap(), 1.7, epsilon = 1e-9);
        }
    }

    #[test]
    fn modal_midpoint_small_eps_matches_reference() {
        let d = MixtureDensity::benchmark();
        assert_abs_diff_eq!(d.modal_midpoint(0.001).unwrap(), -1.98704664678, epsilon = 1e-6);
        assert_abs_diff_eq!(d.modal_midpoint(0.1).unwrap(), -1.98673887353, epsilon = 1e-6);
    }

    #[test]
    fn wide_eps_global_modal_midpoint_is_the_wide_peak() {
        // For eps = 0.5 the interval around the wide component holds more
        // mass (0.19584) than the one around the narrow global mode (0.17715).
        let d = MixtureDensity::benchmark();
        assert_abs_diff_eq!(d.modal_midpoint(0.5).unwrap(), 2.0, epsilon = 1e-6);
        assert_abs_diff_eq!(
            d.local_modal_midpoint(0.5, -1.987).unwrap(),
            -1.97669101040,
            epsilon = 1e-6
        );
    }

    #[test]
    fn plateau_is_non_unique() {
        // A window wider than the bump covers all of it on a whole interval.
        let d = MixtureDensity::bump(&[0.0], 0.5, &[1.0]).unwrap();
        assert!(matches!(
            d.modal_midpoint(1.0),
            Err(Error::NonUnique { .. })
        ));
    }

    #[test]
    fn equal_peaks_modal_midpoint_tie() {
        let d = MixtureDensity::bump(&[0.0, 4.0], 1.0, &[0.5, 0.5]).unwrap();
        assert!(matches!(d.modal_midpoint(1.0), Err(Error::NonUnique { .. })));
    }

    #[test]
    fn sampling_is_deterministic_and_sorted() {
        let d = MixtureDensity::benchmark();
        let a = d.sample(500, 42).unwrap();
        let b = d.sample(500, 42).unwrap();
        assert_eq!(a.values(), b.values());
        assert!(a.values().windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(a.seed(), 42);
        assert!(matches!(d.sample(0, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn narrow_gaussian_concentrates() {
        let d = MixtureDensity::gaussian(&[(5.0, 1e-9)], &[1.0]).unwrap();
        let s = d.sample(3, 7).unwrap();
        assert!(s.values().iter().all(|y| (y - 5.0).abs() < 1e-7));
    }

    #[test]
    fn bump_samples_stay_in_support() {
        let d = MixtureDensity::bump(&[0.0, 4.0], 1.0, &[0.6, 0.4]).unwrap();
        let s = d.sample(2000, 3).unwrap();
        assert!(s
            .values()
            .iter()
            .all(|y| (-1.0..=1.0).contains(y) || (3.0..=5.0).contains(y)));
    }

    #[test]
    fn gaussian_raw_moments() {
        let d = MixtureDensity::gaussian(&[(3.0, 2.0)], &[1.0]).unwrap();
        assert_abs_diff_eq!(d.raw_moment(1).unwrap(), 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(d.raw_moment(2).unwrap(), 13.0, epsilon = 1e-12);
        // E[(3+2Z)^4] = 81 + 6*9*4 + 16*3 = 345
        assert_abs_diff_eq!(d.raw_moment(4).unwrap(), 345.0, epsilon = 1e-10);
        let by_quadrature = d.expect(|y| y.powi(4)).unwrap();
        assert_abs_diff_eq!(by_quadrature, 345.0, epsilon = 1e-9);
    }

    #[test]
    fn bump_second_moment() {
        // Variance of the unit bump, from mpmath.
        let d = MixtureDensity::bump(&[0.0], 1.0, &[1.0]).unwrap();
        assert_abs_diff_eq!(d.raw_moment(2).unwrap(), 0.158_113_636_263_798_2, epsilon = 1e-12);
    }
}
