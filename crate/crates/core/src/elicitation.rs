//! Losses, identification functions, link functions and Bayes acts.
//!
//! User-supplied evaluation closures must be deterministic and reentrant:
//! the quadrature routines call them many times, possibly from several
//! threads.

use std::cell::RefCell;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::mixtures::MixtureDensity;
use crate::optimize::{golden_min, linspace};

/// Grid resolution of the Bayes-act search.
pub const BAYES_GRID: usize = 2048;
/// Relative tolerance below which two minimal expected losses tie.
pub const BAYES_TIE_TOL: f64 = 1e-9;

/// A loss `L(r, y)` with a `report_dim`-dimensional report.
pub trait LossFunction: Send + Sync {
    fn report_dim(&self) -> usize;

    fn evaluate(&self, r: &[f64], y: f64) -> f64;

    /// Closed-form `E_d L(r, Y)` where one is available.
    fn closed_form(&self, _d: &MixtureDensity, _r: &[f64]) -> Option<Result<f64>> {
        None
    }

    /// Outcomes at which `L(r, ·)` jumps.
    fn breakpoints(&self, _r: &[f64]) -> Vec<f64> {
        Vec::new()
    }
}

/// `(y^power - r)²`; `power = 1` elicits the mean, `power = 2` the second
/// moment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquaredLoss {
    pub power: u32,
}

impl SquaredLoss {
    pub fn mean() -> Self {
        Self { power: 1 }
    }

    pub fn moment(power: u32) -> Self {
        Self { power }
    }
}

impl LossFunction for SquaredLoss {
    fn report_dim(&self) -> usize {
        1
    }

    fn evaluate(&self, r: &[f64], y: f64) -> f64 {
        (y.powi(self.power as i32) - r[0]).powi(2)
    }

    fn closed_form(&self, d: &MixtureDensity, r: &[f64]) -> Option<Result<f64>> {
        let moments = d
            .raw_moment(2 * self.power)
            .and_then(|m2| Ok((m2, d.raw_moment(self.power)?)));
        Some(moments.map(|(m2, m1)| m2 - 2.0 * r[0] * m1 + r[0] * r[0] * d.total_weight()))
    }
}

/// `L_ε(r, y) = 1{|r - y| > ε}`, whose Bayes act is the modal midpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModalLoss {
    pub eps: f64,
}

impl ModalLoss {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(domain(format!("eps must be positive, got {eps}")));
        }
        Ok(Self { eps })
    }
}

impl LossFunction for ModalLoss {
    fn report_dim(&self) -> usize {
        1
    }

    fn evaluate(&self, r: &[f64], y: f64) -> f64 {
        if (r[0] - y).abs() > self.eps {
            1.0
        } else {
            0.0
        }
    }

    fn closed_form(&self, d: &MixtureDensity, r: &[f64]) -> Option<Result<f64>> {
        Some(d.modal_mass(r[0], self.eps).map(|m| 1.0 - m))
    }

    fn breakpoints(&self, r: &[f64]) -> Vec<f64> {
        vec![r[0] - self.eps, r[0] + self.eps]
    }
}

type LossFn = dyn Fn(&[f64], f64) -> f64 + Send + Sync;

/// A loss given by a closure, evaluated by quadrature only.
#[derive(Clone)]
pub struct FnLoss {
    dim: usize,
    f: Arc<LossFn>,
}

impl FnLoss {
    pub fn new<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&[f64], f64) -> f64 + Send + Sync + 'static,
    {
        Self { dim, f: Arc::new(f) }
    }
}

impl fmt::Debug for FnLoss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnLoss").field("dim", &self.dim).finish()
    }
}

impl LossFunction for FnLoss {
    fn report_dim(&self) -> usize {
        self.dim
    }

    fn evaluate(&self, r: &[f64], y: f64) -> f64 {
        (self.f)(r, y)
    }
}

fn check_report(dim: usize, r: &[f64]) -> Result<()> {
    if r.len() != dim {
        return Err(domain(format!(
            "report has length {}, expected {dim}",
            r.len()
        )));
    }
    if r.iter().any(|v| !v.is_finite()) {
        return Err(domain(format!("report must be finite: {r:?}")));
    }
    Ok(())
}

/// `E_d L(r, Y)`, in closed form where the loss provides one.
pub fn expected_loss(loss: &dyn LossFunction, d: &MixtureDensity, r: &[f64]) -> Result<f64> {
    check_report(loss.report_dim(), r)?;
    if !d.is_normalized() {
        return Err(Error::Contract("expected loss requires a normalized density".into()));
    }
    match loss.closed_form(d, r) {
        Some(v) => v,
        None => expected_loss_by_quadrature(loss, d, r),
    }
}

/// `E_d L(r, Y)` by quadrature, ignoring any closed form.
pub fn expected_loss_by_quadrature(
    loss: &dyn LossFunction,
    d: &MixtureDensity,
    r: &[f64],
) -> Result<f64> {
    check_report(loss.report_dim(), r)?;
    d.expect_with_breaks(|y| loss.evaluate(r, y), &loss.breakpoints(r))
}

/// `[min center - 3·max scale, max center + 3·max scale]`.
pub fn default_report_domain(d: &MixtureDensity) -> (f64, f64) {
    let comps = d.components();
    let max_scale = comps.iter().map(|c| c.scale()).fold(0.0, f64::max);
    let lo = comps.iter().map(|c| c.center()).fold(f64::INFINITY, f64::min);
    let hi = comps.iter().map(|c| c.center()).fold(f64::NEG_INFINITY, f64::max);
    (lo - 3.0 * max_scale, hi + 3.0 * max_scale)
}

/// Minimizer of the expected loss over a scalar report interval.
///
/// A 2048-point grid locates the basins; the best few are refined by
/// golden-section search. Two distinct minimizers whose expected losses tie
/// are an error, since a Bayes act must be a single point.
pub fn bayes_act(
    loss: &dyn LossFunction,
    d: &MixtureDensity,
    domain_interval: Option<(f64, f64)>,
) -> Result<Vec<f64>> {
    if loss.report_dim() != 1 {
        return Err(domain(format!(
            "Bayes-act search supports scalar reports only (report_dim = {})",
            loss.report_dim()
        )));
    }
    let (lo, hi) = domain_interval.unwrap_or_else(|| default_report_domain(d));
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(domain(format!("invalid report interval [{lo}, {hi}]")));
    }
    let objective = |x: f64| expected_loss(loss, d, &[x]);
    let grid = linspace(lo, hi, BAYES_GRID);
    let values = grid.iter().map(|&x| objective(x)).collect::<Result<Vec<_>>>()?;

    let last = grid.len() - 1;
    let mut basins: Vec<usize> = (0..grid.len())
        .filter(|&i| {
            (i == 0 || values[i] <= values[i - 1]) && (i == last || values[i] <= values[i + 1])
        })
        .collect();
    basins.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    basins.truncate(8);

    let xtol = 1e-10 * (hi - lo);
    let mut refined = Vec::with_capacity(basins.len());
    for i in basins {
        let a = grid[i.saturating_sub(1)];
        let b = grid[(i + 1).min(last)];
        let failure = RefCell::new(None);
        let x = golden_min(
            |x| match objective(x) {
                Ok(v) => v,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    f64::INFINITY
                }
            },
            a,
            b,
            xtol,
        );
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        refined.push((x, objective(x)?));
    }
    refined.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (best_x, best_v) = refined[0];
    let separation = 1e-6 * (hi - lo);
    if let Some(&(x, v)) = refined
        .iter()
        .skip(1)
        .find(|(x, _)| (x - best_x).abs() > separation)
    {
        if (v - best_v).abs() <= BAYES_TIE_TOL * best_v.abs().max(1.0) {
            return Err(Error::NonUnique {
                what: "Bayes act",
                detail: format!("expected losses at {best_x} and {x} tie ({best_v} vs {v})"),
            });
        }
    }
    Ok(vec![best_x])
}

/// An identification function `V(r, y) ∈ ℝ^k` for a `k`-dimensional report.
pub trait Identification: Send + Sync {
    fn dim(&self) -> usize;

    /// Must return a vector of length [`Identification::dim`].
    fn evaluate(&self, r: &[f64], y: f64) -> Vec<f64>;

    fn description(&self) -> String;

    /// Outcomes at which `V(r, ·)` jumps.
    fn breakpoints(&self, _r: &[f64]) -> Vec<f64> {
        Vec::new()
    }
}

/// `E_d V(r, Y)`, one quadrature per coordinate and component.
///
/// No normalization is required: the result is linear in the mixture
/// weights.
pub fn expected_identification(
    v: &dyn Identification,
    d: &MixtureDensity,
    r: &[f64],
) -> Result<Vec<f64>> {
    check_report(v.dim(), r)?;
    let breaks = v.breakpoints(r);
    (0..v.dim())
        .map(|j| d.expect_with_breaks(|y| v.evaluate(r, y)[j], &breaks))
        .collect()
}

/// One row of a polynomial identification function:
/// `Σ_m y_coeffs[m]·y^m - Σ_l Σ_m r_coeffs[l][m]·r_l^m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialRow {
    pub y_coeffs: Vec<f64>,
    #[serde(default)]
    pub r_coeffs: Vec<Vec<f64>>,
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Identification functions polynomial in the outcome, with a separable
/// polynomial offset in the report. Covers the mean `y - r`, moment vectors
/// `(y - r₁, y² - r₂, …)` and their linear recombinations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialIdentification {
    pub description: String,
    pub rows: Vec<PolynomialRow>,
}

impl PolynomialIdentification {
    pub fn new(description: impl Into<String>, rows: Vec<PolynomialRow>) -> Result<Self> {
        let v = Self {
            description: description.into(),
            rows,
        };
        v.validate()?;
        Ok(v)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows.is_empty() {
            return Err(domain("identification function needs at least one row"));
        }
        let k = self.rows.len();
        for (j, row) in self.rows.iter().enumerate() {
            if row.r_coeffs.len() > k {
                return Err(domain(format!(
                    "row {j} has offsets for {} report coordinates, dimension is {k}",
                    row.r_coeffs.len()
                )));
            }
            let all = row.y_coeffs.iter().chain(row.r_coeffs.iter().flatten());
            if all.clone().any(|c| !c.is_finite()) {
                return Err(domain(format!("row {j} has non-finite coefficients")));
            }
        }
        Ok(())
    }

    /// `V(r, y) = y - r`.
    pub fn mean() -> Self {
        Self::moments(1)
    }

    /// `V_j(r, y) = y^j - r_j` for `j = 1..=k`.
    pub fn moments(k: usize) -> Self {
        let rows = (1..=k)
            .map(|j| {
                let mut y_coeffs = vec![0.0; j + 1];
                y_coeffs[j] = 1.0;
                let mut r_coeffs = vec![Vec::new(); k];
                r_coeffs[j - 1] = vec![0.0, 1.0];
                PolynomialRow { y_coeffs, r_coeffs }
            })
            .collect();
        Self {
            description: format!("moment vector, k = {k}"),
            rows,
        }
    }

    fn report_offset(&self, row: &PolynomialRow, r: &[f64]) -> f64 {
        row.r_coeffs
            .iter()
            .zip(r)
            .map(|(coeffs, &rl)| horner(coeffs, rl))
            .sum()
    }
}

impl Identification for PolynomialIdentification {
    fn dim(&self) -> usize {
        self.rows.len()
    }

    fn evaluate(&self, r: &[f64], y: f64) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| horner(&row.y_coeffs, y) - self.report_offset(row, r))
            .collect()
    }

    fn description(&self) -> String {
        self.description.clone()
    }
}

type IdentFn = dyn Fn(&[f64], f64) -> Vec<f64> + Send + Sync;
type BreakFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// An identification function given by a closure.
#[derive(Clone)]
pub struct FnIdentification {
    dim: usize,
    description: String,
    f: Arc<IdentFn>,
    breaks: Option<Arc<BreakFn>>,
}

impl FnIdentification {
    pub fn new<F>(dim: usize, description: impl Into<String>, f: F) -> Self
    where
        F: Fn(&[f64], f64) -> Vec<f64> + Send + Sync + 'static,
    {
        Self {
            dim,
            description: description.into(),
            f: Arc::new(f),
            breaks: None,
        }
    }

    pub fn with_breakpoints<B>(mut self, b: B) -> Self
    where
        B: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.breaks = Some(Arc::new(b));
        self
    }

    /// `V(r, y) = 1{y > r} - 1{y < r}`, which identifies the median.
    pub fn median() -> Self {
        Self::new(1, "median sign function", |r, y| {
            let s = if y > r[0] {
                1.0
            } else if y < r[0] {
                -1.0
            } else {
                0.0
            };
            vec![s]
        })
        .with_breakpoints(|r| vec![r[0]])
    }
}

impl fmt::Debug for FnIdentification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnIdentification")
            .field("dim", &self.dim)
            .field("description", &self.description)
            .finish()
    }
}

impl Identification for FnIdentification {
    fn dim(&self) -> usize {
        self.dim
    }

    fn evaluate(&self, r: &[f64], y: f64) -> Vec<f64> {
        (self.f)(r, y)
    }

    fn description(&self) -> String {
        self.description.clone()
    }

    fn breakpoints(&self, r: &[f64]) -> Vec<f64> {
        self.breaks.as_ref().map_or_else(Vec::new, |b| b(r))
    }
}

/// `f : ℝ^k → ℝ` recovering a property from an identifiable intermediate one.
pub trait LinkFunction {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64]) -> f64;
}

/// `f(x₁, x₂) = x₂ - x₁²`: variance from mean and second moment.
#[derive(Debug, Clone, Copy, Default)]
pub struct VarianceLink;

impl LinkFunction for VarianceLink {
    fn dim(&self) -> usize {
        2
    }

    fn apply(&self, x: &[f64]) -> f64 {
        x[1] - x[0] * x[0]
    }
}

/// Variance recovered indirectly: Bayes acts of the squared losses on `y`
/// and `y²`, fed through [`VarianceLink`].
pub fn variance_link_demo(d: &MixtureDensity) -> Result<f64> {
    let mean = bayes_act(&SquaredLoss::mean(), d, None)?[0];
    let reach = d
        .components()
        .iter()
        .map(|c| c.center().abs() + 10.0 * c.scale())
        .fold(0.0, f64::max);
    let second = bayes_act(&SquaredLoss::moment(2), d, Some((0.0, reach * reach)))?[0];
    Ok(VarianceLink.apply(&[mean, second]))
}
