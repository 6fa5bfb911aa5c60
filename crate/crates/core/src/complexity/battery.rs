//! A fixed collection of identification functions with one- to
//! three-dimensional reports, used to exercise the certifier.

use std::sync::Arc;

use crate::elicitation::{FnIdentification, Identification, PolynomialIdentification, PolynomialRow};

fn poly(description: &str, rows: Vec<(Vec<f64>, Vec<Vec<f64>>)>) -> Arc<dyn Identification> {
    let rows = rows
        .into_iter()
        .map(|(y_coeffs, r_coeffs)| PolynomialRow { y_coeffs, r_coeffs })
        .collect();
    Arc::new(PolynomialIdentification::new(description, rows).expect("battery entry is valid"))
}

fn below(y: f64, r: f64) -> f64 {
    if y < r {
        1.0
    } else {
        0.0
    }
}

fn quantiles(levels: &'static [f64]) -> Arc<dyn Identification> {
    let desc = format!("quantiles at levels {levels:?}");
    Arc::new(
        FnIdentification::new(levels.len(), desc, move |r, y| {
            levels.iter().zip(r).map(|(a, rl)| below(y, *rl) - a).collect()
        })
        .with_breakpoints(|r| r.to_vec()),
    )
}

/// Entry of [`battery`].
#[derive(Clone)]
pub struct BatteryEntry {
    pub v: Arc<dyn Identification>,
    /// Whether `E_p V(r, Y)` has a root on the schedule densities.
    pub has_root: bool,
}

impl std::fmt::Debug for BatteryEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BatteryEntry")
            .field("v", &self.v.description())
            .field("has_root", &self.has_root)
            .finish()
    }
}

/// Twenty-four identification functions: moments, central moments,
/// quantiles, an expectile, a median, nonlinear report maps, and four that
/// vanish nowhere.
pub fn battery() -> Vec<BatteryEntry> {
    let root = |v| BatteryEntry { v, has_root: true };
    let none = |v| BatteryEntry { v, has_root: false };
    vec![
        root(Arc::new(PolynomialIdentification::mean()) as Arc<dyn Identification>),
        root(poly("second moment", vec![(vec![0.0, 0.0, 1.0], vec![vec![0.0, 1.0]])])),
        root(poly("third moment", vec![(vec![0.0, 0.0, 0.0, 1.0], vec![vec![0.0, 1.0]])])),
        root(poly("y - r - r^3", vec![(vec![0.0, 1.0], vec![vec![0.0, 1.0, 0.0, 1.0]])])),
        root(poly(
            "second moment about 1",
            vec![(vec![1.0, -2.0, 1.0], vec![vec![0.0, 1.0]])],
        )),
        root(poly("mean shifted by 100", vec![(vec![-100.0, 1.0], vec![vec![0.0, 1.0]])])),
        root(Arc::new(FnIdentification::median())),
        root(quantiles(&[0.3])),
        root(Arc::new(
            FnIdentification::new(1, "0.8-expectile", |r, y| {
                let w = if y > r[0] { 0.8 } else { 0.2 };
                vec![w * (y - r[0])]
            })
            .with_breakpoints(|r| vec![r[0]]),
        )),
        none(poly("y^2 + r^2 + 1", vec![(vec![1.0, 0.0, 1.0], vec![vec![0.0, 0.0, -1.0]])])),
        none(Arc::new(FnIdentification::new(1, "(y - r)^2 + 1", |r, y| {
            vec![(y - r[0]).powi(2) + 1.0]
        }))),
        root(Arc::new(PolynomialIdentification::moments(2))),
        root(Arc::new(FnIdentification::new(2, "mean and variance", |r, y| {
            vec![y - r[0], (y - r[0]).powi(2) - r[1]]
        }))),
        root(poly(
            "mean and third moment",
            vec![
                (vec![0.0, 1.0], vec![vec![0.0, 1.0], vec![]]),
                (vec![0.0, 0.0, 0.0, 1.0], vec![vec![], vec![0.0, 1.0]]),
            ],
        )),
        root(quantiles(&[0.25, 0.75])),
        root(poly(
            "y - r1 - r2 and second moment",
            vec![
                (vec![0.0, 1.0], vec![vec![0.0, 1.0], vec![0.0, 1.0]]),
                (vec![0.0, 0.0, 1.0], vec![vec![], vec![0.0, 1.0]]),
            ],
        )),
        root(Arc::new(
            FnIdentification::new(2, "median and mean", |r, y| {
                let s = if y > r[0] {
                    1.0
                } else if y < r[0] {
                    -1.0
                } else {
                    0.0
                };
                vec![s, y - r[1]]
            })
            .with_breakpoints(|r| vec![r[0]]),
        )),
        root(poly(
            "mean and variance as polynomials",
            vec![
                (vec![0.0, 1.0], vec![vec![0.0, 1.0], vec![]]),
                (vec![0.0, 0.0, 1.0], vec![vec![0.0, 0.0, 1.0], vec![0.0, 1.0]]),
            ],
        )),
        none(poly(
            "mean and y^2 + r2^2 + 1",
            vec![
                (vec![0.0, 1.0], vec![vec![0.0, 1.0], vec![]]),
                (vec![1.0, 0.0, 1.0], vec![vec![], vec![0.0, 0.0, -1.0]]),
            ],
        )),
        root(Arc::new(PolynomialIdentification::moments(3))),
        root(poly(
            "first, second and fourth moments",
            vec![
                (vec![0.0, 1.0], vec![vec![0.0, 1.0], vec![], vec![]]),
                (vec![0.0, 0.0, 1.0], vec![vec![], vec![0.0, 1.0], vec![]]),
                (vec![0.0, 0.0, 0.0, 0.0, 1.0], vec![vec![], vec![], vec![0.0, 1.0]]),
            ],
        )),
        root(Arc::new(FnIdentification::new(3, "mean and central moments 2, 3", |r, y| {
            let c = y - r[0];
            vec![c, c * c - r[1], c * c * c - r[2]]
        }))),
        root(quantiles(&[0.25, 0.5, 0.75])),
        none(poly(
            "moments 1, 2 and r3^2 + 1",
            vec![
                (vec![0.0, 1.0], vec![vec![0.0, 1.0], vec![], vec![]]),
                (vec![0.0, 0.0, 1.0], vec![vec![], vec![0.0, 1.0], vec![]]),
                (vec![1.0], vec![vec![], vec![], vec![0.0, 0.0, -1.0]]),
            ],
        )),
    ]
}
