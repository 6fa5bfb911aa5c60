//! Moment matrix, kernel direction and step length of the perturbation
//! `p' = β(p + α Σ h'_i·component_i)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::elicitation::{expected_identification, Identification};
use crate::error::{domain, Error, Result};
use crate::mixtures::{Family, MixtureDensity};

use super::schedule::HeightSchedule;

/// Relative tolerance on `‖M h'‖∞ / ‖M‖∞`.
pub const KERNEL_TOL: f64 = 1e-8;

/// Maximum number of step lengths tried before giving up.
pub const MAX_ALPHA_ATTEMPTS: usize = 64;

/// `k × t` matrix whose column `i` is `E_{component_i} V(r, Y)` for
/// components `1..=t` (component 0 is left out).
#[derive(Debug, Clone, PartialEq)]
pub struct MomentMatrix {
    pub entries: DMatrix<f64>,
    pub report: Vec<f64>,
    pub family: Family,
}

impl MomentMatrix {
    pub fn from_rows(rows: &[Vec<f64>], report: Vec<f64>, family: Family) -> Result<Self> {
        let k = rows.len();
        let t = rows.first().map_or(0, Vec::len);
        if k == 0 || t == 0 || rows.iter().any(|r| r.len() != t) {
            return Err(domain("moment matrix rows must be nonempty and of equal length"));
        }
        Ok(Self {
            entries: DMatrix::from_fn(k, t, |j, i| rows[j][i]),
            report,
            family,
        })
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        self.entries
            .row_iter()
            .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, h: &[f64]) -> Vec<f64> {
        let v = &self.entries * nalgebra::DVector::from_column_slice(h);
        v.iter().copied().collect()
    }
}

pub fn build_moment_matrix(
    v: &dyn Identification,
    r: &[f64],
    schedule: &HeightSchedule,
) -> Result<MomentMatrix> {
    let k = v.dim();
    let t = schedule.t();
    if t <= k {
        return Err(domain(format!(
            "kernel existence requires t > k (t = {t}, k = {k})"
        )));
    }
    let mut entries = DMatrix::zeros(k, t);
    for i in 1..=t {
        let single = MixtureDensity::new(vec![schedule.component(i)?], vec![1.0])?;
        let col = expected_identification(v, &single, r)?;
        for (j, x) in col.into_iter().enumerate() {
            entries[(j, i - 1)] = x;
        }
    }
    Ok(MomentMatrix {
        entries,
        report: r.to_vec(),
        family: schedule.family(),
    })
}

/// A direction `h'` with `M h' ≈ 0`, scaled so that `‖h'‖∞ = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelVector {
    pub values: Vec<f64>,
    /// `‖M h'‖∞`.
    pub residual: f64,
}

/// Right singular vector of the smallest singular value of `M` (padded with
/// zero rows to a square matrix), with its largest entry made positive.
pub fn nullspace_vector(m: &MomentMatrix) -> Result<KernelVector> {
    let (k, t) = m.entries.shape();
    if t <= k {
        return Err(domain(format!(
            "kernel existence requires t > k (t = {t}, k = {k})"
        )));
    }
    let mut padded = DMatrix::zeros(t, t);
    padded.view_mut((0, 0), (k, t)).copy_from(&m.entries);
    let svd = padded.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Numeric("singular value decomposition failed".into()))?;
    let smallest = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::Internal("empty spectrum".into()))?;
    let mut values: Vec<f64> = v_t.row(smallest).iter().copied().collect();
    let (imax, vmax) = values
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |acc, (i, x)| if x.abs() > acc.1.abs() { (i, *x) } else { acc });
    if vmax == 0.0 {
        return Err(Error::Numeric("kernel direction vanished".into()));
    }
    let scale = 1.0 / vmax;
    for x in &mut values {
        *x *= scale;
    }
    values[imax] = 1.0;
    let residual = m.apply(&values).iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if residual > KERNEL_TOL * m.inf_norm() {
        return Err(Error::Numeric(format!(
            "kernel residual {residual:e} exceeds {KERNEL_TOL:e} x ‖M‖∞ = {:e}",
            m.inf_norm()
        )));
    }
    Ok(KernelVector { values, residual })
}

/// Sign pattern of the kernel direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseTag {
    AllNonneg,
    AllNonpos,
    MixedSign,
}

impl std::fmt::Display for CaseTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CaseTag::AllNonneg => "all-nonneg",
            CaseTag::AllNonpos => "all-nonpos",
            CaseTag::MixedSign => "mixed-sign",
        })
    }
}

/// The chosen step length and how it was found.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaSelection {
    pub alpha: f64,
    /// Kernel direction after orientation (negated in the all-nonpositive
    /// case and, in the mixed case, so that the leading entry is positive).
    pub direction: Vec<f64>,
    pub case: CaseTag,
    /// Component index (in `1..=t`) of the leading kernel entry.
    pub leading: usize,
    pub lower: f64,
    pub upper: Option<f64>,
    /// Number of step lengths tried.
    pub attempts: usize,
}

impl AlphaSelection {
    /// Unnormalized perturbed weights `h_0, h_i + α h'_i`.
    pub fn raw_weights(&self, h: &[f64]) -> Vec<f64> {
        let mut w = h.to_vec();
        for (i, d) in self.direction.iter().enumerate() {
            w[i + 1] += self.alpha * d;
        }
        w
    }
}

/// Van der Corput fractions 1/2, 1/4, 3/4, 1/8, 5/8, ...
fn van_der_corput(n: usize) -> f64 {
    let (mut n, mut denom, mut x) = (n + 1, 1.0, 0.0);
    while n > 0 {
        denom *= 2.0;
        x += (n & 1) as f64 / denom;
        n >>= 1;
    }
    x
}

struct Oriented {
    direction: Vec<f64>,
    case: CaseTag,
    /// Position in `direction` (zero-based).
    lead: usize,
}

fn orient(h: &[f64], hprime: &[f64]) -> Result<Oriented> {
    if hprime.len() + 1 != h.len() {
        return Err(domain(format!(
            "kernel direction of length {} for {} heights",
            hprime.len(),
            h.len()
        )));
    }
    let max_abs = hprime.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if !(max_abs > 0.0 && max_abs.is_finite()) {
        return Err(domain("kernel direction must be nontrivial and finite"));
    }
    let nonneg = hprime.iter().all(|x| *x >= 0.0);
    let nonpos = hprime.iter().all(|x| *x <= 0.0);
    let (case, mut direction) = if nonneg {
        (CaseTag::AllNonneg, hprime.to_vec())
    } else if nonpos {
        (CaseTag::AllNonpos, hprime.iter().map(|x| -x).collect())
    } else {
        (CaseTag::MixedSign, hprime.to_vec())
    };
    // Largest magnitude; ties go to the component with the larger initial
    // height.
    let lead = (0..direction.len())
        .filter(|&i| direction[i].abs() >= max_abs * (1.0 - 1e-9))
        .max_by(|&a, &b| h[a + 1].total_cmp(&h[b + 1]).then(b.cmp(&a)))
        .unwrap_or(0);
    if direction[lead] < 0.0 {
        for x in &mut direction {
            *x = -*x;
        }
    }
    Ok(Oriented { direction, case, lead })
}

fn upper_bound(h: &[f64], direction: &[f64]) -> Option<f64> {
    direction
        .iter()
        .enumerate()
        .filter(|(_, d)| **d < 0.0)
        .map(|(i, d)| h[i + 1] / d.abs())
        .reduce(f64::min)
}

fn select(
    schedule: &HeightSchedule,
    o: Oriented,
    lower: f64,
    excluded: &[f64],
) -> Result<AlphaSelection> {
    let h = schedule.values();
    let upper = match o.case {
        CaseTag::MixedSign => upper_bound(h, &o.direction),
        _ => None,
    };
    if let Some(u) = upper {
        if !(lower < u) {
            return Err(Error::Contract(format!(
                "empty step interval ({lower}, {u}]"
            )));
        }
    }
    let mut sel = AlphaSelection {
        alpha: f64::NAN,
        direction: o.direction,
        case: o.case,
        leading: o.lead + 1,
        lower,
        upper,
        attempts: 0,
    };
    let x0 = schedule.center(0);
    for n in 0..MAX_ALPHA_ATTEMPTS {
        let frac = van_der_corput(n);
        let alpha = match upper {
            Some(u) => lower + (u - lower) * frac,
            None => lower + 2.0 * frac,
        };
        sel.alpha = alpha;
        sel.attempts = n + 1;
        if excluded
            .iter()
            .any(|e| (alpha - e).abs() <= 1e-12 * alpha.abs().max(1.0))
        {
            continue;
        }
        let w = sel.raw_weights(h);
        if w.iter().any(|x| *x < 0.0) {
            continue;
        }
        let Ok(d) = schedule.density_with(&w) else { continue };
        match d.mode() {
            Ok(m) if m.unique && (m.location - x0).abs() > schedule.radius() => return Ok(sel),
            _ => continue,
        }
    }
    Err(Error::Internal(format!(
        "no admissible step length after {MAX_ALPHA_ATTEMPTS} attempts in ({lower}, {upper:?})"
    )))
}

/// Step length for a bump schedule: large enough that the leading
/// component overtakes component 0, small enough to keep weights
/// nonnegative, and away from values where two perturbed heights tie.
pub fn alpha_select_bump(schedule: &HeightSchedule, hprime: &[f64]) -> Result<AlphaSelection> {
    if schedule.family() != Family::Bump {
        return Err(domain("bump step selection on a non-bump schedule"));
    }
    let h = schedule.values();
    let o = orient(h, hprime)?;
    let (il, dl) = (o.lead + 1, o.direction[o.lead]);
    let lower = (h[0] - h[il]) / dl;
    let excluded: Vec<f64> = o
        .direction
        .iter()
        .enumerate()
        .filter(|(i, d)| *i != o.lead && **d > 0.0 && **d < dl)
        .map(|(i, d)| (h[il] - h[i + 1]).abs() / (dl - d))
        .collect();
    select(schedule, o, lower, &excluded)
}

/// Step length for a unit-height Gaussian schedule; the lower bound absorbs
/// the neighbour leakage `γ`.
pub fn alpha_select_gaussian(schedule: &HeightSchedule, hprime: &[f64]) -> Result<AlphaSelection> {
    if schedule.family() != Family::Gaussian {
        return Err(domain("gaussian step selection on a non-gaussian schedule"));
    }
    let h = schedule.values();
    let gamma = schedule.gamma();
    let o = orient(h, hprime)?;
    let (il, dl) = (o.lead + 1, o.direction[o.lead]);
    let others: f64 = o
        .direction
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != o.lead)
        .map(|(_, d)| d)
        .sum();
    let denom = dl - gamma * others;
    if !(denom > 0.0) {
        return Err(Error::Internal(format!(
            "nonpositive step denominator {denom}"
        )));
    }
    let lower = (h[0] - h[il] + gamma) / denom;
    select(schedule, o, lower, &[])
}

pub fn alpha_select(schedule: &HeightSchedule, hprime: &[f64]) -> Result<AlphaSelection> {
    match schedule.family() {
        Family::Bump => alpha_select_bump(schedule, hprime),
        Family::Gaussian => alpha_select_gaussian(schedule, hprime),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexity::schedule::{bump_height_schedule, gaussian_scenario, Geometry};
    use crate::elicitation::PolynomialIdentification;

    fn matrix(rows: &[&[f64]]) -> MomentMatrix {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        MomentMatrix::from_rows(&rows, vec![0.0], Family::Bump).unwrap()
    }

    #[test]
    fn van_der_corput_sequence() {
        let xs: Vec<f64> = (0..5).map(van_der_corput).collect();
        assert_eq!(xs, vec![0.5, 0.25, 0.75, 0.125, 0.625]);
    }

    #[test]
    fn small_kernels() {
        let k = nullspace_vector(&matrix(&[&[1.0, 1.0]])).unwrap();
        assert!((k.values[0] + k.values[1]).abs() < 1e-15);
        assert_eq!(k.values.iter().fold(0.0f64, |a, x| a.max(x.abs())), 1.0);
        let k = nullspace_vector(&matrix(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]])).unwrap();
        assert!(k.values[0].abs() < 1e-15 && k.values[1].abs() < 1e-15);
        assert_eq!(k.values[2], 1.0);
        assert!(nullspace_vector(&matrix(&[&[1.0], &[2.0]])).is_err());
    }

    #[test]
    fn mean_moment_matrix() {
        let s = bump_height_schedule(2).unwrap();
        let m = build_moment_matrix(&PolynomialIdentification::mean(), &[0.0], &s).unwrap();
        assert!((m.entries[(0, 0)] - 4.0).abs() < 1e-12);
        assert!((m.entries[(0, 1)] - 8.0).abs() < 1e-12);
        let v3 = PolynomialIdentification::moments(3);
        assert!(build_moment_matrix(&v3, &[0.0; 3], &s).is_err());
    }

    #[test]
    fn all_nonneg_bump_step() {
        let s = HeightSchedule::new(vec![0.4, 0.35, 0.25], Geometry::Bump { half_width: 1.0 })
            .unwrap();
        let sel = alpha_select_bump(&s, &[1.0, 1.0]).unwrap();
        assert_eq!(sel.case, CaseTag::AllNonneg);
        assert_eq!(sel.leading, 1);
        assert!((sel.lower - 0.05).abs() < 1e-15);
        assert!((sel.alpha - 1.05).abs() < 1e-15);
        let neg = alpha_select_bump(&s, &[-1.0, -1.0]).unwrap();
        assert_eq!(neg.case, CaseTag::AllNonpos);
        assert_eq!(neg.alpha, sel.alpha);
        assert_eq!(neg.direction, sel.direction);
    }

    #[test]
    fn mixed_sign_steps_keep_weights_nonnegative() {
        let s = bump_height_schedule(3).unwrap();
        let sel = alpha_select_bump(&s, &[0.3, -1.0, 0.8]).unwrap();
        assert_eq!(sel.case, CaseTag::MixedSign);
        let u = sel.upper.unwrap();
        assert!(sel.lower < sel.alpha && sel.alpha <= u);
        assert!(sel.raw_weights(s.values()).iter().all(|w| *w >= 0.0));

        let g = gaussian_scenario(6).unwrap();
        let sel = alpha_select_gaussian(&g, &[1.0, -0.5, 0.2, -0.9, 0.0, 0.4]).unwrap();
        assert!(sel.lower < sel.upper.unwrap());
        let w = sel.raw_weights(g.values());
        assert_eq!(w[5], g.values()[5]);
        let m = g.density_with(&w).unwrap().mode().unwrap();
        assert!(m.location.abs() > g.radius());
    }
}
