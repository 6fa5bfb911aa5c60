//! End-to-end construction and certification of a counterexample pair.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::config::DensitySpec;
use crate::elicitation::{expected_identification, Identification};
use crate::error::{domain, Error, Result};
use crate::mixtures::{Family, MixtureDensity};
use crate::optimize::linspace;
use crate::quadrature::simpson;

use super::construction::{
    alpha_select, build_moment_matrix, nullspace_vector, CaseTag, KernelVector,
};
use super::schedule::{bump_height_schedule, gaussian_scenario, HeightSchedule};

/// Bound on `‖E_{p'} V(r, Y)‖∞` for a certificate to be issued.
pub const CERTIFICATION_TOL: f64 = 1e-8;

/// Bound used when re-checking a certificate with an independent rule.
pub const REVERIFY_TOL: f64 = 1e-7;

const NEWTON_STEP: f64 = 1e-5;
const NEWTON_TOL: f64 = 1e-12;
const NEWTON_ACCEPT: f64 = 1e-9;
const NEWTON_MAX_ITER: usize = 100;

#[derive(Debug, Clone, Default)]
pub struct CertifyOptions {
    /// Use this report instead of solving `E_p V(r, Y) = 0`.
    pub report: Option<Vec<f64>>,
    /// Starting point of the root search (every coordinate at the mean of
    /// the original density by default).
    pub initial_guess: Option<Vec<f64>>,
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

/// Solves `E_d V(r, Y) = 0` by damped Newton iteration with a central
/// difference Jacobian. The difference step widens for coordinates where
/// `E V` is locally flat (gaps between bumps). For scalar reports a failed
/// Newton run falls back to a sign-change scan over the support.
pub fn find_identification_root(
    v: &dyn Identification,
    d: &MixtureDensity,
    guess: &[f64],
) -> Result<Vec<f64>> {
    let k = v.dim();
    if guess.len() != k {
        return Err(domain(format!("initial guess has length {}, expected {k}", guess.len())));
    }
    match newton(v, d, guess) {
        Err(Error::NoRoot(msg)) if k == 1 => scan_root(v, d).ok_or(Error::NoRoot(msg)),
        other => other,
    }
}

fn newton(v: &dyn Identification, d: &MixtureDensity, guess: &[f64]) -> Result<Vec<f64>> {
    let k = v.dim();
    let f = |r: &[f64]| expected_identification(v, d, r);
    let width = {
        let (lo, hi) = d.support();
        (hi - lo).max(1.0)
    };
    let mut r = guess.to_vec();
    let mut fr = f(&r)?;
    for _ in 0..NEWTON_MAX_ITER {
        let norm = sup_norm(&fr);
        if norm <= NEWTON_TOL {
            return Ok(r);
        }
        let mut jac = DMatrix::zeros(k, k);
        for l in 0..k {
            let mut step = NEWTON_STEP * r[l].abs().max(1.0);
            loop {
                let mut plus = r.clone();
                let mut minus = r.clone();
                plus[l] += step;
                minus[l] -= step;
                let (fp, fm) = (f(&plus)?, f(&minus)?);
                for j in 0..k {
                    jac[(j, l)] = (fp[j] - fm[j]) / (2.0 * step);
                }
                if (0..k).any(|j| jac[(j, l)] != 0.0) || step > width {
                    break;
                }
                step *= 8.0;
            }
        }
        let rhs = -DVector::from_column_slice(&fr);
        let Some(delta) = jac.lu().solve(&rhs) else {
            if norm <= NEWTON_ACCEPT {
                return Ok(r);
            }
            return Err(Error::NoRoot(format!(
                "singular Jacobian at r = {r:?} with |E V| = {norm:e}; {} does not vanish \
                 on the original density",
                v.description()
            )));
        };
        let mut lambda = 1.0;
        let mut improved = None;
        while lambda > 1e-10 {
            let trial: Vec<f64> = r.iter().zip(delta.iter()).map(|(a, b)| a + lambda * b).collect();
            let ft = f(&trial)?;
            if sup_norm(&ft) < norm {
                improved = Some((trial, ft));
                break;
            }
            lambda *= 0.5;
        }
        match improved {
            Some((trial, ft)) => {
                r = trial;
                fr = ft;
            }
            None if norm <= NEWTON_ACCEPT => return Ok(r),
            None => {
                return Err(Error::NoRoot(format!(
                    "Newton iteration stalled at r = {r:?} with |E V| = {norm:e}; {} has no \
                     root on the original density",
                    v.description()
                )))
            }
        }
    }
    if sup_norm(&fr) <= NEWTON_ACCEPT {
        return Ok(r);
    }
    Err(Error::NoRoot(format!(
        "no convergence after {NEWTON_MAX_ITER} iterations (r = {r:?}, |E V| = {:e})",
        sup_norm(&fr)
    )))
}

fn scan_root(v: &dyn Identification, d: &MixtureDensity) -> Option<Vec<f64>> {
    let f = |r: f64| expected_identification(v, d, &[r]).ok().map(|e| e[0]);
    let (lo, hi) = d.support();
    let span = hi - lo;
    let grid = linspace(lo - span, hi + span, 2001);
    let mut prev = (grid[0], f(grid[0])?);
    for &x in &grid[1..] {
        let fx = f(x)?;
        if fx == 0.0 {
            return Some(vec![x]);
        }
        if prev.1.signum() != fx.signum() {
            let (mut a, mut b, fa) = (prev.0, x, prev.1);
            while b - a > 1e-14 * a.abs().max(1.0) {
                let m = 0.5 * (a + b);
                let fm = f(m)?;
                if fm == 0.0 {
                    return Some(vec![m]);
                }
                if fm.signum() == fa.signum() {
                    a = m;
                } else {
                    b = m;
                }
            }
            let m = 0.5 * (a + b);
            return (f(m)?.abs() <= NEWTON_ACCEPT).then(|| vec![m]);
        }
        prev = (x, fx);
    }
    None
}

/// Two densities with a common root of `E V(r, Y)` and different modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleCertificate {
    pub v_description: String,
    pub family: Family,
    pub t: usize,
    pub eps: f64,
    pub report: Vec<f64>,
    pub schedule: HeightSchedule,
    pub moment_matrix: Vec<Vec<f64>>,
    pub kernel: KernelVector,
    pub case_tag: CaseTag,
    /// Component index of the leading kernel entry.
    pub leading: usize,
    pub alpha: f64,
    pub beta: f64,
    pub original: DensitySpec,
    pub perturbed: DensitySpec,
    /// `E_p V(r, Y)` on the original density.
    pub original_residual: Vec<f64>,
    /// `E_{p'} V(r, Y)` on the perturbed density.
    pub identification_residual: Vec<f64>,
    pub mode_original: f64,
    pub mode_perturbed: f64,
    pub ball_original: usize,
    pub ball_perturbed: usize,
    /// Components whose perturbed weight is exactly zero.
    pub zero_weights: Vec<usize>,
}

impl CounterexampleCertificate {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Internal(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn original_density(&self) -> Result<MixtureDensity> {
        self.original.to_density()
    }

    pub fn perturbed_density(&self) -> Result<MixtureDensity> {
        self.perturbed.to_density()
    }

    /// Re-checks the certificate from its recorded densities, using
    /// composite Simpson quadrature for the expectations and a dense grid
    /// for the modes.
    pub fn reverify(&self, v: &dyn Identification) -> Result<Reverification> {
        let p = self.original_density()?;
        let q = self.perturbed_density()?;
        let residual = simpson_expectation(v, &q, &self.report)?;
        let mode_original = grid_mode(&p);
        let mode_perturbed = grid_mode(&q);
        let ball_original = self.schedule.ball_index(mode_original);
        let ball_perturbed = self.schedule.ball_index(mode_perturbed);
        let passed = sup_norm(&residual) <= REVERIFY_TOL
            && ball_original.is_some()
            && ball_perturbed.is_some()
            && ball_original != ball_perturbed
            && q.weights().iter().all(|w| *w >= 0.0);
        Ok(Reverification {
            residual,
            mode_original,
            mode_perturbed,
            ball_original,
            ball_perturbed,
            passed,
        })
    }
}

/// Outcome of [`CounterexampleCertificate::reverify`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reverification {
    pub residual: Vec<f64>,
    pub mode_original: f64,
    pub mode_perturbed: f64,
    pub ball_original: Option<usize>,
    pub ball_perturbed: Option<usize>,
    pub passed: bool,
}

fn simpson_expectation(v: &dyn Identification, d: &MixtureDensity, r: &[f64]) -> Result<Vec<f64>> {
    let mut cuts: Vec<f64> = v.breakpoints(r);
    let mut out = vec![0.0; v.dim()];
    for (comp, w) in d.components().iter().zip(d.weights()) {
        if *w == 0.0 {
            continue;
        }
        let (lo, hi) = comp.support();
        cuts.retain(|c| c.is_finite());
        let mut pts = vec![lo, hi];
        pts.extend(cuts.iter().copied().filter(|c| *c > lo && *c < hi));
        pts.sort_by(f64::total_cmp);
        for j in 0..v.dim() {
            let mut s = 0.0;
            for seg in pts.windows(2) {
                s += simpson(|y| comp.pdf(y) * v.evaluate(r, y)[j], seg[0], seg[1], 1e-10)?;
            }
            out[j] += w * s;
        }
    }
    Ok(out)
}

fn grid_mode(d: &MixtureDensity) -> f64 {
    let (lo, hi) = d.support();
    let mut best = (lo, f64::NEG_INFINITY);
    for x in linspace(lo, hi, 200_001) {
        let v = d.pdf(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    best.0
}

/// Builds and certifies a counterexample with default options.
///
/// `eps` is the bump half-width; Gaussian schedules have a fixed geometry
/// and ignore it.
pub fn certify(
    v: &dyn Identification,
    family: Family,
    t: usize,
    eps: f64,
) -> Result<CounterexampleCertificate> {
    certify_with(v, family, t, eps, &CertifyOptions::default())
}

pub fn schedule_for(family: Family, t: usize, eps: f64) -> Result<HeightSchedule> {
    match family {
        Family::Bump => {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(domain(format!("eps must be positive, got {eps}")));
            }
            bump_height_schedule(t)?.with_half_width(eps)
        }
        Family::Gaussian => gaussian_scenario(t),
    }
}

pub fn certify_with(
    v: &dyn Identification,
    family: Family,
    t: usize,
    eps: f64,
    opts: &CertifyOptions,
) -> Result<CounterexampleCertificate> {
    let k = v.dim();
    if t <= k {
        return Err(domain(format!(
            "kernel existence requires t > k (t = {t}, k = {k})"
        )));
    }
    let schedule = schedule_for(family, t, eps)?;
    let p = schedule.density()?;
    let report = match &opts.report {
        Some(r) => r.clone(),
        None => {
            let guess = match &opts.initial_guess {
                Some(g) => g.clone(),
                None => vec![p.mean()?; k],
            };
            find_identification_root(v, &p, &guess)?
        }
    };
    let original_residual = expected_identification(v, &p, &report)?;
    if sup_norm(&original_residual) > CERTIFICATION_TOL {
        return Err(Error::NoRoot(format!(
            "report {report:?} leaves |E_p V| = {:e} on the original density",
            sup_norm(&original_residual)
        )));
    }
    let m = build_moment_matrix(v, &report, &schedule)?;
    let kernel = nullspace_vector(&m)?;
    let sel = alpha_select(&schedule, &kernel.values)?;
    let raw = sel.raw_weights(schedule.values());
    let beta = 1.0 / raw.iter().sum::<f64>();
    let weights: Vec<f64> = raw.iter().map(|w| beta * w).collect();
    let zero_weights = weights
        .iter()
        .enumerate()
        .filter(|(_, w)| **w == 0.0)
        .map(|(i, _)| i)
        .collect();
    if weights.iter().any(|w| *w < 0.0) {
        return Err(Error::Certification("negative perturbed weight".into()));
    }
    let q = schedule.density_with(&weights)?;
    let identification_residual = expected_identification(v, &q, &report)?;
    let res = sup_norm(&identification_residual);
    if res > CERTIFICATION_TOL {
        return Err(Error::Certification(format!(
            "identification residual {res:e} on the perturbed density exceeds {CERTIFICATION_TOL:e}"
        )));
    }
    let mo = p.mode()?;
    let mq = q.mode()?;
    if !(mo.unique && mq.unique) {
        return Err(Error::Certification("a density of the pair is not unimodal".into()));
    }
    let (Some(bo), Some(bq)) = (schedule.ball_index(mo.location), schedule.ball_index(mq.location))
    else {
        return Err(Error::Certification(format!(
            "modes {} and {} are not inside component balls",
            mo.location, mq.location
        )));
    };
    if bo == bq {
        return Err(Error::Certification(format!(
            "both modes lie in the ball of component {bo}"
        )));
    }
    Ok(CounterexampleCertificate {
        v_description: v.description(),
        family,
        t,
        eps: match family {
            Family::Bump => eps,
            Family::Gaussian => schedule.radius(),
        },
        report,
        moment_matrix: m.rows(),
        kernel,
        case_tag: sel.case,
        leading: sel.leading,
        alpha: sel.alpha,
        beta,
        original: DensitySpec::from_density(&p),
        perturbed: DensitySpec::from_density(&q),
        original_residual,
        identification_residual,
        mode_original: mo.location,
        mode_perturbed: mq.location,
        ball_original: bo,
        ball_perturbed: bq,
        zero_weights,
        schedule,
    })
}

/// Where the modal midpoints of a certified pair fall relative to the
/// widened ball `B_{2σ}(x_0)`. Reported, not asserted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModalDisplacement {
    pub eps: f64,
    pub midpoint_original: Option<f64>,
    pub midpoint_perturbed: Option<f64>,
    pub radius: f64,
    /// Original midpoint inside the widened ball and perturbed one outside.
    pub displaced: bool,
}

pub fn modal_displacement(cert: &CounterexampleCertificate, eps: f64) -> Result<ModalDisplacement> {
    let p = cert.original_density()?;
    let q = cert.perturbed_density()?;
    let x0 = cert.schedule.center(0);
    let radius = 2.0 * cert.schedule.radius();
    let midpoint_original = p.modal_midpoint(eps).ok();
    let midpoint_perturbed = q.modal_midpoint(eps).ok();
    let displaced = matches!(
        (midpoint_original, midpoint_perturbed),
        (Some(a), Some(b)) if (a - x0).abs() <= radius && (b - x0).abs() > radius
    );
    Ok(ModalDisplacement {
        eps,
        midpoint_original,
        midpoint_perturbed,
        radius,
        displaced,
    })
}
