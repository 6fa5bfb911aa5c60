//! Runs the certifier over the shipped battery of identification functions
//! on both families and re-checks every certificate with Simpson
//! quadrature.

use std::time::Instant;

use modal_lab::complexity::{battery, certify};
use modal_lab::{Error, Family};
use rayon::prelude::*;

fn main() {
    let start = Instant::now();
    let jobs: Vec<_> = battery()
        .into_iter()
        .flat_map(|e| [(e.clone(), Family::Bump), (e, Family::Gaussian)])
        .collect();
    let lines: Vec<String> = jobs
        .par_iter()
        .map(|(entry, family)| {
            let v = entry.v.as_ref();
            let k = v.dim();
            let t = match family {
                Family::Bump => k + 1,
                Family::Gaussian => (k + 1).max(6),
            };
            let head = format!("{:<36} {:<8} t={t}", v.description(), family.to_string());
            match certify(v, *family, t, 1.0) {
                Ok(c) => {
                    let check = c.reverify(v).expect("re-check runs");
                    let res = check.residual.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                    format!(
                        "{head} certified: mode {:.6} -> {:.6}, case {}, simpson residual {res:.1e}, re-check {}",
                        c.mode_original,
                        c.mode_perturbed,
                        c.case_tag,
                        if check.passed { "ok" } else { "FAILED" }
                    )
                }
                Err(Error::NoRoot(msg)) => format!("{head} no root: {msg}"),
                Err(e) => format!("{head} ERROR: {e}"),
            }
        })
        .collect();
    for l in lines {
        println!("{l}");
    }
    println!("{} runs in {:.1?}", jobs.len(), start.elapsed());
}
