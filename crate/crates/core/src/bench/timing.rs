//! Wall-clock comparison of the nonparametric and the condensed parametric element.

use std::time::{Duration, Instant};

use crate::assembly::ElementKind;
use crate::bench::problems::ProblemSpec;
use crate::bench::solve::{self, SolveOptions};
use crate::bench::study::MeshFamily;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct TimingConfig {
    pub problem: ProblemSpec,
    pub family: MeshFamily,
    pub levels: Vec<usize>,
    /// Numerator of the ratio.
    pub first: ElementKind,
    /// Denominator of the ratio.
    pub second: ElementKind,
    /// Runs per measurement; the median is reported.
    pub runs: usize,
    pub solve: SolveOptions,
}

impl TimingConfig {
    pub fn new(family: MeshFamily, levels: &[usize]) -> Self {
        TimingConfig {
            problem: ProblemSpec::poisson(),
            family,
            levels: levels.to_vec(),
            first: ElementKind::nonparametric(0.0),
            second: ElementKind::parametric(),
            runs: 3,
            solve: SolveOptions::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimingRow {
    pub n: usize,
    pub h: f64,
    pub t_first: Duration,
    pub t_second: Duration,
    pub ratio: f64,
}

/// Median wall-clock time of assembling and solving on `mesh`.
///
/// Mesh generation is outside the timed region; basis construction,
/// assembly, condensation and the linear solve are inside it.
pub fn time_solve(mesh: &crate::mesh::Mesh, kind: ElementKind, problem: &ProblemSpec, opts: SolveOptions, runs: usize) -> Result<Duration> {
    if runs == 0 {
        return Err(Error::BadParam("timing needs at least one run".into()));
    }
    let mut samples = Vec::with_capacity(runs);
    for _ in 0..runs {
        let start = Instant::now();
        let sol = solve::solve(mesh, kind, problem, opts)?;
        samples.push(start.elapsed());
        std::hint::black_box(&sol);
    }
    samples.sort();
    Ok(samples[runs / 2])
}

/// `t(first) / t(second)` at each level; runs of the two kinds are interleaved.
pub fn timing_ratio_with(config: &TimingConfig, mut on_row: impl FnMut(&TimingRow)) -> Result<Vec<TimingRow>> {
    let mut rows = Vec::with_capacity(config.levels.len());
    for &n in &config.levels {
        let mesh = config.family.build(n)?;
        // warm-up, so the first measured kind does not pay for cold caches
        solve::solve(&mesh, config.first, &config.problem, config.solve)?;
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for _ in 0..config.runs.max(1) {
            a.push(time_solve(&mesh, config.first, &config.problem, config.solve, 1)?);
            b.push(time_solve(&mesh, config.second, &config.problem, config.solve, 1)?);
        }
        a.sort();
        b.sort();
        let (t_first, t_second) = (a[a.len() / 2], b[b.len() / 2]);
        let row = TimingRow {
            n,
            h: 1.0 / n as f64,
            t_first,
            t_second,
            ratio: t_first.as_secs_f64() / t_second.as_secs_f64(),
        };
        on_row(&row);
        rows.push(row);
    }
    Ok(rows)
}

pub fn timing_ratio(config: &TimingConfig) -> Result<Vec<TimingRow>> {
    timing_ratio_with(config, |_| {})
}

/// True when the ratios never drop by more than `slack` as `h` decreases.
pub fn nondecreasing_within(ratios: &[f64], slack: f64) -> bool {
    ratios.windows(2).all(|w| w[1] >= w[0] - slack)
}

pub const CSV_HEADER: &str = "h,t_np,t_p,ratio";

pub fn to_csv(rows: &[TimingRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{:.6},{:.6},{:.4}\n",
            r.h,
            r.t_first.as_secs_f64(),
            r.t_second.as_secs_f64(),
            r.ratio
        ));
    }
    out
}

pub fn to_markdown(rows: &[TimingRow]) -> String {
    let mut out = String::from("| h | t(np) [s] | t(p) [s] | ratio |\n|---|---|---|---|\n");
    for r in rows {
        out.push_str(&format!(
            "| 1/{} | {:.4} | {:.4} | {:.4} |\n",
            r.n,
            r.t_first.as_secs_f64(),
            r.t_second.as_secs_f64(),
            r.ratio
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trend_check() {
        assert!(nondecreasing_within(&[0.68, 0.73, 0.71, 0.79], 0.05));
        assert!(!nondecreasing_within(&[0.8, 0.7], 0.05));
    }

    #[test]
    fn rows_cover_levels() {
        let mut cfg = TimingConfig::new(MeshFamily::Theta { theta: 0.7 }, &[4, 8]);
        cfg.runs = 1;
        let rows = timing_ratio(&cfg).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.ratio.is_finite() && r.ratio > 0.0));
        assert!(to_csv(&rows).starts_with(CSV_HEADER));
    }

    #[test]
    fn zero_runs_rejected() {
        let m = crate::mesh::theta_mesh(4, 0.0).unwrap();
        let r = time_solve(&m, ElementKind::parametric(), &ProblemSpec::poisson(), SolveOptions::default(), 0);
        assert!(r.is_err());
    }
}
