use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::guarantees::TheoremId;

use super::config::SweepConfig;
use super::run::{execute, prepare, RunOutput};

#[derive(Debug, Clone)]
pub struct SweepRun {
    pub replicate: usize,
    pub seed: u64,
    pub output: RunOutput,
}

/// Replicates passing the coupling-scaling observations.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderingReport {
    pub replicates: usize,
    /// Replicates whose tail values fall strictly as `κ0` grows.
    pub decreasing_passes: usize,
    /// Per `κ0 > 1`: replicates with `√κ0 B(κ0) < B(1) < κ0 B(κ0)`.
    pub bounding: Vec<BoundingPasses>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingPasses {
    pub kappa0: f64,
    pub passes: usize,
}

impl OrderingReport {
    /// The stochastic pass rule: at least four replicates in five.
    pub fn quorum(&self, passes: usize) -> bool {
        5 * passes >= 4 * self.replicates
    }

    pub fn decreasing_ok(&self) -> bool {
        self.quorum(self.decreasing_passes)
    }

    pub fn bounding_ok(&self, passes: usize) -> bool {
        self.quorum(passes)
    }
}

/// Tally of the practical-aggregation tail checks across a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PracticalTally {
    pub checked: usize,
    pub passed: usize,
    pub not_applicable: usize,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub config: SweepConfig,
    /// Replicate-major, then ascending `κ0`.
    pub runs: Vec<SweepRun>,
    pub ordering: Option<OrderingReport>,
    pub practical: PracticalTally,
    /// Least-squares slope of mean `log B` against `log κ0` over `κ0 > 1`.
    pub slope: Option<f64>,
}

impl SweepReport {
    /// `B(κ0)` per replicate, rows indexed like `config.kappa0_values`.
    pub fn tails(&self) -> Vec<Vec<f64>> {
        let k = self.config.kappa0_values.len();
        self.runs
            .chunks(k)
            .map(|c| c.iter().map(|r| r.output.tail_sup_j_m).collect())
            .collect()
    }

    pub fn all_envelopes_hold(&self) -> bool {
        self.runs.iter().all(|r| r.output.envelopes_hold())
    }
}

/// Run every `(replicate, κ0)` pair. Replicate `r` uses seed `base.seed + r`,
/// and all couplings of one replicate share `Ω_j`, `W0`, `W1` and initial data.
pub fn run_sweep(sweep: &SweepConfig) -> Result<SweepReport> {
    sweep.validate().map_err(Error::InvalidParameter)?;
    let seeds: Vec<u64> = (0..sweep.replicates).map(|r| sweep.base.seed + r as u64).collect();
    let prepared = seeds
        .par_iter()
        .map(|&seed| {
            let mut cfg = sweep.base.clone();
            cfg.seed = seed;
            prepare(&cfg, &sweep.kappa0_values)
        })
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, f64)> = (0..sweep.replicates)
        .flat_map(|r| sweep.kappa0_values.iter().map(move |&k| (r, k)))
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(replicate, kappa0)| {
            let mut cfg = sweep.base.clone();
            cfg.seed = seeds[replicate];
            cfg.kappa0 = kappa0;
            Ok(SweepRun {
                replicate,
                seed: cfg.seed,
                output: execute(&cfg, &prepared[replicate])?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut report = SweepReport {
        config: sweep.clone(),
        runs,
        ordering: None,
        practical: PracticalTally::default(),
        slope: None,
    };
    report.ordering = ordering(&report).ok();
    report.practical = practical_tally(&report);
    report.slope = scaling_slope(&report);
    Ok(report)
}

/// The ordering observations, anchored on `κ0 = 1`.
pub fn ordering(report: &SweepReport) -> Result<OrderingReport> {
    let values = &report.config.kappa0_values;
    if values.len() < 2 {
        return Err(Error::InvalidParameter("ordering needs at least two couplings".into()));
    }
    let anchor = values
        .iter()
        .position(|&k| k == 1.0)
        .ok_or_else(|| Error::InvalidParameter("ordering needs a kappa0 = 1 anchor".into()))?;
    let tails = report.tails();
    let decreasing_passes = tails
        .iter()
        .filter(|b| b.windows(2).all(|w| w[1] < w[0]))
        .count();
    let bounding = values
        .iter()
        .enumerate()
        .filter(|(_, &k)| k > 1.0)
        .map(|(idx, &k)| BoundingPasses {
            kappa0: k,
            passes: tails
                .iter()
                .filter(|b| k.sqrt() * b[idx] < b[anchor] && b[anchor] < k * b[idx])
                .count(),
        })
        .collect();
    Ok(OrderingReport {
        replicates: tails.len(),
        decreasing_passes,
        bounding,
    })
}

fn practical_tally(report: &SweepReport) -> PracticalTally {
    let mut t = PracticalTally::default();
    for run in &report.runs {
        for rep in &run.output.reports {
            if matches!(rep.theorem_id, TheoremId::T31 | TheoremId::T42 | TheoremId::T52) {
                match &rep.envelope {
                    Some(e) => {
                        t.checked += 1;
                        t.passed += usize::from(e.passed);
                    }
                    None => t.not_applicable += 1,
                }
            }
        }
    }
    t
}

fn scaling_slope(report: &SweepReport) -> Option<f64> {
    let tails = report.tails();
    let pts: Vec<(f64, f64)> = report
        .config
        .kappa0_values
        .iter()
        .enumerate()
        .filter(|(_, &k)| k > 1.0)
        .map(|(idx, &k)| {
            let mean = tails.iter().map(|b| b[idx].ln()).sum::<f64>() / tails.len() as f64;
            (k.ln(), mean)
        })
        .collect();
    least_squares_slope(&pts)
}

/// Slope of the least-squares line through `pts`; `None` for fewer than two
/// distinct abscissae.
pub fn least_squares_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{OmegaMode, RunConfig};

    #[test]
    fn slope_of_a_line() {
        let pts: Vec<(f64, f64)> = (0..5).map(|k| (k as f64, 2.0 - 0.5 * k as f64)).collect();
        assert!((least_squares_slope(&pts).unwrap() + 0.5).abs() < 1e-14);
        assert!(least_squares_slope(&pts[..1]).is_none());
    }

    #[test]
    fn sweep_shares_draws_and_single_value_has_no_ordering() {
        let mut base = RunConfig::minimal(1, 6, 1.0, 1.0, 9);
        base.omega_mode = OmegaMode::Heterogeneous;
        let sweep = SweepConfig {
            base: base.clone(),
            kappa0_values: vec![1.0, 4.0],
            replicates: 2,
        };
        let rep = run_sweep(&sweep).unwrap();
        assert_eq!(rep.runs.len(), 4);
        assert_eq!(rep.runs[0].output.init, rep.runs[1].output.init);
        assert_eq!(rep.runs[0].output.params.omega(), rep.runs[1].output.params.omega());
        assert_ne!(rep.runs[0].output.init, rep.runs[2].output.init);
        assert!(rep.ordering.is_some());

        let single = run_sweep(&SweepConfig {
            base,
            kappa0_values: vec![3.0],
            replicates: 1,
        })
        .unwrap();
        assert!(single.ordering.is_none());
        assert!(single.slope.is_none());
    }
}
