//! eps sweeps over independent comparison runs.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::error::{Error, Result};

use super::config::{check_eps_list, ExperimentConfig};
use super::experiments::{run_comparison, Comparison};
use super::fit::{fit_order, FitResult};

#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub eps: f64,
    pub run: Comparison,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    /// In the order of the eps list (strictly decreasing eps).
    pub points: Vec<SweepPoint>,
    /// Log-log fit of [`Comparison::metric`] against eps; `None` when a metric is zero.
    pub order: Option<FitResult>,
}

impl SweepResult {
    pub fn metrics(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .map(|p| (p.eps, p.run.metric()))
            .collect()
    }
}

/// Runs `cfg` at every entry of `cfg.eps_list` on up to `cfg.workers` threads. Each run
/// owns its data; results are gathered by index, so the output does not depend on
/// scheduling. The first failure in eps-list order is returned.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    if !cfg.experiment.is_comparison() {
        return Err(Error::Config(format!("{} cannot be swept", cfg.experiment)));
    }
    check_eps_list(&cfg.eps_list)?;
    let configs = cfg
        .eps_list
        .iter()
        .map(|&e| cfg.at_eps(e).map_err(|err| Error::Config(err.to_string())))
        .collect::<Result<Vec<_>>>()?;
    let slots: Vec<Mutex<Option<Result<Comparison>>>> =
        configs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = cfg.workers.min(configs.len()).max(1);
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= configs.len() {
                    break;
                }
                let r = run_comparison(&configs[i]);
                *slots[i].lock().expect("sweep slot poisoned") = Some(r);
            });
        }
    });
    let mut points = Vec::with_capacity(configs.len());
    for (slot, c) in slots.into_iter().zip(&configs) {
        let r = slot
            .into_inner()
            .expect("sweep slot poisoned")
            .expect("every slot is filled");
        points.push(SweepPoint {
            eps: c.params.eps,
            run: r?,
        });
    }
    let metrics: Vec<(f64, f64)> = points.iter().map(|p| (p.eps, p.run.metric())).collect();
    let order = if metrics.iter().all(|m| m.1 > 0.0) {
        Some(fit_order(&metrics)?)
    } else {
        None
    };
    Ok(SweepResult { points, order })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{ExperimentId, Horizon};

    fn cfg(workers: usize) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(ExperimentId::E2Westervelt);
        c.grid.points = Some(32);
        c.grid.transverse_points = Some(8);
        c.horizon = Horizon::Fixed(1.0);
        c.eps_list = vec![0.04, 0.02, 0.01];
        c.workers = workers;
        c
    }

    #[test]
    fn results_do_not_depend_on_worker_count() {
        let a = run_sweep(&cfg(1)).unwrap();
        let b = run_sweep(&cfg(3)).unwrap();
        assert_eq!(a.points.len(), 3);
        for (p, q) in a.points.iter().zip(&b.points) {
            assert_eq!(p.eps, q.eps);
            assert_eq!(p.run.series, q.run.series);
        }
        assert_eq!(
            a.metrics().iter().map(|m| m.0).collect::<Vec<_>>(),
            vec![0.04, 0.02, 0.01]
        );
    }

    #[test]
    fn sweeps_need_a_valid_list() {
        let mut c = cfg(1);
        c.eps_list = vec![0.01, 0.02, 0.04];
        assert!(run_sweep(&c).is_err());
        c.eps_list.clear();
        assert!(run_sweep(&c).is_err());
    }
}
