//! The simplex selection study: one curve file per (criterion, dimension).

use std::path::{Path, PathBuf};

use april::selection::{run_synthetic, Criterion, SyntheticConfig};

use crate::error::{io_err, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticArgs {
    pub dims: Vec<usize>,
    pub criteria: Vec<Criterion>,
    pub iterations: usize,
    pub runs: usize,
    pub candidates: usize,
    /// Run `i` uses `seed + i`.
    pub seed: u64,
}

impl Default for SyntheticArgs {
    fn default() -> Self {
        Self {
            dims: vec![10, 20, 50, 100],
            criteria: Criterion::ALL.to_vec(),
            iterations: 50,
            runs: 101,
            candidates: 1000,
            seed: 0,
        }
    }
}

/// Per-run performance curves, `curves[run][t]` for `t = 0..=iterations`.
pub fn synthetic_curves(args: &SyntheticArgs, criterion: Criterion, dim: usize) -> Result<Vec<Vec<f64>>> {
    let run = |i: usize| -> Result<Vec<f64>> {
        let config = SyntheticConfig {
            n_candidates: args.candidates,
            n_iterations: args.iterations,
            ..SyntheticConfig::new(dim, criterion, args.seed.wrapping_add(i as u64))
        };
        Ok(run_synthetic(&config)?.performance)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..args.runs).into_par_iter().map(run).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..args.runs).map(run).collect()
    }
}

pub fn curve_file_name(criterion: Criterion, dim: usize) -> String {
    format!("synthetic_{}_d{dim}.csv", criterion.name())
}

/// Writes `synthetic_<criterion>_d<d>.csv` (run_id, iteration, performance;
/// iterations `0..=n`) for every pair and `synthetic_summary.csv`
/// (criterion, dim, iteration, mean; iterations `1..=n`). Returns the paths written.
pub fn cmd_synthetic(args: &SyntheticArgs, out: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out).map_err(io_err(out))?;
    let mut written = Vec::new();
    let summary_path = out.join("synthetic_summary.csv");
    let mut summary = csv::Writer::from_path(&summary_path)?;
    summary.write_record(["criterion", "dim", "iteration", "mean"])?;
    for &dim in &args.dims {
        for &criterion in &args.criteria {
            let curves = synthetic_curves(args, criterion, dim)?;
            let path = out.join(curve_file_name(criterion, dim));
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(["run_id", "iteration", "performance"])?;
            for (run, curve) in curves.iter().enumerate() {
                for (t, v) in curve.iter().enumerate() {
                    w.write_record([run.to_string(), t.to_string(), v.to_string()])?;
                }
            }
            w.flush().map_err(io_err(&path))?;
            written.push(path);

            for t in 1..=args.iterations {
                let mean = curves.iter().map(|c| c[t]).sum::<f64>() / curves.len() as f64;
                summary.write_record([criterion.name().to_string(), dim.to_string(), t.to_string(), mean.to_string()])?;
            }
        }
    }
    summary.flush().map_err(io_err(&summary_path))?;
    written.push(summary_path);
    Ok(written)
}
