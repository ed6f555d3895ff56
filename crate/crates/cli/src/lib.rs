//! Experiment harness: reproducible profile and sampling experiments on the
//! XOR benchmark model, emitting long-format CSV result tables.
//!
//! Determinism contract: identical configs produce byte-identical CSV output
//! regardless of the worker count. Every parallel task derives its own seed
//! from the root seed and a task index, results are collected in task order,
//! and statistics are reduced in that fixed order.

use std::io::Write;

use rayon::prelude::*;

use pidtrunc::{
    derive_seed, generate_spec, i_k_plugin, i_k_profile, normalized_deviation_stats, split_target,
    Error, IkProfile, LogBase, MaskPolicy, Result, SplitModel, XorModelSpec,
};

/// Which experiment a [`ResultRow`] belongs to.
pub const EXPERIMENT_WEAK: &str = "profile_weak";
pub const EXPERIMENT_STRONG: &str = "profile_strong";
pub const EXPERIMENT_SAMPLING: &str = "sampling";

/// Configuration shared by the three experiments.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub m: usize,
    pub eps: [f64; 3],
    pub mask: MaskPolicy,
    /// Model coefficient seeds; one run per seed. The sampling experiment
    /// pins its coefficients to the first entry.
    pub seeds: Vec<u64>,
    /// Sample-size grid for the sampling experiment; strictly increasing.
    pub ns_grid: Vec<usize>,
    /// Resamples per grid point.
    pub resamples: usize,
    pub units: LogBase,
    /// Worker threads; 0 picks the rayon default.
    pub threads: usize,
    /// Explicit coefficient set for the sampling experiment; when absent the
    /// model is generated from the first seed.
    pub pinned_spec: Option<XorModelSpec>,
}

impl ExperimentConfig {
    /// Weak-coupling profile setup: ε = (1, 1/2, 1/10), no mask.
    pub fn weak(root_seed: u64, num_seeds: usize) -> Self {
        ExperimentConfig {
            m: 8,
            eps: [1.0, 0.5, 0.1],
            mask: MaskPolicy::None,
            seeds: derive_seeds(root_seed, num_seeds),
            ns_grid: Vec::new(),
            resamples: 0,
            units: LogBase::Nats,
            threads: 0,
            pinned_spec: None,
        }
    }

    /// Strong-coupling profile setup: ε = (1/10, 1/100, 2) with only the
    /// interactions touching exactly one target bit kept.
    pub fn strong(root_seed: u64, num_seeds: usize) -> Self {
        ExperimentConfig {
            eps: [0.1, 0.01, 2.0],
            mask: MaskPolicy::ExactlyOneTarget,
            ..Self::weak(root_seed, num_seeds)
        }
    }

    /// Finite-sample setup: weak couplings, one pinned coefficient set, the
    /// default sample-size grid, 100 resamples per grid point.
    pub fn sampling(root_seed: u64) -> Self {
        ExperimentConfig {
            ns_grid: vec![64, 128, 256, 512, 1024, 2048, 4096],
            resamples: 100,
            ..Self::weak(root_seed, 1)
        }
    }

    fn validate_profile(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::InvalidArgument(
                "at least one model seed is required".into(),
            ));
        }
        Ok(())
    }

    fn validate_sampling(&self) -> Result<()> {
        self.validate_profile()?;
        if self.ns_grid.is_empty() || self.ns_grid[0] < 1 {
            return Err(Error::InvalidArgument(
                "the sample-size grid must contain values >= 1".into(),
            ));
        }
        if self.ns_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "the sample-size grid must be strictly increasing".into(),
            ));
        }
        if self.resamples < 2 {
            return Err(Error::InvalidArgument(
                "at least two resamples are required".into(),
            ));
        }
        Ok(())
    }
}

/// Sub-seeds for the per-model runs of a profile experiment.
pub fn derive_seeds(root: u64, count: usize) -> Vec<u64> {
    (0..count).map(|i| derive_seed(root, i as u64)).collect()
}

/// One value of a long-format result table.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: &'static str,
    pub seed: u64,
    pub k: usize,
    pub n_s: Option<usize>,
    pub kind: String,
    pub value: f64,
}

/// Long-format experiment output; one value per row.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    /// Writes `experiment,seed,k,N_s,kind,value` rows behind a one-line
    /// version header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# pidtrunc {}", env!("CARGO_PKG_VERSION"))?;
        writeln!(w, "experiment,seed,k,N_s,kind,value")?;
        for row in &self.rows {
            let n_s = row.n_s.map(|n| n.to_string()).unwrap_or_default();
            writeln!(
                w,
                "{},{},{},{},{},{}",
                row.experiment, row.seed, row.k, n_s, row.kind, row.value
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV output is UTF-8")
    }

    /// All values of one kind, in row order.
    pub fn values(&self, kind: &str) -> Vec<&ResultRow> {
        self.rows.iter().filter(|r| r.kind == kind).collect()
    }
}

fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot build thread pool: {e}")))
}

fn build_split_model(cfg: &ExperimentConfig, seed: u64) -> Result<SplitModel> {
    let spec = generate_spec(cfg.m, cfg.eps[0], cfg.eps[1], cfg.eps[2], seed, cfg.mask)?;
    let dist = spec.build_distribution()?.with_log_base(cfg.units);
    split_target(&dist, &spec)
}

/// Exact `I^(k)` ladder of one seeded model, as result rows: absolute values
/// (`i_k`), ratios to `I^(N)` when the top is positive (`ratio`), and the
/// directly computed total mutual information (`total_mi`).
fn profile_rows(
    cfg: &ExperimentConfig,
    experiment: &'static str,
    seed: u64,
) -> Result<Vec<ResultRow>> {
    let split = build_split_model(cfg, seed)?;
    let n = split.features.len();
    let profile = i_k_profile(&split.dist, &split.target, &split.features, n)?;

    let mut rows = Vec::with_capacity(2 * n + 1);
    for k in 1..=n {
        rows.push(ResultRow {
            experiment,
            seed,
            k,
            n_s: None,
            kind: "i_k".into(),
            value: profile.value(k),
        });
    }
    let top = profile.value(n);
    if top > 0.0 {
        for k in 1..=n {
            rows.push(ResultRow {
                experiment,
                seed,
                k,
                n_s: None,
                kind: "ratio".into(),
                value: profile.value(k) / top,
            });
        }
    }
    rows.push(ResultRow {
        experiment,
        seed,
        k: n,
        n_s: None,
        kind: "total_mi".into(),
        value: profile.total_mi(),
    });
    Ok(rows)
}

fn run_profile(cfg: &ExperimentConfig, experiment: &'static str) -> Result<ResultTable> {
    cfg.validate_profile()?;
    let pool = thread_pool(cfg.threads)?;
    let per_seed: Vec<Vec<ResultRow>> = pool.install(|| {
        cfg.seeds
            .par_iter()
            .map(|&seed| profile_rows(cfg, experiment, seed))
            .collect::<Result<_>>()
    })?;
    Ok(ResultTable {
        rows: per_seed.into_iter().flatten().collect(),
    })
}

/// Exact `I^(k)/I^(N)` profiles across seeds in the weak-coupling setup.
pub fn run_profile_weak(cfg: &ExperimentConfig) -> Result<ResultTable> {
    run_profile(cfg, EXPERIMENT_WEAK)
}

/// Exact profiles in the strong-coupling setup, where higher-order
/// interactions dominate and the low truncation orders fall short.
pub fn run_profile_strong(cfg: &ExperimentConfig) -> Result<ResultTable> {
    run_profile(cfg, EXPERIMENT_STRONG)
}

/// Finite-sample experiment: one pinned model, bias-corrected `Î^(k)` over
/// `resamples` draws per grid sample size, summarized as mean and standard
/// deviation of the normalized deviation `î^(k) = Î^(k)/I^(k) − 1`.
///
/// Rows: `exact_i_k` (per k, no N_s), then `mean_i_hat` and `stdev_i_hat`
/// per (N_s, k).
pub fn run_sampling(cfg: &ExperimentConfig) -> Result<ResultTable> {
    cfg.validate_sampling()?;
    let (model_seed, split) = match &cfg.pinned_spec {
        Some(spec) => {
            let dist = spec.build_distribution()?.with_log_base(cfg.units);
            (spec.coefficient_seed(), split_target(&dist, spec)?)
        }
        None => (cfg.seeds[0], build_split_model(cfg, cfg.seeds[0])?),
    };
    let n = split.features.len();
    let exact = i_k_profile(&split.dist, &split.target, &split.features, n)?;
    for k in 1..=n {
        if exact.value(k) <= 0.0 {
            return Err(Error::ZeroExactInformation { k });
        }
    }

    // Task t = grid index * resamples + resample index; its sampling stream
    // is derive_seed(model_seed, t + 1) (t = 0 is reserved so no stream
    // collides with the coefficient draw).
    let tasks: Vec<(usize, usize)> = (0..cfg.ns_grid.len())
        .flat_map(|gi| (0..cfg.resamples).map(move |r| (gi, r)))
        .collect();
    let pool = thread_pool(cfg.threads)?;
    let estimates: Vec<Vec<f64>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(gi, r)| {
                let task = (gi * cfg.resamples + r) as u64;
                let seed = derive_seed(model_seed, task + 1);
                let samples = split.dist.sample(cfg.ns_grid[gi], seed)?;
                let emp = samples.empirical().with_log_base(cfg.units);
                (1..=n)
                    .map(|k| i_k_plugin(&emp, &split.target, &split.features, k, true))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()
    })?;

    let mut rows = Vec::new();
    for k in 1..=n {
        rows.push(ResultRow {
            experiment: EXPERIMENT_SAMPLING,
            seed: model_seed,
            k,
            n_s: None,
            kind: "exact_i_k".into(),
            value: exact.value(k),
        });
    }
    for (gi, &n_s) in cfg.ns_grid.iter().enumerate() {
        let profiles: Vec<IkProfile> = (0..cfg.resamples)
            .map(|r| {
                let values = estimates[gi * cfg.resamples + r].clone();
                let top = values[n - 1];
                IkProfile::from_values(values, top, cfg.units)
            })
            .collect();
        let stats = normalized_deviation_stats(&exact, &profiles)?;
        for s in &stats {
            rows.push(ResultRow {
                experiment: EXPERIMENT_SAMPLING,
                seed: model_seed,
                k: s.k,
                n_s: Some(n_s),
                kind: "mean_i_hat".into(),
                value: s.mean,
            });
            rows.push(ResultRow {
                experiment: EXPERIMENT_SAMPLING,
                seed: model_seed,
                k: s.k,
                n_s: Some(n_s),
                kind: "stdev_i_hat".into(),
                value: s.stdev,
            });
        }
    }
    Ok(ResultTable { rows })
}
