//! Command-line interface: instance simulation, solving, certificate
//! validation, phase-transition sweeps, and PSF subspace construction.
//!
//! Exit codes: 0 success (including diagnostic runs that report
//! non-convergence), 2 usage or configuration errors, 3 strict-mode
//! failures, 4 numerical failures.

mod config;
mod io;
mod manifest;

use anyhow::{anyhow, bail, Context, Result};
use blindsr::certificate::{build_d, build_dprime, coefficient_checks, validate_certificate};
use blindsr::experiments::{
    gaussian_psf_dictionary, generate_instance, pca_subspace, phase_sweep, psf_mismatch_trial,
    PhaseGridSpec, PsfMismatchOutcome,
};
use blindsr::localize::{
    default_cluster_gap, evaluation_metrics, locate_supports_grid, recover_coefficients,
    DualPolynomial, RecoveredSources, SupportEstimate,
};
use blindsr::model::{CoefficientSet, GroundTruth, IndexSet, SpikeTrain, Subspace};
use blindsr::solver::{solve, ConvergenceStatus, SolverResult};
use clap::{Parser, Subcommand};
use config::{parse_axis, FileConfig};
use io::CsvWriter;
use manifest::RunManifest;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "blindsr", version, about = "Blind super-resolution of modulated spike trains")]
struct Cli {
    /// Base seed; overrides the configuration file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Localization grid step on [0,1).
    #[arg(long, global = true)]
    grid_step: Option<f64>,
    /// Fail (exit 3) when the solver does not converge.
    #[arg(long, global = true)]
    strict: bool,
    /// Use the full paper-scale sweep grids instead of the desk-scale ones.
    #[arg(long, global = true)]
    extended: bool,
    /// Worker threads (falls back to BLINDSR_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random instance and write it as matrix/vector text files.
    Simulate {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        j: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        min_sep: Option<f64>,
        /// of_n or of_m
        #[arg(long)]
        sep_unit: Option<String>,
        #[arg(long)]
        dynamic_range_db: Option<f64>,
        /// gaussian, ones, or psf_pca
        #[arg(long)]
        subspace: Option<String>,
    },
    /// Solve an instance directory and localize/recover the sources.
    Solve {
        /// Directory produced by `simulate` (needs y.txt and B.txt).
        #[arg(long)]
        instance: PathBuf,
        /// Peak-detection threshold on the dual-norm profile.
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        tol_primal: Option<f64>,
        #[arg(long)]
        tol_dual: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
        #[arg(long)]
        over_relaxation: Option<f64>,
    },
    /// Build and validate an interpolation certificate for given spikes.
    Certify {
        /// Kernel half-width M (the certificate uses N = 4M+1 coefficients).
        #[arg(long)]
        m: usize,
        /// Comma-separated spike locations in [0,1).
        #[arg(long, value_delimiter = ',')]
        tau: Vec<f64>,
        /// File with one location per line (alternative to --tau).
        #[arg(long)]
        tau_file: Option<PathBuf>,
        /// deterministic or random
        #[arg(long, default_value = "deterministic")]
        mode: String,
        /// Subspace dimension for random mode.
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Validation grid size (defaults to max(10000, 10M)).
        #[arg(long)]
        grid_size: Option<usize>,
    },
    /// Monte Carlo phase-transition sweep over two axes.
    Phase {
        /// Trials per cell; overrides the configuration file.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Build the Gaussian-PSF dictionary and its PCA subspace.
    Psf {
        /// Also run a seeded model-mismatch trial against the subspace.
        #[arg(long)]
        mismatch: bool,
        /// Spike count for the mismatch trial.
        #[arg(long, default_value_t = 3)]
        j: usize,
        /// Minimum separation for the mismatch trial, in units of 1/N.
        #[arg(long, default_value_t = 4.0)]
        min_sep: f64,
    },
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(exit_code_for(&e));
        }
    }
}

fn exit_code_for(e: &anyhow::Error) -> i32 {
    if let Some(be) = e.downcast_ref::<blindsr::Error>() {
        match be {
            blindsr::Error::NumericalFailure(_) | blindsr::Error::IllConditioned { .. } => 4,
            _ => 2,
        }
    } else {
        2
    }
}

fn run(cli: Cli) -> Result<i32> {
    let threads = cli
        .threads
        .or_else(|| std::env::var("BLINDSR_THREADS").ok().and_then(|v| v.parse().ok()));
    if let Some(t) = threads {
        // ignore the error if a pool was already installed
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let cfg = FileConfig::load(cli.config.as_deref())?;
    match &cli.command {
        Command::Simulate { .. } => cmd_simulate(&cli, cfg),
        Command::Solve { .. } => cmd_solve(&cli, cfg),
        Command::Certify { .. } => cmd_certify(&cli, cfg),
        Command::Phase { .. } => cmd_phase(&cli, cfg),
        Command::Psf { .. } => cmd_psf(&cli, cfg),
    }
}

fn out_dir(cli: &Cli) -> Result<PathBuf> {
    let dir = cli
        .out
        .clone()
        .ok_or_else(|| anyhow!("--out <dir> is required for this subcommand"))?;
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn cmd_simulate(cli: &Cli, mut cfg: FileConfig) -> Result<i32> {
    let Command::Simulate { n, j, k, min_sep, sep_unit, dynamic_range_db, subspace } =
        &cli.command
    else {
        unreachable!()
    };
    let inst = &mut cfg.instance;
    if let Some(v) = n {
        inst.n = *v;
    }
    if let Some(v) = j {
        inst.j = *v;
    }
    if let Some(v) = k {
        inst.k = *v;
    }
    if let Some(v) = min_sep {
        inst.min_sep = *v;
    }
    if let Some(v) = sep_unit {
        inst.sep_unit = v.clone();
    }
    if let Some(v) = dynamic_range_db {
        inst.dynamic_range_db = *v;
    }
    if let Some(v) = subspace {
        inst.subspace = v.clone();
    }
    if let Some(v) = cli.seed {
        inst.seed = v;
    }

    let trial = cfg.instance.to_trial_config(cfg.solver.to_config(), &cfg.psf)?;
    trial.validate().map_err(anyhow::Error::from)?;

    let dir = out_dir(cli)?;
    RunManifest::new(
        "simulate",
        Some(trial.seed),
        cfg.to_toml(),
        &["meta.json", "tau.txt", "c.txt", "h.txt", "B.txt", "y.txt"],
    )
    .write(&dir)?;

    let (gt, y) = generate_instance(&trial).map_err(anyhow::Error::from)?;
    io::write_real_vector(&dir.join("tau.txt"), gt.spikes().locations())?;
    io::write_complex_vector(
        &dir.join("c.txt"),
        &DVector::from_column_slice(gt.spikes().amplitudes()),
    )?;
    let h = DMatrix::from_fn(trial.k, trial.j, |p, jj| gt.coefficients().vectors()[jj][p]);
    io::write_complex_matrix(&dir.join("h.txt"), &h)?;
    io::write_complex_matrix(&dir.join("B.txt"), gt.subspace().matrix())?;
    io::write_complex_vector(&dir.join("y.txt"), &y)?;
    std::fs::write(
        dir.join("meta.json"),
        serde_json::to_string_pretty(&trial).context("serializing meta")?,
    )?;
    println!(
        "instance written to {} (N={}, J={}, K={}, seed={})",
        dir.display(),
        trial.n,
        trial.j,
        trial.k,
        trial.seed
    );
    Ok(0)
}

#[derive(Serialize)]
struct SolveSummary {
    status: ConvergenceStatus,
    objective: f64,
    dual_value: f64,
    duality_gap: f64,
    normalized_gap: f64,
    iterations: usize,
    measurement_residual: f64,
    z_min_eig: f64,
    z_trace: f64,
    max_profile_norm: f64,
    detected: usize,
    locations: Vec<f64>,
    recovery: Option<RecoverySummary>,
}

#[derive(Serialize)]
struct RecoverySummary {
    amplitudes: Vec<f64>,
    conditioning: f64,
    residual: f64,
}

fn cmd_solve(cli: &Cli, mut cfg: FileConfig) -> Result<i32> {
    let Command::Solve { instance, threshold, rho, tol_primal, tol_dual, max_iter, over_relaxation } =
        &cli.command
    else {
        unreachable!()
    };
    if !instance.is_dir() {
        bail!("instance directory {} does not exist", instance.display());
    }
    let s = &mut cfg.solver;
    if let Some(v) = rho {
        s.rho = *v;
    }
    if let Some(v) = tol_primal {
        s.tol_primal = *v;
    }
    if let Some(v) = tol_dual {
        s.tol_dual = *v;
    }
    if let Some(v) = max_iter {
        s.max_iter = *v;
    }
    if let Some(v) = over_relaxation {
        s.over_relaxation = *v;
    }
    if let Some(v) = cli.grid_step {
        cfg.localize.grid_step = v;
    }
    if let Some(v) = threshold {
        cfg.localize.threshold = *v;
    }
    let solver_cfg = cfg.solver.to_config();
    solver_cfg.validate().map_err(anyhow::Error::from)?;

    let y = io::read_complex_vector(&instance.join("y.txt"))?;
    let b = Subspace::new(io::read_complex_matrix(&instance.join("B.txt"))?)
        .map_err(anyhow::Error::from)?;

    let dir = out_dir(cli)?;
    RunManifest::new(
        "solve",
        cli.seed,
        cfg.to_toml(),
        &["result.json", "profile.csv", "sources.csv", "hhat.txt", "metrics.json"],
    )
    .write(&dir)?;

    let res = solve(&y, &b, &solver_cfg).map_err(anyhow::Error::from)?;
    if res.status == ConvergenceStatus::NumericalFailure {
        bail!(blindsr::Error::NumericalFailure("solver reported NaN/Inf".into()));
    }

    let grid_size = (1.0 / cfg.localize.grid_step).round() as usize;
    let dp = DualPolynomial::new(res.dual.clone(), &b);
    let profile = dp.dual_norm_profile(grid_size.max(2));
    let mut profile_csv =
        CsvWriter::create(&dir.join("profile.csv"), "blindsr.profile.v1", "tau,qnorm")?;
    for &(tau, v) in &profile {
        profile_csv.row(&[tau.to_string(), v.to_string()])?;
    }

    let support =
        locate_supports_grid(&profile, cfg.localize.threshold, default_cluster_gap(b.n()))
            .map_err(anyhow::Error::from)?;
    let sources = try_recover(&support, &y, &b);
    write_sources(&dir, &support, sources.as_ref())?;

    let max_profile_norm = profile.iter().map(|&(_, v)| v).fold(0.0, f64::max);
    let summary = SolveSummary {
        status: res.status,
        objective: res.objective,
        dual_value: res.dual_value,
        duality_gap: res.duality_gap,
        normalized_gap: res.duality_gap / res.objective.max(1.0),
        iterations: res.iterations,
        measurement_residual: res.measurement_residual,
        z_min_eig: res.z_min_eig,
        z_trace: res.z_trace,
        max_profile_norm,
        detected: support.locations.len(),
        locations: support.locations.clone(),
        recovery: sources.as_ref().map(|s| RecoverySummary {
            amplitudes: s.amplitudes.clone(),
            conditioning: s.conditioning,
            residual: s.residual,
        }),
    };
    std::fs::write(dir.join("result.json"), serde_json::to_string_pretty(&summary)?)?;

    if let Some(gt) = read_ground_truth(instance, &b)? {
        let empty = RecoveredSources {
            locations: vec![],
            amplitudes: vec![],
            coefficients: vec![],
            conditioning: f64::INFINITY,
            residual: f64::INFINITY,
        };
        let metrics = evaluation_metrics(&gt, &res.x_hat, sources.as_ref().unwrap_or(&empty));
        std::fs::write(dir.join("metrics.json"), serde_json::to_string_pretty(&metrics)?)?;
    }

    report_solve(&res);
    if cli.strict && res.status != ConvergenceStatus::Converged {
        eprintln!("strict mode: solver did not converge");
        return Ok(3);
    }
    Ok(0)
}

fn try_recover(
    support: &SupportEstimate,
    y: &DVector<Complex64>,
    b: &Subspace,
) -> Option<RecoveredSources> {
    if support.locations.is_empty() || support.locations.len() * b.k() > b.n() {
        return None;
    }
    recover_coefficients(&support.locations, y, b).ok()
}

fn write_sources(
    dir: &Path,
    support: &SupportEstimate,
    sources: Option<&RecoveredSources>,
) -> Result<()> {
    let mut csv = CsvWriter::create(
        &dir.join("sources.csv"),
        "blindsr.sources.v1",
        "j,tau,amplitude,peak_qnorm",
    )?;
    for (i, &tau) in support.locations.iter().enumerate() {
        let amp = sources.map(|s| s.amplitudes[i]).unwrap_or(f64::NAN);
        csv.row(&[
            i.to_string(),
            tau.to_string(),
            amp.to_string(),
            support.peak_values[i].to_string(),
        ])?;
    }
    if let Some(s) = sources {
        if !s.coefficients.is_empty() {
            let k = s.coefficients[0].len();
            let h = DMatrix::from_fn(k, s.coefficients.len(), |p, jj| s.coefficients[jj][p]);
            io::write_complex_matrix(&dir.join("hhat.txt"), &h)?;
        }
    }
    Ok(())
}

fn read_ground_truth(instance: &Path, b: &Subspace) -> Result<Option<GroundTruth>> {
    let tau_path = instance.join("tau.txt");
    let c_path = instance.join("c.txt");
    let h_path = instance.join("h.txt");
    if !(tau_path.exists() && c_path.exists() && h_path.exists()) {
        return Ok(None);
    }
    let taus = io::read_real_vector(&tau_path)?;
    let c = io::read_complex_vector(&c_path)?;
    let h = io::read_complex_matrix(&h_path)?;
    let coeffs: Vec<DVector<Complex64>> = (0..h.ncols())
        .map(|j| DVector::from_column_slice(h.column(j).as_slice()))
        .collect();
    let gt = GroundTruth::new(
        SpikeTrain::new(taus, c.iter().copied().collect()).map_err(anyhow::Error::from)?,
        CoefficientSet::new(coeffs).map_err(anyhow::Error::from)?,
        b.clone(),
        IndexSet::new(b.n()).map_err(anyhow::Error::from)?,
    )
    .map_err(anyhow::Error::from)?;
    Ok(Some(gt))
}

fn report_solve(res: &SolverResult) {
    println!(
        "solve: status={:?} objective={:.6e} gap={:.3e} iterations={}",
        res.status, res.objective, res.duality_gap, res.iterations
    );
}

#[derive(Serialize)]
struct CertifyOutput {
    mode: String,
    m: usize,
    taus: Vec<f64>,
    separation_ok: bool,
    alpha_norms: Vec<f64>,
    beta_norms: Vec<f64>,
    report: blindsr::certificate::CertificateReport,
}

fn cmd_certify(cli: &Cli, cfg: FileConfig) -> Result<i32> {
    let Command::Certify { m, tau, tau_file, mode, k, grid_size } = &cli.command else {
        unreachable!()
    };
    let mut taus = tau.clone();
    if let Some(path) = tau_file {
        taus.extend(io::read_real_vector(path)?);
    }
    if taus.is_empty() {
        bail!("no spike locations: pass --tau or --tau-file");
    }
    let grid = grid_size.unwrap_or((10 * *m).max(10_000));

    let dir = out_dir(cli)?;
    RunManifest::new("certify", cli.seed, cfg.to_toml(), &["report.json"]).write(&dir)?;

    let output = match mode.as_str() {
        "deterministic" | "det" => {
            let sys = build_dprime(&taus, *m).map_err(anyhow::Error::from)?;
            let signs = vec![Complex64::new(1.0, 0.0); taus.len()];
            let (alphas, betas) = sys.solve(&signs).map_err(anyhow::Error::from)?;
            let ev = sys.evaluator(alphas.clone(), betas.clone());
            let targets: Vec<DVector<Complex64>> =
                signs.iter().map(|&s| DVector::from_element(1, s)).collect();
            let mut report = validate_certificate(&ev, &taus, &targets, *m, grid)
                .map_err(anyhow::Error::from)?;
            let alpha_norms: Vec<f64> = alphas.iter().map(|a| a.norm()).collect();
            let beta_norms: Vec<f64> = betas.iter().map(|b| b.norm()).collect();
            report.extend_checks(coefficient_checks(&alpha_norms, &beta_norms, *m));
            report.extend_checks(sys.invertibility_checks());
            CertifyOutput {
                mode: "deterministic".into(),
                m: *m,
                taus: taus.clone(),
                separation_ok: sys.separation_ok,
                alpha_norms,
                beta_norms,
                report,
            }
        }
        "random" => {
            let n = 4 * *m + 1;
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed.unwrap_or(0));
            let b = Subspace::new(DMatrix::from_fn(n, *k, |_, _| {
                Complex64::new(rng.sample(StandardNormal), 0.0)
            }))
            .map_err(anyhow::Error::from)?;
            let targets: Vec<DVector<Complex64>> = (0..taus.len())
                .map(|_| {
                    let v = DVector::from_fn(*k, |_, _| {
                        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
                    });
                    let norm = v.norm();
                    v / Complex64::new(norm, 0.0)
                })
                .collect();
            let sys = build_d(&taus, *m, &b).map_err(anyhow::Error::from)?;
            let (alphas, betas) = sys.solve(&targets).map_err(anyhow::Error::from)?;
            let ev = sys.evaluator(alphas.clone(), betas.clone());
            let mut report = validate_certificate(&ev, &taus, &targets, *m, grid)
                .map_err(anyhow::Error::from)?;
            let alpha_norms: Vec<f64> = alphas.iter().map(|a| a.norm()).collect();
            let beta_norms: Vec<f64> = betas.iter().map(|b| b.norm()).collect();
            report.extend_checks(coefficient_checks(&alpha_norms, &beta_norms, *m));
            CertifyOutput {
                mode: "random".into(),
                m: *m,
                taus: taus.clone(),
                separation_ok: sys.separation_ok,
                alpha_norms,
                beta_norms,
                report,
            }
        }
        other => bail!("unknown mode '{other}' (expected deterministic or random)"),
    };

    std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(&output)?)?;
    println!(
        "certificate {}: pass={} off_support_max={:.6}",
        output.mode, output.report.pass, output.report.off_support_max
    );
    Ok(0)
}

fn cmd_phase(cli: &Cli, mut cfg: FileConfig) -> Result<i32> {
    let Command::Phase { trials } = &cli.command else { unreachable!() };
    if cli.extended {
        // paper-scale grid: N fixed at 64, J and K swept wide
        cfg.sweep.axis1 = "k".into();
        cfg.sweep.axis1_values = (1..=12).collect();
        cfg.sweep.axis2 = "j".into();
        cfg.sweep.axis2_values = (1..=12).collect();
        cfg.sweep.trials_per_cell = 50;
        cfg.instance.n = 64;
    }
    if let Some(t) = trials {
        cfg.sweep.trials_per_cell = *t;
    }
    if let Some(seed) = cli.seed {
        cfg.instance.seed = seed;
    }
    let base = cfg.instance.to_trial_config(cfg.solver.to_config(), &cfg.psf)?;
    let spec = PhaseGridSpec {
        axis1: parse_axis(&cfg.sweep.axis1)?,
        axis1_values: cfg.sweep.axis1_values.clone(),
        axis2: parse_axis(&cfg.sweep.axis2)?,
        axis2_values: cfg.sweep.axis2_values.clone(),
        trials_per_cell: cfg.sweep.trials_per_cell,
        base,
    };
    spec.validate().map_err(anyhow::Error::from)?;

    let dir = out_dir(cli)?;
    RunManifest::new(
        "phase",
        Some(spec.base.seed),
        cfg.to_toml(),
        &["cells.csv", "trials.csv", "summary.json"],
    )
    .write(&dir)?;

    let result = phase_sweep(&spec).map_err(anyhow::Error::from)?;

    let mut cells = CsvWriter::create(
        &dir.join("cells.csv"),
        "blindsr.phase.v1",
        "axis1,axis2,trials,successes,rate",
    )?;
    for c in &result.cells {
        cells.row(&[
            c.axis1_value.to_string(),
            c.axis2_value.to_string(),
            c.trials.to_string(),
            c.successes.to_string(),
            c.rate.to_string(),
        ])?;
    }
    let mut trials_csv = CsvWriter::create(
        &dir.join("trials.csv"),
        "blindsr.trials.v1",
        "cell,axis1,axis2,trial,seed,success,rel_error,iterations,status,wall_s,note",
    )?;
    for t in &result.trials {
        let (success, rel, iters, status, wall) = match &t.record {
            Some(r) => (
                r.success.to_string(),
                r.relative_frobenius_error.to_string(),
                r.iterations.to_string(),
                format!("{:?}", r.status),
                r.wall_time_s.to_string(),
            ),
            None => ("false".into(), String::new(), "0".into(), "invalid".into(), "0".into()),
        };
        trials_csv.row(&[
            t.cell_index.to_string(),
            t.axis1_value.to_string(),
            t.axis2_value.to_string(),
            t.trial.to_string(),
            t.seed.to_string(),
            success,
            rel,
            iters,
            status,
            wall,
            t.note.clone().unwrap_or_default(),
        ])?;
    }
    #[derive(Serialize)]
    struct Summary<'a> {
        spec: &'a PhaseGridSpec,
        cells: &'a [blindsr::experiments::PhaseCell],
        /// The subspace is redrawn for every trial.
        subspace_redrawn_per_trial: bool,
    }
    std::fs::write(
        dir.join("summary.json"),
        serde_json::to_string_pretty(&Summary {
            spec: &spec,
            cells: &result.cells,
            subspace_redrawn_per_trial: true,
        })?,
    )?;
    println!("sweep complete: {} cells written to {}", result.cells.len(), dir.display());
    Ok(0)
}

fn cmd_psf(cli: &Cli, cfg: FileConfig) -> Result<i32> {
    let Command::Psf { mismatch, j, min_sep } = &cli.command else { unreachable!() };
    let spec = cfg.psf.to_spec();
    spec.validate().map_err(anyhow::Error::from)?;

    let dir = out_dir(cli)?;
    let outputs: Vec<&str> = if *mismatch {
        vec!["B.txt", "psf.json", "mismatch.json", "mismatch_profile.csv"]
    } else {
        vec!["B.txt", "psf.json"]
    };
    RunManifest::new("psf", cli.seed, cfg.to_toml(), &outputs).write(&dir)?;

    let dict = gaussian_psf_dictionary(&spec);
    let (b, err) = pca_subspace(&dict, spec.rank).map_err(anyhow::Error::from)?;
    io::write_complex_matrix(&dir.join("B.txt"), b.matrix())?;
    #[derive(Serialize)]
    struct PsfOutput<'a> {
        spec: &'a blindsr::experiments::PsfDictionarySpec,
        dictionary_rows: usize,
        dictionary_cols: usize,
        approximation_error: f64,
    }
    std::fs::write(
        dir.join("psf.json"),
        serde_json::to_string_pretty(&PsfOutput {
            spec: &spec,
            dictionary_rows: dict.nrows(),
            dictionary_cols: dict.ncols(),
            approximation_error: err,
        })?,
    )?;
    println!(
        "PSF subspace written: {}x{} dictionary, rank {}, approximation error {err:.3e}",
        dict.nrows(),
        dict.ncols(),
        spec.rank
    );

    if *mismatch {
        let seed = cli.seed.unwrap_or(7);
        let outcome: PsfMismatchOutcome =
            psf_mismatch_trial(&spec, *j, *min_sep, seed, &cfg.solver.to_config())
                .map_err(anyhow::Error::from)?;
        let mut profile_csv = CsvWriter::create(
            &dir.join("mismatch_profile.csv"),
            "blindsr.profile.v1",
            "tau,qnorm",
        )?;
        for &(tau, v) in &outcome.profile {
            profile_csv.row(&[tau.to_string(), v.to_string()])?;
        }
        #[derive(Serialize)]
        struct MismatchOutput<'a> {
            record: &'a blindsr::experiments::TrialRecord,
            mismatch_residuals: &'a [f64],
            subspace_error: f64,
        }
        std::fs::write(
            dir.join("mismatch.json"),
            serde_json::to_string_pretty(&MismatchOutput {
                record: &outcome.record,
                mismatch_residuals: &outcome.mismatch_residuals,
                subspace_error: outcome.subspace_error,
            })?,
        )?;
        println!(
            "mismatch trial: detected {} supports, errors {:?}",
            outcome.record.detected, outcome.record.support_errors
        );
        if cli.strict && outcome.record.status != ConvergenceStatus::Converged {
            return Ok(3);
        }
    }
    Ok(0)
}
