//! Command-line driver for the flat-torus prescribed-curvature suite.
//!
//! Subcommands: `solve` (matrix equation), `kazdan-warner` (scalar
//! equation), `normalize` (reference normalization), `chern-bundle` /
//! `chern-kahler` (quantitative inequality reports on T⁴),
//! `counterexample` (two-solution construction), `nonexistence-demo`
//! (integral obstruction), and `compare` (metric domination check between
//! two HYMF files).
//!
//! Exit codes: 0 success/pass, 1 failed check, 2 contract error,
//! 3 obstruction, 4 non-convergence, 64 usage.

pub mod config;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use config::Config;
use hym_core::*;

#[derive(Parser, Debug)]
#[command(
    name = "hym",
    about = "Prescribed trace-of-curvature solvers on flat Kähler tori",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct CommonArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: config value or ./hym-out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override every generator seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the solver residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Override the grid points per axis.
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the matrix prescription Φ_H = Φ for the metric representative.
    Solve {
        #[command(flatten)]
        common: CommonArgs,
        /// Prescribe c·Id (overrides the config target).
        #[arg(long)]
        target_constant: Option<f64>,
    },
    /// Solve the scalar equation e^{-φ}(F₀ + Δφ) = G.
    KazdanWarner {
        #[command(flatten)]
        common: CommonArgs,
        /// Prescribe a constant density (overrides the config).
        #[arg(long)]
        density_constant: Option<f64>,
    },
    /// Flatten the minimal eigenvalue of a reference tensor.
    Normalize {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Bundle Chern number inequality report on T⁴.
    ChernBundle {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Kähler Chern number inequality report on T⁴.
    ChernKahler {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Build the sign-changing density with two distinct solutions.
    Counterexample {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        f0: Option<f64>,
        #[arg(long)]
        amplitude: Option<f64>,
    },
    /// Report the trivial-bundle integral obstruction.
    NonexistenceDemo {
        #[command(flatten)]
        common: CommonArgs,
        /// Constant density to test (default −1).
        #[arg(long)]
        density_constant: Option<f64>,
        /// Also run the unchecked solve to record its failure.
        #[arg(long)]
        attempt: bool,
    },
    /// Check h ≤ λ·h₀ for two persisted metric representatives.
    Compare {
        /// HYMF file with the metric representative H.
        h: PathBuf,
        /// HYMF file with the reference representative H₀.
        h0: PathBuf,
        /// Scale factor λ.
        #[arg(long, default_value_t = 1.0)]
        lam: f64,
    },
}

/// Parses and runs; returns the process exit code.
pub fn dispatch<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn exit_code_for(e: &HymError) -> i32 {
    match e {
        HymError::Obstruction(_) | HymError::Bracket(_) => 3,
        _ => 2,
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<Config> {
    match path {
        None => Ok(Config::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            toml::from_str(&text)
                .map_err(|e| HymError::Contract(format!("bad config {}: {e}", p.display())))
        }
    }
}

fn out_dir(cfg: &Config, common: &CommonArgs) -> Result<PathBuf> {
    let dir = common
        .out
        .clone()
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("hym-out"));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn build_geometry(
    cfg: &Config,
    common: &CommonArgs,
    default_n: usize,
    default_grid: usize,
) -> Result<Arc<TorusGeometry>> {
    let n = cfg.geometry.n.unwrap_or(default_n);
    if let Some(dims) = &cfg.geometry.dims {
        let periods = cfg
            .geometry
            .periods
            .clone()
            .unwrap_or_else(|| vec![1.0; dims.len()]);
        return TorusGeometry::new(n, dims, &periods);
    }
    let grid = common.grid.or(cfg.geometry.grid).unwrap_or(default_grid);
    let dims = vec![grid; 2 * n];
    let periods = cfg
        .geometry
        .periods
        .clone()
        .unwrap_or_else(|| vec![1.0; 2 * n]);
    TorusGeometry::new(n, &dims, &periods)
}

fn build_bundle(cfg: &Config, geom: &Arc<TorusGeometry>) -> Result<BundleData> {
    if let Some(path) = &cfg.bundle.f0_path {
        let f0 = io::read_scalar_field(path)?;
        if !f0.geometry().same_grid(geom) {
            return Err(HymError::Shape(
                "reference scalar file does not match the run geometry".into(),
            ));
        }
        BundleData::with_field(cfg.bundle.rank, f0, cfg.bundle.degree)
    } else {
        BundleData::constant(geom, cfg.bundle.rank, cfg.bundle.f0, cfg.bundle.degree)
    }
}

fn build_solve_options(cfg: &Config, common: &CommonArgs) -> Result<SolveOptions> {
    let mut opts = SolveOptions::default();
    let s = &cfg.solver;
    if let Some(v) = s.tol {
        opts.tol_residual = v;
    }
    if let Some(v) = common.tol {
        opts.tol_residual = v;
    }
    if let Some(v) = s.max_newton {
        opts.max_newton = v;
    }
    if let Some(v) = s.continuation_steps {
        opts.continuation_steps = v;
    }
    if let Some(v) = s.damping_min {
        opts.damping_min = v;
    }
    if let Some(v) = s.forcing_max {
        opts.forcing_max = v;
    }
    if let Some(v) = s.linear_max_iter {
        opts.linear_max_iter = v;
    }
    if let Some(p) = &s.initial_guess_path {
        opts.initial_guess = Some(io::read_matrix_field(p)?);
    }
    if !(opts.tol_residual > 0.0) {
        return Err(HymError::Contract("tolerance must be positive".into()));
    }
    if opts.max_newton == 0 {
        return Err(HymError::Contract("max_newton must be at least 1".into()));
    }
    Ok(opts)
}

fn status_code(report: &SolveReport) -> i32 {
    match report.status {
        SolveStatus::Converged => 0,
        SolveStatus::Obstruction => 3,
        SolveStatus::MaxIter | SolveStatus::PositivityBreakdown => 4,
    }
}

fn run(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Solve {
            common,
            target_constant,
        } => run_solve(common, target_constant),
        Command::KazdanWarner {
            common,
            density_constant,
        } => run_kazdan_warner(common, density_constant),
        Command::Normalize { common } => run_normalize(common),
        Command::ChernBundle { common } => run_chern(common, CurvatureKind::Bundle),
        Command::ChernKahler { common } => run_chern(common, CurvatureKind::Kahler),
        Command::Counterexample {
            common,
            f0,
            amplitude,
        } => run_counterexample(common, f0, amplitude),
        Command::NonexistenceDemo {
            common,
            density_constant,
            attempt,
        } => run_nonexistence(common, density_constant, attempt),
        Command::Compare { h, h0, lam } => run_compare(&h, &h0, lam),
    }
}

fn run_solve(common: CommonArgs, target_constant: Option<f64>) -> Result<i32> {
    let cfg = load_config(&common.config)?;
    let geom = build_geometry(&cfg, &common, 1, 64)?;
    let bundle = build_bundle(&cfg, &geom)?;
    let opts = build_solve_options(&cfg, &common)?;
    let dir = out_dir(&cfg, &common)?;

    let target = if let Some(c) = target_constant {
        HymTarget::constant(&geom, bundle.rank(), c)?
    } else if let Some(path) = &cfg.target.path {
        let phi = io::read_matrix_field(path)?;
        if !phi.geometry().same_grid(&geom) {
            return Err(HymError::Shape(
                "target file does not match the run geometry".into(),
            ));
        }
        HymTarget::new(phi)?
    } else if let Some(spec) = &cfg.target.manufactured {
        let seed = common.seed.unwrap_or(spec.seed);
        let (h_star, target) =
            synth::manufactured_solution(&bundle, seed, spec.bandwidth, spec.amplitude)?;
        io::write_matrix_field(&dir.join("h_manufactured.hymf"), &h_star)?;
        target
    } else {
        HymTarget::constant(&geom, bundle.rank(), cfg.target.constant.unwrap_or(3.0))?
    };

    let (h, report) = solve_prescribed(&target, &bundle, &opts)?;
    let (res_field, sup, l2) = hym_residual(&h, &target, &bundle)?;
    io::write_matrix_field(&dir.join("h.hymf"), &h)?;
    io::write_matrix_field(&dir.join("residual.hymf"), &res_field)?;
    io::write_report_csv(&dir.join("history.csv"), &report)?;
    io::write_report_text(&dir.join("report.txt"), "prescribed-curvature solve", &report)?;
    println!(
        "solve: status={:?} newton={} residual_sup={sup:.3e} residual_l2={l2:.3e} -> {}",
        report.status,
        report.newton_steps,
        dir.display()
    );
    Ok(status_code(&report))
}

fn run_kazdan_warner(common: CommonArgs, density_constant: Option<f64>) -> Result<i32> {
    let cfg = load_config(&common.config)?;
    let geom = build_geometry(&cfg, &common, 1, 64)?;
    let bundle = build_bundle(&cfg, &geom)?;
    let opts = build_solve_options(&cfg, &common)?;
    let dir = out_dir(&cfg, &common)?;

    let density = if let Some(c) = density_constant {
        ScalarField::constant(&geom, c)
    } else if let Some(path) = &cfg.scalar.density_path {
        io::read_scalar_field(path)?
    } else if let Some(spec) = &cfg.scalar.manufactured {
        let seed = common.seed.unwrap_or(spec.seed);
        let (phi_star, dens) =
            synth::manufactured_conformal(bundle.f0(), seed, spec.bandwidth, spec.amplitude)?;
        io::write_scalar_field(&dir.join("phi_manufactured.hymf"), &phi_star)?;
        dens
    } else {
        ScalarField::constant(&geom, cfg.scalar.density_constant.unwrap_or(3.0))
    };

    let (phi, report) = solve_kazdan_warner(&density, bundle.f0(), &opts)?;
    io::write_scalar_field(&dir.join("phi.hymf"), &phi)?;
    io::write_report_csv(&dir.join("history.csv"), &report)?;
    io::write_report_text(&dir.join("report.txt"), "scalar prescribed-curvature solve", &report)?;
    println!(
        "kazdan-warner: status={:?} newton={} residual_sup={:.3e} -> {}",
        report.status,
        report.newton_steps,
        report.residual_history.last().copied().unwrap_or(f64::NAN),
        dir.display()
    );
    Ok(status_code(&report))
}

fn run_normalize(common: CommonArgs) -> Result<i32> {
    let cfg = load_config(&common.config)?;
    let geom = build_geometry(&cfg, &common, 1, 64)?;
    let dir = out_dir(&cfg, &common)?;

    let omega = if let Some(path) = &cfg.normalize.input {
        io::read_matrix_field(path)?
    } else {
        let spec = cfg.normalize.synthetic.clone().unwrap_or(config::SyntheticOmega {
            seed: 1,
            rank: 2,
            bandwidth: 2,
            amplitude: 0.5,
            shift: 2.0,
        });
        let seed = common.seed.unwrap_or(spec.seed);
        let w = synth::random_hermitian_field(&geom, spec.rank, seed, spec.bandwidth, spec.amplitude);
        MatrixField::identity(&geom, spec.rank)
            .scale(spec.shift)
            .add(&w)
    };

    let (f, lambda0) = normalize_reference(&omega)?;
    io::write_scalar_field(&dir.join("f.hymf"), &f)?;
    let shifted = omega
        .add(&MatrixField::scalar_diag(&f.laplacian(), omega.rank()))
        .hermitian_project();
    let (kappa, _) = shifted.eigen_range()?;
    let dev = kappa
        .data()
        .iter()
        .map(|v| (v.re - lambda0).abs())
        .fold(0.0, f64::max);
    let text = format!(
        "reference normalization\nlambda0: {lambda0:.12e}\nsup deviation of min eigenvalue: {dev:.3e}\n"
    );
    std::fs::write(dir.join("report.txt"), text)?;
    println!("normalize: lambda0={lambda0:.6e} flatness_deviation={dev:.3e} -> {}", dir.display());
    Ok(0)
}

fn load_or_generate_curvature(
    cfg: &Config,
    common: &CommonArgs,
    geom: &Arc<TorusGeometry>,
    kind: CurvatureKind,
    dir: &Path,
) -> Result<CurvatureField> {
    if let Some(path) = &cfg.chern.input {
        return io::read_curvature_field(path);
    }
    let rf = match kind {
        CurvatureKind::Bundle => {
            let spec = cfg.chern.from_metric.clone().unwrap_or(config::FromMetricSpec {
                seed: 1,
                rank: 2,
                bandwidth: 1,
                amplitude: 0.3,
            });
            let seed = common.seed.unwrap_or(spec.seed);
            let h = synth::random_positive_field(geom, spec.rank, seed, spec.bandwidth, spec.amplitude, 0.4);
            curvature_from_metric(&h)?
        }
        CurvatureKind::Kahler => {
            let spec = cfg.chern.synthetic.clone().unwrap_or(config::GeneratorSpec {
                seed: 1,
                bandwidth: 1,
                amplitude: 0.8,
            });
            let seed = common.seed.unwrap_or(spec.seed);
            random_kahler_curvature(geom, seed, spec.bandwidth, spec.amplitude)?
        }
    };
    io::write_curvature_field(&dir.join("curvature.hymf"), &rf)?;
    Ok(rf)
}

fn run_chern(common: CommonArgs, kind: CurvatureKind) -> Result<i32> {
    let cfg = load_config(&common.config)?;
    let geom = build_geometry(&cfg, &common, 2, 16)?;
    let dir = out_dir(&cfg, &common)?;
    let rf = load_or_generate_curvature(&cfg, &common, &geom, kind, &dir)?;
    if rf.kind() != kind {
        return Err(HymError::Contract(
            "curvature file kind does not match the subcommand".into(),
        ));
    }
    let report = match kind {
        CurvatureKind::Bundle => bundle_inequality_check(&rf)?,
        CurvatureKind::Kahler => kahler_invariants_and_check(&rf)?,
    };
    std::fs::write(dir.join("report.txt"), format!("{}\n", report.summary()))?;
    let csv = format!(
        "kind,lhs,rhs,pass,a,b,i_c1sq,i_c2,t_norm_sq_integral,decomposition_defect,norm_identity_defect,spread_identity_defect\n{:?},{:.17e},{:.17e},{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.3e},{:.3e},{:.3e}\n",
        report.kind,
        report.lhs,
        report.rhs,
        report.pass,
        report.a,
        report.b,
        report.i_c1sq,
        report.i_c2,
        report.t_norm_sq_integral,
        report.decomposition_defect,
        report.norm_identity_defect,
        report.spread_identity_defect
    );
    std::fs::write(dir.join("report.csv"), csv)?;
    println!("{}", report.summary());
    Ok(if report.pass { 0 } else { 1 })
}

fn run_counterexample(
    common: CommonArgs,
    f0: Option<f64>,
    amplitude: Option<f64>,
) -> Result<i32> {
    let cfg = load_config(&common.config)?;
    let geom = build_geometry(&cfg, &common, 1, 64)?;
    let dir = out_dir(&cfg, &common)?;
    let c = &cfg.counterexample;
    let opts = CounterexampleOptions {
        f0: f0.unwrap_or(c.f0),
        amplitude: amplitude.unwrap_or(c.amplitude),
        cusp_point: c.cusp,
        t_lo: c.t_lo,
        t_hi: c.t_hi,
        tol_bisect: c.tol_bisect,
        max_rescale: c.max_rescale,
        ..CounterexampleOptions::default()
    };
    let art = counterexample_pipeline(&geom, &opts)?;
    io::write_scalar_field(&dir.join("cusp.hymf"), &art.f)?;
    io::write_scalar_field(&dir.join("psi.hymf"), &art.psi)?;
    io::write_scalar_field(&dir.join("g.hymf"), &art.g)?;
    io::write_scalar_field(&dir.join("phi1.hymf"), &art.phi1)?;
    io::write_scalar_field(&dir.join("phi2.hymf"), &art.phi2)?;
    io::write_q_samples_csv(&dir.join("q_samples.csv"), &art.q_samples)?;
    let gap = art.phi1.sub(&art.phi2).sup_norm();
    let text = format!(
        "two-solution construction\nt0: {:.12e}\namplitude: {}\nresidual1: {:.3e}\nresidual2: {:.3e}\n\
         density range: [{:.6e}, {:.6e}]\nsolution gap (sup): {:.6e}\n",
        art.t0,
        art.amplitude,
        art.residual1,
        art.residual2,
        art.g.min_real(),
        art.g.max_real(),
        gap
    );
    std::fs::write(dir.join("report.txt"), text)?;
    println!(
        "counterexample: t0={:.6e} residuals=({:.3e}, {:.3e}) gap={gap:.6e} -> {}",
        art.t0,
        art.residual1,
        art.residual2,
        dir.display()
    );
    Ok(0)
}

fn run_nonexistence(
    common: CommonArgs,
    density_constant: Option<f64>,
    attempt: bool,
) -> Result<i32> {
    let cfg = load_config(&common.config)?;
    let geom = build_geometry(&cfg, &common, 1, 64)?;
    let dir = out_dir(&cfg, &common)?;
    let density = if let Some(c) = density_constant {
        ScalarField::constant(&geom, c)
    } else if let Some(path) = &cfg.nonexistence.density_path {
        io::read_scalar_field(path)?
    } else {
        ScalarField::constant(&geom, cfg.nonexistence.density_constant.unwrap_or(-1.0))
    };
    let rep = nonexistence_demo(&density, attempt || cfg.nonexistence.attempt)?;
    let mut text = format!(
        "trivial-bundle obstruction check\nintegral: {:.12e}\nverdict: {}\n",
        rep.integral, rep.verdict
    );
    if let Some(attempted) = &rep.attempt {
        text.push_str(&format!(
            "solve attempt: status={:?} final_residual={:.3e} ({})\n",
            attempted.status,
            attempted.residual_history.last().copied().unwrap_or(f64::NAN),
            attempted.message
        ));
    }
    std::fs::write(dir.join("report.txt"), text)?;
    println!("nonexistence-demo: integral={:.6e} obstructed={}", rep.integral, rep.obstructed);
    Ok(if rep.obstructed { 3 } else { 0 })
}

fn run_compare(h_path: &Path, h0_path: &Path, lam: f64) -> Result<i32> {
    let h = io::read_matrix_field(h_path)?;
    let h0 = io::read_matrix_field(h0_path)?;
    if !h.geometry().same_grid(h0.geometry()) || h.rank() != h0.rank() {
        return Err(HymError::Shape(
            "compared fields disagree in grid or rank".into(),
        ));
    }
    // h ≤ λ·h₀ ⇔ λ_max(h₀^{-1/2}·H·h₀^{-1/2}) ≤ λ
    let s = h0.sqrt()?.inverse()?;
    let w = s.product(&h)?.product(&s)?.hermitian_project();
    let ok = comparison_check(&w, lam)?;
    println!(
        "compare: sup relative eigenvalue {:.6e} vs lambda {lam} -> {}",
        w.max_eigenvalue()?,
        if ok { "pass" } else { "fail" }
    );
    Ok(if ok { 0 } else { 1 })
}
