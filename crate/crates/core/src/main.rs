//! Command-line entry point: experiment configs in, tables and figures out.
//!
//! Exit codes: 0 on success, 2 on configuration errors, 3 on numeric
//! failures. Diagnostics go to standard error; results to standard output
//! and to CSV/SVG files under the output directory.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nalgebra::DVector;

use hilbertlab::boundary;
use hilbertlab::config::Config;
use hilbertlab::domain::ConvexDomain;
use hilbertlab::entropy;
use hilbertlab::flow::{self, FlowState};
use hilbertlab::group;
use hilbertlab::metric::MetricContext;
use hilbertlab::report::{fit_plot, domain_scene, OutputWriter, RunMetadata};
use hilbertlab::rng;
use hilbertlab::transport;

#[derive(Parser)]
#[command(name = "hilbertlab", version, about = "Hilbert geometry laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (JSON with domain / group / experiment sections).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV and SVG artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker pool size (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    horizon: Option<f64>,
    #[arg(long, global = true)]
    max_len: Option<usize>,
    #[arg(long, global = true)]
    samples: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Hilbert distance between the two config points.
    Distance,
    /// Finsler norm of the config direction at the config point.
    Norm,
    /// Flow the config state for the horizon time; writes the orbit path.
    Flow,
    /// Curvature scalar over random states; reports min and max.
    Curvature,
    /// Transport-norm curve along the config state's orbit.
    Transport,
    /// Periodic-orbit exponents: closed form vs transport regression.
    Lyapunov,
    /// Enumerate conjugacy classes with lengths and eigenvalue data.
    GroupScan,
    /// Volume entropy from ball-volume growth.
    EntropyVol,
    /// Orbit-counting entropy from the length spectrum.
    EntropyOrbit,
    /// Boundary shape exponent along a normal chord.
    BoundaryExponent,
    /// Beta-convexity of the boundary and the induced entropy bound.
    Beta,
}

enum RunError {
    Config(String),
    Numeric(String),
}

impl RunError {
    fn code(&self) -> u8 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numeric(_) => 3,
        }
    }
    fn message(&self) -> &str {
        match self {
            RunError::Config(m) | RunError::Numeric(m) => m,
        }
    }
}

fn config_err<E: std::fmt::Display>(e: E) -> RunError {
    RunError::Config(e.to_string())
}

fn numeric_err<E: std::fmt::Display>(e: E) -> RunError {
    RunError::Numeric(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hilbertlab: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

struct Session {
    config: Config,
    writer: OutputWriter,
    seed: u64,
    horizon: f64,
    max_len: usize,
    samples: usize,
    steps: usize,
}

impl Session {
    fn domain(&self) -> Result<ConvexDomain, RunError> {
        let spec = self
            .config
            .domain
            .as_ref()
            .ok_or_else(|| RunError::Config("config has no domain section".into()))?;
        ConvexDomain::make(spec).map_err(config_err)
    }

    fn context(&self) -> Result<MetricContext, RunError> {
        Ok(MetricContext::new(self.domain()?))
    }

    fn point(&self, idx: usize) -> Result<DVector<f64>, RunError> {
        let pts = self
            .config
            .experiment
            .points
            .as_ref()
            .ok_or_else(|| RunError::Config("config experiment has no points".into()))?;
        let p = pts
            .get(idx)
            .ok_or_else(|| RunError::Config(format!("config needs at least {} points", idx + 1)))?;
        Ok(DVector::from_column_slice(p))
    }

    fn direction(&self, idx: usize) -> Result<DVector<f64>, RunError> {
        let dirs = self
            .config
            .experiment
            .directions
            .as_ref()
            .ok_or_else(|| RunError::Config("config experiment has no directions".into()))?;
        let d = dirs.get(idx).ok_or_else(|| {
            RunError::Config(format!("config needs at least {} directions", idx + 1))
        })?;
        Ok(DVector::from_column_slice(d))
    }

    fn state(&self) -> Result<FlowState, RunError> {
        FlowState::new(self.point(0)?, self.direction(0)?).map_err(numeric_err)
    }
}

fn run(cli: &Cli) -> Result<(), RunError> {
    let config_path = cli
        .config
        .as_ref()
        .ok_or_else(|| RunError::Config("--config is required".into()))?;
    let (config, hash) = Config::load(config_path).map_err(RunError::Config)?;
    if let Some(threads) = cli.threads {
        // Best-effort: a second initialization in the same process is fine.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let seed = cli.seed.or(config.experiment.seed).unwrap_or(0);
    let session = Session {
        horizon: cli.horizon.or(config.experiment.horizon).unwrap_or(10.0),
        max_len: cli.max_len.or(config.experiment.max_len).unwrap_or(12),
        samples: cli.samples.or(config.experiment.samples).unwrap_or(100_000),
        steps: config.experiment.steps.unwrap_or(256),
        writer: OutputWriter::new(
            &cli.out,
            RunMetadata {
                config_hash: hash,
                seed,
            },
        )
        .map_err(numeric_err)?,
        config,
        seed,
    };
    match cli.command {
        Command::Distance => cmd_distance(&session),
        Command::Norm => cmd_norm(&session),
        Command::Flow => cmd_flow(&session),
        Command::Curvature => cmd_curvature(&session),
        Command::Transport => cmd_transport(&session),
        Command::Lyapunov => cmd_lyapunov(&session),
        Command::GroupScan => cmd_group_scan(&session),
        Command::EntropyVol => cmd_entropy_vol(&session),
        Command::EntropyOrbit => cmd_entropy_orbit(&session),
        Command::BoundaryExponent => cmd_boundary_exponent(&session),
        Command::Beta => cmd_beta(&session),
    }
}

fn cmd_distance(s: &Session) -> Result<(), RunError> {
    let ctx = s.context()?;
    let d = ctx
        .hilbert_distance(&s.point(0)?, &s.point(1)?)
        .map_err(numeric_err)?;
    println!("{d:.7}");
    Ok(())
}

fn cmd_norm(s: &Session) -> Result<(), RunError> {
    let ctx = s.context()?;
    let f = ctx
        .finsler_norm(&s.point(0)?, &s.direction(0)?)
        .map_err(numeric_err)?;
    println!("{f:.7}");
    Ok(())
}

fn cmd_flow(s: &Session) -> Result<(), RunError> {
    let ctx = s.context()?;
    let w = s.state()?;
    let steps = s.steps.max(2);
    let mut rows = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let t = s.horizon * k as f64 / steps as f64;
        let wt = flow::flow_point(&ctx, &w, t).map_err(numeric_err)?;
        let mut row = vec![t];
        row.extend(wt.point().iter().copied());
        rows.push(row);
    }
    let cols: Vec<String> = std::iter::once("t".to_string())
        .chain((1..=ctx.dim()).map(|i| format!("x{i}")))
        .collect();
    let cols_ref: Vec<&str> = cols.iter().map(|c| c.as_str()).collect();
    s.writer
        .write_csv("flow_orbit.csv", &cols_ref, &rows)
        .map_err(numeric_err)?;
    let path: Vec<DVector<f64>> = rows
        .iter()
        .map(|r| DVector::from_column_slice(&r[1..]))
        .collect();
    if ctx.dim() == 2 {
        s.writer
            .write_svg("flow_orbit.svg", &domain_scene(ctx.domain(), &[path]))
            .map_err(numeric_err)?;
    }
    let last = rows.last().unwrap();
    let coords: Vec<String> = last[1..].iter().map(|c| format!("{c:.10}")).collect();
    println!("{}", coords.join(" "));
    Ok(())
}

fn cmd_curvature(s: &Session) -> Result<(), RunError> {
    let ctx = s.context()?;
    let count = s.samples.min(1_000_000).max(1);
    let mut rng = rng::seeded(s.seed);
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for _ in 0..count {
        let x = ctx.domain().random_interior(&mut rng);
        let v = rng::unit_vector(&mut rng, ctx.dim());
        let w = FlowState::new(x, v).map_err(numeric_err)?;
        let k = flow::curvature_scalar(&ctx, &w).map_err(numeric_err)?;
        min = min.min(k);
        max = max.max(k);
    }
    println!("min={min:.6} max={max:.6}");
    Ok(())
}

fn cmd_transport(s: &Session) -> Result<(), RunError> {
    let ctx = s.context()?;
    let w = s.state()?;
    let v0 = s
        .direction(1)
        .unwrap_or_else(|_| transport::transversal_seed(w.direction()));
    let record = transport::transport_norm_curve(&ctx, &w, &v0, s.horizon, s.steps)
        .map_err(numeric_err)?;
    let mut body = String::new();
    {
        use std::fmt::Write as _;
        let mut buf = Vec::new();
        transport::write_csv(&record, &mut buf).map_err(numeric_err)?;
        write!(body, "{}", String::from_utf8_lossy(&buf)).ok();
    }
    s.writer
        .write_csv_text("transport.csv", &body)
        .map_err(numeric_err)?;
    let est = transport::eta_estimate(&record).map_err(numeric_err)?;
    let points: Vec<(f64, f64)> = record
        .samples
        .iter()
        .map(|smp| (smp.t, smp.transport_norm.ln()))
        .collect();
    let intercept = points
        .iter()
        .map(|(t, y)| y - est.eta * t)
        .sum::<f64>()
        / points.len() as f64;
    s.writer
        .write_svg(
            "transport_fit.svg",
            &fit_plot(&points, est.eta, intercept, "log transport norm vs t"),
        )
        .map_err(numeric_err)?;
    println!(
        "eta={:.6} chi_plus={:.6} chi_minus={:.6} stderr={:.2e}",
        est.eta, est.chi_plus, est.chi_minus, est.stderr
    );
    Ok(())
}

fn cmd_lyapunov(s: &Session) -> Result<(), RunError> {
    let (gens, pres) = s.config.build_group().map_err(config_err)?;
    let classes = group::enumerate_conjugacy_classes(&gens, &pres, s.max_len.min(8))
        .map_err(numeric_err)?;
    let mut rows = Vec::new();
    let mut compared = 0usize;
    let mut worst: f64 = 0.0;
    for g in classes.iter().filter(|g| group::is_biproximal(g)) {
        if compared >= 24 {
            break;
        }
        let formula = group::periodic_lyapunov(g).map_err(numeric_err)?[0].eta;
        let model = group::axis_benchmark(g).map_err(numeric_err)?;
        let mctx = MetricContext::new(model.domain);
        let v0 = DVector::from_column_slice(&[0.0, 1.0]);
        let record = transport::transport_norm_curve(&mctx, &model.state, &v0, 14.0, 400)
            .map_err(numeric_err)?;
        let est = transport::eta_estimate(&record).map_err(numeric_err)?;
        worst = worst.max((est.eta - formula).abs());
        rows.push(vec![
            g.word.as_ref().map(|w| w.len()).unwrap_or(0) as f64,
            model.length,
            formula,
            est.eta,
            est.stderr,
        ]);
        compared += 1;
    }
    s.writer
        .write_csv(
            "lyapunov.csv",
            &["word_len", "l_gamma", "eta_formula", "eta_measured", "stderr"],
            &rows,
        )
        .map_err(numeric_err)?;
    println!("compared={compared} max|eta_measured-eta_formula|={worst:.2e}");
    Ok(())
}

fn cmd_group_scan(s: &Session) -> Result<(), RunError> {
    let (gens, pres) = s.config.build_group().map_err(config_err)?;
    let classes =
        group::enumerate_conjugacy_classes(&gens, &pres, s.max_len).map_err(numeric_err)?;
    let mut rows = Vec::new();
    let mut biproximal = 0usize;
    for g in &classes {
        let word_len = g.word.as_ref().map(|w| w.len()).unwrap_or(0);
        let moduli = group::eigen_moduli(g);
        let bip = group::is_biproximal(g);
        let (length, eta) = if bip {
            biproximal += 1;
            (
                group::translation_length(g).map_err(numeric_err)?,
                group::periodic_lyapunov(g).map_err(numeric_err)?[0].eta,
            )
        } else {
            (f64::NAN, f64::NAN)
        };
        let mut row = vec![word_len as f64, if bip { 1.0 } else { 0.0 }, length, eta];
        row.extend(moduli);
        rows.push(row);
    }
    let cols: Vec<String> = ["word_len", "biproximal", "l_gamma", "eta"]
        .iter()
        .map(|c| c.to_string())
        .chain((0..gens[0].matrix().nrows()).map(|i| format!("modulus{i}")))
        .collect();
    let cols_ref: Vec<&str> = cols.iter().map(|c| c.as_str()).collect();
    s.writer
        .write_csv("group_scan.csv", &cols_ref, &rows)
        .map_err(numeric_err)?;
    println!("classes={} biproximal={biproximal}", classes.len());
    Ok(())
}

fn cmd_entropy_vol(s: &Session) -> Result<(), RunError> {
    let ctx = s.context()?;
    let r_max = s.config.experiment.r_max.unwrap_or(8.0);
    let x0 = s
        .point(0)
        .unwrap_or_else(|_| ctx.domain().base_point().clone());
    let est =
        entropy::volume_entropy(&ctx, &x0, r_max, s.samples).map_err(numeric_err)?;
    let rows: Vec<Vec<f64>> = est.grid.iter().map(|&(r, lv)| vec![r, lv.exp()]).collect();
    s.writer
        .write_csv("ball_volumes.csv", &["r", "volume"], &rows)
        .map_err(numeric_err)?;
    let intercept = est
        .grid
        .iter()
        .map(|(r, lv)| lv - est.value * r)
        .sum::<f64>()
        / est.grid.len() as f64;
    s.writer
        .write_svg(
            "volume_growth.svg",
            &fit_plot(&est.grid, est.value, intercept, "log vol B(r) vs r"),
        )
        .map_err(numeric_err)?;
    println!("h_vol={:.4} stderr={:.2e} ({})", est.value, est.fit_stderr, est.convention);
    Ok(())
}

fn cmd_entropy_orbit(s: &Session) -> Result<(), RunError> {
    let (gens, pres) = s.config.build_group().map_err(config_err)?;
    let est = entropy::orbit_entropy(&gens, &pres, s.max_len).map_err(numeric_err)?;
    s.writer
        .write_csv(
            "orbit_counts.csv",
            &["T", "P_T"],
            &est.grid.iter().map(|&(t, c)| vec![t, c]).collect::<Vec<_>>(),
        )
        .map_err(numeric_err)?;
    let log_points: Vec<(f64, f64)> = est.grid.iter().map(|&(t, c)| (t, c.ln())).collect();
    let intercept = log_points
        .iter()
        .map(|(t, y)| y - est.value * t)
        .sum::<f64>()
        / log_points.len() as f64;
    s.writer
        .write_svg(
            "orbit_growth.svg",
            &fit_plot(&log_points, est.value, intercept, "log P_T vs T"),
        )
        .map_err(numeric_err)?;
    println!(
        "h_orbit={:.4} stderr={:.2e} ({})",
        est.value, est.fit_stderr, est.convention
    );
    Ok(())
}

fn cmd_boundary_exponent(s: &Session) -> Result<(), RunError> {
    let domain = s.domain()?;
    // Default probe: the boundary hit of the first coordinate axis.
    let xplus = match s.point(0) {
        Ok(p) => p,
        Err(_) => {
            let mut e = DVector::zeros(domain.dim());
            e[0] = 1.0;
            domain
                .chord(domain.base_point(), &e)
                .map_err(numeric_err)?
                .xplus
        }
    };
    let v = s.direction(0).unwrap_or_else(|_| {
        let mut e = DVector::zeros(domain.dim());
        e[1] = 1.0;
        e
    });
    let probe = boundary::shape_exponent(&domain, &xplus, &v, &boundary::default_scales())
        .map_err(numeric_err)?;
    let rows: Vec<Vec<f64>> = probe.rows.iter().map(|&(x, yp, ym)| vec![x, yp, ym]).collect();
    s.writer
        .write_csv("shape_probe.csv", &["scale", "y_plus", "y_minus"], &rows)
        .map_err(numeric_err)?;
    let points: Vec<(f64, f64)> = probe
        .rows
        .iter()
        .map(|&(x, yp, ym)| (x.ln(), 0.5 * (yp.ln() + ym.ln())))
        .collect();
    let intercept = points
        .iter()
        .map(|(lx, ly)| ly - probe.exponent * lx)
        .sum::<f64>()
        / points.len() as f64;
    s.writer
        .write_svg(
            "shape_probe.svg",
            &fit_plot(&points, probe.exponent, intercept, "log y vs log x"),
        )
        .map_err(numeric_err)?;
    println!(
        "exponent={:.4} eta={:.4} stderr={:.2e}",
        probe.exponent,
        boundary::exponent_to_eta(probe.exponent),
        probe.stderr
    );
    Ok(())
}

fn cmd_beta(s: &Session) -> Result<(), RunError> {
    let domain = s.domain()?;
    let pairs = s.samples.min(4096).max(16);
    let (beta, alpha) = boundary::beta_convexity(&domain, pairs).map_err(numeric_err)?;
    let bound = boundary::entropy_lower_bound(beta, domain.dim()).map_err(numeric_err)?;
    println!("beta={beta:.4} alpha={alpha:.4} lower_bound={bound:.4}");
    Ok(())
}
