use clap::{Args, Parser, Subcommand};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use zigzag_core::config::{Axis, Format, Grid, RunConfig};
use zigzag_core::gutzwiller::{self, Variant};
use zigzag_core::meanfield::{self, BlochModel};
use zigzag_core::micro::{self, triangle::ExactMode, TriangleSetup};
use zigzag_core::observables::report::write_rows_with_header;
use zigzag_core::sweep;
use zigzag_core::{dump, Boundary, Error};

#[derive(Parser)]
#[command(name = "zigzag", version, about = "Exact diagonalization of hard-core bosons on a zig-zag ladder")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; flags override its keys
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long = "L", global = true)]
    sites: Option<usize>,
    #[arg(long = "N", global = true)]
    particles: Option<usize>,
    #[arg(long, global = true)]
    g: Option<f64>,
    #[arg(long, global = true)]
    eta: Option<f64>,
    #[arg(long, global = true)]
    boundary: Option<Boundary>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum Command {
    /// Ground state and observables at one point
    Ed {
        /// Also write the compiled operator
        #[arg(long)]
        dump: bool,
    },
    /// (g, η) grid with fidelities along the configured axis
    Sweep {
        #[arg(long)]
        axis: Option<Axis>,
    },
    /// One cut through parameter space
    FidelityCut {
        #[arg(long, default_value = "g")]
        axis: Axis,
        /// start,stop,step
        #[arg(long, value_parser = parse_range)]
        range: Option<Grid>,
    },
    /// Repeat a cut at several sizes and extrapolate peak positions in 1/L
    Fss {
        #[arg(long, default_value = "g")]
        axis: Axis,
        #[arg(long, value_parser = parse_range)]
        range: Option<Grid>,
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        #[arg(long, default_value_t = 2)]
        peaks: usize,
    },
    /// Bloch bands and folded-band crossing of the quadratic model
    Meanfield {
        #[arg(long, default_value_t = 512)]
        nk: usize,
    },
    /// Product-state optimization over (ε, θ, φ)
    Gutzwiller {
        #[arg(long, default_value = "symmetric")]
        variant: Variant,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        /// ε* along a g grid (start,stop,step)
        #[arg(long, value_parser = parse_range)]
        scan: Option<Grid>,
        /// E(ε, φ) map at this θ
        #[arg(long)]
        contour_theta: Option<f64>,
    },
    /// Atomic matrix elements and the adiabatic-elimination error scan
    Micro {
        #[arg(long, default_value_t = 20.0)]
        delta_min: f64,
        #[arg(long, default_value_t = 200.0)]
        delta_max: f64,
        #[arg(long, default_value_t = 11)]
        points: usize,
    },
    /// Write the compiled Hamiltonian in the binary dump format
    DumpOperator {
        /// Read the file back and compare
        #[arg(long)]
        verify: bool,
    },
}

fn parse_range(s: &str) -> Result<Grid, String> {
    let v: Vec<f64> = s.split(',').map(|x| x.trim().parse::<f64>().map_err(|e| e.to_string())).collect::<Result<_, _>>()?;
    match v.as_slice() {
        &[start, stop, step] => Ok(Grid::range(start, stop, step)),
        _ => Err("expected start,stop,step".into()),
    }
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Solver(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NoConvergence { .. } | Error::TooLarge { .. } => Failure::Solver(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

fn load(common: &Common) -> Result<RunConfig, Failure> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    let m = &mut cfg.model;
    if let Some(l) = common.sites {
        m.sites = l;
        if common.particles.is_none() {
            m.particles = None;
        }
    }
    if common.particles.is_some() {
        m.particles = common.particles;
    }
    if let Some(g) = common.g {
        m.g = g;
    }
    if let Some(eta) = common.eta {
        m.eta = eta;
    }
    if let Some(b) = common.boundary {
        m.boundary = b;
    }
    if let Some(s) = common.seed {
        cfg.solver.seed = s;
    }
    if let Some(t) = common.threads {
        cfg.output.threads = t;
    }
    if let Some(o) = &common.out {
        cfg.output.dir = o.clone();
    }
    if let Some(f) = common.format {
        cfg.output.format = f;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, Failure> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn json<T: serde::Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), Failure> {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Failure::Config(e.to_string()))?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut cfg = load(&cli.common)?;
    if cfg.output.threads > 0 {
        // only fails if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.output.threads).build_global();
    }
    let dir = cfg.ensure_output_dir()?.to_path_buf();
    let header = cfg.header();
    match cli.command {
        Command::Ed { dump: want_dump } => {
            let sol = sweep::solve_point(&cfg.params(), &cfg.solver)?;
            let report = sol.report(&cfg.observables)?;
            match cfg.output.format {
                Format::Csv => {
                    let mut w = create(&dir, &format!("ed_{}.csv", report.run_id))?;
                    write_rows_with_header(&mut w, &header, &report.rows())?;
                    w.flush()?;
                }
                Format::Json => json(&dir, &format!("ed_{}.json", report.run_id), &serde_json::json!({ "config": cfg, "report": report }))?,
            }
            if want_dump || cfg.output.dump_operator {
                let mut w = create(&dir, &format!("operator_{}.zzop", report.run_id))?;
                dump::write(&mut w, &sol.params, &sol.operator)?;
                w.flush()?;
            }
            println!("E0 = {:.12} (residual {:.2e})", report.energy, report.residual);
        }
        Command::Sweep { axis } => {
            if let Some(a) = axis {
                cfg.sweep.axis = a;
            }
            let data = sweep::run_sweep(&cfg)?;
            match cfg.output.format {
                Format::Csv => {
                    let mut w = create(&dir, "sweep.csv")?;
                    write_rows_with_header(&mut w, &header, &data.rows())?;
                    w.flush()?;
                }
                Format::Json => {
                    let reports: Vec<_> = data.reports().collect();
                    json(&dir, "sweep.json", &serde_json::json!({ "config": cfg, "reports": reports }))?
                }
            }
            sweep::write_fidelity_csv(create(&dir, "fidelity.csv")?, &header, &data.cuts)?;
            sweep::write_peaks_csv(create(&dir, "peaks.csv")?, &header, &data.cuts)?;
            println!("{} cuts, {} points", data.cuts.len(), data.reports().count());
        }
        Command::FidelityCut { axis, range } => {
            let values = match (&range, axis) {
                (Some(r), _) => r.values()?,
                (None, Axis::G) => cfg.sweep.g.values()?,
                (None, Axis::Eta) => cfg.sweep.eta.values()?,
            };
            let cut = sweep::fidelity_cut(&cfg.params(), axis, &values, &cfg.solver, None, cfg.sweep.prominence)?;
            let cuts = [cut];
            sweep::write_fidelity_csv(create(&dir, "fidelity.csv")?, &header, &cuts)?;
            sweep::write_peaks_csv(create(&dir, "peaks.csv")?, &header, &cuts)?;
            if cfg.output.format == Format::Json {
                json(&dir, "cut.json", &serde_json::json!({ "config": cfg, "cut": cuts[0] }))?;
            }
            for p in &cuts[0].peaks {
                println!("peak at {:.6} (f = {:.4e}, prominence {:.3e})", p.lambda, p.value, p.prominence);
            }
        }
        Command::Fss { axis, range, sizes, peaks } => {
            cfg.sweep.axis = axis;
            if let Some(r) = range {
                match axis {
                    Axis::G => cfg.sweep.g = r,
                    Axis::Eta => cfg.sweep.eta = r,
                }
            }
            let sizes = sizes.unwrap_or_else(|| cfg.sweep.sizes.clone());
            let scan = sweep::finite_size_scan(&cfg, &sizes, peaks)?;
            sweep::write_fidelity_csv(create(&dir, "fss_fidelity.csv")?, &header, &scan.cuts)?;
            sweep::write_extrapolation_csv(create(&dir, "fss.csv")?, &header, &scan)?;
            if cfg.output.format == Format::Json {
                json(&dir, "fss.json", &serde_json::json!({ "config": cfg, "scan": scan }))?;
            }
            for e in &scan.extrapolations {
                println!("peak {}: L→∞ {:.5} (positions {:?})", e.peak, e.fit.intercept, e.positions);
            }
        }
        Command::Meanfield { nk } => {
            let p = cfg.params();
            let model = BlochModel { g: p.g, hopping: p.hopping, eta: p.eta };
            meanfield::write_bands_csv(create(&dir, "bands.csv")?, &model, nk)?;
            let c = meanfield::folded_crossing(0.0, 1.0, p.hopping);
            meanfield::write_crossing_csv(create(&dir, "crossing.csv")?, &[(0.0, 1.0, c)])?;
            match c.g_star {
                Some(g) => println!("folded-band crossing at g* = {g:.5}"),
                None => println!("no folded-band crossing in [0, 1]"),
            }
        }
        Command::Gutzwiller { variant, restarts, scan, contour_theta } => {
            let mut p = cfg.params();
            p.boundary = Boundary::Pbc;
            let rows = match scan {
                Some(grid) => gutzwiller::epsilon_scan(&p, &grid.values()?, variant, restarts, cfg.solver.seed)?,
                None => gutzwiller::epsilon_scan(&p, &[p.g], variant, restarts, cfg.solver.seed)?,
            };
            let mut w = create(&dir, "gutzwiller.csv")?;
            w.write_all(header.as_bytes())?;
            gutzwiller::write_scan_csv(&mut w, &rows)?;
            if let Some(theta) = contour_theta {
                let n = 121;
                let eps: Vec<f64> = (0..n).map(|i| -0.9 + 1.8 * i as f64 / (n - 1) as f64).collect();
                let phis: Vec<f64> = (0..n).map(|i| -std::f64::consts::PI + 2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).collect();
                let grid = gutzwiller::contour(&p, variant, theta, &eps, &phis)?;
                let mut w = create(&dir, "gutzwiller_contour.csv")?;
                w.write_all(header.as_bytes())?;
                gutzwiller::write_contour_csv(&mut w, theta, &grid)?;
            }
            for r in &rows {
                println!("g = {:.4}: ε* = {:.5}, θ* = {:.5}, φ* = {:.5}, E* = {:.10}, χ* = {:.3e}", r.g, r.epsilon, r.theta, r.phi, r.energy, r.chi);
            }
        }
        Command::Micro { delta_min, delta_max, points } => {
            let levels = micro::default_assignment()?;
            let setup = TriangleSetup::equilateral(delta_min);
            let model = micro::adiabatic_eliminate(&setup, &levels)?;
            let elements: Vec<f64> = levels.reference_elements()?.iter().map(|e| e.to_f64()).collect();
            if points < 2 || !(delta_min > 0.0) || !(delta_max > delta_min) {
                return Err(Failure::Config("need points ≥ 2 and 0 < delta_min < delta_max".into()));
            }
            let deltas: Vec<f64> = (0..points)
                .map(|i| delta_min * (delta_max / delta_min).powf(i as f64 / (points - 1) as f64))
                .collect();
            let scan = micro::elimination_scan(&setup, &levels, &deltas, ExactMode::RotatingFrame)?;
            let full = micro::elimination_scan(&setup, &levels, &deltas, ExactMode::Full)?;
            let slope = micro::loglog_slope(&scan)?;
            let mut w = create(&dir, "micro_elimination.csv")?;
            writeln!(w, "Delta,g,error_rotating_frame,error_full")?;
            for (a, b) in scan.iter().zip(&full) {
                writeln!(w, "{},{},{},{}", a.delta, 27.0 * model.hopping / (2.0 * a.delta), a.error, b.error)?;
            }
            w.flush()?;
            let h = model.h(0, 1, 2);
            json(
                &dir,
                "micro.json",
                &serde_json::json!({
                    "levels": levels,
                    "dipole_elements": {
                        "<0|d-|+>": elements[0], "<1|d-|0>": elements[1],
                        "<0|d+|1>": elements[2], "<+|d+|0>": elements[3],
                    },
                    "J": model.hopping,
                    "h_1_2_3": [h.re, h.im],
                    "alpha": setup.alpha,
                    "error_slope": slope,
                }),
            )?;
            println!("dipole elements {elements:?}");
            println!("J = {:.12}, h_1→2→3 = {:.12} {:+.12}i, error slope {slope:.4}", model.hopping, h.re, h.im);
        }
        Command::DumpOperator { verify } => {
            let sol = sweep::solve_point_operator(&cfg.params())?;
            let name = format!("operator_{}.zzop", zigzag_core::observables::report::run_id(&cfg.params(), cfg.solver.seed));
            let path = dir.join(&name);
            let bytes = dump::encode(&cfg.params(), &sol);
            std::fs::write(&path, &bytes)?;
            if verify {
                let back = dump::decode(&std::fs::read(&path)?)?;
                if back.operator != sol || back.params != cfg.params() {
                    return Err(Failure::Config("dump did not round-trip".into()));
                }
            }
            println!("{} ({} bytes, dim {}, nnz {})", path.display(), bytes.len(), sol.dim(), sol.nnz());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(m)) => {
            eprintln!("solver failure: {m}");
            ExitCode::from(3)
        }
    }
}
