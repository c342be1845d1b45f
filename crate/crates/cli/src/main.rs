//! `heisbill` — simulate billiards in the Heisenberg group, build the known
//! periodic orbit families, solve thresholds, and export deterministic
//! JSON/CSV/SVG artifacts.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 domain condition
//! (inadmissible orbit parameters, start outside the table, or a degenerate
//! stop under `--strict`).

mod svg;

use clap::{Args, Parser, Subcommand, ValueEnum};
use heisbill_core::dynamics::{run, RunParams, Termination};
use heisbill_core::geometry::{flow, State};
use heisbill_core::io::TrajectoryFile;
use heisbill_core::orbits::{
    bigon_admissibility_threshold_with_tol, build_band_orbit, build_finite_cylinder_bigon,
    build_ngon_orbit, OrbitError,
};
use heisbill_core::tables::TableSpec;
use heisbill_core::wavefront::{attainable_boundary, critical_angle_threshold_with_tol};
use heisbill_core::Trajectory;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_USAGE: u8 = 1;
const EXIT_DOMAIN: u8 = 2;

#[derive(Parser)]
#[command(
    name = "heisbill",
    about = "Sub-Riemannian billiards in the Heisenberg group",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the billiard map from an initial state and export the trajectory.
    Simulate(SimulateArgs),
    /// Construct one of the closed-orbit families and export it.
    Periodic {
        #[command(subcommand)]
        kind: PeriodicKind,
    },
    /// Print one of the transcendental thresholds to 10 decimals.
    Threshold {
        #[arg(value_enum)]
        name: ThresholdName,
    },
    /// Sample the attainable-set boundary of the horizontal half-space.
    Wavefront(WavefrontArgs),
    /// Render a stored trajectory JSON file as SVG.
    ExportSvg(ExportSvgArgs),
    /// Run simulations for a batch of start states, optionally in parallel.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Table grammar: cyl:cx,cy,r | hplane:z0,side | vplane:v |
    /// band:zlo,zhi | fincyl:cx,cy,r,zlo,zhi
    #[arg(long)]
    table: String,
    /// Start state, six comma-separated reals: x,y,z,a,b,c
    /// (the planar momentum (b, c) is normalised on ingestion).
    #[arg(long, allow_hyphen_values = true)]
    start: String,
    #[arg(long, default_value_t = 100)]
    max_bounces: usize,
    #[arg(long, default_value_t = 1000.0)]
    max_length: f64,
    /// Output path; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Treat singular hits, corner hits, and outer-tangency stops as
    /// domain errors (exit 2).
    #[arg(long)]
    strict: bool,
}

#[derive(Subcommand)]
enum PeriodicKind {
    /// Closed polygonal orbit of the infinite cylinder.
    Ngon {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        m: u32,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Two-bounce orbit of the horizontal band.
    Band {
        #[arg(long)]
        height: f64,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Bigon orbit of the off-axis finite cylinder.
    Fincyl {
        #[arg(long)]
        d: f64,
        #[arg(long)]
        psi: f64,
        #[arg(long)]
        c: u32,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ThresholdName {
    /// Incidence angle above which the reflected helix never returns to
    /// the horizontal plane.
    CriticalAngle,
    /// Aperture below which the finite-cylinder bigon dips under the
    /// bottom cap.
    Bigon,
}

#[derive(Args)]
struct WavefrontArgs {
    /// Flow time T.
    #[arg(long)]
    time: f64,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Largest launch radius (default 5T).
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct ExportSvgArgs {
    /// Trajectory JSON produced by `simulate` or `periodic`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = PlaneArg::Xy)]
    plane: PlaneArg,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    table: String,
    /// File with one start state (x,y,z,a,b,c) per line; blank lines and
    /// lines starting with '#' are skipped.
    #[arg(long)]
    starts: PathBuf,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    output_dir: PathBuf,
    #[arg(long, default_value_t = 100)]
    max_bounces: usize,
    #[arg(long, default_value_t = 1000.0)]
    max_length: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlaneArg {
    Xy,
    Xz,
}

fn root_tol() -> f64 {
    match std::env::var("HEIS_TOL") {
        Ok(v) => v.parse::<f64>().ok().filter(|t| *t > 0.0).unwrap_or(1e-12),
        Err(_) => 1e-12,
    }
}

/// Writes via a temporary file and rename, so concurrent runs never observe
/// partial output.
fn write_atomic(path: &Path, content: &str) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, content)?;
    std::fs::rename(&tmp, path)
}

fn emit(output: Option<&Path>, content: &str) -> std::io::Result<()> {
    match output {
        Some(path) => write_atomic(path, content),
        None => std::io::stdout().write_all(content.as_bytes()),
    }
}

fn parse_start(text: &str) -> Result<State, String> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("bad number {t:?}: {e}")))
        .collect::<Result<_, _>>()?;
    if parts.len() != 6 {
        return Err(format!("start needs 6 values, got {}", parts.len()));
    }
    State::from_parts(parts[0], parts[1], parts[2], parts[3], parts[4], parts[5])
        .map_err(|e| e.to_string())
}

/// Sampled polyline of a trajectory: `t,x,y,z,a,b,c` with the cumulative
/// arclength in the first column.
fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,x,y,z,a,b,c\n");
    let mut t0 = 0.0;
    for arc in &traj.arcs {
        let samples = 32;
        for k in 0..=samples {
            let t = arc.duration * k as f64 / samples as f64;
            let s = flow(&arc.start, t);
            out.push_str(&format!(
                "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}\n",
                t0 + t,
                s.point.x,
                s.point.y,
                s.point.z,
                s.momentum.a,
                s.momentum.b,
                s.momentum.c
            ));
        }
        t0 += arc.duration;
    }
    out
}

fn render_trajectory(traj: &Trajectory, format: Format, plane: PlaneArg) -> String {
    let file = TrajectoryFile::from(traj);
    match format {
        Format::Json => file.to_json(),
        Format::Csv => trajectory_csv(traj),
        Format::Svg => svg::trajectory_svg(
            &file,
            match plane {
                PlaneArg::Xy => svg::Plane::Xy,
                PlaneArg::Xz => svg::Plane::Xz,
            },
        ),
    }
}

fn cmd_simulate(args: &SimulateArgs) -> u8 {
    let table = match TableSpec::parse(&args.table) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let start = match parse_start(&args.start) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let params = RunParams {
        max_bounces: args.max_bounces,
        max_length: args.max_length,
        root_tol: root_tol(),
    };
    let traj = match run(&table, &start, &params) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_DOMAIN;
        }
    };
    let content = render_trajectory(&traj, args.format, PlaneArg::Xy);
    if let Err(e) = emit(args.output.as_deref(), &content) {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    if args.strict
        && matches!(
            traj.termination,
            Termination::SingularHit | Termination::CornerHit | Termination::OuterTangencyStop
        )
    {
        eprintln!("terminated: {}", traj.termination.name());
        return EXIT_DOMAIN;
    }
    0
}

fn closure_residual(traj: &Trajectory) -> Option<f64> {
    let first = traj.arcs.first()?.start;
    let last = traj.final_state()?;
    Some(last.point.dist(&first.point))
}

fn cmd_periodic(kind: &PeriodicKind) -> u8 {
    let (result, output) = match kind {
        PeriodicKind::Ngon { n, m, radius, output } => {
            (build_ngon_orbit(*n, *m, *radius), output)
        }
        PeriodicKind::Band { height, n, output } => (
            build_band_orbit(*height, *n).map(|(orbit, traj)| {
                println!("loop radius r0 = {:.10}", orbit.loop_radius);
                println!("bounce radius  = {:.10}", orbit.bounce_radius);
                traj
            }),
            output,
        ),
        PeriodicKind::Fincyl { d, psi, c, output } => (
            build_finite_cylinder_bigon(*d, *psi, *c).map(|(orbit, traj)| {
                println!("base radius R = {:.10}", orbit.base_radius);
                println!("arc radius  r = {:.10}", orbit.arc_radius);
                println!("height      H = {:.10}", orbit.height);
                traj
            }),
            output,
        ),
    };
    match result {
        Ok(traj) => {
            if let Some(residual) = closure_residual(&traj) {
                println!("closure residual = {residual:.3e}");
            }
            let content = TrajectoryFile::from(&traj).to_json();
            if let Err(e) = emit(output.as_deref(), &content) {
                eprintln!("error: {e}");
                return EXIT_USAGE;
            }
            0
        }
        Err(OrbitError::BelowThreshold { psi, threshold }) => {
            eprintln!("psi = {psi} below the admissibility threshold {threshold:.10}");
            EXIT_DOMAIN
        }
        Err(e @ (OrbitError::OutOfRange(_) | OrbitError::NotCoprime { .. })) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_DOMAIN
        }
    }
}

fn cmd_threshold(name: ThresholdName) -> u8 {
    let tol = root_tol().min(1e-10);
    let value = match name {
        ThresholdName::CriticalAngle => critical_angle_threshold_with_tol(tol),
        ThresholdName::Bigon => bigon_admissibility_threshold_with_tol(tol),
    };
    println!("{value:.10}");
    0
}

fn cmd_wavefront(args: &WavefrontArgs) -> u8 {
    let points = match attainable_boundary(args.time, args.samples, args.r_max) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let content = match args.format {
        Format::Svg => svg::wavefront_svg(&points),
        _ => {
            let mut out = String::from("r,R,z1\n");
            for w in &points {
                out.push_str(&format!(
                    "{:.12e},{:.12e},{:.12e}\n",
                    w.r, w.landing_radius, w.z1
                ));
            }
            out
        }
    };
    if let Err(e) = emit(args.output.as_deref(), &content) {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    0
}

fn cmd_export_svg(args: &ExportSvgArgs) -> u8 {
    let text = match std::fs::read_to_string(&args.input) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error reading {}: {e}", args.input.display());
            return EXIT_USAGE;
        }
    };
    let file = match TrajectoryFile::from_json(&text) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error parsing {}: {e}", args.input.display());
            return EXIT_USAGE;
        }
    };
    let content = svg::trajectory_svg(
        &file,
        match args.plane {
            PlaneArg::Xy => svg::Plane::Xy,
            PlaneArg::Xz => svg::Plane::Xz,
        },
    );
    if let Err(e) = emit(args.output.as_deref(), &content) {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    0
}

fn cmd_sweep(args: &SweepArgs) -> u8 {
    let table = match TableSpec::parse(&args.table) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let text = match std::fs::read_to_string(&args.starts) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error reading {}: {e}", args.starts.display());
            return EXIT_USAGE;
        }
    };
    let starts: Vec<(usize, State)> = match text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| parse_start(l).map(|s| (i, s)))
        .collect::<Result<_, _>>()
    {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    if let Err(e) = std::fs::create_dir_all(&args.output_dir) {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    let params = RunParams {
        max_bounces: args.max_bounces,
        max_length: args.max_length,
        root_tol: root_tol(),
    };
    let jobs = args.jobs.max(1);
    let failures = std::sync::atomic::AtomicUsize::new(0);
    let next = std::sync::atomic::AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if k >= starts.len() {
                    break;
                }
                let (line, start) = starts[k];
                let path = args.output_dir.join(format!("run_{line:05}.json"));
                match run(&table, &start, &params) {
                    Ok(traj) => {
                        let content = TrajectoryFile::from(&traj).to_json();
                        if let Err(e) = write_atomic(&path, &content) {
                            eprintln!("line {line}: write failed: {e}");
                            failures.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                        }
                    }
                    Err(e) => {
                        eprintln!("line {line}: {e}");
                        failures.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                    }
                }
            });
        }
    });
    if failures.load(std::sync::atomic::Ordering::Relaxed) > 0 {
        EXIT_DOMAIN
    } else {
        0
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Periodic { kind } => cmd_periodic(kind),
        Command::Threshold { name } => cmd_threshold(*name),
        Command::Wavefront(args) => cmd_wavefront(args),
        Command::ExportSvg(args) => cmd_export_svg(args),
        Command::Sweep(args) => cmd_sweep(args),
    };
    ExitCode::from(code)
}
