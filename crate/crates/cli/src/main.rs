//! `tachy`: run the two-photon scenarios, detour sweeps, frame recovery and
//! coordinate transforms from the command line.

mod config;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use config::{load_file, Merged, ParamArgs, Problems, RunConfig};
use tachy::experiment::detour_sweep;
use tachy::ftl::NarrativeKind;
use tachy::io::{num, read_measurements_csv, recovery_json, write_measurements_csv, write_sweep_csv};
use tachy::kinematics::to_frame;
use tachy::solver::perturb_multiplicative;
use tachy::{
    compose_velocity_to_lab, compose_velocity_to_preferred, forward_measurements, recover_frame, run_collinear,
    run_transverse, transverse_from_lab_speed, Boost, Error, Event, ExperimentConfig, Frame, FtlSpeed, Geometry,
    Outcome, Photon, Vec3,
};

#[derive(Parser, Debug)]
#[command(name = "tachy", version, about = "Two-photon correlations mediated by a superluminal interaction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one of the three reference scenarios and print its event table.
    #[command(allow_negative_numbers = true)]
    Scenario {
        #[arg(value_enum, ignore_case = true)]
        name: Scenario,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Sweep left/right detour lengths and write the result as CSV.
    #[command(allow_negative_numbers = true)]
    Sweep {
        /// Flat JSON config with v, ftl or ubar, l1, l2, left_grid and right_grid.
        #[arg(value_name = "CONFIG")]
        config_file: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Recover the lab velocity and interaction speed from directional lab speeds.
    #[command(allow_negative_numbers = true)]
    Recover {
        /// Measurements CSV with columns phi, u_prime and optionally sigma.
        measurements: Option<PathBuf>,
        /// Generate measurements from a known frame instead of reading a file.
        #[arg(long, conflicts_with = "measurements")]
        synthetic: bool,
        /// Synthetic frame speed.
        #[arg(long, requires = "synthetic")]
        v: Option<f64>,
        /// Synthetic frame orientation in the lab plane, radians.
        #[arg(long, default_value_t = 0.0, requires = "synthetic")]
        orientation: f64,
        /// Synthetic interaction speed.
        #[arg(long, requires = "synthetic")]
        ubar: Option<f64>,
        /// Number of equally spaced apparatus angles.
        #[arg(long, default_value_t = 8, requires = "synthetic")]
        angles: usize,
        /// Relative noise on each synthetic reading.
        #[arg(long, default_value_t = 0.0, requires = "synthetic")]
        sigma: f64,
        /// Noise seed (default 0).
        #[arg(long, requires = "synthetic")]
        seed: Option<u64>,
        /// Also write the synthetic measurements to this CSV file.
        #[arg(long, requires = "synthetic")]
        save_measurements: Option<PathBuf>,
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Flat JSON config supplying v, ubar, seed and output; flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Transform an event or a velocity between the preferred and lab frames.
    #[command(allow_negative_numbers = true)]
    Transform {
        #[arg(value_enum)]
        kind: TransformKind,
        /// Event `t,x,y,z` or velocity `ux,uy,uz`.
        #[arg(allow_hyphen_values = true)]
        value: String,
        /// Lab velocity relative to the preferred frame: a speed along x, or `vx,vy,vz`.
        #[arg(long, allow_hyphen_values = true)]
        v: String,
        /// Target frame.
        #[arg(long, value_enum)]
        to: TargetFrame,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Scenario {
    A,
    B,
    C,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TransformKind {
    Event,
    Velocity,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TargetFrame {
    Lab,
    Preferred,
}

enum CliError {
    Config(Vec<String>),
    NoConvergence(String),
    Runtime(String),
}

impl CliError {
    fn config(msg: impl Into<String>) -> Self {
        CliError::Config(vec![msg.into()])
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::NoConvergence(_) => 3,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NoConvergence { .. } => CliError::NoConvergence(e.to_string()),
            Error::InsufficientData { .. }
            | Error::SuperluminalFrame { .. }
            | Error::InvalidFtlSpeed(_)
            | Error::InvalidLength(_)
            | Error::NonFinite(_)
            | Error::EmptyGrid
            | Error::OutOfRange
            | Error::Unsupported(_) => CliError::config(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

fn check(p: Problems) -> Result<(), CliError> {
    if p.is_empty() {
        Ok(())
    } else {
        Err(CliError::Config(p.0))
    }
}

fn merged(params: &ParamArgs, file: Option<&Path>) -> Result<Merged, CliError> {
    let file = match file.or(params.config.as_deref()) {
        Some(path) => load_file(path).map_err(CliError::config)?,
        None => RunConfig::default(),
    };
    Ok(Merged::new(file, params))
}

/// Writes to stdout, or to `path` via a temporary file and a rename.
fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    let Some(path) = path else {
        let mut out = std::io::stdout().lock();
        return out
            .write_all(text.as_bytes())
            .and_then(|_| out.flush())
            .map_err(|e| CliError::Runtime(e.to_string()));
    };
    let name = path.file_name().ok_or_else(|| CliError::config(format!("{} is not a file path", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let result = std::fs::write(&tmp, text).and_then(|_| std::fs::rename(&tmp, path));
    if let Err(e) = result {
        let _ = std::fs::remove_file(&tmp);
        return Err(CliError::Runtime(format!("{}: {e}", path.display())));
    }
    Ok(())
}

fn cell(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn photon_name(p: Photon) -> &'static str {
    match p {
        Photon::Nu1 => "nu1",
        Photon::Nu2 => "nu2",
    }
}

/// Event table for a finished run: preferred-frame and lab columns side by side.
fn event_table(o: &Outcome<f64>, extra: &[(&str, Option<f64>, Option<f64>, &str)]) -> String {
    let mut s = String::from("quantity,S,lab,note\n");
    let mut row = |q: &str, a: Option<f64>, b: Option<f64>, note: &str| {
        let _ = writeln!(s, "{q},{},{},{note}", cell(a), cell(b));
    };
    for (tag, d) in [("1", &o.detection1), ("2", &o.detection2)] {
        row(&format!("x{tag}"), Some(d.preferred.x), Some(d.lab.x), "");
        row(&format!("y{tag}"), Some(d.preferred.y), Some(d.lab.y), "");
        row(&format!("t{tag}"), Some(d.preferred.t), Some(d.lab.t), "");
    }
    let arrival_s = o.ftl_arrival.event();
    let arrival_lab = o.narrative.as_ref().map(|n| n.arrival);
    let boundary = if o.arrival_on_boundary() { "boundary" } else { "" };
    row("xF", arrival_s.map(|e| e.x), arrival_lab.map(|e| e.x), "");
    row("yF", arrival_s.map(|e| e.y), arrival_lab.map(|e| e.y), "");
    row("tF", arrival_s.map(|e| e.t), arrival_lab.map(|e| e.t), boundary);
    let partner = o.partner_detection();
    row("t_partner", Some(partner.preferred.t), Some(partner.lab.t), photon_name(o.trigger_photon.partner()));
    if let Some(n) = &o.narrative {
        let kind = match n.kind {
            NarrativeKind::ForwardSignal => "forward",
            NarrativeKind::SpontaneousForcing => "back_signal",
            NarrativeKind::InstantaneousInLab => "instantaneous",
        };
        row("signal_distance", None, Some(n.distance), "");
        row("signal_time", None, Some(n.duration), "");
        row("signal_speed", None, n.apparent_speed, kind);
    }
    for &(q, a, b, note) in extra {
        row(q, a, b, note);
    }
    let _ = writeln!(s, "trigger,{},,", photon_name(o.trigger_photon));
    let _ = writeln!(s, "correlated,{},,", o.correlated);
    let _ = writeln!(s, "order_class,{},,", o.order_class.as_str());
    s
}

fn cmd_scenario(name: Scenario, params: &ParamArgs) -> Result<(String, Option<PathBuf>), CliError> {
    let m = merged(params, None)?;
    let mut p = Problems::default();
    let v = m.velocity(&mut p);
    let ftl = m.ftl(&mut p);
    match name {
        Scenario::A | Scenario::B => {
            let arms = m.arms(&mut p);
            if m.uy_prime.is_some() {
                p.push("uy_prime only applies to scenario C");
            }
            if let Some(v) = v {
                if v.y != 0.0 || v.z != 0.0 {
                    p.push("scenarios A and B move the lab along x; give v as a speed");
                }
            }
            // Scenario A defaults to the instantaneous limit, B to the boundary speed 1/v.
            let ftl = match (ftl, name, v) {
                (Some(f), _, _) => f.ok(),
                (None, Scenario::A, _) => Some(FtlSpeed::Instantaneous),
                (None, _, Some(v)) if v.x > 0.0 && FtlSpeed::finite(1.0 / v.x).is_ok() => {
                    Some(FtlSpeed::Finite(1.0 / v.x))
                }
                (None, _, _) => {
                    p.push("scenario B needs ubar (or ftl) unless 0 < v < 1");
                    None
                }
            };
            check(p)?;
            let (v, ftl, (l1, l2)) = (v.unwrap(), ftl.unwrap(), arms.unwrap());
            let o = run_collinear(&ExperimentConfig::collinear(v.x, ftl, l1, l2))?;
            Ok((event_table(&o, &[]), m.output))
        }
        Scenario::C => {
            // Arm lengths only shape the event table; the speed reading does not depend on them.
            let (l1, l2) = (m.l1.unwrap_or(1.0), m.l2.unwrap_or(1.0));
            for (name, l) in [("l1", l1), ("l2", l2)] {
                if !(l.is_finite() && l > 0.0) {
                    p.push(format!("{name} = {l} must be positive"));
                }
            }
            if let Some(v) = v {
                if v.y != 0.0 || v.z != 0.0 {
                    p.push("scenario C moves the lab along x; give v as a speed");
                }
            }
            let uy = m.uy_prime;
            if let Some(u) = uy {
                if !(u.is_finite() && u.abs() > 1.0) {
                    p.push(format!("uy_prime = {u} must be a finite speed above 1"));
                }
            }
            let ftl = match (ftl, uy) {
                (Some(_), Some(_)) => {
                    p.push("give either uy_prime or the interaction speed, not both");
                    None
                }
                (Some(f), None) => f.ok(),
                (None, Some(_)) => None,
                (None, None) => {
                    p.push("scenario C needs uy_prime, ubar or ftl");
                    None
                }
            };
            check(p)?;
            let v = v.unwrap().x;
            let (ftl, measured) = match (ftl, uy) {
                (Some(f), _) => (f, None),
                (None, Some(u)) => {
                    let reading = transverse_from_lab_speed(v, u)?;
                    (FtlSpeed::finite(reading.ubar)?, Some(reading))
                }
                (None, None) => unreachable!("checked above"),
            };
            let cfg = ExperimentConfig::new(Vec3::along_x(v), ftl, Geometry::Transverse { l1, l2 });
            let t = run_transverse(&cfg)?;
            let reading = measured.or(t.reading);
            let extra = match reading {
                Some(r) => vec![
                    ("uy_prime", None, Some(r.lab_speed_y), if measured.is_some() { "measured" } else { "" }),
                    ("ubar_x", Some(r.ubar_x), None, ""),
                    ("ubar_y", Some(r.ubar_y), None, ""),
                    ("ubar", Some(r.ubar), None, ""),
                ],
                None => vec![("uy_prime", None, None, "instantaneous")],
            };
            Ok((event_table(&t.outcome, &extra), m.output))
        }
    }
}

fn cmd_sweep(path: &Path, params: &ParamArgs) -> Result<(String, Option<PathBuf>), CliError> {
    let m = merged(params, Some(path))?;
    let mut p = Problems::default();
    let v = m.velocity(&mut p);
    let arms = m.arms(&mut p);
    let ftl = match m.ftl(&mut p) {
        Some(f) => f.ok(),
        None => {
            p.push("missing interaction speed (ftl or ubar)");
            None
        }
    };
    let left = m.grid("left_grid", &m.file.left_grid, &mut p);
    let right = m.grid("right_grid", &m.file.right_grid, &mut p);
    if m.uy_prime.is_some() {
        p.push("uy_prime does not apply to sweeps");
    }
    check(p)?;
    let ((l1, l2), left, right) = (arms.unwrap(), left.unwrap(), right.unwrap());
    let base = ExperimentConfig::new(v.unwrap(), ftl.unwrap(), Geometry::Collinear { l1, l2 });
    let table = detour_sweep(&base, &left, &right)?;
    let mut buf = Vec::new();
    write_sweep_csv(&table, &mut buf).map_err(|e| CliError::Runtime(e.to_string()))?;
    let text = String::from_utf8(buf).map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok((text, m.output))
}

#[allow(clippy::too_many_arguments)]
fn cmd_recover(
    measurements: Option<&Path>,
    synthetic: bool,
    v: Option<f64>,
    orientation: f64,
    ubar: Option<f64>,
    angles: usize,
    sigma: f64,
    seed: u64,
    save: Option<&Path>,
) -> Result<String, CliError> {
    let ms = if synthetic {
        let mut p = Problems::default();
        match v {
            Some(v) if v.is_finite() && (0.0..1.0).contains(&v) => {}
            Some(v) => p.push(format!("v = {v} must lie in [0, 1)")),
            None => p.push("synthetic recovery needs --v"),
        }
        match ubar {
            Some(u) if u.is_finite() && u > 1.0 => {}
            Some(u) => p.push(format!("ubar = {u} must be a finite number above 1")),
            None => p.push("synthetic recovery needs --ubar"),
        }
        if !orientation.is_finite() {
            p.push("orientation must be finite");
        }
        if angles < 3 {
            p.push("need at least 3 angles");
        }
        if !(sigma.is_finite() && sigma >= 0.0) {
            p.push(format!("sigma = {sigma} must be non-negative"));
        }
        check(p)?;
        let phis: Vec<f64> = (0..angles).map(|i| std::f64::consts::TAU * i as f64 / angles as f64).collect();
        let clean: Vec<_> = forward_measurements(Vec3::planar(v.unwrap(), orientation), ubar.unwrap(), &phis)?
            .iter()
            .filter_map(|m| m.measured())
            .collect();
        let ms = if sigma > 0.0 {
            perturb_multiplicative(&clean, sigma, &mut ChaCha8Rng::seed_from_u64(seed))
        } else {
            clean
        };
        if let Some(path) = save {
            let mut buf = Vec::new();
            write_measurements_csv(&ms, &mut buf).map_err(|e| CliError::Runtime(e.to_string()))?;
            emit(Some(path), &String::from_utf8_lossy(&buf))?;
        }
        ms
    } else {
        let path = measurements.ok_or_else(|| CliError::config("give a measurements CSV or --synthetic"))?;
        let file = std::fs::File::open(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        read_measurements_csv(file).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?
    };
    let r = recover_frame(&ms)?;
    Ok(recovery_json(&r) + "\n")
}

fn parse_list(s: &str, n: usize, what: &str) -> Result<Vec<f64>, CliError> {
    let vals = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| CliError::config(format!("{what}: '{}' is not a number", p.trim()))))
        .collect::<Result<Vec<_>, _>>()?;
    if vals.len() != n {
        return Err(CliError::config(format!("{what}: expected {n} comma-separated numbers")));
    }
    Ok(vals)
}

fn cmd_transform(kind: TransformKind, value: &str, v: &str, to: TargetFrame) -> Result<String, CliError> {
    let vel = match v.split(',').count() {
        1 => Vec3::along_x(parse_list(v, 1, "v")?[0]),
        _ => {
            let c = parse_list(v, 3, "v")?;
            Vec3::new(c[0], c[1], c[2])
        }
    };
    let b = Boost::new(vel)?;
    match kind {
        TransformKind::Event => {
            let c = parse_list(value, 4, "event")?;
            let (from, target) = match to {
                TargetFrame::Lab => (Frame::Preferred, Frame::Lab),
                TargetFrame::Preferred => (Frame::Lab, Frame::Preferred),
            };
            let e = to_frame(&Event::new(c[0], Vec3::new(c[1], c[2], c[3]), from), &b, target)?;
            Ok(format!("t,x,y,z\n{},{},{},{}\n", num(e.t), num(e.x), num(e.y), num(e.z)))
        }
        TransformKind::Velocity => {
            let c = parse_list(value, 3, "velocity")?;
            let u = Vec3::new(c[0], c[1], c[2]);
            let out = match to {
                TargetFrame::Lab => compose_velocity_to_lab(u, &b),
                TargetFrame::Preferred => compose_velocity_to_preferred(u, &b),
            };
            Ok(match out {
                Ok(w) => format!("ux,uy,uz,speed\n{},{},{},{}\n", num(w.x), num(w.y), num(w.z), num(w.norm())),
                Err(Error::Divergent) => "ux,uy,uz,speed\n,,,inf\n".into(),
                Err(e) => return Err(e.into()),
            })
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("TACHY_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::config(format!("TACHY_THREADS = '{raw}' must be a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Runtime(e.to_string()))
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Scenario { name, params } => {
            let (text, output) = cmd_scenario(name, &params)?;
            emit(output.as_deref(), &text)
        }
        Command::Sweep { config_file, params } => {
            if params.config.is_some() {
                return Err(CliError::config("sweep takes its config file as the positional argument"));
            }
            let (text, output) = cmd_sweep(&config_file, &params)?;
            emit(output.as_deref(), &text)
        }
        Command::Recover {
            measurements,
            synthetic,
            v,
            orientation,
            ubar,
            angles,
            sigma,
            seed,
            save_measurements,
            output,
            config,
        } => {
            let file = match config {
                Some(path) => load_file(&path).map_err(CliError::config)?,
                None => RunConfig::default(),
            };
            let file_v = match file.v {
                Some(config::VelocityValue::Speed(s)) => Some(s),
                Some(config::VelocityValue::Vector(_)) => {
                    return Err(CliError::config("synthetic recovery takes v as a speed; use --orientation"))
                }
                None => None,
            };
            let text = cmd_recover(
                measurements.as_deref(),
                synthetic,
                v.or(file_v),
                orientation,
                ubar.or(file.ubar),
                angles,
                sigma,
                seed.or(file.seed).unwrap_or(0),
                save_measurements.as_deref(),
            )?;
            emit(output.or(file.output).as_deref(), &text)
        }
        Command::Transform { kind, value, v, to } => emit(None, &cmd_transform(kind, &value, &v, to)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Config(msgs) => {
                    for m in msgs {
                        eprintln!("error: {m}");
                    }
                }
                CliError::NoConvergence(m) | CliError::Runtime(m) => eprintln!("error: {m}"),
            }
            ExitCode::from(e.code())
        }
    }
}
