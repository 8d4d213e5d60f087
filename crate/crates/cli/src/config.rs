//! Flat JSON run configuration, command-line overrides and validation.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;
use tachy::{FtlSpeed, Vec3};

/// Frame velocity: a speed along +x or a full vector.
#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum VelocityValue {
    Speed(f64),
    Vector([f64; 3]),
}

impl VelocityValue {
    pub fn to_vec(self) -> Vec3<f64> {
        match self {
            VelocityValue::Speed(s) => Vec3::along_x(s),
            VelocityValue::Vector([x, y, z]) => Vec3::new(x, y, z),
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum FtlValue {
    Number(f64),
    Text(String),
}

/// Contents of a `--config` / sweep config file. Every field is optional here;
/// each command checks for what it needs.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub v: Option<VelocityValue>,
    pub l: Option<f64>,
    pub l1: Option<f64>,
    pub l2: Option<f64>,
    pub ubar: Option<f64>,
    pub ftl: Option<FtlValue>,
    pub uy_prime: Option<f64>,
    pub left_grid: Option<Vec<f64>>,
    pub right_grid: Option<Vec<f64>>,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
}

/// Experiment parameters shared by the commands. Flags override file values.
#[derive(Args, Clone, Debug, Default)]
pub struct ParamArgs {
    /// Lab velocity relative to the preferred frame: a speed along x, or `vx,vy,vz`.
    #[arg(long, value_parser = parse_velocity, allow_hyphen_values = true)]
    pub v: Option<VelocityValue>,
    /// Arm length used for both arms unless --l1/--l2 are given.
    #[arg(long)]
    pub l: Option<f64>,
    #[arg(long)]
    pub l1: Option<f64>,
    #[arg(long)]
    pub l2: Option<f64>,
    /// Interaction speed in the preferred frame (must exceed 1).
    #[arg(long)]
    pub ubar: Option<f64>,
    /// Interaction speed: a number above 1, or `inf` for instantaneous.
    #[arg(long, value_parser = parse_ftl_flag)]
    pub ftl: Option<FtlValue>,
    /// Measured lab speed of the front along y (scenario C).
    #[arg(long = "uy-prime")]
    pub uy_prime: Option<f64>,
    /// Flat JSON config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write the result to this file instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

fn parse_velocity(s: &str) -> Result<VelocityValue, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let nums = parts
        .iter()
        .map(|p| p.parse::<f64>().map_err(|_| format!("'{p}' is not a number")))
        .collect::<Result<Vec<_>, _>>()?;
    match nums.as_slice() {
        [s] => Ok(VelocityValue::Speed(*s)),
        [x, y, z] => Ok(VelocityValue::Vector([*x, *y, *z])),
        _ => Err("expected a speed or three components vx,vy,vz".into()),
    }
}

fn parse_ftl_flag(s: &str) -> Result<FtlValue, String> {
    Ok(match s.trim().parse::<f64>() {
        Ok(x) if x.is_finite() => FtlValue::Number(x),
        _ => FtlValue::Text(s.trim().to_string()),
    })
}

/// Accumulates validation errors so they can be reported together.
#[derive(Debug, Default)]
pub struct Problems(pub Vec<String>);

impl Problems {
    pub fn push(&mut self, msg: impl Into<String>) {
        self.0.push(msg.into());
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn load_file(path: &Path) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

/// File values overlaid with command-line flags.
#[derive(Clone, Debug, Default)]
pub struct Merged {
    pub file: RunConfig,
    pub v: Option<VelocityValue>,
    pub l1: Option<f64>,
    pub l2: Option<f64>,
    pub ubar: Option<f64>,
    pub ftl: Option<FtlValue>,
    pub uy_prime: Option<f64>,
    pub output: Option<PathBuf>,
}

impl Merged {
    pub fn new(file: RunConfig, args: &ParamArgs) -> Self {
        // --l on the command line sets both arms and so outranks per-arm file values.
        let l = args.l.or(file.l);
        let (l1, l2) = match args.l {
            Some(l) => (args.l1.or(Some(l)), args.l2.or(Some(l))),
            None => (args.l1.or(file.l1).or(l), args.l2.or(file.l2).or(l)),
        };
        // Either flag form of the interaction speed replaces both file forms.
        let (ubar, ftl) = if args.ubar.is_some() || args.ftl.is_some() {
            (args.ubar, args.ftl.clone())
        } else {
            (file.ubar, file.ftl.clone())
        };
        Self {
            v: args.v.or(file.v),
            l1,
            l2,
            ubar,
            ftl,
            uy_prime: args.uy_prime.or(file.uy_prime),
            output: args.output.clone().or_else(|| file.output.clone()),
            file,
        }
    }

    pub fn velocity(&self, p: &mut Problems) -> Option<Vec3<f64>> {
        let Some(v) = self.v else {
            p.push("missing frame velocity (v)");
            return None;
        };
        let v = v.to_vec();
        if !v.is_finite() {
            p.push("v must be finite");
            None
        } else if v.norm() >= 1.0 {
            p.push(format!("|v| = {} must be below 1", tachy::io::num(v.norm())));
            None
        } else {
            Some(v)
        }
    }

    pub fn arms(&self, p: &mut Problems) -> Option<(f64, f64)> {
        let mut arm = |name: &str, value: Option<f64>| match value {
            None => {
                p.push(format!("missing arm length {name} (or l)"));
                None
            }
            Some(x) if !(x.is_finite() && x > 0.0) => {
                p.push(format!("{name} = {x} must be positive"));
                None
            }
            Some(x) => Some(x),
        };
        let l1 = arm("l1", self.l1);
        let l2 = arm("l2", self.l2);
        Some((l1?, l2?))
    }

    /// Interaction speed from `ftl` or `ubar`; `None` if neither was given.
    pub fn ftl(&self, p: &mut Problems) -> Option<Result<FtlSpeed<f64>, ()>> {
        let from_number = |p: &mut Problems, name: &str, x: f64| {
            FtlSpeed::finite(x).map_err(|_| p.push(format!("{name} = {x} must be a finite number above 1")))
        };
        match (&self.ftl, self.ubar) {
            (Some(_), Some(_)) => {
                p.push("give either ftl or ubar, not both");
                Some(Err(()))
            }
            (Some(FtlValue::Number(x)), None) => Some(from_number(p, "ftl", *x)),
            (Some(FtlValue::Text(s)), None) => Some(match s.to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "instantaneous" => Ok(FtlSpeed::Instantaneous),
                _ => {
                    p.push(format!("ftl = '{s}' must be a number above 1 or 'inf'"));
                    Err(())
                }
            }),
            (None, Some(x)) => Some(from_number(p, "ubar", x)),
            (None, None) => None,
        }
    }

    pub fn grid(&self, name: &str, grid: &Option<Vec<f64>>, p: &mut Problems) -> Option<Vec<f64>> {
        match grid {
            None => p.push(format!("missing {name}")),
            Some(g) if g.is_empty() => p.push(format!("{name} is empty")),
            Some(g) if g.iter().any(|x| !(x.is_finite() && *x >= 0.0)) => {
                p.push(format!("{name} entries must be finite and non-negative"))
            }
            Some(g) => return Some(g.clone()),
        }
        None
    }
}
