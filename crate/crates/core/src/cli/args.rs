use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{param, Result};
use crate::functionals::{EdgeWeight, WeightFunctional};
use crate::point_process::{MarkLaw, RadiusLaw, Window};

#[derive(Debug, Parser)]
#[command(
    name = "geoprob",
    version,
    about = "Stabilizing functionals over random point measures"
)]
pub struct Cli {
    /// Worker threads. Affects wall time only, never results.
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a point set and write it as CSV.
    Generate(GenerateArgs),
    /// Evaluate a functional on a point-set file.
    Evaluate(EvaluateArgs),
    /// Estimate mean, V, D and the stabilization tail on a grid of intensities.
    Estimate(EstimateArgs),
    /// Run a CLT experiment from a JSON config; exit code 1 if a criterion fails.
    Verify(VerifyArgs),
    /// Re-run a recorded manifest.
    Replay(ReplayArgs),
    /// Print the JSON schema of experiment configs.
    Schema,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProcessKind {
    Poisson,
    Binomial,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub process: ProcessKind,
    /// Intensity of a homogeneous Poisson process on the window.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Scale of an inhomogeneous Poisson process with density `--density`.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Binomial sample size.
    #[arg(long)]
    pub n: Option<usize>,
    /// Density name: uniform, linear, gaussian.
    #[arg(long)]
    pub density: Option<String>,
    /// cubeD (unit cube), cubeD:H ([-H, H]^D), ballD:R (centred ball), box:LO,..:HI,..
    #[arg(long, default_value = "cube2")]
    pub window: String,
    /// none, times, radius:R, radius:LO:HI, or times+radius:...
    #[arg(long, default_value = "none")]
    pub marks: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args, Clone)]
pub struct FunctionalArgs {
    /// counting, knn, knn-len, delaunay, voronoi, sig, rsa, birth-growth, germ-grain
    #[arg(long)]
    pub functional: String,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Use out-edges only (k-NN).
    #[arg(long)]
    pub directed: bool,
    /// Edge weight: len, half-len, power:EXP:COEF, indicator:T, const:V
    #[arg(long)]
    pub phi: Option<String>,
    #[arg(long)]
    pub ball_volume: Option<f64>,
    #[arg(long)]
    pub speed: Option<f64>,
    /// Radius law: R or LO:HI.
    #[arg(long)]
    pub radius: Option<String>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub functional: FunctionalArgs,
    /// Scaling `λ`: weights are `ξ(λ^{1/d} x; λ^{1/d} X)`.
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Test functions (comma separated): one, x1, x2, x3, cos, cos2, cos3, or a constant.
    #[arg(long, value_delimiter = ',', default_value = "one")]
    pub f: Vec<String>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VMethodArg {
    Identity,
    Shells,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub functional: FunctionalArgs,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Intensities (comma separated, increasing).
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub tau: Vec<f64>,
    /// Replicates per estimate.
    #[arg(long, default_value_t = super::DEFAULT_REPS)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sampling half-width at τ = 1 (default: twice the first t with tail < 1e-3).
    #[arg(long)]
    pub half_width: Option<f64>,
    #[arg(long, value_enum, default_value = "identity")]
    pub v_method: VMethodArg,
    #[arg(long, default_value_t = 4.0)]
    pub rho_max: f64,
    #[arg(long, default_value_t = 16)]
    pub shells: usize,
    /// Homogeneity order for the scaling check.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Largest stabilization-grid radius (at τ = 1).
    #[arg(long, default_value_t = 12.0)]
    pub tail_max: f64,
    #[arg(long, default_value_t = 0.25)]
    pub tail_step: f64,
    #[arg(long, default_value_t = 16)]
    pub battery: usize,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Directory for the regenerated outputs (default: the recorded paths).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn num(s: &str, what: &str) -> Result<f64> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => param(format!("invalid {what} '{s}'")),
    }
}

pub fn parse_window(s: &str) -> Result<Window> {
    let dim_of = |t: &str| -> Result<usize> {
        match t {
            "1" => Ok(1),
            "2" => Ok(2),
            "3" => Ok(3),
            _ => param(format!("invalid window dimension in '{s}'")),
        }
    };
    let w = if let Some(rest) = s.strip_prefix("cube") {
        match rest.split_once(':') {
            None => Window::unit_cube(dim_of(rest)?),
            Some((d, h)) => Window::centered_cube(dim_of(d)?, num(h, "half-width")?),
        }
    } else if let Some(rest) = s.strip_prefix("ball") {
        let (d, r) = rest
            .split_once(':')
            .ok_or_else(|| crate::Error::Parameter(format!("ball window needs a radius: '{s}'")))?;
        Window::Ball {
            center: vec![0.0; dim_of(d)?],
            radius: num(r, "radius")?,
        }
    } else if let Some(rest) = s.strip_prefix("box:") {
        let (lo, hi) = rest.split_once(':').ok_or_else(|| {
            crate::Error::Parameter(format!("box window is box:LO,..:HI,..: '{s}'"))
        })?;
        let parse = |v: &str| {
            v.split(',')
                .map(|c| num(c, "coordinate"))
                .collect::<Result<Vec<f64>>>()
        };
        Window::Box {
            lo: parse(lo)?,
            hi: parse(hi)?,
        }
    } else {
        return param(format!(
            "unknown window '{s}' (cubeD, cubeD:H, ballD:R, box:LO:HI)"
        ));
    };
    w.validate()?;
    Ok(w)
}

pub fn parse_radius_law(s: &str) -> Result<RadiusLaw> {
    let law = match s.split_once(':') {
        None => RadiusLaw::Constant {
            value: num(s, "radius")?,
        },
        Some((lo, hi)) => RadiusLaw::Uniform {
            lo: num(lo, "radius")?,
            hi: num(hi, "radius")?,
        },
    };
    law.validate()?;
    Ok(law)
}

pub fn parse_marks(s: &str) -> Result<MarkLaw> {
    let mut law = MarkLaw::default();
    if s == "none" {
        return Ok(law);
    }
    for part in s.split('+') {
        if part == "times" {
            law.time = true;
        } else if let Some(r) = part.strip_prefix("radius:") {
            law.radius = Some(parse_radius_law(r)?);
        } else {
            return param(format!(
                "unknown mark spec '{part}' (none, times, radius:R, radius:LO:HI)"
            ));
        }
    }
    Ok(law)
}

pub fn parse_phi(s: &str) -> Result<EdgeWeight> {
    let parts: Vec<&str> = s.split(':').collect();
    let phi = match parts.as_slice() {
        ["len"] => EdgeWeight::length(),
        ["half-len"] => EdgeWeight::half_length(),
        ["power", e, c] => EdgeWeight::Power {
            exponent: num(e, "exponent")?,
            coefficient: num(c, "coefficient")?,
        },
        ["indicator", t] => EdgeWeight::Indicator {
            threshold: num(t, "threshold")?,
        },
        ["const", v] => EdgeWeight::Constant {
            value: num(v, "constant")?,
        },
        _ => {
            return param(format!(
                "unknown edge weight '{s}' (len, half-len, power:E:C, indicator:T, const:V)"
            ))
        }
    };
    phi.validate()?;
    Ok(phi)
}

impl FunctionalArgs {
    pub fn build(&self) -> Result<WeightFunctional> {
        let phi = || {
            self.phi
                .as_deref()
                .map_or(Ok(EdgeWeight::length()), parse_phi)
        };
        let radius = || match &self.radius {
            Some(r) => parse_radius_law(r),
            None => param(format!("--radius is required for {}", self.functional)),
        };
        let xi = match self.functional.as_str() {
            "counting" => WeightFunctional::Counting,
            "knn" => WeightFunctional::KnnEdge {
                k: self.k,
                directed: self.directed,
                phi: phi()?,
            },
            "knn-len" => {
                if self.phi.is_some() || self.directed {
                    return param("knn-len fixes an undirected graph with half-length weights");
                }
                WeightFunctional::knn_length(self.k)
            }
            "delaunay" => WeightFunctional::DelaunayEdge { phi: phi()? },
            "voronoi" => WeightFunctional::VoronoiEdge { phi: phi()? },
            "sig" => WeightFunctional::SigEdge { phi: phi()? },
            "rsa" => WeightFunctional::Rsa {
                ball_volume: self
                    .ball_volume
                    .ok_or_else(|| crate::Error::Parameter("--ball-volume is required for rsa".into()))?,
            },
            "birth-growth" => WeightFunctional::BirthGrowth {
                speed: self.speed.unwrap_or(0.0),
                radius: radius()?,
            },
            "germ-grain" => WeightFunctional::GermGrainVolume {
                radius: radius()?,
                window: None,
            },
            other => {
                return param(format!(
                    "unknown functional '{other}' (counting, knn, knn-len, delaunay, voronoi, sig, rsa, birth-growth, germ-grain)"
                ))
            }
        };
        xi.validate()?;
        Ok(xi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn windows_and_marks() {
        assert_eq!(parse_window("cube2").unwrap(), Window::unit_cube(2));
        assert_eq!(
            parse_window("cube3:2").unwrap(),
            Window::centered_cube(3, 2.0)
        );
        assert!(
            matches!(parse_window("ball2:1.5").unwrap(), Window::Ball { radius, .. } if radius == 1.5)
        );
        assert!(parse_window("box:0,0:1,2").is_ok());
        assert!(parse_window("cube4").is_err());
        assert!(parse_window("torus").is_err());
        let m = parse_marks("times+radius:0.1:0.2").unwrap();
        assert!(m.time && matches!(m.radius, Some(RadiusLaw::Uniform { .. })));
        assert!(parse_marks("weights").is_err());
        assert_eq!(parse_phi("half-len").unwrap(), EdgeWeight::half_length());
        assert!(parse_phi("power:1").is_err());
    }
}
