use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gtens::combinatorics::parse_rational;
use gtens::enumerator::Method;
use gtens::{Algorithm, BigRational, EnsembleSpec, Error, Result};
use num_traits::{One, Signed, Zero};

#[derive(Debug, Parser)]
#[command(
    name = "gtens",
    version,
    about = "Ensemble-average COMP/DD error enumerators for sparse pooling graphs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the full enumerator table as CSV and check its row sums.
    Enumerate(EnumerateArgs),
    /// Closed-form FAR (COMP) or MDR (DD) over a prevalence grid.
    Analyze(AnalyzeArgs),
    /// Monte Carlo FAR/MDR estimates over a prevalence grid.
    Simulate(SimulateArgs),
    /// Compare closed-form enumerators against exhaustive enumeration.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct SpecSource {
    /// JSON ensemble file: {"n","m","lambda","rho"} or {"n","l","r"}.
    #[arg(long, value_name = "PATH")]
    pub spec: Option<PathBuf>,
    /// Regular ensemble as n,l,r.
    #[arg(long, value_name = "N,L,R", value_parser = parse_regular)]
    pub regular: Option<(u64, u32, u32)>,
}

#[derive(Debug, Args)]
pub struct Common {
    #[command(flatten)]
    pub source: SpecSource,
    #[arg(long, value_enum, env = "GTENS_ALGORITHM", default_value = "comp")]
    pub algorithm: AlgorithmArg,
    /// Output file; standard output when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Significant digits in decimal columns.
    #[arg(long, env = "GTENS_PRECISION", default_value_t = 12)]
    pub precision: usize,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct DeltaSource {
    /// Single prevalence, e.g. 0.05 or 1/20.
    #[arg(long, value_name = "X")]
    pub delta: Option<String>,
    /// start:stop:step with exact rational steps, or a comma-separated list.
    #[arg(long, value_name = "GRID")]
    pub delta_grid: Option<String>,
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "auto")]
    pub method: MethodArg,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub deltas: DeltaSource,
    #[arg(long, value_enum, default_value = "auto")]
    pub method: MethodArg,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub deltas: DeltaSource,
    /// Graph realizations per prevalence.
    #[arg(long, env = "GTENS_GRAPHS", default_value_t = 100)]
    pub graphs: u64,
    /// Defectivity patterns per graph.
    #[arg(long, env = "GTENS_PATTERNS", default_value_t = 10_000)]
    pub patterns: u64,
    #[arg(long, env = "GTENS_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, env = "GTENS_WORKERS")]
    pub workers: Option<usize>,
    /// Also compute the closed-form value for the analytic_value column.
    #[arg(long)]
    pub analytic: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Largest number of socket matchings to enumerate.
    #[arg(long, env = "GTENS_ORACLE_LIMIT", default_value_t = gtens::oracle::DEFAULT_LIMIT)]
    pub oracle_limit: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AlgorithmArg {
    Comp,
    Dd,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::Comp => Algorithm::Comp,
            AlgorithmArg::Dd => Algorithm::Dd,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Auto,
    Regular,
    Irregular,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Auto => Method::Auto,
            MethodArg::Regular => Method::Regular,
            MethodArg::Irregular => Method::Irregular,
        }
    }
}

fn parse_regular(text: &str) -> std::result::Result<(u64, u32, u32), String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let [n, l, r] = parts[..] else {
        return Err("expected three comma-separated integers n,l,r".into());
    };
    let bad = |what: &str, v: &str| format!("{what} must be a positive integer, got `{v}`");
    Ok((
        n.parse().map_err(|_| bad("n", n))?,
        l.parse().map_err(|_| bad("l", l))?,
        r.parse().map_err(|_| bad("r", r))?,
    ))
}

impl SpecSource {
    /// Reads and structurally validates the ensemble.
    pub fn load(&self) -> Result<EnsembleSpec> {
        let spec = match (&self.spec, self.regular) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    std::io::Error::new(e.kind(), format!("cannot read {}: {e}", path.display()))
                })?;
                EnsembleSpec::from_json(&text)?
            }
            (None, Some((n, l, r))) => EnsembleSpec::regular(n, l, r)?,
            (None, None) => unreachable!("clap requires one spec source"),
        };
        spec.validate_structure()?;
        Ok(spec)
    }
}

impl DeltaSource {
    pub fn grid(&self) -> Result<Vec<BigRational>> {
        match (&self.delta, &self.delta_grid) {
            (Some(x), _) => Ok(vec![check_prevalence(parse_rational(x)?)?]),
            (None, Some(grid)) => parse_grid(grid),
            (None, None) => unreachable!("clap requires one prevalence source"),
        }
    }

    pub fn is_grid(&self) -> bool {
        self.delta_grid.is_some()
    }
}

fn check_prevalence(delta: BigRational) -> Result<BigRational> {
    if delta.is_negative() || delta > BigRational::one() {
        return Err(Error::Usage(format!(
            "prevalence {delta} is outside [0, 1]"
        )));
    }
    Ok(delta)
}

/// `start:stop:step` (inclusive of `stop` when it lies on the grid) or an
/// explicit comma-separated list.
pub fn parse_grid(text: &str) -> Result<Vec<BigRational>> {
    let parts: Vec<&str> = text.split(':').collect();
    let points = match parts[..] {
        [start, stop, step] => {
            let (start, stop, step) = (
                parse_rational(start)?,
                parse_rational(stop)?,
                parse_rational(step)?,
            );
            if step <= BigRational::zero() {
                return Err(Error::Usage(format!("grid step {step} must be positive")));
            }
            if start > stop {
                return Err(Error::Usage(format!(
                    "grid start {start} exceeds stop {stop}"
                )));
            }
            let mut points = Vec::new();
            let mut x = start;
            while x <= stop {
                points.push(x.clone());
                x += &step;
            }
            points
        }
        [list] => list
            .split(',')
            .map(parse_rational)
            .collect::<Result<Vec<_>>>()?,
        _ => {
            return Err(Error::Usage(format!(
                "cannot parse grid `{text}`; use start:stop:step or a comma-separated list"
            )))
        }
    };
    if points.is_empty() {
        return Err(Error::Usage("prevalence grid is empty".into()));
    }
    points.into_iter().map(check_prevalence).collect()
}
