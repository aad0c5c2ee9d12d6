use clap::{Args, Parser, Subcommand, ValueEnum};
use stablekit::Domain;

#[derive(Parser, Debug)]
#[command(name = "stablekit", version, about = "Local analysis of stable polynomials in two variables")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Compact canonical JSON on standard output (the default).
    #[arg(long, global = true, conflicts_with = "pretty")]
    pub json: bool,
    /// Indented key/value view of the JSON report.
    #[arg(long, global = true)]
    pub pretty: bool,
    /// Worker threads for parallel stages.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Include wall-clock time per stage (makes output non-reproducible).
    #[arg(long, global = true)]
    pub timings: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainArg {
    Disk,
    Uhp,
}

impl From<DomainArg> for Domain {
    fn from(d: DomainArg) -> Domain {
        match d {
            DomainArg::Disk => Domain::Disk,
            DomainArg::Uhp => Domain::UpperHalfPlane,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct Local {
    /// Denominator: a file, or the polynomial itself.
    #[arg(long, alias = "poly")]
    pub den: String,
    #[arg(long, value_enum, default_value = "uhp")]
    pub domain: DomainArg,
    /// Boundary point "a,b" (default "0,0" for uhp, "1,1" for disk).
    #[arg(long, allow_hyphen_values = true)]
    pub center: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Scan for zeros inside the domain.
    Stability {
        /// Denominator: a file, or the polynomial itself.
        #[arg(long, alias = "poly")]
        den: String,
        #[arg(long, value_enum, default_value = "disk")]
        domain: DomainArg,
        /// Radial grid points per slice variable.
        #[arg(long, default_value_t = 16)]
        grid: usize,
        /// Distance to the boundary below which a root counts as a contact.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Homogeneous expansion, slopes and interlacing at a point.
    Homog {
        #[command(flatten)]
        local: Local,
    },
    /// Branch factorization and contact orders.
    Puiseux {
        #[command(flatten)]
        local: Local,
        /// Truncation order of the branch series.
        #[arg(long, default_value_t = 8)]
        order: usize,
        /// Values of t for the perturbation check of A + tB.
        #[arg(long, allow_hyphen_values = true)]
        t: Option<String>,
        /// Number of random t values in [-2, 2] for the perturbation check.
        #[arg(long)]
        perturb: Option<usize>,
        /// Seed for the random t values.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Radius for the branch lower-bound certificates.
        #[arg(long, default_value_t = 0.05)]
        radius: f64,
    },
    /// Boundary regularity of num/den.
    Regularity {
        #[command(flatten)]
        local: Local,
        /// Numerator: a file, or the polynomial itself.
        #[arg(long)]
        num: String,
        /// Highest regularity order tried.
        #[arg(long, default_value_t = 6)]
        kmax: u32,
    },
    /// Local boundedness of num/den.
    Numerator {
        #[command(flatten)]
        local: Local,
        /// Numerator: a file, or the polynomial itself.
        #[arg(long)]
        num: String,
    },
    /// Derivative integrability indices on the torus.
    Integrability {
        /// Denominator: a file, or the polynomial itself.
        #[arg(long, alias = "poly")]
        den: String,
        /// Estimate integrability of d/dz1 (num/den) by quadrature.
        #[arg(long, conflicts_with = "enumerate")]
        num: Option<String>,
        /// List the index set with witness numerators.
        #[arg(long)]
        enumerate: bool,
        /// Exponents for the quadrature estimate.
        #[arg(long, default_value = "1,1.5,2,3")]
        p: String,
        /// Write shell sums `zero,p,shell,radius,sum` to this file.
        #[arg(long, requires = "num", conflicts_with = "enumerate")]
        csv: Option<String>,
    },
    /// Level sets of A + tB near a point.
    Trace {
        #[command(flatten)]
        local: Local,
        #[arg(long, allow_hyphen_values = true, default_value = "-1,0,1")]
        t: String,
        /// "r,R": x1 in (-r, r), |x2| < R.
        #[arg(long, default_value = "0.1,1")]
        window: String,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// Geometric spacing in x1 towards the point.
        #[arg(long)]
        geometric: bool,
        /// Level region s1 <= A/B <= s2 as "s1,s2".
        #[arg(long, allow_hyphen_values = true)]
        region: Option<String>,
        /// Write `t,x1,branch_index,x2` rows to this file instead of standard output.
        #[arg(long)]
        csv: Option<String>,
    },
    /// Horn membership of a point sequence.
    Horn {
        /// Horn JSON (object or array), as a file or inline.
        #[arg(long)]
        horns: String,
        /// Points `x1,x2` per line, as a file or inline.
        #[arg(long, conflicts_with = "den")]
        points: Option<String>,
        /// Denominator on the bidisk; points are level-set points near (1,1).
        #[arg(long, requires_all = ["num", "lambda"])]
        den: Option<String>,
        #[arg(long)]
        num: Option<String>,
        /// Level value, e.g. "(1+i)/2".
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<String>,
        /// Fit the constant B for this slope on the points within the horn radius.
        #[arg(long, allow_hyphen_values = true)]
        fit_slope: Option<f64>,
    },
    /// Check a realization file and split it at the origin.
    Realize {
        /// Realization JSON, as a file or inline.
        #[arg(long)]
        file: String,
        /// Sample the Pick property and the diagonal limit.
        #[arg(long)]
        check: bool,
        /// Split at the kernel of S and report horn slopes.
        #[arg(long)]
        split: bool,
        /// Sample points in the product of half-planes.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Allowed negative imaginary part.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// The whole pipeline: stability, dichotomy, and the local analyses at each boundary zero.
    Full {
        /// Denominator: a file, or the polynomial itself.
        #[arg(long, alias = "poly")]
        den: String,
        /// Numerator, enabling the regularity and boundedness stages.
        #[arg(long)]
        num: Option<String>,
        #[arg(long, value_enum, default_value = "disk")]
        domain: DomainArg,
        /// Analyse only this boundary point.
        #[arg(long, allow_hyphen_values = true)]
        center: Option<String>,
        /// Truncation order of the branch series.
        #[arg(long, default_value_t = 12)]
        order: usize,
        /// Radial grid points per slice variable.
        #[arg(long, default_value_t = 16)]
        grid: usize,
        /// Highest regularity order tried.
        #[arg(long, default_value_t = 6)]
        kmax: u32,
    },
}
