//! `meshfield`: batch front end for reading, converting, interpolating and
//! post-processing finite element meshes and results.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Mesh and result processing for openCFS-style HDF5 files.
///
/// Exit codes: 0 on success, 2 on usage or input errors, 1 on internal errors.
/// The MESHFIELD_THREADS environment variable caps the number of worker threads.
#[derive(Parser, Debug)]
#[command(name = "meshfield", version, about, long_about = None)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print mesh counts, regions and the result layout of a file
    Info {
        file: PathBuf,
    },
    /// Convert STL, EnSight Gold or CFS input into a CFS file
    Convert {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, value_enum)]
        from: InputFormat,
    },
    /// Interpolate field results from a source file onto a target mesh
    Interpolate(InterpolateArgs),
    /// Time derivative of transient results
    Derivative {
        input: PathBuf,
        output: PathBuf,
        /// remove, none or one-sided
        #[arg(long, alias = "boundary_treatment", default_value = "one-sided")]
        boundary: meshfield::signal::BoundaryTreatment,
        /// Only these quantities (default: all)
        #[arg(long)]
        quantity: Vec<String>,
    },
    /// One-sided amplitude spectrum of transient results
    Fft {
        input: PathBuf,
        output: PathBuf,
        /// Apply a unit-mean Hann window
        #[arg(long)]
        hann: bool,
        #[arg(long)]
        quantity: Vec<String>,
    },
    /// Fit a rigid transform mapping a source region onto a target region;
    /// prints `tx ty tz alpha beta gamma`
    Fit {
        source: PathBuf,
        target: PathBuf,
        /// Default: the only region of the source mesh
        #[arg(long)]
        source_region: Option<String>,
        #[arg(long)]
        target_region: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Apply a rigid transform to a mesh and rotate its 3-component results
    Transform {
        input: PathBuf,
        output: PathBuf,
        /// Rotation angles about x, y and z in radians
        #[arg(long, value_name = "A,B,C", default_value = "0,0,0")]
        euler: String,
        #[arg(long, value_name = "X,Y,Z", default_value = "0,0,0")]
        translate: String,
        /// Interpret --euler in degrees
        #[arg(long)]
        degrees: bool,
        /// Regions to move (default: the whole mesh)
        #[arg(long, value_delimiter = ',')]
        regions: Vec<String>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputFormat {
    Stl,
    Ensight,
    Cfs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    N2c,
    C2n,
    Idw,
    Projection,
    Rbf,
}

#[derive(Args, Debug)]
pub struct InterpolateArgs {
    pub source: PathBuf,
    pub target: PathBuf,
    pub output: PathBuf,
    #[arg(long, value_enum)]
    pub method: Method,
    /// Only these quantities (default: all field results)
    #[arg(long)]
    pub quantity: Vec<String>,
    /// Source region (default: every region carrying results)
    #[arg(long)]
    pub source_region: Option<String>,
    /// Target region (default: same name as the source region, or the only one)
    #[arg(long)]
    pub target_region: Option<String>,
    /// Evaluate at target element centroids instead of target nodes (idw, rbf)
    #[arg(long)]
    pub to_elements: bool,

    #[arg(long, default_value_t = 20)]
    pub neighbors: usize,
    /// IDW exponent p
    #[arg(long, default_value_t = 2.0)]
    pub exponent: f64,
    /// IDW search direction: forward, backward or auto
    #[arg(long, default_value = "auto")]
    pub direction: meshfield::interp::SearchDirection,

    #[arg(long = "max_distance", alias = "max-distance")]
    pub max_distance: Option<f64>,
    #[arg(long = "search_radius", alias = "search-radius")]
    pub search_radius: Option<f64>,

    /// RBF kernel: gaussian, multiquadric or wendland_c2
    #[arg(long, default_value = "gaussian")]
    pub kernel: meshfield::interp::Kernel,
    #[arg(long, default_value_t = 1.0)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.0)]
    pub smoothing: f64,
    /// Local RBF systems per evaluation point instead of one global system
    #[arg(long)]
    pub local: bool,
    #[arg(long = "min_neighbors", alias = "min-neighbors", default_value_t = 5)]
    pub min_neighbors: usize,
    #[arg(long = "radius_factor", alias = "radius-factor", default_value_t = 1.5)]
    pub radius_factor: f64,
    /// Write the spatial gradient (`<quantity>_grad`) instead of the values (rbf)
    #[arg(long)]
    pub gradient: bool,
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("MESHFIELD_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("MESHFIELD_THREADS must be a positive integer, got '{v}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 1 })
        }
    }
}
