use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use omthermo::commands::{cmd_analyze, cmd_plot, cmd_simulate, cmd_thermometry};
use omthermo::io::RunConfig;
use omthermo::selftest::{run_all, Scale};
use omthermo::{Error, Result};

#[derive(Parser)]
#[command(name = "omthermo", version, about = "Quantum-correlation thermometry on simulated optomechanical heterodyne records")]
struct Cli {
    /// Output root; overrides the configured directory.
    #[arg(long, global = true, env = "OMTHERMO_OUT")]
    out: Option<PathBuf>,
    /// Worker thread cap.
    #[arg(long, global = true, env = "OMTHERMO_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Synthesize signal records for both LO signs plus calibration records.
    Simulate {
        /// Configuration file; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Spectra, φ-scans and LO combination from the records.
    Analyze {
        /// Configuration file; defaults to config.txt under the output root.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Record directory; defaults to records/ under the output root.
        #[arg(long)]
        records: Option<PathBuf>,
        /// Leave the electronic response uncorrected.
        #[arg(long)]
        skip_calibration: bool,
    },
    /// Temperature estimates, Allan curve and zero-power extrapolation.
    Thermometry {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Spectra directory; defaults to spectra/ under the output root.
        #[arg(long)]
        spectra: Option<PathBuf>,
    },
    /// SVG plots of spectrum, φ-scan or report files.
    Plot {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Acceptance checks at reduced scale.
    Selftest {
        /// Run at full scale.
        #[arg(long)]
        full: bool,
    },
}

/// Explicit config, else `config.txt` left by `simulate` in the output root
/// (the default root when none is given), else the defaults.
fn load_config(path: Option<&Path>, out: Option<&Path>) -> Result<RunConfig> {
    let root = out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(RunConfig::default().out_dir));
    match path {
        Some(p) => RunConfig::load(p),
        None => match Some(root.join("config.txt")).filter(|p| p.exists()) {
            Some(p) => RunConfig::load(&p),
            None => Ok(RunConfig::default()),
        },
    }
}

fn out_root(cli_out: &Option<PathBuf>, cfg: &RunConfig) -> PathBuf {
    cli_out.clone().unwrap_or_else(|| PathBuf::from(&cfg.out_dir))
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::validation("threads", "must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::validation("threads", e.to_string()))?;
    }
    match &cli.cmd {
        Cmd::Simulate { config } => {
            let cfg = load_config(config.as_deref(), None)?;
            let out = out_root(&cli.out, &cfg);
            let m = cmd_simulate(&cfg, &out)?;
            println!("{} files under {} (config {})", m.files.len(), out.display(), cfg.hash());
        }
        Cmd::Analyze {
            config,
            records,
            skip_calibration,
        } => {
            let cfg = load_config(config.as_deref(), cli.out.as_deref())?;
            let out = out_root(&cli.out, &cfg);
            let records = records.clone().unwrap_or_else(|| out.join("records"));
            let m = cmd_analyze(&cfg, &records, &out, *skip_calibration)?;
            println!("{} files under {}", m.files.len(), out.join("spectra").display());
        }
        Cmd::Thermometry { config, spectra } => {
            let cfg = load_config(config.as_deref(), cli.out.as_deref())?;
            let out = out_root(&cli.out, &cfg);
            let spectra = spectra.clone().unwrap_or_else(|| out.join("spectra"));
            let r = cmd_thermometry(&cfg, &spectra, &out)?;
            for s in &r.summary {
                let scatter = s.sigma_t_scatter.map(|x| format!(" (scatter {x:.3} K)")).unwrap_or_default();
                println!("{:>5}: T = {:.3} ± {:.3} K{scatter} from {} estimates", s.method, s.t, s.sigma_t, s.n);
            }
            for e in r.estimates.iter().filter(|e| !e.failures.is_empty()) {
                println!("c = {} repeat {}: {}", e.cooperativity, e.repeat, e.failures.join("; "));
            }
            if let Some(a) = &r.allan {
                println!("Allan: a = {:.3} ± {:.3} K/√Hz, slope {:+.3}", a.a, a.sigma_a, a.slope);
            }
            if let Some(x) = &r.extrapolation {
                println!("zero-power intercept: {:.3} ± {:.3} K", x.t0, x.sigma_t0);
            }
        }
        Cmd::Plot { inputs } => {
            let out = cli.out.clone().unwrap_or_else(|| PathBuf::from(RunConfig::default().out_dir));
            for p in cmd_plot(inputs, &out)? {
                println!("{}", p.display());
            }
        }
        Cmd::Selftest { full } => {
            let verdicts = run_all(if *full { Scale::Full } else { Scale::Reduced });
            for v in &verdicts {
                print!("{v}");
            }
            return Ok(verdicts.iter().all(|v| v.pass));
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
