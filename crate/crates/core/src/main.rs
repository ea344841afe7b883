use clap::{Parser, Subcommand};
use mechsearch::cli::{cmd_enumerate, cmd_explore, cmd_path, CliError};
use mechsearch::config::RunConfig;
use mechsearch::enumerate::EnumConfig;
use mechsearch::pes::{serve_backend, BackendMode, Surface2D};
use std::path::PathBuf;
use std::process::ExitCode;

/// Reaction mechanism search engine.
#[derive(Parser)]
#[command(name = "mechsearch", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate candidate elementary-step products of a reactant system.
    Enumerate {
        /// Input molecule (.mol graph text, or .xyz with bond perception).
        input: PathBuf,
        /// Bond-rearrangement ceiling (break/form up to N bond units).
        #[arg(long, default_value_t = 4)]
        nmax: usize,
        /// Drop the multiple-bond requirement for 3- and 4-unit edits.
        #[arg(long)]
        no_conditional: bool,
        /// Print per-size counts only, without materializing candidates.
        #[arg(long)]
        count: bool,
        /// Cap on distinct products kept.
        #[arg(long)]
        max_products: Option<usize>,
    },
    /// Double-ended path search between two structures.
    Path {
        /// Reactant structure (.xyz).
        reactant: PathBuf,
        /// Product structure (.xyz), same atoms in the same order.
        product: PathBuf,
        /// Calculator: "morse", a 2-D surface name ("muller-brown",
        /// "quadratic-bowl", "rosenbrock", "saddle-quad", "double-well"),
        /// or "external:<command line>".
        #[arg(long, default_value = "morse")]
        calculator: String,
        /// Total image count, endpoints included.
        #[arg(long, default_value_t = 20)]
        images: usize,
        /// Band spring constant, kcal/mol/Å².
        #[arg(long)]
        spring: Option<f64>,
        /// Output directory for band.xyz, ts.xyz, energies.tsv, verdict.txt.
        #[arg(long, default_value = "path-out")]
        out: PathBuf,
    },
    /// Recursive mechanism exploration from a configuration file.
    Explore {
        /// Run configuration (TOML).
        config: PathBuf,
    },
    /// Serve the calculator line protocol on stdin/stdout.
    Backend {
        /// "morse" (default), "zero", or "malformed-once" (protocol tests).
        #[arg(long, default_value = "morse")]
        mode: String,
    },
}

fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Enumerate {
            input,
            nmax,
            no_conditional,
            count,
            max_products,
        } => {
            let cfg = EnumConfig {
                n_max: nmax,
                conditional: !no_conditional,
                allow_identity: false,
                max_products,
            };
            let stdout = std::io::stdout();
            cmd_enumerate(&input, &cfg, count, &mut stdout.lock())
        }
        Command::Path {
            reactant,
            product,
            calculator,
            images,
            spring,
            out,
        } => {
            let calc = build_calculator(&calculator)?;
            let mut params = mechsearch::path::PathParams {
                n_images: images,
                ..Default::default()
            };
            if let Some(k) = spring {
                params.spring_k = k;
            }
            let embed = mechsearch::geom::EmbedParams::default();
            let artifacts = cmd_path(&reactant, &product, calc.as_ref(), &params, &embed, &out)?;
            println!("{}", artifacts.verdict);
            Ok(())
        }
        Command::Explore { config } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| CliError::Input(format!("cannot read {}: {e}", config.display())))?;
            let run_config = RunConfig::parse(&text)
                .map_err(|e| CliError::Input(format!("bad configuration: {e}")))?;
            let base = config.parent().unwrap_or(std::path::Path::new("."));
            let artifacts = cmd_explore(&run_config, base)?;
            let net = &artifacts.outcome.network;
            println!(
                "explored {} nodes, {} species, {} elementary steps -> {}",
                artifacts.outcome.pop_trace.len(),
                net.nodes.len(),
                net.edges.len() / 2,
                artifacts.out_dir.display()
            );
            Ok(())
        }
        Command::Backend { mode } => {
            let mode = match mode.as_str() {
                "morse" => BackendMode::Morse,
                "zero" => BackendMode::Zero,
                "malformed-once" => BackendMode::MalformedOnce,
                other => {
                    return Err(CliError::Input(format!(
                        "unknown backend mode {other:?} (morse, zero, malformed-once)"
                    )))
                }
            };
            serve_backend(mode).map_err(|e| CliError::Internal(e.to_string()))
        }
    }
}

fn build_calculator(selector: &str) -> Result<Box<dyn mechsearch::pes::Calculator>, CliError> {
    let surface = |s: Surface2D| -> Box<dyn mechsearch::pes::Calculator> { Box::new(s) };
    Ok(match selector {
        "morse" => Box::new(mechsearch::pes::MorseSurrogate::default()),
        "muller-brown" => surface(Surface2D::MullerBrown),
        "quadratic-bowl" => surface(Surface2D::QuadraticBowl),
        "rosenbrock" => surface(Surface2D::Rosenbrock),
        "saddle-quad" => surface(Surface2D::SaddleQuad),
        "double-well" => surface(Surface2D::DoubleWell),
        other => {
            if let Some(cmdline) = other.strip_prefix("external:") {
                let mut parts = cmdline.split_whitespace().map(String::from);
                let command = parts.next().ok_or_else(|| {
                    CliError::Input("external calculator needs a command".into())
                })?;
                let args: Vec<String> = parts.collect();
                Box::new(
                    mechsearch::pes::ExternalCalculator::spawn(
                        &command,
                        &args,
                        1,
                        std::time::Duration::from_secs(300),
                    )
                    .map_err(|e| CliError::Input(e.to_string()))?,
                )
            } else {
                return Err(CliError::Input(format!("unknown calculator {other:?}")));
            }
        }
    })
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
