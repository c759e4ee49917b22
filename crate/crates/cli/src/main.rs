use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ttc_cli::pipeline::{self, Failure, EXIT_INTERNAL, EXIT_INVALID, EXIT_OK};
use ttc_cli::service::{router, ServiceConfig};
use ttc_core::analysis::parse_dim_overrides;
use ttc_core::codegen::function_name_from_stem;
use ttc_core::io::{TensorDoc, TensorFile};
use ttc_core::{validate_project, AnalysisOptions, Dialect, Project};

#[derive(Parser)]
#[command(name = "ttc", version, about = "Tensor-network contraction compiler")]
struct Cli {
    /// Output format for reports.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(clap::Args)]
struct SearchArgs {
    /// Order search mode: full, quick, thorough or extensive.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Index-type dimension overrides, e.g. `chi=8,D=2`.
    #[arg(long)]
    dims: Option<String>,
    /// How environment orders are found: derived or full.
    #[arg(long)]
    env_search: Option<String>,
}

impl SearchArgs {
    fn options(&self) -> Result<AnalysisOptions, Failure> {
        let dims = match &self.dims {
            Some(spec) => Some(parse_dim_overrides(spec).map_err(|e| Failure::parse("dims", e))?),
            None => None,
        };
        pipeline::options(self.mode.as_deref(), self.seed, dims, self.env_search.as_deref())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check a project and list diagnostics.
    Validate { file: PathBuf },
    /// Search contraction orders and report costs.
    Analyze {
        file: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Write a contraction function for the project.
    Export {
        file: PathBuf,
        /// python, matlab or julia.
        #[arg(long)]
        lang: String,
        /// Output file; its stem names the generated function.
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Contract a network on tensor data and print the result.
    Contract {
        file: PathBuf,
        #[arg(long, default_value_t = 1)]
        net: u8,
        /// Position of the tensor whose environment to compute; 0 for the network itself.
        #[arg(long, default_value_t = 0)]
        env: usize,
        /// JSON file with a `tensors` list or map.
        #[arg(long)]
        tensors: PathBuf,
        /// Refuse contractions needing more multiplications than this.
        #[arg(long)]
        budget: Option<u128>,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Run the local HTTP service.
    Serve {
        #[arg(long, default_value_t = 8765)]
        port: u16,
        #[arg(long)]
        static_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 100_000_000)]
        budget: u128,
    },
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::parse(&path.display().to_string(), e.to_string()))
}

fn load(path: &Path) -> Result<Project, Failure> {
    pipeline::load(&read(path)?)
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(v).map_err(|e| Failure::Internal(e.to_string()))
}

fn run(cli: &Cli) -> Result<i32, Failure> {
    let structured = cli.format == Format::Structured;
    match &cli.command {
        Command::Validate { file } => {
            let report = validate_project(&load(file)?);
            if structured {
                println!("{}", to_json(&report)?);
            } else {
                print!("{}", report.to_text());
            }
            Ok(if report.is_valid() { EXIT_OK } else { EXIT_INVALID })
        }
        Command::Analyze { file, search } => {
            let opts = search.options()?;
            let analysis = pipeline::analyze(&load(file)?, &opts)?;
            if structured {
                println!("{}", to_json(&analysis.to_document())?);
            } else {
                print!("{}", analysis.to_text());
            }
            Ok(if !analysis.validation.is_valid() {
                EXIT_INVALID
            } else if analysis.has_failures() {
                EXIT_INTERNAL
            } else {
                EXIT_OK
            })
        }
        Command::Export {
            file,
            lang,
            output,
            search,
        } => {
            let dialect: Dialect = lang.parse().map_err(|e: String| Failure::parse("lang", e))?;
            let stem = output.file_stem().and_then(|s| s.to_str()).unwrap_or("tensor_network");
            let text = pipeline::export(
                &load(file)?,
                &search.options()?,
                dialect,
                &function_name_from_stem(stem),
            )?;
            std::fs::write(output, text)
                .map_err(|e| Failure::Internal(format!("cannot write {}: {e}", output.display())))?;
            Ok(EXIT_OK)
        }
        Command::Contract {
            file,
            net,
            env,
            tensors,
            budget,
            search,
        } => {
            let project = load(file)?;
            let data: TensorFile = serde_json::from_slice(&read(tensors)?)
                .map_err(|e| Failure::parse(&tensors.display().to_string(), e.to_string()))?;
            let out = pipeline::contract(&project, &search.options()?, *net, *env, &data.tensors, *budget)?;
            println!("{}", to_json(&TensorDoc::from_tensor(&out))?);
            Ok(EXIT_OK)
        }
        Command::Serve {
            port,
            static_dir,
            budget,
        } => {
            let config = ServiceConfig {
                budget: *budget,
                static_dir: static_dir.clone(),
                ..ServiceConfig::default()
            };
            serve(*port, config).map_err(|e| Failure::Internal(e.to_string()))?;
            Ok(EXIT_OK)
        }
    }
}

fn serve(port: u16, config: ServiceConfig) -> std::io::Result<()> {
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let addr = SocketAddr::from(([127, 0, 0, 1], port));
        let listener = tokio::net::TcpListener::bind(addr).await?;
        eprintln!("listening on http://{addr}");
        axum::serve(listener, router(config))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(f) => {
            if cli.format == Format::Structured {
                println!("{}", serde_json::to_string_pretty(&f.to_json()).unwrap_or_default());
            } else {
                eprintln!("error: {f}");
                if let Failure::Invalid(report) = &f {
                    eprint!("{}", report.to_text());
                }
            }
            f.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
