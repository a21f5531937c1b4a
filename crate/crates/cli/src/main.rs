use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use objremove_cli::commands::{self, RunArgs, StandardScene};
use objremove_cli::server::{self, AppState};
use objremove_cli::{exit, load_config, CliError, OracleCommands};
use objremove_core::manifest::SceneManifest;

#[derive(Parser)]
#[command(name = "objremove", version, about = "Remove objects consistently across the views of a planar scene")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OracleFlags {
    /// Subprocess command for feature matching
    #[arg(long)]
    oracle_cmd_matcher: Option<String>,
    /// Subprocess command for point-prompted segmentation
    #[arg(long)]
    oracle_cmd_segmenter: Option<String>,
    /// Subprocess command for inpainting
    #[arg(long)]
    oracle_cmd_inpainter: Option<String>,
}

impl OracleFlags {
    fn commands(&self) -> OracleCommands {
        OracleCommands {
            matcher: self.oracle_cmd_matcher.clone(),
            segmenter: self.oracle_cmd_segmenter.clone(),
            inpainter: self.oracle_cmd_inpainter.clone(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Render a synthetic scene directory
    GenerateScene {
        /// Scene spec JSON; a standard scene is generated when omitted
        spec: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 20)]
        views: usize,
        #[arg(long, default_value_t = 512)]
        width: u32,
        #[arg(long, default_value_t = 512)]
        height: u32,
        #[arg(long, default_value_t = 3)]
        objects: usize,
    },
    /// Segment, propagate and inpaint across all views
    Run {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        prompts: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        oracles: OracleFlags,
    },
    /// Score a run directory against ground truth
    Eval { run_dir: PathBuf, gt_dir: PathBuf },
    /// Serve the HTTP API for interactive annotation
    Serve {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "runs")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        oracles: OracleFlags,
    },
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::GenerateScene {
            spec,
            out,
            seed,
            views,
            width,
            height,
            objects,
        } => {
            let standard = StandardScene {
                n_views: views,
                width,
                height,
                n_objects: objects,
            };
            let manifest = commands::generate_scene(spec.as_deref(), standard, seed, &out)?;
            println!("{}", manifest.display());
            Ok(exit::OK)
        }
        Command::Run {
            manifest,
            prompts,
            config,
            out,
            seed,
            oracles,
        } => commands::run(&RunArgs {
            manifest: &manifest,
            prompts: &prompts,
            config: config.as_deref(),
            seed,
            oracles: &oracles.commands(),
            out: &out,
        }),
        Command::Eval { run_dir, gt_dir } => {
            let report = commands::eval(&run_dir, &gt_dir)?;
            println!("{}", commands::aggregate_line(&report));
            Ok(exit::OK)
        }
        Command::Serve {
            manifest,
            config,
            port,
            out,
            seed,
            oracles,
        } => {
            let input = |e: &dyn std::fmt::Display| CliError::Input {
                path: manifest.clone(),
                message: e.to_string(),
            };
            let m = SceneManifest::load(&manifest).map_err(|e| input(&e))?;
            let views = m
                .load_views(manifest.parent().unwrap_or(std::path::Path::new(".")))
                .map_err(|e| input(&e))?;
            let state = AppState::new(views, load_config(config.as_deref(), seed)?, oracles.commands().build()?, out);
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(server::serve(state, port))?;
            Ok(exit::OK)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("HOMER_LOG", "warn")).init();
    let code = match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
