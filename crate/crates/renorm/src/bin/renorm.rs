use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use renorm::cli_io::{run_command, RunManifest};

#[derive(Parser)]
#[command(name = "renorm", version, about = "Renorming workbench: pimple norms, isometry groups, complex structures")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Seed for every random choice in the run.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Directory for report files; without it the report JSON goes to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker bound (the orchestrator is single-threaded).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
}

#[derive(Args)]
struct FileArg {
    #[arg(long)]
    file: PathBuf,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    starts: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Norm descriptors.
    Norm {
        #[command(subcommand)]
        op: NormOp,
    },
    /// Pimple specs.
    Pimple {
        #[command(subcommand)]
        op: PimpleOp,
    },
    /// Separated point families.
    Orbit {
        #[command(subcommand)]
        op: OrbitOp,
    },
    /// Isometry candidates and the falsifier.
    Isometries {
        #[command(subcommand)]
        op: IsoOp,
    },
    /// Full pipeline for a named group.
    Represent {
        group: String,
        #[arg(long)]
        dim: usize,
        /// Base norm: l4 or euclidean.
        #[arg(long, default_value = "l4")]
        base: String,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Square roots of −Id in a group given by generators.
    ComplexStructures(FileArg),
    /// ℓ2-pair complexification of a norm and its structures.
    Complexify(FileArg),
    /// Explicit complex norms.
    Jarosz {
        #[command(subcommand)]
        op: JaroszOp,
    },
    /// SVG and CSV of a 2D unit ball.
    Render {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, default_value_t = 360)]
        resolution: usize,
    },
    /// Execute a manifest file.
    Run { manifest: PathBuf },
}

#[derive(Subcommand)]
enum NormOp {
    Eval {
        #[arg(long)]
        file: PathBuf,
        /// Comma-separated coordinates.
        #[arg(long, allow_hyphen_values = true)]
        x: String,
    },
    Check {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
}

#[derive(Subcommand)]
enum PimpleOp {
    Build(FileArg),
    Eval {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
    },
    Check(FileArg),
}

#[derive(Subcommand)]
enum OrbitOp {
    Build(FileArg),
}

#[derive(Subcommand)]
enum IsoOp {
    Enumerate(FileArg),
    Falsify {
        #[arg(long)]
        file: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
    },
}

#[derive(Subcommand)]
enum JaroszOp {
    C2 {
        #[command(flatten)]
        search: SearchArgs,
    },
    Double {
        #[arg(long, default_value_t = 2)]
        gamma_count: usize,
        #[arg(long, default_value_t = 2)]
        variant: u8,
        #[arg(long, allow_hyphen_values = true)]
        x: Option<String>,
    },
    Extend {
        #[arg(long, allow_hyphen_values = true)]
        x: Option<String>,
    },
}

fn coords(s: &str) -> Result<Value, String> {
    let xs: Result<Vec<f64>, _> = s.split(',').map(|t| t.trim().parse::<f64>()).collect();
    xs.map(Value::from).map_err(|e| format!("bad coordinate list {s:?}: {e}"))
}

fn manifest(cli: &Cli) -> Result<RunManifest, String> {
    let mut config = BTreeMap::new();
    let mut inputs = Vec::new();
    let search = |s: &SearchArgs, c: &mut BTreeMap<String, Value>| {
        for (k, v) in [("starts", s.starts), ("steps", s.steps), ("samples", s.samples)] {
            if let Some(v) = v {
                c.insert(k.into(), Value::from(v));
            }
        }
    };
    let command = match &cli.cmd {
        Cmd::Norm { op: NormOp::Eval { file, x } } => {
            inputs.push(file.clone());
            config.insert("x".into(), coords(x)?);
            "norm-eval"
        }
        Cmd::Norm { op: NormOp::Check { file, samples } } => {
            inputs.push(file.clone());
            config.insert("samples".into(), Value::from(*samples));
            "norm-check"
        }
        Cmd::Pimple { op } => match op {
            PimpleOp::Build(f) => {
                inputs.push(f.file.clone());
                "pimple-build"
            }
            PimpleOp::Eval { file, x } => {
                inputs.push(file.clone());
                config.insert("x".into(), coords(x)?);
                "pimple-eval"
            }
            PimpleOp::Check(f) => {
                inputs.push(f.file.clone());
                "pimple-check"
            }
        },
        Cmd::Orbit { op: OrbitOp::Build(f) } => {
            inputs.push(f.file.clone());
            "orbit-build"
        }
        Cmd::Isometries { op } => match op {
            IsoOp::Enumerate(f) => {
                inputs.push(f.file.clone());
                "isometries-enumerate"
            }
            IsoOp::Falsify { file, search: s } => {
                inputs.push(file.clone());
                search(s, &mut config);
                "isometries-falsify"
            }
        },
        Cmd::Represent { group, dim, base, search: s } => {
            config.insert("group".into(), Value::from(group.clone()));
            config.insert("dim".into(), Value::from(*dim));
            config.insert("base".into(), Value::from(base.clone()));
            search(s, &mut config);
            "represent"
        }
        Cmd::ComplexStructures(f) => {
            inputs.push(f.file.clone());
            "complex-structures"
        }
        Cmd::Complexify(f) => {
            inputs.push(f.file.clone());
            "complexify"
        }
        Cmd::Jarosz { op } => match op {
            JaroszOp::C2 { search: s } => {
                search(s, &mut config);
                "jarosz-c2"
            }
            JaroszOp::Double { gamma_count, variant, x } => {
                config.insert("gamma_count".into(), Value::from(*gamma_count));
                config.insert("variant".into(), Value::from(*variant));
                if let Some(x) = x {
                    config.insert("x".into(), coords(x)?);
                }
                "jarosz-double"
            }
            JaroszOp::Extend { x } => {
                if let Some(x) = x {
                    config.insert("x".into(), coords(x)?);
                }
                "jarosz-extend"
            }
        },
        Cmd::Render { file, resolution } => {
            inputs.push(file.clone());
            config.insert("resolution".into(), Value::from(*resolution));
            "render"
        }
        Cmd::Run { manifest } => {
            let mut m = RunManifest::load(manifest).map_err(|e| e.to_string())?;
            if cli.out.is_some() {
                m.output_dir = cli.out.clone();
            }
            return Ok(m);
        }
    };
    Ok(RunManifest { command: command.into(), inputs, seed: cli.seed, config, output_dir: cli.out.clone() })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let m = match manifest(&cli) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run_command(&m) {
        Ok(out) => {
            if m.output_dir.is_some() {
                println!("{}", out.summary);
            } else if let Some(report) = out.files.get(&format!("{}.json", m.command)) {
                print!("{report}");
                eprintln!("{}", out.summary);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
