//! `llg`: command line front end for the solver and verification harness.
//!
//! Every mode is driven by a JSON config file; see the repository README for
//! the schema. Exit codes: 0 success, 2 invariant violation (including
//! failed verification checks), 3 linear solver failure, 1 anything else.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use llg_core::harness::config::RunConfig;
use llg_core::harness::table::{ConvergenceTable, ScaleVar};
use llg_core::harness::{self, csvio, svg, HarnessOptions};
use llg_core::Error;

#[derive(Parser)]
#[command(
    name = "llg",
    version,
    about = "Finite element solver and verification harness for the Landau-Lifshitz-Gilbert equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `out_dir` from the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Lift the desk-scale mesh and step ceilings.
    #[arg(long, global = true)]
    paper_scale: bool,
    /// Byte-stable outputs: wall-time columns are written as zero.
    #[arg(long, global = true)]
    deterministic: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Single simulation; writes per-step records and prints a summary.
    Run,
    /// Mesh ladder at fixed time step.
    ConvSpace,
    /// Time-step ladder on a fixed mesh.
    ConvTime,
    /// Coupled ladder refining mesh and time step together.
    ConvCoupled,
    /// Compute and persist a reference solution, then compare candidates.
    Reference,
    /// Numerical verification sweep; runs without a config.
    Verify,
    /// Render a log-log SVG from an existing convergence CSV.
    Plot {
        /// Convergence table CSV produced by a conv-* command.
        #[arg(long)]
        input: PathBuf,
        /// Output path; defaults to the input with an .svg extension.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Abscissa column: h or tau.
        #[arg(long, default_value = "h")]
        x: String,
    },
}

fn main() -> ExitCode {
    llg_core::sparse::set_backend_single_threaded();
    match dispatch() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("llg: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch() -> Result<(), Error> {
    let cli = Cli::parse();
    let opts = HarnessOptions {
        paper_scale: cli.paper_scale,
        deterministic: cli.deterministic,
        threads: threads_from_env()?,
    };

    match &cli.command {
        Command::Plot { input, output, x } => return plot(input, output.as_deref(), x),
        Command::Verify => return verify(&cli, &opts),
        _ => {}
    }

    let cfg = load_config(&cli)?;
    let out_dir = out_dir(&cli, Some(&cfg));
    match cli.command {
        Command::Run => run(&cfg, &opts, &out_dir),
        Command::ConvSpace => conv(
            harness::conv_space(&cfg, &opts)?,
            &cfg,
            &out_dir,
            "conv_space",
            "h",
            &[1.0, 2.0],
        ),
        Command::ConvTime => conv(
            harness::conv_time(&cfg, &opts)?,
            &cfg,
            &out_dir,
            "conv_time",
            "tau",
            &[1.0, 2.0],
        ),
        Command::ConvCoupled => {
            let out = harness::conv_coupled(&cfg, &opts)?;
            for (row, cfl) in out.table.rows.iter().zip(&out.cfl_ratios) {
                println!(
                    "level {}: h={:.5} tau={:.5} cfl tau^4/h^1.5 = {cfl:.3e}",
                    row.level, row.h, row.tau
                );
            }
            conv(out.table, &cfg, &out_dir, "conv_coupled", "tau", &[2.0])
        }
        Command::Reference => reference(&cfg, &opts, &out_dir),
        Command::Verify | Command::Plot { .. } => unreachable!("handled above"),
    }
}

fn threads_from_env() -> Result<Option<usize>, Error> {
    match std::env::var("LLG_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => v
            .parse::<usize>()
            .map(Some)
            .map_err(|_| Error::Config(format!("LLG_THREADS must be a number, got {v:?}"))),
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, Error> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("this command needs --config <file>".to_string()))?;
    RunConfig::from_path(path)
}

fn out_dir(cli: &Cli, cfg: Option<&RunConfig>) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| cfg.and_then(|c| c.out_dir.clone()))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>), Error> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let file = File::create(&path)?;
    Ok((path, BufWriter::new(file)))
}

fn run(cfg: &RunConfig, opts: &HarnessOptions, out_dir: &Path) -> Result<(), Error> {
    let out = harness::run_single(cfg, opts)?;
    let (path, w) = create(out_dir, "run_steps.csv")?;
    csvio::write_step_records(w, &out.records)?;
    let summary = serde_json::to_string_pretty(&out.summary)
        .map_err(|e| Error::Config(format!("summary serialization failed: {e}")))?;
    println!("{summary}");
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn conv(
    table: ConvergenceTable,
    cfg: &RunConfig,
    out_dir: &Path,
    stem: &str,
    x_label: &str,
    guides: &[f64],
) -> Result<(), Error> {
    let (path, w) = create(out_dir, &format!("{stem}.csv"))?;
    csvio::write_conv_table(w, &table)?;
    if let Some(order) = table.fitted_h1_order(2) {
        println!("{stem}: fitted H1 order over the last two rows = {order:.3}");
    }
    eprintln!("wrote {}", path.display());
    if cfg.plot {
        let svg_path = out_dir.join(format!("{stem}.svg"));
        std::fs::write(&svg_path, render_plot(&table, stem, x_label, guides))?;
        eprintln!("wrote {}", svg_path.display());
    }
    Ok(())
}

fn render_plot(table: &ConvergenceTable, title: &str, x_label: &str, guides: &[f64]) -> String {
    let col = |f: fn(&harness::table::ConvRow) -> Option<f64>| -> Vec<(f64, f64)> {
        table
            .rows
            .iter()
            .filter_map(|r| {
                let x = match x_label {
                    "tau" => r.tau,
                    _ => r.h,
                };
                f(r).map(|e| (x, e))
            })
            .collect()
    };
    let series = vec![
        svg::Series {
            label: "H1 error (max over steps)".to_string(),
            points: col(|r| r.err_h1_max),
        },
        svg::Series {
            label: "L2 error (max over steps)".to_string(),
            points: col(|r| r.err_l2_max),
        },
    ];
    svg::loglog_svg(title, x_label, &series, guides)
}

fn reference(cfg: &RunConfig, opts: &HarnessOptions, out_dir: &Path) -> Result<(), Error> {
    let report = harness::reference_workflow(cfg, opts, out_dir)?;
    println!(
        "reference: {} steps, field {} sidecar {}",
        report.reference_steps,
        report.data_path.display(),
        report.sidecar_path.display()
    );
    if let Some(table) = report.comparisons {
        let (path, w) = create(out_dir, "reference_compare.csv")?;
        csvio::write_conv_table(w, &table)?;
        if let Some(order) = table.fitted_h1_order(2) {
            println!("reference comparison: fitted H1 order = {order:.3}");
        }
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn verify(cli: &Cli, opts: &HarnessOptions) -> Result<(), Error> {
    let report = harness::verify_all(opts)?;
    for row in &report.rows {
        let bounds = match (row.min, row.max) {
            (Some(lo), Some(hi)) => format!("in [{lo}, {hi}]"),
            (Some(lo), None) => format!(">= {lo}"),
            (None, Some(hi)) => format!("<= {hi}"),
            (None, None) => String::new(),
        };
        println!(
            "{} {:<32} value={:.6e} expected {bounds}",
            if row.pass { "PASS" } else { "FAIL" },
            row.check,
            row.value
        );
    }
    let dir = out_dir(cli, None);
    let (path, w) = create(&dir, "verify.csv")?;
    csvio::write_verify_rows(w, &report.rows)?;
    eprintln!("wrote {}", path.display());
    if !report.all_pass() {
        let failed = report.rows.iter().filter(|r| !r.pass).count();
        return Err(Error::Invariant(format!(
            "verification sweep failed: {failed} of {} checks",
            report.rows.len()
        )));
    }
    Ok(())
}

fn plot(input: &Path, output: Option<&Path>, x: &str) -> Result<(), Error> {
    let scale = match x {
        "h" => ScaleVar::H,
        "tau" => ScaleVar::Tau,
        other => {
            return Err(Error::Config(format!(
                "unknown abscissa {other:?}; expected h or tau"
            )))
        }
    };
    let file = File::open(input)?;
    let table = csvio::read_conv_table(file, scale)?;
    let out_path = output
        .map(Path::to_path_buf)
        .unwrap_or_else(|| input.with_extension("svg"));
    let guides: &[f64] = match scale {
        ScaleVar::H => &[1.0, 2.0],
        ScaleVar::Tau => &[1.0, 2.0],
    };
    std::fs::write(&out_path, render_plot(&table, "convergence", x, guides))?;
    eprintln!("wrote {}", out_path.display());
    Ok(())
}
