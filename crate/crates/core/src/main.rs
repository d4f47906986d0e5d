use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use drfp::graph::{backward_product, check_joint_connectivity, estimate_pi};
use drfp::harness::{
    compare_dgd_drfp, run, write_scratch_jsonl, write_summary_json, write_trace_csv, RunConfig,
};
use drfp::oracle::{solve_centralized, weighted_optimum};
use drfp::Error;

#[derive(Parser)]
#[command(
    name = "drfp",
    about = "Distributed constrained optimization over time-varying unbalanced digraphs",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOverrides {
    /// Run a single seed instead of the configured list.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the configured round budget.
    #[arg(long)]
    rounds: Option<u64>,
    /// Output directory for traces, summaries, and reports.
    #[arg(long, default_value = "runs")]
    out: PathBuf,
    /// Record a trace row every k rounds.
    #[arg(long, value_name = "K")]
    trace_every: Option<u64>,
    /// Record per-round scratch values (post-mix and post-projection points).
    #[arg(long)]
    verbose_scratch: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the configured runs and write trace CSVs plus JSON summaries.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: CommonOverrides,
    },
    /// Run the baseline and the algorithm side by side and report both limits.
    Compare {
        config: PathBuf,
        #[command(flatten)]
        overrides: CommonOverrides,
    },
    /// Check joint connectivity of the configured graph sequence.
    CheckGraph {
        config: PathBuf,
        /// Rounds to scan (default: one period plus a window, or the run budget).
        #[arg(long)]
        horizon: Option<u64>,
        /// Export the first weight matrices of the sequence as CSV files.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the configured instance centrally and print the solution.
    Oracle {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn apply_overrides(cfg: &mut RunConfig, ov: &CommonOverrides) {
    if let Some(seed) = ov.seed {
        cfg.run.seeds = vec![seed];
    }
    if let Some(rounds) = ov.rounds {
        cfg.run.rounds = rounds;
    }
    if let Some(k) = ov.trace_every {
        cfg.run.trace_every = k;
    }
    if ov.verbose_scratch {
        cfg.run.verbose_scratch = true;
    }
}

fn cmd_run(config_path: &Path, ov: &CommonOverrides) -> drfp::Result<()> {
    let mut cfg = RunConfig::from_path(config_path)?;
    apply_overrides(&mut cfg, ov);
    std::fs::create_dir_all(&ov.out)?;
    let n = cfg.build()?.problem.n();
    for &seed in cfg.run.seeds.clone().iter() {
        let out = run(&cfg, seed)?;
        let trace_path = ov.out.join(format!("trace_seed{seed}.csv"));
        write_trace_csv(&out.trace, n, &trace_path)?;
        let summary_path = ov.out.join(format!("summary_seed{seed}.json"));
        write_summary_json(&out.summary, &summary_path)?;
        if cfg.run.verbose_scratch {
            let scratch_path = ov.out.join(format!("scratch_seed{seed}.jsonl"));
            write_scratch_jsonl(&out.scratch, &scratch_path)?;
        }
        println!(
            "seed {seed}: {} rounds, consensus {:e}, feasibility {:e}, gap {}, wrote {}",
            out.summary.rounds_executed,
            out.summary.final_max_consensus,
            out.summary.final_max_feasibility,
            out.summary.final_gap,
            trace_path.display()
        );
    }
    Ok(())
}

fn cmd_compare(config_path: &Path, ov: &CommonOverrides) -> drfp::Result<()> {
    let mut cfg = RunConfig::from_path(config_path)?;
    apply_overrides(&mut cfg, ov);
    let report = compare_dgd_drfp(&cfg)?;
    let text = serde_json::to_string_pretty(&report)?;
    println!("{text}");
    std::fs::create_dir_all(&ov.out)?;
    let path = ov.out.join("compare_report.json");
    std::fs::write(&path, format!("{text}\n"))?;
    Ok(())
}

fn cmd_check_graph(
    config_path: &Path,
    horizon: Option<u64>,
    out: Option<&Path>,
) -> drfp::Result<()> {
    let cfg = RunConfig::from_path(config_path)?;
    let built = cfg.build()?;
    let b = built.sequence.b_window();
    let horizon = horizon.unwrap_or_else(|| {
        match built.sequence.period() {
            Some(period) => (period + b) as u64,
            None => cfg.run.rounds.min(10_000),
        }
        .max(b as u64)
    });
    let connected = check_joint_connectivity(&built.sequence, b, horizon);
    let pi = estimate_pi(&built.sequence, 0, 1e-10, 2_000);
    let report = serde_json::json!({
        "jointly_connected": connected,
        "b_window": b,
        "horizon": horizon,
        "n": built.sequence.n(),
        "gamma": built.sequence.gamma(),
        "pi_estimate": pi.pi.to_vec(),
        "pi_residual": pi.residual,
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        let count = built.sequence.period().map_or(8, |p| p).min(horizon as usize).max(1);
        for k in 0..count as u64 {
            let m = built.sequence.matrix(k);
            let mut csv = String::new();
            for i in 0..m.n() {
                let row: Vec<String> = (0..m.n()).map(|j| m.entry(i, j).to_string()).collect();
                csv.push_str(&row.join(","));
                csv.push('\n');
            }
            std::fs::write(dir.join(format!("matrix_{k}.csv")), csv)?;
        }
        // the product over one window, for inspecting mixing strength
        let prod = backward_product(&built.sequence, 0, b as u64)?;
        let mut csv = String::new();
        for i in 0..built.sequence.n() {
            let row: Vec<String> = (0..built.sequence.n())
                .map(|j| prod[[i, j]].to_string())
                .collect();
            csv.push_str(&row.join(","));
            csv.push('\n');
        }
        std::fs::write(dir.join("window_product.csv"), csv)?;
    }
    Ok(())
}

fn cmd_oracle(config_path: &Path, out: Option<&Path>) -> drfp::Result<()> {
    let cfg = RunConfig::from_path(config_path)?;
    let built = cfg.build()?;
    let sol = solve_centralized(&built.problem, cfg.run.oracle_tol)?;
    let weighted = if matches!(built.sequence.mode(), drfp::graph::SequenceMode::Static(_)) {
        let pi = estimate_pi(&built.sequence, 0, 1e-12, 5_000);
        let w = weighted_optimum(&built.problem, &pi.pi, cfg.run.oracle_tol)?;
        Some(serde_json::json!({
            "pi": pi.pi.to_vec(),
            "x": w.x_star.to_vec(),
            "value": w.value,
        }))
    } else {
        None
    };
    let report = serde_json::json!({
        "centralized": {
            "x": sol.x_star.to_vec(),
            "value": sol.value,
            "tol": sol.tol,
            "method": sol.method,
        },
        "weighted": weighted,
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(
            dir.join("oracle.json"),
            format!("{}\n", serde_json::to_string_pretty(&report)?),
        )?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config, overrides } => cmd_run(config, overrides),
        Command::Compare { config, overrides } => cmd_compare(config, overrides),
        Command::CheckGraph {
            config,
            horizon,
            out,
        } => cmd_check_graph(config, *horizon, out.as_deref()),
        Command::Oracle { config, out } => cmd_oracle(config, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            report_error(&err);
            ExitCode::from(2)
        }
    }
}

fn report_error(err: &Error) {
    let payload = serde_json::json!({
        "error": { "kind": err.kind(), "message": err.to_string() }
    });
    eprintln!("{payload}");
}
