use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use scuc::case_file::{bundled_base_case, load_case, save_case};
use scuc::gateway::{export_model, ExportFormat, SolverConfig};
use scuc::study::{self, report, StudyConfig};
use scuc_core::formulation::{build, SchemeId};
use scuc_core::grid::Case;
use scuc_core::rts::{build_modified_rts_case, ModifiedRtsConfig};

#[derive(Parser)]
#[command(name = "scuc", version, about = "Unit commitment studies with storage, virtual transmission and line switching")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Solver time limit per MIP, seconds.
    #[arg(long, global = true)]
    time_limit: Option<f64>,
    /// Relative MIP gap.
    #[arg(long, global = true)]
    gap: Option<f64>,
    /// Free-form note recorded in run_info.txt next to the outputs.
    #[arg(long, global = true)]
    seed_note: Option<String>,
    /// Reject settings outside the published study (e.g. zero sweep sizes).
    #[arg(long, global = true)]
    strict_paper: bool,
    /// Solver backend: highs or microlp.
    #[arg(long, global = true, default_value = "highs")]
    backend: String,
    /// Solve schemes one at a time.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Check a case file and print a summary.
    Validate { case: PathBuf },
    /// Solve one scheme.
    Run {
        #[arg(long)]
        case: PathBuf,
        #[arg(long)]
        scheme: SchemeId,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve several schemes and compare them against the benchmark.
    Compare {
        #[arg(long)]
        case: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        schemes: Option<Vec<SchemeId>>,
    },
    /// Solve the virtual-transmission scheme over a range of storage sizes.
    Sweep {
        #[arg(long)]
        case: PathBuf,
        /// Power rating per unit, MW.
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        sizes: Option<Vec<f64>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// LMP(a) - LMP(b) per bus and hour.
    LmpDiff {
        #[arg(long)]
        case: PathBuf,
        #[arg(long)]
        a: SchemeId,
        #[arg(long)]
        b: SchemeId,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a scheme's model as MPS or LP text.
    Export {
        #[arg(long)]
        case: PathBuf,
        #[arg(long)]
        scheme: SchemeId,
        #[arg(long)]
        format: ExportFormat,
        /// Output file; defaults to <scheme>.<format> in the working directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Derive the modified study case from a base RTS case file.
    MakeCase {
        /// Base case; the bundled RTS-79 data when omitted.
        #[arg(long)]
        base: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

type Failure = Box<dyn std::error::Error>;

fn study_config(g: &Global, out: Option<&PathBuf>) -> StudyConfig {
    let mut solver = SolverConfig { backend: g.backend.clone(), ..SolverConfig::default() };
    if let Some(t) = g.time_limit {
        solver.time_limit_s = t;
    }
    if let Some(gap) = g.gap {
        solver.mip_gap = gap;
    }
    StudyConfig {
        solver,
        out_dir: out.cloned(),
        strict_paper: g.strict_paper,
        parallel: !g.sequential,
        ..StudyConfig::default()
    }
}

fn write_run_info(dir: &std::path::Path, g: &Global, cfg: &StudyConfig) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)?;
    let mut text = format!(
        "backend={}\ntime_limit_s={}\nmip_gap={}\nstrict_paper={}\n",
        cfg.solver.backend, cfg.solver.time_limit_s, cfg.solver.mip_gap, cfg.strict_paper
    );
    if let Some(note) = &g.seed_note {
        text.push_str(&format!("note={note}\n"));
    }
    std::fs::write(dir.join("run_info.txt"), text)?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let g = &cli.global;
    match &cli.command {
        Command::Validate { case } => {
            let c = load_case(case)?;
            summarize(&c);
        }
        Command::Run { case, scheme, out } => {
            let c = load_case(case)?;
            let cfg = study_config(g, Some(out));
            cfg.validate()?;
            let r = study::run_scheme(&c, *scheme, &cfg)?;
            write_run_info(out, g, &cfg)?;
            let row = study::ComparisonRow {
                scheme: r.scheme,
                status: r.mip.status.name().into(),
                operation_cost: r.has_solution().then_some(r.mip.objective),
                best_bound: Some(r.mip.best_bound),
                cost_reduction: None,
                avg_congested_per_hour: r.congestion.as_ref().map(|c| c.avg_congested_per_hour),
                load_payment: r.load_payment,
                solve_time_s: r.mip.solve_time_s,
                gap: r.has_solution().then_some(r.mip.gap),
            };
            report::write_settlement(&out.join("settlement.csv"), std::slice::from_ref(&row))?;
            let runs = std::slice::from_ref(&r);
            report::write_congestion(&out.join("congestion.csv"), runs)?;
            report::write_lmp(&out.join("lmp.csv"), runs)?;
            report::write_storage(&out.join("storage.csv"), runs)?;
            if r.case.branch(cfg.target_branch).is_some() {
                report::write_flow_trace(&out.join("flow_trace.csv"), &study::run_flow_trace(runs, cfg.target_branch)?)?;
            }
            println!("{} {} cost={}", r.scheme, r.mip.status, r.mip.objective);
            if !r.has_solution() {
                return Err(format!("{} ended with status {}", r.scheme, r.mip.status).into());
            }
        }
        Command::Compare { case, out, schemes } => {
            let c = load_case(case)?;
            let mut cfg = study_config(g, Some(out));
            if let Some(s) = schemes {
                cfg.schemes = s.clone();
            }
            let cmp = study::run_comparison(&c, &cfg)?;
            write_run_info(out, g, &cfg)?;
            report::write_comparison_outputs(out, &cmp, cfg.target_branch)?;
            for r in &cmp.rows {
                println!(
                    "{:<14} {:>14} {:>8} {}",
                    r.scheme.name(),
                    r.operation_cost.map(|x| format!("{x:.2}")).unwrap_or_default(),
                    r.cost_reduction.map(|x| format!("{:.2}%", 100.0 * x)).unwrap_or_default(),
                    r.status
                );
            }
        }
        Command::Sweep { case, sizes, out } => {
            let c = load_case(case)?;
            let mut cfg = study_config(g, Some(out));
            if let Some(s) = sizes {
                cfg.sweep_sizes_mw = s.clone();
            }
            let sweep = study::run_size_sweep(&c, &cfg)?;
            write_run_info(out, g, &cfg)?;
            report::write_sweep(&out.join("sweep.csv"), &sweep)?;
            for p in &sweep.points {
                println!("{:>6} MW {:>14.2}", p.size_mw, p.operation_cost);
            }
            for (a, b) in &sweep.anomalies {
                eprintln!("warning: cost rises from {a} MW to {b} MW beyond twice the gap (solver tolerance anomaly)");
            }
        }
        Command::LmpDiff { case, a, b, out } => {
            let c = load_case(case)?;
            let cfg = study_config(g, Some(out));
            let diff = study::run_lmp_diff(&c, *a, *b, &cfg)?;
            write_run_info(out, g, &cfg)?;
            let path = out.join(format!("lmp_diff_{}_{}.csv", a.name(), b.name()));
            report::write_lmp_matrix(&path, &diff)?;
            println!("wrote {}", path.display());
        }
        Command::Export { case, scheme, format, out } => {
            let c = load_case(case)?;
            let cfg = study_config(g, None);
            let scase = study::scheme_case(&c, *scheme, cfg.target_branch)?;
            let model = build(&scase, *scheme, &cfg.formulation)?;
            let path = out.clone().unwrap_or_else(|| PathBuf::from(format!("{}.{}", scheme.name(), format.extension())));
            export_model(&model, &path, *format)?;
            println!("wrote {} ({} columns, {} rows)", path.display(), model.var_count(), model.row_count());
        }
        Command::MakeCase { base, out } => {
            let base = match base {
                Some(p) => load_case(p)?,
                None => bundled_base_case(),
            };
            let modified = build_modified_rts_case(&base, &ModifiedRtsConfig::default())?;
            save_case(&modified, out)?;
            summarize(&modified);
        }
    }
    Ok(())
}

fn summarize(c: &Case) {
    let peak = (0..c.horizon()).map(|t| c.total_demand(t).unwrap_or(0.0)).fold(0.0, f64::max);
    let capacity: f64 = c.generators.iter().map(|g| g.p_max_mw).sum();
    println!(
        "{}: {} buses, {} branches, {} generators ({capacity:.0} MW), {} solar, {} storage, {} hours, peak demand {peak:.1} MW",
        c.meta.name,
        c.buses.len(),
        c.branches.len(),
        c.generators.len(),
        c.solar.len(),
        c.storage.len(),
        c.horizon()
    );
}
