use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use ffr_inertia::analytics::estimate_from_trace;
use ffr_inertia::control::{allocate_droop, vdic_coefficient};
use ffr_inertia_scenario::config::ConfigDocument;
use ffr_inertia_scenario::output::{self, write_json};
use ffr_inertia_scenario::{
    load_case_study, load_config, load_document, run_case_study, run_subcase, CaseStudyConfig,
    ScenarioConfig,
};

#[derive(Parser)]
#[command(name = "ffr-inertia", version, about = "Equivalent inertia of droop-controlled FFRs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct SimArgs {
    /// Override the integration step, seconds.
    #[arg(long)]
    dt: Option<f64>,
    /// Override the run length, seconds.
    #[arg(long)]
    duration: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario; writes trace.csv and summary.json.
    Simulate {
        /// Scenario file (defaults to the bundled time-variant droop scenario).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Run the four subcases and check their orderings.
    CaseStudy {
        /// One case-study file, or four scenario files (one per subcase).
        /// Defaults to the bundled case study.
        #[arg(long)]
        config: Vec<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Print the breakpoints of the bounded time-variant droop schedule.
    DesignSchedule {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also write a sampled schedule.csv here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recover the equivalent inertia from a trace CSV.
    Estimate {
        /// Scenario or case-study file supplying T_J, ΔP_f and the onset.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate { config, out, sim } => simulate(config.as_deref(), &out, &sim),
        Command::CaseStudy { config, out, sim } => case_study(&config, &out, &sim),
        Command::DesignSchedule { config, out } => design_schedule(config.as_deref(), out.as_deref()),
        Command::Estimate { config, trace, out } => estimate(config.as_deref(), &trace, &out),
    }
}

fn make_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn simulate(config: Option<&Path>, out: &Path, sim: &SimArgs) -> Result<()> {
    let scenario = match config {
        Some(path) => load_config(path)?,
        None => ScenarioConfig::bundled(),
    }
    .with_sim_overrides(sim.dt, sim.duration)?;

    let run = run_subcase(&scenario)?;
    make_dir(out)?;
    output::emit_trace_csv(&run.trace, &out.join("trace.csv"))?;
    write_json(&run.metrics, &out.join("summary.json"))?;
    println!("{}", serde_json::to_string_pretty(&run.metrics)?);
    Ok(())
}

fn case_study(configs: &[PathBuf], out: &Path, sim: &SimArgs) -> Result<()> {
    let scenarios = match configs {
        [] => CaseStudyConfig::bundled()
            .with_sim_overrides(sim.dt, sim.duration)?
            .expand(),
        [single] => load_case_study(single)?
            .with_sim_overrides(sim.dt, sim.duration)?
            .expand(),
        many => many
            .iter()
            .map(|p| Ok(load_config(p)?.with_sim_overrides(sim.dt, sim.duration)?))
            .collect::<Result<Vec<_>>>()?,
    };
    let study = run_case_study(&scenarios)?;
    let written = output::write_case_study(&study, out)?;

    for run in &study.runs {
        let m = &run.metrics;
        println!(
            "{:<5} {:<15} initial RoCoF {:+.6e}  nadir {:+.6e} at {:.3} s  steady {:+.6e}",
            run.subcase.label(),
            run.subcase.name(),
            m.initial_rocof,
            m.nadir,
            m.nadir_time,
            m.steady_state_omega
        );
    }
    for check in &study.report.checks {
        let verdict = if check.passed { "PASS" } else { "FAIL" };
        println!("{verdict}  {}  ({})", check.claim, check.detail);
    }
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn design_schedule(config: Option<&Path>, out: Option<&Path>) -> Result<()> {
    let doc = match config {
        Some(path) => load_document(path)?,
        None => ConfigDocument::CaseStudy(CaseStudyConfig::bundled()),
    };
    let Some(schedule) = doc.vdic_schedule() else {
        bail!("config has no vdic_schedule block");
    };
    let (t_hi, t_lo) = (schedule.upper_crossover(), schedule.lower_crossover());

    println!("target inertia ΔT_J = {} s", schedule.target_inertia());
    println!("{:<12} {:<24} k_total [p.u.]", "segment", "elapsed [s]");
    println!("{:<12} {:<24} {}", "ceiling", format!("[0, {t_hi}]"), schedule.upper_bound());
    println!(
        "{:<12} {:<24} {}/t",
        "hyperbola",
        format!("({t_hi}, {t_lo})"),
        schedule.target_inertia()
    );
    println!("{:<12} {:<24} {}", "floor", format!("[{t_lo}, ∞)"), schedule.lower_bound());

    let ffrs = doc.model().ffrs();
    if !ffrs.is_empty() {
        for (label, k) in [("ceiling", schedule.upper_bound()), ("floor", schedule.lower_bound())] {
            let alloc = allocate_droop(k, ffrs)?;
            let parts: Vec<String> = ffrs
                .iter()
                .zip(&alloc.coefficients)
                .map(|(f, c)| format!("{}={c}", f.id()))
                .collect();
            let flag = if alloc.saturated { " (saturated)" } else { "" };
            println!("{label} allocation: {}{flag}", parts.join(", "));
        }
    }

    if let Some(dir) = out {
        make_dir(dir)?;
        let path = dir.join("schedule.csv");
        let mut w = csv::Writer::from_path(&path)?;
        let mut header = vec!["elapsed".to_string(), "k_total".to_string()];
        header.extend(ffrs.iter().map(|f| format!("k_{}", f.id())));
        w.write_record(&header)?;
        let dt = doc.sim().time_step();
        let steps = (2.0 * t_lo / dt).ceil() as usize;
        for n in 0..=steps {
            let t = n as f64 * dt;
            let k = vdic_coefficient(&schedule, t);
            let mut row = vec![t.to_string(), k.to_string()];
            if !ffrs.is_empty() {
                row.extend(allocate_droop(k, ffrs)?.coefficients.iter().map(f64::to_string));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn estimate(config: Option<&Path>, trace: &Path, out: &Path) -> Result<()> {
    let doc = match config {
        Some(path) => load_document(path)?,
        None => ConfigDocument::CaseStudy(CaseStudyConfig::bundled()),
    };
    let event = doc.event();
    let trace = output::read_trace_csv(trace, event.onset_time())?;
    let est = estimate_from_trace(&trace, doc.model().total_inertia(), event.delta_pf())?;

    make_dir(out)?;
    let path = out.join("estimate.csv");
    output::write_estimate_csv(&est, &path)?;

    let valid: Vec<f64> = est.valid().map(|(_, d)| d).collect();
    if let (Some(first), Some(last)) = (valid.first(), valid.last()) {
        println!(
            "{} valid samples; ΔT_J from {first:.6} s to {last:.6} s",
            valid.len()
        );
    } else {
        println!("no well-conditioned samples");
    }
    println!("wrote {}", path.display());
    Ok(())
}
