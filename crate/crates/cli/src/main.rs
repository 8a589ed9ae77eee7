use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use toolmorph_core::harness::{
    dump_rollout, evaluate_landscape, export_geometry, run_experiment, ExperimentConfig, LandscapeSpec,
};
use toolmorph_core::scenarios::{Scenario, ScenarioId};
use toolmorph_core::{Error, Result};

#[derive(Parser)]
#[command(name = "toolmorph", version, about = "Tool morphology optimization experiments")]
struct Cli {
    /// Parallel rollout workers (defaults to the number of cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// winding, flipping, pushing or reaching.
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Train and evaluate all configured algorithms.
    Run(Common),
    /// Task-loss slice over two parameter dimensions.
    Landscape {
        #[command(flatten)]
        common: Common,
        /// Comma-separated pair of dimension indices.
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// Dump one trajectory, with tangents, as CSV.
    Rollout {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        variation: usize,
        /// Comma-separated parameters (defaults to theta0).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        theta: Option<Vec<f64>>,
    },
    /// Write the deformed tool as text and SVG.
    Export {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        theta: Option<Vec<f64>>,
    },
}

fn load_config(c: &Common) -> Result<ExperimentConfig> {
    let scenario = c.scenario.as_deref().map(ScenarioId::parse).transpose()?;
    let mut cfg = match (&c.config, scenario) {
        (Some(path), s) => {
            let cfg = ExperimentConfig::load(path)?;
            if s.is_some_and(|s| s != cfg.scenario) {
                return Err(Error::config("scenario", "--scenario disagrees with the config file"));
            }
            cfg
        }
        (None, Some(s)) => ExperimentConfig::new(s),
        (None, None) => return Err(Error::config("scenario", "give --config or --scenario")),
    };
    if let Some(seed) = c.seed {
        cfg.seed = seed;
        if let Some(l) = cfg.landscape.as_mut() {
            l.seed = seed;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(c: &Common, cfg: &ExperimentConfig, default: &str) -> PathBuf {
    c.out
        .clone()
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| Path::new("results").join(cfg.scenario.name()).join(default))
}

fn theta_or_default(scenario: &Scenario, theta: Option<Vec<f64>>) -> Result<Vec<f64>> {
    let theta = theta.unwrap_or_else(|| scenario.spec.theta0.clone());
    scenario.check_theta(&theta)?;
    Ok(theta)
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run(c) => {
            let cfg = load_config(&c)?;
            let out = out_dir(&c, &cfg, "experiment");
            let report = run_experiment(&cfg, &out)?;
            println!("algorithm          runs  mean_loss     std_loss      success");
            for s in &report.summaries {
                let succ = match (s.mean_success_rate, s.std_success_rate) {
                    (Some(m), Some(sd)) => format!("{m:.3} +- {sd:.3}"),
                    _ => "-".into(),
                };
                println!(
                    "{:<18} {:>4}  {:<12.4e}  {:<12.4e}  {succ}",
                    s.algorithm.name(),
                    s.runs,
                    s.mean_test_loss,
                    s.std_test_loss
                );
            }
            if report.warnings > 0 {
                println!("{} runs failed and were excluded", report.warnings);
            }
            println!("wrote {}", out.display());
        }
        Command::Landscape {
            common,
            dims,
            resolution,
        } => {
            let cfg = load_config(&common)?;
            let scenario = Scenario::new(cfg.scenario_spec()?)?;
            let mut spec = cfg.landscape.clone().unwrap_or_else(|| LandscapeSpec::new([0, 1], 40));
            if let Some(d) = dims {
                if d.len() != 2 {
                    return Err(Error::config("dims", "expected two indices"));
                }
                spec.dims = [d[0], d[1]];
            }
            if let Some(r) = resolution {
                spec.resolution = [r, r];
            }
            if let Some(seed) = common.seed {
                spec.seed = seed;
            }
            let land = evaluate_landscape(&scenario, &spec)?;
            let out = out_dir(&common, &cfg, "landscape");
            std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
            let path = out.join("landscape.csv");
            let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
            land.write_csv(std::io::BufWriter::new(file)).map_err(|e| Error::io(&path, e))?;
            println!(
                "total variation {:.3}, {} failed cells, wrote {}",
                land.total_variation(),
                land.failed,
                path.display()
            );
        }
        Command::Rollout {
            common,
            variation,
            theta,
        } => {
            let cfg = load_config(&common)?;
            let scenario = Scenario::new(cfg.scenario_spec()?)?;
            let theta = theta_or_default(&scenario, theta)?;
            let var = scenario.variation(cfg.seed, variation);
            let path = common
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from(format!("{}_rollout_{variation}.csv", cfg.scenario)));
            dump_rollout(&scenario, &var, &theta, &path)?;
            println!("wrote {}", path.display());
        }
        Command::Export { common, theta } => {
            let cfg = load_config(&common)?;
            let scenario = Scenario::new(cfg.scenario_spec()?)?;
            let theta = theta_or_default(&scenario, theta)?;
            let stem = common
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from(format!("{}_tool", cfg.scenario)));
            let (txt, svg) = export_geometry(&scenario, &theta, &stem)?;
            println!("wrote {} and {}", txt.display(), svg.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("{}", serde_json::json!({"error": "ConfigError", "message": e.to_string()}));
            return ExitCode::from(2);
        }
    }
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", serde_json::json!({"error": e.kind(), "message": e.to_string()}));
            ExitCode::FAILURE
        }
    }
}
