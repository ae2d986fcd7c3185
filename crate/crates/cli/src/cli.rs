use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use greycast_core::hybrid::{combine_forecasts, CombineScheme, HybridScheme, HybridWeights};
use greycast_core::markov::{
    marginal_distribution, markov_property_test, LogBase, MarkovTestReport, TransitionCounts,
};
use greycast_core::metrics::EvaluationReport;
use greycast_core::neural::ignn_forecast;
use greycast_core::pipeline::{forecast_dgm_fmarkov, residual_markov_test};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::backtest::{fold_origins, hybrid_fold, min_train, rolling_origin, summarize, BacktestReport};
use crate::config::{ModelKind, Overrides, PipelineConfig};
use crate::data::{create, read_counts, read_series, write_forecast_csv};
use crate::error::{CliError, Result};
use crate::hybrid::{fit_hybrid, BASE_NAMES};
use crate::report::{write_json, write_plot_csv, Column};
use crate::models;
use crate::synth::{generate, SynthConfig};

#[derive(Debug, Parser)]
#[command(name = "greycast", version, about = "Grey-system forecasting with Markov correction and hybrid weights")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model to a series and save it as JSON
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Forecast from a saved model
    Forecast {
        /// Model JSON written by `fit`
        #[arg(long)]
        input: PathBuf,
        /// Forecast CSV (stdout if omitted)
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Test the Markov property of residual states
    MarkovTest {
        /// Series CSV, or a JSON file with `counts`, `occupancy` and `total`
        #[arg(long)]
        input: PathBuf,
        /// Also write the report as JSON
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Fit DGM-FMarkov and IGNN, weight and combine them
    Hybrid {
        #[arg(long)]
        input: PathBuf,
        /// Report JSON (stdout if omitted)
        #[arg(long)]
        out: Option<PathBuf>,
        /// In-sample plot data CSV
        #[arg(long)]
        plot: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Rolling-origin evaluation of the base models and the hybrid
    Backtest {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        plot: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Print the metrics of a report JSON as a table
    Report {
        #[arg(long)]
        input: PathBuf,
    },
    /// Write a seeded synthetic series
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 278)]
        n: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

/// Pipeline settings; each flag overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// JSON config file
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long, value_parser = parse_snake::<HybridScheme>)]
    pub scheme: Option<HybridScheme>,
    #[arg(long, value_parser = parse_snake::<CombineScheme>)]
    pub combine: Option<CombineScheme>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated state boundaries
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub boundaries: Option<Vec<f64>>,
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long)]
    pub folds: Option<usize>,
    /// Logarithm in the Markov test statistic: natural or base10
    #[arg(long, value_parser = parse_snake::<LogBase>)]
    pub log_base: Option<LogBase>,
}

impl Common {
    fn resolve(&self) -> Result<PipelineConfig> {
        let o = Overrides {
            model: self.model,
            boundaries: self.boundaries.clone(),
            window: self.window,
            scheme: self.scheme,
            combine: self.combine,
            rho: self.rho,
            alpha: self.alpha,
            horizon: self.horizon,
            folds: self.folds,
            seed: self.seed,
            log_base: self.log_base,
        };
        PipelineConfig::resolve(self.config.as_deref(), &o)
    }
}

fn parse_snake<T: DeserializeOwned>(s: &str) -> std::result::Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_owned())).map_err(|e| e.to_string())
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit { input, out, common } => {
            let cfg = common.resolve()?;
            let x = read_series(&input)?;
            models::save(&out, models::fit_model(cfg.model, x.values(), &cfg)?)
        }
        Command::Forecast { input, out, horizon } => {
            let horizon = horizon.unwrap_or(PipelineConfig::default().horizon);
            let model = models::load(&input)?;
            let fc = models::forecast(&model, horizon)?;
            match out {
                Some(p) => write_forecast_csv(create(&p)?, &fc),
                None => write_forecast_csv(std::io::stdout().lock(), &fc),
            }
        }
        Command::MarkovTest { input, out, common } => {
            let cfg = common.resolve()?;
            let report = markov_test(&input, &cfg)?;
            print_markov(&report);
            match out {
                Some(p) => write_json(create(&p)?, &report),
                None => Ok(()),
            }
        }
        Command::Hybrid { input, out, plot, common } => {
            let cfg = common.resolve()?;
            run_hybrid(&input, out.as_deref(), plot.as_deref(), cfg)
        }
        Command::Backtest { input, out, plot, common } => {
            let cfg = common.resolve()?;
            run_backtest(&input, out.as_deref(), plot.as_deref(), cfg)
        }
        Command::Report { input } => print_report(&input),
        Command::Synth { out, n, seed } => {
            let x = generate(&SynthConfig { n, seed, ..SynthConfig::default() })?;
            let mut w = create(&out)?;
            let mut text = String::from("value\n");
            for v in x {
                text.push_str(&format!("{v:.16e}\n"));
            }
            w.write_all(text.as_bytes()).map_err(|e| CliError::io(&out, e))
        }
    }
}

fn markov_test(input: &Path, cfg: &PipelineConfig) -> Result<MarkovTestReport> {
    if input.extension().is_some_and(|e| e == "json") {
        let fx = read_counts(input)?;
        let tc = TransitionCounts::from_matrix(fx.counts, fx.total)?;
        let marginals = marginal_distribution(&fx.occupancy, fx.total)?;
        Ok(markov_property_test(&tc, &marginals, cfg.alpha, cfg.log_base)?)
    } else {
        let x = read_series(input)?;
        Ok(residual_markov_test(x.values(), &cfg.partition()?, cfg.alpha, cfg.log_base)?.report)
    }
}

fn print_markov(r: &MarkovTestReport) {
    println!("chi_squared = {}", r.chi_squared);
    println!("dof = {}", r.dof);
    println!("threshold = {}", r.threshold);
    println!("alpha = {}", r.alpha.value());
    println!("log_base = {}", match r.log_base {
        LogBase::Natural => "natural",
        LogBase::Base10 => "base10",
    });
    println!("verdict = {}", if r.is_markov { "MARKOV" } else { "NOT MARKOV" });
}

#[derive(Debug, Serialize)]
struct HybridReport {
    config: PipelineConfig,
    /// First in-sample index covered by both base models.
    offset: usize,
    weights: HybridWeights,
    metrics: BTreeMap<String, EvaluationReport>,
    forecast: BTreeMap<String, Vec<f64>>,
    markov: Option<MarkovTestReport>,
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    match out {
        Some(p) => write_json(create(p)?, value),
        None => write_json(std::io::stdout().lock(), value),
    }
}

fn residual_markov(x: &[f64], cfg: &PipelineConfig) -> Option<MarkovTestReport> {
    let p = cfg.partition().ok()?;
    residual_markov_test(x, &p, cfg.alpha, cfg.log_base).ok().map(|c| c.report)
}

fn run_hybrid(input: &Path, out: Option<&Path>, plot: Option<&Path>, cfg: PipelineConfig) -> Result<()> {
    let x = read_series(input)?;
    let x = x.values();
    let fit = fit_hybrid(x, &cfg)?;
    let bases = [
        forecast_dgm_fmarkov(&fit.model.dgm_fmarkov, cfg.horizon)?.into_values(),
        ignn_forecast(&fit.model.ignn, cfg.horizon)?.into_values(),
    ];
    let combined = combine_forecasts(&bases, &fit.model.weights.weights, fit.model.combine)?;
    let mut forecast: BTreeMap<String, Vec<f64>> =
        BASE_NAMES.iter().map(|s| (*s).to_owned()).zip(bases).collect();
    forecast.insert("hybrid".to_owned(), combined);

    if let Some(p) = plot {
        let t: Vec<usize> = (fit.bases.offset..x.len()).collect();
        let wrap = |v: &[f64]| v.iter().copied().map(Some).collect::<Vec<_>>();
        let cols: Vec<Vec<Option<f64>>> = fit
            .bases
            .fitted
            .iter()
            .map(|f| wrap(f))
            .chain([wrap(&fit.combined)])
            .collect();
        let names = [BASE_NAMES[0], BASE_NAMES[1], "hybrid"];
        let columns: Vec<Column<'_>> = names
            .iter()
            .zip(&cols)
            .map(|(name, values)| Column { name, values })
            .collect();
        write_plot_csv(create(p)?, &t, &fit.bases.actual, &columns)?;
    }

    let report = HybridReport {
        offset: fit.bases.offset,
        weights: fit.model.weights.clone(),
        metrics: fit.metrics()?,
        forecast,
        markov: residual_markov(x, &cfg),
        config: cfg,
    };
    emit_json(out, &report)
}

fn run_backtest(input: &Path, out: Option<&Path>, plot: Option<&Path>, cfg: PipelineConfig) -> Result<()> {
    let x = read_series(input)?;
    let x = x.values();
    let origins = fold_origins(x.len(), cfg.folds, cfg.horizon, min_train(&cfg))?;
    let folds = rolling_origin(x, &origins, cfg.horizon, hybrid_fold(&cfg))?;

    if let Some(p) = plot {
        let mut t = Vec::new();
        let mut actual = Vec::new();
        let names: Vec<String> = folds[0].output.forecasts.iter().map(|(n, _)| n.clone()).collect();
        let mut cols: Vec<Vec<Option<f64>>> = vec![Vec::new(); names.len()];
        for fold in &folds {
            t.extend(fold.origin..fold.origin + fold.actual.len());
            actual.extend_from_slice(&fold.actual);
            for (col, (_, f)) in cols.iter_mut().zip(&fold.output.forecasts) {
                col.extend(f.iter().copied().map(Some));
            }
        }
        let columns: Vec<Column<'_>> = names
            .iter()
            .zip(&cols)
            .map(|(name, values)| Column { name, values })
            .collect();
        write_plot_csv(create(p)?, &t, &actual, &columns)?;
    }

    let report = BacktestReport {
        horizon: cfg.horizon,
        origins,
        metrics: summarize(&folds)?,
        weights: folds.iter().filter_map(|f| f.output.weights.clone()).collect(),
        markov: residual_markov(x, &cfg),
        config: cfg,
    };
    emit_json(out, &report)
}

fn print_report(input: &Path) -> Result<()> {
    let text = std::fs::read_to_string(input).map_err(|e| CliError::io(input, e))?;
    let v: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Parse(format!("{}: {e}", input.display())))?;
    let metrics = v
        .get("metrics")
        .and_then(|m| m.as_object())
        .ok_or_else(|| CliError::Parse(format!("{}: no \"metrics\" block", input.display())))?;
    let cell = |m: &serde_json::Value, k: &str| {
        m.get(k)
            .and_then(|x| x.as_f64())
            .map_or_else(|| "-".to_owned(), |x| format!("{x:.6}"))
    };
    println!("{:<14} {:>14} {:>14} {:>14} {:>14} {:>6}", "model", "mse", "mae", "mape%", "theil", "n");
    for (name, m) in metrics {
        println!(
            "{:<14} {:>14} {:>14} {:>14} {:>14} {:>6}",
            name,
            cell(m, "mse"),
            cell(m, "mae"),
            cell(m, "mape"),
            cell(m, "theil"),
            m.get("n").and_then(|n| n.as_u64()).unwrap_or(0)
        );
    }
    if let Some(w) = v.get("weights") {
        let w = if w.is_array() { w.as_array().and_then(|a| a.last()) } else { Some(w) };
        if let Some(ws) = w.and_then(|w| w.get("weights")).and_then(|w| w.as_array()) {
            let ws: Vec<String> = ws.iter().filter_map(|x| x.as_f64()).map(|x| format!("{x:.6}")).collect();
            println!("weights: {}", ws.join(", "));
        }
    }
    Ok(())
}
