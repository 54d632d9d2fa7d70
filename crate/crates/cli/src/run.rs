//! Subcommand implementations. Every command renders its complete output
//! into a string first, so runs are trivially byte-comparable, then writes
//! it to --out or stdout.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use serde::Serialize;

use gumbel_core::{
    gs_grad, gs_sample, gumbel_max_scaled, gumbel_topk, perturb, reinforce_grad, st_gs_grad,
    st_gs_sample, CategoricalParams, EstimatorReport, GumbelParams, GumbelSoftmaxParams, Objective,
    PartitionStrategy, RngState, TopDownCondition, TopDownConstruction,
};

use crate::cli::{Cli, Command, EstimatorArg, OutputFormat, PartitionArg, PayoffFormArg, SuiteArg};
use crate::config::{
    field_error, require_at_least_one, require_positive, validated_logits, ExperimentConfig,
};
use crate::verify::{run_suite, Suite};

pub fn dispatch(cli: Cli) -> Result<ExitCode> {
    let config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let seed = cli.seed.or(config.seed).unwrap_or(0);
    let out_path = cli.out.clone().or(config.output_path.clone());

    let (text, code) = match cli.command {
        Command::Sample {
            logits,
            temperature,
            noise_scale,
            n_draws,
        } => {
            let c = resolve_categorical(logits, temperature, &config, seed)?;
            let beta = noise_scale.or(config.noise_scale).unwrap_or(1.0);
            if !beta.is_finite() || beta < 0.0 {
                return Err(field_error("noise_scale", "must be finite and nonnegative"));
            }
            let n_draws =
                require_at_least_one("n_draws", n_draws.or(config.n_draws).unwrap_or(10))?;
            (
                run_sample(&c, beta, n_draws, seed, cli.format)?,
                ExitCode::SUCCESS,
            )
        }
        Command::Topk {
            logits,
            temperature,
            k,
            n_draws,
        } => {
            let c = resolve_categorical(logits, temperature, &config, seed)?;
            let k = require_at_least_one("k", k.or(config.k).unwrap_or(1))?;
            let n_draws =
                require_at_least_one("n_draws", n_draws.or(config.n_draws).unwrap_or(10))?;
            (
                run_topk(&c, k, n_draws, seed, cli.format)?,
                ExitCode::SUCCESS,
            )
        }
        Command::Topdown {
            logits,
            temperature,
            condition_index,
            condition_max,
            partition,
        } => {
            let c = resolve_categorical(logits, temperature, &config, seed)?;
            let condition_index = condition_index.or(config.condition_index);
            let condition_max = condition_max.or(config.condition_max);
            let strategy = resolve_partition(partition, &config)?;
            reject_csv("topdown", cli.format)?;
            (
                run_topdown(&c, condition_index, condition_max, strategy, seed)?,
                ExitCode::SUCCESS,
            )
        }
        Command::Relax {
            logits,
            temperature,
            lambda,
            n_draws,
            hard,
        } => {
            let c = resolve_categorical(logits, temperature, &config, seed)?;
            let lambda = resolve_lambda(lambda, &config)?;
            let n_draws =
                require_at_least_one("n_draws", n_draws.or(config.n_draws).unwrap_or(10))?;
            let hard = hard || config.hard.unwrap_or(false);
            (
                run_relax(&c, lambda, n_draws, hard, seed, cli.format)?,
                ExitCode::SUCCESS,
            )
        }
        Command::Estimate {
            estimator,
            lambda,
            payoff,
            payoff_form,
            n_samples,
            logits,
            temperature,
        } => {
            let c = resolve_categorical(logits, temperature, &config, seed)?;
            let estimator = estimator
                .or_else(|| parse_estimator(config.estimator.as_deref()))
                .unwrap_or(EstimatorArg::Reinforce);
            let payoff = payoff
                .or(config.payoff.clone())
                .ok_or_else(|| field_error("payoff", "is required"))?;
            if payoff.len() != c.len() {
                return Err(field_error("payoff", "length must match logits"));
            }
            if payoff.iter().any(|c| !c.is_finite()) {
                return Err(field_error("payoff", "entries must be finite"));
            }
            let form = payoff_form
                .or_else(|| parse_payoff_form(config.payoff_form.as_deref()))
                .unwrap_or(PayoffFormArg::Linear);
            let n_samples = require_at_least_one(
                "n_samples",
                n_samples.or(config.n_samples).unwrap_or(10_000),
            )?;
            let lambda = match estimator {
                EstimatorArg::Reinforce => None,
                _ => Some(resolve_lambda(lambda, &config)?),
            };
            reject_csv("estimate", cli.format)?;
            (
                run_estimate(&c, estimator, lambda, payoff, form, n_samples, seed)?,
                ExitCode::SUCCESS,
            )
        }
        Command::Experiment {
            logits,
            temperature,
            betas,
            lambdas,
            n_draws,
        } => {
            let c = resolve_experiment_categorical(logits, temperature, &config, seed)?;
            let betas = betas
                .or(config.betas.clone())
                .unwrap_or_else(|| vec![0.3, 1.0, 3.0]);
            if betas.is_empty() || betas.iter().any(|b| !b.is_finite() || *b < 0.0) {
                return Err(field_error(
                    "betas",
                    "must be nonempty, finite, nonnegative",
                ));
            }
            let lambdas = lambdas
                .or_else(|| config.gs_lambda.clone().map(|l| l.into_vec()))
                .unwrap_or_else(|| vec![0.05, 1.0, 5.0]);
            if lambdas.is_empty() || lambdas.iter().any(|l| !l.is_finite() || *l <= 0.0) {
                return Err(field_error(
                    "gs_lambda",
                    "must be nonempty, finite, positive",
                ));
            }
            let n_draws =
                require_at_least_one("n_draws", n_draws.or(config.n_draws).unwrap_or(20_000))?;
            (
                run_experiment(&c, &betas, &lambdas, n_draws, seed, cli.format)?,
                ExitCode::SUCCESS,
            )
        }
        Command::Verify { suite } => {
            let report = run_suite(suite_from_arg(suite), seed);
            let text = match cli.format {
                Some(OutputFormat::Json) => to_json(&report)?,
                _ => report.render_table(),
            };
            let code = if report.all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
            (text, code)
        }
    };

    match out_path {
        Some(path) => write_file(&path, &text)?,
        None => print!("{text}"),
    }
    Ok(code)
}

fn write_file(path: &PathBuf, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn reject_csv(command: &str, format: Option<OutputFormat>) -> Result<()> {
    if format == Some(OutputFormat::Csv) {
        Err(field_error("format", &format!("{command} only emits json")))
    } else {
        Ok(())
    }
}

fn suite_from_arg(arg: SuiteArg) -> Suite {
    match arg {
        SuiteArg::Exactness => Suite::Exactness,
        SuiteArg::MaxStability => Suite::MaxStability,
        SuiteArg::Independence => Suite::Independence,
        SuiteArg::Topdown => Suite::Topdown,
        SuiteArg::Wor => Suite::Wor,
        SuiteArg::Gradients => Suite::Gradients,
        SuiteArg::All => Suite::All,
    }
}

fn parse_estimator(name: Option<&str>) -> Option<EstimatorArg> {
    match name {
        Some("reinforce") => Some(EstimatorArg::Reinforce),
        Some("gs") => Some(EstimatorArg::Gs),
        Some("stgs") => Some(EstimatorArg::Stgs),
        _ => None,
    }
}

fn parse_payoff_form(name: Option<&str>) -> Option<PayoffFormArg> {
    match name {
        Some("linear") => Some(PayoffFormArg::Linear),
        Some("quadratic") => Some(PayoffFormArg::Quadratic),
        _ => None,
    }
}

fn resolve_partition(
    flag: Option<PartitionArg>,
    config: &ExperimentConfig,
) -> Result<PartitionStrategy> {
    let from_config = match config.partition.as_deref() {
        None => None,
        Some("median") => Some(PartitionArg::Median),
        Some("random") => Some(PartitionArg::Random),
        Some(_) => return Err(field_error("partition", "must be 'median' or 'random'")),
    };
    Ok(match flag.or(from_config).unwrap_or(PartitionArg::Median) {
        PartitionArg::Median => PartitionStrategy::MedianSplit,
        PartitionArg::Random => PartitionStrategy::RandomSplit,
    })
}

fn resolve_lambda(flag: Option<f64>, config: &ExperimentConfig) -> Result<f64> {
    let from_config = config.gs_lambda.clone().and_then(|l| {
        let v = l.into_vec();
        v.first().copied()
    });
    require_positive("gs_lambda", flag.or(from_config).unwrap_or(1.0))
}

fn resolve_categorical(
    logits: Option<Vec<f64>>,
    temperature: Option<f64>,
    config: &ExperimentConfig,
    _seed: u64,
) -> Result<CategoricalParams> {
    let logits = logits
        .or(config.logits.clone())
        .ok_or_else(|| field_error("logits", "is required"))?;
    build_categorical(logits, temperature, config)
}

/// The experiment subcommand invents a seeded five-class distribution when
/// no logits are given.
fn resolve_experiment_categorical(
    logits: Option<Vec<f64>>,
    temperature: Option<f64>,
    config: &ExperimentConfig,
    seed: u64,
) -> Result<CategoricalParams> {
    let logits = logits.or(config.logits.clone()).unwrap_or_else(|| {
        let mut rng = RngState::with_stream(seed, 900);
        (0..5)
            .map(|_| {
                let (u, next) = rng.next_uniform();
                rng = next;
                3.0 * u - 1.5
            })
            .collect()
    });
    build_categorical(logits, temperature, config)
}

fn build_categorical(
    logits: Vec<f64>,
    temperature: Option<f64>,
    config: &ExperimentConfig,
) -> Result<CategoricalParams> {
    let logits = validated_logits("logits", logits)?;
    let temperature = require_positive(
        "temperature",
        temperature.or(config.temperature).unwrap_or(1.0),
    )?;
    CategoricalParams::new(logits, temperature).map_err(|e| field_error("logits", &e.to_string()))
}

fn run_sample(
    c: &CategoricalParams,
    beta: f64,
    n_draws: usize,
    seed: u64,
    format: Option<OutputFormat>,
) -> Result<String> {
    let noise = GumbelParams::new(0.0, beta).expect("beta validated");
    let mut rng = RngState::new(seed);
    let mut rows = Vec::with_capacity(n_draws);
    for draw_id in 0..n_draws {
        let (draw, next) = gumbel_max_scaled(c, &noise, rng);
        rng = next;
        rows.push((draw_id, draw.index, draw.max_value));
    }
    match format {
        Some(OutputFormat::Json) => {
            #[derive(Serialize)]
            struct Row {
                draw_id: usize,
                index: usize,
                max_value: f64,
            }
            let rows: Vec<Row> = rows
                .into_iter()
                .map(|(draw_id, index, max_value)| Row {
                    draw_id,
                    index,
                    max_value,
                })
                .collect();
            to_json(&rows)
        }
        _ => {
            let mut out = String::from("draw_id,index,max_value\n");
            for (draw_id, index, max_value) in rows {
                writeln!(out, "{draw_id},{index},{max_value}")?;
            }
            Ok(out)
        }
    }
}

fn run_topk(
    c: &CategoricalParams,
    k: usize,
    n_draws: usize,
    seed: u64,
    format: Option<OutputFormat>,
) -> Result<String> {
    let support = c.logits().iter().filter(|a| a.is_finite()).count();
    if k > support {
        return Err(field_error("k", "exceeds the number of sampleable classes"));
    }
    let mut rng = RngState::new(seed);
    let mut rows = Vec::with_capacity(n_draws * k);
    for draw_id in 0..n_draws {
        let (pl, next) = perturb(c, rng);
        rng = next;
        let top = gumbel_topk(&pl, k).expect("k validated against support");
        for (rank, (&index, &value)) in top.indices().iter().zip(top.perturbed_values()).enumerate()
        {
            rows.push((draw_id, rank, index, value));
        }
    }
    match format {
        Some(OutputFormat::Json) => {
            #[derive(Serialize)]
            struct Row {
                draw_id: usize,
                rank: usize,
                index: usize,
                perturbed_value: f64,
            }
            let rows: Vec<Row> = rows
                .into_iter()
                .map(|(draw_id, rank, index, perturbed_value)| Row {
                    draw_id,
                    rank,
                    index,
                    perturbed_value,
                })
                .collect();
            to_json(&rows)
        }
        _ => {
            let mut out = String::from("draw_id,rank,index,perturbed_value\n");
            for (draw_id, rank, index, value) in rows {
                writeln!(out, "{draw_id},{rank},{index},{value}")?;
            }
            Ok(out)
        }
    }
}

fn run_topdown(
    c: &CategoricalParams,
    condition_index: Option<usize>,
    condition_max: Option<f64>,
    strategy: PartitionStrategy,
    seed: u64,
) -> Result<String> {
    let rng = RngState::new(seed);
    let mut construction = match (condition_index, condition_max) {
        (None, None) => TopDownConstruction::new(c, strategy, rng),
        (index, max_value) => {
            let cond = TopDownCondition { index, max_value };
            let (omega, m, rng) = gumbel_core::complete_condition(&cond, c, rng)
                .map_err(|e| field_error("condition_index/condition_max", &e.to_string()))?;
            TopDownConstruction::with_root(c, omega, m, strategy, rng)
                .map_err(|e| field_error("condition_index/condition_max", &e.to_string()))?
        }
    };

    #[derive(Serialize)]
    struct NodeOut {
        domain: Vec<usize>,
        omega: usize,
        m: f64,
    }
    let nodes: Vec<NodeOut> = construction
        .by_ref()
        .map(|n| NodeOut {
            domain: n.domain.members().to_vec(),
            omega: n.index,
            m: n.max_value,
        })
        .collect();
    to_json(&nodes)
}

fn run_relax(
    c: &CategoricalParams,
    lambda: f64,
    n_draws: usize,
    hard: bool,
    seed: u64,
    format: Option<OutputFormat>,
) -> Result<String> {
    let p = GumbelSoftmaxParams::new(c.clone(), lambda)
        .map_err(|e| field_error("gs_lambda", &e.to_string()))?;
    let mut rng = RngState::new(seed);
    let n = c.len();

    let mut soft_rows: Vec<Vec<f64>> = Vec::with_capacity(n_draws);
    let mut hard_indices: Vec<usize> = Vec::new();
    for _ in 0..n_draws {
        if hard {
            let (pair, next) = st_gs_sample(&p, rng);
            rng = next;
            hard_indices.push(pair.hard_index());
            soft_rows.push(pair.soft().weights().to_vec());
        } else {
            let (s, next) = gs_sample(&p, rng);
            rng = next;
            soft_rows.push(s.weights().to_vec());
        }
    }

    match format {
        Some(OutputFormat::Json) => {
            #[derive(Serialize)]
            struct Row {
                draw_id: usize,
                weights: Vec<f64>,
                #[serde(skip_serializing_if = "Option::is_none")]
                hard_index: Option<usize>,
            }
            let rows: Vec<Row> = soft_rows
                .into_iter()
                .enumerate()
                .map(|(draw_id, weights)| Row {
                    draw_id,
                    weights,
                    hard_index: hard.then(|| hard_indices[draw_id]),
                })
                .collect();
            to_json(&rows)
        }
        _ => {
            let mut out = String::from("draw_id");
            for i in 0..n {
                write!(out, ",w{i}")?;
            }
            if hard {
                out.push_str(",hard_index");
            }
            out.push('\n');
            for (draw_id, weights) in soft_rows.iter().enumerate() {
                write!(out, "{draw_id}")?;
                for w in weights {
                    write!(out, ",{w}")?;
                }
                if hard {
                    write!(out, ",{}", hard_indices[draw_id])?;
                }
                out.push('\n');
            }
            Ok(out)
        }
    }
}

fn run_estimate(
    c: &CategoricalParams,
    estimator: EstimatorArg,
    lambda: Option<f64>,
    payoff: Vec<f64>,
    form: PayoffFormArg,
    n_samples: usize,
    seed: u64,
) -> Result<String> {
    let obj = match form {
        PayoffFormArg::Linear => Objective::linear(payoff),
        PayoffFormArg::Quadratic => Objective::quadratic(payoff),
    };
    let rng = RngState::new(seed);
    let (name, report): (&str, EstimatorReport) = match estimator {
        EstimatorArg::Reinforce => ("reinforce", reinforce_grad(c, &obj, n_samples, rng).0),
        EstimatorArg::Gs => {
            let p = GumbelSoftmaxParams::new(c.clone(), lambda.expect("lambda resolved"))
                .map_err(|e| field_error("gs_lambda", &e.to_string()))?;
            ("gs", gs_grad(&p, &obj, n_samples, rng).0)
        }
        EstimatorArg::Stgs => {
            let p = GumbelSoftmaxParams::new(c.clone(), lambda.expect("lambda resolved"))
                .map_err(|e| field_error("gs_lambda", &e.to_string()))?;
            ("stgs", st_gs_grad(&p, &obj, n_samples, rng).0)
        }
    };

    #[derive(Serialize)]
    struct EstimateOut<'a> {
        estimator: &'a str,
        #[serde(skip_serializing_if = "Option::is_none")]
        lambda: Option<f64>,
        seed: u64,
        n_samples: usize,
        payoff_form: &'a str,
        report: EstimatorReport,
    }
    to_json(&EstimateOut {
        estimator: name,
        lambda,
        seed,
        n_samples,
        payoff_form: match form {
            PayoffFormArg::Linear => "linear",
            PayoffFormArg::Quadratic => "quadratic",
        },
        report,
    })
}

/// Per-beta scaled-noise index histograms and per-lambda mean soft
/// samples over one categorical.
fn run_experiment(
    c: &CategoricalParams,
    betas: &[f64],
    lambdas: &[f64],
    n_draws: usize,
    seed: u64,
    format: Option<OutputFormat>,
) -> Result<String> {
    let n = c.len();
    let mut sections: Vec<(String, String, Vec<f64>)> = Vec::new();

    sections.push(("pi".into(), String::new(), c.probs()));

    for (b, &beta) in betas.iter().enumerate() {
        let noise = GumbelParams::new(0.0, beta).expect("beta validated");
        let mut rng = RngState::with_stream(seed, 1000 + b as u64);
        let mut counts = vec![0u64; n];
        for _ in 0..n_draws {
            let (draw, next) = gumbel_max_scaled(c, &noise, rng);
            rng = next;
            counts[draw.index] += 1;
        }
        let freqs: Vec<f64> = counts.iter().map(|&k| k as f64 / n_draws as f64).collect();
        sections.push(("beta_hist".into(), format!("{beta}"), freqs));
    }

    for (l, &lambda) in lambdas.iter().enumerate() {
        let p = GumbelSoftmaxParams::new(c.clone(), lambda)
            .map_err(|e| field_error("gs_lambda", &e.to_string()))?;
        let mut rng = RngState::with_stream(seed, 2000 + l as u64);
        let mut acc = vec![0.0; n];
        for _ in 0..n_draws {
            let (s, next) = gs_sample(&p, rng);
            rng = next;
            for (a, w) in acc.iter_mut().zip(s.weights()) {
                *a += w;
            }
        }
        acc.iter_mut().for_each(|a| *a /= n_draws as f64);
        sections.push(("gs_mean".into(), format!("{lambda}"), acc));
    }

    match format {
        Some(OutputFormat::Json) => {
            #[derive(Serialize)]
            struct Row<'a> {
                section: &'a str,
                param: &'a str,
                class: usize,
                value: f64,
            }
            let mut rows = Vec::new();
            for (section, param, values) in &sections {
                for (class, &value) in values.iter().enumerate() {
                    rows.push(Row {
                        section,
                        param,
                        class,
                        value,
                    });
                }
            }
            to_json(&rows)
        }
        _ => {
            let mut out = String::from("section,param,class,value\n");
            for (section, param, values) in &sections {
                for (class, value) in values.iter().enumerate() {
                    writeln!(out, "{section},{param},{class},{value}")?;
                }
            }
            Ok(out)
        }
    }
}
