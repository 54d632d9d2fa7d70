//! Command-line surface.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "gumbel",
    version,
    about = "Gumbel-based categorical sampling, relaxation and gradient estimation",
    after_help = "Every run is a pure function of (--seed, config): reruns are byte-identical.\n\
                  Flags override fields of the --config JSON file; class indices are 0-based.\n\
                  CSV output uses a one-line header, comma separators and '.' decimal points."
)]
pub struct Cli {
    /// Master seed for all randomness.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// JSON config file; individual flags override its fields.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Write output here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Output format where a choice exists (tabular commands default to
    /// csv; topdown/estimate/verify emit json).
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PartitionArg {
    Median,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorArg {
    Reinforce,
    Gs,
    Stgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PayoffFormArg {
    Linear,
    Quadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Exactness,
    #[value(name = "max-stability")]
    MaxStability,
    Independence,
    Topdown,
    Wor,
    Gradients,
    All,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw categorical samples by the Gumbel-max trick, optionally with
    /// rescaled noise.
    #[command(after_help = "Schema (csv): draw_id,index,max_value\n\
                            `--noise-scale 0` degenerates to the argmax of the logits.")]
    Sample {
        /// Comma-separated logits, e.g. --logits 1.0,0.0,-0.5
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        logits: Option<Vec<f64>>,
        /// Boltzmann temperature T (default 1).
        #[arg(long, allow_negative_numbers = true)]
        temperature: Option<f64>,
        /// Gumbel noise scale beta (default 1).
        #[arg(long, allow_negative_numbers = true)]
        noise_scale: Option<f64>,
        #[arg(long)]
        n_draws: Option<usize>,
    },

    /// Sample k classes without replacement via Gumbel-top-k.
    #[command(after_help = "Schema (csv): draw_id,rank,index,perturbed_value")]
    Topk {
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        logits: Option<Vec<f64>>,
        #[arg(long, allow_negative_numbers = true)]
        temperature: Option<f64>,
        /// How many classes to keep per draw.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        n_draws: Option<usize>,
    },

    /// Regenerate perturbed logits top-down, optionally conditioned on the
    /// winning index and/or the maximum.
    #[command(
        after_help = "Schema (json): [{\"domain\": [..], \"omega\": i, \"m\": x}, ..],\n\
                            one node per sampleable class, root first."
    )]
    Topdown {
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        logits: Option<Vec<f64>>,
        #[arg(long, allow_negative_numbers = true)]
        temperature: Option<f64>,
        /// Condition on this argmax index.
        #[arg(long)]
        condition_index: Option<usize>,
        /// Condition on this maximum value.
        #[arg(long, allow_negative_numbers = true)]
        condition_max: Option<f64>,
        /// Sub-domain split rule.
        #[arg(long, value_enum)]
        partition: Option<PartitionArg>,
    },

    /// Draw Gumbel-Softmax soft samples (optionally straight-through).
    #[command(after_help = "Schema (csv): draw_id,w0,..,w{N-1}[,hard_index with --hard]")]
    Relax {
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        logits: Option<Vec<f64>>,
        #[arg(long, allow_negative_numbers = true)]
        temperature: Option<f64>,
        /// Relaxation temperature lambda.
        #[arg(long, allow_negative_numbers = true)]
        lambda: Option<f64>,
        #[arg(long)]
        n_draws: Option<usize>,
        /// Also emit the straight-through hard index.
        #[arg(long)]
        hard: bool,
    },

    /// Estimate the gradient of E[f(X)] and compare it to the analytic
    /// softmax-expectation gradient.
    #[command(
        after_help = "Schema (json): {estimator, lambda, seed, n_samples, report:\n\
                            {grad_mean, grad_std_err, n_samples, oracle_grad, max_abs_bias}}"
    )]
    Estimate {
        #[arg(long, value_enum)]
        estimator: Option<EstimatorArg>,
        #[arg(long, allow_negative_numbers = true)]
        lambda: Option<f64>,
        /// Comma-separated payoff vector c.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        payoff: Option<Vec<f64>>,
        #[arg(long, value_enum)]
        payoff_form: Option<PayoffFormArg>,
        #[arg(long)]
        n_samples: Option<usize>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        logits: Option<Vec<f64>>,
        #[arg(long, allow_negative_numbers = true)]
        temperature: Option<f64>,
    },

    /// Sweep noise scales and GS temperatures over one categorical:
    /// scaled-noise index histograms and mean soft samples.
    #[command(after_help = "Schema (csv): section,param,class,value with sections\n\
                            pi (reference probabilities, param empty),\n\
                            beta_hist (index frequency under noise scale beta),\n\
                            gs_mean (mean soft weight at lambda).\n\
                            Without --logits a five-class distribution is drawn from the seed.")]
    Experiment {
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        logits: Option<Vec<f64>>,
        #[arg(long, allow_negative_numbers = true)]
        temperature: Option<f64>,
        /// Noise scales to sweep.
        #[arg(long, value_delimiter = ',')]
        betas: Option<Vec<f64>>,
        /// GS temperatures to sweep.
        #[arg(long, value_delimiter = ',')]
        lambdas: Option<Vec<f64>>,
        #[arg(long)]
        n_draws: Option<usize>,
    },

    /// Run a named invariant suite; exit 0 iff every check passes.
    #[command(
        after_help = "Prints one line per check; --format json emits the full report.\n\
                            Suites: exactness, max-stability, independence, topdown, wor,\n\
                            gradients, all."
    )]
    Verify {
        #[arg(value_enum)]
        suite: SuiteArg,
    },
}
