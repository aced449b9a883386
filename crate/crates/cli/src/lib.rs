//! Experiment CLI for the multi-perspective LSTM library.
//!
//! Subcommands: `synth` (generate a modsum dataset), `train`, `eval`,
//! `gradcheck` (finite-difference verification grid), `bench`.
//! Every run is reproducible from its arguments, config, and input
//! files: repeated invocations produce byte-identical outputs.
//!
//! Exit codes: 0 success, 1 gradcheck failure, 2 usage error, 3 I/O
//! failure, 4 configuration violation, 5 data/model format violation.

pub mod config;
pub mod metrics;
pub mod model_file;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use mplstm::data::{gen_modsum, read_dataset, write_dataset, Dataset, ModSumSpec};
use mplstm::error::Error;
use mplstm::math::RngState;
use mplstm::network::{forward_sample, ModelParams, NetworkConfig};
use mplstm::training::{
    backward, evaluate, evaluate_score_fusion, gradcheck, train_epoch, EvalMetrics, RmsProp,
};

use config::{ExperimentConfig, FusionChoice};
use metrics::{emit_metrics_csv, EpochRow};
use model_file::{read_model, write_model, DataDims, ModelFile};

pub const EXIT_GRADCHECK: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_CONFIG: u8 = 4;
pub const EXIT_FORMAT: u8 = 5;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn io(context: &str, e: impl std::fmt::Display) -> Self {
        CliError {
            code: EXIT_IO,
            message: format!("{context}: {e}"),
        }
    }

    fn config(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    fn from_core(context: &str, e: Error) -> Self {
        let code = match e {
            Error::Io(_) => EXIT_IO,
            Error::InvalidConfig(_) => EXIT_CONFIG,
            _ => EXIT_FORMAT,
        };
        CliError {
            code,
            message: format!("{context}: {e}"),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "mplstm", version, about = "Multi-perspective LSTM experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic dataset (train + test split).
    Synth {
        /// Task name; only `modsum` is available.
        #[arg(long, default_value = "modsum")]
        task: String,
        /// Number of classes (and one-hot feature dim).
        #[arg(long, default_value_t = 4)]
        k: usize,
        /// Instances per perspective sequence.
        #[arg(long, default_value_t = 8)]
        n: usize,
        /// Per-entry Gaussian noise stddev.
        #[arg(long, default_value_t = 0.25)]
        noise: f64,
        #[arg(long, default_value_t = 2000)]
        train_samples: usize,
        #[arg(long, default_value_t = 1000)]
        test_samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Writes `<prefix>.train.mps` and `<prefix>.test.mps`.
        #[arg(long)]
        out_prefix: PathBuf,
    },
    /// Train a model and write per-epoch metrics plus the model file.
    Train {
        /// JSON experiment config.
        #[arg(long)]
        config: PathBuf,
        /// Training dataset (MPS1).
        #[arg(long)]
        train: PathBuf,
        /// Validation dataset (MPS1).
        #[arg(long)]
        val: PathBuf,
        /// Output model file (MPM1).
        #[arg(long)]
        out: PathBuf,
        /// Output metrics CSV.
        #[arg(long)]
        metrics: PathBuf,
    },
    /// Evaluate a trained model on a dataset.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// Run the finite-difference gradient verification grid.
    Gradcheck {
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Time epochs and per-sequence forward/backward passes.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 5)]
        reps: usize,
    },
}

/// Entry point used by both `main` and the test suites. Returns the
/// process exit status.
pub fn run(argv: &[String]) -> u8 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let is_usage_error = e.use_stderr();
            let _ = e.print();
            return if is_usage_error { EXIT_USAGE } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn dispatch(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Synth {
            task,
            k,
            n,
            noise,
            train_samples,
            test_samples,
            seed,
            out_prefix,
        } => cmd_synth(&task, k, n, noise, train_samples, test_samples, seed, &out_prefix),
        Command::Train {
            config,
            train,
            val,
            out,
            metrics,
        } => cmd_train(&config, &train, &val, &out, &metrics),
        Command::Eval { model, data } => cmd_eval(&model, &data),
        Command::Gradcheck { seed } => cmd_gradcheck(seed),
        Command::Bench { config, data, reps } => cmd_bench(&config, &data, reps),
    }
}

fn load_dataset(path: &Path) -> Result<Dataset, CliError> {
    read_dataset(path).map_err(|e| CliError::from_core(&format!("{}", path.display()), e))
}

fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(&format!("{}", path.display()), e))?;
    ExperimentConfig::from_json(&text)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

#[allow(clippy::too_many_arguments)]
fn cmd_synth(
    task: &str,
    k: usize,
    n: usize,
    noise: f64,
    train_samples: usize,
    test_samples: usize,
    seed: u64,
    out_prefix: &Path,
) -> Result<u8, CliError> {
    if task != "modsum" {
        return Err(CliError::config(format!("unknown task `{task}` (available: modsum)")));
    }
    let mut rng = RngState::new(seed);
    let gen = |samples: usize, rng: &mut RngState| -> Result<Dataset, CliError> {
        gen_modsum(
            &ModSumSpec {
                num_classes: k,
                seq_len: n,
                noise_std: noise,
                num_samples: samples,
            },
            rng,
        )
        .map_err(|e| CliError::from_core("modsum generation", e))
    };
    let train = gen(train_samples, &mut rng)?;
    let test = gen(test_samples, &mut rng)?;
    let train_path = suffixed(out_prefix, ".train.mps");
    let test_path = suffixed(out_prefix, ".test.mps");
    write_dataset(&train_path, &train)
        .map_err(|e| CliError::from_core(&format!("{}", train_path.display()), e))?;
    write_dataset(&test_path, &test)
        .map_err(|e| CliError::from_core(&format!("{}", test_path.display()), e))?;
    println!(
        "wrote {} ({} samples) and {} ({} samples)",
        train_path.display(),
        train.len(),
        test_path.display(),
        test.len()
    );
    Ok(0)
}

fn suffixed(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    prefix.with_file_name(name)
}

/// A training run in progress: either one network or a score-fusion
/// ensemble, each sub-model with its own RNG stream and optimizer.
struct TrainRun {
    config: NetworkConfig,
    members: Vec<TrainMember>,
    fusion_is_score: bool,
}

struct TrainMember {
    params: ModelParams,
    opt: RmsProp,
    rng: RngState,
    /// Training data restricted to this member's view.
    view: usize,
}

impl TrainRun {
    fn new(
        experiment: &ExperimentConfig,
        train_cfg: &TrainConfig,
        data: &Dataset,
    ) -> Result<TrainRun, Error> {
        let config = experiment.network_config(
            data.num_perspectives,
            data.feature_dim,
            data.num_classes,
        )?;
        let fusion_is_score = experiment.fusion == FusionChoice::Score;
        let members = if fusion_is_score {
            // independent single-view networks from derived seeds
            let sub = config.score_submodel();
            (0..data.num_perspectives)
                .map(|p| {
                    let mut rng = RngState::new(experiment.seed + p as u64);
                    let params = ModelParams::init(&sub, &mut rng);
                    let opt = RmsProp::new(&params, train_cfg.lr, train_cfg.rho, train_cfg.epsilon);
                    TrainMember {
                        params,
                        opt,
                        rng,
                        view: p,
                    }
                })
                .collect()
        } else {
            let mut rng = RngState::new(experiment.seed);
            let params = ModelParams::init(&config, &mut rng);
            let opt = RmsProp::new(&params, train_cfg.lr, train_cfg.rho, train_cfg.epsilon);
            vec![TrainMember {
                params,
                opt,
                rng,
                view: usize::MAX,
            }]
        };
        Ok(TrainRun {
            config,
            members,
            fusion_is_score,
        })
    }

    fn member_config(&self) -> NetworkConfig {
        if self.fusion_is_score {
            self.config.score_submodel()
        } else {
            self.config.clone()
        }
    }

    /// One epoch over every member; returns mean training metrics.
    fn epoch(&mut self, data: &Dataset, batch_size: usize) -> Result<(f64, f64), Error> {
        let member_config = self.member_config();
        let mut loss = 0.0;
        let mut acc = 0.0;
        let count = self.members.len() as f64;
        for member in &mut self.members {
            let member_data;
            let data_ref = if self.fusion_is_score {
                member_data = data.extract_view(member.view);
                &member_data
            } else {
                data
            };
            let metrics = train_epoch(
                &mut member.params,
                &member_config,
                data_ref,
                batch_size,
                &mut member.opt,
                &mut member.rng,
            )?;
            loss += metrics.loss;
            acc += metrics.accuracy;
        }
        Ok((loss / count, acc / count))
    }

    fn validate(&self, data: &Dataset) -> Result<EvalMetrics, Error> {
        if self.fusion_is_score {
            let models: Vec<ModelParams> =
                self.members.iter().map(|m| m.params.clone()).collect();
            evaluate_score_fusion(&models, &self.config, data)
        } else {
            evaluate(&self.members[0].params, &self.config, data)
        }
    }

    fn into_models(self) -> Vec<ModelParams> {
        self.members.into_iter().map(|m| m.params).collect()
    }
}

fn check_dims(tag: &str, reference: &Dataset, other: &Dataset) -> Result<(), CliError> {
    if reference.num_perspectives != other.num_perspectives
        || reference.feature_dim != other.feature_dim
        || reference.num_classes != other.num_classes
    {
        return Err(CliError::config(format!(
            "{tag}: shape (m={}, d={}, K={}) does not match training data (m={}, d={}, K={})",
            other.num_perspectives,
            other.feature_dim,
            other.num_classes,
            reference.num_perspectives,
            reference.feature_dim,
            reference.num_classes
        )));
    }
    Ok(())
}

fn cmd_train(
    config_path: &Path,
    train_path: &Path,
    val_path: &Path,
    out_path: &Path,
    metrics_path: &Path,
) -> Result<u8, CliError> {
    let experiment = load_config(config_path)?;
    let train_data = load_dataset(train_path)?;
    let val_data = load_dataset(val_path)?;
    check_dims("validation data", &train_data, &val_data)?;

    let mut run = TrainRun::new(&experiment, &train_data)
        .map_err(|e| CliError::from_core("configuration", e))?;
    let mut rows = Vec::with_capacity(experiment.epochs);
    for epoch in 1..=experiment.epochs {
        let (train_loss, train_acc) = run
            .epoch(&train_data, experiment.batch_size)
            .map_err(|e| CliError::from_core("training", e))?;
        let val = run
            .validate(&val_data)
            .map_err(|e| CliError::from_core("validation", e))?;
        rows.push(EpochRow {
            epoch,
            train_loss,
            train_acc,
            val_loss: val.loss,
            val_acc: val.accuracy,
        });
    }

    emit_metrics_csv(metrics_path, &rows)
        .map_err(|e| CliError::io(&format!("{}", metrics_path.display()), e))?;

    let dims = DataDims {
        num_perspectives: train_data.num_perspectives,
        seq_len: train_data.seq_len,
        input_dim: train_data.feature_dim,
        num_classes: train_data.num_classes,
    };
    let model = ModelFile {
        experiment,
        dims,
        models: run.into_models(),
    };
    write_model(out_path, &model)
        .map_err(|e| CliError::from_core(&format!("{}", out_path.display()), e))?;

    let last = rows.last().unwrap();
    println!(
        "trained {} epochs: train_loss={:.5e} train_acc={:.4} val_loss={:.5e} val_acc={:.4}",
        rows.len(),
        last.train_loss,
        last.train_acc,
        last.val_loss,
        last.val_acc
    );
    println!("model: {}", out_path.display());
    println!("metrics: {}", metrics_path.display());
    Ok(0)
}

/// Evaluates a loaded model file on a dataset.
pub fn eval_model(model: &ModelFile, data: &Dataset) -> Result<EvalMetrics, Error> {
    let config = model.experiment.network_config(
        model.dims.num_perspectives,
        model.dims.input_dim,
        model.dims.num_classes,
    )?;
    if model.experiment.fusion == FusionChoice::Score {
        evaluate_score_fusion(&model.models, &config, data)
    } else {
        evaluate(&model.models[0], &config, data)
    }
}

fn cmd_eval(model_path: &Path, data_path: &Path) -> Result<u8, CliError> {
    let model = read_model(model_path)
        .map_err(|e| CliError::from_core(&format!("{}", model_path.display()), e))?;
    let data = load_dataset(data_path)?;
    if data.num_perspectives != model.dims.num_perspectives
        || data.feature_dim != model.dims.input_dim
        || data.num_classes != model.dims.num_classes
    {
        return Err(CliError::config(format!(
            "dataset shape (m={}, d={}, K={}) does not match model (m={}, d={}, K={})",
            data.num_perspectives,
            data.feature_dim,
            data.num_classes,
            model.dims.num_perspectives,
            model.dims.input_dim,
            model.dims.num_classes
        )));
    }
    let metrics =
        eval_model(&model, &data).map_err(|e| CliError::from_core("evaluation", e))?;
    println!("loss: {:.5e}", metrics.loss);
    println!("accuracy: {:.5e}", metrics.accuracy);
    println!("confusion (rows = true label, cols = prediction):");
    for row in &metrics.confusion {
        let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
        println!("  {}", cells.join(" "));
    }
    Ok(0)
}

fn cmd_gradcheck(seed: u64) -> Result<u8, CliError> {
    let report = gradcheck(seed);
    for case in &report.cases {
        let status = if case.max_rel_err < report.threshold {
            "ok"
        } else {
            "FAIL"
        };
        println!("{} [{status}]", case.describe());
    }
    println!(
        "gradcheck: {} cases, max relative error {:.3e}, threshold {:.0e}",
        report.cases.len(),
        report.max_rel_err(),
        report.threshold
    );
    if report.passed() {
        println!("gradcheck: PASS");
        Ok(0)
    } else {
        eprintln!("error: gradcheck failed");
        Ok(EXIT_GRADCHECK)
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn cmd_bench(config_path: &Path, data_path: &Path, reps: usize) -> Result<u8, CliError> {
    if reps == 0 {
        return Err(CliError::config("bench: reps must be >= 1"));
    }
    let experiment = load_config(config_path)?;
    let data = load_dataset(data_path)?;
    let mut run = TrainRun::new(&experiment, &data)
        .map_err(|e| CliError::from_core("configuration", e))?;

    let mut epoch_times = Vec::with_capacity(reps);
    for _ in 0..reps {
        let t0 = Instant::now();
        run.epoch(&data, experiment.batch_size)
            .map_err(|e| CliError::from_core("bench epoch", e))?;
        epoch_times.push(t0.elapsed().as_secs_f64());
    }

    // per-sequence forward and forward+backward on the trained state
    let member_config = run.member_config();
    let mut fwd_times = Vec::with_capacity(reps);
    let mut fwdbwd_times = Vec::with_capacity(reps);
    for _ in 0..reps {
        let mut t_fwd = 0.0;
        let mut t_both = 0.0;
        for member in &run.members {
            let member_data;
            let data_ref = if run.fusion_is_score {
                member_data = data.extract_view(member.view);
                &member_data
            } else {
                &data
            };
            let t0 = Instant::now();
            for sample in &data_ref.samples {
                let _ = forward_sample(&member.params, &member_config, sample, None)
                    .map_err(|e| CliError::from_core("bench forward", e))?;
            }
            t_fwd += t0.elapsed().as_secs_f64();
            let t1 = Instant::now();
            for sample in &data_ref.samples {
                let trace = forward_sample(&member.params, &member_config, sample, None)
                    .map_err(|e| CliError::from_core("bench forward", e))?;
                let _ = backward(&trace, sample.label, &member.params, &member_config);
            }
            t_both += t1.elapsed().as_secs_f64();
        }
        fwd_times.push(t_fwd / data.len() as f64);
        fwdbwd_times.push(t_both / data.len() as f64);
    }

    println!("reps: {reps}");
    println!("median_epoch_seconds: {:.6}", median(epoch_times));
    println!(
        "median_forward_seconds_per_sequence: {:.6e}",
        median(fwd_times)
    );
    println!(
        "median_forward_backward_seconds_per_sequence: {:.6e}",
        median(fwdbwd_times)
    );
    Ok(0)
}
