//! Standalone training of the bundled network, recommended before starting a
//! tuning run. The verb doubles as a reference child process for the external
//! evaluator: hyperparameters arrive as `--name=value` flags and the final
//! line of stdout is a JSON object carrying the metrics.

use anyhow::Result;

use smbo::data::load_demo_digits;
use smbo::evaluation::{split_train_val, SplitSpec};
use smbo::mlp::{train, MlpConfig};

#[derive(Debug, clap::Args)]
pub struct DemoArgs {
    #[arg(long, default_value_t = 0.4)]
    pub dropout1: f64,
    #[arg(long, default_value_t = 0.3)]
    pub dropout2: f64,
    #[arg(long, default_value_t = 256)]
    pub units1: usize,
    #[arg(long, default_value_t = 128)]
    pub units2: usize,
    #[arg(long, default_value_t = 0.001)]
    pub lr: f64,
    #[arg(long, default_value_t = 20)]
    pub epochs: usize,
    /// Long name matches the search-space parameter so the verb honours the
    /// external child protocol verbatim.
    #[arg(long = "batch_size", alias = "batch-size", default_value_t = 64)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 0.9)]
    pub rho: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.2)]
    pub validation_split: f64,
}

pub fn cmd_demo(args: &DemoArgs) -> Result<()> {
    let config = MlpConfig {
        dropout1: args.dropout1,
        dropout2: args.dropout2,
        units1: args.units1,
        units2: args.units2,
        lr: args.lr,
        epochs: args.epochs,
        batch_size: args.batch_size,
        rho: args.rho,
    };
    config.validate()?;
    let data = load_demo_digits()?;
    let (train_idx, val_idx) = split_train_val(
        data.n,
        &SplitSpec {
            validation_fraction: args.validation_split,
            seed: args.seed,
        },
    )?;
    println!(
        "training on {} samples, validating on {}",
        train_idx.len(),
        val_idx.len()
    );
    let (_, history) = train(&config, &data, &train_idx, &val_idx, args.seed)?;
    for epoch in 0..config.epochs {
        println!(
            "epoch {:>3}: train_loss {:.6} train_acc {:.4} val_loss {:.6} val_acc {:.4}",
            epoch + 1,
            history.train_loss[epoch],
            history.train_acc[epoch],
            history.val_loss[epoch],
            history.val_acc[epoch],
        );
    }
    let metrics = serde_json::json!({
        "metric_train_loss": history.train_loss.last(),
        "metric_train_acc": history.train_acc.last(),
        "metric_val_loss": history.val_loss.last(),
        "metric_val_acc": history.val_acc.last(),
    });
    println!("{metrics}");
    Ok(())
}
