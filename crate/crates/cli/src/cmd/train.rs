use std::path::PathBuf;

use evmforge_core::detect::{
    evaluate, oversample_minority, train_logistic, train_tree, ClipRecord, LogisticHyper, Model,
    Split, TreeHyper,
};

use crate::args::{ModelArg, SourceArg};
use crate::emit::{write_atomic, write_csv, write_json};

/// Train classifiers on a features table and score them on the TEST split.
#[derive(Debug, clap::Args)]
pub struct TrainCmd {
    /// features.csv produced by the features subcommand.
    #[arg(long)]
    features: PathBuf,

    /// Manifest supplying each clip's TRAIN/TEST assignment.
    #[arg(long)]
    manifest: PathBuf,

    /// Directory receiving model and metrics files.
    #[arg(long)]
    out_dir: PathBuf,

    /// Which feature track to learn from.
    #[arg(long, value_enum, default_value_t = SourceArg::Evm)]
    source: SourceArg,

    #[arg(long, value_enum, default_value_t = ModelArg::Both)]
    model: ModelArg,

    /// Skip minority-class oversampling of the training split.
    #[arg(long)]
    no_oversample: bool,

    #[arg(long, default_value_t = 0.1)]
    learning_rate: f64,

    #[arg(long, default_value_t = 500)]
    epochs: usize,

    /// L2 penalty on the logistic weights.
    #[arg(long, default_value_t = 1e-4)]
    l2: f64,

    #[arg(long, default_value_t = 5)]
    max_depth: usize,

    #[arg(long, default_value_t = 1)]
    min_leaf: usize,

    /// Seed for oversampling (and reserved for the trainers).
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl TrainCmd {
    pub fn run(&self) -> anyhow::Result<usize> {
        let mut records = super::load_records(&self.features, &self.manifest, self.source)?;
        if !self.no_oversample {
            records = oversample_minority(records, self.seed)?;
        }
        let train: Vec<ClipRecord> = records
            .iter()
            .filter(|r| r.split == Split::Train)
            .cloned()
            .collect();
        let test: Vec<ClipRecord> = records
            .iter()
            .filter(|r| r.split == Split::Test)
            .cloned()
            .collect();
        if train.is_empty() {
            anyhow::bail!("no TRAIN records to fit on");
        }
        if test.is_empty() {
            anyhow::bail!(
                "no TEST records to evaluate on; mark some clips with \"split\": \"TEST\""
            );
        }

        let kinds: Vec<ModelArg> = match self.model {
            ModelArg::Both => vec![ModelArg::Logistic, ModelArg::Tree],
            one => vec![one],
        };

        let mut csv_rows = Vec::new();
        for kind in kinds {
            let model = match kind {
                ModelArg::Logistic => {
                    let hyper = LogisticHyper {
                        learning_rate: self.learning_rate,
                        epochs: self.epochs,
                        l2: self.l2,
                        seed: self.seed,
                    };
                    Model::Logistic(train_logistic(&train, &hyper)?)
                }
                ModelArg::Tree => {
                    let hyper = TreeHyper {
                        max_depth: self.max_depth,
                        min_leaf: self.min_leaf,
                    };
                    Model::Tree(train_tree(&train, &hyper)?)
                }
                ModelArg::Both => unreachable!("expanded above"),
            };
            let name = model.kind();
            let mut doc = model.to_json()?;
            doc.push('\n');
            write_atomic(
                &self.out_dir.join(format!("model_{name}.json")),
                doc.as_bytes(),
            )?;

            let metrics = evaluate(&model, &test)?;
            write_json(&self.out_dir.join(format!("metrics_{name}.json")), &metrics)?;
            csv_rows.push(super::metrics_csv_row(name, &metrics));
            log::info!(
                "{name}: accuracy {:.3} on {} test records",
                metrics.accuracy,
                test.len()
            );
        }
        write_csv(
            &self.out_dir.join("metrics.csv"),
            super::METRICS_CSV_HEADER,
            &csv_rows,
        )?;
        Ok(0)
    }
}
