use std::path::PathBuf;

use anyhow::Context;
use clap::ValueEnum;
use evmforge_core::detect::{evaluate, ClipRecord, Model, Split};

use crate::args::SourceArg;
use crate::emit::{write_csv, write_json};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SplitArg {
    Train,
    Test,
    All,
}

/// Score a saved model on a features table.
#[derive(Debug, clap::Args)]
pub struct EvalCmd {
    /// Model JSON written by the train subcommand.
    #[arg(long)]
    model: PathBuf,

    /// features.csv produced by the features subcommand.
    #[arg(long)]
    features: PathBuf,

    /// Manifest supplying each clip's TRAIN/TEST assignment.
    #[arg(long)]
    manifest: PathBuf,

    /// Directory receiving metrics files.
    #[arg(long)]
    out_dir: PathBuf,

    /// Which feature track to score.
    #[arg(long, value_enum, default_value_t = SourceArg::Evm)]
    source: SourceArg,

    /// Which records to score.
    #[arg(long, value_enum, default_value_t = SplitArg::Test)]
    split: SplitArg,
}

impl EvalCmd {
    pub fn run(&self) -> anyhow::Result<usize> {
        let text = std::fs::read_to_string(&self.model)
            .with_context(|| format!("cannot read model {}", self.model.display()))?;
        let model = Model::from_json(&text)?;

        let records = super::load_records(&self.features, &self.manifest, self.source)?;
        let selected: Vec<ClipRecord> = records
            .into_iter()
            .filter(|r| match self.split {
                SplitArg::Train => r.split == Split::Train,
                SplitArg::Test => r.split == Split::Test,
                SplitArg::All => true,
            })
            .collect();

        let metrics = evaluate(&model, &selected)?;
        write_json(&self.out_dir.join("metrics.json"), &metrics)?;
        write_csv(
            &self.out_dir.join("metrics.csv"),
            super::METRICS_CSV_HEADER,
            &[super::metrics_csv_row(model.kind(), &metrics)],
        )?;
        log::info!(
            "{}: accuracy {:.3} on {} records",
            model.kind(),
            metrics.accuracy,
            selected.len()
        );
        Ok(0)
    }
}
