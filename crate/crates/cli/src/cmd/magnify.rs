use std::path::PathBuf;

use evmforge_core::evm::{magnify, MagParams};
use evmforge_core::io::write_frames;
use evmforge_core::Roi;

use crate::args::{BatchArgs, FormatArg, MagArgs};
use crate::emit::write_json;
use crate::manifest::load_manifest;
use crate::run::{report_failures, run_clips};

/// Amplify band-limited temporal variation in every manifest clip.
#[derive(Debug, clap::Args)]
pub struct MagnifyCmd {
    /// Clip manifest (JSON).
    #[arg(long)]
    manifest: PathBuf,

    /// Directory magnified clips and reports land in.
    #[arg(long)]
    out_dir: PathBuf,

    #[command(flatten)]
    mag: MagArgs,

    #[command(flatten)]
    batch: BatchArgs,

    #[arg(long, value_enum, default_value_t = FormatArg::Png)]
    format: FormatArg,
}

#[derive(serde::Serialize)]
struct Sidecar<'a> {
    clip_id: &'a str,
    /// Input path exactly as the manifest spelled it.
    input: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    roi: Option<Roi>,
    params: MagParams,
    frames: usize,
    fps: f64,
    width: usize,
    height: usize,
    output: String,
}

#[derive(serde::Serialize)]
struct Report {
    clips: Vec<ReportRow>,
}

#[derive(serde::Serialize)]
struct ReportRow {
    clip_id: String,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

impl MagnifyCmd {
    pub fn run(&self) -> anyhow::Result<usize> {
        let (manifest, base) = load_manifest(&self.manifest)?;
        let band = self.mag.band()?;

        let results = run_clips(&manifest, self.batch.jobs, |entry| {
            let seq = super::load_entry_clip(entry, &base, self.batch.fps)?;
            let params = self.mag.params(band, seq.width(), seq.height());
            let out = magnify(&seq, &params)?;

            let out_path = self.format.clip_path(&self.out_dir, &entry.clip_id);
            write_frames(&out, &out_path, self.format.into())?;
            let output = out_path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            let sidecar = Sidecar {
                clip_id: &entry.clip_id,
                input: &entry.path,
                roi: entry.roi,
                params,
                frames: out.len(),
                fps: out.fps,
                width: out.width(),
                height: out.height(),
                output: output.clone(),
            };
            write_json(
                &self.out_dir.join(format!("{}.json", entry.clip_id)),
                &sidecar,
            )?;
            Ok(output)
        })?;

        let clips = manifest
            .entries
            .iter()
            .zip(&results)
            .map(|(entry, result)| match result {
                Ok(output) => ReportRow {
                    clip_id: entry.clip_id.clone(),
                    status: "ok",
                    output: Some(output.clone()),
                    error: None,
                },
                Err(message) => ReportRow {
                    clip_id: entry.clip_id.clone(),
                    status: "error",
                    output: None,
                    error: Some(message.clone()),
                },
            })
            .collect();
        write_json(&self.out_dir.join("magnify_report.json"), &Report { clips })?;

        Ok(report_failures(&manifest, &results))
    }
}
