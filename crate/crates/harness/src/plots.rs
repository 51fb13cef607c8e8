//! Figure data: mean curves grouped into one JSON file per figure.
//!
//! Run summaries (`summary.csv`) become one figure per environment with a
//! series per method; the synthetic summary becomes one figure per dimension
//! with a series per criterion.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::SCHEMA_VERSION;
use crate::error::{io_err, HarnessError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Figure {
    pub schema_version: u32,
    pub figure: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

#[derive(Default)]
struct Draft {
    x_label: &'static str,
    y_label: &'static str,
    series: BTreeMap<String, Vec<(f64, f64)>>,
}

fn column(headers: &csv::StringRecord, name: &str, path: &Path) -> Result<usize> {
    headers.iter().position(|h| h == name).ok_or_else(|| HarnessError::Malformed {
        path: path.to_path_buf(),
        message: format!("missing column {name}"),
    })
}

fn number(record: &csv::StringRecord, i: usize, path: &Path) -> Result<f64> {
    record[i].parse().map_err(|_| HarnessError::Malformed {
        path: path.to_path_buf(),
        message: format!("not a number: {:?}", &record[i]),
    })
}

fn ingest(path: &Path, drafts: &mut BTreeMap<String, Draft>) -> Result<()> {
    if !path.is_file() {
        return Err(HarnessError::MissingInput(path.display().to_string()));
    }
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let synthetic = headers.iter().any(|h| h == "criterion");
    let (group, name, x_col, y_col) = if synthetic {
        ("dim", "criterion", "iteration", "mean")
    } else {
        ("environment", "method", "iteration", "mean")
    };
    let (gi, ni, xi, yi) = (
        column(&headers, group, path)?,
        column(&headers, name, path)?,
        column(&headers, x_col, path)?,
        column(&headers, y_col, path)?,
    );
    let mut fresh: BTreeMap<(String, String), Vec<(f64, f64)>> = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        let figure = if synthetic {
            format!("synthetic_d{}", &record[gi])
        } else {
            record[gi].to_string()
        };
        fresh
            .entry((figure, record[ni].to_string()))
            .or_default()
            .push((number(&record, xi, path)?, number(&record, yi, path)?));
    }
    for ((figure, series), points) in fresh {
        let draft = drafts.entry(figure.clone()).or_insert_with(|| Draft {
            x_label: if synthetic { "iteration" } else { "demonstrations" },
            y_label: if synthetic { "mean performance" } else { "mean best score" },
            ..Draft::default()
        });
        if draft.series.insert(series.clone(), points).is_some() {
            return Err(HarnessError::Malformed {
                path: path.to_path_buf(),
                message: format!("series {series} appears twice in figure {figure}"),
            });
        }
    }
    Ok(())
}

/// Builds the figures without writing anything.
pub fn build_figures(inputs: &[PathBuf]) -> Result<Vec<Figure>> {
    if inputs.is_empty() {
        return Err(HarnessError::MissingInput("no summary files given".into()));
    }
    let mut drafts = BTreeMap::new();
    for path in inputs {
        ingest(path, &mut drafts)?;
    }
    Ok(drafts
        .into_iter()
        .map(|(figure, draft)| Figure {
            schema_version: SCHEMA_VERSION,
            figure,
            x_label: draft.x_label.into(),
            y_label: draft.y_label.into(),
            series: draft
                .series
                .into_iter()
                .map(|(name, mut points)| {
                    points.sort_by(|a, b| a.0.total_cmp(&b.0));
                    let (x, y) = points.into_iter().unzip();
                    Series { name, x, y }
                })
                .collect(),
        })
        .collect())
}

/// Writes `<figure>.json` under `out` for every figure; nothing is written on error.
pub fn cmd_export_plots(inputs: &[PathBuf], out: &Path) -> Result<Vec<PathBuf>> {
    let figures = build_figures(inputs)?;
    std::fs::create_dir_all(out).map_err(io_err(out))?;
    let mut written = Vec::with_capacity(figures.len());
    for figure in &figures {
        let path = out.join(format!("{}.json", figure.figure));
        std::fs::write(&path, serde_json::to_vec_pretty(figure)?).map_err(io_err(&path))?;
        written.push(path);
    }
    Ok(written)
}
