use std::io::{Read, Write};

use super::{ClipFeatures, FeatureError, FeatureParams, Result, N_GLOBALS};
use crate::audio_io::{EmotionLabel, Gender};

/// One flattened feature row per clip.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<EmotionLabel>,
    pub genders: Vec<Gender>,
    pub column_names: Vec<String>,
}

/// Nine significant digits in scientific notation.
pub fn format_sig9(v: f64) -> String {
    format!("{v:.8e}")
}

impl FeatureMatrix {
    pub fn from_clips(clips: &[ClipFeatures], params: &FeatureParams) -> Self {
        Self {
            rows: clips.iter().map(ClipFeatures::flatten).collect(),
            labels: clips.iter().map(|c| c.label).collect(),
            genders: clips.iter().map(|c| c.gender).collect(),
            column_names: params.column_names(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.column_names.len()
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            genders: indices.iter().map(|&i| self.genders[i]).collect(),
            column_names: self.column_names.clone(),
        }
    }

    /// Rebuilds per-clip structures from flattened rows laid out by `params`.
    pub fn to_clips(&self, params: &FeatureParams) -> Result<Vec<ClipFeatures>> {
        let n_channels = params.n_channels();
        let seq_len = params.max_frames * n_channels;
        if self.n_cols() != seq_len + N_GLOBALS {
            return Err(FeatureError::Format(format!(
                "{} columns do not match {} frames x {} channels + {} globals",
                self.n_cols(),
                params.max_frames,
                n_channels,
                N_GLOBALS
            )));
        }
        Ok(self
            .rows
            .iter()
            .zip(self.labels.iter().zip(&self.genders))
            .map(|(row, (&label, &gender))| {
                let mut globals = [0.0; N_GLOBALS];
                globals.copy_from_slice(&row[seq_len..]);
                ClipFeatures {
                    sequence: row[..seq_len].to_vec(),
                    n_frames: params.max_frames,
                    n_channels,
                    globals,
                    label,
                    gender,
                }
            })
            .collect())
    }

    /// Header is the column names followed by `label,gender`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let err = |e: csv::Error| FeatureError::Format(e.to_string());
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let mut header: Vec<&str> = self.column_names.iter().map(String::as_str).collect();
        header.extend(["label", "gender"]);
        w.write_record(&header).map_err(err)?;
        let mut record = Vec::with_capacity(header.len());
        for ((row, label), gender) in self.rows.iter().zip(&self.labels).zip(&self.genders) {
            record.clear();
            record.extend(row.iter().map(|&v| format_sig9(v)));
            record.push(label.name().to_string());
            record.push(gender.name().to_string());
            w.write_record(&record).map_err(err)?;
        }
        w.flush().map_err(|e| FeatureError::Format(e.to_string()))
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let err = |e: csv::Error| FeatureError::Format(e.to_string());
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers().map_err(err)?.clone();
        let n = header.len();
        if n < 2 || &header[n - 2] != "label" || &header[n - 1] != "gender" {
            return Err(FeatureError::Format("header must end with label,gender".into()));
        }
        let column_names: Vec<String> = header.iter().take(n - 2).map(String::from).collect();
        let mut m = FeatureMatrix {
            rows: Vec::new(),
            labels: Vec::new(),
            genders: Vec::new(),
            column_names,
        };
        for (line, rec) in r.records().enumerate() {
            let rec = rec.map_err(err)?;
            let row = rec
                .iter()
                .take(n - 2)
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| FeatureError::Format(format!("row {}: bad number {s:?}", line + 1)))
                })
                .collect::<Result<Vec<f64>>>()?;
            m.rows.push(row);
            m.labels.push(rec[n - 2].parse()?);
            m.genders.push(rec[n - 1].parse()?);
        }
        Ok(m)
    }
}
