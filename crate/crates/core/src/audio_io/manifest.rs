use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use walkdir::WalkDir;

use super::labels::looks_like_ravdess;
use super::{parse_ravdess, parse_savee, AudioError, Dataset, EmotionLabel, Gender, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: String,
    pub emotion: EmotionLabel,
    pub gender: Gender,
    pub speaker_id: String,
    pub dataset: Dataset,
}

/// Labelled clip list built from one or more dataset trees.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    /// Sorted by path.
    pub entries: Vec<ManifestEntry>,
    pub class_counts: BTreeMap<EmotionLabel, usize>,
    /// RAVDESS calm files that were dropped.
    pub calm_skipped: usize,
    /// One line per `.wav` file whose name could not be parsed.
    pub warnings: Vec<String>,
}

pub const MANIFEST_HEADER: [&str; 5] = ["path", "emotion", "gender", "speaker", "dataset"];

fn classify(path: &Path) -> Result<Option<ManifestEntry>> {
    let path_str = path.to_string_lossy().into_owned();
    let (dataset, parsed) = if looks_like_ravdess(path) {
        (Dataset::Ravdess, parse_ravdess(path)?)
    } else {
        (Dataset::Savee, Some(parse_savee(path)?))
    };
    Ok(parsed.map(|(emotion, gender, speaker_id)| ManifestEntry {
        path: path_str,
        emotion,
        gender,
        speaker_id,
        dataset,
    }))
}

/// Builds a manifest from an explicit list of candidate files.
///
/// The input order does not matter: paths are sorted and de-duplicated first.
pub fn manifest_from_paths<P: AsRef<Path>>(paths: &[P]) -> Result<Manifest> {
    let mut sorted: Vec<PathBuf> = paths.iter().map(|p| p.as_ref().to_path_buf()).collect();
    sorted.sort();
    sorted.dedup();

    let mut manifest = Manifest::default();
    for path in &sorted {
        match classify(path) {
            Ok(Some(entry)) => {
                *manifest.class_counts.entry(entry.emotion).or_insert(0) += 1;
                manifest.entries.push(entry);
            }
            Ok(None) => manifest.calm_skipped += 1,
            Err(e) => manifest.warnings.push(e.to_string()),
        }
    }
    if manifest.entries.is_empty() {
        return Err(AudioError::NoFilesFound);
    }
    Ok(manifest)
}

/// Recursively scans `roots` for `.wav` files and parses their labels.
pub fn build_manifest<P: AsRef<Path>>(roots: &[P]) -> Result<Manifest> {
    let mut files = Vec::new();
    for root in roots {
        for entry in WalkDir::new(root.as_ref()) {
            let entry = entry.map_err(|e| AudioError::Io {
                path: e.path().map(Path::to_path_buf).unwrap_or_else(|| root.as_ref().into()),
                source: e.into(),
            })?;
            let is_wav = entry
                .path()
                .extension()
                .and_then(|x| x.to_str())
                .is_some_and(|x| x.eq_ignore_ascii_case("wav"));
            if entry.file_type().is_file() && is_wav {
                files.push(entry.into_path());
            }
        }
    }
    manifest_from_paths(&files)
}

impl Manifest {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Writes `path,emotion,gender,speaker,dataset` rows with LF endings.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let err = |e: csv::Error| AudioError::Manifest(e.to_string());
        w.write_record(MANIFEST_HEADER).map_err(err)?;
        for e in &self.entries {
            w.write_record([
                e.path.as_str(),
                e.emotion.name(),
                e.gender.name(),
                e.speaker_id.as_str(),
                e.dataset.name(),
            ])
            .map_err(err)?;
        }
        w.flush().map_err(|e| AudioError::Manifest(e.to_string()))
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let err = |e: csv::Error| AudioError::Manifest(e.to_string());
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers().map_err(err)?.clone();
        if header.iter().ne(MANIFEST_HEADER) {
            return Err(AudioError::Manifest(format!(
                "expected header {}, found {}",
                MANIFEST_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut manifest = Manifest::default();
        for rec in r.records() {
            let rec = rec.map_err(err)?;
            let entry = ManifestEntry {
                path: rec[0].to_string(),
                emotion: rec[1].parse()?,
                gender: rec[2].parse()?,
                speaker_id: rec[3].to_string(),
                dataset: rec[4].parse()?,
            };
            *manifest.class_counts.entry(entry.emotion).or_insert(0) += 1;
            manifest.entries.push(entry);
        }
        if manifest.entries.is_empty() {
            return Err(AudioError::NoFilesFound);
        }
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn touch(root: &Path, rel: &str) {
        let p = root.join(rel);
        fs::create_dir_all(p.parent().unwrap()).unwrap();
        fs::write(p, b"").unwrap();
    }

    #[test]
    fn savee_fixture_tree() {
        let dir = tempfile::tempdir().unwrap();
        for f in ["DC/sa12.wav", "JK/h03.wav", "DC/x01.wav", "DC/readme.txt"] {
            touch(dir.path(), f);
        }
        let m = build_manifest(&[dir.path()]).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.class_counts[&EmotionLabel::Sad], 1);
        assert_eq!(m.class_counts[&EmotionLabel::Happy], 1);
        assert_eq!(m.class_counts.values().sum::<usize>(), m.len());
        assert_eq!(m.warnings.len(), 1);
        assert!(m.warnings[0].contains("x01"));
    }

    #[test]
    fn empty_directory_has_no_files() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(build_manifest(&[dir.path()]), Err(AudioError::NoFilesFound)));
    }

    #[test]
    fn calm_files_are_counted_not_listed() {
        let m = manifest_from_paths(&[
            "r/03-01-02-01-01-01-02.wav",
            "r/03-01-01-01-01-01-02.wav",
        ])
        .unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.calm_skipped, 1);
        assert_eq!(m.entries[0].gender, Gender::Female);
        assert_eq!(m.entries[0].dataset, Dataset::Ravdess);
    }

    #[test]
    fn csv_round_trip() {
        let m = manifest_from_paths(&["a/DC/a01.wav", "b/03-01-06-01-01-01-05.wav"]).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("path,emotion,gender,speaker,dataset\n"));
        assert!(!text.contains('\r'));
        let back = Manifest::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.entries, m.entries);
        assert_eq!(back.class_counts, m.class_counts);
    }
}
