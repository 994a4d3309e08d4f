use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{AudioError, Result};

/// The seven emotion classes. Codes follow alphabetical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmotionLabel {
    Anger = 0,
    Disgust = 1,
    Fear = 2,
    Happy = 3,
    Neutral = 4,
    Sad = 5,
    Surprise = 6,
}

impl EmotionLabel {
    pub const COUNT: usize = 7;
    pub const ALL: [EmotionLabel; 7] = [
        EmotionLabel::Anger,
        EmotionLabel::Disgust,
        EmotionLabel::Fear,
        EmotionLabel::Happy,
        EmotionLabel::Neutral,
        EmotionLabel::Sad,
        EmotionLabel::Surprise,
    ];

    pub fn code(self) -> usize {
        self as usize
    }

    pub fn from_code(code: usize) -> Option<Self> {
        Self::ALL.get(code).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            EmotionLabel::Anger => "anger",
            EmotionLabel::Disgust => "disgust",
            EmotionLabel::Fear => "fear",
            EmotionLabel::Happy => "happy",
            EmotionLabel::Neutral => "neutral",
            EmotionLabel::Sad => "sad",
            EmotionLabel::Surprise => "surprise",
        }
    }
}

impl fmt::Display for EmotionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EmotionLabel {
    type Err = AudioError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|e| e.name() == s)
            .ok_or_else(|| AudioError::Manifest(format!("unknown emotion {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Male,
    Female,
}

impl Gender {
    pub fn name(self) -> &'static str {
        match self {
            Gender::Male => "male",
            Gender::Female => "female",
        }
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Gender {
    type Err = AudioError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "male" => Ok(Gender::Male),
            "female" => Ok(Gender::Female),
            _ => Err(AudioError::Manifest(format!("unknown gender {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dataset {
    Savee,
    Ravdess,
}

impl Dataset {
    pub fn name(self) -> &'static str {
        match self {
            Dataset::Savee => "savee",
            Dataset::Ravdess => "ravdess",
        }
    }
}

impl FromStr for Dataset {
    type Err = AudioError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "savee" => Ok(Dataset::Savee),
            "ravdess" => Ok(Dataset::Ravdess),
            _ => Err(AudioError::Manifest(format!("unknown dataset {s:?}"))),
        }
    }
}

fn stem(path: &Path) -> Result<&str> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| AudioError::UnrecognizedFilename(path.display().to_string()))
}

/// Parses a SAVEE utterance name such as `DC/sa12.wav`.
///
/// The speaker comes from the parent directory, or from a `DC_` style stem
/// prefix as used by the flattened distribution of the corpus. SAVEE speakers
/// are all male.
pub fn parse_savee(path: impl AsRef<Path>) -> Result<(EmotionLabel, Gender, String)> {
    let path = path.as_ref();
    let unrecognized = || AudioError::UnrecognizedFilename(path.display().to_string());
    let stem = stem(path)?;
    let (speaker, utterance) = match stem.split_once('_') {
        Some((speaker, rest)) => (speaker.to_string(), rest),
        None => {
            let parent = path
                .parent()
                .and_then(|p| p.file_name())
                .and_then(|s| s.to_str())
                .ok_or_else(unrecognized)?;
            (parent.to_string(), stem)
        }
    };
    if speaker.is_empty() {
        return Err(unrecognized());
    }
    let split = utterance
        .find(|c: char| c.is_ascii_digit())
        .ok_or_else(unrecognized)?;
    let (prefix, digits) = utterance.split_at(split);
    if digits.len() != 2 || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(unrecognized());
    }
    let emotion = match prefix {
        "a" => EmotionLabel::Anger,
        "d" => EmotionLabel::Disgust,
        "f" => EmotionLabel::Fear,
        "h" => EmotionLabel::Happy,
        "n" => EmotionLabel::Neutral,
        "sa" => EmotionLabel::Sad,
        "su" => EmotionLabel::Surprise,
        _ => return Err(unrecognized()),
    };
    Ok((emotion, Gender::Male, speaker))
}

/// True when the stem looks like a RAVDESS identifier (seven dash-separated fields).
pub(crate) fn looks_like_ravdess(path: &Path) -> bool {
    stem(path).map(|s| s.split('-').count() == 7).unwrap_or(false)
}

/// Parses a RAVDESS identifier such as `03-01-05-01-01-01-01.wav`.
///
/// Returns `Ok(None)` for the calm class (emotion field `02`), which is
/// excluded from the seven-class problem. Odd actors are male.
pub fn parse_ravdess(path: impl AsRef<Path>) -> Result<Option<(EmotionLabel, Gender, String)>> {
    let path = path.as_ref();
    let unrecognized = || AudioError::UnrecognizedFilename(path.display().to_string());
    let fields: Vec<&str> = stem(path)?.split('-').collect();
    if fields.len() != 7
        || fields
            .iter()
            .any(|f| f.len() != 2 || !f.bytes().all(|b| b.is_ascii_digit()))
    {
        return Err(unrecognized());
    }
    let emotion = match fields[2] {
        "01" => EmotionLabel::Neutral,
        "02" => return Ok(None),
        "03" => EmotionLabel::Happy,
        "04" => EmotionLabel::Sad,
        "05" => EmotionLabel::Anger,
        "06" => EmotionLabel::Fear,
        "07" => EmotionLabel::Disgust,
        "08" => EmotionLabel::Surprise,
        _ => return Err(unrecognized()),
    };
    let actor: u32 = fields[6].parse().map_err(|_| unrecognized())?;
    if actor == 0 {
        return Err(unrecognized());
    }
    let gender = if actor % 2 == 1 {
        Gender::Male
    } else {
        Gender::Female
    };
    Ok(Some((emotion, gender, fields[6].to_string())))
}
