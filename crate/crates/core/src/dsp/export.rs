use std::io::{self, Write};

use super::PowerSpectra;
use crate::audio_io::AudioClip;

/// `frame,bin,value` rows, one per spectrogram cell.
pub fn write_spectrogram_csv<W: Write>(power: &PowerSpectra, mut out: W) -> io::Result<()> {
    writeln!(out, "frame,bin,value")?;
    for (f, row) in power.power.iter().enumerate() {
        for (b, v) in row.iter().enumerate() {
            writeln!(out, "{f},{b},{v:e}")?;
        }
    }
    out.flush()
}

/// `sample,value` rows of the raw waveform.
pub fn write_waveplot_csv<W: Write>(clip: &AudioClip, mut out: W) -> io::Result<()> {
    writeln!(out, "sample,value")?;
    for (i, v) in clip.samples().iter().enumerate() {
        writeln!(out, "{i},{v}")?;
    }
    out.flush()
}
