use std::io::{self, Write};

use super::{ConfusionMatrix, EpochLoss};
use crate::audio_io::EmotionLabel;

fn class_name(i: usize) -> String {
    EmotionLabel::from_code(i).map_or_else(|| format!("class{i}"), |l| l.name().to_string())
}

/// `epoch,train_loss,test_loss`, epochs numbered from 1. A missing test loss is left blank.
pub fn write_loss_csv<W: Write>(history: &[EpochLoss], mut out: W) -> io::Result<()> {
    writeln!(out, "epoch,train_loss,test_loss")?;
    for (i, e) in history.iter().enumerate() {
        let test = e.test_loss.map(|v| v.to_string()).unwrap_or_default();
        writeln!(out, "{},{},{}", i + 1, e.train_loss, test)?;
    }
    out.flush()
}

/// Square count table; rows are true labels, columns predictions.
pub fn write_confusion_csv<W: Write>(m: &ConfusionMatrix, mut out: W) -> io::Result<()> {
    let names: Vec<String> = (0..m.n_classes()).map(class_name).collect();
    writeln!(out, "true/predicted,{}", names.join(","))?;
    for (name, row) in names.iter().zip(&m.counts) {
        let cells: Vec<String> = row.iter().map(u64::to_string).collect();
        writeln!(out, "{name},{}", cells.join(","))?;
    }
    out.flush()
}

fn fmt_acc(v: Option<f64>) -> String {
    v.map_or_else(|| "nan".to_string(), |a| format!("{a:.6}"))
}

/// `class,accuracy` with one row per class then `overall`. Accuracies are fractions.
pub fn write_accuracy_csv<W: Write>(m: &ConfusionMatrix, mut out: W) -> io::Result<()> {
    writeln!(out, "class,accuracy")?;
    for (i, acc) in m.per_class_accuracy().into_iter().enumerate() {
        writeln!(out, "{},{}", class_name(i), fmt_acc(acc))?;
    }
    writeln!(out, "overall,{}", fmt_acc(m.overall_accuracy()))?;
    out.flush()
}

/// Tab-separated per-class table in percent, followed by the overall accuracy.
pub fn write_accuracy_table<W: Write>(m: &ConfusionMatrix, mut out: W) -> io::Result<()> {
    let names: Vec<String> = (0..m.n_classes()).map(class_name).collect();
    let pct = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |a| format!("{:.2}%", 100.0 * a));
    writeln!(out, "Classification\t{}", names.join("\t"))?;
    let cells: Vec<String> = m.per_class_accuracy().into_iter().map(pct).collect();
    writeln!(out, "Recall (single run)\t{}", cells.join("\t"))?;
    writeln!(out, "Overall accuracy\t{} ({} samples)", pct(m.overall_accuracy()), m.total())?;
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn render<F: Fn(&mut Vec<u8>) -> io::Result<()>>(f: F) -> String {
        let mut buf = Vec::new();
        f(&mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn identity_confusion_csv() {
        let labels: Vec<usize> = (0..7).collect();
        let m = ConfusionMatrix::from_pairs(7, &labels, &labels);
        let text = render(|b| write_confusion_csv(&m, b));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "true/predicted,anger,disgust,fear,happy,neutral,sad,surprise");
        assert_eq!(lines[1], "anger,1,0,0,0,0,0,0");
        assert_eq!(lines[7], "surprise,0,0,0,0,0,0,1");
    }

    #[test]
    fn sad_row_cells() {
        let mut m = ConfusionMatrix::new(7);
        let sad = EmotionLabel::Sad.code();
        for _ in 0..14 {
            m.record(sad, EmotionLabel::Fear.code());
        }
        for _ in 0..11 {
            m.record(sad, EmotionLabel::Neutral.code());
        }
        let text = render(|b| write_confusion_csv(&m, b));
        assert_eq!(text.lines().nth(1 + sad).unwrap(), "sad,0,0,14,0,11,0,0");
    }

    #[test]
    fn empty_loss_history_is_header_only() {
        assert_eq!(render(|b| write_loss_csv(&[], b)), "epoch,train_loss,test_loss\n");
        let h = [EpochLoss {
            train_loss: 1.5,
            test_loss: None,
        }];
        assert_eq!(render(|b| write_loss_csv(&h, b)), "epoch,train_loss,test_loss\n1,1.5,\n");
    }

    #[test]
    fn accuracy_layout() {
        let m = ConfusionMatrix::from_pairs(7, &[0, 0, 1], &[0, 1, 1]);
        let text = render(|b| write_accuracy_csv(&m, b));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 9);
        assert_eq!(lines[0], "class,accuracy");
        assert_eq!(lines[1], "anger,0.500000");
        assert_eq!(lines[3], "fear,nan");
        assert_eq!(lines[8], "overall,0.666667");
        let table = render(|b| write_accuracy_table(&m, b));
        assert!(table.contains("50.00%"));
    }
}
