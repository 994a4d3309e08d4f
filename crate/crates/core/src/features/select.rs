use super::{FeatureError, FeatureMatrix, Result};

/// Score given to columns that separate classes with zero within-class spread.
pub const SEPARABLE_SCORE: f64 = f64::MAX;

/// Standard deviations below this are clamped during normalization.
pub const STD_FLOOR: f64 = 1e-8;

/// Fisher score per column:
/// `Σ_c n_c (μ_c − μ)² / Σ_c n_c σ_c²`, with population variances.
///
/// A column with no variance at all scores 0; one with zero within-class
/// variance but distinct class means scores [`SEPARABLE_SCORE`].
pub fn fisher_score(matrix: &FeatureMatrix) -> Result<Vec<f64>> {
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); crate::EmotionLabel::COUNT];
    for (i, l) in matrix.labels.iter().enumerate() {
        members[l.code()].push(i);
    }
    let classes: Vec<&Vec<usize>> = members.iter().filter(|m| !m.is_empty()).collect();
    if classes.len() < 2 {
        return Err(FeatureError::InsufficientClasses(format!(
            "{} class(es) present, need at least 2",
            classes.len()
        )));
    }
    if let Some(small) = classes.iter().find(|m| m.len() < 2) {
        return Err(FeatureError::InsufficientClasses(format!(
            "class {} has only {} sample",
            matrix.labels[small[0]],
            small.len()
        )));
    }

    let n = matrix.n_rows() as f64;
    let scores = (0..matrix.n_cols())
        .map(|j| {
            let mean = matrix.rows.iter().map(|r| r[j]).sum::<f64>() / n;
            let (mut between, mut within) = (0.0, 0.0);
            for idx in &classes {
                let nc = idx.len() as f64;
                let mc = idx.iter().map(|&i| matrix.rows[i][j]).sum::<f64>() / nc;
                let var = idx.iter().map(|&i| (matrix.rows[i][j] - mc).powi(2)).sum::<f64>() / nc;
                between += nc * (mc - mean).powi(2);
                within += nc * var;
            }
            if within == 0.0 {
                if between == 0.0 {
                    0.0
                } else {
                    SEPARABLE_SCORE
                }
            } else {
                between / within
            }
        })
        .collect();
    Ok(scores)
}

/// Chosen column subset.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionReport {
    pub scores: Vec<f64>,
    /// Column indices, best first; ties by lower index.
    pub selected: Vec<usize>,
    pub k: usize,
}

pub fn select_top_k(scores: &[f64], k: usize) -> Result<SelectionReport> {
    if k == 0 || k > scores.len() {
        return Err(FeatureError::BadK { k, d: scores.len() });
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order.truncate(k);
    Ok(SelectionReport {
        scores: scores.to_vec(),
        selected: order,
        k,
    })
}

/// Per-column standardization fitted on a training split.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalizer {
    pub means: Vec<f64>,
    /// Already floored at [`STD_FLOOR`].
    pub stds: Vec<f64>,
}

impl Normalizer {
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let d = rows.first().map_or(0, Vec::len);
        let n = rows.len().max(1) as f64;
        let means: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
        let stds = (0..d)
            .map(|j| {
                let var = rows.iter().map(|r| (r[j] - means[j]).powi(2)).sum::<f64>() / n;
                var.sqrt().max(STD_FLOOR)
            })
            .collect();
        Self { means, stds }
    }

    pub fn apply_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(x, (m, s))| (x - m) / s)
            .collect()
    }

    pub fn apply(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.apply_row(r)).collect()
    }
}

/// Fits on `train` and standardizes `apply` with the same statistics.
pub fn zscore_normalize(train: &[Vec<f64>], apply: &[Vec<f64>]) -> (Vec<Vec<f64>>, Normalizer) {
    let norm = Normalizer::fit(train);
    (norm.apply(apply), norm)
}
