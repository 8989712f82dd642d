use thiserror::Error;

use crate::label::GestureLabel;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("truth has {truth} labels but predictions have {predicted}")]
    LengthMismatch { truth: usize, predicted: usize },
    #[error("no samples")]
    Empty,
    #[error("label {0} is not a row of this matrix")]
    UnknownRow(GestureLabel),
    #[error("label {0} is not a column of this matrix")]
    UnknownColumn(GestureLabel),
}

/// True labels down the side, predictions across the top.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    rows: Vec<GestureLabel>,
    cols: Vec<GestureLabel>,
    counts: Vec<Vec<u64>>,
}

fn sorted_unique(mut v: Vec<GestureLabel>) -> Vec<GestureLabel> {
    v.sort();
    v.dedup();
    v
}

impl ConfusionMatrix {
    /// Empty matrix over the given labels; NONE is always a column.
    pub fn new(rows: &[GestureLabel], cols: &[GestureLabel]) -> Self {
        let rows = sorted_unique(rows.to_vec());
        let mut cols = cols.to_vec();
        cols.push(GestureLabel::None);
        let cols = sorted_unique(cols);
        let counts = vec![vec![0; cols.len()]; rows.len()];
        Self { rows, cols, counts }
    }

    /// Build from raw counts, e.g. when reading a report back.
    pub fn from_counts(rows: Vec<GestureLabel>, cols: Vec<GestureLabel>, counts: Vec<Vec<u64>>) -> Option<Self> {
        let shaped = counts.len() == rows.len() && counts.iter().all(|r| r.len() == cols.len());
        let ordered = rows.windows(2).all(|w| w[0] < w[1]) && cols.windows(2).all(|w| w[0] < w[1]);
        (shaped && ordered).then_some(Self { rows, cols, counts })
    }

    pub fn rows(&self) -> &[GestureLabel] {
        &self.rows
    }

    pub fn cols(&self) -> &[GestureLabel] {
        &self.cols
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn record(&mut self, truth: GestureLabel, predicted: GestureLabel) -> Result<(), MatrixError> {
        let r = self.rows.binary_search(&truth).map_err(|_| MatrixError::UnknownRow(truth))?;
        let c = self
            .cols
            .binary_search(&predicted)
            .map_err(|_| MatrixError::UnknownColumn(predicted))?;
        self.counts[r][c] += 1;
        Ok(())
    }

    pub fn count(&self, truth: GestureLabel, predicted: GestureLabel) -> u64 {
        match (self.rows.binary_search(&truth), self.cols.binary_search(&predicted)) {
            (Ok(r), Ok(c)) => self.counts[r][c],
            _ => 0,
        }
    }

    pub fn row_total(&self, truth: GestureLabel) -> u64 {
        self.rows
            .binary_search(&truth)
            .map_or(0, |r| self.counts[r].iter().sum())
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        self.rows.iter().map(|&g| self.count(g, g)).sum()
    }

    /// Trace over total; zero for an empty matrix.
    pub fn accuracy(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            0.0
        } else {
            self.correct() as f64 / total as f64
        }
    }

    pub fn recall(&self, g: GestureLabel) -> Option<f64> {
        let n = self.row_total(g);
        (n > 0).then(|| self.count(g, g) as f64 / n as f64)
    }

    /// Row-normalized percentages; rows without samples are all zero.
    pub fn percentages(&self) -> Vec<Vec<f64>> {
        self.counts
            .iter()
            .map(|row| {
                let n: u64 = row.iter().sum();
                row.iter()
                    .map(|&c| if n == 0 { 0.0 } else { 100.0 * c as f64 / n as f64 })
                    .collect()
            })
            .collect()
    }
}

/// Matrix over the labels that occur: truth labels as rows, and as columns
/// the rows plus every predicted label plus NONE.
pub fn confusion_matrix(truth: &[GestureLabel], predicted: &[GestureLabel]) -> Result<ConfusionMatrix, MatrixError> {
    if truth.len() != predicted.len() {
        return Err(MatrixError::LengthMismatch {
            truth: truth.len(),
            predicted: predicted.len(),
        });
    }
    if truth.is_empty() {
        return Err(MatrixError::Empty);
    }
    let cols: Vec<_> = truth.iter().chain(predicted).copied().collect();
    let mut m = ConfusionMatrix::new(truth, &cols);
    for (&t, &p) in truth.iter().zip(predicted) {
        m.record(t, p)?;
    }
    Ok(m)
}
