//! Exhaustive decision-stump search over weighted samples.

use super::TrainError;

/// Threshold placed below every observed value of a feature.
pub const BELOW_MIN_OFFSET: f64 = 1.0;

/// Sweep errors within this distance of the sweep minimum are re-scored by
/// direct summation so ties resolve on exact values, not accumulated ones.
const NEAR_TIE: f64 = 1e-10;

const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stump {
    pub feature_index: usize,
    pub threshold: f64,
    /// +1 or -1.
    pub polarity: i8,
    /// Ensemble weight; zero until the stump joins a model.
    pub alpha: f64,
}

impl Stump {
    /// +1 when `polarity * (x[f] - threshold) > 0`, else -1.
    #[inline]
    pub fn predict(&self, x: &[f64]) -> i8 {
        let d = x[self.feature_index] - self.threshold;
        if f64::from(self.polarity) * d > 0.0 {
            1
        } else {
            -1
        }
    }
}

/// Pre-sorted view of a sample matrix, reusable across boosting rounds and
/// across the one-vs-rest models that share the same samples.
pub struct StumpSearch<'a, S> {
    samples: &'a [S],
    features: usize,
    /// Per feature: sample indices in ascending value order.
    order: Vec<Vec<u32>>,
    /// Per feature: the values in that same order.
    sorted: Vec<Vec<f64>>,
}

impl<'a, S: AsRef<[f64]> + Sync> StumpSearch<'a, S> {
    pub fn new(samples: &'a [S]) -> Result<Self, TrainError> {
        let first = samples.first().ok_or(TrainError::Empty)?;
        let features = first.as_ref().len();
        if features == 0 {
            return Err(TrainError::Empty);
        }
        if samples.iter().any(|s| s.as_ref().len() != features) {
            return Err(TrainError::LengthMismatch);
        }
        if samples
            .iter()
            .any(|s| s.as_ref().iter().any(|v| !v.is_finite()))
        {
            return Err(TrainError::NonFinite);
        }
        let value = |i: u32, f: usize| samples[i as usize].as_ref()[f];
        let order: Vec<Vec<u32>> = (0..features)
            .map(|f| {
                let mut idx: Vec<u32> = (0..samples.len() as u32).collect();
                idx.sort_by(|&a, &b| value(a, f).total_cmp(&value(b, f)).then(a.cmp(&b)));
                idx
            })
            .collect();
        let sorted = order
            .iter()
            .enumerate()
            .map(|(f, idx)| idx.iter().map(|&i| value(i, f)).collect())
            .collect();
        Ok(Self {
            samples,
            features,
            order,
            sorted,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Calls `visit(feature, threshold, err_pos, err_neg)` for every
    /// candidate, in tie-break order, with sweep-accumulated errors.
    fn sweep(&self, labels: &[i8], weights: &[f64], mut visit: impl FnMut(usize, f64, f64, f64)) {
        // Weight carried by each sample, split by class.
        let split: Vec<(f64, f64)> = labels
            .iter()
            .zip(weights)
            .map(|(&y, &w)| if y > 0 { (w, 0.0) } else { (0.0, w) })
            .collect();
        let (w_pos, w_neg) = split
            .iter()
            .fold((0.0, 0.0), |(p, n), &(a, b)| (p + a, n + b));
        for f in 0..self.features {
            let order = &self.order[f];
            let values = &self.sorted[f];
            // Nothing at or below the threshold: p=+1 predicts +1 everywhere.
            visit(f, values[0] - BELOW_MIN_OFFSET, w_neg, w_pos);
            let (mut l_pos, mut l_neg) = (0.0, 0.0);
            let n = values.len();
            let mut k = 0;
            while k < n {
                let v = values[k];
                while k < n && values[k] == v {
                    let (a, b) = split[order[k] as usize];
                    l_pos += a;
                    l_neg += b;
                    k += 1;
                }
                if k == n {
                    break;
                }
                let threshold = 0.5 * (v + values[k]);
                visit(f, threshold, l_pos + (w_neg - l_neg), l_neg + (w_pos - l_pos));
            }
        }
    }

    /// Weighted error of one stump, summed in sample order.
    pub fn direct_error(&self, stump: &Stump, labels: &[i8], weights: &[f64]) -> f64 {
        let mut err = 0.0;
        for (i, s) in self.samples.iter().enumerate() {
            if stump.predict(s.as_ref()) != labels[i] {
                err += weights[i];
            }
        }
        err
    }

    /// Minimum-error stump. Ties go to the lowest feature index, then the
    /// lowest threshold, then polarity +1.
    pub fn best(&self, labels: &[i8], weights: &[f64]) -> (Stump, f64) {
        let mut floor = f64::INFINITY;
        let mut near: Vec<(Stump, f64)> = Vec::new();
        self.sweep(labels, weights, |f, threshold, ep, en| {
            for (polarity, approx) in [(1i8, ep), (-1i8, en)] {
                if approx > floor + NEAR_TIE {
                    continue;
                }
                if approx < floor {
                    floor = approx;
                    near.retain(|(_, a)| *a <= floor + NEAR_TIE);
                }
                let stump = Stump {
                    feature_index: f,
                    threshold,
                    polarity,
                    alpha: 0.0,
                };
                near.push((stump, approx));
            }
        });
        // `near` is in tie-break order; strict `<` keeps the earliest on ties.
        let mut best: Option<(Stump, f64)> = None;
        for (stump, _) in near {
            let err = self.direct_error(&stump, labels, weights);
            if best.as_ref().map_or(true, |(_, e)| err < *e) {
                best = Some((stump, err));
            }
        }
        best.expect("at least one candidate per feature")
    }
}

pub(crate) fn check_inputs(n: usize, labels: &[i8], weights: &[f64]) -> Result<(), TrainError> {
    if n == 0 {
        return Err(TrainError::Empty);
    }
    if labels.len() != n || weights.len() != n {
        return Err(TrainError::LengthMismatch);
    }
    if labels.iter().any(|&y| y != 1 && y != -1) {
        return Err(TrainError::BadLabel);
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(TrainError::BadWeight);
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
        return Err(TrainError::Unnormalized(sum));
    }
    Ok(())
}

/// Best single stump for `(samples, labels, weights)` and its weighted error.
/// The returned stump has `alpha == 0`.
pub fn train_stump<S: AsRef<[f64]> + Sync>(
    samples: &[S],
    labels: &[i8],
    weights: &[f64],
) -> Result<(Stump, f64), TrainError> {
    check_inputs(samples.len(), labels, weights)?;
    let search = StumpSearch::new(samples)?;
    Ok(search.best(labels, weights))
}
