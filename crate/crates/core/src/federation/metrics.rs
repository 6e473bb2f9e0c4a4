use serde::{Deserialize, Serialize};

use crate::dqnn::{forward, loss, predict, ModelRuntime, QnnModel};
use crate::error::{Error, Result};
use crate::harness::Dataset;
use crate::par;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub loss: f64,
    pub accuracy: f64,
    pub macro_f1: f64,
}

/// Accuracy and macro-averaged F1. A class with no true or predicted
/// positives scores F1 = 0.
pub fn classification_metrics(
    predictions: &[usize],
    labels: &[usize],
    n_classes: usize,
) -> (f64, f64) {
    let n = labels.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mut tp = vec![0usize; n_classes];
    let mut fp = vec![0usize; n_classes];
    let mut fneg = vec![0usize; n_classes];
    for (&p, &l) in predictions.iter().zip(labels) {
        if p == l {
            tp[l] += 1;
        } else {
            fp[p] += 1;
            fneg[l] += 1;
        }
    }
    let accuracy = tp.iter().sum::<usize>() as f64 / n as f64;
    let f1: f64 = (0..n_classes)
        .map(|c| {
            let denom = 2 * tp[c] + fp[c] + fneg[c];
            if tp[c] == 0 {
                0.0
            } else {
                2.0 * tp[c] as f64 / denom as f64
            }
        })
        .sum::<f64>()
        / n_classes as f64;
    (accuracy, f1)
}

/// Mean loss, accuracy and macro F1 of `model` on `data`.
pub fn evaluate(model: &QnnModel, runtime: &ModelRuntime, data: &Dataset) -> Result<Metrics> {
    if data.is_empty() {
        return Err(Error::InvalidParameter("empty evaluation set".into()));
    }
    let outputs = par::map_range(data.len(), |i| -> Result<(f64, usize)> {
        let f = forward(model, runtime, &data.features[i])?;
        Ok((loss(&f.logits, data.labels[i])?, predict(&f.logits)))
    });
    let mut total = 0.0;
    let mut preds = Vec::with_capacity(data.len());
    for o in outputs {
        let (l, p) = o?;
        total += l;
        preds.push(p);
    }
    let (accuracy, macro_f1) = classification_metrics(&preds, &data.labels, data.n_classes);
    Ok(Metrics {
        loss: total / data.len() as f64,
        accuracy,
        macro_f1,
    })
}
