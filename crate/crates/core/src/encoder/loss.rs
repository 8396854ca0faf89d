//! Contrastive losses with analytic gradients.
//!
//! The base loss is multiple-negatives ranking: for anchor i, every in-batch
//! positive j != i acts as a negative, optionally extended by explicit
//! hard-negative columns. Per row the loss is softmax cross-entropy over
//! scaled cosines:
//!
//! ```text
//! loss = -(1/B) * sum_i log( exp(s*cos(a_i, p_i)) / sum_c exp(s*cos(a_i, c)) )
//! ```
//!
//! where c ranges over all positives plus all hard negatives.
//!
//! The meta-loss sums the base loss over renormalized prefix truncations of
//! the inputs so leading sub-vectors are trained to stand alone:
//!
//! ```text
//! total = sum_d w_d * mnr(renormalize(prefix_d(.)))
//! ```
//!
//! Gradients are taken with respect to the raw input vectors through the
//! full cosine (including the norm terms) and through prefix
//! renormalization, so they agree with finite differences of unconstrained
//! perturbations. All computation is f64 with fixed ascending summation
//! order, making results bit-reproducible.

use super::{EncoderConfig, EncoderError};

/// Inputs may drift off unit norm by this much before being rejected.
/// The slack admits finite-difference probes of the loss surface.
const NORM_TOL: f64 = 1e-3;

/// Loss value plus gradients w.r.t. every input vector.
#[derive(Debug, Clone)]
pub struct LossOutput {
    pub loss: f64,
    pub grad_anchors: Vec<Vec<f64>>,
    pub grad_positives: Vec<Vec<f64>>,
    pub grad_negatives: Option<Vec<Vec<f64>>>,
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn validate_batch(name: &str, batch: &[Vec<f64>], dim: usize) -> Result<Vec<f64>, EncoderError> {
    let mut norms = Vec::with_capacity(batch.len());
    for v in batch {
        if v.len() != dim {
            return Err(EncoderError::ConfigInvalid(format!(
                "{name} vector has dimension {}, expected {dim}",
                v.len()
            )));
        }
        let norm = l2(v);
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(EncoderError::NormViolation(norm));
        }
        norms.push(norm);
    }
    Ok(norms)
}

/// Multiple-negatives ranking loss over a batch of unit vectors.
///
/// `hard_negatives`, when given, must match the batch size; each one adds a
/// scoring column shared by every anchor.
pub fn mnr_loss(
    anchors: &[Vec<f64>],
    positives: &[Vec<f64>],
    hard_negatives: Option<&[Vec<f64>]>,
    scale: f64,
) -> Result<LossOutput, EncoderError> {
    let b = anchors.len();
    if b == 0 {
        return Err(EncoderError::EmptyBatch);
    }
    if positives.len() != b {
        return Err(EncoderError::ConfigInvalid(format!(
            "anchor/positive batch sizes differ: {b} vs {}",
            positives.len()
        )));
    }
    if let Some(negs) = hard_negatives {
        if negs.len() != b {
            return Err(EncoderError::ConfigInvalid(format!(
                "anchor/negative batch sizes differ: {b} vs {}",
                negs.len()
            )));
        }
    }
    let dim = anchors[0].len();
    let anchor_norms = validate_batch("anchor", anchors, dim)?;
    let positive_norms = validate_batch("positive", positives, dim)?;
    let negative_norms = match hard_negatives {
        Some(negs) => Some(validate_batch("negative", negs, dim)?),
        None => None,
    };

    let n_cols = b + hard_negatives.map_or(0, |n| n.len());
    let column = |j: usize| -> (&[f64], f64) {
        if j < b {
            (positives[j].as_slice(), positive_norms[j])
        } else {
            let negs = hard_negatives.unwrap();
            (negs[j - b].as_slice(), negative_norms.as_ref().unwrap()[j - b])
        }
    };

    // cosines and scaled scores, row-major
    let mut cosines = vec![0.0f64; b * n_cols];
    for i in 0..b {
        for j in 0..n_cols {
            let (c, c_norm) = column(j);
            cosines[i * n_cols + j] = dot(&anchors[i], c) / (anchor_norms[i] * c_norm);
        }
    }

    let mut loss = 0.0f64;
    // softmax probabilities per row, reused for the gradient
    let mut probs = vec![0.0f64; b * n_cols];
    for i in 0..b {
        let row = &cosines[i * n_cols..(i + 1) * n_cols];
        let max = row
            .iter()
            .fold(f64::NEG_INFINITY, |acc, &c| acc.max(scale * c));
        let mut denom = 0.0f64;
        for j in 0..n_cols {
            let e = (scale * row[j] - max).exp();
            probs[i * n_cols + j] = e;
            denom += e;
        }
        let lse = max + denom.ln();
        loss += lse - scale * row[i];
        for j in 0..n_cols {
            probs[i * n_cols + j] /= denom;
        }
    }
    loss /= b as f64;

    let mut grad_anchors = vec![vec![0.0f64; dim]; b];
    let mut grad_positives = vec![vec![0.0f64; dim]; b];
    let mut grad_negatives = hard_negatives.map(|n| vec![vec![0.0f64; dim]; n.len()]);

    for i in 0..b {
        let a = &anchors[i];
        let a_norm = anchor_norms[i];
        for j in 0..n_cols {
            let mut coeff = probs[i * n_cols + j];
            if i == j {
                coeff -= 1.0;
            }
            // d(loss)/d(score_ij) * d(score)/d(cosine)
            let g = coeff * scale / b as f64;
            if g == 0.0 {
                continue;
            }
            let (c, c_norm) = column(j);
            let cos = cosines[i * n_cols + j];
            {
                let ga = &mut grad_anchors[i];
                for k in 0..dim {
                    ga[k] += g * (c[k] / (a_norm * c_norm) - cos * a[k] / (a_norm * a_norm));
                }
            }
            let gc = if j < b {
                &mut grad_positives[j]
            } else {
                &mut grad_negatives.as_mut().unwrap()[j - b]
            };
            for k in 0..dim {
                gc[k] += g * (a[k] / (a_norm * c_norm) - cos * c[k] / (c_norm * c_norm));
            }
        }
    }

    if !loss.is_finite() {
        return Err(EncoderError::NonFiniteLoss { epoch: 0, batch: 0 });
    }
    Ok(LossOutput {
        loss,
        grad_anchors,
        grad_positives,
        grad_negatives,
    })
}

/// Prefix-truncation meta-loss.
///
/// For each configured prefix length the inputs are truncated, renormalized,
/// and scored with [`mnr_loss`]; the weighted losses are summed and the
/// gradients are chained back onto the full vectors. A prefix equal to the
/// full dimension passes the (already unit-norm) inputs through unchanged,
/// so the single-term configuration reduces to the base loss exactly.
pub fn matryoshka_loss(
    anchors: &[Vec<f64>],
    positives: &[Vec<f64>],
    hard_negatives: Option<&[Vec<f64>]>,
    config: &EncoderConfig,
) -> Result<LossOutput, EncoderError> {
    if anchors.is_empty() {
        return Err(EncoderError::EmptyBatch);
    }
    let full_dim = anchors[0].len();
    for &d in &config.matryoshka_dims {
        if d > full_dim {
            return Err(EncoderError::DimExceedsVector {
                dim: d,
                vector_dim: full_dim,
            });
        }
        if d == 0 {
            return Err(EncoderError::ConfigInvalid("prefix dim 0".into()));
        }
    }

    let b = anchors.len();
    let n_negs = hard_negatives.map_or(0, |n| n.len());
    let mut total = LossOutput {
        loss: 0.0,
        grad_anchors: vec![vec![0.0f64; full_dim]; b],
        grad_positives: vec![vec![0.0f64; full_dim]; b],
        grad_negatives: hard_negatives.map(|_| vec![vec![0.0f64; full_dim]; n_negs]),
    };

    for (&d, &w) in config.matryoshka_dims.iter().zip(&config.matryoshka_weights) {
        if d == full_dim {
            let inner = mnr_loss(anchors, positives, hard_negatives, config.scale)?;
            total.loss += w * inner.loss;
            accumulate_passthrough(&mut total.grad_anchors, &inner.grad_anchors, w);
            accumulate_passthrough(&mut total.grad_positives, &inner.grad_positives, w);
            if let (Some(acc), Some(g)) =
                (total.grad_negatives.as_mut(), inner.grad_negatives.as_ref())
            {
                accumulate_passthrough(acc, g, w);
            }
            continue;
        }

        let (pa, norms_a) = prefix_renorm(anchors, d)?;
        let (pp, norms_p) = prefix_renorm(positives, d)?;
        let pn = match hard_negatives {
            Some(negs) => Some(prefix_renorm(negs, d)?),
            None => None,
        };
        let inner = mnr_loss(
            &pa,
            &pp,
            pn.as_ref().map(|(v, _)| v.as_slice()),
            config.scale,
        )?;
        total.loss += w * inner.loss;
        accumulate_chained(&mut total.grad_anchors, &inner.grad_anchors, &pa, &norms_a, w);
        accumulate_chained(&mut total.grad_positives, &inner.grad_positives, &pp, &norms_p, w);
        if let (Some(acc), Some(g), Some((pv, norms_n))) =
            (total.grad_negatives.as_mut(), inner.grad_negatives.as_ref(), pn.as_ref())
        {
            accumulate_chained(acc, g, pv, norms_n, w);
        }
    }
    Ok(total)
}

fn prefix_renorm(batch: &[Vec<f64>], d: usize) -> Result<(Vec<Vec<f64>>, Vec<f64>), EncoderError> {
    let mut out = Vec::with_capacity(batch.len());
    let mut norms = Vec::with_capacity(batch.len());
    for v in batch {
        let prefix = &v[..d];
        let norm = l2(prefix);
        if !norm.is_finite() || norm <= 0.0 {
            return Err(EncoderError::NormViolation(norm));
        }
        out.push(prefix.iter().map(|x| x / norm).collect());
        norms.push(norm);
    }
    Ok((out, norms))
}

fn accumulate_passthrough(acc: &mut [Vec<f64>], grads: &[Vec<f64>], w: f64) {
    for (a, g) in acc.iter_mut().zip(grads) {
        for (ak, gk) in a.iter_mut().zip(g) {
            *ak += w * gk;
        }
    }
}

/// Chain inner gradients through u = x / ||x||:
/// dL/dx = (1/||x||) * (g - (g . u) u), zero beyond the prefix.
fn accumulate_chained(
    acc: &mut [Vec<f64>],
    grads: &[Vec<f64>],
    units: &[Vec<f64>],
    norms: &[f64],
    w: f64,
) {
    for ((a, g), (u, &r)) in acc.iter_mut().zip(grads).zip(units.iter().zip(norms)) {
        let gu = dot(g, u);
        for k in 0..g.len() {
            a[k] += w * (g[k] - gu * u[k]) / r;
        }
    }
}
