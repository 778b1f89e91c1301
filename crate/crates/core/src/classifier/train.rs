//! Pegasos-style hinge-loss subgradient trainer.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Label, LabeledSample, SvmModel};
use crate::descriptor::DESCRIPTOR_LEN;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrainError {
    #[error("training needs samples of both classes (person: {person}, non-person: {non_person})")]
    SingleClass { person: usize, non_person: usize },
    #[error("sample {0} has a non-finite feature")]
    NonFinite(usize),
    #[error("lambda must be positive and finite, got {0}")]
    InvalidLambda(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainParams {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainParams {
    fn default() -> Self {
        Self {
            lambda: 0.01,
            epochs: 100,
            seed: 0,
        }
    }
}

/// `lambda/2 |W|^2 + mean(max(0, 1 - y (W . X + b)))` with `y` in {-1, +1}.
pub fn objective(model: &SvmModel, samples: &[LabeledSample], lambda: f64) -> f64 {
    let w: Vec<f64> = model.weights().iter().map(|&v| f64::from(v)).collect();
    let b = f64::from(model.bias());
    let reg = 0.5 * lambda * w.iter().map(|v| v * v).sum::<f64>();
    let hinge = samples
        .iter()
        .map(|s| (1.0 - s.label.sign() * (dot(&w, s.descriptor.features()) + b)).max(0.0))
        .sum::<f64>();
    reg + hinge / samples.len().max(1) as f64
}

fn dot(w: &[f64], x: &[f32]) -> f64 {
    w.iter().zip(x).map(|(&a, &b)| a * f64::from(b)).sum()
}

/// Trains `(W, b)` by stochastic subgradient descent on the regularized hinge
/// loss. Step `t` uses rate `1/(lambda t)`; the bias is an unregularized extra
/// coordinate; `W` is projected onto the ball of radius `1/sqrt(lambda)`.
/// Sample order is reshuffled each epoch from a ChaCha8 stream seeded with
/// `params.seed`, so identical inputs give a bit-identical model.
pub fn train(samples: &[LabeledSample], params: &TrainParams) -> Result<SvmModel, TrainError> {
    let lambda = params.lambda;
    if lambda.is_nan() || lambda <= 0.0 || lambda.is_infinite() {
        return Err(TrainError::InvalidLambda(lambda));
    }
    let person = samples.iter().filter(|s| s.label == Label::Person).count();
    let non_person = samples.len() - person;
    if person == 0 || non_person == 0 {
        return Err(TrainError::SingleClass { person, non_person });
    }
    if let Some(i) = samples
        .iter()
        .position(|s| s.descriptor.features().iter().any(|v| !v.is_finite()))
    {
        return Err(TrainError::NonFinite(i));
    }

    let radius_sq = 1.0 / lambda;
    // W is stored as scale * v so the shrink step is O(1)
    let mut v = vec![0.0f64; DESCRIPTOR_LEN];
    let mut scale = 1.0f64;
    let mut norm_sq = 0.0f64;
    let mut bias = 0.0f64;

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut t = 0u64;
    for _ in 0..params.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let sample = &samples[i];
            let x = sample.descriptor.features();
            let y = sample.label.sign();
            let eta = 1.0 / (lambda * t as f64);
            let margin = y * (scale * dot(&v, x) + bias);

            let shrink = 1.0 - eta * lambda;
            if shrink == 0.0 {
                v.iter_mut().for_each(|c| *c = 0.0);
                scale = 1.0;
                norm_sq = 0.0;
            } else {
                scale *= shrink;
                norm_sq *= shrink * shrink;
            }

            if margin < 1.0 {
                let step = eta * y / scale;
                let mut cross = 0.0;
                let mut x_sq = 0.0;
                for (c, &xi) in v.iter_mut().zip(x) {
                    let xi = f64::from(xi);
                    cross += *c * xi;
                    x_sq += xi * xi;
                    *c += step * xi;
                }
                // |s(v + step x)|^2 = |sv|^2 + 2 s^2 step (v.x) + s^2 step^2 |x|^2
                norm_sq += scale * scale * (2.0 * step * cross + step * step * x_sq);
                bias += eta * y;
            }

            if norm_sq > radius_sq {
                scale *= (radius_sq / norm_sq).sqrt();
                norm_sq = radius_sq;
            }
        }
        // fold the scale back in to keep it away from underflow
        v.iter_mut().for_each(|c| *c *= scale);
        scale = 1.0;
        norm_sq = v.iter().map(|c| c * c).sum();
    }

    let weights = v.iter().map(|&c| (scale * c) as f32).collect();
    Ok(SvmModel::new(weights, bias as f32).expect("trainer produces finite weights of descriptor length"))
}
