//! Isotropic distribution families, moment certificates and tight frames.

mod frame;
mod model;
mod samplers;

pub use frame::{make_tight_frame, parseval_defect, second_moment, Frame};
pub use model::VectorModel;
pub use samplers::{
    builtin_registry, frame_of, isotropic_scale, FrameSpec, Sampler, SamplerKind,
    SamplerRegistry, SCALE_POINTS, SCALE_SEED,
};

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm2};
use crate::rng::rng_from_seed;

/// `big_n` independent draws from `model` using the built-in registry.
pub fn sample(model: &VectorModel, big_n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    sample_with(builtin_registry(), model, big_n, seed)
}

pub fn sample_with(
    registry: &SamplerRegistry,
    model: &VectorModel,
    big_n: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    if big_n == 0 {
        return Err(Error::contract("sample count must be at least 1"));
    }
    let sampler = registry.prepare(model)?;
    Ok(draw_many(sampler.as_ref(), big_n, seed))
}

pub fn draw_many(sampler: &dyn Sampler, big_n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng_from_seed(seed);
    (0..big_n)
        .map(|_| {
            let mut v = vec![0.0; sampler.dim()];
            sampler.draw(&mut rng, &mut v);
            v
        })
        .collect()
}

/// Empirical moment parameters of a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentCertificate {
    /// `max ‖X‖₂ / √n` over the draws.
    #[serde(rename = "K_hat")]
    pub k_hat: f64,
    /// `max_x (mean |<X, x>|^q)^{1/q}` over the probe directions; a lower
    /// estimate of the supremum over the sphere.
    #[serde(rename = "L_hat")]
    pub l_hat: f64,
    pub q: f64,
    pub n_samples: usize,
    pub n_directions: usize,
    pub seed: u64,
    /// Samples were radially projected, which perturbs the moments slightly.
    pub truncated: bool,
}

pub fn certify_moments(
    model: &VectorModel,
    q: f64,
    n_samples: usize,
    n_directions: usize,
    seed: u64,
) -> Result<MomentCertificate> {
    if !(q > 2.0) {
        return Err(Error::contract(format!("q must exceed 2, got {q}")));
    }
    if n_samples == 0 || n_directions == 0 {
        return Err(Error::contract("need at least one sample and one direction"));
    }
    let sampler = builtin_registry().prepare(model)?;
    let xs = draw_many(sampler.as_ref(), n_samples, seed);
    let sqrt_n = (model.n as f64).sqrt();
    let k_hat = xs.iter().map(|x| norm2(x) / sqrt_n).fold(0.0, f64::max);
    let mut rng = rng_from_seed(crate::rng::splitmix64(seed));
    let mut l_hat: f64 = 0.0;
    for _ in 0..n_directions {
        let dir = random_unit(&mut rng, model.n);
        let m = xs.iter().map(|x| dot(x, &dir).abs().powf(q)).sum::<f64>() / n_samples as f64;
        l_hat = l_hat.max(m.powf(1.0 / q));
    }
    Ok(MomentCertificate {
        k_hat,
        l_hat,
        q,
        n_samples,
        n_directions,
        seed,
        truncated: sampler.truncated(),
    })
}

/// Uniform random point of the unit sphere in `R^n`.
pub fn random_unit(rng: &mut crate::rng::SimRng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let r = norm2(&v);
        if r > 1e-300 {
            return v.into_iter().map(|x| x / r).collect();
        }
    }
}
