use std::f64::consts::PI;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;

use crate::error::{Error, Result};

/// Two interleaved half circles in the plane, `⌊n/2⌋` points on the upper
/// unit arc and the rest on the lower arc shifted to `(1, 0.5)`, plus
/// isotropic Gaussian noise of standard deviation `noise`.
pub fn gen_two_half_moons(n: usize, noise: f64, seed: u64) -> Result<Array2<f64>> {
    Ok(gen_two_half_moons_labeled(n, noise, seed)?.0)
}

/// Same as [`gen_two_half_moons`] together with the arc of every point.
pub fn gen_two_half_moons_labeled(n: usize, noise: f64, seed: u64) -> Result<(Array2<f64>, Vec<usize>)> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need n >= 2 points, got {n}")));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::InvalidParameter(format!("noise must be >= 0, got {noise}")));
    }
    let n_out = n / 2;
    let n_in = n - n_out;
    let angle = |k: usize, count: usize| {
        if count > 1 {
            PI * k as f64 / (count - 1) as f64
        } else {
            0.0
        }
    };
    let mut a = Array2::zeros((2, n));
    let mut labels = Vec::with_capacity(n);
    for k in 0..n_out {
        let t = angle(k, n_out);
        a[[0, k]] = t.cos();
        a[[1, k]] = t.sin();
        labels.push(0);
    }
    for k in 0..n_in {
        let t = angle(k, n_in);
        a[[0, n_out + k]] = 1.0 - t.cos();
        a[[1, n_out + k]] = 1.0 - t.sin() - 0.5;
        labels.push(1);
    }
    if noise > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dist = Normal::new(0.0, noise).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        for v in a.iter_mut() {
            *v += rng.sample(dist);
        }
    }
    Ok((a, labels))
}
