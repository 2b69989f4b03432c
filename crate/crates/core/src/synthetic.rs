//! Deterministic synthetic tensors.
//!
//! [`smooth_sparse`] mimics post-ReLU feature maps: every sample has a
//! spatially smooth activity field, clipped at a global threshold, and each
//! channel scales it by its own smooth, strictly positive gain; the result
//! is cubed so most non-zero values are small. Non-zero values are
//! spatially correlated, and the zero pattern is shared by all channels of a
//! sample but independent between samples.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::tensor::{Layout, TensorRecord};

#[derive(Debug, Clone, Copy)]
pub struct SmoothSparse {
    /// N, C, H, W
    pub dims: [usize; 4],
    pub m: u32,
    /// Target fraction of zero words.
    pub sparsity: f64,
    pub seed: u64,
}

impl Default for SmoothSparse {
    fn default() -> Self {
        Self {
            dims: [1, 16, 32, 32],
            m: 16,
            sparsity: 0.6,
            seed: 0,
        }
    }
}

/// Sum of a few low-frequency plane waves over an `h x w` grid.
struct SmoothField {
    waves: Vec<(f64, f64, f64, f64)>,
}

impl SmoothField {
    fn random(rng: &mut impl Rng) -> Self {
        let waves = (0..3)
            .map(|_| {
                (
                    rng.gen_range(0.0..0.5),
                    rng.gen_range(0.0..0.5),
                    rng.gen_range(0.0..TAU),
                    rng.gen_range(0.3..1.0),
                )
            })
            .collect();
        Self { waves }
    }

    fn amplitude(&self) -> f64 {
        self.waves.iter().map(|w| w.3).sum()
    }

    fn at(&self, y: f64, x: f64) -> f64 {
        self.waves
            .iter()
            .map(|&(fy, fx, phase, amp)| amp * (TAU * (fy * y + fx * x) + phase).cos())
            .sum()
    }
}

pub fn smooth_sparse(cfg: SmoothSparse) -> TensorRecord {
    let [dn, dc, dh, dw] = cfg.dims;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut activity = Vec::with_capacity(dn * dh * dw);
    let mut gains = Vec::with_capacity(dn * dc);
    for _ in 0..dn {
        let shared = SmoothField::random(&mut rng);
        for h in 0..dh {
            for w in 0..dw {
                activity.push(shared.at(h as f64 / dh as f64, w as f64 / dw as f64));
            }
        }
        gains.extend((0..dc).map(|_| SmoothField::random(&mut rng)));
    }

    let threshold = if activity.is_empty() || cfg.sparsity >= 1.0 {
        f64::INFINITY
    } else {
        let mut sorted = activity.clone();
        sorted.sort_by(f64::total_cmp);
        let at = (sorted.len() as f64 * cfg.sparsity.max(0.0)) as usize;
        sorted[at.min(sorted.len() - 1)]
    };
    let mut clipped = Vec::with_capacity(dn * dc * dh * dw);
    for n in 0..dn {
        for c in 0..dc {
            let gain = &gains[n * dc + c];
            for h in 0..dh {
                for w in 0..dw {
                    let a = activity[(n * dh + h) * dw + w] - threshold;
                    let (y, x) = (h as f64 / dh as f64, w as f64 / dw as f64);
                    // gain stays within (0.2, 2.2)
                    let g = 1.2 + gain.at(y, x) / gain.amplitude();
                    clipped.push(if a > 0.0 { (a * g).powi(3) } else { 0.0 });
                }
            }
        }
    }
    let peak = clipped.iter().copied().fold(0.0, f64::max);
    let full = ((1u64 << cfg.m) - 1) as f64;
    let data = clipped
        .iter()
        .map(|&v| {
            if v > 0.0 {
                (v / peak * full).ceil() as u32
            } else {
                0
            }
        })
        .collect();
    TensorRecord::new(cfg.dims, Layout::Nchw, cfg.m, data).expect("generated tensor is well formed")
}

/// `len` independent words: zero with probability `sparsity`, otherwise
/// uniform in `1..2^m`, or small values when `small` is set.
pub fn random_sparse(
    rng: &mut impl Rng,
    len: usize,
    m: u32,
    sparsity: f64,
    small: bool,
) -> Vec<u32> {
    let max = ((1u64 << m) - 1) as u32;
    let hi = if small { max.min(31) } else { max };
    (0..len)
        .map(|_| {
            if rng.gen_bool(sparsity.clamp(0.0, 1.0)) {
                0
            } else {
                rng.gen_range(1..=hi)
            }
        })
        .collect()
}

/// A tensor with every word non-zero and no spatial structure.
pub fn dense_random(dims: [usize; 4], m: u32, seed: u64) -> TensorRecord {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = dims.iter().product();
    TensorRecord::new(
        dims,
        Layout::Nchw,
        m,
        random_sparse(&mut rng, len, m, 0.0, false),
    )
    .expect("generated tensor is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_in_range() {
        let cfg = SmoothSparse {
            dims: [2, 4, 8, 8],
            m: 8,
            sparsity: 0.5,
            seed: 3,
        };
        let a = smooth_sparse(cfg);
        assert_eq!(a, smooth_sparse(cfg));
        assert_eq!(a.data.iter().max(), Some(&255));
        let zeros = a.data.iter().filter(|&&v| v == 0).count() as f64 / a.len() as f64;
        assert!((0.45..0.6).contains(&zeros), "{zeros}");
    }

    #[test]
    fn extremes() {
        let all_zero = smooth_sparse(SmoothSparse {
            sparsity: 1.0,
            ..SmoothSparse::default()
        });
        assert!(all_zero.data.iter().all(|&v| v == 0));
        let dense = dense_random([1, 2, 3, 4], 16, 0);
        assert!(dense.data.iter().all(|&v| v != 0));
    }
}
