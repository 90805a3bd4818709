use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::format::{parse_policy, write_policy};

pub const N_FEATURES: usize = 13;
pub const HIDDEN: usize = 4;
pub const ARCHITECTURE: [usize; 4] = [N_FEATURES, HIDDEN, HIDDEN, 1];
pub const N_PARAMS: usize = N_FEATURES * HIDDEN + HIDDEN + HIDDEN * HIDDEN + HIDDEN + HIDDEN + 1;

/// 13-4-4-1 feed-forward utility network with ReLU hidden layers.
///
/// Flat layout: W1 (4x13, row-major), b1, W2 (4x4), b2, W3 (1x4), b3.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyNet {
    weights: Vec<f64>,
}

impl PolicyNet {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.len() != N_PARAMS {
            return Err(Error::Parameter(format!("policy needs {N_PARAMS} weights, got {}", weights.len())));
        }
        if let Some(i) = weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::Numeric(format!("policy weight {i} is not finite")));
        }
        Ok(Self { weights })
    }

    pub fn zeros() -> Self {
        Self { weights: vec![0.0; N_PARAMS] }
    }

    /// Weights drawn i.i.d. from N(0, sigma^2).
    pub fn random(seed: u64, sigma: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, sigma).expect("sigma must be finite and non-negative");
        Self { weights: (0..N_PARAMS).map(|_| normal.sample(&mut rng)).collect() }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn forward(&self, x: &[f64; N_FEATURES]) -> f64 {
        let w = &self.weights;
        let (w1, rest) = w.split_at(N_FEATURES * HIDDEN);
        let (b1, rest) = rest.split_at(HIDDEN);
        let (w2, rest) = rest.split_at(HIDDEN * HIDDEN);
        let (b2, rest) = rest.split_at(HIDDEN);
        let (w3, b3) = rest.split_at(HIDDEN);
        let mut h1 = [0.0; HIDDEN];
        for (i, h) in h1.iter_mut().enumerate() {
            let row = &w1[i * N_FEATURES..(i + 1) * N_FEATURES];
            let z: f64 = b1[i] + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
            *h = z.max(0.0);
        }
        let mut h2 = [0.0; HIDDEN];
        for (i, h) in h2.iter_mut().enumerate() {
            let row = &w2[i * HIDDEN..(i + 1) * HIDDEN];
            let z: f64 = b2[i] + row.iter().zip(&h1).map(|(a, b)| a * b).sum::<f64>();
            *h = z.max(0.0);
        }
        b3[0] + w3.iter().zip(&h2).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn to_document(&self, fitness: Option<f64>) -> String {
        write_policy(&ARCHITECTURE, &self.weights, fitness)
    }

    pub fn from_document(text: &str) -> Result<Self> {
        let doc = parse_policy(text)?;
        if doc.architecture != ARCHITECTURE {
            return Err(Error::Parameter(format!(
                "policy architecture {:?} is not {:?}",
                doc.architecture, ARCHITECTURE
            )));
        }
        Self::new(doc.weights)
    }
}
