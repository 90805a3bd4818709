//! (mu/mu_w, lambda)-CMA-ES maximizing a black-box fitness.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CmaesConfig {
    pub population: usize,
    pub sigma0: f64,
    pub max_generations: usize,
    /// Stop when the best-ever fitness improved by less than
    /// `stagnation_tolerance` percent over this many generations.
    pub stagnation_generations: usize,
    pub stagnation_tolerance: f64,
    pub seed: u64,
}

impl CmaesConfig {
    /// Population size 4 + floor(3 ln n).
    pub fn default_population(dim: usize) -> usize {
        4 + (3.0 * (dim as f64).ln()).floor() as usize
    }

    pub fn for_dim(dim: usize, seed: u64) -> Self {
        Self {
            population: Self::default_population(dim),
            sigma0: 0.3,
            max_generations: 120,
            stagnation_generations: 20,
            stagnation_tolerance: 0.01,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
    pub best_ever: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CmaesResult {
    pub best: Vec<f64>,
    pub best_fitness: f64,
    pub generations: usize,
    pub history: Vec<GenerationRecord>,
}

pub fn maximize<F>(dim: usize, mean0: &[f64], config: &CmaesConfig, fitness: F) -> Result<CmaesResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if config.population < 2 || dim == 0 || mean0.len() != dim {
        return Err(Error::Parameter("CMA-ES needs population >= 2 and a mean of the right size".into()));
    }
    if !(config.sigma0 > 0.0) || config.max_generations == 0 {
        return Err(Error::Parameter("CMA-ES needs sigma0 > 0 and at least one generation".into()));
    }
    let n = dim as f64;
    let lambda = config.population;
    let mu = lambda / 2;
    let raw: Vec<f64> = (1..=mu).map(|i| ((mu as f64) + 0.5).ln() - (i as f64).ln()).collect();
    let sum: f64 = raw.iter().sum();
    let w: Vec<f64> = raw.iter().map(|x| x / sum).collect();
    let mu_eff = 1.0 / w.iter().map(|x| x * x).sum::<f64>();

    let c_sigma = (mu_eff + 2.0) / (n + mu_eff + 5.0);
    let d_sigma = 1.0 + 2.0 * (((mu_eff - 1.0) / (n + 1.0)).sqrt() - 1.0).max(0.0) + c_sigma;
    let c_c = (4.0 + mu_eff / n) / (n + 4.0 + 2.0 * mu_eff / n);
    let c_1 = 2.0 / ((n + 1.3).powi(2) + mu_eff);
    let c_mu = (1.0 - c_1).min(2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((n + 2.0).powi(2) + mu_eff));
    let chi_n = n.sqrt() * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut mean = DVector::from_column_slice(mean0);
    let mut sigma = config.sigma0;
    let mut cov = DMatrix::<f64>::identity(dim, dim);
    let mut b = DMatrix::<f64>::identity(dim, dim);
    let mut d = DVector::<f64>::from_element(dim, 1.0);
    let mut p_sigma = DVector::<f64>::zeros(dim);
    let mut p_c = DVector::<f64>::zeros(dim);

    let mut best: Vec<f64> = mean0.to_vec();
    let mut best_fitness = f64::NEG_INFINITY;
    let mut history: Vec<GenerationRecord> = Vec::new();

    for g in 0..config.max_generations {
        let zs: Vec<DVector<f64>> = (0..lambda)
            .map(|_| DVector::from_fn(dim, |_, _| StandardNormal.sample(&mut rng)))
            .collect();
        let ys: Vec<DVector<f64>> = zs.iter().map(|z| &b * d.component_mul(z)).collect();
        let xs: Vec<Vec<f64>> = ys.iter().map(|y| (&mean + y * sigma).as_slice().to_vec()).collect();
        let fit: Vec<f64> = xs.par_iter().map(|x| fitness(x)).collect();

        let mut order: Vec<usize> = (0..lambda).collect();
        order.sort_by(|&i, &j| fit[j].total_cmp(&fit[i]).then(i.cmp(&j)));
        if fit[order[0]] > best_fitness {
            best_fitness = fit[order[0]];
            best.clone_from(&xs[order[0]]);
        }
        let finite: Vec<f64> = fit.iter().copied().filter(|f| f.is_finite()).collect();
        history.push(GenerationRecord {
            generation: g,
            best: fit[order[0]],
            mean: if finite.is_empty() { f64::NEG_INFINITY } else { finite.iter().sum::<f64>() / finite.len() as f64 },
            best_ever: best_fitness,
            sigma,
        });
        log::debug!("cmaes gen={g} best={:.4} best_ever={best_fitness:.4} sigma={sigma:.4}", fit[order[0]]);

        let stalled = g >= config.stagnation_generations && {
            let old = history[g - config.stagnation_generations].best_ever;
            old.is_finite() && 100.0 * (best_fitness - old) / old.abs().max(1e-12) < config.stagnation_tolerance
        };
        if stalled || g + 1 == config.max_generations {
            break;
        }

        let mut y_w = DVector::<f64>::zeros(dim);
        for (i, &idx) in order.iter().take(mu).enumerate() {
            y_w += &ys[idx] * w[i];
        }
        mean += &y_w * sigma;

        // C^{-1/2} y_w = B D^{-1} B^T y_w
        let inv_sqrt_y = &b * (b.transpose() * &y_w).component_div(&d);
        p_sigma = &p_sigma * (1.0 - c_sigma) + inv_sqrt_y * (c_sigma * (2.0 - c_sigma) * mu_eff).sqrt();
        let ps_norm = p_sigma.norm();
        let h_sigma = ps_norm / (1.0 - (1.0 - c_sigma).powi(2 * (g as i32 + 1))).sqrt() < (1.4 + 2.0 / (n + 1.0)) * chi_n;
        let h = if h_sigma { 1.0 } else { 0.0 };
        p_c = &p_c * (1.0 - c_c) + &y_w * (h * (c_c * (2.0 - c_c) * mu_eff).sqrt());

        let mut rank_mu = DMatrix::<f64>::zeros(dim, dim);
        for (i, &idx) in order.iter().take(mu).enumerate() {
            rank_mu += &ys[idx] * ys[idx].transpose() * w[i];
        }
        let old_factor = 1.0 - c_1 - c_mu + (1.0 - h) * c_1 * c_c * (2.0 - c_c);
        cov = &cov * old_factor + (&p_c * p_c.transpose()) * c_1 + rank_mu * c_mu;
        sigma *= ((c_sigma / d_sigma) * (ps_norm / chi_n - 1.0)).exp();

        let sym = (&cov + cov.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym.clone());
        cov = sym;
        b = eig.eigenvectors;
        d = eig.eigenvalues.map(|v| v.max(1e-20).sqrt());
        if !sigma.is_finite() || d.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("CMA-ES state diverged".into()));
        }
    }
    Ok(CmaesResult { best, best_fitness, generations: history.len(), history })
}
