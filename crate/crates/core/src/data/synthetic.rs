//! Seeded synthetic datasets for benchmarks and property tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{normalize_to_unit_ball, Dataset, Example, SparseVector};

fn unit_vector(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn gaussian_rows(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    let scale = 1.0 / (d as f64).sqrt();
    (0..n)
        .map(|_| {
            (0..d)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(rng);
                    scale * z
                })
                .collect()
        })
        .collect()
}

fn to_dataset(rows: Vec<Vec<f64>>, labels: Vec<f64>, d: usize) -> Dataset {
    let examples = rows
        .into_iter()
        .zip(labels)
        .map(|(row, y)| {
            let fv = SparseVector::new(row.into_iter().enumerate().collect())
                .expect("dense rows are increasing and finite");
            Example::new(fv, y)
        })
        .collect();
    let d = Dataset::with_min_dim(examples, d).expect("n >= 1");
    normalize_to_unit_ball(d).0
}

/// Dense Gaussian features labeled by the sign of a random unit-vector
/// separator, with each label flipped independently with probability
/// `flip_rate`. The result is globally scaled into the unit ball.
pub fn separator_with_flips(n: usize, d: usize, flip_rate: f64, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = unit_vector(&mut rng, d);
    let rows = gaussian_rows(&mut rng, n, d);
    let labels = rows
        .iter()
        .map(|x| {
            let margin: f64 = x.iter().zip(&w).map(|(a, b)| a * b).sum();
            let y = if margin >= 0.0 { 1.0 } else { -1.0 };
            if rng.random::<f64>() < flip_rate {
                -y
            } else {
                y
            }
        })
        .collect();
    to_dataset(rows, labels, d)
}

/// Dense Gaussian features with real-valued targets `<w, x> + noise`.
pub fn linear_regression(n: usize, d: usize, noise: f64, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = unit_vector(&mut rng, d);
    let rows = gaussian_rows(&mut rng, n, d);
    let labels = rows
        .iter()
        .map(|x| {
            let clean: f64 = x.iter().zip(&w).map(|(a, b)| a * b).sum();
            let eps: f64 = StandardNormal.sample(&mut rng);
            clean + noise * eps
        })
        .collect();
    to_dataset(rows, labels, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_and_normalization() {
        let d = separator_with_flips(50, 7, 0.1, 3);
        assert_eq!(d.n(), 50);
        assert_eq!(d.dim(), 7);
        assert!(d.max_norm() <= 1.0 + 1e-12);
        assert!(d.labels().all(|y| y == 1.0 || y == -1.0));
    }

    #[test]
    fn seeded() {
        assert_eq!(
            separator_with_flips(20, 4, 0.1, 9),
            separator_with_flips(20, 4, 0.1, 9)
        );
        assert_ne!(
            linear_regression(20, 4, 0.1, 9),
            linear_regression(20, 4, 0.1, 10)
        );
    }
}
