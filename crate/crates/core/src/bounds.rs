//! Iteration-count bounds for SDCA and the refined-analysis diagnostics
//! (`gamma_i`, `N(u)`, `rho`), evaluated numerically so that measured traces
//! can be overlaid against theory.
//!
//! All logarithms are natural. Iteration counts are rounded up.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::data::Dataset;
use crate::losses::{LossKind, LossSpec};

/// Points of the geometric grid over `s` in [`thm5_iterations`].
pub const THM5_GRID_POINTS: usize = 1024;
/// Points of the geometric grid over `gamma` in [`thm6_eps_tilde`].
pub const THM6_GRID_POINTS: usize = 2048;
/// Lower end of the `gamma` grid in [`thm6_eps_tilde`].
pub const THM6_GRID_MIN: f64 = 1e-8;

const POWER_TOL: f64 = 1e-8;
const POWER_MAX_ITERS: usize = 10_000;
const POWER_SEED: u64 = 0x5dca_e16e;

#[derive(Debug, Error, PartialEq)]
pub enum BoundError {
    #[error("bound needs {0}")]
    Missing(&'static str),
    #[error("invalid bound input: {0}")]
    Invalid(String),
    #[error("refined gamma_i is only defined for hinge and absdev losses, not {0}")]
    UnsupportedLoss(LossKind),
    #[error("reference solution has length {got}, dataset dimension is {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Inputs shared by the iteration-count bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    pub n: usize,
    pub lambda: f64,
    /// Lipschitz constant `L` of the loss.
    pub lipschitz: Option<f64>,
    /// `gamma` for a `(1/gamma)`-smooth loss.
    pub gamma_smooth: Option<f64>,
    /// Target duality gap.
    pub eps_p: f64,
    /// Use the hinge-loss constant 1 in place of 4.
    pub hinge_constants: bool,
}

impl BoundInputs {
    pub fn lipschitz(n: usize, lambda: f64, l: f64, eps_p: f64) -> Self {
        Self {
            n,
            lambda,
            lipschitz: Some(l),
            gamma_smooth: None,
            eps_p,
            hinge_constants: false,
        }
    }

    pub fn smooth(n: usize, lambda: f64, gamma: f64, eps_p: f64) -> Self {
        Self {
            n,
            lambda,
            lipschitz: None,
            gamma_smooth: Some(gamma),
            eps_p,
            hinge_constants: false,
        }
    }

    pub fn with_hinge_constants(mut self) -> Self {
        self.hinge_constants = true;
        self
    }

    /// Fills `L` or `gamma` from the loss.
    pub fn for_loss(loss: &LossSpec, n: usize, lambda: f64, eps_p: f64) -> Self {
        Self {
            n,
            lambda,
            lipschitz: loss.lipschitz(),
            gamma_smooth: loss.smoothness().map(|s| 1.0 / s),
            eps_p,
            hinge_constants: loss.kind() == LossKind::Hinge,
        }
    }

    fn check(&self) -> Result<(), BoundError> {
        if self.n == 0 {
            return Err(BoundError::Invalid("n must be positive".into()));
        }
        if !(self.lambda > 0.0) {
            return Err(BoundError::Invalid("lambda must be positive".into()));
        }
        if !(self.eps_p > 0.0) {
            return Err(BoundError::Invalid("eps_p must be positive".into()));
        }
        Ok(())
    }

    fn require_l(&self) -> Result<f64, BoundError> {
        self.check()?;
        match self.lipschitz {
            Some(l) if l > 0.0 => Ok(l),
            Some(_) => Err(BoundError::Invalid("L must be positive".into())),
            None => Err(BoundError::Missing("a Lipschitz constant L")),
        }
    }

    fn require_gamma(&self) -> Result<f64, BoundError> {
        self.check()?;
        match self.gamma_smooth {
            Some(g) if g > 0.0 => Ok(g),
            Some(_) => Err(BoundError::Invalid("gamma must be positive".into())),
            None => Err(BoundError::Missing("a smoothness parameter gamma")),
        }
    }

    fn lipschitz_constant(&self) -> f64 {
        if self.hinge_constants {
            1.0
        } else {
            4.0
        }
    }
}

/// Ceiling that ignores floating-point noise just above an integer.
fn ceil_count(x: f64) -> u64 {
    if x <= 0.0 {
        return 0;
    }
    let nearest = x.round();
    if (x - nearest).abs() <= 1e-9 * x.max(1.0) {
        nearest as u64
    } else {
        x.ceil() as u64
    }
}

fn thm1_t0(n: f64, lambda: f64, l: f64) -> u64 {
    ceil_count(n * (0.5 * lambda * n / (l * l)).ln())
}

/// Lipschitz losses from a zero start: `T0 = max(0, ceil(n log(lambda n / (2 L^2))))`
/// and `T = T0 + n + C L^2 / (lambda eps_p)` with `C = 4`, or 1 for hinge.
pub fn thm1_iterations(b: &BoundInputs) -> Result<(u64, u64), BoundError> {
    let l = b.require_l()?;
    let n = b.n as f64;
    let t0 = thm1_t0(n, b.lambda, l);
    let t = ceil_count(t0 as f64 + n + b.lipschitz_constant() * l * l / (b.lambda * b.eps_p));
    Ok((t0, t))
}

/// The right-hand side of the Lipschitz bound with the extra `T0` slack folded
/// in: `max(0, ceil(n log(lambda n / (2 L^2)))) + n + 20 L^2 / (lambda eps_p)`
/// (5 instead of 20 for hinge).
pub fn thm1_total_conservative(b: &BoundInputs) -> Result<u64, BoundError> {
    let l = b.require_l()?;
    let n = b.n as f64;
    let t0 = thm1_t0(n, b.lambda, l);
    let c = 5.0 * b.lipschitz_constant();
    Ok(ceil_count(t0 as f64 + n + c * l * l / (b.lambda * b.eps_p)))
}

/// Smooth losses: `T = ceil((n + 1/(lambda gamma)) log((n + 1/(lambda gamma)) / eps_p))`.
pub fn thm2_iterations(b: &BoundInputs) -> Result<u64, BoundError> {
    let g = b.require_gamma()?;
    let m = b.n as f64 + 1.0 / (b.lambda * g);
    Ok(ceil_count(m * (m / b.eps_p).ln()))
}

/// Expected dual suboptimality after one Modified-SGD pass:
/// `2 L^2 log(e n) / (lambda n)`.
pub fn thm3_sgd_bound(n: usize, l: f64, lambda: f64) -> f64 {
    let n = n as f64;
    2.0 * l * l * (1.0 + n.ln()) / (lambda * n)
}

/// SDCA after a Modified-SGD warm start:
/// `T0 = ceil(n log(log(e n)))`, `T = T0 + n + C L^2 / (lambda eps_p)`.
pub fn thm4_iterations(b: &BoundInputs) -> Result<(u64, u64), BoundError> {
    let l = b.require_l()?;
    let n = b.n as f64;
    let t0 = ceil_count(n * (1.0 + n.ln()).ln());
    let t = ceil_count(t0 as f64 + n + b.lipschitz_constant() * l * l / (b.lambda * b.eps_p));
    Ok((t0, t))
}

/// The gap guaranteed by the Lipschitz bound after `t` total steps, or `None`
/// while `t` has not yet passed `T0 + n`.
pub fn thm1_gap_at(n: usize, lambda: f64, l: f64, hinge_constants: bool, t: u64) -> Option<f64> {
    let nf = n as f64;
    let t0 = thm1_t0(nf, lambda, l) as f64;
    let remaining = t as f64 - t0 - nf;
    if remaining <= 0.0 {
        return None;
    }
    let c = if hinge_constants { 1.0 } else { 4.0 };
    Some(c * l * l / (lambda * remaining))
}

/// As [`thm1_gap_at`] with the warm-start burn-in `T0 = ceil(n log(log(e n)))`.
pub fn thm4_gap_at(n: usize, lambda: f64, l: f64, hinge_constants: bool, t: u64) -> Option<f64> {
    let nf = n as f64;
    let t0 = ceil_count(nf * (1.0 + nf.ln()).ln()) as f64;
    let remaining = t as f64 - t0 - nf;
    if remaining <= 0.0 {
        return None;
    }
    let c = if hinge_constants { 1.0 } else { 4.0 };
    Some(c * l * l / (lambda * remaining))
}

/// The expected gap guaranteed by the smooth bound after `t` steps:
/// `(n + 1/(lambda gamma)) exp(-t / (n + 1/(lambda gamma)))`.
pub fn thm2_gap_at(n: usize, lambda: f64, gamma: f64, t: u64) -> f64 {
    let m = n as f64 + 1.0 / (lambda * gamma);
    m * (-(t as f64) / m).exp()
}

/// Per-example local strong-convexity moduli at a reference solution:
/// `|y_i w.x_i - 1|` for hinge, `|w.x_i - y_i|` for absolute deviation.
pub fn refined_gamma_i(
    loss: &LossSpec,
    dataset: &Dataset,
    w_ref: &[f64],
) -> Result<Vec<f64>, BoundError> {
    if w_ref.len() != dataset.dim() {
        return Err(BoundError::DimensionMismatch {
            expected: dataset.dim(),
            got: w_ref.len(),
        });
    }
    let margin = |a: f64, y: f64| match loss.kind() {
        LossKind::Hinge => Ok((a * y - 1.0).abs()),
        LossKind::AbsoluteDeviation => Ok((a - y).abs()),
        other => Err(BoundError::UnsupportedLoss(other)),
    };
    dataset
        .examples()
        .iter()
        .map(|ex| margin(ex.features().dot_dense(w_ref), ex.label()))
        .collect()
}

/// The `gamma_i` sorted ascending, so `N(u)` is a binary search.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaProfile {
    sorted: Vec<f64>,
}

impl GammaProfile {
    pub fn new(mut gammas: Vec<f64>) -> Result<Self, BoundError> {
        if gammas.is_empty() {
            return Err(BoundError::Invalid("no gamma values".into()));
        }
        if gammas.iter().any(|g| !(*g >= 0.0)) {
            return Err(BoundError::Invalid("gamma values must be >= 0".into()));
        }
        gammas.sort_by(f64::total_cmp);
        Ok(Self { sorted: gammas })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn max(&self) -> f64 {
        *self.sorted.last().expect("non-empty")
    }

    /// `N(u) = #{i : gamma_i < u}`.
    pub fn count_below(&self, u: f64) -> usize {
        self.sorted.partition_point(|&g| g < u)
    }
}

pub fn n_of_u(gammas: &GammaProfile, u: f64) -> usize {
    gammas.count_below(u)
}

fn geometric_grid(lo: f64, hi: f64, points: usize) -> impl Iterator<Item = f64> {
    let ratio = (hi / lo).ln();
    let last = (points - 1) as f64;
    (0..points).map(move |k| {
        if k + 1 == points {
            hi
        } else {
            lo * (ratio * k as f64 / last).exp()
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thm5Bound {
    /// Largest qualifying `s`.
    pub s: f64,
    pub iterations: u64,
}

/// Steps sufficient for expected dual suboptimality `eps_d` under the refined
/// analysis: the largest `s in [1/1024, 1]` with
/// `eps_d >= 8 L^2 (s/(lambda n)) N(s/(lambda n)) / n`, then
/// `T = ceil(2 (n/s) log(2/eps_d))`. `None` if no `s` qualifies.
///
/// The search covers a 1024-point geometric grid plus every point where the
/// condition can change: the jumps of `N` at `s = lambda n gamma_i` and, on each
/// piece where `N = k`, the point where the linear condition becomes tight.
/// That makes the result the exact supremum over the interval.
pub fn thm5_iterations(
    lambda: f64,
    l: f64,
    gammas: &GammaProfile,
    eps_d: f64,
) -> Option<Thm5Bound> {
    let n = gammas.len() as f64;
    let lambda_n = lambda * n;
    let lo = 1.0 / THM5_GRID_POINTS as f64;
    let condition = |s: f64| {
        let u = s / lambda_n;
        8.0 * l * l * u * gammas.count_below(u) as f64 / n <= eps_d * (1.0 + 1e-12)
    };
    let breakpoints = gammas.sorted().iter().map(|&g| g * lambda_n);
    let tight = (1..=gammas.len()).map(|k| eps_d * n * lambda_n / (8.0 * l * l * k as f64));
    let best = geometric_grid(lo, 1.0, THM5_GRID_POINTS)
        .chain(breakpoints)
        .chain(tight)
        .filter(|s| (lo..=1.0).contains(s) && condition(*s))
        .fold(None, |acc: Option<f64>, s| Some(acc.map_or(s, |a| a.max(s))))?;
    let iterations = ceil_count(2.0 * (n / best) * (2.0 / eps_d).ln());
    Some(Thm5Bound {
        s: best,
        iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thm6Bound {
    /// `eps_tilde_P`, the infimum over `gamma`.
    pub eps_tilde: f64,
    /// The minimizing `gamma`.
    pub gamma: f64,
}

/// `(N(gamma)/n) 4 L^2 + 2 eps_d / min(gamma, lambda gamma^2 / (2 rho))`.
pub fn thm6_objective(gammas: &GammaProfile, lambda: f64, rho: f64, l: f64, eps_d: f64, gamma: f64) -> f64 {
    let n = gammas.len() as f64;
    let denom = gamma.min(lambda * gamma * gamma / (2.0 * rho));
    gammas.count_below(gamma) as f64 / n * 4.0 * l * l + 2.0 * eps_d / denom
}

/// Minimizes [`thm6_objective`] over `gamma in [1e-8, max gamma_i + 1]`.
///
/// Between consecutive `gamma_i` the objective is decreasing (`N` is constant
/// and the second term falls), so besides the 2048-point geometric grid the
/// `gamma_i` themselves are evaluated; together they contain the exact
/// minimizer over the interval.
pub fn thm6_eps_tilde(gammas: &GammaProfile, lambda: f64, rho: f64, l: f64, eps_d: f64) -> Thm6Bound {
    let hi = gammas.max() + 1.0;
    let lo = THM6_GRID_MIN;
    let (gamma, eps_tilde) = geometric_grid(lo, hi, THM6_GRID_POINTS)
        .chain(gammas.sorted().iter().copied())
        .filter(|g| (lo..=hi).contains(g))
        .map(|g| (g, thm6_objective(gammas, lambda, rho, l, eps_d, g)))
        .fold((hi, f64::INFINITY), |best, cand| {
            if cand.1 < best.1 {
                cand
            } else {
                best
            }
        });
    Thm6Bound { eps_tilde, gamma }
}

/// Gap bound at `T = 2 T0`: `eps_d + eps_tilde / (2 lambda T0)`.
pub fn thm6_gap_bound(eps_d: f64, eps_tilde: f64, lambda: f64, t0: u64) -> f64 {
    eps_d + eps_tilde / (2.0 * lambda * t0 as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerIteration {
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Top eigenvalue of `(1/n) sum_i x_i x_i^T` by power iteration on the
/// implicit operator. Converged when the eigen-residual falls below `1e-8`
/// relative to the estimate; capped at 10000 iterations.
pub fn rho_top_eigenvalue(dataset: &Dataset) -> PowerIteration {
    let dim = dataset.dim();
    let n = dataset.n() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(POWER_SEED);
    let mut v: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() + 0.5).collect();
    normalize(&mut v);

    let apply = |v: &[f64]| {
        let mut out = vec![0.0; dim];
        for ex in dataset.examples() {
            let c = ex.features().dot_dense(v);
            if c != 0.0 {
                ex.features().add_scaled_to(c / n, &mut out);
            }
        }
        out
    };

    let mut value = 0.0;
    let mut prev = f64::NAN;
    for iter in 1..=POWER_MAX_ITERS {
        let mut u = apply(&v);
        value = dot(&v, &u);
        let residual = u
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - value * b).powi(2))
            .sum::<f64>()
            .sqrt();
        if value <= 0.0 || residual <= POWER_TOL * value || (value - prev).abs() <= 1e-15 * value {
            return PowerIteration {
                value: value.max(0.0),
                converged: true,
                iterations: iter,
            };
        }
        prev = value;
        normalize(&mut u);
        v = u;
    }
    PowerIteration {
        value,
        converged: false,
        iterations: POWER_MAX_ITERS,
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

/// `gamma_i`, their profile and `rho` for one dataset and reference solution.
#[derive(Debug, Clone)]
pub struct RefinedDiagnostics {
    pub gamma_i: Vec<f64>,
    pub profile: GammaProfile,
    pub rho: PowerIteration,
}

pub fn refined_diagnostics(
    loss: &LossSpec,
    dataset: &Dataset,
    w_ref: &[f64],
) -> Result<RefinedDiagnostics, BoundError> {
    let gamma_i = refined_gamma_i(loss, dataset, w_ref)?;
    let profile = GammaProfile::new(gamma_i.clone())?;
    Ok(RefinedDiagnostics {
        gamma_i,
        profile,
        rho: rho_top_eigenvalue(dataset),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Example, SparseVector};

    #[test]
    fn thm1_example() {
        let b = BoundInputs::lipschitz(1000, 1e-3, 1.0, 1e-2).with_hinge_constants();
        assert_eq!(thm1_iterations(&b).unwrap(), (0, 101_000));
        let general = BoundInputs::lipschitz(1000, 1e-3, 1.0, 1e-2);
        assert_eq!(thm1_iterations(&general).unwrap(), (0, 401_000));
    }

    #[test]
    fn thm1_log_term_vanishes_at_two_l_squared() {
        // lambda n = 2 L^2
        let b = BoundInputs::lipschitz(200, 0.01, 1.0, 0.1);
        assert_eq!(thm1_iterations(&b).unwrap().0, 0);
        let b = BoundInputs::lipschitz(1000, 1e-2, 1.0, 1e-2).with_hinge_constants();
        assert_eq!(thm1_iterations(&b).unwrap(), (1610, 12_610));
    }

    #[test]
    fn thm1_needs_l() {
        let b = BoundInputs::smooth(10, 0.1, 1.0, 0.1);
        assert_eq!(
            thm1_iterations(&b),
            Err(BoundError::Missing("a Lipschitz constant L"))
        );
        assert!(thm2_iterations(&BoundInputs::lipschitz(10, 0.1, 1.0, 0.1)).is_err());
    }

    #[test]
    fn thm2_example() {
        let b = BoundInputs::smooth(100, 0.01, 1.0, 0.01);
        assert_eq!(thm2_iterations(&b).unwrap(), 1981);
        // eps equal to n + 1/(lambda gamma) zeroes the log
        let b = BoundInputs::smooth(100, 0.01, 1.0, 200.0);
        assert_eq!(thm2_iterations(&b).unwrap(), 0);
    }

    #[test]
    fn thm3_example() {
        let v = thm3_sgd_bound(1000, 1.0, 0.1);
        assert!((v - 0.158_155_1).abs() < 1e-6, "{v}");
        assert!((thm3_sgd_bound(500, 1.0, 0.1) - 0.288_584_3).abs() < 1e-6);
    }

    #[test]
    fn thm4_example() {
        let b = BoundInputs::lipschitz(1000, 1e-3, 1.0, 1e-2);
        let (t0, t) = thm4_iterations(&b).unwrap();
        assert_eq!(t0, 2068);
        assert_eq!(t, 2068 + 1000 + 400_000);
    }

    #[test]
    fn conservative_total_is_larger() {
        let b = BoundInputs::lipschitz(1000, 1e-2, 1.0, 1e-2).with_hinge_constants();
        assert_eq!(thm1_total_conservative(&b).unwrap(), 1610 + 1000 + 50_000);
    }

    #[test]
    fn overlays_invert_the_bounds() {
        let (_, t) = thm1_iterations(&BoundInputs::lipschitz(1000, 1e-2, 1.0, 1e-2).with_hinge_constants()).unwrap();
        let eps = thm1_gap_at(1000, 1e-2, 1.0, true, t).unwrap();
        assert!((eps - 1e-2).abs() < 1e-12);
        assert_eq!(thm1_gap_at(1000, 1e-2, 1.0, true, 2000), None);
        let t = thm2_iterations(&BoundInputs::smooth(100, 0.01, 1.0, 0.01)).unwrap();
        assert!(thm2_gap_at(100, 0.01, 1.0, t) <= 0.01);
    }

    #[test]
    fn gamma_i_examples() {
        let ds = Dataset::new(vec![
            Example::new(SparseVector::new(vec![(0, 1.0)]).unwrap(), 1.0),
            Example::new(SparseVector::new(vec![(0, 2.0)]).unwrap(), 1.0),
        ])
        .unwrap();
        let g = refined_gamma_i(&LossSpec::hinge(), &ds, &[1.0]).unwrap();
        assert_eq!(g, vec![0.0, 1.0]);
        let g = refined_gamma_i(&LossSpec::absolute_deviation(), &ds, &[1.0]).unwrap();
        assert_eq!(g, vec![0.0, 1.0]);
        assert_eq!(
            refined_gamma_i(&LossSpec::squared(), &ds, &[1.0]),
            Err(BoundError::UnsupportedLoss(LossKind::Squared))
        );
    }

    #[test]
    fn n_of_u_examples() {
        let p = GammaProfile::new(vec![1.2, 0.0, 0.5]).unwrap();
        assert_eq!(n_of_u(&p, 0.6), 2);
        assert_eq!(n_of_u(&p, 0.0), 0);
        assert_eq!(n_of_u(&p, f64::INFINITY), 3);
        assert!(GammaProfile::new(vec![-1.0]).is_err());
        assert!(GammaProfile::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn thm5_all_margins_large() {
        // every gamma_i >= 1/(lambda n), so N(1/(lambda n)) = 0 and s = 1
        let n = 50;
        let lambda = 0.1;
        let p = GammaProfile::new(vec![1.0 / (lambda * n as f64); n]).unwrap();
        let eps = 1e-3;
        let b = thm5_iterations(lambda, 1.0, &p, eps).unwrap();
        assert_eq!(b.s, 1.0);
        assert_eq!(b.iterations, ceil_count(2.0 * n as f64 * (2.0 / eps).ln()));
    }

    #[test]
    fn thm5_saturated() {
        // eps_d = 8 L^2 / (lambda n) and N <= n: s = 1 qualifies
        let n = 20;
        let lambda = 0.5;
        let p = GammaProfile::new(vec![0.0; n]).unwrap();
        let eps = 8.0 / (lambda * n as f64);
        assert_eq!(thm5_iterations(lambda, 1.0, &p, eps).unwrap().s, 1.0);
        // far below: nothing on the grid qualifies
        assert_eq!(thm5_iterations(lambda, 1.0, &p, 1e-9), None);
    }

    #[test]
    fn thm6_all_zero_gammas_bounded_by_4l2() {
        let p = GammaProfile::new(vec![0.0; 10]).unwrap();
        let b = thm6_eps_tilde(&p, 0.1, 1.0, 1.0, 1e-6);
        assert!(b.eps_tilde >= 4.0);
    }

    #[test]
    fn thm6_vanishes_with_eps_d() {
        let p = GammaProfile::new(vec![0.5, 0.7, 2.0]).unwrap();
        let big = thm6_eps_tilde(&p, 0.1, 1.0, 1.0, 1e-3).eps_tilde;
        let small = thm6_eps_tilde(&p, 0.1, 1.0, 1.0, 1e-9).eps_tilde;
        assert!(small < big);
        assert!(small < 1e-6, "{small}");
        assert!((thm6_gap_bound(1e-3, 2.0, 0.5, 100) - (1e-3 + 0.02)).abs() < 1e-15);
    }

    #[test]
    fn rho_unit_basis() {
        let ds = Dataset::new(vec![
            Example::new(SparseVector::new(vec![(0, 1.0)]).unwrap(), 1.0),
            Example::new(SparseVector::new(vec![(1, 1.0)]).unwrap(), 1.0),
        ])
        .unwrap();
        let r = rho_top_eigenvalue(&ds);
        assert!(r.converged);
        assert!((r.value - 0.5).abs() < 1e-12, "{}", r.value);
    }

    #[test]
    fn rho_identical_unit_vectors() {
        let x = SparseVector::new(vec![(0, 0.6), (2, 0.8)]).unwrap();
        let ds = Dataset::new((0..5).map(|_| Example::new(x.clone(), 1.0)).collect()).unwrap();
        let r = rho_top_eigenvalue(&ds);
        assert!((r.value - 1.0).abs() < 1e-12);
    }
}
