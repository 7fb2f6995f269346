//! Loss families, their convex conjugates, and the exact single-coordinate
//! dual maximization used by SDCA.
//!
//! Conjugates are always evaluated at the negated dual variable: for a dual
//! value `alpha` with label `y`, [`LossSpec::eval_conjugate`] returns
//! `phi*(-alpha)`, or `None` when `alpha` lies outside the conjugate's domain.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Slack accepted when checking that an incoming dual variable is feasible.
pub const FEASIBILITY_TOL: f64 = 1e-12;

/// Logistic dual iterates are kept in `[LOGISTIC_EPS, 1 - LOGISTIC_EPS]`.
pub const LOGISTIC_EPS: f64 = 1e-12;
const LOGISTIC_GRAD_TOL: f64 = 1e-12;
const LOGISTIC_MAX_NEWTON: usize = 50;

#[derive(Debug, Error, PartialEq)]
pub enum LossError {
    #[error("smoothing parameter gamma must be positive, got {0}")]
    BadGamma(f64),
    #[error("unknown loss {0:?}; expected hinge, smoothed-hinge, absdev, squared or logistic")]
    UnknownLoss(String),
    #[error("dual variable {alpha} with label {label} is infeasible for {kind} loss")]
    InfeasibleDual {
        kind: LossKind,
        alpha: f64,
        label: f64,
    },
    #[error("invalid coordinate problem: {0}")]
    BadProblem(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossKind {
    Hinge,
    SmoothedHinge,
    AbsoluteDeviation,
    Squared,
    Logistic,
}

impl LossKind {
    pub const ALL: [LossKind; 5] = [
        LossKind::Hinge,
        LossKind::SmoothedHinge,
        LossKind::AbsoluteDeviation,
        LossKind::Squared,
        LossKind::Logistic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LossKind::Hinge => "hinge",
            LossKind::SmoothedHinge => "smoothed-hinge",
            LossKind::AbsoluteDeviation => "absdev",
            LossKind::Squared => "squared",
            LossKind::Logistic => "logistic",
        }
    }

    /// Classification losses require labels in {-1, +1}.
    pub fn is_classification(self) -> bool {
        matches!(
            self,
            LossKind::Hinge | LossKind::SmoothedHinge | LossKind::Logistic
        )
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LossKind {
    type Err = LossError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hinge" => Ok(LossKind::Hinge),
            "smoothed-hinge" => Ok(LossKind::SmoothedHinge),
            "absdev" => Ok(LossKind::AbsoluteDeviation),
            "squared" => Ok(LossKind::Squared),
            "logistic" => Ok(LossKind::Logistic),
            other => Err(LossError::UnknownLoss(other.to_string())),
        }
    }
}

/// A loss family plus its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossSpec {
    kind: LossKind,
    gamma: f64,
}

/// One SDCA coordinate subproblem: everything the exact update needs about
/// example `i` and the current iterate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordinateProblem {
    /// Current dual variable.
    pub alpha: f64,
    /// `x_i . w` at the current primal iterate.
    pub wx: f64,
    /// `||x_i||^2`.
    pub norm_sq: f64,
    /// `lambda * n` (or `lambda * t` inside Modified-SGD).
    pub lambda_n: f64,
    pub label: f64,
}

impl CoordinateProblem {
    fn validate(&self) -> Result<(), LossError> {
        if !(self.lambda_n > 0.0) {
            return Err(LossError::BadProblem("lambda_n must be positive"));
        }
        if !(self.norm_sq >= 0.0) {
            return Err(LossError::BadProblem("norm_sq must be nonnegative"));
        }
        if !self.wx.is_finite() || !self.alpha.is_finite() || !self.label.is_finite() {
            return Err(LossError::BadProblem("non-finite input"));
        }
        Ok(())
    }
}

fn clamp(v: f64, lo: f64, hi: f64) -> f64 {
    v.max(lo).min(hi)
}

/// `log(1 + exp(-z))` without overflow.
fn log1p_exp_neg(z: f64) -> f64 {
    if z > 0.0 {
        (-z).exp().ln_1p()
    } else {
        -z + z.exp().ln_1p()
    }
}

/// Negative binary entropy `p log p + (1-p) log(1-p)` with `0 log 0 = 0`.
fn neg_entropy(p: f64) -> f64 {
    let term = |q: f64| if q <= 0.0 { 0.0 } else { q * q.ln() };
    term(p) + term(1.0 - p)
}

impl LossSpec {
    pub fn new(kind: LossKind, gamma: f64) -> Result<Self, LossError> {
        if kind == LossKind::SmoothedHinge && !(gamma > 0.0 && gamma.is_finite()) {
            return Err(LossError::BadGamma(gamma));
        }
        Ok(Self { kind, gamma })
    }

    pub fn hinge() -> Self {
        Self {
            kind: LossKind::Hinge,
            gamma: 0.0,
        }
    }

    pub fn smoothed_hinge(gamma: f64) -> Result<Self, LossError> {
        Self::new(LossKind::SmoothedHinge, gamma)
    }

    pub fn absolute_deviation() -> Self {
        Self {
            kind: LossKind::AbsoluteDeviation,
            gamma: 0.0,
        }
    }

    pub fn squared() -> Self {
        Self {
            kind: LossKind::Squared,
            gamma: 0.0,
        }
    }

    pub fn logistic() -> Self {
        Self {
            kind: LossKind::Logistic,
            gamma: 0.0,
        }
    }

    pub fn kind(&self) -> LossKind {
        self.kind
    }

    /// Smoothing parameter; meaningful only for the smoothed hinge.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn lipschitz(&self) -> Option<f64> {
        match self.kind {
            LossKind::Hinge | LossKind::AbsoluteDeviation => Some(1.0),
            _ => None,
        }
    }

    /// Lipschitz constant of the derivative.
    ///
    /// `(a - y)^2` has second derivative 2, so the squared loss reports 2.
    pub fn smoothness(&self) -> Option<f64> {
        match self.kind {
            LossKind::Squared => Some(2.0),
            LossKind::Logistic => Some(1.0),
            LossKind::SmoothedHinge => Some(1.0 / self.gamma),
            _ => None,
        }
    }

    pub fn eval_primal(&self, a: f64, y: f64) -> f64 {
        match self.kind {
            LossKind::Hinge => (1.0 - y * a).max(0.0),
            LossKind::AbsoluteDeviation => (a - y).abs(),
            LossKind::Squared => (a - y) * (a - y),
            LossKind::Logistic => log1p_exp_neg(y * a),
            LossKind::SmoothedHinge => {
                let x = y * a;
                let g = self.gamma;
                if x > 1.0 {
                    0.0
                } else if x < 1.0 - g {
                    1.0 - x - g / 2.0
                } else {
                    (1.0 - x) * (1.0 - x) / (2.0 * g)
                }
            }
        }
    }

    /// Whether `alpha` lies in the domain of `phi*(-.)`, up to
    /// [`FEASIBILITY_TOL`].
    pub fn is_feasible(&self, alpha: f64, y: f64) -> bool {
        if !alpha.is_finite() {
            return false;
        }
        match self.kind {
            LossKind::Hinge | LossKind::SmoothedHinge | LossKind::Logistic => {
                let p = alpha * y;
                (-FEASIBILITY_TOL..=1.0 + FEASIBILITY_TOL).contains(&p)
            }
            LossKind::AbsoluteDeviation => alpha.abs() <= 1.0 + FEASIBILITY_TOL,
            LossKind::Squared => true,
        }
    }

    /// `phi*(-alpha)`, or `None` when `alpha` is infeasible.
    pub fn eval_conjugate(&self, alpha: f64, y: f64) -> Option<f64> {
        if !self.is_feasible(alpha, y) {
            return None;
        }
        let value = match self.kind {
            LossKind::Hinge => -alpha * y,
            LossKind::SmoothedHinge => -alpha * y + 0.5 * self.gamma * alpha * alpha,
            LossKind::AbsoluteDeviation => -alpha * y,
            LossKind::Squared => -alpha * y + alpha * alpha / 4.0,
            LossKind::Logistic => neg_entropy(clamp(alpha * y, 0.0, 1.0)),
        };
        Some(value)
    }

    /// One element of the subdifferential at `a`.
    pub fn subgradient(&self, a: f64, y: f64) -> f64 {
        match self.kind {
            LossKind::Hinge => {
                if y * a < 1.0 {
                    -y
                } else {
                    0.0
                }
            }
            LossKind::AbsoluteDeviation => {
                if a > y {
                    1.0
                } else if a < y {
                    -1.0
                } else {
                    0.0
                }
            }
            LossKind::Squared => 2.0 * (a - y),
            LossKind::Logistic => -y / (1.0 + (y * a).exp()),
            LossKind::SmoothedHinge => {
                let x = y * a;
                let g = self.gamma;
                if x > 1.0 {
                    0.0
                } else if x < 1.0 - g {
                    -y
                } else {
                    -y * (1.0 - x) / g
                }
            }
        }
    }

    /// The dual coordinate objective, up to a constant independent of `delta`:
    /// `-phi*(-(alpha + delta)) - delta * wx - delta^2 ||x||^2 / (2 lambda n)`.
    /// `None` when `alpha + delta` is infeasible.
    pub fn coordinate_objective(&self, p: &CoordinateProblem, delta: f64) -> Option<f64> {
        let conj = self.eval_conjugate(p.alpha + delta, p.label)?;
        Some(-conj - delta * p.wx - delta * delta * p.norm_sq / (2.0 * p.lambda_n))
    }

    /// The maximizing `delta_alpha` for one coordinate.
    pub fn coordinate_update(&self, p: &CoordinateProblem) -> Result<f64, LossError> {
        Ok(self.coordinate_maximizer(p)? - p.alpha)
    }

    /// The maximizing new value of `alpha` itself. Solvers store this value
    /// directly so feasibility is exact.
    pub fn coordinate_maximizer(&self, p: &CoordinateProblem) -> Result<f64, LossError> {
        p.validate()?;
        if !self.is_feasible(p.alpha, p.label) {
            return Err(LossError::InfeasibleDual {
                kind: self.kind,
                alpha: p.alpha,
                label: p.label,
            });
        }
        let q = p.norm_sq / p.lambda_n;
        let y = p.label;
        let new_alpha = match self.kind {
            LossKind::Hinge => {
                let b0 = p.alpha * y;
                let num = 1.0 - p.wx * y;
                let b = if q == 0.0 {
                    // objective is linear in b; go to the better end of [0, 1]
                    if num > 0.0 {
                        1.0
                    } else if num < 0.0 {
                        0.0
                    } else {
                        b0
                    }
                } else {
                    num / q + b0
                };
                y * clamp(b, 0.0, 1.0)
            }
            LossKind::SmoothedHinge => {
                let b0 = p.alpha * y;
                let g = self.gamma;
                let b = (1.0 - p.wx * y - g * b0) / (q + g) + b0;
                y * clamp(b, 0.0, 1.0)
            }
            LossKind::AbsoluteDeviation => {
                let num = y - p.wx;
                let a = if q == 0.0 {
                    if num > 0.0 {
                        1.0
                    } else if num < 0.0 {
                        -1.0
                    } else {
                        p.alpha
                    }
                } else {
                    num / q + p.alpha
                };
                clamp(a, -1.0, 1.0)
            }
            LossKind::Squared => p.alpha + (y - p.wx - 0.5 * p.alpha) / (0.5 + q),
            LossKind::Logistic => y * logistic_coordinate(p, q),
        };
        Ok(new_alpha)
    }
}

impl fmt::Display for LossSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            LossKind::SmoothedHinge => write!(f, "smoothed-hinge(gamma={})", self.gamma),
            k => f.write_str(k.as_str()),
        }
    }
}

/// Maximizes the logistic dual coordinate objective over `b = alpha * y`.
///
/// In `b` the objective is `-(b ln b + (1-b) ln(1-b)) - (b - b0) y wx - (b - b0)^2 q / 2`
/// (up to constants), strictly concave with derivative
/// `-logit(b) - y wx - (b - b0) q`. Starts from the cheap approximate step and
/// polishes with Newton inside a shrinking bracket, bisecting whenever the
/// Newton step leaves it.
fn logistic_coordinate(p: &CoordinateProblem, q: f64) -> f64 {
    let y = p.label;
    let b0 = clamp(p.alpha * y, 0.0, 1.0);
    let ywx = y * p.wx;
    let grad = |b: f64| -(b / (1.0 - b)).ln() - ywx - (b - b0) * q;
    let curvature = |b: f64| 1.0 / (b * (1.0 - b)) + q;

    let mut lo = LOGISTIC_EPS;
    let mut hi = 1.0 - LOGISTIC_EPS;
    if grad(lo) <= 0.0 {
        return lo;
    }
    if grad(hi) >= 0.0 {
        return hi;
    }

    let approx_delta = (y / (1.0 + (p.wx * y).exp()) - p.alpha) / (0.25 + q).max(1.0);
    let mut b = clamp((p.alpha + approx_delta) * y, lo, hi);

    for _ in 0..LOGISTIC_MAX_NEWTON {
        let g = grad(b);
        if g.abs() < LOGISTIC_GRAD_TOL {
            break;
        }
        if g > 0.0 {
            lo = b;
        } else {
            hi = b;
        }
        let mut next = b + g / curvature(b);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if next == b {
            break;
        }
        b = next;
    }
    b
}
