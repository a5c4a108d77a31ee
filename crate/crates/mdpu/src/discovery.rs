//! Discovery-probability families and the calculus on them: per-trial
//! probabilities, non-discovery products, partial sums, and divergence
//! classification of `sum_t D(1, t)`.
//!
//! `D(j, t)` is the probability that the `t`-th consecutive unsuccessful-so-far
//! explore attempt in a state with `j` undiscovered actions reveals one.
//! `t` counts from 1 and resets when a discovery happens.

use crate::mdp::ValidationReport;
use serde::{Deserialize, Serialize};

/// Parametric families for `D(j, t)`. Values outside `[0, 1]` are clamped at
/// evaluation time; [`DiscoveryFamily::validate`] reports them instead of
/// hiding them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum DiscoveryFamily {
    /// `D = c` for every `(j, t)`.
    Constant { c: f64 },
    /// `D = 1 / (t + 1)^alpha`.
    Power { alpha: f64 },
    /// `D = 1 / (t + j)`. Deliberately decreasing in `j`: the standing
    /// nondecreasing-in-`j` assumption does not hold for it, which is what
    /// makes it the counterexample family.
    HarmonicJ,
    /// `D = min(1, m1 / (t (ln t + 1)))`.
    LogHarmonic { m1: f64 },
    /// Explicit per-`t` values (the same for every `j`); 0 beyond the end.
    Table { values: Vec<f64> },
}

/// Linear-space product of `1 - D` together with its log, since products over
/// many trials routinely leave f64 range.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NondiscoveryProduct {
    /// `prod_{t'=1..t} (1 - D(j, t'))`; 0.0 when the linear product
    /// underflowed (see `underflowed`) or some factor was exactly zero.
    pub value: f64,
    /// Natural log of the product; `-inf` only when a factor was exactly zero.
    pub ln_value: f64,
    /// True when the linear value fell below 1e-300 without any factor being
    /// exactly zero, so `value` is 0 but `ln_value` still carries the answer.
    pub underflowed: bool,
}

/// Divergence behavior of `sum_t D(1, t)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Divergence {
    Convergent,
    /// Grows like `ln ln T`.
    LogLog,
    /// Grows like `ln T`.
    Log,
    /// Grows like `T`.
    Linear,
    /// No analytic rule applies; see the witness samples.
    UnknownNumeric,
}

impl std::fmt::Display for Divergence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Divergence::Convergent => "convergent",
            Divergence::LogLog => "loglog",
            Divergence::Log => "log",
            Divergence::Linear => "linear",
            Divergence::UnknownNumeric => "unknown-numeric",
        };
        write!(f, "{s}")
    }
}

/// Classification result. `witness` holds the `(T, partial_sum)` samples the
/// numeric fallback inspected; it is empty when an analytic rule decided.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceClass {
    pub class: Divergence,
    pub witness: Vec<(u64, f64)>,
}

/// Underflow floor for the linear-space product.
pub const PRODUCT_UNDERFLOW_FLOOR: f64 = 1e-300;

pub(crate) fn neumaier_add(sum: &mut f64, comp: &mut f64, term: f64) {
    let t = *sum + term;
    if sum.abs() >= term.abs() {
        *comp += (*sum - t) + term;
    } else {
        *comp += (term - t) + *sum;
    }
    *sum = t;
}

impl DiscoveryFamily {
    /// `D(j, t)`, clamped to `[0, 1]`. Panics on `j = 0` (the probability is
    /// conditional on at least one undiscovered action) and on `t = 0`
    /// (trials count from 1).
    pub fn prob(&self, j: u64, t: u64) -> f64 {
        assert!(
            j > 0,
            "discovery probability needs j >= 1 undiscovered actions"
        );
        assert!(t > 0, "discovery trials count from t = 1");
        self.raw_prob(j, t).clamp(0.0, 1.0)
    }

    fn raw_prob(&self, j: u64, t: u64) -> f64 {
        match self {
            DiscoveryFamily::Constant { c } => *c,
            DiscoveryFamily::Power { alpha } => ((t + 1) as f64).powf(-alpha),
            DiscoveryFamily::HarmonicJ => 1.0 / (t + j) as f64,
            DiscoveryFamily::LogHarmonic { m1 } => {
                let tf = t as f64;
                (m1 / (tf * (tf.ln() + 1.0))).min(1.0)
            }
            DiscoveryFamily::Table { values } => {
                values.get((t - 1) as usize).copied().unwrap_or(0.0)
            }
        }
    }

    /// `prod_{t'=1..t} (1 - D(j, t'))` in linear space, with a compensated
    /// log-space accumulation carried alongside. `t = 0` gives the empty
    /// product 1.
    pub fn nondiscovery_product(&self, j: u64, t: u64) -> NondiscoveryProduct {
        let mut value = 1.0f64;
        let mut ln_sum = 0.0f64;
        let mut ln_comp = 0.0f64;
        let mut true_zero = false;
        for step in 1..=t {
            let d = self.prob(j, step);
            let factor = 1.0 - d;
            if factor <= 0.0 {
                true_zero = true;
            }
            value *= factor;
            neumaier_add(&mut ln_sum, &mut ln_comp, (-d).ln_1p());
        }
        let ln_value = if true_zero {
            f64::NEG_INFINITY
        } else {
            ln_sum + ln_comp
        };
        let underflowed = !true_zero && value < PRODUCT_UNDERFLOW_FLOOR;
        NondiscoveryProduct {
            value: if underflowed { 0.0 } else { value },
            ln_value,
            underflowed,
        }
    }

    /// `sum_{t=1..up_to} D(j, t)` with compensated accumulation, nondecreasing
    /// in `up_to`. `up_to = 0` gives the empty sum 0.
    pub fn partial_sum(&self, j: u64, up_to: u64) -> f64 {
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for t in 1..=up_to {
            neumaier_add(&mut sum, &mut comp, self.prob(j, t));
        }
        sum + comp
    }

    /// Classifies the growth of `sum_t D(1, t)`. Analytic rules cover every
    /// parameter range except `power` with `0 < alpha < 1`, which falls back
    /// to `unknown-numeric` with partial-sum witnesses.
    pub fn divergence_class(&self) -> DivergenceClass {
        let analytic = match self {
            DiscoveryFamily::Constant { c } => Some(if *c > 0.0 {
                Divergence::Linear
            } else {
                Divergence::Convergent
            }),
            DiscoveryFamily::Power { alpha } => {
                if *alpha > 1.0 {
                    Some(Divergence::Convergent)
                } else if *alpha == 1.0 {
                    Some(Divergence::Log)
                } else if *alpha <= 0.0 {
                    // D clamps to the constant 1.
                    Some(Divergence::Linear)
                } else {
                    None
                }
            }
            DiscoveryFamily::HarmonicJ => Some(Divergence::Log),
            DiscoveryFamily::LogHarmonic { m1 } => Some(if *m1 > 0.0 {
                Divergence::LogLog
            } else {
                Divergence::Convergent
            }),
            DiscoveryFamily::Table { .. } => Some(Divergence::Convergent),
        };
        match analytic {
            Some(class) => DivergenceClass {
                class,
                witness: Vec::new(),
            },
            None => {
                let witness: Vec<(u64, f64)> = [100, 10_000, 1_000_000]
                    .iter()
                    .map(|&t| (t, self.partial_sum(1, t)))
                    .collect();
                DivergenceClass {
                    class: Divergence::UnknownNumeric,
                    witness,
                }
            }
        }
    }

    /// `sup_t D(1, t)`, computed analytically per family.
    pub fn sup_prob_j1(&self) -> f64 {
        match self {
            DiscoveryFamily::Constant { c } => c.clamp(0.0, 1.0),
            DiscoveryFamily::Power { alpha } => {
                if *alpha >= 0.0 {
                    // Decreasing in t, so the sup is at t = 1.
                    (2.0f64).powf(-alpha).clamp(0.0, 1.0)
                } else {
                    1.0
                }
            }
            DiscoveryFamily::HarmonicJ => 0.5,
            DiscoveryFamily::LogHarmonic { m1 } => m1.clamp(0.0, 1.0),
            DiscoveryFamily::Table { values } => {
                values.iter().fold(0.0f64, |m, v| m.max(v.clamp(0.0, 1.0)))
            }
        }
    }

    /// Total mass `sum_t D(1, t)` for families where it provably converges;
    /// `None` when the sum diverges or no analytic rule applies.
    pub fn mass_j1(&self) -> Option<f64> {
        match self {
            DiscoveryFamily::Constant { c } => (*c <= 0.0).then_some(0.0),
            DiscoveryFamily::Power { alpha } => (*alpha > 1.0).then(|| zeta_minus_one(*alpha)),
            DiscoveryFamily::HarmonicJ => None,
            DiscoveryFamily::LogHarmonic { m1 } => (*m1 <= 0.0).then_some(0.0),
            DiscoveryFamily::Table { .. } => Some(self.partial_sum(1, self.table_len())),
        }
    }

    fn table_len(&self) -> u64 {
        match self {
            DiscoveryFamily::Table { values } => values.len() as u64,
            _ => 0,
        }
    }

    /// Range and monotonicity checks on a sampled grid (`j <= 32`,
    /// `t <= 10^4`). Raw values outside `[0, 1]` are errors; a decrease in
    /// `j` is only a warning because the harmonic counterexample family
    /// violates the nondecreasing-in-`j` assumption by design.
    pub fn validate(&self) -> ValidationReport {
        let mut rep = ValidationReport::default();
        let bad_param = match self {
            DiscoveryFamily::Constant { c } => !c.is_finite(),
            DiscoveryFamily::Power { alpha } => !alpha.is_finite(),
            DiscoveryFamily::HarmonicJ => false,
            DiscoveryFamily::LogHarmonic { m1 } => !m1.is_finite(),
            DiscoveryFamily::Table { values } => values.iter().any(|v| !v.is_finite()),
        };
        if bad_param {
            rep.error("discovery family has a non-finite parameter".into());
            return rep;
        }
        let ts = sample_grid_ts();
        let mut range_flagged = false;
        let mut mono_flagged = false;
        for &t in &ts {
            for j in 1..=32u64 {
                let raw = self.raw_prob(j, t);
                if !range_flagged && !(0.0..=1.0).contains(&raw) {
                    rep.error(format!(
                        "discovery family: D({j}, {t}) = {raw} outside [0, 1]"
                    ));
                    range_flagged = true;
                }
                if !mono_flagged && j < 32 {
                    let next = self.prob(j + 1, t);
                    if next < self.prob(j, t) - 1e-12 {
                        rep.warning(format!(
                            "discovery family: D(j, t) decreases in j at j={j}, t={t} \
                             (nondecreasing-in-j assumption does not hold)"
                        ));
                        mono_flagged = true;
                    }
                }
            }
            if range_flagged && mono_flagged {
                break;
            }
        }
        rep
    }
}

fn sample_grid_ts() -> Vec<u64> {
    let mut ts: Vec<u64> = (1..=64).collect();
    ts.extend([100, 200, 400, 800, 1600, 3200, 6400, 10_000]);
    ts
}

/// `zeta(alpha) - 1 = sum_{n>=2} n^-alpha` for `alpha > 1`, by direct
/// summation plus an Euler-Maclaurin tail.
pub(crate) fn zeta_minus_one(alpha: f64) -> f64 {
    debug_assert!(alpha > 1.0);
    let n0 = 100_000u64;
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for n in 2..=n0 {
        neumaier_add(&mut sum, &mut comp, (n as f64).powf(-alpha));
    }
    let a = (n0 + 1) as f64;
    // sum_{n >= n0+1} n^-alpha ~ integral + f(a)/2 - f'(a)/12.
    let tail = a.powf(1.0 - alpha) / (alpha - 1.0) + 0.5 * a.powf(-alpha)
        - (-alpha * a.powf(-alpha - 1.0)) / 12.0;
    sum + comp + tail
}
