//! Calculators for every constant the learning algorithms and their
//! guarantees use: the explore budget `K0`, the known-pair thresholds `K1`
//! (both variants), the replay lengths `K2`/`K3`, the impossibility gap, and
//! the lower-bound step count.
//!
//! Formula-true values are astronomically large on purpose, so results are
//! [`BoundValue`]s: exact integers while they fit, an explicit log-space
//! overflow once they do not, and an explicit unreachable flag when no
//! finite value exists at all.

use crate::discovery::{neumaier_add, DiscoveryFamily, Divergence};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// An extended positive integer: exact, too large for `u64` (log carried
/// instead), or certifiably nonexistent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundValue {
    Finite {
        value: u64,
    },
    /// Larger than `u64::MAX`; `ln` is the natural log of the value.
    Overflow {
        ln: f64,
    },
    /// No finite value satisfies the defining inequality.
    Unreachable,
}

impl BoundValue {
    pub fn finite(value: u64) -> Self {
        BoundValue::Finite { value }
    }

    pub fn as_finite(&self) -> Option<u64> {
        match self {
            BoundValue::Finite { value } => Some(*value),
            _ => None,
        }
    }

    /// Natural log of the value (`inf` for unreachable).
    pub fn ln(&self) -> f64 {
        match self {
            BoundValue::Finite { value } => (*value as f64).ln(),
            BoundValue::Overflow { ln } => *ln,
            BoundValue::Unreachable => f64::INFINITY,
        }
    }

    /// `self <= other` under the natural extended order.
    pub fn le(&self, other: &BoundValue) -> bool {
        match (self, other) {
            (BoundValue::Finite { value: a }, BoundValue::Finite { value: b }) => a <= b,
            (_, BoundValue::Unreachable) => true,
            (BoundValue::Unreachable, _) => false,
            _ => self.ln() <= other.ln(),
        }
    }

    fn max(self, other: BoundValue) -> BoundValue {
        if self.le(&other) {
            other
        } else {
            self
        }
    }

    fn plus_one(self) -> BoundValue {
        match self {
            BoundValue::Finite { value } => match value.checked_add(1) {
                Some(v) => BoundValue::finite(v),
                None => BoundValue::Overflow {
                    ln: (u64::MAX as f64).ln(),
                },
            },
            other => other,
        }
    }
}

impl std::fmt::Display for BoundValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundValue::Finite { value } => write!(f, "{value}"),
            BoundValue::Overflow { ln } => write!(f, "exp({ln:.4})"),
            BoundValue::Unreachable => write!(f, "unreachable"),
        }
    }
}

#[derive(Debug, Error)]
pub enum TheoryError {
    #[error("invalid input: {0}")]
    BadInput(String),
    #[error("not applicable: {0}")]
    Inapplicable(String),
}

fn check_delta(delta: f64) -> Result<(), TheoryError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(TheoryError::BadInput(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    Ok(())
}

fn check_pos(name: &str, v: f64) -> Result<(), TheoryError> {
    if !(v.is_finite() && v > 0.0) {
        return Err(TheoryError::BadInput(format!(
            "{name} must be a positive real, got {v}"
        )));
    }
    Ok(())
}

fn check_count(name: &str, v: u64) -> Result<(), TheoryError> {
    if v == 0 {
        return Err(TheoryError::BadInput(format!("{name} must be at least 1")));
    }
    Ok(())
}

/// Ceil of a nonnegative f64 into the extended integer range.
fn ceil_bound(x: f64) -> BoundValue {
    let c = x.ceil();
    if c <= 0.0 {
        BoundValue::finite(0)
    } else if c < u64::MAX as f64 {
        BoundValue::finite(c as u64)
    } else {
        BoundValue::Overflow { ln: x.ln() }
    }
}

/// `ceil(x)^3` in the extended range.
fn ceil_cubed(x: f64) -> BoundValue {
    let c = x.ceil().max(0.0);
    // 2_642_245^3 is the largest cube below u64::MAX.
    if c <= 2_642_245.0 {
        let c = c as u128;
        BoundValue::finite((c * c * c) as u64)
    } else {
        BoundValue::Overflow { ln: 3.0 * c.ln() }
    }
}

/// Known-pair threshold for the fully-aware learner:
/// `max(ceil(4 |S| T Rmax / eps)^3, ceil(-6 ln^3(delta / (6 |S| |A|^2)))) + 1`.
pub fn k1_rmax(
    states: u64,
    actions: u64,
    horizon: u64,
    rmax: f64,
    eps: f64,
    delta: f64,
) -> Result<BoundValue, TheoryError> {
    check_count("|S|", states)?;
    check_count("|A|", actions)?;
    check_count("T", horizon)?;
    check_pos("Rmax", rmax)?;
    check_pos("eps", eps)?;
    check_delta(delta)?;
    let first = ceil_cubed(4.0 * states as f64 * horizon as f64 * rmax / eps);
    let arg = delta / (6.0 * states as f64 * (actions as f64).powi(2));
    let l = arg.ln();
    let second = ceil_bound(-6.0 * l * l * l);
    Ok(first.max(second).plus_one())
}

/// Known-pair threshold under guessed bounds `N` (states) and `k` (actions):
/// `max(ceil(4 N T Rmax / eps)^3, ceil(8 ln^3(8 N k / delta))) + 1`.
pub fn k1_urmax(
    n_bound: u64,
    k_bound: u64,
    horizon: u64,
    rmax: f64,
    eps: f64,
    delta: f64,
) -> Result<BoundValue, TheoryError> {
    check_count("N", n_bound)?;
    check_count("k", k_bound)?;
    check_count("T", horizon)?;
    check_pos("Rmax", rmax)?;
    check_pos("eps", eps)?;
    check_delta(delta)?;
    let first = ceil_cubed(4.0 * n_bound as f64 * horizon as f64 * rmax / eps);
    let l = (8.0 * n_bound as f64 * k_bound as f64 / delta).ln();
    let second = ceil_bound(8.0 * l * l * l);
    Ok(first.max(second).plus_one())
}

/// How far the direct partial-sum scan goes before switching to the
/// Euler-Maclaurin continuation. Crossings below this index are exactly
/// minimal; beyond it they are approximate (documented on [`k0`]).
pub const K0_DIRECT_CAP: u64 = 4_000_000;

/// Explore budget: minimal `M` with `sum_{t=1..M} D(1,t) >= ln(4N/delta)`,
/// or the unreachable flag when the family's total mass provably falls short.
///
/// Up to [`K0_DIRECT_CAP`] the crossing is located by direct compensated
/// summation and is exactly minimal. Beyond the cap the tail is continued by
/// an Euler-Maclaurin integral approximation, so the returned index (or its
/// log, once past `u64` range) is accurate to the approximation error rather
/// than exactly minimal.
pub fn k0(fam: &DiscoveryFamily, n_bound: u64, delta: f64) -> Result<BoundValue, TheoryError> {
    check_count("N", n_bound)?;
    check_delta(delta)?;
    Ok(crossing_time(fam, (4.0 * n_bound as f64 / delta).ln()))
}

/// Minimal integer `t >= 1` with `partial_sum(fam, 1, t) >= threshold`.
pub(crate) fn crossing_time(fam: &DiscoveryFamily, threshold: f64) -> BoundValue {
    if threshold <= 0.0 {
        return BoundValue::finite(1);
    }
    if let Some(mass) = fam.mass_j1() {
        if mass < threshold {
            return BoundValue::Unreachable;
        }
    }
    let scan_limit = match fam {
        DiscoveryFamily::Table { values } => K0_DIRECT_CAP.max(values.len() as u64),
        _ => K0_DIRECT_CAP,
    };
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for t in 1..=scan_limit {
        neumaier_add(&mut sum, &mut comp, fam.prob(1, t));
        if sum + comp >= threshold {
            return BoundValue::finite(t);
        }
    }
    continuation(fam, threshold, scan_limit, sum + comp)
}

/// Crossing search beyond the direct cap, from the exact prefix `s0` at `cap`.
fn continuation(fam: &DiscoveryFamily, threshold: f64, cap: u64, s0: f64) -> BoundValue {
    match fam {
        DiscoveryFamily::Constant { c } => {
            if *c <= 0.0 {
                return BoundValue::Unreachable;
            }
            let extra = ((threshold - s0) / c).ceil().max(0.0);
            let total = cap as f64 + extra;
            if total < u64::MAX as f64 {
                BoundValue::finite(cap + extra as u64)
            } else {
                BoundValue::Overflow { ln: total.ln() }
            }
        }
        DiscoveryFamily::Table { .. } => BoundValue::Unreachable,
        _ => em_bisection(fam, threshold, cap, s0),
    }
}

/// `D(1, t)` as a smooth function of real `t` (valid beyond the cap, where
/// every family's value is already below 1).
fn g_cont(fam: &DiscoveryFamily, t: f64) -> f64 {
    match fam {
        DiscoveryFamily::Power { alpha } => (t + 1.0).powf(-alpha),
        DiscoveryFamily::HarmonicJ => 1.0 / (t + 1.0),
        DiscoveryFamily::LogHarmonic { m1 } => m1 / (t * (t.ln() + 1.0)),
        _ => unreachable!("analytic continuation only used for smooth families"),
    }
}

/// Antiderivative of `g_cont` evaluated at `t = e^y`, written directly in
/// terms of `y` so it stays finite long past f64 range for `t`.
fn big_g_ln(fam: &DiscoveryFamily, y: f64) -> f64 {
    // ln(e^y + 1), stable for large y.
    let ln_t1 = if y > 40.0 { y } else { (y.exp() + 1.0).ln() };
    match fam {
        DiscoveryFamily::Power { alpha } => {
            if (*alpha - 1.0).abs() < 1e-12 {
                ln_t1
            } else {
                let e = (1.0 - alpha) * ln_t1;
                if e > 700.0 {
                    f64::INFINITY
                } else {
                    e.exp() / (1.0 - alpha)
                }
            }
        }
        DiscoveryFamily::HarmonicJ => ln_t1,
        DiscoveryFamily::LogHarmonic { m1 } => m1 * (y + 1.0).ln(),
        _ => unreachable!(),
    }
}

fn em_bisection(fam: &DiscoveryFamily, threshold: f64, cap: u64, s0: f64) -> BoundValue {
    let a = (cap + 1) as f64;
    let g_a = g_cont(fam, a);
    let base = big_g_ln(fam, a.ln());
    // S(t = e^y) ~ s0 + int_a^t g + (g(a) + g(t)) / 2.
    let s_of = |y: f64| -> f64 {
        let g_t = if y > 700.0 { 0.0 } else { g_cont(fam, y.exp()) };
        s0 + big_g_ln(fam, y) - base + 0.5 * (g_a + g_t)
    };
    let mut lo = a.ln();
    let mut hi = lo + 1.0;
    let mut guard = 0;
    while s_of(hi) < threshold {
        hi *= 2.0;
        guard += 1;
        if guard > 1100 || !hi.is_finite() {
            return BoundValue::Unreachable;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if s_of(mid) >= threshold {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if hi < (u64::MAX as f64).ln() - 1e-9 {
        BoundValue::finite(hi.exp().ceil() as u64)
    } else {
        BoundValue::Overflow { ln: hi }
    }
}

/// Replay lengths for one guessing round:
/// `K2 = ceil(2 (N k max(K1(T+1), K0))^{3/2} Rmax / eps)` and
/// `K3 = ceil((2 Rmax + 1) max((2 Rmax / eps)^3, 8 ln^3(4/delta)) / eps)`.
pub fn k2_k3(
    n_bound: u64,
    k_bound: u64,
    horizon: u64,
    rmax: f64,
    eps: f64,
    delta: f64,
    k0: &BoundValue,
) -> Result<(BoundValue, BoundValue), TheoryError> {
    check_count("N", n_bound)?;
    check_count("k", k_bound)?;
    check_count("T", horizon)?;
    check_pos("Rmax", rmax)?;
    check_pos("eps", eps)?;
    check_delta(delta)?;
    let k1_next = k1_urmax(n_bound, k_bound, horizon + 1, rmax, eps, delta)?;
    let m = k1_next.max(*k0);
    let k2 = match m {
        BoundValue::Unreachable => BoundValue::Unreachable,
        BoundValue::Finite { value } => {
            let base = n_bound as f64 * k_bound as f64 * value as f64;
            let raw = 2.0 * base.powf(1.5) * rmax / eps;
            ceil_bound(raw)
        }
        BoundValue::Overflow { ln } => BoundValue::Overflow {
            ln: 2.0f64.ln()
                + 1.5 * ((n_bound as f64).ln() + (k_bound as f64).ln() + ln)
                + rmax.ln()
                - eps.ln(),
        },
    };
    let l = (4.0 / delta).ln();
    let k3 = ceil_bound((2.0 * rmax + 1.0) * (2.0 * rmax / eps).powi(3).max(8.0 * l * l * l) / eps);
    Ok((k2, k3))
}

/// Inputs echoed back alongside a [`BoundSet`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub family: DiscoveryFamily,
    pub n_bound: u64,
    pub k_bound: u64,
    pub horizon: u64,
    pub rmax: f64,
    pub eps: f64,
    pub delta: f64,
}

/// All four constants for one parameterization, with inputs echoed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundSet {
    pub inputs: BoundInputs,
    pub k0: BoundValue,
    pub k1: BoundValue,
    pub k2: BoundValue,
    pub k3: BoundValue,
}

pub fn bound_set(
    fam: &DiscoveryFamily,
    n_bound: u64,
    k_bound: u64,
    horizon: u64,
    rmax: f64,
    eps: f64,
    delta: f64,
) -> Result<BoundSet, TheoryError> {
    let k0v = k0(fam, n_bound, delta)?;
    let k1v = k1_urmax(n_bound, k_bound, horizon, rmax, eps, delta)?;
    let (k2v, k3v) = k2_k3(n_bound, k_bound, horizon, rmax, eps, delta, &k0v)?;
    Ok(BoundSet {
        inputs: BoundInputs {
            family: fam.clone(),
            n_bound,
            k_bound,
            horizon,
            rmax,
            eps,
            delta,
        },
        k0: k0v,
        k1: k1v,
        k2: k2v,
        k3: k3v,
    })
}

/// Monotone functions accepted by [`lower_bound_steps`] and
/// [`k0_upper_bound_check`]: simple closed forms or a family's partial sums.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum GrowthBound {
    /// `f(T) = m1 * T + m2`.
    Linear { m1: f64, m2: f64 },
    /// `f(T) = m1 * ln(T + shift) + m2`.
    Log { m1: f64, shift: f64, m2: f64 },
    /// `f(T) = m1 * ln(ln T + 1) + m2`.
    LogLog { m1: f64, m2: f64 },
    /// `f(T) = sum_{t=1..T} D(1, t)`.
    PartialSum(DiscoveryFamily),
}

impl GrowthBound {
    pub fn eval(&self, t: u64) -> f64 {
        let tf = t as f64;
        match self {
            GrowthBound::Linear { m1, m2 } => m1 * tf + m2,
            GrowthBound::Log { m1, shift, m2 } => m1 * (tf + shift).ln() + m2,
            GrowthBound::LogLog { m1, m2 } => m1 * (tf.ln() + 1.0).ln() + m2,
            GrowthBound::PartialSum(fam) => fam.partial_sum(1, t),
        }
    }

    fn check_increasing(&self) -> Result<(), TheoryError> {
        let m1 = match self {
            GrowthBound::Linear { m1, .. }
            | GrowthBound::Log { m1, .. }
            | GrowthBound::LogLog { m1, .. } => *m1,
            GrowthBound::PartialSum(_) => return Ok(()),
        };
        if m1 <= 0.0 {
            return Err(TheoryError::BadInput(format!(
                "growth bound must be increasing (m1 = {m1})"
            )));
        }
        if let GrowthBound::Log { shift, .. } = self {
            if *shift < 0.0 {
                return Err(TheoryError::BadInput(format!(
                    "log shift must be >= 0, got {shift}"
                )));
            }
        }
        Ok(())
    }

    /// Minimal integer `t >= 1` with `f(t) >= target`, by doubling plus
    /// integer bisection; log-space solve once past `u64` range.
    fn crossing(&self, target: f64) -> BoundValue {
        if let GrowthBound::PartialSum(fam) = self {
            return crossing_time(fam, target);
        }
        if self.eval(1) >= target {
            return BoundValue::finite(1);
        }
        let mut hi = 1u64;
        loop {
            match hi.checked_mul(2) {
                Some(next) if next < u64::MAX / 2 => hi = next,
                _ => return self.ln_space_crossing(target),
            }
            if self.eval(hi) >= target {
                break;
            }
        }
        let mut lo = hi / 2;
        while lo + 1 < hi {
            let mid = lo + (hi - lo) / 2;
            if self.eval(mid) >= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        BoundValue::finite(hi)
    }

    fn ln_space_crossing(&self, target: f64) -> BoundValue {
        match self {
            GrowthBound::Linear { m1, m2 } => {
                let t = (target - m2) / m1;
                BoundValue::Overflow { ln: t.ln() }
            }
            GrowthBound::Log { m1, m2, .. } => {
                // Shift is negligible at this magnitude.
                BoundValue::Overflow {
                    ln: (target - m2) / m1,
                }
            }
            GrowthBound::LogLog { m1, m2 } => BoundValue::Overflow {
                ln: ((target - m2) / m1).exp() - 1.0,
            },
            GrowthBound::PartialSum(_) => unreachable!(),
        }
    }
}

/// Minimal integer `t` with `f(t) >= c ln(delta) / ln(1 - c)`: the smallest
/// number of explore steps not ruled out by the lower-bound argument.
pub fn lower_bound_steps(f: &GrowthBound, c: f64, delta: f64) -> Result<BoundValue, TheoryError> {
    if !(c > 0.0 && c < 1.0) {
        return Err(TheoryError::BadInput(format!(
            "c must lie in (0, 1), got {c}"
        )));
    }
    check_delta(delta)?;
    f.check_increasing()?;
    let target = c * delta.ln() / (1.0 - c).ln();
    Ok(f.crossing(target))
}

/// Output of [`impossibility_gap`]: the reward difference no learner can
/// close, together with the quantities it is built from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    /// `sup_t D(1, t)`.
    pub c1: f64,
    /// `sum_t D(1, t)`.
    pub total_mass: f64,
    /// Probability floor on never discovering: `(1 - c1)^(total_mass / c1)`,
    /// 1 when `c1 = 0`.
    pub d: f64,
    /// `d * (r2 - r1)`.
    pub gap: f64,
}

/// Impossibility gap for a convergent family: with probability at least `d`
/// nothing is ever discovered, so no algorithm gets within `d * (r2 - r1)`
/// of optimal. Divergent (or uncertifiable) families are rejected.
pub fn impossibility_gap(fam: &DiscoveryFamily, r1: f64, r2: f64) -> Result<Gap, TheoryError> {
    if !(r1.is_finite() && r2.is_finite() && r1 >= 0.0) {
        return Err(TheoryError::BadInput(format!(
            "rewards must be finite nonnegative, got {r1}, {r2}"
        )));
    }
    if r2 <= r1 {
        return Err(TheoryError::BadInput(format!(
            "need r2 > r1, got r1 = {r1}, r2 = {r2}"
        )));
    }
    let class = fam.divergence_class().class;
    match class {
        Divergence::Convergent => {}
        Divergence::UnknownNumeric => {
            return Err(TheoryError::Inapplicable(
                "cannot certify the family's partial sums converge".into(),
            ))
        }
        _ => {
            return Err(TheoryError::Inapplicable(format!(
                "family partial sums diverge ({class}), discovery is eventually certain"
            )))
        }
    }
    let total_mass = fam
        .mass_j1()
        .expect("convergent families carry an analytic total mass");
    let c1 = fam.sup_prob_j1();
    let d = if c1 == 0.0 {
        1.0
    } else {
        (1.0 - c1).powf(total_mass / c1)
    };
    Ok(Gap {
        c1,
        total_mass,
        d,
        gap: d * (r2 - r1),
    })
}

/// True iff `k0(fam, N, delta)` is at most the crossing of `f` at
/// `ln(4N/delta)` — the Proposition's upper bound, valid when `f`
/// lower-bounds the family's partial sums.
pub fn k0_upper_bound_check(
    fam: &DiscoveryFamily,
    f: &GrowthBound,
    n_bound: u64,
    delta: f64,
) -> Result<bool, TheoryError> {
    check_count("N", n_bound)?;
    check_delta(delta)?;
    f.check_increasing()?;
    let k0v = k0(fam, n_bound, delta)?;
    let threshold = (4.0 * n_bound as f64 / delta).ln();
    let bound = f.crossing(threshold);
    Ok(k0v.le(&bound))
}

/// Numeric side condition for [`k0_upper_bound_check`]: does `f(t)` stay at
/// or below the family's partial sums for all `t <= t_max`?
pub fn verify_lower_bound(fam: &DiscoveryFamily, f: &GrowthBound, t_max: u64) -> bool {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for t in 1..=t_max {
        neumaier_add(&mut sum, &mut comp, fam.prob(1, t));
        if f.eval(t) > sum + comp + 1e-9 {
            return false;
        }
    }
    true
}
