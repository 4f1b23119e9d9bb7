//! Rate and latency arithmetic for the content-aware rate-splitting scheme.
//!
//! Everything here is stateless: common-stream rate, private-stream rate in
//! both its exact and conservative forms, the SIC power floor, and the
//! max-transmission-time latency of a request state.

use crate::content::RequestGroups;
use crate::error::{Error, Result};
use crate::geometry::ChannelState;
use crate::scalar::{exp2, log2, Real};

/// Power split of one transmit decision.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerBudget<F> {
    /// Total budget at the base station, watts.
    pub total: F,
    /// Common-stream power, watts.
    pub common: F,
    /// Private power per stream, watts.
    pub private: Vec<F>,
    /// SIC decoding margin, watts.
    pub sic_margin: F,
}

impl<F: Real> PowerBudget<F> {
    pub fn private_sum(&self) -> F {
        self.private.iter().copied().sum()
    }
}

/// Realized rates of one transmit decision, bit/s.
#[derive(Debug, Clone, PartialEq)]
pub struct RateAllocation<F> {
    /// Common-stream rate `R_0`.
    pub common_total: F,
    /// Common-rate share per stream.
    pub common_shares: Vec<F>,
    /// Private-stream rate per stream.
    pub private: Vec<F>,
    /// Share plus private rate per stream.
    pub content_rates: Vec<F>,
}

/// Noise-and-interference floors derived from a channel state and grouping.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseTerms<F> {
    /// `sigma^2 / h_0`, watts.
    pub common_floor: F,
    /// `N_i = sigma^2 / min cohort gain` per stream, watts.
    pub per_content_floor: Vec<F>,
    /// `Psi_i = P_pri + N_i` per stream, watts.
    pub interference_cap: Vec<F>,
}

impl<F: Real> NoiseTerms<F> {
    /// Floors for the content-grouped streams of `groups`.
    pub fn from_groups(
        channels: &ChannelState<F>,
        groups: &RequestGroups,
        noise: F,
        private_budget: F,
    ) -> Self {
        let cohort_gains: Vec<F> = groups
            .cohorts
            .iter()
            .map(|cohort| {
                cohort
                    .iter()
                    .map(|&u| channels.gains[u])
                    .fold(F::infinity(), F::min)
            })
            .collect();
        Self::from_stream_gains(&cohort_gains, channels.worst_gain, noise, private_budget)
    }

    /// Floors for arbitrary per-stream gains (one user per stream in the
    /// per-user RSMA layout).
    pub fn from_stream_gains(stream_gains: &[F], worst_gain: F, noise: F, private_budget: F) -> Self {
        let per_content_floor: Vec<F> = stream_gains.iter().map(|&g| noise / g).collect();
        let interference_cap = per_content_floor.iter().map(|&n| private_budget + n).collect();
        Self {
            common_floor: noise / worst_gain,
            per_content_floor,
            interference_cap,
        }
    }
}

/// Common-stream rate `B log2(1 + P0 / (sum_private + noise / h0))`.
pub fn common_rate<F: Real>(p0: F, private_sum: F, h0: F, noise: F, bandwidth: F) -> F {
    debug_assert!(p0 >= F::zero() && private_sum >= F::zero());
    debug_assert!(h0 > F::zero() && bandwidth > F::zero());
    if p0 == F::zero() {
        return F::zero();
    }
    bandwidth * log2(F::one() + p0 / (private_sum + noise / h0))
}

/// Private rate with the true interference sum: `B log2(1 + P_i / (other + floor))`.
pub fn private_rate_exact<F: Real>(p_i: F, other_private_sum: F, floor_i: F, bandwidth: F) -> F {
    debug_assert!(p_i >= F::zero() && other_private_sum >= F::zero() && floor_i >= F::zero());
    bandwidth * log2(F::one() + p_i / (other_private_sum + floor_i))
}

/// Private rate under the full-private-budget substitution:
/// `B log2(psi / (psi - P_i))` with `psi = P_pri + N_i`.
pub fn private_rate_conservative<F: Real>(p_i: F, psi_i: F, bandwidth: F) -> Result<F> {
    if p_i >= psi_i {
        return Err(Error::InfeasiblePower {
            power: p_i.to_f64().unwrap_or(f64::NAN),
            cap: psi_i.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(bandwidth * log2(psi_i / (psi_i - p_i)))
}

/// Inverse of [`private_rate_conservative`]: the minimum private power that
/// reaches `rate` under cap `psi`.
pub fn conservative_power_for_rate<F: Real>(rate: F, psi_i: F, bandwidth: F) -> F {
    if rate <= F::zero() {
        return F::zero();
    }
    psi_i * (F::one() - exp2(-rate / bandwidth))
}

/// Minimum common-stream power for SIC feasibility:
/// `P_b / 2 + (noise + theta) / h0`.
pub fn sic_min_common_power<F: Real>(p_b: F, noise: F, theta: F, h0: F) -> F {
    debug_assert!(h0 > F::zero());
    p_b / (F::one() + F::one()) + (noise + theta) / h0
}

/// Transmission time of the slowest stream: `max_i sizes_i / rates_i`.
/// A zero rate with positive size yields `+inf`.
pub fn state_latency<F: Real>(sizes: &[F], rates: &[F]) -> F {
    debug_assert_eq!(sizes.len(), rates.len());
    sizes
        .iter()
        .zip(rates)
        .map(|(&c, &r)| {
            if r > F::zero() {
                c / r
            } else {
                F::infinity()
            }
        })
        .fold(F::zero(), F::max)
}

/// Probability-weighted mean of per-state latencies.
pub fn average_latency<F: Real>(latencies: &[F], weights: &[F]) -> F {
    debug_assert_eq!(latencies.len(), weights.len());
    latencies
        .iter()
        .zip(weights)
        .map(|(&l, &w)| l * w)
        .sum()
}
