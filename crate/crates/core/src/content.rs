//! Zipf-distributed content requests, joint request states, and the
//! distinct-content grouping that drives stream sharing.

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// The content library.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog<F> {
    /// Data size of each content, bits.
    pub sizes: Vec<F>,
}

impl<F: Real> Catalog<F> {
    pub fn new(sizes: Vec<F>) -> Self {
        assert!(!sizes.is_empty(), "catalog must hold at least one content");
        assert!(sizes.iter().all(|s| *s > F::zero()), "content sizes must be positive");
        Self { sizes }
    }

    /// Sizes drawn uniformly on `[min_bits, max_bits]`, one per content.
    pub fn uniform_random<R: Rng>(rng: &mut R, count: usize, min_bits: f64, max_bits: f64) -> Self {
        assert!(count >= 1 && min_bits > 0.0 && max_bits >= min_bits);
        let sizes = (0..count).map(|_| lit(rng.gen_range(min_bits..=max_bits))).collect();
        Self::new(sizes)
    }

    pub fn count(&self) -> usize {
        self.sizes.len()
    }
}

/// Per-user request probabilities over the catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct RequestPmf<F> {
    pub probs: Vec<F>,
    pub zipf_exponent: F,
}

/// Joint request state: one content index per user.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RequestState {
    pub requests: Vec<usize>,
}

/// Distinct requested contents and the user cohort behind each one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestGroups {
    /// Distinct content indices in first-appearance order.
    pub distinct: Vec<usize>,
    /// `cohorts[s]` lists the users requesting `distinct[s]`, ascending.
    pub cohorts: Vec<Vec<usize>>,
}

/// Zipf pmf over `count` ranks: `p_i` proportional to `(i+1)^-exponent`.
pub fn zipf_pmf<F: Real>(count: usize, exponent: F) -> RequestPmf<F> {
    assert!(count >= 1);
    assert!(exponent >= F::zero());
    let mut probs: Vec<F> = (0..count)
        .map(|i| lit::<F>((i + 1) as f64).powf(-exponent))
        .collect();
    let total: F = probs.iter().copied().sum();
    for p in &mut probs {
        *p /= total;
    }
    RequestPmf { probs, zipf_exponent: exponent }
}

/// Probability of a joint request state under i.i.d. per-user requests.
pub fn state_probability<F: Real>(state: &RequestState, pmf: &RequestPmf<F>) -> F {
    state
        .requests
        .iter()
        .fold(F::one(), |acc, &m| acc * pmf.probs[m])
}

/// All `count^num_users` joint states in lexicographic order.
///
/// Fails when the state count exceeds `budget`, signalling the caller to fall
/// back to Monte Carlo sampling.
pub fn enumerate_states(
    count: usize,
    num_users: usize,
    budget: u128,
) -> Result<impl Iterator<Item = RequestState>> {
    let states = (count as u128).checked_pow(num_users as u32);
    match states {
        Some(n) if n <= budget => {}
        _ => {
            return Err(Error::EnumerationBudget {
                states: states.unwrap_or(u128::MAX),
                budget,
            })
        }
    }
    let mut cur = vec![0usize; num_users];
    let mut done = false;
    Ok(std::iter::from_fn(move || {
        if done {
            return None;
        }
        let out = RequestState { requests: cur.clone() };
        // Odometer increment, most significant digit first.
        let mut k = num_users;
        loop {
            if k == 0 {
                done = true;
                break;
            }
            k -= 1;
            cur[k] += 1;
            if cur[k] < count {
                break;
            }
            cur[k] = 0;
        }
        Some(out)
    }))
}

/// One joint state sampled i.i.d. from the pmf.
pub fn sample_state<F: Real, R: Rng>(
    rng: &mut R,
    pmf: &RequestPmf<F>,
    num_users: usize,
) -> RequestState {
    let requests = (0..num_users)
        .map(|_| {
            let u: F = lit(rng.gen_range(0.0..1.0));
            let mut acc = F::zero();
            for (i, p) in pmf.probs.iter().enumerate() {
                acc += *p;
                if u < acc {
                    return i;
                }
            }
            pmf.probs.len() - 1
        })
        .collect();
    RequestState { requests }
}

/// Distinct contents (first-appearance order) and their requesting cohorts.
pub fn group_requests(state: &RequestState) -> RequestGroups {
    let mut distinct: Vec<usize> = Vec::new();
    let mut cohorts: Vec<Vec<usize>> = Vec::new();
    for (user, &content) in state.requests.iter().enumerate() {
        match distinct.iter().position(|&c| c == content) {
            Some(s) => cohorts[s].push(user),
            None => {
                distinct.push(content);
                cohorts.push(vec![user]);
            }
        }
    }
    RequestGroups { distinct, cohorts }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zipf_zero_exponent_is_uniform() {
        let pmf = zipf_pmf::<f64>(30, 0.0);
        for p in &pmf.probs {
            assert_relative_eq!(*p, 1.0 / 30.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn zipf_two_contents_exponent_one() {
        let pmf = zipf_pmf::<f64>(2, 1.0);
        assert_relative_eq!(pmf.probs[0], 2.0 / 3.0, max_relative = 1e-12);
        assert_relative_eq!(pmf.probs[1], 1.0 / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn state_probability_uniform_two_by_two() {
        let pmf = zipf_pmf::<f64>(2, 0.0);
        for s in enumerate_states(2, 2, 100).unwrap() {
            assert_relative_eq!(state_probability(&s, &pmf), 0.25, max_relative = 1e-12);
        }
    }

    #[test]
    fn state_probability_single_user_degenerates_to_pmf() {
        let pmf = zipf_pmf::<f64>(5, 0.8);
        let s = RequestState { requests: vec![3] };
        assert_eq!(state_probability(&s, &pmf), pmf.probs[3]);
    }

    #[test]
    fn enumeration_counts_and_order() {
        let states: Vec<_> = enumerate_states(2, 2, 100).unwrap().collect();
        let reqs: Vec<_> = states.iter().map(|s| s.requests.clone()).collect();
        assert_eq!(reqs, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(enumerate_states(3, 2, 100).unwrap().count(), 9);
        assert_eq!(enumerate_states(30, 4, 1_000_000).unwrap().count(), 810_000);
    }

    #[test]
    fn enumeration_budget_signalled() {
        assert!(matches!(
            enumerate_states(30, 4, 10_000),
            Err(crate::error::Error::EnumerationBudget { .. })
        ));
    }

    #[test]
    fn probabilities_sum_to_one_over_enumeration() {
        for count in 1..=5usize {
            for users in 1..=4usize {
                let pmf = zipf_pmf::<f64>(count, 0.7);
                let total: f64 = enumerate_states(count, users, 10_000)
                    .unwrap()
                    .map(|s| state_probability(&s, &pmf))
                    .sum();
                assert_relative_eq!(total, 1.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn sampling_deterministic_and_concentrated_at_large_exponent() {
        let pmf = zipf_pmf::<f64>(10, 50.0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = sample_state(&mut rng, &pmf, 200);
        assert!(s.requests.iter().all(|&m| m == 0));

        let pmf = zipf_pmf::<f64>(6, 0.5);
        let a = sample_state(&mut ChaCha8Rng::seed_from_u64(1), &pmf, 16);
        let b = sample_state(&mut ChaCha8Rng::seed_from_u64(1), &pmf, 16);
        assert_eq!(a, b);
    }

    #[test]
    fn sampling_frequency_matches_pmf() {
        let pmf = zipf_pmf::<f64>(2, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 100_000;
        let s = sample_state(&mut rng, &pmf, n);
        let zeros = s.requests.iter().filter(|&&m| m == 0).count();
        assert!((zeros as f64 / n as f64 - 2.0 / 3.0).abs() < 0.01);
    }

    #[test]
    fn sampling_chi_square_sanity() {
        let pmf = zipf_pmf::<f64>(5, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 100_000usize;
        let s = sample_state(&mut rng, &pmf, n);
        let mut counts = [0usize; 5];
        for &m in &s.requests {
            counts[m] += 1;
        }
        let chi2: f64 = counts
            .iter()
            .zip(&pmf.probs)
            .map(|(&c, &p)| {
                let e = p * n as f64;
                (c as f64 - e).powi(2) / e
            })
            .sum();
        // 4 dof; 27.9 is far beyond the 99.9th percentile.
        assert!(chi2 < 27.9, "chi2 = {chi2}");
    }

    #[test]
    fn grouping_examples() {
        let g = group_requests(&RequestState { requests: vec![1, 1, 2, 1] });
        assert_eq!(g.distinct, vec![1, 2]);
        assert_eq!(g.cohorts, vec![vec![0, 1, 3], vec![2]]);

        let g = group_requests(&RequestState { requests: vec![5, 5, 5] });
        assert_eq!(g.distinct, vec![5]);
        assert_eq!(g.cohorts, vec![vec![0, 1, 2]]);

        let g = group_requests(&RequestState { requests: vec![4, 2, 9] });
        assert_eq!(g.distinct.len(), 3);
        assert!(g.cohorts.iter().all(|c| c.len() == 1));
    }

    proptest! {
        #[test]
        fn grouping_roundtrip(reqs in proptest::collection::vec(0usize..8, 1..12)) {
            let state = RequestState { requests: reqs.clone() };
            let g = group_requests(&state);
            // Cohorts partition the user set.
            let mut seen = vec![false; reqs.len()];
            let mut rebuilt = vec![usize::MAX; reqs.len()];
            for (s, cohort) in g.cohorts.iter().enumerate() {
                for &u in cohort {
                    prop_assert!(!seen[u]);
                    seen[u] = true;
                    rebuilt[u] = g.distinct[s];
                }
            }
            prop_assert!(seen.iter().all(|&s| s));
            prop_assert_eq!(rebuilt, reqs);
        }

        #[test]
        fn zipf_nonincreasing(count in 1usize..40, exp in 0.0f64..3.0) {
            let pmf = zipf_pmf::<f64>(count, exp);
            for w in pmf.probs.windows(2) {
                prop_assert!(w[0] >= w[1] - 1e-15);
            }
            let total: f64 = pmf.probs.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }
    }
}
