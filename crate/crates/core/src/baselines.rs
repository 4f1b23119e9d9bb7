//! Comparison schemes sharing the per-state solver machinery: per-user
//! rate-splitting, NOMA over content-grouped streams, and the fixed antenna.

use std::fmt;
use std::str::FromStr;

use crate::content::{group_requests, Catalog, RequestState};
use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::rates::{PowerBudget, RateAllocation};
use crate::scalar::{exp2, lit, log2, Real};
use crate::solver::{
    golden_section_min, LinkEnv, PositionView, SolverConfig, StateSolution, StreamProblem,
};

/// The four evaluated transmission schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeId {
    CarpJo,
    TraditionalRsma,
    Noma,
    FixedAntenna,
}

impl SchemeId {
    pub const ALL: [SchemeId; 4] = [
        SchemeId::CarpJo,
        SchemeId::TraditionalRsma,
        SchemeId::Noma,
        SchemeId::FixedAntenna,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SchemeId::CarpJo => "carp_jo",
            SchemeId::TraditionalRsma => "traditional_rsma",
            SchemeId::Noma => "noma",
            SchemeId::FixedAntenna => "fixed_antenna",
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "carp_jo" => Ok(SchemeId::CarpJo),
            "traditional_rsma" => Ok(SchemeId::TraditionalRsma),
            "noma" => Ok(SchemeId::Noma),
            "fixed_antenna" => Ok(SchemeId::FixedAntenna),
            other => Err(Error::Config {
                field: "schemes".into(),
                reason: format!(
                    "unknown scheme `{other}` (expected carp_jo, traditional_rsma, noma, \
                     fixed_antenna)"
                ),
            }),
        }
    }
}

/// SIC decoding order of the NOMA baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NomaDecodeOrder {
    /// Weakest cohort decoded first everywhere (standard downlink order).
    AscendingMinGain,
    /// Reversed order, for sensitivity checks.
    DescendingMinGain,
}

/// Standard per-user rate-splitting: one private stream per user, no content
/// grouping, antenna position optimized.
pub fn solve_traditional_rsma<F: Real>(
    state: &RequestState,
    users: &[Point3<F>],
    env: &LinkEnv<F>,
    catalog: &Catalog<F>,
    cfg: &SolverConfig<F>,
) -> Result<StateSolution<F>> {
    StreamProblem::per_user(env, users, state, catalog).carp_jo(cfg)
}

/// Content-aware rate-splitting with the antenna pinned at the waveguide
/// origin.
pub fn solve_fixed_antenna<F: Real>(
    state: &RequestState,
    users: &[Point3<F>],
    env: &LinkEnv<F>,
    catalog: &Catalog<F>,
    cfg: &SolverConfig<F>,
) -> Result<StateSolution<F>> {
    let groups = group_requests(state);
    let problem = StreamProblem::content_grouped(env, users, &groups, catalog);
    problem.solve_resource_alloc(F::zero(), cfg)
}

/// Stream indices in SIC decoding order for the given per-stream gains.
fn noma_order<F: Real>(gains: &[F], order: NomaDecodeOrder) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..gains.len()).collect();
    idx.sort_by(|&a, &b| {
        let cmp = gains[a].partial_cmp(&gains[b]).unwrap().then(a.cmp(&b));
        match order {
            NomaDecodeOrder::AscendingMinGain => cmp,
            NomaDecodeOrder::DescendingMinGain => cmp.reverse(),
        }
    });
    idx
}

/// Minimal powers meeting per-stream rate targets `c_i / mu` under the SIC
/// chain, built back-to-front from the last decoded stream.
fn noma_min_powers<F: Real>(
    mu: F,
    sizes: &[F],
    gains: &[F],
    order: &[usize],
    noise: F,
    bandwidth: F,
) -> Vec<F> {
    let mut powers = vec![F::zero(); sizes.len()];
    let mut later_sum = F::zero();
    for &s in order.iter().rev() {
        let factor = exp2(sizes[s] / (mu * bandwidth)) - F::one();
        let p = factor * (later_sum + noise / gains[s]);
        powers[s] = p;
        later_sum += p;
    }
    powers
}

/// Rates realized by `powers` at decoding order `order`.
fn noma_rates<F: Real>(
    powers: &[F],
    gains: &[F],
    order: &[usize],
    noise: F,
    bandwidth: F,
) -> Vec<F> {
    let mut rates = vec![F::zero(); powers.len()];
    let mut later_sum = F::zero();
    for &s in order.iter().rev() {
        rates[s] = bandwidth * log2(F::one() + powers[s] * gains[s] / (gains[s] * later_sum + noise));
        later_sum += powers[s];
    }
    rates
}

/// Max-min latency power control for one position: bisection on the latency
/// bound with the closed-form SIC power recursion.
fn noma_power_alloc<F: Real>(
    view: &PositionView<F>,
    sizes: &[F],
    p_b: F,
    noise: F,
    bandwidth: F,
    mu_tol: F,
    order_mode: NomaDecodeOrder,
) -> (Vec<F>, F) {
    let order = noma_order(&view.stream_gains, order_mode);
    let two = lit::<F>(2.0);
    let feasible = |mu: F| -> (bool, Vec<F>) {
        let powers = noma_min_powers(mu, sizes, &view.stream_gains, &order, noise, bandwidth);
        let total: F = powers.iter().copied().sum();
        (total <= p_b, powers)
    };

    // A dedicated full-power stream bounds every latency from below.
    let mut mu_low = F::zero();
    for (&c, &g) in sizes.iter().zip(&view.stream_gains) {
        mu_low = mu_low.max(c / (bandwidth * (F::one() + p_b * g / noise).log2()));
    }
    let (ok, powers) = feasible(mu_low);
    if ok {
        return (powers, mu_low);
    }

    let mut mu_high = mu_low;
    let mut witness;
    loop {
        mu_high = mu_high * two;
        let (ok, powers) = feasible(mu_high);
        if ok {
            witness = powers;
            break;
        }
    }
    let mut mu_low = mu_low;
    while mu_high - mu_low > mu_tol * mu_high {
        let mid = (mu_low + mu_high) / two;
        let (ok, powers) = feasible(mid);
        if ok {
            mu_high = mid;
            witness = powers;
        } else {
            mu_low = mid;
        }
    }
    (witness, mu_high)
}

/// Latency of fixed powers at a candidate position (decoding order follows
/// the candidate's gains).
fn noma_latency_at<F: Real>(
    view: &PositionView<F>,
    powers: &[F],
    sizes: &[F],
    noise: F,
    bandwidth: F,
    order_mode: NomaDecodeOrder,
) -> F {
    let order = noma_order(&view.stream_gains, order_mode);
    let rates = noma_rates(powers, &view.stream_gains, &order, noise, bandwidth);
    crate::rates::state_latency(sizes, &rates)
}

/// NOMA over content-grouped streams with golden-section antenna positioning.
pub fn solve_noma<F: Real>(
    state: &RequestState,
    users: &[Point3<F>],
    env: &LinkEnv<F>,
    catalog: &Catalog<F>,
    cfg: &SolverConfig<F>,
) -> Result<StateSolution<F>> {
    solve_noma_with_order(state, users, env, catalog, cfg, NomaDecodeOrder::AscendingMinGain)
}

pub fn solve_noma_with_order<F: Real>(
    state: &RequestState,
    users: &[Point3<F>],
    env: &LinkEnv<F>,
    catalog: &Catalog<F>,
    cfg: &SolverConfig<F>,
    order_mode: NomaDecodeOrder,
) -> Result<StateSolution<F>> {
    let groups = group_requests(state);
    let problem = StreamProblem::content_grouped(env, users, &groups, catalog);
    let noise = env.radio.noise_power;
    let bw = env.radio.bandwidth;
    let len = env.geom.waveguide_length;

    let mean_x = users.iter().map(|u| u.x).sum::<F>() / lit::<F>(users.len() as f64);
    let mut x_cur = mean_x.max(F::zero()).min(len);

    let mut best: Option<(F, F, Vec<F>)> = None; // (mu, x, powers)
    let mut trace = Vec::new();
    let mut iterations = 0usize;

    for t in 1..=cfg.max_outer_iters {
        iterations = t;
        let view = problem.view_at(x_cur)?;
        let (powers, mu) = noma_power_alloc(
            &view,
            &problem.sizes,
            env.power_budget,
            noise,
            bw,
            cfg.mu_tol,
            order_mode,
        );
        if best.as_ref().map_or(true, |(b, _, _)| mu < *b) {
            best = Some((mu, x_cur, powers));
        }
        let l_t = best.as_ref().unwrap().0;
        trace.push(l_t);

        // Antenna sweep with the incumbent powers held fixed.
        let inc_powers = best.as_ref().unwrap().2.clone();
        let eval = |x: F| -> F {
            match problem.view_at(x) {
                Ok(v) => noma_latency_at(&v, &inc_powers, &problem.sizes, noise, bw, order_mode),
                Err(_) => F::infinity(),
            }
        };
        let segs = cfg.golden_subintervals.max(1);
        let seg_w = len / lit::<F>(segs as f64);
        let mut cand_x = F::zero();
        let mut cand_mu = eval(F::zero());
        for s in 0..segs {
            let a = seg_w * lit::<F>(s as f64);
            let b = (a + seg_w).min(len);
            let (x, fx) = golden_section_min(&eval, a, b, cfg.antenna_tol, 64);
            if fx < cand_mu || (fx == cand_mu && x < cand_x) {
                cand_x = x;
                cand_mu = fx;
            }
        }
        {
            let fx = eval(len);
            if fx < cand_mu {
                cand_x = len;
                cand_mu = fx;
            }
        }
        if cand_mu < best.as_ref().unwrap().0 {
            let powers = best.as_ref().unwrap().2.clone();
            best = Some((cand_mu, cand_x, powers));
        }
        let l_prime = best.as_ref().unwrap().0;
        trace.push(l_prime);

        x_cur = best.as_ref().unwrap().1;
        if (l_t - l_prime).abs() <= cfg.outer_tol {
            break;
        }
    }

    let (_, x, powers) = best.unwrap();
    let view = problem.view_at(x)?;
    let order = noma_order(&view.stream_gains, order_mode);
    let rates = noma_rates(&powers, &view.stream_gains, &order, noise, bw);
    let latency = crate::rates::state_latency(&problem.sizes, &rates);
    let n = problem.num_streams();

    Ok(StateSolution {
        antenna_x: x,
        powers: PowerBudget {
            total: env.power_budget,
            common: F::zero(),
            private: powers,
            sic_margin: env.theta,
        },
        rates: RateAllocation {
            common_total: F::zero(),
            common_shares: vec![F::zero(); n],
            private: rates.clone(),
            content_rates: rates,
        },
        latency,
        iterations,
        feasible: true,
        mu_trace: trace,
    })
}

/// Aggregate rate seen by the users: each user counts the full rate of the
/// stream carrying its content.
pub fn sum_rate<F: Real>(sol: &StateSolution<F>, cohorts: &[Vec<usize>]) -> Result<F> {
    if !sol.feasible {
        return Err(Error::InfeasibleSolution {
            context: "sum rate undefined".into(),
        });
    }
    Ok(cohorts
        .iter()
        .zip(&sol.rates.content_rates)
        .map(|(cohort, &r)| lit::<F>(cohort.len() as f64) * r)
        .sum())
}

/// Solves `state` under `scheme`; returns the solution and the per-stream
/// user cohorts needed for user-level metrics.
pub fn solve_scheme<F: Real>(
    scheme: SchemeId,
    state: &RequestState,
    users: &[Point3<F>],
    env: &LinkEnv<F>,
    catalog: &Catalog<F>,
    cfg: &SolverConfig<F>,
) -> Result<(StateSolution<F>, Vec<Vec<usize>>)> {
    match scheme {
        SchemeId::CarpJo => {
            let groups = group_requests(state);
            let problem = StreamProblem::content_grouped(env, users, &groups, catalog);
            let sol = problem.carp_jo(cfg)?;
            Ok((sol, groups.cohorts))
        }
        SchemeId::TraditionalRsma => {
            let sol = solve_traditional_rsma(state, users, env, catalog, cfg)?;
            let cohorts = (0..state.requests.len()).map(|u| vec![u]).collect();
            Ok((sol, cohorts))
        }
        SchemeId::Noma => {
            let groups = group_requests(state);
            let sol = solve_noma(state, users, env, catalog, cfg)?;
            Ok((sol, groups.cohorts))
        }
        SchemeId::FixedAntenna => {
            let groups = group_requests(state);
            let sol = solve_fixed_antenna(state, users, env, catalog, cfg)?;
            Ok((sol, groups.cohorts))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Geometry, RadioConstants};
    use crate::solver::audit_constraints;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn env() -> LinkEnv<f64> {
        LinkEnv {
            geom: Geometry::new(120.0, 40.0, 3.0, 120.0),
            radio: RadioConstants::new(28.0e9, 1.0e6, 1.0e-12),
            power_budget: 0.316,
            theta: 1.0e-12,
        }
    }

    fn random_users(rng: &mut ChaCha8Rng, n: usize) -> Vec<Point3<f64>> {
        crate::geometry::place_users(rng, &Geometry::new(120.0, 40.0, 3.0, 120.0), n)
    }

    #[test]
    fn scheme_ids_roundtrip() {
        for s in SchemeId::ALL {
            assert_eq!(s.as_str().parse::<SchemeId>().unwrap(), s);
        }
        assert!("sdma".parse::<SchemeId>().is_err());
    }

    #[test]
    fn traditional_equals_carp_when_requests_distinct() {
        let e = env();
        let cfg = SolverConfig::for_budget(e.power_budget);
        let catalog = Catalog::new(vec![4.0e6, 9.0e6, 2.0e6, 12.0e6]);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..5 {
            let users = random_users(&mut rng, 3);
            let state = RequestState { requests: vec![2, 0, 3] };
            let (carp, _) = solve_scheme(SchemeId::CarpJo, &state, &users, &e, &catalog, &cfg).unwrap();
            let (trad, _) =
                solve_scheme(SchemeId::TraditionalRsma, &state, &users, &e, &catalog, &cfg).unwrap();
            assert_relative_eq!(carp.latency, trad.latency, max_relative = 1e-6);
        }
    }

    #[test]
    fn single_user_all_schemes_agree_on_structure() {
        let e = env();
        let cfg = SolverConfig::for_budget(e.power_budget);
        let catalog = Catalog::new(vec![8.0e6]);
        let users = [Point3::new(70.0, -10.0, 0.0)];
        let state = RequestState { requests: vec![0] };
        let (carp, _) = solve_scheme(SchemeId::CarpJo, &state, &users, &e, &catalog, &cfg).unwrap();
        let (trad, _) =
            solve_scheme(SchemeId::TraditionalRsma, &state, &users, &e, &catalog, &cfg).unwrap();
        assert_relative_eq!(carp.latency, trad.latency, max_relative = 1e-6);
    }

    #[test]
    fn shared_content_never_worse_under_grouping() {
        let e = env();
        let cfg = SolverConfig::for_budget(e.power_budget);
        let catalog = Catalog::new(vec![10.0e6, 5.0e6]);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut carp_total = 0.0;
        let mut trad_total = 0.0;
        for _ in 0..20 {
            let users = random_users(&mut rng, 3);
            let state = RequestState { requests: vec![0, 0, 0] };
            let (carp, _) = solve_scheme(SchemeId::CarpJo, &state, &users, &e, &catalog, &cfg).unwrap();
            let (trad, _) =
                solve_scheme(SchemeId::TraditionalRsma, &state, &users, &e, &catalog, &cfg).unwrap();
            carp_total += carp.latency;
            trad_total += trad.latency;
        }
        assert!(carp_total < trad_total);
    }

    #[test]
    fn noma_single_content_is_dedicated_stream() {
        let e = env();
        let cfg = SolverConfig::for_budget(e.power_budget);
        let catalog = Catalog::new(vec![6.0e6]);
        let users = [Point3::new(50.0, 5.0, 0.0), Point3::new(80.0, -2.0, 0.0)];
        let state = RequestState { requests: vec![0, 0] };
        let sol = solve_noma(&state, &users, &e, &catalog, &cfg).unwrap();

        // Whole budget on the single stream at the worst cohort gain.
        let view = StreamProblem::content_grouped(&e, &users, &group_requests(&state), &catalog)
            .view_at(sol.antenna_x)
            .unwrap();
        let expect =
            e.radio.bandwidth * (1.0 + e.power_budget * view.stream_gains[0] / e.radio.noise_power).log2();
        assert_relative_eq!(sol.rates.content_rates[0], expect, max_relative = 1e-5);
        assert_relative_eq!(sol.latency, 6.0e6 / expect, max_relative = 1e-5);
    }

    #[test]
    fn noma_two_equal_streams_balance_latency() {
        let e = env();
        let cfg = SolverConfig::for_budget(e.power_budget);
        let catalog = Catalog::new(vec![5.0e6, 5.0e6]);
        // Symmetric users so both cohorts share the same gain at the center.
        let users = [Point3::new(40.0, 10.0, 0.0), Point3::new(80.0, 10.0, 0.0)];
        let state = RequestState { requests: vec![0, 1] };
        let sol = solve_noma(&state, &users, &e, &catalog, &cfg).unwrap();
        let l0 = catalog.sizes[0] / sol.rates.content_rates[0];
        let l1 = catalog.sizes[1] / sol.rates.content_rates[1];
        assert_relative_eq!(l0, l1, max_relative = 1e-4);
        assert!(sol.powers.private_sum() <= e.power_budget * (1.0 + 1e-9));
    }

    #[test]
    fn noma_grid_oracle_two_streams() {
        // Fixed position check against a power-simplex grid.
        let e = env();
        let catalog = Catalog::new(vec![7.0e6, 3.0e6]);
        let users = [Point3::new(30.0, 4.0, 0.0), Point3::new(90.0, -15.0, 0.0)];
        let state = RequestState { requests: vec![0, 1] };
        let groups = group_requests(&state);
        let problem = StreamProblem::content_grouped(&e, &users, &groups, &catalog);
        let x = 55.0;
        let view = problem.view_at(x).unwrap();
        let (_, mu) = noma_power_alloc(
            &view,
            &problem.sizes,
            e.power_budget,
            e.radio.noise_power,
            e.radio.bandwidth,
            1e-9,
            NomaDecodeOrder::AscendingMinGain,
        );

        let order = noma_order(&view.stream_gains, NomaDecodeOrder::AscendingMinGain);
        let n = 4000;
        let mut best = f64::INFINITY;
        for i in 0..=n {
            let p0 = e.power_budget * i as f64 / n as f64;
            let powers = [p0, e.power_budget - p0];
            let rates = noma_rates(
                &powers,
                &view.stream_gains,
                &order,
                e.radio.noise_power,
                e.radio.bandwidth,
            );
            let lat = crate::rates::state_latency(&problem.sizes, &rates);
            best = best.min(lat);
        }
        assert_relative_eq!(mu, best, max_relative = 1e-2);
    }

    #[test]
    fn noma_label_equivariance() {
        let e = env();
        let cfg = SolverConfig::for_budget(e.power_budget);
        let users = [Point3::new(20.0, 3.0, 0.0), Point3::new(100.0, -8.0, 0.0)];
        let a = solve_noma(
            &RequestState { requests: vec![0, 1] },
            &users,
            &e,
            &Catalog::new(vec![7.0e6, 3.0e6]),
            &cfg,
        )
        .unwrap();
        let b = solve_noma(
            &RequestState { requests: vec![1, 0] },
            &users,
            &e,
            &Catalog::new(vec![3.0e6, 7.0e6]),
            &cfg,
        )
        .unwrap();
        // Streams follow first-appearance order, so stream s belongs to user s
        // in both labelings and the solutions must coincide index-wise.
        assert_relative_eq!(a.latency, b.latency, max_relative = 1e-9);
        assert_relative_eq!(a.powers.private[0], b.powers.private[0], max_relative = 1e-9);
        assert_relative_eq!(a.powers.private[1], b.powers.private[1], max_relative = 1e-9);
    }

    #[test]
    fn fixed_antenna_pinned_at_origin() {
        let e = env();
        let cfg = SolverConfig::for_budget(e.power_budget);
        let catalog = Catalog::new(vec![5.0e6, 2.0e6]);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let users = random_users(&mut rng, 4);
        let state = RequestState { requests: vec![0, 1, 0, 1] };
        let (sol, _) = solve_scheme(SchemeId::FixedAntenna, &state, &users, &e, &catalog, &cfg).unwrap();
        assert_eq!(sol.antenna_x, 0.0);
        assert!(sol.feasible);
    }

    #[test]
    fn fixed_antenna_far_users_lose_to_carp() {
        let e = env();
        let cfg = SolverConfig::for_budget(e.power_budget);
        let catalog = Catalog::new(vec![5.0e6]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut gaps = 0usize;
        let trials = 20;
        for _ in 0..trials {
            // Cluster far from the origin.
            let users: Vec<_> = (0..3)
                .map(|_| {
                    Point3::new(
                        100.0 + rng.gen_range(0.0..20.0),
                        rng.gen_range(-20.0..20.0),
                        0.0,
                    )
                })
                .collect();
            let state = RequestState { requests: vec![0, 0, 0] };
            let (carp, _) = solve_scheme(SchemeId::CarpJo, &state, &users, &e, &catalog, &cfg).unwrap();
            let (fixed, _) =
                solve_scheme(SchemeId::FixedAntenna, &state, &users, &e, &catalog, &cfg).unwrap();
            if fixed.latency > carp.latency {
                gaps += 1;
            }
        }
        assert_eq!(gaps, trials);
    }

    #[test]
    fn sum_rate_counts_per_user() {
        let e = env();
        let cfg = SolverConfig::for_budget(e.power_budget);
        let catalog = Catalog::new(vec![5.0e6, 2.0e6]);
        let users = [
            Point3::new(10.0, 0.0, 0.0),
            Point3::new(60.0, 6.0, 0.0),
            Point3::new(90.0, -6.0, 0.0),
        ];
        let state = RequestState { requests: vec![0, 0, 1] };
        let (sol, cohorts) = solve_scheme(SchemeId::CarpJo, &state, &users, &e, &catalog, &cfg).unwrap();
        let expect = 2.0 * sol.rates.content_rates[0] + sol.rates.content_rates[1];
        assert_relative_eq!(sum_rate(&sol, &cohorts).unwrap(), expect, max_relative = 1e-12);
    }

    #[test]
    fn all_schemes_pass_their_audit() {
        let e = env();
        let cfg = SolverConfig::for_budget(e.power_budget);
        let catalog = Catalog::new(vec![5.0e6, 9.0e6, 2.0e6]);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..5 {
            let users = random_users(&mut rng, 4);
            let state = RequestState {
                requests: (0..4).map(|_| rng.gen_range(0..3)).collect(),
            };
            for scheme in SchemeId::ALL {
                let (sol, cohorts) =
                    solve_scheme(scheme, &state, &users, &e, &catalog, &cfg).unwrap();
                assert!(sol.feasible);
                let problem = StreamProblem {
                    env: &e,
                    users: &users,
                    cohorts: cohorts.clone(),
                    sizes: sol
                        .rates
                        .content_rates
                        .iter()
                        .map(|_| 1.0)
                        .collect(),
                };
                let check_sic = scheme != SchemeId::Noma;
                audit_constraints(&problem, &sol, check_sic).unwrap();
            }
        }
    }
}
