//! Per-state optimization: private power control by bisection, closed-form
//! common-rate allocation, a one-dimensional common-power search, and the
//! alternating antenna/resource loop.
//!
//! All subproblems run on a *stream* view of the request state: one stream
//! per distinct content (content-grouped layout) or one per user (per-user
//! layout). Rates inside the solver use the conservative full-private-budget
//! form; the returned solution recomputes rates exactly at the final powers,
//! which can only improve them.

mod golden;

pub use golden::golden_section_min;

use crate::content::{Catalog, RequestGroups, RequestState};
use crate::error::{Error, Result};
use crate::geometry::{channel_state, Geometry, Point3, RadioConstants};
use crate::rates::{
    common_rate, conservative_power_for_rate, private_rate_conservative, private_rate_exact,
    sic_min_common_power, state_latency, PowerBudget, RateAllocation,
};
use crate::scalar::{lit, Real};

/// Tolerances and search-resolution knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<F> {
    /// Relative tolerance of every bisection on the latency bound.
    pub mu_tol: F,
    /// Absolute stopping gap of the outer alternation, seconds.
    pub outer_tol: F,
    /// Golden-section bracket width on the antenna coordinate, meters.
    pub antenna_tol: F,
    /// Grid points of the common-power line search.
    pub p0_grid_points: usize,
    /// Keeps the private budget strictly positive, watts.
    pub p0_margin: F,
    /// Cap on outer alternation rounds.
    pub max_outer_iters: usize,
    /// Independent golden-section segments over the waveguide.
    pub golden_subintervals: usize,
    /// Cap on inner power/rate alternation rounds per common-power point.
    pub max_alt_iters: usize,
}

impl<F: Real> SolverConfig<F> {
    /// Defaults sized for a power budget `p_b`.
    pub fn for_budget(p_b: F) -> Self {
        Self {
            mu_tol: lit(1e-6),
            outer_tol: lit(1e-4),
            antenna_tol: lit(1e-2),
            p0_grid_points: 32,
            p0_margin: lit::<F>(1e-6) * p_b,
            max_outer_iters: 30,
            golden_subintervals: 8,
            max_alt_iters: 50,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.mu_tol > F::zero()
            && self.outer_tol > F::zero()
            && self.antenna_tol > F::zero()
            && self.p0_margin > F::zero()
            && self.p0_grid_points >= 2
            && self.golden_subintervals >= 1
            && self.max_outer_iters >= 1
            && self.max_alt_iters >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::Config {
                field: "solver".into(),
                reason: "tolerances must be positive, p0_grid_points >= 2, \
                         golden_subintervals >= 1"
                    .into(),
            })
        }
    }
}

/// Physical environment shared by every state of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkEnv<F> {
    pub geom: Geometry<F>,
    pub radio: RadioConstants<F>,
    /// Total transmit budget `P_b`, watts.
    pub power_budget: F,
    /// SIC decoding margin `theta`, watts.
    pub theta: F,
}

/// One request state reduced to its stream structure.
#[derive(Debug, Clone)]
pub struct StreamProblem<'a, F> {
    pub env: &'a LinkEnv<F>,
    pub users: &'a [Point3<F>],
    /// Users behind each stream.
    pub cohorts: Vec<Vec<usize>>,
    /// Data size carried by each stream, bits.
    pub sizes: Vec<F>,
}

/// Channel quantities at one candidate antenna position.
#[derive(Debug, Clone)]
pub struct PositionView<F> {
    /// Worst gain over all users.
    pub h0: F,
    /// Min cohort gain per stream.
    pub stream_gains: Vec<F>,
    /// `N_i = sigma^2 / stream gain` per stream, watts.
    pub floors: Vec<F>,
}

/// Decision tuple for one request state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSolution<F> {
    pub antenna_x: F,
    pub powers: PowerBudget<F>,
    pub rates: RateAllocation<F>,
    /// Transmission latency at the exactly recomputed rates, seconds.
    pub latency: F,
    /// Outer alternation rounds spent.
    pub iterations: usize,
    pub feasible: bool,
    /// Interleaved conservative latency bounds, one entry per half-step.
    pub mu_trace: Vec<F>,
}

impl<F: Real> StateSolution<F> {
    fn infeasible(antenna_x: F, p_b: F, theta: F, n_streams: usize, iterations: usize) -> Self {
        Self {
            antenna_x,
            powers: PowerBudget {
                total: p_b,
                common: F::zero(),
                private: vec![F::zero(); n_streams],
                sic_margin: theta,
            },
            rates: RateAllocation {
                common_total: F::zero(),
                common_shares: vec![F::zero(); n_streams],
                private: vec![F::zero(); n_streams],
                content_rates: vec![F::zero(); n_streams],
            },
            latency: F::infinity(),
            iterations,
            feasible: false,
            mu_trace: Vec::new(),
        }
    }
}

/// Minimal private powers for a latency bound `mu`, plus whether they fit
/// in the private budget.
///
/// `P_i_min = max(0, psi_i (1 - 2^{(r_i - c_i / mu) / B}))`.
pub fn private_power_feasible<F: Real>(
    mu: F,
    shares: &[F],
    psi: &[F],
    sizes: &[F],
    private_budget: F,
    bandwidth: F,
) -> (bool, Vec<F>) {
    debug_assert!(mu > F::zero());
    let powers: Vec<F> = sizes
        .iter()
        .zip(shares)
        .zip(psi)
        .map(|((&c, &r), &cap)| conservative_power_for_rate(c / mu - r, cap, bandwidth))
        .collect();
    let total: F = powers.iter().copied().sum();
    (total <= private_budget, powers)
}

/// Smallest latency bound reachable by private power control alone, given
/// fixed common-rate shares. Bisection on `mu`; feasibility is nondecreasing
/// in `mu`.
pub fn solve_private_power<F: Real>(
    shares: &[F],
    sizes: &[F],
    floors: &[F],
    private_budget: F,
    bandwidth: F,
    mu_tol: F,
) -> Result<(Vec<F>, F)> {
    if private_budget <= F::zero() {
        return Err(Error::Infeasible {
            context: "private power budget is not positive".into(),
        });
    }
    let psi: Vec<F> = floors.iter().map(|&n| private_budget + n).collect();

    // Unbeatable bound: full budget on one stream with zero interference.
    let mut mu_low = F::zero();
    for ((&c, &r), &n) in sizes.iter().zip(shares).zip(floors) {
        let cap_rate = bandwidth * (F::one() + private_budget / n).log2();
        mu_low = mu_low.max(c / (r + cap_rate));
    }

    let (feasible, powers) =
        private_power_feasible(mu_low, shares, &psi, sizes, private_budget, bandwidth);
    if feasible {
        return Ok((powers, mu_low));
    }

    let mut mu_high = mu_low;
    let two = lit::<F>(2.0);
    let mut witness = None;
    for _ in 0..256 {
        mu_high = mu_high * two;
        let (feasible, powers) =
            private_power_feasible(mu_high, shares, &psi, sizes, private_budget, bandwidth);
        if feasible {
            witness = Some(powers);
            break;
        }
    }
    let mut witness = witness.ok_or_else(|| Error::Infeasible {
        context: "no feasible private power allocation at any latency bound".into(),
    })?;

    while mu_high - mu_low > mu_tol * mu_high {
        let mid = (mu_low + mu_high) / two;
        let (feasible, powers) =
            private_power_feasible(mid, shares, &psi, sizes, private_budget, bandwidth);
        if feasible {
            mu_high = mid;
            witness = powers;
        } else {
            mu_low = mid;
        }
    }
    Ok((witness, mu_high))
}

/// Optimal common-rate split for fixed private rates: minimizes
/// `max_i c_i / (r_i + R_private_i)` over `sum r_i <= common_total`,
/// `r_i >= 0`. Bisection on `mu` with the closed-form minimal shares
/// `r_i_min = max(0, c_i / mu - R_private_i)`.
pub fn solve_rate_alloc<F: Real>(
    private_rates: &[F],
    common_total: F,
    sizes: &[F],
    mu_tol: F,
) -> (Vec<F>, F) {
    let n = sizes.len();
    let zero = F::zero();
    let two = lit::<F>(2.0);

    if common_total <= zero {
        let mu = sizes
            .iter()
            .zip(private_rates)
            .map(|(&c, &rp)| if rp > zero { c / rp } else { F::infinity() })
            .fold(zero, F::max);
        return (vec![zero; n], mu);
    }

    let min_shares = |mu: F| -> Vec<F> {
        sizes
            .iter()
            .zip(private_rates)
            .map(|(&c, &rp)| (c / mu - rp).max(zero))
            .collect()
    };
    let feasible = |shares: &[F]| shares.iter().copied().sum::<F>() <= common_total;

    // Even the full common pipe on one stream cannot beat this bound.
    let mut mu_low = zero;
    for (&c, &rp) in sizes.iter().zip(private_rates) {
        mu_low = mu_low.max(c / (rp + common_total));
    }
    let shares = min_shares(mu_low);
    if feasible(&shares) {
        return (shares, mu_low);
    }

    let all_private_positive = private_rates.iter().all(|&rp| rp > zero);
    let mut mu_high = if all_private_positive {
        sizes
            .iter()
            .zip(private_rates)
            .map(|(&c, &rp)| c / rp)
            .fold(zero, F::max)
    } else {
        let mut hi = mu_low;
        loop {
            hi = hi * two;
            if feasible(&min_shares(hi)) {
                break hi;
            }
        }
    };

    let mut witness = min_shares(mu_high);
    debug_assert!(feasible(&witness));
    while mu_high - mu_low > mu_tol * mu_high {
        let mid = (mu_low + mu_high) / two;
        let shares = min_shares(mid);
        if feasible(&shares) {
            mu_high = mid;
            witness = shares;
        } else {
            mu_low = mid;
        }
    }
    (witness, mu_high)
}

/// Working best-so-far tuple of the outer loop.
#[derive(Debug, Clone)]
struct Incumbent<F> {
    mu: F,
    x: F,
    p0: F,
    powers: Vec<F>,
    shares: Vec<F>,
}

impl<'a, F: Real> StreamProblem<'a, F> {
    /// Content-grouped streams: one per distinct requested content.
    pub fn content_grouped(
        env: &'a LinkEnv<F>,
        users: &'a [Point3<F>],
        groups: &RequestGroups,
        catalog: &Catalog<F>,
    ) -> Self {
        let sizes = groups.distinct.iter().map(|&c| catalog.sizes[c]).collect();
        Self { env, users, cohorts: groups.cohorts.clone(), sizes }
    }

    /// Per-user streams: every user gets a dedicated stream for its content.
    pub fn per_user(
        env: &'a LinkEnv<F>,
        users: &'a [Point3<F>],
        state: &RequestState,
        catalog: &Catalog<F>,
    ) -> Self {
        let cohorts = (0..state.requests.len()).map(|u| vec![u]).collect();
        let sizes = state.requests.iter().map(|&m| catalog.sizes[m]).collect();
        Self { env, users, cohorts, sizes }
    }

    pub fn num_streams(&self) -> usize {
        self.sizes.len()
    }

    /// Channel quantities at antenna coordinate `x`.
    pub fn view_at(&self, x: F) -> Result<PositionView<F>> {
        let ch = channel_state(x, self.users, &self.env.geom, &self.env.radio)?;
        let stream_gains: Vec<F> = self
            .cohorts
            .iter()
            .map(|cohort| {
                cohort
                    .iter()
                    .map(|&u| ch.gains[u])
                    .fold(F::infinity(), F::min)
            })
            .collect();
        let noise = self.env.radio.noise_power;
        let floors = stream_gains.iter().map(|&g| noise / g).collect();
        Ok(PositionView { h0: ch.worst_gain, stream_gains, floors })
    }

    /// Inner alternation between private power control and rate allocation at
    /// one fixed common power. Returns the best `(mu, powers, shares)` seen.
    fn alternate_at_p0(
        &self,
        view: &PositionView<F>,
        p0: F,
        warm_shares: Option<&[F]>,
        cfg: &SolverConfig<F>,
    ) -> Option<(F, Vec<F>, Vec<F>)> {
        let env = self.env;
        let bw = env.radio.bandwidth;
        let noise = env.radio.noise_power;
        let p_pri = env.power_budget - p0;
        if p_pri <= F::zero() {
            return None;
        }

        let mut best: Option<(F, Vec<F>, Vec<F>)> = None;
        let mut run_from = |seed: Vec<F>| {
            let mut shares = seed;
            let mut prev_mu = F::infinity();
            for _ in 0..cfg.max_alt_iters {
                let solved = solve_private_power(
                    &shares,
                    &self.sizes,
                    &view.floors,
                    p_pri,
                    bw,
                    cfg.mu_tol,
                );
                let (powers, _mu_p) = match solved {
                    Ok(v) => v,
                    Err(_) => return,
                };
                let private_rates: Vec<F> = powers
                    .iter()
                    .zip(&view.floors)
                    .map(|(&p, &n)| private_rate_conservative(p, p_pri + n, bw).unwrap())
                    .collect();
                let private_sum: F = powers.iter().copied().sum();
                let r0 = common_rate(p0, private_sum, view.h0, noise, bw);
                let (new_shares, mu) = solve_rate_alloc(&private_rates, r0, &self.sizes, cfg.mu_tol);

                if best.as_ref().map_or(true, |(b, _, _)| mu < *b) {
                    best = Some((mu, powers, new_shares.clone()));
                }
                if (prev_mu - mu).abs() <= cfg.mu_tol * mu {
                    break;
                }
                prev_mu = mu;
                shares = new_shares;
            }
        };

        // Size-proportional seed shares against the fully loaded common pipe,
        // preceded by the warm start when one is supplied.
        let r0_full = common_rate(p0, p_pri, view.h0, noise, bw);
        if let Some(w) = warm_shares {
            run_from(w.to_vec());
        }
        let total: F = self.sizes.iter().copied().sum();
        run_from(self.sizes.iter().map(|&c| r0_full * c / total).collect());

        // The alternation equalizes latencies and can lock into a symmetric
        // fixed point, while the optimum may route the whole common pipe to
        // one stream and all private power elsewhere. Corner seeds — full
        // common rate to a single stream — let the alternation reach those
        // asymmetric solutions; keep the best outcome across all seeds.
        let n = self.num_streams();
        if n > 1 {
            for k in 0..n {
                let mut seed = vec![F::zero(); n];
                seed[k] = r0_full;
                run_from(seed);
            }
        }
        best
    }

    /// Resource-allocation core: grid plus golden refinement over the common
    /// power, alternation at each point. `None` when the SIC interval is empty.
    fn resource_incumbent(
        &self,
        x: F,
        warm: Option<&Incumbent<F>>,
        cfg: &SolverConfig<F>,
    ) -> Result<Option<Incumbent<F>>> {
        let env = self.env;
        let view = self.view_at(x)?;
        let p0_min = sic_min_common_power(env.power_budget, env.radio.noise_power, env.theta, view.h0);
        let p0_max = env.power_budget - cfg.p0_margin;
        if p0_min > p0_max {
            return Ok(None);
        }

        let grid_n = cfg.p0_grid_points.max(2);
        let step = (p0_max - p0_min) / lit::<F>((grid_n - 1) as f64);
        let warm_shares = warm.map(|w| w.shares.as_slice());

        let mut best: Option<(F, F, Vec<F>, Vec<F>)> = None; // (mu, p0, powers, shares)
        for k in 0..grid_n {
            let p0 = p0_min + step * lit::<F>(k as f64);
            if let Some((mu, powers, shares)) = self.alternate_at_p0(&view, p0, warm_shares, cfg) {
                let better = match &best {
                    None => true,
                    Some((b, bp0, _, _)) => {
                        mu < *b - lit::<F>(1e-12) * *b
                            || ((mu - *b).abs() <= lit::<F>(1e-12) * *b && p0 < *bp0)
                    }
                };
                if better {
                    best = Some((mu, p0, powers, shares));
                }
            }
        }
        let (_, best_p0, _, _) = match &best {
            Some(b) => b.clone(),
            None => return Ok(None),
        };

        // One golden refinement around the best grid point.
        let lo = (best_p0 - step).max(p0_min);
        let hi = (best_p0 + step).min(p0_max);
        if hi > lo {
            let mut refined: Option<(F, F, Vec<F>, Vec<F>)> = None;
            let tol = (hi - lo) * lit::<F>(1e-4);
            golden_section_min(
                |p0| {
                    match self.alternate_at_p0(&view, p0, warm_shares, cfg) {
                        Some((mu, powers, shares)) => {
                            let better = refined
                                .as_ref()
                                .map_or(true, |(b, bp0, _, _)| mu < *b || (mu == *b && p0 < *bp0));
                            if better {
                                refined = Some((mu, p0, powers, shares));
                            }
                            mu
                        }
                        None => F::infinity(),
                    }
                },
                lo,
                hi,
                tol,
                40,
            );
            if let Some(r) = refined {
                let improves = best.as_ref().map_or(true, |(b, _, _, _)| r.0 < *b);
                if improves {
                    best = Some(r);
                }
            }
        }

        Ok(best.map(|(mu, p0, powers, shares)| Incumbent { mu, x, p0, powers, shares }))
    }

    /// Solves the full resource-allocation subproblem at a fixed antenna
    /// position and reports the solution with exactly recomputed rates.
    pub fn solve_resource_alloc(&self, antenna_x: F, cfg: &SolverConfig<F>) -> Result<StateSolution<F>> {
        match self.resource_incumbent(antenna_x, None, cfg)? {
            Some(inc) => self.finalize(&inc, 1, vec![inc.mu]),
            None => Ok(StateSolution::infeasible(
                antenna_x,
                self.env.power_budget,
                self.env.theta,
                self.num_streams(),
                1,
            )),
        }
    }

    /// Evaluates one candidate antenna position under fixed powers: the
    /// conservative latency bound after re-optimizing the common-rate split.
    /// `+inf` when the position violates the SIC floor.
    pub fn evaluate_position(&self, p0: F, private_powers: &[F], x: F, cfg: &SolverConfig<F>) -> (F, Vec<F>) {
        let env = self.env;
        let view = match self.view_at(x) {
            Ok(v) => v,
            Err(_) => return (F::infinity(), vec![F::zero(); self.num_streams()]),
        };
        let p0_floor = sic_min_common_power(env.power_budget, env.radio.noise_power, env.theta, view.h0);
        if p0 < p0_floor {
            return (F::infinity(), vec![F::zero(); self.num_streams()]);
        }
        let p_pri = env.power_budget - p0;
        let bw = env.radio.bandwidth;
        let private_rates: Vec<F> = private_powers
            .iter()
            .zip(&view.floors)
            .map(|(&p, &n)| match private_rate_conservative(p, p_pri + n, bw) {
                Ok(r) => r,
                Err(_) => F::neg_infinity(),
            })
            .collect();
        if private_rates.iter().any(|r| *r == F::neg_infinity()) {
            return (F::infinity(), vec![F::zero(); self.num_streams()]);
        }
        let private_sum: F = private_powers.iter().copied().sum();
        let r0 = common_rate(p0, private_sum, view.h0, env.radio.noise_power, bw);
        let (shares, mu) = solve_rate_alloc(&private_rates, r0, &self.sizes, cfg.mu_tol);
        (mu, shares)
    }

    /// Antenna positioning under fixed powers: segmented golden-section over
    /// the waveguide, re-solving the rate split at every candidate.
    pub fn solve_antenna(
        &self,
        p0: F,
        private_powers: &[F],
        cfg: &SolverConfig<F>,
    ) -> (F, Vec<F>, F) {
        let len = self.env.geom.waveguide_length;
        let segs = cfg.golden_subintervals.max(1);
        let seg_w = len / lit::<F>(segs as f64);

        let mut best_x = F::zero();
        let mut best: Option<(F, Vec<F>)> = None;
        let mut consider = |x: F, this: &Self| {
            let (mu, shares) = this.evaluate_position(p0, private_powers, x, cfg);
            let better = match &best {
                None => true,
                Some((b, _)) => mu < *b || (mu == *b && x < best_x),
            };
            if better {
                best_x = x;
                best = Some((mu, shares));
            }
        };

        consider(F::zero(), self);
        consider(len, self);
        for s in 0..segs {
            let a = seg_w * lit::<F>(s as f64);
            let b = (a + seg_w).min(len);
            let (x, _) = golden_section_min(
                |x| self.evaluate_position(p0, private_powers, x, cfg).0,
                a,
                b,
                cfg.antenna_tol,
                64,
            );
            consider(x, self);
        }
        let (mu, shares) = best.unwrap();
        (best_x, shares, mu)
    }

    /// Antenna coordinate maximizing the worst-case gain; used to probe for
    /// any SIC-feasible position.
    fn best_coverage_x(&self, cfg: &SolverConfig<F>) -> F {
        let len = self.env.geom.waveguide_length;
        let segs = cfg.golden_subintervals.max(1);
        let seg_w = len / lit::<F>(segs as f64);
        let h0_at = |x: F| self.view_at(x).map(|v| v.h0).unwrap_or(F::zero());
        let mut best_x = F::zero();
        let mut best_h0 = h0_at(F::zero());
        for s in 0..segs {
            let a = seg_w * lit::<F>(s as f64);
            let b = (a + seg_w).min(len);
            let (x, neg) = golden_section_min(|x| -h0_at(x), a, b, cfg.antenna_tol, 64);
            if -neg > best_h0 {
                best_h0 = -neg;
                best_x = x;
            }
        }
        best_x
    }

    /// Full alternating optimization of antenna position and resources for
    /// one request state.
    pub fn carp_jo(&self, cfg: &SolverConfig<F>) -> Result<StateSolution<F>> {
        let len = self.env.geom.waveguide_length;
        let mean_x = self.users.iter().map(|u| u.x).sum::<F>() / lit::<F>(self.users.len() as f64);
        let mean_x = mean_x.max(F::zero()).min(len);

        // The alternation is only locally convergent in the antenna
        // coordinate: the positioning step holds powers fixed and cannot jump
        // basins. Screen a handful of candidate starts (mean user position,
        // best-coverage point, each user's own coordinate) with a coarse
        // common-power grid and launch the full loop from the winner.
        let mut starts = vec![mean_x, self.best_coverage_x(cfg)];
        for u in self.users {
            starts.push(u.x.max(F::zero()).min(len));
        }
        let mut screen_cfg = cfg.clone();
        screen_cfg.p0_grid_points = cfg.p0_grid_points.min(9).max(2);

        let mut x_cur = mean_x;
        let mut incumbent: Option<Incumbent<F>> = None;
        let mut screened: Vec<F> = Vec::new();
        for &x in &starts {
            if screened.iter().any(|&s| (s - x).abs() <= cfg.antenna_tol) {
                continue;
            }
            screened.push(x);
            if let Some(c) = self.resource_incumbent(x, None, &screen_cfg)? {
                if incumbent.as_ref().map_or(true, |i| c.mu < i.mu) {
                    x_cur = x;
                    incumbent = Some(c);
                }
            }
        }
        let mut trace: Vec<F> = Vec::new();
        let mut iterations = 0usize;

        for t in 1..=cfg.max_outer_iters {
            iterations = t;

            let candidate = self.resource_incumbent(x_cur, incumbent.as_ref(), cfg)?;
            match candidate {
                Some(c) => {
                    if incumbent.as_ref().map_or(true, |i| c.mu < i.mu) {
                        incumbent = Some(c);
                    }
                }
                None if incumbent.is_none() => {
                    // No SIC window here; retry at the best-coverage position.
                    let x_best = self.best_coverage_x(cfg);
                    match self.resource_incumbent(x_best, None, cfg)? {
                        Some(c) => incumbent = Some(c),
                        None => {
                            return Ok(StateSolution::infeasible(
                                x_best,
                                self.env.power_budget,
                                self.env.theta,
                                self.num_streams(),
                                t,
                            ))
                        }
                    }
                }
                None => {}
            }
            let inc = incumbent.as_mut().unwrap();
            let l_t = inc.mu;
            trace.push(l_t);

            let (x_new, shares_new, mu_ant) = self.solve_antenna(inc.p0, &inc.powers, cfg);
            if mu_ant < inc.mu {
                inc.mu = mu_ant;
                inc.x = x_new;
                inc.shares = shares_new;
            }
            let l_prime = inc.mu;
            trace.push(l_prime);

            x_cur = inc.x;
            if (l_t - l_prime).abs() <= cfg.outer_tol {
                break;
            }
        }

        let inc = incumbent.unwrap();
        self.finalize(&inc, iterations, trace)
    }

    /// Reports the incumbent with rates recomputed exactly at its powers and
    /// the leftover common rate spread over the shares.
    fn finalize(&self, inc: &Incumbent<F>, iterations: usize, trace: Vec<F>) -> Result<StateSolution<F>> {
        let env = self.env;
        let bw = env.radio.bandwidth;
        let noise = env.radio.noise_power;
        let view = self.view_at(inc.x)?;

        let private_sum: F = inc.powers.iter().copied().sum();
        let r0 = common_rate(inc.p0, private_sum, view.h0, noise, bw);

        let mut shares = inc.shares.clone();
        let used: F = shares.iter().copied().sum();
        let slack = r0 - used;
        if slack > F::zero() {
            let total_size: F = self.sizes.iter().copied().sum();
            for (r, &c) in shares.iter_mut().zip(&self.sizes) {
                *r += slack * c / total_size;
            }
        }
        // Guard the sum constraint against rounding from the distribution.
        let used: F = shares.iter().copied().sum();
        if used > r0 {
            let scale = r0 / used;
            for r in &mut shares {
                *r *= scale;
            }
        }

        let private: Vec<F> = inc
            .powers
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                private_rate_exact(p, private_sum - p, view.floors[i], bw)
            })
            .collect();
        let content_rates: Vec<F> = shares.iter().zip(&private).map(|(&r, &rp)| r + rp).collect();
        let latency = state_latency(&self.sizes, &content_rates);

        Ok(StateSolution {
            antenna_x: inc.x,
            powers: PowerBudget {
                total: env.power_budget,
                common: inc.p0,
                private: inc.powers.clone(),
                sic_margin: env.theta,
            },
            rates: RateAllocation {
                common_total: r0,
                common_shares: shares,
                private,
                content_rates,
            },
            latency,
            iterations,
            feasible: true,
            mu_trace: trace,
        })
    }
}

/// Independent constraint checker built only on the rate primitives.
///
/// Verifies C1 (power budget), C2 (share sum vs the common rate), C3 (SIC
/// floor), C4 (antenna span), C5/C6 (non-negativity) for a feasible solution.
pub fn audit_constraints<F: Real>(
    problem: &StreamProblem<'_, F>,
    sol: &StateSolution<F>,
    check_sic: bool,
) -> std::result::Result<(), String> {
    if !sol.feasible {
        return Err("solution marked infeasible".into());
    }
    let env = problem.env;
    let tol_p = lit::<F>(1e-12);

    // C1
    let total = sol.powers.common + sol.powers.private_sum();
    if total > env.power_budget + tol_p + lit::<F>(1e-12) * env.power_budget {
        return Err(format!("C1 violated: total power {total} > budget {}", env.power_budget));
    }
    // C4
    if sol.antenna_x < F::zero() || sol.antenna_x > env.geom.waveguide_length {
        return Err(format!("C4 violated: antenna at {}", sol.antenna_x));
    }
    // C5 / C6
    if sol.powers.common < F::zero() || sol.powers.private.iter().any(|p| *p < F::zero()) {
        return Err("C5 violated: negative power".into());
    }
    if sol.rates.common_shares.iter().any(|r| *r < F::zero()) {
        return Err("C6 violated: negative common share".into());
    }

    let ch = channel_state(sol.antenna_x, problem.users, &env.geom, &env.radio)
        .map_err(|e| e.to_string())?;
    // C2 against the common rate recomputed from primitives.
    let r0 = common_rate(
        sol.powers.common,
        sol.powers.private_sum(),
        ch.worst_gain,
        env.radio.noise_power,
        env.radio.bandwidth,
    );
    let share_sum: F = sol.rates.common_shares.iter().copied().sum();
    if share_sum > r0 + lit::<F>(1e-9) + lit::<F>(1e-12) * r0 {
        return Err(format!("C2 violated: shares {share_sum} > R0 {r0}"));
    }
    // C3
    if check_sic {
        let p0_floor = sic_min_common_power(
            env.power_budget,
            env.radio.noise_power,
            env.theta,
            ch.worst_gain,
        );
        if sol.powers.common < p0_floor - tol_p - lit::<F>(1e-12) * p0_floor {
            return Err(format!(
                "C3 violated: P0 {} < floor {p0_floor}",
                sol.powers.common
            ));
        }
    }
    Ok(())
}
