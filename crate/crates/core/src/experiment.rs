//! Sweep orchestration: seeded scenario generation, exact or Monte Carlo
//! averaging over request states, and CSV reporting.
//!
//! Randomness is counter-split from the master seed: the catalog stream
//! depends on the seed alone, and each layout's placement and request streams
//! depend on `(seed, layout)` only. Rows within one sweep therefore differ
//! only through the swept parameter's causal effects.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::baselines::{solve_scheme, sum_rate, SchemeId};
use crate::config::{SamplingMode, ScenarioConfig};
use crate::content::{
    enumerate_states, sample_state, state_probability, zipf_pmf, Catalog, RequestState,
};
use crate::error::{Error, Result};
use crate::geometry::place_users;

/// One swept parameter and its (sorted) values.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub parameter: String,
    pub values: Vec<f64>,
}

impl SweepSpec {
    pub fn new(parameter: impl Into<String>, mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Config {
                field: "sweep".into(),
                reason: "needs at least one value".into(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config {
                field: "sweep".into(),
                reason: "values must be finite".into(),
            });
        }
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(Self { parameter: parameter.into(), values })
    }

    /// Parses `param=v1,v2,...` as given on the command line.
    pub fn parse(arg: &str) -> Result<Self> {
        let (param, vals) = arg.split_once('=').ok_or_else(|| Error::Config {
            field: "sweep".into(),
            reason: format!("expected `param=v1,v2,...`, got `{arg}`"),
        })?;
        let values = vals
            .split(',')
            .map(|v| {
                v.trim().parse::<f64>().map_err(|_| Error::Config {
                    field: "sweep".into(),
                    reason: format!("cannot parse `{v}` as a number"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(param.trim(), values)
    }
}

/// One CSV output row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub sweep_value: f64,
    pub scheme: SchemeId,
    pub avg_latency_s: f64,
    pub avg_sum_rate_bps: f64,
    pub n_states: u64,
    pub n_infeasible: u64,
    pub seed: u64,
    pub wall_time_s: f64,
}

const STREAM_CATALOG: u64 = 0;
const STREAM_LAYOUT: u64 = 1;
const STREAM_REQUESTS: u64 = 2;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Independent RNG stream for `(seed, stream, index)`.
pub fn derive_rng(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut state = splitmix64(seed ^ splitmix64(stream ^ splitmix64(index)));
    for chunk in key.chunks_exact_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Content catalog for a master seed; frozen across sweep values.
pub fn catalog_for_seed(cfg: &ScenarioConfig, seed: u64) -> Catalog<f64> {
    let mut rng = derive_rng(seed, STREAM_CATALOG, 0);
    Catalog::uniform_random(&mut rng, cfg.num_contents, cfg.content_min_bits(), cfg.content_max_bits())
}

#[derive(Debug, Default, Clone, Copy)]
struct LayoutStats {
    latency_sum: f64,
    sum_rate_sum: f64,
    feasible: u64,
    states: u64,
    infeasible: u64,
}

/// Averages one scheme over the request states of one layout.
fn run_layout(
    cfg: &ScenarioConfig,
    catalog: &Catalog<f64>,
    scheme: SchemeId,
    seed: u64,
    layout: u64,
) -> Result<LayoutStats> {
    let env = cfg.link_env();
    let solver = cfg.solver_config();
    let mut layout_rng = derive_rng(seed, STREAM_LAYOUT, layout);
    let users = place_users::<f64, _>(&mut layout_rng, &env.geom, cfg.num_users);
    let pmf = zipf_pmf::<f64>(cfg.num_contents, cfg.zipf_exponent);

    let state_count = (cfg.num_contents as u128).checked_pow(cfg.num_users as u32);
    let exact = match cfg.sampling.mode {
        SamplingMode::Exact => true,
        SamplingMode::MonteCarlo => false,
        SamplingMode::Auto => {
            matches!(state_count, Some(n) if n <= cfg.sampling.exact_budget as u128)
        }
    };

    // Repeated states (common under sampling) reuse the solved metrics; the
    // grouping-relevant information is exactly the request vector.
    let mut memo: HashMap<Vec<usize>, (f64, f64, bool)> = HashMap::new();
    let mut stats = LayoutStats::default();
    let mut weight_sum = 0.0f64;

    let mut handle = |state: RequestState, weight: f64, stats: &mut LayoutStats| -> Result<()> {
        let (latency, rate, feasible) = match memo.get(&state.requests) {
            Some(&hit) => hit,
            None => {
                let entry = match solve_scheme(scheme, &state, &users, &env, catalog, &solver) {
                    Ok((sol, cohorts)) if sol.feasible => {
                        (sol.latency, sum_rate(&sol, &cohorts)?, true)
                    }
                    Ok((sol, _)) => (sol.latency, 0.0, false),
                    Err(Error::Infeasible { .. }) | Err(Error::InfeasibleSolution { .. }) => {
                        (f64::INFINITY, 0.0, false)
                    }
                    Err(e) => return Err(e),
                };
                memo.insert(state.requests.clone(), entry);
                entry
            }
        };
        stats.states += 1;
        if feasible {
            stats.latency_sum += weight * latency;
            stats.sum_rate_sum += weight * rate;
            stats.feasible += 1;
            weight_sum += weight;
        } else {
            stats.infeasible += 1;
            if exact {
                return Err(Error::Infeasible {
                    context: format!(
                        "state {:?} infeasible for {scheme} (layout {layout}, antenna span \
                         [0, {}], budget {} W)",
                        state.requests,
                        env.geom.waveguide_length,
                        env.power_budget
                    ),
                });
            }
        }
        Ok(())
    };

    if exact {
        let states = enumerate_states(cfg.num_contents, cfg.num_users, cfg.sampling.exact_budget as u128)?;
        for state in states {
            let w = state_probability(&state, &pmf);
            handle(state, w, &mut stats)?;
        }
    } else {
        let mut req_rng = derive_rng(seed, STREAM_REQUESTS, layout);
        for _ in 0..cfg.sampling.samples {
            let state = sample_state(&mut req_rng, &pmf, cfg.num_users);
            handle(state, 1.0, &mut stats)?;
        }
    }

    // Normalize to a per-layout mean; infeasible states carry no weight.
    if weight_sum > 0.0 {
        stats.latency_sum /= weight_sum;
        stats.sum_rate_sum /= weight_sum;
    } else {
        stats.latency_sum = f64::INFINITY;
        stats.sum_rate_sum = 0.0;
    }
    Ok(stats)
}

/// One `(sweep value, scheme)` row: layouts run in parallel and are averaged
/// with equal weight.
fn run_point(cfg: &ScenarioConfig, catalog: &Catalog<f64>, scheme: SchemeId, seed: u64) -> Result<(f64, f64, u64, u64)> {
    let per_layout: Vec<LayoutStats> = (0..cfg.layouts as u64)
        .into_par_iter()
        .map(|l| run_layout(cfg, catalog, scheme, seed, l))
        .collect::<Result<_>>()?;

    let mut latency = 0.0;
    let mut rate = 0.0;
    let mut states = 0u64;
    let mut infeasible = 0u64;
    let mut contributing = 0u64;
    for s in &per_layout {
        states += s.states;
        infeasible += s.infeasible;
        if s.latency_sum.is_finite() {
            latency += s.latency_sum;
            rate += s.sum_rate_sum;
            contributing += 1;
        }
    }
    if contributing > 0 {
        latency /= contributing as f64;
        rate /= contributing as f64;
    } else {
        latency = f64::INFINITY;
        rate = 0.0;
    }
    Ok((latency, rate, states, infeasible))
}

/// Runs the full sweep; `sweep = None` evaluates the config as-is and
/// reports `sweep_value = 0`.
pub fn run_sweep(config: &ScenarioConfig, sweep: Option<&SweepSpec>) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let seed = config.seed;
    let catalog = catalog_for_seed(config, seed);

    let points: Vec<Option<f64>> = match sweep {
        Some(s) => s.values.iter().copied().map(Some).collect(),
        None => vec![None],
    };

    let mut rows = Vec::new();
    for point in points {
        let mut cfg = config.clone();
        if let (Some(v), Some(s)) = (point, sweep) {
            cfg.set_param(&s.parameter, v)?;
        }
        for &scheme in &cfg.schemes.clone() {
            let t0 = Instant::now();
            let (avg_latency_s, avg_sum_rate_bps, n_states, n_infeasible) =
                run_point(&cfg, &catalog, scheme, seed)?;
            let wall_time_s = if cfg.record_timing { t0.elapsed().as_secs_f64() } else { 0.0 };
            rows.push(SweepRow {
                sweep_value: point.unwrap_or(0.0),
                scheme,
                avg_latency_s,
                avg_sum_rate_bps,
                n_states,
                n_infeasible,
                seed,
                wall_time_s,
            });
        }
    }
    Ok(rows)
}

pub const CSV_HEADER: &str =
    "sweep_value,scheme,avg_latency_s,avg_sum_rate_bps,n_states,n_infeasible,seed,wall_time_s";

/// Nine significant digits, locale-free.
fn fmt9(x: f64) -> String {
    format!("{x:.8e}")
}

pub fn render_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            fmt9(r.sweep_value),
            r.scheme,
            fmt9(r.avg_latency_s),
            fmt9(r.avg_sum_rate_bps),
            r.n_states,
            r.n_infeasible,
            r.seed,
            fmt9(r.wall_time_s),
        ));
    }
    out
}

pub fn write_csv(rows: &[SweepRow], path: impl AsRef<Path>) -> Result<()> {
    assert!(!rows.is_empty(), "refusing to write an empty report");
    let mut f = std::fs::File::create(path)?;
    f.write_all(render_csv(rows).as_bytes())?;
    Ok(())
}
