//! Likelihood-weighted and independent sampling estimators.

mod estimator;
mod lw;

use std::cell::RefCell;
use std::collections::BTreeMap;

use rand::distributions::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::SamplingError;
use crate::frontend::{evaluate_with, on_big_stack, succeeds_here, EvalOptions};
use crate::prolog::{Program, Term};
use crate::term::{GroundTerm, SwitchInstance};

pub use estimator::EstimatorState;
pub use lw::{LwSampler, LwWeight, Status, WeightedSample};
use lw::Dists;

/// Name of the generator behind every seeded run.
pub const RNG_NAME: &str = "ChaCha8";

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Lw,
    Independent,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Lw => "lw",
            Mode::Independent => "independent",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SampleConfig {
    pub mode: Mode,
    pub samples: u64,
    pub seed: u64,
    /// Emit a convergence row every `stride` samples; 0 emits only the last.
    pub stride: u64,
    pub weighting: LwWeight,
    pub eval: EvalOptions,
}

impl SampleConfig {
    pub fn new(mode: Mode, samples: u64, seed: u64) -> Self {
        SampleConfig { mode, samples, seed, stride: 0, weighting: LwWeight::default(), eval: EvalOptions::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub samples: u64,
    pub consistent: u64,
    pub estimate: Option<f64>,
    pub variance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleRun {
    pub state: EstimatorState,
    pub rows: Vec<ConvergenceRow>,
    /// Likelihood-weighted samples rejected at a dead end.
    pub rejected: u64,
    /// Distinct weights of consistent evidence samples, at most 16 kept.
    pub weights: Vec<f64>,
}

/// World whose instances are fixed by `fixed` and otherwise drawn on
/// demand from their declared distributions.
struct LazyWorld<'a> {
    dists: &'a Dists,
    values: BTreeMap<SwitchInstance, GroundTerm>,
    rng: &'a mut ChaCha8Rng,
    domains: &'a crate::switch::Switches,
}

impl LazyWorld<'_> {
    fn get(&mut self, si: &SwitchInstance) -> Option<GroundTerm> {
        if let Some(v) = self.values.get(si) {
            return Some(v.clone());
        }
        let (_, index) = self.dists.of(&si.switch).ok()?;
        let decl = self.domains.get(&si.switch)?;
        let v = decl.domain.values()[index.sample(self.rng)].clone();
        self.values.insert(si.clone(), v.clone());
        Some(v)
    }
}

fn holds(program: &Program, goal: &Term, world: &RefCell<LazyWorld<'_>>, max_depth: usize) -> Result<bool, SamplingError> {
    let lookup = |si: &SwitchInstance| world.borrow_mut().get(si);
    Ok(succeeds_here(program, goal, &lookup, max_depth)?)
}

/// Estimates `P(query | evidence)`, or `P(query)` without evidence.
pub fn estimate(
    program: &Program,
    query: &Term,
    evidence: Option<&Term>,
    cfg: &SampleConfig,
) -> Result<SampleRun, SamplingError> {
    if cfg.samples == 0 {
        return Err(SamplingError::EmptyBudget);
    }
    let target = match (cfg.mode, evidence) {
        (Mode::Lw, Some(e)) => Some(evaluate_with(program, e, &cfg.eval)?),
        (Mode::Lw, None) => Some(evaluate_with(program, query, &cfg.eval)?),
        (Mode::Independent, _) => None,
    };
    let dists = Dists::new(program.switches());
    let sampler = match &target {
        Some(d) => Some(LwSampler::new(d, program.switches())?.with_weighting(cfg.weighting)),
        None => None,
    };
    on_big_stack(&cfg.eval, || {
        let mut rng = rng(cfg.seed);
        let mut run = SampleRun { state: EstimatorState::new(), rows: Vec::new(), rejected: 0, weights: Vec::new() };
        for i in 1..=cfg.samples {
            let (x, y, consistent) = match &sampler {
                Some(s) => {
                    let sample = s.sample(&mut rng)?;
                    if !sample.is_consistent() {
                        run.rejected += 1;
                        (0.0, 0.0, false)
                    } else {
                        if run.weights.len() < 16 && !run.weights.contains(&sample.weight) {
                            run.weights.push(sample.weight);
                        }
                        match evidence {
                            None => (sample.weight, 0.0, true),
                            Some(_) => {
                                let world = RefCell::new(LazyWorld {
                                    dists: &dists,
                                    values: sample.assignment,
                                    rng: &mut rng,
                                    domains: program.switches(),
                                });
                                let q = holds(program, query, &world, cfg.eval.max_depth)?;
                                (if q { sample.weight } else { 0.0 }, sample.weight, true)
                            }
                        }
                    }
                }
                None => {
                    let world = RefCell::new(LazyWorld {
                        dists: &dists,
                        values: BTreeMap::new(),
                        rng: &mut rng,
                        domains: program.switches(),
                    });
                    let e = match evidence {
                        Some(e) => holds(program, e, &world, cfg.eval.max_depth)?,
                        None => true,
                    };
                    let q = e && holds(program, query, &world, cfg.eval.max_depth)?;
                    match evidence {
                        None => (f64::from(u8::from(q)), 0.0, q),
                        Some(_) => (f64::from(u8::from(q)), f64::from(u8::from(e)), e),
                    }
                }
            };
            let y = if evidence.is_none() { 1.0 } else { y };
            run.state.push(x, y, consistent);
            if (cfg.stride > 0 && i % cfg.stride == 0) || i == cfg.samples {
                let row = ConvergenceRow {
                    samples: i,
                    consistent: run.state.n_consistent,
                    estimate: run.state.estimate(),
                    variance: run.state.variance(),
                };
                if run.rows.last().map(|r| r.samples) != Some(i) {
                    run.rows.push(row);
                }
            }
        }
        Ok(run)
    })
}
