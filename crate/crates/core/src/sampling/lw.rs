use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use crate::constraint::Var;
use crate::diagram::Osdd;
use crate::error::SamplingError;
use crate::switch::Switches;
use crate::term::{GroundTerm, SwitchInstance};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Consistent,
    Rejected,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightedSample {
    pub assignment: BTreeMap<SwitchInstance, GroundTerm>,
    pub weight: f64,
    pub status: Status,
    /// Instances whose values were drawn from a restricted set, in order.
    pub restricted: Vec<SwitchInstance>,
}

impl WeightedSample {
    pub fn is_consistent(&self) -> bool {
        self.status == Status::Consistent
    }
}

/// How a value drawn uniformly from a restricted set scales the weight.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LwWeight {
    /// Multiply by `P(Y=y)`.
    Outcome,
    /// Multiply by `P(Y=y)` times the size of the restricted set, the
    /// importance ratio of the uniform proposal.
    #[default]
    Importance,
}

pub(crate) struct Dists {
    probs: HashMap<Arc<str>, (Vec<f64>, WeightedIndex<f64>)>,
}

impl Dists {
    pub(crate) fn new(switches: &Switches) -> Self {
        let probs = switches
            .iter()
            .filter(|d| d.dist.is_some())
            .filter_map(|d| {
                let p = d.probs_f64().to_vec();
                WeightedIndex::new(&p).ok().map(|w| (d.name.clone(), (p, w)))
            })
            .collect();
        Dists { probs }
    }

    pub(crate) fn of(&self, switch: &str) -> Result<&(Vec<f64>, WeightedIndex<f64>), SamplingError> {
        self.probs.get(switch).ok_or_else(|| SamplingError::Improper(format!("switch `{switch}` has no distribution")))
    }
}

/// Likelihood-weighted sampler over an evidence diagram.
pub struct LwSampler<'a> {
    root: &'a Osdd,
    dists: Dists,
    weighting: LwWeight,
}

impl<'a> LwSampler<'a> {
    pub fn new(root: &'a Osdd, switches: &Switches) -> Result<Self, SamplingError> {
        let free = root.free_vars();
        if !free.is_empty() {
            let names: Vec<&str> = free.iter().map(Var::name).collect();
            return Err(SamplingError::Improper(format!("variables {} are not bound by any node", names.join(", "))));
        }
        Ok(LwSampler { root, dists: Dists::new(switches), weighting: LwWeight::default() })
    }

    pub fn with_weighting(mut self, weighting: LwWeight) -> Self {
        self.weighting = weighting;
        self
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Result<WeightedSample, SamplingError> {
        let mut sigma: BTreeMap<Var, GroundTerm> = BTreeMap::new();
        let mut out = WeightedSample {
            assignment: BTreeMap::new(),
            weight: 1.0,
            status: Status::Consistent,
            restricted: Vec::new(),
        };
        let mut d = self.root.clone();
        loop {
            if let Some(v) = d.leaf_value() {
                if !v {
                    out.status = Status::Rejected;
                }
                return Ok(out);
            }
            let y = d.var().expect("internal node").clone();
            let si = y.switch_instance().cloned().ok_or_else(|| {
                SamplingError::Improper(format!("node variable {} is not a switch instance", y.name()))
            })?;
            let (probs, index) = self.dists.of(&si.switch)?;
            let dom = y.domain().clone();
            let values = dom.values();
            let mut next: Vec<Option<usize>> = Vec::with_capacity(values.len());
            for v in values {
                sigma.insert(y.clone(), v.clone());
                let mut hit = None;
                for (i, e) in d.edges().iter().enumerate() {
                    let holds = e.label.holds(|x| sigma.get(x).cloned()).ok_or_else(|| {
                        SamplingError::Improper(format!("label `{}` mentions an unsampled variable", e.label))
                    })?;
                    if holds {
                        hit = Some(i);
                        break;
                    }
                }
                next.push(hit.filter(|&i| d.edges()[i].child.leaf_value() != Some(false)));
            }
            let allowed: Vec<usize> = (0..values.len()).filter(|&k| next[k].is_some()).collect();
            let k = if allowed.is_empty() {
                out.status = Status::Rejected;
                return Ok(out);
            } else if allowed.len() == values.len() {
                index.sample(rng)
            } else {
                let k = allowed[rng.gen_range(0..allowed.len())];
                out.weight *= match self.weighting {
                    LwWeight::Outcome => probs[k],
                    LwWeight::Importance => probs[k] * allowed.len() as f64,
                };
                out.restricted.push(si.clone());
                k
            };
            sigma.insert(y, values[k].clone());
            out.assignment.insert(si, values[k].clone());
            d = d.edges()[next[k].expect("allowed value")].child.clone();
        }
    }
}
