//! Switch declarations: outcome spaces and distributions.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::constraint::Var;
use crate::error::{InferenceError, ProgramError};
use crate::term::{GroundTerm, TypeDomain};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Distribution {
    Uniform,
    /// One weight per outcome, in outcome order.
    Categorical(Vec<BigRational>),
}

impl Distribution {
    fn probs(&self, n: usize) -> Vec<BigRational> {
        match self {
            Distribution::Uniform => vec![BigRational::new(1.into(), n.into()); n],
            Distribution::Categorical(w) => w.clone(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SwitchDecl {
    pub name: Arc<str>,
    pub domain: Arc<TypeDomain>,
    pub dist: Option<Distribution>,
    probs: Vec<BigRational>,
    probs_f64: Vec<f64>,
}

impl SwitchDecl {
    /// Weights must be nonnegative, one per outcome, and sum to 1 within
    /// 1e-9; they are rescaled to sum to exactly 1.
    pub fn new(name: &str, domain: Arc<TypeDomain>, dist: Option<Distribution>) -> Result<Self, ProgramError> {
        let bad = |m: String| ProgramError::BadSwitch(name.to_string(), m);
        let dist = match dist {
            Some(Distribution::Categorical(w)) => {
                if w.len() != domain.len() {
                    return Err(bad(format!("{} probabilities for {} outcomes", w.len(), domain.len())));
                }
                if w.iter().any(Signed::is_negative) {
                    return Err(bad("negative probability".into()));
                }
                let sum: BigRational = w.iter().sum();
                if (sum.to_f64().unwrap_or(f64::NAN) - 1.0).abs() > 1e-9 {
                    return Err(bad(format!("probabilities sum to {sum}")));
                }
                Some(Distribution::Categorical(w.into_iter().map(|p| p / &sum).collect()))
            }
            d => d,
        };
        let probs = dist.as_ref().map(|d| d.probs(domain.len())).unwrap_or_default();
        let probs_f64 = probs.iter().map(|p| p.to_f64().unwrap_or(f64::NAN)).collect();
        Ok(SwitchDecl { name: Arc::from(name), domain, dist, probs, probs_f64 })
    }

    /// Exact probabilities in outcome order; empty without a distribution.
    pub fn probs(&self) -> &[BigRational] {
        &self.probs
    }

    pub fn probs_f64(&self) -> &[f64] {
        &self.probs_f64
    }

    pub fn is_uniform(&self) -> bool {
        self.probs.windows(2).all(|w| w[0] == w[1]) && !self.probs.is_empty()
    }
}

/// Declared switches by name.
#[derive(Clone, Debug, Default)]
pub struct Switches {
    map: BTreeMap<Arc<str>, SwitchDecl>,
}

impl Switches {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, decl: SwitchDecl) {
        self.map.insert(decl.name.clone(), decl);
    }

    pub fn get(&self, name: &str) -> Option<&SwitchDecl> {
        self.map.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &SwitchDecl> {
        self.map.values()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn decl_of(&self, v: &Var) -> Result<&SwitchDecl, InferenceError> {
        let name = v.switch_instance().map(|s| s.switch.clone()).unwrap_or_else(|| Arc::from(v.name()));
        match self.get(&name) {
            Some(d) if d.dist.is_some() => Ok(d),
            _ => Err(InferenceError::MissingDistribution(name.to_string())),
        }
    }

    /// `P(v = value)` as an exact rational.
    pub fn prob(&self, v: &Var, value: &GroundTerm) -> Result<BigRational, InferenceError> {
        let d = self.decl_of(v)?;
        Ok(v.domain().position(value).map(|i| d.probs[i].clone()).unwrap_or_else(BigRational::zero))
    }

    /// Uniform switches with every weight `1/|domain|`.
    pub fn uniform(name: &str, domain: Arc<TypeDomain>) -> Self {
        let mut s = Switches::new();
        s.insert(SwitchDecl::new(name, domain, Some(Distribution::Uniform)).unwrap());
        s
    }
}
