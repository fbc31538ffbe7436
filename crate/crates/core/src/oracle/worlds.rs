//! Probabilities by enumerating possible worlds.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{EvalError, OracleError};
use crate::frontend::{on_big_stack, succeeds_here, EvalOptions};
use crate::prolog::{Program, Term};
use crate::term::{GroundTerm, SwitchInstance};

pub const WORLD_LIMIT: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WorldSummary {
    /// `P(query and evidence)`.
    pub joint: BigRational,
    /// `P(evidence)`; 1 without evidence.
    pub evidence: BigRational,
    /// Total mass of the enumerated worlds.
    pub total: BigRational,
    /// Number of partial worlds that decided the outcome.
    pub worlds: u64,
}

impl WorldSummary {
    /// `P(query | evidence)`, `None` when the evidence is impossible.
    pub fn conditional(&self) -> Option<BigRational> {
        (!self.evidence.is_zero()).then(|| &self.joint / &self.evidence)
    }

    /// `P(query | evidence)`, or 0 when the evidence is impossible.
    pub fn probability(&self) -> BigRational {
        self.conditional().unwrap_or_else(BigRational::zero)
    }
}

struct Enum<'a> {
    prog: &'a Program,
    query: &'a Term,
    evidence: Option<&'a Term>,
    limit: u64,
    max_depth: usize,
    world: BTreeMap<SwitchInstance, GroundTerm>,
    out: WorldSummary,
}

impl Enum<'_> {
    fn check(&self, goal: &Term) -> Result<bool, EvalError> {
        let world = &self.world;
        succeeds_here(self.prog, goal, &|si| world.get(si).cloned(), self.max_depth)
    }

    fn explore(&mut self, weight: BigRational) -> Result<(), OracleError> {
        let e = match self.evidence {
            Some(e) => self.check(e),
            None => Ok(true),
        };
        let e_holds = e == Ok(true);
        let q = match e {
            Ok(true) => self.check(self.query),
            other => other,
        };
        match q {
            Err(EvalError::NeedInstance(si)) => self.branch(si, weight),
            Err(x) => Err(x.into()),
            Ok(holds) => {
                self.out.worlds += 1;
                self.out.total += &weight;
                if self.out.worlds > self.limit {
                    return Err(OracleError::WorldLimit(self.limit));
                }
                if e_holds {
                    self.out.evidence += &weight;
                    if holds {
                        self.out.joint += &weight;
                    }
                }
                Ok(())
            }
        }
    }

    fn branch(&mut self, si: SwitchInstance, weight: BigRational) -> Result<(), OracleError> {
        let decl = self.prog.switches().get(&si.switch).filter(|d| d.dist.is_some());
        let decl = decl.ok_or_else(|| OracleError::MissingDistribution(si.switch.to_string()))?;
        let outcomes: Vec<(GroundTerm, BigRational)> =
            decl.domain.values().iter().cloned().zip(decl.probs().iter().cloned()).collect();
        for (v, p) in outcomes {
            if p.is_zero() {
                continue;
            }
            self.world.insert(si.clone(), v);
            let r = self.explore(&weight * p);
            self.world.remove(&si);
            r?;
        }
        Ok(())
    }
}

/// Exact `P(query and evidence)` and `P(evidence)` by deciding switch
/// instances only as derivations demand them.
pub fn brute_force(
    prog: &Program,
    query: &Term,
    evidence: Option<&Term>,
    limit: u64,
) -> Result<WorldSummary, OracleError> {
    let opts = EvalOptions::default();
    on_big_stack(&opts, || {
        let mut e = Enum {
            prog,
            query,
            evidence,
            limit,
            max_depth: opts.max_depth,
            world: BTreeMap::new(),
            out: WorldSummary {
                joint: BigRational::zero(),
                evidence: BigRational::zero(),
                total: BigRational::zero(),
                worlds: 0,
            },
        };
        e.explore(BigRational::one())?;
        if evidence.is_none() {
            e.out.evidence = BigRational::one();
        }
        Ok(e.out)
    })
}

/// Probability that among `n` people with uniform birthdays over `days`
/// days at least two share one.
pub fn closed_form_birthday(n: u64, days: u64) -> BigRational {
    let d = BigInt::from(days);
    let all_distinct = (0..n).fold(BigRational::one(), |acc, i| {
        acc * BigRational::new(BigInt::from(days.saturating_sub(i)), d.clone())
    });
    BigRational::one() - all_distinct
}
