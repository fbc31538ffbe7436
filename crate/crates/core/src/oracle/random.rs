//! Seeded generator of small switch programs.

use std::fmt::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug)]
pub struct GenConfig {
    pub max_switches: usize,
    pub max_domain: usize,
    pub max_instances: usize,
    pub max_clauses: usize,
    pub uniform_only: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig { max_switches: 2, max_domain: 4, max_instances: 5, max_clauses: 3, uniform_only: false }
    }
}

/// A generated program defining `q/0` and `e/0`.
#[derive(Clone, Debug)]
pub struct RandomProgram {
    pub source: String,
    pub seed: u64,
}

struct Sw {
    name: String,
    values: Vec<String>,
}

struct Gen {
    rng: ChaCha8Rng,
    cfg: GenConfig,
    switches: Vec<Sw>,
    pool: Vec<(usize, usize)>,
}

impl Gen {
    fn clause(&mut self, head: &str) -> String {
        let n = self.rng.gen_range(1..=self.pool.len().min(3));
        let picked: Vec<(usize, usize)> = self.pool.choose_multiple(&mut self.rng, n).copied().collect();
        let mut body = Vec::new();
        let mut vars: Vec<(String, usize)> = Vec::new();
        for &(s, inst) in &picked {
            let v = format!("X{}_{inst}", s);
            body.push(format!("msw({}, {inst}, {v})", self.switches[s].name));
            vars.push((v, s));
        }
        let tests = self.rng.gen_range(0..=2);
        for _ in 0..tests {
            let lit = self.literal(&vars);
            body.push(lit);
        }
        format!("{head} :- {}.", body.join(", "))
    }

    fn literal(&mut self, vars: &[(String, usize)]) -> String {
        let (x, s) = vars.choose(&mut self.rng).unwrap().clone();
        let same: Vec<&(String, usize)> = vars.iter().filter(|(y, t)| *t == s && *y != x).collect();
        let rhs = if !same.is_empty() && self.rng.gen_bool(0.5) {
            same.choose(&mut self.rng).unwrap().0.clone()
        } else {
            self.switches[s].values.choose(&mut self.rng).unwrap().clone()
        };
        let op = if self.rng.gen_bool(0.5) { "=" } else { "\\=" };
        if self.rng.gen_bool(0.2) {
            let c = self.switches[s].values.choose(&mut self.rng).unwrap().clone();
            format!("({x} {op} {rhs} -> true ; {x} = {c})")
        } else {
            format!("{x} {op} {rhs}")
        }
    }

    fn distribution(&mut self, k: usize) -> String {
        if self.cfg.uniform_only || self.rng.gen_bool(0.5) {
            return "uniform".into();
        }
        let mut cuts: Vec<u32> = (0..k - 1).map(|_| self.rng.gen_range(0..=100)).collect();
        cuts.sort_unstable();
        let mut prev = 0;
        let mut parts = Vec::new();
        for c in cuts.into_iter().chain([100]) {
            parts.push(format!("{:.2}", f64::from(c - prev) / 100.0));
            prev = c;
        }
        format!("[{}]", parts.join(", "))
    }
}

/// Builds a program from `seed`. Every comparison relates outcomes of the
/// same switch, or an outcome and a value of its domain.
pub fn random_program(seed: u64, cfg: GenConfig) -> RandomProgram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nsw = rng.gen_range(1..=cfg.max_switches);
    let mut switches = Vec::new();
    for i in 0..nsw {
        let k = rng.gen_range(2..=cfg.max_domain);
        let values = if rng.gen_bool(0.5) {
            (1..=k).map(|v| v.to_string()).collect()
        } else {
            ["a", "b", "c", "d", "e", "f"][..k].iter().map(|v| v.to_string()).collect()
        };
        switches.push(Sw { name: format!("s{i}"), values });
    }
    let ninst = rng.gen_range(1..=cfg.max_instances);
    let pool = (0..ninst).map(|i| (i % nsw, i / nsw + 1)).collect();
    let mut g = Gen { rng, cfg, switches, pool };
    let mut src = String::new();
    for i in 0..g.switches.len() {
        let k = g.switches[i].values.len();
        let dist = g.distribution(k);
        let sw = &g.switches[i];
        let _ = writeln!(src, "values({}, [{}]).", sw.name, sw.values.join(", "));
        let _ = writeln!(src, "set_sw({}, {dist}).", sw.name);
    }
    for head in ["q", "e"] {
        let n = g.rng.gen_range(1..=cfg.max_clauses);
        for _ in 0..n {
            let c = g.clause(head);
            src.push_str(&c);
            src.push('\n');
        }
    }
    RandomProgram { source: src, seed }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prolog::Program;

    #[test]
    fn seed_zero() {
        let p = random_program(0, GenConfig::default());
        let expected = "\
values(s0, [a, b, c]).
set_sw(s0, [0.81, 0.10, 0.09]).
values(s1, [a, b]).
set_sw(s1, uniform).
q :- msw(s1, 2, X1_2).
q :- msw(s0, 2, X0_2), msw(s0, 3, X0_3), X0_2 \\= c, X0_3 \\= c.
e :- msw(s0, 3, X0_3), msw(s0, 1, X0_1).
e :- msw(s0, 1, X0_1), msw(s0, 3, X0_3), X0_3 \\= X0_1.
";
        assert_eq!(p.source, expected);
    }

    #[test]
    fn programs_parse() {
        for seed in 0..200 {
            let p = random_program(seed, GenConfig::default());
            let prog = Program::parse(&p.source).unwrap_or_else(|e| panic!("{e}\n{}", p.source));
            assert!(prog.defines("q", 0) && prog.defines("e", 0));
        }
    }
}
