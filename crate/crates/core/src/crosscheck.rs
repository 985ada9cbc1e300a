//! Agreement of the stabilizer, Gaussian and dense backends on braid /
//! measure programs.
//!
//! Three checks:
//! * closure: every stabilizer state reachable from `init(n)` within `depth`
//!   instructions, and every instruction applied to it, gives the same
//!   outcome probabilities and the same post-measurement state in all three
//!   backends. By induction on program length this covers every program of
//!   that depth over the full grammar.
//! * enumeration: every program over the adjacent-mode grammar
//!   (`braid(j, j+1)`, `measure(j, j+1)`) up to `depth`, run branch by branch
//!   with shared prefixes.
//! * random: transcript distributions of random full-grammar programs.
//!
//! The full grammar on `n` pairs is `braid(j, k)` and `measure(j, k)` for
//! `1 ≤ j < k ≤ 2n`. Stabilizer and Gaussian probabilities are compared as
//! exact dyadic rationals; dense-state values within [`FLOAT_TOLERANCE`].

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::CovarianceMatrix;
use crate::oracle::DenseState;
use crate::prob::exact_dyadic;
use crate::program::{branches, stream_rng, Backend, Instruction, Transcript};
use crate::stabilizer::AccessibleState;

pub const FLOAT_TOLERANCE: f64 = 1e-9;
const MAX_LISTED: usize = 20;

pub fn full_grammar(n_pairs: usize) -> Vec<Instruction> {
    let n = 2 * n_pairs;
    let mut out = Vec::new();
    for j in 1..=n {
        for k in j + 1..=n {
            out.push(Instruction::Braid { j, k });
            out.push(Instruction::Measure { j, k });
        }
    }
    out
}

pub fn adjacent_grammar(n_pairs: usize) -> Vec<Instruction> {
    let n = 2 * n_pairs;
    (1..n)
        .flat_map(|j| [Instruction::Braid { j, k: j + 1 }, Instruction::Measure { j, k: j + 1 }])
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Tally {
    pub checks: u64,
    pub mismatches: u64,
    pub max_float_error: f64,
    pub examples: Vec<String>,
}

impl Tally {
    fn fail(&mut self, what: String) {
        self.mismatches += 1;
        if self.examples.len() < MAX_LISTED {
            self.examples.push(what);
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.checks += other.checks;
        self.mismatches += other.mismatches;
        self.max_float_error = self.max_float_error.max(other.max_float_error);
        let room = MAX_LISTED.saturating_sub(self.examples.len());
        self.examples.extend(other.examples.into_iter().take(room));
        self
    }

    /// Compares one probability across the backends.
    fn probability(&mut self, context: &dyn Fn() -> String, stab: f64, gauss: f64, dense: f64) {
        self.checks += 1;
        let (Some(s), Some(g)) = (exact_dyadic(stab, 40), exact_dyadic(gauss, 40)) else {
            self.fail(format!("{}: non-dyadic probability ({stab}, {gauss})", context()));
            return;
        };
        let err = (dense - stab).abs();
        self.max_float_error = self.max_float_error.max(err);
        if s != g || err > FLOAT_TOLERANCE {
            self.fail(format!("{}: stabilizer {s}, gaussian {g}, dense {dense:.12}", context()));
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosureReport {
    pub n_pairs: usize,
    pub depth: usize,
    pub states: usize,
    pub tally: Tally,
}

fn fidelity_ok(a: &DenseState, b: &DenseState) -> (bool, f64) {
    let err = (1.0 - a.fidelity(b)).abs();
    (err <= FLOAT_TOLERANCE, err)
}

/// One instruction on one stabilizer state, checked in all backends.
fn check_transition(state: &AccessibleState, ins: Instruction, tally: &mut Tally) -> Result<Vec<AccessibleState>> {
    let gauss = CovarianceMatrix::from_state(state);
    let dense = DenseState::from_accessible(state)?;
    let ctx = || format!("{state} / {ins}");
    let mut successors = Vec::new();
    let mut compare_post = |s2: AccessibleState,
                            mut g2: CovarianceMatrix,
                            mut d2: DenseState,
                            step: &dyn Fn(&mut CovarianceMatrix, &mut DenseState) -> Result<()>,
                            tally: &mut Tally|
     -> Result<()> {
        step(&mut g2, &mut d2)?;
        tally.checks += 1;
        let expect_g = CovarianceMatrix::from_state(&s2);
        let (ok, err) = fidelity_ok(&d2, &DenseState::from_accessible(&s2)?);
        tally.max_float_error = tally.max_float_error.max(err);
        if g2.max_abs_difference(&expect_g) != 0.0 || !ok {
            tally.fail(format!("{}: post-state differs from {s2}", ctx()));
        }
        successors.push(s2);
        Ok(())
    };
    match ins {
        Instruction::Braid { j, k } => {
            let s2 = state.braid(j, k)?;
            compare_post(
                s2,
                gauss.clone(),
                dense.clone(),
                &|g, d| {
                    g.braid(j, k)?;
                    d.braid(j, k)
                },
                tally,
            )?;
        }
        Instruction::Measure { j, k } => {
            let ps = Backend::plus_probability(state, j, k)?;
            let pg = gauss.plus_probability(j, k)?;
            let pd = dense.plus_probability(j, k)?;
            tally.probability(&ctx, ps, pg, pd);
            for (m, p) in [(1i8, ps), (-1i8, 1.0 - ps)] {
                if p > 0.0 {
                    let s2 = state.project(j, k, m)?;
                    compare_post(
                        s2,
                        gauss.clone(),
                        dense.clone(),
                        &|g, d| {
                            g.condition(j, k, m)?;
                            d.condition(j, k, m)
                        },
                        tally,
                    )?;
                }
            }
        }
    }
    Ok(successors)
}

pub fn closure_check(n_pairs: usize, depth: usize) -> Result<ClosureReport> {
    let grammar = full_grammar(n_pairs);
    let start = AccessibleState::init(n_pairs)?;
    let mut seen: HashMap<AccessibleState, usize> = HashMap::from([(start.clone(), 0)]);
    let mut level = vec![start];
    let mut tally = Tally::default();
    for d in 0..depth {
        let results = level
            .par_iter()
            .map(|s| {
                let mut t = Tally::default();
                let mut next = Vec::new();
                for &ins in &grammar {
                    next.extend(check_transition(s, ins, &mut t)?);
                }
                Ok((t, next))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut next_level = Vec::new();
        for (t, next) in results {
            tally = tally.merge(t);
            for s in next {
                if !seen.contains_key(&s) {
                    seen.insert(s.clone(), d + 1);
                    next_level.push(s);
                }
            }
        }
        level = next_level;
        if level.is_empty() {
            break;
        }
    }
    Ok(ClosureReport {
        n_pairs,
        depth,
        states: seen.len(),
        tally,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnumerationReport {
    pub n_pairs: usize,
    pub depth: usize,
    pub grammar_size: usize,
    pub programs: u64,
    pub branch_steps: u64,
    pub tally: Tally,
}

#[derive(Clone)]
struct Branch {
    s: AccessibleState,
    g: CovarianceMatrix,
    d: DenseState,
}

fn step_branches(branches: &[Branch], ins: Instruction, path: &[Instruction], tally: &mut Tally) -> Result<Vec<Branch>> {
    let mut out = Vec::with_capacity(branches.len() * 2);
    for b in branches {
        match ins {
            Instruction::Braid { j, k } => {
                let mut nb = b.clone();
                Backend::braid(&mut nb.s, j, k)?;
                nb.g.braid(j, k)?;
                nb.d.braid(j, k)?;
                out.push(nb);
            }
            Instruction::Measure { j, k } => {
                let ps = Backend::plus_probability(&b.s, j, k)?;
                let ctx = || {
                    let p: Vec<String> = path.iter().chain([&ins]).map(|i| i.to_string()).collect();
                    p.join(" ")
                };
                tally.probability(&ctx, ps, b.g.plus_probability(j, k)?, b.d.plus_probability(j, k)?);
                for (m, p) in [(1i8, ps), (-1i8, 1.0 - ps)] {
                    if p > 0.0 {
                        let mut nb = b.clone();
                        nb.s.condition(j, k, m)?;
                        nb.g.condition(j, k, m)?;
                        nb.d.condition(j, k, m)?;
                        out.push(nb);
                    }
                }
            }
        }
    }
    Ok(out)
}

fn enumerate(branches: &[Branch], grammar: &[Instruction], path: &mut Vec<Instruction>, depth: usize, report: &mut EnumerationReport) -> Result<()> {
    report.programs += 1;
    if path.len() == depth {
        return Ok(());
    }
    for &ins in grammar {
        let next = step_branches(branches, ins, path, &mut report.tally)?;
        report.branch_steps += branches.len() as u64;
        path.push(ins);
        enumerate(&next, grammar, path, depth, report)?;
        path.pop();
    }
    Ok(())
}

/// Every program over `grammar` of length `0..=depth`, sharing prefixes.
pub fn enumeration_check(n_pairs: usize, depth: usize, grammar: &[Instruction]) -> Result<EnumerationReport> {
    let root = Branch {
        s: AccessibleState::init(n_pairs)?,
        g: CovarianceMatrix::from_state(&AccessibleState::init(n_pairs)?),
        d: DenseState::init(n_pairs)?,
    };
    // split on the first instruction so subtrees run in parallel
    let mut base = EnumerationReport {
        n_pairs,
        depth,
        grammar_size: grammar.len(),
        programs: 1,
        branch_steps: 0,
        tally: Tally::default(),
    };
    if depth == 0 {
        return Ok(base);
    }
    let subtrees = grammar
        .par_iter()
        .map(|&ins| {
            let mut r = EnumerationReport {
                n_pairs,
                depth,
                grammar_size: grammar.len(),
                programs: 0,
                branch_steps: 1,
                tally: Tally::default(),
            };
            let next = step_branches(std::slice::from_ref(&root), ins, &[], &mut r.tally)?;
            let mut path = vec![ins];
            enumerate(&next, grammar, &mut path, depth, &mut r)?;
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    for r in subtrees {
        base.programs += r.programs;
        base.branch_steps += r.branch_steps;
        base.tally = base.tally.merge(r.tally);
    }
    Ok(base)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RandomReport {
    pub n_pairs: usize,
    pub depth: usize,
    pub programs: u64,
    pub seed: u64,
    pub tally: Tally,
}

pub fn random_program<R: Rng + ?Sized>(grammar: &[Instruction], depth: usize, rng: &mut R) -> Vec<Instruction> {
    (0..depth).map(|_| grammar[rng.gen_range(0..grammar.len())]).collect()
}

fn distribution<B: Backend>(start: &B, program: &[Instruction]) -> Result<BTreeMap<Transcript, f64>> {
    let mut out = BTreeMap::new();
    for (t, p, _) in branches(start, program)? {
        *out.entry(t).or_insert(0.0) += p;
    }
    Ok(out)
}

/// Program `t` is drawn from stream `t` of `seed`.
pub fn random_check(n_pairs: usize, depth: usize, programs: u64, seed: u64) -> Result<RandomReport> {
    let grammar = full_grammar(n_pairs);
    let s0 = AccessibleState::init(n_pairs)?;
    let g0 = CovarianceMatrix::from_state(&s0);
    let d0 = DenseState::init(n_pairs)?;
    let tally = (0..programs)
        .into_par_iter()
        .map(|t| {
            let program = random_program(&grammar, depth, &mut stream_rng(seed, t));
            let (ds, dg, dd) = (distribution(&s0, &program)?, distribution(&g0, &program)?, distribution(&d0, &program)?);
            let mut tally = Tally::default();
            let text = || program.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ");
            let mut keys: Vec<&Transcript> = ds.keys().chain(dg.keys()).chain(dd.keys()).collect();
            keys.sort();
            keys.dedup();
            for key in keys {
                let get = |m: &BTreeMap<Transcript, f64>| m.get(key).copied().unwrap_or(0.0);
                let ctx = || format!("program #{t} [{}] transcript {key:?}", text());
                tally.probability(&ctx, get(&ds), get(&dg), get(&dd));
            }
            Ok(tally)
        })
        .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;
    Ok(RandomReport {
        n_pairs,
        depth,
        programs,
        seed,
        tally,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrosscheckReport {
    pub closure: Vec<ClosureReport>,
    pub enumeration: EnumerationReport,
    pub random: RandomReport,
    pub mismatches: u64,
    pub verdict: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CrosscheckConfig {
    pub max_pairs: usize,
    pub depth: usize,
    pub enumeration_pairs: usize,
    pub random_pairs: usize,
    pub random_programs: u64,
    pub seed: u64,
}

impl Default for CrosscheckConfig {
    fn default() -> Self {
        Self {
            max_pairs: 4,
            depth: 8,
            enumeration_pairs: 2,
            random_pairs: 5,
            random_programs: 10_000,
            seed: 0,
        }
    }
}

pub fn crosscheck(config: &CrosscheckConfig) -> Result<CrosscheckReport> {
    if config.max_pairs == 0 || config.enumeration_pairs == 0 || config.random_pairs == 0 {
        return Err(Error::Argument("pair counts must be positive".into()));
    }
    let closure = (1..=config.max_pairs)
        .map(|n| closure_check(n, config.depth))
        .collect::<Result<Vec<_>>>()?;
    let enumeration = enumeration_check(config.enumeration_pairs, config.depth, &adjacent_grammar(config.enumeration_pairs))?;
    let random = random_check(config.random_pairs, config.depth, config.random_programs, config.seed)?;
    let mismatches = closure.iter().map(|c| c.tally.mismatches).sum::<u64>() + enumeration.tally.mismatches + random.tally.mismatches;
    Ok(CrosscheckReport {
        closure,
        enumeration,
        random,
        mismatches,
        verdict: if mismatches == 0 { "PASS".into() } else { "FAIL".into() },
    })
}
