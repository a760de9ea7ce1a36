//! Quadrature checks of the inequalities behind the support theorem.
//!
//! The elementary lemmas hold for arbitrary smooth functions with the stated
//! finiteness, so they are exercised on random members of a closed-form
//! family; a failure points at a quadrature or transcription problem (or at
//! constants that are too optimistic, see [`lemmas::DecayIntegrals`]).

pub mod carleman;
pub mod energy;
pub mod family;
pub mod lemmas;
pub mod vanishing;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use family::CornerPolynomial;
use lemmas::{check_bound0, check_bound0_transverse, check_fubini, decay_corner_power, decay_integrals, QuadSpec};

pub use carleman::{carleman_check, carleman_sweep, CarlemanInstance, CarlemanSweep, CarlemanTerms};
pub use energy::{check_energy, EnergyReport};
pub use family::TestFunction2D;
pub use lemmas::InequalityCheck;
pub use vanishing::{vanishing_demo, VanishingReport};

/// Shared settings for a random-corpus run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaContext {
    pub t_max: f64,
    /// Random test functions per parameter value.
    pub count: usize,
    pub seed: u64,
    pub quad: QuadSpec,
}

impl LemmaContext {
    /// Independent stream for case `index` of parameter `param`, so results
    /// do not depend on scheduling.
    fn rng(&self, param: u64, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream((param << 32) | index as u64);
        rng
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    /// Parameter of the inequality (`k`, `m`, or 0).
    pub param: String,
    pub function: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub pass: bool,
    pub rel_change: f64,
    /// Ratio under the alternative constants, where one is tracked.
    pub alt_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaSummary {
    pub name: String,
    pub cases: usize,
    pub passed: usize,
    pub worst_ratio: f64,
    pub worst_alt_ratio: Option<f64>,
    /// Largest relative change under the final panel doubling.
    pub max_rel_change: f64,
    pub records: Vec<CaseRecord>,
}

impl LemmaSummary {
    fn from_records(name: &str, records: Vec<CaseRecord>) -> Self {
        let alts: Vec<f64> = records.iter().filter_map(|r| r.alt_ratio).collect();
        LemmaSummary {
            name: name.to_string(),
            cases: records.len(),
            passed: records.iter().filter(|r| r.pass).count(),
            worst_ratio: records.iter().map(|r| r.ratio).fold(0.0, f64::max),
            worst_alt_ratio: (!alts.is_empty()).then(|| alts.iter().copied().fold(0.0, f64::max)),
            max_rel_change: records.iter().map(|r| r.rel_change).fold(0.0, f64::max),
            records,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.passed == self.cases
    }
}

fn record(param: String, function: String, c: &InequalityCheck, alt: Option<f64>) -> CaseRecord {
    CaseRecord {
        param,
        function,
        lhs: c.lhs,
        rhs: c.rhs,
        ratio: c.ratio(),
        pass: c.pass,
        rel_change: c.rel_change,
        alt_ratio: alt,
    }
}

pub trait LemmaCheck: Send + Sync {
    fn name(&self) -> &'static str;
    fn run(&self, ctx: &LemmaContext) -> Result<LemmaSummary>;
}

/// Characteristic bounds for `k ∈ {0, 1, 2}` and the transverse bound.
#[derive(Debug, Default)]
pub struct Bound0Check;

impl LemmaCheck for Bound0Check {
    fn name(&self) -> &'static str {
        "bound0"
    }

    fn run(&self, ctx: &LemmaContext) -> Result<LemmaSummary> {
        let t = ctx.t_max;
        let along: Vec<(u32, usize)> = (0..3).flat_map(|k| (0..ctx.count).map(move |i| (k, i))).collect();
        let mut records = along
            .par_iter()
            .map(|&(k, i)| {
                let mut rng = ctx.rng(k as u64, i);
                let w = {
                    let power = rng.gen_range(0..=2);
                    CornerPolynomial::random(&mut rng, power, t)
                };
                let mu = rng.gen_range(0.02..0.9) * t;
                let b = rng.gen_range(mu + 0.05 * t..=t);
                let c = check_bound0(&w, k, mu, b, &ctx.quad)?;
                Ok(record(format!("k={k}"), w.label(), &c, None))
            })
            .collect::<Result<Vec<_>>>()?;
        let transverse = (0..ctx.count)
            .into_par_iter()
            .map(|i| {
                let mut rng = ctx.rng(3, i);
                let w = {
                    let power = rng.gen_range(0..=2);
                    CornerPolynomial::random(&mut rng, power, t)
                };
                let nu = rng.gen_range(0.05..=1.0) * t.min(1.0);
                let a = rng.gen_range(0.0..0.95) * nu;
                let c = check_bound0_transverse(&w, a, nu, &ctx.quad)?;
                Ok(record("transverse".into(), w.label(), &c, None))
            })
            .collect::<Result<Vec<_>>>()?;
        records.extend(transverse);
        Ok(LemmaSummary::from_records(self.name(), records))
    }
}

#[derive(Debug, Default)]
pub struct FubiniCheck;

impl LemmaCheck for FubiniCheck {
    fn name(&self) -> &'static str {
        "fubini"
    }

    fn run(&self, ctx: &LemmaContext) -> Result<LemmaSummary> {
        let t = ctx.t_max;
        let records = (0..ctx.count)
            .into_par_iter()
            .map(|i| {
                let mut rng = ctx.rng(0, i);
                let f = {
                    let power = rng.gen_range(0..=2);
                    CornerPolynomial::random(&mut rng, power, t)
                };
                let a0 = rng.gen_range(0.0..0.5) * t;
                let b = rng.gen_range(a0 + 0.1 * t..=t);
                let c = check_fubini(&f, a0, b, &ctx.quad)?;
                let scale = c.scale.max(f64::MIN_POSITIVE);
                Ok(CaseRecord {
                    param: format!("a0={a0:.4},b={b:.4}"),
                    function: f.label(),
                    lhs: c.nested,
                    rhs: c.weighted,
                    ratio: c.residual / scale,
                    pass: c.pass,
                    rel_change: c.rel_change,
                    alt_ratio: None,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LemmaSummary::from_records(self.name(), records))
    }
}

/// Decay estimate for `m ∈ {0, 1, 2, 3}`; the stated constants decide the
/// verdict and the rotated-argument constants are tracked alongside.
#[derive(Debug, Default)]
pub struct DecayCheck;

impl LemmaCheck for DecayCheck {
    fn name(&self) -> &'static str {
        "decay"
    }

    fn run(&self, ctx: &LemmaContext) -> Result<LemmaSummary> {
        let t = ctx.t_max;
        let cases: Vec<(u32, usize)> = (0..4).flat_map(|m| (0..ctx.count).map(move |i| (m, i))).collect();
        let records = cases
            .par_iter()
            .map(|&(m, i)| {
                let mut rng = ctx.rng(m as u64, i);
                let w = CornerPolynomial::random(&mut rng, decay_corner_power(m), t);
                let d = decay_integrals(&w, m, t, &ctx.quad)?;
                Ok(record(format!("m={m}"), w.label(), &d.stated(), Some(d.rotated().ratio())))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LemmaSummary::from_records(self.name(), records))
    }
}

/// Lemma checks by name.
pub struct LemmaRegistry {
    checks: BTreeMap<&'static str, Box<dyn LemmaCheck>>,
}

impl LemmaRegistry {
    pub fn empty() -> Self {
        LemmaRegistry { checks: BTreeMap::new() }
    }

    pub fn register(&mut self, check: Box<dyn LemmaCheck>) {
        self.checks.insert(check.name(), check);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.checks.keys().copied()
    }

    pub fn get(&self, name: &str) -> Result<&dyn LemmaCheck> {
        self.checks.get(name).map(|c| c.as_ref()).ok_or_else(|| {
            let known: Vec<&str> = self.names().collect();
            Error::Config(format!("unknown lemma check '{name}' (known: {})", known.join(", ")))
        })
    }
}

impl Default for LemmaRegistry {
    fn default() -> Self {
        let mut r = LemmaRegistry::empty();
        r.register(Box::new(Bound0Check));
        r.register(Box::new(FubiniCheck));
        r.register(Box::new(DecayCheck));
        r
    }
}
