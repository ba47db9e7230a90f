//! Experiment configuration: a strict TOML schema with unknown-key
//! rejection, validated against every module precondition before any
//! task starts.

use std::path::PathBuf;

use num_complex::Complex64;
use serde::Deserialize;

use crate::ensemble::XiSpec;
use crate::error::Error;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Law,
    Process,
    Certify,
    Anticonc,
    Walk,
    Potential,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Law => "law",
            ExperimentKind::Process => "process",
            ExperimentKind::Certify => "certify",
            ExperimentKind::Anticonc => "anticonc",
            ExperimentKind::Walk => "walk",
            ExperimentKind::Potential => "potential",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    #[serde(default)]
    pub n: Vec<usize>,
    /// Expected nonzeros per row; exactly one of `d` and `p` may be given.
    #[serde(default)]
    pub d: Vec<f64>,
    #[serde(default)]
    pub p: Vec<f64>,
    #[serde(default = "default_eps")]
    pub eps: Vec<f64>,
    /// Complex points as [re, im] pairs.
    #[serde(default = "default_z")]
    pub z: Vec<[f64; 2]>,
    #[serde(default = "default_xi")]
    pub xi: Vec<String>,
    #[serde(default = "default_c_sched")]
    pub c_sched: Vec<f64>,
    #[serde(default = "default_c_star")]
    pub c_star: Vec<f64>,
    #[serde(default = "default_c_prime")]
    pub c_prime: Vec<f64>,
}

fn default_eps() -> Vec<f64> {
    vec![0.1]
}
fn default_z() -> Vec<[f64; 2]> {
    vec![[1.0, 0.0]]
}
fn default_xi() -> Vec<String> {
    vec!["rademacher".to_string()]
}
fn default_c_sched() -> Vec<f64> {
    vec![1.0]
}
fn default_c_star() -> Vec<f64> {
    vec![0.25]
}
fn default_c_prime() -> Vec<f64> {
    vec![8.0]
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            n: Vec::new(),
            d: Vec::new(),
            p: Vec::new(),
            eps: default_eps(),
            z: default_z(),
            xi: default_xi(),
            c_sched: default_c_sched(),
            c_star: default_c_star(),
            c_prime: default_c_prime(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seeds {
    #[serde(default)]
    pub list: Option<Vec<u64>>,
    #[serde(default)]
    pub base: Option<u64>,
    #[serde(default)]
    pub count: Option<u64>,
}

impl Seeds {
    pub fn resolve(&self) -> Result<Vec<u64>> {
        match (&self.list, self.base, self.count) {
            (Some(list), None, None) => {
                if list.is_empty() {
                    return Err(Error::Config("seeds.list: must be nonempty".into()));
                }
                Ok(list.clone())
            }
            (None, Some(base), Some(count)) => {
                if count == 0 {
                    return Err(Error::Config("seeds.count: must be positive".into()));
                }
                Ok((0..count).map(|i| base.wrapping_add(i)).collect())
            }
            _ => Err(Error::Config(
                "seeds: give either `list` or both `base` and `count`".into(),
            )),
        }
    }
}

/// Knobs that individual experiment kinds consume; every field has a
/// default so a config only mentions what it changes.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Options {
    /// Entry-modulus threshold for certificate events.
    pub beta: f64,
    /// Monte Carlo subsets per size in the expansion event.
    pub subset_trials: usize,
    /// Sampled certificate checks inside each process step.
    pub certify_steps: bool,
    /// Rectangle-grid resolution per axis for the empirical law check.
    pub law_grid_cells: usize,
    /// Half-width of the rectangle grid.
    pub law_grid_limit: f64,
    /// Monte Carlo trials per projection experiment.
    pub anticonc_trials: usize,
    /// r = n - rank_offset in the projection experiment.
    pub rank_offset: usize,
    pub walk_q: Vec<f64>,
    pub walk_steps: Vec<usize>,
    pub walk_y0: f64,
    /// One of always-up, random, stay.
    pub walk_policy: String,
    pub walk_trials: usize,
    pub threshold_div: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            beta: 1.0,
            subset_trials: 64,
            certify_steps: false,
            law_grid_cells: 10,
            law_grid_limit: 1.5,
            anticonc_trials: 200,
            rank_offset: 2,
            walk_q: vec![2f64.powi(-20)],
            walk_steps: vec![200],
            walk_y0: 0.0,
            walk_policy: "always-up".to_string(),
            walk_trials: 100_000,
            threshold_div: 16,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub output: PathBuf,
    /// Worker threads; 0 defers to CIRCULAB_THREADS, then to the host.
    #[serde(default)]
    pub parallelism: usize,
    #[serde(default)]
    pub grid: Grid,
    pub seeds: Seeds,
    #[serde(default)]
    pub options: Options,
}

pub fn parse_xi(name: &str) -> Result<XiSpec> {
    match name {
        "rademacher" => Ok(XiSpec::Rademacher),
        "complex-gaussian" => Ok(XiSpec::ComplexGaussian),
        "unit-circle" => Ok(XiSpec::UnitCircleUniform),
        "bernoulli-scaled" => Ok(XiSpec::BernoulliScaled),
        other => Err(Error::Config(format!(
            "grid.xi: unknown distribution {:?} (expected rademacher, complex-gaussian, unit-circle, or bernoulli-scaled)",
            other
        ))),
    }
}

/// One fully resolved work unit.  `index` fixes output row order and
/// seeds the task's RNG streams together with the tuple itself.
#[derive(Debug, Clone)]
pub struct Task {
    pub index: usize,
    pub kind: ExperimentKind,
    pub n: usize,
    pub d: f64,
    pub eps: f64,
    pub z: Complex64,
    pub xi: XiSpec,
    pub xi_name: String,
    pub c_sched: f64,
    pub c_star: f64,
    pub c_prime: f64,
    pub seed: u64,
    pub walk_q: f64,
    pub walk_steps: usize,
}

impl Task {
    pub fn label(&self) -> String {
        match self.kind {
            ExperimentKind::Walk => format!(
                "walk q={} steps={} seed={}",
                crate::report::fmt_f64(self.walk_q),
                self.walk_steps,
                self.seed
            ),
            kind => format!(
                "{} n={} d={} eps={} z={}+{}i xi={} seed={}",
                kind.as_str(),
                self.n,
                crate::report::fmt_f64(self.d),
                crate::report::fmt_f64(self.eps),
                crate::report::fmt_f64(self.z.re),
                crate::report::fmt_f64(self.z.im),
                self.xi_name,
                self.seed
            ),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<ExperimentConfig> {
        toml::from_str(text).map_err(|e| Error::Config(format!("config parse: {}", e)))
    }

    /// Expands the grid into the task list, validating every tuple against
    /// its module's preconditions before any work starts.
    pub fn tasks(&self) -> Result<Vec<Task>> {
        let seeds = self.seeds.resolve()?;
        let mut tasks = Vec::new();
        if self.kind == ExperimentKind::Walk {
            self.validate_walk()?;
            for &q in &self.options.walk_q {
                for &steps in &self.options.walk_steps {
                    for &seed in &seeds {
                        tasks.push(Task {
                            index: tasks.len(),
                            kind: self.kind,
                            n: 0,
                            d: 0.0,
                            eps: 0.0,
                            z: Complex64::new(0.0, 0.0),
                            xi: XiSpec::Rademacher,
                            xi_name: String::new(),
                            c_sched: 1.0,
                            c_star: 0.25,
                            c_prime: 8.0,
                            seed,
                            walk_q: q,
                            walk_steps: steps,
                        });
                    }
                }
            }
            return Ok(tasks);
        }

        let g = &self.grid;
        if g.n.is_empty() {
            return Err(Error::Config("grid.n: must be nonempty".into()));
        }
        if g.d.is_empty() == g.p.is_empty() {
            return Err(Error::Config("grid: exactly one of `d` and `p` must be given".into()));
        }
        if g.eps.is_empty() || g.z.is_empty() || g.xi.is_empty() {
            return Err(Error::Config("grid: eps, z, and xi must be nonempty".into()));
        }
        if g.c_sched.is_empty() || g.c_star.is_empty() || g.c_prime.is_empty() {
            return Err(Error::Config("grid: c_sched, c_star, c_prime must be nonempty".into()));
        }
        for &n in &g.n {
            let densities: Vec<f64> = if g.d.is_empty() {
                g.p.iter().map(|&p| p * n as f64).collect()
            } else {
                g.d.clone()
            };
            for &d in &densities {
                for &eps in &g.eps {
                    for &[re, im] in &g.z {
                        for xi_name in &g.xi {
                            for &c_sched in &g.c_sched {
                                for &c_star in &g.c_star {
                                    for &c_prime in &g.c_prime {
                                        let tuple = Task {
                                            index: 0,
                                            kind: self.kind,
                                            n,
                                            d,
                                            eps,
                                            z: Complex64::new(re, im),
                                            xi: parse_xi(xi_name)?,
                                            xi_name: xi_name.clone(),
                                            c_sched,
                                            c_star,
                                            c_prime,
                                            seed: 0,
                                            walk_q: 0.0,
                                            walk_steps: 0,
                                        };
                                        self.validate_tuple(&tuple)?;
                                        for &seed in &seeds {
                                            let mut t = tuple.clone();
                                            t.index = tasks.len();
                                            t.seed = seed;
                                            tasks.push(t);
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(tasks)
    }

    fn validate_tuple(&self, t: &Task) -> Result<()> {
        if t.n < 2 {
            return Err(Error::Config(format!("grid.n: {} violates n >= 2", t.n)));
        }
        if !(t.d > 0.0 && t.d <= t.n as f64 / 2.0) {
            return Err(Error::Config(format!(
                "grid.d: {} violates 0 < d <= n/2 at n = {}",
                t.d, t.n
            )));
        }
        if !(0.0..1.0).contains(&t.eps) {
            return Err(Error::Config(format!("grid.eps: {} violates 0 <= eps < 1", t.eps)));
        }
        if !(t.c_sched > 0.0) {
            return Err(Error::Config(format!("grid.c_sched: {} must be positive", t.c_sched)));
        }
        if !(t.c_star > 0.0 && t.c_star <= 1.0) {
            return Err(Error::Config(format!("grid.c_star: {} violates 0 < c_star <= 1", t.c_star)));
        }
        if !(t.c_prime > 0.0) {
            return Err(Error::Config(format!("grid.c_prime: {} must be positive", t.c_prime)));
        }
        match self.kind {
            ExperimentKind::Law | ExperimentKind::Potential => {
                if t.z.norm() == 0.0 {
                    return Err(Error::Config("grid.z: must be nonzero".into()));
                }
            }
            ExperimentKind::Process => {
                if t.z.norm() == 0.0 {
                    return Err(Error::Config("grid.z: must be nonzero".into()));
                }
                if t.d <= 1.0 {
                    return Err(Error::Config(format!(
                        "grid.d: {} violates d > 1 required by the step schedule",
                        t.d
                    )));
                }
            }
            ExperimentKind::Certify => {
                if t.d <= std::f64::consts::E {
                    return Err(Error::Config(format!(
                        "grid.d: {} violates d > e required by certificate size bounds",
                        t.d
                    )));
                }
                if !(self.options.beta > 0.0) {
                    return Err(Error::Config("options.beta: must be positive".into()));
                }
            }
            ExperimentKind::Anticonc => {
                if t.d <= std::f64::consts::E {
                    return Err(Error::Config(format!(
                        "grid.d: {} violates d > e required by the projection bound",
                        t.d
                    )));
                }
                if !(t.z.norm() >= 1.0 && t.z.norm() <= t.d) {
                    return Err(Error::Config(format!(
                        "grid.z: |z| = {} violates 1 <= |z| <= d = {}",
                        t.z.norm(),
                        t.d
                    )));
                }
                if self.options.rank_offset + 1 >= t.n {
                    return Err(Error::Config(format!(
                        "options.rank_offset: {} leaves no rank at n = {}",
                        self.options.rank_offset, t.n
                    )));
                }
                if self.options.anticonc_trials == 0 {
                    return Err(Error::Config("options.anticonc_trials: must be positive".into()));
                }
            }
            ExperimentKind::Walk => unreachable!("walk tuples validated separately"),
        }
        Ok(())
    }

    fn validate_walk(&self) -> Result<()> {
        let o = &self.options;
        if o.walk_q.is_empty() || o.walk_steps.is_empty() {
            return Err(Error::Config("options.walk_q / walk_steps: must be nonempty".into()));
        }
        for &q in &o.walk_q {
            if !(0.0..1.0).contains(&q) {
                return Err(Error::Config(format!("options.walk_q: {} violates 0 <= q < 1", q)));
            }
        }
        if o.walk_trials == 0 {
            return Err(Error::Config("options.walk_trials: must be positive".into()));
        }
        if o.threshold_div == 0 {
            return Err(Error::Config("options.threshold_div: must be positive".into()));
        }
        if !(o.walk_y0 >= 0.0) || (o.walk_y0 * 2.0).fract() != 0.0 {
            return Err(Error::Config(
                "options.walk_y0: must be a nonnegative half-integer".into(),
            ));
        }
        for &steps in &o.walk_steps {
            if o.walk_y0 > steps as f64 / 8.0 {
                return Err(Error::Config(format!(
                    "options.walk_y0: {} violates y0 <= steps/8 at steps = {}",
                    o.walk_y0, steps
                )));
            }
        }
        crate::config::parse_walk_policy(&o.walk_policy)?;
        Ok(())
    }
}

pub fn parse_walk_policy(name: &str) -> Result<crate::process::Adversary> {
    match name {
        "always-up" => Ok(crate::process::Adversary::AlwaysUp),
        "random" => Ok(crate::process::Adversary::Random),
        "stay" => Ok(crate::process::Adversary::Stay),
        other => Err(Error::Config(format!(
            "options.walk_policy: unknown policy {:?} (expected always-up, random, or stay)",
            other
        ))),
    }
}
