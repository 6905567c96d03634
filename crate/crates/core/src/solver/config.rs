//! Scheme selection, parameter sequences and hypothesis validation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Space;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    HybridIshikawa,
    HybridFZero,
    HybridAlphaOne,
    HybridSIdentity,
    Mann,
    IshikawaPlain,
    NakajoTakahashi,
    MartinezYanesXu,
    MatsushitaTakahashi,
    TadaTakahashi,
    TakahashiZembayashi,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 11] = [
        SchemeKind::HybridIshikawa,
        SchemeKind::HybridFZero,
        SchemeKind::HybridAlphaOne,
        SchemeKind::HybridSIdentity,
        SchemeKind::Mann,
        SchemeKind::IshikawaPlain,
        SchemeKind::NakajoTakahashi,
        SchemeKind::MartinezYanesXu,
        SchemeKind::MatsushitaTakahashi,
        SchemeKind::TadaTakahashi,
        SchemeKind::TakahashiZembayashi,
    ];

    pub const BASELINES: [SchemeKind; 7] = [
        SchemeKind::Mann,
        SchemeKind::IshikawaPlain,
        SchemeKind::NakajoTakahashi,
        SchemeKind::MartinezYanesXu,
        SchemeKind::MatsushitaTakahashi,
        SchemeKind::TadaTakahashi,
        SchemeKind::TakahashiZembayashi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::HybridIshikawa => "hybrid_ishikawa",
            SchemeKind::HybridFZero => "hybrid_f_zero",
            SchemeKind::HybridAlphaOne => "hybrid_alpha_one",
            SchemeKind::HybridSIdentity => "hybrid_s_identity",
            SchemeKind::Mann => "mann",
            SchemeKind::IshikawaPlain => "ishikawa_plain",
            SchemeKind::NakajoTakahashi => "nakajo_takahashi",
            SchemeKind::MartinezYanesXu => "martinez_yanes_xu",
            SchemeKind::MatsushitaTakahashi => "matsushita_takahashi",
            SchemeKind::TadaTakahashi => "tada_takahashi",
            SchemeKind::TakahashiZembayashi => "takahashi_zembayashi",
        }
    }

    pub fn requires_hilbert(self) -> bool {
        matches!(
            self,
            SchemeKind::Mann
                | SchemeKind::IshikawaPlain
                | SchemeKind::NakajoTakahashi
                | SchemeKind::MartinezYanesXu
                | SchemeKind::TadaTakahashi
        )
    }

    /// Whether the scheme involves the bifunction at all.
    pub fn uses_bifunction(self) -> bool {
        matches!(
            self,
            SchemeKind::HybridIshikawa
                | SchemeKind::HybridAlphaOne
                | SchemeKind::HybridSIdentity
                | SchemeKind::TadaTakahashi
                | SchemeKind::TakahashiZembayashi
        )
    }

    pub fn uses_mapping(self) -> bool {
        self != SchemeKind::HybridSIdentity
    }

    /// Whether iterates come from projecting the anchor onto cuts.
    pub fn is_hybrid(self) -> bool {
        !matches!(self, SchemeKind::Mann | SchemeKind::IshikawaPlain)
    }
}

impl std::fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown scheme {s:?}")))
    }
}

/// Parameter sequence indexed from `n = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sequence {
    Constant { value: f64 },
    /// `limit + amplitude / n`.
    Harmonic { limit: f64, amplitude: f64 },
}

impl Sequence {
    pub fn constant(value: f64) -> Self {
        Sequence::Constant { value }
    }

    pub fn value(&self, n: usize) -> f64 {
        match *self {
            Sequence::Constant { value } => value,
            Sequence::Harmonic { limit, amplitude } => limit + amplitude / n.max(1) as f64,
        }
    }

    pub fn limit(&self) -> f64 {
        match *self {
            Sequence::Constant { value } => value,
            Sequence::Harmonic { limit, .. } => limit,
        }
    }

    fn is_finite(&self) -> bool {
        match *self {
            Sequence::Constant { value } => value.is_finite(),
            Sequence::Harmonic { limit, amplitude } => limit.is_finite() && amplitude.is_finite(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub scheme: SchemeKind,
    pub alpha: Sequence,
    pub beta: Sequence,
    pub r: Sequence,
    /// Declared lower bound `a` with `0 < a <= alpha_n`.
    #[serde(default = "default_alpha_lower")]
    pub alpha_lower: f64,
    /// Optional upper bound `b < 1` with `alpha_n <= b`.
    #[serde(default)]
    pub alpha_upper: Option<f64>,
}

fn default_alpha_lower() -> f64 {
    0.1
}

impl SchemeConfig {
    /// `alpha = beta = 0.5`, `r = 1`.
    pub fn new(scheme: SchemeKind) -> Self {
        SchemeConfig {
            scheme,
            alpha: Sequence::constant(0.5),
            beta: Sequence::constant(0.5),
            r: Sequence::constant(1.0),
            alpha_lower: default_alpha_lower(),
            alpha_upper: None,
        }
    }

    pub fn with_alpha(mut self, alpha: Sequence) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_beta(mut self, beta: Sequence) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_r(mut self, r: Sequence) -> Self {
        self.r = r;
        self
    }

    /// Checks the hypotheses the selected scheme is stated under, pointwise
    /// for `n = 1..=horizon` and through the limits for `liminf` conditions.
    /// Returns warnings for conditions that are allowed but weaker than what
    /// the convergence argument uses.
    pub fn validate(&self, space: &Space, horizon: usize) -> Result<Vec<String>> {
        let scheme = self.scheme;
        let fail = |requirement: String| Error::Hypothesis {
            scheme: scheme.name(),
            requirement,
        };
        if scheme.requires_hilbert() && !space.is_hilbert() {
            return Err(Error::RequiresHilbert(format!("scheme {}", scheme.name())));
        }
        for (name, s) in [("alpha", &self.alpha), ("beta", &self.beta), ("r", &self.r)] {
            if !s.is_finite() {
                return Err(fail(format!("{name}_n must be finite")));
            }
        }
        let horizon = horizon.clamp(1, 1_000_000);
        let every = |s: &Sequence, pred: &dyn Fn(f64) -> bool| (1..=horizon).all(|n| pred(s.value(n)));
        let mut warnings = Vec::new();

        let in_unit = |s: &Sequence| every(s, &|v| (0.0..=1.0).contains(&v));
        let beta_hyp = || -> Result<()> {
            let b = self.beta.limit();
            if !in_unit(&self.beta) {
                return Err(fail("beta_n in [0, 1] required".into()));
            }
            if !(b * (1.0 - b) > 0.0) {
                return Err(fail("liminf beta_n(1 - beta_n) > 0 required".into()));
            }
            Ok(())
        };
        let r_hyp = || -> Result<()> {
            if !every(&self.r, &|v| v > 0.0) {
                return Err(fail("r_n > 0 required".into()));
            }
            if !(self.r.limit() > 0.0) {
                return Err(fail("liminf r_n > 0 required".into()));
            }
            Ok(())
        };
        let alpha_hyp = |warnings: &mut Vec<String>| -> Result<()> {
            let a = self.alpha_lower;
            if !(a > 0.0 && a <= 1.0) {
                return Err(fail(format!("declared lower bound a must satisfy 0 < a <= 1, got {a}")));
            }
            if !every(&self.alpha, &|v| v >= a && v <= 1.0) || self.alpha.limit() < a {
                return Err(fail(format!("0 < a <= alpha_n <= 1 required with a = {a}")));
            }
            match self.alpha_upper {
                Some(b) => {
                    if !(b < 1.0 && b >= a) {
                        return Err(fail(format!("declared upper bound b must satisfy a <= b < 1, got {b}")));
                    }
                    if !every(&self.alpha, &|v| v <= b) || self.alpha.limit() > b {
                        return Err(fail(format!("alpha_n <= b required with b = {b}")));
                    }
                }
                None => {
                    if (1..=horizon).any(|n| self.alpha.value(n) >= 1.0) || self.alpha.limit() >= 1.0 {
                        warnings.push(format!(
                            "{}: alpha_n reaches 1; the convergence argument bounds alpha_n by some b < 1",
                            scheme.name()
                        ));
                    }
                }
            }
            Ok(())
        };
        let bounded_below_one = |s: &Sequence, name: &str| -> Result<()> {
            if !in_unit(s) {
                return Err(fail(format!("{name}_n in [0, 1] required")));
            }
            let sup = (1..=horizon).map(|n| s.value(n)).fold(s.limit(), f64::max);
            if !(sup < 1.0) {
                return Err(fail(format!("{name}_n bounded above away from 1 required")));
            }
            Ok(())
        };

        match scheme {
            SchemeKind::HybridIshikawa => {
                alpha_hyp(&mut warnings)?;
                beta_hyp()?;
                r_hyp()?;
            }
            SchemeKind::HybridFZero => {
                alpha_hyp(&mut warnings)?;
                beta_hyp()?;
            }
            SchemeKind::HybridAlphaOne => {
                beta_hyp()?;
                r_hyp()?;
            }
            SchemeKind::HybridSIdentity => {
                alpha_hyp(&mut warnings)?;
                r_hyp()?;
            }
            SchemeKind::Mann => {
                if !in_unit(&self.alpha) {
                    return Err(fail("alpha_n in [0, 1] required".into()));
                }
            }
            SchemeKind::IshikawaPlain => {
                if !in_unit(&self.alpha) || !in_unit(&self.beta) {
                    return Err(fail("alpha_n, beta_n in [0, 1] required".into()));
                }
                if !(1..=horizon).all(|n| self.beta.value(n) <= self.alpha.value(n)) {
                    return Err(fail("0 <= beta_n <= alpha_n <= 1 required".into()));
                }
            }
            SchemeKind::NakajoTakahashi | SchemeKind::MatsushitaTakahashi => bounded_below_one(&self.alpha, "alpha")?,
            SchemeKind::MartinezYanesXu => {
                bounded_below_one(&self.alpha, "alpha")?;
                if !in_unit(&self.beta) || self.beta.limit() != 1.0 {
                    return Err(fail("beta_n in [0, 1] with lim beta_n = 1 required".into()));
                }
            }
            SchemeKind::TadaTakahashi => {
                let (lo, hi) = (1..=horizon)
                    .map(|n| self.alpha.value(n))
                    .fold((self.alpha.limit(), self.alpha.limit()), |(lo, hi), v| (lo.min(v), hi.max(v)));
                if !(lo > 0.0 && hi < 1.0) {
                    return Err(fail("alpha_n in [a, b] for some 0 < a <= b < 1 required".into()));
                }
                r_hyp()?;
            }
            SchemeKind::TakahashiZembayashi => {
                let a = self.alpha.limit();
                if !in_unit(&self.alpha) {
                    return Err(fail("alpha_n in [0, 1] required".into()));
                }
                if !(a * (1.0 - a) > 0.0) {
                    return Err(fail("liminf alpha_n(1 - alpha_n) > 0 required".into()));
                }
                r_hyp()?;
            }
        }
        Ok(warnings)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    /// Stop once `||x_{n+1} - x_n|| <= eps_stop`.
    pub eps_stop: f64,
    pub max_iter: usize,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule {
            eps_stop: 1e-8,
            max_iter: 10_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub projection: f64,
    pub resolvent: f64,
    pub resolvent_max_iter: usize,
    /// Slack for reference-solution containment in the cuts.
    pub containment: f64,
    /// Slack for the anchor-distance monotonicity and boundedness checks.
    pub monotonicity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            projection: 1e-9,
            resolvent: 1e-10,
            resolvent_max_iter: 100_000,
            containment: 1e-9,
            monotonicity: 1e-8,
        }
    }
}
