//! Parametric distributions and weighted mixtures of them.

use rand::distr::Open01;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::traffic::TrafficError;

/// Tolerance on the sum of mixture weights.
pub const WEIGHT_SUM_TOL: f64 = 1e-9;

/// One mixture component. Only positive values are ever returned: Normal
/// draws are repeated until positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Component {
    Deterministic { value: f64, weight: f64 },
    Weibull { shape: f64, scale: f64, weight: f64 },
    Lognormal { mu: f64, sigma: f64, weight: f64 },
    Normal { mean: f64, stddev: f64, weight: f64 },
}

impl Component {
    pub fn weight(&self) -> f64 {
        match *self {
            Component::Deterministic { weight, .. }
            | Component::Weibull { weight, .. }
            | Component::Lognormal { weight, .. }
            | Component::Normal { weight, .. } => weight,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Component::Deterministic { .. } => "deterministic",
            Component::Weibull { .. } => "weibull",
            Component::Lognormal { .. } => "lognormal",
            Component::Normal { .. } => "normal",
        }
    }

    pub fn validate(&self) -> Result<(), TrafficError> {
        let bad = |what: &str| Err(TrafficError::InvalidParam(format!("{}: {what}", self.kind_name())));
        match *self {
            Component::Deterministic { value, .. } if !(value > 0.0 && value.is_finite()) => {
                bad("value must be positive")
            }
            Component::Weibull { shape, scale, .. } if !(shape > 0.0 && scale > 0.0) => {
                bad("shape and scale must be positive")
            }
            Component::Lognormal { mu, sigma, .. } if !(sigma >= 0.0 && mu.is_finite()) => {
                bad("sigma must be non-negative")
            }
            // A non-positive mean would make positive redraws vanishingly rare.
            Component::Normal { mean, stddev, .. } if !(stddev >= 0.0 && mean > 0.0) => {
                bad("mean must be positive and stddev non-negative")
            }
            _ => Ok(()),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Component::Deterministic { value, .. } => value,
            Component::Weibull { shape, scale, .. } => {
                let u: f64 = rng.sample(Open01);
                scale * (-u.ln()).powf(1.0 / shape)
            }
            Component::Lognormal { mu, sigma, .. } => {
                let z: f64 = rng.sample(StandardNormal);
                (mu + sigma * z).exp()
            }
            Component::Normal { mean, stddev, .. } => loop {
                let z: f64 = rng.sample(StandardNormal);
                let x = mean + stddev * z;
                if x > 0.0 {
                    break x;
                }
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MixtureDistribution {
    pub components: Vec<Component>,
}

impl MixtureDistribution {
    pub fn new(components: Vec<Component>) -> Result<Self, TrafficError> {
        let m = MixtureDistribution { components };
        m.validate()?;
        Ok(m)
    }

    pub fn single(component: Component) -> Result<Self, TrafficError> {
        Self::new(vec![component])
    }

    pub fn validate(&self) -> Result<(), TrafficError> {
        if self.components.is_empty() {
            return Err(TrafficError::InvalidParam("mixture has no components".into()));
        }
        for c in &self.components {
            c.validate()?;
            let w = c.weight();
            if !(w > 0.0 && w <= 1.0) {
                return Err(TrafficError::InvalidWeights(format!("weight {w} outside (0, 1]")));
            }
        }
        let sum: f64 = self.components.iter().map(Component::weight).sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(TrafficError::InvalidWeights(format!("weights sum to {sum}")));
        }
        Ok(())
    }

    pub fn count_of(&self, kind: &str) -> usize {
        self.components.iter().filter(|c| c.kind_name() == kind).count()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for c in &self.components {
            acc += c.weight();
            if u < acc {
                return c.sample(rng);
            }
        }
        // Rounding can leave the cumulative sum a hair under one.
        self.components[self.components.len() - 1].sample(rng)
    }
}

/// Finite set of byte sizes with probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SizeChoice {
    pub bytes: u32,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DiscreteSizes {
    pub choices: Vec<SizeChoice>,
}

impl DiscreteSizes {
    pub fn validate(&self) -> Result<(), TrafficError> {
        if self.choices.is_empty() {
            return Err(TrafficError::InvalidParam("no sizes".into()));
        }
        for c in &self.choices {
            if c.bytes == 0 {
                return Err(TrafficError::InvalidParam("size must be at least one byte".into()));
            }
            if !(c.prob > 0.0 && c.prob <= 1.0) {
                return Err(TrafficError::InvalidWeights(format!("probability {} outside (0, 1]", c.prob)));
            }
        }
        let sum: f64 = self.choices.iter().map(|c| c.prob).sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(TrafficError::InvalidWeights(format!("probabilities sum to {sum}")));
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        self.choices.iter().map(|c| f64::from(c.bytes) * c.prob).sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for c in &self.choices {
            acc += c.prob;
            if u < acc {
                return c.bytes;
            }
        }
        self.choices[self.choices.len() - 1].bytes
    }
}
