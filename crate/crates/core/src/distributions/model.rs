use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// A named isotropic distribution on `R^n` with declared moment parameters.
///
/// Serialized as `{kind, n, q, K, L, params, seed}`; `params` is
/// kind-specific and interpreted by the sampler registered under `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorModel {
    pub kind: String,
    pub n: usize,
    /// Declared moment order, if any.
    #[serde(default)]
    pub q: Option<f64>,
    /// Declared radius factor: `‖X‖₂ ≤ K √n`.
    #[serde(rename = "K", default)]
    pub k: Option<f64>,
    #[serde(rename = "L", default)]
    pub l: Option<f64>,
    #[serde(default = "empty_params")]
    pub params: Value,
    /// Seed for randomized model construction (e.g. random frames).
    #[serde(default)]
    pub seed: u64,
}

fn empty_params() -> Value {
    Value::Object(Default::default())
}

impl VectorModel {
    pub fn new(kind: &str, n: usize) -> Self {
        Self {
            kind: kind.to_string(),
            n,
            q: None,
            k: None,
            l: None,
            params: empty_params(),
            seed: 0,
        }
    }

    pub fn gaussian(n: usize) -> Self {
        Self::new("gaussian", n)
    }

    pub fn cube(n: usize) -> Self {
        Self::new("cube", n)
    }

    /// Uniform distribution over the scaled standard basis `{√n e_i}`.
    pub fn basis(n: usize) -> Self {
        Self::new("discrete_frame", n).with_param("frame", serde_json::json!({"kind": "basis"}))
    }

    /// Tight frame obtained by whitening `m` gaussian points.
    pub fn gaussian_frame(n: usize, m: usize, seed: u64) -> Self {
        Self::new("discrete_frame", n)
            .with_param("frame", serde_json::json!({"kind": "gaussian", "m": m}))
            .with_seed(seed)
    }

    pub fn pareto(n: usize, q_tail: f64) -> Self {
        Self::new("pareto_product", n).with_param("q_tail", q_tail.into())
    }

    pub fn with_param(mut self, key: &str, value: Value) -> Self {
        if !self.params.is_object() {
            self.params = empty_params();
        }
        self.params
            .as_object_mut()
            .expect("params is an object")
            .insert(key.to_string(), value);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_radius(mut self, k: f64) -> Self {
        self.k = Some(k);
        self
    }

    pub fn with_q(mut self, q: f64) -> Self {
        self.q = Some(q);
        self
    }

    pub fn param(&self, key: &str) -> Option<&Value> {
        self.params.get(key)
    }

    pub fn param_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.param(key) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => v.as_f64().map(Some).ok_or_else(|| {
                Error::InvalidModel(format!("parameter `{key}` must be a number, got {v}"))
            }),
        }
    }

    pub fn param_bool(&self, key: &str) -> Result<Option<bool>> {
        match self.param(key) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => v.as_bool().map(Some).ok_or_else(|| {
                Error::InvalidModel(format!("parameter `{key}` must be a boolean, got {v}"))
            }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidModel("dimension n must be at least 1".into()));
        }
        if let Some(q) = self.q {
            if !(q > 2.0) {
                return Err(Error::InvalidModel(format!("q must exceed 2, got {q}")));
            }
        }
        if let Some(k) = self.k {
            if !(k > 0.0 && k.is_finite()) {
                return Err(Error::InvalidModel(format!("K must be positive, got {k}")));
            }
        }
        Ok(())
    }
}
