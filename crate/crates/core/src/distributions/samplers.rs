//! Sampler kinds and the registry that resolves a model's `kind` string.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::Deserialize;

use super::frame::{make_tight_frame, Frame};
use super::model::VectorModel;
use crate::error::{Error, Result};
use crate::linalg::norm2;
use crate::rng::{rng_from_seed, SimRng};

/// A ready-to-draw isotropic distribution.
pub trait Sampler: Send + Sync {
    fn dim(&self) -> usize;

    /// Writes one draw into `out` (length `dim()`).
    fn draw(&self, rng: &mut SimRng, out: &mut [f64]);

    /// Radius `R` such that every draw obeys `‖X‖₂ ≤ R`, when enforced.
    fn radius_bound(&self) -> Option<f64> {
        None
    }

    /// Whether draws are radially projected (which perturbs moments slightly).
    fn truncated(&self) -> bool {
        false
    }
}

/// A distribution family, turning a [`VectorModel`] into a [`Sampler`].
pub trait SamplerKind: Send + Sync {
    fn name(&self) -> &'static str;
    fn prepare(&self, model: &VectorModel) -> Result<Box<dyn Sampler>>;
}

#[derive(Clone)]
pub struct SamplerRegistry {
    kinds: BTreeMap<String, Arc<dyn SamplerKind>>,
}

impl SamplerRegistry {
    pub fn empty() -> Self {
        Self {
            kinds: BTreeMap::new(),
        }
    }

    pub fn with_builtin() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(GaussianKind));
        r.register(Arc::new(CubeKind));
        r.register(Arc::new(CrossPolytopeKind));
        r.register(Arc::new(SimplexKind));
        r.register(Arc::new(DiscreteFrameKind));
        r.register(Arc::new(ParetoProductKind));
        r
    }

    pub fn register(&mut self, kind: Arc<dyn SamplerKind>) {
        self.kinds.insert(kind.name().to_string(), kind);
    }

    pub fn names(&self) -> Vec<&str> {
        self.kinds.keys().map(String::as_str).collect()
    }

    pub fn prepare(&self, model: &VectorModel) -> Result<Box<dyn Sampler>> {
        model.validate()?;
        let kind = self
            .kinds
            .get(&model.kind)
            .ok_or_else(|| Error::UnknownKind(model.kind.clone()))?;
        let s = kind.prepare(model)?;
        debug_assert_eq!(s.dim(), model.n);
        Ok(s)
    }
}

impl Default for SamplerRegistry {
    fn default() -> Self {
        Self::with_builtin()
    }
}

pub fn builtin_registry() -> &'static SamplerRegistry {
    static REG: OnceLock<SamplerRegistry> = OnceLock::new();
    REG.get_or_init(SamplerRegistry::with_builtin)
}

struct GaussianKind;
struct Gaussian(usize);

impl SamplerKind for GaussianKind {
    fn name(&self) -> &'static str {
        "gaussian"
    }
    fn prepare(&self, model: &VectorModel) -> Result<Box<dyn Sampler>> {
        Ok(Box::new(Gaussian(model.n)))
    }
}

impl Sampler for Gaussian {
    fn dim(&self) -> usize {
        self.0
    }
    fn draw(&self, rng: &mut SimRng, out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = StandardNormal.sample(rng));
    }
}

struct CubeKind;
struct Cube(usize);

impl SamplerKind for CubeKind {
    fn name(&self) -> &'static str {
        "cube"
    }
    fn prepare(&self, model: &VectorModel) -> Result<Box<dyn Sampler>> {
        Ok(Box::new(Cube(model.n)))
    }
}

impl Sampler for Cube {
    fn dim(&self) -> usize {
        self.0
    }
    fn draw(&self, rng: &mut SimRng, out: &mut [f64]) {
        let h = 3f64.sqrt();
        out.iter_mut().for_each(|x| *x = rng.random_range(-h..h));
    }
    fn radius_bound(&self) -> Option<f64> {
        Some((3.0 * self.0 as f64).sqrt())
    }
}

/// Unscaled uniform draw from the unit ℓ₁ ball: `±E_i / Σ_{k≤n+1} E_k`.
fn raw_cross_polytope(rng: &mut SimRng, out: &mut [f64]) {
    let mut total: f64 = Exp1.sample(rng);
    for x in out.iter_mut() {
        let e: f64 = Exp1.sample(rng);
        total += e;
        *x = if rng.random::<bool>() { e } else { -e };
    }
    out.iter_mut().for_each(|x| *x /= total);
}

/// Unscaled uniform draw from the regular simplex with `n + 1` vertices,
/// centred at the origin: Dirichlet(1, …, 1) weights mapped through the
/// Helmert basis of the sum-zero hyperplane.
fn raw_simplex(rng: &mut SimRng, out: &mut [f64]) {
    let n = out.len();
    let mut w = Vec::with_capacity(n + 1);
    let mut total = 0.0;
    for _ in 0..=n {
        let e: f64 = Exp1.sample(rng);
        total += e;
        w.push(e);
    }
    let mut prefix = 0.0;
    for k in 1..=n {
        prefix += w[k - 1];
        let kf = k as f64;
        out[k - 1] = (prefix - kf * w[k]) / (total * (kf * (kf + 1.0)).sqrt());
    }
}

/// Points used to estimate isotropic scale constants.
pub const SCALE_POINTS: usize = 1_000_000;
/// Seed of the scale-constant estimate; recorded so the constant is reproducible.
pub const SCALE_SEED: u64 = 0x15_07_20_01;

type RawDraw = fn(&mut SimRng, &mut [f64]);

/// Factor making the raw body isotropic, estimated once per `(kind, n)` by
/// Monte Carlo from the pooled per-coordinate second moment.
pub fn isotropic_scale(kind: &'static str, n: usize) -> f64 {
    static CACHE: OnceLock<Mutex<HashMap<(&'static str, usize), f64>>> = OnceLock::new();
    let raw: RawDraw = match kind {
        "cross_polytope" => raw_cross_polytope,
        "simplex" => raw_simplex,
        _ => panic!("no isotropic scale for kind `{kind}`"),
    };
    let cache = CACHE.get_or_init(Default::default);
    if let Some(&s) = cache.lock().unwrap().get(&(kind, n)) {
        return s;
    }
    let mut rng = rng_from_seed(SCALE_SEED ^ n as u64);
    let mut buf = vec![0.0; n];
    let mut acc = 0.0;
    for _ in 0..SCALE_POINTS {
        raw(&mut rng, &mut buf);
        acc += buf.iter().map(|x| x * x).sum::<f64>();
    }
    let s = 1.0 / (acc / (SCALE_POINTS * n) as f64).sqrt();
    cache.lock().unwrap().insert((kind, n), s);
    s
}

struct ScaledBody {
    n: usize,
    scale: f64,
    raw: RawDraw,
}

impl Sampler for ScaledBody {
    fn dim(&self) -> usize {
        self.n
    }
    fn draw(&self, rng: &mut SimRng, out: &mut [f64]) {
        (self.raw)(rng, out);
        out.iter_mut().for_each(|x| *x *= self.scale);
    }
}

struct CrossPolytopeKind;
struct SimplexKind;

impl SamplerKind for CrossPolytopeKind {
    fn name(&self) -> &'static str {
        "cross_polytope"
    }
    fn prepare(&self, model: &VectorModel) -> Result<Box<dyn Sampler>> {
        Ok(Box::new(ScaledBody {
            n: model.n,
            scale: isotropic_scale("cross_polytope", model.n),
            raw: raw_cross_polytope,
        }))
    }
}

impl SamplerKind for SimplexKind {
    fn name(&self) -> &'static str {
        "simplex"
    }
    fn prepare(&self, model: &VectorModel) -> Result<Box<dyn Sampler>> {
        Ok(Box::new(ScaledBody {
            n: model.n,
            scale: isotropic_scale("simplex", model.n),
            raw: raw_simplex,
        }))
    }
}

/// How a `discrete_frame` model names its frame.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FrameSpec {
    /// `{√n e_i}`.
    Basis,
    /// `m` standard gaussian points, whitened; drawn from the model seed.
    Gaussian { m: usize },
    /// Explicit points, whitened.
    Points { points: Vec<Vec<f64>> },
}

impl FrameSpec {
    pub fn build(&self, n: usize, seed: u64) -> Result<Frame> {
        match self {
            FrameSpec::Basis => Ok(Frame::scaled_basis(n)),
            FrameSpec::Gaussian { m } => {
                if *m < n {
                    return Err(Error::InvalidModel(format!(
                        "frame size {m} is below the dimension {n}"
                    )));
                }
                let mut rng = rng_from_seed(seed);
                let raw: Vec<Vec<f64>> = (0..*m)
                    .map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect())
                    .collect();
                make_tight_frame(&raw)
            }
            FrameSpec::Points { points } => {
                if points.iter().any(|p| p.len() != n) {
                    return Err(Error::InvalidModel(format!(
                        "frame points must have dimension {n}"
                    )));
                }
                make_tight_frame(points)
            }
        }
    }
}

pub fn frame_of(model: &VectorModel) -> Result<Frame> {
    let spec = model
        .param("frame")
        .ok_or_else(|| Error::InvalidModel("discrete_frame model needs `params.frame`".into()))?;
    let spec: FrameSpec = serde_json::from_value(spec.clone())
        .map_err(|e| Error::InvalidModel(format!("bad frame spec: {e}")))?;
    spec.build(model.n, model.seed)
}

struct DiscreteFrameKind;

struct DiscreteFrame {
    frame: Frame,
    radius: f64,
}

impl SamplerKind for DiscreteFrameKind {
    fn name(&self) -> &'static str {
        "discrete_frame"
    }
    fn prepare(&self, model: &VectorModel) -> Result<Box<dyn Sampler>> {
        let frame = frame_of(model)?;
        let radius = frame.max_norm();
        Ok(Box::new(DiscreteFrame { frame, radius }))
    }
}

impl Sampler for DiscreteFrame {
    fn dim(&self) -> usize {
        self.frame.dim()
    }
    fn draw(&self, rng: &mut SimRng, out: &mut [f64]) {
        let j = rng.random_range(0..self.frame.len());
        out.copy_from_slice(&self.frame.points[j]);
    }
    fn radius_bound(&self) -> Option<f64> {
        Some(self.radius)
    }
}

struct ParetoProductKind;

/// Symmetric coordinates with `P(|c| > t) = (t/t0)^{-q_tail}` for `t ≥ t0`,
/// standardized to unit variance.
struct ParetoProduct {
    n: usize,
    q_tail: f64,
    /// `1 / sqrt(E c²)` for the unstandardized coordinate.
    unit: f64,
    radius: Option<f64>,
}

impl SamplerKind for ParetoProductKind {
    fn name(&self) -> &'static str {
        "pareto_product"
    }
    fn prepare(&self, model: &VectorModel) -> Result<Box<dyn Sampler>> {
        let q_tail = model
            .param_f64("q_tail")?
            .ok_or_else(|| Error::InvalidModel("pareto_product needs `params.q_tail`".into()))?;
        if !(q_tail > 2.0) {
            return Err(Error::InvalidModel(format!(
                "q_tail must exceed 2 for finite variance, got {q_tail}"
            )));
        }
        let truncate = model.param_bool("truncate")?.unwrap_or(false);
        let radius = if truncate {
            let k = model.k.ok_or_else(|| {
                Error::InvalidModel("truncated pareto_product needs a radius factor K".into())
            })?;
            Some(k * (model.n as f64).sqrt())
        } else {
            None
        };
        Ok(Box::new(ParetoProduct {
            n: model.n,
            q_tail,
            unit: ((q_tail - 2.0) / q_tail).sqrt(),
            radius,
        }))
    }
}

impl Sampler for ParetoProduct {
    fn dim(&self) -> usize {
        self.n
    }
    fn draw(&self, rng: &mut SimRng, out: &mut [f64]) {
        for x in out.iter_mut() {
            // 1 - U lies in (0, 1], so the power is finite
            let u: f64 = 1.0 - rng.random::<f64>();
            let mag = u.powf(-1.0 / self.q_tail) * self.unit;
            *x = if rng.random::<bool>() { mag } else { -mag };
        }
        if let Some(r) = self.radius {
            let norm = norm2(out);
            if norm > r {
                let s = r / norm;
                out.iter_mut().for_each(|x| *x *= s);
                // guard against the last ulp
                while norm2(out) > r {
                    out.iter_mut().for_each(|x| *x *= 1.0 - f64::EPSILON);
                }
            }
        }
    }
    fn radius_bound(&self) -> Option<f64> {
        self.radius
    }
    fn truncated(&self) -> bool {
        self.radius.is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_lists_builtin_kinds() {
        let r = SamplerRegistry::with_builtin();
        assert_eq!(
            r.names(),
            vec![
                "cross_polytope",
                "cube",
                "discrete_frame",
                "gaussian",
                "pareto_product",
                "simplex"
            ]
        );
        assert!(matches!(
            r.prepare(&VectorModel::new("student_t", 3)),
            Err(Error::UnknownKind(_))
        ));
    }

    #[test]
    fn frame_kind_requires_points() {
        let r = SamplerRegistry::with_builtin();
        assert!(matches!(
            r.prepare(&VectorModel::new("discrete_frame", 3)),
            Err(Error::InvalidModel(_))
        ));
    }

    #[test]
    fn truncated_pareto_requires_radius() {
        let m = VectorModel::pareto(3, 6.0).with_param("truncate", true.into());
        assert!(builtin_registry().prepare(&m).is_err());
    }

    #[test]
    fn helmert_map_matches_simplex_vertex_geometry() {
        // every raw draw is a convex combination of the n + 1 vertices,
        // which all sit at distance sqrt(n / (n + 1)) from the centre
        let mut rng = rng_from_seed(4);
        let n = 3;
        let mut buf = vec![0.0; n];
        for _ in 0..1000 {
            raw_simplex(&mut rng, &mut buf);
            assert!(norm2(&buf) <= (n as f64 / (n as f64 + 1.0)).sqrt() + 1e-12);
        }
    }
}
