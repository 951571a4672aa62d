//! Job configuration schema and its translation into library objects.

use std::fmt;
use std::sync::Arc;

use divstab::rational::{self, Rational};
use divstab::{catalog, DivisorClass, DivisorialMeasure, FiltrationSpec, GeometryModel, SurfaceModel, ToricModel, Valuation};
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize};

/// An exact rational written as `"p/q"`, a decimal string or a JSON integer.
#[derive(Clone, Debug, PartialEq)]
pub struct Q(pub Rational);

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct QVisitor;
        impl Visitor<'_> for QVisitor {
            type Value = Q;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a rational as \"p/q\" or an integer")
            }
            fn visit_str<E: de::Error>(self, s: &str) -> Result<Q, E> {
                rational::parse(s).map(Q).map_err(E::custom)
            }
            fn visit_i64<E: de::Error>(self, n: i64) -> Result<Q, E> {
                Ok(Q(rational::int(n)))
            }
            fn visit_u64<E: de::Error>(self, n: u64) -> Result<Q, E> {
                i64::try_from(n).map(|n| Q(rational::int(n))).map_err(E::custom)
            }
            fn visit_f64<E: de::Error>(self, x: f64) -> Result<Q, E> {
                Err(E::custom(format!("float {x} is not exact; write it as a \"p/q\" string")))
            }
        }
        d.deserialize_any(QVisitor)
    }
}

impl Serialize for Q {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&rational::format(&self.0))
    }
}

fn qs(v: &[Q]) -> Vec<Rational> {
    v.iter().map(|q| q.0.clone()).collect()
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub model: ModelSpec,
    #[serde(default)]
    pub line_bundle: ClassSpec,
    pub tasks: Vec<Task>,
    #[serde(default)]
    pub tolerances: ToleranceSpec,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Bundled(String),
    Surface(SurfaceSpec),
    Toric(ToricSpec),
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSpec {
    pub name: String,
    pub intersection_matrix: Vec<Vec<Q>>,
    #[serde(default)]
    pub negative_curves: Vec<Vec<Q>>,
    #[serde(default)]
    pub sample_curves: Vec<Vec<Q>>,
    pub canonical_class: Vec<Q>,
    #[serde(default)]
    pub blowups: Vec<BlowupSpec>,
    #[serde(default)]
    pub valuations: Vec<CurveValuationSpec>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BlowupSpec {
    pub name: String,
    pub model: SurfaceSpec,
    /// Rows indexed by the blowup's basis, columns by this model's basis.
    pub pullback: Vec<Vec<Q>>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CurveValuationSpec {
    pub name: String,
    pub class: Vec<Q>,
    /// Name of the blowup the curve lives on; this model when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    pub log_discrepancy: Q,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ToricSpec {
    pub name: String,
    pub rays: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cones: Option<Vec<Vec<usize>>>,
    /// Declare one valuation `ray<i>` per fan ray.
    #[serde(default)]
    pub ray_valuations: bool,
    #[serde(default)]
    pub valuations: Vec<MonomialValuationSpec>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialValuationSpec {
    pub name: String,
    pub weights: Vec<i64>,
}

/// A class given by coefficients, or the keyword `"anticanonical"`.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum ClassSpec {
    #[default]
    Anticanonical,
    Coefficients(Vec<Q>),
}

impl<'de> Deserialize<'de> for ClassSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct ClassVisitor;
        impl<'de> Visitor<'de> for ClassVisitor {
            type Value = ClassSpec;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an array of rationals or \"anticanonical\"")
            }
            fn visit_str<E: de::Error>(self, s: &str) -> Result<ClassSpec, E> {
                match s {
                    "anticanonical" => Ok(ClassSpec::Anticanonical),
                    other => Err(E::unknown_variant(other, &["anticanonical"])),
                }
            }
            fn visit_seq<A: de::SeqAccess<'de>>(self, mut seq: A) -> Result<ClassSpec, A::Error> {
                let mut out = Vec::new();
                while let Some(q) = seq.next_element::<Q>()? {
                    out.push(q);
                }
                Ok(ClassSpec::Coefficients(out))
            }
        }
        d.deserialize_any(ClassVisitor)
    }
}

impl Serialize for ClassSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ClassSpec::Anticanonical => s.serialize_str("anticanonical"),
            ClassSpec::Coefficients(v) => v.serialize(s),
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    #[serde(default = "defaults::quadrature")]
    pub quadrature: f64,
    #[serde(default = "defaults::optimizer")]
    pub optimizer: f64,
    #[serde(default = "defaults::gradient")]
    pub gradient: f64,
    #[serde(default = "defaults::threshold")]
    pub threshold: f64,
}

mod defaults {
    use divstab::Tolerances;
    pub fn quadrature() -> f64 {
        Tolerances::default().quadrature
    }
    pub fn optimizer() -> f64 {
        Tolerances::default().optimizer
    }
    pub fn gradient() -> f64 {
        Tolerances::default().gradient
    }
    pub fn threshold() -> f64 {
        Tolerances::default().threshold
    }
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        let t = divstab::Tolerances::default();
        Self {
            quadrature: t.quadrature,
            optimizer: t.optimizer,
            gradient: t.gradient,
            threshold: t.threshold,
        }
    }
}

impl ToleranceSpec {
    pub fn to_tolerances(self) -> divstab::Tolerances {
        divstab::Tolerances {
            quadrature: self.quadrature,
            optimizer: self.optimizer,
            gradient: self.gradient,
            threshold: self.threshold,
        }
    }

    pub fn set(&mut self, key: &str, value: f64) -> Result<(), String> {
        if !(value.is_finite() && value > 0.0) {
            return Err(format!("tolerance `{key}` must be a positive number"));
        }
        match key {
            "quadrature" => self.quadrature = value,
            "optimizer" => self.optimizer = value,
            "gradient" => self.gradient = value,
            "threshold" => self.threshold = value,
            _ => return Err(format!("unknown tolerance `{key}` (quadrature, optimizer, gradient, threshold)")),
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FiltrationParams {
    pub support: Vec<String>,
    pub t: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub valuation: String,
    pub mass: Q,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    pub atoms: Vec<AtomSpec>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ClassParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<ClassSpec>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GammaParams {
    pub valuation: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<ClassSpec>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SParams {
    pub filtration: FiltrationParams,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureParams {
    pub measure: MeasureSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub starts: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaParams {
    /// Valuation names; the declared valuations when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidates: Option<Vec<String>>,
    /// Toric models: add every primitive vector with coordinates up to this bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub toric_height: Option<i64>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeParams {
    pub measures: Vec<MeasureSpec>,
    #[serde(default)]
    pub epsilon: f64,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteKParams {
    pub filtration: FiltrationParams,
    pub k: u32,
    #[serde(default)]
    pub include_jumps: bool,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum Task {
    Volume(#[serde(default)] ClassParams),
    Zariski(#[serde(default)] ClassParams),
    Gamma(GammaParams),
    #[serde(rename = "S")]
    S(SParams),
    Norm(MeasureParams),
    Beta(MeasureParams),
    Delta(#[serde(default)] DeltaParams),
    MaSolve(MeasureParams),
    Probe(ProbeParams),
    FiniteK(FiniteKParams),
}

impl Task {
    pub fn kind(&self) -> &'static str {
        match self {
            Task::Volume(_) => "volume",
            Task::Zariski(_) => "zariski",
            Task::Gamma(_) => "gamma",
            Task::S(_) => "S",
            Task::Norm(_) => "norm",
            Task::Beta(_) => "beta",
            Task::Delta(_) => "delta",
            Task::MaSolve(_) => "ma_solve",
            Task::Probe(_) => "probe",
            Task::FiniteK(_) => "finite_k",
        }
    }
}

/// A concrete model: the trait object plus the backend when a task needs it.
#[derive(Clone)]
pub enum Model {
    Surface(Arc<SurfaceModel>),
    Toric(Arc<ToricModel>),
}

impl Model {
    pub fn geometry(&self) -> &dyn GeometryModel {
        match self {
            Model::Surface(m) => m.as_ref(),
            Model::Toric(m) => m.as_ref(),
        }
    }

    pub fn class(&self, spec: &ClassSpec) -> divstab::Result<DivisorClass> {
        let g = self.geometry();
        let c = match spec {
            ClassSpec::Anticanonical => catalog::anticanonical(g),
            ClassSpec::Coefficients(v) => DivisorClass::new(g.name(), qs(v)),
        };
        g.check_class(&c)?;
        Ok(c)
    }

    pub fn valuation(&self, name: &str) -> divstab::Result<Valuation> {
        self.geometry().valuation(name)
    }

    pub fn filtration(&self, p: &FiltrationParams) -> divstab::Result<FiltrationSpec> {
        let support = p.support.iter().map(|n| self.valuation(n)).collect::<divstab::Result<_>>()?;
        FiltrationSpec::new(support, p.t.clone())
    }

    pub fn measure(&self, p: &MeasureSpec) -> divstab::Result<DivisorialMeasure> {
        let atoms = p
            .atoms
            .iter()
            .map(|a| Ok((self.valuation(&a.valuation)?, a.mass.0.clone())))
            .collect::<divstab::Result<_>>()?;
        DivisorialMeasure::new(atoms)
    }
}

fn build_surface(spec: &SurfaceSpec) -> divstab::Result<SurfaceModel> {
    let gram = spec.intersection_matrix.iter().map(|r| qs(r)).collect();
    let mut m = SurfaceModel::new(
        &spec.name,
        gram,
        spec.negative_curves.iter().map(|c| qs(c)).collect(),
        spec.sample_curves.iter().map(|c| qs(c)).collect(),
        qs(&spec.canonical_class),
    )?;
    for b in &spec.blowups {
        let y = build_surface(&b.model)?;
        m = m.with_blowup(&b.name, Arc::new(y), b.pullback.iter().map(|r| qs(r)).collect())?;
    }
    for v in &spec.valuations {
        let basis = match &v.model {
            None => spec.name.clone(),
            Some(b) => m.blowup(b)?.model.name().to_string(),
        };
        let val = Valuation::curve(
            v.name.clone(),
            DivisorClass::new(basis, qs(&v.class)),
            v.model.clone(),
            v.log_discrepancy.0.clone(),
        )?;
        m = m.with_valuation(val)?;
    }
    Ok(m)
}

fn build_toric(spec: &ToricSpec) -> divstab::Result<ToricModel> {
    let mut m = ToricModel::new(&spec.name, spec.rays.clone(), spec.cones.clone())?;
    if spec.ray_valuations {
        m = m.with_ray_valuations()?;
    }
    for v in &spec.valuations {
        m = m.with_monomial_valuation(&v.name, &v.weights)?;
    }
    Ok(m)
}

pub fn build_model(spec: &ModelSpec) -> divstab::Result<Model> {
    Ok(match spec {
        ModelSpec::Surface(s) => Model::Surface(Arc::new(build_surface(s)?)),
        ModelSpec::Toric(t) => Model::Toric(Arc::new(build_toric(t)?)),
        ModelSpec::Bundled(name) => match name.as_str() {
            "P2" => Model::Surface(Arc::new(catalog::p2_surface())),
            "Bl_pP2" => Model::Surface(Arc::new(catalog::blowup_p2_surface())),
            "P1xP1" => Model::Surface(Arc::new(catalog::p1xp1_surface())),
            "F1" => Model::Surface(Arc::new(catalog::f1_surface())),
            "P2_toric" => Model::Toric(Arc::new(catalog::p2_toric())),
            "Bl_pP2_toric" => Model::Toric(Arc::new(catalog::blowup_p2_toric())),
            "P1xP1_toric" => Model::Toric(Arc::new(catalog::p1xp1_toric())),
            "F1_toric" => Model::Toric(Arc::new(catalog::f1_toric())),
            other => {
                return Err(divstab::Error::InvalidModel(format!(
                    "unknown bundled model `{other}` (one of {})",
                    catalog::NAMES.join(", ")
                )))
            }
        },
    })
}

/// Parses a config, reporting the JSON path of the first offending field.
pub fn parse(text: &str) -> Result<JobConfig, SchemaError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        SchemaError {
            path,
            line: inner.line(),
            column: inner.column(),
            message: inner.to_string(),
        }
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SchemaError {
    pub path: String,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (at `{}`, line {} column {})", self.message, self.path, self.line, self.column)
    }
}

impl std::error::Error for SchemaError {}
