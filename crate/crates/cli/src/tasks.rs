use std::time::Instant;

use divstab::filtrations::{self, ExpectedOrder};
use divstab::rational::{self, Rational};
use divstab::stability::{self, Settings, Verdict};
use divstab::{DivisorClass, Error, GeometryModel, Threshold};
use serde_json::{json, Value};

use crate::config::{ClassSpec, JobConfig, Model, Task};

/// Attached to reports whose conclusions quantify over all measures.
pub const EVIDENCE: &str =
    "finite-instance evidence: computed for the listed model, line bundle and measures only; not a proof of (in)stability over all divisorial measures";

fn q(r: &Rational) -> Value {
    Value::String(rational::format(r))
}

fn class_json(c: &DivisorClass) -> Value {
    Value::Array(c.coeffs().iter().map(q).collect())
}

fn threshold_json(t: &Threshold) -> Value {
    match t {
        Threshold::Exact(r) => json!({ "value": rational::to_f64(r), "exact": q(r) }),
        Threshold::Bracket { lower, upper } => json!({ "value": t.value(), "lower": lower, "upper": upper }),
    }
}

fn beta_json(b: &stability::BetaReport) -> Value {
    json!({
        "entropy_term": q(&b.entropy_term),
        "derivative_term": b.derivative_term,
        "beta": b.beta,
        "norm": b.norm,
        "stability_ratio": b.stability_ratio,
        "maximizer_clusters": b.maximizers,
    })
}

pub struct Context<'a> {
    pub config: &'a JobConfig,
    pub model: &'a Model,
    pub line_bundle: DivisorClass,
    pub settings: Settings,
}

impl Context<'_> {
    fn class(&self, spec: &Option<ClassSpec>) -> divstab::Result<DivisorClass> {
        match spec {
            None => Ok(self.line_bundle.clone()),
            Some(c) => self.model.class(c),
        }
    }

    fn settings_with(&self, starts: Option<usize>) -> Settings {
        Settings {
            starts: starts.unwrap_or(self.settings.starts),
            ..self.settings
        }
    }

    pub fn run(&self, task: &Task) -> divstab::Result<Value> {
        let g = self.model.geometry();
        let tol = self.settings.tolerances;
        let l = &self.line_bundle;
        match task {
            Task::Volume(p) => {
                let d = self.class(&p.class)?;
                let v = g.volume(&d)?;
                Ok(json!({ "class": class_json(&d), "volume": q(&v), "big": v > Rational::from_integer(0.into()) }))
            }
            Task::Zariski(p) => {
                let Model::Surface(s) = self.model else {
                    return Err(Error::InvalidArgument("zariski needs a surface model".into()));
                };
                let d = self.class(&p.class)?;
                let z = s.zariski(&d)?;
                let negative: Vec<Value> = z
                    .negative
                    .iter()
                    .map(|(i, c, a)| json!({ "curve_index": i, "curve": class_json(c), "coefficient": q(a) }))
                    .collect();
                Ok(json!({
                    "class": class_json(&d),
                    "positive_part": class_json(&z.positive),
                    "negative_part": negative,
                    "volume": q(&s.volume(&d)?),
                }))
            }
            Task::Gamma(p) => {
                let d = self.class(&p.class)?;
                let v = self.model.valuation(&p.valuation)?;
                Ok(json!({ "valuation": v.name, "threshold": threshold_json(&g.gamma_threshold(&d, &v, tol.threshold)?) }))
            }
            Task::S(p) => {
                let spec = self.model.filtration(&p.filtration)?;
                let s = ExpectedOrder::for_spec(g, l, &spec, tol)?;
                let value = s.eval(spec.shifts())?;
                let (lo, hi) = s.lambda_bounds(spec.shifts());
                Ok(json!({ "S": value, "lambda_min": lo, "lambda_max": hi, "thresholds": s.thresholds(), "volume": s.volume() }))
            }
            Task::Norm(p) => {
                let mu = self.model.measure(&p.measure)?;
                let n = stability::norm(g, l, &mu, &self.settings_with(p.starts))?;
                if !n.converged {
                    return Err(Error::Convergence("norm maximization hit the iteration budget".into()));
                }
                Ok(json!({ "norm": n.value, "maximizers": n.maximizers, "box_bound": n.box_bound, "converged": n.converged }))
            }
            Task::Beta(p) => {
                let mu = self.model.measure(&p.measure)?;
                let b = stability::beta(g, l, &mu, &self.settings_with(p.starts))?;
                Ok(beta_json(&b))
            }
            Task::Delta(p) => {
                let mut candidates = match &p.candidates {
                    None => stability::declared_candidates(g),
                    Some(names) => names.iter().map(|n| self.model.valuation(n)).collect::<divstab::Result<_>>()?,
                };
                if let Some(h) = p.toric_height {
                    let Model::Toric(t) = self.model else {
                        return Err(Error::InvalidArgument("toric_height needs a toric model".into()));
                    };
                    candidates.extend(stability::toric_candidates(t, h)?);
                }
                let d = stability::delta_anticanonical(g, &candidates, &self.settings)?;
                let ratios: Vec<Value> = d
                    .ratios
                    .iter()
                    .map(|(n, a, s, r)| json!({ "valuation": n, "A": a, "S": s, "ratio": r }))
                    .collect();
                Ok(json!({ "delta": d.value, "witness": d.witness.name, "candidates": ratios }))
            }
            Task::MaSolve(p) => {
                let mu = self.model.measure(&p.measure)?;
                let s = stability::ma_solve(g, l, &mu, &self.settings_with(p.starts))?;
                let measure: Vec<Value> = s.measure_out.iter().map(|(n, m)| json!({ "valuation": n, "mass": m })).collect();
                let flats: Vec<Value> = s
                    .flat_directions
                    .iter()
                    .map(|f| json!({ "index": f.index, "forward": f.forward, "backward": f.backward }))
                    .collect();
                Ok(json!({
                    "t_star": s.t_star,
                    "measure_out": measure,
                    "mass_total": s.measure_out.iter().map(|(_, m)| m).sum::<f64>(),
                    "residual": s.residual,
                    "flat_directions": flats,
                    "value": s.value,
                    "maximizers": s.maximizers,
                }))
            }
            Task::Probe(p) => {
                let ms = p.measures.iter().map(|m| self.model.measure(m)).collect::<divstab::Result<Vec<_>>>()?;
                let r = stability::divisorial_stability_probe(g, l, &ms, p.epsilon, &self.settings)?;
                let verdict = match r.verdict {
                    Verdict::Unstable => "unstable",
                    Verdict::NoViolationFound => "no_violation_found",
                    Verdict::Vacuous => "vacuous",
                };
                Ok(json!({
                    "verdict": verdict,
                    "epsilon": p.epsilon,
                    "min_ratio": r.min_ratio,
                    "argmin": r.argmin,
                    "violations": r.violations,
                    "measures": r.reports.iter().map(beta_json).collect::<Vec<_>>(),
                }))
            }
            Task::FiniteK(p) => {
                let Model::Toric(t) = self.model else {
                    return Err(Error::InvalidArgument("finite_k needs a toric model".into()));
                };
                let spec = self.model.filtration(&p.filtration)?;
                let prof = filtrations::filtration_volume_finite_k(t, l, &spec, p.k)?;
                let mut out = json!({
                    "k": prof.level,
                    "dimension": prof.dimension(),
                    "volume_k": prof.volume,
                    "normalized_volume": prof.normalized_volume(),
                });
                if p.include_jumps {
                    out["jumps"] = json!(prof.jumps);
                }
                Ok(out)
            }
        }
    }
}

pub struct Outcome {
    pub reports: Vec<Value>,
    pub failure: Option<Error>,
}

/// Runs the tasks in order, stopping at the first failure.
pub fn run_all(ctx: &Context<'_>, header: &Value, timings: bool) -> Outcome {
    let mut reports = Vec::new();
    for (i, task) in ctx.config.tasks.iter().enumerate() {
        let start = Instant::now();
        let result = ctx.run(task);
        let mut report = header.clone();
        report["task_index"] = json!(i);
        report["kind"] = json!(task.kind());
        report["inputs"] = serde_json::to_value(task).map(|v| v["params"].clone()).unwrap_or(Value::Null);
        if matches!(task, Task::Beta(_) | Task::Probe(_) | Task::MaSolve(_)) {
            report["evidence"] = json!(EVIDENCE);
        }
        if timings {
            report["wall_time_ms"] = json!(start.elapsed().as_secs_f64() * 1e3);
        }
        match result {
            Ok(out) => {
                report["output"] = out;
                reports.push(report);
            }
            Err(e) => {
                report["error"] = crate::error_json(&e);
                reports.push(report);
                return Outcome {
                    reports,
                    failure: Some(e),
                };
            }
        }
    }
    Outcome { reports, failure: None }
}
