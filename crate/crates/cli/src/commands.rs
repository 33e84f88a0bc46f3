//! Command bodies. Each returns a JSON record and an exit status; printing is
//! left to `main`.

use std::time::Instant;

use kostka_core::bounds::PshVolume;
use kostka_core::conditioning::check_floors;
use kostka_core::domain::{Partition, Weight};
use kostka_core::oracle::{exact_kostka_volume, kostka_count, logconcavity_probe, scaling_limit};
use kostka_core::rational::to_i64s;
use kostka_core::{
    assemble_bracket, condition, minimize, ConditioningRecord, Error, Instance, Interval, OptimizationResult, Rational,
    VolumeBracket,
};
use num_bigint::BigInt;
use serde_json::{json, Map, Value};

use crate::config::RunConfig;
use crate::input::InstanceSpec;
use crate::render::{certified, exact, lower, optional, upper, vector};

pub const SCHEMA: u64 = 1;

/// Process exit statuses; stable across versions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Ok = 0,
    Parse = 2,
    Degenerate = 3,
    Boundary = 4,
    Resource = 5,
    CertifyFail = 6,
}

impl Status {
    pub fn code(self) -> u8 {
        self as u8
    }

    fn label(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Parse => "parse",
            Status::Degenerate => "degenerate",
            Status::Boundary => "boundary",
            Status::Resource => "resource",
            Status::CertifyFail => "certify_fail",
        }
    }

    pub fn of_error(e: &Error) -> Status {
        match e {
            Error::Input(_) | Error::Precondition(_) => Status::Parse,
            Error::Degenerate(_) => Status::Degenerate,
            Error::Boundary(_) | Error::Unbounded(_) => Status::Boundary,
            Error::Resource(_) | Error::Indeterminate(_) | Error::DimCap { .. } => Status::Resource,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum OracleKind {
    Kostka,
    Volume,
    Scaling,
    Logconcavity,
}

#[derive(Clone, Debug)]
pub struct OracleArgs {
    pub kind: OracleKind,
    pub scale: u32,
    pub steps: usize,
    pub mu_b: Option<Vec<Rational>>,
}

pub struct Outcome {
    pub record: Value,
    pub status: Status,
}

impl Outcome {
    fn ok(record: Value) -> Self {
        Outcome { record, status: Status::Ok }
    }
}

/// Error record; the message is also meant for stderr.
pub fn error_record(command: &str, status: Status, message: &str) -> Outcome {
    let record = json!({
        "schema": SCHEMA,
        "command": command,
        "status": status.label(),
        "error": { "kind": status.label(), "message": message },
    });
    Outcome { record, status }
}

struct Timer {
    on: bool,
    phases: Map<String, Value>,
    last: Instant,
}

impl Timer {
    fn new(on: bool) -> Self {
        Timer { on, phases: Map::new(), last: Instant::now() }
    }

    fn lap(&mut self, name: &str) {
        if self.on {
            let ms = self.last.elapsed().as_secs_f64() * 1e3;
            self.phases.insert(format!("{name}_ms"), json!((ms * 1e3).round() / 1e3));
            self.last = Instant::now();
        }
    }

    /// Timings only appear when requested, keeping default output reproducible.
    fn attach(self, record: &mut Value) {
        if self.on {
            record["timings"] = Value::Object(self.phases);
        }
    }
}

fn build_instance(spec: &InstanceSpec) -> kostka_core::Result<Instance> {
    Instance::new(Partition::new(spec.lambda())?, Weight::new(spec.mu()))
}

fn instance_json(inst: &Instance) -> Value {
    json!({
        "lambda": vector(inst.original_lambda.parts()),
        "mu": vector(inst.original_mu.entries()),
        "normalized": {
            "lambda": vector(inst.lambda.parts()),
            "mu": vector(inst.mu.entries()),
            "shift": exact(&inst.shift_applied),
            "scale": exact(&inst.scale_applied),
            "volume_factor": exact(&inst.volume_factor()),
        },
    })
}

fn conditioning_json(inst: &Instance, rec: &ConditioningRecord) -> Value {
    let floors = check_floors(inst, rec);
    json!({
        "n": rec.n,
        "lambda_gap": exact(&rec.lambda_gap),
        "tau": exact(&rec.tau),
        "d_mu": certified(&rec.d_mu),
        "r0": certified(&rec.r0),
        "r": certified(&rec.r),
        "delta_prime": certified(&rec.delta_prime),
        "epsilon": certified(&rec.epsilon),
        "epsilon_zero": rec.is_boundary(),
        "domain_radius": optional(rec.domain_radius.as_ref(), certified),
        "pgt_volume": exact(&rec.pgt_volume),
        "floors": {
            "r0": floors.r0_floor,
            "tau": floors.tau_floor,
            "epsilon": floors.epsilon_floor,
        },
    })
}

fn bracket_json(b: &VolumeBracket) -> Value {
    let (psh_kind, psh) = match &b.psh_volume {
        PshVolume::Exact(v) => ("exact", v),
        PshVolume::UpperBound(v) => ("upper_bound", v),
    };
    json!({
        "lower": lower(&b.lower),
        "upper": b.upper.as_ref().map_or_else(|| json!({ "exact": "+inf", "decimal": "+inf" }), upper),
        "g_star": optional(b.g_star.as_ref(), certified),
        "g_lower": optional(b.g_lower.as_ref(), lower),
        "f_estimate": optional(b.f_estimate.as_ref(), certified),
        "psh_volume": { "kind": psh_kind, "value": exact(psh) },
        "log_lower": optional(b.log_lower.as_ref(), certified),
        "log_upper": optional(b.log_upper.as_ref(), certified),
        "approximation_ratio_log": optional(b.approximation_ratio_log.as_ref(), certified),
    })
}

fn optimization_json(o: &OptimizationResult) -> Value {
    json!({
        "y_star": vector(&o.y_star),
        "g_star": certified(&o.g_star),
        "g_lower": lower(&o.g_lower),
        "origin_value": certified(&o.origin_value),
        "iterations": o.iterations,
        "newton_steps": o.newton_steps,
        "stationarity_residual": upper(&o.stationarity_residual),
        "domain_doublings": o.domain_doublings,
        "radius": exact(&o.radius),
    })
}

struct Estimated {
    instance: Instance,
    record: ConditioningRecord,
    opt: Option<OptimizationResult>,
    bracket: VolumeBracket,
}

fn run_estimate(spec: &InstanceSpec, cfg: &RunConfig, timer: &mut Timer) -> kostka_core::Result<Estimated> {
    let instance = build_instance(spec)?;
    timer.lap("normalize");
    let record = condition(&instance)?;
    timer.lap("condition");
    let ocfg = cfg.optimize_config();
    if record.is_boundary() {
        let bracket = VolumeBracket::boundary(&instance, cfg.postnikov_threshold);
        return Ok(Estimated { instance, record, opt: None, bracket });
    }
    let opt = minimize(&instance, &record, &ocfg)?;
    timer.lap("minimize");
    let bracket = assemble_bracket(&instance, &record, &opt, &ocfg)?;
    timer.lap("bracket");
    Ok(Estimated { instance, record, opt: Some(opt), bracket })
}

fn header(command: &str, cfg: &RunConfig) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("schema".into(), json!(SCHEMA));
    m.insert("command".into(), json!(command));
    m.insert("config".into(), cfg.to_json());
    m
}

pub fn estimate(spec: &InstanceSpec, cfg: &RunConfig, timings: bool) -> Outcome {
    let mut timer = Timer::new(timings);
    let est = match run_estimate(spec, cfg, &mut timer) {
        Ok(e) => e,
        Err(e) => return error_record("estimate", Status::of_error(&e), &e.to_string()),
    };
    let status = if est.opt.is_none() { Status::Boundary } else { Status::Ok };
    let mut m = header("estimate", cfg);
    m.insert("status".into(), json!(status.label()));
    m.insert("instance".into(), instance_json(&est.instance));
    m.insert("conditioning".into(), conditioning_json(&est.instance, &est.record));
    m.insert("bracket".into(), bracket_json(&est.bracket));
    m.insert("optimization".into(), optional(est.opt.as_ref(), optimization_json));
    let mut record = Value::Object(m);
    timer.attach(&mut record);
    Outcome { record, status }
}

pub fn bounds(spec: &InstanceSpec, cfg: &RunConfig, timings: bool) -> Outcome {
    let mut timer = Timer::new(timings);
    let res = build_instance(spec).and_then(|inst| condition(&inst).map(|rec| (inst, rec)));
    let (inst, rec) = match res {
        Ok(v) => v,
        Err(e) => return error_record("bounds", Status::of_error(&e), &e.to_string()),
    };
    timer.lap("condition");
    let status = if rec.is_boundary() { Status::Boundary } else { Status::Ok };
    let mut m = header("bounds", cfg);
    m.insert("status".into(), json!(status.label()));
    m.insert("instance".into(), instance_json(&inst));
    m.insert("conditioning".into(), conditioning_json(&inst, &rec));
    let mut record = Value::Object(m);
    timer.attach(&mut record);
    Outcome { record, status }
}

/// `n (11/2 log n + 2 log(lambda_1 - lambda_n))`, the envelope without its constant.
fn envelope_base(inst: &Instance) -> kostka_core::Result<Interval> {
    const PREC: u32 = 128;
    let n = inst.n() as i64;
    let spread = inst.original_lambda.largest() - inst.original_lambda.smallest();
    let ln_n = Interval::from_int(n, PREC).ln()?;
    let ln_l = Interval::from_rational(&spread, PREC).ln()?;
    let inner = ln_n.mul(&Interval::from_rational(&Rational::new(11.into(), 2.into()), PREC)).add(&ln_l.mul_int(2));
    Ok(inner.mul_int(n))
}

pub fn certify(spec: &InstanceSpec, cfg: &RunConfig, timings: bool) -> Outcome {
    let mut timer = Timer::new(timings);
    let est = match run_estimate(spec, cfg, &mut timer) {
        Ok(e) => e,
        Err(e) => return error_record("certify", Status::of_error(&e), &e.to_string()),
    };
    let kv = match exact_kostka_volume(&est.instance, cfg.oracle_dim_cap) {
        Ok(v) => v,
        Err(e) => return error_record("certify", Status::of_error(&e), &e.to_string()),
    };
    timer.lap("oracle");
    let pass = est.bracket.contains_sqrt_scaled(&kv.v_squared);
    let mut diag = Map::new();
    if let Some(ratio) = &est.bracket.approximation_ratio_log {
        match envelope_base(&est.instance) {
            Ok(base) => {
                let n = Rational::from_integer(BigInt::from(est.instance.n()));
                // Smallest constant K0 with ratio <= base + n K0.
                let k0 = (ratio.hi() - base.lo_rational()) / &n;
                diag.insert("envelope_base".into(), json!({ "lo": lower(&base.lo_rational()), "hi": upper(&base.hi_rational()) }));
                diag.insert("implied_k0".into(), upper(&k0));
            }
            Err(e) => return error_record("certify", Status::of_error(&e), &e.to_string()),
        }
    }
    let status = if pass { Status::Ok } else { Status::CertifyFail };
    let mut m = header("certify", cfg);
    m.insert("status".into(), json!(status.label()));
    m.insert("verdict".into(), json!(if pass { "PASS" } else { "FAIL" }));
    m.insert("instance".into(), instance_json(&est.instance));
    m.insert("bracket".into(), bracket_json(&est.bracket));
    m.insert(
        "oracle".into(),
        json!({
            "vtilde": exact(&kv.vtilde),
            "v_squared": exact(&kv.v_squared),
            "v": certified(&kv.v),
            "v_exact": format!("sqrt({})", kv.v_squared),
        }),
    );
    m.insert("diagnostics".into(), Value::Object(diag));
    let mut record = Value::Object(m);
    timer.attach(&mut record);
    Outcome { record, status }
}

fn integral(v: &[Rational], what: &str) -> kostka_core::Result<Vec<i64>> {
    to_i64s(v).ok_or_else(|| Error::Input(format!("{what} must be integral for this oracle")))
}

fn oracle_body(spec: &InstanceSpec, cfg: &RunConfig, args: &OracleArgs) -> kostka_core::Result<Value> {
    match args.kind {
        OracleKind::Kostka => {
            let l = integral(&spec.lambda(), "lambda")?;
            let m = integral(&spec.mu(), "mu")?;
            Partition::new(spec.lambda())?;
            if l.len() != m.len() {
                return Err(Error::Input("lambda and mu differ in length".into()));
            }
            let k = kostka_count(&l, &m);
            Ok(json!({ "kostka": exact(&Rational::from_integer(BigInt::from(k))) }))
        }
        OracleKind::Volume => {
            let inst = build_instance(spec)?;
            let kv = exact_kostka_volume(&inst, cfg.oracle_dim_cap)?;
            Ok(json!({
                "instance": instance_json(&inst),
                "vtilde": exact(&kv.vtilde),
                "v_squared": exact(&kv.v_squared),
                "v": certified(&kv.v),
                "v_exact": format!("sqrt({})", kv.v_squared),
            }))
        }
        OracleKind::Scaling => {
            let l = integral(&spec.lambda(), "lambda")?;
            let m = integral(&spec.mu(), "mu")?;
            let s = scaling_limit(&l, &m, args.scale)?;
            Ok(json!({ "n_scale": args.scale, "scaling_limit": exact(&s) }))
        }
        OracleKind::Logconcavity => {
            let mu_b = args
                .mu_b
                .clone()
                .or_else(|| spec.mu_b())
                .ok_or_else(|| Error::Input("logconcavity needs a second endpoint (--mu-b or \"mu_b\")".into()))?;
            let lambda = Partition::new(spec.lambda())?;
            let rep = logconcavity_probe(&lambda, &Weight::new(spec.mu()), &Weight::new(mu_b), args.steps, cfg.oracle_dim_cap)?;
            let points: Vec<Value> = rep.points.iter().map(|(mu, v)| json!({ "mu": vector(mu), "vtilde": exact(v) })).collect();
            Ok(json!({ "steps": args.steps, "points": points, "violations": rep.violations, "holds": rep.holds() }))
        }
    }
}

pub fn oracle(spec: &InstanceSpec, cfg: &RunConfig, args: &OracleArgs, timings: bool) -> Outcome {
    let mut timer = Timer::new(timings);
    let body = match oracle_body(spec, cfg, args) {
        Ok(b) => b,
        Err(e) => return error_record("oracle", Status::of_error(&e), &e.to_string()),
    };
    timer.lap("oracle");
    let mut m = header("oracle", cfg);
    m.insert("status".into(), json!(Status::Ok.label()));
    m.insert("kind".into(), json!(format!("{:?}", args.kind).to_lowercase()));
    m.insert("result".into(), body);
    let mut record = Value::Object(m);
    timer.attach(&mut record);
    Outcome::ok(record)
}
