//! Subcommand implementations. Each returns the JSON printed on stdout and
//! the process exit code.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use car_extend::extend::{
    decide_joint_pure, decide_product_extension, joint_extension_family_p0, verify_extension, ExtensionDecision,
};
use car_extend::oracle::{feasible_extension, uniqueness_probe, FeasibilityStatus, OracleParams, ProbeParams, StartPoint};
use car_extend::states::{
    is_even, is_pure, lambda_theta, odd_weight, p_value, random_state, StateKind, Tolerances,
};
use car_extend::{DensityState, ModeSet};
use serde_json::{json, Map, Value};

use crate::statefile::StateFile;

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_NONE: u8 = 2;

/// Environment variable overriding `tol_eq`.
pub const TOL_ENV: &str = "CAR_EXTEND_TOL";

#[derive(Debug)]
pub struct Output {
    pub code: u8,
    pub json: Value,
}

impl Output {
    fn new(code: u8, json: Value) -> Self {
        Self { code, json }
    }
}

/// Defaults, with `tol_eq` taken from the environment when set.
pub fn tolerances_from_env() -> Result<Tolerances> {
    let mut tol = Tolerances::default();
    if let Ok(raw) = std::env::var(TOL_ENV) {
        let v: f64 = raw
            .trim()
            .parse()
            .with_context(|| format!("{TOL_ENV}={raw:?} is not a number"))?;
        if !(v.is_finite() && v >= 0.0) {
            bail!("{TOL_ENV} must be a non-negative number, got {v}");
        }
        tol.tol_eq = v;
    }
    Ok(tol)
}

fn load(path: &Path, tol: &Tolerances) -> Result<DensityState> {
    StateFile::read(path)?.state(tol).with_context(|| format!("{} is not a valid state", path.display()))
}

pub fn gen(kind: StateKind, modes: &[u32], seed: u64, out: &Path) -> Result<Output> {
    let modes = ModeSet::from_unsorted(modes.to_vec())?;
    let state = random_state(&modes, kind, seed)?;
    let mut meta = Map::new();
    meta.insert("kind".into(), json!(kind.name()));
    meta.insert("seed".into(), json!(seed));
    if let StateKind::FullRank { floor } = kind {
        meta.insert("floor".into(), json!(floor));
    }
    StateFile::from_state(&state, Some(meta)).write(out)?;
    Ok(Output::new(
        EXIT_OK,
        json!({"out": out.display().to_string(), "modes": modes.indices(), "kind": kind.name(), "seed": seed}),
    ))
}

pub fn inspect(path: &Path, tol: &Tolerances) -> Result<Output> {
    let s = load(path, tol)?;
    Ok(Output::new(
        EXIT_OK,
        json!({
            "modes": s.modes().indices(),
            "even": is_even(&s, tol),
            "pure": is_pure(&s, tol),
            "purity": s.purity(),
            "p_value": p_value(&s, tol),
            "lambda_theta": lambda_theta(&s, tol),
            "odd_weight": odd_weight(&s),
            "eigenvalues": s.eigenvalues(),
        }),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecideMode {
    Product,
    JointPure,
}

fn decision_output(d: &ExtensionDecision) -> Result<Output> {
    let code = if d.exists { EXIT_OK } else { EXIT_NONE };
    Ok(Output::new(code, serde_json::to_value(d)?))
}

pub fn decide(a: &Path, b: &Path, mode: DecideMode, tol: &Tolerances) -> Result<Output> {
    let (phi1, phi2) = (load(a, tol)?, load(b, tol)?);
    let d = match mode {
        DecideMode::Product => decide_product_extension(&[phi1, phi2], tol)?,
        DecideMode::JointPure => decide_joint_pure(&phi1, &phi2, tol)?,
    };
    decision_output(&d)
}

pub fn extend(a: &Path, b: &Path, tilde: Option<&Path>, out: &Path, tol: &Tolerances) -> Result<Output> {
    let (phi1, phi2) = (load(a, tol)?, load(b, tol)?);
    let oracle_params = OracleParams { tolerances: *tol, ..OracleParams::default() };
    let (state, method, decision) = if let Some(t) = tilde {
        let tilde = load(t, tol)?;
        if tilde.modes() != phi2.modes() {
            bail!("tilde state lives on {}, second state on {}", tilde.modes(), phi2.modes());
        }
        let sym = (tilde.matrix() + tilde.theta().matrix()) * car_extend::C64::new(0.5, 0.0);
        let err = (sym - phi2.matrix()).iter().fold(0.0f64, |m, v| m.max(v.norm()));
        if err > tol.tol_eq {
            bail!("the tilde state does not symmetrize to the second state (error {err:.3e})");
        }
        (joint_extension_family_p0(&phi1, &tilde, tol)?, "p0-family", None)
    } else if is_pure(&phi1, tol) || is_pure(&phi2, tol) {
        let (pure, other) = if is_pure(&phi1, tol) { (&phi1, &phi2) } else { (&phi2, &phi1) };
        let d = decide_joint_pure(pure, other, tol)?;
        match d.witness.clone() {
            Some(w) => (w, "closed-form", Some(d)),
            None => return decision_output(&d),
        }
    } else {
        let d = decide_product_extension(&[phi1.clone(), phi2.clone()], tol)?;
        match d.witness.clone() {
            Some(w) => (w, "product", Some(d)),
            None => {
                let report = feasible_extension(&phi1, &phi2, &oracle_params)?;
                match (report.status, report.witness) {
                    (FeasibilityStatus::Feasible, Some(w)) => (w, "oracle", Some(d)),
                    (FeasibilityStatus::Infeasible, _) => {
                        return Ok(Output::new(EXIT_NONE, json!({"status": "Infeasible", "gap": report.gap})))
                    }
                    _ => bail!("oracle could not decide (gap {:.3e})", report.gap),
                }
            }
        }
    };
    // Oracle witnesses may sit up to tol_feas outside the cone.
    let check_tol = if method == "oracle" { oracle_params.witness_tolerances() } else { *tol };
    let report = verify_extension(&state.to_operator(), &[phi1, phi2], &check_tol)?;
    let mut meta = Map::new();
    meta.insert("method".into(), json!(method));
    StateFile::from_state(&state, Some(meta)).write(out)?;
    Ok(Output::new(
        EXIT_OK,
        json!({
            "out": out.display().to_string(),
            "method": method,
            "decision": decision,
            "verification": report,
        }),
    ))
}

/// Parses `product` or `seed:N`.
pub fn parse_start(s: &str) -> Result<StartPoint> {
    if s == "product" {
        return Ok(StartPoint::Product);
    }
    let n = s
        .strip_prefix("seed:")
        .ok_or_else(|| anyhow!("start must be `product` or `seed:N`, got {s:?}"))?;
    Ok(StartPoint::Seeded(n.parse().with_context(|| format!("bad seed in {s:?}"))?))
}

pub fn oracle(a: &Path, b: &Path, params: &OracleParams, out: Option<&Path>, probe: bool) -> Result<Output> {
    let tol = &params.tolerances;
    let (phi1, phi2) = (load(a, tol)?, load(b, tol)?);
    let report = feasible_extension(&phi1, &phi2, params)?;
    let mut json = serde_json::to_value(&report)?;
    if let Some(w) = &report.witness {
        if let Some(path) = out {
            StateFile::from_state(w, None).write(path)?;
            json["witness_out"] = json!(path.display().to_string());
        }
        if probe {
            let probe_params = ProbeParams {
                tol_marginal: params.tol_feas,
                tolerances: params.witness_tolerances(),
                ..ProbeParams::default()
            };
            json["uniqueness"] = serde_json::to_value(uniqueness_probe(w, &[phi1, phi2], &probe_params)?)?;
        }
    }
    let code = match report.status {
        FeasibilityStatus::Feasible => EXIT_OK,
        FeasibilityStatus::Infeasible => EXIT_NONE,
        FeasibilityStatus::Undecided => EXIT_ERROR,
    };
    Ok(Output::new(code, json))
}

pub fn verify(candidate: &Path, a: &Path, b: &Path, tol: &Tolerances) -> Result<Output> {
    let op = StateFile::read(candidate)?.operator()?;
    let (phi1, phi2) = (load(a, tol)?, load(b, tol)?);
    let report = verify_extension(&op, &[phi1, phi2], tol)?;
    let code = if report.passes() { EXIT_OK } else { EXIT_ERROR };
    Ok(Output::new(code, serde_json::to_value(&report)?))
}
