//! Acceptance suite: one line per criterion, non-zero exit on any failure.

mod common;

use std::time::{Duration, Instant};

use car_extend::car::generator;
use car_extend::extend::{
    decide_joint_pure, decide_product_extension, decompose_even_state, example1, example_mixture,
    joint_extension_family_p0, joint_extension_family_p0_assembled, joint_extension_pure,
    joint_extension_pure_via_representation, kappa_free_parameters, kappa_null_space, kappa_parameter_interval,
    odd_decompositions, product_extension, random_odd_selfadjoint, verify_extension,
};
use car_extend::oracle::{
    feasible_extension, feasible_extension_many, uniqueness_probe, FeasibilityStatus, OracleParams, ProbeParams,
    StartPoint,
};
use car_extend::states::{is_even, lambda_theta, p_value, restrict, StateKind};
use car_extend::{DensityState, ModeSet, Tolerances, C64};
use common::*;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn max_abs(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).iter().fold(0.0, |m, v| m.max(v.norm()))
}

fn marginal_error(joint: &DensityState, parts: &[DensityState], tol: &Tolerances) -> f64 {
    parts
        .iter()
        .map(|p| max_abs(restrict(joint, p.modes(), tol).unwrap().matrix(), p.matrix()))
        .fold(0.0, f64::max)
}

const STARTS: [StartPoint; 3] = [StartPoint::Product, StartPoint::Seeded(1), StartPoint::Seeded(2)];

fn is_even_kind(kind: StateKind) -> bool {
    matches!(kind, StateKind::EvenPure | StateKind::EvenMixed)
}

fn c(v: f64) -> C64 {
    C64::new(v, 0.0)
}

fn coherence_state(mode: u32, tol: &Tolerances) -> DensityState {
    let rho = DMatrix::from_row_slice(2, 2, &[c(0.5), c(0.25), c(0.25), c(0.5)]);
    DensityState::new(ms(&[mode]), rho, tol).unwrap()
}

fn boundary_pure(mode: u32) -> DensityState {
    let psi = DVector::from_vec(vec![c(3f64.sqrt() / 2.0), c(0.5)]);
    DensityState::pure(ms(&[mode]), &psi).unwrap()
}

fn plus_state(mode: u32) -> DensityState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DensityState::pure(ms(&[mode]), &DVector::from_vec(vec![c(s), c(s)])).unwrap()
}

fn criterion_1() -> Outcome {
    let mut sets: Vec<ModeSet> = (1..=6).map(|n| ModeSet::new((1..=n).collect()).unwrap()).collect();
    sets.push(ms(&[2, 5, 9]));
    sets.push(ms(&[1, 3, 4, 7, 8, 10]));
    let mut checked = 0;
    for modes in &sets {
        let d = modes.dim();
        let id = DMatrix::<C64>::identity(d, d);
        let zero = DMatrix::<C64>::zeros(d, d);
        for i in modes.iter() {
            for j in modes.iter() {
                let ai = generator(modes, i, false).unwrap();
                let aj = generator(modes, j, false).unwrap();
                let ajs = generator(modes, j, true).unwrap();
                let mixed = ai.anticommutator(&ajs);
                let expect = if i == j { &id } else { &zero };
                if mixed.matrix() != expect || ai.anticommutator(&aj).matrix() != &zero {
                    return outcome(false, format!("relation broken on {modes} for modes {i},{j}"));
                }
                checked += 1;
            }
        }
    }
    outcome(true, format!("{checked} generator pairs exact on {} mode sets", sets.len()))
}

fn criterion_2() -> Outcome {
    let tol = Tolerances::default();
    let mut r = rng(2002);
    let (mut agree, mut worst, mut parity_ok, mut exists) = (0, 0.0f64, 0, 0);
    for _ in 0..200 {
        let k = r.random_range(2..=3);
        let sizes: Vec<usize> = (0..k).map(|_| small(&mut r)).collect();
        let parts = random_partition(&mut r, &sizes);
        let kinds: Vec<StateKind> = parts
            .iter()
            .map(|_| if r.random_bool(0.6) { any_kind(&mut r) } else { StateKind::EvenMixed })
            .collect();
        let states: Vec<DensityState> = parts.iter().zip(&kinds).map(|(p, k)| state(p, *k, &mut r)).collect();
        let odd = kinds.iter().filter(|k| !is_even_kind(**k)).count();
        let decision = decide_product_extension(&states, &tol).unwrap();
        if decision.exists == (odd <= 1) {
            agree += 1;
        }
        if let Some(w) = &decision.witness {
            exists += 1;
            worst = worst.max(marginal_error(w, &states, &tol));
            if is_even(w, &tol) == (odd == 0) {
                parity_ok += 1;
            }
        }
    }
    let pass = agree == 200 && worst <= 1e-10 && parity_ok == exists;
    outcome(
        pass,
        format!("agreement {agree}/200, witnesses {exists}, max marginal error {worst:.2e}, evenness {parity_ok}/{exists}"),
    )
}

fn criterion_3() -> Outcome {
    let tol = Tolerances::default();
    let params = OracleParams::default();
    let mut r = rng(3003);
    let (mut pure_ok, mut infeasible, mut unique_ok) = (0, 0, 0);
    let (mut n_low, mut n_high) = (0, 0);
    while n_low < 100 || n_high < 100 {
        let k = r.random_range(2..=3);
        let sizes: Vec<usize> = (0..k).map(|_| small(&mut r)).collect();
        let parts = random_partition(&mut r, &sizes);
        let kinds: Vec<StateKind> = parts
            .iter()
            .map(|_| if r.random_bool(0.5) { StateKind::Pure } else { StateKind::EvenPure })
            .collect();
        let odd = kinds.iter().filter(|k| !is_even_kind(**k)).count();
        let states: Vec<DensityState> = parts.iter().zip(&kinds).map(|(p, k)| state(p, *k, &mut r)).collect();
        if odd <= 1 && n_low < 100 {
            n_low += 1;
            let w = product_extension(&states, &tol).unwrap();
            if w.purity() >= 1.0 - 1e-9 {
                pure_ok += 1;
            }
            let o = feasible_extension_many(&states, &params).unwrap();
            if o.witness.map(|ow| max_abs(ow.matrix(), w.matrix()) <= 1e-6) == Some(true) {
                unique_ok += 1;
            }
        } else if odd >= 2 && n_high < 100 {
            n_high += 1;
            let all = STARTS.iter().all(|s| {
                feasible_extension_many(&states, &params.clone().with_start(*s)).unwrap().status
                    == FeasibilityStatus::Infeasible
            });
            if all {
                infeasible += 1;
            }
        }
    }
    let pass = pure_ok == 100 && infeasible == 100 && unique_ok == 100;
    outcome(
        pass,
        format!("pure witnesses {pure_ok}/100, oracle equals product {unique_ok}/100, infeasible under 3 starts {infeasible}/100"),
    )
}

fn criterion_4() -> Outcome {
    let tol = Tolerances::default();
    let params = OracleParams::default();
    let mut r = rng(4004);
    let (mut n, mut agree, mut undecided, mut skipped, mut feasible) = (0, 0, 0, 0, 0);
    while n < 200 {
        let sizes = [small(&mut r), small(&mut r)];
        let parts = random_partition(&mut r, &sizes);
        let phi1 = state(&parts[0], StateKind::Pure, &mut r);
        let kind = any_kind(&mut r);
        let phi2 = state(&parts[1], kind, &mut r);
        let d = decide_joint_pure(&phi1, &phi2, &tol).unwrap();
        if (d.lambda.unwrap() - d.threshold.unwrap()).abs() <= 1e-6 {
            skipped += 1;
            continue;
        }
        n += 1;
        let o = feasible_extension(&phi1, &phi2, &params).unwrap();
        match o.status {
            FeasibilityStatus::Undecided => undecided += 1,
            s if (s == FeasibilityStatus::Feasible) == d.exists => agree += 1,
            _ => {}
        }
        if d.exists {
            feasible += 1;
        }
    }
    let phi1 = boundary_pure(1);
    let phi2 = coherence_state(2, &tol);
    let p = p_value(&phi1, &tol);
    let lam = lambda_theta(&phi2, &tol);
    let o = feasible_extension(&phi1, &phi2, &params).unwrap();
    let closed = joint_extension_pure(&phi1, &phi2, &tol).unwrap();
    let boundary_dist = o.witness.as_ref().map(|w| max_abs(w.matrix(), closed.matrix())).unwrap_or(f64::INFINITY);
    let boundary_ok = o.status == FeasibilityStatus::Feasible
        && boundary_dist <= 1e-6
        && (p - 0.5).abs() <= 1e-12
        && (lam - 1.0 / 3.0).abs() <= 1e-9;
    outcome(
        agree == 200 && undecided == 0 && boundary_ok,
        format!(
            "agreement {agree}/200 ({feasible} feasible, {undecided} undecided, {skipped} near-boundary skipped); boundary p={p:.12} lambda={lam:.12} witness distance {boundary_dist:.2e}"
        ),
    )
}

/// Random feasible instances with a non-even pure first marginal.
fn feasible_p_nonzero(r: &mut rand_chacha::ChaCha8Rng, count: usize) -> Vec<(DensityState, DensityState)> {
    let tol = Tolerances::default();
    let mut out = Vec::new();
    while out.len() < count {
        let sizes = [small(r), small(r)];
        let parts = random_partition(r, &sizes);
        let phi1 = state(&parts[0], StateKind::Pure, r);
        let phi2 = state(&parts[1], any_kind(r), r);
        let d = decide_joint_pure(&phi1, &phi2, &tol).unwrap();
        if d.exists && d.p.unwrap() > tol.tol_eq && (d.lambda.unwrap() - d.threshold.unwrap()).abs() > 1e-6 {
            out.push((phi1, phi2));
        }
    }
    out
}

fn criterion_5() -> Outcome {
    let tol = Tolerances::default();
    let mut r = rng(5005);
    let (mut ok, mut worst) = (0, 0.0f64);
    for (phi1, phi2) in feasible_p_nonzero(&mut r, 50) {
        let closed = joint_extension_pure(&phi1, &phi2, &tol).unwrap();
        let probe = uniqueness_probe(&closed, &[phi1.clone(), phi2.clone()], &ProbeParams::default()).unwrap();
        let mut all = probe.unique;
        for s in STARTS {
            let o = feasible_extension(&phi1, &phi2, &OracleParams::default().with_start(s)).unwrap();
            let dist = o.witness.map(|w| max_abs(w.matrix(), closed.matrix())).unwrap_or(f64::INFINITY);
            worst = worst.max(dist);
            all &= dist <= 1e-6;
        }
        if all {
            ok += 1;
        }
    }
    outcome(ok == 50, format!("{ok}/50 unique with matching witnesses, worst distance {worst:.2e}"))
}

fn criterion_6() -> Outcome {
    let tol = Tolerances::default();
    let phi1 = plus_state(1);
    let p = p_value(&phi1, &tol);
    let mixed = DensityState::maximally_mixed(&ms(&[2]));
    let first = decompose_even_state(&mixed, &tol).unwrap();
    let tildes = odd_decompositions(&mixed, &tol).unwrap();
    let targets = [phi1.clone(), mixed.clone()];
    let members: Vec<DensityState> = tildes
        .iter()
        .map(|t| joint_extension_family_p0(&phi1, t, &tol).unwrap())
        .collect();
    let routes_agree = tildes.iter().zip(&members).all(|(t, m)| {
        max_abs(joint_extension_family_p0_assembled(&phi1, t, &tol).unwrap().matrix(), m.matrix()) <= 1e-10
    });
    let verified = members
        .iter()
        .filter(|m| verify_extension(&m.to_operator(), &targets, &tol).unwrap().passes())
        .count();
    let mut distinct = true;
    for i in 0..members.len() {
        for j in 0..i {
            distinct &= max_abs(members[i].matrix(), members[j].matrix()) > 1e-6;
        }
    }
    let witness = product_extension(&targets, &tol).unwrap();
    let probe_mixed = uniqueness_probe(&witness, &targets, &ProbeParams::default()).unwrap();

    let vacuum = DensityState::vacuum(&ms(&[2]));
    let none = decompose_even_state(&vacuum, &tol).unwrap().is_none();
    let vtargets = [phi1.clone(), vacuum.clone()];
    let vwitness = product_extension(&vtargets, &tol).unwrap();
    let probe_vac = uniqueness_probe(&vwitness, &vtargets, &ProbeParams::default()).unwrap();

    let pass = p <= 1e-12
        && first.is_some()
        && members.len() >= 3
        && verified == members.len()
        && distinct
        && routes_agree
        && !probe_mixed.unique
        && none
        && probe_vac.unique;
    outcome(
        pass,
        format!(
            "p={p:.1e}; {verified}/{} family members verified, distinct={distinct}; mixed probe free directions {}; vacuum decomposition none={none}, unique={}",
            members.len(),
            probe_mixed.free_directions.len(),
            probe_vac.unique
        ),
    )
}

fn criterion_7() -> Outcome {
    let tol = Tolerances::default();
    let mut r = rng(7007);
    let mut ok = 0;
    for _ in 0..100 {
        let modes = ModeSet::new((1..=small(&mut r) as u32).collect()).unwrap();
        let kind = any_kind(&mut r);
        let s = state(&modes, kind, &mut r);
        let lam = lambda_theta(&s, &tol);
        let even = is_even(&s, &tol);
        if ((lam - 1.0).abs() <= 1e-8) == even && even == is_even_kind(kind) {
            ok += 1;
        }
    }
    let lam = lambda_theta(&coherence_state(1, &tol), &tol);
    let analytic = (lam - 1.0 / 3.0).abs() <= 1e-9;
    outcome(ok == 100 && analytic, format!("equivalence {ok}/100; analytic lambda {lam:.15}"))
}

fn criterion_8() -> Outcome {
    let tol = Tolerances::default();
    let mut r = rng(8008);
    let (mut ok, mut worst) = (0, 0.0f64);
    for i in 0..20 {
        let sizes = [small(&mut r), small(&mut r)];
        let parts = random_partition(&mut r, &sizes);
        let union = parts[0].union(&parts[1]).unwrap();
        let rho = state(&union, StateKind::FullRank { floor: 0.02 }, &mut r);
        let floor = rho.eigenvalues()[0];
        let share: f64 = r.random_range(0.1..1.0);
        let x = random_odd_selfadjoint(&parts[0], floor.sqrt() * share, 100 + i).unwrap();
        let y = random_odd_selfadjoint(&parts[1], floor.sqrt(), 200 + i).unwrap();
        let out = example1(&rho, &x, &y, &tol).unwrap();
        let marg = [restrict(&rho, &parts[0], &tol).unwrap(), restrict(&rho, &parts[1], &tol).unwrap()];
        let report = verify_extension(&out.to_operator(), &marg, &tol).unwrap();
        worst = worst.max(report.max_marginal_error);
        let moved = max_abs(out.matrix(), rho.matrix()) > 1e-6;
        if report.passes() && report.max_marginal_error <= 1e-10 && moved && !report.is_product {
            ok += 1;
        }
    }

    let free = kappa_free_parameters(2, 2);
    let basis = kappa_null_space(2, 2);
    let (lams, mus) = ([0.3, 0.7], [0.6, 0.4]);
    let (lo, hi) = kappa_parameter_interval(&lams, &mus, &basis[0]);
    let coeffs = |t: f64| DMatrix::from_fn(2, 2, |k, l| lams[k] * mus[l] + t * basis[0][(k, l)]);
    let vanishes = |t: f64| {
        let m = coeffs(t);
        m.iter().any(|v| v.abs() <= 1e-12) && m.iter().all(|v| *v >= -1e-12)
    };
    let (m1, m2) = (ms(&[1]), ms(&[2]));
    let phis: Vec<DensityState> = (0..2).map(|_| state(&m1, StateKind::EvenMixed, &mut r)).collect();
    let psis: Vec<DensityState> = (0..2).map(|_| state(&m2, StateKind::Mixed, &mut r)).collect();
    let comps: Vec<Vec<DensityState>> = phis
        .iter()
        .map(|p| psis.iter().map(|q| product_extension(&[p.clone(), q.clone()], &tol).unwrap()).collect())
        .collect();
    let mix = |w: &[f64; 2], s: &[DensityState]| {
        DensityState::new(s[0].modes().clone(), s[0].matrix() * c(w[0]) + s[1].matrix() * c(w[1]), &tol).unwrap()
    };
    let targets = [mix(&lams, &phis), mix(&mus, &psis)];
    let endpoint_ok = [lo, hi].iter().all(|&t| {
        let kappa: Vec<Vec<f64>> = (0..2).map(|k| (0..2).map(|l| t * basis[0][(k, l)]).collect()).collect();
        let chi = example_mixture(&comps, &lams, &mus, &kappa, &m1, &m2, &tol).unwrap();
        verify_extension(&chi.to_operator(), &targets, &tol).unwrap().passes()
    });
    let pass = ok == 20 && worst <= 1e-10 && free == 1 && vanishes(lo) && vanishes(hi) && endpoint_ok;
    outcome(
        pass,
        format!(
            "example 1: {ok}/20 non-product states, max marginal error {worst:.2e}; example 4: {free} free parameter, endpoints vanish={}, mixtures verified={endpoint_ok}",
            vanishes(lo) && vanishes(hi)
        ),
    )
}

fn criterion_9() -> Outcome {
    let tol = Tolerances::default();
    let mut r = rng(9009);
    let (mut ok, mut worst) = (0, 0.0f64);
    for (phi1, phi2) in feasible_p_nonzero(&mut r, 50) {
        let a = joint_extension_pure(&phi1, &phi2, &tol).unwrap();
        let b = joint_extension_pure_via_representation(&phi1, &phi2, &tol).unwrap();
        let d = max_abs(a.matrix(), b.matrix());
        worst = worst.max(d);
        if d <= 1e-10 {
            ok += 1;
        }
    }
    outcome(ok == 50, format!("{ok}/50 agree, worst difference {worst:.2e}"))
}

/// Name, check and time budget.
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() {
    let criteria: [Criterion; 9] = [
        ("CAR exactness", criterion_1, Duration::from_secs(1)),
        ("product extension biconditional", criterion_2, Duration::from_secs(30)),
        ("pure products and infeasibility", criterion_3, Duration::from_secs(300)),
        ("joint criterion against the oracle", criterion_4, Duration::from_secs(600)),
        ("uniqueness for p > 0", criterion_5, Duration::from_secs(600)),
        ("p = 0 family", criterion_6, Duration::from_secs(600)),
        ("lambda and evenness", criterion_7, Duration::from_secs(600)),
        ("worked examples", criterion_8, Duration::from_secs(600)),
        ("two constructions agree", criterion_9, Duration::from_secs(600)),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let pass = result.pass && elapsed <= *budget;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {} {:<36} {}  [{:.2}s] {}",
            i + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            result.detail
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
