//! Printed walkthroughs of the four extension constructions.

use std::fmt::Write as _;

use anyhow::{bail, Result};
use car_extend::extend::{
    example1, example3_kappa_bounds, example_mixture, kappa_free_parameters, kappa_null_space,
    kappa_parameter_interval, product_extension, random_odd_selfadjoint, verify_extension,
};
use car_extend::states::{random_state, restrict, StateKind, Tolerances};
use car_extend::{DensityState, ModeSet, C64};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Text of the walkthrough and whether every check in it passed.
pub struct Demo {
    pub text: String,
    pub ok: bool,
}

fn ms(v: &[u32]) -> ModeSet {
    ModeSet::new(v.to_vec()).expect("literal mode set")
}

pub fn run(example: u8, seed: u64, trials: usize, m: usize, n: usize, tol: &Tolerances) -> Result<Demo> {
    match example {
        1 => demo1(seed, trials, tol),
        2 => demo_mixture(seed, tol, None),
        3 => demo3(seed, tol),
        4 => demo4(seed, m, n, tol),
        _ => bail!("examples are numbered 1 to 4"),
    }
}

fn demo1(seed: u64, trials: usize, tol: &Tolerances) -> Result<Demo> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (m1, m2) = (ms(&[1]), ms(&[2, 3]));
    let union = m1.union(&m2)?;
    let mut text = String::new();
    writeln!(text, "Demo 1: rho' = rho + i x y on modes {m1} and {m2}")?;
    let mut worst = 0.0f64;
    let mut ok = true;
    for t in 0..trials {
        let rho = random_state(&union, StateKind::FullRank { floor: 0.02 }, rng.random())?;
        let lambda = rho.eigenvalues()[0];
        let share: f64 = rng.random_range(0.1..1.0);
        let x = random_odd_selfadjoint(&m1, lambda.sqrt() * share, rng.random())?;
        let y = random_odd_selfadjoint(&m2, lambda.sqrt(), rng.random())?;
        let out = example1(&rho, &x, &y, tol)?;
        let marg = [restrict(&rho, &m1, tol)?, restrict(&rho, &m2, tol)?];
        let report = verify_extension(&out.to_operator(), &marg, tol)?;
        worst = worst.max(report.max_marginal_error);
        let trial_ok = report.passes() && report.max_marginal_error <= 1e-10 && !report.is_product;
        ok &= trial_ok;
        writeln!(
            text,
            "  trial {t:>2}: lambda = {lambda:.6e}  |x||y| = {:.6e}  marginal errors = {:.2e}, {:.2e}  min eig = {:.3e}  product = {}",
            x.op_norm() * y.op_norm(),
            report.marginal_errors[0],
            report.marginal_errors[1],
            report.min_eigenvalue,
            report.is_product
        )?;
    }
    writeln!(text, "max marginal error: {worst:.3e}")?;
    writeln!(text, "all trials non-product with exact marginals: {}", yes(ok))?;
    Ok(Demo { text, ok })
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

struct MixtureSetup {
    phis: Vec<DensityState>,
    psis: Vec<DensityState>,
    comps: Vec<Vec<DensityState>>,
    lambdas: Vec<f64>,
    mus: Vec<f64>,
}

fn weights(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.2..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|v| v / s).collect()
}

/// Even states on mode 1 and arbitrary states on mode 2, joined by product
/// extensions.
fn mixture_setup(rng: &mut ChaCha8Rng, m: usize, n: usize, tol: &Tolerances) -> Result<MixtureSetup> {
    let (m1, m2) = (ms(&[1]), ms(&[2]));
    let phis: Vec<DensityState> = (0..m)
        .map(|_| random_state(&m1, StateKind::EvenMixed, rng.random()))
        .collect::<Result<_, _>>()?;
    let psis: Vec<DensityState> = (0..n)
        .map(|_| random_state(&m2, StateKind::Mixed, rng.random()))
        .collect::<Result<_, _>>()?;
    let comps = phis
        .iter()
        .map(|p| psis.iter().map(|q| product_extension(&[p.clone(), q.clone()], tol)).collect())
        .collect::<Result<_, _>>()?;
    Ok(MixtureSetup {
        lambdas: weights(rng, m),
        mus: weights(rng, n),
        phis,
        psis,
        comps,
    })
}

fn mix(states: &[DensityState], w: &[f64], tol: &Tolerances) -> Result<DensityState> {
    let d = states[0].modes().dim();
    let mut acc = DMatrix::<C64>::zeros(d, d);
    for (s, wi) in states.iter().zip(w) {
        acc += s.matrix() * C64::new(*wi, 0.0);
    }
    Ok(DensityState::new(states[0].modes().clone(), acc, tol)?)
}

/// Builds and verifies the mixture for `kappa`; returns the report line and
/// whether it passed.
fn check_mixture(setup: &MixtureSetup, kappa: &[Vec<f64>], tol: &Tolerances) -> Result<(String, bool)> {
    let chi = example_mixture(&setup.comps, &setup.lambdas, &setup.mus, kappa, &ms(&[1]), &ms(&[2]), tol)?;
    let targets = [mix(&setup.phis, &setup.lambdas, tol)?, mix(&setup.psis, &setup.mus, tol)?];
    let report = verify_extension(&chi.to_operator(), &targets, tol)?;
    let line = format!(
        "marginal error {:.2e}, min eig {:.3e}, verified {}",
        report.max_marginal_error,
        report.min_eigenvalue,
        yes(report.passes())
    );
    Ok((line, report.passes()))
}

fn coefficient_lines(text: &mut String, setup: &MixtureSetup, kappa: &[Vec<f64>]) -> Result<()> {
    for (k, lk) in setup.lambdas.iter().enumerate() {
        let row: Vec<String> = setup
            .mus
            .iter()
            .enumerate()
            .map(|(l, ml)| format!("{:.6}", lk * ml + kappa[k][l]))
            .collect();
        writeln!(text, "    [{}]", row.join(", "))?;
    }
    Ok(())
}

fn demo_mixture(seed: u64, tol: &Tolerances, kappa: Option<Vec<Vec<f64>>>) -> Result<Demo> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let setup = mixture_setup(&mut rng, 2, 2, tol)?;
    let kappa = kappa.unwrap_or_else(|| vec![vec![0.0; 2]; 2]);
    let mut text = String::new();
    writeln!(text, "Demo 2: kappa = 0 mixture of product extensions")?;
    writeln!(text, "  lambda = {:?}, mu = {:?}", setup.lambdas, setup.mus)?;
    writeln!(text, "  coefficients lambda_k mu_l:")?;
    coefficient_lines(&mut text, &setup, &kappa)?;
    let (line, ok) = check_mixture(&setup, &kappa, tol)?;
    writeln!(text, "  mixture: {line}")?;
    Ok(Demo { text, ok })
}

fn demo3(seed: u64, tol: &Tolerances) -> Result<Demo> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let setup = mixture_setup(&mut rng, 2, 2, tol)?;
    let (lam, mu) = (setup.lambdas[0], setup.mus[0]);
    let (lo, hi) = example3_kappa_bounds(lam, mu);
    let mut text = String::new();
    writeln!(text, "Demo 3: two-by-two mixtures with lambda = {lam:.6}, mu = {mu:.6}")?;
    writeln!(text, "  admissible kappa in [{lo:.6}, {hi:.6}]")?;
    let mut ok = true;
    for (name, k) in [("lower end", lo), ("midpoint", 0.5 * (lo + hi)), ("upper end", hi)] {
        let kappa = vec![vec![k, -k], vec![-k, k]];
        writeln!(text, "  {name}: kappa = {k:.6}, coefficients")?;
        coefficient_lines(&mut text, &setup, &kappa)?;
        let (line, passed) = check_mixture(&setup, &kappa, tol)?;
        ok &= passed;
        writeln!(text, "    {line}")?;
    }
    Ok(Demo { text, ok })
}

fn demo4(seed: u64, m: usize, n: usize, tol: &Tolerances) -> Result<Demo> {
    if m < 1 || n < 1 || m * n > 64 {
        bail!("m and n must be positive with m * n <= 64");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let setup = mixture_setup(&mut rng, m, n, tol)?;
    let free = kappa_free_parameters(m, n);
    let expected = (m - 1) * (n - 1);
    let mut text = String::new();
    writeln!(text, "Demo 4: mixtures of {m} and {n} states")?;
    writeln!(text, "free parameters: {free} (expected (m-1)(n-1) = {expected})")?;
    let mut ok = free == expected;
    if let Some(direction) = kappa_null_space(m, n).into_iter().next() {
        let (lo, hi) = kappa_parameter_interval(&setup.lambdas, &setup.mus, &direction);
        writeln!(text, "  along the first free direction, t in [{lo:.6}, {hi:.6}]")?;
        for (name, t) in [("lower end", lo), ("upper end", hi)] {
            let kappa: Vec<Vec<f64>> = (0..m).map(|k| (0..n).map(|l| t * direction[(k, l)]).collect()).collect();
            let vanishing = (0..m)
                .flat_map(|k| (0..n).map(move |l| (k, l)))
                .filter(|&(k, l)| (setup.lambdas[k] * setup.mus[l] + kappa[k][l]).abs() <= 1e-12)
                .map(|(k, l)| format!("({},{})", k + 1, l + 1))
                .collect::<Vec<_>>();
            let (line, passed) = check_mixture(&setup, &kappa, tol)?;
            ok &= passed && !vanishing.is_empty();
            writeln!(text, "  {name}: t = {t:.6}, vanishing coefficients {}; {line}", vanishing.join(" "))?;
        }
    }
    Ok(Demo { text, ok })
}
