//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

mod common;

use std::f64::consts::{E, PI};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use canontime::lyapunov::{lyapunov_curve_on, mf_from_distribution, sgn_from_distribution};
use canontime::oracle::{analytic_mf, analytic_time_density};
use canontime::uncertainty::ensemble_length;
use canontime::{
    build_pom, covariance_residual, mf_expectation, mf_matrix, pom_probability, time_density, EnergyState, Error,
    PomOptions, SpectrumSpec, TimeDistribution, TimeGrid,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

struct Entry {
    label: String,
    state: EnergyState,
    grid: TimeGrid,
    dist: TimeDistribution,
}

struct Corpus {
    entries: Vec<Entry>,
    oracle_seconds: f64,
}

impl Corpus {
    fn build() -> Self {
        let mut entries = Vec::new();
        let clock = Instant::now();
        let state = oracle_state();
        let grid = oracle_grid();
        let dist = time_density(&state, &grid).expect("oracle density");
        let oracle_seconds = clock.elapsed().as_secs_f64();
        entries.push(Entry { label: "oracle".into(), state, grid, dist });

        let state = box_with_nodes(2);
        let grid = box_grid();
        let dist = time_density(&state, &grid).expect("box density");
        entries.push(Entry { label: "box".into(), state, grid, dist });

        for (i, state) in random_corpus().into_iter().enumerate() {
            let grid = random_grid(&state);
            let dist = time_density(&state, &grid).expect("random density");
            entries.push(Entry { label: format!("random[{i}]"), state, grid, dist });
        }
        Self { entries, oracle_seconds }
    }

    fn oracle(&self) -> &Entry {
        &self.entries[0]
    }
}

type Criterion = (&'static str, fn(&Corpus) -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn spread(from: f64, to: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| from + (to - from) * k as f64 / (n - 1) as f64).collect()
}

fn free_particle(c: &Corpus) -> Outcome {
    let p = oracle_params();
    let dist = &c.oracle().dist;
    let mf_err = spread(-10.0, 10.0, 101)
        .into_iter()
        .map(|t| (mf_from_distribution(dist, t).value - analytic_mf(&p, t)).abs())
        .fold(0.0, f64::max);
    let density_err = dist
        .nodes()
        .iter()
        .zip(dist.density())
        .filter(|(t, _)| t.abs() <= 5.0)
        .map(|(t, v)| {
            let exact = analytic_time_density(&p, *t);
            (v - exact).abs() / exact
        })
        .fold(0.0, f64::max);
    outcome(
        mf_err <= 1e-3 && density_err <= 1e-3 && c.oracle_seconds < 30.0,
        format!("max |mf err| {mf_err:.2e}, max rel density err {density_err:.2e}, pipeline {:.1} s", c.oracle_seconds),
    )
}

fn sign_relation(c: &Corpus) -> Outcome {
    let mut worst: f64 = 0.0;
    for e in &c.entries {
        for t in spread(-10.0, 10.0, 201) {
            let mf = mf_from_distribution(&e.dist, t).value;
            let sgn = sgn_from_distribution(&e.dist, t);
            worst = worst.max((mf - 0.5 * (1.0 - sgn)).abs());
        }
    }
    outcome(worst <= 1e-9, format!("max residual {worst:.2e} over {} states", c.entries.len()))
}

fn covariance(c: &Corpus) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut label = String::from("all states");
    for e in &c.entries {
        for s in [0.1, 0.5, 1.0, 3.0] {
            match covariance_residual(&e.state, s, &e.grid) {
                Ok(r) if r > worst => {
                    worst = r;
                    label = e.label.clone();
                }
                Ok(_) => {}
                Err(err) => return outcome(false, format!("{}: {err}", e.label)),
            }
        }
    }
    outcome(worst <= 1e-8, format!("max residual {worst:.2e} ({label})"))
}

fn monotonicity(c: &Corpus) -> Outcome {
    let times = spread(-5.0, 5.0, 50);
    let mut min_dec = f64::INFINITY;
    for e in &c.entries {
        match lyapunov_curve_on(&e.dist, &times) {
            Ok(curve) if curve.is_strictly_decreasing() => min_dec = min_dec.min(curve.min_decrement()),
            Ok(curve) => return outcome(false, format!("{}: decrement {:.2e}", e.label, curve.min_decrement())),
            Err(err) => return outcome(false, format!("{}: {err}", e.label)),
        }
    }
    outcome(min_dec > 0.0, format!("smallest decrement {min_dec:.3e}"))
}

fn bounds(c: &Corpus) -> Outcome {
    let times = spread(-10.0, 10.0, 201);
    let (mut mf_lo, mut mf_hi, mut sgn_lo, mut sgn_hi) =
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for e in &c.entries {
        for &t in &times {
            let mf = mf_from_distribution(&e.dist, t).value;
            let sgn = sgn_from_distribution(&e.dist, t);
            mf_lo = mf_lo.min(mf);
            mf_hi = mf_hi.max(mf);
            sgn_lo = sgn_lo.min(sgn);
            sgn_hi = sgn_hi.max(sgn);
        }
    }
    let spectrum = Arc::new(SpectrumSpec::uniform(BOX_E_MAX, 256, 1).unwrap());
    let eig = mf_matrix(spectrum).unwrap().eigenvalues();
    let (eig_lo, eig_hi) = (eig[0], eig[eig.len() - 1]);
    let tol = 1e-9;
    let pass = mf_lo >= -tol
        && mf_hi <= 1.0 + tol
        && sgn_lo >= -1.0 - tol
        && sgn_hi <= 1.0 + tol
        && eig_lo >= -0.05
        && eig_hi <= 1.05;
    outcome(
        pass,
        format!("mf in [{mf_lo:.3e}, {mf_hi:.12}], sgn in [{sgn_lo:.12}, {sgn_hi:.12}], M_F eigenvalues in [{eig_lo:.4}, {eig_hi:.4}]"),
    )
}

fn route_cross_validation(_: &Corpus) -> Outcome {
    let t = 1.0;
    let grid = box_grid();
    let mut errors = Vec::new();
    for n in [256, 512] {
        let st = box_with_nodes(n);
        let cdf = match mf_expectation(&st, t, &grid) {
            Ok(v) => v,
            Err(err) => return outcome(false, format!("CDF route at {n} nodes: {err}")),
        };
        let matrix = mf_matrix(st.spectrum_arc().clone()).unwrap().expectation(&st.evolve(t)).unwrap();
        errors.push((cdf - matrix).abs());
    }
    outcome(
        errors[0] <= 1e-2 && errors[1] < errors[0],
        format!("|matrix − CDF| = {:.3e} at 256 nodes, {:.3e} at 512", errors[0], errors[1]),
    )
}

fn entropic_uncertainty(c: &Corpus) -> Outcome {
    let bound = PI * E;
    let mut min_ratio = f64::INFINITY;
    let mut box_lh = f64::NAN;
    for e in &c.entries {
        let lh = ensemble_length(&e.state.energy_density());
        let lt = ensemble_length(&e.dist.to_distribution());
        match (lh, lt) {
            (Ok(lh), Ok(lt)) => {
                min_ratio = min_ratio.min(lh * lt / bound);
                if e.label == "box" {
                    box_lh = lh;
                }
            }
            (Err(err), _) | (_, Err(err)) => return outcome(false, format!("{}: {err}", e.label)),
        }
    }
    let lh_err = (box_lh - BOX_E_MAX).abs();
    outcome(
        min_ratio >= 1.0 - 1e-3 && lh_err <= 1e-6,
        format!("min L_H·L_T/(πe) {min_ratio:.6}, box |L_H − E_max| {lh_err:.1e}"),
    )
}

fn pom_completeness(_: &Corpus) -> Outcome {
    let cases: [(&str, Vec<f64>, f64); 3] = [
        ("single level", vec![0.7], 1.0),
        ("E_k = k", (0..8).map(f64::from).collect(), 2.0 * PI),
        ("{0, 1, √2}", vec![0.0, 1.0, 2f64.sqrt()], 5.0),
    ];
    let options = PomOptions { completeness_tol: None, ..PomOptions::default() };
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, energies, tau) in cases {
        let s = Arc::new(SpectrumSpec::discrete(energies, 1).unwrap());
        match build_pom(s, tau, 4096, &options) {
            Ok(pom) => {
                let (c, p) = (pom.completeness_residual(), pom.idempotency_residual());
                pass &= c <= 1e-8 && p <= 1e-10;
                parts.push(format!("{name}: {c:.1e}/{p:.1e}"));
            }
            Err(err) => return outcome(false, format!("{name}: {err}")),
        }
    }
    outcome(pass, format!("completeness/idempotency {}", parts.join(", ")))
}

fn periodic_covariance(_: &Corpus) -> Outcome {
    let s = Arc::new(SpectrumSpec::discrete((0..8).map(f64::from).collect(), 1).unwrap());
    let pom = build_pom(s.clone(), 2.0 * PI, 4096, &PomOptions::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let amps = (0..8).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let st = EnergyState::from_unnormalized(s, amps).unwrap();
    let m = pom.len();
    let mut worst: f64 = 0.0;
    let base = pom_probability(&pom, &st).unwrap().density;
    for k in [1, 300, 2048, 4095] {
        let moved = pom_probability(&pom, &st.evolve(k as f64 * pom.dt())).unwrap().density;
        for i in 0..m {
            worst = worst.max((moved[i] - base[(i + m - k) % m]).abs());
        }
    }
    outcome(worst <= 1e-8, format!("max |p(t|ψ_s) − p(t − s|ψ)| {worst:.2e}"))
}

fn moment_guard(c: &Corpus) -> Outcome {
    let dist = &c.oracle().dist;
    let m2 = dist.moment(2);
    let m1 = dist.moment(1);
    let diverges = matches!(m2, Err(Error::MomentDivergence { order: 2, .. }));
    match m1 {
        Ok(m1) => outcome(diverges && m1.abs() <= 1e-6, format!("second moment {m2:?}, first moment {m1:.2e}")),
        Err(err) => outcome(false, format!("first moment: {err}")),
    }
}

fn main() -> ExitCode {
    let clock = Instant::now();
    let corpus = Corpus::build();
    println!("corpus: {} states in {:.1} s", corpus.entries.len(), clock.elapsed().as_secs_f64());
    let criteria: [Criterion; 10] = [
        ("free-particle reproduction", free_particle),
        ("sign relation", sign_relation),
        ("time covariance", covariance),
        ("strict monotonicity", monotonicity),
        ("bounds", bounds),
        ("route cross-validation", route_cross_validation),
        ("entropic uncertainty", entropic_uncertainty),
        ("POM completeness", pom_completeness),
        ("periodic covariance", periodic_covariance),
        ("moment-divergence guard", moment_guard),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let clock = Instant::now();
        let o = check(&corpus);
        if !o.pass {
            failures += 1;
        }
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {verdict} {name}: {} [{:.1} s]", i + 1, o.detail, clock.elapsed().as_secs_f64());
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
