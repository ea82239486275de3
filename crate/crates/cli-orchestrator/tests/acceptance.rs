//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::ExitCode;
use std::time::Instant;

use cap_spectrum::*;
use cli_orchestrator::run::{outgoing_orbit, random_upper_half_plane};
use escape_function::*;
use hamiltonian_dynamics::models::{ReducedKerr, RescaledKerrModel, ToyBarrier};
use hamiltonian_dynamics::{integrate_flow, HamiltonianModel};
use kerr_geometry::KerrParams;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use trapping_certifier::*;

const SQRT27: f64 = 5.196152422706632;
const HS_ESCAPE: [f64; 3] = [1e-2, 1e-3, 1e-4];
const HS_SPECTRUM: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];

type Verdict = Result<String, String>;

fn verdict(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn schw() -> KerrParams {
    KerrParams::schwarzschild(1.0)
}

fn c1_trapped_radius() -> Verdict {
    let mut worst: f64 = 0.0;
    for beta in [-8.0, -SQRT27, -1.0, 0.5, 2.0, SQRT27, 10.0] {
        let r = trapped_radius(beta, &schw()).map_err(|e| e.to_string())?;
        worst = worst.max((r - 3.0).abs());
    }
    verdict(worst <= 1e-10, format!("max |r(beta) - 3| = {worst:.3e} over 7 beta"))
}

fn c2_linearization() -> Verdict {
    let target = [[0.0, 3.0], [9.0, 0.0]];
    let mu = 6.0 * 3f64.sqrt();
    let (mut dm, mut de, mut fd): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for beta in [-SQRT27, 0.5, SQRT27] {
        let c = linearization(beta, &schw()).map_err(|e| e.to_string())?;
        for i in 0..2 {
            for j in 0..2 {
                dm = dm.max((c.lin_matrix[i][j] - target[i][j]).abs());
            }
        }
        de = de.max((c.normal_exponent - mu).abs());
        fd = fd.max(c.fd_agreement);
    }
    verdict(
        dm <= 1e-8 && de <= 1e-8,
        format!("matrix error {dm:.3e}, exponent error {de:.3e}, analytic vs finite-difference {fd:.3e}"),
    )
}

fn c3_conservation() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut drift, mut det): (f64, f64) = (0.0, 0.0);
    for i in 0..20 {
        let k = KerrParams::new(1.0, [0.0, 0.1, 0.2][i % 3]).map_err(|e| e.to_string())?;
        let start = outgoing_orbit(&k, &mut rng);
        let r = integrate_flow(&RescaledKerrModel::new(k), &start, 100.0, 1e-10).map_err(|e| e.to_string())?;
        drift = r.drift.iter().copied().fold(drift, f64::max);
        det = det.max((r.jacobian.determinant() - 1.0).abs());
    }
    verdict(drift < 1e-9 && det < 1e-6, format!("20 orbits: max drift {drift:.3e}, max |det - 1| {det:.3e}"))
}

fn c4_certificate() -> Verdict {
    let mut parts = Vec::new();
    let mut ok = true;
    for a in [0.0, 0.1] {
        let k = KerrParams::new(1.0, a).map_err(|e| e.to_string())?;
        let c = certify(0.0, &k, 50.0, 9, 4).map_err(|e| e.to_string())?;
        let slope = c.orbits.iter().map(|o| o.tangential_slope).fold(0.0, f64::max);
        let rate = c
            .orbits
            .iter()
            .zip(&c.beta_samples)
            .map(|(o, s)| o.stable_rate.min(o.unstable_rate) / s.normal_exponent)
            .fold(f64::INFINITY, f64::min);
        ok &= c.passed && c.largest_r_passing >= 4;
        let mut part = format!("a={a}: passed={} rate/exponent>={rate:.4} slope<={slope:.3} r<={}", c.passed, c.largest_r_passing);
        if !c.reasons.is_empty() {
            part.push_str(&format!(" ({})", c.reasons.join("; ")));
        }
        parts.push(part);
    }
    verdict(ok, parts.join(", "))
}

fn c5_critical_points() -> Verdict {
    let cps = beta_critical_points(0.0, &schw()).map_err(|e| e.to_string())?;
    if cps.len() != 2 {
        return Err(format!("{} critical points", cps.len()));
    }
    let mut err: f64 = 0.0;
    for (cp, sign) in cps.iter().zip([-1.0, 1.0]) {
        err = err.max((cp.beta - sign * SQRT27).abs());
        err = err.max((cp.hessian[0][0] + sign / SQRT27).abs());
        err = err.max((cp.hessian[1][1] + sign * SQRT27).abs());
    }
    verdict(err <= 1e-6, format!("beta = {:.9}, {:.9}, max error {err:.3e}", cps[0].beta, cps[1].beta))
}

fn newton_continuation(radial: &PerturbedRadial, beta: f64, steps: usize) -> (f64, f64) {
    let (mut r, mut xi) = (3.0, 0.0);
    for s in 1..=steps {
        let stage = PerturbedRadial { epsilon: radial.epsilon * s as f64 / steps as f64, ..radial.clone() };
        let red = ReducedRadial { radial: &stage, beta };
        for _ in 0..40 {
            let (mut g, mut h) = ([0.0; 2], [0.0; 4]);
            red.gradient(&[r, xi], &mut g);
            red.hessian(&[r, xi], &mut h);
            let det = h[0] * h[3] - h[1] * h[2];
            r -= (h[3] * g[0] - h[1] * g[1]) / det;
            xi -= (-h[2] * g[0] + h[0] * g[1]) / det;
        }
    }
    (r, xi)
}

fn c6_structural_stability() -> Verdict {
    let eps = 0.01;
    let mut ok = true;
    let mut parts = Vec::new();
    for seed in [1, 2] {
        let rep = perturb_and_recertify_with(&schw(), 0.0, eps, seed, &CertifyOptions::default()).map_err(|e| e.to_string())?;
        let radial = PerturbedRadial { base: KerrRadial { params: schw() }, epsilon: eps, pattern: BumpPattern::seeded(seed, 1.0) };
        let oracle = rep
            .certificate
            .beta_samples
            .iter()
            .map(|s| {
                let (r, xi) = newton_continuation(&radial, s.beta, 8);
                (r - s.trapped_radius).abs().max((xi - s.trapped_xi).abs())
            })
            .fold(0.0, f64::max);
        ok &= rep.certificate.passed && rep.displacement <= 5.0 * eps && rep.exponent_shift <= 0.05 && oracle < 1e-9;
        parts.push(format!(
            "seed {seed}: passed={} displacement {:.3e} shift {:.3e} continuation gap {oracle:.1e}",
            rep.certificate.passed, rep.displacement, rep.exponent_shift
        ));
    }
    verdict(ok, parts.join(", "))
}

fn toy_pair() -> Result<DefiningPair<ToyBarrier>, String> {
    build_defining_pair(ToyBarrier, SaddlePoint { x: 0.0, xi: 0.0 }).map_err(|e| e.to_string())
}

fn kerr_pair() -> Result<DefiningPair<ReducedKerr>, String> {
    let chart = linearization(SQRT27, &schw()).map_err(|e| e.to_string())?;
    build_defining_pair(ReducedKerr::new(schw(), SQRT27), &chart).map_err(|e| e.to_string())
}

fn c7_defining_functions() -> Verdict {
    let toy = toy_pair()?;
    let pts = disc_grid(&toy, 0.5, 21);
    let exact = pts.iter().all(|&(x, xi)| toy.c_squared(0, x, xi) == 2.0 && toy.c_squared(1, x, xi) == 2.0 && toy.bracket(x, xi) == 2.0);
    let kerr = kerr_pair()?;
    let rep = verify_defg_relations(&kerr, &disc_grid(&kerr, 0.05, 41), 1e-12);
    let floor = 0.9 * 2.0 * 3f64.sqrt();
    verdict(
        exact && rep.violations == 0 && rep.min_bracket >= floor,
        format!(
            "toy c^2 = {{phi+,phi-}} = 2 exactly: {exact}; kerr a=0: {} violations, min bracket {:.4} (need {floor:.4})",
            rep.violations, rep.min_bracket
        ),
    )
}

fn commutator_sweep<M: HamiltonianModel>(p: &DefiningPair<M>) -> Result<(Vec<f64>, f64, f64), String> {
    let (g1, _) = build_g1(p, 0.1, 0.2, 0.02, 201).map_err(|e| e.to_string())?;
    let grid = disc_grid(p, 0.3, 61);
    let s = p.saddle;
    let expect = p.c(0, s.x, s.xi) * p.c(1, s.x, s.xi) * p.c0;
    let mut worst: f64 = 0.0;
    let mut bounds = Vec::new();
    for h in HS_ESCAPE {
        let spec = EscapeSpec::new(h, g1);
        let ef = build_escape(spec, p).map_err(|e| e.to_string())?;
        worst = worst.max((ef.phi_tilde(s.x, s.xi) - expect).abs());
        bounds.push(commutator_lower_bound(&spec, p, &grid).map_err(|e| e.to_string())?);
    }
    Ok((bounds, worst, expect))
}

fn c8_commutator() -> Verdict {
    let (toy, toy_err, toy_saddle) = commutator_sweep(&toy_pair()?)?;
    let (kerr, kerr_err, kerr_saddle) = commutator_sweep(&kerr_pair()?)?;
    let stable = |v: &[f64]| {
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().all(|x| *x > 0.0 && (x - mean).abs() <= 0.1 * mean)
    };
    verdict(
        stable(&toy) && stable(&kerr) && toy_err <= 1e-10 && kerr_err <= 1e-10 * kerr_saddle && (toy_saddle - 4.0).abs() <= 1e-10,
        format!("toy c1 {toy:.4?} (saddle {toy_saddle:.12}, error {toy_err:.1e}); kerr c1 {kerr:.4?} (saddle {kerr_saddle:.6}, error {kerr_err:.1e})"),
    )
}

fn order_sweep<M: HamiltonianModel>(p: &DefiningPair<M>) -> Result<(f64, u32, f64), String> {
    let (g1, _) = build_g1(p, 0.1, 0.2, 0.02, 201).map_err(|e| e.to_string())?;
    let samples = sample_pairs(p, 0.1, 10_000, 11);
    let tables: Vec<OrderTable> = HS_ESCAPE
        .iter()
        .map(|&h| build_escape(EscapeSpec::new(h, g1), p).map(|ef| order_function_check(&ef, &samples)))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let (c, n) = order_function_sweep(&tables).map_err(|e| e.to_string())?;
    let logs: Vec<f64> = tables.iter().map(|t| t.log_c[n as usize]).collect();
    let spread = (logs.iter().copied().fold(f64::NEG_INFINITY, f64::max) - logs.iter().copied().fold(f64::INFINITY, f64::min)).exp();
    Ok((c, n, spread))
}

fn c9_order_function() -> Verdict {
    let (tc, tn, ts) = order_sweep(&toy_pair()?)?;
    let (kc, kn, ks) = order_sweep(&kerr_pair()?)?;
    verdict(
        tn <= 4 && kn <= 4 && ts < 2.0 && ks < 2.0,
        format!("toy N={tn} C={tc:.3} spread {ts:.3}x; kerr N={kn} C={kc:.3} spread {ks:.3}x"),
    )
}

fn sweeps() -> Result<Vec<GapSweep>, String> {
    [ModelKind::ToySech2, ModelKind::SchwRadial]
        .into_iter()
        .map(|kind| gap_sweep(kind, &ModelParams::default(), &HS_SPECTRUM, &GapOptions::default(), 0.15).map_err(|e| e.to_string()))
        .collect()
}

fn c10_gap(sweeps: &[GapSweep]) -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for (s, oracle) in sweeps.iter().zip([1.0, 2.0 * 3f64.sqrt() / 18.0]) {
        let positive = s.rows.iter().all(|r| r.gap > 0.0);
        let agree = (s.nu_ratio - 1.0).abs() <= 0.15;
        let soft = s.rows.iter().map(|r| (r.nu / oracle - 1.0).abs()).fold(0.0, f64::max);
        ok &= positive && agree;
        let nus: Vec<String> = s.rows.iter().map(|r| format!("{:.5}", r.nu)).collect();
        parts.push(format!(
            "{}: nu [{}], ratio {:.5}, oracle deviation {:.2}% ({})",
            s.kind.name(),
            nus.join(", "),
            s.nu_ratio,
            100.0 * soft,
            if soft <= 0.1 { "within 10%" } else { "outside 10%" }
        ));
    }
    verdict(ok, parts.join("; "))
}

fn c11_real_axis(sweeps: &[GapSweep]) -> Verdict {
    let ok = sweeps.iter().all(|s| s.resolvent_ratio <= 3.0);
    let parts: Vec<String> = sweeps.iter().map(|s| format!("{}: max/min {:.4}", s.kind.name(), s.resolvent_ratio)).collect();
    verdict(ok, parts.join("; "))
}

fn c12_upper_half_plane() -> Verdict {
    let zs = random_upper_half_plane(50, 12);
    let mut worst: f64 = 0.0;
    for (kind, h) in [(ModelKind::ToySech2, 0.05), (ModelKind::SchwRadial, 0.1)] {
        let a = discretize(&build_default(kind, &ModelParams::default(), h).map_err(|e| e.to_string())?);
        for &z in &zs {
            let n = resolvent_norm(&a, z).map_err(|e| e.to_string())?;
            worst = worst.max(n * z.im);
        }
    }
    verdict(worst <= 1.0 + 10.0 * f64::EPSILON, format!("50 z on toy and schw: max norm * Im z = {worst:.15}"))
}

fn c13_conformal() -> Verdict {
    let mu_eff = saddle_exponent(ModelKind::SchwRadial, &ModelParams::default()).map_err(|e| e.to_string())?.mu_eff;
    let lin = linearization(SQRT27, &schw()).map_err(|e| e.to_string())?;
    let r = lin.trapped_radius;
    let predicted = schw().delta(r) / r.powi(4) * lin.normal_exponent;
    let exact = 2.0 * 3f64.sqrt() / 9.0;
    let err = (mu_eff - predicted).abs().max((mu_eff - exact).abs());
    verdict(err <= 1e-8, format!("mu_eff {mu_eff:.12} vs (Delta/r^4)*exponent {predicted:.12}, error {err:.2e}"))
}

fn c14_semigroup() -> Verdict {
    let h = 0.1;
    let prob = build_default(ModelKind::ToySech2, &ModelParams::default(), h).map_err(|e| e.to_string())?;
    let a = discretize(&prob);
    let mode = slowest_mode(&a, &EigenOptions::for_h(h)).map_err(|e| e.to_string())?.ok_or("no slowest mode")?;
    let rate = -mode.z.im / h;
    let v = mode.vector.as_ref().ok_or("no eigenvector")?;
    let fit = semigroup_decay(&a, h, v, 5.0, &DecayOptions::default()).map_err(|e| e.to_string())?;
    let rel = (fit.alpha / rate - 1.0).abs();

    let h2 = 0.05;
    let prob2 = build_default(ModelKind::ToySech2, &ModelParams::default(), h2).map_err(|e| e.to_string())?;
    let a2 = discretize(&prob2);
    let nu = spectral_gap(&prob2, &GapOptions { axis: vec![], ..GapOptions::default() }).map_err(|e| e.to_string())?.nu;
    let u0: Vec<C64> = gaussian_at_barrier(&prob2);
    let g = semigroup_decay(&a2, h2, &u0, 10.0, &DecayOptions::default()).map_err(|e| e.to_string())?;
    let factor = g.alpha / nu;
    verdict(
        rel <= 0.02 && (0.5..=2.0).contains(&factor),
        format!("eigenvector alpha {:.5} vs gap/h {rate:.5} ({:.3}%); gaussian alpha/nu {factor:.3}", fit.alpha, 100.0 * rel),
    )
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |n: usize, name: &str, clock: Instant, v: Verdict| {
        let secs = clock.elapsed().as_secs_f64();
        match v {
            Ok(d) => println!("criterion {n} PASS: {name}: {d} [{secs:.1} s]"),
            Err(d) => {
                failed += 1;
                println!("criterion {n} FAIL: {name}: {d} [{secs:.1} s]");
            }
        }
    };
    let simple: [(&str, fn() -> Verdict); 9] = [
        ("Schwarzschild trapped radius", c1_trapped_radius),
        ("Schwarzschild linearization", c2_linearization),
        ("conservation on random Kerr orbits", c3_conservation),
        ("normal hyperbolicity certificate", c4_certificate),
        ("degenerate tori", c5_critical_points),
        ("structural stability", c6_structural_stability),
        ("defining-function relations", c7_defining_functions),
        ("commutator lower bound", c8_commutator),
        ("order function", c9_order_function),
    ];
    for (i, (name, f)) in simple.into_iter().enumerate() {
        let clock = Instant::now();
        report(i + 1, name, clock, f());
    }
    let clock = Instant::now();
    match sweeps() {
        Ok(s) => {
            report(10, "spectral gap strip", clock, c10_gap(&s));
            report(11, "real-axis resolvent", Instant::now(), c11_real_axis(&s));
        }
        Err(e) => {
            report(10, "spectral gap strip", clock, Err(e.clone()));
            report(11, "real-axis resolvent", Instant::now(), Err(e));
        }
    }
    let clock = Instant::now();
    report(12, "upper half-plane resolvent", clock, c12_upper_half_plane());
    let clock = Instant::now();
    report(13, "conformal consistency", clock, c13_conformal());
    let clock = Instant::now();
    report(14, "semigroup decay", clock, c14_semigroup());
    println!("acceptance: {} of 14 criteria passed", 14 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
