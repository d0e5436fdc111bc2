//! Acceptance criteria, one line per criterion. Exits non-zero if any fails.

use std::process::ExitCode;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lcladder::fixedpoint::{
    basin_verification, check_contraction, iterate_map, quadratic_counterexample, tangent_fixed_points, AnalyticMap,
    Region,
};
use lcladder::ladder::{converge, fixed_points, iterate_p, resistive_ladder, verify_contraction_law, ResistiveLimit};
use lcladder::lowpass::{limit_extrapolation, limit_impedance, regime_analysis, z_plus, LowPassConfig};
use lcladder::propagation::{group_velocity, plan_gaussian, propagate_packet};
use lcladder::ComplexValue;

fn c(re: f64, im: f64) -> ComplexValue {
    ComplexValue::new(re, im)
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

const LOSSES: [f64; 3] = [1e-3, 1e-4, 1e-5];

fn geometric_convergence_law() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut traces, mut poles, mut worst) = (0, 0, 0.0f64);
    let mut monotone = true;
    while traces < 1000 {
        let t = c(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
        if t.norm() > 10.0 || (t.re <= -0.25 && t.im.abs() < 1e-3) {
            continue;
        }
        let p1 = c(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
        let fp = fixed_points(t).unwrap();
        let tr = iterate_p(t, p1, 50).unwrap();
        if tr.pole_at.is_some() {
            poles += 1;
            continue;
        }
        let rep = verify_contraction_law(&tr, &fp);
        worst = worst.max(rep.max_relative_deviation);
        for w in tr.entries.windows(2) {
            if let (Some(a), Some(b)) = (w[0].c, w[1].c) {
                // below 1e-8 c_n is rounding noise in p_n - p+
                if a.norm() > 1e-8 && b.norm() >= a.norm() {
                    monotone = false;
                }
            }
        }
        traces += 1;
    }
    outcome(
        worst <= 1e-10 && monotone,
        format!("{traces} traces, max |c_(n+1) - γ²c_n| rel {worst:.2e} (≤ 1e-10), |c_n| decreasing: {monotone}, pole traces skipped: {poles}"),
    )
}

fn passband_limit() -> Outcome {
    let base = LowPassConfig::lossless(1.0, 1.0, 1.0).unwrap();
    let ex = limit_extrapolation(&base, &LOSSES).unwrap();
    let target = c(3f64.sqrt() / 2.0, 0.5);
    let err = (ex.limit - target).norm();
    outcome(
        err <= 1e-6 && (0.8..=1.2).contains(&ex.observed_order),
        format!("z+ = {:.9}, |z+ - (√3+i)/2| = {err:.2e} (≤ 1e-6), order {:.4}", ex.limit, ex.observed_order),
    )
}

fn stopband_limit() -> Outcome {
    let base = LowPassConfig::lossless(1.0, 1.0, 4.0).unwrap();
    let ex = limit_extrapolation(&base, &LOSSES).unwrap();
    let target = c(0.0, 2.0 * (1.0 + 3f64.sqrt() / 2.0));
    let err = (ex.limit - target).norm();
    let ratios: Vec<f64> = LOSSES
        .iter()
        .map(|&s| z_plus(&base.with_losses(s, s).unwrap()).unwrap().re / s)
        .collect();
    let positive = ratios.iter().all(|&r| r > 0.0);
    let (lo, hi) = ratios.iter().fold((f64::MAX, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    outcome(
        err <= 1e-6 && positive && hi / lo < 1.1,
        format!("z+ = {:.9}, error {err:.2e} (≤ 1e-6), Re z+(s)/s in [{lo:.4}, {hi:.4}]", ex.limit),
    )
}

fn paradox_dichotomy() -> Outcome {
    let wc = 2.0;
    let below_ok = (1..=20).all(|k| {
        let omega = wc * k as f64 / 21.0;
        limit_impedance(&LowPassConfig::lossless(1.0, 1.0, omega).unwrap()).re > 0.0
    });
    let mut worst_above = 0.0f64;
    for k in 1..=20 {
        let omega = wc + 2.0 * wc * k as f64 / 21.0;
        let cfg = LowPassConfig::lossless(1.0, 1.0, omega).unwrap();
        worst_above = worst_above
            .max(limit_impedance(&cfg).re.abs())
            .max(regime_analysis(&cfg).unwrap().z_plus.re.abs());
    }
    outcome(
        below_ok && worst_above <= 1e-12,
        format!("Re z+ > 0 at 20 passband points: {below_ok}; max |Re z+| at 20 stopband points {worst_above:.1e} (≤ 1e-12)"),
    )
}

fn stability_dichotomy() -> Outcome {
    let t = c(2.0, 0.0);
    let fp = fixed_points(t).unwrap();
    let stay = iterate_p(t, fp.p_minus, 10_000).unwrap();
    let fixed = stay.len() == 10_000 && stay.entries.iter().all(|e| e.p == fp.p_minus);
    let r = converge(t, fp.p_minus + 1e-8, 1e-12, 100_000).unwrap();
    let err = (r.limit - fp.p_plus).norm();
    outcome(
        fixed && err <= 1e-10,
        format!("p- fixed for 10^4 steps: {fixed}; p- + 1e-8 -> {:.12} in {} steps, |p - p+| = {err:.1e} (≤ 1e-10)", r.limit, r.iterations),
    )
}

fn group_delay_oracle() -> Outcome {
    let filter = LowPassConfig::lossless(1.0, 1.0, 1.0).unwrap();
    let wc = filter.omega_c();
    let mut worst = 0.0f64;
    for k in 0..=170 {
        let omega = (0.1 + 0.005 * k as f64) * wc;
        let num = group_velocity(&filter, omega).unwrap().seconds_per_section;
        let oracle = 2.0 / (wc * wc - omega * omega).sqrt();
        worst = worst.max((num - oracle).abs() / oracle);
    }
    outcome(worst <= 1e-6, format!("171 points on [0.1, 0.95]·ω_c, max rel error {worst:.2e} (≤ 1e-6)"))
}

fn wave_packet_transport() -> Outcome {
    let filter = LowPassConfig::lossless(1.0, 1.0, 1.0).unwrap();
    let sections = [5usize, 10, 20];
    let plan = plan_gaussian(&filter, 1.0, 20.0, &sections).unwrap();
    let traces = propagate_packet(&plan.config, &filter).unwrap();
    let per_section = 1.154701;
    let mut worst = 0.0f64;
    for tr in &traces {
        let expected = tr.section as f64 * per_section;
        worst = worst.max((tr.peak_time - plan.t_c - expected).abs() / expected);
    }
    let xs: Vec<f64> = traces.iter().map(|t| t.section as f64).collect();
    let ys: Vec<f64> = traces.iter().map(|t| t.peak_time).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 3.0, ys.iter().sum::<f64>() / 3.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let slope_err = (slope - per_section).abs() / per_section;
    outcome(
        worst < 0.05 && slope_err < 0.02,
        format!("arrival error max {:.3}% (< 5%), slope {slope:.6} s/section, error {:.3}% (< 2%)", 100.0 * worst, 100.0 * slope_err),
    )
}

fn contraction_counterexample() -> Outcome {
    let rep = quadratic_counterexample(0.0, 10_000).unwrap();
    let scan = check_contraction(&AnalyticMap::Quadratic, &Region::Interval { lo: 0.0, hi: 0.5 }, 10_000, 8).unwrap();
    let dev = (rep.scaled_error - 1.0).abs();
    outcome(
        dev < 0.01 && scan.empirical_q > 0.999,
        format!("n·e_n at n = 10^4: {:.6} (|·-1| < 0.01); max Lipschitz ratio on [0, 1/2] {:.6} (> 0.999)", rep.scaled_error, scan.empirical_q),
    )
}

fn tan_repellers() -> Outcome {
    // mpmath findroot on sin x - x cos x, 50 digits
    let oracle = [4.493409457909064175, 7.725251836937707164, 10.904121659428899827];
    let roots = tangent_fixed_points(4).unwrap();
    let worst = roots[1..].iter().zip(oracle).map(|(r, o)| (r.zeta - o).abs()).fold(0.0, f64::max);
    let derivs = roots[1..].iter().all(|r| r.derivative_magnitude > 1.0);
    let escape = roots[1..].iter().all(|r| {
        [1e-6, -1e-6].iter().all(|d| {
            let tr = iterate_map(&AnalyticMap::Tangent, c(r.zeta + d, 0.0), 50).unwrap();
            tr.divergence_at.is_some() || tr.values.iter().any(|z| (z.re - r.zeta).abs() >= 0.1)
        })
    });
    outcome(
        worst <= 1e-9 && derivs && escape,
        format!(
            "ζ = {:.9}, {:.9}, {:.9}; max error {worst:.1e} (≤ 1e-9); 1+ζ² > 1: {derivs}; ζ±1e-6 escape: {escape}",
            roots[1].zeta, roots[2].zeta, roots[3].zeta
        ),
    )
}

fn basin() -> Outcome {
    let cfg = LowPassConfig::new(1.0, 1.0, 0.01, 0.01, 1.0).unwrap();
    match basin_verification(&cfg) {
        Ok(rep) => outcome(
            rep.q_on_disc < 1.0 && rep.steps_to_enter <= 500,
            format!(
                "ε = {:.3e}, q = {:.4} (|γ|² = {:.4}), orbit from Z1+Z2 enters D_ε at n = {} (≤ 500)",
                rep.epsilon, rep.q_on_disc, rep.gamma_abs_sq, rep.steps_to_enter
            ),
        ),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn resistive() -> Outcome {
    let mut worst = 0.0f64;
    for p in [0.5, 2.0] {
        let lad = resistive_ladder(1.0, p, 40, None).unwrap();
        for (k, z) in lad.partial_sums.iter().enumerate() {
            worst = worst.max((z - lad.closed_form(k + 1).unwrap()).abs() / z.abs().max(1.0));
        }
    }
    let doubling = resistive_ladder(1.0, 2.0, 4, None).unwrap();
    let flagged = doubling.limit == ResistiveLimit::Divergent { formal: Some(-1.0) };
    let halving = resistive_ladder(1.0, 0.5, 4, None).unwrap();
    let convergent = halving.limit == ResistiveLimit::Convergent { value: 2.0 };
    outcome(
        worst <= 1e-12 && flagged && convergent,
        format!("closed-form mismatch {worst:.1e} (≤ 1e-12); p = 2 divergent with formal -1: {flagged}; p = 0.5 limit 2: {convergent}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("geometric convergence law", geometric_convergence_law),
        ("passband limit (√3+i)/2", passband_limit),
        ("stopband limit 3.732051i", stopband_limit),
        ("paradox dichotomy", paradox_dichotomy),
        ("stability dichotomy", stability_dichotomy),
        ("group delay oracle", group_delay_oracle),
        ("wave-packet transport", wave_packet_transport),
        ("contraction counterexample", contraction_counterexample),
        ("tan repellers", tan_repellers),
        ("basin verification", basin),
        ("resistive ladder", resistive),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        println!("[{}] AC{:<2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
