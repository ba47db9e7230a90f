//! Built-in check registry: every hand-computable example and exact
//! identity the crate relies on, runnable as `circulab selftest`.
//!
//! All checks are deterministic (fixed seeds, fixed matrices), so the
//! emitted CSV is byte-identical across runs and machines that share a
//! float implementation.

use num_complex::Complex64;

use crate::anticonc::{
    flat_basis, levy_exact_complex, levy_exact_real, lkr_check, rotation_dichotomy, RealLaw,
};
use crate::config::ExperimentConfig;
use crate::ensemble::{beta_of_xi, sample_matrix, Time, XiSpec};
use crate::lawcheck::{disk_rect_mass, ginibre_reference};
use crate::linalg::{eigenvalues, max_abs_diff, singular_values, svd, CMat};
use crate::potential::{minor_size, top_index, truncated_log_sum, u_circ, DeltaSchedule};
use crate::process::{
    interlacing_check, run_process, simulate_drift_walk, walk_row_bound_check, Adversary,
    ProcessConfig,
};
use crate::quasirandom::{
    alpha, cert_rank_cap, g_and_tau, growth_g, lambda_count, unique_neighborhood,
    CertificateConfig,
};
use crate::report::fmt_f64;
use crate::rng::Stream;

#[derive(Debug, Clone)]
pub struct SelftestRow {
    pub check: String,
    pub case: String,
    pub expected: String,
    pub actual: String,
    pub pass: bool,
}

fn sanitize(s: &str) -> String {
    s.replace(',', ";").replace('\n', " ")
}

fn row(check: &str, case: &str, expected: String, actual: String, pass: bool) -> SelftestRow {
    SelftestRow {
        check: check.to_string(),
        case: sanitize(case),
        expected: sanitize(&expected),
        actual: sanitize(&actual),
        pass,
    }
}

fn num(check: &str, case: &str, expected: f64, actual: f64, tol: f64) -> SelftestRow {
    let pass = if expected.is_infinite() || actual.is_infinite() {
        expected == actual
    } else {
        (expected - actual).abs() <= tol * expected.abs().max(1.0)
    };
    row(check, case, fmt_f64(expected), fmt_f64(actual), pass)
}

fn num_res(
    check: &str,
    case: &str,
    expected: f64,
    actual: crate::Result<f64>,
    tol: f64,
) -> SelftestRow {
    match actual {
        Ok(a) => num(check, case, expected, a, tol),
        Err(e) => row(check, case, fmt_f64(expected), format!("error: {}", e), false),
    }
}

fn flag(check: &str, case: &str, ok: bool) -> SelftestRow {
    row(check, case, "ok".into(), if ok { "ok" } else { "violated" }.into(), ok)
}

fn expect_err<T>(check: &str, case: &str, res: crate::Result<T>) -> SelftestRow {
    let is_err = res.is_err();
    row(
        check,
        case,
        "error".into(),
        if is_err { "error" } else { "ok" }.into(),
        is_err,
    )
}

fn exact(check: &str, case: &str, expected: &str, actual: &str) -> SelftestRow {
    row(check, case, expected.into(), actual.into(), expected == actual)
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Deterministic dense test matrix with entries from a named stream.
fn stream_matrix(rows: usize, cols: usize, tag: u64) -> CMat {
    let mut rng = Stream::new(900, "selftest-matrix", &[tag]);
    CMat::from_fn(rows, cols, |_, _| c(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0))
}

fn u_circ_checks(rows: &mut Vec<SelftestRow>) {
    rows.push(num("u-circ", "origin", 0.5, u_circ(c(0.0, 0.0)), 1e-15));
    rows.push(num("u-circ", "unit", 0.0, u_circ(c(1.0, 0.0)), 1e-15));
    rows.push(num("u-circ", "two", -(2f64.ln()), u_circ(c(2.0, 0.0)), 1e-15));
    rows.push(num("u-circ", "interior-half", 0.375, u_circ(c(0.0, 0.5)), 1e-15));
    rows.push(num("u-circ", "exterior-1.5", -(1.5f64.ln()), u_circ(c(1.5, 0.0)), 1e-15));
}

fn truncated_sum_checks(rows: &mut Vec<SelftestRow>) {
    let vals = [std::f64::consts::E, 1.0, (-2.0f64).exp()];
    rows.push(num("truncated-log-sum", "r=2", -0.25, truncated_log_sum(&vals, 2, 4), 1e-12));
    rows.push(num("truncated-log-sum", "r=3", 0.25, truncated_log_sum(&vals, 3, 4), 1e-12));
    rows.push(num(
        "truncated-log-sum",
        "r-beyond-spectrum",
        f64::INFINITY,
        truncated_log_sum(&vals, 5, 4),
        0.0,
    ));
    rows.push(num(
        "truncated-log-sum",
        "zero-value",
        f64::INFINITY,
        truncated_log_sum(&[1.0, 0.0], 2, 2),
        0.0,
    ));
}

fn schedule_checks(rows: &mut Vec<SelftestRow>) {
    let (n, d) = (1000usize, 30.0f64);
    match DeltaSchedule::two_regime(n, d, 1.0) {
        Ok(s) => {
            let low = (n as f64 / 901.0).ln().powi(2) / n as f64;
            rows.push(num("delta-schedule", "low-regime r=100", low, s.delta(100), 1e-12));
            let high = d.ln().powi(8) * (n as f64 / 11.0).ln().powi(8) / n as f64;
            rows.push(num("delta-schedule", "high-regime r=990", high, s.delta(990), 1e-12));
            rows.push(num(
                "delta-schedule",
                "eta r=100",
                (-(n as f64) * s.delta(100)).exp(),
                s.eta(100),
                1e-12,
            ));
        }
        Err(e) => rows.push(row("delta-schedule", "construct", "ok".into(), format!("error: {}", e), false)),
    }
    match DeltaSchedule::constant(100, 0.5) {
        Ok(s) => {
            rows.push(num("delta-schedule", "constant value", 0.5, s.delta(7), 0.0));
            rows.push(num("delta-schedule", "constant eta", (-50.0f64).exp(), s.eta(7), 1e-12));
        }
        Err(e) => rows.push(row("delta-schedule", "constant", "ok".into(), format!("error: {}", e), false)),
    }
}

fn growth_checks(rows: &mut Vec<SelftestRow>) {
    rows.push(num_res("alpha", "(100; 10)", 10f64.ln().powi(-2), alpha(100, 10.0), 1e-15));
    rows.push(expect_err("alpha", "x=n rejected", alpha(100, 100.0)));
    let cfg = CertificateConfig::new(1.0);
    let (n, d, x) = (500usize, 20.0f64, 10.0f64);
    let expected_g = (d * 50f64.ln().powi(-2) * x / (cfg.c_prime * (d + 50f64.ln())))
        .ceil()
        .max(1.0);
    rows.push(num_res("growth-g", "(500; 20; 10)", expected_g, growth_g(n, d, x, &cfg), 1e-12));
    // Replay the doubling iteration by hand.
    let target = n as f64 / (2.0 * d) * d.ln().ln();
    let mut k = 4.0f64;
    let mut tau = 0usize;
    while k <= target {
        k += match growth_g(n, d, k, &cfg) {
            Ok(g) => g,
            Err(_) => break,
        };
        tau += 1;
    }
    match g_and_tau(n, d, 4.0, &cfg) {
        Ok(rep) => {
            rows.push(num("growth-iteration", "tau", tau as f64, rep.tau as f64, 0.0));
            rows.push(num("growth-iteration", "final k", k, rep.final_k, 1e-12));
        }
        Err(e) => rows.push(row("growth-iteration", "run", "ok".into(), format!("error: {}", e), false)),
    }
    let v = [c(3.0, 0.0), c(-1.0, 0.0), c(0.0, 0.5), c(0.0, 1.0)];
    rows.push(num("lambda-count", "moduli >= 1", 3.0, lambda_count(&v, 1.0) as f64, 0.0));
}

fn index_checks(rows: &mut Vec<SelftestRow>) {
    rows.push(num_res("minor-size", "(100; 0.1)", 90.0, minor_size(100, 0.1).map(|m| m as f64), 0.0));
    rows.push(num_res("minor-size", "(100; 0)", 100.0, minor_size(100, 0.0).map(|m| m as f64), 0.0));
    rows.push(expect_err("minor-size", "eps=1 rejected", minor_size(100, 1.0)));
    rows.push(num("top-index", "(90; 0.1)", 87.0, top_index(90, 0.1) as f64, 0.0));
    rows.push(num(
        "rank-cap",
        "(100; t=60; div=8)",
        55.0,
        cert_rank_cap(100, Time::integer(60), 8) as f64,
        0.0,
    ));
    rows.push(num(
        "rank-cap",
        "(100; t=100; div=8)",
        100.0,
        cert_rank_cap(100, Time::integer(100), 8) as f64,
        0.0,
    ));
}

fn disk_mass_checks(rows: &mut Vec<SelftestRow>) {
    rows.push(num("disk-mass", "quarter at origin", 0.25, disk_rect_mass(0.0, 0.0), 1e-12));
    rows.push(num("disk-mass", "full square", 1.0, disk_rect_mass(1.0, 1.0), 1e-12));
    rows.push(num("disk-mass", "empty corner", 0.0, disk_rect_mass(-1.0, 0.4), 1e-12));
    let (s, t) = (0.3, -0.2);
    let lhs = disk_rect_mass(s, t);
    let rhs = 1.0 - disk_rect_mass(-s, 1.0) - disk_rect_mass(1.0, -t) + disk_rect_mass(-s, -t);
    rows.push(num("disk-mass", "central symmetry", rhs, lhs, 1e-12));
}

fn time_checks(rows: &mut Vec<SelftestRow>) {
    let t = Time::integer(5);
    rows.push(exact("time-grid", "integer shape", "5x5", &format!("{}x{}", t.rows(), t.cols())));
    let h = t.next_half();
    rows.push(exact("time-grid", "half shape", "5x6", &format!("{}x{}", h.rows(), h.cols())));
    rows.push(exact("time-grid", "half display", "5.5", &format!("{}", h)));
    rows.push(num("time-grid", "half as f64", 5.5, h.as_f64(), 0.0));
    rows.push(num("time-grid", "half ceil", 6.0, h.ceil() as f64, 0.0));
}

fn sample_checks(rows: &mut Vec<SelftestRow>) {
    let a = sample_matrix(40, 40, 0.2, &XiSpec::Rademacher, 11);
    let b = sample_matrix(40, 40, 0.2, &XiSpec::Rademacher, 11);
    let d = sample_matrix(40, 40, 0.2, &XiSpec::Rademacher, 12);
    match (a, b, d) {
        (Ok(a), Ok(b), Ok(d)) => {
            rows.push(flag("sample", "same seed reproduces", a == b));
            rows.push(flag("sample", "different seed differs", a != d));
            let mut buf = Vec::new();
            let round = a
                .write_csv(&mut buf)
                .and_then(|_| crate::ensemble::SparseSample::read_csv(&mut buf.as_slice()));
            match round {
                Ok(back) => rows.push(flag("sample", "csv round-trip bit-exact", back == a)),
                Err(e) => rows.push(row("sample", "csv round-trip bit-exact", "ok".into(), format!("error: {}", e), false)),
            }
        }
        _ => rows.push(row("sample", "construct", "ok".into(), "error".into(), false)),
    }
    rows.push(num_res(
        "beta-of-xi",
        "rademacher",
        0.5,
        beta_of_xi(&XiSpec::Rademacher, 3, 2000),
        1e-12,
    ));
    rows.push(flag(
        "two-point-xi",
        "normalized accepted",
        XiSpec::two_point(c(2f64.sqrt(), 0.0), c(0.0, 0.0), 0.5).is_ok(),
    ));
    rows.push(expect_err(
        "two-point-xi",
        "unnormalized rejected",
        XiSpec::two_point(c(2f64.sqrt(), 0.0), c(0.0, 0.0), 0.3),
    ));
}

fn linalg_checks(rows: &mut Vec<SelftestRow>) {
    let a = stream_matrix(6, 4, 1);
    match svd(&a, true, true) {
        Ok(dec) => {
            let u = dec.u.expect("u requested");
            let v = dec.v.expect("v requested");
            let mut sigma = CMat::zeros(u.cols(), v.cols());
            for (i, &s) in dec.values.iter().enumerate() {
                if i < sigma.rows().min(sigma.cols()) {
                    sigma[(i, i)] = c(s, 0.0);
                }
            }
            let recon = u.mul(&sigma).mul(&v.adjoint());
            rows.push(num("svd", "reconstruction", 0.0, max_abs_diff(&recon, &a), 1e-9));
            let gram = u.adjoint().mul(&u);
            rows.push(num(
                "svd",
                "left orthonormality",
                0.0,
                max_abs_diff(&gram, &CMat::identity(u.cols())),
                1e-9,
            ));
            let descending = dec.values.windows(2).all(|w| w[0] >= w[1] - 1e-12);
            rows.push(flag("svd", "values descending", descending));
        }
        Err(e) => rows.push(row("svd", "decompose", "ok".into(), format!("error: {}", e), false)),
    }

    let diag = CMat::diag(&[c(2.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)]);
    match eigenvalues(&diag) {
        Ok(mut ev) => {
            ev.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
            let mut want = [c(2.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)];
            want.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
            let worst = ev
                .iter()
                .zip(&want)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0f64, f64::max);
            rows.push(num("eig", "diagonal spectrum", 0.0, worst, 1e-9));
        }
        Err(e) => rows.push(row("eig", "diagonal spectrum", "ok".into(), format!("error: {}", e), false)),
    }

    // Appending a row must interlace the singular values.
    let m = stream_matrix(8, 8, 2);
    let stacked = {
        let extra = stream_matrix(1, 8, 3);
        CMat::from_fn(9, 8, |i, j| if i < 8 { m[(i, j)] } else { extra[(0, j)] })
    };
    match interlacing_check(&m, &stacked) {
        Ok(v) => rows.push(flag("interlacing", "append row 8x8", v <= 1e-9)),
        Err(e) => rows.push(row("interlacing", "append row 8x8", "ok".into(), format!("error: {}", e), false)),
    }

    let row_mat = stream_matrix(1, 6, 4);
    let x: Vec<Complex64> = (0..6).map(|j| row_mat[(0, j)]).collect();
    match walk_row_bound_check(&stream_matrix(6, 6, 5), &x, 3) {
        Ok((lhs, rhs, resid)) => {
            rows.push(flag("walk-row-bound", "product dominates", resid >= -1e-9 * rhs.abs().max(1.0)));
            rows.push(flag("walk-row-bound", "sides finite", lhs.is_finite() && rhs.is_finite()));
        }
        Err(e) => rows.push(row("walk-row-bound", "run", "ok".into(), format!("error: {}", e), false)),
    }

    let p = stream_matrix(6, 6, 6);
    let q = stream_matrix(6, 6, 7);
    let diff = CMat::from_fn(6, 6, |i, j| p[(i, j)] - q[(i, j)]);
    match (singular_values(&p), singular_values(&q)) {
        (Ok(sp), Ok(sq)) => {
            let lhs: f64 = sp.iter().zip(&sq).map(|(a, b)| (a - b) * (a - b)).sum();
            rows.push(flag(
                "hoffman-wielandt",
                "singular values vs HS distance",
                lhs <= diff.hs_norm_sq() + 1e-9,
            ));
        }
        _ => rows.push(row("hoffman-wielandt", "run", "ok".into(), "error".into(), false)),
    }
}

fn anticonc_checks(rows: &mut Vec<SelftestRow>) {
    let atoms = [(0.0, 0.2), (1.0, 0.3), (3.0, 0.5)];
    rows.push(num_res("levy-real", "r=0.5", 0.5, levy_exact_real(&atoms, 0.5), 1e-12));
    rows.push(num_res("levy-real", "r=1", 0.8, levy_exact_real(&atoms, 1.0), 1e-12));
    rows.push(num_res("levy-real", "r=1.5", 1.0, levy_exact_real(&atoms, 1.5), 1e-12));
    let pair = [(c(0.0, 0.0), 0.5), (c(1.0, 0.0), 0.5)];
    rows.push(num_res("levy-complex", "r=0.49 separates", 0.5, levy_exact_complex(&pair, 0.49), 1e-12));
    rows.push(num_res("levy-complex", "r=0.5 covers", 1.0, levy_exact_complex(&pair, 0.5), 1e-12));

    let single = lkr_check(&[RealLaw::Rademacher], &[0.5], 0.5, 0, 1);
    rows.push(num_res(
        "concentration-sum",
        "single rademacher lhs",
        0.5,
        single.as_ref().map(|r| r.lhs).map_err(clone_err),
        1e-12,
    ));
    rows.push(num_res(
        "concentration-sum",
        "single rademacher constant",
        0.125f64.sqrt(),
        single.as_ref().map(|r| r.c_achieved).map_err(clone_err),
        1e-12,
    ));
    let hundred = lkr_check(&vec![RealLaw::Rademacher; 100], &[0.5; 100], 0.5, 0, 1);
    let central: f64 = {
        // C(100, 50) / 2^100 without overflow: multiply ratios.
        let mut v = 1.0f64;
        for i in 0..50u32 {
            v *= (100 - i) as f64 / (50 - i) as f64 / 4.0;
        }
        v
    };
    rows.push(num_res(
        "concentration-sum",
        "hundred rademachers lhs",
        central,
        hundred.as_ref().map(|r| r.lhs).map_err(clone_err),
        1e-9,
    ));
    rows.push(num_res(
        "concentration-sum",
        "hundred denominator",
        12.5f64.sqrt(),
        hundred.as_ref().map(|r| r.denominator).map_err(clone_err),
        1e-12,
    ));

    match rotation_dichotomy(&[(c(-1.0, 0.0), 0.5), (c(1.0, 0.0), 0.5)], c(1.0, 0.0), 1.0) {
        Ok((lre, _lim, ok)) => {
            rows.push(num("rotation-dichotomy", "real part mass", 0.5, lre, 1e-12));
            rows.push(flag("rotation-dichotomy", "one axis spread", ok));
        }
        Err(e) => rows.push(row("rotation-dichotomy", "run", "ok".into(), format!("error: {}", e), false)),
    }

    let frame = CMat::from_fn(32, 8, |i, j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) });
    match flat_basis(&frame, 0.25, 4, 17) {
        Ok(fb) => {
            rows.push(flag("flat-basis", "fourier fallback used", fb.used_fourier_fallback));
            rows.push(num("flat-basis", "achieved flatness", 0.125f64.sqrt(), fb.achieved_flatness, 1e-12));
            rows.push(flag("flat-basis", "meets requirement", fb.ok));
        }
        Err(e) => rows.push(row("flat-basis", "run", "ok".into(), format!("error: {}", e), false)),
    }
}

fn clone_err(e: &crate::Error) -> crate::Error {
    crate::Error::contract(format!("{}", e))
}

fn quasirandom_checks(rows: &mut Vec<SelftestRow>) {
    let b = CMat::from_fn(4, 4, |i, j| match (i, j) {
        (0, 2) => c(1.0, 0.0),
        (1, 1) => c(0.2, 0.0),
        (2, 0) => c(0.7, 0.0),
        (2, 2) => c(0.3, 0.0),
        (2, 3) => c(0.1, 0.0),
        (3, 0) => c(0.3, 0.0),
        (3, 1) => c(0.4, 0.0),
        _ => c(0.0, 0.0),
    });
    match unique_neighborhood(&b, &[0, 1], 0.5) {
        Ok(u) => {
            let got = u.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(";");
            rows.push(exact("unique-neighborhood", "hand case 4x4", "0;2", &got));
        }
        Err(e) => rows.push(row("unique-neighborhood", "hand case 4x4", "0;2".into(), format!("error: {}", e), false)),
    }
}

fn process_checks(rows: &mut Vec<SelftestRow>) {
    match simulate_drift_walk(16, 0.0, 0, Adversary::AlwaysUp, 50, 9, 16) {
        Ok(rep) => {
            rows.push(num("drift-walk", "q=0 grounds surely", 1.0, rep.p_grounded, 0.0));
            rows.push(num("drift-walk", "q=0 moment", 1.0, rep.mean_z_final, 0.0));
        }
        Err(e) => rows.push(row("drift-walk", "q=0", "ok".into(), format!("error: {}", e), false)),
    }
    rows.push(expect_err(
        "drift-walk",
        "oversized start rejected",
        simulate_drift_walk(16, 0.5, 100, Adversary::AlwaysUp, 10, 9, 16),
    ));

    let n = 16usize;
    let sample = sample_matrix(n, n, 0.25, &XiSpec::Rademacher, 5);
    let schedule = DeltaSchedule::two_regime(n, 4.0, 1.0);
    match (sample, schedule) {
        (Ok(sample), Ok(schedule)) => {
            match run_process(&sample, n, 0.25, c(1.0, 0.0), &schedule, &ProcessConfig { certify: None }) {
                Ok(trace) => {
                    let chain = trace.verify_chain(1e-9);
                    rows.push(flag("process", "chain replay holds", chain.holds));
                    rows.push(flag(
                        "process",
                        "walk height never negative",
                        trace.records.iter().all(|r| (2 * r.r) as u64 <= r.t_twice),
                    ));
                    let max_mono = trace
                        .records
                        .iter()
                        .map(|r| r.monotone_violation)
                        .fold(0.0f64, f64::max);
                    rows.push(num("process", "appends push values up", 0.0, max_mono.max(0.0), 1e-8));
                }
                Err(e) => rows.push(row("process", "mini run", "ok".into(), format!("error: {}", e), false)),
            }
        }
        _ => rows.push(row("process", "mini run setup", "ok".into(), "error".into(), false)),
    }
}

fn lawcheck_checks(rows: &mut Vec<SelftestRow>) {
    match ginibre_reference(100, c(1.5, 0.0), &[1, 2]) {
        Ok(rep) => {
            rows.push(num("ginibre", "pooled count", 200.0, rep.values.len() as f64, 0.0));
            rows.push(flag("ginibre", "quantiles ordered", rep.quantile(0.5) <= rep.quantile(0.9)));
            rows.push(flag(
                "ginibre",
                "truncation drops heaviest log terms",
                rep.neg_log_truncated <= rep.neg_log_raw + 1e-12,
            ));
        }
        Err(e) => rows.push(row("ginibre", "reference", "ok".into(), format!("error: {}", e), false)),
    }
}

fn config_checks(rows: &mut Vec<SelftestRow>) {
    rows.push(expect_err(
        "config",
        "unknown key rejected",
        ExperimentConfig::from_toml("kind = \"law\"\noutput = \"o\"\ntypo_field = 1\n[seeds]\nbase = 0\ncount = 1\n"),
    ));
    let empty = ExperimentConfig::from_toml(
        "kind = \"law\"\noutput = \"o\"\n[grid]\n[seeds]\nbase = 0\ncount = 1\n",
    )
    .and_then(|cfg| cfg.tasks());
    rows.push(expect_err("config", "empty grid rejected before work", empty));
    rows.push(exact(
        "csv-schema",
        "potential header",
        "seed,n,d,eps,z_re,z_im,U_n,T_n,T1,T2,U_circ,inf_flag",
        crate::report::POTENTIAL_HEADER,
    ));
    rows.push(exact(
        "csv-schema",
        "law header",
        "seed,n,d,eps,z_re,z_im,disk_mass,discrepancy,T1_dev,T2_dev,HS_bound_ok",
        crate::report::LAW_HEADER,
    ));
    rows.push(exact(
        "csv-schema",
        "certificate header",
        "seed,n,d,t,r,event,verdict,witness_size,trials",
        crate::report::CERTIFICATE_HEADER,
    ));
    rows.push(exact(
        "csv-schema",
        "anticonc header",
        "seed,n,d,t,r,h,z_re,z_im,trials,freq,bound_shape_value",
        crate::report::ANTICONC_HEADER,
    ));
}

/// Runs every registered check and returns the result rows in a fixed
/// order.
pub fn run_all() -> Vec<SelftestRow> {
    let mut rows = Vec::new();
    u_circ_checks(&mut rows);
    truncated_sum_checks(&mut rows);
    schedule_checks(&mut rows);
    growth_checks(&mut rows);
    index_checks(&mut rows);
    disk_mass_checks(&mut rows);
    time_checks(&mut rows);
    sample_checks(&mut rows);
    linalg_checks(&mut rows);
    anticonc_checks(&mut rows);
    quasirandom_checks(&mut rows);
    process_checks(&mut rows);
    lawcheck_checks(&mut rows);
    config_checks(&mut rows);
    rows
}

pub const SELFTEST_HEADER: &str = "check,case,expected,actual,pass";

pub fn to_csv(rows: &[SelftestRow]) -> String {
    let mut out = String::from(SELFTEST_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.check,
            r.case,
            r.expected,
            r.actual,
            if r.pass { "1" } else { "0" }
        ));
    }
    out
}

pub fn print_table(rows: &[SelftestRow]) {
    println!("{:<22} {:<30} {:>22} {:>22} {:>6}", "check", "case", "expected", "actual", "pass");
    for r in rows {
        println!(
            "{:<22} {:<30} {:>22} {:>22} {:>6}",
            r.check,
            r.case,
            r.expected,
            r.actual,
            if r.pass { "pass" } else { "FAIL" }
        );
    }
    let passed = rows.iter().filter(|r| r.pass).count();
    println!("{} checks, {} passed, {} failed", rows.len(), passed, rows.len() - passed);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        let rows = run_all();
        let failures: Vec<String> = rows
            .iter()
            .filter(|r| !r.pass)
            .map(|r| format!("{}/{}: expected {} got {}", r.check, r.case, r.expected, r.actual))
            .collect();
        assert!(failures.is_empty(), "{}", failures.join("\n"));
    }

    #[test]
    fn csv_is_deterministic() {
        assert_eq!(to_csv(&run_all()), to_csv(&run_all()));
    }

    #[test]
    fn csv_fields_stay_aligned() {
        for line in to_csv(&run_all()).lines() {
            assert_eq!(line.split(',').count(), 5, "{}", line);
        }
    }
}
