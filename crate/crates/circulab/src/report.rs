//! CSV row formatting for every experiment report.
//!
//! All floating-point fields use Rust's shortest round-trip `Display`
//! form, so identical computations produce byte-identical files.

use num_complex::Complex64;

use crate::anticonc::ProjAnticonc;
use crate::ensemble::Time;
use crate::lawcheck::LawPoint;
use crate::potential::PotentialReport;
use crate::process::{ChainCheck, DriftWalkReport, ProcessTrace, StepRecord};
use crate::quasirandom::EventCheck;

pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{}", x)
    }
}

pub fn fmt_bool(b: bool) -> &'static str {
    if b { "1" } else { "0" }
}

pub const POTENTIAL_HEADER: &str = "seed,n,d,eps,z_re,z_im,U_n,T_n,T1,T2,U_circ,inf_flag";

pub fn potential_row(rep: &PotentialReport) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        rep.seed,
        rep.n,
        fmt_f64(rep.d),
        fmt_f64(rep.eps),
        fmt_f64(rep.z.re),
        fmt_f64(rep.z.im),
        fmt_f64(rep.u_n),
        fmt_f64(rep.t_n),
        fmt_f64(rep.t1),
        fmt_f64(rep.t2),
        fmt_f64(rep.u_circ),
        fmt_bool(rep.inf_flag),
    )
}

pub const CERTIFICATE_HEADER: &str = "seed,n,d,t,r,event,verdict,witness_size,trials";

pub fn certificate_row(
    seed: u64,
    n: usize,
    d: f64,
    t: Time,
    r: usize,
    check: &EventCheck,
) -> String {
    let verdict = if check.vacuous {
        "vacuous"
    } else if check.verdict {
        "pass"
    } else {
        "fail"
    };
    format!(
        "{},{},{},{},{},{},{},{},{}",
        seed,
        n,
        fmt_f64(d),
        t,
        r,
        check.event.as_str(),
        verdict,
        check.witness,
        check.trials,
    )
}

pub const ANTICONC_HEADER: &str = "seed,n,d,t,r,h,z_re,z_im,trials,freq,bound_shape_value";

#[allow(clippy::too_many_arguments)]
pub fn anticonc_row(
    seed: u64,
    n: usize,
    d: f64,
    t: Time,
    r: usize,
    z: Complex64,
    exp: &ProjAnticonc,
) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        seed,
        n,
        fmt_f64(d),
        t,
        r,
        exp.h,
        fmt_f64(z.re),
        fmt_f64(z.im),
        exp.trials,
        fmt_f64(exp.freq),
        fmt_f64(exp.shape_value),
    )
}

pub const LAW_HEADER: &str = "seed,n,d,eps,z_re,z_im,disk_mass,discrepancy,T1_dev,T2_dev,HS_bound_ok";

pub fn law_row(p: &LawPoint) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        p.seed,
        p.n,
        fmt_f64(p.d),
        fmt_f64(p.eps),
        fmt_f64(p.z.re),
        fmt_f64(p.z.im),
        fmt_f64(p.disk_mass),
        fmt_f64(p.discrepancy),
        fmt_f64(p.t1_dev),
        fmt_f64(p.t2_dev),
        fmt_bool(p.hs_bound_ok),
    )
}

pub const PROCESS_HEADER: &str = "seed,n,d,eps,z_re,z_im,r_final,h_final,accepted,rejected,acceptance_rate,finite_candidate_rate,chain_slack,chain_holds";

pub fn process_row(trace: &ProcessTrace, chain: &ChainCheck) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        trace.seed,
        trace.n,
        fmt_f64(trace.d),
        fmt_f64(trace.eps),
        fmt_f64(trace.z.re),
        fmt_f64(trace.z.im),
        trace.r_final,
        fmt_f64(trace.h_final_twice as f64 / 2.0),
        trace.accepted_steps,
        trace.rejected_steps,
        fmt_f64(trace.acceptance_rate()),
        fmt_f64(trace.finite_candidate_rate()),
        match chain.slack {
            Some(s) => fmt_f64(s),
            None => "na".to_string(),
        },
        fmt_bool(chain.holds),
    )
}

pub const TRACE_HEADER: &str = "t,kind,r,h,h_star,accepted,delta,T_candidate,T_current,sigma_r,min_sigma,monotone_violation";

pub fn trace_row(rec: &StepRecord) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        fmt_f64(rec.t_twice as f64 / 2.0),
        rec.kind.as_str(),
        rec.r,
        fmt_f64(rec.h_twice as f64 / 2.0),
        fmt_f64(rec.h_star_twice as f64 / 2.0),
        fmt_bool(rec.accepted),
        fmt_f64(rec.delta_used),
        fmt_f64(rec.t_candidate),
        fmt_f64(rec.t_current),
        fmt_f64(rec.sigma_r),
        fmt_f64(rec.min_sigma),
        fmt_f64(rec.monotone_violation),
    )
}

/// One trace file: header, one row per half-step, then a `#` JSON footer
/// summarizing the run (the only non-tabular line).
pub fn trace_file(trace: &ProcessTrace, chain: &ChainCheck) -> String {
    let mut out = String::new();
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for rec in &trace.records {
        out.push_str(&trace_row(rec));
        out.push('\n');
    }
    let footer = serde_json::json!({
        "seed": trace.seed,
        "n": trace.n,
        "m": trace.m,
        "d": trace.d,
        "eps": trace.eps,
        "z_re": trace.z.re,
        "z_im": trace.z.im,
        "r_final": trace.r_final,
        "h_final": trace.h_final_twice as f64 / 2.0,
        "t_n_initial": trace.t_n_initial,
        "u_n": trace.u_n,
        "accepted": trace.accepted_steps,
        "rejected": trace.rejected_steps,
        "regime_flag": trace.regime_flag,
        "chain_holds": chain.holds,
        "chain_slack": chain.slack,
        "max_step_violation": chain.max_step_violation,
    });
    out.push_str("# ");
    out.push_str(&footer.to_string());
    out.push('\n');
    out
}

pub const WALK_HEADER: &str = "seed,steps,q,y0,policy,trials,p_grounded,mean_z_final,se_z_final,max_mean_z";

pub fn walk_row(seed: u64, q: f64, y0_twice: u64, policy: &str, rep: &DriftWalkReport) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        seed,
        rep.steps,
        fmt_f64(q),
        fmt_f64(y0_twice as f64 / 2.0),
        policy,
        rep.trials,
        fmt_f64(rep.p_grounded),
        fmt_f64(rep.mean_z_final),
        fmt_f64(rep.se_z_final),
        fmt_f64(rep.max_mean_z),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_render_shortest_roundtrip() {
        assert_eq!(fmt_f64(0.1), "0.1");
        assert_eq!(fmt_f64(1.0), "1");
        assert_eq!(fmt_f64(-2.5e-10), "-0.00000000025");
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
        assert_eq!(fmt_f64(f64::NEG_INFINITY), "-inf");
        assert_eq!(fmt_f64(f64::NAN), "nan");
        let x = 0.1 + 0.2;
        assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn headers_match_field_counts() {
        assert_eq!(POTENTIAL_HEADER.split(',').count(), 12);
        assert_eq!(CERTIFICATE_HEADER.split(',').count(), 9);
        assert_eq!(ANTICONC_HEADER.split(',').count(), 11);
        assert_eq!(LAW_HEADER.split(',').count(), 11);
        assert_eq!(PROCESS_HEADER.split(',').count(), 14);
        assert_eq!(TRACE_HEADER.split(',').count(), 12);
        assert_eq!(WALK_HEADER.split(',').count(), 10);
    }
}
