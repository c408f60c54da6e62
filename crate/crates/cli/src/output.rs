//! CSV and JSON emitters. All numeric fields are written with 17
//! significant digits so every f64 round-trips exactly.

use std::fmt::Write as _;

use hkdelay::analysis::{ContractionReport, ShrinkageCertificate};
use hkdelay::meanfield::MeanFieldTable;
use hkdelay::Trajectory;

/// 17-significant-digit decimal form (`{:.16e}`); round-trip safe.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    match x {
        Some(v) => fmt_f64(v),
        None => "nan".into(),
    }
}

/// Rows `t,agent,coord,x,v` over every recorded node.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,agent,coord,x,v\n");
    let dim = traj.dim();
    for (idx, &t) in traj.times().iter().enumerate() {
        let pos = traj.positions_at(idx);
        let vel = traj.velocities_at(idx);
        for agent in 0..traj.n_agents() {
            for c in 0..dim {
                let _ = writeln!(
                    out,
                    "{},{agent},{c},{},{}",
                    fmt_f64(t),
                    fmt_f64(pos[agent * dim + c]),
                    fmt_f64(vel[agent * dim + c]),
                );
            }
        }
    }
    out
}

/// Rows `k,m_k,M_k,D_k,sigma_k,gamma_k,gamma_tilde,bound_rhs,pass`.
pub fn report_csv(report: &ContractionReport) -> String {
    let mut out = String::from("k,m_k,M_k,D_k,sigma_k,gamma_k,gamma_tilde,bound_rhs,pass\n");
    for row in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            row.k,
            fmt_f64(row.lower),
            fmt_f64(row.upper),
            fmt_f64(row.width),
            fmt_f64(row.sigma),
            fmt_f64(row.gamma),
            fmt_f64(row.gamma_tilde),
            fmt_f64(row.bound_rhs),
            row.pass,
        );
    }
    out
}

/// JSON array with one certificate object per analysis direction, field
/// names exactly `psi_lower, sigma, gamma, gamma_minus, gamma_plus, tau, m,
/// M, N`.
pub fn certificates_json(certs: &[ShrinkageCertificate]) -> String {
    let mut out = String::from("[\n");
    for (i, c) in certs.iter().enumerate() {
        let _ = write!(
            out,
            "  {{\"psi_lower\": {}, \"sigma\": {}, \"gamma\": {}, \"gamma_minus\": {}, \"gamma_plus\": {}, \"tau\": {}, \"m\": {}, \"M\": {}, \"N\": {}}}",
            fmt_f64(c.psi_lower),
            fmt_f64(c.sigma),
            fmt_f64(c.gamma),
            fmt_f64(c.gamma_minus),
            fmt_f64(c.gamma_plus),
            fmt_f64(c.tau),
            fmt_f64(c.m),
            fmt_f64(c.m_upper),
            c.n_agents,
        );
        out.push_str(if i + 1 < certs.len() { ",\n" } else { "\n" });
    }
    out.push_str("]\n");
    out
}

/// Run summary for `simulate`.
pub fn summary_json(traj: &Trajectory) -> String {
    let consensus = match traj.consensus_time() {
        Some(t) => fmt_f64(t),
        None => "null".into(),
    };
    format!(
        concat!(
            "{{\n",
            "  \"n_agents\": {},\n",
            "  \"dim\": {},\n",
            "  \"tau\": {},\n",
            "  \"scheme\": \"{}\",\n",
            "  \"steps_per_delay\": {},\n",
            "  \"record_stride\": {},\n",
            "  \"eps_consensus\": {},\n",
            "  \"final_time\": {},\n",
            "  \"final_diameter\": {},\n",
            "  \"consensus_time\": {},\n",
            "  \"n_records\": {}\n",
            "}}\n"
        ),
        traj.n_agents(),
        traj.dim(),
        fmt_f64(traj.tau()),
        traj.params().scheme.label(),
        traj.steps_per_delay(),
        traj.record_stride(),
        fmt_f64(traj.eps_consensus()),
        fmt_f64(traj.final_time()),
        fmt_f64(traj.final_diameter()),
        consensus,
        traj.n_records(),
    )
}

/// One sweep row per grid cell.
pub struct SweepRow {
    pub tau: f64,
    pub beta: f64,
    pub n_agents: usize,
    pub seed: u64,
    pub t_to_consensus: Option<f64>,
    pub final_diameter: f64,
    pub min_gamma_tilde: Option<f64>,
    pub status: String,
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(
        "tau,beta,n_agents,seed,t_to_consensus,final_diameter,min_gamma_tilde,status\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_f64(r.tau),
            fmt_f64(r.beta),
            r.n_agents,
            r.seed,
            fmt_opt(r.t_to_consensus),
            fmt_f64(r.final_diameter),
            fmt_opt(r.min_gamma_tilde),
            r.status.replace(',', ";"),
        );
    }
    out
}

/// Rows `N,seed,t,diameter,w1_vs_ref`.
pub fn meanfield_csv(table: &MeanFieldTable) -> String {
    let mut out = String::from("N,seed,t,diameter,w1_vs_ref\n");
    for run in &table.runs {
        for (i, &t) in run.times.iter().enumerate() {
            let w1 = run.w1_vs_ref.get(i).copied();
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                run.n,
                run.seed,
                fmt_f64(t),
                fmt_f64(run.diameters[i]),
                fmt_opt(w1),
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_formatting_round_trips() {
        for &x in &[
            0.1,
            1.0 / 3.0,
            2.807618110407059e-4,
            -1.2345678901234567e101,
            6.02e23,
        ] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, x, "{s}");
        }
    }

    #[test]
    fn fmt_has_17_significant_digits() {
        let s = fmt_f64(1.0 / 3.0);
        let digits: String = s
            .chars()
            .take_while(|c| *c != 'e')
            .filter(|c| c.is_ascii_digit())
            .collect();
        assert_eq!(digits.len(), 17, "{s}");
    }
}
