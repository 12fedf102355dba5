//! Byte-deterministic text output for simulation results.

use std::io::{self, Write};

use crate::sim::{EstimateSnapshot, RoundRecord, SummaryReport};

pub const ROUND_CSV_HEADER: &str =
    "round,strategy,i_star,est_success_prob,n_good_true,on_time_evals,success";
pub const SNAPSHOT_CSV_HEADER: &str = "round,worker,p_hat_gg,p_hat_bb";

/// Per-round log, header first, rows in the given order. A missing
/// probability is an empty field.
pub fn write_rounds_csv<W: Write>(records: &[RoundRecord], mut out: W) -> io::Result<()> {
    writeln!(out, "{ROUND_CSV_HEADER}")?;
    for r in records {
        let est = r
            .est_success_prob
            .map(|p| p.to_string())
            .unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.round, r.strategy, r.i_star, est, r.n_good_true, r.on_time_evals, r.success as u8
        )?;
    }
    out.flush()
}

pub fn write_snapshots_csv<W: Write>(snapshots: &[EstimateSnapshot], mut out: W) -> io::Result<()> {
    writeln!(out, "{SNAPSHOT_CSV_HEADER}")?;
    for s in snapshots {
        writeln!(
            out,
            "{},{},{},{}",
            s.round, s.worker, s.p_hat_gg, s.p_hat_bb
        )?;
    }
    out.flush()
}

/// `key = value` summary.
pub fn write_summary_text<W: Write>(report: &SummaryReport, mut out: W) -> io::Result<()> {
    writeln!(out, "strategy = {}", report.strategy)?;
    writeln!(out, "rounds = {}", report.rounds)?;
    writeln!(out, "seed = {}", report.seed)?;
    writeln!(out, "k_star = {}", report.k_star)?;
    writeln!(out, "l_g = {}", report.l_g)?;
    writeln!(out, "l_b = {}", report.l_b)?;
    writeln!(out, "successes = {}", report.successes)?;
    writeln!(out, "throughput = {}", report.throughput)?;
    if report.decode_checks > 0 {
        writeln!(out, "decode_checks = {}", report.decode_checks)?;
    }
    if let Some(est) = &report.final_estimates {
        for (i, (gg, bb)) in est.iter().enumerate() {
            writeln!(out, "worker.{}.p_hat_gg = {gg}", i + 1)?;
            writeln!(out, "worker.{}.p_hat_bb = {bb}", i + 1)?;
        }
    }
    for (i, w) in report.warnings.iter().enumerate() {
        writeln!(out, "warning.{} = {w}", i + 1)?;
    }
    out.flush()
}

pub fn rounds_csv_string(records: &[RoundRecord]) -> String {
    let mut buf = Vec::new();
    write_rounds_csv(records, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

pub fn summary_text_string(report: &SummaryReport) -> String {
    let mut buf = Vec::new();
    write_summary_text(report, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("utf-8 output")
}
