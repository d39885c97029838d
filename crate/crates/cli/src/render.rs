use std::fmt::Write;

use genus_core::checks::SuiteReport;
use genus_core::{GenusReport, MatrixFp, PlaceSets, SearchResult};
use serde_json::{json, Value};

pub fn places_json(places: &PlaceSets) -> Value {
    json!({ "s0": places.s0(), "sInf": places.s_inf(), "t": places.t() })
}

/// The versioned output envelope. serde_json's default map sorts keys, so
/// printing, parsing and printing again gives the same bytes.
pub fn envelope(command: &str, input: Value, result: Value, timing_ms: u128) -> String {
    let v = json!({
        "schemaVersion": "1",
        "command": command,
        "input": input,
        "result": result,
        "timingMs": timing_ms as u64,
    });
    serde_json::to_string(&v).expect("JSON values always serialize")
}

fn set(items: &[u64]) -> String {
    let parts: Vec<String> = items.iter().map(u64::to_string).collect();
    format!("{{{}}}", parts.join(", "))
}

pub fn matrix_block(m: &MatrixFp) -> String {
    let mut out = String::new();
    if m.ncols() == 0 {
        out.push_str("  (no columns)\n");
        return out;
    }
    let label_w = m.row_labels().iter().map(String::len).max().unwrap_or(0).max(4);
    let col_w: Vec<usize> = m.col_labels().iter().map(|l| l.len().max(1)).collect();
    let _ = write!(out, "  {:>label_w$}  ", "");
    for (l, w) in m.col_labels().iter().zip(&col_w) {
        let _ = write!(out, " {l:>w$}");
    }
    out.push('\n');
    if m.nrows() == 0 {
        out.push_str("  (no rows: W_T is trivial)\n");
    }
    for (r, label) in m.row_labels().iter().enumerate() {
        let _ = write!(out, "  {label:>label_w$} |");
        for (c, w) in col_w.iter().enumerate() {
            let _ = write!(out, " {:>w$}", m.get(r, c));
        }
        out.push('\n');
    }
    out
}

pub fn genus_text(places: &PlaceSets, r: &GenusReport) -> String {
    let mut out = String::new();
    let inf = if places.s_inf() { "yes" } else { "no" };
    let _ = writeln!(out, "d = {}   S0 = {}   inf in S: {inf}   T = {}", r.d, set(places.s0()), set(places.t()));
    let _ = writeln!(out, "ramified: {}", set(&r.sigma));
    out.push_str(&matrix_block(&r.matrix));
    let _ = writeln!(out, "rank {}   dim W_T {}   columns {}", r.rank, r.wt_dim, r.matrix.ncols());
    let _ = writeln!(out, "g = {} (2^{})", r.g, r.log2_g);
    let _ = writeln!(out, "ray class order {}   g* = {}", r.ray_class_order, r.g_star);
    let kernel: Vec<String> = r.kernel_basis.iter().map(|v| format!("{{{}}}", v.join(","))).collect();
    let _ = writeln!(out, "kernel basis: {}", if kernel.is_empty() { "-".into() } else { kernel.join(" ") });
    let split: Vec<String> =
        r.splitting.iter().map(|s| format!("{} {}", s.place, format!("{:?}", s.kind).to_lowercase())).collect();
    let _ = writeln!(out, "places: {}", split.join(", "));
    out
}

pub fn search_text(r: &SearchResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "sigma = {}   d = {}   max prime {}", set(&r.sigma), r.d, r.max_prime);
    out.push_str(&matrix_block(&r.report.matrix));
    let _ = writeln!(out, "g = {} (2^{})", r.report.g, r.report.log2_g);
    out
}

pub fn suite_json(s: &SuiteReport) -> Value {
    json!({
        "name": s.name,
        "passed": s.passed(),
        "cases": s.cases,
        "failures": s.failures,
        "elapsedMs": s.elapsed_ms as u64,
    })
}
