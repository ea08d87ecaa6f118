//! Long-format CSV tables of the scans: one row per cell (or curve point),
//! with the scan configuration in the header.

use super::flow::FlowMap;
use super::neutral::NeutralCurve;
use super::reduced_map::ReducedMap;
use crate::error::Result;
use crate::io::{fmt_f64, Header, Table};

fn opt_f64(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn opt_display<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn reduced_map_table(map: &ReducedMap, header: Header) -> Result<Table> {
    let header = header.with_json("axes", &map.axes)?.with_json("config", &map.config)?;
    let mut t = Table::new(
        header,
        &[
            "mean_psi", "f0", "regular", "branches", "case", "min_abs_s", "max_re", "verdict", "stable_bound",
            "unstable_bound",
        ],
    );
    for c in &map.cells {
        let branches: Vec<String> = c.branches.iter().map(|b| b.to_string()).collect();
        t.push_row(vec![
            fmt_f64(c.mean_psi),
            fmt_f64(c.f0),
            c.regular.to_string(),
            branches.join(";"),
            format!("{:?}", c.case.case),
            opt_f64(c.min_abs_s),
            opt_f64(c.max_re),
            c.verdict.map(|v| format!("{v:?}")).unwrap_or_default(),
            opt_display(c.stable_bound),
            opt_display(c.unstable_bound),
        ]);
    }
    Ok(t)
}

/// Per cell: classification, reduced-model status, the simulation check and,
/// for each scanned family, convergence, family membership and growth rate.
pub fn flow_map_table(map: &FlowMap, header: Header) -> Result<Table> {
    let header = header.with_json("axes", &map.axes)?.with_json("config", &map.config)?;
    let mut columns: Vec<String> = [
        "mean_psi", "f0", "classification", "case", "reduced_regular", "reduced_branch", "tens_steady",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for kind in &map.config.modes {
        for field in ["converged", "in_family", "spikes", "max_re"] {
            columns.push(format!("{kind}_{field}"));
        }
    }
    let names: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut t = Table::new(header, &names);
    for c in &map.cells {
        let mut row = vec![
            fmt_f64(c.params.mean_psi),
            fmt_f64(c.params.f0),
            c.classification.to_string(),
            format!("{:?}", c.case_label.case),
            opt_display(c.reduced_regular),
            opt_display(c.reduced_branch),
            opt_display(c.tens_steady),
        ];
        for kind in &map.config.modes {
            match c.mode(*kind) {
                Some(r) => row.extend([
                    r.converged.to_string(),
                    r.in_family.to_string(),
                    r.spikes.to_string(),
                    opt_f64(r.max_re),
                ]),
                None => row.extend(std::iter::repeat(String::new()).take(4)),
            }
        }
        t.push_row(row);
    }
    Ok(t)
}

pub fn neutral_curve_table(curves: &[NeutralCurve], header: Header) -> Table {
    let mut t = Table::new(
        header,
        &["curve", "mode", "mean_psi", "f0", "f0_stable", "f0_unstable", "max_re", "stable_above"],
    );
    for c in curves {
        for p in &c.points {
            t.push_row(vec![
                c.name.clone(),
                c.mode.to_string(),
                fmt_f64(p.mean_psi),
                fmt_f64(p.f0),
                fmt_f64(p.f0_stable),
                fmt_f64(p.f0_unstable),
                fmt_f64(p.max_re),
                p.stable_above.to_string(),
            ]);
        }
    }
    t
}
