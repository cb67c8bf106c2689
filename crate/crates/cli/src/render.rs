//! Plain-text rendering of a [`Trace`].
//!
//! Numbers are printed with `{}`, the shortest representation that reads
//! back to the same `f64`, and only values already stored in the trace are
//! printed.

use std::fmt::Write;

use ckm_core::trace::{case_name, Check, Section, SectionKind, Trace};
use ckm_core::PipelinePath;

fn list(v: &[usize]) -> String {
    let parts: Vec<String> = v.iter().map(usize::to_string).collect();
    format!("{{{}}}", parts.join(", "))
}

/// Left-aligned columns separated by two spaces.
fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in width.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &mut dyn Iterator<Item = &str>| {
        let mut s = String::from("  ");
        for (cell, w) in cells.zip(&width) {
            s.push_str(cell);
            s.extend(std::iter::repeat_n(' ', w - cell.chars().count() + 2));
        }
        out.push_str(s.trim_end());
        out.push('\n');
    };
    line(&mut header.iter().copied());
    for row in rows {
        line(&mut row.iter().map(String::as_str));
    }
    out
}

fn checks(cs: &[Check]) -> String {
    let rows: Vec<Vec<String>> = cs
        .iter()
        .map(|c| {
            vec![
                c.label.clone(),
                c.value.to_string(),
                c.relation.symbol().to_string(),
                c.bound.to_string(),
                if c.holds { "ok" } else { "FAIL" }.to_string(),
            ]
        })
        .collect();
    table(&["check", "value", "rel", "bound", "holds"], &rows)
}

fn clustering(t: &Trace, out: &mut String) {
    let rows: Vec<Vec<String>> = (0..t.n)
        .map(|i| {
            vec![
                i.to_string(),
                t.y_lp[i].to_string(),
                t.conn_cost[i].to_string(),
            ]
        })
        .collect();
    out.push_str(&table(&["i", "y_i", "C_i"], &rows));
    out.push('\n');
    let rows: Vec<Vec<String>> = t
        .clusters
        .iter()
        .map(|c| {
            vec![
                c.core.to_string(),
                list(&c.members),
                c.mass.to_string(),
                if c.terminal {
                    "terminal"
                } else {
                    "non-terminal"
                }
                .to_string(),
            ]
        })
        .collect();
    out.push_str(&table(&["core", "members", "Z_l", "kind"], &rows));
}

fn concentration(t: &Trace, out: &mut String) {
    if t.transfers.is_empty() {
        out.push_str("  no transfers\n");
    } else {
        let rows: Vec<Vec<String>> = t
            .transfers
            .iter()
            .enumerate()
            .map(|(k, m)| {
                vec![
                    k.to_string(),
                    m.core.to_string(),
                    format!("{:?}", m.kind).to_lowercase(),
                    format!("{} -> {}", m.from, m.to),
                    m.delta.to_string(),
                    m.fraction.to_string(),
                ]
            })
            .collect();
        out.push_str(&table(
            &["#", "cluster", "kind", "from -> to", "delta", "row share"],
            &rows,
        ));
    }
    out.push('\n');
    let rows: Vec<Vec<String>> = (0..t.n)
        .filter(|&i| t.y_prime[i] != 0.0)
        .map(|i| {
            vec![
                i.to_string(),
                t.y_prime[i].to_string(),
                t.dprime[i].to_string(),
            ]
        })
        .collect();
    out.push_str(&table(&["i", "y'_i", "d'_i"], &rows));
    let _ = writeln!(out, "  N1 = {}", list(&t.n1));
    let _ = writeln!(out, "  N2 = {}", list(&t.n2));
}

fn redistribution(t: &Trace, out: &mut String) {
    let (Some(yhat), Some(nearest)) = (&t.yhat, &t.nearest) else {
        return;
    };
    let rows: Vec<Vec<String>> = (0..t.n)
        .filter(|&i| t.y_prime[i] != 0.0)
        .map(|i| {
            vec![
                i.to_string(),
                t.y_prime[i].to_string(),
                yhat[i].to_string(),
                nearest[i]
                    .map(|s| s.to_string())
                    .unwrap_or_else(|| "-".into()),
            ]
        })
        .collect();
    out.push_str(&table(&["i", "y'_i", "ŷ_i", "s(i)"], &rows));
}

fn stars(t: &Trace, out: &mut String) {
    let rows: Vec<Vec<String>> = t
        .stars
        .iter()
        .map(|s| {
            let moves: Vec<String> = s
                .reassign
                .iter()
                .map(|(i, r)| format!("{i}->{r}"))
                .collect();
            vec![
                s.root.to_string(),
                list(&s.children),
                format!("{} ({})", s.case.number(), case_name(s.case)),
                s.mass.to_string(),
                s.budget.to_string(),
                list(&s.opened),
                moves.join(" "),
            ]
        })
        .collect();
    out.push_str(&table(
        &[
            "root",
            "children",
            "case",
            "R_t",
            "⌊R_t⌋",
            "opened",
            "reassigned",
        ],
        &rows,
    ));
    let _ = writeln!(out, "  isolated (opened as is) = {}", list(&t.isolated));
}

fn section(t: &Trace, s: &Section, out: &mut String) {
    let _ = writeln!(out, "== {} ==", s.title);
    let before = out.len();
    match s.kind {
        SectionKind::Clustering => clustering(t, out),
        SectionKind::Concentration => concentration(t, out),
        SectionKind::Redistribution => redistribution(t, out),
        SectionKind::Stars => stars(t, out),
        SectionKind::EasyCase | SectionKind::Guarantees => {}
    }
    if out.len() > before {
        out.push('\n');
    }
    out.push_str(&checks(&s.checks));
    out.push('\n');
}

/// The worked-example document for one run. A run that ends with a single
/// candidate center renders as one line.
pub fn render_trace(t: &Trace) -> String {
    if t.path == PipelinePath::TrivialSingle {
        return format!(
            "trivial-single run: opened {} with cost {} (C_LP = {}, max load ratio {})\n",
            list(&t.open),
            t.cost,
            t.lp_cost,
            t.max_load_ratio
        );
    }
    let mut out = String::new();
    let _ = writeln!(out, "Pipeline trace ({} path)", t.path);
    let _ = writeln!(
        out,
        "  n = {}, k = {}, M = {}, α = {}",
        t.n, t.budget, t.capacity, t.alpha
    );
    let _ = writeln!(
        out,
        "  C_LP = {}, cost = {}, centers = {}, max load ratio = {}",
        t.lp_cost, t.cost, t.centers, t.max_load_ratio
    );
    let _ = writeln!(out, "  opened = {}", list(&t.open));
    let verdict = if t.all_hold() {
        "every check holds".to_string()
    } else {
        format!("{} checks FAIL", t.failures().count())
    };
    let _ = writeln!(out, "  {verdict}");
    out.push('\n');
    for s in &t.sections {
        section(t, s, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ckm_core::trace::build_trace;
    use ckm_core::{solve, Instance, Matrix};

    fn render(inst: &Instance) -> (Trace, String) {
        let out = solve(inst, 4.0).unwrap();
        let t = build_trace(inst, &out).unwrap();
        let doc = render_trace(&t);
        (t, doc)
    }

    #[test]
    fn trivial_single_is_one_line() {
        let inst = Instance::new(Matrix::zeros(1, 1), vec![1.0], 1.0, 1).unwrap();
        let (_, doc) = render(&inst);
        assert_eq!(doc.lines().count(), 1);
        assert!(doc.starts_with("trivial-single run: opened {0} with cost 0"));
    }

    #[test]
    fn easy_run_has_lemma_5_and_no_stars() {
        let cost = vec![
            vec![0.0, 100.0, 1.0],
            vec![100.0, 0.0, 100.0],
            vec![1.0, 100.0, 0.0],
        ];
        let inst = Instance::new(Matrix::from_rows(cost).unwrap(), vec![1.0; 3], 3.0, 2).unwrap();
        let (t, doc) = render(&inst);
        assert_eq!(t.path, PipelinePath::Easy);
        assert!(doc.contains("== Easy case (Lemma 5) =="));
        assert!(!doc.contains("Step 4"));
        // Values appear exactly as stored.
        assert!(doc.contains(&t.lp_cost.to_string()));
        for c in t.sections.iter().flat_map(|s| &s.checks) {
            assert!(doc.contains(&c.label));
        }
    }
}
