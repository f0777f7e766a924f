//! CPLEX LP text export of the migration program.

use std::collections::HashSet;
use std::fmt::Write as _;

use sdnmig_core::exact::IlpBudget;
use sdnmig_core::IlpInstance;

/// Node names reduced to `[A-Za-z0-9_]`, with the node index appended when
/// two names collapse onto the same string.
fn variable_stems(names: &[String]) -> Vec<String> {
    let clean: Vec<String> = names
        .iter()
        .map(|n| {
            n.chars()
                .map(|c| {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        c
                    } else {
                        '_'
                    }
                })
                .collect()
        })
        .collect();
    let mut seen = HashSet::new();
    let mut clash = HashSet::new();
    for c in &clean {
        if !seen.insert(c.as_str()) {
            clash.insert(c.clone());
        }
    }
    clean
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            if clash.contains(&c) {
                format!("{c}_{i}")
            } else {
                c
            }
        })
        .collect()
}

/// Renders `terms` as `a x + b y - c z`, skipping zero coefficients.
fn linear(terms: impl IntoIterator<Item = (f64, String)>) -> String {
    let mut out = String::new();
    for (coef, var) in terms {
        if coef == 0.0 {
            continue;
        }
        let sign = if coef < 0.0 { "-" } else { "+" };
        if out.is_empty() {
            if coef < 0.0 {
                out.push_str("- ");
            }
        } else {
            let _ = write!(out, " {sign} ");
        }
        let _ = write!(out, "{} {var}", coef.abs());
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// The program as LP text: objective, one constraint per line, then one
/// binary declaration per line. Output depends only on the instance.
pub fn export_lp(ilp: &IlpInstance) -> String {
    let steps = ilp.steps();
    let stems = variable_stems(ilp.node_names());
    let mu = |n: usize, t: usize| format!("mu_{}_{t}", stems[n]);
    let pi = |p: usize, t: usize| format!("pi_{p}_{t}");

    let mut out = String::new();
    let _ = writeln!(
        out,
        "\\ migration schedule: {} nodes, {} alternative paths, {} steps",
        ilp.node_count(),
        ilp.paths().len(),
        steps
    );
    out.push_str("Maximize\n");
    let objective = linear(
        ilp.paths()
            .iter()
            .flat_map(|p| (1..=steps).map(move |t| (p.priority, pi(p.id.0, t)))),
    );
    let _ = writeln!(out, " obj: {objective}");

    out.push_str("Subject To\n");
    for t in 1..=steps {
        for p in ilp.paths() {
            let alpha = p.key_nodes.len() as f64;
            let row = linear(
                std::iter::once((alpha, pi(p.id.0, t)))
                    .chain(p.key_nodes.iter().map(|k| (-1.0, mu(k.0, t)))),
            );
            let _ = writeln!(out, " avail_{}_{t}: {row} <= 0", p.id.0);
        }
    }
    for t in 1..=steps {
        let (row, rhs) = match ilp.budget() {
            IlpBudget::Count { per_step } => (
                linear((0..ilp.node_count()).map(|n| (1.0, mu(n, t)))),
                (t * per_step) as f64,
            ),
            IlpBudget::Cost { costs, per_step } => (
                linear(costs.iter().enumerate().map(|(n, &c)| (c, mu(n, t)))),
                if t == steps {
                    costs.iter().sum()
                } else {
                    t as f64 * per_step
                },
            ),
        };
        let _ = writeln!(out, " budget_{t}: {row} <= {rhs}");
    }
    for t in 1..steps {
        for (n, stem) in stems.iter().enumerate() {
            let _ = writeln!(
                out,
                " mono_{stem}_{t}: {} <= 0",
                linear([(1.0, mu(n, t)), (-1.0, mu(n, t + 1))])
            );
        }
    }

    out.push_str("Binary\n");
    for n in 0..ilp.node_count() {
        for t in 1..=steps {
            let _ = writeln!(out, " {}", mu(n, t));
        }
    }
    for p in ilp.paths() {
        for t in 1..=steps {
            let _ = writeln!(out, " {}", pi(p.id.0, t));
        }
    }
    out.push_str("End\n");
    out
}
