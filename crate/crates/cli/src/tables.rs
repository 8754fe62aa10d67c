//! Plain-text table rendering: right-aligned summary columns and the
//! upper-triangular split matrices used throughout the appendix tables.

/// Aligned columns with a header row. Counts print as plain digits.
pub fn render_columns(headers: &[&str], rows: &[Vec<usize>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for row in rows {
        for (i, v) in row.iter().enumerate() {
            widths[i] = widths[i].max(v.to_string().len());
        }
    }
    let mut out = String::new();
    for (i, h) in headers.iter().enumerate() {
        if i > 0 {
            out.push_str("  ");
        }
        out.push_str(&format!("{h:>w$}", w = widths[i]));
    }
    out.push('\n');
    for row in rows {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push_str("  ");
            }
            out.push_str(&format!("{v:>w$}", w = widths[i]));
        }
        out.push('\n');
    }
    out
}

/// Upper-triangular split matrix in the appendix layout: row label k,
/// column label l, cells only for k ≤ l.
pub fn render_triangle(title: &str, matrix: Vec<Vec<usize>>) -> String {
    let n = matrix.len() - 1;
    let mut width = 1;
    for (k, row) in matrix.iter().enumerate() {
        for (l, v) in row.iter().enumerate() {
            if l >= k {
                width = width.max(v.to_string().len());
            }
        }
    }
    width = width.max(n.to_string().len());
    let label_w = title.len();
    let mut out = title.to_string();
    for l in 0..=n {
        out.push_str(&format!("  {l:>width$}"));
    }
    out.push('\n');
    for (k, row) in matrix.iter().enumerate() {
        out.push_str(&format!("{k:<label_w$}"));
        for (l, v) in row.iter().enumerate() {
            if l < k {
                out.push_str(&" ".repeat(width + 2));
            } else {
                out.push_str(&format!("  {v:>width$}"));
            }
        }
        out.push('\n');
    }
    out
}

/// The same triangle as CSV rows `n,k,l,count` (upper cells only).
pub fn triangle_csv(n: usize, matrix: &[Vec<usize>]) -> String {
    let mut out = String::from("n,k,l,count\n");
    for (k, row) in matrix.iter().enumerate() {
        for (l, v) in row.iter().enumerate() {
            if l >= k {
                out.push_str(&format!("{n},{k},{l},{v}\n"));
            }
        }
    }
    out
}
