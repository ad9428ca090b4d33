//! Output formatting: CSV with full-precision numeric cells, and JSON.

use svie_core::linalg::Mat;

/// 17-significant-digit scientific form; round-trips through `f64` parsing.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// One CSV row from preformatted cells.
pub fn row(cells: &[String]) -> String {
    cells.join(",")
}

/// A labeled CSV block for one matrix: label line, then one row per matrix
/// row. `fmt` renders a single entry.
pub fn matrix_block(label: &str, mat: &Mat, fmt: impl Fn(f64) -> String) -> String {
    let mut out = String::new();
    out.push_str(label);
    out.push('\n');
    for i in 0..mat.rows() {
        let cells: Vec<String> = mat.row(i).iter().map(|&v| fmt(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Matrix as nested JSON arrays.
pub fn matrix_json(mat: &Mat) -> serde_json::Value {
    serde_json::Value::Array(
        (0..mat.rows())
            .map(|i| serde_json::Value::Array(mat.row(i).iter().map(|&v| v.into()).collect()))
            .collect(),
    )
}
