use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use tempfile::NamedTempFile;

/// Writes `bytes` to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// A whitespace-separated data file: a comment line naming the columns, then one
/// block of rows per curve, blocks separated by two blank lines.
pub fn plot_data(columns: &[&str], blocks: &[(String, Vec<Vec<f64>>)]) -> String {
    let mut out = format!("# {}\n", columns.join(" "));
    for (b, (title, rows)) in blocks.iter().enumerate() {
        if b > 0 {
            out.push_str("\n\n");
        }
        if !title.is_empty() {
            let _ = writeln!(out, "# {title}");
        }
        for row in rows {
            let line: Vec<String> = row.iter().map(|&x| num(x)).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
    }
    out
}
