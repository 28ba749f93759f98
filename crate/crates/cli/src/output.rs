//! Artifact writers. Every float is rendered with `{:e}` (shortest exact
//! round-trip), rows follow flat node order or fixed section order, so a
//! rerun with the same inputs produces byte-identical CSVs. The manifest is
//! the one file allowed to differ between reruns (it carries timings).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use normpx_core::field::ScalarField;
use normpx_core::grid::Grid;

use crate::config::RunConfig;
use crate::CliError;

/// Exact round-trip rendering; `parse::<f64>()` recovers the bit pattern.
pub fn fmt_float(x: f64) -> String {
    format!("{x:e}")
}

pub struct OutDir {
    path: PathBuf,
}

impl OutDir {
    pub fn create(path: &Path) -> Result<OutDir, CliError> {
        fs::create_dir_all(path).map_err(|e| {
            CliError::config(format!("cannot create output dir {}: {e}", path.display()))
        })?;
        Ok(OutDir {
            path: path.to_path_buf(),
        })
    }

    pub fn join(&self, name: &str) -> PathBuf {
        self.path.join(name)
    }

    pub fn write_csv(&self, name: &str, header: &str, rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut text = String::with_capacity(rows.len() * 32 + header.len() + 2);
        text.push_str(header);
        text.push('\n');
        for row in rows {
            let mut first = true;
            for cell in row {
                if !first {
                    text.push(',');
                }
                text.push_str(cell);
                first = false;
            }
            text.push('\n');
        }
        let path = self.join(name);
        fs::write(&path, text)
            .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))
    }

    pub fn write_manifest(
        &self,
        command: &str,
        config: Option<&RunConfig>,
        grid: Option<&Grid>,
        seed: u64,
        elapsed_ms: u128,
        extra: &[(&str, String)],
    ) -> Result<(), CliError> {
        let mut text = String::new();
        let _ = writeln!(text, "command = {:?}", command);
        let _ = writeln!(text, "version = {:?}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(text, "seed = {seed}");
        if let Some(grid) = grid {
            let _ = writeln!(text, "grid_n = {}", grid.points_per_axis());
            let _ = writeln!(text, "grid_dim = {}", grid.dim());
        }
        for (key, value) in extra {
            let _ = writeln!(text, "{key} = {value}");
        }
        let _ = writeln!(text, "elapsed_ms = {elapsed_ms}");
        if let Some(config) = config {
            let echo = toml::to_string_pretty(config)
                .map_err(|e| CliError::config(format!("cannot serialize config echo: {e}")))?;
            let _ = writeln!(text);
            let _ = writeln!(text, "[config]");
            for line in echo.lines() {
                // Nest the echoed tables under [config].
                if let Some(rest) = line.strip_prefix("[[") {
                    let _ = writeln!(text, "[[config.{rest}");
                } else if let Some(rest) = line.strip_prefix('[') {
                    let _ = writeln!(text, "[config.{rest}");
                } else {
                    let _ = writeln!(text, "{line}");
                }
            }
        }
        let path = self.join("manifest.toml");
        fs::write(&path, text)
            .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))
    }
}

/// Dump a solution field over the whole grid: coordinates, interior flag,
/// value, and in manufactured mode the exact value and absolute error.
pub fn solution_rows(
    grid: &Grid,
    u: &ScalarField,
    exact: Option<&ScalarField>,
) -> (String, Vec<Vec<String>>) {
    let dim = grid.dim();
    let mut header = String::new();
    for k in 0..dim {
        let _ = write!(header, "x{},", k + 1);
    }
    header.push_str("interior,value");
    if exact.is_some() {
        header.push_str(",exact,abs_error");
    }
    let mut rows = Vec::with_capacity(grid.node_count());
    let mut x = vec![0.0; dim];
    for node in 0..grid.node_count() {
        grid.coords(node, &mut x);
        let mut row = Vec::with_capacity(dim + 4);
        for &xi in &x {
            row.push(fmt_float(xi));
        }
        row.push(if grid.is_interior(node) { "1" } else { "0" }.to_string());
        row.push(fmt_float(u.value(node)));
        if let Some(ex) = exact {
            row.push(fmt_float(ex.value(node)));
            row.push(fmt_float((u.value(node) - ex.value(node)).abs()));
        }
        rows.push(row);
    }
    (header, rows)
}

/// Reload a solution dumped by `solution_rows`. The file must match the
/// grid exactly (node count and column layout).
pub fn read_solution(path: &Path, grid: &Grid) -> Result<ScalarField, CliError> {
    if !path.exists() {
        return Err(CliError::MissingArtifact(path.to_path_buf()));
    }
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::config(format!("{}: empty file", path.display())))?;
    let cols: Vec<&str> = header.split(',').collect();
    let value_col = cols.iter().position(|c| *c == "value").ok_or_else(|| {
        CliError::config(format!("{}: no `value` column", path.display()))
    })?;
    let mut values = Vec::with_capacity(grid.node_count());
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let cell = line.split(',').nth(value_col).ok_or_else(|| {
            CliError::config(format!("{}: row {} is short", path.display(), i + 2))
        })?;
        let v: f64 = cell.parse().map_err(|_| {
            CliError::config(format!(
                "{}: row {}: bad value {cell:?}",
                path.display(),
                i + 2
            ))
        })?;
        values.push(v);
    }
    if values.len() != grid.node_count() {
        return Err(CliError::config(format!(
            "{}: {} rows for a grid with {} nodes",
            path.display(),
            values.len(),
            grid.node_count()
        )));
    }
    ScalarField::from_values(grid.clone(), values).map_err(CliError::config_from)
}
