//! CSV and gnuplot emission for sweep results.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::runner::ResultRow;

/// Renders rows in the fixed report format:
/// `config,M,error_rate,avg_iterations,trials,wall_time_ms` with the error
/// rate at six decimal places. Everything except `wall_time_ms` is
/// deterministic under a fixed master seed.
pub fn csv_string(rows: &[ResultRow]) -> String {
    let mut out = String::from("config,M,error_rate,avg_iterations,trials,wall_time_ms\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{:.6},{:.4},{},{}\n",
            row.config, row.messages, row.error_rate, row.avg_iterations, row.trials,
            row.wall_time_ms
        ));
    }
    out
}

/// Writes the CSV report. Refuses an empty row set.
pub fn write_csv(rows: &[ResultRow], path: &Path) -> io::Result<()> {
    if rows.is_empty() {
        return Err(io::Error::new(io::ErrorKind::InvalidInput, "no rows to write"));
    }
    let mut writer = BufWriter::new(File::create(path)?);
    writer.write_all(csv_string(rows).as_bytes())?;
    writer.flush()
}

/// Additionally emits one whitespace-separated `.dat` file per config next
/// to `csv_path` (`<stem>.<config>.dat`, columns `M error_rate
/// avg_iterations`) for direct plotting. Returns the files written.
pub fn write_gnuplot(rows: &[ResultRow], csv_path: &Path) -> io::Result<Vec<PathBuf>> {
    if rows.is_empty() {
        return Err(io::Error::new(io::ErrorKind::InvalidInput, "no rows to write"));
    }
    let stem = csv_path.with_extension("");
    let mut configs: Vec<&str> = Vec::new();
    for row in rows {
        if !configs.contains(&row.config.as_str()) {
            configs.push(&row.config);
        }
    }
    let mut written = Vec::new();
    for config in configs {
        let path = PathBuf::from(format!("{}.{}.dat", stem.display(), config));
        let mut writer = BufWriter::new(File::create(&path)?);
        writeln!(writer, "# M error_rate avg_iterations")?;
        for row in rows.iter().filter(|r| r.config == config) {
            writeln!(writer, "{} {:.6} {:.4}", row.messages, row.error_rate, row.avg_iterations)?;
        }
        writer.flush()?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(config: &str, m: usize, rate: f64, iters: f64, wall: u128) -> ResultRow {
        ResultRow {
            config: config.into(),
            messages: m,
            error_rate: rate,
            avg_iterations: iters,
            trials: 2000,
            wall_time_ms: wall,
            clique_stops: 0,
            clique_verified: 0,
        }
    }

    #[test]
    fn csv_layout_is_fixed() {
        let rows = vec![
            row("a", 50, 0.0125, 3.5, 12),
            row("a", 100, 0.25, 4.0, 15),
            row("b", 50, 0.0, 1.0, 2),
        ];
        let text = csv_string(&rows);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4); // header + 3 rows
        assert_eq!(lines[0], "config,M,error_rate,avg_iterations,trials,wall_time_ms");
        assert_eq!(lines[1], "a,50,0.012500,3.5000,2000,12");
        assert_eq!(lines[3], "b,50,0.000000,1.0000,2000,2");
    }

    #[test]
    fn identical_data_differs_only_in_wall_time() {
        let first = csv_string(&[row("a", 50, 0.5, 2.0, 10)]);
        let second = csv_string(&[row("a", 50, 0.5, 2.0, 99)]);
        let strip = |text: &str| -> String {
            text.lines()
                .map(|l| l.rsplit_once(',').unwrap().0.to_string())
                .collect::<Vec<_>>()
                .join("\n")
        };
        assert_ne!(first, second);
        assert_eq!(strip(&first), strip(&second));
    }

    #[test]
    fn empty_rows_are_refused() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        assert!(write_csv(&[], &path).is_err());
    }

    #[test]
    fn gnuplot_emits_one_file_per_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let rows = vec![
            row("a", 50, 0.0125, 3.5, 12),
            row("a", 100, 0.25, 4.0, 15),
            row("b", 50, 0.0, 1.0, 2),
        ];
        let files = write_gnuplot(&rows, &path).unwrap();
        assert_eq!(files.len(), 2);
        let a = std::fs::read_to_string(&files[0]).unwrap();
        assert!(a.contains("50 0.012500 3.5000"));
        assert!(a.contains("100 0.250000 4.0000"));
    }
}
