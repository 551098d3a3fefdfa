use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum SpectrumFileError {
    #[error("cannot read spectrum file: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: '{text}' is not a finite decimal number")]
    Parse { line: usize, text: String },
    #[error("line {line}: eigenvalue {value} is not positive")]
    NonPositive { line: usize, value: f64 },
    #[error("spectrum file contains no values")]
    Empty,
}

/// Parses one value per line. Blank lines and lines starting with `#` are skipped.
/// Line numbers in errors are 1-based. The result is sorted ascending.
pub fn parse_spectrum(text: &str) -> Result<Vec<f64>, SpectrumFileError> {
    let mut values = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let value: f64 = match line.parse() {
            Ok(v) if f64::is_finite(v) => v,
            _ => {
                return Err(SpectrumFileError::Parse {
                    line: idx + 1,
                    text: line.to_string(),
                })
            }
        };
        if value <= 0.0 {
            return Err(SpectrumFileError::NonPositive { line: idx + 1, value });
        }
        values.push(value);
    }
    if values.is_empty() {
        return Err(SpectrumFileError::Empty);
    }
    values.sort_by(f64::total_cmp);
    Ok(values)
}

pub fn load_spectrum_file(path: &Path) -> Result<Vec<f64>, SpectrumFileError> {
    parse_spectrum(&std::fs::read_to_string(path)?)
}

/// Inverse of [`parse_spectrum`], one shortest round-trip value per line.
pub fn format_spectrum(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v}\n")).collect()
}
