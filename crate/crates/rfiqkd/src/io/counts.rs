use std::path::Path;

use crate::receiver::{WindowCounts, ZRecord};

use super::IoError;

pub const COUNTS_HEADER: &str = "window_id,t_start_s,duration_s,\
D_early,D_central,D_late,A_early,A_central,A_late,\
L_early,L_central,L_late,R_early,R_central,R_late";

pub const Z_HEADER: &str = "window_id,z_correct,z_error";

/// One record per window: id, start, duration (6 decimals) and the 12
/// integer peak counts in channel order D, A, L, R.
pub fn write_counts_file(path: &Path, windows: &[WindowCounts]) -> Result<(), IoError> {
    let mut out = String::with_capacity(64 * (windows.len() + 1));
    out.push_str(COUNTS_HEADER);
    out.push('\n');
    for w in windows {
        out.push_str(&format!("{},{:.6},{:.6}", w.window_id, w.t_start_s, w.duration_s));
        for channel in &w.counts {
            for count in channel {
                out.push_str(&format!(",{count}"));
            }
        }
        out.push('\n');
    }
    super::write_string(path, &out)
}

fn parse_field<T: std::str::FromStr>(
    path: &Path,
    line_no: usize,
    name: &str,
    raw: &str,
) -> Result<T, IoError> {
    raw.trim().parse::<T>().map_err(|_| {
        IoError::data(path, format!("line {line_no}: cannot parse {name} from {raw:?}"))
    })
}

pub fn read_counts_file(path: &Path) -> Result<Vec<WindowCounts>, IoError> {
    let text = super::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return Err(IoError::data(path, "empty counts file"));
    };
    if header.trim() != COUNTS_HEADER {
        return Err(IoError::data(path, format!("unexpected header {header:?}")));
    }
    let mut windows = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 15 {
            return Err(IoError::data(
                path,
                format!("line {line_no}: expected 15 fields, got {}", fields.len()),
            ));
        }
        let mut counts = [[0u64; 3]; 4];
        for k in 0..4 {
            for p in 0..3 {
                counts[k][p] = parse_field(path, line_no, "count", fields[3 + 3 * k + p])?;
            }
        }
        windows.push(WindowCounts {
            window_id: parse_field(path, line_no, "window_id", fields[0])?,
            t_start_s: parse_field(path, line_no, "t_start_s", fields[1])?,
            duration_s: parse_field(path, line_no, "duration_s", fields[2])?,
            counts,
        });
    }
    if windows.is_empty() {
        return Err(IoError::data(path, "counts file has no records"));
    }
    Ok(windows)
}

/// Z-basis coincidence sidecar: window_id, correct, error tallies.
pub fn write_z_records(path: &Path, records: &[ZRecord]) -> Result<(), IoError> {
    let mut out = String::new();
    out.push_str(Z_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!("{},{},{}\n", r.window_id, r.correct, r.errors));
    }
    super::write_string(path, &out)
}

pub fn read_z_records(path: &Path) -> Result<Vec<ZRecord>, IoError> {
    let text = super::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return Err(IoError::data(path, "empty z-record file"));
    };
    if header.trim() != Z_HEADER {
        return Err(IoError::data(path, format!("unexpected header {header:?}")));
    }
    let mut records = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(IoError::data(
                path,
                format!("line {line_no}: expected 3 fields, got {}", fields.len()),
            ));
        }
        records.push(ZRecord {
            window_id: parse_field(path, line_no, "window_id", fields[0])?,
            correct: parse_field(path, line_no, "z_correct", fields[1])?,
            errors: parse_field(path, line_no, "z_error", fields[2])?,
        });
    }
    Ok(records)
}
