use std::path::Path;

use crate::receiver::{EventStream, TimedEvent};

use super::IoError;

pub const EVENTS_HEADER: &str = "channel,timestamp_ps";

/// TDC-like event list: channel index (0..3) and picosecond timestamp,
/// one event per line, timestamps non-decreasing.
pub fn write_events_file(path: &Path, events: &EventStream) -> Result<(), IoError> {
    let mut out = String::with_capacity(16 * (events.len() + 1));
    out.push_str(EVENTS_HEADER);
    out.push('\n');
    for e in events.events() {
        out.push_str(&format!("{},{}\n", e.channel, e.timestamp_ps));
    }
    super::write_string(path, &out)
}

pub fn read_events_file(path: &Path) -> Result<EventStream, IoError> {
    let text = super::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return Err(IoError::data(path, "empty events file"));
    };
    if header.trim() != EVENTS_HEADER {
        return Err(IoError::data(path, format!("unexpected header {header:?}")));
    }
    let mut events = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let Some((ch, ts)) = line.split_once(',') else {
            return Err(IoError::data(path, format!("line {line_no}: expected 2 fields")));
        };
        let channel: u8 = ch.trim().parse().map_err(|_| {
            IoError::data(path, format!("line {line_no}: bad channel {ch:?}"))
        })?;
        if channel > 3 {
            return Err(IoError::data(path, format!("line {line_no}: channel {channel} > 3")));
        }
        let timestamp_ps: u64 = ts.trim().parse().map_err(|_| {
            IoError::data(path, format!("line {line_no}: bad timestamp {ts:?}"))
        })?;
        events.push(TimedEvent { channel, timestamp_ps });
    }
    Ok(EventStream::new(events))
}
