//! Canonical on-disk format for current traces with a digital marker channel.
//!
//! Layout: optional leading `# key=value` comment lines (metadata), then the
//! header `timestamp_s,current_ma,marker`, then one data row per sample.
//! UTF-8, LF line endings, no trailing whitespace. Timestamps carry six
//! fractional digits; currents up to six, trailing zeros trimmed down to two;
//! the marker is `0` or `1`.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const TRACE_HEADER: &str = "timestamp_s,current_ma,marker";

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {what}")]
    Malformed { line: usize, what: String },
    #[error("line {line}: timestamps must be strictly increasing")]
    NonMonotone { line: usize },
    #[error("line {line}: current must be >= 0")]
    NegativeCurrent { line: usize },
    #[error("trace needs at least 2 samples, got {0}")]
    TooShort(usize),
    #[error("samples and marker have different lengths: {samples} vs {marker}")]
    LengthMismatch { samples: usize, marker: usize },
    #[error("invalid meta entry `{0}`: keys must be non-empty and free of `=` and line breaks")]
    InvalidMeta(String),
}

/// One measurement: when, how much current, and whether inference was active.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub timestamp_s: f64,
    pub current_ma: f64,
    /// The digital marker channel (D0): true while inference runs.
    pub marker: bool,
}

/// A validated current trace: strictly increasing timestamps, at least two
/// samples, non-negative currents.
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentTrace {
    samples: Vec<TraceSample>,
    meta: BTreeMap<String, String>,
}

impl CurrentTrace {
    pub fn new(
        samples: Vec<TraceSample>,
        meta: BTreeMap<String, String>,
    ) -> Result<Self, TraceError> {
        if samples.len() < 2 {
            return Err(TraceError::TooShort(samples.len()));
        }
        for (i, pair) in samples.windows(2).enumerate() {
            if pair[1].timestamp_s <= pair[0].timestamp_s {
                // +2: the offending sample is the second of the pair, 1-based
                return Err(TraceError::NonMonotone { line: i + 2 });
            }
        }
        if let Some(i) = samples.iter().position(|s| !(s.current_ma >= 0.0)) {
            return Err(TraceError::NegativeCurrent { line: i + 1 });
        }
        Ok(Self { samples, meta })
    }

    /// Builds a trace from parallel channels, checking they have equal length.
    pub fn from_channels(
        points: &[(f64, f64)],
        marker: &[bool],
        meta: BTreeMap<String, String>,
    ) -> Result<Self, TraceError> {
        if points.len() != marker.len() {
            return Err(TraceError::LengthMismatch {
                samples: points.len(),
                marker: marker.len(),
            });
        }
        let samples = points
            .iter()
            .zip(marker)
            .map(|(&(timestamp_s, current_ma), &marker)| TraceSample {
                timestamp_s,
                current_ma,
                marker,
            })
            .collect();
        Self::new(samples, meta)
    }

    pub fn samples(&self) -> &[TraceSample] {
        &self.samples
    }

    pub fn meta(&self) -> &BTreeMap<String, String> {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false // a valid trace always has >= 2 samples
    }

    pub fn start(&self) -> f64 {
        self.samples[0].timestamp_s
    }

    pub fn end(&self) -> f64 {
        self.samples[self.samples.len() - 1].timestamp_s
    }

    pub fn duration(&self) -> f64 {
        self.end() - self.start()
    }

    /// Mean spacing between samples; the "one sample period" tolerance unit.
    pub fn mean_sample_period(&self) -> f64 {
        self.duration() / (self.samples.len() - 1) as f64
    }
}

/// Timestamps always carry six fractional digits.
fn fmt_timestamp(v: f64) -> String {
    format!("{:.6}", v)
}

/// Currents carry up to six fractional digits; trailing zeros beyond the
/// second are trimmed, so `0.3` prints as `0.30` and `1.234500` as `1.2345`.
fn fmt_current(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v }; // normalize -0.0
    let mut s = format!("{:.6}", v);
    let dot = s.find('.').expect("{:.6} always has a fraction");
    while s.len() - dot - 1 > 2 && s.ends_with('0') {
        s.pop();
    }
    s
}

/// Serializes a trace in the canonical format. Re-reading the output yields a
/// structurally equal trace (values quantized to the declared precision), and
/// a second write is byte-identical.
pub fn write_trace(trace: &CurrentTrace, mut sink: impl Write) -> Result<(), TraceError> {
    for (key, value) in trace.meta() {
        if key.is_empty()
            || key.contains('=')
            || key.contains('\n')
            || key.contains('\r')
            || value.contains('\n')
            || value.contains('\r')
        {
            return Err(TraceError::InvalidMeta(format!("{key}={value}")));
        }
        writeln!(sink, "# {key}={value}")?;
    }
    writeln!(sink, "{TRACE_HEADER}")?;
    for s in trace.samples() {
        writeln!(
            sink,
            "{},{},{}",
            fmt_timestamp(s.timestamp_s),
            fmt_current(s.current_ma),
            if s.marker { '1' } else { '0' }
        )?;
    }
    Ok(())
}

pub fn write_trace_to_path(trace: &CurrentTrace, path: impl AsRef<Path>) -> Result<(), TraceError> {
    let mut file = std::fs::File::create(path)?;
    write_trace(trace, &mut file)?;
    Ok(file.sync_data()?)
}

fn parse_field(raw: &str, line: usize, what: &str) -> Result<f64, TraceError> {
    let v: f64 = raw.parse().map_err(|_| TraceError::Malformed {
        line,
        what: format!("cannot parse {what} `{raw}`"),
    })?;
    if !v.is_finite() {
        return Err(TraceError::Malformed {
            line,
            what: format!("{what} `{raw}` is not finite"),
        });
    }
    Ok(v)
}

/// Parses the canonical trace format, reporting the offending line on error.
pub fn read_trace(source: impl Read) -> Result<CurrentTrace, TraceError> {
    let reader = BufReader::new(source);
    let mut meta = BTreeMap::new();
    let mut samples: Vec<TraceSample> = Vec::new();
    let mut seen_header = false;

    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        if !seen_header {
            if let Some(comment) = line.strip_prefix('#') {
                let body = comment.strip_prefix(' ').ok_or_else(|| TraceError::Malformed {
                    line: lineno,
                    what: "meta line must start with `# `".into(),
                })?;
                let (key, value) = body.split_once('=').ok_or_else(|| TraceError::Malformed {
                    line: lineno,
                    what: "meta line must be `# key=value`".into(),
                })?;
                if key.is_empty() {
                    return Err(TraceError::Malformed {
                        line: lineno,
                        what: "meta key must be non-empty".into(),
                    });
                }
                meta.insert(key.to_string(), value.to_string());
                continue;
            }
            if line != TRACE_HEADER {
                return Err(TraceError::Malformed {
                    line: lineno,
                    what: format!("expected header `{TRACE_HEADER}`, got `{line}`"),
                });
            }
            seen_header = true;
            continue;
        }

        let mut fields = line.split(',');
        let (ts, cur, mark) = match (fields.next(), fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), Some(c), None) => (a, b, c),
            _ => {
                return Err(TraceError::Malformed {
                    line: lineno,
                    what: format!("expected 3 comma-separated fields, got `{line}`"),
                })
            }
        };
        let timestamp_s = parse_field(ts, lineno, "timestamp")?;
        let current_ma = parse_field(cur, lineno, "current")?;
        let marker = match mark {
            "0" => false,
            "1" => true,
            other => {
                return Err(TraceError::Malformed {
                    line: lineno,
                    what: format!("marker must be 0 or 1, got `{other}`"),
                })
            }
        };
        if let Some(prev) = samples.last() {
            if timestamp_s <= prev.timestamp_s {
                return Err(TraceError::NonMonotone { line: lineno });
            }
        }
        if current_ma < 0.0 {
            return Err(TraceError::NegativeCurrent { line: lineno });
        }
        samples.push(TraceSample {
            timestamp_s,
            current_ma,
            marker,
        });
    }

    if !seen_header {
        return Err(TraceError::Malformed {
            line: 1,
            what: format!("missing header `{TRACE_HEADER}`"),
        });
    }
    if samples.len() < 2 {
        return Err(TraceError::TooShort(samples.len()));
    }
    Ok(CurrentTrace { samples, meta })
}

pub fn read_trace_from_path(path: impl AsRef<Path>) -> Result<CurrentTrace, TraceError> {
    read_trace(std::fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(text: &str) -> Result<CurrentTrace, TraceError> {
        read_trace(text.as_bytes())
    }

    fn render(trace: &CurrentTrace) -> String {
        let mut buf = Vec::new();
        write_trace(trace, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn minimal_file_parses() {
        let t = parse("timestamp_s,current_ma,marker\n0.0,1.0,0\n0.001,1.0,1\n0.002,1.0,0\n")
            .unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.samples().iter().filter(|s| s.marker).count(), 1);
    }

    #[test]
    fn meta_comments_are_collected() {
        let t = parse("# processor=m4\n# model=lenet5\ntimestamp_s,current_ma,marker\n0.0,1,0\n1.0,1,0\n")
            .unwrap();
        assert_eq!(t.meta()["processor"], "m4");
        assert_eq!(t.meta()["model"], "lenet5");
    }

    #[test]
    fn non_monotone_timestamps_rejected_with_line() {
        let err = parse("timestamp_s,current_ma,marker\n0.0,1,0\n0.002,1,0\n0.001,1,0\n")
            .unwrap_err();
        match err {
            TraceError::NonMonotone { line } => assert_eq!(line, 4),
            other => panic!("expected NonMonotone, got {other}"),
        }
    }

    #[test]
    fn arity_violation_rejected_with_line() {
        let err = parse("timestamp_s,current_ma,marker\n0.0,1,0\n0.001,1\n").unwrap_err();
        match err {
            TraceError::Malformed { line, .. } => assert_eq!(line, 3),
            other => panic!("expected Malformed, got {other}"),
        }
    }

    #[test]
    fn bad_marker_and_nan_rejected() {
        assert!(matches!(
            parse("timestamp_s,current_ma,marker\n0.0,1,2\n0.001,1,0\n").unwrap_err(),
            TraceError::Malformed { line: 2, .. }
        ));
        assert!(matches!(
            parse("timestamp_s,current_ma,marker\n0.0,NaN,0\n0.001,1,0\n").unwrap_err(),
            TraceError::Malformed { line: 2, .. }
        ));
    }

    #[test]
    fn negative_current_rejected() {
        assert!(matches!(
            parse("timestamp_s,current_ma,marker\n0.0,-1,0\n0.001,1,0\n").unwrap_err(),
            TraceError::NegativeCurrent { line: 2 }
        ));
    }

    #[test]
    fn single_row_too_short() {
        assert!(matches!(
            parse("timestamp_s,current_ma,marker\n0.0,1,0\n").unwrap_err(),
            TraceError::TooShort(1)
        ));
    }

    #[test]
    fn current_formatting_contract() {
        assert_eq!(fmt_current(0.30), "0.30");
        assert_eq!(fmt_current(10.0), "10.00");
        assert_eq!(fmt_current(1.2345), "1.2345");
        assert_eq!(fmt_current(1.23456789), "1.234568");
        assert_eq!(fmt_current(0.0), "0.00");
        assert_eq!(fmt_timestamp(0.0001), "0.000100");
    }

    #[test]
    fn current_text_preserved() {
        let t = CurrentTrace::from_channels(
            &[(0.0, 0.30), (0.001, 0.30)],
            &[false, true],
            BTreeMap::new(),
        )
        .unwrap();
        let text = render(&t);
        assert!(text.contains("0.000000,0.30,0"), "{text}");
        assert!(text.contains("0.001000,0.30,1"), "{text}");
    }

    #[test]
    fn channel_length_mismatch_rejected() {
        let err =
            CurrentTrace::from_channels(&[(0.0, 1.0), (0.1, 1.0)], &[true], BTreeMap::new())
                .unwrap_err();
        assert!(matches!(err, TraceError::LengthMismatch { samples: 2, marker: 1 }));
    }

    #[test]
    fn meta_with_line_break_rejected_on_write() {
        let mut meta = BTreeMap::new();
        meta.insert("note".to_string(), "two\nlines".to_string());
        let t = CurrentTrace::from_channels(&[(0.0, 1.0), (0.1, 1.0)], &[false, false], meta)
            .unwrap();
        assert!(matches!(
            write_trace(&t, &mut Vec::new()).unwrap_err(),
            TraceError::InvalidMeta(_)
        ));
    }

    prop_compose! {
        fn arb_trace()(
            n in 2usize..200,
            start in 0.0f64..100.0,
            step_ms in 1u32..2000,
            seed_currents in proptest::collection::vec(0.0f64..500.0, 200),
            seed_marker in proptest::collection::vec(any::<bool>(), 200),
            with_meta in any::<bool>(),
        ) -> CurrentTrace {
            let step = step_ms as f64 / 1000.0;
            let points: Vec<(f64, f64)> = (0..n)
                .map(|i| (start + i as f64 * step, seed_currents[i]))
                .collect();
            let marker: Vec<bool> = seed_marker[..n].to_vec();
            let mut meta = BTreeMap::new();
            if with_meta {
                meta.insert("source".to_string(), "proptest".to_string());
                meta.insert("runs".to_string(), n.to_string());
            }
            CurrentTrace::from_channels(&points, &marker, meta).unwrap()
        }
    }

    proptest! {
        // write -> read -> write is a fixed point, byte for byte
        #[test]
        fn round_trip_fixed_point(t in arb_trace()) {
            let first = render(&t);
            let reparsed = parse(&first).unwrap();
            let second = render(&reparsed);
            prop_assert_eq!(&first, &second);
            // and the reparse of the second is structurally equal to the first reparse
            prop_assert_eq!(parse(&second).unwrap(), reparsed);
        }
    }
}
