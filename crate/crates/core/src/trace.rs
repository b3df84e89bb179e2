//! Textual run logs and golden-trace comparison.
//!
//! Single-tree runs log one line per executed level-iteration carrying the
//! surviving candidate set; paired-tree runs log one line per block
//! execution. Golden files hold previously verified logs; replay compares
//! byte for byte and reports the first divergence.

use std::fmt;

use crate::dual::BlockEvent;
use crate::search::LevelSnapshot;

/// Renders a single-tree per-level log, one line per executed iteration:
/// `(<kind>, i=<level>, |Q|=<n>, Q={id,id,...})`.
pub fn render_level_log(kind: &str, log: &[LevelSnapshot]) -> String {
    let mut out = String::new();
    for snap in log {
        let ids: Vec<String> = snap.candidates.iter().map(|id| id.to_string()).collect();
        out.push_str(&format!(
            "({kind}, i={}, |Q|={}, Q={{{}}})\n",
            snap.level,
            snap.candidates.len(),
            ids.join(",")
        ));
    }
    out
}

/// Renders a paired-tree block log, one line per block execution:
/// `(<block>, i=<int>, j=<int>, |candidates|=<int>)`.
pub fn render_block_log(events: &[BlockEvent]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&format!(
            "({}, i={}, j={}, |candidates|={})\n",
            e.kind.label(),
            e.i,
            e.j,
            e.candidates
        ));
    }
    out
}

/// Outcome of comparing a run log against a golden fixture.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Replay {
    Identical,
    Diff(TraceDiff),
}

impl Replay {
    pub fn is_identical(&self) -> bool {
        matches!(self, Replay::Identical)
    }
}

/// First divergence between a run log and its fixture.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceDiff {
    /// 1-based line number of the first mismatch.
    pub line: usize,
    pub expected: Option<String>,
    pub actual: Option<String>,
}

impl fmt::Display for TraceDiff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "trace diverges at line {}:", self.line)?;
        match &self.expected {
            Some(l) => writeln!(f, "  expected: {l}")?,
            None => writeln!(f, "  expected: <end of fixture>")?,
        }
        match &self.actual {
            Some(l) => write!(f, "  actual:   {l}"),
            None => write!(f, "  actual:   <end of log>"),
        }
    }
}

/// Compares a rendered log against golden content, byte for byte. On
/// mismatch the diff names the first differing line.
pub fn replay_trace(actual: &str, golden: &str) -> Replay {
    if actual == golden {
        return Replay::Identical;
    }
    let mut actual_lines = actual.lines();
    let mut golden_lines = golden.lines();
    let mut line = 0usize;
    loop {
        line += 1;
        match (golden_lines.next(), actual_lines.next()) {
            (None, None) => {
                // Same lines, different bytes (trailing whitespace or
                // newline conventions).
                return Replay::Diff(TraceDiff { line: 0, expected: None, actual: None });
            }
            (expected, actual) if expected != actual => {
                return Replay::Diff(TraceDiff {
                    line,
                    expected: expected.map(str::to_string),
                    actual: actual.map(str::to_string),
                });
            }
            _ => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::BlockKind;

    #[test]
    fn render_and_replay_identical() {
        let log = vec![
            LevelSnapshot { level: 3, candidates: vec![0, 7] },
            LevelSnapshot { level: 2, candidates: vec![0] },
        ];
        let text = render_level_log("nn", &log);
        assert_eq!(text, "(nn, i=3, |Q|=2, Q={0,7})\n(nn, i=2, |Q|=1, Q={0})\n");
        assert!(replay_trace(&text, &text).is_identical());
    }

    #[test]
    fn empty_log_matches_empty_fixture() {
        assert!(replay_trace("", "").is_identical());
    }

    #[test]
    fn diff_reports_first_divergent_line() {
        let golden = "(insert, i=2, |Q|=1, Q={0})\n(insert, i=1, |Q|=1, Q={0})\n";
        let actual = "(insert, i=2, |Q|=1, Q={0})\n(insert, i=1, |Q|=2, Q={0,1})\n";
        match replay_trace(actual, golden) {
            Replay::Diff(d) => {
                assert_eq!(d.line, 2);
                assert_eq!(d.expected.unwrap(), "(insert, i=1, |Q|=1, Q={0})");
                assert_eq!(d.actual.unwrap(), "(insert, i=1, |Q|=2, Q={0,1})");
            }
            Replay::Identical => panic!("expected a diff"),
        }
    }

    #[test]
    fn length_mismatch_is_a_diff() {
        let golden = "(insert, i=2, |Q|=1, Q={0})\n";
        match replay_trace("", golden) {
            Replay::Diff(d) => {
                assert_eq!(d.line, 1);
                assert!(d.actual.is_none());
            }
            Replay::Identical => panic!("expected a diff"),
        }
    }

    #[test]
    fn block_log_line_shape() {
        let events = vec![BlockEvent { kind: BlockKind::ReferenceExpansion, i: 9, j: 8, candidates: 3 }];
        assert_eq!(render_block_log(&events), "(ref-expand, i=9, j=8, |candidates|=3)\n");
    }
}
