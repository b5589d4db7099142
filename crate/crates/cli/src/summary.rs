use std::collections::BTreeMap;
use std::fmt;

use gesturequad_core::pipeline::CommandEvent;
use gesturequad_core::sim::CourseStatus;
use gesturequad_core::stats::format_mss;
use gesturequad_core::{Gesture, GestureKind};

/// End-of-session report. Built from logical time only, so identical input
/// gives identical output.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub session_id: String,
    pub mode: GestureKind,
    pub completed: bool,
    pub elapsed_ms: u64,
    pub commands: usize,
    pub per_gesture: BTreeMap<Gesture, usize>,
}

impl RunSummary {
    pub fn new(
        session_id: &str,
        mode: GestureKind,
        course: CourseStatus,
        commands: &[CommandEvent],
    ) -> Self {
        let mut per_gesture = BTreeMap::new();
        for c in commands {
            *per_gesture.entry(c.source_gesture).or_insert(0) += 1;
        }
        Self {
            session_id: session_id.to_string(),
            mode,
            completed: course.completed,
            elapsed_ms: course.elapsed_ms,
            commands: commands.len(),
            per_gesture,
        }
    }
}

impl fmt::Display for RunSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "session    {}", self.session_id)?;
        writeln!(f, "mode       {}", self.mode)?;
        writeln!(f, "completed  {}", self.completed)?;
        writeln!(
            f,
            "elapsed    {}",
            format_mss(self.elapsed_ms as f64 / 1000.0)
        )?;
        writeln!(f, "commands   {}", self.commands)?;
        let width = self
            .per_gesture
            .keys()
            .map(|g| g.as_str().len())
            .max()
            .unwrap_or(0);
        for (g, n) in &self.per_gesture {
            writeln!(f, "  {:<width$}  {n}", g.as_str())?;
        }
        Ok(())
    }
}

/// Left-aligned first column, right-aligned others.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: &mut dyn Iterator<Item = &str>| {
        let mut out = String::new();
        for (i, (cell, w)) in cells.zip(&widths).enumerate() {
            if i == 0 {
                out.push_str(&format!("{cell:<w$}"));
            } else {
                out.push_str(&format!("  {cell:>w$}"));
            }
        }
        out.trim_end().to_string() + "\n"
    };
    let mut out = line(&mut header.iter().copied());
    for row in rows {
        out.push_str(&line(&mut row.iter().map(String::as_str)));
    }
    out
}
