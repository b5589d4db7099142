//! Writes the scripted zigzag session used by the replay tests.
//!
//! cargo run -p gesturequad-core --example zigzag_fixture -- fixtures/zigzag_body.session [body|hand]

use std::fs::File;
use std::io::BufWriter;

use gesturequad_core::engine::Engine;
use gesturequad_core::script::{scripted_frames, zigzag_plan, ScriptTiming};
use gesturequad_core::session::{SessionHeader, SessionWriter};
use gesturequad_core::sim::Course;
use gesturequad_core::{GestureKind, Settings};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args.next().ok_or("usage: zigzag_fixture OUT [body|hand]")?;
    let kind: GestureKind = args.next().as_deref().unwrap_or("body").parse()?;

    let settings = Settings::bundled();
    let header = SessionHeader {
        session_id: format!("zigzag-{kind}"),
        mode: kind,
        config_hash: settings.hash(),
        created_at: 0,
    };
    let mut engine = Engine::new(settings, kind, Course::zigzag());
    let mut writer = SessionWriter::new(BufWriter::new(File::create(&path)?), &header)?;
    for frame in scripted_frames(kind, &zigzag_plan(), &ScriptTiming::default()) {
        for event in engine.handle_frame(&frame)? {
            writer.record(&event)?;
        }
    }
    for event in engine.finish() {
        writer.record(&event)?;
    }
    writer.finish()?;
    let status = engine.course_status();
    eprintln!(
        "{path}: {} commands, completed={}, elapsed {} ms",
        engine.commands().len(),
        status.completed,
        status.elapsed_ms
    );
    Ok(())
}
