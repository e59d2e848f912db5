//! Builds an analyzer fixture from a story and its hand-written payloads.
//!
//! `cargo run --example record_fixture -- story.txt payloads.json out.json`

use motioncomic_core::analysis::{FixtureAnalyzer, Payloads};
use motioncomic_core::narrative::tokenize_sentences;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let [story, payloads, out] = args.as_slice() else {
        eprintln!("usage: record_fixture STORY PAYLOADS OUT");
        std::process::exit(2);
    };
    let text = std::fs::read_to_string(story).expect("story");
    let payloads: Payloads = serde_json::from_str(&std::fs::read_to_string(payloads).expect("payloads")).expect("payload json");
    let sentences = tokenize_sentences(&text).expect("sentences");
    let fixture = FixtureAnalyzer::from_payloads(&sentences, &payloads).expect("spans");
    std::fs::write(out, fixture.to_json() + "\n").expect("write");
}
