#![no_main]

use libfuzzer_sys::fuzz_target;
use subsearch::evolve::{FinalResult, GenerationStats};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        for line in text.lines() {
            let _ = serde_json::from_str::<GenerationStats>(line);
            let _ = serde_json::from_str::<FinalResult>(line);
        }
    }
});
