#![no_main]

use libfuzzer_sys::fuzz_target;
use subsearch_cli::RunConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = RunConfig::parse(text, "fuzz") {
            let _ = cfg.evolve_config().validate();
        }
    }
});
