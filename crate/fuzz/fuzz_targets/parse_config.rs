//! The experiment config parser must never panic on arbitrary bytes:
//! parsing either yields a validated config or an error.

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(cfg) = greedymass::cli::ExperimentConfig::from_json(data) {
        // payload parsing and validation must not panic either
        let _ = cfg.experiment();
    }
});
