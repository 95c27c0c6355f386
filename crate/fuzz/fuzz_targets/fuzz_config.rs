#![no_main]

use libfuzzer_sys::fuzz_target;
use pencilbeam::config::RunConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(cfg) = RunConfig::from_toml_str(s) {
            // a validated config always yields a grid
            cfg.grid().unwrap();
        }
    }
});
