#![no_main]

use libfuzzer_sys::fuzz_target;
use pencilbeam::Profile;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let Ok(g) = toml::from_str::<Profile>(s) else { return };
    if g.validate().is_err() {
        return;
    }
    let _ = g.pieces();
    let _ = g.integral(0.0, f64::INFINITY);
    let _ = g.sample(&[0.0, 0.5, 1.0, 2.0]);
    let _ = g.first_moment();
    let _ = g.abs().tail_moment_sup(0.0);
    let _ = g.positive_part().negative_part();
});
