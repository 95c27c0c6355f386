#![no_main]

use libfuzzer_sys::fuzz_target;
use pencilbeam::evolution::StateDump;

fuzz_target!(|data: &[u8]| {
    if let Ok(dump) = StateDump::decode(data) {
        assert_eq!(dump.encode(), data);
    }
});
