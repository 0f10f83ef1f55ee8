#![no_main]

use libfuzzer_sys::fuzz_target;

use gtheory::data::CodingConfig;

// Coding configs come from user-edited files; parsing must reject garbage
// with an error, never a panic.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(coding) = CodingConfig::parse(text) {
        // Exercise the recode path with the parsed bounds.
        for item in 0..4u32 {
            let recoded = coding.recode(item, 3.5);
            let _ = coding.in_range(recoded);
        }
    }
});
