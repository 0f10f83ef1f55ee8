#![no_main]

use libfuzzer_sys::fuzz_target;

use gtheory::data::{ingest, parse_records, CodingConfig};

// Long-format CSV is the main untrusted input surface. Neither parsing nor
// cube assembly may panic, whatever the bytes.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(records) = parse_records(text) {
        let _ = ingest(records, &CodingConfig::default());
    }
});
