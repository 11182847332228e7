#![no_main]

use libfuzzer_sys::fuzz_target;
use zerodiag::format::{decode_json, encode_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(file) = decode_json(text) {
        // anything accepted must re-encode and decode to the same document
        if let Ok(again) = encode_json(&file) {
            assert_eq!(decode_json(&again).as_ref(), Ok(&file));
        }
    }
});
