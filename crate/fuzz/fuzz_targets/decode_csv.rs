#![no_main]

use libfuzzer_sys::fuzz_target;
use zerodiag::format::{decode_csv, encode_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(m) = decode_csv(text) {
        let again = encode_csv(&m).expect("decoded entries are finite");
        assert_eq!(decode_csv(&again).as_ref(), Ok(&m));
    }
});
