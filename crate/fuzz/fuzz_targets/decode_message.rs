#![no_main]

use dmtrack::netsim::{decode_message, encode_message};
use libfuzzer_sys::fuzz_target;

// The first two bytes pick the gallery shape; the rest is the message.
fuzz_target!(|data: &[u8]| {
    let [b, n, msg @ ..] = data else { return };
    let bins = 1 + (*b as usize % 8);
    let n_f = 1 + (*n as usize % 16);
    if let Ok(m) = decode_message(msg, bins, n_f) {
        // accepted messages are canonical
        assert_eq!(encode_message(&m).unwrap(), msg);
    }
});
