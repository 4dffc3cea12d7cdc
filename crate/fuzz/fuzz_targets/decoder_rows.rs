#![no_main]

use libfuzzer_sys::fuzz_target;
use risbc::fieldcodec::{encode_repair, Decoder};

// Layout: dimension, payload length, source bytes, then coefficient rows.
fuzz_target!(|data: &[u8]| {
    let [dim, len, rest @ ..] = data else {
        return;
    };
    let k = *dim as usize % 32 + 1;
    let len = *len as usize % 16 + 1;
    if rest.len() < k * len {
        return;
    }
    let (bytes, rows) = rest.split_at(k * len);
    let sources: Vec<&[u8]> = bytes.chunks(len).collect();

    let mut dec = Decoder::new(k, len);
    let mut last = 0;
    for coeffs in rows.chunks_exact(k) {
        let payload = encode_repair(&sources, coeffs).unwrap();
        let rank = dec.insert(coeffs, &payload).unwrap();
        assert!(rank >= last && rank <= k);
        last = rank;
    }
    assert!(dec.insert(&vec![0; k + 1], &vec![0; len]).is_err());
    match dec.solve() {
        Ok(solved) => assert!(solved.iter().zip(&sources).all(|(a, b)| a == b)),
        Err(_) => assert!(!dec.is_complete()),
    }
});
