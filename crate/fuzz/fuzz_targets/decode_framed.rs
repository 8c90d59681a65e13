#![no_main]
//! Input layout: two bytes of n (big-endian, plus one), one byte selecting
//! kappa, then a framed message.

use bapred::wire::{Msg, WireFormat};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let [hi, lo, k, frame @ ..] = data else { return };
    let n = u16::from_be_bytes([*hi, *lo]) as usize + 1;
    let kappa = 8 * (1 + (*k as u32 % 64));
    let fmt = WireFormat::new(n, kappa).unwrap();
    if let Ok((kind, msg)) = Msg::decode_framed(frame, &fmt) {
        // Decoding is strict, so re-encoding reproduces the payload.
        assert_eq!(kind as u8, frame[0]);
        assert_eq!(msg.encode(&fmt), &frame[1..]);
    }
});
