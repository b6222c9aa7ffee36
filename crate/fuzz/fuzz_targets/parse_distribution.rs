//! Mark distribution specs: parse, validate, and exercise the analytics
//! (tail, greedy integral) which must be total on validated inputs.

#![no_main]

use greedymass::pointproc::MarkDistribution;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(dist) = serde_json::from_slice::<MarkDistribution>(data) {
        if dist.validate().is_ok() {
            for t in [0.0, 0.5, 1.0, 1e6] {
                let tail = dist.tail(t);
                assert!((0.0..=1.0 + 1e-9).contains(&tail));
            }
            let gi = dist.greedy_integral(2);
            assert!(gi >= 0.0 || gi.is_infinite());
        }
    }
});
