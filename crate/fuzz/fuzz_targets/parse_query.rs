//! Solver query schemas: parse and validate without panicking.

#![no_main]

use greedymass::solvers::{AnimalQuery, PathQuery};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(q) = serde_json::from_slice::<PathQuery>(data) {
        let _ = q.validate(2);
        let _ = q.validate(3);
    }
    if let Ok(q) = serde_json::from_slice::<AnimalQuery>(data) {
        let _ = q.validate(2);
        let _ = q.validate(3);
    }
});
