//! Realization files are untrusted input; parsing enforces the invariants
//! (positive masses, in-window, distinct locations) without panicking, and
//! the cheap accessors stay total on whatever passes validation.

#![no_main]

use greedymass::pointproc::MarkedRealization;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(r) = serde_json::from_slice::<MarkedRealization>(data) {
        if r.atoms.len() <= 64 {
            let _ = r.mass_in(|_| true);
            let _ = r.truncate(1.0);
            let shifted = r.shift(&vec![0.5; r.dim()]);
            let _ = shifted.atoms.len();
            if let Some(a) = r.atoms.first() {
                let _ = r.mass_of_vertices(std::slice::from_ref(&a.loc));
            }
        }
    }
});
