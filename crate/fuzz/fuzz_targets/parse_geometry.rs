//! Geometric wire types (paths, animals, norms): deserialization enforces
//! the structural invariants (nonempty, connected, no self-loops) and the
//! accessors must stay total on accepted values.

#![no_main]

use greedymass::geometry::{dfs_cover_path, Animal, GeomPath, NormSpec, PExp};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(p) = serde_json::from_slice::<PExp>(data) {
        let _ = NormSpec::new(p, 2);
    }
    if let Ok(path) = serde_json::from_slice::<GeomPath>(data) {
        if path.vertices.len() <= 64 && path.dim() <= 8 {
            if let Ok(norm) = NormSpec::new(PExp::Finite(2.0), path.dim()) {
                let len = path.length(&norm);
                assert!(len >= 0.0 || len.is_nan());
                let _ = path.to_animal();
            }
        }
    }
    if let Ok(animal) = serde_json::from_slice::<Animal>(data) {
        if animal.vertices.len() <= 64 && animal.dim() <= 8 {
            assert!(animal.is_connected());
            let _ = dfs_cover_path(&animal);
        }
    }
});
