#![allow(dead_code)]

use relcharge_core::{FieldSpec, Profile};

pub fn plane_wave() -> FieldSpec {
    FieldSpec::PlaneWave {
        f1: Profile::Cosine {
            amplitude: 1.0,
            omega: 1.0,
        },
        f2: Profile::zero(),
    }
}

pub fn circular_wave() -> FieldSpec {
    FieldSpec::PlaneWave {
        f1: Profile::Cosine {
            amplitude: 0.7,
            omega: 1.3,
        },
        f2: Profile::Sinusoid {
            amplitude: 0.4,
            omega: 0.9,
        },
    }
}

pub fn tm_mode() -> FieldSpec {
    FieldSpec::TmMode {
        f: Profile::Cosine {
            amplitude: 0.3,
            omega: 1.0,
        },
    }
}

pub fn undulator() -> FieldSpec {
    FieldSpec::Undulator { b0: 0.5, omega: 1.0 }
}

pub fn helical() -> FieldSpec {
    FieldSpec::HelicalBoost { f0: 1.0, omega: 0.2 }
}

pub fn vortex() -> FieldSpec {
    FieldSpec::Vortex { b0: 0.1, omega: 1.0 }
}

/// Every background with built-in invariants.
pub fn systems() -> Vec<FieldSpec> {
    vec![plane_wave(), tm_mode(), undulator(), helical(), vortex()]
}

/// Every background including the free field and a second plane wave.
pub fn all_specs() -> Vec<FieldSpec> {
    let mut v = vec![FieldSpec::Free, circular_wave()];
    v.extend(systems());
    v
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}
