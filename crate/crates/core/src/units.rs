use serde::{Deserialize, Serialize};

/// Physical constants used by the bounds. Natural units (`hbar = k_b = 1`)
/// unless overridden.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Units {
    pub hbar: f64,
    pub k_b: f64,
}

impl Default for Units {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            k_b: 1.0,
        }
    }
}

impl Units {
    pub const SI: Units = Units {
        hbar: 1.054_571_817e-34,
        k_b: 1.380_649e-23,
    };
}
