use num_rational::Ratio;
use serde::{Deserialize, Serialize};

/// Exact measure of a finite union of atoms, levels or cylinders.
pub type Measure = Ratio<u64>;

/// Wire form of a [`Measure`]: `{"num": .., "den": ..}` in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fraction {
    pub num: u64,
    pub den: u64,
}

impl From<Measure> for Fraction {
    fn from(m: Measure) -> Self {
        Fraction {
            num: *m.numer(),
            den: *m.denom(),
        }
    }
}

impl From<Fraction> for Measure {
    fn from(f: Fraction) -> Self {
        Measure::new(f.num, f.den)
    }
}

/// Lossy conversion used only for reporting.
pub fn to_f64(m: Measure) -> f64 {
    *m.numer() as f64 / *m.denom() as f64
}
