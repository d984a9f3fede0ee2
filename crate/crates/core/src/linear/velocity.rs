use std::collections::BTreeMap;

use super::{StreamMode, SwirlMode};
use crate::error::{Error, Result};

/// Fourier modes of a velocity field, keyed by n.
#[derive(Debug, Clone)]
pub struct VelocityField {
    pub modes: BTreeMap<i64, (StreamMode, SwirlMode)>,
    pub truncation: usize,
}

impl VelocityField {
    pub fn get(&self, n: i64) -> Option<&(StreamMode, SwirlMode)> {
        self.modes.get(&n)
    }
}

/// Collects modes by n. With `real` set, every n > 0 without a partner gets
/// the conjugate mode −n.
pub fn assemble_velocity(modes: Vec<(StreamMode, SwirlMode)>, real: bool) -> Result<VelocityField> {
    let mut map = BTreeMap::new();
    for (s, t) in modes {
        if s.n != t.n {
            return Err(Error::Input(format!("stream mode {} paired with swirl mode {}", s.n, t.n)));
        }
        if s.phi.len() != t.v.len() {
            return Err(Error::Input(format!("mode {} uses mismatched grids", s.n)));
        }
        let n = s.n;
        if map.insert(n, (s, t)).is_some() {
            return Err(Error::Input(format!("duplicate mode n={n}")));
        }
    }
    if real {
        let missing: Vec<i64> = map.keys().filter(|&&n| n > 0 && !map.contains_key(&-n)).copied().collect();
        for n in missing {
            let (s, t) = &map[&n];
            let pair = (s.conjugate(), t.conjugate());
            map.insert(-n, pair);
        }
    }
    let truncation = map.keys().map(|n| n.unsigned_abs() as usize).max().unwrap_or(0);
    Ok(VelocityField { modes: map, truncation })
}
