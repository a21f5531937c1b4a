use serde::{Deserialize, Serialize};

use super::{BinaryMask, MaskError};

/// Run-length encoded mask: row-major runs alternating unset/set, starting
/// with an unset run (which may be zero).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RleMask {
    pub width: u32,
    pub height: u32,
    pub runs: Vec<u64>,
}

impl From<&BinaryMask> for RleMask {
    fn from(m: &BinaryMask) -> Self {
        let mut runs = Vec::new();
        let mut current = false;
        let mut len = 0u64;
        for &b in m.bits() {
            if b == current {
                len += 1;
            } else {
                runs.push(len);
                current = b;
                len = 1;
            }
        }
        runs.push(len);
        Self {
            width: m.width(),
            height: m.height(),
            runs,
        }
    }
}

impl TryFrom<&RleMask> for BinaryMask {
    type Error = MaskError;

    fn try_from(rle: &RleMask) -> Result<Self, MaskError> {
        let expected = u64::from(rle.width) * u64::from(rle.height);
        let total: u64 = rle.runs.iter().sum();
        if total != expected {
            return Err(MaskError::InvalidRle(format!(
                "runs cover {total} pixels, expected {expected}"
            )));
        }
        let mut bits = Vec::with_capacity(expected as usize);
        for (i, &run) in rle.runs.iter().enumerate() {
            bits.extend(std::iter::repeat_n(i % 2 == 1, run as usize));
        }
        BinaryMask::from_bits(rle.width, rle.height, bits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn starts_with_zero_run() {
        let mut m = BinaryMask::new(3, 2);
        m.set(0, 0, true);
        m.set(1, 0, true);
        m.set(2, 1, true);
        let rle = RleMask::from(&m);
        assert_eq!(rle.runs, vec![0, 2, 3, 1]);
        let json = serde_json::to_value(&rle).unwrap();
        assert_eq!(json, serde_json::json!({"width": 3, "height": 2, "runs": [0, 2, 3, 1]}));
    }

    #[test]
    fn rejects_wrong_total() {
        let rle = RleMask {
            width: 2,
            height: 2,
            runs: vec![1, 1],
        };
        assert!(matches!(BinaryMask::try_from(&rle), Err(MaskError::InvalidRle(_))));
    }

    proptest! {
        #[test]
        fn round_trips(bits in proptest::collection::vec(any::<bool>(), 35)) {
            let m = BinaryMask::from_bits(7, 5, bits).unwrap();
            let back = BinaryMask::try_from(&RleMask::from(&m)).unwrap();
            prop_assert_eq!(back, m);
        }
    }
}
