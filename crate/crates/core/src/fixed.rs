//! Fixed six-decimal JSON numbers for reproducible reports and manifests.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;

/// A real serialized with exactly six decimals; non-finite values become `null`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Fixed6(pub f64);

impl Fixed6 {
    pub fn text(self) -> String {
        if self.0.is_finite() {
            let s = format!("{:.6}", self.0);
            // avoid "-0.000000"
            if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
                s[1..].to_string()
            } else {
                s
            }
        } else {
            "null".to_string()
        }
    }
}

impl From<f64> for Fixed6 {
    fn from(x: f64) -> Self {
        Fixed6(x)
    }
}

impl Serialize for Fixed6 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let raw = RawValue::from_string(self.text()).map_err(serde::ser::Error::custom)?;
        raw.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Fixed6 {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let v = Option::<f64>::deserialize(deserializer)?;
        Ok(Fixed6(v.unwrap_or(f64::NAN)))
    }
}

/// `#[serde(with = "fixed::six")]` for plain `f64` fields.
pub mod six {
    use super::Fixed6;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        Fixed6(*x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Fixed6::deserialize(d)?.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_six_decimals() {
        assert_eq!(serde_json::to_string(&Fixed6(0.5)).unwrap(), "0.500000");
        assert_eq!(
            serde_json::to_string(&Fixed6(1.0 / 3.0)).unwrap(),
            "0.333333"
        );
        assert_eq!(serde_json::to_string(&Fixed6(-1e-9)).unwrap(), "0.000000");
        assert_eq!(
            serde_json::to_string(&Fixed6(f64::INFINITY)).unwrap(),
            "null"
        );
        let back: Fixed6 = serde_json::from_str("0.250000").unwrap();
        assert_eq!(back.0, 0.25);
    }
}
