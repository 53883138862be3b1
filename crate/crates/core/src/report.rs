use std::collections::BTreeMap;

use crate::numerics::{Complex, Real};

/// Named residuals, each normalized by the largest summand of its identity.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResidualReport {
    entries: BTreeMap<String, f64>,
}

impl ResidualReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, value: f64) {
        self.entries.insert(name.into(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest residual and its name. NaN counts as the worst possible value.
    pub fn worst(&self) -> Option<(&str, f64)> {
        self.iter().fold(None, |acc, (k, v)| match acc {
            Some((_, best)) if !(v > best || v.is_nan()) || best.is_nan() => acc,
            _ => Some((k, v)),
        })
    }

    pub fn merge(&mut self, other: ResidualReport) {
        self.entries.extend(other.entries);
    }
}

/// `|Σ terms| / max |term|`; zero when every term vanishes.
pub fn normalized_residual(terms: &[Real]) -> f64 {
    let mut sum = terms[0].clone();
    let mut scale = terms[0].abs();
    for t in &terms[1..] {
        sum += t;
        let a = t.abs();
        if a > scale {
            scale = a;
        }
    }
    if scale.is_zero() {
        return 0.0;
    }
    (sum.abs() / scale).to_f64()
}

pub fn normalized_residual_complex(terms: &[Complex]) -> f64 {
    let mut sum = terms[0].clone();
    let mut scale = terms[0].abs();
    for t in &terms[1..] {
        sum += t;
        let a = t.abs();
        if a > scale {
            scale = a;
        }
    }
    if scale.is_zero() {
        return 0.0;
    }
    (sum.abs() / scale).to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Precision;

    #[test]
    fn normalization_by_largest_term() {
        let p = Precision::default();
        let t = [
            Real::from_f64(4.0, p),
            Real::from_f64(-3.0, p),
            Real::from_f64(-0.5, p),
        ];
        assert_eq!(normalized_residual(&t), 0.125);
        let z = [Real::zero(p), Real::zero(p)];
        assert_eq!(normalized_residual(&z), 0.0);
    }

    #[test]
    fn worst_entry_prefers_nan() {
        let mut r = ResidualReport::new();
        r.insert("a", 1e-40);
        r.insert("b", 1e-20);
        assert_eq!(r.worst(), Some(("b", 1e-20)));
        r.insert("c", f64::NAN);
        assert_eq!(r.worst().unwrap().0, "c");
    }
}
