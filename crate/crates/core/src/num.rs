//! Small numeric helpers shared by the serializers.

use crate::error::{Error, Result};

pub use num_complex::Complex64;

/// Fixed-point decimal with 17 significant digits, enough to round-trip any `f64`.
pub fn fixed(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0.0000000000000000".to_string();
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (16 - magnitude).max(1) as usize;
    format!("{v:.decimals$}")
}

pub fn parse_f64(field: &str) -> Result<f64> {
    field.trim().parse().map_err(|_| Error::Parse(format!("bad number {field:?}")))
}

/// Bits of an integer index, most significant first.
pub fn bit(index: usize, qubit: usize, qubits: usize) -> usize {
    (index >> (qubits - 1 - qubit)) & 1
}

/// Smallest `q` with `2^q >= len`.
pub fn qubits_for(len: usize) -> usize {
    len.next_power_of_two().trailing_zeros() as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_round_trips() {
        for v in [0.5, -1.0, 1e-5, 123456.789, std::f64::consts::PI, -2.5e-12, 1.0 / 3.0] {
            let s = fixed(v);
            assert!(!s.contains('e'));
            assert_eq!(parse_f64(&s).unwrap(), v, "{s}");
        }
        assert_eq!(fixed(0.5), "0.50000000000000000");
    }

    #[test]
    fn qubit_counts() {
        assert_eq!(qubits_for(1), 0);
        assert_eq!(qubits_for(7), 3);
        assert_eq!(qubits_for(8), 3);
        assert_eq!(qubits_for(9), 4);
        assert_eq!(bit(0b101, 0, 3), 1);
        assert_eq!(bit(0b101, 1, 3), 0);
    }
}
