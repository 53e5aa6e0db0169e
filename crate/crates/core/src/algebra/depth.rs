use num_rational::Ratio;

use super::AlgebraError;

/// `(4^N − 1)/(K·W)`: the circuit depth below which a circuit of `K`
/// parameterized gates per layer, each with `W` real parameters, cannot
/// reach a set of positive measure in `SU(2^N)`.
pub fn depth_lower_bound(n_qubits: u32, k: u64, w: u64) -> Result<Ratio<u128>, AlgebraError> {
    if k == 0 || w == 0 {
        return Err(AlgebraError::InvalidArgument("K and W must be at least 1".into()));
    }
    let dim = 4u128
        .checked_pow(n_qubits)
        .ok_or(AlgebraError::Overflow)?
        - 1;
    let per_layer = (k as u128).checked_mul(w as u128).ok_or(AlgebraError::Overflow)?;
    Ok(Ratio::new(dim, per_layer))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(depth_lower_bound(1, 2, 1).unwrap(), Ratio::new(3, 2));
        assert_eq!(depth_lower_bound(2, 15, 1).unwrap(), Ratio::from_integer(1));
        assert_eq!(
            depth_lower_bound(10, 100, 5).unwrap(),
            Ratio::new(4u128.pow(10) - 1, 500)
        );
    }

    #[test]
    fn errors() {
        assert!(depth_lower_bound(1, 0, 1).is_err());
        assert!(matches!(
            depth_lower_bound(64, 1, 1),
            Err(AlgebraError::Overflow)
        ));
    }
}
