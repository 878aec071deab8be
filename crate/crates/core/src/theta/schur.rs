use crate::scalar::Scalar;

/// The rational degeneration of the genus-2 sigma function, z1^3/3 - z2.
pub fn sigma_schur<S: Scalar>(z1: &S, z2: &S) -> S {
    z1.clone() * z1.clone() * z1.clone() / S::from_i64(3) - z2.clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rat;

    #[test]
    fn values() {
        let q = |p, d| Rat::from_ratio(p, d);
        assert_eq!(sigma_schur(&q(0, 1), &q(0, 1)), q(0, 1));
        assert_eq!(sigma_schur(&q(1, 1), &q(1, 3)), q(0, 1));
        assert_eq!(sigma_schur(&q(3, 1), &q(1, 1)), q(8, 1));
    }
}
