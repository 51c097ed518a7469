//! Fixture displays shared by the benchmarks.

use canonlab::{Base, DisplayData};

/// Height-one display of the multiplicative group over Z_p.
pub fn multiplicative(p: u32, len: usize) -> DisplayData {
    DisplayData::multiplicative(Base::new(p, 1).expect("prime"), len)
}

/// Height-two display with A = [pi], B = C = 1, D = 0 over Z_p[pi], pi^e = p.
pub fn pi_display(p: u32, e: u32, len: usize) -> DisplayData {
    let k = Base::new(p, e).expect("prime");
    DisplayData::from_teichmuller(k, 1, &[vec![k.uniformizer(), k.one()], vec![k.one(), k.zero()]], len)
        .expect("unit determinant")
}

/// Product of two copies of the multiplicative group.
pub fn block_multiplicative(p: u32, len: usize) -> DisplayData {
    let k = Base::new(p, 1).expect("prime");
    DisplayData::from_teichmuller(k, 2, &[vec![k.one(), k.zero()], vec![k.zero(), k.one()]], len)
        .expect("identity")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_triangular() {
        assert!(multiplicative(3, 3).is_triangular());
        assert!(pi_display(3, 2, 3).is_triangular());
        assert!(block_multiplicative(3, 3).is_triangular());
    }
}
