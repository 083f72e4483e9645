//! The states `|psi_x> = N^{-1/2} sum_i (-1)^{x_i} |i>`.

use crate::bits::{hamming, BitString};
use crate::error::Result;
use crate::qsim::oracle::{apply_view, OracleMode, OracleView, QueryCounter};
use crate::qsim::register::SimRegister;

/// One phase query on the uniform superposition.
pub fn prepare_psi_state(view: &OracleView<'_>, counter: &mut QueryCounter) -> Result<SimRegister> {
    let mut s = SimRegister::uniform(view.len());
    apply_view(&mut s, &view.clone().with_mode(OracleMode::Phase), counter)?;
    Ok(s)
}

/// `<psi_x|psi_y> = 1 - 2 Ham(x, y) / N`.
pub fn inner_product_psi(x: &BitString, y: &BitString) -> Result<f64> {
    Ok(1.0 - 2.0 * hamming(x, y)? as f64 / x.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::oracle::Oracle;

    #[test]
    fn examples() {
        let mut c = QueryCounter::new();
        let s = prepare_psi_state(&Oracle::phase(BitString::zeros(5)).view(), &mut c).unwrap();
        assert_eq!(s, SimRegister::uniform(5));
        let t = prepare_psi_state(&Oracle::phase(BitString::ones(5)).view(), &mut c).unwrap();
        assert!((s.inner(&t).re + 1.0).abs() < 1e-12);
        assert_eq!(c.count(), 2);

        let bs = |s: &str| s.parse::<BitString>().unwrap();
        assert_eq!(inner_product_psi(&bs("0101"), &bs("0101")).unwrap(), 1.0);
        assert_eq!(inner_product_psi(&bs("0000"), &bs("0011")).unwrap(), 0.0);
        assert_eq!(inner_product_psi(&bs("0000"), &bs("0111")).unwrap(), -0.5);
    }

    #[test]
    fn formula_matches_simulation_all_pairs() {
        for n in [1usize, 3, 6] {
            let states: Vec<(BitString, SimRegister)> = (0..1u64 << n)
                .map(|v| {
                    let x = BitString::new(n, v).unwrap();
                    let s = prepare_psi_state(&Oracle::phase(x).view(), &mut QueryCounter::new())
                        .unwrap();
                    (x, s)
                })
                .collect();
            for (x, sx) in &states {
                for (y, sy) in &states {
                    let ip = sx.inner(sy);
                    assert!((ip.re - inner_product_psi(x, y).unwrap()).abs() < 1e-12);
                    assert!(ip.im.abs() < 1e-12);
                }
            }
        }
    }
}
