//! Named weight profiles.
//!
//! | name       | weights                                                  |
//! |------------|----------------------------------------------------------|
//! | `min-only` | `alpha_1 = 1`, rest 0                                    |
//! | `fig5`     | `alpha_1 = alpha_2 = 1`, rest `1/(n-2)`                  |
//! | `fig6`     | `alpha_1 = alpha_n = 1`, rest 0                          |
//! | `fig7`     | `alpha_1 = alpha_2 = alpha_n = 1`, rest `1/(n-3)`        |
//! | `sqrt`     | `2/k` on the lowest `k = floor(sqrt n)` ranks, rest `1/(n-k)` |
//! | `uniform3` | `3/n` everywhere                                         |

use crate::dynamics::WeightVector;
use crate::error::{Error, Result};

pub const PRESET_NAMES: [&str; 6] = ["min-only", "fig5", "fig6", "fig7", "sqrt", "uniform3"];

/// Expands a named profile for population size `n`.
pub fn preset(name: &str, n: usize) -> Result<WeightVector> {
    let need = |min: usize| {
        if n < min {
            Err(Error::InvalidWeights(format!("preset {name} needs n >= {min}, got {n}")))
        } else {
            Ok(())
        }
    };
    let alphas = match name {
        "min-only" => {
            need(2)?;
            let mut a = vec![0.0; n];
            a[0] = 1.0;
            a
        }
        "fig5" => {
            need(4)?;
            let mut a = vec![1.0 / (n - 2) as f64; n];
            a[0] = 1.0;
            a[1] = 1.0;
            a
        }
        "fig6" => {
            need(3)?;
            let mut a = vec![0.0; n];
            a[0] = 1.0;
            a[n - 1] = 1.0;
            a
        }
        "fig7" => {
            need(5)?;
            let mut a = vec![1.0 / (n - 3) as f64; n];
            a[0] = 1.0;
            a[1] = 1.0;
            a[n - 1] = 1.0;
            a
        }
        "sqrt" => {
            need(4)?;
            let k = sqrt_head(n);
            (0..n)
                .map(|i| if i < k { 2.0 / k as f64 } else { 1.0 / (n - k) as f64 })
                .collect()
        }
        "uniform3" => {
            need(4)?;
            vec![3.0 / n as f64; n]
        }
        other => {
            return Err(Error::InvalidWeights(format!(
                "unknown preset {other:?}; known presets: {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    WeightVector::new(alphas)
}

/// Head length `floor(sqrt n)` of the `sqrt` profile.
pub fn sqrt_head(n: usize) -> usize {
    let mut k = (n as f64).sqrt() as usize;
    while (k + 1) * (k + 1) <= n {
        k += 1;
    }
    while k * k > n {
        k -= 1;
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_profiles() {
        let w = preset("fig6", 100).unwrap();
        assert_eq!(w.alphas()[0], 1.0);
        assert_eq!(w.alphas()[99], 1.0);
        assert!(w.alphas()[1..99].iter().all(|&a| a == 0.0));

        let w = preset("fig7", 100).unwrap();
        assert_eq!(&w.alphas()[..2], &[1.0, 1.0]);
        assert_eq!(w.alphas()[99], 1.0);
        assert!(w.alphas()[2..99].iter().all(|&a| a == 1.0 / 97.0));

        assert_eq!(preset("min-only", 4).unwrap().alphas(), &[1.0, 0.0, 0.0, 0.0]);

        let w = preset("fig5", 100).unwrap();
        assert!(w.alphas()[2..].iter().all(|&a| a == 1.0 / 98.0));
        assert!((w.q() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn sqrt_profile_masses() {
        let w = preset("sqrt", 400).unwrap();
        assert!((w.head_sum(20) - 2.0).abs() < 1e-12);
        assert!((w.q() - 3.0).abs() < 1e-12);
        assert_eq!(sqrt_head(99), 9);
    }

    #[test]
    fn unknown_or_too_small() {
        assert!(preset("fig9", 10).is_err());
        assert!(preset("fig5", 3).is_err());
        assert!(preset("fig7", 4).is_err());
    }
}
