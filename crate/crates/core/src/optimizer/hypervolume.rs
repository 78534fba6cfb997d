//! Dominated hypervolume for two and three minimised objectives.
//!
//! Finite doubles are dyadic rationals, so the volume is accumulated exactly
//! in integers and rounded once. The rounding is monotone, hence adding a
//! point to a set never lowers the reported value.

use num_bigint::{BigInt, BigUint, Sign};

use crate::error::{Error, Result};

/// Every finite double is an integer multiple of 2^-1074.
const FIXED_EXP: u64 = 1074;

fn fixed(x: f64) -> BigInt {
    let bits = x.to_bits();
    let exp = (bits >> 52) & 0x7ff;
    let frac = bits & ((1 << 52) - 1);
    let (mantissa, shift) = if exp == 0 { (frac, 0) } else { (frac | 1 << 52, exp - 1) };
    let magnitude = BigUint::from(mantissa) << shift;
    let sign = if x.is_sign_negative() { Sign::Minus } else { Sign::Plus };
    BigInt::from_biguint(sign, magnitude)
}

/// `value · 2^-(FIXED_EXP · factors)` for a non-negative `value`, truncated to
/// 64 significant bits and then rounded to nearest; both steps are monotone.
fn to_f64(value: &BigInt, factors: u64) -> f64 {
    let n = value.magnitude();
    let shift = n.bits().saturating_sub(64);
    let top = (n >> shift).to_u64_digits().first().copied().unwrap_or(0) as f64;
    let mut exp = shift as i64 - (FIXED_EXP * factors) as i64;
    let mut f = top;
    while exp > 512 {
        f *= 2f64.powi(512);
        exp -= 512;
    }
    while exp < -512 {
        f *= 2f64.powi(-512);
        exp += 512;
    }
    f * 2f64.powi(exp as i32)
}

/// Area of an x-sorted slice, scaled by 2^(2 · FIXED_EXP).
fn area_fixed(sorted: &[[BigInt; 2]], reference: &[BigInt; 2]) -> BigInt {
    let mut area = BigInt::ZERO;
    let mut best_y: Option<&BigInt> = None;
    for (i, p) in sorted.iter().enumerate() {
        best_y = Some(best_y.map_or(&p[1], |b| b.min(&p[1])));
        let next_x = sorted.get(i + 1).map_or(&reference[0], |q| &q[0]);
        area += (next_x - &p[0]) * (&reference[1] - best_y.expect("set above"));
    }
    area
}

fn below(p: &[f64], reference: &[f64]) -> bool {
    p.iter().zip(reference).all(|(x, r)| x < r)
}

/// Area dominated by `points` and bounded by `reference`.
pub fn hypervolume_2d(points: &[[f64; 2]], reference: [f64; 2]) -> f64 {
    let mut pts: Vec<[f64; 2]> = points.iter().copied().filter(|p| below(p, &reference)).collect();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let sorted: Vec<[BigInt; 2]> = pts.iter().map(|p| [fixed(p[0]), fixed(p[1])]).collect();
    to_f64(&area_fixed(&sorted, &reference.map(fixed)), 2)
}

/// Volume dominated by `points` and bounded by `reference`; slices along the
/// third objective.
pub fn hypervolume_3d(points: &[[f64; 3]], reference: [f64; 3]) -> f64 {
    let mut pts: Vec<[f64; 3]> = points.iter().copied().filter(|p| below(p, &reference)).collect();
    pts.sort_by(|a, b| a[2].total_cmp(&b[2]));
    let ref_xy = [fixed(reference[0]), fixed(reference[1])];
    let mut keys: Vec<[f64; 2]> = Vec::with_capacity(pts.len());
    let mut slice: Vec<[BigInt; 2]> = Vec::with_capacity(pts.len());
    let mut volume = BigInt::ZERO;
    for (i, p) in pts.iter().enumerate() {
        let key = [p[0], p[1]];
        let at = keys.partition_point(|k| k[0].total_cmp(&key[0]).then(k[1].total_cmp(&key[1])).is_lt());
        keys.insert(at, key);
        slice.insert(at, [fixed(p[0]), fixed(p[1])]);
        let next_z = pts.get(i + 1).map_or(reference[2], |q| q[2]);
        if next_z > p[2] {
            volume += (fixed(next_z) - fixed(p[2])) * area_fixed(&slice, &ref_xy);
        }
    }
    to_f64(&volume, 3)
}

pub fn hypervolume<V: AsRef<[f64]>>(points: &[V], reference: &[f64]) -> Result<f64> {
    match reference.len() {
        2 => Ok(hypervolume_2d(
            &points
                .iter()
                .map(|p| [p.as_ref()[0], p.as_ref()[1]])
                .collect::<Vec<_>>(),
            [reference[0], reference[1]],
        )),
        3 => Ok(hypervolume_3d(
            &points
                .iter()
                .map(|p| [p.as_ref()[0], p.as_ref()[1], p.as_ref()[2]])
                .collect::<Vec<_>>(),
            [reference[0], reference[1], reference[2]],
        )),
        d => Err(Error::Argument(format!(
            "hypervolume supports 2 or 3 objectives, got {d}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn boxes() {
        assert_eq!(hypervolume_3d(&[[0.0, 0.0, 0.0]], [1.0, 2.0, 3.0]), 6.0);
        assert_eq!(hypervolume_3d(&[], [1.0, 1.0, 1.0]), 0.0);
        assert_eq!(hypervolume_2d(&[[0.0, 1.0], [1.0, 0.0]], [2.0, 2.0]), 3.0);
        // union of two unit-offset boxes: 2·2·1 + 1·1·1
        assert_eq!(
            hypervolume_3d(&[[0.0, 0.0, 1.0], [1.0, 1.0, 0.0]], [2.0, 2.0, 2.0]),
            5.0
        );
    }

    proptest! {
        #[test]
        fn matches_grid_count(pts in prop::collection::vec((0u8..6, 0u8..6, 0u8..6), 1..8)) {
            let p: Vec<[f64; 3]> = pts.iter().map(|&(a, b, c)| [a as f64, b as f64, c as f64]).collect();
            // count dominated unit cells of the 6³ grid
            let mut cells = 0;
            for x in 0..6 {
                for y in 0..6 {
                    for z in 0..6 {
                        if p.iter().any(|q| q[0] <= x as f64 && q[1] <= y as f64 && q[2] <= z as f64) {
                            cells += 1;
                        }
                    }
                }
            }
            prop_assert_eq!(hypervolume_3d(&p, [6.0, 6.0, 6.0]), cells as f64);
        }

        #[test]
        fn adding_a_point_never_lowers_volume(
            pts in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0), 1..30),
            extra in (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0),
        ) {
            let mut p: Vec<[f64; 3]> = pts.iter().map(|&(a, b, c)| [a, b, c]).collect();
            let before = hypervolume_3d(&p, [1.1, 1.1, 1.1]);
            p.push([extra.0, extra.1, extra.2]);
            prop_assert!(hypervolume_3d(&p, [1.1, 1.1, 1.1]) >= before);
        }
    }
}
