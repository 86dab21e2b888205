//! Brute-force servability, kept independent of the recovery module.
//!
//! Spans are enumerated coefficient by coefficient and every assignment of
//! columns to request units is tried. Only usable for tiny codes.

use crate::linalg::GeneratorMatrix;
use crate::recovery::Request;

/// Largest `n` accepted by [`brute_force_servable`].
pub const ORACLE_MAX_N: usize = 10;

/// Whether `target` is a linear combination of the columns in `mask`,
/// by trying every coefficient vector.
pub fn in_span_exhaustive(g: &GeneratorMatrix, mask: u64, target: &[u8]) -> bool {
    let f = g.field();
    let q = f.order();
    let cols: Vec<Vec<u8>> = (0..g.n()).filter(|&j| mask >> j & 1 == 1).map(|j| g.column(j)).collect();
    let mut coeffs = vec![0usize; cols.len()];
    loop {
        let mut sum = vec![0u8; g.k()];
        for (c, col) in coeffs.iter().zip(&cols) {
            for (s, &x) in sum.iter_mut().zip(col) {
                *s = f.add(*s, f.mul(*c as u8, x));
            }
        }
        if sum == target {
            return true;
        }
        let mut i = 0;
        loop {
            if i == coeffs.len() {
                return false;
            }
            coeffs[i] += 1;
            if coeffs[i] < q {
                break;
            }
            coeffs[i] = 0;
            i += 1;
        }
    }
}

/// Tries every way of giving each column to one request unit or to none,
/// and accepts when every unit's columns span its target.
pub fn brute_force_servable(g: &GeneratorMatrix, req: &Request) -> bool {
    let n = g.n();
    assert!(n <= ORACLE_MAX_N, "oracle is limited to n <= {ORACLE_MAX_N}");
    let units = req.units();
    let labels = units.len() + 1;
    assert!((labels as u64).checked_pow(n as u32).is_some_and(|c| c <= 1 << 26), "oracle instance too large");

    let spans: Vec<Vec<bool>> = units
        .iter()
        .map(|target| (0..1u64 << n).map(|mask| in_span_exhaustive(g, mask, target)).collect())
        .collect();
    let mut label = vec![0usize; n];
    loop {
        let mut masks = vec![0u64; units.len()];
        for (j, &l) in label.iter().enumerate() {
            if l > 0 {
                masks[l - 1] |= 1 << j;
            }
        }
        if masks.iter().enumerate().all(|(u, &m)| spans[u][m as usize]) {
            return true;
        }
        let mut j = 0;
        loop {
            if j == n {
                return false;
            }
            label[j] += 1;
            if label[j] < labels {
                break;
            }
            label[j] = 0;
            j += 1;
        }
    }
}
