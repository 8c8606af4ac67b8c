//! Small shared helpers: deterministic hashing/mixing, integer compositions,
//! and the CSV float format.

/// SplitMix64-style finalizer. Bijective on u64; used as a counter-based
/// generator by mixing (seed, counter) pairs, so any stream index can be
/// reproduced without advancing state.
pub fn mix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform [0,1) from the top 53 bits.
pub fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// FNV-1a over raw bytes; used for matrix-set checksums in experiment records.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// All vectors of `parts` nonnegative integers summing to `total`,
/// in lexicographic order.
pub fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; parts];
    fn rec(total: u32, idx: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if idx + 1 == cur.len() {
            cur[idx] = total;
            out.push(cur.clone());
            return;
        }
        for v in 0..=total {
            cur[idx] = v;
            rec(total - v, idx + 1, cur, out);
        }
    }
    if parts == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(total, 0, &mut cur, &mut out);
    out
}

/// Number of compositions of `total` into `parts` nonnegative integers,
/// i.e. binom(total + parts - 1, parts - 1); saturates at u64::MAX.
pub fn composition_count(total: u32, parts: usize) -> u64 {
    if parts == 0 {
        return u64::from(total == 0);
    }
    let mut c: u64 = 1;
    let k = (parts - 1) as u64;
    for i in 1..=k {
        c = match c.checked_mul(total as u64 + i) {
            Some(v) => v / i,
            None => return u64::MAX,
        };
    }
    c
}

/// Decimal with 17 significant digits; round-trips any f64.
pub fn fmt_g17(x: f64) -> String {
    format!("{:.16e}", x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mix64_is_deterministic_and_spread() {
        assert_eq!(mix64(1), mix64(1));
        assert_ne!(mix64(1), mix64(2));
        let f = unit_f64(mix64(42));
        assert!((0.0..1.0).contains(&f));
    }

    #[test]
    fn compositions_count_matches() {
        for total in 0..6u32 {
            for parts in 1..5usize {
                let list = compositions(total, parts);
                assert_eq!(list.len() as u64, composition_count(total, parts));
                assert!(list.iter().all(|c| c.iter().sum::<u32>() == total));
            }
        }
        assert_eq!(compositions(2, 2), vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
    }

    #[test]
    fn g17_round_trips() {
        for &x in &[0.1, 1.0 / 3.0, 2f64.powi(-40), 0.0, 12345.6789] {
            let s = fmt_g17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }
}
