//! Small numeric and hashing helpers shared across modules.

/// Quintic smoothstep: 0 for x <= 0, 1 for x >= 1, C2-continuous in between.
pub fn smootherstep(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        x * x * x * (10.0 + x * (-15.0 + 6.0 * x))
    }
}

/// Derivative of [`smootherstep`].
pub fn smootherstep_d(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        x * x * (30.0 + x * (-60.0 + 30.0 * x))
    }
}

/// Deterministic 64-bit FNV-1a over arbitrary bytes. Used to derive child
/// seeds so runs reproduce bit-for-bit regardless of platform or scheduling.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Derive a child seed from a parent seed, a purpose tag and an index.
pub fn derive_seed(parent: u64, tag: &str, index: u64) -> u64 {
    let mut bytes = Vec::with_capacity(8 + tag.len() + 8);
    bytes.extend_from_slice(&parent.to_le_bytes());
    bytes.extend_from_slice(tag.as_bytes());
    bytes.extend_from_slice(&index.to_le_bytes());
    fnv1a(&bytes)
}

/// Max absolute component of a flat vector.
pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Root mean square of a flat vector.
pub fn rms(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
}

/// Euclidean norm of a flat vector.
pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Dot product of two flat vectors.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
