/// Row-major run lengths of a binary mask, alternating background and
/// foreground and always starting with a (possibly empty) background run.
pub fn rle_encode(mask: &[bool]) -> Vec<u32> {
    let mut runs = Vec::new();
    let mut current = false;
    let mut n = 0u32;
    for &m in mask {
        if m != current {
            runs.push(n);
            n = 0;
            current = m;
        }
        n += 1;
    }
    runs.push(n);
    runs
}

/// Inverse of [`rle_encode`]; None if the runs do not sum to `len`.
pub fn rle_decode(runs: &[u32], len: usize) -> Option<Vec<bool>> {
    let mut out = Vec::with_capacity(len);
    for (k, &r) in runs.iter().enumerate() {
        out.extend(std::iter::repeat_n(k % 2 == 1, r as usize));
    }
    (out.len() == len).then_some(out)
}
