//! Minimal Netpbm codecs: 8-bit binary PPM (P6), 16-bit binary PGM (P5) and
//! grayscale PFM (`Pf`, little-endian, bottom row first).

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum NetpbmError {
    #[error("bad header: {0}")]
    Header(String),
    #[error("payload has {got} bytes, expected {expected}")]
    Truncated { got: usize, expected: usize },
    #[error("buffer has {got} samples for a {width}x{height} image")]
    Size { got: usize, width: usize, height: usize },
}

fn check_len(got: usize, width: usize, height: usize, channels: usize) -> Result<(), NetpbmError> {
    if width == 0 || height == 0 || got != width * height * channels {
        return Err(NetpbmError::Size { got, width, height });
    }
    Ok(())
}

/// Maps a [0, 1] radiance to an 8-bit code (round half up, clamped).
pub fn to_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8
}

pub fn encode_ppm(width: usize, height: usize, rgb: &[u8]) -> Result<Vec<u8>, NetpbmError> {
    check_len(rgb.len(), width, height, 3)?;
    let mut out = format!("P6\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(rgb);
    Ok(out)
}

pub fn encode_pgm16(width: usize, height: usize, values: &[u16]) -> Result<Vec<u8>, NetpbmError> {
    check_len(values.len(), width, height, 1)?;
    let mut out = format!("P5\n{width} {height}\n65535\n").into_bytes();
    out.reserve(values.len() * 2);
    for v in values {
        out.extend_from_slice(&v.to_be_bytes());
    }
    Ok(out)
}

/// `values` are row-major from the top row. Non-finite samples are written
/// as 0.0.
pub fn encode_pfm(width: usize, height: usize, values: &[f32]) -> Result<Vec<u8>, NetpbmError> {
    check_len(values.len(), width, height, 1)?;
    let mut out = format!("Pf\n{width} {height}\n-1.0\n").into_bytes();
    out.reserve(values.len() * 4);
    for row in values.chunks(width).rev() {
        for v in row {
            let v = if v.is_finite() { *v } else { 0.0 };
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

/// Splits off `n` whitespace-separated header tokens, skipping `#` comments.
/// Returns the tokens and the offset of the payload (after one whitespace).
fn header_tokens(data: &[u8], n: usize) -> Result<(Vec<String>, usize), NetpbmError> {
    let mut tokens = Vec::with_capacity(n);
    let mut i = 0;
    while tokens.len() < n {
        while i < data.len() && data[i].is_ascii_whitespace() {
            i += 1;
        }
        if i < data.len() && data[i] == b'#' {
            while i < data.len() && data[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        while i < data.len() && !data[i].is_ascii_whitespace() {
            i += 1;
        }
        if start == i {
            return Err(NetpbmError::Header("unexpected end of header".into()));
        }
        tokens.push(String::from_utf8_lossy(&data[start..i]).into_owned());
    }
    if i >= data.len() {
        return Err(NetpbmError::Header("missing payload".into()));
    }
    Ok((tokens, i + 1))
}

fn dims(tokens: &[String]) -> Result<(usize, usize), NetpbmError> {
    let parse = |s: &str| s.parse::<usize>().map_err(|_| NetpbmError::Header(format!("bad dimension {s:?}")));
    let (w, h) = (parse(&tokens[1])?, parse(&tokens[2])?);
    if w == 0 || h == 0 {
        return Err(NetpbmError::Header("zero dimension".into()));
    }
    Ok((w, h))
}

fn payload(data: &[u8], start: usize, expected: usize) -> Result<&[u8], NetpbmError> {
    let got = data.len().saturating_sub(start);
    if got < expected {
        return Err(NetpbmError::Truncated { got, expected });
    }
    Ok(&data[start..start + expected])
}

pub fn decode_ppm(data: &[u8]) -> Result<(usize, usize, Vec<u8>), NetpbmError> {
    let (t, off) = header_tokens(data, 4)?;
    if t[0] != "P6" || t[3] != "255" {
        return Err(NetpbmError::Header(format!("expected P6 maxval 255, got {} {}", t[0], t[3])));
    }
    let (w, h) = dims(&t)?;
    Ok((w, h, payload(data, off, w * h * 3)?.to_vec()))
}

pub fn decode_pgm16(data: &[u8]) -> Result<(usize, usize, Vec<u16>), NetpbmError> {
    let (t, off) = header_tokens(data, 4)?;
    if t[0] != "P5" || t[3] != "65535" {
        return Err(NetpbmError::Header(format!("expected P5 maxval 65535, got {} {}", t[0], t[3])));
    }
    let (w, h) = dims(&t)?;
    let bytes = payload(data, off, w * h * 2)?;
    Ok((w, h, bytes.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect()))
}

/// Returns rows top-first, undoing the bottom-up storage order.
pub fn decode_pfm(data: &[u8]) -> Result<(usize, usize, Vec<f32>), NetpbmError> {
    let (t, off) = header_tokens(data, 4)?;
    if t[0] != "Pf" {
        return Err(NetpbmError::Header(format!("expected Pf, got {}", t[0])));
    }
    let (w, h) = dims(&t)?;
    let scale: f64 = t[3]
        .parse()
        .map_err(|_| NetpbmError::Header(format!("bad scale {:?}", t[3])))?;
    let bytes = payload(data, off, w * h * 4)?;
    let read = |c: &[u8]| {
        let b = [c[0], c[1], c[2], c[3]];
        if scale < 0.0 {
            f32::from_le_bytes(b)
        } else {
            f32::from_be_bytes(b)
        }
    };
    let rows: Vec<Vec<f32>> = bytes.chunks_exact(w * 4).map(|r| r.chunks_exact(4).map(read).collect()).collect();
    Ok((w, h, rows.into_iter().rev().flatten().collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ppm_header_and_payload() {
        let data = encode_ppm(2, 1, &[1, 2, 3, 4, 5, 6]).unwrap();
        assert_eq!(&data[..11], b"P6\n2 1\n255\n");
        assert_eq!(decode_ppm(&data).unwrap(), (2, 1, vec![1, 2, 3, 4, 5, 6]));
    }

    #[test]
    fn pgm_is_big_endian() {
        let data = encode_pgm16(2, 1, &[0x0102, 65535]).unwrap();
        assert_eq!(&data[data.len() - 4..], &[0x01, 0x02, 0xff, 0xff]);
    }

    #[test]
    fn pfm_stores_bottom_row_first_and_zeroes_inf() {
        let data = encode_pfm(1, 2, &[1.0, f32::INFINITY]).unwrap();
        let header = b"Pf\n1 2\n-1.0\n";
        assert_eq!(&data[..header.len()], header);
        let body = &data[header.len()..];
        assert_eq!(&body[..4], &0.0f32.to_le_bytes());
        assert_eq!(&body[4..], &1.0f32.to_le_bytes());
        assert_eq!(decode_pfm(&data).unwrap().2, vec![1.0, 0.0]);
    }

    #[test]
    fn rejects_bad_sizes_and_headers() {
        assert!(encode_ppm(2, 2, &[0; 3]).is_err());
        assert!(decode_ppm(b"P5\n1 1\n255\n\0").is_err());
        assert!(matches!(decode_pgm16(b"P5\n2 2\n65535\n\0\0"), Err(NetpbmError::Truncated { .. })));
    }

    #[test]
    fn comments_in_header_are_skipped() {
        let (w, h, px) = decode_ppm(b"P6\n# made by hand\n1 1\n255\n\x01\x02\x03").unwrap();
        assert_eq!((w, h, px), (1, 1, vec![1, 2, 3]));
    }

    #[test]
    fn u8_quantization() {
        assert_eq!(to_u8(0.0), 0);
        assert_eq!(to_u8(1.0), 255);
        assert_eq!(to_u8(2.0), 255);
        assert_eq!(to_u8(0.5), 128);
    }

    proptest! {
        #[test]
        fn codecs_round_trip(w in 1usize..6, h in 1usize..6, seed in any::<u64>()) {
            let n = w * h;
            let mut s = seed;
            let mut next = || { s = crate::rng::splitmix64(s); s };
            let rgb: Vec<u8> = (0..3 * n).map(|_| next() as u8).collect();
            let ids: Vec<u16> = (0..n).map(|_| next() as u16).collect();
            let depth: Vec<f32> = (0..n).map(|_| (next() % 10_000) as f32 * 0.001).collect();
            prop_assert_eq!(decode_ppm(&encode_ppm(w, h, &rgb).unwrap()).unwrap(), (w, h, rgb));
            prop_assert_eq!(decode_pgm16(&encode_pgm16(w, h, &ids).unwrap()).unwrap(), (w, h, ids));
            prop_assert_eq!(decode_pfm(&encode_pfm(w, h, &depth).unwrap()).unwrap(), (w, h, depth));
        }
    }
}
