//! Small shared helpers.

use base64::engine::general_purpose::STANDARD_NO_PAD;
use base64::Engine;

/// True when `s` is exactly `len` lowercase hex characters.
pub fn is_lower_hex(s: &str, len: usize) -> bool {
    s.len() == len && s.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b))
}

/// Decode standard base64, accepting both padded and unpadded encodings.
pub fn lenient_base64_decode(s: &str) -> Option<Vec<u8>> {
    STANDARD_NO_PAD.decode(s.trim_end_matches('=')).ok()
}
