use unicode_normalization::UnicodeNormalization;

fn is_invisible(c: char) -> bool {
    matches!(
        c,
        '\u{200B}' | '\u{200C}' | '\u{200D}' | '\u{2060}' | '\u{FEFF}'
    )
}

/// Canonical text form used everywhere downstream: zero-width characters and
/// byte-order marks removed, NFC-composed, whitespace runs collapsed to a single
/// space, no leading or trailing whitespace.
///
/// Invisible characters are stripped before composition so that a removed
/// character cannot leave an uncomposed sequence behind; this keeps the
/// function idempotent.
pub fn normalize_text(raw: &str) -> String {
    let composed: String = raw.chars().filter(|&c| !is_invisible(c)).nfc().collect();
    let mut out = String::with_capacity(composed.len());
    for word in composed.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}
