/// Lowercased alphanumeric word tokens, in order.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Canonical form of a terminal pattern: its tokens joined by single spaces.
///
/// Patterns with no word characters keep their trimmed text so distinct
/// patterns stay distinct; they never match anything.
pub fn normalize_pattern(pattern: &str) -> String {
    let tokens = tokenize(pattern);
    if tokens.is_empty() {
        pattern.trim().to_string()
    } else {
        tokens.join(" ")
    }
}

/// Whether `needle` occurs contiguously in `haystack`.
pub fn contains_phrase(haystack: &[String], needle: &[String]) -> bool {
    !needle.is_empty() && haystack.windows(needle.len()).any(|w| w == needle)
}
