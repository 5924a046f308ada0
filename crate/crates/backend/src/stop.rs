use rcm_core::token::{CALL_CLOSE_TEXT, CALL_OPEN_TEXT, RET_CLOSE_TEXT, RET_OPEN_TEXT};

/// Cuts `text` at the earliest stop sequence and keeps that sequence.
///
/// Endpoints usually strip the matched stop sequence from the reply. When
/// none is present but the endpoint reports it stopped on one
/// (`stopped == true`), the closer matching the last opener is restored.
pub fn truncate_at_stop(text: &str, stops: &[String], stopped: bool) -> String {
    let first = stops
        .iter()
        .filter(|s| !s.is_empty())
        .filter_map(|s| text.find(s.as_str()).map(|i| (i, s)))
        .min_by_key(|(i, s)| (*i, std::cmp::Reverse(s.len())));
    if let Some((i, s)) = first {
        return format!("{}{}", &text[..i], s);
    }
    if stopped {
        let call = text.rfind(CALL_OPEN_TEXT);
        let ret = text.rfind(RET_OPEN_TEXT);
        let closer = match (call, ret) {
            (Some(c), Some(r)) if c > r => Some(CALL_CLOSE_TEXT),
            (Some(_), None) => Some(CALL_CLOSE_TEXT),
            (_, Some(_)) => Some(RET_CLOSE_TEXT),
            (None, None) => None,
        };
        if let Some(c) = closer.filter(|c| stops.iter().any(|s| s == c)) {
            return format!("{text}{c}");
        }
    }
    text.to_string()
}
