//! Small CSV plumbing shared by the report writers. All CSVs are UTF-8 with
//! LF line endings and minimal RFC-4180 quoting.

use std::borrow::Cow;

/// Quotes a field only when it contains a separator, quote, or line break.
pub fn csv_field(s: &str) -> Cow<'_, str> {
    if s.contains([',', '"', '\n', '\r']) {
        Cow::Owned(format!("\"{}\"", s.replace('"', "\"\"")))
    } else {
        Cow::Borrowed(s)
    }
}
