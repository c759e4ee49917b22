//! Exact integers cross the wire as decimal strings.

use serde::Serializer;

pub fn as_string<S: Serializer>(value: &u128, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(value)
}
