//! The closed set of languages handled by the toolkit.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Two-letter language code.
///
/// `Ord` is lexicographic on the code string, which is the canonical order
/// for language-pair keys. [`LangCode::TABLE_ORDER`] is the presentation
/// order used by corpus grids.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum LangCode {
    Bn,
    En,
    Gu,
    Hi,
    Ml,
    Mr,
    Or,
    Pa,
    Ta,
    Te,
    Ur,
}

impl LangCode {
    pub const TABLE_ORDER: [LangCode; 11] = [
        LangCode::En,
        LangCode::Hi,
        LangCode::Ta,
        LangCode::Te,
        LangCode::Ml,
        LangCode::Ur,
        LangCode::Bn,
        LangCode::Gu,
        LangCode::Mr,
        LangCode::Or,
        LangCode::Pa,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LangCode::Bn => "bn",
            LangCode::En => "en",
            LangCode::Gu => "gu",
            LangCode::Hi => "hi",
            LangCode::Ml => "ml",
            LangCode::Mr => "mr",
            LangCode::Or => "or",
            LangCode::Pa => "pa",
            LangCode::Ta => "ta",
            LangCode::Te => "te",
            LangCode::Ur => "ur",
        }
    }

    /// Position in [`LangCode::TABLE_ORDER`].
    pub fn table_index(self) -> usize {
        LangCode::TABLE_ORDER
            .iter()
            .position(|&l| l == self)
            .expect("every code is in the table order")
    }
}

impl fmt::Display for LangCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LangCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LangCode::TABLE_ORDER
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::UnknownLang(s.to_string()))
    }
}

impl TryFrom<String> for LangCode {
    type Error = Error;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<LangCode> for String {
    fn from(l: LangCode) -> String {
        l.as_str().to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_roundtrip() {
        for l in LangCode::TABLE_ORDER {
            assert_eq!(l.as_str().parse::<LangCode>().unwrap(), l);
        }
        assert!(matches!("xx".parse::<LangCode>(), Err(Error::UnknownLang(c)) if c == "xx"));
    }

    #[test]
    fn ord_is_lexicographic() {
        let mut all = LangCode::TABLE_ORDER.to_vec();
        all.sort();
        let codes: Vec<_> = all.iter().map(|l| l.as_str()).collect();
        let mut sorted = codes.clone();
        sorted.sort();
        assert_eq!(codes, sorted);
    }
}
