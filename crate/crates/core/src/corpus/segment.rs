use crate::lang::LangCode;

fn terminators(lang: LangCode) -> &'static [char] {
    use LangCode::*;
    match lang {
        En | Ta | Te | Ml => &['.', '?', '!'],
        Hi | Mr | Bn | Or | Pa => &['\u{964}', '\u{965}', '?', '!'],
        Gu => &['.', '\u{964}', '\u{965}', '?', '!'],
        Ur => &['\u{6D4}', '\u{61F}', '!'],
    }
}

/// `word` is a single uppercase Latin letter followed by a period, e.g. the
/// "J." in "J. Smith".
fn is_initial(word: &str) -> bool {
    let mut chars = word.chars();
    matches!(
        (chars.next(), chars.next(), chars.next()),
        (Some(c), Some('.'), None) if c.is_ascii_uppercase()
    )
}

/// Rule-based sentence splitter over normalized text.
///
/// A sentence ends at a whitespace-delimited word whose last character is one
/// of the script's terminators. A period after a single uppercase Latin
/// letter does not end the sentence unless that initial opens the sentence.
pub fn segment_sentences(raw: &str, lang: LangCode) -> Vec<String> {
    let terms = terminators(lang);
    let mut sentences = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    for word in raw.split_whitespace() {
        current.push(word);
        let ends = word.chars().last().is_some_and(|c| terms.contains(&c));
        if ends && !(is_initial(word) && current.len() > 1) {
            sentences.push(current.join(" "));
            current.clear();
        }
    }
    if !current.is_empty() {
        sentences.push(current.join(" "));
    }
    sentences
}
