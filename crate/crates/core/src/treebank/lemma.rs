//! Rule-based lemmatization with a bundled exception table.
//!
//! Deterministic by construction: lowercase fold, irregular lookup, then
//! suffix rules chosen by the part-of-speech tag. Unknown forms come back
//! lowercased unchanged.

use std::collections::HashMap;
use std::sync::OnceLock;

/// Irregular forms that the suffix rules would mangle.
static IRREGULARS: &[(&str, &str)] = &[
    ("am", "be"),
    ("is", "be"),
    ("are", "be"),
    ("was", "be"),
    ("were", "be"),
    ("been", "be"),
    ("being", "be"),
    ("has", "have"),
    ("had", "have"),
    ("having", "have"),
    ("does", "do"),
    ("did", "do"),
    ("done", "do"),
    ("doing", "do"),
    ("said", "say"),
    ("told", "tell"),
    ("left", "leave"),
    ("sent", "send"),
    ("shot", "shoot"),
    ("went", "go"),
    ("gone", "go"),
    ("goes", "go"),
    ("laid", "lay"),
    ("got", "get"),
    ("gotten", "get"),
    ("made", "make"),
    ("making", "make"),
    ("took", "take"),
    ("taken", "take"),
    ("taking", "take"),
    ("came", "come"),
    ("coming", "come"),
    ("saw", "see"),
    ("seen", "see"),
    ("found", "find"),
    ("gave", "give"),
    ("given", "give"),
    ("giving", "give"),
    ("knew", "know"),
    ("known", "know"),
    ("thought", "think"),
    ("spoke", "speak"),
    ("spoken", "speak"),
    ("held", "hold"),
    ("kept", "keep"),
    ("stood", "stand"),
    ("ran", "run"),
    ("met", "meet"),
    ("paid", "pay"),
    ("felt", "feel"),
    ("rose", "rise"),
    ("fell", "fall"),
    ("lost", "lose"),
    ("meant", "mean"),
    ("began", "begin"),
    ("begun", "begin"),
    ("brought", "bring"),
    ("wrote", "write"),
    ("written", "write"),
    ("became", "become"),
    ("becoming", "become"),
    ("led", "lead"),
    ("children", "child"),
    ("men", "man"),
    ("women", "woman"),
    ("lives", "life"),
    ("feet", "foot"),
    ("mice", "mouse"),
    ("police", "police"),
    ("described", "describe"),
    ("describing", "describe"),
    ("received", "receive"),
    ("receiving", "receive"),
    ("rambling", "ramble"),
    ("barricaded", "barricade"),
    ("died", "die"),
    ("dying", "die"),
];

fn irregular_table() -> &'static HashMap<&'static str, &'static str> {
    static TABLE: OnceLock<HashMap<&'static str, &'static str>> = OnceLock::new();
    TABLE.get_or_init(|| IRREGULARS.iter().copied().collect())
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

fn ends_with_sibilant(word: &str) -> bool {
    word.ends_with('s')
        || word.ends_with('x')
        || word.ends_with('z')
        || word.ends_with("ch")
        || word.ends_with("sh")
}

/// Undoubles a trailing doubled consonant, except the stable ones
/// (kill, tell, miss, buzz keep their geminates).
fn undouble(stem: &str) -> String {
    let chars: Vec<char> = stem.chars().collect();
    let n = chars.len();
    if n >= 3 {
        let last = chars[n - 1];
        if last == chars[n - 2] && !is_vowel(last) && !matches!(last, 'l' | 's' | 'z' | 'f') {
            return chars[..n - 1].iter().collect();
        }
    }
    stem.to_string()
}

fn strip_plural(word: &str) -> String {
    if word.len() > 4 && word.ends_with("ies") {
        return format!("{}y", &word[..word.len() - 3]);
    }
    if word.len() > 3 && word.ends_with("es") {
        let stem = &word[..word.len() - 2];
        if ends_with_sibilant(stem) {
            return stem.to_string();
        }
    }
    if word.len() > 3 && word.ends_with('s') && !word.ends_with("ss") && !word.ends_with("us") && !word.ends_with("is") {
        return word[..word.len() - 1].to_string();
    }
    word.to_string()
}

fn strip_third_person(word: &str) -> String {
    strip_plural(word)
}

fn strip_past(word: &str) -> String {
    if word.ends_with("ied") {
        if word.len() > 4 {
            return format!("{}y", &word[..word.len() - 3]);
        }
        // tied, died, lied
        return word[..word.len() - 1].to_string();
    }
    if word.ends_with("eed") {
        return word[..word.len() - 1].to_string();
    }
    if word.len() > 3 && word.ends_with("ed") {
        let stem = &word[..word.len() - 2];
        if stem.len() < 3 {
            // aged -> age, used -> use
            return word[..word.len() - 1].to_string();
        }
        return undouble(stem);
    }
    word.to_string()
}

fn strip_gerund(word: &str) -> String {
    if word.len() > 4 && word.ends_with("ing") {
        let stem = &word[..word.len() - 3];
        if stem.len() < 3 {
            return format!("{stem}e");
        }
        return undouble(stem);
    }
    word.to_string()
}

/// Lemmatizes a token given its part-of-speech tag.
///
/// Total function: any input yields a lowercased lemma, falling back to the
/// lowercased token itself when no rule fires.
pub fn lemmatize(token: &str, pos: &str) -> String {
    let lower = token.to_lowercase();
    if let Some(lemma) = irregular_table().get(lower.as_str()) {
        return (*lemma).to_string();
    }
    match pos {
        "NNS" | "NNPS" => strip_plural(&lower),
        "VBZ" => strip_third_person(&lower),
        "VBD" | "VBN" => strip_past(&lower),
        "VBG" => strip_gerund(&lower),
        _ => lower,
    }
}

/// Tag-free stemming for evaluation-time token normalization: irregular
/// lookup, then gerund/past/plural rules in that order.
pub fn stem(token: &str) -> String {
    let lower = token.to_lowercase();
    if let Some(lemma) = irregular_table().get(lower.as_str()) {
        return (*lemma).to_string();
    }
    if lower.len() > 4 && lower.ends_with("ing") {
        return strip_gerund(&lower);
    }
    if lower.ends_with("ed") && lower.len() > 3 {
        return strip_past(&lower);
    }
    if lower.ends_with('s') {
        return strip_plural(&lower);
    }
    lower
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strips_regular_plurals() {
        assert_eq!(lemmatize("girls", "NNS"), "girl");
        assert_eq!(lemmatize("boys", "NNS"), "boy");
        assert_eq!(lemmatize("families", "NNS"), "family");
        assert_eq!(lemmatize("churches", "NNS"), "church");
        assert_eq!(lemmatize("killings", "NNS"), "killing");
        assert_eq!(lemmatize("glasses", "NNS"), "glass");
    }

    #[test]
    fn strips_verb_suffixes() {
        assert_eq!(lemmatize("walked", "VBD"), "walk");
        assert_eq!(lemmatize("stormed", "VBD"), "storm");
        assert_eq!(lemmatize("occurred", "VBD"), "occur");
        assert_eq!(lemmatize("planned", "VBN"), "plan");
        assert_eq!(lemmatize("stunned", "VBD"), "stun");
        assert_eq!(lemmatize("killing", "VBG"), "kill");
        assert_eq!(lemmatize("running", "VBG"), "run");
        assert_eq!(lemmatize("molesting", "VBG"), "molest");
        assert_eq!(lemmatize("opening", "VBG"), "open");
        assert_eq!(lemmatize("tied", "VBD"), "tie");
        assert_eq!(lemmatize("carried", "VBD"), "carry");
        assert_eq!(lemmatize("attended", "VBN"), "attend");
        assert_eq!(lemmatize("tormented", "VBN"), "torment");
        assert_eq!(lemmatize("offers", "VBZ"), "offer");
        assert_eq!(lemmatize("aged", "VBN"), "age");
    }

    #[test]
    fn resolves_irregulars_from_table() {
        assert_eq!(lemmatize("said", "VBD"), "say");
        assert_eq!(lemmatize("told", "VBD"), "tell");
        assert_eq!(lemmatize("left", "VBD"), "leave");
        assert_eq!(lemmatize("was", "VBD"), "be");
        assert_eq!(lemmatize("described", "VBD"), "describe");
        assert_eq!(lemmatize("rambling", "VBG"), "ramble");
    }

    #[test]
    fn case_folds_without_suffix_rule() {
        assert_eq!(lemmatize("Police", "NNP"), "police");
        assert_eq!(lemmatize("Amish", "NNP"), "amish");
        assert_eq!(lemmatize("THE", "DT"), "the");
    }

    #[test]
    fn unknown_forms_pass_through() {
        assert_eq!(lemmatize("zzyzx", "NN"), "zzyzx");
        assert_eq!(lemmatize("10:45", "CD"), "10:45");
    }

    #[test]
    fn stem_applies_rules_without_tags() {
        assert_eq!(stem("killings"), "killing");
        assert_eq!(stem("walked"), "walk");
        assert_eq!(stem("Said"), "say");
        assert_eq!(stem("girls"), "girl");
    }
}
