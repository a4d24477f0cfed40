//! Penn Treebank word tokenization.
//!
//! The rule set is the classic Treebank sed script as shipped in NLTK's
//! `TreebankWordTokenizer`: ordered regex rewrites that pad punctuation and
//! split contractions with spaces, followed by a whitespace split. Rules are
//! applied in the same order and with the same patterns so that output is
//! token-for-token identical to the reference. Case is preserved.

use std::fmt;
use std::ops::Deref;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

/// An ordered sequence of non-empty surface tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenSeq(Vec<String>);

impl TokenSeq {
    /// Builds a sequence, dropping empty strings.
    pub fn new<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        TokenSeq(
            tokens
                .into_iter()
                .map(Into::into)
                .filter(|t: &String| !t.is_empty())
                .collect(),
        )
    }

    pub fn as_slice(&self) -> &[String] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<String> {
        self.0
    }

    /// Space-joined form, suitable for re-tokenization.
    pub fn join(&self) -> String {
        self.0.join(" ")
    }
}

impl Deref for TokenSeq {
    type Target = [String];

    fn deref(&self) -> &[String] {
        &self.0
    }
}

impl<S: Into<String>> FromIterator<S> for TokenSeq {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        TokenSeq::new(iter)
    }
}

impl<'a> IntoIterator for &'a TokenSeq {
    type Item = &'a String;
    type IntoIter = std::slice::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Display for TokenSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.join())
    }
}

struct Rule {
    re: Regex,
    rep: &'static str,
}

fn rule(pattern: &str, rep: &'static str) -> Rule {
    Rule {
        re: Regex::new(pattern).expect("static tokenizer pattern"),
        rep,
    }
}

struct Rules {
    starting_quotes: Vec<Rule>,
    punctuation: Vec<Rule>,
    parens: Rule,
    double_dashes: Rule,
    ending_quotes: Vec<Rule>,
    contractions: Vec<Rule>,
}

// Python's `$` also matches before a single trailing newline; the `(\n?)\z`
// captures below reproduce that. The reference's `(?=\s)` lookahead on
// "wanna" is expressed by consuming the whitespace and writing it back.
static RULES: LazyLock<Rules> = LazyLock::new(|| Rules {
    starting_quotes: vec![
        rule(r#"^""#, "``"),
        rule(r"(``)", " $1 "),
        rule(r#"([ (\[{<])("|'{2})"#, "$1 `` "),
    ],
    punctuation: vec![
        rule(r"([:,])([^\d])", " $1 $2"),
        rule(r"([:,])(\n?)\z", " $1 $2"),
        rule(r"\.\.\.", " ... "),
        rule(r"[;@#$%&]", " $0 "),
        rule(r#"([^.])(\.)([\])}>"']*)\s*\z"#, "$1 $2$3 "),
        rule(r"[?!]", " $0 "),
        rule(r"([^'])' ", "$1 ' "),
    ],
    parens: rule(r"[\]\[(){}<>]", " $0 "),
    double_dashes: rule(r"--", " -- "),
    ending_quotes: vec![
        rule(r"''", " '' "),
        rule(r#"""#, " '' "),
        rule(r"([^' ])('[sS]|'[mM]|'[dD]|') ", "$1 $2 "),
        rule(r"([^' ])('ll|'LL|'re|'RE|'ve|'VE|n't|N'T) ", "$1 $2 "),
    ],
    contractions: vec![
        rule(r"(?i)\b(can)(not)\b", " $1 $2 "),
        rule(r"(?i)\b(d)('ye)\b", " $1 $2 "),
        rule(r"(?i)\b(gim)(me)\b", " $1 $2 "),
        rule(r"(?i)\b(gon)(na)\b", " $1 $2 "),
        rule(r"(?i)\b(got)(ta)\b", " $1 $2 "),
        rule(r"(?i)\b(lem)(me)\b", " $1 $2 "),
        rule(r"(?i)\b(more)('n)\b", " $1 $2 "),
        rule(r"(?i)\b(wan)(na)(\s)", " $1 $2 $3"),
        rule(r"(?i) ('t)(is)\b", " $1 $2 "),
        rule(r"(?i) ('t)(was)\b", " $1 $2 "),
    ],
});

fn apply(text: String, rule: &Rule) -> String {
    match rule.re.replace_all(&text, rule.rep) {
        std::borrow::Cow::Borrowed(_) => text,
        std::borrow::Cow::Owned(s) => s,
    }
}

/// Tokenizes raw text the way the Penn Treebank tokenizer does.
///
/// ```
/// let toks = zscore::tokenize("don't stop, um, now.");
/// assert_eq!(toks.as_slice(), ["do", "n't", "stop", ",", "um", ",", "now", "."]);
/// ```
pub fn tokenize(text: &str) -> TokenSeq {
    let rules = &*RULES;
    let mut text = text.to_owned();

    for r in &rules.starting_quotes {
        text = apply(text, r);
    }
    for r in &rules.punctuation {
        text = apply(text, r);
    }
    text = apply(text, &rules.parens);
    text = apply(text, &rules.double_dashes);

    text = format!(" {text} ");
    for r in &rules.ending_quotes {
        text = apply(text, r);
    }
    for r in &rules.contractions {
        text = apply(text, r);
    }

    TokenSeq(text.split_whitespace().map(str::to_owned).collect())
}

/// True when every character of the token is punctuation or a symbol.
///
/// Treebank bracket symbols such as `-LRB-` count as punctuation.
pub fn is_punct(token: &str) -> bool {
    matches!(token, "-LRB-" | "-RRB-" | "-LSB-" | "-RSB-" | "-LCB-" | "-RCB-")
        || (!token.is_empty()
            && token
                .chars()
                .all(|c| c.is_ascii_punctuation() || (!c.is_alphanumeric() && !c.is_whitespace())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        tokenize(s).into_inner()
    }

    #[test]
    fn empty_input() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("   \n\t ").is_empty());
    }

    #[test]
    fn generated_side_of_alignment_example() {
        assert_eq!(
            toks("i mean but Luna was truly aware"),
            ["i", "mean", "but", "Luna", "was", "truly", "aware"]
        );
    }

    #[test]
    fn contractions_and_commas() {
        assert_eq!(
            toks("don't stop, um, now."),
            ["do", "n't", "stop", ",", "um", ",", "now", "."]
        );
        assert_eq!(toks("gonna wanna"), ["gon", "na", "wan", "na"]);
    }

    #[test]
    fn trailing_colon_before_newline() {
        assert_eq!(toks("ends:\n"), ["ends", ":"]);
    }

    #[test]
    fn non_ascii_passes_through() {
        assert_eq!(toks("déjà vu"), ["déjà", "vu"]);
    }

    #[test]
    fn token_seq_drops_empty() {
        let seq = TokenSeq::new(["a", "", "b"]);
        assert_eq!(seq.as_slice(), ["a", "b"]);
    }

    #[test]
    fn punctuation_detection() {
        assert!(is_punct(","));
        assert!(is_punct("..."));
        assert!(is_punct("``"));
        assert!(is_punct("-LRB-"));
        assert!(!is_punct("n't"));
        assert!(!is_punct("'s"));
        assert!(!is_punct("uh-huh"));
        assert!(!is_punct(""));
    }
}
