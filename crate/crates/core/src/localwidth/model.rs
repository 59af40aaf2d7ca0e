use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite alphabet with a length-reducing rewrite system, the
/// normal-form length bound `q`, the per-step interface bound `b` and the
/// width bound `R`.
///
/// Construction checks termination (every rule shrinks), local confluence
/// on all critical pairs (which with termination gives confluence), and
/// that no irreducible word is longer than `q`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocalModel {
    alphabet: Vec<char>,
    rules: Vec<(String, String)>,
    q: usize,
    b: usize,
    #[serde(rename = "R")]
    r: usize,
}

/// On-disk form: `{alphabet, rules: [[lhs, rhs], ...], q, b, R}`.
#[derive(Debug, Clone, Deserialize)]
struct ModelFile {
    alphabet: Vec<String>,
    rules: Vec<(String, String)>,
    q: usize,
    b: usize,
    #[serde(rename = "R")]
    r: usize,
}

impl LocalModel {
    pub fn new(alphabet: Vec<char>, rules: Vec<(String, String)>, q: usize, b: usize, r: usize) -> Result<Self> {
        let model = LocalModel {
            alphabet,
            rules,
            q,
            b,
            r,
        };
        model.validate()?;
        Ok(model)
    }

    /// The shipped model: the free left-regular band on `{a, b}`, whose
    /// normal forms are the words without repeated letters.
    pub fn toy(r: usize) -> Self {
        let rules = [("aa", "a"), ("bb", "b"), ("aba", "ab"), ("bab", "ba")]
            .iter()
            .map(|(l, r)| (l.to_string(), r.to_string()))
            .collect();
        LocalModel::new(vec!['a', 'b'], rules, 2, 2, r).expect("toy model is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::parse(format!("model: {e}")))?;
        let mut alphabet = Vec::new();
        for s in file.alphabet {
            let mut cs = s.chars();
            match (cs.next(), cs.next()) {
                (Some(c), None) => alphabet.push(c),
                _ => return Err(Error::InvalidModel(format!("symbol `{s}` is not a single character"))),
            }
        }
        LocalModel::new(alphabet, file.rules, file.q, file.b, file.r)
    }

    pub fn alphabet(&self) -> &[char] {
        &self.alphabet
    }

    pub fn rules(&self) -> &[(String, String)] {
        &self.rules
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn width(&self) -> usize {
        self.r
    }

    pub fn with_width(mut self, r: usize) -> Self {
        self.r = r;
        self
    }

    /// `S' = |Sigma^{<=q}|`.
    pub fn s_prime(&self) -> usize {
        (0..=self.q).map(|t| self.alphabet.len().pow(t as u32)).sum()
    }

    /// All words of length exactly `len`, lexicographic in alphabet order.
    pub fn words_of_length(&self, len: usize) -> Vec<String> {
        let mut out = vec![String::new()];
        for _ in 0..len {
            out = out
                .iter()
                .flat_map(|w| self.alphabet.iter().map(move |c| format!("{w}{c}")))
                .collect();
        }
        out
    }

    /// Irreducible words, shortest first.
    pub fn normal_forms(&self) -> Vec<String> {
        (0..=self.q)
            .flat_map(|len| self.words_of_length(len))
            .filter(|w| self.is_irreducible(w))
            .collect()
    }

    pub fn is_irreducible(&self, w: &str) -> bool {
        self.rules.iter().all(|(l, _)| !w.contains(l.as_str()))
    }

    /// Rewrites the leftmost redex (first rule on ties) once.
    fn step(&self, w: &str) -> Option<String> {
        self.rules
            .iter()
            .filter_map(|(l, r)| w.find(l.as_str()).map(|pos| (pos, l, r)))
            .min_by_key(|(pos, _, _)| *pos)
            .map(|(pos, l, r)| format!("{}{}{}", &w[..pos], r, &w[pos + l.len()..]))
    }

    pub fn normal_form(&self, w: &str) -> String {
        let mut cur = w.to_string();
        while let Some(next) = self.step(&cur) {
            cur = next;
        }
        cur
    }

    /// Every word reachable from `w` by one rewrite anywhere.
    pub fn one_step_rewrites(&self, w: &str) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for (l, r) in &self.rules {
            // overlapping occurrences count too, so no match_indices
            let mut start = 0;
            while let Some(off) = w[start..].find(l.as_str()) {
                let pos = start + off;
                out.insert(format!("{}{}{}", &w[..pos], r, &w[pos + l.len()..]));
                start = pos + w[pos..].chars().next().map_or(1, char::len_utf8);
            }
        }
        out
    }

    fn validate(&self) -> Result<()> {
        if self.alphabet.is_empty() {
            return Err(Error::InvalidModel("empty alphabet".into()));
        }
        let distinct: BTreeSet<char> = self.alphabet.iter().copied().collect();
        if distinct.len() != self.alphabet.len() {
            return Err(Error::InvalidModel("repeated alphabet symbol".into()));
        }
        if self.b == 0 {
            return Err(Error::InvalidModel("b must be at least 1".into()));
        }
        for (l, r) in &self.rules {
            if let Some(c) = l.chars().chain(r.chars()).find(|c| !distinct.contains(c)) {
                return Err(Error::InvalidModel(format!("rule {l} -> {r} uses `{c}` outside the alphabet")));
            }
            if r.chars().count() >= l.chars().count() {
                return Err(Error::InvalidModel(format!("rule {l} -> {r} does not shrink the word")));
            }
        }
        if let Some((word, x, y)) = self.critical_pair_failure() {
            return Err(Error::InvalidModel(format!(
                "not confluent: `{word}` reduces to distinct normal forms `{x}` and `{y}`"
            )));
        }
        if let Some(w) = self.words_of_length(self.q + 1).into_iter().find(|w| self.is_irreducible(w)) {
            return Err(Error::InvalidModel(format!("`{w}` is irreducible but longer than q = {}", self.q)));
        }
        Ok(())
    }

    /// Words where two rule applications overlap or nest.
    fn critical_words(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (l1, _) in &self.rules {
            let c1: Vec<char> = l1.chars().collect();
            for (l2, _) in &self.rules {
                let c2: Vec<char> = l2.chars().collect();
                // proper overlap: suffix of l1 equals prefix of l2
                for k in 1..c1.len().min(c2.len()) {
                    if c1[c1.len() - k..] == c2[..k] {
                        let mut w: String = c1.iter().collect();
                        w.extend(&c2[k..]);
                        out.push(w);
                    }
                }
                if l1 != l2 && l1.contains(l2.as_str()) {
                    out.push(l1.clone());
                }
            }
        }
        out
    }

    /// First critical word with two one-step rewrites whose normal forms
    /// differ, as `(word, nf1, nf2)`.
    fn critical_pair_failure(&self) -> Option<(String, String, String)> {
        for w in self.critical_words() {
            let forms: BTreeSet<String> = self.one_step_rewrites(&w).iter().map(|v| self.normal_form(v)).collect();
            let mut it = forms.into_iter();
            if let (Some(x), Some(y)) = (it.next(), it.next()) {
                return Some((w, x, y));
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_normal_forms() {
        let m = LocalModel::toy(2);
        assert_eq!(m.normal_form(""), "");
        assert_eq!(m.normal_form("aaa"), "a");
        assert_eq!(m.normal_form("abab"), "ab");
        assert_eq!(m.normal_form("bbaab"), "ba");
        assert_eq!(m.normal_forms(), ["", "a", "b", "ab", "ba"]);
        assert_eq!(m.s_prime(), 7);
    }

    #[test]
    fn idempotence_alone_is_not_bounded() {
        let rules = vec![("aa".into(), "a".into()), ("bb".into(), "b".into())];
        let err = LocalModel::new(vec!['a', 'b'], rules, 2, 2, 2).unwrap_err();
        assert!(err.to_string().contains("aba") || err.to_string().contains("bab"), "{err}");
    }

    #[test]
    fn non_confluent_model_is_rejected() {
        // "abc" -> "c" via ab, or "ac" via bc: both irreducible.
        let rules = vec![("ab".into(), "".into()), ("bc".into(), "a".into())];
        let err = LocalModel::new(vec!['a', 'b', 'c'], rules, 5, 1, 1).unwrap_err();
        assert!(matches!(err, Error::InvalidModel(ref s) if s.contains("not confluent")), "{err}");
    }

    #[test]
    fn growing_rule_is_rejected() {
        let rules = vec![("a".into(), "aa".into())];
        assert!(LocalModel::new(vec!['a'], rules, 1, 1, 1).is_err());
    }

    #[test]
    fn model_json() {
        let text = r#"{"alphabet":["a","b"],"rules":[["aa","a"],["bb","b"],["aba","ab"],["bab","ba"]],"q":2,"b":2,"R":3}"#;
        let m = LocalModel::from_json(text).unwrap();
        assert_eq!(m, LocalModel::toy(3));
        let back = serde_json::to_string(&m).unwrap();
        assert!(back.contains(r#""R":3"#));
        assert!(LocalModel::from_json(r#"{"alphabet":["ab"],"rules":[],"q":0,"b":1,"R":1}"#).is_err());
    }
}
