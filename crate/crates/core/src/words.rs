//! Alphabets and words over small integer codes.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Symbol = u8;

pub const MAX_ALPHABET: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabet {
    size: usize,
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 || size > MAX_ALPHABET {
            return Err(Error::Alphabet(format!("size {size} not in 1..={MAX_ALPHABET}")));
        }
        Ok(Alphabet { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> {
        (0..self.size).map(|a| a as Symbol)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Word {
    symbols: Vec<Symbol>,
    alphabet: Alphabet,
}

impl Word {
    pub fn new(symbols: Vec<Symbol>, alphabet: Alphabet) -> Result<Self> {
        if let Some(&s) = symbols.iter().find(|&&s| s as usize >= alphabet.size) {
            return Err(Error::SymbolRange { symbol: s as usize, size: alphabet.size });
        }
        Ok(Word { symbols, alphabet })
    }

    /// Word over the smallest alphabet containing all its codes (at least 1).
    pub fn from_codes(symbols: Vec<Symbol>) -> Self {
        let size = symbols.iter().map(|&s| s as usize + 1).max().unwrap_or(1);
        Word { symbols, alphabet: Alphabet { size } }
    }

    /// Parses text, one symbol per character. Characters are coded in order of
    /// first appearance. With `alphabet = Some(k)` the alphabet has size k and
    /// must hold every distinct character; otherwise it is the number of
    /// distinct characters.
    pub fn parse(text: &str, alphabet: Option<usize>) -> Result<Self> {
        let mut seen: Vec<char> = Vec::new();
        let mut symbols = Vec::with_capacity(text.len());
        for c in text.chars() {
            let code = match seen.iter().position(|&d| d == c) {
                Some(i) => i,
                None => {
                    seen.push(c);
                    seen.len() - 1
                }
            };
            if code >= MAX_ALPHABET {
                return Err(Error::Parse(format!("more than {MAX_ALPHABET} distinct symbols")));
            }
            symbols.push(code as Symbol);
        }
        let size = match alphabet {
            Some(k) if k < seen.len() => {
                return Err(Error::Parse(format!(
                    "{} distinct symbols do not fit an alphabet of size {k}",
                    seen.len()
                )))
            }
            Some(k) => k,
            None => seen.len().max(1),
        };
        Word::new(symbols, Alphabet::new(size)?)
    }

    /// Parses text against a fixed label set: the code of a character is its
    /// index in `labels`, and the alphabet size is `labels` length.
    pub fn parse_labeled(text: &str, labels: &str) -> Result<Self> {
        let labels: Vec<char> = labels.chars().collect();
        let symbols = text
            .chars()
            .map(|c| {
                labels
                    .iter()
                    .position(|&d| d == c)
                    .map(|i| i as Symbol)
                    .ok_or_else(|| Error::Parse(format!("symbol {c:?} not in alphabet")))
            })
            .collect::<Result<Vec<_>>>()?;
        Word::new(symbols, Alphabet::new(labels.len())?)
    }

    /// Parses several words with one shared first-appearance coding.
    pub fn parse_many(texts: &[&str], alphabet: Option<usize>) -> Result<Vec<Self>> {
        let joined: String = texts.concat();
        let all = Word::parse(&joined, alphabet)?;
        let mut out = Vec::with_capacity(texts.len());
        let mut at = 0;
        for t in texts {
            let n = t.chars().count();
            out.push(all.slice(at..at + n));
            at += n;
        }
        Ok(out)
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn with_alphabet(mut self, alphabet: Alphabet) -> Result<Self> {
        if let Some(&s) = self.symbols.iter().find(|&&s| s as usize >= alphabet.size) {
            return Err(Error::SymbolRange { symbol: s as usize, size: alphabet.size });
        }
        self.alphabet = alphabet;
        Ok(self)
    }

    /// The length-n prefix of w repeated forever; n need not be a multiple of |w|.
    pub fn periodic_expand(&self, n: usize) -> Result<Word> {
        if self.is_empty() {
            return Err(Error::EmptyPeriod);
        }
        let symbols = self.symbols.iter().copied().cycle().take(n).collect();
        Ok(Word { symbols, alphabet: self.alphabet })
    }

    /// Length of the shortest u with u repeated |w|/|u| times equal to w.
    pub fn primitive_period(&self) -> Result<usize> {
        let k = self.len();
        if k == 0 {
            return Err(Error::EmptyPeriod);
        }
        let w = &self.symbols;
        Ok((1..=k)
            .find(|&l| k % l == 0 && (l..k).all(|i| w[i] == w[i - l]))
            .unwrap_or(k))
    }

    pub fn is_irreducible(&self) -> Result<bool> {
        Ok(self.primitive_period()? == self.len())
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> Word {
        Word { symbols: self.symbols[range].to_vec(), alphabet: self.alphabet }
    }

    pub fn split_half(&self) -> Result<(Word, Word)> {
        let n = self.len();
        if n % 2 == 1 {
            return Err(Error::OddLength(n));
        }
        Ok((self.slice(0..n / 2), self.slice(n / 2..n)))
    }

    /// For each symbol, the positions where it occurs.
    pub fn positions(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.alphabet.size];
        for (i, &s) in self.symbols.iter().enumerate() {
            out[s as usize].push(i);
        }
        out
    }

    pub fn has_distinct_symbols(&self) -> bool {
        let mut seen = vec![false; self.alphabet.size];
        self.symbols.iter().all(|&s| !std::mem::replace(&mut seen[s as usize], true))
    }
}

const DIGITS: &[u8] = b"0123456789abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ";

/// Codes below 62 print as one character each; larger alphabets print as a
/// comma-separated list.
impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.alphabet.size <= DIGITS.len() {
            for &s in &self.symbols {
                write!(f, "{}", DIGITS[s as usize] as char)?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.symbols.iter().map(|s| s.to_string()).collect();
            write!(f, "{}", parts.join(","))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s, None).unwrap()
    }

    #[test]
    fn expand_examples() {
        assert_eq!(w("aba").periodic_expand(8).unwrap(), w("abaabaab"));
        assert_eq!(w("ab").periodic_expand(2).unwrap(), w("ab"));
        assert!(w("abc").periodic_expand(0).unwrap().is_empty());
        assert_eq!(Word::from_codes(vec![]).periodic_expand(3), Err(Error::EmptyPeriod));
    }

    #[test]
    fn irreducible_examples() {
        assert!(!w("abab").is_irreducible().unwrap());
        assert!(!w("aaa").is_irreducible().unwrap());
        assert!(w("abba").is_irreducible().unwrap());
        assert!(Word::from_codes(vec![]).is_irreducible().is_err());
    }

    #[test]
    fn parse_codes_first_appearance() {
        assert_eq!(w("1234").symbols(), &[0, 1, 2, 3]);
        assert_eq!(w("baab").symbols(), &[0, 1, 1, 0]);
        let x = Word::parse("ab", Some(5)).unwrap();
        assert_eq!(x.alphabet().size(), 5);
        assert!(Word::parse("abc", Some(2)).is_err());
        let v = Word::parse_many(&["ba", "ab"], None).unwrap();
        assert_eq!(v[0].symbols(), &[0, 1]);
        assert_eq!(v[1].symbols(), &[1, 0]);
        assert_eq!(Word::parse_labeled("ba", "abc").unwrap().symbols(), &[1, 0]);
        assert!(Word::parse_labeled("z", "ab").is_err());
    }

    #[test]
    fn display_roundtrip() {
        let x = Word::from_codes(vec![0, 1, 1, 0, 2]);
        assert_eq!(x.to_string(), "01102");
    }
}
