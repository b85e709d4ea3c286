//! Words over the scheduling alphabet `{1, ..., D}` and their
//! length-then-lexicographic enumeration `v_1 = eps, v_2, v_3, ...`.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// A finite word over `{1, ..., alphabet}`. Symbols are stored 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word {
    symbols: Vec<usize>,
    alphabet: usize,
}

impl Word {
    pub fn empty(alphabet: usize) -> Self {
        Word {
            symbols: Vec::new(),
            alphabet,
        }
    }

    pub fn new(symbols: Vec<usize>, alphabet: usize) -> Result<Self> {
        if alphabet == 0 {
            return Err(Error::InvalidAlphabet);
        }
        if let Some(&bad) = symbols.iter().find(|&&q| q == 0 || q > alphabet) {
            return Err(Error::InvalidWord(format!(
                "symbol {bad} outside 1..={alphabet}"
            )));
        }
        Ok(Word { symbols, alphabet })
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// `self` followed by `other`.
    pub fn concat(&self, other: &Word) -> Word {
        let mut symbols = Vec::with_capacity(self.len() + other.len());
        symbols.extend_from_slice(&self.symbols);
        symbols.extend_from_slice(&other.symbols);
        Word {
            symbols,
            alphabet: self.alphabet.max(other.alphabet),
        }
    }

    pub fn push(&mut self, q: usize) -> Result<()> {
        if q == 0 || q > self.alphabet {
            return Err(Error::InvalidWord(format!(
                "symbol {q} outside 1..={}",
                self.alphabet
            )));
        }
        self.symbols.push(q);
        Ok(())
    }

    /// `q · self · r`
    pub(crate) fn wrap(&self, first: usize, last: usize) -> Word {
        let mut symbols = Vec::with_capacity(self.len() + 2);
        symbols.push(first);
        symbols.extend_from_slice(&self.symbols);
        symbols.push(last);
        Word {
            symbols,
            alphabet: self.alphabet,
        }
    }

    /// Parses the text form: `eps`, a digit string such as `"21"` (alphabets
    /// up to 9), or space-separated integers.
    pub fn parse(text: &str, alphabet: usize) -> Result<Self> {
        let text = text.trim();
        if text == "eps" || text.is_empty() {
            return Word::new(Vec::new(), alphabet);
        }
        let symbols: Result<Vec<usize>> = if text.contains(char::is_whitespace) || alphabet > 9 {
            text.split_whitespace()
                .map(|tok| {
                    tok.parse::<usize>()
                        .map_err(|_| Error::InvalidWord(format!("bad symbol {tok:?} in {text:?}")))
                })
                .collect()
        } else {
            text.chars()
                .map(|ch| {
                    ch.to_digit(10)
                        .map(|d| d as usize)
                        .ok_or_else(|| Error::InvalidWord(format!("bad symbol {ch:?} in {text:?}")))
                })
                .collect()
        };
        Word::new(symbols?, alphabet)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.symbols.is_empty() {
            return f.write_str("eps");
        }
        if self.alphabet <= 9 {
            for q in &self.symbols {
                write!(f, "{q}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.symbols.iter().map(|q| q.to_string()).collect();
            f.write_str(&parts.join(" "))
        }
    }
}

/// Shorter words first; equal lengths compare symbol-wise.
impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.symbols.cmp(&other.symbols))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// `N(L) = sum_{j=0..L} D^j`, the number of words of length at most `L`.
pub fn word_count(max_len: usize, alphabet: usize) -> Result<usize> {
    if alphabet == 0 {
        return Err(Error::InvalidAlphabet);
    }
    let overflow = || Error::Overflow(format!("N({max_len}) over alphabet {alphabet}"));
    let mut total: usize = 0;
    let mut power: usize = 1;
    for j in 0..=max_len {
        total = total.checked_add(power).ok_or_else(overflow)?;
        if j < max_len {
            power = power.checked_mul(alphabet).ok_or_else(overflow)?;
        }
    }
    Ok(total)
}

/// The `index`-th word (1-based) of the enumeration.
pub fn index_to_word(index: usize, alphabet: usize) -> Result<Word> {
    if alphabet == 0 {
        return Err(Error::InvalidAlphabet);
    }
    if index == 0 {
        return Err(Error::InvalidArgument("word indices start at 1".into()));
    }
    // find the length k with N(k-1) < index <= N(k)
    let mut len = 0usize;
    let mut below: usize = 0; // N(len - 1)
    let mut level: usize = 1; // D^len
    while index > below + level {
        below += level;
        level = level
            .checked_mul(alphabet)
            .ok_or_else(|| Error::Overflow(format!("word index {index}")))?;
        len += 1;
    }
    let mut offset = index - below - 1;
    let mut symbols = vec![0usize; len];
    for slot in symbols.iter_mut().rev() {
        *slot = offset % alphabet + 1;
        offset /= alphabet;
    }
    Ok(Word { symbols, alphabet })
}

/// Inverse of [`index_to_word`].
pub fn word_to_index(word: &Word) -> Result<usize> {
    let d = word.alphabet;
    if d == 0 {
        return Err(Error::InvalidAlphabet);
    }
    if word.is_empty() {
        return Ok(1);
    }
    let overflow = || Error::Overflow(format!("index of word {word}"));
    let mut offset: usize = 0;
    for &q in &word.symbols {
        if q == 0 || q > d {
            return Err(Error::InvalidWord(format!("symbol {q} outside 1..={d}")));
        }
        offset = offset
            .checked_mul(d)
            .and_then(|x| x.checked_add(q - 1))
            .ok_or_else(overflow)?;
    }
    let below = word_count(word.len() - 1, d)?;
    below
        .checked_add(offset)
        .and_then(|x| x.checked_add(1))
        .ok_or_else(overflow)
}

/// All words of length at most `max_len`, in enumeration order.
pub fn words_up_to(max_len: usize, alphabet: usize) -> Result<Vec<Word>> {
    let count = word_count(max_len, alphabet)?;
    let mut out = Vec::with_capacity(count);
    out.push(Word::empty(alphabet));
    let mut start = 0;
    for _ in 0..max_len {
        let end = out.len();
        for i in start..end {
            for q in 1..=alphabet {
                let mut w = out[i].clone();
                w.symbols.push(q);
                out.push(w);
            }
        }
        start = end;
    }
    Ok(out)
}

/// Words of length exactly `len`, in enumeration order.
pub fn words_of_length(len: usize, alphabet: usize) -> Result<Vec<Word>> {
    let mut all = words_up_to(len, alphabet)?;
    let skip = if len == 0 { 0 } else { word_count(len - 1, alphabet)? };
    Ok(all.split_off(skip))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Brute-force enumeration: every tuple of each length, sorted by the
    /// ordering rule written out directly.
    fn brute_enumeration(max_len: usize, d: usize) -> Vec<Vec<usize>> {
        let mut all: Vec<Vec<usize>> = vec![vec![]];
        let mut frontier: Vec<Vec<usize>> = vec![vec![]];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &frontier {
                for q in 1..=d {
                    let mut x = w.clone();
                    x.push(q);
                    next.push(x);
                }
            }
            all.extend(next.iter().cloned());
            frontier = next;
        }
        all.sort_by(|a, b| {
            if a.len() != b.len() {
                return a.len().cmp(&b.len());
            }
            for (x, y) in a.iter().zip(b) {
                if x != y {
                    return x.cmp(y);
                }
            }
            Ordering::Equal
        });
        all
    }

    #[test]
    fn counts() {
        assert_eq!(word_count(0, 2).unwrap(), 1);
        assert_eq!(word_count(1, 2).unwrap(), 3);
        assert_eq!(word_count(2, 3).unwrap(), 13);
        assert!(matches!(word_count(3, 0), Err(Error::InvalidAlphabet)));
        assert!(matches!(word_count(200, 3), Err(Error::Overflow(_))));
    }

    #[test]
    fn index_examples() {
        assert!(index_to_word(1, 2).unwrap().is_empty());
        assert_eq!(index_to_word(6, 2).unwrap().symbols(), &[2, 1]);
        assert_eq!(index_to_word(4, 3).unwrap().symbols(), &[3]);
        assert_eq!(index_to_word(5, 3).unwrap().symbols(), &[1, 1]);
        assert_eq!(word_to_index(&Word::new(vec![1, 2], 2).unwrap()).unwrap(), 5);
        assert_eq!(word_to_index(&Word::empty(2)).unwrap(), 1);
    }

    #[test]
    fn matches_brute_force() {
        for d in 1..=3 {
            let brute = brute_enumeration(5, d);
            let fast = words_up_to(5, d).unwrap();
            assert_eq!(brute.len(), fast.len());
            for (i, (b, f)) in brute.iter().zip(&fast).enumerate() {
                assert_eq!(b.as_slice(), f.symbols());
                assert_eq!(index_to_word(i + 1, d).unwrap().symbols(), b.as_slice());
            }
        }
    }

    #[test]
    fn roundtrip_small_alphabets() {
        for d in 1..=3 {
            for i in 1..=word_count(6, d).unwrap() {
                let w = index_to_word(i, d).unwrap();
                assert_eq!(word_to_index(&w).unwrap(), i);
            }
        }
    }

    #[test]
    fn invalid_symbols() {
        assert!(matches!(Word::new(vec![3], 2), Err(Error::InvalidWord(_))));
        assert!(matches!(Word::new(vec![0], 2), Err(Error::InvalidWord(_))));
        assert!(matches!(Word::new(vec![1], 0), Err(Error::InvalidAlphabet)));
        let forged = Word {
            symbols: vec![4],
            alphabet: 2,
        };
        assert!(matches!(word_to_index(&forged), Err(Error::InvalidWord(_))));
    }

    #[test]
    fn text_form() {
        let w = Word::new(vec![2, 1], 2).unwrap();
        assert_eq!(w.to_string(), "21");
        assert_eq!(Word::parse("21", 2).unwrap(), w);
        assert_eq!(Word::empty(3).to_string(), "eps");
        assert!(Word::parse("eps", 3).unwrap().is_empty());
        let big = Word::new(vec![10, 3], 12).unwrap();
        assert_eq!(big.to_string(), "10 3");
        assert_eq!(Word::parse("10 3", 12).unwrap(), big);
        assert!(Word::parse("13", 2).is_err());
    }

    #[test]
    fn prefix_set_is_words_up_to_length() {
        let d = 3;
        let words = words_up_to(3, d).unwrap();
        assert_eq!(words.len(), word_count(3, d).unwrap());
        assert!(words.iter().all(|w| w.len() <= 3));
        let uniq: std::collections::HashSet<_> = words.iter().cloned().collect();
        assert_eq!(uniq.len(), words.len());
        assert_eq!(words_of_length(2, d).unwrap().len(), 9);
    }

    proptest! {
        #[test]
        fn order_is_consistent_with_indices(d in 1usize..5, i in 1usize..400, j in 1usize..400) {
            let wi = index_to_word(i, d).unwrap();
            let wj = index_to_word(j, d).unwrap();
            prop_assert_eq!(i.cmp(&j), wi.cmp(&wj));
        }

        #[test]
        fn appending_moves_later(d in 1usize..5, i in 1usize..2000, q in 1usize..5) {
            let q = (q - 1) % d + 1;
            let w = index_to_word(i, d).unwrap();
            let mut wq = w.clone();
            wq.push(q).unwrap();
            prop_assert!(word_to_index(&w).unwrap() < word_to_index(&wq).unwrap());
        }

        #[test]
        fn text_roundtrip(d in 1usize..14, syms in proptest::collection::vec(1usize..14, 0..6)) {
            let syms: Vec<usize> = syms.into_iter().map(|s| (s - 1) % d + 1).collect();
            let w = Word::new(syms, d).unwrap();
            prop_assert_eq!(Word::parse(&w.to_string(), d).unwrap(), w);
        }
    }
}
