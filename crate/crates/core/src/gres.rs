//! SLURM general-resource (GRES) expressions.
//!
//! A GRES expression is what `sinfo -o "%G"` prints per node class and what
//! `--gres=` accepts on submission: a comma-separated list of
//! `name[:subtype][:count]` segments, e.g. `gpu:k80ce:4,mps:no_consume:1`.
//! Counts may carry a binary unit suffix (`hbm:16G`).
//!
//! Parsing is lossless: rendering a parsed list reproduces the input text
//! exactly, including omitted counts and the original digit spelling.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Binary unit suffix on a GRES count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnitSuffix {
    K,
    M,
    G,
    T,
    P,
}

impl UnitSuffix {
    pub const ALL: [UnitSuffix; 5] = [Self::K, Self::M, Self::G, Self::T, Self::P];

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'K' => Some(Self::K),
            'M' => Some(Self::M),
            'G' => Some(Self::G),
            'T' => Some(Self::T),
            'P' => Some(Self::P),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Self::K => 'K',
            Self::M => 'M',
            Self::G => 'G',
            Self::T => 'T',
            Self::P => 'P',
        }
    }

    /// Power of 1024 this suffix stands for (K = 1 ... P = 5).
    pub fn rank(self) -> u32 {
        match self {
            Self::K => 1,
            Self::M => 2,
            Self::G => 3,
            Self::T => 4,
            Self::P => 5,
        }
    }

    pub fn multiplier(self) -> u64 {
        1u64 << (10 * self.rank())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GresError {
    #[error("empty field in GRES segment {segment}")]
    EmptySegment { segment: usize },
    #[error("malformed count {token:?} in GRES segment {segment}")]
    MalformedCount { segment: usize, token: String },
    #[error("GRES segment {segment} has {fields} colon-separated fields (at most 3 allowed)")]
    TooManyFields { segment: usize, fields: usize },
}

/// How a count was spelled in the source text.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct CountSpelling {
    digits: String,
    suffix: Option<UnitSuffix>,
}

/// One `name[:subtype][:count]` item of a GRES expression.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GresEntry {
    name: String,
    subtype: Option<String>,
    count: u64,
    // None when the count was omitted and defaulted to 1.
    spelling: Option<CountSpelling>,
}

fn valid_token(token: &str) -> bool {
    !token.is_empty() && !token.contains([':', ','])
}

impl GresEntry {
    /// Builds an entry with an explicit, unsuffixed count.
    ///
    /// Returns `None` when `name` or `subtype` is empty or contains `:` or `,`.
    pub fn new(name: impl Into<String>, subtype: Option<&str>, count: u64) -> Option<Self> {
        Self::with_spelling(
            name.into(),
            subtype.map(str::to_owned),
            count,
            Some(CountSpelling {
                digits: count.to_string(),
                suffix: None,
            }),
        )
    }

    /// Builds an entry whose count is written as `value` followed by `suffix`.
    ///
    /// Returns `None` on an invalid token or if the expanded count overflows.
    pub fn with_suffix(
        name: impl Into<String>,
        subtype: Option<&str>,
        value: u64,
        suffix: UnitSuffix,
    ) -> Option<Self> {
        let count = value.checked_mul(suffix.multiplier())?;
        Self::with_spelling(
            name.into(),
            subtype.map(str::to_owned),
            count,
            Some(CountSpelling {
                digits: value.to_string(),
                suffix: Some(suffix),
            }),
        )
    }

    fn with_spelling(
        name: String,
        subtype: Option<String>,
        count: u64,
        spelling: Option<CountSpelling>,
    ) -> Option<Self> {
        if !valid_token(&name) || subtype.as_deref().is_some_and(|s| !valid_token(s)) {
            return None;
        }
        Some(Self {
            name,
            subtype,
            count,
            spelling,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn subtype(&self) -> Option<&str> {
        self.subtype.as_deref()
    }

    /// Quantity in base units, after suffix expansion.
    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn count_suffix(&self) -> Option<UnitSuffix> {
        self.spelling.as_ref().and_then(|s| s.suffix)
    }

    /// Whether the source text spelled out a count.
    pub fn has_explicit_count(&self) -> bool {
        self.spelling.is_some()
    }

    fn parse_segment(segment: &str, index: usize) -> Result<Self, GresError> {
        if segment.is_empty() {
            return Err(GresError::EmptySegment { segment: index });
        }
        let tokens: Vec<&str> = segment.split(':').collect();
        if tokens.len() > 3 {
            return Err(GresError::TooManyFields {
                segment: index,
                fields: tokens.len(),
            });
        }
        if tokens.iter().take(2).any(|t| t.is_empty()) {
            return Err(GresError::EmptySegment { segment: index });
        }
        let name = tokens[0].to_owned();
        let (subtype, count_token) = match tokens.as_slice() {
            [_] => (None, None),
            [_, second] if is_count_token(second) => (None, Some(*second)),
            [_, second] => (Some((*second).to_owned()), None),
            [_, second, third] => (Some((*second).to_owned()), Some(*third)),
            _ => unreachable!("segment length checked above"),
        };
        let (count, spelling) = match count_token {
            None => (1, None),
            Some(token) => {
                let malformed = || GresError::MalformedCount {
                    segment: index,
                    token: token.to_owned(),
                };
                let (digits, suffix) = split_count(token).ok_or_else(malformed)?;
                let value: u64 = digits.parse().map_err(|_| malformed())?;
                let count = match suffix {
                    Some(s) => value.checked_mul(s.multiplier()).ok_or_else(malformed)?,
                    None => value,
                };
                (
                    count,
                    Some(CountSpelling {
                        digits: digits.to_owned(),
                        suffix,
                    }),
                )
            }
        };
        Ok(Self {
            name,
            subtype,
            count,
            spelling,
        })
    }
}

/// Splits `[0-9]+[KMGTP]?` into digits and suffix.
fn split_count(token: &str) -> Option<(&str, Option<UnitSuffix>)> {
    let (digits, suffix) = match token.chars().last() {
        Some(c) if c.is_ascii_alphabetic() => (&token[..token.len() - 1], Some(UnitSuffix::from_char(c)?)),
        _ => (token, None),
    };
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some((digits, suffix))
}

fn is_count_token(token: &str) -> bool {
    split_count(token).is_some()
}

impl fmt::Display for GresEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if let Some(subtype) = &self.subtype {
            write!(f, ":{subtype}")?;
        }
        if let Some(spelling) = &self.spelling {
            write!(f, ":{}", spelling.digits)?;
            if let Some(suffix) = spelling.suffix {
                write!(f, "{}", suffix.as_char())?;
            }
        }
        Ok(())
    }
}

/// Ordered list of GRES entries for one node class.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct GresList {
    entries: Vec<GresEntry>,
}

impl GresList {
    pub fn new(entries: Vec<GresEntry>) -> Self {
        Self { entries }
    }

    pub fn entries(&self) -> &[GresEntry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, GresEntry> {
        self.entries.iter()
    }
}

impl<'a> IntoIterator for &'a GresList {
    type Item = &'a GresEntry;
    type IntoIter = std::slice::Iter<'a, GresEntry>;

    fn into_iter(self) -> Self::IntoIter {
        self.entries.iter()
    }
}

impl FromIterator<GresEntry> for GresList {
    fn from_iter<I: IntoIterator<Item = GresEntry>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

impl Extend<GresEntry> for GresList {
    fn extend<I: IntoIterator<Item = GresEntry>>(&mut self, iter: I) {
        self.entries.extend(iter);
    }
}

impl fmt::Display for GresList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, entry) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{entry}")?;
        }
        Ok(())
    }
}

impl FromStr for GresList {
    type Err = GresError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_gres_expression(s)
    }
}

/// Parses one GRES expression, e.g. `gpu:v100:2,mps:no_consume:1`.
///
/// The empty string is the empty list. A two-field segment whose second field
/// looks like a count (`[0-9]+[KMGTP]?`) is `name:count`, otherwise
/// `name:subtype` with an implied count of 1.
pub fn parse_gres_expression(text: &str) -> Result<GresList, GresError> {
    if text.is_empty() {
        return Ok(GresList::default());
    }
    text.split(',')
        .enumerate()
        .map(|(i, segment)| GresEntry::parse_segment(segment, i))
        .collect::<Result<Vec<_>, _>>()
        .map(GresList::new)
}

pub fn render_gres_expression(list: &GresList) -> String {
    list.to_string()
}

/// Sums the counts of every entry named `resource_name` (and, if given, of
/// subtype `subtype_filter`) across all lists.
pub fn total_capacity<'a, I>(lists: I, resource_name: &str, subtype_filter: Option<&str>) -> u128
where
    I: IntoIterator<Item = &'a GresList>,
{
    lists
        .into_iter()
        .flat_map(GresList::iter)
        .filter(|e| e.name == resource_name)
        .filter(|e| subtype_filter.is_none_or(|want| e.subtype() == Some(want)))
        .map(|e| u128::from(e.count))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    const KEBNEKAISE_LINES: [&str; 5] = [
        "gpu:k80ce:4,mps:no_consume:1,gpuexcl:no_consume:1",
        "gpu:k80ce:8,mps:no_consume:1,gpuexcl:no_consume:1",
        "gpu:v100:2,mps:no_consume:1,gpuexcl:no_consume:1",
        "hbm:16G",
        "hbm:0",
    ];

    fn triple(e: &GresEntry) -> (&str, Option<&str>, u64) {
        (e.name(), e.subtype(), e.count())
    }

    #[test]
    fn parses_v100_line() {
        let list = parse_gres_expression(KEBNEKAISE_LINES[2]).unwrap();
        let got: Vec<_> = list.iter().map(triple).collect();
        assert_eq!(
            got,
            vec![
                ("gpu", Some("v100"), 2),
                ("mps", Some("no_consume"), 1),
                ("gpuexcl", Some("no_consume"), 1),
            ]
        );
    }

    #[test]
    fn suffixed_count_is_binary() {
        let list = parse_gres_expression("hbm:16G").unwrap();
        let e = &list.entries()[0];
        assert_eq!(e.name(), "hbm");
        assert_eq!(e.subtype(), None);
        assert_eq!(e.count(), 17_179_869_184);
        assert_eq!(e.count_suffix(), Some(UnitSuffix::G));
    }

    #[test]
    fn zero_count() {
        let list = parse_gres_expression("hbm:0").unwrap();
        assert_eq!(triple(&list.entries()[0]), ("hbm", None, 0));
    }

    #[test]
    fn empty_input_is_empty_list() {
        assert!(parse_gres_expression("").unwrap().is_empty());
        assert_eq!(render_gres_expression(&GresList::default()), "");
    }

    #[test]
    fn omitted_count_defaults_to_one() {
        let list = parse_gres_expression("gpu,gpu:k80").unwrap();
        assert_eq!(triple(&list.entries()[0]), ("gpu", None, 1));
        assert_eq!(triple(&list.entries()[1]), ("gpu", Some("k80"), 1));
        assert!(!list.entries()[1].has_explicit_count());
        assert_eq!(list.to_string(), "gpu,gpu:k80");
    }

    #[test]
    fn errors() {
        assert_eq!(
            parse_gres_expression("gpu:a:b:c:1"),
            Err(GresError::TooManyFields { segment: 0, fields: 5 })
        );
        assert_eq!(
            parse_gres_expression("gpu:1,,hbm:0"),
            Err(GresError::EmptySegment { segment: 1 })
        );
        assert_eq!(parse_gres_expression(","), Err(GresError::EmptySegment { segment: 0 }));
        assert_eq!(parse_gres_expression("gpu::4"), Err(GresError::EmptySegment { segment: 0 }));
        assert_eq!(parse_gres_expression("gpu:"), Err(GresError::EmptySegment { segment: 0 }));
        assert!(matches!(
            parse_gres_expression("gpu:k80:four"),
            Err(GresError::MalformedCount { .. })
        ));
        assert!(matches!(
            parse_gres_expression("gpu:k80:"),
            Err(GresError::MalformedCount { .. })
        ));
        assert!(matches!(
            parse_gres_expression("gpu:k80:4X"),
            Err(GresError::MalformedCount { .. })
        ));
        // 2^64 does not fit.
        assert!(matches!(
            parse_gres_expression("x:18446744073709551616"),
            Err(GresError::MalformedCount { .. })
        ));
        assert!(matches!(
            parse_gres_expression("x:16384P"),
            Err(GresError::MalformedCount { .. })
        ));
    }

    #[test]
    fn renders_constructed_entries() {
        let list: GresList = [
            GresEntry::new("gpu", Some("k80ce"), 4),
            GresEntry::new("mps", Some("no_consume"), 1),
            GresEntry::new("gpuexcl", Some("no_consume"), 1),
        ]
        .into_iter()
        .map(Option::unwrap)
        .collect();
        assert_eq!(list.to_string(), KEBNEKAISE_LINES[0]);
        let hbm = GresEntry::with_suffix("hbm", None, 16, UnitSuffix::G).unwrap();
        assert_eq!(hbm.to_string(), "hbm:16G");
        assert_eq!(hbm.count(), 16 << 30);
    }

    #[test]
    fn constructor_rejects_bad_tokens() {
        assert!(GresEntry::new("", None, 1).is_none());
        assert!(GresEntry::new("g:pu", None, 1).is_none());
        assert!(GresEntry::new("gpu", Some(""), 1).is_none());
        assert!(GresEntry::new("gpu", Some("a,b"), 1).is_none());
    }

    #[test]
    fn kebnekaise_lines_round_trip() {
        for line in KEBNEKAISE_LINES {
            assert_eq!(render_gres_expression(&parse_gres_expression(line).unwrap()), line);
        }
    }

    #[test]
    fn leading_zeros_survive_round_trip() {
        let list = parse_gres_expression("gpu:v100:007").unwrap();
        assert_eq!(list.entries()[0].count(), 7);
        assert_eq!(list.to_string(), "gpu:v100:007");
    }

    #[test]
    fn capacity_over_kebnekaise_lines() {
        let lists: Vec<GresList> = KEBNEKAISE_LINES.iter().map(|l| l.parse().unwrap()).collect();
        // 4 + 8 + 2
        assert_eq!(total_capacity(&lists, "gpu", None), 14);
        assert_eq!(total_capacity(&lists, "gpu", Some("v100")), 2);
        assert_eq!(total_capacity(&lists, "mps", Some("no_consume")), 3);
        assert_eq!(total_capacity(&lists, "hbm", None), 16 << 30);
        assert_eq!(total_capacity(&lists, "nonexistent", None), 0);
        assert_eq!(total_capacity(&[], "gpu", None), 0);
    }
}
