//! The conjunction subset of XRSL:
//!
//! ```text
//! &(executable="hello.sh")(arguments="a" "b")(runTimeEnvironment="KGPU6")
//! ```
//!
//! Attribute names are case-insensitive. Values are double- or
//! single-quoted strings (a doubled quote stands for itself) or bare words.
//! `(* ... *)` comments may appear wherever whitespace may.

use thiserror::Error;

use super::JobDescription;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum XrslError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    SyntaxError {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("job description has no executable")]
    MissingExecutable,
    #[error("invalid value for {attribute}: {message}")]
    InvalidValue { attribute: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Value {
    Str(String),
    List(Vec<Value>),
}

struct Relation {
    attribute: String,
    values: Vec<Value>,
}

struct Lexer<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn error(&self, at: usize, message: impl Into<String>) -> XrslError {
        let before = &self.text[..at];
        let line = before.matches('\n').count() + 1;
        let column = before.rfind('\n').map_or(before.chars().count(), |nl| before[nl + 1..].chars().count()) + 1;
        XrslError::SyntaxError {
            line,
            column,
            message: message.into(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn skip_trivia(&mut self) -> Result<(), XrslError> {
        loop {
            let trimmed = self.rest().trim_start();
            self.pos = self.text.len() - trimmed.len();
            if let Some(body) = trimmed.strip_prefix("(*") {
                let start = self.pos;
                match body.find("*)") {
                    Some(end) => self.pos += end + 4,
                    None => return Err(self.error(start, "unterminated comment")),
                }
            } else {
                return Ok(());
            }
        }
    }

    fn expect(&mut self, want: char) -> Result<(), XrslError> {
        self.skip_trivia()?;
        match self.peek() {
            Some(c) if c == want => {
                self.pos += c.len_utf8();
                Ok(())
            }
            Some(c) => Err(self.error(self.pos, format!("expected '{want}', found '{c}'"))),
            None => Err(self.error(self.pos, format!("expected '{want}', found end of input"))),
        }
    }

    fn quoted(&mut self, quote: char) -> Result<String, XrslError> {
        let start = self.pos;
        self.pos += 1;
        let mut out = String::new();
        loop {
            let Some(c) = self.peek() else {
                return Err(self.error(start, "unterminated string"));
            };
            self.pos += c.len_utf8();
            if c == quote {
                if self.peek() == Some(quote) {
                    self.pos += 1;
                    out.push(quote);
                } else {
                    return Ok(out);
                }
            } else {
                out.push(c);
            }
        }
    }

    fn bare(&mut self) -> String {
        let rest = self.rest();
        let end = rest
            .find(|c: char| c.is_whitespace() || "()=\"'&|!<>".contains(c))
            .unwrap_or(rest.len());
        self.pos += end;
        rest[..end].to_owned()
    }

    fn attribute(&mut self) -> Result<String, XrslError> {
        self.skip_trivia()?;
        let start = self.pos;
        let name = self.bare();
        if name.is_empty() {
            return Err(self.error(start, "expected attribute name"));
        }
        Ok(name)
    }

    /// Values up to (not including) the closing ')'.
    fn values(&mut self) -> Result<Vec<Value>, XrslError> {
        let mut values = Vec::new();
        loop {
            self.skip_trivia()?;
            match self.peek() {
                None => return Err(self.error(self.pos, "unbalanced parentheses: missing ')'")),
                Some(')') => return Ok(values),
                Some('(') => {
                    self.pos += 1;
                    let inner = self.values()?;
                    self.expect(')')?;
                    values.push(Value::List(inner));
                }
                Some(q @ ('"' | '\'')) => values.push(Value::Str(self.quoted(q)?)),
                Some(c) => {
                    let start = self.pos;
                    let word = self.bare();
                    if word.is_empty() {
                        return Err(self.error(start, format!("unexpected '{c}'")));
                    }
                    values.push(Value::Str(word));
                }
            }
        }
    }

    fn relation(&mut self) -> Result<Relation, XrslError> {
        self.expect('(')?;
        let attribute = self.attribute()?;
        self.skip_trivia()?;
        if self.peek() != Some('=') {
            return Err(self.error(self.pos, format!("missing '=' after attribute {attribute:?}")));
        }
        self.pos += 1;
        let values = self.values()?;
        self.expect(')')?;
        Ok(Relation { attribute, values })
    }

    fn request(&mut self) -> Result<Vec<Relation>, XrslError> {
        self.skip_trivia()?;
        if self.peek() == Some('&') {
            self.pos += 1;
        }
        let mut relations = Vec::new();
        loop {
            self.skip_trivia()?;
            match self.peek() {
                None => break,
                Some('(') => relations.push(self.relation()?),
                Some(')') => return Err(self.error(self.pos, "unbalanced parentheses: unexpected ')'")),
                Some(c) => return Err(self.error(self.pos, format!("expected '(', found '{c}'"))),
            }
        }
        if relations.is_empty() {
            return Err(self.error(self.pos, "empty job description"));
        }
        Ok(relations)
    }
}

fn strings(attribute: &str, values: Vec<Value>) -> Result<Vec<String>, XrslError> {
    values
        .into_iter()
        .map(|v| match v {
            Value::Str(s) => Ok(s),
            Value::List(_) => Err(XrslError::InvalidValue {
                attribute: attribute.to_owned(),
                message: "nested lists are not allowed".into(),
            }),
        })
        .collect()
}

fn single(attribute: &str, values: Vec<Value>) -> Result<String, XrslError> {
    let mut values = strings(attribute, values)?;
    if values.len() != 1 {
        return Err(XrslError::InvalidValue {
            attribute: attribute.to_owned(),
            message: format!("expected exactly one value, got {}", values.len()),
        });
    }
    Ok(values.remove(0))
}

fn single_line(attribute: &str, value: String) -> Result<String, XrslError> {
    if value.contains(['\n', '\r']) {
        return Err(XrslError::InvalidValue {
            attribute: attribute.to_owned(),
            message: "value must be a single line".into(),
        });
    }
    Ok(value)
}

/// Parses an XRSL job description, also returning warnings for attributes
/// that were ignored.
pub fn parse_xrsl_with_warnings(text: &str) -> Result<(JobDescription, Vec<String>), XrslError> {
    let relations = Lexer { text, pos: 0 }.request()?;
    let mut warnings = Vec::new();
    let mut executable: Option<String> = None;
    let mut job = JobDescription::new("");
    for Relation { attribute, values } in relations {
        match attribute.to_ascii_lowercase().as_str() {
            "executable" => {
                if executable.is_some() {
                    return Err(XrslError::InvalidValue {
                        attribute,
                        message: "given more than once".into(),
                    });
                }
                executable = Some(single(&attribute, values)?);
            }
            "arguments" => job.arguments.extend(strings(&attribute, values)?),
            "jobname" => job.job_name = Some(single_line(&attribute, single(&attribute, values)?)?),
            "count" => {
                let raw = single(&attribute, values)?;
                job.count = raw.parse().ok().filter(|&n: &u32| n >= 1).ok_or_else(|| {
                    XrslError::InvalidValue {
                        attribute: attribute.clone(),
                        message: format!("{raw:?} is not a positive integer"),
                    }
                })?;
            }
            "runtimeenvironment" => job.runtime_environments.extend(strings(&attribute, values)?),
            "stdout" => job.stdout_name = Some(single_line(&attribute, single(&attribute, values)?)?),
            "stderr" => job.stderr_name = Some(single_line(&attribute, single(&attribute, values)?)?),
            _ => warnings.push(format!("unknown attribute {attribute:?} ignored")),
        }
    }
    job.executable = executable
        .filter(|e| !e.is_empty())
        .ok_or(XrslError::MissingExecutable)?;
    Ok((job, warnings))
}

pub fn parse_xrsl(text: &str) -> Result<JobDescription, XrslError> {
    parse_xrsl_with_warnings(text).map(|(job, _)| job)
}
