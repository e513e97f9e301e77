//! Minimal streaming XML writer with two-space indentation.

use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Context {
    Text,
    Attribute,
}

fn escape_into(out: &mut String, value: &str, ctx: Context) {
    for c in value.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            // parsers normalise a bare CR to LF
            '\r' => out.push_str("&#xD;"),
            '"' if ctx == Context::Attribute => out.push_str("&quot;"),
            '\'' if ctx == Context::Attribute => out.push_str("&apos;"),
            '\t' if ctx == Context::Attribute => out.push_str("&#x9;"),
            '\n' if ctx == Context::Attribute => out.push_str("&#xA;"),
            _ => out.push(c),
        }
    }
}

/// Characters that cannot appear in an XML 1.0 document, even escaped.
pub fn is_xml_forbidden(c: char) -> bool {
    matches!(c, '\u{0}'..='\u{8}' | '\u{B}' | '\u{C}' | '\u{E}'..='\u{1F}' | '\u{FFFE}' | '\u{FFFF}')
}

pub fn escape_text(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    escape_into(&mut out, value, Context::Text);
    out
}

#[derive(Debug, Default)]
pub struct XmlWriter {
    out: String,
    open: Vec<&'static str>,
}

impl XmlWriter {
    pub fn new() -> Self {
        let mut w = Self::default();
        w.out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        w
    }

    fn indent(&mut self) {
        for _ in 0..self.open.len() {
            self.out.push_str("  ");
        }
    }

    fn start_tag(&mut self, name: &str, attrs: &[(&str, &str)]) {
        self.indent();
        self.out.push('<');
        self.out.push_str(name);
        for (key, value) in attrs {
            let _ = write!(self.out, " {key}=\"");
            escape_into(&mut self.out, value, Context::Attribute);
            self.out.push('"');
        }
    }

    pub fn begin(&mut self, name: &'static str, attrs: &[(&str, &str)]) {
        self.start_tag(name, attrs);
        self.out.push_str(">\n");
        self.open.push(name);
    }

    pub fn end(&mut self, name: &'static str) {
        let top = self.open.pop();
        debug_assert_eq!(top, Some(name), "mismatched end tag");
        self.indent();
        let _ = writeln!(self.out, "</{name}>");
    }

    pub fn empty(&mut self, name: &str, attrs: &[(&str, &str)]) {
        self.start_tag(name, attrs);
        self.out.push_str("/>\n");
    }

    /// `<name>value</name>` on one line.
    pub fn property(&mut self, name: &str, value: &str) {
        self.start_tag(name, &[]);
        self.out.push('>');
        escape_into(&mut self.out, value, Context::Text);
        let _ = writeln!(self.out, "</{name}>");
    }

    /// One `property` per value. Writes nothing for an empty list.
    pub fn properties<'a, I>(&mut self, name: &str, values: I)
    where
        I: IntoIterator<Item = &'a str>,
    {
        for value in values {
            self.property(name, value);
        }
    }

    pub fn finish(self) -> String {
        debug_assert!(self.open.is_empty(), "unclosed elements: {:?}", self.open);
        self.out
    }
}
