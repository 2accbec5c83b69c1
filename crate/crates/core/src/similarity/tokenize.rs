//! Lightweight lexer producing normalized token streams for fingerprinting.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenStream {
    pub tokens: Vec<String>,
    pub source_path: Option<String>,
}

impl TokenStream {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn with_path(mut self, path: impl Into<String>) -> Self {
        self.source_path = Some(path.into());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Family {
    /// `//` and `/* */` comments.
    CLike,
    /// Like `CLike`, plus `'a` lifetimes.
    Rust,
    /// `//`, `/* */` and `#` comments.
    Php,
    /// `#` comments.
    Hash,
    /// Whitespace-separated words, nothing stripped.
    Plain,
}

fn family(extension: &str) -> Family {
    match extension.to_ascii_lowercase().as_str() {
        "c" | "h" | "cc" | "cpp" | "hpp" | "java" | "js" | "ts" | "go" | "cs" | "kt" | "swift"
        | "scala" | "m" => Family::CLike,
        "rs" => Family::Rust,
        "php" => Family::Php,
        "py" | "rb" | "sh" => Family::Hash,
        _ => Family::Plain,
    }
}

const OPERATORS: &[&str] = &[
    ">>>=", "<<=", ">>=", "...", "===", "!==", "**=", "->", "=>", "==", "!=", "<=", ">=", "&&",
    "||", "++", "--", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<", ">>", "::", "..", "**",
    "?.",
];

/// Splits `text` into tokens. Comments and whitespace are dropped for known
/// source extensions; string literals and identifiers are kept verbatim.
/// Unknown extensions fall back to whitespace splitting.
pub fn tokenize(text: &str, extension: &str) -> TokenStream {
    let text = text.replace("\r\n", "\n").replace('\r', "\n");
    let fam = family(extension);
    let tokens = if fam == Family::Plain {
        text.split_whitespace().map(str::to_string).collect()
    } else {
        lex(&text, fam)
    };
    TokenStream {
        tokens,
        source_path: None,
    }
}

fn lex(text: &str, fam: Family) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let n = chars.len();
    let mut out = Vec::new();
    let mut i = 0;
    let starts = |i: usize, s: &str| {
        let len = s.chars().count();
        i + len <= n && chars[i..i + len].iter().copied().eq(s.chars())
    };
    let slashes = matches!(fam, Family::CLike | Family::Rust | Family::Php);
    let hashes = matches!(fam, Family::Hash | Family::Php);

    while i < n {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if slashes && starts(i, "//") {
            while i < n && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if slashes && starts(i, "/*") {
            i += 2;
            while i < n && !starts(i, "*/") {
                i += 1;
            }
            i = (i + 2).min(n);
            continue;
        }
        if hashes && c == '#' && (i == 0 || chars[i - 1].is_whitespace() || fam == Family::Php) {
            while i < n && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        if c.is_alphabetic() || c == '_' || c == '$' {
            while i < n && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '$') {
                i += 1;
            }
        } else if c.is_ascii_digit() {
            while i < n && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '.') {
                if chars[i] == '.' && i + 1 < n && chars[i + 1] == '.' {
                    break;
                }
                i += 1;
            }
        } else if fam == Family::Hash && (starts(i, "\"\"\"") || starts(i, "'''")) {
            let quote: String = chars[i..i + 3].iter().collect();
            i += 3;
            while i < n && !starts(i, &quote) {
                i += if chars[i] == '\\' { 2 } else { 1 };
            }
            i = (i + 3).min(n);
        } else if c == '\'' && fam == Family::Rust && !is_rust_char_literal(&chars, i) {
            // lifetime or label
            i += 1;
            while i < n && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
        } else if c == '"' || c == '\'' || c == '`' {
            i += 1;
            while i < n && chars[i] != c {
                if chars[i] == '\\' {
                    i += 1;
                } else if chars[i] == '\n' && c != '`' {
                    break;
                }
                i += 1;
            }
            i = (i + 1).min(n);
        } else if let Some(op) = OPERATORS.iter().find(|op| starts(i, op)) {
            i += op.chars().count();
        } else {
            i += 1;
        }
        out.push(chars[start..i].iter().collect());
    }
    out
}

fn is_rust_char_literal(chars: &[char], i: usize) -> bool {
    match chars.get(i + 1) {
        Some('\\') => true,
        Some(_) => chars.get(i + 2) == Some(&'\''),
        None => false,
    }
}
