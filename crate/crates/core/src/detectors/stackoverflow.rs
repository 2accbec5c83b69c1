//! Stack Overflow link extraction and answer-page parsing.

use regex::Regex;

/// Full question links, optionally pointing at one answer, and the `/a/` and
/// `/q/` short forms.
pub const DEFAULT_LINK_PATTERN: &str = r"https?://(?:www\.)?stackoverflow\.com/(?:questions/\d+(?:/[A-Za-z0-9_%.~-]*)?(?:/\d+)?(?:\?[A-Za-z0-9_=&%.-]*)?(?:#\d+)?|[aq]/\d+(?:/\d+)?)";

/// Full question links only.
pub const FULL_LINK_PATTERN: &str = r"https?://(?:www\.)?stackoverflow\.com/questions/\d+(?:/[A-Za-z0-9_%.~-]*)?(?:/\d+)?(?:\?[A-Za-z0-9_=&%.-]*)?(?:#\d+)?";

/// Distinct links in order of first appearance.
pub fn extract_links(pattern: &Regex, text: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for m in pattern.find_iter(text) {
        let link = m.as_str().trim_end_matches(['.', ',', ';', ':']);
        if !out.iter().any(|l| l == link) {
            out.push(link.to_string());
        }
    }
    out
}

/// Answer id a link points at, if it names one.
pub fn answer_id(link: &str) -> Option<u64> {
    let rest = link.split("stackoverflow.com/").nth(1)?;
    if let Some((_, frag)) = rest.split_once('#') {
        return frag.parse().ok();
    }
    let parts: Vec<&str> = rest.split('?').next()?.split('/').collect();
    match parts.as_slice() {
        ["a", id, ..] => id.parse().ok(),
        ["questions", _, _, id, ..] => id.parse().ok(),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Answer {
    pub id: Option<u64>,
    /// Concatenated text of the answer's code blocks.
    pub code: String,
    /// Display name shown in the answer's signature.
    pub owner: Option<String>,
}

fn decode_entities(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(i) = rest.find('&') {
        out.push_str(&rest[..i]);
        rest = &rest[i..];
        let Some(end) = rest[..rest.len().min(12)].find(';') else {
            out.push('&');
            rest = &rest[1..];
            continue;
        };
        let name = &rest[1..end];
        let decoded = match name {
            "lt" => Some('<'),
            "gt" => Some('>'),
            "amp" => Some('&'),
            "quot" => Some('"'),
            "apos" => Some('\''),
            "nbsp" => Some(' '),
            _ if name.starts_with("#x") || name.starts_with("#X") => {
                u32::from_str_radix(&name[2..], 16).ok().and_then(char::from_u32)
            }
            _ if name.starts_with('#') => name[1..].parse().ok().and_then(char::from_u32),
            _ => None,
        };
        match decoded {
            Some(c) => {
                out.push(c);
                rest = &rest[end + 1..];
            }
            None => {
                out.push('&');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

fn strip_tags(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut in_tag = false;
    for c in s.chars() {
        match c {
            '<' => in_tag = true,
            '>' if in_tag => in_tag = false,
            _ if !in_tag => out.push(c),
            _ => {}
        }
    }
    out
}

fn code_blocks(html: &str) -> String {
    let re = Regex::new(r"(?s)<pre[^>]*>\s*<code[^>]*>(.*?)</code>\s*</pre>").expect("valid pattern");
    re.captures_iter(html)
        .map(|c| decode_entities(&strip_tags(&c[1])))
        .collect::<Vec<_>>()
        .join("\n")
}

fn signature_owner(html: &str) -> Option<String> {
    let details = Regex::new(r#"(?s)<div class="user-details"[^>]*>.*?<a [^>]*>(.*?)</a>"#).expect("valid pattern");
    let owner_block = html
        .find(r#"class="post-signature owner"#)
        .map(|i| &html[i..]);
    let pick = |h: &str| details.captures(h).map(|c| decode_entities(&strip_tags(&c[1])).trim().to_string());
    match owner_block.and_then(pick) {
        Some(o) => Some(o),
        None => details
            .captures_iter(html)
            .last()
            .map(|c| decode_entities(&strip_tags(&c[1])).trim().to_string()),
    }
    .filter(|o| !o.is_empty())
}

/// Splits a page into answer sections by their `data-answerid` attribute.
fn answer_sections(html: &str) -> Vec<(u64, &str)> {
    let re = Regex::new(r#"data-answerid="(\d+)""#).expect("valid pattern");
    let starts: Vec<(usize, u64)> = re
        .captures_iter(html)
        .filter_map(|c| Some((c.get(0)?.start(), c[1].parse().ok()?)))
        .collect();
    starts
        .iter()
        .enumerate()
        .map(|(i, (at, id))| {
            let end = starts.get(i + 1).map_or(html.len(), |(next, _)| *next);
            (*id, &html[*at..end])
        })
        .collect()
}

/// The answer a link refers to. A link naming an answer selects that answer;
/// a plain question link selects the first answer. When no answer is
/// selected the question post itself is used.
pub fn parse_answer(html: &str, answer: Option<u64>) -> Answer {
    let sections = answer_sections(html);
    let chosen = match answer {
        Some(id) => sections.iter().find(|(a, _)| *a == id),
        None => sections.first(),
    };
    match chosen {
        Some((id, block)) => Answer {
            id: Some(*id),
            code: code_blocks(block),
            owner: signature_owner(block),
        },
        None => {
            let question = match html.find("data-answerid=") {
                Some(at) => &html[..at],
                None => html,
            };
            Answer {
                id: None,
                code: code_blocks(question),
                owner: signature_owner(question),
            }
        }
    }
}
